fn main() {
    // Dense eigensolves and matrix products go through the system BLAS/LAPACK.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
