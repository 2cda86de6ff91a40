//! Adaptive Gauss–Kronrod quadrature with a global refinement queue.
//!
//! The line integrals in this crate range over intervals spanning many orders of
//! magnitude (certified truncation radii for algebraically decaying fields can reach
//! 1e11), so panels are refined globally: the panel with the largest error estimate is
//! bisected until the summed estimate meets the tolerance or the evaluation budget is
//! exhausted. Refinement order and the final summation order are both deterministic,
//! so repeated runs produce bit-identical values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

/// Tolerances and budget for one adaptive integral.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Hard cap on integrand evaluations per integral.
    pub max_evals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_evals: 1_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(QuadError::BadSpec);
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature tolerances must be positive")]
    BadSpec,
    #[error("quadrature budget exhausted: {evals} evaluations, error estimate {err_est:.3e} above tolerance {tol:.3e}")]
    BudgetExhausted { evals: usize, err_est: f64, tol: f64 },
    #[error("integrand returned a non-finite value near t = {at:.6e}")]
    NonFinite { at: f64 },
}

/// Value, error estimate, and cost of a converged integral.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub err_est: f64,
    pub evals: usize,
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule; standard QUADPACK dqk15 constants.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

trait Accumulate: Copy {
    fn zero() -> Self;
    fn add_scaled(self, x: Self, w: f64) -> Self;
    fn scaled(self, w: f64) -> Self;
    fn magnitude(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Accumulate for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(self, x: Self, w: f64) -> Self {
        self + w * x
    }
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Accumulate for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(self, x: Self, w: f64) -> Self {
        self + x * w
    }
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

struct HeapEntry {
    err: f64,
    a: f64,
    idx: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a && self.idx == other.idx
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // max-heap on error; ties broken by interval start then index so the
        // refinement order never depends on allocation order
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
            .then(other.idx.cmp(&self.idx))
    }
}

fn gk15<T: Accumulate, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Result<(T, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = T::zero();
    let mut gauss = T::zero();
    let mut res_abs = 0.0;
    for (i, &x) in XGK.iter().enumerate() {
        let w = WGK[i];
        if x == 0.0 {
            let v = f(center);
            if !v.is_finite() {
                return Err(QuadError::NonFinite { at: center });
            }
            kronrod = kronrod.add_scaled(v, w);
            gauss = gauss.add_scaled(v, WG[3]);
            res_abs += w * v.magnitude();
        } else {
            let v1 = f(center - half * x);
            let v2 = f(center + half * x);
            if !v1.is_finite() {
                return Err(QuadError::NonFinite { at: center - half * x });
            }
            if !v2.is_finite() {
                return Err(QuadError::NonFinite { at: center + half * x });
            }
            kronrod = kronrod.add_scaled(v1, w).add_scaled(v2, w);
            if i % 2 == 1 {
                let wg = WG[i / 2];
                gauss = gauss.add_scaled(v1, wg).add_scaled(v2, wg);
            }
            res_abs += w * (v1.magnitude() + v2.magnitude());
        }
    }
    let value = kronrod.scaled(half);
    let diff = kronrod.add_scaled(gauss, -1.0).magnitude();
    // QUADPACK-style error rescaling keeps estimates honest on rough panels
    let res_abs = res_abs * half.abs();
    let raw = diff * half.abs();
    let err = if res_abs > 0.0 && raw > 0.0 {
        let scale = (200.0 * raw / res_abs).powf(1.5);
        if scale < 1.0 {
            res_abs * scale
        } else {
            raw.min(res_abs)
        }
    } else {
        raw
    };
    Ok((value, err))
}

fn integrate_impl<T: Accumulate, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature<T>, QuadError> {
    spec.validate()?;
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            err_est: 0.0,
            evals: 0,
        });
    }
    let mut evals = 0usize;
    let mut panels: Vec<Panel<T>> = Vec::new();
    let mut heap = BinaryHeap::new();
    // Seed with a modest uniform split so a tiny central feature inside a huge
    // interval is seen before refinement starts.
    let seeds = 8;
    for i in 0..seeds {
        let pa = a + (b - a) * i as f64 / seeds as f64;
        let pb = a + (b - a) * (i + 1) as f64 / seeds as f64;
        let (v, e) = gk15(&mut f, pa, pb)?;
        evals += 15;
        heap.push(HeapEntry { err: e, a: pa, idx: panels.len() });
        panels.push(Panel { a: pa, b: pb, value: v, err: e });
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let total_mag: f64 = {
            let mut acc = T::zero();
            for p in &panels {
                acc = acc.add_scaled(p.value, 1.0);
            }
            acc.magnitude()
        };
        let tol = spec.abs_tol.max(spec.rel_tol * total_mag);
        if total_err <= tol {
            break;
        }
        if evals + 30 > spec.max_evals {
            return Err(QuadError::BudgetExhausted {
                evals,
                err_est: total_err,
                tol,
            });
        }
        let worst = loop {
            match heap.pop() {
                Some(e) if panels[e.idx].err == e.err && panels[e.idx].a == e.a => break e.idx,
                Some(_) => continue, // stale entry
                None => break usize::MAX,
            }
        };
        if worst == usize::MAX {
            break;
        }
        let (pa, pb) = (panels[worst].a, panels[worst].b);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // interval at floating-point resolution; accept as-is
            panels[worst].err = 0.0;
            continue;
        }
        let (v1, e1) = gk15(&mut f, pa, mid)?;
        let (v2, e2) = gk15(&mut f, mid, pb)?;
        evals += 30;
        panels[worst] = Panel { a: pa, b: mid, value: v1, err: e1 };
        heap.push(HeapEntry { err: e1, a: pa, idx: worst });
        heap.push(HeapEntry { err: e2, a: mid, idx: panels.len() });
        panels.push(Panel { a: mid, b: pb, value: v2, err: e2 });
    }
    // Deterministic summation order: by interval start.
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = T::zero();
    let mut err = 0.0;
    for p in &panels {
        value = value.add_scaled(p.value, 1.0);
        err += p.err;
    }
    Ok(Quadrature { value, err_est: err, evals })
}

/// Adaptive integral of a real integrand over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature<f64>, QuadError> {
    integrate_impl(f, a, b, spec)
}

/// Adaptive integral of a complex integrand over `[a, b]`.
pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature<Complex64>, QuadError> {
    integrate_impl(f, a, b, spec)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_integral() {
        let spec = QuadratureSpec::default();
        let q = integrate(|t| (-t * t / 2.0).exp(), -40.0, 40.0, &spec).unwrap();
        assert_relative_eq!(q.value, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn huge_interval_with_central_bump() {
        // the global queue must find a width-1 bump inside [-1e9, 1e9]
        let spec = QuadratureSpec::default();
        let q = integrate(|t| (-t * t).exp(), -1e9, 1e9, &spec).unwrap();
        assert_relative_eq!(q.value, std::f64::consts::PI.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn algebraic_tail() {
        let spec = QuadratureSpec::default();
        // ∫_1^1e8 t^{-3/2} dt = 2 (1 - 1e-4)
        let q = integrate(|t| t.powf(-1.5), 1.0, 1e8, &spec).unwrap();
        assert_relative_eq!(q.value, 2.0 * (1.0 - 1e-4), max_relative = 1e-10);
    }

    #[test]
    fn complex_oscillatory() {
        let spec = QuadratureSpec::default();
        // ∫ e^{i t} e^{-t^2} dt = sqrt(pi) e^{-1/4}
        let q = integrate_complex(
            |t| Complex64::new(0.0, t).exp() * (-t * t).exp(),
            -12.0,
            12.0,
            &spec,
        )
        .unwrap();
        assert_relative_eq!(q.value.re, std::f64::consts::PI.sqrt() * (-0.25f64).exp(), max_relative = 1e-12);
        assert!(q.value.im.abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let spec = QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_evals: 200,
        };
        let r = integrate(|t| (50.0 * t).sin() / (1.0 + t * t), -50.0, 50.0, &spec);
        assert!(matches!(r, Err(QuadError::BudgetExhausted { .. })));
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(12);
        // exact for polynomials up to degree 23
        let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(10)).sum();
        assert_relative_eq!(s, 2.0 / 11.0, max_relative = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn determinism() {
        let spec = QuadratureSpec::default();
        let a = integrate(|t| (t.sin() * 3.0).cos() * (-t * t / 8.0).exp(), -30.0, 30.0, &spec).unwrap();
        let b = integrate(|t| (t.sin() * 3.0).cos() * (-t * t / 8.0).exp(), -30.0, 30.0, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
