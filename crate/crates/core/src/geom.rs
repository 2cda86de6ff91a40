//! Points, directions, and the impact-plane frames that parametrize lines `tω + ξ`.
//!
//! Everything is stored in fixed `[f64; 3]` coordinates; two-dimensional models simply
//! keep the third component at zero. A [`LineFrame`] bundles a unit direction `ω` with
//! an orthonormal basis of the impact plane `Λ_ω` (the hyperplane through the origin
//! orthogonal to `ω`), so a point of `Λ_ω` is addressed by `d-1` coordinates.

use serde::{Deserialize, Serialize};

/// Ambient point or vector. 2D data lives in the first two slots.
pub type Point = [f64; 3];

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Point, c: f64) -> Point {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn is_finite(a: Point) -> bool {
    a.iter().all(|c| c.is_finite())
}

/// A direction on the unit sphere together with an orthonormal basis of its
/// impact plane. For `d = 2` the basis is the single vector `ω⊥ = (-ω₂, ω₁)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineFrame {
    pub dimension: usize,
    pub omega: Point,
    /// `dimension - 1` orthonormal vectors spanning `Λ_ω`.
    pub basis: Vec<Point>,
}

const ORTHO_TOL: f64 = 1e-14;

impl LineFrame {
    /// 2D frame from the polar angle of `ω`.
    pub fn from_angle(theta: f64) -> Self {
        let omega = [theta.cos(), theta.sin(), 0.0];
        LineFrame {
            dimension: 2,
            omega,
            basis: vec![[-omega[1], omega[0], 0.0]],
        }
    }

    /// Frame for an arbitrary direction; normalizes the input. The basis is built
    /// deterministically: Gram-Schmidt against the coordinate axis least aligned
    /// with `ω`, then the cross product.
    pub fn from_direction(dimension: usize, omega: Point) -> Self {
        assert!(dimension == 2 || dimension == 3, "dimension must be 2 or 3");
        let n = norm(omega);
        assert!(n > 0.0 && n.is_finite(), "direction must be nonzero");
        let omega = scale(omega, 1.0 / n);
        if dimension == 2 {
            assert!(omega[2] == 0.0, "2D direction must have zero third component");
            return LineFrame {
                dimension,
                omega,
                basis: vec![[-omega[1], omega[0], 0.0]],
            };
        }
        let axes: [Point; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let (ax, _) = axes
            .iter()
            .map(|&e| (e, dot(e, omega).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let mut b1 = sub(ax, scale(omega, dot(ax, omega)));
        b1 = scale(b1, 1.0 / norm(b1));
        let b2 = cross(omega, b1);
        LineFrame {
            dimension,
            omega,
            basis: vec![b1, b2],
        }
    }

    /// Reversed direction; the basis is reflected so the frame stays right-handed
    /// in 3D and `ω⊥` follows the 2D convention.
    pub fn reversed(&self) -> Self {
        LineFrame::from_direction(self.dimension, scale(self.omega, -1.0))
    }

    /// Map impact-plane coordinates to the ambient point `ξ = Σ xiᵢ bᵢ`.
    pub fn embed(&self, xi: &[f64]) -> Point {
        debug_assert_eq!(xi.len(), self.dimension - 1);
        let mut p = [0.0; 3];
        for (c, b) in xi.iter().zip(&self.basis) {
            p = add(p, scale(*b, *c));
        }
        p
    }

    /// Orthogonal projection of an ambient point onto `Λ_ω`, in basis coordinates.
    pub fn project(&self, x: Point) -> Vec<f64> {
        self.basis.iter().map(|&b| dot(x, b)).collect()
    }

    /// Frame consistency: unit direction, orthonormal basis, orthogonality to `ω`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = (norm(self.omega) - 1.0).abs();
        for (i, &bi) in self.basis.iter().enumerate() {
            worst = worst.max((norm(bi) - 1.0).abs());
            worst = worst.max(dot(bi, self.omega).abs());
            for &bj in &self.basis[i + 1..] {
                worst = worst.max(dot(bi, bj).abs());
            }
        }
        worst
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormality_defect() <= ORTHO_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_2d_perp_convention() {
        let f = LineFrame::from_angle(0.3);
        assert!(f.is_orthonormal());
        assert!((f.basis[0][0] + f.omega[1]).abs() < 1e-15);
        assert!((f.basis[0][1] - f.omega[0]).abs() < 1e-15);
    }

    #[test]
    fn frame_3d_orthonormal() {
        for &w in &[[0.3, -0.4, 0.8], [1.0, 0.0, 0.0], [0.0, 0.0, -2.0]] {
            let f = LineFrame::from_direction(3, w);
            assert!(f.is_orthonormal(), "defect {}", f.orthonormality_defect());
        }
    }

    #[test]
    fn embed_project_roundtrip() {
        let f = LineFrame::from_direction(3, [0.2, 0.5, -0.7]);
        let xi = [1.25, -0.5];
        let p = f.embed(&xi);
        let back = f.project(p);
        assert!((back[0] - xi[0]).abs() < 1e-14);
        assert!((back[1] - xi[1]).abs() < 1e-14);
        assert!(dot(p, f.omega).abs() < 1e-14);
    }
}
