//! Electric potentials `V` and magnetic vector potentials `A` as sums of analytic
//! terms with hand-coded exact derivatives.
//!
//! Magnetic terms are generated from radial stream functions, `A = ∇ψ × ẑ`
//! (in 2D this is `A = (∂₂ψ, -∂₁ψ)`), which makes the total 2D flux of the field
//! `B = ∂A₁/∂x₂ - ∂A₂/∂x₁ = Δψ` structurally zero and keeps every built-in model
//! short-range. `gauge_gradient` terms add a pure gradient `∇φ` of a decaying
//! Gaussian profile and leave `B` and all line transforms unchanged.
//!
//! Every term also certifies its own decay: closed-form tail integrals of the radial
//! envelopes drive the truncation radii used by the quadrature layers, and per-term
//! line-integral bounds drive the symbol-support radius of the operator module.

use crate::geom::{self, Point};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Decay exponent reported for terms with super-polynomial decay. The tail
/// formulas only ever use `min{1, rho - 1}` and `(1 + s)^{1 - rho}`, for which
/// this cap is effectively infinite.
pub const RHO_CAP: f64 = 10.0;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("{field}: width must be positive, got {value}")]
    NonPositiveWidth { field: String, value: f64 },
    #[error("{field}: decay exponent p must exceed 1, got {value}")]
    BadExponent { field: String, value: f64 },
    #[error("{field}: coordinates must be finite")]
    NonFinite { field: String },
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("evaluation point has non-finite coordinates")]
    NonFinitePoint,
    #[error("operation requires a 2D model")]
    Requires2D,
    #[error("gauge profile must decay at infinity: {0}")]
    BadGaugeProfile(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagneticKind {
    /// `A = ∇ψ × ẑ` with `ψ = a·exp(-r²/(2w²))`.
    StreamGaussian,
    /// `A = ∇ψ × ẑ` with `ψ = a·w·(w² + r²)^{-1/2}` (so `ψ = ⟨x⟩^{-1}` at `a = w = 1`).
    StreamLorentzian,
    /// `A = ∇φ` with `φ = a·exp(-r²/(2w²))`; contributes nothing to `B`.
    GaugeGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectricKind {
    Gaussian,
    /// `V = a·(1 + r²/w²)^{-p/2}`, decay `⟨x⟩^{-p}` with `p > 1`.
    LorentzianPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticTerm {
    pub kind: MagneticKind,
    pub center: Point,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectricTerm {
    pub kind: ElectricKind,
    pub center: Point,
    pub amplitude: f64,
    pub width: f64,
    /// Decay exponent for `lorentzian_power`; ignored by `gaussian`.
    #[serde(default)]
    pub exponent: Option<f64>,
}

/// Field values and requested derivatives at one point.
///
/// Index conventions: `grad_a[i][j] = ∂ᵢAⱼ`, `hess_a[i][j][l] = ∂ᵢ∂ⱼA_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    pub a: Point,
    pub v: f64,
    pub grad_a: Option<[[f64; 3]; 3]>,
    pub grad_v: Option<Point>,
    pub hess_a: Option<[[[f64; 3]; 3]; 3]>,
}

impl FieldJet {
    pub fn div_a(&self) -> f64 {
        let g = self.grad_a.expect("divergence needs order >= 1");
        g[0][0] + g[1][1] + g[2][2]
    }

    /// 2D field strength `B = ∂A₁/∂x₂ - ∂A₂/∂x₁`.
    pub fn b_2d(&self) -> f64 {
        let g = self.grad_a.expect("B needs order >= 1");
        g[1][0] - g[0][1]
    }

    /// Component-wise vector Laplacian `ΔA_l = Σᵢ ∂ᵢ∂ᵢA_l`.
    pub fn lap_a(&self) -> Point {
        let h = self.hess_a.expect("Laplacian needs order 2");
        let mut out = [0.0; 3];
        for (l, o) in out.iter_mut().enumerate() {
            *o = h[0][0][l] + h[1][1][l] + h[2][2][l];
        }
        out
    }
}

/// Radial profile derivatives with respect to `q = |x - c|²`.
#[derive(Clone, Copy)]
struct Profile {
    g: f64,
    g1: f64,
    g2: f64,
    g3: f64,
}

fn gaussian_profile(a: f64, w: f64, q: f64) -> Profile {
    let w2 = w * w;
    let g = a * (-q / (2.0 * w2)).exp();
    Profile {
        g,
        g1: -g / (2.0 * w2),
        g2: g / (4.0 * w2 * w2),
        g3: -g / (8.0 * w2 * w2 * w2),
    }
}

fn lorentzian_stream_profile(a: f64, w: f64, q: f64) -> Profile {
    let u = w * w + q;
    let aw = a * w;
    Profile {
        g: aw * u.powf(-0.5),
        g1: -0.5 * aw * u.powf(-1.5),
        g2: 0.75 * aw * u.powf(-2.5),
        g3: -1.875 * aw * u.powf(-3.5),
    }
}

impl MagneticTerm {
    pub fn new(kind: MagneticKind, center: Point, amplitude: f64, width: f64) -> Result<Self, FieldError> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(FieldError::NonPositiveWidth {
                field: "magnetic term width".into(),
                value: width,
            });
        }
        if !geom::is_finite(center) || !amplitude.is_finite() {
            return Err(FieldError::NonFinite {
                field: "magnetic term".into(),
            });
        }
        Ok(MagneticTerm { kind, center, amplitude, width })
    }

    fn profile(&self, q: f64) -> Profile {
        match self.kind {
            MagneticKind::StreamGaussian | MagneticKind::GaugeGradient => {
                gaussian_profile(self.amplitude, self.width, q)
            }
            MagneticKind::StreamLorentzian => lorentzian_stream_profile(self.amplitude, self.width, q),
        }
    }

    pub fn rho(&self) -> f64 {
        match self.kind {
            MagneticKind::StreamGaussian | MagneticKind::GaugeGradient => RHO_CAP,
            // ψ ~ r^{-1} gives |A| ~ r^{-2}
            MagneticKind::StreamLorentzian => 2.0,
        }
    }

    /// Accumulate this term's contribution into `(A, ∂A, ∂²A)`.
    fn accumulate(
        &self,
        x: Point,
        a: &mut Point,
        grad: &mut Option<[[f64; 3]; 3]>,
        hess: &mut Option<[[[f64; 3]; 3]; 3]>,
    ) {
        let y = geom::sub(x, self.center);
        let q = geom::dot(y, y);
        let p = self.profile(q);
        let is_gauge = self.kind == MagneticKind::GaugeGradient;

        // ∇ψ_i = 2 g' yᵢ ;  H_ij = 2g'δᵢⱼ + 4yᵢyⱼg'' ;
        // T_ijl = 4g''(δᵢⱼy_l + δᵢ_l yⱼ + δⱼ_l yᵢ) + 8g''' yᵢyⱼy_l
        if is_gauge {
            for i in 0..3 {
                a[i] += 2.0 * p.g1 * y[i];
            }
        } else {
            // A = ∇ψ × ẑ = (∂₂ψ, -∂₁ψ, 0)
            a[0] += 2.0 * p.g1 * y[1];
            a[1] += -2.0 * p.g1 * y[0];
        }

        if let Some(g) = grad.as_mut() {
            let h = |i: usize, j: usize| -> f64 {
                let delta = if i == j { 1.0 } else { 0.0 };
                2.0 * p.g1 * delta + 4.0 * y[i] * y[j] * p.g2
            };
            for i in 0..3 {
                if is_gauge {
                    for j in 0..3 {
                        g[i][j] += h(i, j);
                    }
                } else {
                    g[i][0] += h(i, 1);
                    g[i][1] += -h(i, 0);
                }
            }
        }

        if let Some(hs) = hess.as_mut() {
            let t = |i: usize, j: usize, l: usize| -> f64 {
                let d = |m: usize, n: usize| if m == n { 1.0 } else { 0.0 };
                4.0 * p.g2 * (d(i, j) * y[l] + d(i, l) * y[j] + d(j, l) * y[i])
                    + 8.0 * p.g3 * y[i] * y[j] * y[l]
            };
            for i in 0..3 {
                for j in 0..3 {
                    if is_gauge {
                        for l in 0..3 {
                            hs[i][j][l] += t(i, j, l);
                        }
                    } else {
                        hs[i][j][0] += t(i, j, 1);
                        hs[i][j][1] += -t(i, j, 0);
                    }
                }
            }
        }
    }

    /// Exact tail integral `∫_r^∞ env(ρ) dρ` of the radial envelope `env(ρ) ≥ |A|`
    /// on the sphere `|x - c| = ρ`.
    pub fn a_tail_integral(&self, r: f64) -> f64 {
        let a = self.amplitude.abs();
        let w = self.width;
        let r = r.max(0.0);
        match self.kind {
            // |A| = (a ρ/w²) e^{-ρ²/(2w²)}
            MagneticKind::StreamGaussian | MagneticKind::GaugeGradient => {
                a * (-r * r / (2.0 * w * w)).exp()
            }
            // |A| = a w ρ (w² + ρ²)^{-3/2}
            MagneticKind::StreamLorentzian => a * w / (w * w + r * r).sqrt(),
        }
    }

    /// Closed-form bound on `∫_ℝ |A| dt` along a line at distance `delta` from
    /// the term center.
    pub fn m_line_bound(&self, delta: f64) -> f64 {
        let a = self.amplitude.abs();
        let w = self.width;
        let d = delta.max(0.0);
        match self.kind {
            MagneticKind::StreamGaussian | MagneticKind::GaugeGradient => {
                let e = (-d * d / (2.0 * w * w)).exp();
                a / (w * w) * e * (2.0 * w * w + d * w * (2.0 * std::f64::consts::PI).sqrt())
            }
            MagneticKind::StreamLorentzian => {
                a * w * std::f64::consts::PI / (w * w + d * d).sqrt()
            }
        }
    }
}

impl ElectricTerm {
    pub fn new(
        kind: ElectricKind,
        center: Point,
        amplitude: f64,
        width: f64,
        exponent: Option<f64>,
    ) -> Result<Self, FieldError> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(FieldError::NonPositiveWidth {
                field: "electric term width".into(),
                value: width,
            });
        }
        if !geom::is_finite(center) || !amplitude.is_finite() {
            return Err(FieldError::NonFinite {
                field: "electric term".into(),
            });
        }
        if kind == ElectricKind::LorentzianPower {
            let p = exponent.ok_or(FieldError::BadExponent {
                field: "electric term exponent".into(),
                value: f64::NAN,
            })?;
            if !(p > 1.0) || !p.is_finite() {
                return Err(FieldError::BadExponent {
                    field: "electric term exponent".into(),
                    value: p,
                });
            }
        }
        Ok(ElectricTerm { kind, center, amplitude, width, exponent })
    }

    pub fn rho(&self) -> f64 {
        match self.kind {
            ElectricKind::Gaussian => RHO_CAP,
            ElectricKind::LorentzianPower => self.exponent.unwrap_or(RHO_CAP),
        }
    }

    fn value_and_grad(&self, x: Point, want_grad: bool) -> (f64, Option<Point>) {
        let y = geom::sub(x, self.center);
        let q = geom::dot(y, y);
        match self.kind {
            ElectricKind::Gaussian => {
                let p = gaussian_profile(self.amplitude, self.width, q);
                let grad = want_grad.then(|| geom::scale(y, 2.0 * p.g1));
                (p.g, grad)
            }
            ElectricKind::LorentzianPower => {
                let p = self.exponent.unwrap();
                let w2 = self.width * self.width;
                let base = 1.0 + q / w2;
                let g = self.amplitude * base.powf(-p / 2.0);
                let g1 = self.amplitude * (-p / (2.0 * w2)) * base.powf(-p / 2.0 - 1.0);
                let grad = want_grad.then(|| geom::scale(y, 2.0 * g1));
                (g, grad)
            }
        }
    }

    /// Exact/bounding tail integral `∫_r^∞ env(ρ) dρ` for `env(ρ) ≥ |V|`.
    pub fn v_tail_integral(&self, r: f64) -> f64 {
        let a = self.amplitude.abs();
        let w = self.width;
        let r = r.max(0.0);
        match self.kind {
            ElectricKind::Gaussian => {
                // ∫_r^∞ e^{-t²/(2w²)} dt ≤ min(w √(π/2), w²/r · e^{-r²/(2w²)})
                let full = a * w * (std::f64::consts::PI / 2.0).sqrt();
                if r <= 0.0 {
                    full
                } else {
                    full.min(a * w * w / r * (-r * r / (2.0 * w * w)).exp())
                }
            }
            ElectricKind::LorentzianPower => {
                let p = self.exponent.unwrap();
                // V(ρ) ≤ a (w/ρ)^p for ρ ≥ w; integrate the power tail
                let r = r.max(self.width);
                a * w.powf(p) * r.powf(1.0 - p) / (p - 1.0)
            }
        }
    }

    /// Closed-form bound on `∫_ℝ |V| dt` along a line at distance `delta`.
    pub fn x_line_bound(&self, delta: f64) -> f64 {
        let a = self.amplitude.abs();
        let w = self.width;
        let d = delta.max(0.0);
        match self.kind {
            ElectricKind::Gaussian => {
                a * w * (2.0 * std::f64::consts::PI).sqrt() * (-d * d / (2.0 * w * w)).exp()
            }
            ElectricKind::LorentzianPower => {
                let p = self.exponent.unwrap();
                let b = (w * w + d * d).sqrt();
                // ∫ (b² + t²)^{-p/2} dt ≤ 2 b^{1-p} p/(p-1)
                2.0 * a * w.powf(p) * b.powf(1.0 - p) * p / (p - 1.0)
            }
        }
    }
}

/// A complete field model: dimension, term sums, and the certified decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub dimension: usize,
    pub magnetic: Vec<MagneticTerm>,
    pub electric: Vec<ElectricTerm>,
    /// Largest exponent for which the short-range bounds are certified;
    /// the minimum over the terms' individual exponents, capped at [`RHO_CAP`].
    pub rho: f64,
}

impl FieldModel {
    pub fn new(
        dimension: usize,
        magnetic: Vec<MagneticTerm>,
        electric: Vec<ElectricTerm>,
    ) -> Result<Self, FieldError> {
        if dimension != 2 && dimension != 3 {
            return Err(FieldError::BadDimension(dimension));
        }
        if dimension == 2 {
            for t in &magnetic {
                if t.center[2] != 0.0 {
                    return Err(FieldError::NonFinite {
                        field: "magnetic term center: 2D centers need zero third component".into(),
                    });
                }
            }
            for t in &electric {
                if t.center[2] != 0.0 {
                    return Err(FieldError::NonFinite {
                        field: "electric term center: 2D centers need zero third component".into(),
                    });
                }
            }
        }
        let rho = magnetic
            .iter()
            .map(MagneticTerm::rho)
            .chain(electric.iter().map(ElectricTerm::rho))
            .fold(RHO_CAP, f64::min);
        Ok(FieldModel { dimension, magnetic, electric, rho })
    }

    pub fn empty(dimension: usize) -> Self {
        FieldModel::new(dimension, vec![], vec![]).unwrap()
    }

    /// Centered unit Gaussian stream model, the workhorse of the test suite.
    pub fn gaussian_stream(dimension: usize) -> Self {
        FieldModel::new(
            dimension,
            vec![MagneticTerm::new(MagneticKind::StreamGaussian, [0.0; 3], 1.0, 1.0).unwrap()],
            vec![],
        )
        .unwrap()
    }

    /// Centered stream model with `ψ = ⟨x⟩^{-1}`, decay exponent 2.
    pub fn lorentzian_stream(dimension: usize) -> Self {
        FieldModel::new(
            dimension,
            vec![MagneticTerm::new(MagneticKind::StreamLorentzian, [0.0; 3], 1.0, 1.0).unwrap()],
            vec![],
        )
        .unwrap()
    }

    /// Purely electric model with a centered unit Gaussian `V`.
    pub fn gaussian_electric(dimension: usize) -> Self {
        FieldModel::new(
            dimension,
            vec![],
            vec![ElectricTerm::new(ElectricKind::Gaussian, [0.0; 3], 1.0, 1.0, None).unwrap()],
        )
        .unwrap()
    }

    /// `m = min{1, ρ-1}`, the symbol-class exponent tied to this model.
    pub fn symbol_class_exponent(&self) -> f64 {
        1.0f64.min(self.rho - 1.0)
    }

    /// True when `A ≡ 0`, i.e. there is no magnetic term with a nonzero amplitude.
    pub fn is_purely_electric(&self) -> bool {
        self.magnetic.iter().all(|t| t.amplitude == 0.0)
    }

    /// True when every term is centered at the origin, which makes every line
    /// transform depend only on the impact parameter, not on the direction.
    pub fn is_rotation_invariant(&self) -> bool {
        self.magnetic.iter().all(|t| t.center == [0.0; 3])
            && self.electric.iter().all(|t| t.center == [0.0; 3])
    }

    /// Field values and derivatives at `x`; `order` requests 0, 1 or 2 derivative
    /// levels of `A` (and `∇V` from order 1).
    pub fn eval(&self, x: Point, order: usize) -> Result<FieldJet, FieldError> {
        if !geom::is_finite(x) {
            return Err(FieldError::NonFinitePoint);
        }
        assert!(order <= 2, "order must be 0, 1 or 2");
        let mut a = [0.0; 3];
        let mut grad = (order >= 1).then_some([[0.0; 3]; 3]);
        let mut hess = (order >= 2).then_some([[[0.0; 3]; 3]; 3]);
        for t in &self.magnetic {
            t.accumulate(x, &mut a, &mut grad, &mut hess);
        }
        let mut v = 0.0;
        let mut grad_v = (order >= 1).then_some([0.0; 3]);
        for t in &self.electric {
            let (tv, tg) = t.value_and_grad(x, order >= 1);
            v += tv;
            if let (Some(gv), Some(tg)) = (grad_v.as_mut(), tg) {
                *gv = geom::add(*gv, tg);
            }
        }
        Ok(FieldJet { a, v, grad_a: grad, grad_v, hess_a: hess })
    }

    /// 2D field strength at `x`.
    pub fn b_2d(&self, x: Point) -> Result<f64, FieldError> {
        if self.dimension != 2 {
            return Err(FieldError::Requires2D);
        }
        Ok(self.eval(x, 1)?.b_2d())
    }

    /// Total flux `Φ = ∫ B dx` over the plane, via per-term radial quadrature in
    /// each term's own polar frame, truncated at a certified per-term radius.
    pub fn flux(&self, quad: &crate::quad::QuadratureSpec) -> Result<f64, FieldError> {
        if self.dimension != 2 {
            return Err(FieldError::Requires2D);
        }
        let mut total = 0.0;
        for t in &self.magnetic {
            if t.kind == MagneticKind::GaugeGradient || t.amplitude == 0.0 {
                continue; // curl of a gradient vanishes identically
            }
            // 2D Laplacian of the radial profile: Δψ = 4g' + 4q g''
            let lap = |r: f64| {
                let q = r * r;
                let p = t.profile(q);
                4.0 * p.g1 + 4.0 * q * p.g2
            };
            // truncation: |∫_{r>R}| = 2π|R ψ'(R)| = 4π |q g'(q)| at q = R²
            let tail = |r: f64| {
                let q = r * r;
                4.0 * std::f64::consts::PI * (q * t.profile(q).g1).abs()
            };
            let mut radius = 4.0 * t.width;
            while tail(radius) > 0.1 * quad.abs_tol && radius < 1e300 {
                radius *= 2.0;
            }
            let q = crate::quad::integrate(
                |r| 2.0 * std::f64::consts::PI * r * lap(r),
                0.0,
                radius,
                quad,
            )
            .map_err(|e| FieldError::BadGaugeProfile(format!("flux quadrature failed: {e}")))?;
            total += q.value;
        }
        Ok(total)
    }

    /// New model with `A` replaced by `A + ∇φ`; `V` and `B` are unchanged.
    /// The gauge profile is a decaying Gaussian by construction; zero-width or
    /// non-finite profiles are rejected.
    pub fn apply_gauge(&self, center: Point, amplitude: f64, width: f64) -> Result<Self, FieldError> {
        if !(width > 0.0) || !width.is_finite() || !amplitude.is_finite() || !geom::is_finite(center) {
            return Err(FieldError::BadGaugeProfile(
                "profile needs finite amplitude/center and positive width".into(),
            ));
        }
        let mut m = self.clone();
        m.magnetic
            .push(MagneticTerm::new(MagneticKind::GaugeGradient, center, amplitude, width)?);
        Ok(m)
    }

    /// Largest distance from the origin to a term center.
    pub fn center_spread(&self) -> f64 {
        self.magnetic
            .iter()
            .map(|t| geom::norm(t.center))
            .chain(self.electric.iter().map(|t| geom::norm(t.center)))
            .fold(0.0, f64::max)
    }

    /// Certified bound on `|M(ω, ξ)|` over all lines with impact distance
    /// `|ξ| = s` from the origin (any direction).
    pub fn m_bound_at_impact(&self, s: f64) -> f64 {
        self.magnetic
            .iter()
            .map(|t| t.m_line_bound((s - geom::norm(t.center)).max(0.0)))
            .sum()
    }

    /// Same bound for `|X(ω, ξ)| = ½ ∫|V|`.
    pub fn x_bound_at_impact(&self, s: f64) -> f64 {
        0.5 * self
            .electric
            .iter()
            .map(|t| t.x_line_bound((s - geom::norm(t.center)).max(0.0)))
            .sum::<f64>()
    }

    /// Truncation radius `T` such that the magnetic integrand tail along any line
    /// through `origin` is below `tol`: `∫_{|t|>T} |⟨A,ω⟩| dt ≤ tol`.
    pub fn magnetic_truncation_radius(&self, origin: Point, tol: f64) -> f64 {
        truncation_radius(tol, self.magnetic.iter().map(|t| {
            let d0 = geom::norm(geom::sub(origin, t.center));
            (d0, t.clone())
        }))
    }

    /// Electric analogue for `X` and the transport integrals.
    pub fn electric_truncation_radius(&self, origin: Point, tol: f64) -> f64 {
        let terms: Vec<(f64, ElectricTerm)> = self
            .electric
            .iter()
            .map(|t| (geom::norm(geom::sub(origin, t.center)), t.clone()))
            .collect();
        if terms.is_empty() {
            return 1.0;
        }
        let tail = |radius: f64| -> f64 {
            terms
                .iter()
                .map(|(d0, t)| 2.0 * t.v_tail_integral(radius - d0))
                .sum()
        };
        grow_radius(tail, tol, terms.iter().map(|(d0, t)| d0 + 4.0 * t.width).fold(1.0, f64::max))
    }
}

fn truncation_radius(tol: f64, terms: impl Iterator<Item = (f64, MagneticTerm)>) -> f64 {
    let terms: Vec<(f64, MagneticTerm)> = terms.collect();
    if terms.is_empty() {
        return 1.0;
    }
    let tail = |radius: f64| -> f64 {
        terms
            .iter()
            .map(|(d0, t)| 2.0 * t.a_tail_integral(radius - d0))
            .sum()
    };
    grow_radius(tail, tol, terms.iter().map(|(d0, t)| d0 + 4.0 * t.width).fold(1.0, f64::max))
}

/// Smallest doubling radius with `tail(R) <= tol`, refined by bisection.
fn grow_radius(tail: impl Fn(f64) -> f64, tol: f64, start: f64) -> f64 {
    let mut hi = start.max(1.0);
    let mut guard = 0;
    while tail(hi) > tol && guard < 2000 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Compare analytic first derivatives of `A` and `V` against central finite
/// differences at `n` seeded random points; returns the worst relative defect.
/// The FD step is `1e-5` times the smallest term width.
pub fn derivative_defect(model: &FieldModel, n: usize, seed: u64) -> Result<f64, FieldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_width = model
        .magnetic
        .iter()
        .map(|t| t.width)
        .chain(model.electric.iter().map(|t| t.width))
        .fold(1.0f64, f64::min);
    let h = 1e-5 * min_width;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let mut x = [0.0; 3];
        for c in x.iter_mut().take(model.dimension) {
            *c = rng.gen_range(-4.0..4.0);
        }
        let jet = model.eval(x, 1)?;
        let ga = jet.grad_a.unwrap();
        let gv = jet.grad_v.unwrap();
        let mut scaleentry: f64 = 1e-12;
        for i in 0..3 {
            for j in 0..3 {
                scaleentry = scaleentry.max(ga[i][j].abs());
            }
            scale entry_guard: {
                break 'entry_guard;
            }
        }
        for i in 0..model.dimension {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let jp = model.eval(xp, 0)?;
            let jm = model.eval(xm, 0)?;
            for j in 0..3 {
                let fd = (jp.a[j] - jm.a[j]) / (2.0 * h);
                let defect = (fd - ga[i][j]).abs() / scale_entry.max(1.0_f64.min(scale_entry));
                worst = worst.max(defect);
            }
            let fdv = (jp.v - jm.v) / (2.0 * h);
            let vscale = gv.iter().fold(1e-12f64, |m, g| m.max(g.abs()));
            worst = worst.max((fdv - gv[i]).abs() / vscale.max(1.0_f64.min(vscale)));
        }
    }
    Ok(worst)
}
