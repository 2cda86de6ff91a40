//! Numerical laboratory for the high-energy spectral density of scattering-matrix
//! eigenphases of short-range magnetic Schrödinger operators.
//!
//! The pipeline, bottom to top:
//!
//! * [`fields`] — electric potentials `V` and magnetic vector potentials `A` as sums of
//!   analytic terms with exact derivatives (stream-function construction keeps the 2D
//!   total flux at exactly zero).
//! * [`xray`] — line integrals: the magnetic transform `M(ω,ξ)`, the electric transform
//!   `X(ω,ξ)`, and the half-line phases `φ±` with derivatives.
//! * [`transport`] — the first transport iterate `v₁` and the leading amplitude `b₀`
//!   with its change of variables between impact planes.
//! * [`measure`] — the limiting measure on arcs of the circle, its monomial moments,
//!   and the rescaled measure for purely electric models.
//! * [`operator`] — Nyström discretization of the semiclassical operator on the circle
//!   and assembly of the approximate scattering matrix `S(k) = I + Op_{1/k}[σ]`.
//! * [`spectrum`] — eigenphase extraction, counting measures, trace moments, and the
//!   convergence experiments against the limiting measure.
//! * [`config`] / [`cache`] / [`report`] / [`runner`] — the experiment harness: TOML
//!   configs with content hashing, an on-disk operator/spectrum cache, and CSV/JSON
//!   report emission.

pub mod cache;
pub mod config;
pub mod fields;
pub mod geom;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod quad;
pub mod report;
pub mod runner;
pub mod spectrum;
pub mod transport;
pub mod xray;

pub use fields::{ElectricTerm, FieldError, FieldJet, FieldModel, MagneticTerm};
pub use geom::{LineFrame, Point};
pub use measure::{Arc, MeasureReport};
pub use operator::{CutoffSpec, OperatorMatrix, Resolution, SymbolMode, SymbolSpec};
pub use quad::{QuadError, QuadratureSpec};
pub use spectrum::{ConvergenceTable, SpectralResult};

/// Umbrella error for harness-level entry points.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] fields::FieldError),
    #[error(transparent)]
    Quad(#[from] quad::QuadError),
    #[error(transparent)]
    Operator(#[from] operator::OperatorError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Measure(#[from] measure::MeasureError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Cache(#[from] cache::CacheError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
