//! Numerical laboratory for surface superconductivity in fixed-field
//! Ginzburg-Landau theory.
//!
//! The crate evaluates the computable objects of the boundary-layer analysis
//! on planar samples: the half-line and finite-interval 1D effective energies
//! and profiles, the curvature-corrected 1D energy and its small-`εk`
//! expansion, the de Gennes constant `Θ₀` and the sector spectral constant
//! `μ(β)`, fixed-field 2D energy minimization with a gauge-covariant
//! (link-variable) discretization, and the corner effective energy
//! `E_corner,β(L,ℓ)` with its `(L,ℓ) → ∞` extrapolation and the
//! `−(π−β)·E_corr` comparison.
//!
//! Everything is plain `f64` finite differences / finite volumes on structured
//! meshes; solvers are deterministic at fixed parameters.
//!
//! Organization:
//! - [`geometry`] — curvilinear polygons, tubular coordinates, Gauss-Bonnet
//! - [`oned`] — 1D boundary-layer functionals and profile solves
//! - [`spectral`] — `Θ₀`, `μ(β)`, critical-field ladder
//! - [`gl2d`] — meshes, link variables, 2D minimization, diagnostics
//! - [`corner`] — corner region, trace data, corner energy, conjecture table
//! - [`report`] — run records, JSON/CSV/SVG emission, caching
//!
//! The `glsurf` binary exposes each capability as a subcommand; the
//! `examples/` directory holds one runnable example per capability.

pub mod corner;
pub mod geometry;
pub mod gl2d;
pub mod numerics;
pub mod oned;
pub mod report;
pub mod spectral;
pub mod tolerances;

/// Crate-wide error type. Variants mirror the failure modes named by the
/// operations (geometry validation, solver non-convergence, usage errors).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("ambiguous projection: point {point:?} is equidistant from boundary points at s={s_a} and s={s_b}")]
    AmbiguousProjection {
        point: [f64; 2],
        s_a: f64,
        s_b: f64,
    },
    #[error("focal singularity: 1 - eps*k*t <= 0 at t={t} (eps*k={epsk})")]
    FocalSingularity { t: f64, epsk: f64 },
    #[error("solver did not converge: {context} (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },
    #[error("no bracket found for {context} in [{lo}, {hi}]")]
    NoBracket { context: String, lo: f64, hi: f64 },
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("vanishing on contour: min |psi| = {min_abs:.3e}")]
    VanishingOnContour { min_abs: f64 },
    #[error("usage: {0}")]
    Usage(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
