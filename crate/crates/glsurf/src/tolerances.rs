//! Centralized tolerances and run defaults, each with its origin.
//!
//! Acceptance thresholds live here so that the integration suite, the CLI and
//! the examples all pin the same numbers.

/// De Gennes constant, our own converged value (Richardson-extrapolated FD
/// eigensolve, cross-checked by shooting; stable to the digits shown).
pub const THETA0: f64 = 0.590_106_1;

/// Surface regime upper end `1/Θ₀`.
pub const B_STAR: f64 = 1.0 / THETA0;

/// Default field-strength parameter: mid-interval of `(1, 1/Θ₀)` by
/// convention; every golden value is pinned at this `b`.
pub const B_DEFAULT: f64 = 1.5;

/// Half-line truncation for the 1D problems. The profile decays like
/// `exp(-(t+α)²/2)`, so at `T = 15` the tail is ~1e-40; doubling `T`
/// moves the energy by less than 1e-12.
pub const ONED_TRUNCATION: f64 = 15.0;

/// Default 1D grid spacing. Discretization is second order; at `h = 5e-3`
/// energies carry ~1e-7 absolute error, removed where needed by Richardson.
pub const ONED_H: f64 = 5e-3;

/// Sup-norm Euler-Lagrange residual at which a 1D profile solve is accepted.
pub const ONED_RESIDUAL_TOL: f64 = 1e-9;

/// First-order stationarity bound in α: `|∫(t+α)f² dt| ≤ 1e-6·‖f‖²`.
pub const ALPHA_STATIONARITY_TOL: f64 = 1e-6;

/// α search bracket. The optimum sits near `-√Θ₀ ≈ -0.77` for every
/// `b` in the surface window; the bracket is generous on both sides.
pub const ALPHA_BRACKET: (f64, f64) = (-10.0, 2.0);

/// Relative Euler-Lagrange residual at which a 2D solve is accepted.
pub const GL2D_RESIDUAL_TOL: f64 = 1e-6;

/// Energy change per accepted step below which a 2D flow additionally
/// declares convergence (guards near-critical slow modes).
pub const GL2D_ENERGY_TOL: f64 = 1e-10;

/// Energy noise floor of a converged corner solve: ladder differences below
/// this are indistinguishable from solver noise and count as converged.
pub const CORNER_NOISE_FLOOR: f64 = 5e-6;

/// Default corner ladder (side lengths and layer depths). Chosen so the
/// whole β = π/2 ladder stays in the minutes range at default resolution.
pub const LADDER_L: [f64; 3] = [8.0, 12.0, 16.0];
pub const LADDER_ELL: [f64; 3] = [6.0, 8.0, 10.0];

/// Default corner mesh resolution: target spacing in the active layer.
pub const CORNER_H: f64 = 0.10;

/// Default sector truncation radius and mesh for `μ(β)`. At `R = 20` the
/// Dirichlet cut shifts `μ` by ≲1e-4 for β ≤ π/2 and ~1e-3 at β = π
/// (the state spreads along the sides there).
pub const SECTOR_RADIUS: f64 = 20.0;
pub const SECTOR_N_RHO: usize = 280;
pub const SECTOR_N_THETA_PER_PI: usize = 220;

/// Acceptance: Θ₀ must fall in (0,1) and the FD and shooting routes must
/// agree to this absolute tolerance.
pub const ACC_THETA0_ROUTES: f64 = 2e-3;

/// Acceptance: `μ(π) = Θ₀` within this tolerance.
pub const ACC_MU_PI: f64 = 5e-3;

/// Acceptance: fitted exponent of the expansion residual must be ≥ 1.4
/// (the remainder is O(ε^{3/2}·polylog) or better; measured ≈ 2).
pub const ACC_EXPANSION_EXPONENT: f64 = 1.4;

/// Acceptance: the two routes to E_corr (formula vs fitted slope) must
/// agree to 1% relative.
pub const ACC_ECORR_TWO_ROUTE: f64 = 0.01;

/// Acceptance: corner-ladder plateau error bar ≤ 2% of the extrapolated value.
pub const ACC_CORNER_PLATEAU: f64 = 0.02;

/// Acceptance: disc energy vs `|∂Ω|E¹ᴰ₀/ε − 2π E_corr` within 3% relative.
pub const ACC_DISC_ENERGY: f64 = 0.03;

/// Acceptance: sup boundary-layer deviation of `|ψ|` from `f₀(dist/ε)`.
pub const ACC_PROFILE_DEVIATION: f64 = 0.05;

/// Acceptance: interior mass fraction beyond `6ε`.
pub const ACC_AGMON_MASS: f64 = 1e-3;

/// Acceptance: winding number within 10% of the `α₀`-correction.
pub const ACC_DEGREE: f64 = 0.10;

/// Acceptance: Gauss-Bonnet defect on the built-in polygons.
pub const ACC_GAUSS_BONNET: f64 = 1e-8;

/// Acceptance: exact discrete identities (gauge invariance, curl = area).
pub const ACC_EXACT_DISCRETE: f64 = 1e-12;

/// Acceptance: measured grid-halving convergence order for smooth inputs.
pub const ACC_CONVERGENCE_ORDER: f64 = 1.9;
