//! Linear spectral constants: the de Gennes constant `Θ₀` (half-line band
//! minimum), the sector constant `μ(β)` for the magnetic Schrödinger
//! operator with unit field on an infinite sector, and the critical-field
//! ladder built from them.

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::CurvilinearPolygon;
use crate::numerics::{self, smallest_eig_tridiag};
use crate::tolerances as tol;
use crate::{Error, Result};

/// Lowest eigenvalue of `−d²/dt² + (t+α)²` on `[0, T]`, natural condition
/// at 0, Dirichlet-by-truncation at `T` (tail is Gaussian, `T = 12` is
/// converged to ~1e-10). Variational FD with trapezoid mass, symmetrized.
fn band_eigenvalue(alpha: f64, t_max: f64, n: usize) -> f64 {
    let h = t_max / n as f64;
    // stiffness A_ii = sum of 1/h over incident edges + m_i V_i, A_{i,i+1} = −1/h
    // mass m_i = h (h/2 at the ends); symmetrize B = M^{-1/2} A M^{-1/2}
    let mut diag = Vec::with_capacity(n + 1);
    let mut off = Vec::with_capacity(n);
    let mass = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };
    for i in 0..=n {
        let t = i as f64 * h;
        let v = (t + alpha) * (t + alpha);
        let stiff = if i == 0 || i == n { 1.0 / h } else { 2.0 / h };
        diag.push((stiff + mass(i) * v) / mass(i));
    }
    for i in 0..n {
        off.push(-(1.0 / h) / (mass(i) * mass(i + 1)).sqrt());
    }
    smallest_eig_tridiag(&diag, &off, 1e-13)
}

/// Result of a Θ₀ computation with its discretization error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theta0Result {
    pub value: f64,
    pub alpha_opt: f64,
    /// Richardson error estimate of the fine-grid value.
    pub error_estimate: f64,
}

/// `Θ₀ = inf_α inf spec (−d²/dt² + (t+α)²)` on the half-line with natural
/// boundary condition, by α-minimization of the FD eigenvalue at two
/// resolutions plus Richardson extrapolation.
pub fn compute_theta0() -> Result<Theta0Result> {
    compute_theta0_with(12.0, 1500)
}

pub fn compute_theta0_with(t_max: f64, n: usize) -> Result<Theta0Result> {
    let run = |nn: usize| -> Result<(f64, f64)> {
        numerics::bracketed_min(
            |a| band_eigenvalue(a, t_max, nn),
            -1.6,
            -0.2,
            16,
            1e-12,
            "theta0 alpha search",
        )
        .map(|(a, v)| (a, v))
    };
    let (a_coarse, v_coarse) = run(n / 2)?;
    let (a_fine, v_fine) = run(n)?;
    let (extrap, err) = numerics::richardson(v_coarse, v_fine, 2.0);
    let _ = a_coarse;
    Ok(Theta0Result {
        value: extrap,
        alpha_opt: a_fine,
        error_estimate: err,
    })
}

/// Independent route to Θ₀: shooting. Integrates `u'' = ((t+α)² − λ)u`
/// inward from `T` with the decaying WKB direction and bisects `λ` on the
/// sign of `u'(0)` (natural condition), then minimizes over α.
pub fn theta0_shooting() -> Result<Theta0Result> {
    let t_max = 12.0;
    let n_steps = 24_000;
    let shoot = |alpha: f64, lambda: f64| -> f64 {
        // RK4 on (u, u') from t_max down to 0
        let h = -t_max / n_steps as f64;
        let mut t = t_max;
        let mut u = 1e-120;
        let vstart = (t_max + alpha) * (t_max + alpha) - lambda;
        let mut up = -vstart.max(1e-12).sqrt() * u;
        let f = |t: f64, u: f64, up: f64| -> (f64, f64) {
            ((up), (((t + alpha) * (t + alpha) - lambda) * u))
        };
        for _ in 0..n_steps {
            let (k1u, k1p) = f(t, u, up);
            let (k2u, k2p) = f(t + 0.5 * h, u + 0.5 * h * k1u, up + 0.5 * h * k1p);
            let (k3u, k3p) = f(t + 0.5 * h, u + 0.5 * h * k2u, up + 0.5 * h * k2p);
            let (k4u, k4p) = f(t + h, u + h * k3u, up + h * k3p);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            t += h;
            // renormalize to avoid overflow while integrating into the well
            let scale = u.abs().max(up.abs());
            if scale > 1e100 {
                u /= scale;
                up /= scale;
            }
        }
        // sign of u'(0)/u(0): eigenvalue when u'(0) = 0
        up / u
    };
    let lowest = |alpha: f64| -> f64 {
        // the ground state has no interior node; u'(0)/u(0) decreases
        // through zero as λ crosses the eigenvalue
        // v'(0)/v(0) < 0 below the ground eigenvalue, > 0 just above it
        let (mut lo, mut hi) = (0.05, 1.2);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if shoot(alpha, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let (alpha_opt, value) =
        numerics::bracketed_min(lowest, -1.4, -0.3, 10, 1e-10, "theta0 shooting alpha")?;
    Ok(Theta0Result {
        value,
        alpha_opt,
        error_estimate: 1e-8,
    })
}

/// Truncated-sector description for the `μ(β)` eigenproblem.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectorSpec {
    /// Opening angle in `(0, 2π)`.
    pub beta: f64,
    /// Truncation radius of the artificial Dirichlet arc.
    pub radius: f64,
    pub n_rho: usize,
    pub n_theta: usize,
}

impl SectorSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0 * std::f64::consts::PI) {
            return Err(Error::Parameter(format!(
                "sector angle must lie in (0, 2*pi), got {beta}"
            )));
        }
        let n_theta =
            ((beta / std::f64::consts::PI) * tol::SECTOR_N_THETA_PER_PI as f64).ceil() as usize;
        Ok(SectorSpec {
            beta,
            radius: tol::SECTOR_RADIUS,
            n_rho: tol::SECTOR_N_RHO,
            n_theta: n_theta.max(24),
        })
    }
}

/// Lowest eigenpair of the truncated sector problem.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub value: f64,
    #[serde(skip)]
    pub eigenvector: Vec<Complex64>,
    pub residual: f64,
    /// Shift of `μ` under shrinking the artificial arc to 0.8·R plus the
    /// resolution-halving shift: a conservative truncation+mesh sensitivity.
    pub sensitivity: f64,
    pub iterations: usize,
}

/// Hermitian operator of the sector problem in link-variable form on a
/// polar tensor grid: radial edges carry zero phase (`F·e_ρ = 0`), arc
/// edges carry the exact line integral `½ρ²Δθ`.
struct SectorOperator {
    n: usize,
    edges: Vec<(u32, u32, f64, Complex64)>,
    /// Dirichlet closure terms on the outer ring.
    diag_extra: Vec<f64>,
    vol: Vec<f64>,
}

impl SectorOperator {
    /// Graded radial nodes: spacing ~`R·g/(e^g−1)/n` near the vertex where
    /// the eigenfunction lives, geometric growth outward.
    fn rho_nodes(radius: f64, n_rho: usize) -> Vec<f64> {
        let g = 2.2;
        (0..=n_rho)
            .map(|i| {
                let u = i as f64 / n_rho as f64;
                radius * ((g * u).exp() - 1.0) / (g.exp() - 1.0)
            })
            .collect()
    }

    fn build(spec: &SectorSpec) -> Self {
        let rho = Self::rho_nodes(spec.radius, spec.n_rho);
        let n_th = spec.n_theta;
        let dth = spec.beta / n_th as f64;
        // vertex node 0; rings 1..n_rho-1 active; ring n_rho is the Dirichlet arc
        let nr = spec.n_rho;
        let idx = |i: usize, j: usize| -> u32 { (1 + (i - 1) * (n_th + 1) + j) as u32 };
        let n = 1 + (nr - 1) * (n_th + 1);
        let mut edges = Vec::new();
        let mut diag_extra = vec![0.0; n];
        let mut vol = vec![0.0; n];
        let mid: Vec<f64> = (0..nr).map(|i| 0.5 * (rho[i] + rho[i + 1])).collect();
        for i in 1..nr {
            let r = rho[i];
            let (lo, hi) = (mid[i - 1], mid[i]);
            let ring_vol = 0.5 * (hi * hi - lo * lo) * dth;
            for j in 0..=n_th {
                let a = idx(i, j);
                let half = if j == 0 || j == n_th { 0.5 } else { 1.0 };
                vol[a as usize] = ring_vol * half;
                if j < n_th {
                    // arc edge: exact link phase ½ r² Δθ
                    let b = idx(i, j + 1);
                    let w = (hi - lo) / (r * dth);
                    let phase = 0.5 * r * r * dth;
                    edges.push((a, b, w, Complex64::from_polar(1.0, phase)));
                }
                let w_rad = r * dth * half;
                if i < nr - 1 {
                    let b = idx(i + 1, j);
                    edges.push((a, b, w_rad / (rho[i + 1] - r), Complex64::new(1.0, 0.0)));
                } else {
                    // Dirichlet arc: the dropped neighbor contributes only
                    // to the diagonal
                    diag_extra[a as usize] += w_rad / (rho[nr] - r);
                }
            }
        }
        // vertex: radial edges to the first ring
        vol[0] = 0.5 * mid[0] * mid[0] * dth * n_th as f64;
        for j in 0..=n_th {
            let b = idx(1, j);
            let half = if j == 0 || j == n_th { 0.5 } else { 1.0 };
            let w = 0.5 * rho[1] * dth * half / rho[1];
            edges.push((0, b, w, Complex64::new(1.0, 0.0)));
        }
        SectorOperator {
            n,
            edges,
            diag_extra,
            vol,
        }
    }

    /// `y = H x` where `⟨x, Hx⟩ = Σ_e w|x_a − U x_b|² + Σ diag_extra |x|²`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, (&d, &xi)) in y.iter_mut().zip(self.diag_extra.iter().zip(x)) {
            *yi = d * xi;
        }
        for &(a, b, w, u) in &self.edges {
            let (a, b) = (a as usize, b as usize);
            let diff = x[a] - u * x[b];
            y[a] += w * diff;
            y[b] -= w * diff * u.conj();
        }
    }
}

/// Lowest eigenvalue of `H u = μ M u` by inverse power iteration with
/// Jacobi-preconditioned CG inner solves (all matrix-free).
fn lowest_eigenpair(op: &SectorOperator, tol_resid: f64) -> Result<(f64, Vec<Complex64>, f64, usize)> {
    let n = op.n;
    let m = &op.vol;
    // diagonal of H for the Jacobi preconditioner
    let mut hdiag = op.diag_extra.clone();
    for &(a, b, w, _) in &op.edges {
        hdiag[a as usize] += w;
        hdiag[b as usize] += w;
    }
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    };
    let mnorm = |x: &[Complex64]| -> f64 {
        x.iter()
            .zip(m)
            .map(|(v, mi)| mi * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    // CG solve of H y = M x (Hermitian positive definite)
    let cg = |rhs: &[Complex64], x0: &[Complex64]| -> Vec<Complex64> {
        let mut x = x0.to_vec();
        let mut ax = vec![Complex64::default(); n];
        op.apply(&x, &mut ax);
        let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut z: Vec<Complex64> = r.iter().zip(&hdiag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        let rhs_norm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut hp = vec![Complex64::default(); n];
        for _ in 0..2000 {
            op.apply(&p, &mut hp);
            let php = dot(&p, &hp).re;
            if php <= 0.0 {
                break;
            }
            let alpha = rz / php;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * hp[i];
            }
            let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if rn < 1e-10 * rhs_norm {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / hdiag[i];
            }
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    };
    // deterministic start with nonzero overlap: concentrate near the vertex
    let mut u: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.3 * ((i % 7) as f64) / 7.0, 0.0))
        .collect();
    let s = mnorm(&u);
    u.iter_mut().for_each(|x| *x /= s);
    let mut mu_prev = f64::INFINITY;
    let mut hu = vec![Complex64::default(); n];
    let mut iterations = 0;
    for it in 0..400 {
        iterations = it + 1;
        let rhs: Vec<Complex64> = u.iter().zip(m).map(|(ui, mi)| mi * ui).collect();
        let mut v = cg(&rhs, &u);
        let s = mnorm(&v);
        v.iter_mut().for_each(|x| *x /= s);
        op.apply(&v, &mut hu);
        let num: f64 = dot(&v, &hu).re;
        let mu = num; // ⟨v, Hv⟩ with ⟨v, Mv⟩ = 1
        let resid = {
            let mut r2 = 0.0;
            for i in 0..n {
                let ri = hu[i] - mu * m[i] * v[i];
                r2 += ri.norm_sqr() / m[i];
            }
            r2.sqrt()
        };
        u = v;
        if resid < tol_resid && (mu - mu_prev).abs() < 1e-11 {
            return Ok((mu, u, resid, iterations));
        }
        mu_prev = mu;
    }
    // converged in value but not to the requested residual
    op.apply(&u, &mut hu);
    let mu = dot(&u, &hu).re;
    let mut r2 = 0.0;
    for i in 0..n {
        let ri = hu[i] - mu * m[i] * u[i];
        r2 += ri.norm_sqr() / m[i];
    }
    let resid = r2.sqrt();
    if resid < tol_resid {
        Ok((mu, u, resid, iterations))
    } else {
        Err(Error::NoConvergence {
            context: "sector inverse iteration".into(),
            residual: resid,
            iterations,
        })
    }
}

/// Lowest eigenvalue of the unit-field magnetic Laplacian on the truncated
/// sector `W_β`: magnetic Neumann on the straight sides, Dirichlet on the
/// artificial arc (which overestimates `μ`, keeping the `μ(β) < Θ₀` test
/// conservative).
pub fn compute_mu(spec: &SectorSpec) -> Result<EigenResult> {
    if spec.n_rho < 40 || spec.n_theta < 16 {
        return Err(Error::MeshTooCoarse(format!(
            "sector mesh {}x{} cannot reach the requested tolerance; use at least 40x16",
            spec.n_rho, spec.n_theta
        )));
    }
    let op = SectorOperator::build(spec);
    let (mu, vec, resid, iterations) = lowest_eigenpair(&op, 1e-8)?;
    // sensitivity: shrink the arc and halve the resolution
    let shrunk = SectorSpec {
        radius: 0.8 * spec.radius,
        n_rho: (spec.n_rho * 4) / 5,
        ..*spec
    };
    let coarse = SectorSpec {
        n_rho: spec.n_rho / 2,
        n_theta: spec.n_theta / 2,
        ..*spec
    };
    let mu_shrunk = lowest_eigenpair(&SectorOperator::build(&shrunk), 1e-7)?.0;
    let mu_coarse = lowest_eigenpair(&SectorOperator::build(&coarse), 1e-7)?.0;
    let sensitivity = (mu - mu_shrunk).abs() + 0.34 * (mu - mu_coarse).abs();
    Ok(EigenResult {
        value: mu,
        eigenvector: vec,
        residual: resid,
        sensitivity,
        iterations,
    })
}

/// One rung of the critical-field ladder.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalField {
    pub name: String,
    pub value: f64,
    /// Corner angle for the per-corner rungs.
    pub beta: Option<f64>,
    /// μ(β) used (clamped to Θ₀ for obtuse corners, which play no role).
    pub mu: Option<f64>,
}

/// The ladder `H_c2 = 1/ε² ≤ H* = 1/(Θ₀ε²) ≤ H_corner,j = 1/(μ(β_j)ε²)`,
/// sorted ascending; the last rung is `H_c3`.
pub fn critical_fields(
    eps: f64,
    polygon: &CurvilinearPolygon,
    mu_of_beta: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<CriticalField>> {
    if eps <= 0.0 {
        return Err(Error::Parameter("eps must be positive".into()));
    }
    let theta0 = tol::THETA0;
    let e2 = eps * eps;
    let mut ladder = vec![
        CriticalField {
            name: "H_c2".into(),
            value: 1.0 / e2,
            beta: None,
            mu: None,
        },
        CriticalField {
            name: "H_star".into(),
            value: 1.0 / (theta0 * e2),
            beta: None,
            mu: None,
        },
    ];
    let mut corners: Vec<(f64, f64)> = Vec::new();
    for c in &polygon.corners {
        let mu = mu_of_beta(c.beta)?.min(theta0);
        corners.push((c.beta, mu));
    }
    // sorted by µ descending: smallest angle (smallest µ) is H_c3
    corners.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (i, (beta, mu)) in corners.iter().enumerate() {
        let name = if i + 1 == corners.len() {
            format!("H_corner,{} = H_c3", i + 1)
        } else {
            format!("H_corner,{}", i + 1)
        };
        ladder.push(CriticalField {
            name,
            value: 1.0 / (mu * e2),
            beta: Some(*beta),
            mu: Some(*mu),
        });
    }
    Ok(ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta0_is_in_unit_interval() {
        let r = compute_theta0_with(12.0, 600).unwrap();
        assert!(r.value > 0.0 && r.value < 1.0);
        assert!((r.value - tol::THETA0).abs() < 2e-4, "theta0 = {}", r.value);
        // stationarity identity: the optimal alpha satisfies α² = Θ₀
        assert!(
            (r.alpha_opt * r.alpha_opt - r.value).abs() < 1e-3,
            "alpha = {}",
            r.alpha_opt
        );
    }

    #[test]
    fn sector_rejects_bad_angles() {
        assert!(SectorSpec::new(0.0).is_err());
        assert!(SectorSpec::new(7.0).is_err());
    }

    #[test]
    fn mesh_too_coarse_is_reported() {
        let spec = SectorSpec {
            beta: 1.0,
            radius: 10.0,
            n_rho: 10,
            n_theta: 8,
        };
        assert!(matches!(compute_mu(&spec), Err(Error::MeshTooCoarse(_))));
    }
}
