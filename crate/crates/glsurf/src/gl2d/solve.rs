//! Fixed-field 2D energy and its minimization.
//!
//! Energy of a nodal field `ψ` on a [`Mesh2D`]:
//!
//! `E[ψ] = Σ_e w_e |ψ_a − U_e ψ_b|² − Σ_n vol_n (2|ψ_n|² − |ψ_n|⁴)/(2bε²)`
//!
//! with `U_e = exp(i(link_e + ref_shift_e))`. The descent is Barzilai-Borwein
//! gradient flow with energy-based step rejection: monotone on accepted
//! steps, Dirichlet nodes held fixed. Assembly is sequential in index order,
//! so repeated runs are bit-identical; concurrency lives one level up
//! (independent solves in parallel).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;

use super::mesh::{Mesh2D, NodeBc};
use crate::tolerances as tol;
use crate::{Error, Result};

/// Complex order parameter on a mesh (stored in the reference gauge when
/// the mesh carries one; `|ψ|` and all gauge-invariant diagnostics are
/// unaffected).
#[derive(Debug, Clone)]
pub struct ComplexField2D {
    pub psi: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(n: usize) -> Self {
        ComplexField2D {
            psi: vec![Complex64::default(); n],
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Outcome bundle of a 2D solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub energy: f64,
    pub iterations: usize,
    /// relative Euler-Lagrange residual at exit
    pub residual: f64,
    pub wall_ms: u128,
    pub converged_to_zero: bool,
    /// accepted-step energy history is nonincreasing; retained length
    pub rejected_steps: usize,
}

/// Precomputed operator form of the mesh (CSR adjacency).
pub struct GlOperator<'m> {
    pub mesh: &'m Mesh2D,
    pub b: f64,
    row_start: Vec<u32>,
    cols: Vec<u32>,
    /// `w_e` and `U` oriented from the row node outward
    wu: Vec<(f64, Complex64)>,
    free: Vec<bool>,
}

impl<'m> GlOperator<'m> {
    pub fn new(mesh: &'m Mesh2D, b: f64) -> Result<Self> {
        if b <= 0.0 || mesh.eps <= 0.0 {
            return Err(Error::Parameter("need b > 0 and eps > 0".into()));
        }
        let n = mesh.n_nodes();
        let mut deg = vec![0u32; n];
        for e in &mesh.edges {
            deg[e.a as usize] += 1;
            deg[e.b as usize] += 1;
        }
        let mut row_start = vec![0u32; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + deg[i];
        }
        let total = row_start[n] as usize;
        let mut cols = vec![0u32; total];
        let mut wu = vec![(0.0, Complex64::default()); total];
        let mut fill = row_start.clone();
        for e in &mesh.edges {
            let u = Complex64::from_polar(1.0, e.link + e.ref_shift);
            let ia = fill[e.a as usize] as usize;
            cols[ia] = e.b;
            wu[ia] = (e.w, u);
            fill[e.a as usize] += 1;
            let ib = fill[e.b as usize] as usize;
            cols[ib] = e.a;
            wu[ib] = (e.w, u.conj());
            fill[e.b as usize] += 1;
        }
        let free = mesh.bc.iter().map(|b| *b == NodeBc::Free).collect();
        Ok(GlOperator {
            mesh,
            b,
            row_start,
            cols,
            wu,
            free,
        })
    }

    /// The discrete GL energy (kinetic link term + condensation term).
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut e = 0.0;
        for edge in &self.mesh.edges {
            let u = Complex64::from_polar(1.0, edge.link + edge.ref_shift);
            let d = psi[edge.a as usize] - u * psi[edge.b as usize];
            e += edge.w * d.norm_sqr();
        }
        let c = 1.0 / (2.0 * self.b * self.mesh.eps * self.mesh.eps);
        for (i, z) in psi.iter().enumerate() {
            let m2 = z.norm_sqr();
            e -= self.mesh.vol[i] * c * (2.0 * m2 - m2 * m2);
        }
        e
    }

    /// Gradient w.r.t. `conj(ψ)` (zero on pinned nodes).
    pub fn grad(&self, psi: &[Complex64], g: &mut [Complex64]) {
        let n = psi.len();
        let c = 2.0 / (self.b * self.mesh.eps * self.mesh.eps);
        for i in 0..n {
            if !self.free[i] {
                g[i] = Complex64::default();
                continue;
            }
            let mut acc = Complex64::default();
            for k in self.row_start[i] as usize..self.row_start[i + 1] as usize {
                let (w, u) = self.wu[k];
                acc += 2.0 * w * (psi[i] - u * psi[self.cols[k] as usize]);
            }
            let m2 = psi[i].norm_sqr();
            acc -= c * self.mesh.vol[i] * (1.0 - m2) * psi[i];
            g[i] = acc;
        }
    }

    /// Relative Euler-Lagrange residual: sup of `|g|/(2 vol)` over free
    /// nodes, scaled by the natural term size `max|ψ|/(bε²)`.
    pub fn rel_residual(&self, psi: &[Complex64], g: &[Complex64]) -> f64 {
        let mut sup = 0.0f64;
        for i in 0..psi.len() {
            if self.free[i] {
                let r = g[i].norm() / (2.0 * self.mesh.vol[i]);
                sup = sup.max(r);
            }
        }
        let amp = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if amp < 1e-12 {
            return 0.0;
        }
        sup * self.b * self.mesh.eps * self.mesh.eps / amp
    }
}

/// Initial states for the minimizer.
pub enum Init {
    Zero,
    Constant(f64),
    /// amplitude per node from a closure (tubular ansatz etc.), in the
    /// mesh's reference gauge
    Field(Vec<Complex64>),
    Random { seed: u64, amp: f64 },
}

pub struct SolveOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 60_000,
            rel_tol: tol::GL2D_RESIDUAL_TOL,
        }
    }
}

/// Gradient descent with BB steps and energy-based rejection. Dirichlet
/// values must already be set in the initial field; they are not touched.
pub fn minimize(
    op: &GlOperator,
    init: Init,
    opts: &SolveOptions,
) -> Result<(ComplexField2D, SolveReport)> {
    let start = std::time::Instant::now();
    let n = op.mesh.n_nodes();
    let mut psi: Vec<Complex64> = match init {
        Init::Zero => vec![Complex64::default(); n],
        Init::Constant(c) => vec![Complex64::new(c, 0.0); n],
        Init::Field(v) => {
            if v.len() != n {
                return Err(Error::Parameter("init field length mismatch".into()));
            }
            v
        }
        Init::Random { seed, amp } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    Complex64::new(
                        amp * (rng.gen::<f64>() - 0.5),
                        amp * (rng.gen::<f64>() - 0.5),
                    )
                })
                .collect()
        }
    };
    // enforce pinned values for non-Field inits
    for i in 0..n {
        match op.mesh.bc[i] {
            NodeBc::DirichletZero => psi[i] = Complex64::default(),
            _ => {}
        }
    }
    let mut g = vec![Complex64::default(); n];
    let mut g_prev = vec![Complex64::default(); n];
    let mut psi_prev = psi.clone();
    let mut e = op.energy(&psi);
    op.grad(&psi, &mut g);
    let mut tau = 1e-3 * op.b * op.mesh.eps * op.mesh.eps;
    let mut rejected = 0usize;
    let mut iterations = 0usize;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let res = op.rel_residual(&psi, &g);
        if res < opts.rel_tol {
            break;
        }
        // trial step with monotone acceptance
        let mut accepted = false;
        for _ in 0..50 {
            let trial: Vec<Complex64> = (0..n)
                .map(|i| {
                    if op.free[i] {
                        psi[i] - tau / (2.0 * op.mesh.vol[i]) * g[i]
                    } else {
                        psi[i]
                    }
                })
                .collect();
            let e_new = op.energy(&trial);
            if e_new <= e + 1e-14 * (1.0 + e.abs()) {
                psi_prev.copy_from_slice(&psi);
                g_prev.copy_from_slice(&g);
                psi = trial;
                e = e_new;
                accepted = true;
                break;
            }
            tau *= 0.5;
            rejected += 1;
        }
        if !accepted {
            break;
        }
        op.grad(&psi, &mut g);
        // BB1 step in the vol-weighted metric
        let (mut sy, mut ss) = (0.0f64, 0.0f64);
        for i in 0..n {
            if !op.free[i] {
                continue;
            }
            let s = psi[i] - psi_prev[i];
            let y = (g[i] - g_prev[i]) / (2.0 * op.mesh.vol[i]);
            ss += s.norm_sqr();
            sy += (s.conj() * y).re;
        }
        if sy > 1e-300 {
            tau = (ss / sy).clamp(1e-6 * op.b * op.mesh.eps * op.mesh.eps, 1e3);
        } else {
            tau = (tau * 2.0).min(1e3);
        }
    }
    op.grad(&psi, &mut g);
    let res = op.rel_residual(&psi, &g);
    let amp = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let converged_to_zero = amp < 1e-8;
    let report = SolveReport {
        energy: op.energy(&psi),
        iterations,
        residual: res,
        wall_ms: start.elapsed().as_millis(),
        converged_to_zero,
        rejected_steps: rejected,
    };
    if res < opts.rel_tol || converged_to_zero {
        Ok((ComplexField2D { psi }, report))
    } else {
        Err(Error::NoConvergence {
            context: "2d gradient flow".into(),
            residual: res,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disc;
    use crate::gl2d::mesh::{band_mesh, graded_depths};

    #[test]
    fn zero_is_an_exact_critical_point() {
        let poly = disc(1.0);
        let t = graded_depths(0.5, 2.0, 6.0);
        let bm = band_mesh(&poly, 0.1, 48, &t, 0).unwrap();
        let op = GlOperator::new(&bm.mesh, 1.5).unwrap();
        let psi = vec![Complex64::default(); bm.mesh.n_nodes()];
        let mut g = vec![Complex64::default(); bm.mesh.n_nodes()];
        op.grad(&psi, &mut g);
        assert!(g.iter().all(|z| z.norm() == 0.0));
        assert_eq!(op.energy(&psi), 0.0);
        let (f, rep) = minimize(&op, Init::Zero, &SolveOptions::default()).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!(rep.energy, 0.0);
    }

    #[test]
    fn constant_field_has_positive_energy_at_small_eps() {
        // the magnetic kinetic term dwarfs the condensation gain
        let poly = disc(1.0);
        let t = graded_depths(0.4, 2.0, 5.0);
        let bm = band_mesh(&poly, 0.1, 64, &t, 0).unwrap();
        let op = GlOperator::new(&bm.mesh, 1.5).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0); bm.mesh.n_nodes()];
        assert!(op.energy(&psi) > 0.0);
    }
}
