//! Corner effective energy: the blown-up (ε = 1) corner region `Γ_β`, the
//! boundary trace built from the 1D pair `(f₀, α₀)`, the finite-size energy
//! `E_corner,β(L, ℓ)`, its `(L, ℓ) → ∞` extrapolation, and the comparison
//! against `−(π − β)·E_corr`.
//!
//! Geometry (vertex at the origin): the outer boundary `∂_out` is the pair
//! of sides along the rays `θ = 0` and `θ = β`, each of length `L`; the
//! region is every point of the wedge within distance `ℓ` of `∂_out`
//! (`ℓ ≤ tan(β/2)·L` when `β < π`, so the inner edges meet on the
//! bisectrix; for `β > π` the inner boundary gains an arc of radius `ℓ`
//! around the vertex). `∂_in` (inner edges) and `∂_bd` (the two end caps at
//! `s = ±L`) carry Dirichlet trace data; `∂_out` is a natural boundary.
//!
//! The subtraction term uses the *grid-matched* discrete 1D energy (the
//! tangential kinetic term kept in its lattice `sin²` form at the strip
//! spacing), so the straight strips cancel identically: the `L`-ladder then
//! converges exponentially and `β = π` collapses to solver tolerance.

use num_complex::Complex64;
use serde::Serialize;

use crate::gl2d::mesh::{Mesh2D, MeshBuilder, NodeBc};
use crate::gl2d::solve::{minimize, ComplexField2D, GlOperator, Init, SolveOptions, SolveReport};
use crate::numerics::{extrapolate_sequence, SeqLimit};
use crate::oned::{strip_profile, OneDResult};
use crate::tolerances as tol;
use crate::{Error, Result};

/// Corner region parameters (blown-up units, `ε = 1`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CornerDomainSpec {
    /// interior opening angle `β ∈ (0, 2π)`
    pub beta: f64,
    /// side length `L` of each straight outer side
    pub big_l: f64,
    /// layer depth `ℓ`
    pub ell: f64,
}

impl CornerDomainSpec {
    pub fn new(beta: f64, big_l: f64, ell: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !(beta > 0.0 && beta < 2.0 * PI) {
            return Err(Error::Parameter(format!(
                "corner angle must lie in (0, 2*pi), got {beta}"
            )));
        }
        if big_l <= 0.0 || ell <= 0.0 {
            return Err(Error::Parameter("need L > 0 and ell > 0".into()));
        }
        if beta < PI && ell > (beta / 2.0).tan() * big_l + 1e-12 {
            return Err(Error::Parameter(format!(
                "layer depth must satisfy ell <= tan(beta/2)*L = {:.4}",
                (beta / 2.0).tan() * big_l
            )));
        }
        if ell > big_l {
            return Err(Error::Parameter("layer depth must satisfy ell <= L".into()));
        }
        Ok(CornerDomainSpec { beta, big_l, ell })
    }
}

/// Assembled corner mesh plus the bookkeeping the energy needs.
pub struct CornerMesh {
    pub mesh: Mesh2D,
    /// depth grid shared by the mesh rows and the 1D subtraction
    pub t_grid: Vec<f64>,
    /// tangential spacing of the uniform strip region
    pub h_s: f64,
    pub spec: CornerDomainSpec,
}

/// Build the corner mesh at target spacing `h` in the active layer.
///
/// Two mapped blocks (mirror images across the bisectrix) for `β ≤ π`; for
/// reflex angles two uniform strips plus a polar core fan around the vertex.
/// Column positions in the core ramp interpolate between the bisectrix and
/// the uniform region; strip columns are exactly uniform so the tangential
/// spacing `h_s` is a single number.
pub fn build_corner_mesh(spec: &CornerDomainSpec, h: f64) -> Result<CornerMesh> {
    use std::f64::consts::PI;
    let (beta, big_l, ell) = (spec.beta, spec.big_l, spec.ell);
    let t_grid = crate::gl2d::mesh::graded_depths(h, 5.0_f64.min(ell), ell);
    if t_grid.len() < 11 {
        return Err(Error::MeshTooCoarse(format!(
            "only {} depth layers across ell = {ell}; need at least 10 (shrink h = {h})",
            t_grid.len() - 1
        )));
    }
    let n_t = t_grid.len();
    let n_total = (big_l / h).round().max(8.0) as usize;
    let h_s = big_l / n_total as f64;

    let mut builder = MeshBuilder::new(1.0);
    // tubular coordinates (signed s, t) recorded per node as we go
    let mut tub: Vec<(f64, f64)> = Vec::new();

    let reflex = beta > PI + 1e-14;
    let c = if reflex { 0.0 } else { 1.0 / (beta / 2.0).tan() };
    // ramp columns cover the core out to s0 = n_core·h_s, past the kite top
    // at s = c·ell with whatever margin the side leaves (3 when it fits)
    let n_core = if reflex {
        0
    } else {
        let margin = 3.0_f64.min(0.6 * (big_l - c * ell));
        if margin < 0.5 {
            return Err(Error::MeshTooCoarse(format!(
                "side length L = {big_l} leaves no strip beyond the corner core                  at beta = {beta}, ell = {ell}"
            )));
        }
        ((c * ell + margin) / h_s).ceil() as usize
    };
    if n_core >= n_total {
        return Err(Error::MeshTooCoarse(format!(
            "side length L = {big_l} too short for the core at beta = {beta}"
        )));
    }
    let s0 = n_core as f64 * h_s;
    let n_cols = n_total + 1;

    // side frames: half 0 along θ = 0 (inward normal +y), half 1 mirrored
    let e1 = [beta.cos(), beta.sin()];
    let n1 = [beta.sin(), -beta.cos()];
    let place = |half: usize, s: f64, t: f64| -> [f64; 2] {
        if half == 0 {
            [s, t]
        } else {
            [s * e1[0] + t * n1[0], s * e1[1] + t * n1[1]]
        }
    };
    let col_s = |i: usize, t: f64| -> f64 {
        if i <= n_core {
            let start = c * t;
            start + (s0 - start) * i as f64 / n_core.max(1) as f64
        } else {
            i as f64 * h_s
        }
    };

    // half 0 in full; half 1 shares the i = 0 (bisectrix) column for β ≤ π
    let mut idx0 = vec![vec![0u32; n_t]; n_cols];
    let mut idx1 = vec![vec![0u32; n_t]; n_cols];
    for i in 0..n_cols {
        for j in 0..n_t {
            let s = col_s(i, t_grid[j]);
            let ni = builder.add_node(place(0, s, t_grid[j]));
            tub.push((s, t_grid[j]));
            idx0[i][j] = ni;
        }
    }
    for i in 0..n_cols {
        for j in 0..n_t {
            if i == 0 && !reflex {
                idx1[i][j] = idx0[0][j];
                continue;
            }
            if i == 0 && reflex && j == 0 {
                // shared vertex
                idx1[i][j] = idx0[0][0];
                continue;
            }
            let s = col_s(i, t_grid[j]);
            let ni = builder.add_node(place(1, s, t_grid[j]));
            tub.push((-s, t_grid[j]));
            idx1[i][j] = ni;
        }
    }
    // reflex core: polar fan θ ∈ [π/2, β/2] glued to half 0's s = 0 column,
    // a mirrored fan glued to half 1's, shared bisectrix column and vertex
    let mut fan0: Vec<Vec<u32>> = Vec::new();
    let mut fan1: Vec<Vec<u32>> = Vec::new();
    let mut n_ang = 0usize;
    if reflex {
        let span = beta / 2.0 - PI / 2.0;
        n_ang = ((span * ell) / h_s).ceil().max(2.0) as usize;
        let vertex = idx0[0][0];
        for a in 0..=n_ang {
            let th = PI / 2.0 + span * a as f64 / n_ang as f64;
            let col: Vec<u32> = (0..n_t)
                .map(|j| {
                    if j == 0 {
                        vertex
                    } else if a == 0 {
                        idx0[0][j]
                    } else {
                        let p = [t_grid[j] * th.cos(), t_grid[j] * th.sin()];
                        let ni = builder.add_node(p);
                        tub.push((0.0, t_grid[j]));
                        ni
                    }
                })
                .collect();
            fan0.push(col);
        }
        for a in 0..=n_ang {
            let th = beta - (PI / 2.0 + span * a as f64 / n_ang as f64);
            let col: Vec<u32> = (0..n_t)
                .map(|j| {
                    if j == 0 {
                        vertex
                    } else if a == 0 {
                        idx1[0][j]
                    } else if a == n_ang {
                        fan0[n_ang][j]
                    } else {
                        let p = [t_grid[j] * th.cos(), t_grid[j] * th.sin()];
                        let ni = builder.add_node(p);
                        tub.push((0.0, t_grid[j]));
                        ni
                    }
                })
                .collect();
            fan1.push(col);
        }
    }

    // cells (counterclockwise orientation in the global frame)
    for i in 0..n_cols - 1 {
        for j in 0..n_t - 1 {
            builder.add_cell([idx0[i][j], idx0[i + 1][j], idx0[i + 1][j + 1], idx0[i][j + 1]]);
            builder.add_cell([idx1[i + 1][j], idx1[i][j], idx1[i][j + 1], idx1[i + 1][j + 1]]);
        }
    }
    if reflex {
        // fan0 has θ increasing with a, fan1 decreasing; ccw traversal walks
        // the inner edge with θ decreasing (interior lies radially outward)
        for a in 0..n_ang {
            builder.add_cell([fan0[a][0], fan0[a][1], fan0[a + 1][1], fan0[a][0]]);
            builder.add_cell([fan1[a][0], fan1[a + 1][1], fan1[a][1], fan1[a][0]]);
            for j in 1..n_t - 1 {
                builder.add_cell([fan0[a + 1][j], fan0[a][j], fan0[a][j + 1], fan0[a + 1][j + 1]]);
                builder.add_cell([fan1[a][j], fan1[a + 1][j], fan1[a + 1][j + 1], fan1[a][j + 1]]);
            }
        }
    }

    let mut mesh = builder.finish(|_, _| 0.0);
    // cell-quality gate
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let a = mesh.cell_area(cell);
        if a <= 0.0 {
            return Err(Error::Geometry(format!(
                "inverted cell {ci} (area {a:.3e}) in corner mesh"
            )));
        }
    }
    for (i, &(s, t)) in tub.iter().enumerate() {
        mesh.tub[i] = Some((s, t));
        mesh.dist[i] = t;
    }
    // boundary tags: ∂_in (t = ℓ) and ∂_bd (s = ±L) are trace-pinned
    for i in 0..n_cols {
        mesh.bc[idx0[i][n_t - 1] as usize] = NodeBc::DirichletTrace;
        mesh.bc[idx1[i][n_t - 1] as usize] = NodeBc::DirichletTrace;
    }
    for j in 0..n_t {
        mesh.bc[idx0[n_cols - 1][j] as usize] = NodeBc::DirichletTrace;
        mesh.bc[idx1[n_cols - 1][j] as usize] = NodeBc::DirichletTrace;
    }
    if reflex {
        for col in fan0.iter().chain(fan1.iter()) {
            mesh.bc[col[n_t - 1] as usize] = NodeBc::DirichletTrace;
        }
    }
    // mirror map (conjugate-reflection symmetry check)
    let mut mirror = vec![0u32; mesh.n_nodes()];
    for i in 0..n_cols {
        for j in 0..n_t {
            mirror[idx0[i][j] as usize] = idx1[i][j];
            mirror[idx1[i][j] as usize] = idx0[i][j];
        }
    }
    if reflex {
        for a in 0..=n_ang {
            for j in 0..n_t {
                mirror[fan0[a][j] as usize] = fan1[a][j];
                mirror[fan1[a][j] as usize] = fan0[a][j];
            }
        }
    }
    mesh.mirror = Some(mirror);
    Ok(CornerMesh {
        mesh,
        t_grid,
        h_s,
        spec: *spec,
    })
}

/// Trace data and separable reference state: `ψ⋆(s, t) = f₀(t)·exp(i(μs −
/// ½st))` with `μ = −α₀`, evaluated from each node's nearer-side tubular
/// coordinates (signed `s`; the bisectrix carries side 1 by the
/// deterministic tie rule, where the mismatch is `O(f₀(ℓ))`).
pub struct TraceData {
    /// `ψ⋆` sampled at every node (init field; Dirichlet rows authoritative)
    pub field: Vec<Complex64>,
    /// strip-discrete 1D result on the mesh's depth grid
    pub strip: OneDResult,
}

pub fn psi_star_trace(cm: &CornerMesh, b: f64) -> Result<TraceData> {
    let strip = strip_profile(b, &cm.t_grid, cm.h_s)?;
    let mu = -strip.alpha_opt;
    let field = (0..cm.mesh.n_nodes())
        .map(|i| {
            let (s, t) = cm.mesh.tub[i].expect("corner nodes carry tubular coords");
            let amp = strip.profile.eval(t);
            Complex64::from_polar(amp, mu * s - 0.5 * s * t)
        })
        .collect();
    Ok(TraceData { field, strip })
}

/// Outcome of one `(L, ℓ)` corner solve.
#[derive(Debug, Clone, Serialize)]
pub struct CornerEnergy {
    pub spec: CornerDomainSpec,
    pub value: f64,
    /// raw 2D minimum before the `2L·E¹ᴰ₀(ℓ)` subtraction
    pub gl_energy: f64,
    /// per-unit-length strip energy used in the subtraction
    pub e1d_strip: f64,
    pub report: SolveReport,
}

/// `E_corner,β(L, ℓ) = inf GL₁[ψ, F; Γ_β] − 2L·E¹ᴰ₀(ℓ)` with the trace
/// data pinned on `∂_in ∪ ∂_bd`. Multi-start: the `ψ⋆` extension plus a
/// random interior start; the lower converged energy wins (a non-converged
/// random start is discarded).
pub fn compute_corner_energy(spec: &CornerDomainSpec, b: f64, h: f64) -> Result<CornerEnergy> {
    compute_corner_energy_with(spec, b, h, true)
}

pub fn compute_corner_energy_with(
    spec: &CornerDomainSpec,
    b: f64,
    h: f64,
    multistart: bool,
) -> Result<CornerEnergy> {
    let cm = build_corner_mesh(spec, h)?;
    let trace = psi_star_trace(&cm, b)?;
    let op = GlOperator::new(&cm.mesh, b)?;
    let opts = SolveOptions::default();
    let (_, mut best) = minimize(&op, Init::Field(trace.field.clone()), &opts)?;
    if multistart {
        // random interior, trace rows pinned
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut init = trace.field.clone();
        for (i, v) in init.iter_mut().enumerate() {
            if cm.mesh.bc[i] == NodeBc::Free {
                *v = Complex64::new(
                    0.4 * (rng.gen::<f64>() - 0.5),
                    0.4 * (rng.gen::<f64>() - 0.5),
                );
            }
        }
        if let Ok((_, rep2)) = minimize(&op, Init::Field(init), &opts) {
            if rep2.energy < best.energy {
                best = rep2;
            }
        }
    }
    let value = best.energy - 2.0 * spec.big_l * trace.strip.energy;
    Ok(CornerEnergy {
        spec: *spec,
        value,
        gl_energy: best.energy,
        e1d_strip: trace.strip.energy,
        report: best,
    })
}

/// Extrapolated `(L, ℓ) → ∞` report over a ladder of corner energies.
#[derive(Debug, Clone, Serialize)]
pub struct CornerEnergyReport {
    pub beta: f64,
    pub b: f64,
    pub entries: Vec<CornerEnergy>,
    /// inner `ℓ → ∞` limits per `L` (the paper's iterated-limit order)
    pub ell_limits: Vec<(f64, SeqLimit)>,
    /// outer `L → ∞` limit of the inner limits — the reported value
    pub limit: f64,
    pub error_bar: f64,
    /// plateau detected (differences decreasing up to the noise floor)
    pub plateau: bool,
    /// joint diagonal extrapolation, reported for robustness
    pub diagonal_limit: Option<f64>,
    /// conjectured value `−(π − β)·E_corr`
    pub conjectured: f64,
    pub difference: f64,
}

/// Iterated-limit extrapolation, inner in `ℓ` then outer in `L`, with the
/// solver noise floor treated as converged. Errors when the ladder is too
/// small; a non-plateau ladder is reported with `plateau = false`.
pub fn extrapolate_limit(
    entries: &[CornerEnergy],
    ecorr: f64,
    b: f64,
) -> Result<CornerEnergyReport> {
    if entries.is_empty() {
        return Err(Error::Parameter("empty corner ladder".into()));
    }
    let beta = entries[0].spec.beta;
    let mut by_l: std::collections::BTreeMap<u64, Vec<&CornerEnergy>> = Default::default();
    for e in entries {
        by_l.entry(e.spec.big_l.to_bits()).or_default().push(e);
    }
    let mut ls: Vec<f64> = by_l.keys().map(|&k| f64::from_bits(k)).collect();
    ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ls.len() < 3 {
        return Err(Error::Parameter(
            "corner ladder needs at least 3 side lengths".into(),
        ));
    }
    let floor = tol::CORNER_NOISE_FLOOR;
    let mut ell_limits = Vec::new();
    let mut outer_x = Vec::new();
    let mut outer_v = Vec::new();
    let mut plateau = true;
    for &l in &ls {
        let mut group: Vec<&CornerEnergy> = by_l[&l.to_bits()].clone();
        group.sort_by(|a, b| a.spec.ell.partial_cmp(&b.spec.ell).unwrap());
        if group.len() < 3 {
            return Err(Error::Parameter(format!(
                "corner ladder needs at least 3 layer depths per L (L = {l})"
            )));
        }
        let xs: Vec<f64> = group.iter().map(|e| e.spec.ell).collect();
        let vs: Vec<f64> = group.iter().map(|e| e.value).collect();
        let lim = extrapolate_sequence(&xs, &vs, floor);
        plateau &= lim.monotone;
        outer_x.push(l);
        outer_v.push(lim.limit);
        ell_limits.push((l, lim));
    }
    let outer = extrapolate_sequence(&outer_x, &outer_v, floor);
    plateau &= outer.monotone;
    let error_bar = outer
        .error_bar
        .max(ell_limits.iter().map(|(_, l)| l.error_bar).fold(0.0, f64::max));
    // diagonal: per L, the largest available ell
    let diagonal_limit = {
        let diag: Vec<f64> = ls
            .iter()
            .map(|&l| {
                by_l[&l.to_bits()]
                    .iter()
                    .max_by(|a, b| a.spec.ell.partial_cmp(&b.spec.ell).unwrap())
                    .unwrap()
                    .value
            })
            .collect();
        if diag.len() >= 3 {
            Some(extrapolate_sequence(&ls, &diag, floor).limit)
        } else {
            None
        }
    };
    let conjectured = -(std::f64::consts::PI - beta) * ecorr;
    Ok(CornerEnergyReport {
        beta,
        b,
        entries: entries.to_vec(),
        ell_limits,
        limit: outer.limit,
        error_bar,
        plateau,
        diagonal_limit,
        conjectured,
        difference: outer.limit - conjectured,
    })
}

/// One row of the conjecture table.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureRow {
    pub beta: f64,
    pub e_corner: f64,
    pub error_bar: f64,
    /// `−(π − β)·E_corr`
    pub conjectured: f64,
    pub difference: f64,
    /// `|π − β|^{4/3}`: the expected scale of the flat-angle remainder
    pub delta_scale: f64,
}

/// Assemble the conjecture-comparison table from extrapolated reports.
pub fn conjecture_check(reports: &[CornerEnergyReport]) -> Vec<ConjectureRow> {
    reports
        .iter()
        .map(|r| ConjectureRow {
            beta: r.beta,
            e_corner: r.limit,
            error_bar: r.error_bar,
            conjectured: r.conjectured,
            difference: r.difference,
            delta_scale: (std::f64::consts::PI - r.beta).abs().powf(4.0 / 3.0),
        })
        .collect()
}

/// Conjugate reflection of a field across the bisectrix (the discrete
/// counterpart of the mirror symmetry of the data; an energy invariance).
pub fn mirror_conjugate(cm: &CornerMesh, field: &ComplexField2D) -> ComplexField2D {
    let mirror = cm.mesh.mirror.as_ref().expect("corner mesh has mirror map");
    let mut psi = vec![Complex64::default(); field.psi.len()];
    for (i, &m) in mirror.iter().enumerate() {
        psi[m as usize] = field.psi[i].conj();
    }
    ComplexField2D { psi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spec_validation() {
        assert!(CornerDomainSpec::new(PI / 2.0, 10.0, 5.0).is_ok());
        // ell > tan(beta/2) L
        assert!(CornerDomainSpec::new(PI / 3.0, 10.0, 7.0).is_err());
        assert!(CornerDomainSpec::new(0.0, 10.0, 5.0).is_err());
        assert!(CornerDomainSpec::new(7.0, 10.0, 5.0).is_err());
    }

    #[test]
    fn flat_angle_mesh_is_a_rectangle() {
        let spec = CornerDomainSpec::new(PI, 6.0, 3.0).unwrap();
        let cm = build_corner_mesh(&spec, 0.25).unwrap();
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &cm.mesh.nodes {
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
        assert!((xmax - 6.0).abs() < 1e-12 && (xmin + 6.0).abs() < 1e-12);
        assert!(ymin.abs() < 1e-12 && (ymax - 3.0).abs() < 1e-12);
        let total: f64 = cm.mesh.vol.iter().sum();
        assert!((total - 2.0 * 6.0 * 3.0).abs() < 1e-9, "area {total}");
    }

    #[test]
    fn right_angle_mesh_quality_and_curl() {
        let spec = CornerDomainSpec::new(PI / 2.0, 8.0, 4.0).unwrap();
        let cm = build_corner_mesh(&spec, 0.2).unwrap();
        for (ci, cell) in cm.mesh.cells.iter().enumerate() {
            assert!(cm.mesh.cell_area(cell) > 0.0, "cell {ci} inverted");
        }
        for ci in (0..cm.mesh.cells.len()).step_by(29) {
            let d = cm.mesh.curl_defect(ci);
            assert!(d.abs() < 1e-12, "curl defect {d}");
        }
    }

    #[test]
    fn reflex_mesh_covers_the_region() {
        let spec = CornerDomainSpec::new(1.25 * PI, 6.0, 3.0).unwrap();
        let cm = build_corner_mesh(&spec, 0.2).unwrap();
        for cell in &cm.mesh.cells {
            assert!(cm.mesh.cell_area(cell) > 0.0);
        }
        // area: two L×ell strips + annular-sector core of angle β − π
        let expect = 2.0 * 6.0 * 3.0 + 0.5 * 3.0 * 3.0 * (0.25 * PI);
        let total: f64 = cm.mesh.vol.iter().sum();
        assert!(
            (total - expect).abs() < 0.01 * expect,
            "area {total} vs {expect}"
        );
    }

    #[test]
    fn trace_amplitude_is_profile_at_depth() {
        let spec = CornerDomainSpec::new(PI / 2.0, 8.0, 6.0).unwrap();
        let cm = build_corner_mesh(&spec, 0.2).unwrap();
        let trace = psi_star_trace(&cm, 1.5).unwrap();
        for i in 0..cm.mesh.n_nodes() {
            let (_, t) = cm.mesh.tub[i].unwrap();
            let a = trace.field[i].norm();
            if t == 0.0 {
                assert!((a - trace.strip.boundary_value).abs() < 1e-12);
            }
            if (t - spec.ell).abs() < 1e-12 {
                assert!(a < 1e-5, "tail amplitude {a}");
            }
        }
        // conjugate mirror symmetry of the data away from the bisectrix
        // (the shared column takes side 1 by the deterministic tie rule)
        for i in 0..cm.mesh.n_nodes() {
            let m = cm.mesh.mirror.as_ref().unwrap()[i] as usize;
            if m == i {
                continue;
            }
            let d = (trace.field[m] - trace.field[i].conj()).norm();
            assert!(d < 1e-12, "mirror mismatch {d}");
        }
    }
}
