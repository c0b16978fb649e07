//! Order-parameter diagnostics: decay profile, boundary-layer deviation,
//! winding number, supercurrent, curvature-resolved quartic mass.

use num_complex::Complex64;
use serde::Serialize;

use super::mesh::{Mesh2D, Ring};
use super::solve::ComplexField2D;
use crate::geometry::CurvilinearPolygon;
use crate::numerics::linear_fit;
use crate::oned::Profile1D;
use crate::{Error, Result};

/// Mass fractions beyond sampled depths and a fitted decay rate.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// sampled physical depths `d = ε, 2ε, …, 10ε`
    pub depths: Vec<f64>,
    /// `∫_{dist>d}|ψ|² / ∫|ψ|²`
    pub mass: Vec<f64>,
    /// fitted exponential rate per unit `t = dist/ε` (positive = decay);
    /// `None` when the state carries no mass
    pub rate: Option<f64>,
    pub no_mass: bool,
}

/// Exponential-decay diagnostic of `|ψ|²` away from the outer boundary.
pub fn agmon_profile(field: &ComplexField2D, mesh: &Mesh2D, eps: f64) -> DecayReport {
    let total: f64 = field
        .psi
        .iter()
        .zip(&mesh.vol)
        .map(|(z, v)| v * z.norm_sqr())
        .sum();
    let depths: Vec<f64> = (1..=10).map(|k| k as f64 * eps).collect();
    if total < 1e-20 {
        return DecayReport {
            depths,
            mass: vec![0.0; 10],
            rate: None,
            no_mass: true,
        };
    }
    let mass: Vec<f64> = depths
        .iter()
        .map(|&d| {
            let m: f64 = field
                .psi
                .iter()
                .zip(mesh.vol.iter().zip(&mesh.dist))
                .filter(|(_, (_, dist))| **dist > d)
                .map(|(z, (v, _))| v * z.norm_sqr())
                .sum();
            m / total
        })
        .collect();
    // fit log mass against t = d/eps over the usable range
    let pts: Vec<(f64, f64)> = depths
        .iter()
        .zip(&mass)
        .filter(|(_, &m)| m > 1e-300)
        .map(|(&d, &m)| (d / eps, m.ln()))
        .collect();
    let rate = if pts.len() >= 3 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        Some(-linear_fit(&xs, &ys).0)
    } else {
        None
    };
    DecayReport {
        depths,
        mass,
        rate,
        no_mass: false,
    }
}

/// Sup over the boundary layer (`t ≤ 3`) of `||ψ| − f₀(t)|`, excluding
/// nodes within `corner_exclusion` (physical length) of the corner set.
pub fn surface_profile_deviation(
    field: &ComplexField2D,
    mesh: &Mesh2D,
    profile: &Profile1D,
    poly: &CurvilinearPolygon,
    eps: f64,
    corner_exclusion: f64,
) -> f64 {
    let mut sup = 0.0f64;
    for (i, z) in field.psi.iter().enumerate() {
        let Some((s, t)) = mesh.tub[i] else { continue };
        if t > 3.0 {
            continue;
        }
        if !poly.corners.is_empty() {
            let s_phys = s * eps;
            let near = poly.corners.iter().any(|c| {
                let d = (s_phys - c.s).rem_euclid(poly.perimeter);
                d.min(poly.perimeter - d) < corner_exclusion
            });
            if near {
                continue;
            }
        }
        sup = sup.max((z.norm() - profile.eval(t)).abs());
    }
    sup
}

/// Integer winding of the field along a mesh ring. The ring's stored
/// reference winding is added to the slow-field increments, so the result
/// is the winding of the physical `ψ = u·e^{iΘ}`.
pub fn winding_number(field: &ComplexField2D, ring: &Ring) -> Result<i64> {
    let vals: Vec<Complex64> = ring.nodes.iter().map(|&i| field.psi[i as usize]).collect();
    let max_abs = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_abs = vals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_abs < 1e-9 * max_abs.max(1e-300) || max_abs == 0.0 {
        return Err(Error::VanishingOnContour { min_abs });
    }
    let mut acc = 0.0;
    for k in 0..vals.len() {
        let a = vals[k];
        let b = vals[(k + 1) % vals.len()];
        acc += (b / a).arg();
    }
    let turns = acc / (2.0 * std::f64::consts::PI) + ring.ref_winding;
    Ok(turns.round() as i64)
}

/// Per-edge gauge-invariant supercurrent `Im(ψ_a^*(Uψ_b − ψ_a))/L_e`.
pub fn supercurrent(field: &ComplexField2D, mesh: &Mesh2D) -> Vec<f64> {
    mesh.edges
        .iter()
        .map(|e| {
            let u = Complex64::from_polar(1.0, e.link + e.ref_shift);
            let d = u * field.psi[e.b as usize] - field.psi[e.a as usize];
            (field.psi[e.a as usize].conj() * d).im / e.length
        })
        .collect()
}

/// One boundary sector of the curvature-resolved quartic-mass table.
#[derive(Debug, Clone, Serialize)]
pub struct SectorMass {
    /// rescaled s-range `[lo, hi)`
    pub s_range: [f64; 2],
    /// physical boundary length of the patch
    pub length: f64,
    /// `(1/2b)∫_sector |ψ|⁴`
    pub quartic_mass: f64,
    /// leading-order prediction `−ε E¹ᴰ₀ · length`
    pub leading: f64,
    /// curvature correction `ε² E_corr ∫ k ds` over the patch
    pub correction: f64,
    pub residual: f64,
}

/// Splits the boundary band into `s`-sectors and compares the quartic mass
/// per sector against `−εE¹ᴰ₀|patch| + ε²E_corr∫k`.
#[allow(clippy::too_many_arguments)]
pub fn density_vs_curvature(
    field: &ComplexField2D,
    mesh: &Mesh2D,
    poly: &CurvilinearPolygon,
    eps: f64,
    b: f64,
    sectors: &[(f64, f64)],
    e1d0: f64,
    ecorr: f64,
) -> Vec<SectorMass> {
    sectors
        .iter()
        .map(|&(lo, hi)| {
            let mut mass = 0.0;
            for (i, z) in field.psi.iter().enumerate() {
                if let Some((s, _)) = mesh.tub[i] {
                    if s >= lo && s < hi {
                        mass += mesh.vol[i] * z.norm_sqr() * z.norm_sqr();
                    }
                }
            }
            mass /= 2.0 * b;
            let length = (hi - lo) * eps;
            // ∫k over the patch by fine sampling (analytic arcs are exact
            // except O(1/m) near corner jumps)
            let m = 400;
            let mut kint = 0.0;
            for j in 0..m {
                let s_phys = (lo + (hi - lo) * (j as f64 + 0.5) / m as f64) * eps;
                kint += poly.curvature_at(s_phys) * length / m as f64;
            }
            let leading = -eps * e1d0 * length;
            let correction = eps * eps * ecorr * kint;
            SectorMass {
                s_range: [lo, hi],
                length,
                quartic_mass: mass,
                leading,
                correction,
                residual: mass - leading - correction,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disc;
    use crate::gl2d::mesh::{band_mesh, graded_depths};

    #[test]
    fn winding_of_pure_phase_is_one() {
        let poly = disc(1.0);
        let t = graded_depths(0.5, 1.0, 3.0);
        let bm = band_mesh(&poly, 0.1, 64, &t, 0).unwrap();
        let mut f = ComplexField2D::zeros(bm.mesh.n_nodes());
        for (i, z) in f.psi.iter_mut().enumerate() {
            let p = bm.mesh.nodes[i];
            let th = p[1].atan2(p[0]);
            *z = Complex64::from_polar(1.0, th);
        }
        let w = winding_number(&f, &bm.mesh.rings[0]).unwrap();
        assert_eq!(w, 1);
        // real positive field: zero
        let ones = ComplexField2D {
            psi: vec![Complex64::new(0.7, 0.0); bm.mesh.n_nodes()],
        };
        assert_eq!(winding_number(&ones, &bm.mesh.rings[0]).unwrap(), 0);
    }

    #[test]
    fn winding_error_on_vanishing_contour() {
        let poly = disc(1.0);
        let t = graded_depths(0.5, 1.0, 3.0);
        let bm = band_mesh(&poly, 0.1, 32, &t, 0).unwrap();
        let f = ComplexField2D::zeros(bm.mesh.n_nodes());
        assert!(matches!(
            winding_number(&f, &bm.mesh.rings[0]),
            Err(Error::VanishingOnContour { .. })
        ));
    }

    #[test]
    fn real_field_zero_link_zero_current() {
        let poly = disc(1.0);
        let t = graded_depths(0.5, 1.0, 3.0);
        let bm = band_mesh(&poly, 0.1, 32, &t, 0).unwrap();
        let mut mesh = bm.mesh;
        for e in &mut mesh.edges {
            e.link = 0.0;
        }
        let f = ComplexField2D {
            psi: vec![Complex64::new(0.5, 0.0); mesh.n_nodes()],
        };
        let j = supercurrent(&f, &mesh);
        assert!(j.iter().all(|&x| x.abs() < 1e-15));
    }
}
