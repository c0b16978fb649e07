//! Curvilinear polygons: piecewise-smooth closed boundaries with a finite
//! corner set, tubular coordinates, and the Gauss-Bonnet bookkeeping.
//!
//! Geometry is stored in physical units; the tubular operations take the
//! boundary coordinate `s` in rescaled units (`s_physical = ε·s`) and the
//! scaled normal depth `t = dist/ε`, matching how every energy formula mixes
//! the two scales. Curvature is signed with the inward normal: a convex
//! boundary has `k > 0`.

use serde::Deserialize;

use crate::{Error, Result};

const CLOSURE_TOL: f64 = 1e-12;

/// One smooth boundary piece with an analytic or spline parametrization.
#[derive(Debug, Clone)]
pub enum Arc {
    Segment {
        from: [f64; 2],
        to: [f64; 2],
    },
    /// Counterclockwise circle arc (`theta1 > theta0` traverses ccw; a
    /// clockwise arc, as on a reflex cap, has `theta1 < theta0`).
    Circle {
        center: [f64; 2],
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Natural cubic spline through sample points (chord-length parameter);
    /// curvature comes from the spline derivatives, not point differences.
    Spline(Spline),
}

/// Cubic spline through 2D samples (chord-length parameter). A closed
/// sample loop (first point repeated at the end) is fitted periodically,
/// so the seam is C²; open arcs use natural ends.
#[derive(Debug, Clone)]
pub struct Spline {
    u: Vec<f64>,
    x: CubicCoef,
    y: CubicCoef,
    /// cumulative arclength at the knots (Simpson per interval)
    arclen: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CubicCoef {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl CubicCoef {
    /// Cubic spline coefficients for values `v` at knots `u`: natural ends,
    /// or periodic closure when `periodic` (then `v[n-1]` must equal `v[0]`).
    fn new(u: &[f64], v: &[f64], periodic: bool) -> Self {
        let n = u.len();
        let mut h = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = u[i + 1] - u[i];
        }
        let m = if periodic {
            // cyclic tridiagonal system for the second derivatives,
            // unknowns m_0..m_{N-1} with m_N = m_0 (Sherman-Morrison)
            let nn = n - 1;
            let hw = |i: usize| h[(i + nn - 1) % nn]; // h_{i-1} wrapped
            let vw = |i: isize| v[i.rem_euclid(nn as isize) as usize];
            let mut diag = vec![0.0; nn];
            let mut rhs = vec![0.0; nn];
            for i in 0..nn {
                diag[i] = 2.0 * (hw(i) + h[i]);
                let ii = i as isize;
                rhs[i] = 6.0 * ((vw(ii + 1) - vw(ii)) / h[i] - (vw(ii) - vw(ii - 1)) / hw(i));
            }
            // A = T + corner terms; write A = T' + alpha * e0 e0ᵀ-style rank-1
            let c_first = hw(0); // coupling m_0 <-> m_{N-1}
            let gamma = -diag[0];
            let mut d1 = diag.clone();
            d1[0] -= gamma;
            d1[nn - 1] -= c_first * c_first / gamma;
            let off: Vec<f64> = (0..nn - 1).map(|i| h[i]).collect();
            let solve = |rhs: &[f64]| -> Vec<f64> {
                crate::numerics::solve_tridiag(&d1, &off[..nn - 1], rhs)
            };
            let y1 = solve(&rhs);
            let mut uvec = vec![0.0; nn];
            uvec[0] = gamma;
            uvec[nn - 1] = c_first;
            let y2 = solve(&uvec);
            let fact = (y1[0] + c_first * y1[nn - 1] / gamma)
                / (1.0 + y2[0] + c_first * y2[nn - 1] / gamma);
            let mut m: Vec<f64> = (0..nn).map(|i| y1[i] - fact * y2[i]).collect();
            m.push(m[0]);
            m
        } else {
            let mut diag = vec![0.0; n];
            let mut off = vec![0.0; n - 1];
            let mut rhs = vec![0.0; n];
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
            for i in 1..n - 1 {
                diag[i] = 2.0 * (h[i - 1] + h[i]);
                rhs[i] = 6.0 * ((v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1]);
            }
            off[0] = 0.0;
            for i in 1..n - 1 {
                off[i] = h[i];
            }
            crate::numerics::solve_tridiag(&diag, &off, &rhs)
        };
        let mut a = vec![0.0; n - 1];
        let mut b = vec![0.0; n - 1];
        let mut c = vec![0.0; n - 1];
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            a[i] = v[i];
            c[i] = m[i] / 2.0;
            d[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
            b[i] = (v[i + 1] - v[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
        }
        CubicCoef { a, b, c, d }
    }
    fn eval(&self, u: &[f64], t: f64) -> (f64, f64, f64) {
        let n = u.len();
        let mut i = match u.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(n - 2);
        let dt = t - u[i];
        let v = self.a[i] + dt * (self.b[i] + dt * (self.c[i] + dt * self.d[i]));
        let dv = self.b[i] + dt * (2.0 * self.c[i] + 3.0 * dt * self.d[i]);
        let ddv = 2.0 * self.c[i] + 6.0 * dt * self.d[i];
        (v, dv, ddv)
    }
}

impl Spline {
    pub fn through(points: &[[f64; 2]]) -> Result<Spline> {
        if points.len() < 4 {
            return Err(Error::Geometry("spline arc needs at least 4 points".into()));
        }
        let closed = {
            let (a, b) = (points[0], points[points.len() - 1]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() < 1e-12
        };
        let mut u = vec![0.0];
        for w in points.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            if d == 0.0 {
                return Err(Error::Geometry("repeated spline point".into()));
            }
            u.push(u.last().unwrap() + d);
        }
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let x = CubicCoef::new(&u, &xs, closed);
        let y = CubicCoef::new(&u, &ys, closed);
        // cumulative arclength by per-interval composite Simpson on |r'(u)|
        let mut arclen = vec![0.0];
        for i in 0..u.len() - 1 {
            let speed = |t: f64| {
                let (_, dx, _) = x.eval(&u, t);
                let (_, dy, _) = y.eval(&u, t);
                (dx * dx + dy * dy).sqrt()
            };
            let (a, b) = (u[i], u[i + 1]);
            let mut len = 0.0;
            let m = 8;
            for j in 0..m {
                let lo = a + (b - a) * j as f64 / m as f64;
                let hi = a + (b - a) * (j + 1) as f64 / m as f64;
                len += (hi - lo) / 6.0
                    * (speed(lo) + 4.0 * speed(0.5 * (lo + hi)) + speed(hi));
            }
            arclen.push(arclen.last().unwrap() + len);
        }
        Ok(Spline { u, x, y, arclen })
    }

    fn u_of_arclen(&self, s: f64) -> f64 {
        // monotone lookup + two Newton corrections
        let n = self.arclen.len();
        let mut i = match self
            .arclen
            .binary_search_by(|x| x.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(n - 2);
        let frac = (s - self.arclen[i]) / (self.arclen[i + 1] - self.arclen[i]);
        let mut t = self.u[i] + frac * (self.u[i + 1] - self.u[i]);
        for _ in 0..3 {
            let (sp, _) = self.probe(t);
            let err = self.arclen_at(t) - s;
            if sp > 0.0 {
                t -= err / sp;
            }
        }
        t.clamp(self.u[0], *self.u.last().unwrap())
    }
    fn arclen_at(&self, t: f64) -> f64 {
        let n = self.u.len();
        let mut i = match self.u.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(n - 2);
        // composite Simpson from the knot, same subdivision as the table so
        // knot values reproduce the table exactly
        let (a, b) = (self.u[i], t);
        let speed = |tt: f64| self.probe(tt).0;
        let m = 8;
        let mut len = 0.0;
        for j in 0..m {
            let lo = a + (b - a) * j as f64 / m as f64;
            let hi = a + (b - a) * (j + 1) as f64 / m as f64;
            len += (hi - lo) / 6.0 * (speed(lo) + 4.0 * speed(0.5 * (lo + hi)) + speed(hi));
        }
        self.arclen[i] + len
    }
    /// `(|r'(u)|, curvature·|r'| factors)` helper.
    fn probe(&self, t: f64) -> (f64, f64) {
        let (_, dx, ddx) = self.x.eval(&self.u, t);
        let (_, dy, ddy) = self.y.eval(&self.u, t);
        let sp = (dx * dx + dy * dy).sqrt();
        let cross = dx * ddy - dy * ddx;
        (sp, cross)
    }
    fn length(&self) -> f64 {
        *self.arclen.last().unwrap()
    }
}

impl Arc {
    pub fn length(&self) -> f64 {
        match self {
            Arc::Segment { from, to } => {
                ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt()
            }
            Arc::Circle { radius, theta0, theta1, .. } => radius * (theta1 - theta0).abs(),
            Arc::Spline(sp) => sp.length(),
        }
    }

    /// Point at arclength `s ∈ [0, length]` along the arc.
    pub fn point(&self, s: f64) -> [f64; 2] {
        match self {
            Arc::Segment { from, to } => {
                let len = self.length();
                let w = if len > 0.0 { s / len } else { 0.0 };
                [
                    from[0] + w * (to[0] - from[0]),
                    from[1] + w * (to[1] - from[1]),
                ]
            }
            Arc::Circle { center, radius, theta0, theta1 } => {
                let th = theta0 + (theta1 - theta0).signum() * s / radius;
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
            Arc::Spline(sp) => {
                let u = sp.u_of_arclen(s);
                let (x, _, _) = sp.x.eval(&sp.u, u);
                let (y, _, _) = sp.y.eval(&sp.u, u);
                [x, y]
            }
        }
    }

    /// Unit tangent in the traversal direction.
    pub fn tangent(&self, s: f64) -> [f64; 2] {
        match self {
            Arc::Segment { from, to } => {
                let len = self.length();
                [(to[0] - from[0]) / len, (to[1] - from[1]) / len]
            }
            Arc::Circle { radius, theta0, theta1, .. } => {
                let dir = (theta1 - theta0).signum();
                let th = theta0 + dir * s / radius;
                [-dir * th.sin(), dir * th.cos()]
            }
            Arc::Spline(sp) => {
                let u = sp.u_of_arclen(s);
                let (_, dx, _) = sp.x.eval(&sp.u, u);
                let (_, dy, _) = sp.y.eval(&sp.u, u);
                let n = (dx * dx + dy * dy).sqrt();
                [dx / n, dy / n]
            }
        }
    }

    /// Signed curvature w.r.t. the inward normal of a ccw boundary:
    /// `k = (x'y'' − y'x'') / |r'|³`.
    pub fn curvature(&self, s: f64) -> f64 {
        match self {
            Arc::Segment { .. } => 0.0,
            Arc::Circle { radius, theta0, theta1, .. } => {
                (theta1 - theta0).signum() / radius
            }
            Arc::Spline(sp) => {
                let u = sp.u_of_arclen(s);
                let (speed, cross) = sp.probe(u);
                cross / (speed * speed * speed)
            }
        }
    }
}

/// Corner on the boundary: position `s` (physical arclength) and interior
/// angle `β ∈ (0, 2π)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Corner {
    pub s: f64,
    pub beta: f64,
}

/// Closed piecewise-smooth boundary traversed counterclockwise.
#[derive(Debug, Clone)]
pub struct CurvilinearPolygon {
    pub arcs: Vec<Arc>,
    pub corners: Vec<Corner>,
    /// Physical arclength at which each arc starts.
    pub arc_start: Vec<f64>,
    pub perimeter: f64,
    pub area: f64,
}

/// Tubular coordinates of a point: rescaled boundary coordinate `s`
/// (physical arclength / ε), scaled depth `t = dist/ε ≥ 0`, owning arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubularPoint {
    pub s: f64,
    pub t: f64,
    pub arc: usize,
}

impl CurvilinearPolygon {
    /// Assemble a polygon from ordered arcs; detects corners at arc
    /// junctions, validates closure and the corner-angle range.
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Geometry("polygon needs at least one arc".into()));
        }
        let n = arcs.len();
        let mut arc_start = Vec::with_capacity(n);
        let mut perim = 0.0;
        for (j, arc) in arcs.iter().enumerate() {
            arc_start.push(perim);
            perim += arc.length();
            let next = &arcs[(j + 1) % n];
            let end = arc.point(arc.length());
            let begin = next.point(0.0);
            let gap = ((end[0] - begin[0]).powi(2) + (end[1] - begin[1]).powi(2)).sqrt();
            if gap > CLOSURE_TOL * (1.0 + perim) {
                return Err(Error::Geometry(format!(
                    "arcs do not close up: gap {gap:.3e} between arc {j} and arc {}",
                    (j + 1) % n
                )));
            }
        }
        // corners from tangent jumps at junctions
        let mut corners = Vec::new();
        for j in 0..n {
            let arc = &arcs[j];
            let next = &arcs[(j + 1) % n];
            let t_in = arc.tangent(arc.length());
            let t_out = next.tangent(0.0);
            let cross = t_in[0] * t_out[1] - t_in[1] * t_out[0];
            let dot = t_in[0] * t_out[0] + t_in[1] * t_out[1];
            let turn = cross.atan2(dot);
            // tangent jumps below 1e-4 rad are sampled-boundary noise, not
            // corners (analytic junctions are either exact or genuinely bent)
            if turn.abs() > 1e-4 {
                let beta = std::f64::consts::PI - turn;
                if !(beta > 0.0 && beta < 2.0 * std::f64::consts::PI) {
                    return Err(Error::Geometry(format!(
                        "corner angle {beta} outside (0, 2*pi) at junction {j} (cusp?)"
                    )));
                }
                let s = arc_start[j] + arc.length();
                corners.push(Corner {
                    s: s % perim,
                    beta,
                });
            }
        }
        corners.sort_by(|a, b| a.s.partial_cmp(&b.s).unwrap());
        // area by Green's theorem: ½∮(x dy − y dx), Simpson per arc
        let mut area = 0.0;
        for arc in &arcs {
            let len = arc.length();
            let m = 64.max((len * 64.0) as usize);
            let integrand = |s: f64| {
                let p = arc.point(s);
                let t = arc.tangent(s);
                0.5 * (p[0] * t[1] - p[1] * t[0])
            };
            let mut acc = 0.0;
            for i in 0..m {
                let a = len * i as f64 / m as f64;
                let b = len * (i + 1) as f64 / m as f64;
                acc += (b - a) / 6.0
                    * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
            }
            area += acc;
        }
        if area <= 0.0 {
            return Err(Error::Geometry(
                "boundary must be traversed counterclockwise (area came out nonpositive)".into(),
            ));
        }
        Ok(CurvilinearPolygon {
            arcs,
            corners,
            arc_start,
            perimeter: perim,
            area,
        })
    }

    /// Point on the boundary at physical arclength `s` (wrapped).
    pub fn boundary_point(&self, s_phys: f64) -> [f64; 2] {
        let (idx, local) = self.locate(s_phys);
        self.arcs[idx].point(local)
    }

    /// Inward unit normal at physical arclength `s` (ccw traversal: inward
    /// is the left normal).
    pub fn inward_normal(&self, s_phys: f64) -> [f64; 2] {
        let (idx, local) = self.locate(s_phys);
        let t = self.arcs[idx].tangent(local);
        [-t[1], t[0]]
    }

    /// Signed curvature at physical arclength `s` (jumps at corners are
    /// resolved toward the owning arc's interior value).
    pub fn curvature_at(&self, s_phys: f64) -> f64 {
        let (idx, local) = self.locate(s_phys);
        self.arcs[idx].curvature(local)
    }

    fn locate(&self, s_phys: f64) -> (usize, f64) {
        let mut s = s_phys.rem_euclid(self.perimeter);
        for (j, arc) in self.arcs.iter().enumerate() {
            let len = arc.length();
            if s <= len || j == self.arcs.len() - 1 {
                return (j, s.min(len));
            }
            s -= len;
        }
        unreachable!()
    }

    /// Distance from a point to the boundary (nearest-point, never errors).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.nearest_candidates(p)
            .first()
            .map(|c| c.dist)
            .unwrap_or(f64::INFINITY)
    }

    fn nearest_candidates(&self, p: [f64; 2]) -> Vec<NearCand> {
        let mut out = Vec::with_capacity(self.arcs.len());
        for (j, arc) in self.arcs.iter().enumerate() {
            let (s_local, foot, dist) = nearest_on_arc(arc, p);
            out.push(NearCand {
                dist,
                s_phys: self.arc_start[j] + s_local,
                foot,
                arc: j,
            });
        }
        out.sort_by(|a, b| a.dist.partial_cmp(&b.dist).unwrap());
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct NearCand {
    dist: f64,
    s_phys: f64,
    foot: [f64; 2],
    arc: usize,
}

fn nearest_on_arc(arc: &Arc, p: [f64; 2]) -> (f64, [f64; 2], f64) {
    match arc {
        Arc::Segment { from, to } => {
            let d = [to[0] - from[0], to[1] - from[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let w = (((p[0] - from[0]) * d[0] + (p[1] - from[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let foot = [from[0] + w * d[0], from[1] + w * d[1]];
            let dist = ((p[0] - foot[0]).powi(2) + (p[1] - foot[1]).powi(2)).sqrt();
            (w * len2.sqrt(), foot, dist)
        }
        Arc::Circle { center, radius, theta0, theta1 } => {
            let dir = (theta1 - theta0).signum();
            let ang = (p[1] - center[1]).atan2(p[0] - center[0]);
            // clamp angle into the traversed range
            let lo = theta0.min(*theta1);
            let hi = theta0.max(*theta1);
            let mut best = (f64::INFINITY, lo);
            let mut a = ang;
            // test the representative and its 2π shifts plus the endpoints
            for shift in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let cand = ang + shift * 2.0 * std::f64::consts::PI;
                if cand >= lo && cand <= hi {
                    a = cand;
                    best = (0.0, cand);
                    break;
                }
            }
            if best.0.is_infinite() {
                // outside the angular span: an endpoint is nearest
                let pe0 = [
                    center[0] + radius * lo.cos(),
                    center[1] + radius * lo.sin(),
                ];
                let pe1 = [
                    center[0] + radius * hi.cos(),
                    center[1] + radius * hi.sin(),
                ];
                let d0 = (p[0] - pe0[0]).powi(2) + (p[1] - pe0[1]).powi(2);
                let d1 = (p[0] - pe1[0]).powi(2) + (p[1] - pe1[1]).powi(2);
                a = if d0 <= d1 { lo } else { hi };
            }
            let foot = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
            let dist = ((p[0] - foot[0]).powi(2) + (p[1] - foot[1]).powi(2)).sqrt();
            let s_local = radius * (a - theta0) * dir;
            (s_local.clamp(0.0, arc.length()), foot, dist)
        }
        Arc::Spline(sp) => {
            // coarse sample + golden refinement on squared distance
            let len = sp.length();
            let m = 200;
            let d2 = |s: f64| {
                let q = arc.point(s);
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
            };
            let mut best = (0.0, d2(0.0));
            for i in 1..=m {
                let s = len * i as f64 / m as f64;
                let v = d2(s);
                if v < best.1 {
                    best = (s, v);
                }
            }
            let lo = (best.0 - len / m as f64).max(0.0);
            let hi = (best.0 + len / m as f64).min(len);
            let (s, v) = crate::numerics::brent_min(d2, lo, hi, 1e-12, 100);
            (s, arc.point(s), v.sqrt())
        }
    }
}

/// `∫ k ds` over the smooth part of the boundary (physical units; corners
/// are a null set and contribute nothing). Adaptive-grade Simpson per arc;
/// closed forms for segments and circle arcs.
pub fn curvature_integral(poly: &CurvilinearPolygon) -> Result<f64> {
    let mut total = 0.0;
    for arc in &poly.arcs {
        match arc {
            Arc::Segment { .. } => {}
            Arc::Circle { theta0, theta1, .. } => {
                total += theta1 - theta0;
            }
            Arc::Spline(_) => {
                let len = arc.length();
                let m = 256;
                for i in 0..m {
                    let a = len * i as f64 / m as f64;
                    let b = len * (i + 1) as f64 / m as f64;
                    let (ka, km, kb) = (
                        arc.curvature(a),
                        arc.curvature(0.5 * (a + b)),
                        arc.curvature(b),
                    );
                    if !(ka.is_finite() && km.is_finite() && kb.is_finite()) {
                        return Err(Error::Geometry(format!(
                            "non-finite curvature sample on spline arc near s={a}"
                        )));
                    }
                    total += (b - a) / 6.0 * (ka + 4.0 * km + kb);
                }
            }
        }
    }
    Ok(total)
}

/// Gauss-Bonnet residual `∫_smooth k ds + Σ_j (π − β_j) − 2π`; vanishes for
/// every valid simple ccw boundary and is used as a validation gate.
pub fn gauss_bonnet_defect(poly: &CurvilinearPolygon) -> Result<f64> {
    let smooth = curvature_integral(poly)?;
    let corner_sum: f64 = poly
        .corners
        .iter()
        .map(|c| std::f64::consts::PI - c.beta)
        .sum();
    Ok(smooth + corner_sum - 2.0 * std::f64::consts::PI)
}

/// `r(s, t) = γ(εs) + εt·ν(εs)`: rescaled tubular coordinates to physical
/// point. Valid for `t` below the focal threshold of the owning arc.
pub fn tubular_map(poly: &CurvilinearPolygon, s: f64, t: f64, eps: f64) -> [f64; 2] {
    let s_phys = s * eps;
    let p = poly.boundary_point(s_phys);
    let nu = poly.inward_normal(s_phys);
    [p[0] + eps * t * nu[0], p[1] + eps * t * nu[1]]
}

/// Inverse tubular map: nearest-boundary-point coordinates of `p`.
///
/// Errors with both candidate projections when `p` is (numerically)
/// equidistant from two distinct boundary feet — the medial-axis set — or
/// deeper than the focal threshold of its nearest arc. The non-erroring
/// smallest-`s` tie-break lives in [`project_nearest`].
pub fn inverse_tubular(
    poly: &CurvilinearPolygon,
    p: [f64; 2],
    eps: f64,
) -> Result<TubularPoint> {
    let cands = poly.nearest_candidates(p);
    let best = cands[0];
    if cands.len() > 1 {
        let second = cands[1];
        let foot_gap = ((best.foot[0] - second.foot[0]).powi(2)
            + (best.foot[1] - second.foot[1]).powi(2))
        .sqrt();
        let near_tie = (second.dist - best.dist).abs() <= 1e-9 * (1.0 + best.dist);
        if near_tie && foot_gap > 1e-7 * (1.0 + poly.perimeter) {
            let (sa, sb) = (
                best.s_phys.min(second.s_phys),
                best.s_phys.max(second.s_phys),
            );
            return Err(Error::AmbiguousProjection {
                point: p,
                s_a: sa,
                s_b: sb,
            });
        }
    }
    let k = poly.curvature_at(best.s_phys);
    if k > 0.0 && best.dist >= 0.999 / k {
        return Err(Error::AmbiguousProjection {
            point: p,
            s_a: best.s_phys,
            s_b: best.s_phys,
        });
    }
    Ok(TubularPoint {
        s: best.s_phys / eps,
        t: best.dist / eps,
        arc: best.arc,
    })
}

/// Total-function nearest projection with the documented deterministic
/// smallest-`s` rule on ties (used by mesh builders and diagnostics, where
/// an error would be unusable).
pub fn project_nearest(poly: &CurvilinearPolygon, p: [f64; 2], eps: f64) -> TubularPoint {
    let cands = poly.nearest_candidates(p);
    let best = cands
        .iter()
        .filter(|c| (c.dist - cands[0].dist).abs() <= 1e-9 * (1.0 + cands[0].dist))
        .min_by(|a, b| a.s_phys.partial_cmp(&b.s_phys).unwrap())
        .unwrap();
    TubularPoint {
        s: best.s_phys / eps,
        t: best.dist / eps,
        arc: best.arc,
    }
}

// ---------------------------------------------------------------------------
// built-in shapes

/// Unit-field test domains used across the suite.
pub fn disc(radius: f64) -> CurvilinearPolygon {
    CurvilinearPolygon::new(vec![Arc::Circle {
        center: [0.0, 0.0],
        radius,
        theta0: 0.0,
        theta1: 2.0 * std::f64::consts::PI,
    }])
    .expect("disc is valid")
}

pub fn square(side: f64) -> CurvilinearPolygon {
    let h = side / 2.0;
    CurvilinearPolygon::new(vec![
        Arc::Segment { from: [-h, -h], to: [h, -h] },
        Arc::Segment { from: [h, -h], to: [h, h] },
        Arc::Segment { from: [h, h], to: [-h, h] },
        Arc::Segment { from: [-h, h], to: [-h, -h] },
    ])
    .expect("square is valid")
}

/// Stadium: two straight sides of length `flat` joined by semicircular caps
/// of radius `r`. Smooth (`N = 0`), total curvature 2π.
pub fn stadium(r: f64, flat: f64) -> CurvilinearPolygon {
    use std::f64::consts::PI;
    let a = flat / 2.0;
    CurvilinearPolygon::new(vec![
        Arc::Segment { from: [-a, -r], to: [a, -r] },
        Arc::Circle {
            center: [a, 0.0],
            radius: r,
            theta0: -PI / 2.0,
            theta1: PI / 2.0,
        },
        Arc::Segment { from: [a, r], to: [-a, r] },
        Arc::Circle {
            center: [-a, 0.0],
            radius: r,
            theta0: PI / 2.0,
            theta1: 3.0 * PI / 2.0,
        },
    ])
    .expect("stadium is valid")
}

/// Non-convex pentagon with one reflex corner (interior angle > π).
pub fn reflex_pentagon() -> CurvilinearPolygon {
    let v = [
        [0.0, 0.0],
        [2.0, 0.0],
        [2.0, 1.0],
        [1.0, 0.5],
        [0.0, 1.0],
    ];
    let arcs = (0..5)
        .map(|i| Arc::Segment {
            from: v[i],
            to: v[(i + 1) % 5],
        })
        .collect();
    CurvilinearPolygon::new(arcs).expect("pentagon is valid")
}

// ---------------------------------------------------------------------------
// polygon description files

#[derive(Deserialize)]
struct PolyFile {
    #[serde(rename = "arc")]
    arcs: Vec<ArcSpec>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ArcSpec {
    Segment { from: [f64; 2], to: [f64; 2] },
    Circle {
        center: [f64; 2],
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    Spline { points: Vec<[f64; 2]> },
}

/// Load a polygon from its structured-text description: an ordered
/// `[[arc]]` list. Validates closure and the Gauss-Bonnet identity at
/// 1e-8 for analytic arcs; sampled (spline) boundaries carry O(h²)
/// curvature interpolation error and are gated at 1e-4 instead.
pub fn load_polygon(text: &str) -> Result<CurvilinearPolygon> {
    let parsed: PolyFile =
        toml::from_str(text).map_err(|e| Error::Format(format!("polygon file: {e}")))?;
    let mut arcs = Vec::new();
    for spec in parsed.arcs {
        arcs.push(match spec {
            ArcSpec::Segment { from, to } => Arc::Segment { from, to },
            ArcSpec::Circle { center, radius, theta0, theta1 } => {
                if radius <= 0.0 {
                    return Err(Error::Geometry("circle arc needs radius > 0".into()));
                }
                Arc::Circle { center, radius, theta0, theta1 }
            }
            ArcSpec::Spline { points } => Arc::Spline(Spline::through(&points)?),
        });
    }
    let has_spline = arcs.iter().any(|a| matches!(a, Arc::Spline(_)));
    let poly = CurvilinearPolygon::new(arcs)?;
    let defect = gauss_bonnet_defect(&poly)?;
    let gate = if has_spline { 1e-4 } else { 1e-8 };
    if defect.abs() > gate {
        return Err(Error::Geometry(format!(
            "polygon fails Gauss-Bonnet: defect {defect:.3e} (gate {gate:.0e})"
        )));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disc_curvature_integral_is_two_pi() {
        let d = disc(1.0);
        assert!(d.corners.is_empty());
        let total = curvature_integral(&d).unwrap();
        assert!((total - 2.0 * PI).abs() < 1e-12);
        assert!((d.area - PI).abs() < 1e-9);
        assert!((d.perimeter - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn square_has_four_right_corners_and_zero_curvature() {
        let sq = square(1.0);
        assert_eq!(sq.corners.len(), 4);
        for c in &sq.corners {
            assert!((c.beta - PI / 2.0).abs() < 1e-12);
        }
        assert_eq!(curvature_integral(&sq).unwrap(), 0.0);
        assert!(gauss_bonnet_defect(&sq).unwrap().abs() < 1e-12);
    }

    #[test]
    fn stadium_total_curvature_two_pi_by_hand() {
        // two semicircles of radius r: each contributes π·(r/r) = π
        let st = stadium(1.0, 2.0);
        assert!(st.corners.is_empty());
        assert!((curvature_integral(&st).unwrap() - 2.0 * PI).abs() < 1e-10);
        assert!(gauss_bonnet_defect(&st).unwrap().abs() < 1e-10);
        assert!((st.perimeter - (2.0 * PI + 4.0)).abs() < 1e-10);
    }

    #[test]
    fn reflex_pentagon_defect_vanishes() {
        let p = reflex_pentagon();
        assert_eq!(p.corners.len(), 5);
        assert!(p.corners.iter().any(|c| c.beta > PI), "has a reflex corner");
        assert!(gauss_bonnet_defect(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tubular_map_identity_on_boundary() {
        let d = disc(1.0);
        let p = tubular_map(&d, 0.0, 0.0, 0.1);
        let q = d.boundary_point(0.0);
        assert!((p[0] - q[0]).abs() < 1e-14 && (p[1] - q[1]).abs() < 1e-14);
    }

    #[test]
    fn disc_halfway_point_on_normal_ray() {
        let eps = 0.05;
        let d = disc(1.0);
        let p = tubular_map(&d, 0.0, 0.5 / eps, eps);
        // boundary point (1,0), inward normal (−1,0): land at (0.5, 0)
        assert!((p[0] - 0.5).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn square_diagonal_is_ambiguous() {
        let sq = square(2.0);
        // on the diagonal toward the corner (1,1): equidistant from two sides
        let r = inverse_tubular(&sq, [0.7, 0.7], 0.1);
        assert!(matches!(r, Err(Error::AmbiguousProjection { .. })));
        // the deterministic projection still answers
        let tp = project_nearest(&sq, [0.7, 0.7], 0.1);
        assert!(tp.t > 0.0);
    }

    #[test]
    fn round_trip_inside_injectivity_layer() {
        let eps = 0.05;
        for poly in [disc(1.0), stadium(1.0, 2.0)] {
            for i in 0..12 {
                let s = poly.perimeter * i as f64 / 12.0 / eps;
                for t in [0.0, 0.7, 2.3] {
                    let p = tubular_map(&poly, s, t, eps);
                    let tp = inverse_tubular(&poly, p, eps).unwrap();
                    let wrap = poly.perimeter / eps;
                    let ds = (tp.s - s).rem_euclid(wrap).min((s - tp.s).rem_euclid(wrap));
                    assert!(ds.abs() < 1e-10 * wrap.max(1.0), "s mismatch {ds}");
                    assert!((tp.t - t).abs() < 1e-10, "t mismatch {} vs {}", tp.t, t);
                }
            }
        }
    }

    #[test]
    fn spline_polygon_loads_and_validates() {
        // a smooth oval through sampled points
        let n = 40;
        let pts: Vec<[f64; 2]> = (0..=n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                [1.3 * th.cos(), th.sin()]
            })
            .collect();
        let text = {
            let mut s = String::new();
            s.push_str("[[arc]]\ntype = \"spline\"\npoints = [");
            for p in &pts {
                s.push_str(&format!("[{}, {}],", p[0], p[1]));
            }
            s.push_str("]\n");
            s
        };
        let poly = load_polygon(&text).unwrap();
        assert!(poly.corners.is_empty());
        let gb = gauss_bonnet_defect(&poly).unwrap();
        assert!(gb.abs() < 1e-4, "gb defect {gb}");
    }
}
