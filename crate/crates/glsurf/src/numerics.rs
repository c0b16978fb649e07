//! Small numerical kernels shared across modules: bracketed scalar
//! minimization, tridiagonal solves and eigenvalues, least squares,
//! Richardson extrapolation and plateau detection.

use crate::{Error, Result};

/// Golden-section step ratio.
const GOLD: f64 = 0.381_966_011_250_105;

/// Brent's method on a bracketing triple: golden-section fallback with
/// parabolic refinement. `f` is evaluated O(log(1/tol)) times.
pub fn brent_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut took_parabolic = false;
        if e.abs() > tol1 {
            // parabola through (x, w, v)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                took_parabolic = true;
            }
        }
        if !took_parabolic {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Scan `[lo, hi]` on `n` points for the smallest value, then Brent-refine
/// around it. Returns an error if no interior minimum exists in the range.
pub fn bracketed_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
    tol: f64,
    context: &str,
) -> Result<(f64, f64)> {
    let mut best = (lo, f64::INFINITY);
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let fx = f(x);
        vals.push((x, fx));
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let idx = vals.iter().position(|&(x, _)| x == best.0).unwrap();
    if idx == 0 || idx == n {
        return Err(Error::NoBracket {
            context: context.to_string(),
            lo,
            hi,
        });
    }
    let (a, b) = (vals[idx - 1].0, vals[idx + 1].0);
    Ok(brent_min(f, a, b, tol, 200))
}

/// Thomas algorithm for a tridiagonal system, in place on copies.
/// `diag` length n, `off` length n-1 (symmetric off-diagonal).
pub fn solve_tridiag(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off.first().copied().unwrap_or(0.0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi = x[i] - c[i] * x[i + 1];
        x[i] = xi;
    }
    x
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below
/// `lambda` (Sturm sequence count with the standard underflow guard).
fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < 1e-300 { 1e-300_f64.copysign(q + 1e-300) } else { q };
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
pub fn smallest_eig_tridiag(diag: &[f64], off: &[f64], tol: f64) -> f64 {
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = diag.len();
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < n - 1 {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    while hi - lo > tol * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// Fitted exponent of `|y| ≈ C x^p` via log-log least squares.
/// Entries with `|y|` below `floor` are dropped (sub-noise).
pub fn loglog_exponent(x: &[f64], y: &[f64], floor: f64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi.abs() > floor)
        .map(|(&xi, &yi)| (xi.ln(), yi.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, icept) = linear_fit(&xs, &ys);
    Some((slope, icept.exp()))
}

/// Richardson extrapolation from values at spacings `h` and `h/2` assuming
/// error `C·h^order`. Returns `(extrapolated, error_estimate_of_fine_value)`.
pub fn richardson(e_h: f64, e_h2: f64, order: f64) -> (f64, f64) {
    let w = 2f64.powf(order);
    let extrap = (w * e_h2 - e_h) / (w - 1.0);
    (extrap, (extrap - e_h2).abs())
}

/// How a sequence limit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum DecayModel {
    /// Successive differences below the noise floor: last value is the limit.
    Converged,
    /// Differences shrink geometrically: tail summed as a geometric series.
    Geometric,
    /// Differences consistent with `A/x`: linear fit of value against `1/x`.
    Algebraic,
}

/// Extrapolated limit of a monotone-tail sequence `v(x)` sampled at
/// increasing `x`, with plateau detection.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SeqLimit {
    pub limit: f64,
    pub error_bar: f64,
    pub model: DecayModel,
    /// Successive differences `v[i+1] - v[i]`.
    pub diffs: Vec<f64>,
    /// Differences decrease in magnitude (up to the noise floor).
    pub monotone: bool,
}

/// Extrapolate `v` sampled at `x` (ascending, ≥ 3 points). `floor` is the
/// solver noise level: differences below it count as converged.
///
/// Geometric decay is detected from a stable ratio of successive
/// differences; otherwise an `A/x` fit is tried and the better-explaining
/// model wins. The error bar is never reported below `floor`.
pub fn extrapolate_sequence(x: &[f64], v: &[f64], floor: f64) -> SeqLimit {
    assert!(x.len() >= 3 && x.len() == v.len());
    let n = v.len();
    let diffs: Vec<f64> = (1..n).map(|i| v[i] - v[i - 1]).collect();
    let monotone = diffs
        .windows(2)
        .all(|w| w[1].abs() <= w[0].abs().max(floor));
    let last = *v.last().unwrap();
    let d_last = *diffs.last().unwrap();

    if d_last.abs() <= floor {
        return SeqLimit {
            limit: last,
            error_bar: floor.max(d_last.abs()),
            model: DecayModel::Converged,
            diffs,
            monotone,
        };
    }

    // geometric candidate from the last two differences
    let d_prev = diffs[diffs.len() - 2];
    let mut geo: Option<(f64, f64)> = None;
    if d_prev.abs() > floor {
        let r = d_last / d_prev;
        if r > 0.0 && r < 0.95 {
            let tail = d_last * r / (1.0 - r);
            geo = Some((last + tail, tail.abs().max(d_last.abs() * 0.1)));
        }
    }
    // algebraic candidate: v = limit + A/x (least squares over all points)
    let inv: Vec<f64> = x.iter().map(|xi| 1.0 / xi).collect();
    let (a_slope, a_limit) = linear_fit(&inv, v);
    let alg_resid: f64 = inv
        .iter()
        .zip(v)
        .map(|(ix, vi)| (vi - (a_limit + a_slope * ix)).abs())
        .fold(0.0, f64::max);

    match geo {
        Some((g_limit, g_err)) => {
            // the geometric model should beat A/x on its own residual:
            // for a true geometric tail the A/x fit misses by O(d_prev)
            if alg_resid < 0.2 * d_last.abs() {
                SeqLimit {
                    limit: a_limit,
                    error_bar: alg_resid.max(floor),
                    model: DecayModel::Algebraic,
                    diffs,
                    monotone,
                }
            } else {
                SeqLimit {
                    limit: g_limit,
                    error_bar: g_err.max(floor),
                    model: DecayModel::Geometric,
                    diffs,
                    monotone,
                }
            }
        }
        None => SeqLimit {
            limit: a_limit,
            error_bar: alg_resid.max(d_last.abs()).max(floor),
            model: DecayModel::Algebraic,
            diffs,
            monotone,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_quartic_minimum() {
        let (x, fx) = brent_min(|x| (x - 0.3).powi(4) + 1.0, -2.0, 2.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-2, "x = {x}");
        assert!((fx - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bracketed_min_rejects_monotone() {
        assert!(bracketed_min(|x| x, 0.0, 1.0, 8, 1e-8, "t").is_err());
    }

    #[test]
    fn tridiag_solve_matches_direct() {
        let diag = vec![2.0, 2.0, 2.0, 2.0];
        let off = vec![-1.0, -1.0, -1.0];
        let rhs = vec![1.0, 0.0, 0.0, 1.0];
        let x = solve_tridiag(&diag, &off, &rhs);
        // verify residual
        for i in 0..4 {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 {
                r += off[i - 1] * x[i - 1];
            }
            if i < 3 {
                r += off[i] * x[i + 1];
            }
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn smallest_eig_of_laplacian() {
        // -u'' on (0,1), Dirichlet, n interior points: lambda_1 = (2/h^2)(1-cos(pi h))
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let lam = smallest_eig_tridiag(&diag, &off, 1e-12);
        let exact = 2.0 / (h * h) * (1.0 - (std::f64::consts::PI * h).cos());
        assert!((lam - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn extrapolation_recovers_manufactured_limits() {
        // geometric tail
        let x = [6.0, 8.0, 10.0];
        let v: Vec<f64> = x.iter().map(|&xi| 3.0 + (-xi as f64).exp()).collect();
        let lim = extrapolate_sequence(&x, &v, 1e-12);
        assert!((lim.limit - 3.0).abs() < 1e-5);
        assert!(lim.monotone);
        // algebraic tail
        let x2 = [8.0, 12.0, 16.0, 24.0];
        let v2: Vec<f64> = x2.iter().map(|&xi| -2.0 + 1.0 / xi).collect();
        let lim2 = extrapolate_sequence(&x2, &v2, 1e-12);
        assert_eq!(lim2.model, DecayModel::Algebraic);
        assert!((lim2.limit + 2.0).abs() < 1e-9, "limit {}", lim2.limit);
    }

    #[test]
    fn richardson_second_order() {
        let f = |h: f64| 1.0 + 0.3 * h * h;
        let (ex, _) = richardson(f(0.1), f(0.05), 2.0);
        assert!((ex - 1.0).abs() < 1e-12);
    }
}
