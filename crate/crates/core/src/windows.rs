//! Mode-locking windows (Arnold tongues) of one-parameter families.
//!
//! For a lift rotation `p/q` put `D_t(θ) = F̄_t^q(θ) − θ − p`,
//! `B₋(t) = min_θ D_t` and `B₊(t) = max_θ D_t`. With `sup|∂_t g_t| < N` both
//! are strictly increasing in `t`, and `f_t` is locked at `p/q` exactly when
//! `B₋(t) ≤ 0 ≤ B₊(t)`. The window is therefore `[t_lo, t_hi]` with
//! `B₊(t_lo) = 0` and `B₋(t_hi) = 0`, each found by monotone bisection.

use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleFamily, CircleLift, ParamFamily};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{rationals_in, Frac};
use crate::rng;
use crate::rotation::{
    classify, displacement, grid_for_denominator, rho_estimate, Classification, ClassifyOptions,
};

pub const MAX_BISECTIONS: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-7;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Reduced rotation number `p/q`, `0 ≤ p < q`.
    pub p: i64,
    pub q: u64,
    /// Lift-level numerator (rotation of the lift is `lift_p/q`).
    pub lift_p: i64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub width: f64,
    /// Largest bisection half-width of the two endpoints.
    pub bracket_radius: f64,
    /// Narrower than the tolerance; kept as a width-0 marker at the midpoint.
    pub narrow: bool,
    #[serde(skip)]
    clipped_lo: bool,
    #[serde(skip)]
    clipped_hi: bool,
}

impl Window {
    pub fn rotation(&self) -> Frac {
        Frac {
            p: self.p,
            q: self.q,
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_lo + self.t_hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo && t <= self.t_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// `B₋` or `B₊` of `D` on the circle: grid extremum, then golden-section
/// refinement around every node within one grid spacing of it.
///
/// With `early`, the scan stops at the first node where `B₊ ≥ 0` (or
/// `B₋ ≤ 0`) is already decided and returns that node's value, which has the
/// same sign as the true extremum.
fn boundary_value<M: CircleLift + ?Sized>(
    map: &M,
    p: i64,
    q: u64,
    grid: usize,
    which: Extremum,
    early: bool,
) -> f64 {
    let sign = if which == Extremum::Max { 1.0 } else { -1.0 };
    let h = 1.0 / grid as f64;
    let f = |x: f64| sign * displacement(map, p, q, x);
    let mut vals = Vec::with_capacity(grid);
    for i in 0..grid {
        let v = f(i as f64 * h);
        if early && v >= 0.0 {
            return sign * v;
        }
        vals.push(v);
    }
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = best;
    let mut candidates: Vec<usize> = (0..grid)
        .filter(|&i| {
            let l = vals[(i + grid - 1) % grid];
            let r = vals[(i + 1) % grid];
            vals[i] >= best - h && vals[i] >= l && vals[i] >= r
        })
        .collect();
    candidates.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(std::cmp::Ordering::Equal));
    candidates.truncate(8);
    for i in candidates {
        let x = i as f64 * h;
        out = out.max(golden_max(&f, x - h, x + h));
    }
    sign * out
}

fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..48 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
            best = best.max(fd);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    best
}

/// `(B₋(t), B₊(t))` for the lift rotation `p/q`.
pub fn boundary_functions<F: ParamFamily + ?Sized>(family: &F, p: i64, q: u64, t: f64) -> (f64, f64) {
    let map = family.map_at(t);
    let grid = grid_for_denominator(q);
    (
        boundary_value(&map, p, q, grid, Extremum::Min, false),
        boundary_value(&map, p, q, grid, Extremum::Max, false),
    )
}

/// Smallest root of an increasing function on `[lo, hi]` given
/// `f(lo) < 0 ≤ f(hi)`. Returns the midpoint and half-width of the bracket.
fn bisect_increasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        if 0.5 * (hi - lo) <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), 0.5 * (hi - lo))
}

/// Window of the lift rotation `p/q` inside `t_bracket`, endpoints located to
/// bracket radius `≤ tol`. Endpoints are clipped to the bracket when the
/// window extends past it.
pub fn window_boundaries<F: ParamFamily + ?Sized>(
    family: &F,
    p: i64,
    q: u64,
    t_bracket: (f64, f64),
    tol: f64,
) -> Result<Window> {
    let (a, b) = t_bracket;
    let q = q.max(1);
    let grid = grid_for_denominator(q);
    let b_plus = |t: f64| boundary_value(&family.map_at(t), p, q, grid, Extremum::Max, true);
    let b_minus = |t: f64| boundary_value(&family.map_at(t), p, q, grid, Extremum::Min, true);
    let no_lock = || Error::NoLockInBracket { p, q, lo: a, hi: b };

    let bp_hi = b_plus(b);
    if bp_hi < 0.0 {
        return Err(no_lock());
    }
    let bm_lo = b_minus(a);
    if bm_lo > 0.0 {
        return Err(no_lock());
    }
    let (ia, ib) = rotation_bracket(family, p, q, a, b);
    let (t_lo, r_lo, clipped_lo) = if b_plus(a) >= 0.0 {
        (a, 0.0, true)
    } else {
        let (t, r) = bisect_increasing(b_plus, ia, ib, tol);
        (t, r, false)
    };
    let (t_hi, r_hi, clipped_hi) = if b_minus(b) <= 0.0 {
        (b, 0.0, true)
    } else {
        // largest t with B₋(t) ≤ 0
        let (t, r) = bisect_increasing(|t| b_minus(t) - f64::MIN_POSITIVE, ia, ib, tol);
        (t, r, false)
    };
    let radius = r_lo.max(r_hi);
    if t_hi < t_lo - 2.0 * radius - tol {
        return Err(no_lock());
    }
    let frac = Frac::new(p, q);
    let red = frac.mod_one();
    Ok(Window {
        p: red.p,
        q: red.q,
        lift_p: frac.p,
        t_lo,
        t_hi: t_hi.max(t_lo),
        width: (t_hi - t_lo).max(0.0),
        bracket_radius: radius,
        narrow: false,
        clipped_lo,
        clipped_hi,
    })
}

const BRACKET_N_ITER: u64 = 2048;
const BRACKET_STEPS: usize = 16;

/// Subinterval of `[a, b]` that contains the `p/q` window, from rotation
/// number bounds: `ρ(f_t) < p/q` forces `B₊(t) < 0` and `ρ(f_t) > p/q`
/// forces `B₋(t) > 0`.
fn rotation_bracket<F: ParamFamily + ?Sized>(family: &F, p: i64, q: u64, a: f64, b: f64) -> (f64, f64) {
    let target = p as f64 / q as f64;
    let slack = 1e-12 * (1.0 + target.abs());
    let rho = |t: f64| rho_estimate(&family.map_at(t), 0.0, BRACKET_N_ITER);
    let below = |t: f64| {
        let r = rho(t);
        r.mean_displacement + r.error_bound + slack < target
    };
    let above = |t: f64| {
        let r = rho(t);
        r.mean_displacement - r.error_bound - slack > target
    };
    let mut lo = a;
    if below(a) {
        let mut hi = b;
        for _ in 0..BRACKET_STEPS {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let mut hi = b;
    if above(b) {
        let mut l = lo;
        for _ in 0..BRACKET_STEPS {
            let mid = 0.5 * (l + hi);
            if above(mid) {
                hi = mid;
            } else {
                l = mid;
            }
        }
    }
    (lo, hi)
}

/// Lift rotation numbers at the ends of the parameter range, with the `1/n`
/// error bar folded in.
fn rotation_range<F: ParamFamily + ?Sized>(family: &F, n_iter: u64) -> (f64, f64) {
    let r0 = rho_estimate(&family.map_at(0.0), 0.0, n_iter);
    let r1 = rho_estimate(&family.map_at(1.0), 0.0, n_iter);
    (
        r0.mean_displacement - r0.error_bound,
        r1.mean_displacement + r1.error_bound,
    )
}

/// Every window with `q ≤ q_max` meeting `t ∈ [0,1]`, in Farey order.
///
/// For autonomous families the parameter space is a circle (`f_{t+1} = f_t + N`),
/// so a window cut by `t = 1` is glued to its partner at `t = 0` and reported
/// once with `t_lo < 0`. Windows no wider than `tol` plus both bracket radii
/// become width-0 markers.
pub fn enumerate_windows<F: ParamFamily + ?Sized>(family: &F, q_max: u64, tol: f64) -> Vec<Window> {
    let (lo, hi) = rotation_range(family, crate::rotation::DEFAULT_N_ITER);
    let candidates = rationals_in(lo, hi, q_max);
    let found: Vec<Window> = par::map_slice(&candidates, |c| {
        window_boundaries(family, c.p, c.q, (0.0, 1.0), tol).ok()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut windows = if family.is_autonomous() {
        glue_wrapped(found, i64::from(family.winding()))
    } else {
        found
    };
    for w in &mut windows {
        // widths inside the combined endpoint uncertainty are not resolved
        if w.width <= tol + 2.0 * w.bracket_radius {
            let mid = w.midpoint();
            w.t_lo = mid;
            w.t_hi = mid;
            w.width = 0.0;
            w.narrow = true;
        }
    }
    windows.sort_by(|a, b| {
        (a.lift_p as f64 / a.q as f64)
            .partial_cmp(&(b.lift_p as f64 / b.q as f64))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    windows
}

fn glue_wrapped(found: Vec<Window>, winding: i64) -> Vec<Window> {
    let mut out = found.clone();
    let mut drop = vec![false; out.len()];
    for (i, top) in found.iter().enumerate() {
        if !top.clipped_hi {
            continue;
        }
        let partner = top.lift_p - winding * top.q as i64;
        if let Some(j) = found
            .iter()
            .position(|w| w.q == top.q && w.lift_p == partner && w.clipped_lo)
        {
            let bottom = &mut out[j];
            bottom.t_lo = top.t_lo - 1.0;
            bottom.width = bottom.t_hi - bottom.t_lo;
            bottom.bracket_radius += top.bracket_radius;
            bottom.clipped_lo = false;
            drop[i] = true;
        }
    }
    out.into_iter()
        .zip(drop)
        .filter_map(|(w, d)| (!d).then_some(w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockedMeasure {
    pub q_max: u64,
    /// Sum of certified window widths.
    pub lower: f64,
    /// Fraction of sampled `t` classified Locked.
    pub mc: f64,
    pub unresolved_frac: f64,
    /// Binomial standard error of `mc`.
    pub mc_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Classify `f_t` at each `t`, in input order.
pub fn classify_samples<F: ParamFamily + ?Sized>(
    family: &F,
    ts: &[f64],
    opts: &ClassifyOptions,
) -> Vec<Classification> {
    par::map_slice(ts, |&t| classify(&family.map_at(t), opts).classification)
}

/// Certified lower bound and Monte Carlo estimate of the measure of locked parameters.
pub fn locked_measure<F: ParamFamily + ?Sized>(
    family: &F,
    q_max: u64,
    mc_samples: usize,
    tol: f64,
    seed: u64,
) -> LockedMeasure {
    let windows = enumerate_windows(family, q_max, tol);
    let lower: f64 = windows.iter().map(|w| w.width).sum();
    let ts = rng::uniform_samples(seed, mc_samples.max(1), 0.0, 1.0);
    let classes = classify_samples(family, &ts, &ClassifyOptions::with_q_max(q_max));
    let n = classes.len() as f64;
    let locked = classes.iter().filter(|c| c.is_locked()).count() as f64;
    let unresolved = classes
        .iter()
        .filter(|c| matches!(c, Classification::Unresolved))
        .count() as f64;
    let mc = locked / n;
    LockedMeasure {
        q_max,
        lower,
        mc,
        unresolved_frac: unresolved / n,
        mc_stderr: (mc * (1.0 - mc) / n).sqrt(),
        samples: classes.len(),
        seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TongueRow {
    pub delta: f64,
    pub windows: Vec<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TongueDiagram {
    pub label: String,
    pub q_max: u64,
    pub tol: f64,
    pub rows: Vec<TongueRow>,
}

impl TongueDiagram {
    /// Width of the `p/q` tongue in each row (0 when absent).
    pub fn widths_of(&self, p: i64, q: u64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.windows
                    .iter()
                    .find(|w| w.p == p && w.q == q)
                    .map_or(0.0, |w| w.width)
            })
            .collect()
    }
}

/// Windows of `profile(δ)` for every `δ` in the grid, rows in grid order.
pub fn tongue_diagram(
    label: &str,
    profile: impl Fn(f64) -> Result<CircleFamily>,
    deltas: &[f64],
    q_max: u64,
    tol: f64,
) -> Result<TongueDiagram> {
    let families = deltas.iter().map(|&d| profile(d)).collect::<Result<Vec<_>>>()?;
    let rows = families
        .iter()
        .zip(deltas)
        .map(|(f, &delta)| TongueRow {
            delta,
            windows: enumerate_windows(f, q_max, tol),
        })
        .collect();
    Ok(TongueDiagram {
        label: label.to_string(),
        q_max,
        tol,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Least-squares slope of `ln width` against `ln q`.
    pub exponent: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fit `width ∝ q^exponent` over the windows with positive width.
pub fn scaling_fit(windows: &[Window]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.width > 0.0 && !w.narrow)
        .map(|w| ((w.q as f64).ln(), w.width.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} windows with positive width, need 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all windows share one denominator".into(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit {
        exponent: slope,
        r_squared,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::Renormalized;
    use crate::rotation::{is_locked, LockStatus};

    fn arnold(d: f64) -> CircleFamily {
        CircleFamily::arnold(d).unwrap()
    }

    #[test]
    fn closed_form_zero_window() {
        let f = arnold(0.1);
        let w = window_boundaries(&f, 0, 1, (-0.5, 0.5), 1e-8).unwrap();
        assert!((w.t_lo + 0.1).abs() < 1e-6, "{w:?}");
        assert!((w.t_hi - 0.1).abs() < 1e-6, "{w:?}");
        assert!((w.width - 0.2).abs() < 2e-6);
    }

    #[test]
    fn enumerated_zero_window_wraps() {
        let ws = enumerate_windows(&arnold(0.1), 1, 1e-8);
        assert_eq!(ws.len(), 1);
        assert!((ws[0].t_lo + 0.1).abs() < 1e-6);
        assert!((ws[0].t_hi - 0.1).abs() < 1e-6);
    }

    #[test]
    fn rigid_family_has_point_windows() {
        let ws = enumerate_windows(&CircleFamily::rigid(1), 3, 1e-7);
        let ts: Vec<f64> = ws.iter().map(|w| w.t_lo).collect();
        let expected = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0];
        assert_eq!(ts.len(), 4, "{ws:?}");
        for (t, e) in ts.iter().zip(expected) {
            assert!((t - e).abs() < 1e-7);
        }
        assert!(ws.iter().all(|w| w.width == 0.0 && w.narrow));
    }

    #[test]
    fn half_window_smaller_than_zero_window() {
        let f = arnold(0.1);
        let ws = enumerate_windows(&f, 2, 1e-8);
        assert_eq!(ws.len(), 2);
        let (w0, w1) = (ws[0], ws[1]);
        assert_eq!((w1.p, w1.q), (1, 2));
        assert!(w1.width > 0.0 && w1.width < w0.width);
        assert!(w0.t_hi < w1.t_lo);
    }

    #[test]
    fn q_max_one_has_at_most_zero_window() {
        let ws = enumerate_windows(&arnold(0.05), 1, 1e-7);
        assert!(ws.len() <= 1);
        assert!(ws.iter().all(|w| w.q == 1 && w.p == 0));
    }

    #[test]
    fn window_soundness() {
        let f = arnold(0.12);
        for w in enumerate_windows(&f, 5, 1e-8).iter().filter(|w| !w.narrow) {
            let mid = w.midpoint().rem_euclid(1.0);
            let st = is_locked(&f.map_at(mid), w.lift_p.rem_euclid(w.q as i64), w.q, 4096);
            let st_lift = is_locked(&f.map_at(mid), w.lift_p, w.q, 4096);
            assert!(
                matches!(st, LockStatus::Locked { .. }) || matches!(st_lift, LockStatus::Locked { .. }),
                "{w:?}"
            );
            let outside = w.t_hi + 10.0 * w.bracket_radius + 1e-6;
            if outside < 1.0 {
                let st = is_locked(&f.map_at(outside), w.lift_p, w.q, 4096);
                assert!(!matches!(st, LockStatus::Locked { .. }), "{w:?}");
            }
        }
    }

    #[test]
    fn disjoint_windows() {
        let ws = enumerate_windows(&arnold(0.14), 8, 1e-8);
        for pair in ws.windows(2) {
            assert!(
                pair[0].t_hi <= pair[1].t_lo + pair[0].bracket_radius + pair[1].bracket_radius,
                "{pair:?}"
            );
        }
    }

    #[test]
    fn boundary_functions_increase_in_t() {
        let f = arnold(0.13);
        for &(p, q) in &[(0i64, 1u64), (1, 2), (1, 3)] {
            let mut prev = boundary_functions(&f, p, q, 0.0);
            for k in 1..=10 {
                let t = k as f64 / 10.0;
                let cur = boundary_functions(&f, p, q, t);
                assert!(cur.0 > prev.0 && cur.1 > prev.1);
                prev = cur;
            }
        }
    }

    #[test]
    fn renormalization_is_affine_on_windows() {
        let f = arnold(0.1);
        let (a, b) = (0.2, 0.2 + 1.0 / 3.0);
        let r = Renormalized::new(&f, a, b);
        let inner = enumerate_windows(&r, 6, 1e-9);
        let outer = enumerate_windows(&f, 6, 1e-9);
        let mut matched = 0;
        for w in inner.iter().filter(|w| !w.narrow && w.t_lo > 0.0 && w.t_hi < 1.0) {
            let lo = r.to_outer(w.t_lo);
            let hi = r.to_outer(w.t_hi);
            let o = outer
                .iter()
                .find(|o| o.p == w.p && o.q == w.q)
                .expect("window present in original coordinates");
            assert!((o.t_lo - lo).abs() < 1e-6 && (o.t_hi - hi).abs() < 1e-6);
            matched += 1;
        }
        assert!(matched >= 2);
    }

    #[test]
    fn measure_of_rigid_is_zero() {
        let m = locked_measure(&CircleFamily::rigid(1), 10, 500, 1e-7, 1);
        assert_eq!(m.lower, 0.0);
        assert_eq!(m.mc, 0.0);
    }

    #[test]
    fn measure_q1_is_zero_window() {
        let tol = 1e-7;
        let m = locked_measure(&arnold(0.1), 1, 200, tol, 1);
        assert!(m.lower >= 0.2 - 2.0 * tol);
        assert!(m.lower <= 0.2 + 2.0 * tol);
    }

    #[test]
    fn measure_grows_with_amplitude() {
        let small = locked_measure(&arnold(0.02), 8, 200, 1e-7, 2);
        let large = locked_measure(&arnold(0.14), 8, 200, 1e-7, 2);
        assert!(small.lower < large.lower);
    }

    #[test]
    fn scaling_fit_synthetic() {
        let mk = |q: u64, width: f64| Window {
            p: 1,
            q,
            lift_p: 1,
            t_lo: 0.0,
            t_hi: width,
            width,
            bracket_radius: 0.0,
            narrow: false,
            clipped_lo: false,
            clipped_hi: false,
        };
        let cubic: Vec<Window> = (2..9).map(|q| mk(q, 0.3 * (q as f64).powi(-3))).collect();
        let fit = scaling_fit(&cubic).unwrap();
        assert!((fit.exponent + 3.0).abs() < 1e-9);
        let flat: Vec<Window> = (2..6).map(|q| mk(q, 0.01)).collect();
        assert!(scaling_fit(&flat).unwrap().exponent.abs() < 1e-12);
        assert!(matches!(scaling_fit(&cubic[..2]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn scaling_fit_arnold_negative() {
        let ws = enumerate_windows(&arnold(0.1), 8, 1e-10);
        let fit = scaling_fit(&ws).unwrap();
        assert!(fit.exponent.is_finite() && fit.exponent < 0.0);
    }

    #[test]
    fn tongue_rows_and_zero_delta() {
        let d = tongue_diagram("arnold", CircleFamily::arnold, &[0.0, 0.05, 0.1], 4, 1e-8).unwrap();
        assert!(d.rows[0].windows.iter().all(|w| w.width == 0.0));
        let w = d.widths_of(0, 1);
        assert!(w[0] <= w[1] && w[1] <= w[2]);
        assert!(tongue_diagram("arnold", CircleFamily::arnold, &[0.2], 4, 1e-8).is_err());
    }
}
