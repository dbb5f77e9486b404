//! Rotation numbers with error bars, and certified mode-locking tests.
//!
//! For any lift of a circle homeomorphism, `|F̄ⁿ(θ) − θ − nρ| < 1`, so the
//! n-step average displacement is within `1/n` of `ρ`. A lock at `p/q` is
//! certified by a sign change of `D(θ) = F̄^q(θ) − θ − p`, which is exactly
//! the existence of a periodic point.

use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleLift, LiftPoint};
use crate::error::{Error, Result};
use crate::rational::{rationals_in, Frac};

/// Residual below which a grid node counts as a zero of `D`.
pub const ZERO_TOL: f64 = 1e-12;
pub const WITNESS_TOL: f64 = 1e-9;
pub const DEFAULT_N_ITER: u64 = 10_000;

/// Grid size for a lock test at denominator `q`: 4096 up to `q = 20`,
/// doubled for every further 10.
pub fn grid_for_denominator(q: u64) -> usize {
    let doublings = if q <= 20 { 0 } else { (q - 11) / 10 };
    4096usize << doublings.min(12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Periodic point of rotation type `p/q` (reduced, `0 ≤ p < q`).
    Locked { p: i64, q: u64 },
    /// Certified not locked at any `p/q` with `q ≤ q_max`.
    IrrationalCandidate,
    Unresolved,
}

impl Classification {
    pub fn is_locked(&self) -> bool {
        matches!(self, Classification::Locked { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classification::Locked { .. } => "Locked",
            Classification::IrrationalCandidate => "IrrationalCandidate",
            Classification::Unresolved => "Unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    /// `ρ̂ ∈ [0,1)`.
    pub estimate: f64,
    pub error_bound: f64,
    pub n_iter: u64,
    pub classification: Classification,
    /// A point with `|D(θ*)| ≤ WITNESS_TOL` when locked.
    pub witness: Option<f64>,
    /// Average lift displacement, not reduced mod 1.
    pub mean_displacement: f64,
    /// Fractional part of the last orbit point.
    pub orbit_end: f64,
}

/// `(F̄ⁿ(θ₀) − θ₀)/n` with error bound `1/n`; classification is `Unresolved`.
pub fn rho_estimate<M: CircleLift + ?Sized>(map: &M, theta0: f64, n_iter: u64) -> RotationResult {
    let n = n_iter.max(1);
    let start = LiftPoint::new(theta0);
    let end = start.iterate(map, n);
    let disp = (end.whole - start.whole) as f64 + (end.frac - start.frac);
    let mean = disp / n as f64;
    RotationResult {
        estimate: mean.rem_euclid(1.0),
        error_bound: 1.0 / n as f64,
        n_iter: n,
        classification: Classification::Unresolved,
        witness: None,
        mean_displacement: mean,
        orbit_end: end.frac,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LockStatus {
    Locked { witness: f64, residual: f64 },
    NotLocked,
    Unresolved,
}

/// `D(θ) = F̄^q(θ) − θ − p`, evaluated without forming large lift values.
#[inline]
pub fn displacement<M: CircleLift + ?Sized>(map: &M, p: i64, q: u64, theta: f64) -> f64 {
    let start = LiftPoint::new(theta);
    let end = start.iterate(map, q);
    (end.whole - start.whole - p) as f64 + (end.frac - start.frac)
}

/// Certified lock test for the lift rotation `p/q` (`p` is the lift-level
/// numerator; for maps whose lift rotation lies in `[0,1)` it is the usual one).
///
/// * `Locked`: a node with `|D| ≤ ZERO_TOL` or a sign change of `D` between
///   nodes; the witness is refined by bisection.
/// * `NotLocked`: `min D > h` or `max D < −h`. Since `F̄^q` is increasing,
///   `D` drops by at most the spacing `h` between nodes, so this is rigorous.
/// * `Unresolved` otherwise.
pub fn is_locked<M: CircleLift + ?Sized>(map: &M, p: i64, q: u64, grid: usize) -> LockStatus {
    is_locked_near(map, p, q, grid, None)
}

/// [`is_locked`] with an optional hint (e.g. the end of a long orbit, which
/// sits near an attracting periodic point when the map is locked). A sign
/// change found next to the hint certifies the lock without the full grid.
pub fn is_locked_near<M: CircleLift + ?Sized>(
    map: &M,
    p: i64,
    q: u64,
    grid: usize,
    hint: Option<f64>,
) -> LockStatus {
    let q = q.max(1);
    let d = |x: f64| displacement(map, p, q, x);
    if let Some(x0) = hint {
        let d0 = d(x0);
        if d0.abs() <= ZERO_TOL {
            return LockStatus::Locked {
                witness: x0,
                residual: d0,
            };
        }
        for eps in [1e-9, 1e-7, 1e-5, 1e-3] {
            for x1 in [x0 - eps, x0 + eps] {
                let d1 = d(x1);
                if d1.signum() != d0.signum() || d1 == 0.0 {
                    let (lo, hi) = if x1 < x0 { (x1, x0) } else { (x0, x1) };
                    return locked_in_cell(&d, lo, hi);
                }
            }
        }
    }

    let grid = grid.max(2);
    let h = 1.0 / grid as f64;
    let mut vals = Vec::with_capacity(grid);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..grid {
        let x = i as f64 * h;
        let v = d(x);
        if v.abs() <= ZERO_TOL {
            return LockStatus::Locked {
                witness: x,
                residual: v,
            };
        }
        // a downward crossing is an attracting periodic point; |D'| < 1 there,
        // so bisection drives the residual to rounding level
        if let Some(&prev) = vals.last() {
            if prev > 0.0 && v < 0.0 {
                return locked_in_cell(&d, x - h, x);
            }
        }
        min = min.min(v);
        max = max.max(v);
        vals.push(v);
    }
    let first = vals[0];
    let last = vals[grid - 1];
    if last > 0.0 && first < 0.0 {
        return locked_in_cell(&d, 1.0 - h, 1.0);
    }
    if min < 0.0 && max > 0.0 {
        // only upward crossings among nodes (cannot persist on a full period
        // unless a downward one was straddled by the wrap); take any
        for i in 0..grid {
            let j = (i + 1) % grid;
            if vals[i] < 0.0 && vals[j] > 0.0 {
                let lo = i as f64 * h;
                return locked_in_cell(&d, lo, lo + h);
            }
        }
    }
    let slack = h + 4.0 * f64::EPSILON * (q as f64 + 1.0);
    if min > slack || max < -slack {
        LockStatus::NotLocked
    } else {
        LockStatus::Unresolved
    }
}

/// Bisect a sign change of `d` on `[lo, hi]`.
fn locked_in_cell(d: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> LockStatus {
    let (mut lo, mut hi) = (lo, hi);
    let mut dlo = d(lo);
    let mut best = (lo, dlo);
    let dhi = d(hi);
    if dhi.abs() < best.1.abs() {
        best = (hi, dhi);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let dm = d(mid);
        if dm.abs() < best.1.abs() {
            best = (mid, dm);
        }
        if dm == 0.0 {
            break;
        }
        if dm.signum() == dlo.signum() {
            lo = mid;
            dlo = dm;
        } else {
            hi = mid;
        }
    }
    LockStatus::Locked {
        witness: best.0.rem_euclid(1.0),
        residual: best.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub q_max: u64,
    pub n_iter: u64,
    pub theta0: f64,
    /// Lock-test grid for `q ≤ 20`; scaled like [`grid_for_denominator`].
    pub base_grid: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            q_max: 30,
            n_iter: DEFAULT_N_ITER,
            theta0: 0.0,
            base_grid: 4096,
        }
    }
}

impl ClassifyOptions {
    pub fn with_q_max(q_max: u64) -> Self {
        ClassifyOptions {
            q_max,
            ..Default::default()
        }
    }

    pub fn grid_for(&self, q: u64) -> usize {
        grid_for_denominator(q) / 4096 * self.base_grid.max(2)
    }
}

/// Estimate `ρ`, then test every reduced `p/q` with `q ≤ q_max` inside the
/// error bar (nearest first). Locked on the first certified lock;
/// IrrationalCandidate if every candidate is certified unlocked (including
/// the case of no candidate at all); Unresolved otherwise.
pub fn classify<M: CircleLift + ?Sized>(map: &M, opts: &ClassifyOptions) -> RotationResult {
    let mut res = rho_estimate(map, opts.theta0, opts.n_iter);
    let m = res.mean_displacement;
    let slack = res.error_bound * (1.0 + 1e-9) + 1e-15;
    let mut candidates = rationals_in(m - slack, m + slack, opts.q_max);
    candidates.sort_by(|a, b| {
        (a.value() - m)
            .abs()
            .partial_cmp(&(b.value() - m).abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unresolved = false;
    for c in candidates {
        match is_locked_near(map, c.p, c.q, opts.grid_for(c.q), Some(res.orbit_end)) {
            LockStatus::Locked { witness, .. } => {
                let r = Frac::new(c.p, c.q).mod_one();
                res.classification = Classification::Locked { p: r.p, q: r.q };
                res.witness = Some(witness);
                return res;
            }
            LockStatus::NotLocked => {}
            LockStatus::Unresolved => unresolved = true,
        }
    }
    res.classification = if unresolved {
        Classification::Unresolved
    } else {
        Classification::IrrationalCandidate
    };
    res
}

/// Star discrepancy of the raw orbit at bin resolution,
/// `max_k |#{x_i < (k+1)/B}/n − (k+1)/B|`, after checking every bin is hit.
///
/// The invariant measure of a map conjugate to a rotation need not be
/// Lebesgue, so only the full-support part (`EmptyBin`) is a hard signal.
pub fn equidistribution_test<M: CircleLift + ?Sized>(
    map: &M,
    theta0: f64,
    n_iter: u64,
    bins: usize,
) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be ≥ 1".into()));
    }
    let mut counts = vec![0u64; bins];
    let mut p = LiftPoint::new(theta0);
    for _ in 0..n_iter {
        p = p.step(map);
        let b = ((p.frac * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    if let Some(bin) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyBin { bin, bins });
    }
    let n = n_iter as f64;
    let mut cum = 0u64;
    let mut disc = 0.0f64;
    for (k, &c) in counts.iter().enumerate() {
        cum += c;
        disc = disc.max((cum as f64 / n - (k + 1) as f64 / bins as f64).abs());
    }
    Ok(disc)
}
