//! Rational enumeration by Stern–Brocot descent.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// Reduced fraction `p/q` with `q ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frac {
    pub p: i64,
    pub q: u64,
}

impl Frac {
    pub fn new(p: i64, q: u64) -> Self {
        assert!(q > 0, "zero denominator");
        let g = (p.unsigned_abs()).gcd(&q).max(1);
        Frac {
            p: p / g as i64,
            q: q / g,
        }
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Representative with `0 ≤ p < q`.
    pub fn mod_one(self) -> Frac {
        Frac {
            p: self.p.rem_euclid(self.q as i64),
            q: self.q,
        }
    }
}

impl std::fmt::Display for Frac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// All reduced `p/q` with `q ≤ q_max` and `lo ≤ p/q ≤ hi`, ascending.
///
/// The integer part is split off and the unit interval is searched by
/// descending the Stern–Brocot tree, pruning subtrees that lie outside the
/// target or whose mediants exceed `q_max`. Cost is proportional to the
/// output plus the tree depth, never `q_max²`.
pub fn rationals_in(lo: f64, hi: f64, q_max: u64) -> Vec<Frac> {
    let mut out = Vec::new();
    if !(lo <= hi) || q_max == 0 || !lo.is_finite() || !hi.is_finite() {
        return out;
    }
    let first = lo.floor() as i64;
    let last = hi.floor() as i64;
    for k in first..=last {
        let a = lo - k as f64;
        let b = hi - k as f64;
        // fractions in [k, k+1): k itself, then the open unit interval
        if a <= 0.0 {
            out.push(Frac { p: k, q: 1 });
        }
        let mut inner = Vec::new();
        descend((0, 1), (1, 1), a.max(0.0), b.min(1.0), q_max, &mut inner);
        out.extend(inner.into_iter().map(|(p, q)| Frac {
            p: p as i64 + k * q as i64,
            q,
        }));
    }
    out
}

/// In-order traversal of the Stern–Brocot subtree between `left` and `right`
/// with an explicit stack (depth can reach `q_max`).
fn descend(
    left: (u64, u64),
    right: (u64, u64),
    lo: f64,
    hi: f64,
    q_max: u64,
    out: &mut Vec<(u64, u64)>,
) {
    enum Job {
        Visit((u64, u64), (u64, u64)),
        Emit((u64, u64)),
    }
    let mut stack = vec![Job::Visit(left, right)];
    while let Some(job) = stack.pop() {
        match job {
            Job::Emit(m) => out.push(m),
            Job::Visit(l, r) => {
                let m = (l.0 + r.0, l.1 + r.1);
                if m.1 > q_max {
                    continue;
                }
                let v = m.0 as f64 / m.1 as f64;
                // the subtree under (l, r) covers (l, r): prune if disjoint
                let lv = l.0 as f64 / l.1 as f64;
                let rv = r.0 as f64 / r.1 as f64;
                if rv < lo || lv > hi {
                    continue;
                }
                // push in reverse so the left subtree is processed first
                if v < hi {
                    stack.push(Job::Visit(m, r));
                }
                if v >= lo && v <= hi && v < 1.0 {
                    stack.push(Job::Emit(m));
                }
                if v > lo {
                    stack.push(Job::Visit(l, m));
                }
            }
        }
    }
}

/// Farey sequence of order `n` on `[0,1]`.
pub fn farey(n: u64) -> Vec<Frac> {
    rationals_in(0.0, 1.0, n)
}
