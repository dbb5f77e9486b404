//! Real trigonometric polynomials on the unit circle and polynomial
//! coefficients in the family parameter.
//!
//! A [`TrigPoly`] is `c + Σ_j a_j cos(2πjx) + b_j sin(2πjx)`. Derivatives are
//! exact; sup norms are taken on a grid and certified with a Lipschitz margin
//! from the coefficient bound of the next derivative.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Default grid for sup norms.
pub const NORM_GRID: usize = 4096;

/// Polynomial in the parameter `t`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TPoly(pub Vec<f64>);

impl TPoly {
    pub fn constant(c: f64) -> Self {
        TPoly(vec![c])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> TPoly {
        TPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Upper bound of `|p(t)|` for `t ∈ [0,1]`.
    pub fn abs_bound(&self) -> f64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> TPoly {
        TPoly(self.0.iter().map(|c| c * s).collect())
    }
}

/// One harmonic `a cos(2πjx) + b sin(2πjx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub j: u32,
    pub a: f64,
    pub b: f64,
}

/// Finite real trigonometric polynomial of period 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    constant: f64,
    /// Sorted by `j`, one entry per frequency, `j ≥ 1`.
    harmonics: Vec<Harmonic>,
}

/// Value and first three derivatives at a point.
pub type Jet = [f64; 4];

impl TrigPoly {
    /// Build from a constant and harmonics; equal frequencies are summed and
    /// `j = 0` entries fold into the constant (`a` only, `sin 0 = 0`).
    pub fn new(constant: f64, harmonics: impl IntoIterator<Item = Harmonic>) -> Self {
        let mut constant = constant;
        let mut hs: Vec<Harmonic> = Vec::new();
        for h in harmonics {
            if h.j == 0 {
                constant += h.a;
                continue;
            }
            match hs.iter_mut().find(|x| x.j == h.j) {
                Some(x) => {
                    x.a += h.a;
                    x.b += h.b;
                }
                None => hs.push(h),
            }
        }
        hs.sort_by_key(|h| h.j);
        TrigPoly {
            constant,
            harmonics: hs,
        }
    }

    pub fn zero() -> Self {
        TrigPoly::default()
    }

    /// `amp · sin(2πjx)`.
    pub fn sine(j: u32, amp: f64) -> Self {
        TrigPoly::new(0.0, [Harmonic { j, a: 0.0, b: amp }])
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_frequency(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.j)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.harmonics.iter().all(|h| h.a == 0.0 && h.b == 0.0)
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        TrigPoly::new(
            self.constant + other.constant,
            self.harmonics.iter().chain(other.harmonics.iter()).copied(),
        )
    }

    pub fn scaled(&self, s: f64) -> TrigPoly {
        TrigPoly {
            constant: self.constant * s,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    j: h.j,
                    a: h.a * s,
                    b: h.b * s,
                })
                .collect(),
        }
    }

    /// Walk the harmonics with `(cos 2πjx, sin 2πjx)` generated by rotation
    /// from `(cos 2πx, sin 2πx)`.
    #[inline]
    fn for_each_phase(&self, x: f64, mut f: impl FnMut(&Harmonic, f64, f64)) {
        if self.harmonics.is_empty() {
            return;
        }
        let x = x - x.floor();
        let (s1, c1) = (TAU * x).sin_cos();
        let (mut c, mut s) = (c1, s1);
        let mut j = 1;
        for h in &self.harmonics {
            if h.j == 1 {
                f(h, c1, s1);
                continue;
            }
            if h.j - j > 8 {
                // long gap: direct evaluation keeps the rotation error bounded
                let (sj, cj) = (TAU * h.j as f64 * x).sin_cos();
                c = cj;
                s = sj;
                j = h.j;
            }
            while j < h.j {
                let nc = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = nc;
                j += 1;
            }
            f(h, c, s);
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.constant;
        self.for_each_phase(x, |h, c, s| v += h.a * c + h.b * s);
        v
    }

    /// First derivative only; the hot path of the diffeomorphism checks.
    pub fn deriv1(&self, x: f64) -> f64 {
        let mut v = 0.0;
        self.for_each_phase(x, |h, c, s| {
            let w = TAU * h.j as f64;
            v += w * (h.b * c - h.a * s);
        });
        v
    }

    /// `[p, p', p'', p''']` at `x`.
    pub fn jet(&self, x: f64) -> Jet {
        let mut out = [self.constant, 0.0, 0.0, 0.0];
        self.for_each_phase(x, |h, c, s| {
            let w = TAU * h.j as f64;
            let even = h.a * c + h.b * s;
            let odd = h.b * c - h.a * s;
            out[0] += even;
            out[1] += w * odd;
            out[2] -= w * w * even;
            out[3] -= w * w * w * odd;
        });
        out
    }

    /// Derivative of order `k ≤ 3`.
    pub fn derivative_at(&self, x: f64, k: usize) -> f64 {
        self.jet(x)[k]
    }

    /// Coefficient bound `sup|p^{(k)}| ≤ [k=0]|c| + Σ (2πj)^k √(a²+b²)`.
    /// Valid for every `k`, including orders above 3.
    pub fn derivative_bound(&self, k: u32) -> f64 {
        let base = if k == 0 { self.constant.abs() } else { 0.0 };
        base + self
            .harmonics
            .iter()
            .map(|h| (TAU * h.j as f64).powi(k as i32) * h.a.hypot(h.b))
            .sum::<f64>()
    }

    /// Certified sup norms of the derivatives of order 0..=3.
    pub fn sup_norms(&self, grid: usize) -> [f64; 4] {
        let grid = grid.max(4 * self.max_frequency() as usize).max(2);
        let h = 1.0 / grid as f64;
        let mut grid_max = [0.0f64; 4];
        for i in 0..grid {
            let jet = self.jet(i as f64 * h);
            for k in 0..4 {
                grid_max[k] = grid_max[k].max(jet[k].abs());
            }
        }
        let mut out = [0.0; 4];
        for k in 0..4 {
            // every point is within h/2 of a node
            let lipschitz = self.derivative_bound(k as u32 + 1);
            let certified = grid_max[k] + 0.5 * h * lipschitz;
            out[k] = certified.min(self.derivative_bound(k as u32));
        }
        out
    }
}

/// `‖p‖_{C³}` as the maximum over derivative orders 0..=3 of the sup norms.
pub fn c3_norm(p: &TrigPoly) -> f64 {
    c3_norm_with_grid(p, NORM_GRID)
}

pub fn c3_norm_with_grid(p: &TrigPoly, grid: usize) -> f64 {
    p.sup_norms(grid).into_iter().fold(0.0, f64::max)
}
