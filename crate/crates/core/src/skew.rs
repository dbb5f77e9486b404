//! Skew-product torus maps `F_t(x, y) = (m·x, y + t + g_t(x, y)) mod 1`.
//!
//! The base `x ↦ m·x` has periodic orbits at `x0 = k/(mⁿ−1)`. Over such an
//! orbit, `Fⁿ` maps the vertical circle `{x0} × S¹` to itself, and its fiber
//! part is a composition of `n` circle diffeomorphisms: the restricted map.
//! Orbit points are computed in exact rational arithmetic.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::circle_map::{ComposedCircleMap, ParamFamily, Stage, T_GRID};
use crate::error::{Error, Result};
use crate::par;
use crate::rotation::{classify, Classification, ClassifyOptions, RotationResult};
use crate::trig::{Harmonic, TPoly, TrigPoly, NORM_GRID};

/// `a(t) cos(2π(jx·x + jy·y)) + b(t) sin(2π(jx·x + jy·y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewHarmonic {
    pub jx: i64,
    pub jy: i64,
    pub a: TPoly,
    pub b: TPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewMap {
    m: u32,
    constant: TPoly,
    harmonics: Vec<SkewHarmonic>,
    label: String,
}

impl SkewMap {
    /// Validates `m ≥ 2` and the fiber condition `1 + ∂_y g_t > 0` on
    /// `[0,1] × T²`.
    pub fn new(
        m: u32,
        constant: TPoly,
        harmonics: Vec<SkewHarmonic>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if m < 2 {
            return Err(Error::InvalidInput(format!("{label}: base m = {m} must be ≥ 2")));
        }
        let map = SkewMap {
            m,
            constant,
            harmonics,
            label,
        };
        map.validate()?;
        Ok(map)
    }

    /// `g_t(x, y) = δ sin(2πy)`: an Arnold map on every fiber.
    pub fn arnold_fiber(m: u32, delta: f64) -> Result<Self> {
        SkewMap::new(
            m,
            TPoly::default(),
            vec![SkewHarmonic {
                jx: 0,
                jy: 1,
                a: TPoly::default(),
                b: TPoly::constant(delta),
            }],
            format!("arnold_fiber(m={m}, delta={delta})"),
        )
    }

    /// `g ≡ 0`.
    pub fn rigid(m: u32) -> Result<Self> {
        SkewMap::new(m, TPoly::default(), Vec::new(), format!("rigid_fiber(m={m})"))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn harmonics(&self) -> &[SkewHarmonic] {
        &self.harmonics
    }

    pub fn constant_term(&self) -> &TPoly {
        &self.constant
    }

    pub fn is_autonomous(&self) -> bool {
        self.constant.is_constant()
            && self
                .harmonics
                .iter()
                .all(|h| h.a.is_constant() && h.b.is_constant())
    }

    pub fn g(&self, t: f64, x: f64, y: f64) -> f64 {
        let mut v = self.constant.eval(t);
        for h in &self.harmonics {
            let phase = TAU * (h.jx as f64 * x + h.jy as f64 * y);
            let (s, c) = phase.sin_cos();
            v += h.a.eval(t) * c + h.b.eval(t) * s;
        }
        v
    }

    fn dy_g(&self, t: f64, x: f64, y: f64) -> f64 {
        let mut v = 0.0;
        for h in &self.harmonics {
            let phase = TAU * (h.jx as f64 * x + h.jy as f64 * y);
            let (s, c) = phase.sin_cos();
            v += TAU * h.jy as f64 * (h.b.eval(t) * c - h.a.eval(t) * s);
        }
        v
    }

    /// Coefficient bound on `sup |∂_t^i ∂_x^a ∂_y^b g|` over `t ∈ [0,1]`.
    fn coefficient_bound(&self, dt: usize, dx: i32, dy: i32) -> f64 {
        let d = |p: &TPoly| {
            let mut p = p.clone();
            for _ in 0..dt {
                p = p.derivative();
            }
            p.abs_bound()
        };
        let base = if dx == 0 && dy == 0 { d(&self.constant) } else { 0.0 };
        base + self
            .harmonics
            .iter()
            .map(|h| {
                (TAU * h.jx.unsigned_abs() as f64).powi(dx)
                    * (TAU * h.jy.unsigned_abs() as f64).powi(dy)
                    * (d(&h.a) + d(&h.b))
            })
            .sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        if self.coefficient_bound(0, 0, 1) < 1.0 {
            return Ok(());
        }
        let nx = 256usize.max(8 * self.max_jx() as usize);
        let ny = 1024usize.max(8 * self.max_jy() as usize);
        let ts: Vec<f64> = if self.is_autonomous() {
            vec![0.0]
        } else {
            (0..T_GRID).map(|i| i as f64 / (T_GRID - 1) as f64).collect()
        };
        let ht = if ts.len() > 1 { 1.0 / (T_GRID - 1) as f64 } else { 0.0 };
        let margin = 0.5 / nx as f64 * self.coefficient_bound(0, 1, 1)
            + 0.5 / ny as f64 * self.coefficient_bound(0, 0, 2)
            + 0.5 * ht * self.coefficient_bound(1, 0, 1);
        for &t in &ts {
            for i in 0..nx {
                let x = i as f64 / nx as f64;
                for j in 0..ny {
                    let y = j as f64 / ny as f64;
                    let v = 1.0 + self.dy_g(t, x, y);
                    if v - margin <= 0.0 {
                        return Err(Error::DegenerateFiber(format!(
                            "{}: 1 + ∂y g ≤ {:.3e} near (t, x, y) = ({t}, {x}, {y})",
                            self.label,
                            v - margin
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn max_jx(&self) -> u64 {
        self.harmonics.iter().map(|h| h.jx.unsigned_abs()).max().unwrap_or(0)
    }

    fn max_jy(&self) -> u64 {
        self.harmonics.iter().map(|h| h.jy.unsigned_abs()).max().unwrap_or(0)
    }
}

/// One step of the torus map, reduced mod 1 in each coordinate.
pub fn skew_apply(map: &SkewMap, t: f64, (x, y): (f64, f64)) -> (f64, f64) {
    let x1 = map.m as f64 * x;
    let y1 = y + t + map.g(t, x, y);
    (x1 - x1.floor(), y1 - y1.floor())
}

/// The vertical circle over `x0 = k/(mⁿ−1)` with minimal period `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicCircle {
    pub m: u32,
    /// Numerator over `mⁿ − 1`.
    pub k: BigUint,
    pub n: u32,
    /// `k/(mⁿ−1)` in lowest terms.
    pub x0: BigRational,
}

impl PeriodicCircle {
    /// The circle over `x0` (reduced into `[0,1)`), with its minimal period.
    pub fn from_x0(m: u32, x0: BigRational) -> Result<Self> {
        let x0 = frac(&x0);
        let den = x0.denom().magnitude().clone();
        let mb = BigUint::from(m);
        if !den.gcd(&mb).is_one() {
            return Err(Error::InvalidInput(format!(
                "{x0} is not periodic under x ↦ {m}x"
            )));
        }
        let n = multiplicative_order(&mb, &den);
        let full = mb.pow(n) - BigUint::one();
        let k = x0.numer().magnitude() * (&full / &den);
        Ok(PeriodicCircle { m, k, n, x0 })
    }

    /// `x_i = mⁱ·x0 mod 1` for `i = 0..n`, exactly.
    pub fn orbit(&self) -> Vec<BigRational> {
        let m = BigRational::from_integer(BigInt::from(self.m));
        let mut x = self.x0.clone();
        let mut out = Vec::with_capacity(self.n as usize);
        for _ in 0..self.n {
            out.push(x.clone());
            x = frac(&(&x * &m));
        }
        out
    }

    pub fn x0_f64(&self) -> f64 {
        self.x0.to_f64().unwrap_or(f64::NAN)
    }
}

fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// Smallest `p ≥ 1` with `mᵖ ≡ 1 (mod q)`; 1 for `q = 1`.
fn multiplicative_order(m: &BigUint, q: &BigUint) -> u32 {
    if q.is_one() {
        return 1;
    }
    let r = m % q;
    let mut acc = r.clone();
    let mut p = 1u32;
    while !acc.is_one() {
        acc = (&acc * &r) % q;
        p += 1;
    }
    p
}

/// Every periodic circle of minimal period `n ≤ n_max`, sorted by `(n, k)`.
///
/// A value fixed by `x ↦ mⁿx` is listed once, under its minimal period.
pub fn periodic_circles(m: u32, n_max: u32) -> Vec<PeriodicCircle> {
    let mb = BigUint::from(m);
    let mut out = Vec::new();
    for n in 1..=n_max {
        let full = mb.pow(n) - BigUint::one();
        let mut k = BigUint::zero();
        while k < full {
            let x0 = BigRational::new(BigInt::from(k.clone()), BigInt::from(full.clone()));
            let den = x0.denom().magnitude().clone();
            if multiplicative_order(&mb, &den) == n {
                out.push(PeriodicCircle {
                    m,
                    k: k.clone(),
                    n,
                    x0,
                });
            }
            k += 1u32;
        }
    }
    out
}

/// Per-stage harmonic phases: `(jy, cos 2πjx·x_i, sin 2πjx·x_i)` for each
/// harmonic of the source map.
type StagePhases = Vec<(i64, f64, f64)>;

/// `t ↦ F_tⁿ` restricted to the circle over `x0`, as a family of circle maps
/// with winding `n`.
#[derive(Debug, Clone)]
pub struct RestrictedFamily {
    source: SkewMap,
    circle: PeriodicCircle,
    phases: Vec<StagePhases>,
    label: String,
}

impl RestrictedFamily {
    pub fn new(source: &SkewMap, circle: &PeriodicCircle) -> Result<Self> {
        if circle.m != source.m {
            return Err(Error::InvalidInput(format!(
                "circle for base {} used with map of base {}",
                circle.m, source.m
            )));
        }
        let phases = circle
            .orbit()
            .iter()
            .map(|x| {
                source
                    .harmonics
                    .iter()
                    .map(|h| {
                        let jx = BigRational::from_integer(BigInt::from(h.jx));
                        let alpha = frac(&(jx * x)).to_f64().unwrap_or(0.0);
                        let (s, c) = (TAU * alpha).sin_cos();
                        (h.jy, c, s)
                    })
                    .collect()
            })
            .collect();
        let rf = RestrictedFamily {
            source: source.clone(),
            circle: circle.clone(),
            phases,
            label: format!("{} on {}/{} (n={})", source.label, circle.x0.numer(), circle.x0.denom(), circle.n),
        };
        let nodes: Vec<f64> = if source.is_autonomous() {
            vec![0.0]
        } else {
            (0..T_GRID).map(|i| i as f64 / (T_GRID - 1) as f64).collect()
        };
        for t in nodes {
            if let Err(i) = rf.map_at(t).check_diffeo(NORM_GRID) {
                return Err(Error::DegenerateFiber(format!(
                    "{}: stage {i} at t = {t}",
                    rf.label
                )));
            }
        }
        Ok(rf)
    }

    pub fn circle(&self) -> &PeriodicCircle {
        &self.circle
    }

    pub fn source(&self) -> &SkewMap {
        &self.source
    }

    /// Fiber map over `x_i` as a trigonometric polynomial in `y`, with every
    /// `t`-coefficient evaluated through `coef`.
    fn stage_poly(&self, i: usize, coef: impl Fn(&TPoly) -> f64) -> TrigPoly {
        let mut constant = coef(&self.source.constant);
        let mut hs = Vec::new();
        for (h, &(jy, c, s)) in self.source.harmonics.iter().zip(&self.phases[i]) {
            let (a, b) = (coef(&h.a), coef(&h.b));
            let ca = a * c + b * s;
            let sa = b * c - a * s;
            match jy.signum() {
                0 => constant += ca,
                1 => hs.push(Harmonic { j: jy as u32, a: ca, b: sa }),
                _ => hs.push(Harmonic {
                    j: jy.unsigned_abs() as u32,
                    a: ca,
                    b: -sa,
                }),
            }
        }
        TrigPoly::new(constant, hs)
    }

    pub fn fiber_poly(&self, i: usize, t: f64) -> TrigPoly {
        self.stage_poly(i, |p| p.eval(t))
    }

    fn fiber_poly_dt(&self, i: usize, t: f64) -> TrigPoly {
        self.stage_poly(i, |p| p.derivative().eval(t))
    }

    /// Mean of `∂_t lift / n` over a `grid × grid` set of `(t, θ)` nodes.
    pub fn mean_winding_ratio(&self, grid: usize) -> f64 {
        let grid = grid.max(1);
        let n = f64::from(self.circle.n);
        let mut sum = 0.0;
        for i in 0..grid {
            let t = (i as f64 + 0.5) / grid as f64;
            for j in 0..grid {
                let theta = j as f64 / grid as f64;
                sum += self.lift_dt(t, theta) / n;
            }
        }
        sum / (grid * grid) as f64
    }
}

impl ParamFamily for RestrictedFamily {
    fn winding(&self) -> u32 {
        self.circle.n
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn map_at(&self, t: f64) -> ComposedCircleMap {
        ComposedCircleMap::new(
            (0..self.phases.len())
                .map(|i| Stage {
                    shift: t,
                    periodic: self.fiber_poly(i, t),
                })
                .collect(),
        )
    }

    /// `v ← v·(1 + ∂_y g) + 1 + ∂_t g` along the fiber orbit.
    fn lift_dt(&self, t: f64, theta: f64) -> f64 {
        let mut y = theta;
        let mut v = 0.0;
        for i in 0..self.phases.len() {
            let p = self.fiber_poly(i, t);
            let pt = self.fiber_poly_dt(i, t);
            v = v * (1.0 + p.deriv1(y)) + 1.0 + pt.eval(y);
            y = y + t + p.eval(y);
        }
        v
    }

    fn is_autonomous(&self) -> bool {
        self.source.is_autonomous()
    }
}

pub fn restricted_family(map: &SkewMap, circle: &PeriodicCircle) -> Result<RestrictedFamily> {
    RestrictedFamily::new(map, circle)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A3Check {
    /// `sup_t ‖lift − θ − n·t‖_{C³}` over the sampled `t` nodes.
    pub sup_c3: f64,
    pub passes: bool,
}

/// Condition (A3) at radius `r` for one restricted family: the composed
/// fiber map stays within C³ distance `r` of the rotation by `n·t`.
///
/// The `y` supremum carries a Lipschitz margin; the `t` supremum is sampled
/// on `t_grid` nodes (one node when the map does not depend on `t`).
pub fn a3_check(rf: &RestrictedFamily, r: f64, t_grid: usize, y_grid: usize) -> A3Check {
    let nodes: Vec<f64> = if rf.is_autonomous() || t_grid <= 1 {
        vec![0.0]
    } else {
        (0..t_grid).map(|i| i as f64 / (t_grid - 1) as f64).collect()
    };
    let sup_c3 = nodes
        .iter()
        .map(|&t| rf.map_at(t).periodic_part_c3(y_grid))
        .fold(0.0, f64::max);
    A3Check {
        sup_c3,
        passes: sup_c3 < r,
    }
}

#[derive(Debug, Clone)]
pub struct QuasiHit {
    pub circle: PeriodicCircle,
    pub rotation: RotationResult,
}

/// The restricted families searched by [`quasi_search`], prepared once so
/// repeated searches at many `t` share the circle enumeration and (A3) checks.
#[derive(Debug, Clone)]
pub struct QuasiSearch {
    families: Vec<RestrictedFamily>,
    checks: Vec<A3Check>,
    opts: ClassifyOptions,
}

impl QuasiSearch {
    /// Circles with `n ≤ n_max`. With `r = Some(R)` only circles passing
    /// [`a3_check`] at `R` are searched; `None` searches every circle.
    pub fn new(map: &SkewMap, n_max: u32, q_max: u64, r: Option<f64>) -> Result<Self> {
        let circles = periodic_circles(map.m, n_max);
        let all: Vec<Result<(RestrictedFamily, A3Check)>> = par::map_slice(&circles, |c| {
            let rf = RestrictedFamily::new(map, c)?;
            let chk = a3_check(&rf, r.unwrap_or(f64::INFINITY), T_GRID, NORM_GRID);
            Ok((rf, chk))
        });
        let mut families = Vec::new();
        let mut checks = Vec::new();
        for item in all {
            let (rf, chk) = item?;
            if r.is_none() || chk.passes {
                families.push(rf);
                checks.push(chk);
            }
        }
        Ok(QuasiSearch {
            families,
            checks,
            opts: ClassifyOptions::with_q_max(q_max),
        })
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn families(&self) -> &[RestrictedFamily] {
        &self.families
    }

    pub fn checks(&self) -> &[A3Check] {
        &self.checks
    }

    /// First circle, in `(n, k)` order, whose restricted map at `t`
    /// classifies IrrationalCandidate.
    pub fn search(&self, t: f64) -> Option<QuasiHit> {
        par::find_map_first(&self.families, |rf| {
            let res = classify(&rf.map_at(t), &self.opts);
            (res.classification == Classification::IrrationalCandidate).then(|| QuasiHit {
                circle: rf.circle.clone(),
                rotation: res,
            })
        })
    }
}

pub fn quasi_search(
    map: &SkewMap,
    t: f64,
    n_max: u32,
    q_max: u64,
    r: Option<f64>,
) -> Result<Option<QuasiHit>> {
    Ok(QuasiSearch::new(map, n_max, q_max, r)?.search(t))
}
