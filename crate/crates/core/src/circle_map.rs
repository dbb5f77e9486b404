//! Lifts of circle diffeomorphisms and one-parameter families of them.
//!
//! Every concrete map is a [`ComposedCircleMap`]: an ordered list of stages
//! `y ↦ y + c_i + p_i(y)` with trigonometric-polynomial periodic parts. A
//! [`CircleFamily`] evaluates to a single stage with `c = N·t`; the restricted
//! maps of skew products evaluate to `n` stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::{c3_norm_with_grid, Harmonic, Jet, TPoly, TrigPoly, NORM_GRID};

/// Number of parameter nodes used when a supremum over `t ∈ [0,1]` is sampled.
pub const T_GRID: usize = 33;

/// A real lift `F̄` with `F̄(x+1) = F̄(x) + 1`.
pub trait CircleLift: Sync {
    fn lift(&self, x: f64) -> f64;
}

/// One stage `y ↦ y + shift + periodic(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub shift: f64,
    pub periodic: TrigPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposedCircleMap {
    stages: Vec<Stage>,
}

impl ComposedCircleMap {
    pub fn new(stages: Vec<Stage>) -> Self {
        ComposedCircleMap { stages }
    }

    pub fn single(shift: f64, periodic: TrigPoly) -> Self {
        ComposedCircleMap {
            stages: vec![Stage { shift, periodic }],
        }
    }

    /// Rigid rotation by `alpha`.
    pub fn rotation(alpha: f64) -> Self {
        Self::single(alpha, TrigPoly::zero())
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn total_shift(&self) -> f64 {
        self.stages.iter().map(|s| s.shift).sum()
    }

    /// Lift value and its first three derivatives, propagated stage by stage
    /// with the order-3 chain rule.
    pub fn jet(&self, y: f64) -> Jet {
        let mut v = [y, 1.0, 0.0, 0.0];
        for st in &self.stages {
            let p = st.periodic.jet(v[0]);
            let d1 = 1.0 + p[1];
            v = [
                v[0] + st.shift + p[0],
                d1 * v[1],
                p[2] * v[1] * v[1] + d1 * v[2],
                p[3] * v[1] * v[1] * v[1] + 3.0 * p[2] * v[1] * v[2] + d1 * v[3],
            ];
        }
        v
    }

    /// Checks `1 + p_i' > 0` for every stage, certified by coefficient bound
    /// or by a grid minimum with Lipschitz margin. Returns the offending stage.
    pub fn check_diffeo(&self, grid: usize) -> std::result::Result<(), usize> {
        for (i, st) in self.stages.iter().enumerate() {
            if !is_diffeo_part(&st.periodic, grid) {
                return Err(i);
            }
        }
        Ok(())
    }

    /// `‖L − id − Σc_i‖_{C³}`: the C³ norm of the periodic part of the whole lift.
    ///
    /// A single stage is delegated to [`crate::trig::c3_norm`]. For longer
    /// compositions orders 0..=2 get the Lipschitz margin `h/2 · sup|G^{(k+1)}|`
    /// from the grid, and order 3 gets the largest jump of `G'''` between nodes.
    pub fn periodic_part_c3(&self, grid: usize) -> f64 {
        if let [st] = self.stages.as_slice() {
            return c3_norm_with_grid(&st.periodic, grid);
        }
        let max_j: u32 = self
            .stages
            .iter()
            .map(|s| s.periodic.max_frequency())
            .sum();
        let grid = grid.max(8 * max_j as usize).max(2);
        let h = 1.0 / grid as f64;
        let shift = self.total_shift();
        let mut sup = [0.0f64; 4];
        let mut jump3 = 0.0f64;
        let mut prev3: Option<f64> = None;
        let mut first3 = 0.0;
        for i in 0..grid {
            let y = i as f64 * h;
            let j = self.jet(y);
            let g = [j[0] - y - shift, j[1] - 1.0, j[2], j[3]];
            for k in 0..4 {
                sup[k] = sup[k].max(g[k].abs());
            }
            if let Some(p) = prev3 {
                jump3 = jump3.max((g[3] - p).abs());
            } else {
                first3 = g[3];
            }
            prev3 = Some(g[3]);
        }
        if let Some(p) = prev3 {
            jump3 = jump3.max((first3 - p).abs());
        }
        let with_margin = [
            sup[0] + 0.5 * h * sup[1],
            sup[1] + 0.5 * h * sup[2],
            sup[2] + 0.5 * h * sup[3],
            sup[3] + 0.5 * jump3,
        ];
        with_margin.into_iter().fold(0.0, f64::max)
    }
}

impl CircleLift for ComposedCircleMap {
    #[inline]
    fn lift(&self, y: f64) -> f64 {
        let mut y = y;
        for st in &self.stages {
            y = y + st.shift + st.periodic.eval(y);
        }
        y
    }
}

/// `1 + p' > 0` everywhere, certified.
fn is_diffeo_part(p: &TrigPoly, grid: usize) -> bool {
    if p.derivative_bound(1) < 1.0 {
        return true;
    }
    let grid = grid.max(4 * p.max_frequency() as usize);
    let h = 1.0 / grid as f64;
    let min = (0..grid)
        .map(|i| 1.0 + p.deriv1(i as f64 * h))
        .fold(f64::INFINITY, f64::min);
    min - 0.5 * h * p.derivative_bound(2) > 0.0
}

/// A lift iterate kept as integer part plus fractional part in `[0,1)`, so
/// long orbits do not lose precision to a growing magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftPoint {
    pub whole: i64,
    pub frac: f64,
}

impl LiftPoint {
    pub fn new(x: f64) -> Self {
        let fl = x.floor();
        LiftPoint {
            whole: fl as i64,
            frac: x - fl,
        }
    }

    pub fn value(self) -> f64 {
        self.whole as f64 + self.frac
    }

    #[inline]
    pub fn step<M: CircleLift + ?Sized>(self, map: &M) -> Self {
        let y = map.lift(self.frac);
        let fl = y.floor();
        LiftPoint {
            whole: self.whole + fl as i64,
            frac: y - fl,
        }
    }

    pub fn iterate<M: CircleLift + ?Sized>(self, map: &M, n: u64) -> Self {
        (0..n).fold(self, |p, _| p.step(map))
    }
}

/// `n`-fold composition of the lift, starting at `theta`.
pub fn iterate_lift<M: CircleLift + ?Sized>(map: &M, theta: f64, n: u64) -> f64 {
    LiftPoint::new(theta).iterate(map, n).value()
}

/// `max(sup_t ‖g_t‖_{C³}, sup_{t,θ} |∂_t g_t|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyNorm {
    pub c3_g: f64,
    pub c0_dt: f64,
    pub value: f64,
}

impl FamilyNorm {
    pub fn new(c3_g: f64, c0_dt: f64) -> Self {
        FamilyNorm {
            c3_g,
            c0_dt,
            value: c3_g.max(c0_dt),
        }
    }
}

/// A one-parameter family `t ↦ f_t` of circle diffeomorphisms in the form
/// `θ + N·t + g_t(θ)`.
pub trait ParamFamily: Sync {
    /// The t-winding number `N`.
    fn winding(&self) -> u32;

    fn label(&self) -> &str;

    fn map_at(&self, t: f64) -> ComposedCircleMap;

    /// `∂_t` of the lift at `(t, θ)`.
    fn lift_dt(&self, t: f64, theta: f64) -> f64;

    /// True when the periodic parts do not depend on `t`; then
    /// `f_{t+1} = f_t + N` and parameter space wraps.
    fn is_autonomous(&self) -> bool;

    /// Family norm sampled on a `T_GRID` parameter grid and a `grid`-point
    /// θ grid.
    fn family_norm(&self, grid: usize) -> Result<FamilyNorm> {
        sampled_family_norm(self, grid)
    }
}

fn t_nodes() -> impl Iterator<Item = f64> {
    (0..T_GRID).map(|i| i as f64 / (T_GRID - 1) as f64)
}

/// Generic family norm from lift jets and `lift_dt` on grids.
pub fn sampled_family_norm<F: ParamFamily + ?Sized>(family: &F, grid: usize) -> Result<FamilyNorm> {
    let n = f64::from(family.winding());
    let grid = grid.max(2);
    let mut c3 = 0.0f64;
    let mut dt = 0.0f64;
    for t in t_nodes() {
        let map = family.map_at(t);
        if let Err(stage) = map.check_diffeo(grid) {
            return Err(Error::DegenerateFamily(format!(
                "{}: stage {stage} is not a diffeomorphism at t = {t}",
                family.label()
            )));
        }
        c3 = c3.max(map.periodic_part_c3(grid));
        for i in 0..grid {
            let theta = i as f64 / grid as f64;
            dt = dt.max((family.lift_dt(t, theta) - n).abs());
        }
    }
    Ok(FamilyNorm::new(c3, dt))
}

/// `family_norm` for any family; see [`ParamFamily::family_norm`].
pub fn family_norm<F: ParamFamily + ?Sized>(family: &F, grid: usize) -> Result<FamilyNorm> {
    family.family_norm(grid)
}

/// One harmonic of `g_t` with polynomial-in-`t` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyHarmonic {
    pub j: u32,
    pub a: TPoly,
    pub b: TPoly,
}

/// `f_t(θ) = θ + N·t + g_t(θ)` with `g_t` a trigonometric polynomial in `θ`
/// whose coefficients are polynomials in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFamily {
    winding: u32,
    constant: TPoly,
    harmonics: Vec<FamilyHarmonic>,
    label: String,
}

impl CircleFamily {
    /// Validates the diffeomorphism condition `1 + ∂_θ g_t > 0` and
    /// t-regularity `sup|∂_t g_t| < N` over `t ∈ [0,1]`.
    pub fn new(
        winding: u32,
        constant: TPoly,
        harmonics: Vec<FamilyHarmonic>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if winding == 0 {
            return Err(Error::InvalidInput(format!("{label}: winding must be ≥ 1")));
        }
        if let Some(h) = harmonics.iter().find(|h| h.j == 0) {
            return Err(Error::InvalidInput(format!(
                "{label}: harmonic index j = {} must be ≥ 1",
                h.j
            )));
        }
        let fam = CircleFamily {
            winding,
            constant,
            harmonics,
            label,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// `θ ↦ θ + t + amplitude·sin(2πθ)`.
    pub fn arnold(amplitude: f64) -> Result<Self> {
        CircleFamily::new(
            1,
            TPoly::default(),
            vec![FamilyHarmonic {
                j: 1,
                a: TPoly::default(),
                b: TPoly::constant(amplitude),
            }],
            format!("arnold(amplitude={amplitude})"),
        )
    }

    /// `θ ↦ θ + N·t`.
    pub fn rigid(winding: u32) -> Self {
        CircleFamily {
            winding: winding.max(1),
            constant: TPoly::default(),
            harmonics: Vec::new(),
            label: format!("rigid(N={})", winding.max(1)),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn constant_term(&self) -> &TPoly {
        &self.constant
    }

    pub fn harmonics(&self) -> &[FamilyHarmonic] {
        &self.harmonics
    }

    /// `g_t` as a trigonometric polynomial.
    pub fn periodic_part(&self, t: f64) -> TrigPoly {
        TrigPoly::new(
            self.constant.eval(t),
            self.harmonics.iter().map(|h| Harmonic {
                j: h.j,
                a: h.a.eval(t),
                b: h.b.eval(t),
            }),
        )
    }

    /// `∂_t g_t` as a trigonometric polynomial.
    pub fn periodic_part_dt(&self, t: f64) -> TrigPoly {
        TrigPoly::new(
            self.constant.derivative().eval(t),
            self.harmonics.iter().map(|h| Harmonic {
                j: h.j,
                a: h.a.derivative().eval(t),
                b: h.b.derivative().eval(t),
            }),
        )
    }

    /// `θ + N·t + g_t(θ)`, not reduced mod 1.
    pub fn eval_lift(&self, t: f64, theta: f64) -> f64 {
        self.map_at(t).lift(theta)
    }

    /// Scale every coefficient of `g` by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        CircleFamily::new(
            self.winding,
            self.constant.scaled(s),
            self.harmonics
                .iter()
                .map(|h| FamilyHarmonic {
                    j: h.j,
                    a: h.a.scaled(s),
                    b: h.b.scaled(s),
                })
                .collect(),
            self.label.clone(),
        )
    }

    /// Bound on `sup_{t∈[0,1]} sup_θ |∂_θ^k g_t|` from absolute coefficient sums.
    pub fn uniform_derivative_bound(&self, k: u32) -> f64 {
        let base = if k == 0 { self.constant.abs_bound() } else { 0.0 };
        base + self
            .harmonics
            .iter()
            .map(|h| {
                (std::f64::consts::TAU * h.j as f64).powi(k as i32)
                    * (h.a.abs_bound() + h.b.abs_bound())
            })
            .sum::<f64>()
    }

    /// Same bound for `∂_t ∂_θ^k g_t`.
    fn uniform_dt_bound(&self, k: u32) -> f64 {
        let base = if k == 0 {
            self.constant.derivative().abs_bound()
        } else {
            0.0
        };
        base + self
            .harmonics
            .iter()
            .map(|h| {
                (std::f64::consts::TAU * h.j as f64).powi(k as i32)
                    * (h.a.derivative().abs_bound() + h.b.derivative().abs_bound())
            })
            .sum::<f64>()
    }

    fn max_frequency(&self) -> u32 {
        self.harmonics.iter().map(|h| h.j).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        let n = f64::from(self.winding);
        // diffeomorphism
        if self.uniform_derivative_bound(1) >= 1.0 {
            let dt_margin = 0.5 / (T_GRID - 1) as f64 * self.uniform_dt_bound(1);
            for t in self.t_check_nodes() {
                let g = self.periodic_part(t);
                let grid = NORM_GRID.max(4 * self.max_frequency() as usize);
                let h = 1.0 / grid as f64;
                let min = (0..grid)
                    .map(|i| 1.0 + g.deriv1(i as f64 * h))
                    .fold(f64::INFINITY, f64::min);
                let margin = 0.5 * h * g.derivative_bound(2)
                    + if self.is_autonomous() { 0.0 } else { dt_margin };
                if min - margin <= 0.0 {
                    return Err(Error::DegenerateFamily(format!(
                        "{}: 1 + ∂θ g_t ≤ {:.3e} near t = {t}",
                        self.label,
                        min - margin
                    )));
                }
            }
        }
        // t-regularity
        if !self.is_autonomous() && self.uniform_dt_bound(0) >= n {
            let ddt_bound = {
                let dd = |p: &TPoly| p.derivative().derivative().abs_bound();
                dd(&self.constant)
                    + self
                        .harmonics
                        .iter()
                        .map(|h| dd(&h.a) + dd(&h.b))
                        .sum::<f64>()
            };
            let dt_margin = 0.5 / (T_GRID - 1) as f64 * ddt_bound;
            for t in self.t_check_nodes() {
                let sup = self.periodic_part_dt(t).sup_norms(NORM_GRID)[0];
                if sup + dt_margin >= n {
                    return Err(Error::DegenerateFamily(format!(
                        "{}: sup|∂t g_t| = {sup:.3e} is not below the winding {n} near t = {t}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    fn t_check_nodes(&self) -> Vec<f64> {
        if self.is_autonomous() {
            vec![0.0]
        } else {
            t_nodes().collect()
        }
    }
}

impl ParamFamily for CircleFamily {
    fn winding(&self) -> u32 {
        self.winding
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn map_at(&self, t: f64) -> ComposedCircleMap {
        ComposedCircleMap::single(f64::from(self.winding) * t, self.periodic_part(t))
    }

    fn lift_dt(&self, t: f64, theta: f64) -> f64 {
        f64::from(self.winding) + self.periodic_part_dt(t).eval(theta)
    }

    fn is_autonomous(&self) -> bool {
        self.constant.is_constant()
            && self
                .harmonics
                .iter()
                .all(|h| h.a.is_constant() && h.b.is_constant())
    }

    /// Exact per-`t` C³ norms via [`crate::trig::c3_norm`]; the `t` supremum
    /// is sampled on `T_GRID` nodes unless the family is autonomous.
    fn family_norm(&self, grid: usize) -> Result<FamilyNorm> {
        let nodes = self.t_check_nodes();
        let mut c3 = 0.0f64;
        let mut dt = 0.0f64;
        for &t in &nodes {
            let g = self.periodic_part(t);
            if !is_diffeo_part(&g, grid) {
                return Err(Error::DegenerateFamily(format!(
                    "{}: 1 + ∂θ g_t ≤ 0 at t = {t}",
                    self.label
                )));
            }
            c3 = c3.max(c3_norm_with_grid(&g, grid));
            if !self.is_autonomous() {
                dt = dt.max(self.periodic_part_dt(t).sup_norms(grid)[0]);
            }
        }
        Ok(FamilyNorm::new(c3, dt))
    }
}

/// `s ↦ f_{a + s(b−a)}`: a family reparameterized over the subinterval `[a,b]`.
#[derive(Debug, Clone)]
pub struct Renormalized<'a, F: ParamFamily> {
    inner: &'a F,
    a: f64,
    b: f64,
    label: String,
}

impl<'a, F: ParamFamily> Renormalized<'a, F> {
    pub fn new(inner: &'a F, a: f64, b: f64) -> Self {
        Renormalized {
            inner,
            a,
            b,
            label: format!("{} on [{a}, {b}]", inner.label()),
        }
    }

    pub fn to_outer(&self, s: f64) -> f64 {
        self.a + s * (self.b - self.a)
    }
}

impl<F: ParamFamily> ParamFamily for Renormalized<'_, F> {
    /// Nominal winding of the underlying family.
    fn winding(&self) -> u32 {
        self.inner.winding()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn map_at(&self, s: f64) -> ComposedCircleMap {
        self.inner.map_at(self.to_outer(s))
    }

    fn lift_dt(&self, s: f64, theta: f64) -> f64 {
        (self.b - self.a) * self.inner.lift_dt(self.to_outer(s), theta)
    }

    fn is_autonomous(&self) -> bool {
        false
    }
}
