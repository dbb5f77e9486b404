//! Monte Carlo measure experiments on lists of circle-map families.
//!
//! `intersection_measure` estimates `μ{t : f_{1,t}, …, f_{N,t} all locked}`
//! for `N = 1, 2, …` on one shared set of parameter samples, so successive
//! estimates come from nested indicator sets. `eta_curve` estimates
//! `η(r) = sup{μP(f) : ‖f‖ ≤ r}` from below by random families, and
//! `renormalization_check` looks for a family whose locked set occupies less
//! than an `η̂` fraction of a parameter interval.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::circle_map::{CircleFamily, FamilyHarmonic, ParamFamily};
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::rotation::{classify, Classification, ClassifyOptions};
use crate::trig::{TPoly, NORM_GRID};

/// What to do when a family list fails the hypothesis proxies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HypothesisPolicy {
    /// Fail with `HypothesisViolation` if any family has norm ≥ 1.
    Strict,
    /// Run anyway and mark the result non-conforming.
    Record,
}

/// Hypothesis proxies for a finite family list: (A1) windings strictly
/// increasing, (A2) every family norm below 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub windings: Vec<u32>,
    pub norms: Vec<f64>,
    pub a1: bool,
    pub a2: Vec<bool>,
    pub conforming: bool,
}

impl Hypotheses {
    pub fn check<F: ParamFamily>(families: &[F], grid: usize) -> Result<Self> {
        let windings: Vec<u32> = families.iter().map(|f| f.winding()).collect();
        let norms = par::map_slice(families, |f| f.family_norm(grid).map(|n| n.value))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        let a1 = windings.windows(2).all(|w| w[0] < w[1]);
        let a2: Vec<bool> = norms.iter().map(|&n| n < 1.0).collect();
        let conforming = a1 && a2.iter().all(|&b| b);
        Ok(Hypotheses {
            windings,
            norms,
            a1,
            a2,
            conforming,
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }

    fn enforce(&self, families_labels: &[String]) -> Result<()> {
        if let Some(i) = self.a2.iter().position(|&ok| !ok) {
            return Err(Error::HypothesisViolation(format!(
                "family {} ({}) has norm {:.6e} ≥ 1",
                i + 1,
                families_labels[i],
                self.norms[i]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionMeasure {
    pub samples: usize,
    pub seed: u64,
    pub q_max: u64,
    /// `μ̂_N` with Unresolved samples counted as not locked.
    pub optimistic: Vec<f64>,
    /// `μ̂_N` with Unresolved samples counted as locked.
    pub pessimistic: Vec<f64>,
    /// Binomial standard error of each optimistic `μ̂_N`.
    pub stderr: Vec<f64>,
    /// Set when the last half of the list removes no sample from a
    /// nonempty intersection: the signature of a window common to all maps.
    pub common_window: bool,
    pub hypotheses: Hypotheses,
}

impl IntersectionMeasure {
    pub fn is_nonincreasing(&self) -> bool {
        let ok = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
        ok(&self.optimistic) && ok(&self.pessimistic)
    }
}

/// Locked/unresolved indicators for `family` at `ts`, computed only where
/// `active` is set; inactive entries are `(false, false)`.
fn indicators<F: ParamFamily>(
    family: &F,
    ts: &[f64],
    active: &[bool],
    opts: &ClassifyOptions,
) -> Vec<(bool, bool)> {
    let idx: Vec<usize> = (0..ts.len()).collect();
    par::map_slice(&idx, |&i| {
        if !active[i] {
            return (false, false);
        }
        match classify(&family.map_at(ts[i]), opts).classification {
            Classification::Locked { .. } => (true, false),
            Classification::Unresolved => (false, true),
            Classification::IrrationalCandidate => (false, false),
        }
    })
}

/// `μ̂_N` for `N = 1..=families.len()` on `samples` common parameter samples.
///
/// Families are evaluated in list order against the same samples and the
/// indicator vectors are combined by logical and, so a sample that has left
/// the pessimistic set is never classified again.
pub fn intersection_measure<F: ParamFamily>(
    families: &[F],
    samples: usize,
    q_max: u64,
    seed: u64,
    policy: HypothesisPolicy,
) -> Result<IntersectionMeasure> {
    if families.is_empty() || samples == 0 {
        return Err(Error::InsufficientData(
            "need at least one family and one sample".into(),
        ));
    }
    let hypotheses = Hypotheses::check(families, NORM_GRID)?;
    if policy == HypothesisPolicy::Strict {
        let labels: Vec<String> = families.iter().map(|f| f.label().to_string()).collect();
        hypotheses.enforce(&labels)?;
    }
    let ts = rng::uniform_samples(seed, samples, 0.0, 1.0);
    let opts = ClassifyOptions::with_q_max(q_max);
    let n = samples as f64;
    let mut opt = vec![true; samples];
    let mut pess = vec![true; samples];
    let mut optimistic = Vec::with_capacity(families.len());
    let mut pessimistic = Vec::with_capacity(families.len());
    let mut stderr = Vec::with_capacity(families.len());
    for f in families {
        let ind = indicators(f, &ts, &pess, &opts);
        for (i, &(locked, unresolved)) in ind.iter().enumerate() {
            opt[i] = opt[i] && locked;
            pess[i] = pess[i] && (locked || unresolved);
        }
        let mo = opt.iter().filter(|&&b| b).count() as f64 / n;
        optimistic.push(mo);
        pessimistic.push(pess.iter().filter(|&&b| b).count() as f64 / n);
        stderr.push((mo * (1.0 - mo) / n).sqrt());
    }
    let len = optimistic.len();
    let half = len / 2;
    let last = optimistic[len - 1];
    let common_window = len >= 2 && last > 0.0 && optimistic[half.max(1) - 1] == last;
    Ok(IntersectionMeasure {
        samples,
        seed,
        q_max,
        optimistic,
        pessimistic,
        stderr,
        common_window,
        hypotheses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub r: f64,
    /// Largest locked fraction among the families drawn at this `r`.
    pub max_observed: f64,
    /// Running maximum over `r' ≤ r`.
    pub eta: f64,
    pub stderr: f64,
    pub families: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCurve {
    pub q_max: u64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<EtaRow>,
}

impl EtaCurve {
    /// `η̂` at the smallest grid radius `≥ r`.
    pub fn eta_at(&self, r: f64) -> Result<f64> {
        self.rows
            .iter()
            .find(|row| row.r >= r)
            .map(|row| row.eta)
            .ok_or_else(|| {
                Error::InsufficientData(format!("η̂ curve does not reach r = {r}"))
            })
    }
}

/// Maximum harmonic index of the random families.
pub const RANDOM_MAX_J: u32 = 3;

/// A random winding-1 family with harmonics `j = 1..=3` and degree-1
/// coefficient polynomials, scaled so its family norm is `r`.
///
/// When the scaled family would not be a valid family (fold or t-regularity
/// failure), the scale is reduced by bisection to the largest valid value, so
/// the returned norm may fall short of `r`.
pub fn random_family(r: f64, seed: u64, id: u64) -> Result<CircleFamily> {
    if r <= 0.0 {
        return Ok(CircleFamily::rigid(1));
    }
    let mut g = rng::stream(seed, id);
    let mut coef = || TPoly(vec![g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)]);
    let harmonics: Vec<FamilyHarmonic> = (1..=RANDOM_MAX_J)
        .map(|j| FamilyHarmonic {
            j,
            a: coef(),
            b: coef(),
        })
        .collect();
    let constant = coef();
    let label = format!("random(r={r}, seed={seed}, id={id})");
    // a unit-size family can be degenerate; start from a certainly valid scale
    let base = CircleFamily::new(1, constant.scaled(1e-3), scale(&harmonics, 1e-3), &label)?;
    let norm = base.family_norm(NORM_GRID)?.value;
    let target = r / norm * 1e-3;
    let build = |s: f64| CircleFamily::new(1, constant.scaled(s), scale(&harmonics, s), &label);
    if let Ok(f) = build(target) {
        return Ok(f);
    }
    let (mut lo, mut hi) = (1e-3, target);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if build(mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(lo)
}

fn scale(hs: &[FamilyHarmonic], s: f64) -> Vec<FamilyHarmonic> {
    hs.iter()
        .map(|h| FamilyHarmonic {
            j: h.j,
            a: h.a.scaled(s),
            b: h.b.scaled(s),
        })
        .collect()
}

/// Locked fraction of `family` over `ts`.
pub fn locked_fraction<F: ParamFamily + ?Sized>(family: &F, ts: &[f64], q_max: u64) -> f64 {
    let opts = ClassifyOptions::with_q_max(q_max);
    let locked = par::map_slice(ts, |&t| classify(&family.map_at(t), &opts).classification.is_locked());
    locked.iter().filter(|&&b| b).count() as f64 / ts.len().max(1) as f64
}

/// Empirical lower envelope of `η(r)` on `r_grid` (sorted ascending).
///
/// Families drawn at a smaller radius also belong to every larger class, so
/// the reported `eta` is the running maximum of the per-radius maxima.
pub fn eta_curve(
    r_grid: &[f64],
    families_per_r: usize,
    samples: usize,
    q_max: u64,
    seed: u64,
) -> Result<EtaCurve> {
    if r_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("r grid must be ascending".into()));
    }
    let ts = rng::uniform_samples(seed, samples.max(1), 0.0, 1.0);
    let n = ts.len() as f64;
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut running = 0.0f64;
    for (ri, &r) in r_grid.iter().enumerate() {
        let mut best = 0.0f64;
        let count = if r <= 0.0 { 1 } else { families_per_r.max(1) };
        for k in 0..count {
            let f = random_family(r, seed, ((ri as u64) << 20) + k as u64)?;
            best = best.max(locked_fraction(&f, &ts, q_max));
        }
        running = running.max(best);
        rows.push(EtaRow {
            r,
            max_observed: best,
            eta: running,
            stderr: (best * (1.0 - best) / n).sqrt(),
            families: count,
        });
    }
    Ok(EtaCurve {
        q_max,
        samples: ts.len(),
        seed,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RenormOutcome {
    /// First list position (1-based) with `μ̂(P_n ∩ J)/μ(J) < η̂`.
    Found { index: usize, ratio: f64 },
    NotFound { best_index: usize, best_ratio: f64 },
}

/// First family whose locked parameters fill less than an `eta` fraction of
/// `J = [a, b]`. A ratio of exactly 0 always counts as found.
pub fn renormalization_check<F: ParamFamily>(
    families: &[F],
    j: (f64, f64),
    eta: f64,
    samples: usize,
    q_max: u64,
    seed: u64,
) -> Result<RenormOutcome> {
    let (a, b) = j;
    if !(b > a) || families.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need a nonempty family list and an interval with positive length, got [{a}, {b}]"
        )));
    }
    let ts = rng::uniform_samples(seed, samples.max(1), a, b);
    let mut best = (0usize, f64::INFINITY);
    for (i, f) in families.iter().enumerate() {
        let ratio = locked_fraction(f, &ts, q_max);
        if ratio < eta || ratio == 0.0 {
            return Ok(RenormOutcome::Found {
                index: i + 1,
                ratio,
            });
        }
        if ratio < best.1 {
            best = (i + 1, ratio);
        }
    }
    Ok(RenormOutcome::NotFound {
        best_index: best.0,
        best_ratio: best.1,
    })
}

/// Git-style content hash: SHA-256 of `"blob {len}\0"` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub name: String,
    pub file: String,
    pub rows: usize,
}

/// Record of one experiment run. Everything except `wall_clock_s` is a
/// function of the inputs and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub tool_version: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    /// Content hash per input definition file.
    pub input_hashes: BTreeMap<String, String>,
    pub tables: Vec<ReportTable>,
    pub hypotheses: Option<Hypotheses>,
    pub conforming: bool,
    pub notes: Vec<String>,
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            tables: Vec::new(),
            hypotheses: None,
            conforming: true,
            notes: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn hash_input(&mut self, name: &str, bytes: &[u8]) {
        self.input_hashes.insert(name.to_string(), content_hash(bytes));
    }

    pub fn table(&mut self, name: &str, file: &str, rows: usize) {
        self.tables.push(ReportTable {
            name: name.to_string(),
            file: file.to_string(),
            rows,
        });
    }

    pub fn with_hypotheses(&mut self, h: &Hypotheses) {
        self.conforming &= h.conforming;
        self.hypotheses = Some(h.clone());
    }
}
