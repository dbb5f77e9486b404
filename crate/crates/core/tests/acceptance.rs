//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are reported like the others but
//! do not fail the run.

use std::time::{Duration, Instant};

use circlock_core::circle_map::{CircleLift, ComposedCircleMap, ParamFamily, Stage};
use circlock_core::experiments::{eta_curve, intersection_measure, HypothesisPolicy};
use circlock_core::rotation::rho_estimate;
use circlock_core::skew::{periodic_circles, restricted_family, skew_apply, QuasiSearch, SkewHarmonic, SkewMap};
use circlock_core::tables::{intersection_table, measure_table, windows_table};
use circlock_core::trig::{Harmonic, TPoly, TrigPoly};
use circlock_core::windows::{enumerate_windows, locked_measure, window_boundaries};
use circlock_core::{dio_measure, rng, CircleFamily, DioParams, RestrictedFamily};
use rand::Rng;

const SEED: u64 = 20_240_601;

/// Criterion 6 requires decay of the intersection measure, but the fiber map
/// of the prescribed skew product does not depend on `x`, so every restricted
/// map is an iterate of one Arnold map and they share their locked set.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

// 1. |ρ̂ − α| ≤ 1/n for the golden rotation, n = 10⁴; < 1 s
fn c1() -> Outcome {
    let alpha = golden();
    let n = 10_000;
    let r = rho_estimate(&ComposedCircleMap::rotation(alpha), 0.0, n);
    let err = (r.estimate - alpha).abs();
    outcome(
        err <= 1.0 / n as f64 && err <= 1e-4 && r.error_bound == 1e-4,
        format!("|rho - alpha| = {err:.3e}, bound {:.1e}", r.error_bound),
    )
}

// 2. Arnold δ̂ = 0.1: the ρ = 0 window is [−0.1, 0.1] within 1e-6; < 5 s
fn c2() -> Outcome {
    let f = CircleFamily::arnold(0.1).unwrap();
    let w = window_boundaries(&f, 0, 1, (-0.5, 0.5), 1e-9).unwrap();
    let e = (w.t_lo + 0.1).abs().max((w.t_hi - 0.1).abs());
    let wrapped = enumerate_windows(&f, 1, 1e-9)
        .into_iter()
        .find(|w| w.q == 1)
        .unwrap();
    let e2 = (wrapped.t_lo + 0.1).abs().max((wrapped.t_hi - 0.1).abs());
    outcome(
        e <= 1e-6 && e2 <= 1e-6,
        format!(
            "window [{:.9}, {:.9}], enumerated [{:.9}, {:.9}], max error {:.2e}",
            w.t_lo,
            w.t_hi,
            wrapped.t_lo,
            wrapped.t_hi,
            e.max(e2)
        ),
    )
}

// 3. Certified lower measure nondecreasing in δ within 2·tol; μ̂(0.02) <
//    μ̂(0.15) beyond 3σ; 10⁴ samples, q_max 30; < 5 min
fn c3() -> Outcome {
    let tol = 1e-7;
    let ms: Vec<_> = [0.02, 0.05, 0.1, 0.15]
        .iter()
        .map(|&d| locked_measure(&CircleFamily::arnold(d).unwrap(), 30, 10_000, tol, SEED))
        .collect();
    let monotone = ms.windows(2).all(|w| w[1].lower >= w[0].lower - 2.0 * tol);
    let (a, b) = (&ms[0], &ms[3]);
    let sigma = (a.mc_stderr.powi(2) + b.mc_stderr.powi(2)).sqrt();
    let separated = b.mc - a.mc > 3.0 * sigma;
    let lows: Vec<String> = ms.iter().map(|m| format!("{:.5}", m.lower)).collect();
    let mcs: Vec<String> = ms.iter().map(|m| format!("{:.4}", m.mc)).collect();
    outcome(
        monotone && separated,
        format!("lower [{}], mc [{}], 3σ = {:.4}", lows.join(", "), mcs.join(", "), 3.0 * sigma),
    )
}

// 4. dio_measure(0.1, 10³, 10⁵) ≥ 1 − 0.1ζ(3)/π − grid_error; < 30 s
fn c4() -> Outcome {
    // ζ(3) by direct summation with the integral tail bound
    let n = 100_000u64;
    let zeta3 = (1..=n).map(|k| (k as f64).powi(-3)).sum::<f64>() + 0.5 / (n as f64).powi(2);
    let oracle = 1.0 - 0.1 * zeta3 / std::f64::consts::PI;
    let m = dio_measure(&DioParams::new(0.1, 1000, 100_000).unwrap());
    outcome(
        m.estimate >= oracle - m.grid_error && (m.analytic_lower - oracle).abs() < 1e-12,
        format!(
            "estimate {:.6}, bound {:.6}, grid error {:.2e}",
            m.estimate, oracle, m.grid_error
        ),
    )
}

fn restricted_list(map: &SkewMap, n_max: u32) -> Vec<RestrictedFamily> {
    let circles = periodic_circles(map.m(), n_max);
    (1..=n_max)
        .map(|n| {
            let c = circles.iter().find(|c| c.n == n).unwrap();
            restricted_family(map, c).unwrap()
        })
        .collect()
}

// 5. Restricted lifts match torus iteration to 1e-12 on 10³ triples; winding
//    identity within 0.05; < 30 s
fn c5() -> Outcome {
    let map = SkewMap::arnold_fiber(2, 0.05).unwrap();
    let circles = periodic_circles(2, 6);
    let fams: Vec<RestrictedFamily> = circles
        .iter()
        .map(|c| restricted_family(&map, c).unwrap())
        .collect();
    let mut g = rng::stream(SEED, 5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let i = g.random_range(0..fams.len());
        let (t, theta): (f64, f64) = (g.random(), g.random());
        let c = &circles[i];
        let mut p = (c.x0_f64(), theta);
        for _ in 0..c.n {
            p = skew_apply(&map, t, p);
        }
        let l = fams[i].map_at(t).lift(theta);
        worst = worst.max(circle_dist(p.1, l)).max(circle_dist(p.0, c.x0_f64()));
    }
    // ∂t lift by central differences on a 32 × 32 grid
    let h = 1e-6;
    let mut wind = 0.0f64;
    for f in &fams {
        let n = f64::from(f.winding());
        let mut sum = 0.0;
        for a in 0..32 {
            let t = (a as f64 + 0.5) / 32.0;
            for b in 0..32 {
                let th = b as f64 / 32.0;
                sum += (f.map_at(t + h).lift(th) - f.map_at(t - h).lift(th)) / (2.0 * h);
            }
        }
        wind = wind.max((sum / 1024.0 / n - 1.0).abs());
    }
    outcome(
        worst <= 1e-12 && wind <= 0.05,
        format!(
            "{} circles, max torus mismatch {worst:.2e}, max |mean ∂t/n − 1| = {wind:.4}",
            circles.len()
        ),
    )
}

// 6. μ̂_N nonincreasing and μ̂_6 ≤ μ̂_1 η̂⁵ + 3σ; 10⁴ samples; < 10 min
fn c6() -> Outcome {
    let map = SkewMap::arnold_fiber(2, 0.05).unwrap();
    let fams = restricted_list(&map, 6);
    let m = intersection_measure(&fams, 10_000, 30, SEED, HypothesisPolicy::Record).unwrap();
    let r = m.hypotheses.max_norm();
    let curve = eta_curve(&[r], 8, 2_000, 30, SEED).unwrap();
    let eta = curve.eta_at(r).unwrap();
    let (m1, m6) = (m.optimistic[0], m.optimistic[5]);
    let sigma = (m.stderr[5].powi(2) + (eta.powi(5) * m.stderr[0]).powi(2)).sqrt();
    let decay = m6 <= m1 * eta.powi(5) + 3.0 * sigma;
    let mus: Vec<String> = m.optimistic.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        m.is_nonincreasing() && decay,
        format!(
            "mu_N [{}], norm {r:.3}, eta {eta:.4}, bound {:.4}, nonincreasing {}, common window {}, conforming {}",
            mus.join(", "),
            m1 * eta.powi(5) + 3.0 * sigma,
            m.is_nonincreasing(),
            m.common_window,
            m.hypotheses.conforming
        ),
    )
}

/// Not a numbered criterion: the same decay check for a fiber map that
/// depends on `x`, so restricted maps over different circles differ.
fn coupled_decay() -> String {
    let map = SkewMap::new(
        2,
        TPoly::default(),
        vec![SkewHarmonic {
            jx: 1,
            jy: 1,
            a: TPoly::default(),
            b: TPoly::constant(0.05),
        }],
        "coupled",
    )
    .unwrap();
    let fams = restricted_list(&map, 6);
    let m = intersection_measure(&fams, 2_000, 30, SEED, HypothesisPolicy::Record).unwrap();
    let mus: Vec<String> = m.optimistic.iter().map(|v| format!("{v:.4}")).collect();
    format!(
        "coupled fiber δ sin(2π(x+y)), 2000 samples: mu_N [{}], nonincreasing {}",
        mus.join(", "),
        m.is_nonincreasing()
    )
}

// 7. quasi_search hit fraction over 200 samples nondecreasing in n_max ∈
//    {2, 4, 6} within 3σ; < 10 min
fn c7() -> Outcome {
    let map = SkewMap::arnold_fiber(2, 0.05).unwrap();
    let ts = rng::uniform_samples(SEED, 200, 0.0, 1.0);
    let fracs: Vec<f64> = [2u32, 4, 6]
        .iter()
        .map(|&n| {
            let qs = QuasiSearch::new(&map, n, 30, None).unwrap();
            ts.iter().filter(|&&t| qs.search(t).is_some()).count() as f64 / ts.len() as f64
        })
        .collect();
    let se = |f: f64| (f * (1.0 - f) / 200.0).sqrt();
    let ok = fracs
        .windows(2)
        .all(|w| w[1] >= w[0] - 3.0 * (se(w[0]).powi(2) + se(w[1]).powi(2)).sqrt());
    outcome(ok, format!("hit fractions {fracs:?}"))
}

fn run_tables() -> Vec<Vec<u8>> {
    let f = CircleFamily::arnold(0.1).unwrap();
    let windows = windows_table(&enumerate_windows(&f, 8, 1e-7)).to_csv().unwrap();
    let measure = measure_table(&[locked_measure(&f, 8, 500, 1e-7, SEED)]).to_csv().unwrap();
    let map = SkewMap::arnold_fiber(2, 0.05).unwrap();
    let fams = restricted_list(&map, 3);
    let inter = intersection_table(
        &intersection_measure(&fams, 500, 20, SEED, HypothesisPolicy::Record).unwrap(),
    )
    .to_csv()
    .unwrap();
    vec![windows, measure, inter]
}

// 8. Byte-identical CSVs on rerun and between 1 and 4 worker threads
fn c8() -> Outcome {
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let serial = pool(1).install(run_tables);
    let parallel = pool(4).install(run_tables);
    let again = pool(4).install(run_tables);
    outcome(
        serial == parallel && parallel == again,
        format!(
            "{} tables, {} bytes, parallel backend {}",
            serial.len(),
            serial.iter().map(Vec::len).sum::<usize>(),
            circlock_core::par::is_parallel()
        ),
    )
}

// 9. Chain-rule jets vs central differences to 1e-6 relative on 10³ maps; < 10 s
fn c9() -> Outcome {
    let mut g = rng::stream(SEED, 9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let stages: Vec<Stage> = (0..g.random_range(1..=4))
            .map(|_| {
                let hs: Vec<Harmonic> = (1..=g.random_range(1..=3u32))
                    .map(|j| Harmonic {
                        j,
                        a: g.random_range(-0.02..0.02),
                        b: g.random_range(-0.02..0.02),
                    })
                    .collect();
                Stage {
                    shift: g.random(),
                    periodic: TrigPoly::new(g.random_range(-0.05..0.05), hs),
                }
            })
            .collect();
        let map = ComposedCircleMap::new(stages);
        let y: f64 = g.random();
        let h = 1e-6;
        let jet = map.jet(y);
        let (jp, jm) = (map.jet(y + h), map.jet(y - h));
        let fd = [
            (map.lift(y + h) - map.lift(y - h)) / (2.0 * h),
            (jp[1] - jm[1]) / (2.0 * h),
            (jp[2] - jm[2]) / (2.0 * h),
        ];
        for k in 0..3 {
            let (a, b) = (jet[k + 1], fd[k]);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
        worst = worst.max((jet[0] - map.lift(y)).abs());
    }
    outcome(worst <= 1e-6, format!("max relative deviation {worst:.2e}"))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    // libtest flags such as `--nocapture` are accepted and ignored
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 9] = [
        (1, "rotation of the golden rigid rotation", Duration::from_secs(1), c1),
        (2, "closed-form Arnold window", Duration::from_secs(5), c2),
        (3, "Arnold lower measure monotone in amplitude", Duration::from_secs(300), c3),
        (4, "Diophantine measure above union bound", Duration::from_secs(30), c4),
        (5, "skew-product restricted maps and winding identity", Duration::from_secs(30), c5),
        (6, "intersection decay on restricted families", Duration::from_secs(600), c6),
        (7, "quasiperiodic circle search", Duration::from_secs(600), c7),
        (8, "determinism across reruns and worker counts", Duration::from_secs(600), c8),
        (9, "chain-rule jets against finite differences", Duration::from_secs(10), c9),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) && f != &id.to_string() {
                continue;
            }
        }
        let start = Instant::now();
        let o = run();
        let el = start.elapsed();
        let in_time = el <= budget;
        let pass = o.pass && in_time;
        let known = KNOWN_UNATTAINABLE.contains(&id);
        println!(
            "{} criterion {id}: {name} ({:.2} s, budget {} s){}: {}",
            if pass { "PASS" } else { "FAIL" },
            el.as_secs_f64(),
            budget.as_secs(),
            if !pass && known { " [known unattainable]" } else { "" },
            o.detail
        );
        if id == 6 {
            println!("INFO {}", coupled_decay());
        }
        if !pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
