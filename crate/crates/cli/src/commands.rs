use circlock_core::circle_map::{CircleFamily, ParamFamily, T_GRID};
use circlock_core::experiments::{eta_curve, intersection_measure, ExperimentReport, HypothesisPolicy};
use circlock_core::rotation::{classify, ClassifyOptions};
use circlock_core::skew::{a3_check, periodic_circles, restricted_family, QuasiSearch};
use circlock_core::tables::{self, Table};
use circlock_core::windows::{enumerate_windows, locked_measure, tongue_diagram};
use circlock_core::{dio_measure, rng, DioParams};
use rayon::prelude::*;

use crate::config::parse_range;
use crate::output::Outputs;
use crate::{defs, CliError, DioArgs, RhoArgs, Run, SkewArgs, TheoremAArgs, TonguesArgs, WindowsArgs};

type Res = Result<ExperimentReport, CliError>;

fn emit(report: &mut ExperimentReport, out: &mut Outputs, name: &str, table: &Table) -> Result<(), CliError> {
    let file = format!("{name}.csv");
    out.add(&file, table.to_csv()?);
    report.table(name, &file, table.rows.len());
    Ok(())
}

fn load_family(run: &Run) -> Result<(CircleFamily, Vec<u8>), CliError> {
    let path = run.require_input()?;
    let (l, fam) = defs::load_family(path)?;
    let fam = match &run.label {
        Some(s) => fam.with_label(s),
        None => fam,
    };
    Ok((fam, l.bytes))
}

fn base_report(run: &Run, name: &str, label: &str, input: Option<&[u8]>) -> ExperimentReport {
    let mut r = ExperimentReport::new(name, run.seed)
        .input("label", label)
        .input("q_max", run.qmax);
    if let (Some(p), Some(b)) = (&run.input, input) {
        r.hash_input(&p.display().to_string(), b);
    }
    r
}

pub fn rho(run: &mut Run, a: RhoArgs, out: &mut Outputs) -> Res {
    let (fam, bytes) = load_family(run)?;
    let ts = match run.r.pick_opt("t-range", a.t_range)? {
        Some(s) => parse_range(&s)?,
        None => run.r.pick_list("t", a.t, Vec::new())?,
    };
    if ts.is_empty() {
        return Err(CliError::Input("rho needs --t or --t-range".into()));
    }
    let opts = ClassifyOptions {
        q_max: run.qmax,
        n_iter: run.r.pick("n-iter", a.n_iter, ClassifyOptions::default().n_iter)?,
        base_grid: run.grid(ClassifyOptions::default().base_grid),
        ..Default::default()
    };
    let rows: Vec<_> = ts
        .par_iter()
        .map(|&t| (t, classify(&fam.map_at(t), &opts)))
        .collect();
    let mut report = base_report(run, "rho", fam.label(), Some(&bytes))
        .input("n_iter", opts.n_iter)
        .input("points", ts.len());
    emit(&mut report, out, "rho", &tables::rho_table(&rows))?;
    Ok(report)
}

pub fn windows(run: &mut Run, a: WindowsArgs, out: &mut Outputs) -> Res {
    let (fam, bytes) = load_family(run)?;
    let tol = run.tol(1e-7);
    let samples = run.r.pick("samples", a.samples, 2000)?;
    let ws = enumerate_windows(&fam, run.qmax, tol);
    let m = locked_measure(&fam, run.qmax, samples, tol, run.seed);
    let mut report = base_report(run, "windows", fam.label(), Some(&bytes))
        .input("tol", tol)
        .input("samples", samples);
    report.notes.push(format!(
        "{} windows, certified lower measure {:.6}, Monte Carlo {:.6} ± {:.6}",
        ws.len(),
        m.lower,
        m.mc,
        m.mc_stderr
    ));
    emit(&mut report, out, "windows", &tables::windows_table(&ws))?;
    emit(&mut report, out, "measure", &tables::measure_table(&[m]))?;
    Ok(report)
}

pub fn tongues(run: &mut Run, a: TonguesArgs, out: &mut Outputs) -> Res {
    let base = match &run.input {
        Some(_) => Some(load_family(run)?),
        None => None,
    };
    let tol = run.tol(1e-7);
    let deltas = run.r.pick_list("deltas", a.deltas, vec![0.0, 0.05, 0.1, 0.15])?;
    let label = match (&run.label, &base) {
        (Some(l), _) => l.clone(),
        (None, Some((f, _))) => f.label().to_string(),
        (None, None) => "arnold".to_string(),
    };
    let d = tongue_diagram(
        &label,
        |delta| match &base {
            Some((f, _)) => f.scaled(delta),
            None => CircleFamily::arnold(delta),
        },
        &deltas,
        run.qmax,
        tol,
    )?;
    let mut report = base_report(run, "tongues", &label, base.as_ref().map(|b| b.1.as_slice()))
        .input("tol", tol)
        .input("deltas", format!("{deltas:?}"));
    emit(&mut report, out, "diagram", &tables::diagram_table(&d))?;
    Ok(report)
}

pub fn dio(run: &mut Run, a: DioArgs, out: &mut Outputs) -> Res {
    let cs = run.r.pick_list("c", a.c, vec![0.1])?;
    let n_max = run.r.pick("nmax", a.nmax, 1000)?;
    let grid = run.grid(100_000);
    let params = cs
        .iter()
        .map(|&c| DioParams::new(c, n_max, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let ms: Vec<_> = params.iter().map(dio_measure).collect();
    let mut report = base_report(run, "dio", "diophantine", None)
        .input("n_max", n_max)
        .input("grid", grid);
    for m in &ms {
        report.notes.push(format!(
            "C = {}: estimate {:.6}, union bound {:.6}, grid error {:.2e}, bound holds {}",
            m.c,
            m.estimate,
            m.analytic_lower,
            m.grid_error,
            m.estimate >= m.analytic_lower - m.grid_error
        ));
    }
    emit(&mut report, out, "dio", &tables::dio_table(&ms))?;
    Ok(report)
}

pub fn skew(run: &mut Run, a: SkewArgs, out: &mut Outputs) -> Res {
    let path = run.require_input()?.clone();
    let (l, map) = defs::load_skew(&path)?;
    let map = match &run.label {
        Some(s) => map.with_label(s),
        None => map,
    };
    let n_max = run.r.pick("nmax", a.nmax, 4)?;
    let radius = run.r.pick_opt("radius", a.radius)?;
    let y_grid = run.grid(1 << 16);
    let ts = match run.r.pick_list("t", a.t, Vec::new())? {
        ts if !ts.is_empty() => ts,
        _ => {
            let n = run.r.pick("samples", a.samples, 200)?;
            rng::uniform_samples(run.seed, n, 0.0, 1.0)
        }
    };

    let check_r = radius.unwrap_or(1.0);
    let circles = periodic_circles(map.m(), n_max)
        .into_iter()
        .map(|c| {
            let rf = restricted_family(&map, &c)?;
            let chk = a3_check(&rf, check_r, T_GRID, y_grid);
            Ok((c, chk))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let qs = QuasiSearch::new(&map, n_max, run.qmax, radius)?;
    let hits: Vec<_> = ts.par_iter().map(|&t| (t, qs.search(t))).collect();

    let found = hits.iter().filter(|h| h.1.is_some()).count();
    let mut report = base_report(run, "skew", map.label(), Some(&l.bytes))
        .input("n_max", n_max)
        .input("c3_radius", check_r)
        .input("y_grid", y_grid)
        .input("points", ts.len());
    report.notes.push(format!(
        "{} periodic circles, {} pass the C³ check; search hits {found}/{}",
        circles.len(),
        circles.iter().filter(|c| c.1.passes).count(),
        ts.len()
    ));
    if radius.is_none() {
        report.notes.push("search ran without a C³ filter".into());
    }
    emit(&mut report, out, "circles", &tables::circles_table(&circles))?;
    emit(&mut report, out, "search", &tables::search_table(&hits))?;
    Ok(report)
}

pub fn theorem_a(run: &mut Run, a: TheoremAArgs, out: &mut Outputs) -> Res {
    let path = run.require_input()?.clone();
    let (l, map) = defs::load_skew(&path)?;
    let map = match &run.label {
        Some(s) => map.with_label(s),
        None => map,
    };
    let n_max = run.r.pick("nmax", a.nmax, 6)?;
    let samples = run.r.pick("samples", a.samples, 10_000)?;
    let eta_families = run.r.pick("eta-families", a.eta_families, 8)?;
    let eta_samples = run.r.pick("eta-samples", a.eta_samples, 2000)?;
    let flag = a.allow_nonconforming.then_some(true);
    let allow = run.r.pick("allow-nonconforming", flag, false)?;
    let policy = if allow { HypothesisPolicy::Record } else { HypothesisPolicy::Strict };

    let circles = periodic_circles(map.m(), n_max);
    let fams = (1..=n_max)
        .map(|n| {
            let c = circles
                .iter()
                .find(|c| c.n == n)
                .ok_or_else(|| CliError::Input(format!("no periodic circle of period {n}")))?;
            Ok(restricted_family(&map, c)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let m = intersection_measure(&fams, samples, run.qmax, run.seed, policy)?;

    let mut report = base_report(run, "theoremA", map.label(), Some(&l.bytes))
        .input("n_max", n_max)
        .input("samples", samples)
        .input("policy", format!("{policy:?}"));
    report.with_hypotheses(&m.hypotheses);
    report.notes.push(format!(
        "mu_N nonincreasing {}, common window flagged {}",
        m.is_nonincreasing(),
        m.common_window
    ));
    emit(&mut report, out, "intersection", &tables::intersection_table(&m))?;

    if eta_families > 0 {
        let r = m.hypotheses.max_norm();
        let curve = eta_curve(&[r], eta_families, eta_samples, run.qmax, run.seed)?;
        let eta = curve.eta_at(r)?;
        let k = m.optimistic.len() as i32 - 1;
        let bound = m.optimistic[0] * eta.powi(k);
        report.notes.push(format!(
            "eta at norm {r:.6e} is {eta:.6}; mu_1 * eta^{k} = {bound:.6} against mu_{} = {:.6}",
            k + 1,
            m.optimistic[k as usize]
        ));
        report = report
            .input("eta_families", eta_families)
            .input("eta_samples", eta_samples);
        emit(&mut report, out, "eta", &tables::eta_table(&curve))?;
    }
    Ok(report)
}
