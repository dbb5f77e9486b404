//! CSV tables with fixed headers.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.

use crate::diophantine::DioMeasure;
use crate::error::{Error, Result};
use crate::experiments::{EtaCurve, IntersectionMeasure};
use crate::rotation::{Classification, RotationResult};
use crate::skew::{A3Check, PeriodicCircle, QuasiHit};
use crate::windows::{LockedMeasure, TongueDiagram, Window};

pub const WINDOWS_HEADER: &[&str] = &["p", "q", "t_lo", "t_hi", "width", "bracket_radius"];
pub const DIAGRAM_HEADER: &[&str] = &["delta", "p", "q", "t_lo", "t_hi"];
pub const MEASURE_HEADER: &[&str] = &["q_max", "lower", "mc", "unresolved", "seed"];
pub const RHO_HEADER: &[&str] = &["t", "rho", "error_bound", "classification", "p", "q"];
pub const DIO_HEADER: &[&str] = &["C", "n_max", "estimate", "analytic_lower", "grid_error"];
pub const CIRCLES_HEADER: &[&str] = &["k", "n", "x0_num", "x0_den", "sup_c3", "passes"];
pub const SEARCH_HEADER: &[&str] = &["t", "found", "k", "n", "rho", "classification"];
pub const INTERSECTION_HEADER: &[&str] = &[
    "N",
    "winding",
    "norm",
    "a2",
    "optimistic",
    "pessimistic",
    "stderr",
];
pub const ETA_HEADER: &[&str] = &["r", "max_observed", "eta", "stderr", "families"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.to_string()))
    }
}

fn class_pq(c: &Classification) -> (String, String) {
    match c {
        Classification::Locked { p, q } => (p.to_string(), q.to_string()),
        _ => (String::new(), String::new()),
    }
}

pub fn rho_table(rows: &[(f64, RotationResult)]) -> Table {
    let mut t = Table::new(RHO_HEADER);
    for (param, r) in rows {
        let (p, q) = class_pq(&r.classification);
        t.push(vec![
            fmt_f64(*param),
            fmt_f64(r.estimate),
            fmt_f64(r.error_bound),
            r.classification.name().to_string(),
            p,
            q,
        ]);
    }
    t
}

pub fn windows_table(ws: &[Window]) -> Table {
    let mut t = Table::new(WINDOWS_HEADER);
    for w in ws {
        t.push(vec![
            w.p.to_string(),
            w.q.to_string(),
            fmt_f64(w.t_lo),
            fmt_f64(w.t_hi),
            fmt_f64(w.width),
            fmt_f64(w.bracket_radius),
        ]);
    }
    t
}

pub fn diagram_table(d: &TongueDiagram) -> Table {
    let mut t = Table::new(DIAGRAM_HEADER);
    for row in &d.rows {
        for w in &row.windows {
            t.push(vec![
                fmt_f64(row.delta),
                w.p.to_string(),
                w.q.to_string(),
                fmt_f64(w.t_lo),
                fmt_f64(w.t_hi),
            ]);
        }
    }
    t
}

pub fn measure_table(ms: &[LockedMeasure]) -> Table {
    let mut t = Table::new(MEASURE_HEADER);
    for m in ms {
        t.push(vec![
            m.q_max.to_string(),
            fmt_f64(m.lower),
            fmt_f64(m.mc),
            fmt_f64(m.unresolved_frac),
            m.seed.to_string(),
        ]);
    }
    t
}

pub fn dio_table(ms: &[DioMeasure]) -> Table {
    let mut t = Table::new(DIO_HEADER);
    for m in ms {
        t.push(vec![
            fmt_f64(m.c),
            m.n_max.to_string(),
            fmt_f64(m.estimate),
            fmt_f64(m.analytic_lower),
            fmt_f64(m.grid_error),
        ]);
    }
    t
}

pub fn circles_table(rows: &[(PeriodicCircle, A3Check)]) -> Table {
    let mut t = Table::new(CIRCLES_HEADER);
    for (c, a) in rows {
        t.push(vec![
            c.k.to_string(),
            c.n.to_string(),
            c.x0.numer().to_string(),
            c.x0.denom().to_string(),
            fmt_f64(a.sup_c3),
            a.passes.to_string(),
        ]);
    }
    t
}

pub fn search_table(rows: &[(f64, Option<QuasiHit>)]) -> Table {
    let mut t = Table::new(SEARCH_HEADER);
    for (param, hit) in rows {
        match hit {
            Some(h) => t.push(vec![
                fmt_f64(*param),
                "true".into(),
                h.circle.k.to_string(),
                h.circle.n.to_string(),
                fmt_f64(h.rotation.estimate),
                h.rotation.classification.name().to_string(),
            ]),
            None => t.push(vec![
                fmt_f64(*param),
                "false".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]),
        }
    }
    t
}

pub fn intersection_table(m: &IntersectionMeasure) -> Table {
    let mut t = Table::new(INTERSECTION_HEADER);
    for i in 0..m.optimistic.len() {
        t.push(vec![
            (i + 1).to_string(),
            m.hypotheses.windings[i].to_string(),
            fmt_f64(m.hypotheses.norms[i]),
            m.hypotheses.a2[i].to_string(),
            fmt_f64(m.optimistic[i]),
            fmt_f64(m.pessimistic[i]),
            fmt_f64(m.stderr[i]),
        ]);
    }
    t
}

pub fn eta_table(c: &EtaCurve) -> Table {
    let mut t = Table::new(ETA_HEADER);
    for r in &c.rows {
        t.push(vec![
            fmt_f64(r.r),
            fmt_f64(r.max_observed),
            fmt_f64(r.eta),
            fmt_f64(r.stderr),
            r.families.to_string(),
        ]);
    }
    t
}
