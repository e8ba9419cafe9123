//! CSV and JSON writers for trajectories, steady summaries and sweep tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back with `str::parse::<f64>` is bit-identical.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::experiments::SweepTable;
use crate::integrator::{SteadySummary, Trajectory};

pub const TRAJECTORY_HEADER: &str = "t,rho00,rho11,rho22,rho33,\
re_rho10,im_rho10,re_rho20,im_rho20,re_rho21,im_rho21,\
re_rho30,im_rho30,re_rho31,im_rho31,re_rho32,im_rho32,\
doublet_purity,trace_error,min_eig";

pub fn emit_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        let o = &s.obs;
        let p = o.populations;
        write!(
            w,
            "{:?},{:?},{:?},{:?},{:?}",
            s.time, p[0], p[1], p[2], p[3]
        )?;
        for c in [o.c10, o.c20, o.c21, o.c30, o.c31, o.c32] {
            write!(w, ",{:?},{:?}", c.re, c.im)?;
        }
        writeln!(
            w,
            ",{:?},{:?},{:?}",
            o.doublet_purity, o.trace_error, o.min_eigenvalue
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_sweep_csv<W: Write>(table: &SweepTable, mut w: W) -> Result<()> {
    let mut header: Vec<&str> = table.params.iter().map(|p| p.key()).collect();
    header.extend(["p_doublet", "purity", "abs_rho21", "converged"]);
    writeln!(w, "{}", header.join(","))?;
    for row in &table.rows {
        for v in &row.values {
            write!(w, "{v:?},")?;
        }
        writeln!(
            w,
            "{:?},{:?},{:?},{}",
            row.p_doublet, row.purity, row.abs_rho21, row.converged
        )?;
    }
    w.flush()?;
    Ok(())
}

/// JSON has no NaN or infinity; those become `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn steady_fields(st: &SteadySummary, m: &mut Map<String, Value>) {
    let r = &st.record;
    m.insert("steady_time".into(), num(st.time));
    for (k, p) in r.populations.iter().enumerate() {
        m.insert(format!("rho{k}{k}"), num(*p));
    }
    for (name, c) in [
        ("rho10", r.c10),
        ("rho20", r.c20),
        ("rho21", r.c21),
        ("rho30", r.c30),
        ("rho31", r.c31),
        ("rho32", r.c32),
    ] {
        m.insert(format!("re_{name}"), num(c.re));
        m.insert(format!("im_{name}"), num(c.im));
        m.insert(format!("abs_{name}"), num(c.norm()));
    }
    m.insert("p_doublet".into(), num(st.doublet_population));
    m.insert("doublet_purity".into(), num(st.doublet_purity));
    m.insert("max_change".into(), num(st.max_change));
    m.insert("converged".into(), json!(st.converged));
}

/// Flat object with the steady-state observables and run statistics. Runs too
/// short for a steady window report `converged: false` and omit the
/// observables.
pub fn summary_json(traj: &Trajectory) -> Value {
    let mut m = Map::new();
    match &traj.steady {
        Some(st) => steady_fields(st, &mut m),
        None => {
            m.insert("converged".into(), json!(false));
        }
    }
    let s = &traj.stats;
    m.insert("pulses_off".into(), num(traj.pulses_off));
    m.insert("samples".into(), json!(traj.samples.len()));
    m.insert("steps".into(), json!(s.steps));
    m.insert("rejected_steps".into(), json!(s.rejected_steps));
    m.insert("rhs_evals".into(), json!(s.rhs_evals));
    m.insert("max_trace_error".into(), num(s.max_trace_error));
    m.insert("min_eigenvalue".into(), num(s.min_eigenvalue));
    Value::Object(m)
}

pub fn emit_summary_json<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let text = serde_json::to_string_pretty(&summary_json(traj))
        .map_err(|e| crate::Error::Io(e.to_string()))?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

pub fn sweep_json(table: &SweepTable) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (p, v) in table.params.iter().zip(&row.values) {
                m.insert(p.key().into(), num(*v));
            }
            m.insert("p_doublet".into(), num(row.p_doublet));
            m.insert("purity".into(), num(row.purity));
            m.insert("abs_rho21".into(), num(row.abs_rho21));
            m.insert("converged".into(), json!(row.converged));
            m.insert(
                "error".into(),
                row.error.as_ref().map_or(Value::Null, |e| json!(e)),
            );
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

pub fn emit_sweep_json<W: Write>(table: &SweepTable, mut w: W) -> Result<()> {
    let text = serde_json::to_string_pretty(&sweep_json(table))
        .map_err(|e| crate::Error::Io(e.to_string()))?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}
