//! Task dispatch: one core computation per task, cached per module.

use naifs_pressure::counting::{sup_entropy, EntropyEstimate};
use naifs_pressure::measures::{measure_pressure, theorem1_bounds_check_with, variational_gap_with, MeasurePressure};
use naifs_pressure::pressure::{pressure_suite, sandwich_check_wm, Direction, PressureEstimate, PressureSuite};
use naifs_pressure::{Error, Mode};
use serde_json::json;

use crate::cache::Cache;
use crate::checks;
use crate::config::TaskKind;
use crate::exec::Workers;
use crate::report::{CheckOutcome, Estimate, TaskRecord};
use crate::setup::Experiment;
use crate::tables::{ColumnType as C, Table};

pub struct Context<'a> {
    pub exec: &'a Workers,
    pub cache: &'a Cache,
}

/// Runs the configured task. Failures come back as a failed record so that
/// whatever was computed can still be written out.
pub fn run_task(ex: &Experiment, ctx: &Context) -> TaskRecord {
    let kind = ex.config.task.kind;
    let res = match kind {
        TaskKind::SupEntropy => entropy_task(ex, ctx),
        TaskKind::PpPressure => suite(ex, ctx).map(|s| pressure_record(kind, &s, false)),
        TaskKind::Capacity => suite(ex, ctx).map(|s| pressure_record(kind, &s, true)),
        TaskKind::Weighted => weighted_task(ex, ctx),
        TaskKind::MeasurePressure => measure_task(ex, ctx),
        TaskKind::Variational => variational_task(ex, ctx),
        TaskKind::CheckSuite => Ok(check_suite_task(ex, ctx)),
    };
    res.unwrap_or_else(|e| TaskRecord::failed(kind.name(), e.to_string()))
}

fn inputs(ex: &Experiment) -> serde_json::Value {
    ex.config.canonical()
}

/// Pressure inputs without the task section, so pressure tasks share results.
fn pressure_inputs(ex: &Experiment) -> serde_json::Value {
    let c = &ex.config;
    json!({ "seed": c.seed, "system": c.system, "potential": c.potential, "target": c.target, "grids": c.grids })
}

pub fn entropy(ex: &Experiment, ctx: &Context) -> Result<EntropyEstimate, Error> {
    let c = &ex.config;
    let key = json!({ "seed": c.seed, "system": c.system, "target": c.target, "grids": c.grids });
    ctx.cache
        .get_or_compute("sup_entropy", &key, || {
            sup_entropy(&ex.sys, &ex.entropy_sample, &c.grids.n_range, &c.grids.eps_grid, ex.metric, &ex.budget, ctx.exec)
        })
        .map(|(v, _)| v)
}

pub fn suite(ex: &Experiment, ctx: &Context) -> Result<PressureSuite, Error> {
    let g = &ex.config.grids;
    ctx.cache
        .get_or_compute("pressure_suite", &pressure_inputs(ex), || {
            pressure_suite(&ex.sys, &ex.z, &ex.pool, &ex.phi, &g.delta_grid, &g.n_grid, &ex.cover, ctx.exec)
        })
        .map(|(v, _)| v)
}

pub fn entropy_tables(est: &EntropyEstimate) -> Vec<Table> {
    let mut t = Table::new(
        "entropy",
        &[("n", C::Int), ("eps", C::Float), ("count", C::Int), ("log_count", C::Float), ("rate", C::Float)],
    );
    for c in &est.table {
        t.push(vec![c.n.into(), c.eps.into(), c.count.into(), c.log_count.into(), c.rate.into()]);
    }
    let mut s = Table::new("entropy_slopes", &[("eps", C::Float), ("slope", C::Float)]);
    for (e, v) in &est.slopes {
        s.push(vec![(*e).into(), (*v).into()]);
    }
    vec![t, s]
}

fn entropy_task(ex: &Experiment, ctx: &Context) -> Result<TaskRecord, Error> {
    let est = entropy(ex, ctx)?;
    let mut r = TaskRecord::new("sup_entropy");
    // greedy counts can only undercount maximal separated sets
    r.push(
        Estimate::new("entropy", est.value, Direction::LowerBound, est.mode).with_diagnostics(json!({
            "sample_size": ex.entropy_sample.len(),
            "slopes": est.slopes,
        })),
    );
    r.tables = entropy_tables(&est);
    Ok(r)
}

fn estimate(name: &str, p: &PressureEstimate) -> Estimate {
    Estimate::new(name, p.value, p.direction, p.mode)
        .with_bracket(p.bracket)
        .with_diagnostics(serde_json::to_value(&p.diagnostics).unwrap_or_default())
}

pub fn pressure_tables(s: &PressureSuite) -> Vec<Table> {
    let mut d = Table::new(
        "pressure_delta",
        &[
            ("delta", C::Float),
            ("modulus", C::Float),
            ("growth", C::Float),
            ("level", C::Float),
            ("pp", C::Float),
            ("pp_prime", C::Float),
            ("cp_lower", C::Float),
            ("cp_upper", C::Float),
        ],
    );
    let mut c = Table::new(
        "pressure_cells",
        &[
            ("delta", C::Float),
            ("n", C::Int),
            ("n_max", C::Int),
            ("alpha_m", C::Float),
            ("alpha_m_prime", C::Float),
            ("alpha_r", C::Float),
            ("alpha_unit", C::Float),
            ("log_fixed_mass", C::Float),
            ("cover_size", C::Int),
            ("candidates", C::Int),
        ],
    );
    for x in &s.per_delta {
        d.push(vec![
            x.delta.into(),
            x.modulus.into(),
            x.growth.into(),
            x.level.into(),
            x.pp.into(),
            x.pp_prime.into(),
            x.cp_lower.into(),
            x.cp_upper.into(),
        ]);
        for g in &x.cells {
            c.push(vec![
                g.delta.into(),
                g.n.into(),
                g.n_max.into(),
                g.alpha_m.into(),
                g.alpha_m_prime.into(),
                g.alpha_r.into(),
                g.alpha_unit.into(),
                g.log_fixed_mass.into(),
                g.cover_size.into(),
                g.candidates.into(),
            ]);
        }
    }
    vec![d, c]
}

fn pressure_record(kind: TaskKind, s: &PressureSuite, capacity: bool) -> TaskRecord {
    let mut r = TaskRecord::new(kind.name());
    if capacity {
        r.push(estimate("cp_lower", &s.cp_lower));
        r.push(estimate("cp_upper", &s.cp_upper));
        r.push(estimate("pp", &s.pp));
    } else {
        r.push(estimate("pp", &s.pp));
        r.push(estimate("pp_prime", &s.pp_prime));
    }
    r.tables = pressure_tables(s);
    r
}

fn weighted_task(ex: &Experiment, ctx: &Context) -> Result<TaskRecord, Error> {
    let c = &ex.config;
    let t = &c.task;
    let alpha = t.alpha.unwrap_or(0.0);
    let delta = t.delta.unwrap_or_else(|| c.grids.delta_grid.iter().copied().fold(f64::INFINITY, f64::min));
    let ns = t.n_values.clone().unwrap_or_else(|| c.grids.n_grid.clone());
    let (rep, _) = ctx.cache.get_or_compute("weighted", &inputs(ex), || {
        sandwich_check_wm(&ex.sys, &ex.z, &ex.phi, alpha, t.eps, delta, &ns, t.n_threshold, &ex.pool, &ex.cover, ctx.exec)
    })?;
    let mut r = TaskRecord::new("weighted");
    let mut table = Table::new(
        "sandwich",
        &[
            ("n", C::Int),
            ("m_shifted", C::Float),
            ("w", C::Float),
            ("m", C::Float),
            ("lower_holds", C::Bool),
            ("upper_holds", C::Bool),
            ("counted", C::Bool),
        ],
    );
    for row in &rep.rows {
        table.push(vec![
            row.n.into(),
            row.m_shifted.into(),
            row.w.into(),
            row.m.into(),
            row.lower_holds.into(),
            row.upper_holds.into(),
            row.counted.into(),
        ]);
        // a finite candidate family can only raise the optimum
        r.push(
            Estimate::new(format!("w(n={})", row.n), row.w, Direction::UpperBound, rep.mode)
                .with_diagnostics(json!({ "m": row.m, "m_shifted": row.m_shifted })),
        );
    }
    r.push(
        Estimate::new("sandwich_violations", rep.violations as f64, Direction::TwoSided, rep.mode)
            .with_diagnostics(json!({ "alpha": alpha, "eps": t.eps, "delta": delta, "note": rep.note })),
    );
    r.checks.push(CheckOutcome::verdict(
        "pressure",
        "weighted_sandwich",
        rep.violations == 0,
        format!("{} violations over N ≥ {}", rep.violations, t.n_threshold),
    ));
    r.tables.push(table);
    Ok(r)
}

fn measure_values(ex: &Experiment, ctx: &Context) -> Result<Vec<MeasurePressure>, Error> {
    let m = ex.measures.as_ref().ok_or_else(|| Error::InvalidArgument("no measures configured".into()))?;
    let c = &ex.config;
    let key = json!({ "seed": c.seed, "system": c.system, "potential": c.potential, "measures": c.measures });
    ctx.cache
        .get_or_compute("measure_pressure", &key, || {
            m.family.iter().map(|(_, mu)| measure_pressure(&ex.sys, mu, &ex.phi, &m.params, ctx.exec)).collect()
        })
        .map(|(v, _)| v)
}

fn measure_table(ex: &Experiment, values: &[MeasurePressure]) -> Table {
    let mut t = Table::new(
        "measure_pressure",
        &[
            ("index", C::Int),
            ("measure", C::Text),
            ("value", C::Float),
            ("std_error", C::Float),
            ("samples", C::Int),
            ("undersampled", C::Int),
            ("unstabilized", C::Int),
        ],
    );
    let labels = ex.measures.as_ref().map(|m| &m.family[..]).unwrap_or(&[]);
    for (i, (v, (label, _))) in values.iter().zip(labels).enumerate() {
        t.push(vec![
            i.into(),
            label.as_str().into(),
            v.value.into(),
            v.std_error.into(),
            v.samples.into(),
            v.undersampled.into(),
            v.unstabilized.into(),
        ]);
    }
    t
}

fn measure_estimate(label: &str, v: &MeasurePressure) -> Estimate {
    Estimate::new(label, v.value, Direction::TwoSided, v.mode).with_diagnostics(json!({
        "std_error": v.std_error,
        "samples": v.samples,
        "undersampled": v.undersampled,
        "unstabilized": v.unstabilized,
    }))
}

fn measure_task(ex: &Experiment, ctx: &Context) -> Result<TaskRecord, Error> {
    let values = measure_values(ex, ctx)?;
    let mut r = TaskRecord::new("measure_pressure");
    for (v, (label, _)) in values.iter().zip(&ex.measures.as_ref().expect("measures").family) {
        r.push(measure_estimate(label, v));
    }
    r.tables.push(measure_table(ex, &values));
    Ok(r)
}

/// The reference pressure: configured, or the cover estimate.
pub fn reference_pressure(ex: &Experiment, ctx: &Context) -> Result<(f64, Mode), Error> {
    match ex.config.task.reference {
        Some(p) => Ok((p, Mode::Exact)),
        None => suite(ex, ctx).map(|s| (s.pp.value, s.pp.mode)),
    }
}

fn variational_task(ex: &Experiment, ctx: &Context) -> Result<TaskRecord, Error> {
    let m = ex.measures.as_ref().ok_or_else(|| Error::InvalidArgument("no measures configured".into()))?;
    let (pressure, pmode) = reference_pressure(ex, ctx)?;
    let family: Vec<_> = m.family.iter().map(|(_, mu)| mu.clone()).collect();
    let key = json!({ "inputs": inputs(ex), "pressure": pressure });
    let (rep, _) = ctx.cache.get_or_compute("variational", &key, || {
        variational_gap_with(&ex.sys, &ex.target, &ex.phi, &family, &m.params, pressure, ctx.exec)
    })?;
    let (values, best, sup) = (&rep.values, rep.best, rep.sup);
    let t = &ex.config.task;
    let mut r = TaskRecord::new("variational");
    let mode = Mode::all(values.iter().map(|v| v.mode));
    r.push(
        Estimate::new("sup_measure_pressure", sup, Direction::TwoSided, mode)
            .with_diagnostics(json!({ "best": best, "measure": m.family[best].0 })),
    );
    r.push(Estimate::new("pressure", pressure, Direction::UpperBound, pmode));
    r.push(Estimate::new("gap", pressure - sup, Direction::TwoSided, mode.and(pmode)));
    r.checks.push(CheckOutcome::verdict(
        "measures",
        "variational_upper_bound",
        sup <= pressure + t.gap_tol,
        format!("sup {sup:.6} vs pressure {pressure:.6} (tolerance {})", t.gap_tol),
    ));
    let probes = t.probes.clone().unwrap_or_else(|| vec![pressure - 0.3, pressure + 0.3]);
    let key = json!({ "inputs": inputs(ex), "pressure": pressure, "best": best });
    let (th, _) = ctx.cache.get_or_compute("local_bounds", &key, || {
        theorem1_bounds_check_with(&ex.sys, &ex.target, &m.family[best].1, &ex.phi, &probes, &m.params, pressure, t.gap_tol, ctx.exec)
    })?;
    r.checks.push(CheckOutcome::verdict(
        "measures",
        "local_pressure_bounds",
        th.violations == 0,
        format!(
            "local values in [{:.4}, {:.4}], {} probes, {} violations{}",
            th.local_min,
            th.local_max,
            th.probes.len(),
            th.violations,
            th.note.as_ref().map(|n| format!("; {n}")).unwrap_or_default()
        ),
    ));
    r.tables.push(measure_table(ex, values));
    Ok(r)
}

fn check_suite_task(ex: &Experiment, ctx: &Context) -> TaskRecord {
    let mut r = TaskRecord::new("check_suite");
    for module in checks::MODULES {
        let key = json!({ "inputs": inputs(ex), "module": module });
        let outcomes = ctx
            .cache
            .get_or_compute(&format!("check_suite/{module}"), &key, || Ok::<_, Error>(checks::run_module(ex, module, ctx)))
            .map(|(v, _)| v)
            .unwrap_or_default();
        r.checks.extend(outcomes);
    }
    let failures = r.check_failures();
    r.push(Estimate::new("check_failures", failures as f64, Direction::TwoSided, Mode::Exact));
    let mut t = Table::new("checks", &[("module", C::Text), ("property", C::Text), ("status", C::Text), ("detail", C::Text)]);
    for c in &r.checks {
        let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        t.push(vec![c.module.as_str().into(), c.property.as_str().into(), status.into(), c.detail.as_str().into()]);
    }
    r.tables.push(t);
    r
}
