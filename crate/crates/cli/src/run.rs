//! Command implementations. Each writes its files under the output
//! directory and returns the JSON it also prints to stdout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rggclt_core::clt_bounds::{gamma_report, gamma_upper, regime_rate, sigma_sq, theorem_rate, wasserstein_upper};
use rggclt_core::diagnostics::{clt_ladder, LadderOptions, NormalityReport};
use rggclt_core::model::{classify_regime, schedule_diagnostics};
use rggclt_core::moments::{moment_report, variance_bounds};
use rggclt_core::point_process::derive_stream;
use rggclt_core::simulate::{self, SimulationPlan};
use rggclt_core::Execution;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::summary::{summarize, summary_row};

pub fn run(command: Command, config: &ExperimentConfig, out_dir: &Path) -> Result<Value, CliError> {
    config.validate(command)?;
    let exec = Execution::default();
    let hash = config.hash();
    let out = Output { dir: out_dir };
    let mut report = match command {
        Command::Simulate => run_simulate(config, exec, &hash, &out)?,
        Command::Moments => run_moments(config)?,
        Command::Bounds => run_bounds(config)?,
        Command::Gamma => run_gamma(config, exec)?,
        Command::Ladder => run_ladder(config, exec, &out)?,
        Command::Regime => run_regime(config)?,
    };
    if let Value::Object(map) = &mut report {
        let mut head = Map::new();
        head.insert("command".into(), command.name().into());
        head.insert("config_hash".into(), hash.into());
        head.append(map);
        report = Value::Object(head);
    }
    annotate_log_values(&mut report);
    if command != Command::Simulate {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        out.write(&config.outputs.report, |w| writeln!(w, "{text}"))?;
    }
    Ok(report)
}

struct Output<'a> {
    dir: &'a Path,
}

impl Output<'_> {
    fn write<F>(&self, name: &str, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let wrap = |source| CliError::Output { path: path.display().to_string(), source };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(wrap)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
        body(&mut w).and_then(|_| w.flush()).map_err(wrap)?;
        Ok(path)
    }
}

fn run_simulate(config: &ExperimentConfig, exec: Execution, hash: &str, out: &Output) -> Result<Value, CliError> {
    let params = config.params()?;
    let plan = SimulationPlan {
        max_expected: config.max_expected_points,
        record_timing: config.record_timing,
        ..SimulationPlan::new(params, config.replications.unwrap_or(0), config.master_seed)
    };
    // Fail before touching the output directory.
    plan.check_feasible()?;
    let records = simulate::run(&plan, exec)?;

    out.write(&config.outputs.records, |w| {
        for r in &records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;

    let summary = summarize(&records).expect("at least one replication");
    let row = summary_row(&params, &summary, config.quadrature_tol, hash.to_owned())?;
    out.write(&config.outputs.summary, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.serialize(&row).map_err(std::io::Error::other)?;
        csv.flush()
    })?;
    Ok(json!({ "params": params, "summary": summary, "analytic": row }))
}

fn run_moments(config: &ExperimentConfig) -> Result<Value, CliError> {
    let params = config.params()?;
    let m = moment_report(&params, config.quadrature_tol)?;
    let mut v = json!({ "params": params });
    merge(&mut v, &m);
    Ok(v)
}

fn run_bounds(config: &ExperimentConfig) -> Result<Value, CliError> {
    let params = config.params()?;
    let s = sigma_sq(&params, config.sigma_mode, config.quadrature_tol)?;
    let upper = gamma_upper(&params, s)?;
    let bounds = variance_bounds(&params);
    Ok(json!({
        "params": params,
        "sigma_mode": config.sigma_mode,
        "sigma_sq_used": s,
        "variance_lower": bounds.lower,
        "variance_upper": bounds.upper,
        "gamma_upper": upper,
        "wasserstein_bound": wasserstein_upper(&upper)?,
        "theorem_rate": theorem_rate(&params)?,
    }))
}

fn run_gamma(config: &ExperimentConfig, exec: Execution) -> Result<Value, CliError> {
    let params = config.params()?;
    let mut stream = derive_stream(config.master_seed, 0);
    let report = gamma_report(
        &params,
        config.sigma_mode,
        config.quadrature_tol,
        Some((&mut stream, config.mc_samples)),
        exec,
    )?;
    let mut v = json!({ "params": params });
    merge(&mut v, &report);
    Ok(v)
}

/// One line of the ladder output.
#[derive(Serialize)]
struct RungLine {
    rung: usize,
    multiplier: f64,
    log_lambda: f64,
    #[serde(flatten)]
    report: NormalityReport,
}

fn run_ladder(config: &ExperimentConfig, exec: Execution, out: &Output) -> Result<Value, CliError> {
    let params = config.params()?;
    let options = LadderOptions {
        replications: config.replications.unwrap_or(0),
        master_seed: config.master_seed,
        max_expected: config.max_expected_points,
        quadrature_tol: config.quadrature_tol,
    };
    let multipliers = config.lambda_multipliers.as_deref().unwrap_or(&[]);
    let lines: Vec<RungLine> = clt_ladder(&params, multipliers, &options, exec)?
        .into_iter()
        .enumerate()
        .map(|(rung, r)| RungLine {
            rung,
            multiplier: r.multiplier,
            log_lambda: r.params.intensity().ln(),
            report: r.report,
        })
        .collect();
    out.write(&config.outputs.records, |w| {
        for line in &lines {
            serde_json::to_writer(&mut *w, line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    Ok(json!({ "params": params, "rungs": lines }))
}

fn run_regime(config: &ExperimentConfig) -> Result<Value, CliError> {
    let dims = config.dimensions.as_deref().unwrap_or(&[]);
    let schedule = config.intensity.schedule(dims);
    let entries = schedule_diagnostics(&schedule, config.delta, dims)?;

    let ok: Vec<_> = entries.iter().filter_map(|e| e.as_ref().ok()).collect();
    let pairs: Vec<(u32, f64)> = ok.iter().map(|e| (e.d, e.log_v)).collect();
    let classification = classify_regime(&pairs, config.regime_tolerance)?;
    let params = ok
        .iter()
        .map(|e| config.delta.params(e.d, &schedule))
        .collect::<Result<Vec<_>, _>>()?;
    let rates = regime_rate(&params, &classification.regime)?;

    let mut rates = rates.into_iter();
    let rows: Vec<Value> = entries
        .iter()
        .zip(dims)
        .map(|(e, &d)| match e {
            Ok(entry) => {
                let mut v = json!({ "rate": rates.next() });
                merge(&mut v, entry);
                v
            }
            Err(err) => json!({ "d": d, "error": err.to_string() }),
        })
        .collect();
    Ok(json!({ "entries": rows, "classification": classification }))
}

fn merge<T: Serialize>(target: &mut Value, extra: &T) {
    if let (Value::Object(t), Value::Object(e)) = (target, serde_json::to_value(extra).expect("serializes")) {
        t.extend(e);
    }
}

/// Log-domain values serialize as `{sign, log_abs}`. Adds the plain `value`
/// next to them (`null` when it overflows `f64`).
fn annotate_log_values(v: &mut Value) {
    match v {
        Value::Object(map) => {
            let is_log_value = map.len() == 2 && map.contains_key("sign") && map.contains_key("log_abs");
            if is_log_value {
                let sign = map["sign"].as_f64().unwrap_or(0.0);
                let log_abs = map["log_abs"].as_f64().unwrap_or(f64::NEG_INFINITY);
                let value = if sign == 0.0 { 0.0 } else { sign * log_abs.exp() };
                map.insert("value".into(), json!(value));
            } else {
                map.values_mut().for_each(annotate_log_values);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(annotate_log_values),
        _ => {}
    }
}
