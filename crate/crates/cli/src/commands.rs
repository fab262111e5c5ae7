use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hesm_core::fuzzy::{infer, FuzzyController};
use hesm_core::sim::{compare, compute_metrics, run, Mode, RunOutput, SupervisorKind, Trace};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{from_value, set_path, Config};
use crate::error::CliError;
use crate::report::*;
use crate::svg::{Chart, Series, PALETTE};
use crate::table::{self, sig9};

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => ensure_dir(p),
        _ => Ok(()),
    }
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::write(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_with(path, |w| w.write_all(text.as_bytes()))
}

// ---------------------------------------------------------------------------
// single run
// ---------------------------------------------------------------------------

/// Command-line overrides for `run`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub controller: Option<SupervisorKind>,
    pub model: Option<Mode>,
    pub dt: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) -> Result<(), CliError> {
        if let Some(k) = self.controller {
            cfg.controller.kind = k;
        }
        if let Some(m) = self.model {
            if m != cfg.integration.mode && self.dt.is_none() {
                cfg.integration.dt = None;
            }
            cfg.integration.mode = m;
        }
        if let Some(dt) = self.dt {
            cfg.integration.dt = Some(dt);
        }
        cfg.validate()?;
        Ok(())
    }
}

pub struct Executed {
    pub output: RunOutput,
    pub report: RunReport,
}

fn kind_name(k: SupervisorKind) -> &'static str {
    match k {
        SupervisorKind::Flc => "flc",
        SupervisorKind::Ifthen => "ifthen",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Switched => "switched",
        Mode::Averaged => "averaged",
    }
}

/// Runs the simulation and summarises it; writes nothing.
pub fn execute(cfg: &Config) -> Result<Executed, CliError> {
    let sim = cfg.sim();
    let started = Instant::now();
    let output = run(&sim)?;
    let wall = started.elapsed().as_secs_f64();

    let (metrics, note) = match &output.fault {
        Some(_) => (None, Some("run faulted before completing".to_string())),
        None => match compute_metrics(&output.trace, &cfg.load) {
            Ok(m) => (Some(MetricsReport::from(&m)), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let last = output.trace.last();
    let report = RunReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_digest: cfg.digest(),
        metrics,
        run: RunMeta {
            controller: kind_name(cfg.controller.kind).into(),
            model: mode_name(cfg.integration.mode).into(),
            dt_s: cfg.integration.step(),
            steps: output.steps,
            samples: output.trace.len(),
            t_final_s: output.final_state.t,
            wall_time_s: wall,
            fault: output.fault.as_ref().map(|f| f.to_string()),
            metrics_note: note,
            dcm_steps: output.dcm_steps,
            uncovered_evaluations: output.uncovered_evaluations,
            final_soc: last.map(|s| s.soc),
        },
        energy: EnergyReport::from(&output),
        config: cfg.clone(),
    };
    Ok(Executed { output, report })
}

fn column(trace: &Trace, f: impl Fn(&hesm_core::sim::TraceSample) -> f64) -> Vec<(f64, f64)> {
    trace.samples.iter().map(|s| (s.t, f(s))).collect()
}

pub fn bus_voltage_chart(trace: &Trace, v_ref: f64) -> Chart {
    let t_end = trace.last().map_or(0.0, |s| s.t);
    Chart::new("DC bus voltage", "time (s)", "voltage (V)")
        .with(Series::new("v_bus", PALETTE[0], column(trace, |s| s.v_bus)))
        .with(Series::new("v_ref", PALETTE[5], vec![(0.0, v_ref), (t_end, v_ref)]).dashed())
}

pub fn currents_chart(trace: &Trace) -> Chart {
    Chart::new("Currents", "time (s)", "current (A)")
        .with(Series::new("load", PALETTE[5], column(trace, |s| -s.zeta)))
        .with(Series::new("i_batt", PALETTE[0], column(trace, |s| s.i_batt)))
        .with(Series::new("i_uc", PALETTE[1], column(trace, |s| s.i_uc)))
        .with(Series::new("i_limit", PALETTE[2], column(trace, |s| s.i_limit)).dashed())
}

pub fn trace_file(cfg: &Config, out_dir: &Path) -> PathBuf {
    let p = Path::new(&cfg.output.trace_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

/// Runs one configuration and writes the trace, `report.json` and, when
/// enabled, the two plots. A faulted run still writes everything it has,
/// then reports the fault as an error.
pub fn cmd_run(cfg: &Config, out_dir: &Path) -> Result<RunReport, CliError> {
    ensure_dir(out_dir)?;
    let Executed { output, report } = execute(cfg)?;
    write_with(&trace_file(cfg, out_dir), |w| table::write_trace(w, &output.trace))?;
    write_json(&out_dir.join("report.json"), &report)?;
    if cfg.output.plots {
        write_text(&out_dir.join("bus_voltage.svg"), &bus_voltage_chart(&output.trace, cfg.controller.v_ref).render())?;
        write_text(&out_dir.join("currents.svg"), &currents_chart(&output.trace).render())?;
    }
    match &report.run.fault {
        Some(f) => Err(CliError::Fault(f.clone())),
        None => Ok(report),
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn first_difference(a: &Value, b: &Value, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => x.iter().find_map(|(k, va)| {
            let sub = format!("{path}.{k}");
            match y.get(k) {
                Some(vb) => first_difference(va, vb, &sub),
                None => Some(sub),
            }
        }),
        _ if a != b => Some(path.to_string()),
        _ => None,
    }
}

/// Runs both configurations on the same load profile and reports the
/// improvement of `b` over `a`.
pub fn cmd_compare(a: &Config, b: &Config, out_dir: &Path) -> Result<CompareReport, CliError> {
    if a.load != b.load {
        let va = serde_json::to_value(&a.load).expect("load serializes");
        let vb = serde_json::to_value(&b.load).expect("load serializes");
        let key = first_difference(&va, &vb, "load").unwrap_or_else(|| "load".into());
        return Err(CliError::Mismatch(format!(
            "configs use different load profiles (first difference at `{key}`); the comparison would be meaningless"
        )));
    }
    ensure_dir(out_dir)?;
    let (ra, rb) = rayon::join(|| execute(a), || execute(b));
    let (ea, eb) = (ra?, rb?);

    let improvement = match (&ea.report.metrics, &eb.report.metrics) {
        (Some(ma), Some(mb)) => compare(&ma.metrics(), &mb.metrics()).into(),
        _ => ImprovementReport { swing_pct: None, sag_pct: None },
    };
    let label = |tag: &str, r: &RunReport| format!("{tag}: {}", r.run.controller);
    let overlay = Chart::new("DC bus voltage", "time (s)", "voltage (V)")
        .with(Series::new(&label("a", &ea.report), PALETTE[1], column(&ea.output.trace, |s| s.v_bus)))
        .with(Series::new(&label("b", &eb.report), PALETTE[0], column(&eb.output.trace, |s| s.v_bus)));
    write_text(&out_dir.join("bus_voltage_overlay.svg"), &overlay.render())?;

    let report = CompareReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        a: ea.report,
        b: eb.report,
        improvement,
    };
    write_json(&out_dir.join("compare.json"), &report)?;
    for (tag, r) in [("a", &report.a), ("b", &report.b)] {
        if let Some(f) = &r.run.fault {
            return Err(CliError::Fault(format!("config {tag}: {f}")));
        }
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

/// Plain-text side-by-side table of a comparison.
pub fn compare_table(r: &CompareReport) -> String {
    let m = |rep: &RunReport, f: fn(&MetricsReport) -> Option<f64>| {
        rep.metrics.as_ref().and_then(f).map(|v| format!("{v:.4}")).unwrap_or_default()
    };
    type Row<'a> = (&'a str, fn(&MetricsReport) -> Option<f64>, Option<f64>);
    let rows: [Row; 4] = [
        ("swing (V)", |m| Some(m.swing_v), r.improvement.swing_pct),
        ("  phase a (V)", |m| m.swing_phase_a_v, None),
        ("  phase b (V)", |m| m.swing_phase_b_v, None),
        ("sag (V)", |m| m.sag_v, r.improvement.sag_pct),
    ];
    let mut out = format!(
        "{:<14} {:>12} {:>12} {:>14}\n",
        "metric",
        format!("a: {}", r.a.run.controller),
        format!("b: {}", r.b.run.controller),
        "improvement %"
    );
    for (name, f, imp) in rows {
        out.push_str(&format!("{name:<14} {:>12} {:>12} {:>14}\n", m(&r.a, f), m(&r.b, f), imp.map(|p| format!("{p:.1}")).unwrap_or_default()));
    }
    out
}

// ---------------------------------------------------------------------------
// surface
// ---------------------------------------------------------------------------

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

/// Evaluates the FLC over an `res` x `res` grid spanning both input universes.
/// Rows are ordered by bus voltage, then HESM current.
pub fn flc_surface(cfg: &Config, res: usize) -> Result<Vec<[f64; 3]>, CliError> {
    if cfg.controller.kind != SupervisorKind::Flc {
        return Err(CliError::Refused("surface needs controller.kind = \"flc\"; the if-then supervisor has no inference surface".into()));
    }
    if res < 2 {
        return Err(CliError::Refused(format!("--res must be at least 2 (got {res})")));
    }
    let fc = FuzzyController::at_path(cfg.controller.flc.clone(), "controller.flc")?;
    let [v_lo, v_hi] = fc.def().bus_voltage.universe;
    let [i_lo, i_hi] = fc.def().hesm_current.universe;
    Ok(grid(v_lo, v_hi, res)
        .flat_map(|v| grid(i_lo, i_hi, res).map(move |i| (v, i)))
        .map(|(v, i)| [v, i, infer(&fc, v, i)])
        .collect())
}

pub fn cmd_surface(cfg: &Config, out_file: &Path, res: usize) -> Result<usize, CliError> {
    let rows = flc_surface(cfg, res)?;
    write_with(out_file, |w| table::write_surface(w, &rows))?;
    Ok(rows.len())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub const SWEEP_HEADER: [&str; 7] = ["value", "swing_V", "swing_phase_a_V", "swing_phase_b_V", "sag_V", "fault", "config_digest"];

/// Splits a comma-separated list; each item is read as JSON when it parses
/// and as a bare string otherwise. A list starting with `[` is read as one
/// JSON array.
pub fn parse_values(list: &str) -> Result<Vec<Value>, CliError> {
    let list = list.trim();
    if list.starts_with('[') {
        return match serde_json::from_str::<Value>(list) {
            Ok(Value::Array(v)) if !v.is_empty() => Ok(v),
            _ => Err(CliError::Refused(format!("--values `{list}` is not a non-empty JSON array"))),
        };
    }
    let values: Vec<Value> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
        .collect();
    if values.is_empty() {
        return Err(CliError::Refused("--values is empty".into()));
    }
    Ok(values)
}

/// Parallelism cap from `HESM_SIM_THREADS`; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("HESM_SIM_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Refused(format!("HESM_SIM_THREADS must be a positive integer (got `{s}`)"))),
        },
    }
}

/// Builds one configuration per value of `key`, validates them all, then runs
/// them on a pool of at most `threads` workers. Results keep the order of
/// `values` whatever the thread count.
pub fn cmd_sweep(base: &Config, key: &str, values: &[Value], out_dir: &Path, threads: Option<usize>) -> Result<SweepReport, CliError> {
    let configs = values
        .iter()
        .map(|v| {
            let mut tree = base.to_value();
            set_path(&mut tree, key, v.clone())?;
            from_value(tree)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Refused(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunReport, CliError>> = pool.install(|| configs.par_iter().map(|c| execute(c).map(|e| e.report)).collect());

    let entries: Vec<SweepEntry> = values
        .iter()
        .zip(results)
        .map(|(v, r)| match r {
            Ok(report) => SweepEntry { value: v.clone(), report: Some(report), error: None },
            Err(e) => SweepEntry { value: v.clone(), report: None, error: Some(e.to_string()) },
        })
        .collect();

    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            let value = match &e.value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let m = e.report.as_ref().and_then(|r| r.metrics.as_ref());
            let fault = e.report.as_ref().and_then(|r| r.run.fault.clone()).or_else(|| e.error.clone());
            vec![
                value,
                opt(m.map(|m| m.swing_v)),
                opt(m.and_then(|m| m.swing_phase_a_v)),
                opt(m.and_then(|m| m.swing_phase_b_v)),
                opt(m.and_then(|m| m.sag_v)),
                fault.unwrap_or_default(),
                e.report.as_ref().map(|r| r.config_digest.clone()).unwrap_or_default(),
            ]
        })
        .collect();

    ensure_dir(out_dir)?;
    write_with(&out_dir.join("sweep.csv"), |w| table::write_rows(w, &SWEEP_HEADER, &rows))?;
    let report = SweepReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        key: key.into(),
        threads: pool.current_num_threads(),
        entries,
    };
    write_json(&out_dir.join("sweep.json"), &report)?;

    let failed = rows.iter().filter(|r| !r[5].is_empty()).count();
    if failed > 0 {
        return Err(CliError::Fault(format!("{failed} of {} sweep runs faulted", rows.len())));
    }
    Ok(report)
}
