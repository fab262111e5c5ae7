use hesm_core::sim::{Improvement, Metrics, RunOutput};
use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub swing_v: f64,
    pub swing_phase_a_v: Option<f64>,
    pub swing_phase_b_v: Option<f64>,
    pub sag_v: Option<f64>,
}

impl From<&Metrics> for MetricsReport {
    fn from(m: &Metrics) -> Self {
        Self {
            swing_v: m.swing,
            swing_phase_a_v: m.swing_phase_a,
            swing_phase_b_v: m.swing_phase_b,
            sag_v: m.sag,
        }
    }
}

impl MetricsReport {
    pub fn metrics(&self) -> Metrics {
        Metrics {
            swing_phase_a: self.swing_phase_a_v,
            swing_phase_b: self.swing_phase_b_v,
            swing: self.swing_v,
            sag: self.sag_v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub controller: String,
    pub model: String,
    pub dt_s: f64,
    pub steps: u64,
    pub samples: usize,
    pub t_final_s: f64,
    pub wall_time_s: f64,
    pub fault: Option<String>,
    /// Set when the trace was too short for swing or sag.
    pub metrics_note: Option<String>,
    pub dcm_steps: u64,
    pub uncovered_evaluations: u64,
    pub final_soc: Option<f64>,
}

/// Energy bookkeeping over the run, J.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub battery_j: f64,
    pub ultracap_j: f64,
    pub load_j: f64,
    pub losses_j: f64,
    pub stored_delta_j: f64,
    pub residual_j: f64,
    pub gross_j: f64,
    /// Residual as a fraction of gross throughput.
    pub residual_fraction: f64,
}

impl From<&RunOutput> for EnergyReport {
    fn from(o: &RunOutput) -> Self {
        let e = &o.energy;
        let residual = o.energy_residual();
        Self {
            battery_j: e.battery,
            ultracap_j: e.ultracap,
            load_j: e.load,
            losses_j: e.losses,
            stored_delta_j: o.stored_final - o.stored_initial,
            residual_j: residual,
            gross_j: e.gross,
            residual_fraction: if e.gross > 0.0 { residual.abs() / e.gross } else { 0.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    pub metrics: Option<MetricsReport>,
    pub run: RunMeta,
    pub energy: EnergyReport,
    pub config: Config,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub swing_pct: Option<f64>,
    pub sag_pct: Option<f64>,
}

impl From<Improvement> for ImprovementReport {
    fn from(i: Improvement) -> Self {
        Self {
            swing_pct: i.swing_pct,
            sag_pct: i.sag_pct,
        }
    }
}

/// Side-by-side result of `compare`; improvements are of `b` over `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tool: String,
    pub version: String,
    pub a: RunReport,
    pub b: RunReport,
    pub improvement: ImprovementReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: serde_json::Value,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool: String,
    pub version: String,
    pub key: String,
    pub threads: usize,
    pub entries: Vec<SweepEntry>,
}
