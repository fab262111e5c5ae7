use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::profile::{LoadProfile, Phase};
use super::trace::Trace;
use crate::error::SimFault;

const SAG_WINDOW: f64 = 2.0;

/// Bus-voltage quality figures of one run, in volts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Worst peak-to-peak excursion over the complete cycles before the shift.
    pub swing_phase_a: Option<f64>,
    /// Same after the shift.
    pub swing_phase_b: Option<f64>,
    /// Larger of the two phase swings.
    pub swing: f64,
    /// Mean bus voltage over the first two seconds after the shift minus the
    /// mean over the final two seconds. Positive when the bus decays.
    pub sag: Option<f64>,
}

/// Percentage improvement of a candidate over a baseline. `None` where the
/// baseline figure is zero or missing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub swing_pct: Option<f64>,
    pub sag_pct: Option<f64>,
}

fn tol(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

/// Bus voltages sampled in `[a, b]`, or `[a, b)` when `open_end`.
fn window(tr: &Trace, a: f64, b: f64, open_end: bool) -> impl Iterator<Item = f64> + '_ {
    let lo = a - tol(a);
    let hi = if open_end { b - tol(b) } else { b + tol(b) };
    tr.samples
        .iter()
        .filter(move |s| s.t >= lo && if open_end { s.t < hi } else { s.t <= hi })
        .map(|s| s.v_bus)
}

fn mean_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in it {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn phase_swing(tr: &Trace, p: &LoadProfile, phase: Phase, covered: f64) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (a, b) in p.full_cycles(phase) {
        if b > covered + tol(b) {
            break;
        }
        let (mut lo, mut hi, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0);
        for v in window(tr, a, b, true) {
            lo = lo.min(v);
            hi = hi.max(v);
            n += 1;
        }
        if n >= 2 {
            let s = hi - lo;
            worst = Some(worst.map_or(s, |w: f64| w.max(s)));
        }
    }
    worst
}

/// Mean bus voltage of every complete cycle the trace covers, in time order.
pub fn cycle_means(tr: &Trace, p: &LoadProfile) -> Vec<(f64, f64)> {
    let covered = tr.last().map_or(0.0, |s| s.t);
    [Phase::A, Phase::B]
        .into_iter()
        .flat_map(|ph| p.full_cycles(ph))
        .filter(|&(_, b)| b <= covered + tol(b))
        .filter_map(|(a, b)| mean_of(window(tr, a, b, true)).map(|m| (a, m)))
        .collect()
}

pub fn compute_metrics(tr: &Trace, p: &LoadProfile) -> Result<Metrics, SimFault> {
    let covered = tr.last().map_or(0.0, |s| s.t);
    let swing_phase_a = phase_swing(tr, p, Phase::A, covered);
    let swing_phase_b = phase_swing(tr, p, Phase::B, covered);
    let swing = match (swing_phase_a, swing_phase_b) {
        (None, None) => return Err(SimFault::Metric("trace does not span a complete load cycle")),
        (a, b) => a.unwrap_or(0.0).max(b.unwrap_or(0.0)),
    };
    let sag = if p.t_end - p.t_shift >= SAG_WINDOW && covered + tol(p.t_end) >= p.t_end {
        let early = mean_of(window(tr, p.t_shift, p.t_shift + SAG_WINDOW, false));
        let late = mean_of(window(tr, p.t_end - SAG_WINDOW, p.t_end, false));
        early.zip(late).map(|(e, l)| e - l)
    } else {
        None
    };
    Ok(Metrics {
        swing_phase_a,
        swing_phase_b,
        swing,
        sag,
    })
}

fn pct(base: Option<f64>, cand: Option<f64>) -> Option<f64> {
    match (base, cand) {
        (Some(a), Some(b)) if a != 0.0 && a.is_finite() && b.is_finite() => Some((a - b) / a * 100.0),
        _ => None,
    }
}

/// Improvement of `b` over the baseline `a`.
pub fn compare(a: &Metrics, b: &Metrics) -> Improvement {
    Improvement {
        swing_pct: pct(Some(a.swing), Some(b.swing)),
        sag_pct: pct(a.sag, b.sag),
    }
}
