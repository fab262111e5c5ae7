use libm::round;

use super::config::{Mode, SimConfig};
use super::profile::load_current;
use super::trace::{flags, Trace, TraceSample};
use crate::control::{cascade_update, CascadeOutput, ControllerStack, Measured, SupervisorOutput};
use crate::error::{ConfigError, SimFault};
use crate::plant::{hesm_current, EnergyTally, Plant, PlantState};

/// Everything a run produced. A run that faulted still carries the trace up
/// to the fault.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: Trace,
    /// Integration steps completed.
    pub steps: u64,
    pub fault: Option<SimFault>,
    pub energy: EnergyTally,
    /// Energy in L, C1 and C2 at the start and end, J.
    pub stored_initial: f64,
    pub stored_final: f64,
    pub initial_state: PlantState,
    pub final_state: PlantState,
    /// Steps during which a blocking diode clamped the inductor current.
    pub dcm_steps: u64,
    /// Supervisor evaluations whose inputs activated no output set.
    pub uncovered_evaluations: u64,
}

impl RunOutput {
    /// Source energy minus load energy, losses and stored-energy change, J.
    pub fn energy_residual(&self) -> f64 {
        let e = &self.energy;
        e.battery + e.ultracap - e.load - e.losses - (self.stored_final - self.stored_initial)
    }
}

fn every(period: f64, dt: f64) -> u64 {
    let n = round(period / dt);
    if n < 1.0 {
        1
    } else {
        n as u64
    }
}

/// Fixed-step closed-loop simulation.
///
/// Each step reads the load, lets the supervisor update its battery current
/// limit when due, lets the cascade update the duty when due, logs a sample
/// when due, then advances the plant. In switched mode the duty is latched
/// once per PWM period; in averaged mode it is recomputed every step.
pub fn run(cfg: &SimConfig) -> Result<RunOutput, ConfigError> {
    cfg.validate()?;
    let mut supervisor = cfg.supervisor()?;
    let plant = Plant::new(cfg.plant.clone(), cfg.battery.clone(), cfg.ultracap.clone());
    let mut stack = ControllerStack::new(cfg.controller.cascade());

    let dt = cfg.integration.step();
    let mode = cfg.integration.mode;
    let n_steps = every(cfg.load.t_end, dt);
    let sup_every = every(1.0 / cfg.controller.supervisor_hz, dt);
    let ctrl_every = match mode {
        Mode::Switched => every(cfg.plant.pwm_period(), dt),
        Mode::Averaged => 1,
    };
    let ctrl_dt = ctrl_every as f64 * dt;
    let decimation = every(1.0 / cfg.decimation_hz, dt);

    let mut s = plant.initial_state();
    let initial_state = s;
    let stored_initial = plant.stored_energy(&s);
    let mut energy = EnergyTally::default();
    let mut trace = Trace {
        samples: alloc::vec::Vec::with_capacity((n_steps / decimation + 2) as usize),
        dt,
        decimation,
    };
    let mut limit = SupervisorOutput::default();
    let mut cmd = CascadeOutput::default();
    // duty and load over the step that ended at the current instant; the
    // bus slope seen by the supervisor is the one the trajectory arrived with,
    // and before t = 0 the plant sat unloaded
    let mut applied = None;
    let mut pending_flags = 0u8;
    let mut dcm_steps = 0u64;
    let mut uncovered_evaluations = 0u64;
    let mut fault = None;
    let mut steps = 0u64;
    let v_max = 2.0 * cfg.controller.v_ref;

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        s.t = t;
        // the load is sampled mid-step so boundaries on the step grid are exact
        let t_load = if k == n_steps { t.min(cfg.load.t_end) } else { (t + 0.5 * dt).min(cfg.load.t_end) };
        let zeta = match load_current(&cfg.load, t_load) {
            Ok(z) => z,
            Err(f) => {
                fault = Some(f);
                break;
            }
        };

        let (left_duty, left_zeta) = applied.unwrap_or((cmd.duty, 0.0));
        if k % sup_every == 0 {
            let dv = match plant.averaged_slope(&s, left_duty, left_zeta) {
                Ok(d) => d.dv_c2,
                Err(f) => {
                    fault = Some(f);
                    break;
                }
            };
            limit = supervisor.supervise(s.v_c2, hesm_current(&cfg.plant, &s, dv));
            if limit.uncovered_input_flag {
                uncovered_evaluations += 1;
                pending_flags |= flags::UNCOVERED;
            }
        }

        let ports = plant.ports(&s, zeta);
        if k % ctrl_every == 0 {
            let m = Measured {
                v_bus: s.v_c2,
                v_c1: s.v_c1,
                i_l: s.i_l,
                i_batt: ports.i_v1,
            };
            cmd = cascade_update(&mut stack, &m, &limit, ctrl_dt);
        }

        if k % decimation == 0 || k == n_steps {
            let dv = match plant.averaged_slope(&s, left_duty, left_zeta) {
                Ok(d) => d.dv_c2,
                Err(f) => {
                    fault = Some(f);
                    break;
                }
            };
            trace.samples.push(TraceSample {
                t,
                v_bus: s.v_c2,
                i_l: s.i_l,
                i_batt: ports.i_v1,
                i_uc: ports.i_v2,
                zeta,
                soc: plant.battery.soc(s.q_extracted),
                v_uc: s.v_uc,
                i_limit: limit.i_batt_limit,
                ctrl_state: cmd.direction,
                supervisor_state: supervisor.state_label(),
                flags: pending_flags,
                v_c1: s.v_c1,
                dv_bus_dt: dv,
                i_hesm: hesm_current(&cfg.plant, &s, dv),
                i_batt_ref: cmd.i_batt_ref,
                duty: cmd.duty,
            });
            pending_flags = 0;
        }
        if k == n_steps {
            break;
        }

        let report = match mode {
            Mode::Averaged => plant.step_averaged(&mut s, &mut energy, cmd.duty, zeta, dt),
            Mode::Switched => plant.step_switched(&mut s, &mut energy, cmd.duty, zeta, dt),
        };
        match report {
            Ok(r) => {
                if r.dcm {
                    dcm_steps += 1;
                    pending_flags |= flags::DCM;
                }
            }
            Err(f) => {
                fault = Some(f);
                break;
            }
        }
        steps += 1;
        applied = Some((cmd.duty, zeta));
        if !(s.v_c2 >= 0.0 && s.v_c2 <= v_max) {
            fault = Some(SimFault::Divergence { t: s.t, v_bus: s.v_c2 });
            break;
        }
    }

    Ok(RunOutput {
        trace,
        steps,
        fault,
        energy,
        stored_initial,
        stored_final: plant.stored_energy(&s),
        initial_state,
        final_state: s,
        dcm_steps,
        uncovered_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::profile::PulseLevels;

    #[test]
    fn zero_load_holds_the_bus() {
        let mut cfg = SimConfig::default();
        let zero = PulseLevels { i_high: 0.0, i_low: 0.0 };
        cfg.load.phase_a = zero;
        cfg.load.phase_b = zero;
        cfg.load.t_end = 10.0;
        cfg.load.t_shift = 5.0;
        let out = run(&cfg).unwrap();
        assert!(out.fault.is_none());
        for s in &out.trace.samples {
            assert!((s.v_bus - 24.0).abs() < 1e-3, "{} at {}", s.v_bus, s.t);
        }
    }

    #[test]
    fn samples_are_uniform_and_increasing() {
        let mut cfg = SimConfig::default();
        cfg.load.t_end = 1.0;
        cfg.load.t_shift = 0.5;
        let out = run(&cfg).unwrap();
        assert_eq!(out.steps, 20_000);
        assert_eq!(out.trace.decimation, 20);
        assert_eq!(out.trace.len(), 1001);
        for w in out.trace.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }
}
