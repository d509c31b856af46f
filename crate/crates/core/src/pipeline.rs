//! End-to-end run of a scenario and refinement studies built on it.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::abel::{build_weights, AbelWeights};
use crate::charge::{manufactured_charge, manufactured_source, solve_marching, source_f0, ChargeTrajectory, SourceRoute};
use crate::diagnostics::*;
use crate::error::{Error, Result};
use crate::model::{ComplexSignal, Scenario, TimeGrid};
use crate::propagator::trace_at;
use crate::reconstruction::{jump_at_origin, DuhamelRule, Reconstructor, WavefunctionFrame};
use crate::scalar::Real;

/// Largest time-step count a refinement study may request.
pub const MAX_STUDY_STEPS: usize = 1 << 16;
/// Memory ceiling for the cached kernel table, in bytes.
pub const MAX_TABLE_BYTES: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions<T> {
    /// Frame times; must be time nodes. `None` picks 17 evenly spaced nodes.
    pub frames: Option<Vec<T>>,
    pub route: SourceRoute,
    pub rule: DuhamelRule,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        Self { frames: None, route: SourceRoute::Phi0, rule: DuhamelRule::ProductMidpoint }
    }
}

pub struct RunOutput<T> {
    pub trajectory: ChargeTrajectory<T>,
    pub frames: Vec<WavefunctionFrame<T>>,
    pub report: DiagnosticsReport,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
}

/// Node indices for the requested frame times.
pub fn frame_nodes<T: Real>(grid: &TimeGrid<T>, frames: Option<&[T]>) -> Result<Vec<usize>> {
    match frames {
        None => {
            let count = grid.n_steps.min(16);
            let mut v: Vec<usize> = (0..=count).map(|k| k * grid.n_steps / count).collect();
            v.dedup();
            Ok(v)
        }
        Some(ts) => ts.iter().map(|t| grid.index_of(*t).ok_or(Error::NotAGridNode(t.to_f64_lossy()))).collect(),
    }
}

fn table_guard<T: Real>(scenario: &Scenario<T>, rows: usize) -> Result<()> {
    let bytes = rows * (scenario.spatial_grid.n_points / 2 + 1) * 2 * std::mem::size_of::<T>();
    if bytes > MAX_TABLE_BYTES {
        return Err(Error::ResourceGuard(format!("kernel table would need {bytes} bytes")));
    }
    Ok(())
}

/// Solves the charge equation for the scenario's datum.
pub fn solve_charge<T: Real>(scenario: &Scenario<T>, weights: &AbelWeights<T>, route: SourceRoute) -> Result<ChargeTrajectory<T>> {
    let f0 = source_f0(&scenario.datum, weights, route)?;
    solve_marching(&f0, &scenario.gamma, weights)?.with_q_dot()
}

pub fn run_scenario<T: Real>(scenario: &Scenario<T>, options: &RunOptions<T>) -> Result<RunOutput<T>> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };
    let grid = scenario.time_grid;
    let space = scenario.spatial_grid;
    let nodes = frame_nodes(&grid, options.frames.as_deref())?;
    let weights = build_weights(&grid);
    lap("weights", &mut timings);
    let trace = trace_at(&scenario.datum.phi0, &grid.nodes(), None)?;
    let f0 = source_f0(&scenario.datum, &weights, options.route)?;
    lap("source", &mut timings);
    let trajectory = solve_marching(&f0, &scenario.gamma, &weights)?.with_q_dot()?;
    lap("charge", &mut timings);

    let edge = T::lit(scenario.tolerances.get("field_edge_mass"));
    let max_node = nodes.iter().copied().max().unwrap_or(0);
    table_guard(scenario, max_node + 1)?;
    let rec = Reconstructor::new(&trajectory, &scenario.datum, space, edge)
        .with_rule(options.rule)
        .with_cache(max_node);
    lap("kernel_table", &mut timings);
    let frames = nodes.iter().map(|&n| rec.frame(n)).collect::<Result<Vec<_>>>()?;
    lap("frames", &mut timings);

    let f = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<f64>>();
    let norm = norm_conservation(&frames, &space)?;
    let bc = boundary_residual(&rec, &trajectory, &scenario.gamma, &weights, &trace);
    let energy = if scenario.gamma.is_constant() { Some(energy_trace(&rec, &frames, &scenario.gamma)?) } else { None };
    let mut gagliardo = BTreeMap::new();
    let gs = ComplexSignal::new(grid.nodes(), scenario.gamma.sample(&grid).into_iter().map(|v| num_complex::Complex::new(v, T::zero())).collect())?;
    for nu in [0.75, 0.95] {
        gagliardo.insert(format!("gamma@{nu}"), gagliardo_seminorm(&gs, T::lit(nu))?.to_f64_lossy());
    }
    gagliardo.insert("q@0.75".into(), gagliardo_seminorm(&trajectory.q_signal(), T::lit(0.75))?.to_f64_lossy());
    let report = DiagnosticsReport {
        frame_times: frames.iter().map(|fr| fr.t.to_f64_lossy()).collect(),
        max_norm_drift: max_drift(&norm).to_f64_lossy(),
        norm_trace: f(&norm),
        max_boundary_residual: bc.raw.iter().copied().fold(T::zero(), T::max).to_f64_lossy(),
        boundary_residual: f(&bc.raw),
        max_smoothed_residual: bc.smoothed.iter().copied().fold(T::zero(), T::max).to_f64_lossy(),
        smoothed_residual: f(&bc.smoothed),
        frame_boundary_residual: f(&frame_boundary_residual(&frames, &space, &scenario.gamma)),
        jump_error: frames.iter().map(|fr| (jump_at_origin(&space, &fr.psi) - fr.q).norm().to_f64_lossy()).collect(),
        energy_drift: energy.as_ref().map(|e| relative_energy_drift(e).to_f64_lossy()),
        energy_trace: energy.as_ref().map(|e| f(e)),
        convergence_table: Vec::new(),
        gagliardo,
    };
    lap("diagnostics", &mut timings);
    Ok(RunOutput { trajectory, frames, report, timings })
}

fn with_steps<T: Real>(scenario: &Scenario<T>, n_steps: usize) -> Scenario<T> {
    let mut s = scenario.clone();
    s.time_grid = TimeGrid { t_final: scenario.time_grid.t_final, n_steps };
    s
}

/// Runs the scenario at `n, 2n, …, 2^{refinements−1}n` steps and tabulates the observable.
/// Charge errors are measured against the manufactured solution when the scenario has one,
/// otherwise against one further refinement.
pub fn convergence_study<T: Real>(scenario: &Scenario<T>, refinements: usize, observable: Observable) -> Result<Vec<ConvergenceRow>> {
    if refinements < 2 {
        return Err(Error::InvalidArgument(format!("refinements must be at least 2, got {refinements}")));
    }
    let base = scenario.time_grid.n_steps;
    let extra = usize::from(observable == Observable::Charge && scenario.manufactured.is_none());
    let finest = base.checked_shl((refinements - 1 + extra) as u32).unwrap_or(usize::MAX);
    if finest > MAX_STUDY_STEPS || finest / base != 1 << (refinements - 1 + extra) {
        return Err(Error::ResourceGuard(format!("finest grid would need {finest} steps; limit is {MAX_STUDY_STEPS}")));
    }
    let steps: Vec<usize> = (0..refinements).map(|k| base << k).collect();
    let mut rows = Vec::with_capacity(refinements);
    match observable {
        Observable::Charge => {
            if let Some(m) = scenario.manufactured {
                let q_star = manufactured_charge(T::lit(m.omega));
                for &n in &steps {
                    let s = with_steps(scenario, n);
                    let w = build_weights(&s.time_grid);
                    let f0 = manufactured_source(&q_star, &s.gamma, &s.time_grid)?;
                    let tr = solve_marching(&f0, &s.gamma, &w)?;
                    let e = s.time_grid.nodes().iter().zip(&tr.q).map(|(t, q)| (*q - q_star(*t)).norm()).fold(T::zero(), T::max);
                    rows.push((n, s.time_grid.step().to_f64_lossy(), e.to_f64_lossy()));
                }
            } else {
                let reference = {
                    let s = with_steps(scenario, finest);
                    solve_charge(&s, &build_weights(&s.time_grid), SourceRoute::Phi0)?
                };
                for &n in &steps {
                    let s = with_steps(scenario, n);
                    let tr = solve_charge(&s, &build_weights(&s.time_grid), SourceRoute::Phi0)?;
                    let e = tr.max_error_against(&reference, finest / n);
                    rows.push((n, s.time_grid.step().to_f64_lossy(), e.to_f64_lossy()));
                }
            }
        }
        Observable::NormDrift => {
            for &n in &steps {
                let s = with_steps(scenario, n);
                let out = run_scenario(&s, &RunOptions::default())?;
                rows.push((n, s.time_grid.step().to_f64_lossy(), out.report.max_norm_drift));
            }
        }
        Observable::Boundary => {
            for &n in &steps {
                let s = with_steps(scenario, n);
                let w = build_weights(&s.time_grid);
                let tr = solve_charge(&s, &w, SourceRoute::Phi0)?;
                let trace = trace_at(&s.datum.phi0, &s.time_grid.nodes(), None)?;
                let rec = Reconstructor::new(&tr, &s.datum, s.spatial_grid, T::one());
                let bc = boundary_residual(&rec, &tr, &s.gamma, &w, &trace);
                let e = bc.smoothed.iter().copied().fold(T::zero(), T::max);
                rows.push((n, s.time_grid.step().to_f64_lossy(), e.to_f64_lossy()));
            }
        }
    }
    Ok(with_orders(rows))
}
