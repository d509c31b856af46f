//! Acceptance gate. Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use deltaprime::abel::{build_weights, half_integral, half_integral_singular, inverse_sqrt_samples};
use deltaprime::charge::{solve_dense, solve_marching, source_f0, manufactured_source, manufactured_charge, SourceRoute};
use deltaprime::diagnostics::{action_modulus, gagliardo_seminorm, Observable};
use deltaprime::pipeline::{convergence_study, run_scenario, RunOptions, RunOutput};
use deltaprime::reconstruction::Reconstructor;
use deltaprime::special::{fresnel, fresnel_limit};
use deltaprime::*;
use num_complex::Complex64;

const UNITARITY: &str = include_str!("../../../scenarios/unitarity.json");
const CONSTANT: &str = include_str!("../../../scenarios/constant_gamma.json");
const ROUGH: &str = include_str!("../../../scenarios/rough_gamma.json");
const MANUFACTURED: &str = include_str!("../../../scenarios/manufactured.json");
const SMALL: &str = include_str!("../../../scenarios/small.json");

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn report(&mut self, id: u32, title: &str, pass: bool, detail: String) {
        println!("[{}] {id:>2} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn scenario(text: &str) -> Scenario<f64> {
    Scenario::from_config(&ScenarioConfig::from_json(text).unwrap()).unwrap()
}

fn with_steps(s: &Scenario<f64>, n: usize) -> Scenario<f64> {
    let mut s = s.clone();
    s.time_grid = TimeGrid::new(s.time_grid.t_final, n).unwrap();
    s
}

fn orders(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_orders(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2}")).collect();
    format!("[{}]", parts.join(", "))
}

fn abel_identities(gate: &mut Gate) {
    let clock = Instant::now();
    let one = Complex64::new(1.0, 0.0);
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let analytic = half_integral_singular(one, &build_weights(&grid)).values.iter().map(|v| (v - one).norm()).fold(0.0, f64::max);
    let raw: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let v = half_integral(&inverse_sqrt_samples(one, &grid), &build_weights(&grid)).unwrap();
            (v.values[n] - one).norm()
        })
        .collect();
    let twice: Vec<(f64, f64)> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let w = build_weights(&grid);
            let cos = ComplexSignal::on_time_grid(&grid, grid.nodes().iter().map(|s: &f64| Complex64::new(s.cos(), 0.0)).collect()).unwrap();
            let v = half_integral(&half_integral(&cos, &w).unwrap(), &w).unwrap();
            let err: Vec<f64> = grid.nodes().iter().zip(&v.values).map(|(t, v)| (v - t.sin()).norm()).collect();
            (err.iter().copied().fold(0.0, f64::max), err[n])
        })
        .collect();
    let secs = clock.elapsed().as_secs_f64();
    let raw_orders = orders(&raw);
    let twice_orders = orders(&twice.iter().map(|e| e.1).collect::<Vec<_>>());
    let pass = analytic <= 1e-10
        && raw[0] <= 5e-2
        && raw_orders.iter().all(|p| *p >= 0.5)
        && twice[2].0 <= 1e-3
        && twice_orders.iter().all(|p| *p >= 1.4)
        && secs < 1.0;
    gate.report(
        1,
        "Abel identities",
        pass,
        format!(
            "analytic {analytic:.1e} (≤1e-10); raw at T {} orders {} (≤5e-2, ≥0.5); I²cos max {:.2e} at N=1024 (≤1e-3), orders at T {} (≥1.4); {secs:.2}s (<1s)",
            fmt(&raw),
            fmt_orders(&raw_orders),
            twice[2].0,
            fmt_orders(&twice_orders)
        ),
    );
}

fn fresnel_oracle(gate: &mut Gate) {
    let clock = Instant::now();
    let at_one = (fresnel(1.0f64) - Complex64::new(0.904_524_237_9, 0.310_268_301_7)).norm();
    let limit = fresnel_limit::<f64>();
    let worst = (0..100)
        .map(|k| {
            let z = 10f64.powf(6.0 * k as f64 / 99.0);
            (fresnel(z) - limit).norm() * z
        })
        .fold(0.0, f64::max);
    let secs = clock.elapsed().as_secs_f64();
    gate.report(
        2,
        "Fresnel oracle",
        at_one <= 1e-9 && worst <= 1.0 && secs < 1.0,
        format!("|F(1) − ref| {at_one:.1e} (≤1e-9); max z·|F(z) − F(∞)| {worst:.3} (≤1); {secs:.3}s (<1s)"),
    );
}

fn manufactured(gate: &mut Gate) {
    let clock = Instant::now();
    let s = with_steps(&scenario(MANUFACTURED), 256);
    let rows = convergence_study(&s, 4, Observable::Charge).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let p: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    gate.report(
        3,
        "manufactured charge",
        e[3] <= 1e-3 && p.len() == 3 && p.iter().all(|p| *p >= 1.4) && secs < 10.0,
        format!("errors N=256..2048 {} (≤1e-3 at 2048), orders {} (≥1.4); {secs:.2}s (<10s)", fmt(&e), fmt_orders(&p)),
    );
}

fn marching_dense(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let unitarity = scenario(UNITARITY);
    let mut cases: Vec<Scenario<f64>> = [UNITARITY, CONSTANT, ROUGH, MANUFACTURED, SMALL].iter().map(|t| scenario(t)).collect();
    cases.push(with_steps(&unitarity, 512));
    for s in &cases {
        let w = build_weights(&s.time_grid);
        let f0 = match s.manufactured {
            Some(m) => manufactured_source(manufactured_charge(m.omega), &s.gamma, &s.time_grid).unwrap(),
            None => source_f0(&s.datum, &w, SourceRoute::Phi0).unwrap(),
        };
        let a = solve_marching(&f0, &s.gamma, &w).unwrap();
        let b = solve_dense(&f0, &s.gamma, &w).unwrap();
        let d = a.q.iter().zip(&b.q).map(|(x, y)| (x - y).norm() / x.norm().max(1.0)).fold(0.0, f64::max);
        worst = worst.max(d);
        count += 1;
    }
    gate.report(4, "marching equals dense", worst <= 1e-12, format!("max relative difference {worst:.1e} over {count} scenarios (≤1e-12)"));
}

fn source_routes(gate: &mut Gate) {
    let s = scenario(UNITARITY);
    let steps = [256usize, 512, 1024, 2048];
    let diffs: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let w = build_weights(&TimeGrid::new(1.0, n).unwrap());
            let a = source_f0(&s.datum, &w, SourceRoute::Phi0).unwrap();
            let b = source_f0(&s.datum, &w, SourceRoute::Psi0).unwrap();
            a.max_abs_diff(&b)
        })
        .collect();
    // |Δ| ≤ C·h with C measured; an order is only observable above round-off
    let c = diffs.iter().zip(&steps).map(|(d, n)| d * *n as f64).fold(0.0, f64::max);
    let roundoff = diffs.iter().all(|d| *d <= 1e3 * f64::EPSILON);
    let p = orders(&diffs);
    let shrinking = p.iter().all(|p| *p >= 1.0);
    let detail = if roundoff {
        format!("differences {} at N=256..2048 (≤5e-3); routes coincide to round-off, C = max|Δ|/h = {c:.1e}, order not observable", fmt(&diffs))
    } else {
        format!("differences {} (≤5e-3 at 2048), orders {} (≥1)", fmt(&diffs), fmt_orders(&p))
    };
    gate.report(5, "source-route equivalence", diffs[3] <= 5e-3 && (shrinking || roundoff), detail);
}

/// Frame times: sixteen evenly spaced nodes, each followed by the next node.
fn paired_frames(grid: &TimeGrid<f64>) -> Vec<f64> {
    let n = grid.n_steps;
    let mut nodes: Vec<usize> = (0..16).flat_map(|k| [k * n / 16, k * n / 16 + 1]).collect();
    nodes.push(n);
    nodes.into_iter().map(|m| grid.node(m)).collect()
}

fn unitarity_runs() -> Vec<(usize, RunOutput<f64>, f64)> {
    let base = scenario(UNITARITY);
    [512usize, 1024, 2048]
        .iter()
        .map(|&n| {
            let s = with_steps(&base, n);
            let clock = Instant::now();
            let out = run_scenario(&s, &RunOptions { frames: Some(paired_frames(&s.time_grid)), ..RunOptions::default() }).unwrap();
            (n, out, clock.elapsed().as_secs_f64())
        })
        .collect()
}

fn unitarity(gate: &mut Gate, runs: &[(usize, RunOutput<f64>, f64)]) {
    let drift: Vec<f64> = runs.iter().map(|r| r.1.report.max_norm_drift).collect();
    let ratios: Vec<f64> = drift.windows(2).map(|w| w[0] / w[1]).collect();
    let secs = runs[2].2;
    gate.report(
        6,
        "unitarity",
        drift[2] <= 1e-3 && ratios.iter().all(|r| *r >= 2.0) && secs < 120.0,
        format!("max drift N=512,1024,2048 {} (≤1e-3), ratios {} (≥2); N=2048 run {secs:.1}s (<120s)", fmt(&drift), fmt_orders(&ratios)),
    );
}

fn boundary(gate: &mut Gate, runs: &[(usize, RunOutput<f64>, f64)]) {
    let r: Vec<f64> = runs.iter().map(|r| r.1.report.max_smoothed_residual).collect();
    gate.report(
        7,
        "boundary condition",
        r[2] <= 1e-3 && r.windows(2).all(|w| w[1] < w[0]),
        format!("max smoothed residual N=512,1024,2048 {} (≤1e-3, decreasing)", fmt(&r)),
    );
}

fn energy(gate: &mut Gate) {
    // the drift is set by the spatial resolution of ‖φ′‖², so space and time are refined together
    let base = scenario(CONSTANT);
    let (n0, p0) = (base.time_grid.n_steps, base.spatial_grid.n_points);
    let drift: Vec<f64> = [1usize, 2, 4]
        .iter()
        .map(|&k| {
            let mut s = with_steps(&base, k * n0);
            s.spatial_grid = SpatialGrid::new(s.spatial_grid.half_width, k * p0).unwrap();
            run_scenario(&s, &RunOptions::default()).unwrap().report.energy_drift.unwrap()
        })
        .collect();
    let ratios: Vec<f64> = drift.windows(2).map(|w| w[0] / w[1]).collect();
    gate.report(
        8,
        "energy conservation",
        drift[0] <= 1e-2 && ratios.iter().all(|r| *r >= 2.0),
        format!(
            "relative drift at (N, points) = ({n0}, {p0}) ×1,2,4 {} (≤1e-2 at default), ratios {} (≥2)",
            fmt(&drift),
            fmt_orders(&ratios)
        ),
    );
}

fn far_field(gate: &mut Gate, runs: &[(usize, RunOutput<f64>, f64)]) {
    let s = scenario(UNITARITY);
    let (n, out, _) = &runs[2];
    let clock = Instant::now();
    let rec = Reconstructor::new(&out.trajectory, &s.datum, s.spatial_grid, 1.0);
    let far = rec.far_field_duhamel(1.0, 2.0).unwrap();
    let frame = out.frames.iter().find(|f| f.node == *n).unwrap();
    let space = s.spatial_grid;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, v) in far.nodes.iter().zip(&far.values) {
        let j = (space.zero_index() as i64 + (x / space.dx()).round() as i64) as usize;
        num += (v - frame.psi.values[j]).norm_sqr();
        den += v.norm_sqr();
    }
    let rel = (num / den).sqrt();
    gate.report(
        9,
        "far-field route equivalence",
        rel <= 1e-2,
        format!("relative L² on |x| ≥ 2 at T {rel:.2e} (≤1e-2); {:.1}s", clock.elapsed().as_secs_f64()),
    );
}

fn rough(gate: &mut Gate) {
    let s = scenario(ROUGH);
    let out = run_scenario(&s, &RunOptions::default());
    let drift = out.as_ref().map(|o| o.report.max_norm_drift);
    let mut low = Vec::new();
    let mut high = Vec::new();
    let seed = match ScenarioConfig::from_json(ROUGH).unwrap().gamma {
        GammaConfig::RoughFourier { seed, .. } => seed,
        _ => unreachable!(),
    };
    for k in 0..4 {
        let modes = 64 << k;
        let gamma = synthesize_rough_gamma::<f64>(seed, 0.8, modes, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 16 * modes).unwrap();
        let sig = ComplexSignal::on_time_grid(&grid, gamma.sample(&grid).into_iter().map(|g| Complex64::new(g, 0.0)).collect()).unwrap();
        low.push(gagliardo_seminorm(&sig, 0.75).unwrap());
        high.push(gagliardo_seminorm(&sig, 0.95).unwrap());
    }
    // growth exponent per doubling of modes: log₂ of successive seminorm ratios. Coefficients
    // decaying like k^{−(s+0.51)} predict max(0, ν − s − 0.01), i.e. 0 for ν = 3/4, 0.14 for ν = 0.95.
    let growth = |v: &[f64]| v.windows(2).map(|w| (w[1] / w[0]).log2()).collect::<Vec<f64>>();
    let (dl, dh) = (growth(&low), growth(&high));
    let (pl, ph) = (0.0, 0.95 - 0.8 - 0.01);
    let nearer = |g: f64, own: f64, other: f64| (g - own).abs() < (g - other).abs();
    let stable = dl.windows(2).all(|w| w[1] < w[0]) && nearer(dl[dl.len() - 1], pl, ph);
    let growing = dh.iter().all(|g| *g > 0.0) && nearer(dh[dh.len() - 1], ph, pl);
    let pass = matches!(drift, Ok(d) if d <= 1e-2) && stable && growing;
    let drift = match drift {
        Ok(d) => format!("{d:.2e}"),
        Err(e) => e.to_string(),
    };
    gate.report(
        10,
        "rough coupling",
        pass,
        format!(
            "drift {drift} (≤1e-2); M=64..512 modes: [γ]_3/4 {} growth {} (decreasing, nearer 0 than {ph:.2}), [γ]_0.95 {} growth {} (nearer {ph:.2} than 0)",
            fmt(&low),
            fmt_orders(&dl),
            fmt(&high),
            fmt_orders(&dh)
        ),
    );
}

fn action(gate: &mut Gate, runs: &[(usize, RunOutput<f64>, f64)]) {
    let m: Vec<f64> = runs
        .iter()
        .map(|(_, out, _)| {
            let pairs: Vec<_> = out.frames.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0].clone(), c[1].clone())).collect();
            action_modulus(&pairs, &scenario(UNITARITY).spatial_grid).unwrap()
        })
        .collect();
    gate.report(
        11,
        "continuity of the Hamiltonian action",
        m.windows(2).all(|w| w[1] < w[0]),
        format!("sup over 16 sampled t of ‖Hψ(t+h) − Hψ(t)‖ at N=512,1024,2048 {} (decreasing)", fmt(&m)),
    );
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: Vec::new() };
    abel_identities(&mut gate);
    fresnel_oracle(&mut gate);
    manufactured(&mut gate);
    marching_dense(&mut gate);
    source_routes(&mut gate);
    let runs = unitarity_runs();
    unitarity(&mut gate, &runs);
    boundary(&mut gate, &runs);
    energy(&mut gate);
    far_field(&mut gate, &runs);
    rough(&mut gate);
    action(&mut gate, &runs);
    if gate.failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {:?}", gate.failed);
        ExitCode::FAILURE
    }
}
