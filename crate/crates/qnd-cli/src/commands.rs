//! The four scenario commands. Each returns its full output as a string;
//! writing and exit codes live in `main`.

use serde_json::json;

use qnd::fidelity::{gaussian_f, gaussian_g, grid_f, grid_g, statistical_fidelity};
use qnd::measurement::{
    conditional_state, effective_sigma2, inferred_distribution, measurement_kernel,
    nonselective_output, sample_outcomes, Distribution, TwoModeChain,
};
use qnd::tradeoff::{
    equal_fidelity_point, numeric_frontier, optimize_sum, physical_from_x, PhysicalOperatingPoint,
    RealizationConstraint, TradeoffPoint,
};
use qnd::{Complex64, GridSpec, GridWavefunction, SqueezeDirection, TradeoffVariable};

use crate::config::{ScenarioConfig, SignalSpec};
use crate::scenario::{build_signal, NumericError, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Shortest decimal with at least 12 significant digits that parses back to
/// the same bits.
fn fmt_float(v: f64) -> String {
    for precision in 11..=16 {
        let s = format!("{v:.precision$e}");
        if s.parse::<f64>() == Ok(v) {
            return s;
        }
    }
    format!("{v:.17e}")
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn direction_name(direction: SqueezeDirection) -> &'static str {
    match direction {
        SqueezeDirection::Squeezed => "squeezed",
        SqueezeDirection::AntiSqueezed => "antisqueezed",
    }
}

fn realization_json(point: &PhysicalOperatingPoint) -> serde_json::Value {
    json!({
        "phi": point.setup.phi(),
        "tau1": point.setup.tau1(),
        "r_star": point.setup.r_star(),
        "probe_r": point.probe.r(),
        "probe_direction": direction_name(point.probe.direction()),
        "sigma_p2": point.probe.sigma_p2(),
        "photon_number": point.photon_number,
        "x": point.x,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

const SWEEP_COLUMNS: [&str; 6] = ["x", "f", "g", "sum", "sigma_eff2", "photon_number"];

/// Frontier table over log-spaced trade-off values: fidelities from the grid
/// path, probe energy from realizing each point at the configured angle.
pub fn sweep(config: &ScenarioConfig, format: OutputFormat) -> Result<String, NumericError> {
    let scenario = Scenario::build(config)?;
    let xs = log_spaced(config.sweep.x_lo, config.sweep.x_hi, config.sweep.points);
    log::info!(
        "sweep: {} points over [{}, {}]",
        xs.len(),
        config.sweep.x_lo,
        config.sweep.x_hi
    );
    let frontier = numeric_frontier(&scenario.signal, &xs, scenario.sigma_s2)?;
    let rows: Vec<[f64; 6]> = frontier
        .iter()
        .map(|point| {
            let physical = physical_from_x(
                point.x,
                scenario.sigma_s2,
                RealizationConstraint::FixPhi(scenario.setup.phi()),
            )?;
            Ok([
                point.x,
                point.f,
                point.g,
                point.sum,
                scenario.sigma_eff2_at(point.x),
                physical.photon_number,
            ])
        })
        .collect::<Result<_, NumericError>>()?;

    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&SWEEP_COLUMNS.join(","));
            out.push('\n');
            for row in rows {
                let fields: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let doc = json!({ "columns": SWEEP_COLUMNS, "rows": rows });
            Ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

/// Finds the maximum of `F + G` and the equal-fidelity crossing, and realizes
/// the optimum both by tuning the probe at the configured angle and by tuning
/// the angle at the configured probe.
pub fn optimize(config: &ScenarioConfig, format: OutputFormat) -> Result<String, NumericError> {
    let scenario = Scenario::build(config)?;
    let closed_form = matches!(config.signal, SignalSpec::Gaussian { .. });

    let (best, equal): (TradeoffPoint, TradeoffPoint) = if closed_form {
        let f = |x: f64| gaussian_f(TradeoffVariable::new(x).expect("bracketed x"));
        let g = |x: f64| gaussian_g(TradeoffVariable::new(x).expect("bracketed x"));
        (
            optimize_sum(f, g, (0.05, 20.0))?,
            equal_fidelity_point(f, g, (0.2, 5.0))?,
        )
    } else {
        // grid objective: keep the kernel resolvable on this grid
        let x_floor = 1.2 * scenario.grid.dx() / scenario.sigma_s2.sqrt();
        let bracket = (x_floor.max(0.05), 20.0);
        let f = |x: f64| grid_f(&scenario.signal, scenario.sigma_eff2_at(x)).expect("grid F");
        let g = |x: f64| grid_g(&scenario.signal, scenario.sigma_eff2_at(x)).expect("grid G");
        (
            optimize_sum(f, g, bracket)?,
            equal_fidelity_point(f, g, (bracket.0.max(0.2), 5.0))?,
        )
    };
    log::info!("optimize: x_m = {:.4}, x_e = {:.4}", best.x, equal.x);

    let fix_phi = physical_from_x(
        best.x,
        scenario.sigma_s2,
        RealizationConstraint::FixPhi(scenario.setup.phi()),
    )?;
    let fix_probe = physical_from_x(
        best.x,
        scenario.sigma_s2,
        RealizationConstraint::FixProbe {
            r: scenario.probe.r(),
            direction: scenario.probe.direction(),
        },
    )?;

    let doc = json!({
        "objective": if closed_form { "closed-form" } else { "grid" },
        "sigma_s2": scenario.sigma_s2,
        "x_m": best.x,
        "f_m": best.f,
        "g_m": best.g,
        "sum_m": best.sum,
        "x_e": equal.x,
        "f_e": equal.f,
        "g_e": equal.g,
        "fix_phi": realization_json(&fix_phi),
        "fix_probe": realization_json(&fix_probe),
    });

    match format {
        OutputFormat::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).expect("serializable")
        )),
        OutputFormat::Csv => {
            // flattened key,value table
            let mut out = String::from("key,value\n");
            flatten_json("", &doc, &mut out);
            Ok(out)
        }
    }
}

fn flatten_json(prefix: &str, value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten_json(&path, inner, out);
            }
        }
        serde_json::Value::Number(n) => {
            let rendered = n.as_f64().map(fmt_float).unwrap_or_else(|| n.to_string());
            out.push_str(&format!("{prefix},{rendered}\n"));
        }
        serde_json::Value::String(s) => {
            out.push_str(&format!("{prefix},{s}\n"));
        }
        other => {
            out.push_str(&format!("{prefix},{other}\n"));
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// How many leading outcomes feed the mean-conditional-variance summary when
/// per-row state moments are off.
const SUMMARY_STATE_SAMPLE: usize = 1000;

/// Seeded Monte Carlo run of the chain: outcomes, their feedback parameters,
/// and summary statistics. Byte-identical output for a fixed seed.
pub fn simulate(config: &ScenarioConfig, format: OutputFormat) -> Result<String, NumericError> {
    let scenario = Scenario::build(config)?;
    let sigma_eff2 = effective_sigma2(&scenario.setup, &scenario.probe);
    let n = config.simulate.samples;
    let seed = config.simulate.seed;
    log::info!("simulate: {n} samples, seed {seed}, sigma_eff2 = {sigma_eff2:.4}");
    let outcomes = sample_outcomes(&scenario.signal, sigma_eff2, n, seed)?;

    let gain = scenario.setup.feedback_gain();
    let r_star = scenario.setup.r_star();

    let conditional_variances: Option<Vec<f64>> = if config.simulate.state_moments {
        Some(
            outcomes
                .iter()
                .map(|&x| {
                    conditional_state(&scenario.signal, x, sigma_eff2)
                        .map(|s| s.quadrature_variance())
                })
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };

    let mean = outcomes.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        outcomes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mean_conditional_variance = match &conditional_variances {
        Some(all) => all.iter().sum::<f64>() / all.len() as f64,
        None => {
            let k = n.min(SUMMARY_STATE_SAMPLE);
            outcomes[..k]
                .iter()
                .map(|&x| {
                    conditional_state(&scenario.signal, x, sigma_eff2)
                        .map(|s| s.quadrature_variance())
                })
                .sum::<Result<f64, _>>()?
                / k as f64
        }
    };

    let summary = json!({
        "samples": n,
        "seed": seed,
        "phi": scenario.setup.phi(),
        "tau1": scenario.setup.tau1(),
        "sigma_eff2": sigma_eff2,
        "feedback_gain": gain,
        "r_star": r_star,
        "mean": mean,
        "variance": variance,
        "mean_conditional_variance": mean_conditional_variance,
    });

    match format {
        OutputFormat::Json => {
            let columns: Vec<&str> = match conditional_variances {
                Some(_) => vec!["inferred_x", "alpha_star", "conditional_variance"],
                None => vec!["inferred_x", "alpha_star"],
            };
            let rows: Vec<Vec<f64>> = outcomes
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let mut row = vec![x, gain * x];
                    if let Some(cv) = &conditional_variances {
                        row.push(cv[i]);
                    }
                    row
                })
                .collect();
            let doc = json!({ "summary": summary, "columns": columns, "rows": rows });
            Ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            ))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            let obj = summary.as_object().expect("summary is an object");
            for (key, value) in obj {
                let rendered = match value {
                    serde_json::Value::Number(v) if v.is_f64() => {
                        fmt_float(v.as_f64().expect("checked"))
                    }
                    other => other.to_string(),
                };
                out.push_str(&format!("# {key} = {rendered}\n"));
            }
            match &conditional_variances {
                Some(cv) => {
                    out.push_str("index,inferred_x,alpha_star,r_star,conditional_variance\n");
                    for (i, &x) in outcomes.iter().enumerate() {
                        out.push_str(&format!(
                            "{i},{},{},{},{}\n",
                            fmt_float(x),
                            fmt_float(gain * x),
                            fmt_float(r_star),
                            fmt_float(cv[i])
                        ));
                    }
                }
                None => {
                    out.push_str("index,inferred_x,alpha_star,r_star\n");
                    for (i, &x) in outcomes.iter().enumerate() {
                        out.push_str(&format!(
                            "{i},{},{},{}\n",
                            fmt_float(x),
                            fmt_float(gain * x),
                            fmt_float(r_star)
                        ));
                    }
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    outcome: Result<String, String>,
}

impl Check {
    fn run(name: &'static str, body: impl FnOnce() -> Result<String, NumericError>) -> Self {
        let outcome = body().map_err(|e| e.0);
        Self { name, outcome }
    }

    fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

fn bound(name: &str, value: f64, tol: f64) -> Result<String, NumericError> {
    if value <= tol {
        Ok(format!("{name} = {value:.2e}, tol {tol:.0e}"))
    } else {
        Err(NumericError(format!(
            "{name} = {value:.2e} exceeds tol {tol:.0e}"
        )))
    }
}

/// Runs the consistency suite at the configured scenario and renders a text
/// report. Returns the report and whether every check passed.
pub fn validate(config: &ScenarioConfig) -> (String, bool) {
    let mut checks: Vec<Check> = Vec::new();
    let mut audit_line = String::new();

    match Scenario::build(config) {
        Err(e) => checks.push(Check {
            name: "scenario-build",
            outcome: Err(e.0),
        }),
        Ok(scenario) => {
            let sigma_eff2 = effective_sigma2(&scenario.setup, &scenario.probe);

            checks.push(Check::run("povm-completeness", || {
                let grid = scenario.grid;
                let n = grid.n_points();
                let kernels: Vec<Vec<f64>> = grid
                    .nodes()
                    .map(|x| measurement_kernel(x, sigma_eff2, grid))
                    .collect();
                let mut worst = 0.0_f64;
                for i in n / 4..3 * n / 4 {
                    let total: f64 = kernels.iter().map(|m| m[i] * m[i]).sum::<f64>() * grid.dx();
                    worst = worst.max((total - 1.0).abs());
                }
                bound("max |int dx M^2 - 1|", worst, 1e-6)
            }));

            checks.push(Check::run("total-probability", || {
                let dist = inferred_distribution(&scenario.signal, sigma_eff2)?;
                let n = scenario.grid.n_points();
                let mut acc = vec![0.0_f64; n];
                for (i, &p) in dist.densities().iter().enumerate() {
                    if p < 1e-280 {
                        continue;
                    }
                    let state =
                        conditional_state(&scenario.signal, dist.grid().node(i), sigma_eff2)?;
                    let w = p * dist.grid().dx();
                    for (a, s) in acc.iter_mut().zip(state.amplitudes()) {
                        *a += w * s.norm_sqr();
                    }
                }
                let worst = acc
                    .iter()
                    .zip(scenario.signal.amplitudes())
                    .map(|(a, s)| (a - s.norm_sqr()).abs())
                    .fold(0.0_f64, f64::max);
                bound("max pointwise deviation", worst, 1e-7)
            }));

            checks.push(Check::run("closed-form-vs-grid-f", || {
                let vacuum = GridWavefunction::gaussian(scenario.grid, 0.0, 0.25)?;
                let mut worst = 0.0_f64;
                for x in log_spaced(0.2, 5.0, 8) {
                    let got = grid_f(&vacuum, x * x * 0.25)?;
                    let want = gaussian_f(TradeoffVariable::new(x)?);
                    worst = worst.max((got - want).abs());
                }
                bound("max |grid F - closed F|", worst, 1e-4)
            }));

            checks.push(Check::run("closed-form-vs-grid-g", || {
                let vacuum = GridWavefunction::gaussian(scenario.grid, 0.0, 0.25)?;
                let mut worst = 0.0_f64;
                for x in log_spaced(0.2, 5.0, 8) {
                    let got = grid_g(&vacuum, x * x * 0.25)?;
                    let want = gaussian_g(TradeoffVariable::new(x)?);
                    worst = worst.max((got - want).abs());
                }
                bound("max |grid G - closed G|", worst, 1e-5)
            }));

            let two_mode_grid = if scenario.grid.n_points() > 512 {
                GridSpec::new(512, config.x_max).map_err(NumericError::from)
            } else {
                Ok(scenario.grid)
            };

            checks.push(Check::run("two-mode-density", || {
                let grid = two_mode_grid.clone()?;
                let signal = build_signal(config, grid)?;
                let chain = TwoModeChain::new(&signal, &scenario.probe, &scenario.setup)?;
                let dist = inferred_distribution(&signal, sigma_eff2)?;
                let mut worst = 0.0_f64;
                for x in [-1.0, 0.0, 0.5, 1.5] {
                    let i = ((x + dist.grid().x_max()) / dist.grid().dx()).round() as usize;
                    let node = dist.grid().node(i);
                    worst = worst.max((chain.density(node)? - dist.densities()[i]).abs());
                }
                bound("max |p_chain - p_kernel|", worst, 1e-6)
            }));

            checks.push(Check::run("two-mode-conditional", || {
                let grid = two_mode_grid.clone()?;
                let signal = build_signal(config, grid)?;
                let chain = TwoModeChain::new(&signal, &scenario.probe, &scenario.setup)?;
                let mut worst = 0.0_f64;
                for x in [0.0, 0.5] {
                    let (_, state) = chain.outcome(x)?;
                    let reference = conditional_state(&signal, x, sigma_eff2)?;
                    let l1: f64 = state
                        .amplitudes()
                        .iter()
                        .zip(reference.amplitudes())
                        .map(|(a, b)| (a.norm() - b.norm()).abs())
                        .sum::<f64>()
                        * grid.dx();
                    worst = worst.max(l1);
                }
                bound("max modulus L1", worst, 1e-6)
            }));

            checks.push(Check::run("decoherence-identity", || {
                let grid = if scenario.grid.n_points() > 256 {
                    GridSpec::new(256, config.x_max).map_err(NumericError::from)?
                } else {
                    scenario.grid
                };
                let signal = build_signal(config, grid)?;
                let rho = nonselective_output(&signal, sigma_eff2);
                let dist = inferred_distribution(&signal, sigma_eff2)?;
                let n = grid.n_points();
                let mut oracle = vec![Complex64::ZERO; n * n];
                for (k, &p) in dist.densities().iter().enumerate() {
                    if p < 1e-280 {
                        continue;
                    }
                    let state = conditional_state(&signal, dist.grid().node(k), sigma_eff2)?;
                    let w = p * dist.grid().dx();
                    let amps = state.amplitudes();
                    for i in 0..n {
                        let left = w * amps[i];
                        for (v, a) in oracle[i * n..(i + 1) * n].iter_mut().zip(amps) {
                            *v += left * a.conj();
                        }
                    }
                }
                let mut worst = 0.0_f64;
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((oracle[i * n + j] - rho.element(i, j)).norm());
                    }
                }
                bound("max elementwise deviation", worst, 1e-8)
            }));

            checks.push(Check::run("information-monotonicity", || {
                let mut last = f64::INFINITY;
                for x in log_spaced(0.3, 3.0, 6) {
                    let measured =
                        inferred_distribution(&scenario.signal, scenario.sigma_eff2_at(x))?;
                    let exact =
                        Distribution::quadrature(&scenario.signal).embed(measured.grid())?;
                    let g = statistical_fidelity(&measured, &exact)?;
                    if g >= last {
                        return Err(NumericError(format!(
                            "G not strictly decreasing at x = {x:.3}"
                        )));
                    }
                    last = g;
                }
                Ok("G strictly decreasing over 6 log-spaced points".into())
            }));

            let optimum = Check::run("optimizer-reference-bands", || {
                let f = |x: f64| gaussian_f(TradeoffVariable::new(x).expect("bracketed x"));
                let g = |x: f64| gaussian_g(TradeoffVariable::new(x).expect("bracketed x"));
                let best = optimize_sum(f, g, (0.05, 20.0))?;
                let equal = equal_fidelity_point(f, g, (0.2, 5.0))?;
                audit_line = format!(
                    "computed optimum: x_m = {:.6}, F = {:.6}, G = {:.6}; \
                     equal point: x_e = {:.6}, F = G = {:.6}",
                    best.x, best.f, best.g, equal.x, equal.f
                );
                let ok = (1.15..=1.25).contains(&best.x)
                    && (0.85..=0.87).contains(&best.f)
                    && (0.90..=0.92).contains(&best.g)
                    && (1.25..=1.38).contains(&equal.x);
                if ok {
                    Ok(format!(
                        "x_m = {:.4}, x_e = {:.4} inside reference bands",
                        best.x, equal.x
                    ))
                } else {
                    Err(NumericError(format!(
                        "optimum outside reference bands: x_m = {:.4}, x_e = {:.4}",
                        best.x, equal.x
                    )))
                }
            });
            checks.push(optimum);
        }
    }

    let passed = checks.iter().filter(|c| c.passed()).count();
    let mut report = String::new();
    for check in &checks {
        match &check.outcome {
            Ok(detail) => report.push_str(&format!("check {:<32} PASS ({detail})\n", check.name)),
            Err(detail) => report.push_str(&format!("check {:<32} FAIL ({detail})\n", check.name)),
        }
    }
    if !audit_line.is_empty() {
        report.push_str(&audit_line);
        report.push('\n');
    }
    let all = passed == checks.len();
    report.push_str(&format!(
        "overall: {} ({passed}/{} checks passed)\n",
        if all { "PASS" } else { "FAIL" },
        checks.len()
    ));
    (report, all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_and_keeps_12_digits() {
        for v in [0.5, 1.0 / 3.0, 0.816_496_580_927_726, 1e-12, -273.15] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit());
            assert!(digits.count() >= 12, "{s}");
        }
    }
}
