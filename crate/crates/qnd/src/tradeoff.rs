//! Locating the optimal operating point of the measurement and mapping it
//! back to apparatus settings.
//!
//! The scalarized objective is `F + G`; its maximizer and the crossing point
//! `F = G` are both located on a logarithmic axis. A target trade-off can be
//! realized either by tuning the beam-splitter angle at fixed probe or by
//! tuning the probe squeezing at fixed angle, which is why both constraint
//! modes exist.

use crate::error::{MeasurementError, OptimizeError};
use crate::fidelity::{grid_f, grid_g};
use crate::grid::GridWavefunction;
use crate::measurement::{ProbeSpec, SetupParams, SqueezeDirection};
use crate::par;

/// One point on the information/disturbance frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    /// Trade-off variable.
    pub x: f64,
    /// Disturbance fidelity F.
    pub f: f64,
    /// Information-gain fidelity G.
    pub g: f64,
    /// `f + g`.
    pub sum: f64,
}

impl TradeoffPoint {
    fn at(x: f64, f: &impl Fn(f64) -> f64, g: &impl Fn(f64) -> f64) -> Self {
        let (fv, gv) = (f(x), g(x));
        Self {
            x,
            f: fv,
            g: gv,
            sum: fv + gv,
        }
    }
}

/// Apparatus settings realizing a given trade-off variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalOperatingPoint {
    pub setup: SetupParams,
    pub probe: ProbeSpec,
    /// Signal quadrature variance the point was computed for.
    pub sigma_s2: f64,
    /// Resulting trade-off variable (equals the target by construction).
    pub x: f64,
    /// Probe photon number `sinh^2(r)`.
    pub photon_number: f64,
}

/// Which apparatus knob stays fixed when realizing a target trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealizationConstraint {
    /// Keep the beam-splitter angle, solve for the probe squeezing.
    FixPhi(f64),
    /// Keep the probe, solve for the beam-splitter angle.
    FixProbe { r: f64, direction: SqueezeDirection },
}

const GOLDEN_RATIO_CONJ: f64 = 0.618_033_988_749_894_9;
/// Points sampled across the bracket to assert unimodality and detect
/// plateaus before the golden-section search starts.
const SCAN_POINTS: usize = 33;
/// Relative bracket width at which the search stops.
const BRACKET_TOL: f64 = 1e-6;
/// Objective spread below which the bracket counts as a flat plateau.
const PLATEAU_TOL: f64 = 1e-12;

fn check_bracket(bracket: (f64, f64)) -> Result<(), OptimizeError> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(OptimizeError::InvalidBracket(lo, hi));
    }
    Ok(())
}

/// Maximizes `f(x) + g(x)` over the bracket by golden-section search on
/// `ln x`, after a coarse scan that rejects non-unimodal objectives. A flat
/// plateau resolves to the (geometric) bracket midpoint.
pub fn optimize_sum(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    bracket: (f64, f64),
) -> Result<TradeoffPoint, OptimizeError> {
    check_bracket(bracket)?;
    let (t_lo, t_hi) = (bracket.0.ln(), bracket.1.ln());
    let h = |t: f64| {
        let x = t.exp();
        f(x) + g(x)
    };

    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let t = t_lo + (t_hi - t_lo) * i as f64 / (SCAN_POINTS - 1) as f64;
            (t, h(t))
        })
        .collect();
    let spread = scan
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
        - scan.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    if spread < PLATEAU_TOL {
        let mid = (0.5 * (t_lo + t_hi)).exp();
        return Ok(TradeoffPoint::at(mid, &f, &g));
    }
    // a point below sampled values on both sides is an interior valley;
    // report the deepest one found
    let tol = 1e-9 * spread.max(1.0);
    let mut valley: Option<(f64, f64)> = None;
    for i in 1..SCAN_POINTS - 1 {
        let left = scan[..i]
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let right = scan[i + 1..]
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if scan[i].1 + tol < left && scan[i].1 + tol < right {
            match valley {
                Some((_, depth)) if depth <= scan[i].1 => {}
                _ => valley = Some((scan[i].0, scan[i].1)),
            }
        }
    }
    if let Some((t, _)) = valley {
        return Err(OptimizeError::NotUnimodal(t.exp()));
    }

    let (mut a, mut b) = (t_lo, t_hi);
    let mut t1 = b - GOLDEN_RATIO_CONJ * (b - a);
    let mut t2 = a + GOLDEN_RATIO_CONJ * (b - a);
    let (mut h1, mut h2) = (h(t1), h(t2));
    while b - a > BRACKET_TOL {
        if h1 >= h2 {
            b = t2;
            t2 = t1;
            h2 = h1;
            t1 = b - GOLDEN_RATIO_CONJ * (b - a);
            h1 = h(t1);
        } else {
            a = t1;
            t1 = t2;
            h1 = h2;
            t2 = a + GOLDEN_RATIO_CONJ * (b - a);
            h2 = h(t2);
        }
    }
    let best = (0.5 * (a + b)).exp();
    Ok(TradeoffPoint::at(best, &f, &g))
}

/// Finds the crossing `f(x) = g(x)` by bisection to 1e-10 in `x`.
pub fn equal_fidelity_point(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    bracket: (f64, f64),
) -> Result<TradeoffPoint, OptimizeError> {
    check_bracket(bracket)?;
    let d = |x: f64| f(x) - g(x);
    let (mut lo, mut hi) = bracket;
    let (d_lo, d_hi) = (d(lo), d(hi));
    if d_lo == 0.0 {
        return Ok(TradeoffPoint::at(lo, &f, &g));
    }
    if d_hi == 0.0 {
        return Ok(TradeoffPoint::at(hi, &f, &g));
    }
    if d_lo.signum() == d_hi.signum() {
        return Err(OptimizeError::NoSignChange(lo, hi));
    }
    let mut d_lo = d_lo;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let d_mid = d(mid);
        if d_mid == 0.0 {
            return Ok(TradeoffPoint::at(mid, &f, &g));
        }
        if d_mid.signum() == d_lo.signum() {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    Ok(TradeoffPoint::at(0.5 * (lo + hi), &f, &g))
}

/// Realizes a target trade-off variable as apparatus settings, holding either
/// the beam-splitter angle or the probe fixed.
pub fn physical_from_x(
    x_target: f64,
    sigma_s2: f64,
    constraint: RealizationConstraint,
) -> Result<PhysicalOperatingPoint, OptimizeError> {
    if !x_target.is_finite() || x_target <= 0.0 {
        return Err(OptimizeError::InvalidParameter(format!(
            "target trade-off must be positive and finite, got {x_target}"
        )));
    }
    if !sigma_s2.is_finite() || sigma_s2 <= 0.0 {
        return Err(OptimizeError::InvalidParameter(format!(
            "signal variance must be positive and finite, got {sigma_s2}"
        )));
    }
    let sigma_s = sigma_s2.sqrt();
    let (setup, probe) = match constraint {
        RealizationConstraint::FixPhi(phi) => {
            let setup = SetupParams::new(phi)?;
            let sigma_p2 = (x_target * sigma_s * phi.tan()).powi(2);
            // direction by whether the required variance sits below or above
            // the vacuum quarter
            let (r, direction) = if sigma_p2 <= 0.25 {
                (-0.5 * (4.0 * sigma_p2).ln(), SqueezeDirection::Squeezed)
            } else {
                (0.5 * (4.0 * sigma_p2).ln(), SqueezeDirection::AntiSqueezed)
            };
            (setup, ProbeSpec::new(r, direction)?)
        }
        RealizationConstraint::FixProbe { r, direction } => {
            let probe = ProbeSpec::new(r, direction)?;
            let tan_phi = probe.sigma_p2().sqrt() / (sigma_s * x_target);
            let setup = SetupParams::new(tan_phi.atan())?;
            (setup, probe)
        }
    };
    let x = probe.sigma_p2().sqrt() / (sigma_s * setup.phi().tan());
    Ok(PhysicalOperatingPoint {
        setup,
        probe,
        sigma_s2,
        x,
        photon_number: probe.photon_number(),
    })
}

/// Average photon number `sinh^2(r)` carried by a probe of modulus `r >= 0`.
pub fn probe_energy(r: f64) -> f64 {
    r.sinh().powi(2)
}

/// Grid-computed frontier: for each trade-off value, the kernel variance is
/// `(x sigma_s)^2` and the fidelities come from the grid path. Points are
/// independent and evaluated in parallel.
pub fn numeric_frontier(
    signal: &GridWavefunction,
    x_values: &[f64],
    sigma_s2: f64,
) -> Result<Vec<TradeoffPoint>, OptimizeError> {
    if !sigma_s2.is_finite() || sigma_s2 <= 0.0 {
        return Err(OptimizeError::InvalidParameter(format!(
            "signal variance must be positive and finite, got {sigma_s2}"
        )));
    }
    if x_values.windows(2).any(|w| w[0] > w[1]) || x_values.iter().any(|&x| x.is_nan() || x <= 0.0)
    {
        return Err(OptimizeError::InvalidParameter(
            "trade-off values must be positive and sorted".into(),
        ));
    }
    par::indexed_map(x_values.len(), |i| {
        let x = x_values[i];
        let sigma_eff2 = (x * sigma_s2.sqrt()).powi(2);
        let f = grid_f(signal, sigma_eff2)?;
        let g = grid_g(signal, sigma_eff2)?;
        Ok(TradeoffPoint {
            x,
            f,
            g,
            sum: f + g,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, MeasurementError>>()
    .map_err(OptimizeError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::{gaussian_f, gaussian_g, TradeoffVariable};
    use crate::grid::{GridSpec, GridWavefunction};

    fn closed_f(x: f64) -> f64 {
        gaussian_f(TradeoffVariable::new(x).unwrap())
    }

    fn closed_g(x: f64) -> f64 {
        gaussian_g(TradeoffVariable::new(x).unwrap())
    }

    #[test]
    fn optimum_of_the_closed_forms() {
        let best = optimize_sum(closed_f, closed_g, (0.05, 20.0)).unwrap();
        assert!((best.x - 1.2).abs() < 0.05, "x_m = {}", best.x);
        assert!((best.f - 0.86).abs() < 0.01, "F = {}", best.f);
        assert!((best.g - 0.91).abs() < 0.01, "G = {}", best.g);
        assert!((best.sum - best.f - best.g).abs() < 1e-12);

        // stationarity by central difference
        let h = 1e-5;
        let df = (closed_f(best.x + h) + closed_g(best.x + h)
            - closed_f(best.x - h)
            - closed_g(best.x - h))
            / (2.0 * h);
        assert!(df.abs() < 1e-4, "gradient at optimum {df:.2e}");
    }

    #[test]
    fn plateau_resolves_to_the_bracket_midpoint() {
        let point = optimize_sum(|_| 0.5, |_| 0.5, (0.1, 10.0)).unwrap();
        assert!((point.x - 1.0).abs() < 1e-9, "midpoint {}", point.x);
        assert_eq!(point.sum, 1.0);
    }

    #[test]
    fn interior_valley_is_detected() {
        // two peaks at x = e^-1 and x = e, valley at x = 1
        let f = |x: f64| (-(x.ln() + 1.0).powi(2)).exp();
        let g = |x: f64| (-(x.ln() - 1.0).powi(2)).exp();
        let err = optimize_sum(f, g, (0.05, 20.0)).unwrap_err();
        assert!(matches!(err, OptimizeError::NotUnimodal(x) if (x - 1.0).abs() < 0.5));
    }

    #[test]
    fn bad_brackets_are_rejected() {
        assert!(matches!(
            optimize_sum(closed_f, closed_g, (-1.0, 2.0)),
            Err(OptimizeError::InvalidBracket(_, _))
        ));
        assert!(matches!(
            optimize_sum(closed_f, closed_g, (2.0, 2.0)),
            Err(OptimizeError::InvalidBracket(_, _))
        ));
    }

    #[test]
    fn equal_point_of_the_closed_forms() {
        let point = equal_fidelity_point(closed_f, closed_g, (0.5, 3.0)).unwrap();
        assert!((point.x - 1.3).abs() < 0.05, "x_e = {}", point.x);
        assert!((point.f - 0.88).abs() < 0.01);
        assert!((point.f - point.g).abs() < 1e-9);

        // invariant under bracket changes that keep the sign change
        let other = equal_fidelity_point(closed_f, closed_g, (1.0, 8.0)).unwrap();
        assert!((point.x - other.x).abs() < 1e-8);
    }

    #[test]
    fn missing_sign_change_is_reported() {
        assert!(matches!(
            equal_fidelity_point(closed_f, closed_g, (2.0, 3.0)),
            Err(OptimizeError::NoSignChange(_, _))
        ));
    }

    #[test]
    fn physical_realization_with_fixed_angle() {
        // x = 1.2 at a balanced splitter: probe slightly anti-squeezed,
        // sigma_p = 1.2 sigma_s = 0.6, exp(2r) = 4 * 0.36 = 1.44
        let point = physical_from_x(
            1.2,
            0.25,
            RealizationConstraint::FixPhi(std::f64::consts::FRAC_PI_4),
        )
        .unwrap();
        assert_eq!(point.probe.direction(), SqueezeDirection::AntiSqueezed);
        assert!((point.probe.r() - 0.5 * 1.44_f64.ln()).abs() < 1e-12);
        assert!((point.probe.r() - 0.182_321_556_793_954_6).abs() < 1e-12);
        // sinh(ln 1.2)^2 = ((1.2 - 1/1.2)/2)^2 = (11/60)^2
        assert!((point.photon_number - 121.0 / 3600.0).abs() < 1e-12);
        assert!((point.x - 1.2).abs() < 1e-10);
    }

    #[test]
    fn physical_realization_with_fixed_probe() {
        let point = physical_from_x(
            1.0,
            0.25,
            RealizationConstraint::FixProbe {
                r: 0.0,
                direction: SqueezeDirection::Squeezed,
            },
        )
        .unwrap();
        assert!((point.setup.phi() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((point.setup.tau1() - 0.5).abs() < 1e-12);
        assert!((point.x - 1.0).abs() < 1e-10);
    }

    #[test]
    fn both_constraint_modes_round_trip() {
        for target in [0.37, 1.0, 2.9] {
            let a = physical_from_x(target, 0.25, RealizationConstraint::FixPhi(0.9)).unwrap();
            let b = physical_from_x(
                target,
                0.25,
                RealizationConstraint::FixProbe {
                    r: 0.3,
                    direction: SqueezeDirection::Squeezed,
                },
            )
            .unwrap();
            assert!((a.x - target).abs() < 1e-10);
            assert!((b.x - target).abs() < 1e-10);
            // same trade-off from different knobs
            assert!((a.setup.phi() - b.setup.phi()).abs() > 1e-3 || a.probe != b.probe);
        }
    }

    #[test]
    fn probe_energy_reference_values() {
        assert_eq!(probe_energy(0.0), 0.0);
        assert!((probe_energy(1.0) - 1.381_097_845_541_815_7).abs() < 1e-12);
        let mut last = -1.0;
        for i in 0..20 {
            let e = probe_energy(i as f64 * 0.1);
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn gaussian_frontier_matches_closed_forms() {
        let signal = GridWavefunction::gaussian(GridSpec::default_grid(), 0.0, 0.25).unwrap();
        let xs = [0.25, 0.7, 1.2, 3.0];
        let frontier = numeric_frontier(&signal, &xs, 0.25).unwrap();
        for point in &frontier {
            assert!((point.f - closed_f(point.x)).abs() < 1e-4);
            assert!((point.g - closed_g(point.x)).abs() < 1e-4);
        }
        // projective end carries the largest information gain
        let max_g = frontier
            .iter()
            .map(|p| p.g)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max_g, frontier[0].g);
    }

    #[test]
    fn fock_frontier_is_monotone() {
        let signal = GridWavefunction::fock(GridSpec::default_grid(), 1).unwrap();
        let xs: Vec<f64> = (0..10)
            .map(|i| 0.3 * (4.0_f64 / 0.3).powf(i as f64 / 9.0))
            .collect();
        let frontier = numeric_frontier(&signal, &xs, 0.75).unwrap();
        for pair in frontier.windows(2) {
            assert!(
                pair[1].f > pair[0].f,
                "F not increasing at x = {}",
                pair[1].x
            );
            assert!(
                pair[1].g < pair[0].g,
                "G not decreasing at x = {}",
                pair[1].x
            );
        }
    }

    #[test]
    fn unsorted_frontier_input_is_rejected() {
        let signal = GridWavefunction::gaussian(GridSpec::default_grid(), 0.0, 0.25).unwrap();
        assert!(matches!(
            numeric_frontier(&signal, &[1.0, 0.5], 0.25),
            Err(OptimizeError::InvalidParameter(_))
        ));
    }

    #[test]
    fn grid_based_optimum_agrees_with_closed_forms() {
        let signal = GridWavefunction::gaussian(GridSpec::default_grid(), 0.0, 0.25).unwrap();
        let grid_best = optimize_sum(
            |x| grid_f(&signal, (x * 0.5).powi(2)).unwrap(),
            |x| grid_g(&signal, (x * 0.5).powi(2)).unwrap(),
            (0.5, 3.0),
        )
        .unwrap();
        let closed_best = optimize_sum(closed_f, closed_g, (0.5, 3.0)).unwrap();
        assert!(
            (grid_best.x - closed_best.x).abs() < 2e-2,
            "{} vs {}",
            grid_best.x,
            closed_best.x
        );
    }
}
