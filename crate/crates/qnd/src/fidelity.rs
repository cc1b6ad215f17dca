//! The two figures of merit of a tunable quadrature measurement.
//!
//! Information gain is scored by the statistical fidelity (squared
//! Bhattacharyya coefficient) between the measured outcome distribution and
//! the true quadrature distribution; state disturbance by the overlap
//! fidelity between the input state and the non-selective output. For
//! Gaussian signals both collapse to closed forms in the single trade-off
//! variable `x = sigma_p / (sigma_s tan(phi))`:
//!
//! ```text
//! F(x) = sqrt(2) x / sqrt(1 + 2 x^2)        (disturbance)
//! G(x) = 2 sqrt(1 + x^2) / (2 + x^2)        (information gain)
//! ```
//!
//! `x -> 0` is the projective limit (`G -> 1`), `x -> infinity` the
//! pass-through repeater (`F -> 1`).

use crate::error::MeasurementError;
use crate::grid::GridWavefunction;
use crate::measurement::{
    inferred_distribution, nonselective_output, Distribution, ProbeSpec, SetupParams,
};

/// The dimensionless trade-off variable `x = sigma_p / (sigma_s tan(phi))`,
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffVariable(f64);

impl TradeoffVariable {
    pub fn new(x: f64) -> Result<Self, MeasurementError> {
        if !x.is_finite() || x <= 0.0 {
            return Err(MeasurementError::InvalidParameter(format!(
                "trade-off variable must be positive and finite, got {x}"
            )));
        }
        Ok(Self(x))
    }

    /// From apparatus parameters and the signal variance.
    pub fn from_physical(
        probe: &ProbeSpec,
        setup: &SetupParams,
        sigma_s2: f64,
    ) -> Result<Self, MeasurementError> {
        if !sigma_s2.is_finite() || sigma_s2 <= 0.0 {
            return Err(MeasurementError::InvalidParameter(format!(
                "signal variance must be positive and finite, got {sigma_s2}"
            )));
        }
        Self::new(probe.sigma_p2().sqrt() / (sigma_s2.sqrt() * setup.phi().tan()))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The kernel variance this trade-off corresponds to, `(x sigma_s)^2`.
    pub fn sigma_eff2(self, sigma_s2: f64) -> f64 {
        self.0 * self.0 * sigma_s2
    }
}

/// Squared Bhattacharyya coefficient `(sum sqrt(p_i q_i) dx)^2` between two
/// distributions on the same grid. Symmetric, 1 iff the distributions agree.
pub fn statistical_fidelity(p: &Distribution, q: &Distribution) -> Result<f64, MeasurementError> {
    if p.grid() != q.grid() {
        return Err(crate::error::GridError::GridMismatch.into());
    }
    for dist in [p, q] {
        let mass = dist.densities().iter().sum::<f64>() * dist.grid().dx();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(MeasurementError::UnnormalizedDistribution(mass - 1.0));
        }
    }
    let coeff: f64 = p
        .densities()
        .iter()
        .zip(q.densities())
        .map(|(a, b)| (a * b).sqrt())
        .sum::<f64>()
        * p.grid().dx();
    Ok(coeff * coeff)
}

/// Closed-form disturbance fidelity for Gaussian signals.
pub fn gaussian_f(x: TradeoffVariable) -> f64 {
    let x = x.value();
    std::f64::consts::SQRT_2 * x / (1.0 + 2.0 * x * x).sqrt()
}

/// Closed-form information-gain fidelity for Gaussian signals.
pub fn gaussian_g(x: TradeoffVariable) -> f64 {
    let x = x.value();
    2.0 * (1.0 + x * x).sqrt() / (2.0 + x * x)
}

/// Disturbance fidelity on the grid: overlap of the signal with its
/// non-selective output at kernel variance `sigma_eff2`.
pub fn grid_f(signal: &GridWavefunction, sigma_eff2: f64) -> Result<f64, MeasurementError> {
    let rho = nonselective_output(signal, sigma_eff2);
    Ok(signal.fidelity_with(&rho)?)
}

/// Information-gain fidelity on the grid: statistical fidelity between the
/// inferred-value distribution and the exact quadrature distribution.
pub fn grid_g(signal: &GridWavefunction, sigma_eff2: f64) -> Result<f64, MeasurementError> {
    let measured = inferred_distribution(signal, sigma_eff2)?;
    let exact = Distribution::quadrature(signal).embed(measured.grid())?;
    statistical_fidelity(&measured, &exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, GridWavefunction};

    fn x(v: f64) -> TradeoffVariable {
        TradeoffVariable::new(v).unwrap()
    }

    #[test]
    fn tradeoff_variable_construction() {
        assert!(TradeoffVariable::new(0.0).is_err());
        assert!(TradeoffVariable::new(-1.0).is_err());
        assert!(TradeoffVariable::new(f64::INFINITY).is_err());

        let probe = ProbeSpec::vacuum();
        let setup = SetupParams::new(std::f64::consts::FRAC_PI_4).unwrap();
        let v = TradeoffVariable::from_physical(&probe, &setup, 0.25).unwrap();
        assert!((v.value() - 1.0).abs() < 1e-12);
        assert!((v.sigma_eff2(0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn statistical_fidelity_reference_points() {
        let grid = GridSpec::default_grid();
        let narrow =
            Distribution::quadrature(&GridWavefunction::gaussian(grid, 0.0, 0.25).unwrap());
        assert!((statistical_fidelity(&narrow, &narrow).unwrap() - 1.0).abs() < 1e-9);

        // zero-mean Gaussians of variance 1/4 and 1/2: closed form
        // 2ab/(a^2+b^2) with a = 1/2, b = 1/sqrt(2)
        let wide = Distribution::quadrature(&GridWavefunction::gaussian(grid, 0.0, 0.5).unwrap());
        let got = statistical_fidelity(&narrow, &wide).unwrap();
        let want = 2.0 * 0.5 * 0.5_f64.sqrt() / (0.25 + 0.5);
        assert!((want - 0.942_809_041_582_063_4).abs() < 1e-12);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");

        // disjoint supports
        let left = Distribution::quadrature(&GridWavefunction::gaussian(grid, -4.0, 0.01).unwrap());
        let right = Distribution::quadrature(&GridWavefunction::gaussian(grid, 4.0, 0.01).unwrap());
        assert!(statistical_fidelity(&left, &right).unwrap() < 1e-12);
    }

    #[test]
    fn statistical_fidelity_rejects_bad_inputs() {
        let grid = GridSpec::default_grid();
        let a = Distribution::quadrature(&GridWavefunction::gaussian(grid, 0.0, 0.25).unwrap());
        let other = GridSpec::new(512, 8.0).unwrap();
        let b = Distribution::quadrature(&GridWavefunction::gaussian(other, 0.0, 0.25).unwrap());
        assert!(statistical_fidelity(&a, &b).is_err());
    }

    #[test]
    fn closed_forms_at_reference_points() {
        assert!((gaussian_f(x(1.0)) - 0.816_496_580_927_726).abs() < 1e-12);
        assert!((gaussian_g(x(1.0)) - 0.942_809_041_582_063_4).abs() < 1e-12);
        assert!(gaussian_f(x(1e3)) > 0.99999);
        assert!(gaussian_g(x(1e-3)) > 0.999999);
    }

    #[test]
    fn closed_forms_are_monotone() {
        let mut last_f = 0.0;
        let mut last_g = 2.0;
        for i in 0..60 {
            let v = 0.05 * (20.0_f64 / 0.05).powf(i as f64 / 59.0);
            let f = gaussian_f(x(v));
            let g = gaussian_g(x(v));
            assert!(f > last_f, "F not increasing at x = {v}");
            assert!(g < last_g, "G not decreasing at x = {v}");
            last_f = f;
            last_g = g;
        }
    }

    #[test]
    fn sum_of_fidelities_is_not_constant() {
        let at = |v: f64| gaussian_f(x(v)) + gaussian_g(x(v));
        assert!((at(0.3) - at(1.2)).abs() > 0.05);
    }

    #[test]
    fn grid_f_matches_closed_form_for_gaussian_signals() {
        let signal = GridWavefunction::gaussian(GridSpec::default_grid(), 0.0, 0.25).unwrap();
        for v in [0.3, 1.0, 2.5] {
            let sigma_eff2 = x(v).sigma_eff2(0.25);
            let got = grid_f(&signal, sigma_eff2).unwrap();
            let want = gaussian_f(x(v));
            assert!((got - want).abs() < 1e-4, "x = {v}: {got} vs {want}");
        }
        // repeater limit
        assert!((grid_f(&signal, 1e6).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_g_matches_closed_form_for_gaussian_signals() {
        let signal = GridWavefunction::gaussian(GridSpec::default_grid(), 0.0, 0.25).unwrap();
        for v in [0.3, 1.0, 2.5] {
            let sigma_eff2 = x(v).sigma_eff2(0.25);
            let got = grid_g(&signal, sigma_eff2).unwrap();
            let want = gaussian_g(x(v));
            assert!((got - want).abs() < 1e-5, "x = {v}: {got} vs {want}");
        }
        // projective limit at a still-resolvable kernel
        let sigma = 2.0 * signal.grid().dx();
        assert!((grid_g(&signal, sigma * sigma).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn grid_f_matches_outcome_average_for_fock_one() {
        // independent quadrature oracle: F = integral dx p(x) |<psi_s|psi_x>|^2
        use crate::measurement::{conditional_state, inferred_distribution};
        let signal = GridWavefunction::fock(GridSpec::default_grid(), 1).unwrap();
        let sigma_eff2 = 0.25;
        let dist = inferred_distribution(&signal, sigma_eff2).unwrap();
        let mut oracle = 0.0;
        for (i, &p) in dist.densities().iter().enumerate() {
            if p < 1e-12 {
                continue;
            }
            let state = conditional_state(&signal, dist.grid().node(i), sigma_eff2).unwrap();
            oracle += p * signal.overlap(&state).unwrap().norm_sqr() * dist.grid().dx();
        }
        let got = grid_f(&signal, sigma_eff2).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs oracle {oracle}");
    }

    #[test]
    fn grid_g_self_consistency_for_fock_one() {
        let signal = GridWavefunction::fock(GridSpec::default_grid(), 1).unwrap();
        let sigma_eff2 = 0.25;
        let dist = inferred_distribution(&signal, sigma_eff2).unwrap();
        let exact = Distribution::quadrature(&signal)
            .embed(dist.grid())
            .unwrap();
        let direct: f64 = dist
            .densities()
            .iter()
            .zip(exact.densities())
            .map(|(a, b)| (a * b).sqrt())
            .sum::<f64>()
            * dist.grid().dx();
        let got = grid_g(&signal, sigma_eff2).unwrap();
        assert!((got - direct * direct).abs() < 1e-8);
    }
}
