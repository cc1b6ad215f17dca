//! The quadrature measurement chain.
//!
//! A signal is mixed with a squeezed-vacuum probe on a beam splitter of
//! transmittivity `tau1 = cos^2(phi)`; a homodyne reading `X` on the probe arm
//! infers the signal quadrature value `x = -X/sin(phi)`, after which the
//! signal is displaced by `alpha* = -X tan(phi)` and squeezed so that its
//! scale is restored. Traced down to the signal mode the chain is a Gaussian
//! measurement: outcome `x` occurs with the density of `|psi_s|^2` convolved
//! with a Gaussian kernel of variance `sigma_eff^2 = sigma_p^2 / tan^2(phi)`,
//! and conditions the state on the matching Gaussian envelope.
//!
//! [`TwoModeChain`] simulates the chain literally on the joint grid and is
//! the cross-check for the single-mode functions in this module.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MeasurementError;
use crate::grid::{GridDensityMatrix, GridSpec, GridWavefunction};
use crate::par;

mod two_mode;
pub use two_mode::{two_mode_outcome, TwoModeChain};

/// Direction of the probe squeezing relative to the measured quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeDirection {
    /// Squeezed along the measured quadrature: variance `exp(-2r)/4`.
    Squeezed,
    /// Squeezed along the orthogonal quadrature: variance `exp(+2r)/4`.
    AntiSqueezed,
}

/// Squeezed-vacuum probe of modulus `r >= 0` and a squeezing direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    r: f64,
    direction: SqueezeDirection,
}

impl ProbeSpec {
    pub fn new(r: f64, direction: SqueezeDirection) -> Result<Self, MeasurementError> {
        if !r.is_finite() || r < 0.0 {
            return Err(MeasurementError::InvalidProbe(r));
        }
        Ok(Self { r, direction })
    }

    /// The vacuum probe (`r = 0`).
    pub fn vacuum() -> Self {
        Self {
            r: 0.0,
            direction: SqueezeDirection::Squeezed,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn direction(&self) -> SqueezeDirection {
        self.direction
    }

    /// Probe quadrature variance `exp(-+2r)/4` along the measured quadrature.
    pub fn sigma_p2(&self) -> f64 {
        match self.direction {
            SqueezeDirection::Squeezed => 0.25 * (-2.0 * self.r).exp(),
            SqueezeDirection::AntiSqueezed => 0.25 * (2.0 * self.r).exp(),
        }
    }

    /// Average photon number `sinh^2(r)` carried by the probe.
    pub fn photon_number(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// The probe state on a grid.
    pub fn wavefunction(&self, grid: GridSpec) -> Result<GridWavefunction, MeasurementError> {
        Ok(GridWavefunction::gaussian(grid, 0.0, self.sigma_p2())?)
    }
}

/// Apparatus settings: the mixing angle `phi` of the tunable beam splitter,
/// strictly inside `(0, pi/2)`. Everything else is derived:
/// `tau1 = cos^2(phi)`, the corrective squeeze `r* = ln(cos(phi)) < 0`, and
/// the feedback gain `tan(phi) sin(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupParams {
    phi: f64,
}

impl SetupParams {
    pub fn new(phi: f64) -> Result<Self, MeasurementError> {
        if !phi.is_finite() || phi <= 0.0 || phi >= std::f64::consts::FRAC_PI_2 {
            return Err(MeasurementError::DegenerateSetup(phi));
        }
        Ok(Self { phi })
    }

    /// Setup from the beam-splitter transmittivity `tau1 = cos^2(phi)`.
    pub fn from_tau1(tau1: f64) -> Result<Self, MeasurementError> {
        if !tau1.is_finite() || tau1 <= 0.0 || tau1 >= 1.0 {
            return Err(MeasurementError::InvalidTransmittivity(tau1));
        }
        Self::new(tau1.sqrt().acos())
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau1(&self) -> f64 {
        self.phi.cos().powi(2)
    }

    /// Corrective squeeze exponent, `exp(r*) = sqrt(tau1) = cos(phi)`.
    pub fn r_star(&self) -> f64 {
        self.phi.cos().ln()
    }

    /// Feedback displacement per unit inferred value, `tan(phi) sin(phi)`.
    pub fn feedback_gain(&self) -> f64 {
        self.phi.tan() * self.phi.sin()
    }

    /// Feedback parameters for a raw homodyne reading `X`: inferred value
    /// `x = -X/sin(phi)` and displacement `alpha* = -X tan(phi)`.
    pub fn feedback(&self, raw: f64) -> HomodyneOutcome {
        HomodyneOutcome {
            raw,
            inferred_x: -raw / self.phi.sin(),
            alpha_star: -raw * self.phi.tan(),
        }
    }
}

/// A homodyne reading with its inferred value and feedback displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneOutcome {
    /// Raw reading on the probe arm.
    pub raw: f64,
    /// Inferred signal quadrature value, `-X/sin(phi)`.
    pub inferred_x: f64,
    /// Feedback displacement, `-X tan(phi) = x tan(phi) sin(phi)`.
    pub alpha_star: f64,
}

/// Variance of the Gaussian measurement kernel, `sigma_p^2 / tan^2(phi)`.
pub fn effective_sigma2(setup: &SetupParams, probe: &ProbeSpec) -> f64 {
    probe.sigma_p2() / setup.phi().tan().powi(2)
}

/// Normalized Gaussian density of mean `mu` and variance `var`.
#[inline]
fn gaussian_density(y: f64, mu: f64, var: f64) -> f64 {
    (-(y - mu).powi(2) / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt()
}

/// Diagonal measurement-operator kernel `M_x(y_i) = G(y_i; x, sigma_eff^2)^(1/2)`.
///
/// The square completeness `integral dx M_x(y)^2 = 1` holds for every `y`
/// whose kernel mass stays inside the grid.
pub fn measurement_kernel(x: f64, sigma_eff2: f64, grid: GridSpec) -> Vec<f64> {
    grid.nodes()
        .map(|y| gaussian_density(y, x, sigma_eff2).sqrt())
        .collect()
}

/// Sampled probability density over inferred quadrature values.
///
/// Densities live on their own grid, which may extend the signal grid so that
/// broad kernels keep their mass inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    grid: GridSpec,
    densities: Vec<f64>,
}

impl Distribution {
    /// Validates non-negativity and unit mass (`sum p_i dx = 1` within 1e-6).
    pub fn new(grid: GridSpec, densities: Vec<f64>) -> Result<Self, MeasurementError> {
        if densities.len() != grid.n_points() {
            return Err(crate::error::GridError::LengthMismatch {
                got: densities.len(),
                expected: grid.n_points(),
            }
            .into());
        }
        for (index, &value) in densities.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(MeasurementError::NegativeDensity { index, value });
            }
        }
        let mass: f64 = densities.iter().sum::<f64>() * grid.dx();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(MeasurementError::UnnormalizedDistribution(mass - 1.0));
        }
        Ok(Self { grid, densities })
    }

    /// The exact quadrature distribution `|psi(y_i)|^2` of a pure state.
    pub fn quadrature(signal: &GridWavefunction) -> Self {
        Self {
            grid: signal.grid(),
            densities: signal.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn mean(&self) -> f64 {
        self.grid
            .nodes()
            .zip(&self.densities)
            .map(|(y, p)| y * p)
            .sum::<f64>()
            * self.grid.dx()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.grid
            .nodes()
            .zip(&self.densities)
            .map(|(y, p)| (y - mean).powi(2) * p)
            .sum::<f64>()
            * self.grid.dx()
    }

    /// Index of the node at coordinate `x`, if `x` lies on one.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = (x + self.grid.x_max()) / self.grid.dx();
        let idx = pos.round();
        if (pos - idx).abs() < 1e-6 && idx >= 0.0 && (idx as usize) < self.grid.n_points() {
            Some(idx as usize)
        } else {
            None
        }
    }

    /// Zero-pads onto a node-aligned superset grid with the same spacing.
    pub fn embed(&self, target: GridSpec) -> Result<Self, MeasurementError> {
        let dx = self.grid.dx();
        if (target.dx() - dx).abs() > 1e-12 * dx {
            return Err(crate::error::GridError::GridMismatch.into());
        }
        let offset = (target.x_max() - self.grid.x_max()) / dx;
        let k = offset.round();
        if (offset - k).abs() > 1e-6 || k < 0.0 {
            return Err(crate::error::GridError::GridMismatch.into());
        }
        let k = k as usize;
        if self.grid.n_points() + 2 * k != target.n_points() {
            return Err(crate::error::GridError::GridMismatch.into());
        }
        let mut densities = vec![0.0; target.n_points()];
        densities[k..k + self.grid.n_points()].copy_from_slice(&self.densities);
        Ok(Self {
            grid: target,
            densities,
        })
    }
}

/// Density of inferred values: `|psi_s|^2` convolved with the Gaussian kernel
/// of variance `sigma_eff2`, by direct quadrature on a grid extended far
/// enough to hold the kernel mass.
pub fn inferred_distribution(
    signal: &GridWavefunction,
    sigma_eff2: f64,
) -> Result<Distribution, MeasurementError> {
    let grid = signal.grid();
    let dx = grid.dx();
    let sigma = sigma_eff2.sqrt();
    if !sigma.is_finite() || sigma < dx {
        return Err(MeasurementError::UnderResolvedKernel { sigma, dx });
    }
    let extra = (6.0 * sigma / dx).ceil() as usize;
    if extra > 4_000_000 {
        return Err(MeasurementError::InvalidParameter(format!(
            "kernel width {sigma:.3e} would extend the grid by {extra} nodes"
        )));
    }
    let extended = grid.extended(extra);
    let weights: Vec<f64> = signal
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr() * dx)
        .collect();
    let densities = par::indexed_map(extended.n_points(), |i| {
        let x = extended.node(i);
        grid.nodes()
            .zip(&weights)
            .map(|(y, w)| w * gaussian_density(x, y, sigma_eff2))
            .sum()
    });
    Distribution::new(extended, densities)
}

/// State conditioned on the inferred value `x`: the signal multiplied by the
/// real positive Gaussian envelope centered at `x`, renormalized.
pub fn conditional_state(
    signal: &GridWavefunction,
    x: f64,
    sigma_eff2: f64,
) -> Result<GridWavefunction, MeasurementError> {
    if !sigma_eff2.is_finite() || sigma_eff2 <= 0.0 {
        return Err(MeasurementError::InvalidParameter(format!(
            "kernel variance must be positive and finite, got {sigma_eff2}"
        )));
    }
    let grid = signal.grid();
    let mut amplitudes: Vec<Complex64> = grid
        .nodes()
        .zip(signal.amplitudes())
        .map(|(y, a)| a * (-(y - x).powi(2) / (4.0 * sigma_eff2)).exp())
        .collect();
    let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
    if norm_sq < 1e-300 {
        return Err(MeasurementError::VanishingProbability(x));
    }
    let inv = 1.0 / norm_sq.sqrt();
    for a in &mut amplitudes {
        *a *= inv;
    }
    Ok(GridWavefunction::from_raw(grid, amplitudes))
}

/// Non-selective output state: the outcome average of the conditional states.
///
/// In closed form the measurement damps coherences by the Gaussian factor
/// `exp(-(y - y')^2 / (8 sigma_eff^2))` while leaving the diagonal untouched;
/// the identity is validated against explicit quadrature over outcomes in the
/// acceptance suite.
pub fn nonselective_output(signal: &GridWavefunction, sigma_eff2: f64) -> GridDensityMatrix {
    let grid = signal.grid();
    let n = grid.n_points();
    let psi = signal.amplitudes();
    let inv_8s2 = 1.0 / (8.0 * sigma_eff2);
    let mut elements = vec![Complex64::ZERO; n * n];
    par::for_each_row(&mut elements, n, |i, row| {
        let yi = grid.node(i);
        let a = psi[i];
        for (j, v) in row.iter_mut().enumerate() {
            let dy = yi - grid.node(j);
            *v = a * psi[j].conj() * (-dy * dy * inv_8s2).exp();
        }
    });
    GridDensityMatrix::from_raw(grid, elements)
}

/// Draws `n` i.i.d. inferred values by inverse-CDF sampling with linear
/// interpolation between grid nodes. Deterministic for a fixed seed.
pub fn sample_outcomes(
    signal: &GridWavefunction,
    sigma_eff2: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, MeasurementError> {
    if n == 0 {
        return Err(MeasurementError::EmptySample);
    }
    let dist = inferred_distribution(signal, sigma_eff2)?;
    Ok(sample_distribution(&dist, n, seed))
}

/// Inverse-CDF sampling from an arbitrary [`Distribution`].
pub fn sample_distribution(dist: &Distribution, n: usize, seed: u64) -> Vec<f64> {
    let grid = dist.grid();
    let p = dist.densities();
    let m = grid.n_points();
    // trapezoidal CDF at the nodes, rescaled to end exactly at 1
    let mut cdf = Vec::with_capacity(m);
    cdf.push(0.0);
    for j in 1..m {
        let step = 0.5 * (p[j - 1] + p[j]) * grid.dx();
        cdf.push(cdf[j - 1] + step);
    }
    let total = *cdf.last().expect("grid has nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let hi = cdf.partition_point(|&c| c <= u).min(m - 1);
            let lo = hi - 1;
            let span = cdf[hi] - cdf[lo];
            let frac = if span > 0.0 {
                (u - cdf[lo]) / span
            } else {
                0.5
            };
            grid.node(lo) + frac * grid.dx()
        })
        .collect()
}

/// Pump amplitude that realizes a displacement `alpha*` on a beam splitter of
/// transmittivity `tau3`: `z = alpha* / sqrt(1 - tau3)`.
pub fn pump_amplitude(alpha_star: f64, tau3: f64) -> Result<f64, MeasurementError> {
    if !tau3.is_finite() || tau3 <= 0.0 || tau3 >= 1.0 {
        return Err(MeasurementError::InvalidTransmittivity(tau3));
    }
    Ok(alpha_star / (1.0 - tau3).sqrt())
}
