//! Literal two-mode simulation of the measurement chain.
//!
//! The joint signal/probe wavefunction is built as a product on an `n x n`
//! grid, the beam splitter is applied as the plane rotation it induces on the
//! quadrature coordinates, the homodyne projection is a band-limited slice of
//! the probe axis, and the feedback displacement plus corrective squeeze act
//! on the remaining signal mode. Nothing here reuses the single-mode kernel
//! formulas, which makes this module their independent cross-check.
//!
//! The rotation is decomposed into three spectral shears (with an exact
//! quarter-turn permutation first when the angle exceeds pi/4), so every step
//! stays band-limited.

use num_complex::Complex64;

use crate::error::MeasurementError;
use crate::grid::{GridSpec, GridWavefunction};
use crate::par;
use crate::spectral::{self, FftPair};

use super::{ProbeSpec, SetupParams};

/// Largest joint grid (per axis) the chain will materialize.
pub const MAX_TWO_MODE_POINTS: usize = 512;

/// The rotated joint state of signal and probe, ready to be sliced at any
/// homodyne outcome.
///
/// Constructing the chain performs the beam-splitter rotation once; each call
/// to [`TwoModeChain::outcome`] then projects, displaces and squeezes for one
/// inferred value.
pub struct TwoModeChain {
    grid: GridSpec,
    setup: SetupParams,
    /// Per signal row, the FFT of the rotated field along the probe axis.
    probe_spectra: Vec<Complex64>,
}

impl TwoModeChain {
    pub fn new(
        signal: &GridWavefunction,
        probe: &ProbeSpec,
        setup: &SetupParams,
    ) -> Result<Self, MeasurementError> {
        let grid = signal.grid();
        let n = grid.n_points();
        if n > MAX_TWO_MODE_POINTS {
            return Err(MeasurementError::TwoModeGridTooLarge(n));
        }
        let probe_wf = probe.wavefunction(grid)?;

        let psi_s = signal.amplitudes();
        let psi_p = probe_wf.amplitudes();
        let mut field = vec![Complex64::ZERO; n * n];
        par::for_each_row(&mut field, n, |i, row| {
            let a = psi_s[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v = a * psi_p[j];
            }
        });

        rotate_plane(&mut field, grid, setup.phi());

        // spectra along the probe axis, reused by every slice
        let fft = FftPair::new(n);
        par::for_each_row(&mut field, n, |_, row| fft.forward(row));

        Ok(Self {
            grid,
            setup: *setup,
            probe_spectra: field,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Probability density of the inferred value `x`.
    pub fn density(&self, inferred_x: f64) -> Result<f64, MeasurementError> {
        let (density, _) = self.slice(inferred_x)?;
        Ok(density)
    }

    /// Density of `x` together with the conditional output state after the
    /// feedback displacement and the corrective squeeze.
    pub fn outcome(&self, inferred_x: f64) -> Result<(f64, GridWavefunction), MeasurementError> {
        let (density, mut slice) = self.slice(inferred_x)?;
        let norm = (slice.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt();
        let inv = 1.0 / norm;
        for a in &mut slice {
            *a *= inv;
        }
        let state = GridWavefunction::from_raw(self.grid, slice);
        let alpha_star = self.setup.feedback_gain() * inferred_x;
        let displaced = state.displace(alpha_star)?;
        // restore the signal scale: the beam splitter stretched the envelope
        // by 1/cos(phi), so the corrective stage compresses it back
        let restored = displaced.squeeze(-self.setup.r_star())?;
        Ok((density, restored))
    }

    /// Band-limited slice of the rotated field at the probe coordinate
    /// `X = -x sin(phi)`, with the inferred-value density `sin(phi) |slice|^2`.
    fn slice(&self, inferred_x: f64) -> Result<(f64, Vec<Complex64>), MeasurementError> {
        let n = self.grid.n_points();
        let sin_phi = self.setup.phi().sin();
        let reading = -inferred_x * sin_phi;
        if !reading.is_finite() || reading.abs() > self.grid.x_max() {
            return Err(MeasurementError::InvalidParameter(format!(
                "homodyne reading {reading:.3} falls outside the probe grid"
            )));
        }
        let s = (reading + self.grid.x_max()) / self.grid.dx();
        // phase vector of the interpolant evaluated at s, Nyquist as cosine
        let phases: Vec<Complex64> = (0..n)
            .map(|k| {
                if n.is_multiple_of(2) && 2 * k == n {
                    Complex64::new((std::f64::consts::PI * s).cos() / n as f64, 0.0)
                } else {
                    let angle =
                        std::f64::consts::TAU * spectral::signed_freq(k, n) as f64 * s / n as f64;
                    Complex64::from_polar(1.0 / n as f64, angle)
                }
            })
            .collect();
        let spectra = &self.probe_spectra;
        let slice: Vec<Complex64> = par::indexed_map(n, |i| {
            let row = &spectra[i * n..(i + 1) * n];
            row.iter().zip(&phases).map(|(c, w)| c * w).sum()
        });
        let weight: f64 = slice.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx();
        let density = sin_phi * weight;
        if density < 1e-300 {
            return Err(MeasurementError::VanishingSlice(inferred_x));
        }
        Ok((density, slice))
    }
}

/// In-place `field -> field . R(theta)`: the sampled function becomes
/// `(u, v) -> field(u cos(theta) - v sin(theta), u sin(theta) + v cos(theta))`.
pub(crate) fn rotate_plane(field: &mut [Complex64], grid: GridSpec, theta: f64) {
    let n = grid.n_points();
    debug_assert_eq!(field.len(), n * n);
    if theta.abs() > std::f64::consts::FRAC_PI_4 + 1e-12 {
        // split off an exact quarter turn and rotate the remainder
        rotate_plane(field, grid, theta - std::f64::consts::FRAC_PI_2);
        let before = field.to_vec();
        par::for_each_row(field, n, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = before[(n - 1 - j) * n + i];
            }
        });
        return;
    }
    if theta == 0.0 {
        return;
    }
    let t = (theta / 2.0).tan();
    let s = theta.sin();
    let fft = FftPair::new(n);
    shear_signal_axis(field, &fft, grid, -t);
    shear_probe_axis(field, &fft, grid, s);
    shear_signal_axis(field, &fft, grid, -t);
}

/// `field(u, v) -> field(u + a v, v)`: per probe column, a translation along
/// the signal axis proportional to the probe coordinate.
fn shear_signal_axis(field: &mut [Complex64], fft: &FftPair, grid: GridSpec, a: f64) {
    let n = grid.n_points();
    transpose(field, n);
    // rows are now signal-axis lines at fixed probe index
    par::for_each_row(field, n, |j, row| {
        let shift = -a * grid.node(j) / grid.dx();
        spectral::translate(fft, row, shift);
    });
    transpose(field, n);
}

/// `field(u, v) -> field(u, v + b u)`: per signal row, a translation along the
/// probe axis proportional to the signal coordinate.
fn shear_probe_axis(field: &mut [Complex64], fft: &FftPair, grid: GridSpec, b: f64) {
    let n = grid.n_points();
    par::for_each_row(field, n, |i, row| {
        let shift = -b * grid.node(i) / grid.dx();
        spectral::translate(fft, row, shift);
    });
}

fn transpose(field: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            field.swap(i * n + j, j * n + i);
        }
    }
}

/// One-shot form of the chain: density and conditional state for a single
/// inferred value. Build a [`TwoModeChain`] instead when sweeping outcomes,
/// so the rotation is paid once.
pub fn two_mode_outcome(
    signal: &GridWavefunction,
    probe: &ProbeSpec,
    setup: &SetupParams,
    inferred_x: f64,
) -> Result<(f64, GridWavefunction), MeasurementError> {
    TwoModeChain::new(signal, probe, setup)?.outcome(inferred_x)
}
