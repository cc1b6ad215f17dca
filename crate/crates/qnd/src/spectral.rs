//! Band-limited (Fourier) interpolation primitives on uniformly sampled data.
//!
//! Samples are treated as one period of a trigonometric interpolant. All
//! routines work in node units: a fractional position `s` refers to the
//! coordinate `y = -x_max + s*dx`. For even lengths the Nyquist bin is mapped
//! onto `cos(pi s)`, the symmetric choice that keeps real inputs real.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT plans of a fixed length, shareable across threads.
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl FftPair {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/n normalization rustfft omits.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed spectral index of FFT bin `k`: 0, 1, .., n/2, -(n/2 - 1), .., -1.
/// For even `n` the Nyquist bin is reported as +n/2 and handled specially.
#[inline]
pub(crate) fn signed_freq(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if 2 * k <= n {
        k
    } else {
        k - n
    }
}

#[inline]
fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && 2 * k == n
}

/// In-place circular translation by `shift` nodes: `g(s) -> g(s - shift)`.
///
/// Integer shifts reduce to an exact rotation of the samples; fractional
/// shifts are evaluated on the trigonometric interpolant. Mass moved past an
/// edge wraps around, so callers must keep the support away from the
/// boundary.
pub(crate) fn translate(fft: &FftPair, samples: &mut [Complex64], shift: f64) {
    let n = fft.len();
    debug_assert_eq!(samples.len(), n);
    if shift == 0.0 {
        return;
    }
    fft.forward(samples);
    let step = -std::f64::consts::TAU * shift / n as f64;
    for (k, v) in samples.iter_mut().enumerate() {
        if is_nyquist(k, n) {
            // cos(pi(s - shift)) projected back on cos(pi s)
            *v *= (std::f64::consts::PI * shift).cos();
        } else {
            let angle = step * signed_freq(k, n) as f64;
            *v *= Complex64::from_polar(1.0, angle);
        }
    }
    fft.inverse(samples);
}

/// Forward spectrum of `samples`, for repeated `eval` calls.
pub(crate) fn spectrum(fft: &FftPair, samples: &[Complex64]) -> Vec<Complex64> {
    let mut buf = samples.to_vec();
    fft.forward(&mut buf);
    buf
}

/// Evaluates the interpolant at fractional node position `s` (periodic).
pub(crate) fn eval(spec: &[Complex64], s: f64) -> Complex64 {
    let n = spec.len();
    let step = std::f64::consts::TAU * s / n as f64;
    let mut acc = Complex64::ZERO;
    for (k, &c) in spec.iter().enumerate() {
        if is_nyquist(k, n) {
            acc += c * (std::f64::consts::PI * s).cos();
        } else {
            let angle = step * signed_freq(k, n) as f64;
            acc += c * Complex64::from_polar(1.0, angle);
        }
    }
    acc / n as f64
}
