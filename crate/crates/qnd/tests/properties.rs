//! Property tests for the structural invariants: unitarity of the grid
//! operations, the feedback identities, and bounds on the fidelity figures.

use num_complex::Complex64;
use proptest::prelude::*;

use qnd::fidelity::statistical_fidelity;
use qnd::measurement::{nonselective_output, Distribution};
use qnd::tradeoff::{physical_from_x, RealizationConstraint};
use qnd::{GridSpec, GridWavefunction, SetupParams, SqueezeDirection};

fn test_grid() -> GridSpec {
    GridSpec::new(384, 12.0).unwrap()
}

/// Random normalized superposition of two Gaussians. Means and variances are
/// kept small against the wide test grid so that the tails stay negligible
/// even after the +-0.4 squeezes exercised below; pointwise round-trip bounds
/// only hold for states whose off-grid continuation is genuinely zero.
fn arb_state() -> impl Strategy<Value = GridWavefunction> {
    (
        -1.5..1.5f64,
        0.05..0.4f64,
        -1.5..1.5f64,
        0.05..0.4f64,
        0.2..1.0f64,
        0.0..std::f64::consts::TAU,
    )
        .prop_map(|(m1, v1, m2, v2, w, phase)| {
            let grid = test_grid();
            let a = GridWavefunction::gaussian(grid, m1, v1).unwrap();
            let b = GridWavefunction::gaussian(grid, m2, v2).unwrap();
            let cb = Complex64::from_polar(1.0 - w, phase);
            GridWavefunction::superpose(&a, &b, Complex64::new(w, 0.0), cb).unwrap_or(a)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn displace_is_unitary_and_invertible(state in arb_state(), alpha in -1.5..1.5f64) {
        let moved = state.displace(alpha).unwrap();
        prop_assert!((moved.norm_sq() - 1.0).abs() < 1e-8);
        prop_assert!((moved.mean_quadrature() - state.mean_quadrature() - alpha).abs() < 1e-6);
        let back = moved.displace(-alpha).unwrap();
        for (a, b) in back.amplitudes().iter().zip(state.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn squeeze_is_unitary_and_invertible(state in arb_state(), r in -0.4..0.4f64) {
        let squeezed = state.squeeze(r).unwrap();
        prop_assert!((squeezed.norm_sq() - 1.0).abs() < 1e-8);
        let expect = state.quadrature_variance() * (-2.0 * r).exp();
        prop_assert!(((squeezed.quadrature_variance() - expect) / expect).abs() < 1e-5);
        let back = squeezed.squeeze(-r).unwrap();
        for (a, b) in back.amplitudes().iter().zip(state.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn feedback_identity_holds(raw in -3.0..3.0f64, phi in 0.05..1.5f64) {
        let setup = SetupParams::new(phi).unwrap();
        let out = setup.feedback(raw);
        prop_assert!((out.alpha_star - out.inferred_x * phi.tan() * phi.sin()).abs() < 1e-12);
        prop_assert!((out.inferred_x * -phi.sin() - raw).abs() < 1e-12);
    }

    #[test]
    fn statistical_fidelity_is_symmetric_and_bounded(
        m1 in -1.0..1.0f64, v1 in 0.05..0.8f64,
        m2 in -1.0..1.0f64, v2 in 0.05..0.8f64,
    ) {
        let grid = test_grid();
        let p = Distribution::quadrature(&GridWavefunction::gaussian(grid, m1, v1).unwrap());
        let q = Distribution::quadrature(&GridWavefunction::gaussian(grid, m2, v2).unwrap());
        let pq = statistical_fidelity(&p, &q).unwrap();
        let qp = statistical_fidelity(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&pq));
        prop_assert!((statistical_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overlap_fidelity_is_bounded(state in arb_state(), sigma_eff2 in 0.02..4.0f64) {
        let rho = nonselective_output(&state, sigma_eff2);
        let f = state.fidelity_with(&rho).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f), "F = {f}");
    }

    #[test]
    fn physical_realization_round_trips(
        x_target in 0.1..5.0f64,
        phi in 0.1..1.4f64,
        r in 0.0..1.0f64,
        sigma_s2 in 0.05..1.0f64,
    ) {
        let a = physical_from_x(x_target, sigma_s2, RealizationConstraint::FixPhi(phi)).unwrap();
        prop_assert!((a.x - x_target).abs() < 1e-10);
        let b = physical_from_x(
            x_target,
            sigma_s2,
            RealizationConstraint::FixProbe { r, direction: SqueezeDirection::AntiSqueezed },
        )
        .unwrap();
        prop_assert!((b.x - x_target).abs() < 1e-10);
        prop_assert!((b.photon_number - r.sinh().powi(2)).abs() < 1e-12);
    }
}
