use nalgebra::DMatrix;
use parabolic_core::analysis::{mixed_norm, parabolic_distance, MixedNormSpec};
use parabolic_core::corrections::trace_identity_residual;
use parabolic_core::kernel::{kernel_eval, kernel_fourier, kernel_jet, kernel_mass, FourierConvention, KernelPoint, HERMITE_ORDER};
use parabolic_core::operators::kernel_cancellation;
use parabolic_core::{CoefficientField, GridSpec, SampledField};
use proptest::prelude::*;
use std::sync::LazyLock;

static FIELDS: LazyLock<Vec<CoefficientField>> = LazyLock::new(|| {
    vec![
        CoefficientField::identity(1),
        CoefficientField::constant(DMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]), 0.5).unwrap(),
        CoefficientField::sine_1d(),
        CoefficientField::sine_2d(),
        CoefficientField::two_level(1),
        CoefficientField::two_level(2),
        CoefficientField::random_piecewise(1, 0.4, 11, 1.0, 8.0).unwrap(),
        CoefficientField::random_piecewise(2, 0.4, 3, 1.0, 8.0).unwrap(),
    ]
});

fn field() -> impl Strategy<Value = &'static CoefficientField> {
    (0..FIELDS.len()).prop_map(|i| &FIELDS[i])
}

/// A field with a point `x` of its dimension scaled to `τ`.
fn field_point() -> impl Strategy<Value = (&'static CoefficientField, f64, f64, Vec<f64>)> {
    (field(), -3.0..3.0f64, 0.05..5.0f64).prop_flat_map(|(f, t, tau)| {
        let s = 2.0 * tau.sqrt();
        (Just(f), Just(t), Just(tau), prop::collection::vec(-s..s, f.dim()))
    })
}

fn rayleigh(a: &DMatrix<f64>, xi: &[f64]) -> f64 {
    let v = DMatrix::from_column_slice(xi.len(), 1, xi);
    (v.transpose() * a * &v)[(0, 0)] / xi.iter().map(|c| c * c).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn averaged_matrix_is_elliptic((f, t, tau, xi) in field_point()) {
        prop_assume!(xi.iter().any(|c| c.abs() > 1e-6));
        let pair = f.averaged(t, tau).unwrap();
        let q = rayleigh(&pair.a, &xi);
        let l = f.lambda();
        prop_assert!(q >= l * tau * (1.0 - 1e-12) && q <= tau / l * (1.0 + 1e-12), "{q} vs [{}, {}]", l * tau, tau / l);
        prop_assert!(pair.b.clone().cholesky().is_some());
        let id = &pair.a * &pair.b;
        prop_assert!((id - DMatrix::identity(f.dim(), f.dim())).amax() < 1e-10);
    }

    #[test]
    fn integrals_are_additive(f in field(), t in -4.0..4.0f64, tau1 in 0.0..3.0f64, tau2 in 0.0..3.0f64) {
        prop_assert!(f.additivity_residual(t, tau1, tau2).unwrap() <= 1e-10);
    }

    #[test]
    fn kernel_vanishes_before_the_source(f in field(), t in -3.0..3.0f64, tau in -5.0..0.0f64, x in -2.0..2.0f64) {
        let point = KernelPoint::new(t, tau, &vec![x; f.dim()]);
        prop_assert_eq!(kernel_eval(f, &point).unwrap(), 0.0);
        let jet = kernel_jet(f, &point, false).unwrap();
        prop_assert_eq!(jet.p, 0.0);
        prop_assert!(jet.grad.iter().all(|v| *v == 0.0));
        prop_assert_eq!(jet.dt, 0.0);
        prop_assert_eq!(jet.dtau, 0.0);
    }

    #[test]
    fn kernel_is_positive_with_mass_e_minus_tau((f, t, tau, x) in field_point()) {
        prop_assert!(kernel_eval(f, &KernelPoint::new(t, tau, &x)).unwrap() >= 0.0);
        let mass = kernel_mass(f, t, tau, HERMITE_ORDER).unwrap();
        prop_assert!((mass - (-tau).exp()).abs() <= 1e-10);
        let zero = vec![0.0; f.dim()];
        let symbol = kernel_fourier(f, t, tau, &zero, FourierConvention::Nonunitary).unwrap();
        prop_assert!((symbol - mass).abs() <= 1e-10);
    }

    #[test]
    fn gradient_matches_differences((f, t, tau, x) in field_point()) {
        let jet = kernel_jet(f, &KernelPoint::new(t, tau, &x), false).unwrap();
        let h = 1e-5 * tau.sqrt();
        let scale = jet.grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) + jet.p / tau.sqrt();
        for i in 0..f.dim() {
            let at = |d: f64| {
                let mut y = x.clone();
                y[i] += d;
                kernel_eval(f, &KernelPoint::new(t, tau, &y)).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            prop_assert!((fd - jet.grad[i]).abs() <= 1e-6 * scale, "{fd} vs {}", jet.grad[i]);
        }
    }

    #[test]
    fn second_derivatives_cancel(f in field(), t in -3.0..3.0f64, tau in 0.05..5.0f64, i in 0..2usize, j in 0..2usize) {
        prop_assume!(i < f.dim() && j < f.dim());
        prop_assert!(kernel_cancellation(f, t, tau, i, j).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn parabolic_distance_is_a_metric(p in prop::collection::vec(-5.0..5.0f64, 9)) {
        let (a, b, c) = (&p[0..3], &p[3..6], &p[6..9]);
        let d = |x: &[f64], y: &[f64]| parabolic_distance(x, y).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert_eq!(d(a, b), d(b, a));
        // κ = 1 for the max form, within the asserted κ ≤ 2
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn mixed_norm_with_equal_exponents_is_lp(p in 1.0..6.0f64, seed in any::<u64>()) {
        let grid = GridSpec::uniform(1, (-1.0, 1.0), 9, (-2.0, 2.0), 16, 0).unwrap();
        let f = SampledField::from_fn(grid, |t, x| ((seed % 97) as f64 + 3.0 * t + 7.0 * x[0]).sin());
        let mixed = mixed_norm(&f, &MixedNormSpec::unweighted(1, p, p)).unwrap();
        let plain = f.lp_norm(p);
        prop_assert!((mixed - plain).abs() <= 1e-12 * plain);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_identity_holds(f in field(), t in -3.0..3.0f64) {
        prop_assert!(trace_identity_residual(f, t).unwrap() <= 2e-8);
    }
}
