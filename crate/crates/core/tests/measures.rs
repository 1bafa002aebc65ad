use parabolic_core::analysis::{ball_measure, muckenhoupt_constant, parabolic_maximal, BallSampler, WeightDomain, WeightSpec};
use parabolic_core::operators::solve_full;
use parabolic_core::{CoefficientField, GridSpec, SampledField};

#[test]
fn ball_measure_scales_with_homogeneous_dimension() {
    for (dim, nx) in [(1, 512), (2, 128)] {
        let grid = GridSpec::uniform(dim, (-1.0, 1.0), 2049, (-1.0, 1.0), nx, 0).unwrap();
        let f = SampledField::zeros(grid);
        let center = vec![0.013; dim + 1];
        let radii = [0.5, 1.0, 2.0];
        let scaled: Vec<f64> = radii.iter().map(|&r| ball_measure(&f, &center, r).unwrap() / r.powi(dim as i32 + 2)).collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo <= 1.02, "dim {dim}: {scaled:?}");
        // the continuum measure 2r²·|B₁|rⁿ
        let exact = 2.0 * [2.0, std::f64::consts::PI][dim - 1];
        assert!((scaled[2] / exact - 1.0).abs() <= 0.02, "{scaled:?}");
    }
}

#[test]
fn a1_weights_are_pointwise_dominated_by_their_maximal_function() {
    let w = WeightSpec::power(WeightDomain::Spacetime, 1, -1.0);
    let grid = GridSpec::uniform(1, (-2.0, 2.0), 257, (-2.0, 2.0), 128, 0).unwrap();
    let half = 0.5 * grid.h_x();
    let values = SampledField::from_fn(grid.clone(), |t, x| w.node_value(&[t, x[0]], half));
    let radii: Vec<f64> = (0..4).map(|k| 0.1 * 2f64.powi(k)).collect();
    let a1 = muckenhoupt_constant(&w, 1.0, &BallSampler::symmetric(2, 1.0, 9, 0.05, 0)).unwrap().constant;
    let mut worst = 0.0f64;
    for k in (96..=160).step_by(8) {
        for q in (40..=88).step_by(8) {
            let point = [grid.time.node(k), grid.space.coords(q)[0]];
            let m = parabolic_maximal(&values, &point, &radii).unwrap();
            worst = worst.max(m / w.node_value(&point, half));
        }
    }
    assert!(worst.is_finite() && worst >= 1.0, "{worst}");
    assert!(worst <= 1.25 * a1, "{worst} vs {a1}");
}

#[test]
fn tensor_products_of_class_weights_stay_in_class() {
    for (gt, gx) in [(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)] {
        let nu = WeightSpec::power(WeightDomain::Time, 1, gt);
        let omega = WeightSpec::power(WeightDomain::Space, 1, gx);
        let w = WeightSpec::tensor(nu, omega).unwrap();
        let c = muckenhoupt_constant(&w, 2.0, &BallSampler::symmetric(2, 2.0, 9, 0.05, 1)).unwrap().constant;
        assert!(c.is_finite() && c >= 1.0, "{gt} {gx}: {c}");
    }
}

#[test]
fn solutions_contract_in_lp() {
    let bump = |r2: f64| if r2 < 1.0 { (1.0 - r2).powi(6) } else { 0.0 };
    let fields = [
        CoefficientField::identity(1),
        CoefficientField::sine_1d(),
        CoefficientField::two_level(1),
        CoefficientField::random_piecewise(1, 0.4, 11, 1.0, 8.0).unwrap(),
    ];
    for field in &fields {
        let mut grid = GridSpec::uniform(1, (-2.0, 2.0), 65, (-4.0, 4.0), 64, 0).unwrap();
        grid.padding = grid.recommended_padding(field.lambda(), 4.0);
        let h = grid.h_x();
        let f = SampledField::from_fn(grid, |t, x| bump(((t + 0.3) / 0.8).powi(2)) * bump((x[0] - 0.2).powi(2) / 2.25));
        let u = solve_full(field, &f).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            assert!(u.lp_norm(p) <= (1.0 + 5.0 * h) * f.lp_norm(p), "p = {p}");
        }
    }
}
