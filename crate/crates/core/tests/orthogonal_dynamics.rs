use approx::assert_relative_eq;
use gaga::datagen::gen_orthogonal;
use gaga::theory::{asymptotic_tuning_limit, classify_trajectory, ScalarRegime, TrajectoryClass};
use gaga::{gaga_fit, GagaConfig};

#[test]
fn tuning_path_follows_scalar_map() {
    let p = 6;
    let beta = [0.3, 0.0, 0.05, -0.2, 0.0, 0.01];
    let sigma_star = [1.0, 0.8, 1.2, 0.5, 2.0, 1.0];
    let inst = gen_orthogonal(9, 400, p, &beta, &sigma_star).unwrap();
    let k = 30;
    let fit = gaga_fit(&inst.problem, &GagaConfig::new(k, 2.0).with_trace(true)).unwrap();
    let trace = fit.trace.unwrap();
    let g = inst.problem.design().gram();
    let c = inst.problem.design().transpose_mul_vec(inst.problem.response());
    for j in 0..p {
        let regime = ScalarRegime::new(c[j] * c[j], g[(j, j)], 2.0).unwrap();
        let expected = classify_trajectory(&regime, k).unwrap().values;
        let path = trace.tuning_path(j);
        for (step, (&a, &b)) in path.iter().zip(&expected).enumerate() {
            assert_relative_eq!(a, b, max_relative = 1e-9 * (step as f64 + 1.0));
        }
    }
}

#[test]
fn large_sample_tuning_approaches_limit() {
    let beta = [1.0, 0.5, 2.0];
    let inst = gen_orthogonal(4, 200_000, 3, &beta, &[1.0; 3]).unwrap();
    let fit = gaga_fit(&inst.problem, &GagaConfig::new(200, 2.0)).unwrap();
    for j in 0..3 {
        // b^K = α b*
        let limit = asymptotic_tuning_limit(beta[j], 2.0).unwrap();
        assert_relative_eq!(2.0 * fit.tuning[j], limit, max_relative = 0.05);
    }
    // zero-signal regime diverges
    let r = ScalarRegime::new(0.0, 1000.0, 2.0).unwrap();
    assert_eq!(classify_trajectory(&r, 1000).unwrap().classification, TrajectoryClass::Divergent);
}
