mod common;

use approx::assert_relative_eq;
use common::{explicit_inverse, Lcg};
use gaga::model::{spd_solve_with_inverse_diagonal, spd_solve_with_tolerance};
use gaga::{GagaError, Matrix};

fn shifted(g: &Matrix<f64>, b: &[f64]) -> Matrix<f64> {
    let mut m = g.clone();
    for (i, &v) in b.iter().enumerate() {
        m[(i, i)] += v;
    }
    m
}

#[test]
fn penalized_solve_matches_explicit_inverse() {
    let mut rng = Lcg(17);
    for &(n, p) in &[(12, 3), (40, 20), (300, 150), (400, 230)] {
        let x = rng.matrix(n, p);
        let g = x.gram();
        let b: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { 0.0 } else { 10.0 * rng.uniform() }).collect();
        let rhs: Vec<f64> = (0..p).map(|_| rng.uniform() - 0.5).collect();
        let (sol, diag) = spd_solve_with_inverse_diagonal(&g, &b, &rhs).unwrap();
        let inv = explicit_inverse(&shifted(&g, &b));
        let expected = inv.mul_vec(&rhs);
        for j in 0..p {
            assert_relative_eq!(sol[j], expected[j], epsilon = 1e-10, max_relative = 1e-8);
            assert_relative_eq!(diag[j], inv[(j, j)], max_relative = 1e-9);
        }
    }
}

#[test]
fn single_precision_kernel() {
    let g = Matrix::from_rows(&[[4.0f32, 1.0], [1.0, 3.0]]);
    let (sol, diag) = spd_solve_with_inverse_diagonal(&g, &[1.0, 0.0], &[1.0, 2.0]).unwrap();
    // (G + diag(1, 0))⁻¹ = [[3, -1], [-1, 5]] / 14
    assert_relative_eq!(sol[0], 1.0 / 14.0, max_relative = 1e-6);
    assert_relative_eq!(sol[1], 9.0 / 14.0, max_relative = 1e-6);
    assert_relative_eq!(diag[0], 3.0 / 14.0, max_relative = 1e-6);
    assert_relative_eq!(diag[1], 5.0 / 14.0, max_relative = 1e-6);
}

#[test]
fn singular_system_reports_pivot() {
    let g = Matrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
    let err = spd_solve_with_tolerance(&g, &[0.0; 3], &[1.0; 3], 1e-12).unwrap_err();
    assert_eq!(err, GagaError::SingularSystem { pivot: 1 });
    // a positive penalty on the dependent coordinate restores definiteness
    assert!(spd_solve_with_tolerance(&g, &[0.0, 1.0, 0.0], &[1.0; 3], 1e-12).is_ok());
    assert_eq!(
        spd_solve_with_tolerance(&g, &[0.0, -1.0, 0.0], &[1.0; 3], 0.0).unwrap_err().kind(),
        "InvalidInput"
    );
}
