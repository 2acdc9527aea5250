use oscikam::hermite::hermite_function;
use oscikam::variational::*;
use proptest::prelude::*;

fn unit(j: usize, n: usize, mu: f64) -> Vec<f64> {
    let mut c = vec![0.0; n];
    c[j] = mu;
    c
}

#[test]
fn linear_case_recovers_hermite_ground_state() {
    for mu in [0.3, 0.7, 1.5] {
        let m = minimize(&VariationalProblem::new(mu, 1.0, 16, 2), 3).unwrap();
        let want = unit(0, 16, mu);
        let d: f64 = m[0].coeffs.iter().zip(&want).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(d < 1e-10, "mu {mu}: {d:e}");
        assert!((m[0].lambda - 2.0).abs() < 1e-12);
        assert!(m[0].residual <= 1e-12);
        assert!((m[1].lambda - 4.0).abs() < 1e-12);
    }
}

#[test]
fn residual_of_exact_linear_solution_and_lambda_shift() {
    let c = unit(0, 12, 0.8);
    assert!(residual(&c, 2.0, 1.0).unwrap() <= 1e-12);
    for d in [1e-3, -1e-4] {
        let r = residual(&c, 2.0 + d, 1.0).unwrap();
        assert!((r - d.abs() * 0.8).abs() < 1e-12);
    }
}

#[test]
fn quartic_integral_of_ground_state_is_exact() {
    let rule = NonlinearRule::new(8, 3.0).unwrap();
    assert!(rule.exact);
    let v = rule.power_integral(&unit(0, 8, 1.0));
    assert!((v - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    // |phi|^2 phi against h_1 is the same integral
    let n = rule.nonlinear_coeffs(&unit(0, 8, 1.0));
    assert!((n[0] - v).abs() < 1e-15);
    assert!(n[1].abs() < 1e-15);
}

#[test]
fn nonlinear_coefficients_match_direct_quadrature() {
    let c = [0.4, -0.1, 0.05, 0.02, 0.0, 0.01];
    let rule = NonlinearRule::new(c.len(), 3.0).unwrap();
    let n = rule.nonlinear_coeffs(&c);
    let phi = |x: f64| c.iter().enumerate().map(|(j, a)| a * hermite_function(j + 1, x)).sum::<f64>();
    let (a, b, steps) = (-12.0, 12.0, 24000);
    let h = (b - a) / steps as f64;
    for (jj, nj) in n.iter().enumerate() {
        let mut s = 0.0;
        for i in 0..=steps {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            s += w * phi(x).powi(3) * hermite_function(jj + 1, x);
        }
        assert!((s * h - nj).abs() < 1e-12, "{jj}: {} vs {nj}", s * h);
    }
}

#[test]
fn cubic_minimizers_satisfy_constraints_and_beat_candidate() {
    let prob = VariationalProblem::new(0.5, 3.0, 24, 3);
    let m = minimize(&prob, 11).unwrap();
    for x in &m {
        let n: f64 = x.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 0.5).abs() < 1e-10);
        assert!(x.lambda > 0.0);
    }
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let d: f64 = m[i].coeffs.iter().zip(&m[j].coeffs).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-8);
        }
    }
    let rule = NonlinearRule::new(24, 3.0).unwrap();
    assert!(m[0].energy <= energy(&rule, 1.0, &unit(0, 24, 0.5)));
    // parity separates the first two states, so they solve the stationary equation
    for x in &m[..2] {
        assert!(x.residual <= 1e-6, "{:e}", x.residual);
        let dev = verify_periodic_orbit(&rule, 1.0, &x.coeffs, x.lambda, 10.0, 40, 1e-12).unwrap();
        assert!(dev <= 1e-5, "{dev:e}");
    }
    // defocusing shifts lambda up from 2j - 1
    assert!(m[0].lambda > 1.0 && m[1].lambda > 3.0 && m[2].lambda > 5.0);
}

#[test]
fn third_minimizer_defect_lies_along_first_state() {
    let prob = VariationalProblem::new(0.5, 3.0, 24, 3);
    let m = minimize(&prob, 11).unwrap();
    let rule = NonlinearRule::new(24, 3.0).unwrap();
    let g = gradient(&rule, 1.0, &m[2].coeffs);
    let r: Vec<f64> = g.iter().zip(&m[2].coeffs).map(|(a, c)| a - m[2].lambda * c).collect();
    let f = &m[0].coeffs;
    let beta: f64 = r.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / 0.25;
    let rest: f64 = r.iter().zip(f).map(|(a, b)| (a - beta * b).powi(2)).sum::<f64>().sqrt();
    assert!(rest < 1e-8, "{rest:e}");
    assert!((m[2].residual - beta.abs() * 0.5).abs() < 1e-8);
}

#[test]
fn linear_orbit_is_exact_rotation() {
    let rule = NonlinearRule::new(10, 1.0).unwrap();
    let c = unit(0, 10, 0.6);
    let dev = verify_periodic_orbit(&rule, 1.0, &c, 2.0, 20.0, 50, 1e-13).unwrap();
    assert!(dev <= 1e-10, "{dev:e}");
    assert_eq!(verify_periodic_orbit(&rule, 1.0, &c, 2.0, 0.0, 5, 1e-13).unwrap(), 0.0);
}

#[test]
fn focusing_lowers_lambda_and_guard_trips() {
    let m = minimize(&VariationalProblem::new(0.5, 3.0, 16, 1).focusing(0.1), 2).unwrap();
    assert!(m[0].lambda < 2.0 && m[0].residual < 1e-6);
    let r = minimize(&VariationalProblem::new(2.0, 3.0, 16, 1).focusing(50.0), 2);
    assert!(matches!(r, Err(VariationalError::Runaway { .. })), "{r:?}");
}

#[test]
fn rejects_bad_problems() {
    assert!(minimize(&VariationalProblem::new(0.0, 3.0, 8, 1), 0).is_err());
    assert!(minimize(&VariationalProblem::new(1.0, 0.5, 8, 1), 0).is_err());
    assert!(minimize(&VariationalProblem::new(1.0, 3.0, 4, 5), 0).is_err());
    assert!(minimize(&VariationalProblem::new(1.0, 5.0, 8, 1).focusing(0.1), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn gradient_matches_central_differences(
        c in proptest::collection::vec(-0.5f64..0.5, 8),
        d in proptest::collection::vec(-1.0f64..1.0, 8),
        p in prop_oneof![Just(1.0), Just(3.0), Just(2.0), Just(5.0)],
    ) {
        let rule = NonlinearRule::new(8, p).unwrap();
        let g = gradient(&rule, 1.0, &c);
        let an: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let h = 1e-5;
        let cp: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let cm: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        let fd = (energy(&rule, 1.0, &cp) - energy(&rule, 1.0, &cm)) / (2.0 * h);
        prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-2), "{an} vs {fd}");
    }

    #[test]
    fn lambda_is_scale_free_in_linear_case(c in proptest::collection::vec(-1.0f64..1.0, 6), s in 0.1f64..3.0) {
        prop_assume!(c.iter().any(|v| v.abs() > 0.1));
        let rule = NonlinearRule::new(6, 1.0).unwrap();
        let cs: Vec<f64> = c.iter().map(|v| v * s).collect();
        prop_assert!((multiplier(&rule, 1.0, &c) - multiplier(&rule, 1.0, &cs)).abs() < 1e-12);
    }
}
