use oscikam::grid::ThetaGrid;
use oscikam::hermite::SpectralBasis;
use oscikam::reducibility::*;
use oscikam::scalar::*;

fn omega() -> f64 {
    std::f64::consts::PI * (5f64.sqrt() - 1.0)
}

fn cfg() -> ReduceConfig<f64> {
    ReduceConfig::default()
}

#[test]
fn zero_potential_gives_q_zero() {
    let basis = SpectralBasis::<f64>::new(6).unwrap();
    let g = build_q(&QuasiPeriodicPotential::zero(1), &basis, 4, ThetaGrid::for_cutoff(1, 4)).unwrap();
    assert!(g.q.fam.coeffs.is_empty());
}

#[test]
fn cos_potential_gives_half_identity() {
    let jm = 8;
    let basis = SpectralBasis::<f64>::new(jm).unwrap();
    let g = build_q(&QuasiPeriodicPotential::cos_theta(1), &basis, 4, ThetaGrid::for_cutoff(1, 4)).unwrap();
    for (k, m) in &g.q.fam.coeffs {
        let want = if k[0].abs() == 1 { 0.5 } else { 0.0 };
        for a in 0..jm {
            for b in 0..jm {
                let e = if a == b { want } else { 0.0 };
                assert!((m[(a, b)] - cplx(e, 0.0)).norm() < 1e-13, "k {k:?} ({a},{b})");
            }
        }
    }
}

#[test]
fn decaying_potential_is_symmetric_and_banded() {
    let jm = 16;
    let basis = SpectralBasis::<f64>::new(jm).unwrap();
    let g = build_q(&QuasiPeriodicPotential::decaying_cos(1), &basis, 4, ThetaGrid::for_cutoff(1, 4)).unwrap();
    let b1 = &g.q.fam.coeffs[&vec![1]];
    let bm1 = &g.q.fam.coeffs[&vec![-1]];
    assert_eq!(*bm1, b1.conj());
    assert_eq!(*b1, b1.transpose());
    assert!(g.shell_fraction < 1e-12);
    // parity kills odd offsets; even offsets decay with |j - l|
    let row: Vec<f64> = (0..jm).map(|l| b1[(0, l)].norm()).collect();
    for l in (1..jm).step_by(2) {
        assert!(row[l] < 1e-14);
    }
    for l in (2..jm - 2).step_by(2) {
        assert!(row[l + 2] < row[l], "{row:?}");
    }
}

#[test]
fn oracle_is_a_pure_phase() {
    let grid = ThetaGrid::new(2, 16);
    let w = [omega(), 1.0];
    let h = vec![
        (vec![1, 0], cplx(0.5, 0.1)),
        (vec![-1, 0], cplx(0.5, -0.1)),
        (vec![1, -2], cplx(0.0, 0.3)),
        (vec![-1, 2], cplx(0.0, -0.3)),
    ];
    let vals = oracle_x_independent(&h, &w, 0.3, grid, 0.01, 2.0).unwrap();
    assert!(vals.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    let ones = oracle_x_independent(&h, &w, 0.0, grid, 0.01, 2.0).unwrap();
    assert!(ones.iter().all(|v| *v == cone()));
}

#[test]
fn oracle_cos_closed_form_and_errors() {
    let grid = ThetaGrid::new(1, 20);
    let v = QuasiPeriodicPotential::<f64>::cos_theta(1);
    let w = oracle_x_independent(v.harmonics.as_ref().unwrap(), &[omega()], 0.01, grid, 0.01, 2.0).unwrap();
    for (g, x) in w.iter().enumerate() {
        let th = grid.theta::<f64>(g)[0];
        let want = cplx(0.0, 0.01 * th.sin() / omega()).exp();
        assert!((x - want).norm() < 1e-15);
    }
    assert!(matches!(
        oracle_x_independent(&[(vec![0], cplx(1.0, 0.0))], &[1.0], 0.1, grid, 0.01, 2.0),
        Err(ReduceError::Config(_))
    ));
    assert!(matches!(
        oracle_x_independent(&[(vec![1], cplx(1.0, 0.0))], &[1e-6], 0.1, grid, 0.01, 2.0),
        Err(ReduceError::Resonance { .. })
    ));
}

#[test]
fn zero_eps_is_trivial() {
    let res = reduce(&QuasiPeriodicPotential::decaying_cos(1), &[omega()], 0.0, 8, &cfg()).unwrap();
    for (j, w) in res.omega_star.iter().enumerate() {
        assert_eq!(*w, (2 * j + 1) as f64);
    }
    assert!(res.gauge.generators.is_empty());
    let z0: Vec<C<f64>> = (0..8).map(|j| cplx(1.0 / (1.0 + j as f64), 0.2)).collect();
    let z = kam_predicted_solution(&res, &z0, 1.7).unwrap();
    for j in 0..8 {
        let a = -(2.0 * j as f64 + 1.0) * 1.7;
        assert!((z[j] - z0[j] * cplx(a.cos(), a.sin())).norm() < 1e-14);
    }
}

#[test]
fn free_integration_is_diagonal() {
    let jm = 6;
    let basis = SpectralBasis::<f64>::new(jm).unwrap();
    let g = build_q(&QuasiPeriodicPotential::decaying_cos(1), &basis, 4, ThetaGrid::for_cutoff(1, 4)).unwrap();
    let z0: Vec<C<f64>> = (0..jm).map(|j| cplx(0.3, -0.1 * j as f64)).collect();
    let times = [0.5, 3.0, 10.0];
    let tr = integrate_schrodinger(&g.q, &[omega()], 0.0, &z0, &times, 1e-11).unwrap();
    for (t, z) in times.iter().zip(&tr.states) {
        for j in 0..jm {
            let a = -(2.0 * j as f64 + 1.0) * t;
            assert!((z[j] - z0[j] * cplx(a.cos(), a.sin())).norm() < 1e-12);
        }
    }
    let n0 = weighted_norm(&z0, 0.0);
    assert!(tr.norm_p0.iter().all(|n| (n - n0).abs() < 1e-10));
    assert!(integrate_schrodinger(&g.q, &[omega()], 0.0, &z0, &times, 1e-6).is_err());
}

#[test]
fn x_independent_integration_matches_phase_formula() {
    let jm = 5;
    let eps = 0.05;
    let basis = SpectralBasis::<f64>::new(jm).unwrap();
    let g = build_q(&QuasiPeriodicPotential::cos_theta(1), &basis, 4, ThetaGrid::for_cutoff(1, 4)).unwrap();
    let z0: Vec<C<f64>> = (0..jm).map(|j| cplx(1.0, j as f64)).collect();
    let t = 7.3;
    let tr = integrate_schrodinger(&g.q, &[omega()], eps, &z0, &[t], 1e-12).unwrap();
    let phase = -eps * (omega() * t).sin() / omega();
    for j in 0..jm {
        let a = -(2.0 * j as f64 + 1.0) * t + phase;
        assert!((tr.states[0][j] - z0[j] * cplx(a.cos(), a.sin())).norm() < 1e-9);
    }
}

#[test]
fn one_harmonic_reduction_matches_closed_form() {
    let jm = 12;
    let w = omega();
    let res = reduce(&QuasiPeriodicPotential::cos_theta(1), &[w], 0.01, jm, &cfg()).unwrap();
    for (j, x) in res.omega_star.iter().enumerate() {
        assert!((x - (2 * j + 1) as f64).abs() < 1e-12);
    }
    let oracle = oracle_x_independent(&[(vec![1], cplx(0.5, 0.0)), (vec![-1], cplx(0.5, 0.0))], &[w], 0.01, res.gauge.grid, 0.01, 2.0)
        .unwrap();
    let phase = res.gauge.u[0][(0, 0)] / oracle[0];
    for (u, wv) in res.gauge.u.iter().zip(&oracle) {
        for a in 0..jm {
            for b in 0..jm {
                let want = if a == b { *wv * phase } else { czero() };
                assert!((u[(a, b)] - want).norm() < 1e-12);
            }
        }
    }
    assert!(floquet_residual(&res) < 1e-10);
    assert!((l0_condition(&res).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn predicted_solution_round_trips_and_commutes_with_phase() {
    let jm = 8;
    let res = reduce(&QuasiPeriodicPotential::decaying_cos(1), &[omega()], 0.02, jm, &cfg()).unwrap();
    let z0: Vec<C<f64>> = (0..jm).map(|j| cplx((j as f64).cos(), 0.5 / (1.0 + j as f64))).collect();
    let back = kam_predicted_solution(&res, &z0, 0.0).unwrap();
    for (a, b) in back.iter().zip(&z0) {
        assert!((a - b).norm() < 1e-13);
    }
    let ph = cplx(0.3f64.cos(), 0.3f64.sin());
    let zr: Vec<C<f64>> = z0.iter().map(|z| z * ph).collect();
    let a = kam_predicted_solution(&res, &zr, 4.2).unwrap();
    let b = kam_predicted_solution(&res, &z0, 4.2).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y * ph).norm() < 1e-14);
    }
}

#[test]
fn decaying_reduction_agrees_with_integration() {
    let jm = 10;
    let eps = 0.01;
    let w = omega();
    let res = reduce(&QuasiPeriodicPotential::decaying_cos(1), &[w], eps, jm, &cfg()).unwrap();
    assert!(res.converged);
    assert!(floquet_residual(&res) < 1e-8);
    let z0: Vec<C<f64>> = (0..jm).map(|j| cplx(1.0 / (1.0 + j as f64), 0.0)).collect();
    let times: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let tr = integrate_schrodinger(&res.q.q, &[w], eps, &z0, &times, 1e-11).unwrap();
    for (t, z) in times.iter().zip(&tr.states) {
        let p = kam_predicted_solution(&res, &z0, *t).unwrap();
        let d: f64 = p.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(d < 1e-7, "t = {t}: {d:e}");
    }
    for (j, x) in res.omega_star.iter().enumerate() {
        assert!((x - (2 * j + 1) as f64).abs() < eps);
    }
}

#[test]
fn rejects_bad_inputs() {
    let v = QuasiPeriodicPotential::<f64>::decaying_cos(1);
    assert!(matches!(reduce(&v, &[omega()], 0.5, 4, &cfg()), Err(ReduceError::Config(_))));
    assert!(matches!(reduce(&v, &[omega(), 1.0], 0.01, 4, &cfg()), Err(ReduceError::Config(_))));
    let np = QuasiPeriodicPotential::new(1, "bad", |th: &[f64], _x: f64| th[0] * 0.1);
    assert!(matches!(reduce(&np, &[omega()], 0.01, 4, &cfg()), Err(ReduceError::Config(_))));
    let cplx_v = QuasiPeriodicPotential::x_independent(1, vec![(vec![1], cplx(1.0, 0.0))]);
    assert!(matches!(reduce(&cplx_v, &[omega()], 0.01, 4, &cfg()), Err(ReduceError::Config(_))));
}

#[test]
fn rational_frequency_is_rejected_as_resonant() {
    let v = QuasiPeriodicPotential::<f64>::decaying_cos(1);
    let r = reduce(&v, &[1.0], 0.01, 6, &cfg());
    assert!(matches!(r, Err(ReduceError::Kam(oscikam::kam::KamError::Resonance { .. }))), "{r:?}");
}

#[test]
fn oracle_comparison_on_composed_map() {
    let v = QuasiPeriodicPotential::cos_theta(1);
    let res = reduce(&v, &[omega()], 0.01, 10, &cfg()).unwrap();
    let c = compare_with_oracle(&res, &v, 0.01, 2.0).unwrap();
    assert!(c.omega_defect < 1e-12);
    assert!(c.diagonal_defect < 1e-10, "{:e}", c.diagonal_defect);
    assert!(c.offdiagonal < 1e-12);
    assert!((c.phase.norm() - 1.0).abs() < 1e-14);
    assert!(compare_with_oracle(&res, &QuasiPeriodicPotential::decaying_cos(1), 0.01, 2.0).is_err());
}
