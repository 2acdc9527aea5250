use oscikam::algebra::*;
use oscikam::divisors::{certify, FrequencySet};
use oscikam::kam::*;
use oscikam::lie::HermitianFamily;
use oscikam::scalar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type H = TaylorHamiltonian<f64>;

fn golden() -> f64 {
    0.5 * (5f64.sqrt() - 1.0)
}

fn params(k0: usize, max_nu: usize) -> ScheduleParams<f64> {
    ScheduleParams { s0: 1.0, alpha0: 0.05, m0: 1.0, tau: 2.0, t: 6.0, c0: 8.0, c1: 8.0, r0: 1.0, k0: Some(k0), max_nu }
}

fn config() -> KamConfig<f64> {
    KamConfig {
        tau: 2.0,
        r: 0.5,
        beta: 0.5,
        sobolev_p: 2.0,
        k_cap: 32,
        degree_cap: 2,
        max_steps: 8,
        target: 1e-13,
        strict: false,
        series_tol: 1e-14,
        series_terms: 30,
        certify_modes: 64,
    }
}

fn random_gauge(rng: &mut ChaCha8Rng, jm: usize, kmax: i32, eps: f64) -> H {
    let mut h = H::new(1, jm, kmax as usize, 2);
    for k in 0..=kmax {
        for a in 1..=jm as u32 {
            for b in 1..=jm as u32 {
                if k == 0 && b < a {
                    continue;
                }
                let decay = eps * (-(k as f64) - 0.3 * (a as f64 - b as f64).abs()).exp();
                let mut c = cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
                if k == 0 && a == b {
                    c.im = 0.0;
                }
                h.add_term(Monomial::new(&[k], &[0], &[a], &[b]), c).unwrap();
                if !(k == 0 && a == b) {
                    h.add_term(Monomial::new(&[-k], &[0], &[b], &[a]), c.conj()).unwrap();
                }
            }
        }
    }
    h
}

#[test]
fn schedule_examples() {
    let mut p = params(8, 12);
    p.alpha0 = 1.0;
    let s = make_schedule(&p).unwrap();
    assert!((s.alpha[1] - 0.75).abs() < 1e-15);
    assert!((s.alpha[12] - 0.5).abs() < 1e-3);
    assert_eq!(s.sigma[0], 0.025);
    assert_eq!(s.k[3], 64);
    let total: f64 = s.sigma.iter().map(|x| 5.0 * x).sum();
    assert!((total - 0.25).abs() < 1e-4);
    assert!(s.s.iter().all(|&x| x >= 0.5));
    assert!((s.s[12] - 0.75).abs() < 1e-3);
    let kk = s.k0_theory.powf(p.tau + 1.0) * s.c1 * s.gamma0;
    assert!((kk - 1.0).abs() < 1e-12);
    for nu in 0..12 {
        let m = 1.0 * (2.0 - 0.5f64.powi(nu as i32));
        assert!((s.m[nu] - m).abs() < 1e-15);
        assert!((s.lambda[nu] - s.alpha[nu] / s.m[nu]).abs() < 1e-15);
        let eta3 = s.eps[nu] / (s.alpha[nu] * s.sigma[nu].powf(s.t));
        assert!((s.eta[nu].powi(3) - eta3).abs() <= 1e-12 * eta3);
        let next = s.c1 * s.eps[nu].powf(4.0 / 3.0) / (s.alpha[nu] * s.sigma[nu].powf(s.t)).powf(1.0 / 3.0);
        assert!((s.eps[nu + 1] - next).abs() <= 1e-12 * next);
        assert!((s.r[nu + 1] - s.eta[nu] * s.r[nu]).abs() <= 1e-14 * s.r[nu]);
        assert!((s.sigma[nu + 1] - s.sigma[nu] / 2.0).abs() < 1e-18);
    }
    assert!((s.eps[0] - s.gamma0 * s.sigma[0].powf(6.0)).abs() < 1e-30);
}

#[test]
fn schedule_rejects_bad_input_and_caps_overflow() {
    let mut p = params(8, 4);
    p.alpha0 = 1.5;
    assert!(make_schedule(&p).is_err());
    let mut p = params(1 << 20, 40);
    p.k0 = Some(1 << 20);
    let s = make_schedule(&p).unwrap();
    assert!(s.capped && s.len() < 41);
}

#[test]
fn zero_perturbation_returns_immediately() {
    let f = FrequencySet::constant_gap(vec![golden()], 4);
    let p = Perturbation::classify(&H::new(1, 4, 0, 2));
    let s = make_schedule(&params(8, 6)).unwrap();
    let res = run(&f, &p, &s, &config()).unwrap();
    assert!(res.trace.records.is_empty());
    assert_eq!(res.freqs, f);
    match res.transform {
        Transformation::Gauge(g) => assert!(g.generators.is_empty()),
        _ => panic!("expected the quadratic path"),
    }
}

#[test]
fn diagonal_perturbation_is_absorbed() {
    let f = FrequencySet::constant_gap(vec![golden()], 3);
    let mut h = H::new(1, 3, 0, 2);
    for j in 1..=3u32 {
        h.add_term(Monomial::new(&[0], &[0], &[j], &[j]), cplx(0.01 * j as f64, 0.0)).unwrap();
    }
    let p = Perturbation::classify(&h);
    let s = make_schedule(&params(8, 6)).unwrap();
    let eps = perturbation_majorant(&p, &config().norm_params(s.s[0]));
    let out = kam_step(&f, &f, &p, eps, &s, 0, &config()).unwrap();
    assert!(out.eps_next == 0.0);
    for j in 0..3 {
        assert!((out.freqs.big_omega[j] - (2.0 * j as f64 + 1.0 + 0.01 * (j + 1) as f64)).abs() < 1e-15);
    }
    match out.map {
        StepMap::Gauge(g) => assert!(g.u.iter().all(|u| u.sub(&oscikam::linalg::CMat::identity(3)).max_abs() == 0.0)),
        _ => panic!(),
    }
}

#[test]
fn single_harmonic_forcing_is_removed_in_one_step() {
    let jm = 6;
    let eps = 0.01;
    let f = FrequencySet::constant_gap(vec![golden()], jm);
    let mut h = H::new(1, jm, 1, 2);
    for j in 1..=jm as u32 {
        for k in [-1, 1] {
            h.add_term(Monomial::new(&[k], &[0], &[j], &[j]), cplx(eps / 2.0, 0.0)).unwrap();
        }
    }
    let p = Perturbation::classify(&h);
    let s = make_schedule(&params(8, 6)).unwrap();
    let cfg = config();
    let e = perturbation_majorant(&p, &cfg.norm_params(s.s[0]));
    let out = kam_step(&f, &f, &p, e, &s, 0, &cfg).unwrap();
    assert!(out.eps_next < 1e-16, "{}", out.eps_next);
    assert_eq!(out.freqs.big_omega, f.big_omega);
}

#[test]
fn random_quadratic_perturbation_contracts_superlinearly() {
    let jm = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = random_gauge(&mut rng, jm, 3, 1e-3);
    let f = FrequencySet::constant_gap(vec![golden()], jm);
    let p = Perturbation::classify(&h);
    assert!(matches!(p, Perturbation::Quadratic(_)));
    let s = make_schedule(&params(8, 8)).unwrap();
    let mut cfg = config();
    cfg.target = 1e-60;
    cfg.max_steps = 5;
    let res = run(&f, &p, &s, &cfg).unwrap();
    let e: Vec<f64> = res.trace.records.iter().map(|r| r.eps_majorant).chain([res.eps_final]).collect();
    let mut good = 0;
    for w in e.windows(2) {
        if w[0] < 1e-4 {
            let ratio = w[1].ln() / w[0].ln();
            assert!(ratio >= 1.2, "ratio {ratio} in {e:?}");
            good += 1;
        }
    }
    assert!(good >= 3, "{e:?}");
    // final non-resonance at alpha0 / 2
    let k_last = res.trace.records.last().unwrap().k_nu;
    assert!(certify(&res.freqs, 0.025, 2.0, k_last, jm).passed);
    // frequency drift and map closeness relative to the initial size
    let drift = res.trace.records.last().unwrap().freq_drift;
    println!("drift constant {}", drift / res.eps0);
    assert!(drift <= 10.0 * res.eps0);
    let fam = match &p {
        Perturbation::Quadratic(fm) => fm.clone(),
        _ => unreachable!(),
    };
    let np = NormParams::new(0.05, 0.5, 0.5, 2.0).unwrap();
    let (resid, tail) = conjugacy_residual(&f, &fam, &res, &np, 32).unwrap();
    assert!(resid <= 1e-11 + tail, "{resid} {tail}");
    let g = match &res.transform {
        Transformation::Gauge(g) => g,
        _ => unreachable!(),
    };
    let dist = g.u.iter().map(|u| u.sub(&oscikam::linalg::CMat::identity(jm)).max_abs()).fold(0.0, f64::max);
    assert!(dist <= 10.0 * res.eps0, "{dist}");
}

#[test]
fn general_path_handles_linear_terms() {
    let jm = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut h = random_gauge(&mut rng, jm, 2, 1e-3);
    for k in -2i32..=2 {
        let c = cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 1e-3 * (-(k.abs() as f64)).exp();
        h.add_term(Monomial::new(&[k], &[0], &[1], &[]), c).unwrap();
        h.add_term(Monomial::new(&[-k], &[0], &[], &[1]), c.conj()).unwrap();
    }
    let p = Perturbation::classify(&h);
    assert!(matches!(p, Perturbation::General(_)));
    let f = FrequencySet::constant_gap(vec![golden()], jm);
    let s = make_schedule(&params(8, 6)).unwrap();
    let mut cfg = config();
    cfg.k_cap = 16;
    cfg.max_steps = 4;
    cfg.target = 1e-20;
    let res = run(&f, &p, &s, &cfg).unwrap();
    assert!(res.eps_final < 1e-12, "{}", res.eps_final);
    match &res.transform {
        Transformation::LieChain(v) => assert!(!v.is_empty()),
        _ => panic!(),
    }
    let mut buf = Vec::new();
    res.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("nu,eps_majorant,alpha_nu,sigma_nu,K_nu,min_divisor,freq_drift,seconds"));
}

#[test]
fn strict_mode_enforces_the_gate() {
    let jm = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_gauge(&mut rng, jm, 1, 1e-2);
    let f = FrequencySet::constant_gap(vec![golden()], jm);
    let p = Perturbation::classify(&h);
    let s = make_schedule(&params(8, 4)).unwrap();
    let mut cfg = config();
    cfg.strict = true;
    assert!(matches!(run(&f, &p, &s, &cfg), Err(KamError::Gate { .. })));
    let _ = HermitianFamily::<f64>::zeros(1, 1);
}

#[test]
fn resonant_frequencies_are_reported() {
    let jm = 2;
    let mut h = H::new(1, jm, 1, 2);
    h.add_term(Monomial::new(&[1], &[0], &[1], &[2]), cplx(1e-3, 0.0)).unwrap();
    h.add_term(Monomial::new(&[-1], &[0], &[2], &[1]), cplx(1e-3, 0.0)).unwrap();
    // omega = 2 makes k = 1, Omega_1 - Omega_2 = -2 exactly resonant
    let f = FrequencySet::constant_gap(vec![2.0], jm);
    let s = make_schedule(&params(8, 4)).unwrap();
    assert!(matches!(run(&f, &Perturbation::classify(&h), &s, &config()), Err(KamError::Resonance { .. })));
}
