//! Newton-type KAM iteration: schedule, single steps and the full run.

use crate::algebra::*;
use crate::divisors::{certify, FrequencySet, ResonanceReport};
use crate::grid::ThetaGrid;
use crate::homological::{self, HomologicalError};
use crate::lie::{GaugeMap, HermitianFamily, LieError};
use crate::linalg::CMat;
use crate::scalar::*;
use std::io::{self, Write};
use std::time::Instant;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum KamError {
    #[error("invalid schedule parameters: {0}")]
    Schedule(String),
    #[error("resonance at step {nu}: {detail}")]
    Resonance { nu: usize, detail: String },
    #[error("divergence: the majorant grew in two consecutive steps (last step {nu})")]
    Divergence { nu: usize },
    #[error("smallness gate violated at step {nu}: {eps:e} > {bound:e}")]
    Gate { nu: usize, eps: f64, bound: f64 },
    #[error("non-finite perturbation at step {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("homological equation: {0}")]
    Homological(HomologicalError),
}

impl From<HomologicalError> for KamError {
    fn from(e: HomologicalError) -> Self {
        KamError::Homological(e)
    }
}

/// Inputs of the parameter schedule.
#[derive(Clone, Copy, Debug)]
pub struct ScheduleParams<T> {
    pub s0: T,
    pub alpha0: T,
    pub m0: T,
    pub tau: T,
    /// Loss exponent; commonly `2 tau + n + 1`.
    pub t: T,
    pub c0: T,
    pub c1: T,
    pub r0: T,
    /// Cutoff actually used at step 0; the theoretical one is reported only.
    pub k0: Option<usize>,
    pub max_nu: usize,
}

/// Per-step parameter arrays.
#[derive(Clone, Debug)]
pub struct KamSchedule<T> {
    pub alpha: Vec<T>,
    pub m: Vec<T>,
    pub lambda: Vec<T>,
    pub eps: Vec<T>,
    pub sigma: Vec<T>,
    pub eta: Vec<T>,
    pub s: Vec<T>,
    pub r: Vec<T>,
    pub k: Vec<usize>,
    pub c0: T,
    pub c1: T,
    pub gamma0: T,
    pub t: T,
    pub tau: T,
    pub kappa: T,
    /// `K0` from `K0^{tau+1} = 1 / (c1 gamma0)`.
    pub k0_theory: T,
    /// True when `max_nu` was lowered to keep `K_nu` representable.
    pub capped: bool,
}

impl<T: Real> KamSchedule<T> {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Right-hand side of the smallness gate `alpha sigma^{t+1} eta^2 / c0`.
    pub fn gate(&self, nu: usize) -> T {
        self.alpha[nu] * self.sigma[nu].powf(self.t + T::one()) * self.eta[nu] * self.eta[nu] / self.c0
    }
}

pub fn make_schedule<T: Real>(p: &ScheduleParams<T>) -> Result<KamSchedule<T>, KamError> {
    let one = T::one();
    let two = cst::<T>(2.0);
    if !(p.s0 > T::zero()) || !(p.alpha0 > T::zero() && p.alpha0 <= one) || !(p.m0 > T::zero()) {
        return Err(KamError::Schedule("need s0 > 0, 0 < alpha0 <= 1, M0 > 0".into()));
    }
    if !(p.c0 >= one && p.c1 >= one) || !(p.tau > T::zero()) || !(p.t > T::zero()) || !(p.r0 > T::zero()) {
        return Err(KamError::Schedule("need c0, c1 >= 1 and tau, t, r0 > 0".into()));
    }
    let kappa = cst::<T>(4.0) / cst(3.0);
    let gamma0 = (p.c0 + two.powf(p.t + cst(3.0)) * p.c1).powi(-3);
    let k0_theory = (one / (p.c1 * gamma0)).powf(one / (p.tau + one));
    let k0 = match p.k0 {
        Some(k) if k > 0 => k,
        Some(_) => return Err(KamError::Schedule("K0 must be positive".into())),
        None => {
            let k = k0_theory.ceil();
            if !(k < cst(1e9)) {
                return Err(KamError::Schedule("theoretical K0 exceeds index limits".into()));
            }
            k.to_usize().unwrap_or(usize::MAX)
        }
    };
    let limit = i32::MAX as usize / 4;
    let mut len = p.max_nu + 1;
    let mut capped = false;
    for nu in 0..=p.max_nu {
        if nu >= 30 || k0.checked_shl(nu as u32).map_or(true, |k| k > limit) {
            len = nu;
            capped = true;
            break;
        }
    }
    if len == 0 {
        return Err(KamError::Schedule("K0 exceeds index limits".into()));
    }
    let mut s = KamSchedule {
        alpha: vec![],
        m: vec![],
        lambda: vec![],
        eps: vec![],
        sigma: vec![],
        eta: vec![],
        s: vec![],
        r: vec![],
        k: vec![],
        c0: p.c0,
        c1: p.c1,
        gamma0,
        t: p.t,
        tau: p.tau,
        kappa,
        k0_theory,
        capped,
    };
    let mut sigma = p.s0 / cst(40.0);
    let mut sv = p.s0;
    let mut eps = gamma0 * p.alpha0 * sigma.powf(p.t);
    let mut r = p.r0;
    for nu in 0..len {
        let h = two.powi(-(nu as i32));
        let alpha = p.alpha0 / two * (one + h);
        let m = p.m0 * (two - h);
        let eta = (eps / (alpha * sigma.powf(p.t))).cbrt();
        s.alpha.push(alpha);
        s.m.push(m);
        s.lambda.push(alpha / m);
        s.eps.push(eps);
        s.sigma.push(sigma);
        s.eta.push(eta);
        s.s.push(sv);
        s.r.push(r);
        s.k.push(k0 << nu);
        eps = p.c1 * eps.powf(kappa) / (alpha * sigma.powf(p.t)).powf(kappa - one);
        r = eta * r;
        sv -= cst::<T>(5.0) * sigma;
        sigma = sigma / two;
    }
    Ok(s)
}

/// Engine settings beyond the schedule.
#[derive(Clone, Copy, Debug)]
pub struct KamConfig<T> {
    pub tau: T,
    /// Amplitude radius used in every majorant.
    pub r: T,
    pub beta: T,
    pub sobolev_p: T,
    /// Largest Fourier index kept in the perturbation.
    pub k_cap: usize,
    /// Weighted-degree cap of the general path.
    pub degree_cap: usize,
    pub max_steps: usize,
    pub target: T,
    /// Turn gate violations into errors.
    pub strict: bool,
    /// Lie series stops below this relative term size.
    pub series_tol: T,
    pub series_terms: usize,
    /// Modes included in re-certification.
    pub certify_modes: usize,
}

impl<T: Real> KamConfig<T> {
    pub fn norm_params(&self, s: T) -> NormParams<T> {
        NormParams { s, r: self.r, beta: self.beta, sobolev_p: self.sobolev_p }
    }

    pub fn grid(&self, n: usize) -> ThetaGrid {
        ThetaGrid::for_cutoff(n, self.k_cap)
    }
}

/// One row of the iteration trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub nu: usize,
    /// Majorant of the perturbation entering step `nu`.
    pub eps_majorant: f64,
    /// Majorant of its weighted-degree `<= 2` part.
    pub eps_quadratic: f64,
    pub alpha_nu: f64,
    pub sigma_nu: f64,
    pub k_nu: usize,
    pub min_divisor: f64,
    pub freq_drift: f64,
    pub seconds: f64,
    pub gate: f64,
    pub gate_ok: bool,
    pub tail_mass: f64,
    pub min_ratio: f64,
    pub series_terms: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["nu", "eps_majorant", "alpha_nu", "sigma_nu", "K_nu", "min_divisor", "freq_drift", "seconds"])?;
        for r in &self.records {
            wr.write_record(&[
                r.nu.to_string(),
                fmt_roundtrip(r.eps_majorant),
                fmt_roundtrip(r.alpha_nu),
                fmt_roundtrip(r.sigma_nu),
                r.k_nu.to_string(),
                fmt_roundtrip(r.min_divisor),
                fmt_roundtrip(r.freq_drift),
                fmt_roundtrip(r.seconds),
            ])?;
        }
        wr.flush()
    }

    /// Diagnostics that do not fit the main trace.
    pub fn write_diagnostics_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["nu", "eps_quadratic", "gate", "gate_ok", "tail_mass", "min_ratio", "series_terms"])?;
        for r in &self.records {
            wr.write_record(&[
                r.nu.to_string(),
                fmt_roundtrip(r.eps_quadratic),
                fmt_roundtrip(r.gate),
                r.gate_ok.to_string(),
                fmt_roundtrip(r.tail_mass),
                fmt_roundtrip(r.min_ratio),
                r.series_terms.to_string(),
            ])?;
        }
        wr.flush()
    }
}

/// A perturbation in one of the two supported representations.
#[derive(Clone, Debug)]
pub enum Perturbation<T: Real> {
    /// Phase-invariant quadratic `z^T B(theta) zbar`, handled on a grid.
    Quadratic(HermitianFamily<T>),
    /// General Fourier-Taylor polynomial, handled by Lie series.
    General(TaylorHamiltonian<T>),
}

impl<T: Real> Perturbation<T> {
    /// Quadratic representation when every key fits it, else general.
    pub fn classify(h: &TaylorHamiltonian<T>) -> Self {
        match HermitianFamily::from_taylor(h) {
            Ok(f) => Perturbation::Quadratic(f),
            Err(_) => Perturbation::General(h.clone()),
        }
    }

    pub fn to_taylor(&self) -> TaylorHamiltonian<T> {
        match self {
            Perturbation::Quadratic(f) => f.to_taylor(0),
            Perturbation::General(h) => h.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Perturbation::Quadratic(f) => f.fam.coeffs.values().all(|m| m.max_abs() == T::zero()),
            Perturbation::General(h) => h.is_empty(),
        }
    }
}

/// The change of variables of one step.
#[derive(Clone, Debug)]
pub enum StepMap<T: Real> {
    Gauge(GaugeMap<T>),
    /// Time-one flow of the generator.
    Lie(TaylorHamiltonian<T>),
}

/// The composed change of variables `Phi_1 o ... o Phi_nu`.
#[derive(Clone, Debug)]
pub enum Transformation<T: Real> {
    Gauge(GaugeMap<T>),
    /// Generators in application order; the map is `X_{F_1}^1 o X_{F_2}^1 o ...`.
    LieChain(Vec<TaylorHamiltonian<T>>),
}

pub struct StepOutput<T: Real> {
    pub freqs: FrequencySet<T>,
    pub p: Perturbation<T>,
    pub map: StepMap<T>,
    pub record: TraceRecord,
    /// Majorant of the returned perturbation.
    pub eps_next: T,
    pub eps_next_quadratic: T,
}

/// Majorant used for the contraction sequence: norm plus vector-field norm.
pub fn perturbation_majorant<T: Real>(p: &Perturbation<T>, params: &NormParams<T>) -> (T, T) {
    let h = p.to_taylor();
    let full = majorant_norm(&h, params).total + vector_field_majorant(&h, params);
    let q = match p {
        Perturbation::Quadratic(_) => full,
        Perturbation::General(_) => {
            let (lo, _) = h.split_degree(2);
            majorant_norm(&lo, params).total + vector_field_majorant(&lo, params)
        }
    };
    (full, q)
}

fn drift<T: Real>(f: &FrequencySet<T>, f0: &FrequencySet<T>, beta: T) -> T {
    let mut d = T::zero();
    for (a, b) in f.omega.iter().zip(&f0.omega) {
        d = d.max((*a - *b).abs());
    }
    for (j, (a, b)) in f.big_omega.iter().zip(&f0.big_omega).enumerate() {
        d = d.max((*a - *b).abs() * from_usize::<T>(j + 1).powf(cst::<T>(2.0) * beta));
    }
    d
}

fn resonance(nu: usize, e: HomologicalError) -> KamError {
    match e {
        HomologicalError::ResonantDivisor { .. } => KamError::Resonance { nu, detail: e.to_string() },
        other => KamError::Homological(other),
    }
}

fn report_detail<T: Real>(r: &ResonanceReport<T>) -> String {
    match &r.worst {
        Some((idx, v, thr)) => format!("k = {:?}, l = {:?}: |{}| < {}", idx.k, idx.l, f64of(*v), f64of(*thr)),
        None => "no index checked".into(),
    }
}

/// One Newton step at index `nu`. `f0` is the unperturbed frequency set used
/// for drift reporting and `eps` the majorant of `p` at `s_nu`.
#[allow(clippy::too_many_arguments)]
pub fn kam_step<T: Real>(
    freqs: &FrequencySet<T>,
    f0: &FrequencySet<T>,
    p: &Perturbation<T>,
    eps: (T, T),
    sched: &KamSchedule<T>,
    nu: usize,
    cfg: &KamConfig<T>,
) -> Result<StepOutput<T>, KamError> {
    let start = Instant::now();
    let alpha = sched.alpha[nu];
    let k_nu = sched.k[nu].min(cfg.k_cap);
    let gate = sched.gate(nu);
    let gate_ok = eps.0 <= gate;
    if !gate_ok {
        if cfg.strict {
            return Err(KamError::Gate { nu, eps: f64of(eps.0), bound: f64of(gate) });
        }
        log::warn!("step {nu}: majorant {:e} above the smallness gate {:e}", f64of(eps.0), f64of(gate));
    }
    let h = p.to_taylor();
    let (low, _) = h.split_degree(2);
    let (r, _) = low.truncate_fourier(k_nu);
    let sol = homological::solve(&r, freqs, alpha, sched.tau, k_nu).map_err(|e| resonance(nu, e))?;
    let (dw, dom) = homological::frequency_update(&sol.n_hat, freqs.modes())?;
    let mut next = freqs.clone();
    for (a, b) in next.omega.iter_mut().zip(&dw) {
        *a += *b;
    }
    for (a, b) in next.big_omega.iter_mut().zip(&dom) {
        *a += *b;
    }
    let next_params = cfg.norm_params(sched.s[(nu + 1).min(sched.len() - 1)]);
    let (new_p, map, tail, terms) = match p {
        Perturbation::Quadratic(fam) => {
            let (p_plus, map, tail, terms) = quadratic_update(fam, &sol.f, &sol.n_hat, k_nu, cfg)?;
            (Perturbation::Quadratic(p_plus), StepMap::Gauge(map), tail, terms)
        }
        Perturbation::General(ph) => {
            let (p_plus, tail, terms) = general_update(ph, &r, &sol.f, &sol.n_hat, cfg, &next_params)?;
            (Perturbation::General(p_plus), StepMap::Lie(sol.f.clone()), tail, terms)
        }
    };
    let cert = certify(&next, sched.alpha[(nu + 1).min(sched.len() - 1)], sched.tau, k_nu, cfg.certify_modes);
    if !cert.passed {
        return Err(KamError::Resonance { nu, detail: format!("re-certification failed at {}", report_detail(&cert)) });
    }
    let eps_next = perturbation_majorant(&new_p, &next_params);
    if !(eps_next.0.is_finite()) {
        return Err(KamError::NonFinite(nu));
    }
    let record = TraceRecord {
        nu,
        eps_majorant: f64of(eps.0),
        eps_quadratic: f64of(eps.1),
        alpha_nu: f64of(alpha),
        sigma_nu: f64of(sched.sigma[nu]),
        k_nu,
        min_divisor: f64of(sol.min_divisor),
        freq_drift: f64of(drift(&next, f0, cfg.beta)),
        seconds: start.elapsed().as_secs_f64(),
        gate: f64of(gate),
        gate_ok,
        tail_mass: f64of(tail),
        min_ratio: f64of(sol.min_ratio),
        series_terms: terms,
    };
    Ok(StepOutput { freqs: next, p: new_p, map, record, eps_next: eps_next.0, eps_next_quadratic: eps_next.1 })
}

/// `P+ = (P - R) o Phi + sum_n [ad^n R n/(n+1)! + ad^n N_hat/(n+1)!]` on the grid,
/// with `ad(B) = i [C, B]` for the generator `z^T C zbar`.
fn quadratic_update<T: Real>(
    p: &HermitianFamily<T>,
    f: &TaylorHamiltonian<T>,
    n_hat: &TaylorHamiltonian<T>,
    k_nu: usize,
    cfg: &KamConfig<T>,
) -> Result<(HermitianFamily<T>, GaugeMap<T>, T, usize), KamError> {
    let grid = cfg.grid(p.n());
    let c = HermitianFamily::from_taylor(f)?;
    let nh = HermitianFamily::from_taylor(n_hat)?;
    let (r, rest) = p.truncate(k_nu);
    let map = GaugeMap::time_one(&c, grid)?;
    let cg = c.to_grid(&grid);
    let rg = r.to_grid(&grid);
    let restg = rest.to_grid(&grid);
    let nhm = nh.eval_at(&vec![T::zero(); p.n()]);
    let i = ci::<T>();
    let mut terms = 0;
    let mut out = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let mut tr = rg[g].clone();
        let mut tn = nhm.clone();
        let mut sum = CMat::zeros(p.modes(), p.modes());
        let mut done = false;
        for n in 1..=cfg.series_terms {
            let nf = from_usize::<T>(n);
            tr = cg[g].commutator(&tr).scale(i / nf);
            tn = cg[g].commutator(&tn).scale(i / nf);
            let a = tr.scale_re(nf / (nf + T::one()));
            let b = tn.scale_re(T::one() / (nf + T::one()));
            sum.add_assign(&a);
            sum.add_assign(&b);
            let size = a.max_abs().max(b.max_abs());
            if size <= cfg.series_tol * sum.max_abs() || size == T::zero() {
                terms = terms.max(n);
                done = true;
                break;
            }
        }
        if !done {
            return Err(LieError::SeriesDiverged(cfg.series_terms).into());
        }
        if !rest.fam.coeffs.is_empty() {
            let u = &map.u[g];
            sum.add_assign(&u.transpose().matmul(&restg[g]).matmul(&u.conj()));
        }
        out.push(sum);
    }
    let (fam, tail) = HermitianFamily::from_grid(&grid, &out, cfg.k_cap);
    Ok((fam, map, tail, terms))
}

/// `P+ = (P - R) + sum_n [ad^n P / n! + ad^n (N_hat - R) / (n+1)!]` by brackets.
fn general_update<T: Real>(
    p: &TaylorHamiltonian<T>,
    r: &TaylorHamiltonian<T>,
    f: &TaylorHamiltonian<T>,
    n_hat: &TaylorHamiltonian<T>,
    cfg: &KamConfig<T>,
    params: &NormParams<T>,
) -> Result<(TaylorHamiltonian<T>, T, usize), KamError> {
    let cap = cfg.degree_cap;
    let kc = cfg.k_cap;
    let mut sum = p.with_shape(kc, cap).sub(&r.with_shape(kc, cap))?;
    if f.is_empty() {
        return Ok((sum, T::zero(), 0));
    }
    let mut w = p.with_shape(kc, cap);
    let mut g = n_hat.with_shape(kc, cap).sub(&r.with_shape(kc, cap))?;
    let mut lost = T::zero();
    for n in 1..=cfg.series_terms {
        let nf = from_usize::<T>(n);
        let (wn, d1) = poisson_bracket_cut(&w, f, cap, kc)?;
        let (gn, d2) = poisson_bracket_cut(&g, f, cap, kc)?;
        lost += (d1.total() + d2.total()) / nf;
        w = wn.scale_re(T::one() / nf);
        g = gn.scale_re(T::one() / nf);
        sum.axpy(cone(), &w);
        sum.axpy(cplx(T::one() / (nf + T::one()), T::zero()), &g);
        let size = majorant_norm(&w, params).total.max(majorant_norm(&g, params).total);
        if size <= cfg.series_tol * majorant_norm(&sum, params).total || (w.is_empty() && g.is_empty()) {
            sum.prune(T::zero());
            return Ok((sum, lost, n));
        }
    }
    Err(LieError::SeriesDiverged(cfg.series_terms).into())
}

/// Result of a full run.
#[derive(Clone, Debug)]
pub struct KamResult<T: Real> {
    pub freqs: FrequencySet<T>,
    pub transform: Transformation<T>,
    pub trace: IterationTrace,
    pub final_p: Perturbation<T>,
    /// Majorant of the initial perturbation.
    pub eps0: T,
    /// Majorant of the final perturbation.
    pub eps_final: T,
    pub eps_final_quadratic: T,
    pub converged: bool,
    /// Total Fourier mass dropped over all steps.
    pub tail_mass: T,
}

/// Iterate until the majorant falls below the target or the step budget or
/// schedule is exhausted.
pub fn run<T: Real>(
    n0: &FrequencySet<T>,
    p0: &Perturbation<T>,
    sched: &KamSchedule<T>,
    cfg: &KamConfig<T>,
) -> Result<KamResult<T>, KamError> {
    let n = n0.n();
    let jm = n0.modes();
    let mut transform = match p0 {
        Perturbation::Quadratic(_) => Transformation::Gauge(GaugeMap::identity(n, jm, cfg.grid(n))),
        Perturbation::General(_) => Transformation::LieChain(Vec::new()),
    };
    let mut freqs = n0.clone();
    let mut p = p0.clone();
    let mut trace = IterationTrace::default();
    let mut eps = perturbation_majorant(&p, &cfg.norm_params(sched.s[0]));
    let eps0 = eps.0;
    let mut grew = 0;
    let mut tail = T::zero();
    let steps = cfg.max_steps.min(sched.len());
    let contraction = |e: (T, T)| match p0 {
        Perturbation::Quadratic(_) => e.0,
        Perturbation::General(_) => e.1,
    };
    for nu in 0..steps {
        if p.is_zero() || contraction(eps) <= cfg.target {
            break;
        }
        let out = kam_step(&freqs, n0, &p, eps, sched, nu, cfg)?;
        let new_eps = (out.eps_next, out.eps_next_quadratic);
        tail += cst::<T>(out.record.tail_mass);
        trace.records.push(out.record);
        match (&mut transform, out.map) {
            (Transformation::Gauge(g), StepMap::Gauge(s)) => g.then(&s),
            (Transformation::LieChain(v), StepMap::Lie(f)) => v.push(f),
            _ => unreachable!("representation is fixed for a run"),
        }
        if contraction(new_eps) > contraction(eps) {
            grew += 1;
            log::warn!("step {nu}: majorant grew from {:e} to {:e}", f64of(contraction(eps)), f64of(contraction(new_eps)));
            if grew >= 2 {
                return Err(KamError::Divergence { nu });
            }
        } else {
            grew = 0;
        }
        freqs = out.freqs;
        p = out.p;
        eps = new_eps;
    }
    let converged = p.is_zero() || contraction(eps) <= cfg.target;
    Ok(KamResult {
        freqs,
        transform,
        trace,
        final_p: p,
        eps0,
        eps_final: eps.0,
        eps_final_quadratic: eps.1,
        converged,
        tail_mass: tail,
    })
}

/// For the quadratic path: majorant of `(N0 + P0) o Phi* - N*` and the
/// Fourier mass dropped while evaluating it.
pub fn conjugacy_residual<T: Real>(
    n0: &FrequencySet<T>,
    p0: &HermitianFamily<T>,
    res: &KamResult<T>,
    params: &NormParams<T>,
    cutoff: usize,
) -> Result<(T, T), KamError> {
    let map = match &res.transform {
        Transformation::Gauge(g) => g,
        Transformation::LieChain(_) => return Err(LieError::Unsupported("conjugacy residual of a Lie chain".into()).into()),
    };
    let grid = map.grid;
    let jm = n0.modes();
    let d0 = CMat::diag(&n0.big_omega.iter().map(|&w| cplx(w, T::zero())).collect::<Vec<_>>());
    let ds = CMat::diag(&res.freqs.big_omega.iter().map(|&w| cplx(w, T::zero())).collect::<Vec<_>>());
    let b: Vec<CMat<T>> = p0.to_grid(&grid).into_iter().map(|m| m.add(&d0)).collect();
    let conj = map.conjugate(&n0.omega, &b);
    let diff: Vec<CMat<T>> = conj.into_iter().map(|m| m.sub(&ds)).collect();
    let (fam, tail) = HermitianFamily::from_grid(&grid, &diff, cutoff);
    debug_assert_eq!(fam.modes(), jm);
    let mut h = fam.to_taylor(cutoff);
    // drift of omega is zero on this path; the y-part of N cancels exactly
    h.prune(T::zero());
    Ok((majorant_norm(&h, params).total, tail))
}
