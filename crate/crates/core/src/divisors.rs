//! Small divisors, non-resonance certification, Diophantine checks and
//! Monte-Carlo estimates of excluded parameter sets.

use crate::scalar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Linear law `Omega_p ~ slope * p + offset` (error `err`) for modes beyond the stored ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapTail<T> {
    pub slope: T,
    pub offset: T,
    pub err: T,
}

/// Internal frequencies `omega` and normal frequencies `Omega_1..Omega_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySet<T> {
    pub omega: Vec<T>,
    pub big_omega: Vec<T>,
    /// Asymptotic law for `Omega_p`, `p > J`; fitted from the stored values when absent.
    pub tail: Option<GapTail<T>>,
}

impl<T: Real> FrequencySet<T> {
    pub fn new(omega: Vec<T>, big_omega: Vec<T>) -> Self {
        FrequencySet { omega, big_omega, tail: None }
    }

    pub fn with_tail(mut self, tail: GapTail<T>) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Harmonic-oscillator spectrum `Omega_j = 2j - 1`, with its exact tail law.
    pub fn constant_gap(omega: Vec<T>, modes: usize) -> Self {
        let big = (1..=modes).map(|j| from_usize::<T>(2 * j - 1)).collect();
        FrequencySet::new(omega, big).with_tail(GapTail { slope: cst(2.0), offset: cst(-1.0), err: T::zero() })
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn modes(&self) -> usize {
        self.big_omega.len()
    }

    /// Tail law, fitted from the last two stored values if not given; the error is the
    /// worst deviation of the fit over the upper half of the stored modes.
    pub fn tail_law(&self) -> GapTail<T> {
        if let Some(t) = self.tail {
            return t;
        }
        let jm = self.modes();
        if jm < 2 {
            let v = self.big_omega.first().cloned().unwrap_or(T::one());
            return GapTail { slope: cst(2.0), offset: v - cst(2.0), err: T::zero() };
        }
        let slope = self.big_omega[jm - 1] - self.big_omega[jm - 2];
        let offset = self.big_omega[jm - 1] - slope * from_usize::<T>(jm);
        let mut err = T::zero();
        for p in jm / 2..jm {
            let pred = slope * from_usize::<T>(p + 1) + offset;
            err = err.max((self.big_omega[p] - pred).abs());
        }
        GapTail { slope, offset, err }
    }

    /// Largest `m` with `|Omega_i - Omega_j| >= m |i - j|`, including `Omega_0 = 0`.
    pub fn gap_constant(&self) -> T {
        let mut vals = vec![T::zero()];
        vals.extend(self.big_omega.iter().cloned());
        let mut best = T::infinity();
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                best = best.min((vals[j] - vals[i]).abs() / from_usize::<T>(j - i));
            }
        }
        best
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DivisorError {
    #[error("zero divisor index (k, l) = 0 is excluded")]
    ZeroIndex,
    #[error("|l| = {0} exceeds 2")]
    TooLong(u32),
    #[error("mode {mode} outside 1..={modes}")]
    Mode { mode: u32, modes: usize },
    #[error("k has {got} entries, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Index `(k, l)` with `|l| <= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorIndex {
    pub k: Vec<i32>,
    /// Sorted `(mode, coefficient)` pairs with nonzero coefficients.
    pub l: Vec<(u32, i32)>,
}

impl DivisorIndex {
    pub fn new(k: Vec<i32>, entries: &[(u32, i32)]) -> Result<Self, DivisorError> {
        let mut l: Vec<(u32, i32)> = Vec::new();
        for &(j, c) in entries {
            if j == 0 {
                return Err(DivisorError::Mode { mode: 0, modes: 0 });
            }
            match l.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += c,
                None => l.push((j, c)),
            }
        }
        l.retain(|e| e.1 != 0);
        l.sort_unstable();
        let len: u32 = l.iter().map(|e| e.1.unsigned_abs()).sum();
        if len > 2 {
            return Err(DivisorError::TooLong(len));
        }
        if len == 0 && k.iter().all(|&x| x == 0) {
            return Err(DivisorError::ZeroIndex);
        }
        Ok(DivisorIndex { k, l })
    }

    /// `<l> = 1 + |sum_j j l_j|`.
    pub fn bracket_l(&self) -> u64 {
        1 + self.l.iter().map(|&(j, c)| j as i64 * c as i64).sum::<i64>().unsigned_abs()
    }

    pub fn k_l1(&self) -> u64 {
        self.k.iter().map(|x| x.unsigned_abs() as u64).sum()
    }
}

/// `k.omega + l.Omega` as a compensated sum in canonical order.
pub fn divisor<T: Real>(idx: &DivisorIndex, f: &FrequencySet<T>) -> Result<T, DivisorError> {
    if idx.k.len() != f.n() {
        return Err(DivisorError::Dimension { got: idx.k.len(), expected: f.n() });
    }
    if let Some(&(j, _)) = idx.l.iter().find(|e| e.0 as usize > f.modes()) {
        return Err(DivisorError::Mode { mode: j, modes: f.modes() });
    }
    Ok(divisor_raw(&idx.k, &idx.l, f))
}

#[inline]
fn divisor_raw<T: Real>(k: &[i32], l: &[(u32, i32)], f: &FrequencySet<T>) -> T {
    let terms = k
        .iter()
        .zip(&f.omega)
        .map(|(&a, &w)| from_i64::<T>(a as i64) * w)
        .chain(l.iter().map(|&(j, c)| from_i64::<T>(c as i64) * f.big_omega[j as usize - 1]));
    compensated_sum(terms)
}

/// `alpha <l> / (1 + |k|_1^tau)`.
#[inline]
pub fn threshold<T: Real>(alpha: T, tau: T, k_l1: u64, bracket_l: u64) -> T {
    alpha * from_i64::<T>(bracket_l as i64) / (T::one() + from_i64::<T>(k_l1 as i64).powf(tau))
}

/// Outcome of a certification sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceReport<T> {
    pub passed: bool,
    /// Most critical index: smallest `|divisor| / threshold`.
    pub worst: Option<(DivisorIndex, T, T)>,
    pub count_checked: u64,
}

struct Worst<T> {
    ratio: T,
    k: Vec<i32>,
    l: Vec<(u32, i32)>,
    value: T,
    thr: T,
    count: u64,
    failed: bool,
}

impl<T: Real> Worst<T> {
    fn new() -> Self {
        Worst { ratio: T::infinity(), k: vec![], l: vec![], value: T::zero(), thr: T::zero(), count: 0, failed: false }
    }
    #[inline]
    fn offer(&mut self, k: &[i32], l: &[(u32, i32)], value: T, thr: T) {
        self.count += 1;
        let a = value.abs();
        if a < thr || a == T::zero() {
            self.failed = true;
        }
        let ratio = if thr > T::zero() { a / thr } else if a == T::zero() { T::zero() } else { T::infinity() };
        if ratio < self.ratio || self.k.is_empty() {
            self.ratio = ratio;
            self.k = k.to_vec();
            self.l = l.to_vec();
            self.value = value;
            self.thr = thr;
        }
    }
    fn report(self) -> ResonanceReport<T> {
        let worst = if self.k.is_empty() && self.l.is_empty() {
            None
        } else {
            Some((DivisorIndex { k: self.k, l: self.l }, self.value, self.thr))
        };
        ResonanceReport { passed: !self.failed, worst, count_checked: self.count }
    }
}

/// All `k` with `|k|_inf <= kmax` in the half space (first nonzero entry positive), plus `k = 0`.
fn half_space_ks(n: usize, kmax: i32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let side = (2 * kmax + 1) as usize;
    let total = side.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut k = vec![0i32; n];
        for e in k.iter_mut() {
            *e = (rem % side) as i32 - kmax;
            rem /= side;
        }
        match k.iter().find(|&&x| x != 0) {
            None => out.push(k),
            Some(&x) if x > 0 => out.push(k),
            _ => {}
        }
    }
    // put k = 0 first for readability of reports
    out.sort_by_key(|k| k.iter().any(|&x| x != 0));
    out
}

/// `l` vectors with `|l| <= 2` supported in `1..=jm`: all of them when `full`,
/// otherwise one representative per sign pair (used for `k = 0`).
fn l_set(jm: usize, full: bool) -> Vec<Vec<(u32, i32)>> {
    let mut out = Vec::new();
    if full {
        out.push(vec![]);
    }
    for p in 1..=jm as u32 {
        out.push(vec![(p, 1)]);
        if full {
            out.push(vec![(p, -1)]);
        }
        out.push(vec![(p, 2)]);
        if full {
            out.push(vec![(p, -2)]);
        }
        for q in p + 1..=jm as u32 {
            out.push(vec![(p, 1), (q, 1)]);
            if full {
                out.push(vec![(p, -1), (q, -1)]);
            }
            out.push(vec![(p, 1), (q, -1)]);
            if full {
                out.push(vec![(p, -1), (q, 1)]);
            }
        }
    }
    out
}

/// Certify `|k.omega + l.Omega| >= alpha <l> / (1 + |k|^tau)` for `|k|_inf <= K`,
/// `|l| <= 2` in modes `1..=J`, plus an analytic guard for `|l| = 2` with both
/// modes beyond `J` based on the tail law.
pub fn certify<T: Real>(f: &FrequencySet<T>, alpha: T, tau: T, kmax: usize, jmax: usize) -> ResonanceReport<T> {
    certify_with(f, alpha, tau, kmax, jmax, true)
}

/// [`certify`] with the beyond-`J` guard optional.
pub fn certify_with<T: Real>(f: &FrequencySet<T>, alpha: T, tau: T, kmax: usize, jmax: usize, guard: bool) -> ResonanceReport<T> {
    let jm = jmax.min(f.modes());
    let n = f.n();
    let mut w = Worst::new();
    let ls_full = l_set(jm, true);
    let ls_half = l_set(jm, false);
    let tail = f.tail_law();
    for k in half_space_ks(n, kmax as i32) {
        let kz = k.iter().all(|&x| x == 0);
        let kl1: u64 = k.iter().map(|x| x.unsigned_abs() as u64).sum();
        let kw = compensated_sum(k.iter().zip(&f.omega).map(|(&a, &b)| from_i64::<T>(a as i64) * b));
        let ak = T::one() + from_i64::<T>(kl1 as i64).powf(tau);
        let ls = if kz { &ls_half } else { &ls_full };
        for l in ls.iter() {
            let v = divisor_raw(&k, l, f);
            let bl = 1 + l.iter().map(|&(j, c)| j as i64 * c as i64).sum::<i64>().unsigned_abs();
            w.offer(&k, l, v, alpha * from_i64::<T>(bl as i64) / ak);
        }
        if guard {
            guard_beyond(&mut w, &k, kw, ak, alpha, jm, &tail);
        }
    }
    w.report()
}

/// Divisors `k.omega +- (Omega_p -+ Omega_q)` with `p, q > J`, bounded through the tail law.
fn guard_beyond<T: Real>(w: &mut Worst<T>, k: &[i32], kw: T, ak: T, alpha: T, jm: usize, tail: &GapTail<T>) {
    let slope = tail.slope;
    let two_err = tail.err * cst(2.0);
    let per = alpha / ak;
    let j1 = (jm + 1) as u32;
    if slope <= per {
        // threshold outgrows the gaps: report the first beyond-J pair as failing
        w.offer(k, &[(j1, 1), (j1 + 1, -1)], T::zero(), per);
        return;
    }
    let kz = k.iter().all(|&x| x == 0);
    // differences d = p - q != 0, <l> = 1 + |d|
    let reach = ((kw.abs() + two_err + per) / (slope - per)).ceil().to_i64().unwrap_or(0) + 1;
    for d in -reach..=reach {
        if d == 0 || (kz && d < 0) {
            continue;
        }
        let centre = kw + slope * from_i64::<T>(d);
        let lower = (centre.abs() - two_err).max(T::zero());
        let thr = per * from_i64::<T>(1 + d.abs());
        let (p, q) = if d > 0 { (j1 + d as u32, j1) } else { (j1, j1 + (-d) as u32) };
        w.offer(k, &[(p, 1), (q, -1)], lower.copysign_like(centre), thr);
    }
    // sums s = p + q >= 2J + 2, <l> = 1 + s
    let s0 = 2 * (jm as i64 + 1);
    let smax = ((kw.abs() + two_err - cst::<T>(2.0) * tail.offset + per) / (slope - per)).ceil().to_i64().unwrap_or(0) + 1;
    for s in s0..=smax.max(s0) {
        for sign in [1i64, -1] {
            if kz && sign < 0 {
                continue;
            }
            let pair = slope * from_i64::<T>(s) + cst::<T>(2.0) * tail.offset;
            let centre = kw + from_i64::<T>(sign) * pair;
            let lower = (centre.abs() - two_err).max(T::zero());
            let thr = per * from_i64::<T>(1 + s);
            let p = j1;
            let q = (s as u32).saturating_sub(j1).max(j1);
            let c = sign as i32;
            let l = if p == q { vec![(p, 2 * c)] } else { vec![(p, c), (q, c)] };
            w.offer(k, &l, lower.copysign_like(centre), thr);
        }
    }
}

trait CopySign {
    fn copysign_like(self, other: Self) -> Self;
}

impl<T: Real> CopySign for T {
    fn copysign_like(self, other: Self) -> Self {
        if other < T::zero() {
            -self
        } else {
            self
        }
    }
}

/// `|k.omega - lattice * b| >= 2 pi alpha / |k|^{tau-1}` for all integers `b`
/// and `0 < |k|_inf <= K`, with `|k|` the l1 norm.
pub fn diophantine_lattice<T: Real>(omega: &[T], alpha: T, tau: T, kmax: usize, lattice: T) -> ResonanceReport<T> {
    let n = omega.len();
    let mut w = Worst::new();
    for k in half_space_ks(n, kmax as i32) {
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        let kl1: u64 = k.iter().map(|x| x.unsigned_abs() as u64).sum();
        let kw = compensated_sum(k.iter().zip(omega).map(|(&a, &b)| from_i64::<T>(a as i64) * b));
        let b = (kw / lattice).round();
        let thr = T::PI() * cst(2.0) * alpha / from_i64::<T>(kl1 as i64).powf(tau - T::one());
        // the nearest lattice point is the only candidate below half a period
        let v = kw - lattice * b;
        w.offer(&k, &[], v, thr);
    }
    w.report()
}

/// Diophantine condition on angular frequencies: `b` ranges over `2 pi Z`.
pub fn diophantine<T: Real>(omega: &[T], alpha: T, tau: T, kmax: usize) -> ResonanceReport<T> {
    diophantine_lattice(omega, alpha, tau, kmax, T::PI() * cst(2.0))
}

/// The same condition with `b` ranging over the integers.
pub fn integer_diophantine<T: Real>(omega: &[T], alpha: T, tau: T, kmax: usize) -> ResonanceReport<T> {
    diophantine_lattice(omega, alpha, tau, kmax, T::one())
}

/// Non-resonance for the constant-gap spectrum `Omega_j = 2j - 1` by case split:
/// when `<l> <= 2 pi |k|` the divisor is bounded below through the integer
/// Diophantine condition (`l.Omega` is an integer); otherwise by
/// `|l.Omega| - |k.omega|`. Every bound used is a valid lower bound, so passing
/// here implies passing [`certify`] on the enumerated set.
pub fn certify_constant_gap_reduction<T: Real>(omega: &[T], alpha: T, tau: T, kmax: usize, jmax: usize) -> ResonanceReport<T> {
    let f = FrequencySet::constant_gap(omega.to_vec(), jmax);
    let dio = integer_diophantine(omega, alpha, tau, kmax);
    let two_pi = T::PI() * cst(2.0);
    let mut w = Worst::new();
    let n = omega.len();
    let ls_full = l_set(jmax, true);
    let ls_half = l_set(jmax, false);
    for k in half_space_ks(n, kmax as i32) {
        let kz = k.iter().all(|&x| x == 0);
        let kl1: u64 = k.iter().map(|x| x.unsigned_abs() as u64).sum();
        let kw = compensated_sum(k.iter().zip(omega).map(|(&a, &b)| from_i64::<T>(a as i64) * b));
        let ak = T::one() + from_i64::<T>(kl1 as i64).powf(tau);
        for l in if kz { &ls_half } else { &ls_full }.iter() {
            let bl = 1 + l.iter().map(|&(j, c)| j as i64 * c as i64).sum::<i64>().unsigned_abs();
            let thr = alpha * from_i64::<T>(bl as i64) / ak;
            let lo = divisor_raw(&[], l, &f);
            let lb = if !kz && from_i64::<T>(bl as i64) <= two_pi * from_i64::<T>(kl1 as i64) {
                if dio.passed {
                    two_pi * alpha / from_i64::<T>(kl1 as i64).powf(tau - T::one())
                } else {
                    T::zero()
                }
            } else {
                (lo.abs() - kw.abs()).max(T::zero())
            };
            w.offer(&k, l, lb, thr);
        }
    }
    w.report()
}

/// Monte-Carlo fraction of parameters in `bounds` whose frequencies fail [`certify`].
#[allow(clippy::too_many_arguments)]
pub fn excluded_measure<T: Real, F>(
    bounds: &[(T, T)],
    alpha: T,
    tau: T,
    kmax: usize,
    jmax: usize,
    model: F,
    samples: usize,
    seed: u64,
) -> T
where
    F: Fn(&[T]) -> FrequencySet<T> + Sync,
{
    let fails: usize = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = sample_point(bounds, seed, i as u64);
            let f = model(&xi);
            usize::from(!certify(&f, alpha, tau, kmax, jmax).passed)
        })
        .sum();
    from_usize::<T>(fails) / from_usize::<T>(samples.max(1))
}

/// Uniform point in the box from the stream `(seed, index)`.
pub fn sample_point<T: Real>(bounds: &[(T, T)], seed: u64, index: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    bounds
        .iter()
        .map(|&(a, b)| {
            let u: f64 = rng.gen();
            a + (b - a) * cst::<T>(u)
        })
        .collect()
}
