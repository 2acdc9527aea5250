//! Periodic solutions `u = e^{-i lambda t} phi` of the truncated NLS from
//! successive constrained minimizers of
//! `J(phi) = 1/2 <T phi, phi> + g/(p+1) int |phi|^{p+1}` on `||phi|| = mu`.
//!
//! `g = 1` is the defocusing equation; the focusing variant uses `g = -eps`.

use crate::hermite::{HermiteError, SpectralBasis};
use crate::linalg::CMat;
use crate::nls::ScaledRule;
use crate::ode::{self, OdeError, OdeOptions};
use crate::scalar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum VariationalError {
    #[error("invalid problem: {0}")]
    Config(String),
    #[error("minimizer {k} did not converge in {iters} iterations (projected gradient {grad:e})")]
    NoConvergence { k: usize, iters: usize, grad: f64 },
    #[error("minimizer {k} lost orthogonality: {defect:e}")]
    Orthogonality { k: usize, defect: f64 },
    #[error("energy increased at iteration {iter} of minimizer {k}")]
    Monotonicity { k: usize, iter: usize },
    #[error("focusing runaway at minimizer {k}: nonlinear energy dominates the quadratic part")]
    Runaway { k: usize },
    #[error(transparent)]
    Hermite(#[from] HermiteError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Clone, Debug)]
pub struct VariationalProblem<T> {
    pub mu: T,
    pub p: T,
    /// Hermite truncation.
    pub modes: usize,
    pub count: usize,
    /// Target for the first-order condition.
    pub tol: T,
    /// Sign and size of the nonlinearity; `1` is defocusing.
    pub coupling: T,
    pub max_iter: usize,
}

impl<T: Real> VariationalProblem<T> {
    pub fn new(mu: T, p: T, modes: usize, count: usize) -> Self {
        VariationalProblem { mu, p, modes, count, tol: cst(1e-6), coupling: T::one(), max_iter: 200_000 }
    }

    pub fn focusing(mut self, eps: T) -> Self {
        self.coupling = -eps;
        self
    }

    fn validate(&self) -> Result<(), VariationalError> {
        if !(self.mu > T::zero()) {
            return Err(VariationalError::Config("mu must be positive".into()));
        }
        if !(self.p >= T::one()) {
            return Err(VariationalError::Config("p must be >= 1".into()));
        }
        if self.modes == 0 || self.count == 0 || self.count > self.modes {
            return Err(VariationalError::Config("need 1 <= count <= modes".into()));
        }
        if self.coupling < T::zero() && self.p >= cst(5.0) {
            return Err(VariationalError::Config("focusing case needs p < 5".into()));
        }
        Ok(())
    }
}

/// Nodes and tables for the nonlinear terms. For odd integer `p` the rule is
/// exact for `int |phi|^{p+1}` and `int |phi|^{p-1} phi h_j`.
#[derive(Clone, Debug)]
pub struct NonlinearRule<T> {
    pub rule: ScaledRule<T>,
    /// `table[j][q] = h_{j+1}(node_q)`.
    pub table: Vec<Vec<T>>,
    pub p: T,
    pub exact: bool,
}

impl<T: Real> NonlinearRule<T> {
    pub fn new(modes: usize, p: T) -> Result<Self, VariationalError> {
        let pi = f64of(p).round();
        let exact = (f64of(p) - pi).abs() < 1e-14 && pi as i64 % 2 == 1;
        let (s, order) = if exact {
            let s = (pi as usize + 1) / 2;
            (s, (s * modes + 2).max(2 * modes + 2))
        } else {
            (1, 8 * modes + 16)
        };
        let basis = SpectralBasis::build(modes, order)?;
        let rule = ScaledRule::new(&basis, s);
        let table = rule.hermite_table(modes);
        Ok(NonlinearRule { rule, table, p, exact })
    }

    pub fn modes(&self) -> usize {
        self.table.len()
    }

    fn synth(&self, c: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rule.nodes.len()];
        for (cj, row) in c.iter().zip(&self.table) {
            for (o, &h) in out.iter_mut().zip(row) {
                *o += *cj * h;
            }
        }
        out
    }

    fn synth_c(&self, c: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![czero::<T>(); self.rule.nodes.len()];
        for (cj, row) in c.iter().zip(&self.table) {
            for (o, &h) in out.iter_mut().zip(row) {
                *o += *cj * h;
            }
        }
        out
    }

    /// `int |phi|^{p+1}`.
    pub fn power_integral(&self, c: &[T]) -> T {
        let f = self.synth(c);
        let e = self.p + T::one();
        self.rule.integrate(|q| f[q].abs().powf(e))
    }

    /// Coefficients of `|phi|^{p-1} phi`.
    pub fn nonlinear_coeffs(&self, c: &[T]) -> Vec<T> {
        let f = self.synth(c);
        let e = self.p - T::one();
        let nf: Vec<T> = f.iter().map(|&v| if v == T::zero() { v } else { v.abs().powf(e) * v }).collect();
        self.table.iter().map(|row| self.rule.integrate(|q| nf[q] * row[q])).collect()
    }

    /// `p int |phi|^{p-1} h_j h_k`, row-major.
    pub fn nonlinear_hessian(&self, c: &[T]) -> Vec<T> {
        let f = self.synth(c);
        let n = self.modes();
        let e = self.p - T::one();
        let w: Vec<T> = f.iter().map(|&v| if e == T::zero() { self.p } else { self.p * v.abs().powf(e) }).collect();
        let mut h = vec![T::zero(); n * n];
        for j in 0..n {
            for k in j..n {
                let v = self.rule.integrate(|q| w[q] * self.table[j][q] * self.table[k][q]);
                h[j * n + k] = v;
                h[k * n + j] = v;
            }
        }
        h
    }

    /// Coefficients of `|u|^{p-1} u` for complex `u`.
    pub fn nonlinear_coeffs_c(&self, c: &[C<T>]) -> Vec<C<T>> {
        let f = self.synth_c(c);
        let e = self.p - T::one();
        let nf: Vec<C<T>> = f.iter().map(|&v| if v == czero() { v } else { v * v.norm().powf(e) }).collect();
        self.table
            .iter()
            .map(|row| cplx(self.rule.integrate(|q| nf[q].re * row[q]), self.rule.integrate(|q| nf[q].im * row[q])))
            .collect()
    }
}

fn tq<T: Real>(c: &[T]) -> T {
    compensated_sum(c.iter().enumerate().map(|(j, &x)| from_usize::<T>(2 * j + 1) * x * x))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `J(c)` for coupling `g`.
pub fn energy<T: Real>(rule: &NonlinearRule<T>, g: T, c: &[T]) -> T {
    let half = cst::<T>(0.5);
    half * tq(c) + g * rule.power_integral(c) / (rule.p + T::one())
}

/// Gradient of `J` in Hermite coefficients.
pub fn gradient<T: Real>(rule: &NonlinearRule<T>, g: T, c: &[T]) -> Vec<T> {
    let n = rule.nonlinear_coeffs(c);
    c.iter().enumerate().map(|(j, &x)| from_usize::<T>(2 * j + 1) * x + g * n[j]).collect()
}

/// `lambda = (<T phi, phi> + g int |phi|^{p+1}) / mu^2`.
pub fn multiplier<T: Real>(rule: &NonlinearRule<T>, g: T, c: &[T]) -> T {
    (tq(c) + g * rule.power_integral(c)) / dot(c, c)
}

#[derive(Clone, Debug)]
pub struct Minimizer<T> {
    pub coeffs: Vec<T>,
    pub lambda: T,
    pub energy: T,
    pub residual: T,
    pub iterations: usize,
    /// Projected gradient norm at exit.
    pub stationarity: T,
}

fn project_out<T: Real>(v: &mut [T], q: &[Vec<T>]) {
    // twice for stability
    for _ in 0..2 {
        for b in q {
            let a = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= a * *y;
            }
        }
    }
}

fn to_sphere<T: Real>(v: &mut [T], prev: &[Vec<T>], mu: T) {
    project_out(v, prev);
    let s = mu / norm(v);
    v.iter_mut().for_each(|x| *x = *x * s);
}

fn tangent<T: Real>(g: &[T], c: &[T], prev: &[Vec<T>], mu: T) -> Vec<T> {
    let mut t = g.to_vec();
    project_out(&mut t, prev);
    let a = dot(&t, c) / (mu * mu);
    for (x, y) in t.iter_mut().zip(c) {
        *x -= a * *y;
    }
    t
}

/// Riemannian gradient in the metric `diag(2j-1)`: `M^{-1} g` minus its
/// `M`-orthogonal component along the constraint normals.
fn preconditioned<T: Real>(g: &[T], c: &[T], prev: &[Vec<T>]) -> Vec<T> {
    let minv = |v: &[T]| -> Vec<T> { v.iter().enumerate().map(|(j, &x)| x / from_usize::<T>(2 * j + 1)).collect() };
    let mut normals: Vec<&[T]> = prev.iter().map(|v| v.as_slice()).collect();
    normals.push(c);
    let m = normals.len();
    let ma: Vec<Vec<T>> = normals.iter().map(|a| minv(a)).collect();
    let mg = minv(g);
    let gram = CMat::from_fn(m, m, |a, b| cplx(dot(normals[a], &ma[b]), T::zero()));
    let rhs = CMat::from_fn(m, 1, |a, _| cplx(dot(normals[a], &mg), T::zero()));
    let y = match gram.solve(&rhs) {
        Ok(y) => y,
        Err(_) => return mg,
    };
    let mut d = mg;
    for (b, v) in ma.iter().enumerate() {
        let w = y[(b, 0)].re;
        for (x, z) in d.iter_mut().zip(v) {
            *x -= w * *z;
        }
    }
    d
}

fn canonical_sign<T: Real>(c: &mut [T]) {
    let mut best = T::zero();
    for &x in c.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < T::zero() {
        c.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Successive minimizers on `||phi|| = mu`, each orthogonal to the earlier ones.
pub fn minimize<T: Real>(prob: &VariationalProblem<T>, seed: u64) -> Result<Vec<Minimizer<T>>, VariationalError> {
    prob.validate()?;
    let rule = NonlinearRule::new(prob.modes, prob.p)?;
    minimize_with(prob, &rule, seed)
}

pub fn minimize_with<T: Real>(
    prob: &VariationalProblem<T>,
    rule: &NonlinearRule<T>,
    seed: u64,
) -> Result<Vec<Minimizer<T>>, VariationalError> {
    prob.validate()?;
    let mu = prob.mu;
    let g = prob.coupling;
    let jm = prob.modes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev: Vec<Vec<T>> = Vec::new();
    let mut out = Vec::new();
    // unit-scale stationarity target, well below the residual tolerance
    let stop = (prob.tol * cst(1e-8)).max(T::epsilon() * cst(64.0)) * mu;
    let polish = stop.max(cst::<T>(1e-7) * mu);
    for k in 1..=prob.count {
        let mut c: Vec<T> = (0..jm)
            .map(|j| cst::<T>(rng.gen_range(-1.0..1.0)) / from_usize::<T>(1 + j * j))
            .collect();
        to_sphere(&mut c, &prev, mu);
        let q0 = tq(&c);
        let mut e = energy(rule, g, &c);
        let mut grad = gradient(rule, g, &c);
        let mut t = tangent(&grad, &c, &prev, mu);
        let mut dir = preconditioned(&grad, &c, &prev);
        let mut step = T::one();
        let mut iters = 0;
        let mut tn = norm(&t);
        while tn > polish {
            if iters >= prob.max_iter {
                return Err(VariationalError::NoConvergence { k, iters, grad: f64of(tn) });
            }
            iters += 1;
            let slope = dot(&grad, &dir);
            // Armijo backtracking on the retracted step
            let mut a = step;
            let (cn, en) = loop {
                let mut cn: Vec<T> = c.iter().zip(&dir).map(|(&x, &d)| x - a * d).collect();
                to_sphere(&mut cn, &prev, mu);
                let en = energy(rule, g, &cn);
                if en <= e - cst::<T>(1e-4) * a * slope {
                    break (cn, en);
                }
                a = a * cst(0.5);
                if a < T::epsilon() * T::epsilon() {
                    // energy differences below roundoff
                    break (c.clone(), e);
                }
            };
            if en > e {
                return Err(VariationalError::Monotonicity { k, iter: iters });
            }
            if cn == c {
                break;
            }
            let gn = gradient(rule, g, &cn);
            let dn = preconditioned(&gn, &cn, &prev);
            // Barzilai-Borwein step from successive directions
            let s: Vec<T> = cn.iter().zip(&c).map(|(&x, &y)| x - y).collect();
            let y: Vec<T> = dn.iter().zip(&dir).map(|(&x, &y)| x - y).collect();
            let sy = dot(&s, &y);
            step = if sy > T::zero() { (dot(&s, &s) / sy).min(cst(4.0)) } else { (a * cst(2.0)).min(T::one()) };
            c = cn;
            e = en;
            t = tangent(&gn, &c, &prev, mu);
            grad = gn;
            dir = dn;
            tn = norm(&t);
            if g < T::zero() {
                let nl = (tq(&c) * cst(0.5) - e).abs();
                if nl > cst::<T>(0.5) * tq(&c) || tq(&c) < cst::<T>(0.5) * q0 {
                    return Err(VariationalError::Runaway { k });
                }
            }
        }
        if tn > stop {
            let (cn, tnn) = newton_polish(rule, g, &c, &prev, mu, stop);
            if tnn > stop {
                return Err(VariationalError::NoConvergence { k, iters, grad: f64of(tnn) });
            }
            c = cn;
            tn = tnn;
        }
        canonical_sign(&mut c);
        let defect = prev.iter().map(|b| dot(&c, b).abs() / (mu * mu)).fold(T::zero(), T::max);
        if defect > cst(1e-8) {
            return Err(VariationalError::Orthogonality { k, defect: f64of(defect) });
        }
        let lambda = multiplier(rule, g, &c);
        let res = residual_with(rule, g, &c, lambda);
        out.push(Minimizer { energy: energy(rule, g, &c), lambda, residual: res, iterations: iters, stationarity: tn, coeffs: c.clone() });
        let nc = norm(&c);
        prev.push(c.iter().map(|&x| x / nc).collect());
    }
    Ok(out)
}

/// Newton iteration on the stationarity system with multipliers for the
/// sphere and the orthogonality constraints.
fn newton_polish<T: Real>(rule: &NonlinearRule<T>, g: T, c0: &[T], prev: &[Vec<T>], mu: T, stop: T) -> (Vec<T>, T) {
    let n = c0.len();
    let m = prev.len();
    let mut c = c0.to_vec();
    let mut grad = gradient(rule, g, &c);
    let mut tn = norm(&tangent(&grad, &c, prev, mu));
    for _ in 0..30 {
        if tn <= stop {
            break;
        }
        let lam = dot(&grad, &c) / (mu * mu);
        let beta: Vec<T> = prev.iter().map(|q| dot(&grad, q)).collect();
        let hn = rule.nonlinear_hessian(&c);
        let dim = n + 1 + m;
        let mut a = CMat::zeros(dim, dim);
        let mut rhs = CMat::zeros(dim, 1);
        for i in 0..n {
            for j in 0..n {
                let mut v = g * hn[i * n + j];
                if i == j {
                    v = v + from_usize::<T>(2 * i + 1) - lam;
                }
                a[(i, j)] = cplx(v, T::zero());
            }
            a[(i, n)] = cplx(-c[i], T::zero());
            a[(n, i)] = cplx(c[i], T::zero());
            for (b, q) in prev.iter().enumerate() {
                a[(i, n + 1 + b)] = cplx(-q[i], T::zero());
                a[(n + 1 + b, i)] = cplx(q[i], T::zero());
            }
            let mut f = grad[i] - lam * c[i];
            for (b, q) in prev.iter().enumerate() {
                f -= beta[b] * q[i];
            }
            rhs[(i, 0)] = cplx(-f, T::zero());
        }
        let Ok(step) = a.solve(&rhs) else { break };
        let mut cn: Vec<T> = (0..n).map(|i| c[i] + step[(i, 0)].re).collect();
        to_sphere(&mut cn, prev, mu);
        let gn = gradient(rule, g, &cn);
        let tnn = norm(&tangent(&gn, &cn, prev, mu));
        if !(tnn < tn) {
            break;
        }
        c = cn;
        grad = gn;
        tn = tnn;
    }
    (c, tn)
}

/// `||T phi - lambda phi + g |phi|^{p-1} phi||` in Hermite coefficients.
pub fn residual_with<T: Real>(rule: &NonlinearRule<T>, g: T, c: &[T], lambda: T) -> T {
    let n = rule.nonlinear_coeffs(c);
    norm(
        &c.iter()
            .enumerate()
            .map(|(j, &x)| (from_usize::<T>(2 * j + 1) - lambda) * x + g * n[j])
            .collect::<Vec<T>>(),
    )
}

/// Defocusing residual of `T phi = lambda phi - |phi|^{p-1} phi`.
pub fn residual<T: Real>(c: &[T], lambda: T, p: T) -> Result<T, VariationalError> {
    let rule = NonlinearRule::new(c.len(), p)?;
    Ok(residual_with(&rule, T::one(), c, lambda))
}

/// Integrates `i u_t = T u + g |u|^{p-1} u` (Galerkin-truncated) from `phi`
/// and returns `sup_t ||u(t) - e^{-i lambda t} phi||` over `samples` times in `[0, t_end]`.
pub fn verify_periodic_orbit<T: Real>(
    rule: &NonlinearRule<T>,
    g: T,
    c: &[T],
    lambda: T,
    t_end: T,
    samples: usize,
    tol: T,
) -> Result<T, VariationalError> {
    if t_end <= T::zero() {
        return Ok(T::zero());
    }
    let jm = c.len();
    let d: Vec<T> = (0..jm).map(|j| from_usize::<T>(2 * j + 1)).collect();
    let rot = |t: T, sign: T| -> Vec<C<T>> { d.iter().map(|&w| { let a = sign * w * t; cplx(a.cos(), a.sin()) }).collect() };
    // interaction picture w = e^{iDt} z
    let f = |t: T, w: &[C<T>], dw: &mut [C<T>]| {
        let back = rot(t, -T::one());
        let z: Vec<C<T>> = w.iter().zip(&back).map(|(a, b)| a * b).collect();
        let n = rule.nonlinear_coeffs_c(&z);
        let fwd = rot(t, T::one());
        for j in 0..jm {
            dw[j] = -ci::<T>() * n[j] * fwd[j] * g;
        }
    };
    let n = samples.max(1);
    let times: Vec<T> = (1..=n).map(|i| t_end * from_usize::<T>(i) / from_usize::<T>(n)).collect();
    let y0: Vec<C<T>> = c.iter().map(|&x| cplx(x, T::zero())).collect();
    let (states, _) = ode::integrate(f, T::zero(), &y0, &times, &OdeOptions::tol(tol))?;
    let mut worst = T::zero();
    for (t, w) in times.iter().zip(&states) {
        let back = rot(*t, -T::one());
        let ph = cplx((-lambda * *t).cos(), (-lambda * *t).sin());
        let dev = compensated_sum(w.iter().zip(&back).zip(c).map(|((a, b), &x)| (a * b - ph * x).norm_sqr())).sqrt();
        worst = worst.max(dev);
    }
    Ok(worst)
}
