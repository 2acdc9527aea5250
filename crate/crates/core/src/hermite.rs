//! Hermite functions, Gauss-Hermite quadrature adapted to Hermite functions,
//! and Galerkin operators for `T = -d^2/dx^2 + x^2`.
//!
//! Modes are 1-based: `h_j = psi_{j-1}` with `T h_j = (2j-1) h_j`.

use crate::linalg::tridiag_eigenvalues;
use crate::scalar::*;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum HermiteError {
    #[error("need at least one mode")]
    NoModes,
    #[error("quadrature order {q} too small for {j} modes (need at least {need})")]
    OrderTooSmall { j: usize, q: usize, need: usize },
    #[error("non-finite value in Hermite recurrence at node {0}")]
    Overflow(usize),
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

/// Hermite functions `psi_0..psi_{count-1}` at `x` as mantissas with a
/// common running log-scale per index: `psi_k = mant[k] * exp(logs[k])`.
fn hermite_scaled<T: Real>(count: usize, x: T) -> (Vec<T>, Vec<T>) {
    let mut mant = Vec::with_capacity(count);
    let mut logs = Vec::with_capacity(count);
    if count == 0 {
        return (mant, logs);
    }
    let big = T::max_value().sqrt().sqrt();
    let lbig = big.ln();
    let two = cst::<T>(2.0);
    let mut log = -x * x / two - T::PI().ln() / cst(4.0);
    let mut prev = T::zero();
    let mut cur = T::one();
    mant.push(cur);
    logs.push(log);
    for k in 0..count.saturating_sub(1) {
        let kf = from_usize::<T>(k);
        let next = (two / (kf + T::one())).sqrt() * x * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur = cur / big;
            prev = prev / big;
            log += lbig;
        }
        mant.push(cur);
        logs.push(log);
    }
    (mant, logs)
}

/// Values of `h_1..h_count` at `x`.
pub fn hermite_values<T: Real>(count: usize, x: T) -> Vec<T> {
    let (m, l) = hermite_scaled(count, x);
    m.iter().zip(&l).map(|(&a, &b)| a * b.exp()).collect()
}

/// Value of the single Hermite function `h_j` (1-based) at `x`.
pub fn hermite_function<T: Real>(j: usize, x: T) -> T {
    assert!(j >= 1);
    *hermite_values(j, x).last().unwrap()
}

/// Hermite basis with its quadrature rule.
#[derive(Debug, Clone)]
pub struct SpectralBasis<T: Real> {
    /// Number of modes `J`.
    pub modes: usize,
    /// Quadrature order `Q`.
    pub order: usize,
    pub nodes: Vec<T>,
    /// Weights for integrands that already carry the Gaussian decay:
    /// `int f dx ~ sum_q weights[q] f(nodes[q])`.
    pub weights: Vec<T>,
    /// `values[(j-1) * Q + q] = h_j(x_q)`.
    values: Vec<T>,
}

impl<T: Real> SpectralBasis<T> {
    /// Basis with the default quadrature order `Q = 4J`.
    pub fn new(modes: usize) -> Result<Self, HermiteError> {
        Self::build(modes, 4 * modes.max(1))
    }

    pub fn build(modes: usize, order: usize) -> Result<Self, HermiteError> {
        if modes == 0 {
            return Err(HermiteError::NoModes);
        }
        if order < 2 * modes + 2 {
            return Err(HermiteError::OrderTooSmall { j: modes, q: order, need: 2 * modes + 2 });
        }
        let q = order;
        let half = cst::<T>(0.5);
        let d = vec![T::zero(); q];
        let e: Vec<T> = (1..q).map(|k| (from_usize::<T>(k) * half).sqrt()).collect();
        let mut nodes = tridiag_eigenvalues(&d, &e);
        // Newton polish on psi_Q, whose zeros are the nodes.
        let qf = from_usize::<T>(q);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (m, _) = hermite_scaled(q + 1, *x);
                let step = m[q] / ((cst::<T>(2.0) * qf).sqrt() * m[q - 1]);
                if !step.is_finite() {
                    break;
                }
                *x -= step;
                if step.abs() <= T::eps() * x.abs().max(T::one()) {
                    break;
                }
            }
        }
        // Exact mirror symmetry.
        for i in 0..q / 2 {
            let a = (nodes[q - 1 - i] - nodes[i]) * half;
            nodes[i] = -a;
            nodes[q - 1 - i] = a;
        }
        if q % 2 == 1 {
            nodes[q / 2] = T::zero();
        }
        let lmax = T::max_value().ln();
        let mut weights = Vec::with_capacity(q);
        let mut values = vec![T::zero(); modes * q];
        for (i, &x) in nodes.iter().enumerate() {
            let (m, l) = hermite_scaled(q, x);
            let lw = -qf.ln() - cst::<T>(2.0) * (m[q - 1].abs().ln() + l[q - 1]);
            let w = if lw >= lmax { T::max_value() } else { lw.exp() };
            if !w.is_finite() || w <= T::zero() {
                return Err(HermiteError::Overflow(i));
            }
            weights.push(w);
            for j in 0..modes {
                let v = m[j] * l[j].exp();
                if !v.is_finite() {
                    return Err(HermiteError::Overflow(i));
                }
                values[j * q + i] = v;
            }
        }
        Ok(SpectralBasis { modes, order, nodes, weights, values })
    }

    /// `h_j(x_q)` with 1-based `j`.
    #[inline]
    pub fn h(&self, j: usize, q: usize) -> T {
        self.values[(j - 1) * self.order + q]
    }

    /// Row of `h_j` samples over all nodes.
    pub fn row(&self, j: usize) -> &[T] {
        &self.values[(j - 1) * self.order..j * self.order]
    }

    /// Eigenvalues `2j - 1` of `T`.
    pub fn eigenvalues(&self) -> Vec<T> {
        (1..=self.modes).map(|j| from_usize::<T>(2 * j - 1)).collect()
    }

    /// Quadrature of sampled values.
    pub fn integrate(&self, f: &[T]) -> T {
        compensated_sum(self.weights.iter().zip(f).map(|(&w, &v)| if v == T::zero() { T::zero() } else { w * v }))
    }

    /// Matrix `M[j][l] = int v h_j h_l`, row-major, bitwise symmetric.
    pub fn assemble_bilinear(&self, v: &[T]) -> Result<Vec<T>, HermiteError> {
        if v.len() != self.order {
            return Err(HermiteError::Length { expected: self.order, got: v.len() });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(HermiteError::NonFinite(i));
        }
        let n = self.modes;
        let wv: Vec<T> = self.weights.iter().zip(v).map(|(&w, &x)| if x == T::zero() { T::zero() } else { w * x }).collect();
        let mut m = vec![T::zero(); n * n];
        for j in 1..=n {
            let rj = self.row(j);
            let tmp: Vec<T> = rj.iter().zip(&wv).map(|(&a, &b)| a * b).collect();
            for l in j..=n {
                let s = compensated_sum(tmp.iter().zip(self.row(l)).map(|(&a, &b)| a * b));
                m[(j - 1) * n + (l - 1)] = s;
                m[(l - 1) * n + (j - 1)] = s;
            }
        }
        Ok(m)
    }

    /// Samples at nodes of `sum_j c_j h_j`.
    pub fn synthesize(&self, c: &[C<T>]) -> Result<Vec<C<T>>, HermiteError> {
        if c.len() != self.modes {
            return Err(HermiteError::Length { expected: self.modes, got: c.len() });
        }
        let mut out = vec![czero::<T>(); self.order];
        for (j, &cj) in c.iter().enumerate() {
            if cj == czero() {
                continue;
            }
            for (o, &h) in out.iter_mut().zip(self.row(j + 1)) {
                *o += cj * h;
            }
        }
        Ok(out)
    }

    pub fn synthesize_real(&self, c: &[T]) -> Result<Vec<T>, HermiteError> {
        if c.len() != self.modes {
            return Err(HermiteError::Length { expected: self.modes, got: c.len() });
        }
        let mut out = vec![T::zero(); self.order];
        for (j, &cj) in c.iter().enumerate() {
            for (o, &h) in out.iter_mut().zip(self.row(j + 1)) {
                *o += cj * h;
            }
        }
        Ok(out)
    }

    /// Galerkin coefficients `c_j = int f h_j` of sampled `f`.
    pub fn analyze(&self, f: &[C<T>]) -> Result<Vec<C<T>>, HermiteError> {
        if f.len() != self.order {
            return Err(HermiteError::Length { expected: self.order, got: f.len() });
        }
        let wf: Vec<C<T>> = self.weights.iter().zip(f).map(|(&w, &x)| if x == czero() { x } else { x * w }).collect();
        Ok((1..=self.modes)
            .map(|j| {
                let row = self.row(j);
                let re = compensated_sum(row.iter().zip(&wf).map(|(&h, x)| h * x.re));
                let im = compensated_sum(row.iter().zip(&wf).map(|(&h, x)| h * x.im));
                cplx(re, im)
            })
            .collect())
    }

    pub fn analyze_real(&self, f: &[T]) -> Result<Vec<T>, HermiteError> {
        if f.len() != self.order {
            return Err(HermiteError::Length { expected: self.order, got: f.len() });
        }
        let wf: Vec<T> = self.weights.iter().zip(f).map(|(&w, &x)| if x == T::zero() { x } else { x * w }).collect();
        Ok((1..=self.modes)
            .map(|j| compensated_sum(self.row(j).iter().zip(&wf).map(|(&h, &x)| h * x)))
            .collect())
    }

    /// Quadrature Gram matrix of the stored basis (row-major).
    pub fn gram(&self) -> Vec<T> {
        self.assemble_bilinear(&vec![T::one(); self.order]).expect("finite")
    }
}

/// Coefficients of `x f` given those of `f` (length grows by one):
/// `x h_j = sqrt((j-1)/2) h_{j-1} + sqrt(j/2) h_{j+1}`.
pub fn x_ladder<T: Real>(c: &[C<T>]) -> Vec<C<T>> {
    let n = c.len();
    let mut out = vec![czero(); n + 1];
    let half = cst::<T>(0.5);
    for (i, &ci) in c.iter().enumerate() {
        let j = i + 1;
        if j > 1 {
            out[i - 1] += ci * (from_usize::<T>(j - 1) * half).sqrt();
        }
        out[i + 1] += ci * (from_usize::<T>(j) * half).sqrt();
    }
    out
}

/// Coefficients of `f'` given those of `f` (length grows by one):
/// `h_j' = sqrt((j-1)/2) h_{j-1} - sqrt(j/2) h_{j+1}`.
pub fn d_ladder<T: Real>(c: &[C<T>]) -> Vec<C<T>> {
    let n = c.len();
    let mut out = vec![czero(); n + 1];
    let half = cst::<T>(0.5);
    for (i, &ci) in c.iter().enumerate() {
        let j = i + 1;
        if j > 1 {
            out[i - 1] += ci * (from_usize::<T>(j - 1) * half).sqrt();
        }
        out[i + 1] -= ci * (from_usize::<T>(j) * half).sqrt();
    }
    out
}

/// `T f = -f'' + x^2 f` through the ladder identities; result has `len + 2` entries.
pub fn apply_t_ladder<T: Real>(c: &[C<T>]) -> Vec<C<T>> {
    let dd = d_ladder(&d_ladder(c));
    let xx = x_ladder(&x_ladder(c));
    xx.iter().zip(&dd).map(|(&a, &b)| a - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ground_state_at_origin() {
        let v = hermite_function::<f64>(1, 0.0);
        assert!((v - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert!((v - 0.7511255).abs() < 1e-7);
        assert_eq!(hermite_function::<f64>(2, 0.0), 0.0);
    }

    #[test]
    fn closed_forms() {
        // h_2 = sqrt(2) pi^{-1/4} x e^{-x^2/2}, h_3 = pi^{-1/4}(2x^2-1)/sqrt(2) e^{-x^2/2}
        let p = std::f64::consts::PI.powf(-0.25);
        for &x in &[-2.3, -0.4, 0.7, 3.1] {
            let g = (-x * x / 2.0f64).exp();
            let v = hermite_values::<f64>(3, x);
            assert!((v[0] - p * g).abs() < 1e-15);
            assert!((v[1] - 2f64.sqrt() * p * x * g).abs() < 1e-14);
            assert!((v[2] - p * (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_order() {
        assert!(matches!(SpectralBasis::<f64>::build(8, 17), Err(HermiteError::OrderTooSmall { .. })));
        assert!(SpectralBasis::<f64>::build(8, 18).is_ok());
    }

    #[test]
    fn nodes_and_weights_well_formed() {
        let b = SpectralBasis::<f64>::new(16).unwrap();
        assert!(b.weights.iter().all(|&w| w > 0.0));
        assert!(b.nodes.windows(2).all(|w| w[0] < w[1]));
        // int e^{-x^2} = sqrt(pi)
        let f: Vec<f64> = b.nodes.iter().map(|x| (-x * x).exp()).collect();
        assert!((b.integrate(&f) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gram_is_identity_in_exactness_regime() {
        for &(j, q) in &[(8usize, 18usize), (32, 128), (60, 122)] {
            let b = SpectralBasis::<f64>::build(j, q).unwrap();
            let g = b.gram();
            for r in 0..j {
                for c in 0..j {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((g[r * j + c] - want).abs() < 1e-12, "J={j} Q={q} ({r},{c}) {}", g[r * j + c]);
                }
            }
        }
    }

    #[test]
    fn large_basis_is_finite() {
        let b = SpectralBasis::<f64>::new(200).unwrap();
        let g = b.gram();
        for r in 0..200 {
            assert!((g[r * 200 + r] - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn quartic_ground_state_integral() {
        // the quartic integrand is not polynomial times Gaussian weight, so use a high order
        let b = SpectralBasis::<f64>::build(1, 64).unwrap();
        let v: Vec<f64> = (0..b.order).map(|q| b.h(1, q).powi(2)).collect();
        let m = b.assemble_bilinear(&v).unwrap();
        let oracle = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((m[0] - oracle).abs() < 1e-12);
        assert!((m[0] - 0.3989423).abs() < 1e-7);
    }

    #[test]
    fn x_squared_matrix_matches_ladder() {
        let j = 12;
        let b = SpectralBasis::<f64>::new(j).unwrap();
        let v: Vec<f64> = b.nodes.iter().map(|x| x * x).collect();
        let m = b.assemble_bilinear(&v).unwrap();
        for col in 0..j {
            let mut e = vec![cplx(0.0, 0.0); j];
            e[col] = cplx(1.0, 0.0);
            let xx = x_ladder(&x_ladder(&e));
            for row in 0..j {
                assert!((m[row * j + col] - xx[row].re).abs() < 1e-12);
            }
        }
        // diagonal is (2j-1)/2
        for r in 0..j {
            assert!((m[r * j + r] - (2 * r + 1) as f64 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn t_ladder_eigen_relation() {
        let b = SpectralBasis::<f64>::new(6).unwrap();
        let mut e3 = vec![cplx(0.0, 0.0); 6];
        e3[2] = cplx(1.0, 0.0);
        let t = apply_t_ladder(&e3);
        // Rayleigh quotient via quadrature of synthesized T h_3 against h_3.
        let big = SpectralBasis::<f64>::new(8).unwrap();
        let th: Vec<C<f64>> = t.iter().cloned().take(8).collect();
        let s = big.synthesize(&th).unwrap();
        let c = big.analyze(&s).unwrap();
        assert!((c[2].re - 5.0).abs() < 1e-12);
        for j in 1..=6 {
            let mut e = vec![cplx(0.0, 0.0); 6];
            e[j - 1] = cplx(1.0, 0.0);
            let t = apply_t_ladder(&e);
            assert!((t[j - 1].re - (2 * j - 1) as f64).abs() < 1e-12);
        }
        let _ = b;
    }

    #[test]
    fn assemble_is_bitwise_symmetric() {
        let b = SpectralBasis::<f64>::new(10).unwrap();
        let v: Vec<f64> = b.nodes.iter().map(|x| (1.3 * x).sin() + 1.0 / (1.0 + x * x)).collect();
        let m = b.assemble_bilinear(&v).unwrap();
        for r in 0..10 {
            for c in 0..10 {
                assert_eq!(m[r * 10 + c].to_bits(), m[c * 10 + r].to_bits());
            }
        }
        let mut bad = v.clone();
        bad[3] = f64::NAN;
        assert_eq!(b.assemble_bilinear(&bad), Err(HermiteError::NonFinite(3)));
    }

    #[test]
    fn synth_analyze_basics() {
        let b = SpectralBasis::<f64>::new(5).unwrap();
        let mut e1 = vec![cplx(0.0, 0.0); 5];
        e1[0] = cplx(1.0, 0.0);
        let s = b.synthesize(&e1).unwrap();
        for q in 0..b.order {
            assert_eq!(s[q].re, b.h(1, q));
        }
        let h2: Vec<C<f64>> = (0..b.order).map(|q| cplx(b.h(2, q), 0.0)).collect();
        let c = b.analyze(&h2).unwrap();
        for (j, cj) in c.iter().enumerate() {
            let want = if j == 1 { 1.0 } else { 0.0 };
            assert!((cj.re - want).abs() < 1e-13 && cj.im.abs() < 1e-15);
        }
        assert!(b.synthesize(&[cplx(1.0, 0.0)]).is_err());
    }

    #[test]
    fn single_precision_basis() {
        let b = SpectralBasis::<f32>::new(6).unwrap();
        let g = b.gram();
        for r in 0..6 {
            for c in 0..6 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((g[r * 6 + c] - want).abs() < 2e-5);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_random(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
            let b = SpectralBasis::<f64>::new(16).unwrap();
            let c: Vec<C<f64>> = coeffs.iter().map(|&(a, bb)| cplx(a, bb)).collect();
            let back = b.analyze(&b.synthesize(&c).unwrap()).unwrap();
            for (x, y) in c.iter().zip(&back) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
