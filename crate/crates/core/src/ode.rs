//! Adaptive Dormand-Prince 5(4) integrator for complex state vectors.

use crate::scalar::*;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {0} exhausted")]
    MaxSteps(usize),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    pub initial_step: Option<T>,
}

impl<T: Real> OdeOptions<T> {
    pub fn tol(tol: T) -> Self {
        OdeOptions { rtol: tol, atol: tol, max_steps: 10_000_000, initial_step: None }
    }
}

#[derive(Clone, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<T: Real>(out: &mut [C<T>], y: &[C<T>], h: T, terms: &[(f64, &[C<T>])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = czero::<T>();
        for (c, k) in terms {
            acc += k[i] * cst::<T>(*c);
        }
        *o = y[i] + acc * h;
    }
}

/// Integrate `y' = f(t, y)` from `t0`, returning the state at each of the
/// increasing `times` (all `>= t0`).
pub fn integrate<T: Real, F>(
    mut f: F,
    t0: T,
    y0: &[C<T>],
    times: &[T],
    opts: &OdeOptions<T>,
) -> Result<(Vec<Vec<C<T>>>, OdeStats), OdeError>
where
    F: FnMut(T, &[C<T>], &mut [C<T>]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    let mut k: Vec<Vec<C<T>>> = vec![vec![czero(); n]; 7];
    let mut tmp = vec![czero::<T>(); n];
    let mut ynew = vec![czero::<T>(); n];
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let span = times.last().map(|&e| (e - t0).abs()).unwrap_or(T::zero());
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let scale: T = y.iter().map(|v| v.norm()).fold(T::zero(), T::max).max(T::one());
        let d: T = k[0].iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let guess = if d > T::zero() { cst::<T>(0.01) * scale / d } else { cst(0.01) };
        guess.min(span.max(T::epsilon())).max(T::epsilon() * cst(100.0))
    });
    let safety = cst::<T>(0.9);
    for &target in times {
        while target - t > T::epsilon() * t.abs().max(T::one()) * cst(4.0) {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(OdeError::MaxSteps(opts.max_steps));
            }
            let mut last = false;
            if t + h >= target {
                h = target - t;
                last = true;
            }
            if h <= T::epsilon() * t.abs().max(T::one()) {
                return Err(OdeError::StepUnderflow { t: t.to_f64().unwrap_or(f64::NAN) });
            }
            let (k0, rest) = k.split_at_mut(1);
            let k0 = &k0[0];
            lin(&mut tmp, &y, h, &[(A21, k0)]);
            f(t + h * cst(C2), &tmp, &mut rest[0]);
            lin(&mut tmp, &y, h, &[(A31, k0), (A32, &rest[0])]);
            f(t + h * cst(C3), &tmp, &mut rest[1]);
            lin(&mut tmp, &y, h, &[(A41, k0), (A42, &rest[0]), (A43, &rest[1])]);
            f(t + h * cst(C4), &tmp, &mut rest[2]);
            lin(&mut tmp, &y, h, &[(A51, k0), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])]);
            f(t + h * cst(C5), &tmp, &mut rest[3]);
            lin(&mut tmp, &y, h, &[(A61, k0), (A62, &rest[0]), (A63, &rest[1]), (A64, &rest[2]), (A65, &rest[3])]);
            f(t + h, &tmp, &mut rest[4]);
            lin(&mut ynew, &y, h, &[(B1, k0), (B3, &rest[1]), (B4, &rest[2]), (B5, &rest[3]), (B6, &rest[4])]);
            f(t + h, &ynew, &mut rest[5]);
            stats.evaluations += 6;
            let mut err = T::zero();
            for i in 0..n {
                let e = (k0[i] * cst::<T>(E1)
                    + rest[1][i] * cst::<T>(E3)
                    + rest[2][i] * cst::<T>(E4)
                    + rest[3][i] * cst::<T>(E5)
                    + rest[4][i] * cst::<T>(E6)
                    + rest[5][i] * cst::<T>(E7))
                    * h;
                let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                let r = e.norm() / sc;
                err += r * r;
            }
            let err = if n > 0 { (err / from_usize::<T>(n)).sqrt() } else { T::zero() };
            if !err.is_finite() {
                if ynew.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) && h < T::epsilon() {
                    return Err(OdeError::NonFinite { t: t.to_f64().unwrap_or(f64::NAN) });
                }
                stats.rejected += 1;
                h = h * cst(0.2);
                continue;
            }
            if err <= T::one() {
                stats.accepted += 1;
                t = if last { target } else { t + h };
                std::mem::swap(&mut y, &mut ynew);
                let (a, b) = k.split_at_mut(6);
                std::mem::swap(&mut a[0], &mut b[0]);
                let fac = if err == T::zero() { cst(5.0) } else { (safety * err.powf(cst(-0.2))).min(cst(5.0)) };
                if !last {
                    h = h * fac.max(cst(0.2));
                }
            } else {
                stats.rejected += 1;
                h = h * (safety * err.powf(cst(-0.2))).max(cst(0.1));
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_matches_closed_form() {
        let w = [1.0f64, 3.0, 5.0];
        let y0: Vec<C<f64>> = vec![cplx(1.0, 0.0), cplx(0.0, 1.0), cplx(0.5, -0.5)];
        let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let (sol, _) = integrate(
            |_t, y: &[C<f64>], dy: &mut [C<f64>]| {
                for i in 0..3 {
                    dy[i] = cplx(0.0, -w[i]) * y[i];
                }
            },
            0.0,
            &y0,
            &times,
            &OdeOptions::tol(1e-12),
        )
        .unwrap();
        for (s, &t) in sol.iter().zip(&times) {
            for i in 0..3 {
                let ex = y0[i] * cplx((w[i] * t).cos(), -(w[i] * t).sin());
                assert!((s[i] - ex).norm() < 1e-9, "{t} {i}");
            }
        }
    }

    #[test]
    fn nonautonomous_scalar() {
        // y' = cos(t) y, y = exp(sin t)
        let (sol, _) = integrate(
            |t: f64, y: &[C<f64>], dy: &mut [C<f64>]| dy[0] = y[0] * t.cos(),
            0.0,
            &[cplx(1.0, 0.0)],
            &[0.0, 2.5, 7.0],
            &OdeOptions::tol(1e-12),
        )
        .unwrap();
        assert_eq!(sol[0][0], cplx(1.0, 0.0));
        assert!((sol[2][0].re - 7.0f64.sin().exp()).abs() < 1e-10);
    }
}
