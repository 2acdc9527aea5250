use super::hamiltonian::{AlgebraError, TaylorHamiltonian};
use super::monomial::Monomial;
use crate::scalar::*;
use rustc_hash::FxHashMap;

/// l1 mass of contributions dropped by a bracket.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Discarded<T> {
    /// Products with weighted degree above the cap (upper bound).
    pub degree_mass: T,
    /// Products with Fourier index above the cutoff.
    pub fourier_mass: T,
}

impl<T: Real> Discarded<T> {
    pub fn total(&self) -> T {
        self.degree_mass + self.fourier_mass
    }
}

struct Deriv<T: Real> {
    /// entries grouped by weighted degree
    by_degree: Vec<Vec<(Monomial, C<T>)>>,
    mass: Vec<T>,
}

impl<T: Real> Deriv<T> {
    fn new() -> Self {
        Deriv { by_degree: Vec::new(), mass: Vec::new() }
    }
    fn push(&mut self, m: Monomial, c: C<T>) {
        let d = m.degree();
        if self.by_degree.len() <= d {
            self.by_degree.resize_with(d + 1, Vec::new);
            self.mass.resize(d + 1, T::zero());
        }
        self.mass[d] += c.norm();
        self.by_degree[d].push((m, c));
    }
    fn is_empty(&self) -> bool {
        self.by_degree.iter().all(|v| v.is_empty())
    }
}

/// Derivatives of `h` organised per variable: theta_i, y_i, z_j, zbar_j.
struct Derivs<T: Real> {
    theta: Vec<Deriv<T>>,
    y: Vec<Deriv<T>>,
    z: Vec<Deriv<T>>,
    zbar: Vec<Deriv<T>>,
}

fn derivatives<T: Real>(h: &TaylorHamiltonian<T>) -> Derivs<T> {
    let n = h.n;
    let jm = h.modes;
    let mut d = Derivs {
        theta: (0..n).map(|_| Deriv::new()).collect(),
        y: (0..n).map(|_| Deriv::new()).collect(),
        z: (0..jm).map(|_| Deriv::new()).collect(),
        zbar: (0..jm).map(|_| Deriv::new()).collect(),
    };
    for (key, &c) in h.iter() {
        for i in 0..n {
            if key.k[i] != 0 {
                d.theta[i].push(key.clone(), c * cplx(T::zero(), from_i64::<T>(key.k[i] as i64)));
            }
            if key.m[i] > 0 {
                let mut m2 = key.clone();
                m2.m[i] -= 1;
                d.y[i].push(m2, c * from_i64::<T>(key.m[i] as i64));
            }
        }
        for (j, p) in key.q_powers() {
            d.z[j as usize - 1].push(key.without_q(j, false), c * from_i64::<T>(p as i64));
        }
        for (j, p) in key.qbar_powers() {
            d.zbar[j as usize - 1].push(key.without_q(j, true), c * from_i64::<T>(p as i64));
        }
    }
    d
}

struct Acc<T: Real> {
    map: FxHashMap<Monomial, (C<T>, T)>,
    cap: usize,
    cutoff: usize,
    disc: Discarded<T>,
}

impl<T: Real> Acc<T> {
    fn pair(&mut self, a: &Deriv<T>, b: &Deriv<T>, factor: C<T>) {
        if a.is_empty() || b.is_empty() {
            return;
        }
        for (da, la) in a.by_degree.iter().enumerate() {
            if la.is_empty() {
                continue;
            }
            let over: T = b
                .mass
                .iter()
                .enumerate()
                .filter(|(db, _)| da + db > self.cap)
                .map(|(_, &m)| m)
                .sum();
            for (ma, ca) in la {
                if over > T::zero() {
                    self.disc.degree_mass += ca.norm() * over;
                }
                let cf = *ca * factor;
                for (db, lb) in b.by_degree.iter().enumerate() {
                    if da + db > self.cap {
                        continue;
                    }
                    for (mb, cb) in lb {
                        let v = cf * *cb;
                        let mono = ma.mul(mb);
                        if mono.k_inf() > self.cutoff {
                            self.disc.fourier_mass += v.norm();
                            continue;
                        }
                        let e = self.map.entry(mono).or_insert((czero(), T::zero()));
                        e.0 += v;
                        e.1 += v.norm();
                    }
                }
            }
        }
    }
}

/// Poisson bracket with result cutoff the larger operand cutoff.
pub fn poisson_bracket<T: Real>(
    a: &TaylorHamiltonian<T>,
    b: &TaylorHamiltonian<T>,
    cap: usize,
) -> Result<(TaylorHamiltonian<T>, Discarded<T>), AlgebraError> {
    poisson_bracket_cut(a, b, cap, a.cutoff.max(b.cutoff))
}

/// `{A, B} = sum_i (A_theta B_y - A_y B_theta) + i sum_j (A_z B_zbar - A_zbar B_z)`,
/// keeping weighted degree `<= cap` and `|k|_inf <= cutoff`.
pub fn poisson_bracket_cut<T: Real>(
    a: &TaylorHamiltonian<T>,
    b: &TaylorHamiltonian<T>,
    cap: usize,
    cutoff: usize,
) -> Result<(TaylorHamiltonian<T>, Discarded<T>), AlgebraError> {
    if a.n != b.n || a.modes != b.modes {
        return Err(AlgebraError::Dimension(format!(
            "(n, J) = ({}, {}) vs ({}, {})",
            a.n, a.modes, b.n, b.modes
        )));
    }
    let da = derivatives(a);
    let db = derivatives(b);
    let one = cone::<T>();
    let i = ci::<T>();
    let mut acc = Acc { map: FxHashMap::default(), cap, cutoff, disc: Discarded::default() };
    for k in 0..a.n {
        acc.pair(&da.theta[k], &db.y[k], one);
        acc.pair(&da.y[k], &db.theta[k], -one);
    }
    for j in 0..a.modes {
        acc.pair(&da.z[j], &db.zbar[j], i);
        acc.pair(&da.zbar[j], &db.z[j], -i);
    }
    let mut out = TaylorHamiltonian::new(a.n, a.modes, cutoff, cap);
    let noise = cst::<T>(8.0) * T::eps();
    for (k, (c, mass)) in acc.map {
        if c.norm() > noise * mass {
            out.insert_raw(k, c);
        }
    }
    Ok((out, acc.disc))
}
