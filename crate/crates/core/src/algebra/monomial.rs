use smallvec::SmallVec;
use std::cmp::Ordering;

/// Exponent data of one Fourier-Taylor monomial
/// `e^{i k.theta} y^m z^q zbar^qbar`.
///
/// `q` and `qbar` list 1-based mode indices with repetition, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub k: SmallVec<[i32; 2]>,
    pub m: SmallVec<[u32; 2]>,
    pub q: SmallVec<[u32; 4]>,
    pub qbar: SmallVec<[u32; 4]>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then_with(|| self.m.cmp(&other.m))
            .then_with(|| self.q.len().cmp(&other.q.len()))
            .then_with(|| self.q.cmp(&other.q))
            .then_with(|| self.qbar.len().cmp(&other.qbar.len()))
            .then_with(|| self.qbar.cmp(&other.qbar))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn new(k: &[i32], m: &[u32], q: &[u32], qbar: &[u32]) -> Self {
        let mut q: SmallVec<[u32; 4]> = q.iter().cloned().collect();
        let mut qbar: SmallVec<[u32; 4]> = qbar.iter().cloned().collect();
        q.sort_unstable();
        qbar.sort_unstable();
        Monomial { k: k.iter().cloned().collect(), m: m.iter().cloned().collect(), q, qbar }
    }

    /// The constant monomial in `n` angles.
    pub fn one(n: usize) -> Self {
        Monomial { k: SmallVec::from_elem(0, n), m: SmallVec::from_elem(0, n), q: SmallVec::new(), qbar: SmallVec::new() }
    }

    pub fn fourier(k: &[i32]) -> Self {
        let n = k.len();
        Monomial { k: k.iter().cloned().collect(), ..Self::one(n) }
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// Weighted degree `2|m| + |q| + |qbar|`.
    pub fn degree(&self) -> usize {
        2 * self.m.iter().map(|&x| x as usize).sum::<usize>() + self.q.len() + self.qbar.len()
    }

    pub fn abs_m(&self) -> usize {
        self.m.iter().map(|&x| x as usize).sum()
    }

    pub fn k_inf(&self) -> usize {
        self.k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn k_l1(&self) -> usize {
        self.k.iter().map(|x| x.unsigned_abs() as usize).sum()
    }

    pub fn max_mode(&self) -> u32 {
        self.q.iter().chain(self.qbar.iter()).cloned().max().unwrap_or(0)
    }

    pub fn is_k_zero(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }

    pub fn count_q(&self, j: u32) -> u32 {
        self.q.iter().filter(|&&x| x == j).count() as u32
    }

    pub fn count_qbar(&self, j: u32) -> u32 {
        self.qbar.iter().filter(|&&x| x == j).count() as u32
    }

    /// Key of the complex-conjugate monomial: `(-k, m, qbar, q)`.
    pub fn conj(&self) -> Self {
        Monomial { k: self.k.iter().map(|x| -x).collect(), m: self.m.clone(), q: self.qbar.clone(), qbar: self.q.clone() }
    }

    /// Powers of the z variables as (mode, power) pairs.
    pub fn q_powers(&self) -> Vec<(u32, u32)> {
        powers(&self.q)
    }

    pub fn qbar_powers(&self) -> Vec<(u32, u32)> {
        powers(&self.qbar)
    }

    /// Integer vector `q - qbar` as sparse (mode, coefficient) pairs.
    pub fn l_vector(&self) -> Vec<(u32, i32)> {
        let mut out: Vec<(u32, i32)> = Vec::new();
        for &j in &self.q {
            match out.iter_mut().find(|(a, _)| *a == j) {
                Some(e) => e.1 += 1,
                None => out.push((j, 1)),
            }
        }
        for &j in &self.qbar {
            match out.iter_mut().find(|(a, _)| *a == j) {
                Some(e) => e.1 -= 1,
                None => out.push((j, -1)),
            }
        }
        out.retain(|e| e.1 != 0);
        out.sort_unstable();
        out
    }

    /// Product of two monomials.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
            q: merge(&self.q, &other.q),
            qbar: merge(&self.qbar, &other.qbar),
        }
    }

    /// Remove one copy of mode `j` from `q` (or `qbar`); assumes present.
    pub fn without_q(&self, j: u32, bar: bool) -> Monomial {
        let mut out = self.clone();
        let v = if bar { &mut out.qbar } else { &mut out.q };
        let pos = v.iter().position(|&x| x == j).expect("mode present");
        v.remove(pos);
        out
    }
}

fn powers(v: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &j in v {
        match out.last_mut() {
            Some(e) if e.0 == j => e.1 += 1,
            _ => out.push((j, 1)),
        }
    }
    out
}

fn merge(a: &[u32], b: &[u32]) -> SmallVec<[u32; 4]> {
    let mut out = SmallVec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_and_conj() {
        let a = Monomial::new(&[1, -2], &[1, 0], &[3, 1], &[2]);
        assert_eq!(a.degree(), 5);
        assert_eq!(a.q.as_slice(), &[1, 3]);
        let c = a.conj();
        assert_eq!(c.k.as_slice(), &[-1, 2]);
        assert_eq!(c.q.as_slice(), &[2]);
        assert_eq!(c.conj(), a);
        assert_eq!(a.l_vector(), vec![(1, 1), (2, -1), (3, 1)]);
    }

    #[test]
    fn product_merges_sorted() {
        let a = Monomial::new(&[1], &[0], &[2, 5], &[]);
        let b = Monomial::new(&[-1], &[1], &[3], &[3]);
        let p = a.mul(&b);
        assert_eq!(p.k.as_slice(), &[0]);
        assert_eq!(p.q.as_slice(), &[2, 3, 5]);
        assert_eq!(p.qbar.as_slice(), &[3]);
        assert_eq!(p.l_vector(), vec![(2, 1), (5, 1)]);
    }
}
