use super::LieError;
use crate::algebra::{majorant_norm, poisson_bracket_cut, Discarded, NormParams, TaylorHamiltonian};
use crate::scalar::*;

/// `H o X_F^1 = sum_n ad_F^n(H) / n!` with `ad_F(G) = {G, F}`, each bracket
/// truncated at weighted degree `cap` and Fourier cutoff `cutoff`.
///
/// Stops once a term's majorant drops below `tol` times the running sum's;
/// returns the sum, the accumulated discarded mass and the number of terms.
pub fn lie_series<T: Real>(
    h: &TaylorHamiltonian<T>,
    f: &TaylorHamiltonian<T>,
    cap: usize,
    cutoff: usize,
    params: &NormParams<T>,
    tol: T,
    max_terms: usize,
) -> Result<(TaylorHamiltonian<T>, Discarded<T>, usize), LieError> {
    let mut sum = h.with_shape(cutoff, cap);
    let mut term = sum.clone();
    let mut disc = Discarded::default();
    if f.is_empty() || h.is_empty() {
        return Ok((sum, disc, 0));
    }
    for n in 1..=max_terms {
        let (next, d) = poisson_bracket_cut(&term, f, cap, cutoff)?;
        disc.degree_mass += d.degree_mass / from_usize::<T>(n);
        disc.fourier_mass += d.fourier_mass / from_usize::<T>(n);
        term = next.scale_re(T::one() / from_usize::<T>(n));
        sum.axpy(cone(), &term);
        let tn = majorant_norm(&term, params).total;
        let sn = majorant_norm(&sum, params).total;
        if tn <= tol * sn || term.is_empty() {
            return Ok((sum, disc, n));
        }
    }
    Err(LieError::SeriesDiverged(max_terms))
}
