//! CSV writers for experiment results. All reals use shortest round-trip formatting.

use crate::nls::{GalerkinFamily, NondegeneracyReport, PerturbedSpectrum};
use crate::kam::IterationTrace;
use crate::scalar::*;
use crate::variational::Minimizer;
use std::io::{self, Write};

fn re<T: Real>(x: T) -> String {
    fmt_roundtrip(x)
}

/// `j, omega_star, defect` with `defect = Omega*_j - (2j - 1)`.
pub fn write_omega_star<T: Real, W: Write>(w: W, omega_star: &[T]) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "omega_star", "defect"])?;
    for (i, &x) in omega_star.iter().enumerate() {
        wr.write_record(&[(i + 1).to_string(), re(x), re(x - from_usize::<T>(2 * i + 1))])?;
    }
    wr.flush()
}

/// `j, omega_star, abs_diff` against the closed form `2j - 1`.
pub fn write_oracle_diff<T: Real, W: Write>(w: W, omega_star: &[T]) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "omega_star", "abs_diff"])?;
    for (i, &x) in omega_star.iter().enumerate() {
        wr.write_record(&[(i + 1).to_string(), re(x), re((x - from_usize::<T>(2 * i + 1)).abs())])?;
    }
    wr.flush()
}

/// Trace without the wall-clock column, so reruns are byte-identical.
pub fn write_trace<W: Write>(w: W, trace: &IterationTrace) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["nu", "eps_majorant", "alpha_nu", "sigma_nu", "K_nu", "min_divisor", "freq_drift"])?;
    for r in &trace.records {
        wr.write_record(&[
            r.nu.to_string(),
            re(r.eps_majorant),
            re(r.alpha_nu),
            re(r.sigma_nu),
            r.k_nu.to_string(),
            re(r.min_divisor),
            re(r.freq_drift),
        ])?;
    }
    wr.flush()
}

/// `j, lambda, first_order, defect`, where the first-order prediction is
/// `2j - 1 + nu int V h_j^2`.
pub fn write_lambda<T: Real, W: Write>(w: W, sp: &PerturbedSpectrum<T>, gal: &GalerkinFamily<T>) -> io::Result<()> {
    let jm = sp.lambda.len();
    let v = gal.potential_matrix(&sp.xi);
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "lambda", "first_order", "defect"])?;
    for (i, &l) in sp.lambda.iter().enumerate() {
        let pred = from_usize::<T>(2 * i + 1) + sp.nu * v[i * jm + i];
        wr.write_record(&[(i + 1).to_string(), re(l), re(pred), re(l - pred)])?;
    }
    wr.flush()
}

pub fn write_nondegeneracy<T: Real, W: Write>(w: W, r: &NondegeneracyReport<T>) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["kind", "p", "q", "sign", "value"])?;
    for (p, d) in &r.single {
        wr.write_record(&["single".to_string(), p.to_string(), String::new(), String::new(), re(*d)])?;
    }
    let (p, q, s, d) = r.pair_min;
    wr.write_record(&["pair_min".to_string(), p.to_string(), q.to_string(), s.to_string(), re(d)])?;
    wr.write_record(&["min_divisor".to_string(), String::new(), String::new(), String::new(), re(r.min_divisor)])?;
    wr.write_record(&["excluded_fraction".to_string(), String::new(), String::new(), String::new(), re(r.excluded_fraction)])?;
    wr.flush()
}

#[derive(Clone, Debug)]
pub struct MeasureRow<T> {
    pub alpha: T,
    pub fraction_excluded: T,
    pub samples: usize,
    pub seed: u64,
    pub k: usize,
    pub j: usize,
    pub tau: T,
}

pub fn write_measure<T: Real, W: Write>(w: W, rows: &[MeasureRow<T>]) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["alpha", "fraction_excluded", "samples", "seed", "K", "J", "tau"])?;
    for r in rows {
        wr.write_record(&[
            re(r.alpha),
            re(r.fraction_excluded),
            r.samples.to_string(),
            r.seed.to_string(),
            r.k.to_string(),
            r.j.to_string(),
            re(r.tau),
        ])?;
    }
    wr.flush()
}

/// `k, lambda, energy, residual`.
pub fn write_variational<T: Real, W: Write>(w: W, m: &[Minimizer<T>]) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["k", "lambda", "energy", "residual"])?;
    for (i, x) in m.iter().enumerate() {
        wr.write_record(&[(i + 1).to_string(), re(x.lambda), re(x.energy), re(x.residual)])?;
    }
    wr.flush()
}

/// Long format `k, j, coefficient`.
pub fn write_coefficients<T: Real, W: Write>(w: W, m: &[Minimizer<T>]) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["k", "j", "coefficient"])?;
    for (i, x) in m.iter().enumerate() {
        for (j, &c) in x.coeffs.iter().enumerate() {
            wr.write_record(&[(i + 1).to_string(), (j + 1).to_string(), re(c)])?;
        }
    }
    wr.flush()
}

/// Plot-ready `series, x, y` rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub rows: Vec<(String, f64, f64)>,
}

impl PlotData {
    pub fn push_series(&mut self, name: &str, pts: impl IntoIterator<Item = (f64, f64)>) {
        self.rows.extend(pts.into_iter().map(|(x, y)| (name.to_string(), x, y)));
    }

    /// `(nu, log10 eps_nu)` for the full and the degree-2 majorants.
    pub fn from_trace(trace: &IterationTrace) -> Self {
        let mut p = PlotData::default();
        p.push_series("log10_eps", trace.records.iter().map(|r| (r.nu as f64, r.eps_majorant.log10())));
        p.push_series("log10_eps_quadratic", trace.records.iter().map(|r| (r.nu as f64, r.eps_quadratic.log10())));
        p
    }

    /// `(alpha, excluded fraction)`.
    pub fn from_measure<T: Real>(rows: &[MeasureRow<T>]) -> Self {
        let mut p = PlotData::default();
        p.push_series("excluded_fraction", rows.iter().map(|r| (f64of(r.alpha), f64of(r.fraction_excluded))));
        p
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["series", "x", "y"])?;
        for (s, x, y) in &self.rows {
            wr.write_record(&[s.clone(), re(*x), re(*y)])?;
        }
        wr.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kam::TraceRecord;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> String {
        let mut b = Vec::new();
        f(&mut b).unwrap();
        String::from_utf8(b).unwrap()
    }

    #[test]
    fn empty_trace_gives_header_only() {
        let t = IterationTrace::default();
        assert_eq!(text(|b| PlotData::from_trace(&t).write_csv(b)), "series,x,y\n");
        assert_eq!(text(|b| write_trace(b, &t)), "nu,eps_majorant,alpha_nu,sigma_nu,K_nu,min_divisor,freq_drift\n");
    }

    #[test]
    fn trace_series_is_log10() {
        let r = TraceRecord {
            nu: 2,
            eps_majorant: 1e-6,
            eps_quadratic: 1e-8,
            alpha_nu: 0.1,
            sigma_nu: 0.2,
            k_nu: 8,
            min_divisor: 0.5,
            freq_drift: 0.0,
            seconds: 3.0,
            gate: 1.0,
            gate_ok: true,
            tail_mass: 0.0,
            min_ratio: 1.0,
            series_terms: 3,
        };
        let t = IterationTrace { records: vec![r] };
        let s = text(|b| PlotData::from_trace(&t).write_csv(b));
        assert_eq!(s, "series,x,y\nlog10_eps,2,-6\nlog10_eps_quadratic,2,-8\n");
        assert!(!text(|b| write_trace(b, &t)).contains(",3\n"));
    }

    #[test]
    fn omega_star_defects_and_full_precision() {
        let s = text(|b| write_omega_star(b, &[1.0, 3.0 + 1e-3, 0.1 + 0.2]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "1,1,0");
        let last: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[1], 0.1 + 0.2);
        assert_eq!(last[2], (0.1 + 0.2) - 5.0);
    }

    #[test]
    fn measure_rows_round_trip() {
        let rows = vec![MeasureRow { alpha: 0.4, fraction_excluded: 0.25, samples: 100, seed: 7, k: 30, j: 16, tau: 4.0 }];
        let s = text(|b| write_measure(b, &rows));
        assert_eq!(s, "alpha,fraction_excluded,samples,seed,K,J,tau\n0.4,0.25,100,7,30,16,4\n");
        assert_eq!(PlotData::from_measure(&rows).rows, vec![("excluded_fraction".to_string(), 0.4, 0.25)]);
    }
}
