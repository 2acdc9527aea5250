use crate::config::*;
use oscikam::divisors::{excluded_measure, FrequencySet};
use oscikam::hermite::SpectralBasis;
use oscikam::kam::KamError;
use oscikam::lie::write_map_dump;
use oscikam::nls::{self, NlsConfig, NlsError, PotentialFamily, TorusExpansion};
use oscikam::output::{self, MeasureRow, PlotData};
use oscikam::reducibility::{self, QuasiPeriodicPotential, ReduceConfig, ReduceError};
use oscikam::variational::{self, NonlinearRule, VariationalError, VariationalProblem};
use serde_json::{json, Value};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// Failure classes, one per process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    General(String),
    Resonance(String),
    Divergence(String),
    Integrity(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::General(_) => 1,
            Failure::Resonance(_) => 2,
            Failure::Divergence(_) => 3,
            Failure::Integrity(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::General(m) | Failure::Resonance(m) | Failure::Divergence(m) | Failure::Integrity(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::General(format!("i/o: {e}"))
    }
}

fn from_kam(e: KamError) -> Failure {
    let m = e.to_string();
    match e {
        KamError::Resonance { .. } => Failure::Resonance(m),
        KamError::Schedule(_) => Failure::Config(m),
        KamError::Divergence { .. } | KamError::Gate { .. } | KamError::NonFinite(_) => Failure::Divergence(m),
        KamError::Lie(_) | KamError::Algebra(_) => Failure::Integrity(m),
        KamError::Homological(_) => Failure::Resonance(m),
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        let m = e.to_string();
        match e {
            ReduceError::Config(_) | ReduceError::Hermite(_) => Failure::Config(m),
            ReduceError::Resonance { .. } => Failure::Resonance(m),
            ReduceError::Kam(k) => from_kam(k),
            ReduceError::Ode(_) => Failure::Divergence(m),
            ReduceError::Lie(_) | ReduceError::Integrity(_) => Failure::Integrity(m),
        }
    }
}

impl From<NlsError> for Failure {
    fn from(e: NlsError) -> Self {
        let m = e.to_string();
        match e {
            NlsError::Config(_) | NlsError::Hermite(_) | NlsError::Degenerate { .. } | NlsError::SingularGram => Failure::Config(m),
            NlsError::Orthonormality(_) => Failure::Integrity(m),
            NlsError::Kam(k) => from_kam(k),
        }
    }
}

impl From<VariationalError> for Failure {
    fn from(e: VariationalError) -> Self {
        let m = e.to_string();
        match e {
            VariationalError::Config(_) | VariationalError::Hermite(_) => Failure::Config(m),
            VariationalError::NoConvergence { .. } | VariationalError::Runaway { .. } | VariationalError::Ode(_) => {
                Failure::Divergence(m)
            }
            VariationalError::Orthogonality { .. } | VariationalError::Monotonicity { .. } => Failure::Integrity(m),
        }
    }
}

fn csv_file(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn need<T: Clone>(s: &Option<T>, name: &str) -> Result<T, Failure> {
    s.clone().ok_or_else(|| Failure::Config(format!("missing required section [{name}]")))
}

/// Runs one experiment, writing CSVs into `dir`, and returns the
/// experiment-specific manifest fields.
pub fn run(exp: Experiment, cfg: &RunConfig, dir: &Path) -> Result<Value, Failure> {
    match exp {
        Experiment::Reduce => run_reduce(&need(&cfg.reduce, "reduce")?, cfg.strict_gate, dir),
        Experiment::Oracle => run_oracle(&cfg.oracle.clone().unwrap_or_default(), cfg.strict_gate, dir),
        Experiment::Spectrum => run_spectrum(&need(&cfg.spectrum, "spectrum")?, dir),
        Experiment::Nls => run_nls(&need(&cfg.nls, "nls")?, cfg.strict_gate, dir),
        Experiment::Variational => run_variational(&need(&cfg.variational, "variational")?, dir),
        Experiment::Measure => run_measure(&need(&cfg.measure, "measure")?, dir),
    }
}

fn step_seconds(trace: &oscikam::kam::IterationTrace) -> Vec<f64> {
    trace.records.iter().map(|r| r.seconds).collect()
}

fn integrity(res: &reducibility::ReducibilityResult<f64>) -> Result<f64, Failure> {
    let (d, g) = res.map.symplectic_defect();
    if !(d <= 1e-10) {
        return Err(Failure::Integrity(format!("symplecticity defect {d:e} at grid point {g}")));
    }
    Ok(d)
}

fn run_reduce(s: &ReduceSection, strict: bool, dir: &Path) -> Result<Value, Failure> {
    let omega = match (&s.omega, s.n) {
        (Some(w), _) => w.clone(),
        (None, 1) => vec![golden_omega()],
        (None, _) => return Err(Failure::Config("missing required key `omega` for n > 1".into())),
    };
    let v = match s.potential {
        PotentialKind::Cos => QuasiPeriodicPotential::cos_theta(s.n),
        PotentialKind::DecayingCos => QuasiPeriodicPotential::decaying_cos(s.n),
    };
    let mut rc = ReduceConfig { strict, ..ReduceConfig::default() };
    if let Some(k) = s.k0 {
        rc.k0 = k;
    }
    if let Some(m) = s.max_steps {
        rc.max_steps = m;
    }
    if let Some(t) = s.target {
        rc.target = t;
    }
    if let Some(a) = s.alpha0 {
        rc.alpha0 = a;
    }
    if let Some(t) = s.tau {
        rc.tau = t;
    }
    let res = reducibility::reduce(&v, &omega, s.eps, s.modes, &rc)?;
    let defect = integrity(&res)?;
    output::write_omega_star(csv_file(dir, "omega_star.csv")?, &res.omega_star)?;
    output::write_trace(csv_file(dir, "trace.csv")?, &res.trace)?;
    res.trace.write_diagnostics_csv(csv_file(dir, "trace_diagnostics.csv")?)?;
    PlotData::from_trace(&res.trace).write_csv(csv_file(dir, "plot_trace.csv")?)?;
    if s.dump_map {
        write_map_dump(&mut csv_file(dir, "map_dump.txt")?, &res.map)?;
    }
    if !res.converged {
        return Err(Failure::Divergence(format!("no convergence: final majorant {:e}", res.eps_final)));
    }
    Ok(json!({
        "eps0": res.eps0,
        "eps_final": res.eps_final,
        "tail_mass": res.tail_mass,
        "symplectic_defect": defect,
        "floquet_residual": reducibility::floquet_residual(&res),
        "step_seconds": step_seconds(&res.trace),
    }))
}

fn run_oracle(s: &OracleSection, strict: bool, dir: &Path) -> Result<Value, Failure> {
    let v = QuasiPeriodicPotential::cos_theta(1);
    let rc = ReduceConfig { strict, k0: s.k0, ..ReduceConfig::default() };
    let res = reducibility::reduce(&v, &[s.omega], s.eps, s.modes, &rc)?;
    let defect = integrity(&res)?;
    let cmp = reducibility::compare_with_oracle(&res, &v, rc.alpha0, rc.tau)?;
    output::write_oracle_diff(csv_file(dir, "oracle_diff.csv")?, &res.omega_star)?;
    output::write_trace(csv_file(dir, "trace.csv")?, &res.trace)?;
    Ok(json!({
        "max_abs_diff": cmp.omega_defect,
        "diagonal_defect": cmp.diagonal_defect,
        "offdiagonal": cmp.offdiagonal,
        "global_phase": [cmp.phase.re, cmp.phase.im],
        "symplectic_defect": defect,
        "step_seconds": step_seconds(&res.trace),
    }))
}

fn galerkin(n: usize, modes: usize, k_max: usize, seed: u64) -> Result<(SpectralBasis<f64>, nls::GalerkinFamily<f64>), Failure> {
    let basis = SpectralBasis::<f64>::new(modes).map_err(|e| Failure::Config(e.to_string()))?;
    let fam = PotentialFamily::new(n, k_max, seed, &basis)?;
    let gal = nls::GalerkinFamily::new(fam, &basis)?;
    Ok((basis, gal))
}

fn run_spectrum(s: &SpectrumSection, dir: &Path) -> Result<Value, Failure> {
    let (_, gal) = galerkin(s.n, s.modes, s.k_max, s.seed)?;
    let xi = s.xi.clone().unwrap_or_else(|| vec![1.0; s.n]);
    let sp = nls::perturbed_spectrum(&gal, s.nu, &xi)?;
    output::write_lambda(csv_file(dir, "lambda.csv")?, &sp, &gal)?;
    let rep = nls::nondegeneracy_scan(&gal, s.nu, s.scan_kmax, s.scan_jmax, s.samples, s.scan_seed, s.alpha, s.tau)?;
    output::write_nondegeneracy(csv_file(dir, "nondegeneracy.csv")?, &rep)?;
    Ok(json!({ "g_seed": s.seed, "scan_seed": s.scan_seed, "excluded_fraction": rep.excluded_fraction }))
}

fn run_nls(s: &NlsSection, strict: bool, dir: &Path) -> Result<Value, Failure> {
    let (basis, gal) = galerkin(s.n, s.modes, s.k_max, s.seed)?;
    let xi = s.xi.clone().unwrap_or_else(|| vec![1.0; s.n]);
    let actions = s.actions.clone().unwrap_or_else(|| vec![1.0; s.n]);
    let ex = TorusExpansion { actions, eps: s.eps, m: s.m, degree: s.degree };
    let nc = NlsConfig { strict, max_steps: s.max_steps, degree: s.degree, ..NlsConfig::default() };
    let rep = nls::nls_kam_run(&gal, &basis, &xi, s.nu, &ex, &nc)?;
    output::write_trace(csv_file(dir, "trace.csv")?, &rep.trace)?;
    rep.trace.write_diagnostics_csv(csv_file(dir, "trace_diagnostics.csv")?)?;
    PlotData::from_trace(&rep.trace).write_csv(csv_file(dir, "plot_trace.csv")?)?;
    let mut wr = csv_file(dir, "frequencies.csv")?;
    {
        use std::io::Write;
        writeln!(wr, "j,omega0,omega_start,omega_star")?;
        for j in 0..rep.omega0.len() {
            writeln!(
                wr,
                "{},{},{},{}",
                j + 1,
                oscikam::scalar::fmt_roundtrip(rep.omega0[j]),
                oscikam::scalar::fmt_roundtrip(rep.omega_start[j]),
                oscikam::scalar::fmt_roundtrip(rep.omega_star[j])
            )?;
        }
    }
    Ok(json!({
        "g_seed": s.seed,
        "first_step_ratio": rep.first_step_ratio(),
        "drift_constant": rep.drift_constant,
        "quadratic_majorants": rep.quadratic_majorants,
        "full_majorants": rep.full_majorants,
        "p_terms": rep.p_terms,
        "step_seconds": step_seconds(&rep.trace),
    }))
}

fn run_variational(s: &VariationalSection, dir: &Path) -> Result<Value, Failure> {
    let mut prob = VariationalProblem::new(s.mu, s.p, s.modes, s.count);
    prob.tol = s.tol;
    if let Some(e) = s.focusing {
        prob = prob.focusing(e);
    }
    let rule = NonlinearRule::new(s.modes, s.p)?;
    let m = variational::minimize_with(&prob, &rule, s.seed)?;
    output::write_variational(csv_file(dir, "variational.csv")?, &m)?;
    output::write_coefficients(csv_file(dir, "coefficients.csv")?, &m)?;
    let mut dev = Vec::new();
    if s.orbit_time > 0.0 {
        for x in &m {
            dev.push(variational::verify_periodic_orbit(&rule, prob.coupling, &x.coeffs, x.lambda, s.orbit_time, 50, 1e-12)?);
        }
    }
    let worst = m.iter().map(|x| x.residual).fold(0.0, f64::max);
    Ok(json!({ "seed": s.seed, "max_residual": worst, "residual_ok": worst <= s.tol, "orbit_deviation": dev }))
}

fn run_measure(s: &MeasureSection, dir: &Path) -> Result<Value, Failure> {
    if s.alphas.is_empty() || s.samples == 0 || !(s.omega_max > s.omega_min) {
        return Err(Failure::Config("need non-empty alphas, samples > 0 and omega_min < omega_max".into()));
    }
    let bounds = [(s.omega_min, s.omega_max)];
    let jmax = s.jmax;
    let rows: Vec<MeasureRow<f64>> = s
        .alphas
        .iter()
        .map(|&alpha| MeasureRow {
            alpha,
            fraction_excluded: excluded_measure(&bounds, alpha, s.tau, s.kmax, jmax, |w: &[f64]| FrequencySet::constant_gap(w.to_vec(), jmax), s.samples, s.seed),
            samples: s.samples,
            seed: s.seed,
            k: s.kmax,
            j: jmax,
            tau: s.tau,
        })
        .collect();
    output::write_measure(csv_file(dir, "measure.csv")?, &rows)?;
    PlotData::from_measure(&rows).write_csv(csv_file(dir, "plot_measure.csv")?)?;
    Ok(json!({ "seed": s.seed }))
}
