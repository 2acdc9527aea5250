use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oscikam"));
    c.env_remove("OSCIKAM_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn oracle_defaults_recover_closed_form() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("o");
    let o = run(&["oracle", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "oracle_diff.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,omega_star,abs_diff"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|d| *d <= 1e-8));
    let m: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config"]["oracle"]["modes"], 32);
    assert!(m["results"]["diagonal_defect"].as_f64().unwrap() < 1e-6);
    assert!(m["wall_seconds"].as_f64().is_some());
}

#[test]
fn missing_and_unknown_keys_exit_one() {
    let t = tempfile::tempdir().unwrap();
    let c = write(t.path(), "m.toml", "[reduce]\nmodes = 6\n");
    let o = run(&["reduce", "--config", &c, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
    let c = write(t.path(), "u.toml", "[reduce]\nmodes = 6\neps = 0.01\nwidth = 2\n");
    let o = run(&["reduce", "--config", &c, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));
    let c = write(t.path(), "e.toml", "[measure]\nalphas = [0.1]\nsamples = 4\n");
    let o = run(&["run", &c, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));
    let c = write(t.path(), "x.toml", "experiment = \"nls\"\n");
    let o = run(&["measure", "--config", &c, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rational_frequency_exits_two() {
    let t = tempfile::tempdir().unwrap();
    let c = write(t.path(), "r.toml", "experiment = \"reduce\"\n[reduce]\neps = 0.01\nmodes = 6\nomega = [1.0]\n");
    let o = run(&["run", &c, "--out", t.path().join("r").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("resonan"), "{err}");
    let m: serde_json::Value = serde_json::from_str(&read(&t.path().join("r"), "manifest.json")).unwrap();
    assert_eq!(m["results"]["exit_code"], 2);
}

#[test]
fn reduce_writes_tables() {
    let t = tempfile::tempdir().unwrap();
    let c = write(t.path(), "r.toml", "[reduce]\neps = 0.01\nmodes = 8\ndump_map = true\n");
    let out = t.path().join("r");
    let o = run(&["--threads", "1", "reduce", "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let om = read(&out, "omega_star.csv");
    assert!(om.starts_with("j,omega_star,defect\n"));
    assert_eq!(om.lines().count(), 9);
    assert!(read(&out, "trace.csv").starts_with("nu,eps_majorant,alpha_nu,sigma_nu,K_nu,min_divisor,freq_drift\n"));
    assert!(read(&out, "plot_trace.csv").starts_with("series,x,y\n"));
    assert!(read(&out, "map_dump.txt").contains("\nL 0 "));
}

#[test]
fn reruns_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let m = write(t.path(), "m.toml", "[measure]\nalphas = [0.4, 0.1]\nsamples = 300\nseed = 9\n");
    let r = write(t.path(), "r.toml", "[reduce]\neps = 0.01\nmodes = 6\n");
    for (exp, cfg, files) in [
        ("measure", &m, vec!["measure.csv", "plot_measure.csv"]),
        ("reduce", &r, vec!["omega_star.csv", "trace.csv", "trace_diagnostics.csv"]),
    ] {
        let a = t.path().join(format!("{exp}_a"));
        let b = t.path().join(format!("{exp}_b"));
        assert_eq!(run(&[exp, "--config", cfg, "--out", a.to_str().unwrap()]).status.code(), Some(0));
        assert_eq!(run(&["--threads", "2", exp, "--config", cfg, "--out", b.to_str().unwrap()]).status.code(), Some(0));
        for f in files {
            assert_eq!(read(&a, f), read(&b, f), "{exp}/{f}");
        }
    }
}

#[test]
fn variational_flags_and_env_output_root() {
    let t = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["variational", "--mu", "0.5", "--p", "1", "--count", "2"])
        .env("OSCIKAM_OUT", t.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(t.path(), "variational.csv");
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!((rows[0][1] - 2.0).abs() < 1e-12);
    assert!((rows[1][1] - 4.0).abs() < 1e-12);
    assert_eq!(read(t.path(), "coefficients.csv").lines().count(), 1 + 2 * 32);
    let o = run(&["variational", "--mu", "0.5", "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_and_nls_small() {
    let t = tempfile::tempdir().unwrap();
    let s = write(t.path(), "s.toml", "[spectrum]\nnu = 0.001\nmodes = 12\nk_max = 12\nscan_jmax = 4\nsamples = 20\n");
    let out = t.path().join("s");
    let o = run(&["spectrum", "--config", &s, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out, "lambda.csv").starts_with("j,lambda,first_order,defect\n"));
    assert!(read(&out, "nondegeneracy.csv").contains("pair_min"));
    let n = write(t.path(), "n.toml", "[nls]\nnu = 0.02\neps = 0.001\nmodes = 8\nk_max = 8\n");
    let out = t.path().join("n");
    let o = run(&["nls", "--config", &n, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert!(m["results"]["first_step_ratio"].as_f64().unwrap() < 1.0);
    assert!(read(&out, "frequencies.csv").starts_with("j,omega0,omega_start,omega_star\n"));
    let bad = write(t.path(), "b.toml", "[nls]\nnu = 0.001\neps = 0.001\nmodes = 8\nk_max = 8\n");
    assert_eq!(run(&["nls", "--config", &bad, "--out", out.to_str().unwrap()]).status.code(), Some(1));
}
