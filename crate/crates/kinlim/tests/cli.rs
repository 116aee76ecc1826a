use std::path::Path;
use std::process::{Command, Output};

fn kinlim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinlim")).args(args).current_dir(dir).output().expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> String {
    let text = format!(
        r#"
[model]
family = "scattering"
d = 1
alpha = 1.0
beta = 1.0
nu0 = 1.0
kernel = "product"

[grid]
n = 200
vmax = 1e5

[sweep]
eta0 = 0.05
eta_count = 4

[simulate]
eps = [0.2, 0.1]
xi0 = 2.0
t_end = 1.0
n_uniform = 8
n_geometric = 2
{extra}
"#
    );
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let end = text.rfind('}').expect("json object on stdout");
    serde_json::from_str(&text[..=end]).expect("valid json")
}

#[test]
fn exponent_reports_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = kinlim(&["exponent", "-c", &cfg], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["regime"], "fractional");
    assert_eq!(v["zeta"], 1.0);
}

#[test]
fn kappa_prints_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = kinlim(&["kappa", "--model", &cfg], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    for key in ["regime", "zeta", "mu0", "kappa", "method"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["kappa"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["method"], "closed-form");
}

#[test]
fn branch_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let a = kinlim(&["branch", "-c", &cfg, "--out", "a"], dir.path());
    let b = kinlim(&["branch", "-c", &cfg, "--out", "b"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success());
    let ca = std::fs::read(dir.path().join("a/branch.csv")).unwrap();
    let cb = std::fs::read(dir.path().join("b/branch.csv")).unwrap();
    assert_eq!(ca, cb);
    let header = String::from_utf8(ca).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "eta,mu,mu_over_theta,residual,norm_phi_minus_1,moment_one_re,moment_one_im");
}

#[test]
fn check_mode_breach_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[tolerances]\nmu0_rel = 1e-9\n");
    let out = kinlim(&["branch", "-c", &cfg, "--out", "o", "--check"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let out = kinlim(&["branch", "-c", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let empty = cfg.replace("cfg.toml", "empty.toml");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("eta_count = 4", "eta_count = 0");
    std::fs::write(&empty, text).unwrap();
    assert_eq!(kinlim(&["branch", "-c", &empty], dir.path()).status.code(), Some(2));
    assert_eq!(kinlim(&["kappa", "-c", "missing.toml"], dir.path()).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_kinlim"))
        .args(["exponent"])
        .env("KINLIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[tolerances]\nmode_tol = 1e-30\n");
    assert_eq!(kinlim(&["mode", "-c", &cfg, "--eta", "0.1", "--out", "o"], dir.path()).status.code(), Some(3));
}

#[test]
fn mode_writes_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = kinlim(&["mode", "-c", &cfg, "--eta", "0.1", "--out", "o"], dir.path());
    assert!(out.status.success());
    assert!(json(&out)["mu"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(dir.path().join("o/mode.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("v,re,im"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn simulate_writes_manifest_and_flags_perturbed_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = kinlim(&["simulate", "-c", &cfg, "--out", "s", "--kappa", "0.45"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["perturbed_kappa"]["kappa"], 0.45);
    assert_eq!(manifest["law"]["zeta"], 1.0);
    let csv = std::fs::read_to_string(dir.path().join("s/errors_eps0.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,xi,error"));
    let snap = std::fs::read_to_string(dir.path().join("s/macro_final.csv")).unwrap();
    assert_eq!(snap.lines().next(), Some("xi,re,im"));
}

#[test]
fn defaults_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = kinlim(&["defaults"], dir.path());
    assert!(out.status.success());
    std::fs::write(dir.path().join("d.toml"), &out.stdout).unwrap();
    assert!(kinlim(&["exponent", "-c", "d.toml"], dir.path()).status.success());
    let out = kinlim(&["defaults", "--json"], dir.path());
    std::fs::write(dir.path().join("d.json"), &out.stdout).unwrap();
    assert!(kinlim(&["exponent", "-c", "d.json"], dir.path()).status.success());
}

#[test]
fn check_subcommand_passes_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = kinlim(&["check", "-c", &cfg], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
