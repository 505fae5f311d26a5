use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_contraction-lab"));
    c.env_remove("CONTRACTION_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse::<f64>().unwrap()).collect()
    }
}

fn figure(name: &str, extra: &[&str]) -> Csv {
    let mut args = vec!["figure", name];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    Csv::parse(&stdout(&o))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn assert_dominated(csv: &Csv, ours: &str, baseline: &str, slack: f64) {
    for (i, (o, b)) in csv.col(ours).iter().zip(csv.col(baseline)).enumerate() {
        assert!(*o <= b + slack, "row {i}: {ours} {o} > {baseline} {b}");
    }
}

#[test]
fn exemplar_report() {
    let dir = TempDir::new().unwrap();
    let k = write(dir.path(), "k.json", r#"{"matrix": [[0.2, 0.1, 0.7], [0.3, 0.4, 0.3], [0.5, 0.5, 0.0]]}"#);
    let o = run(&["bound", "contraction", "--kernel", k.to_str().unwrap(), "--p", "2", "--oracle", "on"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 1);
    assert!((csv.col("bound")[0] - 0.6164414).abs() < 1e-6);
    assert!((csv.col("exact_l2")[0] - 0.61098529).abs() < 1e-6);
    assert!(csv.col("oracle")[0] <= csv.col("bound")[0] + 1e-9);
    assert_eq!(csv.rows[0][csv.header.iter().position(|h| h == "vacuous").unwrap()], "false");
}

#[test]
fn random_kernel_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert!(run(&["random-kernel", "--m", "4", "--seed", "11", "--out", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = stdout(&run(&["random-kernel", "--m", "4", "--seed", "12"]));
    assert_ne!(std::fs::read_to_string(&a).unwrap(), other);
    let v: serde_json::Value = serde_json::from_str(&other).unwrap();
    for row in v["matrix"].as_array().unwrap() {
        let s: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn seed_from_environment() {
    let flag = stdout(&run(&["random-kernel", "--seed", "5"]));
    let env = bin().env("CONTRACTION_LAB_SEED", "5").args(["random-kernel"]).output().unwrap();
    assert_eq!(flag, stdout(&env));
    assert_ne!(flag, stdout(&run(&["random-kernel"])));
}

#[test]
fn figures_are_deterministic() {
    let a = stdout(&run(&["figure", "interpolation", "--n", "5", "--seed", "3"]));
    let b = stdout(&run(&["--seed", "3", "figure", "--figure", "interpolation", "--n", "5"]));
    assert_eq!(a, b);
    assert!(a.starts_with("kernel,gamma,ours,riesz_thorin\r\n"));
}

#[test]
fn figure_orderings() {
    let stein = figure("stein", &[]);
    assert_eq!(stein.rows.len(), 8 * 40);
    assert_dominated(&stein, "ours", "stein", 1e-12);

    let interp = figure("interpolation", &[]);
    assert_eq!(interp.rows.len(), 100);
    assert!(interp.col("ours").iter().all(|v| *v < 1.0));
    assert!(interp.col("riesz_thorin").iter().all(|v| *v > 1.0));

    let pl = figure("powerlaw", &[]);
    assert_eq!(pl.rows.len(), 99);
    assert_dominated(&pl, "heavy", "lp", 0.0);

    let mc = figure("mcmc", &[]);
    assert_dominated(&mc, "ours", "fan", 0.0);
    let bsc = figure("mcmc", &["--lambda", "0.1", "--t0", "10"]);
    assert_dominated(&bsc, "ours", "fan", 0.0);

    for p in ["0.4", "0.8"] {
        let kb = figure("kl-binary", &["--p", p]);
        assert_dominated(&kb, "actual", "ours", 1e-12);
        assert_dominated(&kb, "ours", "quadratic", 1e-12);
    }

    for n in ["3", "10"] {
        let kg = figure("kl-graph", &["--m", n]);
        assert!(!kg.rows.is_empty());
        assert_dominated(&kg, "ours", "raginsky", 1e-12);
    }

    let path = figure("chi2-path", &[]);
    assert_eq!(path.rows.len(), 101);
    assert_dominated(&path, "ours", "hoeffding", 1e-12);
    for (l, o) in path.col("lambda").iter().zip(path.col("ours")) {
        assert!((o - (5.0 * l * l - 6.0 * l + 2.0)).abs() < 1e-12);
    }

    let conc = figure("concentration", &[]);
    assert_eq!(conc.col("t").first(), Some(&2.0));
    assert_eq!(conc.rows.len(), 99);
    for base in ["paulin", "fan", "marton"] {
        assert_dominated(&conc, "ours_stated", base, 0.0);
    }

    let eta = figure("concentration-eta", &["--t", "20"]);
    assert_eq!(eta.rows.len(), 19);
    assert!(eta.col("eta2_fan").iter().all(|v| *v >= 0.0));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let k = write(dir.path(), "k.json", r#"{"matrix": [[0.2, 0.1, 0.7], [0.3, 0.4, 0.3], [0.5, 0.5, 0.0]]}"#);
    let ks = k.to_str().unwrap();

    // Parse and input errors.
    assert_eq!(run(&["figure", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "contraction", "--kernel", "/nonexistent.json"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"matrix": [[0.5, 0.6], [0.5, 0.5]]}"#);
    let o = run(&["bound", "contraction", "--kernel", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
    assert_eq!(run(&["bound", "contraction", "--kernel", ks, "--psi", "power:0.5"]).status.code(), Some(2));

    // A negative tolerance demands bound ≥ oracle + 1, which must fail.
    let o = run(&["--tol=-1", "bound", "contraction", "--kernel", ks, "--oracle", "on"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stdout.is_empty());

    // Deterministic 2-cycle away from stationarity: the L_4 bound exceeds 1.
    let cyc = write(dir.path(), "cyc.json", r#"{"matrix": [[0, 1], [1, 0]], "mu": [0.9, 0.1]}"#);
    let o = run(&["bound", "contraction", "--kernel", cyc.to_str().unwrap(), "--p", "4"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert!(stdout(&o).contains("true"));
}

#[test]
fn oracle_command_passes() {
    let o = run(&["oracle", "--count", "2", "--seed", "9"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = Csv::parse(&stdout(&o));
    assert!(csv.rows.len() >= 14);
    let pass = csv.header.iter().position(|h| h == "pass").unwrap();
    assert!(csv.rows.iter().all(|r| r[pass] == "true"));
}

#[test]
fn other_bounds() {
    let dir = TempDir::new().unwrap();
    let k = write(dir.path(), "k.json", r#"{"matrix": [[0.2, 0.1, 0.7], [0.3, 0.4, 0.3], [0.5, 0.5, 0.0]]}"#);
    let ks = k.to_str().unwrap();

    for div in ["chi2", "kl", "h:3"] {
        let o = run(&["bound", "sdpi", "--kernel", ks, "--divergence", div, "--oracle", "on"]);
        let c = Csv::parse(&stdout(&o));
        let vacuous = c.col("bound")[0] >= 1.0;
        assert_eq!(o.status.code(), Some(if vacuous { 4 } else { 0 }), "{div}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(c.col("oracle")[0] <= c.col("bound")[0] + 1e-6, "{div}");
    }
    let mu = write(dir.path(), "mu.json", "[0.2, 0.3, 0.5]");
    assert!(run(&["bound", "sdpi", "--kernel", ks, "--mu", mu.to_str().unwrap()]).status.success());

    let o = run(&["bound", "mixing", "--kernel", ks, "--eps", "0.1", "--oracle", "on"]);
    assert!(o.status.success());
    let c = Csv::parse(&stdout(&o));
    assert!(c.col("bound_steps")[0] >= c.col("exact_steps")[0]);

    let scn = write(
        dir.path(),
        "scn.json",
        r#"{"kernel": [[0.55, 0.45], [0.45, 0.55]], "start": [0.5, 0.5], "t": 30, "eta": 0.3, "p": "inf", "trials": 4000}"#,
    );
    let o = run(&["bound", "concentration", "--scenario", scn.to_str().unwrap(), "--sweep"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = Csv::parse(&stdout(&o));
    assert_eq!(c.rows.len(), 30);
    for col in ["mcdiarmid", "binary_sdpi", "doubly_stochastic"] {
        assert_dominated(&c, "wilson_lo", col, 0.0);
    }
    assert!(c.col("mcdiarmid")[29] < 0.2);
    let bad = write(dir.path(), "bad_scn.json", r#"{"kernel": [[1]], "t": 3, "eta": -1}"#);
    assert_eq!(run(&["bound", "concentration", "--scenario", bad.to_str().unwrap()]).status.code(), Some(2));

    let burn = |t: &str| run(&["bound", "burn-in", "--delta", "0.1", "--t", t, "--eta", "0.2", "--lambda", "0.1", "--sup-dev", "50"]);
    assert_eq!(burn("50").status.code(), Some(2));
    let o = burn("500");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = Csv::parse(&stdout(&o));
    assert_eq!(c.col("t0")[0], c.col("t0_real")[0].ceil());
    assert!(c.col("t0")[0] > 0.0);
}
