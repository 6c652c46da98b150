use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lpp-lab");

fn run_in(dir: &Path, args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.current_dir(dir).args(args).env_remove("LPP_LAB_SEED");
    if let Some(s) = env_seed {
        cmd.env("LPP_LAB_SEED", s);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SUBCOMMANDS: &[&str] = &[
    "shape",
    "p2p",
    "exit-tail",
    "upper-tail",
    "lower-tail",
    "variance",
    "coupling-check",
    "burke-check",
    "oracle-check",
    "fit",
];

#[test]
fn help_on_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in SUBCOMMANDS {
        let o = run_in(dir.path(), &[sub, "--help"], None);
        assert!(o.status.success(), "{sub} --help");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}

#[test]
fn oracle_check_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["oracle-check", "--seed", "7"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "oracle: 1000/1000 exact"), "{out}");
    assert!(out.contains("#summary check=oracle status=pass"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run_in(p, &["exit-tail", "--n", "64"], None).status.code(), Some(2));
    assert_eq!(run_in(p, &["exit-tail", "--bogus"], None).status.code(), Some(2));
    assert_eq!(run_in(p, &["shape", "--n", "100", "--rho", "1.5"], None).status.code(), Some(2));
    let args = ["exit-tail", "--n", "64", "--replicates", "10", "--thresholds", "2:1:0.5"];
    assert_eq!(run_in(p, &args, None).status.code(), Some(2));
    assert_eq!(run_in(p, &["oracle-check", "--threads", "0"], None).status.code(), Some(2));
    fs::write(p.join("bad.cfg"), "rho=0.5\nunknown=1\n").unwrap();
    let o = run_in(p, &["shape", "--n", "100", "--config", "bad.cfg"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
}

#[test]
fn unwritable_out_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing/dir/x.csv");
    let o = run_in(dir.path(), &["oracle-check", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn flags_override_config_and_config_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("run.cfg"),
        "# tiny run\nrho=0.3\nn=64\nreplicates=50\nthresholds=0.5:1.0:0.5\nseed=5\nbootstrap=0\n",
    )
    .unwrap();
    let o = run_in(p, &["upper-tail", "--config", "run.cfg", "--n", "32"], Some("99"));
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.contains("#meta rho=0.3\n"));
    assert!(csv.contains("#meta N=32\n"));
    assert!(csv.contains("#meta seed=5\n"));

    fs::write(p.join("noseed.cfg"), "n=32\nreplicates=50\nthresholds=0.5:1.0:0.5\n").unwrap();
    let o = run_in(p, &["upper-tail", "--config", "noseed.cfg", "--bootstrap", "0"], Some("99"));
    assert!(stdout(&o).contains("#meta seed=99\n"));
    let o = run_in(p, &["upper-tail", "--config", "noseed.cfg", "--bootstrap", "0"], None);
    assert!(stdout(&o).contains("#meta seed=0\n"));
}

#[test]
fn experiment_writes_only_out_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = ["exit-tail", "--n", "64", "--replicates", "400", "--thresholds", "0.25:1.25:0.25", "--seed", "42"];
    let run = |name: &str, threads: &str| {
        let mut a = args.to_vec();
        a.extend(["--out", name, "--threads", threads]);
        let o = run_in(p, &a, None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        fs::read(p.join(name)).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "2");
    assert_eq!(a, b);
    let mut entries: Vec<String> =
        fs::read_dir(p).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    entries.sort();
    assert_eq!(entries, ["a.csv", "b.csv"]);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("threshold,n_samples,n_exceed,p_hat,ci_lo,ci_hi\n"));
    assert!(text.contains("#meta kind=exit_tail\n"));
}

#[test]
fn fit_replaces_fit_comments() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut csv = String::from("#meta kind=upper_tail\nthreshold,n_samples,n_exceed,p_hat,ci_lo,ci_hi\n");
    for i in 1..=8 {
        let y = 0.5 * i as f64;
        let k = (100000.0 * (-0.3 * y * y * y).exp()).round() as u64;
        csv.push_str(&format!("{y},100000,{k},{},0,1\n", k as f64 / 1e5));
    }
    csv.push_str("#fit kappa_hat=1 c_hat=1 logC_hat=0 window=[0,1] rss=0\n");
    fs::write(p.join("t.csv"), &csv).unwrap();
    let o = run_in(p, &["fit", "t.csv", "--window", "1.0:3.5", "--candidates", "1.5,3"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(p.join("t.csv")).unwrap();
    let fits: Vec<&str> = text.lines().filter(|l| l.starts_with("#fit ")).collect();
    assert_eq!(fits.len(), 1);
    let kappa: f64 = fits[0].split_whitespace().find_map(|kv| kv.strip_prefix("kappa_hat=")).unwrap().parse().unwrap();
    assert!((kappa - 3.0).abs() < 0.1, "{kappa}");
    assert_eq!(text.lines().filter(|l| l.starts_with("#model ")).count(), 2);
    assert!(text.starts_with("#meta kind=upper_tail\nthreshold"));
}

#[test]
fn shape_prints_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["shape", "--rho", "0.5", "--n", "100", "--x", "-3", "--t", "2"], None);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("v_N=25,25"));
    assert!(out.contains("f(v_N)=100\n"));
    assert!(out.contains("g(-3)=6\n"));
    assert!(out.contains("remainder_axis(-3)="));
    assert!(out.contains("remainder_antidiagonal(2)="));
}

#[test]
fn p2p_passage_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["p2p", "--to", "0,0", "--seed", "1"], None);
    let out = stdout(&o);
    let g: f64 = out.trim().rsplit("G=").next().unwrap().parse().unwrap();
    assert!(g > 0.0);
    let o = run_in(dir.path(), &["p2p", "--n", "400", "--seed", "1"], None);
    let out = stdout(&o);
    assert!(out.contains("to=100,100"));
    let g: f64 = out.trim().rsplit("G=").next().unwrap().parse().unwrap();
    assert!((g / 400.0 - 1.0).abs() < 0.2, "{g}");
}

#[test]
fn check_commands_write_summary_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.txt");
    let o = run_in(
        dir.path(),
        &["coupling-check", "--n", "10", "--replicates", "20", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.contains("#summary check=coupling status=pass"));
    assert!(text.contains("equal=20"));
}

#[test]
fn variance_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["variance", "--n", "16,64", "--replicates", "200", "--seed", "2"], None);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("N,n_samples,variance,variance_se,control_variance,control_variance_se\n"));
    assert!(out.contains("#slope stat=passage"));
    assert_eq!(run_in(dir.path(), &["variance", "--n", "16,32", "--replicates", "20"], None).status.code(), Some(2));
}
