use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use anyhow::Context;
use lpp_core::coupling::{
    build_coupled_pair, burke_increment_test, coupled_exit_equality, largest_characteristic_n, verify_equality,
    EXACT_TOLERANCE,
};
use lpp_core::environment::build_bulk;
use lpp_core::montecarlo::{
    fit_exponent, parse_tail_csv, render_fit_lines, run_tail, run_variance_scaling, with_threads, ExperimentKind,
    ExperimentSpec, FitOptions, VarianceSpec,
};
use lpp_core::passage::{backtrack_geodesic, brute_force_passage, forward_table, passage_point_to_point};
use lpp_core::shape::{shape_f, shape_g, shape_h, taylor_remainder_antidiagonal, taylor_remainder_axis};
use lpp_core::{CharacteristicSpec, Density, Point, Seed, Window};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{parse_grid, parse_interval, parse_list, Settings};
use crate::{CheckArgs, CliError, Common, TailArgs};

type Flags<'a> = Vec<(&'a str, Option<String>)>;

const CHECK_ALPHA: f64 = 0.01;

fn settings(common: &Common, mut flags: Flags<'_>) -> Result<Settings, CliError> {
    flags.push(("seed", common.seed.clone()));
    flags.push(("out", common.out.as_ref().map(|p| p.display().to_string())));
    flags.push(("threads", common.threads.clone()));
    Settings::load(common.config.as_deref(), flags)
}

/// Destination of a command's text output, checked for writability up front.
struct Sink(Option<PathBuf>);

impl Sink {
    fn open(path: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(p) = &path {
            OpenOptions::new()
                .write(true)
                .create(true)
                .truncate(false)
                .open(p)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(Sink(path))
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.0 {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn rho(s: &Settings) -> Result<Density, CliError> {
    Ok(Density::new(s.get_or("rho", 0.5)?)?)
}

fn in_pool<T: Send>(s: &Settings, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError> {
    with_threads(s.threads()?, f)?
}

pub fn shape(common: Common, flags: Flags<'_>) -> Result<(), CliError> {
    let s = settings(&common, flags)?;
    let sink = Sink::open(s.out())?;
    let rho = rho(&s)?;
    let spec = CharacteristicSpec::new(rho, s.require("n")?)?;
    let (ex, ey) = spec.exact();
    let mut out = String::new();
    writeln!(out, "rho={} N={}", rho, spec.n).unwrap();
    writeln!(out, "v_N={},{} v_N_exact={ex},{ey}", spec.v_n.x, spec.v_n.y).unwrap();
    writeln!(out, "f(v_N)={}", shape_f(spec.v_n)?).unwrap();
    if let Some(x) = s.get::<f64>("x")? {
        writeln!(out, "g({x})={}", shape_g(x, rho)).unwrap();
        writeln!(out, "h({x})={}", shape_h(x, rho)).unwrap();
        writeln!(out, "remainder_axis({x})={}", taylor_remainder_axis(x, &spec)?).unwrap();
    }
    if let Some(t) = s.get::<f64>("t")? {
        writeln!(out, "remainder_antidiagonal({t})={}", taylor_remainder_antidiagonal(t, spec.n)?).unwrap();
    }
    sink.emit(&out)
}

pub fn p2p(common: Common, flags: Flags<'_>) -> Result<(), CliError> {
    let s = settings(&common, flags)?;
    let sink = Sink::open(s.out())?;
    let target = match s.raw("to") {
        Some(v) => match parse_list::<i64>(v, "coordinate")?[..] {
            [x, y] => Point::new(x, y),
            _ => return Err(CliError::Usage(format!("--to expects X,Y, got '{v}'"))),
        },
        None => CharacteristicSpec::new(rho(&s)?, s.require("n")?)?.v_n,
    };
    let seed = Seed::new(s.seed()?, "p2p", 0);
    let field = build_bulk(Window::from_origin(target)?, &seed)?;
    let g = passage_point_to_point(&field, Point::ORIGIN, target)?.expect("target dominates the origin");
    sink.emit(&format!("from=0,0 to={},{} seed={} G={g}\n", target.x, target.y, seed.base_seed))
}

fn fit_options(s: &Settings, bootstrap_default: usize) -> Result<FitOptions, CliError> {
    let mut options =
        FitOptions { bootstrap_resamples: s.get_or("bootstrap", bootstrap_default)?, ..Default::default() };
    if let Some(w) = s.raw("window") {
        options.window = Some(parse_interval(w)?);
    }
    if let Some(c) = s.raw("candidates") {
        options.candidates = parse_list(c, "candidate")?;
    }
    Ok(options)
}

pub fn tail(kind: ExperimentKind, a: TailArgs) -> Result<(), CliError> {
    let flags = vec![
        ("rho", a.rho),
        ("n", a.n),
        ("replicates", a.replicates),
        ("thresholds", a.thresholds),
        ("window", a.window),
        ("candidates", a.candidates),
        ("bootstrap", a.bootstrap),
    ];
    let s = settings(&a.common, flags)?;
    let sink = Sink::open(s.out())?;
    let spec = ExperimentSpec {
        kind,
        rho: rho(&s)?,
        n: s.require("n")?,
        thresholds: parse_grid(&s.require::<String>("thresholds")?)?,
        replicates: s.require("replicates")?,
        base_seed: s.seed()?,
    };
    let options = fit_options(&s, FitOptions::default().bootstrap_resamples)?;
    let experiment = in_pool(&s, || Ok(run_tail(&spec, &options)?))?;
    sink.emit(&experiment.to_csv())
}

pub fn variance(common: Common, flags: Flags<'_>) -> Result<(), CliError> {
    let s = settings(&common, flags)?;
    let sink = Sink::open(s.out())?;
    let spec = VarianceSpec {
        rho: rho(&s)?,
        ns: parse_list(&s.require::<String>("n")?, "N")?,
        replicates: s.require("replicates")?,
        base_seed: s.seed()?,
    };
    let table = in_pool(&s, || Ok(run_variance_scaling(&spec)?))?;
    sink.emit(&table.to_csv())
}

/// Print the report, then fail if the check did not hold.
fn finish(sink: &Sink, report: String, passed: bool, what: &str) -> Result<(), CliError> {
    sink.emit(&report)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed(what.to_string()))
    }
}

pub fn coupling_check(a: CheckArgs) -> Result<(), CliError> {
    let s = settings(&a.common, vec![("rho", a.rho), ("n", a.n), ("replicates", a.replicates)])?;
    let sink = Sink::open(s.out())?;
    let rho = rho(&s)?;
    let n: u64 = s.get_or("n", 20)?;
    let replicates: u64 = s.get_or("replicates", 100)?;
    let base = s.seed()?;
    let big_n = largest_characteristic_n(rho, n)
        .ok_or_else(|| CliError::Usage(format!("no characteristic point fits in [0, {n}]^2")))?;
    let spec = CharacteristicSpec::new(rho, big_n)?;

    let results: Vec<(f64, bool, bool)> = in_pool(&s, || {
        (0..replicates)
            .into_par_iter()
            .map(|i| {
                let pair = build_coupled_pair(n, rho, &Seed::new(base, "coupling", i))?;
                let eq = verify_equality(&pair)?;
                let exit = coupled_exit_equality(&pair, &spec)?;
                Ok((eq.max_rel_discrepancy, eq.holds(EXACT_TOLERANCE), exit.equal()))
            })
            .collect::<Result<_, CliError>>()
    })?;
    let eq_ok = results.iter().filter(|r| r.1).count();
    let exit_ok = results.iter().filter(|r| r.2).count();
    let max_rel = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let total = results.len();
    let passed = eq_ok == total && exit_ok == total;
    let mut out = String::new();
    writeln!(out, "coupling: {eq_ok}/{total} windows equal (max relative error {max_rel:e})").unwrap();
    writeln!(out, "exit: {exit_ok}/{total} realizations with Z = q_N at N={big_n}").unwrap();
    writeln!(
        out,
        "#summary check=coupling status={} rho={rho} n={n} N={big_n} seed={base} windows={total} equal={eq_ok} \
         exit_equal={exit_ok} max_rel={max_rel:e}",
        status(passed)
    )
    .unwrap();
    finish(&sink, out, passed, "coupling")
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

pub fn burke_check(a: CheckArgs) -> Result<(), CliError> {
    let s = settings(&a.common, vec![("rho", a.rho), ("n", a.n), ("replicates", a.replicates)])?;
    let sink = Sink::open(s.out())?;
    let rho = rho(&s)?;
    let n: u64 = s.get_or("n", 64)?;
    let replicates: u64 = s.get_or("replicates", 1000)?;
    let base = s.seed()?;
    let r = in_pool(&s, || Ok(burke_increment_test(rho, n, replicates, &Seed::new(base, "burke", 0))?))?;
    // At rho = 1/2 both marginals coincide and the control carries no information.
    let control_applies = rho.get() != 0.5;
    let control_rejects = r.control_p_value < CHECK_ALPHA;
    let passed = r.passes(CHECK_ALPHA) && (!control_applies || control_rejects);
    let mut out = String::new();
    writeln!(out, "burke: x-axis KS p={} mean={}±{}", r.x_p_value, r.x_mean, r.x_std_error).unwrap();
    writeln!(out, "burke: y-axis KS p={} mean={}±{}", r.y_p_value, r.y_mean, r.y_std_error).unwrap();
    if control_applies {
        writeln!(
            out,
            "burke: negative control p={} ({})",
            r.control_p_value,
            if control_rejects { "rejects" } else { "does not reject" }
        )
        .unwrap();
    }
    writeln!(
        out,
        "#summary check=burke status={} rho={rho} n={n} replicates={replicates} seed={base} samples_per_axis={} \
         x_p={} y_p={} control_p={}",
        status(passed),
        r.samples_per_axis,
        r.x_p_value,
        r.y_p_value,
        r.control_p_value
    )
    .unwrap();
    finish(&sink, out, passed, "burke")
}

/// One random instance: a bulk field of at most 6x6 sites, checked on the
/// full window and on a random sub-rectangle, plus the geodesic weight.
fn oracle_instance(base: u64, i: u64) -> Result<f64, CliError> {
    let seed = Seed::new(base, "oracle", i);
    let mut rng = seed.derive("shape").rng();
    let (w, h) = (rng.random_range(1..=6i64), rng.random_range(1..=6i64));
    let field = build_bulk(Window::from_origin(Point::new(w - 1, h - 1))?, &seed)?;
    let mut sorted = |m: i64| {
        let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
        (a.min(b), a.max(b))
    };
    let ((x0, x1), (y0, y1)) = (sorted(w), sorted(h));
    let mut worst = 0.0f64;
    for (u, v) in [(Point::ORIGIN, Point::new(w - 1, h - 1)), (Point::new(x0, y0), Point::new(x1, y1))] {
        let dp = passage_point_to_point(&field, u, v)?.expect("u <= v");
        let bf = brute_force_passage(&field, u, v)?.expect("u <= v");
        let table = forward_table(&field, u, v)?;
        let path = backtrack_geodesic(&table, v)?;
        let along = path.weight(&field);
        for value in [dp, along] {
            worst = worst.max((value - bf).abs() / bf.abs());
        }
    }
    Ok(worst)
}

pub fn oracle_check(common: Common, flags: Flags<'_>) -> Result<(), CliError> {
    let s = settings(&common, flags)?;
    let sink = Sink::open(s.out())?;
    let replicates: u64 = s.get_or("replicates", 1000)?;
    let base = s.seed()?;
    let errors: Vec<f64> = in_pool(&s, || (0..replicates).into_par_iter().map(|i| oracle_instance(base, i)).collect())?;
    let exact = errors.iter().filter(|e| **e <= EXACT_TOLERANCE).count();
    let max_rel = errors.iter().copied().fold(0.0, f64::max);
    let passed = exact == errors.len();
    let mut out = String::new();
    writeln!(out, "oracle: {exact}/{} exact", errors.len()).unwrap();
    writeln!(
        out,
        "#summary check=oracle status={} seed={base} instances={} exact={exact} max_rel={max_rel:e}",
        status(passed),
        errors.len()
    )
    .unwrap();
    finish(&sink, out, passed, "oracle")
}

fn is_fit_line(line: &str) -> bool {
    ["#fit ", "#fit-ci ", "#fit-error ", "#model "].iter().any(|p| line.starts_with(p))
}

/// Replace the fit comments of a tail CSV, in place unless `--out` is given.
pub fn fit(input: PathBuf, common: Common, flags: Flags<'_>) -> Result<(), CliError> {
    let s = settings(&common, flags)?;
    let target = s.out().unwrap_or_else(|| input.clone());
    let text = read(&input)?;
    let sink = Sink::open(Some(target))?;
    let parsed = parse_tail_csv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let options = FitOptions { bootstrap_resamples: 0, ..fit_options(&s, 0)? };
    let fit = fit_exponent(&parsed.rows, &options).map_err(|e| e.to_string());
    let mut out: String = text.lines().filter(|l| !is_fit_line(l)).flat_map(|l| [l, "\n"]).collect();
    for line in render_fit_lines(&fit) {
        writeln!(out, "{line}").unwrap();
    }
    sink.emit(&out)?;
    if let Err(reason) = fit {
        eprintln!("warning: fit failed: {reason}");
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}
