//! `begwg`: evaluate, simulate and fit the bivariate EGWG model from the
//! command line.
//!
//! Data go to standard output, diagnostics to standard error. Exit codes:
//! 0 success, 2 usage or domain error, 3 numerical failure (including a fit
//! that did not converge, whose result is still printed).

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use begwg::dataio::{load_csv, nfl_dataset, nfl_meta, write_csv};
use begwg::estimation::{classify, fit_mle, log_likelihood, reference, FitOptions, FitResult, PairedSample};
use begwg::moments::{raw_moment_quadrature, raw_moment_series, raw_moment_survival_series};
use begwg::reliability::{
    hazard_gradient, joint_survival, mean_waiting_time_joint, reversed_hazard,
};
use begwg::{Baseline, BegwgParams, Component, Error, SeriesControl};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "begwg", version, about = "Bivariate exponentiated generalized Weibull-Gompertz model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a quantity over a grid of points.
    Eval(EvalArgs),
    /// Raw moments of a marginal.
    Moments(MomentArgs),
    /// Draw pairs from the model.
    Simulate(SimulateArgs),
    /// Fit the shapes to a CSV of pairs.
    Fit(FitArgs),
    /// Fit the bundled football data and compare with the published table.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Clone, Copy)]
struct BaseArgs {
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    d: f64,
}

impl BaseArgs {
    fn baseline(&self) -> Result<Baseline, Error> {
        Baseline::new(self.a, self.b, self.c, self.d)
    }
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[command(flatten)]
    base: BaseArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha1: f64,
    #[arg(long, allow_negative_numbers = true)]
    alpha2: f64,
    #[arg(long, allow_negative_numbers = true)]
    alpha3: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<BegwgParams, Error> {
        BegwgParams::from_baseline(self.base.baseline()?, [self.alpha1, self.alpha2, self.alpha3])
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Cdf,
    Pdf,
    Survival,
    HazardGradient,
    ReversedHazard,
    Mwt,
    MinCdf,
    MaxCdf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum)]
    quantity: Quantity,
    /// Grid for the first coordinate (or `t`), as `start:stop:steps`.
    #[arg(long)]
    x1: String,
    /// Grid for the second coordinate; defaults to the first grid.
    #[arg(long)]
    x2: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MomentArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Coordinate, 1 or 2.
    #[arg(long, default_value_t = 1)]
    which: usize,
    /// Moment order.
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with header `x1,x2`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    base: BaseArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tie_tol: f64,
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    level: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<Vec<u8>, (Failure, Vec<u8>)>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eval(a) => wrap(eval(&a)),
        Command::Moments(a) => wrap(moments(&a)),
        Command::Simulate(a) => wrap(simulate(&a)),
        Command::Fit(a) => fit(&a),
        Command::Reproduce(a) => reproduce(&a),
    };
    let (out, failure) = match outcome {
        Ok(out) => (out, None),
        Err((f, out)) => (out, Some(f)),
    };
    let mut stdout = BufWriter::new(io::stdout().lock());
    if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Some(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn wrap(r: Result<Vec<u8>, Failure>) -> Outcome {
    r.map_err(|f| (f, Vec::new()))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("grid `{spec}` must be `start:stop:steps`"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i == steps - 1 { stop } else { start + h * i as f64 }).collect())
}

struct EvalRow {
    x1: f64,
    x2: Option<f64>,
    values: Vec<(String, f64)>,
    region: Option<String>,
}

fn eval(args: &EvalArgs) -> Result<Vec<u8>, Failure> {
    let p = args.params.params()?;
    let g1 = parse_grid(&args.x1)?;
    let one_dimensional = matches!(args.quantity, Quantity::MinCdf | Quantity::MaxCdf);
    let g2 = match (&args.x2, one_dimensional) {
        (Some(_), true) => return Err(Failure::Usage("this quantity takes a single grid (--x1)".into())),
        (Some(s), false) => parse_grid(s)?,
        (None, _) => g1.clone(),
    };
    let mut rows = Vec::new();
    if one_dimensional {
        for &t in &g1 {
            let v = match args.quantity {
                Quantity::MinCdf => p.min_cdf(t)?,
                _ => p.max_cdf(t)?,
            };
            rows.push(EvalRow { x1: t, x2: None, values: vec![("value".into(), v)], region: None });
        }
    } else {
        for &x1 in &g1 {
            for &x2 in &g2 {
                let (values, region) = match args.quantity {
                    Quantity::Cdf => (vec![("value".into(), p.joint_cdf(x1, x2)?)], None),
                    Quantity::Survival => (vec![("value".into(), joint_survival(&p, x1, x2)?)], None),
                    Quantity::Pdf => {
                        let (v, r) = p.joint_pdf(x1, x2)?;
                        (vec![("value".into(), v)], Some(r))
                    }
                    Quantity::ReversedHazard => {
                        let (v, r) = reversed_hazard(&p, x1, x2)?;
                        (vec![("value".into(), v)], Some(r))
                    }
                    Quantity::HazardGradient => {
                        let g = hazard_gradient(&p, x1, x2)?;
                        (vec![("g1".into(), g.g1), ("g2".into(), g.g2)], None)
                    }
                    Quantity::Mwt => (vec![("value".into(), mean_waiting_time_joint(&p, x1, x2)?)], None),
                    Quantity::MinCdf | Quantity::MaxCdf => unreachable!(),
                };
                rows.push(EvalRow { x1, x2: Some(x2), values, region: region.map(|r| r.to_string()) });
            }
        }
    }
    let mut out = Vec::new();
    if args.json {
        let objs: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                m.insert("x1".into(), r.x1.into());
                if let Some(x2) = r.x2 {
                    m.insert("x2".into(), x2.into());
                }
                for (k, v) in &r.values {
                    m.insert(k.clone(), (*v).into());
                }
                if let Some(reg) = &r.region {
                    m.insert("region".into(), reg.clone().into());
                }
                serde_json::Value::Object(m)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &objs)?;
        out.push(b'\n');
    } else {
        let first = &rows[0];
        let mut header = vec![if one_dimensional { "t" } else { "x1" }.to_string()];
        if !one_dimensional {
            header.push("x2".into());
        }
        header.extend(first.values.iter().map(|(k, _)| k.clone()));
        if first.region.is_some() {
            header.push("region".into());
        }
        writeln!(out, "{}", header.join(","))?;
        for r in &rows {
            let mut fields = vec![r.x1.to_string()];
            if let Some(x2) = r.x2 {
                fields.push(x2.to_string());
            }
            fields.extend(r.values.iter().map(|(_, v)| v.to_string()));
            if let Some(reg) = &r.region {
                fields.push(reg.clone());
            }
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct MomentReport {
    which: usize,
    r: u32,
    quadrature: f64,
    survival_series: f64,
    survival_series_terms: usize,
    survival_series_converged: bool,
    printed_series: Option<f64>,
    printed_series_converged: bool,
}

fn moments(args: &MomentArgs) -> Result<Vec<u8>, Failure> {
    let p = args.params.params()?;
    let which = Component::from_index(args.which)?;
    let ctl = SeriesControl::default();
    let q = raw_moment_quadrature(&p, which, args.r)?;
    let s = raw_moment_survival_series(&p, which, args.r, ctl)?;
    let printed = raw_moment_series(&p, which, args.r, ctl);
    let report = MomentReport {
        which: args.which,
        r: args.r,
        quadrature: q,
        survival_series: s.value,
        survival_series_terms: s.terms_used,
        survival_series_converged: s.converged,
        printed_series: printed.value.is_finite().then_some(printed.value),
        printed_series_converged: printed.converged,
    };
    let mut out = Vec::new();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        out.push(b'\n');
    } else {
        writeln!(out, "method,value,terms,converged")?;
        writeln!(out, "quadrature,{},,true", report.quadrature)?;
        writeln!(out, "survival-series,{},{},{}", s.value, s.terms_used, s.converged)?;
        writeln!(out, "printed-series,{},{},{}", printed.value, printed.terms_used, printed.converged)?;
    }
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<Vec<u8>, Failure> {
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let p = args.params.params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pairs = p.sample(&mut rng, args.n)?;
    let s = PairedSample::new(pairs)?;
    let mut out = Vec::new();
    write_csv(&mut out, &s)?;
    let ties = s.pairs().iter().filter(|(a, b)| a == b).count();
    eprintln!("simulated {} pairs, tie fraction {}", s.len(), ties as f64 / s.len() as f64);
    Ok(out)
}

fn render_fit(fit: &FitResult, json: bool) -> Result<Vec<u8>, Failure> {
    let mut out = Vec::new();
    if json {
        serde_json::to_writer_pretty(&mut out, fit)?;
        out.push(b'\n');
        return Ok(out);
    }
    writeln!(out, "counts (n1, n2, n3): {:?}", fit.counts)?;
    for (i, name) in ["alpha1", "alpha2", "alpha3"].iter().enumerate() {
        writeln!(
            out,
            "{name}: {:.6} [{:.6}, {:.6}]",
            fit.alpha_hat[i], fit.ci[i][0], fit.ci[i][1]
        )?;
    }
    writeln!(out, "log-likelihood: {:.6}", fit.log_likelihood)?;
    writeln!(out, "aic: {:.4}", fit.aic)?;
    writeln!(out, "caic: {:.4}", fit.caic)?;
    writeln!(out, "bic (half scale): {:.4}", fit.bic_paper)?;
    writeln!(out, "bic: {:.4}", fit.bic_standard)?;
    writeln!(out, "covariance:")?;
    for row in &fit.covariance {
        writeln!(out, "  {:>14.6e} {:>14.6e} {:>14.6e}", row[0], row[1], row[2])?;
    }
    writeln!(out, "converged: {} after {} iterations", fit.converged, fit.iterations)?;
    Ok(out)
}

fn fit_outcome(fit: FitResult, json: bool) -> Outcome {
    let out = match render_fit(&fit, json) {
        Ok(o) => o,
        Err(f) => return Err((f, Vec::new())),
    };
    if fit.converged {
        Ok(out)
    } else {
        Err((Failure::Numerical(format!("fit did not converge within {} iterations", fit.iterations)), out))
    }
}

fn fit(args: &FitArgs) -> Outcome {
    let run = || -> Result<FitResult, Failure> {
        let s = load_csv(&args.input)?;
        let base = args.base.baseline()?;
        let opts = FitOptions { max_iter: args.max_iter, level: args.level, ..FitOptions::default() };
        Ok(fit_mle(&base, &s, args.tie_tol, &opts)?)
    };
    match run() {
        Ok(fit) => fit_outcome(fit, args.json),
        Err(f) => Err((f, Vec::new())),
    }
}

const NEG_LOG_LIK_SLACK: f64 = 0.5;
const ESTIMATE_BAND: f64 = 0.15;

#[derive(Serialize)]
struct Check {
    name: String,
    computed: f64,
    reported: f64,
    ok: bool,
}

#[derive(Serialize)]
struct Reproduction<'a> {
    dataset: String,
    n: usize,
    baseline: [f64; 4],
    fit: &'a FitResult,
    log_likelihood_at_reported: f64,
    checks: Vec<Check>,
}

fn reproduce(args: &ReproduceArgs) -> Outcome {
    let run = || -> Result<(FitResult, Vec<u8>), Failure> {
        let base = Baseline::new(0.1, 0.2, 0.2, 0.5)?;
        let s = nfl_dataset();
        let meta = nfl_meta();
        let fit = fit_mle(&base, &s, 0.0, &FitOptions::default())?;
        let cls = classify(&s, 0.0);
        let at_reported = log_likelihood(reference::ALPHA_HAT, &base, &cls, &s)?;
        let rep = reference::BEGWGD;

        let mut checks = Vec::new();
        for i in 0..3 {
            let r = reference::ALPHA_HAT[i];
            let c = fit.alpha_hat[i];
            checks.push(Check {
                name: format!("alpha{} within 15%", i + 1),
                computed: c,
                reported: r,
                ok: (c - r).abs() <= ESTIMATE_BAND * r,
            });
        }
        checks.push(Check {
            name: "-L at most reported + 0.5".into(),
            computed: -fit.log_likelihood,
            reported: rep.neg_log_likelihood,
            ok: -fit.log_likelihood <= rep.neg_log_likelihood + NEG_LOG_LIK_SLACK,
        });
        for (name, c, r) in [
            ("aic", fit.aic, rep.aic),
            ("caic", fit.caic, rep.caic),
            ("bic (half scale)", fit.bic_paper, rep.bic),
        ] {
            checks.push(Check { name: format!("{name} at most reported"), computed: c, reported: r, ok: c <= r + 0.01 });
        }
        for i in 0..3 {
            for (k, side) in ["lower", "upper"].iter().enumerate() {
                let c = fit.ci[i][k];
                let r = reference::INTERVALS[i][k];
                checks.push(Check {
                    name: format!("alpha{} 95% {side} bound within 0.05", i + 1),
                    computed: c,
                    reported: r,
                    ok: (c - r).abs() <= 0.05,
                });
            }
        }

        let mut out = Vec::new();
        if args.json {
            let rep = Reproduction {
                dataset: meta.name.clone(),
                n: meta.n,
                baseline: [0.1, 0.2, 0.2, 0.5],
                fit: &fit,
                log_likelihood_at_reported: at_reported,
                checks,
            };
            serde_json::to_writer_pretty(&mut out, &rep)?;
            out.push(b'\n');
            return Ok((fit, out));
        }

        writeln!(out, "dataset: {} (n = {}), counts (n1, n2, n3) = {:?}", meta.name, meta.n, fit.counts)?;
        writeln!(out, "baseline (a, b, c, d) = (0.1, 0.2, 0.2, 0.5), tie tolerance 0")?;
        writeln!(out)?;
        writeln!(
            out,
            "{:<18}{:>10}{:>10}{:>10}{:>10}{:>11}{:>10}{:>10}{:>10}",
            "model", "alpha1", "alpha2", "alpha3", "lambda", "-L", "AIC", "CAIC", "BIC"
        )?;
        writeln!(
            out,
            "{:<18}{:>10.4}{:>10.4}{:>10.4}{:>10}{:>11.2}{:>10.2}{:>10.2}{:>10.2}",
            "BEGWGD (computed)",
            fit.alpha_hat[0],
            fit.alpha_hat[1],
            fit.alpha_hat[2],
            "-",
            -fit.log_likelihood,
            fit.aic,
            fit.caic,
            fit.bic_paper
        )?;
        for row in [reference::BEGWGD, reference::BEGD] {
            let est = |name: &str| {
                row.estimates
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".into())
            };
            writeln!(
                out,
                "{:<18}{:>10}{:>10}{:>10}{:>10}{:>11.2}{:>10.2}{:>10.2}{:>10.2}",
                format!("{} (reported)", row.model),
                est("alpha1"),
                est("alpha2"),
                est("alpha3"),
                est("lambda"),
                row.neg_log_likelihood,
                row.aic,
                row.caic,
                row.bic
            )?;
        }
        writeln!(out)?;
        writeln!(out, "-L at the reported estimates: {:.4}", -at_reported)?;
        writeln!(out, "score at the computed estimates: [{:.3e}, {:.3e}, {:.3e}]", fit.score[0], fit.score[1], fit.score[2])?;
        writeln!(out)?;
        writeln!(out, "covariance (inverse observed information):")?;
        for row in &fit.covariance {
            writeln!(out, "  {:>14.6e} {:>14.6e} {:>14.6e}", row[0], row[1], row[2])?;
        }
        writeln!(out, "reported variances: {:?}", reference::VARIANCES)?;
        writeln!(out)?;
        writeln!(out, "95% intervals (computed | reported):")?;
        for i in 0..3 {
            writeln!(
                out,
                "  alpha{}: [{:.4}, {:.4}] | [{}, {}]",
                i + 1,
                fit.ci[i][0],
                fit.ci[i][1],
                reference::INTERVALS[i][0],
                reference::INTERVALS[i][1]
            )?;
        }
        writeln!(out)?;
        writeln!(out, "checks:")?;
        for c in &checks {
            writeln!(
                out,
                "  [{}] {}: computed {:.4}, reported {:.4}",
                if c.ok { "ok" } else { "OUTSIDE" },
                c.name,
                c.computed,
                c.reported
            )?;
        }
        Ok((fit, out))
    };
    match run() {
        Ok((fit, out)) if fit.converged => Ok(out),
        Ok((fit, out)) => Err((Failure::Numerical(format!("fit did not converge within {} iterations", fit.iterations)), out)),
        Err(f) => Err((f, Vec::new())),
    }
}
