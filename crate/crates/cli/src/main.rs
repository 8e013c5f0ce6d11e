mod output;
mod parse;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::anyhow;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use ou_weyl::bounds::{bbg_alpha, closed_form_bound, exp_zl_bound, nelson_threshold, SchurReport};
use ou_weyl::checks::{run_suite, Suite};
use ou_weyl::plane_map::{
    sample_region, theta_p, z_to_s, ComplexTime, ExponentConfig, Region, RegionSample,
    WeylParameter, Window,
};
use ou_weyl::probe::{default_lambda_grid, ratio_probe, OperatorSpec, RatioReport};
use ou_weyl::report::serialize_f64;

use output::{write_atomic, RunManifest};
use parse::Alpha;

#[derive(Parser, Debug)]
#[command(
    name = "ou-weyl",
    version,
    about = "Boundedness regions and bounds for Ornstein-Uhlenbeck and Weyl-Gaussian operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a region of the complex plane to CSV or SVG.
    Region(RegionArgs),
    /// Closed-form Schur bound for one parameter point.
    Bound(BoundArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Trial-function ratio probe against the closed-form bound.
    Probe(ProbeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RegionKind {
    Epperson,
    Sector,
    Rp,
    ThmMain,
    Epq,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Overlay {
    Sector,
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    #[arg(long, value_enum)]
    region: RegionKind,
    #[arg(long, value_parser = parse::real)]
    p: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    q: Option<f64>,
    #[arg(long, value_parser = parse::real, default_value = "1")]
    alpha: f64,
    #[arg(long, value_parser = parse::real, default_value = "1")]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Sector half-angle; defaults to theta_p.
    #[arg(long, value_parser = parse::real)]
    theta: Option<f64>,
    /// `x0,x1,y0,y1`; defaults to [0,4]x[-7,7] for z-plane regions and
    /// [0,3]x[-3,3] otherwise.
    #[arg(long, value_parser = parse::window, allow_hyphen_values = true)]
    window: Option<[f64; 4]>,
    #[arg(long, default_value_t = 200)]
    res: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the extension of `--out`, else csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    overlay: Option<Overlay>,
}

#[derive(Args, Debug, Serialize)]
struct ExponentArgs {
    #[arg(long, value_parser = parse::real)]
    p: f64,
    #[arg(long, value_parser = parse::real)]
    q: f64,
    /// A number, or `auto-bbg` for (1 + e^{-2t})/p (needs --t).
    #[arg(long, value_parser = parse::alpha, default_value = "1")]
    #[serde(serialize_with = "alpha_str")]
    alpha: Alpha,
    #[arg(long, value_parser = parse::real, default_value = "1")]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
}

fn alpha_str<S: serde::Serializer>(a: &Alpha, s: S) -> Result<S::Ok, S::Error> {
    match a {
        Alpha::Value(v) => s.serialize_f64(*v),
        Alpha::AutoBbg => s.serialize_str("auto-bbg"),
    }
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("point").required(true).args(["s", "z", "t"])))]
struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    exp: ExponentArgs,
    /// Weyl parameter `re,im`.
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    s: Option<Complex64>,
    /// Semigroup time `re,im`.
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    z: Option<Complex64>,
    /// Real semigroup time.
    #[arg(long, value_parser = parse::real)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = |s: &str| s.parse::<Suite>().map_err(|e| e.to_string()))]
    suite: Suite,
    /// Replaces every per-check tolerance.
    #[arg(long, value_parser = parse::real)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("point").required(true).args(["s", "z", "t", "nelson"])))]
struct ProbeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    exp: ExponentArgs,
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    s: Option<Complex64>,
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    z: Option<Complex64>,
    #[arg(long, value_parser = parse::real)]
    t: Option<f64>,
    /// Semigroup at t = c * t*, with t* the hypercontractivity time of (p, q).
    #[arg(long, value_parser = parse::real)]
    nelson: Option<f64>,
    /// `lo,hi`: uniform lambda grid instead of the default edge-refined one.
    #[arg(long, value_parser = parse::interval, allow_hyphen_values = true)]
    lambda_window: Option<[f64; 2]>,
    #[arg(long, default_value_t = 200)]
    lambda_points: usize,
    /// Edge-to-zero ratio above which a blow-up is flagged.
    #[arg(long, value_parser = parse::real, default_value = "10")]
    blowup_factor: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure together with its exit code.
enum Failure {
    Usage(anyhow::Error),
    Verification(String),
    Numeric(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) | Failure::Numeric(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<ou_weyl::Error> for Failure {
    fn from(e: ou_weyl::Error) -> Self {
        use ou_weyl::Error as E;
        match e {
            E::NotIntegrable(_) | E::NonConvergence(_) => Failure::Numeric(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("WEYL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "WEYL_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(e.into()))
}

fn parameters<T: Serialize>(args: &T) -> BTreeMap<String, String> {
    let value = serde_json::to_value(args).unwrap_or_default();
    value
        .as_object()
        .into_iter()
        .flatten()
        .filter(|(_, v)| !v.is_null())
        .map(|(k, v)| {
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            (k.clone(), text)
        })
        .collect()
}

/// Sends `body` to `out` (atomically, with a manifest) or to stdout.
fn emit<T: Serialize>(
    command: &str,
    args: &T,
    out: Option<&PathBuf>,
    body: &[u8],
    start: Instant,
) -> Outcome {
    match out {
        Some(path) => {
            write_atomic(path, body).map_err(Failure::Io)?;
            let mut manifest = RunManifest::new(command, parameters(args));
            manifest.outputs.push(path.clone());
            manifest.write(start.elapsed()).map_err(Failure::Io)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(e.into()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut json = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.into()))?;
    json.push('\n');
    Ok(json.into_bytes())
}

fn exponent_config(e: &ExponentArgs, t: Option<f64>) -> Result<ExponentConfig, Failure> {
    let alpha = match e.alpha {
        Alpha::Value(a) => a,
        Alpha::AutoBbg => {
            let t = t.ok_or_else(|| usage("--alpha auto-bbg needs --t"))?;
            bbg_alpha(e.p, t)
        }
    };
    Ok(ExponentConfig::new(e.p, e.q, alpha, e.beta, e.d)?)
}

#[derive(Serialize)]
struct RegionSummary {
    region: String,
    member_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlay: Option<OverlaySummary>,
}

#[derive(Serialize)]
struct OverlaySummary {
    region: String,
    member_fraction: f64,
    contained: bool,
}

fn cmd_region(args: &RegionArgs, start: Instant) -> Outcome {
    let need_p = || args.p.ok_or_else(|| usage("this region needs --p"));
    let region = match args.region {
        RegionKind::Epperson => Region::Epperson { p: need_p()? },
        RegionKind::Sector => Region::Sector {
            theta: match args.theta {
                Some(t) => t,
                None => theta_p(need_p()?),
            },
        },
        RegionKind::Rp => Region::Rp { p: need_p()? },
        RegionKind::ThmMain => Region::TheoremMain {
            cfg: ExponentConfig::new(
                need_p()?,
                args.q.ok_or_else(|| usage("this region needs --q"))?,
                args.alpha,
                args.beta,
                args.d,
            )?,
        },
        RegionKind::Epq => Region::Epq {
            p: need_p()?,
            q: args.q.ok_or_else(|| usage("this region needs --q"))?,
        },
    };
    let z_plane = matches!(args.region, RegionKind::Epperson | RegionKind::Epq);
    let [x0, x1, y0, y1] = args.window.unwrap_or(if z_plane {
        [0.0, 4.0, -7.0, 7.0]
    } else {
        [0.0, 3.0, -3.0, 3.0]
    });
    let window = Window::new(x0, x1, y0, y1)?;
    let sample = sample_region(region, window, args.res)?;
    let overlay: Option<RegionSample> = match args.overlay {
        Some(Overlay::Sector) => {
            let theta = match (args.theta, args.p) {
                (Some(t), _) => t,
                (None, Some(p)) => theta_p(p),
                (None, None) => return Err(usage("--overlay sector needs --p or --theta")),
            };
            Some(sample_region(Region::Sector { theta }, window, args.res)?)
        }
        None => None,
    };

    let format = args.format.unwrap_or_else(|| match &args.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) => Format::Svg,
        _ => Format::Csv,
    });
    let body = match format {
        Format::Svg => sample.to_svg(overlay.as_ref()),
        Format::Csv => match &overlay {
            None => sample.to_csv(),
            Some(o) => {
                let mut csv = String::from("re,im,member,overlay\n");
                for (a, b) in sample.points.iter().zip(&o.points) {
                    csv.push_str(&format!("{},{},{},{}\n", a.0, a.1, a.2 as u8, b.2 as u8));
                }
                csv
            }
        },
    };
    emit("region", args, args.out.as_ref(), body.as_bytes(), start)?;

    if args.out.is_some() {
        let summary = RegionSummary {
            region: region.label(),
            member_fraction: sample.member_fraction(),
            overlay: overlay.as_ref().map(|o| OverlaySummary {
                region: o.region.label(),
                member_fraction: o.member_fraction(),
                contained: o.is_subset_of(&sample),
            }),
        };
        emit("region", args, None, &to_json(&summary)?, start)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundOutput {
    #[serde(flatten)]
    report: SchurReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<Complex64>,
    alpha: f64,
    /// Bound for `exp(-zL)` when a time was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    semigroup: Option<SemigroupSummary>,
}

#[derive(Serialize)]
struct SemigroupSummary {
    #[serde(serialize_with = "serialize_f64")]
    bound: f64,
    #[serde(serialize_with = "serialize_f64")]
    direct: f64,
    agreement: f64,
}

fn cmd_bound(args: &BoundArgs, start: Instant) -> Outcome {
    if matches!(args.exp.alpha, Alpha::AutoBbg) && args.t.is_none() {
        return Err(usage("--alpha auto-bbg needs --t"));
    }
    let cfg = exponent_config(&args.exp, args.t)?;
    let z = args.z.or(args.t.map(|t| Complex64::new(t, 0.0)));
    let out = match (args.s, z) {
        (Some(s), None) => BoundOutput {
            report: closed_form_bound(&WeylParameter::new(s)?, &cfg),
            s: None,
            z: None,
            alpha: cfg.alpha,
            semigroup: None,
        },
        (None, Some(z)) => {
            let b = exp_zl_bound(ComplexTime::new(z)?, &cfg)?;
            BoundOutput {
                s: Some(b.s.s),
                z: Some(z),
                alpha: cfg.alpha,
                semigroup: Some(SemigroupSummary {
                    bound: b.chained,
                    direct: b.direct,
                    agreement: b.agreement,
                }),
                report: b.schur,
            }
        }
        _ => return Err(usage("give exactly one of --s, --z, --t")),
    };
    emit("bound", args, args.out.as_ref(), &to_json(&out)?, start)
}

fn cmd_verify(args: &VerifyArgs, start: Instant) -> Outcome {
    let report = run_suite(args.suite, args.tol)?;
    for c in &report.checks {
        eprintln!(
            "{} {}: measured {:.3e}, tol {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tol
        );
    }
    emit("verify", args, args.out.as_ref(), &to_json(&report)?, start)?;
    if report.pass {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.pass).count();
        Err(Failure::Verification(format!("{failed} check(s) failed")))
    }
}

#[derive(Serialize)]
struct ProbeOutput {
    #[serde(flatten)]
    report: RatioReport,
    exceeds_bound: bool,
    blow_up: bool,
    blowup_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    nelson_time: Option<f64>,
}

fn cmd_probe(args: &ProbeArgs, start: Instant) -> Outcome {
    let nelson_time = match args.nelson {
        Some(c) => Some(c * nelson_threshold(args.exp.p, args.exp.q)?),
        None => None,
    };
    let t = args.t.or(nelson_time);
    let cfg = exponent_config(&args.exp, t)?;
    let op = match (args.s, args.z, t) {
        (Some(s), None, None) => OperatorSpec::Weyl { s },
        (None, Some(z), None) => OperatorSpec::Semigroup { z },
        (None, None, Some(t)) => OperatorSpec::Semigroup {
            z: Complex64::new(t, 0.0),
        },
        _ => return Err(usage("give exactly one of --s, --z, --t, --nelson")),
    };
    if let OperatorSpec::Semigroup { z } = op {
        // surfaces an out-of-domain time as a usage error before probing
        z_to_s(ComplexTime::new(z)?)?;
    }
    let grid = match args.lambda_window {
        Some([lo, hi]) => {
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || args.lambda_points < 2 {
                return Err(usage(
                    "--lambda-window needs lo < hi and --lambda-points >= 2",
                ));
            }
            let n = args.lambda_points;
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect()
        }
        None => default_lambda_grid(&cfg),
    };
    let report = ratio_probe(op, &cfg, &grid)?;
    let out = ProbeOutput {
        exceeds_bound: report.exceeds_bound(),
        blow_up: report.blows_up(args.blowup_factor),
        blowup_factor: args.blowup_factor,
        nelson_time,
        report,
    };
    emit("probe", args, args.out.as_ref(), &to_json(&out)?, start)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Region(a) => cmd_region(a, start),
        Command::Bound(a) => cmd_bound(a, start),
        Command::Verify(a) => cmd_verify(a, start),
        Command::Probe(a) => cmd_probe(a, start),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) => eprintln!("error: {e:#}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Numeric(e) => eprintln!("numerical failure: {e:#}"),
                Failure::Io(e) => eprintln!("i/o error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
