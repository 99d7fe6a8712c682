//! Command-line front end: parse inputs, run lab operations, emit text,
//! CSV, JSON, and optional SVG diagnostics.

mod output;
mod svg;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

use qdlab::error::Error;
use qdlab::families::{
    control_member, efficiency_sweep, shrinking_member, SweepMember, SWEEP_CSV_HEADER,
};
use qdlab::io::{qd_from_json, region_from_json};
use qdlab::limit::{
    choose_inner_radius, detect_thick_scaling, find_concentration_annulus, limit_model_distance,
    mass_condition_check, modulus_bound, s_n_eval, s_n_sup_deviation, ThinModel,
};
use qdlab::orbits::{counting_feasibility, teich_dimension, validate_portrait, CriticalValuesInside};
use qdlab::pushforward::{
    cos_pushforward_density, cos_pushforward_mass, cos_pushforward_mass_wplane,
    efficiency_report, restricted_cos_pushforward_mass, TruncationPolicy,
};
use qdlab::qd::AffineMap;
use qdlab::quadrature::{annulus_log_mass, annulus_modulus, mass_on_region, QuadratureConfig};
use qdlab::RationalQD;

use output::{fmt_g10, OutputSink};

/// Numerical laboratory for rational quadratic differentials and their
/// cosine push-forwards.
#[derive(Debug, Parser)]
#[command(name = "qdlab", version, about)]
struct Cli {
    #[command(flatten)]
    common: CommonOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonOpts {
    /// Relative quadrature tolerance.
    #[arg(long = "tol", global = true, default_value_t = 1e-4)]
    tol: f64,
    /// Maximum quadtree depth.
    #[arg(long = "max-depth", global = true, default_value_t = 24)]
    max_depth: u32,
    /// Cap on the preimage index |k| in truncated sums.
    #[arg(long = "trunc-k", global = true, default_value_t = 64)]
    trunc_k: usize,
    /// Fundamental strip height.
    #[arg(long = "strip-y", global = true, default_value_t = 20.0)]
    strip_y: f64,
    /// Absolute truncation-tail tolerance.
    #[arg(long = "tail-tol", global = true, default_value_t = 1e-6)]
    tail_tol: f64,
    /// Machine-readable JSON output.
    #[arg(long = "json", global = true)]
    json: bool,
    /// Human-readable output (default).
    #[arg(long = "pretty", global = true)]
    pretty: bool,
    /// Write output to a file instead of stdout.
    #[arg(long = "out", global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized suite generation (reserved; defaults to 0).
    #[arg(long = "seed", global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate |q| over a region.
    Mass {
        /// Differential: inline JSON or a path to a JSON file.
        #[arg(long)]
        qd: String,
        /// Region JSON, e.g. '{"type":"annulus","center":[0,0],"r":1,"R":3}'.
        #[arg(long)]
        region: String,
        /// Write an SVG diagnostic (density heatmap + divisor scatter).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Push-forward mass under cosine.
    Push {
        #[arg(long)]
        qd: String,
        /// strip (primary), wplane (cross-check), or both.
        #[arg(long, default_value = "strip")]
        method: String,
        /// Restrict the push-forward to preimages inside this region.
        #[arg(long)]
        region: Option<String>,
        /// Evaluate the push-forward density at a point "re,im" instead of
        /// integrating.
        #[arg(long)]
        at: Option<String>,
    },
    /// Efficiency ratio ||cos_* q|| / ||q||.
    Eff {
        #[arg(long)]
        qd: String,
    },
    /// Family efficiency sweep (CSV).
    Sweep {
        /// Family: ex42 (shrinking cos-symmetric) or control (fixed scale).
        #[arg(long)]
        family: String,
        /// Index range "lo..hi" (inclusive).
        #[arg(long)]
        n: String,
        /// Scale schedule; only "geometric" is defined.
        #[arg(long, default_value = "geometric")]
        schedule: String,
    },
    /// Closed-form annulus quantities.
    Annulus {
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
    },
    /// Limit-model machinery.
    #[command(subcommand)]
    Limit(LimitCommand),
    /// Orbit portrait bookkeeping.
    Portrait {
        #[arg(long)]
        preperiod: u32,
        #[arg(long)]
        period: u32,
        /// Also evaluate the counting table for this many cos-symmetric
        /// poles ("sym,crit").
        #[arg(long)]
        counting: Option<String>,
    },
    /// Certify the mass condition for a disk and a composition of cosine
    /// maps.
    MassCondition(MassConditionArgs),
}

#[derive(Debug, Subcommand)]
enum LimitCommand {
    /// Detect the thick-case scaling from the tightest pole pair.
    Detect {
        #[arg(long)]
        qd: String,
    },
    /// Distance || M^* q - model || between a differential and a limit model.
    Distance {
        #[arg(long)]
        qd: String,
        #[arg(long)]
        model: String,
        /// Scaling "a" as "re,im".
        #[arg(long)]
        a: String,
        /// Scaling "b" as "re,im".
        #[arg(long)]
        b: String,
    },
    /// Evaluate the rescaled cosine S(z) and its boundary deviation.
    Sn {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        z: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Search for a separating annulus of at least the given modulus.
    Concentrate {
        #[arg(long)]
        qd: String,
        #[arg(long)]
        modulus: f64,
    },
    /// Smallest inner radius capturing a 1-delta mass share on an annulus.
    InnerRadius {
        #[arg(long)]
        qd: String,
        #[arg(long)]
        center: String,
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Modulus bound for k iterates at Teichmueller step d0.
    Bound {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0.0)]
        d0: f64,
    },
    /// Certify the mass condition (same as the top-level command).
    MassCondition(MassConditionArgs),
}

#[derive(Debug, Clone, Args)]
struct MassConditionArgs {
    /// Disk center "re,im".
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
    /// Semicolon-separated lambdas, each "re,im".
    #[arg(long)]
    lambdas: String,
    /// Cap on |k| for candidate critical points.
    #[arg(long = "k-window")]
    k_window: Option<i64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qdlab: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Worker-count cap; results are identical for any setting.
fn init_threads() {
    if let Ok(v) = std::env::var("QDLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Inconclusive(_) => 4,
        Error::NoConvergence(_) | Error::TailTooLarge { .. } => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = QuadratureConfig {
        rel_tol: cli.common.tol,
        max_depth: cli.common.max_depth,
        ..Default::default()
    };
    let policy = TruncationPolicy {
        k_max: cli.common.trunc_k,
        strip_y: cli.common.strip_y,
        tail_tol: cli.common.tail_tol,
    };
    cfg.validate()?;
    policy.validate()?;
    let mut sink = OutputSink::new(cli.common.out.clone(), cli.common.json)?;

    match &cli.command {
        Command::Mass { qd, region, svg } => {
            let q = load_qd(qd)?;
            let reg = region_from_json(&load_text(region)?)?;
            let result = mass_on_region(&q, &reg, &cfg)?;
            if let Some(path) = svg {
                svg::write_density_svg(path, &q, &reg)
                    .map_err(|e| Error::InvalidInput(format!("svg: {e}")))?;
            }
            sink.record("mass", &[
                ("value", result.value),
                ("error_estimate", result.error_estimate),
                ("cells", result.cells_evaluated as f64),
            ]);
            sink.pretty(format!(
                "{} ± {}",
                fmt_g10(result.value),
                fmt_g10(result.error_estimate)
            ));
        }
        Command::Push { qd, method, region, at } => {
            let q = load_qd(qd)?;
            if let Some(at) = at {
                let w = parse_complex(at)?;
                let d = cos_pushforward_density(&q, w, &policy)?;
                sink.record("push_density", &[
                    ("re", d.value.re),
                    ("im", d.value.im),
                    ("tail_bound", d.tail_bound),
                    ("k_used", d.k_used as f64),
                ]);
                sink.pretty(format!(
                    "{} + {}i (tail ≤ {}, k = {})",
                    fmt_g10(d.value.re),
                    fmt_g10(d.value.im),
                    fmt_g10(d.tail_bound),
                    d.k_used
                ));
                return sink.finish();
            }
            if let Some(region) = region {
                let reg = region_from_json(&load_text(region)?)?;
                let result = restricted_cos_pushforward_mass(&q, &reg, &cfg, &policy)?;
                sink.record("restricted_push_mass", &[
                    ("value", result.value),
                    ("error_estimate", result.error_estimate),
                ]);
                sink.pretty(format!(
                    "{} ± {}",
                    fmt_g10(result.value),
                    fmt_g10(result.error_estimate)
                ));
                return sink.finish();
            }
            match method.as_str() {
                "strip" => {
                    let r = cos_pushforward_mass(&q, &cfg, &policy)?;
                    sink.record("push_mass_strip", &[
                        ("value", r.value),
                        ("error_estimate", r.error_estimate),
                    ]);
                    sink.pretty(format!("{} ± {}", fmt_g10(r.value), fmt_g10(r.error_estimate)));
                }
                "wplane" => {
                    let r = cos_pushforward_mass_wplane(&q, &cfg, &policy)?;
                    sink.record("push_mass_wplane", &[
                        ("value", r.value),
                        ("error_estimate", r.error_estimate),
                    ]);
                    sink.pretty(format!("{} ± {}", fmt_g10(r.value), fmt_g10(r.error_estimate)));
                }
                "both" => {
                    let a = cos_pushforward_mass(&q, &cfg, &policy)?;
                    let b = cos_pushforward_mass_wplane(&q, &cfg, &policy)?;
                    sink.record("push_mass_both", &[
                        ("strip", a.value),
                        ("wplane", b.value),
                        ("strip_error", a.error_estimate),
                        ("wplane_error", b.error_estimate),
                    ]);
                    sink.pretty(format!(
                        "strip  {} ± {}\nwplane {} ± {}",
                        fmt_g10(a.value),
                        fmt_g10(a.error_estimate),
                        fmt_g10(b.value),
                        fmt_g10(b.error_estimate)
                    ));
                }
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown method '{other}' (strip|wplane|both)"
                    )))
                }
            }
        }
        Command::Eff { qd } => {
            let q = load_qd(qd)?;
            let rep = efficiency_report(&q, &cfg, &policy)?;
            sink.record("efficiency", &[
                ("ratio", rep.ratio),
                ("mass", rep.mass.value),
                ("pushforward_mass", rep.pushforward_mass.value),
                ("ratio_error", rep.ratio_error),
            ]);
            sink.pretty(format!(
                "ratio {} (mass {}, push {}, ± {})",
                fmt_g10(rep.ratio),
                fmt_g10(rep.mass.value),
                fmt_g10(rep.pushforward_mass.value),
                fmt_g10(rep.ratio_error)
            ));
        }
        Command::Sweep { family, n, schedule } => {
            if schedule != "geometric" {
                return Err(Error::InvalidInput(format!("unknown schedule '{schedule}'")));
            }
            let (lo, hi) = parse_range(n)?;
            let builder: Box<dyn Fn(u32) -> Result<SweepMember, Error> + Sync + Send> =
                match family.as_str() {
                    "ex42" | "cos-symmetric" => Box::new(|i| shrinking_member(i, &cfg)),
                    "control" => Box::new(|i| control_member(i, &cfg)),
                    other => {
                        return Err(Error::InvalidInput(format!("unknown family '{other}'")))
                    }
                };
            let rows = efficiency_sweep(|i| builder(i), lo..=hi, &cfg, &policy);
            let mut text = String::from(SWEEP_CSV_HEADER);
            for row in &rows {
                text.push('\n');
                text.push_str(&row.to_csv());
                if let Err(e) = &row.outcome {
                    eprintln!("qdlab: sweep index {}: {e}", row.index);
                }
            }
            sink.raw(text);
        }
        Command::Annulus { r, big_r } => {
            let mass = annulus_log_mass(*r, *big_r)?;
            let modulus = annulus_modulus(*r, *big_r)?;
            sink.record("annulus", &[("log_mass", mass), ("modulus", modulus)]);
            sink.pretty(format!(
                "log-mass {} modulus {}",
                fmt_g10(mass),
                fmt_g10(modulus)
            ));
        }
        Command::Limit(limit) => run_limit(limit, &cfg, &mut sink)?,
        Command::Portrait { preperiod, period, counting } => {
            let p = validate_portrait(*preperiod, *period)?;
            let dim = teich_dimension(&p)?;
            sink.record("portrait", &[
                ("postsingular_size", p.postsingular_size() as f64),
                ("dimension", dim as f64),
            ]);
            let mut lines = format!("|P_f|={} dim={}", p.postsingular_size(), dim);
            lines.push_str(&format!("\n{}", orbit_diagram(&p)));
            if let Some(spec) = counting {
                let (sym, crit) = parse_pair_u32(spec)?;
                let verdict = counting_feasibility(sym, CriticalValuesInside::from_count(crit)?)?;
                lines.push_str(&format!("\ncounting: {verdict:?}"));
            }
            sink.pretty(lines);
        }
        Command::MassCondition(args) => run_mass_condition(args, &mut sink)?,
    }
    sink.finish()
}

fn run_limit(
    cmd: &LimitCommand,
    cfg: &QuadratureConfig,
    sink: &mut OutputSink,
) -> Result<(), Error> {
    match cmd {
        LimitCommand::Detect { qd } => {
            let q = load_qd(qd)?;
            let scaling = detect_thick_scaling(&q)?.map;
            sink.record("thick_scaling", &[
                ("a_re", scaling.a.re),
                ("a_im", scaling.a.im),
                ("b_re", scaling.b.re),
                ("b_im", scaling.b.im),
            ]);
            sink.pretty(format!(
                "a = {} + {}i, b = {} + {}i",
                fmt_g10(scaling.a.re),
                fmt_g10(scaling.a.im),
                fmt_g10(scaling.b.re),
                fmt_g10(scaling.b.im)
            ));
        }
        LimitCommand::Distance { qd, model, a, b } => {
            let q = load_qd(qd)?;
            let q_model = load_qd(model)?;
            let m = AffineMap::new(parse_complex(a)?, parse_complex(b)?)?;
            let d = limit_model_distance(&q, &m, &q_model, cfg)?;
            sink.record("limit_distance", &[("value", d)]);
            sink.pretty(fmt_g10(d));
        }
        LimitCommand::Sn { a, b, z, radius } => {
            let a = parse_complex(a)?;
            let b = parse_complex(b)?;
            let sup = s_n_sup_deviation(a, b, *radius)?;
            match z {
                Some(z) => {
                    let v = s_n_eval(a, b, parse_complex(z)?)?;
                    sink.record("sn", &[("re", v.re), ("im", v.im), ("sup_deviation", sup)]);
                    sink.pretty(format!(
                        "S(z) = {} + {}i, sup deviation on |z|={} : {}",
                        fmt_g10(v.re),
                        fmt_g10(v.im),
                        radius,
                        fmt_g10(sup)
                    ));
                }
                None => {
                    sink.record("sn", &[("sup_deviation", sup)]);
                    sink.pretty(format!(
                        "sup deviation on |z|={} : {}",
                        radius,
                        fmt_g10(sup)
                    ));
                }
            }
        }
        LimitCommand::Concentrate { qd, modulus } => {
            let q = load_qd(qd)?;
            match find_concentration_annulus(&q, *modulus)? {
                Some(res) => {
                    sink.record("concentration", &[
                        ("center_re", res.center.re),
                        ("center_im", res.center.im),
                        ("inner_radius", res.inner_radius),
                        ("outer_radius", res.outer_radius),
                        ("modulus", res.modulus),
                        ("poles_inside", res.poles_inside.len() as f64),
                    ]);
                    sink.pretty(format!(
                        "annulus at {} + {}i, radii [{}, {}], modulus {}, {} poles inside",
                        fmt_g10(res.center.re),
                        fmt_g10(res.center.im),
                        fmt_g10(res.inner_radius),
                        fmt_g10(res.outer_radius),
                        fmt_g10(res.modulus),
                        res.poles_inside.len()
                    ));
                }
                None => {
                    sink.record("concentration", &[("found", 0.0)]);
                    sink.pretty("no separating annulus of the required modulus".to_string());
                }
            }
        }
        LimitCommand::InnerRadius { qd, center, r, big_r, delta } => {
            let q = load_qd(qd)?;
            let model = ThinModel::new(
                parse_complex(center)?,
                *r,
                *big_r,
                Complex64::new(1.0, 0.0),
            )?;
            let r_star = choose_inner_radius(&q, &model, *delta, cfg)?;
            sink.record("inner_radius", &[("value", r_star)]);
            sink.pretty(fmt_g10(r_star));
        }
        LimitCommand::Bound { k, d0 } => {
            let m = modulus_bound(*k, *d0)?;
            sink.record("modulus_bound", &[("value", m)]);
            sink.pretty(fmt_g10(m));
        }
        LimitCommand::MassCondition(args) => run_mass_condition(args, sink)?,
    }
    Ok(())
}

fn run_mass_condition(args: &MassConditionArgs, sink: &mut OutputSink) -> Result<(), Error> {
    let center = parse_complex(&args.center)?;
    let lambdas = args
        .lambdas
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    let cert = mass_condition_check(center, args.radius, &lambdas, args.k_window)?;
    let (holds, stage, k) = match (&cert.holds, &cert.witness) {
        (true, _) => (1.0, -1.0, 0.0),
        (false, Some(w)) => (0.0, w.stage as f64, w.k as f64),
        (false, None) => (0.0, -1.0, 0.0),
    };
    sink.record("mass_condition", &[
        ("holds", holds),
        ("stage", stage),
        ("k", k),
        ("margin", cert.margin),
        ("samples", cert.boundary_samples as f64),
    ]);
    match &cert.witness {
        Some(w) => sink.pretty(format!(
            "fails: stage {} covers k = {} (margin {})",
            w.stage,
            w.k,
            fmt_g10(cert.margin)
        )),
        None => sink.pretty(format!("holds (margin {})", fmt_g10(cert.margin))),
    }
    Ok(())
}

fn orbit_diagram(p: &qdlab::orbits::OrbitPortrait) -> String {
    let mut tail: Vec<String> = (1..p.preperiod).map(|i| format!("x{i}")).collect();
    let cycle: Vec<String> = (0..p.period).map(|j| format!("c{j}")).collect();
    tail.push(format!("[{}]", cycle.join(" -> ")));
    format!("x1,y1 merge; orbit: {}", tail.join(" -> "))
}

fn load_text(input: &str) -> Result<String, Error> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') {
        return Ok(input.to_string());
    }
    std::fs::read_to_string(input)
        .map_err(|e| Error::InvalidInput(format!("cannot read '{input}': {e}")))
}

fn load_qd(input: &str) -> Result<RationalQD, Error> {
    qd_from_json(&load_text(input)?)
}

fn parse_complex(text: impl AsRef<str>) -> Result<Complex64, Error> {
    let text = text.as_ref().trim();
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => re
            .trim()
            .parse::<f64>()
            .map(|x| Complex64::new(x, 0.0))
            .map_err(|e| Error::InvalidInput(format!("bad complex '{text}': {e}"))),
        [re, im] => {
            let re = re
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad complex '{text}': {e}")))?;
            let im = im
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad complex '{text}': {e}")))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(Error::InvalidInput(format!("bad complex '{text}', expected re,im"))),
    }
}

fn parse_range(text: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = text.split("..").collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!("bad range '{text}', expected lo..hi")));
    }
    let lo = parts[0]
        .parse::<u32>()
        .map_err(|e| Error::InvalidInput(format!("bad range '{text}': {e}")))?;
    let hi = parts[1]
        .parse::<u32>()
        .map_err(|e| Error::InvalidInput(format!("bad range '{text}': {e}")))?;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty range '{text}'")));
    }
    Ok((lo, hi))
}

fn parse_pair_u32(text: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!("expected 'sym,crit', got '{text}'")));
    }
    let a = parts[0]
        .trim()
        .parse::<u32>()
        .map_err(|e| Error::InvalidInput(format!("bad count '{text}': {e}")))?;
    let b = parts[1]
        .trim()
        .parse::<u32>()
        .map_err(|e| Error::InvalidInput(format!("bad count '{text}': {e}")))?;
    Ok((a, b))
}
