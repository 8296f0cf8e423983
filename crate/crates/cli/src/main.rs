mod input;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use semilinear::decomposition::{
    check_frontier, check_partition, decompose, refine_special, union_formula, validate_special,
};
use semilinear::retraction::{
    contract, glue_star_retraction, loop_homotopy, trace, verify_glued, verify_homotopy, verify_retraction,
    CanonicalRetraction, Deformation, RetractionReport,
};
use semilinear::scalar::{format_scalar, int, wire_point};
use semilinear::{Carrier, Decomposition, Error, Point};

use input::{AnyInput, Instance, SetsInput};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  a verification found a failure
  2  bad input: parse error, usage error, bad index, n > 2 for render
  3  unbounded carrier: unbounded sets are never definably contractible
  4  hypothesis violated: not special, closure condition, no coherent corner labels, path not a loop";

#[derive(Parser)]
#[command(name = "semilinear", version, about = "Special linear decompositions and explicit deformation retractions")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Sampling {
    /// Number of sampled points for verification.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TraceArgs {
    /// Points to trace when the instance lists none.
    #[arg(long, default_value_t = 4)]
    points: usize,
    /// Time steps per traced point.
    #[arg(long, default_value_t = 16)]
    steps: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose Rⁿ against a list of semi-linear sets.
    Decompose {
        input: PathBuf,
        /// Refine the result to a special decomposition.
        #[arg(long)]
        special: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Refine a decomposition to a special one.
    Refine {
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// List the cells whose closure meets a cell.
    Star {
        input: PathBuf,
        index: usize,
        /// Also check the frontier property on the whole decomposition.
        #[arg(long)]
        check_frontier: bool,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Build and verify a canonical or glued star retraction; writes a trace.
    Retract {
        input: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Build and verify the contraction of a bounded star; writes a trace.
    Contract {
        input: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Null-homotopy of the loop of a star instance; writes the (t, s) grid.
    Homotopy {
        input: PathBuf,
        /// Grid points per axis.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Check a decomposition or a retraction instance; writes a report.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Draw a decomposition, instance or trace in R¹ or R² as SVG.
    Render {
        input: PathBuf,
        /// A trace to draw on top.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let code = exit_code(&e);
            if code == 3 {
                eprintln!("error: {e:#}: no definable contraction exists, as an unbounded set has no poles to contract through");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Unbounded) => 3,
        Some(Error::Hypothesis(_) | Error::NotSpecial) => 4,
        _ => 2,
    }
}

fn write_out(out: &Output, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(out: &Output, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(out, &text)
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Decompose { input, special, out } => {
            let (n, mut sets, carrier) = match input::read::<SetsInput>(&input, "list of semi-linear sets")? {
                SetsInput::Many { n, sets, carrier } => (n, sets, carrier),
                SetsInput::One(s) => (s.n, vec![s.formula], None),
            };
            sets.extend(carrier.clone());
            let mut d = decompose(&sets, n)?;
            if special {
                d = refine_special(&d)?;
            }
            if let Some(y) = carrier {
                d = d.restrict(&y)?;
            }
            write_json(&out, &d)?;
            Ok(true)
        }
        Command::Refine { input, out } => {
            let d: Decomposition = input::read(&input, "decomposition")?;
            write_json(&out, &refine_special(&d)?)?;
            Ok(true)
        }
        Command::Star { input, index, check_frontier: frontier, sampling, out } => {
            let d: Decomposition = input::read(&input, "decomposition")?;
            let members = d.star(index)?;
            if !frontier {
                write_json(&out, &json!({ "center": index, "members": members }))?;
                return Ok(true);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            let report = check_frontier(&d, sampling.samples, &mut rng);
            write_json(&out, &json!({ "center": index, "members": members, "frontier": report }))?;
            Ok(report.is_ok())
        }
        Command::Retract { input, sampling, trace: ta, out } => {
            let inst = input::read_instance(&input)?;
            match &inst {
                Instance::Canonical { cell, face, .. } => {
                    let h = CanonicalRetraction::new(cell.clone(), face.clone())?;
                    let report = verify_retraction(&h, sampling.samples, sampling.seed);
                    finish(&h, &inst, report, &sampling, &ta, &out)
                }
                Instance::Star { decomposition, center, corner, .. } => {
                    let g = glue_star_retraction(decomposition, *center, corner)?;
                    let report = verify_glued(&g, sampling.samples, sampling.samples / 10 + 1, sampling.seed);
                    finish(&g, &inst, report, &sampling, &ta, &out)
                }
            }
        }
        Command::Contract { input, sampling, trace: ta, out } => {
            let inst = input::read_instance(&input)?;
            let (d, center, corner) = star_of(&inst);
            let k = contract(&d, center, &corner)?;
            let report = verify_retraction(&k, sampling.samples, sampling.seed);
            eprintln!("endpoint: {}", fmt_point(k.endpoint()));
            finish(&k, &inst, report, &sampling, &ta, &out)
        }
        Command::Homotopy { input, grid, out } => {
            let inst = input::read_instance(&input)?;
            let Instance::Star { decomposition, center, corner, path, .. } = &inst else {
                bail!("homotopy needs a star instance with a \"loop\"");
            };
            let Some(path) = path else {
                bail!("{}: the instance has no \"loop\"", input.display());
            };
            let h = loop_homotopy(decomposition, *center, corner, path)?;
            let report = verify_homotopy(&h, grid);
            let steps = int(grid.max(2) as i64 - 1);
            let mut samples = Vec::new();
            for i in 0..grid.max(2) {
                let t = h.q() * int(i as i64) / &steps;
                for j in 0..grid.max(2) {
                    let s = h.p() * int(j as i64) / &steps;
                    let f = h.eval(&t, &s)?;
                    samples.push(json!({ "t": format_scalar(&t), "s": format_scalar(&s), "F": wire_point(&f) }));
                }
            }
            let doc = json!({ "q": format_scalar(h.q()), "p": format_scalar(h.p()), "samples": samples });
            write_json(&out, &doc)?;
            eprintln!("homotopy: {} checks, {} failures", report.checks, report.failures.len());
            for f in report.failures.iter().take(5) {
                eprintln!("  {f}");
            }
            Ok(report.is_ok())
        }
        Command::Verify { input, sampling, out } => verify(&input, &sampling, &out),
        Command::Render { input, trace: trace_path, out } => {
            let (n, cells, mut tr) = match input::read_any(&input)? {
                AnyInput::Decomposition(d) => (d.n, d.cells, None),
                AnyInput::Instance(i) => (i.dim(), i.cells(), None),
                AnyInput::Trace(t) => (t.samples.first().map_or(0, |s| s.x.len()), Vec::new(), Some(t)),
            };
            if let Some(p) = trace_path {
                tr = Some(input::read(&p, "trace")?);
            }
            write_out(&out, &render::render(n, &cells, tr.as_ref())?)?;
            Ok(true)
        }
    }
}

/// The star an instance describes; a lone canonical cell is its own star.
fn star_of(inst: &Instance) -> (Decomposition, usize, semilinear::CornerLabel) {
    match inst {
        Instance::Star { decomposition, center, corner, .. } => (decomposition.clone(), *center, corner.clone()),
        Instance::Canonical { cell, .. } => {
            let n = cell.dim();
            let cells = vec![cell.clone()];
            let carrier = Carrier::Set(union_formula(&cells, n));
            (Decomposition { n, carrier, special: true, cells }, 0, semilinear::CornerLabel::zeros(n))
        }
    }
}

fn trace_points(h: &impl Deformation, inst: &Instance, seed: u64, k: usize) -> Vec<Point> {
    if !inst.points().is_empty() {
        return inst.points().to_vec();
    }
    h.sample_domain(k, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(1)))
}

fn finish(
    h: &impl Deformation,
    inst: &Instance,
    report: RetractionReport,
    sampling: &Sampling,
    ta: &TraceArgs,
    out: &Output,
) -> Result<bool> {
    let points = trace_points(h, inst, sampling.seed, ta.points);
    let t = trace(h, &points, ta.steps)?;
    write_json(out, &t)?;
    print_report(&report);
    Ok(report.is_ok())
}

fn print_report(r: &RetractionReport) {
    eprintln!("verification: {} samples, {} checks, {} failures", r.samples, r.checks, r.failures.len());
    for f in r.failures.iter().take(5) {
        eprintln!("  {f}");
    }
}

fn fmt_point(p: &[semilinear::Scalar]) -> String {
    let parts: Vec<String> = p.iter().map(format_scalar).collect();
    format!("({})", parts.join(", "))
}

fn report_json(r: &RetractionReport) -> serde_json::Value {
    json!({
        "samples": r.samples,
        "checks": r.checks,
        "failures": r.failures.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn verify(input: &Path, sampling: &Sampling, out: &Output) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    match input::read_any(input)? {
        AnyInput::Decomposition(d) => {
            d.check_shape()?;
            let special = d.special.then(|| validate_special(&d));
            let partition = check_partition(&d, sampling.samples, &mut rng);
            let frontier = d.special.then(|| check_frontier(&d, 4, &mut rng));
            let ok = special.as_ref().is_none_or(|r| r.is_ok())
                && partition.is_ok()
                && frontier.as_ref().is_none_or(|r| r.is_ok());
            write_json(out, &json!({ "ok": ok, "special": special, "partition": partition, "frontier": frontier }))?;
            Ok(ok)
        }
        AnyInput::Instance(inst) => {
            let report = match *inst {
                Instance::Canonical { cell, face, .. } => {
                    verify_retraction(&CanonicalRetraction::new(cell, face)?, sampling.samples, sampling.seed)
                }
                Instance::Star { decomposition, center, corner, .. } => {
                    let g = glue_star_retraction(&decomposition, center, &corner)?;
                    verify_glued(&g, sampling.samples, sampling.samples / 10 + 1, sampling.seed)
                }
            };
            let mut doc = report_json(&report);
            doc["ok"] = json!(report.is_ok());
            write_json(out, &doc)?;
            print_report(&report);
            Ok(report.is_ok())
        }
        AnyInput::Trace(_) => bail!("{}: verify takes a decomposition or an instance", input.display()),
    }
}
