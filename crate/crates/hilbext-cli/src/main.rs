//! Command-line surface: evaluate extension groups and cohomology over a
//! context file, compose serialized classes, report self-extension
//! patterns, and run the verification suites.
//!
//! Exit codes: 0 on success (or a verified suite), 1 on a computation or
//! input error, 2 on a verification failure.

use clap::{Parser, Subcommand, ValueEnum};
use hilbext::context::SurfaceContext;
use hilbext::hilbert::{
    self, ext_det_det_poincare, ext_det_taut_poincare, ext_taut_det_poincare,
    ext_taut_taut_poincare, SerreFlags,
};
use hilbext::verify;
use hilbext::yoneda::{self, PClass};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hilbext",
    version,
    about = "Extension groups of twisted tautological objects on Hilbert schemes of points, from surface Ext data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extension groups between two objects, with a labeled basis listing
    Ext {
        /// Context file (JSON)
        #[arg(long)]
        ctx: PathBuf,
        /// Number of points
        #[arg(long)]
        n: usize,
        /// Source object: taut:<obj>,<line> or det:<line>
        #[arg(long)]
        source: String,
        /// Target object: taut:<obj>,<line> or det:<line>
        #[arg(long)]
        target: String,
    },
    /// Cohomology of a twisted tautological object
    Cohom {
        #[arg(long)]
        ctx: PathBuf,
        #[arg(long)]
        n: usize,
        /// Source object: taut:<obj>,<line>
        #[arg(long)]
        source: String,
        /// Declared structure-sheaf symbol
        #[arg(long, default_value = "O")]
        structure: String,
    },
    /// Yoneda product of two serialized classes (outer class first)
    Yoneda {
        #[arg(long)]
        ctx: PathBuf,
        /// Class files: pass twice, outer then inner
        #[arg(long = "class", num_args = 1)]
        classes: Vec<PathBuf>,
        /// Also run the component-model engine and compare
        #[arg(long)]
        oracle: bool,
    },
    /// Self-extension pattern report for a twisted tautological object
    Spherical {
        #[arg(long)]
        ctx: PathBuf,
        #[arg(long)]
        n: usize,
        /// Source object: taut:<obj>,<line>
        #[arg(long)]
        source: String,
        /// Assert the trivial-canonical hypotheses (h0 = h2 = 1 on the
        /// structure sheaf, nonvanishing boundary self-exts)
        #[arg(long)]
        assume_serre: bool,
    },
    /// Run one of the verification suites
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Suite {
    Reps,
    Complex,
    Yoneda,
    Graded,
}

#[derive(Debug, Clone)]
enum Spec {
    Taut { obj: String, line: String },
    Det { line: String },
}

fn parse_spec(text: &str) -> Result<Spec, String> {
    if let Some(rest) = text.strip_prefix("taut:") {
        let (obj, line) = rest
            .split_once(',')
            .ok_or_else(|| format!("expected taut:<obj>,<line>, got {text:?}"))?;
        if obj.is_empty() || line.is_empty() {
            return Err(format!("expected taut:<obj>,<line>, got {text:?}"));
        }
        Ok(Spec::Taut {
            obj: obj.to_string(),
            line: line.to_string(),
        })
    } else if let Some(line) = text.strip_prefix("det:") {
        if line.is_empty() || line.contains(',') {
            return Err(format!("expected det:<line>, got {text:?}"));
        }
        Ok(Spec::Det {
            line: line.to_string(),
        })
    } else {
        Err(format!(
            "object spec must start with taut: or det:, got {text:?}"
        ))
    }
}

fn check_objects(ctx: &SurfaceContext, spec: &Spec) -> Result<(), String> {
    let names: Vec<&str> = match spec {
        Spec::Taut { obj, line } => vec![obj, line],
        Spec::Det { line } => vec![line],
    };
    for name in names {
        if !ctx.has_object(name) {
            return Err(format!("unknown object symbol {name:?}"));
        }
    }
    Ok(())
}

/// Writes one line to stdout; a closed pipe (e.g. piping into `head`)
/// ends the program quietly instead of panicking.
fn emit(text: impl std::fmt::Display) {
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        std::process::exit(0);
    }
}

fn run() -> Result<i32, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ext {
            ctx,
            n,
            source,
            target,
        } => {
            let ctx = SurfaceContext::load(&ctx).map_err(|e| e.to_string())?;
            let source = parse_spec(&source)?;
            let target = parse_spec(&target)?;
            check_objects(&ctx, &source)?;
            check_objects(&ctx, &target)?;
            let (lines, poly) = match (&source, &target) {
                (Spec::Taut { obj: el, line: l }, Spec::Taut { obj: fm, line: m }) => {
                    let p =
                        hilbert::ext_taut_taut(&ctx, el, l, fm, m, n).map_err(|e| e.to_string())?;
                    let poly =
                        ext_taut_taut_poincare(&ctx, el, l, fm, m, n).map_err(|e| e.to_string())?;
                    (p.basis_lines(), poly)
                }
                (Spec::Taut { obj: el, line: l }, Spec::Det { line: m }) => {
                    let s = hilbert::ext_taut_det(&ctx, el, l, m, n).map_err(|e| e.to_string())?;
                    let poly =
                        ext_taut_det_poincare(&ctx, el, l, m, n).map_err(|e| e.to_string())?;
                    (graded_lines(&s), poly)
                }
                (Spec::Det { line: l }, Spec::Taut { obj: fm, line: m }) => {
                    let s = hilbert::ext_det_taut(&ctx, l, fm, m, n).map_err(|e| e.to_string())?;
                    let poly =
                        ext_det_taut_poincare(&ctx, l, fm, m, n).map_err(|e| e.to_string())?;
                    (graded_lines(&s), poly)
                }
                (Spec::Det { line: l }, Spec::Det { line: m }) => {
                    let s = hilbert::ext_det_det(&ctx, l, m, n).map_err(|e| e.to_string())?;
                    let poly = ext_det_det_poincare(&ctx, l, m, n).map_err(|e| e.to_string())?;
                    (graded_lines(&s), poly)
                }
            };
            for line in lines {
                emit(line);
            }
            emit(format!("poincare: {poly}"));
            Ok(0)
        }
        Command::Cohom {
            ctx,
            n,
            source,
            structure,
        } => {
            let ctx = SurfaceContext::load(&ctx).map_err(|e| e.to_string())?;
            let spec = parse_spec(&source)?;
            let Spec::Taut { obj: el, line: l } = spec else {
                return Err("cohom takes a taut:<obj>,<line> source".into());
            };
            if !ctx.has_object(&structure) {
                return Err(format!(
                    "structure-sheaf symbol {structure:?} is not declared"
                ));
            }
            let s = hilbert::cohomology_taut(&ctx, &structure, &el, &l, n)
                .map_err(|e| e.to_string())?;
            let poly = hilbert::cohomology_taut_poincare(&ctx, &structure, &el, &l, n)
                .map_err(|e| e.to_string())?;
            for line in graded_lines(&s) {
                emit(line);
            }
            emit(format!("poincare: {poly}"));
            Ok(0)
        }
        Command::Yoneda {
            ctx,
            classes,
            oracle,
        } => {
            if classes.len() != 2 {
                return Err("pass --class twice: outer class, then inner class".into());
            }
            let ctx = SurfaceContext::load(&ctx).map_err(|e| e.to_string())?;
            let load = |path: &PathBuf| -> Result<PClass, String> {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                PClass::from_json_str(&ctx, &text).map_err(|e| e.to_string())
            };
            let outer = load(&classes[0])?;
            let inner = load(&classes[1])?;
            let product = yoneda::yoneda_closed(&ctx, &outer, &inner).map_err(|e| e.to_string())?;
            emit(product.to_json_string());
            if oracle {
                let check =
                    yoneda::yoneda_oracle(&ctx, &outer, &inner).map_err(|e| e.to_string())?;
                if check != product {
                    eprintln!("verification failure: component-model product differs");
                    return Ok(2);
                }
                eprintln!("component-model product agrees");
            }
            Ok(0)
        }
        Command::Spherical {
            ctx,
            n,
            source,
            assume_serre,
        } => {
            let ctx = SurfaceContext::load(&ctx).map_err(|e| e.to_string())?;
            let spec = parse_spec(&source)?;
            let Spec::Taut { obj: el, line: l } = spec else {
                return Err("spherical takes a taut:<obj>,<line> source".into());
            };
            let flags = SerreFlags {
                structure_h0_h2_one: assume_serre,
                self_ext_0_2_nonzero: assume_serre,
            };
            let report =
                hilbert::spherical_report(&ctx, &el, &l, n, flags).map_err(|e| e.to_string())?;
            let dims: Vec<String> = report
                .dims
                .iter()
                .map(|(d, c)| format!("{d}:{c}"))
                .collect();
            emit(format!("dims: {{{}}}", dims.join(", ")));
            emit(format!("verdict: {}", report.pattern));
            let witnesses: Vec<String> = report.witnesses.iter().map(i64::to_string).collect();
            emit(format!(
                "witness degrees (dim >= 2): [{}]",
                witnesses.join(", ")
            ));
            emit(format!(
                "hypotheses declared: {}; verdict guaranteed: {}",
                if flags.all() { "yes" } else { "no" },
                if report.guaranteed { "yes" } else { "no" }
            ));
            if let Some(note) = &report.note {
                emit(format!("note: {note}"));
            }
            Ok(0)
        }
        Command::Verify { suite, max_n, seed } => {
            let report = match suite {
                Suite::Reps => verify::run_reps_suite(max_n.min(6), seed),
                Suite::Complex => verify::run_complex_suite(max_n.max(2), seed, 200),
                Suite::Yoneda => verify::run_yoneda_suite(max_n, seed, 60),
                Suite::Graded => verify::run_graded_suite(max_n, seed),
            };
            emit(report.render().trim_end());
            Ok(if report.passed() { 0 } else { 2 })
        }
    }
}

fn graded_lines(space: &hilbext::graded::GradedSpace) -> Vec<String> {
    space
        .basis()
        .iter()
        .map(|(label, degree)| format!("{degree} | - | {label}"))
        .collect()
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
