//! Command-line front end.
//!
//! Exit codes: 0 success, 1 semantic failure (invalid space, failed
//! hypothesis), 2 usage or parse error. Output is JSON, except the Brownian
//! demo, which prints CSV.

mod document;
mod expr;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::dvector;
use serde_json::{json, Value};

use crate::causal::{intervene, intervene_hard, trivial_mechanism, validate_causal_space, CausalSpace, InterventionSpec};
use crate::compilers::{compile_po, compile_scm};
use crate::effects::{adjustment_estimate, classify_effect, has_no_effect_given};
use crate::error::Error;
use crate::gaussian::{altitude_temperature, brownian_csv, g_condition, g_intervene, rice_market, GaussianMeasure};
use crate::measure::{Dist, SubsetMask};

pub use document::{load_input, load_space, load_space_document, InputDocument, SpaceDocument, CONDITIONALS};
pub use expr::{parse_event, parse_subset, parse_weights};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SEMANTIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "causal-spaces", version, about = "Causal spaces on finite product spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DoArgs {
    path: PathBuf,
    /// Components to intervene on, as indices or names.
    #[arg(long)]
    on: String,
    /// Flat index of the atom of Ω_U to fix.
    #[arg(long, conflicts_with = "q")]
    dirac: Option<usize>,
    /// Weights of the intervention measure on Ω_U, row-major.
    #[arg(long)]
    q: Option<String>,
    /// Use the closed form for hard interventions.
    #[arg(long)]
    hard: bool,
    /// Event expressions to evaluate under the intervention measure.
    #[arg(long)]
    query: Vec<String>,
    /// Write the intervened space as a document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check both causal-space axioms.
    Validate { path: PathBuf },
    /// Intervene and print the intervention measure.
    Do(DoArgs),
    /// Classify the effect of ℋ_U on an event, or test no effect given ℋ_V.
    Classify {
        path: PathBuf,
        #[arg(long)]
        u: String,
        #[arg(long)]
        event: String,
        #[arg(long)]
        given: Option<String>,
    },
    /// Estimate an intervention by adjusting for ℋ_V.
    Adjust {
        path: PathBuf,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long, conflicts_with = "q")]
        dirac: Option<usize>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        event: String,
    },
    /// Compile an SCM or potential-outcome document into a space document.
    Compile {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form Gaussian examples.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Brownian motion set to a value at one time, by intervention and by conditioning (CSV).
    Brownian {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 2.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        at: f64,
        #[arg(long, default_value_t = 0.0)]
        value: f64,
    },
    /// Altitude and temperature.
    Altitude,
    /// Cyclic rice market.
    Rice,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Domain(_) | Error::Dimension(_) | Error::InvalidDistribution(_) => EXIT_USAGE,
            _ => EXIT_SEMANTIC,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", json!({ "error": f.message }));
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, value: &Value) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure { code: EXIT_SEMANTIC, message: e.to_string() })?;
    writeln!(out, "{text}").map_err(|e| Failure { code: EXIT_SEMANTIC, message: e.to_string() })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure { code: EXIT_SEMANTIC, message: e.to_string() })?;
    std::fs::write(path, text + "\n").map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { path } => cmd_validate(&path, out),
        Command::Do(args) => cmd_do(&args, out),
        Command::Classify { path, u, event, given } => cmd_classify(&path, &u, &event, given.as_deref(), out),
        Command::Adjust { path, u, v, dirac, q, event } => cmd_adjust(&path, &u, &v, dirac, q.as_deref(), &event, out),
        Command::Compile { path, out: target } => cmd_compile(&path, &target, out),
        Command::Demo { which } => cmd_demo(which, out),
    }
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let cs = load_space(path)?;
    let report = validate_causal_space(&cs);
    emit(out, &serde_json::to_value(&report).expect("report serializes"))?;
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_SEMANTIC })
}

fn intervention_measure_arg(cs: &CausalSpace, u: SubsetMask, dirac: Option<usize>, q: Option<&str>) -> crate::Result<Dist> {
    match (dirac, q) {
        (Some(atom), None) => {
            if atom >= cs.space().atoms(u) {
                return Err(Error::Domain(format!("atom {atom} out of range for Ω_{{{u}}}")));
            }
            Dist::dirac_flat(cs.space().clone(), u, atom)
        }
        (None, Some(w)) => Dist::new(cs.space().clone(), u, parse_weights(w)?),
        (None, None) if u.is_empty() => Dist::dirac_flat(cs.space().clone(), u, 0),
        _ => Err(Error::Parse("give exactly one of --dirac or --q".into())),
    }
}

fn cmd_do(args: &DoArgs, out: &mut dyn Write) -> CmdResult {
    let cs = load_space(&args.path)?;
    let u = parse_subset(cs.space(), &args.on)?;
    let q = intervention_measure_arg(&cs, u, args.dirac, args.q.as_deref())?;
    let new = if args.hard {
        intervene_hard(&cs, u, &q)?
    } else {
        intervene(&cs, &InterventionSpec::with_mechanism(q.clone(), trivial_mechanism(u, &q)?))?
    };
    let mut results = serde_json::Map::new();
    for text in &args.query {
        let event = parse_event(cs.space(), text)?;
        results.insert(text.clone(), json!(new.prob(&event)?));
    }
    if let Some(p) = &args.out {
        write_json(p, &SpaceDocument::from_space(&new))?;
    }
    emit(
        out,
        &json!({
            "on": u.indices().collect::<Vec<_>>(),
            "hard": args.hard,
            "p_do": new.p().weights(),
            "queries": results,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_classify(path: &Path, u: &str, event: &str, given: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let cs = load_space(path)?;
    let u = parse_subset(cs.space(), u)?;
    let a = parse_event(cs.space(), event)?;
    let value = match given {
        Some(v) => {
            let v = parse_subset(cs.space(), v)?;
            json!({ "no_effect_given": has_no_effect_given(&cs, u, v, &a)? })
        }
        None => json!({ "class": classify_effect(&cs, u, &a)? }),
    };
    emit(out, &value)?;
    Ok(EXIT_OK)
}

fn cmd_adjust(
    path: &Path,
    u: &str,
    v: &str,
    dirac: Option<usize>,
    q: Option<&str>,
    event: &str,
    out: &mut dyn Write,
) -> CmdResult {
    let cs = load_space(path)?;
    let u = parse_subset(cs.space(), u)?;
    let v = parse_subset(cs.space(), v)?;
    let q = intervention_measure_arg(&cs, u, dirac, q)?;
    let a = parse_event(cs.space(), event)?;
    let report = adjustment_estimate(&cs, u, v, &q, &a)?;
    emit(out, &serde_json::to_value(&report).expect("report serializes"))?;
    Ok(if report.trusted { EXIT_OK } else { EXIT_SEMANTIC })
}

/// `foo.po.json` → `foo.mask.json` next to the output.
fn mask_path(target: &Path) -> PathBuf {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("space.json");
    let stem = name
        .strip_suffix(".space.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(name);
    target.with_file_name(format!("{stem}.mask.json"))
}

fn cmd_compile(path: &Path, target: &Path, out: &mut dyn Write) -> CmdResult {
    let (cs, mask) = match load_input(path)? {
        InputDocument::Scm(spec) => (compile_scm(&spec)?, None),
        InputDocument::Po(spec) => {
            let (cs, mask) = compile_po(&spec)?;
            (cs, Some(mask))
        }
        InputDocument::Space(doc) => (doc.to_space()?, None),
    };
    let report = validate_causal_space(&cs);
    write_json(target, &SpaceDocument::from_space(&cs))?;
    let mut summary = json!({ "space": target.display().to_string(), "valid": report.is_valid() });
    if let Some(m) = mask {
        let mp = mask_path(target);
        write_json(&mp, &m)?;
        summary["mask"] = json!(mp.display().to_string());
    }
    emit(out, &summary)?;
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_SEMANTIC })
}

fn moments(m: &GaussianMeasure, t: usize) -> crate::Result<Value> {
    let (mean, var) = m.moments(t)?;
    Ok(json!({ "mean": mean, "var": var }))
}

fn cmd_demo(which: Demo, out: &mut dyn Write) -> CmdResult {
    let io = |e: std::io::Error| Failure { code: EXIT_SEMANTIC, message: e.to_string() };
    match which {
        Demo::Brownian { steps, horizon, at, value } => {
            let csv = brownian_csv(steps, horizon, at, value)?;
            out.write_all(csv.as_bytes()).map_err(io)?;
        }
        Demo::Altitude => {
            let gs = altitude_temperature()?;
            let point = |t: usize, v: f64| GaussianMeasure::dirac(vec![t], dvector![v]);
            let do_alt = g_intervene(&gs, &point(0, 1000.0)?)?;
            let do_temp = g_intervene(&gs, &point(1, 0.0)?)?;
            let cond = g_condition(&gs, &[0], &dvector![1000.0])?;
            emit(
                out,
                &json!({
                    "do_altitude_1000": moments(&do_alt, 1)?,
                    "do_temperature_0": { "altitude": moments(&do_temp, 0)? },
                    "condition_altitude_1000": moments(&cond, 1)?,
                }),
            )?;
        }
        Demo::Rice => {
            let gs = rice_market()?;
            let point = |t: usize, v: f64| GaussianMeasure::dirac(vec![t], dvector![v]);
            let do_amount = g_intervene(&gs, &point(0, 3.0)?)?;
            let do_price = g_intervene(&gs, &point(1, 6.0)?)?;
            emit(
                out,
                &json!({
                    "do_amount_3": { "price": moments(&do_amount, 1)? },
                    "do_price_6": { "amount": moments(&do_price, 0)? },
                }),
            )?;
        }
    }
    Ok(EXIT_OK)
}
