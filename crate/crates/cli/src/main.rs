use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qinstrument::certify::{certify_repeatable, check_orthogonal, classify_povm};
use qinstrument::format::{self, OutcomeDecomposition};
use qinstrument::simulate::run_trajectory;
use qinstrument::wold::{split, wold_decompose};
use qinstrument::{build_binary_example, build_example_family, config, povm, Instrument, StateVector};

/// Exit status for a repeatable verdict or a successful command.
const EXIT_OK: u8 = 0;
const EXIT_NOT_REPEATABLE: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "qinstr", version, about = "Exact certification and simulation of discrete measurement instruments")]
struct Cli {
    /// Amplitude tolerance for exact comparisons.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Largest period any index set or operator may reach.
    #[arg(long, global = true)]
    period_cap: Option<u64>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for outputs that are not given an explicit path.
    #[arg(long, global = true, env = "QINSTR_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ReportArgs {
    /// Instrument file (JSON).
    instrument: PathBuf,
    /// Report path; defaults to `<out-dir>/<kind>.json`, or stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide repeatability. Exit 0 if repeatable, 1 if not, 2 on error.
    Certify(ReportArgs),
    /// Print the effects M_e†M_e and whether they are orthogonal projections.
    Povm(ReportArgs),
    /// Split a diagonal POVM into projections Z_e, remainders T_e and Z_ω.
    Classify(ReportArgs),
    /// Split each operator into V + W and Wold-decompose V.
    Wold(ReportArgs),
    /// Run a measurement trajectory and write it as JSON lines.
    Simulate {
        instrument: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Basis index or amplitude list such as `[[0,[0.6,0]],[3,[0,0.8]]]`.
        #[arg(long, default_value = "0")]
        initial: String,
        /// Log path; defaults to `<out-dir>/trajectory.jsonl`, or stdout.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Write a worked example with its full report bundle.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// n outcomes, each shifting its own residue class mod n.
    Ex1 {
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Comma-separated probabilities; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Two outcomes whose defect parts have effects p₁|0⟩⟨0| + p₂|1⟩⟨1|.
    Binary {
        #[arg(long, default_value_t = 0.3)]
        p1: f64,
        #[arg(long, default_value_t = 0.7)]
        p2: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            bail!("--tolerance must be a positive number");
        }
        config::set_tolerance(t);
    }
    if let Some(cap) = cli.period_cap {
        if cap == 0 {
            bail!("--period-cap must be at least 1");
        }
        config::set_period_cap(cap);
    }
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Certify(args) => {
            let inst = load(&args.instrument)?;
            let report = certify_repeatable(&inst)?;
            let file = format::certification_report(&report);
            emit(&file.render(), args.output.as_deref(), out_dir, "certification.json")?;
            eprintln!("{}", file.summary);
            Ok(if report.repeatable { EXIT_OK } else { EXIT_NOT_REPEATABLE })
        }
        Command::Povm(args) => {
            let inst = load(&args.instrument)?;
            let effects = povm(&inst);
            let orthogonal = check_orthogonal(&effects)?;
            emit(&format::povm_report(&effects, orthogonal).render(), args.output.as_deref(), out_dir, "povm.json")?;
            Ok(EXIT_OK)
        }
        Command::Classify(args) => {
            let inst = load(&args.instrument)?;
            let c = classify_povm(&povm(&inst))?;
            emit(&format::classification_report(&c).render(), args.output.as_deref(), out_dir, "classification.json")?;
            Ok(EXIT_OK)
        }
        Command::Wold(args) => {
            let inst = load(&args.instrument)?;
            emit(&format::wold_report(&decompose(&inst)).render(), args.output.as_deref(), out_dir, "wold.json")?;
            Ok(EXIT_OK)
        }
        Command::Simulate { instrument, steps, initial, log } => {
            let inst = load(&instrument)?;
            let (psi, adjusted) = format::parse_state(&initial)?;
            if adjusted {
                eprintln!("warning: initial state was not normalized; normalizing it");
            }
            let record = run_trajectory(&inst, &psi, steps, cli.seed)?;
            emit(&format::trajectory_jsonl(&record), log.as_deref(), out_dir, "trajectory.jsonl")?;
            let outcomes: Vec<String> = record.outcomes().iter().map(|o| o.to_string()).collect();
            let depths: Vec<String> =
                record.depths().iter().map(|d| d.map_or("-".to_string(), |d| d.to_string())).collect();
            eprintln!("outcomes: {}", outcomes.join(" "));
            eprintln!("depths:   {}", depths.join(" "));
            Ok(EXIT_OK)
        }
        Command::Demo { which } => {
            let (name, inst) = match which {
                Demo::Ex1 { n, p } => {
                    let p = if p.is_empty() { vec![1.0 / n.max(1) as f64; n as usize] } else { p };
                    ("ex1", build_example_family(n, &p)?)
                }
                Demo::Binary { p1, p2 } => ("binary", build_binary_example(p1, p2)?),
            };
            let dir = out_dir.map_or_else(|| PathBuf::from("qinstr-out"), Path::to_path_buf).join(name);
            let repeatable = write_bundle(&inst, &dir, cli.seed)?;
            eprintln!("wrote {}", dir.display());
            Ok(if repeatable { EXIT_OK } else { EXIT_NOT_REPEATABLE })
        }
    }
}

fn load(path: &Path) -> Result<Instrument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    format::parse_instrument(&text).with_context(|| format!("parsing {}", path.display()))
}

fn decompose(inst: &Instrument) -> BTreeMap<qinstrument::Outcome, OutcomeDecomposition> {
    inst.iter()
        .map(|(e, m)| {
            let d = split(m).and_then(|parts| {
                let mut w = wold_decompose(&parts.v)?;
                w.outcome = Some(e);
                Ok((parts, w))
            });
            (e, d)
        })
        .collect()
}

/// Writes to `explicit`, else `<out_dir>/<default_name>`, else stdout.
fn emit(text: &str, explicit: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> Result<()> {
    let path = match (explicit, out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            dir.join(default_name)
        }
        (None, None) => {
            print!("{text}");
            return Ok(());
        }
    };
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_bundle(inst: &Instrument, dir: &Path, seed: u64) -> Result<bool> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("instrument.json", &format::serialize_instrument(inst))?;

    let report = certify_repeatable(inst)?;
    write("certification.json", &format::certification_report(&report).render())?;

    let effects = povm(inst);
    write("povm.json", &format::povm_report(&effects, check_orthogonal(&effects)?).render())?;

    let classification = match classify_povm(&effects) {
        Ok(c) => format::classification_report(&c),
        Err(e) => format::ReportFile::new("classification", e.to_string(), serde_json::json!({ "error": e.to_string() })),
    };
    write("classification.json", &classification.render())?;
    write("wold.json", &format::wold_report(&decompose(inst)).render())?;

    let record = run_trajectory(inst, &StateVector::basis(0), 10, seed)?;
    write("trajectory.jsonl", &format::trajectory_jsonl(&record))?;
    Ok(report.repeatable)
}
