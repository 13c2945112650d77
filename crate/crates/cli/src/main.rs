use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use distvote::adversarial::{build_lower_bound, verify_bound, BoundMode, LbParams, LowerBound};
use distvote::analysis::{distortion_empirical, distortion_exact};
use distvote::datagen::partition_uniform;
use distvote::experiment::{run_experiment, to_csv, ExperimentConfig};
use distvote::instance::normalize_unit_sum;
use distvote::io::{format_instance, read_instance};
use distvote::{Districts, Error, Instance, MechanismSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "distvote", version, about = "Distributed voting mechanisms and their distortion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Batch distortion experiments; CSV to stdout or --out, run log to stderr.
    Experiment(ExperimentArgs),
    /// Generate and verify lower-bound instances.
    Adversarial(AdversarialArgs),
    /// Distortion of one mechanism on an instance file.
    Distortion(DistortionArgs),
    /// Instance file utilities.
    #[command(subcommand)]
    Instance(InstanceCommand),
}

#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated district counts.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated `<over>-of-<in>` identifiers, or `default`.
    #[arg(long)]
    rules: Option<String>,
    /// `exact` or `montecarlo`.
    #[arg(long)]
    mode: Option<String>,
    /// Samples per randomized evaluation in montecarlo mode.
    #[arg(long)]
    samples: Option<usize>,
    /// `uniform`, `beta`, `exponential`, or e.g. `uniform(1,100)`.
    #[arg(long)]
    dist: Option<String>,
    /// Ratings file (Jester layout).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    missing_marker: Option<f64>,
    /// The ratings file has no leading count column.
    #[arg(long)]
    no_count_column: bool,
    /// Instance file; with no --k its own partition is used.
    #[arg(long, conflicts_with_all = ["data", "dist"])]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversarialArgs {
    /// List the available constructions.
    #[arg(long, conflicts_with = "gen")]
    list: bool,
    /// Construction name.
    #[arg(long, required_unless_present = "list")]
    gen: Option<String>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    lambda: usize,
    #[arg(long)]
    eps: Option<f64>,
    /// Mechanism to evaluate; defaults to the construction's target.
    #[arg(long)]
    mechanism: Option<String>,
    /// Expected ratio; defaults to the construction's closed form when the
    /// mechanism is its target.
    #[arg(long)]
    expect: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Pass when the ratio is at least the expected value.
    #[arg(long)]
    at_least: bool,
    /// Write the generated instance here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistortionArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    mechanism: String,
    /// Estimate from this many sampled winners instead of exactly.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum InstanceCommand {
    /// Check an instance file and print its dimensions.
    Validate { path: PathBuf },
    /// Turn a raw whitespace-separated table into an instance file.
    Normalize {
        /// One agent per line, one non-negative value per alternative.
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Shuffle agents before cutting districts.
        #[arg(long)]
        shuffle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownRule { .. } => Self::Usage(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit(text: &str, out: Option<&PathBuf>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Outcome {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut settings: Vec<(&str, String)> = Vec::new();
    let mut put = |key, value: Option<String>| {
        if let Some(v) = value {
            settings.push((key, v));
        }
    };
    put("dist", args.dist);
    put("data", args.data.map(|p| p.display().to_string()));
    put("missing_marker", args.missing_marker.map(|x| x.to_string()));
    put("count_column", args.no_count_column.then(|| "false".into()));
    put("instance", args.instance.map(|p| p.display().to_string()));
    put("n", args.n.map(|x| x.to_string()));
    put("m", args.m.map(|x| x.to_string()));
    put("k", args.k);
    put("runs", args.runs.map(|x| x.to_string()));
    put("samples", args.samples.map(|x| x.to_string()));
    put("mode", args.mode);
    put("rules", args.rules);
    put("seed", args.seed.map(|x| x.to_string()));
    put("out", args.out.map(|p| p.display().to_string()));
    let instance_flag = settings.iter().any(|(key, _)| *key == "instance");
    let k_flag = settings.iter().any(|(key, _)| *key == "k");
    for (key, value) in &settings {
        config.set(key, value)?;
    }
    if instance_flag && !k_flag {
        config.k_values.clear();
    }

    let table = run_experiment(&config)?;
    let mut log = std::io::stderr().lock();
    for line in &table.log {
        writeln!(log, "{line}")?;
    }
    emit(&to_csv(&table), config.out_path.as_ref())
}

fn adversarial(args: AdversarialArgs) -> Outcome {
    if args.list {
        for kind in LowerBound::ALL {
            println!("{:<16} {}", kind.as_str(), kind.description());
        }
        return Ok(());
    }
    let kind: LowerBound = args.gen.as_deref().unwrap_or_default().parse()?;
    let params = LbParams {
        k: args.k,
        m: args.m,
        lambda: args.lambda,
        eps: args.eps,
    };
    let (lb, instance) = build_lower_bound(kind, params)?;
    let mechanism: MechanismSpec = match &args.mechanism {
        Some(s) => s.parse()?,
        None => lb.target_mechanism.clone(),
    };
    if let Some(path) = &args.out {
        fs::write(path, format_instance(&instance))?;
    }
    let expected = args
        .expect
        .or_else(|| (mechanism == lb.target_mechanism).then_some(lb.expected_ratio));
    let mode = if args.at_least { BoundMode::AtLeast } else { BoundMode::Within };
    let eps = lb.eps.map_or(String::new(), |e| format!(" eps={e}"));
    let header = format!(
        "gen={} k={} m={} lambda={}{eps} mechanism={mechanism}",
        lb.name, lb.k, lb.m, lb.lambda
    );
    match expected {
        Some(expected) => {
            let check = verify_bound(&instance, &mechanism, expected, args.tol, mode)?;
            let verdict = if check.pass { "PASS" } else { "FAIL" };
            println!(
                "{header} ratio={} expected={} tol={} {verdict}",
                fmt_ratio(check.report.ratio),
                fmt_ratio(expected),
                args.tol
            );
            if !check.pass {
                return Err(Failure::Verification(format!(
                    "ratio {} does not match {}",
                    fmt_ratio(check.report.ratio),
                    fmt_ratio(expected)
                )));
            }
        }
        None => {
            let report = distortion_exact(&instance, &mechanism)?;
            println!("{header} ratio={}", fmt_ratio(report.ratio));
        }
    }
    Ok(())
}

fn fmt_ratio(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.9}")
    }
}

fn distortion(args: DistortionArgs) -> Outcome {
    let instance = read_instance(&args.instance)?;
    let mechanism: MechanismSpec = args.mechanism.parse()?;
    let report = match args.samples {
        Some(samples) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            distortion_empirical(&instance, &mechanism, samples, &mut rng)?
        }
        None => distortion_exact(&instance, &mechanism)?,
    };
    println!(
        "mechanism={mechanism} optimal_alt={} optimal_sw={} expected_sw={} ratio={}",
        report.optimal_alt,
        report.optimal_sw,
        report.mechanism_expected_sw,
        fmt_ratio(report.ratio)
    );
    Ok(())
}

fn parse_table(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(line, l)| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Failure::Runtime(format!("line {line}: cannot parse `{f}`")))
                })
                .collect()
        })
        .collect()
}

fn instance_command(cmd: InstanceCommand) -> Outcome {
    match cmd {
        InstanceCommand::Validate { path } => {
            let inst = read_instance(&path)?;
            let sizes = inst.districts().sizes();
            println!("ok n={} m={} k={} district_sizes={sizes:?}", inst.n(), inst.m(), inst.k());
        }
        InstanceCommand::Normalize {
            input,
            k,
            shuffle,
            seed,
            out,
        } => {
            let rows = normalize_unit_sum(&parse_table(&fs::read_to_string(&input)?)?)?;
            let n = rows.len();
            let districts = if shuffle {
                partition_uniform(n, k, &mut ChaCha8Rng::seed_from_u64(seed))?
            } else if k == 0 || n % k != 0 {
                return Err(Error::Divisibility(format!("k = {k} does not divide n = {n}")).into());
            } else {
                Districts::contiguous(k, n / k)
            };
            emit(&format_instance(&Instance::new(rows, districts)?), out.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment(args) => experiment(args),
        Command::Adversarial(args) => adversarial(args),
        Command::Distortion(args) => distortion(args),
        Command::Instance(cmd) => instance_command(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) | Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
