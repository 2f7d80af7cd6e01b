//! Command-line front end for the provider-selection pipeline.
//!
//! Each subcommand wraps one pipeline stage (signature aggregation, trial
//! planning, discovery, ranking) or the whole synthetic experiment
//! harness. Everything reads and writes plain files; nothing talks to a
//! network.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use iaas_select::discovery::{lpd_discover, spd_discover};
use iaas_select::ranking::rank_providers;
use iaas_select::signature::generate_signature;
use iaas_select::sim::io::{
    expand_workload, nrmse_csv, rankings_csv, read_json, read_workload_csv, resolve_experiment,
    write_json, ExperienceFile, ExperimentSpec, ObservationFile, RequestFile, SignatureFile,
};
use iaas_select::sim::run_experiment;
use iaas_select::trial::{
    select_trial_workloads, select_trial_workloads_eq, TrialPlan, TrialScheme,
};
use iaas_select::Error;

const EXIT_USAGE_OR_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

/// A fully rendered failure: what to print and which exit code it maps
/// to. Usage and I/O problems exit 1, domain validation problems exit 2.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            code: exit_code_for(&err),
            message: err.to_string(),
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) => EXIT_USAGE_OR_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Attaches the offending path to errors coming out of file operations.
fn at<T>(path: &Path, result: iaas_select::Result<T>) -> Result<T, Failure> {
    result.map_err(|err| Failure {
        code: exit_code_for(&err),
        message: format!("{}: {err}", path.display()),
    })
}

#[derive(Parser)]
#[command(
    name = "iaas-select",
    version,
    about = "Pick an IaaS provider from short free trials and provider signatures",
    long_about = "Pick an IaaS provider from short free trials and provider signatures.\n\
        \n\
        The pipeline: aggregate past trial observations into a per-provider\n\
        signature (`signature`), choose which demands to exercise during a\n\
        free trial (`plan`), extrapolate trial measurements across a full\n\
        horizon (`discover`), and order providers by how well predictions\n\
        meet a consumer's requirements (`rank`). `experiment` runs the whole\n\
        pipeline against synthetic providers for evaluation.\n\
        \n\
        All JSON documents carry a top-level \"schema\": 1 field. Exit codes:\n\
        0 success, 1 usage or I/O error, 2 validation error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Signature(SignatureArgs),
    Plan(PlanArgs),
    Discover(DiscoverArgs),
    Rank(RankArgs),
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    /// Most frequent demands first.
    #[value(name = "FG")]
    Fg,
    /// Largest demands first.
    #[value(name = "RG")]
    Rg,
    /// Half frequency picks, half largest picks.
    #[value(name = "MG")]
    Mg,
    /// Whole trace split across parallel VMs.
    #[value(name = "EQ")]
    Eq,
}

impl From<SchemeArg> for TrialScheme {
    fn from(arg: SchemeArg) -> Self {
        match arg {
            SchemeArg::Fg => TrialScheme::Fg,
            SchemeArg::Rg => TrialScheme::Rg,
            SchemeArg::Mg => TrialScheme::Mg,
            SchemeArg::Eq => TrialScheme::Eq,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Signature-based discovery: rescale trial observations by the
    /// signature's seasonal profile.
    Spd,
    /// Local discovery: replay the nearest trial observation unchanged.
    Lpd,
}

impl MethodArg {
    fn as_str(self) -> &'static str {
        match self {
            MethodArg::Spd => "spd",
            MethodArg::Lpd => "lpd",
        }
    }
}

const SIGNATURE_SCHEMAS: &str = "\
FILE FORMATS

Observation JSON (one per past trial user):
  { \"schema\": 1, \"user_id\": \"u1\", \"window_start\": 1, \"window_end\": 30,
    \"attributes\": { \"cpu\": [<one value per window timestamp>], ... } }
The windows must collectively cover every timestamp of [1, period].

Signature JSON (output):
  { \"schema\": 1, \"provider_id\": \"...\", \"period\": 360,
    \"attributes\": { \"cpu\": [<period values>], ... },
    \"coverage\": [<observations per timestamp>],
    \"flat_attributes\": [<attributes with no variation>] }";

const PLAN_SCHEMAS: &str = "\
FILE FORMATS

Workload CSV: header `t,demand`, one row per timestamp, timestamps
consecutive from the first row. `#` starts a comment; a comment of the
form `# capacity = <value>` sets the capacity unless --capacity is given.

Plan JSON (output):
  { \"schema\": 1, \"scheme\": \"FG\", \"capacity\": 100.0,
    \"streams\": [[ { \"trial_slot\": 1, \"demand\": 5.0,
                      \"source_timestamp\": 3 }, ... ]] }
FG/RG/MG plans hold one stream; EQ plans hold one stream per VM.";

const DISCOVER_SCHEMAS: &str = "\
FILE FORMATS

Workload CSV: header `t,demand`, one row per timestamp, timestamps
consecutive from the first row. `#` starts a comment; a comment of the
form `# capacity = <value>` sets the capacity unless --capacity is given.

Experience JSON: what the trial measured, re-paired with its plan here:
  { \"schema\": 1, \"provider_id\": \"...\", \"window_start\": 151,
    \"window_end\": 180,
    \"streams\": [ { \"cpu\": [<one value per trial slot>], ... }, ... ] }

Signature JSON: as produced by `iaas-select signature`. Required for
both methods so the input set stays uniform; only spd consults it.

Prediction JSON (output):
  { \"schema\": 1, \"provider_id\": \"...\", \"method\": \"spd\",
    \"predicted\": { \"attributes\": { \"cpu\": { \"start_index\": 1,
                                            \"values\": [...] }, ... } },
    \"matched\": [<plan entry backing each timestamp>] }";

const RANK_SCHEMAS: &str = "\
FILE FORMATS

Request JSON: the consumer's demand and required QoS from timestamp 1:
  { \"schema\": 1, \"capacity\": 100.0, \"demands\": [...],
    \"attributes\": { \"cpu\": [<required value per timestamp>], ... } }

Predictions: outputs of `iaas-select discover`, one per provider, all
produced by the same method and covering the request's horizon.

Ranking JSON (output):
  { \"schema\": 1, \"method\": \"SPD\", \"scores\": { \"p1\": 0.12, ... },
    \"order\": [\"p3\", \"p1\", ...],
    \"constant_flags\": { ... attributes scored by the 0.5 midpoint ... } }
Lower scores are better; ties break by provider id.";

const EXPERIMENT_SCHEMAS: &str = "\
CONFIG FORMAT

The config JSON ({ \"schema\": 1, ... }) either names a built-in scenario
or describes providers explicitly:

  scenario mode:  { \"scenario\": \"headline\" | \"ranking\" | \"exactness\",
                    \"seed\": 7, ...non-structural overrides... }
  explicit mode:  { \"profiles\": [...], \"workload_csv\": \"trace.csv\"
                    or \"demands\": [...] with \"capacity\": <v>, ... }

Overridable knobs in both modes: trial_start_day, trial_length_days,
schemes, confidence_threshold, eq_vm_count, signature_users,
ranking_scheme. Explicit mode also honors horizon_days (the workload is
tiled cyclically to reach it). A profile lists provider_id, base_perf
per workload level, per-attribute seasonal factors, noise_std and
rng_seed; the first profile doubles as the reference whose noise-free
performance becomes the consumer's required QoS.

OUTPUTS (in --out-dir)

  report.json    full machine-readable results: per-cell confidence and
                 prediction errors, all four rankings, rank correlations
  rankings.csv   one row per ranking method: method,rank_1,...,rank_n
  nrmse.csv      provider,scheme,confidence,passed,spd_nrmse,lpd_nrmse";

/// Aggregate past trial observations into a provider signature.
#[derive(clap::Args)]
#[command(after_long_help = SIGNATURE_SCHEMAS)]
struct SignatureArgs {
    /// Provider the observations were measured against.
    #[arg(long)]
    provider: String,
    /// Signature length in timestamps (usually one seasonal cycle).
    #[arg(long)]
    period: usize,
    /// Observation JSON files, one per past trial user.
    #[arg(long, num_args = 1.., required = true)]
    observations: Vec<PathBuf>,
    /// Where to write the signature JSON.
    #[arg(long)]
    out: PathBuf,
}

/// Choose which demands a free trial should exercise.
#[derive(clap::Args)]
#[command(after_long_help = PLAN_SCHEMAS)]
struct PlanArgs {
    /// Workload trace CSV.
    #[arg(long)]
    workload: PathBuf,
    /// Capacity when the CSV does not carry a `# capacity` comment.
    #[arg(long)]
    capacity: Option<f64>,
    /// Tile the trace cyclically to this many timestamps first.
    #[arg(long, value_name = "TIMESTAMPS")]
    expand: Option<usize>,
    /// Selection scheme.
    #[arg(long, value_enum, ignore_case = true)]
    scheme: SchemeArg,
    /// Trial length: demand slots per stream.
    #[arg(long, value_name = "SLOTS")]
    trial_days: usize,
    /// Parallel VM count (EQ scheme only).
    #[arg(long)]
    vms: Option<usize>,
    /// Where to write the plan JSON.
    #[arg(long)]
    out: PathBuf,
}

/// Predict full-horizon performance from one trial's measurements.
#[derive(clap::Args)]
#[command(after_long_help = DISCOVER_SCHEMAS)]
struct DiscoverArgs {
    /// Plan JSON the trial executed.
    #[arg(long)]
    plan: PathBuf,
    /// Experience JSON with the trial's measurements.
    #[arg(long)]
    experience: PathBuf,
    /// Signature JSON of the provider under test.
    #[arg(long)]
    signature: PathBuf,
    /// Workload trace CSV to predict over.
    #[arg(long)]
    workload: PathBuf,
    /// Capacity when the CSV does not carry a `# capacity` comment.
    #[arg(long)]
    capacity: Option<f64>,
    /// Tile the trace cyclically to this many timestamps first.
    #[arg(long, value_name = "TIMESTAMPS")]
    expand: Option<usize>,
    /// Prediction rule.
    #[arg(long, value_enum, ignore_case = true)]
    method: MethodArg,
    /// Where to write the prediction JSON.
    #[arg(long)]
    out: PathBuf,
}

/// Order providers by how well predictions meet a consumer's request.
#[derive(clap::Args)]
#[command(after_long_help = RANK_SCHEMAS)]
struct RankArgs {
    /// Request JSON with the consumer's demand and required QoS.
    #[arg(long)]
    request: PathBuf,
    /// Prediction JSON files, one per provider, same method.
    #[arg(long, num_args = 1.., required = true)]
    predictions: Vec<PathBuf>,
    /// Where to write the ranking JSON.
    #[arg(long)]
    out: PathBuf,
}

/// Run the synthetic end-to-end evaluation and write its reports.
#[derive(clap::Args)]
#[command(
    after_long_help = EXPERIMENT_SCHEMAS,
    group = ArgGroup::new("setup").args(["config", "scenario"]).required(true).multiple(true)
)]
struct ExperimentArgs {
    /// Experiment config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: headline, ranking or exactness.
    #[arg(long)]
    scenario: Option<String>,
    /// Master seed; every random stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json, rankings.csv and nrmse.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap routes --help/--version here too; only real usage
            // errors carry a nonzero code.
            let failed = err.exit_code() != 0;
            let _ = err.print();
            return ExitCode::from(if failed { EXIT_USAGE_OR_IO } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Signature(args) => run_signature(args),
        Command::Plan(args) => run_plan(args),
        Command::Discover(args) => run_discover(args),
        Command::Rank(args) => run_rank(args),
        Command::Experiment(args) => run_experiment_cmd(args),
    }
}

fn run_signature(args: SignatureArgs) -> Result<(), Failure> {
    let mut observations = Vec::with_capacity(args.observations.len());
    for path in &args.observations {
        let file: ObservationFile = at(path, read_json(path))?;
        observations.push(at(path, file.into_observation())?);
    }
    let signature = generate_signature(&args.provider, &observations, args.period)?;
    at(
        &args.out,
        write_json(&args.out, &SignatureFile::from_signature(&signature)),
    )?;
    println!(
        "signature for {}: {} attributes over {} timestamps, {} observations -> {}",
        signature.provider_id(),
        signature.matrix().attribute_count(),
        signature.period(),
        observations.len(),
        args.out.display()
    );
    Ok(())
}

fn load_workload(
    path: &Path,
    capacity: Option<f64>,
    expand: Option<usize>,
) -> Result<iaas_select::series::WorkloadSeries, Failure> {
    let workload = at(path, read_workload_csv(path, capacity))?;
    match expand {
        Some(horizon) => Ok(expand_workload(&workload, horizon)?),
        None => Ok(workload),
    }
}

fn run_plan(args: PlanArgs) -> Result<(), Failure> {
    let workload = load_workload(&args.workload, args.capacity, args.expand)?;
    let plan = match (args.scheme, args.vms) {
        (SchemeArg::Eq, Some(vms)) => select_trial_workloads_eq(&workload, args.trial_days, vms)?,
        (SchemeArg::Eq, None) => {
            return Err(Error::InvalidConfig(
                "the EQ scheme needs --vms".to_string(),
            ))?
        }
        (_, Some(_)) => {
            return Err(Error::InvalidConfig(
                "--vms only applies to the EQ scheme".to_string(),
            ))?
        }
        (scheme, None) => select_trial_workloads(&workload, args.trial_days, scheme.into())?,
    };
    at(&args.out, write_json(&args.out, &plan))?;
    println!(
        "{} plan: {} stream(s) x {} slots -> {}",
        plan.scheme,
        plan.streams.len(),
        plan.slots_per_stream(),
        args.out.display()
    );
    Ok(())
}

fn run_discover(args: DiscoverArgs) -> Result<(), Failure> {
    let plan: TrialPlan = at(&args.plan, read_json(&args.plan))?;
    let experience_file: ExperienceFile = at(&args.experience, read_json(&args.experience))?;
    let experience = at(&args.experience, experience_file.into_experience(plan))?;
    let signature_file: SignatureFile = at(&args.signature, read_json(&args.signature))?;
    let signature = at(&args.signature, signature_file.into_signature())?;
    let workload = load_workload(&args.workload, args.capacity, args.expand)?;

    let prediction = match args.method {
        MethodArg::Spd => spd_discover(&workload, &experience, &signature)?,
        MethodArg::Lpd => lpd_discover(&workload, &experience)?,
    };
    at(&args.out, write_json(&args.out, &prediction))?;
    println!(
        "{} prediction for {}: {} timestamps -> {}",
        args.method.as_str(),
        prediction.provider_id,
        prediction.predicted.series_len(),
        args.out.display()
    );
    Ok(())
}

fn run_rank(args: RankArgs) -> Result<(), Failure> {
    let request_file: RequestFile = at(&args.request, read_json(&args.request))?;
    let request = at(&args.request, request_file.into_request())?;
    let mut predictions = Vec::with_capacity(args.predictions.len());
    for path in &args.predictions {
        predictions.push(at(path, read_json(path))?);
    }
    let report = rank_providers(&request, &predictions)?;
    at(&args.out, write_json(&args.out, &report))?;
    println!(
        "{} ranking: {} -> {}",
        report.method.as_str(),
        report.order.join(" > "),
        args.out.display()
    );
    Ok(())
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<(), Failure> {
    let mut spec: ExperimentSpec = match &args.config {
        Some(path) => at(path, read_json(path))?,
        None => ExperimentSpec::default(),
    };
    if args.scenario.is_some() {
        spec.scenario = args.scenario.clone();
    }
    if args.seed.is_some() {
        spec.seed = args.seed;
    }

    let scenario = resolve_experiment(&spec)?;
    let report = run_experiment(&scenario.config, &scenario.request, &scenario.profiles)?;

    fs::create_dir_all(&args.out_dir).map_err(|err| Failure {
        code: EXIT_USAGE_OR_IO,
        message: format!("{}: {err}", args.out_dir.display()),
    })?;
    let report_path = args.out_dir.join("report.json");
    at(&report_path, write_json(&report_path, &report))?;
    let rankings_path = args.out_dir.join("rankings.csv");
    at(
        &rankings_path,
        fs::write(&rankings_path, rankings_csv(&report.rankings)).map_err(Error::from),
    )?;
    let nrmse_path = args.out_dir.join("nrmse.csv");
    at(
        &nrmse_path,
        fs::write(&nrmse_path, nrmse_csv(&report.cells)).map_err(Error::from),
    )?;

    println!("scenario: {}", scenario.name);
    println!("seed: {}", scenario.config.seed);
    println!(
        "providers: {}, schemes: {}",
        report.providers.len(),
        scenario.config.schemes.len()
    );
    for entry in &report.kendall_vs_expected {
        println!(
            "kendall tau vs expected ({}, {} providers): {:.3}",
            entry.method.as_str(),
            entry.providers_compared,
            entry.tau
        );
    }
    for path in [&report_path, &rankings_path, &nrmse_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}
