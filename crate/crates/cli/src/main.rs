//! `pipeline`: batch runs, standalone stages and table maintenance.
//!
//! Exit status is 0 on success, 2 when a unit-root precondition fails and 1
//! for every other error, including invalid arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsi_core::ardl::{bounds_test, ecm, fit_ardl, select_lags, LagSearch, PssCase};
use fsi_core::diagnostics::{cusumsq_c0_table_source, CUSUMSQ_C0_REPLICATIONS, CUSUMSQ_C0_SEED};
use fsi_core::index::{build_index, IndexRecipe, DEFAULT_INDICATORS};
use fsi_core::pipeline::{
    fmt3, format_table, generate_fixture, render_report, run_pipeline, stars_for_level, stars_for_p, PipelineConfig,
    ReportFormat, FIXTURE_SEED, STAR_NOTE,
};
use fsi_core::unitroot::{
    simulate_df_quantiles, unit_root_battery, DeterministicSpec, LagCriterion, UnitRootOptions, VotingRule,
};
use fsi_core::{load_csv, Error, InfoCriterion, Result};

#[derive(Parser)]
#[command(name = "pipeline", version, about = "Composite-index ARDL bounds-testing pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage from a TOML configuration and write the reports.
    Run(RunArgs),
    /// Composite-index construction.
    #[command(subcommand)]
    Index(IndexCommand),
    /// ADF and Phillips-Perron batteries on the columns of a CSV.
    Unitroot(UnitRootArgs),
    /// Lag search, bounds test and error-correction estimates for one model.
    Bounds(BoundsArgs),
    /// Write the synthetic dataset and its configuration.
    Fixture(FixtureArgs),
    /// Regenerate simulated critical-value tables.
    #[command(subcommand)]
    Maint(MaintCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Abort when a dependent variable is stationary in levels.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value = "both")]
    format: FormatArg,
    /// Output directory; overrides the configuration and PIPELINE_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configuration and PIPELINE_SEED.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Build the index from indicator columns and write it as CSV.
    Build(IndexBuildArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Annual CSV with a year column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "year")]
    year_column: String,
}

#[derive(Args)]
struct IndexBuildArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated indicator columns.
    #[arg(long, value_delimiter = ',')]
    indicators: Option<Vec<String>>,
    /// Indicator whose loading is made positive.
    #[arg(long, default_value = "FOOD_PROD")]
    anchor: String,
    #[arg(long, default_value = "FSI")]
    name: String,
    /// Where to write `year,<name>`; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Sbc,
}

#[derive(Clone, Copy, ValueEnum)]
enum VotingArg {
    AdfOnly,
    Both,
    Either,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Text,
    Json,
}

#[derive(Args)]
struct UnitRootArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Columns to test; all columns when omitted.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Maximum ADF augmentation lag; the Schwert rule when omitted.
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long, value_enum, default_value = "aic")]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value = "adf-only")]
    voting: VotingArg,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    dependent: String,
    /// Comma-separated regressor columns.
    #[arg(long, value_delimiter = ',', required = true)]
    regressors: Vec<String>,
    #[arg(long, default_value_t = 2)]
    p_max: usize,
    #[arg(long, default_value_t = 2)]
    q_max: usize,
    #[arg(long, value_enum, default_value = "aic")]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value = "III")]
    case: CaseArg,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputArg,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = FIXTURE_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum MaintCommand {
    /// Simulate Dickey-Fuller quantiles at the tabulated sample sizes.
    DfTable {
        #[arg(long, default_value_t = 100_000)]
        replications: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Regenerate the CUSUMSQ band table source.
    CusumsqTable {
        #[arg(long, default_value_t = CUSUMSQ_C0_REPLICATIONS)]
        replications: usize,
        #[arg(long, default_value_t = CUSUMSQ_C0_SEED)]
        seed: u64,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn criterion(c: CriterionArg) -> InfoCriterion {
    match c {
        CriterionArg::Aic => InfoCriterion::Aic,
        CriterionArg::Sbc => InfoCriterion::Sbc,
    }
}

fn write_or_print(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialise");
    s.push('\n');
    s
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = PipelineConfig::load(&args.config)?;
    config.apply_env()?;
    config.apply_overrides(args.out, args.seed);
    if args.strict {
        config.output.strict = true;
    }
    let bundle = run_pipeline(&config)?;
    let format = match args.format {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Both => ReportFormat::Both,
    };
    let written = render_report(&bundle, format, &config.output.dir)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    for m in &bundle.models {
        println!(
            "{}: ARDL{} F = {} ({}), ECT = {}{}",
            m.name,
            m.spec.order_label(),
            fmt3(m.bounds.fstat),
            m.bounds.decision,
            fmt3(m.ect.estimate),
            stars_for_p(m.ect.pvalue)
        );
    }
    eprintln!("wrote {} files to {}", written.len(), config.output.dir.display());
    Ok(())
}

fn index_build(args: IndexBuildArgs) -> Result<()> {
    let frame = load_csv(&args.input.input, &args.input.year_column)?;
    let recipe = IndexRecipe {
        name: args.name,
        indicators: args
            .indicators
            .unwrap_or_else(|| DEFAULT_INDICATORS.iter().map(|s| s.to_string()).collect()),
        anchor: args.anchor,
    };
    let (model, series) = build_index(&frame, &recipe)?;
    let rows: Vec<Vec<String>> = model
        .indicators()
        .zip(&model.loadings)
        .map(|(n, l)| vec![n.to_owned(), fmt3(*l)])
        .collect();
    let header = ["Indicator".to_owned(), "Loading".to_owned()];
    eprint!("{}", format_table("First-component loadings", &header, &rows));
    eprintln!(
        "first component explains {} of the variance",
        fmt3(model.explained_variance_ratio[0])
    );
    let out = fsi_core::Frame::new(vec![series])?;
    write_or_print(args.output.as_deref(), &out.to_csv_string(&args.input.year_column))
}

fn unitroot(args: UnitRootArgs) -> Result<()> {
    let frame = load_csv(&args.input.input, &args.input.year_column)?;
    let columns: Vec<String> = args
        .columns
        .unwrap_or_else(|| frame.names().map(str::to_owned).collect());
    let options = UnitRootOptions {
        max_lag: args.max_lag,
        criterion: match args.criterion {
            CriterionArg::Aic => LagCriterion::Aic,
            CriterionArg::Sbc => LagCriterion::Sbc,
        },
        voting: match args.voting {
            VotingArg::AdfOnly => VotingRule::AdfOnly,
            VotingArg::Both => VotingRule::Both,
            VotingArg::Either => VotingRule::Either,
        },
        ..UnitRootOptions::default()
    };
    let mut batteries = Vec::new();
    for spec in [DeterministicSpec::Intercept, DeterministicSpec::TrendAndIntercept] {
        for c in &columns {
            batteries.push(unit_root_battery(frame.column(c)?, spec, &options)?);
        }
    }
    if let OutputArg::Json = args.format {
        print!("{}", json(&batteries));
        return Ok(());
    }
    let cell = |r: &fsi_core::unitroot::UnitRootResult| {
        format!("{}{}", fmt3(r.statistic), stars_for_level(r.strongest_rejection()))
    };
    let header: Vec<String> = [
        "Variable",
        "ADF level",
        "ADF 1st diff",
        "PP level",
        "PP 1st diff",
        "Order",
    ]
    .map(String::from)
    .to_vec();
    for chunk in batteries.chunks(columns.len()) {
        let rows: Vec<Vec<String>> = chunk
            .iter()
            .map(|b| {
                vec![
                    b.variable.clone(),
                    cell(&b.adf_level),
                    cell(&b.adf_difference),
                    cell(&b.pp_level),
                    cell(&b.pp_difference),
                    b.order.to_string(),
                ]
            })
            .collect();
        print!(
            "{}",
            format_table(&format!("Unit root tests ({})", chunk[0].spec.label()), &header, &rows)
        );
    }
    println!("Note: {STAR_NOTE}");
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let frame = load_csv(&args.input.input, &args.input.year_column)?;
    let search = LagSearch {
        p_max: args.p_max,
        q_max: args.q_max,
        criterion: criterion(args.criterion),
        ..LagSearch::default()
    };
    let case = match args.case {
        CaseArg::II => PssCase::II,
        CaseArg::III => PssCase::III,
    };
    let spec = select_lags(&frame, &args.dependent, &args.regressors, &search)?.with_case(case);
    let fit = fit_ardl(&spec, &frame)?;
    let result = bounds_test(&fit, &frame)?;
    let ec = ecm(&fit, &frame)?;
    if let OutputArg::Json = args.format {
        let body = serde_json::json!({ "spec": spec, "bounds": result, "ecm": ec });
        print!("{}", json(&body));
        return Ok(());
    }
    println!(
        "ARDL{} on {}-{} ({} obs), {}",
        spec.order_label(),
        fit.sample.0,
        fit.sample.1,
        fit.fit.nobs,
        case.label()
    );
    let rows: Vec<Vec<String>> = result
        .bands
        .iter()
        .map(|b| vec![b.level.label().to_owned(), fmt3(b.lower), fmt3(b.upper)])
        .collect();
    let header = ["Level", "I(0)", "I(1)"].map(String::from).to_vec();
    print!(
        "{}",
        format_table(
            &format!("Bounds test: F = {}, k = {}", fmt3(result.fstat), result.k),
            &header,
            &rows
        )
    );
    println!("Decision: {}\n", result.decision);
    let est_row = |e: &fsi_core::ardl::Estimate| {
        vec![
            e.name.clone(),
            format!("{}{}", fmt3(e.estimate), stars_for_p(e.pvalue)),
            fmt3(e.stderr),
            fmt3(e.pvalue),
        ]
    };
    let header = ["Term", "Estimate", "Std. error", "p-value"].map(String::from).to_vec();
    let mut rows: Vec<Vec<String>> = ec.short_run.iter().map(est_row).collect();
    rows.push(est_row(&ec.ect));
    print!("{}", format_table("Short-run", &header, &rows));
    let mut rows: Vec<Vec<String>> = ec.long_run.iter().map(est_row).collect();
    rows.push(est_row(&ec.constant));
    print!("{}", format_table("Long-run", &header, &rows));
    println!("Note: {STAR_NOTE}");
    Ok(())
}

fn fixture(args: FixtureArgs) -> Result<()> {
    let f = generate_fixture(args.seed)?;
    for p in f.write(&args.out, args.seed)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn maint(cmd: MaintCommand) -> Result<()> {
    match cmd {
        MaintCommand::DfTable { replications, seed } => {
            let sizes = [25, 50, 100, 250, 500];
            for spec in [DeterministicSpec::Intercept, DeterministicSpec::TrendAndIntercept] {
                let q = simulate_df_quantiles(spec, &sizes, replications, seed)?;
                let rows: Vec<Vec<String>> = q
                    .iter()
                    .map(|(t, v)| vec![t.to_string(), fmt3(v[0]), fmt3(v[1]), fmt3(v[2])])
                    .collect();
                let header = ["T", "1%", "5%", "10%"].map(String::from).to_vec();
                print!(
                    "{}",
                    format_table(&format!("Dickey-Fuller quantiles ({})", spec.label()), &header, &rows)
                );
            }
            Ok(())
        }
        MaintCommand::CusumsqTable {
            replications,
            seed,
            output,
        } => write_or_print(output.as_deref(), &cusumsq_c0_table_source(replications, seed)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Index(IndexCommand::Build(a)) => index_build(a),
        Command::Unitroot(a) => unitroot(a),
        Command::Bounds(a) => bounds(a),
        Command::Fixture(a) => fixture(a),
        Command::Maint(m) => maint(m),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 2 } else { 1 })
        }
    }
}
