//! `roundtax`: estimate the cash-rounding tax from distribution files.
//!
//! Exit codes: 0 success, 2 input or format error, 3 infeasible scenario,
//! 4 internal invariant breach.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roundtax::distributions::{self, LoadOptions, StoreProfile, REVENUE_SHARE_TOLERANCE};
use roundtax::expectation::{basket_residues, expected_tax_per_transaction};
use roundtax::report::{group_thousands, KeyValueDoc, RenderOptions, ReportContext, TableReport};
use roundtax::scenario::{self, Market, ScenarioFile, Sense, ShareWeights, StoreTax};
use roundtax::simulation::{sample_to_csv, simulate, SimulationConfig, DEFAULT_TRANSACTIONS};
use roundtax::{Error, RoundingRule};

#[derive(Parser, Debug)]
#[command(name = "roundtax", version, about = "Estimate the consumer cost of cash rounding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact expected tax per cash transaction for every store type.
    Expect(ExpectArgs),
    /// Monte Carlo estimate of the tax per cash transaction.
    Simulate(SimulateArgs),
    /// Annual totals under a fixed cash-share scenario.
    Aggregate(AggregateArgs),
    /// Cash shares that maximize or minimize the annual total.
    Extremize(ExtremizeArgs),
    /// Per-store table under equal, maximizing and minimizing cash shares.
    Report(ReportArgs),
    /// Write plot-ready CSV files for the input distributions.
    PlotData(PlotDataArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Directory holding endings.csv, baskets.csv and profiles.csv.
    #[arg(long)]
    profiles: PathBuf,

    /// Allowed gap between summed revenue shares and 1.
    #[arg(long, default_value_t = REVENUE_SHARE_TOLERANCE)]
    share_tolerance: f64,

    /// Rounding rule: israel_2008, symmetric_<grid>, or "grid=..; down=..; up=..".
    #[arg(long, default_value = "israel_2008")]
    rule: String,

    /// Write a machine-readable key=value summary to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TaxSourceArgs {
    /// Take per-transaction taxes from a `store,tax_per_txn` file instead of
    /// computing them; only profiles.csv is then read from --profiles.
    #[arg(long)]
    taxes: Option<PathBuf>,

    /// Estimate taxes by simulation instead of the exact expectation.
    #[arg(long, conflicts_with = "taxes")]
    simulate: bool,

    #[arg(long, default_value_t = DEFAULT_TRANSACTIONS)]
    n: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ExpectArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Transactions per store type.
    #[arg(long, default_value_t = DEFAULT_TRANSACTIONS)]
    n: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Only simulate this store type.
    #[arg(long)]
    store: Option<String>,

    /// Directory to write one `<store>.csv` raw-sample file per store type.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AggregateArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    taxes: TaxSourceArgs,

    /// Scenario file of `store=share` lines.
    #[arg(long)]
    scenario: PathBuf,

    /// Total annual market revenue, NIS.
    #[arg(long, default_value_t = ReportContext::ISRAEL_2013.total_revenue)]
    total_revenue: f64,
}

#[derive(Args, Debug)]
struct ExtremizeArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    taxes: TaxSourceArgs,

    /// Target overall cash share.
    #[arg(long, required_unless_present = "scenario")]
    overall: Option<f64>,

    /// Scenario file supplying `overall=` when --overall is absent.
    #[arg(long)]
    scenario: Option<PathBuf>,

    #[arg(long, default_value = "max")]
    sense: String,

    /// What the overall share is averaged over: revenue or transactions.
    #[arg(long, default_value = "revenue")]
    weights: String,

    #[arg(long, default_value_t = ReportContext::ISRAEL_2013.total_revenue)]
    total_revenue: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    taxes: TaxSourceArgs,

    #[arg(long, default_value_t = 0.25)]
    overall: f64,

    #[arg(long, default_value = "revenue")]
    weights: String,

    /// Print tax per person in NIS and US cents.
    #[arg(long)]
    per_capita: bool,

    /// Print the totals as a share of market revenue.
    #[arg(long)]
    share_of_revenue: bool,

    #[arg(long, default_value_t = ReportContext::ISRAEL_2013.total_revenue)]
    total_revenue: f64,

    #[arg(long, default_value_t = ReportContext::ISRAEL_2013.population)]
    population: f64,

    /// NIS per USD.
    #[arg(long, default_value_t = ReportContext::ISRAEL_2013.exchange_rate)]
    exchange_rate: f64,
}

#[derive(Args, Debug)]
struct PlotDataArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Directory to write endings.csv, baskets.csv and residues.csv into.
    #[arg(long)]
    out_dir: PathBuf,
}

/// Files to write once everything has succeeded.
#[derive(Default)]
struct Output {
    stdout: String,
    files: Vec<(PathBuf, String)>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => match write_output(output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("roundtax: {e}");
                ExitCode::from(exit_code(&e))
            }
        },
        Err(e) => {
            eprintln!("roundtax: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write_output(output: Output) -> roundtax::Result<()> {
    for (path, content) in &output.files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_owned(),
                source,
            })?;
        }
        fs::write(path, content).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    print!("{}", output.stdout);
    Ok(())
}

fn run(command: Command) -> roundtax::Result<Output> {
    match command {
        Command::Expect(a) => expect(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Extremize(a) => extremize(a),
        Command::Report(a) => report(a),
        Command::PlotData(a) => plot_data(a),
    }
}

fn read(path: &Path) -> roundtax::Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            share_tolerance: self.share_tolerance,
        }
    }

    fn rule(&self) -> roundtax::Result<RoundingRule> {
        self.rule.parse()
    }

    fn profiles(&self) -> roundtax::Result<Vec<StoreProfile>> {
        distributions::load_profile_dir(&self.profiles, &self.options())
    }

    fn finish(&self, mut output: Output, doc: KeyValueDoc) -> Output {
        if let Some(path) = &self.out {
            output.files.push((path.clone(), doc.to_string()));
        }
        output
    }
}

fn store_taxes(data: &DataArgs, source: &TaxSourceArgs) -> roundtax::Result<(Vec<StoreTax>, String)> {
    if let Some(path) = &source.taxes {
        let stats = distributions::load_stats_dir(&data.profiles, &data.options())?;
        let taxes = scenario::parse_taxes(&path.display().to_string(), &read(path)?)?;
        return Ok((scenario::join_taxes(stats, &taxes)?, format!("file {}", path.display())));
    }
    let rule = data.rule()?;
    let profiles = data.profiles()?;
    let mut out = Vec::with_capacity(profiles.len());
    for p in profiles {
        let tax = if source.simulate {
            simulate(&p, &SimulationConfig::new(source.n, source.seed, rule.clone()))?.mean_tax
        } else {
            expected_tax_per_transaction(&p, &rule)?
        };
        out.push(StoreTax::new(p.stats, tax));
    }
    let how = if source.simulate {
        format!("simulation (n={}, seed={}, rule {rule})", source.n, source.seed)
    } else {
        format!("exact expectation (rule {rule})")
    };
    Ok((out, how))
}

fn expect(args: ExpectArgs) -> roundtax::Result<Output> {
    let rule = args.data.rule()?;
    let profiles = args.data.profiles()?;
    let mut doc = KeyValueDoc::new();
    doc.push("report.rule", &rule);
    let mut text = format!("Exact expected rounding tax per cash transaction, rule {rule}\n\n");
    let _ = writeln!(text, "{:<26} {:>14} {:>12}", "Store type", "Tax/txn (NIS)", "Items/trip");
    for p in &profiles {
        let tax = expected_tax_per_transaction(p, &rule)?;
        if tax.abs() >= f64::from(rule.grid()) / 100.0 {
            return Err(Error::Invariant(format!("{}: |tax| exceeds one grid step", p.name())));
        }
        let _ = writeln!(text, "{:<26} {:>14.4} {:>12.2}", p.name(), tax, p.avg_items_per_trip());
        doc.push(format!("{}.tax_per_txn", p.name()), tax);
        doc.push(format!("{}.avg_items_per_trip", p.name()), p.avg_items_per_trip());
    }
    Ok(args.data.finish(Output { stdout: text, ..Output::default() }, doc))
}

fn simulate_cmd(args: SimulateArgs) -> roundtax::Result<Output> {
    let rule = args.data.rule()?;
    let mut profiles = args.data.profiles()?;
    if let Some(store) = &args.store {
        profiles.retain(|p| p.name() == store);
        if profiles.is_empty() {
            return Err(Error::Invalid(format!("no store type named {store:?}")));
        }
    }
    let mut output = Output::default();
    let mut doc = KeyValueDoc::new();
    doc.push("report.rule", &rule);
    doc.push("report.n", args.n);
    doc.push("report.seed", args.seed);
    let mut text = format!(
        "Simulated rounding tax per cash transaction, rule {rule}, {} transactions, seed {}\n\n",
        args.n, args.seed
    );
    let _ = writeln!(
        text,
        "{:<26} {:>12} {:>12} {:>12}",
        "Store type", "Mean (NIS)", "Std. error", "Exact"
    );
    for p in &profiles {
        let mut config = SimulationConfig::new(args.n, args.seed, rule.clone());
        config.keep_sample = args.dump.is_some();
        let r = simulate(p, &config)?;
        let exact = expected_tax_per_transaction(p, &rule)?;
        let bound = f64::from(rule.grid()) / 100.0;
        if !(r.std_error >= 0.0 && r.mean_tax.abs() < bound) {
            return Err(Error::Invariant(format!("{}: simulated mean out of range", p.name())));
        }
        let _ = writeln!(
            text,
            "{:<26} {:>12.6} {:>12.6} {:>12.6}",
            p.name(),
            r.mean_tax,
            r.std_error,
            exact
        );
        doc.push(format!("{}.mean_tax", p.name()), r.mean_tax);
        doc.push(format!("{}.std_error", p.name()), r.std_error);
        doc.push(format!("{}.exact_tax", p.name()), exact);
        if let (Some(dir), Some(sample)) = (&args.dump, &r.sample) {
            output
                .files
                .push((dir.join(format!("{}.csv", p.name())), sample_to_csv(sample)));
        }
    }
    output.stdout = text;
    Ok(args.data.finish(output, doc))
}

fn aggregate(args: AggregateArgs) -> roundtax::Result<Output> {
    let (stores, how) = store_taxes(&args.data, &args.taxes)?;
    let market = Market::new(stores, args.total_revenue)?;
    let file = ScenarioFile::parse(&args.scenario.display().to_string(), &read(&args.scenario)?)?;
    let label = args
        .scenario
        .file_stem()
        .map_or_else(|| "scenario".to_owned(), |s| s.to_string_lossy().into_owned());
    let scenario = file.scenario(&label)?;
    let result = market.aggregate(&scenario)?;

    let mut doc = KeyValueDoc::new();
    doc.push("report.scenario", &scenario.label);
    let mut text = format!("Scenario {:?}; taxes from {how}\n\n", scenario.label);
    let _ = writeln!(
        text,
        "{:<26} {:>14} {:>11} {:>14}",
        "Store type", "Tax/txn (NIS)", "Cash share", "Tax (NIS/yr)"
    );
    let mut printed_total = 0i64;
    for (s, agg) in market.stores().iter().zip(&result.per_store) {
        let whole = agg.tax.round() as i64;
        printed_total += whole;
        let _ = writeln!(
            text,
            "{:<26} {:>14.4} {:>10.1}% {:>14}",
            s.name(),
            s.tax_per_transaction,
            agg.cash_share * 100.0,
            group_thousands(whole)
        );
        doc.push(format!("{}.tax_per_txn", s.name()), s.tax_per_transaction);
        doc.push(format!("{}.cash_share", s.name()), agg.cash_share);
        doc.push(format!("{}.tax", s.name()), agg.tax);
    }
    let _ = writeln!(text, "{:<26} {:>14} {:>11} {:>14}", "Total", "", "", group_thousands(printed_total));
    let _ = writeln!(
        text,
        "\nShare of revenue: {:.5}%",
        result.share_of_revenue * 100.0
    );
    doc.push("total.tax", result.total_tax);
    doc.push("total.share_of_revenue", result.share_of_revenue);
    Ok(args.data.finish(Output { stdout: text, ..Output::default() }, doc))
}

fn extremize(args: ExtremizeArgs) -> roundtax::Result<Output> {
    let sense: Sense = args.sense.parse()?;
    let weights: ShareWeights = args.weights.parse()?;
    let overall = match (args.overall, &args.scenario) {
        (Some(o), _) => o,
        (None, Some(path)) => ScenarioFile::parse(&path.display().to_string(), &read(path)?)?
            .overall
            .ok_or_else(|| Error::Invalid(format!("{} has no overall= line", path.display())))?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let (stores, how) = store_taxes(&args.data, &args.taxes)?;
    let market = Market::new(stores, args.total_revenue)?;
    let result = market.extremize(overall, sense, weights)?;
    let shares = result.extremal_shares.as_ref().expect("extremize sets shares");
    let achieved = market.overall_share(shares, weights)?;
    if (achieved - overall).abs() > 1e-9 {
        return Err(Error::Invariant(format!("cash shares average {achieved}, not {overall}")));
    }

    let mut doc = KeyValueDoc::new();
    doc.push("report.sense", sense);
    doc.push("report.weights", weights);
    doc.push("report.overall_share", overall);
    let mut text = format!(
        "{} total rounding tax at overall cash share {:.1}% ({weights}-weighted); taxes from {how}\n\n",
        if sense == Sense::Max { "Maximum" } else { "Minimum" },
        overall * 100.0
    );
    let _ = writeln!(
        text,
        "{:<26} {:>11} {:>14}",
        "Store type", "Cash share", "Tax (NIS/yr)"
    );
    let mut printed_total = 0i64;
    for agg in &result.per_store {
        let whole = agg.tax.round() as i64;
        printed_total += whole;
        let _ = writeln!(
            text,
            "{:<26} {:>10.1}% {:>14}",
            agg.name,
            agg.cash_share * 100.0,
            group_thousands(whole)
        );
        doc.push(format!("{}.cash_share", agg.name), agg.cash_share);
        doc.push(format!("{}.tax", agg.name), agg.tax);
    }
    let _ = writeln!(text, "{:<26} {:>11} {:>14}", "Total", "", group_thousands(printed_total));
    doc.push("total.tax", result.total_tax);
    doc.push("total.share_of_revenue", result.share_of_revenue);
    Ok(args.data.finish(Output { stdout: text, ..Output::default() }, doc))
}

fn report(args: ReportArgs) -> roundtax::Result<Output> {
    let weights: ShareWeights = args.weights.parse()?;
    let ctx = ReportContext::new(args.total_revenue, args.population, args.exchange_rate)?;
    let (stores, how) = store_taxes(&args.data, &args.taxes)?;
    let market = Market::new(stores, ctx.total_revenue)?;
    let report = TableReport::build(&market, args.overall, weights, ctx)?;
    let mut text = format!("Rounding tax estimates; taxes from {how}\n\n");
    text.push_str(&report.render(RenderOptions {
        per_capita: args.per_capita,
        share_of_revenue: args.share_of_revenue,
    }));
    Ok(args.data.finish(Output { stdout: text, ..Output::default() }, report.key_values()))
}

fn plot_data(args: PlotDataArgs) -> roundtax::Result<Output> {
    let profiles = args.data.profiles()?;
    let mut endings = String::from("store,digit,prob\n");
    let mut residues = String::from("store,residue,prob\n");
    for p in &profiles {
        for (d, q) in p.endings.probs().iter().enumerate() {
            let _ = writeln!(endings, "{},{d},{q}", p.name());
        }
        for (r, q) in basket_residues(&p.endings, &p.baskets).probs().iter().enumerate() {
            let _ = writeln!(residues, "{},{r},{q}", p.name());
        }
    }
    let dir = &args.out_dir;
    let output = Output {
        stdout: format!("wrote plot data for {} store types to {}\n", profiles.len(), dir.display()),
        files: vec![
            (dir.join("endings.csv"), endings),
            (dir.join("baskets.csv"), distributions::write_baskets(&profiles)),
            (dir.join("residues.csv"), residues),
        ],
    };
    let mut doc = KeyValueDoc::new();
    doc.push("report.store_types", profiles.len());
    Ok(args.data.finish(output, doc))
}
