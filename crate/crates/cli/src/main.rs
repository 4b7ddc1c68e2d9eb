mod generators;
mod manifest;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use kshatter::allocations::{find_shattered_pair, AllocationBank, PairWitness};
use kshatter::banks::{BankFile, PartitionFamily};
use kshatter::mechanisms::{
    greedy_on_instance, individually_rational, measure_ratio, mir_allocate, mir_menu, run_mir, AuctionInstance,
    InstanceFile, RatioRow,
};
use kshatter::rational::{parse_pq, to_pq};
use kshatter::reductions::{
    disjointness_to_auction, hypergraph_promise, hypergraph_to_packing, packing_to_auction, DisjointnessInstance,
    Hypergraph, PackingInstance, ReductionReport,
};
use kshatter::shattering::{dim_k_with_witness, recursion_bound, sauer_bound, FunctionClassFile};
use kshatter::{Budget, Bundle, Error};

use generators::GeneratorSpec;
use manifest::{render_csv, render_json, RunManifest};

#[derive(Parser)]
#[command(name = "kshatter", version, about = "Multivalued shattering, allocation banks and MIR mechanisms")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on exhaustive enumeration sizes.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Lift the enumeration cap.
    #[arg(long, global = true)]
    override_budget: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall time in the manifest; output is then no longer reproducible.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// k-dimension of a function class file, with a witness.
    Dim {
        class: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
    },
    /// The generalized Sauer bound for (m, n, k, d).
    Bound {
        m: usize,
        n: usize,
        k: usize,
        d: usize,
        /// Evaluate through the recursion instead of the closed form.
        #[arg(long)]
        recursion: bool,
    },
    /// First pair (S, A) of the given sizes shattered by a bank.
    Shatter {
        bank: PathBuf,
        #[arg(long)]
        size_s: usize,
        #[arg(long)]
        size_a: usize,
    },
    /// Run the MIR mechanism with Clarke payments on an instance.
    Simulate { bank: PathBuf, instance: PathBuf },
    /// Worst OPT / achieved of a bank or the greedy algorithm over generated instances.
    #[command(group(ArgGroup::new("solver").required(true).args(["bank", "greedy"])))]
    Ratio {
        #[arg(long)]
        bank: Option<PathBuf>,
        /// Run the greedy algorithm with locality k.
        #[arg(long)]
        greedy: Option<usize>,
        /// Generator, e.g. `single-minded:m=4,n=3,k=2`.
        #[arg(long = "gen")]
        generator: String,
        /// Exit with an invariant violation if the worst ratio exceeds this `p/q`.
        #[arg(long)]
        expect_at_most: Option<String>,
        /// Include per-instance rows in JSON output.
        #[arg(long)]
        rows: bool,
    },
    /// Bundles a bidder can win against the other bids.
    Menu {
        bank: PathBuf,
        instance: PathBuf,
        #[arg(long)]
        bidder: usize,
    },
    /// Run a reduction fixture through the MIR mechanism of a bank.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        fixture: PathBuf,
        bank: PathBuf,
    },
    /// Run a named invariant suite; exits 4 on any violation.
    Verify {
        suite: String,
        /// Random samples per grid point where a suite samples.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReduceKind {
    Packing,
    Hypergraph,
    Disjointness,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Format(&'static str),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Budget { .. } | Error::Construction { .. }) => 3,
            CliError::Lib(Error::Contract(_)) => 4,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            CliError::Format(cmd) => write!(f, "{cmd} has no CSV form; use --format json"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A command's result: JSON, optional CSV rows and an optional invariant failure.
struct Report {
    json: Value,
    csv: Option<(&'static str, Vec<String>)>,
    violation: Option<String>,
}

impl Report {
    fn new(json: Value) -> Self {
        Report {
            json,
            csv: None,
            violation: None,
        }
    }

    fn csv(mut self, header: &'static str, rows: Vec<String>) -> Self {
        self.csv = Some((header, rows));
        self
    }
}

struct Ctx {
    manifest: RunManifest,
    budget: Budget,
    seed: u64,
    csv: bool,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> CliResult<String> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        self.manifest.record_input(path, &bytes);
        String::from_utf8(bytes).map_err(|_| Error::Input(format!("{} is not UTF-8", path.display())).into())
    }

    fn bank(&mut self, path: &Path) -> CliResult<AllocationBank> {
        let text = self.read(path)?;
        Ok(BankFile::parse(&text).and_then(BankFile::into_bank).map_err(|e| in_file(path, e))?)
    }

    fn instance(&mut self, path: &Path) -> CliResult<AuctionInstance> {
        let text = self.read(path)?;
        Ok(InstanceFile::parse(&text).map_err(|e| in_file(path, e))?)
    }
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Input(format!("{}, line {} column {}: {e}", path.display(), e.line(), e.column())).into()
    })
}

fn items_field(b: Bundle) -> String {
    b.items().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let g = &cli.global;
    let budget = match (g.override_budget, g.budget) {
        (true, _) => Budget::unlimited(),
        (false, Some(cap)) => Budget::new(cap),
        (false, None) => Budget::default(),
    };
    let mut ctx = Ctx {
        manifest: RunManifest::new(std::env::args().skip(1).collect(), g.seed, &budget),
        budget,
        seed: g.seed,
        csv: g.format == Format::Csv,
    };
    let outcome = run(&cli.command, &mut ctx).and_then(|report| {
        if g.timing {
            ctx.manifest.wall_time_ms = Some(start.elapsed().as_millis());
        }
        let text = match (g.format, &report.csv) {
            (Format::Json, _) => render_json(&ctx.manifest, &report.json),
            (Format::Csv, Some((header, rows))) => render_csv(&ctx.manifest, header, rows),
            (Format::Csv, None) => return Err(CliError::Format(command_name(&cli.command))),
        };
        print!("{text}");
        Ok(report.violation)
    });
    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(v)) => {
            eprintln!("invariant violation: {v}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dim { .. } => "dim",
        Command::Bound { .. } => "bound",
        Command::Shatter { .. } => "shatter",
        Command::Simulate { .. } => "simulate",
        Command::Ratio { .. } => "ratio",
        Command::Menu { .. } => "menu",
        Command::Reduce { .. } => "reduce",
        Command::Verify { .. } => "verify",
    }
}

fn run(cmd: &Command, ctx: &mut Ctx) -> CliResult<Report> {
    match cmd {
        Command::Dim { class, k } => {
            let text = ctx.read(class)?;
            let class_v = FunctionClassFile::parse(&text).map_err(|e| in_file(class, e))?;
            let rep = dim_k_with_witness(&class_v, *k)?;
            let row = format!("{},{}", rep.k, rep.dim);
            Ok(Report::new(json!(rep)).csv("k,dim", vec![row]))
        }
        Command::Bound {
            m,
            n,
            k,
            d,
            recursion,
        } => {
            let (bound, method) = if *recursion {
                (recursion_bound(*m, *n, *k, *d)?, "recursion")
            } else {
                (sauer_bound(*m, *n, *k, *d)?, "closed-form")
            };
            let row = format!("{m},{n},{k},{d},{bound}");
            let j = json!({"m": m, "n": n, "k": k, "d": d, "bound": bound.to_string(), "method": method});
            Ok(Report::new(j).csv("m,n,k,d,bound", vec![row]))
        }
        Command::Shatter { bank, size_s, size_a } => {
            let b = ctx.bank(bank)?;
            let pair = find_shattered_pair(&b, *size_s, *size_a, &ctx.budget)?;
            let row = match &pair {
                Some(p) => format!(
                    "true,{},{}",
                    items_field(p.items),
                    p.bidders.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
                ),
                None => "false,,".to_string(),
            };
            let j = json!({"size_s": size_s, "size_a": size_a, "pair": pair});
            Ok(Report::new(j).csv("found,items,bidders", vec![row]))
        }
        Command::Simulate { bank, instance } => {
            let b = ctx.bank(bank)?;
            let inst = ctx.instance(instance)?;
            let out = run_mir(&b, &inst)?;
            let ir = individually_rational(&inst, &out)?;
            let rows = out
                .allocation
                .bundles
                .iter()
                .zip(&out.payments)
                .enumerate()
                .map(|(i, (s, p))| format!("{i},{},{}", items_field(*s), to_pq(p)))
                .collect();
            let j = json!({"outcome": out, "individually_rational": ir});
            Ok(Report::new(j).csv("bidder,bundle,payment", rows))
        }
        Command::Ratio {
            bank,
            greedy,
            generator,
            expect_at_most,
            rows,
        } => {
            let spec = GeneratorSpec::parse(generator)?;
            let bound = expect_at_most.as_deref().map(parse_pq).transpose()?;
            let insts = spec.instances(ctx.seed)?;
            let keep = *rows || ctx.csv;
            let (solver, report) = match (bank, greedy) {
                (Some(path), _) => {
                    let b = ctx.bank(path)?;
                    let rep = measure_ratio(
                        insts,
                        |inst| Ok(mir_allocate(&b, inst)?.welfare(&inst.tables()?)),
                        &ctx.budget,
                        keep,
                    )?;
                    ("bank".to_string(), rep)
                }
                (None, Some(k)) => {
                    let rep = measure_ratio(insts, |inst| Ok(greedy_on_instance(inst, *k)?.welfare), &ctx.budget, keep)?;
                    (format!("greedy k={k}"), rep)
                }
                (None, None) => unreachable!("clap requires a solver"),
            };
            let violation = bound.as_ref().and_then(|b| {
                (!report.within(b)).then(|| {
                    format!(
                        "worst ratio {} exceeds {}",
                        report.worst.as_ref().map_or("none".to_string(), |w| w.to_string()),
                        to_pq(b)
                    )
                })
            });
            let csv_rows = report.rows.iter().map(RatioRow::to_csv).collect();
            let mut j = json!({"solver": solver, "generator": generator, "report": report});
            if !*rows {
                j["report"].as_object_mut().expect("object").remove("rows");
            }
            let mut rep = Report::new(j).csv(RatioRow::CSV_HEADER, csv_rows);
            rep.violation = violation;
            Ok(rep)
        }
        Command::Menu {
            bank,
            instance,
            bidder,
        } => {
            let b = ctx.bank(bank)?;
            let inst = ctx.instance(instance)?;
            let menu = mir_menu(&b, &inst, *bidder, &ctx.budget)?;
            let rows = menu.iter().map(|s| items_field(*s)).collect();
            Ok(Report::new(json!({"bidder": bidder, "menu": menu})).csv("bundle", rows))
        }
        Command::Reduce { kind, fixture, bank } => reduce(*kind, fixture, bank, ctx),
        Command::Verify { suite, samples } => {
            let outcomes = suites::run(suite, ctx.seed, *samples, &ctx.budget)?;
            let failed: Vec<&str> = outcomes
                .iter()
                .filter(|o| o.violations > 0)
                .map(|o| o.suite.as_str())
                .collect();
            let violation = (!failed.is_empty()).then(|| format!("suites failed: {}", failed.join(", ")));
            let rows = outcomes.iter().map(suites::SuiteOutcome::csv_row).collect();
            let j = json!({"passed": failed.is_empty(), "suites": outcomes});
            let mut rep = Report::new(j).csv(suites::CSV_HEADER, rows);
            rep.violation = violation;
            Ok(rep)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PackingFixture {
    instance: PackingInstance,
    #[serde(default)]
    pair: Option<PairWitness>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphFixture {
    graph: Hypergraph,
    #[serde(default)]
    pair: Option<PairWitness>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DisjointnessFixture {
    instance: DisjointnessInstance,
    family: PartitionFamily,
    #[serde(default)]
    pair: Option<PairWitness>,
}

/// Items `0..items` and bidders `0..bidders` unless the fixture names a pair.
fn pair_or_prefix(pair: Option<PairWitness>, items: usize, bidders: usize) -> PairWitness {
    pair.unwrap_or_else(|| PairWitness {
        items: Bundle::full(items),
        bidders: (0..bidders).collect(),
    })
}

fn reduce(kind: ReduceKind, fixture: &Path, bank: &Path, ctx: &mut Ctx) -> CliResult<Report> {
    let text = ctx.read(fixture)?;
    let b = ctx.bank(bank)?;
    let (name, pair, report, extra): (&str, PairWitness, ReductionReport, Option<Value>) = match kind {
        ReduceKind::Packing => {
            let f: PackingFixture = parse_json(fixture, &text)?;
            let i = f.instance;
            let p = PackingInstance::new(i.universe, i.sets, i.threshold, i.multiplicity)?;
            let pair = pair_or_prefix(f.pair, p.universe, p.sets.len());
            let (_, rep) = packing_to_auction(&p, &b, &pair)?;
            ("packing", pair, rep, None)
        }
        ReduceKind::Hypergraph => {
            let f: HypergraphFixture = parse_json(fixture, &text)?;
            let p = hypergraph_to_packing(&f.graph)?;
            let promise = hypergraph_promise(&f.graph)?;
            let pair = pair_or_prefix(f.pair, p.universe, p.sets.len());
            let (_, rep) = packing_to_auction(&p, &b, &pair)?;
            let extra = json!({"hypergraph_promise": promise, "packing": p});
            ("hypergraph", pair, rep, Some(extra))
        }
        ReduceKind::Disjointness => {
            let f: DisjointnessFixture = parse_json(fixture, &text)?;
            let di = DisjointnessInstance::new(f.instance.t, f.instance.sets)?;
            let fam = PartitionFamily::new(f.family.universe, f.family.parts, f.family.partitions)?;
            let pair = pair_or_prefix(f.pair, fam.universe, di.sets.len());
            let (_, rep) = disjointness_to_auction(&di, &fam, &b, &pair)?;
            ("disjointness", pair, rep, None)
        }
    };
    let checked = report.promise != kshatter::reductions::Promise::Outside;
    let row = format!(
        "{name},{},{},{},{}",
        to_pq(&report.welfare),
        to_pq(&report.threshold),
        report.decision,
        serde_json::to_value(report.promise).expect("serializable").as_str().expect("string")
    );
    let mut j = json!({"kind": name, "pair": pair, "report": report, "promise_checked": checked});
    if !checked {
        j["note"] = json!("promise not checked: the input is outside the promise, the decision carries no guarantee");
    }
    if let Some(Value::Object(extra)) = extra {
        j.as_object_mut().expect("object").extend(extra);
    }
    Ok(Report::new(j).csv("kind,welfare,threshold,decision,promise", vec![row]))
}
