use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use slab_core::harness::SearchStrategy;
use slab_core::stabilizer::{line_partition, stabilizer_fast};
use slab_core::{
    bound_report, parse_set, run_campaign, BoundConstants, Campaign, CampaignConfig, FieldCtx,
    OutputFormat, Sl2,
};

#[derive(Parser)]
#[command(
    name = "slab",
    version,
    about = "Stabilizers of point sets in F_q^2 under SL2(F_q)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field parameters and an arithmetic self-test.
    Field(FieldArgs),
    /// Stabilizer of one set with every bound evaluated.
    Stab(SetArgs),
    /// Print the points of a set spec.
    Family(SetArgs),
    /// Subset sweeps and family checks.
    Exhaustive(CampaignArgs),
    /// Incidence bounds for pair-line configurations or random instances.
    Incidence(CampaignArgs),
    /// Triple-counting audit of line-multiplicity classes.
    Audit(CampaignArgs),
    /// Ranked search for sets with large stabilizers.
    Search(SearchArgs),
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    r: u32,
}

#[derive(Args)]
struct SetArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Set spec, e.g. `family:subfield-plane:sub-r=1` or `points:(1,0);(0,1)`.
    #[arg(long)]
    set: String,
    /// List the members of R_E.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    constants: ConstantArgs,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.75)]
    beta: f64,
}

impl ConstantArgs {
    fn to_constants(&self) -> BoundConstants {
        BoundConstants {
            c: self.c,
            c1: self.c1,
            c2: self.c2,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Campaign name; defaults to the one matching the subcommand.
    #[arg(long)]
    campaign: Option<String>,
    /// Set specs (repeatable).
    #[arg(long)]
    set: Vec<String>,
    #[command(flatten)]
    constants: ConstantArgs,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "SLAB_WORKERS")]
    workers: Option<usize>,
    /// First subset code of a checkpointed sweep.
    #[arg(long)]
    start: Option<u64>,
    /// End (exclusive) of a checkpointed sweep.
    #[arg(long)]
    end: Option<u64>,
    /// Allow a sampled subset sweep at q = 5.
    #[arg(long)]
    allow_sampled: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    /// `orbit-union` or `random`.
    #[arg(long, default_value = "orbit-union")]
    strategy: String,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Field(a) => field(&a),
        Command::Stab(a) => stab(&a),
        Command::Family(a) => {
            let f = FieldCtx::new(a.field.p, a.field.r)?;
            let e = parse_set(&f, &a.set)?;
            println!("{}", e.to_text());
            println!("size: {}", e.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Exhaustive(a) => campaign(&a, Campaign::ExhaustiveSubsets, None),
        Command::Incidence(a) => campaign(&a, Campaign::IncidenceReport, None),
        Command::Audit(a) => campaign(&a, Campaign::ClassAudit, None),
        Command::Search(a) => campaign(
            &a.campaign,
            Campaign::SearchExtremal,
            Some(a.strategy.parse()?),
        ),
    }
}

fn field(a: &FieldArgs) -> Result<ExitCode> {
    let f = FieldCtx::new(a.p, a.r)?;
    let modulus: Vec<String> = f.modulus().iter().map(u32::to_string).collect();
    println!("q: {}", f.q());
    println!("modulus (constant term first): [{}]", modulus.join(","));
    println!("generator: {}", f.generator());
    println!("|SL2|: {}", Sl2::new(&f).order());
    let report = f.self_test(1000, 0);
    println!(
        "self-test: {} triples, {} failures",
        report.triples_checked,
        report.failures.len()
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn stab(a: &SetArgs) -> Result<ExitCode> {
    let f = FieldCtx::new(a.field.p, a.field.r)?;
    let e = parse_set(&f, &a.set)?;
    let rep = bound_report(&f, &e, &a.constants.to_constants())?;
    let partition = line_partition(&f, &e);
    println!("set: {}", e.to_text());
    println!(
        "|E|: {}  |E\\0|: {}  lines meeting: {}",
        rep.size, rep.size_punctured, rep.lines_meeting
    );
    let classes: Vec<String> = partition
        .classes
        .iter()
        .map(|(m1, ls)| format!("{}x{}", ls.len(), m1))
        .collect();
    println!("classes (lines x points): {}", classes.join(" "));
    println!("|R_E|: {}", rep.r_e);
    let ratio = |x: Option<f64>| {
        x.map(slab_core::harness::format_ratio)
            .unwrap_or_else(|| "-".into())
    };
    println!(
        "|R_E|/|E\\0|^1.5: {}  |R_E|/|E|^1.5: {}",
        ratio(rep.three_halves.ratio),
        ratio(rep.three_halves_ratio_full)
    );
    for row in [&rep.two_line, &rep.line_set, &rep.p_power, &rep.quadratic] {
        if row.applicable {
            println!(
                "{}: rhs {}  ratio {}{}",
                row.name,
                row.rhs,
                ratio(row.ratio),
                if row.violated { "  VIOLATED" } else { "" }
            );
        }
    }
    println!(
        "containment: hypotheses {}  collinear {}",
        rep.containment.hypotheses_met, rep.collinear
    );
    if a.list && e.len_punctured() > 0 {
        for m in stabilizer_fast(&f, &e)? {
            println!("{m}");
        }
    }
    Ok(if rep.any_violation() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn campaign(
    a: &CampaignArgs,
    default: Campaign,
    strategy: Option<SearchStrategy>,
) -> Result<ExitCode> {
    let kind: Campaign = match &a.campaign {
        Some(name) => name.parse()?,
        None => default,
    };
    let mut config = CampaignConfig::new(a.field.p, a.field.r, kind);
    config.constants = a.constants.to_constants();
    config.budget = a.budget;
    config.seed = a.seed;
    config.workers = a.workers;
    config.sets = a.set.clone();
    config.allow_sampled = a.allow_sampled;
    config.range = match (a.start, a.end) {
        (None, None) => None,
        (start, Some(end)) => Some(start.unwrap_or(0)..end),
        (Some(_), None) => bail!("--start needs --end"),
    };
    if let Some(s) = strategy {
        config.strategy = s;
    }
    let format: OutputFormat = a.format.parse()?;

    let out = run_campaign(&config)?;
    match &a.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            out.write(&mut w, format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            out.write(&mut w, format)?;
            w.flush()?;
        }
    }
    eprintln!("{}", out.summary);
    Ok(if out.summary.failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}
