//! Verification campaigns: enumerate point sets, evaluate every bound,
//! cross-check stabilizer sizes with an independent route, and emit tables.
//!
//! Output is deterministic for a fixed configuration: work items are
//! evaluated in parallel but collected in enumeration order, and every
//! random choice comes from [`SplitMix64::for_index`] keyed by the item.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::families::{gen_family, parse_set, random_uniform_class, FamilySpec};
use crate::gf::FieldCtx;
use crate::incidence3d::{all_lines, incidence_bound_report, IncidenceInstance, Line3, Point3};
use crate::plane::{Mat2, PointSet, ProjLine, Sl2};
use crate::rng::SplitMix64;
use crate::stabilizer::{
    audit_line_class, bound_report_with, class_incidence, line_partition, lineset_stabilizer,
    stabilizer_brute_with, stabilizer_fast, subgroup_orbits, BoundConstants, BoundReport,
    ClassAudit, PermTable,
};

/// First line of every CSV file.
pub const CSV_VERSION_LINE: &str = "# slab-v1";
/// Largest `q` for a full subset sweep.
pub const EXHAUSTIVE_MAX_Q: u32 = 4;
/// Largest `q` for a sampled subset sweep (needs the override flag).
pub const SAMPLED_EXHAUSTIVE_MAX_Q: u32 = 5;
/// Largest `q` whose rows are cross-checked against the brute-force route.
pub const SPOT_CHECK_MAX_Q: u32 = 9;
/// Percentage of rows cross-checked in the large sweeps.
pub const SPOT_CHECK_PERCENT: u64 = 1;
/// Cap on the number of sets in a two-line sweep.
pub const TWO_LINE_MAX_SETS: u64 = 5_000_000;

const SPOT_SALT: u64 = 0x5350_4f54;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Campaign {
    /// Every subset of F_q^2.
    ExhaustiveSubsets,
    /// Every set supported on exactly two lines through the origin.
    TwoLineExhaustive,
    /// Unions of 3 or 4 lines through the origin, plus random unions of 5.
    LinesetExhaustive,
    /// The named families.
    FamilyVerify,
    /// Every subset to which the `p^{r-1}|E|` bound applies.
    PPowerExhaustive,
    /// Triple-counting audit of each line-multiplicity class.
    ClassAudit,
    /// Incidence bounds for the pair-line configurations of each class, or
    /// random configurations.
    IncidenceReport,
    /// Ranked search for sets with large stabilizers.
    SearchExtremal,
}

impl Campaign {
    pub const ALL: [Campaign; 8] = [
        Campaign::ExhaustiveSubsets,
        Campaign::TwoLineExhaustive,
        Campaign::LinesetExhaustive,
        Campaign::FamilyVerify,
        Campaign::PPowerExhaustive,
        Campaign::ClassAudit,
        Campaign::IncidenceReport,
        Campaign::SearchExtremal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::ExhaustiveSubsets => "exhaustive-subsets",
            Campaign::TwoLineExhaustive => "two-line-exhaustive",
            Campaign::LinesetExhaustive => "lineset-exhaustive",
            Campaign::FamilyVerify => "family-verify",
            Campaign::PPowerExhaustive => "p-power-exhaustive",
            Campaign::ClassAudit => "class-audit",
            Campaign::IncidenceReport => "incidence-report",
            Campaign::SearchExtremal => "search-extremal",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Campaign::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown campaign {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SearchStrategy {
    #[default]
    OrbitUnion,
    Random,
}

impl FromStr for SearchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orbit-union" => Ok(SearchStrategy::OrbitUnion),
            "random" => Ok(SearchStrategy::Random),
            other => Err(Error::Config(format!("unknown search strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub p: u32,
    pub r: u32,
    pub campaign: Campaign,
    pub constants: BoundConstants,
    /// Number of sampled items; each campaign has its own default.
    pub budget: Option<u64>,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Set specs for campaigns that take explicit sets.
    pub sets: Vec<String>,
    /// Subset-code range of a subset sweep, for checkpointed runs.
    pub range: Option<Range<u64>>,
    /// Allows a sampled subset sweep at `q = 5`.
    pub allow_sampled: bool,
    pub strategy: SearchStrategy,
}

impl CampaignConfig {
    pub fn new(p: u32, r: u32, campaign: Campaign) -> Self {
        CampaignConfig {
            p,
            r,
            campaign,
            constants: BoundConstants::default(),
            budget: None,
            seed: 0,
            workers: None,
            sets: Vec::new(),
            range: None,
            allow_sampled: false,
            strategy: SearchStrategy::default(),
        }
    }
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(u64),
    Signed(i64),
    OptInt(Option<u64>),
    Bool(bool),
    /// Printed with six significant digits; empty when absent.
    Ratio(Option<f64>),
    Text(String),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Signed(v) => v.to_string(),
            Value::OptInt(v) => v.map(|v| v.to_string()).unwrap_or_default(),
            Value::Bool(b) => b.to_string(),
            Value::Ratio(v) => v.map(format_ratio).unwrap_or_default(),
            Value::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_u64(*v),
            Value::Signed(v) => s.serialize_i64(*v),
            Value::OptInt(v) => v.serialize(s),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Ratio(v) => v
                .map(|x| format_ratio(x).parse::<f64>().unwrap_or(x))
                .serialize(s),
            Value::Text(t) => s.serialize_str(t),
        }
    }
}

/// Six significant digits in plain decimal notation.
pub fn format_ratio(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Writes the version line and header (when `header`), then the rows.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> Result<()> {
        if header {
            writeln!(out, "{CSV_VERSION_LINE}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        if header {
            w.write_record(&self.columns)?;
        }
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    /// An array of objects keyed by column name, in column order.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Row<'a>(&'a [&'static str], &'a [Value]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0.iter().zip(self.1) {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Row(&self.columns, row))?;
        }
        seq.end()
    }
}

/// One evaluated set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub set: String,
    pub report: BoundReport,
}

const RESULT_COLUMNS: [&str; 22] = [
    "set",
    "size",
    "size_punctured",
    "lines_meeting",
    "r_e",
    "in_origin_line",
    "collinear",
    "small_classes",
    "three_halves_ratio",
    "three_halves_ratio_full",
    "two_line_rhs",
    "two_line_ratio",
    "line_set_rhs",
    "line_set_ratio",
    "p_power_rhs",
    "p_power_ratio",
    "quadratic_rhs",
    "quadratic_ratio",
    "containment_hypotheses",
    "containment_confirmed",
    "violated",
    "violations",
];

impl ResultRow {
    fn values(&self) -> Vec<Value> {
        let r = &self.report;
        let rhs = |row: &crate::stabilizer::BoundRow| {
            Value::OptInt(row.applicable.then_some(row.rhs.round() as u64))
        };
        let violations: Vec<&str> = r.violations().collect();
        vec![
            Value::Text(self.set.clone()),
            Value::Int(r.size as u64),
            Value::Int(r.size_punctured as u64),
            Value::Int(r.lines_meeting as u64),
            Value::Int(r.r_e),
            Value::Bool(r.in_origin_line),
            Value::Bool(r.collinear),
            Value::Bool(r.small_classes),
            Value::Ratio(r.three_halves.ratio),
            Value::Ratio(r.three_halves_ratio_full),
            rhs(&r.two_line),
            Value::Ratio(r.two_line.ratio),
            rhs(&r.line_set),
            Value::Ratio(r.line_set.ratio),
            rhs(&r.p_power),
            Value::Ratio(r.p_power.ratio),
            rhs(&r.quadratic),
            Value::Ratio(r.quadratic.ratio),
            Value::Bool(r.containment.hypotheses_met),
            Value::Bool(r.containment.confirmed),
            Value::Bool(!violations.is_empty()),
            Value::Text(violations.join("|")),
        ]
    }
}

/// Campaign totals. Timing lives here rather than in the table so that
/// tables are byte-identical across runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub campaign: String,
    pub q: u32,
    pub rows: usize,
    /// Largest `|R_E| / |E \ {0}|^{3/2}` over rows meeting at least two lines.
    pub max_three_halves_ratio: Option<f64>,
    pub max_ratio_set: Option<String>,
    /// Largest `|R_E| / |E|^{3/2}` over the same rows.
    pub max_three_halves_ratio_full: Option<f64>,
    /// Largest ratio among rows whose multiplicity classes have at most two
    /// lines each.
    pub small_classes_max_ratio: Option<f64>,
    pub two_line_violations: usize,
    pub line_set_violations: usize,
    pub p_power_violations: usize,
    pub audit_violations: usize,
    pub containment_hypotheses_met: usize,
    pub containment_confirmed: usize,
    /// Rows meeting the containment hypotheses without being collinear.
    pub containment_not_collinear: usize,
    pub spot_checked: usize,
    pub spot_mismatches: usize,
    pub elapsed_ms: u128,
}

impl Summary {
    pub fn violations(&self) -> usize {
        self.two_line_violations
            + self.line_set_violations
            + self.p_power_violations
            + self.audit_violations
    }

    /// Violations of proved bounds or disagreements between routes.
    pub fn failed(&self) -> bool {
        self.violations() > 0 || self.spot_mismatches > 0
    }

    fn absorb(&mut self, row: &ResultRow) {
        let r = &row.report;
        self.rows += 1;
        if let Some(x) = r.three_halves.ratio {
            if self.max_three_halves_ratio.is_none_or(|m| x > m) {
                self.max_three_halves_ratio = Some(x);
                self.max_ratio_set = Some(row.set.clone());
            }
            if r.small_classes {
                self.small_classes_max_ratio =
                    Some(self.small_classes_max_ratio.map_or(x, |m| m.max(x)));
            }
        }
        if let Some(x) = r.three_halves_ratio_full {
            self.max_three_halves_ratio_full =
                Some(self.max_three_halves_ratio_full.map_or(x, |m| m.max(x)));
        }
        self.two_line_violations += usize::from(r.two_line.violated);
        self.line_set_violations += usize::from(r.line_set.violated);
        self.p_power_violations += usize::from(r.p_power.violated);
        self.containment_hypotheses_met += usize::from(r.containment.hypotheses_met);
        self.containment_confirmed += usize::from(r.containment.confirmed);
        self.containment_not_collinear += usize::from(r.containment.hypotheses_met && !r.collinear);
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ratio = |x: Option<f64>| x.map(format_ratio).unwrap_or_else(|| "-".into());
        writeln!(f, "campaign: {} (q = {})", self.campaign, self.q)?;
        writeln!(f, "rows: {}", self.rows)?;
        writeln!(
            f,
            "max |R_E|/|E\\0|^1.5: {}{}",
            ratio(self.max_three_halves_ratio),
            self.max_ratio_set
                .as_ref()
                .map(|s| format!(" at {s}"))
                .unwrap_or_default()
        )?;
        writeln!(
            f,
            "max |R_E|/|E|^1.5: {}",
            ratio(self.max_three_halves_ratio_full)
        )?;
        writeln!(
            f,
            "max ratio with small classes: {}",
            ratio(self.small_classes_max_ratio)
        )?;
        writeln!(
            f,
            "violations: two_line {}, line_set {}, p_power {}, audit {}",
            self.two_line_violations,
            self.line_set_violations,
            self.p_power_violations,
            self.audit_violations
        )?;
        writeln!(
            f,
            "containment: hypotheses met {}, collinear {}, not collinear {}",
            self.containment_hypotheses_met,
            self.containment_confirmed,
            self.containment_not_collinear
        )?;
        writeln!(
            f,
            "cross-checked rows: {} ({} mismatches)",
            self.spot_checked, self.spot_mismatches
        )?;
        write!(f, "elapsed: {} ms", self.elapsed_ms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignOutput {
    pub table: Table,
    pub summary: Summary,
    /// Whether the CSV should carry the version line and header; false for
    /// a resumed range so that outputs concatenate cleanly.
    pub header: bool,
    /// Typed rows for campaigns over point sets.
    pub results: Vec<ResultRow>,
    /// Typed rows for the class audit.
    pub audits: Vec<(String, ClassAudit)>,
}

impl CampaignOutput {
    pub fn write<W: Write>(&self, out: W, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Csv => self.table.write_csv(out, self.header),
            OutputFormat::Json => self.table.write_json(out),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.table
            .write_csv(&mut buf, self.header)
            .expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

/// Runs a campaign on a dedicated pool of `config.workers` threads.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutput> {
    let f = FieldCtx::new(config.p, config.r)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        if n == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let start = Instant::now();
    let mut out = pool.install(|| match config.campaign {
        Campaign::ExhaustiveSubsets => subset_sweep(&f, config, false),
        Campaign::PPowerExhaustive => subset_sweep(&f, config, true),
        Campaign::TwoLineExhaustive => two_line_sweep(&f, config),
        Campaign::LinesetExhaustive => lineset_sweep(&f, config),
        Campaign::FamilyVerify => family_verify(&f, config),
        Campaign::ClassAudit => class_audit(&f, config),
        Campaign::IncidenceReport => incidence_report(&f, config),
        Campaign::SearchExtremal => search_extremal(&f, config),
    })?;
    out.summary.campaign = config.campaign.name().to_string();
    out.summary.q = f.q();
    out.summary.elapsed_ms = start.elapsed().as_millis();
    Ok(out)
}

/// How `|R_E|` is computed for the rows, and which independent route
/// cross-checks it.
enum Route<'a> {
    /// Permutation table; checked with the transporter method.
    Table(&'a PermTable),
    /// Transporter method; checked by filtering all of SL2.
    Fast { brute: Option<&'a [Mat2]> },
    /// Line-set stabilizer of the lines meeting `E`; checked with the
    /// transporter method on the union of those lines.
    Lines,
}

struct Evaluated {
    row: ResultRow,
    checked: bool,
    mismatch: bool,
}

fn whole_group_or_fast(f: &FieldCtx, e: &PointSet) -> Result<u64> {
    if e.len_punctured() == 0 {
        Ok(Sl2::new(f).order())
    } else {
        Ok(stabilizer_fast(f, e)?.len() as u64)
    }
}

fn evaluate(
    f: &FieldCtx,
    route: &Route<'_>,
    e: &PointSet,
    set: String,
    check: bool,
    k: &BoundConstants,
) -> Result<Evaluated> {
    let (r_e, other) = match route {
        Route::Table(t) => {
            let r_e = t.stabilizer_size(e);
            (
                r_e,
                if check {
                    Some(whole_group_or_fast(f, e)?)
                } else {
                    None
                },
            )
        }
        Route::Fast { brute } => {
            let r_e = whole_group_or_fast(f, e)?;
            (
                r_e,
                brute
                    .filter(|_| check)
                    .map(|els| stabilizer_brute_with(f, els, e).len() as u64),
            )
        }
        Route::Lines => {
            let lines = line_partition(f, e).lines();
            let r_e = lineset_stabilizer(f, &lines)?.len() as u64;
            (
                r_e,
                if check {
                    Some(whole_group_or_fast(f, e)?)
                } else {
                    None
                },
            )
        }
    };
    let report = bound_report_with(f, e, r_e, k);
    Ok(Evaluated {
        row: ResultRow { set, report },
        checked: other.is_some(),
        mismatch: other.is_some_and(|o| o != r_e),
    })
}

fn spot_selected(seed: u64, index: u64) -> bool {
    SplitMix64::for_index(seed ^ SPOT_SALT, index).chance(SPOT_CHECK_PERCENT, 100)
}

fn brute_elements(f: &FieldCtx) -> Result<Option<Vec<Mat2>>> {
    if f.q() <= SPOT_CHECK_MAX_Q {
        Ok(Some(Sl2::new(f).materialize()?))
    } else {
        Ok(None)
    }
}

/// Evaluates `sets` in parallel, preserving order.
fn evaluate_all(
    f: &FieldCtx,
    route: &Route<'_>,
    sets: Vec<(String, PointSet)>,
    check_all: bool,
    config: &CampaignConfig,
) -> Result<(Vec<ResultRow>, Summary)> {
    let evaluated: Vec<Evaluated> = sets
        .into_par_iter()
        .enumerate()
        .map(|(i, (name, e))| {
            let check = check_all || spot_selected(config.seed, i as u64);
            evaluate(f, route, &e, name, check, &config.constants)
        })
        .collect::<Result<_>>()?;
    let mut summary = Summary::default();
    let mut rows = Vec::with_capacity(evaluated.len());
    for ev in evaluated {
        summary.absorb(&ev.row);
        summary.spot_checked += usize::from(ev.checked);
        summary.spot_mismatches += usize::from(ev.mismatch);
        rows.push(ev.row);
    }
    Ok((rows, summary))
}

fn result_output(rows: Vec<ResultRow>, summary: Summary, header: bool) -> CampaignOutput {
    let mut table = Table::new(RESULT_COLUMNS.to_vec());
    table.rows = rows.iter().map(ResultRow::values).collect();
    CampaignOutput {
        table,
        summary,
        header,
        results: rows,
        audits: Vec::new(),
    }
}

fn subset_sweep(
    f: &FieldCtx,
    config: &CampaignConfig,
    p_power_only: bool,
) -> Result<CampaignOutput> {
    let q = f.q();
    let sampled = q > EXHAUSTIVE_MAX_Q;
    if sampled && !(config.allow_sampled && q <= SAMPLED_EXHAUSTIVE_MAX_Q) {
        return Err(Error::Config(format!(
            "subset sweeps need q <= {EXHAUSTIVE_MAX_Q} (q = {SAMPLED_EXHAUSTIVE_MAX_Q} with the sampling override), got q = {q}"
        )));
    }
    let total = 1u64 << (q * q);
    let span = if sampled {
        config.budget.unwrap_or(10_000)
    } else {
        total
    };
    let range = config.range.clone().unwrap_or(0..span);
    if range.start > range.end || range.end > span {
        return Err(Error::Config(format!("range {range:?} outside 0..{span}")));
    }
    let table = PermTable::new(f)?;
    let sets: Vec<(String, PointSet)> = range
        .clone()
        .map(|i| {
            let mask = if sampled {
                SplitMix64::for_index(config.seed, i).below(total)
            } else {
                i
            };
            let e = PointSet::from_mask(q, mask);
            (e.to_text(), e)
        })
        .collect();
    let (mut rows, mut summary) = evaluate_all(f, &Route::Table(&table), sets, false, config)?;
    if p_power_only {
        rows.retain(|r| r.report.p_power.applicable);
        let (checked, mismatches) = (summary.spot_checked, summary.spot_mismatches);
        summary = Summary::default();
        rows.iter().for_each(|r| summary.absorb(r));
        summary.spot_checked = checked;
        summary.spot_mismatches = mismatches;
    }
    Ok(result_output(rows, summary, range.start == 0))
}

fn two_line_sweep(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let q = f.q() as u64;
    let per_line = (1u64 << (q - 1)) - 1;
    let count = (q + 1) * q / 2 * per_line * per_line * 2;
    if count > TWO_LINE_MAX_SETS {
        return Err(Error::Config(format!(
            "two-line sweep has {count} sets, above {TWO_LINE_MAX_SETS}"
        )));
    }
    let lines: Vec<(ProjLine, Vec<crate::plane::Point2>)> = ProjLine::all(f)
        .map(|l| (l, l.points(f).filter(|p| !p.is_origin()).collect()))
        .collect();
    let pick = |pts: &[crate::plane::Point2], mask: u64| {
        pts.iter()
            .enumerate()
            .filter(move |(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect::<Vec<_>>()
    };
    let mut sets = Vec::with_capacity(count as usize);
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for a in 1..=per_line {
                for b in 1..=per_line {
                    let mut e = PointSet::from_points(
                        f.q(),
                        pick(&lines[i].1, a).into_iter().chain(pick(&lines[j].1, b)),
                    );
                    for _ in 0..2 {
                        sets.push((e.to_text(), e.clone()));
                        e = e.with_origin();
                    }
                }
            }
        }
    }
    let brute = brute_elements(f)?;
    let (rows, summary) = evaluate_all(
        f,
        &Route::Fast {
            brute: brute.as_deref(),
        },
        sets,
        false,
        config,
    )?;
    Ok(result_output(rows, summary, true))
}

fn lineset_sweep(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let n = f.q() as usize + 1;
    let union = |ix: &[usize]| {
        PointSet::from_points(
            f.q(),
            ix.iter()
                .flat_map(|&i| ProjLine::from_index(i, f.q()).points(f)),
        )
        .without_origin()
    };
    let mut sets = Vec::new();
    for m in [3usize, 4] {
        for combo in combinations(n, m) {
            let e = union(&combo);
            sets.push((e.to_text(), e));
        }
    }
    if n >= 5 {
        for i in 0..config.budget.unwrap_or(200) {
            let mut combo = SplitMix64::for_index(config.seed, i).sample_indices(n, 5);
            combo.sort_unstable();
            let e = union(&combo);
            sets.push((e.to_text(), e));
        }
    }
    let (rows, summary) = evaluate_all(f, &Route::Lines, sets, false, config)?;
    Ok(result_output(rows, summary, true))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Every family valid over `f` with its default parameters.
pub fn default_families(f: &FieldCtx) -> Vec<FamilySpec> {
    let q = f.q();
    let mut out = vec![
        FamilySpec::Empty,
        FamilySpec::Origin,
        FamilySpec::Full,
        FamilySpec::FullMinusOrigin,
        FamilySpec::LineOrigin { slope: Some(0) },
        FamilySpec::LineOrigin { slope: None },
        FamilySpec::LineAffine { x0: 1 },
        FamilySpec::Complement(Box::new(FamilySpec::LineOrigin { slope: Some(0) })),
    ];
    out.extend(
        (1..q)
            .filter(|c| (q - 1).is_multiple_of(*c))
            .map(|c| FamilySpec::AxisSubgroup { c }),
    );
    out.extend(
        (1..=f.r())
            .filter(|d| f.r().is_multiple_of(*d))
            .map(|sub_r| FamilySpec::SubfieldPlane { sub_r }),
    );
    out.push(FamilySpec::Random {
        n: q as usize,
        seed: 0,
    });
    out
}

fn family_verify(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let specs: Vec<FamilySpec> = if config.sets.is_empty() {
        default_families(f)
    } else {
        config
            .sets
            .iter()
            .map(|s| FamilySpec::parse(f, s))
            .collect::<Result<_>>()?
    };
    let sets = specs
        .iter()
        .map(|s| Ok((s.to_string(), gen_family(f, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let brute = brute_elements(f)?;
    let (rows, summary) = evaluate_all(
        f,
        &Route::Fast {
            brute: brute.as_deref(),
        },
        sets,
        true,
        config,
    )?;
    Ok(result_output(rows, summary, true))
}

/// Explicit sets, or the subfield plane (when proper) followed by `budget`
/// random sets with one multiplicity class.
fn audit_sets(
    f: &FieldCtx,
    config: &CampaignConfig,
    default_budget: u64,
) -> Result<Vec<(String, PointSet)>> {
    if !config.sets.is_empty() {
        return config
            .sets
            .iter()
            .map(|s| Ok((s.clone(), parse_set(f, s)?)))
            .collect();
    }
    let q = f.q() as u64;
    let mut out = Vec::new();
    if f.r() > 1 {
        let spec = FamilySpec::SubfieldPlane { sub_r: 1 };
        out.push((spec.to_string(), gen_family(f, &spec)?));
    }
    if q > 2 {
        for i in 0..config.budget.unwrap_or(default_budget) {
            let mut rng = SplitMix64::for_index(config.seed, i);
            let m0 = 2 + rng.below(q) as usize;
            let m1 = 1 + rng.below(q - 1) as usize;
            let e = random_uniform_class(f, m0, m1, &mut rng)?;
            out.push((e.to_text(), e));
        }
    }
    Ok(out)
}

const AUDIT_COLUMNS: [&str; 25] = [
    "set",
    "m1",
    "m0",
    "b_size",
    "c_size",
    "s_size",
    "s1_size",
    "s2_size",
    "r_e",
    "omega",
    "omega_s2",
    "omega_s1",
    "incidence_part",
    "lower_bound",
    "upper_ratio",
    "line_count",
    "plane_richness",
    "skew_checked",
    "skew_failed",
    "disjoint_on_image_failed",
    "parallel_checked",
    "parallel_failed",
    "stabilizer_contained",
    "passed",
    "violations",
];

fn audit_values(set: &str, a: &ClassAudit) -> Vec<Value> {
    vec![
        Value::Text(set.to_string()),
        Value::Int(a.m1 as u64),
        Value::Int(a.m0 as u64),
        Value::Int(a.b_size as u64),
        Value::Int(a.c_size as u64),
        Value::Int(a.s_size as u64),
        Value::Int(a.s1_size as u64),
        Value::Int(a.s2_size as u64),
        Value::Int(a.r_e as u64),
        Value::Int(a.omega),
        Value::Int(a.omega_s2),
        Value::Int(a.omega_s1),
        Value::Int(a.incidence_part),
        Value::Signed(a.lower_bound),
        Value::Ratio((a.upper_rhs > 0.0).then(|| a.omega as f64 / a.upper_rhs)),
        Value::Int(a.line_count as u64),
        Value::Int(a.plane_richness as u64),
        Value::Int(a.skew_pairs.checked),
        Value::Int(a.skew_pairs.failed),
        Value::Int(a.disjoint_on_image.failed),
        Value::Int(a.parallel_triples.checked),
        Value::Int(a.parallel_triples.failed),
        Value::Bool(a.stabilizer_contained),
        Value::Bool(a.passed()),
        Value::Text(a.violations().join("|")),
    ]
}

fn class_audit(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let sets = audit_sets(f, config, 20)?;
    let c = config.constants.c;
    let per_set: Vec<Vec<(String, ClassAudit)>> = sets
        .par_iter()
        .map(|(name, e)| {
            line_partition(f, e)
                .classes
                .keys()
                .map(|&m1| Ok((name.clone(), audit_line_class(f, e, m1, c)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let audits: Vec<(String, ClassAudit)> = per_set.into_iter().flatten().collect();
    let mut table = Table::new(AUDIT_COLUMNS.to_vec());
    table.rows = audits.iter().map(|(s, a)| audit_values(s, a)).collect();
    let summary = Summary {
        rows: audits.len(),
        audit_violations: audits.iter().filter(|(_, a)| !a.passed()).count(),
        ..Summary::default()
    };
    Ok(CampaignOutput {
        table,
        summary,
        header: true,
        results: Vec::new(),
        audits,
    })
}

const INCIDENCE_COLUMNS: [&str; 9] = [
    "instance",
    "points",
    "lines",
    "incidences",
    "plane_richness",
    "richness_exact",
    "bound",
    "applicable",
    "ratio",
];

/// `Σ_ℓ Σ_p [p ∈ ℓ]`, the double loop used to cross-check the engine.
pub fn brute_incidences(f: &FieldCtx, points: &[Point3], lines: &[Line3]) -> u64 {
    lines
        .iter()
        .map(|l| points.iter().filter(|&&p| l.contains(f, p)).count() as u64)
        .sum()
}

fn incidence_report(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let mut instances: Vec<(String, IncidenceInstance)> = Vec::new();
    if config.sets.is_empty() {
        let q = f.q() as u64;
        let lines: Vec<Line3> = all_lines(f).collect();
        let budget = config.budget.unwrap_or(20);
        instances = (0..budget)
            .into_par_iter()
            .map(|i| {
                let mut rng = SplitMix64::for_index(config.seed, i);
                let n_points = 1 + rng.below(q * q * q) as usize;
                let n_lines = 1 + rng.below(lines.len() as u64) as usize;
                let points = rng
                    .sample_indices((q * q * q) as usize, n_points)
                    .into_iter()
                    .map(|code| {
                        let code = code as u32;
                        let q = q as u32;
                        Point3::from_codes(code / (q * q), code / q % q, code % q)
                    });
                let chosen: Vec<Line3> = rng
                    .sample_indices(lines.len(), n_lines)
                    .into_iter()
                    .map(|j| lines[j])
                    .collect();
                (
                    format!("random:{i}"),
                    IncidenceInstance::new(f, points, chosen),
                )
            })
            .collect();
    } else {
        for (name, e) in audit_sets(f, config, 0)? {
            for &m1 in line_partition(f, &e).classes.keys() {
                instances.push((format!("{name}#m1={m1}"), class_incidence(f, &e, m1)?));
            }
        }
    }
    let checks: Vec<bool> = instances
        .par_iter()
        .map(|(_, inst)| brute_incidences(f, &inst.points, &inst.lines) == inst.incidences)
        .collect();

    let mut table = Table::new(INCIDENCE_COLUMNS.to_vec());
    for (name, inst) in &instances {
        for row in incidence_bound_report(inst, config.constants.c) {
            table.rows.push(vec![
                Value::Text(name.clone()),
                Value::Int(inst.points.len() as u64),
                Value::Int(inst.lines.len() as u64),
                Value::Int(inst.incidences),
                Value::Int(inst.richness.max_lines as u64),
                Value::Bool(!inst.richness.lower_bound_only),
                Value::Text(row.name.to_string()),
                Value::Bool(row.applicable),
                Value::Ratio(row.ratio),
            ]);
        }
    }
    let summary = Summary {
        rows: table.rows.len(),
        spot_checked: checks.len(),
        spot_mismatches: checks.iter().filter(|ok| !**ok).count(),
        ..Summary::default()
    };
    Ok(CampaignOutput {
        table,
        summary,
        header: true,
        results: Vec::new(),
        audits: Vec::new(),
    })
}

/// A random generator: an elementary matrix half of the time, otherwise a
/// uniform element of SL2.
fn random_generator(f: &FieldCtx, rng: &mut SplitMix64) -> Mat2 {
    let sl2 = Sl2::new(f);
    if rng.chance(1, 2) {
        let t = f
            .elem(1 + rng.below(u64::from(f.q()) - 1))
            .expect("nonzero code");
        if rng.chance(1, 2) {
            Mat2::new_unchecked(
                crate::gf::Elem::ONE,
                t,
                crate::gf::Elem::ZERO,
                crate::gf::Elem::ONE,
            )
        } else {
            Mat2::new_unchecked(
                crate::gf::Elem::ONE,
                crate::gf::Elem::ZERO,
                t,
                crate::gf::Elem::ONE,
            )
        }
    } else {
        sl2.nth(rng.below(sl2.order()))
    }
}

/// Candidates from one generator tuple: every single non-origin orbit, the
/// union of all of them, and one random union, each with the origin added.
fn orbit_candidates(f: &FieldCtx, rng: &mut SplitMix64) -> Result<Vec<(String, PointSet, bool)>> {
    let gens: Vec<Mat2> = (0..2).map(|_| random_generator(f, rng)).collect();
    let dec = subgroup_orbits(f, &gens)?;
    let orbits: Vec<&PointSet> = dec.nonorigin_orbits().collect();
    let mut picks: Vec<Vec<usize>> = (0..orbits.len()).map(|i| vec![i]).collect();
    picks.push((0..orbits.len()).collect());
    let random: Vec<usize> = (0..orbits.len()).filter(|_| rng.chance(1, 2)).collect();
    if !random.is_empty() {
        picks.push(random);
    }
    Ok(picks
        .into_iter()
        .map(|ix| {
            let mut e = PointSet::empty(f.q()).with_origin();
            for i in ix {
                e = e.union(orbits[i]);
            }
            let contains_group = gens.iter().all(|g| e.is_preserved_by(f, g));
            (e.to_text(), e, contains_group)
        })
        .collect())
}

fn search_extremal(f: &FieldCtx, config: &CampaignConfig) -> Result<CampaignOutput> {
    let budget = config.budget.unwrap_or(100);
    let q = f.q() as u64;
    let candidates: Vec<Vec<(String, PointSet, bool)>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::for_index(config.seed, i);
            match config.strategy {
                SearchStrategy::OrbitUnion => orbit_candidates(f, &mut rng),
                SearchStrategy::Random => {
                    let n = 1 + rng.below(q * q) as usize;
                    let mut e = PointSet::empty(f.q());
                    for code in rng.sample_indices((q * q) as usize, n) {
                        e.insert_code(code);
                    }
                    Ok(vec![(e.to_text(), e, true)])
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut seen = std::collections::BTreeMap::new();
    let mut group_failures = 0;
    for (name, e, contains_group) in candidates.into_iter().flatten() {
        group_failures += usize::from(!contains_group);
        seen.entry(name).or_insert(e);
    }
    let sets: Vec<(String, PointSet)> = seen
        .into_iter()
        .filter(|(_, e)| line_partition(f, e).lines_meeting >= 2)
        .collect();
    let brute = brute_elements(f)?;
    let (mut rows, mut summary) = evaluate_all(
        f,
        &Route::Fast {
            brute: brute.as_deref(),
        },
        sets,
        true,
        config,
    )?;
    summary.spot_mismatches += group_failures;
    rows.sort_by(|a, b| {
        let ra = a.report.three_halves.ratio.unwrap_or(0.0);
        let rb = b.report.three_halves.ratio.unwrap_or(0.0);
        rb.total_cmp(&ra).then_with(|| a.set.cmp(&b.set))
    });
    Ok(result_output(rows, summary, true))
}
