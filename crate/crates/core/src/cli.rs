//! The `dihom` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bimodule::{leibniz_defect, BimoduleClass, ClassKind, Engine};
use crate::chains::{check_equal_length, ChainEnumerator, FormalChain, LengthScope};
use crate::error::{Error, Result};
use crate::homalg::field::{is_prime, Field, PrimeField, Rationals};
use crate::homalg::{cohomology_ranks, homology_ranks, HomologySummary, RenderedVector};
use crate::obstacles::{ChainClass, ObstacleModel, ObstacleModelJson};
use crate::precubical::{build_grid, lattice_points, ComplexJson, CubeId, GridSpec, PrecubicalSet};
use crate::pvlang;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_OPERAND: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "dihom",
    version,
    about = "Directed homology of precubical sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ranks (and optionally representatives) of HM for vertex pairs.
    Homology(HomologyArgs),
    /// Products of (co)homology classes.
    Product(ProductArgs),
    /// Invariant checks on a model.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pv,
    GridJson,
    ComplexJson,
    ObstacleJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    Rationals,
    Prime(u64),
}

fn parse_field(s: &str) -> std::result::Result<FieldChoice, String> {
    let s = s.trim();
    if matches!(s, "rationals" | "Q" | "q") {
        return Ok(FieldChoice::Rationals);
    }
    let digits = s
        .strip_prefix("prime:")
        .or_else(|| s.strip_prefix('F'))
        .unwrap_or(s);
    let p: u64 = digits
        .parse()
        .map_err(|_| format!("expected 'rationals' or 'prime:P', got {s:?}"))?;
    if !is_prime(p) {
        return Err(format!("{p} is not prime"));
    }
    Ok(FieldChoice::Prime(p))
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Cube chain complexes with exact elimination.
    Chains,
    /// Chains of obstacles.
    Obstacles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Homology,
    Cohomology,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProductOp {
    Conc,
    Cap,
    Cup0,
    ObstacleCup,
    ObstacleCap,
}

#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Model file.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Input format; guessed from the file when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Coefficients: `rationals` or `prime:P`.
    #[arg(long, default_value = "rationals", value_parser = parse_field)]
    pub field: FieldChoice,
    /// Worker threads for per-pair work.
    #[arg(long, env = "DIHOM_THREADS", value_parser = parse_positive)]
    pub threads: Option<usize>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, Args)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub common: Common,
    /// `all-reachable` or `FROM:TO;FROM:TO;...` with vertex labels or grid coordinates.
    #[arg(long, default_value = "all-reachable")]
    pub pairs: String,
    /// Highest module index `HM_m` to report.
    #[arg(long, default_value = "2", value_parser = parse_positive)]
    pub max_degree: usize,
    #[arg(long, value_enum, default_value = "homology")]
    pub kind: Kind,
    /// Engine; defaults to `obstacles` for obstacle JSON and `chains` otherwise.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Include class representatives in the report.
    #[arg(long)]
    pub representatives: bool,
}

#[derive(Clone, Debug, Args)]
pub struct ProductArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub op: ProductOp,
    /// Left operand `FROM:TO[@DEGREE][#INDEX]`; a missing or `*` index takes the whole basis.
    #[arg(long)]
    pub left: String,
    /// Right operand, same syntax as `--left`.
    #[arg(long)]
    pub right: String,
}

#[derive(Clone, Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pairs whose slices are checked.
    #[arg(long, default_value = "all-reachable")]
    pub pairs: String,
    /// Slices are enumerated up to this module index.
    #[arg(long, default_value = "2", value_parser = parse_positive)]
    pub max_degree: usize,
    /// Upper bound on Leibniz spot checks.
    #[arg(long, default_value = "500")]
    pub leibniz_samples: usize,
}

/// A finished command: JSON report, table text and exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Operand(_) | Error::Domain(_) | Error::UnsupportedDegree(_) => EXIT_OPERAND,
        Error::Model(_) | Error::Integrity(_) | Error::Parse { .. } | Error::Json(_) => EXIT_MODEL,
    }
}

/// Parses arguments, runs the command and prints the result. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MODEL } else { EXIT_OK };
        }
    };
    let common = match &cli.command {
        Command::Homology(a) => &a.common,
        Command::Product(a) => &a.common,
        Command::Check(a) => &a.common,
    };
    match run(&cli).and_then(|o| emit(common, &o).map(|()| o.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dihom: {e}");
            exit_code(&e)
        }
    }
}

fn emit(common: &Common, o: &Outcome) -> Result<()> {
    let pretty = serde_json::to_string_pretty(&o.report)? + "\n";
    if let Some(path) = &common.out {
        fs::write(path, &pretty)?;
    }
    let mut stdout = std::io::stdout().lock();
    if common.json {
        stdout.write_all(pretty.as_bytes())?;
    } else {
        stdout.write_all(o.text.as_bytes())?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Homology(a) => with_pool(&a.common, || cmd_homology(a)),
        Command::Product(a) => with_pool(&a.common, || cmd_product(a)),
        Command::Check(a) => with_pool(&a.common, || cmd_check(a)),
    }
}

fn with_pool<T: Send>(common: &Common, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Model(format!("thread pool: {e}")))?;
    pool.install(f)
}

macro_rules! with_field {
    ($choice:expr, |$f:ident| $body:expr) => {
        match $choice {
            FieldChoice::Rationals => {
                let $f = Rationals;
                $body
            }
            FieldChoice::Prime(p) => {
                let $f = PrimeField::new(p)?;
                $body
            }
        }
    };
}

/// A loaded model: a cube complex, plus the obstacle model when one is given
/// directly.
pub struct Loaded {
    pub complex: PrecubicalSet,
    pub spec: Option<GridSpec>,
    pub obstacles: Option<ObstacleModel>,
}

impl Loaded {
    fn obstacle_model(&self) -> Result<ObstacleModel> {
        if let Some(m) = &self.obstacles {
            return Ok(m.clone());
        }
        match &self.spec {
            Some(spec) => ObstacleModel::from_grid(spec),
            None => Err(Error::Model(
                "a general complex has no obstacle model".to_string(),
            )),
        }
    }
}

fn sniff(path: &Path, text: &str) -> Result<Format> {
    if path.extension().is_some_and(|e| e == "pv") {
        return Ok(Format::Pv);
    }
    let Ok(value) = serde_json::from_str::<Value>(text) else {
        return Ok(Format::Pv);
    };
    let has = |k: &str| value.get(k).is_some();
    if has("obstacles") {
        Ok(Format::ObstacleJson)
    } else if has("extents") {
        Ok(Format::GridJson)
    } else if has("cells") {
        Ok(Format::ComplexJson)
    } else {
        Err(Error::Model(format!(
            "cannot tell the format of {}; pass --format",
            path.display()
        )))
    }
}

/// Forbidden cells of the grid whose centers are the obstacles.
fn obstacle_grid(model: &ObstacleModel) -> GridSpec {
    GridSpec::new(
        model.extents().to_vec(),
        model
            .obstacles()
            .iter()
            .map(|o| o.doubled.iter().map(|c| (c - 1) / 2).collect()),
    )
}

pub fn load(path: &Path, format: Option<Format>) -> Result<Loaded> {
    let text = fs::read_to_string(path)?;
    let format = match format {
        Some(f) => f,
        None => sniff(path, &text)?,
    };
    match format {
        Format::Pv => {
            let spec = pvlang::parse(&text)?.semantics();
            Ok(Loaded {
                complex: build_grid(&spec)?,
                spec: Some(spec),
                obstacles: None,
            })
        }
        Format::GridJson => {
            let spec: GridSpec = serde_json::from_str(&text)?;
            Ok(Loaded {
                complex: build_grid(&spec)?,
                spec: Some(spec),
                obstacles: None,
            })
        }
        Format::ComplexJson => {
            let json: ComplexJson = serde_json::from_str(&text)?;
            Ok(Loaded {
                complex: PrecubicalSet::from_json(&json)?,
                spec: None,
                obstacles: None,
            })
        }
        Format::ObstacleJson => {
            let json: ObstacleModelJson = serde_json::from_str(&text)?;
            let model = ObstacleModel::from_json(&json)?;
            let spec = obstacle_grid(&model);
            Ok(Loaded {
                complex: build_grid(&spec)?,
                spec: Some(spec),
                obstacles: Some(model),
            })
        }
    }
}

fn resolve_vertex(x: &PrecubicalSet, s: &str) -> Result<CubeId> {
    let s = s.trim();
    let id = x.by_label(s).or_else(|| x.by_label(&format!("({s})")));
    match id {
        Some(id) if x.dim(id) == 0 => Ok(id),
        Some(_) => Err(Error::Domain(format!("{s:?} is not a vertex"))),
        None => Err(Error::Domain(format!("unknown vertex {s:?}"))),
    }
}

fn parse_point(s: &str) -> Result<Vec<u32>> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad grid point {s:?}")))
        })
        .collect()
}

fn point_label(p: &[u32]) -> String {
    let parts: Vec<String> = p.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    s.split_once(':')
        .ok_or_else(|| Error::Domain(format!("expected FROM:TO, got {s:?}")))
}

fn pair_list(spec: &str) -> Option<Vec<&str>> {
    (spec.trim() != "all-reachable").then(|| {
        spec.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    })
}

fn complex_pairs(x: &PrecubicalSet, spec: &str) -> Result<Vec<(CubeId, CubeId)>> {
    match pair_list(spec) {
        None => Ok(x.reachable_pairs().iter().collect()),
        Some(items) => items
            .into_iter()
            .map(|item| {
                let (a, b) = split_pair(item)?;
                Ok((resolve_vertex(x, a)?, resolve_vertex(x, b)?))
            })
            .collect(),
    }
}

fn point_pairs(model: &ObstacleModel, spec: &str) -> Result<Vec<(Vec<u32>, Vec<u32>)>> {
    match pair_list(spec) {
        None => {
            let points = lattice_points(model.extents());
            Ok(points
                .iter()
                .flat_map(|u| {
                    points
                        .iter()
                        .filter(move |v| u.iter().zip(v.iter()).all(|(a, b)| a <= b))
                        .map(move |v| (u.clone(), v.clone()))
                })
                .collect())
        }
        Some(items) => items
            .into_iter()
            .map(|item| {
                let (a, b) = split_pair(item)?;
                Ok((parse_point(a)?, parse_point(b)?))
            })
            .collect(),
    }
}

fn well_formed(x: &PrecubicalSet) -> Result<()> {
    if let Some(v) = x.identity_violation() {
        return Err(Error::Model(format!(
            "precubical identity fails on cube {} (i = {}, j = {})",
            x.label(v.cube),
            v.i,
            v.j
        )));
    }
    if let Some((a, b)) = x.properness_violation() {
        return Err(Error::Model(format!(
            "complex is not proper: cubes {} and {} share their corners",
            x.label(a),
            x.label(b)
        )));
    }
    if let Err(c) = check_equal_length(x, LengthScope::AllPairs) {
        return Err(Error::Model(format!(
            "equal-length hypothesis fails from {} to {} in dimension {}: {} and {}",
            x.label(c.from),
            x.label(c.to),
            c.dim,
            c.chains[0].display(x),
            c.chains[1].display(x)
        )));
    }
    Ok(())
}

fn table(max_degree: usize, prefix: &str, rows: &[HomologySummary]) -> String {
    let mut header = vec!["from".to_string(), "to".to_string()];
    header.extend((1..=max_degree).map(|i| format!("{prefix}{i}")));
    let mut cells = vec![header];
    for r in rows {
        let mut row = vec![r.from.clone(), r.to.clone()];
        row.extend((1..=max_degree).map(|i| r.rank(i).to_string()));
        cells.push(row);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| {
            cells
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[derive(Serialize)]
struct HomologyReport<'a> {
    model: &'a str,
    kind: &'a str,
    field: String,
    max_degree: usize,
    pairs: Vec<HomologySummary>,
}

pub fn cmd_homology(a: &HomologyArgs) -> Result<Outcome> {
    let loaded = load(&a.common.input, a.common.format)?;
    let engine = a.model.unwrap_or(if loaded.obstacles.is_some() {
        ModelKind::Obstacles
    } else {
        ModelKind::Chains
    });
    let (field_name, rows) = match engine {
        ModelKind::Chains => {
            let x = &loaded.complex;
            well_formed(x)?;
            let pairs = complex_pairs(x, &a.pairs)?;
            let chains = ChainEnumerator::new(x);
            with_field!(a.common.field, |field| {
                let rows = pairs
                    .par_iter()
                    .map(|&(v, w)| {
                        let slice = chains.slice(v, w, a.max_degree)?;
                        Ok(match a.kind {
                            Kind::Homology => homology_ranks(&field, x, &slice, a.representatives),
                            Kind::Cohomology => {
                                cohomology_ranks(&field, x, &slice, a.representatives)
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (field.name(), rows)
            })
        }
        ModelKind::Obstacles => {
            let model = loaded.obstacle_model()?;
            let pairs = point_pairs(&model, &a.pairs)?;
            let rows = pairs
                .par_iter()
                .map(|(u, v)| obstacle_summary(&model, u, v, a.max_degree, a.representatives))
                .collect::<Result<Vec<_>>>()?;
            ("integers".to_string(), rows)
        }
    };
    let prefix = match a.kind {
        Kind::Homology => "HM_",
        Kind::Cohomology => "HM^",
    };
    let text = table(a.max_degree, prefix, &rows);
    let report = HomologyReport {
        model: match engine {
            ModelKind::Chains => "chains",
            ModelKind::Obstacles => "obstacles",
        },
        kind: match a.kind {
            Kind::Homology => "homology",
            Kind::Cohomology => "cohomology",
        },
        field: field_name,
        max_degree: a.max_degree,
        pairs: rows,
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        text,
        code: EXIT_OK,
    })
}

fn obstacle_summary(
    model: &ObstacleModel,
    u: &[u32],
    v: &[u32],
    max_degree: usize,
    representatives: bool,
) -> Result<HomologySummary> {
    let classes = model.enumerate_classes(u, v)?;
    let mut ranks: BTreeMap<usize, usize> = (1..=max_degree).map(|i| (i, 0)).collect();
    let mut reps: BTreeMap<usize, Vec<RenderedVector>> = BTreeMap::new();
    for c in &classes {
        let i = model.hm_index(c);
        if i > max_degree {
            continue;
        }
        *ranks.entry(i).or_insert(0) += 1;
        let ids = c
            .chain
            .iter()
            .map(|&k| model.obstacles()[k].id.clone())
            .collect();
        reps.entry(i)
            .or_default()
            .push(vec![(ids, "1".to_string())]);
    }
    Ok(HomologySummary {
        from: point_label(u),
        to: point_label(v),
        ranks,
        representatives: representatives.then_some(reps),
    })
}

/// `FROM:TO[@DEGREE][#INDEX]`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Operand<'a> {
    from: &'a str,
    to: &'a str,
    degree: Option<usize>,
    index: Option<usize>,
}

fn parse_operand(s: &str) -> Result<Operand<'_>> {
    let bad = |why: &str| Error::Operand(format!("operand {s:?}: {why}"));
    let (rest, index) = match s.split_once('#') {
        Some((r, i)) if i.trim() == "*" => (r, None),
        Some((r, i)) => (r, Some(i.trim().parse().map_err(|_| bad("bad index"))?)),
        None => (s, None),
    };
    let (pair, degree) = match rest.split_once('@') {
        Some((p, d)) => (p, Some(d.trim().parse().map_err(|_| bad("bad degree"))?)),
        None => (rest, None),
    };
    let (from, to) = pair
        .split_once(':')
        .ok_or_else(|| bad("expected FROM:TO"))?;
    if degree == Some(0) {
        return Err(bad("module indices start at 1"));
    }
    Ok(Operand {
        from: from.trim(),
        to: to.trim(),
        degree,
        index,
    })
}

fn pick<T: Clone>(items: Vec<T>, index: Option<usize>, side: &str) -> Result<Vec<(usize, T)>> {
    match index {
        None => Ok(items.into_iter().enumerate().collect()),
        Some(i) => items.get(i).cloned().map(|c| vec![(i, c)]).ok_or_else(|| {
            Error::Operand(format!(
                "{side} index {i} is out of range ({} classes)",
                items.len()
            ))
        }),
    }
}

pub fn cmd_product(a: &ProductArgs) -> Result<Outcome> {
    let loaded = load(&a.common.input, a.common.format)?;
    let left = parse_operand(&a.left)?;
    let right = parse_operand(&a.right)?;
    let chained = !matches!(a.op, ProductOp::Cup0 | ProductOp::ObstacleCup);
    match a.op {
        ProductOp::ObstacleCup | ProductOp::ObstacleCap => {
            let model = loaded.obstacle_model()?;
            let points = |o: &Operand| Ok::<_, Error>((parse_point(o.from)?, parse_point(o.to)?));
            let (l, r) = (points(&left)?, points(&right)?);
            let fits = if chained { l.1 == r.0 } else { l == r };
            if !fits {
                return Err(Error::Operand("operand endpoints do not match".to_string()));
            }
            obstacle_product(&model, a.op, (&l, &left), (&r, &right))
        }
        _ => {
            let x = &loaded.complex;
            well_formed(x)?;
            let ends = |o: &Operand| {
                Ok::<_, Error>((resolve_vertex(x, o.from)?, resolve_vertex(x, o.to)?))
            };
            let (l, r) = (ends(&left)?, ends(&right)?);
            let fits = if chained { l.1 == r.0 } else { l == r };
            if !fits {
                return Err(Error::Operand("operand endpoints do not match".to_string()));
            }
            with_field!(a.common.field, |field| engine_product(
                &Engine::new(x, field),
                a.op,
                (l, &left),
                (r, &right)
            ))
        }
    }
}

type Ends = (CubeId, CubeId);

fn engine_product<F: Field>(
    engine: &Engine<'_, F>,
    op: ProductOp,
    (l, left): (Ends, &Operand),
    (r, right): (Ends, &Operand),
) -> Result<Outcome> {
    let x = engine.complex();
    let field = engine.field();
    if op == ProductOp::Cup0 {
        for d in [left.degree, right.degree].into_iter().flatten() {
            if d != 1 {
                return Err(Error::UnsupportedDegree(d));
            }
        }
    }
    let kind = if op == ProductOp::Conc {
        ClassKind::Homology
    } else {
        ClassKind::Cohomology
    };
    let lhs = pick(
        engine.basis(kind, l.0, l.1, left.degree.unwrap_or(1))?,
        left.index,
        "left",
    )?;
    let rhs = pick(
        engine.basis(kind, r.0, r.1, right.degree.unwrap_or(1))?,
        right.index,
        "right",
    )?;
    let symbol = match op {
        ProductOp::Conc => "⊛",
        ProductOp::Cap => "↷",
        _ => "⌣",
    };
    let mut results: Vec<(usize, usize, BimoduleClass<F::Elem>)> = Vec::new();
    for (i, a) in &lhs {
        for (j, b) in &rhs {
            let c = match op {
                ProductOp::Conc => engine.conc(a, b)?,
                ProductOp::Cap => engine.cap(a, b)?,
                _ => engine.cup0(a, b)?,
            };
            results.push((*i, *j, c));
        }
    }
    let classes: Vec<_> = results.iter().map(|(_, _, c)| c.clone()).collect();
    let rank = engine.span_rank(&classes)?;
    let mut text = String::new();
    for (i, j, c) in &results {
        let rep: Vec<String> = c
            .rep
            .iter()
            .map(|(chain, v)| format!("{}·{}", field.render(v), chain.display(x)))
            .collect();
        let rep = if rep.is_empty() {
            "0".to_string()
        } else {
            rep.join(" + ")
        };
        let _ = writeln!(text, "[{i}] {symbol} [{j}] = {rep}");
    }
    let _ = writeln!(text, "image rank: {rank}");
    let report = json!({
        "op": op_name(op),
        "field": field.name(),
        "results": results.iter().map(|(i, j, c)| json!({
            "left": i,
            "right": j,
            "class": c.to_json(x, field),
        })).collect::<Vec<_>>(),
        "image_rank": rank,
    });
    Ok(Outcome {
        report,
        text,
        code: EXIT_OK,
    })
}

fn op_name(op: ProductOp) -> &'static str {
    match op {
        ProductOp::Conc => "conc",
        ProductOp::Cap => "cap",
        ProductOp::Cup0 => "cup0",
        ProductOp::ObstacleCup => "obstacle-cup",
        ProductOp::ObstacleCap => "obstacle-cap",
    }
}

type Points = (Vec<u32>, Vec<u32>);

fn obstacle_classes(
    model: &ObstacleModel,
    ends: &Points,
    o: &Operand,
    side: &str,
) -> Result<Vec<(usize, ChainClass)>> {
    let classes: Vec<ChainClass> = model
        .enumerate_classes(&ends.0, &ends.1)?
        .into_iter()
        .filter(|c| o.degree.is_none_or(|d| model.hm_index(c) == d))
        .collect();
    pick(classes, o.index, side)
}

fn obstacle_product(
    model: &ObstacleModel,
    op: ProductOp,
    (l, left): (&Points, &Operand),
    (r, right): (&Points, &Operand),
) -> Result<Outcome> {
    let lhs = obstacle_classes(model, l, left, "left")?;
    let rhs = obstacle_classes(model, r, right, "right")?;
    let mut results = Vec::new();
    let mut image = BTreeSet::new();
    let mut text = String::new();
    for (i, a) in &lhs {
        for (j, b) in &rhs {
            let product = match op {
                ProductOp::ObstacleCap => Some((1, model.cap_chain(a, b)?)),
                _ => model.cup(a, b)?,
            };
            let shown = match &product {
                Some((sign, c)) => {
                    image.insert(c.clone());
                    let s = if *sign < 0 { "-" } else { "" };
                    format!("{s}{}", model.render(c))
                }
                None => "0".to_string(),
            };
            let symbol = if op == ProductOp::ObstacleCap {
                "↷"
            } else {
                "⌣"
            };
            let _ = writeln!(text, "[{i}] {symbol} [{j}] = {shown}");
            results.push(json!({
                "left": i,
                "right": j,
                "sign": product.as_ref().map_or(0, |p| p.0),
                "class": product.as_ref().map(|(_, c)| obstacle_json(model, c)),
            }));
        }
    }
    let _ = writeln!(text, "image size: {}", image.len());
    let report = json!({
        "op": op_name(op),
        "results": results,
        "image_size": image.len(),
    });
    Ok(Outcome {
        report,
        text,
        code: EXIT_OK,
    })
}

fn obstacle_json(model: &ObstacleModel, c: &ChainClass) -> Value {
    json!({
        "from": point_label(&c.u),
        "to": point_label(&c.v),
        "degree": model.hm_index(c),
        "chain": c.chain.iter().map(|&k| model.obstacles()[k].id.clone()).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Serialize)]
struct CheckResult {
    check: &'static str,
    passed: bool,
    detail: String,
}

pub fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let loaded = load(&a.common.input, a.common.format)?;
    let x = &loaded.complex;
    let mut results = Vec::new();
    let identity = x.identity_violation();
    results.push(CheckResult {
        check: "precubical identity",
        passed: identity.is_none(),
        detail: match &identity {
            None => format!("{} cubes", x.len()),
            Some(v) => format!(
                "cube {} fails d_{} d_{} (i = {}, j = {})",
                x.label(v.cube),
                v.i,
                v.j,
                v.i,
                v.j
            ),
        },
    });
    let proper = x.properness_violation();
    results.push(CheckResult {
        check: "properness",
        passed: proper.is_none(),
        detail: match proper {
            None => "every cube is determined by its corners".to_string(),
            Some((p, q)) => format!(
                "cubes {} and {} share their corners",
                x.label(p),
                x.label(q)
            ),
        },
    });
    let length = check_equal_length(x, LengthScope::AllPairs);
    results.push(CheckResult {
        check: "equal length",
        passed: length.is_ok(),
        detail: match &length {
            Ok(()) => "chains of one dimension share one length".to_string(),
            Err(c) => format!(
                "from {} to {} in dimension {}: {} and {}",
                x.label(c.from),
                x.label(c.to),
                c.dim,
                c.chains[0].display(x),
                c.chains[1].display(x)
            ),
        },
    });
    let pairs = complex_pairs(x, &a.pairs)?;
    let chains = ChainEnumerator::new(x);
    let failures: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(v, w)| {
            chains
                .slice(v, w, a.max_degree)
                .err()
                .map(|e| format!("{} -> {}: {e}", x.label(v), x.label(w)))
        })
        .collect();
    results.push(CheckResult {
        check: "boundary squares to zero",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{} slices", pairs.len())
        } else {
            failures.join("; ")
        },
    });
    results.push(leibniz_check(x, &chains, &pairs, a.leibniz_samples));
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(
            text,
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.check,
            r.detail
        );
    }
    let report = json!({ "checks": results, "failed": failed });
    Ok(Outcome {
        report,
        text,
        code: if failed == 0 {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
    })
}

/// `∂(c⊗d) = ∂c⊗d + (-1)^{dim c} c⊗∂d` on pairs of low-dimensional chains
/// meeting at a shared vertex.
fn leibniz_check(
    x: &PrecubicalSet,
    chains: &ChainEnumerator<'_>,
    pairs: &[(CubeId, CubeId)],
    budget: usize,
) -> CheckResult {
    let field = Rationals;
    let single = |v, w, c: &crate::chains::CubeChain| {
        FormalChain::from_terms(v, w, c.dim(), BTreeMap::from([(c.clone(), 1i64)]))
            .expect("chain between its endpoints")
            .over(&field)
    };
    let mut by_source: BTreeMap<CubeId, Vec<CubeId>> = BTreeMap::new();
    for &(v, w) in pairs {
        if v != w {
            by_source.entry(v).or_default().push(w);
        }
    }
    let mut tried = 0;
    let mut failure = None;
    'outer: for &(v, b) in pairs {
        if v == b {
            continue;
        }
        let Some(targets) = by_source.get(&b) else {
            continue;
        };
        let left = chains.enumerate(v, b, 2);
        for &w in targets {
            let right = chains.enumerate(b, w, 2);
            for c in left
                .iter()
                .flat_map(|d| d.first().into_iter().chain(d.last()))
            {
                for d in right
                    .iter()
                    .flat_map(|d| d.first().into_iter().chain(d.last()))
                {
                    if tried >= budget {
                        break 'outer;
                    }
                    tried += 1;
                    let defect = leibniz_defect(&field, x, &single(v, b, c), &single(b, w, d));
                    if !defect.is_zero() {
                        failure = Some(format!("{} ⊗ {}", c.display(x), d.display(x)));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckResult {
        check: "Leibniz rule",
        passed: failure.is_none(),
        detail: failure.unwrap_or_else(|| format!("{tried} chain pairs")),
    }
}
