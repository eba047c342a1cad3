use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plumbing_core::cubes::{self, GorensteinOracle};
use plumbing_core::io::{self, load_graph, manifest_entry_for, parse_vector};
use plumbing_core::report::{rat_json, vec_json, SCHEMA};
use plumbing_core::series::{self, CountingMode, CountingQuery};
use plumbing_core::sw::{self, Calculator, PcMethod, Reduction, SurgeryReport, Verdict};
use plumbing_core::{Error, LatticeVector, PlumbingGraph};

#[derive(Parser)]
#[command(name = "plumbsw", version, about = "Seiberg–Witten invariants of plumbing trees and exact checks of their surgery formulae")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check that a graph is a negative definite tree.
    Validate(GraphArgs),
    /// Lattice data: determinant, dual basis, canonical cycle, classes.
    Info(GraphArgs),
    /// A coefficient of the Poincaré series.
    Coeff(CoeffArgs),
    /// A counting function value.
    Count(CountArgs),
    /// Seiberg–Witten invariants.
    Sw(SwArgs),
    /// Periodic constant of a reduced series.
    Pc(PcArgs),
    /// Exact check of a surgery identity.
    Surgery(SurgeryArgs),
    /// Periodic constants and cube sums on numerically Gorenstein graphs.
    Gorenstein(GorensteinArgs),
    /// Write the fixture corpus and its manifest.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoeffArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Exponent `l′` in E-coordinates, e.g. `1/3` or `1,2,1`.
    #[arg(long)]
    at: String,
    #[arg(long, value_enum, default_value_t = CoeffMethod::Series)]
    method: CoeffMethod,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffMethod {
    Series,
    Cubes,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Threshold `x` in E-coordinates.
    #[arg(long)]
    at: String,
    /// Class index, L′-vector, `all` or `auto`; defaults to the class of the threshold.
    #[arg(long)]
    class: Option<String>,
    #[arg(long, value_enum, default_value_t = CountMode::Full)]
    mode: CountMode,
    /// `leaves`, `nodes`, `all` or comma-separated vertex ids.
    #[arg(long)]
    subset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMode {
    Full,
    Reduced,
    Modified,
}

#[derive(Args)]
struct SwArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "all")]
    class: String,
    #[arg(long, default_value = "2")]
    depth: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PcArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "all")]
    class: String,
    #[arg(long, default_value = "all")]
    subset: String,
    #[arg(long, value_enum, default_value_t = Method::ClosedForm)]
    method: Method,
    #[arg(long, default_value = "2")]
    depth: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    ClosedForm,
    UnivariateFit,
    Gorenstein,
}

#[derive(Args)]
struct SurgeryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "all")]
    class: String,
    #[arg(long)]
    subset: String,
    #[arg(long, value_enum, default_value_t = SurgeryMode::Counting)]
    mode: SurgeryMode,
    /// Comma-separated depths; identities are checked at each.
    #[arg(long, default_value = "2,3")]
    depth: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurgeryMode {
    Counting,
    Quasipoly,
    Pc,
    Red1,
    Red2,
}

#[derive(Args)]
struct GorensteinArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Defaults to every nonempty subset.
    #[arg(long)]
    subset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20240101)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    random: usize,
}

/// A failed command: exit code 1 for failed computations, 2 for bad input.
struct Failure {
    code: u8,
    message: String,
    payload: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::IdentityViolation(_)
            | Error::InternalDisagreement(_)
            | Error::FitInconsistent(_)
            | Error::DepthNotStable { .. }
            | Error::BoundViolation(_)
            | Error::IterationCap { .. }
            | Error::CosetNotMaterialized => 1,
            _ => 2,
        };
        let payload = match &e {
            Error::IdentityViolation(r) => serde_json::to_value(r.as_ref()).ok(),
            _ => None,
        };
        Failure { code, message: e.to_string(), payload }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into(), payload: None }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.verb {
        Verb::Validate(a) | Verb::Info(a) => a.out.clone(),
        Verb::Coeff(a) => a.out.clone(),
        Verb::Count(a) => a.out.clone(),
        Verb::Sw(a) => a.out.clone(),
        Verb::Pc(a) => a.out.clone(),
        Verb::Surgery(a) => a.out.clone(),
        Verb::Gorenstein(a) => a.out.clone(),
        Verb::Fixtures(_) => None,
    };
    let result = run(cli.verb);
    let (code, value) = match result {
        Ok((code, v)) => (code, Some(v)),
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.code, f.payload.map(|p| json!({ "schema": SCHEMA, "violation": p })))
        }
    };
    if let Some(v) = value {
        let text = serde_json::to_string_pretty(&v).expect("json") + "\n";
        match out {
            Some(path) => {
                if let Err(e) = fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            None => print!("{text}"),
        }
    }
    ExitCode::from(code)
}

fn run(verb: Verb) -> CliResult<(u8, Value)> {
    match verb {
        Verb::Validate(a) => {
            let g = load_graph(&a.graph)?;
            Ok((0, json!({ "schema": SCHEMA, "command": "validate", "valid": true, "vertices": g.len(), "det": g.det() })))
        }
        Verb::Info(a) => info(&a.graph),
        Verb::Coeff(a) => {
            let g = load_graph(&a.graph)?;
            let l = parse_vector(&a.at, g.len())?;
            let (method, value) = match a.method {
                CoeffMethod::Series => ("series", series::coefficient(&g, &l)?),
                CoeffMethod::Cubes => ("cubes", cubes::coefficient_via_cubes(&g, &l)?),
            };
            Ok((0, json!({ "schema": SCHEMA, "command": "coeff", "method": method, "at": vec_json(&l), "coefficient": value })))
        }
        Verb::Count(a) => count(a),
        Verb::Sw(a) => {
            let g = load_graph(&a.graph)?;
            let depth = *depths(&a.depth)?.first().expect("nonempty");
            let records = if a.class.trim() == "all" {
                Calculator::new(&g, depth).sw_all()?
            } else {
                let mut rs = Vec::new();
                for h in classes(&g, &a.graph, &a.class)? {
                    rs.push(sw::sw_invariant(&g, &h, depth)?);
                }
                rs
            };
            Ok((0, json!({ "schema": SCHEMA, "command": "sw", "records": records })))
        }
        Verb::Pc(a) => pc(a),
        Verb::Surgery(a) => surgery(a),
        Verb::Gorenstein(a) => gorenstein(a),
        Verb::Fixtures(a) => {
            let m = io::write_fixtures(&a.out, a.seed, a.random)?;
            Ok((0, json!({ "schema": SCHEMA, "command": "fixtures", "dir": a.out.display().to_string(), "manifest": m })))
        }
    }
}

fn info(path: &Path) -> CliResult<(u8, Value)> {
    let g = load_graph(path)?;
    let cc = g.canonical_cycle();
    let (dual, _) = g.dual_basis();
    let mut cls = Vec::new();
    for r in g.class_table().reps() {
        let s = g.minimal_s_rep(&r)?;
        cls.push(json!({ "r": vec_json(&r), "s": vec_json(&s) }));
    }
    Ok((
        0,
        json!({
            "schema": SCHEMA,
            "command": "info",
            "vertices": g.ids(),
            "euler": g.euler(),
            "det": g.det(),
            "dual_basis": dual.iter().map(vec_json).collect::<Vec<_>>(),
            "K": vec_json(&cc.k),
            "Z_K": vec_json(&cc.z_k),
            "gorenstein": cc.gorenstein,
            "rational": g.is_rational()?,
            "classes": cls,
        }),
    ))
}

fn count(a: CountArgs) -> CliResult<(u8, Value)> {
    let g = load_graph(&a.graph)?;
    let x = parse_vector(&a.at, g.len())?;
    let hs = match &a.class {
        Some(sel) => classes(&g, &a.graph, sel)?,
        None => vec![g.class_of(&x)?],
    };
    let mode = match (a.mode, &a.subset) {
        (CountMode::Full, None) => CountingMode::Full,
        (CountMode::Full, Some(_)) => return Err(usage("--subset does not apply to --mode full")),
        (_, None) => return Err(usage("--subset is required for reduced and modified counts")),
        (CountMode::Reduced, Some(s)) => CountingMode::Reduced(subset(&g, s)?),
        (CountMode::Modified, Some(s)) => CountingMode::Modified(subset(&g, s)?),
    };
    let mut values = Vec::new();
    for h in hs {
        let q = CountingQuery { mode: mode.clone(), class: h.clone(), threshold: x.clone() };
        values.push(json!({ "class": vec_json(&h), "value": series::counting(&g, &q)? }));
    }
    Ok((0, json!({ "schema": SCHEMA, "command": "count", "at": vec_json(&x), "values": values })))
}

fn pc(a: PcArgs) -> CliResult<(u8, Value)> {
    let g = load_graph(&a.graph)?;
    let i = subset(&g, &a.subset)?;
    let method = match a.method {
        Method::ClosedForm => PcMethod::ClosedForm,
        Method::UnivariateFit => PcMethod::UnivariateFit,
        Method::Gorenstein => PcMethod::Gorenstein,
    };
    let depth = *depths(&a.depth)?.first().expect("nonempty");
    let mut calc = Calculator::new(&g, depth);
    let mut values = Vec::new();
    for h in classes(&g, &a.graph, &a.class)? {
        let v = calc.pc_reduced(&h, &i, method)?;
        values.push(json!({ "class": vec_json(&h), "pc": rat_json(&v) }));
    }
    Ok((0, json!({ "schema": SCHEMA, "command": "pc", "subset": ids(&g, &i), "values": values })))
}

fn surgery(a: SurgeryArgs) -> CliResult<(u8, Value)> {
    let g = load_graph(&a.graph)?;
    let i = subset(&g, &a.subset)?;
    let ds = depths(&a.depth)?;
    let mut calc = Calculator::new(&g, ds[0]);
    let mut reports: Vec<SurgeryReport> = Vec::new();
    let batch = match a.mode {
        SurgeryMode::Red1 => Some(Reduction::Red1),
        SurgeryMode::Red2 => Some(Reduction::Red2),
        _ => None,
    };
    if let (Some(which), "all") = (batch, a.class.trim()) {
        reports = calc.reduction_rational_all(&i, which)?;
    }
    let hs = if reports.is_empty() { classes(&g, &a.graph, &a.class)? } else { Vec::new() };
    for h in hs {
        let r = match a.mode {
            SurgeryMode::Counting => calc.verify_counting_surgery(&h, &i, &ds),
            SurgeryMode::Quasipoly => calc.verify_quasipoly(&h, &i, &ds),
            SurgeryMode::Pc => calc.verify_pc_surgery(&h, &i),
            SurgeryMode::Red1 => calc.reduction_rational(&h, &i, Reduction::Red1),
            SurgeryMode::Red2 => calc.reduction_rational(&h, &i, Reduction::Red2),
        };
        reports.push(r?);
    }
    let verdict = if reports.iter().any(|r| r.verdict == Verdict::ConditionallyVerified) {
        Verdict::ConditionallyVerified
    } else {
        Verdict::Equal
    };
    Ok((0, json!({ "schema": SCHEMA, "command": "surgery", "verdict": verdict, "reports": reports })))
}

fn gorenstein(a: GorensteinArgs) -> CliResult<(u8, Value)> {
    let g = load_graph(&a.graph)?;
    let n = g.len();
    let mut oracle = GorensteinOracle::new(&g)?;
    let subsets: Vec<Vec<usize>> = match &a.subset {
        Some(s) => vec![subset(&g, s)?],
        None => (1u64..1 << n).map(|m| (0..n).filter(|v| m >> v & 1 == 1).collect()).collect(),
    };
    let mut pcs = Vec::new();
    for s in &subsets {
        pcs.push(serde_json::to_value(oracle.pc(s)?).expect("json"));
    }
    let zk = g.canonical_cycle().z_k;
    let swbar = cubes::swbar_via_cubes(&g, &zk)?;
    let s = cubes::s_function(&g)?;
    Ok((
        0,
        json!({
            "schema": SCHEMA,
            "command": "gorenstein",
            "Z_K": vec_json(&zk),
            "swbar_cubes": rat_json(&swbar),
            "s_function": s,
            "pc": pcs,
        }),
    ))
}

fn depths(s: &str) -> CliResult<Vec<u32>> {
    let ds: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad --depth `{s}`; expected e.g. `2` or `2,3`")))?;
    if ds.is_empty() || ds.contains(&0) {
        return Err(usage("depths must be positive"));
    }
    Ok(ds)
}

/// `all`, `auto` (the manifest's figure class), a class index, or an L′-vector.
fn classes(g: &PlumbingGraph, path: &Path, sel: &str) -> CliResult<Vec<LatticeVector>> {
    let table = g.class_table();
    match sel.trim() {
        "all" => Ok(table.reps()),
        "auto" => {
            let fig = manifest_entry_for(path)
                .and_then(|e| e.figure_class)
                .ok_or_else(|| usage("--class auto needs a manifest.json entry with a figure class next to the graph"))?;
            let x = parse_vector(&fig.join(","), g.len())?;
            Ok(vec![g.class_of(&x)?])
        }
        s if !s.contains(',') && !s.starts_with('(') && s.parse::<usize>().is_ok() => {
            let k: usize = s.parse().expect("checked");
            if k >= table.len() {
                return Err(usage(format!("class index {k} out of range; the group has order {}", table.len())));
            }
            Ok(vec![table.rep(k as u32)])
        }
        s => {
            let x = parse_vector(s, g.len())?;
            Ok(vec![g.class_of(&x)?])
        }
    }
}

/// `leaves`, `nodes`, `all` or comma-separated vertex ids.
fn subset(g: &PlumbingGraph, sel: &str) -> CliResult<Vec<usize>> {
    let vs: Vec<usize> = match sel.trim() {
        "all" => (0..g.len()).collect(),
        "nodes" => g.nodes(),
        "leaves" => (0..g.len()).filter(|&v| g.degree(v) == 1).collect(),
        s => return Ok(g.subset_from_ids(&s.split(',').map(str::trim).collect::<Vec<_>>())?),
    };
    if vs.is_empty() {
        return Err(usage(format!("the graph has no {sel}")));
    }
    Ok(vs)
}

fn ids(g: &PlumbingGraph, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| g.ids()[v].clone()).collect()
}
