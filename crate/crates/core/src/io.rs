//! Graph files, the fixture corpus and the seeded random tree generator.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, PlumbingGraph, RawGraph};
use crate::lattice::LatticeVector;
use crate::rational::{fmt_rational, parse_rational};

#[derive(Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct JsonVertex {
    id: serde_json::Value,
    euler: i64,
}

fn json_id(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::Parse { line: 0, msg: "vertex ids must be strings or numbers".into() }),
    }
}

/// Parses either the line format or its JSON equivalent.
pub fn parse_graph(text: &str) -> Result<RawGraph> {
    if text.trim_start().starts_with('{') {
        return parse_json(text);
    }
    let mut raw = RawGraph::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let tok: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
        match tok.as_slice() {
            [] => {}
            ["v", id, e] => {
                let e = e.parse::<i64>().map_err(|_| err("euler number must be an integer"))?;
                raw.vertices.push((id.to_string(), e));
            }
            ["e", a, b] => raw.edges.push((a.to_string(), b.to_string())),
            _ => return Err(err("expected `v <id> <euler>` or `e <id> <id>`")),
        }
    }
    Ok(raw)
}

fn parse_json(text: &str) -> Result<RawGraph> {
    let j: JsonGraph = serde_json::from_str(text)?;
    let mut raw = RawGraph::default();
    for v in &j.vertices {
        raw.vertices.push((json_id(&v.id)?, v.euler));
    }
    raw.edges = j.edges;
    Ok(raw)
}

/// Writes the line format.
pub fn emit_graph(raw: &RawGraph) -> String {
    let mut s = String::new();
    for (id, e) in &raw.vertices {
        s.push_str(&format!("v {id} {e}\n"));
    }
    for (a, b) in &raw.edges {
        s.push_str(&format!("e {a} {b}\n"));
    }
    s
}

pub fn load_graph(path: &Path) -> Result<PlumbingGraph> {
    validate(&parse_graph(&fs::read_to_string(path)?)?)
}

/// Parses comma separated rationals into an `L ⊗ Q` vector of rank `n`.
pub fn parse_vector(s: &str, n: usize) -> Result<LatticeVector> {
    let parts: Vec<&str> = s.trim().trim_start_matches('(').trim_end_matches(')').split(',').collect();
    if parts.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: parts.len() });
    }
    let coords = parts
        .iter()
        .map(|p| parse_rational(p).ok_or_else(|| Error::Parse { line: 0, msg: format!("bad rational `{p}`") }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeVector::from_rationals(&coords))
}

pub fn vector_strings(x: &LatticeVector) -> Vec<String> {
    x.coords().iter().map(fmt_rational).collect()
}

fn raw(vertices: &[(&str, i64)], edges: &[(&str, &str)]) -> RawGraph {
    RawGraph {
        vertices: vertices.iter().map(|(a, e)| (a.to_string(), *e)).collect(),
        edges: edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    }
}

/// A string (bamboo) with the given euler numbers.
pub fn string_graph(eulers: &[i64]) -> RawGraph {
    RawGraph {
        vertices: eulers.iter().enumerate().map(|(i, &e)| (format!("v{}", i + 1), e)).collect(),
        edges: (1..eulers.len()).map(|i| (format!("v{i}"), format!("v{}", i + 1))).collect(),
    }
}

/// Star with a central vertex and strings attached to it.
pub fn star_graph(center: i64, legs: &[&[i64]]) -> RawGraph {
    let mut g = RawGraph { vertices: vec![("c".into(), center)], edges: vec![] };
    for (i, leg) in legs.iter().enumerate() {
        let mut prev = "c".to_string();
        for (j, &e) in leg.iter().enumerate() {
            let id = format!("l{}_{}", i + 1, j + 1);
            g.vertices.push((id.clone(), e));
            g.edges.push((prev, id.clone()));
            prev = id;
        }
    }
    g
}

/// The ADE graphs `A_1..A_5, D_4, D_5, E_6, E_7, E_8`.
pub fn ade_graphs() -> Vec<(String, RawGraph)> {
    let mut out: Vec<(String, RawGraph)> = (1..=5).map(|n| (format!("a{n}"), string_graph(&vec![-2; n]))).collect();
    out.push(("d4".into(), star_graph(-2, &[&[-2], &[-2], &[-2]])));
    out.push(("d5".into(), star_graph(-2, &[&[-2], &[-2], &[-2, -2]])));
    out.push(("e6".into(), star_graph(-2, &[&[-2], &[-2, -2], &[-2, -2]])));
    out.push(("e7".into(), star_graph(-2, &[&[-2], &[-2, -2], &[-2, -2, -2]])));
    out.push(("e8".into(), star_graph(-2, &[&[-2], &[-2, -2], &[-2, -2, -2, -2]])));
    out
}

/// Two nodes joined through a `-2` vertex, each carrying two `-4` leaves.
/// Coordinates: left node, middle vertex, right node, then the leaves.
pub fn ex_graph1() -> RawGraph {
    raw(
        &[("n1", -2), ("m", -2), ("n2", -2), ("a1", -4), ("a2", -4), ("b1", -4), ("b2", -4)],
        &[("n1", "m"), ("m", "n2"), ("n1", "a1"), ("n1", "a2"), ("n2", "b1"), ("n2", "b2")],
    )
}

/// A `-3` vertex with four `-2` leaves; the center comes first.
pub fn ex_graph2() -> RawGraph {
    star_graph(-3, &[&[-2], &[-2], &[-2], &[-2]])
}

/// The Brieskorn sphere `Σ(2,3,7)`.
pub fn sigma_237() -> RawGraph {
    star_graph(-1, &[&[-2], &[-3], &[-7]])
}

/// A random negative definite tree: `n` uniform in `n_range`, the parent of
/// vertex `i` uniform among earlier vertices, eulers uniform in `[-5, -2]`;
/// rejected and redrawn until definite. Deterministic in `seed`.
pub fn random_tree(seed: u64, n_range: (usize, usize)) -> PlumbingGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(n_range.0..=n_range.1);
        let mut g = RawGraph::default();
        for i in 0..n {
            g.vertices.push((format!("v{i}"), rng.gen_range(-5..=-2)));
            if i > 0 {
                let p = rng.gen_range(0..i);
                g.edges.push((format!("v{p}"), format!("v{i}")));
            }
        }
        if let Ok(t) = validate(&g) {
            return t;
        }
    }
}

/// Default parameters for the random corpus.
pub const RANDOM_N_RANGE: (usize, usize) = (3, 8);

/// Corpus trees with a larger discriminant group are skipped so that sweeps
/// over every class stay fast.
pub const RANDOM_DET_CAP: i64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub vertices: usize,
    pub det: i64,
    pub gorenstein: bool,
    pub rational: bool,
    /// The class singled out in the corresponding figure, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub figure_class: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub random_seed: u64,
    pub fixtures: Vec<ManifestEntry>,
}

/// Named fixtures: the two example graphs, ADE, a Gorenstein non-ADE graph and a
/// single `-3` vertex, each with its figure class where one exists.
pub fn named_fixtures() -> Vec<(String, RawGraph, Option<Vec<&'static str>>)> {
    let mut out = vec![
        ("ex_graph1".to_string(), ex_graph1(), Some(vec!["1/2", "0", "1/2", "1/8", "7/8", "1/8", "7/8"])),
        ("ex_graph2".to_string(), ex_graph2(), Some(vec!["0", "1/2", "1/2", "1/2", "1/2"])),
        ("single_m3".to_string(), string_graph(&[-3]), Some(vec!["1/3"])),
        ("sigma_2_3_7".to_string(), sigma_237(), None),
    ];
    out.extend(ade_graphs().into_iter().map(|(id, g)| (id, g, None)));
    out
}

/// Builds the corpus in memory: named fixtures followed by `random` seeded
/// trees, drawn from consecutive seeds and skipping those over the det cap.
pub fn fixture_corpus(seed: u64, random: usize) -> Result<Vec<(ManifestEntry, RawGraph)>> {
    let mut out = Vec::new();
    let mut push = |id: String, raw: RawGraph, fig: Option<Vec<String>>| -> Result<()> {
        let g = validate(&raw)?;
        let entry = ManifestEntry {
            file: format!("{id}.pg"),
            id,
            vertices: g.len(),
            det: g.det(),
            gorenstein: g.canonical_cycle().gorenstein,
            rational: g.is_rational()?,
            figure_class: fig,
        };
        out.push((entry, raw));
        Ok(())
    };
    for (id, raw, fig) in named_fixtures() {
        push(id, raw, fig.map(|v| v.into_iter().map(String::from).collect()))?;
    }
    let mut draw = seed;
    for i in 0..random {
        let g = loop {
            let g = random_tree(draw, RANDOM_N_RANGE);
            draw = draw.wrapping_add(1);
            if g.det() <= RANDOM_DET_CAP {
                break g;
            }
        };
        push(format!("random_{seed}_{i}"), g.raw(), None)?;
    }
    Ok(out)
}

/// Writes every fixture file plus `manifest.json` into `dir`.
pub fn write_fixtures(dir: &Path, seed: u64, random: usize) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let corpus = fixture_corpus(seed, random)?;
    for (entry, raw) in &corpus {
        fs::write(dir.join(&entry.file), emit_graph(raw))?;
    }
    let manifest = Manifest { schema: 1, random_seed: seed, fixtures: corpus.into_iter().map(|c| c.0).collect() };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Reads `manifest.json` next to a graph file, if present.
pub fn manifest_entry_for(graph_path: &Path) -> Option<ManifestEntry> {
    let dir = graph_path.parent()?;
    let text = fs::read_to_string(dir.join("manifest.json")).ok()?;
    let m: Manifest = serde_json::from_str(&text).ok()?;
    let name = graph_path.file_name()?.to_str()?;
    m.fixtures.into_iter().find(|e| e.file == name)
}
