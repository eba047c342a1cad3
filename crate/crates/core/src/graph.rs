//! Plumbing trees, their lattices and the discriminant group.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intlin;
use crate::lattice::LatticeVector;
use crate::rational::{int, rat, Rational};

/// Laufer-type iterations give up after this many steps.
pub const ITERATION_CAP: usize = 1_000_000;

/// Unvalidated input: vertices in declaration order and edges by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawGraph {
    pub vertices: Vec<(String, i64)>,
    pub edges: Vec<(String, String)>,
}

/// A validated negative definite plumbing tree.
#[derive(Debug)]
pub struct PlumbingGraph {
    ids: Vec<String>,
    euler: Vec<i64>,
    edges: Vec<(usize, usize)>,
    nbrs: Vec<Vec<usize>>,
    det: i64,
    /// `dual[v][w] = d · (E*_v)_w`, the adjugate of `-I`.
    dual: Vec<Vec<i64>>,
    classes: OnceLock<ClassTable>,
}

impl Clone for PlumbingGraph {
    fn clone(&self) -> Self {
        PlumbingGraph {
            ids: self.ids.clone(),
            euler: self.euler.clone(),
            edges: self.edges.clone(),
            nbrs: self.nbrs.clone(),
            det: self.det,
            dual: self.dual.clone(),
            classes: OnceLock::new(),
        }
    }
}

impl PartialEq for PlumbingGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.euler == other.euler && self.edges == other.edges
    }
}

/// Checks the tree and definiteness conditions and caches the dual basis.
pub fn validate(raw: &RawGraph) -> Result<PlumbingGraph> {
    if raw.vertices.is_empty() {
        return Err(Error::Empty);
    }
    let mut index = HashMap::new();
    for (i, (id, _)) in raw.vertices.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateVertex(id.clone()));
        }
    }
    let n = raw.vertices.len();
    let mut nbrs = vec![Vec::new(); n];
    let mut edges = Vec::with_capacity(raw.edges.len());
    for (a, b) in &raw.edges {
        let ia = *index.get(a).ok_or_else(|| Error::UnknownVertex(a.clone()))?;
        let ib = *index.get(b).ok_or_else(|| Error::UnknownVertex(b.clone()))?;
        if ia == ib {
            return Err(Error::NotATree(format!("loop at `{a}`")));
        }
        if nbrs[ia].contains(&ib) {
            return Err(Error::NotATree(format!("repeated edge `{a}`-`{b}`")));
        }
        nbrs[ia].push(ib);
        nbrs[ib].push(ia);
        edges.push((ia, ib));
    }
    if edges.len() + 1 != n {
        let what = if edges.len() + 1 > n { "has a cycle" } else { "is disconnected" };
        return Err(Error::NotATree(format!("{n} vertices and {} edges: graph {what}", edges.len())));
    }
    let reached = bfs_order(&nbrs, 0).len();
    if reached != n {
        return Err(Error::NotATree(format!("only {reached} of {n} vertices are connected")));
    }
    for list in nbrs.iter_mut() {
        list.sort_unstable();
    }
    let euler: Vec<i64> = raw.vertices.iter().map(|(_, e)| *e).collect();
    let neg = neg_form(&euler, &nbrs);
    let minors = intlin::leading_minors(&neg);
    if let Some((k, m)) = minors.iter().enumerate().find(|(_, m)| *m <= &BigInt::zero()) {
        return Err(Error::NotNegativeDefinite { order: k + 1, minor: m.clone() });
    }
    let det_big = minors.last().cloned().expect("nonempty");
    let det = det_big
        .to_i64()
        .filter(|d| *d <= i64::MAX / 1024)
        .ok_or_else(|| Error::DeterminantTooLarge(det_big.clone()))?;
    let inv = intlin::inverse(&neg).expect("definite forms are nonsingular");
    let scale = Rational::from_integer(det.into());
    let dual: Vec<Vec<i64>> = inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let y = x * &scale;
                    debug_assert!(y.is_integer());
                    y.to_integer().to_i64().expect("adjugate entry fits")
                })
                .collect()
        })
        .collect();
    assert!(dual.iter().flatten().all(|&x| x > 0), "dual basis must be strictly positive");
    Ok(PlumbingGraph {
        ids: raw.vertices.iter().map(|(id, _)| id.clone()).collect(),
        euler,
        edges,
        nbrs,
        det,
        dual,
        classes: OnceLock::new(),
    })
}

fn neg_form(euler: &[i64], nbrs: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let n = euler.len();
    let mut m = vec![vec![0i64; n]; n];
    for v in 0..n {
        m[v][v] = -euler[v];
        for &w in &nbrs[v] {
            m[v][w] = -1;
        }
    }
    m
}

fn bfs_order(nbrs: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; nbrs.len()];
    let mut order = vec![start];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &nbrs[v] {
            if !seen[w] {
                seen[w] = true;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order
}

impl PlumbingGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn euler(&self) -> &[i64] {
        &self.euler
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }

    pub fn vertex(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Vertices of degree at least three.
    pub fn nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.degree(v) >= 3).collect()
    }

    /// Vertices of degree at most one.
    pub fn ends(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.degree(v) <= 1).collect()
    }

    pub fn raw(&self) -> RawGraph {
        RawGraph {
            vertices: self.ids.iter().cloned().zip(self.euler.iter().copied()).collect(),
            edges: self.edges.iter().map(|&(a, b)| (self.ids[a].clone(), self.ids[b].clone())).collect(),
        }
    }

    /// `d = det(-I)`, the order of `H`.
    pub fn det(&self) -> i64 {
        self.det
    }

    /// `d · (E*_v)_w`.
    pub fn dual_scaled(&self) -> &[Vec<i64>] {
        &self.dual
    }

    /// `(E_v, E_w)`.
    pub fn form(&self, v: usize, w: usize) -> i64 {
        if v == w {
            self.euler[v]
        } else if self.nbrs[v].binary_search(&w).is_ok() {
            1
        } else {
            0
        }
    }

    /// The dual basis `E*_v` and `d`.
    pub fn dual_basis(&self) -> (Vec<LatticeVector>, i64) {
        let d = self.det as i128;
        let vs = self
            .dual
            .iter()
            .map(|row| LatticeVector::new(row.iter().map(|&x| x as i128).collect(), d))
            .collect();
        (vs, self.det)
    }

    pub fn dual_vector(&self, v: usize) -> LatticeVector {
        LatticeVector::new(self.dual[v].iter().map(|&x| x as i128).collect(), self.det as i128)
    }

    /// `(x, y)` for rational vectors.
    pub fn pairing(&self, x: &LatticeVector, y: &LatticeVector) -> Rational {
        self.check_dim(x).expect("dimension");
        self.check_dim(y).expect("dimension");
        let (xn, yn) = (x.numerators(), y.numerators());
        let mut s: i128 = 0;
        for v in 0..self.len() {
            s += xn[v] * self.euler[v] as i128 * yn[v];
            for &w in &self.nbrs[v] {
                s += xn[v] * yn[w];
            }
        }
        rat(s, x.den() * y.den())
    }

    /// `x²`.
    pub fn square(&self, x: &LatticeVector) -> Rational {
        self.pairing(x, x)
    }

    /// `-(x, E_v)` for every `v`: the coordinates of `x` in the dual basis.
    pub fn dual_coords(&self, x: &LatticeVector) -> Vec<Rational> {
        self.dual_coords_scaled(x).into_iter().map(|a| rat(a, x.den())).collect()
    }

    /// `-den(x) · (x, E_v)`.
    fn dual_coords_scaled(&self, x: &LatticeVector) -> Vec<i128> {
        let xn = x.numerators();
        (0..self.len())
            .map(|v| {
                let mut s = -(self.euler[v] as i128) * xn[v];
                for &w in &self.nbrs[v] {
                    s -= xn[w];
                }
                s
            })
            .collect()
    }

    /// Integral dual coordinates `a_v(x)`, or an error if `x ∉ L′`.
    pub fn dual_coords_int(&self, x: &LatticeVector) -> Result<Vec<i128>> {
        self.check_dim(x)?;
        let s = self.dual_coords_scaled(x);
        if s.iter().any(|a| a % x.den() != 0) {
            return Err(Error::NotInDualLattice);
        }
        Ok(s.into_iter().map(|a| a / x.den()).collect())
    }

    pub fn check_dim(&self, x: &LatticeVector) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        Ok(())
    }

    pub fn in_dual_lattice(&self, x: &LatticeVector) -> bool {
        self.dual_coords_int(x).is_ok()
    }

    /// `Σ_v a_v E*_v`.
    pub fn from_dual_coords(&self, a: &[i128]) -> LatticeVector {
        let n = self.len();
        let num = (0..n)
            .map(|w| (0..n).map(|v| a[v] * self.dual[v][w] as i128).sum())
            .collect();
        LatticeVector::new(num, self.det as i128)
    }

    /// The canonical cycle `K`, determined by `(K + E_v, E_v) + 2 = 0`.
    pub fn canonical_cycle(&self) -> CanonicalCycle {
        let a: Vec<i128> = self.euler.iter().map(|&e| 2 + e as i128).collect();
        let k = self.from_dual_coords(&a);
        let z_k = -&k;
        let gorenstein = k.is_integral();
        CanonicalCycle { k, z_k, gorenstein }
    }

    /// `χ(x) = -(x, x + K)/2`.
    pub fn chi(&self, x: &LatticeVector) -> Rational {
        let k = self.canonical_cycle().k;
        -self.pairing(x, &(x + &k)) / int(2)
    }

    /// `((K + 2x)² + |V|)/8`.
    pub fn normalization(&self, x: &LatticeVector) -> Rational {
        let k = self.canonical_cycle().k;
        let y = &k + &x.scale(2);
        (self.square(&y) + int(self.len() as i128)) / int(8)
    }

    /// The discriminant group, computed on first use.
    pub fn class_table(&self) -> &ClassTable {
        self.classes.get_or_init(|| ClassTable::build(self))
    }

    /// The table representative congruent to `x` modulo `L`.
    pub fn class_of(&self, x: &LatticeVector) -> Result<LatticeVector> {
        let t = self.class_table();
        Ok(t.rep(t.index_of(self, x)?))
    }

    /// Smallest `x ≥ start` in `start + L` with `a_v(x) ≥ floors[v]` for all `v`.
    pub fn push_to_cone(&self, start: &LatticeVector, floors: &[i128]) -> Result<LatticeVector> {
        let mut a = self.dual_coords_int(start)?;
        let mut add = vec![0i128; self.len()];
        let mut steps = 0usize;
        loop {
            let Some(v) = (0..self.len()).find(|&v| a[v] < floors[v]) else { break };
            add[v] += 1;
            a[v] -= self.euler[v] as i128;
            for &w in &self.nbrs[v] {
                a[w] -= 1;
            }
            steps += 1;
            if steps > ITERATION_CAP {
                return Err(Error::IterationCap { what: "Laufer iteration", cap: ITERATION_CAP });
            }
        }
        Ok(start + &LatticeVector::integral(add))
    }

    /// `s_h`: the minimal element of the Lipman cone `S′` in the class of `h`.
    pub fn minimal_s_rep(&self, h: &LatticeVector) -> Result<LatticeVector> {
        let r = self.class_of(h)?;
        let s = self.push_to_cone(&r, &vec![0; self.len()])?;
        debug_assert!(s.geq(&r));
        Ok(s)
    }

    /// Artin's criterion via Laufer's computation of the fundamental cycle.
    pub fn is_rational(&self) -> Result<bool> {
        Ok(self.chi(&self.fundamental_cycle()?) == int(1))
    }

    /// The smallest nonzero `x ∈ L` with `(x, E_v) ≤ 0` for all `v`.
    pub fn fundamental_cycle(&self) -> Result<LatticeVector> {
        let n = self.len();
        let mut x = vec![1i128; n];
        let mut steps = 0usize;
        loop {
            let bad = (0..n).find(|&v| {
                let mut s = self.euler[v] as i128 * x[v];
                for &w in &self.nbrs[v] {
                    s += x[w];
                }
                s > 0
            });
            let Some(v) = bad else { break };
            x[v] += 1;
            steps += 1;
            if steps > ITERATION_CAP {
                return Err(Error::IterationCap { what: "fundamental cycle", cap: ITERATION_CAP });
            }
        }
        Ok(LatticeVector::integral(x))
    }

    /// Resolves vertex ids to sorted, distinct indices.
    pub fn subset_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let v = self
                .vertex(id.as_ref())
                .ok_or_else(|| Error::InvalidSubset(format!("unknown vertex `{}`", id.as_ref())))?;
            out.push(v);
        }
        normalize_subset(self.len(), &out)
    }

    /// The induced subgraphs on `V \ I`, one per connected component.
    pub fn components_minus(&self, subset: &[usize]) -> Result<GraphForest> {
        let subset = normalize_subset(self.len(), subset)?;
        let mut removed = vec![false; self.len()];
        subset.iter().for_each(|&v| removed[v] = true);
        let mut seen = removed.clone();
        let mut components = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut verts = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < verts.len() {
                let v = verts[i];
                for &w in &self.nbrs[v] {
                    if !seen[w] {
                        seen[w] = true;
                        verts.push(w);
                    }
                }
                i += 1;
            }
            verts.sort_unstable();
            components.push(self.induced(&verts)?);
        }
        Ok(GraphForest { parent_len: self.len(), components })
    }

    /// The full subgraph on a connected vertex set.
    pub fn induced(&self, verts: &[usize]) -> Result<Component> {
        let verts = normalize_subset(self.len(), verts)?;
        let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let raw = RawGraph {
            vertices: verts.iter().map(|&v| (self.ids[v].clone(), self.euler[v])).collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| pos.contains_key(a) && pos.contains_key(b))
                .map(|&(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
                .collect(),
        };
        let graph = validate(&raw)?;
        Ok(Component { graph, origin: verts })
    }

    /// `j*_i(x)`: the unique `y ∈ L′(T_i)` with `(y, E_w) = (x, E_w)` for `w ∈ T_i`.
    pub fn dual_restrict(&self, x: &LatticeVector, comp: &Component) -> Result<LatticeVector> {
        let a = self.dual_coords_int(x)?;
        let sub: Vec<i128> = comp.origin.iter().map(|&v| a[v]).collect();
        Ok(comp.graph.from_dual_coords(&sub))
    }

    /// Vertices of the smallest connected subgraph containing `subset`.
    pub fn connected_closure(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let subset = normalize_subset(self.len(), subset)?;
        let mut keep = vec![false; self.len()];
        subset.iter().for_each(|&v| keep[v] = true);
        // Repeatedly prune leaves of the tree that are not in the subset.
        let mut deg: Vec<usize> = (0..self.len()).map(|v| self.degree(v)).collect();
        let mut alive = vec![true; self.len()];
        let mut stack: Vec<usize> = (0..self.len()).filter(|&v| deg[v] <= 1 && !keep[v]).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &w in &self.nbrs[v] {
                if alive[w] {
                    deg[w] -= 1;
                    if deg[w] <= 1 && !keep[w] {
                        stack.push(w);
                    }
                }
            }
        }
        Ok((0..self.len()).filter(|&v| alive[v]).collect())
    }

    pub fn is_connected_subset(&self, subset: &[usize]) -> bool {
        match self.connected_closure(subset) {
            Ok(c) => c.len() == subset.len(),
            Err(_) => false,
        }
    }
}

/// Coordinate restriction `x|_I`.
pub fn project_pi(x: &LatticeVector, subset: &[usize]) -> LatticeVector {
    x.restrict(subset)
}

/// Sorts and deduplicates, rejecting empty sets and out-of-range indices.
pub fn normalize_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidSubset("empty vertex subset".into()));
    }
    if let Some(v) = s.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidSubset(format!("vertex index {v} out of range")));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalCycle {
    pub k: LatticeVector,
    pub z_k: LatticeVector,
    /// `K ∈ L`.
    pub gorenstein: bool,
}

/// A connected full subgraph with its vertex indices in the parent graph.
#[derive(Clone, Debug)]
pub struct Component {
    pub graph: PlumbingGraph,
    pub origin: Vec<usize>,
}

/// The components of `T \ I`.
#[derive(Clone, Debug)]
pub struct GraphForest {
    pub parent_len: usize,
    pub components: Vec<Component>,
}

impl GraphForest {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Representatives of `H = L′/L` in the semi-open unit cube.
#[derive(Clone, Debug)]
pub struct ClassTable {
    d: i64,
    n: usize,
    /// Numerators over `d`, each in `[0, d)`, sorted lexicographically.
    reps: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, u32>,
    /// `add[v * d + c]` is the class of `rep(c) + E*_v`.
    add: Vec<u32>,
}

impl ClassTable {
    fn build(g: &PlumbingGraph) -> ClassTable {
        let d = g.det;
        let n = g.len();
        let reduce = |x: &[i64]| -> Vec<i64> { x.iter().map(|c| c.rem_euclid(d)).collect() };
        let mut reps = vec![vec![0i64; n]];
        let mut index: HashMap<Vec<i64>, u32> = HashMap::from([(reps[0].clone(), 0)]);
        let mut edges: Vec<(u32, usize, Vec<i64>)> = Vec::new();
        let mut i = 0;
        while i < reps.len() {
            for v in 0..n {
                let next: Vec<i64> = reps[i].iter().zip(&g.dual[v]).map(|(a, b)| a + b).collect();
                let next = reduce(&next);
                if !index.contains_key(&next) {
                    index.insert(next.clone(), reps.len() as u32);
                    reps.push(next.clone());
                }
                edges.push((i as u32, v, next));
            }
            i += 1;
        }
        assert_eq!(reps.len() as i64, d, "class group order must equal the determinant");
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by(|&a, &b| reps[a].cmp(&reps[b]));
        let mut relabel = vec![0u32; reps.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new as u32;
        }
        let sorted: Vec<Vec<i64>> = order.iter().map(|&o| reps[o].clone()).collect();
        let index: HashMap<Vec<i64>, u32> = sorted.iter().enumerate().map(|(i, r)| (r.clone(), i as u32)).collect();
        let mut add = vec![0u32; n * d as usize];
        for (from, v, to) in edges {
            add[v * d as usize + relabel[from as usize] as usize] = index[&to];
        }
        ClassTable { d, n, reps: sorted, index, add }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, c: u32) -> LatticeVector {
        LatticeVector::new(self.reps[c as usize].iter().map(|&x| x as i128).collect(), self.d as i128)
    }

    pub fn reps(&self) -> Vec<LatticeVector> {
        (0..self.len() as u32).map(|c| self.rep(c)).collect()
    }

    /// Numerators of `rep(c)` over `d`.
    pub fn rep_scaled(&self, c: u32) -> &[i64] {
        &self.reps[c as usize]
    }

    pub fn index_of(&self, g: &PlumbingGraph, x: &LatticeVector) -> Result<u32> {
        g.dual_coords_int(x)?;
        let scaled = x.scaled(self.d as i128).ok_or(Error::NotInDualLattice)?;
        let key: Vec<i64> = scaled.iter().map(|c| c.rem_euclid(self.d as i128) as i64).collect();
        self.index.get(&key).copied().ok_or(Error::NotInDualLattice)
    }

    /// The class of `rep(c) + E*_v`.
    #[inline]
    pub fn add_dual(&self, v: usize, c: u32) -> u32 {
        self.add[v * self.d as usize + c as usize]
    }

    /// The class of `rep(c) + Σ a_v E*_v`.
    pub fn shift(&self, mut c: u32, a: &[i128]) -> u32 {
        for (v, &k) in a.iter().enumerate() {
            let ord = self.order_of_dual(v) as i128;
            for _ in 0..k.rem_euclid(ord) {
                c = self.add_dual(v, c);
            }
        }
        c
    }

    /// The order of `[E*_v]` in `H`.
    pub fn order_of_dual(&self, v: usize) -> u32 {
        let mut c = self.add_dual(v, 0);
        let mut k = 1;
        while c != 0 {
            c = self.add_dual(v, c);
            k += 1;
        }
        k
    }

    /// The order of class `c` in `H`.
    pub fn order_of(&self, c: u32) -> i64 {
        let r = &self.reps[c as usize];
        let g = r.iter().fold(self.d, |g, &x| num_integer::gcd(g, x));
        self.d / g
    }

    pub fn rank(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(vs: &[(&str, i64)], es: &[(&str, &str)]) -> Result<PlumbingGraph> {
        validate(&RawGraph {
            vertices: vs.iter().map(|(a, b)| (a.to_string(), *b)).collect(),
            edges: es.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        })
    }

    #[test]
    fn single_vertex() {
        let t = g(&[("a", -3)], &[]).unwrap();
        assert_eq!(t.det(), 3);
        assert_eq!(t.dual_vector(0), LatticeVector::new(vec![1], 3));
        let cc = t.canonical_cycle();
        assert_eq!(cc.k, LatticeVector::new(vec![-1], 3));
        assert!(!cc.gorenstein);
        assert_eq!(t.class_table().reps(), vec![
            LatticeVector::zero(1),
            LatticeVector::new(vec![1], 3),
            LatticeVector::new(vec![2], 3)
        ]);
        assert_eq!(t.class_of(&LatticeVector::new(vec![-2], 3)).unwrap(), LatticeVector::new(vec![1], 3));
        assert!(t.is_rational().unwrap());
    }

    #[test]
    fn rejections() {
        assert!(matches!(g(&[], &[]), Err(Error::Empty)));
        assert!(matches!(g(&[("a", -1), ("b", -1)], &[("a", "b")]),
            Err(Error::NotNegativeDefinite { order: 2, .. })));
        assert!(matches!(g(&[("a", -2), ("a", -2)], &[]), Err(Error::DuplicateVertex(_))));
        assert!(matches!(g(&[("a", -2), ("b", -2)], &[]), Err(Error::NotATree(_))));
        assert!(matches!(g(&[("a", -2)], &[("a", "z")]), Err(Error::UnknownVertex(_))));
        assert!(matches!(
            g(&[("a", -3), ("b", -3), ("c", -3)], &[("a", "b"), ("b", "c"), ("c", "a")]),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn a2_dual_basis_and_classes() {
        let t = g(&[("1", -2), ("2", -2)], &[("1", "2")]).unwrap();
        let (dual, d) = t.dual_basis();
        assert_eq!(d, 3);
        assert_eq!(dual[0], LatticeVector::new(vec![2, 1], 3));
        assert_eq!(dual[1], LatticeVector::new(vec![1, 2], 3));
        let sum = &dual[0] + &dual[1];
        assert_eq!(t.class_of(&sum).unwrap(), LatticeVector::zero(2));
        assert_eq!(t.minimal_s_rep(&dual[0]).unwrap(), dual[0]);
        assert_eq!(t.chi(&LatticeVector::basis(2, 0)), int(1));
        assert_eq!(t.class_table().order_of_dual(0), 3);
    }

    #[test]
    fn closure_of_leaves_in_a_star() {
        let t = g(&[("c", -3), ("a", -2), ("b", -2), ("x", -2)], &[("c", "a"), ("c", "b"), ("c", "x")]).unwrap();
        assert_eq!(t.connected_closure(&[1, 2]).unwrap(), vec![0, 1, 2]);
        assert_eq!(t.connected_closure(&[3]).unwrap(), vec![3]);
        let f = t.components_minus(&[0]).unwrap();
        assert_eq!(f.components.len(), 3);
        assert!(t.components_minus(&[0, 1, 2, 3]).unwrap().is_empty());
    }
}
