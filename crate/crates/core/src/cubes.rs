//! χ-weighted lattice cubes on numerically Gorenstein graphs: series
//! coefficients, normalized SW invariants and Gorenstein periodic constants
//! as alternating sums of cube weights, plus the Möbius function `𝔰`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{normalize_subset, PlumbingGraph};
use crate::lattice::LatticeVector;
use crate::rational::{int, Rational};
use crate::report::ser_rat;
use crate::series::{self, counting_table_idx};
use crate::sw::{sw_invariant, DEFAULT_DEPTH};

/// Largest graph for which `s_function` sweeps all induced subgraphs.
pub const S_FUNCTION_CAP: usize = 12;

/// Largest number of (point, direction set) cells in one weight table.
pub const CELL_CAP: usize = 1 << 26;

/// `χ(l)` for integral `l`.
pub fn chi_int(g: &PlumbingGraph, l: &[i128]) -> i128 {
    let n = g.len();
    let mut s = 0i128;
    for v in 0..n {
        s += l[v] * (g.euler()[v] as i128 + 2);
        for w in 0..n {
            s -= l[v] * l[w] * g.form(v, w) as i128;
        }
    }
    s / 2
}

fn integral(g: &PlumbingGraph, l: &LatticeVector) -> Result<Vec<i128>> {
    g.check_dim(l)?;
    if !l.is_integral() {
        return Err(Error::InvalidSubset("cube formulas take integral cycles".into()));
    }
    Ok(l.numerators().to_vec())
}

/// `w(l, J) = max_{J′⊆J} χ(l + E_{J′})`.
pub fn weight(g: &PlumbingGraph, l: &LatticeVector, j: &[usize]) -> Result<i128> {
    let mut x = integral(g, l)?;
    let j: Vec<usize> = if j.is_empty() { vec![] } else { normalize_subset(g.len(), j)? };
    let mut best = i128::MIN;
    for sub in 0u64..1 << j.len() {
        for (i, &v) in j.iter().enumerate() {
            x[v] += ((sub >> i) & 1) as i128;
        }
        best = best.max(chi_int(g, &x));
        for (i, &v) in j.iter().enumerate() {
            x[v] -= ((sub >> i) & 1) as i128;
        }
    }
    Ok(best)
}

/// `z(l) = Σ_{J⊆V} (-1)^{|J|+1} w(l, J)` for integral `l`.
pub fn coefficient_via_cubes(g: &PlumbingGraph, l: &LatticeVector) -> Result<i128> {
    let x = integral(g, l)?;
    let hi: Vec<i128> = x.iter().map(|a| a + 1).collect();
    WeightTable::new(g, &x, &hi)?.coefficient(&x)
}

fn sign(mask: u64) -> i128 {
    if mask.count_ones() % 2 == 1 {
        1
    } else {
        -1
    }
}

/// Weights `w(l, J)` of every cube inside the rectangle `R(lo, hi)`.
pub struct WeightTable {
    lo: Vec<i128>,
    hi: Vec<i128>,
    strides: Vec<usize>,
    points: usize,
    w: Vec<i64>,
}

const INVALID: i64 = i64::MIN;

impl WeightTable {
    pub fn new(g: &PlumbingGraph, lo: &[i128], hi: &[i128]) -> Result<Self> {
        let n = g.len();
        if lo.len() != n || hi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lo.len().min(hi.len()) });
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidSubset("empty rectangle".into()));
        }
        let mut strides = Vec::with_capacity(n);
        let mut points = 1usize;
        for v in 0..n {
            strides.push(points);
            points = points.saturating_mul((hi[v] - lo[v] + 1) as usize);
        }
        let cells = points.saturating_mul(1usize << n);
        if n >= 40 || cells > CELL_CAP {
            return Err(Error::IterationCap { what: "cube weight table", cap: CELL_CAP });
        }
        let masks = 1usize << n;
        let mut w = vec![INVALID; cells];
        let mut x = lo.to_vec();
        for p in 0..points {
            w[p * masks] = chi_int(g, &x) as i64;
            for v in 0..n {
                if x[v] < hi[v] {
                    x[v] += 1;
                    break;
                }
                x[v] = lo[v];
            }
        }
        for mask in 1..masks {
            let j = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            for p in 0..points {
                let coord = lo[j] + ((p / strides[j]) as i128) % (hi[j] - lo[j] + 1);
                if coord == hi[j] {
                    continue;
                }
                let a = w[p * masks + rest];
                let b = w[(p + strides[j]) * masks + rest];
                if a != INVALID && b != INVALID {
                    w[p * masks + mask] = a.max(b);
                }
            }
        }
        Ok(WeightTable { lo: lo.to_vec(), hi: hi.to_vec(), strides, points, w })
    }

    fn masks(&self) -> usize {
        1 << self.lo.len()
    }

    fn index(&self, x: &[i128]) -> Option<usize> {
        let mut p = 0;
        for v in 0..x.len() {
            if x[v] < self.lo[v] || x[v] > self.hi[v] {
                return None;
            }
            p += (x[v] - self.lo[v]) as usize * self.strides[v];
        }
        Some(p)
    }

    pub fn weight(&self, x: &[i128], mask: u64) -> Option<i128> {
        let p = self.index(x)?;
        let w = self.w[p * self.masks() + mask as usize];
        (w != INVALID).then_some(w as i128)
    }

    /// `Σ_J (-1)^{|J|+1} w(l, J)`; needs `l + ΣE_v` inside the rectangle.
    pub fn coefficient(&self, l: &[i128]) -> Result<i128> {
        let mut s = 0;
        for mask in 0..self.masks() as u64 {
            let w = self
                .weight(l, mask)
                .ok_or_else(|| Error::InvalidSubset("cube leaves the weight table".into()))?;
            s += sign(mask) * w;
        }
        Ok(s)
    }

    /// Signed weight sum over the cubes of the rectangle accepted by `keep`.
    pub fn signed_sum(&self, mut keep: impl FnMut(&[i128], u64) -> bool) -> i128 {
        let n = self.lo.len();
        let masks = self.masks();
        let mut x = self.lo.clone();
        let mut s = 0;
        for p in 0..self.points {
            for mask in 0..masks {
                let w = self.w[p * masks + mask];
                if w != INVALID && keep(&x, mask as u64) {
                    s += sign(mask as u64) * w as i128;
                }
            }
            for v in 0..n {
                if x[v] < self.hi[v] {
                    x[v] += 1;
                    break;
                }
                x[v] = self.lo[v];
            }
        }
        s
    }
}

fn z_k_int(g: &PlumbingGraph) -> Result<Vec<i128>> {
    let cc = g.canonical_cycle();
    if !cc.gorenstein {
        return Err(Error::NotGorenstein);
    }
    Ok(cc.z_k.numerators().to_vec())
}

/// `sw̄(T) = Σ_{(l,J)⊆R(0,b)} (-1)^{|J|+1} w(l, J)` for any `b ≥ Z_K`.
pub fn swbar_via_cubes(g: &PlumbingGraph, b: &LatticeVector) -> Result<Rational> {
    let z = z_k_int(g)?;
    let b = integral(g, b)?;
    if b.iter().zip(&z).any(|(x, y)| x < y) {
        return Err(Error::MethodPreconditionFailed("the rectangle corner b must satisfy b ≥ Z_K".into()));
    }
    let zero = vec![0i128; g.len()];
    Ok(int(WeightTable::new(g, &zero, &b)?.signed_sum(|_, _| true)))
}

/// `sw̄(T) = -sw_0 - (K² + |V|)/8` from the series, for any graph.
pub fn swbar_via_series(g: &PlumbingGraph) -> Result<Rational> {
    Ok(-sw_invariant(g, &LatticeVector::zero(g.len()), DEFAULT_DEPTH)?.normalized_r)
}

/// Induced subgraphs `T(K)` addressed by vertex bit masks, with `sw̄` from
/// the series memoized per connected component.
struct Subgraphs<'g> {
    g: &'g PlumbingGraph,
    swbar: HashMap<u64, Rational>,
    components: HashMap<Vec<usize>, Rational>,
}

impl<'g> Subgraphs<'g> {
    fn new(g: &'g PlumbingGraph) -> Self {
        Subgraphs { g, swbar: HashMap::new(), components: HashMap::new() }
    }

    fn full(&self) -> u64 {
        (1u64 << self.g.len()) - 1
    }

    /// `sw̄(T(K))`, summed over components; zero on the empty graph.
    fn swbar(&mut self, mask: u64) -> Result<Rational> {
        if mask == 0 {
            return Ok(int(0));
        }
        if let Some(v) = self.swbar.get(&mask) {
            return Ok(v.clone());
        }
        let g = self.g;
        let value = if mask == self.full() {
            self.component_swbar((0..g.len()).collect(), g)?
        } else {
            let removed: Vec<usize> = series::bits(self.full() & !mask).collect();
            let forest = g.components_minus(&removed)?;
            let mut s = int(0);
            for c in &forest.components {
                s += self.component_swbar(c.origin.clone(), &c.graph)?;
            }
            s
        };
        self.swbar.insert(mask, value.clone());
        Ok(value)
    }

    fn component_swbar(&mut self, origin: Vec<usize>, t: &PlumbingGraph) -> Result<Rational> {
        if let Some(v) = self.components.get(&origin) {
            return Ok(v.clone());
        }
        let v = swbar_via_series(t)?;
        self.components.insert(origin, v.clone());
        Ok(v)
    }

    /// `𝔰(T(K)) = Σ_{I⊆K} (-1)^{|K|-|I|} sw̄(T(I))`.
    fn s(&mut self, mask: u64) -> Result<Rational> {
        let mut total = int(0);
        let mut sub = mask;
        loop {
            let sign = if (mask.count_ones() - sub.count_ones()) % 2 == 0 { 1 } else { -1 };
            total += self.swbar(sub)? * int(sign);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        Ok(total)
    }

    fn is_connected(&self, mask: u64) -> bool {
        let verts: Vec<usize> = series::bits(mask).collect();
        self.g.is_connected_subset(&verts)
    }
}

/// The three routes to `pc` of `Z_0(t_I)` on a numerically Gorenstein graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GorensteinPc {
    pub subset: Vec<String>,
    /// `Q_{0,I}(Z_K)` by enumeration.
    #[serde(serialize_with = "ser_rat")]
    pub series: Rational,
    /// Inclusion–exclusion over cube sums for `q_{0,J}(Z_K)`.
    #[serde(serialize_with = "ser_rat")]
    pub cubes: Rational,
    /// `sw̄(T) - sw̄(T \ I)` from the series of the subgraphs.
    #[serde(serialize_with = "ser_rat")]
    pub chain: Rational,
}

impl GorensteinPc {
    pub fn value(&self) -> &Rational {
        &self.series
    }
}

/// Shared state for all Gorenstein computations on one graph.
pub struct GorensteinOracle<'g> {
    g: &'g PlumbingGraph,
    z_k: Vec<i128>,
    table: WeightTable,
    subgraphs: Subgraphs<'g>,
}

impl<'g> GorensteinOracle<'g> {
    pub fn new(g: &'g PlumbingGraph) -> Result<Self> {
        let z_k = z_k_int(g)?;
        if g.len() > S_FUNCTION_CAP {
            return Err(Error::SubsetCapExceeded { n: g.len(), cap: S_FUNCTION_CAP });
        }
        let table = WeightTable::new(g, &vec![0; g.len()], &z_k)?;
        Ok(GorensteinOracle { g, z_k, table, subgraphs: Subgraphs::new(g) })
    }

    /// `q_{0,J}(Z_K)` as the sum over cubes of `R(0, Z_K)` off the faces `l_v = Z_K,v`, `v ∈ J`.
    pub fn modified_via_cubes(&self, j: u64) -> i128 {
        let z = &self.z_k;
        self.table
            .signed_sum(|x, mask| series::bits(j).all(|v| (mask >> v) & 1 == 1 || x[v] != z[v]))
    }

    /// `sw̄(T(I))` as the sum over the face `R(V \ I)`.
    pub fn swbar_face(&self, i: u64) -> i128 {
        let z = &self.z_k;
        let outside = self.subgraphs.full() & !i;
        self.table
            .signed_sum(|x, mask| mask & outside == 0 && series::bits(outside).all(|v| x[v] == z[v]))
    }

    pub fn swbar_series(&mut self, i: u64) -> Result<Rational> {
        self.subgraphs.swbar(i)
    }

    pub fn s(&mut self, k: u64) -> Result<Rational> {
        self.subgraphs.s(k)
    }

    /// `Q_{0,I}(Z_K)` three ways; any disagreement is an internal error.
    pub fn pc(&mut self, subset: &[usize]) -> Result<GorensteinPc> {
        let g = self.g;
        let subset = normalize_subset(g.len(), subset)?;
        let imask: u64 = subset.iter().map(|&v| 1u64 << v).sum();
        let zk = LatticeVector::integral(self.z_k.clone());
        let table = counting_table_idx(g, 0, &zk, &subset)?;
        let series_value = table.reduced_all();

        let mut cubes = 0i128;
        let mut j = imask;
        while j != 0 {
            let jv: Vec<usize> = series::bits(j).collect();
            let q = self.modified_via_cubes(j);
            let qs = table.modified(&jv)?;
            if q != qs {
                return Err(Error::InternalDisagreement(format!(
                    "q_0,J(Z_K) for J = {:?}: cubes give {q}, series give {qs}",
                    ids(g, j)
                )));
            }
            cubes += sign(j) * q;
            j = (j - 1) & imask;
        }

        let full = self.subgraphs.full();
        let chain = self.subgraphs.swbar(full)? - self.subgraphs.swbar(full & !imask)?;
        let pc = GorensteinPc {
            subset: ids(g, imask),
            series: int(series_value),
            cubes: int(cubes),
            chain,
        };
        if pc.series != pc.cubes || pc.series != pc.chain {
            return Err(Error::InternalDisagreement(format!(
                "Gorenstein pc for I = {:?}: series {}, cubes {}, chain {}",
                pc.subset, pc.series, pc.cubes, pc.chain
            )));
        }
        Ok(pc)
    }
}

fn ids(g: &PlumbingGraph, mask: u64) -> Vec<String> {
    series::bits(mask).map(|v| g.ids()[v].clone()).collect()
}

/// `pc` of `Z_0(t_I)` on a numerically Gorenstein graph, checked three ways.
pub fn gorenstein_pc(g: &PlumbingGraph, subset: &[usize]) -> Result<GorensteinPc> {
    GorensteinOracle::new(g)?.pc(subset)
}

/// `𝔰(T)` and the checks made while computing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SFunction {
    #[serde(serialize_with = "ser_rat")]
    pub value: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub swbar: Rational,
    pub subgraphs: usize,
    pub disconnected_zero: usize,
    /// Whether the cube identities were checked too (numerically Gorenstein graphs only).
    pub cube_checks: bool,
}

/// `𝔰(T)` by Möbius inversion of `sw̄` over induced subgraphs. Verifies the
/// re-summation `Σ_{T′⊆T} 𝔰(T′) = sw̄(T)` and that `𝔰` vanishes on
/// disconnected subgraphs; on Gorenstein graphs also `sw̄(T(I))` against its
/// face sum and `Σ_{K⊇J} 𝔰(T(K)) = q_{0,J}(Z_K)`.
pub fn s_function(g: &PlumbingGraph) -> Result<SFunction> {
    let n = g.len();
    if n > S_FUNCTION_CAP {
        return Err(Error::SubsetCapExceeded { n, cap: S_FUNCTION_CAP });
    }
    let full = (1u64 << n) - 1;
    let mut oracle = if g.canonical_cycle().gorenstein { Some(GorensteinOracle::new(g)?) } else { None };
    let mut plain = Subgraphs::new(g);
    let mut s_values = vec![int(0); 1 << n];
    let mut disconnected_zero = 0;
    for k in 1..=full {
        let (s, connected) = match oracle.as_mut() {
            Some(o) => (o.s(k)?, o.subgraphs.is_connected(k)),
            None => (plain.s(k)?, plain.is_connected(k)),
        };
        if !connected {
            if s != int(0) {
                return Err(Error::InternalDisagreement(format!("s does not vanish on disconnected {:?}", ids(g, k))));
            }
            disconnected_zero += 1;
        }
        s_values[k as usize] = s;
    }
    let swbar = match oracle.as_mut() {
        Some(o) => o.swbar_series(full)?,
        None => plain.swbar(full)?,
    };
    let total: Rational = s_values.iter().sum();
    if total != swbar {
        return Err(Error::InternalDisagreement("re-summation of s differs from sw̄".into()));
    }
    if let Some(o) = oracle.as_mut() {
        for i in 1..=full {
            let face = int(o.swbar_face(i));
            if face != o.swbar_series(i)? {
                return Err(Error::InternalDisagreement(format!("face sum of sw̄ differs on {:?}", ids(g, i))));
            }
        }
        for j in 1..=full {
            let mut chain = int(0);
            for k in j..=full {
                if k & j == j {
                    chain += &s_values[k as usize];
                }
            }
            if chain != int(o.modified_via_cubes(j)) {
                return Err(Error::InternalDisagreement(format!("s-chain differs from q_0,J(Z_K) on {:?}", ids(g, j))));
            }
        }
    }
    Ok(SFunction {
        value: s_values[full as usize].clone(),
        swbar,
        subgraphs: full as usize,
        disconnected_zero,
        cube_checks: oracle.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;
    use crate::io;

    #[test]
    fn e8_weights_and_swbar() {
        let (_, raw) = io::ade_graphs().pop().unwrap();
        let g = validate(&raw).unwrap();
        let zero = LatticeVector::zero(8);
        assert_eq!(weight(&g, &zero, &[]).unwrap(), 0);
        assert_eq!(weight(&g, &zero, &[3]).unwrap(), 1);
        assert_eq!(coefficient_via_cubes(&g, &zero).unwrap(), 1);
        let b = LatticeVector::integral(vec![1; 8]);
        assert_eq!(swbar_via_cubes(&g, &b).unwrap(), int(0));
    }

    #[test]
    fn not_gorenstein_is_rejected() {
        let g = validate(&io::string_graph(&[-3])).unwrap();
        let b = LatticeVector::integral(vec![1]);
        assert!(matches!(swbar_via_cubes(&g, &b), Err(Error::NotGorenstein)));
        assert!(matches!(gorenstein_pc(&g, &[0]), Err(Error::NotGorenstein)));
    }
}
