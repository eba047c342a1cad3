//! Coefficients of the topological Poincaré series and its counting functions.
//!
//! The series is `Π_v (1 - t^{E*_v})^{δ_v - 2}`, so a point `l′ = Σ a_v E*_v`
//! carries the coefficient `Π_v c_v(a_v)`. Counting functions are evaluated
//! by a depth-first search over the dual coordinates of all but one end
//! vertex; the last end is summed in closed form along its class progression.

use crate::error::{Error, Result};
use crate::graph::{normalize_subset, ClassTable, PlumbingGraph};
use crate::lattice::LatticeVector;
use crate::rational::ceil_div;

/// Subsets of constrained coordinates are tracked as bit masks of this width.
pub const MAX_TRACKED: usize = 24;

fn binomial(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * (n - i) / (i + 1))
}

/// Contribution of one vertex of degree `delta` with dual coordinate `k`.
pub fn vertex_factor(delta: usize, k: i128) -> i128 {
    if k < 0 {
        return 0;
    }
    match delta {
        0 => k + 1,
        1 => 1,
        2 => i128::from(k == 0),
        _ => {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            sign * binomial(delta as i128 - 2, k)
        }
    }
}

/// `z(l′)`, zero outside the Lipman cone.
pub fn coefficient(g: &PlumbingGraph, l: &LatticeVector) -> Result<i128> {
    let a = g.dual_coords_int(l)?;
    Ok(a.iter().enumerate().map(|(v, &k)| vertex_factor(g.degree(v), k)).product())
}

/// A nonzero term of the series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTerm {
    pub exponent: LatticeVector,
    pub coefficient: i128,
}

/// All nonzero terms with every dual coordinate at most `max_a`.
pub fn terms_in_box(g: &PlumbingGraph, max_a: i128) -> Vec<SeriesTerm> {
    let n = g.len();
    let limits: Vec<i128> = (0..n)
        .map(|v| match g.degree(v) {
            2 => 0,
            k if k >= 3 => (k as i128 - 2).min(max_a),
            _ => max_a,
        })
        .collect();
    let mut out = Vec::new();
    let mut a = vec![0i128; n];
    loop {
        let c: i128 = (0..n).map(|v| vertex_factor(g.degree(v), a[v])).product();
        if c != 0 {
            out.push(SeriesTerm { exponent: g.from_dual_coords(&a), coefficient: c });
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if a[i] < limits[i] {
                a[i] += 1;
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// Which family of counting function to evaluate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountingMode {
    /// `Q_h(x)`: sum over `l′ ≱ x`.
    Full,
    /// `Q_{h,I}(x)`: sum over `l′|_I ≱ x|_I`.
    Reduced(Vec<usize>),
    /// `q_{h,J}(x)`: sum over `l′|_J ≺ x|_J` (strictly smaller in every coordinate of `J`).
    Modified(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingQuery {
    pub mode: CountingMode,
    /// Any element of the class `h`.
    pub class: LatticeVector,
    pub threshold: LatticeVector,
}

/// How reduced counting functions are enumerated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// One search over the union `{l′ : l′_w < x_w for some w ∈ I}`.
    #[default]
    Direct,
    /// `Q_{h,I} = Σ_{∅≠J⊆I} (-1)^{|J|+1} q_{h,J}`, one search per `J`.
    InclusionExclusion,
}

pub fn counting(g: &PlumbingGraph, q: &CountingQuery) -> Result<i128> {
    counting_with(g, q, Strategy::default())
}

pub fn counting_with(g: &PlumbingGraph, q: &CountingQuery, strategy: Strategy) -> Result<i128> {
    let table = g.class_table();
    let h = table.index_of(g, &q.class)?;
    g.check_dim(&q.threshold)?;
    let all: Vec<usize> = (0..g.len()).collect();
    let subset = match &q.mode {
        CountingMode::Full => {
            if table.index_of(g, &q.threshold).ok() != Some(h) {
                return Err(Error::InfeasibleQuery("threshold is not in the requested class".into()));
            }
            all
        }
        CountingMode::Reduced(i) | CountingMode::Modified(i) => normalize_subset(g.len(), i)?,
    };
    match (&q.mode, strategy) {
        (CountingMode::Modified(_), _) => modified_count(g, h, &q.threshold, &subset),
        (_, Strategy::Direct) => union_count(g, h, &q.threshold, &subset),
        (_, Strategy::InclusionExclusion) => {
            if subset.len() > MAX_TRACKED {
                return Err(Error::TooManyCoordinates(subset.len()));
            }
            let mut total = 0i128;
            for mask in 1u64..(1 << subset.len()) {
                let j: Vec<usize> = bits(mask).map(|b| subset[b]).collect();
                let sign = if j.len() % 2 == 1 { 1 } else { -1 };
                total += sign * modified_count(g, h, &q.threshold, &j)?;
            }
            Ok(total)
        }
    }
}

pub(crate) fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |b| mask >> b & 1 == 1)
}

/// `q_{h,J}(x)` by a search pruned to the intersection region.
fn modified_count(g: &PlumbingGraph, h: u32, x: &LatticeVector, j: &[usize]) -> Result<i128> {
    let constraints = threshold_constraints(g, x, j, true);
    let w = enumerate(g, h, &constraints, Shape::Intersection)?;
    Ok(w[(1usize << j.len()) - 1])
}

fn threshold_constraints(g: &PlumbingGraph, x: &LatticeVector, coords: &[usize], bounding: bool) -> Vec<Constraint> {
    let d = g.det() as i128;
    coords
        .iter()
        .map(|&v| Constraint { vertex: v, bound: ceil_div(x.numerators()[v] * d, x.den()), bounding })
        .collect()
}

/// Weights of all `l′` of class `h` that lie below `x` in at least one
/// coordinate of `coords`, bucketed by the exact set of such coordinates.
/// One table answers every `Q_{h,I}(x)` and `q_{h,J}(x)` with `I, J ⊆ coords`.
#[derive(Clone, Debug)]
pub struct CountingTable {
    coords: Vec<usize>,
    weights: Vec<i128>,
}

pub fn counting_table(g: &PlumbingGraph, h: &LatticeVector, x: &LatticeVector, coords: &[usize]) -> Result<CountingTable> {
    let h = g.class_table().index_of(g, h)?;
    g.check_dim(x)?;
    counting_table_idx(g, h, x, &normalize_subset(g.len(), coords)?)
}

pub(crate) fn counting_table_idx(g: &PlumbingGraph, h: u32, x: &LatticeVector, coords: &[usize]) -> Result<CountingTable> {
    let constraints = threshold_constraints(g, x, coords, true);
    let weights = enumerate(g, h, &constraints, Shape::Union)?;
    Ok(CountingTable { coords: coords.to_vec(), weights })
}

/// `Q_{h,coords}(x)` alone. The two innermost end variables are summed in
/// closed form, which is much faster than `counting_table` when only the
/// total is needed.
pub(crate) fn union_count(g: &PlumbingGraph, h: u32, x: &LatticeVector, coords: &[usize]) -> Result<i128> {
    let constraints = threshold_constraints(g, x, coords, true);
    if constraints.len() > MAX_TRACKED {
        return Err(Error::TooManyCoordinates(constraints.len()));
    }
    let mut e = Enumerator::new(g, h, &constraints, Shape::Union)?;
    e.enable_pair();
    e.run();
    Ok(e.total + e.weights.iter().sum::<i128>())
}

/// `Q_{c,coords}(x)` for every class `c` at once. The region does not depend
/// on the class, so one search fills all of them: the innermost end is
/// spread over its orbit with a difference array.
pub(crate) fn union_count_all(g: &PlumbingGraph, x: &LatticeVector, coords: &[usize]) -> Result<Vec<i128>> {
    let cons = threshold_constraints(g, x, coords, true);
    if cons.len() > MAX_TRACKED {
        return Err(Error::TooManyCoordinates(cons.len()));
    }
    let mut s = AllClasses::new(g, &cons)?;
    let slack: Vec<i64> = s.slack0.clone();
    if slack.iter().any(|&b| b > 0) {
        s.dfs(0, 0, 1, &slack);
    }
    Ok(s.finish())
}

struct AllClasses<'a> {
    table: &'a ClassTable,
    vars: Vec<(usize, Option<i128>)>,
    rows: Vec<Vec<i64>>,
    inner_row: Vec<i64>,
    inner_isolated: bool,
    slack0: Vec<i64>,
    /// Orbits of the innermost generator: cycle of each class, its position,
    /// and each cycle's slice of `diff` (one extra slot per cycle).
    cycle: Vec<u32>,
    pos: Vec<u32>,
    start: Vec<usize>,
    len: Vec<usize>,
    members: Vec<u32>,
    diff: Vec<i128>,
    full: Vec<i128>,
    direct: Vec<i128>,
}

impl<'a> AllClasses<'a> {
    fn new(g: &'a PlumbingGraph, cons: &[Constraint]) -> Result<Self> {
        let n = g.len();
        let dual = g.dual_scaled();
        let row = |v: usize| -> Vec<i64> { cons.iter().map(|c| dual[v][c.vertex]).collect() };
        let reach = |v: usize| -> i128 { cons.iter().map(|c| c.bound / dual[v][c.vertex] as i128).max().unwrap_or(0) };
        let inner = (0..n)
            .filter(|&v| g.degree(v) <= 1)
            .max_by_key(|&v| (reach(v), std::cmp::Reverse(v)))
            .expect("a tree has an end vertex");
        let mut vars: Vec<(usize, Option<i128>)> = g.nodes().into_iter().map(|v| (v, Some(g.degree(v) as i128 - 2))).collect();
        let mut ends: Vec<usize> = g.ends().into_iter().filter(|&v| v != inner).collect();
        ends.sort_by_key(|&v| (reach(v), std::cmp::Reverse(v)));
        vars.extend(ends.into_iter().map(|v| (v, None)));
        let table = g.class_table();
        let d = table.len();
        let (mut cycle, mut pos) = (vec![u32::MAX; d], vec![0u32; d]);
        let (mut start, mut len, mut members) = (Vec::new(), Vec::new(), Vec::with_capacity(d));
        for c0 in 0..d as u32 {
            if cycle[c0 as usize] != u32::MAX {
                continue;
            }
            let id = start.len() as u32;
            start.push(members.len());
            let mut c = c0;
            let mut k = 0;
            loop {
                cycle[c as usize] = id;
                pos[c as usize] = k;
                members.push(c);
                k += 1;
                c = table.add_dual(inner, c);
                if c == c0 {
                    break;
                }
            }
            len.push(k as usize);
        }
        let cycles = start.len();
        let slack0 = cons
            .iter()
            .map(|c| i64::try_from(c.bound).map_err(|_| Error::InfeasibleQuery("threshold too large".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(AllClasses {
            table,
            rows: vars.iter().map(|&(v, _)| row(v)).collect(),
            vars,
            inner_row: row(inner),
            inner_isolated: g.degree(inner) == 0,
            slack0,
            cycle,
            pos,
            start,
            len,
            members,
            diff: vec![0; d + cycles],
            full: vec![0; cycles],
            direct: vec![0; d],
        })
    }

    fn dfs(&mut self, level: usize, cls: u32, weight: i128, slack: &[i64]) {
        if level == self.vars.len() {
            self.innermost(cls, weight, slack);
            return;
        }
        let (v, cap) = self.vars[level];
        if cap.is_none() && level + 1 == self.vars.len() && !self.inner_isolated {
            self.last_end(level, cls, weight, slack);
            return;
        }
        let mut next = slack.to_vec();
        let mut c = cls;
        let mut b: i128 = 0;
        loop {
            if b > 0 {
                for (x, r) in next.iter_mut().zip(&self.rows[level]) {
                    *x -= r;
                }
                c = self.table.add_dual(v, c);
            }
            if !next.iter().any(|&x| x > 0) {
                break;
            }
            let w = match cap {
                Some(m) => {
                    let f = binomial(m, b);
                    if b % 2 == 0 { weight * f } else { -weight * f }
                }
                None => weight,
            };
            self.dfs(level + 1, c, w, &next);
            b += 1;
            if cap.is_some_and(|m| b > m) {
                break;
            }
        }
    }

    /// The last outer end `u` and the innermost end together: steps `a` of
    /// `u` walk each line's ceiling `ceil(slack_j/q_j)` down without division.
    fn last_end(&mut self, level: usize, cls: u32, weight: i128, slack: &[i64]) {
        let u = self.vars[level].0;
        let mut lines: Vec<(i64, i64, i64, i64, i64)> = Vec::with_capacity(slack.len());
        for (j, &x) in slack.iter().enumerate() {
            if x > 0 {
                let (q, r) = (self.inner_row[j], self.rows[level][j]);
                let y = (x + q - 1) / q;
                lines.push((y, y * q - x, q, r / q, r % q));
            }
        }
        let mut c = cls;
        loop {
            let mut y = 0i64;
            lines.retain_mut(|(yj, t, q, dq, dr)| {
                y = y.max(*yj);
                *yj -= *dq;
                *t += *dr;
                if *t >= *q {
                    *t -= *q;
                    *yj -= 1;
                }
                *yj > 0
            });
            if y <= 0 {
                return;
            }
            self.spread(c, weight, y);
            if lines.is_empty() {
                return;
            }
            c = self.table.add_dual(u, c);
        }
    }

    /// Adds `weight` to the classes `c + y·g_w` for `y` below the innermost reach.
    fn innermost(&mut self, c: u32, weight: i128, slack: &[i64]) {
        let y = slack
            .iter()
            .zip(&self.inner_row)
            .filter(|(&x, _)| x > 0)
            .map(|(&x, &q)| (x + q - 1) / q)
            .max()
            .unwrap_or(0);
        if self.inner_isolated {
            // A lone vertex has factor (y + 1); only reached when n = 1.
            let mut cls = c;
            for k in 0..y {
                self.direct[cls as usize] += weight * (k as i128 + 1);
                cls = self.table.add_dual(0, cls);
            }
            return;
        }
        self.spread(c, weight, y);
    }

    fn spread(&mut self, c: u32, weight: i128, y: i64) {
        let id = self.cycle[c as usize] as usize;
        let (len, base) = (self.len[id] as i64, self.start[id] + id);
        self.full[id] += weight * (y / len) as i128;
        let rem = y % len;
        let p = self.pos[c as usize] as i64;
        if rem == 0 {
            return;
        }
        let mut add = |a: i64, b: i64| {
            self.diff[base + a as usize] += weight;
            self.diff[base + b as usize] -= weight;
        };
        if p + rem <= len {
            add(p, p + rem);
        } else {
            add(p, len);
            add(0, p + rem - len);
        }
    }

    fn finish(self) -> Vec<i128> {
        let mut out = self.direct;
        for id in 0..self.start.len() {
            let base = self.start[id] + id;
            let mut run = 0i128;
            for k in 0..self.len[id] {
                run += self.diff[base + k];
                out[self.members[self.start[id] + k] as usize] += run + self.full[id];
            }
        }
        out
    }
}

impl CountingTable {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    fn mask_of(&self, subset: &[usize]) -> Result<u64> {
        let mut m = 0u64;
        for v in subset {
            let p = self
                .coords
                .iter()
                .position(|c| c == v)
                .ok_or_else(|| Error::InvalidSubset(format!("vertex {v} not tracked by this table")))?;
            m |= 1 << p;
        }
        Ok(m)
    }

    /// `Q_{h,I}(x)` for `I ⊆ coords`.
    pub fn reduced(&self, subset: &[usize]) -> Result<i128> {
        let m = self.mask_of(subset)?;
        Ok(self.weights.iter().enumerate().filter(|(s, _)| *s as u64 & m != 0).map(|(_, w)| w).sum())
    }

    /// `q_{h,J}(x)` for `J ⊆ coords`.
    pub fn modified(&self, subset: &[usize]) -> Result<i128> {
        let m = self.mask_of(subset)?;
        Ok(self.weights.iter().enumerate().filter(|(s, _)| *s as u64 & m == m).map(|(_, w)| w).sum())
    }

    /// `Q_{h,coords}(x)`.
    pub fn reduced_all(&self) -> i128 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    /// At least one bounding constraint is active.
    Union,
    /// Every bounding constraint is active.
    Intersection,
}

/// `d·l′_vertex < bound` is the active state of a constraint. Bounding
/// constraints define the region; the others are only observed.
#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub vertex: usize,
    pub bound: i128,
    pub bounding: bool,
}

/// Sums `z(l′)` over `l′` of class `h` in the region, by mask of active constraints.
pub(crate) fn enumerate(g: &PlumbingGraph, h: u32, constraints: &[Constraint], shape: Shape) -> Result<Vec<i128>> {
    let k = constraints.len();
    if k > MAX_TRACKED {
        return Err(Error::TooManyCoordinates(k));
    }
    if !constraints.iter().any(|c| c.bounding) {
        return Err(Error::InfeasibleQuery("unbounded enumeration region".into()));
    }
    let mut e = Enumerator::new(g, h, constraints, shape)?;
    e.run();
    Ok(e.weights)
}

struct Enumerator<'a> {
    table: &'a ClassTable,
    /// Per variable: the vertex and its row `d·(E*_v)_{w_j}` over constraints.
    vars: Vec<(usize, Option<i128>)>,
    rows: Vec<Vec<i64>>,
    inner_row: Vec<i64>,
    inner_isolated: bool,
    bounding: Vec<bool>,
    shape: Shape,
    k: usize,
    slack: Vec<i64>,
    dist: Vec<u32>,
    /// `reachable[level][c]`: `h - c` lies in the subgroup generated by the
    /// variables from `level` on and the innermost one.
    reachable: Vec<Vec<bool>>,
    ord: i64,
    weights: Vec<i128>,
    scratch: Vec<(i64, usize)>,
    /// Closed-form summation over the last outer variable and the innermost one.
    pair: Option<Pair>,
    total: i128,
}

/// For the last outer variable `u` (an end) and class `c`: the smallest
/// `a0 ≥ 0` putting `c + a0·g_u` in the innermost orbit of `h`, the
/// innermost residue there, and how that residue moves per period `m` of `a`.
struct Pair {
    a0: Vec<u32>,
    kappa: Vec<u32>,
    m: i128,
    delta: i128,
}

impl<'a> Enumerator<'a> {
    fn new(g: &'a PlumbingGraph, h: u32, cons: &[Constraint], shape: Shape) -> Result<Self> {
        let n = g.len();
        let dual = g.dual_scaled();
        let k = cons.len();
        let row = |v: usize| -> Vec<i64> { cons.iter().map(|c| dual[v][c.vertex]).collect() };
        let reach = |v: usize| -> i128 {
            cons.iter()
                .filter(|c| c.bounding)
                .map(|c| c.bound / dual[v][c.vertex] as i128)
                .max()
                .unwrap_or(0)
        };
        let inner = (0..n)
            .filter(|&v| g.degree(v) <= 1)
            .max_by_key(|&v| (reach(v), std::cmp::Reverse(v)))
            .expect("a tree has an end vertex");
        let mut vars: Vec<(usize, Option<i128>)> = Vec::new();
        for v in g.nodes() {
            vars.push((v, Some(g.degree(v) as i128 - 2)));
        }
        // Ends with the longest reach go last, next to the closed-form pair.
        let mut ends: Vec<usize> = g.ends().into_iter().filter(|&v| v != inner).collect();
        ends.sort_by_key(|&v| (reach(v), std::cmp::Reverse(v)));
        vars.extend(ends.into_iter().map(|v| (v, None)));
        let rows = vars.iter().map(|&(v, _)| row(v)).collect();
        let table = g.class_table();
        let d = table.len();
        let mut dist = vec![u32::MAX; d];
        let mut orbit = vec![h];
        let mut c = table.add_dual(inner, h);
        while c != h {
            orbit.push(c);
            c = table.add_dual(inner, c);
        }
        let ord = orbit.len();
        for (j, &c) in orbit.iter().enumerate() {
            dist[c as usize] = ((ord - j) % ord) as u32;
        }
        let mut reachable = vec![vec![false; d]; vars.len() + 1];
        let mut gens = vec![inner];
        for level in (0..=vars.len()).rev() {
            if level < vars.len() {
                gens.push(vars[level].0);
            }
            let seen = &mut reachable[level];
            let mut stack = vec![h];
            seen[h as usize] = true;
            while let Some(c) = stack.pop() {
                for &u in &gens {
                    let e = table.add_dual(u, c);
                    if !seen[e as usize] {
                        seen[e as usize] = true;
                        stack.push(e);
                    }
                }
            }
        }
        let mut slack = vec![0i64; (vars.len() + 1) * k];
        for (j, c) in cons.iter().enumerate() {
            slack[j] = i64::try_from(c.bound).map_err(|_| Error::InfeasibleQuery("threshold too large".into()))?;
        }
        Ok(Enumerator {
            table,
            vars,
            rows,
            inner_row: row(inner),
            inner_isolated: g.degree(inner) == 0,
            bounding: cons.iter().map(|c| c.bounding).collect(),
            shape,
            k,
            slack,
            dist,
            reachable,
            ord: ord as i64,
            weights: vec![0; 1 << k],
            scratch: Vec::with_capacity(k),
            pair: None,
            total: 0,
        })
    }

    fn enable_pair(&mut self) {
        let Some(&(u, None)) = self.vars.last() else { return };
        if self.inner_isolated || self.bounding.iter().any(|b| !b) {
            return;
        }
        let d = self.table.len();
        let mut a0 = vec![u32::MAX; d];
        let mut kappa = vec![u32::MAX; d];
        let mut seen = vec![false; d];
        let mut cycle = Vec::new();
        for start in 0..d as u32 {
            if seen[start as usize] {
                continue;
            }
            cycle.clear();
            let mut c = start;
            loop {
                seen[c as usize] = true;
                cycle.push(c);
                c = self.table.add_dual(u, c);
                if c == start {
                    break;
                }
            }
            let len = cycle.len();
            let Some(last) = (0..len).rev().find(|&i| self.dist[cycle[i] as usize] != u32::MAX) else { continue };
            // Walk backwards twice around so every position sees its next hit.
            let mut next = last + len;
            for i in (0..2 * len).rev() {
                if self.dist[cycle[i % len] as usize] != u32::MAX {
                    next = i;
                }
                if i < len {
                    a0[cycle[i] as usize] = (next - i) as u32;
                    kappa[cycle[i] as usize] = self.dist[cycle[next % len] as usize];
                }
            }
        }
        let h = (0..d).find(|&c| self.dist[c] == 0).expect("h is in its own orbit") as u32;
        let mut c = self.table.add_dual(u, h);
        let mut m = 1i128;
        while self.dist[c as usize] == u32::MAX {
            c = self.table.add_dual(u, c);
            m += 1;
        }
        let delta = self.dist[c as usize] as i128;
        self.pair = Some(Pair { a0, kappa, m, delta });
    }

    /// Adds `weight ×` the number of `(a, y)` with `c + a·g_u + y·g_w = h` and
    /// `a·r_j + y·q_j < s_j` for some `j`.
    fn pair_sum(&mut self, level: usize, cls: u32, weight: i128) {
        let pair = self.pair.as_ref().expect("pair mode");
        let a0 = pair.a0[cls as usize];
        if a0 == u32::MAX {
            return;
        }
        let (a0, kappa, m, delta) = (a0 as i64, pair.kappa[cls as usize] as i64, pair.m as i64, pair.delta as i64);
        let k = self.k;
        let s = &self.slack[level * k..(level + 1) * k];
        let r = &self.rows[level];
        let q = &self.inner_row;
        // Lines that are never positive are never the maximum.
        let mut reach = 0i64;
        self.scratch.clear();
        for j in 0..k {
            if s[j] > 0 {
                reach = reach.max((s[j] + r[j] - 1) / r[j]);
                self.scratch.push((0, j));
            }
        }
        if a0 >= reach {
            return;
        }
        let tn = (reach - a0 + m - 1) / m;
        let ord = self.ord as i128;
        let mut sum = 0i128;
        for &(_, j) in &self.scratch {
            // t where line j is the first maximum of (s_i - a·r_i)/q_i, a = a0 + m·t.
            let (mut lo, mut hi) = (0i64, tn);
            for &(_, i) in &self.scratch {
                if i == j {
                    continue;
                }
                let rr = r[j] as i128 * q[i] as i128 - r[i] as i128 * q[j] as i128;
                let rhs = s[j] as i128 * q[i] as i128 - s[i] as i128 * q[j] as i128 - a0 as i128 * rr;
                let strict = i < j;
                if rr == 0 {
                    if rhs < 0 || (strict && rhs == 0) {
                        hi = lo;
                    }
                } else if rr > 0 {
                    let mr = m as i128 * rr;
                    let top = if strict { div_floor(rhs - 1, mr) } else { div_floor(rhs, mr) };
                    hi = hi.min((top + 1).min(tn as i128) as i64);
                } else {
                    let mr = -(m as i128) * rr;
                    let bottom = if strict { div_floor(-rhs, mr) + 1 } else { -div_floor(rhs, mr) };
                    lo = lo.max(bottom.max(0).min(tn as i128) as i64);
                }
                if lo >= hi {
                    break;
                }
            }
            if lo >= hi {
                continue;
            }
            // #{y ∈ [0, ceil(X_j/q_j)) : y ≡ kappa + delta·t (mod ord)}
            let (rj, qj, sj) = (r[j] as i128, q[j] as i128, s[j] as i128);
            let (m, delta, kappa, lo, n) = (m as i128, delta as i128, kappa as i128, lo as i128, (hi - lo) as i128);
            let alpha = -m * rj - qj * delta;
            let beta = sj - a0 as i128 * rj - 1 - qj * kappa;
            sum += floor_sum(n, qj * ord, alpha, beta + alpha * lo);
            sum -= floor_sum(n, ord, -delta, -1 - kappa - delta * lo);
        }
        self.total += weight * sum;
    }

    fn run(&mut self) {
        if self.feasible(0) && self.reachable[0][0] {
            self.dfs(0, 0, 1);
        }
    }

    #[inline]
    fn feasible(&self, level: usize) -> bool {
        let s = &self.slack[level * self.k..(level + 1) * self.k];
        match self.shape {
            Shape::Union => s.iter().zip(&self.bounding).any(|(&x, &b)| b && x > 0),
            Shape::Intersection => s.iter().zip(&self.bounding).all(|(&x, &b)| !b || x > 0),
        }
    }

    fn dfs(&mut self, level: usize, cls: u32, weight: i128) {
        if level == self.vars.len() {
            self.innermost(level, cls, weight);
            return;
        }
        if self.pair.is_some() && level + 1 == self.vars.len() {
            self.pair_sum(level, cls, weight);
            return;
        }
        let k = self.k;
        let (v, cap) = self.vars[level];
        let (lo, hi) = (level * k, (level + 1) * k);
        self.slack.copy_within(lo..hi, hi);
        let mut c = cls;
        let mut b: i128 = 0;
        loop {
            if b > 0 {
                for j in 0..k {
                    self.slack[hi + j] -= self.rows[level][j];
                }
                c = self.table.add_dual(v, c);
            }
            if !self.feasible(level + 1) {
                break;
            }
            if self.reachable[level + 1][c as usize] {
                let w = match cap {
                    Some(m) => {
                        let f = binomial(m, b);
                        if b % 2 == 0 { weight * f } else { -weight * f }
                    }
                    None => weight,
                };
                self.dfs(level + 1, c, w);
            }
            b += 1;
            if let Some(m) = cap {
                if b > m {
                    break;
                }
            }
        }
    }

    fn innermost(&mut self, level: usize, cls: u32, weight: i128) {
        let k0 = self.dist[cls as usize];
        if k0 == u32::MAX {
            return;
        }
        let k0 = k0 as i64;
        let s = &self.slack[level * self.k..(level + 1) * self.k];
        self.scratch.clear();
        let mut amax: Option<i64> = None;
        for j in 0..self.k {
            let t = if s[j] > 0 { (s[j] + self.inner_row[j] - 1) / self.inner_row[j] } else { 0 };
            if self.bounding[j] {
                amax = Some(match (amax, self.shape) {
                    (None, _) => t,
                    (Some(m), Shape::Union) => m.max(t),
                    (Some(m), Shape::Intersection) => m.min(t),
                });
            }
            if t > 0 {
                self.scratch.push((t, j));
            }
        }
        let amax = amax.unwrap_or(0);
        if amax <= k0 {
            return;
        }
        self.scratch.sort_unstable();
        let mut mask: usize = self.scratch.iter().fold(0, |m, &(_, j)| m | 1 << j);
        let mut lo = 0i64;
        let mut i = 0;
        while lo < amax {
            let hi = if i < self.scratch.len() { self.scratch[i].0.min(amax) } else { amax };
            if hi > lo {
                let w = self.progression_weight(k0, lo, hi);
                if w != 0 {
                    self.weights[mask] += weight * w;
                }
            }
            lo = hi;
            while i < self.scratch.len() && self.scratch[i].0 <= lo {
                mask &= !(1 << self.scratch[i].1);
                i += 1;
            }
        }
    }

    /// Sum of the innermost factor over `a ∈ [lo, hi)` with `a ≡ k0 (mod ord)`.
    #[inline]
    fn progression_weight(&self, k0: i64, lo: i64, hi: i64) -> i128 {
        let ord = self.ord;
        let jmin = if lo <= k0 { 0 } else { (lo - k0 + ord - 1) / ord };
        let jmax = (hi - 1 - k0).div_euclid(ord);
        if jmax < jmin {
            return 0;
        }
        let cnt = (jmax - jmin + 1) as i128;
        if self.inner_isolated {
            // Σ (a + 1) over the progression
            cnt * (k0 as i128 + 1) + ord as i128 * (jmin + jmax) as i128 * cnt / 2
        } else {
            cnt
        }
    }
}

/// `floor(a/b)` for `b > 0`, on 64-bit words when the operands fit.
#[inline]
fn div_floor(a: i128, b: i128) -> i128 {
    match (i64::try_from(a), i64::try_from(b)) {
        (Ok(x), Ok(y)) => x.div_euclid(y) as i128,
        _ => a.div_euclid(b),
    }
}

/// `Σ_{i<n} floor((a·i + b)/m)` for `m > 0`.
fn floor_sum(mut n: i128, mut m: i128, mut a: i128, mut b: i128) -> i128 {
    let mut ans = 0;
    if a < 0 {
        let a2 = a.rem_euclid(m);
        ans -= n * (n - 1) / 2 * ((a2 - a) / m);
        a = a2;
    }
    if b < 0 {
        let b2 = b.rem_euclid(m);
        ans -= n * ((b2 - b) / m);
        b = b2;
    }
    loop {
        if a >= m {
            ans += n * (n - 1) / 2 * (a / m);
            a %= m;
        }
        if b >= m {
            ans += n * (b / m);
            b %= m;
        }
        let y = a * n + b;
        if y < m {
            return ans;
        }
        n = y / m;
        b = y % m;
        std::mem::swap(&mut m, &mut a);
    }
}

/// `Q_{h,{v}}` at many thresholds for every class at once, from the
/// one-variable series in `t_v` with coefficients in the group ring of `H`.
/// Each query is `(class index, bound)` and asks for the sum over
/// `d·l′_v < bound`.
///
/// The exponent `N = d·l′_v` fixes `l′_v mod 1`, so the coefficient of `t^N`
/// lives on a single coset of the kernel of `c ↦ d·(r_c)_v mod d`; rows are
/// stored compressed to that coset.
pub fn univariate_counts(g: &PlumbingGraph, v: usize, queries: &[(u32, i128)]) -> Result<Vec<i128>> {
    const MEMORY_CAP: usize = 1 << 31;
    let table = g.class_table();
    let d = table.len();
    let dual = g.dual_scaled();
    let mut cosets: Vec<Vec<u32>> = vec![Vec::new(); d];
    let mut pos = vec![0usize; d];
    for c in 0..d as u32 {
        let rho = (table.rep_scaled(c)[v] as i128).rem_euclid(d as i128) as usize;
        pos[c as usize] = cosets[rho].len();
        cosets[rho].push(c);
    }
    let k = cosets[0].len();
    // Stages: (vertex, step, geometric?) applied in sequence.
    let mut stages: Vec<(usize, usize, bool)> = Vec::new();
    for u in 0..g.len() {
        let step = dual[u][v] as usize;
        match g.degree(u) {
            0 => stages.extend([(u, step, true), (u, step, true)]),
            1 => stages.push((u, step, true)),
            2 => {}
            deg => stages.extend(std::iter::repeat((u, step, false)).take(deg - 2)),
        }
    }
    let cells: usize = stages.iter().map(|s| s.1 * k).sum();
    if cells.saturating_mul(16) > MEMORY_CAP {
        return Err(Error::MethodPreconditionFailed(format!(
            "one-variable series needs {cells} buffered cells"
        )));
    }
    let max_bound = queries.iter().map(|q| q.1).max().unwrap_or(0).max(0) as usize;
    let mut order: Vec<usize> = (0..queries.len()).collect();
    order.sort_by_key(|&i| queries[i].1);
    let mut answers = vec![0i128; queries.len()];
    let mut next = 0;
    // ring[s][(N mod step) * k + i]: stage output (geometric) or input (linear)
    // at N, on the i-th class of the coset of N.
    let mut ring: Vec<Vec<i128>> = stages.iter().map(|s| vec![0i128; s.1 * k]).collect();
    let mut totals = vec![0i128; d];
    let mut row = vec![0i128; k];
    let mut tmp = vec![0i128; k];
    for n in 0..=max_bound {
        while next < order.len() && queries[order[next]].1 <= n as i128 {
            let (c, _) = queries[order[next]];
            answers[order[next]] = totals[c as usize];
            next += 1;
        }
        if n == max_bound {
            break;
        }
        row.iter_mut().for_each(|x| *x = 0);
        if n == 0 {
            row[pos[0]] = 1;
        }
        let here = &cosets[n % d];
        for (s, &(u, step, geometric)) in stages.iter().enumerate() {
            let slot = (n % step) * k;
            let buf = &mut ring[s][slot..slot + k];
            let prev = if n >= step { &cosets[(n - step) % d] } else { &cosets[0] };
            let live = n >= step && !prev.is_empty();
            if geometric {
                // out[N] = in[N] + g_u · out[N - step]
                if live {
                    for (i, &x) in buf.iter().enumerate() {
                        if x != 0 {
                            row[pos[table.add_dual(u, prev[i]) as usize]] += x;
                        }
                    }
                }
                buf.copy_from_slice(&row);
            } else {
                // out[N] = in[N] - g_u · in[N - step]
                tmp.copy_from_slice(&row);
                if live {
                    for (i, &x) in buf.iter().enumerate() {
                        if x != 0 {
                            row[pos[table.add_dual(u, prev[i]) as usize]] -= x;
                        }
                    }
                }
                buf.copy_from_slice(&tmp);
            }
        }
        for (i, &c) in here.iter().enumerate() {
            totals[c as usize] += row[i];
        }
    }
    Ok(answers)
}


/// Outcome of `reduced_series_support_bound_check`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SupportBoundReport {
    pub subset: Vec<String>,
    pub depth: i128,
    /// Distinct support points of `Z(t_{V₂})` that were checked.
    pub support_points: usize,
    pub boundary: Vec<BoundaryCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BoundaryCheck {
    pub vertex: String,
    pub inner_degree: usize,
    pub checked: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// Checks on every support point of the reduced series `Z(t_{V₂})` reachable
/// with all dual coordinates at most `depth` that the point is uniquely
/// `Σ_{v∈V₂} r_v E*_v|_{V₂}` with `r ≥ 0`, and that `r_u E*_u|_u` is bounded
/// by `Σ_{v∈V_{1,u}} (δ_v-2) E*_v|_u` at boundary vertices with two inner edges.
pub fn reduced_series_support_bound_check(g: &PlumbingGraph, v2: &[usize], depth: i128) -> Result<SupportBoundReport> {
    use crate::rational::{int, Rational};
    use std::collections::{BTreeMap, BTreeSet};

    let v2 = normalize_subset(g.len(), v2)?;
    if !g.is_connected_subset(&v2) {
        return Err(Error::InvalidSubset("V2 must induce a connected subgraph".into()));
    }
    let inside: BTreeSet<usize> = v2.iter().copied().collect();
    let dual = g.dual_scaled();
    let d = g.det() as i128;

    let mut fibres: BTreeMap<Vec<i128>, i128> = BTreeMap::new();
    for t in terms_in_box(g, depth) {
        let a = g.dual_coords_int(&t.exponent)?;
        let y: Vec<i128> = v2.iter().map(|&u| (0..g.len()).map(|v| a[v] * dual[v][u] as i128).sum()).collect();
        *fibres.entry(y).or_insert(0) += t.coefficient;
    }
    // A projection is complete when no point with some a_v > depth maps onto it.
    let complete = |y: &[i128]| {
        (0..g.len()).all(|v| v2.iter().zip(y).any(|(&u, &yu)| yu < (depth + 1) * dual[v][u] as i128))
    };
    let m: Vec<Vec<i64>> = v2.iter().map(|&u| v2.iter().map(|&v| dual[v][u]).collect()).collect();
    let minv = crate::intlin::inverse(&m)
        .ok_or_else(|| Error::BoundViolation("E*_v restricted to V2 are linearly dependent".into()))?;

    let mut boundary = Vec::new();
    let mut bounds: Vec<(usize, usize, Rational)> = Vec::new();
    for (ui, &u) in v2.iter().enumerate() {
        let outer: Vec<usize> = g.neighbors(u).iter().copied().filter(|w| !inside.contains(w)).collect();
        if outer.is_empty() {
            continue;
        }
        let inner_degree = g.degree(u) - outer.len();
        let checked = inner_degree >= 2;
        boundary.push(BoundaryCheck {
            vertex: g.ids()[u].clone(),
            inner_degree,
            checked,
            notice: (!checked).then(|| "fewer than two inner edges; bound not applicable".to_string()),
        });
        if checked {
            // V_{1,u}: u together with everything reached from it outside V₂.
            let mut seen = vec![false; g.len()];
            let mut stack = vec![u];
            seen[u] = true;
            let mut bound = int(0);
            while let Some(x) = stack.pop() {
                bound += int((g.degree(x) as i128 - 2) * dual[x][u] as i128);
                for &w in g.neighbors(x) {
                    if !seen[w] && !inside.contains(&w) {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            bounds.push((ui, u, bound));
        }
    }

    let mut support_points = 0;
    for (y, c) in &fibres {
        if *c == 0 || !complete(y) {
            continue;
        }
        support_points += 1;
        let r: Vec<Rational> = (0..v2.len())
            .map(|i| (0..v2.len()).map(|j| &minv[i][j] * int(y[j])).sum())
            .collect();
        if let Some(bad) = r.iter().position(|x| *x < int(0)) {
            return Err(Error::BoundViolation(format!(
                "negative coefficient r = {} at vertex {}",
                crate::rational::fmt_rational(&r[bad]),
                g.ids()[v2[bad]]
            )));
        }
        for (ui, u, bound) in &bounds {
            let lhs = &r[*ui] * int(dual[*u][*u] as i128);
            if lhs > *bound {
                return Err(Error::BoundViolation(format!(
                    "support point exceeds the degree bound at vertex {}: {} > {}",
                    g.ids()[*u],
                    crate::rational::fmt_rational(&(lhs / int(d))),
                    crate::rational::fmt_rational(&(bound / int(d)))
                )));
            }
        }
    }
    Ok(SupportBoundReport {
        subset: v2.iter().map(|&v| g.ids()[v].clone()).collect(),
        depth,
        support_points,
        boundary,
    })
}
