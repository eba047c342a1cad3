//! Independent oracles: plain rational Gauss–Jordan, series expansion by
//! polynomial multiplication, and box enumeration for counting functions.
#![allow(dead_code)]

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use plumbing_core::{LatticeVector, PlumbingGraph};
use proptest::test_runner::{Config, RngSeed};

pub type Q = BigRational;

/// Property-test settings with a fixed seed so runs are reproducible.
pub fn cases(n: u32) -> Config {
    Config { cases: n, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// `-I` as a rational matrix.
pub fn neg_form(g: &PlumbingGraph) -> Vec<Vec<Q>> {
    let n = g.len();
    let mut m = vec![vec![q(0); n]; n];
    for v in 0..n {
        m[v][v] = q(-g.euler()[v]);
    }
    for &(a, b) in g.edges() {
        m[a][b] = q(-1);
        m[b][a] = q(-1);
    }
    m
}

/// Determinant and inverse by Gauss–Jordan with row pivoting.
pub fn det_and_inverse(m: &[Vec<Q>]) -> (Q, Vec<Vec<Q>>) {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()).collect();
    let mut det = q(1);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    (det, inv)
}

/// Lattice data recomputed from scratch.
pub struct Oracle {
    pub n: usize,
    pub d: i128,
    /// `adj[v][w] = d·(E*_v)_w`.
    pub adj: Vec<Vec<i128>>,
    pub inv: Vec<Vec<Q>>,
    pub degree: Vec<usize>,
    pub euler: Vec<i64>,
    pub form: Vec<Vec<i64>>,
}

impl Oracle {
    pub fn new(g: &PlumbingGraph) -> Self {
        let n = g.len();
        let (det, inv) = det_and_inverse(&neg_form(g));
        assert!(det.is_integer() && det.is_positive());
        let d = det.to_integer().to_i128().unwrap();
        let adj = inv.iter().map(|row| row.iter().map(|x| (x * q(d as i64)).to_integer().to_i128().unwrap()).collect()).collect();
        let mut form = vec![vec![0i64; n]; n];
        for v in 0..n {
            form[v][v] = g.euler()[v];
        }
        for &(a, b) in g.edges() {
            form[a][b] = 1;
            form[b][a] = 1;
        }
        let degree = (0..n).map(|v| form[v].iter().enumerate().filter(|&(w, &x)| w != v && x == 1).count()).collect();
        Oracle { n, d, adj, inv, degree, euler: g.euler().to_vec(), form }
    }

    /// `d·l′` for `l′ = Σ a_v E*_v`.
    pub fn scaled_point(&self, a: &[i128]) -> Vec<i128> {
        (0..self.n).map(|w| (0..self.n).map(|v| a[v] * self.adj[v][w]).sum()).collect()
    }

    pub fn scaled(&self, x: &LatticeVector) -> Vec<i128> {
        x.numerators().iter().map(|&c| c * self.d / x.den()).collect()
    }

    pub fn pairing(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = q(0);
        for v in 0..self.n {
            for w in 0..self.n {
                if self.form[v][w] != 0 {
                    s += &x[v] * &y[w] * q(self.form[v][w]);
                }
            }
        }
        s
    }

    pub fn canonical(&self) -> Vec<Q> {
        // K = Σ (2 + e_v) E*_v
        (0..self.n)
            .map(|w| (0..self.n).map(|v| q(2 + self.euler[v]) * &self.inv[v][w]).fold(q(0), |a, b| a + b))
            .collect()
    }

    pub fn normalization(&self, x: &[Q]) -> Q {
        let k = self.canonical();
        let y: Vec<Q> = k.iter().zip(x).map(|(a, b)| a + b * q(2)).collect();
        (self.pairing(&y, &y) + q(self.n as i64)) / q(8)
    }

    /// Coefficients of `Π_v (1 - t_v)^{δ_v-2}` by multiplying truncated
    /// one-variable expansions, for exponents `a_v ≤ cap`.
    pub fn expansion(&self, cap: i128) -> HashMap<Vec<i128>, i128> {
        let mut out: HashMap<Vec<i128>, i128> = HashMap::new();
        out.insert(vec![], 1);
        for v in 0..self.n {
            let series = one_variable(self.degree[v] as i128 - 2, cap);
            let mut next = HashMap::new();
            for (k, c) in &out {
                for (e, s) in series.iter().enumerate() {
                    if *s != 0 {
                        let mut key = k.clone();
                        key.push(e as i128);
                        next.insert(key, c * s);
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Largest useful exponent of an unbounded vertex when only coordinates in `coords` are constrained.
    fn box_cap(&self, v: usize, x: &[i128], coords: &[usize]) -> i128 {
        coords.iter().map(|&w| x[w].div_euclid(self.adj[v][w])).max().unwrap_or(-1).max(-1)
    }

    /// `Σ z(l′)` over `[l′] = [x_class]` with `l′_w < x_w` for some `w ∈ coords`
    /// (`all = false`) or for every `w ∈ coords` (`all = true`). `None` class sums every class.
    pub fn brute_count(&self, class: Option<&[i128]>, x: &[i128], coords: &[usize], all: bool) -> i128 {
        let n = self.n;
        let caps: Vec<i128> = (0..n)
            .map(|v| match self.degree[v] {
                2 => 0,
                k if k >= 3 => k as i128 - 2,
                _ => self.box_cap(v, x, coords),
            })
            .collect();
        if caps.iter().any(|&c| c < 0) {
            return 0;
        }
        let series: Vec<Vec<i128>> = (0..n).map(|v| one_variable(self.degree[v] as i128 - 2, caps[v])).collect();
        let mut a = vec![0i128; n];
        let mut total = 0;
        loop {
            let c: i128 = (0..n).map(|v| series[v][a[v] as usize]).product();
            if c != 0 {
                let p = self.scaled_point(&a);
                let in_class = match class {
                    Some(r) => (0..n).all(|w| (p[w] - r[w]).rem_euclid(self.d) == 0),
                    None => true,
                };
                let below = |w: &usize| p[*w] < x[*w];
                let hit = if all { coords.iter().all(below) } else { coords.iter().any(below) };
                if in_class && hit {
                    total += c;
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return total;
                }
                if a[i] < caps[i] {
                    a[i] += 1;
                    break;
                }
                a[i] = 0;
                i += 1;
            }
        }
    }
}

/// Coefficients of `(1 - t)^e` up to `t^cap`, by repeated multiplication.
pub fn one_variable(e: i128, cap: i128) -> Vec<i128> {
    let len = (cap + 1).max(1) as usize;
    let mut out = vec![0i128; len];
    out[0] = 1;
    if e >= 0 {
        for _ in 0..e {
            for k in (1..len).rev() {
                out[k] -= out[k - 1];
            }
        }
    } else {
        for _ in 0..-e {
            // multiply by 1/(1 - t): prefix sums
            for k in 1..len {
                out[k] += out[k - 1];
            }
        }
    }
    out
}

pub fn lv_to_q(x: &LatticeVector) -> Vec<Q> {
    x.coords()
}

pub fn is_one(x: &Q) -> bool {
    x.is_one()
}
