//! Exact integer linear algebra on small dense matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Leading principal minors `Δ_1, …, Δ_k` of `m` by fraction-free (Bareiss)
/// elimination without pivoting. Stops after the first nonpositive minor.
pub fn leading_minors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[k][k].clone();
        out.push(pivot.clone());
        if !pivot.is_positive() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &pivot - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = pivot;
    }
    out
}

/// Inverse of a nonsingular square matrix over the rationals.
pub fn inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<Rational> = r.iter().map(|&x| Rational::from_integer(x.into())).collect();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        a[col].iter_mut().for_each(|x| *x *= &inv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis (as columns) of `{ x ∈ Z^n : c·x ≡ 0 mod m }` for every congruence
/// `(c, m)` in `rows`, together with the index of that sublattice in `Z^n`.
pub fn congruence_kernel(n: usize, rows: &[(Vec<i128>, i128)]) -> (Vec<Vec<i128>>, i128) {
    let mut basis: Vec<Vec<i128>> = (0..n)
        .map(|j| (0..n).map(|i| i128::from(i == j)).collect())
        .collect();
    let mut index = 1i128;
    for (c, m) in rows {
        let m = m.abs();
        if m <= 1 {
            continue;
        }
        let eval = |b: &Vec<i128>| -> i128 { b.iter().zip(c).map(|(x, y)| x * y).sum::<i128>().mod_floor(&m) };
        let mut vals: Vec<i128> = basis.iter().map(eval).collect();
        // Euclid on columns until only column 0 carries a residue.
        for j in 1..n {
            while vals[j] != 0 {
                let q = Integer::div_floor(&vals[0], &vals[j]);
                for i in 0..n {
                    basis[0][i] -= q * basis[j][i];
                }
                vals[0] -= q * vals[j];
                basis.swap(0, j);
                vals.swap(0, j);
            }
        }
        let g = vals[0].gcd(&m);
        let f = if vals[0] == 0 { 1 } else { m / g };
        basis[0].iter_mut().for_each(|x| *x *= f);
        index *= f;
        reduce_columns(&mut basis);
    }
    (basis, index)
}

/// Cheap size reduction keeping the lattice unchanged.
fn reduce_columns(basis: &mut [Vec<i128>]) {
    let norm = |b: &Vec<i128>| b.iter().map(|x| x.abs()).max().unwrap_or(0);
    for _ in 0..4 {
        let mut changed = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                for s in [1i128, -1] {
                    let cand: Vec<i128> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a - s * b).collect();
                    if norm(&cand) < norm(&basis[i]) {
                        basis[i] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Determinant of a square integer matrix (Bareiss with row pivoting).
pub fn determinant(m: &[Vec<i128>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
