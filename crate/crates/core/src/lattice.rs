//! Vectors of `L ⊗ Q` written in the basis `{E_v}`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;

use crate::rational::{rat, Rational};

/// An element of `L ⊗ Q` stored as integer numerators over one common
/// positive denominator, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    num: Vec<i128>,
    den: i128,
}

impl LatticeVector {
    pub fn new(num: Vec<i128>, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let mut v = LatticeVector { num, den };
        v.normalize();
        v
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            self.num.iter_mut().for_each(|x| *x = -*x);
        }
        let g = self.num.iter().fold(self.den, |g, x| g.gcd(x));
        if g > 1 {
            self.den /= g;
            self.num.iter_mut().for_each(|x| *x /= g);
        }
    }

    pub fn zero(n: usize) -> Self {
        LatticeVector { num: vec![0; n], den: 1 }
    }

    pub fn integral(num: Vec<i128>) -> Self {
        LatticeVector { num, den: 1 }
    }

    /// `E_v` in a lattice of rank `n`.
    pub fn basis(n: usize, v: usize) -> Self {
        let mut num = vec![0; n];
        num[v] = 1;
        LatticeVector { num, den: 1 }
    }

    pub fn from_rationals(coords: &[Rational]) -> Self {
        let den = coords.iter().fold(1i128, |l, c| {
            let d = i128::try_from(c.denom()).expect("denominator overflow");
            l.lcm(&d)
        });
        let num = coords
            .iter()
            .map(|c| {
                let scaled = c * Rational::from_integer(den.into());
                i128::try_from(scaled.numer()).expect("numerator overflow")
            })
            .collect();
        LatticeVector::new(num, den)
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn numerators(&self) -> &[i128] {
        &self.num
    }

    pub fn coord(&self, v: usize) -> Rational {
        rat(self.num[v], self.den)
    }

    pub fn coords(&self) -> Vec<Rational> {
        (0..self.len()).map(|v| self.coord(v)).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }

    /// `k · self`.
    pub fn scale(&self, k: i128) -> Self {
        LatticeVector::new(self.num.iter().map(|x| x * k).collect(), self.den)
    }

    /// Numerators over the denominator `d`, if `d` is a multiple of `den`.
    pub fn scaled(&self, d: i128) -> Option<Vec<i128>> {
        if d % self.den != 0 {
            return None;
        }
        let f = d / self.den;
        Some(self.num.iter().map(|x| x * f).collect())
    }

    /// The partial order: every coordinate of `self - other` is nonnegative.
    pub fn geq(&self, other: &Self) -> bool {
        self.check_len(other);
        self.num
            .iter()
            .zip(&other.num)
            .all(|(a, b)| a * other.den >= b * self.den)
    }

    /// Coordinate restriction to the positions in `subset`, in that order.
    pub fn restrict(&self, subset: &[usize]) -> Self {
        LatticeVector::new(subset.iter().map(|&v| self.num[v]).collect(), self.den)
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(self.len(), other.len(), "lattice vectors of different rank");
    }

    fn combine(&self, other: &Self, sign: i128) -> Self {
        self.check_len(other);
        let den = self.den.lcm(&other.den);
        let (fa, fb) = (den / self.den, den / other.den);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * fa + sign * b * fb)
            .collect();
        LatticeVector::new(num, den)
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        self.combine(rhs, 1)
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        self.combine(rhs, -1)
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector { num: self.num.iter().map(|x| -x).collect(), den: self.den }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_to_lowest_terms() {
        let v = LatticeVector::new(vec![2, 4, -6], -4);
        assert_eq!(v.numerators(), &[-1, -2, 3]);
        assert_eq!(v.den(), 2);
        assert_eq!(LatticeVector::new(vec![0, 0], 7), LatticeVector::zero(2));
    }

    #[test]
    fn arithmetic_and_order() {
        let a = LatticeVector::new(vec![1, 1], 2);
        let b = LatticeVector::new(vec![1, 2], 3);
        let s = &a + &b;
        assert_eq!(s.coords(), vec![rat(5, 6), rat(7, 6)]);
        assert_eq!(&s - &b, a);
        assert!(s.geq(&a) && !a.geq(&s));
        assert!(!a.geq(&LatticeVector::new(vec![0, 1], 1)));
        assert_eq!(a.scale(2), LatticeVector::integral(vec![1, 1]));
        assert_eq!(a.scaled(6), Some(vec![3, 3]));
        assert_eq!(a.scaled(3), None);
    }

    #[test]
    fn from_rationals_matches_coords() {
        let c = vec![rat(1, 2), rat(0, 1), rat(7, 8)];
        assert_eq!(LatticeVector::from_rationals(&c).coords(), c);
    }
}
