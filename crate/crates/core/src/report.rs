//! Serde helpers: rationals are written as `"p/q"` strings.

use serde::ser::SerializeSeq;
use serde::Serializer;

use crate::lattice::LatticeVector;
use crate::rational::{fmt_rational, Rational};

pub const SCHEMA: u32 = 1;

pub fn ser_rat<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

pub fn ser_opt_rat<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn ser_vec<S: Serializer>(v: &LatticeVector, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v.coords() {
        seq.serialize_element(&fmt_rational(&c))?;
    }
    seq.end()
}

pub fn ser_opt_vec<S: Serializer>(v: &Option<LatticeVector>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_vec(v, s),
        None => s.serialize_none(),
    }
}

pub fn rat_json(r: &Rational) -> serde_json::Value {
    serde_json::Value::String(fmt_rational(r))
}

pub fn vec_json(v: &LatticeVector) -> serde_json::Value {
    serde_json::Value::Array(v.coords().iter().map(rat_json).collect())
}
