mod common;

use common::Oracle;
use plumbing_core::io::{self, random_tree, string_graph};
use plumbing_core::series::{
    self, coefficient, counting, counting_with, reduced_series_support_bound_check, terms_in_box, CountingMode,
    CountingQuery, Strategy,
};
use plumbing_core::{validate, Error, LatticeVector, PlumbingGraph};
use proptest::prelude::*;

fn ade(name: &str) -> PlumbingGraph {
    let (_, r) = io::ade_graphs().into_iter().find(|(n, _)| n == name).unwrap();
    validate(&r).unwrap()
}

#[test]
fn coefficient_examples() {
    for (_, r) in io::named_fixtures().into_iter().map(|(a, b, _)| (a, b)) {
        let g = validate(&r).unwrap();
        assert_eq!(coefficient(&g, &LatticeVector::zero(g.len())).unwrap(), 1);
    }
    let g = validate(&string_graph(&[-3])).unwrap();
    for k in 0..10 {
        assert_eq!(coefficient(&g, &LatticeVector::new(vec![k], 3)).unwrap(), k + 1);
    }
    let a2 = ade("a2");
    for a1 in 0..4 {
        for a2v in 0..4 {
            assert_eq!(coefficient(&a2, &a2.from_dual_coords(&[a1, a2v])).unwrap(), 1);
        }
    }
    assert_eq!(coefficient(&a2, &a2.from_dual_coords(&[-1, 2])).unwrap(), 0);
    assert!(matches!(coefficient(&a2, &LatticeVector::new(vec![1, 0], 2)), Err(Error::NotInDualLattice)));
}

#[test]
fn counting_examples() {
    let e8 = ade("e8");
    let zero = LatticeVector::zero(8);
    let full = |g: &PlumbingGraph, h: &LatticeVector, x: &LatticeVector| {
        counting(g, &CountingQuery { mode: CountingMode::Full, class: h.clone(), threshold: x.clone() }).unwrap()
    };
    assert_eq!(full(&e8, &zero, &zero), 0);
    for (_, r, _) in io::named_fixtures() {
        let g = validate(&r).unwrap();
        for h in g.class_table().reps().iter().take(40) {
            let s = g.minimal_s_rep(h).unwrap();
            assert_eq!(full(&g, h, &s), 0);
        }
    }
    let g = validate(&string_graph(&[-3])).unwrap();
    assert_eq!(full(&g, &LatticeVector::zero(1), &LatticeVector::integral(vec![3])), 12);
    let bad = CountingQuery { mode: CountingMode::Full, class: LatticeVector::new(vec![1], 3), threshold: LatticeVector::zero(1) };
    assert!(matches!(counting(&g, &bad), Err(Error::InfeasibleQuery(_))));
}

#[test]
fn support_bound_examples() {
    let g1 = validate(&io::ex_graph1()).unwrap();
    let all: Vec<usize> = (0..7).collect();
    let r = reduced_series_support_bound_check(&g1, &all, 4).unwrap();
    assert!(r.boundary.is_empty());
    let r = reduced_series_support_bound_check(&g1, &[0, 1, 2], 10).unwrap();
    assert!(r.support_points > 0);
    let r = reduced_series_support_bound_check(&g1, &[0, 3, 4], 10).unwrap();
    assert!(r.boundary.iter().all(|b| b.checked));
    let s = validate(&string_graph(&[-2, -3, -2, -4])).unwrap();
    let r = reduced_series_support_bound_check(&s, &[1, 2], 10).unwrap();
    assert!(r.boundary.iter().all(|b| !b.checked && b.notice.is_some()));
    assert!(reduced_series_support_bound_check(&s, &[0, 2], 4).is_err());
}

fn tree(seed: u64) -> PlumbingGraph {
    random_tree(seed, (2, 5))
}

fn subset_of(n: usize, mask: u32) -> Vec<usize> {
    let s: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
    if s.is_empty() {
        vec![0]
    } else {
        s
    }
}

/// A threshold `Σ b_v E*_v` with small coefficients.
fn threshold(g: &PlumbingGraph, b: &[i128]) -> LatticeVector {
    g.from_dual_coords(&b[..g.len()])
}

proptest! {
    #![proptest_config(common::cases(40))]

    #[test]
    fn coefficients_match_expansion(seed in any::<u64>()) {
        let g = tree(seed);
        let o = Oracle::new(&g);
        let exp = o.expansion(4);
        for t in terms_in_box(&g, 4) {
            let a = g.dual_coords_int(&t.exponent).unwrap();
            prop_assert_eq!(exp.get(&a).copied().unwrap_or(0), t.coefficient);
            // Support lies in the open positive orthant away from zero.
            if !t.exponent.is_zero() {
                prop_assert!(t.exponent.numerators().iter().all(|&c| c > 0));
            }
        }
        prop_assert_eq!(exp.values().filter(|&&c| c != 0).count(), terms_in_box(&g, 4).len());
    }

    #[test]
    fn counting_matches_brute_force(seed in any::<u64>(), b in proptest::collection::vec(0i128..4, 5), mask in 1u32..32, pick in any::<u32>()) {
        let g = tree(seed);
        let o = Oracle::new(&g);
        let x = threshold(&g, &b);
        let xs = o.scaled(&x);
        let i = subset_of(g.len(), mask);
        let t = g.class_table();
        let h = t.rep(pick % t.len() as u32);
        let hs = o.scaled(&h);
        for (mode, all) in [(CountingMode::Reduced(i.clone()), false), (CountingMode::Modified(i.clone()), true)] {
            let q = CountingQuery { mode, class: h.clone(), threshold: x.clone() };
            let expect = o.brute_count(Some(&hs), &xs, &i, all);
            prop_assert_eq!(counting_with(&g, &q, Strategy::Direct).unwrap(), expect);
            prop_assert_eq!(counting_with(&g, &q, Strategy::InclusionExclusion).unwrap(), expect);
        }
        let all: Vec<usize> = (0..g.len()).collect();
        let hx = g.class_of(&x).unwrap();
        let q = CountingQuery { mode: CountingMode::Full, class: hx.clone(), threshold: x.clone() };
        prop_assert_eq!(counting(&g, &q).unwrap(), o.brute_count(Some(&o.scaled(&hx)), &xs, &all, false));
    }

    #[test]
    fn class_sums_recover_unrestricted_sum(seed in any::<u64>(), b in proptest::collection::vec(0i128..4, 5), mask in 1u32..32) {
        let g = tree(seed);
        let o = Oracle::new(&g);
        let x = threshold(&g, &b);
        let i = subset_of(g.len(), mask);
        let total: i128 = g
            .class_table()
            .reps()
            .into_iter()
            .map(|h| counting(&g, &CountingQuery { mode: CountingMode::Reduced(i.clone()), class: h, threshold: x.clone() }).unwrap())
            .sum();
        prop_assert_eq!(total, o.brute_count(None, &o.scaled(&x), &i, false));
    }

    #[test]
    fn inclusion_exclusion_identity(seed in any::<u64>(), b in proptest::collection::vec(0i128..5, 5), mask in 1u32..32, pick in any::<u32>()) {
        let g = tree(seed);
        let x = threshold(&g, &b);
        let i = subset_of(g.len(), mask);
        let t = g.class_table();
        let h = t.rep(pick % t.len() as u32);
        let table = series::counting_table(&g, &h, &x, &i).unwrap();
        let mut ie = 0i128;
        for m in 1u32..1 << i.len() {
            let j: Vec<usize> = (0..i.len()).filter(|k| m >> k & 1 == 1).map(|k| i[k]).collect();
            let qj = counting(&g, &CountingQuery { mode: CountingMode::Modified(j.clone()), class: h.clone(), threshold: x.clone() }).unwrap();
            prop_assert_eq!(qj, table.modified(&j).unwrap());
            ie += if j.len() % 2 == 1 { qj } else { -qj };
        }
        prop_assert_eq!(ie, table.reduced_all());
    }

    #[test]
    fn univariate_stream_matches_enumeration(seed in any::<u64>(), v in 0usize..5, bounds in proptest::collection::vec(0i128..200, 3)) {
        let g = tree(seed);
        let v = v % g.len();
        let d = g.det() as i128;
        let t = g.class_table();
        let queries: Vec<(u32, i128)> = bounds.iter().enumerate().map(|(k, &b)| ((k as u32 * 7) % t.len() as u32, b * d / 10)).collect();
        let got = series::univariate_counts(&g, v, &queries).unwrap();
        for ((h, bound), value) in queries.iter().zip(got) {
            let mut x = vec![0i128; g.len()];
            x[v] = *bound;
            let x = LatticeVector::new(x, d);
            let q = CountingQuery { mode: CountingMode::Reduced(vec![v]), class: t.rep(*h), threshold: x };
            prop_assert_eq!(counting(&g, &q).unwrap(), value);
        }
    }

    #[test]
    fn support_bound_holds(seed in any::<u64>(), mask in 1u32..64) {
        let g = random_tree(seed, (3, 6));
        let s = subset_of(g.len(), mask);
        let c = g.connected_closure(&s).unwrap();
        let r = reduced_series_support_bound_check(&g, &c, 6).unwrap();
        prop_assert!(r.support_points > 0);
    }
}
