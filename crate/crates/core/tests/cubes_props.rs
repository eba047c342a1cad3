mod common;

use plumbing_core::cubes::{
    chi_int, coefficient_via_cubes, gorenstein_pc, s_function, swbar_via_cubes, swbar_via_series, weight,
    GorensteinOracle,
};
use plumbing_core::io::{self, random_tree, string_graph};
use plumbing_core::rational::int;
use plumbing_core::series::coefficient;
use plumbing_core::sw::{Calculator, PcMethod};
use plumbing_core::{validate, Error, LatticeVector, PlumbingGraph};
use proptest::prelude::*;

fn graph(raw: plumbing_core::RawGraph) -> PlumbingGraph {
    validate(&raw).unwrap()
}

fn gorenstein_fixtures() -> Vec<(String, PlumbingGraph)> {
    let mut out: Vec<(String, PlumbingGraph)> = io::ade_graphs().into_iter().map(|(n, r)| (n, graph(r))).collect();
    out.push(("sigma_2_3_7".into(), graph(io::sigma_237())));
    out.push(("ex_graph1".into(), graph(io::ex_graph1())));
    out
}

fn ade(name: &str) -> PlumbingGraph {
    gorenstein_fixtures().into_iter().find(|(n, _)| n == name).unwrap().1
}

/// `χ(l) = -(l, l + K)/2` from the oracle's own form and canonical class.
fn oracle_chi(o: &common::Oracle, l: &[i128]) -> common::Q {
    let x: Vec<common::Q> = l.iter().map(|&c| common::q(c as i64)).collect();
    let k = o.canonical();
    let y: Vec<common::Q> = x.iter().zip(&k).map(|(a, b)| a + b).collect();
    -o.pairing(&x, &y) / common::q(2)
}

#[test]
fn weight_examples() {
    let e8 = ade("e8");
    for v in 0..8 {
        assert_eq!(weight(&e8, &LatticeVector::zero(8), &[v]).unwrap(), 1);
    }
    for (_, g) in gorenstein_fixtures() {
        let zk = g.canonical_cycle().z_k;
        assert_eq!(weight(&g, &zk, &[]).unwrap(), 0);
        assert_eq!(chi_int(&g, zk.numerators()), 0);
    }
    assert!(weight(&e8, &LatticeVector::new(vec![1, 0, 0, 0, 0, 0, 0, 0], 2), &[]).is_err());
}

#[test]
fn cube_coefficients_examples() {
    for (_, g) in gorenstein_fixtures() {
        assert_eq!(coefficient_via_cubes(&g, &LatticeVector::zero(g.len())).unwrap(), 1);
    }
    let a2 = ade("a2");
    let l = LatticeVector::integral(vec![1, 1]);
    assert_eq!(coefficient_via_cubes(&a2, &l).unwrap(), 1);
    assert_eq!(coefficient(&a2, &l).unwrap(), 1);
}

#[test]
fn cube_coefficients_on_gorenstein_rectangles() {
    for (name, g) in [("sigma_2_3_7", graph(io::sigma_237())), ("d4", ade("d4")), ("e6", ade("e6"))] {
        let zk: Vec<i128> = g.canonical_cycle().z_k.numerators().to_vec();
        let hi: Vec<i128> = zk.iter().map(|z| z + 1).collect();
        let mut l = vec![0i128; g.len()];
        loop {
            let x = LatticeVector::integral(l.clone());
            assert_eq!(coefficient_via_cubes(&g, &x).unwrap(), coefficient(&g, &x).unwrap(), "{name} at {x}");
            let mut i = 0;
            while i < l.len() && l[i] == hi[i] {
                l[i] = 0;
                i += 1;
            }
            if i == l.len() {
                break;
            }
            l[i] += 1;
        }
    }
}

#[test]
fn swbar_examples() {
    let e8 = ade("e8");
    let ones = LatticeVector::integral(vec![1; 8]);
    assert_eq!(swbar_via_cubes(&e8, &ones).unwrap(), int(0));
    for (name, g) in gorenstein_fixtures() {
        let zk = g.canonical_cycle().z_k;
        let bumped = &zk + &LatticeVector::integral(vec![1; g.len()]);
        let a = swbar_via_cubes(&g, &zk).unwrap();
        assert_eq!(a, swbar_via_cubes(&g, &bumped).unwrap(), "{name}");
        assert_eq!(a, swbar_via_series(&g).unwrap(), "{name}");
    }
    let s = graph(io::sigma_237());
    assert_eq!(swbar_via_series(&s).unwrap(), int(1));
    let g1 = graph(io::ex_graph1());
    assert_eq!(swbar_via_cubes(&g1, &g1.canonical_cycle().z_k).unwrap(), int(1));
    assert!(matches!(swbar_via_cubes(&g1, &LatticeVector::zero(7)), Err(Error::MethodPreconditionFailed(_))));
    let g2 = graph(io::ex_graph2());
    assert!(matches!(swbar_via_cubes(&g2, &LatticeVector::zero(5)), Err(Error::NotGorenstein)));
    assert!(matches!(gorenstein_pc(&g2, &[0]), Err(Error::NotGorenstein)));
}

#[test]
fn gorenstein_pc_all_subsets() {
    for (name, g) in gorenstein_fixtures() {
        let n = g.len();
        let rational = g.is_rational().unwrap();
        let mut oracle = GorensteinOracle::new(&g).unwrap();
        let mut calc = Calculator::new(&g, 2);
        let zero = LatticeVector::zero(n);
        let full: Vec<usize> = (0..n).collect();
        let swbar = oracle.swbar_series((1 << n) - 1).unwrap();
        assert_eq!(oracle.pc(&full).unwrap().series, swbar, "{name}");
        for mask in 1u64..1 << n {
            let subset: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            let pc = oracle.pc(&subset).unwrap();
            if rational {
                assert_eq!(pc.series, int(0), "{name} {subset:?}");
            }
            if mask.count_ones() <= 2 || mask == (1 << n) - 1 {
                assert_eq!(&pc.series, &calc.pc_reduced(&zero, &subset, PcMethod::ClosedForm).unwrap(), "{name} {subset:?}");
            }
        }
    }
}

#[test]
fn s_function_examples() {
    let m3 = graph(string_graph(&[-3]));
    let s = s_function(&m3).unwrap();
    assert_eq!(s.value, s.swbar);

    let e8 = ade("e8");
    let s = s_function(&e8).unwrap();
    assert_eq!(s.swbar, int(0));
    assert!(s.cube_checks);
    assert!(s.disconnected_zero > 0);

    let d4 = ade("d4");
    // The three leaves of D4 form a disconnected induced subgraph.
    let mut o = GorensteinOracle::new(&d4).unwrap();
    assert_eq!(o.s(0b1110).unwrap(), int(0));

    let g1 = graph(io::ex_graph1());
    let s = s_function(&g1).unwrap();
    assert_eq!((s.swbar, s.value), (int(1), int(1)));
    let s = s_function(&graph(io::sigma_237())).unwrap();
    assert_eq!((s.swbar, s.value), (int(1), int(1)));

    let long = graph(string_graph(&[-2; 13]));
    assert!(matches!(s_function(&long), Err(Error::SubsetCapExceeded { .. })));
    // Non-Gorenstein graphs still get the subgraph checks.
    assert!(!s_function(&graph(io::ex_graph2())).unwrap().cube_checks);
}

proptest! {
    #![proptest_config(common::cases(40))]

    #[test]
    fn weights_match_oracle(seed in any::<u64>(), l in proptest::collection::vec(-2i128..4, 5), mask in 0u32..32) {
        let g = random_tree(seed, (2, 5));
        let n = g.len();
        let o = common::Oracle::new(&g);
        let l = &l[..n];
        let j: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let mut best: Option<common::Q> = None;
        for sub in 0u32..1 << j.len() {
            let mut x = l.to_vec();
            for (i, &v) in j.iter().enumerate() {
                if sub >> i & 1 == 1 {
                    x[v] += 1;
                }
            }
            let c = oracle_chi(&o, &x);
            best = Some(match best { Some(b) if b >= c => b, _ => c });
        }
        let w = weight(&g, &LatticeVector::integral(l.to_vec()), &j).unwrap();
        prop_assert_eq!(common::q(w as i64), best.unwrap());
    }

    #[test]
    fn cube_coefficients_match_series(seed in any::<u64>(), l in proptest::collection::vec(0i128..4, 5)) {
        let g = random_tree(seed, (2, 5));
        let x = LatticeVector::integral(l[..g.len()].to_vec());
        prop_assert_eq!(coefficient_via_cubes(&g, &x).unwrap(), coefficient(&g, &x).unwrap());
    }

    #[test]
    fn s_vanishes_on_disconnected_subgraphs(seed in any::<u64>()) {
        let g = random_tree(seed, (2, 6));
        let s = s_function(&g).unwrap();
        let connected = (1u64..1 << g.len())
            .filter(|m| g.is_connected_subset(&(0..g.len()).filter(|v| m >> v & 1 == 1).collect::<Vec<_>>()))
            .count();
        prop_assert_eq!(s.disconnected_zero + connected, (1usize << g.len()) - 1);
        prop_assert_eq!(s.swbar, swbar_via_series(&g).unwrap());
    }
}
