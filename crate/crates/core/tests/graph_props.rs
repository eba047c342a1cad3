mod common;

use common::{det_and_inverse, neg_form, q, Oracle};
use num_traits::{Signed, ToPrimitive};
use plumbing_core::io::{self, random_tree, string_graph};
use plumbing_core::{validate, Error, LatticeVector, PlumbingGraph, RawGraph};
use proptest::prelude::*;

fn raw(vs: &[(&str, i64)], es: &[(&str, &str)]) -> RawGraph {
    RawGraph {
        vertices: vs.iter().map(|(a, e)| (a.to_string(), *e)).collect(),
        edges: es.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    }
}

fn ade(name: &str) -> PlumbingGraph {
    let (_, r) = io::ade_graphs().into_iter().find(|(n, _)| n == name).unwrap();
    validate(&r).unwrap()
}

#[test]
fn validate_examples() {
    let g = validate(&string_graph(&[-3])).unwrap();
    assert_eq!(g.det(), 3);
    let bad = raw(&[("a", -1), ("b", -1)], &[("a", "b")]);
    assert!(matches!(validate(&bad), Err(Error::NotNegativeDefinite { .. })));
    let e8 = ade("e8");
    let (det, _) = det_and_inverse(&neg_form(&e8));
    assert_eq!(det, q(1));
    assert_eq!(e8.det(), 1);
}

#[test]
fn validate_rejections() {
    let cyc = raw(&[("a", -2), ("b", -2), ("c", -2)], &[("a", "b"), ("b", "c"), ("c", "a")]);
    assert!(matches!(validate(&cyc), Err(Error::NotATree(_))));
    let split = raw(&[("a", -2), ("b", -2)], &[]);
    assert!(matches!(validate(&split), Err(Error::NotATree(_))));
    let dup = raw(&[("a", -2), ("a", -3)], &[]);
    assert!(matches!(validate(&dup), Err(Error::DuplicateVertex(_))));
    let unknown = raw(&[("a", -2)], &[("a", "z")]);
    assert!(matches!(validate(&unknown), Err(Error::UnknownVertex(_))));
    assert!(matches!(validate(&raw(&[], &[])), Err(Error::Empty)));
}

#[test]
fn dual_basis_examples() {
    let g = validate(&string_graph(&[-3])).unwrap();
    let (e, d) = g.dual_basis();
    assert_eq!(d, 3);
    assert_eq!(e[0], LatticeVector::new(vec![1], 3));
    let a2 = ade("a2");
    let (e, d) = a2.dual_basis();
    assert_eq!(d, 3);
    assert_eq!(e[0], LatticeVector::new(vec![2, 1], 3));
    assert_eq!(e[1], LatticeVector::new(vec![1, 2], 3));
    let g1 = validate(&io::ex_graph1()).unwrap();
    assert!(g1.dual_basis().0.iter().all(|x| x.numerators().iter().all(|&c| c > 0)));
}

#[test]
fn canonical_cycle_examples() {
    for (_, r) in io::ade_graphs() {
        let g = validate(&r).unwrap();
        let cc = g.canonical_cycle();
        assert!(cc.k.is_zero() && cc.z_k.is_zero() && cc.gorenstein);
    }
    let g = validate(&string_graph(&[-3])).unwrap();
    let cc = g.canonical_cycle();
    assert_eq!(cc.k, LatticeVector::new(vec![-1], 3));
    assert!(!cc.gorenstein);
    assert!(!validate(&io::ex_graph2()).unwrap().canonical_cycle().gorenstein);
    let s = validate(&io::sigma_237()).unwrap();
    assert_eq!(s.canonical_cycle().z_k, LatticeVector::integral(vec![2, 1, 1, 1]));
}

#[test]
fn class_table_examples() {
    assert_eq!(ade("e8").class_table().reps(), vec![LatticeVector::zero(8)]);
    let g = validate(&string_graph(&[-3])).unwrap();
    let reps = g.class_table().reps();
    assert_eq!(reps, vec![LatticeVector::zero(1), LatticeVector::new(vec![1], 3), LatticeVector::new(vec![2], 3)]);
    assert_eq!(g.class_of(&LatticeVector::new(vec![-2], 3)).unwrap(), LatticeVector::new(vec![1], 3));
    assert_eq!(g.class_of(&LatticeVector::integral(vec![5])).unwrap(), LatticeVector::zero(1));
    let a2 = ade("a2");
    let x = &a2.dual_vector(0) + &a2.dual_vector(1);
    assert!(a2.class_of(&x).unwrap().is_zero());
    assert!(matches!(a2.class_of(&LatticeVector::new(vec![1, 0], 2)), Err(Error::NotInDualLattice)));
}

#[test]
fn minimal_s_rep_examples() {
    let g = validate(&string_graph(&[-3])).unwrap();
    assert!(g.minimal_s_rep(&LatticeVector::zero(1)).unwrap().is_zero());
    let h = LatticeVector::new(vec![1], 3);
    assert_eq!(g.minimal_s_rep(&h).unwrap(), h);
    let a2 = ade("a2");
    let e1 = a2.dual_vector(0);
    assert_eq!(a2.minimal_s_rep(&a2.class_of(&e1).unwrap()).unwrap(), e1);
}

#[test]
fn chi_examples() {
    for name in ["a3", "d4", "e8"] {
        let g = ade(name);
        assert_eq!(g.chi(&LatticeVector::zero(g.len())), q(0));
        for v in 0..g.len() {
            assert_eq!(g.chi(&LatticeVector::basis(g.len(), v)), q(1));
        }
    }
    let s = validate(&io::sigma_237()).unwrap();
    assert_eq!(s.chi(&s.canonical_cycle().z_k), q(0));
}

#[test]
fn components_examples() {
    let g2 = validate(&io::ex_graph2()).unwrap();
    let all: Vec<usize> = (0..5).collect();
    assert!(g2.components_minus(&all).unwrap().components.is_empty());
    let f = g2.components_minus(&[1, 2, 3, 4]).unwrap();
    assert_eq!(f.components.len(), 1);
    assert_eq!(f.components[0].graph.euler(), &[-3]);
    let g1 = validate(&io::ex_graph1()).unwrap();
    let f = g1.components_minus(&g1.nodes()).unwrap();
    let mut sizes: Vec<usize> = f.components.iter().map(|c| c.graph.len()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 1, 1, 1]);
    assert!(f.components.iter().any(|c| c.graph.euler() == [-2]));
}

#[test]
fn dual_restrict_far_away_is_zero() {
    let g = validate(&string_graph(&[-2, -3, -2, -4])).unwrap();
    let f = g.components_minus(&[1]).unwrap();
    let far = f.components.iter().find(|c| c.origin == vec![2, 3]).unwrap();
    // E*_0 pairs to zero with every vertex of the far component.
    let x = g.dual_vector(0);
    assert!(g.dual_restrict(&x, far).unwrap().is_zero());
}

#[test]
fn rationality_examples() {
    for (_, r) in io::ade_graphs() {
        assert!(validate(&r).unwrap().is_rational().unwrap());
    }
    assert!(validate(&string_graph(&[-3, -5, -2, -4])).unwrap().is_rational().unwrap());
    assert!(validate(&string_graph(&[-3])).unwrap().is_rational().unwrap());
    assert!(!validate(&io::sigma_237()).unwrap().is_rational().unwrap());
}

#[test]
fn projection_of_reps_lies_in_unit_cube() {
    let g = validate(&io::ex_graph1()).unwrap();
    for r in g.class_table().reps().iter().take(50) {
        let p = plumbing_core::graph::project_pi(r, &[0, 3, 6]);
        assert!(p.coords().iter().all(|c| !c.is_negative() && *c < q(1)));
    }
}

fn tree(seed: u64) -> PlumbingGraph {
    random_tree(seed, (2, 7))
}

proptest! {
    #![proptest_config(common::cases(48))]

    #[test]
    fn determinant_and_inverse_match_oracle(seed in any::<u64>()) {
        let g = tree(seed);
        let o = Oracle::new(&g);
        prop_assert_eq!(o.d, g.det() as i128);
        let (dual, d) = g.dual_basis();
        for v in 0..g.len() {
            let scaled: Vec<i128> = dual[v].coords().iter().map(|c| (c * q(d)).to_integer().to_i128().unwrap()).collect();
            prop_assert_eq!(&scaled, &o.adj[v]);
            prop_assert!(scaled.iter().all(|&c| c > 0));
            for w in 0..g.len() {
                let expect = if v == w { q(-1) } else { q(0) };
                prop_assert_eq!(g.pairing(&dual[v], &LatticeVector::basis(g.len(), w)), expect);
            }
        }
    }

    #[test]
    fn class_table_is_a_transversal(seed in any::<u64>(), coeffs in proptest::collection::vec(-20i128..20, 8)) {
        let g = tree(seed);
        let t = g.class_table();
        prop_assert_eq!(t.len() as i64, g.det());
        let reps = t.reps();
        for r in &reps {
            prop_assert!(g.in_dual_lattice(r));
            prop_assert!(r.coords().iter().all(|c| !c.is_negative() && *c < q(1)));
        }
        let mut sorted = reps.clone();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), reps.len());
        let x = g.from_dual_coords(&coeffs[..g.len()]);
        let r = g.class_of(&x).unwrap();
        prop_assert!((&x - &r).is_integral());
        prop_assert!(reps.contains(&r));
    }

    #[test]
    fn adjunction_and_chi_symmetry(seed in any::<u64>(), l in proptest::collection::vec(-4i128..6, 8)) {
        let g = tree(seed);
        let n = g.len();
        let k = g.canonical_cycle().k;
        for v in 0..n {
            let e = LatticeVector::basis(n, v);
            prop_assert_eq!(g.pairing(&(&k + &e), &e) + q(2), q(0));
        }
        let o = Oracle::new(&g);
        prop_assert_eq!(k.coords(), o.canonical());
        let l = LatticeVector::integral(l[..n].to_vec());
        let zk = g.canonical_cycle().z_k;
        prop_assert_eq!(g.chi(&l), g.chi(&(&zk - &l)));
        prop_assert!(g.chi(&l).is_integer());
    }

    #[test]
    fn s_rep_is_minimal(seed in any::<u64>(), pick in any::<u32>()) {
        let g = tree(seed);
        let n = g.len();
        let t = g.class_table();
        let r = t.rep(pick % t.len() as u32);
        let s = g.minimal_s_rep(&r).unwrap();
        let a = g.dual_coords_int(&s).unwrap();
        prop_assert!(a.iter().all(|&x| x >= 0));
        let delta = &s - &r;
        prop_assert!(delta.is_integral() && delta.numerators().iter().all(|&c| c >= 0));
        // Every element of S′ in the class inside [r, s + ΣE] dominates s.
        let hi: Vec<i128> = delta.numerators().iter().map(|c| c + 1).collect();
        let cells: i128 = hi.iter().map(|c| c + 1).product();
        prop_assume!(cells <= 20_000);
        let mut l = vec![0i128; n];
        loop {
            let x = &r + &LatticeVector::integral(l.clone());
            if g.dual_coords_int(&x).unwrap().iter().all(|&c| c >= 0) {
                prop_assert!(x.geq(&s));
            }
            let mut i = 0;
            while i < n && l[i] == hi[i] { l[i] = 0; i += 1; }
            if i == n { break; }
            l[i] += 1;
        }
    }

    #[test]
    fn dual_restrict_is_adjoint_and_linear(seed in any::<u64>(), v in 0usize..7, a in proptest::collection::vec(-5i128..5, 8), b in proptest::collection::vec(-5i128..5, 8)) {
        let g = tree(seed);
        let n = g.len();
        let v = v % n;
        prop_assume!(n > 1);
        let f = g.components_minus(&[v]).unwrap();
        let x = g.from_dual_coords(&a[..n]);
        let y = g.from_dual_coords(&b[..n]);
        for c in &f.components {
            let jx = g.dual_restrict(&x, c).unwrap();
            let jy = g.dual_restrict(&y, c).unwrap();
            prop_assert_eq!(g.dual_restrict(&(&x + &y), c).unwrap(), &jx + &jy);
            for (i, &w) in c.origin.iter().enumerate() {
                let local = LatticeVector::basis(c.graph.len(), i);
                let global = LatticeVector::basis(n, w);
                prop_assert_eq!(c.graph.pairing(&jx, &local), g.pairing(&x, &global));
            }
        }
    }

    #[test]
    fn connected_closure_is_minimal(seed in any::<u64>(), mask in 1u32..128) {
        let g = tree(seed);
        let n = g.len();
        let subset: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        prop_assume!(!subset.is_empty());
        let c = g.connected_closure(&subset).unwrap();
        prop_assert!(g.is_connected_subset(&c));
        prop_assert!(subset.iter().all(|v| c.contains(v)));
        for &u in &c {
            if subset.contains(&u) { continue; }
            let rest: Vec<usize> = c.iter().copied().filter(|&w| w != u).collect();
            prop_assert!(!g.is_connected_subset(&rest));
        }
    }

    #[test]
    fn fundamental_cycle_rationality_on_strings(e in proptest::collection::vec(-5i64..=-2, 1..5)) {
        let g = validate(&string_graph(&e)).unwrap();
        prop_assert!(g.is_rational().unwrap());
        let z = g.fundamental_cycle().unwrap();
        prop_assert_eq!(g.chi(&z), q(1));
    }
}

#[test]
fn normalization_matches_oracle() {
    let g = validate(&io::ex_graph2()).unwrap();
    let o = Oracle::new(&g);
    for r in g.class_table().reps() {
        assert_eq!(g.normalization(&r), o.normalization(&r.coords()));
    }
}
