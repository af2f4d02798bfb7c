//! Strategies and checks shared by the property suite and the acceptance
//! run.

#![allow(dead_code)]

use codegraph_core::{is_adjacent, rref, FVector, Field, GraphAutomorphism, LinearMap, Subspace};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 10_000;

type Check = std::result::Result<(), TestCaseError>;

/// (q, n) pairs sampled by the suites.
pub fn space() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![(Just(2u32), 2usize..=10), (Just(3u32), 2usize..=5), (Just(5u32), 2usize..=4),]
}

fn rows(q: u32, n: usize, max_rows: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0..q, n), 1..=max_rows)
}

fn to_vectors(field: Field, rows: &[Vec<u32>]) -> Vec<FVector> {
    rows.iter().map(|r| FVector::new(field, r).unwrap()).collect()
}

fn field(q: u32) -> Field {
    Field::new(q).unwrap()
}

fn subspace(q: u32, n: usize) -> impl Strategy<Value = Subspace> {
    rows(q, n, n + 1).prop_map(move |r| Subspace::span(&to_vectors(field(q), &r)).unwrap())
}

fn subspace_of_dim(q: u32, n: usize, k: usize) -> impl Strategy<Value = Subspace> {
    rows(q, n, k).prop_filter_map("rank", move |r| {
        let s = Subspace::span(&to_vectors(field(q), &r)).unwrap();
        (s.dim() == k).then_some(s)
    })
}

fn invertible(q: u32, n: usize) -> impl Strategy<Value = LinearMap> {
    prop::collection::vec(prop::collection::vec(0..q, n), n)
        .prop_filter_map("singular", move |m| LinearMap::new(field(q), &to_vectors(field(q), &m)).ok())
}

/// A subspace, an invertible mixing matrix for its basis and a few
/// vectors to test membership with.
pub fn canonical_case() -> impl Strategy<Value = (Subspace, LinearMap, Vec<Vec<u32>>)> {
    space().prop_flat_map(|(q, n)| {
        subspace(q, n).prop_flat_map(move |x| {
            let k = x.dim().max(1);
            (Just(x), invertible(q, k), rows(q, n, 3))
        })
    })
}

pub fn check_canonical((x, mix, extra): (Subspace, LinearMap, Vec<Vec<u32>>)) -> Check {
    let again = rref(x.field(), x.ambient_dim(), &x.basis().collect::<Vec<_>>()).unwrap();
    prop_assert_eq!(&again, &x);
    if x.dim() > 0 {
        // multiply the basis by an invertible matrix
        let basis: Vec<FVector> = x.basis().collect();
        let k = basis.len();
        let mixed: Vec<FVector> = (0..k)
            .map(|i| {
                (0..k).fold(FVector::zero(x.field(), x.ambient_dim()), |acc, j| {
                    acc.add(&basis[j].scale(mix.entry(i, j)))
                })
            })
            .collect();
        let mixed = Subspace::span(&mixed).unwrap();
        prop_assert_eq!(&mixed, &x);
        prop_assert_eq!(mixed.to_string(), x.to_string());
    }
    // v in X iff adding v keeps the rank
    for v in to_vectors(x.field(), &extra) {
        let mut gens: Vec<FVector> = x.basis().collect();
        gens.push(v);
        let grown = Subspace::span(&gens).unwrap();
        prop_assert_eq!(x.contains_vector(&v), grown.dim() == x.dim());
    }
    let pivots = x.pivots();
    prop_assert!(pivots.windows(2).all(|w| w[0] < w[1]));
    for (i, row) in x.basis().enumerate() {
        for (j, &p) in pivots.iter().enumerate() {
            prop_assert_eq!(row.coord(p), u32::from(i == j));
        }
    }
    Ok(())
}

pub fn pair_case() -> impl Strategy<Value = (Subspace, Subspace)> {
    space().prop_flat_map(|(q, n)| (subspace(q, n), subspace(q, n)))
}

pub fn check_dimension_formula((x, y): (Subspace, Subspace)) -> Check {
    let s = x.sum(&y).unwrap();
    let i = x.intersect(&y).unwrap();
    prop_assert_eq!(s.dim() + i.dim(), x.dim() + y.dim());
    prop_assert!(s.contains(&x) && s.contains(&y));
    prop_assert!(x.contains(&i) && y.contains(&i));
    prop_assert_eq!(s.dim(), x.sum_dim(&y));
    Ok(())
}

pub fn same_dim_case() -> impl Strategy<Value = (Subspace, Subspace)> {
    space().prop_flat_map(|(q, n)| {
        (1..n).prop_flat_map(move |k| (subspace_of_dim(q, n, k), subspace_of_dim(q, n, k)))
    })
}

pub fn check_adjacency_symmetry((x, y): (Subspace, Subspace)) -> Check {
    let xy = is_adjacent(&x, &y).unwrap();
    prop_assert_eq!(xy, is_adjacent(&y, &x).unwrap());
    prop_assert_eq!(xy, x.intersect(&y).unwrap().dim() + 1 == x.dim());
    prop_assert!(!is_adjacent(&x, &x).unwrap());
    Ok(())
}

pub fn single_case() -> impl Strategy<Value = Subspace> {
    space().prop_flat_map(|(q, n)| subspace(q, n))
}

pub fn check_perp_involution(x: Subspace) -> Check {
    let p = x.perp();
    prop_assert_eq!(p.dim(), x.ambient_dim() - x.dim());
    prop_assert_eq!(p.perp(), x.clone());
    for u in x.basis() {
        for v in p.basis() {
            prop_assert_eq!(u.dot(&v), 0);
        }
    }
    Ok(())
}

/// Two group elements (matrix, dual flag) of `Γ_k(F_q^{2k})` and a vertex.
pub fn action_case() -> impl Strategy<Value = (LinearMap, bool, LinearMap, bool, Subspace)> {
    prop_oneof![(Just(2u32), 2usize..=4), (Just(3u32), Just(2usize)),].prop_flat_map(|(q, half)| {
        let n = 2 * half;
        (invertible(q, n), any::<bool>(), invertible(q, n), any::<bool>(), subspace_of_dim(q, n, half))
    })
}

pub fn check_action_composition((a, da, b, db, x): (LinearMap, bool, LinearMap, bool, Subspace)) -> Check {
    let k = x.dim();
    let a = GraphAutomorphism::new(a, da, k).unwrap();
    let b = GraphAutomorphism::new(b, db, k).unwrap();
    let ab = a.compose(&b);
    prop_assert_eq!(ab.is_dual(), da ^ db);
    let stepwise = a.apply(&b.apply(&x).unwrap()).unwrap();
    prop_assert_eq!(ab.apply(&x).unwrap(), stepwise);
    prop_assert_eq!(a.inverse().apply(&a.apply(&x).unwrap()).unwrap(), x.clone());
    prop_assert_eq!(a.compose(&a.inverse()).apply(&x).unwrap(), x);
    Ok(())
}
