use std::collections::HashSet;

use codegraph_core::{
    build_graph, connected_components, enumerate_maximal_cliques, enumerate_subspaces, gaussian_binomial,
    grassmann_aut_group, CliqueVerdict, FVector, Field, GraphKind, Subspace,
};

fn all_vectors(field: Field, n: usize) -> Vec<FVector> {
    let q = field.q();
    (0..q.pow(n as u32))
        .map(|mut idx| {
            let coords: Vec<u32> = (0..n)
                .map(|_| {
                    let c = idx % q;
                    idx /= q;
                    c
                })
                .collect();
            FVector::new(field, &coords).unwrap()
        })
        .collect()
}

/// Distinct k-subspaces as sets of vectors, found by spanning every k-tuple.
fn brute_subspaces(field: Field, n: usize, k: usize) -> usize {
    let vectors = all_vectors(field, n);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut tuple = vec![0usize; k];
    loop {
        let gens: Vec<FVector> = tuple.iter().map(|&i| vectors[i]).collect();
        // closure of the tuple under addition and scaling
        let mut span: HashSet<u64> = HashSet::from([FVector::zero(field, n).packed()]);
        let mut frontier = vec![FVector::zero(field, n)];
        while let Some(v) = frontier.pop() {
            for g in &gens {
                for c in 1..field.q() {
                    let w = v.add(&g.scale(c));
                    if span.insert(w.packed()) {
                        frontier.push(w);
                    }
                }
            }
        }
        if span.len() == (field.q() as usize).pow(k as u32) {
            let mut key: Vec<u64> = span.into_iter().collect();
            key.sort_unstable();
            seen.insert(key);
        }
        // next tuple
        let mut i = 0;
        while i < k {
            tuple[i] += 1;
            if tuple[i] < vectors.len() {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if i == k {
            return seen.len();
        }
    }
}

#[test]
fn enumeration_matches_brute_force_and_gaussian_binomial() {
    for (n, k, q) in [(3, 1, 2), (4, 2, 2), (5, 2, 2), (5, 3, 2), (3, 1, 3), (3, 2, 3), (4, 2, 3), (3, 1, 5)] {
        let field = Field::new(q).unwrap();
        let listed = enumerate_subspaces(n, k, field).unwrap();
        assert_eq!(listed.len(), brute_subspaces(field, n, k), "({n},{k},{q})");
        assert_eq!(listed.len() as u128, gaussian_binomial(n as u32, k as u32, q), "({n},{k},{q})");
        assert!(listed.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn grassmann_graph_degree_matches_counting() {
    // a line of PG(3,2) meets 3 points, each on 6 further lines
    let g = build_graph(4, 2, Field::BINARY, GraphKind::FullGrassmann).unwrap();
    assert!((0..g.vertex_count()).all(|v| g.degree(v) == 18));
    assert_eq!(g.edge_count(), 35 * 18 / 2);
    assert_eq!(connected_components(&g).len(), 1);
    assert!(g.validate().is_none());
    assert!(!g.is_complete_regime());

    let points = build_graph(4, 1, Field::BINARY, GraphKind::FullGrassmann).unwrap();
    assert!(points.is_complete_regime());
    assert_eq!(points.edge_count(), 15 * 14 / 2);
}

#[test]
fn graph_export_lists_one_row_per_vertex() {
    let g = build_graph(4, 2, Field::BINARY, GraphKind::NonDegenerate).unwrap();
    let text = g.export_text();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("4 2 2 nondegenerate 13 {}", g.edge_count()));
    assert_eq!(lines.count(), 13);
    let parsed = Subspace::parse_blocks(Field::BINARY, &g.export_vertices()).unwrap();
    assert_eq!(parsed, g.vertices());
}

#[test]
fn full_grassmann_cliques_are_points_and_planes() {
    // stars through the 31 points and tops in the 155 planes of PG(4,2)
    let g = build_graph(5, 2, Field::BINARY, GraphKind::FullGrassmann).unwrap();
    let cliques = enumerate_maximal_cliques(&g).unwrap();
    let stars = cliques.iter().filter(|c| matches!(c.verdict, CliqueVerdict::Star(_))).count();
    let tops = cliques.iter().filter(|c| matches!(c.verdict, CliqueVerdict::Top(_))).count();
    assert_eq!((stars as u128, tops as u128), (gaussian_binomial(5, 1, 2), gaussian_binomial(5, 3, 2)));
    assert!(cliques.iter().all(|c| !c.also_top));
}

/// `X ↦ {y : y G x^T = 0 for x in X}` for a symmetric Gram matrix `G`.
fn perp_under(gram: &[[u32; 4]; 4], x: &Subspace) -> Subspace {
    let field = Field::BINARY;
    let pairing = |y: &FVector, v: &FVector| {
        (0..4).map(|i| (0..4).map(|j| y.coord(i) * gram[i][j] * v.coord(j)).sum::<u32>()).sum::<u32>() % 2
    };
    let kernel: Vec<FVector> = all_vectors(field, 4).into_iter().filter(|y| x.basis().all(|v| pairing(y, &v) == 0)).collect();
    Subspace::span(&kernel).unwrap()
}

#[test]
fn another_symmetric_form_gives_the_same_group() {
    // hyperbolic plane plus two unit squares
    let gram = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
    let g = build_graph(4, 2, Field::BINARY, GraphKind::FullGrassmann).unwrap();
    let target: Vec<u32> =
        g.vertices().iter().map(|x| g.id_of(&perp_under(&gram, x)).expect("2-subspace") as u32).collect();
    assert_ne!(target, (0..35).collect::<Vec<u32>>());
    let group = grassmann_aut_group(4, 2, Field::BINARY).unwrap();
    let matches: Vec<_> =
        group.elements().unwrap().into_iter().filter(|a| a.vertex_permutation(&g).as_deref() == Some(&target)).collect();
    assert_eq!(matches.len(), 1);
    assert!(matches[0].is_dual());
}
