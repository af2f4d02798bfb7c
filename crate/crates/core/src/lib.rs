//! Grassmann graphs and graphs of non-degenerate linear codes over small
//! prime fields, their maximal cliques and automorphisms, and an exhaustive
//! classifier for adjacency-preserving embeddings of `Γ(n,2)_2` into
//! `Γ_2(V)`.

pub mod autgroup;
pub mod bitset;
pub mod cliques;
pub mod error;
pub mod fqlinalg;
pub mod grassmann;
pub mod hmap;
pub mod search;
pub mod verify;

pub use bitset::BitRow;
pub use error::{Error, Result};
pub use fqlinalg::{
    coordinate_hyperplane, enumerate_subspaces, gaussian_binomial, rref, FVector, Field, Subspace,
};
pub use grassmann::{
    build_graph, connected_components, is_adjacent, is_nondegenerate, CodeGraph, GraphKind,
};
pub use autgroup::{
    code_graph_aut_group, count_graph_automorphisms, grassmann_aut_group, AutGroup,
    GraphAutomorphism, LinearMap,
};
pub use cliques::{
    enumerate_maximal_cliques, star, star_criterion, top, CliqueClass, CliqueVerdict,
};
pub use hmap::{
    abc_partition, complement_code, h_map, p_point, p_upper, projective_morphism, verify_h,
    AbcPartition, HReport, SpecialFrame,
};
pub use verify::{
    certify_in, certify_theorem, classify, enumerate_embeddings, lemma_chain, normalize,
    Certificate, CertifyOptions, EmbeddingMap, LemmaReport, TheoremContext, Verdict,
};
