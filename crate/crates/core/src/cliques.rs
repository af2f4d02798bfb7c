//! Maximal cliques of Grassmann and code graphs, and their classification
//! into stars `S(X)` and tops `G_k(Y)`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::BitRow;
use crate::error::{Error, Result};
use crate::fqlinalg::{coordinate_hyperplane, enumerate_subspaces, Subspace};
use crate::grassmann::{is_nondegenerate, CodeGraph, GraphKind};

/// All `k`-subspaces containing the `(k-1)`-subspace `x`, restricted to
/// non-degenerate codes when `restrict` is set. Sorted.
pub fn star(x: &Subspace, restrict: bool) -> Result<Vec<Subspace>> {
    let n = x.ambient_dim();
    if x.dim() + 1 >= n {
        return Err(Error::DimensionMismatch(format!(
            "a star centre must have dimension below n - 1 (got {} in F^{n})",
            x.dim()
        )));
    }
    let mut out = BTreeSet::new();
    for v in Subspace::full(x.field(), n).vectors() {
        if !x.contains_vector(&v) {
            let mut rows: Vec<_> = x.basis().collect();
            rows.push(v);
            let s = Subspace::span(&rows)?;
            if !restrict || is_nondegenerate(&s) {
                out.insert(s);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// All `k`-subspaces of the `(k+1)`-subspace `y`, restricted to
/// non-degenerate codes when `restrict` is set. Sorted.
pub fn top(y: &Subspace, restrict: bool) -> Result<Vec<Subspace>> {
    if y.dim() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "a top roof must have dimension at least 2 (got {})",
            y.dim()
        )));
    }
    let m = y.dim();
    let basis: Vec<_> = y.basis().collect();
    let mut out = Vec::new();
    // hyperplanes of F^m, pushed through the basis of y
    for coeffs in enumerate_subspaces(m, m - 1, y.field())? {
        let rows: Vec<_> = coeffs
            .basis()
            .map(|c| {
                (0..m).fold(crate::fqlinalg::FVector::zero(y.field(), y.ambient_dim()), |acc, i| {
                    acc.add(&basis[i].scale(c.coord(i)))
                })
            })
            .collect();
        let s = Subspace::span(&rows)?;
        if !restrict || is_nondegenerate(&s) {
            out.push(s);
        }
    }
    out.sort();
    Ok(out)
}

/// Whether `S^c(X)` is a maximal clique of `Γ(n,k)_q`, predicted without
/// enumeration: always for `q >= 3`; for `q = 2` iff at most `n - k - 1`
/// coordinate hyperplanes contain `X` (here `k = dim X + 1`).
pub fn star_criterion(x: &Subspace) -> bool {
    if !x.field().is_binary() {
        return true;
    }
    let n = x.ambient_dim();
    let k = x.dim() + 1;
    let containing = x.zero_columns().len();
    debug_assert_eq!(
        containing,
        (1..=n).filter(|&i| coordinate_hyperplane(i, n, x.field()).unwrap().contains(x)).count()
    );
    containing + k < n
}

/// Two readings of the `q = k = 2` star condition on a point `P = P_I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PointStarReadings {
    /// `I` is the literal support of the spanning vector.
    pub literal_support: bool,
    /// `I` is the representative inside `{1, ..., n-1}` under
    /// `P_I = P^{I^c}`.
    pub within_first_n_minus_1: bool,
}

/// Evaluates `P = Q or |I| >= 3` under both readings of `I`. Only defined
/// over `F_2`.
pub fn point_star_readings(p: &Subspace) -> Result<PointStarReadings> {
    if !p.field().is_binary() || p.dim() != 1 {
        return Err(Error::DimensionMismatch("expected a point of PG(n-1, 2)".into()));
    }
    let n = p.ambient_dim();
    let v = p.basis().next().unwrap();
    let support = v.support();
    let is_q = support.len() == n;
    let literal = is_q || support.len() >= 3;
    let rep_size = if support.contains(&(n - 1)) { n - support.len() } else { support.len() };
    Ok(PointStarReadings { literal_support: literal, within_first_n_minus_1: is_q || rep_size >= 3 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CliqueVerdict {
    Star(Subspace),
    Top(Subspace),
    Neither,
}

impl CliqueVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CliqueVerdict::Star(_) => "star",
            CliqueVerdict::Top(_) => "top",
            CliqueVerdict::Neither => "neither",
        }
    }

    pub fn subspace(&self) -> Option<&Subspace> {
        match self {
            CliqueVerdict::Star(s) | CliqueVerdict::Top(s) => Some(s),
            CliqueVerdict::Neither => None,
        }
    }
}

/// A maximal clique with its classification.
///
/// A clique is called a star (top) only when it equals the whole star (top)
/// intersected with the vertex set of the graph it was found in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueClass {
    pub vertices: Vec<usize>,
    pub verdict: CliqueVerdict,
    /// Set when the clique matches both a star and a top (the verdict then
    /// records the star).
    pub also_top: bool,
    /// For code graphs: always true. For full Grassmann graphs: whether the
    /// non-degenerate part of the clique is a maximal clique of `Γ(n,k)_q`.
    pub maximal_in_code_graph: bool,
    /// Star `S(X)` with `X ∈ C(n,k-1)_q` and the clique equal to all of
    /// `S(X)`.
    pub is_maximal_star: bool,
}

/// Pivoting Bron-Kerbosch over bit rows. The outer level is split by
/// vertex and run in parallel; the result is sorted.
pub fn maximal_cliques(adjacency: &[BitRow], max_cliques: usize) -> Result<Vec<Vec<usize>>> {
    let count = adjacency.len();
    let mut per_vertex: Vec<Result<Vec<Vec<usize>>>> = (0..count)
        .into_par_iter()
        .map(|v| {
            let mut p = adjacency[v].clone();
            let mut x = adjacency[v].clone();
            for u in 0..count {
                if u <= v {
                    p.remove(u);
                } else {
                    x.remove(u);
                }
            }
            let mut out = Vec::new();
            let mut r = vec![v];
            bron_kerbosch(adjacency, &mut r, p, x, &mut out, max_cliques)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in per_vertex.drain(..) {
        all.extend(part?);
        if all.len() > max_cliques {
            return Err(Error::BudgetExceeded(format!("more than {max_cliques} maximal cliques")));
        }
    }
    for c in &mut all {
        c.sort_unstable();
    }
    all.sort();
    Ok(all)
}

fn bron_kerbosch(
    adj: &[BitRow],
    r: &mut Vec<usize>,
    mut p: BitRow,
    mut x: BitRow,
    out: &mut Vec<Vec<usize>>,
    max_cliques: usize,
) -> Result<()> {
    if p.is_empty() {
        if x.is_empty() {
            if out.len() >= max_cliques {
                return Err(Error::BudgetExceeded(format!("more than {max_cliques} maximal cliques")));
            }
            out.push(r.clone());
        }
        return Ok(());
    }
    // pivot: vertex of P ∪ X with most neighbours in P
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| {
            let mut c = p.clone();
            c.intersect_with(&adj[u]);
            c.count()
        })
        .unwrap();
    let mut todo = p.clone();
    todo.difference_with(&adj[pivot]);
    for v in todo.iter() {
        let mut np = p.clone();
        np.intersect_with(&adj[v]);
        let mut nx = x.clone();
        nx.intersect_with(&adj[v]);
        r.push(v);
        bron_kerbosch(adj, r, np, nx, out, max_cliques)?;
        r.pop();
        p.remove(v);
        x.insert(v);
    }
    Ok(())
}

/// Default cap on the number of maximal cliques.
pub const DEFAULT_MAX_CLIQUES: usize = 1 << 20;

/// Enumerates and classifies every maximal clique of `g`.
pub fn enumerate_maximal_cliques(g: &CodeGraph) -> Result<Vec<CliqueClass>> {
    enumerate_maximal_cliques_with_budget(g, DEFAULT_MAX_CLIQUES)
}

pub fn enumerate_maximal_cliques_with_budget(g: &CodeGraph, max_cliques: usize) -> Result<Vec<CliqueClass>> {
    let cliques = maximal_cliques(g.adjacency(), max_cliques)?;
    let nondeg: Vec<bool> = g.vertices().iter().map(is_nondegenerate).collect();
    cliques.into_par_iter().map(|c| classify_clique(g, c, &nondeg)).collect()
}

fn classify_clique(g: &CodeGraph, vertices: Vec<usize>, nondeg: &[bool]) -> Result<CliqueClass> {
    let k = g.k();
    let members: Vec<&Subspace> = vertices.iter().map(|&i| g.vertex(i)).collect();
    let mut common = members[0].clone();
    let mut span = members[0].clone();
    for m in &members[1..] {
        common = common.intersect(m)?;
        span = span.sum(m)?;
    }
    let same_set = |pred: &dyn Fn(&Subspace) -> bool| {
        let family: Vec<usize> = (0..g.vertex_count()).filter(|&i| pred(g.vertex(i))).collect();
        family == vertices
    };
    let star_match = common.dim() + 1 == k && same_set(&|s| s.contains(&common));
    let top_match = span.dim() == k + 1 && same_set(&|s| span.contains(s));
    let verdict = if star_match {
        CliqueVerdict::Star(common.clone())
    } else if top_match {
        CliqueVerdict::Top(span.clone())
    } else {
        CliqueVerdict::Neither
    };

    let is_maximal_star = match &verdict {
        CliqueVerdict::Star(x) => {
            x.dim() > 0 && is_nondegenerate(x) && star(x, false)?.len() == vertices.len()
        }
        _ => false,
    };

    let maximal_in_code_graph = match g.kind() {
        GraphKind::NonDegenerate => true,
        GraphKind::FullGrassmann => {
            let kept: Vec<usize> = vertices.iter().copied().filter(|&i| nondeg[i]).collect();
            !kept.is_empty()
                && !(0..g.vertex_count()).any(|u| {
                    nondeg[u] && !kept.contains(&u) && kept.iter().all(|&w| g.has_edge(u, w))
                })
        }
    };

    Ok(CliqueClass {
        vertices,
        verdict,
        also_top: star_match && top_match,
        maximal_in_code_graph,
        is_maximal_star,
    })
}

/// One row of the star-criterion comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionCheck {
    pub center: Subspace,
    pub predicted: bool,
    pub enumerated: bool,
}

/// Compares [`star_criterion`] with the enumerated maximal cliques of the
/// code graph `g` for every `(k-1)`-subspace.
pub fn check_star_criterion(g: &CodeGraph, cliques: &[CliqueClass]) -> Result<Vec<CriterionCheck>> {
    if g.kind() != GraphKind::NonDegenerate {
        return Err(Error::WrongGraph("star criterion is about code graphs".into()));
    }
    let maximal: BTreeSet<&[usize]> = cliques.iter().map(|c| c.vertices.as_slice()).collect();
    enumerate_subspaces(g.n(), g.k() - 1, g.field())?
        .into_par_iter()
        .map(|center| {
            let members: Vec<usize> = star(&center, true)?
                .iter()
                .map(|s| g.id_of(s).expect("non-degenerate vertex"))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            Ok(CriterionCheck {
                predicted: star_criterion(&center),
                enumerated: maximal.contains(members.as_slice()),
                center,
            })
        })
        .collect()
}
