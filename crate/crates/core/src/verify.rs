//! Exhaustive classification of adjacency-preserving injections of
//! `Γ(n,2)_2` into `Γ_2(V)`, `V = F_2^n`.
//!
//! Every embedding is normalised: an optional orthocomplement (when the
//! star through `Q` lands on a top), then the linear map taking the point
//! images `g_1(Q), g_1(P^1), ..., g_1(P^{n-1})` back to `Q, P^1, ...`.
//! The normalised embedding must be the identity or `h`; the inverse of
//! the normalising map is then the witness. The chain of intermediate
//! claims is evaluated along the way and tallied.
//!
//! For `n = 4` each embedding is also looked up in a table built from the
//! whole automorphism group, and the two verdicts are compared. At every
//! `n` the verdict counts are checked against orbit sizes computed from the
//! group, which catches an incomplete search.
//!
//! For `n = 5` the search can be restricted to one representative per
//! group orbit of prefix images ([`OrbitPrefixes`]).
//!
//! Points of `PG(n-1, 2)` are handled as bits of a `u64` mask (bit `v - 1`
//! for the packed vector `v`), so `n <= 6` here.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::autgroup::{grassmann_aut_group, GraphAutomorphism, LinearMap};
use crate::error::{Error, Result};
use crate::fqlinalg::{FVector, Field, Subspace};
use crate::grassmann::{build_graph, is_adjacent, CodeGraph, GraphKind};
use crate::hmap::{h_map, SpecialFrame};
use crate::search::{greedy_order, MapSearch, SearchStats, Visitor};

const F2: Field = Field::BINARY;

/// Dimensions accepted by the theorem engine.
pub const THEOREM_DIMS: std::ops::RangeInclusive<usize> = 4..=5;

#[inline]
fn bit(word: u64) -> u64 {
    1 << (word - 1)
}

#[inline]
fn line_mask(a: u64, b: u64) -> u64 {
    bit(a) | bit(b) | bit(a ^ b)
}

#[inline]
fn single_point(mask: u64) -> Option<u64> {
    (mask.count_ones() == 1).then(|| mask.trailing_zeros() as u64 + 1)
}

fn point_mask(x: &Subspace) -> u64 {
    let r = x.packed_rows();
    line_mask(r[0], r[1])
}

fn vector(n: usize, word: u64) -> FVector {
    let coords: Vec<u32> = (0..n).map(|i| (word >> (n - 1 - i) & 1) as u32).collect();
    FVector::new(F2, &coords).expect("binary word")
}

/// Precomputed data shared by every embedding at one `n`.
pub struct TheoremContext {
    n: usize,
    frame: SpecialFrame,
    pattern: CodeGraph,
    target: CodeGraph,
    target_masks: Vec<u64>,
    /// Pattern vertex -> its own ID in the target.
    ident: Vec<u32>,
    /// Pattern vertex -> ID of its `h`-image in the target.
    h_image: Vec<u32>,
    /// Target ID -> target ID of the orthocomplement (`n = 4` only).
    perp: Option<Vec<u32>>,
    /// Points `P` with `S^c(P)` a star: `Q` first, then every `P_T` with
    /// `|T| >= 3`, as (packed word, pattern IDs of `S^c(P)`).
    stars: Vec<(u64, Vec<usize>)>,
    /// Index into `stars` of `P^i`, `i = 1..=n` (slot 0 unused).
    upper_star: Vec<usize>,
    ones: u64,
    /// `I ⊂ {1..n-1}` as a bitmask (bit `i-1`) -> pattern ID of `A_I`.
    a_index: Vec<usize>,
    /// Pattern IDs of `P^i + P^j`, `1 <= i < j <= n-1`, with `(i, j)`.
    pair_index: Vec<(usize, usize, usize)>,
    /// `Q + sum_{i in I} P^i`, by bitmask.
    s_standard: Vec<Subspace>,
    /// Pattern IDs of codes inside `s_standard[I]`.
    c_sets: Vec<Vec<usize>>,
    triples: Vec<usize>,
    /// Pattern edges computed from the subspaces, independent of the bit
    /// rows used by the search.
    pattern_edges: Vec<(usize, usize)>,
}

impl TheoremContext {
    pub fn new(n: usize) -> Result<TheoremContext> {
        if !THEOREM_DIMS.contains(&n) {
            return Err(Error::OutOfRange(format!(
                "the theorem engine supports n in {}..={}, got {n}",
                THEOREM_DIMS.start(),
                THEOREM_DIMS.end()
            )));
        }
        let frame = SpecialFrame::new(n)?;
        let pattern = build_graph(n, 2, F2, GraphKind::NonDegenerate)?;
        let target = build_graph(n, 2, F2, GraphKind::FullGrassmann)?;
        let target_masks: Vec<u64> = target.vertices().iter().map(point_mask).collect();
        let to_target = |x: &Subspace| target.id_of(x).expect("2-subspace") as u32;
        let ident: Vec<u32> = pattern.vertices().iter().map(to_target).collect();
        let h_image = pattern
            .vertices()
            .iter()
            .map(|x| Ok(to_target(&h_map(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let perp = (n == 4).then(|| target.vertices().iter().map(|x| to_target(&x.perp())).collect());

        let pattern_masks: Vec<u64> = pattern.vertices().iter().map(point_mask).collect();
        let ones = (1u64 << n) - 1;
        let mut stars = Vec::new();
        let mut upper_star = vec![usize::MAX; n + 1];
        let domain = std::iter::once(ones).chain((1..ones).filter(|w| w.count_ones() >= 3));
        for word in domain {
            let members: Vec<usize> = (0..pattern.vertex_count())
                .filter(|&u| pattern_masks[u] & bit(word) != 0)
                .collect();
            if word.count_ones() as usize == n - 1 {
                let missing = n - (ones ^ word).trailing_zeros() as usize;
                upper_star[missing] = stars.len();
            }
            stars.push((word, members));
        }

        let e = |i: usize| 1u64 << (n - i);
        let q_line = frame.q().clone();
        let span_with_q = |word: u64| Subspace::span(&[vector(n, ones), vector(n, word)]).unwrap();
        let subsets = 1usize << (n - 1);
        let mut a_index = vec![usize::MAX; subsets];
        let mut s_standard = vec![Subspace::zero(F2, n); subsets];
        let mut c_sets = vec![Vec::new(); subsets];
        for mask in 1..subsets {
            let members: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            let lower = members.iter().fold(0, |w, &i| w | e(i));
            a_index[mask] = pattern.id_of(&span_with_q(lower)).expect("A_I is non-degenerate");
            let mut s = q_line.clone();
            for &i in &members {
                s = s.sum(&Subspace::span(&[vector(n, ones ^ e(i))])?)?;
            }
            c_sets[mask] = (0..pattern.vertex_count()).filter(|&u| s.contains(pattern.vertex(u))).collect();
            s_standard[mask] = s;
        }
        let mut pair_index = Vec::new();
        for i in 1..n {
            for j in i + 1..n {
                let x = Subspace::span(&[vector(n, ones ^ e(i)), vector(n, ones ^ e(j))])?;
                pair_index.push((i, j, pattern.id_of(&x).expect("P^i + P^j is non-degenerate")));
            }
        }
        let triples = (1..subsets).filter(|m: &usize| m.count_ones() == 3).collect();
        let count = pattern.vertex_count();
        let pattern_edges = (0..count)
            .flat_map(|u| (u + 1..count).map(move |v| (u, v)))
            .filter(|&(u, v)| is_adjacent(pattern.vertex(u), pattern.vertex(v)).unwrap())
            .collect();

        Ok(TheoremContext {
            n,
            frame,
            pattern,
            target,
            target_masks,
            ident,
            h_image,
            perp,
            stars,
            upper_star,
            ones,
            a_index,
            pair_index,
            s_standard,
            c_sets,
            triples,
            pattern_edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &SpecialFrame {
        &self.frame
    }

    /// `Γ(n,2)_2`.
    pub fn pattern(&self) -> &CodeGraph {
        &self.pattern
    }

    /// `Γ_2(F_2^n)`.
    pub fn target(&self) -> &CodeGraph {
        &self.target
    }

    /// The inclusion `C(n,2)_2 -> G_2(V)` as target IDs.
    pub fn identity_embedding(&self) -> &[u32] {
        &self.ident
    }

    /// `h` as target IDs.
    pub fn h_embedding(&self) -> &[u32] {
        &self.h_image
    }

    /// Corrupts the pattern adjacency used by the search. The independent
    /// edge list used for soundness checks is left alone.
    pub fn toggle_pattern_edge(&mut self, i: usize, j: usize) {
        self.pattern.toggle_edge(i, j);
    }

    /// Corrupts the target adjacency used by the search, leaving the point
    /// sets used for soundness checks alone.
    pub fn toggle_target_edge(&mut self, i: usize, j: usize) {
        self.target.toggle_edge(i, j);
    }

    /// Target IDs of `a` restricted to `C(n,2)_2`.
    pub fn restriction_of(&self, a: &GraphAutomorphism) -> Vec<u32> {
        self.pattern
            .vertices()
            .iter()
            .map(|x| self.target.id_of(&a.apply_unchecked(x)).expect("2-subspace") as u32)
            .collect()
    }

    /// Target IDs of `a ∘ h`.
    pub fn composed_with_h(&self, a: &GraphAutomorphism) -> Vec<u32> {
        self.h_image
            .iter()
            .map(|&t| {
                self.target.id_of(&a.apply_unchecked(self.target.vertex(t as usize))).expect("2-subspace") as u32
            })
            .collect()
    }

    /// Injective and sends pattern edges to target edges, checked on point
    /// sets with no reference to the search.
    pub fn is_sound(&self, images: &[u32]) -> bool {
        if images.len() != self.pattern.vertex_count() {
            return false;
        }
        let mut sorted = images.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() == images.len()
            && self.pattern_edges.iter().all(|&(u, v)| {
                let shared = self.target_masks[images[u] as usize] & self.target_masks[images[v] as usize];
                shared.count_ones() == 1
            })
    }
}

/// An injective adjacency-preserving map `C(n,2)_2 -> G_2(V)`, as target
/// vertex IDs indexed by pattern vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmbeddingMap {
    pub images: Vec<u32>,
}

impl EmbeddingMap {
    pub fn subspaces<'c>(&self, ctx: &'c TheoremContext) -> Vec<&'c Subspace> {
        self.images.iter().map(|&t| ctx.target.vertex(t as usize)).collect()
    }
}

fn search<'c>(ctx: &'c TheoremContext, reverse_ties: bool) -> MapSearch<'c> {
    let pattern = ctx.pattern.adjacency();
    MapSearch::new(pattern, ctx.target.adjacency(), false, greedy_order(pattern, reverse_ties))
}

/// Every embedding, in search order. `complete` is false when the deadline
/// tripped.
pub fn enumerate_embeddings(
    ctx: &TheoremContext,
    jobs: usize,
    deadline: Option<Instant>,
) -> (Vec<EmbeddingMap>, SearchStats) {
    let (found, stats) = search(ctx, false).run(jobs, deadline, crate::search::Collect::default);
    (found.0.into_iter().map(|images| EmbeddingMap { images }).collect(), stats)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizeFailure {
    /// `f(S(Q))` is neither inside a star nor (for `n = 4`) a top.
    StarImage,
    /// `f(S^c(P))` has no common point for the given point word.
    PointImage(u64),
    /// `g_1(Q), g_1(P^1), ..., g_1(P^{n-1})` do not span `V`.
    Spanning,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub dual: bool,
    /// The embedding after the orthocomplement correction.
    pub corrected: Vec<u32>,
    /// `g_1` of the corrected embedding, aligned with the star list.
    pub g1: Vec<u64>,
    /// `pre_g` with `f' = pre_g ∘ f`.
    pub pre_g: GraphAutomorphism,
    pub normalized: Vec<u32>,
}

fn common_point(ctx: &TheoremContext, images: &[u32], members: &[usize]) -> u64 {
    members.iter().fold(u64::MAX, |m, &u| m & ctx.target_masks[images[u] as usize])
}

fn point_images(ctx: &TheoremContext, images: &[u32]) -> std::result::Result<Vec<u64>, NormalizeFailure> {
    ctx.stars
        .iter()
        .map(|(word, members)| {
            single_point(common_point(ctx, images, members)).ok_or(NormalizeFailure::PointImage(*word))
        })
        .collect()
}

/// Brings `f` to the form fixing `Q` and every `P^i`, `i < n`, on points.
pub fn normalize(ctx: &TheoremContext, images: &[u32]) -> std::result::Result<Normalized, NormalizeFailure> {
    let n = ctx.n;
    let a_members = &ctx.stars[0].1;
    let dual = if single_point(common_point(ctx, images, a_members)).is_some() {
        false
    } else {
        let span = a_members
            .iter()
            .fold(Subspace::zero(F2, n), |s, &u| s.sum(ctx.target.vertex(images[u] as usize)).unwrap());
        if span.dim() != 3 || ctx.perp.is_none() {
            return Err(NormalizeFailure::StarImage);
        }
        true
    };
    let corrected: Vec<u32> = match (&ctx.perp, dual) {
        (Some(perp), true) => images.iter().map(|&t| perp[t as usize]).collect(),
        _ => images.to_vec(),
    };
    let g1 = point_images(ctx, &corrected)?;

    let mut from = vec![vector(n, g1[0])];
    let mut to = vec![vector(n, ctx.ones)];
    for i in 1..n {
        from.push(vector(n, g1[ctx.upper_star[i]]));
        to.push(vector(n, ctx.stars[ctx.upper_star[i]].0));
    }
    let b = LinearMap::new(F2, &from).map_err(|_| NormalizeFailure::Spanning)?;
    let t = LinearMap::new(F2, &to).expect("Q, P^1, ..., P^{n-1} is a basis");
    let m = b.inverse().expect("invertible").then(&t);
    let linear = GraphAutomorphism::linear(m.clone(), 2);
    let pre_g = if dual {
        let d = GraphAutomorphism::new(LinearMap::identity(F2, n), true, 2).expect("n = 2k");
        linear.compose(&d)
    } else {
        linear
    };
    let normalized: Vec<u32> = corrected
        .iter()
        .map(|&t| ctx.target.id_of(&m.image(ctx.target.vertex(t as usize))).expect("2-subspace") as u32)
        .collect();
    debug_assert!(images.iter().zip(&normalized).all(|(&x, &y)| {
        pre_g.apply_unchecked(ctx.target.vertex(x as usize)) == *ctx.target.vertex(y as usize)
    }));
    Ok(Normalized { dual, corrected, g1, pre_g, normalized })
}

/// Outcome of each step of the chain for one normalised embedding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    /// `f(A_i) = g_1(Q) + g_1(P^i)`, `i = 1..=n` (before the linear step).
    pub eq1: bool,
    /// `f(P^i + P^j) = g_1(P^i) + g_1(P^j)` (before the linear step).
    pub eq3: bool,
    /// After normalisation `f'(A_i) = A_i` and `f'(P^i+P^j) = P^i+P^j`.
    pub normalized_frame: bool,
    /// `S_I = Q + sum P^i` for every non-empty `I ⊂ {1..n-1}`.
    pub eq4: bool,
    pub lemma1: bool,
    pub lemma2: bool,
    pub lemma3: bool,
    /// `f'(X) ⊂ S_I` for every `X ∈ C_I`.
    pub lemma4: bool,
    pub lemma5: bool,
    /// Some `f'_I`, `|I| = 3`, is the identity.
    pub lemma5_hypothesis: bool,
    /// `f'` is the identity or `h`.
    pub endgame: bool,
    /// `g_1'(P^n)` is `P^n`, except for `f' = h` with `P^n ⊄ H`, where it
    /// is `P_n`.
    pub parity: bool,
}

/// Evaluates the chain on a normalised embedding.
pub fn lemma_chain(ctx: &TheoremContext, norm: &Normalized) -> LemmaReport {
    let n = ctx.n;
    let f1 = &norm.corrected;
    let f = &norm.normalized;
    let mask_of = |images: &[u32], u: usize| ctx.target_masks[images[u] as usize];
    let g1_upper = |i: usize| norm.g1[ctx.upper_star[i]];
    let full = (1usize << (n - 1)) - 1;

    let a_single = |i: usize| if i == n { ctx.a_index[full] } else { ctx.a_index[1 << (i - 1)] };
    let eq1 = (1..=n).all(|i| mask_of(f1, a_single(i)) == line_mask(norm.g1[0], g1_upper(i)));
    let eq3 = ctx
        .pair_index
        .iter()
        .all(|&(i, j, u)| mask_of(f1, u) == line_mask(g1_upper(i), g1_upper(j)));
    let normalized_frame = (1..n).all(|i| f[a_single(i)] == ctx.ident[a_single(i)])
        && ctx.pair_index.iter().all(|&(_, _, u)| f[u] == ctx.ident[u]);

    let vertex = |u: usize| ctx.target.vertex(f[u] as usize);
    let spans: Vec<Subspace> = (0..=full)
        .map(|mask| {
            (1..n)
                .filter(|i| mask >> (i - 1) & 1 == 1)
                .fold(Subspace::zero(F2, n), |s, i| s.sum(vertex(a_single(i))).unwrap())
        })
        .collect();
    let eq4 = (1..=full).all(|m| spans[m] == ctx.s_standard[m]);
    let lemma1 = (1..=full).all(|m| spans[m].contains(vertex(ctx.a_index[m])));
    let lemma2 = (1..=full).all(|m| f[ctx.a_index[m]] == ctx.ident[ctx.a_index[m]]);

    let g1_after = point_images(ctx, f).ok();
    let lemma3 = g1_after.as_ref().is_some_and(|g| {
        g[0] == ctx.ones
            && ctx.stars.iter().zip(g).skip(1).all(|(&(word, _), &img)| img == word || img == ctx.ones ^ word)
    });
    let lemma4 = (1..=full).all(|m| ctx.c_sets[m].iter().all(|&u| spans[m].contains(vertex(u))));

    let is_identity = f == ctx.ident.as_slice();
    let is_h = f == ctx.h_image.as_slice();
    let identity_on = |m: usize| ctx.c_sets[m].iter().all(|&u| f[u] == ctx.ident[u]);
    let lemma5_hypothesis = ctx.triples.iter().any(|&m| identity_on(m));
    let lemma5 = !lemma5_hypothesis || is_identity;
    let endgame = is_identity || is_h;

    let p_upper_n = ctx.stars[ctx.upper_star[n]].0;
    let expected = if is_h && !ctx.frame.in_h(&Subspace::span(&[vector(n, p_upper_n)]).unwrap()) {
        ctx.ones ^ p_upper_n
    } else {
        p_upper_n
    };
    let parity = endgame && g1_after.is_some_and(|g| g[ctx.upper_star[n]] == expected);

    LemmaReport {
        eq1,
        eq3,
        normalized_frame,
        eq4,
        lemma1,
        lemma2,
        lemma3,
        lemma4,
        lemma5,
        lemma5_hypothesis,
        endgame,
        parity,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Extendable(GraphAutomorphism),
    /// `f = g ∘ h` with the given `g`.
    Exceptional(GraphAutomorphism),
    Unclassified,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Extendable(_) => "extendable",
            Verdict::Exceptional(_) => "exceptional",
            Verdict::Unclassified => "unclassified",
        }
    }

    pub fn witness(&self) -> Option<&GraphAutomorphism> {
        match self {
            Verdict::Extendable(g) | Verdict::Exceptional(g) => Some(g),
            Verdict::Unclassified => None,
        }
    }
}

/// Checks a verdict against the embedding on every vertex.
pub fn verdict_holds(ctx: &TheoremContext, images: &[u32], verdict: &Verdict) -> bool {
    let target = |u: usize| ctx.target.vertex(images[u] as usize);
    match verdict {
        Verdict::Extendable(a) => {
            (0..images.len()).all(|u| a.apply_unchecked(ctx.pattern.vertex(u)) == *target(u))
        }
        Verdict::Exceptional(g) => (0..images.len())
            .all(|u| g.apply_unchecked(ctx.target.vertex(ctx.h_image[u] as usize)) == *target(u)),
        Verdict::Unclassified => false,
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub normalize: std::result::Result<(), NormalizeFailure>,
    pub lemmas: Option<LemmaReport>,
}

/// Classifies by normalisation; every witness is re-verified on all
/// vertices before it is accepted.
pub fn classify(ctx: &TheoremContext, images: &[u32]) -> Classification {
    let norm = match normalize(ctx, images) {
        Ok(norm) => norm,
        Err(e) => return Classification { verdict: Verdict::Unclassified, normalize: Err(e), lemmas: None },
    };
    let lemmas = lemma_chain(ctx, &norm);
    let witness = norm.pre_g.inverse();
    let verdict = if norm.normalized == ctx.ident {
        Verdict::Extendable(witness)
    } else if norm.normalized == ctx.h_image {
        Verdict::Exceptional(witness)
    } else {
        Verdict::Unclassified
    };
    let verdict = if verdict_holds(ctx, images, &verdict) { verdict } else { Verdict::Unclassified };
    Classification { verdict, normalize: Ok(()), lemmas: Some(lemmas) }
}

/// Restrictions of every automorphism of `Γ_2(V)`, and of every `g ∘ h`,
/// keyed by image vector: (first group index, multiplicity).
pub struct GroupTable {
    elements: Vec<GraphAutomorphism>,
    restrictions: HashMap<Vec<u32>, (usize, u64)>,
    through_h: HashMap<Vec<u32>, (usize, u64)>,
}

impl GroupTable {
    /// Scans the whole group; only for groups that can be materialised.
    pub fn build(ctx: &TheoremContext) -> Result<GroupTable> {
        let elements = grassmann_aut_group(ctx.n, 2, F2)?.elements()?;
        let keys: Vec<(Vec<u32>, Vec<u32>)> = elements
            .par_iter()
            .map(|a| {
                let perm = a.vertex_permutation(&ctx.target).expect("automorphism of G_2(V)");
                let r = ctx.ident.iter().map(|&t| perm[t as usize]).collect();
                let gh = ctx.h_image.iter().map(|&t| perm[t as usize]).collect();
                (r, gh)
            })
            .collect();
        let mut restrictions = HashMap::with_capacity(keys.len());
        let mut through_h = HashMap::with_capacity(keys.len());
        for (idx, (r, gh)) in keys.into_iter().enumerate() {
            restrictions.entry(r).or_insert((idx, 0)).1 += 1;
            through_h.entry(gh).or_insert((idx, 0)).1 += 1;
        }
        Ok(GroupTable { elements, restrictions, through_h })
    }

    pub fn group_order(&self) -> usize {
        self.elements.len()
    }

    pub fn distinct_restrictions(&self) -> usize {
        self.restrictions.len()
    }

    pub fn distinct_through_h(&self) -> usize {
        self.through_h.len()
    }

    /// Largest number of group elements sharing one restriction, and one
    /// `g ∘ h`.
    pub fn max_multiplicity(&self) -> (u64, u64) {
        let max = |m: &HashMap<Vec<u32>, (usize, u64)>| m.values().map(|v| v.1).max().unwrap_or(0);
        (max(&self.restrictions), max(&self.through_h))
    }

    pub fn lookup(&self, images: &[u32]) -> Verdict {
        let ext = self.restrictions.get(images);
        let exc = self.through_h.get(images);
        match (ext, exc) {
            (Some(&(i, _)), None) => Verdict::Extendable(self.elements[i].clone()),
            (None, Some(&(i, _))) => Verdict::Exceptional(self.elements[i].clone()),
            _ => Verdict::Unclassified,
        }
    }

    /// Whether some automorphism restricts to `h`.
    pub fn h_is_restriction(&self, ctx: &TheoremContext) -> bool {
        self.restrictions.contains_key(&ctx.h_image)
    }
}

/// Counts over the whole automorphism group that decide whether witnesses
/// are unique.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WitnessMultiplicity {
    /// Elements restricting to the identity on `C(n,2)_2`.
    pub identity_kernel: u64,
    /// Elements `a` with `a ∘ h = h`.
    pub h_stabilizer: u64,
    /// Elements restricting to `h`.
    pub h_extensions: u64,
}

/// Streams the automorphism group of `Γ_2(V)`.
pub fn witness_multiplicity(ctx: &TheoremContext, jobs: usize) -> Result<WitnessMultiplicity> {
    let group = grassmann_aut_group(ctx.n, 2, F2)?;
    let vertices = ctx.pattern.vertices();
    let h_images: Vec<&Subspace> = ctx.h_image.iter().map(|&t| ctx.target.vertex(t as usize)).collect();
    let scan = |part: Box<dyn Iterator<Item = GraphAutomorphism> + Send + '_>| {
        let mut acc = WitnessMultiplicity::default();
        for a in part {
            let fixes = vertices.iter().all(|x| a.apply_unchecked(x) == *x);
            let stabilises = h_images.iter().all(|&y| a.apply_unchecked(y) == *y);
            let extends = vertices.iter().zip(&h_images).all(|(x, &y)| a.apply_unchecked(x) == *y);
            acc.identity_kernel += fixes as u64;
            acc.h_stabilizer += stabilises as u64;
            acc.h_extensions += extends as u64;
        }
        acc
    };
    let merge = |a: WitnessMultiplicity, b: WitnessMultiplicity| WitnessMultiplicity {
        identity_kernel: a.identity_kernel + b.identity_kernel,
        h_stabilizer: a.h_stabilizer + b.h_stabilizer,
        h_extensions: a.h_extensions + b.h_extensions,
    };
    let parts = group.partition()?;
    Ok(with_pool(jobs, || parts.into_par_iter().map(scan).reduce(WitnessMultiplicity::default, merge)))
}

/// Largest prefix accepted by [`orbit_prefixes`].
pub const MAX_ORBIT_DEPTH: usize = 6;

/// One representative per orbit of prefix assignments under the
/// automorphism group `G` of `Γ_2(V)`.
///
/// Every embedding is `a ∘ f` for exactly `|orbit|` choices of prefix image
/// in the orbit of `f`'s prefix image, and verdicts are invariant under
/// `f ↦ a ∘ f`, so weighted counts over the representatives equal the
/// counts over all embeddings.
#[derive(Clone, Debug)]
pub struct OrbitPrefixes {
    /// Pattern vertices assigned by every prefix; the first two are adjacent.
    pub vertices: Vec<usize>,
    /// Target tuples, one per orbit, with the orbit size under `G`.
    pub reps: Vec<(Vec<u32>, u64)>,
    /// Orbit size of the first target edge; equals the number of ordered
    /// target edges.
    pub edge_orbit: u64,
}

fn pack_tuple(t: &[u32]) -> u64 {
    t.iter().fold(0, |acc, &v| acc << 10 | v as u64)
}

pub fn orbit_prefixes(ctx: &TheoremContext, order: &[usize], depth: usize, jobs: usize) -> Result<OrbitPrefixes> {
    if !(2..=MAX_ORBIT_DEPTH).contains(&depth) {
        return Err(Error::OutOfRange(format!("orbit depth must lie in 2..={MAX_ORBIT_DEPTH}")));
    }
    let r0 = order[0];
    let r1 = *order
        .iter()
        .find(|&&v| ctx.pattern.has_edge(r0, v))
        .ok_or_else(|| Error::WrongGraph("pattern has an isolated vertex".into()))?;
    let mut vertices = vec![r0, r1];
    vertices.extend(order.iter().copied().filter(|&v| v != r0 && v != r1).take(depth - 2));
    let (t0, t1) = (ctx.ident[r0], ctx.ident[r1]);

    // one pass over G: the orbit of (t0, t1) and its stabiliser as vertex
    // permutations
    let group = grassmann_aut_group(ctx.n, 2, F2)?;
    let targets = ctx.target.vertices();
    let count = targets.len();
    let id = |a: &GraphAutomorphism, x: &Subspace| ctx.target.id_of(&a.apply_unchecked(x)).expect("2-subspace") as u32;
    let parts = group.partition()?;
    let (seen, mut stabiliser) = with_pool(jobs, || {
        parts
            .into_par_iter()
            .map(|part| {
                let mut seen = vec![false; count * count];
                let mut stab = Vec::new();
                for a in part {
                    let (i0, i1) = (id(&a, &targets[t0 as usize]), id(&a, &targets[t1 as usize]));
                    seen[i0 as usize * count + i1 as usize] = true;
                    if (i0, i1) == (t0, t1) {
                        stab.push(targets.iter().map(|x| id(&a, x)).collect::<Vec<u32>>());
                    }
                }
                (seen, stab)
            })
            .reduce(
                || (vec![false; count * count], Vec::new()),
                |(mut sa, mut ta), (sb, mut tb)| {
                    sa.iter_mut().zip(sb).for_each(|(x, y)| *x |= y);
                    ta.append(&mut tb);
                    (sa, ta)
                },
            )
    });
    stabiliser.sort_unstable();
    let edge_orbit = seen.into_iter().filter(|&b| b).count() as u64;
    let ordered_edges = 2 * ctx.target.edge_count() as u64;
    if edge_orbit != ordered_edges {
        return Err(Error::OutOfRange(format!(
            "edge orbit has {edge_orbit} of {ordered_edges} ordered edges; reduction is not valid"
        )));
    }

    // prefix images compatible with the pattern, in lexicographic order
    let mut tuples = Vec::new();
    let mut current = vec![t0, t1];
    extend_prefix(ctx, &vertices, &mut current, &mut tuples);

    let mut visited = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for t in tuples {
        if visited.contains(&pack_tuple(&t)) {
            continue;
        }
        let orbit: std::collections::HashSet<u64> = stabiliser
            .iter()
            .map(|perm| pack_tuple(&t.iter().map(|&v| perm[v as usize]).collect::<Vec<_>>()))
            .collect();
        let size = orbit.len() as u64;
        visited.extend(orbit);
        reps.push((t, edge_orbit * size));
    }
    Ok(OrbitPrefixes { vertices, reps, edge_orbit })
}

fn extend_prefix(ctx: &TheoremContext, vertices: &[usize], current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let i = current.len();
    if i == vertices.len() {
        out.push(current.clone());
        return;
    }
    for t in 0..ctx.target.vertex_count() as u32 {
        let fits = current.iter().enumerate().all(|(j, &tj)| {
            tj != t && (!ctx.pattern.has_edge(vertices[i], vertices[j]) || ctx.target.has_edge(t as usize, tj as usize))
        });
        if fits {
            current.push(t);
            extend_prefix(ctx, vertices, current, out);
            current.pop();
        }
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Pass and fail counts of one check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
    }

    fn add(&mut self, other: Tally) {
        self.pass += other.pass;
        self.fail += other.fail;
    }
}

/// Per-check tallies over all embeddings. When normalisation fails only
/// the failing step is counted for that embedding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaTallies {
    pub star_image: Tally,
    pub point_images: Tally,
    pub eq2: Tally,
    pub eq1: Tally,
    pub eq3: Tally,
    pub normalized_frame: Tally,
    pub eq4: Tally,
    pub lemma1: Tally,
    pub lemma2: Tally,
    pub lemma3: Tally,
    pub lemma4: Tally,
    pub lemma5: Tally,
    pub lemma5_hypothesis_met: u64,
    pub endgame: Tally,
    pub parity: Tally,
}

impl LemmaTallies {
    fn record(&mut self, c: &Classification) {
        match &c.normalize {
            Err(NormalizeFailure::StarImage) => self.star_image.record(false),
            Err(NormalizeFailure::PointImage(_)) => {
                self.star_image.record(true);
                self.point_images.record(false);
            }
            Err(NormalizeFailure::Spanning) => {
                self.star_image.record(true);
                self.point_images.record(true);
                self.eq2.record(false);
            }
            Ok(()) => {
                self.star_image.record(true);
                self.point_images.record(true);
                self.eq2.record(true);
            }
        }
        if let Some(r) = &c.lemmas {
            self.eq1.record(r.eq1);
            self.eq3.record(r.eq3);
            self.normalized_frame.record(r.normalized_frame);
            self.eq4.record(r.eq4);
            self.lemma1.record(r.lemma1);
            self.lemma2.record(r.lemma2);
            self.lemma3.record(r.lemma3);
            self.lemma4.record(r.lemma4);
            self.lemma5.record(r.lemma5);
            self.lemma5_hypothesis_met += r.lemma5_hypothesis as u64;
            self.endgame.record(r.endgame);
            self.parity.record(r.parity);
        }
    }

    fn merge(&mut self, o: &LemmaTallies) {
        self.star_image.add(o.star_image);
        self.point_images.add(o.point_images);
        self.eq2.add(o.eq2);
        self.eq1.add(o.eq1);
        self.eq3.add(o.eq3);
        self.normalized_frame.add(o.normalized_frame);
        self.eq4.add(o.eq4);
        self.lemma1.add(o.lemma1);
        self.lemma2.add(o.lemma2);
        self.lemma3.add(o.lemma3);
        self.lemma4.add(o.lemma4);
        self.lemma5.add(o.lemma5);
        self.lemma5_hypothesis_met += o.lemma5_hypothesis_met;
        self.endgame.add(o.endgame);
        self.parity.add(o.parity);
    }

    fn scaled(mut self, factor: u64) -> LemmaTallies {
        for t in [
            &mut self.star_image,
            &mut self.point_images,
            &mut self.eq2,
            &mut self.eq1,
            &mut self.eq3,
            &mut self.normalized_frame,
            &mut self.eq4,
            &mut self.lemma1,
            &mut self.lemma2,
            &mut self.lemma3,
            &mut self.lemma4,
            &mut self.lemma5,
            &mut self.endgame,
            &mut self.parity,
        ] {
            t.pass *= factor;
            t.fail *= factor;
        }
        self.lemma5_hypothesis_met *= factor;
        self
    }

    /// No recorded failure.
    pub fn all_pass(&self) -> bool {
        [
            self.star_image,
            self.point_images,
            self.eq2,
            self.eq1,
            self.eq3,
            self.normalized_frame,
            self.eq4,
            self.lemma1,
            self.lemma2,
            self.lemma3,
            self.lemma4,
            self.lemma5,
            self.endgame,
            self.parity,
        ]
        .iter()
        .all(|t| t.fail == 0)
    }
}

/// Summary of a run over all embeddings. Field order is the output order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    /// Totals are weighted by orbit size under symmetry reduction.
    pub embeddings_total: u64,
    pub extendable: u64,
    pub exceptional: u64,
    pub unclassified: u64,
    pub lemma_chain: LemmaTallies,
    pub complete: bool,
    pub wall_ms: u64,
    pub search_nodes: u64,
    /// Maps actually visited by the search.
    pub enumerated: u64,
    /// Prefix orbit representatives searched; absent for a plain run.
    pub orbit_reps: Option<u64>,
    /// Orbit size of the first prefix edge (1 for a plain run).
    pub edge_orbit: u64,
    /// Enumerated maps failing the independent injectivity/adjacency recheck.
    pub soundness_failures: u64,
    /// Enumerated maps where the group-table verdict differs from the
    /// normalisation verdict; absent when no table was built.
    pub cross_check_mismatches: Option<u64>,
    pub group_order: u64,
    pub distinct_restrictions: Option<u64>,
    pub distinct_g_h: Option<u64>,
    pub h_is_restriction: bool,
    pub witness_multiplicity: WitnessMultiplicity,
    /// `extendable = |G| / identity_kernel` and
    /// `exceptional = |G| / h_stabilizer`: the extendable maps form the
    /// orbit of the identity under `G`, the maps `g∘h` the orbit of `h`.
    pub orbit_counts_consistent: bool,
    pub extendable_witness_unique: bool,
    pub exceptional_witness_unique: bool,
    pub p_upper_n_in_h: bool,
    /// Up to [`MAX_EXAMPLES`] unclassified embeddings, as target IDs.
    pub unclassified_examples: Vec<Vec<u32>>,
}

impl Certificate {
    /// Complete, sound, nothing unclassified, every check passed.
    pub fn conclusive(&self) -> bool {
        self.complete
            && self.unclassified == 0
            && self.soundness_failures == 0
            && self.cross_check_mismatches.unwrap_or(0) == 0
            && self.orbit_counts_consistent
            && self.lemma_chain.all_pass()
    }
}

pub const MAX_EXAMPLES: usize = 8;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub jobs: usize,
    pub budget: Option<Duration>,
    /// Break ties in the assignment order towards high vertex IDs.
    pub reverse_ties: bool,
    /// Also render one witness record per embedding.
    pub witnesses: bool,
    /// Report `wall_ms = 0`.
    pub omit_timing: bool,
    /// Build the full group table (only possible for `n = 4`).
    pub use_table: bool,
    /// 0 enumerates every embedding. `d >= 2` enumerates one representative
    /// per group orbit of images of the first `d` pattern vertices and
    /// weights by orbit size (see [`OrbitPrefixes`]).
    pub orbit_depth: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { jobs: 1, budget: None, reverse_ties: false, witnesses: false, omit_timing: false, use_table: true, orbit_depth: 0 }
    }
}

struct WitnessRecord {
    label: &'static str,
    images: Vec<u32>,
    witness: Option<String>,
}

struct Classifier<'c> {
    ctx: &'c TheoremContext,
    table: Option<&'c GroupTable>,
    dump: bool,
    enumerated: u64,
    total: u64,
    extendable: u64,
    exceptional: u64,
    unclassified: u64,
    soundness_failures: u64,
    mismatches: u64,
    lemmas: LemmaTallies,
    examples: Vec<Vec<u32>>,
    records: Vec<WitnessRecord>,
}

impl<'c> Classifier<'c> {
    fn new(ctx: &'c TheoremContext, table: Option<&'c GroupTable>, dump: bool) -> Self {
        Classifier {
            ctx,
            table,
            dump,
            enumerated: 0,
            total: 0,
            extendable: 0,
            exceptional: 0,
            unclassified: 0,
            soundness_failures: 0,
            mismatches: 0,
            lemmas: LemmaTallies::default(),
            examples: Vec::new(),
            records: Vec::new(),
        }
    }
}

impl Classifier<'_> {
    /// Scales the verdict counts and tallies by an orbit size. Soundness
    /// failures, mismatches and `enumerated` stay raw.
    fn weight(&mut self, w: u64) {
        self.total *= w;
        self.extendable *= w;
        self.exceptional *= w;
        self.unclassified *= w;
        self.lemmas = self.lemmas.scaled(w);
    }
}

impl Visitor for Classifier<'_> {
    fn visit(&mut self, images: &[u32]) {
        self.enumerated += 1;
        self.total += 1;
        if !self.ctx.is_sound(images) {
            self.soundness_failures += 1;
        }
        let c = classify(self.ctx, images);
        self.lemmas.record(&c);
        if let Some(table) = self.table {
            let looked_up = table.lookup(images);
            if std::mem::discriminant(&looked_up) != std::mem::discriminant(&c.verdict) {
                self.mismatches += 1;
            }
        }
        match &c.verdict {
            Verdict::Extendable(_) => self.extendable += 1,
            Verdict::Exceptional(_) => self.exceptional += 1,
            Verdict::Unclassified => {
                self.unclassified += 1;
                if self.examples.len() < MAX_EXAMPLES {
                    self.examples.push(images.to_vec());
                }
            }
        }
        if self.dump {
            self.records.push(WitnessRecord {
                label: c.verdict.label(),
                images: images.to_vec(),
                witness: c.verdict.witness().map(GraphAutomorphism::to_text),
            });
        }
    }

    fn merge(&mut self, mut later: Self) {
        self.enumerated += later.enumerated;
        self.total += later.total;
        self.extendable += later.extendable;
        self.exceptional += later.exceptional;
        self.unclassified += later.unclassified;
        self.soundness_failures += later.soundness_failures;
        self.mismatches += later.mismatches;
        self.lemmas.merge(&later.lemmas);
        let room = MAX_EXAMPLES - self.examples.len();
        self.examples.extend(later.examples.drain(..).take(room));
        self.records.append(&mut later.records);
    }
}

fn render_records(records: &[WitnessRecord]) -> String {
    let mut out = String::new();
    for (idx, r) in records.iter().enumerate() {
        let images: Vec<String> = r.images.iter().map(u32::to_string).collect();
        out.push_str(&format!("# {idx} {}\n{}\n", r.label, images.join(" ")));
        if let Some(w) = &r.witness {
            out.push_str(w);
        }
        out.push('\n');
    }
    out
}

/// Runs the full classification. The witness dump is returned when
/// requested.
pub fn certify_in(ctx: &TheoremContext, opts: &CertifyOptions) -> Result<(Certificate, Option<String>)> {
    let start = Instant::now();
    let n = ctx.n;
    if n > 4 && opts.budget.is_none() {
        return Err(Error::OutOfRange(format!("n = {n} needs an explicit time budget")));
    }
    let jobs = opts.jobs.max(1);
    let table = if opts.use_table && n == 4 { Some(GroupTable::build(ctx)?) } else { None };
    let multiplicity = witness_multiplicity(ctx, jobs)?;
    let search = search(ctx, opts.reverse_ties);
    let prefixes = match opts.orbit_depth {
        0 => None,
        d => Some(orbit_prefixes(ctx, search.order(), d, jobs)?),
    };
    // the budget bounds the embedding search, not the fixed group scans
    let deadline = opts.budget.map(|b| Instant::now() + b);
    let make = || Classifier::new(ctx, table.as_ref(), opts.witnesses);
    let (result, stats, orbit_factor) = match &prefixes {
        None => {
            let (r, s) = search.run(jobs, deadline, make);
            (r, s, 1)
        }
        Some(p) => {
            let mut acc = make();
            let mut stats = SearchStats { complete: true, nodes: 0 };
            for (tuple, weight) in &p.reps {
                let prefix: Vec<(usize, u32)> = p.vertices.iter().copied().zip(tuple.iter().copied()).collect();
                let (mut r, s) = search.run_with_prefix(&prefix, jobs, deadline, make);
                r.weight(*weight);
                acc.merge(r);
                stats.nodes += s.nodes;
                stats.complete &= s.complete;
                if !s.complete {
                    break;
                }
            }
            (acc, stats, p.edge_orbit)
        }
    };
    let group_order = grassmann_aut_group(n, 2, F2)?.order() as u64;
    let p_upper_n = Subspace::span(&[vector(n, ctx.stars[ctx.upper_star[n]].0)])?;
    let h_is_restriction = match &table {
        Some(t) => t.h_is_restriction(ctx),
        None => multiplicity.h_extensions > 0,
    };
    let cert = Certificate {
        n,
        k: 2,
        q: 2,
        embeddings_total: result.total,
        extendable: result.extendable,
        exceptional: result.exceptional,
        unclassified: result.unclassified,
        lemma_chain: result.lemmas,
        complete: stats.complete,
        wall_ms: if opts.omit_timing { 0 } else { start.elapsed().as_millis() as u64 },
        search_nodes: stats.nodes,
        enumerated: result.enumerated,
        orbit_reps: prefixes.as_ref().map(|p| p.reps.len() as u64),
        edge_orbit: orbit_factor,
        soundness_failures: result.soundness_failures,
        cross_check_mismatches: table.as_ref().map(|_| result.mismatches),
        group_order,
        distinct_restrictions: table.as_ref().map(|t| t.distinct_restrictions() as u64),
        distinct_g_h: table.as_ref().map(|t| t.distinct_through_h() as u64),
        h_is_restriction,
        witness_multiplicity: multiplicity,
        orbit_counts_consistent: result.extendable * multiplicity.identity_kernel == group_order
            && result.exceptional * multiplicity.h_stabilizer == group_order,
        extendable_witness_unique: multiplicity.identity_kernel == 1,
        exceptional_witness_unique: multiplicity.h_stabilizer == 1,
        p_upper_n_in_h: ctx.frame.in_h(&p_upper_n),
        unclassified_examples: result.examples,
    };
    let dump = opts.witnesses.then(|| render_records(&result.records));
    Ok((cert, dump))
}

/// [`certify_in`] with a fresh context and default options.
pub fn certify_theorem(n: usize, budget: Option<Duration>, jobs: usize) -> Result<Certificate> {
    let ctx = TheoremContext::new(n)?;
    let opts = CertifyOptions { jobs, budget, ..CertifyOptions::default() };
    Ok(certify_in(&ctx, &opts)?.0)
}
