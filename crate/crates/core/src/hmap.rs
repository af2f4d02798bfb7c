//! The exceptional map `h` on binary `[n,2]` codes.
//!
//! Notation: `Q` is the line of the all-ones vector, `P_I` the line of the
//! indicator vector of `I ⊂ {1..n}` and `P^I = P_{I^c}`. `H` is the
//! hyperplane spanned by `P^1, ..., P^{n-1}`; it is the kernel of the
//! functional `(1, ..., 1, n mod 2)`.
//!
//! The non-degenerate codes split into `A` (codes through `Q`), `B` (codes
//! inside `H`) and `C` (the rest). `h` fixes `A ∪ B` and sends `X ∈ C` with
//! non-`H` lines `P_I, P_J` to `X^c = P^I + P^J`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fqlinalg::{coordinate_hyperplane, enumerate_subspaces, FVector, Field, Subspace};
use crate::grassmann::{is_adjacent, is_nondegenerate, CodeGraph, GraphKind};

const F2: Field = Field::BINARY;

fn indicator(set: &[usize], n: usize) -> Result<FVector> {
    let mut coords = vec![0u32; n];
    for &i in set {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        coords[i - 1] = 1;
    }
    FVector::new(F2, &coords)
}

fn complement(set: &[usize], n: usize) -> Vec<usize> {
    (1..=n).filter(|i| !set.contains(i)).collect()
}

/// One-based support of the spanning vector of a binary point.
pub fn point_support(p: &Subspace) -> Vec<usize> {
    debug_assert!(p.field().is_binary() && p.dim() == 1);
    p.basis().next().unwrap().support().into_iter().map(|i| i + 1).collect()
}

/// `P_I` for a proper non-empty `I ⊂ {1..n}` (one-based).
pub fn p_point(set: &[usize], n: usize) -> Result<Subspace> {
    let v = indicator(set, n)?;
    if v.is_zero() || v == FVector::ones(F2, n) {
        return Err(Error::OutOfRange(format!("index set {set:?} must be proper and non-empty")));
    }
    Subspace::span(&[v])
}

/// `P^I = P_{I^c}`.
pub fn p_upper(set: &[usize], n: usize) -> Result<Subspace> {
    p_point(&complement(set, n), n)
}

/// `Q`, `H` and the functional cutting out `H` for a fixed `n`.
#[derive(Clone, Debug)]
pub struct SpecialFrame {
    n: usize,
    q_line: Subspace,
    hyperplane: Subspace,
    functional: FVector,
}

impl SpecialFrame {
    pub fn new(n: usize) -> Result<SpecialFrame> {
        if !(3..=F2.max_dim()).contains(&n) {
            return Err(Error::OutOfRange(format!("frame needs 3 <= n <= {}, got {n}", F2.max_dim())));
        }
        let q_line = Subspace::span(&[FVector::ones(F2, n)])?;
        let spanning = (1..n).map(|i| indicator(&complement(&[i], n), n)).collect::<Result<Vec<_>>>()?;
        let hyperplane = Subspace::span(&spanning)?;
        let mut coords = vec![1u32; n];
        coords[n - 1] = (n % 2) as u32;
        let functional = FVector::new(F2, &coords)?;
        debug_assert_eq!(hyperplane, Subspace::span(&[functional]).unwrap().perp());
        Ok(SpecialFrame { n, q_line, hyperplane, functional })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The line `Q`.
    pub fn q(&self) -> &Subspace {
        &self.q_line
    }

    /// The hyperplane `H`.
    pub fn h(&self) -> &Subspace {
        &self.hyperplane
    }

    pub fn functional(&self) -> FVector {
        self.functional
    }

    pub fn in_h(&self, x: &Subspace) -> bool {
        self.hyperplane.contains(x)
    }

    /// `Q ⊄ H`, and exactly one of `P_I`, `P^I` lies in `H` for every
    /// proper non-empty `I`.
    pub fn check_invariants(&self) -> bool {
        if self.in_h(&self.q_line) {
            return false;
        }
        let n = self.n;
        (1u32..(1 << n) - 1).all(|mask| {
            let set: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            let lower = self.in_h(&p_point(&set, n).unwrap());
            let upper = self.in_h(&p_upper(&set, n).unwrap());
            lower != upper
        })
    }
}

/// Vertex IDs of a binary `[n,2]` code graph split into `A`, `B`, `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbcPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

fn check_code_graph(g: &CodeGraph) -> Result<()> {
    if g.kind() != GraphKind::NonDegenerate || g.k() != 2 || !g.field().is_binary() {
        return Err(Error::WrongGraph(format!(
            "expected the graph of non-degenerate binary [n,2] codes, got ({}, {}, {}, {})",
            g.n(),
            g.k(),
            g.field().q(),
            g.kind()
        )));
    }
    Ok(())
}

pub fn abc_partition(g: &CodeGraph) -> Result<AbcPartition> {
    check_code_graph(g)?;
    let frame = SpecialFrame::new(g.n())?;
    let mut part = AbcPartition { a: Vec::new(), b: Vec::new(), c: Vec::new() };
    for (id, x) in g.vertices().iter().enumerate() {
        if x.contains(frame.q()) {
            part.a.push(id);
        } else if frame.in_h(x) {
            part.b.push(id);
        } else {
            part.c.push(id);
        }
    }
    Ok(part)
}

/// Three-line description of `X ∈ C`: `X ∩ H` and the index sets of the
/// two lines outside `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CDecomposition {
    pub in_h: Subspace,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl CDecomposition {
    pub fn meet(&self) -> Vec<usize> {
        self.i.iter().copied().filter(|x| self.j.contains(x)).collect()
    }
}

/// Decides membership in `C` from the lines of `X`: none is `Q`, one lies
/// in `H`, and the other two are `P_I`, `P_J` with `I ∪ J = {1..n}` and
/// `I ∩ J ≠ ∅`.
pub fn c_decomposition(frame: &SpecialFrame, x: &Subspace) -> Option<CDecomposition> {
    let n = frame.n();
    if x.dim() != 2 || x.ambient_dim() != n || !x.field().is_binary() {
        return None;
    }
    let points = x.points();
    if points.contains(frame.q()) {
        return None;
    }
    let (inside, outside): (Vec<_>, Vec<_>) = points.into_iter().partition(|p| frame.in_h(p));
    if inside.len() != 1 || outside.len() != 2 {
        return None;
    }
    let i = point_support(&outside[0]);
    let j = point_support(&outside[1]);
    let union_full = (1..=n).all(|t| i.contains(&t) || j.contains(&t));
    let meets = i.iter().any(|t| j.contains(t));
    (union_full && meets).then(|| CDecomposition { in_h: inside[0].clone(), i, j })
}

/// `Q ⊄ X` and `X ⊄ H`.
fn in_c_by_sets(frame: &SpecialFrame, x: &Subspace) -> bool {
    !x.contains(frame.q()) && !frame.in_h(x)
}

fn in_c(frame: &SpecialFrame, x: &Subspace) -> Result<Option<CDecomposition>> {
    let structural = c_decomposition(frame, x);
    if structural.is_some() != in_c_by_sets(frame, x) {
        return Err(Error::NotInClass(format!(
            "structural and set-theoretic membership in C disagree on\n{x}"
        )));
    }
    Ok(structural)
}

/// `X^c` for `X ∈ C`, with its defining properties checked.
pub fn complement_code(x: &Subspace) -> Result<Subspace> {
    if !x.field().is_binary() || x.dim() != 2 || !is_nondegenerate(x) {
        return Err(Error::NotInClass(format!("not a non-degenerate binary [n,2] code:\n{x}")));
    }
    let n = x.ambient_dim();
    let frame = SpecialFrame::new(n)?;
    let d = in_c(&frame, x)?.ok_or_else(|| Error::NotInClass(format!("not in C:\n{x}")))?;
    let xc = p_upper(&d.i, n)?.sum(&p_upper(&d.j, n)?)?;
    let meet = p_upper(&d.meet(), n)?;
    let ok = xc.dim() == 2 && frame.in_h(&xc) && !is_nondegenerate(&xc) && x.intersect(&xc)? == meet;
    if !ok || d.in_h != meet {
        return Err(Error::NotInClass(format!("complement construction failed for\n{x}")));
    }
    Ok(xc)
}

/// `h(X)`: the identity on `A ∪ B`, `X ↦ X^c` on `C`.
pub fn h_map(x: &Subspace) -> Result<Subspace> {
    if !x.field().is_binary() || x.dim() != 2 || !is_nondegenerate(x) {
        return Err(Error::NotInClass(format!("h is defined on non-degenerate binary [n,2] codes:\n{x}")));
    }
    let frame = SpecialFrame::new(x.ambient_dim())?;
    match in_c(&frame, x)? {
        Some(_) => complement_code(x),
        None => Ok(x.clone()),
    }
}

/// The point map inducing `h`: fixes `Q` and every point of `H`, and sends
/// `P_I ⊄ H` to `P^I`.
pub fn projective_morphism(p: &Subspace) -> Result<Subspace> {
    if !p.field().is_binary() || p.dim() != 1 {
        return Err(Error::DimensionMismatch(format!("expected a binary point, got\n{p}")));
    }
    let n = p.ambient_dim();
    let frame = SpecialFrame::new(n)?;
    if p == frame.q() || frame.in_h(p) {
        return Ok(p.clone());
    }
    let v = p.basis().next().unwrap();
    Subspace::span(&[v.add(&FVector::ones(F2, n))])
}

/// Outcome of the exhaustive check of `h` at one `n`.
#[derive(Clone, Debug, Serialize)]
pub struct HReport {
    pub n: usize,
    pub vertices: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub frame_invariants: bool,
    /// Membership in `C` agrees between both tests, `X ∩ H = P^{I∩J}`,
    /// `X^c ⊂ C_i` for `i ∈ I∩J`, and `h(X) ≠ X`.
    pub c_invariants: bool,
    pub injective: bool,
    pub preserves_adjacency: bool,
    /// Non-adjacent `X, Y` with `h(X)`, `h(Y)` adjacent.
    pub one_direction_witness: Option<[String; 2]>,
    pub c_images_degenerate: bool,
    pub morphism_lines_to_lines: bool,
    /// `P_I ⊄ H`, `P^I` and their common image.
    pub morphism_non_injective_witness: Option<[String; 3]>,
    pub morphism_induces_h: bool,
}

impl HReport {
    pub fn all_pass(&self) -> bool {
        self.frame_invariants
            && self.c_invariants
            && self.injective
            && self.preserves_adjacency
            && self.one_direction_witness.is_some()
            && self.c_images_degenerate
            && self.morphism_lines_to_lines
            && self.morphism_non_injective_witness.is_some()
            && self.morphism_induces_h
    }
}

/// Largest `n` accepted by [`verify_h`].
pub const MAX_VERIFY_H_DIM: usize = 10;

/// Adjacency of two distinct binary 2-spaces given by their three points.
fn share_one_point(x: &[u64; 3], y: &[u64; 3]) -> bool {
    x.iter().filter(|p| y.contains(p)).count() == 1
}

fn point_words(x: &Subspace) -> [u64; 3] {
    let r = x.packed_rows();
    let mut w = [r[0], r[1], r[0] ^ r[1]];
    w.sort_unstable();
    w
}

/// Exhaustively checks the properties of `h` on `C(n,2)_2`.
pub fn verify_h(n: usize) -> Result<HReport> {
    if !(4..=MAX_VERIFY_H_DIM).contains(&n) {
        return Err(Error::OutOfRange(format!("verify_h needs 4 <= n <= {MAX_VERIFY_H_DIM}")));
    }
    verify_h_on(&crate::grassmann::build_graph(n, 2, F2, GraphKind::NonDegenerate)?)
}

/// [`verify_h`] on an already built code graph. Adjacency of the domain
/// is read from `g`; adjacency of images is recomputed from subspaces.
pub fn verify_h_on(g: &CodeGraph) -> Result<HReport> {
    check_code_graph(g)?;
    let n = g.n();
    if !(4..=MAX_VERIFY_H_DIM).contains(&n) {
        return Err(Error::OutOfRange(format!("verify_h needs 4 <= n <= {MAX_VERIFY_H_DIM}")));
    }
    let frame = SpecialFrame::new(n)?;
    let part = abc_partition(g)?;
    let vertices = g.vertices();

    let c_invariants = part.c.par_iter().all(|&id| {
        let x = &vertices[id];
        let Ok(Some(d)) = in_c(&frame, x) else { return false };
        let meet = d.meet();
        let Ok(xc) = complement_code(x) else { return false };
        let meet_point = p_upper(&meet, n).unwrap();
        x.intersect(frame.h()).unwrap() == meet_point
            && meet.iter().all(|&i| coordinate_hyperplane(i, n, F2).unwrap().contains(&xc))
            && xc != *x
    }) && part.a.iter().chain(&part.b).all(|&id| matches!(in_c(&frame, &vertices[id]), Ok(None)));

    let images = vertices.par_iter().map(h_map).collect::<Result<Vec<_>>>()?;
    let image_words: Vec<[u64; 3]> = images.iter().map(point_words).collect();

    let mut sorted = image_words.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let injective = sorted.len() == images.len();

    let count = vertices.len();
    // (first adjacency violation, first one-direction witness) per row
    let scan: Vec<(bool, Option<usize>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut preserved = true;
            let mut witness = None;
            for j in i + 1..count {
                let adj = g.has_edge(i, j);
                let adj_img = share_one_point(&image_words[i], &image_words[j]);
                if adj && !adj_img {
                    preserved = false;
                }
                if !adj && adj_img && witness.is_none() {
                    witness = Some(j);
                }
            }
            (preserved, witness)
        })
        .collect();
    let preserves_adjacency = scan.iter().all(|s| s.0);
    let one_direction_witness = scan.iter().enumerate().find_map(|(i, s)| {
        s.1.map(|j| [vertices[i].to_string(), vertices[j].to_string()])
    });
    if let Some(pair) = &one_direction_witness {
        debug_assert!({
            let x = Subspace::parse(F2, &pair[0]).unwrap();
            let y = Subspace::parse(F2, &pair[1]).unwrap();
            !is_adjacent(&x, &y).unwrap() && is_adjacent(&h_map(&x).unwrap(), &h_map(&y).unwrap()).unwrap()
        });
    }

    let c_images_degenerate = part.c.iter().all(|&id| !is_nondegenerate(&images[id]));

    let lines = enumerate_subspaces(n, 2, F2)?;
    let morphism_lines_to_lines = lines.par_iter().all(|w| {
        let imgs: Vec<FVector> = w
            .points()
            .iter()
            .map(|p| projective_morphism(p).unwrap().basis().next().unwrap())
            .collect();
        Subspace::span(&imgs).map(|s| s.dim() <= 2).unwrap_or(false)
    });

    let morphism_non_injective_witness = enumerate_subspaces(n, 1, F2)?.into_iter().find_map(|p| {
        if p == *frame.q() || frame.in_h(&p) {
            return None;
        }
        let upper = p_upper(&point_support(&p), n).unwrap();
        let a = projective_morphism(&p).unwrap();
        let b = projective_morphism(&upper).unwrap();
        (a == b && a == upper).then(|| [p.to_string(), upper.to_string(), a.to_string()])
    });

    let morphism_induces_h = vertices.par_iter().zip(&images).all(|(x, hx)| {
        let imgs: Vec<FVector> = x
            .points()
            .iter()
            .map(|p| projective_morphism(p).unwrap().basis().next().unwrap())
            .collect();
        Subspace::span(&imgs).map(|s| s == *hx).unwrap_or(false)
    });

    Ok(HReport {
        n,
        vertices: count,
        a: part.a.len(),
        b: part.b.len(),
        c: part.c.len(),
        frame_invariants: frame.check_invariants(),
        c_invariants,
        injective,
        preserves_adjacency,
        one_direction_witness,
        c_images_degenerate,
        morphism_lines_to_lines,
        morphism_non_injective_witness,
        morphism_induces_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::build_graph;

    fn sp(rows: &[&str]) -> Subspace {
        Subspace::span(&rows.iter().map(|r| FVector::parse(F2, r).unwrap()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn points() {
        assert_eq!(p_point(&[1, 4], 4).unwrap(), sp(&["1001"]));
        assert_eq!(p_upper(&[1], 4).unwrap(), sp(&["0111"]));
        assert_eq!(p_point(&[2, 3], 4).unwrap(), p_upper(&[1, 4], 4).unwrap());
        assert!(p_point(&[], 4).is_err());
        assert!(p_point(&[1, 2, 3, 4], 4).is_err());
        assert!(p_point(&[5], 4).is_err());
    }

    #[test]
    fn frame_and_parity() {
        for n in 3..=9 {
            let f = SpecialFrame::new(n).unwrap();
            assert!(f.check_invariants());
            assert_eq!(f.h().dim(), n - 1);
            // P^n lies in H exactly for odd n
            let upper_n = p_upper(&[n], n).unwrap();
            assert_eq!(f.in_h(&upper_n), n % 2 == 1, "n={n}");
        }
        let f = SpecialFrame::new(4).unwrap();
        assert!(!f.in_h(&sp(&["1110"])));
        assert!(f.in_h(&sp(&["0001"])));
    }

    #[test]
    fn complement_examples() {
        for i in 1..=3 {
            let x = p_upper(&[i], 4).unwrap().sum(&p_upper(&[4], 4).unwrap()).unwrap();
            let expected = p_upper(&[i], 4).unwrap().sum(&p_point(&[4], 4).unwrap()).unwrap();
            assert_eq!(complement_code(&x).unwrap(), expected);
            assert_eq!(h_map(&x).unwrap(), expected);
            assert!(x.contains(&p_point(&[i, 4], 4).unwrap()));
            assert!(expected.contains(&p_upper(&[i, 4], 4).unwrap()));
        }
        assert!(complement_code(&sp(&["1111", "0111"])).is_err());
    }

    #[test]
    fn h_fixes_a_and_b() {
        let q_p1 = sp(&["1111", "0111"]);
        assert_eq!(h_map(&q_p1).unwrap(), q_p1);
        let p1_p2 = sp(&["0111", "1011"]);
        assert_eq!(h_map(&p1_p2).unwrap(), p1_p2);
        assert!(h_map(&sp(&["1000", "0100"])).is_err());
    }

    #[test]
    fn morphism_examples() {
        let q = sp(&["1111"]);
        assert_eq!(projective_morphism(&q).unwrap(), q);
        assert_eq!(projective_morphism(&sp(&["0111"])).unwrap(), sp(&["0111"]));
        assert_eq!(projective_morphism(&p_point(&[1, 4], 4).unwrap()).unwrap(), p_point(&[2, 3], 4).unwrap());
    }

    #[test]
    fn partition_sizes() {
        let g = build_graph(4, 2, F2, GraphKind::NonDegenerate).unwrap();
        let p = abc_partition(&g).unwrap();
        assert_eq!((p.a.len(), p.b.len(), p.c.len()), (7, 3, 3));
        let full = build_graph(4, 2, F2, GraphKind::FullGrassmann).unwrap();
        assert!(abc_partition(&full).is_err());
    }

    #[test]
    fn verify_h_small() {
        for n in 4..=6 {
            let r = verify_h(n).unwrap();
            assert!(r.all_pass(), "{r:?}");
            assert_eq!(r.a + r.b + r.c, r.vertices);
            assert_eq!(r.a, (1 << (n - 1)) - 1);
        }
    }
}
