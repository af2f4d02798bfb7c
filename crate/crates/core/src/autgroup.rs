//! Automorphisms of Grassmann graphs induced by linear maps, optionally
//! composed with the orthocomplementary map.
//!
//! Vectors are rows and a [`LinearMap`] acts on the right: `x -> x M`, so
//! row `i` of `M` is the image of `e_i`. Over a prime field every
//! semilinear map is linear, which is why no field automorphism appears
//! here.
//!
//! Composition with the orthocomplement uses `(Y^⊥) M = (Y M^{-T})^⊥`, so
//! `(A, da) ∘ (B, db) = (B · A', da xor db)` with `A' = A^{-T}` when `db`
//! is set and `A' = A` otherwise.

use std::fmt;

use crate::error::{Error, Result};
use crate::fqlinalg::{reduce, FVector, Field, Subspace};
use crate::grassmann::CodeGraph;
use crate::search::{Collect, MapSearch};

/// An `n × n` matrix over `F_q` acting on row vectors from the right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearMap {
    field: Field,
    n: usize,
    rows: Vec<u64>,
}

impl LinearMap {
    pub fn new(field: Field, rows: &[FVector]) -> Result<LinearMap> {
        let n = rows.len();
        field.check_dim(n)?;
        if rows.iter().any(|r| r.field() != field || r.dim() != n) {
            return Err(Error::DimensionMismatch("matrix rows must be vectors of F_q^n".into()));
        }
        let map = LinearMap { field, n, rows: rows.iter().map(FVector::packed).collect() };
        if !map.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(map)
    }

    pub(crate) fn from_packed(field: Field, n: usize, rows: Vec<u64>) -> LinearMap {
        LinearMap { field, n, rows }
    }

    pub fn identity(field: Field, n: usize) -> LinearMap {
        LinearMap { field, n, rows: (0..n).map(|i| field.set(0, n, i, 1)).collect() }
    }

    /// Sends `e_i` to `e_{perm[i]}` (zero-based).
    pub fn permutation(field: Field, perm: &[usize]) -> Result<LinearMap> {
        let n = perm.len();
        let rows: Vec<FVector> = perm
            .iter()
            .map(|&j| FVector::unit(field, n, j + 1))
            .collect::<Result<_>>()?;
        LinearMap::new(field, &rows)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> impl Iterator<Item = FVector> + '_ {
        self.rows.iter().map(|&r| FVector::from_packed(self.field, self.n, r))
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.field.get(self.rows[i], self.n, j) as u32
    }

    pub fn is_invertible(&self) -> bool {
        reduce(self.field, self.n, self.rows.clone()).len() == self.n
    }

    #[inline]
    pub(crate) fn apply_packed(&self, x: u64) -> u64 {
        let n = self.n;
        if self.field.is_binary() {
            let mut out = 0;
            for (i, &row) in self.rows.iter().enumerate() {
                if x >> (n - 1 - i) & 1 == 1 {
                    out ^= row;
                }
            }
            return out;
        }
        self.rows.iter().enumerate().fold(0, |acc, (i, &row)| {
            self.field.axpy_packed(acc, self.field.get(x, n, i), row, n)
        })
    }

    pub fn apply_vector(&self, x: &FVector) -> FVector {
        FVector::from_packed(self.field, self.n, self.apply_packed(x.packed()))
    }

    /// `{ x M : x ∈ X }`.
    pub fn image(&self, x: &Subspace) -> Subspace {
        let rows = x.packed_rows().iter().map(|&r| self.apply_packed(r)).collect();
        Subspace::from_packed(self.field, self.n, rows)
    }

    /// `x -> next(self(x))`, i.e. the matrix product `self · next`.
    pub fn then(&self, next: &LinearMap) -> LinearMap {
        LinearMap {
            rows: self.rows.iter().map(|&r| next.apply_packed(r)).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> LinearMap {
        let n = self.n;
        let mut rows = vec![0; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..n {
                *row = self.field.set(*row, n, j, self.field.get(self.rows[j], n, i));
            }
        }
        LinearMap { rows, ..self.clone() }
    }

    /// Gauss-Jordan on `[M | I]`.
    pub fn inverse(&self) -> Result<LinearMap> {
        let n = self.n;
        let shift = self.field.high_shift(n);
        let id = LinearMap::identity(self.field, n);
        let block = self.rows.iter().zip(&id.rows).map(|(&m, &e)| (m << shift) | e).collect();
        let reduced = reduce(self.field, 2 * n, block);
        if reduced.len() < n || reduced.iter().any(|&r| r >> shift == 0) {
            return Err(Error::Singular);
        }
        let low = self.field.full_mask(n);
        Ok(LinearMap { rows: reduced.iter().map(|&r| r & low).collect(), ..self.clone() })
    }

    pub fn is_identity(&self) -> bool {
        *self == LinearMap::identity(self.field, self.n)
    }
}

/// An automorphism of `Γ_k(V)`: a linear map, followed by the
/// orthocomplement when `dual` is set (only for `n = 2k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphAutomorphism {
    map: LinearMap,
    dual: bool,
    k: usize,
}

impl GraphAutomorphism {
    pub fn new(map: LinearMap, dual: bool, k: usize) -> Result<GraphAutomorphism> {
        if !map.is_invertible() {
            return Err(Error::Singular);
        }
        if dual && 2 * k != map.n {
            return Err(Error::DualNotAllowed { n: map.n, k });
        }
        Ok(GraphAutomorphism { map, dual, k })
    }

    pub fn identity(field: Field, n: usize, k: usize) -> GraphAutomorphism {
        GraphAutomorphism { map: LinearMap::identity(field, n), dual: false, k }
    }

    pub fn linear(map: LinearMap, k: usize) -> GraphAutomorphism {
        GraphAutomorphism { map, dual: false, k }
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn apply(&self, x: &Subspace) -> Result<Subspace> {
        if x.field() != self.map.field || x.ambient_dim() != self.map.n || x.dim() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "automorphism of G_{}(F^{}) applied to a {}-subspace of F^{}",
                self.k,
                self.map.n,
                x.dim(),
                x.ambient_dim()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, x: &Subspace) -> Subspace {
        let image = self.map.image(x);
        if self.dual {
            image.perp()
        } else {
            image
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GraphAutomorphism) -> GraphAutomorphism {
        let outer = if other.dual {
            self.map.inverse().expect("invertible").transpose()
        } else {
            self.map.clone()
        };
        GraphAutomorphism { map: other.map.then(&outer), dual: self.dual ^ other.dual, k: self.k }
    }

    pub fn inverse(&self) -> GraphAutomorphism {
        let map = if self.dual {
            self.map.transpose()
        } else {
            self.map.inverse().expect("invertible")
        };
        GraphAutomorphism { map, ..self.clone() }
    }

    /// Permutation of the vertices of `g` induced by this automorphism, or
    /// `None` if some vertex leaves the vertex set.
    pub fn vertex_permutation(&self, g: &CodeGraph) -> Option<Vec<u32>> {
        g.vertices()
            .iter()
            .map(|x| g.id_of(&self.apply_unchecked(x)).map(|i| i as u32))
            .collect()
    }

    /// Two automorphisms are equal when they act identically on `vertices`.
    pub fn same_action(&self, other: &GraphAutomorphism, vertices: &[Subspace]) -> bool {
        vertices.iter().all(|x| self.apply_unchecked(x) == other.apply_unchecked(x))
    }

    /// `n` digit-string rows followed by a line holding the dual bit.
    pub fn to_text(&self) -> String {
        let mut out: String = self.map.rows().map(|r| format!("{r}\n")).collect();
        out.push_str(if self.dual { "1\n" } else { "0\n" });
        out
    }

    pub fn parse(field: Field, k: usize, text: &str) -> Result<GraphAutomorphism> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let (flag, rows) = lines
            .split_last()
            .ok_or_else(|| Error::Parse("empty automorphism".into()))?;
        let dual = match *flag {
            "0" => false,
            "1" => true,
            other => return Err(Error::Parse(format!("dual bit must be 0 or 1, got {other:?}"))),
        };
        let rows = rows.iter().map(|r| FVector::parse(field, r)).collect::<Result<Vec<_>>>()?;
        GraphAutomorphism::new(LinearMap::new(field, &rows)?, dual, k)
    }
}

impl fmt::Display for GraphAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `|GL(n, q)|`.
pub fn gl_order(n: u32, q: u32) -> u128 {
    let qn = (q as u128).pow(n);
    (0..n).map(|i| qn - (q as u128).pow(i)).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// `PGL(n, q)`, doubled by the orthocomplement when `n = 2k`.
    Grassmann,
    /// Monomial matrices modulo scalars.
    Monomial,
}

/// A handle on a generated automorphism group: order and element streaming.
#[derive(Clone, Debug)]
pub struct AutGroup {
    n: usize,
    k: usize,
    field: Field,
    kind: GroupKind,
}

/// Largest group that [`AutGroup::elements`] will materialise.
pub const MAX_MATERIALISED: u128 = 100_000;

/// Largest group that [`AutGroup::iter`] will stream.
pub const MAX_STREAMED: u128 = 50_000_000;

pub fn grassmann_aut_group(n: usize, k: usize, field: Field) -> Result<AutGroup> {
    field.check_dim(n)?;
    if k == 0 || k >= n {
        return Err(Error::OutOfRange(format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    Ok(AutGroup { n, k, field, kind: GroupKind::Grassmann })
}

pub fn code_graph_aut_group(n: usize, k: usize, field: Field) -> Result<AutGroup> {
    field.check_dim(n)?;
    if k <= 1 || k + 1 >= n {
        return Err(Error::OutOfRange(format!("need 1 < k < n-1, got n = {n}, k = {k}")));
    }
    Ok(AutGroup { n, k, field, kind: GroupKind::Monomial })
}

impl AutGroup {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dual_allowed(&self) -> bool {
        self.kind == GroupKind::Grassmann && 2 * self.k == self.n
    }

    pub fn order(&self) -> u128 {
        let q = self.field.q();
        match self.kind {
            GroupKind::Grassmann => {
                let pgl = gl_order(self.n as u32, q) / (q as u128 - 1);
                if self.dual_allowed() {
                    2 * pgl
                } else {
                    pgl
                }
            }
            GroupKind::Monomial => {
                let fact: u128 = (1..=self.n as u128).product();
                fact * (q as u128 - 1).pow(self.n as u32 - 1)
            }
        }
    }

    /// Streams one representative per group element.
    pub fn iter(&self) -> Result<Box<dyn Iterator<Item = GraphAutomorphism> + Send + '_>> {
        if self.order() > MAX_STREAMED {
            return Err(Error::OutOfRange(format!("group of order {} is too large", self.order())));
        }
        let k = self.k;
        let duals: &'static [bool] = if self.dual_allowed() { &[false, true] } else { &[false] };
        let maps: Box<dyn Iterator<Item = LinearMap> + Send> = match self.kind {
            GroupKind::Grassmann => Box::new(ProjectiveMatrices::new(self.field, self.n, None)),
            GroupKind::Monomial => Box::new(monomial_matrices(self.field, self.n)),
        };
        Ok(Box::new(maps.flat_map(move |m| {
            duals.iter().map(move |&dual| GraphAutomorphism { map: m.clone(), dual, k })
        })))
    }

    /// Disjoint streams covering the group, split by the image of `e_1`.
    /// Only available for the Grassmann kind.
    pub fn partition(&self) -> Result<Vec<Box<dyn Iterator<Item = GraphAutomorphism> + Send + '_>>> {
        if self.kind != GroupKind::Grassmann {
            return Err(Error::OutOfRange("partitioning is only provided for PGL".into()));
        }
        let k = self.k;
        let dual = self.dual_allowed();
        let firsts = ProjectiveMatrices::first_rows(self.field, self.n);
        Ok(firsts
            .into_iter()
            .map(|first| {
                let it = ProjectiveMatrices::new(self.field, self.n, Some(first)).flat_map(move |m| {
                    let both: &'static [bool] = if dual { &[false, true] } else { &[false] };
                    both.iter().map(move |&d| GraphAutomorphism { map: m.clone(), dual: d, k })
                });
                Box::new(it) as Box<dyn Iterator<Item = GraphAutomorphism> + Send>
            })
            .collect())
    }

    /// All elements, for small groups only.
    pub fn elements(&self) -> Result<Vec<GraphAutomorphism>> {
        if self.order() > MAX_MATERIALISED {
            return Err(Error::OutOfRange(format!(
                "group of order {} is streamed, not materialised",
                self.order()
            )));
        }
        Ok(self.iter()?.collect())
    }
}

/// Packed word of the `idx`-th vector of `F_q^n` in counting order.
fn word_of_index(field: Field, n: usize, mut idx: u64) -> u64 {
    if field.is_binary() {
        return idx;
    }
    let q = field.q() as u64;
    let mut word = 0;
    for pos in (0..n).rev() {
        word = field.set(word, n, pos, (idx % q) as u8);
        idx /= q;
    }
    word
}

/// Invertible matrices whose first row has leading coefficient 1: one
/// representative per scalar class.
struct ProjectiveMatrices {
    field: Field,
    n: usize,
    total: u64,
    /// Next candidate index per row.
    cursor: Vec<u64>,
    rows: Vec<u64>,
    fixed_first: bool,
    started: bool,
    done: bool,
}

impl ProjectiveMatrices {
    fn new(field: Field, n: usize, first: Option<u64>) -> Self {
        let total = (field.q() as u64).pow(n as u32);
        let mut it = ProjectiveMatrices {
            field,
            n,
            total,
            cursor: vec![0; n],
            rows: Vec::with_capacity(n),
            fixed_first: first.is_some(),
            started: false,
            done: false,
        };
        if let Some(w) = first {
            it.rows.push(w);
        }
        it
    }

    fn first_rows(field: Field, n: usize) -> Vec<u64> {
        let total = (field.q() as u64).pow(n as u32);
        (1..total)
            .map(|i| word_of_index(field, n, i))
            .filter(|&w| Self::leading_is_one(field, n, w))
            .collect()
    }

    fn leading_is_one(field: Field, n: usize, w: u64) -> bool {
        (0..n).map(|i| field.get(w, n, i)).find(|&c| c != 0) == Some(1)
    }

    fn valid(&self, w: u64) -> bool {
        if w == 0 {
            return false;
        }
        if self.rows.is_empty() {
            return Self::leading_is_one(self.field, self.n, w);
        }
        let mut rows = self.rows.clone();
        rows.push(w);
        reduce(self.field, self.n, rows).len() == self.rows.len() + 1
    }

    /// Pushes rows until the matrix is complete or the current level runs
    /// dry (then backtracks). Returns false when exhausted.
    fn advance(&mut self) -> bool {
        let floor = usize::from(self.fixed_first);
        loop {
            let level = self.rows.len();
            if level == self.n {
                return true;
            }
            let mut found = None;
            while self.cursor[level] < self.total {
                let w = word_of_index(self.field, self.n, self.cursor[level]);
                self.cursor[level] += 1;
                if self.valid(w) {
                    found = Some(w);
                    break;
                }
            }
            match found {
                Some(w) => {
                    self.rows.push(w);
                    if level + 1 < self.n {
                        self.cursor[level + 1] = 0;
                    }
                }
                None => {
                    if level == floor {
                        return false;
                    }
                    self.rows.pop();
                }
            }
        }
    }
}

impl Iterator for ProjectiveMatrices {
    type Item = LinearMap;

    fn next(&mut self) -> Option<LinearMap> {
        if self.done {
            return None;
        }
        if self.started {
            self.rows.pop();
        }
        self.started = true;
        if !self.advance() {
            self.done = true;
            return None;
        }
        Some(LinearMap::from_packed(self.field, self.n, self.rows.clone()))
    }
}

/// Permutations in lexicographic order combined with diagonals whose first
/// entry is 1.
fn monomial_matrices(field: Field, n: usize) -> impl Iterator<Item = LinearMap> + Send {
    let mut perms = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        perms.push(perm.clone());
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let q = field.q() as u64;
    let diagonals = (q - 1).pow(n as u32 - 1);
    perms.into_iter().flat_map(move |p| {
        (0..diagonals).map(move |mut d| {
            let rows = p
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    let scale = if i == 0 {
                        1
                    } else {
                        let s = (d % (q - 1)) as u8 + 1;
                        d /= q - 1;
                        s
                    };
                    field.set(0, n, j, scale)
                })
                .collect();
            LinearMap::from_packed(field, n, rows)
        })
    })
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every automorphism of `g` found by direct backtracking, as vertex
/// permutations in search order.
pub fn graph_automorphisms(g: &CodeGraph, jobs: usize) -> Vec<Vec<u32>> {
    let search = MapSearch::with_greedy_order(g.adjacency(), g.adjacency(), true);
    search.run(jobs, None, Collect::default).0 .0
}

/// `|Aut(g)|` by direct backtracking.
pub fn count_graph_automorphisms(g: &CodeGraph, jobs: usize) -> u64 {
    MapSearch::with_greedy_order(g.adjacency(), g.adjacency(), true).count(jobs)
}
