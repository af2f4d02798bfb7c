//! Linear algebra over a small prime field `F_q`.
//!
//! Vectors are packed into a single `u64`. Over `F_2` each coordinate takes
//! one bit and row operations are XOR; for odd `q` each coordinate takes a
//! four-bit lane. In both cases coordinate 1 sits in the most significant
//! occupied lane, so comparing packed words compares digit strings
//! lexicographically.
//!
//! A [`Subspace`] is stored by its reduced row echelon basis, which makes
//! equality, hashing and ordering purely structural.

use std::fmt;

use crate::error::{Error, Result};

/// Largest ambient dimension over `F_2`.
pub const MAX_BINARY_DIM: usize = 16;

/// Over odd fields the ambient space may hold at most this many vectors
/// (`3^8`).
pub const MAX_ODD_VECTORS: u64 = 6561;

/// Enumerations larger than this are refused.
pub const MAX_ENUMERATION: u128 = 1 << 22;

/// A prime field `F_q` with `q < 16`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    q: u8,
}

impl Field {
    pub const BINARY: Field = Field { q: 2 };

    pub fn new(q: u32) -> Result<Field> {
        if !(2..16).contains(&q) || !(2..q).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d)) {
            return Err(Error::NotPrime(q));
        }
        Ok(Field { q: q as u8 })
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.q as u32
    }

    #[inline]
    pub fn is_binary(self) -> bool {
        self.q == 2
    }

    /// Bits per packed coordinate.
    #[inline]
    fn lane(self) -> u32 {
        if self.is_binary() {
            1
        } else {
            4
        }
    }

    /// Largest ambient dimension supported for this field.
    pub fn max_dim(self) -> usize {
        if self.is_binary() {
            return MAX_BINARY_DIM;
        }
        let mut n = 0;
        let mut size = 1u64;
        while size * self.q as u64 <= MAX_ODD_VECTORS {
            size *= self.q as u64;
            n += 1;
        }
        n
    }

    pub fn check_dim(self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_dim() {
            return Err(Error::OutOfRange(format!(
                "n = {n} (supported 1..={} for q = {})",
                self.max_dim(),
                self.q
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        (a + b) % self.q
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        (self.q - a) % self.q
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.q as u16) as u8
    }

    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(!a.is_multiple_of(self.q));
        (1..self.q).find(|&b| self.mul(a, b) == 1).unwrap()
    }

    // Packed helpers. `width` is the number of coordinates in the word.

    #[inline]
    pub(crate) fn get(self, word: u64, width: usize, idx: usize) -> u8 {
        let lane = self.lane();
        let shift = (width - 1 - idx) as u32 * lane;
        ((word >> shift) & ((1 << lane) - 1)) as u8
    }

    #[inline]
    pub(crate) fn set(self, word: u64, width: usize, idx: usize, value: u8) -> u64 {
        let lane = self.lane();
        let shift = (width - 1 - idx) as u32 * lane;
        let mask = ((1u64 << lane) - 1) << shift;
        (word & !mask) | ((value as u64) << shift)
    }

    #[inline]
    pub(crate) fn add_packed(self, a: u64, b: u64, width: usize) -> u64 {
        if self.is_binary() {
            return a ^ b;
        }
        let mut out = 0;
        for idx in 0..width {
            out = self.set(out, width, idx, self.add(self.get(a, width, idx), self.get(b, width, idx)));
        }
        out
    }

    #[inline]
    pub(crate) fn scale_packed(self, a: u64, c: u8, width: usize) -> u64 {
        if self.is_binary() {
            return if c & 1 == 1 { a } else { 0 };
        }
        let mut out = 0;
        for idx in 0..width {
            out = self.set(out, width, idx, self.mul(self.get(a, width, idx), c));
        }
        out
    }

    /// `a + c * b`.
    #[inline]
    pub(crate) fn axpy_packed(self, a: u64, c: u8, b: u64, width: usize) -> u64 {
        self.add_packed(a, self.scale_packed(b, c, width), width)
    }

    pub(crate) fn dot_packed(self, a: u64, b: u64, width: usize) -> u8 {
        if self.is_binary() {
            return ((a & b).count_ones() & 1) as u8;
        }
        (0..width).fold(0, |acc, i| {
            self.add(acc, self.mul(self.get(a, width, i), self.get(b, width, i)))
        })
    }

    /// Shift that places a `width`-coordinate word in the high part of a
    /// word twice as wide.
    #[inline]
    pub(crate) fn high_shift(self, width: usize) -> u32 {
        width as u32 * self.lane()
    }

    pub(crate) fn full_mask(self, width: usize) -> u64 {
        let bits = width as u32 * self.lane();
        if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        }
    }

    /// Mask of coordinates that are non-zero, one bit per coordinate,
    /// coordinate 1 in the most significant of `width` bits.
    pub(crate) fn support(self, word: u64, width: usize) -> u32 {
        if self.is_binary() {
            return word as u32;
        }
        (0..width).fold(0, |acc, idx| {
            (acc << 1) | (self.get(word, width, idx) != 0) as u32
        })
    }

    pub(crate) fn digit(self, d: u8) -> char {
        char::from_digit(d as u32, 16).unwrap()
    }
}

/// Gauss-Jordan reduction of packed rows of `width` coordinates.
///
/// Returns the non-zero rows of the reduced row echelon form, pivots
/// strictly increasing.
pub(crate) fn reduce(field: Field, width: usize, mut rows: Vec<u64>) -> Vec<u64> {
    let mut rank = 0;
    if field.is_binary() {
        for col in 0..width {
            let bit = 1u64 << (width - 1 - col);
            let Some(found) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot = rows[rank];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
    } else {
        for col in 0..width {
            let Some(found) = (rank..rows.len()).find(|&i| field.get(rows[i], width, col) != 0)
            else {
                continue;
            };
            rows.swap(rank, found);
            let lead = field.get(rows[rank], width, col);
            let pivot = field.scale_packed(rows[rank], field.inv(lead), width);
            rows[rank] = pivot;
            for (i, row) in rows.iter_mut().enumerate() {
                let c = field.get(*row, width, col);
                if i != rank && c != 0 {
                    *row = field.axpy_packed(*row, field.neg(c), pivot, width);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
    }
    rows.truncate(rank);
    rows
}

/// A vector of `F_q^n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FVector {
    field: Field,
    n: u8,
    packed: u64,
}

impl FVector {
    pub fn new(field: Field, coords: &[u32]) -> Result<FVector> {
        field.check_dim(coords.len())?;
        let n = coords.len();
        let mut packed = 0;
        for (idx, &c) in coords.iter().enumerate() {
            if c >= field.q() {
                return Err(Error::OutOfRange(format!("coordinate {c} not in F_{}", field.q())));
            }
            packed = field.set(packed, n, idx, c as u8);
        }
        Ok(FVector { field, n: n as u8, packed })
    }

    pub(crate) fn from_packed(field: Field, n: usize, packed: u64) -> FVector {
        debug_assert_eq!(packed & !field.full_mask(n), 0);
        FVector { field, n: n as u8, packed }
    }

    pub fn zero(field: Field, n: usize) -> FVector {
        FVector { field, n: n as u8, packed: 0 }
    }

    /// The standard basis vector `e_i`, `1 <= i <= n`.
    pub fn unit(field: Field, n: usize, i: usize) -> Result<FVector> {
        field.check_dim(n)?;
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Ok(FVector { field, n: n as u8, packed: field.set(0, n, i - 1, 1) })
    }

    /// The all-ones vector.
    pub fn ones(field: Field, n: usize) -> FVector {
        let packed = (0..n).fold(0, |w, idx| field.set(w, n, idx, 1));
        FVector { field, n: n as u8, packed }
    }

    /// Parses a digit string such as `"0111"`.
    pub fn parse(field: Field, text: &str) -> Result<FVector> {
        let coords = text
            .trim()
            .chars()
            .map(|ch| {
                ch.to_digit(16)
                    .ok_or_else(|| Error::Parse(format!("bad digit {ch:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        FVector::new(field, &coords).map_err(|e| Error::Parse(format!("{text:?}: {e}")))
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn packed(&self) -> u64 {
        self.packed
    }

    /// Coordinate with zero-based index.
    pub fn coord(&self, idx: usize) -> u32 {
        self.field.get(self.packed, self.dim(), idx) as u32
    }

    pub fn coords(&self) -> Vec<u32> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.packed == 0
    }

    pub fn add(&self, other: &FVector) -> FVector {
        debug_assert_eq!((self.field, self.n), (other.field, other.n));
        FVector {
            packed: self.field.add_packed(self.packed, other.packed, self.dim()),
            ..*self
        }
    }

    pub fn scale(&self, c: u32) -> FVector {
        FVector {
            packed: self.field.scale_packed(self.packed, (c % self.field.q()) as u8, self.dim()),
            ..*self
        }
    }

    pub fn dot(&self, other: &FVector) -> u32 {
        self.field.dot_packed(self.packed, other.packed, self.dim()) as u32
    }

    /// Zero-based indices of the non-zero coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coord(i) != 0).collect()
    }
}

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for idx in 0..self.dim() {
            write!(f, "{}", self.field.digit(self.field.get(self.packed, self.dim(), idx)))?;
        }
        Ok(())
    }
}

/// A subspace of `F_q^n` held by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    field: Field,
    n: u8,
    rows: Vec<u64>,
}

/// Canonical span of `rows` inside `F_q^n`.
pub fn rref(field: Field, n: usize, rows: &[FVector]) -> Result<Subspace> {
    field.check_dim(n)?;
    if let Some(bad) = rows.iter().find(|r| r.field != field || r.dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "row {bad} does not live in F_{}^{n}",
            field.q()
        )));
    }
    Ok(Subspace::from_packed(field, n, rows.iter().map(|r| r.packed).collect()))
}

impl Subspace {
    pub(crate) fn from_packed(field: Field, n: usize, rows: Vec<u64>) -> Subspace {
        Subspace { field, n: n as u8, rows: reduce(field, n, rows) }
    }

    /// Wraps rows already known to be in reduced row echelon form.
    pub(crate) fn from_canonical(field: Field, n: usize, rows: Vec<u64>) -> Subspace {
        debug_assert_eq!(reduce(field, n, rows.clone()), rows);
        Subspace { field, n: n as u8, rows }
    }

    pub fn zero(field: Field, n: usize) -> Subspace {
        Subspace { field, n: n as u8, rows: Vec::new() }
    }

    pub fn full(field: Field, n: usize) -> Subspace {
        let rows = (0..n).map(|i| field.set(0, n, i, 1)).collect();
        Subspace { field, n: n as u8, rows }
    }

    pub fn span(vectors: &[FVector]) -> Result<Subspace> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty generating set".into()))?;
        rref(first.field, first.dim(), vectors)
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn packed_rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn basis(&self) -> impl Iterator<Item = FVector> + '_ {
        self.rows.iter().map(move |&r| FVector::from_packed(self.field, self.ambient_dim(), r))
    }

    /// Zero-based pivot columns.
    pub fn pivots(&self) -> Vec<usize> {
        let n = self.ambient_dim();
        self.rows
            .iter()
            .map(|&r| (0..n).find(|&c| self.field.get(r, n, c) != 0).unwrap())
            .collect()
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.field != other.field || self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "F_{}^{} vs F_{}^{}",
                self.field.q(),
                self.n,
                other.field.q(),
                other.n
            )));
        }
        Ok(())
    }

    /// Reduces `word` against the basis; zero iff the word is in the span.
    fn residue(&self, mut word: u64) -> u64 {
        let n = self.ambient_dim();
        if self.field.is_binary() {
            for &row in &self.rows {
                let lead = 63 - row.leading_zeros();
                if word >> lead & 1 == 1 {
                    word ^= row;
                }
            }
            return word;
        }
        for (row, piv) in self.rows.iter().zip(self.pivots()) {
            let c = self.field.get(word, n, piv);
            if c != 0 {
                word = self.field.axpy_packed(word, self.field.neg(c), *row, n);
            }
        }
        word
    }

    pub fn contains_vector(&self, v: &FVector) -> bool {
        v.field == self.field && v.dim() == self.ambient_dim() && self.residue(v.packed) == 0
    }

    /// Subspace inclusion `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> bool {
        self.field == other.field
            && self.n == other.n
            && other.rows.iter().all(|&r| self.residue(r) == 0)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let rows = self.rows.iter().chain(&other.rows).copied().collect();
        Ok(Subspace::from_packed(self.field, self.ambient_dim(), rows))
    }

    /// Intersection by the Zassenhaus block reduction of `[X X; Y 0]`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let n = self.ambient_dim();
        let shift = self.field.high_shift(n);
        let block = self
            .rows
            .iter()
            .map(|&x| (x << shift) | x)
            .chain(other.rows.iter().map(|&y| y << shift))
            .collect();
        let low = self.field.full_mask(n);
        let rows = reduce(self.field, 2 * n, block)
            .into_iter()
            .filter(|&r| r >> shift == 0)
            .map(|r| r & low)
            .collect();
        Ok(Subspace::from_packed(self.field, n, rows))
    }

    /// Dimension of `X + Y` without materialising it.
    pub fn sum_dim(&self, other: &Subspace) -> usize {
        debug_assert!(self.check_compatible(other).is_ok());
        let rows = self.rows.iter().chain(&other.rows).copied().collect();
        reduce(self.field, self.ambient_dim(), rows).len()
    }

    /// Orthogonal complement for the standard dot product.
    pub fn perp(&self) -> Subspace {
        let n = self.ambient_dim();
        let field = self.field;
        let pivots = self.pivots();
        let rows = (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = field.set(0, n, free, 1);
                for (row, &p) in self.rows.iter().zip(&pivots) {
                    v = field.set(v, n, p, field.neg(field.get(*row, n, free)));
                }
                v
            })
            .collect();
        Subspace::from_packed(field, n, rows)
    }

    /// Every vector of the subspace, the zero vector first.
    pub fn vectors(&self) -> Vec<FVector> {
        let n = self.ambient_dim();
        let mut words = vec![0u64];
        for &row in &self.rows {
            let current = words.clone();
            for c in 1..self.field.q() as u8 {
                words.extend(current.iter().map(|&w| self.field.axpy_packed(w, c, row, n)));
            }
        }
        words.into_iter().map(|w| FVector::from_packed(self.field, n, w)).collect()
    }

    /// The 1-dimensional subspaces contained in this one.
    pub fn points(&self) -> Vec<Subspace> {
        let n = self.ambient_dim();
        let mut pts: Vec<Subspace> = self
            .vectors()
            .into_iter()
            .filter(|v| !v.is_zero())
            .map(|v| Subspace::from_packed(self.field, n, vec![v.packed]))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// Zero-based coordinates on which every vector vanishes.
    pub fn zero_columns(&self) -> Vec<usize> {
        let n = self.ambient_dim();
        let used = self
            .rows
            .iter()
            .fold(0u32, |acc, &r| acc | self.field.support(r, n));
        (0..n).filter(|&i| used >> (n - 1 - i) & 1 == 0).collect()
    }

    /// Parses one block: one digit-string row per line.
    pub fn parse(field: Field, text: &str) -> Result<Subspace> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| FVector::parse(field, l))
            .collect::<Result<Vec<_>>>()?;
        Subspace::span(&rows).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses blank-line separated blocks; `#` lines are comments.
    pub fn parse_blocks(field: Field, text: &str) -> Result<Vec<Subspace>> {
        let mut out = Vec::new();
        let mut block = String::new();
        for line in text.lines().filter(|l| !l.starts_with('#')).chain(std::iter::once("")) {
            if line.trim().is_empty() {
                if !block.is_empty() {
                    out.push(Subspace::parse(field, &block)?);
                    block.clear();
                }
            } else {
                block.push_str(line);
                block.push('\n');
            }
        }
        Ok(out)
    }

    /// Rows joined by `sep`; the zero subspace is written as one zero row.
    pub fn rows_joined(&self, sep: &str) -> String {
        if self.rows.is_empty() {
            return FVector::zero(self.field, self.ambient_dim()).to_string();
        }
        self.basis().map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rows_joined("\n"))
    }
}

/// Serialized as the list of basis rows.
impl serde::Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.basis().map(|v| v.to_string()))
    }
}

/// Writes subspaces as blank-line separated blocks.
pub fn format_blocks<'a>(subspaces: impl IntoIterator<Item = &'a Subspace>) -> String {
    subspaces
        .into_iter()
        .map(|s| format!("{s}\n"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `[n choose k]_q`, zero when `k > n`.
pub fn gaussian_binomial(n: u32, k: u32, q: u32) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = q.pow(n - i) - 1;
        let den = q.pow(i + 1) - 1;
        // exact: acc * num is divisible by den at every step
        acc = acc.checked_mul(num).expect("gaussian binomial overflows u128") / den;
    }
    acc
}

/// Every `k`-dimensional subspace of `F_q^n`, sorted by canonical basis.
pub fn enumerate_subspaces(n: usize, k: usize, field: Field) -> Result<Vec<Subspace>> {
    field.check_dim(n)?;
    if k > n {
        return Err(Error::OutOfRange(format!("k = {k} > n = {n}")));
    }
    let count = gaussian_binomial(n as u32, k as u32, field.q());
    if count > MAX_ENUMERATION {
        return Err(Error::OutOfRange(format!("{count} subspaces is beyond desk scale")));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut pivots = Vec::with_capacity(k);
    pivot_sets(n, k, 0, &mut pivots, &mut |pivots| {
        // free slots: (row, column) right of the row's pivot, not a pivot column
        let slots: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(j, &p)| {
                (p + 1..n)
                    .filter(|c| !pivots.contains(c))
                    .map(move |c| (j, c))
            })
            .collect();
        let base: Vec<u64> = pivots.iter().map(|&p| field.set(0, n, p, 1)).collect();
        let q = field.q() as u64;
        let total = q.pow(slots.len() as u32);
        for mut t in 0..total {
            let mut rows = base.clone();
            for &(j, c) in &slots {
                rows[j] = field.set(rows[j], n, c, (t % q) as u8);
                t /= q;
            }
            out.push(Subspace::from_canonical(field, n, rows));
        }
    });
    out.sort();
    Ok(out)
}

fn pivot_sets(n: usize, k: usize, start: usize, acc: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if acc.len() == k {
        emit(acc);
        return;
    }
    for c in start..=n - (k - acc.len()) {
        acc.push(c);
        pivot_sets(n, k, c + 1, acc, emit);
        acc.pop();
    }
}

/// The coordinate hyperplane `C_i = ker(x -> x_i)`, `1 <= i <= n`.
pub fn coordinate_hyperplane(i: usize, n: usize, field: Field) -> Result<Subspace> {
    field.check_dim(n)?;
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let rows = (0..n).filter(|&c| c != i - 1).map(|c| field.set(0, n, c, 1)).collect();
    Ok(Subspace::from_canonical(field, n, rows))
}
