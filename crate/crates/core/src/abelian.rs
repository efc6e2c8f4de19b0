//! Integer linear algebra for finitely generated subgroups of the rational
//! sequence space: Hermite and Smith normal forms with unimodular transforms,
//! exact membership, free bases and basis extension along chains.
//!
//! Sparse rational generators are handled by restricting to the finite union
//! of their supports and clearing denominators; a finitely generated group of
//! rational vectors then sits inside `(1/q) Z^n` and is automatically free.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::enumerate::{self, Certificate, EnumError, Lattice};
use crate::exactvec::{PNorm, PowThreshold, Rational, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("matrix entries do not match {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("chain level {level}: generator {index} of the previous level is not in the group")]
    NotAChain { level: usize, index: usize },
    #[error("chain level {level}: quotient has torsion (invariant factor {factor})")]
    TorsionQuotient { level: usize, factor: BigInt },
    #[error(transparent)]
    Enumerate(#[from] EnumError),
}

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, AlgebraError> {
        if entries.len() != rows * cols {
            return Err(AlgebraError::Shape { rows, cols });
        }
        Ok(IntegerMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntegerMatrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(AlgebraError::Shape { rows: rows.len(), cols });
            }
            entries.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        Ok(IntegerMatrix { rows: rows.len(), cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntegerMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let mut out = IntegerMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !m.get(r, k).is_zero()) {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    // row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.entries[src * self.cols + c] * k;
            self.entries[dst * self.cols + c] += v;
        }
    }

    // col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.entries[r * self.cols + src] * k;
            self.entries[r * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -&self.entries[r * self.cols + c];
            self.entries[r * self.cols + c] = v;
        }
    }


    /// True when the matrix is in the row Hermite form produced by [`hnf`].
    pub fn is_hermite(&self) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for r in 0..self.rows {
            match (0..self.cols).find(|&c| !self.get(r, c).is_zero()) {
                None => seen_zero = true,
                Some(c) => {
                    if seen_zero || last_pivot.is_some_and(|p| p >= c) || !self.get(r, c).is_positive() {
                        return false;
                    }
                    let piv = self.get(r, c);
                    for above in 0..r {
                        let v = self.get(above, c);
                        if v.is_negative() || v >= piv {
                            return false;
                        }
                    }
                    last_pivot = Some(c);
                }
            }
        }
        true
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            f.write_str(if r == 0 { "[" } else { " " })?;
            for c in 0..self.cols {
                write!(f, "{:>4}", self.get(r, c))?;
            }
            f.write_str(if r + 1 == self.rows { "]" } else { "\n" })?;
        }
        Ok(())
    }
}

/// Output of [`hnf`] or [`smith`].
///
/// Hermite: `u * a = h`. Smith: `u * a * v = h` with `h` diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormResult {
    pub h: IntegerMatrix,
    pub u: IntegerMatrix,
    pub v: Option<IntegerMatrix>,
    pub rank: usize,
    pub invariant_factors: Vec<BigInt>,
    /// Pivot column of each nonzero row of `h` (Hermite only).
    pub pivots: Vec<usize>,
}

/// Row Hermite normal form: pivots strictly move right, are positive, and the
/// entries above each pivot lie in `[0, pivot)`. Zero rows sink to the bottom.
pub fn hnf(a: &IntegerMatrix) -> NormalFormResult {
    let (m, n) = (a.rows, a.cols);
    let mut h = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // Euclid on column c below row r until a single nonzero remains.
        loop {
            let best = (r..m)
                .filter(|&i| !h.get(i, c).is_zero())
                .min_by(|&i, &j| h.get(i, c).abs().cmp(&h.get(j, c).abs()));
            let Some(best) = best else { break };
            h.swap_rows(r, best);
            u.swap_rows(r, best);
            let mut done = true;
            for i in r + 1..m {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = -h.get(i, c).div_floor(h.get(r, c));
                h.add_row(i, r, &q);
                u.add_row(i, r, &q);
                if !h.get(i, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let piv = h.get(r, c).clone();
        for above in 0..r {
            let q = -h.get(above, c).div_floor(&piv);
            h.add_row(above, r, &q);
            u.add_row(above, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    NormalFormResult { h, u, v: None, rank: r, invariant_factors: Vec::new(), pivots }
}

/// Smith normal form `u * a * v = s`, `s` diagonal with each invariant factor
/// dividing the next; `invariant_factors` lists the nonzero diagonal entries.
pub fn smith(a: &IntegerMatrix) -> NormalFormResult {
    let (s, u, v, _) = smith_full(a);
    let rank = (0..s.rows.min(s.cols)).take_while(|&i| !s.get(i, i).is_zero()).count();
    let invariant_factors = (0..rank).map(|i| s.get(i, i).clone()).collect();
    NormalFormResult { h: s, u, v: Some(v), rank, invariant_factors, pivots: Vec::new() }
}

// Returns (s, u, v, v_inv).
fn smith_full(a: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix, IntegerMatrix, IntegerMatrix) {
    let (m, n) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut v = IntegerMatrix::identity(n);
    // v_inv tracks inverse column operations as row operations.
    let mut v_inv = IntegerMatrix::identity(n);
    for t in 0..m.min(n) {
        loop {
            let best = (t..m)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !s.get(i, j).is_zero())
                .min_by(|&(a1, b1), &(a2, b2)| s.get(a1, b1).abs().cmp(&s.get(a2, b2).abs()));
            let Some((bi, bj)) = best else {
                return (s, u, v, v_inv);
            };
            s.swap_rows(t, bi);
            u.swap_rows(t, bi);
            s.swap_cols(t, bj);
            v.swap_cols(t, bj);
            v_inv.swap_rows(t, bj);
            let mut clean = true;
            for i in t + 1..m {
                if s.get(i, t).is_zero() {
                    continue;
                }
                let q = -s.get(i, t).div_floor(s.get(t, t));
                s.add_row(i, t, &q);
                u.add_row(i, t, &q);
                clean &= s.get(i, t).is_zero();
            }
            for j in t + 1..n {
                if s.get(t, j).is_zero() {
                    continue;
                }
                let q = -s.get(t, j).div_floor(s.get(t, t));
                s.add_col(j, t, &q);
                v.add_col(j, t, &q);
                // col_j += q col_t on V  <=>  row_t -= q row_j on V^{-1}
                v_inv.add_row(t, j, &-&q);
                clean &= s.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let piv = s.get(t, t).clone();
            let offender = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !s.get(i, j).is_multiple_of(&piv));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::one();
                    s.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (s, u, v, v_inv)
}

/// Common integer coordinates for a finite family of rational vectors.
struct Scaled {
    coords: Vec<usize>,
    scale: BigInt,
}

impl Scaled {
    fn of<'a, I: IntoIterator<Item = &'a SparseVector>>(vs: I) -> Scaled {
        let mut coords = BTreeMap::new();
        let mut scale = BigInt::one();
        for v in vs {
            for (i, x) in v.entries() {
                coords.insert(*i, ());
                scale = scale.lcm(x.denom());
            }
        }
        Scaled { coords: coords.into_keys().collect(), scale }
    }

    fn row(&self, v: &SparseVector) -> Option<Vec<BigInt>> {
        let mut row = vec![BigInt::zero(); self.coords.len()];
        for (i, x) in v.entries() {
            let k = self.coords.binary_search(i).ok()?;
            row[k] = (x * Rational::from_integer(self.scale.clone())).to_integer();
        }
        Some(row)
    }

    fn matrix(&self, vs: &[SparseVector]) -> IntegerMatrix {
        let mut entries = Vec::with_capacity(vs.len() * self.coords.len());
        for v in vs {
            entries.extend(self.row(v).expect("coordinates cover every generator"));
        }
        IntegerMatrix { rows: vs.len(), cols: self.coords.len(), entries }
    }

    fn vector(&self, row: &[BigInt]) -> SparseVector {
        SparseVector::from_pairs(
            row.iter()
                .zip(&self.coords)
                .map(|(x, &i)| (i, Rational::new(x.clone(), self.scale.clone()))),
        )
    }
}

/// Solves `y * h = b` for the Hermite form `h`; `None` when `b` is not in the
/// row lattice.
fn solve_hermite(h: &IntegerMatrix, pivots: &[usize], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest: Vec<BigInt> = b.to_vec();
    let mut y = Vec::with_capacity(pivots.len());
    for (r, &c) in pivots.iter().enumerate() {
        let (q, rem) = rest[c].div_rem(h.get(r, c));
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (k, x) in h.row(r).iter().enumerate() {
                rest[k] -= &q * x;
            }
        }
        y.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(y)
}

/// Integer coefficients `n` with `sum n_i generators[i] = v`, if any exist.
pub fn subgroup_membership(generators: &[SparseVector], v: &SparseVector) -> Option<Vec<BigInt>> {
    if generators.is_empty() {
        return v.is_zero().then(Vec::new);
    }
    let scaled = Scaled::of(generators.iter().chain(core::iter::once(v)));
    let b = scaled.row(v)?;
    let nf = hnf(&scaled.matrix(generators));
    let y = solve_hermite(&nf.h, &nf.pivots, &b)?;
    let mut n = vec![BigInt::zero(); generators.len()];
    for (r, yr) in y.iter().enumerate() {
        if yr.is_zero() {
            continue;
        }
        for (i, ni) in n.iter_mut().enumerate() {
            *ni += yr * nf.u.get(r, i);
        }
    }
    Some(n)
}

/// Batch form of [`subgroup_membership`] that shares one Hermite reduction.
pub fn membership_many(generators: &[SparseVector], targets: &[SparseVector]) -> Vec<Option<Vec<BigInt>>> {
    if generators.is_empty() {
        return targets.iter().map(|t| t.is_zero().then(Vec::new)).collect();
    }
    let scaled = Scaled::of(generators.iter().chain(targets.iter()));
    let nf = hnf(&scaled.matrix(generators));
    targets
        .iter()
        .map(|t| {
            let b = scaled.row(t)?;
            let y = solve_hermite(&nf.h, &nf.pivots, &b)?;
            let mut n = vec![BigInt::zero(); generators.len()];
            for (r, yr) in y.iter().enumerate() {
                for (i, ni) in n.iter_mut().enumerate() {
                    *ni += yr * nf.u.get(r, i);
                }
            }
            Some(n)
        })
        .collect()
}

/// A free basis of the subgroup generated by `generators`, as the nonzero
/// rows of the Hermite form (canonical for the group).
pub fn free_basis(generators: &[SparseVector]) -> Vec<SparseVector> {
    free_basis_with_transform(generators).0
}

/// Free basis together with the rows of the unimodular transform expressing
/// each basis vector in the original generators.
pub fn free_basis_with_transform(generators: &[SparseVector]) -> (Vec<SparseVector>, Vec<Vec<BigInt>>) {
    if generators.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let scaled = Scaled::of(generators);
    let nf = hnf(&scaled.matrix(generators));
    let basis = (0..nf.rank).map(|r| scaled.vector(nf.h.row(r))).collect();
    let transform = (0..nf.rank).map(|r| nf.u.row(r).to_vec()).collect();
    (basis, transform)
}

/// Bases `B_0 ⊆ B_1 ⊆ ...` of a chain of nested groups, each extending the
/// previous one. Every inclusion must have a torsion-free quotient.
pub fn extend_basis(chain: &[Vec<SparseVector>]) -> Result<Vec<Vec<SparseVector>>, AlgebraError> {
    let mut out: Vec<Vec<SparseVector>> = Vec::with_capacity(chain.len());
    let Some(first) = chain.first() else {
        return Ok(out);
    };
    out.push(free_basis(first));
    for level in 1..chain.len() {
        let prev = &out[level - 1];
        let next = free_basis(&chain[level]);
        for (index, g) in chain[level - 1].iter().enumerate() {
            if subgroup_membership(&next, g).is_none() {
                return Err(AlgebraError::NotAChain { level, index });
            }
        }
        // Coordinates of the previous basis in the new one (unique: `next` is a basis).
        let coords: Vec<Vec<BigInt>> = membership_many(&next, prev)
            .into_iter()
            .map(|c| c.expect("checked above"))
            .collect();
        let mut extended = prev.clone();
        if !prev.is_empty() {
            let m = IntegerMatrix {
                rows: prev.len(),
                cols: next.len(),
                entries: coords.into_iter().flatten().collect(),
            };
            let (s, _, _, v_inv) = smith_full(&m);
            for i in 0..prev.len() {
                let f = s.get(i, i).abs();
                if !f.is_one() {
                    return Err(AlgebraError::TorsionQuotient { level, factor: f });
                }
            }
            for k in prev.len()..next.len() {
                extended.push(combine(&next, v_inv.row(k)));
            }
        } else {
            extended = next;
        }
        out.push(extended);
    }
    Ok(out)
}

/// `sum_i coeffs[i] * vs[i]`.
pub fn combine(vs: &[SparseVector], coeffs: &[BigInt]) -> SparseVector {
    vs.iter().zip(coeffs).fold(SparseVector::zero(), |acc, (v, c)| {
        if c.is_zero() {
            acc
        } else {
            acc.add_scaled(v, &Rational::from_integer(c.clone()))
        }
    })
}

/// Separation certificate for the group generated by `generators` at
/// threshold `r` (non-strict: every nonzero element has `||x|| >= r`).
pub fn is_discrete(generators: &[SparseVector], r: &PowThreshold, p: PNorm) -> Result<Certificate, AlgebraError> {
    let lattice = Lattice::new(p, generators.to_vec())?;
    Ok(enumerate::verify_separation(&lattice, r, false)?)
}
