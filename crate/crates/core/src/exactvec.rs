//! Exact sparse rational vectors and `l_p` norm comparisons for integer `p`.
//!
//! Norms are never evaluated as reals. Everything is phrased in terms of the
//! `p`-th power `norm_pow(v) = sum |v_i|^p`, which is rational, and thresholds
//! are stored the same way (see [`PowThreshold`]).

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VectorError {
    #[error("norm exponent must be a positive integer, got {0}")]
    InvalidExponent(u32),
    #[error("threshold must be non-negative")]
    NegativeThreshold,
    #[error("indices must be strictly increasing (offending index {0})")]
    Unsorted(usize),
    #[error("stored value at index {0} is zero")]
    ZeroEntry(usize),
    #[error("malformed rational literal `{0}`")]
    BadRational(String),
}

/// Integer exponent `p >= 1` of an `l_p` norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PNorm(u32);

impl PNorm {
    pub fn new(p: u32) -> Result<Self, VectorError> {
        if p == 0 {
            return Err(VectorError::InvalidExponent(p));
        }
        Ok(PNorm(p))
    }

    pub const L1: PNorm = PNorm(1);
    pub const L2: PNorm = PNorm(2);

    pub fn p(self) -> u32 {
        self.0
    }

    /// `|x|^p` for a rational scalar.
    pub fn pow_abs(self, x: &Rational) -> Rational {
        Pow::pow(x.abs(), self.0)
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A radius `rho` represented by its `p`-th power `c = rho^p`.
///
/// The same value of `c` means different radii under different exponents;
/// the exponent is supplied wherever the threshold is used.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowThreshold(Rational);

impl PowThreshold {
    pub fn new(c: Rational) -> Result<Self, VectorError> {
        if c.is_negative() {
            return Err(VectorError::NegativeThreshold);
        }
        Ok(PowThreshold(c))
    }

    pub fn from_integer(c: u64) -> Self {
        PowThreshold(Rational::from_integer(BigInt::from(c)))
    }

    /// Threshold for the (rational) radius `rho`, i.e. `c = rho^p`.
    pub fn from_radius(rho: &Rational, p: PNorm) -> Result<Self, VectorError> {
        if rho.is_negative() {
            return Err(VectorError::NegativeThreshold);
        }
        Ok(PowThreshold(p.pow_abs(rho)))
    }

    pub fn zero() -> Self {
        PowThreshold(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Threshold of the radius `k * rho` for integer `k`: `c * k^p`.
    pub fn scaled_radius(&self, k: u32, p: PNorm) -> Self {
        let factor: BigInt = Pow::pow(BigInt::from(k), p.p());
        PowThreshold(&self.0 * Rational::from_integer(factor))
    }
}

/// Finitely supported vector with exact rational coordinates.
///
/// Entries are sorted by index and no stored value is zero, so structural
/// equality coincides with mathematical equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVector {
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector { entries: Vec::new() }
    }

    /// Standard basis vector `e_index`.
    pub fn unit(index: usize) -> Self {
        SparseVector { entries: alloc::vec![(index, Rational::one())] }
    }

    /// `value * e_index`.
    pub fn single(index: usize, value: Rational) -> Self {
        if value.is_zero() {
            SparseVector::zero()
        } else {
            SparseVector { entries: alloc::vec![(index, value)] }
        }
    }

    /// Builds a vector from canonical entries, rejecting anything out of order
    /// or explicitly zero. Used when decoding the text form.
    pub fn from_canonical(entries: Vec<(usize, Rational)>) -> Result<Self, VectorError> {
        for (k, (i, v)) in entries.iter().enumerate() {
            if v.is_zero() {
                return Err(VectorError::ZeroEntry(*i));
            }
            if k > 0 && entries[k - 1].0 >= *i {
                return Err(VectorError::Unsorted(*i));
            }
        }
        Ok(SparseVector { entries })
    }

    /// Builds a vector from arbitrary `(index, value)` pairs, summing repeated
    /// indices and dropping zeros.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut raw: Vec<(usize, Rational)> = pairs.into_iter().collect();
        raw.sort_by_key(|a| a.0);
        let mut entries: Vec<(usize, Rational)> = Vec::with_capacity(raw.len());
        for (i, v) in raw {
            match entries.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|(_, v)| !v.is_zero());
        SparseVector { entries }
    }

    /// Dense prefix `values[0], values[1], ...` on coordinates `0..len`.
    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVector::from_pairs(values.iter().cloned().enumerate())
    }

    /// Same as [`from_dense`](Self::from_dense) with integer entries.
    pub fn from_integers(values: &[i64]) -> Self {
        SparseVector::from_pairs(
            values.iter().enumerate().map(|(i, v)| (i, Rational::from_integer(BigInt::from(*v)))),
        )
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, Rational)> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn get(&self, index: usize) -> Rational {
        match self.entries.binary_search_by(|(i, _)| i.cmp(&index)) {
            Ok(k) => self.entries[k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.entries.binary_search_by(|(i, _)| i.cmp(&index)).is_ok()
    }

    /// Least common multiple of the denominators of all entries.
    pub fn denominator_lcm(&self) -> BigInt {
        self.entries.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()))
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> SparseVector {
        SparseVector { entries: self.entries.iter().map(|(i, v)| (*i, -v)).collect() }
    }

    pub fn scale(&self, k: &Rational) -> SparseVector {
        if k.is_zero() {
            return SparseVector::zero();
        }
        SparseVector { entries: self.entries.iter().map(|(i, v)| (*i, v * k)).collect() }
    }

    pub fn scale_int(&self, k: i64) -> SparseVector {
        self.scale(&Rational::from_integer(BigInt::from(k)))
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &SparseVector, k: &Rational) -> SparseVector {
        if k.is_zero() {
            return self.clone();
        }
        self.combine(other, |a, b| a + b * k)
    }

    pub fn dot(&self, other: &SparseVector) -> Rational {
        let (num, den) = self.dot_fraction(other);
        Rational::new(num, den)
    }

    /// Unreduced `(numerator, denominator)` of the inner product; the
    /// denominator is positive.
    pub(crate) fn dot_fraction(&self, other: &SparseVector) -> (BigInt, BigInt) {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            match i.cmp(j) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    let pn = x.numer() * y.numer();
                    let pd = x.denom() * y.denom();
                    if pd == den {
                        num += pn;
                    } else if (&den % &pd).is_zero() {
                        num += pn * (&den / &pd);
                    } else {
                        num = num * &pd + pn * &den;
                        den *= pd;
                    }
                    a.next();
                    b.next();
                }
            }
        }
        (num, den)
    }

    fn combine<F>(&self, other: &SparseVector, f: F) -> SparseVector
    where
        F: Fn(Rational, &Rational) -> Rational,
    {
        let zero = Rational::zero();
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some((i, x)), None) => {
                    let r = (*i, f(x.clone(), &zero));
                    a.next();
                    r
                }
                (None, Some((j, y))) => {
                    let r = (*j, f(zero.clone(), y));
                    b.next();
                    r
                }
                (Some((i, x)), Some((j, y))) => match i.cmp(j) {
                    Ordering::Less => {
                        let r = (*i, f(x.clone(), &zero));
                        a.next();
                        r
                    }
                    Ordering::Greater => {
                        let r = (*j, f(zero.clone(), y));
                        b.next();
                        r
                    }
                    Ordering::Equal => {
                        let r = (*i, f(x.clone(), y));
                        a.next();
                        b.next();
                        r
                    }
                },
            };
            if !next.1.is_zero() {
                out.push(next);
            }
        }
        SparseVector { entries: out }
    }
}

impl Add for &SparseVector {
    type Output = SparseVector;
    fn add(self, rhs: &SparseVector) -> SparseVector {
        SparseVector::add(self, rhs)
    }
}

impl Sub for &SparseVector {
    type Output = SparseVector;
    fn sub(self, rhs: &SparseVector) -> SparseVector {
        SparseVector::sub(self, rhs)
    }
}

impl Neg for &SparseVector {
    type Output = SparseVector;
    fn neg(self) -> SparseVector {
        SparseVector::neg(self)
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "[{}, \"{}\"]", i, format_rational(v))?;
        }
        f.write_str("]")
    }
}

/// `sum_i |v_i|^p`, exactly.
pub fn norm_pow(v: &SparseVector, n: PNorm) -> Rational {
    v.entries.iter().fold(Rational::zero(), |acc, (_, x)| acc + n.pow_abs(x))
}

/// Orders `||v||_p` against `t^{1/p}` by comparing `norm_pow(v)` with `t`.
pub fn compare_norm(v: &SparseVector, n: PNorm, t: &PowThreshold) -> Ordering {
    norm_pow(v, n).cmp(t.value())
}

/// `norm_pow(v - w)`.
pub fn distance_pow(v: &SparseVector, w: &SparseVector, n: PNorm) -> Rational {
    norm_pow(&v.sub(w), n)
}

/// Canonical `num/den` form; the denominator is always written, even when 1.
pub fn format_rational(x: &Rational) -> String {
    alloc::format!("{}/{}", x.numer(), x.denom())
}

/// Parses the canonical `num/den` form. Non-reduced fractions, non-positive
/// denominators and missing denominators are rejected so that the text form
/// stays in bijection with the value.
pub fn parse_rational(s: &str) -> Result<Rational, VectorError> {
    let bad = || VectorError::BadRational(String::from(s));
    let (num, den) = s.split_once('/').ok_or_else(bad)?;
    let valid_int = |t: &str, signed: bool| {
        let digits = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && (digits == "0" || !digits.starts_with('0'))
    };
    if !valid_int(num, true) || !valid_int(den, false) || num == "-0" {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.sign() != Sign::Plus || !num.gcd(&den).is_one() {
        return Err(bad());
    }
    Ok(Rational::new_raw(num, den))
}

/// Rational bounds `lo <= c^{1/p} <= hi` with `hi - lo <= 2^{-bits}`.
pub fn root_bounds(c: &Rational, p: PNorm, bits: u32) -> (Rational, Rational) {
    debug_assert!(!c.is_negative());
    let scale = BigInt::one() << (bits as usize);
    let scaled = (c.numer() * Pow::pow(scale.clone(), p.p())) / c.denom();
    let r = scaled.nth_root(p.p());
    let lo = Rational::new(r.clone(), scale.clone());
    let hi = if Pow::pow(r.clone(), p.p()) == scaled
        && (c.numer() * Pow::pow(scale.clone(), p.p())) % c.denom() == BigInt::zero()
    {
        lo.clone()
    } else {
        Rational::new(r + 1, scale)
    };
    (lo, hi)
}

/// Exact `p`-th root when `c` is the `p`-th power of a rational.
pub fn exact_root(c: &Rational, p: PNorm) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().nth_root(p.p());
    let d = c.denom().nth_root(p.p());
    if Pow::pow(n.clone(), p.p()) == *c.numer() && Pow::pow(d.clone(), p.p()) == *c.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Compares `lhs^{1/p}` with `sum_k terms[k]^{1/p}` (all arguments are
/// `p`-th powers of non-negative radii).
///
/// The comparison is exact whenever every root involved is rational, for
/// `p = 1`, and for `p = 2` with at most two terms. Otherwise rational root
/// enclosures are refined up to 1024 bits; if they still overlap the radii
/// are reported `Equal`.
pub fn compare_root_sum(lhs: &Rational, terms: &[Rational], p: PNorm) -> Ordering {
    let roots: Option<Vec<Rational>> =
        core::iter::once(lhs).chain(terms.iter()).map(|c| exact_root(c, p)).collect();
    if let Some(roots) = roots {
        let rhs = roots[1..].iter().fold(Rational::zero(), |a, r| a + r);
        return roots[0].cmp(&rhs);
    }
    if p.p() == 2 && terms.len() <= 2 {
        return compare_sqrt_sum(lhs, terms);
    }
    let mut bits = 64;
    while bits <= 1024 {
        let (llo, lhi) = root_bounds(lhs, p, bits);
        let (rlo, rhi) = terms.iter().fold(
            (Rational::zero(), Rational::zero()),
            |(lo, hi), c| {
                let (a, b) = root_bounds(c, p, bits);
                (lo + a, hi + b)
            },
        );
        if lhi < rlo {
            return Ordering::Less;
        }
        if llo > rhi {
            return Ordering::Greater;
        }
        bits *= 2;
    }
    Ordering::Equal
}

// sqrt(n) vs sqrt(a) + sqrt(b), exactly.
fn compare_sqrt_sum(n: &Rational, terms: &[Rational]) -> Ordering {
    let zero = Rational::zero();
    let a = terms.first().unwrap_or(&zero);
    let b = terms.get(1).unwrap_or(&zero);
    // sqrt(n) ? sqrt(a) + sqrt(b)  <=>  n - a - b ? 2 sqrt(ab)
    let lhs = n - a - b;
    let rhs_sq = Rational::from_integer(BigInt::from(4)) * a * b;
    if lhs.is_negative() {
        return Ordering::Less;
    }
    (&lhs * &lhs).cmp(&rhs_sq)
}

/// Rational `U >= (sum_k terms[k]^{1/p})^p`, tight to a few ulps at 64 bits.
/// Exact when every root is rational.
pub fn root_sum_pow_upper(terms: &[Rational], p: PNorm) -> Rational {
    let exact: Option<Vec<Rational>> = terms.iter().map(|c| exact_root(c, p)).collect();
    let sum = match exact {
        Some(roots) => roots.into_iter().fold(Rational::zero(), |a, r| a + r),
        None => terms.iter().fold(Rational::zero(), |a, c| a + root_bounds(c, p, 64).1),
    };
    Pow::pow(sum, p.p())
}
