//! Exhaustive enumeration of group elements inside `l_p` balls, and the
//! certificates built on top of it (separation, density, exact counts).
//!
//! A [`Lattice`] is a finitely generated subgroup of the finitely supported
//! rational sequences. When its generators admit a triangular structure
//! (every generator owns a coordinate that no older generator touches, as
//! with fresh-coordinate builds) they are used directly; otherwise the
//! Hermite basis supplies one. Either way the ball search is complete.

mod gram;
mod kernel;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::abelian;
use crate::exactvec::{
    compare_norm, compare_root_sum, distance_pow, norm_pow, root_sum_pow_upper, PNorm, PowThreshold, Rational,
    SparseVector,
};

pub use gram::enumerate_gram;
use kernel::{Kernel, Visit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("no coefficient bound can be derived for this generator set; supply a box bound")]
    BoundUnderivable,
    #[error("no group element lies within the search radius")]
    EmptyBall,
    #[error("scaled coordinates exceed the fixed-width search range")]
    Overflow,
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("operation requires p = 2 (got p = {0})")]
    UnsupportedNorm(u32),
}

/// Closed (or open, when `strict`) ball `||x - center|| <= radius`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallQuery {
    pub center: SparseVector,
    pub radius: PowThreshold,
    pub strict: bool,
}

impl BallQuery {
    pub fn closed(center: SparseVector, radius: PowThreshold) -> Self {
        BallQuery { center, radius, strict: false }
    }

    pub fn open(center: SparseVector, radius: PowThreshold) -> Self {
        BallQuery { center, radius, strict: true }
    }

    pub fn at_origin(radius: PowThreshold, strict: bool) -> Self {
        BallQuery { center: SparseVector::zero(), radius, strict }
    }

    pub fn contains(&self, x: &SparseVector, p: PNorm) -> bool {
        let d = distance_pow(x, &self.center, p);
        match d.cmp(self.radius.value()) {
            Ordering::Less => true,
            Ordering::Equal => !self.strict,
            Ordering::Greater => false,
        }
    }
}

/// A group element together with its coefficients in the lattice's
/// original generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallHit {
    pub coefficients: Vec<BigInt>,
    pub element: SparseVector,
    pub distance_pow: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchBound {
    /// Coefficient bounds derived from the triangular structure (complete).
    Derived,
    /// Every coefficient of the original generators limited to `[-k, k]`.
    Box(u64),
}

/// How the search region was bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundUsed {
    Triangular { levels: usize, scale: BigInt },
    Box { k: u64 },
    Vectors { count: usize },
}

impl fmt::Display for BoundUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundUsed::Triangular { levels, scale } => write!(f, "triangular({levels} levels, scale {scale})"),
            BoundUsed::Box { k } => write!(f, "box(|n| <= {k})"),
            BoundUsed::Vectors { count } => write!(f, "vectors({count})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallEnumeration {
    pub hits: Vec<BallHit>,
    pub bound: BoundUsed,
    /// False for box-bounded searches: the hits are then not known to be all
    /// of the group's elements in the ball.
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CertificateKind {
    SeparationOK,
    SeparationViolated,
    DensityOK,
    DensityGap,
    CountExact,
    ContactOK,
    ContactViolated,
    InclusionOK,
    PointFiniteOK,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::SeparationOK => "SeparationOK",
            CertificateKind::SeparationViolated => "SeparationViolated",
            CertificateKind::DensityOK => "DensityOK",
            CertificateKind::DensityGap => "DensityGap",
            CertificateKind::CountExact => "CountExact",
            CertificateKind::ContactOK => "ContactOK",
            CertificateKind::ContactViolated => "ContactViolated",
            CertificateKind::InclusionOK => "InclusionOK",
            CertificateKind::PointFiniteOK => "PointFiniteOK",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            CertificateKind::SeparationOK,
            CertificateKind::SeparationViolated,
            CertificateKind::DensityOK,
            CertificateKind::DensityGap,
            CertificateKind::CountExact,
            CertificateKind::ContactOK,
            CertificateKind::ContactViolated,
            CertificateKind::InclusionOK,
            CertificateKind::PointFiniteOK,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    pub fn is_ok(self) -> bool {
        !matches!(
            self,
            CertificateKind::SeparationViolated | CertificateKind::DensityGap | CertificateKind::ContactViolated
        )
    }
}

/// Verdict of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub witness: Option<SparseVector>,
    pub coefficients: Option<Vec<BigInt>>,
    pub count: Option<u64>,
    pub threshold: PowThreshold,
    pub strict: bool,
    pub bound: BoundUsed,
}

impl Certificate {
    pub fn is_ok(&self) -> bool {
        self.kind.is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Basis {
    vectors: Vec<SparseVector>,
    // basis[l] = sum_i transform[l][i] * generators[i]; None means identity
    transform: Option<Vec<Vec<BigInt>>>,
    coords: Vec<usize>,
    scale: BigInt,
    rows: Vec<Vec<(usize, BigInt)>>,
}

impl Basis {
    fn new(vectors: Vec<SparseVector>, transform: Option<Vec<Vec<BigInt>>>) -> Basis {
        let mut coords = BTreeMap::new();
        let mut scale = BigInt::one();
        for v in &vectors {
            for (i, x) in v.entries() {
                coords.insert(*i, ());
                scale = scale.lcm(x.denom());
            }
        }
        let coords: Vec<usize> = coords.into_keys().collect();
        let rows = vectors
            .iter()
            .map(|v| {
                v.entries()
                    .iter()
                    .map(|(i, x)| {
                        let pos = coords.binary_search(i).expect("coordinate collected above");
                        (pos, (x * Rational::from_integer(scale.clone())).to_integer())
                    })
                    .collect()
            })
            .collect();
        Basis { vectors, transform, coords, scale, rows }
    }

    /// Basis with a triangular structure in the given order, if one exists.
    fn triangular(vectors: &[SparseVector]) -> bool {
        let mut seen = BTreeMap::new();
        for v in vectors {
            let owns = v.support().any(|i| !seen.contains_key(&i));
            if !owns {
                return false;
            }
            for i in v.support() {
                seen.insert(i, ());
            }
        }
        true
    }
}

/// A finitely generated subgroup prepared for exact ball enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    p: PNorm,
    generators: Vec<SparseVector>,
    basis: Option<Basis>,
}

impl Lattice {
    /// Uses the generators directly when they are triangular in the given
    /// order (oldest first), otherwise a Hermite basis of the same group.
    pub fn new(p: PNorm, generators: Vec<SparseVector>) -> Result<Lattice, EnumError> {
        let basis = if Basis::triangular(&generators) {
            Basis::new(generators.clone(), None)
        } else {
            let (hnf, transform) = abelian::free_basis_with_transform(&generators);
            // Reversed Hermite rows: each row owns its pivot column.
            let vectors: Vec<_> = hnf.into_iter().rev().collect();
            let transform: Vec<_> = transform.into_iter().rev().collect();
            Basis::new(vectors, Some(transform))
        };
        Ok(Lattice { p, generators, basis: Some(basis) })
    }

    /// A lattice with no structural analysis; only box-bounded searches run.
    pub fn raw(p: PNorm, generators: Vec<SparseVector>) -> Lattice {
        Lattice { p, generators, basis: None }
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn generators(&self) -> &[SparseVector] {
        &self.generators
    }

    /// The basis used by the search (the generators themselves when they
    /// were already triangular).
    pub fn basis(&self) -> Option<&[SparseVector]> {
        self.basis.as_ref().map(|b| b.vectors.as_slice())
    }

    pub fn rank(&self) -> Option<usize> {
        self.basis.as_ref().map(|b| b.vectors.len())
    }

    pub fn with_norm(&self, p: PNorm) -> Lattice {
        Lattice { p, ..self.clone() }
    }

    fn coefficients(&self, coeffs: &[(usize, i64)]) -> Vec<BigInt> {
        let basis = self.basis.as_ref().expect("structured lattice");
        let mut out = vec![BigInt::zero(); self.generators.len()];
        for &(level, n) in coeffs {
            match &basis.transform {
                None => out[level] += n,
                Some(t) => {
                    for (o, x) in out.iter_mut().zip(&t[level]) {
                        *o += x * n;
                    }
                }
            }
        }
        out
    }

    fn element(&self, coeffs: &[(usize, i64)]) -> SparseVector {
        let basis = self.basis.as_ref().expect("structured lattice");
        coeffs.iter().fold(SparseVector::zero(), |acc, &(level, n)| {
            acc.add_scaled(&basis.vectors[level], &Rational::from_integer(BigInt::from(n)))
        })
    }

    fn kernel(&self, query: &BallQuery) -> Result<(Kernel, BigInt), EnumError> {
        let basis = self.basis.as_ref().ok_or(EnumError::BoundUnderivable)?;
        let p = self.p.p();
        let mut scale = basis.scale.clone();
        for (_, x) in query.center.entries() {
            scale = scale.lcm(x.denom());
        }
        let m = &scale / &basis.scale;
        let to_i128 = |x: BigInt| x.to_i128().ok_or(EnumError::Overflow);
        let mut extra = Vec::new();
        let mut center = Vec::with_capacity(query.center.nnz());
        for (i, x) in query.center.entries() {
            let pos = match basis.coords.binary_search(i) {
                Ok(pos) => pos,
                Err(_) => {
                    extra.push(*i);
                    basis.coords.len() + extra.len() - 1
                }
            };
            center.push((pos, to_i128((x * Rational::from_integer(scale.clone())).to_integer())?));
        }
        let rows = basis
            .rows
            .iter()
            .map(|row| row.iter().map(|(q, x)| Ok((*q, to_i128(x * &m)?))).collect())
            .collect::<Result<Vec<Vec<_>>, EnumError>>()?;
        let c = query.radius.value();
        let qp: BigInt = Pow::pow(&scale, p);
        let (quot, rem) = (c.numer() * &qp).div_rem(c.denom());
        let limit = if query.strict && rem.is_zero() { quot - 1 } else { quot };
        let limit = to_i128(limit)?;
        let positions = basis.coords.len() + extra.len();
        Ok((Kernel::new(p, positions, rows, &center, limit)?, qp))
    }

    /// Visits every element of the group in the ball, stopping early when
    /// the visitor breaks.
    pub fn for_each_in_ball<F>(&self, query: &BallQuery, mut f: F) -> Result<(), EnumError>
    where
        F: FnMut(BallHit) -> ControlFlow<()>,
    {
        let (mut kernel, qp) = self.kernel(query)?;
        let qp = Rational::from_integer(qp);
        kernel.run(&mut |v: Visit<'_>| {
            f(BallHit {
                coefficients: self.coefficients(v.coeffs),
                element: self.element(v.coeffs),
                distance_pow: Rational::from_integer(BigInt::from(v.cost)) / &qp,
            })
        })
    }

    /// True when some group element lies in the ball.
    pub fn ball_nonempty(&self, query: &BallQuery) -> Result<bool, EnumError> {
        let mut found = false;
        self.for_each_in_ball(query, |_| {
            found = true;
            ControlFlow::Break(())
        })?;
        Ok(found)
    }

    fn bound_used(&self) -> BoundUsed {
        match &self.basis {
            Some(b) => BoundUsed::Triangular { levels: b.vectors.len(), scale: b.scale.clone() },
            None => BoundUsed::Box { k: 0 },
        }
    }
}

/// All group elements `x` with `||x - center|| <= radius` (or `<` when
/// strict), sorted by element.
pub fn enumerate_group_ball(lattice: &Lattice, query: &BallQuery) -> Result<Vec<BallHit>, EnumError> {
    let mut hits = Vec::new();
    lattice.for_each_in_ball(query, |h| {
        hits.push(h);
        ControlFlow::Continue(())
    })?;
    hits.sort_by(|a, b| a.element.cmp(&b.element));
    Ok(hits)
}

/// Elements `x` with `||x - center|| <= sum_i t_i^{1/p}`, for radii whose
/// `p`-th power need not be rational. Searches an exact rational upper
/// bound, then filters exactly; a comparison that cannot be separated
/// numerically keeps the element.
pub fn enumerate_root_sum_ball(
    lattice: &Lattice,
    center: &SparseVector,
    terms: &[Rational],
) -> Result<Vec<BallHit>, EnumError> {
    let p = lattice.p();
    let upper = root_sum_pow_upper(terms, p);
    let query = BallQuery::closed(center.clone(), PowThreshold::new(upper).expect("nonnegative bound"));
    let mut hits = enumerate_group_ball(lattice, &query)?;
    hits.retain(|h| compare_root_sum(&h.distance_pow, terms, p) != Ordering::Greater);
    Ok(hits)
}

/// Ball enumeration under an explicit bound. A box bound enumerates the
/// coefficient box of the original generators and is never a certificate.
pub fn enumerate_group_ball_bounded(
    lattice: &Lattice,
    query: &BallQuery,
    bound: SearchBound,
) -> Result<BallEnumeration, EnumError> {
    match bound {
        SearchBound::Derived => Ok(BallEnumeration {
            hits: enumerate_group_ball(lattice, query)?,
            bound: lattice.bound_used(),
            certified: true,
        }),
        SearchBound::Box(k) => Ok(BallEnumeration {
            hits: enumerate_box(lattice.generators(), lattice.p(), query, k),
            bound: BoundUsed::Box { k },
            certified: false,
        }),
    }
}

fn enumerate_box(generators: &[SparseVector], p: PNorm, query: &BallQuery, k: u64) -> Vec<BallHit> {
    let k = k as i64;
    let mut found: BTreeMap<SparseVector, BallHit> = BTreeMap::new();
    let mut n = vec![-k; generators.len()];
    loop {
        let x = generators.iter().zip(&n).fold(SparseVector::zero(), |acc, (g, &c)| {
            if c == 0 {
                acc
            } else {
                acc.add_scaled(g, &Rational::from_integer(BigInt::from(c)))
            }
        });
        if query.contains(&x, p) && !found.contains_key(&x) {
            let d = distance_pow(&x, &query.center, p);
            found.insert(
                x.clone(),
                BallHit { coefficients: n.iter().map(|&c| BigInt::from(c)).collect(), element: x, distance_pow: d },
            );
        }
        let mut i = 0;
        loop {
            if i == n.len() {
                return found.into_values().collect();
            }
            if n[i] < k {
                n[i] += 1;
                break;
            }
            n[i] = -k;
            i += 1;
        }
    }
}

/// Separation check around the origin.
///
/// Non-strict: OK iff every nonzero element has `||x|| >= c^{1/p}`.
/// Strict: OK iff every nonzero element has `||x|| > c^{1/p}`.
/// A violation carries the shortest offending element.
pub fn verify_separation(lattice: &Lattice, threshold: &PowThreshold, strict: bool) -> Result<Certificate, EnumError> {
    let query = BallQuery { center: SparseVector::zero(), radius: threshold.clone(), strict: !strict };
    let mut best: Option<BallHit> = None;
    lattice.for_each_in_ball(&query, |h| {
        if !h.element.is_zero() {
            let better = match &best {
                None => true,
                Some(b) => (&h.distance_pow, &h.element) < (&b.distance_pow, &b.element),
            };
            if better {
                best = Some(h);
            }
        }
        ControlFlow::Continue(())
    })?;
    let (kind, witness, coefficients) = match best {
        None => (CertificateKind::SeparationOK, None, None),
        Some(h) => (CertificateKind::SeparationViolated, Some(h.element), Some(h.coefficients)),
    };
    Ok(Certificate {
        kind,
        witness,
        coefficients,
        count: None,
        threshold: threshold.clone(),
        strict,
        bound: lattice.bound_used(),
    })
}

/// All elements within `search_radius` of `x`, nearest first (ties in
/// element order). The head realizes `dist(x, D)`.
pub fn nearest_elements(
    lattice: &Lattice,
    x: &SparseVector,
    search_radius: &PowThreshold,
) -> Result<Vec<(SparseVector, Rational)>, EnumError> {
    let mut hits = enumerate_group_ball(lattice, &BallQuery::closed(x.clone(), search_radius.clone()))?;
    if hits.is_empty() {
        return Err(EnumError::EmptyBall);
    }
    hits.sort_by(|a, b| (&a.distance_pow, &a.element).cmp(&(&b.distance_pow, &b.element)));
    Ok(hits.into_iter().map(|h| (h.element, h.distance_pow)).collect())
}

/// OK iff every target has a group element within `r`; otherwise the first
/// offending target is the witness.
pub fn verify_density(lattice: &Lattice, targets: &[SparseVector], r: &PowThreshold) -> Result<Certificate, EnumError> {
    for t in targets {
        if !lattice.ball_nonempty(&BallQuery::closed(t.clone(), r.clone()))? {
            return Ok(Certificate {
                kind: CertificateKind::DensityGap,
                witness: Some(t.clone()),
                coefficients: None,
                count: Some(targets.len() as u64),
                threshold: r.clone(),
                strict: false,
                bound: lattice.bound_used(),
            });
        }
    }
    Ok(Certificate {
        kind: CertificateKind::DensityOK,
        witness: None,
        coefficients: None,
        count: Some(targets.len() as u64),
        threshold: r.clone(),
        strict: false,
        bound: lattice.bound_used(),
    })
}

/// Exact size of `D ∩ radius·B` (closed ball around the origin).
pub fn count_in_ball(lattice: &Lattice, radius: &PowThreshold) -> Result<Certificate, EnumError> {
    let mut count = 0u64;
    lattice.for_each_in_ball(&BallQuery::at_origin(radius.clone(), false), |_| {
        count += 1;
        ControlFlow::Continue(())
    })?;
    Ok(Certificate {
        kind: CertificateKind::CountExact,
        witness: None,
        coefficients: None,
        count: Some(count),
        threshold: radius.clone(),
        strict: false,
        bound: lattice.bound_used(),
    })
}

/// Greedy extraction: keep a point when it lies outside every ball of
/// radius `r` around the points kept so far (strict: distance `> r`,
/// otherwise `>= r`).
pub fn separated_subset(points: &[SparseVector], r: &PowThreshold, p: PNorm, strict: bool) -> Vec<SparseVector> {
    let mut picks: Vec<SparseVector> = Vec::new();
    for x in points {
        let far = picks.iter().all(|y| {
            let d = distance_pow(x, y, p);
            match d.cmp(r.value()) {
                Ordering::Greater => true,
                Ordering::Equal => !strict,
                Ordering::Less => false,
            }
        });
        if far {
            picks.push(x.clone());
        }
    }
    picks
}

/// The first `k` standard unit vectors; any two are exactly `2^{1/p}` apart.
pub fn kottman_witness(_p: PNorm, k: usize) -> Vec<SparseVector> {
    (0..k).map(SparseVector::unit).collect()
}

/// Independent re-check of a separation witness using vector arithmetic
/// only.
pub fn witness_violates(witness: &SparseVector, p: PNorm, threshold: &PowThreshold, strict: bool) -> bool {
    if witness.is_zero() {
        return false;
    }
    match compare_norm(witness, p, threshold) {
        Ordering::Less => true,
        Ordering::Equal => strict,
        Ordering::Greater => false,
    }
}

/// Smallest `norm_pow` among the given nonzero vectors.
pub fn min_norm_pow<'a, I: IntoIterator<Item = &'a SparseVector>>(vs: I, p: PNorm) -> Option<Rational> {
    vs.into_iter().filter(|v| !v.is_zero()).map(|v| norm_pow(v, p)).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> SparseVector {
        SparseVector::from_integers(v)
    }

    fn th(c: u64) -> PowThreshold {
        PowThreshold::from_integer(c)
    }

    fn q(num: i64, den: i64) -> Rational {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn elements(hits: &[BallHit]) -> Vec<SparseVector> {
        hits.iter().map(|h| h.element.clone()).collect()
    }

    #[test]
    fn square_lattice_ball() {
        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 0]), iv(&[0, 2])]).unwrap();
        let hits = enumerate_group_ball(&l, &BallQuery::at_origin(th(4), false)).unwrap();
        let mut expected = vec![iv(&[0]), iv(&[2]), iv(&[-2]), iv(&[0, 2]), iv(&[0, -2])];
        expected.sort();
        assert_eq!(elements(&hits), expected);
        for h in &hits {
            let back = abelian::combine(l.generators(), &h.coefficients);
            assert_eq!(back, h.element);
        }
    }

    #[test]
    fn multiples_of_three() {
        let l = Lattice::new(PNorm::L1, vec![iv(&[3])]).unwrap();
        let hits = enumerate_group_ball(&l, &BallQuery::at_origin(th(2), false)).unwrap();
        assert_eq!(elements(&hits), vec![SparseVector::zero()]);
    }

    #[test]
    fn single_generator_line() {
        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 1])]).unwrap();
        let hits = enumerate_group_ball(&l, &BallQuery::at_origin(th(5), false)).unwrap();
        assert_eq!(elements(&hits), vec![SparseVector::zero(), iv(&[-2, -1]), iv(&[2, 1])].tap_sort());
    }

    trait TapSort {
        fn tap_sort(self) -> Self;
    }

    impl TapSort for Vec<SparseVector> {
        fn tap_sort(mut self) -> Self {
            self.sort();
            self
        }
    }

    #[test]
    fn separation_examples() {
        let g = SparseVector::from_pairs([(0, q(3, 2)), (1, q(1, 1))]);
        let l = Lattice::new(PNorm::L1, vec![g]).unwrap();
        assert_eq!(verify_separation(&l, &th(2), false).unwrap().kind, CertificateKind::SeparationOK);

        let l = Lattice::new(PNorm::L1, vec![iv(&[2, 0]), iv(&[0, 2])]).unwrap();
        let c = verify_separation(&l, &th(2), true).unwrap();
        assert_eq!(c.kind, CertificateKind::SeparationViolated);
        let w = c.witness.unwrap();
        assert!(w == iv(&[2]) || w == iv(&[-2]));
        assert!(witness_violates(&w, PNorm::L1, &th(2), true));
        assert!(verify_separation(&l, &th(2), false).unwrap().is_ok());
    }

    #[test]
    fn nearest_examples() {
        let l = Lattice::new(PNorm::L2, vec![iv(&[2])]).unwrap();
        let near = nearest_elements(&l, &iv(&[1]), &th(1)).unwrap();
        assert_eq!(near, vec![(SparseVector::zero(), q(1, 1)), (iv(&[2]), q(1, 1))]);

        let d = iv(&[4]);
        assert_eq!(nearest_elements(&l, &d, &PowThreshold::zero()).unwrap(), vec![(d, q(0, 1))]);

        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 1])]).unwrap();
        assert_eq!(nearest_elements(&l, &iv(&[2]), &th(1)).unwrap(), vec![(iv(&[2, 1]), q(1, 1))]);

        assert_eq!(nearest_elements(&l, &iv(&[1]), &PowThreshold::zero()), Err(EnumError::EmptyBall));
    }

    #[test]
    fn density_examples() {
        let trivial = Lattice::new(PNorm::L2, vec![]).unwrap();
        let c = verify_density(&trivial, &[iv(&[3])], &th(1)).unwrap();
        assert_eq!(c.kind, CertificateKind::DensityGap);
        assert_eq!(c.witness, Some(iv(&[3])));

        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 0]), iv(&[0, 2])]).unwrap();
        assert!(verify_density(&l, &[iv(&[1, 1])], &th(2)).unwrap().is_ok());
        let near = nearest_elements(&l, &iv(&[1, 1]), &th(2)).unwrap();
        assert_eq!(near.len(), 4);
        assert!(near.iter().all(|(_, d)| *d == q(2, 1)));
    }

    #[test]
    fn count_examples() {
        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 0]), iv(&[0, 2])]).unwrap();
        assert_eq!(count_in_ball(&l, &th(4)).unwrap().count, Some(5));
        let trivial = Lattice::new(PNorm::L2, vec![]).unwrap();
        assert_eq!(count_in_ball(&trivial, &th(1000)).unwrap().count, Some(1));
    }

    #[test]
    fn separated_subset_examples() {
        let pts = [SparseVector::zero(), iv(&[1]), iv(&[3])];
        assert_eq!(separated_subset(&pts, &th(2), PNorm::L1, true), vec![SparseVector::zero(), iv(&[3])]);
        let far = [iv(&[5]), iv(&[0, 5]), iv(&[0, 0, 5])];
        assert_eq!(separated_subset(&far, &th(2), PNorm::L1, true), far.to_vec());
        let cluster = [iv(&[1]), iv(&[1, 1]), iv(&[0, 1])];
        assert_eq!(separated_subset(&cluster, &th(2), PNorm::L1, true).len(), 1);
    }

    #[test]
    fn kottman_examples() {
        for p in [PNorm::L1, PNorm::L2] {
            let w = kottman_witness(p, 3);
            assert_eq!(w.len(), 3);
            for (i, a) in w.iter().enumerate() {
                assert_eq!(norm_pow(a, p), q(1, 1));
                for b in &w[i + 1..] {
                    assert_eq!(distance_pow(a, b, p), q(2, 1));
                }
            }
        }
    }

    #[test]
    fn dependent_generators_use_hermite_basis() {
        let l = Lattice::new(PNorm::L2, vec![iv(&[2, 0]), iv(&[0, 2]), iv(&[2, 2])]).unwrap();
        assert_eq!(l.rank(), Some(2));
        let hits = enumerate_group_ball(&l, &BallQuery::at_origin(th(8), false)).unwrap();
        assert_eq!(hits.len(), 9);
        for h in &hits {
            assert_eq!(abelian::combine(l.generators(), &h.coefficients), h.element);
        }
    }

    #[test]
    fn raw_lattice_needs_box() {
        let l = Lattice::raw(PNorm::L2, vec![iv(&[2])]);
        let query = BallQuery::at_origin(th(16), false);
        assert_eq!(enumerate_group_ball(&l, &query), Err(EnumError::BoundUnderivable));
        let e = enumerate_group_ball_bounded(&l, &query, SearchBound::Box(1)).unwrap();
        assert!(!e.certified);
        assert_eq!(e.hits.len(), 3);
    }

    #[test]
    fn rational_center_and_entries() {
        let g = SparseVector::from_pairs([(0, q(1, 2)), (3, q(1, 1))]);
        let l = Lattice::new(PNorm::L2, vec![g.clone()]).unwrap();
        let center = SparseVector::from_pairs([(0, q(1, 4)), (5, q(1, 3))]);
        let hits = enumerate_group_ball(&l, &BallQuery::closed(center.clone(), PowThreshold::new(q(2, 1)).unwrap())).unwrap();
        for h in &hits {
            assert_eq!(h.distance_pow, distance_pow(&h.element, &center, PNorm::L2));
        }
        assert_eq!(elements(&hits), vec![SparseVector::zero(), g.neg(), g.clone()].tap_sort());
    }
}
