//! Greedy fresh-coordinate construction of separated, dense subgroups.
//!
//! Targets `u_0 = 0, u_1, ...` come from a deterministic injective
//! enumeration. A target within distance 1 of the current group is skipped;
//! otherwise `u + e_f` joins the generators, where `f` is the smallest
//! coordinate not used by any target or generator seen so far. Because `e_f`
//! is disjoint from everything older, every element splits as
//! `||d + n(u + e_f)||^p = ||d + n u||^p + |n|^p`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Pow};

use crate::abelian;
use crate::enumerate::{self, BallQuery, EnumError, Lattice};
use crate::exactvec::{root_sum_pow_upper, PNorm, PowThreshold, Rational, SparseVector};
use crate::sampling::Sampler;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("the configured norm provides no exact Riesz witness")]
    RieszOracleUnavailable,
    #[error("generator {index} is not an integer combination of the bounded elements")]
    GenerationGapWitness { index: usize, generator: SparseVector },
    #[error("operation requires {expected} mode")]
    WrongMode { expected: BuildMode },
    #[error("Riesz witness must own a coordinate unused so far")]
    InvalidWitness,
    #[error(transparent)]
    Enumerate(#[from] EnumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuildMode {
    ExactLp,
    RieszGeneral,
}

impl BuildMode {
    pub fn name(self) -> &'static str {
        match self {
            BuildMode::ExactLp => "exact_lp",
            BuildMode::RieszGeneral => "riesz_general",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "exact_lp" => Some(BuildMode::ExactLp),
            "riesz_general" => Some(BuildMode::RieszGeneral),
            _ => None,
        }
    }
}

impl core::fmt::Display for BuildMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratorRecord {
    pub u: SparseVector,
    pub fresh_index: usize,
    pub g: SparseVector,
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Grid,
    Stream,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Grid => "grid",
            SchemeKind::Stream => "stream",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "grid" => Some(SchemeKind::Grid),
            "stream" => Some(SchemeKind::Stream),
            _ => None,
        }
    }
}

/// Deterministic injective target sequence starting at `0`.
///
/// Grid level `L >= 1` holds the vectors supported in
/// `[0, dim_step * L)` with entries `k / 2^(den_step * (L - 1))` of absolute
/// value at most `mag_step * L`. Each level emits only the vectors absent
/// from the previous one, by increasing numerator weight `sum |k_i|`; a
/// nonzero seed shuffles inside each weight class.
///
/// Stream draws random vectors on `[0, stream_coords)` with at most
/// `stream_support` entries `k / 2^e`, `e <= stream_den_exp`,
/// `|k| <= stream_num`, dropping repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumerationScheme {
    pub kind: SchemeKind,
    pub seed: u64,
    pub dim_step: usize,
    pub den_step: u32,
    pub mag_step: u64,
    pub stream_coords: usize,
    pub stream_support: usize,
    pub stream_den_exp: u32,
    pub stream_num: i64,
}

impl EnumerationScheme {
    pub fn grid(seed: u64) -> Self {
        EnumerationScheme {
            kind: SchemeKind::Grid,
            seed,
            dim_step: 2,
            den_step: 1,
            mag_step: 1,
            stream_coords: 6,
            stream_support: 3,
            stream_den_exp: 3,
            stream_num: 8,
        }
    }

    pub fn stream(seed: u64) -> Self {
        EnumerationScheme { kind: SchemeKind::Stream, ..EnumerationScheme::grid(seed) }
    }

    pub fn candidates(&self) -> Candidates {
        Candidates::new(self.clone())
    }
}

/// Lazy iterator over the target sequence of a scheme.
pub struct Candidates {
    scheme: EnumerationScheme,
    level: u32,
    weight: u64,
    bucket: Vec<SparseVector>,
    pos: usize,
    emitted_zero: bool,
    seen: BTreeSet<SparseVector>,
    sampler: Sampler,
}

impl Candidates {
    fn new(scheme: EnumerationScheme) -> Self {
        let sampler = Sampler::new(scheme.seed, 0x5eed);
        Candidates {
            scheme,
            level: 1,
            weight: 0,
            bucket: Vec::new(),
            pos: 0,
            emitted_zero: false,
            seen: BTreeSet::new(),
            sampler,
        }
    }

    fn level_shape(&self, level: u32) -> (usize, u32, u64) {
        let s = &self.scheme;
        (s.dim_step * level as usize, s.den_step * (level - 1), s.mag_step * level as u64)
    }

    fn in_level(&self, level: u32, ks: &[i64], den_exp: u32) -> bool {
        if level == 0 {
            return false;
        }
        let (dims, e, mag) = self.level_shape(level);
        ks.iter().enumerate().all(|(i, &k)| {
            if k == 0 {
                return true;
            }
            if i >= dims {
                return false;
            }
            // k / 2^den_exp must be a multiple of 1 / 2^e
            let tz = k.trailing_zeros().min(63);
            let needed = den_exp.saturating_sub(tz);
            needed <= e && (k.unsigned_abs() as u128) <= (mag as u128) << den_exp
        })
    }

    fn fill_bucket(&mut self) {
        let (dims, e, mag) = self.level_shape(self.level);
        let kmax = (mag << e) as i64;
        let max_weight = kmax as u64 * dims as u64;
        loop {
            if self.weight > max_weight {
                self.level += 1;
                self.weight = 0;
                return self.fill_bucket();
            }
            let mut out = Vec::new();
            let mut ks = alloc::vec![0i64; dims];
            weight_vectors(&mut ks, 0, self.weight as i64, kmax, &mut |ks: &[i64]| {
                if !self.in_level(self.level - 1, ks, e) {
                    out.push(ks.to_vec());
                }
            });
            let w = self.weight;
            self.weight += 1;
            if out.is_empty() {
                continue;
            }
            if self.scheme.seed != 0 {
                let mut s = Sampler::new(self.scheme.seed, ((self.level as u64) << 32) | w);
                s.shuffle(&mut out);
            }
            let den = BigInt::one() << e;
            self.bucket = out
                .into_iter()
                .map(|ks| {
                    SparseVector::from_pairs(
                        ks.into_iter().enumerate().map(|(i, k)| (i, Rational::new(BigInt::from(k), den.clone()))),
                    )
                })
                .collect();
            self.pos = 0;
            return;
        }
    }

    fn next_stream(&mut self) -> SparseVector {
        let s = self.scheme.clone();
        let coords: Vec<usize> = (0..s.stream_coords).collect();
        loop {
            let v = self.sampler.dyadic_vector(&coords, s.stream_support, s.stream_den_exp, s.stream_num);
            if self.seen.insert(v.clone()) {
                return v;
            }
        }
    }
}

// All integer vectors with sum |k_i| = rem over positions i.., |k_i| <= kmax.
fn weight_vectors(ks: &mut [i64], i: usize, rem: i64, kmax: i64, emit: &mut dyn FnMut(&[i64])) {
    if i + 1 == ks.len() {
        if rem <= kmax {
            ks[i] = rem;
            emit(ks);
            if rem > 0 {
                ks[i] = -rem;
                emit(ks);
            }
            ks[i] = 0;
        }
        return;
    }
    if ks.is_empty() {
        if rem == 0 {
            emit(ks);
        }
        return;
    }
    let tail_cap = kmax * (ks.len() - i - 1) as i64;
    for a in 0..=rem.min(kmax) {
        if rem - a > tail_cap {
            continue;
        }
        ks[i] = a;
        weight_vectors(ks, i + 1, rem - a, kmax, emit);
        if a > 0 {
            ks[i] = -a;
            weight_vectors(ks, i + 1, rem - a, kmax, emit);
        }
    }
    ks[i] = 0;
}

impl Iterator for Candidates {
    type Item = SparseVector;

    fn next(&mut self) -> Option<SparseVector> {
        if !self.emitted_zero {
            self.emitted_zero = true;
            if self.scheme.kind == SchemeKind::Stream {
                self.seen.insert(SparseVector::zero());
            } else {
                // the zero vector is the whole weight-0 class of level 1
                self.weight = 1;
            }
            return Some(SparseVector::zero());
        }
        match self.scheme.kind {
            SchemeKind::Stream => Some(self.next_stream()),
            SchemeKind::Grid => {
                if self.pos >= self.bucket.len() {
                    self.fill_bucket();
                }
                self.pos += 1;
                Some(self.bucket[self.pos - 1].clone())
            }
        }
    }
}

/// The first `count` targets of the scheme.
pub fn enumerate_candidates(scheme: &EnumerationScheme, count: usize) -> Vec<SparseVector> {
    scheme.candidates().take(count).collect()
}

/// Per-step tolerance for the Riesz construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EpsilonSchedule {
    Fixed(Rational),
    /// `eps_n = eps_0 / 2^n` at step `n`.
    Halving(Rational),
}

impl EpsilonSchedule {
    pub fn at(&self, step: u64) -> Rational {
        match self {
            EpsilonSchedule::Fixed(e) => e.clone(),
            EpsilonSchedule::Halving(e) => {
                let shift = step.min(4096) as usize;
                e / Rational::from_integer(BigInt::one() << shift)
            }
        }
    }

    pub fn base(&self) -> &Rational {
        match self {
            EpsilonSchedule::Fixed(e) | EpsilonSchedule::Halving(e) => e,
        }
    }
}

/// A norm that can be evaluated exactly and can produce Riesz witnesses.
pub trait NormOracle {
    /// The `l_p` exponent used for exact enumeration, if the norm is one.
    fn lp(&self) -> Option<PNorm>;

    /// Some `x` with `||x|| <= 1 + eps` and `dist(x, span) >= 1`, where
    /// `span` is spanned by `vectors`. `unused` is the smallest coordinate
    /// outside every support seen so far.
    fn riesz_witness(&self, vectors: &[SparseVector], unused: usize, eps: &Rational) -> Option<SparseVector>;
}

/// The `l_p` norm: returns `e_unused`, which has norm 1 and satisfies
/// `||e_unused - z||^p = 1 + ||z||^p` for every `z` in the span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOracle(pub PNorm);

impl NormOracle for LpOracle {
    fn lp(&self) -> Option<PNorm> {
        Some(self.0)
    }

    fn riesz_witness(&self, _vectors: &[SparseVector], unused: usize, _eps: &Rational) -> Option<SparseVector> {
        Some(SparseVector::unit(unused))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub p: PNorm,
    pub mode: BuildMode,
    pub epsilon: Option<EpsilonSchedule>,
    pub records: Vec<GeneratorRecord>,
    pub steps_consumed: u64,
    pub scheme: Option<EnumerationScheme>,
    seen: BTreeSet<usize>,
}

impl Subgroup {
    /// The trivial group `{0}`.
    pub fn trivial(p: PNorm) -> Self {
        Subgroup {
            p,
            mode: BuildMode::ExactLp,
            epsilon: None,
            records: Vec::new(),
            steps_consumed: 0,
            scheme: None,
            seen: BTreeSet::new(),
        }
    }

    pub fn trivial_riesz(p: PNorm, epsilon: EpsilonSchedule) -> Self {
        Subgroup { mode: BuildMode::RieszGeneral, epsilon: Some(epsilon), ..Subgroup::trivial(p) }
    }

    /// Reassembles a subgroup from stored parts; the used coordinates are
    /// recomputed from the records and the processed targets.
    pub fn from_parts(
        p: PNorm,
        mode: BuildMode,
        epsilon: Option<EpsilonSchedule>,
        records: Vec<GeneratorRecord>,
        scheme: Option<EnumerationScheme>,
        steps_consumed: u64,
    ) -> Self {
        let mut s = Subgroup { p, mode, epsilon, records, steps_consumed, scheme, seen: BTreeSet::new() };
        let mut seen = BTreeSet::new();
        for r in &s.records {
            seen.extend(r.u.support());
            seen.extend(r.g.support());
        }
        if let Some(targets) = s.processed_targets() {
            for t in &targets {
                seen.extend(t.support());
            }
        }
        s.seen = seen;
        s
    }

    pub fn generators(&self) -> Vec<SparseVector> {
        self.records.iter().map(|r| r.g.clone()).collect()
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.p, self.generators()).expect("generator records are triangular")
    }

    /// Coordinates touched by any target or generator so far.
    pub fn used_coordinates(&self) -> &BTreeSet<usize> {
        &self.seen
    }

    /// Smallest coordinate outside every support seen so far and outside `u`.
    pub fn next_fresh(&self, u: &SparseVector) -> usize {
        let mut f = 0;
        loop {
            if !self.seen.contains(&f) && !u.contains_index(f) {
                return f;
            }
            f += 1;
        }
    }

    /// The targets processed so far, when the subgroup came from a scheme.
    pub fn processed_targets(&self) -> Option<Vec<SparseVector>> {
        self.scheme.as_ref().map(|s| enumerate_candidates(s, self.steps_consumed as usize))
    }

    pub fn skipped(&self) -> u64 {
        self.steps_consumed - self.records.len() as u64
    }

    fn note(&mut self, u: &SparseVector) {
        self.seen.extend(u.support());
        self.steps_consumed += 1;
    }

    fn push(&mut self, u: SparseVector, fresh: usize, g: SparseVector, step: u64) {
        self.seen.extend(g.support());
        self.records.push(GeneratorRecord { u, fresh_index: fresh, g, step });
    }
}

fn within(lattice: &Lattice, u: &SparseVector, c: PowThreshold) -> Result<bool, EnumError> {
    lattice.ball_nonempty(&BallQuery::closed(u.clone(), c))
}

/// One greedy step in the exact `l_p` construction.
pub fn step_lp(mut state: Subgroup, u: &SparseVector) -> Result<Subgroup, BuildError> {
    if state.mode != BuildMode::ExactLp {
        return Err(BuildError::WrongMode { expected: BuildMode::ExactLp });
    }
    let close = within(&state.lattice(), u, PowThreshold::from_integer(1))?;
    let fresh = state.next_fresh(u);
    let step = state.steps_consumed;
    state.note(u);
    if !close {
        let g = u.add(&SparseVector::unit(fresh));
        state.push(u.clone(), fresh, g, step);
    }
    Ok(state)
}

/// Folds [`step_lp`] over the first `steps` targets of `scheme`.
pub fn build_lp(p: PNorm, scheme: &EnumerationScheme, steps: usize) -> Result<Subgroup, BuildError> {
    build_lp_from(p, scheme.candidates().take(steps), Some(scheme.clone()))
}

/// Folds [`step_lp`] over explicit targets.
pub fn build_lp_from<I>(p: PNorm, targets: I, scheme: Option<EnumerationScheme>) -> Result<Subgroup, BuildError>
where
    I: IntoIterator<Item = SparseVector>,
{
    let mut state = Subgroup::trivial(p);
    for u in targets {
        state = step_lp(state, &u)?;
    }
    state.scheme = scheme;
    Ok(state)
}

/// One step of the Riesz-lemma construction with tolerance `eps`.
pub fn step_riesz(state: Subgroup, u: &SparseVector, eps: &Rational) -> Result<Subgroup, BuildError> {
    let oracle = LpOracle(state.p);
    step_riesz_with(state, u, eps, &oracle)
}

pub fn step_riesz_with(
    mut state: Subgroup,
    u: &SparseVector,
    eps: &Rational,
    oracle: &dyn NormOracle,
) -> Result<Subgroup, BuildError> {
    if state.mode != BuildMode::RieszGeneral {
        return Err(BuildError::WrongMode { expected: BuildMode::RieszGeneral });
    }
    let p = oracle.lp().ok_or(BuildError::RieszOracleUnavailable)?;
    let one_eps = Rational::one() + eps;
    let c = PowThreshold::new(Pow::pow(&one_eps, p.p())).map_err(|_| BuildError::InvalidWitness)?;
    let close = within(&state.lattice().with_norm(p), u, c)?;
    let fresh = state.next_fresh(u);
    let step = state.steps_consumed;
    state.note(u);
    if close {
        return Ok(state);
    }
    let mut span = state.generators();
    span.push(u.clone());
    let x = oracle.riesz_witness(&span, fresh, eps).ok_or(BuildError::RieszOracleUnavailable)?;
    let owned = x.support().find(|i| !state.seen.contains(i) && !u.contains_index(*i));
    let Some(owned) = owned else {
        return Err(BuildError::InvalidWitness);
    };
    let g = u.add(&x);
    state.push(u.clone(), owned, g, step);
    Ok(state)
}

/// Folds [`step_riesz`] over the first `steps` targets, with the tolerance
/// taken from `schedule` at each step.
pub fn build_riesz(
    p: PNorm,
    scheme: &EnumerationScheme,
    steps: usize,
    schedule: EpsilonSchedule,
) -> Result<Subgroup, BuildError> {
    let mut state = Subgroup::trivial_riesz(p, schedule.clone());
    for (n, u) in scheme.candidates().take(steps).enumerate() {
        state = step_riesz(state, &u, &schedule.at(n as u64))?;
    }
    state.scheme = Some(scheme.clone());
    Ok(state)
}

/// Elements of norm at most `2r + eps` together with, for every original
/// generator, integer coefficients over those elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedGenerators {
    pub elements: Vec<SparseVector>,
    pub memberships: Vec<Vec<BigInt>>,
    pub radius_pow_upper: Rational,
}

/// `S = D ∩ (2r + eps)B` with a certificate that `S` generates `D`.
pub fn bounded_generators(d: &Subgroup, r: &PowThreshold, eps: &Rational) -> Result<BoundedGenerators, BuildError> {
    let p = d.p;
    let two_r = r.value() * Rational::from_integer(BigInt::from(2u32).pow(p.p()));
    let terms = [two_r, p.pow_abs(eps)];
    let upper = root_sum_pow_upper(&terms, p);
    let hits = enumerate::enumerate_root_sum_ball(&d.lattice(), &SparseVector::zero(), &terms)?;
    let elements: Vec<SparseVector> = hits.into_iter().map(|h| h.element).collect();
    let gens = d.generators();
    let memberships = abelian::membership_many(&elements, &gens);
    let mut out = Vec::with_capacity(gens.len());
    for (index, (m, g)) in memberships.into_iter().zip(&gens).enumerate() {
        match m {
            Some(m) => out.push(m),
            None => return Err(BuildError::GenerationGapWitness { index, generator: g.clone() }),
        }
    }
    Ok(BoundedGenerators { elements, memberships: out, radius_pow_upper: upper })
}

/// Summary counts for a build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildSummary {
    pub generators: usize,
    pub skipped: u64,
    pub coordinates: usize,
}

pub fn summarize(d: &Subgroup) -> BuildSummary {
    BuildSummary { generators: d.records.len(), skipped: d.skipped(), coordinates: d.seen.len() }
}

/// Coordinate usage histogram: how many generators touch each coordinate.
pub fn coordinate_usage(d: &Subgroup) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for r in &d.records {
        for i in r.g.support() {
            *m.entry(i).or_insert(0) += 1;
        }
    }
    m
}
