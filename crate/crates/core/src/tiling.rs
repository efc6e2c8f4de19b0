//! Voronoi cells as exact half-space polytopes (Hilbert case only), ball
//! tiles, and the tiling-level checks: inclusions, vertex contact, point
//! finiteness, non-disjointness and star degree.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed};

use crate::abelian;
use crate::enumerate::{
    self, BallQuery, BoundUsed, Certificate, CertificateKind, EnumError, Lattice,
};
use crate::exactvec::{norm_pow, PNorm, PowThreshold, Rational, SparseVector};
use crate::sampling::Sampler;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TilingError {
    #[error("operation requires p = 2 (got p = {0})")]
    NotHilbert(u32),
    #[error("density is not certified for the requested radius; cell is best effort")]
    DensityNotCertified(Box<HPolytope>),
    #[error("inclusion violated: {0:?}")]
    InclusionViolation(InclusionFailure),
    #[error("element of norm 2 that is not of the form ±2e_a: {witness}")]
    ContactViolation { witness: SparseVector },
    #[error("point lies in {count} tiles (bound {bound})")]
    PointFinitenessViolation { point: SparseVector, count: usize, bound: usize },
    #[error("every probed element d has d/2 in the group")]
    NoWitnessAtStage,
    #[error(transparent)]
    Enumerate(#[from] EnumError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InclusionFailure {
    /// A bounding hyperplane closer to the site than `R/2`.
    Inner { halfspace: HalfSpace },
    /// The ray along `direction` leaves the cell beyond `r`; `exit_pow` is
    /// `(t* ||v||)^2`, absent when the ray never leaves.
    Outer { direction: SparseVector, exit_pow: Option<Rational> },
}

/// `{x : <x, normal> <= offset}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: SparseVector,
    pub offset: Rational,
}

impl HalfSpace {
    /// `<x, normal> - offset`: negative inside, zero on the boundary.
    pub fn slack(&self, x: &SparseVector) -> Rational {
        x.dot(&self.normal) - &self.offset
    }

    /// Sign of [`HalfSpace::slack`] without reducing any fraction.
    pub fn side(&self, x: &SparseVector) -> Ordering {
        let (num, den) = x.dot_fraction(&self.normal);
        (num * self.offset.denom()).cmp(&(self.offset.numer() * den))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolytope {
    pub center: SparseVector,
    pub halfspaces: Vec<HalfSpace>,
    pub cutoff: PowThreshold,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

fn require_hilbert(lattice: &Lattice) -> Result<(), TilingError> {
    match lattice.p().p() {
        2 => Ok(()),
        p => Err(TilingError::NotHilbert(p)),
    }
}

/// The Voronoi cell of the site `d`, from every neighbour with
/// `||h - d|| <= 2 r_dense`. That cutoff is complete because the cell lies
/// inside `d + r_dense B`, where farther neighbours cannot bind.
///
/// `density` must be a `DensityOK` certificate at a radius no larger than
/// `r_dense`; otherwise the cell comes back inside `DensityNotCertified`.
pub fn voronoi_cell(
    lattice: &Lattice,
    d: &SparseVector,
    r_dense: &PowThreshold,
    density: Option<&Certificate>,
) -> Result<HPolytope, TilingError> {
    require_hilbert(lattice)?;
    let cutoff = r_dense.scaled_radius(2, lattice.p());
    let hits = enumerate::enumerate_group_ball(lattice, &BallQuery::closed(d.clone(), cutoff.clone()))?;
    let d_norm = d.dot(d);
    let two = Rational::from_integer(BigInt::from(2));
    let halfspaces: Vec<HalfSpace> = hits
        .into_iter()
        .filter(|h| &h.element != d)
        .map(|h| HalfSpace { normal: h.element.sub(d), offset: (h.element.dot(&h.element) - &d_norm) / &two })
        .collect();
    let certified = !halfspaces.is_empty()
        && density.is_some_and(|c| c.kind == CertificateKind::DensityOK && c.threshold.value() <= r_dense.value());
    let cell = HPolytope { center: d.clone(), halfspaces, cutoff, certified };
    if certified {
        Ok(cell)
    } else {
        Err(TilingError::DensityNotCertified(Box::new(cell)))
    }
}

/// Exact position of `x` relative to the cell.
pub fn cell_membership(cell: &HPolytope, x: &SparseVector) -> Membership {
    let mut boundary = false;
    for h in &cell.halfspaces {
        match h.side(x) {
            Ordering::Greater => return Membership::Outside,
            Ordering::Equal => boundary = true,
            Ordering::Less => {}
        }
    }
    if boundary {
        Membership::Boundary
    } else {
        Membership::Interior
    }
}

/// `R/2 B ⊆ V_0` (exactly, through every bounding hyperplane) and
/// `V_0 ⊆ r B` along each given direction (exact ray exit).
pub fn inclusion_check(
    cell: &HPolytope,
    r_sep: &PowThreshold,
    r_dense: &PowThreshold,
    directions: &[SparseVector],
) -> Result<Certificate, TilingError> {
    if !cell.certified {
        return Err(TilingError::DensityNotCertified(Box::new(cell.clone())));
    }
    let four = Rational::from_integer(BigInt::from(4));
    for h in &cell.halfspaces {
        // distance from 0 to the plane is offset / ||normal||
        let ok = !h.offset.is_negative() && &four * &h.offset * &h.offset >= r_sep.value() * h.normal.dot(&h.normal);
        if !ok {
            return Err(TilingError::InclusionViolation(InclusionFailure::Inner { halfspace: h.clone() }));
        }
    }
    for v in directions {
        let exit = ray_exit(cell, v);
        let exit_pow = exit.as_ref().map(|t| t * t * v.dot(v));
        let ok = exit_pow.as_ref().is_some_and(|e| e <= r_dense.value());
        if !ok {
            return Err(TilingError::InclusionViolation(InclusionFailure::Outer { direction: v.clone(), exit_pow }));
        }
    }
    Ok(Certificate {
        kind: CertificateKind::InclusionOK,
        witness: None,
        coefficients: None,
        count: Some(directions.len() as u64),
        threshold: r_dense.clone(),
        strict: false,
        bound: BoundUsed::Vectors { count: cell.halfspaces.len() },
    })
}

/// Largest `t` with `t v` in the cell (starting from the cell's site at the
/// origin), or `None` when the ray never leaves.
pub fn ray_exit(cell: &HPolytope, v: &SparseVector) -> Option<Rational> {
    cell.halfspaces
        .iter()
        .filter_map(|h| {
            let den = v.dot(&h.normal);
            den.is_positive().then(|| &h.offset / den)
        })
        .min()
}

/// Sites of all tiles `d + tile_radius B` containing `x`.
pub fn tiles_containing(lattice: &Lattice, x: &SparseVector, tile_radius: &PowThreshold) -> Result<Vec<SparseVector>, TilingError> {
    let hits = enumerate::enumerate_group_ball(lattice, &BallQuery::closed(x.clone(), tile_radius.clone()))?;
    Ok(hits.into_iter().map(|h| h.element).collect())
}

fn is_double_unit(x: &SparseVector) -> bool {
    let two = Rational::from_integer(BigInt::from(2));
    x.nnz() == 1 && x.entries()[0].1.abs() == two
}

/// Every element of `l_1` norm exactly 2 must be `±2e_a`.
pub fn verify_vertex_contact(lattice: &Lattice) -> Result<Certificate, TilingError> {
    let p = PNorm::L1;
    let l1 = lattice.with_norm(p);
    let two = PowThreshold::from_integer(2);
    let hits = enumerate::enumerate_group_ball(&l1, &BallQuery::at_origin(two.clone(), false))?;
    let mut contacts = 0u64;
    for h in hits {
        if norm_pow(&h.element, p) == *two.value() {
            if !is_double_unit(&h.element) {
                return Err(TilingError::ContactViolation { witness: h.element });
            }
            contacts += 1;
        }
    }
    Ok(Certificate {
        kind: CertificateKind::ContactOK,
        witness: None,
        coefficients: None,
        count: Some(contacts),
        threshold: two,
        strict: false,
        bound: BoundUsed::Triangular { levels: lattice.rank().unwrap_or(0), scale: BigInt::one() },
    })
}

/// Number of tiles containing each sample, failing when any exceeds `bound`.
pub fn point_finiteness(
    lattice: &Lattice,
    samples: &[SparseVector],
    tile_radius: &PowThreshold,
    bound: usize,
) -> Result<(Certificate, Vec<(SparseVector, usize)>), TilingError> {
    let mut counts = Vec::with_capacity(samples.len());
    for x in samples {
        let n = tiles_containing(lattice, x, tile_radius)?.len();
        if n > bound {
            return Err(TilingError::PointFinitenessViolation { point: x.clone(), count: n, bound });
        }
        counts.push((x.clone(), n));
    }
    let max = counts.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let cert = Certificate {
        kind: CertificateKind::PointFiniteOK,
        witness: None,
        coefficients: None,
        count: Some(max as u64),
        threshold: tile_radius.clone(),
        strict: false,
        bound: BoundUsed::Vectors { count: samples.len() },
    };
    Ok((cert, counts))
}

/// Two distinct intersecting tiles `(d, 2h)`: `d ∈ D` with `d/2 ∉ D` and `h`
/// a nearest element to `d/2`, so `||d - 2h|| = 2 ||d/2 - h|| <= 2 r`.
pub fn disjointness_witness(lattice: &Lattice, tile_radius: &PowThreshold) -> Result<(SparseVector, SparseVector), TilingError> {
    let p = lattice.p();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut probes: Vec<SparseVector> = lattice.basis().map(<[SparseVector]>::to_vec).unwrap_or_default();
    let reach = tile_radius.scaled_radius(2, p);
    let mut near: Vec<SparseVector> = enumerate::enumerate_group_ball(lattice, &BallQuery::at_origin(reach, false))?
        .into_iter()
        .map(|h| h.element)
        .filter(|x| !x.is_zero())
        .collect();
    near.sort_by(|a, b| (norm_pow(a, p), a).cmp(&(norm_pow(b, p), b)));
    probes.extend(near);
    for d in probes {
        let mid = d.scale(&half);
        if abelian::subgroup_membership(lattice.generators(), &mid).is_some() {
            continue;
        }
        match enumerate::nearest_elements(lattice, &mid, tile_radius) {
            Ok(list) => {
                let h2 = list[0].0.scale_int(2);
                return Ok((d, h2));
            }
            Err(EnumError::EmptyBall) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(TilingError::NoWitnessAtStage)
}

/// Number of tiles meeting the central tile: nonzero `h` with
/// `||h|| <= 2 tile_radius`.
pub fn star_degree(lattice: &Lattice, tile_radius: &PowThreshold) -> Result<usize, TilingError> {
    let c = tile_radius.scaled_radius(2, lattice.p());
    let count = enumerate::count_in_ball(lattice, &c)?.count.unwrap_or(0);
    Ok(count.saturating_sub(1) as usize)
}

/// Number of tiles `d + tile_radius B` meeting `x + delta B`, i.e.
/// `||x - d|| <= tile_radius + delta`.
pub fn local_tile_count(
    lattice: &Lattice,
    x: &SparseVector,
    delta: &PowThreshold,
    tile_radius: &PowThreshold,
) -> Result<usize, TilingError> {
    require_hilbert(lattice)?;
    let terms = [tile_radius.value().clone(), delta.value().clone()];
    Ok(enumerate::enumerate_root_sum_ball(lattice, x, &terms)?.len())
}

/// Seeded probe set: midpoints `(d + h) / 2` of close pairs of elements,
/// where tiles meet, mixed with random dyadic points on the group's
/// coordinates.
pub fn probe_points(lattice: &Lattice, tile_radius: &PowThreshold, seed: u64, count: usize) -> Result<Vec<SparseVector>, TilingError> {
    let p = lattice.p();
    let reach = tile_radius.scaled_radius(2, p);
    let near: Vec<SparseVector> = enumerate::enumerate_group_ball(lattice, &BallQuery::at_origin(reach, false))?
        .into_iter()
        .map(|h| h.element)
        .collect();
    let mut coords: Vec<usize> = lattice.generators().iter().flat_map(|g| g.support()).collect();
    coords.sort_unstable();
    coords.dedup();
    if coords.is_empty() {
        coords.push(0);
    }
    let mut rng = Sampler::new(seed, 0x7e57);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = if rng.below(2) == 0 && !near.is_empty() {
            let a = &near[rng.below(near.len() as u64) as usize];
            let b = &near[rng.below(near.len() as u64) as usize];
            a.add(b).scale(&half)
        } else {
            rng.dyadic_vector(&coords, 3, 2, 4)
        };
        out.push(x);
    }
    Ok(out)
}

/// Seeded nonzero directions supported on the given coordinates.
pub fn probe_directions(coords: &[usize], seed: u64, count: usize) -> Vec<SparseVector> {
    let mut rng = Sampler::new(seed, 0xd1e);
    (0..count).map(|_| rng.nonzero_dyadic_vector(coords, coords.len().min(4), 2, 4)).collect()
}

/// Seeded sample (without replacement) of the nonzero targets, used as ray
/// directions inside the processed region.
pub fn target_directions(targets: &[SparseVector], seed: u64, count: usize) -> Vec<SparseVector> {
    let mut pool: Vec<SparseVector> = targets.iter().filter(|t| !t.is_zero()).cloned().collect();
    Sampler::new(seed, 0xd1f).shuffle(&mut pool);
    pool.truncate(count);
    pool
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingReport {
    pub tile_radius: PowThreshold,
    pub star_degree: usize,
    pub ball_counts: Vec<(PowThreshold, u64)>,
    pub disjointness_witness: Option<(SparseVector, SparseVector)>,
    pub vertex_contact: Option<Certificate>,
    pub point_finiteness_samples: Vec<(SparseVector, usize)>,
    pub local_tile_counts: Vec<(SparseVector, usize)>,
}

/// Collects the tiling statistics for a lattice. Vertex contact is checked
/// for `p = 1` only and local tile counts (with `delta`) for `p = 2` only.
pub fn tiling_report(
    lattice: &Lattice,
    tile_radius: &PowThreshold,
    radii: &[PowThreshold],
    samples: &[SparseVector],
    delta: &PowThreshold,
) -> Result<TilingReport, TilingError> {
    let star = star_degree(lattice, tile_radius)?;
    let mut ball_counts = Vec::with_capacity(radii.len());
    for r in radii {
        ball_counts.push((r.clone(), enumerate::count_in_ball(lattice, r)?.count.unwrap_or(0)));
    }
    let disjointness = match disjointness_witness(lattice, tile_radius) {
        Ok(w) => Some(w),
        Err(TilingError::NoWitnessAtStage) => None,
        Err(e) => return Err(e),
    };
    let vertex_contact = if lattice.p().p() == 1 {
        match verify_vertex_contact(lattice) {
            Ok(c) => Some(c),
            Err(TilingError::ContactViolation { witness }) => Some(Certificate {
                kind: CertificateKind::ContactViolated,
                witness: Some(witness),
                coefficients: None,
                count: None,
                threshold: PowThreshold::from_integer(2),
                strict: false,
                bound: BoundUsed::Vectors { count: 0 },
            }),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let mut point_finiteness_samples = Vec::with_capacity(samples.len());
    for x in samples {
        point_finiteness_samples.push((x.clone(), tiles_containing(lattice, x, tile_radius)?.len()));
    }
    let mut local_tile_counts = Vec::new();
    if lattice.p().p() == 2 {
        for x in samples {
            local_tile_counts.push((x.clone(), local_tile_count(lattice, x, delta, tile_radius)?));
        }
    }
    Ok(TilingReport {
        tile_radius: tile_radius.clone(),
        star_degree: star,
        ball_counts,
        disjointness_witness: disjointness,
        vertex_contact,
        point_finiteness_samples,
        local_tile_counts,
    })
}

/// `true` when `(d, h2)` are distinct sites whose tiles of radius `r` meet:
/// `||d - h2||^p <= 2^p r^p`.
pub fn tiles_meet(d: &SparseVector, h2: &SparseVector, tile_radius: &PowThreshold, p: PNorm) -> bool {
    let bound = tile_radius.value() * Rational::from_integer(Pow::pow(BigInt::from(2), p.p()));
    d != h2 && crate::exactvec::distance_pow(d, h2, p) <= bound
}
