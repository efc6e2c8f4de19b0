//! JSON file formats. Every rational is a canonical `"num/den"` string and
//! every vector an array of `[index, "num/den"]` pairs.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Number;
use tilelat_core::abelian::IntegerMatrix;
use tilelat_core::builder::{
    BuildMode, EnumerationScheme, EpsilonSchedule, GeneratorRecord, SchemeKind, Subgroup,
};
use tilelat_core::enumerate::{BoundUsed, Certificate, CertificateKind};
use tilelat_core::exactvec::{format_rational, parse_rational, PNorm, PowThreshold, Rational, SparseVector};
use tilelat_core::tiling::{HPolytope, HalfSpace, TilingReport};

use crate::config::RunConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

pub type VectorJson = Vec<(usize, String)>;

pub fn rational_to_json(x: &Rational) -> String {
    format_rational(x)
}

pub fn rational_from_json(s: &str) -> Result<Rational, FormatError> {
    parse_rational(s).map_err(|e| invalid(e.to_string()))
}

pub fn threshold_from_json(s: &str) -> Result<PowThreshold, FormatError> {
    PowThreshold::new(rational_from_json(s)?).map_err(|e| invalid(e.to_string()))
}

pub fn vector_to_json(v: &SparseVector) -> VectorJson {
    v.entries().iter().map(|(i, x)| (*i, format_rational(x))).collect()
}

pub fn vector_from_json(v: &VectorJson) -> Result<SparseVector, FormatError> {
    let entries = v
        .iter()
        .map(|(i, s)| Ok((*i, rational_from_json(s)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    SparseVector::from_canonical(entries).map_err(|e| invalid(e.to_string()))
}

pub fn int_to_json(x: &BigInt) -> Number {
    Number::from_str(&x.to_string()).expect("integers are valid JSON numbers")
}

pub fn int_from_json(n: &Number) -> Result<BigInt, FormatError> {
    let s = n.to_string();
    BigInt::from_str(&s).map_err(|_| invalid(format!("expected an integer, got {s}")))
}

fn ints_to_json(xs: &[BigInt]) -> Vec<Number> {
    xs.iter().map(int_to_json).collect()
}

fn ints_from_json(xs: &[Number]) -> Result<Vec<BigInt>, FormatError> {
    xs.iter().map(int_from_json).collect()
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file structures serialize");
    s.push('\n');
    s
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(invalid(format!("unsupported format_version {v} (expected {FORMAT_VERSION})")))
    }
}

// ---------------------------------------------------------------- groups

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub kind: String,
    pub seed: u64,
    pub dim_step: usize,
    pub den_step: u32,
    pub mag_step: u64,
    pub stream_coords: usize,
    pub stream_support: usize,
    pub stream_den_exp: u32,
    pub stream_num: i64,
}

impl SchemeJson {
    pub fn from_scheme(s: &EnumerationScheme) -> Self {
        SchemeJson {
            kind: s.kind.name().to_string(),
            seed: s.seed,
            dim_step: s.dim_step,
            den_step: s.den_step,
            mag_step: s.mag_step,
            stream_coords: s.stream_coords,
            stream_support: s.stream_support,
            stream_den_exp: s.stream_den_exp,
            stream_num: s.stream_num,
        }
    }

    pub fn to_scheme(&self) -> Result<EnumerationScheme, FormatError> {
        let kind = SchemeKind::from_name(&self.kind).ok_or_else(|| invalid(format!("unknown scheme kind `{}`", self.kind)))?;
        if self.dim_step == 0 || self.mag_step == 0 || self.stream_coords == 0 || self.stream_support == 0 || self.stream_num <= 0 {
            return Err(invalid("scheme steps and stream bounds must be positive"));
        }
        Ok(EnumerationScheme {
            kind,
            seed: self.seed,
            dim_step: self.dim_step,
            den_step: self.den_step,
            mag_step: self.mag_step,
            stream_coords: self.stream_coords,
            stream_support: self.stream_support,
            stream_den_exp: self.stream_den_exp,
            stream_num: self.stream_num,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonJson {
    pub schedule: String,
    pub base: String,
}

impl EpsilonJson {
    pub fn from_schedule(e: &EpsilonSchedule) -> Self {
        let schedule = match e {
            EpsilonSchedule::Fixed(_) => "fixed",
            EpsilonSchedule::Halving(_) => "halving",
        };
        EpsilonJson { schedule: schedule.to_string(), base: format_rational(e.base()) }
    }

    pub fn to_schedule(&self) -> Result<EpsilonSchedule, FormatError> {
        let base = rational_from_json(&self.base)?;
        if base <= Rational::from_integer(BigInt::from(0)) {
            return Err(invalid("epsilon must be positive"));
        }
        match self.schedule.as_str() {
            "fixed" => Ok(EpsilonSchedule::Fixed(base)),
            "halving" => Ok(EpsilonSchedule::Halving(base)),
            other => Err(invalid(format!("unknown epsilon schedule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordJson {
    pub step: u64,
    pub fresh: usize,
    pub u: VectorJson,
    pub g: VectorJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub format_version: u32,
    pub config: RunConfig,
    pub p: u32,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonJson>,
    pub records: Vec<RecordJson>,
    pub scheme: Option<SchemeJson>,
    pub steps: u64,
}

impl GroupFile {
    pub fn from_subgroup(d: &Subgroup, config: RunConfig) -> Self {
        GroupFile {
            format_version: FORMAT_VERSION,
            config,
            p: d.p.p(),
            mode: d.mode.name().to_string(),
            epsilon: d.epsilon.as_ref().map(EpsilonJson::from_schedule),
            records: d
                .records
                .iter()
                .map(|r| RecordJson { step: r.step, fresh: r.fresh_index, u: vector_to_json(&r.u), g: vector_to_json(&r.g) })
                .collect(),
            scheme: d.scheme.as_ref().map(SchemeJson::from_scheme),
            steps: d.steps_consumed,
        }
    }

    /// Rebuilds the subgroup, re-checking that every record is a
    /// fresh-coordinate extension `g = u + x` owning `fresh`.
    pub fn to_subgroup(&self) -> Result<Subgroup, FormatError> {
        check_version(self.format_version)?;
        let p = PNorm::new(self.p).map_err(|e| invalid(e.to_string()))?;
        let mode = BuildMode::from_name(&self.mode).ok_or_else(|| invalid(format!("unknown mode `{}`", self.mode)))?;
        let epsilon = self.epsilon.as_ref().map(EpsilonJson::to_schedule).transpose()?;
        if (mode == BuildMode::RieszGeneral) != epsilon.is_some() {
            return Err(invalid("epsilon must be present exactly for riesz_general groups"));
        }
        let mut records = Vec::with_capacity(self.records.len());
        let mut owned = std::collections::BTreeSet::new();
        let mut last_step = None;
        for r in &self.records {
            let u = vector_from_json(&r.u)?;
            let g = vector_from_json(&r.g)?;
            if !g.contains_index(r.fresh) || u.contains_index(r.fresh) || !owned.insert(r.fresh) {
                return Err(invalid(format!("record at step {} does not own coordinate {}", r.step, r.fresh)));
            }
            if last_step.is_some_and(|s| s >= r.step) || r.step >= self.steps {
                return Err(invalid(format!("record steps must increase and stay below {}", self.steps)));
            }
            last_step = Some(r.step);
            records.push(GeneratorRecord { u, fresh_index: r.fresh, g, step: r.step });
        }
        let scheme = self.scheme.as_ref().map(SchemeJson::to_scheme).transpose()?;
        Ok(Subgroup::from_parts(p, mode, epsilon, records, scheme, self.steps))
    }
}

// ---------------------------------------------------------- certificates

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundJson {
    Triangular { levels: usize, scale: Number },
    Box { k: u64 },
    Vectors { count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    pub threshold: String,
    pub strict: bool,
    pub bound: BoundJson,
}

impl CertificateJson {
    pub fn from_certificate(c: &Certificate) -> Self {
        CertificateJson {
            kind: c.kind.name().to_string(),
            witness: c.witness.as_ref().map(vector_to_json),
            coefficients: c.coefficients.as_deref().map(ints_to_json),
            count: c.count,
            threshold: format_rational(c.threshold.value()),
            strict: c.strict,
            bound: match &c.bound {
                BoundUsed::Triangular { levels, scale } => BoundJson::Triangular { levels: *levels, scale: int_to_json(scale) },
                BoundUsed::Box { k } => BoundJson::Box { k: *k },
                BoundUsed::Vectors { count } => BoundJson::Vectors { count: *count },
            },
        }
    }

    pub fn to_certificate(&self) -> Result<Certificate, FormatError> {
        Ok(Certificate {
            kind: CertificateKind::from_name(&self.kind).ok_or_else(|| invalid(format!("unknown certificate kind `{}`", self.kind)))?,
            witness: self.witness.as_ref().map(vector_from_json).transpose()?,
            coefficients: self.coefficients.as_deref().map(ints_from_json).transpose()?,
            count: self.count,
            threshold: threshold_from_json(&self.threshold)?,
            strict: self.strict,
            bound: match &self.bound {
                BoundJson::Triangular { levels, scale } => BoundUsed::Triangular { levels: *levels, scale: int_from_json(scale)? },
                BoundJson::Box { k } => BoundUsed::Box { k: *k },
                BoundJson::Vectors { count } => BoundUsed::Vectors { count: *count },
            },
        })
    }
}

/// One named check in a certificate file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckJson {
    pub check: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub format_version: u32,
    pub config: RunConfig,
    pub processed_steps: u64,
    pub ok: bool,
    pub checks: Vec<CheckJson>,
}

// -------------------------------------------------------------- polytopes

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpaceJson {
    pub normal: VectorJson,
    pub offset: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub center: VectorJson,
    pub cutoff: String,
    pub certified: bool,
    pub halfspaces: Vec<HalfSpaceJson>,
}

impl PolytopeJson {
    pub fn from_polytope(c: &HPolytope) -> Self {
        PolytopeJson {
            center: vector_to_json(&c.center),
            cutoff: format_rational(c.cutoff.value()),
            certified: c.certified,
            halfspaces: c
                .halfspaces
                .iter()
                .map(|h| HalfSpaceJson { normal: vector_to_json(&h.normal), offset: format_rational(&h.offset) })
                .collect(),
        }
    }

    pub fn to_polytope(&self) -> Result<HPolytope, FormatError> {
        Ok(HPolytope {
            center: vector_from_json(&self.center)?,
            cutoff: threshold_from_json(&self.cutoff)?,
            certified: self.certified,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Ok(HalfSpace { normal: vector_from_json(&h.normal)?, offset: rational_from_json(&h.offset)? }))
                .collect::<Result<_, FormatError>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoronoiFile {
    pub format_version: u32,
    pub config: RunConfig,
    pub processed_steps: u64,
    pub cell: PolytopeJson,
    pub inclusion: CheckJson,
}

// --------------------------------------------------------------- matrices

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Number>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &IntegerMatrix) -> Self {
        MatrixJson { rows: m.rows(), cols: m.cols(), entries: (0..m.rows()).map(|i| ints_to_json(m.row(i))).collect() }
    }

    pub fn to_matrix(&self) -> Result<IntegerMatrix, FormatError> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(invalid(format!("matrix entries do not match {}x{}", self.rows, self.cols)));
        }
        let flat = self.entries.iter().flatten().map(int_from_json).collect::<Result<Vec<_>, _>>()?;
        IntegerMatrix::new(self.rows, self.cols, flat).map_err(|e| invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptJson {
    /// Row `i`: coefficients of basis vector `i` in the generators.
    pub basis_from_generators: Vec<Vec<Number>>,
    /// Row `j`: coefficients of generator `j` in the basis.
    pub generators_from_basis: Vec<Vec<Number>>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFile {
    pub format_version: u32,
    pub config: RunConfig,
    pub rank: usize,
    pub basis: Vec<VectorJson>,
    pub generators_are_basis: bool,
    pub transcript: TranscriptJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_forms: Option<NormalFormsJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormsJson {
    pub hermite: MatrixJson,
    pub hermite_transform: MatrixJson,
    pub smith: MatrixJson,
    pub smith_left: MatrixJson,
    pub smith_right: MatrixJson,
    pub invariant_factors: Vec<Number>,
}

/// A generator list: either a bare JSON array of vectors or `{ "generators": [...] }`.
pub fn generators_from_json(text: &str) -> Result<Vec<SparseVector>, FormatError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Gens {
        Bare(Vec<VectorJson>),
        Wrapped { generators: Vec<VectorJson> },
    }
    let list = match serde_json::from_str::<Gens>(text)? {
        Gens::Bare(v) | Gens::Wrapped { generators: v } => v,
    };
    list.iter().map(vector_from_json).collect()
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCountJson {
    pub radius: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub d: VectorJson,
    pub h2: VectorJson,
    pub distance_pow: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCountJson {
    pub point: VectorJson,
    pub tiles: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub config: RunConfig,
    pub p: u32,
    pub processed_steps: u64,
    pub generators: usize,
    pub tile_radius: String,
    pub star_degree: usize,
    pub ball_counts: Vec<BallCountJson>,
    pub disjointness_witness: Option<WitnessJson>,
    pub vertex_contact: Option<CertificateJson>,
    pub point_finiteness_samples: Vec<PointCountJson>,
    pub local_tile_counts: Vec<PointCountJson>,
}

impl ReportFile {
    pub fn from_report(r: &TilingReport, d: &Subgroup, config: RunConfig) -> Self {
        let p = d.p;
        let points = |xs: &[(SparseVector, usize)]| {
            xs.iter().map(|(x, n)| PointCountJson { point: vector_to_json(x), tiles: *n }).collect()
        };
        ReportFile {
            format_version: FORMAT_VERSION,
            config,
            p: p.p(),
            processed_steps: d.steps_consumed,
            generators: d.records.len(),
            tile_radius: format_rational(r.tile_radius.value()),
            star_degree: r.star_degree,
            ball_counts: r
                .ball_counts
                .iter()
                .map(|(c, n)| BallCountJson { radius: format_rational(c.value()), count: *n })
                .collect(),
            disjointness_witness: r.disjointness_witness.as_ref().map(|(a, b)| WitnessJson {
                d: vector_to_json(a),
                h2: vector_to_json(b),
                distance_pow: format_rational(&tilelat_core::exactvec::distance_pow(a, b, p)),
            }),
            vertex_contact: r.vertex_contact.as_ref().map(CertificateJson::from_certificate),
            point_finiteness_samples: points(&r.point_finiteness_samples),
            local_tile_counts: points(&r.local_tile_counts),
        }
    }

    /// Plot data: one row per series point. `x` is exact; `x_float` is for
    /// display only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,x,x_float_display_only,y\n");
        let float = |s: &str| rational_from_json(s).map(|r| ratio_to_f64(&r)).unwrap_or(f64::NAN);
        out.push_str(&format!("star_degree,{},{},{}\n", self.tile_radius, float(&self.tile_radius), self.star_degree));
        for b in &self.ball_counts {
            out.push_str(&format!("ball_count,{},{},{}\n", b.radius, float(&b.radius), b.count));
        }
        for (i, s) in self.point_finiteness_samples.iter().enumerate() {
            out.push_str(&format!("tiles_containing,{i},{i},{}\n", s.tiles));
        }
        for (i, s) in self.local_tile_counts.iter().enumerate() {
            out.push_str(&format!("local_tile_count,{i},{i},{}\n", s.tiles));
        }
        out
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(text)?)
}
