//! JSON file formats for spaces, fields, gradients and experiment inputs.
//!
//! Exponents may be written as numbers or as the string `"inf"`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hajlasz_core::backend::Backend;
use hajlasz_core::lp_bands::BandNormalization;
use hajlasz_core::optimize::{Method, SolverConfig};
use hajlasz_core::qcmap::{MapFamily, MapSample};
use hajlasz_core::{
    FamilyKind, FunctionFamilySpec, GradientSequence, MetricMeasureSpace, NormFamily, NormParams, ScalarField,
    ScaleWindow, Topology,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::content_hash;

/// Serde adapter for exponents in `(0, inf]`.
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_exponent(t: &str) -> std::result::Result<f64, String> {
    match t.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|_| format!("`{t}` is not a number or `inf`")),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Write via a temporary sibling and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.{}.tmp", std::process::id(), unique()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn unique() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static NEXT: AtomicU64 = AtomicU64::new(0);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    PeriodicGrid { n_dim: usize, resolution: usize, side_length: f64 },
    EuclideanGrid { n_dim: usize, resolution: usize, side_length: f64 },
    PointCloud,
}

/// `{"topology": ..., "coords": [[...]], "dist": [[...]], "measure": [...]}`.
///
/// Grids are rebuilt from the topology; `measure`, when present, replaces the
/// uniform cell measure. Point clouds need `coords` or `dist`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub topology: TopologySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<f64>>,
}

impl SpaceFile {
    pub fn grid(n_dim: usize, resolution: usize, side_length: f64, periodic: bool) -> Self {
        let topology = if periodic {
            TopologySpec::PeriodicGrid { n_dim, resolution, side_length }
        } else {
            TopologySpec::EuclideanGrid { n_dim, resolution, side_length }
        };
        SpaceFile { topology, coords: None, dist: None, measure: None }
    }

    /// Full description of `space`; grids carry coordinates for downstream tools.
    pub fn describe(space: &MetricMeasureSpace) -> Self {
        let topology = match space.topology() {
            Topology::PeriodicGrid(g) => {
                TopologySpec::PeriodicGrid { n_dim: g.n_dim, resolution: g.resolution, side_length: g.side_length }
            }
            Topology::EuclideanGrid(g) => {
                TopologySpec::EuclideanGrid { n_dim: g.n_dim, resolution: g.resolution, side_length: g.side_length }
            }
            Topology::PointCloud => TopologySpec::PointCloud,
        };
        let n = space.len();
        let coords: Option<Vec<Vec<f64>>> = (0..n).map(|i| space.coords(i).map(|c| c.to_vec())).collect();
        let dist = if coords.is_none() {
            Some((0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect())
        } else {
            None
        };
        SpaceFile { topology, coords, dist, measure: Some(space.measures().to_vec()) }
    }

    pub fn build(&self) -> Result<MetricMeasureSpace> {
        let space = match &self.topology {
            TopologySpec::PeriodicGrid { n_dim, resolution, side_length } => {
                MetricMeasureSpace::build_periodic_grid(*n_dim, *resolution, *side_length)?
            }
            TopologySpec::EuclideanGrid { n_dim, resolution, side_length } => {
                MetricMeasureSpace::build_euclidean_grid(*n_dim, *resolution, *side_length)?
            }
            TopologySpec::PointCloud => {
                let n = self.coords.as_ref().map(|c| c.len()).or(self.dist.as_ref().map(|d| d.len()));
                let n = n.ok_or_else(|| Error::spec("space", "a point cloud needs `coords` or `dist`"))?;
                let measure = self.measure.clone().unwrap_or_else(|| vec![1.0; n]);
                return Ok(match (&self.dist, &self.coords) {
                    (Some(d), _) => MetricMeasureSpace::build_point_cloud(d, &measure)?,
                    (None, Some(c)) => MetricMeasureSpace::from_coords(c, &measure)?,
                    (None, None) => unreachable!(),
                });
            }
        };
        match &self.measure {
            Some(m) if m.as_slice() != space.measures() => Ok(space.with_measure(m.clone())?),
            _ => Ok(space),
        }
    }

    /// Hash of the full description, used to tie fields to their space.
    pub fn hash_of(space: &MetricMeasureSpace) -> String {
        content_hash(&SpaceFile::describe(space))
    }
}

/// `{"space": <hash>, "values": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldFileSet {
    One(FieldFile),
    Many(Vec<FieldFile>),
}

impl FieldFileSet {
    pub fn into_vec(self) -> Vec<FieldFile> {
        match self {
            FieldFileSet::One(f) => vec![f],
            FieldFileSet::Many(v) => v,
        }
    }
}

/// Load field `index` from a field file and check it belongs to `space`.
pub fn load_field(path: &Path, index: usize, space: &MetricMeasureSpace) -> Result<ScalarField> {
    let set: FieldFileSet = read_json(path)?;
    let mut all = set.into_vec();
    if index >= all.len() {
        return Err(Error::Usage(format!("{} holds {} fields, index {index} requested", path.display(), all.len())));
    }
    let f = all.swap_remove(index);
    if let Some(h) = &f.space {
        if *h != SpaceFile::hash_of(space) {
            return Err(Error::Usage(format!("{} was generated on a different space", path.display())));
        }
    }
    let field = ScalarField::new(f.values)?;
    field.check_on(space)?;
    Ok(field)
}

/// `{"window": [kmin, kmax], "g": {"k": [...per point...]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientFile {
    pub window: [i32; 2],
    pub g: BTreeMap<String, Vec<f64>>,
}

impl GradientFile {
    pub fn from_sequence(seq: &GradientSequence) -> Self {
        let w = seq.window();
        GradientFile { window: [w.k_min, w.k_max], g: seq.levels().map(|(k, l)| (k.to_string(), l.to_vec())).collect() }
    }

    /// Scales missing from `g` are zero.
    pub fn to_sequence(&self, n: usize) -> Result<GradientSequence> {
        let window = ScaleWindow::new(self.window[0], self.window[1])?;
        let mut levels = vec![vec![0.0; n]; window.len()];
        for (k, v) in &self.g {
            let k: i32 = k.parse().map_err(|_| Error::spec(format!("g.{k}"), "scale keys must be integers"))?;
            if !window.contains(k) {
                return Err(Error::spec(format!("g.{k}"), "scale outside the window"));
            }
            if v.len() != n {
                return Err(Error::spec(format!("g.{k}"), format!("expected {n} values, found {}", v.len())));
            }
            levels[(k - window.k_min) as usize] = v.clone();
        }
        Ok(GradientSequence::from_levels(window, levels)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyName {
    M,
    N,
    F,
    B,
    BP,
    #[serde(rename = "sobolev", alias = "Sobolev")]
    Sobolev,
}

impl FamilyName {
    pub fn core(self) -> NormFamily {
        match self {
            FamilyName::M => NormFamily::M,
            FamilyName::N => NormFamily::N,
            FamilyName::F => NormFamily::F,
            FamilyName::B => NormFamily::B,
            FamilyName::BP => NormFamily::BP,
            FamilyName::Sobolev => NormFamily::Sobolev,
        }
    }

    pub fn of(f: NormFamily) -> Self {
        match f {
            NormFamily::M => FamilyName::M,
            NormFamily::N => FamilyName::N,
            NormFamily::F => FamilyName::F,
            NormFamily::B => FamilyName::B,
            NormFamily::BP => FamilyName::BP,
            NormFamily::Sobolev => FamilyName::Sobolev,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FamilyName::M => "M",
            FamilyName::N => "N",
            FamilyName::F => "F",
            FamilyName::B => "B",
            FamilyName::BP => "BP",
            FamilyName::Sobolev => "sobolev",
        }
    }

    pub fn parse(t: &str) -> std::result::Result<Self, String> {
        match t {
            "M" => Ok(FamilyName::M),
            "N" => Ok(FamilyName::N),
            "F" => Ok(FamilyName::F),
            "B" => Ok(FamilyName::B),
            "BP" => Ok(FamilyName::BP),
            "sobolev" | "Sobolev" => Ok(FamilyName::Sobolev),
            _ => Err(format!("unknown norm family `{t}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsSpec {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub family: FamilyName,
}

impl ParamsSpec {
    pub fn new(s: f64, p: f64, q: f64, family: FamilyName) -> Self {
        ParamsSpec { s, p, q, family }
    }

    pub fn of(p: &NormParams) -> Self {
        ParamsSpec { s: p.s, p: p.p, q: p.q, family: FamilyName::of(p.family) }
    }

    pub fn to_core(&self) -> Result<NormParams> {
        Ok(NormParams::new(self.s, self.p, self.q, self.family.core())?)
    }

    pub fn with_family(&self, family: FamilyName) -> Self {
        ParamsSpec { family, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKindSpec {
    TrigPolynomial { degree: u32 },
    BumpMixture { bumps: usize, width: (f64, f64), center_radius: f64 },
    LipschitzRandom { anchors: usize, lipschitz: f64 },
    Constant,
}

fn unit_amplitude() -> (f64, f64) {
    (1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(flatten)]
    pub kind: FamilyKindSpec,
    pub count: usize,
    #[serde(default = "unit_amplitude")]
    pub amplitude: (f64, f64),
    /// Falls back to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FamilyFile {
    pub fn to_core(&self, default_seed: u64) -> FunctionFamilySpec {
        let kind = match self.kind {
            FamilyKindSpec::TrigPolynomial { degree } => FamilyKind::TrigPolynomial { degree },
            FamilyKindSpec::BumpMixture { bumps, width, center_radius } => {
                FamilyKind::BumpMixture { bumps, width, center_radius }
            }
            FamilyKindSpec::LipschitzRandom { anchors, lipschitz } => FamilyKind::LipschitzRandom { anchors, lipschitz },
            FamilyKindSpec::Constant => FamilyKind::Constant,
        };
        FunctionFamilySpec::new(kind, self.count, self.amplitude, self.seed.unwrap_or(default_seed))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Auto,
    Dual,
    Barrier,
}

impl MethodName {
    pub fn core(self) -> Method {
        match self {
            MethodName::Auto => Method::Auto,
            MethodName::Dual => Method::DualAscent,
            MethodName::Barrier => Method::Barrier,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationName {
    #[default]
    Partition,
    SquaredPartition,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_k0() -> u32 {
    1
}

fn default_sharpness() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Optimal {
        #[serde(default)]
        method: MethodName,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iters: Option<usize>,
    },
    Difference {
        #[serde(default = "default_k0")]
        k0: u32,
    },
    Grand,
    Lp {
        #[serde(default = "default_sharpness")]
        sharpness: f64,
        #[serde(default)]
        normalization: NormalizationName,
    },
}

impl BackendSpec {
    pub fn optimal() -> Self {
        BackendSpec::Optimal { method: MethodName::Auto, tol: default_tol(), max_iters: None }
    }

    pub fn lp() -> Self {
        BackendSpec::Lp { sharpness: default_sharpness(), normalization: NormalizationName::Partition }
    }

    pub fn parse(t: &str) -> std::result::Result<Self, String> {
        match t {
            "optimal" => Ok(Self::optimal()),
            "difference" | "diff" => Ok(BackendSpec::Difference { k0: default_k0() }),
            "grand" => Ok(BackendSpec::Grand),
            "lp" => Ok(Self::lp()),
            _ => Err(format!("unknown backend `{t}`")),
        }
    }

    pub fn to_core(&self) -> Backend {
        match *self {
            BackendSpec::Optimal { method, tol, max_iters } => {
                Backend::Optimal(SolverConfig { method: method.core(), tol, max_iters })
            }
            BackendSpec::Difference { k0 } => Backend::Difference { k0 },
            BackendSpec::Grand => Backend::Grand,
            BackendSpec::Lp { sharpness, normalization } => Backend::LittlewoodPaley {
                sharpness,
                normalization: match normalization {
                    NormalizationName::Partition => BandNormalization::Partition,
                    NormalizationName::SquaredPartition => BandNormalization::SquaredPartition,
                },
            },
        }
    }

    /// Short label carrying every setting, e.g. `difference(k0=1)`.
    pub fn label(&self) -> String {
        match self {
            BackendSpec::Optimal { method, tol, max_iters } => {
                let m = match method {
                    MethodName::Auto => "auto",
                    MethodName::Dual => "dual",
                    MethodName::Barrier => "barrier",
                };
                match max_iters {
                    Some(i) => format!("optimal({m},tol={tol:e},iters={i})"),
                    None => format!("optimal({m},tol={tol:e})"),
                }
            }
            BackendSpec::Difference { k0 } => format!("difference(k0={k0})"),
            BackendSpec::Grand => "grand".to_string(),
            BackendSpec::Lp { sharpness, normalization } => {
                let n = match normalization {
                    NormalizationName::Partition => "partition",
                    NormalizationName::SquaredPartition => "squared",
                };
                format!("lp(sharpness={sharpness},{n})")
            }
        }
    }

    /// The family this backend computes for a requested one: Triebel–Lizorkin
    /// type requests map to M, BP or F, Besov type to N or B.
    pub fn natural_family(&self, requested: FamilyName) -> FamilyName {
        let besov = matches!(requested, FamilyName::N | FamilyName::B);
        match self {
            BackendSpec::Optimal { .. } => match requested {
                FamilyName::Sobolev => FamilyName::Sobolev,
                _ if besov => FamilyName::N,
                _ => FamilyName::M,
            },
            BackendSpec::Difference { .. } => match requested {
                FamilyName::Sobolev => FamilyName::Sobolev,
                _ if besov => FamilyName::N,
                _ => FamilyName::BP,
            },
            BackendSpec::Grand | BackendSpec::Lp { .. } => {
                if besov {
                    FamilyName::B
                } else {
                    FamilyName::F
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    /// Row-major square matrix of the space dimension.
    Linear { matrix: Vec<Vec<f64>> },
    RadialPower { a: f64 },
    /// `x -> factor x`; between Euclidean grids the target is the scaled grid.
    Dilation { factor: f64 },
}

impl MapSpec {
    /// `identity`, `radial:a=1.5`, `radial:1.5`, `dilation:2`, `linear:2,0,0,1`.
    pub fn parse(t: &str) -> std::result::Result<Self, String> {
        let (head, rest) = t.split_once(':').unwrap_or((t, ""));
        let num = |s: &str| -> std::result::Result<f64, String> {
            let s = s.split_once('=').map_or(s, |(_, v)| v);
            s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in map `{t}`"))
        };
        match head {
            "identity" => Ok(MapSpec::Identity),
            "radial" | "radial_power" => Ok(MapSpec::RadialPower { a: num(rest)? }),
            "dilation" => Ok(MapSpec::Dilation { factor: num(rest)? }),
            "linear" => {
                let v: Vec<f64> = rest.split(',').map(num).collect::<std::result::Result<_, _>>()?;
                let n = (v.len() as f64).sqrt().round() as usize;
                if n * n != v.len() || n == 0 || n > 3 {
                    return Err(format!("linear map `{t}` needs 1, 4 or 9 entries"));
                }
                Ok(MapSpec::Linear { matrix: v.chunks(n).map(|c| c.to_vec()).collect() })
            }
            _ => Err(format!("unknown map `{t}`")),
        }
    }

    fn family(&self) -> Result<MapFamily> {
        Ok(match self {
            MapSpec::Identity => MapFamily::Identity,
            MapSpec::RadialPower { a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::spec("map.a", "radial exponent must be positive"));
                }
                MapFamily::RadialPower { a: *a }
            }
            MapSpec::Dilation { factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::spec("map.factor", "dilation factor must be positive"));
                }
                MapFamily::dilation(*factor)
            }
            MapSpec::Linear { matrix } => {
                let mut m = [[0.0; 3]; 3];
                if matrix.len() > 3 || matrix.iter().any(|r| r.len() != matrix.len()) {
                    return Err(Error::spec("map.matrix", "matrix must be square of size at most 3"));
                }
                for (i, row) in matrix.iter().enumerate() {
                    m[i][..row.len()].copy_from_slice(row);
                }
                MapFamily::Linear(m)
            }
        })
    }

    pub fn sample(&self, source: &MetricMeasureSpace) -> Result<MapSample> {
        let family = self.family()?;
        if let (MapSpec::Dilation { factor }, Topology::EuclideanGrid(g)) = (self, source.topology()) {
            let target = MetricMeasureSpace::build_euclidean_grid(g.n_dim, g.resolution, g.side_length * factor)?;
            return Ok(MapSample::snapped(source, &target, family)?);
        }
        Ok(MapSample::exact_image(source, family)?)
    }
}
