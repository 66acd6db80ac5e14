//! Finite metric measure spaces, dyadic scales, balls and doubling diagnostics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, MetricViolation, Result};

/// Grids above this many points are refused unless a larger budget is passed.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 16;
/// Point clouds up to this size keep their full distance matrix.
pub const STORED_DISTANCE_LIMIT: usize = 1 << 12;
/// Above this size triangle validation switches to random triples.
pub const EXHAUSTIVE_VALIDATION_LIMIT: usize = 200;
pub const SAMPLED_TRIPLES: usize = 20_000;
const VALIDATION_SEED: u64 = 0x7269_616e_676c_65;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    pub n_dim: usize,
    pub resolution: usize,
    pub side_length: f64,
}

impl GridGeometry {
    pub fn spacing(&self) -> f64 {
        self.side_length / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.n_dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.n_dim as i32)
    }

    /// Axis indices of a flat index; axis 0 varies fastest.
    pub fn multi_index(&self, mut i: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in out.iter_mut().take(self.n_dim) {
            *a = i % self.resolution;
            i /= self.resolution;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for a in (0..self.n_dim).rev() {
            f = f * self.resolution + idx[a];
        }
        f
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Topology {
    PointCloud,
    /// Flat torus, coordinates `i * h` in `[0, side)`.
    PeriodicGrid(GridGeometry),
    /// Square patch of `R^n` with the Euclidean metric, cell centred at the origin.
    EuclideanGrid(GridGeometry),
}

#[derive(Clone, Debug)]
enum Metric {
    Matrix(Vec<f64>),
    /// Distance depends only on the per-axis offset; `table` is indexed by the
    /// flat offset vector.
    Lattice { geom: GridGeometry, periodic: bool, table: Vec<f64> },
    Coords,
}

/// Inclusive range of dyadic scales carrying at least one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaleWindow {
    pub k_min: i32,
    pub k_max: i32,
}

impl ScaleWindow {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::invalid(format!("empty scale window [{k_min}, {k_max}]")));
        }
        Ok(ScaleWindow { k_min, k_max })
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i32) -> bool {
        k >= self.k_min && k <= self.k_max
    }

    pub fn scales(&self) -> impl Iterator<Item = i32> + Clone {
        self.k_min..=self.k_max
    }

    pub fn union(&self, other: &ScaleWindow) -> ScaleWindow {
        ScaleWindow {
            k_min: self.k_min.min(other.k_min),
            k_max: self.k_max.max(other.k_max),
        }
    }
}

/// Relative gap below which two distances are treated as equal. Distances of
/// the same pair computed from a lattice table and from coordinates differ by
/// a few ulps; without this, ties and dyadic boundaries split arbitrarily.
pub const DISTANCE_RTOL: f64 = 1e-12;

/// The `k` with `2^{-k-1} <= d < 2^{-k}`; a distance within [`DISTANCE_RTOL`]
/// below a power of two counts as that power.
pub fn scale_of_distance(d: f64) -> i32 {
    debug_assert!(d > 0.0 && d.is_finite());
    let (_, e) = libm::frexp(d * (1.0 + DISTANCE_RTOL));
    -e
}

/// `d < r` for the open ball, with distances on the sphere up to [`DISTANCE_RTOL`] left out.
#[inline]
pub fn inside_open(d: f64, r: f64) -> bool {
    d < r * (1.0 - DISTANCE_RTOL)
}

/// `d <= r` for the closed ball, up to [`DISTANCE_RTOL`].
#[inline]
pub fn inside_closed(d: f64, r: f64) -> bool {
    d <= r * (1.0 + DISTANCE_RTOL)
}

#[inline]
pub fn same_distance(a: f64, b: f64) -> bool {
    (a - b).abs() <= DISTANCE_RTOL * a.abs().max(b.abs())
}

/// Finite metric measure space. Immutable once built.
#[derive(Clone, Debug)]
pub struct MetricMeasureSpace {
    topology: Topology,
    dim: usize,
    coords: Vec<f64>,
    measure: Vec<f64>,
    metric: Metric,
    min_dist: f64,
    diameter: f64,
}

impl MetricMeasureSpace {
    pub fn build_periodic_grid(n_dim: usize, resolution: usize, side_length: f64) -> Result<Self> {
        Self::build_grid_with_budget(n_dim, resolution, side_length, true, DEFAULT_POINT_BUDGET)
    }

    /// Non-periodic square grid in `R^n` with the Euclidean metric.
    pub fn build_euclidean_grid(n_dim: usize, resolution: usize, side_length: f64) -> Result<Self> {
        Self::build_grid_with_budget(n_dim, resolution, side_length, false, DEFAULT_POINT_BUDGET)
    }

    pub fn build_grid_with_budget(
        n_dim: usize,
        resolution: usize,
        side_length: f64,
        periodic: bool,
        budget: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&n_dim) {
            return Err(Error::config(format!("grid dimension {n_dim} not in 1..=3")));
        }
        if resolution < 2 || (periodic && resolution < 4) {
            return Err(Error::config(format!("grid resolution {resolution} too small")));
        }
        if !(side_length > 0.0 && side_length.is_finite()) {
            return Err(Error::config("side length must be positive and finite"));
        }
        let requested = resolution
            .checked_pow(n_dim as u32)
            .ok_or(Error::Resource { what: "grid points", requested: usize::MAX, limit: budget })?;
        if requested > budget {
            return Err(Error::Resource { what: "grid points", requested, limit: budget });
        }
        let geom = GridGeometry { n_dim, resolution, side_length };
        let h = geom.spacing();
        let n = geom.len();
        let centre = if periodic { 0.0 } else { (resolution as f64 - 1.0) / 2.0 };
        let mut coords = Vec::with_capacity(n * n_dim);
        for i in 0..n {
            let idx = geom.multi_index(i);
            for &a in idx.iter().take(n_dim) {
                coords.push((a as f64 - centre) * h);
            }
        }
        let mut table = vec![0.0; n];
        for (i, t) in table.iter_mut().enumerate() {
            let idx = geom.multi_index(i);
            let mut s = 0.0;
            for &a in idx.iter().take(n_dim) {
                let a = if periodic { a.min(resolution - a) } else { a };
                let x = a as f64 * h;
                s += x * x;
            }
            *t = s.sqrt();
        }
        let min_dist = h;
        let diameter = table.iter().fold(0.0f64, |m, &v| m.max(v));
        let topology = if periodic { Topology::PeriodicGrid(geom) } else { Topology::EuclideanGrid(geom) };
        Ok(MetricMeasureSpace {
            topology,
            dim: n_dim,
            coords,
            measure: vec![geom.cell_measure(); n],
            metric: Metric::Lattice { geom, periodic, table },
            min_dist,
            diameter,
        })
    }

    /// Point cloud from an explicit distance matrix; the metric axioms are validated.
    pub fn build_point_cloud(dist: &[Vec<f64>], measure: &[f64]) -> Result<Self> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::Metric(MetricViolation::Empty));
        }
        if dist.len() != n {
            return Err(Error::Metric(MetricViolation::Shape { rows: dist.len(), expected: n }));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in dist {
            if row.len() != n {
                return Err(Error::Metric(MetricViolation::Shape { rows: row.len(), expected: n }));
            }
            flat.extend_from_slice(row);
        }
        let space = Self::from_parts(Topology::PointCloud, 0, Vec::new(), measure.to_vec(), Metric::Matrix(flat))?;
        space.validate()?;
        Ok(space)
    }

    /// Euclidean point cloud. Distances are cached when the cloud is small.
    pub fn from_coords(coords: &[Vec<f64>], measure: &[f64]) -> Result<Self> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::Metric(MetricViolation::Empty));
        }
        if coords.len() != n {
            return Err(Error::invalid(format!("{} coordinate rows for {} points", coords.len(), n)));
        }
        let dim = coords[0].len();
        let mut flat = Vec::with_capacity(n * dim);
        for c in coords {
            if c.len() != dim || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("coordinates must be finite and of equal length"));
            }
            flat.extend_from_slice(c);
        }
        let metric = if n <= STORED_DISTANCE_LIMIT {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = euclid(&flat[i * dim..(i + 1) * dim], &flat[j * dim..(j + 1) * dim]);
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            Metric::Matrix(m)
        } else {
            Metric::Coords
        };
        let space = Self::from_parts(Topology::PointCloud, dim, flat, measure.to_vec(), metric)?;
        if space.len() > 1 && space.min_dist <= 0.0 {
            return Err(Error::Metric(MetricViolation::NonPositive { a: 0, b: 0 }));
        }
        Ok(space)
    }

    fn from_parts(topology: Topology, dim: usize, coords: Vec<f64>, measure: Vec<f64>, metric: Metric) -> Result<Self> {
        for (a, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Metric(MetricViolation::Measure { a, value: m }));
            }
        }
        let mut s = MetricMeasureSpace {
            topology,
            dim,
            coords,
            measure,
            metric,
            min_dist: f64::INFINITY,
            diameter: 0.0,
        };
        let n = s.len();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = s.dist(i, j);
                if d > 0.0 {
                    lo = lo.min(d);
                }
                hi = hi.max(d);
            }
        }
        s.min_dist = lo;
        s.diameter = hi;
        Ok(s)
    }

    /// Checks the metric axioms; exhaustive for small spaces, sampled otherwise.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Metric(MetricViolation::Empty));
        }
        for a in 0..n {
            let d = self.dist(a, a);
            if d != 0.0 {
                return Err(Error::Metric(MetricViolation::Diagonal { a, value: d }));
            }
            for b in a + 1..n {
                let (x, y) = (self.dist(a, b), self.dist(b, a));
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::Metric(MetricViolation::NonFinite { a, b }));
                }
                if x != y {
                    return Err(Error::Metric(MetricViolation::Asymmetric { a, b }));
                }
                if x <= 0.0 {
                    return Err(Error::Metric(MetricViolation::NonPositive { a, b }));
                }
            }
        }
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            let lhs = self.dist(a, c);
            let rhs = self.dist(a, b) + self.dist(b, c);
            if lhs > rhs + 1e-12 * lhs.max(rhs) {
                return Err(Error::Metric(MetricViolation::Triangle { a, b, c, lhs, rhs }));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_VALIDATION_LIMIT {
            for a in 0..n {
                for c in a + 1..n {
                    for b in 0..n {
                        if b != a && b != c {
                            check(a, b, c)?;
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
            for _ in 0..SAMPLED_TRIPLES {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                let c = rng.gen_range(0..n);
                check(a, b, c)?;
            }
        }
        Ok(())
    }

    /// Same points and measure, metric `d^alpha` (a snowflake for `alpha < 1`).
    pub fn snowflake(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!("snowflake exponent {alpha} not in (0, 1]")));
        }
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i * n + j] = self.dist(i, j).powf(alpha);
                }
            }
        }
        Self::from_parts(Topology::PointCloud, self.dim, self.coords.clone(), self.measure.clone(), Metric::Matrix(m))
    }

    /// Same metric with every point measure replaced.
    pub fn with_measure(&self, measure: Vec<f64>) -> Result<Self> {
        if measure.len() != self.len() {
            return Err(Error::invalid("measure length does not match point count"));
        }
        for (a, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Metric(MetricViolation::Measure { a, value: m }));
            }
        }
        let mut s = self.clone();
        if let Topology::PeriodicGrid(_) | Topology::EuclideanGrid(_) = s.topology {
            if measure.iter().any(|&m| m != measure[0]) {
                s.topology = Topology::PointCloud;
            }
        }
        s.measure = measure;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Grid geometry for both periodic and Euclidean grids.
    pub fn grid(&self) -> Option<GridGeometry> {
        match self.topology {
            Topology::PeriodicGrid(g) | Topology::EuclideanGrid(g) => Some(g),
            Topology::PointCloud => None,
        }
    }

    pub fn periodic_grid(&self) -> Option<GridGeometry> {
        match self.topology {
            Topology::PeriodicGrid(g) => Some(g),
            _ => None,
        }
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        if self.dim > 0 {
            Some(self.dim)
        } else {
            None
        }
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        if self.dim == 0 {
            None
        } else {
            Some(&self.coords[i * self.dim..(i + 1) * self.dim])
        }
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measure[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Matrix(m) => m[i * self.len() + j],
            Metric::Lattice { geom, periodic, table } => {
                if i == j {
                    return 0.0;
                }
                let r = geom.resolution;
                let (mut a, mut b) = (i, j);
                let mut off = 0;
                let mut stride = 1;
                for _ in 0..geom.n_dim {
                    let (ia, ja) = (a % r, b % r);
                    let o = if *periodic { (ja + r - ia) % r } else { ia.abs_diff(ja) };
                    off += o * stride;
                    stride *= r;
                    a /= r;
                    b /= r;
                }
                table[off]
            }
            Metric::Coords => euclid(
                &self.coords[i * self.dim..(i + 1) * self.dim],
                &self.coords[j * self.dim..(j + 1) * self.dim],
            ),
        }
    }

    /// Smallest positive pairwise distance (`inf` for one point).
    pub fn min_distance(&self) -> f64 {
        self.min_dist
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Window of scales holding at least one pair; `None` for a single point.
    pub fn window(&self) -> Option<ScaleWindow> {
        if self.len() < 2 {
            return None;
        }
        Some(ScaleWindow {
            k_min: scale_of_distance(self.diameter),
            k_max: scale_of_distance(self.min_dist),
        })
    }

    pub fn scale_of_pair(&self, x: usize, y: usize) -> Result<i32> {
        if x == y {
            return Err(Error::domain("scale of a pair needs two distinct points"));
        }
        Ok(scale_of_distance(self.dist(x, y)))
    }

    /// Points of the open ball `d(center, y) < radius`.
    pub fn ball(&self, center: usize, radius: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| inside_open(self.dist(center, y), radius)).collect()
    }

    pub fn ball_mass(&self, center: usize, radius: f64) -> f64 {
        (0..self.len()).filter(|&y| inside_open(self.dist(center, y), radius)).map(|y| self.measure[y]).sum()
    }

    pub fn ball_average(&self, values: &[f64], center: usize, radius: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for y in 0..self.len() {
            if inside_open(self.dist(center, y), radius) {
                num += self.measure[y] * values[y];
                den += self.measure[y];
            }
        }
        num / den
    }

    /// Point nearest the middle of the space: the grid centre, the point closest
    /// to the coordinate origin, or point 0.
    pub fn central_point(&self) -> usize {
        match self.topology {
            Topology::PeriodicGrid(g) => {
                let idx = [g.resolution / 2; 3];
                g.flat_index(&idx[..g.n_dim])
            }
            _ if self.dim > 0 => {
                let mut best = (f64::INFINITY, 0);
                for i in 0..self.len() {
                    let r: f64 = self.coords(i).unwrap().iter().map(|v| v * v).sum();
                    if r < best.0 {
                        best = (r, i);
                    }
                }
                best.1
            }
            _ => 0,
        }
    }

    pub fn neighbors(&self) -> NeighborTable {
        NeighborTable::build(self)
    }

    /// Doubling diagnostics with radii log-uniform in `[2 h, diam / (2 lambda_max)]`.
    pub fn estimate_doubling(&self, lambda_grid: &[f64], sample_count: usize, seed: u64) -> Result<DoublingReport> {
        if self.len() < 2 {
            return Err(Error::domain("doubling estimate needs at least two points"));
        }
        let lmax = lambda_grid.iter().fold(1.0f64, |m, &l| m.max(l));
        let lo = 2.0 * self.min_dist;
        let hi = (self.diameter / (2.0 * lmax)).max(lo);
        self.estimate_doubling_in(lambda_grid, sample_count, seed, (lo, hi))
    }

    pub fn estimate_doubling_in(
        &self,
        lambda_grid: &[f64],
        sample_count: usize,
        seed: u64,
        radius_range: (f64, f64),
    ) -> Result<DoublingReport> {
        if self.len() < 2 {
            return Err(Error::domain("doubling estimate needs at least two points"));
        }
        if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 1.0 && l.is_finite())) {
            return Err(Error::config("lambda grid must be nonempty with every lambda > 1"));
        }
        let (lo, hi) = radius_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::config("radius range must satisfy 0 < lo <= hi"));
        }
        let table = NeighborTable::build(self);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut samples = Vec::with_capacity(sample_count);
        for i in 0..sample_count {
            let x = rng.gen_range(0..self.len());
            let r = (llo + (lhi - llo) * rng.gen::<f64>()).exp();
            let lambda = lambda_grid[i % lambda_grid.len()];
            let ratio = table.mass_within(x, lambda * r) / table.mass_within(x, r);
            samples.push(DoublingSample { x, r, lambda, ratio });
        }
        Ok(DoublingReport::fit(samples))
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingSample {
    pub x: usize,
    pub r: f64,
    pub lambda: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoublingReport {
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub kappa_hat: f64,
    pub n_hat: f64,
    pub samples: Vec<DoublingSample>,
}

impl DoublingReport {
    /// Least-squares slope through the origin of `ln ratio` against `ln lambda`.
    fn fit(samples: Vec<DoublingSample>) -> Self {
        let (mut sty, mut stt) = (0.0, 0.0);
        for s in &samples {
            let t = s.lambda.ln();
            sty += t * s.ratio.ln();
            stt += t * t;
        }
        let n_hat = if stt > 0.0 { (sty / stt).max(0.0) } else { 0.0 };
        let mut kappa = n_hat;
        for s in &samples {
            kappa = kappa.min(s.ratio.ln() / s.lambda.ln());
        }
        let kappa_hat = kappa.max(0.0);
        let mut c1 = 1.0f64;
        let mut c2 = 1.0f64;
        for s in &samples {
            c1 = c1.min(s.ratio / s.lambda.powf(kappa_hat));
            c2 = c2.max(s.ratio / s.lambda.powf(n_hat));
        }
        DoublingReport { c1_hat: c1, c2_hat: c2, kappa_hat, n_hat, samples }
    }
}

/// Per-point neighbour lists sorted by distance, with prefix masses.
///
/// Memory is `O(n^2)`; the table is built once and shared by callers that need
/// many ball masses.
#[derive(Clone, Debug)]
pub struct NeighborTable {
    n: usize,
    dist: Vec<f64>,
    index: Vec<u32>,
    /// `prefix[x*(n+1) + i]` is the mass of the first `i` neighbours of `x`.
    prefix: Vec<f64>,
}

impl NeighborTable {
    pub fn build(space: &MetricMeasureSpace) -> Self {
        let n = space.len();
        let mut dist = Vec::with_capacity(n * n);
        let mut index = Vec::with_capacity(n * n);
        let mut prefix = Vec::with_capacity(n * (n + 1));
        let mut row: Vec<(f64, u32)> = Vec::with_capacity(n);
        for x in 0..n {
            row.clear();
            row.extend((0..n).map(|y| (space.dist(x, y), y as u32)));
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut acc = 0.0;
            prefix.push(0.0);
            for &(d, y) in &row {
                dist.push(d);
                index.push(y);
                acc += space.measure(y as usize);
                prefix.push(acc);
            }
        }
        NeighborTable { n, dist, index, prefix }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distances from `x` in increasing order.
    pub fn distances(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn indices(&self, x: usize) -> &[u32] {
        &self.index[x * self.n..(x + 1) * self.n]
    }

    /// Number of neighbours of `x` with `d < r`.
    pub fn count_within(&self, x: usize, r: f64) -> usize {
        self.distances(x).partition_point(|&d| inside_open(d, r))
    }

    /// Points of the open ball `B(x, r)`.
    pub fn ball(&self, x: usize, r: f64) -> &[u32] {
        &self.indices(x)[..self.count_within(x, r)]
    }

    /// `mu(B(x, r))` for the open ball.
    pub fn mass_within(&self, x: usize, r: f64) -> f64 {
        self.prefix[x * (self.n + 1) + self.count_within(x, r)]
    }

    /// Mass of the first `i` neighbours of `x`.
    pub fn prefix_mass(&self, x: usize, i: usize) -> f64 {
        self.prefix[x * (self.n + 1) + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::build_point_cloud(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn periodic_grid_1d_basics() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 4, 1.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.measures().iter().all(|&m| (m - 0.25).abs() < 1e-15));
        assert!((s.diameter() - 0.5).abs() < 1e-15);
        assert!((s.min_distance() - 0.25).abs() < 1e-15);
        assert!((s.dist(0, 3) - 0.25).abs() < 1e-15);
        assert!((s.dist(3, 0) - 0.25).abs() < 1e-15);
        assert!((s.dist(0, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn periodic_grid_2d_measure_and_metric() {
        let s = MetricMeasureSpace::build_periodic_grid(2, 8, 1.0).unwrap();
        assert_eq!(s.len(), 64);
        assert!(s.measures().iter().all(|&m| (m - 1.0 / 64.0).abs() < 1e-15));
        s.validate().unwrap();
        // independent torus distance from coordinates
        for i in 0..64 {
            for j in 0..64 {
                let (a, b) = (s.coords(i).unwrap(), s.coords(j).unwrap());
                let mut sq = 0.0;
                for t in 0..2 {
                    let d = (a[t] - b[t]).abs();
                    let d = d.min(1.0 - d);
                    sq += d * d;
                }
                assert!((s.dist(i, j) - sq.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_budget_is_enforced() {
        let e = MetricMeasureSpace::build_grid_with_budget(2, 100, 1.0, true, 1000).unwrap_err();
        assert!(matches!(e, Error::Resource { requested: 10_000, limit: 1000, .. }));
    }

    #[test]
    fn point_cloud_validation() {
        two_point();
        let bad = MetricMeasureSpace::build_point_cloud(
            &[vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
            &[1.0, 1.0, 1.0],
        )
        .unwrap_err();
        match bad {
            Error::Metric(MetricViolation::Triangle { a, b, c, .. }) => assert_eq!((a, b, c), (0, 1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let asym = MetricMeasureSpace::build_point_cloud(&[vec![0.0, 1.0], vec![2.0, 0.0]], &[1.0, 1.0]);
        assert!(matches!(asym, Err(Error::Metric(MetricViolation::Asymmetric { .. }))));
        let single = MetricMeasureSpace::build_point_cloud(&[vec![0.0]], &[2.0]).unwrap();
        assert!(single.window().is_none());
        assert_eq!(single.total_measure(), 2.0);
    }

    #[test]
    fn scales_of_pairs() {
        assert_eq!(scale_of_distance(0.5), 0);
        assert_eq!(scale_of_distance(1.0), -1);
        assert_eq!(scale_of_distance(0.3), 1);
        assert!(two_point().scale_of_pair(0, 0).is_err());
        // defining inequality against powers of two computed independently
        for &d in &[0.001, 0.2, 0.25, 0.2500001, 0.7, 3.0, 17.5] {
            let k = scale_of_distance(d);
            assert!(2f64.powi(-k - 1) <= d && d < 2f64.powi(-k), "d={d} k={k}");
        }
    }

    #[test]
    fn ball_averages() {
        let s = two_point();
        let u = [0.0, 1.0];
        assert!((s.ball_average(&u, 0, 0.6) - 0.5).abs() < 1e-15);
        assert_eq!(s.ball_average(&u, 0, 0.4), 0.0);
        assert_eq!(s.ball_average(&[3.0, 3.0], 1, 10.0), 3.0);
    }

    #[test]
    fn neighbor_table_matches_scan() {
        let s = MetricMeasureSpace::build_periodic_grid(2, 6, 1.0).unwrap();
        let t = s.neighbors();
        for x in 0..s.len() {
            for &r in &[0.1, 1.0 / 6.0, 0.2, 0.35, 1.0] {
                assert!((t.mass_within(x, r) - s.ball_mass(x, r)).abs() < 1e-12);
                assert_eq!(t.ball(x, r).len(), s.ball(x, r).len());
            }
        }
    }

    #[test]
    fn euclidean_grid_is_centred() {
        let s = MetricMeasureSpace::build_euclidean_grid(2, 4, 1.0).unwrap();
        let c = s.coords(0).unwrap();
        assert!((c[0] + 0.375).abs() < 1e-15 && (c[1] + 0.375).abs() < 1e-15);
        assert!((s.dist(0, 15) - (2.0f64).sqrt() * 0.75).abs() < 1e-12);
        s.validate().unwrap();
    }

    #[test]
    fn tiny_balls_give_trivial_doubling() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 16, 1.0).unwrap();
        let h = s.min_distance();
        let rep = s.estimate_doubling_in(&[1.5, 2.0], 50, 3, (h / 10.0, h / 4.0)).unwrap();
        assert!(rep.samples.iter().all(|x| x.ratio == 1.0));
        assert_eq!(rep.n_hat, 0.0);
        assert_eq!(rep.kappa_hat, 0.0);
    }

    #[test]
    fn snowflake_is_a_metric() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 12, 1.0).unwrap();
        let f = s.snowflake(0.5).unwrap();
        f.validate().unwrap();
        assert!((f.dist(0, 1) - (1.0f64 / 12.0).sqrt()).abs() < 1e-14);
    }
}
