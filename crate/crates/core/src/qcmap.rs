//! Discrete maps between metric measure spaces: distortion, volume derivative,
//! reverse Hölder constants and composition experiments.
//!
//! An analytic map sampled on a grid becomes a bijection onto the exact image
//! points, each weighted by the area of its image cell. `snapped` instead
//! rounds to an existing target grid.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::{Backend, NormEvaluator};
use crate::error::{Error, Result};
use crate::fields::{generate_family, FunctionFamilySpec, ScalarField};
use crate::math::pow2i;
use crate::norms::{Ball, NormParams};
use crate::space::{inside_closed, inside_open, scale_of_distance, MetricMeasureSpace, ScaleWindow, Topology};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapFamily {
    Identity,
    /// `x -> A x`, row-major, upper-left block used in lower dimension.
    Linear([[f64; 3]; 3]),
    /// `x -> |x|^(a-1) x`.
    RadialPower { a: f64 },
    /// Given only as an assignment.
    Custom,
}

impl MapFamily {
    pub fn dilation(factor: f64) -> Self {
        MapFamily::Linear([[factor, 0.0, 0.0], [0.0, factor, 0.0], [0.0, 0.0, factor]])
    }

    pub fn apply(&self, x: &[f64]) -> [f64; 3] {
        let n = x.len();
        let mut out = [0.0; 3];
        match self {
            MapFamily::Identity | MapFamily::Custom => out[..n].copy_from_slice(x),
            MapFamily::Linear(a) => {
                for i in 0..n {
                    out[i] = (0..n).map(|j| a[i][j] * x[j]).sum();
                }
            }
            MapFamily::RadialPower { a } => {
                let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let f = if r > 0.0 { r.powf(a - 1.0) } else { 0.0 };
                for i in 0..n {
                    out[i] = f * x[i];
                }
            }
        }
        out
    }

    /// Analytic Jacobian determinant where one exists.
    pub fn jacobian(&self, x: &[f64]) -> Option<f64> {
        let n = x.len();
        match self {
            MapFamily::Identity => Some(1.0),
            MapFamily::Linear(a) => Some(match n {
                1 => a[0][0],
                2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
                _ => det3(a),
            }
            .abs()),
            MapFamily::RadialPower { a } => {
                let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(a * r.powf(n as f64 * (a - 1.0)))
            }
            MapFamily::Custom => None,
        }
    }
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Coordinates of point `i`, centred for periodic grids.
fn centred_coords(space: &MetricMeasureSpace, i: usize) -> Option<Vec<f64>> {
    match space.topology() {
        Topology::PeriodicGrid(g) => {
            let idx = g.multi_index(i);
            let h = g.spacing();
            let half = (g.resolution / 2) as f64;
            Some((0..g.n_dim).map(|a| (idx[a] as f64 - half) * h).collect())
        }
        _ => space.coords(i).map(|c| c.to_vec()),
    }
}

fn jacobian_fd(f: &MapFamily, x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let mut m = [[0.0; 3]; 3];
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + step;
        let a = f.apply(&xp);
        xp[j] = x[j] - step;
        let b = f.apply(&xp);
        xp[j] = x[j];
        for i in 0..n {
            m[i][j] = (a[i] - b[i]) / (2.0 * step);
        }
    }
    match n {
        1 => m[0][0].abs(),
        2 => (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs(),
        _ => {
            m[2][2] = if n == 3 { m[2][2] } else { 1.0 };
            det3(&m).abs()
        }
    }
}

/// Measure of the image of the grid cell around `x`: interval length in 1-D,
/// area of the mapped cell boundary in 2-D, Jacobian times cell volume otherwise.
fn image_cell_measure(f: &MapFamily, x: &[f64], h: f64) -> f64 {
    match x.len() {
        1 => (f.apply(&[x[0] + 0.5 * h])[0] - f.apply(&[x[0] - 0.5 * h])[0]).abs(),
        2 => {
            const SUB: usize = 4;
            let corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)];
            let mut pts = Vec::with_capacity(4 * SUB);
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                for t in 0..SUB {
                    let s = t as f64 / SUB as f64;
                    let p = [x[0] + h * (a.0 + s * (b.0 - a.0)), x[1] + h * (a.1 + s * (b.1 - a.1))];
                    let y = f.apply(&p);
                    pts.push((y[0], y[1]));
                }
            }
            let mut area = 0.0;
            for i in 0..pts.len() {
                let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                area += a.0 * b.1 - b.0 * a.1;
            }
            0.5 * area.abs()
        }
        _ => jacobian_fd(f, x, 0.25 * h) * h.powi(x.len() as i32),
    }
}

/// A bijection from the points of `source` onto the points of `target`.
#[derive(Clone, Debug)]
pub struct MapSample {
    source: MetricMeasureSpace,
    target: MetricMeasureSpace,
    assignment: Vec<u32>,
    family: MapFamily,
    interior: Vec<bool>,
}

fn interior_mask(space: &MetricMeasureSpace) -> Vec<bool> {
    let n = space.len();
    match space.grid() {
        Some(g) => {
            let h = g.spacing();
            (0..n)
                .map(|i| {
                    let idx = g.multi_index(i);
                    let inside = (0..g.n_dim).all(|a| idx[a] >= 2 && idx[a] + 2 < g.resolution);
                    let c = centred_coords(space, i).unwrap();
                    let origin = c.iter().all(|v| v.abs() < h);
                    inside && !origin
                })
                .collect()
        }
        None => {
            let h = space.min_distance();
            (0..n)
                .map(|i| centred_coords(space, i).map_or(true, |c| c.iter().map(|v| v * v).sum::<f64>().sqrt() >= h))
                .collect()
        }
    }
}

impl MapSample {
    /// Target is the cloud of exact images `f(x_i)` with image-cell measures.
    pub fn exact_image(source: &MetricMeasureSpace, family: MapFamily) -> Result<Self> {
        if matches!(family, MapFamily::Custom) {
            return Err(Error::config("a custom map needs an explicit assignment"));
        }
        let n = source.len();
        let mut images = Vec::with_capacity(n);
        let mut mass = Vec::with_capacity(n);
        let grid_h = source.grid().map(|g| g.spacing());
        let step = 1e-4 * source.diameter().max(1e-300);
        for i in 0..n {
            let x = centred_coords(source, i)
                .ok_or_else(|| Error::domain("mapped spaces need coordinates"))?;
            let y = family.apply(&x);
            images.push(y[..x.len()].to_vec());
            mass.push(match grid_h {
                Some(h) => image_cell_measure(&family, &x, h),
                None => source.measure(i) * jacobian_fd(&family, &x, step),
            });
        }
        if let Some(i) = mass.iter().position(|m| !(*m > 0.0)) {
            return Err(Error::domain(format!("image of the cell at point {i} has no volume")));
        }
        let target = MetricMeasureSpace::from_coords(&images, &mass)?;
        Ok(MapSample {
            interior: interior_mask(source),
            source: source.clone(),
            target,
            assignment: (0..n as u32).collect(),
            family,
        })
    }

    /// Nearest target grid point, collisions resolved by the nearest free point
    /// in source index order.
    pub fn snapped(source: &MetricMeasureSpace, target: &MetricMeasureSpace, family: MapFamily) -> Result<Self> {
        let n = source.len();
        if target.len() != n {
            return Err(Error::config("snapped maps need equal point counts"));
        }
        let tg = match target.topology() {
            Topology::EuclideanGrid(g) => *g,
            _ => return Err(Error::config("snapped maps need a Euclidean grid target")),
        };
        let h = tg.spacing();
        let centre = (tg.resolution as f64 - 1.0) / 2.0;
        let mut taken = vec![false; n];
        let mut assignment = Vec::with_capacity(n);
        for i in 0..n {
            let x = centred_coords(source, i).ok_or_else(|| Error::domain("mapped spaces need coordinates"))?;
            if x.len() != tg.n_dim {
                return Err(Error::config("source and target dimensions differ"));
            }
            let y = family.apply(&x);
            let idx: Vec<usize> = (0..tg.n_dim)
                .map(|a| (y[a] / h + centre).round().clamp(0.0, tg.resolution as f64 - 1.0) as usize)
                .collect();
            let mut best = tg.flat_index(&idx);
            if taken[best] {
                let mut bd = f64::INFINITY;
                for t in 0..n {
                    if !taken[t] {
                        let c = target.coords(t).unwrap();
                        let d: f64 = (0..tg.n_dim).map(|a| (c[a] - y[a]).powi(2)).sum();
                        if d < bd {
                            bd = d;
                            best = t;
                        }
                    }
                }
            }
            taken[best] = true;
            assignment.push(best as u32);
        }
        Ok(MapSample { interior: interior_mask(source), source: source.clone(), target: target.clone(), assignment, family })
    }

    pub fn from_assignment(source: &MetricMeasureSpace, target: &MetricMeasureSpace, assignment: Vec<u32>) -> Result<Self> {
        let n = source.len();
        if target.len() != n || assignment.len() != n {
            return Err(Error::invalid("assignment must be a bijection between equal point counts"));
        }
        let mut seen = vec![false; n];
        for &a in &assignment {
            let a = a as usize;
            if a >= n || seen[a] {
                return Err(Error::invalid("assignment is not a bijection"));
            }
            seen[a] = true;
        }
        Ok(MapSample {
            interior: interior_mask(source),
            source: source.clone(),
            target: target.clone(),
            assignment,
            family: MapFamily::Custom,
        })
    }

    pub fn source(&self) -> &MetricMeasureSpace {
        &self.source
    }

    pub fn target(&self) -> &MetricMeasureSpace {
        &self.target
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    /// Source points away from the boundary ring and the origin cell.
    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn inverse(&self) -> MapSample {
        let mut inv = vec![0u32; self.assignment.len()];
        for (x, &y) in self.assignment.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        let interior = (0..inv.len()).map(|y| self.interior[inv[y] as usize]).collect();
        MapSample {
            source: self.target.clone(),
            target: self.source.clone(),
            assignment: inv,
            family: MapFamily::Custom,
            interior,
        }
    }

    /// `(u o f)(x) = u(f(x))`.
    pub fn compose(&self, field: &ScalarField) -> Result<ScalarField> {
        field.check_on(&self.target)?;
        let u = field.values();
        ScalarField::new(self.assignment.iter().map(|&y| u[y as usize]).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    /// Defaults to the source window.
    pub window: Option<ScaleWindow>,
    pub eta_samples: usize,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { window: None, eta_samples: 2000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapAnalysis {
    pub scales: Vec<i32>,
    /// `L_f(x, r)` point-major, `None` where the scale has no realised distance.
    pub l_table: Vec<Option<f64>>,
    pub ell_table: Vec<Option<f64>>,
    /// Per-point dilatation over interior points (`None` elsewhere).
    pub h_point: Vec<Option<f64>>,
    pub h_global: f64,
    /// `(d(x,a)/d(x,b), d(fx,fa)/d(fx,fb))`.
    pub eta_samples: Vec<(f64, f64)>,
    pub skipped: usize,
    /// Range of `L_f(x,r)^n / mu_Y(f(B(x,r)))` over interior points and balls of at least 9 points.
    pub volume_ratio_range: Option<(f64, f64)>,
    /// `hist[m]` counts interior pairs `(x, k)` with exactly `m` scales `j` putting `L_f(x, 2^-j)` at scale `k`.
    pub multiplicity_histogram: Vec<usize>,
}

/// Metric distortion by exhaustive scan. The radius at scale `j` is the largest
/// realised distance in `(2^{-j-1}, 2^{-j}]`; `L_f` and `l_f` are the largest image
/// distance inside it and the smallest outside it.
pub fn analyze_distortion(map: &MapSample, config: &AnalysisConfig) -> Result<MapAnalysis> {
    let src = &map.source;
    let n = src.len();
    if n < 2 {
        return Err(Error::domain("distortion needs at least two points"));
    }
    let window = config.window.or(src.window()).unwrap();
    let scales: Vec<i32> = window.scales().collect();
    let ns = scales.len();
    let dim = src.ambient_dim().unwrap_or(1) as i32;
    let table = src.neighbors();
    let (tgt, asg) = (&map.target, &map.assignment);
    let mut l_table = vec![None; n * ns];
    let mut ell_table = vec![None; n * ns];
    let mut h_point = vec![None; n];
    let mut skipped = 0;
    let mut vol: Option<(f64, f64)> = None;
    let mut hist: Vec<usize> = vec![0; ns + 1];
    let mut e = vec![0.0; n];
    let mut pmax = vec![0.0; n];
    let mut smin = vec![0.0; n];
    let mut pmass = vec![0.0; n];
    for x in 0..n {
        let ds = table.distances(x);
        let idx = table.indices(x);
        let fx = asg[x] as usize;
        for i in 0..n {
            e[i] = tgt.dist(fx, asg[idx[i] as usize] as usize);
        }
        let (mut m, mut acc) = (0.0f64, 0.0);
        for i in 0..n {
            m = m.max(e[i]);
            pmax[i] = m;
            acc += tgt.measure(asg[idx[i] as usize] as usize);
            pmass[i] = acc;
        }
        let mut m = f64::INFINITY;
        for i in (0..n).rev() {
            m = m.min(e[i]);
            smin[i] = m;
        }
        let mut h = None::<f64>;
        let mut per_k: Vec<(i32, usize)> = Vec::new();
        for (si, &j) in scales.iter().enumerate() {
            let r = pow2i(-j);
            let cnt = ds.partition_point(|&d| inside_closed(d, r));
            if cnt == 0 || ds[cnt - 1] <= 0.5 * r {
                skipped += 1;
                continue;
            }
            let rho = ds[cnt - 1];
            let first = ds.partition_point(|&d| inside_open(d, rho));
            let (lf, ef) = (pmax[cnt - 1], smin[first]);
            l_table[x * ns + si] = Some(lf);
            ell_table[x * ns + si] = Some(ef);
            if map.interior[x] {
                h = Some(h.map_or(lf / ef, |v: f64| v.max(lf / ef)));
                if cnt >= 9 && rho <= 0.25 * src.diameter() {
                    let v = lf.powi(dim) / pmass[cnt - 1];
                    vol = Some(vol.map_or((v, v), |(a, b)| (a.min(v), b.max(v))));
                }
                let k = scale_of_distance(lf);
                match per_k.iter_mut().find(|t| t.0 == k) {
                    Some(t) => t.1 += 1,
                    None => per_k.push((k, 1)),
                }
            }
        }
        for (_, c) in per_k {
            if c >= hist.len() {
                hist.resize(c + 1, 0);
            }
            hist[c] += 1;
        }
        h_point[x] = h;
    }
    let h_global = h_point.iter().flatten().fold(1.0f64, |m, &v| m.max(v));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eta = Vec::with_capacity(config.eta_samples);
    if n >= 3 {
        while eta.len() < config.eta_samples {
            let (x, a, b) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if x == a || x == b || a == b {
                continue;
            }
            let t = src.dist(x, a) / src.dist(x, b);
            let fx = asg[x] as usize;
            let ratio = tgt.dist(fx, asg[a] as usize) / tgt.dist(fx, asg[b] as usize);
            eta.push((t, ratio));
        }
    }
    Ok(MapAnalysis {
        scales,
        l_table,
        ell_table,
        h_point,
        h_global,
        eta_samples: eta,
        skipped,
        volume_ratio_range: vol,
        multiplicity_histogram: hist,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiusPolicy {
    /// Multiples of the grid spacing, or of the smallest distance off-grid.
    Spacings(f64),
    Absolute(f64),
    /// Distance to the k-th nearest neighbour (the point itself counts as the first).
    Neighbors(usize),
}

impl Default for RadiusPolicy {
    fn default() -> Self {
        RadiusPolicy::Spacings(3.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeDerivativeField {
    pub j_hat: Vec<f64>,
    pub radius: Vec<f64>,
    /// Points whose image ball had no mass at the policy radius.
    pub flagged: Vec<usize>,
    /// `|sum mu_X J - mu_Y(Y)| / mu_Y(Y)`.
    pub mass_error: f64,
}

/// `J(x) = mu_Y(f(B(x,r))) / mu_X(B(x,r))` on closed balls.
pub fn volume_derivative(map: &MapSample, policy: RadiusPolicy) -> Result<VolumeDerivativeField> {
    let src = &map.source;
    let n = src.len();
    let table = src.neighbors();
    let base = match policy {
        RadiusPolicy::Spacings(k) => Some(k * src.grid().map_or(src.min_distance(), |g| g.spacing())),
        RadiusPolicy::Absolute(r) => Some(r),
        RadiusPolicy::Neighbors(_) => None,
    };
    if let Some(r) = base {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::config("volume derivative radius must be positive"));
        }
    }
    let mut j_hat = Vec::with_capacity(n);
    let mut radius = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for x in 0..n {
        let ds = table.distances(x);
        let mut r = match (base, policy) {
            (Some(r), _) => r,
            (None, RadiusPolicy::Neighbors(k)) => ds[k.clamp(1, n) - 1],
            _ => unreachable!(),
        };
        loop {
            let cnt = ds.partition_point(|&d| inside_closed(d, r));
            let ball = &table.indices(x)[..cnt];
            let mx: f64 = ball.iter().map(|&y| src.measure(y as usize)).sum();
            let my: f64 = ball.iter().map(|&y| map.target.measure(map.assignment[y as usize] as usize)).sum();
            if my > 0.0 && mx > 0.0 {
                j_hat.push(my / mx);
                radius.push(r);
                break;
            }
            if flagged.last() != Some(&x) {
                flagged.push(x);
            }
            r *= 2.0;
        }
    }
    let total_y = map.target.total_measure();
    let pushed: f64 = (0..n).map(|x| src.measure(x) * j_hat[x]).sum();
    Ok(VolumeDerivativeField { j_hat, radius, flagged, mass_error: (pushed - total_y).abs() / total_y })
}

/// `count` balls with centres drawn from `allowed` and radii log-uniform in `radii`.
pub fn sample_balls(space: &MetricMeasureSpace, count: usize, radii: (f64, f64), allowed: &[bool], seed: u64) -> Vec<Ball> {
    let pool: Vec<usize> = (0..space.len()).filter(|&i| allowed.get(i).copied().unwrap_or(true)).collect();
    if pool.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (radii.0.ln(), radii.1.max(radii.0).ln());
    (0..count)
        .map(|_| {
            let c = pool[rng.gen_range(0..pool.len())];
            let t: f64 = rng.gen();
            Ball { center: c, radius: (lo + t * (hi - lo)).exp() }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReverseHolderReport {
    pub r_grid: Vec<f64>,
    /// `sup_B (avg_B w^r)^(1/r) / avg_B w` for each tested `r`.
    pub constants: Vec<f64>,
    /// Largest tested `r` whose constant is finite and at most `cap`.
    pub r_f_hat: Option<f64>,
    pub cap: f64,
}

/// Reverse Hölder constants of a positive weight over open balls.
pub fn reverse_holder_scan(
    space: &MetricMeasureSpace,
    w: &[f64],
    r_grid: &[f64],
    balls: &[Ball],
    cap: f64,
) -> Result<ReverseHolderReport> {
    if w.len() != space.len() {
        return Err(Error::invalid("weight length differs from the space"));
    }
    if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::domain("reverse Hölder weights must be positive and finite"));
    }
    if r_grid.iter().any(|&r| !(r >= 1.0)) {
        return Err(Error::config("reverse Hölder exponents must be at least 1"));
    }
    let mut constants = vec![1.0f64; r_grid.len()];
    for b in balls {
        let members = space.ball(b.center, b.radius);
        if members.is_empty() {
            continue;
        }
        let mass: f64 = members.iter().map(|&y| space.measure(y)).sum();
        let avg: f64 = members.iter().map(|&y| space.measure(y) * w[y]).sum::<f64>() / mass;
        for (c, &r) in constants.iter_mut().zip(r_grid) {
            let top = if r.is_infinite() {
                members.iter().fold(0.0f64, |m, &y| m.max(w[y]))
            } else {
                (members.iter().map(|&y| space.measure(y) * w[y].powf(r)).sum::<f64>() / mass).powf(1.0 / r)
            };
            *c = c.max(top / avg);
        }
    }
    let r_f_hat = r_grid
        .iter()
        .zip(&constants)
        .filter(|(_, &c)| c.is_finite() && c <= cap)
        .map(|(&r, _)| r)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |v| v.max(r))));
    Ok(ReverseHolderReport { r_grid: r_grid.to_vec(), constants, r_f_hat, cap })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangeOfVariables {
    /// `sum_x mu_X(x) u(f(x)) J(x)`.
    pub pulled_back: f64,
    /// `sum_y mu_Y(y) u(y)`.
    pub direct: f64,
    pub discrepancy: f64,
    /// `false` when the direct integral vanishes and the discrepancy is absolute.
    pub relative: bool,
}

pub fn change_of_variables_check(
    map: &MapSample,
    field_on_target: &ScalarField,
    jac: &VolumeDerivativeField,
) -> Result<ChangeOfVariables> {
    field_on_target.check_on(&map.target)?;
    let u = field_on_target.values();
    if u.iter().any(|&v| v < 0.0) {
        return Err(Error::domain("change of variables needs a nonnegative field"));
    }
    if jac.j_hat.len() != map.source.len() {
        return Err(Error::invalid("volume derivative does not match the map"));
    }
    let pulled: f64 = (0..map.source.len())
        .map(|x| map.source.measure(x) * u[map.assignment[x] as usize] * jac.j_hat[x])
        .sum();
    let direct: f64 = (0..map.target.len()).map(|y| map.target.measure(y) * u[y]).sum();
    let diff = (pulled - direct).abs();
    Ok(if direct > 0.0 {
        ChangeOfVariables { pulled_back: pulled, direct, discrepancy: diff / direct, relative: true }
    } else {
        ChangeOfVariables { pulled_back: pulled, direct, discrepancy: diff, relative: false }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRow {
    pub field: usize,
    pub params: NormParams,
    pub source_norm: f64,
    pub target_norm: f64,
    /// `||u o f|| / ||u||`.
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioSummary {
    pub params: NormParams,
    pub min: f64,
    pub max: f64,
    pub geometric_mean: f64,
}

impl RatioSummary {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub summaries: Vec<RatioSummary>,
}

pub fn summarize(params: NormParams, ratios: impl Iterator<Item = f64>) -> RatioSummary {
    let (mut lo, mut hi, mut ls, mut c) = (f64::INFINITY, 0.0f64, 0.0, 0usize);
    for r in ratios {
        lo = lo.min(r);
        hi = hi.max(r);
        ls += r.ln();
        c += 1;
    }
    RatioSummary { params, min: lo, max: hi, geometric_mean: (ls / c.max(1) as f64).exp() }
}

/// Ratios `||u o f||_source / ||u||_target` over a family generated on the target.
/// Fields with zero norm on the target are skipped.
pub fn invariance_experiment(
    map: &MapSample,
    family: &FunctionFamilySpec,
    params: &[NormParams],
    backend: &Backend,
) -> Result<RatioReport> {
    let fields = generate_family(&map.target, family)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for p in params {
        let on_source = NormEvaluator::new(&map.source, p, backend)?;
        let on_target = NormEvaluator::new(&map.target, p, backend)?;
        let start = rows.len();
        for (i, u) in fields.iter().enumerate() {
            let t = on_target.evaluate(u)?.value;
            if !(t > 0.0) {
                continue;
            }
            let s = on_source.evaluate(&map.compose(u)?)?.value;
            rows.push(RatioRow { field: i, params: *p, source_norm: s, target_norm: t, ratio: s / t });
        }
        summaries.push(summarize(*p, rows[start..].iter().map(|r| r.ratio)));
    }
    Ok(RatioReport { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FamilyKind;
    use crate::norms::NormFamily;

    fn grid2(n: usize, side: f64) -> MetricMeasureSpace {
        MetricMeasureSpace::build_euclidean_grid(2, n, side).unwrap()
    }

    #[test]
    fn identity_map_is_undistorted() {
        let s = grid2(10, 1.0);
        let m = MapSample::exact_image(&s, MapFamily::Identity).unwrap();
        let a = analyze_distortion(&m, &AnalysisConfig::default()).unwrap();
        assert!((a.h_global - 1.0).abs() < 1e-12);
        // L_f is the largest realised distance not above the radius
        let table = s.neighbors();
        for (si, &j) in a.scales.iter().enumerate() {
            let r = pow2i(-j);
            let ds = table.distances(0);
            let cnt = ds.partition_point(|&d| d <= r);
            if let Some(l) = a.l_table[si] {
                assert!((l - ds[cnt - 1]).abs() < 1e-12);
            }
        }
        let j = volume_derivative(&m, RadiusPolicy::default()).unwrap();
        assert!(j.j_hat.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let u = ScalarField::new((0..100).map(|i| (i % 7) as f64).collect()).unwrap();
        assert_eq!(m.compose(&u).unwrap(), u);
        let cov = change_of_variables_check(&m, &u, &j).unwrap();
        assert!(cov.discrepancy < 1e-12);
    }

    #[test]
    fn radial_power_one_is_identity() {
        let s = grid2(12, 1.0);
        let m = MapSample::exact_image(&s, MapFamily::RadialPower { a: 1.0 }).unwrap();
        let a = analyze_distortion(&m, &AnalysisConfig::default()).unwrap();
        assert!((a.h_global - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stretch_has_dilatation_two() {
        let s = grid2(24, 1.0);
        let lin = MapFamily::Linear([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let m = MapSample::exact_image(&s, lin).unwrap();
        let fine = s.window().unwrap();
        let cfg = AnalysisConfig { window: Some(ScaleWindow::new(fine.k_max - 2, fine.k_max).unwrap()), ..Default::default() };
        let a = analyze_distortion(&m, &cfg).unwrap();
        assert!(a.h_global >= 1.8 && a.h_global <= 2.2, "{}", a.h_global);
        for (l, e) in a.l_table.iter().zip(&a.ell_table) {
            if let (Some(l), Some(e)) = (l, e) {
                assert!(e <= l);
            }
        }
        assert!(a.eta_samples.iter().all(|&(t, r)| t > 0.0 && r > 0.0));
    }

    #[test]
    fn dilation_between_grids() {
        let s = grid2(16, 1.0);
        let t = grid2(16, 2.0);
        let m = MapSample::snapped(&s, &t, MapFamily::dilation(2.0)).unwrap();
        // exact: node i goes to node i
        assert!(m.assignment().iter().enumerate().all(|(i, &a)| a as usize == i));
        let j = volume_derivative(&m, RadiusPolicy::default()).unwrap();
        assert!(j.j_hat.iter().all(|v| (v - 4.0).abs() < 0.4));
        let u = ScalarField::constant(256, 1.0);
        let cov = change_of_variables_check(&m, &u, &j).unwrap();
        assert!(cov.discrepancy < 0.1);
    }

    #[test]
    fn radial_jacobian_matches_formula() {
        let s = grid2(40, 1.0);
        let f = MapFamily::RadialPower { a: 2.0 };
        let m = MapSample::exact_image(&s, f).unwrap();
        let j = volume_derivative(&m, RadiusPolicy::default()).unwrap();
        for x in 0..s.len() {
            let c = s.coords(x).unwrap();
            let r = c[0].hypot(c[1]);
            let inner = c.iter().all(|v| v.abs() < 0.35);
            if inner && r > 0.15 {
                let exact = 2.0 * r * r;
                assert!((j.j_hat[x] - exact).abs() < 0.25 * exact, "{} vs {exact}", j.j_hat[x]);
            }
        }
        // inverse Jacobian times forward Jacobian is about one
        let inv = m.inverse();
        let ji = volume_derivative(&inv, RadiusPolicy::Neighbors(9)).unwrap();
        let jf = volume_derivative(&m, RadiusPolicy::Neighbors(9)).unwrap();
        for x in 0..s.len() {
            if m.interior()[x] {
                let prod = jf.j_hat[x] * ji.j_hat[m.assignment()[x] as usize];
                assert!(prod > 0.5 && prod < 2.0, "{prod}");
            }
        }
    }

    #[test]
    fn reverse_holder_properties() {
        let s = grid2(20, 1.0);
        let all = vec![true; s.len()];
        let balls = sample_balls(&s, 50, (0.1, 0.4), &all, 1);
        let one = vec![1.0; s.len()];
        let rep = reverse_holder_scan(&s, &one, &[1.0, 2.0, 4.0], &balls, 10.0).unwrap();
        assert!(rep.constants.iter().all(|c| (c - 1.0).abs() < 1e-12));
        let mut spike = vec![1.0; s.len()];
        spike[s.central_point()] = 1e6;
        let rep = reverse_holder_scan(&s, &spike, &[1.0, 1.5, 2.0, 4.0, f64::INFINITY], &balls, 10.0).unwrap();
        assert!((rep.constants[0] - 1.0).abs() < 1e-12);
        assert!(rep.constants.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)));
        assert!(reverse_holder_scan(&s, &vec![0.0; s.len()], &[2.0], &balls, 10.0).is_err());
    }

    #[test]
    fn compose_round_trip_and_identity_ratios() {
        let s = grid2(8, 1.0);
        let m = MapSample::exact_image(&s, MapFamily::RadialPower { a: 1.5 }).unwrap();
        let u = ScalarField::new((0..64).map(|i| ((i * 13) % 11) as f64).collect()).unwrap();
        let back = m.inverse().compose(&m.compose(&u).unwrap()).unwrap();
        assert_eq!(back, u);
        let c = ScalarField::constant(64, 3.0);
        assert_eq!(m.compose(&c).unwrap(), c);
        let id = MapSample::exact_image(&s, MapFamily::Identity).unwrap();
        let fam = FunctionFamilySpec::new(FamilyKind::BumpMixture { bumps: 2, width: (0.2, 0.4), center_radius: 0.3 }, 4, (0.5, 1.5), 7);
        let params = [NormParams::new(0.5, 2.0, 2.0, NormFamily::M).unwrap()];
        let rep = invariance_experiment(&id, &fam, &params, &Backend::Difference { k0: 1 }).unwrap();
        assert!(rep.rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
        assert!(MapSample::from_assignment(&s, &s, vec![0; 64]).is_err());
    }
}
