//! Littlewood–Paley band decomposition on periodic grids, classical Besov and
//! Triebel–Lizorkin norms, and grand-norm approximants from a finite dictionary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{self, Spectrum};
use crate::fields::ScalarField;
use crate::math::{exp2, lq, powp, root};
use crate::space::{inside_open, GridGeometry, MetricMeasureSpace, ScaleWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandNormalization {
    /// `sum_k psi_k = 1`.
    Partition,
    /// `sum_k psi_k^2 = 1`, which makes the decomposition a Parseval frame.
    SquaredPartition,
}

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn taper(r: f64, sharpness: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let f = |t: f64| if t > 0.0 { (-sharpness / t).exp() } else { 0.0 };
    let a = f(2.0 - r);
    let b = f(r - 1.0);
    a / (a + b)
}

/// `psi_k(xi) = taper(2^{-k}|xi|) - taper(2^{-k+1}|xi|)`, supported in `[2^{k-1}, 2^{k+1}]`.
pub fn band_profile(k: i32, xi: f64, sharpness: f64) -> f64 {
    taper(exp2(-k as f64) * xi, sharpness) - taper(exp2(-(k as f64) + 1.0) * xi, sharpness)
}

#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: GridGeometry,
    k_min: i32,
    k_max: i32,
    sharpness: f64,
    normalization: BandNormalization,
    multipliers: Vec<Vec<f64>>,
}

/// Smallest band range whose partition of unity covers every nonzero grid frequency.
pub fn covering_range(grid: &GridGeometry) -> (i32, i32) {
    let f = fft::frequency_magnitudes(grid);
    let lo = f.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(0.0, f64::max);
    (lo.log2().floor() as i32, hi.log2().ceil() as i32)
}

pub fn build_band_filters(
    space: &MetricMeasureSpace,
    k_range: (i32, i32),
    sharpness: f64,
    normalization: BandNormalization,
) -> Result<FilterBank> {
    let grid = space
        .periodic_grid()
        .ok_or_else(|| Error::domain("band filters need a periodic grid"))?;
    if !(sharpness > 0.0 && sharpness.is_finite()) {
        return Err(Error::config("taper sharpness must be positive"));
    }
    let (k_min, k_max) = k_range;
    if k_min > k_max {
        return Err(Error::config("empty band range"));
    }
    let (need_lo, need_hi) = covering_range(&grid);
    if k_min > need_lo || k_max < need_hi {
        return Err(Error::config(format!(
            "bands {k_min}..={k_max} do not cover the grid frequencies; need {need_lo}..={need_hi}"
        )));
    }
    let freqs = fft::frequency_magnitudes(&grid);
    let mut multipliers: Vec<Vec<f64>> = (k_min..=k_max)
        .map(|k| freqs.iter().map(|&xi| if xi > 0.0 { band_profile(k, xi, sharpness) } else { 0.0 }).collect())
        .collect();
    if normalization == BandNormalization::SquaredPartition {
        for i in 0..freqs.len() {
            let ss: f64 = multipliers.iter().map(|m| m[i] * m[i]).sum();
            if ss > 0.0 {
                let inv = 1.0 / ss.sqrt();
                for m in multipliers.iter_mut() {
                    m[i] *= inv;
                }
            }
        }
    }
    let bank = FilterBank { grid, k_min, k_max, sharpness, normalization, multipliers };
    bank.check_partition()?;
    Ok(bank)
}

impl FilterBank {
    pub fn grid(&self) -> GridGeometry {
        self.grid
    }

    pub fn k_range(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn normalization(&self) -> BandNormalization {
        self.normalization
    }

    /// Multiplier of band `k` at DFT index `i`.
    pub fn multiplier(&self, k: i32, i: usize) -> f64 {
        if k < self.k_min || k > self.k_max {
            0.0
        } else {
            self.multipliers[(k - self.k_min) as usize][i]
        }
    }

    fn check_partition(&self) -> Result<()> {
        let freqs = fft::frequency_magnitudes(&self.grid);
        for (i, &xi) in freqs.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let total: f64 = match self.normalization {
                BandNormalization::Partition => self.multipliers.iter().map(|m| m[i]).sum(),
                BandNormalization::SquaredPartition => self.multipliers.iter().map(|m| m[i] * m[i]).sum(),
            };
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Violation(format!("band partition sums to {total} at frequency {xi}")));
            }
        }
        Ok(())
    }
}

/// Band-filtered copies of a field, indexed by band.
#[derive(Clone, Debug)]
pub struct BandCoefficients {
    grid: GridGeometry,
    k_min: i32,
    bands: Vec<Vec<f64>>,
}

impl BandCoefficients {
    pub fn band(&self, k: i32) -> Option<&[f64]> {
        let i = k.checked_sub(self.k_min)?;
        self.bands.get(usize::try_from(i).ok()?).map(|b| b.as_slice())
    }

    pub fn scales(&self) -> impl Iterator<Item = (i32, &[f64])> {
        (self.k_min..).zip(self.bands.iter().map(|b| b.as_slice()))
    }

    pub fn grid(&self) -> GridGeometry {
        self.grid
    }

    /// Sum over bands.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for b in &self.bands {
            for (o, v) in out.iter_mut().zip(b) {
                *o += v;
            }
        }
        out
    }
}

pub fn band_decompose(field: &ScalarField, bank: &FilterBank) -> Result<BandCoefficients> {
    if field.len() != bank.grid.len() {
        return Err(Error::invalid("field does not live on the bank's grid"));
    }
    let spec = fft::forward(&bank.grid, field.values());
    let bands = bank.multipliers.iter().map(|m| fft::inverse_product(&bank.grid, &spec, m, None)).collect();
    Ok(BandCoefficients { grid: bank.grid, k_min: bank.k_min, bands })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedOrder {
    /// Triebel–Lizorkin: `l^q` in scale inside `L^p`.
    TriebelLizorkin,
    /// Besov: `L^p` inside `l^q`.
    Besov,
}

/// Mixed norm of `2^{ks} |f_k|` over grid fields `f_k` with cell measure.
pub fn scale_mixed_norm(grid: &GridGeometry, levels: &[(i32, &[f64])], s: f64, p: f64, q: f64, order: MixedOrder) -> f64 {
    let n = grid.len();
    let h = grid.cell_measure();
    if levels.is_empty() {
        return 0.0;
    }
    match order {
        MixedOrder::Besov => {
            let per = levels.iter().map(|&(k, f)| {
                let lp = if p.is_infinite() {
                    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                } else {
                    root(h * f.iter().map(|v| powp(v.abs(), p)).sum::<f64>(), p)
                };
                exp2(k as f64 * s) * lp
            });
            lq(per, q)
        }
        MixedOrder::TriebelLizorkin => {
            if p.is_infinite() {
                if q.is_infinite() {
                    return levels.iter().fold(0.0f64, |m, &(k, f)| {
                        m.max(exp2(k as f64 * s) * f.iter().fold(0.0f64, |a, v| a.max(v.abs())))
                    });
                }
                return tl_sup_average(grid, levels, s, q);
            }
            let mut point = vec![0.0f64; n];
            for &(k, f) in levels {
                let w = exp2(k as f64 * s);
                for (a, v) in point.iter_mut().zip(f) {
                    if q.is_infinite() {
                        *a = a.max(w * v.abs());
                    } else {
                        *a += powp(w * v.abs(), q);
                    }
                }
            }
            let vals = point.into_iter().map(|a| if q.is_infinite() { a } else { root(a, q) });
            root(h * vals.map(|v| powp(v, p)).sum::<f64>(), p)
        }
    }
}

/// `sup_x sup_l (avg_{B(x,2^{-l})} sum_{k>=l} 2^{ksq} |f_k|^q)^{1/q}` over the band range.
fn tl_sup_average(grid: &GridGeometry, levels: &[(i32, &[f64])], s: f64, q: f64) -> f64 {
    let n = grid.len();
    let space = MetricMeasureSpace::build_grid_with_budget(grid.n_dim, grid.resolution, grid.side_length, true, usize::MAX)
        .expect("grid geometry already validated");
    let mut sorted: Vec<(i32, &[f64])> = levels.to_vec();
    sorted.sort_by_key(|t| core::cmp::Reverse(t.0));
    let mut tail = vec![0.0; n];
    let mut best = 0.0f64;
    for &(l, f) in &sorted {
        let w = exp2(l as f64 * s);
        for (t, v) in tail.iter_mut().zip(f) {
            *t += powp(w * v.abs(), q);
        }
        // ball offsets are translation invariant on the torus
        let r = exp2(-(l as f64));
        let offsets: Vec<usize> = (0..n).filter(|&o| inside_open(space.dist(0, o), r)).collect();
        for x in 0..n {
            let xi = grid.multi_index(x);
            let mut acc = 0.0;
            for &o in &offsets {
                let oi = grid.multi_index(o);
                let mut idx = [0usize; 3];
                for a in 0..grid.n_dim {
                    idx[a] = (xi[a] + oi[a]) % grid.resolution;
                }
                acc += tail[grid.flat_index(&idx[..grid.n_dim])];
            }
            best = best.max(acc / offsets.len() as f64);
        }
    }
    root(best, q)
}

pub fn tl_norm(coeffs: &BandCoefficients, s: f64, p: f64, q: f64) -> f64 {
    let levels: Vec<(i32, &[f64])> = coeffs.scales().collect();
    scale_mixed_norm(&coeffs.grid, &levels, s, p, q, MixedOrder::TriebelLizorkin)
}

pub fn besov_norm(coeffs: &BandCoefficients, s: f64, p: f64, q: f64) -> f64 {
    let levels: Vec<(i32, &[f64])> = coeffs.scales().collect();
    scale_mixed_norm(&coeffs.grid, &levels, s, p, q, MixedOrder::Besov)
}

/// Test function in the finite dictionary, built from Gaussians
/// `G(x) = exp(-|x|^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomShape {
    /// `G(x) - ratio^{-n} G(x / ratio)`.
    DifferenceOfGaussians { sigma: f64, ratio: f64 },
    /// `G(x - delta e_axis) - G(x)`.
    FirstDifference { sigma: f64, delta: f64, axis: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub shape: AtomShape,
    /// Multiplier bringing the sampled `S_{1,m}` seminorm down to 1.
    pub scale: f64,
}

impl Atom {
    fn raw_value_grad(&self, x: &[f64]) -> (f64, [f64; 3]) {
        let n = x.len();
        let gauss = |y: &[f64], sigma: f64| -> (f64, [f64; 3]) {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            let g = (-r2 / (2.0 * sigma * sigma)).exp();
            let mut d = [0.0; 3];
            for i in 0..y.len() {
                d[i] = -y[i] / (sigma * sigma) * g;
            }
            (g, d)
        };
        match self.shape {
            AtomShape::DifferenceOfGaussians { sigma, ratio } => {
                let (a, da) = gauss(x, sigma);
                let mut y = [0.0; 3];
                for i in 0..n {
                    y[i] = x[i] / ratio;
                }
                let (b, db) = gauss(&y[..n], sigma);
                let c = ratio.powi(-(n as i32));
                let mut d = [0.0; 3];
                for i in 0..n {
                    d[i] = da[i] - c * db[i] / ratio;
                }
                (a - c * b, d)
            }
            AtomShape::FirstDifference { sigma, delta, axis } => {
                let mut y = [0.0; 3];
                y[..n].copy_from_slice(x);
                y[axis] -= delta;
                let (a, da) = gauss(&y[..n], sigma);
                let (b, db) = gauss(x, sigma);
                let mut d = [0.0; 3];
                for i in 0..n {
                    d[i] = da[i] - db[i];
                }
                (a - b, d)
            }
        }
    }

    /// Normalized atom value.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.scale * self.raw_value_grad(x).0
    }
}

/// Sampled `sup_x (1+|x|)^m max(|phi|, |grad phi|)` on a grid over `[-8, 8]^n`.
fn sampled_seminorm(atom: &Atom, n_dim: usize, m: f64) -> f64 {
    let (half, step) = match n_dim {
        1 => (8.0, 0.005),
        2 => (8.0, 0.04),
        _ => (8.0, 0.16),
    };
    let per_axis = (2.0 * half / step) as usize + 1;
    let total = per_axis.pow(n_dim as u32);
    let mut best = 0.0f64;
    let mut x = [0.0; 3];
    for i in 0..total {
        let mut t = i;
        for a in x.iter_mut().take(n_dim) {
            *a = -half + step * (t % per_axis) as f64;
            t /= per_axis;
        }
        let (v, d) = atom.raw_value_grad(&x[..n_dim]);
        let r: f64 = x[..n_dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = (1.0 + r).powf(m);
        let mut local = v.abs();
        for di in d.iter().take(n_dim) {
            local = local.max(di.abs());
        }
        best = best.max(w * local);
    }
    best
}

/// Finite family of mean-zero test functions, each normalized to unit sampled
/// `S_{1,m}` seminorm with `m = n + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    n_dim: usize,
    atoms: Vec<Atom>,
}

/// Gaussian width putting the difference-of-Gaussians spectral peak near `|xi| = 1`.
pub const STANDARD_SIGMA: f64 = 0.153;
const SEMINORM_SAFETY: f64 = 1.01;

impl Dictionary {
    pub fn new(n_dim: usize, shapes: &[AtomShape]) -> Result<Self> {
        if !(1..=3).contains(&n_dim) {
            return Err(Error::config("dictionary dimension must be 1, 2 or 3"));
        }
        if shapes.is_empty() {
            return Err(Error::config("dictionary must contain at least one atom"));
        }
        let m = n_dim as f64 + 2.0;
        let mut atoms = Vec::with_capacity(shapes.len());
        for &shape in shapes {
            match shape {
                AtomShape::DifferenceOfGaussians { sigma, ratio } if sigma > 0.0 && ratio > 1.0 => {}
                AtomShape::FirstDifference { sigma, delta, axis } if sigma > 0.0 && delta != 0.0 && axis < n_dim => {}
                _ => return Err(Error::config(format!("invalid atom {shape:?}"))),
            }
            let raw = Atom { shape, scale: 1.0 };
            let semi = sampled_seminorm(&raw, n_dim, m);
            atoms.push(Atom { shape, scale: 1.0 / (SEMINORM_SAFETY * semi) });
        }
        Ok(Dictionary { n_dim, atoms })
    }

    /// Two differences of Gaussians (dilation 2 and sqrt 2) plus one first
    /// difference per axis.
    pub fn standard(n_dim: usize) -> Result<Self> {
        let mut shapes = vec![
            AtomShape::DifferenceOfGaussians { sigma: STANDARD_SIGMA, ratio: 2.0 },
            AtomShape::DifferenceOfGaussians { sigma: STANDARD_SIGMA * 1.5, ratio: core::f64::consts::SQRT_2 },
        ];
        for axis in 0..n_dim {
            shapes.push(AtomShape::FirstDifference { sigma: STANDARD_SIGMA, delta: 0.5, axis });
        }
        Self::new(n_dim, &shapes)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn single(&self, i: usize) -> Dictionary {
        Dictionary { n_dim: self.n_dim, atoms: vec![self.atoms[i]] }
    }
}

/// Sampled periodized kernel of `phi_{2^{-k}}` times the cell measure, mean removed.
fn atom_kernel(atom: &Atom, grid: &GridGeometry, k: i32) -> Vec<f64> {
    let n = grid.len();
    let nd = grid.n_dim;
    let h = grid.spacing();
    let l = grid.side_length;
    let dil = exp2(k as f64);
    let amp = dil.powi(nd as i32) * grid.cell_measure();
    let r = grid.resolution;
    let mut out = vec![0.0; n];
    let images = 2i64;
    let span = (2 * images + 1) as usize;
    let n_img = span.pow(nd as u32);
    for (i, o) in out.iter_mut().enumerate() {
        let idx = grid.multi_index(i);
        let mut base = [0.0; 3];
        for a in 0..nd {
            let m = if idx[a] > r / 2 { idx[a] as f64 - r as f64 } else { idx[a] as f64 };
            base[a] = m * h;
        }
        let mut acc = 0.0;
        for im in 0..n_img {
            let mut t = im;
            let mut y = [0.0; 3];
            for a in 0..nd {
                let shift = (t % span) as f64 - images as f64;
                t /= span;
                y[a] = dil * (base[a] + shift * l);
            }
            acc += atom.value(&y[..nd]);
        }
        *o = amp * acc;
    }
    let mean = out.iter().sum::<f64>() / n as f64;
    for o in out.iter_mut() {
        *o -= mean;
    }
    out
}

/// `sup_{phi} |phi_{2^{-k}} * u|` for each scale of the window (periodic grid only).
pub fn grand_maximal_fields(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    dictionary: &Dictionary,
    window: ScaleWindow,
) -> Result<Vec<Vec<f64>>> {
    let grid = space
        .periodic_grid()
        .ok_or_else(|| Error::domain("grand maximal functions need a periodic grid"))?;
    field.check_on(space)?;
    if dictionary.n_dim != grid.n_dim {
        return Err(Error::config("dictionary dimension differs from the grid"));
    }
    let spec: Spectrum = fft::forward(&grid, field.values());
    let mut out = Vec::with_capacity(window.len());
    for k in window.scales() {
        let mut sup = vec![0.0f64; grid.len()];
        for atom in &dictionary.atoms {
            let ker = atom_kernel(atom, &grid, k);
            let ks = fft::forward(&grid, &ker);
            let conv = fft::inverse_product(&grid, &spec, &ks.re, Some(&ks.im));
            for (s, c) in sup.iter_mut().zip(conv) {
                *s = s.max(c.abs());
            }
        }
        out.push(sup);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrandFamily {
    F,
    B,
}

/// Grand Triebel–Lizorkin or Besov norm with the dictionary sup, over the space's scale window.
pub fn grand_norm(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    p: f64,
    q: f64,
    dictionary: &Dictionary,
    family: GrandFamily,
) -> Result<f64> {
    let grid = space
        .periodic_grid()
        .ok_or_else(|| Error::domain("grand norms need a periodic grid"))?;
    let Some(window) = space.window() else { return Ok(0.0) };
    let fields = grand_maximal_fields(space, field, dictionary, window)?;
    let levels: Vec<(i32, &[f64])> = window.scales().zip(fields.iter().map(|f| f.as_slice())).collect();
    let order = match family {
        GrandFamily::F => MixedOrder::TriebelLizorkin,
        GrandFamily::B => MixedOrder::Besov,
    };
    Ok(scale_mixed_norm(&grid, &levels, s, p, q, order))
}
