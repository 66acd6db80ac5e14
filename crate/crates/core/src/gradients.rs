//! Gradient sequences, class membership, class transforms and the two
//! constructive gradients (difference averages and grand maximal functions).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::lp_bands::{self, Dictionary};
use crate::math::{exp2, powp, root};
use crate::space::{same_distance, scale_of_distance, MetricMeasureSpace, NeighborTable, ScaleWindow};

/// Nonnegative fields `g_k`, one per scale of a window; zero outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSequence {
    window: ScaleWindow,
    n: usize,
    g: Vec<f64>,
}

impl GradientSequence {
    pub fn zeros(window: ScaleWindow, n: usize) -> Self {
        GradientSequence { window, n, g: vec![0.0; window.len() * n] }
    }

    pub fn from_levels(window: ScaleWindow, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.len() != window.len() {
            return Err(Error::invalid(format!(
                "{} levels for a window of {} scales",
                levels.len(),
                window.len()
            )));
        }
        let n = levels.first().map(|l| l.len()).unwrap_or(0);
        let mut g = Vec::with_capacity(n * levels.len());
        for l in &levels {
            if l.len() != n {
                return Err(Error::invalid("gradient levels differ in length"));
            }
            g.extend_from_slice(l);
        }
        Self::from_flat(window, n, g)
    }

    pub fn from_flat(window: ScaleWindow, n: usize, g: Vec<f64>) -> Result<Self> {
        if g.len() != window.len() * n {
            return Err(Error::invalid("gradient storage does not match window and point count"));
        }
        if let Some(i) = g.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(format!("gradient entry {i} is negative or not finite")));
        }
        Ok(GradientSequence { window, n, g })
    }

    /// Same field at every scale of the window.
    pub fn constant_in_scale(window: ScaleWindow, field: &[f64]) -> Result<Self> {
        let mut g = Vec::with_capacity(window.len() * field.len());
        for _ in window.scales() {
            g.extend_from_slice(field);
        }
        Self::from_flat(window, field.len(), g)
    }

    pub fn window(&self) -> ScaleWindow {
        self.window
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: i32, x: usize) -> f64 {
        if self.window.contains(k) {
            self.g[(k - self.window.k_min) as usize * self.n + x]
        } else {
            0.0
        }
    }

    pub fn level(&self, k: i32) -> Option<&[f64]> {
        if self.window.contains(k) {
            let o = (k - self.window.k_min) as usize * self.n;
            Some(&self.g[o..o + self.n])
        } else {
            None
        }
    }

    pub fn level_mut(&mut self, k: i32) -> Option<&mut [f64]> {
        if self.window.contains(k) {
            let o = (k - self.window.k_min) as usize * self.n;
            Some(&mut self.g[o..o + self.n])
        } else {
            None
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = (i32, &[f64])> {
        self.window.scales().zip(self.g.chunks(self.n.max(1)))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.g
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        GradientSequence { window: self.window, n: self.n, g: self.g.iter().map(|v| v * alpha.abs()).collect() }
    }

    /// Pointwise `sup_k g_k`.
    pub fn sup_collapse(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n];
        for (_, l) in self.levels() {
            for (o, &v) in out.iter_mut().zip(l) {
                *o = o.max(v);
            }
        }
        out
    }

    /// Restrict or zero-extend to another window.
    pub fn rewindowed(&self, window: ScaleWindow) -> Self {
        let mut out = GradientSequence::zeros(window, self.n);
        for k in window.scales() {
            if let Some(src) = self.level(k) {
                out.level_mut(k).unwrap().copy_from_slice(src);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientClass {
    Base,
    /// Constraint at every `k` with `2^{-k-1-n1} <= d < 2^{-k+n2}`.
    Shifted { n1: u32, n2: u32 },
    /// `|du| <= d^{s-eps} sum_k 2^{-k eps} (g_k(x)+g_k(y)) [d >= 2^{-k-1-n}]`
    LowerTail { epsilon: f64, n: i32 },
    /// `|du| <= d^{s+eps} sum_k 2^{k eps} (g_k(x)+g_k(y)) [d < 2^{-k-n}]`
    UpperTail { epsilon: f64, n: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientClassSpec {
    pub class: GradientClass,
    pub s: f64,
}

impl GradientClassSpec {
    pub fn base(s: f64) -> Self {
        GradientClassSpec { class: GradientClass::Base, s }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s <= 2.0) {
            return Err(Error::config(format!("smoothness {} not in (0, 2]", self.s)));
        }
        match self.class {
            GradientClass::LowerTail { epsilon, .. } if !(epsilon > 0.0 && epsilon <= self.s) => {
                Err(Error::config(format!("lower tail epsilon {epsilon} not in (0, s]")))
            }
            GradientClass::UpperTail { epsilon, .. } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                Err(Error::config(format!("upper tail epsilon {epsilon} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Class parameters outside the range known to work for `p = inf` without
    /// extra doubling assumptions. Advisory only.
    pub fn sup_norm_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        match self.class {
            GradientClass::Shifted { n1, .. } if n1 != 0 => {
                w.push(format!("shifted class with N1 = {n1} != 0 is only equivalent for p = inf on doubling spaces"))
            }
            GradientClass::LowerTail { n, .. } if n > 0 => {
                w.push(format!("lower tail class with N = {n} > 0 is only equivalent for p = inf on doubling spaces"))
            }
            _ => {}
        }
        w
    }

    /// Norm inflation of `to_base(from_base(g))` relative to `g`, valid for
    /// `p, q >= 1` in either mixed norm.
    pub fn round_trip_constant(&self) -> f64 {
        match self.class {
            GradientClass::Base => 1.0,
            GradientClass::Shifted { n1, n2 } => (n1 + n2 + 1) as f64,
            // coefficients 2^{(1-m) eps} for offsets m >= -2N
            GradientClass::LowerTail { epsilon, n } => {
                exp2(epsilon * (1.0 + 2.0 * n as f64)) / (1.0 - exp2(-epsilon))
            }
            // coefficients 2^{(1-m) eps} for offsets m >= 0
            GradientClass::UpperTail { epsilon, .. } => exp2(epsilon) / (1.0 - exp2(-epsilon)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// Smallest `rho` with `rho * g` in the class; `inf` if no multiple works.
    pub rho_min: f64,
    /// `(x, y, k)` of the binding constraint; `k` is the pair scale for tail classes.
    pub worst_pair: Option<(usize, usize, i32)>,
    pub violated_count: usize,
}

impl FeasibilityReport {
    pub fn is_member(&self) -> bool {
        self.rho_min <= 1.0
    }
}

struct Tracker {
    rho: f64,
    worst: Option<(usize, usize, i32)>,
    violated: usize,
}

impl Tracker {
    fn new() -> Self {
        Tracker { rho: 0.0, worst: None, violated: 0 }
    }

    #[inline]
    fn push(&mut self, need: f64, have: f64, at: (usize, usize, i32)) {
        if need == 0.0 {
            return;
        }
        let r = if have > 0.0 { need / have } else { f64::INFINITY };
        if r > 1.0 {
            self.violated += 1;
        }
        if r > self.rho || self.worst.is_none() {
            self.rho = self.rho.max(r);
            self.worst = Some(at);
        }
    }
}

pub fn check_membership(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    grad: &GradientSequence,
    spec: &GradientClassSpec,
) -> Result<FeasibilityReport> {
    spec.validate()?;
    field.check_on(space)?;
    if grad.n_points() != space.len() {
        return Err(Error::invalid("gradient and space differ in point count"));
    }
    let u = field.values();
    let n = space.len();
    let w = grad.window();
    let s = spec.s;
    let mut t = Tracker::new();
    match spec.class {
        GradientClass::Base => {
            for x in 0..n {
                for y in x + 1..n {
                    let d = space.dist(x, y);
                    let k = scale_of_distance(d);
                    let have = d.powf(s) * (grad.get(k, x) + grad.get(k, y));
                    t.push((u[x] - u[y]).abs(), have, (x, y, k));
                }
            }
        }
        GradientClass::Shifted { n1, n2 } => {
            for x in 0..n {
                for y in x + 1..n {
                    let d = space.dist(x, y);
                    let kd = scale_of_distance(d);
                    let ds = d.powf(s);
                    let need = (u[x] - u[y]).abs();
                    for k in kd - n1 as i32..=kd + n2 as i32 {
                        t.push(need, ds * (grad.get(k, x) + grad.get(k, y)), (x, y, k));
                    }
                }
            }
        }
        GradientClass::LowerTail { epsilon, n: nn } => {
            // suffix[x][i] = sum_{j >= k_min + i} 2^{-j eps} g_j(x)
            let len = w.len();
            let mut suffix = vec![0.0; n * (len + 1)];
            for x in 0..n {
                for i in (0..len).rev() {
                    let k = w.k_min + i as i32;
                    suffix[x * (len + 1) + i] = suffix[x * (len + 1) + i + 1] + exp2(-(k as f64) * epsilon) * grad.get(k, x);
                }
            }
            let tail = |x: usize, from: i32| -> f64 {
                let i = (from - w.k_min).clamp(0, len as i32) as usize;
                suffix[x * (len + 1) + i]
            };
            for x in 0..n {
                for y in x + 1..n {
                    let d = space.dist(x, y);
                    let kd = scale_of_distance(d);
                    let have = d.powf(s - epsilon) * (tail(x, kd - nn) + tail(y, kd - nn));
                    t.push((u[x] - u[y]).abs(), have, (x, y, kd));
                }
            }
        }
        GradientClass::UpperTail { epsilon, n: nn } => {
            // prefix[x][i] = sum_{j < k_min + i} 2^{j eps} g_j(x)
            let len = w.len();
            let mut prefix = vec![0.0; n * (len + 1)];
            for x in 0..n {
                for i in 0..len {
                    let k = w.k_min + i as i32;
                    prefix[x * (len + 1) + i + 1] = prefix[x * (len + 1) + i] + exp2(k as f64 * epsilon) * grad.get(k, x);
                }
            }
            let head = |x: usize, to: i32| -> f64 {
                let i = (to - w.k_min + 1).clamp(0, len as i32) as usize;
                prefix[x * (len + 1) + i]
            };
            for x in 0..n {
                for y in x + 1..n {
                    let d = space.dist(x, y);
                    let kd = scale_of_distance(d);
                    let have = d.powf(s + epsilon) * (head(x, kd - nn) + head(y, kd - nn));
                    t.push((u[x] - u[y]).abs(), have, (x, y, kd));
                }
            }
        }
    }
    Ok(FeasibilityReport { rho_min: t.rho, worst_pair: t.worst, violated_count: t.violated })
}

/// Base member to class member.
///
/// Shifted: `h_k = sum_{j=-n2}^{n1} g_{k+j}`. Lower tail (`n >= 0`):
/// `h_k = 2^{n eps} g_{k-n}`. Upper tail: `h_k = 2^{(n+1) eps} g_{k+n}`.
pub fn transform_from_base(grad: &GradientSequence, spec: &GradientClassSpec) -> Result<GradientSequence> {
    spec.validate()?;
    let w = grad.window();
    let n = grad.n_points();
    match spec.class {
        GradientClass::Base => Ok(grad.clone()),
        GradientClass::Shifted { n1, n2 } => {
            let (n1, n2) = (n1 as i32, n2 as i32);
            let out_w = ScaleWindow { k_min: w.k_min - n1, k_max: w.k_max + n2 };
            let mut out = GradientSequence::zeros(out_w, n);
            for k in out_w.scales() {
                let lvl = out.level_mut(k).unwrap();
                for j in -n2..=n1 {
                    if let Some(src) = grad.level(k + j) {
                        for (o, v) in lvl.iter_mut().zip(src) {
                            *o += v;
                        }
                    }
                }
            }
            Ok(out)
        }
        GradientClass::LowerTail { epsilon, n: nn } => {
            if nn < 0 {
                return Err(Error::config("lower tail transform from the base class needs N >= 0"));
            }
            let f = exp2(nn as f64 * epsilon);
            let out_w = ScaleWindow { k_min: w.k_min + nn, k_max: w.k_max + nn };
            Ok(GradientSequence { window: out_w, n, g: grad.as_flat().iter().map(|v| v * f).collect() })
        }
        GradientClass::UpperTail { epsilon, n: nn } => {
            let f = exp2((nn as f64 + 1.0) * epsilon);
            let out_w = ScaleWindow { k_min: w.k_min - nn, k_max: w.k_max - nn };
            Ok(GradientSequence { window: out_w, n, g: grad.as_flat().iter().map(|v| v * f).collect() })
        }
    }
}

/// Class member to base member, evaluated on `target` (normally the space window).
///
/// Lower tail: `h_k = sum_{j >= k-n} 2^{(k-j+1) eps} g_j`.
/// Upper tail: `h_k = sum_{j <= k-n} 2^{(j-k) eps} g_j`. Shifted: inclusion.
pub fn transform_to_base(
    grad: &GradientSequence,
    spec: &GradientClassSpec,
    target: ScaleWindow,
) -> Result<GradientSequence> {
    spec.validate()?;
    let n = grad.n_points();
    let gw = grad.window();
    let mut out = GradientSequence::zeros(target, n);
    match spec.class {
        GradientClass::Base | GradientClass::Shifted { .. } => return Ok(grad.rewindowed(target)),
        GradientClass::LowerTail { epsilon, n: nn } => {
            for k in target.scales() {
                let lvl = out.level_mut(k).unwrap();
                for j in (k - nn).max(gw.k_min)..=gw.k_max {
                    let c = exp2((k - j + 1) as f64 * epsilon);
                    for (o, v) in lvl.iter_mut().zip(grad.level(j).unwrap()) {
                        *o += c * v;
                    }
                }
            }
        }
        GradientClass::UpperTail { epsilon, n: nn } => {
            for k in target.scales() {
                let lvl = out.level_mut(k).unwrap();
                let top = (k - nn).min(gw.k_max);
                if top < gw.k_min {
                    continue;
                }
                for j in gw.k_min..=top {
                    let c = exp2((j - k) as f64 * epsilon);
                    for (o, v) in lvl.iter_mut().zip(grad.level(j).unwrap()) {
                        *o += c * v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Precomputed kernel `1 / (d(y,z)^{sp} mu(B(y, d(y,z))))` with the neighbour
/// table, reusable across fields on one space.
#[derive(Clone, Debug)]
pub struct DifferenceKernel {
    table: NeighborTable,
    kernel: Vec<f64>,
    n: usize,
    s: f64,
    p: f64,
}

impl DifferenceKernel {
    pub fn new(space: &MetricMeasureSpace, s: f64, p: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::config("smoothness must be positive"));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::config("difference constructions need a finite p > 0"));
        }
        let table = space.neighbors();
        let n = space.len();
        let mut kernel = vec![0.0; n * n];
        for y in 0..n {
            let ds = table.distances(y);
            let idx = table.indices(y);
            // walk the sorted row so that V(y, z) is the prefix mass before the tie block
            let mut i = 0;
            while i < n {
                let d = ds[i];
                let v = table.prefix_mass(y, i);
                let mut j = i;
                while j < n && same_distance(ds[j], d) {
                    if d > 0.0 {
                        kernel[y * n + idx[j] as usize] = 1.0 / (powp(d, s * p) * v);
                    }
                    j += 1;
                }
                i = j;
            }
        }
        Ok(DifferenceKernel { table, kernel, n, s, p })
    }

    pub fn table(&self) -> &NeighborTable {
        &self.table
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn weight(&self, y: usize, z: usize) -> f64 {
        self.kernel[y * self.n + z]
    }
}

/// Window of the difference gradient: scales whose annulus can be nonempty.
pub fn difference_window(space: &MetricMeasureSpace, k0: u32) -> Option<ScaleWindow> {
    space.window().map(|w| ScaleWindow { k_min: w.k_min + 2, k_max: w.k_max + k0 as i32 + 1 })
}

/// Averaged difference gradient
/// `h_j(x)^p = avg_{y in B(x, 2^{-j-1})} sum_{2^{-j+1} <= d(x,z) < 2^{-j+k0+1}}
/// mu(z) |u(y)-u(z)|^p / (d(y,z)^{sp} V(y,z))`.
pub fn difference_gradient(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    p: f64,
    k0: u32,
) -> Result<GradientSequence> {
    let kernel = DifferenceKernel::new(space, s, p)?;
    difference_gradient_with(space, &kernel, field, k0)
}

pub fn difference_gradient_with(
    space: &MetricMeasureSpace,
    kernel: &DifferenceKernel,
    field: &ScalarField,
    k0: u32,
) -> Result<GradientSequence> {
    field.check_on(space)?;
    if k0 < 1 {
        return Err(Error::config("K0 must be at least 1"));
    }
    let n = space.len();
    let Some(window) = difference_window(space, k0) else {
        return Ok(GradientSequence::zeros(ScaleWindow { k_min: 0, k_max: 0 }, n));
    };
    let u = field.values();
    let mu = space.measures();
    let p = kernel.p;
    let table = &kernel.table;
    let mut out = GradientSequence::zeros(window, n);
    for j in window.scales() {
        let r_in = crate::math::pow2i(-j - 1);
        let a_lo = crate::math::pow2i(-j + 1);
        let a_hi = crate::math::pow2i(-j + k0 as i32 + 1);
        let lvl = out.level_mut(j).unwrap();
        for x in 0..n {
            let lo = table.count_within(x, a_lo);
            let hi = table.count_within(x, a_hi);
            if lo == hi {
                continue;
            }
            let ann = &table.indices(x)[lo..hi];
            let ball = table.ball(x, r_in);
            let mut total = 0.0;
            for &y in ball {
                let y = y as usize;
                let uy = u[y];
                let krow = &kernel.kernel[y * n..(y + 1) * n];
                let mut inner = 0.0;
                for &z in ann {
                    let z = z as usize;
                    inner += mu[z] * powp((uy - u[z]).abs(), p) * krow[z];
                }
                total += mu[y] * inner;
            }
            let mass = table.mass_within(x, r_in);
            lvl[x] = root(total / mass, p);
        }
    }
    Ok(out)
}

/// `g_k(x) = 2^{ks} sup_{phi} |phi_{2^{-k}} * u(x)|` over a finite dictionary on a periodic grid.
pub fn grand_maximal_gradient(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    dictionary: &Dictionary,
) -> Result<GradientSequence> {
    field.check_on(space)?;
    let window = space
        .window()
        .ok_or_else(|| Error::domain("grand maximal gradient needs at least two points"))?;
    let levels = lp_bands::grand_maximal_fields(space, field, dictionary, window)?;
    let mut out = GradientSequence::zeros(window, space.len());
    for (k, lvl) in window.scales().zip(levels) {
        let f = exp2(k as f64 * s);
        for (o, v) in out.level_mut(k).unwrap().iter_mut().zip(lvl) {
            *o = f * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::build_point_cloud(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap()
    }

    fn w(a: i32, b: i32) -> ScaleWindow {
        ScaleWindow::new(a, b).unwrap()
    }

    #[test]
    fn base_membership_examples() {
        let s = two_point();
        let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let spec = GradientClassSpec::base(1.0);
        let g1 = GradientSequence::from_levels(w(0, 0), vec![vec![1.0, 1.0]]).unwrap();
        let r = check_membership(&s, &u, &g1, &spec).unwrap();
        assert_eq!(r.rho_min, 1.0);
        assert_eq!(r.worst_pair, Some((0, 1, 0)));
        let r = check_membership(&s, &u, &g1.scaled(0.25), &spec).unwrap();
        assert_eq!(r.rho_min, 4.0);
        assert_eq!(r.violated_count, 1);
        let zero = GradientSequence::zeros(w(0, 0), 2);
        let c = ScalarField::constant(2, 7.0);
        assert_eq!(check_membership(&s, &c, &zero, &spec).unwrap().rho_min, 0.0);
        assert_eq!(check_membership(&s, &u, &zero, &spec).unwrap().rho_min, f64::INFINITY);
    }

    #[test]
    fn to_base_examples() {
        let g = GradientSequence::from_levels(w(-3, 3), {
            let mut l = vec![vec![0.0; 2]; 7];
            l[3] = vec![1.0, 1.0];
            l
        })
        .unwrap();
        let lower = GradientClassSpec { class: GradientClass::LowerTail { epsilon: 0.5, n: 0 }, s: 1.0 };
        let h = transform_to_base(&g, &lower, w(-3, 3)).unwrap();
        for k in -3..=3 {
            let expect = if k <= 0 { 2f64.powf((k as f64 + 1.0) / 2.0) } else { 0.0 };
            assert!((h.get(k, 0) - expect).abs() < 1e-14, "k={k}");
        }
        let upper = GradientClassSpec { class: GradientClass::UpperTail { epsilon: 1.0, n: 0 }, s: 1.0 };
        let h = transform_to_base(&g, &upper, w(-3, 3)).unwrap();
        for k in -3..=3 {
            let expect = if k >= 0 { 2f64.powi(-k) } else { 0.0 };
            assert!((h.get(k, 1) - expect).abs() < 1e-14, "k={k}");
        }
        let shifted = GradientClassSpec { class: GradientClass::Shifted { n1: 0, n2: 0 }, s: 1.0 };
        assert_eq!(transform_from_base(&g, &shifted).unwrap(), g);
        assert_eq!(transform_to_base(&g, &shifted, g.window()).unwrap(), g);
    }

    #[test]
    fn from_base_examples() {
        let g = GradientSequence::from_levels(w(0, 2), vec![vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let sh = GradientClassSpec { class: GradientClass::Shifted { n1: 1, n2: 0 }, s: 1.0 };
        let h = transform_from_base(&g, &sh).unwrap();
        for k in -2..=4 {
            assert_eq!(h.get(k, 0), g.get(k, 0) + g.get(k + 1, 0));
        }
        let lo = GradientClassSpec { class: GradientClass::LowerTail { epsilon: 0.5, n: 2 }, s: 1.0 };
        let h = transform_from_base(&g, &lo).unwrap();
        for k in -1..=5 {
            assert!((h.get(k, 0) - 2.0 * g.get(k - 2, 0)).abs() < 1e-14);
        }
        let up = GradientClassSpec { class: GradientClass::UpperTail { epsilon: 1.0, n: 1 }, s: 1.0 };
        let h = transform_from_base(&g, &up).unwrap();
        for k in -2..=3 {
            assert!((h.get(k, 0) - 4.0 * g.get(k + 1, 0)).abs() < 1e-14);
        }
        let bad = GradientClassSpec { class: GradientClass::LowerTail { epsilon: 0.5, n: -1 }, s: 1.0 };
        assert!(transform_from_base(&g, &bad).is_err());
    }

    #[test]
    fn difference_gradient_two_points() {
        let s = two_point();
        let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let h = difference_gradient(&s, &u, 1.0, 1.0, 2).unwrap();
        assert_eq!(h.window(), w(2, 3));
        // annulus [2^{-j+1}, 2^{-j+3}) holds b only for j = 2, 3; inner ball is {a}
        assert_eq!(h.get(0, 0), 0.0);
        assert_eq!(h.get(1, 0), 0.0);
        assert!((h.get(2, 0) - 2.0).abs() < 1e-14);
        assert!((h.get(3, 0) - 2.0).abs() < 1e-14);
        assert_eq!(h.get(4, 0), 0.0);
        let c = difference_gradient(&s, &ScalarField::constant(2, 1.0), 1.0, 1.0, 2).unwrap();
        assert!(c.as_flat().iter().all(|&v| v == 0.0));
        let h3 = difference_gradient(&s, &u.scaled(-3.0), 1.0, 1.0, 2).unwrap();
        for (a, b) in h3.as_flat().iter().zip(h.as_flat()) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn difference_gradient_matches_direct_sum() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 16, 1.0).unwrap();
        let u = ScalarField::new((0..16).map(|i| ((i * 7) % 5) as f64 * 0.3).collect()).unwrap();
        let (sm, p, k0) = (0.5, 2.0, 2u32);
        let h = difference_gradient(&s, &u, sm, p, k0).unwrap();
        let n = s.len();
        for j in h.window().scales() {
            for x in 0..n {
                let r_in = 2f64.powi(-j - 1);
                let (lo, hi) = (2f64.powi(-j + 1), 2f64.powi(-j + k0 as i32 + 1));
                let mut num = 0.0;
                let mut mass = 0.0;
                for y in 0..n {
                    if s.dist(x, y) >= r_in {
                        continue;
                    }
                    mass += s.measure(y);
                    for z in 0..n {
                        let dxz = s.dist(x, z);
                        if dxz < lo || dxz >= hi {
                            continue;
                        }
                        let dyz = s.dist(y, z);
                        let v: f64 = (0..n).filter(|&t| s.dist(y, t) < dyz).map(|t| s.measure(t)).sum();
                        num += s.measure(y) * s.measure(z) * (u.values()[y] - u.values()[z]).abs().powf(p)
                            / (dyz.powf(sm * p) * v);
                    }
                }
                let expect = (num / mass).powf(1.0 / p);
                assert!((h.get(j, x) - expect).abs() < 1e-12 * (1.0 + expect), "j={j} x={x}");
            }
        }
    }

    #[test]
    fn sup_norm_warnings() {
        let a = GradientClassSpec { class: GradientClass::Shifted { n1: 1, n2: 0 }, s: 0.5 };
        assert_eq!(a.sup_norm_warnings().len(), 1);
        let b = GradientClassSpec { class: GradientClass::LowerTail { epsilon: 0.5, n: 0 }, s: 0.5 };
        assert!(b.sup_norm_warnings().is_empty());
    }
}
