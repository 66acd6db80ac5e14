use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::gradients::GradientSequence;
use crate::math::{conjugate, powp, root};
use crate::norms::NormMode;
use crate::space::{scale_of_distance, MetricMeasureSpace, ScaleWindow};

/// `g_slot(x) + g_slot(y) >= c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub x: u32,
    pub y: u32,
    pub slot: u32,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// One slot per active dyadic scale, in increasing order.
    Dyadic { scales: Vec<i32>, window: ScaleWindow },
    /// A single gradient shared by all pairs.
    Single,
}

/// Finite convex program `min ||g|| subject to g_k(x) + g_k(y) >= |u(x)-u(y)| / d^s`.
///
/// Pairs with `u(x) = u(y)` are dropped since `g >= 0` satisfies them.
/// Variables are stored slot-major: `g[slot * n + x]`.
#[derive(Clone, Debug)]
pub struct HajlaszProgram {
    pub(crate) n: usize,
    pub(crate) mu: Vec<f64>,
    pub(crate) layout: Layout,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) p: f64,
    pub(crate) q: f64,
    pub(crate) mode: NormMode,
    pub(crate) s: f64,
}

fn check_exponents(s: f64, p: f64, q: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::config("smoothness must be positive"));
    }
    if !(p > 0.0) || p.is_nan() || !(q > 0.0) || q.is_nan() {
        return Err(Error::config("exponents must be positive or infinite"));
    }
    Ok(())
}

pub fn build_program(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    p: f64,
    q: f64,
    mode: NormMode,
) -> Result<HajlaszProgram> {
    check_exponents(s, p, q)?;
    field.check_on(space)?;
    let u = field.values();
    let n = space.len();
    let mut raw: Vec<(i32, u32, u32, f64)> = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let du = (u[x] - u[y]).abs();
            if du > 0.0 {
                let d = space.dist(x, y);
                raw.push((scale_of_distance(d), x as u32, y as u32, du / d.powf(s)));
            }
        }
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut scales: Vec<i32> = raw.iter().map(|r| r.0).collect();
    scales.dedup();
    let constraints = raw
        .iter()
        .map(|&(k, x, y, c)| Constraint { x, y, slot: scales.binary_search(&k).unwrap() as u32, c })
        .collect();
    let window = space.window().unwrap_or(ScaleWindow { k_min: 0, k_max: 0 });
    Ok(HajlaszProgram {
        n,
        mu: space.measures().to_vec(),
        layout: Layout::Dyadic { scales, window },
        constraints,
        p,
        q,
        mode,
        s,
    })
}

/// Program with one gradient for every pair regardless of scale, objective `||g||_{L^p}`.
pub fn build_sobolev_program(space: &MetricMeasureSpace, field: &ScalarField, s: f64, p: f64) -> Result<HajlaszProgram> {
    check_exponents(s, p, p)?;
    field.check_on(space)?;
    let u = field.values();
    let n = space.len();
    let mut constraints = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let du = (u[x] - u[y]).abs();
            if du > 0.0 {
                constraints.push(Constraint { x: x as u32, y: y as u32, slot: 0, c: du / space.dist(x, y).powf(s) });
            }
        }
    }
    Ok(HajlaszProgram { n, mu: space.measures().to_vec(), layout: Layout::Single, constraints, p, q: p, mode: NormMode::LpLq, s })
}

impl HajlaszProgram {
    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> usize {
        match &self.layout {
            Layout::Dyadic { scales, .. } => scales.len(),
            Layout::Single => usize::from(!self.constraints.is_empty()),
        }
    }

    pub fn n_variables(&self) -> usize {
        self.slots() * self.n
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn smoothness(&self) -> f64 {
        self.s
    }

    pub fn c_max(&self) -> f64 {
        self.constraints.iter().fold(0.0, |m, c| m.max(c.c))
    }

    /// Copy with every requirement multiplied by `factor`.
    pub(crate) fn rescaled(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for c in p.constraints.iter_mut() {
            c.c *= factor;
        }
        p
    }

    /// Copy with different objective exponents.
    pub(crate) fn with_exponents(&self, p: f64, q: f64) -> Self {
        let mut out = self.clone();
        out.p = p;
        out.q = q;
        out
    }

    /// Variables that appear in at least one constraint.
    pub(crate) fn active_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_variables()];
        for c in &self.constraints {
            m[c.slot as usize * self.n + c.x as usize] = true;
            m[c.slot as usize * self.n + c.y as usize] = true;
        }
        m
    }

    /// Mixed norm of slot-major variables.
    pub fn objective(&self, g: &[f64]) -> f64 {
        objective_with(&self.mu, self.n, self.slots(), self.p, self.q, self.mode, g)
    }

    /// Dual norm under the pairing `sum v g`.
    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        let (n, slots) = (self.n, self.slots());
        let pc = conjugate(self.p);
        let qc = conjugate(self.q);
        // dual of weighted L^p on one slice
        let dual_lp = |vals: &mut dyn Iterator<Item = (f64, f64)>| -> f64 {
            if pc.is_infinite() {
                vals.fold(0.0f64, |m, (w, v)| m.max(v.abs() / w))
            } else if pc == 1.0 {
                vals.map(|(_, v)| v.abs()).sum()
            } else {
                root(vals.map(|(w, v)| w.powf(1.0 - pc) * powp(v.abs(), pc)).sum::<f64>(), pc)
            }
        };
        match self.mode {
            NormMode::LpLq => {
                let mut rows = (0..n).map(|x| {
                    let vals = (0..slots).map(|k| v[k * n + x]);
                    (self.mu[x], crate::math::lq(vals, qc))
                });
                dual_lp(&mut rows)
            }
            NormMode::LqLp => {
                let per = (0..slots).map(|k| {
                    let mut it = (0..n).map(|x| (self.mu[x], v[k * n + x]));
                    dual_lp(&mut it)
                });
                crate::math::lq(per, qc)
            }
        }
    }

    /// Smallest `rho` with `rho * g` feasible; `inf` if some requirement meets a zero sum.
    pub fn feasibility_ratio(&self, g: &[f64]) -> f64 {
        let n = self.n;
        let mut rho = 0.0f64;
        for c in &self.constraints {
            let base = c.slot as usize * n;
            let have = g[base + c.x as usize] + g[base + c.y as usize];
            if have <= 0.0 {
                return f64::INFINITY;
            }
            rho = rho.max(c.c / have);
        }
        rho
    }

    /// Variables as a gradient sequence on the space window (dyadic layout only).
    pub fn to_sequence(&self, g: &[f64]) -> Option<GradientSequence> {
        match &self.layout {
            Layout::Dyadic { scales, window } => {
                let mut out = GradientSequence::zeros(*window, self.n);
                for (i, &k) in scales.iter().enumerate() {
                    out.level_mut(k)?.copy_from_slice(&g[i * self.n..(i + 1) * self.n]);
                }
                Some(out)
            }
            Layout::Single => None,
        }
    }
}

pub(crate) fn objective_with(mu: &[f64], n: usize, slots: usize, p: f64, q: f64, mode: NormMode, g: &[f64]) -> f64 {
    match mode {
        NormMode::LpLq => {
            let rows = (0..n).map(|x| (mu[x], crate::math::lq((0..slots).map(|k| g[k * n + x]), q)));
            crate::math::weighted_lp(rows, p)
        }
        NormMode::LqLp => {
            let per = (0..slots).map(|k| crate::math::weighted_lp((0..n).map(|x| (mu[x], g[k * n + x])), p));
            crate::math::lq(per, q)
        }
    }
}
