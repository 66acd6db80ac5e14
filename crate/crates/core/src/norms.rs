//! Mixed-norm aggregation, difference norms, Poincaré checks, medians and
//! rearrangements.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::gradients::{DifferenceKernel, GradientSequence};
use crate::math::{lq, median_interval, pow2i, powp, root, weighted_lp, weighted_median};
use crate::space::{inside_open, MetricMeasureSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormMode {
    /// Pointwise `l^q` across scales, then `L^p` over points.
    LpLq,
    /// `L^p` per scale, then `l^q` across scales.
    LqLp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormFamily {
    /// Hajłasz–Triebel–Lizorkin.
    M,
    /// Hajłasz–Besov.
    N,
    /// Classical Triebel–Lizorkin.
    F,
    /// Classical Besov.
    B,
    /// Bourdon–Pajot.
    BP,
    /// Hajłasz–Sobolev.
    Sobolev,
}

impl NormFamily {
    pub fn mode(&self) -> NormMode {
        match self {
            NormFamily::N | NormFamily::B => NormMode::LqLp,
            _ => NormMode::LpLq,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub family: NormFamily,
}

impl NormParams {
    pub fn new(s: f64, p: f64, q: f64, family: NormFamily) -> Result<Self> {
        let n = NormParams { s, p, q, family };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::config(format!("smoothness {} must be positive", self.s)));
        }
        if !(self.p > 0.0) || self.p.is_nan() {
            return Err(Error::config(format!("exponent p = {} must be positive", self.p)));
        }
        if !(self.q > 0.0) || self.q.is_nan() {
            return Err(Error::config(format!("exponent q = {} must be positive", self.q)));
        }
        if self.family == NormFamily::BP && !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config("Bourdon–Pajot norm needs 1 <= p < inf"));
        }
        Ok(())
    }
}

/// `||{g_k}||_{L^p(l^q)}` or `||{g_k}||_{l^q(L^p)}` with weights from `space`.
pub fn aggregate(space: &MetricMeasureSpace, grad: &GradientSequence, p: f64, q: f64, mode: NormMode) -> f64 {
    aggregate_weighted(space.measures(), grad, p, q, mode)
}

pub fn aggregate_weighted(mu: &[f64], grad: &GradientSequence, p: f64, q: f64, mode: NormMode) -> f64 {
    let n = grad.n_points();
    match mode {
        NormMode::LpLq => {
            let pointwise: Vec<f64> = if q.is_infinite() {
                grad.sup_collapse()
            } else {
                let mut acc = vec![0.0; n];
                for (_, l) in grad.levels() {
                    for (a, &v) in acc.iter_mut().zip(l) {
                        *a += powp(v, q);
                    }
                }
                acc.into_iter().map(|a| root(a, q)).collect()
            };
            weighted_lp(mu.iter().copied().zip(pointwise), p)
        }
        NormMode::LqLp => {
            let per_scale = grad.levels().map(|(_, l)| weighted_lp(mu.iter().copied().zip(l.iter().copied()), p));
            lq(per_scale, q)
        }
    }
}

/// `sup_{k, x} (sum_{j >= k} avg_{B(x, 2^{-k})} g_j^q)^{1/q}`; `q = inf` gives `sup_j ||g_j||_inf`.
pub fn norm_infinity_q(space: &MetricMeasureSpace, grad: &GradientSequence, q: f64) -> f64 {
    if q.is_infinite() {
        return grad.as_flat().iter().fold(0.0, |m, &v| m.max(v));
    }
    let n = space.len();
    let gw = grad.window();
    let k_lo = space.window().map_or(gw.k_min, |w| w.k_min.min(gw.k_min));
    let mut tail = vec![0.0; n];
    let mut best = 0.0f64;
    // descending k so the tail sums accumulate
    let mut k = gw.k_max;
    while k >= k_lo {
        if let Some(l) = grad.level(k) {
            for (t, &v) in tail.iter_mut().zip(l) {
                *t += powp(v, q);
            }
        }
        let r = pow2i(-k);
        for x in 0..n {
            best = best.max(space.ball_average(&tail, x, r));
        }
        k -= 1;
    }
    root(best, q)
}

/// `(sum_{x != y} mu(x) mu(y) |u(x)-u(y)|^p / (d^{sp} mu(B(x, d))))^{1/p}`.
pub fn bourdon_pajot_norm(space: &MetricMeasureSpace, field: &ScalarField, s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::config("Bourdon–Pajot norm needs 1 <= p < inf"));
    }
    let kernel = DifferenceKernel::new(space, s, p)?;
    bourdon_pajot_norm_with(space, &kernel, field)
}

pub fn bourdon_pajot_norm_with(space: &MetricMeasureSpace, kernel: &DifferenceKernel, field: &ScalarField) -> Result<f64> {
    field.check_on(space)?;
    let u = field.values();
    let mu = space.measures();
    let p = kernel.p();
    let n = space.len();
    let mut total = 0.0;
    for x in 0..n {
        let mut row = 0.0;
        for y in 0..n {
            if x != y {
                row += mu[y] * powp((u[x] - u[y]).abs(), p) * kernel.weight(x, y);
            }
        }
        total += mu[x] * row;
    }
    Ok(root(total, p))
}

/// Open ball `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

fn ball_items(space: &MetricMeasureSpace, values: &[f64], ball: Ball) -> Vec<(f64, f64)> {
    (0..space.len())
        .filter(|&y| inside_open(space.dist(ball.center, y), ball.radius))
        .map(|y| (values[y], space.measure(y)))
        .collect()
}

/// Smallest `m` with `mu{u < m} <= |B|/2` and `mu{u > m} <= |B|/2` on the ball.
pub fn median(space: &MetricMeasureSpace, field: &ScalarField, ball: Ball) -> Result<f64> {
    field.check_on(space)?;
    let mut items = ball_items(space, field.values(), ball);
    Ok(weighted_median(&mut items))
}

/// Non-increasing rearrangement of weighted values:
/// `inf {alpha > 0 : mu{|v| > alpha} <= t}`.
pub fn rearrangement_of(items: &[(f64, f64)], t: f64) -> f64 {
    let mut v: Vec<(f64, f64)> = items.iter().map(|&(a, w)| (a.abs(), w)).collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = v.iter().map(|x| x.1).sum();
    let slack = 1e-12 * total;
    let mut above = 0.0;
    let mut i = 0;
    // at each distinct value a, mu{|v| > a} is the mass strictly above it
    while i < v.len() {
        let a = v[i].0;
        if a == 0.0 {
            break;
        }
        if above > t + slack {
            break;
        }
        let mut j = i;
        let mut here = 0.0;
        while j < v.len() && v[j].0 == a {
            here += v[j].1;
            j += 1;
        }
        if above + here > t + slack {
            return a;
        }
        above += here;
        i = j;
    }
    0.0
}

pub fn rearrangement(space: &MetricMeasureSpace, field_abs: &ScalarField, t: f64) -> Result<f64> {
    field_abs.check_on(space)?;
    if !(t >= 0.0) {
        return Err(Error::invalid("rearrangement needs t >= 0"));
    }
    let items: Vec<(f64, f64)> = field_abs.values().iter().copied().zip(space.measures().iter().copied()).collect();
    Ok(rearrangement_of(&items, t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianReport {
    /// Median of `u` on the ball closest to `c`.
    pub median_value: f64,
    pub ball: Ball,
    pub c: f64,
    pub delta: f64,
    /// `|m_u(B) - c|`
    pub deviation: f64,
    /// `(|u - c| chi_B)^*(|B|/2)`
    pub rearranged: f64,
    /// `(2 avg_B |u - c|^delta)^{1/delta}`
    pub bound_rhs: f64,
}

/// Evaluates `|m_u(B) - c| <= (|u-c| chi_B)^*(|B|/2) <= (2 avg_B |u-c|^delta)^{1/delta}`.
/// A failed inequality is returned as [`Error::Violation`].
pub fn check_median_bound(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    ball: Ball,
    c: f64,
    delta: f64,
) -> Result<MedianReport> {
    let report = median_chain(space, field, ball, c, delta)?;
    let tol = 1e-12 * (1.0 + report.bound_rhs.abs());
    if report.deviation > report.rearranged + tol {
        return Err(Error::Violation(format!(
            "|m - c| = {} exceeds rearrangement {} on ball ({}, {})",
            report.deviation, report.rearranged, ball.center, ball.radius
        )));
    }
    if report.rearranged > report.bound_rhs + tol {
        return Err(Error::Violation(format!(
            "rearrangement {} exceeds averaged bound {} on ball ({}, {})",
            report.rearranged, report.bound_rhs, ball.center, ball.radius
        )));
    }
    Ok(report)
}

/// The three quantities of the median chain without judging them.
///
/// When the medians form an interval the one closest to `c` is used; an exact
/// half split otherwise breaks the first inequality for the other endpoint.
pub fn median_chain(space: &MetricMeasureSpace, field: &ScalarField, ball: Ball, c: f64, delta: f64) -> Result<MedianReport> {
    field.check_on(space)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::config("delta must lie in (0, 1]"));
    }
    let items = ball_items(space, field.values(), ball);
    let mass: f64 = items.iter().map(|t| t.1).sum();
    let shifted: Vec<(f64, f64)> = items.iter().map(|&(v, w)| ((v - c).abs(), w)).collect();
    let rearranged = rearrangement_of(&shifted, mass / 2.0);
    let avg: f64 = shifted.iter().map(|&(v, w)| w * powp(v, delta)).sum::<f64>() / mass;
    let bound_rhs = root(2.0 * avg, delta);
    let (lo, hi) = median_interval(&items);
    let m = c.clamp(lo, hi);
    Ok(MedianReport { median_value: m, ball, c, delta, deviation: (m - c).abs(), rearranged, bound_rhs })
}

/// `inf_c (avg |u - c|^r)^{1/r}` over weighted items.
///
/// `r = 1` uses the weighted median, `r > 1` golden-section search on the convex
/// objective, `r < 1` the best data value (the objective is concave between data
/// points).
pub fn inf_c_deviation(items: &[(f64, f64)], r: f64) -> f64 {
    let mass: f64 = items.iter().map(|t| t.1).sum();
    let f = |c: f64| -> f64 { items.iter().map(|&(v, w)| w * powp((v - c).abs(), r)).sum::<f64>() / mass };
    let best = if r == 1.0 {
        let mut v = items.to_vec();
        f(weighted_median(&mut v))
    } else if r < 1.0 {
        items.iter().map(|t| f(t.0)).fold(f64::INFINITY, f64::min)
    } else {
        let lo0 = items.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        let hi0 = items.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut lo, mut hi) = (lo0, hi0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - g * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let (mut fa, mut fb) = (f(a), f(b));
        while hi - lo > 1e-10 * (1.0 + hi0.abs().max(lo0.abs())) {
            if fa <= fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = f(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = f(b);
            }
        }
        f(0.5 * (lo + hi)).min(fa).min(fb)
    };
    root(best, r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoincareVariant {
    /// `inf_c avg_{B(x,2^{-k})} |u-c|` against `2^{-ks} sum_{j=k-3}^{k} avg_{B(x,2^{-k+2})} g_j`.
    L1Annulus,
    /// `inf_c (avg_{B(x,2^{-k})} |u-c|^{p*})^{1/p*}`, `p* = np/(n - eps p)`, against
    /// `2^{-k eps'} sum_{j >= k-2} 2^{-j(s-eps')} (avg_{B(x,2^{-k+1})} g_j^p)^{1/p}`.
    Subcritical { p: f64, epsilon: f64, epsilon_prime: f64, n_dim: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareBall {
    pub center: usize,
    pub k: i32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareRow {
    pub ball: PoincareBall,
    pub lhs: f64,
    /// Right-hand side without the unknown constant.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareReport {
    pub rows: Vec<PoincareRow>,
    pub max_ratio: f64,
}

/// Random balls with centres uniform over points and `k` uniform over the window.
pub fn sample_poincare_balls(space: &MetricMeasureSpace, count: usize, seed: u64) -> Vec<PoincareBall> {
    let Some(w) = space.window() else { return Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| PoincareBall { center: rng.gen_range(0..space.len()), k: rng.gen_range(w.k_min..=w.k_max) })
        .collect()
}

pub fn check_poincare(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    grad: &GradientSequence,
    s: f64,
    variant: PoincareVariant,
    balls: &[PoincareBall],
) -> Result<PoincareReport> {
    field.check_on(space)?;
    if grad.n_points() != space.len() {
        return Err(Error::invalid("gradient and space differ in point count"));
    }
    if let PoincareVariant::Subcritical { p, epsilon, epsilon_prime, n_dim } = variant {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::config("subcritical Poincaré check needs p in (0, 1]"));
        }
        if !(0.0 < epsilon && epsilon < epsilon_prime && epsilon_prime < s) {
            return Err(Error::config("subcritical Poincaré check needs 0 < eps < eps' < s"));
        }
        if !(n_dim > epsilon * p) {
            return Err(Error::config("dimension must exceed eps p"));
        }
    }
    let u = field.values();
    let gw = grad.window();
    let mut rows = Vec::with_capacity(balls.len());
    let mut max_ratio = 0.0f64;
    for &b in balls {
        let inner = ball_items(space, u, Ball { center: b.center, radius: pow2i(-b.k) });
        let (lhs, rhs) = match variant {
            PoincareVariant::L1Annulus => {
                let lhs = inf_c_deviation(&inner, 1.0);
                let big = Ball { center: b.center, radius: pow2i(-b.k + 2) };
                let mut sum = 0.0;
                for j in b.k - 3..=b.k {
                    if let Some(l) = grad.level(j) {
                        let items = ball_items(space, l, big);
                        let m: f64 = items.iter().map(|t| t.1).sum();
                        sum += items.iter().map(|&(v, w)| v * w).sum::<f64>() / m;
                    }
                }
                (lhs, pow2i(-b.k).powf(s) * sum)
            }
            PoincareVariant::Subcritical { p, epsilon, epsilon_prime, n_dim } => {
                let pstar = n_dim * p / (n_dim - epsilon * p);
                let lhs = inf_c_deviation(&inner, pstar);
                let big = Ball { center: b.center, radius: pow2i(-b.k + 1) };
                let mut sum = 0.0;
                for j in (b.k - 2).max(gw.k_min)..=gw.k_max {
                    let l = grad.level(j).unwrap();
                    let items = ball_items(space, l, big);
                    let m: f64 = items.iter().map(|t| t.1).sum();
                    let avg = items.iter().map(|&(v, w)| w * powp(v, p)).sum::<f64>() / m;
                    sum += crate::math::exp2(-(j as f64) * (s - epsilon_prime)) * root(avg, p);
                }
                (lhs, crate::math::exp2(-(b.k as f64) * epsilon_prime) * sum)
            }
        };
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
        rows.push(PoincareRow { ball: b, lhs, rhs, ratio });
    }
    Ok(PoincareReport { rows, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ScaleWindow;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::build_point_cloud(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap()
    }

    fn unit_line(values: &[f64]) -> (MetricMeasureSpace, ScalarField) {
        let n = values.len();
        let dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
        let s = MetricMeasureSpace::build_point_cloud(&dist, &vec![1.0; n]).unwrap();
        (s, ScalarField::new(values.to_vec()).unwrap())
    }

    #[test]
    fn aggregate_examples() {
        let s = two_point();
        let w1 = ScaleWindow::new(0, 0).unwrap();
        let zero = GradientSequence::zeros(w1, 2);
        assert_eq!(aggregate(&s, &zero, 2.0, 2.0, NormMode::LpLq), 0.0);
        assert_eq!(aggregate(&s, &zero, 2.0, 2.0, NormMode::LqLp), 0.0);
        let one = GradientSequence::from_levels(w1, vec![vec![1.0, 1.0]]).unwrap();
        for q in [0.5, 1.0, 2.0, f64::INFINITY] {
            assert!((aggregate(&s, &one, 2.0, q, NormMode::LpLq) - 2f64.sqrt()).abs() < 1e-15);
            assert!((aggregate(&s, &one, 2.0, q, NormMode::LqLp) - 2f64.sqrt()).abs() < 1e-15);
        }
        let two = GradientSequence::from_levels(ScaleWindow::new(0, 1).unwrap(), vec![vec![1.0, 1.0]; 2]).unwrap();
        assert!((aggregate(&s, &two, 2.0, 1.0, NormMode::LpLq) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((aggregate(&s, &two, 2.0, 1.0, NormMode::LqLp) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn infinity_q_examples() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 8, 1.0).unwrap();
        let w0 = ScaleWindow::new(0, 0).unwrap();
        assert_eq!(norm_infinity_q(&s, &GradientSequence::zeros(w0, 8), 2.0), 0.0);
        let g = GradientSequence::constant_in_scale(w0, &[1.0; 8]).unwrap();
        for q in [0.5, 1.0, 3.0, f64::INFINITY] {
            assert!((norm_infinity_q(&s, &g, q) - 1.0).abs() < 1e-14);
        }
        let g2 = GradientSequence::constant_in_scale(ScaleWindow::new(0, 1).unwrap(), &[1.0; 8]).unwrap();
        assert!((norm_infinity_q(&s, &g2, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bourdon_pajot_examples() {
        let s = two_point();
        let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
        assert!((bourdon_pajot_norm(&s, &u, 1.0, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(bourdon_pajot_norm(&s, &ScalarField::constant(2, 5.0), 1.0, 1.0).unwrap(), 0.0);
        assert!((bourdon_pajot_norm(&s, &u.scaled(-2.5), 1.0, 1.0).unwrap() - 10.0).abs() < 1e-13);
        assert!(bourdon_pajot_norm(&s, &u, 1.0, 0.5).is_err());
    }

    #[test]
    fn median_examples() {
        let (s, u) = unit_line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let all = Ball { center: 0, radius: 100.0 };
        assert_eq!(median(&s, &u, all).unwrap(), 2.0);
        let (s2, u2) = unit_line(&[0.0, 1.0]);
        assert_eq!(median(&s2, &u2, all).unwrap(), 0.0);
        assert_eq!(median(&s, &ScalarField::constant(5, 1.5), all).unwrap(), 1.5);
    }

    #[test]
    fn rearrangement_examples() {
        let (s, v) = unit_line(&[3.0, 1.0, 2.0]);
        assert_eq!(rearrangement(&s, &v, 1.5).unwrap(), 2.0);
        assert_eq!(rearrangement(&s, &v, 0.0).unwrap(), 3.0);
        assert_eq!(rearrangement(&s, &v, 3.0).unwrap(), 0.0);
        assert_eq!(rearrangement(&s, &v, 7.0).unwrap(), 0.0);
    }

    #[test]
    fn median_chain_example() {
        let (s, u) = unit_line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let r = check_median_bound(&s, &u, Ball { center: 0, radius: 100.0 }, 0.0, 1.0).unwrap();
        assert_eq!(r.deviation, 2.0);
        assert_eq!(r.rearranged, 2.0);
        assert!((r.bound_rhs - 4.0).abs() < 1e-14);
        let c = check_median_bound(&s, &ScalarField::constant(5, 2.0), Ball { center: 2, radius: 100.0 }, 2.0, 0.5).unwrap();
        assert_eq!((c.deviation, c.rearranged, c.bound_rhs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn exact_half_split_uses_the_median_closest_to_c() {
        // atoms split exactly in half: every m in [0, 1] is a median, rearrangement at |B|/2 is 0
        let (s, u) = unit_line(&[0.0, 1.0]);
        let ball = Ball { center: 0, radius: 10.0 };
        assert_eq!(median(&s, &u, ball).unwrap(), 0.0);
        let r = check_median_bound(&s, &u, ball, 1.0, 1.0).unwrap();
        assert_eq!((r.median_value, r.deviation, r.rearranged), (1.0, 0.0, 0.0));
        let r = check_median_bound(&s, &u, ball, 0.4, 1.0).unwrap();
        assert_eq!((r.median_value, r.deviation), (0.4, 0.0));
        let r = check_median_bound(&s, &u, ball, -2.0, 0.5).unwrap();
        assert_eq!(r.median_value, 0.0);
        assert!(r.deviation <= r.rearranged);
    }

    #[test]
    fn poincare_examples() {
        let s = two_point();
        let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let g = GradientSequence::from_levels(ScaleWindow::new(0, 0).unwrap(), vec![vec![1.0, 1.0]]).unwrap();
        let rep = check_poincare(&s, &u, &g, 1.0, PoincareVariant::L1Annulus, &[PoincareBall { center: 0, k: 0 }]).unwrap();
        assert!((rep.rows[0].lhs - 0.5).abs() < 1e-15);
        assert!((rep.rows[0].rhs - 1.0).abs() < 1e-15);
        assert!(rep.max_ratio.is_finite());
        let c = ScalarField::constant(2, 3.0);
        let rep = check_poincare(&s, &c, &g, 1.0, PoincareVariant::L1Annulus, &[PoincareBall { center: 1, k: 0 }]).unwrap();
        assert_eq!(rep.rows[0].ratio, 0.0);
    }

    #[test]
    fn inf_c_matches_brute_force() {
        let items = [(0.3, 1.0), (1.7, 0.5), (-0.4, 2.0), (2.2, 0.25), (0.9, 1.0)];
        for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let mass: f64 = items.iter().map(|t| t.1).sum();
            let mut best = f64::INFINITY;
            for i in 0..=300_000 {
                let c = -0.4 + 2.6 * i as f64 / 300_000.0;
                let v: f64 = items.iter().map(|&(x, w)| w * (x - c).abs().powf(r)).sum::<f64>() / mass;
                best = best.min(v);
            }
            let expect = best.powf(1.0 / r);
            assert!((inf_c_deviation(&items, r) - expect).abs() < 1e-6, "r={r}");
        }
    }
}
