//! Small numeric helpers shared across modules.

#[allow(unused_imports)]
use num_traits::Float;

/// `x^p` for `x >= 0`, with fast paths for small integer exponents.
#[inline]
pub fn powp(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p.fract() == 0.0 && p > 0.0 && p <= 32.0 {
        x.powi(p as i32)
    } else if x == 0.0 {
        if p > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powf(p)
    }
}

#[inline]
pub fn root(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / p)
    }
}

#[inline]
pub fn pow2i(k: i32) -> f64 {
    libm::ldexp(1.0, k)
}

#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

/// Conjugate exponent `p / (p - 1)`; `1 -> inf`, `inf -> 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Weighted `(sum w_i |v_i|^p)^{1/p}`; `p = inf` gives the plain max.
pub fn weighted_lp(values: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, (_, v)| m.max(v.abs()))
    } else {
        let s: f64 = values.map(|(w, v)| w * powp(v.abs(), p)).sum();
        root(s, p)
    }
}

/// Unweighted `l^q` norm.
pub fn lq(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    weighted_lp(values.map(|v| (1.0, v)), q)
}

/// Index of the median in a list of (value, weight), smallest value `m` with
/// `w{v < m} <= W/2` and `w{v > m} <= W/2`.
pub fn weighted_median(items: &mut [(f64, f64)]) -> f64 {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = items.iter().map(|t| t.1).sum();
    let half = 0.5 * total;
    let tol = 1e-12 * total;
    let mut below = 0.0;
    let mut i = 0;
    while i < items.len() {
        let v = items[i].0;
        let mut j = i;
        let mut here = 0.0;
        while j < items.len() && items[j].0 == v {
            here += items[j].1;
            j += 1;
        }
        let above = total - below - here;
        if below <= half + tol && above <= half + tol {
            return v;
        }
        below += here;
        i = j;
    }
    items.last().map(|t| t.0).unwrap_or(0.0)
}

/// Smallest and largest medians.
pub fn median_interval(items: &[(f64, f64)]) -> (f64, f64) {
    let mut lo = items.to_vec();
    let mut hi: alloc::vec::Vec<(f64, f64)> = items.iter().map(|&(v, w)| (-v, w)).collect();
    (weighted_median(&mut lo), -weighted_median(&mut hi))
}
