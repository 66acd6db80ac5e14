use alloc::vec;
use alloc::vec::Vec;

use super::program::HajlaszProgram;
use crate::error::{Error, Result};

/// Most variables accepted by the exhaustive search.
pub const BRUTE_FORCE_LIMIT: usize = 6;
const MAX_LATTICE: u64 = 20_000_000;

/// Lattice for the exhaustive search; `step` is relative to the largest requirement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueGrid {
    pub step: f64,
    /// Zoomed passes around the best lattice point, each ten times finer.
    pub refinements: u32,
}

impl Default for ValueGrid {
    fn default() -> Self {
        ValueGrid { step: 1e-3, refinements: 3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub value: f64,
    pub variables: Vec<f64>,
    pub evaluations: u64,
}

struct Reduced {
    free: Vec<usize>,
    /// dependent variable and its (partner, requirement) list
    dependent: Vec<(usize, Vec<(usize, f64)>)>,
    /// constraints with both ends in the cover, checked per lattice point
    covered: Vec<(usize, usize, f64)>,
}

fn reduce(prog: &HajlaszProgram) -> Result<Reduced> {
    let n = prog.n;
    let active = prog.active_mask();
    let count = active.iter().filter(|&&a| a).count();
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::Resource { what: "brute force variables", requested: count, limit: BRUTE_FORCE_LIMIT });
    }
    let mut free = Vec::new();
    let mut dependent = Vec::new();
    let mut covered = Vec::new();
    for slot in 0..prog.slots() {
        let verts: Vec<usize> = (0..n).filter(|&x| active[slot * n + x]).collect();
        let edges: Vec<(usize, usize, f64)> = prog
            .constraints
            .iter()
            .filter(|c| c.slot as usize == slot)
            .map(|c| (c.x as usize, c.y as usize, c.c))
            .collect();
        // smallest vertex cover by subset enumeration
        let mut best: Option<u32> = None;
        for mask in 0u32..(1 << verts.len()) {
            let inside = |x: usize| verts.iter().position(|&v| v == x).map_or(false, |i| mask & (1 << i) != 0);
            if edges.iter().all(|&(x, y, _)| inside(x) || inside(y))
                && best.map_or(true, |b| mask.count_ones() < b.count_ones())
            {
                best = Some(mask);
            }
        }
        let mask = best.unwrap_or(0);
        let in_cover = |x: usize| verts.iter().position(|&v| v == x).map_or(false, |i| mask & (1 << i) != 0);
        for &(x, y, c) in &edges {
            if in_cover(x) && in_cover(y) {
                covered.push((slot * n + x, slot * n + y, c));
            }
        }
        for (i, &x) in verts.iter().enumerate() {
            let var = slot * n + x;
            if mask & (1 << i) != 0 {
                free.push(var);
            } else {
                let reqs = edges
                    .iter()
                    .filter_map(|&(a, b, c)| {
                        if a == x {
                            Some((slot * n + b, c))
                        } else if b == x {
                            Some((slot * n + a, c))
                        } else {
                            None
                        }
                    })
                    .collect();
                dependent.push((var, reqs));
            }
        }
    }
    Ok(Reduced { free, dependent, covered })
}

/// Exhaustive lattice minimisation over a minimum vertex cover of each scale.
///
/// Variables off the cover are set to the least value meeting their
/// constraints, which is optimal since the objective is monotone. Lattice
/// points violating a constraint inside the cover are discarded.
pub fn brute_force_norm(prog: &HajlaszProgram, grid: &ValueGrid) -> Result<BruteForceResult> {
    if !(grid.step > 0.0 && grid.step <= 1.0) {
        return Err(Error::config("lattice step must lie in (0, 1]"));
    }
    let red = reduce(prog)?;
    let cmax = prog.c_max();
    let mut g = vec![0.0; prog.n_variables()];
    let mut evaluations = 0u64;
    let mut eval = |vals: &[f64], g: &mut Vec<f64>| -> f64 {
        for (&v, &x) in vals.iter().zip(&red.free) {
            g[x] = v;
        }
        evaluations += 1;
        if red.covered.iter().any(|&(x, y, c)| g[x] + g[y] < c) {
            return f64::INFINITY;
        }
        for (x, reqs) in &red.dependent {
            g[*x] = reqs.iter().fold(0.0f64, |m, &(y, c)| m.max(c - g[y]));
        }
        prog.objective(g)
    };
    let d = red.free.len();
    if cmax == 0.0 || d == 0 {
        let v = eval(&[], &mut g);
        return Ok(BruteForceResult { value: v, variables: g, evaluations });
    }
    let mut step = grid.step * cmax;
    let mut per_axis = libm::ceil(cmax / step) as u64 + 1;
    let mut extra = 0;
    while per_axis.saturating_pow(d as u32) > MAX_LATTICE {
        step *= 10.0;
        per_axis = libm::ceil(cmax / step) as u64 + 1;
        extra += 1;
    }
    let mut lo = vec![0.0; d];
    let mut counts = vec![per_axis; d];
    let mut best_val = f64::INFINITY;
    let mut best = vec![0.0; d];
    let mut vals = vec![0.0; d];
    for pass in 0..=(grid.refinements + extra) {
        let total: u64 = counts.iter().product();
        for idx in 0..total {
            let mut r = idx;
            for a in 0..d {
                vals[a] = (lo[a] + (r % counts[a]) as f64 * step).min(cmax);
                r /= counts[a];
            }
            let v = eval(&vals, &mut g);
            if v < best_val {
                best_val = v;
                best.copy_from_slice(&vals);
            }
        }
        if pass == grid.refinements + extra {
            break;
        }
        for a in 0..d {
            lo[a] = (best[a] - 2.0 * step).max(0.0);
            counts[a] = 41;
        }
        step /= 10.0;
    }
    let value = eval(&best, &mut g);
    Ok(BruteForceResult { value, variables: g, evaluations })
}

