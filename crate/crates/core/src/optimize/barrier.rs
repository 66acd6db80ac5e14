//! Log-barrier interior point method with dense Newton steps per connected block.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::program::HajlaszProgram;
use crate::error::{Error, Result};
use crate::math::{powp, root};
use crate::norms::NormMode;

/// Largest dense block accepted by the Newton solver.
pub const MAX_BLOCK: usize = 6000;

#[derive(Clone, Debug)]
enum Barrier {
    /// `a . z - c > 0`
    Linear { idx: Vec<u32>, coef: Vec<f64>, c: f64 },
    /// `z_t - (sum w z^r)^(1/r) > 0`
    Cap { t: u32, group: Vec<u32>, w: Vec<f64>, r: f64 },
}

#[derive(Clone, Debug)]
enum Objective {
    /// `coef * (sum w z^r)^(e/r)`
    Pow { group: Vec<u32>, w: Vec<f64>, r: f64, e: f64, coef: f64 },
    /// `z_i`
    Var(u32),
}

struct Formulation {
    nvars: usize,
    /// Index of each program variable, or `u32::MAX` when inactive.
    map: Vec<u32>,
    barriers: Vec<Barrier>,
    objective: Vec<Objective>,
    /// Objective equals `F^power` at the optimum.
    power: f64,
    start: Vec<f64>,
}

fn formulate(prog: &HajlaszProgram) -> Formulation {
    let n = prog.n;
    let slots = prog.slots();
    let active = prog.active_mask();
    let mut map = vec![u32::MAX; active.len()];
    let mut nvars = 0u32;
    for (i, &a) in active.iter().enumerate() {
        if a {
            map[i] = nvars;
            nvars += 1;
        }
    }
    let mut start = vec![1.0; nvars as usize];
    let mut barriers = Vec::new();
    for c in &prog.constraints {
        let b = c.slot as usize * n;
        barriers.push(Barrier::Linear {
            idx: vec![map[b + c.x as usize], map[b + c.y as usize]],
            coef: vec![1.0, 1.0],
            c: c.c,
        });
    }
    let (p, q) = (prog.p, prog.q);
    // groups of active variables along the inner norm
    let (groups, weights, inner, outer): (Vec<Vec<u32>>, Vec<Vec<f64>>, f64, f64) = match prog.mode {
        NormMode::LpLq => {
            let mut gs = Vec::new();
            let mut ws = Vec::new();
            for x in 0..n {
                let g: Vec<u32> = (0..slots).map(|k| map[k * n + x]).filter(|&i| i != u32::MAX).collect();
                let len = g.len();
                gs.push(g);
                ws.push(vec![1.0; len]);
            }
            (gs, ws, q, p)
        }
        NormMode::LqLp => {
            let mut gs = Vec::new();
            let mut ws = Vec::new();
            for k in 0..slots {
                let mut g = Vec::new();
                let mut w = Vec::new();
                for x in 0..n {
                    if map[k * n + x] != u32::MAX {
                        g.push(map[k * n + x]);
                        w.push(prog.mu[x]);
                    }
                }
                gs.push(g);
                ws.push(w);
            }
            (gs, ws, p, q)
        }
    };
    // outer weights: mu_x for LpLq rows, 1 for LqLp slots
    let outer_w: Vec<f64> = match prog.mode {
        NormMode::LpLq => prog.mu.clone(),
        NormMode::LqLp => vec![1.0; slots],
    };
    let mut objective = Vec::new();
    let new_var = |start: &mut Vec<f64>, v: f64| {
        start.push(v);
        (start.len() - 1) as u32
    };
    let power;
    match (inner.is_finite(), outer.is_finite()) {
        (true, true) => {
            for (gi, (g, w)) in groups.into_iter().zip(weights).enumerate() {
                if !g.is_empty() {
                    objective.push(Objective::Pow { group: g, w, r: inner, e: outer, coef: outer_w[gi] });
                }
            }
            power = outer;
        }
        (false, true) => {
            // epigraph per group of the inner sup
            for (gi, g) in groups.into_iter().enumerate() {
                if g.is_empty() {
                    continue;
                }
                let t = new_var(&mut start, 2.0);
                for &i in &g {
                    barriers.push(Barrier::Linear { idx: vec![t, i], coef: vec![1.0, -1.0], c: 0.0 });
                }
                objective.push(Objective::Pow { group: vec![t], w: vec![1.0], r: 1.0, e: outer, coef: outer_w[gi] });
            }
            power = outer;
        }
        (true, false) => {
            let t = new_var(&mut start, 0.0);
            let mut cap: f64 = 0.0;
            for (g, w) in groups.into_iter().zip(weights) {
                if g.is_empty() {
                    continue;
                }
                let val = root(w.iter().sum::<f64>(), inner);
                cap = cap.max(val);
                barriers.push(Barrier::Cap { t, group: g, w, r: inner });
            }
            start[t as usize] = 2.0 * cap + 1.0;
            objective.push(Objective::Var(t));
            power = 1.0;
        }
        (false, false) => {
            let t = new_var(&mut start, 2.0);
            for g in groups {
                for &i in &g {
                    barriers.push(Barrier::Linear { idx: vec![t, i], coef: vec![1.0, -1.0], c: 0.0 });
                }
            }
            objective.push(Objective::Var(t));
            power = 1.0;
        }
    }
    Formulation { nvars: start.len(), map, barriers, objective, power, start }
}

fn objective_value(f: &Formulation, z: &[f64]) -> f64 {
    f.objective
        .iter()
        .map(|o| match o {
            Objective::Var(i) => z[*i as usize],
            Objective::Pow { group, w, r, e, coef } => {
                let s: f64 = group.iter().zip(w).map(|(&i, &w)| w * powp(z[i as usize], *r)).sum();
                coef * s.powf(e / r)
            }
        })
        .sum()
}

fn cap_norm(group: &[u32], w: &[f64], r: f64, z: &[f64]) -> f64 {
    root(group.iter().zip(w).map(|(&i, &w)| w * powp(z[i as usize], r)).sum::<f64>(), r)
}

/// Barrier value, or `None` outside the domain.
fn barrier_value(f: &Formulation, z: &[f64], t: f64) -> Option<f64> {
    let mut v = t * objective_value(f, z);
    for &zi in z {
        if zi <= 0.0 {
            return None;
        }
        v -= zi.ln();
    }
    for b in &f.barriers {
        let s = match b {
            Barrier::Linear { idx, coef, c } => idx.iter().zip(coef).map(|(&i, &a)| a * z[i as usize]).sum::<f64>() - c,
            Barrier::Cap { t, group, w, r } => z[*t as usize] - cap_norm(group, w, *r, z),
        };
        if !(s > 0.0) {
            return None;
        }
        v -= s.ln();
    }
    Some(v)
}

struct Blocks {
    /// block id and local index of each variable
    of: Vec<(u32, u32)>,
    sizes: Vec<usize>,
}

fn find(parent: &mut [u32], mut a: u32) -> u32 {
    while parent[a as usize] != a {
        parent[a as usize] = parent[parent[a as usize] as usize];
        a = parent[a as usize];
    }
    a
}

fn blocks(f: &Formulation) -> Blocks {
    let mut parent: Vec<u32> = (0..f.nvars as u32).collect();
    let unite = |parent: &mut Vec<u32>, a: u32, b: u32| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra as usize] = rb;
        }
    };
    for b in &f.barriers {
        match b {
            Barrier::Linear { idx, .. } => {
                for w in idx.windows(2) {
                    unite(&mut parent, w[0], w[1]);
                }
            }
            Barrier::Cap { t, group, .. } => {
                for &i in group {
                    unite(&mut parent, *t, i);
                }
            }
        }
    }
    for o in &f.objective {
        if let Objective::Pow { group, .. } = o {
            for w in group.windows(2) {
                unite(&mut parent, w[0], w[1]);
            }
        }
    }
    let mut id = vec![u32::MAX; f.nvars];
    let mut sizes = Vec::new();
    let mut of = vec![(0, 0); f.nvars];
    for i in 0..f.nvars {
        let r = find(&mut parent, i as u32) as usize;
        if id[r] == u32::MAX {
            id[r] = sizes.len() as u32;
            sizes.push(0);
        }
        let b = id[r];
        of[i] = (b, sizes[b as usize] as u32);
        sizes[b as usize] += 1;
    }
    Blocks { of, sizes }
}

/// Dense symmetric positive definite solve in place; returns false if not positive definite.
fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            let (ri, rj) = (i * n, j * n);
            for k in 0..j {
                s -= a[ri + k] * a[rj + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

struct System {
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

fn assemble(f: &Formulation, bl: &Blocks, z: &[f64], t: f64) -> System {
    let mut grad = vec![0.0; f.nvars];
    let mut hess: Vec<Vec<f64>> = bl.sizes.iter().map(|&s| vec![0.0; s * s]).collect();
    let add_h = |hess: &mut Vec<Vec<f64>>, i: u32, j: u32, v: f64| {
        let (b, li) = bl.of[i as usize];
        let (_, lj) = bl.of[j as usize];
        let s = bl.sizes[b as usize];
        hess[b as usize][li as usize * s + lj as usize] += v;
    };
    for (i, &zi) in z.iter().enumerate() {
        grad[i] -= 1.0 / zi;
        add_h(&mut hess, i as u32, i as u32, 1.0 / (zi * zi));
    }
    for o in &f.objective {
        match o {
            Objective::Var(i) => grad[*i as usize] += t,
            Objective::Pow { group, w, r, e, coef } => {
                let (r, e) = (*r, *e);
                let s: f64 = group.iter().zip(w).map(|(&i, &w)| w * powp(z[i as usize], r)).sum();
                let d: Vec<f64> = group.iter().zip(w).map(|(&i, &w)| w * powp(z[i as usize], r - 1.0)).collect();
                let c1 = t * coef * e * s.powf(e / r - 1.0);
                let c2 = t * coef * e * (e - r) * s.powf(e / r - 2.0);
                for (a, &i) in group.iter().enumerate() {
                    grad[i as usize] += c1 * d[a];
                    if r != 1.0 {
                        let wi = w[a];
                        add_h(&mut hess, i, i, c1 * wi * (r - 1.0) * powp(z[i as usize], r - 2.0));
                    }
                    if e != r {
                        for (b2, &j) in group.iter().enumerate() {
                            add_h(&mut hess, i, j, c2 * d[a] * d[b2]);
                        }
                    }
                }
            }
        }
    }
    for b in &f.barriers {
        match b {
            Barrier::Linear { idx, coef, c } => {
                let s = idx.iter().zip(coef).map(|(&i, &a)| a * z[i as usize]).sum::<f64>() - c;
                let inv = 1.0 / s;
                for (a, &i) in idx.iter().enumerate() {
                    grad[i as usize] -= coef[a] * inv;
                    for (b2, &j) in idx.iter().enumerate() {
                        add_h(&mut hess, i, j, coef[a] * coef[b2] * inv * inv);
                    }
                }
            }
            Barrier::Cap { t: ti, group, w, r } => {
                let r = *r;
                let nrm = cap_norm(group, w, r, z);
                let s = z[*ti as usize] - nrm;
                let inv = 1.0 / s;
                // gradient of the norm
                let dn: Vec<f64> = if nrm > 0.0 {
                    group
                        .iter()
                        .zip(w)
                        .map(|(&i, &wi)| wi * powp(z[i as usize] / nrm, r - 1.0))
                        .collect()
                } else {
                    vec![0.0; group.len()]
                };
                grad[*ti as usize] -= inv;
                for (a, &i) in group.iter().enumerate() {
                    grad[i as usize] += dn[a] * inv;
                }
                // outer product of the slack gradient
                add_h(&mut hess, *ti, *ti, inv * inv);
                for (a, &i) in group.iter().enumerate() {
                    add_h(&mut hess, *ti, i, -dn[a] * inv * inv);
                    add_h(&mut hess, i, *ti, -dn[a] * inv * inv);
                    for (b2, &j) in group.iter().enumerate() {
                        add_h(&mut hess, i, j, dn[a] * dn[b2] * inv * inv);
                    }
                }
                // curvature of the norm
                if r != 1.0 && nrm > 0.0 {
                    for (a, &i) in group.iter().enumerate() {
                        let zi = z[i as usize];
                        add_h(&mut hess, i, i, inv * (r - 1.0) * w[a] * powp(zi, r - 2.0) / powp(nrm, r - 1.0));
                        for (b2, &j) in group.iter().enumerate() {
                            add_h(&mut hess, i, j, -inv * (r - 1.0) * dn[a] * dn[b2] / nrm);
                        }
                    }
                }
            }
        }
    }
    System { grad, hess }
}

pub(crate) struct BarrierOutcome {
    pub g: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    pub newton_steps: usize,
    pub converged: bool,
}

/// Requirements are expected normalised so that `max c = 1`; exponents at least one.
pub(crate) fn solve_barrier(prog: &HajlaszProgram, tol: f64, max_steps: usize) -> Result<BarrierOutcome> {
    let f = formulate(prog);
    let bl = blocks(&f);
    if let Some(&big) = bl.sizes.iter().max() {
        if big > MAX_BLOCK {
            return Err(Error::Resource { what: "barrier block size", requested: big, limit: MAX_BLOCK });
        }
    }
    let m = (f.nvars + f.barriers.len()) as f64;
    let mut z = f.start.clone();
    let mut t = m / objective_value(&f, &z).max(1e-12);
    let obj_tol = (0.5 * tol * f.power).max(1e-15);
    let mut steps = 0usize;
    let mut converged = false;
    let mut locals: Vec<Vec<u32>> = vec![Vec::new(); bl.sizes.len()];
    for (i, &(b, _)) in bl.of.iter().enumerate() {
        locals[b as usize].push(i as u32);
    }
    'outer: loop {
        // centring
        for _ in 0..200 {
            if steps >= max_steps {
                break 'outer;
            }
            steps += 1;
            let mut sys = assemble(&f, &bl, &z, t);
            let mut dz = vec![0.0; f.nvars];
            for (b, vars) in locals.iter().enumerate() {
                let s = vars.len();
                let rhs: Vec<f64> = vars.iter().map(|&i| -sys.grad[i as usize]).collect();
                let h = &mut sys.hess[b];
                let diag: f64 = (0..s).map(|i| h[i * s + i].abs()).fold(0.0, f64::max);
                let mut reg = 0.0;
                let mut sol = rhs.clone();
                loop {
                    let mut hc = h.clone();
                    for i in 0..s {
                        hc[i * s + i] += reg;
                    }
                    sol.copy_from_slice(&rhs);
                    if cholesky_solve(&mut hc, s, &mut sol) || reg > diag {
                        break;
                    }
                    reg = if reg == 0.0 { 1e-12 * diag.max(1e-300) } else { reg * 100.0 };
                }
                let rhs = sol;
                for (a, &i) in vars.iter().enumerate() {
                    dz[i as usize] = rhs[a];
                }
            }
            let dec: f64 = -sys.grad.iter().zip(&dz).map(|(g, d)| g * d).sum::<f64>();
            if !(dec > 1e-12) {
                break;
            }
            let f0 = barrier_value(&f, &z, t).unwrap_or(f64::INFINITY);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + alpha * b).collect();
                if let Some(v) = barrier_value(&f, &trial, t) {
                    if v <= f0 - 0.25 * alpha * dec {
                        z = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted || dec < 1e-10 {
                break;
            }
        }
        let obj = objective_value(&f, &z);
        if m / t <= obj_tol * obj {
            converged = true;
            break;
        }
        t *= 10.0;
    }
    let obj = objective_value(&f, &z);
    let mut g = vec![0.0; prog.n_variables()];
    for (i, &k) in f.map.iter().enumerate() {
        if k != u32::MAX {
            g[i] = z[k as usize];
        }
    }
    let rho = prog.feasibility_ratio(&g);
    let (upper, g) = if rho.is_finite() {
        (rho * prog.objective(&g), g.iter().map(|v| v * rho).collect())
    } else {
        (f64::INFINITY, g)
    };
    let lower = root((obj - m / t).max(0.0), f.power).min(upper);
    Ok(BarrierOutcome { g, upper, lower, newton_steps: steps, converged })
}
