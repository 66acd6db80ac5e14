//! Dual coordinate ascent for `min F(g)^r / r` subject to pair constraints.
//!
//! The dual variable of each constraint is raised or lowered to the exact
//! coordinate maximiser. The primal iterate is the gradient of the conjugate
//! at `v = A^T lambda`, and `c . lambda / F°(v)` is a lower bound at every step.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::program::HajlaszProgram;
use crate::math::{conjugate, powp};
use crate::norms::NormMode;

#[derive(Clone, Copy, Debug)]
enum Model {
    /// `g_i = a_x v_i^r`.
    Separable { r: f64 },
    /// `g_k(x) = a_x (sum_k v_k(x))^r`.
    RowSum { r: f64 },
    /// `g_k(x) = a_x S_x^e v^(q'-1)` with `S_x = sum_k v_k(x)^q'`.
    RowNorm { qc: f64, e: f64 },
    /// `g_k(x) = T_k^e a_x v^(p'-1)` with `T_k = sum_x a_x v_k(x)^p'`.
    SlotNorm { pc: f64, e: f64 },
}

pub(crate) fn supports(prog: &HajlaszProgram) -> bool {
    model_for(prog).is_some()
}

fn model_for(prog: &HajlaszProgram) -> Option<Model> {
    let (p, q) = (prog.p, prog.q);
    if !(p > 1.0 && p.is_finite()) || !(q > 1.0) {
        return None;
    }
    let pc = conjugate(p);
    let r = pc - 1.0;
    if p == q || prog.slots() <= 1 {
        return Some(Model::Separable { r });
    }
    match prog.mode {
        NormMode::LpLq if q.is_infinite() => Some(Model::RowSum { r }),
        NormMode::LpLq => {
            let qc = conjugate(q);
            Some(Model::RowNorm { qc, e: (pc - qc) / qc })
        }
        NormMode::LqLp if q.is_finite() => {
            let qc = conjugate(q);
            Some(Model::SlotNorm { pc, e: (qc - pc) / pc })
        }
        NormMode::LqLp => None,
    }
}

pub(crate) struct DualOutcome {
    pub g: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    pub passes: usize,
    pub converged: bool,
}

struct State<'a> {
    prog: &'a HajlaszProgram,
    model: Model,
    a: Vec<f64>,
    v: Vec<f64>,
    lambda: Vec<f64>,
    cache: Vec<f64>,
}

/// Root of an increasing function on `[lo, hi]` with `f(lo) < 0 <= f(hi)` (Illinois).
fn illinois(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..100 {
        let t = if fhi - flo > 0.0 { (lo * fhi - hi * flo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        let t = if t > lo && t < hi { t } else { 0.5 * (lo + hi) };
        let ft = f(t);
        if ft.abs() <= 1e-14 || (hi - lo) <= 1e-15 * (1.0 + hi.abs()) {
            return t;
        }
        if ft < 0.0 {
            lo = t;
            flo = ft;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = ft;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

impl<'a> State<'a> {
    fn new(prog: &'a HajlaszProgram, model: Model) -> Self {
        let pc = conjugate(prog.p);
        let a = prog.mu.iter().map(|&m| m.powf(1.0 - pc)).collect();
        let cache_len = match model {
            Model::Separable { .. } => 0,
            Model::RowSum { .. } | Model::RowNorm { .. } => prog.n,
            Model::SlotNorm { .. } => prog.slots(),
        };
        State {
            prog,
            model,
            a,
            v: vec![0.0; prog.n_variables()],
            lambda: vec![0.0; prog.constraints.len()],
            cache: vec![0.0; cache_len],
        }
    }

    fn rebuild(&mut self) {
        let n = self.prog.n;
        self.v.iter_mut().for_each(|v| *v = 0.0);
        for (c, &l) in self.prog.constraints.iter().zip(&self.lambda) {
            let b = c.slot as usize * n;
            self.v[b + c.x as usize] += l;
            self.v[b + c.y as usize] += l;
        }
        self.cache.iter_mut().for_each(|c| *c = 0.0);
        match self.model {
            Model::Separable { .. } => {}
            Model::RowSum { .. } => {
                for (i, &v) in self.v.iter().enumerate() {
                    self.cache[i % n] += v;
                }
            }
            Model::RowNorm { qc, .. } => {
                for (i, &v) in self.v.iter().enumerate() {
                    self.cache[i % n] += powp(v, qc);
                }
            }
            Model::SlotNorm { pc, .. } => {
                for (i, &v) in self.v.iter().enumerate() {
                    self.cache[i / n] += self.a[i % n] * powp(v, pc);
                }
            }
        }
    }

    fn gradient_of_conjugate(&self) -> Vec<f64> {
        let n = self.prog.n;
        self.v
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = i % n;
                let a = self.a[x];
                match self.model {
                    Model::Separable { r } => a * powp(v, r),
                    Model::RowSum { r } => a * powp(self.cache[x], r),
                    Model::RowNorm { qc, e } => {
                        if v <= 0.0 {
                            0.0
                        } else {
                            a * self.cache[x].powf(e) * powp(v, qc - 1.0)
                        }
                    }
                    Model::SlotNorm { pc, e } => {
                        if v <= 0.0 {
                            0.0
                        } else {
                            self.cache[i / n].powf(e) * a * powp(v, pc - 1.0)
                        }
                    }
                }
            })
            .collect()
    }

    /// Exact coordinate maximisation for constraint `e`; returns `|delta lambda|`.
    fn update(&mut self, e: usize) -> f64 {
        let con = self.prog.constraints[e];
        let n = self.prog.n;
        let (x, y) = (con.x as usize, con.y as usize);
        let (i, j) = (con.slot as usize * n + x, con.slot as usize * n + y);
        let (ax, ay) = (self.a[x], self.a[y]);
        let (vi, vj) = (self.v[i], self.v[j]);
        let lam = self.lambda[e];
        let c = con.c;
        let cache = &self.cache;
        let phi = |t: f64| -> f64 {
            let (wi, wj) = ((vi + t).max(0.0), (vj + t).max(0.0));
            match self.model {
                Model::Separable { r } => ax * powp(wi, r) + ay * powp(wj, r) - c,
                Model::RowSum { r } => {
                    ax * powp((cache[x] + t).max(0.0), r) + ay * powp((cache[y] + t).max(0.0), r) - c
                }
                Model::RowNorm { qc, e } => {
                    let sx = (cache[x] - powp(vi, qc) + powp(wi, qc)).max(0.0);
                    let sy = (cache[y] - powp(vj, qc) + powp(wj, qc)).max(0.0);
                    let gx = if wi > 0.0 { ax * sx.powf(e) * powp(wi, qc - 1.0) } else { 0.0 };
                    let gy = if wj > 0.0 { ay * sy.powf(e) * powp(wj, qc - 1.0) } else { 0.0 };
                    gx + gy - c
                }
                Model::SlotNorm { pc, e } => {
                    let k = con.slot as usize;
                    let tk = (cache[k] - ax * powp(vi, pc) - ay * powp(vj, pc) + ax * powp(wi, pc) + ay * powp(wj, pc))
                        .max(0.0);
                    if tk <= 0.0 {
                        return -c;
                    }
                    let f = tk.powf(e);
                    f * (ax * powp(wi, pc - 1.0) + ay * powp(wj, pc - 1.0)) - c
                }
            }
        };
        let linear = match self.model {
            Model::Separable { r } | Model::RowSum { r } => r == 1.0,
            _ => false,
        };
        let t = if linear {
            let (wx, wy) = match self.model {
                Model::RowSum { .. } => (cache[x], cache[y]),
                _ => (vi, vj),
            };
            ((c - ax * wx - ay * wy) / (ax + ay)).max(-lam)
        } else {
            let f0 = phi(0.0);
            if f0.abs() <= 1e-14 * c.max(1e-300) {
                0.0
            } else if f0 < 0.0 {
                let mut h = 1e-3 * (1.0 + vi.max(vj));
                let mut fh = phi(h);
                let mut lo = 0.0;
                let mut flo = f0;
                let mut guard = 0;
                while fh < 0.0 && guard < 200 {
                    lo = h;
                    flo = fh;
                    h *= 4.0;
                    fh = phi(h);
                    guard += 1;
                }
                illinois(phi, lo, h, flo, fh)
            } else if lam > 0.0 {
                let fl = phi(-lam);
                if fl >= 0.0 {
                    -lam
                } else {
                    illinois(phi, -lam, 0.0, fl, f0)
                }
            } else {
                0.0
            }
        };
        if t == 0.0 {
            return 0.0;
        }
        let t = t.max(-lam);
        let (ni, nj) = ((vi + t).max(0.0), (vj + t).max(0.0));
        match self.model {
            Model::Separable { .. } => {}
            Model::RowSum { .. } => {
                self.cache[x] = (self.cache[x] + t).max(0.0);
                self.cache[y] = (self.cache[y] + t).max(0.0);
            }
            Model::RowNorm { qc, .. } => {
                self.cache[x] = (self.cache[x] - powp(vi, qc) + powp(ni, qc)).max(0.0);
                self.cache[y] = (self.cache[y] - powp(vj, qc) + powp(nj, qc)).max(0.0);
            }
            Model::SlotNorm { pc, .. } => {
                let k = con.slot as usize;
                self.cache[k] =
                    (self.cache[k] - ax * powp(vi, pc) - ay * powp(vj, pc) + ax * powp(ni, pc) + ay * powp(nj, pc)).max(0.0);
            }
        }
        self.v[i] = ni;
        self.v[j] = nj;
        self.lambda[e] = lam + t;
        t.abs()
    }

    fn lower_bound(&self) -> f64 {
        let cl: f64 = self.prog.constraints.iter().zip(&self.lambda).map(|(c, l)| c.c * l).sum();
        let dn = self.prog.dual_norm(&self.v);
        if dn > 0.0 {
            cl / dn
        } else {
            0.0
        }
    }
}

/// Requirements are expected normalised so that `max c = 1`.
pub(crate) fn solve_dual(prog: &HajlaszProgram, tol: f64, max_passes: usize) -> Option<DualOutcome> {
    let model = model_for(prog)?;
    let m = prog.constraints.len();
    let mut st = State::new(prog, model);
    let mut best_g = vec![0.0; prog.n_variables()];
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    let mut passes = 0usize;
    let mut active: Vec<usize> = Vec::new();
    loop {
        // full pass
        let mut moved = 0.0;
        for e in 0..m {
            moved += st.update(e);
        }
        passes += 1;
        st.rebuild();
        let g = st.gradient_of_conjugate();
        let rho = prog.feasibility_ratio(&g);
        if rho.is_finite() {
            let u = rho * prog.objective(&g);
            if u < upper {
                upper = u;
                best_g = g.iter().map(|v| v * rho).collect();
            }
        }
        lower = lower.max(st.lower_bound());
        if upper - lower <= tol * upper || upper == 0.0 {
            return Some(DualOutcome { g: best_g, upper, lower, passes, converged: true });
        }
        if passes >= max_passes || moved == 0.0 {
            return Some(DualOutcome { g: best_g, upper, lower, passes, converged: false });
        }
        // active passes
        active.clear();
        active.extend((0..m).filter(|&e| st.lambda[e] > 0.0));
        let mut first = 0.0;
        for round in 0..64 {
            let mut mv = 0.0;
            for &e in &active {
                mv += st.update(e);
            }
            passes += 1;
            if round == 0 {
                first = mv;
            }
            if mv <= 1e-3 * first || passes >= max_passes {
                break;
            }
        }
    }
}
