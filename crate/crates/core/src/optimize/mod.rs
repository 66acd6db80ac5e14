//! Optimal Hajłasz gradients as finite convex programs.

mod barrier;
mod brute;
mod dual;
mod program;

use alloc::vec;
use alloc::vec::Vec;

pub use barrier::MAX_BLOCK;
pub use brute::{brute_force_norm, BruteForceResult, ValueGrid, BRUTE_FORCE_LIMIT};
pub use program::{build_program, build_sobolev_program, Constraint, HajlaszProgram, Layout};

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::gradients::{check_membership, GradientClassSpec, GradientSequence};
use crate::norms::{NormFamily, NormMode, NormParams};
use crate::space::MetricMeasureSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Dual ascent when the exponents allow it, barrier otherwise.
    Auto,
    DualAscent,
    Barrier,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Target relative gap between the upper and lower bounds.
    pub tol: f64,
    /// Passes for dual ascent or Newton steps for the barrier; `None` picks a default.
    pub max_iters: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { method: Method::Auto, tol: 1e-6, max_iters: None }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig { tol, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Sequence(GradientSequence),
    Single(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    /// Norm of a feasible gradient.
    pub upper_bound: f64,
    /// Certified lower bound; zero when the solver has none.
    pub lower_bound: f64,
    pub certificate: Certificate,
    /// Slot-major program variables of the feasible gradient.
    pub variables: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
    /// Exponents below one were replaced by one; the value is not certified.
    pub heuristic: bool,
}

impl OptimizationResult {
    pub fn value(&self) -> f64 {
        self.upper_bound
    }

    pub fn relative_gap(&self) -> f64 {
        if self.upper_bound > 0.0 {
            (self.upper_bound - self.lower_bound) / self.upper_bound
        } else {
            0.0
        }
    }
}

fn certificate(prog: &HajlaszProgram, g: &[f64]) -> Certificate {
    match prog.to_sequence(g) {
        Some(seq) => Certificate::Sequence(seq),
        None => Certificate::Single(if g.is_empty() { vec![0.0; prog.n] } else { g.to_vec() }),
    }
}

pub fn solve(prog: &HajlaszProgram, config: &SolverConfig) -> Result<OptimizationResult> {
    if !(config.tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    let cmax = prog.c_max();
    let nv = prog.n_variables();
    if cmax == 0.0 {
        let g = vec![0.0; nv];
        return Ok(OptimizationResult {
            upper_bound: 0.0,
            lower_bound: 0.0,
            certificate: certificate(prog, &g),
            variables: g,
            iterations: 0,
            converged: true,
            method: config.method,
            heuristic: false,
        });
    }
    let (p, q) = prog.exponents();
    let heuristic = p < 1.0 || q < 1.0;
    let surrogate = if heuristic { prog.with_exponents(p.max(1.0), q.max(1.0)) } else { prog.clone() };
    let normalised = surrogate.rescaled(1.0 / cmax);
    let method = match config.method {
        Method::Auto if dual::supports(&normalised) => Method::DualAscent,
        Method::Auto => Method::Barrier,
        Method::DualAscent if !dual::supports(&normalised) => {
            return Err(Error::config("dual ascent needs 1 < p < inf and 1 < q, with q finite for the LqLp order"))
        }
        m => m,
    };
    let (g, upper, lower, iterations, converged) = match method {
        Method::DualAscent => {
            let max = config.max_iters.unwrap_or((50 * nv).max(2000));
            let out = dual::solve_dual(&normalised, config.tol, max).expect("supported model");
            (out.g, out.upper, out.lower, out.passes, out.converged)
        }
        _ => {
            let max = config.max_iters.unwrap_or(500);
            let out = barrier::solve_barrier(&normalised, config.tol, max)?;
            (out.g, out.upper, out.lower, out.newton_steps, out.converged)
        }
    };
    let g: Vec<f64> = g.iter().map(|v| v * cmax).collect();
    let (upper, lower) = if heuristic {
        let rho = prog.feasibility_ratio(&g);
        (rho.max(0.0) * prog.objective(&g), 0.0)
    } else {
        (upper * cmax, lower * cmax)
    };
    let g = if heuristic {
        let rho = prog.feasibility_ratio(&g);
        g.iter().map(|v| v * rho).collect()
    } else {
        g
    };
    Ok(OptimizationResult {
        upper_bound: upper,
        lower_bound: lower,
        certificate: certificate(prog, &g),
        variables: g,
        iterations,
        converged,
        method,
        heuristic,
    })
}

/// Optimal M or N norm of `field` for the given parameters.
pub fn optimal_norm(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    params: &NormParams,
    config: &SolverConfig,
) -> Result<OptimizationResult> {
    params.validate()?;
    let mode = match params.family {
        NormFamily::M => NormMode::LpLq,
        NormFamily::N => NormMode::LqLp,
        NormFamily::Sobolev => return sobolev_norm(space, field, params.s, params.p, config),
        other => return Err(Error::config(alloc::format!("{other:?} is not an optimisation family"))),
    };
    let prog = build_program(space, field, params.s, params.p, params.q, mode)?;
    solve(&prog, config)
}

/// Optimal fractional Sobolev norm `inf ||g||_p` with a single gradient.
pub fn sobolev_norm(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    p: f64,
    config: &SolverConfig,
) -> Result<OptimizationResult> {
    let prog = build_sobolev_program(space, field, s, p)?;
    solve(&prog, config)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepairOutcome {
    pub gradient: GradientSequence,
    pub rho_min: f64,
    /// The input had a zero gradient on some violated pair and was replaced.
    pub fallback: bool,
}

/// Scale a candidate gradient until it dominates every pair.
///
/// If some violated pair has zero gradient at both ends no scaling works, and
/// the constant gradient `c_max(k) / 2` on each scale is returned instead.
pub fn feasibility_repair(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    s: f64,
    grad: &GradientSequence,
) -> Result<RepairOutcome> {
    let spec = GradientClassSpec::base(s);
    let report = check_membership(space, field, grad, &spec)?;
    let rho = report.rho_min;
    if rho <= 1.0 {
        return Ok(RepairOutcome { gradient: grad.clone(), rho_min: rho, fallback: false });
    }
    if rho.is_finite() {
        return Ok(RepairOutcome { gradient: grad.scaled(rho), rho_min: rho, fallback: false });
    }
    let window = space.window().ok_or(Error::Metric(crate::error::MetricViolation::Empty))?;
    let w = window.union(&grad.window());
    let mut out = GradientSequence::zeros(w, space.len());
    let u = field.values();
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            let d = space.dist(x, y);
            let k = crate::space::scale_of_distance(d);
            let c = num_traits::Float::abs(u[x] - u[y]) / num_traits::Float::powf(d, s);
            if let Some(level) = out.level_mut(k) {
                let half = 0.5 * c;
                if level[0] < half {
                    level.iter_mut().for_each(|v| *v = half);
                }
            }
        }
    }
    Ok(RepairOutcome { gradient: out, rho_min: rho, fallback: true })
}

#[cfg(test)]
mod tests;
