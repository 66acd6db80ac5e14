//! One entry point for every way of putting a number on a field.

use alloc::format;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::gradients::{difference_gradient_with, grand_maximal_gradient, DifferenceKernel, GradientSequence};
use crate::lp_bands::{
    band_decompose, besov_norm, build_band_filters, covering_range, grand_norm, tl_norm, BandNormalization, Dictionary,
    FilterBank, GrandFamily,
};
use crate::norms::{aggregate, bourdon_pajot_norm_with, NormFamily, NormParams};
use crate::optimize::{optimal_norm, Certificate, SolverConfig};
use crate::space::MetricMeasureSpace;

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    /// Optimal gradient from the convex program (M, N, Sobolev).
    Optimal(SolverConfig),
    /// Averaged difference gradient (M, N, Sobolev) or the Bourdon–Pajot energy (BP).
    Difference { k0: u32 },
    /// Grand maximal gradient with the standard dictionary (M, N, F, B).
    Grand,
    /// Littlewood–Paley band decomposition over the covering range (F, B).
    LittlewoodPaley { sharpness: f64, normalization: BandNormalization },
}

impl Backend {
    pub fn littlewood_paley() -> Self {
        Backend::LittlewoodPaley { sharpness: 1.0, normalization: BandNormalization::Partition }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Optimal(_) => "optimal",
            Backend::Difference { .. } => "difference",
            Backend::Grand => "grand",
            Backend::LittlewoodPaley { .. } => "lp",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormValue {
    pub value: f64,
    /// Certified lower bound, when the backend produces one.
    pub lower_bound: Option<f64>,
    /// Gradient behind the value, when there is one.
    pub gradient: Option<GradientSequence>,
    /// The value was produced by a heuristic path.
    pub heuristic: bool,
}

impl NormValue {
    fn plain(value: f64) -> Self {
        NormValue { value, lower_bound: None, gradient: None, heuristic: false }
    }
}

fn unsupported(family: NormFamily, backend: &Backend) -> Error {
    Error::config(format!("family {family:?} is not available with the {} backend", backend.name()))
}

fn from_gradient(space: &MetricMeasureSpace, grad: GradientSequence, params: &NormParams) -> NormValue {
    let value = match params.family {
        NormFamily::Sobolev => {
            let sup = grad.sup_collapse();
            crate::math::weighted_lp(space.measures().iter().copied().zip(sup), params.p)
        }
        f => aggregate(space, &grad, params.p, params.q, f.mode()),
    };
    NormValue { value, lower_bound: None, gradient: Some(grad), heuristic: false }
}

/// Backend bound to one space and parameter set, with kernels, filter banks and
/// dictionaries built once and reused across fields.
pub struct NormEvaluator<'a> {
    space: &'a MetricMeasureSpace,
    params: NormParams,
    backend: Backend,
    kernel: Option<DifferenceKernel>,
    bank: Option<FilterBank>,
    dictionary: Option<Dictionary>,
}

impl<'a> NormEvaluator<'a> {
    pub fn new(space: &'a MetricMeasureSpace, params: &NormParams, backend: &Backend) -> Result<Self> {
        params.validate()?;
        let fam = params.family;
        let mut ev = NormEvaluator {
            space,
            params: *params,
            backend: backend.clone(),
            kernel: None,
            bank: None,
            dictionary: None,
        };
        match backend {
            Backend::Optimal(_) => {
                if !matches!(fam, NormFamily::M | NormFamily::N | NormFamily::Sobolev) {
                    return Err(unsupported(fam, backend));
                }
            }
            Backend::Difference { k0 } => {
                if !matches!(fam, NormFamily::M | NormFamily::N | NormFamily::Sobolev | NormFamily::BP) {
                    return Err(unsupported(fam, backend));
                }
                if *k0 < 1 {
                    return Err(Error::config("K0 must be at least 1"));
                }
                ev.kernel = Some(DifferenceKernel::new(space, params.s, params.p)?);
            }
            Backend::Grand => {
                if fam == NormFamily::BP {
                    return Err(unsupported(fam, backend));
                }
                let n_dim = space
                    .periodic_grid()
                    .ok_or_else(|| Error::domain("grand maximal functions need a periodic grid"))?
                    .n_dim;
                ev.dictionary = Some(Dictionary::standard(n_dim)?);
            }
            Backend::LittlewoodPaley { sharpness, normalization } => {
                if !matches!(fam, NormFamily::F | NormFamily::B) {
                    return Err(unsupported(fam, backend));
                }
                let grid = space
                    .periodic_grid()
                    .ok_or_else(|| Error::domain("band decomposition needs a periodic grid"))?;
                ev.bank = Some(build_band_filters(space, covering_range(&grid), *sharpness, *normalization)?);
            }
        }
        Ok(ev)
    }

    pub fn params(&self) -> &NormParams {
        &self.params
    }

    pub fn evaluate(&self, field: &ScalarField) -> Result<NormValue> {
        field.check_on(self.space)?;
        let (space, params) = (self.space, &self.params);
        match &self.backend {
            Backend::Optimal(cfg) => {
                let r = optimal_norm(space, field, params, cfg)?;
                let gradient = match r.certificate {
                    Certificate::Sequence(s) => Some(s),
                    Certificate::Single(_) => None,
                };
                Ok(NormValue {
                    value: r.upper_bound,
                    lower_bound: (!r.heuristic).then_some(r.lower_bound),
                    gradient,
                    heuristic: r.heuristic,
                })
            }
            Backend::Difference { k0 } => {
                let kernel = self.kernel.as_ref().expect("built in new");
                if params.family == NormFamily::BP {
                    return bourdon_pajot_norm_with(space, kernel, field).map(NormValue::plain);
                }
                let g = difference_gradient_with(space, kernel, field, *k0)?;
                Ok(from_gradient(space, g, params))
            }
            Backend::Grand => {
                let dict = self.dictionary.as_ref().expect("built in new");
                let (s, p, q) = (params.s, params.p, params.q);
                match params.family {
                    NormFamily::F => grand_norm(space, field, s, p, q, dict, GrandFamily::F).map(NormValue::plain),
                    NormFamily::B => grand_norm(space, field, s, p, q, dict, GrandFamily::B).map(NormValue::plain),
                    _ => {
                        let g = grand_maximal_gradient(space, field, s, dict)?;
                        Ok(from_gradient(space, g, params))
                    }
                }
            }
            Backend::LittlewoodPaley { .. } => {
                let c = band_decompose(field, self.bank.as_ref().expect("built in new"))?;
                let v = match params.family {
                    NormFamily::F => tl_norm(&c, params.s, params.p, params.q),
                    _ => besov_norm(&c, params.s, params.p, params.q),
                };
                Ok(NormValue::plain(v))
            }
        }
    }
}

pub fn evaluate_norm(
    space: &MetricMeasureSpace,
    field: &ScalarField,
    params: &NormParams,
    backend: &Backend,
) -> Result<NormValue> {
    NormEvaluator::new(space, params, backend)?.evaluate(field)
}
