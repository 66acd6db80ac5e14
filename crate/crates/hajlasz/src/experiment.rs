//! Experiment specs and the deterministic runner behind `experiment run`.

use std::path::PathBuf;

use hajlasz_core::backend::{Backend, NormEvaluator};
use hajlasz_core::fields::generate_family;
use hajlasz_core::qcmap::{
    analyze_distortion, change_of_variables_check, reverse_holder_scan, sample_balls, summarize, volume_derivative,
    AnalysisConfig, MapSample, RadiusPolicy,
};
use hajlasz_core::{FunctionFamilySpec, MetricMeasureSpace, NormFamily, ScalarField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::error::{Error, Result};
use crate::formats::{BackendSpec, FamilyFile, FamilyName, MapSpec, ParamsSpec, SpaceFile};
use crate::hash::content_hash;
use crate::report::{num, Report, ReportKind, TOOL_VERSION};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ReportKind,
    pub space: SpaceFile,
    pub family: FamilyFile,
    pub params: Vec<ParamsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default)]
    pub backends: Vec<BackendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl ExperimentSpec {
    /// Hash of everything that determines the rows; output paths are excluded.
    pub fn hash(&self) -> String {
        content_hash(&ExperimentSpec { output: None, ..self.clone() })
    }

    pub fn validate(&self) -> Result<MetricMeasureSpace> {
        if self.params.is_empty() {
            return Err(Error::spec("params", "at least one parameter set is needed"));
        }
        for (i, p) in self.params.iter().enumerate() {
            p.to_core().map_err(|e| Error::spec(format!("params[{i}]"), e.to_string()))?;
        }
        if self.family.count == 0 {
            return Err(Error::spec("family.count", "must be at least 1"));
        }
        let (lo, hi) = self.family.amplitude;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::spec("family.amplitude", "needs finite lo <= hi"));
        }
        let needs_backend = !matches!(self.kind, ReportKind::Diagnostics);
        if needs_backend && self.backends.is_empty() {
            return Err(Error::spec("backends", "at least one backend is needed"));
        }
        for (j, b) in self.backends.iter().enumerate() {
            match b {
                BackendSpec::Optimal { tol, .. } if !(*tol > 0.0) => {
                    return Err(Error::spec(format!("backends[{j}].tol"), "must be positive"))
                }
                BackendSpec::Difference { k0 } if *k0 == 0 => {
                    return Err(Error::spec(format!("backends[{j}].k0"), "must be at least 1"))
                }
                _ => {}
            }
        }
        if self.kind == ReportKind::RatioTable && self.map.is_none() {
            return Err(Error::spec("map", "a ratio table needs a map"));
        }
        self.space.build().map_err(|e| Error::spec("space", e.to_string()))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub cache: Option<Cache>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub value: f64,
    pub lower_bound: Option<f64>,
    pub heuristic: bool,
}

fn supports(backend: &BackendSpec, f: FamilyName) -> bool {
    use FamilyName::*;
    match backend {
        BackendSpec::Optimal { .. } => matches!(f, M | N | Sobolev),
        BackendSpec::Difference { .. } => matches!(f, M | N | Sobolev | BP),
        BackendSpec::Grand => !matches!(f, BP),
        BackendSpec::Lp { .. } => matches!(f, F | B),
    }
}

/// Requested family when the backend has it, otherwise its natural counterpart.
pub fn resolve_family(backend: &BackendSpec, requested: FamilyName) -> FamilyName {
    if supports(backend, requested) {
        requested
    } else {
        backend.natural_family(requested)
    }
}

/// A backend bound to one space and parameter set, with optional caching.
pub struct BoundNorm<'a> {
    evaluator: NormEvaluator<'a>,
    key_base: Value,
    cache: Option<&'a Cache>,
}

impl<'a> BoundNorm<'a> {
    pub fn new(
        space: &'a MetricMeasureSpace,
        space_hash: &str,
        params: ParamsSpec,
        backend: &BackendSpec,
        cache: Option<&'a Cache>,
    ) -> Result<Self> {
        let core: Backend = backend.to_core();
        let evaluator = NormEvaluator::new(space, &params.to_core()?, &core)?;
        let key_base = json!({ "tool": TOOL_VERSION, "space": space_hash, "params": params, "backend": backend });
        Ok(BoundNorm { evaluator, key_base, cache })
    }

    pub fn evaluate(&self, field: &ScalarField) -> Result<NormRecord> {
        let key = self.cache.map(|_| {
            let mut k = self.key_base.clone();
            k["field"] = Value::String(content_hash(&field.values()));
            Cache::key(&k)
        });
        if let (Some(c), Some(k)) = (self.cache, &key) {
            if let Some(hit) = c.get::<NormRecord>(k) {
                return Ok(hit);
            }
        }
        let v = self.evaluator.evaluate(field)?;
        let rec = NormRecord { value: v.value, lower_bound: v.lower_bound, heuristic: v.heuristic };
        if let (Some(c), Some(k)) = (self.cache, &key) {
            if rec.value.is_finite() {
                c.put(k, &rec)?;
            }
        }
        Ok(rec)
    }
}

fn params_label(p: &ParamsSpec) -> String {
    let e = |v: f64| if v.is_infinite() { "inf".to_string() } else { v.to_string() };
    format!("s={},p={},q={}", p.s, e(p.p), e(p.q))
}

fn params_cells(p: &ParamsSpec) -> [Value; 3] {
    [num(p.s), num(p.p), num(p.q)]
}

fn bind_error(j: usize, e: Error) -> Error {
    match e {
        Error::Core(c) => Error::spec(format!("backends[{j}]"), c.to_string()),
        other => other,
    }
}

fn family_on(space: &MetricMeasureSpace, family: &FunctionFamilySpec) -> Result<Vec<ScalarField>> {
    generate_family(space, family).map_err(|e| Error::spec("family", e.to_string()))
}

/// Evaluate every field in parallel; order of the output follows `fields`.
fn evaluate_all(norm: &BoundNorm<'_>, fields: &[ScalarField]) -> Result<Vec<NormRecord>> {
    fields.par_iter().map(|u| norm.evaluate(u)).collect()
}

pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<Report> {
    let space = spec.validate()?;
    let hash = spec.hash();
    let family = spec.family.to_core(spec.rng_seed);
    let cache = options.cache.as_ref();
    match spec.kind {
        ReportKind::NormTable => {
            let fields = family_on(&space, &family)?;
            let space_hash = SpaceFile::hash_of(&space);
            let mut report = Report::new(
                spec.kind,
                hash,
                ["field", "backend", "family", "s", "p", "q", "value", "lower_bound", "heuristic"].map(String::from).to_vec(),
            );
            for p in &spec.params {
                for (j, b) in spec.backends.iter().enumerate() {
                    let fp = p.with_family(resolve_family(b, p.family));
                    let norm = BoundNorm::new(&space, &space_hash, fp, b, cache).map_err(|e| bind_error(j, e))?;
                    for (i, r) in evaluate_all(&norm, &fields)?.into_iter().enumerate() {
                        let [s, pp, q] = params_cells(&fp);
                        report.rows.push(vec![
                            json!(i),
                            json!(b.label()),
                            json!(fp.family.label()),
                            s,
                            pp,
                            q,
                            num(r.value),
                            r.lower_bound.map_or(Value::Null, num),
                            json!(r.heuristic),
                        ]);
                    }
                }
            }
            Ok(report)
        }
        ReportKind::EquivalenceTable => equivalence_table(spec, &space, hash, cache),
        ReportKind::RatioTable => ratio_table(spec, &space, hash, cache),
        ReportKind::Diagnostics => diagnostics(spec, &space, hash),
    }
}

fn equivalence_table(spec: &ExperimentSpec, space: &MetricMeasureSpace, hash: String, cache: Option<&Cache>) -> Result<Report> {
    let fields = family_on(space, &spec.family.to_core(spec.rng_seed))?;
    let space_hash = SpaceFile::hash_of(space);
    let labels: Vec<String> = spec.backends.iter().map(|b| b.label()).collect();
    let mut columns: Vec<String> = ["field", "s", "p", "q", "families"].map(String::from).to_vec();
    columns.extend(labels.iter().cloned());
    let mut report = Report::new(spec.kind, hash, columns);
    for p in &spec.params {
        let mut table: Vec<Vec<f64>> = Vec::new();
        let mut fams = Vec::new();
        for (j, b) in spec.backends.iter().enumerate() {
            let fp = p.with_family(b.natural_family(p.family));
            fams.push(fp.family.label());
            let norm = BoundNorm::new(space, &space_hash, fp, b, cache).map_err(|e| bind_error(j, e))?;
            table.push(evaluate_all(&norm, &fields)?.into_iter().map(|r| r.value).collect());
        }
        let fams = fams.join("|");
        for i in 0..fields.len() {
            let mut row = vec![json!(i)];
            row.extend(params_cells(p));
            row.push(json!(fams));
            row.extend(table.iter().map(|col| num(col[i])));
            report.rows.push(row);
        }
        for a in 0..labels.len() {
            for b in a + 1..labels.len() {
                let ratios: Vec<f64> = (0..fields.len())
                    .filter(|&i| table[b][i] > 0.0)
                    .map(|i| table[a][i] / table[b][i])
                    .collect();
                if ratios.is_empty() {
                    continue;
                }
                let s = summarize(p.to_core()?, ratios.iter().copied());
                report.summary.insert(
                    format!("{}:{}/{}", params_label(p), labels[a], labels[b]),
                    json!({ "min": num(s.min), "max": num(s.max), "geometric_mean": num(s.geometric_mean), "spread": num(s.spread()), "count": ratios.len() }),
                );
            }
        }
    }
    Ok(report)
}

fn ratio_table(spec: &ExperimentSpec, space: &MetricMeasureSpace, hash: String, cache: Option<&Cache>) -> Result<Report> {
    let map = spec.map.as_ref().expect("validated").sample(space).map_err(|e| match e {
        Error::Core(c) => Error::spec("map", c.to_string()),
        other => other,
    })?;
    let target = map.target();
    let fields = family_on(target, &spec.family.to_core(spec.rng_seed))?;
    let pulled: Vec<ScalarField> = fields.iter().map(|u| map.compose(u)).collect::<hajlasz_core::Result<_>>()?;
    let (src_hash, tgt_hash) = (SpaceFile::hash_of(space), SpaceFile::hash_of(target));
    let mut report = Report::new(
        spec.kind,
        hash,
        ["field", "backend", "family", "s", "p", "q", "source_norm", "target_norm", "ratio"].map(String::from).to_vec(),
    );
    for p in &spec.params {
        for (j, b) in spec.backends.iter().enumerate() {
            let fp = p.with_family(resolve_family(b, p.family));
            let on_src = BoundNorm::new(space, &src_hash, fp, b, cache).map_err(|e| bind_error(j, e))?;
            let on_tgt = BoundNorm::new(target, &tgt_hash, fp, b, cache).map_err(|e| bind_error(j, e))?;
            let t = evaluate_all(&on_tgt, &fields)?;
            let s = evaluate_all(&on_src, &pulled)?;
            let mut ratios = Vec::new();
            for i in 0..fields.len() {
                if !(t[i].value > 0.0) {
                    continue;
                }
                let r = s[i].value / t[i].value;
                ratios.push(r);
                let [cs, cp, cq] = params_cells(&fp);
                report.rows.push(vec![
                    json!(i),
                    json!(b.label()),
                    json!(fp.family.label()),
                    cs,
                    cp,
                    cq,
                    num(s[i].value),
                    num(t[i].value),
                    num(r),
                ]);
            }
            if !ratios.is_empty() {
                let sm = summarize(fp.to_core()?, ratios.iter().copied());
                report.summary.insert(
                    format!("{}:{}:{}", b.label(), fp.family.label(), params_label(&fp)),
                    json!({ "min": num(sm.min), "max": num(sm.max), "geometric_mean": num(sm.geometric_mean), "spread": num(sm.spread()), "count": ratios.len() }),
                );
            }
        }
    }
    Ok(report)
}

/// Radii used for reverse Hölder balls, in multiples of the grid spacing.
const RH_BALL_SPACINGS: (f64, f64) = (2.0, 8.0);
const RH_EXPONENTS: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, f64::INFINITY];
const RH_CAP: f64 = 10.0;

/// Distortion, volume derivative and reverse Hölder statistics for a map.
pub fn map_diagnostics(map: &MapSample, seed: u64) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let a = analyze_distortion(map, &AnalysisConfig { seed, ..Default::default() })?;
    out.push(("h_global".to_string(), a.h_global));
    out.push(("skipped_scales".to_string(), a.skipped as f64));
    if let Some((lo, hi)) = a.volume_ratio_range {
        out.push(("volume_ratio_min".to_string(), lo));
        out.push(("volume_ratio_max".to_string(), hi));
    }
    let j = volume_derivative(map, RadiusPolicy::default())?;
    let interior = map.interior();
    let inner: Vec<f64> = j.j_hat.iter().zip(interior).filter(|t| *t.1).map(|t| *t.0).collect();
    out.push(("jacobian_mass_error".to_string(), j.mass_error));
    out.push(("jacobian_flagged".to_string(), j.flagged.len() as f64));
    out.push(("jacobian_interior_min".to_string(), inner.iter().copied().fold(f64::INFINITY, f64::min)));
    out.push(("jacobian_interior_max".to_string(), inner.iter().copied().fold(0.0, f64::max)));
    let src = map.source();
    let h = src.grid().map_or(src.min_distance(), |g| g.spacing());
    let radii = (RH_BALL_SPACINGS.0 * h, RH_BALL_SPACINGS.1 * h);
    let balls = sample_balls(src, 200, radii, interior, seed);
    let rh = reverse_holder_scan(src, &j.j_hat, &RH_EXPONENTS, &balls, RH_CAP)?;
    for (r, c) in rh.r_grid.iter().zip(&rh.constants) {
        out.push((format!("reverse_holder[r={r}]"), *c));
    }
    out.push(("reverse_holder_r_hat".to_string(), rh.r_f_hat.unwrap_or(f64::NAN)));
    let one = ScalarField::constant(map.target().len(), 1.0);
    out.push(("change_of_variables_discrepancy".to_string(), change_of_variables_check(map, &one, &j)?.discrepancy));
    Ok(out)
}

fn diagnostics(spec: &ExperimentSpec, space: &MetricMeasureSpace, hash: String) -> Result<Report> {
    let mut report = Report::new(spec.kind, hash, vec!["quantity".into(), "value".into()]);
    let mut rows: Vec<(String, f64)> = vec![("points".into(), space.len() as f64)];
    if let Some(w) = space.window() {
        rows.push(("k_min".into(), w.k_min as f64));
        rows.push(("k_max".into(), w.k_max as f64));
    }
    let d = space.estimate_doubling(&[2.0, 4.0, 8.0], 200, spec.rng_seed)?;
    rows.push(("doubling_n_hat".into(), d.n_hat));
    rows.push(("doubling_kappa_hat".into(), d.kappa_hat));
    rows.push(("doubling_c1_hat".into(), d.c1_hat));
    rows.push(("doubling_c2_hat".into(), d.c2_hat));
    if let Some(m) = &spec.map {
        let map = m.sample(space)?;
        rows.extend(map_diagnostics(&map, spec.rng_seed)?);
    }
    report.rows = rows.into_iter().map(|(k, v)| vec![json!(k), num(v)]).collect();
    Ok(report)
}

/// Helper for callers that only want one norm with the default backend for its family.
pub fn default_backend(family: NormFamily) -> BackendSpec {
    match family {
        NormFamily::F | NormFamily::B => BackendSpec::lp(),
        NormFamily::BP => BackendSpec::Difference { k0: 1 },
        _ => BackendSpec::optimal(),
    }
}
