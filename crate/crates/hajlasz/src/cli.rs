//! Command-line interface. Every subcommand reads and writes JSON; tabular
//! outputs switch to CSV with `--csv`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hajlasz_core::gradients::{check_membership, difference_gradient, grand_maximal_gradient};
use hajlasz_core::lp_bands::{grand_norm, Dictionary, GrandFamily};
use hajlasz_core::norms::NormMode;
use hajlasz_core::optimize::{build_program, sobolev_norm, solve, Certificate, SolverConfig};
use hajlasz_core::qcmap::{analyze_distortion, volume_derivative, AnalysisConfig, RadiusPolicy};
use hajlasz_core::fields::generate_family;
use hajlasz_core::{GradientClassSpec, MetricMeasureSpace, ScalarField};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::error::{Error, Result};
use crate::experiment::{map_diagnostics, run_experiment, BoundNorm, ExperimentSpec, RunOptions};
use crate::formats::{
    load_field, parse_exponent, read_json, write_atomic, BackendSpec, FamilyFile, FamilyName, FieldFile, GradientFile,
    MapSpec, MethodName, ParamsSpec, SpaceFile,
};
use crate::hash::content_hash;
use crate::report::{convert, num, render, Format, Report, ReportKind};

#[derive(Parser, Debug)]
#[command(name = "hajlasz", version, about = "Smoothness norms on finite metric measure spaces")]
pub struct Cli {
    /// Seed for every random choice; overrides seeds in input files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write tabular output as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(subcommand)]
    Space(SpaceCmd),
    #[command(subcommand)]
    Field(FieldCmd),
    #[command(subcommand)]
    Grad(GradCmd),
    #[command(subcommand)]
    Norm(NormCmd),
    #[command(subcommand)]
    Opt(OptCmd),
    #[command(subcommand)]
    Lp(LpCmd),
    #[command(subcommand)]
    Qc(QcCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Args, Debug)]
pub struct Out {
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Input {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    /// Field to use when the file holds several.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Args, Debug)]
pub struct Exponents {
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_parser = parse_exponent)]
    pub p: f64,
    #[arg(long, value_parser = parse_exponent, default_value = "inf")]
    pub q: f64,
}

#[derive(Subcommand, Debug)]
pub enum SpaceCmd {
    /// Uniform grid on the torus or a Euclidean square patch.
    BuildGrid {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long)]
        euclidean: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Check metric axioms and print a summary.
    Validate { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum FieldCmd {
    /// Generate a field family from a family spec.
    Gen {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GradMethod {
    Diff,
    Grand,
}

#[derive(Subcommand, Debug)]
pub enum GradCmd {
    Build {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "diff")]
        method: GradMethod,
        #[arg(long)]
        s: f64,
        #[arg(long, value_parser = parse_exponent, default_value = "2")]
        p: f64,
        #[arg(long, default_value_t = 1)]
        k0: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Smallest scaling that makes a gradient admissible for the base class.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        grad: PathBuf,
        #[arg(long)]
        s: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    Compute {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = FamilyName::parse)]
        family: FamilyName,
        #[command(flatten)]
        exps: Exponents,
        /// optimal, difference, grand or lp; defaults by family.
        #[arg(long, value_parser = BackendSpec::parse)]
        backend: Option<BackendSpec>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OptMode {
    Lplq,
    Lqlp,
    Sobolev,
}

#[derive(Subcommand, Debug)]
pub enum OptCmd {
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        exps: Exponents,
        #[arg(long, value_enum, default_value = "lplq")]
        mode: OptMode,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Dual,
    Barrier,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LpFamily {
    #[value(name = "F")]
    F,
    #[value(name = "B")]
    B,
    #[value(name = "grandF")]
    GrandF,
    #[value(name = "grandB")]
    GrandB,
}

#[derive(Subcommand, Debug)]
pub enum LpCmd {
    Norm {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        family: LpFamily,
        #[command(flatten)]
        exps: Exponents,
        #[arg(long, default_value_t = 1.0)]
        sharpness: f64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand, Debug)]
pub enum QcCmd {
    /// Distortion, volume derivative and reverse Hölder summary.
    Analyze {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = MapSpec::parse)]
        map: MapSpec,
        #[command(flatten)]
        out: Out,
    },
    /// Per-point volume derivative.
    Jacobian {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = MapSpec::parse)]
        map: MapSpec,
        /// Ball radius in grid spacings.
        #[arg(long, default_value_t = 3.0)]
        spacings: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Norm ratios of composed fields.
    Invariance {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = MapSpec::parse)]
        map: MapSpec,
        /// Family spec; defaults to 16 bump mixtures.
        #[arg(long)]
        family_spec: Option<PathBuf>,
        #[arg(long, value_parser = FamilyName::parse, default_value = "M")]
        family: FamilyName,
        #[command(flatten)]
        exps: Exponents,
        #[arg(long, value_parser = BackendSpec::parse, default_value = "difference")]
        backend: BackendSpec,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    Run {
        spec: PathBuf,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReportCmd {
    Convert {
        input: PathBuf,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        out: Out,
    },
}

fn emit(out: &Out, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn emit_json<T: Serialize>(out: &Out, value: &T) -> Result<()> {
    let mut b = serde_json::to_vec_pretty(value)?;
    b.push(b'\n');
    emit(out, &b)
}

fn load_space(path: &Path) -> Result<MetricMeasureSpace> {
    read_json::<SpaceFile>(path)?.build()
}

fn load(input: &Input) -> Result<(MetricMeasureSpace, ScalarField)> {
    let space = load_space(&input.space)?;
    let field = load_field(&input.field, input.index, &space)?;
    Ok((space, field))
}

fn exps_json(e: &Exponents) -> Value {
    json!({ "s": e.s, "p": num(e.p), "q": num(e.q) })
}

fn ad_hoc_report(kind: ReportKind, inputs: &Value, columns: &[&str]) -> Report {
    Report::new(kind, content_hash(inputs), columns.iter().map(|c| c.to_string()).collect())
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let format = if cli.csv { Format::Csv } else { Format::Json };
    match cli.command {
        Command::Space(SpaceCmd::BuildGrid { dim, n, side, euclidean, out }) => {
            let file = SpaceFile::grid(dim, n, side, !euclidean);
            let space = file.build()?;
            emit_json(&out, &SpaceFile::describe(&space))
        }
        Command::Space(SpaceCmd::Validate { file }) => {
            let space = load_space(&file)?;
            space.validate()?;
            let w = space.window();
            emit_json(
                &Out { out: None },
                &json!({
                    "valid": true,
                    "points": space.len(),
                    "hash": SpaceFile::hash_of(&space),
                    "window": w.map(|w| [w.k_min, w.k_max]),
                    "diameter": space.diameter(),
                    "total_measure": space.total_measure(),
                }),
            )
        }
        Command::Field(FieldCmd::Gen { space, spec, out }) => {
            let s = load_space(&space)?;
            let fam: FamilyFile = read_json(&spec)?;
            let mut core = fam.to_core(cli.seed.unwrap_or(0));
            if let Some(seed) = cli.seed {
                core.seed = seed;
            }
            let h = SpaceFile::hash_of(&s);
            let files: Vec<FieldFile> = generate_family(&s, &core)?
                .into_iter()
                .map(|f| FieldFile { space: Some(h.clone()), values: f.into_values() })
                .collect();
            if files.len() == 1 {
                emit_json(&out, &files[0])
            } else {
                emit_json(&out, &files)
            }
        }
        Command::Grad(GradCmd::Build { input, method, s, p, k0, out }) => {
            let (space, u) = load(&input)?;
            let g = match method {
                GradMethod::Diff => difference_gradient(&space, &u, s, p, k0)?,
                GradMethod::Grand => grand_maximal_gradient(&space, &u, s, &Dictionary::standard(grid_dim(&space)?)?)?,
            };
            emit_json(&out, &GradientFile::from_sequence(&g))
        }
        Command::Grad(GradCmd::Check { input, grad, s }) => {
            let (space, u) = load(&input)?;
            let g: GradientFile = read_json(&grad)?;
            let rep = check_membership(&space, &u, &g.to_sequence(space.len())?, &GradientClassSpec::base(s))?;
            emit_json(
                &Out { out: None },
                &json!({
                    "member": rep.is_member(),
                    "rho_min": num(rep.rho_min),
                    "violated": rep.violated_count,
                    "worst_pair": rep.worst_pair,
                }),
            )
        }
        Command::Norm(NormCmd::Compute { input, family, exps, backend, out }) => {
            let (space, u) = load(&input)?;
            let params = ParamsSpec::new(exps.s, exps.p, exps.q, family);
            let backend = backend.unwrap_or_else(|| crate::experiment::default_backend(family.core()));
            let cache = Cache::from_env();
            let h = SpaceFile::hash_of(&space);
            let r = BoundNorm::new(&space, &h, params, &backend, cache.as_ref())?.evaluate(&u)?;
            emit_json(
                &out,
                &json!({
                    "value": num(r.value),
                    "lower_bound": r.lower_bound.map(num),
                    "heuristic": r.heuristic,
                    "params": params,
                    "backend": backend,
                    "space_hash": h,
                }),
            )
        }
        Command::Opt(OptCmd::Solve { input, exps, mode, tol, method, out }) => {
            let (space, u) = load(&input)?;
            let method = match method {
                MethodArg::Auto => MethodName::Auto,
                MethodArg::Dual => MethodName::Dual,
                MethodArg::Barrier => MethodName::Barrier,
            };
            let cfg = SolverConfig { method: method.core(), tol, max_iters: None };
            let r = match mode {
                OptMode::Sobolev => sobolev_norm(&space, &u, exps.s, exps.p, &cfg)?,
                OptMode::Lplq | OptMode::Lqlp => {
                    let m = if matches!(mode, OptMode::Lplq) { NormMode::LpLq } else { NormMode::LqLp };
                    solve(&build_program(&space, &u, exps.s, exps.p, exps.q, m)?, &cfg)?
                }
            };
            let certificate = match &r.certificate {
                Certificate::Sequence(seq) => serde_json::to_value(GradientFile::from_sequence(seq))?,
                Certificate::Single(g) => json!({ "single": g }),
            };
            emit_json(
                &out,
                &json!({
                    "upper_bound": num(r.upper_bound),
                    "lower_bound": num(r.lower_bound),
                    "relative_gap": num(r.relative_gap()),
                    "converged": r.converged,
                    "heuristic": r.heuristic,
                    "iterations": r.iterations,
                    "method": format!("{:?}", r.method),
                    "exponents": exps_json(&exps),
                    "space_hash": SpaceFile::hash_of(&space),
                    "certificate": certificate,
                }),
            )
        }
        Command::Lp(LpCmd::Norm { input, family, exps, sharpness, out }) => {
            let (space, u) = load(&input)?;
            let value = match family {
                LpFamily::F | LpFamily::B => {
                    let fam = if matches!(family, LpFamily::F) { FamilyName::F } else { FamilyName::B };
                    let backend = BackendSpec::Lp { sharpness, normalization: Default::default() };
                    let h = SpaceFile::hash_of(&space);
                    BoundNorm::new(&space, &h, ParamsSpec::new(exps.s, exps.p, exps.q, fam), &backend, None)?
                        .evaluate(&u)?
                        .value
                }
                LpFamily::GrandF | LpFamily::GrandB => {
                    let g = if matches!(family, LpFamily::GrandF) { GrandFamily::F } else { GrandFamily::B };
                    let dict = Dictionary::standard(grid_dim(&space)?)?;
                    grand_norm(&space, &u, exps.s, exps.p, exps.q, &dict, g)?
                }
            };
            emit_json(
                &out,
                &json!({
                    "value": num(value),
                    "family": format!("{family:?}"),
                    "exponents": exps_json(&exps),
                    "sharpness": sharpness,
                    "space_hash": SpaceFile::hash_of(&space),
                }),
            )
        }
        Command::Qc(QcCmd::Analyze { space, map, out }) => {
            let s = load_space(&space)?;
            let m = map.sample(&s)?;
            let rows = map_diagnostics(&m, cli.seed.unwrap_or(0))?;
            let inputs = json!({ "space": SpaceFile::hash_of(&s), "map": map, "seed": cli.seed.unwrap_or(0) });
            let mut report = ad_hoc_report(ReportKind::Diagnostics, &inputs, &["quantity", "value"]);
            report.rows = rows.into_iter().map(|(k, v)| vec![json!(k), num(v)]).collect();
            emit(&out, &render(&report, format)?)
        }
        Command::Qc(QcCmd::Jacobian { space, map, spacings, out }) => {
            let s = load_space(&space)?;
            let m = map.sample(&s)?;
            let j = volume_derivative(&m, RadiusPolicy::Spacings(spacings))?;
            let a = analyze_distortion(&m, &AnalysisConfig { seed: cli.seed.unwrap_or(0), eta_samples: 0, ..Default::default() })?;
            let inputs = json!({ "space": SpaceFile::hash_of(&s), "map": map, "spacings": spacings });
            let mut report = ad_hoc_report(ReportKind::Diagnostics, &inputs, &["point", "interior", "j_hat", "radius", "h"]);
            for x in 0..s.len() {
                report.rows.push(vec![
                    json!(x),
                    json!(m.interior()[x]),
                    num(j.j_hat[x]),
                    num(j.radius[x]),
                    a.h_point[x].map_or(Value::Null, num),
                ]);
            }
            report.summary.insert("mass_error".into(), num(j.mass_error));
            report.summary.insert("flagged".into(), json!(j.flagged));
            emit(&out, &render(&report, format)?)
        }
        Command::Qc(QcCmd::Invariance { space, map, family_spec, family, exps, backend, out }) => {
            let s = read_json::<SpaceFile>(&space)?;
            let fam = match family_spec {
                Some(p) => read_json(&p)?,
                None => FamilyFile {
                    kind: crate::formats::FamilyKindSpec::BumpMixture { bumps: 3, width: (0.15, 0.35), center_radius: 0.3 },
                    count: 16,
                    amplitude: (0.5, 1.5),
                    seed: None,
                },
            };
            let spec = ExperimentSpec {
                kind: ReportKind::RatioTable,
                space: s,
                family: fam,
                params: vec![ParamsSpec::new(exps.s, exps.p, exps.q, family)],
                map: Some(map),
                backends: vec![backend],
                output: None,
                rng_seed: cli.seed.unwrap_or(0),
            };
            let opts = RunOptions { cache: Cache::from_env() };
            let report = run_experiment(&spec, &opts)?;
            emit(&out, &render(&report, format)?)
        }
        Command::Experiment(ExperimentCmd::Run { spec, out }) => {
            let mut spec: ExperimentSpec = read_json(&spec)?;
            if let Some(seed) = cli.seed {
                spec.rng_seed = seed;
            }
            let report = run_experiment(&spec, &RunOptions { cache: Cache::from_env() })?;
            if let Some(o) = &spec.output {
                if let Some(p) = &o.json {
                    crate::report::write_report(&report, p, Format::Json)?;
                }
                if let Some(p) = &o.csv {
                    crate::report::write_report(&report, p, Format::Csv)?;
                }
            }
            emit(&out, &render(&report, format)?)
        }
        Command::Report(ReportCmd::Convert { input, to, out }) => {
            let f: Format = to.parse()?;
            match &out.out {
                Some(p) => convert(&input, p, f),
                None => {
                    let report: Report = read_json(&input)?;
                    emit(&out, &render(&report, f)?)
                }
            }
        }
    }
}

fn grid_dim(space: &MetricMeasureSpace) -> Result<usize> {
    space
        .periodic_grid()
        .map(|g| g.n_dim)
        .ok_or_else(|| Error::Usage("grand maximal functions need a periodic grid".into()))
}

/// Parse arguments, run, and map errors to exit codes: 2 usage, 1 otherwise.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Spec { .. } | Error::Core(hajlasz_core::Error::Config(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
