//! Convergence studies: presets, per-mesh pipeline, CSV and SVG output.

pub mod manufactured;
pub mod noise;
pub mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble_forms, assemble_rhs, ScaledForms};
use crate::error::{Error, Result};
use crate::estimator::{compute_estimator, constant_ratio, fit_rate, EstimatorBreakdown, NormContext};
use crate::fe_space::{error_norms, h2_norm, DofMap};
use crate::field::ScalarField;
use crate::mesh::build_structured_mesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::system::{build_system, eliminate_y_check, BlockSystem, Solution};
use crate::trace_space::SineTraceBasis;

pub use manufactured::{SineSeries, SolutionId};
pub use noise::{add_noise, NoiseField};

pub const DEFAULT_MESH_SIZES: [usize; 4] = [20, 40, 80, 160];

pub const CSV_HEADER: &str = "preset,solution,N,gamma,n,h,err_l2,err_h1,est_data,est_jump,est_trace,est_residual,est_total,ratio_C,seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `y sin(πx)`, five modes, several stabilizer scales.
    Fig1,
    /// Perturbed solution with one and two modes.
    Fig2,
    /// `y sin(Nπx)` with `N` modes, `N = 1..4`.
    Fig3,
    /// Constant ratio `C(u)` against `N` for the simple and single-mode solutions.
    Fig4,
    Custom,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Custom => "custom",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "custom" => Ok(Preset::Custom),
            _ => Err(Error::invalid(format!("unknown preset '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub mesh_sizes: Vec<usize>,
    /// Overrides the preset's trace dimension(s).
    pub modes: Option<usize>,
    /// Overrides the preset's stabilizer scale(s).
    pub gammas: Option<Vec<f64>>,
    /// Solution for the `custom` preset.
    pub solution: Option<SolutionId>,
    pub delta: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub dump_matrix: bool,
    /// Fill the `seconds` column with wall time. Off by default so that
    /// repeated runs produce identical files.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            preset,
            mesh_sizes: DEFAULT_MESH_SIZES.to_vec(),
            modes: None,
            gammas: None,
            solution: None,
            delta: 0.0,
            seed: 0,
            out_dir: None,
            dump_matrix: false,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        if self.mesh_sizes.is_empty() {
            return Err(Error::invalid("mesh size list is empty"));
        }
        if self.mesh_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("mesh sizes must be strictly increasing"));
        }
        if let Some(&n) = self.mesh_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!("mesh size {n} is below 2")));
        }
        if self.modes == Some(0) {
            return Err(Error::invalid("trace dimension N must be at least 1"));
        }
        if let Some(g) = &self.gammas {
            if g.is_empty() || g.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::invalid("gamma values must be finite and >= 0"));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("noise amplitude delta must be >= 0"));
        }
        if self.preset == Preset::Custom && self.solution.is_none() {
            return Err(Error::invalid("the custom preset needs a solution id"));
        }
        Ok(self
            .mesh_sizes
            .iter()
            .filter(|&&n| n % 20 != 0)
            .map(|n| format!("n = {n} is not a multiple of 20; the data region is only approximated"))
            .collect())
    }

    /// Every `(solution, N, γ)` curve of the study, in output order.
    pub fn series(&self) -> Vec<SeriesSpec> {
        let g0 = |default: f64| self.gammas.clone().unwrap_or_else(|| vec![default]);
        let modes_or = |default: Vec<usize>| self.modes.map(|m| vec![m]).unwrap_or(default);
        let mut out = Vec::new();
        let mut push = |solution, modes, gammas: &[f64]| {
            for &gamma in gammas {
                out.push(SeriesSpec { solution, modes, gamma });
            }
        };
        match self.preset {
            Preset::Fig1 => {
                let gammas = self.gammas.clone().unwrap_or_else(|| vec![1.0, 1e-2, 1e-4, 0.0]);
                for m in modes_or(vec![5]) {
                    push(SolutionId::Simple, m, &gammas);
                }
            }
            Preset::Fig2 => {
                for m in modes_or(vec![1, 2]) {
                    push(SolutionId::Perturbed, m, &g0(0.0));
                }
            }
            Preset::Fig3 => {
                for k in 1..=4 {
                    push(SolutionId::Mode(k), self.modes.unwrap_or(k), &g0(0.0));
                }
            }
            Preset::Fig4 => {
                for k in 1..=4 {
                    push(SolutionId::Simple, self.modes.unwrap_or(k), &g0(0.0));
                }
                for k in 1..=4 {
                    push(SolutionId::Mode(k), self.modes.unwrap_or(k), &g0(0.0));
                }
            }
            Preset::Custom => {
                let solution = self.solution.unwrap_or(SolutionId::Simple);
                let m = self
                    .modes
                    .unwrap_or_else(|| SineSeries::from_id(solution).trace_dimension());
                push(solution, m, &g0(0.0));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSpec {
    pub solution: SolutionId,
    pub modes: usize,
    pub gamma: f64,
}

impl SeriesSpec {
    pub fn label(&self) -> String {
        format!("{} N={} gamma={}", self.solution, self.modes, self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub preset: Preset,
    pub series: SeriesSpec,
    pub n: usize,
    pub h: f64,
    pub err_l2: f64,
    pub err_h1: f64,
    pub estimator: EstimatorBreakdown,
    pub ratio_c: f64,
    pub h2_norm: f64,
    pub h2_seminorm: f64,
    pub seconds: f64,
    pub relative_residual: f64,
    pub y_deviation: f64,
    pub symmetry_defect: f64,
    pub dimension: usize,
}

impl ConvergenceRecord {
    /// `h ‖u − u_h‖_{H¹} / estimator`
    pub fn effectivity(&self) -> f64 {
        self.h * self.err_h1 / self.estimator.total
    }

    pub fn csv_row(&self, record_timing: bool) -> String {
        let e = &self.estimator;
        let seconds = if record_timing { self.seconds } else { 0.0 };
        format!(
            "{},{},{},{:.6e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.3e}",
            self.preset,
            self.series.solution,
            self.series.modes,
            self.series.gamma,
            self.n,
            self.h,
            self.err_l2,
            self.err_h1,
            e.data,
            e.jump,
            e.trace,
            e.residual,
            e.total,
            self.ratio_c,
            seconds
        )
    }
}

/// Everything assembled and solved for one mesh.
pub struct Discretization {
    pub mesh: crate::Mesh,
    pub dofmap: DofMap,
    pub basis: SineTraceBasis,
    pub scaled: ScaledForms,
    pub system: BlockSystem,
    pub triangle_rule: TriangleRule,
    pub edge_rule: EdgeRule,
}

impl Discretization {
    pub fn new(
        n: usize,
        modes: usize,
        gamma: f64,
        q: &dyn ScalarField,
        f: &dyn ScalarField,
    ) -> Result<Self> {
        let mesh = build_structured_mesh(n)?;
        let dofmap = DofMap::new(&mesh);
        let basis = SineTraceBasis::new(modes);
        let triangle_rule = TriangleRule::degree4();
        let edge_rule = EdgeRule::default();
        let forms = assemble_forms(&mesh, &dofmap, &basis, &edge_rule);
        let scaled = ScaledForms::new(&forms, gamma)?;
        let rhs = assemble_rhs(&mesh, &dofmap, q, f, modes, &triangle_rule);
        let system = build_system(&scaled, &rhs, &dofmap)?;
        Ok(Self {
            mesh,
            dofmap,
            basis,
            scaled,
            system,
            triangle_rule,
            edge_rule,
        })
    }

    pub fn norm_context(&self) -> NormContext<'_> {
        NormContext {
            mesh: &self.mesh,
            basis: &self.basis,
            triangle_rule: &self.triangle_rule,
            edge_rule: &self.edge_rule,
        }
    }

    pub fn solve(&self) -> Result<Solution> {
        self.system.solve()
    }
}

/// Runs the full pipeline for one `(series, n)` pair.
pub fn run_single(
    preset: Preset,
    series: SeriesSpec,
    n: usize,
    delta: f64,
    seed: u64,
    dump_dir: Option<&Path>,
) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let exact = SineSeries::from_id(series.solution);
    let source = exact.source();
    let q = add_noise(&exact, delta, seed);
    let disc = Discretization::new(n, series.modes, series.gamma, &q, &source)?;
    if let Some(dir) = dump_dir {
        let name = format!(
            "{preset}_{}_N{}_g{:e}_n{n}.mtx",
            series.solution, series.modes, series.gamma
        );
        disc.system.write_matrix_market(&dir.join(name))?;
    }
    let solution = disc.solve()?;
    let ctx = disc.norm_context();
    let errors = error_norms(&disc.mesh, &exact, &solution.u, &disc.triangle_rule);
    let estimator = compute_estimator(&ctx, &solution, &q, &source);
    let h = disc.mesh.h();
    let h2 = h2_norm(&disc.mesh, &exact, &disc.triangle_rule);
    Ok(ConvergenceRecord {
        preset,
        series,
        n,
        h,
        err_l2: errors.l2,
        err_h1: errors.h1,
        estimator,
        ratio_c: constant_ratio(errors.h1, h, h2.full())?,
        h2_norm: h2.full(),
        h2_seminorm: h2.seminorm(),
        seconds: start.elapsed().as_secs_f64(),
        relative_residual: solution.relative_residual,
        y_deviation: eliminate_y_check(&solution, &disc.scaled),
        symmetry_defect: disc.system.matrix.symmetry_defect() / disc.system.matrix.max_abs(),
        dimension: disc.system.dim(),
    })
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<ConvergenceRecord>,
    pub csv: String,
    pub svg: String,
    pub warnings: Vec<String>,
    pub csv_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

/// A failed run keeps the records that completed before the failure.
#[derive(Debug)]
pub struct ExperimentFailure {
    pub error: Error,
    pub partial: Vec<ConvergenceRecord>,
}

impl fmt::Display for ExperimentFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} records completed before the failure)",
            self.error,
            self.partial.len()
        )
    }
}

impl std::error::Error for ExperimentFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for ExperimentFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: Vec::new(),
        }
    }
}

pub fn render_csv(records: &[ConvergenceRecord], record_timing: bool) -> String {
    let mut out = String::with_capacity(160 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row(record_timing));
        out.push('\n');
    }
    out
}

/// Groups records by series, in first-appearance order.
pub fn group_by_series(records: &[ConvergenceRecord]) -> Vec<(SeriesSpec, Vec<&ConvergenceRecord>)> {
    let mut groups: Vec<(SeriesSpec, Vec<&ConvergenceRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(s, _)| *s == r.series) {
            Some((_, v)) => v.push(r),
            None => groups.push((r.series, vec![r])),
        }
    }
    groups
}

/// Fitted H¹ slope of every series with at least three meshes.
pub fn series_rates(records: &[ConvergenceRecord]) -> Vec<(SeriesSpec, Option<f64>)> {
    group_by_series(records)
        .into_iter()
        .map(|(s, rs)| {
            let pairs: Vec<_> = rs.iter().map(|r| (r.h, r.err_h1)).collect();
            (s, fit_rate(&pairs).ok())
        })
        .collect()
}

pub fn render_svg(preset: Preset, records: &[ConvergenceRecord]) -> String {
    let groups = group_by_series(records);
    let plot = if preset == Preset::Fig4 {
        // C(u) against N at the finest mesh, one curve per solution family.
        let mut simple = Vec::new();
        let mut modes = Vec::new();
        for (s, rs) in &groups {
            if let Some(last) = rs.iter().max_by_key(|r| r.n) {
                let point = (s.modes as f64, last.ratio_c);
                match s.solution {
                    SolutionId::Mode(_) => modes.push(point),
                    _ => simple.push(point),
                }
            }
        }
        svg::LogLogPlot {
            title: "fig4: ratio C(u) at the finest mesh".into(),
            x_label: "N".into(),
            y_label: "C(u)".into(),
            series: vec![
                svg::Series {
                    label: "simple".into(),
                    points: simple,
                },
                svg::Series {
                    label: "mode N".into(),
                    points: modes,
                },
            ],
            reference_slope: None,
        }
    } else {
        svg::LogLogPlot {
            title: format!("{preset}: H1 error vs h (dashed: rate h)"),
            x_label: "h".into(),
            y_label: "H1 error".into(),
            series: groups
                .iter()
                .map(|(s, rs)| svg::Series {
                    label: s.label(),
                    points: rs.iter().map(|r| (r.h, r.err_h1)).collect(),
                })
                .collect(),
            reference_slope: Some(1.0),
        }
    };
    plot.render()
}

/// Runs every `(series, n)` job, in parallel across jobs, and writes
/// `<preset>.csv` / `<preset>.svg` when an output directory is configured.
///
/// On a solver failure the CSV holds the records that precede the failing
/// job in output order.
pub fn run_experiment(config: &ExperimentConfig) -> std::result::Result<ExperimentOutput, ExperimentFailure> {
    let warnings = config.validate()?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    let dump_dir = if config.dump_matrix {
        config.out_dir.as_deref()
    } else {
        None
    };
    let jobs: Vec<(SeriesSpec, usize)> = config
        .series()
        .into_iter()
        .flat_map(|s| config.mesh_sizes.iter().map(move |&n| (s, n)))
        .collect();
    let results: Vec<Result<ConvergenceRecord>> = jobs
        .par_iter()
        .map(|&(s, n)| run_single(config.preset, s, n, config.delta, config.seed, dump_dir))
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let csv = render_csv(&records, config.record_timing);
    let csv_path = config
        .out_dir
        .as_ref()
        .map(|d| d.join(format!("{}.csv", config.preset)));
    if let Some(path) = &csv_path {
        fs::write(path, &csv).map_err(Error::from)?;
    }
    if let Some(error) = failure {
        return Err(ExperimentFailure {
            error,
            partial: records,
        });
    }

    let svg = render_svg(config.preset, &records);
    let svg_path = config
        .out_dir
        .as_ref()
        .map(|d| d.join(format!("{}.svg", config.preset)));
    if let Some(path) = &svg_path {
        fs::write(path, &svg).map_err(Error::from)?;
    }
    Ok(ExperimentOutput {
        records,
        csv,
        svg,
        warnings,
        csv_path,
        svg_path,
    })
}
