//! Command-line driver.
//!
//! Exit codes: 0 success (also `--help`, `--version`), 1 internal error,
//! 2 invalid input, 3 quantization failure, 64 usage error.
//! `FRAMEFORGE_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use frameforge_core::density::{beurling_bounds, PointSet1D};
use frameforge_core::expframe_line::{
    converged_frame_sum, frame_sum_truncated, norm_sqr, pw_sample_check, ratio_f64, synthesize,
    synthesize_intervals, FrameReport, GridSpectrum, SamplingSet,
};
use frameforge_core::frame_select::{exhaustive_best_subset, submatrix_select, SelectConfig};
use frameforge_core::io::{
    parse_json, parse_matrix, rational_pair, GroupSpectrumFile, LiftFile, PointsFile, Spectrum, SpectrumFile,
};
use frameforge_core::lca_finite::{brute_force_bounds, group_synthesize, lift_frame};
use frameforge_core::sparsifier::{bss_sparsify, quantize_weights, spectral_targets, FrameFamily, QuantizeConfig};
use frameforge_core::{FrameError, Tolerances};

pub mod args;
pub mod report;

use args::{Cli, Command, Common, DensityArgs, GroupSynthArgs, LiftArgs, PwDemoArgs, SelectArgs, SparsifyArgs, SynthArgs};
use report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_QUANTIZATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Largest matrix accepted by `select --oracle`.
pub const ORACLE_MAX_ROWS: usize = 16;

#[derive(Debug)]
pub enum CliError {
    Core(FrameError),
    Input(String),
    Output(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Output(msg) => write!(f, "output error: {msg}"),
        }
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(FrameError::Validation(_) | FrameError::Cover(_)) | CliError::Input(_) => EXIT_INVALID,
            CliError::Core(FrameError::Quantization { .. }) => EXIT_QUANTIZATION,
            CliError::Core(_) | CliError::Output(_) => EXIT_INTERNAL,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (program name first), runs the subcommand, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("FRAMEFORGE_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("FRAMEFORGE_THREADS must be a positive integer, got {value:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::GroupSynth(a) => cmd_group_synth(a),
        Command::Sparsify(a) => cmd_sparsify(a),
        Command::Select(a) => cmd_select(a),
        Command::LiftCheck(a) => cmd_lift(a),
        Command::Density(a) => cmd_density(a),
        Command::PwDemo(a) => cmd_pw_demo(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn in_file<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> CliResult<T> {
    parse_json(&read(path)?).map_err(|e| match e {
        FrameError::Validation(msg) => CliError::Core(FrameError::Validation(format!("{}: {msg}", path.display()))),
        other => CliError::Core(other),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn write_timing(out: &Path, common: &Common, start: Instant) -> CliResult<()> {
    if !common.timing {
        return Ok(());
    }
    let mut name = out.as_os_str().to_owned();
    name.push(".timing.json");
    write_json(
        Path::new(&name),
        &Timing {
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    )
}

fn select_config(common: &Common) -> CliResult<SelectConfig> {
    if common.trials == 0 {
        return Err(FrameError::Validation("--trials must be at least 1".into()).into());
    }
    Ok(SelectConfig {
        trials: common.trials,
        seed: common.seed,
        tol: Tolerances::default(),
    })
}

fn run_echo(epsilon: f64, common: &Common) -> RunEcho {
    RunEcho {
        epsilon,
        seed: common.seed,
        trials: common.trials,
    }
}

/// A synthesized instance together with the unit-grid data the demos need.
struct LineRun {
    grid: GridSpectrum,
    sampling: SamplingSet,
    /// Same `J` with unit dilation, and its report.
    unit: (SamplingSet, FrameReport),
    report: FrameReport,
}

fn synth_one(spec: &Spectrum, eps: f64, slack: f64, cfg: &SelectConfig) -> CliResult<LineRun> {
    match spec {
        Spectrum::Grid(g) => {
            let (s, r) = synthesize(g, eps, cfg)?;
            Ok(LineRun {
                grid: g.clone(),
                sampling: s.clone(),
                unit: (s, r.clone()),
                report: r,
            })
        }
        Spectrum::Intervals(iv) => {
            let (g, s, r) = synthesize_intervals(iv, eps, slack, cfg)?;
            let d = ratio_f64(iv.dilation());
            let unit_set = SamplingSet::new(s.m(), s.indices().iter().copied(), 1.into())?;
            let unit_report = FrameReport {
                a_exact: r.a_exact / d,
                b_exact: r.b_exact / d,
                measure: r.measure / d,
                density: ratio_f64(unit_set.density()),
                ..r.clone()
            };
            Ok(LineRun {
                grid: g,
                sampling: s,
                unit: (unit_set, unit_report),
                report: r,
            })
        }
    }
}

fn demo_coefficients(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Demo on the unit grid: dilation only rescales both sides of the frame inequality.
fn pw_demo(run: &LineRun, l: u64, seed: u64) -> CliResult<PwDemo> {
    let coefficients = demo_coefficients(run.grid.n(), seed);
    let c: Vec<Complex64> = coefficients.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let (sampling, report) = &run.unit;
    let nrm = norm_sqr(&run.grid, &c);
    let truncated_sum = frame_sum_truncated(&run.grid, sampling, &c, l)?;
    let converged = converged_frame_sum(&run.grid, sampling, &c, 1e-8 * nrm)?;
    let samples = pw_sample_check(&run.grid, sampling, report, &c, (l * run.grid.m() as u64) as f64)?;
    Ok(PwDemo {
        l,
        coefficients,
        norm_sqr: nrm,
        truncated_sum,
        converged_lower_ratio: converged.value / (report.a_exact * nrm),
        converged_upper_ratio: converged.value / (report.b_exact * nrm),
        converged,
        samples,
    })
}

fn synth_report(path: &Path, file: SpectrumFile, run: &LineRun, eps: f64, slack: f64, common: &Common) -> SynthReport {
    SynthReport {
        tool: Tool::current(),
        command: "synth".into(),
        input: Input {
            path: path.display().to_string(),
            content: file,
        },
        run: run_echo(eps, common),
        slack,
        grid: GridEcho {
            m: run.grid.m(),
            cells: run.grid.cells().to_vec(),
        },
        sampling: SamplingEcho {
            m: run.sampling.m(),
            indices: run.sampling.indices().to_vec(),
            d: rational_pair(run.sampling.dilation()),
        },
        density_exact: rational_pair(run.sampling.density()),
        frame: run.report.clone(),
        demo: None,
    }
}

fn load_spectrum(path: &Path) -> CliResult<(SpectrumFile, Spectrum)> {
    let file: SpectrumFile = in_file(path)?;
    let spec = file.clone().into_spectrum().map_err(|e| match e {
        FrameError::Validation(msg) => FrameError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((file, spec))
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    let cfg = select_config(&a.common)?;
    let start = Instant::now();
    let spectra = a
        .spectrum
        .iter()
        .map(|p| load_spectrum(p))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(eps_list) = &a.sweep_epsilon {
        let csv_path = a.csv.as_ref().expect("clap enforces --csv");
        return sweep(&spectra, eps_list, a.slack, &cfg, a.common.timing, csv_path);
    }
    if a.spectrum.len() != 1 {
        return Err(FrameError::Validation("several --spectrum files need --sweep-epsilon".into()).into());
    }
    let eps = a.epsilon.expect("clap enforces --epsilon");
    let out = a.out.as_ref().expect("clap enforces --out");
    let (file, spec) = spectra.into_iter().next().expect("one spectrum");
    let run = synth_one(&spec, eps, a.slack, &cfg)?;
    let mut report = synth_report(&a.spectrum[0], file, &run, eps, a.slack, &a.common);
    if a.demo_pw {
        report.demo = Some(pw_demo(&run, a.l, a.common.seed)?);
    }
    write_json(out, &report)?;
    write_timing(out, &a.common, start)
}

fn sweep(
    spectra: &[(SpectrumFile, Spectrum)],
    eps_list: &[f64],
    slack: f64,
    cfg: &SelectConfig,
    timing: bool,
    csv_path: &Path,
) -> CliResult<()> {
    let jobs: Vec<(f64, &Spectrum)> = eps_list
        .iter()
        .flat_map(|&e| spectra.iter().map(move |(_, s)| (e, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(eps, spec)| {
            let t = Instant::now();
            let run = synth_one(spec, eps, slack, cfg)?;
            let r = &run.report;
            Ok(SweepRow {
                epsilon: eps,
                m: run.grid.m(),
                n: run.grid.n(),
                card_j: r.card_j,
                density: r.density,
                a_exact: r.a_exact,
                b_exact: r.b_exact,
                a_norm: r.a_normalized,
                b_norm: r.b_normalized,
                wall_ms: if timing { t.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut w = csv::Writer::from_path(csv_path).map_err(|e| CliError::Output(e.to_string()))?;
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

fn cmd_pw_demo(a: PwDemoArgs) -> CliResult<()> {
    let cfg = select_config(&a.common)?;
    let start = Instant::now();
    let (file, spec) = load_spectrum(&a.spectrum)?;
    let run = synth_one(&spec, a.epsilon, 0.1, &cfg)?;
    let mut report = synth_report(&a.spectrum, file, &run, a.epsilon, 0.1, &a.common);
    report.command = "pw-demo".into();
    report.demo = Some(pw_demo(&run, a.l, a.common.seed)?);
    write_json(&a.out, &report)?;
    write_timing(&a.out, &a.common, start)
}

fn cmd_group_synth(a: GroupSynthArgs) -> CliResult<()> {
    let cfg = select_config(&a.common)?;
    let start = Instant::now();
    let file: GroupSpectrumFile = in_file(&a.spectrum)?;
    let spec = file.clone().into_spectrum()?;
    let (t, frame) = group_synthesize(&spec, a.epsilon, &cfg)?;
    let predicted = Ratio::new(frame.q as u64, frame.k as u64) * frame.measure;
    let brute_force = if a.verify {
        let (lo, hi) = brute_force_bounds(spec.group(), &spec.omega(), &t.elements(), spec.point_weight());
        Some(BruteForce {
            a: lo,
            b: hi,
            max_abs_diff: (lo - frame.a_exact).abs().max((hi - frame.b_exact).abs()),
        })
    } else {
        None
    };
    let report = GroupReport {
        tool: Tool::current(),
        command: "group-synth".into(),
        input: Input {
            path: a.spectrum.display().to_string(),
            content: file,
        },
        run: run_echo(a.epsilon, &a.common),
        group: GroupEcho {
            orders: spec.group().orders().to_vec(),
            lattice_divisors: spec.lattice().divisors().to_vec(),
            sampling_divisors: spec.sampling_subgroup().divisors().to_vec(),
            reference_divisors: spec.reference().divisors().to_vec(),
        },
        reps: t.reps().to_vec(),
        density_identity: DensityIdentity {
            density: frame.density,
            predicted,
            holds: frame.density == predicted,
        },
        frame,
        brute_force,
    };
    write_json(&a.out, &report)?;
    write_timing(&a.out, &a.common, start)
}

fn cmd_sparsify(a: SparsifyArgs) -> CliResult<()> {
    let start = Instant::now();
    let frame = FrameFamily::new(parse_matrix(&read(&a.matrix)?)?);
    let w = bss_sparsify(&frame, a.d, &Tolerances::default())?;
    let quantization = match a.quantize {
        Some(eps_quant) => {
            let cfg = select_config(&a.common)?;
            let q = quantize_weights(
                &w,
                &QuantizeConfig {
                    eps_quant,
                    trials: cfg.trials,
                    seed: cfg.seed,
                },
            )?;
            Some(QuantizationEcho {
                eps_quant,
                unit: q.unit,
                multiplicities: q.multiplicities,
                achieved_a: q.achieved_a,
                theoretical_scale: q.theoretical_scale,
                deviation: q.deviation,
            })
        }
        None => None,
    };
    let report = SparsifyReport {
        tool: Tool::current(),
        command: "sparsify".into(),
        input: a.matrix.display().to_string(),
        d: a.d,
        rows: frame.len(),
        dim: frame.dim(),
        steps: w.steps,
        support: w.support.clone(),
        weights: w.weights.clone(),
        bounds: w.bounds,
        targets: spectral_targets(a.d),
        quantization,
    };
    write_json(&a.out, &report)?;
    write_timing(&a.out, &a.common, start)
}

fn cmd_select(a: SelectArgs) -> CliResult<()> {
    let cfg = select_config(&a.common)?;
    let start = Instant::now();
    let m = parse_matrix(&read(&a.matrix)?)?;
    if a.oracle && m.rows() > ORACLE_MAX_ROWS {
        return Err(FrameError::Validation(format!(
            "--oracle is limited to {ORACLE_MAX_ROWS} rows, the matrix has {}",
            m.rows()
        ))
        .into());
    }
    let selection = submatrix_select(&m, a.epsilon, &cfg)?;
    let oracle = if a.oracle {
        let o = exhaustive_best_subset(&m, selection.budget)?;
        Some(OracleEcho {
            ratio: selection.bounds.0 / o.best_lower,
            indices: o.indices,
            best_lower: o.best_lower,
            subsets_checked: o.subsets_checked,
        })
    } else {
        None
    };
    let report = SelectReport {
        tool: Tool::current(),
        command: "select".into(),
        input: a.matrix.display().to_string(),
        run: run_echo(a.epsilon, &a.common),
        selection,
        oracle,
    };
    write_json(&a.out, &report)?;
    write_timing(&a.out, &a.common, start)
}

fn cmd_lift(a: LiftArgs) -> CliResult<()> {
    let start = Instant::now();
    let file: LiftFile = in_file(&a.input)?;
    let (g, k) = file.group()?;
    let result = lift_frame(&g, &k, &file.cells, &file.gammas)?;
    let scale = result.input_bounds.1.max(1.0);
    let report = LiftReport {
        tool: Tool::current(),
        command: "lift-check".into(),
        input: Input {
            path: a.input.display().to_string(),
            content: file,
        },
        bounds_equal: result.max_abs_diff <= 1e-10 * scale,
        result,
    };
    write_json(&a.out, &report)?;
    write_timing(&a.out, &a.common, start)
}

fn cmd_density(a: DensityArgs) -> CliResult<()> {
    let file: PointsFile = in_file(&a.points)?;
    let r_max = a.r.iter().copied().fold(0.0, f64::max);
    let (points, window, exact) = match (&file, file.sampling_set()?) {
        (_, Some(s)) => {
            let window = (0.0, 2.0 * r_max);
            (PointSet1D::new(s.points_in(window.0, window.1))?, window, Some(ratio_f64(s.density())))
        }
        (PointsFile::Points { points, window }, None) => {
            let set = PointSet1D::new(points.clone())?;
            let w = match window {
                Some([lo, hi]) => (*lo, *hi),
                None => match (set.points().first(), set.points().last()) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => return Err(FrameError::Validation("field `window`: required for an empty point set".into()).into()),
                },
            };
            (set, w, None)
        }
        (PointsFile::SamplingSet { .. }, None) => unreachable!("sampling sets always convert"),
    };
    let rows = a
        .r
        .par_iter()
        .map(|&r| {
            let (d_minus, d_plus) = beurling_bounds(&points, window, r)?;
            Ok(DensityRow {
                r,
                d_minus,
                d_plus,
                exact,
                points: points.len(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| CliError::Output(e.to_string()))?;
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}
