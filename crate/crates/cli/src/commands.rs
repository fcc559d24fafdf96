use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use symcanon::{
    adi, map, map_prime, pnp_solve_detailed, quotient_rotation_dist, region_of, Corners2D,
    ModelPoints, RegionIndex, RigidMotion, Rotation, SymmetryGroup, SymmetrySpec,
};
use symcanon_harness::{datasets, train, HarnessConfig, HarnessReport, Mode, Scene};

use crate::io::{emit, inline_or_file, parse_json, read_file, to_json, write_atomic, CliError, Result};

/// Exit code of `demo` when the runs finish but the expected ordering fails.
const ORDERING_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "symcanon", version, about = "Pose canonicalization for symmetric objects")]
pub struct Cli {
    /// Run config (JSON); the built-in default when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Replace the config's symmetry spec (JSON or @file).
    #[arg(long, global = true, value_name = "JSON")]
    symmetry: Option<String>,
    /// Replace the config's seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output file (single-record commands) or directory (demo).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical representative of a rotation.
    Canonicalize {
        /// Row-major 3x3 array or {"axis":[..],"angle_rad":..}; @file to read it.
        #[arg(long)]
        rotation: String,
        #[arg(long, value_enum, default_value_t = Variant::Map)]
        variant: Variant,
    },
    /// Region of the anchor partition containing a rotation.
    Partition {
        #[arg(long)]
        rotation: String,
    },
    /// Whether two rotations are equivalent under the symmetry group.
    Equiv {
        #[arg(long)]
        rotation: String,
        #[arg(long)]
        other: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Train the requested modes and compare their final rotation errors.
    Demo {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Replace the config's epoch count.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Per-record and aggregate pose errors of estimates against ground truth.
    Eval {
        /// JSON array of poses {"rotation":..,"translation":[..]}.
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        /// Model points for ADI (JSON array or XYZ text); defaults to the
        /// config's motif orbits.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Pose from 8 observed box corners, using the config's camera and box.
    Pnp {
        /// 8x2 JSON array of pixel coordinates; @file to read it.
        #[arg(long)]
        corners: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Variant {
    Map,
    MapPrime,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    Raw,
    MapOnly,
    MapPrime,
    All,
}

struct Context {
    cfg: HarnessConfig,
    out: Option<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => {
                let text = read_file(p)?;
                let cfg: HarnessConfig = parse_json(&text, &p.display().to_string())?;
                cfg
            }
            None => HarnessConfig::default(),
        };
        if let Some(s) = &cli.symmetry {
            cfg.symmetry = parse_json::<SymmetrySpec>(&inline_or_file(s)?, "--symmetry")?;
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        Ok(Context {
            cfg,
            out: cli.out.clone(),
        })
    }

    fn group(&self) -> Result<SymmetryGroup> {
        Ok(SymmetryGroup::realize(&self.cfg.symmetry)?)
    }

    fn emit<T: Serialize>(&self, v: &T) -> Result<()> {
        emit(self.out.as_deref(), &to_json(v))
    }
}

fn rotation_arg(arg: &str, flag: &str) -> Result<Rotation> {
    parse_json(&inline_or_file(arg)?, flag)
}

pub fn execute(cli: Cli) -> Result<ExitCode> {
    let ctx = Context::new(&cli)?;
    match cli.command {
        Command::Canonicalize { rotation, variant } => {
            canonicalize(&ctx, &rotation_arg(&rotation, "--rotation")?, variant)?
        }
        Command::Partition { rotation } => partition(&ctx, &rotation_arg(&rotation, "--rotation")?)?,
        Command::Equiv {
            rotation,
            other,
            tol,
        } => equiv(
            &ctx,
            &rotation_arg(&rotation, "--rotation")?,
            &rotation_arg(&other, "--other")?,
            tol,
        )?,
        Command::Demo { mode, epochs } => return demo(ctx, mode, epochs),
        Command::Eval {
            estimates,
            ground_truth,
            model,
        } => eval(&ctx, &estimates, &ground_truth, model.as_deref())?,
        Command::Pnp { corners } => pnp(&ctx, &corners)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CanonicalRecord {
    symmetry: &'static str,
    variant: &'static str,
    canonical: Rotation,
    s_hat: Rotation,
    delta: Option<RegionIndex>,
    degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn canonicalize(ctx: &Context, r: &Rotation, variant: Variant) -> Result<()> {
    let g = ctx.group()?;
    let (c, name, note) = match variant {
        Variant::Map => (map(&g, r), "map", None),
        Variant::MapPrime => {
            let note = g.sqrt_group().is_err().then_some(
                "continuous symmetry: the map result is returned, no region partition is needed",
            );
            (map_prime(&g, r)?, "map_prime", note)
        }
    };
    ctx.emit(&CanonicalRecord {
        symmetry: g.kind_name(),
        variant: name,
        canonical: c.canonical,
        s_hat: c.s_hat,
        delta: c.delta,
        degenerate: c.degenerate,
        note,
    })
}

#[derive(Serialize)]
struct PartitionRecord {
    symmetry: &'static str,
    index: usize,
    anchor: Rotation,
    delta: RegionIndex,
}

fn partition(ctx: &Context, r: &Rotation) -> Result<()> {
    let g = ctx.group()?;
    let region = region_of(&g, r)?;
    ctx.emit(&PartitionRecord {
        symmetry: g.kind_name(),
        index: region.index,
        anchor: region.anchor,
        delta: region.delta,
    })
}

#[derive(Serialize)]
struct EquivRecord {
    equivalent: bool,
    quotient_rotation_dist: f64,
    tol: f64,
}

fn equiv(ctx: &Context, a: &Rotation, b: &Rotation, tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Input(format!("--tol must be a non-negative number, got {tol}")));
    }
    let g = ctx.group()?;
    ctx.emit(&EquivRecord {
        equivalent: g.equivalent(a, b, tol),
        quotient_rotation_dist: quotient_rotation_dist(&g, a, b),
        tol,
    })
}

#[derive(Serialize)]
struct ModeResult {
    mode: Mode,
    final_rot_err_mean: f64,
    final_rot_err_median: f64,
    final_val_rms_px: f64,
    final_loss: f64,
}

#[derive(Serialize)]
struct DemoSummary {
    symmetry: &'static str,
    seed: u64,
    epochs: usize,
    modes: Vec<ModeResult>,
    verdict: String,
    ordering_holds: bool,
    /// Continuous groups only: max |difference| between the map_only and
    /// map_prime curves.
    #[serde(skip_serializing_if = "Option::is_none")]
    curve_gap: Option<f64>,
}

/// Modes sorted by final error, joined by `<` (or `=` for equal errors).
fn verdict(results: &[ModeResult]) -> String {
    let mut sorted: Vec<&ModeResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.final_rot_err_mean.total_cmp(&b.final_rot_err_mean));
    let mut s = String::new();
    for (i, r) in sorted.iter().enumerate() {
        if i > 0 {
            let same = r.final_rot_err_mean == sorted[i - 1].final_rot_err_mean;
            s.push_str(if same { " = " } else { " < " });
        }
        s.push_str(r.mode.name());
    }
    s
}

/// map_prime below map_only below raw, restricted to the modes present.
/// With a continuous group map_prime must equal map_only instead.
fn ordering_holds(results: &[ModeResult], continuous: bool) -> bool {
    let err = |m: Mode| results.iter().find(|r| r.mode == m).map(|r| r.final_rot_err_mean);
    let chain: Vec<(Mode, f64)> = [Mode::MapPrime, Mode::MapOnly, Mode::Raw]
        .into_iter()
        .filter_map(|m| err(m).map(|e| (m, e)))
        .collect();
    chain.windows(2).all(|w| {
        if continuous && w[0].0 == Mode::MapPrime && w[1].0 == Mode::MapOnly {
            w[0].1 == w[1].1
        } else {
            w[0].1 < w[1].1
        }
    })
}

fn curve_gap(a: &HarnessReport, b: &HarnessReport) -> f64 {
    a.epochs
        .iter()
        .zip(&b.epochs)
        .flat_map(|(x, y)| {
            [
                (x.loss - y.loss).abs(),
                (x.val_rms_px - y.val_rms_px).abs(),
            ]
        })
        .fold(0.0, f64::max)
}

fn demo(mut ctx: Context, mode: Option<ModeArg>, epochs: Option<usize>) -> Result<ExitCode> {
    if let Some(e) = epochs {
        ctx.cfg.train.epochs = e;
    }
    let modes = match mode {
        None => ctx.cfg.modes.clone(),
        Some(ModeArg::All) => Mode::ALL.to_vec(),
        Some(ModeArg::Raw) => vec![Mode::Raw],
        Some(ModeArg::MapOnly) => vec![Mode::MapOnly],
        Some(ModeArg::MapPrime) => vec![Mode::MapPrime],
    };
    let out = ctx
        .out
        .clone()
        .ok_or_else(|| CliError::Input("demo needs --out DIR".into()))?;
    let cfg = &ctx.cfg;
    let scene = Scene::new(cfg)?;
    let (tr, val) = datasets(&scene, cfg)?;

    let runs: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = modes
            .iter()
            .map(|&m| {
                let (scene, tr, val) = (&scene, &tr, &val);
                s.spawn(move || train(scene, cfg, m, tr, val))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    let mut reports = Vec::new();
    for (run, &m) in runs.into_iter().zip(&modes) {
        let (trained, report) = run?;
        write_atomic(&out.join(format!("{}_curve.csv", m.name())), &report.to_csv())?;
        write_atomic(&out.join(format!("{}_report.json", m.name())), &to_json(&report))?;
        write_atomic(
            &out.join(format!("{}_weights.json", m.name())),
            &to_json(&trained.to_file(cfg)),
        )?;
        reports.push(report);
    }

    let results: Vec<ModeResult> = reports
        .iter()
        .map(|r| ModeResult {
            mode: r.mode,
            final_rot_err_mean: r.summary.val_rot_err_mean,
            final_rot_err_median: r.summary.val_rot_err_median,
            final_val_rms_px: r.summary.val_rms_px,
            final_loss: r.epochs.last().map_or(f64::NAN, |e| e.loss),
        })
        .collect();
    let continuous = !scene.group.is_discrete();
    let find = |m: Mode| reports.iter().find(|r| r.mode == m);
    let gap = match (continuous, find(Mode::MapOnly), find(Mode::MapPrime)) {
        (true, Some(a), Some(b)) => Some(curve_gap(a, b)),
        _ => None,
    };
    let holds = ordering_holds(&results, continuous) && gap.is_none_or(|g| g <= 1e-12);
    let summary = DemoSummary {
        symmetry: scene.group.kind_name(),
        seed: cfg.seed,
        epochs: cfg.train.epochs,
        verdict: verdict(&results),
        modes: results,
        ordering_holds: holds,
        curve_gap: gap,
    };
    let text = to_json(&summary);
    write_atomic(&out.join("summary.json"), &text)?;
    print!("{text}");
    Ok(if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(ORDERING_FAILED)
    })
}

#[derive(Serialize)]
struct EvalRecord {
    index: usize,
    quotient_rotation_dist: f64,
    adi: Option<f64>,
}

#[derive(Serialize)]
struct EvalAggregate {
    count: usize,
    mean_quotient_rotation_dist: f64,
    median_quotient_rotation_dist: f64,
    max_quotient_rotation_dist: f64,
    mean_adi: Option<f64>,
}

#[derive(Serialize)]
struct EvalOutput {
    symmetry: &'static str,
    records: Vec<EvalRecord>,
    aggregate: EvalAggregate,
}

fn load_poses(path: &Path) -> Result<Vec<RigidMotion>> {
    parse_json(&read_file(path)?, &path.display().to_string())
}

fn eval(ctx: &Context, est_path: &Path, gt_path: &Path, model: Option<&Path>) -> Result<()> {
    let g = ctx.group()?;
    let est = load_poses(est_path)?;
    let gt = load_poses(gt_path)?;
    if est.len() != gt.len() {
        return Err(CliError::Input(format!(
            "{} has {} records but {} has {}",
            est_path.display(),
            est.len(),
            gt_path.display(),
            gt.len()
        )));
    }
    if est.is_empty() {
        return Err(CliError::Input("no records to evaluate".into()));
    }
    let model = match model {
        Some(p) => Some(ModelPoints::load(p)?),
        // motif orbits are closed under the group; too few points means no ADI
        None => ModelPoints::new(Scene::new(&ctx.cfg)?.orbits().iter().flatten().copied().collect()).ok(),
    };
    let records: Vec<EvalRecord> = est
        .iter()
        .zip(&gt)
        .enumerate()
        .map(|(index, (e, t))| EvalRecord {
            index,
            quotient_rotation_dist: quotient_rotation_dist(&g, &e.r, &t.r),
            adi: model.as_ref().map(|m| adi(m, e, t)),
        })
        .collect();
    let d: Vec<f64> = records.iter().map(|r| r.quotient_rotation_dist).collect();
    let n = d.len() as f64;
    let aggregate = EvalAggregate {
        count: d.len(),
        mean_quotient_rotation_dist: d.iter().sum::<f64>() / n,
        median_quotient_rotation_dist: symcanon_harness::train::median(&d).unwrap_or(0.0),
        max_quotient_rotation_dist: d.iter().copied().fold(0.0, f64::max),
        mean_adi: model
            .as_ref()
            .map(|_| records.iter().filter_map(|r| r.adi).sum::<f64>() / n),
    };
    ctx.emit(&EvalOutput {
        symmetry: g.kind_name(),
        records,
        aggregate,
    })
}

#[derive(Serialize)]
struct PnpOutput {
    pose: RigidMotion,
    initial_residual: f64,
    final_residual: f64,
    iterations: usize,
}

fn pnp(ctx: &Context, corners: &str) -> Result<()> {
    ctx.cfg.camera.validate()?;
    ctx.cfg.bbox.validate()?;
    let obs: Corners2D = parse_json(&inline_or_file(corners)?, "--corners")?;
    let sol = pnp_solve_detailed(&ctx.cfg.camera, &ctx.cfg.bbox, &obs)?;
    ctx.emit(&PnpOutput {
        pose: sol.pose,
        initial_residual: sol.initial_residual,
        final_residual: sol.final_residual,
        iterations: sol.iterations,
    })
}
