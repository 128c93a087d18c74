//! The `wfm` command line.

mod plot;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::data::{
    image_to_pointcloud, load_dataset, make_moons_gaussians, make_shapes, make_sphere_gaussians,
    make_spiral_gaussians, read_pgm, save_dataset, split, Dataset, GaussianDataset, PointCloudDataset, ShapeFamily,
};
use crate::error::{Error, Result};
use crate::flow::{
    train, BwGeneration, BwMethod, FlowModel, Geometry, PcGeneration, Preset, SourceSpec, TrainConfig,
};
use crate::metrics::{
    label_accuracy_1nn, min_bw_to_dataset, one_nn_accuracy, write_report, EmdConfig, Metric, MetricRecord, Samples,
};
use crate::nn::{Checkpoint, ModelParams, OptimizerState};

pub use plot::{render_svg, PlotLayer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "wfm", version, about = "Wasserstein flow matching on Gaussians and point clouds")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Create, import or split datasets.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Train a flow and write a run directory.
    Train(TrainArgs),
    /// Sample from a trained flow.
    Generate(GenerateArgs),
    /// Score generated samples against a reference set.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct SeedArg {
    #[arg(long, env = "WFM_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum DatasetCmd {
    /// Gaussians along a spiral.
    MakeSpiral(SynthArgs),
    /// Gaussians on two interleaved half circles, labelled by moon.
    MakeMoons(SynthArgs),
    /// Gaussians on the unit sphere in 3D.
    MakeSphere(SynthArgs),
    /// Point clouds sampled on ring, cross or box outlines.
    MakeShapes(ShapesArgs),
    /// One point cloud from the lit pixels of a plain PGM image.
    FromImage(ImageArgs),
    /// Seeded train/test split, stratified by label.
    Split(SplitArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ShapesArgs {
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',', default_value = "ring,cross")]
    pub families: Vec<String>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 50)]
    pub min_points: usize,
    #[arg(long, default_value_t = 100)]
    pub max_points: usize,
    #[arg(long, default_value_t = 0.02)]
    pub jitter: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub label: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeoArg {
    Bw,
    Pc,
}

impl From<GeoArg> for Geometry {
    fn from(g: GeoArg) -> Self {
        match g {
            GeoArg::Bw => Geometry::Bw,
            GeoArg::Pc => Geometry::Pc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Frobenius,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Desk,
    Paper,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Geometry; inferred from the dataset when omitted.
    #[arg(long)]
    pub geo: Option<GeoArg>,
    #[arg(long)]
    pub data: PathBuf,
    /// JSON file with any subset of the training options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<PresetArg>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, env = "WFM_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Train one of the Euclidean baselines instead of the Riemannian flow.
    #[arg(long)]
    pub baseline: Option<BaselineArg>,
    /// Condition on dataset labels.
    #[arg(long)]
    pub conditional: bool,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub count: usize,
    /// Integration steps; the model's default when omitted.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fail unless the checkpoint has this geometry.
    #[arg(long)]
    pub geo: Option<GeoArg>,
    /// Condition every sample on this label.
    #[arg(long)]
    pub cond: Option<usize>,
    /// Points per generated cloud.
    #[arg(long)]
    pub points: Option<usize>,
    /// Also write every intermediate state here (JSON lines).
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub generated: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Comma-separated: min-w2, bw-1nn, cd-1nn, emd-1nn, label-acc.
    /// Defaults to min-w2,bw-1nn for Gaussians and cd-1nn for clouds.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Scatter plot of both sets (first two coordinates).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// The plotted coordinates as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_numerical() => EXIT_NUMERICAL,
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) | Error::Checkpoint(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Dataset(c) => cmd_dataset(c),
        Command::Train(a) => cmd_train(a).map(|_| ()),
        Command::Generate(a) => cmd_generate(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

pub fn cmd_dataset(cmd: DatasetCmd) -> Result<()> {
    let (ds, out) = match cmd {
        DatasetCmd::MakeSpiral(a) => (
            Dataset::Gaussians(make_spiral_gaussians(a.count, a.noise, a.seed.seed)?),
            a.out,
        ),
        DatasetCmd::MakeMoons(a) => (
            Dataset::Gaussians(make_moons_gaussians(a.count, a.noise, a.seed.seed)?),
            a.out,
        ),
        DatasetCmd::MakeSphere(a) => (
            Dataset::Gaussians(make_sphere_gaussians(a.count, a.noise, a.seed.seed)?),
            a.out,
        ),
        DatasetCmd::MakeShapes(a) => {
            let fams = a
                .families
                .iter()
                .map(|f| ShapeFamily::parse(f.trim()))
                .collect::<Result<Vec<_>>>()?;
            let ds = make_shapes(&fams, a.count, (a.min_points, a.max_points), a.jitter, a.seed.seed)?;
            (Dataset::PointClouds(ds), a.out)
        }
        DatasetCmd::FromImage(a) => {
            let grid = read_pgm(&a.image)?;
            let cloud = image_to_pointcloud(&grid, a.threshold)?;
            let meta = json!({
                "generator": "from-image",
                "image": a.image.display().to_string(),
                "threshold": a.threshold,
            });
            let ds = PointCloudDataset::new(vec![cloud], a.label.map(|l| vec![l]), meta)?;
            (Dataset::PointClouds(ds), a.out)
        }
        DatasetCmd::Split(a) => {
            let ds = load_dataset(&a.data)?;
            let (tr, te) = split(&ds, a.test_fraction, a.seed.seed)?;
            save_dataset(&a.train_out, &tr)?;
            save_dataset(&a.test_out, &te)?;
            log::info!("split {} items into {} train / {} test", ds.len(), tr.len(), te.len());
            return Ok(());
        }
    };
    save_dataset(&out, &ds)?;
    log::info!("wrote {} {} items to {}", ds.len(), ds.kind(), out.display());
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Defaults for the preset, overlaid with the config file, overlaid with
/// flags.
pub fn resolve_train_config(args: &TrainArgs, data: &Dataset) -> Result<TrainConfig> {
    let file = match &args.config {
        Some(p) => read_json(p)?,
        None => json!({}),
    };
    let file = file
        .as_object()
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("config file must hold a JSON object".into()))?;
    let from_file = |key: &str| -> Result<Option<Value>> { Ok(file.get(key).cloned()) };

    let geometry = match (args.geo, from_file("geometry")?) {
        (Some(g), _) => g.into(),
        (None, Some(v)) => serde_json::from_value(v)?,
        (None, None) => match data {
            Dataset::Gaussians(_) => Geometry::Bw,
            Dataset::PointClouds(_) => Geometry::Pc,
        },
    };
    let preset = match (args.preset, from_file("preset")?) {
        (Some(PresetArg::Paper), _) => Preset::Paper,
        (Some(PresetArg::Desk), _) => Preset::Desk,
        (None, Some(v)) => serde_json::from_value(v)?,
        (None, None) => Preset::Desk,
    };
    let base = match preset {
        Preset::Desk => TrainConfig::desk(geometry),
        Preset::Paper => TrainConfig::paper(geometry),
    };
    let mut merged = serde_json::to_value(&base)?;
    for (k, v) in file {
        merged[k.as_str()] = v;
    }
    merged["geometry"] = serde_json::to_value(geometry)?;
    let mut cfg: TrainConfig =
        serde_json::from_value(merged).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;

    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = args.lr {
        cfg.lr = lr;
    }
    if let Some(b) = args.baseline {
        if geometry != Geometry::Bw {
            return Err(Error::InvalidArgument("baselines exist only for Gaussian flows".into()));
        }
        cfg.bw_method = match b {
            BaselineArg::Frobenius => BwMethod::Frobenius,
            BaselineArg::Euclidean => BwMethod::EuclideanBw,
        };
    }
    if args.conditional {
        cfg.conditional = true;
    }
    if let Some(k) = args.checkpoint_every {
        cfg.checkpoint_every = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Trains and fills the run directory; returns the final model.
pub fn cmd_train(args: TrainArgs) -> Result<FlowModel> {
    let data = load_dataset(&args.data)?;
    let cfg = resolve_train_config(&args, &data)?;
    let out = &args.out;
    let ckpt_dir = out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| Error::io(&ckpt_dir, e))?;
    write_text(&out.join("config.json"), &serde_json::to_string_pretty(&cfg)?)?;

    // the source is fitted inside training; intermediate checkpoints refit
    // it, which is deterministic
    let source = match &data {
        Dataset::Gaussians(d) => SourceSpec::Bw(crate::flow::fit_source_bw(&d.items, cfg.wishart_dof)?),
        Dataset::PointClouds(d) => SourceSpec::Pc(crate::flow::fit_source_pc(&d.items, cfg.point_count)?),
    };
    let vocab = if cfg.conditional {
        data.labels().and_then(|l| l.iter().max()).map_or(0, |m| m + 1)
    } else {
        0
    };
    let mut hook = |step: usize, models: &[ModelParams], _: &OptimizerState| -> Result<()> {
        let m = FlowModel::from_parts(&cfg, source.clone(), models.to_vec(), vocab, step);
        m.save(ckpt_dir.join(format!("step-{step:07}.ckpt")))
    };
    let outcome = train(&cfg, &data, &mut hook)?;

    let csv_path = out.join("loss.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?);
    let io = |e| Error::io(&csv_path, e);
    writeln!(csv, "step,loss,lr").map_err(io)?;
    for r in &outcome.trace {
        writeln!(csv, "{},{:e},{:e}", r.step, r.loss, r.lr).map_err(io)?;
    }
    csv.flush().map_err(io)?;

    let model = FlowModel::from_outcome(&cfg, &outcome);
    let tail = outcome.trace.len().div_ceil(10);
    let final_loss = (tail > 0).then(|| {
        outcome.trace[outcome.trace.len() - tail..].iter().map(|r| r.loss).sum::<f64>() / tail as f64
    });
    let summary = json!({
        "data": args.data.display().to_string(),
        "steps_completed": outcome.steps_completed,
        "final_loss_mean": final_loss,
        "rounding_pairs": outcome.stats.rounding_pairs,
        "entropic_pairs": outcome.stats.entropic_pairs,
        "self_check_max_rel_error": outcome.stats.self_check_max_rel_error,
        "aborted": outcome.abort.as_ref().map(|e| e.to_string()),
    });
    write_text(&out.join("metrics.json"), &serde_json::to_string_pretty(&summary)?)?;

    if let Some(e) = outcome.abort {
        let path = ckpt_dir.join("last-good.ckpt");
        model.save(&path)?;
        log::error!("last good parameters saved to {}", path.display());
        return Err(e);
    }
    model.save(out.join("final.ckpt"))?;
    log::info!("run written to {}", out.display());
    Ok(model)
}

fn gaussian_json(g: &crate::bw::Gaussian) -> Value {
    json!({ "mean": g.mean, "cov_lower": g.cov.as_sym().to_lower() })
}

fn write_trajectory_bw(path: &Path, gen: &BwGeneration) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (i, traj) in gen.trajectories.iter().flatten().enumerate() {
        for (k, g) in traj.iter().enumerate() {
            let mut v = gaussian_json(g);
            v["sample"] = json!(i);
            v["step"] = json!(k);
            writeln!(f, "{v}").map_err(|e| Error::io(path, e))?;
        }
    }
    f.flush().map_err(|e| Error::io(path, e))
}

fn write_trajectory_pc(path: &Path, gen: &[PcGeneration]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (i, g) in gen.iter().enumerate() {
        for (k, x) in g.trajectory.iter().flatten().enumerate() {
            let pts: Vec<&[f64]> = (0..x.rows()).map(|r| x.row(r)).collect();
            let v = json!({ "sample": i, "step": k, "points": pts });
            writeln!(f, "{v}").map_err(|e| Error::io(path, e))?;
        }
    }
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let model = FlowModel::from_checkpoint(Checkpoint::load(&args.checkpoint)?)?;
    if let Some(g) = args.geo {
        let want: Geometry = g.into();
        if want != model.geometry() {
            return Err(Error::InvalidArgument(format!(
                "checkpoint holds a `{}` flow, not `{}`",
                model.geometry().name(),
                want.name()
            )));
        }
    }
    let labels: Vec<usize> = args.cond.map(|c| vec![c; args.count]).unwrap_or_default();
    let record = args.trajectory.is_some();
    let n_steps = args.steps.unwrap_or_else(|| model.config.generation_steps());
    let seed = args.seed.seed;
    let meta = json!({
        "generator": "wfm generate",
        "checkpoint": args.checkpoint.display().to_string(),
        "count": args.count,
        "steps": n_steps,
        "seed": seed,
        "cond": args.cond,
    });
    let out_labels = args.cond.map(|c| vec![c; args.count]);
    let ds = match model.geometry() {
        Geometry::Bw => {
            let SourceSpec::Bw(src) = &model.source else { unreachable!("checked on load") };
            let gen = model.generate_gaussians(args.count, n_steps, &labels, seed, record)?;
            if gen.stats.halvings > 0 {
                log::warn!("{} step halvings during generation", gen.stats.halvings);
            }
            if gen.stats.projections > 0 {
                log::warn!("{} covariances projected back to the PSD cone", gen.stats.projections);
            }
            if let Some(p) = &args.trajectory {
                write_trajectory_bw(p, &gen)?;
            }
            let meta = with_stats(meta, json!({ "halvings": gen.stats.halvings, "projections": gen.stats.projections }));
            Dataset::Gaussians(GaussianDataset::with_dim(src.mean_mean.len(), gen.samples, out_labels, meta)?)
        }
        Geometry::Pc => {
            let SourceSpec::Pc(src) = &model.source else { unreachable!("checked on load") };
            let gen = model.generate_clouds(args.count, n_steps, &labels, args.points, seed, record)?;
            if let Some(p) = &args.trajectory {
                write_trajectory_pc(p, &gen)?;
            }
            let items = gen.into_iter().map(|g| g.sample).collect();
            Dataset::PointClouds(PointCloudDataset::with_dim(src.factor_mean.rows(), items, out_labels, meta)?)
        }
    };
    save_dataset(&args.out, &ds)?;
    log::info!("wrote {} samples to {}", ds.len(), args.out.display());
    Ok(())
}

fn with_stats(mut meta: Value, stats: Value) -> Value {
    meta["stats"] = stats;
    meta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EvalMetric {
    MinW2,
    OneNn(Metric),
    LabelAcc,
}

fn parse_eval_metric(s: &str) -> Result<EvalMetric> {
    match s.trim() {
        "min-w2" => Ok(EvalMetric::MinW2),
        "bw-1nn" => Ok(EvalMetric::OneNn(Metric::Bw)),
        "cd-1nn" => Ok(EvalMetric::OneNn(Metric::Chamfer)),
        "emd-1nn" => Ok(EvalMetric::OneNn(Metric::Emd)),
        "label-acc" => Ok(EvalMetric::LabelAcc),
        other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
    }
}

fn samples(d: &Dataset) -> Samples<'_> {
    match d {
        Dataset::Gaussians(g) => Samples::Gaussians(&g.items),
        Dataset::PointClouds(c) => Samples::Clouds(&c.items),
    }
}

/// Runs the requested metrics on two datasets of the same kind.
pub fn evaluate(generated: &Dataset, reference: &Dataset, names: &[String], seed: u64) -> Result<Vec<MetricRecord>> {
    if generated.kind() != reference.kind() {
        return Err(Error::InvalidArgument(format!(
            "cannot compare {} samples with a {} reference",
            generated.kind(),
            reference.kind()
        )));
    }
    let names: Vec<String> = if names.is_empty() {
        match generated {
            Dataset::Gaussians(_) => vec!["min-w2".into(), "bw-1nn".into()],
            Dataset::PointClouds(_) => vec!["cd-1nn".into()],
        }
    } else {
        names.to_vec()
    };
    let emd = EmdConfig::default();
    let mut out = Vec::new();
    for name in &names {
        let m = parse_eval_metric(name)?;
        let (value, config) = match m {
            EvalMetric::MinW2 => match (generated, reference) {
                (Dataset::Gaussians(g), Dataset::Gaussians(r)) => (min_bw_to_dataset(&g.items, &r.items)?, json!({})),
                _ => return Err(Error::InvalidArgument("min-w2 needs Gaussian datasets".into())),
            },
            EvalMetric::OneNn(metric) => {
                let v = one_nn_accuracy(samples(generated), samples(reference), metric, &emd)?;
                let cfg = if metric == Metric::Emd { serde_json::to_value(emd)? } else { json!({}) };
                (v, cfg)
            }
            EvalMetric::LabelAcc => {
                let metric = match generated {
                    Dataset::Gaussians(_) => Metric::Bw,
                    Dataset::PointClouds(_) => Metric::Chamfer,
                };
                let (Some(gl), Some(rl)) = (generated.labels(), reference.labels()) else {
                    return Err(Error::InvalidArgument("label-acc needs labels on both datasets".into()));
                };
                let v = label_accuracy_1nn(samples(generated), gl, samples(reference), rl, metric, &emd)?;
                (v, json!({ "metric": metric.name() }))
            }
        };
        let mut config = config;
        config["generated"] = json!(generated.len());
        config["reference"] = json!(reference.len());
        out.push(MetricRecord {
            metric: name.trim().to_string(),
            value,
            config,
            seed: Some(seed),
        });
    }
    Ok(out)
}

fn layers_for(generated: &Dataset, reference: &Dataset) -> Vec<PlotLayer> {
    let mk = |d: &Dataset, name: &str, color: &str| {
        let mut layer = PlotLayer::new(name, color);
        match d {
            Dataset::Gaussians(g) => {
                for item in &g.items {
                    let c = item.cov.as_matrix();
                    let cov2 = if item.dim() >= 2 {
                        Some([c[(0, 0)], c[(0, 1)], c[(1, 1)]])
                    } else {
                        None
                    };
                    layer.push(coord(&item.mean, 0), coord(&item.mean, 1), cov2);
                }
            }
            Dataset::PointClouds(cs) => {
                for cloud in &cs.items {
                    for r in 0..cloud.len() {
                        let p = cloud.points().row(r);
                        layer.push(coord(p, 0), coord(p, 1), None);
                    }
                }
            }
        }
        layer
    };
    vec![mk(reference, "reference", "#999999"), mk(generated, "generated", "#1f5fbf")]
}

fn coord(v: &[f64], i: usize) -> f64 {
    v.get(i).copied().unwrap_or(0.0)
}

pub fn cmd_eval(args: EvalArgs) -> Result<()> {
    let generated = load_dataset(&args.generated)?;
    let reference = load_dataset(&args.reference)?;
    let records = evaluate(&generated, &reference, &args.metrics, args.seed.seed)?;
    for r in &records {
        println!("{}\t{:.6e}", r.metric, r.value);
    }
    write_report(&args.out, &records)?;
    if args.plot.is_some() || args.csv.is_some() {
        let layers = layers_for(&generated, &reference);
        if let Some(p) = &args.plot {
            write_text(p, &render_svg(&layers, 640.0))?;
        }
        if let Some(p) = &args.csv {
            let mut s = String::from("set,x,y\n");
            for l in &layers {
                for (x, y, _) in &l.points {
                    s.push_str(&format!("{},{x},{y}\n", l.name));
                }
            }
            write_text(p, &s)?;
        }
    }
    Ok(())
}
