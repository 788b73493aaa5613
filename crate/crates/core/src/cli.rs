//! The `matrec` command line.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::augment::AugmentConfig;
use crate::backbone::{self, Backbone, BackboneHandle, ToyBackbone, TOY_NAME};
use crate::bench::{self, MonotonicClock, DEFAULT_WARMUP};
use crate::canonical;
use crate::dataset::{
    attach_outliers, make_splits, published_counts, scan_dataset, verify_counts, ClassCatalog,
    DatasetManifest, Fractions, Partition, SplitManifest, DEFAULT_OUTLIER_LIMIT,
};
use crate::eval::{self, emit_report, published_accuracy, Illumination, ALL_FORMATS};
use crate::fixtures;
use crate::head::{save_checkpoint, train, Checkpoint, HeadSpec, TrainConfig};
use crate::inference::{Classifier, TtaConfig};
use crate::raster;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackboneConfig {
    /// Family name; "toy" selects the built-in extractor.
    pub name: String,
    pub graph: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub toy_seed: u64,
    pub toy_channels: usize,
}

impl Default for BackboneConfig {
    fn default() -> Self {
        BackboneConfig {
            name: TOY_NAME.to_string(),
            graph: None,
            manifest: None,
            toy_seed: 0,
            toy_channels: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub seed: Option<u64>,
    pub fractions: Fractions,
    pub outlier_dir: Option<PathBuf>,
    pub outlier_limit: Option<usize>,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            seed: None,
            fractions: Fractions::default(),
            outlier_dir: None,
            outlier_limit: Some(DEFAULT_OUTLIER_LIMIT),
        }
    }
}

/// One file describing a run; every subcommand reads it and archives the
/// effective version next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub catalog: Option<PathBuf>,
    pub dataset_root: Option<PathBuf>,
    pub split: SplitSettings,
    pub augment: AugmentConfig,
    pub backbone: BackboneConfig,
    /// "auto", "two-block", "single-dense" or a canonical head name.
    pub head: String,
    /// `None` picks defaults for the head.
    pub train: Option<TrainConfig>,
    pub tta: TtaConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: 1,
            catalog: None,
            dataset_root: None,
            split: SplitSettings::default(),
            augment: AugmentConfig::default(),
            backbone: BackboneConfig::default(),
            head: "auto".to_string(),
            train: None,
            tta: TtaConfig::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> crate::Result<Self> {
        canonical::read_json(path)
    }

    pub fn to_canonical_json(&self) -> crate::Result<String> {
        canonical::to_canonical_json(self)
    }
}

#[derive(Debug, Parser)]
#[command(name = "matrec", version, about = "Construction-material image recognition")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a class-per-directory dataset into a manifest.
    Ingest(IngestArgs),
    /// Stratified train/val/test split of a manifest.
    Split(SplitArgs),
    /// Train a head on frozen backbone features.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test partition.
    Eval(EvalArgs),
    /// Predict one image.
    Predict(PredictArgs),
    /// Time single-image prediction.
    Bench(BenchArgs),
    /// Write the toy extractor as an ONNX graph plus manifest.
    ExportToy(ExportToyArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Class catalog; defaults to ROOT/catalog.json, then the published classes.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Compare per-class counts with the published ones.
    #[arg(long)]
    pub verify_published: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub outlier_dir: Option<PathBuf>,
    #[arg(long)]
    pub outlier_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BackboneArgs {
    /// ONNX graph of the frozen trunk.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Manifest for the graph; defaults to NAME.manifest.json beside it.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub splits: PathBuf,
    #[arg(long)]
    pub backbone: Option<String>,
    #[command(flatten)]
    pub graph: BackboneArgs,
    #[arg(long)]
    pub head: Option<String>,
    /// Train on clean resized images.
    #[arg(long)]
    pub no_augment: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub splits: PathBuf,
    #[command(flatten)]
    pub graph: BackboneArgs,
    #[arg(long)]
    pub tta: bool,
    /// Apply one seeded illumination transform per test image.
    #[arg(long)]
    pub illum_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub graph: BackboneArgs,
    #[arg(long)]
    pub tta: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub graph: BackboneArgs,
    #[arg(long, default_value_t = 30)]
    pub runs: usize,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    pub warmup: usize,
    #[arg(long)]
    pub tta: bool,
}

#[derive(Debug, Args)]
pub struct ExportToyArgs {
    #[arg(long, default_value_t = 16)]
    pub channels: usize,
    #[arg(long)]
    pub toy_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// Three texture classes.
    Textures,
    /// Flat images with the published per-class counts.
    Replica,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Textures)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 40)]
    pub per_class: usize,
    /// Also write this many outlier images to OUT/outliers.
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
}

struct Ctx {
    config: RunConfig,
    out: Option<PathBuf>,
}

impl Ctx {
    fn out_or(&self, default: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| self.config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(default))
    }

    fn archive_config(&self, dir: &Path, name: &str) -> anyhow::Result<()> {
        canonical::write_canonical_json(&dir.join(name), &self.config)?;
        Ok(())
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "run".into());
    parent_dir(path).join(format!("{stem}.{suffix}"))
}

fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

fn cmd_ingest(ctx: &mut Ctx, args: &IngestArgs) -> anyhow::Result<()> {
    let root = args
        .root
        .clone()
        .or_else(|| ctx.config.dataset_root.clone())
        .ok_or_else(|| anyhow!("ingest needs --root or dataset_root in the config"))?;
    let catalog_path = args.catalog.clone().or_else(|| ctx.config.catalog.clone()).or_else(|| {
        let p = root.join(fixtures::CATALOG_FILE);
        p.is_file().then_some(p)
    });
    let catalog = match &catalog_path {
        Some(p) => ClassCatalog::load(p)?,
        None => ClassCatalog::published(false),
    };
    ctx.config.dataset_root = Some(root.clone());
    ctx.config.catalog = catalog_path;
    let manifest = scan_dataset(&root, &catalog)?;
    let out = ctx.out_or("dataset.manifest.json");
    manifest.save(&out)?;
    ctx.archive_config(&parent_dir(&out), "ingest.run-config.json")?;
    println!(
        "{} images in {} classes, {} skipped -> {}",
        manifest.total(),
        catalog.material_count(),
        manifest.skipped.len(),
        out.display()
    );
    if args.verify_published {
        let report = verify_counts(&manifest, &published_counts());
        println!("{}", canonical::to_canonical_json(&report)?.trim_end());
        if !report.pass {
            bail!(
                "counts differ from the published ones ({} found, {} expected)",
                report.found_total,
                report.expected_total
            );
        }
    }
    Ok(())
}

fn cmd_split(ctx: &mut Ctx, args: &SplitArgs) -> anyhow::Result<()> {
    require_file(&args.manifest, "manifest")?;
    let manifest = DatasetManifest::load(&args.manifest)?;
    let seed = ctx.config.split.seed.unwrap_or(ctx.config.seed);
    let mut splits = make_splits(&manifest, ctx.config.split.fractions, seed)?;
    if let Some(dir) = &args.outlier_dir {
        ctx.config.split.outlier_dir = Some(dir.clone());
    }
    if let Some(limit) = args.outlier_limit {
        ctx.config.split.outlier_limit = Some(limit);
    }
    if let Some(dir) = &ctx.config.split.outlier_dir {
        let catalog = if splits.catalog.has_outlier() {
            splits.catalog.clone()
        } else {
            ClassCatalog::new(splits.catalog.materials().to_vec(), Some(crate::dataset::DEFAULT_OUTLIER_NAME.into()))?
        };
        splits.catalog = catalog;
        splits = attach_outliers(&splits, dir, ctx.config.split.outlier_limit)?;
    }
    splits.check_invariants()?;
    let out = ctx.out_or("splits.json");
    splits.save(&out)?;
    ctx.archive_config(&parent_dir(&out), "split.run-config.json")?;
    println!(
        "train {} / val {} / test {} (outliers {}) -> {}",
        splits.train.len(),
        splits.val.len(),
        splits.test.len(),
        splits.outlier_records.len(),
        out.display()
    );
    Ok(())
}

/// Backbone named by the config and flags, for training.
fn open_training_backbone(cfg: &BackboneConfig) -> anyhow::Result<BackboneHandle> {
    if let Some(graph) = &cfg.graph {
        require_file(graph, "graph")?;
        let handle = backbone::open_backbone(Some(graph), cfg.manifest.as_deref(), None)?;
        if handle.spec().name != cfg.name {
            bail!(
                "graph manifest names backbone {:?} but {:?} was requested",
                handle.spec().name,
                cfg.name
            );
        }
        return Ok(handle);
    }
    if cfg.name != TOY_NAME {
        bail!("backbone {:?} needs --graph", cfg.name);
    }
    Ok(backbone::toy_backbone(cfg.toy_seed, cfg.toy_channels)?)
}

/// Backbone for a checkpoint: the given graph, or the stored toy spec.
fn open_checkpoint_backbone(ckpt: &Checkpoint, args: &BackboneArgs) -> anyhow::Result<BackboneHandle> {
    match &args.graph {
        Some(graph) => {
            require_file(graph, "graph")?;
            let handle = backbone::open_backbone(Some(graph), args.manifest.as_deref(), None)?;
            let s = handle.spec();
            if s.name != ckpt.backbone.name || s.output_shape != ckpt.backbone.output_shape {
                bail!(
                    "graph is {} {:?} but the checkpoint was trained on {} {:?}",
                    s.name,
                    s.output_shape,
                    ckpt.backbone.name,
                    ckpt.backbone.output_shape
                );
            }
            Ok(handle)
        }
        None if ckpt.backbone.toy_seed.is_some() => Ok(std::sync::Arc::new(ToyBackbone::from_spec(&ckpt.backbone)?)),
        None => bail!("checkpoint uses backbone {:?}; pass --graph", ckpt.backbone.name),
    }
}

fn head_for(style: &str, backbone: &dyn Backbone, classes: usize) -> anyhow::Result<HeadSpec> {
    let flat = backbone.spec().flatten_size();
    let name = &backbone.spec().name;
    let style = match style {
        "auto" if name == "vgg16" => "two-block",
        "auto" => "single-dense",
        s => s,
    };
    let canonical = HeadSpec::canonical(style).ok();
    match canonical {
        Some(h) if h.flatten_in == flat && h.out_classes == classes => Ok(h),
        _ => Ok(HeadSpec::for_features(style, flat, classes)?),
    }
}

fn cmd_train(ctx: &mut Ctx, args: &TrainArgs) -> anyhow::Result<()> {
    require_file(&args.splits, "splits file")?;
    let splits = SplitManifest::load(&args.splits)?;
    if let Some(name) = &args.backbone {
        ctx.config.backbone.name = name.clone();
    }
    if let Some(g) = &args.graph.graph {
        ctx.config.backbone.graph = Some(g.clone());
    }
    if let Some(m) = &args.graph.manifest {
        ctx.config.backbone.manifest = Some(m.clone());
    }
    if let Some(h) = &args.head {
        ctx.config.head = h.clone();
    }
    let backbone = open_training_backbone(&ctx.config.backbone)?;
    let head = head_for(&ctx.config.head, backbone.as_ref(), splits.catalog.total_classes())?;
    let mut tcfg = ctx.config.train.clone().unwrap_or_else(|| TrainConfig::for_head(&head));
    tcfg.seed = ctx.config.seed;
    tcfg.workers = ctx.config.workers;
    if args.no_augment {
        tcfg.augment = false;
    }
    ctx.config.train = Some(tcfg.clone());

    let outcome = train(&head, backbone.as_ref(), &splits, &ctx.config.augment, &tcfg)?;
    let out = ctx.out_or("head.ckpt");
    let history_path = sibling(&out, "history.json");
    canonical::write_canonical_json(&history_path, &outcome.history)?;
    if let crate::head::StopReason::Diverged { epoch } = outcome.history.stop {
        bail!("training diverged at epoch {epoch}; history in {}", history_path.display());
    }
    let digest = save_checkpoint(&outcome.params, &head, backbone.spec(), &splits.catalog, &out)?;
    canonical::write_canonical_json(&sibling(&out, "run-config.json"), &ctx.config)?;
    let best = outcome.history.best();
    println!(
        "best epoch {} (val acc {:.4}), {} epochs run -> {} ({digest})",
        outcome.history.best_epoch,
        best.map_or(0.0, |b| b.val_acc),
        outcome.history.epochs.len(),
        out.display()
    );
    Ok(())
}

fn load_ckpt(path: &Path) -> anyhow::Result<(Checkpoint, String)> {
    require_file(path, "checkpoint")?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let ckpt = Checkpoint::from_bytes(&bytes)?;
    Ok((ckpt, canonical::sha256_hex(&bytes)))
}

fn cmd_eval(ctx: &mut Ctx, args: &EvalArgs) -> anyhow::Result<()> {
    let (ckpt, digest) = load_ckpt(&args.ckpt)?;
    require_file(&args.splits, "splits file")?;
    let splits = SplitManifest::load(&args.splits)?;
    ckpt.check_catalog(&splits.catalog)?;
    let backbone = open_checkpoint_backbone(&ckpt, &args.graph)?;
    let classifier = Classifier::new(backbone.as_ref(), &ckpt.head, &ckpt.params, &ckpt.catalog)?;
    let tta = TtaConfig {
        enabled: args.tta || ctx.config.tta.enabled,
        ..ctx.config.tta
    };
    ctx.config.tta = tta;
    let test = splits.labeled(Partition::Test)?;
    let report = match args.illum_seed {
        Some(seed) => eval::illumination_eval(
            &test,
            &classifier,
            &tta,
            &ctx.config.augment,
            Illumination::Seeded(seed),
            &digest,
        )?,
        None => eval::evaluate(&test, &classifier, &tta, &digest)?,
    };
    report.check_accounting(Some(&eval::class_counts(&test, ckpt.catalog.material_count())))
        .or_else(|e| if report.skipped.is_empty() { Err(e) } else { Ok(()) })?;
    let dir = ctx.out_or("eval");
    emit_report(&report, &dir, &ALL_FORMATS)?;
    ctx.archive_config(&dir, "run-config.json")?;
    let mut line = format!(
        "accuracy {:.4}% ({}/{}), tta {}, illumination {}",
        report.accuracy,
        report.correct,
        report.total,
        if tta.enabled { "on" } else { "off" },
        args.illum_seed.map_or("off".to_string(), |s| format!("seed {s}"))
    );
    if let Some(p) = published_accuracy(&ckpt.backbone.name) {
        line.push_str(&format!(
            "; published {:.4}%",
            p.lookup(tta.enabled, args.illum_seed.is_some())
        ));
    }
    println!("{line} -> {}", dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct PredictOutput<'a> {
    probs: &'a [f64],
    predicted_index: usize,
    label: &'a str,
    tta_used: bool,
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(p) => canonical::write_canonical_json(p, value)?,
        None => print!("{}", canonical::to_canonical_json(value)?),
    }
    Ok(())
}

fn cmd_predict(ctx: &mut Ctx, args: &PredictArgs) -> anyhow::Result<()> {
    let (ckpt, _) = load_ckpt(&args.ckpt)?;
    require_file(&args.image, "image")?;
    let backbone = open_checkpoint_backbone(&ckpt, &args.graph)?;
    let classifier = Classifier::new(backbone.as_ref(), &ckpt.head, &ckpt.params, &ckpt.catalog)?;
    let tta = TtaConfig {
        enabled: args.tta || ctx.config.tta.enabled,
        ..ctx.config.tta
    };
    let img = raster::load_rgb(&args.image)?;
    let p = classifier.predict(&img, &tta)?;
    let label = ckpt.catalog.name(p.predicted_index).unwrap_or("?");
    emit_json(
        ctx.out.as_deref(),
        &PredictOutput {
            probs: &p.probs,
            predicted_index: p.predicted_index,
            label,
            tta_used: p.tta_used,
        },
    )
}

fn cmd_bench(ctx: &mut Ctx, args: &BenchArgs) -> anyhow::Result<()> {
    let (ckpt, _) = load_ckpt(&args.ckpt)?;
    require_file(&args.image, "image")?;
    let backbone = open_checkpoint_backbone(&ckpt, &args.graph)?;
    let classifier = Classifier::new(backbone.as_ref(), &ckpt.head, &ckpt.params, &ckpt.catalog)?;
    let bytes = std::fs::read(&args.image).with_context(|| format!("reading {}", args.image.display()))?;
    let tta = TtaConfig::with_enabled(args.tta);
    let stats = bench::time_single_image(&classifier, &bytes, args.runs, args.warmup, &tta, &mut MonotonicClock::default())?;
    emit_json(ctx.out.as_deref(), &stats)
}

fn cmd_export_toy(ctx: &mut Ctx, args: &ExportToyArgs) -> anyhow::Result<()> {
    let seed = args.toy_seed.unwrap_or(ctx.config.backbone.toy_seed);
    let toy = ToyBackbone::new(seed, args.channels)?;
    let dir = ctx.out_or("toy-export");
    let (graph, manifest) = backbone::export_toy(&toy, &dir)?;
    println!("{} {}", graph.display(), manifest.display());
    Ok(())
}

fn cmd_synth(ctx: &mut Ctx, args: &SynthArgs) -> anyhow::Result<()> {
    let dir = ctx.out_or("synthetic");
    match args.kind {
        SynthKind::Textures => {
            fixtures::write_texture_dataset(&dir, args.per_class, ctx.config.seed, false)?;
        }
        SynthKind::Replica => {
            fixtures::write_replica_dataset(&dir, &crate::dataset::PUBLISHED_COUNTS, crate::dataset::MIN_SIDE)?;
        }
    }
    if args.outliers > 0 {
        fixtures::write_outlier_images(&dir.join("outliers"), args.outliers, ctx.config.seed)?;
    }
    println!("{}", dir.display());
    Ok(())
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("MATREC_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn dispatch(cli: Cli) -> Result<(), (i32, String)> {
    let domain = |e: anyhow::Error| (EXIT_DOMAIN, format!("{e:#}"));
    if matches!(cli.command, Command::Train(_)) && cli.config.is_none() {
        return Err((EXIT_USAGE, "the train command requires --config <FILE>".into()));
    }
    let mut config = match &cli.config {
        Some(p) => {
            if !p.is_file() {
                return Err((EXIT_DOMAIN, format!("config file {} does not exist", p.display())));
            }
            RunConfig::load(p).map_err(|e| domain(e.into()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err((EXIT_USAGE, "--workers must be at least 1".into()));
        }
        config.workers = w;
    }
    let workers = config.workers.max(1);
    let mut ctx = Ctx { config, out: cli.out };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| (EXIT_DOMAIN, e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Ingest(a) => cmd_ingest(&mut ctx, a),
        Command::Split(a) => cmd_split(&mut ctx, a),
        Command::Train(a) => cmd_train(&mut ctx, a),
        Command::Eval(a) => cmd_eval(&mut ctx, a),
        Command::Predict(a) => cmd_predict(&mut ctx, a),
        Command::Bench(a) => cmd_bench(&mut ctx, a),
        Command::ExportToy(a) => cmd_export_toy(&mut ctx, a),
        Command::Synth(a) => cmd_synth(&mut ctx, a),
    })
    .map_err(domain)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
