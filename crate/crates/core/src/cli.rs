//! The `ditherlab` command line: `demod`, `train` and `compare`.
//!
//! Values resolve as flag, then `--config` file key, then built-in default.
//! Exit status is 0 on success, 1 for usage errors and 2 for data or I/O
//! failures.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checkpoint;
use crate::config::FlatConfig;
use crate::error::{Error, Result};
use crate::mnist::{self, NormMode, StatsSource};
use crate::nn::{Activation, INIT_STD};
use crate::regularize::{RegimeKind, Workers, DEFAULT_DROPOUT, DEFAULT_HALF_WIDTH, DEFAULT_REPLICAS};
use crate::report::{self, svg, LinePlot, RunManifest, Series};
use crate::signal::{self, AmSignal, DemodConfig, PeakCriteria};
use crate::trainer::{self, RegimeKnobs, TrainConfig, DEFAULT_EPOCHS, DEFAULT_LR, DEFAULT_SUBSET};

pub const MNIST_DIR_ENV: &str = "DITHERLAB_MNIST_DIR";
const DEFAULT_MNIST_DIR: &str = "data/mnist";

#[derive(Debug, Parser)]
#[command(name = "ditherlab", version, about = "ReLU demodulation and parallel-dither experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rectify an AM tone with plain and parallel-dithered ReLU and compare spectra.
    Demod(DemodArgs),
    /// Train one regime on the MNIST subset and record the test-error curve.
    Train(TrainArgs),
    /// Train all four regimes from shared starting weights.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for replica and test-set evaluation; never changes results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DemodArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub carrier_hz: Option<f64>,
    #[arg(long)]
    pub mod_hz: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub duration_s: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub dither_half_width: Option<f64>,
    /// DC offset of the modulator; 0 gives a plain product of sines.
    #[arg(long)]
    pub mod_offset: Option<f64>,
    #[arg(long)]
    pub segment: Option<usize>,
    #[arg(long)]
    pub overlap: Option<f64>,
    #[arg(long)]
    pub peak_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub mnist_dir: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub subset: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub dither_half_width: Option<f64>,
    /// relu or biased-sigmoid
    #[arg(long)]
    pub activation: Option<String>,
    /// Pre-activation bias of the biased sigmoid (required with it).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shuffle: Option<bool>,
    /// Seed of the starting weights; defaults to --seed.
    #[arg(long)]
    pub init_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long)]
    pub regime: Option<String>,
    /// Write a parameter checkpoint after every epoch.
    #[arg(long)]
    pub checkpoints: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub net: NetArgs,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::RateOutOfRange(_)
        | Error::NyquistViolation { .. }
        | Error::SegmentTooLong { .. }
        | Error::SignalBinMissing { .. } => 1,
        _ => 2,
    }
}

fn base_config(common: &CommonArgs) -> Result<FlatConfig> {
    let mut cfg = match &common.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    cfg.set_opt("seed", common.seed);
    cfg.set_opt("out-dir", common.out_dir.as_ref().map(|p| p.display().to_string()));
    cfg.set_opt("workers", common.workers);
    Ok(cfg)
}

fn out_dir(cfg: &FlatConfig, command: &str) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.raw("out-dir").unwrap_or(&format!("out/{command}")).to_string());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn workers(cfg: &FlatConfig) -> Result<Workers> {
    Workers::new(cfg.get_or("workers", 1)?)
}

pub fn resolve_demod(args: &DemodArgs) -> Result<(DemodConfig, FlatConfig)> {
    let mut cfg = base_config(&args.common)?;
    cfg.set_opt("carrier-hz", args.carrier_hz);
    cfg.set_opt("mod-hz", args.mod_hz);
    cfg.set_opt("sample-rate", args.sample_rate);
    cfg.set_opt("duration-s", args.duration_s);
    cfg.set_opt("replicas", args.replicas);
    cfg.set_opt("dither-half-width", args.dither_half_width);
    cfg.set_opt("mod-offset", args.mod_offset);
    cfg.set_opt("segment", args.segment);
    cfg.set_opt("overlap", args.overlap);
    cfg.set_opt("peak-threshold-db", args.peak_threshold_db);

    let d = DemodConfig::default();
    let s = d.signal;
    let resolved = DemodConfig {
        signal: AmSignal {
            carrier_hz: cfg.get_or("carrier-hz", s.carrier_hz)?,
            mod_hz: cfg.get_or("mod-hz", s.mod_hz)?,
            sample_rate: cfg.get_or("sample-rate", s.sample_rate)?,
            duration_s: cfg.get_or("duration-s", s.duration_s)?,
            modulator_offset: cfg.get_or("mod-offset", s.modulator_offset)?,
        },
        replicas: cfg.get_or("replicas", d.replicas)?,
        half_width: cfg.get_or("dither-half-width", d.half_width)?,
        seed: cfg.get_or("seed", d.seed)?,
        segment: cfg.get_or("segment", d.segment)?,
        overlap: cfg.get_or("overlap", d.overlap)?,
        criteria: PeakCriteria {
            threshold_db: cfg.get_or("peak-threshold-db", d.criteria.threshold_db)?,
            tolerance_hz: cfg.get_or("peak-tolerance-hz", d.criteria.tolerance_hz)?,
        },
    };
    if resolved.replicas == 0 {
        return Err(usage("--replicas must be at least 1"));
    }
    if !(resolved.half_width >= 0.0 && resolved.half_width.is_finite()) {
        return Err(usage("--dither-half-width must be finite and >= 0"));
    }

    let mut snap = FlatConfig::default();
    snap.set("seed", resolved.seed);
    snap.set("carrier-hz", resolved.signal.carrier_hz);
    snap.set("mod-hz", resolved.signal.mod_hz);
    snap.set("sample-rate", resolved.signal.sample_rate);
    snap.set("duration-s", resolved.signal.duration_s);
    snap.set("mod-offset", resolved.signal.modulator_offset);
    snap.set("replicas", resolved.replicas);
    snap.set("dither-half-width", resolved.half_width);
    snap.set("segment", resolved.segment);
    snap.set("overlap", resolved.overlap);
    snap.set("peak-threshold-db", resolved.criteria.threshold_db);
    snap.set("peak-tolerance-hz", resolved.criteria.tolerance_hz);
    if let Some(o) = cfg.raw("out-dir") {
        snap.set("out-dir", o);
    }
    if let Some(w) = cfg.raw("workers") {
        snap.set("workers", w);
    }
    Ok((resolved, snap))
}

fn spectrum_series(label: &str, s: &signal::Spectrum) -> Series {
    Series {
        label: label.to_string(),
        points: s.freqs.iter().copied().zip(s.power_db()).skip(1).collect(),
    }
}

pub fn cmd_demod(args: &DemodArgs) -> Result<()> {
    let (dc, snap) = resolve_demod(args)?;
    let dir = out_dir(&snap, "demod")?;
    let mut manifest = RunManifest::new("demod", snap.to_text(), vec![dc.seed]);
    let result = manifest.time("demodulate", || signal::run_demod(&dc))?;

    let conf = dir.join("run.conf");
    report::write_text(&conf, &snap.to_text())?;
    let plain_csv = dir.join("spectrum_plain.csv");
    report::write_spectrum_csv(&plain_csv, &result.plain)?;
    let dith_csv = dir.join("spectrum_dithered.csv");
    report::write_spectrum_csv(&dith_csv, &result.dithered)?;

    let report_txt = dir.join("distortion_report.txt");
    let mut text = report::distortion_text("plain relu", &result.plain_report);
    text += "\n";
    text += &report::distortion_text(&format!("{}x parallel dither", dc.replicas), &result.dithered_report);
    text += &format!("\ndistortion reduction = {:.3} dB\n", result.distortion_reduction_db());
    report::write_text(&report_txt, &text)?;
    let report_csv = dir.join("distortion_report.csv");
    let mut rows = report::distortion_rows("plain", &result.plain_report);
    rows.extend(report::distortion_rows("dithered", &result.dithered_report));
    report::write_csv(&report_csv, &["spectrum", "kind", "freq_hz", "power_db"], &rows)?;

    let plot = dir.join("demod.svg");
    let panel = |title: &str, s: &signal::Spectrum| LinePlot {
        title: title.to_string(),
        x_label: "frequency (Hz)".into(),
        y_label: "PSD (dB)".into(),
        x_log: true,
        series: vec![spectrum_series(title, s)],
    };
    let svg = svg::render(
        &[
            panel("a: ReLU", &result.plain),
            panel(&format!("b: ReLU, {}x parallel dither", dc.replicas), &result.dithered),
        ],
        900.0,
        360.0,
    );
    report::write_text(&plot, &svg)?;

    for p in [&conf, &plain_csv, &dith_csv, &report_txt, &report_csv, &plot] {
        manifest.artifact(p);
    }
    manifest.write(&dir.join("manifest.json"))?;
    print!("{text}");
    Ok(())
}

pub struct NetSetup {
    pub base: TrainConfig,
    pub knobs: RegimeKnobs,
    pub mnist_dir: PathBuf,
    pub snapshot: FlatConfig,
}

pub fn resolve_net(net: &NetArgs, regime: Option<&str>) -> Result<NetSetup> {
    let mut cfg = base_config(&net.common)?;
    cfg.set_opt("mnist-dir", net.mnist_dir.as_ref().map(|p| p.display().to_string()));
    cfg.set_opt("lr", net.lr);
    cfg.set_opt("epochs", net.epochs);
    cfg.set_opt("subset", net.subset);
    cfg.set_opt("replicas", net.replicas);
    cfg.set_opt("dropout", net.dropout);
    cfg.set_opt("dither-half-width", net.dither_half_width);
    cfg.set_opt("activation", net.activation.as_deref());
    cfg.set_opt("beta", net.beta);
    cfg.set_opt("shuffle", net.shuffle);
    cfg.set_opt("init-seed", net.init_seed);
    cfg.set_opt("regime", regime);

    let mnist_dir = cfg
        .raw("mnist-dir")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(MNIST_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_MNIST_DIR));
    let seed: u64 = cfg.get_or("seed", 1)?;
    let activation = match cfg.raw("activation").unwrap_or("relu") {
        "relu" => Activation::Relu,
        "biased-sigmoid" | "biased_sigmoid" => Activation::BiasedSigmoid {
            beta: cfg
                .get::<f64>("beta")?
                .ok_or_else(|| usage("--activation biased-sigmoid needs an explicit --beta"))?,
        },
        other => return Err(usage(format!("unknown activation `{other}` (relu | biased-sigmoid)"))),
    };
    let knobs = RegimeKnobs {
        replicas: cfg.get_or("replicas", DEFAULT_REPLICAS)?,
        half_width: cfg.get_or("dither-half-width", DEFAULT_HALF_WIDTH)?,
        dropout_rate: cfg.get_or("dropout", DEFAULT_DROPOUT)?,
    };
    let kind = match cfg.raw("regime") {
        Some(r) => RegimeKind::parse(r).ok_or_else(|| {
            usage(format!(
                "unknown regime `{r}` (baseline | dropout | parallel_dither | parallel_dither_dropout)"
            ))
        })?,
        None => RegimeKind::Baseline,
    };
    let base = TrainConfig {
        regime: knobs.regime(kind),
        activation,
        lr: cfg.get_or("lr", DEFAULT_LR)?,
        epochs: cfg.get_or("epochs", DEFAULT_EPOCHS)?,
        train_subset: cfg.get_or("subset", DEFAULT_SUBSET)?,
        init_seed: cfg.get_or("init-seed", seed)?,
        run_seed: seed,
        shuffle: cfg.get_or("shuffle", true)?,
        init_std: cfg.get_or("init-std", INIT_STD)?,
    };
    base.validate()?;
    for k in RegimeKind::ALL {
        TrainConfig { regime: knobs.regime(k), ..base }.validate()?;
    }

    let mut snap = FlatConfig::default();
    snap.set("seed", base.run_seed);
    snap.set("init-seed", base.init_seed);
    snap.set("mnist-dir", mnist_dir.display());
    snap.set("lr", base.lr);
    snap.set("epochs", base.epochs);
    snap.set("subset", base.train_subset);
    snap.set("replicas", knobs.replicas);
    snap.set("dropout", knobs.dropout_rate);
    snap.set("dither-half-width", knobs.half_width);
    snap.set("shuffle", base.shuffle);
    snap.set("init-std", base.init_std);
    match activation {
        Activation::Relu => snap.set("activation", "relu"),
        Activation::BiasedSigmoid { beta } => {
            snap.set("activation", "biased-sigmoid");
            snap.set("beta", beta);
        }
    }
    if regime.is_some() || cfg.raw("regime").is_some() {
        snap.set("regime", kind.label());
    }
    if let Some(o) = cfg.raw("out-dir") {
        snap.set("out-dir", o);
    }
    if let Some(w) = cfg.raw("workers") {
        snap.set("workers", w);
    }
    Ok(NetSetup {
        base,
        knobs,
        mnist_dir,
        snapshot: snap,
    })
}

fn load_data(setup: &NetSetup) -> Result<mnist::MnistSplit> {
    mnist::load_split(&setup.mnist_dir, setup.base.train_subset, NormMode::Global, StatsSource::Subset)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let regime = args.regime.as_deref().unwrap_or("baseline");
    let setup = resolve_net(&args.net, Some(regime))?;
    let mut cfg_for_workers = setup.snapshot.clone();
    cfg_for_workers.set_opt("workers", args.net.common.workers);
    let pool = workers(&cfg_for_workers)?;
    let dir = out_dir(&setup.snapshot, "train")?;
    let mut manifest = RunManifest::new(
        "train",
        setup.snapshot.to_text(),
        vec![setup.base.init_seed, setup.base.run_seed],
    );
    let data = manifest.time("load", || load_data(&setup))?;
    let ckpt_dir = dir.join("checkpoints");
    if args.checkpoints {
        fs::create_dir_all(&ckpt_dir).map_err(|e| Error::io(&ckpt_dir, e))?;
    }
    let mut ckpts = Vec::new();
    let label = setup.base.regime.kind.label();
    let curve = manifest.time("train", || {
        trainer::run_regime_observed(&setup.base, &data.train, &data.test, &pool, |epoch, params, err| {
            if !args.net.common.quiet {
                eprintln!("{label} epoch {epoch:>3}/{} test error {:.4}", setup.base.epochs, err);
            }
            if args.checkpoints {
                let p = ckpt_dir.join(format!("epoch_{epoch:03}.bin"));
                checkpoint::save(params, &p)?;
                ckpts.push(p);
            }
            Ok(())
        })
    })?;
    let conf = dir.join("run.conf");
    report::write_text(&conf, &setup.snapshot.to_text())?;
    let csv = dir.join("curve.csv");
    report::write_curve_csv(&csv, &curve)?;
    manifest.artifact(&conf);
    manifest.artifact(&csv);
    for p in &ckpts {
        manifest.artifact(p);
    }
    manifest.write(&dir.join("manifest.json"))?;
    println!(
        "{label}: test error {:.4} -> {:.4} after {} epochs ({} replicas)",
        curve.errors[0],
        curve.final_error(),
        setup.base.epochs,
        setup.base.regime.replicas()
    );
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let setup = resolve_net(&args.net, None)?;
    let pool = workers(&{
        let mut c = setup.snapshot.clone();
        c.set_opt("workers", args.net.common.workers);
        c
    })?;
    let dir = out_dir(&setup.snapshot, "compare")?;
    let mut manifest = RunManifest::new(
        "compare",
        setup.snapshot.to_text(),
        vec![setup.base.init_seed, setup.base.run_seed],
    );
    let data = manifest.time("load", || load_data(&setup))?;
    let epochs = setup.base.epochs;
    let quiet = args.net.common.quiet;
    let curves = manifest.time("train", || {
        trainer::run_comparison_observed(&setup.base, &setup.knobs, &data.train, &data.test, &pool, |k, e, err| {
            if !quiet {
                eprintln!("{:<24} epoch {e:>3}/{epochs} test error {err:.4}", k.label());
            }
        })
    })?;
    write_comparison_artifacts(&dir, &curves, &setup.snapshot, &mut manifest)?;
    manifest.write(&dir.join("manifest.json"))?;
    print!("{}", report::summary_table(&report::summarize(&curves)));
    Ok(())
}

fn write_comparison_artifacts(
    dir: &Path,
    curves: &[trainer::ErrorCurve],
    snap: &FlatConfig,
    manifest: &mut RunManifest,
) -> Result<()> {
    let conf = dir.join("run.conf");
    report::write_text(&conf, &snap.to_text())?;
    let csv = dir.join("compare.csv");
    report::write_comparison_csv(&csv, curves)?;
    let summary = report::summarize(curves);
    let summary_csv = dir.join("summary.csv");
    report::write_summary_csv(&summary_csv, &summary)?;
    let summary_txt = dir.join("summary.txt");
    report::write_text(&summary_txt, &report::summary_table(&summary))?;
    let plot = dir.join("compare.svg");
    let series = curves
        .iter()
        .map(|c| Series {
            label: c.label.clone(),
            points: c
                .errors
                .iter()
                .enumerate()
                .skip(1)
                .map(|(e, v)| (e as f64, 100.0 * v))
                .collect(),
        })
        .collect();
    let svg = svg::render(
        &[LinePlot {
            title: "Test error vs. full-sweep SGD iterations".into(),
            x_label: "iteration".into(),
            y_label: "test error (%)".into(),
            x_log: false,
            series,
        }],
        900.0,
        480.0,
    );
    report::write_text(&plot, &svg)?;
    for p in [&conf, &csv, &summary_csv, &summary_txt, &plot] {
        manifest.artifact(p);
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Demod(a) => cmd_demod(a),
        Command::Train(a) => cmd_train(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
