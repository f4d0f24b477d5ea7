//! Command-line front end for z-curve accelerated inpainting.

mod io;
mod report;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use zinpaint::dictionary::{persist, IndexConfig, MultiIndex};
use zinpaint::image::{MaskImage, RasterImage};
use zinpaint::inpaint::{
    acceleration_error, inpaint, inpaint_with_index, InpaintConfig, InpaintOutcome, SearchMode,
};
use zinpaint::zcurve::Norm;

use crate::report::{BuildReport, ConfigEcho, RunReport, StatsRow, SweepRow};

/// Fill the UNKNOWN (dark) pixels of a mask with patches copied from the
/// rest of the image.
#[derive(Debug, Parser)]
#[command(name = "inpaint", version, args_override_self = true)]
struct Args {
    /// Input image (PNG or PNM).
    #[arg(long)]
    image: PathBuf,
    /// Single-channel mask; values >= 128 are known, the rest is filled.
    #[arg(long)]
    mask: PathBuf,
    /// Completed image; required unless --sweep is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Patch side length K (odd).
    #[arg(long, default_value_t = 9)]
    patch_size: usize,
    /// Principal dimensions D per index.
    #[arg(long, default_value_t = 10)]
    dims: usize,
    /// Candidates k per query.
    #[arg(long, default_value_t = 80)]
    knn: usize,
    /// Recursion threshold.
    #[arg(long, default_value_t = 256)]
    mu: usize,
    /// Parallel threshold.
    #[arg(long, default_value_t = 2048)]
    nu: usize,
    /// Fraction of patch pixels per index.
    #[arg(long, default_value_t = 0.6)]
    coverage: f64,
    #[arg(long, default_value_t = Norm::L2)]
    norm: Norm,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also run the full scan every iteration and report acceleration error.
    #[arg(long)]
    oracle: bool,
    /// Skip the index and scan the whole dictionary every iteration.
    #[arg(long, conflicts_with_all = ["save_index", "load_index"])]
    brute_force: bool,
    /// Per-iteration records as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, conflicts_with = "load_index")]
    save_index: Option<PathBuf>,
    /// Index file built earlier from the same image and mask.
    #[arg(long)]
    load_index: Option<PathBuf>,
    /// AXIS=v1,v2,... with AXIS one of D, k, mu, nu, c, norm; CSV on stdout.
    #[arg(long, conflicts_with_all = ["save_index", "load_index"])]
    sweep: Option<String>,
    /// Run report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<zinpaint::Error>() {
            Some(zinpaint::Error::Config(_)) => 2,
            Some(zinpaint::Error::EmptyDictionary(_)) => 3,
            _ => 1,
        };
        Self { code, error }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        error: anyhow!(msg.into()),
    }
}

impl Args {
    fn config(&self) -> InpaintConfig {
        InpaintConfig {
            index: IndexConfig {
                patch_size: self.patch_size,
                coverage: self.coverage,
                dims: self.dims,
                knn: self.knn,
                mu: self.mu,
                nu: self.nu,
                norm: self.norm,
            },
            workers: self.workers,
            oracle: self.oracle,
            mode: if self.brute_force {
                SearchMode::BruteForce
            } else {
                SearchMode::Accelerated
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Dims,
    Knn,
    Mu,
    Nu,
    Coverage,
    Norm,
}

impl Axis {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "D" | "d" | "dims" => Axis::Dims,
            "k" | "knn" => Axis::Knn,
            "mu" => Axis::Mu,
            "nu" => Axis::Nu,
            "c" | "coverage" => Axis::Coverage,
            "norm" => Axis::Norm,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Axis::Dims => "D",
            Axis::Knn => "k",
            Axis::Mu => "mu",
            Axis::Nu => "nu",
            Axis::Coverage => "c",
            Axis::Norm => "norm",
        }
    }

    fn apply(self, cfg: &mut IndexConfig, value: &str) -> std::result::Result<(), String> {
        let bad = |_| format!("invalid {} value {value:?}", self.name());
        match self {
            Axis::Dims => cfg.dims = value.parse().map_err(bad)?,
            Axis::Knn => cfg.knn = value.parse().map_err(bad)?,
            Axis::Mu => cfg.mu = value.parse().map_err(bad)?,
            Axis::Nu => cfg.nu = value.parse().map_err(bad)?,
            Axis::Coverage => {
                cfg.coverage = value
                    .parse()
                    .map_err(|_| format!("invalid c value {value:?}"))?
            }
            Axis::Norm => cfg.norm = value.parse().map_err(|e: String| e)?,
        }
        Ok(())
    }
}

fn parse_sweep(text: &str) -> std::result::Result<(Axis, Vec<String>), String> {
    let (axis, values) = text
        .split_once('=')
        .ok_or_else(|| format!("sweep must look like AXIS=v1,v2,..., got {text:?}"))?;
    let axis = Axis::parse(axis.trim())
        .ok_or_else(|| format!("unknown sweep axis {axis:?}; use D, k, mu, nu, c or norm"))?;
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    Ok((axis, values))
}

fn load_inputs(args: &Args) -> Result<(RasterImage, MaskImage)> {
    let image = io::read_image(&args.image)?;
    let mask = io::read_mask(&args.mask)?;
    mask.matches(&image)?;
    Ok((image, mask))
}

fn seconds(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// One pipeline run, honoring --save-index / --load-index.
fn run_once(
    args: &Args,
    image: &RasterImage,
    mask: &MaskImage,
    cfg: &InpaintConfig,
) -> Result<(InpaintOutcome, InpaintConfig)> {
    if let Some(path) = &args.load_index {
        let file =
            File::open(path).with_context(|| format!("cannot open index {}", path.display()))?;
        let multi = persist::read_multi(&mut BufReader::new(file), &cfg.index)?;
        let effective = InpaintConfig {
            index: multi.config,
            ..*cfg
        };
        return Ok((inpaint_with_index(image, mask, &multi, cfg)?, effective));
    }
    if let Some(path) = &args.save_index {
        let started = Instant::now();
        let (multi, stats) = MultiIndex::build(image, mask, &cfg.index)?;
        let file = File::create(path)
            .with_context(|| format!("cannot create index {}", path.display()))?;
        let mut w = BufWriter::new(file);
        persist::write_multi(&mut w, &multi)?;
        w.flush()?;
        let built = started.elapsed().as_secs_f64();
        let mut out = inpaint_with_index(image, mask, &multi, cfg)?;
        out.seconds += built;
        out.build = Some(stats);
        return Ok((out, *cfg));
    }
    Ok((inpaint(image, mask, cfg)?, *cfg))
}

fn write_stats(path: &std::path::Path, out: &InpaintOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create stats {}", path.display()))?;
    for r in &out.records {
        w.serialize(StatsRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

fn build_report(args: &Args, cfg: &InpaintConfig, out: &InpaintOutcome) -> RunReport {
    let ae = acceleration_error(&out.records);
    RunReport {
        config: ConfigEcho::from(cfg),
        dictionary_size: out.dictionary_size,
        build: out.build.as_ref().map(|b| BuildReport {
            prepare_seconds: seconds(b.prepare_seconds),
            index_seconds: b
                .layouts
                .iter()
                .map(|t| seconds(t.fit_seconds + t.sort_seconds))
                .collect(),
            sort_seconds: seconds(b.sort_seconds()),
            total_seconds: seconds(b.total_seconds()),
        }),
        total_seconds: seconds(out.seconds),
        iterations: out.records.len(),
        mean_ae_percent: if cfg.oracle { ae.mean_percent } else { None },
        ae_iterations: if cfg.oracle {
            Some(ae.contributing)
        } else {
            None
        },
        ae_zero_oracle_excluded: if cfg.oracle {
            Some(ae.zero_oracle_excluded)
        } else {
            None
        },
        output: args.out.clone(),
        stats: args.stats.clone(),
        index: args.save_index.clone(),
        sweep: Vec::new(),
    }
}

fn write_report(path: &std::path::Path, report: &RunReport) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("cannot create report {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), report)?;
    Ok(())
}

fn run(args: &Args) -> std::result::Result<(), Failure> {
    let base = args.config();
    let sweep = match &args.sweep {
        Some(text) => Some(parse_sweep(text).map_err(config_error)?),
        None => None,
    };
    if sweep.is_none() && args.out.is_none() {
        return Err(config_error("--out is required unless --sweep is given"));
    }
    let (image, mask) = load_inputs(args)?;
    if args.load_index.is_none() {
        base.index.validate(image.channels())?;
    }

    let Some((axis, values)) = sweep else {
        let (out, cfg) = run_once(args, &image, &mask, &base)?;
        io::write_image(args.out.as_ref().expect("checked above"), &out.image)?;
        if let Some(path) = &args.stats {
            write_stats(path, &out)?;
        }
        let report = build_report(args, &cfg, &out);
        if let Some(path) = &args.report {
            write_report(path, &report)?;
        }
        eprintln!(
            "{} iterations over a dictionary of {} patches in {:.3}s",
            out.records.len(),
            out.dictionary_size,
            out.seconds
        );
        if let Some(ae) = report.mean_ae_percent {
            eprintln!("mean acceleration error {ae:.3}%");
        }
        return Ok(());
    };

    let mut configs = Vec::with_capacity(values.len());
    for v in &values {
        let mut cfg = base;
        axis.apply(&mut cfg.index, v).map_err(config_error)?;
        cfg.index.validate(image.channels())?;
        configs.push(cfg);
    }
    let stdout = std::io::stdout();
    let mut table = csv::Writer::from_writer(stdout.lock());
    let mut rows = Vec::new();
    let mut last = None;
    for (value, cfg) in values.iter().zip(&configs) {
        let (out, cfg) = run_once(args, &image, &mask, cfg)?;
        let ae = acceleration_error(&out.records);
        let row = SweepRow {
            axis: axis.name().to_string(),
            value: value.clone(),
            seconds: seconds(out.seconds),
            mean_ae_percent: if cfg.oracle { ae.mean_percent } else { None },
            iterations: out.records.len(),
            dictionary_size: out.dictionary_size,
        };
        table.serialize(&row)?;
        table.flush()?;
        rows.push(row);
        last = Some((out, cfg));
    }
    let (out, cfg) = last.expect("at least one sweep value");
    if let Some(path) = &args.out {
        io::write_image(path, &out.image)?;
    }
    if let Some(path) = &args.stats {
        write_stats(path, &out)?;
    }
    if let Some(path) = &args.report {
        let mut report = build_report(args, &cfg, &out);
        report.sweep = rows;
        write_report(path, &report)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
