use std::path::PathBuf;

use serde::Serialize;
use zinpaint::inpaint::{InpaintConfig, IterationRecord, SearchMode};

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub patch_size: usize,
    pub coverage: f64,
    pub dims: usize,
    pub knn: usize,
    pub mu: usize,
    pub nu: usize,
    pub norm: String,
    pub workers: usize,
    pub oracle: bool,
    pub brute_force: bool,
}

impl From<&InpaintConfig> for ConfigEcho {
    fn from(c: &InpaintConfig) -> Self {
        Self {
            patch_size: c.index.patch_size,
            coverage: c.index.coverage,
            dims: c.index.dims,
            knn: c.index.knn,
            mu: c.index.mu,
            nu: c.index.nu,
            norm: c.index.norm.to_string(),
            workers: c.workers,
            oracle: c.oracle,
            brute_force: c.mode == SearchMode::BruteForce,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BuildReport {
    /// Dictionary scan and shared moment accumulation.
    pub prepare_seconds: f64,
    /// PCA, projection and sorting, one entry per index.
    pub index_seconds: Vec<f64>,
    pub sort_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub dictionary_size: usize,
    /// Absent when the index was loaded or not used.
    pub build: Option<BuildReport>,
    /// Whole run, index build included.
    pub total_seconds: f64,
    pub iterations: usize,
    pub mean_ae_percent: Option<f64>,
    pub ae_iterations: Option<usize>,
    pub ae_zero_oracle_excluded: Option<usize>,
    pub output: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub index: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub seconds: f64,
    pub mean_ae_percent: Option<f64>,
    pub iterations: usize,
    pub dictionary_size: usize,
}

#[derive(Debug, Serialize)]
pub struct StatsRow {
    pub iteration: usize,
    pub target_x: usize,
    pub target_y: usize,
    pub layout: Option<usize>,
    pub source_x: u32,
    pub source_y: u32,
    pub z_error: f64,
    pub bf_error: Option<f64>,
    pub candidates: usize,
    pub filled: usize,
    pub seconds: f64,
}

impl From<&IterationRecord> for StatsRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iteration: r.iteration,
            target_x: r.target.x,
            target_y: r.target.y,
            layout: r.layout,
            source_x: r.source.x,
            source_y: r.source.y,
            z_error: r.z_error,
            bf_error: r.bf_error,
            candidates: r.candidates,
            filled: r.filled,
            seconds: r.elapsed,
        }
    }
}
