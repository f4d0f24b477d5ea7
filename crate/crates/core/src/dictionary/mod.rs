//! Dictionary extraction and index construction.

mod layout;
mod pca;
pub mod persist;
mod quantize;

use std::time::Instant;

use rayon::prelude::*;

pub use layout::{build_subset_layouts, subset_size, Anchor, SubsetLayout};
pub use pca::{fit_pca, Moments, PcaModel};
pub use quantize::{project_quantize, Quantizer};

use crate::error::{Error, Result};
use crate::image::{MaskImage, PatchKey, RasterImage};
use crate::zcurve::{Norm, ZCurveIndex};

/// Patches gathered per chunk while accumulating moments and projections.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    /// Patch side length K (odd).
    pub patch_size: usize,
    /// Fraction c of patch pixels each index covers.
    pub coverage: f64,
    /// Principal dimensions D kept per index.
    pub dims: usize,
    /// Candidates k fetched per query.
    pub knn: usize,
    /// Recursion threshold μ: intervals this short are scanned.
    pub mu: usize,
    /// Parallel threshold ν: sub-regions this long may go to another worker.
    pub nu: usize,
    pub norm: Norm,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            patch_size: 9,
            coverage: 0.6,
            dims: 10,
            knn: 80,
            mu: 256,
            nu: 2048,
            norm: Norm::L2,
        }
    }
}

impl IndexConfig {
    pub fn validate(&self, channels: usize) -> Result<()> {
        let k = self.patch_size;
        if k < 3 || k.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "patch size must be odd and at least 3, got {k}"
            )));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(Error::Config(format!(
                "coverage must lie in (0, 1], got {}",
                self.coverage
            )));
        }
        let inputs = subset_size(k, self.coverage) * channels;
        if self.dims < 1 || self.dims > inputs {
            return Err(Error::Config(format!(
                "dims must lie in 1..={inputs} for this patch size, coverage and channel count, got {}",
                self.dims
            )));
        }
        if self.knn < 1 {
            return Err(Error::Config("knn must be at least 1".into()));
        }
        if self.mu < 1 {
            return Err(Error::Config("mu must be at least 1".into()));
        }
        if self.nu < self.mu {
            return Err(Error::Config(format!(
                "nu ({}) must not be below mu ({})",
                self.nu, self.mu
            )));
        }
        Ok(())
    }
}

/// Every stride-1 window of side `size` containing only KNOWN pixels, as
/// top-left keys in row-major order.
pub fn collect_dictionary(
    image: &RasterImage,
    mask: &MaskImage,
    size: usize,
) -> Result<Vec<PatchKey>> {
    mask.matches(image)?;
    let (w, h) = (mask.width(), mask.height());
    if size == 0 || size > w || size > h {
        return Err(Error::EmptyDictionary(size));
    }
    // summed-area table of unknown pixels
    let stride = w + 1;
    let mut sat = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += u32::from(!mask.is_known(x, y));
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let mut keys = Vec::new();
    for y in 0..=h - size {
        for x in 0..=w - size {
            let unknown = sat[(y + size) * stride + x + size] + sat[y * stride + x]
                - sat[y * stride + x + size]
                - sat[(y + size) * stride + x];
            if unknown == 0 {
                keys.push(PatchKey::new(x as u32, y as u32));
            }
        }
    }
    if keys.is_empty() {
        return Err(Error::EmptyDictionary(size));
    }
    Ok(keys)
}

/// Coordinates of one layout inside the flattened patch vector
/// (`(row * K + col) * channels + channel`).
pub fn layout_coordinates(layout: &SubsetLayout, channels: usize) -> Vec<usize> {
    layout
        .pixel_indices()
        .flat_map(|p| (0..channels).map(move |ch| p * channels + ch))
        .collect()
}

/// Offsets into the image buffer, relative to a patch's top-left pixel, of
/// the given patch-vector coordinates.
fn image_offsets(coords: &[usize], size: usize, channels: usize, width: usize) -> Vec<usize> {
    coords
        .iter()
        .map(|&c| {
            let (pixel, ch) = (c / channels, c % channels);
            let (r, col) = (pixel / size, pixel % size);
            (r * width + col) * channels + ch
        })
        .collect()
}

fn moments_over(image: &RasterImage, keys: &[PatchKey], offsets: &[usize]) -> Moments {
    let dims = offsets.len();
    keys.par_chunks(CHUNK)
        .map(|chunk| {
            let mut rows = Vec::with_capacity(chunk.len() * dims);
            for key in chunk {
                let base = image.offset(key.x as usize, key.y as usize);
                rows.extend(offsets.iter().map(|&o| f64::from(image.data()[base + o])));
            }
            let mut m = Moments::new(dims);
            m.add_rows(&rows);
            m
        })
        .reduce(|| Moments::new(dims), |a, b| a.merge(&b))
}

/// One z-curve index together with the model that maps patches into it.
#[derive(Debug, Clone)]
pub struct LayoutIndex {
    pub layout: SubsetLayout,
    pub model: PcaModel,
    pub quantizer: Quantizer,
    pub index: ZCurveIndex,
}

/// Seconds spent on one layout: PCA plus projection, and sorting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayoutTiming {
    pub fit_seconds: f64,
    pub sort_seconds: f64,
}

impl LayoutIndex {
    /// Build from dictionary keys and the layout's (already accumulated)
    /// moments.
    fn assemble(
        image: &RasterImage,
        keys: &[PatchKey],
        layout: SubsetLayout,
        moments: &Moments,
        config: &IndexConfig,
    ) -> Result<(Self, LayoutTiming)> {
        let started = Instant::now();
        let channels = image.channels();
        let coords = layout_coordinates(&layout, channels);
        let offsets = image_offsets(&coords, config.patch_size, channels, image.width());
        let model = PcaModel::from_moments(moments, config.dims)?;
        let dims = config.dims;
        let mut projections = vec![0.0; keys.len() * dims];
        projections
            .par_chunks_mut(CHUNK * dims)
            .zip(keys.par_chunks(CHUNK))
            .for_each(|(out, chunk)| {
                let mut centered = Vec::with_capacity(chunk.len() * offsets.len());
                for key in chunk {
                    let base = image.offset(key.x as usize, key.y as usize);
                    centered.extend(
                        offsets
                            .iter()
                            .zip(&model.mean)
                            .map(|(&o, &m)| f64::from(image.data()[base + o]) - m),
                    );
                }
                model.project_rows(&centered, out);
            });
        let quantizer = Quantizer::fit(&projections, dims);
        let mut bytes = vec![0u8; projections.len()];
        for (y, b) in projections
            .chunks_exact(dims)
            .zip(bytes.chunks_exact_mut(dims))
        {
            quantizer.quantize(y, b);
        }
        let fit_seconds = started.elapsed().as_secs_f64();
        let sorting = Instant::now();
        let index = ZCurveIndex::build(dims, layout.id, bytes, keys.to_vec())?;
        let timing = LayoutTiming {
            fit_seconds,
            sort_seconds: sorting.elapsed().as_secs_f64(),
        };
        Ok((
            Self {
                layout,
                model,
                quantizer,
                index,
            },
            timing,
        ))
    }

    /// Flattened patch-vector coordinates this index reads.
    pub fn coordinates(&self, channels: usize) -> Vec<usize> {
        layout_coordinates(&self.layout, channels)
    }
}

/// Index the dictionary of `image` under one layout.
pub fn build_index(
    image: &RasterImage,
    mask: &MaskImage,
    layout: &SubsetLayout,
    config: &IndexConfig,
) -> Result<LayoutIndex> {
    config.validate(image.channels())?;
    let keys = collect_dictionary(image, mask, config.patch_size)?;
    let coords = layout_coordinates(layout, image.channels());
    let offsets = image_offsets(&coords, config.patch_size, image.channels(), image.width());
    let moments = moments_over(image, &keys, &offsets);
    LayoutIndex::assemble(image, &keys, layout.clone(), &moments, config).map(|(index, _)| index)
}

/// Timings of a multi-index build.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildStats {
    pub dictionary_size: usize,
    /// Dictionary scan plus the shared moment accumulation.
    pub prepare_seconds: f64,
    pub layouts: Vec<LayoutTiming>,
}

impl BuildStats {
    pub fn total_seconds(&self) -> f64 {
        self.prepare_seconds
            + self
                .layouts
                .iter()
                .map(|t| t.fit_seconds + t.sort_seconds)
                .sum::<f64>()
    }

    pub fn sort_seconds(&self) -> f64 {
        self.layouts.iter().map(|t| t.sort_seconds).sum()
    }
}

/// The eight layout indices over one shared dictionary.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    pub config: IndexConfig,
    pub channels: usize,
    pub keys: Vec<PatchKey>,
    pub indices: Vec<LayoutIndex>,
}

impl MultiIndex {
    /// Moments are accumulated once over whole patches; each layout's
    /// moments are the sub-block for its coordinates.
    pub fn build(
        image: &RasterImage,
        mask: &MaskImage,
        config: &IndexConfig,
    ) -> Result<(Self, BuildStats)> {
        let started = Instant::now();
        config.validate(image.channels())?;
        let channels = image.channels();
        let layouts = build_subset_layouts(config.patch_size, config.coverage)?;
        let keys = collect_dictionary(image, mask, config.patch_size)?;
        let all: Vec<usize> = (0..config.patch_size * config.patch_size * channels).collect();
        let offsets = image_offsets(&all, config.patch_size, channels, image.width());
        let full = moments_over(image, &keys, &offsets);
        let mut stats = BuildStats {
            dictionary_size: keys.len(),
            prepare_seconds: started.elapsed().as_secs_f64(),
            layouts: Vec::with_capacity(layouts.len()),
        };
        let mut indices = Vec::with_capacity(layouts.len());
        for layout in layouts {
            let moments = full.restrict(&layout_coordinates(&layout, channels));
            let (index, timing) = LayoutIndex::assemble(image, &keys, layout, &moments, config)?;
            indices.push(index);
            stats.layouts.push(timing);
        }
        Ok((
            Self {
                config: *config,
                channels,
                keys,
                indices,
            },
            stats,
        ))
    }

    pub fn dictionary_size(&self) -> usize {
        self.keys.len()
    }

    pub fn layouts(&self) -> impl Iterator<Item = &SubsetLayout> {
        self.indices.iter().map(|i| &i.layout)
    }
}
