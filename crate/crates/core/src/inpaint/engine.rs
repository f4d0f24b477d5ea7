use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::dictionary::{
    collect_dictionary, layout_coordinates, BuildStats, IndexConfig, LayoutIndex, MultiIndex,
    PcaModel, Quantizer, SubsetLayout,
};
use crate::error::{Error, Result};
use crate::image::{extract_patch, Coord, MaskImage, PatchKey, PatchView, RasterImage};
use crate::inpaint::cost::{target_origin, CostKernel};
use crate::inpaint::priority::{data_term_with, intensity_gradient, ConfidenceMap};
use crate::zcurve::{knn_search, knn_search_parallel, SearchParams};

/// How best patches are found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Knn filter in the z-curve index, then refine in image space.
    #[default]
    Accelerated,
    /// Full dictionary scan every iteration; no index is built.
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintConfig {
    pub index: IndexConfig,
    /// Worker threads; 0 means one per logical core.
    pub workers: usize,
    /// Also run the full scan every iteration to record `bf_error`.
    pub oracle: bool,
    pub mode: SearchMode,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            index: IndexConfig::default(),
            workers: 0,
            oracle: false,
            mode: SearchMode::Accelerated,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The fill-front pixel that was selected.
    pub target: Coord,
    /// `None` in brute-force mode.
    pub layout: Option<usize>,
    pub source: PatchKey,
    /// Refined best cost, as a norm (square root of the summed squares for
    /// L2).
    pub z_error: f64,
    pub bf_error: Option<f64>,
    pub candidates: usize,
    pub filled: usize,
    pub elapsed: f64,
}

#[derive(Debug, Clone)]
pub struct InpaintOutcome {
    pub image: RasterImage,
    pub records: Vec<IterationRecord>,
    pub dictionary_size: usize,
    /// Present when an index was built here rather than supplied.
    pub build: Option<BuildStats>,
    /// Wall time of the whole call, build included.
    pub seconds: f64,
    /// Smallest and largest confidence seen after every paste.
    pub confidence_range: (f64, f64),
}

/// Index with the largest overlap with the target's known pixels; ties go
/// to the smaller id.
pub fn select_index(known: &[bool], layouts: &[SubsetLayout]) -> usize {
    let mut best = (0, 0);
    for (i, layout) in layouts.iter().enumerate() {
        let overlap = layout.overlap(known);
        if overlap > best.1 || i == 0 {
            best = (i, overlap);
        }
    }
    best.0
}

/// Highest priority; ties go to the smaller `(y, x)`.
pub fn select_target(fillfront: &[Coord], priorities: &[f64]) -> Coord {
    assert!(!fillfront.is_empty(), "empty fill front");
    let mut best = 0;
    for i in 1..fillfront.len() {
        let better = match priorities[i].total_cmp(&priorities[best]) {
            Ordering::Greater => true,
            Ordering::Equal => fillfront[i] < fillfront[best],
            Ordering::Less => false,
        };
        if better {
            best = i;
        }
    }
    fillfront[best]
}

/// Quantized principal coordinates of the target's layout pixels, with
/// unknown pixels standing at the model mean.
pub fn make_query(
    target: &PatchView,
    layout: &SubsetLayout,
    model: &PcaModel,
    quantizer: &Quantizer,
) -> Vec<u8> {
    let ch = target.channels;
    let coords = layout_coordinates(layout, ch);
    let centered: Vec<f64> = coords
        .iter()
        .zip(&model.mean)
        .map(|(&c, &m)| {
            if target.known[c / ch] {
                f64::from(target.values[c]) - m
            } else {
                0.0
            }
        })
        .collect();
    let mut y = vec![0.0; model.dims()];
    model.project_centered(&centered, &mut y);
    let mut out = vec![0; y.len()];
    quantizer.quantize(&y, &mut out);
    out
}

/// Best match of one search: key, raw cost, candidates evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub key: PatchKey,
    pub cost: u64,
    pub candidates: usize,
}

fn better(a: (u64, PatchKey), b: (u64, PatchKey)) -> (u64, PatchKey) {
    if a <= b {
        a
    } else {
        b
    }
}

fn scan(kernel: &CostKernel, image: &RasterImage, keys: &[PatchKey]) -> (u64, PatchKey) {
    keys.iter()
        .map(|&k| (kernel.cost(image, k), k))
        .fold((u64::MAX, PatchKey::new(u32::MAX, u32::MAX)), better)
}

/// Exact minimum of the masked cost over `dictionary`, ties by row-major
/// key. The scan is split across `pool` when one is given.
pub fn brute_force_best(
    target: &PatchView,
    dictionary: &[PatchKey],
    image: &RasterImage,
    norm: crate::zcurve::Norm,
    pool: Option<&ThreadPool>,
) -> Match {
    assert!(!dictionary.is_empty(), "empty dictionary");
    let kernel = CostKernel::new(target, image.width(), norm);
    let (cost, key) = match pool {
        Some(pool) if pool.current_num_threads() > 1 => pool.install(|| {
            dictionary
                .par_chunks(4096)
                .map(|chunk| scan(&kernel, image, chunk))
                .reduce(|| (u64::MAX, PatchKey::new(u32::MAX, u32::MAX)), better)
        }),
        _ => scan(&kernel, image, dictionary),
    };
    Match {
        key,
        cost,
        candidates: dictionary.len(),
    }
}

/// Filter with a knn query on the best-covering index, refine with the
/// full masked cost. Returns the layout used alongside the match.
pub fn query_best_patch(
    target: &PatchView,
    image: &RasterImage,
    multi: &MultiIndex,
    pool: Option<&ThreadPool>,
) -> (usize, Match) {
    let layouts: Vec<SubsetLayout> = multi.layouts().cloned().collect();
    let chosen = select_index(&target.known, &layouts);
    let (m, _) = query_with(target, image, &multi.indices[chosen], &multi.config, pool);
    (chosen, m)
}

fn query_with(
    target: &PatchView,
    image: &RasterImage,
    index: &LayoutIndex,
    cfg: &IndexConfig,
    pool: Option<&ThreadPool>,
) -> (Match, usize) {
    let query = make_query(target, &index.layout, &index.model, &index.quantizer);
    let params = SearchParams::new(cfg.knn, cfg.mu, cfg.nu, cfg.norm);
    let list = match pool {
        Some(pool) => knn_search_parallel(&index.index, &query, params, pool),
        None => knn_search(&index.index, &query, params),
    };
    let candidates = list.into_sorted_vec();
    let kernel = CostKernel::new(target, image.width(), cfg.norm);
    let (cost, key) = candidates
        .iter()
        .map(|n| (kernel.cost(image, n.key), n.key))
        .fold((u64::MAX, PatchKey::new(u32::MAX, u32::MAX)), better);
    (
        Match {
            key,
            cost,
            candidates: candidates.len(),
        },
        index.layout.id,
    )
}

/// Copy source pixels into the UNKNOWN pixels of the window at `origin`.
/// Filled pixels become KNOWN with confidence `fill_confidence`. Returns
/// how many were filled.
pub fn paste(
    image: &mut RasterImage,
    mask: &mut MaskImage,
    confidence: &mut ConfidenceMap,
    origin: Coord,
    source: PatchKey,
    size: usize,
    fill_confidence: f64,
) -> usize {
    let mut filled = 0;
    for dy in 0..size {
        for dx in 0..size {
            let (x, y) = (origin.x + dx, origin.y + dy);
            if mask.is_known(x, y) {
                continue;
            }
            let (sx, sy) = (source.x as usize + dx, source.y as usize + dy);
            debug_assert!(mask.is_known(sx, sy), "source pixel is not known");
            let ch = image.channels();
            let src = image.offset(sx, sy);
            let mut pixel = [0u8; 3];
            pixel[..ch].copy_from_slice(&image.data()[src..src + ch]);
            image.pixel_mut(x, y).copy_from_slice(&pixel[..ch]);
            mask.set_known(x, y, true);
            confidence.set(x, y, fill_confidence);
            filled += 1;
        }
    }
    filled
}

/// Heap entry: highest priority first, then smaller `(y, x)`.
#[derive(Debug, Clone, Copy)]
struct Entry {
    priority: f64,
    at: Coord,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.at.cmp(&self.at))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fill-front priorities kept current across pastes.
struct FillOrder {
    width: usize,
    size: usize,
    /// NaN off the fill front.
    priorities: Vec<f64>,
    heap: BinaryHeap<Entry>,
    /// Intensity gradient of every KNOWN pixel.
    gradients: Vec<(f64, f64)>,
}

impl FillOrder {
    fn new(image: &RasterImage, mask: &MaskImage, confidence: &ConfidenceMap, size: usize) -> Self {
        let mut order = Self {
            width: mask.width(),
            size,
            priorities: vec![f64::NAN; mask.width() * mask.height()],
            heap: BinaryHeap::new(),
            gradients: vec![(0.0, 0.0); mask.width() * mask.height()],
        };
        order.regrade(
            image,
            mask,
            Coord::new(0, 0),
            Coord::new(mask.width(), mask.height()),
        );
        order.refresh(
            image,
            mask,
            confidence,
            Coord::new(0, 0),
            Coord::new(mask.width(), mask.height()),
        );
        order
    }

    /// Recompute every pixel in `[lo, hi)`.
    fn refresh(
        &mut self,
        image: &RasterImage,
        mask: &MaskImage,
        confidence: &ConfidenceMap,
        lo: Coord,
        hi: Coord,
    ) {
        for y in lo.y..hi.y {
            for x in lo.x..hi.x {
                let at = Coord::new(x, y);
                if mask.is_front(at) {
                    let origin = target_origin(image.width(), image.height(), at, self.size);
                    let gradient = |p: Coord| self.gradients[p.y * self.width + p.x];
                    let priority = confidence.window_term(mask, origin, self.size)
                        * data_term_with(image, mask, at, self.size, gradient);
                    let slot = &mut self.priorities[y * self.width + x];
                    if priority.to_bits() != slot.to_bits() {
                        *slot = priority;
                        self.heap.push(Entry { priority, at });
                    }
                } else {
                    self.priorities[y * self.width + x] = f64::NAN;
                }
            }
        }
    }

    /// Recompute cached gradients of KNOWN pixels in `[lo, hi)`.
    fn regrade(&mut self, image: &RasterImage, mask: &MaskImage, lo: Coord, hi: Coord) {
        for y in lo.y..hi.y {
            for x in lo.x..hi.x {
                if mask.is_known(x, y) {
                    self.gradients[y * self.width + x] =
                        intensity_gradient(image, mask, Coord::new(x, y));
                }
            }
        }
    }

    /// After a paste into the window at `origin`: every front pixel whose
    /// own window or its gradient stencil can touch the pasted window.
    fn update(
        &mut self,
        image: &RasterImage,
        mask: &MaskImage,
        confidence: &ConfidenceMap,
        origin: Coord,
    ) {
        // pasted pixels and their 4-neighbors have new gradients
        let lo = Coord::new(origin.x.saturating_sub(1), origin.y.saturating_sub(1));
        let hi = Coord::new(
            (origin.x + self.size + 1).min(mask.width()),
            (origin.y + self.size + 1).min(mask.height()),
        );
        self.regrade(image, mask, lo, hi);
        let reach = self.size + self.size / 2 + 1;
        let lo = Coord::new(
            origin.x.saturating_sub(reach),
            origin.y.saturating_sub(reach),
        );
        let hi = Coord::new(
            (origin.x + self.size + reach).min(mask.width()),
            (origin.y + self.size + reach).min(mask.height()),
        );
        self.refresh(image, mask, confidence, lo, hi);
    }

    fn pop(&mut self) -> Option<Coord> {
        while let Some(e) = self.heap.pop() {
            let current = self.priorities[e.at.y * self.width + e.at.x];
            if current.to_bits() == e.priority.to_bits() {
                self.priorities[e.at.y * self.width + e.at.x] = f64::NAN;
                return Some(e.at);
            }
        }
        None
    }
}

fn make_pool(workers: usize) -> Result<Option<ThreadPool>> {
    let n = if workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        workers
    };
    if n <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))
}

fn check_inputs(image: &RasterImage, mask: &MaskImage, cfg: &InpaintConfig) -> Result<()> {
    mask.matches(image)?;
    cfg.index.validate(image.channels())?;
    let k = cfg.index.patch_size;
    if image.width() < k || image.height() < k {
        return Err(Error::DimensionMismatch {
            expected: format!("an image of at least {k}x{k}"),
            actual: format!("{}x{}", image.width(), image.height()),
        });
    }
    Ok(())
}

/// Complete `image` where `mask` is UNKNOWN.
pub fn inpaint(
    image: &RasterImage,
    mask: &MaskImage,
    cfg: &InpaintConfig,
) -> Result<InpaintOutcome> {
    let started = Instant::now();
    check_inputs(image, mask, cfg)?;
    if mask.is_fully_known() {
        return Ok(unchanged(image, started));
    }
    let pool = make_pool(cfg.workers)?;
    match cfg.mode {
        SearchMode::BruteForce => {
            let keys = collect_dictionary(image, mask, cfg.index.patch_size)?;
            run(
                image,
                mask,
                cfg,
                Backend::Brute(&keys),
                pool.as_ref(),
                None,
                started,
            )
        }
        SearchMode::Accelerated => {
            let build = || MultiIndex::build(image, mask, &cfg.index);
            let (multi, stats) = match &pool {
                Some(p) => p.install(build)?,
                None => build()?,
            };
            run(
                image,
                mask,
                cfg,
                Backend::Index(&multi),
                pool.as_ref(),
                Some(stats),
                started,
            )
        }
    }
}

/// Complete `image` with a prebuilt index. The index must have been built
/// from this image and mask.
pub fn inpaint_with_index(
    image: &RasterImage,
    mask: &MaskImage,
    multi: &MultiIndex,
    cfg: &InpaintConfig,
) -> Result<InpaintOutcome> {
    let started = Instant::now();
    let cfg = InpaintConfig {
        index: multi.config,
        ..*cfg
    };
    check_inputs(image, mask, &cfg)?;
    if multi.channels != image.channels() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} channels", multi.channels),
            actual: format!("{} channels", image.channels()),
        });
    }
    if mask.is_fully_known() {
        return Ok(unchanged(image, started));
    }
    let keys = collect_dictionary(image, mask, cfg.index.patch_size)?;
    if keys != multi.keys {
        return Err(Error::DimensionMismatch {
            expected: format!("a dictionary of {} patches", multi.keys.len()),
            actual: format!("{} patches in this image and mask", keys.len()),
        });
    }
    let pool = make_pool(cfg.workers)?;
    run(
        image,
        mask,
        &cfg,
        Backend::Index(multi),
        pool.as_ref(),
        None,
        started,
    )
}

fn unchanged(image: &RasterImage, started: Instant) -> InpaintOutcome {
    InpaintOutcome {
        image: image.clone(),
        records: Vec::new(),
        dictionary_size: 0,
        build: None,
        seconds: started.elapsed().as_secs_f64(),
        confidence_range: (0.0, 1.0),
    }
}

#[derive(Clone, Copy)]
enum Backend<'a> {
    Index(&'a MultiIndex),
    Brute(&'a [PatchKey]),
}

fn run(
    image: &RasterImage,
    mask: &MaskImage,
    cfg: &InpaintConfig,
    backend: Backend<'_>,
    pool: Option<&ThreadPool>,
    build: Option<BuildStats>,
    started: Instant,
) -> Result<InpaintOutcome> {
    let size = cfg.index.patch_size;
    let norm = cfg.index.norm;
    let mut image = image.clone();
    let mut mask = mask.clone();
    let mut confidence = ConfidenceMap::new(&mask);
    let mut order = FillOrder::new(&image, &mask, &confidence, size);
    let layouts: Vec<SubsetLayout> = match backend {
        Backend::Index(multi) => multi.layouts().cloned().collect(),
        Backend::Brute(_) => Vec::new(),
    };
    let dictionary: &[PatchKey] = match backend {
        Backend::Index(multi) => &multi.keys,
        Backend::Brute(keys) => keys,
    };
    let mut records = Vec::new();
    let mut range = (1.0f64, 0.0f64);
    while let Some(at) = order.pop() {
        let tick = Instant::now();
        let origin = target_origin(image.width(), image.height(), at, size);
        let center = Coord::new(origin.x + size / 2, origin.y + size / 2);
        let target = extract_patch(&image, &mask, center, size)?;
        let (layout, found) = match backend {
            Backend::Index(multi) => {
                let chosen = select_index(&target.known, &layouts);
                let (m, id) =
                    query_with(&target, &image, &multi.indices[chosen], &multi.config, pool);
                (Some(id), m)
            }
            Backend::Brute(keys) => (None, brute_force_best(&target, keys, &image, norm, pool)),
        };
        let bf = match (cfg.oracle, backend) {
            (false, _) => None,
            (true, Backend::Brute(_)) => Some(found.cost),
            (true, Backend::Index(_)) => {
                Some(brute_force_best(&target, dictionary, &image, norm, pool).cost)
            }
        };
        let fill_confidence = confidence.window_term(&mask, origin, size);
        let filled = paste(
            &mut image,
            &mut mask,
            &mut confidence,
            origin,
            found.key,
            size,
            fill_confidence,
        );
        if filled > 0 {
            range = (range.0.min(fill_confidence), range.1.max(fill_confidence));
        }
        order.update(&image, &mask, &confidence, origin);
        records.push(IterationRecord {
            iteration: records.len(),
            target: at,
            layout,
            source: found.key,
            z_error: norm.to_metric(found.cost as f64),
            bf_error: bf.map(|c| norm.to_metric(c as f64)),
            candidates: found.candidates,
            filled,
            elapsed: tick.elapsed().as_secs_f64(),
        });
    }
    if !mask.is_fully_known() {
        return Err(Error::Unreachable);
    }
    let initial_min = if mask.flags().is_empty() { 0.0 } else { 1.0 };
    Ok(InpaintOutcome {
        image,
        records,
        dictionary_size: dictionary.len(),
        build,
        seconds: started.elapsed().as_secs_f64(),
        confidence_range: (range.0.min(initial_min), range.1.max(initial_min)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::build_subset_layouts;
    use crate::inpaint::cost::masked_cost;
    use crate::zcurve::Norm;

    fn noise(w: usize, h: usize, ch: usize, seed: u64) -> RasterImage {
        let mut s = seed;
        let data = (0..w * h * ch)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 56) as u8
            })
            .collect();
        RasterImage::new(w, h, ch, data).unwrap()
    }

    fn hole(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> MaskImage {
        let mut m = MaskImage::all_known(w, h);
        for y in y0..y1 {
            for x in x0..x1 {
                m.set_known(x, y, false);
            }
        }
        m
    }

    #[test]
    fn target_selection() {
        let a = Coord::new(3, 1);
        let b = Coord::new(1, 2);
        assert_eq!(select_target(&[a], &[0.5]), a);
        assert_eq!(select_target(&[b, a], &[0.5, 0.5]), a);
        assert_eq!(select_target(&[b, a], &[0.7, 0.5]), b);
    }

    #[test]
    fn index_selection() {
        let layouts = build_subset_layouts(9, 0.6).unwrap();
        assert_eq!(select_index(&[true; 81], &layouts), 0);
        let left: Vec<bool> = (0..81).map(|i| i % 9 < 4).collect();
        let overlaps: Vec<usize> = layouts.iter().map(|l| l.overlap(&left)).collect();
        let best = *overlaps.iter().max().unwrap();
        assert_eq!(overlaps.iter().position(|&o| o == best), Some(3));
        assert_eq!(select_index(&left, &layouts), 3);
        // 4x4 and 5x5 corners lie wholly inside the north layout too and tie
        // with it; a 6x6 corner separates them
        let corner = |n: usize| {
            (0..81)
                .map(|i| i % 9 < n && i / 9 < n)
                .collect::<Vec<bool>>()
        };
        assert_eq!(
            layouts[0].overlap(&corner(4)),
            layouts[4].overlap(&corner(4))
        );
        assert_eq!(select_index(&corner(4), &layouts), 0);
        let six = corner(6);
        let overlaps: Vec<usize> = layouts.iter().map(|l| l.overlap(&six)).collect();
        assert_eq!(overlaps[4], 36);
        assert!(overlaps.iter().enumerate().all(|(i, &o)| i == 4 || o < 36));
        assert_eq!(select_index(&six, &layouts), 4);
    }

    fn model_and_quantizer(inputs: usize) -> (PcaModel, Quantizer) {
        let mean: Vec<f64> = (0..inputs).map(|i| 100.0 + i as f64).collect();
        let comps = vec![
            (0..inputs)
                .map(|i| if i == 0 { 1.0 } else { 0.0 })
                .collect(),
            (0..inputs)
                .map(|i| if i == 1 { 1.0 } else { 0.0 })
                .collect(),
        ];
        let model = PcaModel::new(mean, comps, vec![2.0, 1.0]).unwrap();
        (
            model,
            Quantizer::new(vec![-100.0, -50.0], vec![100.0, 150.0]).unwrap(),
        )
    }

    #[test]
    fn query_of_unknown_layout_is_quantized_origin() {
        let layouts = build_subset_layouts(3, 4.0 / 9.0).unwrap();
        let (model, q) = model_and_quantizer(4);
        let target = PatchView {
            size: 3,
            channels: 1,
            values: vec![0; 9],
            known: vec![false; 9],
        };
        let query = make_query(&target, &layouts[4], &model, &q);
        assert_eq!(
            query,
            vec![q.quantize_value(0, 0.0), q.quantize_value(1, 0.0)]
        );
    }

    #[test]
    fn query_matches_mean_substitution_oracle() {
        let layouts = build_subset_layouts(3, 4.0 / 9.0).unwrap();
        let layout = &layouts[4]; // offsets (0,0) (0,1) (1,0) (1,1)
        let (model, q) = model_and_quantizer(4);
        let mut known = vec![true; 9];
        known[1] = false;
        known[3] = false;
        let values = vec![30, 0, 7, 0, 90, 1, 2, 3, 4];
        let target = PatchView {
            size: 3,
            channels: 1,
            values: values.clone(),
            known,
        };
        let substituted = [30.0, model.mean[1], model.mean[2], 90.0];
        let mut expected = vec![0; 2];
        q.quantize(&model.project(&substituted), &mut expected);
        assert_eq!(make_query(&target, layout, &model, &q), expected);
        // fully known: plain projection
        let full = PatchView {
            size: 3,
            channels: 1,
            values,
            known: vec![true; 9],
        };
        let mut plain = vec![0; 2];
        q.quantize(&model.project(&[30.0, 0.0, 0.0, 90.0]), &mut plain);
        assert_eq!(make_query(&full, layout, &model, &q), plain);
    }

    #[test]
    fn brute_force_finds_exact_copy() {
        let img = noise(30, 30, 3, 5);
        let mask = hole(30, 30, 20, 20, 24, 24);
        let keys = collect_dictionary(&img, &mask, 5).unwrap();
        // a target window that lies wholly in the known area
        let target = extract_patch(&img, &mask, Coord::new(8, 6), 5).unwrap();
        let m = brute_force_best(&target, &keys, &img, Norm::L2, None);
        assert_eq!((m.key, m.cost), (PatchKey::new(6, 4), 0));
        let single = brute_force_best(&target, &[PatchKey::new(0, 0)], &img, Norm::L2, None);
        assert_eq!(single.key, PatchKey::new(0, 0));
    }

    #[test]
    fn brute_force_is_argmin_with_row_major_ties() {
        let img = noise(24, 20, 1, 9);
        let mask = hole(24, 20, 10, 8, 13, 11);
        let keys = collect_dictionary(&img, &mask, 5).unwrap();
        let target = extract_patch(&img, &mask, Coord::new(10, 8), 5).unwrap();
        let full = MaskImage::all_known(24, 20);
        let costs: Vec<(u64, PatchKey)> = keys
            .iter()
            .map(|&k| {
                let c = extract_patch(
                    &img,
                    &full,
                    Coord::new(k.x as usize + 2, k.y as usize + 2),
                    5,
                )
                .unwrap();
                (masked_cost(&target, &c, Norm::L1), k)
            })
            .collect();
        let oracle = *costs.iter().min().unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        for p in [None, Some(&pool)] {
            let m = brute_force_best(&target, &keys, &img, Norm::L1, p);
            assert_eq!((m.cost, m.key), oracle);
        }
    }

    #[test]
    fn exhaustive_filter_equals_brute_force() {
        let img = noise(40, 32, 3, 11);
        let mask = hole(40, 32, 12, 10, 20, 16);
        let keys = collect_dictionary(&img, &mask, 9).unwrap();
        let cfg = IndexConfig {
            knn: keys.len(),
            ..IndexConfig::default()
        };
        let (multi, _) = MultiIndex::build(&img, &mask, &cfg).unwrap();
        for at in [Coord::new(12, 9), Coord::new(15, 9), Coord::new(20, 12)] {
            let target = extract_patch(&img, &mask, at, 9).unwrap();
            let (_, m) = query_best_patch(&target, &img, &multi, None);
            let b = brute_force_best(&target, &keys, &img, Norm::L2, None);
            assert_eq!((m.key, m.cost), (b.key, b.cost));
            assert_eq!(m.candidates, keys.len());
        }
    }

    #[test]
    fn small_knn_is_never_better_than_oracle() {
        let img = noise(64, 64, 1, 3);
        let mask = hole(64, 64, 30, 30, 36, 36);
        let keys = collect_dictionary(&img, &mask, 9).unwrap();
        let cfg = IndexConfig {
            knn: 8,
            ..IndexConfig::default()
        };
        let (multi, _) = MultiIndex::build(&img, &mask, &cfg).unwrap();
        let target = extract_patch(&img, &mask, Coord::new(30, 29), 9).unwrap();
        let (_, m) = query_best_patch(&target, &img, &multi, None);
        let b = brute_force_best(&target, &keys, &img, Norm::L2, None);
        assert!(m.cost >= b.cost);
        assert_eq!(m.candidates, 8);
    }

    #[test]
    fn incremental_priorities_match_full_recomputation() {
        use crate::inpaint::priority::compute_priority;
        let size = 5;
        let mut img = noise(30, 24, 3, 8);
        let mut mask = hole(30, 24, 8, 6, 20, 15);
        mask.set_known(0, 23, false);
        let mut conf = ConfidenceMap::new(&mask);
        let mut order = FillOrder::new(&img, &mask, &conf, size);
        let mut steps = 0;
        while let Some(at) = order.pop() {
            let origin = target_origin(30, 24, at, size);
            let fill = conf.window_term(&mask, origin, size);
            paste(
                &mut img,
                &mut mask,
                &mut conf,
                origin,
                PatchKey::new(22, 16 + steps % 3),
                size,
                fill,
            );
            order.update(&img, &mask, &conf, origin);
            steps += 1;
            for y in 0..24 {
                for x in 0..30 {
                    let p = Coord::new(x, y);
                    let cached = order.priorities[y * 30 + x];
                    if mask.is_front(p) {
                        let fresh = compute_priority(p, &img, &mask, &conf, size);
                        assert_eq!(cached.to_bits(), fresh.to_bits(), "step {steps} at {p:?}");
                    } else {
                        assert!(cached.is_nan());
                    }
                }
            }
        }
        assert!(mask.is_fully_known());
    }

    #[test]
    fn paste_counts() {
        let mut img = noise(12, 12, 1, 2);
        let mut mask = hole(12, 12, 0, 0, 12, 12);
        for y in 6..12 {
            for x in 6..12 {
                mask.set_known(x, y, true);
            }
        }
        let mut conf = ConfidenceMap::new(&mask);
        let before = mask.unknown_count();
        let n = paste(
            &mut img,
            &mut mask,
            &mut conf,
            Coord::new(0, 0),
            PatchKey::new(6, 6),
            3,
            0.25,
        );
        assert_eq!(n, 9);
        assert_eq!(mask.unknown_count(), before - 9);
        assert_eq!(img.pixel(1, 2), img.pixel(7, 8));
        assert_eq!(conf.get(2, 2), 0.25);
        let again = paste(
            &mut img,
            &mut mask,
            &mut conf,
            Coord::new(0, 0),
            PatchKey::new(7, 7),
            3,
            0.1,
        );
        assert_eq!(again, 0);
        assert_eq!(conf.get(2, 2), 0.25);
    }

    #[test]
    fn paste_against_counting_oracle() {
        let mut s = 17u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            (s >> 33) as usize
        };
        for _ in 0..50 {
            let mut img = noise(16, 16, 1, 4);
            let flags: Vec<bool> = (0..256).map(|i| i % 16 >= 11 || next() % 3 != 0).collect();
            let mut mask = MaskImage::from_flags(16, 16, flags).unwrap();
            let mut conf = ConfidenceMap::new(&mask);
            let origin = Coord::new(next() % 8, next() % 12);
            let expected = (origin.y..origin.y + 5)
                .flat_map(|y| (origin.x..origin.x + 5).map(move |x| (x, y)))
                .filter(|&(x, y)| !mask.is_known(x, y))
                .count();
            let before = mask.unknown_count();
            let n = paste(
                &mut img,
                &mut mask,
                &mut conf,
                origin,
                PatchKey::new(11, 0),
                5,
                0.5,
            );
            assert_eq!(n, expected);
            assert_eq!(mask.unknown_count(), before - expected);
        }
    }

    #[test]
    fn fully_known_mask_is_a_no_op() {
        let img = noise(20, 20, 3, 1);
        let out = inpaint(
            &img,
            &MaskImage::all_known(20, 20),
            &InpaintConfig::default(),
        )
        .unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.image, img);
    }

    #[test]
    fn single_unknown_pixel_takes_one_iteration() {
        let img = noise(30, 30, 1, 6);
        let mask = hole(30, 30, 15, 15, 16, 16);
        let out = inpaint(&img, &mask, &InpaintConfig::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].filled, 1);
    }

    #[test]
    fn empty_dictionary_is_an_error() {
        let img = noise(20, 20, 1, 1);
        let mask = hole(20, 20, 0, 8, 20, 12);
        assert!(matches!(
            inpaint(&img, &mask, &InpaintConfig::default()),
            Err(Error::EmptyDictionary(9))
        ));
    }

    #[test]
    fn border_holes_are_filled() {
        let img = noise(40, 30, 3, 8);
        let mask = hole(40, 30, 0, 0, 6, 30);
        for mode in [SearchMode::Accelerated, SearchMode::BruteForce] {
            let cfg = InpaintConfig {
                mode,
                workers: 1,
                ..InpaintConfig::default()
            };
            let out = inpaint(&img, &mask, &cfg).unwrap();
            assert!(out.records.iter().map(|r| r.filled).sum::<usize>() == 180);
            for y in 0..30 {
                for x in 6..40 {
                    assert_eq!(out.image.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }

    #[test]
    fn oracle_bounds_refined_error() {
        let img = noise(48, 40, 3, 12);
        let mask = hole(48, 40, 18, 14, 30, 22);
        let cfg = InpaintConfig {
            oracle: true,
            workers: 1,
            index: IndexConfig {
                knn: 4,
                ..IndexConfig::default()
            },
            ..InpaintConfig::default()
        };
        let out = inpaint(&img, &mask, &cfg).unwrap();
        assert!(!out.records.is_empty());
        for r in &out.records {
            assert!(r.z_error >= r.bf_error.unwrap());
        }
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let img = noise(60, 50, 3, 21);
        let mask = hole(60, 50, 20, 20, 34, 27);
        let run = |workers| {
            let cfg = InpaintConfig {
                workers,
                index: IndexConfig {
                    nu: 16,
                    mu: 8,
                    ..IndexConfig::default()
                },
                ..InpaintConfig::default()
            };
            inpaint(&img, &mask, &cfg).unwrap()
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.image, b.image);
        let keys = |o: &InpaintOutcome| o.records.iter().map(|r| r.source).collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&b));
    }

    #[test]
    fn supplied_index_must_match_image() {
        let img = noise(40, 30, 1, 2);
        let mask = hole(40, 30, 10, 10, 14, 14);
        let (multi, _) = MultiIndex::build(&img, &mask, &IndexConfig::default()).unwrap();
        let cfg = InpaintConfig {
            workers: 1,
            ..InpaintConfig::default()
        };
        let with = inpaint_with_index(&img, &mask, &multi, &cfg).unwrap();
        let fresh = inpaint(&img, &mask, &cfg).unwrap();
        assert_eq!(with.image, fresh.image);
        let other = hole(40, 30, 20, 10, 24, 14);
        assert!(inpaint_with_index(&img, &other, &multi, &cfg).is_err());
    }
}
