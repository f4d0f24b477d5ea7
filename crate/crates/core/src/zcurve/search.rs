//! Outside-in knn traversal.
//!
//! The active range is one `HyperCube` mutated in place: a split writes a
//! single bound of the split dimension and puts it back on unwind. Leaf scans
//! that improve the list crop the range to the box `query ± ceil(kth)`; on
//! unwind a saved bound is re-intersected with that box, so a crop made deep
//! in the recursion stays in force for the enclosing levels.
//!
//! Pruning admits a region whose distance equals the current kth distance,
//! because a tie there may still carry a smaller key.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rayon::{Scope, ThreadPool};

use crate::zcurve::morton::{less_most_significant_bit, morton_key, morton_term};
use crate::zcurve::region::{axis_gap, crop_bounds};
use crate::zcurve::{
    HyperCube, Interval, KnnList, KnownBoundary, Neighbor, Norm, Split, ZCurveIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    /// Number of neighbors to return.
    pub k: usize,
    /// Intervals of at most this many entries are scanned linearly.
    pub mu: usize,
    /// Both children must span at least this many entries before the far
    /// one is handed to another worker.
    pub nu: usize,
    pub norm: Norm,
}

impl SearchParams {
    pub fn new(k: usize, mu: usize, nu: usize, norm: Norm) -> Self {
        Self { k, mu, nu, norm }
    }
}

/// Where candidates go: a private list, or a list shared between workers.
trait Sink {
    fn kth_distance(&self) -> u64;
    /// Returns whether `n` was inserted and the kth distance afterwards.
    fn offer(&mut self, n: Neighbor) -> (bool, u64);
}

impl Sink for &mut KnnList {
    #[inline]
    fn kth_distance(&self) -> u64 {
        KnnList::kth_distance(self)
    }

    #[inline]
    fn offer(&mut self, n: Neighbor) -> (bool, u64) {
        let inserted = self.insert(n);
        (inserted, KnnList::kth_distance(self))
    }
}

/// Pruning reads a mirror of the kth distance without locking. The mirror
/// only ever decreases, so a stale read admits too much, never too little.
#[derive(Clone, Copy)]
struct Shared<'a> {
    list: &'a Mutex<KnnList>,
    kth: &'a AtomicU64,
}

impl Sink for Shared<'_> {
    #[inline]
    fn kth_distance(&self) -> u64 {
        self.kth.load(AtomicOrdering::Relaxed)
    }

    fn offer(&mut self, n: Neighbor) -> (bool, u64) {
        let mut list = self.list.lock().expect("knn list lock poisoned");
        let inserted = list.insert(n);
        let kth = list.kth_distance();
        self.kth.store(kth, AtomicOrdering::Relaxed);
        (inserted, kth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// A deferred sub-region visit, ordered so the closest region pops first.
#[derive(Debug)]
struct Job {
    priority: u64,
    range: HyperCube,
    interval: Interval,
}

impl PartialEq for Job {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Job {}

impl Ord for Job {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .cmp(&self.priority)
            .then_with(|| other.interval.start.cmp(&self.interval.start))
    }
}

impl PartialOrd for Job {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Traversal<'a, S> {
    index: &'a ZCurveIndex,
    query: &'a [u8],
    params: SearchParams,
    sink: S,
    spawn: Option<&'a dyn Fn(Job)>,
    /// Scalar z-addresses of the range corners, kept in step with the range
    /// when the index has them.
    corners: Option<(u128, u128)>,
}

fn corner_keys(index: &ZCurveIndex, range: &HyperCube) -> Option<(u128, u128)> {
    index.has_scalar_keys().then(|| {
        (
            morton_key(&range.first).unwrap_or(0),
            morton_key(&range.last).unwrap_or(0),
        )
    })
}

impl<S: Sink> Traversal<'_, S> {
    #[inline]
    fn set_first(&mut self, range: &mut HyperCube, dim: usize, v: u8) {
        if let Some((first, _)) = &mut self.corners {
            *first ^= morton_term(range.first[dim], dim) ^ morton_term(v, dim);
        }
        range.first[dim] = v;
    }

    #[inline]
    fn set_last(&mut self, range: &mut HyperCube, dim: usize, v: u8) {
        if let Some((_, last)) = &mut self.corners {
            *last ^= morton_term(range.last[dim], dim) ^ morton_term(v, dim);
        }
        range.last[dim] = v;
    }

    #[inline]
    fn child_interval(&self, range: &HyperCube, parent: Interval, hint: KnownBoundary) -> Interval {
        match self.corners {
            Some((first, last)) => self.index.scalar_subinterval(first, last, parent, hint),
            None => self.index.subinterval(range, parent, hint),
        }
    }

    #[inline]
    fn admits(&self, distance: u64) -> bool {
        distance <= self.sink.kth_distance()
    }

    /// Current crop box bounds in `dim`, `None` while the list is not full.
    fn crop_in(&self, dim: usize) -> Option<(u8, u8)> {
        let kth = self.sink.kth_distance();
        (kth != u64::MAX).then(|| crop_bounds(self.query[dim], self.params.norm.radius(kth)))
    }

    /// Put a saved bound back. The range already lies inside the crop box of
    /// `entry_kth`, so only a kth that shrank since then needs intersecting.
    fn restore_last(&mut self, range: &mut HyperCube, dim: usize, saved: u8, entry_kth: u64) {
        let v = match self.crop_since(dim, entry_kth) {
            Some((_, hi)) => saved.min(hi),
            None => saved,
        };
        self.set_last(range, dim, v);
    }

    fn restore_first(&mut self, range: &mut HyperCube, dim: usize, saved: u8, entry_kth: u64) {
        let v = match self.crop_since(dim, entry_kth) {
            Some((lo, _)) => saved.max(lo),
            None => saved,
        };
        self.set_first(range, dim, v);
    }

    fn crop_since(&self, dim: usize, entry_kth: u64) -> Option<(u8, u8)> {
        if self.sink.kth_distance() == entry_kth {
            None
        } else {
            self.crop_in(dim)
        }
    }

    fn visit(&mut self, range: &mut HyperCube, interval: Interval) -> bool {
        if interval.is_empty() {
            return false;
        }
        let plan = if interval.len() <= self.params.mu {
            match range.is_empty() {
                true => Plan::Empty,
                false => Plan::Point,
            }
        } else {
            plan_split(self.query, range, self.params.norm)
        };
        match plan {
            Plan::Empty => false,
            Plan::Point => self.leaf(range, interval),
            Plan::Split(split, left_dist, right_dist) => {
                if right_dist >= left_dist {
                    self.traverse(range, interval, split, Side::Left, left_dist, right_dist)
                } else {
                    self.traverse(range, interval, split, Side::Right, right_dist, left_dist)
                }
            }
        }
    }

    fn traverse(
        &mut self,
        range: &mut HyperCube,
        interval: Interval,
        split: Split,
        near: Side,
        near_dist: u64,
        far_dist: u64,
    ) -> bool {
        if let Some(spawn) = self
            .spawn
            .filter(|_| interval.len() >= self.params.nu.saturating_mul(2))
        {
            let (left, right) = range.children(split);
            let left_iv = self
                .index
                .subinterval(&left, interval, KnownBoundary::Lower);
            let right_iv = self
                .index
                .subinterval(&right, interval, KnownBoundary::Upper);
            if left_iv.len() >= self.params.nu && right_iv.len() >= self.params.nu {
                let (near_iv, far_box, far_iv) = match near {
                    Side::Left => (left_iv, right, right_iv),
                    Side::Right => (right_iv, left, left_iv),
                };
                if self.admits(far_dist) {
                    spawn(Job {
                        priority: far_dist,
                        range: far_box,
                        interval: far_iv,
                    });
                }
                return self.admits(near_dist) && self.visit_side(range, near_iv, split, near);
            }
        }

        let mut improved = false;
        if self.admits(near_dist) {
            let hint = match near {
                Side::Left => KnownBoundary::Lower,
                Side::Right => KnownBoundary::Upper,
            };
            improved = self.enter_side(range, interval, split, near, hint);
        }
        if !self.admits(far_dist) {
            return improved;
        }
        let hint = match (near, improved) {
            (_, true) => KnownBoundary::None,
            (Side::Left, false) => KnownBoundary::Upper,
            (Side::Right, false) => KnownBoundary::Lower,
        };
        let far = match near {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        improved | self.enter_side(range, interval, split, far, hint)
    }

    /// Narrow `range` to one side of `split`, locate its interval within
    /// `parent`, recurse, and put the bound back.
    fn enter_side(
        &mut self,
        range: &mut HyperCube,
        parent: Interval,
        split: Split,
        side: Side,
        hint: KnownBoundary,
    ) -> bool {
        let dim = split.dim;
        match side {
            Side::Left => {
                let entry_kth = self.sink.kth_distance();
                let saved = range.last[dim];
                self.set_last(range, dim, saved.min(split.pos));
                let improved = if range.first[dim] <= range.last[dim] {
                    let iv = self.child_interval(range, parent, hint);
                    self.visit(range, iv)
                } else {
                    false
                };
                self.restore_last(range, dim, saved, entry_kth);
                improved
            }
            Side::Right => {
                let entry_kth = self.sink.kth_distance();
                let saved = range.first[dim];
                self.set_first(range, dim, saved.max(split.pos + 1));
                let improved = if range.first[dim] <= range.last[dim] {
                    let iv = self.child_interval(range, parent, hint);
                    self.visit(range, iv)
                } else {
                    false
                };
                self.restore_first(range, dim, saved, entry_kth);
                improved
            }
        }
    }

    /// Like `enter_side` with the child interval already computed.
    fn visit_side(
        &mut self,
        range: &mut HyperCube,
        iv: Interval,
        split: Split,
        side: Side,
    ) -> bool {
        let dim = split.dim;
        match side {
            Side::Left => {
                let entry_kth = self.sink.kth_distance();
                let saved = range.last[dim];
                self.set_last(range, dim, saved.min(split.pos));
                let improved = self.visit(range, iv);
                self.restore_last(range, dim, saved, entry_kth);
                improved
            }
            Side::Right => {
                let entry_kth = self.sink.kth_distance();
                let saved = range.first[dim];
                self.set_first(range, dim, saved.max(split.pos + 1));
                let improved = self.visit(range, iv);
                self.restore_first(range, dim, saved, entry_kth);
                improved
            }
        }
    }

    fn leaf(&mut self, range: &mut HyperCube, interval: Interval) -> bool {
        let index = self.index;
        let dims = index.dims();
        let block = &index.raw_coords()[interval.start * dims..interval.end * dims];
        let mut kth = self.sink.kth_distance();
        let mut improved = false;
        let norm = self.params.norm;
        let sink = &mut self.sink;
        scan_block(block, self.query, norm, |offset, distance| {
            if distance <= kth {
                let (inserted, now) = sink.offer(Neighbor {
                    distance,
                    key: index.key(interval.start + offset),
                });
                improved |= inserted;
                kth = now;
            }
        });
        if improved {
            let kth = self.sink.kth_distance();
            if kth != u64::MAX {
                range.crop(self.query, norm.radius(kth));
                self.corners = corner_keys(self.index, range);
            }
        }
        improved
    }
}

/// Call `visit(offset, distance)` for every descriptor in `block`, with the
/// distance loop unrolled for the common widths.
#[inline]
fn scan_block(block: &[u8], query: &[u8], norm: Norm, visit: impl FnMut(usize, u64)) {
    macro_rules! widths {
        ($($n:literal)*) => {
            match query.len() {
                $($n => scan_fixed::<$n>(block, query, norm, visit),)*
                _ => {
                    let mut visit = visit;
                    for (i, c) in block.chunks_exact(query.len()).enumerate() {
                        visit(i, norm.distance(query, c));
                    }
                }
            }
        };
    }
    widths!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16)
}

#[inline]
fn scan_fixed<const N: usize>(
    block: &[u8],
    query: &[u8],
    norm: Norm,
    mut visit: impl FnMut(usize, u64),
) {
    let q: [u8; N] = query.try_into().expect("query width");
    let rows = block.chunks_exact(N);
    match norm {
        Norm::L2 => {
            for (i, c) in rows.enumerate() {
                let mut d = 0u32;
                for j in 0..N {
                    let g = u32::from(c[j].abs_diff(q[j]));
                    d += g * g;
                }
                visit(i, u64::from(d));
            }
        }
        Norm::L1 => {
            for (i, c) in rows.enumerate() {
                let mut d = 0u32;
                for j in 0..N {
                    d += u32::from(c[j].abs_diff(q[j]));
                }
                visit(i, u64::from(d));
            }
        }
    }
}

enum Plan {
    Empty,
    /// Scan directly: a single point, or an interval short enough.
    Point,
    /// The split and the region distances of its left and right child.
    Split(Split, u64, u64),
}

/// `find_split` fused with the child region distances, in one pass.
fn plan_split(query: &[u8], range: &HyperCube, norm: Norm) -> Plan {
    let mut total = 0u64;
    let mut best_dim = 0usize;
    let mut best_diff = 0u8;
    for (d, ((&q, &f), &l)) in query.iter().zip(&range.first).zip(&range.last).enumerate() {
        if f > l {
            return Plan::Empty;
        }
        total += norm.axis_term(axis_gap(q, f, l));
        let diff = f ^ l;
        if less_most_significant_bit(best_diff, diff) {
            best_diff = diff;
            best_dim = d;
        }
    }
    if best_diff == 0 {
        return Plan::Point;
    }
    let (q, f, l) = (query[best_dim], range.first[best_dim], range.last[best_dim]);
    let low_mask = ((1u16 << (7 - best_diff.leading_zeros())) - 1) as u8;
    let split = Split {
        dim: best_dim,
        pos: f | low_mask,
    };
    let base = total - norm.axis_term(axis_gap(q, f, l));
    let left = base + norm.axis_term(axis_gap(q, f, split.pos));
    let right = base + norm.axis_term(axis_gap(q, split.pos + 1, l));
    Plan::Split(split, left, right)
}

/// Scan `interval` into `knn`; on any insertion crop `range` to the box
/// `query ± ceil(kth)`. Returns whether anything was inserted.
pub fn leaf_scan(
    index: &ZCurveIndex,
    interval: Interval,
    query: &[u8],
    knn: &mut KnnList,
    range: &mut HyperCube,
    norm: Norm,
) -> bool {
    let params = SearchParams::new(knn.capacity(), usize::MAX, usize::MAX, norm);
    let mut traversal = Traversal {
        index,
        query,
        params,
        sink: knn,
        spawn: None,
        corners: None,
    };
    traversal.leaf(range, interval)
}

/// Exact k nearest neighbors of `query` in quantized principal space, on the
/// calling thread.
pub fn knn_search(index: &ZCurveIndex, query: &[u8], params: SearchParams) -> KnnList {
    assert_eq!(query.len(), index.dims(), "query dimensionality");
    let mut list = KnnList::new(params.k.max(1));
    if index.is_empty() {
        return list;
    }
    let mut range = HyperCube::full(index.dims());
    let mut traversal = Traversal {
        index,
        query,
        params,
        sink: &mut list,
        spawn: None,
        corners: corner_keys(index, &range),
    };
    traversal.visit(&mut range, index.full_interval());
    list
}

struct ParallelSearch<'a> {
    index: &'a ZCurveIndex,
    query: &'a [u8],
    params: SearchParams,
    list: &'a Mutex<KnnList>,
    kth: &'a AtomicU64,
    jobs: &'a Mutex<BinaryHeap<Job>>,
}

impl<'a> ParallelSearch<'a> {
    /// Queue `job` and hand the pool one unit of work; whichever worker picks
    /// it up runs the closest pending region, not necessarily this one.
    fn push(&'a self, scope: &Scope<'a>, job: Job) {
        self.jobs.lock().expect("job queue poisoned").push(job);
        scope.spawn(move |scope| {
            let next = self.jobs.lock().expect("job queue poisoned").pop();
            if let Some(job) = next {
                self.run(scope, job);
            }
        });
    }

    fn run(&'a self, scope: &Scope<'a>, job: Job) {
        let sink = Shared {
            list: self.list,
            kth: self.kth,
        };
        let kth = sink.kth_distance();
        if job.priority > kth {
            return;
        }
        let mut range = job.range;
        if kth != u64::MAX {
            range.crop(self.query, self.params.norm.radius(kth));
        }
        let spawn = |job: Job| self.push(scope, job);
        let mut traversal = Traversal {
            index: self.index,
            query: self.query,
            params: self.params,
            sink,
            spawn: Some(&spawn),
            corners: corner_keys(self.index, &range),
        };
        traversal.visit(&mut range, job.interval);
    }
}

/// Same result as [`knn_search`], with large sub-regions scheduled as
/// prioritized jobs on `pool`.
pub fn knn_search_parallel(
    index: &ZCurveIndex,
    query: &[u8],
    params: SearchParams,
    pool: &ThreadPool,
) -> KnnList {
    if pool.current_num_threads() <= 1 || index.len() < params.nu.saturating_mul(2) {
        return knn_search(index, query, params);
    }
    assert_eq!(query.len(), index.dims(), "query dimensionality");
    let list = Mutex::new(KnnList::new(params.k.max(1)));
    let kth = AtomicU64::new(u64::MAX);
    let jobs = Mutex::new(BinaryHeap::new());
    let search = ParallelSearch {
        index,
        query,
        params,
        list: &list,
        kth: &kth,
        jobs: &jobs,
    };
    pool.scope(|scope| {
        search.push(
            scope,
            Job {
                priority: 0,
                range: HyperCube::full(index.dims()),
                interval: index.full_interval(),
            },
        )
    });
    list.into_inner().expect("knn list lock poisoned")
}
