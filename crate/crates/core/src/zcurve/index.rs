use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::image::PatchKey;
use crate::zcurve::morton::{morton_cmp, morton_key, morton_less};
use crate::zcurve::{HyperCube, Interval, KnownBoundary};

/// Descriptors and their patch keys, sorted along the z-curve with the
/// row-major key as tie-break. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZCurveIndex {
    dims: usize,
    layout_id: usize,
    coords: Vec<u8>,
    keys: Vec<PatchKey>,
    /// Scalar z-addresses when `dims <= 16`, for cheaper interval searches.
    zkeys: Option<ScalarKeys>,
}

/// Entries between two samples.
const STRIDE: usize = 16;

/// Scalar z-addresses plus every `STRIDE`-th of them, so that a search
/// first bisects a table small enough to stay in cache.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ScalarKeys {
    all: Vec<u128>,
    sampled: Vec<u128>,
}

impl ScalarKeys {
    /// First position in `lo..hi` where `pred` turns false.
    fn partition_point(&self, lo: usize, hi: usize, pred: impl Fn(u128) -> bool) -> usize {
        if hi - lo <= 2 * STRIDE {
            return lo + self.all[lo..hi].partition_point(|&e| pred(e));
        }
        let (first, last) = (lo.div_ceil(STRIDE), (hi - 1) / STRIDE + 1);
        let p = first + self.sampled[first..last].partition_point(|&e| pred(e));
        // the answer lies after sample p - 1 and at or before sample p
        let from = if p == first { lo } else { (p - 1) * STRIDE + 1 };
        let to = (p * STRIDE).min(hi);
        from + self.all[from..to].partition_point(|&e| pred(e))
    }
}

fn scalar_keys(dims: usize, coords: &[u8]) -> Option<ScalarKeys> {
    (dims <= 16).then(|| {
        let all: Vec<u128> = coords
            .chunks_exact(dims)
            .map(|c| morton_key(c).unwrap_or(0))
            .collect();
        let sampled = all.iter().step_by(STRIDE).copied().collect();
        ScalarKeys { all, sampled }
    })
}

impl ZCurveIndex {
    /// Sort `(descriptor, key)` pairs into z-order. `coords` holds one
    /// `dims`-byte descriptor per key, back to back.
    pub fn build(
        dims: usize,
        layout_id: usize,
        coords: Vec<u8>,
        keys: Vec<PatchKey>,
    ) -> Result<Self> {
        if dims == 0 || coords.len() != dims * keys.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} descriptor bytes", dims * keys.len()),
                actual: format!("{}", coords.len()),
            });
        }
        let order: Vec<u32> = if dims <= 16 {
            let mut tagged: Vec<(u128, PatchKey, u32)> = (0..keys.len())
                .map(|i| {
                    (
                        morton_key(&coords[i * dims..][..dims]).unwrap_or(0),
                        keys[i],
                        i as u32,
                    )
                })
                .collect();
            tagged.sort_unstable();
            tagged.into_iter().map(|t| t.2).collect()
        } else {
            let mut order: Vec<u32> = (0..keys.len() as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                let (a, b) = (a as usize, b as usize);
                morton_cmp(&coords[a * dims..][..dims], &coords[b * dims..][..dims])
                    .then_with(|| keys[a].cmp(&keys[b]))
            });
            order
        };
        let mut sorted_coords = Vec::with_capacity(coords.len());
        let mut sorted_keys = Vec::with_capacity(keys.len());
        for &i in &order {
            let i = i as usize;
            sorted_coords.extend_from_slice(&coords[i * dims..][..dims]);
            sorted_keys.push(keys[i]);
        }
        Ok(Self {
            dims,
            layout_id,
            zkeys: scalar_keys(dims, &sorted_coords),
            coords: sorted_coords,
            keys: sorted_keys,
        })
    }

    /// Accept already sorted parts (e.g. read back from disk), verifying order.
    pub fn from_sorted(
        dims: usize,
        layout_id: usize,
        coords: Vec<u8>,
        keys: Vec<PatchKey>,
    ) -> Result<Self> {
        if dims == 0 || coords.len() != dims * keys.len() {
            return Err(Error::Format("descriptor table length mismatch".into()));
        }
        let index = Self {
            dims,
            layout_id,
            zkeys: scalar_keys(dims, &coords),
            coords,
            keys,
        };
        if !index.is_sorted() {
            return Err(Error::Format("entries are not in z-curve order".into()));
        }
        Ok(index)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn layout_id(&self) -> usize {
        self.layout_id
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    #[inline]
    pub fn coords(&self, i: usize) -> &[u8] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn key(&self, i: usize) -> PatchKey {
        self.keys[i]
    }

    pub fn keys(&self) -> &[PatchKey] {
        &self.keys
    }

    pub fn raw_coords(&self) -> &[u8] {
        &self.coords
    }

    pub fn full_interval(&self) -> Interval {
        Interval::new(0, self.len())
    }

    /// Strictly increasing under (z-order, key).
    pub fn is_sorted(&self) -> bool {
        (1..self.len()).all(|i| match morton_cmp(self.coords(i - 1), self.coords(i)) {
            Ordering::Less => true,
            Ordering::Equal => self.keys[i - 1] < self.keys[i],
            Ordering::Greater => false,
        })
    }

    /// Entries of `parent` whose z-address lies between the corners of
    /// `range`, by binary search confined to `parent`. A known boundary is
    /// taken from `parent` without searching.
    pub fn subinterval(
        &self,
        range: &HyperCube,
        parent: Interval,
        known: KnownBoundary,
    ) -> Interval {
        if parent.is_empty() {
            return Interval::new(parent.start, parent.start);
        }
        if self.zkeys.is_some() {
            let first = morton_key(&range.first).unwrap_or(0);
            let last = morton_key(&range.last).unwrap_or(0);
            return self.scalar_subinterval(first, last, parent, known);
        }
        let start = match known {
            KnownBoundary::Lower => parent.start,
            _ => self.partition_point(parent, |e| morton_less(e, &range.first)),
        };
        let end = match known {
            KnownBoundary::Upper => parent.end,
            _ => self.partition_point(Interval::new(start, parent.end), |e| {
                !morton_less(&range.last, e)
            }),
        };
        Interval::new(start, end.max(start))
    }

    pub(crate) fn has_scalar_keys(&self) -> bool {
        self.zkeys.is_some()
    }

    /// `subinterval` with the corners given as scalar z-addresses; only
    /// valid when `has_scalar_keys`.
    pub(crate) fn scalar_subinterval(
        &self,
        first: u128,
        last: u128,
        parent: Interval,
        known: KnownBoundary,
    ) -> Interval {
        let z = self.zkeys.as_ref().expect("scalar z-addresses");
        let start = match known {
            KnownBoundary::Lower => parent.start,
            _ => z.partition_point(parent.start, parent.end, |e| e < first),
        };
        let end = match known {
            KnownBoundary::Upper => parent.end,
            _ => z.partition_point(start, parent.end, |e| e <= last),
        };
        Interval::new(start, end.max(start))
    }

    /// First position in `within` where `pred` turns false (`pred` must be
    /// true on a prefix of `within`).
    fn partition_point(&self, within: Interval, pred: impl Fn(&[u8]) -> bool) -> usize {
        let (mut lo, mut hi) = (within.start, within.end);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(self.coords(mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}
