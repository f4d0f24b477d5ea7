//! Axis-aligned query regions, their z-curve intervals, and distances.

use crate::zcurve::Norm;

/// Axis-aligned box in byte space, both corners inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HyperCube {
    pub first: Vec<u8>,
    pub last: Vec<u8>,
}

/// Where a region is cut: the left child keeps `..=pos` in `dim`, the right
/// child keeps `pos + 1..`. `pos` is litmax's coordinate in `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub dim: usize,
    pub pos: u8,
}

impl HyperCube {
    pub fn new(first: Vec<u8>, last: Vec<u8>) -> Self {
        debug_assert_eq!(first.len(), last.len());
        Self { first, last }
    }

    /// The whole byte cube in `dims` dimensions.
    pub fn full(dims: usize) -> Self {
        Self::new(vec![0; dims], vec![u8::MAX; dims])
    }

    pub fn point(p: &[u8]) -> Self {
        Self::new(p.to_vec(), p.to_vec())
    }

    pub fn dims(&self) -> usize {
        self.first.len()
    }

    /// A cropped range can end up with `first > last` in some dimension.
    pub fn is_empty(&self) -> bool {
        self.first.iter().zip(&self.last).any(|(f, l)| f > l)
    }

    pub fn contains(&self, p: &[u8]) -> bool {
        p.iter()
            .zip(self.first.iter().zip(&self.last))
            .all(|(v, (f, l))| f <= v && v <= l)
    }

    /// Intersect with the box `center ± radius`, clamped to the byte range.
    pub fn crop(&mut self, center: &[u8], radius: u64) {
        for (d, &c) in center.iter().enumerate() {
            let (lo, hi) = crop_bounds(c, radius);
            self.first[d] = self.first[d].max(lo);
            self.last[d] = self.last[d].min(hi);
        }
    }

    /// The cut through the dimension whose corners differ at the highest bit
    /// (ties go to the lower dimension, which is more significant in the
    /// interleave). `None` for a single point or an empty range.
    pub fn find_split(&self) -> Option<Split> {
        let mut best: Option<(usize, u8)> = None;
        for (d, (&f, &l)) in self.first.iter().zip(&self.last).enumerate() {
            if f > l {
                return None;
            }
            let diff = f ^ l;
            let beats = match best {
                None => diff != 0,
                Some((_, b)) => super::morton::less_most_significant_bit(b, diff),
            };
            if beats {
                best = Some((d, diff));
            }
        }
        best.map(|(dim, diff)| {
            let bit = 7 - diff.leading_zeros();
            let low_mask = ((1u16 << bit) - 1) as u8;
            // `first` has a zero at `bit` since first < last there.
            Split {
                dim,
                pos: self.first[dim] | low_mask,
            }
        })
    }

    /// Children of `split` as owned boxes: (left, right).
    pub fn children(&self, split: Split) -> (HyperCube, HyperCube) {
        let mut left = self.clone();
        let mut right = self.clone();
        left.last[split.dim] = split.pos;
        right.first[split.dim] = split.pos + 1;
        (left, right)
    }
}

/// `[center - radius, center + radius]` clamped to bytes.
#[inline]
pub(crate) fn crop_bounds(center: u8, radius: u64) -> (u8, u8) {
    let c = u64::from(center);
    let lo = c.saturating_sub(radius);
    let hi = c.saturating_add(radius).min(255);
    (lo as u8, hi as u8)
}

/// Per-dimension gap between a coordinate and `[first, last]`.
#[inline]
pub(crate) fn axis_gap(q: u8, first: u8, last: u8) -> u64 {
    if q < first {
        u64::from(first - q)
    } else if q > last {
        u64::from(q - last)
    } else {
        0
    }
}

/// Distance from `query` to its clamp onto `range`; squared for L2.
pub fn region_distance(query: &[u8], range: &HyperCube, norm: Norm) -> u64 {
    query
        .iter()
        .zip(range.first.iter().zip(&range.last))
        .map(|(&q, (&f, &l))| norm.axis_term(axis_gap(q, f, l)))
        .sum()
}

/// Contiguous run of index positions, half-open (`start..end`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub const fn empty() -> Self {
        Self { start: 0, end: 0 }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Inclusive last position, `None` when empty.
    pub fn last(&self) -> Option<usize> {
        (!self.is_empty()).then(|| self.end - 1)
    }
}

/// Which end of a child interval is already known from the parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnownBoundary {
    Lower,
    Upper,
    None,
}
