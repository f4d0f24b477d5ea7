//! The eight pixel subsets of a K×K patch, one per index.

use crate::error::{Error, Result};

/// Where a layout is centered: an edge midpoint or a corner of the patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anchor {
    North,
    East,
    South,
    West,
    NorthWest,
    NorthEast,
    SouthWest,
    SouthEast,
}

impl Anchor {
    /// In layout-id order.
    pub const ALL: [Anchor; 8] = [
        Anchor::North,
        Anchor::East,
        Anchor::South,
        Anchor::West,
        Anchor::NorthWest,
        Anchor::NorthEast,
        Anchor::SouthWest,
        Anchor::SouthEast,
    ];

    /// Patch-local `(row, col)` of the anchor.
    pub fn position(self, size: usize) -> (usize, usize) {
        let (h, e) = ((size - 1) / 2, size - 1);
        match self {
            Anchor::North => (0, h),
            Anchor::East => (h, e),
            Anchor::South => (e, h),
            Anchor::West => (h, 0),
            Anchor::NorthWest => (0, 0),
            Anchor::NorthEast => (0, e),
            Anchor::SouthWest => (e, 0),
            Anchor::SouthEast => (e, e),
        }
    }

    /// Maps an offset of the canonical layout (north for edges, north-west
    /// for corners) onto this anchor's layout.
    fn transform(self, (r, c): (usize, usize), size: usize) -> (usize, usize) {
        let e = size - 1;
        match self {
            Anchor::North | Anchor::NorthWest => (r, c),
            Anchor::East => (c, e - r),
            Anchor::South | Anchor::SouthWest => (e - r, c),
            Anchor::West => (c, r),
            Anchor::NorthEast => (r, e - c),
            Anchor::SouthEast => (e - r, e - c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetLayout {
    pub id: usize,
    pub anchor: Anchor,
    pub size: usize,
    /// Patch-local `(row, col)` offsets in row-major order.
    pub offsets: Vec<(usize, usize)>,
}

impl SubsetLayout {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Flat pixel indices (`row * size + col`) within the patch.
    pub fn pixel_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.iter().map(move |&(r, c)| r * self.size + c)
    }

    /// Number of this layout's pixels flagged in `known` (length `size²`).
    pub fn overlap(&self, known: &[bool]) -> usize {
        self.pixel_indices().filter(|&i| known[i]).count()
    }
}

/// Pixels per layout: `c·K²` rounded half away from zero.
pub fn subset_size(size: usize, coverage: f64) -> usize {
    (coverage * (size * size) as f64).round() as usize
}

/// The `subset_size` offsets closest to `anchor`, distance ties broken in
/// row-major order.
fn nearest_offsets(size: usize, anchor: (usize, usize), count: usize) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..size)
        .flat_map(|r| (0..size).map(move |c| (r, c)))
        .collect();
    let dist = |&(r, c): &(usize, usize)| {
        let dr = r.abs_diff(anchor.0);
        let dc = c.abs_diff(anchor.1);
        dr * dr + dc * dc
    };
    // stable sort keeps row-major order among equal distances
    all.sort_by_key(dist);
    all.truncate(count);
    all
}

/// Build the four edge-midpoint layouts followed by the four corner layouts.
///
/// The north and north-west layouts are selected directly; the others are
/// their images under the symmetries of the square, so equidistant pixels
/// cut at the boundary are chosen consistently across all eight.
pub fn build_subset_layouts(size: usize, coverage: f64) -> Result<Vec<SubsetLayout>> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "patch size must be odd and at least 3, got {size}"
        )));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::Config(format!(
            "coverage must lie in (0, 1], got {coverage}"
        )));
    }
    let count = subset_size(size, coverage);
    if count == 0 {
        return Err(Error::Config(format!(
            "coverage {coverage} selects no pixels of a {size}x{size} patch"
        )));
    }
    let edge = nearest_offsets(size, Anchor::North.position(size), count);
    let corner = nearest_offsets(size, Anchor::NorthWest.position(size), count);
    Ok(Anchor::ALL
        .iter()
        .enumerate()
        .map(|(id, &anchor)| {
            let canonical = if id < 4 { &edge } else { &corner };
            let mut offsets: Vec<(usize, usize)> = canonical
                .iter()
                .map(|&o| anchor.transform(o, size))
                .collect();
            offsets.sort_unstable();
            SubsetLayout {
                id,
                anchor,
                size,
                offsets,
            }
        })
        .collect())
}
