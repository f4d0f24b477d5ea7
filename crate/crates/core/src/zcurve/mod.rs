//! Z-curve index: patch descriptors sorted in Morton order, searched for
//! exact k nearest neighbors by recursive litmax/bigmin splitting.

mod index;
mod knn_list;
pub mod morton;
mod region;
mod search;

pub use index::ZCurveIndex;
pub use knn_list::{KnnList, Neighbor};
pub use morton::{less_most_significant_bit, morton_cmp, morton_key, morton_less};
pub use region::{region_distance, HyperCube, Interval, KnownBoundary, Split};
pub use search::{knn_search, knn_search_parallel, leaf_scan, SearchParams};

/// Distance used both in principal space and in image space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    /// Squared Euclidean; square roots are only taken for crop radii.
    #[default]
    L2,
    L1,
}

impl Norm {
    #[inline]
    pub fn axis_term(self, gap: u64) -> u64 {
        match self {
            Norm::L2 => gap * gap,
            Norm::L1 => gap,
        }
    }

    #[inline]
    pub fn distance(self, a: &[u8], b: &[u8]) -> u64 {
        match self {
            Norm::L2 => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = i32::from(x) - i32::from(y);
                    (d * d) as u32
                })
                .sum::<u32>()
                .into(),
            Norm::L1 => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| u32::from(x.abs_diff(y)))
                .sum::<u32>()
                .into(),
        }
    }

    /// Smallest integer `r` such that every point within `distance` lies in
    /// the box `± r` per axis: `ceil(sqrt(distance))` for L2.
    pub fn radius(self, distance: u64) -> u64 {
        match self {
            Norm::L1 => distance,
            Norm::L2 => {
                let mut r = (distance as f64).sqrt() as u64;
                while r * r < distance {
                    r += 1;
                }
                while r > 0 && (r - 1) * (r - 1) >= distance {
                    r -= 1;
                }
                r
            }
        }
    }

    /// The norm value of a stored distance (undoes the L2 squaring).
    pub fn to_metric(self, distance: f64) -> f64 {
        match self {
            Norm::L2 => distance.sqrt(),
            Norm::L1 => distance,
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Norm::L2),
            "l1" => Ok(Norm::L1),
            other => Err(format!("unknown norm {other:?}, expected l1 or l2")),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L2 => "l2",
            Norm::L1 => "l1",
        })
    }
}
