use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::image::PatchKey;

/// A candidate: distance in quantized principal space (squared for L2) and
/// the patch it belongs to. Orders by distance, then row-major key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighbor {
    pub distance: u64,
    pub key: PatchKey,
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .cmp(&other.distance)
            .then_with(|| self.key.cmp(&other.key))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded best-k set, kept as a max-heap on `(distance, key)`.
#[derive(Debug, Clone)]
pub struct KnnList {
    capacity: usize,
    heap: BinaryHeap<Neighbor>,
}

impl KnnList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "knn list needs room for one entry");
        Self {
            capacity,
            heap: BinaryHeap::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.capacity
    }

    /// Largest kept distance once full; `u64::MAX` (unbounded) before.
    #[inline]
    pub fn kth_distance(&self) -> u64 {
        if self.is_full() {
            self.heap.peek().map_or(u64::MAX, |n| n.distance)
        } else {
            u64::MAX
        }
    }

    pub fn worst(&self) -> Option<Neighbor> {
        self.heap.peek().copied()
    }

    /// Insert `n` if the list has room or `n` beats the current worst entry,
    /// evicting the largest `(distance, key)` on overflow.
    pub fn insert(&mut self, n: Neighbor) -> bool {
        if self.is_full() {
            match self.heap.peek() {
                Some(worst) if n < *worst => {}
                _ => return false,
            }
            self.heap.pop();
        }
        self.heap.push(n);
        true
    }

    /// Entries in ascending `(distance, key)` order.
    pub fn into_sorted_vec(self) -> Vec<Neighbor> {
        self.heap.into_sorted_vec()
    }

    pub fn to_sorted_vec(&self) -> Vec<Neighbor> {
        self.clone().into_sorted_vec()
    }
}
