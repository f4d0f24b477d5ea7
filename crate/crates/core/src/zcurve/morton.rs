//! Z-order comparison of byte vectors without materializing the z-address.
//!
//! The z-address interleaves bits most-significant-first, dimension 0 first
//! within each bit level. Two points compare by the dimension whose XOR has
//! the highest set bit; an earlier dimension wins a tie at the same level.

use std::cmp::Ordering;

/// True iff the highest set bit of `a` is strictly below the highest set bit
/// of `b` (a zero `a` counts as lower than any non-zero `b`).
#[inline]
pub fn less_most_significant_bit(a: u8, b: u8) -> bool {
    a < b && a < (a ^ b)
}

/// Index of the dimension deciding the z-order between `a` and `b`, along
/// with the XOR in that dimension (0 when the points are equal).
#[inline]
fn deciding_dimension(a: &[u8], b: &[u8]) -> (usize, u8) {
    debug_assert_eq!(a.len(), b.len());
    let mut best_diff = 0u8;
    let mut best_dim = 0usize;
    for (dim, (&x, &y)) in a.iter().zip(b).enumerate() {
        let diff = x ^ y;
        if less_most_significant_bit(best_diff, diff) {
            best_diff = diff;
            best_dim = dim;
        }
    }
    (best_dim, best_diff)
}

/// Strict z-order: true iff the z-address of `a` is below that of `b`.
#[inline]
pub fn morton_less(a: &[u8], b: &[u8]) -> bool {
    let (dim, _) = deciding_dimension(a, b);
    a[dim] < b[dim]
}

/// Total order along the z-curve.
#[inline]
pub fn morton_cmp(a: &[u8], b: &[u8]) -> Ordering {
    let (dim, diff) = deciding_dimension(a, b);
    if diff == 0 {
        Ordering::Equal
    } else {
        a[dim].cmp(&b[dim])
    }
}

/// Bit `b` of the index moved to bit `16 * b`.
const SPREAD: [u128; 256] = {
    let mut table = [0u128; 256];
    let mut v = 0;
    while v < 256 {
        let mut bit = 0;
        while bit < 8 {
            table[v] |= (((v >> bit) & 1) as u128) << (16 * bit);
            bit += 1;
        }
        v += 1;
    }
    table
};

/// Contribution of value `v` in dimension `dim` to a scalar z-address.
#[inline]
pub(crate) fn morton_term(v: u8, dim: usize) -> u128 {
    SPREAD[v as usize] << (15 - dim)
}

/// Scalar z-address of a descriptor of at most 16 bytes, zero-padded to 16
/// dimensions; its integer order is the z-order.
#[inline]
pub fn morton_key(a: &[u8]) -> Option<u128> {
    if a.len() > 16 {
        return None;
    }
    Some(
        a.iter()
            .enumerate()
            .fold(0u128, |z, (d, &v)| z | morton_term(v, d)),
    )
}
