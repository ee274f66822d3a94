//! Flat indexing of the n-dimensional cell lattice.
//!
//! Cells are points of `[0, N)^n` stored row-major with axis 0 most
//! significant. All geometry in this crate reduces to integer arithmetic on
//! this lattice; floating point enters only through cell values.

/// Row-major strides for an `n`-dimensional cube of side `len`.
pub fn strides(n: usize, len: usize) -> Vec<usize> {
    let mut s = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * len;
    }
    s
}

/// Decode a flat cell id into per-axis coordinates.
pub fn decode(mut flat: usize, n: usize, len: usize) -> Vec<usize> {
    let mut c = vec![0usize; n];
    for i in (0..n).rev() {
        c[i] = flat % len;
        flat /= len;
    }
    c
}

/// Encode per-axis coordinates into a flat cell id.
pub fn encode(coords: &[usize], len: usize) -> usize {
    let mut flat = 0usize;
    for &c in coords {
        flat = flat * len + c;
    }
    flat
}

/// Visit every coordinate tuple of the half-open box `lo[i]..hi[i]`.
///
/// The visitor receives the coordinate tuple; iteration order is
/// lexicographic, which fixes every reduction order built on top of it.
pub fn for_each_in_box(lo: &[usize], hi: &[usize], mut visit: impl FnMut(&[usize])) {
    let n = lo.len();
    debug_assert_eq!(n, hi.len());
    if lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        visit(&cur);
        let mut axis = n;
        while axis > 0 {
            axis -= 1;
            cur[axis] += 1;
            if cur[axis] < hi[axis] {
                break;
            }
            cur[axis] = lo[axis];
            if axis == 0 {
                return;
            }
        }
    }
}

/// Visit every multi-index of `[0, len)^n`.
pub fn for_each_index(n: usize, len: usize, visit: impl FnMut(&[usize])) {
    let lo = vec![0usize; n];
    let hi = vec![len; n];
    for_each_in_box(&lo, &hi, visit);
}
