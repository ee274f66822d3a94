//! Small n-dimensional FFT on top of rustfft: 1-D transforms applied along
//! each axis of a row-major hypercube (and general cuboid) buffer.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place forward DFT of a row-major array with the given per-axis sizes.
/// Unnormalized: `F[m] = Σ_c f[c] e^{-2πi m·c/N}` per axis.
pub fn forward(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, false);
}

/// In-place inverse DFT, normalized by the total size.
pub fn inverse(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, true);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

fn transform(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(total, data.len(), "dims do not match buffer length");
    let mut planner = FftPlanner::new();
    let n = dims.len();
    // strides for row-major layout, axis 0 most significant
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut scratch = Vec::new();
    for axis in 0..n {
        let len = dims[axis];
        if len == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        scratch.resize(len, Complex64::new(0.0, 0.0));
        let stride = strides[axis];
        let lines = total / len;
        for line in 0..lines {
            // base index of this 1-D line
            let block = line / stride;
            let offset = line % stride;
            let base = block * stride * len + offset;
            for i in 0..len {
                scratch[i] = data[base + i * stride];
            }
            fft.process(&mut scratch);
            for i in 0..len {
                data[base + i * stride] = scratch[i];
            }
        }
    }
}
