//! Discrete Riesz transforms on the torus.
//!
//! Multiplier mode applies the symbol `-i ξ_j/|ξ|` on centered integer
//! frequencies (zero at `ξ = 0` and on the `ξ_j = N/2` Nyquist rows, which
//! keeps the symbol odd so the matrix is real and skew-symmetric). Kernel
//! mode evaluates `K_j(u) = u_j/|u|^{n+1}` at torus-minimal displacements
//! with the diagonal cell removed; `n = 1` reduces to the Hilbert transform.

use super::DenseOperator;
use crate::error::{Error, Result};
use crate::fft;
use crate::field::GridFunction;
use crate::grid::TorusGrid;
use crate::lattice;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RieszMode {
    Multiplier,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelNormalization {
    /// `K_j(u) = u_j / |u|^{n+1}`, no dimensional constant.
    PaperUnnormalized,
    /// Multiplied by `Γ((n+1)/2) / π^{(n+1)/2}`.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RieszSpec {
    /// Direction, 1-based: `j ∈ [1, n]`.
    pub j: usize,
    pub mode: RieszMode,
    pub normalization: KernelNormalization,
}

impl RieszSpec {
    pub fn multiplier(j: usize) -> RieszSpec {
        RieszSpec { j, mode: RieszMode::Multiplier, normalization: KernelNormalization::PaperUnnormalized }
    }

    pub fn kernel(j: usize) -> RieszSpec {
        RieszSpec { j, mode: RieszMode::Kernel, normalization: KernelNormalization::PaperUnnormalized }
    }

    fn axis(&self, n: usize) -> Result<usize> {
        if self.j == 0 || self.j > n {
            return Err(Error::DimensionMismatch(format!("Riesz direction {} for n = {n}", self.j)));
        }
        Ok(self.j - 1)
    }
}

/// `Γ((n+1)/2) / π^{(n+1)/2}` for integer n ≥ 1.
pub fn classical_constant(n: usize) -> f64 {
    let z = (n + 1) as f64 / 2.0;
    gamma_half_integer(n + 1) / std::f64::consts::PI.powf(z)
}

/// Γ(m/2) for integer m ≥ 1.
fn gamma_half_integer(m: usize) -> f64 {
    if m % 2 == 0 {
        // Γ(k) = (k-1)!
        let k = m / 2;
        (1..k).map(|i| i as f64).product()
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let k = (m - 1) / 2;
        let fact = |j: usize| (1..=j).map(|i| i as f64).product::<f64>();
        fact(2 * k) * std::f64::consts::PI.sqrt() / (4.0f64.powi(k as i32) * fact(k))
    }
}

/// Kernel value at a displacement vector (already torus-reduced or local).
pub fn kernel_value(u: &[f64], axis: usize, normalization: KernelNormalization) -> f64 {
    let n = u.len();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let base = u[axis] / norm.powi(n as i32 + 1);
    match normalization {
        KernelNormalization::PaperUnnormalized => base,
        KernelNormalization::Classical => base * classical_constant(n),
    }
}

/// Centered frequency of DFT bin `k`: `ξ ∈ (-N/2, N/2]`.
fn centered(k: usize, nn: usize) -> i64 {
    if k <= nn / 2 {
        k as i64
    } else {
        k as i64 - nn as i64
    }
}

/// The multiplier table over all frequency bins.
fn multiplier_table(grid: &TorusGrid, axis: usize) -> Vec<Complex64> {
    let n = grid.dim();
    let nn = grid.samples_per_axis();
    let mut m = vec![Complex64::new(0.0, 0.0); grid.cells()];
    for (flat, entry) in m.iter_mut().enumerate() {
        let bins = lattice::decode(flat, n, nn);
        let xi: Vec<i64> = bins.iter().map(|&k| centered(k, nn)).collect();
        if xi.iter().all(|&v| v == 0) {
            continue;
        }
        if xi[axis].unsigned_abs() as usize == nn / 2 {
            continue; // Nyquist row in the transform direction stays zero
        }
        let norm = (xi.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
        *entry = Complex64::new(0.0, -(xi[axis] as f64) / norm);
    }
    m
}

/// Apply the transform to a grid function.
pub fn riesz_apply(grid: &TorusGrid, spec: &RieszSpec, f: &GridFunction) -> Result<GridFunction> {
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let axis = spec.axis(grid.dim())?;
    match spec.mode {
        RieszMode::Multiplier => {
            let dims = vec![grid.samples_per_axis(); grid.dim()];
            let mut buf: Vec<Complex64> =
                f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft::forward(&mut buf, &dims);
            for (v, m) in buf.iter_mut().zip(multiplier_table(grid, axis)) {
                *v *= m;
            }
            fft::inverse(&mut buf, &dims);
            GridFunction::from_values(grid, buf.iter().map(|v| v.re).collect())
        }
        RieszMode::Kernel => {
            let op = riesz_matrix(grid, spec)?;
            op.apply(f)
        }
    }
}

/// Materialize the transform as a dense matrix over the cell basis.
pub fn riesz_matrix(grid: &TorusGrid, spec: &RieszSpec) -> Result<DenseOperator> {
    let n = grid.dim();
    let axis = spec.axis(n)?;
    let nn = grid.samples_per_axis();
    let cells = grid.cells();
    let mut op = DenseOperator::zeros(cells, cells);
    op.grid = Some(*grid);
    match spec.mode {
        RieszMode::Multiplier => {
            // impulse response: the operator is convolution by r = F^{-1} m
            let dims = vec![nn; n];
            let mut buf = multiplier_table(grid, axis);
            fft::inverse(&mut buf, &dims);
            let r: Vec<f64> = buf.iter().map(|v| v.re).collect();
            for x in 0..cells {
                let cx = lattice::decode(x, n, nn);
                for y in 0..cells {
                    let cy = lattice::decode(y, n, nn);
                    let mut d = 0usize;
                    for i in 0..n {
                        d = d * nn + (cx[i] + nn - cy[i]) % nn;
                    }
                    op.data[x * cells + y] = r[d];
                }
            }
        }
        RieszMode::Kernel => {
            let hv = grid.cell_volume();
            let h = grid.cell_width();
            for x in 0..cells {
                let cx = lattice::decode(x, n, nn);
                'col: for y in 0..cells {
                    if x == y {
                        continue;
                    }
                    let cy = lattice::decode(y, n, nn);
                    // torus-minimal displacement of cell centers; the
                    // antipodal displacement in the transform direction is
                    // self-paired (sign ambiguous), so it is zeroed like the
                    // Nyquist rows of the multiplier
                    let mut u = vec![0.0; n];
                    for i in 0..n {
                        let d = (cx[i] as i64 - cy[i] as i64).rem_euclid(nn as i64) as usize;
                        if i == axis && 2 * d == nn {
                            continue 'col;
                        }
                        let d = if d > nn / 2 { d as i64 - nn as i64 } else { d as i64 };
                        u[i] = d as f64 * h;
                    }
                    op.data[x * cells + y] = hv * kernel_value(&u, axis, spec.normalization);
                }
            }
        }
    }
    Ok(op)
}

/// Matrix of the commutator `[b, R_j] = M_b R_j - R_j M_b`:
/// entry `(x, y)` is `(b(x) - b(y)) · R[x, y]`.
pub fn commutator_matrix(grid: &TorusGrid, b: &GridFunction, spec: &RieszSpec) -> Result<DenseOperator> {
    if b.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let mut op = riesz_matrix(grid, spec)?;
    let cells = grid.cells();
    for x in 0..cells {
        let bx = b.value(x);
        for y in 0..cells {
            op.data[x * cells + y] *= bx - b.value(y);
        }
    }
    Ok(op)
}
