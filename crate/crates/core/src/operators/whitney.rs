//! Fourier compression of the Riesz kernel on Whitney pairs.
//!
//! A Whitney pair `(Q, R)` of same-size, well-separated cubes supports the
//! expansion of the windowed kernel `K_j(x-y) η_Q(x) η_R(y)` in a product
//! Fourier basis on `(1+ε)Q × (1+ε)R`. The coefficients
//! `Υ_l = √(|Q||R|)·c_l` decay rapidly in `|l|`, which is what makes the
//! kernel compressible off the diagonal. Everything here happens in local
//! unwrapped coordinates around the pair: the separation window keeps the
//! minimal-image branch constant on `Q × R`, and the enlarged windows never
//! touch the diagonal.

use super::riesz::{kernel_value, KernelNormalization};
use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{TorusGrid, WhitneyPair};
use crate::lattice;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct WhitneyExpansion {
    /// 1-based Riesz direction.
    pub j: usize,
    /// Frequency box bound: coefficients for `|l|_∞ ≤ l_max`, `l ∈ Z^{2n}`.
    pub l_max: usize,
    /// Window enlargement ε.
    pub eps_window: f64,
    /// Per-axis mode count `2·l_max + 1`.
    pub modes: usize,
    /// Row-major table over `[0, modes)^{2n}`, axis order `(x-axes, y-axes)`;
    /// index `i` stands for frequency `i - l_max`.
    pub coeffs: Vec<Complex64>,
    /// `|Υ_l| = √(|Q||R|) |c_l|` in the same layout.
    pub upsilon: Vec<f64>,
    /// Relative L² error of the truncated series against the true kernel on
    /// the cell pairs of `Q × R`.
    pub reconstruction_rel_l2: f64,
}

impl WhitneyExpansion {
    pub fn coeff(&self, l: &[i64]) -> Complex64 {
        self.coeffs[self.flat(l)]
    }

    pub fn upsilon_abs(&self, l: &[i64]) -> f64 {
        self.upsilon[self.flat(l)]
    }

    fn flat(&self, l: &[i64]) -> usize {
        let mut idx = 0usize;
        for &li in l {
            let shifted = (li + self.l_max as i64) as usize;
            debug_assert!(shifted < self.modes);
            idx = idx * self.modes + shifted;
        }
        idx
    }

    /// Magnitudes on the shell `|l|_∞ = s`.
    pub fn shell_magnitudes(&self, s: usize) -> Vec<f64> {
        let dims = (0..self.dims_len()).map(|_| self.modes).collect::<Vec<_>>();
        let mut out = Vec::new();
        let total: usize = dims.iter().product();
        for flat in 0..total {
            let idx = lattice::decode(flat, dims.len(), self.modes);
            let linf = idx
                .iter()
                .map(|&i| (i as i64 - self.l_max as i64).unsigned_abs() as usize)
                .max()
                .unwrap_or(0);
            if linf == s {
                out.push(self.upsilon[flat]);
            }
        }
        out
    }

    fn dims_len(&self) -> usize {
        // table is [modes]^{2n}
        let mut d = 0;
        let mut size = 1usize;
        while size < self.coeffs.len() {
            size *= self.modes;
            d += 1;
        }
        d
    }
}

/// Smooth window: 1 on `[-1/2, 1/2]`, 0 outside `[-(1+ε)/2, (1+ε)/2]`,
/// glued with the standard `exp(-1/s)` ramp.
fn window(t: f64, eps: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 0.5 * (1.0 + eps) {
        return 0.0;
    }
    let u = (a - 0.5) / (0.5 * eps);
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    g(1.0 - u) / (g(1.0 - u) + g(u))
}

/// Expand the windowed kernel of one Whitney pair.
///
/// `quad_per_axis` is the midpoint-rule sampling density (per axis of the
/// `2n`-dimensional window box); it must exceed `2·l_max + 1` to keep the
/// wanted band alias-free.
pub fn whitney_kernel_coefficients(
    grid: &TorusGrid,
    pair: &WhitneyPair,
    j: usize,
    l_max: usize,
    eps_window: f64,
    quad_per_axis: usize,
) -> Result<WhitneyExpansion> {
    let n = grid.dim();
    if j == 0 || j > n {
        return Err(Error::DimensionMismatch(format!("direction {j} for n = {n}")));
    }
    if !(eps_window > 0.0 && eps_window < 2.0) {
        return Err(Error::Config("window enlargement must be in (0, 2)".into()));
    }
    if quad_per_axis <= 2 * l_max + 1 {
        return Err(Error::Config("quadrature density below the frequency band".into()));
    }
    let axis = j - 1;
    let side = pair.p1.side();
    if (pair.p2.side() - side).abs() > 1e-15 {
        return Err(Error::DimensionMismatch("Whitney pair cubes differ in size".into()));
    }
    // local coordinates: Q centered at origin, R at the minimal-image offset
    let cq = pair.p1.center(grid);
    let cr = pair.p2.center(grid);
    let offset: Vec<f64> = cq
        .iter()
        .zip(&cr)
        .map(|(&a, &b)| {
            let d = (b - a).rem_euclid(1.0);
            if d > 0.5 {
                d - 1.0
            } else {
                d
            }
        })
        .collect();
    let w = (1.0 + eps_window) * side;
    // windows must avoid the diagonal: the two boxes may not overlap on every axis
    let disjoint = offset.iter().any(|&o| o.abs() >= w);
    if !disjoint {
        return Err(Error::WindowsOverlapDiagonal);
    }

    let m = quad_per_axis;
    let dims = vec![m; 2 * n];
    let total: usize = dims.iter().product();
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    // midpoint nodes in box coordinates: t = (idx + 1/2)/m - 1/2 ∈ (-1/2, 1/2)
    let node = |idx: usize| (idx as f64 + 0.5) / m as f64 - 0.5;
    let mut coords = vec![0usize; 2 * n];
    for (flat, s) in samples.iter_mut().enumerate() {
        let mut rest = flat;
        for i in (0..2 * n).rev() {
            coords[i] = rest % m;
            rest /= m;
        }
        let mut u = vec![0.0; n];
        let mut eta = 1.0;
        for i in 0..n {
            let tx = node(coords[i]);
            let ty = node(coords[n + i]);
            // x ∈ Q-window at origin, y ∈ R-window at offset
            let x = tx * w;
            let y = offset[i] + ty * w;
            u[i] = x - y;
            eta *= window(tx * (1.0 + eps_window), eps_window)
                * window(ty * (1.0 + eps_window), eps_window);
        }
        if eta != 0.0 {
            *s = Complex64::new(kernel_value(&u, axis, KernelNormalization::PaperUnnormalized) * eta, 0.0);
        }
    }
    fft::forward(&mut samples, &dims);

    // extract the centered band with midpoint-phase correction
    let modes = 2 * l_max + 1;
    let band_total = modes.pow(2 * n as u32);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); band_total];
    let vol_factor = side.powi(n as i32); // √(|Q||R|) = ℓ^n for equal cubes
    let mut upsilon = vec![0.0; band_total];
    for flat in 0..band_total {
        let idx = lattice::decode(flat, 2 * n, modes);
        let mut src = 0usize;
        let mut phase = Complex64::new(1.0, 0.0);
        for &i in &idx {
            let l = i as i64 - l_max as i64;
            let bin = l.rem_euclid(m as i64) as usize;
            src = src * m + bin;
            // e^{-2πi l (0.5/m - 0.5)}
            let ang = -2.0 * std::f64::consts::PI * l as f64 * (0.5 / m as f64 - 0.5);
            phase *= Complex64::from_polar(1.0, ang);
        }
        let c = samples[src] * phase / total as f64;
        coeffs[flat] = c;
        upsilon[flat] = c.norm() * vol_factor;
    }

    // reconstruction error on the cell pairs of Q × R
    let rel = reconstruction_error(grid, pair, axis, &coeffs, l_max, modes, &offset, w)?;

    Ok(WhitneyExpansion {
        j,
        l_max,
        eps_window,
        modes,
        coeffs,
        upsilon,
        reconstruction_rel_l2: rel,
    })
}

#[allow(clippy::too_many_arguments)]
fn reconstruction_error(
    grid: &TorusGrid,
    pair: &WhitneyPair,
    axis: usize,
    coeffs: &[Complex64],
    l_max: usize,
    modes: usize,
    offset: &[f64],
    w: f64,
) -> Result<f64> {
    let n = grid.dim();
    // local cell coordinates inside each cube
    let cq = pair.p1.center(grid);
    let mut xs: Vec<Vec<f64>> = Vec::new();
    pair.p1.region(grid).for_each_cell(grid, |c| {
        let cc = grid.cell_center(c);
        let local: Vec<f64> = cc
            .iter()
            .zip(&cq)
            .map(|(&a, &q)| {
                let d = (a - q).rem_euclid(1.0);
                if d > 0.5 {
                    d - 1.0
                } else {
                    d
                }
            })
            .collect();
        xs.push(local);
    });
    let cr = pair.p2.center(grid);
    let mut ys: Vec<Vec<f64>> = Vec::new();
    pair.p2.region(grid).for_each_cell(grid, |c| {
        let cc = grid.cell_center(c);
        let local: Vec<f64> = cc
            .iter()
            .zip(&cr)
            .map(|(&a, &q)| {
                let d = (a - q).rem_euclid(1.0);
                if d > 0.5 {
                    d - 1.0
                } else {
                    d
                }
            })
            .collect();
        ys.push(local);
    });
    // tensor basis values per cell, factorized into x and y parts
    let half_modes = modes.pow(n as u32);
    let basis = |locals: &[Vec<f64>]| -> Vec<Vec<Complex64>> {
        locals
            .iter()
            .map(|loc| {
                let mut row = vec![Complex64::new(0.0, 0.0); half_modes];
                for flat in 0..half_modes {
                    let idx = lattice::decode(flat, n, modes);
                    let mut ang = 0.0;
                    for (i, &ii) in idx.iter().enumerate() {
                        let l = ii as i64 - l_max as i64;
                        // box coordinate of the point: t = local/w ∈ (-1/2, 1/2)
                        ang += 2.0 * std::f64::consts::PI * l as f64 * (loc[i] / w);
                    }
                    row[flat] = Complex64::from_polar(1.0, ang);
                }
                row
            })
            .collect()
    };
    let ex = basis(&xs);
    let ey = basis(&ys);
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, xloc) in xs.iter().enumerate() {
        for (yi, yloc) in ys.iter().enumerate() {
            let u: Vec<f64> = xloc
                .iter()
                .zip(yloc)
                .enumerate()
                .map(|(i, (&a, &b))| a - (offset[i] + b))
                .collect();
            let truth = kernel_value(&u, axis, KernelNormalization::PaperUnnormalized);
            let mut approx = Complex64::new(0.0, 0.0);
            for lx in 0..half_modes {
                if ex[xi][lx].norm_sqr() == 0.0 {
                    continue;
                }
                let mut inner = Complex64::new(0.0, 0.0);
                for ly in 0..half_modes {
                    inner += coeffs[lx * half_modes + ly] * ey[yi][ly];
                }
                approx += ex[xi][lx] * inner;
            }
            num += (approx.re - truth).powi(2) + approx.im.powi(2);
            den += truth * truth;
        }
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system, Shift, TorusGrid, WhitneyPair};

    /// The level-3 pair with index offset (3,3): center distance exactly
    /// 3√2·ℓ, the lower Whitney edge; all Q×R displacements stay on one
    /// minimal-image branch.
    fn level3_pair(grid: &TorusGrid) -> WhitneyPair {
        let sys = build_system(grid, &Shift::zero(2)).unwrap();
        let p1 = sys.level(3)[0].clone();
        let p2 = crate::grid::DyadicCube {
            omega: p1.omega.clone(),
            level: 3,
            index: vec![(p1.index[0] + 3) % 8, (p1.index[1] + 3) % 8],
        };
        let d = grid.torus_distance(&p1.center(grid), &p2.center(grid));
        WhitneyPair { p1, p2, distance: d }
    }

    #[test]
    fn zero_mode_is_windowed_average() {
        let grid = TorusGrid::new(2, 4).unwrap();
        let pair = level3_pair(&grid);
        let exp = whitney_kernel_coefficients(&grid, &pair, 1, 2, 0.25, 24).unwrap();
        // direct midpoint quadrature of the windowed kernel over both boxes
        let side = pair.p1.side();
        let w = 1.25 * side;
        let cq = pair.p1.center(&grid);
        let cr = pair.p2.center(&grid);
        let offset: Vec<f64> = cq
            .iter()
            .zip(&cr)
            .map(|(&a, &b)| {
                let d: f64 = (b - a).rem_euclid(1.0);
                if d > 0.5 { d - 1.0 } else { d }
            })
            .collect();
        let m = 24usize;
        let node = |i: usize| (i as f64 + 0.5) / m as f64 - 0.5;
        let mut acc = 0.0;
        let mut count = 0usize;
        for x0 in 0..m {
            for x1 in 0..m {
                for y0 in 0..m {
                    for y1 in 0..m {
                        let tx = [node(x0), node(x1)];
                        let ty = [node(y0), node(y1)];
                        let u = [
                            tx[0] * w - (offset[0] + ty[0] * w),
                            tx[1] * w - (offset[1] + ty[1] * w),
                        ];
                        let eta: f64 = tx
                            .iter()
                            .chain(ty.iter())
                            .map(|&t| window(t * 1.25, 0.25))
                            .product();
                        if eta != 0.0 {
                            acc += kernel_value(&u, 0, KernelNormalization::PaperUnnormalized) * eta;
                        }
                        count += 1;
                    }
                }
            }
        }
        let avg = acc / count as f64;
        let c0 = exp.coeff(&[0, 0, 0, 0]);
        assert!((c0.re - avg).abs() < 1e-12 * avg.abs().max(1e-6));
        assert!(c0.im.abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_decay() {
        let grid = TorusGrid::new(2, 4).unwrap();
        let pair = level3_pair(&grid);
        let exp = whitney_kernel_coefficients(&grid, &pair, 1, 8, 1.0, 40).unwrap();
        assert!(
            exp.reconstruction_rel_l2 <= 0.05,
            "reconstruction error {} above 5%",
            exp.reconstruction_rel_l2
        );
        let outer = exp.shell_magnitudes(8);
        let mut inner = exp.shell_magnitudes(1);
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = inner[inner.len() / 2];
        let max_outer = outer.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            max_outer <= median / 10.0,
            "decay witness failed: max |Υ| at shell 8 = {max_outer}, median at shell 1 = {median}"
        );
    }

    #[test]
    fn overlapping_windows_rejected() {
        let grid = TorusGrid::new(2, 4).unwrap();
        let sys = build_system(&grid, &Shift::zero(2)).unwrap();
        let p1 = sys.level(3)[0].clone();
        let p2 = sys.level(3)[1].clone(); // adjacent: windows meet the diagonal
        let d = grid.torus_distance(&p1.center(&grid), &p2.center(&grid));
        let pair = WhitneyPair { p1, p2, distance: d };
        assert!(matches!(
            whitney_kernel_coefficients(&grid, &pair, 1, 2, 0.25, 16),
            Err(Error::WindowsOverlapDiagonal)
        ));
    }
}
