//! Tensor-product Haar system of a shifted dyadic system.
//!
//! Cubes at levels `0..L-1` carry the `2^n - 1` cancellative Haar functions
//! built from the per-axis factors
//!
//! ```text
//!   h^(1) = |I|^{-1/2} 1_I,      h^(0) = |I|^{-1/2} (1_{I-} - 1_{I+}),
//! ```
//!
//! `I-` the lower half. Every `h_Q^ε` has modulus `|Q|^{-1/2}` on `Q` and is
//! constant on the children of `Q`. The finest Haar level is `L`: a level-L
//! cube still holds `3^n` cells (because `N = 3·2^L`), so the transform is
//! completed by a fine-remainder block `b - E_L b` that makes the roundtrip
//! exact without giving up the exact 1/3-shifts.

use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::grid::{DyadicCube, DyadicSystem, TorusGrid};
use crate::lattice;

/// Haar signature `ε ∈ {0,1}^n`, packed with axis 0 in the top bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    bits: u32,
    n: u8,
}

impl Signature {
    pub fn new(bits: u32, n: usize) -> Signature {
        debug_assert!(bits < (1 << n));
        Signature { bits, n: n as u8 }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn axis(&self, i: usize) -> u8 {
        ((self.bits >> (self.n as usize - 1 - i)) & 1) as u8
    }

    pub fn is_cancellative(&self) -> bool {
        self.bits != (1 << self.n) - 1
    }

    /// The `2^n - 1` cancellative signatures in binary order of the packed
    /// bits, `ε ≡ 1` excluded.
    pub fn cancellative(n: usize) -> Vec<Signature> {
        (0..(1u32 << n) - 1).map(|b| Signature::new(b, n)).collect()
    }

    pub fn non_cancellative(n: usize) -> Signature {
        Signature::new((1 << n) - 1, n)
    }

    /// Sign of `h_Q^ε` on the child with offset bits `t` (times `|Q|^{-1/2}`).
    pub fn child_sign(&self, t: usize) -> f64 {
        let n = self.n as usize;
        let mut s = 1.0;
        for axis in 0..n {
            let eps = (self.bits >> (n - 1 - axis)) & 1;
            let tb = (t >> (n - 1 - axis)) & 1;
            if eps == 0 && tb == 1 {
                s = -s;
            }
        }
        s
    }
}

/// Pointwise Haar function on the grid. Cancellative signatures need
/// `level(Q) < L`; the non-cancellative `h¹_Q = 1_Q/√|Q|` exists at any level.
pub fn haar_function(grid: &TorusGrid, cube: &DyadicCube, eps: &Signature) -> Result<GridFunction> {
    let n = grid.dim();
    if eps.is_cancellative() && cube.level >= grid.max_level() {
        return Err(Error::HaarLevelTooFine(cube.level));
    }
    let mut out = GridFunction::zeros(grid);
    let amp = cube.volume().sqrt().recip();
    let anchor = cube.anchor_cells(grid);
    let side = cube.side_cells(grid);
    let half = side / 2;
    let nn = grid.samples_per_axis();
    let region = cube.region(grid);
    region.for_each_cell(grid, |cell| {
        let coords = lattice::decode(cell, n, nn);
        let mut sign = 1.0;
        for i in 0..n {
            if eps.axis(i) == 0 {
                let off = (coords[i] + nn - anchor[i]) % nn;
                if off >= half {
                    sign = -sign;
                }
            }
        }
        out.values_mut()[cell] = sign * amp;
    });
    Ok(out)
}

/// Haar analysis of one grid function against one system.
#[derive(Debug, Clone)]
pub struct HaarCoefficients {
    grid: TorusGrid,
    omega: u16,
    /// Global average `⟨b⟩`.
    pub coarse: f64,
    /// `coeff[k][cube * (2^n - 1) + sig]` for levels `k = 0..L-1`.
    coeff: Vec<Vec<f64>>,
    /// Cell-level remainder `b - E_L b`.
    fine: Vec<f64>,
}

fn sig_count(n: usize) -> usize {
    (1 << n) - 1
}

/// Per-level cube averages, bottom-up. `averages[k]` is indexed by the flat
/// cube index at level k.
pub fn cube_averages(b: &GridFunction, system: &DyadicSystem) -> Vec<Vec<f64>> {
    let grid = *system.grid();
    let n = grid.dim();
    let big_l = grid.max_level();
    let nn = grid.samples_per_axis();
    let mut averages: Vec<Vec<f64>> = Vec::with_capacity(big_l + 1);
    for k in 0..=big_l {
        averages.push(vec![0.0; 1usize << (k * n)]);
    }
    // level L from cells
    {
        let cells_per = 3usize.pow(n as u32);
        let lvl = big_l;
        let avgs = &mut averages[lvl];
        for cell in 0..grid.cells() {
            let coords = lattice::decode(cell, n, nn);
            let q = system.cube_at_cell(lvl, &coords);
            let flat = system.flat_index(&q);
            avgs[flat] += b.value(cell);
        }
        for a in avgs.iter_mut() {
            *a /= cells_per as f64;
        }
    }
    // coarser levels from children
    for k in (0..big_l).rev() {
        let mut avgs = vec![0.0; 1usize << (k * n)];
        for q in system.level(k) {
            let flat = system.flat_index(q);
            let mut sum = 0.0;
            for child in q.children(&grid).expect("level < L") {
                sum += averages[k + 1][system.flat_index(&child)];
            }
            avgs[flat] = sum / (1 << n) as f64;
        }
        averages[k] = avgs;
    }
    averages
}

/// Haar analysis. Exact on grid functions: the cell-scale detail below the
/// finest Haar level is kept in the fine-remainder block.
pub fn analyze(b: &GridFunction, system: &DyadicSystem) -> Result<HaarCoefficients> {
    if !b.is_finite() {
        return Err(Error::NonFinite);
    }
    if b.grid() != system.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *system.grid();
    let n = grid.dim();
    let big_l = grid.max_level();
    let sigs = sig_count(n);
    let averages = cube_averages(b, system);
    let mut coeff: Vec<Vec<f64>> = Vec::with_capacity(big_l);
    for k in 0..big_l {
        let mut level_coeff = vec![0.0; (1usize << (k * n)) * sigs];
        for q in system.level(k) {
            let flat = system.flat_index(q);
            let vol_sqrt = q.volume().sqrt();
            let children = q.children(&grid).expect("level < L");
            let child_avgs: Vec<f64> = children
                .iter()
                .map(|c| averages[k + 1][system.flat_index(c)])
                .collect();
            for (si, eps) in Signature::cancellative(n).iter().enumerate() {
                let mut s = 0.0;
                for (t, a) in child_avgs.iter().enumerate() {
                    s += eps.child_sign(t) * a;
                }
                level_coeff[flat * sigs + si] = vol_sqrt * s / (1 << n) as f64;
            }
        }
        coeff.push(level_coeff);
    }
    // fine remainder b - E_L b
    let nn = grid.samples_per_axis();
    let mut fine = vec![0.0; grid.cells()];
    for cell in 0..grid.cells() {
        let coords = lattice::decode(cell, n, nn);
        let q = system.cube_at_cell(big_l, &coords);
        fine[cell] = b.value(cell) - averages[big_l][system.flat_index(&q)];
    }
    Ok(HaarCoefficients {
        grid,
        omega: system.omega().index(),
        coarse: averages[0][0],
        coeff,
        fine,
    })
}

impl HaarCoefficients {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn omega(&self) -> u16 {
        self.omega
    }

    pub fn zeros_like(system: &DyadicSystem) -> HaarCoefficients {
        let grid = *system.grid();
        let n = grid.dim();
        let sigs = sig_count(n);
        let coeff = (0..grid.max_level())
            .map(|k| vec![0.0; (1usize << (k * n)) * sigs])
            .collect();
        HaarCoefficients {
            grid,
            omega: system.omega().index(),
            coarse: 0.0,
            coeff,
            fine: vec![0.0; grid.cells()],
        }
    }

    pub fn get(&self, level: usize, flat_index: usize, sig: usize) -> f64 {
        let sigs = sig_count(self.grid.dim());
        self.coeff[level][flat_index * sigs + sig]
    }

    pub fn set(&mut self, level: usize, flat_index: usize, sig: usize, v: f64) {
        let sigs = sig_count(self.grid.dim());
        self.coeff[level][flat_index * sigs + sig] = v;
    }

    pub fn add(&mut self, level: usize, flat_index: usize, sig: usize, v: f64) {
        let sigs = sig_count(self.grid.dim());
        self.coeff[level][flat_index * sigs + sig] += v;
    }

    pub fn fine(&self) -> &[f64] {
        &self.fine
    }

    pub fn fine_mut(&mut self) -> &mut [f64] {
        &mut self.fine
    }

    pub fn fine_l2(&self) -> f64 {
        (self.fine.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Drop the cell-scale block, restricting to the Haar span.
    pub fn clear_fine(&mut self) {
        self.fine.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `coarse² + Σ coeff² + ‖fine‖²` — equals `‖b‖²_{L²}` by orthogonality
    /// of the three blocks.
    pub fn energy(&self) -> f64 {
        let coeff_sq: f64 = self.coeff.iter().flat_map(|l| l.iter()).map(|c| c * c).sum();
        self.coarse * self.coarse + coeff_sq + self.fine_l2().powi(2)
    }

    /// CSV rows `(omega, level, m-index, epsilon-bits, value)` in canonical
    /// order, plus one `coarse` row with level = -1.
    pub fn dump_csv(&self) -> String {
        let n = self.grid.dim();
        let sigs = sig_count(n);
        let mut out = String::from("omega,level,m,epsilon,value\n");
        out.push_str(&format!("{},-1,0,0,{:.12e}\n", self.omega, self.coarse));
        for (k, level) in self.coeff.iter().enumerate() {
            for flat in 0..level.len() / sigs {
                for si in 0..sigs {
                    out.push_str(&format!(
                        "{},{},{},{},{:.12e}\n",
                        self.omega,
                        k,
                        flat,
                        si,
                        level[flat * sigs + si]
                    ));
                }
            }
        }
        out
    }
}

/// Haar synthesis: exact inverse of [`analyze`].
pub fn synthesize(coeffs: &HaarCoefficients, system: &DyadicSystem) -> Result<GridFunction> {
    if coeffs.omega != system.omega().index() {
        return Err(Error::SystemMismatch { have: coeffs.omega, want: system.omega().index() });
    }
    if &coeffs.grid != system.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = coeffs.grid;
    let n = grid.dim();
    let big_l = grid.max_level();
    let sigs = sig_count(n);
    // rebuild averages top-down
    let mut averages: Vec<Vec<f64>> = Vec::with_capacity(big_l + 1);
    averages.push(vec![coeffs.coarse]);
    for k in 0..big_l {
        let mut next = vec![0.0; 1usize << ((k + 1) * n)];
        for q in system.level(k) {
            let flat = system.flat_index(q);
            let inv_sqrt = q.volume().sqrt().recip();
            let children = q.children(&grid).expect("level < L");
            for (t, child) in children.iter().enumerate() {
                let mut delta = 0.0;
                for (si, eps) in Signature::cancellative(n).iter().enumerate() {
                    delta += coeffs.coeff[k][flat * sigs + si] * eps.child_sign(t);
                }
                next[system.flat_index(child)] = averages[k][flat] + delta * inv_sqrt;
            }
        }
        averages.push(next);
    }
    let nn = grid.samples_per_axis();
    let mut out = GridFunction::zeros(&grid);
    for cell in 0..grid.cells() {
        let coords = lattice::decode(cell, n, nn);
        let q = system.cube_at_cell(big_l, &coords);
        out.values_mut()[cell] = averages[big_l][system.flat_index(&q)] + coeffs.fine[cell];
    }
    Ok(out)
}

/// Conditional expectation `E_k b`: piecewise constant on level-k cubes.
pub fn expectation(b: &GridFunction, system: &DyadicSystem, k: usize) -> Result<GridFunction> {
    let grid = *system.grid();
    if k > grid.max_level() {
        return Err(Error::LevelOutOfRange { level: k, max: grid.max_level() });
    }
    let averages = cube_averages(b, system);
    let n = grid.dim();
    let nn = grid.samples_per_axis();
    let mut out = GridFunction::zeros(&grid);
    for cell in 0..grid.cells() {
        let coords = lattice::decode(cell, n, nn);
        let q = system.cube_at_cell(k, &coords);
        out.values_mut()[cell] = averages[k][system.flat_index(&q)];
    }
    Ok(out)
}

/// Martingale difference `Δ_Q b = (E_{k+1} - E_k) b · 1_Q`, constant on the
/// children of `Q`.
pub fn martingale_difference(
    b: &GridFunction,
    system: &DyadicSystem,
    cube: &DyadicCube,
) -> Result<GridFunction> {
    let grid = *system.grid();
    if cube.level >= grid.max_level() {
        return Err(Error::MaxDepth(cube.level));
    }
    let region = cube.region(&grid);
    let vol = cube.volume();
    let avg_q = b.sum_over(&region) / vol;
    let mut out = GridFunction::zeros(&grid);
    for child in cube.children(&grid)? {
        let child_region = child.region(&grid);
        let avg_c = b.sum_over(&child_region) / child.volume();
        child_region.for_each_cell(&grid, |cell| out.values_mut()[cell] = avg_c - avg_q);
    }
    Ok(out)
}
