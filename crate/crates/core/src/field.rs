//! Scalar fields on the cell lattice and inclusive prefix-sum tables.
//!
//! A `GridFunction` is piecewise constant on cells; the discrete inner
//! product is `⟨f,g⟩ = h^n Σ f·g`, under which the scaled cell indicators
//! `h^{-n/2} 1_cell` form an orthonormal basis of `L²(grid)`.

use crate::error::{Error, Result};
use crate::grid::{CellBox, Region, TorusGrid};
use crate::lattice;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &TorusGrid) -> Self {
        GridFunction { grid: *grid, values: vec![0.0; grid.cells()] }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        GridFunction { grid: *grid, values: vec![c; grid.cells()] }
    }

    /// Sample a function of the cell-center coordinates.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.cells()).map(|c| f(&grid.cell_center(c))).collect();
        GridFunction { grid: *grid, values }
    }

    pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.cells()
            )));
        }
        Ok(GridFunction { grid: *grid, values })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `⟨f,g⟩ = h^n Σ f g`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `L^p(grid)` norm; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        }
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.cell_volume())
            .powf(1.0 / p)
    }

    /// Weighted L² norm `(h^n Σ f² w)^{1/2}`.
    pub fn l2_norm_weighted(&self, w: &[f64]) -> f64 {
        (self
            .values
            .iter()
            .zip(w)
            .map(|(v, wv)| v * v * wv)
            .sum::<f64>()
            * self.grid.cell_volume())
        .sqrt()
    }

    /// `h^n Σ_{cells in R} f`.
    pub fn sum_over(&self, region: &Region) -> f64 {
        let mut s = 0.0;
        region.for_each_cell(&self.grid, |c| s += self.values[c]);
        s * self.grid.cell_volume()
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &GridFunction, a: f64) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Inclusive n-dimensional prefix sums of `value · h^n`; box queries resolve
/// by inclusion-exclusion over the `2^n` corners.
#[derive(Debug, Clone)]
pub struct PrefixTable {
    grid: TorusGrid,
    table: Vec<f64>,
}

impl PrefixTable {
    pub fn build(grid: &TorusGrid, cell_values: &[f64]) -> Self {
        let n = grid.dim();
        let nn = grid.samples_per_axis();
        let hv = grid.cell_volume();
        let mut table: Vec<f64> = cell_values.iter().map(|v| v * hv).collect();
        let strides = lattice::strides(n, nn);
        for axis in 0..n {
            let stride = strides[axis];
            // running sum along `axis`: fixed order, axis-major sweep
            for base in 0..table.len() {
                let coord = (base / stride) % nn;
                if coord > 0 {
                    table[base] += table[base - stride];
                }
            }
        }
        PrefixTable { grid: *grid, table }
    }

    /// Sum over an unwrapped half-open box.
    pub fn box_sum(&self, b: &CellBox) -> f64 {
        let n = self.grid.dim();
        let nn = self.grid.samples_per_axis();
        let strides = lattice::strides(n, nn);
        let corners = 1usize << n;
        let mut total = 0.0;
        'corner: for mask in 0..corners {
            let mut flat = 0usize;
            let mut sign = 1.0;
            for axis in 0..n {
                let coord = if mask & (1 << axis) != 0 {
                    sign = -sign;
                    if b.lo[axis] == 0 {
                        continue 'corner;
                    }
                    b.lo[axis] - 1
                } else {
                    b.hi[axis] - 1
                };
                flat += coord * strides[axis];
            }
            total += sign * self.table[flat];
        }
        total
    }

    /// Sum over a region (`h^n`-weighted, exact per box).
    pub fn region_sum(&self, region: &Region) -> f64 {
        region.boxes.iter().map(|b| self.box_sum(b)).sum()
    }

    pub fn total(&self) -> f64 {
        *self.table.last().expect("non-empty grid")
    }
}
