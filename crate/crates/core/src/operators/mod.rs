//! Dense operators over the grid-cell basis plus the operator zoo built on
//! them: Riesz transforms, dyadic shifts, paraproducts, sign-cell frames,
//! and Whitney kernel expansions.
//!
//! A `DenseOperator` acts on value vectors; since the scaled cell indicators
//! `h^{-n/2} 1_cell` are orthonormal in `L²(grid)`, the matrix in that basis
//! coincides with the pointwise-action matrix, so its singular values are
//! exactly the singular values of the operator `L²(grid) → L²(grid)`.

pub mod paraproduct;
pub mod riesz;
pub mod shift;
pub mod signcell;
pub mod whitney;

use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::grid::TorusGrid;
use crate::weights::Weight;

/// Row-major dense matrix with source/target weight metadata.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Grid the cell basis belongs to, when the matrix is grid-sized.
    pub grid: Option<TorusGrid>,
    pub source_weight: String,
    pub target_weight: String,
}

impl DenseOperator {
    pub fn zeros(rows: usize, cols: usize) -> DenseOperator {
        DenseOperator {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            grid: None,
            source_weight: "lebesgue".into(),
            target_weight: "lebesgue".into(),
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Result<DenseOperator> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseOperator {
            rows,
            cols,
            data,
            grid: None,
            source_weight: "lebesgue".into(),
            target_weight: "lebesgue".into(),
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let grid = self.grid.ok_or(Error::GridMismatch)?;
        if f.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        GridFunction::from_values(&grid, self.apply_vec(f.values())?)
    }

    pub fn transpose(&self) -> DenseOperator {
        let mut t = DenseOperator::zeros(self.cols, self.rows);
        t.grid = self.grid;
        t.source_weight = self.target_weight.clone();
        t.target_weight = self.source_weight.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn has_nan(&self) -> bool {
        self.data.iter().any(|v| v.is_nan())
    }

    /// Flat binary row-major f64 dump plus a small JSON sidecar.
    pub fn write_binary(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut raw = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            raw.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, raw)?;
        let sidecar = serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "dtype": "f64-le",
            "layout": "row-major",
            "n": self.grid.map(|g| g.dim()),
            "samples_per_axis": self.grid.map(|g| g.samples_per_axis()),
            "source_weight": self.source_weight,
            "target_weight": self.target_weight,
        });
        let mut f = std::fs::File::create(path.with_extension("json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&sidecar).expect("static schema"))?;
        Ok(())
    }
}

/// `diag(λ^{1/2}) · T · diag(μ^{-1/2})`: the singular values of the result
/// are the Schatten data of `T : L²_μ → L²_λ`.
pub fn weighted_conjugate(t: &DenseOperator, lambda: &Weight, mu: &Weight) -> Result<DenseOperator> {
    let grid = t.grid.ok_or(Error::GridMismatch)?;
    if lambda.grid() != &grid || mu.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let cells = grid.cells();
    if t.rows != cells || t.cols != cells {
        return Err(Error::DimensionMismatch("operator is not grid-sized".into()));
    }
    let row_scale: Vec<f64> = (0..cells).map(|c| lambda.value(c).sqrt()).collect();
    let col_scale: Vec<f64> = (0..cells).map(|c| mu.value(c).sqrt().recip()).collect();
    let mut out = t.clone();
    for r in 0..cells {
        let rs = row_scale[r];
        for c in 0..cells {
            out.data[r * cells + c] *= rs * col_scale[c];
        }
    }
    out.source_weight = "mu".into();
    out.target_weight = "lambda".into();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_weight, WeightSpec};

    #[test]
    fn conjugation_identity_and_inverse() {
        let grid = TorusGrid::new(2, 1).unwrap();
        let cells = grid.cells();
        let mut t = DenseOperator::zeros(cells, cells);
        t.grid = Some(grid);
        let mut state = 1u64;
        for v in t.data.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = ((state >> 33) as f64) / (u32::MAX as f64) - 0.5;
        }
        let one = Weight::one(&grid);
        let same = weighted_conjugate(&t, &one, &one).unwrap();
        for (a, b) in same.data.iter().zip(&t.data) {
            assert!((a - b).abs() < 1e-15);
        }
        // conjugation is invertible: conjugate by the reciprocals
        let mu = make_weight(&grid, &WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] }).unwrap();
        let la = make_weight(&grid, &WeightSpec::Power { alpha: -0.5, center: vec![0.5, 0.5] }).unwrap();
        let conj = weighted_conjugate(&t, &la, &mu).unwrap();
        let back = weighted_conjugate(&conj, &la.reciprocal(), &mu.reciprocal()).unwrap();
        for (a, b) in back.data.iter().zip(&t.data) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn binary_export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = TorusGrid::new(1, 1).unwrap();
        let cells = grid.cells();
        let mut t = DenseOperator::zeros(cells, cells);
        t.grid = Some(grid);
        t.set(0, 3, 2.5);
        let path = dir.path().join("op.bin");
        t.write_binary(&path).unwrap();
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(raw.len(), cells * cells * 8);
        let v = f64::from_le_bytes(raw[3 * 8..4 * 8].try_into().unwrap());
        assert_eq!(v, 2.5);
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["rows"], cells);
        assert_eq!(sidecar["layout"], "row-major");
    }
}
