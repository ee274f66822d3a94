//! Sign-cell frames: grandchild-pair difference functions adapted to one
//! Riesz direction.
//!
//! For a cube `Q` at level `k` and direction `j`, the frame collects all
//! grandchild pairs `(P₁, P₂)` that are not adjacent in coordinate `j`
//! (center gap at least `2^{-k-1}`), the difference functions
//! `g = 2^{(k+1)n/2}(1_{P₁} - 1_{P₂})`, and the weighted indicators
//! `G = μ^{1/2} 1_{P₂}/μ(Q)^{1/2}`, `H = λ^{-1/2} 1_{P₁}/λ^{-1}(Q)^{1/2}`.
//! On each admissible pair the kernel `K_j` keeps one sign and satisfies
//! `|K_j| ≳ |Q|^{-1}`; both facts are verified cell-by-cell and recorded.

use super::riesz::{kernel_value, KernelNormalization};
use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::grid::{DyadicCube, TorusGrid};
use crate::weights::Weight;

#[derive(Debug, Clone)]
pub struct SignCellPair {
    pub p1: DyadicCube,
    pub p2: DyadicCube,
    pub g: GridFunction,
    /// `μ^{1/2} 1_{P₂} / μ(Q)^{1/2}`
    pub g_weighted: GridFunction,
    /// `λ^{-1/2} 1_{P₁} / λ^{-1}(Q)^{1/2}`
    pub h_weighted: GridFunction,
    /// Kernel kept one sign over all cell pairs of `P₁ × P₂`.
    pub sign_ok: bool,
    /// Realized `min |K_j(x₁-x₂)| · |Q|` over cell pairs.
    pub kernel_min_scaled: f64,
}

#[derive(Debug, Clone)]
pub struct SignCellFrame {
    pub cube: DyadicCube,
    /// 1-based direction.
    pub j: usize,
    pub pairs: Vec<SignCellPair>,
}

/// Build the frame for one cube. Needs `level(Q) ≤ L-2`.
pub fn sign_cell_frame(
    grid: &TorusGrid,
    cube: &DyadicCube,
    j: usize,
    mu: &Weight,
    lambda: &Weight,
) -> Result<SignCellFrame> {
    let n = grid.dim();
    if j == 0 || j > n {
        return Err(Error::DimensionMismatch(format!("direction {j} for n = {n}")));
    }
    if cube.level + 2 > grid.max_level() {
        return Err(Error::NoGrandchildren);
    }
    if mu.grid() != grid || lambda.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let axis = j - 1;
    let mut grandchildren: Vec<(Vec<usize>, DyadicCube)> = Vec::new();
    let anchor_q = cube.anchor_cells(grid);
    let nn = grid.samples_per_axis();
    for child in cube.children(grid)? {
        for gc in child.children(grid)? {
            let a = gc.anchor_cells(grid);
            let side = gc.side_cells(grid);
            let rel: Vec<usize> = a
                .iter()
                .zip(&anchor_q)
                .map(|(&g_, &q_)| ((g_ + nn - q_) % nn) / side)
                .collect();
            grandchildren.push((rel, gc));
        }
    }
    grandchildren.sort_by(|a, b| a.0.cmp(&b.0));
    let lambda_inv = lambda.reciprocal();
    let mu_q = mu.mass_cube(cube).sqrt();
    let lambda_inv_q = lambda_inv.mass_cube(cube).sqrt();
    let amp = 2f64.powf(((cube.level + 1) * n) as f64 / 2.0);
    let vol_q = cube.volume();

    let mut pairs = Vec::new();
    for i in 0..grandchildren.len() {
        for l in (i + 1)..grandchildren.len() {
            let (t1, p1) = &grandchildren[i];
            let (t2, p2) = &grandchildren[l];
            let gap = t1[axis].abs_diff(t2[axis]);
            if gap < 2 {
                continue;
            }
            let r1 = p1.region(grid);
            let r2 = p2.region(grid);
            let mut g = GridFunction::zeros(grid);
            r1.for_each_cell(grid, |c| g.values_mut()[c] = amp);
            r2.for_each_cell(grid, |c| g.values_mut()[c] = -amp);
            let mut g_weighted = GridFunction::zeros(grid);
            r2.for_each_cell(grid, |c| g_weighted.values_mut()[c] = mu.value(c).sqrt() / mu_q);
            let mut h_weighted = GridFunction::zeros(grid);
            r1.for_each_cell(grid, |c| {
                h_weighted.values_mut()[c] = lambda.value(c).sqrt().recip() / lambda_inv_q
            });
            // kernel sign and size over all cell pairs, torus-minimal displacement
            let mut cells1 = Vec::new();
            r1.for_each_cell(grid, |c| cells1.push(grid.cell_center(c)));
            let mut cells2 = Vec::new();
            r2.for_each_cell(grid, |c| cells2.push(grid.cell_center(c)));
            let mut sign = 0.0f64;
            let mut sign_ok = true;
            let mut min_abs = f64::INFINITY;
            for x1 in &cells1 {
                for x2 in &cells2 {
                    let u: Vec<f64> = x1
                        .iter()
                        .zip(x2)
                        .map(|(&a, &b)| {
                            let d = (a - b).rem_euclid(1.0);
                            if d > 0.5 {
                                d - 1.0
                            } else {
                                d
                            }
                        })
                        .collect();
                    let k = kernel_value(&u, axis, KernelNormalization::PaperUnnormalized);
                    if sign == 0.0 {
                        sign = k.signum();
                    } else if k.signum() != sign {
                        sign_ok = false;
                    }
                    min_abs = min_abs.min(k.abs());
                }
            }
            pairs.push(SignCellPair {
                p1: p1.clone(),
                p2: p2.clone(),
                g,
                g_weighted,
                h_weighted,
                sign_ok,
                kernel_min_scaled: min_abs * vol_q,
            });
        }
    }
    Ok(SignCellFrame { cube: cube.clone(), j, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system, Shift};
    use crate::weights::Weight;

    fn setup() -> (TorusGrid, DyadicCube) {
        let grid = TorusGrid::new(2, 3).unwrap();
        let sys = build_system(&grid, &Shift::zero(2)).unwrap();
        (grid, sys.level(1)[2].clone())
    }

    #[test]
    fn pair_count_by_enumeration() {
        // 4x4 grandchild grid: per direction, index pairs with gap ≥ 2 are
        // (0,2),(0,3),(1,3) → 3 choices, times 4·4 free positions on the
        // other axis: 48 unordered pairs.
        let (grid, q) = setup();
        let one = Weight::one(&grid);
        let frame = sign_cell_frame(&grid, &q, 1, &one, &one).unwrap();
        assert_eq!(frame.pairs.len(), 48);
        // exhaustive oracle
        let mut count = 0;
        for a in 0..16usize {
            for b in (a + 1)..16 {
                let (a0, b0) = (a / 4, b / 4);
                if a0.abs_diff(b0) >= 2 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 48);
    }

    #[test]
    fn g_functions_cancel_and_kernel_certified() {
        let (grid, q) = setup();
        let one = Weight::one(&grid);
        let frame = sign_cell_frame(&grid, &q, 1, &one, &one).unwrap();
        for pair in &frame.pairs {
            let integral: f64 = pair.g.values().iter().sum::<f64>() * grid.cell_volume();
            assert!(integral.abs() < 1e-12, "∫ g = 0");
            assert!(pair.sign_ok, "kernel changed sign on an admissible pair");
            assert!(pair.kernel_min_scaled > 0.05, "size bound constant {}", pair.kernel_min_scaled);
        }
    }

    #[test]
    fn weighted_indicators_normalized() {
        let (grid, q) = setup();
        let mu = crate::weights::make_weight(
            &grid,
            &crate::weights::WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] },
        )
        .unwrap();
        let lambda = crate::weights::make_weight(
            &grid,
            &crate::weights::WeightSpec::Power { alpha: -0.5, center: vec![0.0, 0.0] },
        )
        .unwrap();
        let frame = sign_cell_frame(&grid, &q, 2, &mu, &lambda).unwrap();
        // ‖G‖²_{L²} = μ(P₂)/μ(Q) ≤ 1, ‖H‖²_{L²} = λ^{-1}(P₁)/λ^{-1}(Q) ≤ 1
        for pair in &frame.pairs {
            let g2 = pair.g_weighted.l2_norm().powi(2);
            let expect = mu.mass_cube(&pair.p2) / mu.mass_cube(&q);
            assert!((g2 - expect).abs() < 1e-12);
            assert!(g2 <= 1.0 + 1e-12);
            let h2 = pair.h_weighted.l2_norm().powi(2);
            let expect_h = lambda.reciprocal().mass_cube(&pair.p1) / lambda.reciprocal().mass_cube(&q);
            assert!((h2 - expect_h).abs() < 1e-12);
        }
    }

    #[test]
    fn span_covers_all_grandchild_differences() {
        // rank of the admissible g's equals 4^n - 1 over the grandchildren
        let (grid, q) = setup();
        let one = Weight::one(&grid);
        let frame = sign_cell_frame(&grid, &q, 1, &one, &one).unwrap();
        // coefficient matrix over the 16 grandchild indicators
        let mut gcs = Vec::new();
        for child in q.children(&grid).unwrap() {
            for gc in child.children(&grid).unwrap() {
                gcs.push(gc);
            }
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for pair in &frame.pairs {
            let mut row = vec![0.0; gcs.len()];
            for (i, gc) in gcs.iter().enumerate() {
                if gc == &pair.p1 {
                    row[i] = 1.0;
                }
                if gc == &pair.p2 {
                    row[i] = -1.0;
                }
            }
            rows.push(row);
        }
        assert_eq!(rank(&mut rows), 15);
    }

    #[test]
    fn too_fine_cube_rejected() {
        let grid = TorusGrid::new(2, 2).unwrap();
        let sys = build_system(&grid, &Shift::zero(2)).unwrap();
        let one = Weight::one(&grid);
        let q = sys.level(1)[0].clone();
        assert!(matches!(
            sign_cell_frame(&grid, &q, 1, &one, &one),
            Err(Error::NoGrandchildren)
        ));
    }

    /// Gaussian-elimination rank (test oracle).
    fn rank(rows: &mut Vec<Vec<f64>>) -> usize {
        let mut rank = 0;
        let cols = rows.first().map_or(0, |r| r.len());
        let mut row = 0;
        for col in 0..cols {
            let pivot = (row..rows.len()).max_by(|&a, &b| {
                rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap()
            });
            let Some(p) = pivot else { break };
            if rows[p][col].abs() < 1e-9 {
                continue;
            }
            rows.swap(row, p);
            let scale = rows[row][col];
            for r in (row + 1)..rows.len() {
                let f = rows[r][col] / scale;
                for c in col..cols {
                    rows[r][c] -= f * rows[row][c];
                }
            }
            row += 1;
            rank += 1;
        }
        rank
    }
}
