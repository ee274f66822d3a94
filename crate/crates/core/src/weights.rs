//! Muckenhoupt weights on the grid: construction, box-mass queries, A₂
//! constants, reverse-Hölder exponents, and the derived weight
//! `ν = μ^{1/2} λ^{-1/2}`.

use crate::error::{Error, Result};
use crate::field::{GridFunction, PrefixTable};
use crate::grid::{all_systems, enlarge, DyadicCube, Region, TorusGrid};
use crate::lattice;

/// Strictly positive grid function with O(1) box-mass queries.
#[derive(Debug, Clone)]
pub struct Weight {
    grid: TorusGrid,
    values: Vec<f64>,
    prefix: PrefixTable,
}

/// How a weight is built.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    Constant(f64),
    /// `w(x) = d(x, x₀)^α` with torus distance `d`; `x₀` an exact lattice
    /// point so cell centers never hit the singularity.
    Power { alpha: f64, center: Vec<f64> },
    Samples(Vec<f64>),
}

pub fn make_weight(grid: &TorusGrid, spec: &WeightSpec) -> Result<Weight> {
    let n = grid.dim();
    let values: Vec<f64> = match spec {
        WeightSpec::Constant(c) => {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveWeight(0));
            }
            vec![*c; grid.cells()]
        }
        WeightSpec::Power { alpha, center } => {
            if !(-(n as f64) < *alpha && *alpha < n as f64) {
                return Err(Error::PowerExponent { alpha: *alpha, n });
            }
            if center.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "center has {} coordinates, grid has {n}",
                    center.len()
                )));
            }
            let nn = grid.samples_per_axis() as f64;
            for &c in center {
                if (c * nn - (c * nn).round()).abs() > 1e-9 {
                    return Err(Error::CenterNotLattice(c));
                }
            }
            (0..grid.cells())
                .map(|cell| {
                    let x = grid.cell_center(cell);
                    grid.torus_distance(&x, center).powf(*alpha)
                })
                .collect()
        }
        WeightSpec::Samples(v) => {
            if v.len() != grid.cells() {
                return Err(Error::DimensionMismatch(format!(
                    "{} samples for {} cells",
                    v.len(),
                    grid.cells()
                )));
            }
            v.clone()
        }
    };
    Weight::from_values(grid, values)
}

impl Weight {
    pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Weight> {
        if let Some(bad) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveWeight(bad));
        }
        let prefix = PrefixTable::build(grid, &values);
        Ok(Weight { grid: *grid, values, prefix })
    }

    pub fn one(grid: &TorusGrid) -> Weight {
        make_weight(grid, &WeightSpec::Constant(1.0)).expect("constant 1 is valid")
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// `w(R) = h^n Σ_{cells in R} w`; exact prefix query per wrapped box.
    pub fn mass(&self, region: &Region) -> f64 {
        self.prefix.region_sum(region)
    }

    pub fn mass_cube(&self, cube: &DyadicCube) -> f64 {
        self.mass(&cube.region(&self.grid))
    }

    pub fn total(&self) -> f64 {
        self.prefix.total()
    }

    /// Pointwise reciprocal `w^{-1}` (its own Weight with prefix table).
    pub fn reciprocal(&self) -> Weight {
        Weight::from_values(&self.grid, self.values.iter().map(|v| 1.0 / v).collect())
            .expect("reciprocal of positive weight is positive")
    }

    /// Pointwise power `w^δ`.
    pub fn pow(&self, delta: f64) -> Weight {
        Weight::from_values(&self.grid, self.values.iter().map(|v| v.powf(delta)).collect())
            .expect("power of positive weight is positive")
    }

    pub fn as_grid_function(&self) -> GridFunction {
        GridFunction::from_values(&self.grid, self.values.clone()).expect("sizes match")
    }
}

/// `ν = μ^{1/2} λ^{-1/2}` pointwise.
pub fn nu_from(mu: &Weight, lambda: &Weight) -> Result<Weight> {
    if mu.grid != lambda.grid {
        return Err(Error::GridMismatch);
    }
    let values = mu
        .values
        .iter()
        .zip(&lambda.values)
        .map(|(m, l)| (m / l).sqrt())
        .collect();
    Weight::from_values(&mu.grid, values)
}

/// Which cube family the A₂ supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A2Scope {
    /// All cubes of all `3^n` shifted systems (finite, canonical default).
    DyadicAllShifts,
    /// Every cell-aligned cube of side 1..N (oracle family).
    AllBoxes,
}

/// `[w]_{A₂} = sup_Q (|Q|^{-1} w(Q)) (|Q|^{-1} w^{-1}(Q))` over the scoped family.
pub fn a2_constant(w: &Weight, scope: A2Scope) -> f64 {
    let grid = w.grid;
    let winv = w.reciprocal();
    let mut sup = 1.0f64;
    match scope {
        A2Scope::DyadicAllShifts => {
            for sys in all_systems(&grid) {
                for q in sys.cubes() {
                    let vol = q.volume();
                    let r = q.region(&grid);
                    let prod = (w.mass(&r) / vol) * (winv.mass(&r) / vol);
                    sup = sup.max(prod);
                }
            }
        }
        A2Scope::AllBoxes => {
            let nn = grid.samples_per_axis();
            let n = grid.dim();
            for side in 1..=nn {
                let vol = (side as f64 / nn as f64).powi(n as i32);
                lattice::for_each_index(n, nn, |lo| {
                    let region = Region::from_wrapped_box(&grid, lo, &vec![side; n]);
                    let prod = (w.mass(&region) / vol) * (winv.mass(&region) / vol);
                    if prod > sup {
                        sup = prod;
                    }
                });
            }
        }
    }
    sup
}

/// Outcome of the reverse-Hölder scan.
#[derive(Debug, Clone)]
pub struct ReverseHolderReport {
    /// Chosen exponent σ_w.
    pub sigma: f64,
    /// Realized constant at σ_w: `sup_Q (⨍_Q w^{1+σ})^{1/(1+σ)} / (w(Q)/|Q|)`.
    pub c_rh: f64,
    /// Realized constant for every candidate, ascending σ.
    pub table: Vec<(f64, f64)>,
}

/// Scan candidate exponents over all dyadic cubes of all shifts. Returns the
/// largest σ whose realized constant stays within `max_ratio`; when none
/// qualifies the smallest candidate is reported together with its constant.
pub fn reverse_holder_exponent(
    w: &Weight,
    candidates: &[f64],
    max_ratio: f64,
) -> Result<ReverseHolderReport> {
    if candidates.is_empty() || candidates.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Config("candidate σ list must be nonempty and ascending".into()));
    }
    if candidates[0] <= 0.0 {
        return Err(Error::Config("candidate σ must be positive".into()));
    }
    let grid = w.grid;
    let systems = all_systems(&grid);
    let mut table = Vec::with_capacity(candidates.len());
    for &sigma in candidates {
        let wp = w.pow(1.0 + sigma);
        let mut c = 0.0f64;
        for sys in &systems {
            for q in sys.cubes() {
                let r = q.region(&grid);
                let vol = q.volume();
                let lhs = (wp.mass(&r) / vol).powf(1.0 / (1.0 + sigma));
                let rhs = w.mass(&r) / vol;
                c = c.max(lhs / rhs);
            }
        }
        table.push((sigma, c));
    }
    let chosen = table
        .iter()
        .rev()
        .find(|(_, c)| *c <= max_ratio)
        .copied()
        .unwrap_or(table[0]);
    Ok(ReverseHolderReport { sigma: chosen.0, c_rh: chosen.1, table })
}

/// `w(cQ) / w(Q)`.
pub fn doubling_ratio(w: &Weight, cube: &DyadicCube, c: f64) -> Result<f64> {
    let grid = w.grid;
    let big = enlarge(&grid, cube, c)?;
    Ok(w.mass(&big) / w.mass(&cube.region(&grid)))
}

/// The two experiment weights with everything the norms need precomputed.
#[derive(Debug, Clone)]
pub struct TwoWeights {
    pub mu: Weight,
    pub lambda: Weight,
    pub nu: Weight,
    pub mu_inv: Weight,
    pub lambda_inv: Weight,
    pub nu_inv: Weight,
}

impl TwoWeights {
    pub fn new(mu: Weight, lambda: Weight) -> Result<TwoWeights> {
        let nu = nu_from(&mu, &lambda)?;
        let mu_inv = mu.reciprocal();
        let lambda_inv = lambda.reciprocal();
        let nu_inv = nu.reciprocal();
        Ok(TwoWeights { mu, lambda, nu, mu_inv, lambda_inv, nu_inv })
    }

    pub fn unweighted(grid: &TorusGrid) -> TwoWeights {
        TwoWeights::new(Weight::one(grid), Weight::one(grid)).expect("unit weights are valid")
    }

    pub fn grid(&self) -> &TorusGrid {
        self.mu.grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system, Shift};

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 3).unwrap()
    }

    fn rand_values(grid: &TorusGrid, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..grid.cells())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                0.1 + ((state >> 33) as f64) / (u32::MAX as f64)
            })
            .collect()
    }

    #[test]
    fn constant_weight_masses() {
        let g = grid();
        let w = make_weight(&g, &WeightSpec::Constant(1.0)).unwrap();
        assert!((w.total() - 1.0).abs() < 1e-12);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let q = &sys.level(2)[5]; // side 1/4
        assert!((w.mass_cube(q) - 1.0 / 16.0).abs() < 1e-13);
        assert_eq!(w.mass(&Region::empty()), 0.0);
    }

    #[test]
    fn power_zero_is_constant_one() {
        let g = grid();
        let w = make_weight(&g, &WeightSpec::Power { alpha: 0.0, center: vec![0.0, 0.0] }).unwrap();
        assert!(w.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn power_mass_matches_direct_summation() {
        let g = grid();
        let w = make_weight(&g, &WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] }).unwrap();
        let direct: f64 = w.values().iter().sum::<f64>() * g.cell_volume();
        assert!((w.total() - direct).abs() < 1e-12 * direct.max(1.0));
        // random region against direct summation
        let r = Region::from_wrapped_box(&g, &[17, 5], &[9, 13]);
        let mut direct_r = 0.0;
        r.for_each_cell(&g, |c| direct_r += w.value(c));
        direct_r *= g.cell_volume();
        assert!((w.mass(&r) - direct_r).abs() <= 1e-13 * direct_r.abs().max(1.0));
    }

    #[test]
    fn power_exponent_validation() {
        let g = grid();
        assert!(make_weight(&g, &WeightSpec::Power { alpha: 2.0, center: vec![0.0, 0.0] }).is_err());
        assert!(make_weight(&g, &WeightSpec::Power { alpha: -2.0, center: vec![0.0, 0.0] }).is_err());
        assert!(make_weight(&g, &WeightSpec::Power { alpha: 1.0, center: vec![0.001, 0.0] }).is_err());
    }

    #[test]
    fn nu_cases() {
        let g = grid();
        let w4 = make_weight(&g, &WeightSpec::Constant(4.0)).unwrap();
        let w1 = Weight::one(&g);
        let nu = nu_from(&w4, &w1).unwrap();
        assert!(nu.values().iter().all(|&v| (v - 2.0).abs() < 1e-14));
        let nu_sym = nu_from(&w1, &w1).unwrap();
        assert!(nu_sym.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        // power weights: μ=|x|^{1/2}, λ=|x|^{-1/2} → ν = |x|^{1/2}
        let mu = make_weight(&g, &WeightSpec::Power { alpha: 0.5, center: vec![0.0, 0.0] }).unwrap();
        let la = make_weight(&g, &WeightSpec::Power { alpha: -0.5, center: vec![0.0, 0.0] }).unwrap();
        let nu = nu_from(&mu, &la).unwrap();
        for (v, m) in nu.values().iter().zip(mu.values()) {
            assert!((v - m).abs() <= 1e-14 * m.abs());
        }
        // ν² λ = μ pointwise
        for ((nv, lv), mv) in nu.values().iter().zip(la.values()).zip(mu.values()) {
            assert!((nv * nv * lv - mv).abs() <= 1e-12 * mv.abs());
        }
    }

    #[test]
    fn a2_constant_cases() {
        let g = TorusGrid::new(2, 2).unwrap();
        for c in [0.3, 1.0, 7.0] {
            let w = make_weight(&g, &WeightSpec::Constant(c)).unwrap();
            assert!((a2_constant(&w, A2Scope::DyadicAllShifts) - 1.0).abs() < 1e-12);
            assert!((a2_constant(&w, A2Scope::AllBoxes) - 1.0).abs() < 1e-12);
        }
        // checkerboard on 2x2 blocks, values {1, 9}
        let nn = g.samples_per_axis();
        let vals: Vec<f64> = (0..g.cells())
            .map(|cell| {
                let c = g.decode_cell(cell);
                if ((c[0] / 2) + (c[1] / 2)) % 2 == 0 {
                    1.0
                } else {
                    9.0
                }
            })
            .collect();
        let w = Weight::from_values(&g, vals).unwrap();
        let fast = a2_constant(&w, A2Scope::AllBoxes);
        // exhaustive oracle over all cell-aligned cubes
        let winv = w.reciprocal();
        let mut sup: f64 = 1.0;
        for side in 1..=nn {
            for x in 0..nn {
                for y in 0..nn {
                    let r = Region::from_wrapped_box(&g, &[x, y], &[side, side]);
                    let vol = (side as f64 / nn as f64).powi(2);
                    sup = sup.max(w.mass(&r) / vol * (winv.mass(&r) / vol));
                }
            }
        }
        assert!((fast - sup).abs() <= 1e-12 * sup);
        assert!(fast >= 1.0);
        // dyadic scope is a sub-family
        assert!(a2_constant(&w, A2Scope::DyadicAllShifts) <= fast + 1e-12);
    }

    #[test]
    fn cube_wise_a2_bracket() {
        // |Q|² ≤ w(Q)·w^{-1}(Q) ≤ [w]_{A₂}·|Q|² on every shifted cube
        let g = grid();
        let w = Weight::from_values(&g, rand_values(&g, 99)).unwrap();
        let winv = w.reciprocal();
        let a2 = a2_constant(&w, A2Scope::DyadicAllShifts);
        for sys in all_systems(&g) {
            for q in sys.cubes() {
                let r = q.region(&g);
                let prod = w.mass(&r) * winv.mass(&r);
                let vol2 = q.volume() * q.volume();
                assert!(prod >= vol2 * (1.0 - 1e-12));
                assert!(prod <= a2 * vol2 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn power_lemma_exponent_contraction() {
        // [w^δ]_{A₂} ≤ [w]_{A₂}^δ (computed constants, tol 1e-9)
        let g = TorusGrid::new(2, 2).unwrap();
        let w = make_weight(&g, &WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] }).unwrap();
        let base = a2_constant(&w, A2Scope::DyadicAllShifts);
        for delta in [0.3, 0.5, 0.8] {
            let contracted = a2_constant(&w.pow(delta), A2Scope::DyadicAllShifts);
            assert!(contracted <= base.powf(delta) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn reverse_holder_cases() {
        let g = TorusGrid::new(2, 2).unwrap();
        let one = Weight::one(&g);
        let rep = reverse_holder_exponent(&one, &[0.25, 0.5, 1.0], 2.0).unwrap();
        assert_eq!(rep.sigma, 1.0);
        assert!((rep.c_rh - 1.0).abs() < 1e-12);
        assert!(rep.table.iter().all(|(_, c)| (c - 1.0).abs() < 1e-12));

        let g3 = TorusGrid::new(2, 3).unwrap();
        let w = make_weight(&g3, &WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] }).unwrap();
        let rep = reverse_holder_exponent(&w, &[0.5], 1e9).unwrap();
        // oracle: direct scan over all cubes of all shifts
        let wp = w.pow(1.5);
        let mut c: f64 = 0.0;
        for sys in all_systems(&g3) {
            for q in sys.cubes() {
                let r = q.region(&g3);
                let lhs = (wp.mass(&r) / q.volume()).powf(1.0 / 1.5);
                c = c.max(lhs / (w.mass(&r) / q.volume()));
            }
        }
        assert!((rep.c_rh - c).abs() <= 1e-12 * c);
        assert!(rep.c_rh >= 1.0);
    }

    #[test]
    fn doubling_ratio_cases() {
        let g = grid();
        let one = Weight::one(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        // level-2 cube: side 6 cells, so the doubled window is cell-exact
        let q = &sys.level(2)[9];
        assert!((doubling_ratio(&one, q, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((doubling_ratio(&one, q, 1.0).unwrap() - 1.0).abs() < 1e-14);
        // ratio ≤ [w]_{A₂} c^{2n} over all dyadic cubes (c=2 keeps windows local)
        let w = make_weight(&g, &WeightSpec::Power { alpha: 1.0, center: vec![0.0, 0.0] }).unwrap();
        let a2 = a2_constant(&w, A2Scope::DyadicAllShifts);
        let c = 2.0f64;
        for q in sys.cubes() {
            let r = doubling_ratio(&w, q, c).unwrap();
            assert!(r <= a2 * c.powi(4) * (1.0 + 1e-12), "ratio {r} exceeds A2 doubling bound");
        }
    }
}
