//! The default symbol family: spans low/high-frequency and smooth/rough
//! behavior, every member exactly representable (or canonically built) at
//! each resolution the harness visits.

use crate::error::Result;
use crate::field::GridFunction;
use crate::grid::{build_system, Shift, TorusGrid};
use crate::haar::{haar_function, Signature};
use crate::harness::config::{ExperimentConfig, SymbolFamilySpec};
use crate::spaces::mollify;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random Haar polynomial over levels `0..=max_level`, coefficients
/// `2^{-k}·U[-1,1]`.
pub fn haar_polynomial(
    grid: &TorusGrid,
    seed: u64,
    max_level: usize,
) -> Result<GridFunction> {
    let n = grid.dim();
    let sys = build_system(grid, &Shift::zero(n))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GridFunction::zeros(grid);
    for k in 0..=max_level.min(grid.max_level() - 1) {
        let decay = 0.5f64.powi(k as i32);
        for q in sys.level(k) {
            for eps in Signature::cancellative(n) {
                let coeff = decay * (2.0 * rng.gen::<f64>() - 1.0);
                b.add_assign_scaled(&haar_function(grid, q, &eps)?, coeff);
            }
        }
    }
    Ok(b)
}

/// Smooth periodic bump with non-vanishing gradient off a null set.
pub fn smooth_bump(grid: &TorusGrid) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        let mut s = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let a = if i % 2 == 0 { 0.3 } else { 0.6 };
            s += (2.0 * std::f64::consts::PI * (xi - a)).cos();
        }
        (1.5 * s).exp()
    })
}

/// Mollified indicator of the box `[1/4, 7/12)^n` (corners on the lattice of
/// every depth ≥ 2).
pub fn mollified_indicator(grid: &TorusGrid, eps: f64) -> Result<GridFunction> {
    let sharp = GridFunction::from_fn(grid, |x| {
        if x.iter().all(|&xi| (0.25..7.0 / 12.0).contains(&xi)) {
            1.0
        } else {
            0.0
        }
    });
    mollify(&sharp, eps)
}

/// Four Haar atoms at levels 0 and 1, two random Haar polynomials with
/// coefficient decay `2^{-k}`, one smooth bump, one mollified indicator.
pub fn default_family(grid: &TorusGrid, seed: u64) -> Result<Vec<(String, GridFunction)>> {
    let n = grid.dim();
    let sys = build_system(grid, &Shift::zero(n))?;
    let sig = |bits: u32| Signature::new(bits % ((1 << n) - 1) as u32, n);
    let mut family: Vec<(String, GridFunction)> = Vec::new();

    // atoms at mixed levels and positions
    let level0 = &sys.level(0)[0];
    family.push(("atom-l0-a".into(), haar_function(grid, level0, &sig(0))?));
    family.push(("atom-l0-b".into(), haar_function(grid, level0, &sig(1))?));
    let l1 = sys.level(1);
    family.push(("atom-l1-a".into(), haar_function(grid, &l1[l1.len() - 1], &sig(2))?));
    family.push(("atom-l1-b".into(), haar_function(grid, &l1[l1.len() / 2], &sig(0))?));

    for poly in 0..2u64 {
        let b = haar_polynomial(grid, seed ^ (0xA5A5_0000 + poly), 1)?;
        family.push((format!("haar-poly-{poly}"), b));
    }
    family.push(("smooth-bump".into(), smooth_bump(grid)));
    family.push(("mollified-box".into(), mollified_indicator(grid, 0.125)?));
    Ok(family)
}

/// Tent function: Lipschitz, compactly supported away from flat regions.
pub fn lipschitz_tent(grid: &TorusGrid) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        let d = x
            .iter()
            .map(|&xi| {
                let t = (xi - 0.5).abs();
                t.min(1.0 - t)
            })
            .fold(0.0f64, f64::max);
        (0.25 - d).max(0.0) * 4.0
    })
}

/// Resolve the configured family on a grid.
pub fn build_family(
    cfg: &ExperimentConfig,
    grid: &TorusGrid,
) -> Result<Vec<(String, GridFunction)>> {
    match &cfg.symbols {
        SymbolFamilySpec::Default => default_family(grid, cfg.seed),
        SymbolFamilySpec::HaarPolynomial { count, max_level } => (0..*count)
            .map(|i| {
                Ok((
                    format!("haar-poly-{i}"),
                    haar_polynomial(grid, cfg.seed ^ (0xA5A5_0000 + i as u64), *max_level)?,
                ))
            })
            .collect(),
        SymbolFamilySpec::Bump => Ok(vec![("smooth-bump".into(), smooth_bump(grid))]),
        SymbolFamilySpec::MollifiedIndicator { eps } => {
            Ok(vec![("mollified-box".into(), mollified_indicator(grid, *eps)?)])
        }
        SymbolFamilySpec::Custom { items } => items
            .iter()
            .map(|s| Ok((s.id.clone(), GridFunction::from_values(grid, s.samples.clone())?)))
            .collect(),
    }
}
