//! Paraproducts of the commutator decomposition
//!
//! ```text
//!   Π_b f  = Σ_{Q,ε≢1} ⟨b,h_Q^ε⟩ ⟨f⟩_Q h_Q^ε
//!   Π*_b f = Σ_{Q,ε≢1} ⟨b,h_Q^ε⟩ ⟨f,h_Q^ε⟩ 1_Q/|Q|
//!   Γ_b f  = Σ_Q Σ_{ε,η≢1, ε≠η} ⟨b,h_Q^ε⟩ ⟨f,h_Q^η⟩ h_Q^ε h_Q^η
//!   R_b f  = Π_{Шf} b − Ш(Π_f b) = Σ_{Q,ε≢1} ⟨f,h_Q^ε⟩ (⟨b⟩_{σ(Q)} − ⟨b⟩_Q) h^{σ(ε)}_{σ(Q)}
//! ```
//!
//! and the identity they decompose:
//!
//! ```text
//!   [b,Ш]f = (Π_b+Π*_b+Γ_b)(Шf) − Ш((Π_b+Π*_b+Γ_b)f) + Π_{Шf}b − Ш(Π_f b),
//! ```
//!
//! exact on the Haar span (zero fine-remainder block) for any shift of the
//! admissible form, because products of functions constant on level-L cubes
//! stay in that span.

use super::shift::{haar_shift_apply, ShiftSpec};
use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::grid::DyadicSystem;
use crate::haar::{analyze, cube_averages, synthesize, HaarCoefficients, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParaKind {
    Pi,
    PiStar,
    Gamma,
    /// Needs a `ShiftSpec`.
    Remainder,
}

/// Apply one paraproduct with symbol `b` to `f`.
pub fn paraproduct_apply(
    kind: ParaKind,
    b: &GridFunction,
    f: &GridFunction,
    system: &DyadicSystem,
    shift: Option<&ShiftSpec>,
) -> Result<GridFunction> {
    let grid = *system.grid();
    if b.grid() != &grid || f.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.dim();
    let sigs = (1usize << n) - 1;
    let cancellative = Signature::cancellative(n);
    match kind {
        ParaKind::Pi | ParaKind::PiStar | ParaKind::Gamma => {
            let cb = analyze(b, system)?;
            let cf_avg;
            let cf;
            match kind {
                ParaKind::Pi => {
                    cf_avg = Some(cube_averages(f, system));
                    cf = None;
                }
                ParaKind::PiStar => {
                    cf_avg = None;
                    cf = Some(analyze(f, system)?);
                }
                _ => {
                    cf_avg = None;
                    cf = Some(analyze(f, system)?);
                }
            }
            let mut out = GridFunction::zeros(&grid);
            for k in 0..grid.max_level() {
                for q in system.level(k) {
                    let flat = system.flat_index(q);
                    let inv_sqrt = q.volume().sqrt().recip();
                    match kind {
                        ParaKind::Pi => {
                            // ⟨f⟩_Q · Δ_Q b, constant on each child
                            let favg = cf_avg.as_ref().unwrap()[k][flat];
                            if favg == 0.0 {
                                continue;
                            }
                            for (t, child) in q.children(&grid)?.iter().enumerate() {
                                let mut delta = 0.0;
                                for (si, eps) in cancellative.iter().enumerate() {
                                    delta += cb.get(k, flat, si) * eps.child_sign(t);
                                }
                                let v = favg * delta * inv_sqrt;
                                child.region(&grid).for_each_cell(&grid, |cell| {
                                    out.values_mut()[cell] += v;
                                });
                            }
                        }
                        ParaKind::PiStar => {
                            let cfr = cf.as_ref().unwrap();
                            let mut dot = 0.0;
                            for si in 0..sigs {
                                dot += cb.get(k, flat, si) * cfr.get(k, flat, si);
                            }
                            if dot == 0.0 {
                                continue;
                            }
                            let v = dot / q.volume();
                            q.region(&grid).for_each_cell(&grid, |cell| {
                                out.values_mut()[cell] += v;
                            });
                        }
                        _ => {
                            // Γ on child t: Δ_Q b(t)·Δ_Q f(t) − Σ_ε ⟨b,h^ε⟩⟨f,h^ε⟩/|Q|
                            let cfr = cf.as_ref().unwrap();
                            let mut dot = 0.0;
                            for si in 0..sigs {
                                dot += cb.get(k, flat, si) * cfr.get(k, flat, si);
                            }
                            for (t, child) in q.children(&grid)?.iter().enumerate() {
                                let mut db = 0.0;
                                let mut df = 0.0;
                                for (si, eps) in cancellative.iter().enumerate() {
                                    let s = eps.child_sign(t);
                                    db += cb.get(k, flat, si) * s;
                                    df += cfr.get(k, flat, si) * s;
                                }
                                let v = (db * df - dot) / q.volume();
                                child.region(&grid).for_each_cell(&grid, |cell| {
                                    out.values_mut()[cell] += v;
                                });
                            }
                        }
                    }
                }
            }
            Ok(out)
        }
        ParaKind::Remainder => {
            let spec = shift.ok_or(Error::ParaproductSpec)?;
            let cf = analyze(f, system)?;
            let b_avg = cube_averages(b, system);
            let mut out_coeffs = HaarCoefficients::zeros_like(system);
            if grid.max_level() >= 2 {
                for k in 0..=grid.max_level() - 2 {
                    for q in system.level(k) {
                        let flat = system.flat_index(q);
                        let target = q.child(&grid, &spec.child_offset)?;
                        let tflat = system.flat_index(&target);
                        let davg = b_avg[k + 1][tflat] - b_avg[k][flat];
                        if davg == 0.0 {
                            continue;
                        }
                        for sig in 0..sigs {
                            if let Some(tsig) = spec.signature_map.map(sig, n) {
                                out_coeffs.add(k + 1, tflat, tsig, cf.get(k, flat, sig) * davg);
                            }
                        }
                    }
                }
            }
            synthesize(&out_coeffs, system)
        }
    }
}

/// `L²` norm of `[b,Ш]f − (paraproduct decomposition)`. Inputs must be
/// Haar-band-limited (zero fine-remainder block).
pub fn decomposition_residual(
    b: &GridFunction,
    f: &GridFunction,
    shift: &ShiftSpec,
    system: &DyadicSystem,
) -> Result<f64> {
    for g in [b, f] {
        let fine = analyze(g, system)?.fine_l2();
        if fine > 1e-12 * (1.0 + g.l2_norm()) {
            return Err(Error::FineRemainder(fine));
        }
    }
    let shf = haar_shift_apply(shift, f, system)?;
    let bf = b.mul(f)?;
    let lhs = b.mul(&shf)?.sub(&haar_shift_apply(shift, &bf, system)?)?;

    let para_sum = |x: &GridFunction| -> Result<GridFunction> {
        let mut acc = paraproduct_apply(ParaKind::Pi, b, x, system, None)?;
        acc.add_assign_scaled(&paraproduct_apply(ParaKind::PiStar, b, x, system, None)?, 1.0);
        acc.add_assign_scaled(&paraproduct_apply(ParaKind::Gamma, b, x, system, None)?, 1.0);
        Ok(acc)
    };
    let mut rhs = para_sum(&shf)?;
    rhs.add_assign_scaled(&haar_shift_apply(shift, &para_sum(f)?, system)?, -1.0);
    // Π_{Шf} b − Ш(Π_f b), evaluated literally
    rhs.add_assign_scaled(&paraproduct_apply(ParaKind::Pi, &shf, b, system, None)?, 1.0);
    let pi_f_b = paraproduct_apply(ParaKind::Pi, f, b, system, None)?;
    rhs.add_assign_scaled(&haar_shift_apply(shift, &pi_f_b, system)?, -1.0);

    Ok(lhs.sub(&rhs)?.l2_norm())
}

/// Project a grid function onto the Haar span (drop the fine block).
pub fn haar_band_limit(f: &GridFunction, system: &DyadicSystem) -> Result<GridFunction> {
    let mut coeffs = analyze(f, system)?;
    coeffs.clear_fine();
    synthesize(&coeffs, system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system, Shift, TorusGrid};
    use crate::haar::haar_function;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 3).unwrap()
    }

    fn random_band_limited(grid: &TorusGrid, sys: &DyadicSystem, rng: &mut ChaCha8Rng) -> GridFunction {
        let f = GridFunction::from_values(
            grid,
            (0..grid.cells()).map(|_| rng.gen::<f64>() - 0.5).collect(),
        )
        .unwrap();
        haar_band_limit(&f, sys).unwrap()
    }

    #[test]
    fn pi_single_term() {
        // b = h_P^ε, f ≡ 1: Π_b f = ⟨f⟩_P h_P^ε = h_P^ε
        let g = grid();
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let p = &sys.level(1)[1];
        let eps = Signature::new(0, 2);
        let b = haar_function(&g, p, &eps).unwrap();
        let f = GridFunction::constant(&g, 1.0);
        let out = paraproduct_apply(ParaKind::Pi, &b, &f, &sys, None).unwrap();
        assert!(out.sub(&b).unwrap().lp_norm(f64::INFINITY) < 1e-12);
    }

    #[test]
    fn gamma_vanishes_in_one_dimension() {
        let g = TorusGrid::new(1, 3).unwrap();
        let sys = build_system(&g, &Shift::zero(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_band_limited(&g, &sys, &mut rng);
        let f = random_band_limited(&g, &sys, &mut rng);
        let out = paraproduct_apply(ParaKind::Gamma, &b, &f, &sys, None).unwrap();
        assert!(out.lp_norm(f64::INFINITY) < 1e-13);
    }

    #[test]
    fn pi_and_pistar_are_adjoint() {
        // ⟨Π_b f, g⟩ = ⟨f, Π*_b g⟩
        let g = grid();
        let sys = build_system(&g, &Shift(vec![2, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let b = random_band_limited(&g, &sys, &mut rng);
            let f = random_band_limited(&g, &sys, &mut rng);
            let h = random_band_limited(&g, &sys, &mut rng);
            let lhs = paraproduct_apply(ParaKind::Pi, &b, &f, &sys, None)
                .unwrap()
                .inner(&h)
                .unwrap();
            let rhs = f
                .inner(&paraproduct_apply(ParaKind::PiStar, &b, &h, &sys, None).unwrap())
                .unwrap();
            assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn remainder_closed_form_matches_literal() {
        let g = grid();
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for spec in [ShiftSpec::lower_child(2), ShiftSpec::upper_child_cycled(2)] {
            let b = random_band_limited(&g, &sys, &mut rng);
            let f = random_band_limited(&g, &sys, &mut rng);
            let closed = paraproduct_apply(ParaKind::Remainder, &b, &f, &sys, Some(&spec)).unwrap();
            let shf = haar_shift_apply(&spec, &f, &sys).unwrap();
            let mut literal = paraproduct_apply(ParaKind::Pi, &shf, &b, &sys, None).unwrap();
            let pi_f_b = paraproduct_apply(ParaKind::Pi, &f, &b, &sys, None).unwrap();
            literal.add_assign_scaled(&haar_shift_apply(&spec, &pi_f_b, &sys).unwrap(), -1.0);
            assert!(closed.sub(&literal).unwrap().lp_norm(f64::INFINITY) < 1e-11);
        }
    }

    #[test]
    fn missing_shift_spec_is_an_error() {
        let g = grid();
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let b = GridFunction::constant(&g, 1.0);
        assert!(matches!(
            paraproduct_apply(ParaKind::Remainder, &b, &b, &sys, None),
            Err(Error::ParaproductSpec)
        ));
    }

    #[test]
    fn decomposition_identity_exact_on_band() {
        let g = grid();
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let spec = ShiftSpec::lower_child(2);
        // constant b: both sides vanish
        let f = random_band_limited(&g, &sys, &mut rng);
        let c = GridFunction::constant(&g, 2.0);
        assert!(decomposition_residual(&c, &f, &spec, &sys).unwrap() < 1e-12);
        // constant f: residual still zero (identity degenerates)
        let b = random_band_limited(&g, &sys, &mut rng);
        assert!(decomposition_residual(&b, &c, &spec, &sys).unwrap() < 1e-12);
        // random band-limited pairs
        for _ in 0..5 {
            let b = random_band_limited(&g, &sys, &mut rng);
            let f = random_band_limited(&g, &sys, &mut rng);
            let r = decomposition_residual(&b, &f, &spec, &sys).unwrap();
            assert!(r <= 1e-10 * (1.0 + b.l2_norm() * f.l2_norm()), "residual {r}");
        }
        // inputs with cell-scale detail are rejected
        let mut raw = GridFunction::zeros(&g);
        raw.values_mut()[0] = 1.0;
        assert!(matches!(
            decomposition_residual(&raw, &f, &spec, &sys),
            Err(Error::FineRemainder(_))
        ));
    }
}
