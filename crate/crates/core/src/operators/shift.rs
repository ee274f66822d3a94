//! Dyadic shift operators `Ш f = Σ_{Q, ε≢1} ⟨f, h_Q^ε⟩ h^{σ(ε)}_{σ(Q)}`.
//!
//! `σ` sends a cube to one of its children (so `|σ(Q)| = 2^{-n}|Q|`) and a
//! cancellative signature to a cancellative signature or to 0, in which case
//! the term is dropped. On the finite grid the finest Haar level is `L-1`,
//! so source cubes at level `L-1` have no valid target and their terms drop
//! as well.

use crate::error::Result;
use crate::field::GridFunction;
use crate::grid::DyadicSystem;
use crate::haar::{analyze, synthesize, HaarCoefficients};
use serde::{Deserialize, Serialize};

/// Signature map `σ: cancellative → cancellative ∪ {0}`. Cancellative
/// signatures are indexed by their packed bits `0..2^n-2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "args")]
pub enum SignatureMap {
    Identity,
    /// `ε ↦ ε + 1 (mod 2^n - 1)` on packed bits.
    CycleNext,
    /// Listed signature indices map to 0 (term dropped), the rest unchanged.
    Drop(Vec<u32>),
}

impl SignatureMap {
    pub fn map(&self, sig: usize, n: usize) -> Option<usize> {
        let count = (1usize << n) - 1;
        match self {
            SignatureMap::Identity => Some(sig),
            SignatureMap::CycleNext => Some((sig + 1) % count),
            SignatureMap::Drop(list) => {
                if list.contains(&(sig as u32)) {
                    None
                } else {
                    Some(sig)
                }
            }
        }
    }
}

/// A concrete choice of dyadic shift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSpec {
    /// Child offset bits per axis; the selected child is `Q.child(offset)`.
    pub child_offset: Vec<u8>,
    pub signature_map: SignatureMap,
}

impl ShiftSpec {
    /// Smallest-index child, identity on signatures.
    pub fn lower_child(n: usize) -> ShiftSpec {
        ShiftSpec { child_offset: vec![0; n], signature_map: SignatureMap::Identity }
    }

    /// Upper child with a signature rotation; a second spec distinct from
    /// the default in both coordinates.
    pub fn upper_child_cycled(n: usize) -> ShiftSpec {
        ShiftSpec { child_offset: vec![1; n], signature_map: SignatureMap::CycleNext }
    }
}

/// Shift in coefficient space: coarse and fine blocks map to zero.
pub fn haar_shift_coeffs(
    spec: &ShiftSpec,
    coeffs: &HaarCoefficients,
    system: &DyadicSystem,
) -> Result<HaarCoefficients> {
    let grid = *system.grid();
    let n = grid.dim();
    let sigs = (1usize << n) - 1;
    let mut out = HaarCoefficients::zeros_like(system);
    if grid.max_level() < 2 {
        return Ok(out);
    }
    for k in 0..=grid.max_level() - 2 {
        for q in system.level(k) {
            let flat = system.flat_index(q);
            let target = q.child(&grid, &spec.child_offset)?;
            let tflat = system.flat_index(&target);
            for sig in 0..sigs {
                if let Some(tsig) = spec.signature_map.map(sig, n) {
                    let v = coeffs.get(k, flat, sig);
                    if v != 0.0 {
                        out.add(k + 1, tflat, tsig, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Ш f` as a grid function.
pub fn haar_shift_apply(
    spec: &ShiftSpec,
    f: &GridFunction,
    system: &DyadicSystem,
) -> Result<GridFunction> {
    let coeffs = analyze(f, system)?;
    let shifted = haar_shift_coeffs(spec, &coeffs, system)?;
    synthesize(&shifted, system)
}
