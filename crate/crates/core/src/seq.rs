//! Cube-indexed sequences: rearrangements, `ℓ^{p,q}` Lorentz norms, and the
//! three maximal operators acting on them.
//!
//! The Lorentz norm of a nonnegative sequence is computed on its
//! non-increasing rearrangement `a*`:
//!
//! ```text
//!   ‖a‖_{p,q} = (Σ_k (a*_k)^q k^{q/p-1})^{1/q},     ‖a‖_{p,∞} = sup_k k^{1/p} a*_k.
//! ```

use crate::error::{Error, Result};
use crate::grid::{enlarge, CubeKey, DyadicSystem};
use crate::weights::Weight;

/// Nonnegative values indexed by cube keys; keys unique.
#[derive(Debug, Clone, Default)]
pub struct IndexedSequence {
    pub entries: Vec<(CubeKey, f64)>,
}

impl IndexedSequence {
    pub fn new(entries: Vec<(CubeKey, f64)>) -> Result<IndexedSequence> {
        for (i, (_, v)) in entries.iter().enumerate() {
            if *v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeSequenceValue { index: i, value: *v });
            }
        }
        Ok(IndexedSequence { entries })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values().fold(0.0, f64::max)
    }

    /// Non-increasing rearrangement, stable with respect to entry order
    /// among ties.
    pub fn rearrange(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values().collect();
        v.sort_by(|a, b| b.partial_cmp(a).expect("values are finite"));
        v
    }

    pub fn lorentz_norm(&self, p: f64, q: f64) -> Result<f64> {
        lorentz_of_sorted(&self.rearrange(), p, q)
    }
}

/// Lorentz norm of an already non-increasing list.
pub fn lorentz_of_sorted(sorted_desc: &[f64], p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::LorentzExponents { p, q });
    }
    if q.is_infinite() {
        let mut sup = 0.0f64;
        for (k, &a) in sorted_desc.iter().enumerate() {
            sup = sup.max(((k + 1) as f64).powf(1.0 / p) * a);
        }
        return Ok(sup);
    }
    let mut sum = 0.0;
    for (k, &a) in sorted_desc.iter().enumerate() {
        sum += a.powf(q) * ((k + 1) as f64).powf(q / p - 1.0);
    }
    Ok(sum.powf(1.0 / q))
}

/// Checks that a sequence covers exactly the cubes of the system, and
/// returns the values in canonical system order.
fn align(s: &IndexedSequence, system: &DyadicSystem) -> Result<Vec<f64>> {
    if s.len() != system.len() {
        return Err(Error::MissingKeys);
    }
    let mut vals = vec![f64::NAN; system.len()];
    let omega = system.omega().index();
    for (key, v) in &s.entries {
        if key.omega != omega || key.level as usize > system.grid().max_level() {
            return Err(Error::MissingKeys);
        }
        let pos = system.position(key.level as usize, key.m as usize);
        if !vals[pos].is_nan() {
            return Err(Error::MissingKeys);
        }
        vals[pos] = *v;
    }
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::MissingKeys);
    }
    Ok(vals)
}

fn repackage(system: &DyadicSystem, vals: Vec<f64>) -> IndexedSequence {
    let entries = system
        .cubes()
        .iter()
        .zip(vals)
        .map(|(q, v)| (q.key(), v))
        .collect();
    IndexedSequence { entries }
}

fn region_covers(region: &crate::grid::Region, grid: &crate::grid::TorusGrid, lo: &[usize], len: &[usize]) -> bool {
    // every cell of the wrapped box must lie in the region; boxes are cell
    // aligned so it suffices to check cell membership via intersection count
    let boxed = crate::grid::Region::from_wrapped_box(grid, lo, len);
    let mut covered = 0usize;
    for b in &boxed.boxes {
        for rb in &region.boxes {
            let mut inter = 1usize;
            for i in 0..lo.len() {
                let l = b.lo[i].max(rb.lo[i]);
                let h = b.hi[i].min(rb.hi[i]);
                inter *= h.saturating_sub(l);
            }
            covered += inter;
        }
    }
    covered == boxed.cell_count()
}

/// `M(s)(Q) = Σ_{P: ℓ(P) = ℓ(Q), P ∩ cQ ≠ ∅} s(P)`.
pub fn maximal_neighbor(
    s: &IndexedSequence,
    system: &DyadicSystem,
    c: f64,
) -> Result<IndexedSequence> {
    if !(c >= 1.0) {
        return Err(Error::EnlargementFactor(c));
    }
    let vals = align(s, system)?;
    let grid = system.grid();
    let mut out = vec![0.0; vals.len()];
    for k in 0..=grid.max_level() {
        let offsets = relative_offsets(system, k, k, c, false);
        let per_axis = 1u32 << k;
        for q in system.level(k) {
            let qpos = system.position(k, system.flat_index(q));
            let mut acc = 0.0;
            for delta in &offsets {
                let mut flat = 0usize;
                for (m, d) in q.index.iter().zip(delta) {
                    flat = (flat << k) | ((m + d) % per_axis) as usize;
                }
                acc += vals[system.position(k, flat)];
            }
            out[qpos] = acc;
        }
    }
    Ok(repackage(system, out))
}

/// Offsets of source-level cubes relative to a target-level cube, valid for
/// every target cube by periodicity. For same-level queries the offset is an
/// index difference; across levels it is the absolute source index of the
/// hit cubes when the target is cube 0, shifted by the target anchor in
/// source-index units.
fn relative_offsets(
    system: &DyadicSystem,
    k: usize,
    src_level: usize,
    c: f64,
    require_subset: bool,
) -> Vec<Vec<u32>> {
    debug_assert!(src_level >= k);
    let grid = system.grid();
    let n = grid.dim();
    let q0 = &system.level(k)[0];
    let window = enlarge(grid, q0, c).expect("validated");
    let per_axis = 1usize << src_level;
    let side = grid.side_cells(src_level);
    // source cubes hit by the window of cube 0, recorded as index offsets
    // relative to the source cube aligned with cube 0's anchor
    let sys_src = system.level(src_level);
    let base = {
        let anchor0 = q0.anchor_cells(grid);
        let aligned = system.cube_at_cell(src_level, &anchor0);
        aligned.index.clone()
    };
    let mut out = Vec::new();
    for p in sys_src {
        let hit = if require_subset {
            region_covers(&window, grid, &p.anchor_cells(grid), &vec![side; n])
        } else {
            window.intersects_wrapped(grid, &p.anchor_cells(grid), &vec![side; n])
        };
        if hit {
            let delta: Vec<u32> = p
                .index
                .iter()
                .zip(&base)
                .map(|(&m, &b)| (m + per_axis as u32 - b) % per_axis as u32)
                .collect();
            out.push(delta);
        }
    }
    out
}

/// Source-level index of the cube aligned with the anchor of a target cube.
fn aligned_source_index(system: &DyadicSystem, q: &crate::grid::DyadicCube, src_level: usize) -> Vec<u32> {
    let grid = system.grid();
    let anchor = q.anchor_cells(grid);
    system.cube_at_cell(src_level, &anchor).index
}

/// `M̃(s)(Q) = [μ(Q)^{-1} Σ_{P: ℓ(P) ≤ ℓ(Q), P ∩ cQ ≠ ∅} μ(P)(log₂(ℓ(Q)/ℓ(P)) + 1)² s(P)²]^{1/2}`.
pub fn maximal_logweighted(
    s: &IndexedSequence,
    system: &DyadicSystem,
    mu: &Weight,
    c: f64,
) -> Result<IndexedSequence> {
    if !(c >= 1.0) {
        return Err(Error::EnlargementFactor(c));
    }
    if mu.grid() != system.grid() {
        return Err(Error::GridMismatch);
    }
    let vals = align(s, system)?;
    let grid = system.grid();
    let big_l = grid.max_level();
    // per-cube masses in canonical order
    let masses: Vec<f64> = system.cubes().iter().map(|q| mu.mass_cube(q)).collect();
    let mut out = vec![0.0; vals.len()];
    for k in 0..=big_l {
        let offset_sets: Vec<(usize, Vec<Vec<u32>>)> = (k..=big_l)
            .map(|src| (src, relative_offsets(system, k, src, c, false)))
            .collect();
        for q in system.level(k) {
            let qpos = system.position(k, system.flat_index(q));
            let mut acc = 0.0;
            for (src, offsets) in &offset_sets {
                let log_factor = ((*src - k) as f64 + 1.0).powi(2);
                let base = aligned_source_index(system, q, *src);
                let per_axis = 1u32 << *src;
                for delta in offsets {
                    let mut flat = 0usize;
                    for (b, d) in base.iter().zip(delta) {
                        flat = (flat << *src) | ((b + d) % per_axis) as usize;
                    }
                    let pos = system.position(*src, flat);
                    acc += masses[pos] * log_factor * vals[pos] * vals[pos];
                }
            }
            out[qpos] = (acc / masses[qpos]).sqrt();
        }
    }
    Ok(repackage(system, out))
}

/// How the Carleson-type operator aggregates descendants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarlesonMode {
    /// `ν(Q)^{-1} Σ_{P ⊂ cQ, ℓ(P) ≤ ℓ(Q)} ν(P) s(P)` with the supplied weight.
    DescendantWeighted,
    /// `|P|^{-1} Σ_{R ⊂ P} s(R) |R|` (Lebesgue; the summand is indexed by R).
    Lebesgue,
    /// Literal variant where the summand stays at the outer cube:
    /// `|P|^{-1} Σ_{R ⊂ P} s(P) |R| = (L - k + 1) s(P)`.
    LebesgueLiteral,
}

/// Carleson-type averages; in the Lebesgue modes `w` is ignored.
pub fn maximal_carleson(
    s: &IndexedSequence,
    system: &DyadicSystem,
    w: Option<&Weight>,
    mode: CarlesonMode,
    c: f64,
) -> Result<IndexedSequence> {
    if !(c >= 1.0) {
        return Err(Error::EnlargementFactor(c));
    }
    let vals = align(s, system)?;
    let grid = system.grid();
    let big_l = grid.max_level();
    let n = grid.dim();
    let mut out = vec![0.0; vals.len()];
    match mode {
        CarlesonMode::DescendantWeighted => {
            let nu = w.ok_or_else(|| Error::Config("descendant mode needs a weight".into()))?;
            if nu.grid() != system.grid() {
                return Err(Error::GridMismatch);
            }
            let masses: Vec<f64> = system.cubes().iter().map(|q| nu.mass_cube(q)).collect();
            for k in 0..=big_l {
                let offset_sets: Vec<(usize, Vec<Vec<u32>>)> = (k..=big_l)
                    .map(|src| (src, relative_offsets(system, k, src, c, true)))
                    .collect();
                for q in system.level(k) {
                    let qpos = system.position(k, system.flat_index(q));
                    let mut acc = 0.0;
                    for (src, offsets) in &offset_sets {
                        let base = aligned_source_index(system, q, *src);
                        let per_axis = 1u32 << *src;
                        for delta in offsets {
                            let mut flat = 0usize;
                            for (b, d) in base.iter().zip(delta) {
                                flat = (flat << *src) | ((b + d) % per_axis) as usize;
                            }
                            let pos = system.position(*src, flat);
                            acc += masses[pos] * vals[pos];
                        }
                    }
                    out[qpos] = acc / masses[qpos];
                }
            }
        }
        CarlesonMode::Lebesgue | CarlesonMode::LebesgueLiteral => {
            // descendants within the same system: child-index arithmetic
            for k in (0..=big_l).rev() {
                for q in system.level(k) {
                    let qpos = system.position(k, system.flat_index(q));
                    let vol_q = q.volume();
                    let mut acc = 0.0;
                    // iterate descendants by levels
                    let mut frontier = vec![q.clone()];
                    for src in k..=big_l {
                        let weight = (0.5f64).powi((src * n) as i32); // |R|
                        for r in &frontier {
                            let pos = system.position(src, system.flat_index(r));
                            let summand = match mode {
                                CarlesonMode::Lebesgue => vals[pos],
                                _ => vals[qpos],
                            };
                            acc += summand * weight;
                        }
                        if src < big_l {
                            frontier = frontier
                                .iter()
                                .flat_map(|r| r.children(grid).expect("level < L"))
                                .collect();
                        }
                    }
                    out[qpos] = acc / vol_q;
                }
            }
        }
    }
    Ok(repackage(system, out))
}

/// Discrete Carleson norm: `sup_P |P|^{-1} Σ_{R ⊂ P} s(R)|R|`.
pub fn cmd_norm(s: &IndexedSequence, system: &DyadicSystem) -> Result<f64> {
    let m = maximal_carleson(s, system, None, CarlesonMode::Lebesgue, 1.0)?;
    Ok(m.max())
}
