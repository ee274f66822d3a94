//! Shifted dyadic systems on the unit torus.
//!
//! The domain is `[0,1)^n` with periodic wrap, sampled by `N = 3·2^L` cells
//! per axis. The factor 3 makes every 1/3-shift an exact lattice point at
//! every level `k ≤ L`, so all nine (for n = 2) adjacent systems live on the
//! same cell lattice with no rounding:
//!
//! ```text
//!   D^ω_k = { 2^{-k}([0,1)^n + m + (-1)^k ω) mod 1 :  m ∈ (Z mod 2^k)^n },
//!   ω ∈ {0, 1/3, 2/3}^n.
//! ```
//!
//! In cell units the anchor of the cube `(ω, k, m)` is
//! `side·m_i + (-1)^k j_i 2^{L-k} (mod N)` with `side = 3·2^{L-k}` and
//! `j_i ∈ {0,1,2}` the numerator of `ω_i`; every quantity here is an integer.

use crate::error::{Error, Result};
use crate::lattice;

/// Periodic grid: `n` axes, dyadic depth `L`, `N = 3·2^L` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
    levels: usize,
    samples: usize,
}

impl TorusGrid {
    pub fn new(n: usize, levels: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("dimension must be >= 1".into()));
        }
        if levels == 0 || levels > 16 {
            return Err(Error::Config("dyadic depth must be in 1..=16".into()));
        }
        Ok(TorusGrid { n, levels, samples: 3 << levels })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Maximal dyadic level L.
    pub fn max_level(&self) -> usize {
        self.levels
    }

    /// Samples per axis, `N = 3·2^L`.
    pub fn samples_per_axis(&self) -> usize {
        self.samples
    }

    /// Cell width `h = 1/N`.
    pub fn cell_width(&self) -> f64 {
        1.0 / self.samples as f64
    }

    /// Total number of cells `N^n`.
    pub fn cells(&self) -> usize {
        self.samples.pow(self.n as u32)
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.n as i32)
    }

    /// Side of a level-`k` cube in cells, `3·2^{L-k}`.
    pub fn side_cells(&self, level: usize) -> usize {
        self.samples >> level
    }

    /// Coordinates of the center of a cell, per axis `(i + 1/2)·h`.
    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        lattice::decode(flat, self.n, self.samples)
            .iter()
            .map(|&c| (c as f64 + 0.5) * self.cell_width())
            .collect()
    }

    /// Euclidean torus distance between two points of `[0,1)^n`.
    pub fn torus_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = (x - y).abs().fract();
                let d = d.min(1.0 - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn decode_cell(&self, flat: usize) -> Vec<usize> {
        lattice::decode(flat, self.n, self.samples)
    }

    pub fn encode_cell(&self, coords: &[usize]) -> usize {
        lattice::encode(coords, self.samples)
    }
}

/// A 1/3-shift vector; coordinate `j_i ∈ {0,1,2}` stands for `ω_i = j_i/3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shift(pub Vec<u8>);

impl Shift {
    pub fn zero(n: usize) -> Self {
        Shift(vec![0; n])
    }

    /// Parse from real coordinates; each must be exactly 0, 1/3 or 2/3.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        let mut thirds = Vec::with_capacity(coords.len());
        for &c in coords {
            let j = (c * 3.0).round();
            if !(0.0..=2.0).contains(&j) || (c * 3.0 - j).abs() > 1e-12 {
                return Err(Error::InvalidShift(format!("{c}")));
            }
            thirds.push(j as u8);
        }
        Ok(Shift(thirds))
    }

    /// Lexicographic index in `[0, 3^n)`, axis 0 most significant.
    pub fn index(&self) -> u16 {
        self.0.iter().fold(0u16, |a, &j| a * 3 + j as u16)
    }

    pub fn from_index(idx: u16, n: usize) -> Self {
        let mut v = vec![0u8; n];
        let mut r = idx;
        for i in (0..n).rev() {
            v[i] = (r % 3) as u8;
            r /= 3;
        }
        Shift(v)
    }

    /// All `3^n` shifts in lexicographic order.
    pub fn all(n: usize) -> Vec<Shift> {
        (0..3u16.pow(n as u32)).map(|i| Shift::from_index(i, n)).collect()
    }
}

/// Stable identity of a cube: shift index, level, and flattened position.
/// This triple is the serialization key used in every CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CubeKey {
    pub omega: u16,
    pub level: u8,
    pub m: u64,
}

/// One dyadic cube `(ω, k, m)` of a shifted system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub omega: Shift,
    pub level: usize,
    pub index: Vec<u32>,
}

impl DyadicCube {
    pub fn key(&self) -> CubeKey {
        let m = self
            .index
            .iter()
            .fold(0u64, |a, &mi| (a << self.level) | mi as u64);
        CubeKey { omega: self.omega.index(), level: self.level as u8, m }
    }

    /// Side length `ℓ(Q) = 2^{-k}`.
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Volume `|Q| = 2^{-kn}`.
    pub fn volume(&self) -> f64 {
        self.side().powi(self.index.len() as i32)
    }

    pub fn side_cells(&self, grid: &TorusGrid) -> usize {
        grid.side_cells(self.level)
    }

    /// Anchor (lower corner) in cell units, exact.
    pub fn anchor_cells(&self, grid: &TorusGrid) -> Vec<usize> {
        let n = grid.dim();
        let nn = grid.samples_per_axis() as i64;
        let side = grid.side_cells(self.level) as i64;
        let shift_unit = 1i64 << (grid.max_level() - self.level);
        let sign = if self.level % 2 == 0 { 1 } else { -1 };
        (0..n)
            .map(|i| {
                let a = side * self.index[i] as i64 + sign * self.omega.0[i] as i64 * shift_unit;
                (a.rem_euclid(nn)) as usize
            })
            .collect()
    }

    /// Center in half-cell units (exact; a level-L cube has odd side 3).
    pub fn center_halfcells(&self, grid: &TorusGrid) -> Vec<usize> {
        let two_n = 2 * grid.samples_per_axis();
        let side = grid.side_cells(self.level);
        self.anchor_cells(grid)
            .iter()
            .map(|&a| (2 * a + side) % two_n)
            .collect()
    }

    pub fn center(&self, grid: &TorusGrid) -> Vec<f64> {
        let hw = grid.cell_width() / 2.0;
        self.center_halfcells(grid).iter().map(|&c| c as f64 * hw).collect()
    }

    /// The cube as a subset of the torus: up to `2^n` unwrapped boxes.
    pub fn region(&self, grid: &TorusGrid) -> Region {
        Region::from_wrapped_box(grid, &self.anchor_cells(grid), &vec![self.side_cells(grid); grid.dim()])
    }

    /// Does this cube (as a torus subset) contain the given wrapped interval
    /// on every axis? `lo` in cells, `len` in cells.
    fn covers_wrapped(&self, grid: &TorusGrid, lo: &[usize], len: &[usize]) -> bool {
        let nn = grid.samples_per_axis();
        let side = self.side_cells(grid);
        let anchor = self.anchor_cells(grid);
        anchor
            .iter()
            .zip(lo.iter().zip(len))
            .all(|(&a, (&b, &u))| (b + nn - a) % nn + u <= side)
    }

    /// Containment of another cube of the same grid, as torus subsets.
    pub fn contains_cube(&self, grid: &TorusGrid, other: &DyadicCube) -> bool {
        let lo = other.anchor_cells(grid);
        let len = vec![other.side_cells(grid); grid.dim()];
        self.covers_wrapped(grid, &lo, &len)
    }

    pub fn contains_region(&self, grid: &TorusGrid, region: &Region) -> bool {
        region
            .boxes
            .iter()
            .all(|b| {
                let len: Vec<usize> = b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).collect();
                self.covers_wrapped(grid, &b.lo, &len)
            })
    }

    /// The `2^n` children, level `k+1`. Per axis the child indices are
    /// `2m + t + (-1)^k j (mod 2^{k+1})`, `t ∈ {0,1}`.
    pub fn children(&self, grid: &TorusGrid) -> Result<Vec<DyadicCube>> {
        let n = grid.dim();
        if self.level >= grid.max_level() {
            return Err(Error::MaxDepth(self.level));
        }
        let child_mod = 1u64 << (self.level + 1);
        let sign = if self.level % 2 == 0 { 1i64 } else { -1 };
        let mut out = Vec::with_capacity(1 << n);
        lattice::for_each_index(n, 2, |t| {
            let index = (0..n)
                .map(|i| {
                    let v = 2 * self.index[i] as i64 + t[i] as i64 + sign * self.omega.0[i] as i64;
                    v.rem_euclid(child_mod as i64) as u32
                })
                .collect();
            out.push(DyadicCube { omega: self.omega.clone(), level: self.level + 1, index });
        });
        Ok(out)
    }

    /// One child selected by its offset bits `t` (axis-wise 0 = lower half).
    pub fn child(&self, grid: &TorusGrid, t: &[u8]) -> Result<DyadicCube> {
        if self.level >= grid.max_level() {
            return Err(Error::MaxDepth(self.level));
        }
        let n = grid.dim();
        let child_mod = 1i64 << (self.level + 1);
        let sign = if self.level % 2 == 0 { 1i64 } else { -1 };
        let index = (0..n)
            .map(|i| {
                let v = 2 * self.index[i] as i64 + (t[i] & 1) as i64 + sign * self.omega.0[i] as i64;
                v.rem_euclid(child_mod) as u32
            })
            .collect();
        Ok(DyadicCube { omega: self.omega.clone(), level: self.level + 1, index })
    }

    /// Parent cube (level `k-1`), or `None` at level 0.
    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        let parent_level = self.level - 1;
        let sign = if parent_level % 2 == 0 { 1i64 } else { -1 };
        let this_mod = 1i64 << self.level;
        let parent_mod = 1i64 << parent_level;
        let index = self
            .index
            .iter()
            .zip(&self.omega.0)
            .map(|(&m, &j)| {
                let r = (m as i64 - sign * j as i64).rem_euclid(this_mod);
                ((r >> 1).rem_euclid(parent_mod)) as u32
            })
            .collect();
        Some(DyadicCube { omega: self.omega.clone(), level: parent_level, index })
    }
}

/// An axis-aligned half-open box with cell corners, not wrapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl CellBox {
    pub fn cell_count(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// A finite union of pairwise disjoint cell-aligned boxes on the torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub boxes: Vec<CellBox>,
}

impl Region {
    pub fn empty() -> Self {
        Region { boxes: Vec::new() }
    }

    pub fn whole(grid: &TorusGrid) -> Self {
        let n = grid.dim();
        Region {
            boxes: vec![CellBox { lo: vec![0; n], hi: vec![grid.samples_per_axis(); n] }],
        }
    }

    /// Decompose a wrapped box (anchor + extent per axis, in cells) into
    /// unwrapped boxes. An extent of `N` covers the whole axis.
    pub fn from_wrapped_box(grid: &TorusGrid, lo: &[usize], len: &[usize]) -> Self {
        let nn = grid.samples_per_axis();
        let n = grid.dim();
        // per-axis segments: one if the interval does not cross N, two otherwise
        let mut segments: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
        for i in 0..n {
            let l = lo[i] % nn;
            let u = len[i].min(nn);
            if u == 0 {
                return Region::empty();
            }
            if l + u <= nn {
                segments.push(vec![(l, l + u)]);
            } else {
                segments.push(vec![(l, nn), (0, l + u - nn)]);
            }
        }
        let mut boxes = Vec::new();
        let counts: Vec<usize> = segments.iter().map(|s| s.len()).collect();
        let mut pick = vec![0usize; n];
        loop {
            let mut lo_v = Vec::with_capacity(n);
            let mut hi_v = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = segments[i][pick[i]];
                lo_v.push(a);
                hi_v.push(b);
            }
            boxes.push(CellBox { lo: lo_v, hi: hi_v });
            let mut axis = n;
            loop {
                if axis == 0 {
                    return Region { boxes };
                }
                axis -= 1;
                pick[axis] += 1;
                if pick[axis] < counts[axis] {
                    break;
                }
                pick[axis] = 0;
            }
        }
    }

    pub fn cell_count(&self) -> usize {
        self.boxes.iter().map(|b| b.cell_count()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count() == 0
    }

    /// Measure as a subset of the torus.
    pub fn measure(&self, grid: &TorusGrid) -> f64 {
        self.cell_count() as f64 * grid.cell_volume()
    }

    pub fn for_each_cell(&self, grid: &TorusGrid, mut visit: impl FnMut(usize)) {
        for b in &self.boxes {
            lattice::for_each_in_box(&b.lo, &b.hi, |c| visit(grid.encode_cell(c)));
        }
    }

    /// Do this region and a wrapped box intersect?
    pub fn intersects_wrapped(&self, grid: &TorusGrid, lo: &[usize], len: &[usize]) -> bool {
        let other = Region::from_wrapped_box(grid, lo, len);
        for a in &self.boxes {
            for b in &other.boxes {
                if a.lo
                    .iter()
                    .zip(&a.hi)
                    .zip(b.lo.iter().zip(&b.hi))
                    .all(|((al, ah), (bl, bh))| al.max(bl) < ah.min(bh))
                {
                    return true;
                }
            }
        }
        false
    }
}

/// All cubes of one shifted system down to depth L, level-major then
/// index-minor: the canonical enumeration order for every serialized output.
#[derive(Debug, Clone)]
pub struct DyadicSystem {
    grid: TorusGrid,
    omega: Shift,
    cubes: Vec<DyadicCube>,
    level_start: Vec<usize>,
}

/// Build the system `D^ω` on the grid: `Σ_{k=0}^{L} 2^{kn}` cubes.
pub fn build_system(grid: &TorusGrid, omega: &Shift) -> Result<DyadicSystem> {
    let n = grid.dim();
    if omega.0.len() != n {
        return Err(Error::InvalidShift(format!("shift has {} coordinates, grid has {n}", omega.0.len())));
    }
    if omega.0.iter().any(|&j| j > 2) {
        return Err(Error::InvalidShift(format!("{:?}", omega.0)));
    }
    let mut cubes = Vec::new();
    let mut level_start = Vec::with_capacity(grid.max_level() + 2);
    for k in 0..=grid.max_level() {
        level_start.push(cubes.len());
        lattice::for_each_index(n, 1usize << k, |m| {
            cubes.push(DyadicCube {
                omega: omega.clone(),
                level: k,
                index: m.iter().map(|&v| v as u32).collect(),
            });
        });
    }
    level_start.push(cubes.len());
    Ok(DyadicSystem { grid: *grid, omega: omega.clone(), cubes, level_start })
}

/// The `3^n` adjacent systems in lexicographic shift order.
pub fn all_systems(grid: &TorusGrid) -> Vec<DyadicSystem> {
    Shift::all(grid.dim())
        .iter()
        .map(|w| build_system(grid, w).expect("shift enumeration is always valid"))
        .collect()
}

impl DyadicSystem {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn omega(&self) -> &Shift {
        &self.omega
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn level(&self, k: usize) -> &[DyadicCube] {
        &self.cubes[self.level_start[k]..self.level_start[k + 1]]
    }

    /// Position of a cube in the canonical enumeration.
    pub fn position(&self, level: usize, flat_index: usize) -> usize {
        self.level_start[level] + flat_index
    }

    /// Flat position of the cube's index vector within its level.
    pub fn flat_index(&self, cube: &DyadicCube) -> usize {
        cube.index
            .iter()
            .fold(0usize, |a, &m| (a << cube.level) | m as usize)
    }

    /// The cube of `D^ω_k` containing a given cell.
    pub fn cube_at_cell(&self, level: usize, cell_coords: &[usize]) -> DyadicCube {
        let nn = self.grid.samples_per_axis() as i64;
        let side = self.grid.side_cells(level) as i64;
        let shift_unit = 1i64 << (self.grid.max_level() - level);
        let sign = if level % 2 == 0 { 1i64 } else { -1 };
        let index = cell_coords
            .iter()
            .zip(&self.omega.0)
            .map(|(&c, &j)| {
                let rel = (c as i64 - sign * j as i64 * shift_unit).rem_euclid(nn);
                (rel / side) as u32
            })
            .collect();
        DyadicCube { omega: self.omega.clone(), level, index }
    }
}

/// Concentric enlargement `cQ`, wrapped and snapped outward to cell corners.
/// Returns the whole torus once `c·ℓ(Q) ≥ 1`.
pub fn enlarge(grid: &TorusGrid, cube: &DyadicCube, c: f64) -> Result<Region> {
    if !(c >= 1.0) {
        return Err(Error::EnlargementFactor(c));
    }
    let side = cube.side_cells(grid) as f64;
    if c * cube.side() >= 1.0 {
        return Ok(Region::whole(grid));
    }
    let nn = grid.samples_per_axis() as i64;
    let center_hc = cube.center_halfcells(grid);
    // bounds in half-cells, snapped outward to even (= cell) boundaries
    let half_extent = c * side; // in cells; full window side = c*side
    let mut lo = Vec::with_capacity(grid.dim());
    let mut len = Vec::with_capacity(grid.dim());
    for &ch in &center_hc {
        let lo_cell = ((ch as f64 - half_extent) / 2.0).floor() as i64;
        let hi_cell = ((ch as f64 + half_extent) / 2.0).ceil() as i64;
        let l = (hi_cell - lo_cell).min(nn);
        lo.push(lo_cell.rem_euclid(nn) as usize);
        len.push(l as usize);
    }
    Ok(Region::from_wrapped_box(grid, &lo, &len))
}

/// Result of the adjacent-systems containment search.
#[derive(Debug, Clone)]
pub struct ContainingCube {
    pub omega: Shift,
    pub cube: DyadicCube,
    /// Realized volume ratio `|Q| / |B|`.
    pub volume_ratio: f64,
    /// True when only the level-0 cube (the whole torus) contains the region.
    pub torus_scale_fallback: bool,
}

/// Find a shifted cube containing the region, smallest volume first and
/// lexicographic shift order among ties.
pub fn containing_cube(grid: &TorusGrid, region: &Region) -> Result<ContainingCube> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let diam = region_diameter_cells(grid, region);
    let nn = grid.samples_per_axis() as f64;
    if diam >= nn / 4.0 {
        return Err(Error::RegionTooLarge(format!(
            "diameter {:.3} >= 1/4 of the torus",
            diam / nn
        )));
    }
    let measure = region.measure(grid);
    let anchor_cell = region.boxes[0].lo.clone();
    for level in (1..=grid.max_level()).rev() {
        for omega in Shift::all(grid.dim()) {
            let system = build_system(grid, &omega)?;
            let cand = system.cube_at_cell(level, &anchor_cell);
            if cand.contains_region(grid, region) {
                let ratio = cand.volume() / measure;
                return Ok(ContainingCube { omega, cube: cand, volume_ratio: ratio, torus_scale_fallback: false });
            }
        }
    }
    let omega = Shift::zero(grid.dim());
    let cube = DyadicCube { omega: omega.clone(), level: 0, index: vec![0; grid.dim()] };
    Ok(ContainingCube { omega, cube, volume_ratio: 1.0 / measure, torus_scale_fallback: true })
}

/// Bounding extent diagonal of the region in cells (wrap-aware per box set:
/// computed from the tightest wrapped bounding box of all boxes).
fn region_diameter_cells(grid: &TorusGrid, region: &Region) -> f64 {
    let n = grid.dim();
    let nn = grid.samples_per_axis();
    // Take the first box corner as reference; measure extents relative to it.
    let reference = &region.boxes[0].lo;
    let mut extent = vec![0usize; n];
    for b in &region.boxes {
        for i in 0..n {
            let rel_lo = (b.lo[i] + nn - reference[i]) % nn;
            let rel_hi = rel_lo + (b.hi[i] - b.lo[i]);
            extent[i] = extent[i].max(rel_hi);
        }
    }
    (extent.iter().map(|&e| (e * e) as f64).sum::<f64>()).sqrt()
}

/// Two same-size cubes separated proportionally to their side length.
#[derive(Debug, Clone)]
pub struct WhitneyPair {
    pub p1: DyadicCube,
    pub p2: DyadicCube,
    pub distance: f64,
}

/// All same-level pairs with center distance in `[3√n·ℓ, 9√n·ℓ]`.
///
/// The window test is exact: in half-cell units the squared distance is an
/// integer compared against `36·n·s²` and `324·n·s²`.
pub fn whitney_pairs(system: &DyadicSystem, levels: std::ops::Range<usize>) -> Result<Vec<WhitneyPair>> {
    let grid = system.grid();
    let n = grid.dim();
    let nn = grid.samples_per_axis();
    let two_n = 2 * nn;
    let mut out = Vec::new();
    for k in levels {
        if k > grid.max_level() {
            return Err(Error::LevelOutOfRange { level: k, max: grid.max_level() });
        }
        let s = grid.side_cells(k);
        let lo_sq = 36 * n * s * s;
        let hi_sq = 324 * n * s * s;
        // admissible index offsets, identical for every cube of the level
        let per_axis = 1usize << k;
        let mut offsets: Vec<Vec<u32>> = Vec::new();
        lattice::for_each_index(n, per_axis, |delta| {
            let d_sq: usize = delta
                .iter()
                .map(|&d| {
                    let dh = (2 * s * d) % two_n;
                    let dh = dh.min(two_n - dh);
                    dh * dh
                })
                .sum();
            if d_sq >= lo_sq && d_sq <= hi_sq {
                offsets.push(delta.iter().map(|&d| d as u32).collect());
            }
        });
        if offsets.is_empty() {
            return Err(Error::LevelTooCoarse(k));
        }
        let max_partners = (20.0 * (n as f64).sqrt()).powi(n as i32);
        debug_assert!((offsets.len() as f64) <= max_partners);
        for q in system.level(k) {
            for delta in &offsets {
                let index: Vec<u32> = q
                    .index
                    .iter()
                    .zip(delta)
                    .map(|(&m, &d)| (m + d) % per_axis as u32)
                    .collect();
                let p2 = DyadicCube { omega: q.omega.clone(), level: k, index };
                let d = grid.torus_distance(&q.center(grid), &p2.center(grid));
                out.push(WhitneyPair { p1: q.clone(), p2, distance: d });
            }
        }
    }
    Ok(out)
}
