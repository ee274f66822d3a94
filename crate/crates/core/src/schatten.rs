//! Singular spectra and Schatten–Lorentz norms, plus the two
//! Rochberg–Semmes style diagnostics: the NWO size ratio and the frame
//! pairing sum.

use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::grid::{CubeKey, DyadicCube, TorusGrid};
use crate::operators::DenseOperator;
use crate::seq::{lorentz_of_sorted, IndexedSequence};

/// Non-increasing singular values with their source dimensions.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl SingularSpectrum {
    /// Values below `1e-12 · s₁` count as numerically zero.
    pub fn zero_threshold(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0) * 1e-12
    }

    pub fn numerical_rank(&self) -> usize {
        let t = self.zero_threshold();
        self.values.iter().filter(|&&s| s > t).count()
    }

    /// The spectrum with numerically-zero trailing noise removed.
    pub fn significant(&self) -> &[f64] {
        let t = self.zero_threshold();
        let k = self.values.partition_point(|&s| s > t);
        &self.values[..k]
    }

    /// CSV rows `(k, s_k)`, 1-based.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("k,s_k\n");
        for (k, s) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.12e}\n", k + 1, s));
        }
        out
    }
}

/// Full singular spectrum of a dense operator.
pub fn singular_values(t: &DenseOperator) -> Result<SingularSpectrum> {
    if t.has_nan() {
        return Err(Error::NanMatrix);
    }
    // one decomposition = one unit of work; keep it single threaded
    faer::set_global_parallelism(faer::Par::Seq);
    let m = faer::Mat::from_fn(t.rows, t.cols, |i, j| t.data[i * t.cols + j]);
    let values = m.singular_values().map_err(|_| Error::SvdFailed)?;
    Ok(SingularSpectrum { values, rows: t.rows, cols: t.cols })
}

/// Schatten–Lorentz norm `S^{p,q}` of a spectrum; `q = p` is the plain
/// Schatten p-norm. Numerically-zero trailing values are discarded first.
pub fn schatten_lorentz_norm(spectrum: &SingularSpectrum, p: f64, q: f64) -> Result<f64> {
    lorentz_of_sorted(spectrum.significant(), p, q)
}

#[derive(Debug, Clone)]
pub struct NwoReport {
    pub sup_ratio: f64,
    pub worst: Option<CubeKey>,
    /// Realized per-cube ratios in family order.
    pub ratios: Vec<f64>,
}

/// `sup_Q ‖e_Q‖_{L^r(grid)} / |Q|^{1/r - 1/2}` over a cube-indexed family.
/// Functions must be supported in their cubes (leak beyond 1e-14 is an error).
pub fn nwo_ratio(
    grid: &TorusGrid,
    family: &[(DyadicCube, GridFunction)],
    r: f64,
) -> Result<NwoReport> {
    if !(r > 2.0) {
        return Err(Error::LorentzExponents { p: r, q: r });
    }
    let mut sup = 0.0f64;
    let mut worst = None;
    let mut ratios = Vec::with_capacity(family.len());
    for (cube, e) in family {
        if e.grid() != grid {
            return Err(Error::GridMismatch);
        }
        // support check
        let mut inside = vec![false; grid.cells()];
        cube.region(grid).for_each_cell(grid, |c| inside[c] = true);
        let leak = e
            .values()
            .iter()
            .enumerate()
            .filter(|(c, _)| !inside[*c])
            .map(|(_, v)| v.abs())
            .fold(0.0f64, f64::max);
        if leak > 1e-14 {
            return Err(Error::SupportViolation(leak));
        }
        let ratio = e.lp_norm(r) / cube.volume().powf(1.0 / r - 0.5);
        ratios.push(ratio);
        if ratio > sup {
            sup = ratio;
            worst = Some(cube.key());
        }
    }
    Ok(NwoReport { sup_ratio: sup, worst, ratios })
}

/// Lorentz norm of the pairing sequence `{⟨T e_Q, f_Q⟩}` of two frames
/// indexed by the same cubes.
pub fn rs_pairing_sum(
    t: &DenseOperator,
    frame_e: &[(CubeKey, GridFunction)],
    frame_f: &[(CubeKey, GridFunction)],
    p: f64,
    q: f64,
) -> Result<f64> {
    if frame_e.len() != frame_f.len()
        || frame_e.iter().zip(frame_f).any(|((a, _), (b, _))| a != b)
    {
        return Err(Error::FrameIndexMismatch);
    }
    let mut entries = Vec::with_capacity(frame_e.len());
    for ((key, e), (_, f)) in frame_e.iter().zip(frame_f) {
        let te = t.apply(e)?;
        entries.push((*key, te.inner(f)?.abs()));
    }
    IndexedSequence::new(entries)?.lorentz_norm(p, q)
}
