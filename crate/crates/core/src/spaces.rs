//! Weighted symbol-space norms: oscillation sequences over enlarged cubes,
//! the dyadic Besov norm in its equivalent forms, the weak-type oscillation
//! norm, BMO/VMO profiles, the Sobolev–Slobodeckii double sum, medians, and
//! mollification.

use crate::error::{Error, Result};
use crate::field::{GridFunction, PrefixTable};
use crate::fft;
use crate::grid::{all_systems, build_system, enlarge, DyadicSystem, Region, Shift};
use crate::haar::{analyze, cube_averages};
use crate::seq::IndexedSequence;
use crate::weights::TwoWeights;
use num_complex::Complex64;

/// The three oscillation measurements over the window `cQ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscVariant {
    /// `ν(cQ)^{-1} ∫_{cQ} |b - ⟨b⟩_{cQ}|`
    L1Nu,
    /// `[μ(cQ)^{-1} ∫_{cQ} |b - ⟨b⟩_{cQ}|² λ]^{1/2}`
    L2LambdaOverMu,
    /// `[λ^{-1}(cQ)^{-1} ∫_{cQ} |b - ⟨b⟩_{cQ}|² μ^{-1}]^{1/2}`
    L2MuInvOverLambdaInv,
}

impl OscVariant {
    pub fn label(&self) -> &'static str {
        match self {
            OscVariant::L1Nu => "L1-nu",
            OscVariant::L2LambdaOverMu => "L2-lambda-over-mu",
            OscVariant::L2MuInvOverLambdaInv => "L2-muinv-over-lambdainv",
        }
    }
}

/// Per-cube oscillation values of one variant over one system.
#[derive(Debug, Clone)]
pub struct OscillationReport {
    pub variant: OscVariant,
    pub factor: f64,
    pub seq: IndexedSequence,
}

impl OscillationReport {
    pub fn lorentz(&self, p: f64, q: f64) -> Result<f64> {
        self.seq.lorentz_norm(p, q)
    }

    /// CSV rows `(omega, level, m, variant, value)`.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("omega,level,m,variant,value\n");
        for (key, v) in &self.seq.entries {
            out.push_str(&format!(
                "{},{},{},{},{:.12e}\n",
                key.omega,
                key.level,
                key.m,
                self.variant.label(),
                v
            ));
        }
        out
    }
}

/// Oscillation of `b` over the `c`-enlargement of every cube of one system.
/// Averages `⟨b⟩_{cQ}` are unweighted Lebesgue averages.
pub fn oscillation_sequence(
    b: &GridFunction,
    weights: &TwoWeights,
    system: &DyadicSystem,
    c: f64,
    variant: OscVariant,
) -> Result<OscillationReport> {
    if b.grid() != system.grid() || weights.grid() != system.grid() {
        return Err(Error::GridMismatch);
    }
    if !(c >= 1.0) {
        return Err(Error::EnlargementFactor(c));
    }
    let grid = *system.grid();
    // every variant subtracts window averages, so values are invariant under
    // adding constants; centering at the global mean keeps the prefix-table
    // cancellations well conditioned
    let b = {
        let m = b.mean();
        GridFunction::from_values(&grid, b.values().iter().map(|v| v - m).collect())?
    };
    let b = &b;
    let b_prefix = PrefixTable::build(&grid, b.values());
    // the squared integrands are accumulated cell by cell (every term
    // nonnegative) rather than by prefix-table differences, which would
    // cancel catastrophically on windows where the symbol is locally
    // constant and break the exact per-cube Cauchy-Schwarz chain
    let quad_weight: Option<&[f64]> = match variant {
        OscVariant::L1Nu => None,
        OscVariant::L2LambdaOverMu => Some(weights.lambda.values()),
        OscVariant::L2MuInvOverLambdaInv => Some(weights.mu_inv.values()),
    };
    let mut entries = Vec::with_capacity(system.len());
    for q in system.cubes() {
        let window = enlarge(&grid, q, c)?;
        let vol = window.measure(&grid);
        let avg = b_prefix.region_sum(&window) / vol;
        let value = match variant {
            OscVariant::L1Nu => {
                let mut s = 0.0;
                window.for_each_cell(&grid, |cell| s += (b.value(cell) - avg).abs());
                s * grid.cell_volume() / weights.nu.mass(&window)
            }
            OscVariant::L2LambdaOverMu => {
                let w = quad_weight.unwrap();
                let mut s = 0.0;
                window.for_each_cell(&grid, |cell| {
                    let d = b.value(cell) - avg;
                    s += d * d * w[cell];
                });
                (s * grid.cell_volume() / weights.mu.mass(&window)).sqrt()
            }
            OscVariant::L2MuInvOverLambdaInv => {
                let w = quad_weight.unwrap();
                let mut s = 0.0;
                window.for_each_cell(&grid, |cell| {
                    let d = b.value(cell) - avg;
                    s += d * d * w[cell];
                });
                (s * grid.cell_volume() / weights.lambda_inv.mass(&window)).sqrt()
            }
        };
        entries.push((q.key(), value.max(0.0)));
    }
    Ok(OscillationReport { variant, factor: c, seq: IndexedSequence { entries } })
}

/// The four admissible normalizations `R(Q)` of the Haar-form Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqChoice {
    /// `|Q| / ν(Q)`
    VolOverNu,
    /// `|Q| / (λ^{-1}(Q)^{1/2} μ(Q)^{1/2})`
    VolOverSqrtLambdaInvMu,
    /// `ν^{-1}(Q) / |Q|`
    NuInvOverVol,
    /// `λ(Q)^{1/2} μ^{-1}(Q)^{1/2} / |Q|`
    SqrtLambdaMuInvOverVol,
}

impl RqChoice {
    pub const ALL: [RqChoice; 4] = [
        RqChoice::VolOverNu,
        RqChoice::VolOverSqrtLambdaInvMu,
        RqChoice::NuInvOverVol,
        RqChoice::SqrtLambdaMuInvOverVol,
    ];
}

/// Value of `R(Q)` for one cube.
pub fn rq_value(choice: RqChoice, weights: &TwoWeights, cube: &crate::grid::DyadicCube) -> f64 {
    let grid = weights.grid();
    let r = cube.region(grid);
    let vol = cube.volume();
    match choice {
        RqChoice::VolOverNu => vol / weights.nu.mass(&r),
        RqChoice::VolOverSqrtLambdaInvMu => {
            vol / (weights.lambda_inv.mass(&r) * weights.mu.mass(&r)).sqrt()
        }
        RqChoice::NuInvOverVol => weights.nu_inv.mass(&r) / vol,
        RqChoice::SqrtLambdaMuInvOverVol => {
            (weights.lambda.mass(&r) * weights.mu_inv.mass(&r)).sqrt() / vol
        }
    }
}

/// Besov-norm forms. The average and martingale forms follow the displayed
/// sums; the Haar form weighs normalized coefficients by a choice of `R(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesovForm {
    Average,
    Haar(RqChoice),
    MartingaleL1Nu,
    MartingaleL2LambdaMu,
    MartingaleL2MuInvLambdaInv,
}

impl BesovForm {
    pub fn label(&self) -> &'static str {
        match self {
            BesovForm::Average => "average",
            BesovForm::Haar(RqChoice::VolOverNu) => "haar-vol-over-nu",
            BesovForm::Haar(RqChoice::VolOverSqrtLambdaInvMu) => "haar-vol-over-sqrt",
            BesovForm::Haar(RqChoice::NuInvOverVol) => "haar-nuinv-over-vol",
            BesovForm::Haar(RqChoice::SqrtLambdaMuInvOverVol) => "haar-sqrt-over-vol",
            BesovForm::MartingaleL1Nu => "martingale-L1nu",
            BesovForm::MartingaleL2LambdaMu => "martingale-L2lambdamu",
            BesovForm::MartingaleL2MuInvLambdaInv => "martingale-L2muinvlambdainv",
        }
    }
}

/// Which systems the norm sums over.
#[derive(Debug, Clone, PartialEq)]
pub enum Scope {
    OneSystem(Shift),
    /// Sum of the per-system norms over all `3^n` shifts.
    Intersection,
}

impl Scope {
    pub fn label(&self) -> String {
        match self {
            Scope::OneSystem(w) => format!("omega-{}", w.index()),
            Scope::Intersection => "intersection".into(),
        }
    }
}

/// Dyadic Besov norm of the symbol in the requested form and scope.
pub fn besov_norm(
    b: &GridFunction,
    weights: &TwoWeights,
    p: f64,
    form: BesovForm,
    scope: &Scope,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::LorentzExponents { p, q: p });
    }
    if b.grid() != weights.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *b.grid();
    match scope {
        Scope::OneSystem(omega) => {
            let system = build_system(&grid, omega)?;
            besov_norm_one_system(b, weights, p, form, &system)
        }
        Scope::Intersection => {
            let mut total = 0.0;
            for system in all_systems(&grid) {
                total += besov_norm_one_system(b, weights, p, form, &system)?;
            }
            Ok(total)
        }
    }
}

fn besov_norm_one_system(
    b: &GridFunction,
    weights: &TwoWeights,
    p: f64,
    form: BesovForm,
    system: &DyadicSystem,
) -> Result<f64> {
    let grid = *system.grid();
    let n = grid.dim();
    let mut sum = 0.0f64;
    match form {
        BesovForm::Average => {
            let b_prefix = PrefixTable::build(&grid, b.values());
            for q in system.cubes() {
                let region = q.region(&grid);
                let vol = q.volume();
                let avg = b_prefix.region_sum(&region) / vol;
                let mut osc = 0.0;
                region.for_each_cell(&grid, |cell| osc += (b.value(cell) - avg).abs());
                osc *= grid.cell_volume();
                sum += (osc / weights.nu.mass(&region)).powf(p);
            }
        }
        BesovForm::Haar(choice) => {
            let coeffs = analyze(b, system)?;
            let sigs = (1usize << n) - 1;
            for k in 0..grid.max_level() {
                for q in system.level(k) {
                    let flat = system.flat_index(q);
                    let rq = rq_value(choice, weights, q);
                    let scale = rq / q.volume().sqrt();
                    for si in 0..sigs {
                        let c = coeffs.get(k, flat, si).abs();
                        sum += (c * scale).powf(p);
                    }
                }
            }
        }
        BesovForm::MartingaleL1Nu
        | BesovForm::MartingaleL2LambdaMu
        | BesovForm::MartingaleL2MuInvLambdaInv => {
            let averages = cube_averages(b, system);
            for k in 0..grid.max_level() {
                for q in system.level(k) {
                    let avg_q = averages[k][system.flat_index(q)];
                    let children = q.children(&grid)?;
                    let term = match form {
                        BesovForm::MartingaleL1Nu => {
                            let mut int = 0.0;
                            for child in &children {
                                let d = averages[k + 1][system.flat_index(child)] - avg_q;
                                int += d.abs() * child.volume();
                            }
                            int / weights.nu.mass_cube(q)
                        }
                        BesovForm::MartingaleL2LambdaMu => {
                            let mut int = 0.0;
                            for child in &children {
                                let d = averages[k + 1][system.flat_index(child)] - avg_q;
                                int += d * d * weights.lambda.mass_cube(child);
                            }
                            (int / weights.mu.mass_cube(q)).sqrt()
                        }
                        _ => {
                            let mut int = 0.0;
                            for child in &children {
                                let d = averages[k + 1][system.flat_index(child)] - avg_q;
                                int += d * d * weights.mu_inv.mass_cube(child);
                            }
                            (int / weights.lambda_inv.mass_cube(q)).sqrt()
                        }
                    };
                    sum += term.powf(p);
                }
            }
        }
    }
    Ok(sum.powf(1.0 / p))
}

/// Weak-type oscillation norm: `ℓ^{n,∞}` of the `L1-ν` oscillation sequence
/// over the `c`-enlargements of one system.
pub fn wnu_norm(
    b: &GridFunction,
    weights: &TwoWeights,
    system: &DyadicSystem,
    c: f64,
) -> Result<f64> {
    let report = oscillation_sequence(b, weights, system, c, OscVariant::L1Nu)?;
    let n = system.grid().dim() as f64;
    report.lorentz(n, f64::INFINITY)
}

/// Cube family for the BMO supremum.
#[derive(Debug, Clone, PartialEq)]
pub enum BmoScope {
    System(Shift),
    AllShifts,
    /// Every cell-aligned cube, any position, side 1..N cells.
    Boxes,
}

#[derive(Debug, Clone)]
pub struct BmoReport {
    pub bmo: f64,
    /// `(scale, sup at that scale)`; scale is the dyadic level for cube
    /// scopes and the side in cells for the box scope. On a finite torus the
    /// three vanishing-oscillation limits degenerate to this per-scale table.
    pub profile: Vec<(usize, f64)>,
}

/// Weighted mean-oscillation supremum with a per-scale profile.
pub fn bmo_vmo_profile(
    b: &GridFunction,
    w: &crate::weights::Weight,
    scope: &BmoScope,
) -> Result<BmoReport> {
    if b.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *b.grid();
    let b_prefix = PrefixTable::build(&grid, b.values());
    let osc_over = |region: &Region| -> f64 {
        let vol = region.measure(&grid);
        let avg = b_prefix.region_sum(region) / vol;
        let mut osc = 0.0;
        region.for_each_cell(&grid, |cell| osc += (b.value(cell) - avg).abs());
        osc * grid.cell_volume() / w.mass(region)
    };
    let mut profile: Vec<(usize, f64)> = Vec::new();
    match scope {
        BmoScope::System(omega) => {
            let system = build_system(&grid, omega)?;
            for k in 0..=grid.max_level() {
                let sup = system
                    .level(k)
                    .iter()
                    .map(|q| osc_over(&q.region(&grid)))
                    .fold(0.0, f64::max);
                profile.push((k, sup));
            }
        }
        BmoScope::AllShifts => {
            for k in 0..=grid.max_level() {
                let mut sup = 0.0f64;
                for system in all_systems(&grid) {
                    for q in system.level(k) {
                        sup = sup.max(osc_over(&q.region(&grid)));
                    }
                }
                profile.push((k, sup));
            }
        }
        BmoScope::Boxes => {
            let nn = grid.samples_per_axis();
            let n = grid.dim();
            for side in 1..=nn {
                let mut sup = 0.0f64;
                crate::lattice::for_each_index(n, nn, |lo| {
                    let region = Region::from_wrapped_box(&grid, lo, &vec![side; n]);
                    sup = sup.max(osc_over(&region));
                });
                profile.push((side, sup));
            }
        }
    }
    let bmo = profile.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    Ok(BmoReport { bmo, profile })
}

#[derive(Debug, Clone, Copy)]
pub struct SlobodeckiiResult {
    pub value: f64,
    /// Set when `p < 2` (outside the intended range; computed anyway).
    pub p_flagged: bool,
}

/// Double cell sum `Σ_{x≠y} |b(x)-b(y)|^p d(x,y)^{-2n} λ(x) μ^{-1}(y) h^{2n}`
/// with torus distance `d`; diagonal excluded.
pub fn slobodeckii_norm(
    b: &GridFunction,
    weights: &TwoWeights,
    p: f64,
) -> Result<SlobodeckiiResult> {
    if b.grid() != weights.grid() {
        return Err(Error::GridMismatch);
    }
    if !(p > 0.0) {
        return Err(Error::LorentzExponents { p, q: p });
    }
    let grid = *b.grid();
    let n = grid.dim();
    let cells = grid.cells();
    let centers: Vec<Vec<f64>> = (0..cells).map(|c| grid.cell_center(c)).collect();
    let hp = grid.cell_volume() * grid.cell_volume();
    let mut sum = 0.0;
    for x in 0..cells {
        let lx = weights.lambda.value(x);
        for y in 0..cells {
            if x == y {
                continue;
            }
            let d = grid.torus_distance(&centers[x], &centers[y]);
            let diff = (b.value(x) - b.value(y)).abs();
            sum += diff.powf(p) * d.powi(-2 * n as i32) * lx * weights.mu_inv.value(y);
        }
    }
    Ok(SlobodeckiiResult { value: (sum * hp).powf(1.0 / p), p_flagged: p < 2.0 })
}

/// Median of `b` over a region: both strict level sets have measure at most
/// `|R|/2`; ties resolve to the lower median of the sorted cell values.
pub fn median_value(b: &GridFunction, region: &Region) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut vals = Vec::with_capacity(region.cell_count());
    region.for_each_cell(b.grid(), |cell| vals.push(b.value(cell)));
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    Ok(vals[(vals.len() - 1) / 2])
}

/// Periodic mollification `ψ_ε * b` with a fixed smooth bump, discretized at
/// cell centers and renormalized to unit discrete mass.
pub fn mollify(b: &GridFunction, eps: f64) -> Result<GridFunction> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::MollifierScale(eps));
    }
    let grid = *b.grid();
    let n = grid.dim();
    let cells = grid.cells();
    let h = grid.cell_width();
    // ψ(x) = Π exp(-1/(1-(2x_i)²)) on |x_i| < 1/2, ψ_ε = ε^{-n} ψ(x/ε).
    // Sampled on the displacement lattice d·h so the discrete convolution
    // carries no half-cell phase; as ε shrinks to the cell scale the kernel
    // becomes an exact delta.
    let mut kernel = vec![0.0f64; cells];
    let nn = grid.samples_per_axis();
    let mut mass = 0.0;
    for (cell, k) in kernel.iter_mut().enumerate() {
        let coords = grid.decode_cell(cell);
        let mut v = eps.powi(-(n as i32));
        for &ci in &coords {
            let d = (ci.min(nn - ci) as f64) * h / eps;
            if 2.0 * d >= 1.0 {
                v = 0.0;
                break;
            }
            v *= (-1.0 / (1.0 - (2.0 * d) * (2.0 * d))).exp();
        }
        *k = v;
        mass += v;
    }
    mass *= grid.cell_volume();
    if mass <= 0.0 {
        return Err(Error::MollifierScale(eps));
    }
    let dims = vec![grid.samples_per_axis(); n];
    let mut fk: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v / mass, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut fk, &dims);
    fft::forward(&mut fb, &dims);
    for (a, k) in fb.iter_mut().zip(&fk) {
        *a *= k;
    }
    fft::inverse(&mut fb, &dims);
    let hv = grid.cell_volume();
    GridFunction::from_values(&grid, fb.iter().map(|v| v.re * hv).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system, Shift, TorusGrid};
    use crate::haar::{haar_function, Signature};
    use crate::weights::{make_weight, TwoWeights, Weight, WeightSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 3).unwrap()
    }

    fn random_b(grid: &TorusGrid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_values(grid, (0..grid.cells()).map(|_| rng.gen::<f64>() - 0.5).collect())
            .unwrap()
    }

    fn power_pair(grid: &TorusGrid) -> TwoWeights {
        let mu = make_weight(grid, &WeightSpec::Power { alpha: 0.5, center: vec![0.0, 0.0] }).unwrap();
        let la = make_weight(grid, &WeightSpec::Power { alpha: -0.5, center: vec![0.0, 0.0] }).unwrap();
        TwoWeights::new(mu, la).unwrap()
    }

    #[test]
    fn oscillation_constant_symbol_is_zero() {
        let g = grid();
        let tw = power_pair(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let b = GridFunction::constant(&g, 4.0);
        for variant in [OscVariant::L1Nu, OscVariant::L2LambdaOverMu, OscVariant::L2MuInvOverLambdaInv] {
            let rep = oscillation_sequence(&b, &tw, &sys, 3.0, variant).unwrap();
            assert!(rep.seq.max() < 1e-10, "constant symbol must give zeros");
        }
    }

    #[test]
    fn oscillation_haar_atom_value() {
        // b = h_P^ε, ν ≡ 1, c = 1: value at Q = P is |P|^{-1/2}
        let g = grid();
        let tw = TwoWeights::unweighted(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let p_cube = &sys.level(2)[6];
        let b = haar_function(&g, p_cube, &Signature::new(1, 2)).unwrap();
        let rep = oscillation_sequence(&b, &tw, &sys, 1.0, OscVariant::L1Nu).unwrap();
        let pos = sys.position(2, sys.flat_index(p_cube));
        let expect = p_cube.volume().sqrt().recip();
        assert!((rep.seq.entries[pos].1 - expect).abs() < 1e-11);
    }

    #[test]
    fn holder_chain_per_cube() {
        // exact provable bound: R_Q ≤ √(osc₁·osc₂) · √κ(W) with
        // κ(W) = √(μ(W)·λ^{-1}(W)) / ν(W) ≥ 1; and for the default weight
        // pairs the stronger geometric-mean bound holds as well.
        let g = grid();
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        for tw in [TwoWeights::unweighted(&g), power_pair(&g)] {
            let b = random_b(&g, 31);
            let r1 = oscillation_sequence(&b, &tw, &sys, 3.0, OscVariant::L1Nu).unwrap();
            let o1 = oscillation_sequence(&b, &tw, &sys, 3.0, OscVariant::L2LambdaOverMu).unwrap();
            let o2 =
                oscillation_sequence(&b, &tw, &sys, 3.0, OscVariant::L2MuInvOverLambdaInv).unwrap();
            for ((q, (k1, v1)), ((_, w1), (_, w2))) in sys
                .cubes()
                .iter()
                .zip(&r1.seq.entries)
                .zip(o1.seq.entries.iter().zip(&o2.seq.entries))
            {
                assert_eq!(*k1, q.key());
                let window = enlarge(&g, q, 3.0).unwrap();
                let kappa = (tw.mu.mass(&window) * tw.lambda_inv.mass(&window)).sqrt()
                    / tw.nu.mass(&window);
                assert!(kappa >= 1.0 - 1e-12);
                let geo = (w1 * w2).sqrt();
                assert!(
                    *v1 <= geo * kappa.sqrt() * (1.0 + 1e-12),
                    "provable Hölder bound failed"
                );
                assert!(*v1 <= geo * (1.0 + 1e-12), "geometric-mean bound failed for default pair");
            }
        }
    }

    #[test]
    fn oscillation_dump_format() {
        let g = TorusGrid::new(2, 2).unwrap();
        let tw = TwoWeights::unweighted(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let b = random_b(&g, 29);
        let rep = oscillation_sequence(&b, &tw, &sys, 3.0, OscVariant::L2LambdaOverMu).unwrap();
        let csv = rep.dump_csv();
        assert_eq!(csv.lines().next().unwrap(), "omega,level,m,variant,value");
        assert_eq!(csv.lines().count(), 1 + sys.len());
        assert!(csv.contains("L2-lambda-over-mu"));
    }

    #[test]
    fn besov_constant_zero_every_form() {
        let g = grid();
        let tw = power_pair(&g);
        let b = GridFunction::constant(&g, -2.0);
        let forms = [
            BesovForm::Average,
            BesovForm::Haar(RqChoice::VolOverNu),
            BesovForm::MartingaleL1Nu,
            BesovForm::MartingaleL2LambdaMu,
            BesovForm::MartingaleL2MuInvLambdaInv,
        ];
        for form in forms {
            let v = besov_norm(&b, &tw, 4.0, form, &Scope::Intersection).unwrap();
            assert!(v < 1e-10, "{:?} of a constant must vanish", form);
        }
    }

    #[test]
    fn besov_single_atom_haar_form() {
        // b = h_{Q0}^ε, ν ≡ 1, R(Q) = |Q|/ν(Q) = 1 → norm |Q0|^{-1/2}
        let g = grid();
        let tw = TwoWeights::unweighted(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let q0 = &sys.level(1)[2];
        let b = haar_function(&g, q0, &Signature::new(0, 2)).unwrap();
        let v = besov_norm(
            &b,
            &tw,
            4.0,
            BesovForm::Haar(RqChoice::VolOverNu),
            &Scope::OneSystem(Shift::zero(2)),
        )
        .unwrap();
        assert!((v - q0.volume().sqrt().recip()).abs() < 1e-10);
    }

    #[test]
    fn besov_rq_choices_comparable_and_chain_holds() {
        let g = grid();
        let tw = power_pair(&g);
        let b = random_b(&g, 37);
        let p = 4.0;
        let vals: Vec<f64> = RqChoice::ALL
            .iter()
            .map(|&c| besov_norm(&b, &tw, p, BesovForm::Haar(c), &Scope::OneSystem(Shift::zero(2))).unwrap())
            .collect();
        // termwise chain: |Q|/(λ^{-1}μ)^{1/2} ≤ |Q|/ν(Q), ν^{-1}/|Q| ≤ (λμ^{-1})^{1/2}/|Q|
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        for q in sys.cubes() {
            let a = rq_value(RqChoice::VolOverSqrtLambdaInvMu, &tw, q);
            let b_ = rq_value(RqChoice::VolOverNu, &tw, q);
            let c = rq_value(RqChoice::NuInvOverVol, &tw, q);
            let d = rq_value(RqChoice::SqrtLambdaMuInvOverVol, &tw, q);
            assert!(a <= b_ * (1.0 + 1e-12));
            assert!(c <= d * (1.0 + 1e-12));
        }
        // pairwise ratios within an A₂-derived band
        let a2 = crate::weights::a2_constant(&tw.nu, crate::weights::A2Scope::DyadicAllShifts)
            .max(crate::weights::a2_constant(&tw.mu, crate::weights::A2Scope::DyadicAllShifts))
            .max(crate::weights::a2_constant(&tw.lambda, crate::weights::A2Scope::DyadicAllShifts));
        let band = a2 * a2;
        for i in 0..4 {
            for j in 0..4 {
                let ratio = vals[i] / vals[j];
                assert!(ratio <= band * (1.0 + 1e-9) && ratio >= 1.0 / band * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn wnu_cases() {
        let g = grid();
        let tw = TwoWeights::unweighted(&g);
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        assert!(wnu_norm(&GridFunction::constant(&g, 1.0), &tw, &sys, 3.0).unwrap() < 1e-10);
        // compositional: equals the Lorentz norm of the oscillation sequence
        let b = random_b(&g, 41);
        let rep = oscillation_sequence(&b, &tw, &sys, 3.0, OscVariant::L1Nu).unwrap();
        let direct = rep.lorentz(2.0, f64::INFINITY).unwrap();
        assert!((wnu_norm(&b, &tw, &sys, 3.0).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn bmo_profile_cases() {
        let g = grid();
        let one = Weight::one(&g);
        let c = GridFunction::constant(&g, 9.0);
        let rep = bmo_vmo_profile(&c, &one, &BmoScope::AllShifts).unwrap();
        assert!(rep.bmo < 1e-12);
        assert!(rep.profile.iter().all(|(_, s)| *s < 1e-12));
        // b = h_P^ε: bmo matches exhaustive scan over system cubes
        let sys = build_system(&g, &Shift::zero(2)).unwrap();
        let p_cube = &sys.level(1)[1];
        let b = haar_function(&g, p_cube, &Signature::new(2, 2)).unwrap();
        let rep = bmo_vmo_profile(&b, &one, &BmoScope::System(Shift::zero(2))).unwrap();
        let prefix = PrefixTable::build(&g, b.values());
        let mut sup = 0.0f64;
        for q in sys.cubes() {
            let r = q.region(&g);
            let avg = prefix.region_sum(&r) / q.volume();
            let mut osc = 0.0;
            r.for_each_cell(&g, |cell| osc += (b.value(cell) - avg).abs());
            sup = sup.max(osc * g.cell_volume() / one.mass(&r));
        }
        assert!((rep.bmo - sup).abs() < 1e-12);
        // bmo ≤ besov-average norm for every p
        let tw = TwoWeights::unweighted(&g);
        let b = random_b(&g, 43);
        let rep = bmo_vmo_profile(&b, &one, &BmoScope::System(Shift::zero(2))).unwrap();
        for p in [0.5, 1.0, 2.0, 4.0] {
            let besov = besov_norm(&b, &tw, p, BesovForm::Average, &Scope::OneSystem(Shift::zero(2))).unwrap();
            assert!(rep.bmo <= besov * (1.0 + 1e-12));
        }
    }

    #[test]
    fn slobodeckii_cases() {
        let g = TorusGrid::new(2, 2).unwrap();
        let tw = TwoWeights::unweighted(&g);
        let c = GridFunction::constant(&g, 3.3);
        assert!(slobodeckii_norm(&c, &tw, 2.0).unwrap().value < 1e-12);
        // single-cell bump against a direct quadruple loop
        let mut b = GridFunction::zeros(&g);
        b.values_mut()[5] = 1.0;
        let fast = slobodeckii_norm(&b, &tw, 2.0).unwrap();
        assert!(!fast.p_flagged);
        let nn = g.samples_per_axis();
        let mut direct = 0.0;
        for x0 in 0..nn {
            for x1 in 0..nn {
                for y0 in 0..nn {
                    for y1 in 0..nn {
                        let cx = g.encode_cell(&[x0, x1]);
                        let cy = g.encode_cell(&[y0, y1]);
                        if cx == cy {
                            continue;
                        }
                        let d = g.torus_distance(&g.cell_center(cx), &g.cell_center(cy));
                        let diff: f64 = b.value(cx) - b.value(cy);
                        direct += diff.powi(2) / d.powi(4);
                    }
                }
            }
        }
        direct = (direct * g.cell_volume() * g.cell_volume()).sqrt();
        assert!((fast.value - direct).abs() <= 1e-12 * direct);
        // symmetric weights: swapping (λ, μ^{-1}) leaves the value unchanged
        let mu = make_weight(&g, &WeightSpec::Power { alpha: 0.5, center: vec![0.0, 0.0] }).unwrap();
        let tw_sym = TwoWeights::new(mu.clone(), mu.reciprocal()).unwrap();
        // here λ = μ^{-1}, so the swap is the identity on the integrand pair
        let v1 = slobodeckii_norm(&b, &tw_sym, 2.0).unwrap().value;
        let tw_swapped = TwoWeights::new(tw_sym.lambda.reciprocal(), tw_sym.mu.reciprocal()).unwrap();
        let v2 = slobodeckii_norm(&b, &tw_swapped, 2.0).unwrap().value;
        assert!((v1 - v2).abs() <= 1e-12 * v1);
        // p < 2 flagged
        assert!(slobodeckii_norm(&b, &tw, 1.5).unwrap().p_flagged);
    }

    #[test]
    fn median_cases() {
        let g = TorusGrid::new(1, 1).unwrap(); // N = 6 cells
        let b = GridFunction::from_values(&g, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        let r3 = Region::from_wrapped_box(&g, &[0], &[3]); // values {1,2,3}
        assert_eq!(median_value(&b, &r3).unwrap(), 2.0);
        let c = GridFunction::constant(&g, 7.0);
        assert_eq!(median_value(&c, &Region::whole(&g)).unwrap(), 7.0);
        assert!(median_value(&b, &Region::empty()).is_err());
        // defining property on random data
        let g2 = grid();
        let b = random_b(&g2, 47);
        let region = Region::from_wrapped_box(&g2, &[3, 7], &[9, 5]);
        let m = median_value(&b, &region).unwrap();
        let mut below = 0usize;
        let mut above = 0usize;
        let mut total = 0usize;
        region.for_each_cell(&g2, |cell| {
            total += 1;
            if b.value(cell) < m {
                below += 1;
            }
            if b.value(cell) > m {
                above += 1;
            }
        });
        assert!(below * 2 <= total && above * 2 <= total);
    }

    #[test]
    fn mollify_cases() {
        let g = grid();
        let c = GridFunction::constant(&g, 2.0);
        let mc = mollify(&c, 0.1).unwrap();
        assert!(mc.values().iter().all(|&v| (v - 2.0).abs() < 1e-12));
        // mean preserved
        let b = random_b(&g, 53);
        let mb = mollify(&b, 0.12).unwrap();
        assert!((mb.mean() - b.mean()).abs() < 1e-12);
        // cell-scale kernel reproduces smooth input
        let smooth = GridFunction::from_fn(&g, |x| (2.0 * std::f64::consts::PI * x[0]).cos());
        let ms = mollify(&smooth, 1.01 * g.cell_width()).unwrap();
        let err = ms.sub(&smooth).unwrap().lp_norm(f64::INFINITY);
        assert!(err < 1e-3, "cell-scale mollifier drift {err}");
        // range validation
        assert!(mollify(&b, 0.3).is_err());
        assert!(mollify(&b, 0.0).is_err());
    }
}
