//! Dyadic Haar analysis, two-weight norms, and commutator Schatten spectra
//! on the periodic grid.

pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod haar;
pub mod harness;
pub mod lattice;
pub mod operators;
pub mod schatten;
pub mod seq;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
pub use field::{GridFunction, PrefixTable};
pub use grid::{
    all_systems, build_system, containing_cube, enlarge, whitney_pairs, CellBox, ContainingCube,
    CubeKey, DyadicCube, DyadicSystem, Region, Shift, TorusGrid, WhitneyPair,
};
pub use haar::{
    analyze, cube_averages, expectation, haar_function, martingale_difference, synthesize,
    HaarCoefficients, Signature,
};
pub use schatten::{nwo_ratio, rs_pairing_sum, schatten_lorentz_norm, singular_values, NwoReport, SingularSpectrum};
pub use seq::{cmd_norm, lorentz_of_sorted, maximal_carleson, maximal_logweighted, maximal_neighbor, CarlesonMode, IndexedSequence};
pub use operators::paraproduct::{decomposition_residual, haar_band_limit, paraproduct_apply, ParaKind};
pub use operators::riesz::{commutator_matrix, riesz_apply, riesz_matrix, KernelNormalization, RieszMode, RieszSpec};
pub use operators::shift::{haar_shift_apply, haar_shift_coeffs, ShiftSpec, SignatureMap};
pub use operators::signcell::{sign_cell_frame, SignCellFrame, SignCellPair};
pub use operators::whitney::{whitney_kernel_coefficients, WhitneyExpansion};
pub use operators::{weighted_conjugate, DenseOperator};
pub use spaces::{besov_norm, bmo_vmo_profile, median_value, mollify, oscillation_sequence, rq_value, slobodeckii_norm, wnu_norm, BesovForm, BmoReport, BmoScope, OscVariant, OscillationReport, RqChoice, Scope, SlobodeckiiResult};
pub use weights::{
    a2_constant, doubling_ratio, make_weight, nu_from, reverse_holder_exponent, A2Scope,
    ReverseHolderReport, TwoWeights, Weight, WeightSpec,
};
