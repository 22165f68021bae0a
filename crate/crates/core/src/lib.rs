//! Continuous-time quantum walk search on finite weighted directed graphs.
//!
//! A graph carries row-stochastic transition probabilities `p(x, y)`; its
//! probabilistic Laplacian `Δ = I - P` is self-adjoint in the inner product
//! weighted by a reversibility measure `μ`. Search evolves the normalized
//! ground state `s` of `Δ` under `H_γ = γΔ - V_w`, where `V_w` projects onto
//! the normalized target `e_w`, and asks how fast `|⟨e_w, e^{-iH_γ t} s⟩|²`
//! approaches one.
//!
//! Everything is generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! the scalar to `f64`, which the documented tolerances assume.
//!
//! ```
//! use qwsearch::{cartesian_power, find_gamma_critical, path_graph, Criterion, GammaGrid, GreenFunction};
//!
//! # fn main() -> qwsearch::Result<()> {
//! let lattice = cartesian_power(&path_graph(0.5)?, 3)?; // 64 vertices
//! let green = GreenFunction::new(&lattice.laplacian, 0)?; // target vertex 0
//! let gamma_e = find_gamma_critical(&green, &GammaGrid::default(), Criterion::Energy)?;
//! let secular = green.secular(gamma_e);
//! let e = secular.energies();
//! assert!((e[0] + e[1]).abs() < 1e-9);
//! assert!(secular.success(0.0) < secular.success(std::f64::consts::FRAC_PI_2 / e[1]));
//! # Ok(())
//! # }
//! ```

pub mod eigen;
pub mod error;
pub mod graph;
pub mod green;
pub mod matrix;
pub mod scalar;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{
    cartesian_power, complete_graph, interior_measure_profile, kolmogorov_measure, path_graph,
    CartesianPower, Family, Laplacian, MeasureProfile, TransitionGraph, VertexMeasure,
};
pub use green::{Eigenspace, GreenEvaluation, GreenFunction, SecularSpectrum};
pub use matrix::Matrix;
pub use scalar::Real;
pub use search::{
    critical_points, decompose_at_gamma_e, evolve, find_gamma_critical, optimize_search, Criterion,
    DecompositionReport, EvolutionResult, Evolver, GammaCriticalPoints, GammaGrid,
    OptimizeSettings, SearchOptimum, TimeCeiling,
};
pub use spectral::{
    eigendecompose, ground_state, lemma_checks, overlaps_direct, overlaps_via_green,
    symmetrize_laplacian, target_state, theorem_bound_report, LemmaCheck, OverlapReport,
    SearchHamiltonian, SpectralData, Symmetrized, TheoremBounds,
};

pub type Graph64 = TransitionGraph<f64>;
pub type Laplacian64 = Laplacian<f64>;
pub type Measure64 = VertexMeasure<f64>;
pub type Spectrum64 = SpectralData<f64>;
pub type Green64 = GreenFunction<f64>;
pub type Overlaps64 = OverlapReport<f64>;
pub type Optimum64 = SearchOptimum<f64>;
pub type Matrix64 = Matrix<f64>;

/// One-shot `G_γ(z, w, w)` and its derivative. Prefer building a
/// [`GreenFunction`] once when evaluating at many points.
pub fn green<T: Real>(
    gamma: T,
    laplacian: &Laplacian<T>,
    w: usize,
    z: T,
) -> Result<GreenEvaluation<T>> {
    GreenFunction::new(laplacian, w)?.eval(gamma, z)
}
