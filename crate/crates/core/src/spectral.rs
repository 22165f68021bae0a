//! Self-adjoint operators in the measure-weighted inner product and their
//! spectra: symmetrization, eigendecomposition, the search Hamiltonian and
//! the overlap probabilities of its two lowest states.

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::green::GreenFunction;
use crate::matrix::Matrix;
use crate::scalar::{c, Real};

/// Relative asymmetry accepted before an operator is declared
/// non-symmetrizable.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Low-lying eigenvalues closer than this fraction of the spectral range
/// count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;

/// Tolerance `x`, floored at a few thousand ulps for low-precision scalars.
pub(crate) fn tol<T: Real>(x: f64) -> T {
    c::<T>(x).max(T::epsilon() * c(4096.0))
}

/// `⟨f, g⟩ = Σ f(x) g(x) μ(x)`.
pub fn inner<T: Real>(f: &[T], g: &[T], mu: &[T]) -> T {
    f.iter()
        .zip(g)
        .zip(mu)
        .map(|((&a, &b), &m)| a * b * m)
        .sum()
}

pub fn weighted_norm<T: Real>(f: &[T], mu: &[T]) -> T {
    inner(f, f, mu).sqrt()
}

/// `S = M^{1/2} A M^{-1/2}` together with the diagonal of `M^{1/2}`.
#[derive(Debug, Clone)]
pub struct Symmetrized<T> {
    matrix: Matrix<T>,
    sqrt_mu: Vec<T>,
}

impl<T: Real> Symmetrized<T> {
    fn new(a: &Matrix<T>, mu: &[T]) -> Result<Self> {
        if mu.iter().any(|&m| m.is_nan() || m <= T::zero()) {
            return Err(Error::invalid("measure", "must be strictly positive"));
        }
        let sqrt_mu: Vec<T> = mu.iter().map(|m| m.sqrt()).collect();
        let n = a.nrows();
        let mut s = Matrix::from_fn(n, n, |i, j| sqrt_mu[i] * a[(i, j)] / sqrt_mu[j]);
        let scale = s.max_abs().max(T::min_positive_value());
        let asym = s.asymmetry() / scale;
        if asym > tol(SYMMETRY_TOL) {
            return Err(Error::NonSymmetrizable {
                asymmetry: asym.to_f64_lossy(),
            });
        }
        // exact symmetry for the eigensolver
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (s[(i, j)] + s[(j, i)]) * c(0.5);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Symmetrized { matrix: s, sqrt_mu })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// `M^{-1/2} v`: symmetric coordinates to a vertex-function.
    pub fn to_vertex_function(&self, v: &[T]) -> Vec<T> {
        v.iter().zip(&self.sqrt_mu).map(|(&x, &r)| x / r).collect()
    }

    /// `M^{1/2} f`: a vertex-function to symmetric coordinates.
    pub fn from_vertex_function(&self, f: &[T]) -> Vec<T> {
        f.iter().zip(&self.sqrt_mu).map(|(&x, &r)| x * r).collect()
    }

    pub fn measure(&self) -> Vec<T> {
        self.sqrt_mu.iter().map(|&r| r * r).collect()
    }
}

pub fn symmetrize_laplacian<T: Real>(lap: &Laplacian<T>) -> Result<Symmetrized<T>> {
    Symmetrized::new(lap.matrix(), lap.measure().values())
}

/// Full eigendecomposition of a self-adjoint operator, eigenvectors as
/// vertex-functions orthonormal in the weighted inner product.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Vec<T>>,
    pub measure: Vec<T>,
    /// `max_a ‖(H - E_a) ψ_a‖` in the weighted norm.
    pub residual_norm: T,
}

impl<T: Real> SpectralData<T> {
    pub fn from_symmetrized(sym: &Symmetrized<T>) -> Result<Self> {
        let eig = symmetric_eigen(sym.matrix())?;
        let s = sym.matrix();
        let mut residual = T::zero();
        for (&lam, v) in eig.values.iter().zip(&eig.vectors) {
            let sv = s.matvec(v);
            let r: T = sv
                .iter()
                .zip(v)
                .map(|(&a, &b)| (a - lam * b).powi(2))
                .sum::<T>()
                .sqrt();
            residual = residual.max(r);
        }
        let range = match (eig.values.first(), eig.values.last()) {
            (Some(&lo), Some(&hi)) => (hi - lo).max(s.max_abs()),
            _ => T::zero(),
        };
        if residual > tol::<T>(RESIDUAL_TOL) * range.max(T::one()) {
            return Err(Error::ConvergenceFailure {
                residual: residual.to_f64_lossy(),
            });
        }
        let eigenvectors = eig
            .vectors
            .iter()
            .map(|v| {
                let mut f = sym.to_vertex_function(v);
                fix_phase(&mut f);
                f
            })
            .collect();
        Ok(SpectralData {
            eigenvalues: eig.values,
            eigenvectors,
            measure: sym.measure(),
            residual_norm: residual,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        inner(f, g, &self.measure)
    }

    pub fn spectral_range(&self) -> T {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(&lo), Some(&hi)) => hi - lo,
            _ => T::zero(),
        }
    }

    /// Largest `|⟨ψ_a, ψ_b⟩ - δ_ab|`.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for (a, fa) in self.eigenvectors.iter().enumerate() {
            for (b, fb) in self.eigenvectors.iter().enumerate().skip(a) {
                let want = if a == b { T::one() } else { T::zero() };
                worst = worst.max((self.inner(fa, fb) - want).abs());
            }
        }
        worst
    }
}

/// Makes the largest-magnitude entry positive; ties go to the lowest index.
fn fix_phase<T: Real>(f: &mut [T]) {
    let peak = f.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let cut = peak * (T::one() - c(1e-10));
    if let Some(&lead) = f.iter().find(|x| x.abs() >= cut) {
        if lead < T::zero() {
            f.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigendecomposition of a real symmetric matrix under the counting measure.
pub fn eigendecompose<T: Real>(matrix: &Matrix<T>) -> Result<SpectralData<T>> {
    let ones = vec![T::one(); matrix.nrows()];
    SpectralData::from_symmetrized(&Symmetrized::new(matrix, &ones)?)
}

pub fn laplacian_spectrum<T: Real>(lap: &Laplacian<T>) -> Result<SpectralData<T>> {
    SpectralData::from_symmetrized(&symmetrize_laplacian(lap)?)
}

/// Normalized ground state `s = vol^{-1/2} Σ_x δ_x` of the Laplacian.
pub fn ground_state<T: Real>(lap: &Laplacian<T>) -> Vec<T> {
    let v = T::one() / lap.measure().volume().sqrt();
    vec![v; lap.len()]
}

/// Normalized point mass `e_w = δ_w / √μ(w)`.
pub fn target_state<T: Real>(lap: &Laplacian<T>, w: usize) -> Vec<T> {
    let mut e = vec![T::zero(); lap.len()];
    e[w] = T::one() / lap.measure().at(w).sqrt();
    e
}

/// `H_γ = γΔ - V_w` with the oracle `V_w f = ⟨e_w, f⟩ e_w`.
#[derive(Debug, Clone, Copy)]
pub struct SearchHamiltonian<'a, T> {
    gamma: T,
    target: usize,
    laplacian: &'a Laplacian<T>,
}

impl<'a, T: Real> SearchHamiltonian<'a, T> {
    pub fn new(laplacian: &'a Laplacian<T>, gamma: T, target: usize) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("{gamma} must be positive")));
        }
        if target >= laplacian.len() {
            return Err(Error::TargetOutOfRange {
                target,
                n: laplacian.len(),
            });
        }
        Ok(SearchHamiltonian {
            gamma,
            target,
            laplacian,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn laplacian(&self) -> &'a Laplacian<T> {
        self.laplacian
    }

    /// Matrix in vertex coordinates. Since `⟨e_w, f⟩ e_w = f(w) δ_w`, the
    /// oracle is the single entry `(w, w)`.
    pub fn matrix(&self) -> Matrix<T> {
        let mut h = self.laplacian.matrix().scaled(self.gamma);
        h[(self.target, self.target)] -= T::one();
        h
    }

    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let mut out = self.laplacian.matrix().matvec(f);
        out.iter_mut().for_each(|x| *x *= self.gamma);
        out[self.target] -= f[self.target];
        out
    }

    /// `γ M^{1/2} Δ M^{-1/2}` minus the standard projector at `w`.
    pub fn symmetrize(&self) -> Result<Symmetrized<T>> {
        Symmetrized::new(&self.matrix(), self.laplacian.measure().values())
    }

    pub fn spectrum(&self) -> Result<SpectralData<T>> {
        SpectralData::from_symmetrized(&self.symmetrize()?)
    }
}

/// Energies and overlap probabilities of the two lowest eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport<T> {
    pub e0: T,
    pub e1: T,
    /// `|⟨s, ψ_0⟩|²`
    pub s_psi0: T,
    /// `|⟨e_w, ψ_0⟩|²`
    pub ew_psi0: T,
    /// `|⟨s, ψ_1⟩|²`
    pub s_psi1: T,
    /// `|⟨e_w, ψ_1⟩|²`
    pub ew_psi1: T,
}

impl<T: Real> OverlapReport<T> {
    pub fn max_abs_diff(&self, other: &Self) -> T {
        [
            self.e0 - other.e0,
            self.e1 - other.e1,
            self.s_psi0 - other.s_psi0,
            self.ew_psi0 - other.ew_psi0,
            self.s_psi1 - other.s_psi1,
            self.ew_psi1 - other.ew_psi1,
        ]
        .iter()
        .fold(T::zero(), |m, d| m.max(d.abs()))
    }
}

pub(crate) fn check_low_gaps<T: Real>(energies: &[T]) -> Result<()> {
    let range = match (energies.first(), energies.last()) {
        (Some(&lo), Some(&hi)) => hi - lo,
        _ => T::zero(),
    };
    let thresh = tol::<T>(DEGENERACY_TOL) * range;
    for w in energies.windows(2).take(2) {
        let gap = w[1] - w[0];
        if gap <= thresh {
            return Err(Error::DegenerateLowStates {
                gap: gap.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Overlaps computed from the eigenvectors of `H_γ`.
pub fn overlaps_direct<T: Real>(h: &SearchHamiltonian<'_, T>) -> Result<OverlapReport<T>> {
    overlaps_from_spectrum(h, &h.spectrum()?)
}

pub fn overlaps_from_spectrum<T: Real>(
    h: &SearchHamiltonian<'_, T>,
    spec: &SpectralData<T>,
) -> Result<OverlapReport<T>> {
    if spec.len() < 2 {
        return Err(Error::invalid("graph", "needs at least two vertices"));
    }
    check_low_gaps(&spec.eigenvalues)?;
    let lap = h.laplacian();
    let s = ground_state(lap);
    let e_w = target_state(lap, h.target());
    let ov = |a: usize, f: &[T]| spec.inner(f, &spec.eigenvectors[a]).powi(2);
    Ok(OverlapReport {
        e0: spec.eigenvalues[0],
        e1: spec.eigenvalues[1],
        s_psi0: ov(0, &s),
        ew_psi0: ov(0, &e_w),
        s_psi1: ov(1, &s),
        ew_psi1: ov(1, &e_w),
    })
}

/// Overlaps from the Green function of `γΔ` alone: the energies are the
/// roots of `G_γ(E) = 1` and the overlaps follow from `G'_γ(E_a)`.
pub fn overlaps_via_green<T: Real>(h: &SearchHamiltonian<'_, T>) -> Result<OverlapReport<T>> {
    let gf = GreenFunction::new(h.laplacian(), h.target())?;
    gf.secular(h.gamma()).low_overlaps()
}

/// The three Green-function identities at one eigenpair of `H_γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck<T> {
    pub energy: T,
    /// `|⟨e_w, ψ_a⟩|`, nonzero off the spectrum of `γΔ`.
    pub target_amplitude: T,
    /// `G_γ(E_a, w, w)`, equal to one.
    pub green_value: T,
    /// `⟨e_w, (γΔ - E_a)^{-1} ψ_a⟩ · ⟨ψ_a, e_w⟩`, equal to one.
    pub resolvent_product: T,
}

/// Evaluates the identities at `E_0` and `E_1`, with `ψ_a` from the dense
/// spectrum of `H_γ` and the resolvent applied by a linear solve.
pub fn lemma_checks<T: Real>(h: &SearchHamiltonian<'_, T>) -> Result<[LemmaCheck<T>; 2]> {
    let spec = h.spectrum()?;
    check_low_gaps(&spec.eigenvalues)?;
    let lap = h.laplacian();
    let gf = GreenFunction::new(lap, h.target())?;
    let e_w = target_state(lap, h.target());
    let n = lap.len();
    let check = |a: usize| -> Result<LemmaCheck<T>> {
        let energy = spec.eigenvalues[a];
        let psi = &spec.eigenvectors[a];
        let amp = spec.inner(&e_w, psi);
        let green_value = gf.eval(h.gamma(), energy)?.value;
        let shifted = Matrix::from_fn(n, n, |i, j| {
            h.gamma() * lap.matrix()[(i, j)] - if i == j { energy } else { T::zero() }
        });
        let x = shifted.solve(psi).ok_or(Error::EigenvalueOnSpectrum {
            index: a,
            energy: energy.to_f64_lossy(),
        })?;
        Ok(LemmaCheck {
            energy,
            target_amplitude: amp.abs(),
            green_value,
            resolvent_product: spec.inner(&e_w, &x) * amp,
        })
    };
    Ok([check(0)?, check(1)?])
}

/// Quantities on both sides of the eigenvalue–volume inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremBounds<T> {
    pub overlaps: OverlapReport<T>,
    /// `μ(w) / vol(G)`
    pub mu_over_vol: T,
    /// `| |⟨s,ψ_0⟩|² - |⟨e_w,ψ_0⟩|² |`
    pub eps0: T,
    pub eps1: T,
    /// `|E_0² - μ(w)/vol|`
    pub lhs0: T,
    pub lhs1: T,
    /// `ε_0`
    pub rhs0: T,
    /// `(1 + (μ(w)/vol) |s_1 - s_0| / (s_1 s_0)) ε_1`
    pub rhs1: T,
    pub holds0: bool,
    pub holds1: bool,
}

pub fn theorem_bound_report<T: Real>(h: &SearchHamiltonian<'_, T>) -> Result<TheoremBounds<T>> {
    let ov = overlaps_direct(h)?;
    let measure = h.laplacian().measure();
    let mu_over_vol = measure.at(h.target()) / measure.volume();
    let eps0 = (ov.s_psi0 - ov.ew_psi0).abs();
    let eps1 = (ov.s_psi1 - ov.ew_psi1).abs();
    let lhs0 = (ov.e0 * ov.e0 - mu_over_vol).abs();
    let lhs1 = (ov.e1 * ov.e1 - mu_over_vol).abs();
    let rhs0 = eps0;
    let rhs1 =
        (T::one() + mu_over_vol * (ov.s_psi1 - ov.s_psi0).abs() / (ov.s_psi1 * ov.s_psi0)) * eps1;
    // rounding slack for the exact-equality case
    let slack = tol::<T>(1e-12);
    Ok(TheoremBounds {
        overlaps: ov,
        mu_over_vol,
        eps0,
        eps1,
        lhs0,
        lhs1,
        rhs0,
        rhs1,
        holds0: lhs0 <= rhs0 + slack,
        holds1: lhs1 <= rhs1 + slack,
    })
}
