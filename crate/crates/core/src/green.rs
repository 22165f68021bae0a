//! Resolvent of `γΔ` at the target vertex.
//!
//! With `a_{w,λ} = ⟨φ_λ, e_w⟩` the diagonal Green function is
//! `G_γ(z) = Σ_λ |a_{w,λ}|² / (γλ - z)`. Because the oracle is rank one, the
//! eigenvalues of `H_γ` with nonzero target overlap are exactly the roots of
//! `G_γ(E) = 1`, one below zero and one between each pair of consecutive
//! weighted poles. The remaining eigenvalues of `H_γ` sit on the poles
//! themselves with eigenvectors orthogonal to both `e_w` and `s`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::scalar::{c, Real};
use crate::spectral::{
    check_low_gaps, laplacian_spectrum, tol, OverlapReport, SpectralData, DEGENERACY_TOL,
};

const GROUP_TOL: f64 = 1e-9;
const WEIGHT_TOL: f64 = 1e-14;
const POLE_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;

/// One eigenspace of `Δ` as seen from the target vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenspace<T> {
    pub lambda: T,
    /// `Σ |a_{w,λ}|²` over the eigenspace.
    pub weight: T,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEvaluation<T> {
    pub z: T,
    pub value: T,
    pub derivative: T,
}

#[derive(Debug, Clone)]
pub struct GreenFunction<T> {
    target: usize,
    spectrum: SpectralData<T>,
    amplitudes: Vec<T>,
    spaces: Vec<Eigenspace<T>>,
    mu_over_vol: T,
    volume: T,
}

impl<T: Real> GreenFunction<T> {
    pub fn new(lap: &Laplacian<T>, target: usize) -> Result<Self> {
        if target >= lap.len() {
            return Err(Error::TargetOutOfRange {
                target,
                n: lap.len(),
            });
        }
        let spectrum = laplacian_spectrum(lap)?;
        let mu = lap.measure();
        let root_mu = mu.at(target).sqrt();
        let amplitudes: Vec<T> = spectrum
            .eigenvectors
            .iter()
            .map(|phi| phi[target] * root_mu)
            .collect();

        let top = spectrum
            .eigenvalues
            .last()
            .map_or(T::one(), |l| l.abs().max(T::one()));
        let group_tol = tol::<T>(GROUP_TOL) * top;
        let mut spaces: Vec<Eigenspace<T>> = Vec::new();
        let mut last = T::neg_infinity();
        for (&lam, &a) in spectrum.eigenvalues.iter().zip(&amplitudes) {
            match spaces.last_mut() {
                Some(sp) if lam - last <= group_tol => {
                    sp.weight += a * a;
                    sp.multiplicity += 1;
                }
                _ => spaces.push(Eigenspace {
                    lambda: lam,
                    weight: a * a,
                    multiplicity: 1,
                }),
            }
            last = lam;
        }
        // pin the kernel exactly
        if let Some(first) = spaces.first_mut() {
            if first.lambda.abs() <= group_tol {
                first.lambda = T::zero();
            }
        }
        Ok(GreenFunction {
            target,
            spectrum,
            amplitudes,
            spaces,
            mu_over_vol: mu.at(target) / mu.volume(),
            volume: mu.volume(),
        })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn eigenspaces(&self) -> &[Eigenspace<T>] {
        &self.spaces
    }

    /// Spectrum of `Δ` this function was built from.
    pub fn laplacian_spectrum(&self) -> &SpectralData<T> {
        &self.spectrum
    }

    /// `a_{w,λ}` per eigenvector of `Δ`.
    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    /// `μ(w) / vol(G) = |⟨s, e_w⟩|²`.
    pub fn mu_over_vol(&self) -> T {
        self.mu_over_vol
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn eval(&self, gamma: T, z: T) -> Result<GreenEvaluation<T>> {
        let range = gamma
            * self
                .spaces
                .last()
                .map_or(T::one(), |s| s.lambda.max(T::one()));
        let distance = self
            .spaces
            .iter()
            .fold(T::infinity(), |m, s| m.min((gamma * s.lambda - z).abs()));
        if distance < c::<T>(POLE_TOL) * range {
            return Err(Error::PoleProximity {
                z: z.to_f64_lossy(),
                distance: distance.to_f64_lossy(),
            });
        }
        let mut value = T::zero();
        let mut derivative = T::zero();
        for s in &self.spaces {
            let inv = T::one() / (gamma * s.lambda - z);
            value += s.weight * inv;
            derivative += s.weight * inv * inv;
        }
        Ok(GreenEvaluation {
            z,
            value,
            derivative,
        })
    }

    /// Spectrum of `H_γ` through the secular equation `G_γ(E) = 1`.
    pub fn secular(&self, gamma: T) -> SecularSpectrum<T> {
        let weight_tol = c::<T>(WEIGHT_TOL);
        let poles: Vec<(T, T)> = self
            .spaces
            .iter()
            .filter(|s| s.weight > weight_tol)
            .map(|s| (gamma * s.lambda, s.weight))
            .collect();
        let mut hidden = Vec::new();
        for s in &self.spaces {
            let extra = if s.weight > weight_tol {
                s.multiplicity - 1
            } else {
                s.multiplicity
            };
            if extra > 0 {
                hidden.push((gamma * s.lambda, extra));
            }
        }

        let green = |z: T| poles.iter().map(|&(p, w)| w / (p - z)).sum::<T>();
        let green_prime = |z: T| {
            poles
                .iter()
                .map(|&(p, w)| w / ((p - z) * (p - z)))
                .sum::<T>()
        };
        let total: T = poles.iter().map(|&(_, w)| w).sum();
        let mut roots = Vec::with_capacity(poles.len());
        let mut lower = -(total + T::one());
        for &(pole, _) in &poles {
            roots.push(bisect_increasing(&green, lower, pole));
            lower = pole;
        }
        let slopes = roots.iter().map(|&e| green_prime(e)).collect();
        SecularSpectrum {
            gamma,
            roots,
            slopes,
            hidden,
            mu_over_vol: self.mu_over_vol,
        }
    }
}

/// Solves `g(z) = 1` for `g` increasing on `(lo, hi)`, to full precision.
fn bisect_increasing<T: Real>(g: &impl Fn(T) -> T, lo: T, hi: T) -> T {
    let (mut a, mut b) = (lo, hi);
    let half = c::<T>(0.5);
    for _ in 0..MAX_BISECTIONS {
        let m = a + (b - a) * half;
        if m <= a || m >= b {
            break;
        }
        if g(m) < T::one() {
            a = m;
        } else {
            b = m;
        }
    }
    a + (b - a) * half
}

/// Eigenvalues of `H_γ` from the secular equation, with the slopes
/// `G'_γ(E_a)` that fix the overlap probabilities.
#[derive(Debug, Clone)]
pub struct SecularSpectrum<T> {
    pub gamma: T,
    /// Eigenvalues with nonzero target overlap, ascending.
    pub roots: Vec<T>,
    /// `G'_γ` at each root.
    pub slopes: Vec<T>,
    /// Eigenvalues orthogonal to `e_w`, with multiplicity.
    pub hidden: Vec<(T, usize)>,
    mu_over_vol: T,
}

impl<T: Real> SecularSpectrum<T> {
    /// All eigenvalues of `H_γ`, ascending, with multiplicity.
    pub fn energies(&self) -> Vec<T> {
        let mut all = self.roots.clone();
        for &(e, m) in &self.hidden {
            all.extend(std::iter::repeat_n(e, m));
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }

    /// `|⟨e_w, ψ_a⟩|² = 1 / G'(E_a)` for root `a`.
    pub fn target_overlap(&self, a: usize) -> T {
        T::one() / self.slopes[a]
    }

    /// `|⟨s, ψ_a⟩|² = μ(w) / (vol E_a² G'(E_a))` for root `a`.
    pub fn ground_overlap(&self, a: usize) -> T {
        let e = self.roots[a];
        self.mu_over_vol / (e * e * self.slopes[a])
    }

    /// `⟨e_w, ψ_a⟩⟨ψ_a, s⟩ = -√(μ(w)/vol) / (E_a G'(E_a))` for every root.
    pub fn transition_weights(&self) -> Vec<T> {
        let sigma = self.mu_over_vol.sqrt();
        self.roots
            .iter()
            .zip(&self.slopes)
            .map(|(&e, &g)| -sigma / (e * g))
            .collect()
    }

    /// Overlaps and energies of the two lowest states. Fails if `E_1` sits on
    /// the spectrum of `γΔ`, where the Green function says nothing.
    pub fn low_overlaps(&self) -> Result<OverlapReport<T>> {
        let energies = self.energies();
        if energies.len() < 2 || self.roots.is_empty() {
            return Err(Error::invalid("graph", "needs at least two vertices"));
        }
        check_low_gaps(&energies)?;
        let range = energies[energies.len() - 1] - energies[0];
        let first_hidden = self.hidden.iter().map(|h| h.0).fold(T::infinity(), T::min);
        if self.roots.len() < 2 || self.roots[1] >= first_hidden - tol::<T>(DEGENERACY_TOL) * range
        {
            return Err(Error::EigenvalueOnSpectrum {
                index: 1,
                energy: energies[1].to_f64_lossy(),
            });
        }
        Ok(OverlapReport {
            e0: self.roots[0],
            e1: self.roots[1],
            s_psi0: self.ground_overlap(0),
            ew_psi0: self.target_overlap(0),
            s_psi1: self.ground_overlap(1),
            ew_psi1: self.target_overlap(1),
        })
    }

    /// `⟨e_w, exp(-iH_γ t) s⟩`.
    pub fn amplitude(&self, t: T) -> Complex<T> {
        amplitude_at(&self.roots, &self.transition_weights(), t)
    }

    /// Success probability `|⟨e_w, exp(-iH_γ t) s⟩|²`.
    pub fn success(&self, t: T) -> T {
        self.amplitude(t).norm_sqr()
    }

    /// Success probability on many times, sharing the transition weights.
    pub fn success_series(&self, times: &[T]) -> Vec<T> {
        let weights = self.transition_weights();
        times
            .iter()
            .map(|&t| amplitude_at(&self.roots, &weights, t).norm_sqr())
            .collect()
    }
}

pub(crate) fn amplitude_at<T: Real>(energies: &[T], weights: &[T], t: T) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (&e, &w) in energies.iter().zip(weights) {
        let (s, co) = (e * t).sin_cos();
        acc.re += w * co;
        acc.im -= w * s;
    }
    acc
}
