//! Time evolution, critical couplings, the optimal `(t, γ)` pair, and the
//! two-level decomposition of the success probability at `γ_E`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::green::{amplitude_at, GreenFunction, SecularSpectrum};
use crate::scalar::{c, Real};
use crate::spectral::{ground_state, target_state, OverlapReport, SearchHamiltonian, SpectralData};

/// `exp(-iH_γ t) s` and the resulting success probability.
#[derive(Debug, Clone)]
pub struct EvolutionResult<T> {
    pub t: T,
    pub state: Vec<Complex<T>>,
    pub success: T,
}

impl<T: Real> EvolutionResult<T> {
    pub fn weighted_norm(&self, mu: &[T]) -> T {
        self.state
            .iter()
            .zip(mu)
            .map(|(z, &m)| z.norm_sqr() * m)
            .sum::<T>()
            .sqrt()
    }
}

/// Evolves the ground state through the full eigendecomposition of `H_γ`.
#[derive(Debug, Clone)]
pub struct Evolver<T> {
    spectrum: SpectralData<T>,
    /// `⟨ψ_a, s⟩`
    ground_coeffs: Vec<T>,
    /// `⟨e_w, ψ_a⟩`
    target_coeffs: Vec<T>,
}

impl<T: Real> Evolver<T> {
    pub fn new(h: &SearchHamiltonian<'_, T>) -> Result<Self> {
        Ok(Self::from_spectrum(h, h.spectrum()?))
    }

    pub fn from_spectrum(h: &SearchHamiltonian<'_, T>, spectrum: SpectralData<T>) -> Self {
        let s = ground_state(h.laplacian());
        let e_w = target_state(h.laplacian(), h.target());
        let ground_coeffs = spectrum
            .eigenvectors
            .iter()
            .map(|psi| spectrum.inner(psi, &s))
            .collect();
        let target_coeffs = spectrum
            .eigenvectors
            .iter()
            .map(|psi| spectrum.inner(&e_w, psi))
            .collect();
        Evolver {
            spectrum,
            ground_coeffs,
            target_coeffs,
        }
    }

    pub fn spectrum(&self) -> &SpectralData<T> {
        &self.spectrum
    }

    pub fn ground_coeffs(&self) -> &[T] {
        &self.ground_coeffs
    }

    pub fn target_coeffs(&self) -> &[T] {
        &self.target_coeffs
    }

    pub fn evolve(&self, t: T) -> EvolutionResult<T> {
        let n = self.spectrum.measure.len();
        let mut state = vec![Complex::new(T::zero(), T::zero()); n];
        for ((&e, psi), &g) in self
            .spectrum
            .eigenvalues
            .iter()
            .zip(&self.spectrum.eigenvectors)
            .zip(&self.ground_coeffs)
        {
            let (s, co) = (e * t).sin_cos();
            let phase = Complex::new(co * g, -s * g);
            for (z, &p) in state.iter_mut().zip(psi) {
                *z += phase * p;
            }
        }
        EvolutionResult {
            t,
            success: self.success(t),
            state,
        }
    }

    /// `|Σ_a e^{-iE_a t} ⟨e_w, ψ_a⟩⟨ψ_a, s⟩|²`, without building the state.
    pub fn success(&self, t: T) -> T {
        let weights: Vec<T> = self
            .target_coeffs
            .iter()
            .zip(&self.ground_coeffs)
            .map(|(&a, &b)| a * b)
            .collect();
        amplitude_at(&self.spectrum.eigenvalues, &weights, t).norm_sqr()
    }
}

pub fn evolve<T: Real>(h: &SearchHamiltonian<'_, T>, t: T) -> Result<EvolutionResult<T>> {
    if t.is_nan() || t < T::zero() {
        return Err(Error::invalid("t", "time must be non-negative"));
    }
    Ok(Evolver::new(h)?.evolve(t))
}

/// Which coincidence defines a critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// `|⟨s, ψ_0⟩|² = |⟨s, ψ_1⟩|²`
    GroundOverlap,
    /// `|⟨e_w, ψ_0⟩|² = |⟨e_w, ψ_1⟩|²`
    TargetOverlap,
    /// `E_0 = -E_1`
    Energy,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::GroundOverlap,
        Criterion::TargetOverlap,
        Criterion::Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::GroundOverlap => "s",
            Criterion::TargetOverlap => "w",
            Criterion::Energy => "E",
        }
    }

    pub fn eval<T: Real>(self, ov: &OverlapReport<T>) -> T {
        match self {
            Criterion::GroundOverlap => ov.s_psi0 - ov.s_psi1,
            Criterion::TargetOverlap => ov.ew_psi0 - ov.ew_psi1,
            Criterion::Energy => ov.e0 + ov.e1,
        }
    }
}

/// Uniform grid of couplings scanned for a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
}

impl<T: Real> GammaGrid<T> {
    pub fn new(min: T, max: T, points: usize) -> Result<Self> {
        if !(min > T::zero() && max > min && max.is_finite()) {
            return Err(Error::invalid(
                "gamma_range",
                format!("need 0 < min < max, got [{min}, {max}]"),
            ));
        }
        if points < 2 {
            return Err(Error::invalid("gamma_points", "need at least two points"));
        }
        Ok(GammaGrid { min, max, points })
    }

    pub fn step(&self) -> T {
        (self.max - self.min) / T::from_usize_lossy(self.points - 1)
    }

    pub fn values(&self) -> Vec<T> {
        let step = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min + step * T::from_usize_lossy(i)
                }
            })
            .collect()
    }
}

impl Default for GammaGrid<f64> {
    fn default() -> Self {
        GammaGrid {
            min: 0.05,
            max: 3.0,
            points: 600,
        }
    }
}

/// Critical couplings; `None` where the scanned range holds no root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCriticalPoints<T> {
    pub gamma_s: Option<T>,
    pub gamma_w: Option<T>,
    pub gamma_e: Option<T>,
}

impl<T: Real> GammaCriticalPoints<T> {
    pub fn get(&self, which: Criterion) -> Option<T> {
        match which {
            Criterion::GroundOverlap => self.gamma_s,
            Criterion::TargetOverlap => self.gamma_w,
            Criterion::Energy => self.gamma_e,
        }
    }
}

const ROOT_RESIDUAL: f64 = 1e-9;

/// Smallest coupling in the grid range where `which` changes sign, bisected
/// until the bracket cannot shrink further.
pub fn find_gamma_critical<T: Real>(
    gf: &GreenFunction<T>,
    grid: &GammaGrid<T>,
    which: Criterion,
) -> Result<T> {
    let gammas = grid.values();
    let values: Vec<Result<T>> = gammas
        .par_iter()
        .map(|&g| gf.secular(g).low_overlaps().map(|ov| which.eval(&ov)))
        .collect();
    let values: Vec<T> = values.into_iter().collect::<Result<_>>()?;
    let f = |g: T| gf.secular(g).low_overlaps().map(|ov| which.eval(&ov));

    for i in 1..gammas.len() {
        let (fa, fb) = (values[i - 1], values[i]);
        if fa == T::zero() {
            return Ok(gammas[i - 1]);
        }
        if fa.signum() == fb.signum() && fb != T::zero() {
            continue;
        }
        let (mut a, mut b) = (gammas[i - 1], gammas[i]);
        let sign_a = fa.signum();
        for _ in 0..200 {
            let m = a + (b - a) * c(0.5);
            if m <= a || m >= b {
                break;
            }
            if f(m)?.signum() == sign_a {
                a = m;
            } else {
                b = m;
            }
        }
        let (ra, rb) = (f(a)?, f(b)?);
        let (root, residual) = if ra.abs() <= rb.abs() {
            (a, ra)
        } else {
            (b, rb)
        };
        // a jump rather than a crossing; keep scanning
        if residual.abs() < c(ROOT_RESIDUAL) {
            return Ok(root);
        }
    }
    Err(Error::NoRootInRange {
        which: which.name(),
        gamma_min: grid.min.to_f64_lossy(),
        gamma_max: grid.max.to_f64_lossy(),
    })
}

pub fn critical_points<T: Real>(
    gf: &GreenFunction<T>,
    grid: &GammaGrid<T>,
) -> Result<GammaCriticalPoints<T>> {
    let find = |which| match find_gamma_critical(gf, grid, which) {
        Ok(g) => Ok(Some(g)),
        Err(Error::NoRootInRange { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(GammaCriticalPoints {
        gamma_s: find(Criterion::GroundOverlap)?,
        gamma_w: find(Criterion::TargetOverlap)?,
        gamma_e: find(Criterion::Energy)?,
    })
}

/// Upper end of the time window searched at each coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeCeiling {
    /// The formal window `[0, vol(G)]`.
    Volume,
    /// `min(vol(G), k π / |E_1 - E_0|)`.
    LowGapPeriods(f64),
}

impl Default for TimeCeiling {
    fn default() -> Self {
        TimeCeiling::LowGapPeriods(3.0)
    }
}

impl TimeCeiling {
    pub fn at<T: Real>(self, volume: T, e0: T, e1: T) -> T {
        match self {
            TimeCeiling::Volume => volume,
            TimeCeiling::LowGapPeriods(k) => volume.min(c::<T>(k) * T::PI() / (e1 - e0).abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSettings<T> {
    /// Defaults to `[0.8 γ_E, 1.2 γ_E]`, or `[0.05, 3]` without a `γ_E`.
    pub gamma_range: Option<(T, T)>,
    pub gamma_points: usize,
    pub t_points: usize,
    pub ceiling: TimeCeiling,
    /// Refinement grid spacing as a fraction of the coarse spacing.
    pub refine_factor: usize,
}

impl<T: Real> Default for OptimizeSettings<T> {
    fn default() -> Self {
        OptimizeSettings {
            gamma_range: None,
            gamma_points: 200,
            t_points: 4000,
            ceiling: TimeCeiling::default(),
            refine_factor: 10,
        }
    }
}

/// Best success probability found at one coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub gamma: T,
    pub t: T,
    pub success: T,
    pub t_ceiling: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptimum<T> {
    pub t_opt: T,
    pub gamma_opt: T,
    pub pi_max: T,
    pub gamma_range: (T, T),
    pub gamma_points: usize,
    pub t_points: usize,
    pub fine_gamma_step: T,
    /// Time window used at `γ_opt`.
    pub t_ceiling: T,
    /// True when the window at `γ_opt` is shorter than `vol(G)`.
    pub truncated: bool,
}

const TIE_TOL: f64 = 1e-9;

/// Earliest time among grid points within `TIE_TOL` of the maximum, then
/// polished by golden-section search between its neighbours.
pub fn peak_at<T: Real>(
    sec: &SecularSpectrum<T>,
    volume: T,
    t_points: usize,
    ceiling: TimeCeiling,
) -> Result<Peak<T>> {
    let energies = sec.energies();
    if energies.len() < 2 {
        return Err(Error::invalid("graph", "needs at least two vertices"));
    }
    let t_ceiling = ceiling.at(volume, energies[0], energies[1]);
    let t_points = t_points.max(3);
    let dt = t_ceiling / T::from_usize_lossy(t_points - 1);
    let times: Vec<T> = (0..t_points).map(|j| dt * T::from_usize_lossy(j)).collect();
    let series = sec.success_series(&times);
    let max = series.iter().copied().fold(T::neg_infinity(), T::max);
    let j = series.iter().position(|&v| v >= max - c(TIE_TOL)).unwrap();

    let lo = times[j.saturating_sub(1)];
    let hi = times[(j + 1).min(t_points - 1)];
    let weights = sec.transition_weights();
    let f = |t: T| amplitude_at(&sec.roots, &weights, t).norm_sqr();
    let (t_ref, v_ref) = golden_max(&f, lo, hi, dt * c(1e-9));
    let (t, success) = if v_ref >= series[j] {
        (t_ref, v_ref)
    } else {
        (times[j], series[j])
    };
    Ok(Peak {
        gamma: sec.gamma,
        t,
        success,
        t_ceiling,
    })
}

fn golden_max<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, xtol: T) -> (T, T) {
    let inv_phi = c::<T>(0.618_033_988_749_894_8);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= xtol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Picks the best peak: highest success, ties (within `TIE_TOL`) broken by
/// earliest time, then smallest coupling.
fn select_best<T: Real>(peaks: &[Peak<T>]) -> Peak<T> {
    let max = peaks
        .iter()
        .map(|p| p.success)
        .fold(T::neg_infinity(), T::max);
    *peaks
        .iter()
        .filter(|p| p.success >= max - c(TIE_TOL))
        .min_by(|a, b| {
            a.t.partial_cmp(&b.t)
                .unwrap()
                .then(a.gamma.partial_cmp(&b.gamma).unwrap())
        })
        .unwrap()
}

fn scan_peaks<T: Real>(
    gf: &GreenFunction<T>,
    gammas: &[T],
    settings: &OptimizeSettings<T>,
) -> Result<Vec<Peak<T>>> {
    let peaks: Vec<Result<Peak<T>>> = gammas
        .par_iter()
        .map(|&g| {
            peak_at(
                &gf.secular(g),
                gf.volume(),
                settings.t_points,
                settings.ceiling,
            )
        })
        .collect();
    peaks.into_iter().collect()
}

/// Maximizes the success probability over a coarse coupling grid, then over
/// a grid `refine_factor` times finer around the winner.
pub fn optimize_search<T: Real>(
    gf: &GreenFunction<T>,
    settings: &OptimizeSettings<T>,
) -> Result<SearchOptimum<T>> {
    let (lo, hi) = match settings.gamma_range {
        Some(r) => r,
        None => default_gamma_window(gf)?,
    };
    let coarse = GammaGrid::new(lo, hi, settings.gamma_points)?;
    let coarse_peaks = scan_peaks(gf, &coarse.values(), settings)?;
    let best = select_best(&coarse_peaks);

    let step = coarse.step();
    let factor = settings.refine_factor.max(1);
    let fine_step = step / T::from_usize_lossy(factor);
    let fine: Vec<T> = (0..=2 * factor)
        .map(|k| best.gamma - step + fine_step * T::from_usize_lossy(k))
        .filter(|&g| g > T::zero())
        .collect();
    let mut candidates = scan_peaks(gf, &fine, settings)?;
    candidates.push(best);
    let best = select_best(&candidates);

    Ok(SearchOptimum {
        t_opt: best.t,
        gamma_opt: best.gamma,
        pi_max: best.success,
        gamma_range: (lo, hi),
        gamma_points: settings.gamma_points,
        t_points: settings.t_points,
        fine_gamma_step: fine_step,
        t_ceiling: best.t_ceiling,
        truncated: best.t_ceiling < gf.volume(),
    })
}

/// `[0.8 γ_E, 1.2 γ_E]` when `γ_E` exists in the default scan, else `[0.05, 3]`.
pub fn default_gamma_window<T: Real>(gf: &GreenFunction<T>) -> Result<(T, T)> {
    let grid = GammaGrid::new(c(0.05), c(3.0), 600)?;
    match find_gamma_critical(gf, &grid, Criterion::Energy) {
        Ok(ge) => Ok((ge * c(0.8), ge * c(1.2))),
        Err(Error::NoRootInRange { .. }) => Ok((grid.min, grid.max)),
        Err(e) => Err(e),
    }
}

/// Terms of the success probability at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionSample<T> {
    pub t: T,
    /// Directly computed `π(t)`.
    pub success: T,
    pub reconstruction: T,
    /// Two lowest states' contribution to the amplitude.
    pub a: Complex<T>,
    /// Contribution of all higher states.
    pub r: Complex<T>,
    /// `2 Re(A r̄) + |r|²`
    pub remainder: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport<T> {
    pub gamma: T,
    pub e0: T,
    pub e1: T,
    pub theta: T,
    /// Constant term `C`.
    pub constant: T,
    /// `4 |⟨s,ψ_0⟩|² |⟨e_w,ψ_1⟩|²`
    pub amplitude: T,
    /// `|ratio_1 - ratio_0|` for `ratio_a = |⟨e_w,ψ_a⟩|² / |⟨s,ψ_a⟩|²`.
    pub ratio_residual: T,
    pub samples: Vec<DecompositionSample<T>>,
    pub max_reconstruction_error: T,
}

const GAMMA_E_TOL: f64 = 1e-8;

/// Splits the success probability at `γ_E` into a two-level oscillation,
/// a constant and a remainder, and checks the split against `π(t)`.
pub fn decompose_at_gamma_e<T: Real>(
    lap: &Laplacian<T>,
    target: usize,
    gamma: T,
    times: &[T],
) -> Result<DecompositionReport<T>> {
    let h = SearchHamiltonian::new(lap, gamma, target)?;
    let ev = Evolver::new(&h)?;
    let energies = &ev.spectrum().eigenvalues;
    if energies.len() < 2 {
        return Err(Error::invalid("graph", "needs at least two vertices"));
    }
    let (e0, e1) = (energies[0], energies[1]);
    if (e0 + e1).abs() >= c(GAMMA_E_TOL) {
        return Err(Error::NotAtGammaE {
            gamma: gamma.to_f64_lossy(),
            sum: (e0 + e1).to_f64_lossy(),
        });
    }
    let x = ev.target_coeffs();
    let y = ev.ground_coeffs();
    let (s0, s1) = (y[0] * y[0], y[1] * y[1]);
    let (w0, w1) = (x[0] * x[0], x[1] * x[1]);
    let ratio_residual = (w1 / s1 - w0 / s0).abs();

    // e^{2iθ} = -(conj⟨ψ_1,s⟩ ⟨e_w,ψ_0⟩) / (conj⟨ψ_0,s⟩ ⟨e_w,ψ_1⟩)
    let num = Complex::new(-(y[1] * x[0]), T::zero());
    let den = Complex::new(y[0] * x[1], T::zero());
    let rho = num / den;
    let mut theta = rho.arg() * c(0.5);
    if theta < T::zero() {
        theta += T::PI();
    }
    if theta >= T::PI() {
        theta -= T::PI();
    }

    let amplitude = c::<T>(4.0) * s0 * w1;
    let constant = w0 * s0 + w1 * s1 - c::<T>(2.0) * s0 * w1;
    let weights: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a * b).collect();

    let mut max_err = T::zero();
    let samples: Vec<DecompositionSample<T>> = times
        .iter()
        .map(|&t| {
            let a = amplitude_at(&energies[..2], &weights[..2], t);
            let r = amplitude_at(&energies[2..], &weights[2..], t);
            let success = (a + r).norm_sqr();
            let remainder = c::<T>(2.0) * (a * r.conj()).re + r.norm_sqr();
            let reconstruction = amplitude * (e1 * t + theta).sin().powi(2) + constant + remainder;
            max_err = max_err.max((reconstruction - success).abs());
            DecompositionSample {
                t,
                success,
                reconstruction,
                a,
                r,
                remainder,
            }
        })
        .collect();

    Ok(DecompositionReport {
        gamma,
        e0,
        e1,
        theta,
        constant,
        amplitude,
        ratio_residual,
        samples,
        max_reconstruction_error: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cartesian_power, complete_graph, path_graph};
    use std::f64::consts::PI;

    fn complete(n: usize) -> Laplacian<f64> {
        Laplacian::new(&complete_graph(n).unwrap()).unwrap()
    }

    #[test]
    fn evolution_at_zero_is_ground_state() {
        let pw = cartesian_power(&path_graph(0.3f64).unwrap(), 2).unwrap();
        let h = SearchHamiltonian::new(&pw.laplacian, 1.1, 0).unwrap();
        let r = evolve(&h, 0.0).unwrap();
        let s = ground_state(&pw.laplacian);
        for (z, &v) in r.state.iter().zip(&s) {
            assert!((z.re - v).abs() < 1e-13 && z.im.abs() < 1e-13);
        }
        let mu = pw.measure.values();
        assert!((r.success - mu[0] / pw.measure.volume()).abs() < 1e-12);
        assert!(evolve(&h, -1.0).is_err());
    }

    #[test]
    fn complete_graph_full_success() {
        let lap = complete(4);
        let h = SearchHamiltonian::new(&lap, 0.75, 0).unwrap();
        let r = evolve(&h, PI).unwrap();
        assert!((r.success - 1.0).abs() < 1e-12);
        assert!((r.weighted_norm(lap.measure().values()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_success_curve() {
        let n = 9;
        let lap = complete(n);
        let nf = n as f64;
        let h = SearchHamiltonian::new(&lap, (nf - 1.0) / nf, 3).unwrap();
        let ev = Evolver::new(&h).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.05;
            let want = (nf - 1.0) / nf * (t / nf.sqrt()).sin().powi(2) + 1.0 / nf;
            assert!((ev.success(t) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn secular_success_matches_dense() {
        let pw = cartesian_power(&path_graph(0.7f64).unwrap(), 2).unwrap();
        let gf = GreenFunction::new(&pw.laplacian, 0).unwrap();
        let h = SearchHamiltonian::new(&pw.laplacian, 0.9, 0).unwrap();
        let ev = Evolver::new(&h).unwrap();
        let sec = gf.secular(0.9);
        for t in [0.0, 0.3, 2.0, 17.5, 140.0] {
            assert!((ev.success(t) - sec.success(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn complete_graph_gamma_e() {
        for n in [4usize, 10, 25] {
            let gf = GreenFunction::new(&complete(n), 0).unwrap();
            let ge = find_gamma_critical(&gf, &GammaGrid::default(), Criterion::Energy).unwrap();
            assert!((ge - (n - 1) as f64 / n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn no_root_reported() {
        let gf = GreenFunction::new(&complete(16), 0).unwrap();
        let grid = GammaGrid::new(1.5, 3.0, 50).unwrap();
        assert!(matches!(
            find_gamma_critical(&gf, &grid, Criterion::Energy),
            Err(Error::NoRootInRange { which: "E", .. })
        ));
        let cp = critical_points(&gf, &grid).unwrap();
        assert_eq!(cp.gamma_e, None);
    }

    #[test]
    fn grid_validation() {
        assert!(GammaGrid::new(0.0, 1.0, 10).is_err());
        assert!(GammaGrid::new(1.0, 0.5, 10).is_err());
        assert!(GammaGrid::new(0.5, 1.0, 1).is_err());
        let g = GammaGrid::new(0.5, 1.0, 6).unwrap();
        assert_eq!(g.values().len(), 6);
        assert_eq!(*g.values().last().unwrap(), 1.0);
    }

    #[test]
    fn lattice_critical_ordering() {
        let pw = cartesian_power(&path_graph(0.5f64).unwrap(), 2).unwrap();
        let gf = GreenFunction::new(&pw.laplacian, 0).unwrap();
        let cp = critical_points(&gf, &GammaGrid::default()).unwrap();
        let (s, w, e) = (
            cp.gamma_s.unwrap(),
            cp.gamma_w.unwrap(),
            cp.gamma_e.unwrap(),
        );
        assert!(s <= e + 1e-6 && e <= w + 1e-6, "{s} {e} {w}");
        // residual of each defining equation
        for (which, g) in [
            (Criterion::GroundOverlap, s),
            (Criterion::TargetOverlap, w),
            (Criterion::Energy, e),
        ] {
            let ov = gf.secular(g).low_overlaps().unwrap();
            assert!(which.eval(&ov).abs() < 1e-9);
        }
    }

    #[test]
    fn complete_graph_optimum() {
        let n = 16;
        let gf = GreenFunction::new(&complete(n), 0).unwrap();
        let opt = optimize_search(&gf, &OptimizeSettings::default()).unwrap();
        let nf = n as f64;
        assert!((opt.gamma_opt - (nf - 1.0) / nf).abs() < 1e-3, "{opt:?}");
        assert!(
            (opt.t_opt - PI / 2.0 * nf.sqrt()).abs() < 1e-2 * nf.sqrt(),
            "{opt:?}"
        );
        assert!((opt.pi_max - 1.0).abs() < 1e-6);
    }

    #[test]
    fn optimum_dominates_grid() {
        let pw = cartesian_power(&path_graph(0.4).unwrap(), 2).unwrap();
        let gf = GreenFunction::new(&pw.laplacian, 0).unwrap();
        let settings = OptimizeSettings {
            gamma_points: 40,
            t_points: 400,
            ..Default::default()
        };
        let opt = optimize_search(&gf, &settings).unwrap();
        let grid = GammaGrid::new(opt.gamma_range.0, opt.gamma_range.1, 40).unwrap();
        for g in grid.values() {
            let p = peak_at(&gf.secular(g), gf.volume(), 400, TimeCeiling::default()).unwrap();
            assert!(opt.pi_max >= p.success - 1e-12);
        }
        // local maximum in t
        let sec = gf.secular(opt.gamma_opt);
        for dt in [-1e-3, 1e-3] {
            assert!(sec.success(opt.t_opt + dt) <= opt.pi_max + 1e-12);
        }
    }

    #[test]
    fn decomposition_complete_four() {
        let lap = complete(4);
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
        let rep = decompose_at_gamma_e(&lap, 0, 0.75, &times).unwrap();
        assert!(rep.theta.abs() < 1e-12);
        assert!((rep.constant - 0.25).abs() < 1e-12);
        assert!((rep.amplitude - 0.75).abs() < 1e-12);
        assert!(rep
            .samples
            .iter()
            .all(|s| s.remainder.abs() < 1e-12 && s.r.norm() < 1e-12));
        assert!(rep.max_reconstruction_error < 1e-10);
        assert!(rep.ratio_residual < 1e-8);
    }

    #[test]
    fn decomposition_requires_gamma_e() {
        assert!(matches!(
            decompose_at_gamma_e(&complete(4), 0, 0.8, &[0.0]),
            Err(Error::NotAtGammaE { .. })
        ));
    }

    #[test]
    fn decomposition_on_lattice() {
        let pw = cartesian_power(&path_graph(0.6).unwrap(), 2).unwrap();
        let gf = GreenFunction::new(&pw.laplacian, 0).unwrap();
        let ge = find_gamma_critical(&gf, &GammaGrid::default(), Criterion::Energy).unwrap();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.37).collect();
        let rep = decompose_at_gamma_e(&pw.laplacian, 0, ge, &times).unwrap();
        assert!(
            rep.max_reconstruction_error < 1e-10,
            "{}",
            rep.max_reconstruction_error
        );
        assert!(rep.ratio_residual < 1e-8);
        assert!(rep.theta == 0.0 || (rep.theta - PI / 2.0).abs() < 1e-12);
    }
}
