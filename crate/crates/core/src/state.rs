//! Wavefunctions on the 2π torus, stored in the momentum basis.
//!
//! A state is the list of amplitudes `c_m` of the basis functions
//! `e^{imθ}/√(2π)` for integer momenta `|m| ≤ m_max`. Translations and
//! reflections act on the amplitudes directly and are exact. Position-space
//! multiplication goes through an `M`-point FFT.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Unitarity tolerance on `Σ|c_m|²`.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Maximum probability allowed in the outer tenth of the momentum window.
pub const TAIL_THRESHOLD: f64 = 1e-10;
/// Momenta with `|m| > TAIL_FRACTION · m_max` count towards the tail mass.
pub const TAIL_FRACTION: f64 = 0.9;

/// Momentum cutoff and position-grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    m_max: usize,
    points: usize,
}

impl GridSpec {
    pub fn new(m_max: usize, points: usize) -> Result<Self> {
        if m_max < 1 {
            return Err(Error::InvalidGrid("m_max must be at least 1".into()));
        }
        if points < 2 * m_max + 1 {
            return Err(Error::InvalidGrid(format!(
                "{points} position points cannot resolve momenta up to {m_max} (need {})",
                2 * m_max + 1
            )));
        }
        Ok(Self { m_max, points })
    }

    /// Smallest power-of-two grid that holds `m_max`.
    pub fn with_cutoff(m_max: usize) -> Result<Self> {
        Self::new(m_max, (2 * m_max + 1).next_power_of_two())
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Number of position samples `M`.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of stored momentum amplitudes, `2·m_max + 1`.
    pub fn len(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i64) -> bool {
        m.unsigned_abs() as usize <= self.m_max
    }

    pub fn momentum(&self, index: usize) -> i64 {
        index as i64 - self.m_max as i64
    }

    pub fn index(&self, m: i64) -> Option<usize> {
        self.contains(m).then(|| (m + self.m_max as i64) as usize)
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> {
        let m = self.m_max as i64;
        -m..=m
    }

    /// Angle of the `j`-th position sample.
    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.points as f64
    }

    fn tail_start(&self) -> f64 {
        TAIL_FRACTION * self.m_max as f64
    }
}

/// Expectation values after `kicks` periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub p_mean: f64,
    pub p_second: f64,
    pub norm: f64,
    /// Average effective force `⟨p⟩/N`; absent before the first kick.
    pub f_avg: Option<f64>,
}

impl Observables {
    pub fn variance(&self) -> f64 {
        self.p_second - self.p_mean * self.p_mean
    }
}

/// Cached forward/inverse FFT plans for one grid.
#[derive(Clone)]
pub struct SpectralTransform {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("grid", &self.grid)
            .finish()
    }
}

impl SpectralTransform {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// `Σ_m c_m e^{imθ_j}` on the grid (no `1/√(2π)` factor).
    fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let points = self.grid.points;
        let mut buf = vec![Complex64::new(0.0, 0.0); points];
        for (i, &c) in coeffs.iter().enumerate() {
            let m = self.grid.momentum(i);
            buf[m.rem_euclid(points as i64) as usize] = c;
        }
        self.inverse.process(&mut buf);
        buf
    }

    /// Inverse of [`Self::synthesize`]. Returns the retained amplitudes and
    /// the mass that landed outside `|m| ≤ m_max`.
    fn analyze(&self, mut samples: Vec<Complex64>) -> (Vec<Complex64>, f64) {
        let points = self.grid.points;
        self.forward.process(&mut samples);
        let scale = 1.0 / points as f64;
        let mut retained = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut total = 0.0;
        for (slot, value) in retained.iter_mut().enumerate() {
            let m = self.grid.momentum(slot);
            *value = samples[m.rem_euclid(points as i64) as usize] * scale;
        }
        for s in &samples {
            total += (s * scale).norm_sqr();
        }
        let kept: f64 = retained.iter().map(|c| c.norm_sqr()).sum();
        (retained, (total - kept).max(0.0))
    }
}

/// A state on the torus in the momentum basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    coeffs: Vec<Complex64>,
    grid: GridSpec,
}

impl WaveFunction {
    /// Builds a state from raw amplitudes ordered from `-m_max` to `m_max`.
    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("amplitudes"));
        }
        Ok(Self { coeffs, grid })
    }

    /// The uniform state `1/√(2π)`.
    pub fn uniform(grid: GridSpec) -> Self {
        Self::plane_wave(0, grid).expect("m = 0 is always on the grid")
    }

    /// The momentum eigenstate `e^{iLθ}/√(2π)`.
    pub fn plane_wave(l: i64, grid: GridSpec) -> Result<Self> {
        let idx = grid.index(l).ok_or(Error::MomentumOutOfRange {
            l,
            m_max: grid.m_max,
        })?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        coeffs[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs, grid })
    }

    /// Samples `sampler` at the `M` grid angles, transforms, truncates to the
    /// momentum window and normalizes.
    pub fn from_position_fn<F>(sampler: F, grid: GridSpec) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let samples: Vec<Complex64> = (0..grid.points).map(|j| sampler(grid.theta(j))).collect();
        if samples
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("position samples"));
        }
        let (coeffs, overflow) = SpectralTransform::new(grid).analyze(samples);
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / norm_sqr.sqrt();
        let state = Self {
            coeffs: coeffs.into_iter().map(|c| c * scale).collect(),
            grid,
        };
        let tail = state.tail_mass() + overflow * scale * scale;
        if tail > TAIL_THRESHOLD {
            return Err(Error::TailMass {
                mass: tail,
                threshold: TAIL_THRESHOLD,
            });
        }
        Ok(state)
    }

    /// Normalized state with random amplitudes on `|m| ≤ band`, for
    /// verification batteries. Deterministic in `seed`.
    pub fn random(grid: GridSpec, band: usize, seed: u64) -> Self {
        let band = band.min(grid.m_max) as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for m in -band..=band {
            let idx = grid.index(m).unwrap();
            coeffs[idx] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut coeffs {
            *c /= norm;
        }
        Self { coeffs, grid }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Amplitude of momentum `m`; zero outside the window.
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.grid
            .index(m)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability in `|m| > 0.9·m_max`.
    pub fn tail_mass(&self) -> f64 {
        let start = self.grid.tail_start();
        self.grid
            .momenta()
            .zip(&self.coeffs)
            .filter(|(m, _)| m.abs() as f64 > start)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn check_tail(&self) -> Result<()> {
        let mass = self.tail_mass();
        if mass > TAIL_THRESHOLD {
            return Err(Error::TailMass {
                mass,
                threshold: TAIL_THRESHOLD,
            });
        }
        Ok(())
    }

    /// `φ(θ_j)` at the `M` grid angles.
    pub fn to_position_samples(&self) -> Vec<Complex64> {
        self.to_position_samples_with(&SpectralTransform::new(self.grid))
    }

    pub fn to_position_samples_with(&self, transform: &SpectralTransform) -> Vec<Complex64> {
        let scale = 1.0 / TAU.sqrt();
        let mut samples = transform.synthesize(&self.coeffs);
        for s in &mut samples {
            *s *= scale;
        }
        samples
    }

    /// Inverse of [`Self::to_position_samples`]; no normalization is applied.
    pub fn from_position_samples(samples: &[Complex64], grid: GridSpec) -> Result<Self> {
        if samples.len() != grid.points {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.points,
                samples.len()
            )));
        }
        let scale = TAU.sqrt();
        let scaled = samples.iter().map(|s| s * scale).collect();
        let (coeffs, _) = SpectralTransform::new(grid).analyze(scaled);
        Self::from_coefficients(grid, coeffs)
    }

    /// Multiplies by a unimodular function of `θ`.
    pub fn position_multiply<G>(&self, g: G) -> Result<Self>
    where
        G: Fn(f64) -> Complex64,
    {
        let grid = self.grid;
        let multiplier: Vec<Complex64> = (0..grid.points).map(|j| g(grid.theta(j))).collect();
        let deviation = multiplier
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if !(deviation <= 1e-12) {
            return Err(Error::NotUnimodular(deviation));
        }
        Ok(self
            .multiply_samples(&SpectralTransform::new(grid), &multiplier)
            .0)
    }

    /// Pointwise product with precomputed multiplier samples. Also returns
    /// the probability pushed beyond the momentum window.
    pub(crate) fn multiply_samples(
        &self,
        transform: &SpectralTransform,
        multiplier: &[Complex64],
    ) -> (Self, f64) {
        debug_assert_eq!(transform.grid, self.grid);
        let mut samples = transform.synthesize(&self.coeffs);
        for (s, g) in samples.iter_mut().zip(multiplier) {
            *s *= g;
        }
        let (coeffs, overflow) = transform.analyze(samples);
        (
            Self {
                coeffs,
                grid: self.grid,
            },
            overflow,
        )
    }

    /// `φ(θ) → φ(θ + s)`, i.e. `c_m → c_m e^{ims}`.
    pub fn translate(&self, s: f64) -> Self {
        let coeffs = self
            .grid
            .momenta()
            .zip(&self.coeffs)
            .map(|(m, &c)| c * Complex64::from_polar(1.0, m as f64 * s))
            .collect();
        Self {
            coeffs,
            grid: self.grid,
        }
    }

    /// Translation by the rational angle `2π·n/d`, with the phase reduced
    /// exactly modulo `d`.
    pub fn translate_fraction(&self, n: u64, d: u64) -> Self {
        let coeffs = self
            .grid
            .momenta()
            .zip(&self.coeffs)
            .map(|(m, &c)| {
                let residue = (m as i128 * n as i128).rem_euclid(d as i128) as f64;
                c * Complex64::from_polar(1.0, TAU * residue / d as f64)
            })
            .collect();
        Self {
            coeffs,
            grid: self.grid,
        }
    }

    /// `φ(θ) → φ(2π − θ)`, i.e. `c_m → c_{−m}`.
    pub fn parity_reflect(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self {
            coeffs,
            grid: self.grid,
        }
    }

    pub fn observables(&self, kicks: usize) -> Observables {
        let mut p_mean = 0.0;
        let mut p_second = 0.0;
        let mut norm = 0.0;
        for (m, c) in self.grid.momenta().zip(&self.coeffs) {
            let w = c.norm_sqr();
            let m = m as f64;
            norm += w;
            p_mean += m * w;
            p_second += m * m * w;
        }
        Observables {
            p_mean,
            p_second,
            norm,
            f_avg: (kicks > 0).then(|| p_mean / kicks as f64),
        }
    }

    /// `⟨p⟩ / √(⟨p²⟩ − ⟨p⟩²)`.
    pub fn directionality_ratio(&self) -> Result<f64> {
        let obs = self.observables(0);
        let variance = obs.variance();
        if !(variance > 1e-14 * obs.p_second.max(1.0)) {
            return Err(Error::UndefinedRatio);
        }
        Ok(obs.p_mean / variance.sqrt())
    }

    /// `max_m |c_m − c'_m|`.
    pub fn max_difference(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max_m |c_m − sign·c_{−m}|`: zero for symmetric states with
    /// `sign = 1` and antisymmetric ones with `sign = −1`.
    pub fn parity_residual(&self, sign: f64) -> f64 {
        let n = self.coeffs.len();
        (0..n)
            .map(|i| (self.coeffs[i] - self.coeffs[n - 1 - i] * sign).norm())
            .fold(0.0, f64::max)
    }
}

/// `∫₀^{2π} |φ|² w dθ` evaluated on the state's position grid.
pub fn position_average<W>(state: &WaveFunction, weight: W) -> f64
where
    W: Fn(f64) -> f64,
{
    let grid = state.grid();
    let samples = state.to_position_samples();
    let dtheta = TAU / grid.points() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(j, s)| s.norm_sqr() * weight(grid.theta(j)))
        .sum::<f64>()
        * dtheta
}

/// `ℏ = 1` momentum expectation by direct position-space quadrature of
/// `∫ φ* (−i ∂_θ φ) dθ`, with the derivative supplied by the caller.
pub fn momentum_by_quadrature<P, D>(phi: P, dphi: D, points: usize) -> f64
where
    P: Fn(f64) -> Complex64,
    D: Fn(f64) -> Complex64,
{
    let dtheta = TAU / points as f64;
    let i = Complex64::new(0.0, 1.0);
    // Dividing by the sampled norm makes the result independent of how
    // `phi` is normalized.
    let (num, den) = (0..points).fold((0.0, 0.0), |(num, den), j| {
        let th = dtheta * j as f64;
        let p = phi(th);
        (num + (p.conj() * (-i) * dphi(th)).re, den + p.norm_sqr())
    });
    num / den
}
