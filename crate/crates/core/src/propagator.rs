//! One-period maps of the resonant kicked rotor and trajectory evolution.
//!
//! At `T = 4πr/q` the free propagator `e^{−iTm²/2}` reduces to the phase
//! `e^{−2πi r m²/q}`, which depends on `m` only through `r·m² mod q`. The same
//! operator can be written as a weighted sum of `q` rigid translations with
//! Gauss-sum weights `γ_n / q`. Both forms are provided; the phase form is the
//! production path.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::state::{GridSpec, Observables, SpectralTransform, WaveFunction, TAIL_THRESHOLD};

/// Kick potential `V(θ) = k(cos θ + a cos(2θ + α))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickPotential {
    pub k: f64,
    pub a: f64,
    pub alpha: f64,
}

impl KickPotential {
    pub fn new(k: f64, a: f64, alpha: f64) -> Result<Self> {
        if !(k.is_finite() && a.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidParameter(
                "potential parameters must be finite".into(),
            ));
        }
        if k < 0.0 || a < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kick strength and harmonic ratio must be non-negative (k={k}, a={a})"
            )));
        }
        Ok(Self { k, a, alpha })
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.k * (theta.cos() + self.a * (2.0 * theta + self.alpha).cos())
    }

    /// `V′(θ) = −k(sin θ + 2a sin(2θ + α))`.
    pub fn derivative(&self, theta: f64) -> f64 {
        -self.k * (theta.sin() + 2.0 * self.a * (2.0 * theta + self.alpha).sin())
    }

    /// Upper bound on `|V′|`, the per-kick momentum transfer scale.
    pub fn max_force(&self) -> f64 {
        self.k * (1.0 + 2.0 * self.a)
    }

    /// Harmonic content of `e^{−iV}` that matters at double precision.
    pub fn bandwidth(&self) -> usize {
        self.k.ceil() as usize + (2.0 * self.k * self.a).ceil() as usize + 32
    }

    /// Grid sized for an `n_kicks` run: ballistic spreading at rate
    /// `max|V′|` with a factor four of headroom.
    pub fn grid_for_kicks(&self, n_kicks: usize) -> GridSpec {
        let m_max = (4.0 * self.max_force() * (n_kicks + 1) as f64).ceil() as usize + 64;
        self.grid_with_cutoff(m_max)
            .expect("adaptive cutoff is always a valid grid")
    }

    /// Grid with a fixed momentum cutoff and a kick-safe position grid.
    pub fn grid_with_cutoff(&self, m_max: usize) -> Result<GridSpec> {
        let band = self.bandwidth();
        let points = (2 * m_max + 1 + band).max(4 * band).next_power_of_two();
        GridSpec::new(m_max, points)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Resonance `T = 4πr/q` with coprime `r, q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResonanceOrder {
    r: u64,
    q: u64,
}

impl ResonanceOrder {
    pub fn new(r: u64, q: u64) -> Result<Self> {
        if r == 0 || q == 0 || gcd(r, q) != 1 {
            return Err(Error::NotCoprime { r, q });
        }
        Ok(Self { r, q })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Kick period `T = 4πr/q`; also the effective Planck constant.
    pub fn period(&self) -> f64 {
        4.0 * PI * self.r as f64 / self.q as f64
    }

    /// `r·m² mod q`, the exact phase index of momentum `m`.
    fn phase_residue(&self, m: i64) -> u64 {
        let q = self.q as i128;
        let m = (m as i128).rem_euclid(q);
        ((self.r as i128 % q) * m * m).rem_euclid(q) as u64
    }

    /// `e^{−2πi r m²/q}`.
    pub fn free_phase(&self, m: i64) -> Complex64 {
        Complex64::from_polar(1.0, -TAU * self.phase_residue(m) as f64 / self.q as f64)
    }
}

/// The Gauss sums `γ_n = Σ_{m<q} exp(−2πi(r m² + m n)/q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    order: ResonanceOrder,
    gamma: Vec<Complex64>,
}

impl GammaTable {
    pub fn new(order: ResonanceOrder) -> Self {
        let gamma = (0..order.q as i64).map(|n| gauss_sum(order, n)).collect();
        Self { order, gamma }
    }

    pub fn order(&self) -> ResonanceOrder {
        self.order
    }

    pub fn values(&self) -> &[Complex64] {
        &self.gamma
    }

    /// `γ_n` for any integer `n`, periodic in `q`.
    pub fn get(&self, n: i64) -> Complex64 {
        self.gamma[n.rem_euclid(self.order.q as i64) as usize]
    }

    /// `max_n |γ_n − γ_{n+q}|` with `γ_{n+q}` re-summed directly.
    pub fn periodicity_residual(&self) -> f64 {
        let q = self.order.q as i64;
        (0..q)
            .map(|n| (self.gamma[n as usize] - gauss_sum(self.order, n + q)).norm())
            .fold(0.0, f64::max)
    }

    /// `max_n |γ_n − γ_{q−n}|`.
    pub fn reflection_residual(&self) -> f64 {
        let q = self.order.q as i64;
        (0..q)
            .map(|n| (self.gamma[n as usize] - self.get(q - n)).norm())
            .fold(0.0, f64::max)
    }

    /// `|Σ_n γ_n − q|`.
    pub fn sum_residual(&self) -> f64 {
        let sum: Complex64 = self.gamma.iter().sum();
        (sum - self.order.q as f64).norm()
    }

    /// `max_n ||γ_n| − √q|`, meaningful for odd `q`.
    pub fn magnitude_residual(&self) -> f64 {
        let root = (self.order.q as f64).sqrt();
        self.gamma
            .iter()
            .map(|g| (g.norm() - root).abs())
            .fold(0.0, f64::max)
    }
}

fn gauss_sum(order: ResonanceOrder, n: i64) -> Complex64 {
    let q = order.q as i128;
    let r = order.r as i128;
    let n = n as i128;
    (0..q)
        .map(|m| {
            let residue = (r * m * m + m * n).rem_euclid(q) as f64;
            Complex64::from_polar(1.0, -TAU * residue / q as f64)
        })
        .sum()
}

pub fn gamma_table(order: ResonanceOrder) -> GammaTable {
    GammaTable::new(order)
}

/// Free evolution over one resonant period as a momentum-phase multiplication.
pub fn resonant_free_step(state: &WaveFunction, order: ResonanceOrder) -> WaveFunction {
    let grid = state.grid();
    let coeffs = grid
        .momenta()
        .zip(state.coeffs())
        .map(|(m, &c)| c * order.free_phase(m))
        .collect();
    WaveFunction::from_coefficients(grid, coeffs).expect("phase multiplication keeps shape")
}

/// Free evolution as `(1/q) Σ_n γ_n φ(θ + 2πn/q)`. Costs `q` translations;
/// used to cross-check [`resonant_free_step`].
pub fn gauss_sum_free_step(state: &WaveFunction, table: &GammaTable) -> WaveFunction {
    let q = table.order.q;
    let grid = state.grid();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for n in 0..q {
        let weight = table.gamma[n as usize] / q as f64;
        let shifted = state.translate_fraction(n, q);
        for (a, c) in acc.iter_mut().zip(shifted.coeffs()) {
            *a += weight * c;
        }
    }
    WaveFunction::from_coefficients(grid, acc).expect("translation sum keeps shape")
}

/// Multiplication by `e^{−iV(θ)}` with cached FFT plans and multiplier.
#[derive(Debug, Clone)]
pub struct KickOperator {
    potential: KickPotential,
    transform: SpectralTransform,
    multiplier: Vec<Complex64>,
}

impl KickOperator {
    pub fn new(potential: KickPotential, grid: GridSpec) -> Self {
        let multiplier = (0..grid.points())
            .map(|j| Complex64::from_polar(1.0, -potential.value(grid.theta(j))))
            .collect();
        Self {
            potential,
            transform: SpectralTransform::new(grid),
            multiplier,
        }
    }

    pub fn potential(&self) -> KickPotential {
        self.potential
    }

    pub fn grid(&self) -> GridSpec {
        self.transform.grid()
    }

    /// Applies the kick and returns the new state together with its tail
    /// mass (including probability pushed past the cutoff).
    pub fn apply_with_tail(&self, state: &WaveFunction) -> Result<(WaveFunction, f64)> {
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "state {:?}, kick {:?}",
                state.grid(),
                self.grid()
            )));
        }
        let (kicked, overflow) = state.multiply_samples(&self.transform, &self.multiplier);
        let tail = kicked.tail_mass() + overflow;
        if !tail.is_finite() {
            return Err(Error::NonFinite("kick"));
        }
        if tail > TAIL_THRESHOLD {
            return Err(Error::TailMass {
                mass: tail,
                threshold: TAIL_THRESHOLD,
            });
        }
        Ok((kicked, tail))
    }

    pub fn apply(&self, state: &WaveFunction) -> Result<WaveFunction> {
        self.apply_with_tail(state).map(|(s, _)| s)
    }
}

pub fn kick_step(state: &WaveFunction, potential: KickPotential) -> Result<WaveFunction> {
    KickOperator::new(potential, state.grid()).apply(state)
}

/// One period: free evolution, then the kick.
pub fn period_map(
    state: &WaveFunction,
    potential: KickPotential,
    order: ResonanceOrder,
) -> Result<WaveFunction> {
    kick_step(&resonant_free_step(state, order), potential)
}

/// Direct Floquet step `e^{−iV} e^{−iTp²/2}` with `T` evaluated in floating
/// point, independent of the resonance reduction.
pub fn split_step_oracle(
    state: &WaveFunction,
    potential: KickPotential,
    order: ResonanceOrder,
) -> Result<WaveFunction> {
    let grid = state.grid();
    let period = order.period();
    let coeffs = grid
        .momenta()
        .zip(state.coeffs())
        .map(|(m, &c)| {
            let m = m as f64;
            c * Complex64::from_polar(1.0, -0.5 * period * m * m)
        })
        .collect();
    let free = WaveFunction::from_coefficients(grid, coeffs)?;
    kick_step(&free, potential)
}

/// Precomputed period map for repeated application on one grid.
#[derive(Debug, Clone)]
pub struct FloquetMap {
    order: ResonanceOrder,
    phases: Vec<Complex64>,
    kick: KickOperator,
}

impl FloquetMap {
    pub fn new(potential: KickPotential, order: ResonanceOrder, grid: GridSpec) -> Self {
        Self {
            order,
            phases: grid.momenta().map(|m| order.free_phase(m)).collect(),
            kick: KickOperator::new(potential, grid),
        }
    }

    pub fn order(&self) -> ResonanceOrder {
        self.order
    }

    pub fn potential(&self) -> KickPotential {
        self.kick.potential()
    }

    pub fn step_with_tail(&self, state: &WaveFunction) -> Result<(WaveFunction, f64)> {
        let coeffs = state
            .coeffs()
            .iter()
            .zip(&self.phases)
            .map(|(c, p)| c * p)
            .collect();
        let free = WaveFunction::from_coefficients(state.grid(), coeffs)?;
        self.kick.apply_with_tail(&free)
    }

    pub fn step(&self, state: &WaveFunction) -> Result<WaveFunction> {
        self.step_with_tail(state).map(|(s, _)| s)
    }
}

/// Observables after one kick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub kick: usize,
    pub observables: Observables,
    pub tail_mass: f64,
}

/// Per-kick record of an evolution, starting with the initial state at `N = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    /// `⟨p⟩_N / N` at the final record.
    pub fn average_force(&self) -> Option<f64> {
        self.last().and_then(|r| r.observables.f_avg)
    }

    pub fn kicks(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.kick as f64).collect()
    }

    pub fn p_means(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.observables.p_mean).collect()
    }

    /// Records after the initial one.
    pub fn kicked(&self) -> &[TrajectoryRecord] {
        &self.records[1.min(self.records.len())..]
    }
}

/// A run stopped early; `trajectory` holds every record up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("evolution aborted at kick {kick}: {cause}")]
pub struct Aborted {
    pub trajectory: Trajectory,
    pub kick: usize,
    pub cause: Error,
}

impl From<Aborted> for Error {
    fn from(a: Aborted) -> Self {
        Error::Aborted {
            kick: a.kick,
            cause: Box::new(a.cause),
        }
    }
}

/// Applies the period map `n_kicks` times, calling `inspect` on every state
/// (including the initial one) and returning the trajectory and final state.
pub fn evolve_inspect<F>(
    initial: &WaveFunction,
    potential: KickPotential,
    order: ResonanceOrder,
    n_kicks: usize,
    mut inspect: F,
) -> std::result::Result<(Trajectory, WaveFunction), Aborted>
where
    F: FnMut(usize, &WaveFunction),
{
    let map = FloquetMap::new(potential, order, initial.grid());
    let mut trajectory = Trajectory {
        records: Vec::with_capacity(n_kicks + 1),
    };
    trajectory.records.push(TrajectoryRecord {
        kick: 0,
        observables: initial.observables(0),
        tail_mass: initial.tail_mass(),
    });
    inspect(0, initial);
    let mut state = initial.clone();
    for kick in 1..=n_kicks {
        match map.step_with_tail(&state) {
            Ok((next, tail_mass)) => {
                state = next;
                trajectory.records.push(TrajectoryRecord {
                    kick,
                    observables: state.observables(kick),
                    tail_mass,
                });
                inspect(kick, &state);
            }
            Err(cause) => {
                return Err(Aborted {
                    trajectory,
                    kick,
                    cause,
                })
            }
        }
    }
    Ok((trajectory, state))
}

pub fn evolve(
    initial: &WaveFunction,
    potential: KickPotential,
    order: ResonanceOrder,
    n_kicks: usize,
) -> std::result::Result<Trajectory, Aborted> {
    evolve_inspect(initial, potential, order, n_kicks, |_, _| {}).map(|(t, _)| t)
}
