//! Named initial conditions.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagator::{evolve, KickPotential, ResonanceOrder};
use crate::state::{GridSpec, WaveFunction};

/// Built-in position-space profiles, normalized on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `cos(cos θ + sin 2θ)`: real and spatially asymmetric.
    Fig3,
    /// `sin θ`: antisymmetric.
    Sin,
    /// `1 + 0.5 e^{iθ}`: asymmetric in position density.
    Skew,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Fig3, Builtin::Sin, Builtin::Skew];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Fig3 => "fig3",
            Builtin::Sin => "sin",
            Builtin::Skew => "skew",
        }
    }

    pub fn sample(self, theta: f64) -> Complex64 {
        match self {
            Builtin::Fig3 => Complex64::new((theta.cos() + (2.0 * theta).sin()).cos(), 0.0),
            Builtin::Sin => Complex64::new(theta.sin(), 0.0),
            Builtin::Skew => 1.0 + 0.5 * Complex64::from_polar(1.0, theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InitialCondition {
    /// `1/√(2π)`.
    #[default]
    Uniform,
    PlaneWave(i64),
    Builtin(Builtin),
}

impl InitialCondition {
    /// Largest momentum with appreciable weight, used to size grids.
    pub fn momentum_extent(&self) -> usize {
        match self {
            InitialCondition::Uniform => 0,
            InitialCondition::PlaneWave(l) => l.unsigned_abs() as usize,
            InitialCondition::Builtin(Builtin::Fig3) => 32,
            InitialCondition::Builtin(_) => 1,
        }
    }

    /// Adaptive grid of `potential` widened by the initial momentum extent.
    pub fn grid_for_run(&self, potential: &KickPotential, n_kicks: usize) -> GridSpec {
        let base = potential.grid_for_kicks(n_kicks).m_max();
        potential
            .grid_with_cutoff(base + self.momentum_extent())
            .expect("widened adaptive cutoff is a valid grid")
    }

    /// `⟨p⟩_N / N` from an `n_kicks` evolution on the adaptive grid.
    pub fn average_force(
        &self,
        potential: KickPotential,
        order: ResonanceOrder,
        n_kicks: usize,
    ) -> Result<f64> {
        let initial = self.build(self.grid_for_run(&potential, n_kicks))?;
        let trajectory = evolve(&initial, potential, order, n_kicks)?;
        trajectory
            .average_force()
            .ok_or_else(|| Error::InvalidParameter("average force needs at least one kick".into()))
    }

    pub fn build(&self, grid: GridSpec) -> Result<WaveFunction> {
        match *self {
            InitialCondition::Uniform => Ok(WaveFunction::uniform(grid)),
            InitialCondition::PlaneWave(l) => WaveFunction::plane_wave(l, grid),
            InitialCondition::Builtin(b) => WaveFunction::from_position_fn(|t| b.sample(t), grid),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Uniform => write!(f, "uniform"),
            InitialCondition::PlaneWave(l) => write!(f, "plane:{l}"),
            InitialCondition::Builtin(b) => write!(f, "expr:{}", b.name()),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(InitialCondition::Uniform);
        }
        if let Some(l) = s.strip_prefix("plane:") {
            return l
                .trim()
                .parse()
                .map(InitialCondition::PlaneWave)
                .map_err(|_| Error::InvalidParameter(format!("bad plane-wave momentum '{l}'")));
        }
        if let Some(name) = s.strip_prefix("expr:") {
            let name = name.trim();
            return Builtin::ALL
                .into_iter()
                .find(|b| b.name() == name)
                .map(InitialCondition::Builtin)
                .ok_or_else(|| {
                    let known: Vec<_> = Builtin::ALL.iter().map(|b| b.name()).collect();
                    Error::InvalidParameter(format!(
                        "unknown builtin '{name}' (known: {})",
                        known.join(", ")
                    ))
                });
        }
        Err(Error::InvalidParameter(format!(
            "initial condition '{s}' is not uniform, plane:L or expr:NAME"
        )))
    }
}

/// Normalization constant `η` of a builtin, from a dense quadrature of
/// `∫|φ|² dθ = 1`.
pub fn builtin_normalization(b: Builtin) -> f64 {
    let points = 4096;
    let integral: f64 = (0..points)
        .map(|j| b.sample(TAU * j as f64 / points as f64).norm_sqr())
        .sum::<f64>()
        * TAU
        / points as f64;
    1.0 / integral.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in [
            "uniform",
            "plane:-3",
            "plane:0",
            "expr:fig3",
            "expr:sin",
            "expr:skew",
        ] {
            let ic: InitialCondition = s.parse().unwrap();
            assert_eq!(ic.to_string(), s);
        }
        assert!("plane:x".parse::<InitialCondition>().is_err());
        assert!("expr:gauss".parse::<InitialCondition>().is_err());
        assert!("flat".parse::<InitialCondition>().is_err());
    }

    #[test]
    fn builtins_fit_their_extent() {
        let grid = GridSpec::with_cutoff(64).unwrap();
        for b in Builtin::ALL {
            let ic = InitialCondition::Builtin(b);
            let state = ic.build(grid).unwrap();
            let extent = ic.momentum_extent() as i64;
            let outside: f64 = grid
                .momenta()
                .zip(state.coeffs())
                .filter(|(m, _)| m.abs() > extent)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            assert!(outside < 1e-20, "{}: {outside}", b.name());
        }
    }

    #[test]
    fn fig3_state_amplitudes_match_normalized_samples() {
        let grid = GridSpec::with_cutoff(64).unwrap();
        let state = InitialCondition::Builtin(Builtin::Fig3)
            .build(grid)
            .unwrap();
        let eta = builtin_normalization(Builtin::Fig3);
        let samples = state.to_position_samples();
        for (j, s) in samples.iter().enumerate().step_by(7) {
            let expected = eta * Builtin::Fig3.sample(grid.theta(j));
            assert!((s - expected).norm() < 1e-12);
        }
    }
}
