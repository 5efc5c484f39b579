//! `ratchet verify`: invariant batteries with one line per check.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use ratchet::propagator::{gauss_sum_free_step, resonant_free_step};
use ratchet::symmetry::{
    check_plane_wave_invariance, check_t4pi_growth, check_zero_current,
    gamma_phase_identity_residual, plane_wave_theorem_applies, PHASE_IDENTITY_TOLERANCE,
    T4PI_RELATIVE_TOLERANCE,
};
use ratchet::{
    period_map, split_step_oracle, Builtin, GammaTable, GridSpec, InitialCondition, KickPotential,
    ResonanceOrder, WaveFunction,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Symmetry,
    Oracle,
    Gamma,
    All,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "symmetry" => Ok(Suite::Symmetry),
            "oracle" => Ok(Suite::Oracle),
            "gamma" => Ok(Suite::Gamma),
            "all" => Ok(Suite::All),
            _ => Err(CliError::config(
                None,
                "suite",
                format!("unknown suite '{s}' (known: symmetry, oracle, gamma, all)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported for context; never counts as a failure.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub status: Status,
    pub name: String,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            status: if passed { Status::Pass } else { Status::Fail },
            name: name.into(),
            detail: detail.into(),
        }
    }

    fn info(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            status: Status::Info,
            name: name.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn coprime_orders(q_max: u64) -> impl Iterator<Item = ResonanceOrder> {
    (1..=q_max).flat_map(|q| (1..=q).filter_map(move |r| ResonanceOrder::new(r, q).ok()))
}

pub fn gamma_suite() -> Vec<Check> {
    (1..=32u64)
        .map(|q| {
            let (mut per, mut refl, mut sum, mut mag, mut count) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0);
            for order in coprime_orders(32).filter(|o| o.q() == q) {
                let t = GammaTable::new(order);
                per = per.max(t.periodicity_residual());
                refl = refl.max(t.reflection_residual());
                sum = sum.max(t.sum_residual());
                if q % 2 == 1 {
                    mag = mag.max(t.magnitude_residual());
                }
                count += 1;
            }
            let passed = per <= 1e-12 && refl <= 1e-12 && sum <= 1e-10 && mag <= 1e-10;
            Check::new(
                passed,
                format!("gamma q={q}"),
                format!(
                    "{count} residues, periodicity {per:.1e}, reflection {refl:.1e}, sum {sum:.1e}, magnitude {mag:.1e}"
                ),
            )
        })
        .collect()
}

pub fn oracle_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    for (r, q) in [(1, 2), (1, 3), (2, 3), (1, 5), (3, 5)] {
        let order = ResonanceOrder::new(r, q).unwrap();
        let mut worst = 0.0f64;
        let mut error = None;
        for k in [0.5, 5.0] {
            for a in [0.0, 0.01, 2.0] {
                let v = KickPotential::new(k, a, 0.7).unwrap();
                let grid = v.grid_with_cutoff(128).unwrap();
                for seed in 0..20 {
                    let phi = WaveFunction::random(grid, 32, seed);
                    let d = period_map(&phi, v, order)
                        .and_then(|p| p.max_difference(&split_step_oracle(&phi, v, order)?));
                    match d {
                        Ok(d) => worst = worst.max(d),
                        Err(e) => error = Some(e.to_string()),
                    }
                }
            }
        }
        let detail = match &error {
            Some(e) => format!("error: {e}"),
            None => format!("max coefficient difference {worst:.2e} (limit 1e-10)"),
        };
        checks.push(Check::new(
            error.is_none() && worst <= 1e-10,
            format!("oracle r={r} q={q}"),
            detail,
        ));
    }
    let grid = GridSpec::with_cutoff(64).unwrap();
    let mut worst = 0.0f64;
    for order in coprime_orders(32) {
        let table = GammaTable::new(order);
        for seed in 0..5 {
            let phi = WaveFunction::random(grid, 64, seed + 100 * order.q());
            let d = resonant_free_step(&phi, order)
                .max_difference(&gauss_sum_free_step(&phi, &table))
                .unwrap();
            worst = worst.max(d);
        }
    }
    checks.push(Check::new(
        worst <= 1e-12,
        "representation q<=32",
        format!("Gauss-sum vs phase free step, max difference {worst:.2e} (limit 1e-12)"),
    ));
    checks
}

fn zero_current(ic: InitialCondition, k: f64, a: f64, alpha: f64, q: u64, n: usize) -> Check {
    let name = format!("zero-current {ic} k={k} a={a} alpha={alpha} q={q} N={n}");
    let v = KickPotential::new(k, a, alpha).unwrap();
    let result = ic
        .build(ic.grid_for_run(&v, n))
        .and_then(|phi| check_zero_current(&phi, v, ResonanceOrder::new(1, q).unwrap(), n));
    match result {
        Ok(r) if r.is_inapplicable() => Check::new(
            false,
            name,
            format!("unexpectedly inapplicable: {:?}", r.outcome),
        ),
        Ok(r) => Check::new(
            r.passed(),
            name,
            format!(
                "max |<p>| {:.2e}, max parity residual {:.2e}",
                r.max_abs_p, r.max_asymmetry
            ),
        ),
        Err(e) => Check::new(false, name, format!("error: {e}")),
    }
}

/// Labelled initial profile in position space.
type Profile = (&'static str, fn(f64) -> Complex64);

pub fn symmetry_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    for q in [2, 3, 5] {
        for k in [1.0, 5.0, 10.0] {
            checks.push(zero_current(InitialCondition::Uniform, k, 0.0, 0.0, q, 200));
        }
    }
    checks.push(zero_current(
        InitialCondition::Uniform,
        5.0,
        0.5,
        0.0,
        3,
        200,
    ));
    checks.push(zero_current(
        InitialCondition::Uniform,
        5.0,
        0.5,
        std::f64::consts::PI,
        5,
        200,
    ));
    checks.push(zero_current(
        InitialCondition::Builtin(Builtin::Sin),
        3.0,
        0.0,
        0.0,
        5,
        100,
    ));

    let v = KickPotential::new(5.0, 2.0, std::f64::consts::FRAC_PI_4).unwrap();
    let phi = WaveFunction::uniform(v.grid_for_kicks(20));
    let order = ResonanceOrder::new(1, 3).unwrap();
    let inapplicable = check_zero_current(&phi, v, order, 20).map(|r| r.is_inapplicable());
    let p = ratchet::evolve(&phi, v, order, 20).map(|t| t.last().unwrap().observables.p_mean);
    checks.push(Check::info(
        "asymmetric potential",
        format!("k=5 a=2 alpha=pi/4 q=3: check inapplicable={inapplicable:?}, <p>_20 = {p:?}"),
    ));

    let kick = KickPotential::new(4.0, 0.0, 0.0).unwrap();
    let profile = |t: f64| 1.0 + 0.3 * t.cos();
    let mut outside = Vec::new();
    for q in [3u64, 4, 5] {
        let order = ResonanceOrder::new(1, q).unwrap();
        for l in -5i64..=5 {
            let name = format!("plane-wave L={l} q={q} N=100");
            let report = check_plane_wave_invariance(l, profile, kick, order, 100);
            if plane_wave_theorem_applies(l, order) {
                checks.push(match report {
                    Ok(r) => Check::new(
                        r.passed(),
                        name,
                        format!("max |<p> - L| {:.2e}", r.max_abs_p),
                    ),
                    Err(e) => Check::new(false, name, format!("error: {e}")),
                });
            } else if let Ok(r) = report {
                outside.push(format!("q={q} L={l}: {:.2e}", r.max_abs_p));
            }
        }
    }
    checks.push(Check::info(
        "plane-wave outside q | 4L",
        format!(
            "momentum drifts (theorem needs q | 4L): {}",
            outside.join(", ")
        ),
    ));

    let (mut inside_worst, mut outside_count) = (0.0f64, 0);
    for order in coprime_orders(16) {
        let table = GammaTable::new(order);
        let q = order.q() as i64;
        for l in -q..=q {
            let residual = gamma_phase_identity_residual(&table, l);
            if plane_wave_theorem_applies(l, order) {
                inside_worst = inside_worst.max(residual);
            } else if residual > PHASE_IDENTITY_TOLERANCE {
                outside_count += 1;
            }
        }
    }
    checks.push(Check::new(
        inside_worst <= PHASE_IDENTITY_TOLERANCE,
        "phase identity q<=16, q | 4L",
        format!("max residual {inside_worst:.2e}"),
    ));
    checks.push(Check::info(
        "phase identity q<=16, q does not divide 4L",
        format!("{outside_count} (r, q, L) combinations violate the identity"),
    ));

    let v = KickPotential::new(5.0, 0.0, 0.0).unwrap();
    let grid = v.grid_for_kicks(30);
    let profiles: [Profile; 3] = [
        ("1+0.5sin", |t: f64| {
            Complex64::new(1.0 + 0.5 * t.sin(), 0.0)
        }),
        ("fig3", |t: f64| Builtin::Fig3.sample(t)),
        ("(1+0.3sin+0.2cos2)e^{0.5i cos}", |t: f64| {
            Complex64::from_polar(1.0 + 0.3 * t.sin() + 0.2 * (2.0 * t).cos(), 0.5 * t.cos())
        }),
    ];
    for (label, f) in profiles {
        let name = format!("T=4pi growth {label}");
        let result =
            WaveFunction::from_position_fn(f, grid).and_then(|phi| check_t4pi_growth(&phi, v, 30));
        checks.push(match result {
            Ok(g) => Check::new(
                g.agrees(T4PI_RELATIVE_TOLERANCE),
                name,
                format!(
                    "slope {:.12e} vs closed form {:.12e}",
                    g.measured, g.closed_form
                ),
            ),
            Err(e) => Check::new(false, name, format!("error: {e}")),
        });
    }
    checks
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Gamma => gamma_suite(),
        Suite::Oracle => oracle_suite(),
        Suite::Symmetry => symmetry_suite(),
        Suite::All => [gamma_suite(), oracle_suite(), symmetry_suite()].concat(),
    }
}

/// Prints every check and fails with the number of failed checks.
pub fn cmd_verify(suite: Suite, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = run_suite(suite);
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    writeln!(out, "{passed} passed, {failed} failed")?;
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}
