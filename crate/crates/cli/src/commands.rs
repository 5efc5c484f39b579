//! `evolve`, `sweep`, `gamma` and `fig`.
//!
//! Every CSV starts with the run configuration as `# key=value` lines, then a
//! header row, then data. Reals are written as `{:.15e}`; a non-finite value
//! aborts the command.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ratchet::perturbation::{
    analytic_force_q3, asymptotic_force, in_small_a_regime, pair_sum, SMALL_A_LIMIT,
};
use ratchet::propagator::gamma_table;
use ratchet::{evolve, Builtin, InitialCondition, KickPotential, Trajectory, WaveFunction};
use rayon::prelude::*;

use crate::config::{KSpec, RunConfig, DEFAULT_N_KICKS};
use crate::error::CliError;

pub const EVOLVE_COLUMNS: &str = "N,p_mean,p_second,f_avg,norm,tail_mass";
pub const SWEEP_COLUMNS: &str = "k,f_numeric,f_perturbative,f_analytic_q3,f_asymptotic,regime";
pub const GAMMA_COLUMNS: &str = "n,re,im,abs";

pub fn real(v: f64) -> Result<String, CliError> {
    if v.is_finite() {
        Ok(format!("{v:.15e}"))
    } else {
        Err(ratchet::Error::NonFinite("csv output").into())
    }
}

fn optional(v: Option<f64>) -> Result<String, CliError> {
    v.map_or(Ok(String::new()), real)
}

fn write_config(out: &mut dyn Write, config: &RunConfig) -> Result<(), CliError> {
    for line in config.to_string().lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Initial state of a run at kick strength `k`, on the adaptive grid or on
/// the configured cutoff.
pub fn initial_state(
    config: &RunConfig,
    potential: &KickPotential,
) -> Result<WaveFunction, CliError> {
    let grid = match config.m_max_override {
        Some(m) => potential.grid_with_cutoff(m)?,
        None => config.initial.grid_for_run(potential, config.n_kicks),
    };
    Ok(config.initial.build(grid)?)
}

fn write_trajectory(out: &mut dyn Write, trajectory: &Trajectory) -> Result<(), CliError> {
    for rec in &trajectory.records {
        let o = &rec.observables;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            rec.kick,
            real(o.p_mean)?,
            real(o.p_second)?,
            optional(o.f_avg)?,
            real(o.norm)?,
            real(rec.tail_mass)?
        )?;
    }
    Ok(())
}

/// One row per kick, starting with the initial state at `N = 0`. An aborted
/// run still writes every completed kick before reporting the failure.
pub fn cmd_evolve(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let potential = config.potential(config.single_k()?);
    let initial = initial_state(config, &potential)?;
    write_config(out, config)?;
    writeln!(out, "{EVOLVE_COLUMNS}")?;
    match evolve(&initial, potential, config.order(), config.n_kicks) {
        Ok(trajectory) => write_trajectory(out, &trajectory),
        Err(aborted) => {
            write_trajectory(out, &aborted.trajectory)?;
            Err(aborted.into())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub f_numeric: f64,
    pub f_perturbative: f64,
    /// Present only for `q = 3`.
    pub f_analytic_q3: Option<f64>,
    pub f_asymptotic: f64,
    /// Whether `k·a` is small enough for the perturbative columns.
    pub in_regime: bool,
}

impl SweepRow {
    fn write(&self, out: &mut dyn Write) -> Result<(), CliError> {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            real(self.k)?,
            real(self.f_numeric)?,
            real(self.f_perturbative)?,
            optional(self.f_analytic_q3)?,
            real(self.f_asymptotic)?,
            if self.in_regime {
                "small_a"
            } else {
                "out_of_regime"
            }
        )?;
        Ok(())
    }
}

pub fn sweep_point(config: &RunConfig, k: f64) -> Result<SweepRow, CliError> {
    let potential = config.potential(k);
    let order = config.order();
    let initial = initial_state(config, &potential)?;
    let trajectory = evolve(&initial, potential, order, config.n_kicks)?;
    let f_numeric = trajectory
        .average_force()
        .expect("validated runs have at least one kick");
    Ok(SweepRow {
        k,
        f_numeric,
        f_perturbative: pair_sum(k, config.a, config.alpha, order)?,
        f_analytic_q3: (config.q == 3).then(|| analytic_force_q3(k, config.a, config.alpha)),
        f_asymptotic: asymptotic_force(k, config.a, config.alpha, order),
        in_regime: in_small_a_regime(k, config.a),
    })
}

/// Sweep rows in ascending `k`, computed on `jobs` threads. The result does
/// not depend on `jobs`.
pub fn run_sweep(
    config: &RunConfig,
    jobs: usize,
) -> Result<Vec<Result<SweepRow, CliError>>, CliError> {
    let ks = config.k_range()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::config(None, "jobs", e.to_string()))?;
    Ok(pool.install(|| ks.par_iter().map(|&k| sweep_point(config, k)).collect()))
}

/// Writes rows up to the first failing `k`, then reports that failure.
pub fn cmd_sweep(config: &RunConfig, jobs: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = run_sweep(config, jobs)?;
    if rows.iter().flatten().any(|r| !r.in_regime) {
        log::warn!(
            "perturbative columns are outside the small-a regime (k*a > {SMALL_A_LIMIT}) on some rows"
        );
    }
    write_config(out, config)?;
    writeln!(out, "{SWEEP_COLUMNS}")?;
    for row in rows {
        row?.write(out)?;
    }
    Ok(())
}

/// Gauss sums `γ_n` for `n = 0..q`, followed by a comment line with the
/// periodicity, reflection, sum and (odd `q`) magnitude residuals.
pub fn cmd_gamma(r: u64, q: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let order = ratchet::ResonanceOrder::new(r, q)
        .map_err(|e| CliError::config(None, "q", e.to_string()))?;
    let table = gamma_table(order);
    writeln!(out, "{GAMMA_COLUMNS}")?;
    for (n, g) in table.values().iter().enumerate() {
        writeln!(
            out,
            "{n},{},{},{}",
            real(g.re)?,
            real(g.im)?,
            real(g.norm())?
        )?;
    }
    let magnitude = if q % 2 == 1 {
        real(table.magnitude_residual())?
    } else {
        "n/a".to_string()
    };
    writeln!(
        out,
        "# residuals periodicity={} reflection={} sum={} magnitude={magnitude}",
        real(table.periodicity_residual())?,
        real(table.reflection_residual())?,
        real(table.sum_residual())?,
    )?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    One,
    OneInset,
    TwoA,
    TwoB,
    Three,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::One,
        FigureId::OneInset,
        FigureId::TwoA,
        FigureId::TwoB,
        FigureId::Three,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::One => "1",
            FigureId::OneInset => "1-inset",
            FigureId::TwoA => "2a",
            FigureId::TwoB => "2b",
            FigureId::Three => "3",
        }
    }

    /// The figure's run configuration.
    pub fn config(self) -> RunConfig {
        let sweep = |q, a, alpha, initial| RunConfig {
            r: 1,
            q,
            k: KSpec::Range {
                min: 0.0,
                max: 10.0,
                steps: 100,
            },
            a,
            alpha,
            n_kicks: DEFAULT_N_KICKS,
            initial,
            m_max_override: None,
            seed: None,
        };
        match self {
            FigureId::One => sweep(3, 2.0, FRAC_PI_4, InitialCondition::Uniform),
            FigureId::OneInset => RunConfig {
                k: KSpec::Single(5.0),
                n_kicks: 50,
                ..sweep(3, 0.01, FRAC_PI_4, InitialCondition::Uniform)
            },
            FigureId::TwoA => sweep(3, 0.01, FRAC_PI_3, InitialCondition::Uniform),
            FigureId::TwoB => sweep(5, 0.01, FRAC_PI_3, InitialCondition::Uniform),
            FigureId::Three => sweep(3, 0.01, FRAC_PI_3, InitialCondition::Builtin(Builtin::Fig3)),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                CliError::config(
                    None,
                    "id",
                    format!("unknown figure '{s}' (known: 1, 1-inset, 2a, 2b, 3)"),
                )
            })
    }
}

/// Runs the figure's configuration through `evolve` or `sweep`.
pub fn cmd_fig(
    id: FigureId,
    n_kicks: Option<usize>,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut config = id.config();
    if let Some(n) = n_kicks {
        config.n_kicks = n;
        config.validate()?;
    }
    match config.k {
        KSpec::Single(_) => cmd_evolve(&config, out),
        KSpec::Range { .. } => cmd_sweep(&config, jobs, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn data_rows(csv: &str) -> Vec<Vec<String>> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    fn evolve_config(k: f64, a: f64, initial: &str, n: usize) -> RunConfig {
        RunConfig::parse(&format!(
            "r=1\nq=3\nk={k}\na={a}\nalpha=pi/4\nn_kicks={n}\ninitial={initial}\n"
        ))
        .unwrap()
    }

    #[test]
    fn evolve_layout() {
        let csv = text(|b| cmd_evolve(&evolve_config(5.0, 0.01, "uniform", 5), b));
        let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(lines.next(), Some(EVOLVE_COLUMNS));
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0][0], "0");
        assert_eq!(rows[0][3], "");
        assert!(rows.iter().all(|r| r.len() == 6));
        assert!(csv.starts_with("# r=1\n# q=3\n# k=5\n"));
    }

    #[test]
    fn symmetric_evolve_has_no_current() {
        let csv = text(|b| cmd_evolve(&evolve_config(3.0, 0.0, "uniform", 20), b));
        for row in data_rows(&csv) {
            assert!(row[1].parse::<f64>().unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn plane_wave_evolve_keeps_momentum() {
        // q = 3 divides 4L for L = 3.
        let csv = text(|b| cmd_evolve(&evolve_config(2.0, 0.0, "plane:3", 20), b));
        for row in data_rows(&csv) {
            assert!((row[1].parse::<f64>().unwrap() - 3.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn evolve_abort_keeps_partial_output() {
        let mut config = evolve_config(5.0, 0.5, "uniform", 40);
        config.m_max_override = Some(40);
        let mut buf = Vec::new();
        let err = cmd_evolve(&config, &mut buf).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let rows = data_rows(&String::from_utf8(buf).unwrap());
        assert!(!rows.is_empty() && rows.len() < 41);
    }

    #[test]
    fn sweep_rows_do_not_depend_on_jobs() {
        let config = RunConfig::parse(
            "r=1\nq=3\nk_min=0\nk_max=3\nk_steps=6\na=0.01\nalpha=pi/3\nn_kicks=10\n",
        )
        .unwrap();
        let one = text(|b| cmd_sweep(&config, 1, b));
        let four = text(|b| cmd_sweep(&config, 4, b));
        assert_eq!(one, four);
        let rows = data_rows(&one);
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| !r[3].is_empty() && r[5] == "small_a"));
    }

    #[test]
    fn sweep_flags_regime_and_omits_q3_column() {
        let config =
            RunConfig::parse("r=2\nq=5\nk_min=0\nk_max=1\nk_steps=2\na=0.5\nalpha=1\nn_kicks=3\n")
                .unwrap();
        let rows = data_rows(&text(|b| cmd_sweep(&config, 2, b)));
        assert_eq!(rows[0][3], "");
        assert_eq!(rows[0][5], "small_a");
        assert_eq!(rows[1][5], "out_of_regime");
    }

    #[test]
    fn gamma_tables() {
        let csv = text(|b| cmd_gamma(1, 3, b));
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!((r[3].parse::<f64>().unwrap() - 3f64.sqrt()).abs() < 1e-12);
        }
        let rows = data_rows(&text(|b| cmd_gamma(1, 2, b)));
        assert!(rows[0][3].parse::<f64>().unwrap() < 1e-12);
        assert!((rows[1][3].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
        let csv = text(|b| cmd_gamma(1, 1, b));
        assert_eq!(data_rows(&csv).len(), 1);
        assert!(csv.contains("magnitude="));
        assert!(cmd_gamma(2, 4, &mut Vec::new()).is_err());
    }

    #[test]
    fn figure_ids() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
            id.config().validate().unwrap();
        }
        assert!("4".parse::<FigureId>().is_err());
    }

    #[test]
    fn non_finite_values_are_rejected() {
        assert!(real(f64::NAN).is_err());
        assert!(real(f64::INFINITY).is_err());
        assert_eq!(real(0.5).unwrap(), "5.000000000000000e-1");
    }
}
