//! Acceptance criteria, one test each. Every test writes a single
//! `ACCEPTANCE <id> PASS|FAIL <title>: <measurements>` line to stderr (outside
//! the test harness capture) before asserting, so a full run lists every
//! criterion with its numbers.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use ratchet::analysis::{linear_fit, pearson, rms, sign_changes, two_term_fit};
use ratchet::perturbation::{analytic_force_q3, reversal_points_q3};
use ratchet::propagator::{gauss_sum_free_step, resonant_free_step};
use ratchet::symmetry::{check_t4pi_growth, gamma_phase_identity_residual};
use ratchet::{
    evolve, period_map, split_step_oracle, Builtin, GammaTable, GridSpec, InitialCondition,
    KickPotential, ResonanceOrder, WaveFunction,
};
use ratchet_cli::commands::{run_sweep, SweepRow};
use ratchet_cli::{FigureId, RunConfig};

fn report(id: u32, title: &str, passed: bool, detail: String) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "ACCEPTANCE {id:>2} {tag} {title}: {detail}");
    assert!(passed, "criterion {id} ({title}) failed: {detail}");
}

fn order(r: u64, q: u64) -> ResonanceOrder {
    ResonanceOrder::new(r, q).unwrap()
}

fn coprime_orders(q_max: u64) -> Vec<ResonanceOrder> {
    (1..=q_max)
        .flat_map(|q| (1..=q).filter_map(move |r| ResonanceOrder::new(r, q).ok()))
        .collect()
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep(config: &RunConfig) -> Vec<SweepRow> {
    run_sweep(config, jobs())
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn criterion_01_oracle_equivalence() {
    const LIMIT: f64 = 1e-10;
    const TIME: Duration = Duration::from_secs(10);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (r, q) in [(1, 2), (1, 3), (2, 3), (1, 5), (3, 5)] {
        for k in [0.5, 5.0] {
            for a in [0.0, 0.01, 2.0] {
                let v = KickPotential::new(k, a, FRAC_PI_4).unwrap();
                let grid = v.grid_with_cutoff(128).unwrap();
                for seed in 0..20 {
                    let phi = WaveFunction::random(grid, 32, seed);
                    let exact = period_map(&phi, v, order(r, q)).unwrap();
                    let oracle = split_step_oracle(&phi, v, order(r, q)).unwrap();
                    worst = worst.max(exact.max_difference(&oracle).unwrap());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "oracle equivalence",
        worst <= LIMIT && elapsed < TIME,
        format!(
            "max |c - c_oracle| = {worst:.2e} (limit {LIMIT:.0e}), {:.2} s (limit 10 s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_representation_identity() {
    const LIMIT: f64 = 1e-12;
    const TIME: Duration = Duration::from_secs(10);
    let start = Instant::now();
    let grid = GridSpec::with_cutoff(64).unwrap();
    let mut worst = 0.0f64;
    let orders = coprime_orders(32);
    for &o in &orders {
        let table = GammaTable::new(o);
        for seed in 0..5 {
            let phi = WaveFunction::random(grid, 64, 1000 * o.q() + 10 * o.r() + seed);
            let d = resonant_free_step(&phi, o)
                .max_difference(&gauss_sum_free_step(&phi, &table))
                .unwrap();
            worst = worst.max(d);
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "representation identity",
        worst <= LIMIT && elapsed < TIME,
        format!(
            "{} orders x 5 states, max difference {worst:.2e} (limit {LIMIT:.0e}), {:.2} s",
            orders.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_gamma_identities() {
    const SHIFT_LIMIT: f64 = 1e-12;
    const SUM_LIMIT: f64 = 1e-10;
    const MAGNITUDE_LIMIT: f64 = 1e-10;
    let (mut per, mut refl, mut sum, mut mag) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let orders = coprime_orders(32);
    for &o in &orders {
        let t = GammaTable::new(o);
        per = per.max(t.periodicity_residual());
        refl = refl.max(t.reflection_residual());
        sum = sum.max(t.sum_residual());
        if o.q() % 2 == 1 {
            mag = mag.max(t.magnitude_residual());
        }
    }
    report(
        3,
        "gamma identities",
        per <= SHIFT_LIMIT && refl <= SHIFT_LIMIT && sum <= SUM_LIMIT && mag <= MAGNITUDE_LIMIT,
        format!(
            "{} orders: periodicity {per:.1e}, reflection {refl:.1e} (limit 1e-12), sum {sum:.1e}, |gamma| - sqrt(q) {mag:.1e} (limit 1e-10)",
            orders.len()
        ),
    );
}

#[test]
fn criterion_04_zero_current() {
    const LIMIT: f64 = 1e-10;
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (a, alpha) in [(0.0, FRAC_PI_4), (0.5, 0.0)] {
        for k in [1.0, 5.0, 10.0] {
            for q in [2, 3, 5] {
                let v = KickPotential::new(k, a, alpha).unwrap();
                let phi = WaveFunction::uniform(v.grid_for_kicks(200));
                let t = evolve(&phi, v, order(1, q), 200).unwrap();
                worst = t.p_means().iter().fold(worst, |m, p| m.max(p.abs()));
                runs += 1;
            }
        }
    }
    report(
        4,
        "zero-current theorem",
        worst <= LIMIT,
        format!("{runs} runs of 200 kicks, max |<p>| = {worst:.2e} (limit {LIMIT:.0e})"),
    );
}

#[test]
fn criterion_05_plane_wave_invariance() {
    const MOMENTUM_LIMIT: f64 = 1e-9;
    const IDENTITY_LIMIT: f64 = 1e-12;
    let v = KickPotential::new(4.0, 0.0, 0.0).unwrap();
    let mut worst = 0.0f64;
    let mut failing = Vec::new();
    for q in [3, 5] {
        for l in -5i64..=5 {
            let grid = v
                .grid_with_cutoff(v.grid_for_kicks(100).m_max() + 5)
                .unwrap();
            let phi = WaveFunction::from_position_fn(
                |t| Complex64::from_polar(1.0 + 0.3 * t.cos(), l as f64 * t),
                grid,
            )
            .unwrap();
            let t = evolve(&phi, v, order(1, q), 100).unwrap();
            let drift = t
                .p_means()
                .iter()
                .fold(0.0f64, |m, p| m.max((p - l as f64).abs()));
            if drift > MOMENTUM_LIMIT {
                failing.push(format!("q={q},L={l}"));
            }
            worst = worst.max(drift);
        }
    }
    let mut identity_worst = 0.0f64;
    for o in coprime_orders(16) {
        let table = GammaTable::new(o);
        let q = o.q() as i64;
        for l in -q..=q {
            identity_worst = identity_worst.max(gamma_phase_identity_residual(&table, l));
        }
    }
    report(
        5,
        "plane-wave invariance",
        worst <= MOMENTUM_LIMIT && identity_worst <= IDENTITY_LIMIT,
        format!(
            "max |<p> - L| = {worst:.2e} (limit {MOMENTUM_LIMIT:.0e}), {} of 22 (q, L) drift [{}]; phase identity max residual {identity_worst:.2e} (limit {IDENTITY_LIMIT:.0e}); exact only when q | 4L",
            failing.len(),
            failing.join(" ")
        ),
    );
}

#[test]
fn criterion_06_linear_growth() {
    const RESIDUAL_LIMIT: f64 = 0.05;
    const SLOPE_LIMIT: f64 = 0.15;
    let v = KickPotential::new(5.0, 0.01, FRAC_PI_4).unwrap();
    let phi = WaveFunction::uniform(v.grid_for_kicks(50));
    let t = evolve(&phi, v, order(1, 3), 50).unwrap();
    let p = t.p_means();
    let fit = linear_fit(&t.kicks(), &p);
    let scale = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let residual = fit.rms_residual / scale;
    let expected = analytic_force_q3(5.0, 0.01, FRAC_PI_4);
    let slope_dev = (fit.slope - expected).abs() / expected.abs();
    report(
        6,
        "linear growth",
        residual <= RESIDUAL_LIMIT && slope_dev <= SLOPE_LIMIT,
        format!(
            "rms residual / max|<p>| = {residual:.3} (limit 0.05); slope {:.5e} vs closed form {expected:.5e}, deviation {slope_dev:.3} (limit 0.15)",
            fit.slope
        ),
    );
}

#[test]
fn criterion_07_fig2a_reproduction() {
    const RMS_LIMIT: f64 = 0.15;
    const ZERO_WINDOW: f64 = 0.3;
    const TIME: Duration = Duration::from_secs(120);
    let start = Instant::now();
    let rows = sweep(&FigureId::TwoA.config());
    let elapsed = start.elapsed();
    let k: Vec<f64> = rows.iter().map(|r| r.k).collect();
    let numeric: Vec<f64> = rows.iter().map(|r| r.f_numeric).collect();
    let analytic: Vec<f64> = rows.iter().map(|r| r.f_analytic_q3.unwrap()).collect();
    let peak = analytic.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rel_rms = rms(numeric.iter().zip(&analytic).map(|(n, a)| n - a)) / peak;
    let zeros = reversal_points_q3(0.01, FRAC_PI_3, 10.0).unwrap();
    let numeric_zeros = sign_changes(&k, &numeric);
    let gaps: Vec<f64> = zeros
        .iter()
        .map(|z| {
            numeric_zeros
                .iter()
                .map(|n| (n - z).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let worst_gap = gaps.iter().cloned().fold(0.0f64, f64::max);
    report(
        7,
        "Fig. 2(a) reproduction",
        rel_rms <= RMS_LIMIT && worst_gap <= ZERO_WINDOW && elapsed < TIME,
        format!(
            "rms / max|f| = {rel_rms:.3} (limit 0.15); reversals {zeros:.3?} matched by {numeric_zeros:.3?}, worst gap {worst_gap:.3} (limit 0.3); {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_fig2b_reproduction() {
    const MASK_FRACTION: f64 = 0.1;
    const AGREEMENT_LIMIT: f64 = 0.8;
    let rows = sweep(&FigureId::TwoB.config());
    let envelope = rows
        .iter()
        .fold(0.0f64, |m, r| m.max(r.f_perturbative.abs()));
    let masked: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.f_perturbative.abs() > MASK_FRACTION * envelope)
        .collect();
    let agree = masked
        .iter()
        .filter(|r| r.f_numeric.signum() == r.f_perturbative.signum())
        .count();
    let fraction = agree as f64 / masked.len() as f64;
    report(
        8,
        "Fig. 2(b) reproduction",
        fraction >= AGREEMENT_LIMIT,
        format!(
            "sign agreement {agree}/{} = {fraction:.3} on points with |f_perturbative| > 10% of max (limit 0.8)",
            masked.len()
        ),
    );
}

#[test]
fn criterion_09_peak_scaling() {
    const RESIDUAL_LIMIT: f64 = 0.05;
    let ks: Vec<f64> = (0..=35_000).map(|i| 5.0 + 0.001 * i as f64).collect();
    let f: Vec<f64> = ks
        .iter()
        .map(|&k| analytic_force_q3(k, 0.01, FRAC_PI_3))
        .collect();
    let peaks = ratchet::analysis::peak_indices(&f);
    let pk: Vec<f64> = peaks.iter().map(|&i| ks[i]).collect();
    let pf: Vec<f64> = peaks.iter().map(|&i| f[i].abs()).collect();
    let b15: Vec<f64> = pk.iter().map(|k| k.powf(1.5)).collect();
    let b05: Vec<f64> = pk.iter().map(|k| k.sqrt()).collect();
    let [c15, c05] = two_term_fit([&b15, &b05], &pf);
    let fitted: Vec<f64> = b15
        .iter()
        .zip(&b05)
        .map(|(x, y)| c15 * x + c05 * y)
        .collect();
    let residual = rms(fitted.iter().zip(&pf).map(|(a, b)| a - b)) / rms(pf.iter().cloned());
    let log_k: Vec<f64> = pk.iter().map(|k| k.ln()).collect();
    let reduced: Vec<f64> = pf
        .iter()
        .zip(&b05)
        .map(|(p, b)| (p - c05 * b).abs().ln())
        .collect();
    let exponent = linear_fit(&log_k, &reduced).slope;
    report(
        9,
        "peak scaling",
        residual <= RESIDUAL_LIMIT,
        format!(
            "{} peaks in [5, 40]: |peak| = {c15:.3e} k^1.5 + {c05:.3e} k^0.5, rms relative residual {residual:.4} (limit 0.05); log-log exponent after removing k^0.5 term {exponent:.3}",
            peaks.len()
        ),
    );
}

#[test]
fn criterion_10_directionality_saturation() {
    const PLATEAU_CHANGE: f64 = 0.05;
    const PLATEAU_FROM: usize = 30;
    const HORIZON: usize = 60;
    let v = KickPotential::new(5.0, 2.0, FRAC_PI_4).unwrap();
    let mut ratios = Vec::new();
    let phi = WaveFunction::uniform(v.grid_for_kicks(HORIZON));
    ratchet::evolve_inspect(&phi, v, order(1, 3), HORIZON, |n, s| {
        if n > 0 {
            ratios.push(s.directionality_ratio().unwrap());
        }
    })
    .unwrap();
    // ratios[i] belongs to N = i + 1.
    let settled = (PLATEAU_FROM..HORIZON)
        .map(|n| ((ratios[n] - ratios[n - 1]) / ratios[n - 1]).abs())
        .fold(0.0f64, f64::max);
    let first = (2..HORIZON)
        .find(|&n| {
            ((n - 1)..HORIZON)
                .all(|m| ((ratios[m] - ratios[m - 1]) / ratios[m - 1]).abs() <= PLATEAU_CHANGE)
        })
        .map(|i| i + 1);
    let plateau =
        ratios[PLATEAU_FROM - 1..].iter().sum::<f64>() / (HORIZON - PLATEAU_FROM + 1) as f64;
    report(
        10,
        "directionality saturation",
        settled <= PLATEAU_CHANGE,
        format!(
            "max successive change for N in [30, 60] {settled:.4} (limit 0.05), settled from N = {first:?}; plateau {plateau:.4} (reported only: 0.18 +- 0.05 is {})",
            if (plateau - 0.18).abs() <= 0.05 { "met" } else { "not met" }
        ),
    );
}

#[test]
fn criterion_11_t4pi_closed_form() {
    const LIMIT: f64 = 1e-8;
    let v = KickPotential::new(5.0, 0.0, 0.0).unwrap();
    let grid = v.grid_for_kicks(40);
    let profiles: [fn(f64) -> Complex64; 3] = [
        |t: f64| Complex64::new(1.0 + 0.5 * t.sin(), 0.0),
        |t: f64| Builtin::Fig3.sample(t),
        |t: f64| Complex64::from_polar(1.0 + 0.3 * t.sin() + 0.2 * (2.0 * t).cos(), 0.5 * t.cos()),
    ];
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    for f in profiles {
        let phi = WaveFunction::from_position_fn(f, grid).unwrap();
        let g = check_t4pi_growth(&phi, v, 40).unwrap();
        worst = worst.max(g.relative_deviation());
        details.push(format!("{:.10e} vs {:.10e}", g.measured, g.closed_form));
    }
    report(
        11,
        "T = 4pi closed form",
        worst <= LIMIT,
        format!(
            "slopes [{}], worst relative deviation {worst:.2e} (limit 1e-8)",
            details.join("; ")
        ),
    );
}

#[test]
fn criterion_12_fig3_reproduction() {
    const CORRELATION_LIMIT: f64 = 0.8;
    let full_config = FigureId::Three.config();
    assert_eq!(
        full_config.initial,
        InitialCondition::Builtin(Builtin::Fig3)
    );
    let baseline_config = RunConfig {
        a: 0.0,
        ..full_config.clone()
    };
    let full = sweep(&full_config);
    let baseline = sweep(&baseline_config);
    let k: Vec<f64> = full.iter().map(|r| r.k).collect();
    let oscillating: Vec<f64> = full
        .iter()
        .zip(&baseline)
        .map(|(f, b)| f.f_numeric - b.f_numeric)
        .collect();
    let theory: Vec<f64> = full.iter().map(|r| r.f_perturbative).collect();
    let r = pearson(&oscillating, &theory);
    let offset = baseline
        .iter()
        .fold(0.0f64, |m, b| m.max(b.f_numeric.abs()));
    let swings = sign_changes(&k, &oscillating).len();
    report(
        12,
        "Fig. 3 reproduction",
        r >= CORRELATION_LIMIT && offset > 1e-6 && swings >= 2,
        format!(
            "Pearson r(full - baseline, perturbative) = {r:.3} (limit 0.8); max |baseline| {offset:.3e} (nonzero offset); {swings} sign changes of the oscillating part"
        ),
    );
}

#[test]
fn criterion_13_determinism() {
    let bin = env!("CARGO_BIN_EXE_ratchet");
    let mut mismatched = Vec::new();
    for id in FigureId::ALL {
        let run = || {
            let out = Command::new(bin).args(["fig", id.name()]).output().unwrap();
            assert!(
                out.status.success(),
                "fig {id}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let (first, second) = (run(), run());
        if first != second || first.is_empty() {
            mismatched.push(id.name());
        }
    }
    report(
        13,
        "determinism",
        mismatched.is_empty(),
        format!("5 figures run twice, mismatched: {mismatched:?}"),
    );
}
