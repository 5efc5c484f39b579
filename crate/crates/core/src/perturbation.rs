//! Small-`a` theory of the average effective force.
//!
//! To first order in the second-harmonic strength, the leading correlation
//! integral splits into a sum over ordered pairs `(m, n)` of Gauss-sum
//! weights `γ*_m γ_n` times Bessel functions of `Ω_{m,n}·k`, where `Ω_{m,n}`
//! is the chord between the points `2πm/q` and `2πn/q` on the unit circle.
//! Each pair contributes two pieces: the fundamental kick coupled to the
//! second-harmonic phase difference, and the second-harmonic force itself.
//! Their relative weights are fixed so that `q = 3` reproduces the closed form
//! in [`analytic_force_q3`] exactly; the same weights are used for every `q`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::propagator::{GammaTable, ResonanceOrder};

/// Perturbative curves are flagged beyond this value of `k·a`.
pub const SMALL_A_LIMIT: f64 = 0.3;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Weight of the kick-coupling piece.
pub fn kick_coupling_weight() -> f64 {
    (SQRT3 - 1.0) / 3.0
}

/// Weight of the second-harmonic force piece.
pub fn harmonic_weight() -> f64 {
    2.0 / 3.0
}

pub fn in_small_a_regime(k: f64, a: f64) -> bool {
    k * a <= SMALL_A_LIMIT
}

/// Chord geometry of the pair `(m, n)` at order `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub m: usize,
    pub n: usize,
    /// `cos(2πn/q) − cos(2πm/q)`
    pub mu: f64,
    /// `sin(2πn/q) − sin(2πm/q)`
    pub nu: f64,
    /// `Ω = √(μ² + ν²)`, in `[0, 2]`.
    pub chord: f64,
    /// `ω = atan2(ν, μ)` in `(−π, π]`; zero when `m = n`.
    pub angle: f64,
}

pub fn pair_geometry(m: usize, n: usize, q: usize) -> PairGeometry {
    assert!(m < q && n < q, "pair indices must lie in [0, q)");
    if m == n {
        return PairGeometry {
            m,
            n,
            mu: 0.0,
            nu: 0.0,
            chord: 0.0,
            angle: 0.0,
        };
    }
    let (tm, tn) = (TAU * m as f64 / q as f64, TAU * n as f64 / q as f64);
    let mu = tn.cos() - tm.cos();
    let nu = tn.sin() - tm.sin();
    let mut angle = nu.atan2(mu);
    if angle <= -PI {
        angle = PI;
    }
    PairGeometry {
        m,
        n,
        mu,
        nu,
        chord: mu.hypot(nu),
        angle,
    }
}

/// Real coefficients of `k·J₁(Ωk)` and `J₂(Ωk)` in one pair term, before the
/// `k·a·γ*_m γ_n / q²` prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairCoefficients {
    k_j1: f64,
    j2: f64,
}

fn pair_coefficients(geom: &PairGeometry, alpha: f64, q: usize) -> PairCoefficients {
    let w = geom.angle;
    let phase = |j: usize| alpha + 2.0 * TAU * j as f64 / q as f64;
    let (pm, pn) = (phase(geom.m), phase(geom.n));
    let d3 = (pn - 3.0 * w).sin() - (pm - 3.0 * w).sin();
    let d1 = (pn - w).sin() - (pm - w).sin();
    let (wa, wb) = (kick_coupling_weight(), harmonic_weight());
    // Kick coupling: ½[k·J₃·d3 + k·J₁·d1] with k·J₃ = 4J₂/Ω − k·J₁.
    // Harmonic force: −2 J₂ sin(α − 2ω).
    PairCoefficients {
        k_j1: 0.5 * wa * (d1 - d3),
        j2: 2.0 * wa * d3 / geom.chord - 2.0 * wb * (alpha - 2.0 * w).sin(),
    }
}

/// Contribution of the ordered pair `(m, n)` to the per-kick momentum gain.
pub fn l_term(m: usize, n: usize, k: f64, a: f64, alpha: f64, table: &GammaTable) -> Complex64 {
    let q = table.order().q() as usize;
    let geom = pair_geometry(m, n, q);
    if geom.chord == 0.0 || a == 0.0 || k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let coeffs = pair_coefficients(&geom, alpha, q);
    let x = geom.chord * k;
    let bracket = coeffs.k_j1 * k * bessel_j(1, x) + coeffs.j2 * bessel_j(2, x);
    let weight = table.get(m as i64).conj() * table.get(n as i64);
    weight * (k * a * bracket / (q * q) as f64)
}

/// Per-kick force `Re Σ_{m,n} L_{m,n}`. Logs a warning when `k·a` is
/// outside the small-`a` regime.
pub fn perturbative_force(k: f64, a: f64, alpha: f64, order: ResonanceOrder) -> Result<f64> {
    if !in_small_a_regime(k, a) {
        log::warn!(
            "perturbative force evaluated outside the small-a regime (k*a = {})",
            k * a
        );
    }
    pair_sum(k, a, alpha, order)
}

/// [`perturbative_force`] without the regime warning, for callers that flag
/// the regime themselves.
pub fn pair_sum(k: f64, a: f64, alpha: f64, order: ResonanceOrder) -> Result<f64> {
    let table = GammaTable::new(order);
    let q = order.q() as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for m in 0..q {
        for n in 0..q {
            let term = l_term(m, n, k, a, alpha, &table);
            scale += term.norm();
            sum += term;
        }
    }
    let floor = 1e-13 * scale + 1e-16 * k * a * (1.0 + k);
    if sum.im.abs() > 1e-10 * sum.re.abs() + floor {
        return Err(Error::ImaginaryResidual {
            real: sum.re,
            imag: sum.im,
        });
    }
    Ok(sum.re)
}

/// Closed form for `r/q = 1/3`:
/// `k a sin α [(1/√3 − 1) k J₁(√3k) + (2/3)(1 + √3) J₂(√3k)]`.
pub fn analytic_force_q3(k: f64, a: f64, alpha: f64) -> f64 {
    k * a * alpha.sin() * q3_bracket(k)
}

/// The `a`- and `α`-independent factor of [`analytic_force_q3`].
pub fn q3_bracket(k: f64) -> f64 {
    let x = SQRT3 * k;
    (1.0 / SQRT3 - 1.0) * k * bessel_j(1, x) + (2.0 / 3.0) * (1.0 + SQRT3) * bessel_j(2, x)
}

const REVERSAL_SCAN_STEP: f64 = 0.01;
const REVERSAL_TOLERANCE: f64 = 1e-8;

/// Kick strengths in `(0, k_max]` where the `q = 3` force changes sign.
pub fn reversal_points_q3(a: f64, alpha: f64, k_max: f64) -> Result<Vec<f64>> {
    if !(a > 0.0) || alpha.sin().abs() < 1e-15 || !(k_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reversals need a > 0, sin(alpha) != 0, k_max > 0 (a={a}, alpha={alpha}, k_max={k_max})"
        )));
    }
    let steps = (k_max / REVERSAL_SCAN_STEP).ceil() as usize;
    let mut roots = Vec::new();
    let mut lo = REVERSAL_SCAN_STEP.min(k_max);
    let mut f_lo = q3_bracket(lo);
    for i in 2..=steps {
        let hi = (i as f64 * REVERSAL_SCAN_STEP).min(k_max);
        let f_hi = q3_bracket(hi);
        if f_hi == 0.0 {
            roots.push(hi);
        } else if f_lo * f_hi < 0.0 {
            roots.push(bisect(q3_bracket, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(roots)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > REVERSAL_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Large-`k` amplitudes of one chord class:
/// `A (k³/Ω)^{1/2} cos(Ωk − 3π/4) + B (k/Ω)^{1/2} cos(Ωk − 5π/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTerm {
    pub chord: f64,
    pub amplitude_a: f64,
    pub amplitude_b: f64,
}

impl AsymptoticTerm {
    pub fn eval(&self, k: f64) -> f64 {
        let x = self.chord * k;
        self.amplitude_a * (k * k * k / self.chord).sqrt() * (x - 3.0 * FRAC_PI_4).cos()
            + self.amplitude_b * (k / self.chord).sqrt() * (x - 5.0 * FRAC_PI_4).cos()
    }
}

/// The `A`, `B` constants of every pair with `Ω > 0`, obtained by replacing
/// `J₁`, `J₂` in each pair term with their large-argument forms.
pub fn asymptotic_terms(a: f64, alpha: f64, order: ResonanceOrder) -> Vec<AsymptoticTerm> {
    let table = GammaTable::new(order);
    let q = order.q() as usize;
    let lead = (2.0 / PI).sqrt();
    let mut terms = Vec::new();
    for m in 0..q {
        for n in 0..q {
            let geom = pair_geometry(m, n, q);
            if geom.chord == 0.0 {
                continue;
            }
            let c = pair_coefficients(&geom, alpha, q);
            let weight = (table.get(m as i64).conj() * table.get(n as i64)).re;
            let scale = weight * a * lead / (q * q) as f64;
            terms.push(AsymptoticTerm {
                chord: geom.chord,
                amplitude_a: scale * c.k_j1,
                amplitude_b: scale * c.j2,
            });
        }
    }
    terms
}

pub fn asymptotic_force(k: f64, a: f64, alpha: f64, order: ResonanceOrder) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    asymptotic_terms(a, alpha, order)
        .iter()
        .map(|t| t.eval(k))
        .sum()
}

/// How a force curve was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForceMethod {
    Numeric,
    Perturbative,
    AnalyticQ3,
    Asymptotic,
}

/// `⟨f⟩` sampled on an increasing grid of kick strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceCurve {
    k: Vec<f64>,
    f: Vec<f64>,
    method: ForceMethod,
}

impl ForceCurve {
    pub fn new(k: Vec<f64>, f: Vec<f64>, method: ForceMethod) -> Result<Self> {
        if k.len() != f.len() {
            return Err(Error::InvalidParameter(format!(
                "{} kick strengths but {} force values",
                k.len(),
                f.len()
            )));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "kick strengths must increase strictly".into(),
            ));
        }
        Ok(Self { k, f, method })
    }

    /// Evaluates `force` on every grid point.
    pub fn tabulate(k: Vec<f64>, method: ForceMethod, force: impl Fn(f64) -> f64) -> Result<Self> {
        let f = k.iter().map(|&k| force(k)).collect();
        Self::new(k, f, method)
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn method(&self) -> ForceMethod {
        self.method
    }

    pub fn max_abs(&self) -> f64 {
        self.f.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}
