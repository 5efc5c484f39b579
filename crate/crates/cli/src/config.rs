//! Run configuration: a flat `key=value` text format with `#` comments.
//!
//! ```text
//! r=1
//! q=3
//! k_min=0
//! k_max=10
//! k_steps=100
//! a=0.01
//! alpha=pi/3
//! n_kicks=100
//! initial=uniform
//! ```
//!
//! `alpha` also accepts multiples of `pi` such as `-pi/4` or `2*pi/3`.
//! Serialization writes every real with Rust's shortest round-trip form, so
//! parsing the output reproduces the configuration exactly.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use ratchet::{InitialCondition, KickPotential, ResonanceOrder};

use crate::error::CliError;

pub const DEFAULT_N_KICKS: usize = 100;

/// Kick strengths: one value, or the half-open grid `(k_min, k_max]` with
/// `k_i = k_min + i·(k_max − k_min)/k_steps` for `i = 1..=k_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSpec {
    Single(f64),
    Range { min: f64, max: f64, steps: usize },
}

impl KSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            KSpec::Single(k) => vec![k],
            KSpec::Range { min, max, steps } => {
                let dk = (max - min) / steps as f64;
                (1..=steps).map(|i| min + i as f64 * dk).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub r: u64,
    pub q: u64,
    pub k: KSpec,
    pub a: f64,
    pub alpha: f64,
    pub n_kicks: usize,
    pub initial: InitialCondition,
    pub m_max_override: Option<usize>,
    /// Reserved; every run is deterministic.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn order(&self) -> ResonanceOrder {
        ResonanceOrder::new(self.r, self.q).expect("validated on construction")
    }

    pub fn potential(&self, k: f64) -> KickPotential {
        KickPotential::new(k, self.a, self.alpha).expect("validated on construction")
    }

    pub fn single_k(&self) -> Result<f64, CliError> {
        match self.k {
            KSpec::Single(k) => Ok(k),
            KSpec::Range { .. } => Err(CliError::config(
                None,
                "k",
                "this command needs a single k, not a range",
            )),
        }
    }

    pub fn k_range(&self) -> Result<Vec<f64>, CliError> {
        match self.k {
            KSpec::Range { .. } => Ok(self.k.values()),
            KSpec::Single(_) => Err(CliError::config(
                None,
                "k",
                "this command needs k_min, k_max and k_steps",
            )),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        ResonanceOrder::new(self.r, self.q)
            .map_err(|e| CliError::config(None, "q", e.to_string()))?;
        for k in self.k.values() {
            KickPotential::new(k, self.a, self.alpha)
                .map_err(|e| CliError::config(None, "k", e.to_string()))?;
        }
        if let KSpec::Range { min, max, steps } = self.k {
            if !(min < max) {
                return Err(CliError::config(
                    None,
                    "k_min",
                    format!("k_min={min} must be below k_max={max}"),
                ));
            }
            if steps < 2 {
                return Err(CliError::config(None, "k_steps", "need at least 2 steps"));
            }
        }
        if self.n_kicks < 1 {
            return Err(CliError::config(None, "n_kicks", "need at least one kick"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut seen = HashSet::new();
        let mut fields = Fields::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::config(Some(line), content, "expected key=value"));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::config(Some(line), key, "duplicate key"));
            }
            fields
                .set(key, value)
                .map_err(|msg| CliError::config(Some(line), key, msg))?;
        }
        let config = fields.finish()?;
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "r={}", self.r)?;
        writeln!(f, "q={}", self.q)?;
        match self.k {
            KSpec::Single(k) => writeln!(f, "k={k}")?,
            KSpec::Range { min, max, steps } => {
                writeln!(f, "k_min={min}")?;
                writeln!(f, "k_max={max}")?;
                writeln!(f, "k_steps={steps}")?;
            }
        }
        writeln!(f, "a={}", self.a)?;
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "n_kicks={}", self.n_kicks)?;
        writeln!(f, "initial={}", self.initial)?;
        if let Some(m) = self.m_max_override {
            writeln!(f, "m_max={m}")?;
        }
        if let Some(s) = self.seed {
            writeln!(f, "seed={s}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Fields {
    r: Option<u64>,
    q: Option<u64>,
    k: Option<f64>,
    k_min: Option<f64>,
    k_max: Option<f64>,
    k_steps: Option<usize>,
    a: Option<f64>,
    alpha: Option<f64>,
    n_kicks: Option<usize>,
    initial: Option<InitialCondition>,
    m_max: Option<usize>,
    seed: Option<u64>,
}

fn number<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse '{value}'"))
}

fn real(value: &str) -> Result<f64, String> {
    let v: f64 = number(value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{value}' is not finite"))
    }
}

/// A real number or a multiple of `pi`: `pi`, `-pi/4`, `2*pi/3`, `0.5*pi`.
pub fn parse_angle(value: &str) -> Result<f64, String> {
    let compact: String = value
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let Some(pos) = compact.find("pi") else {
        return real(&compact);
    };
    let (head, tail) = (&compact[..pos], &compact[pos + 2..]);
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => real(
            h.strip_suffix('*')
                .ok_or_else(|| format!("cannot parse '{value}'"))?,
        )?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => real(
            t.strip_prefix('/')
                .ok_or_else(|| format!("cannot parse '{value}'"))?,
        )?,
    };
    if divisor == 0.0 {
        return Err(format!("division by zero in '{value}'"));
    }
    Ok(factor * PI / divisor)
}

impl Fields {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "r" => self.r = Some(number(value)?),
            "q" => self.q = Some(number(value)?),
            "k" => self.k = Some(real(value)?),
            "k_min" => self.k_min = Some(real(value)?),
            "k_max" => self.k_max = Some(real(value)?),
            "k_steps" => self.k_steps = Some(number(value)?),
            "a" => self.a = Some(real(value)?),
            "alpha" => self.alpha = Some(parse_angle(value)?),
            "n_kicks" => self.n_kicks = Some(number(value)?),
            "initial" => {
                self.initial = Some(value.parse().map_err(|e: ratchet::Error| e.to_string())?)
            }
            "m_max" => self.m_max = Some(number(value)?),
            "seed" => self.seed = Some(number(value)?),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, CliError> {
        let missing = |field: &str| CliError::config(None, field, "missing");
        let k = match (self.k, self.k_min, self.k_max, self.k_steps) {
            (Some(k), None, None, None) => KSpec::Single(k),
            (None, Some(min), Some(max), Some(steps)) => KSpec::Range { min, max, steps },
            (None, None, None, None) => return Err(missing("k")),
            _ => {
                return Err(CliError::config(
                    None,
                    "k",
                    "give either k, or all of k_min, k_max and k_steps",
                ))
            }
        };
        Ok(RunConfig {
            r: self.r.ok_or_else(|| missing("r"))?,
            q: self.q.ok_or_else(|| missing("q"))?,
            k,
            a: self.a.ok_or_else(|| missing("a"))?,
            alpha: self.alpha.ok_or_else(|| missing("alpha"))?,
            n_kicks: self.n_kicks.unwrap_or(DEFAULT_N_KICKS),
            initial: self.initial.unwrap_or_default(),
            m_max_override: self.m_max,
            seed: self.seed,
        })
    }
}
