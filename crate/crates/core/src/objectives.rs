//! Global-optimization test functions with shifted minima.
//!
//! Every function is evaluated on `z = x − B` and offset by `C`, so the global
//! minimum sits at `x* = (B, …, B)` with value `C`. The sums are arranged so
//! that each term vanishes exactly at `z = 0`; `F(x*) == C` holds bit for bit.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::noise::derive_seed;
use crate::{Error, Result};

/// Anything the swarm schemes can minimize.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Cost at `x`. Callers guarantee `x.len() == self.dim()`.
    fn cost(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Ackley,
    /// Also accepted as "griewalk".
    #[serde(alias = "griewalk")]
    Griewank,
    Rastrigin,
    Salomon,
    Schwefel,
    /// Xin-She Yang's random function; needs frozen weights η.
    #[serde(alias = "xsy")]
    XsyRandom,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 6] = [
        ObjectiveKind::Ackley,
        ObjectiveKind::Griewank,
        ObjectiveKind::Rastrigin,
        ObjectiveKind::Salomon,
        ObjectiveKind::Schwefel,
        ObjectiveKind::XsyRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Ackley => "ackley",
            ObjectiveKind::Griewank => "griewank",
            ObjectiveKind::Rastrigin => "rastrigin",
            ObjectiveKind::Salomon => "salomon",
            ObjectiveKind::Schwefel => "schwefel",
            ObjectiveKind::XsyRandom => "xsy_random",
        }
    }

    /// Standard search domain, applied to every coordinate.
    pub fn standard_bounds(self) -> Bounds {
        let half = match self {
            ObjectiveKind::Ackley => 32.0,
            ObjectiveKind::Griewank | ObjectiveKind::Salomon | ObjectiveKind::Schwefel => 100.0,
            ObjectiveKind::Rastrigin => 5.12,
            ObjectiveKind::XsyRandom => 5.0,
        };
        Bounds::new(-half, half)
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "ackley" => Ok(ObjectiveKind::Ackley),
            "griewank" | "griewalk" => Ok(ObjectiveKind::Griewank),
            "rastrigin" => Ok(ObjectiveKind::Rastrigin),
            "salomon" => Ok(ObjectiveKind::Salomon),
            "schwefel" => Ok(ObjectiveKind::Schwefel),
            "xsy_random" | "xsy" | "xin_she_yang" => Ok(ObjectiveKind::XsyRandom),
            other => Err(Error::invalid(
                "objective.name",
                format!("unknown function `{other}`"),
            )),
        }
    }
}

/// Per-coordinate interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::invalid(
                "box",
                format!(
                    "need finite lower < upper, got [{}, {}]",
                    self.lower, self.upper
                ),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lower..=self.upper).contains(&v)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A concrete test problem: function, dimension, shift `B`, offset `C`,
/// search box, and (for XSY) the frozen random weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub dim: usize,
    pub shift: f64,
    pub offset: f64,
    pub bounds: Bounds,
    pub frozen_noise: Option<Vec<f64>>,
}

impl ObjectiveSpec {
    /// Unshifted function on its standard domain. XSY weights are left unset.
    pub fn new(kind: ObjectiveKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            shift: 0.0,
            offset: 0.0,
            bounds: kind.standard_bounds(),
            frozen_noise: None,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_noise(mut self, eta: Vec<f64>) -> Self {
        self.frozen_noise = Some(eta);
        self
    }

    /// Draws and freezes XSY weights from `seed`; a no-op for other kinds.
    pub fn with_xsy_seed(self, seed: u64) -> Self {
        if self.kind == ObjectiveKind::XsyRandom {
            let eta = sample_xsy_noise(self.dim, seed);
            self.with_noise(eta)
        } else {
            self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("objective.dim", "must be at least 1"));
        }
        if !self.shift.is_finite() || !self.offset.is_finite() {
            return Err(Error::invalid(
                "objective",
                "shift and offset must be finite",
            ));
        }
        self.bounds.validate()?;
        if self.kind == ObjectiveKind::XsyRandom {
            match &self.frozen_noise {
                None => return Err(Error::MissingNoise("xsy_random")),
                Some(eta) if eta.len() != self.dim => {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: eta.len(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Checked evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if self.kind == ObjectiveKind::XsyRandom && self.frozen_noise.is_none() {
            return Err(Error::MissingNoise("xsy_random"));
        }
        Ok(self.value(x))
    }

    /// The global minimizer `(B, …, B)`.
    pub fn minimizer(&self) -> Vec<f64> {
        vec![self.shift; self.dim]
    }

    fn value(&self, x: &[f64]) -> f64 {
        let b = self.shift;
        let raw = match self.kind {
            ObjectiveKind::Ackley => ackley(x, b),
            ObjectiveKind::Griewank => griewank(x, b),
            ObjectiveKind::Rastrigin => rastrigin(x, b),
            ObjectiveKind::Salomon => salomon(x, b),
            ObjectiveKind::Schwefel => x.iter().map(|xi| (xi - b).abs()).sum(),
            ObjectiveKind::XsyRandom => {
                let eta = self
                    .frozen_noise
                    .as_deref()
                    .expect("validated spec carries XSY weights");
                xsy(x, b, eta)
            }
        };
        raw + self.offset
    }
}

impl Objective for ObjectiveSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn cost(&self, x: &[f64]) -> f64 {
        self.value(x)
    }
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn cost(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// I.i.d. uniform `[0,1)` weights for the XSY function.
pub fn sample_xsy_noise(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(derive_seed(&[seed, 0x7873_795f_6574_61]));
    (0..d).map(|_| rng.random::<f64>()).collect()
}

fn ackley(x: &[f64], b: f64) -> f64 {
    let d = x.len() as f64;
    let (sq, cs) = x.iter().fold((0.0, 0.0), |(sq, cs), xi| {
        let z = xi - b;
        (sq + z * z, cs + (2.0 * PI * z).cos())
    });
    // Grouped so both brackets are exactly zero at the minimum.
    (20.0 - 20.0 * (-0.2 * (sq / d).sqrt()).exp()) + (E - (cs / d).exp())
}

fn griewank(x: &[f64], b: f64) -> f64 {
    let mut sum = 0.0;
    let mut prod = 1.0;
    for (i, xi) in x.iter().enumerate() {
        let z = xi - b;
        sum += z * z / 4000.0;
        prod *= (z / (i + 1) as f64).cos();
    }
    (1.0 - prod) + sum
}

fn rastrigin(x: &[f64], b: f64) -> f64 {
    x.iter()
        .map(|xi| {
            let z = xi - b;
            z * z + 10.0 * (1.0 - (2.0 * PI * z).cos())
        })
        .sum()
}

fn salomon(x: &[f64], b: f64) -> f64 {
    let r = x.iter().map(|xi| (xi - b).powi(2)).sum::<f64>().sqrt();
    (1.0 - (2.0 * PI * r).cos()) + 0.1 * r
}

fn xsy(x: &[f64], b: f64, eta: &[f64]) -> f64 {
    x.iter()
        .zip(eta)
        .enumerate()
        .map(|(i, (xi, e))| e * (xi - b).abs().powi(i as i32 + 1))
        .sum()
}
