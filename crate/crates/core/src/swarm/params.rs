use serde::{Deserialize, Serialize};

use crate::consensus::{ConsensusParams, MemorySwitchParams};
use crate::noise::NoiseKind;
use crate::objectives::Bounds;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Canonical discrete PSO with hard local/global best updates.
    DiscretePso,
    /// Second-order SDE scheme, consensus over current positions.
    SdpsoNoMemory,
    /// Second-order SDE scheme with a relaxed local-best memory.
    SdpsoMemory,
    /// First-order consensus dynamics.
    Cbo,
    /// First-order consensus dynamics with a local-best memory.
    CboLocalBest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DiscretePso => "discrete_pso",
            Mode::SdpsoNoMemory => "sdpso_no_memory",
            Mode::SdpsoMemory => "sdpso_memory",
            Mode::Cbo => "cbo",
            Mode::CboLocalBest => "cbo_local_best",
        }
    }

    pub fn has_velocity(self) -> bool {
        matches!(
            self,
            Mode::DiscretePso | Mode::SdpsoNoMemory | Mode::SdpsoMemory
        )
    }

    pub fn has_memory(self) -> bool {
        matches!(
            self,
            Mode::DiscretePso | Mode::SdpsoMemory | Mode::CboLocalBest
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum Boundary {
    #[default]
    None,
    /// Project every position coordinate onto the box after each move.
    ClampToBox { lower: f64, upper: f64 },
}

impl Boundary {
    pub fn clamp_to(bounds: Bounds) -> Self {
        Boundary::ClampToBox {
            lower: bounds.lower,
            upper: bounds.upper,
        }
    }
}

/// Scalar coefficients shared by all particle schemes.
///
/// Modes without a local best read only `lambda2` and `sigma2`. The friction
/// is not stored; it is always `1 − m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub mode: Mode,
    pub m: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub dt: f64,
    pub noise: NoiseKind,
    pub boundary: Boundary,
    pub pso_constraint: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            mode: Mode::SdpsoNoMemory,
            m: 0.0,
            lambda1: 0.0,
            lambda2: 1.0,
            sigma1: 0.0,
            sigma2: 1.0,
            nu: 50.0,
            beta: 3e3,
            alpha: 5e4,
            dt: 0.01,
            noise: NoiseKind::Gaussian,
            boundary: Boundary::None,
            pso_constraint: false,
        }
    }
}

impl SolverParams {
    /// Global-best-only parameters with drift `lambda` and noise `sigma`.
    pub fn global(mode: Mode, m: f64, lambda: f64, sigma: f64) -> Self {
        Self {
            mode,
            m,
            lambda2: lambda,
            sigma2: sigma,
            ..Self::default()
        }
    }

    /// Coefficients matching discrete PSO acceleration constants `c1`, `c2`:
    /// `λ_k = c_k / 2`, `σ_k = c_k / (2√3)`.
    pub fn from_acceleration(mode: Mode, m: f64, c1: f64, c2: f64) -> Self {
        let s3 = 3f64.sqrt();
        Self {
            mode,
            m,
            lambda1: c1 / 2.0,
            lambda2: c2 / 2.0,
            sigma1: c1 / (2.0 * s3),
            sigma2: c2 / (2.0 * s3),
            pso_constraint: true,
            ..Self::default()
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.m
    }

    /// `m + γ Δt`, the implicit velocity denominator.
    pub fn velocity_denominator(&self) -> f64 {
        self.m + self.gamma() * self.dt
    }

    pub fn consensus(&self) -> ConsensusParams {
        ConsensusParams::new(self.alpha)
    }

    pub fn switch(&self) -> MemorySwitchParams {
        MemorySwitchParams {
            beta: self.beta,
            nu: self.nu,
        }
    }

    /// Acceleration constants `c_k = 2 λ_k` used by the discrete scheme.
    pub fn acceleration(&self) -> (f64, f64) {
        (2.0 * self.lambda1, 2.0 * self.lambda2)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be finite and nonnegative, got {v}"),
                ))
            }
        };
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(0.0..=1.0).contains(&self.m) {
            return Err(Error::invalid(
                "m",
                format!("must lie in [0, 1], got {}", self.m),
            ));
        }
        nonneg("lambda1", self.lambda1)?;
        nonneg("lambda2", self.lambda2)?;
        nonneg("sigma1", self.sigma1)?;
        nonneg("sigma2", self.sigma2)?;
        self.consensus().validate()?;
        if matches!(self.mode, Mode::SdpsoMemory | Mode::CboLocalBest) {
            self.switch().validate()?;
        }
        if let Boundary::ClampToBox { lower, upper } = self.boundary {
            Bounds::new(lower, upper).validate()?;
        }
        if self.pso_constraint {
            let s3 = 3f64.sqrt();
            for (k, l, s) in [
                (1, self.lambda1, self.sigma1),
                (2, self.lambda2, self.sigma2),
            ] {
                if (s * s3 - l).abs() > 1e-12 * l.abs().max(1.0) {
                    return Err(Error::invalid(
                        format!("sigma{k}"),
                        format!("PSO constraint needs sigma = lambda/sqrt(3), got lambda {l}, sigma {s}"),
                    ));
                }
            }
        }
        let denom = self.velocity_denominator();
        if self.mode.has_velocity() && (!(denom > 0.0) || !denom.is_finite()) {
            return Err(Error::DegenerateInertia);
        }
        Ok(())
    }
}
