//! Nonlinear source terms `F(r, t, u)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

type EvalFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
type PotentialFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Radial weight `c(r) = c_inf + (c0 - c_inf)·exp(-(r/scale)²)` of a weighted quintic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    pub c0: f64,
    pub c_inf: f64,
    pub scale: f64,
}

impl PowerWeight {
    pub fn at(&self, r: f64) -> f64 {
        let x = r / self.scale;
        self.c_inf + (self.c0 - self.c_inf) * (-x * x).exp()
    }
}

/// Structural assumptions a source term satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// Depends on `x` only through `|x|`.
    pub radial: bool,
    /// `|F(r, t, u)| ≤ γ|u|⁵`.
    pub growth: bool,
    /// No explicit time dependence.
    pub autonomous: bool,
    /// `|F(u) - F(v)| ≤ γ|u - v|(|u|⁴ + |v|⁴)`.
    pub difference: bool,
    /// `u·F(r, t, u) ≤ 0`.
    pub defocusing: bool,
}

#[derive(Clone)]
enum Kind {
    Zero,
    Power(f64),
    Weighted(PowerWeight),
    Custom {
        name: String,
        eval: Arc<EvalFn>,
        potential: Option<Arc<PotentialFn>>,
    },
}

/// A source term with its growth constant `γ` and structural flags.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: Kind,
    gamma: f64,
    flags: Flags,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name())
            .field("gamma", &self.gamma)
            .field("flags", &self.flags)
            .finish()
    }
}

const ALL_FLAGS: Flags = Flags {
    radial: true,
    growth: true,
    autonomous: true,
    difference: true,
    defocusing: false,
};

impl Nonlinearity {
    pub fn zero() -> Self {
        Nonlinearity {
            kind: Kind::Zero,
            gamma: 0.0,
            flags: Flags {
                defocusing: true,
                ..ALL_FLAGS
            },
        }
    }

    /// `F = +u⁵`.
    pub fn focusing_quintic() -> Self {
        Nonlinearity {
            kind: Kind::Power(1.0),
            gamma: 1.0,
            flags: ALL_FLAGS,
        }
    }

    /// `F = -u⁵`.
    pub fn defocusing_quintic() -> Self {
        Nonlinearity {
            kind: Kind::Power(-1.0),
            gamma: 1.0,
            flags: Flags {
                defocusing: true,
                ..ALL_FLAGS
            },
        }
    }

    /// `F = c(r)·|u|⁴u` with `γ = max(|c0|, |c_inf|)`.
    pub fn weighted_power(weight: PowerWeight) -> Result<Self> {
        if !(weight.scale > 0.0) || !weight.c0.is_finite() || !weight.c_inf.is_finite() {
            return Err(LabError::Contract(format!(
                "weighted power needs finite coefficients and a positive scale, got {weight:?}"
            )));
        }
        Ok(Nonlinearity {
            kind: Kind::Weighted(weight),
            gamma: weight.c0.abs().max(weight.c_inf.abs()),
            flags: Flags {
                defocusing: weight.c0 <= 0.0 && weight.c_inf <= 0.0,
                ..ALL_FLAGS
            },
        })
    }

    /// User-supplied source. The flags are trusted; [`Nonlinearity::spot_check`]
    /// tests the growth and sign claims on random samples.
    pub fn custom(
        name: impl Into<String>,
        gamma: f64,
        flags: Flags,
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        potential: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    ) -> Self {
        Nonlinearity {
            kind: Kind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
                potential: potential.map(Arc::from),
            },
            gamma,
            flags,
        }
    }

    /// Parses the selector names used in configuration files.
    pub fn from_selector(name: &str, weight: Option<PowerWeight>) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "focusing_quintic" => Ok(Self::focusing_quintic()),
            "defocusing_quintic" => Ok(Self::defocusing_quintic()),
            "weighted_power" => Self::weighted_power(weight.unwrap_or(PowerWeight {
                c0: -1.0,
                c_inf: -1.0,
                scale: 1.0,
            })),
            other => Err(LabError::Parse(format!(
                "unknown nonlinearity '{other}' (expected focusing_quintic, defocusing_quintic, zero or weighted_power)"
            ))),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64, t: f64, u: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Power(c) => {
                let u2 = u * u;
                c * u2 * u2 * u
            }
            Kind::Weighted(wt) => {
                let u2 = u * u;
                wt.at(r) * u2 * u2 * u
            }
            Kind::Custom { eval, .. } => eval(r, t, u),
        }
    }

    /// `V(r, u) = -∫₀^u F(r, v) dv`, when known.
    pub fn potential(&self, r: f64, u: f64) -> Option<f64> {
        let u6 = u.powi(6);
        match &self.kind {
            Kind::Zero => Some(0.0),
            Kind::Power(c) => Some(-c * u6 / 6.0),
            Kind::Weighted(wt) => Some(-wt.at(r) * u6 / 6.0),
            Kind::Custom { potential, .. } => potential.as_ref().map(|v| v(r, u)),
        }
    }

    pub fn has_potential(&self) -> bool {
        match &self.kind {
            Kind::Custom { potential, .. } => potential.is_some(),
            _ => true,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn is_defocusing(&self) -> bool {
        self.flags.defocusing
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Zero => "zero".into(),
            Kind::Power(c) if *c > 0.0 => "focusing_quintic".into(),
            Kind::Power(_) => "defocusing_quintic".into(),
            Kind::Weighted(_) => "weighted_power".into(),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    /// Machine-readable description for manifests.
    pub fn descriptor(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "name": self.name(),
            "gamma": self.gamma,
            "flags": self.flags,
        });
        if let Kind::Weighted(w) = &self.kind {
            v["weight"] = serde_json::to_value(w).expect("weight serializes");
        }
        v
    }

    /// Checks `|F| ≤ γ|u|⁵` and, if flagged, `u·F ≤ 0` on seeded random samples.
    pub fn spot_check(&self, seed: u64, samples: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let r: f64 = rng.gen_range(0.0..50.0);
            let t: f64 = rng.gen_range(-50.0..50.0);
            let u: f64 = rng.gen_range(-1.0..1.0) * 10f64.powf(rng.gen_range(-3.0..1.0));
            let f = self.eval(r, t, u);
            let bound = self.gamma * u.abs().powi(5);
            if self.flags.growth && f.abs() > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(LabError::Contract(format!(
                    "{}: |F({r}, {t}, {u})| = {} exceeds γ|u|⁵ = {bound}",
                    self.name(),
                    f.abs()
                )));
            }
            if self.flags.defocusing && u * f > 0.0 {
                return Err(LabError::Contract(format!(
                    "{}: flagged defocusing but u·F > 0 at (r, t, u) = ({r}, {t}, {u})",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Copy with time reversed, `F'(r, t, u) = F(r, -t, u)`.
    pub(crate) fn time_reversed(&self) -> Self {
        match &self.kind {
            Kind::Custom {
                name,
                eval,
                potential,
            } if !self.flags.autonomous => {
                let inner = Arc::clone(eval);
                Nonlinearity {
                    kind: Kind::Custom {
                        name: format!("{name} (time reversed)"),
                        eval: Arc::new(move |r, t, u| inner(r, -t, u)),
                        potential: potential.clone(),
                    },
                    gamma: self.gamma,
                    flags: self.flags,
                }
            }
            _ => self.clone(),
        }
    }
}
