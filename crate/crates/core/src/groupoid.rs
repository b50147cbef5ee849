//! Arrows of the prequantum groupoid `C^n × (R/hZ) × C^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{primitive_alpha, ComplexPoint, PhaseSpaceConfig, TangentVector};

/// Default endpoint tolerance for [`compose`].
pub const DEFAULT_COMPOSE_TOL: f64 = 1e-12;

/// Canonical representative of `t mod h` in `[0, h)`.
pub fn reduce_action(t: f64, h: f64) -> f64 {
    let r = t.rem_euclid(h);
    // rem_euclid may round up to h for tiny negative inputs; +0.0 clears -0.0.
    if r >= h {
        0.0
    } else {
        r + 0.0
    }
}

/// Distance between two actions on the circle `R/hZ`.
pub fn action_distance(a: f64, b: f64, h: f64) -> f64 {
    let d = reduce_action(a - b, h);
    d.min(h - d)
}

/// A morphism `(z, t, z')`: a path from `source` to `target` with relative
/// action `t mod h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    source: ComplexPoint,
    action: f64,
    target: ComplexPoint,
}

impl Arrow {
    pub fn new(
        source: ComplexPoint,
        action: f64,
        target: ComplexPoint,
        cfg: &PhaseSpaceConfig,
    ) -> Result<Self> {
        cfg.ensure_dim(source.dim())?;
        cfg.ensure_dim(target.dim())?;
        if !action.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            source,
            action: reduce_action(action, cfg.h()),
            target,
        })
    }

    /// The identity arrow `(z, 0, z)`.
    pub fn unit(z: ComplexPoint, cfg: &PhaseSpaceConfig) -> Result<Self> {
        Self::new(z.clone(), 0.0, z, cfg)
    }

    pub fn source(&self) -> &ComplexPoint {
        &self.source
    }

    pub fn action(&self) -> f64 {
        self.action
    }

    pub fn target(&self) -> &ComplexPoint {
        &self.target
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("arrow serialization is infallible")
    }

    /// Parses and re-validates against `cfg` (dimension, action range).
    pub fn from_json(s: &str, cfg: &PhaseSpaceConfig) -> Result<Self> {
        let raw: Arrow =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let source = ComplexPoint::new(raw.source.coords().to_vec())?;
        let target = ComplexPoint::new(raw.target.coords().to_vec())?;
        Self::new(source, raw.action, target, cfg)
    }

    /// Same endpoints and actions equal modulo `h` within `tol`.
    pub fn approx_eq(&self, other: &Arrow, tol: f64, cfg: &PhaseSpaceConfig) -> bool {
        self.source.distance(&other.source) <= tol
            && self.target.distance(&other.target) <= tol
            && action_distance(self.action, other.action, cfg.h()) <= tol
    }
}

/// A tangent vector to the arrow space: `(du, ds, du')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowTangent {
    pub du: TangentVector,
    pub ds: f64,
    pub du_prime: TangentVector,
}

impl ArrowTangent {
    /// Push-forward under the lifted rotation by `s`.
    pub fn rotated(&self, s: f64) -> Self {
        Self {
            du: self.du.rotated(s),
            ds: self.ds,
            du_prime: self.du_prime.rotated(s),
        }
    }
}

/// `a · b = (a.source, a.action + b.action, b.target)`, defined when
/// `a.target` meets `b.source` within `tol`.
pub fn compose(a: &Arrow, b: &Arrow, tol: f64, cfg: &PhaseSpaceConfig) -> Result<Arrow> {
    cfg.ensure_dim(a.source.dim())?;
    cfg.ensure_dim(b.source.dim())?;
    let distance = a.target.distance(&b.source);
    if distance.is_nan() || distance >= tol {
        return Err(Error::NotComposable { distance, tol });
    }
    Ok(Arrow {
        source: a.source.clone(),
        action: reduce_action(a.action + b.action, cfg.h()),
        target: b.target.clone(),
    })
}

pub fn invert(a: &Arrow, cfg: &PhaseSpaceConfig) -> Arrow {
    Arrow {
        source: a.target.clone(),
        action: reduce_action(-a.action, cfg.h()),
        target: a.source.clone(),
    }
}

/// `λ = pr₃*α − pr₁*α − pr₂*dt` evaluated at `y` on `v`.
pub fn lambda_eval(y: &Arrow, v: &ArrowTangent, cfg: &PhaseSpaceConfig) -> Result<f64> {
    let at_target = primitive_alpha(&y.target, &v.du_prime, cfg)?;
    let at_source = primitive_alpha(&y.source, &v.du, cfg)?;
    Ok(at_target - at_source - v.ds)
}

/// Lift of the rotation `z ↦ e^{-is}z`; the action coordinate is untouched.
pub fn lifted_rotation(s: f64, y: &Arrow) -> Arrow {
    Arrow {
        source: y.source.rotated(s),
        action: y.action,
        target: y.target.rotated(s),
    }
}
