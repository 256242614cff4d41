use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent triple `(a, b, p)` of the equation
/// `i u_t + Δu = |x|^{-a}|u|^{p-2}u - |x|^{-b}|u|^{4-2b}u`.
///
/// The standing assumptions `0 < a < 2`, `0 < b < 2`, `2 < p <= 6 - 2a`
/// are enforced at construction; the theorem-specific regimes are exposed
/// as predicates so every caller can gate on the hypotheses it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParams("non-finite exponent".into()));
        }
        if !(0.0 < a && a < 2.0) {
            return Err(Error::InvalidParams(format!("a = {a} outside (0, 2)")));
        }
        if !(0.0 < b && b < 2.0) {
            return Err(Error::InvalidParams(format!("b = {b} outside (0, 2)")));
        }
        if !(2.0 < p && p <= 6.0 - 2.0 * a) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside (2, 6 - 2a] with a = {a}"
            )));
        }
        Ok(Self { a, b, p })
    }

    /// Validates an already-deserialized triple.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.a, self.b, self.p).map(|_| ())
    }

    /// Energy-critical exponent `6 - 2a` for the sub-critical weight.
    pub fn p_critical(&self) -> f64 {
        6.0 - 2.0 * self.a
    }

    /// Lower end of the inter-critical range, `2 + (4 - 2a)/3`.
    pub fn p_lower(&self) -> f64 {
        2.0 + (4.0 - 2.0 * self.a) / 3.0
    }

    /// Hypotheses of the scattering theorem:
    /// `0<a<1`, `0<b<4/3`, `a<b`, `2+(4-2a)/3 < p < 6-2a`, `p >= 4`.
    pub fn scattering_regime(&self) -> bool {
        self.a < 1.0
            && self.b < 4.0 / 3.0
            && self.a < self.b
            && self.p_lower() < self.p
            && self.p < self.p_critical()
            && self.p >= 4.0
    }

    /// Hypotheses of the blow-up theorem:
    /// `0<b<a<2`, `2+(4-2a)/3 < p < 6-2a`.
    pub fn blowup_regime(&self) -> bool {
        self.b < self.a && self.p_lower() < self.p && self.p < self.p_critical()
    }

    /// Double-critical existence regime: `p = 6-2a`, `b < a`.
    pub fn groundstate_regime(&self) -> bool {
        (self.p - self.p_critical()).abs() <= 1e-12 * self.p && self.b < self.a
    }

    /// Hypotheses of the variational characterizations (threshold `m`
    /// defined): `0<b<a<2`, `2+(4-2a)/3 < p <= 6-2a`.
    pub fn threshold_regime(&self) -> bool {
        self.b < self.a && self.p_lower() < self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standing_assumptions() {
        assert!(Params::new(0.5, 1.0, 4.0).is_ok());
        assert!(Params::new(0.0, 1.0, 4.0).is_err());
        assert!(Params::new(0.5, 2.0, 4.0).is_err());
        assert!(Params::new(0.5, 1.0, 2.0).is_err());
        // p = 6 - 2a sits on the admissible boundary
        assert!(Params::new(1.2, 0.8, 3.6).is_ok());
        assert!(Params::new(1.2, 0.8, 3.6001).is_err());
    }

    #[test]
    fn regime_predicates() {
        let p = Params::new(0.5, 1.0, 4.5).unwrap();
        assert!(p.scattering_regime());
        assert!(!p.blowup_regime());

        let p = Params::new(1.2, 0.8, 3.5).unwrap();
        assert!(p.blowup_regime());
        assert!(!p.scattering_regime());

        // p exactly critical: blow-up regime is open on the right
        let p = Params::new(1.2, 0.8, 3.6).unwrap();
        assert!(!p.blowup_regime());
        assert!(p.groundstate_regime());
        assert!(p.threshold_regime());
    }
}
