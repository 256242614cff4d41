//! Scalar functionals of a radial field: mass, kinetic and potential
//! energies, the Pohozaev quantities `K`, `K^c`, the variational
//! functional `I`, and the sharp-constant ratio of the weighted
//! Gagliardo-Nirenberg inequality.

use serde::Serialize;

use crate::calibration::calibration;
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::params::Params;

/// Every scalar functional evaluated on one field, derived from the three
/// primitive integrals (`gradnorm_sq`, `pot_a`, `pot_b`) plus the mass so
/// the linear identities between them hold to rounding error within one
/// report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    pub energy_c: f64,
    pub gradnorm_sq: f64,
    pub k: f64,
    pub k_c: f64,
    pub i: f64,
    /// `∫ |x|^{-a} |u|^p dx`
    pub pot_a: f64,
    /// `∫ |x|^{-b} |u|^{6-2b} dx`
    pub pot_b: f64,
}

/// Coefficient of `pot_a` in `K`: `(3(p-2)+2a)/(2p)`.
pub fn k_pot_a_coeff(params: &Params) -> f64 {
    (3.0 * (params.p - 2.0) + 2.0 * params.a) / (2.0 * params.p)
}

/// Coefficients `(c_grad, c_pot_b)` of the functional `I`.
pub fn i_coeffs(params: &Params) -> (f64, f64) {
    let (a, b, p) = (params.a, params.b, params.p);
    let c_grad = (3.0 * (p - 2.0) - 2.0 * (2.0 - a)) / (6.0 * (p - 2.0) + 4.0 * a);
    let c_pot_b =
        (2.0 * (6.0 - 2.0 * b) - 3.0 * (p - 2.0) - 2.0 * a) / ((3.0 * (p - 2.0) + 2.0 * a) * (6.0 - 2.0 * b));
    (c_grad, c_pot_b)
}

/// Assembles the report from the primitive integrals.
pub fn report_from_primitives(
    params: &Params,
    mass: f64,
    gradnorm_sq: f64,
    pot_a: f64,
    pot_b: f64,
) -> FunctionalReport {
    let q = 6.0 - 2.0 * params.b;
    // layered so the linear identities hold bitwise, not just to roundoff:
    // energy = energy_c + pot_a/p and k = k_c + coeff * pot_a by construction
    let energy_c = gradnorm_sq / 2.0 - pot_b / q;
    let energy = energy_c + pot_a / params.p;
    let k_c = gradnorm_sq - pot_b;
    let k = k_c + k_pot_a_coeff(params) * pot_a;
    let (c_grad, c_pot_b) = i_coeffs(params);
    let i = c_grad * gradnorm_sq + c_pot_b * pot_b;
    FunctionalReport {
        mass,
        energy,
        energy_c,
        gradnorm_sq,
        k,
        k_c,
        i,
        pot_a,
        pot_b,
    }
}

/// `∫ |u|^2 dx`.
pub fn mass(u: &RadialField) -> Result<f64> {
    u.check_finite()?;
    Ok(u
        .grid()
        .volume_weights()
        .iter()
        .zip(u.values())
        .map(|(&w, v)| w * v.norm_sqr())
        .sum())
}

/// `∫ |x|^{-kappa} |u|^q dx` for `0 <= kappa < 2`, `q >= 1`.
pub fn weighted_norm(u: &RadialField, kappa: f64, q: f64) -> Result<f64> {
    if kappa >= 2.0 {
        return Err(Error::UnsupportedSingularity(kappa));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidParams(format!("q = {q} < 1")));
    }
    u.check_finite()?;
    let w = u.grid().singular_weights(kappa)?;
    Ok(w
        .iter()
        .zip(u.values())
        .map(|(&wi, v)| wi * v.norm().powf(q))
        .sum())
}

/// `||∇u||^2 = 4π ∫ |u'(r)|^2 r^2 dr` with the fixed difference stencil.
pub fn gradnorm_sq(u: &RadialField) -> Result<f64> {
    u.check_finite()?;
    let d = u.derivative()?;
    Ok(u
        .grid()
        .volume_weights()
        .iter()
        .zip(&d)
        .map(|(&w, di)| w * di.norm_sqr())
        .sum())
}

/// Evaluates every functional of one field under the given parameters.
pub fn report(u: &RadialField, params: &Params) -> Result<FunctionalReport> {
    let m = mass(u)?;
    let g = gradnorm_sq(u)?;
    let pot_a = weighted_norm(u, params.a, params.p)?;
    let pot_b = weighted_norm(u, params.b, 6.0 - 2.0 * params.b)?;
    Ok(report_from_primitives(params, m, g, pot_a, pot_b))
}

/// Gagliardo-Nirenberg ratio
/// `∫|x|^{-kappa}|u|^q dx / (||∇u||^{(3/2)q+kappa-3} ||u||^{3-kappa-q/2})`.
pub fn gn_ratio(u: &RadialField, kappa: f64, q: f64) -> Result<f64> {
    if !(0.0 < kappa && kappa < 2.0) {
        return Err(Error::InvalidParams(format!("kappa = {kappa} outside (0, 2)")));
    }
    if !(2.0 < q && q <= 6.0 - 2.0 * kappa) {
        return Err(Error::InvalidParams(format!(
            "q = {q} outside (2, 6 - 2 kappa]"
        )));
    }
    let m = mass(u)?;
    if m == 0.0 {
        return Err(Error::DegenerateInput("zero field in gn_ratio".into()));
    }
    let g = gradnorm_sq(u)?;
    let num = weighted_norm(u, kappa, q)?;
    let grad_exp = (1.5 * q + kappa - 3.0) / 2.0;
    let mass_exp = (3.0 - kappa - q / 2.0) / 2.0;
    let denom = g.powf(grad_exp) * m.powf(mass_exp);
    if denom == 0.0 {
        return Err(Error::DegenerateInput("zero gradient in gn_ratio".into()));
    }
    Ok(num / denom)
}

/// Radial pointwise-decay monitor:
/// `max_{r >= R} r |u(r)| <= C ||u||^{1/2} ||∇u||^{1/2}` with the frozen
/// calibrated constant. A sanity monitor, not an assertion of the sharp
/// constant.
pub fn strauss_bound_check(u: &RadialField, r_min: f64) -> Result<bool> {
    if !(r_min > 0.0) {
        return Err(Error::InvalidParams(format!("R = {r_min} must be positive")));
    }
    u.check_finite()?;
    let lhs = u
        .grid()
        .radii()
        .iter()
        .zip(u.values())
        .filter(|(&r, _)| r >= r_min)
        .map(|(&r, v)| r * v.norm())
        .fold(0.0_f64, f64::max);
    let m = mass(u)?;
    let g = gradnorm_sq(u)?;
    let rhs = calibration().strauss_c * m.powf(0.25) * g.powf(0.25);
    Ok(lhs <= rhs)
}
