//! Payne-Sattinger classification of initial data below the threshold
//! energy, the variational-characterization checks, the gradient lower
//! bound along `K < 0`, and the coercivity margin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::functionals;
use crate::groundstate::GroundStateBundle;
use crate::params::Params;

/// Relative width of the band around `||∇Q||^2` inside which the two
/// membership tests of the set equivalence are allowed to disagree.
const CONSISTENCY_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    KPlus,
    KMinus,
    AboveThreshold,
    Zero,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub energy: f64,
    pub m: f64,
    pub k: f64,
    pub gradnorm_sq: f64,
    pub gradnorm_sq_q: f64,
    /// Sign-of-`K` test agrees with the gradient-norm test; disagreement
    /// inside the grid-error band keeps the verdict but clears this flag.
    pub consistent: bool,
}

/// Splits sub-threshold data (`E < m`) by the sign of `K`; data at or
/// above the threshold get `AboveThreshold`, the zero field gets `Zero`.
pub fn classify(
    u0: &RadialField,
    params: &Params,
    gs: &GroundStateBundle,
) -> Result<ClassificationResult> {
    let rep = functionals::report(u0, params)?;
    let gq = gs.gradnorm_sq_q;
    let base = |verdict, consistent| ClassificationResult {
        verdict,
        energy: rep.energy,
        m: gs.m,
        k: rep.k,
        gradnorm_sq: rep.gradnorm_sq,
        gradnorm_sq_q: gq,
        consistent,
    };
    if u0.is_zero() {
        return Ok(base(Verdict::Zero, true));
    }
    if rep.energy >= gs.m {
        return Ok(base(Verdict::AboveThreshold, true));
    }
    let verdict = if rep.k >= 0.0 {
        Verdict::KPlus
    } else {
        Verdict::KMinus
    };
    // Set equivalence: below the threshold, K >= 0 <=> ||∇u|| < ||∇Q||.
    // Exact only in the continuum; near the boundary the discrete tests
    // may split, which is reported rather than raised.
    let grad_says_plus = rep.gradnorm_sq < gq;
    let agree = (rep.k >= 0.0) == grad_says_plus;
    let in_band = (rep.gradnorm_sq - gq).abs() <= CONSISTENCY_BAND * gq;
    Ok(base(verdict, agree || in_band))
}

/// Variational characterization on the Pohozaev constraint:
/// `K(u) <= 0` implies `I(u) >= m (1 - tol)`; vacuously true otherwise.
pub fn check_clem1(u: &RadialField, params: &Params, m: f64, tol: f64) -> Result<bool> {
    let rep = functionals::report(u, params)?;
    if rep.k > 0.0 {
        return Ok(true);
    }
    Ok(rep.i >= m * (1.0 - tol))
}

/// Same infimum over the weaker constraint `K^c(u) <= 0`.
pub fn check_clem2(u: &RadialField, params: &Params, m: f64, tol: f64) -> Result<bool> {
    let rep = functionals::report(u, params)?;
    if rep.k_c > 0.0 {
        return Ok(true);
    }
    Ok(rep.i >= m * (1.0 - tol))
}

/// Coefficient of `m` in the gradient lower bound along `K < 0`:
/// `(6(p-2)+4a)(3-b) / (3(p-2)(2-b)+2(2-b)a)`.
pub fn gradient_bound_ratio(params: &Params) -> f64 {
    let (a, b, p) = (params.a, params.b, params.p);
    (6.0 * (p - 2.0) + 4.0 * a) * (3.0 - b)
        / (3.0 * (p - 2.0) * (2.0 - b) + 2.0 * (2.0 - b) * a)
}

/// `||∇u||^2 >= ratio * m` whenever `K(u) < 0`, checked with relative
/// slack `1e-3`. Erroring when `K(u) >= 0`: the bound only holds inside
/// the `K^-` set.
pub fn gradient_lower_bound(u: &RadialField, params: &Params, m: f64) -> Result<bool> {
    let rep = functionals::report(u, params)?;
    if rep.k >= 0.0 {
        return Err(Error::Precondition(format!(
            "gradient_lower_bound requires K < 0, got K = {}",
            rep.k
        )));
    }
    Ok(rep.gradnorm_sq >= gradient_bound_ratio(params) * m * (1.0 - 1e-3))
}

/// Coercivity margin of the trapped regime:
/// `K^c(u) - [(1-(1-eps)^{2-b}) / (1-eps)^{2-b}] pot_b(u)`, defined when
/// `||∇u||^2 <= (1-eps) ||∇Q||^2`; nonnegative within grid tolerance.
pub fn coercivity_margin(
    u: &RadialField,
    params: &Params,
    gs: &GroundStateBundle,
    eps_tilde: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&eps_tilde) {
        return Err(Error::InvalidParams(format!(
            "eps_tilde = {eps_tilde} outside [0, 1)"
        )));
    }
    let rep = functionals::report(u, params)?;
    let cap = (1.0 - eps_tilde) * gs.gradnorm_sq_q;
    if rep.gradnorm_sq > cap * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "coercivity_margin requires ||∇u||^2 <= {cap}, got {}",
            rep.gradnorm_sq
        )));
    }
    let s = (1.0 - eps_tilde).powf(2.0 - gs.b);
    Ok(rep.k_c - (1.0 - s) / s * rep.pot_b)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::groundstate;
    use crate::grid::RadialGrid;

    fn setup() -> (Arc<RadialGrid>, Params, GroundStateBundle) {
        let grid = Arc::new(RadialGrid::reference());
        let params = Params::new(1.2, 0.8, 3.6).unwrap();
        let gs = groundstate::bundle(params.b, &params, &grid).unwrap();
        (grid, params, gs)
    }

    #[test]
    fn zero_field_verdict() {
        let (grid, params, gs) = setup();
        let r = classify(&RadialField::zero(grid), &params, &gs).unwrap();
        assert_eq!(r.verdict, Verdict::Zero);
    }

    #[test]
    fn small_q_is_k_plus() {
        let (_, params, gs) = setup();
        let u = gs.q_field.scaled(0.05);
        let r = classify(&u, &params, &gs).unwrap();
        assert_eq!(r.verdict, Verdict::KPlus);
        assert!(r.consistent);
        assert!(r.energy < r.m && r.k >= 0.0);
    }

    #[test]
    fn above_threshold_overrides_k_sign() {
        let (_, params, gs) = setup();
        // amplitude pushed until E >= m
        let mut c = 1.0;
        loop {
            let u = gs.q_field.scaled(c);
            let rep = functionals::report(&u, &params).unwrap();
            if rep.energy >= gs.m {
                let r = classify(&u, &params, &gs).unwrap();
                assert_eq!(r.verdict, Verdict::AboveThreshold);
                break;
            }
            c *= 1.3;
            assert!(c < 1e6, "never crossed the threshold");
        }
    }

    #[test]
    fn phase_invariance() {
        let (_, params, gs) = setup();
        let u = gs.q_field.scaled(0.05);
        let rotated = u.map(|v| v * num_complex::Complex64::from_polar(1.0, 1.1));
        let r0 = classify(&u, &params, &gs).unwrap();
        let r1 = classify(&rotated, &params, &gs).unwrap();
        assert_eq!(r0.verdict, r1.verdict);
        assert!((r0.k - r1.k).abs() < 1e-9 * (1.0 + r0.k.abs()));
    }

    #[test]
    fn clem_checks_vacuous_on_positive_k() {
        let (_, params, gs) = setup();
        let u = gs.q_field.scaled(0.05);
        let rep = functionals::report(&u, &params).unwrap();
        assert!(rep.k > 0.0);
        assert!(check_clem1(&u, &params, gs.m, 1e-3).unwrap());
    }

    #[test]
    fn clem2_at_q_is_tight() {
        let (grid, params, gs) = setup();
        // the infimum is attained at Q: with tail-completed integrals,
        // K^c(Q) = 0 and I(Q) = m up to discretization error
        assert!(gs.k_c_residual.abs() < 1e-3 * gs.gradnorm_sq_q);
        let (c_grad, c_pot_b) = functionals::i_coeffs(&params);
        let i_q = c_grad * gs.gradnorm_sq_q + c_pot_b * gs.pot_b_q;
        assert!(((i_q - gs.m) / gs.m).abs() < 1e-3, "I(Q) = {i_q}, m = {}", gs.m);
        // a localized field pushed into K^c <= 0 still sits above m
        let u = RadialField::from_real_fn(Arc::clone(&grid), |r| 4.0 * (-r * r).exp()).unwrap();
        let rep = functionals::report(&u, &params).unwrap();
        assert!(rep.k_c < 0.0, "datum not in the K^c <= 0 set");
        assert!(check_clem2(&u, &params, gs.m, 1e-3).unwrap());
    }

    #[test]
    fn gradient_bound_rejects_k_nonnegative() {
        let (_, params, gs) = setup();
        let u = gs.q_field.scaled(0.05);
        assert!(gradient_lower_bound(&u, &params, gs.m).is_err());
    }

    #[test]
    fn gradient_bound_identity() {
        // (6(p-2)+4a)(16-8b) = 16 (3(p-2)(2-b)+2(2-b)a)
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let a = 0.1 + 1.8 * rng();
            let b = 0.1 + 1.8 * rng();
            let p = 2.1 + 2.0 * rng();
            let lhs = (6.0 * (p - 2.0) + 4.0 * a) * (16.0 - 8.0 * b);
            let rhs = 16.0 * (3.0 * (p - 2.0) * (2.0 - b) + 2.0 * (2.0 - b) * a);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }
    }

    #[test]
    fn coercivity_margin_cases() {
        let (grid, params, gs) = setup();
        // zero field: margin 0 at any eps
        let z = RadialField::zero(Arc::clone(&grid));
        assert_eq!(coercivity_margin(&z, &params, &gs, 0.3).unwrap(), 0.0);
        // localized trapped datum with eps from its gradient ratio
        let u = RadialField::from_real_fn(Arc::clone(&grid), |r| 0.4 * (-r * r).exp()).unwrap();
        let rep = functionals::report(&u, &params).unwrap();
        let eps = 1.0 - rep.gradnorm_sq / gs.gradnorm_sq_q;
        let margin = coercivity_margin(&u, &params, &gs, eps).unwrap();
        assert!(margin >= -1e-4 * gs.gradnorm_sq_q, "margin = {margin}");
        // at eps = 0 the margin degenerates to K^c; for the continuum Q
        // (tail-completed) that is zero within discretization error
        assert!(gs.k_c_residual.abs() < 1e-3 * gs.gradnorm_sq_q);
        // precondition violation
        assert!(coercivity_margin(&gs.q_field, &params, &gs, 0.5).is_err());
    }
}
