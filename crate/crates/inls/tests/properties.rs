//! Property-based checks of the functional layer: algebraic consistency of
//! the reports, invariances, scaling laws, and the sharp inequality.

mod common;

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use inls::classifier;
use inls::field::RadialField;
use inls::functionals;
use inls::grid::RadialGrid;
use inls::groundstate::{self, ScaleFamily};
use inls::params::Params;

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::uniform(15.0, 1500).unwrap())
}

/// Up to three Gaussian bumps with linear phases.
fn bump_strategy() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec(
        (0.2..2.0_f64, 0.3..1.5_f64, 0.0..3.0_f64, -1.0..1.0_f64),
        1..4,
    )
}

fn field_from_bumps(grid: &Arc<RadialGrid>, bumps: &[(f64, f64, f64, f64)]) -> RadialField {
    let bumps = bumps.to_vec();
    RadialField::from_complex_fn(Arc::clone(grid), move |r| {
        bumps
            .iter()
            .map(|&(amp, width, center, phase)| {
                let x = (r - center) / width;
                Complex64::from_polar(amp * (-x * x).exp(), phase * r)
            })
            .sum()
    })
    .unwrap()
}

fn params_strategy() -> impl Strategy<Value = Params> {
    (0.1..1.9_f64, 0.1..1.9_f64, 0.05..0.95_f64)
        .prop_map(|(a, b, t)| Params::new(a, b, 2.0 + t * (4.0 - 2.0 * a)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The primitive integrals determine every derived scalar linearly;
    /// the report must satisfy those identities to rounding error.
    #[test]
    fn report_is_self_consistent(bumps in bump_strategy(), params in params_strategy()) {
        let u = field_from_bumps(&grid(), &bumps);
        let rep = functionals::report(&u, &params).unwrap();
        let q = 6.0 - 2.0 * params.b;
        let energy = rep.gradnorm_sq / 2.0 + rep.pot_a / params.p - rep.pot_b / q;
        let k = rep.gradnorm_sq + functionals::k_pot_a_coeff(&params) * rep.pot_a - rep.pot_b;
        let k_c = rep.gradnorm_sq - rep.pot_b;
        let scale = rep.gradnorm_sq.abs() + rep.pot_a.abs() + rep.pot_b.abs();
        prop_assert!((rep.energy - energy).abs() <= 1e-12 * scale);
        prop_assert!((rep.k - k).abs() <= 1e-12 * scale);
        prop_assert!((rep.k_c - k_c).abs() <= 1e-12 * scale);
    }

    /// A global phase changes nothing observable.
    #[test]
    fn reports_are_phase_invariant(
        bumps in bump_strategy(),
        params in params_strategy(),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let g = grid();
        let u = field_from_bumps(&g, &bumps);
        let rot = Complex64::from_polar(1.0, theta);
        let u_rot = u.map(|v| v * rot);
        let r1 = functionals::report(&u, &params).unwrap();
        let r2 = functionals::report(&u_rot, &params).unwrap();
        let scale = r1.gradnorm_sq + r1.pot_a + r1.pot_b + r1.mass;
        prop_assert!((r1.mass - r2.mass).abs() <= 1e-12 * scale);
        prop_assert!((r1.energy - r2.energy).abs() <= 1e-12 * scale);
        prop_assert!((r1.gradnorm_sq - r2.gradnorm_sq).abs() <= 1e-12 * scale);
        prop_assert!((r1.k - r2.k).abs() <= 1e-12 * scale);
    }

    /// The mass-preserving scaling laws: the report of the interpolated
    /// scaled field matches the exact exponent laws of the primitives.
    #[test]
    fn scaling_laws_hold(bumps in bump_strategy(), params in params_strategy(),
                         lambda in 0.6..1.7_f64) {
        let g = grid();
        let u = field_from_bumps(&g, &bumps);
        let fam = ScaleFamily::of(&u, &params).unwrap();
        let (u_scaled, clipped) = groundstate::scale_mass(&u, lambda).unwrap();
        prop_assume!(!clipped);
        let rep = functionals::report(&u_scaled, &params).unwrap();
        let k_pred = fam.k_mass_scaled(lambda);
        let e_pred = fam.energy_mass_scaled(lambda);
        let scale = rep.gradnorm_sq + rep.pot_a + rep.pot_b;
        // interpolation of the scaled field costs O(h^2)
        prop_assert!(
            (rep.k - k_pred).abs() <= 2e-3 * scale,
            "K {} vs predicted {}", rep.k, k_pred
        );
        prop_assert!(
            (rep.energy - e_pred).abs() <= 2e-3 * scale,
            "E {} vs predicted {}", rep.energy, e_pred
        );
    }

    /// Sharp Sobolev-type inequality: `S_b (pot_b)^{1/(6-2b)} <= ||∇u||`
    /// for every field, with the constant taken from the bundle.
    #[test]
    fn sharp_inequality_holds(bumps in bump_strategy()) {
        let g = grid();
        let params = Params::new(1.2, 0.8, 3.6).unwrap();
        let gs = groundstate::bundle(params.b, &params, &g).unwrap();
        let u = field_from_bumps(&g, &bumps);
        let pot_b = functionals::weighted_norm(&u, params.b, 6.0 - 2.0 * params.b).unwrap();
        let grad = functionals::gradnorm_sq(&u).unwrap().sqrt();
        prop_assert!(
            gs.s_b * pot_b.powf(1.0 / (6.0 - 2.0 * params.b)) <= grad * (1.0 + 1e-3),
            "ratio {}", gs.s_b * pot_b.powf(1.0 / (6.0 - 2.0 * params.b)) / grad
        );
    }

    /// The second variational characterization is implied by the first:
    /// whenever `check_clem1` accepts a field, `check_clem2` must as well.
    #[test]
    fn clem1_implies_clem2(bumps in bump_strategy()) {
        let g = grid();
        let params = Params::new(1.2, 0.8, 3.6).unwrap();
        let gs = groundstate::bundle(params.b, &params, &g).unwrap();
        let u = field_from_bumps(&g, &bumps);
        let c1 = classifier::check_clem1(&u, &params, gs.m, 1e-3).unwrap();
        let c2 = classifier::check_clem2(&u, &params, gs.m, 1e-3).unwrap();
        prop_assert!(c1 && c2, "clem1 {c1}, clem2 {c2}");
    }
}
