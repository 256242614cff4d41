use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform radial grid on `(0, r_max]` with nodes `r_i = (i+1) h`.
///
/// There is deliberately no node at the origin: every integrand handled
/// here is of the form `r^{2-kappa} g(r)` with `kappa < 3`, which vanishes
/// or stays integrable at `r = 0`, and keeping the origin off the grid lets
/// the singular weights `|x|^{-kappa}` be evaluated at every node.
///
/// Volume integrals `∫_{R^3} f(|x|) dx = 4π ∫_0^{r_max} f r^2 dr` use the
/// trapezoidal rule with a phantom zero node at the origin (the integrand
/// `r^2 f` vanishes there together with its odd derivatives for smooth
/// radial `f`, so the rule keeps its full Euler-Maclaurin accuracy).
/// Singular integrals use product integration: exact power-law moments of
/// `r^{2-kappa}` against a piecewise-parabolic interpolant of `g` (Simpson
/// pattern over cell pairs), with the first cell `[0, r_1]` closed against
/// the parabola through the first three nodes. The singular weight costs
/// no accuracy order; the composite rule is fourth-order in `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
    h: f64,
    r_max: f64,
    w_vol: Vec<f64>,
}

impl RadialGrid {
    /// Reference discretization used throughout: `r_max = 30`, `n = 3000`.
    pub fn reference() -> Self {
        Self::uniform(30.0, 3000).expect("reference grid is valid")
    }

    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidParams(format!("r_max = {r_max}")));
        }
        if n < 3 {
            return Err(Error::GridTooSmall { need: 3, got: n });
        }
        let h = r_max / n as f64;
        let r: Vec<f64> = (0..n).map(|i| (i + 1) as f64 * h).collect();
        let mut w_vol: Vec<f64> = r.iter().map(|&ri| 4.0 * PI * ri * ri * h).collect();
        w_vol[n - 1] *= 0.5;
        Ok(Self { r, h, r_max, w_vol })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    /// Volume quadrature weights: `Σ w_vol[i] f(r_i) ≈ ∫ f(|x|) dx`.
    pub fn volume_weights(&self) -> &[f64] {
        &self.w_vol
    }

    /// Weights for `∫ |x|^{-kappa} g(|x|) dx`, valid for `kappa < 3`.
    ///
    /// On each pair of cells the moments `∫ r^{2-kappa} r^m dr` are closed
    /// analytically against the Lagrange parabola through the three nodes,
    /// so the rule is exact whenever `g` is piecewise quadratic and
    /// fourth-order accurate for smooth `g`; the singular weight costs no
    /// accuracy order.
    pub fn singular_weights(&self, kappa: f64) -> Result<Vec<f64>> {
        if !kappa.is_finite() || kappa >= 3.0 || kappa < 0.0 {
            return Err(Error::UnsupportedSingularity(kappa));
        }
        if kappa == 0.0 {
            return Ok(self.w_vol.clone());
        }
        let n = self.r.len();
        let e = 2.0 - kappa;
        let moment = |lo: f64, hi: f64, m: u32| -> f64 {
            let p = e + m as f64 + 1.0;
            (hi.powf(p) - lo.powf(p)) / p
        };
        // product weights of the parabola through nodes idx over [lo, hi]
        let segment = |lo: f64, hi: f64, idx: [usize; 3]| -> [f64; 3] {
            let m0 = moment(lo, hi, 0);
            let m1 = moment(lo, hi, 1);
            let m2 = moment(lo, hi, 2);
            let mut out = [0.0_f64; 3];
            for j in 0..3 {
                let xj = self.r[idx[j]];
                let xa = self.r[idx[(j + 1) % 3]];
                let xb = self.r[idx[(j + 2) % 3]];
                out[j] = (m2 - (xa + xb) * m1 + xa * xb * m0) / ((xj - xa) * (xj - xb));
            }
            out
        };
        let mut w = vec![0.0_f64; n];
        // first cell [0, r_1], extrapolating the leading parabola; for
        // kappa close to 3 the extrapolation weights can turn negative, in
        // which case g is frozen at g(r_1) instead (weights stay a
        // nonneg. partition and the region carries vanishing measure)
        let first = segment(0.0, self.r[0], [0, 1, 2]);
        if first.iter().all(|&c| c >= 0.0) {
            for (j, c) in first.iter().enumerate() {
                w[j] += c;
            }
        } else {
            w[0] += moment(0.0, self.r[0], 0);
        }
        // Simpson pattern over interior cell pairs
        let mut j = 0;
        while j + 2 <= n - 1 {
            let seg = segment(self.r[j], self.r[j + 2], [j, j + 1, j + 2]);
            for k in 0..3 {
                w[j + k] += seg[k];
            }
            j += 2;
        }
        // odd cell count: close the last cell with the trailing parabola
        if j == n - 2 {
            let seg = segment(self.r[n - 2], self.r[n - 1], [n - 3, n - 2, n - 1]);
            for k in 0..3 {
                w[n - 3 + k] += seg[k];
            }
        }
        for wi in &mut w {
            *wi *= 4.0 * PI;
        }
        Ok(w)
    }
}
