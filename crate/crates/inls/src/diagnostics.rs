//! Virial and Morawetz diagnostics: the localized weights, the variance
//! potential `V_psi`, the Morawetz action `M_psi`, the radial virial
//! second-derivative identity, the time-averaged localized-potential
//! bound, and the blow-up concavity certificate.

use std::sync::Arc;

use serde::Serialize;

use crate::calibration::calibration;
use crate::error::{Error, Result};
use crate::evolution::TimeSeries;
use crate::field::RadialField;
use crate::grid::RadialGrid;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    PlainQuadratic,
    QuadraticCutoffPsiR,
    MorawetzZeta,
}

/// A radial weight with every derivative sample the virial identity needs.
///
/// `lap = psi'' + 2 psi'/r` and `bilap = psi'''' + 4 psi'''/r` are the
/// radial reductions of the Laplacian and bilaplacian.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub r_scale: f64,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    d2psi: Vec<f64>,
    lap: Vec<f64>,
    bilap: Vec<f64>,
}

/// C^2 step `S(0)=0, S(1)=1` with vanishing first and second derivatives
/// at both ends, plus its derivatives and first two antiderivatives.
fn smoothstep(s: f64) -> f64 {
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}
fn smoothstep_d(s: f64) -> f64 {
    30.0 * s * s * (1.0 - s) * (1.0 - s)
}
fn smoothstep_dd(s: f64) -> f64 {
    60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
}
fn smoothstep_int(s: f64) -> f64 {
    // ∫_0^s S
    s * s * s * s * (2.5 - 3.0 * s + s * s)
}
fn smoothstep_int2(s: f64) -> f64 {
    // ∫_0^s ∫_0^σ S
    s * s * s * s * s * (0.5 - 0.5 * s + s * s / 7.0)
}

/// Interior knots (in the unit annulus coordinate) of the `psi_R` cutoff
/// profile: the second derivative runs `2 -> -D -> -D -> B -> B -> 0`
/// through `smoothstep` pieces. `D` and `B` are solved at construction
/// from the closure conditions `psi'(3R) = 0` and `psi(3R) = 0`, and the
/// knots are placed so that `B < 2` (keeping `psi'' <= 2` everywhere).
const PSI_KNOTS: [f64; 6] = [0.0, 0.07, 0.28, 0.50, 0.95, 1.0];

/// `(∫ g dt, ∫ t g dt)` over the unit interval for the piecewise
/// smoothstep profile through `vals` at `PSI_KNOTS`.
fn profile_moments(vals: &[f64; 6]) -> (f64, f64) {
    let i1 = 5.0 / 14.0; // ∫ s S(s) ds
    let (mut m0, mut m1) = (0.0, 0.0);
    for j in 0..5 {
        let (a, b) = (PSI_KNOTS[j], PSI_KNOTS[j + 1]);
        let (va, vb) = (vals[j], vals[j + 1]);
        let w = b - a;
        m0 += w * (va + vb) / 2.0;
        m1 += w * a * (va + vb) / 2.0 + w * w * (va / 2.0 + (vb - va) * i1);
    }
    (m0, m1)
}

/// Solves the cutoff profile amplitudes `(D, B)` from
/// `∫ psi'' dt = -1` and `∫ t psi'' dt = 1/4` (unit-annulus units).
fn psi_profile_amplitudes() -> (f64, f64) {
    let (c0, c1) = profile_moments(&[2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let (d0, d1) = profile_moments(&[0.0, -1.0, -1.0, 0.0, 0.0, 0.0]);
    let (b0, b1) = profile_moments(&[0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
    let det = d0 * b1 - d1 * b0;
    let r0 = -1.0 - c0;
    let r1 = 0.25 - c1;
    ((r0 * b1 - r1 * b0) / det, (d0 * r1 - d1 * r0) / det)
}

/// Quintic Hermite on `[0, 1]` from endpoint value / first / second
/// derivative data (derivatives in unit-interval units).
struct Quintic {
    c: [f64; 6],
}

impl Quintic {
    fn new(y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64) -> Self {
        // monomial coefficients of the unique matching quintic
        let c0 = y0;
        let c1 = d0;
        let c2 = s0 / 2.0;
        let c3 = -10.0 * y0 - 6.0 * d0 - 1.5 * s0 + 10.0 * y1 - 4.0 * d1 + 0.5 * s1;
        let c4 = 15.0 * y0 + 8.0 * d0 + 1.5 * s0 - 15.0 * y1 + 7.0 * d1 - s1;
        let c5 = -6.0 * y0 - 3.0 * d0 - 0.5 * s0 + 6.0 * y1 - 3.0 * d1 + 0.5 * s1;
        Self {
            c: [c0, c1, c2, c3, c4, c5],
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
    }

    fn deriv(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in (k..6).rev() {
            let mut f = 1.0;
            for j in 0..k {
                f *= (i - j) as f64;
            }
            acc = acc * t + f * self.c[i];
        }
        acc
    }

    fn integral(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..6).rev() {
            acc = acc * t + self.c[i] / (i + 1) as f64;
        }
        acc * t
    }
}

impl WeightFunction {
    /// `psi = r^2` everywhere: `Δψ = 6`, `Δ²ψ = 0`.
    pub fn plain_quadratic(grid: &Arc<RadialGrid>) -> Self {
        let r = grid.radii();
        Self {
            kind: WeightKind::PlainQuadratic,
            r_scale: f64::INFINITY,
            psi: r.iter().map(|&ri| ri * ri).collect(),
            dpsi: r.iter().map(|&ri| 2.0 * ri).collect(),
            d2psi: vec![2.0; r.len()],
            lap: vec![6.0; r.len()],
            bilap: vec![0.0; r.len()],
        }
    }

    /// Quadratic cutoff: `psi = r^2` on `r <= R`, `psi = 0` on `r >= 3R`,
    /// joined so that `psi >= 0`, `psi' <= 2r` and `psi'' <= 2` hold at
    /// every node (verified at construction).
    pub fn psi_r(grid: &Arc<RadialGrid>, r_cut: f64) -> Result<Self> {
        if !(r_cut > 0.0 && r_cut.is_finite()) {
            return Err(Error::InvalidParams(format!("cutoff radius {r_cut}")));
        }
        let (amp_d, amp_b) = psi_profile_amplitudes();
        let vals = [2.0, -amp_d, -amp_d, amp_b, amp_b, 0.0];
        let l = 2.0 * r_cut; // annulus width

        // cumulative psi' and psi at the knot radii
        let mut f_knot = [0.0_f64; 6];
        let mut p_knot = [0.0_f64; 6];
        f_knot[0] = 2.0 * r_cut;
        p_knot[0] = r_cut * r_cut;
        for j in 0..5 {
            let w = (PSI_KNOTS[j + 1] - PSI_KNOTS[j]) * l;
            let (va, vb) = (vals[j], vals[j + 1]);
            p_knot[j + 1] =
                p_knot[j] + f_knot[j] * w + w * w * (va / 2.0 + (vb - va) / 7.0);
            f_knot[j + 1] = f_knot[j] + w * (va + vb) / 2.0;
        }

        let n = grid.len();
        let mut out = Self {
            kind: WeightKind::QuadraticCutoffPsiR,
            r_scale: r_cut,
            psi: vec![0.0; n],
            dpsi: vec![0.0; n],
            d2psi: vec![0.0; n],
            lap: vec![0.0; n],
            bilap: vec![0.0; n],
        };
        for (i, &ri) in grid.radii().iter().enumerate() {
            if ri <= r_cut {
                out.psi[i] = ri * ri;
                out.dpsi[i] = 2.0 * ri;
                out.d2psi[i] = 2.0;
                out.lap[i] = 6.0;
            } else if ri < 3.0 * r_cut {
                let t = (ri - r_cut) / l;
                let j = PSI_KNOTS[..5]
                    .iter()
                    .rposition(|&k| t >= k)
                    .unwrap_or(0);
                let w = (PSI_KNOTS[j + 1] - PSI_KNOTS[j]) * l;
                let s = (t - PSI_KNOTS[j]) / (PSI_KNOTS[j + 1] - PSI_KNOTS[j]);
                let (va, vb) = (vals[j], vals[j + 1]);
                let d2 = va + (vb - va) * smoothstep(s);
                let d1 = f_knot[j] + w * (va * s + (vb - va) * smoothstep_int(s));
                let p = p_knot[j]
                    + f_knot[j] * w * s
                    + w * w * (va * s * s / 2.0 + (vb - va) * smoothstep_int2(s));
                let d3 = (vb - va) * smoothstep_d(s) / w;
                let d4 = (vb - va) * smoothstep_dd(s) / (w * w);
                out.psi[i] = p;
                out.dpsi[i] = d1;
                out.d2psi[i] = d2;
                out.lap[i] = d2 + 2.0 * d1 / ri;
                out.bilap[i] = d4 + 4.0 * d3 / ri;
            }
        }
        out.verify_psi_r(grid)?;
        Ok(out)
    }

    fn verify_psi_r(&self, grid: &Arc<RadialGrid>) -> Result<()> {
        let tol = 1e-9 * self.r_scale * self.r_scale;
        for (i, &ri) in grid.radii().iter().enumerate() {
            if self.psi[i] < -tol
                || self.dpsi[i] > 2.0 * ri + tol
                || self.d2psi[i] > 2.0 + 1e-12
            {
                return Err(Error::NumericalFailure(format!(
                    "psi_R inequality violated at r = {ri}: psi = {}, psi' = {}, psi'' = {}",
                    self.psi[i], self.dpsi[i], self.d2psi[i]
                )));
            }
        }
        Ok(())
    }

    /// Morawetz weight: `zeta' = r` on `r <= R/2`, `zeta' = R` on
    /// `r >= R`, with a convex join (`zeta'' >= 0`, `zeta' > 0`). Outside
    /// the join `zeta = R r - c` with the constant fixed by continuity;
    /// only `zeta'` enters the Morawetz action, so the offset is inert.
    pub fn zeta(grid: &Arc<RadialGrid>, r_cut: f64) -> Result<Self> {
        if !(r_cut > 0.0 && r_cut.is_finite()) {
            return Err(Error::InvalidParams(format!("cutoff radius {r_cut}")));
        }
        let w = r_cut / 2.0; // join width, [R/2, R]
        // zeta' data at the ends, unit-interval derivative scaling
        let q = Quintic::new(r_cut / 2.0, w, 0.0, r_cut, 0.0, 0.0);
        let zeta_at_r = r_cut * r_cut / 8.0 + w * q.integral(1.0);
        let offset = r_cut * r_cut - zeta_at_r;

        let n = grid.len();
        let mut out = Self {
            kind: WeightKind::MorawetzZeta,
            r_scale: r_cut,
            psi: vec![0.0; n],
            dpsi: vec![0.0; n],
            d2psi: vec![0.0; n],
            lap: vec![0.0; n],
            bilap: vec![0.0; n],
        };
        for (i, &ri) in grid.radii().iter().enumerate() {
            if ri <= r_cut / 2.0 {
                out.psi[i] = ri * ri / 2.0;
                out.dpsi[i] = ri;
                out.d2psi[i] = 1.0;
                out.lap[i] = 3.0;
            } else if ri < r_cut {
                let t = (ri - r_cut / 2.0) / w;
                let d1 = q.eval(t);
                let d2 = q.deriv(1, t) / w;
                let d3 = q.deriv(2, t) / (w * w);
                let d4 = q.deriv(3, t) / (w * w * w);
                out.psi[i] = r_cut * r_cut / 8.0 + w * q.integral(t);
                out.dpsi[i] = d1;
                out.d2psi[i] = d2;
                out.lap[i] = d2 + 2.0 * d1 / ri;
                out.bilap[i] = d4 + 4.0 * d3 / ri;
            } else {
                out.psi[i] = r_cut * ri - offset;
                out.dpsi[i] = r_cut;
                out.lap[i] = 2.0 * r_cut / ri;
            }
        }
        // convexity of the join, positivity of the slope
        for (i, &ri) in grid.radii().iter().enumerate() {
            if ri > r_cut / 2.0 && ri < r_cut && (out.d2psi[i] < -1e-10 || out.dpsi[i] <= 0.0) {
                return Err(Error::NumericalFailure(format!(
                    "zeta join not convex at r = {ri}: zeta' = {}, zeta'' = {}",
                    out.dpsi[i], out.d2psi[i]
                )));
            }
        }
        Ok(out)
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn dpsi(&self) -> &[f64] {
        &self.dpsi
    }

    pub fn d2psi(&self) -> &[f64] {
        &self.d2psi
    }

    pub fn laplacian(&self) -> &[f64] {
        &self.lap
    }

    pub fn bilaplacian(&self) -> &[f64] {
        &self.bilap
    }
}

/// Variance potential `V_psi = ∫ psi |u|^2 dx`.
pub fn virial_v(u: &RadialField, w: &WeightFunction) -> Result<f64> {
    u.check_finite()?;
    Ok(u
        .grid()
        .volume_weights()
        .iter()
        .zip(&w.psi)
        .zip(u.values())
        .map(|((&wv, &p), v)| wv * p * v.norm_sqr())
        .sum())
}

/// Morawetz action `M_psi = 2 Im ∫ ū psi' ∂_r u dx`.
pub fn morawetz_m(u: &RadialField, w: &WeightFunction) -> Result<f64> {
    let d = u.derivative()?;
    Ok(2.0
        * u.grid()
            .volume_weights()
            .iter()
            .zip(&w.dpsi)
            .zip(u.values().iter().zip(&d))
            .map(|((&wv, &dp), (v, di))| wv * dp * (v.conj() * di).im)
            .sum::<f64>())
}

/// The virial identity `V_psi'' = RHS` evaluated on one field:
///
/// `4 ∫ psi'' |∂_r u|^2 - ∫ Δ²psi |u|^2
///  + (2(p-2)/p) ∫ Δpsi |x|^{-a}|u|^p + (4a/p) ∫ psi' |x|^{-a-1}|u|^p
///  - ((4-2b)/(3-b)) ∫ Δpsi |x|^{-b}|u|^{6-2b}
///  - (2b/(3-b)) ∫ psi' |x|^{-b-1}|u|^{6-2b}`
///
/// (the `∇psi·∇(|x|^{-κ})` cross terms reduced radially via
/// `∇psi·∇(|x|^{-κ}) = -κ (psi'/r) r^{-κ}`; the angular-gradient term is
/// identically zero for radial fields and never added). Writing the cross
/// terms with the bounded factor `psi'/r` keeps them on the same singular
/// quadrature weights as the potentials, so for `psi = r^2` the whole
/// expression collapses to `8 K(u)` exactly at the discrete level.
pub fn virial_second_derivative(
    u: &RadialField,
    params: &Params,
    w: &WeightFunction,
) -> Result<f64> {
    let grid = u.grid();
    let r = grid.radii();
    let d = u.derivative()?;
    let w_vol = grid.volume_weights();
    let w_a = grid.singular_weights(params.a)?;
    let w_b = grid.singular_weights(params.b)?;
    let (a, b, p) = (params.a, params.b, params.p);
    let q = 6.0 - 2.0 * b;

    let mut total = 0.0;
    for i in 0..grid.len() {
        let abs_u = u.values()[i].norm();
        let up = abs_u.powf(p);
        let uq = abs_u.powf(q);
        let slope = w.dpsi[i] / r[i];
        total += 4.0 * w_vol[i] * w.d2psi[i] * d[i].norm_sqr();
        total -= w_vol[i] * w.bilap[i] * abs_u * abs_u;
        total += w_a[i] * up * ((2.0 * (p - 2.0) / p) * w.lap[i] + (4.0 * a / p) * slope);
        total -= w_b[i]
            * uq
            * (((4.0 - 2.0 * b) / (3.0 - b)) * w.lap[i] + (2.0 * b / (3.0 - b)) * slope);
    }
    Ok(total)
}

/// One diagnostic row along a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VirialRecord {
    pub t: f64,
    pub v: f64,
    pub m_psi: f64,
    pub vpp_identity: f64,
    /// Centered 3-point second difference of `v` in `t`; `NaN` at the two
    /// endpoint records where no centered stencil exists.
    pub vpp_fd: f64,
}

/// Evaluates `V`, `M_psi` and both sides of the virial identity on a
/// uniformly spaced sequence of snapshots.
pub fn virial_records(
    states: &[(f64, RadialField)],
    params: &Params,
    w: &WeightFunction,
) -> Result<Vec<VirialRecord>> {
    if states.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 snapshots for the virial stencil, got {}",
            states.len()
        )));
    }
    let dt = states[1].0 - states[0].0;
    for pair in states.windows(2) {
        if ((pair[1].0 - pair[0].0) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(Error::Precondition(
                "snapshots are not uniformly spaced in time".into(),
            ));
        }
    }
    let vs: Vec<f64> = states
        .iter()
        .map(|(_, u)| virial_v(u, w))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(states.len());
    for (i, (t, u)) in states.iter().enumerate() {
        let vpp_fd = if i > 0 && i + 1 < states.len() {
            (vs[i + 1] - 2.0 * vs[i] + vs[i - 1]) / (dt * dt)
        } else {
            f64::NAN
        };
        out.push(VirialRecord {
            t: *t,
            v: vs[i],
            m_psi: morawetz_m(u, w)?,
            vpp_identity: virial_second_derivative(u, params, w)?,
            vpp_fd,
        });
    }
    Ok(out)
}

/// Time-averaged localized potential against the Morawetz-type bound:
/// `lhs = (1/T) ∫_0^T ∫_{B(R/4)} |x|^{-b}|u|^{6-2b} dx dt`,
/// `bound = C_mor (R/T + R^{-γ})` with `γ = min{2, p-2+a}`.
///
/// The series must have recorded its localized potential over the ball of
/// radius `R/4`.
pub fn morawetz_timeavg(
    ts: &TimeSeries,
    r_scale: f64,
    t_horizon: f64,
    params: &Params,
) -> Result<(f64, f64)> {
    if !(r_scale > 0.0 && t_horizon > 0.0) {
        return Err(Error::InvalidParams(format!(
            "R = {r_scale}, T = {t_horizon}"
        )));
    }
    if (ts.localized_r - r_scale / 4.0).abs() > 1e-9 * r_scale {
        return Err(Error::Config(format!(
            "series recorded the localized potential over radius {}, need R/4 = {}",
            ts.localized_r,
            r_scale / 4.0
        )));
    }
    let last = *ts.t.last().ok_or_else(|| {
        Error::Precondition("empty time series".into())
    })?;
    if last + 1e-12 < t_horizon {
        return Err(Error::Precondition(format!(
            "series covers t <= {last}, need T = {t_horizon}"
        )));
    }
    // trapezoid over the records inside [0, T]
    let mut integral = 0.0;
    let mut t_cov = 0.0;
    for i in 1..ts.t.len() {
        if ts.t[i] > t_horizon + 1e-12 {
            break;
        }
        let dt = ts.t[i] - ts.t[i - 1];
        integral += 0.5 * dt * (ts.localized_pot[i] + ts.localized_pot[i - 1]);
        t_cov = ts.t[i];
    }
    if t_cov <= 0.0 {
        return Err(Error::Precondition("no records inside the window".into()));
    }
    let gamma = 2.0_f64.min(params.p - 2.0 + params.a);
    let bound = calibration().c_mor * (r_scale / t_cov + r_scale.powf(-gamma));
    Ok((integral / t_cov, bound))
}

/// Concavity certificate of the blow-up proof: true iff every centered
/// second difference of `V_R` along the series stays below
/// `-8(3-b) δ₀ m (1 - tol)`.
pub fn blowup_certificate(
    ts: &TimeSeries,
    params: &Params,
    m: f64,
    delta0: f64,
    r_scale: f64,
) -> Result<bool> {
    if !(delta0 > 0.0) {
        return Err(Error::Precondition(format!(
            "delta0 = {delta0}: datum is not strictly below the threshold"
        )));
    }
    if (ts.virial_r - r_scale).abs() > 1e-9 * r_scale.abs().max(1.0) {
        return Err(Error::Config(format!(
            "series recorded V over radius {}, asked about {}",
            ts.virial_r, r_scale
        )));
    }
    if ts.t.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 records, got {}",
            ts.t.len()
        )));
    }
    let dt = ts.t[1] - ts.t[0];
    let bound = -8.0 * (3.0 - params.b) * delta0 * m * (1.0 - 1e-2);
    for i in 1..ts.t.len() - 1 {
        let vpp = (ts.v_r[i + 1] - 2.0 * ts.v_r[i] + ts.v_r[i - 1]) / (dt * dt);
        if vpp > bound {
            return Ok(false);
        }
    }
    Ok(true)
}
