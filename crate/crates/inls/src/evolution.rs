//! Strang-splitting time integration of the radial equation.
//!
//! The nonlinear substep is an exact pointwise phase rotation (the
//! potential terms preserve `|u|`), and the linear substep acts on
//! `v = r u`, where the radial Laplacian becomes `∂_r^2` with Dirichlet
//! ends. The linear one-step map is a Crank-Nicolson solve with a Numerov
//! mass matrix: the mass and difference matrices share the sine
//! eigenbasis, so the scheme is exactly l2-unitary while gaining
//! fourth-order accuracy in space.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::diagnostics::WeightFunction;
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::functionals;
use crate::params::Params;

fn default_blowup_grad_factor() -> f64 {
    25.0
}
fn default_resolution_sentinel() -> f64 {
    0.2
}
fn default_true() -> bool {
    true
}
fn default_record_every() -> usize {
    100
}
fn default_virial_r() -> f64 {
    8.0
}
fn default_localized_r() -> f64 {
    2.0
}
fn default_boundary_amp_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Blow-up proxy fires when `||∇u|| > factor · ||∇u_0||` together with
    /// a negative trend of the localized variance.
    #[serde(default = "default_blowup_grad_factor")]
    pub blowup_grad_factor: f64,
    /// Maximum admissible fraction of spectral gradient content in the top
    /// decade of wavenumbers before the run is declared under-resolved.
    #[serde(default = "default_resolution_sentinel")]
    pub resolution_sentinel: f64,
    /// `|x|^{-a} |u|^{p-2} u` term (defocusing).
    #[serde(default = "default_true")]
    pub enable_defocusing: bool,
    /// `|x|^{-b} |u|^{4-2b} u` term (focusing).
    #[serde(default = "default_true")]
    pub enable_focusing: bool,
    /// Cutoff radius of the `psi_R` weight behind the `V_R` column.
    #[serde(default = "default_virial_r")]
    pub virial_r: f64,
    /// Ball radius of the recorded localized potential.
    #[serde(default = "default_localized_r")]
    pub localized_r: f64,
    /// Relative boundary amplitude that flags (and optionally stops) a run.
    #[serde(default = "default_boundary_amp_tol")]
    pub boundary_amp_tol: f64,
    /// Long dispersive runs inside the truncated box unavoidably carry
    /// small amplitude to the wall; by default that only raises
    /// `boundary_warning`, but a run can be made to stop there.
    #[serde(default)]
    pub stop_on_boundary: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_max: 1.0,
            record_every: default_record_every(),
            blowup_grad_factor: default_blowup_grad_factor(),
            resolution_sentinel: default_resolution_sentinel(),
            enable_defocusing: true,
            enable_focusing: true,
            virial_r: default_virial_r(),
            localized_r: default_localized_r(),
            boundary_amp_tol: default_boundary_amp_tol(),
            stop_on_boundary: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt = {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParams(format!("t_max = {}", self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every = 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Completed,
    BlowupDetected,
    ResolutionLost,
}

/// Per-record scalars along one evolution.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub gradnorm_sq: Vec<f64>,
    pub k: Vec<f64>,
    pub k_c: Vec<f64>,
    pub pot_a: Vec<f64>,
    pub pot_b: Vec<f64>,
    pub v_r: Vec<f64>,
    pub localized_pot: Vec<f64>,
    pub outcome: Outcome,
    /// Cutoff radius behind the `v_r` column.
    pub virial_r: f64,
    /// Ball radius behind the `localized_pot` column.
    pub localized_r: f64,
    /// `dt` exceeded the `h^2/2` phase-aliasing guard.
    pub cfl_warning: bool,
    /// Boundary amplitude exceeded `boundary_amp_tol` of the field maximum
    /// at some record (truncated-domain reflections are in play).
    pub boundary_warning: bool,
}

/// The linear propagator, prefactored once per `(grid, dt)`.
struct LinearStep {
    n: usize,
    /// Lower/upper entry of `A = M - i (dt/2) D2`.
    off: Complex64,
    /// Thomas-modified diagonal of `A`.
    dprime: Vec<Complex64>,
    radii: Vec<f64>,
}

impl LinearStep {
    fn new(grid: &RadialGrid, dt: f64) -> Result<Self> {
        let n = grid.len();
        let h = grid.spacing();
        let alpha = dt / (h * h);
        let diag = Complex64::new(5.0 / 6.0, alpha);
        let off = Complex64::new(1.0 / 12.0, -alpha / 2.0);
        let mut dprime = Vec::with_capacity(n);
        let mut prev = diag;
        for _ in 0..n {
            if prev.norm() < 1e-300 {
                return Err(Error::NumericalFailure(
                    "tridiagonal pivot underflow in the linear step".into(),
                ));
            }
            dprime.push(prev);
            prev = diag - off * off / prev;
        }
        Ok(Self {
            n,
            off,
            dprime,
            radii: grid.radii().to_vec(),
        })
    }

    /// Advances `u` by one linear step in place.
    fn apply(&self, u: &mut [Complex64]) {
        let n = self.n;
        // v = r u with Dirichlet phantom zeros at both ends
        let mut v: Vec<Complex64> = u
            .iter()
            .zip(&self.radii)
            .map(|(&ui, &ri)| ui * ri)
            .collect();
        // rhs = conj(A) v  (B = M + i(dt/2)D2 is the entrywise conjugate)
        let diag = self.dprime[0]; // unmodified diagonal
        let cd = diag.conj();
        let co = self.off.conj();
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = cd * v[i];
            if i > 0 {
                acc += co * v[i - 1];
            }
            if i + 1 < n {
                acc += co * v[i + 1];
            }
            rhs[i] = acc;
        }
        // Thomas solve with the prefactored diagonal
        for i in 1..n {
            let m = self.off / self.dprime[i - 1];
            let prev = rhs[i - 1];
            rhs[i] -= m * prev;
        }
        v[n - 1] = rhs[n - 1] / self.dprime[n - 1];
        for i in (0..n - 1).rev() {
            v[i] = (rhs[i] - self.off * v[i + 1]) / self.dprime[i];
        }
        for i in 0..n {
            u[i] = v[i] / self.radii[i];
        }
    }
}

struct NonlinearStep {
    /// `r^{-a}` per node, zeroed when the defocusing term is off.
    wa: Vec<f64>,
    /// `r^{-b}` per node, zeroed when the focusing term is off.
    wb: Vec<f64>,
    p_exp: f64,
    b_exp: f64,
}

impl NonlinearStep {
    fn new(grid: &RadialGrid, params: &Params, cfg: &EvolutionConfig) -> Self {
        let wa = grid
            .radii()
            .iter()
            .map(|&r| {
                if cfg.enable_defocusing {
                    r.powf(-params.a)
                } else {
                    0.0
                }
            })
            .collect();
        let wb = grid
            .radii()
            .iter()
            .map(|&r| {
                if cfg.enable_focusing {
                    r.powf(-params.b)
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            wa,
            wb,
            p_exp: params.p - 2.0,
            b_exp: 4.0 - 2.0 * params.b,
        }
    }

    /// Exact phase rotation over time `tau`.
    fn apply(&self, u: &mut [Complex64], tau: f64) {
        for i in 0..u.len() {
            let amp = u[i].norm();
            if amp == 0.0 {
                continue;
            }
            let w = self.wa[i] * amp.powf(self.p_exp) - self.wb[i] * amp.powf(self.b_exp);
            u[i] *= Complex64::from_polar(1.0, -tau * w);
        }
    }
}

/// One Strang step: half nonlinear rotation, full linear solve, half
/// nonlinear rotation.
pub fn step(u: &RadialField, params: &Params, dt: f64) -> Result<RadialField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("dt = {dt}")));
    }
    let cfg = EvolutionConfig {
        dt,
        ..EvolutionConfig::default()
    };
    let lin = LinearStep::new(u.grid(), dt)?;
    let nl = NonlinearStep::new(u.grid(), params, &cfg);
    let mut vals = u.values().to_vec();
    nl.apply(&mut vals, dt / 2.0);
    lin.apply(&mut vals);
    nl.apply(&mut vals, dt / 2.0);
    RadialField::new(Arc::clone(u.grid()), vals)
}

/// Fraction of the spectral gradient content sitting in the top decade of
/// wavenumbers: `Σ_{k > 0.9 k_max} k^2 |v̂_k|^2 / Σ_k k^2 |v̂_k|^2` over the
/// sine modes of `v = r u`.
fn spectral_tail_fraction(
    planner: &mut FftPlanner<f64>,
    radii: &[f64],
    u: &[Complex64],
) -> f64 {
    let n = u.len();
    let m = 2 * (n + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..n {
        let v = u[i] * radii[i];
        buf[i + 1] = v;
        buf[m - 1 - i] = -v;
    }
    planner.plan_fft_forward(m).process(&mut buf);
    let cut = (0.9 * n as f64) as usize;
    let (mut tail, mut total) = (0.0, 0.0);
    for (k, z) in buf.iter().enumerate().take(n + 1).skip(1) {
        let e = (k * k) as f64 * z.norm_sqr();
        total += e;
        if k > cut {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Runs the full evolution, recording every `record_every` steps.
pub fn evolve(u0: &RadialField, params: &Params, cfg: &EvolutionConfig) -> Result<TimeSeries> {
    evolve_with_snapshots(u0, params, cfg).map(|(ts, _)| ts)
}

/// As `evolve`, additionally returning the field at every record time.
pub fn evolve_with_snapshots(
    u0: &RadialField,
    params: &Params,
    cfg: &EvolutionConfig,
) -> Result<(TimeSeries, Vec<(f64, RadialField)>)> {
    cfg.validate()?;
    let grid = u0.grid();
    let h = grid.spacing();
    let lin = LinearStep::new(grid, cfg.dt)?;
    let nl = NonlinearStep::new(grid, params, cfg);
    let psi_weight = WeightFunction::psi_r(grid, cfg.virial_r)?;
    let w_b = grid.singular_weights(params.b)?;
    let localized_w: Vec<f64> = grid
        .radii()
        .iter()
        .zip(&w_b)
        .map(|(&r, &w)| if r <= cfg.localized_r { w } else { 0.0 })
        .collect();
    let q_exp = 6.0 - 2.0 * params.b;
    let mut planner = FftPlanner::new();

    let mut ts = TimeSeries {
        t: Vec::new(),
        mass: Vec::new(),
        energy: Vec::new(),
        gradnorm_sq: Vec::new(),
        k: Vec::new(),
        k_c: Vec::new(),
        pot_a: Vec::new(),
        pot_b: Vec::new(),
        v_r: Vec::new(),
        localized_pot: Vec::new(),
        outcome: Outcome::Completed,
        virial_r: cfg.virial_r,
        localized_r: cfg.localized_r,
        cfl_warning: cfg.dt > h * h / 2.0,
        boundary_warning: false,
    };
    let mut snapshots = Vec::new();

    let mut u = u0.clone();
    let mut g0 = 0.0;

    let n_steps = (cfg.t_max / cfg.dt).round() as usize;
    let mut step_idx = 0usize;
    loop {
        let t = step_idx as f64 * cfg.dt;
        // record
        let rep = functionals::report(&u, params)?;
        if step_idx == 0 {
            g0 = rep.gradnorm_sq;
        }
        let v_r = crate::diagnostics::virial_v(&u, &psi_weight)?;
        let loc: f64 = localized_w
            .iter()
            .zip(u.values())
            .map(|(&w, v)| w * v.norm().powf(q_exp))
            .sum();
        ts.t.push(t);
        ts.mass.push(rep.mass);
        ts.energy.push(rep.energy);
        ts.gradnorm_sq.push(rep.gradnorm_sq);
        ts.k.push(rep.k);
        ts.k_c.push(rep.k_c);
        ts.pot_a.push(rep.pot_a);
        ts.pot_b.push(rep.pot_b);
        ts.v_r.push(v_r);
        ts.localized_pot.push(loc);
        snapshots.push((t, u.clone()));

        // termination checks, blow-up proxy first
        let nrec = ts.t.len();
        if rep.gradnorm_sq > cfg.blowup_grad_factor * cfg.blowup_grad_factor * g0 && g0 > 0.0 {
            let trend_negative = if nrec >= 3 {
                ts.v_r[nrec - 1] - 2.0 * ts.v_r[nrec - 2] + ts.v_r[nrec - 3] < 0.0
            } else {
                true
            };
            if trend_negative {
                ts.outcome = Outcome::BlowupDetected;
                break;
            }
        }
        let tail = spectral_tail_fraction(&mut planner, grid.radii(), u.values());
        if tail > cfg.resolution_sentinel {
            ts.outcome = Outcome::ResolutionLost;
            break;
        }
        let max_amp = u.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let boundary_amp = u
            .values()
            .iter()
            .rev()
            .take(3)
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if max_amp > 0.0 && boundary_amp > cfg.boundary_amp_tol * max_amp {
            ts.boundary_warning = true;
            if cfg.stop_on_boundary {
                ts.outcome = Outcome::ResolutionLost;
                break;
            }
        }

        if step_idx >= n_steps {
            break;
        }
        // advance to the next record point (or the final step)
        let burst = cfg.record_every.min(n_steps - step_idx);
        let mut vals = u.values().to_vec();
        for _ in 0..burst {
            nl.apply(&mut vals, cfg.dt / 2.0);
            lin.apply(&mut vals);
            nl.apply(&mut vals, cfg.dt / 2.0);
        }
        u = RadialField::new(Arc::clone(grid), vals)?;
        step_idx += burst;
    }
    Ok((ts, snapshots))
}

/// Minimum of the recorded localized potential over `[t0, t1]`; the
/// scattering witness is this quantity tending to zero along a global
/// trajectory.
pub fn scattering_indicator(ts: &TimeSeries, t0: f64, t1: f64) -> Result<f64> {
    if ts.outcome != Outcome::Completed {
        return Err(Error::Precondition(format!(
            "series did not complete: {:?}",
            ts.outcome
        )));
    }
    if !(t1 > t0) {
        return Err(Error::InvalidParams(format!("window [{t0}, {t1}]")));
    }
    let vals: Vec<f64> = ts
        .t
        .iter()
        .zip(&ts.localized_pot)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(_, &v)| v)
        .collect();
    if vals.is_empty() {
        return Err(Error::Precondition(format!(
            "no records inside [{t0}, {t1}]"
        )));
    }
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

use crate::grid::RadialGrid;
