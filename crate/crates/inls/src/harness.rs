//! Experiment orchestration: dispatch of the config commands, the
//! verification suite, deterministic CSV/JSON persistence, and the
//! parallel dichotomy sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{self, ClassificationResult, Verdict};
use crate::config::{Command, ExperimentConfig, InitialConfig, InitialKind, OutputFormat};
use crate::diagnostics::{self, WeightFunction};
use crate::error::{Error, Result};
use crate::evolution::{self, Outcome, TimeSeries};
use crate::field::RadialField;
use crate::functionals;
use crate::grid::RadialGrid;
use crate::groundstate::{self, MinimizerOpts};
use crate::params::Params;

/// JSON numbers carry 17 significant digits; CSV carries 12.
fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::KPlus => "K_PLUS",
        Verdict::KMinus => "K_MINUS",
        Verdict::AboveThreshold => "ABOVE_THRESHOLD",
        Verdict::Zero => "ZERO",
    }
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Completed => "COMPLETED",
        Outcome::BlowupDetected => "BLOWUP_DETECTED",
        Outcome::ResolutionLost => "RESOLUTION_LOST",
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BundleScalars {
    pub m: f64,
    pub s_b: f64,
    pub c_star: f64,
    pub gradnorm_sq_q: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizerScalars {
    pub energy: f64,
    pub k_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct VerifySuite {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Everything one pipeline run reports. `wall_time` is never written to
/// any artifact so outputs stay byte-identical across runs.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub command: Command,
    pub params: Params,
    pub r_max: f64,
    pub n: usize,
    pub seed: u64,
    pub version: &'static str,
    pub bundle: Option<BundleScalars>,
    pub classification: Option<ClassificationResult>,
    pub outcome: Option<Outcome>,
    pub minimizer: Option<MinimizerScalars>,
    pub verify: Option<Vec<VerifySuite>>,
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn verify_passed(&self) -> bool {
        self.verify
            .as_ref()
            .map(|s| s.iter().all(|x| x.passed))
            .unwrap_or(true)
    }

    /// Deterministic JSON rendering (fixed key order, 17 significant
    /// digits, no timing data).
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"command\": \"{}\",", self.command.as_str());
        let _ = writeln!(
            s,
            "  \"params\": {{\"a\": {}, \"b\": {}, \"p\": {}}},",
            json_num(self.params.a),
            json_num(self.params.b),
            json_num(self.params.p)
        );
        let _ = writeln!(
            s,
            "  \"grid\": {{\"r_max\": {}, \"n\": {}}},",
            json_num(self.r_max),
            self.n
        );
        let _ = writeln!(s, "  \"seed\": {},", self.seed);
        let _ = writeln!(s, "  \"version\": \"{}\",", self.version);
        match &self.bundle {
            Some(b) => {
                let _ = writeln!(
                    s,
                    "  \"bundle\": {{\"m\": {}, \"s_b\": {}, \"c_star\": {}, \"gradnorm_sq_q\": {}}},",
                    json_num(b.m),
                    json_num(b.s_b),
                    json_num(b.c_star),
                    json_num(b.gradnorm_sq_q)
                );
            }
            None => s.push_str("  \"bundle\": null,\n"),
        }
        match &self.classification {
            Some(c) => {
                let _ = writeln!(
                    s,
                    "  \"classification\": {{\"verdict\": \"{}\", \"energy\": {}, \"m\": {}, \"k\": {}, \"gradnorm_sq\": {}, \"gradnorm_sq_q\": {}, \"consistent\": {}}},",
                    verdict_str(c.verdict),
                    json_num(c.energy),
                    json_num(c.m),
                    json_num(c.k),
                    json_num(c.gradnorm_sq),
                    json_num(c.gradnorm_sq_q),
                    c.consistent
                );
            }
            None => s.push_str("  \"classification\": null,\n"),
        }
        match self.outcome {
            Some(o) => {
                let _ = writeln!(s, "  \"outcome\": \"{}\",", outcome_str(o));
            }
            None => s.push_str("  \"outcome\": null,\n"),
        }
        match &self.minimizer {
            Some(m) => {
                let _ = writeln!(
                    s,
                    "  \"minimizer\": {{\"energy\": {}, \"k_residual\": {}, \"iterations\": {}, \"converged\": {}}},",
                    json_num(m.energy),
                    json_num(m.k_residual),
                    m.iterations,
                    m.converged
                );
            }
            None => s.push_str("  \"minimizer\": null,\n"),
        }
        match &self.verify {
            Some(suites) => {
                s.push_str("  \"verify\": {\"suites\": [\n");
                for (i, v) in suites.iter().enumerate() {
                    let _ = write!(
                        s,
                        "    {{\"name\": \"{}\", \"passed\": {}, \"detail\": \"{}\"}}",
                        v.name, v.passed, v.detail
                    );
                    s.push_str(if i + 1 < suites.len() { ",\n" } else { "\n" });
                }
                let _ = writeln!(s, "  ], \"passed\": {}}}", self.verify_passed());
            }
            None => s.push_str("  \"verify\": null\n"),
        }
        s.push_str("}\n");
        s
    }
}

/// CSV rendering of a time series with the fixed column schema.
pub fn series_to_csv(ts: &TimeSeries) -> String {
    let mut s = String::from("t,mass,energy,gradnorm_sq,K,K_c,pot_a,pot_b,V_R,localized_pot\n");
    for i in 0..ts.t.len() {
        let row = [
            ts.t[i],
            ts.mass[i],
            ts.energy[i],
            ts.gradnorm_sq[i],
            ts.k[i],
            ts.k_c[i],
            ts.pot_a[i],
            ts.pot_b[i],
            ts.v_r[i],
            ts.localized_pot[i],
        ];
        let line: Vec<String> = row.iter().map(|&x| csv_num(x)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Builds the initial field described by the `[initial]` section.
pub fn build_initial(
    init: &InitialConfig,
    params: &Params,
    grid: &Arc<RadialGrid>,
) -> Result<RadialField> {
    match init.kind {
        InitialKind::Gaussian => {
            let (amp, w) = (init.amplitude, init.width);
            RadialField::from_real_fn(Arc::clone(grid), move |r| {
                amp * (-(r / w) * (r / w)).exp()
            })
        }
        InitialKind::ExplicitQ => {
            Ok(groundstate::explicit_q(params.b, grid)?.scaled(init.amplitude))
        }
        InitialKind::ScaledQ => {
            let q = groundstate::explicit_q(params.b, grid)?;
            let (scaled, _) = groundstate::scale_mass(&q, init.lambda)?;
            Ok(scaled.scaled(init.amplitude))
        }
        InitialKind::File => {
            let path = init.path.as_ref().ok_or_else(|| {
                Error::Config("initial.kind = \"file\" requires initial.path".into())
            })?;
            load_field(path, grid)
        }
    }
}

/// Field persistence: a JSON array of `[re, im]` pairs, one per node.
pub fn load_field(path: &Path, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if pairs.len() != grid.len() {
        return Err(Error::Config(format!(
            "field file has {} samples, grid has {}",
            pairs.len(),
            grid.len()
        )));
    }
    RadialField::new(
        Arc::clone(grid),
        pairs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
}

pub fn save_field(path: &Path, u: &RadialField) -> Result<()> {
    let mut s = String::from("[\n");
    for (i, v) in u.values().iter().enumerate() {
        let _ = write!(s, "  [{}, {}]", json_num(v.re), json_num(v.im));
        s.push_str(if i + 1 < u.values().len() { ",\n" } else { "\n" });
    }
    s.push_str("]\n");
    std::fs::write(path, s)?;
    Ok(())
}

fn write_outputs(
    cfg: &ExperimentConfig,
    out_override: Option<&Path>,
    summary: &RunSummary,
    series: Option<&TimeSeries>,
) -> Result<()> {
    let dir: Option<PathBuf> = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone());
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(&dir)?;
    if cfg.output.formats.contains(&OutputFormat::Json) {
        std::fs::write(dir.join("summary.json"), summary.to_json())?;
    }
    if cfg.output.formats.contains(&OutputFormat::Csv) {
        if let Some(ts) = series {
            std::fs::write(dir.join("series.csv"), series_to_csv(ts))?;
        }
    }
    Ok(())
}

/// The Payne-Sattinger classification and its dichotomy need the
/// threshold-regime hypotheses; violations name the broken one.
fn require_threshold_regime(params: &Params) -> Result<()> {
    if params.threshold_regime() {
        return Ok(());
    }
    let detail = if params.b >= params.a {
        format!(
            "b = {} >= a = {} violates the threshold-theorem hypothesis b < a",
            params.b, params.a
        )
    } else {
        format!(
            "p = {} <= {} violates the threshold-theorem range p > 2 + 2(2-a)/3",
            params.p,
            params.p_lower()
        )
    };
    Err(Error::RegimeViolation(detail))
}

/// Dispatches one configured experiment and persists its artifacts.
pub fn run(cfg: &ExperimentConfig, out_override: Option<&Path>, seed: u64) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = Arc::new(RadialGrid::uniform(cfg.grid.r_max, cfg.grid.n)?);
    let params = cfg.params;

    let mut summary = RunSummary {
        command: cfg.command,
        params,
        r_max: cfg.grid.r_max,
        n: cfg.grid.n,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        bundle: None,
        classification: None,
        outcome: None,
        minimizer: None,
        verify: None,
        wall_time: Duration::ZERO,
    };
    let mut series: Option<TimeSeries> = None;

    if matches!(cfg.command, Command::Classify | Command::Evolve) {
        require_threshold_regime(&params)?;
    }

    match cfg.command {
        Command::Groundstate => {
            let gs = groundstate::bundle(params.b, &params, &grid)?;
            summary.bundle = Some(BundleScalars {
                m: gs.m,
                s_b: gs.s_b,
                c_star: gs.c_star,
                gradnorm_sq_q: gs.gradnorm_sq_q,
            });
            if params.groundstate_regime() {
                let res =
                    groundstate::minimize_double_critical(&params, &grid, &MinimizerOpts::default())?;
                summary.minimizer = Some(MinimizerScalars {
                    energy: res.energy,
                    k_residual: res.k_residual,
                    iterations: res.iterations,
                    converged: res.converged,
                });
            }
        }
        Command::Classify => {
            let gs = groundstate::bundle(params.b, &params, &grid)?;
            let init = cfg.initial.as_ref().expect("validated");
            let u0 = build_initial(init, &params, &grid)?;
            summary.bundle = Some(BundleScalars {
                m: gs.m,
                s_b: gs.s_b,
                c_star: gs.c_star,
                gradnorm_sq_q: gs.gradnorm_sq_q,
            });
            summary.classification = Some(classifier::classify(&u0, &params, &gs)?);
        }
        Command::Evolve => {
            let gs = groundstate::bundle(params.b, &params, &grid)?;
            let init = cfg.initial.as_ref().expect("validated");
            let ev = cfg.evolution.as_ref().expect("validated");
            let u0 = build_initial(init, &params, &grid)?;
            summary.bundle = Some(BundleScalars {
                m: gs.m,
                s_b: gs.s_b,
                c_star: gs.c_star,
                gradnorm_sq_q: gs.gradnorm_sq_q,
            });
            summary.classification = Some(classifier::classify(&u0, &params, &gs)?);
            let ts = evolution::evolve(&u0, &params, ev)?;
            summary.outcome = Some(ts.outcome);
            series = Some(ts);
        }
        Command::Sweep => {
            return Err(Error::Config(
                "sweep configs go through harness::sweep, not harness::run".into(),
            ));
        }
        Command::Verify => {
            summary.verify = Some(verify_suites(&grid)?);
        }
    }
    summary.wall_time = start.elapsed();
    write_outputs(cfg, out_override, &summary, series.as_ref())?;
    Ok(summary)
}

/// One cell of the dichotomy sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub amplitude: f64,
    pub lambda: f64,
    pub verdict: Option<Verdict>,
    pub outcome: Option<Outcome>,
    pub error: Option<String>,
}

/// Runs the amplitude-by-lambda lattice of `scaled_q` data; failures are
/// recorded per cell and never abort the sweep.
pub fn sweep(cfg: &ExperimentConfig, out_override: Option<&Path>, seed: u64) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    if cfg.command != Command::Sweep {
        return Err(Error::Config("not a sweep config".into()));
    }
    let sw = cfg.sweep.as_ref().expect("validated");
    let ev = cfg.evolution.as_ref().expect("validated");
    let grid = Arc::new(RadialGrid::uniform(cfg.grid.r_max, cfg.grid.n)?);
    let params = cfg.params;
    require_threshold_regime(&params)?;
    let gs = Arc::new(groundstate::bundle(params.b, &params, &grid)?);

    let lattice: Vec<(f64, f64)> = sw
        .amplitudes
        .iter()
        .flat_map(|&a| sw.lambdas.iter().map(move |&l| (a, l)))
        .collect();

    let cells: Vec<SweepCell> = lattice
        .par_iter()
        .map(|&(amplitude, lambda)| {
            let work = || -> Result<(Verdict, Outcome)> {
                let q = groundstate::explicit_q(params.b, &grid)?;
                let (scaled, _) = groundstate::scale_mass(&q, lambda)?;
                let u0 = scaled.scaled(amplitude);
                let cls = classifier::classify(&u0, &params, &gs)?;
                let ts = evolution::evolve(&u0, &params, ev)?;
                Ok((cls.verdict, ts.outcome))
            };
            match work() {
                Ok((verdict, outcome)) => SweepCell {
                    amplitude,
                    lambda,
                    verdict: Some(verdict),
                    outcome: Some(outcome),
                    error: None,
                },
                Err(e) => SweepCell {
                    amplitude,
                    lambda,
                    verdict: None,
                    outcome: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let dir: Option<PathBuf> = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone());
    if let Some(dir) = dir {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("sweep.json"), sweep_to_json(&cells, &params, seed))?;
    }
    Ok(cells)
}

fn sweep_to_json(cells: &[SweepCell], params: &Params, seed: u64) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(
        s,
        "  \"params\": {{\"a\": {}, \"b\": {}, \"p\": {}}},",
        json_num(params.a),
        json_num(params.b),
        json_num(params.p)
    );
    let _ = writeln!(s, "  \"seed\": {},", seed);
    s.push_str("  \"cells\": [\n");
    for (i, c) in cells.iter().enumerate() {
        let verdict = c
            .verdict
            .map(|v| format!("\"{}\"", verdict_str(v)))
            .unwrap_or_else(|| "null".into());
        let outcome = c
            .outcome
            .map(|o| format!("\"{}\"", outcome_str(o)))
            .unwrap_or_else(|| "null".into());
        let error = c
            .error
            .as_ref()
            .map(|e| format!("\"{}\"", e.replace('"', "'")))
            .unwrap_or_else(|| "null".into());
        let _ = write!(
            s,
            "    {{\"amplitude\": {}, \"lambda\": {}, \"verdict\": {}, \"outcome\": {}, \"error\": {}}}",
            json_num(c.amplitude),
            json_num(c.lambda),
            verdict,
            outcome,
            error
        );
        s.push_str(if i + 1 < cells.len() { ",\n" } else { "\n" });
    }
    s.push_str("  ]\n}\n");
    s
}

/// Fast identity suites behind the `verify` command: exit-zero means
/// every suite passed.
pub fn verify_suites(grid: &Arc<RadialGrid>) -> Result<Vec<VerifySuite>> {
    let mut suites = Vec::new();

    // explicit Q solves its elliptic equation: K_c(Q) = 0. Q ~ c/r at
    // infinity, so the box integrals are first completed with the
    // closed-form tails; what remains is pure discretization error.
    {
        let mut worst: f64 = 0.0;
        for b in [0.5, 1.0, 1.5] {
            let q = groundstate::explicit_q(b, grid)?;
            let (tail_g, tail_pot) = groundstate::q_tail_integrals(b, grid.r_max())?;
            let g = functionals::gradnorm_sq(&q)? + tail_g;
            let pot = functionals::weighted_norm(&q, b, 6.0 - 2.0 * b)? + tail_pot;
            worst = worst.max(((g - pot) / g).abs());
        }
        // the 5e-4 ceiling is set by b = 1.5, where Q'' ~ r^{-b} costs the
        // fixed derivative stencil part of its order near the origin
        suites.push(VerifySuite {
            name: "explicit_q_pohozaev",
            passed: worst < 5e-4,
            detail: format!("max |K_c(Q)|/grad = {worst:.3e}"),
        });
    }

    // threshold expressed two ways agrees, (p, a) dependence cancels
    {
        let mut rng = ChaCha8Rng::seed_from_u64(20240915);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let a = rng.gen_range(0.3..1.8);
            let b = rng.gen_range(0.1..f64::min(a, 1.9));
            let p_hi = 6.0 - 2.0 * a;
            let p = rng.gen_range((2.0 + (4.0 - 2.0 * a) / 3.0).max(2.01)..p_hi);
            let params = Params::new(a, b, p)?;
            let gs = groundstate::bundle(b, &params, grid)?;
            worst = worst.max(((gs.m - gs.m_formula_alt) / gs.m).abs());
        }
        suites.push(VerifySuite {
            name: "threshold_two_routes",
            passed: worst < 1e-6,
            detail: format!("max rel gap = {worst:.3e}"),
        });
    }

    // sharp constant saturates at Q: the critical ratio
    // pot_b / ||∇Q||^{6-2b} equals S_b^{-(6-2b)} (tail-completed integrals)
    {
        let b = 1.0;
        let params = Params::new(1.2, b, 3.5)?;
        let gs = groundstate::bundle(b, &params, grid)?;
        let ratio = gs.pot_b_q / gs.gradnorm_sq_q.powf((6.0 - 2.0 * b) / 2.0);
        let extremal = gs.s_b.powf(-(6.0 - 2.0 * b));
        let gap = ((ratio - extremal) / extremal).abs();
        suites.push(VerifySuite {
            name: "gn_saturation_at_q",
            passed: gap < 1e-3,
            detail: format!("rel gap = {gap:.3e}"),
        });
    }

    // plain-quadratic virial identity collapses to 8K
    {
        let params = Params::new(0.7, 1.1, 3.8)?;
        let w = WeightFunction::plain_quadratic(grid);
        let u = RadialField::from_complex_fn(Arc::clone(grid), |r| {
            Complex64::from_polar(1.3 * (-0.8 * r * r).exp(), 0.4 * r)
        })?;
        let lhs = diagnostics::virial_second_derivative(&u, &params, &w)?;
        let rep = functionals::report(&u, &params)?;
        let gap = (lhs - 8.0 * rep.k).abs() / (1.0 + (8.0 * rep.k).abs());
        suites.push(VerifySuite {
            name: "virial_reduces_to_8k",
            passed: gap < 1e-8,
            detail: format!("rel gap = {gap:.3e}"),
        });
    }

    // mass-preserving scaling laws
    {
        let params = Params::new(0.5, 1.0, 4.0)?;
        let u = RadialField::from_real_fn(Arc::clone(grid), |r| (-r * r).exp())?;
        let rep0 = functionals::report(&u, &params)?;
        let (u2, _) = groundstate::scale_mass(&u, 2.0)?;
        let rep2 = functionals::report(&u2, &params)?;
        let gaps = [
            ((rep2.mass - rep0.mass) / rep0.mass).abs(),
            ((rep2.gradnorm_sq - 4.0 * rep0.gradnorm_sq) / (4.0 * rep0.gradnorm_sq)).abs(),
            ((rep2.pot_b - 2f64.powf(6.0 - 2.0 * params.b) * rep0.pot_b)
                / (2f64.powf(6.0 - 2.0 * params.b) * rep0.pot_b))
                .abs(),
        ];
        let worst = gaps.into_iter().fold(0.0, f64::max);
        suites.push(VerifySuite {
            name: "scaling_laws",
            passed: worst < 1e-3,
            detail: format!("max rel gap = {worst:.3e}"),
        });
    }

    Ok(suites)
}
