//! Billiard in the ellipse `x²/A + y²/B = 1` with an optional potential.
//!
//! Between bounces the flow of `H = |p|²/2 + V` is advanced with the
//! fourth-order position-extended Forest–Ruth-like (PEFRL) composition, or
//! exactly along straight lines when `V` is absent. Boundary crossings are
//! localized by bisection on `g = x²/A + y²/B - 1`, the impact point is
//! projected onto the boundary and the momentum reflected about the normal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanics::{
    default_refpoint, integral_value, k1_exact, k1_path, IntegralSpec, K1Exact, PathOrder, PathQuadrature, PhasePoint,
};
use crate::poly::LaurentPoly;
use crate::potentials::{Potential, PotentialForm};
use crate::scalar::f64_to_rational;

// PEFRL coefficients (Omelyan, Mryglod and Folk 2002).
const XI: f64 = 0.178_617_895_844_809_1;
const LAMBDA: f64 = -0.212_341_831_062_605_4;
const CHI: f64 = -0.066_264_582_669_818_5;

/// Potential used by the simulator: a Laurent or closed form times an
/// amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SimPotential {
    pub form: PotentialForm,
    pub amplitude: f64,
}

impl SimPotential {
    pub fn laurent(v: LaurentPoly, amplitude: f64) -> Self {
        SimPotential { form: PotentialForm::Laurent(v), amplitude }
    }
}

impl Potential for SimPotential {
    fn nvars(&self) -> usize {
        2
    }
    fn value(&self, q: &[f64]) -> Result<f64> {
        let v = match &self.form {
            PotentialForm::Laurent(p) => p.value(q)?,
            PotentialForm::Closed(c) => c.value(q)?,
        };
        Ok(self.amplitude * v)
    }
    fn singular_vars(&self) -> Vec<usize> {
        match &self.form {
            PotentialForm::Laurent(p) => p.singular_vars(),
            PotentialForm::Closed(c) => Potential::singular_vars(c),
        }
    }
    fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        let g = match &self.form {
            PotentialForm::Laurent(p) => p.gradient(q)?,
            PotentialForm::Closed(c) => c.gradient(q)?,
        };
        Ok(g.into_iter().map(|d| self.amplitude * d).collect())
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub a: f64,
    pub b: f64,
    pub potential: Option<SimPotential>,
    pub initial: PhasePoint,
    pub dt: f64,
    pub t_max: f64,
    pub bounce_max: usize,
    /// Bound on `|g|` at a localized impact.
    pub tol: f64,
    pub refpoint: [f64; 2],
    /// Record a sample every this many steps (bounces are always recorded).
    pub sample_every: usize,
    /// Abort when a singular axis of `V` comes closer than this.
    pub pole_margin: f64,
}

impl SimConfig {
    pub fn new(a: f64, b: f64, potential: Option<SimPotential>, initial: PhasePoint) -> Self {
        SimConfig {
            a,
            b,
            potential,
            initial,
            dt: 1e-3,
            t_max: f64::INFINITY,
            bounce_max: 50,
            tol: 1e-14,
            refpoint: default_refpoint(a, b),
            sample_every: 100,
            pole_margin: 1e-3,
        }
    }

    pub fn g(&self, q: &[f64]) -> f64 {
        q[0] * q[0] / self.a + q[1] * q[1] / self.b - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.a > 0.0 && self.b > 0.0) {
            return bad("axes must be positive");
        }
        if self.initial.dim() != 2 {
            return Err(Error::Arity { expected: 2, got: self.initial.dim() });
        }
        if self.g(&self.initial.q) >= 0.0 {
            return bad("initial point is not strictly inside the ellipse");
        }
        if self.dt.is_nan() || self.dt <= 0.0 || self.tol.is_nan() || self.tol <= 0.0 {
            return bad("dt and tol must be positive");
        }
        if self.t_max.is_infinite() && self.bounce_max == usize::MAX {
            return bad("no stopping condition");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be positive");
        }
        if let Some(v) = &self.potential {
            if v.nvars() != 2 {
                return Err(Error::Arity { expected: 2, got: v.nvars() });
            }
            self.check_poles(v, &self.initial.q)?;
        }
        Ok(())
    }

    fn check_poles(&self, v: &SimPotential, q: &[f64]) -> Result<()> {
        self.check_step(v, q, q)
    }

    /// Pole guard for a step `from -> to`: both ends keep the margin and no
    /// singular coordinate changes sign in between.
    fn check_step(&self, v: &SimPotential, from: &[f64], to: &[f64]) -> Result<()> {
        for i in v.singular_vars() {
            if to[i].abs() < self.pole_margin || from[i].signum() != to[i].signum() {
                return Err(Error::Simulation(format!(
                    "trajectory within {} of the singular axis x{i} = 0",
                    self.pole_margin
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BounceEvent {
    pub time: f64,
    pub point: [f64; 2],
    pub p_in: [f64; 2],
    pub p_out: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "K1tilde")]
    pub k1tilde: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub bisection_iterations: usize,
    pub max_impact_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub h0: f64,
    pub k1tilde0: f64,
    pub max_rel_drift_h: f64,
    pub max_rel_drift_k1tilde: f64,
    /// Largest change of `K̃₁` across a single reflection.
    pub max_k1tilde_jump_at_bounce: f64,
    pub bounces: usize,
    pub samples: usize,
    pub t_end: f64,
    pub k1_backend: &'static str,
    pub refpoint: [f64; 2],
    pub stats: IntegratorStats,
    /// Reason for an early stop, such as approaching a pole.
    pub aborted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub bounces: Vec<BounceEvent>,
}

/// `p - 2 (p·n) n` with `n` the unit outward normal at `point`.
pub fn reflect(point: [f64; 2], p: [f64; 2], a: f64, b: f64, tol: f64) -> Result<[f64; 2]> {
    let g = point[0] * point[0] / a + point[1] * point[1] / b - 1.0;
    if g.abs() > tol {
        return Err(Error::Simulation(format!("reflection off the boundary (g = {g:e})")));
    }
    let n = [point[0] / a, point[1] / b];
    let norm = n[0].hypot(n[1]);
    let n = [n[0] / norm, n[1] / norm];
    let d = p[0] * n[0] + p[1] * n[1];
    Ok([p[0] - 2.0 * d * n[0], p[1] - 2.0 * d * n[1]])
}

/// Radial projection onto the boundary.
pub fn project(point: [f64; 2], a: f64, b: f64) -> [f64; 2] {
    let s = (point[0] * point[0] / a + point[1] * point[1] / b).sqrt();
    [point[0] / s, point[1] / s]
}

/// Exact time for the free ray `q + t p` to reach the boundary.
pub fn quadratic_hit_time(q: [f64; 2], p: [f64; 2], a: f64, b: f64) -> f64 {
    let qa = p[0] * p[0] / a + p[1] * p[1] / b;
    let qb = 2.0 * (q[0] * p[0] / a + q[1] * p[1] / b);
    let qc = q[0] * q[0] / a + q[1] * q[1] / b - 1.0;
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    // stable form of the positive root, qc < 0 inside
    if qb >= 0.0 {
        -2.0 * qc / (qb + disc)
    } else {
        (disc - qb) / (2.0 * qa)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct State {
    q: [f64; 2],
    p: [f64; 2],
}

/// Bisection for the root of `f` on `[lo, hi]` with `f(lo) < 0 < f(hi)`,
/// until `|f| <= tol` or the bracket stops shrinking.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> Result<f64>, iters: &mut usize) -> Result<f64> {
    loop {
        let mid = 0.5 * (lo + hi);
        *iters += 1;
        let v = f(mid)?;
        if v.abs() <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Time until the free ray hits the boundary, found by bisection.
pub fn free_flight_hit(q: [f64; 2], p: [f64; 2], a: f64, b: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| -> Result<f64> {
        let x = q[0] + t * p[0];
        let y = q[1] + t * p[1];
        Ok(x * x / a + y * y / b - 1.0)
    };
    if p == [0.0, 0.0] {
        return Ok(f64::INFINITY);
    }
    let mut hi = 1.0;
    while g(hi)? <= 0.0 {
        hi *= 2.0;
    }
    let mut iters = 0;
    bisect(0.0, hi, tol, g, &mut iters)
}

fn pefrl(s: State, h: f64, v: &SimPotential) -> Result<State> {
    let State { mut q, mut p } = s;
    let drift = |q: &mut [f64; 2], p: &[f64; 2], c: f64| {
        q[0] += c * h * p[0];
        q[1] += c * h * p[1];
    };
    let kick = |q: &[f64; 2], p: &mut [f64; 2], c: f64| -> Result<()> {
        let f = v.gradient(q)?;
        p[0] -= c * h * f[0];
        p[1] -= c * h * f[1];
        Ok(())
    };
    drift(&mut q, &p, XI);
    kick(&q, &mut p, 0.5 * (1.0 - 2.0 * LAMBDA))?;
    drift(&mut q, &p, CHI);
    kick(&q, &mut p, LAMBDA)?;
    drift(&mut q, &p, 1.0 - 2.0 * (CHI + XI));
    kick(&q, &mut p, LAMBDA)?;
    drift(&mut q, &p, CHI);
    kick(&q, &mut p, 0.5 * (1.0 - 2.0 * LAMBDA))?;
    drift(&mut q, &p, XI);
    Ok(State { q, p })
}

/// Outcome of one call to [`integrate_segment`].
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub q: [f64; 2],
    pub p: [f64; 2],
    /// Time actually advanced.
    pub elapsed: f64,
    /// Impact point if the segment ended on the boundary (momentum not yet
    /// reflected).
    pub hit: Option<[f64; 2]>,
}

/// Advances by at most `dt`, stopping early at the boundary.
pub fn integrate_segment(
    cfg: &SimConfig,
    q: [f64; 2],
    p: [f64; 2],
    dt: f64,
    stats: &mut IntegratorStats,
) -> Result<Segment> {
    let s0 = State { q, p };
    let advance = |h: f64| -> Result<State> {
        match &cfg.potential {
            Some(v) => pefrl(s0, h, v),
            None => Ok(State { q: [q[0] + h * p[0], q[1] + h * p[1]], p }),
        }
    };
    stats.steps += 1;
    let full = advance(dt)?;
    if let Some(v) = &cfg.potential {
        cfg.check_step(v, &q, &full.q)?;
    }
    if cfg.g(&full.q) <= 0.0 {
        return Ok(Segment { q: full.q, p: full.p, elapsed: dt, hit: None });
    }
    let tau = bisect(0.0, dt, cfg.tol, |h| Ok(cfg.g(&advance(h)?.q)), &mut stats.bisection_iterations)?;
    let at = advance(tau)?;
    stats.max_impact_residual = stats.max_impact_residual.max(cfg.g(&at.q).abs());
    Ok(Segment { q: project(at.q, cfg.a, cfg.b), p: at.p, elapsed: tau, hit: Some(at.q) })
}

enum K1Eval {
    None,
    Exact(K1Exact, f64),
    Path(SimPotential, PathQuadrature),
}

impl K1Eval {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let Some(v) = &cfg.potential else { return Ok(K1Eval::None) };
        let exact = match &v.form {
            PotentialForm::Laurent(p) => {
                let (a, b) = (f64_to_rational(cfg.a)?, f64_to_rational(cfg.b)?);
                k1_exact(p, &a, &b).ok()
            }
            PotentialForm::Closed(_) => None,
        };
        Ok(match exact {
            Some(k) => K1Eval::Exact(k, v.amplitude),
            None => K1Eval::Path(v.clone(), PathQuadrature::default()),
        })
    }

    fn backend(&self) -> &'static str {
        match self {
            K1Eval::None => "none",
            K1Eval::Exact(..) => "exact",
            K1Eval::Path(..) => "quadrature",
        }
    }

    fn value(&self, cfg: &SimConfig, q: [f64; 2]) -> Result<f64> {
        match self {
            K1Eval::None => Ok(0.0),
            K1Eval::Exact(k, amp) => Ok(amp * k.gauged(&q, &cfg.refpoint)?),
            K1Eval::Path(v, quad) => k1_path(v, cfg.a, cfg.b, q, cfg.refpoint, PathOrder::XFirst, quad),
        }
    }
}

struct Recorder<'a> {
    cfg: &'a SimConfig,
    k1: K1Eval,
    h_spec: IntegralSpec,
    k_spec: IntegralSpec,
    samples: Vec<Sample>,
}

impl Recorder<'_> {
    fn sample(&mut self, t: f64, q: [f64; 2], p: [f64; 2]) -> Result<Sample> {
        let s = PhasePoint { q: q.to_vec(), p: p.to_vec() };
        let pot = self.cfg.potential.as_ref().map(|v| v as &dyn Potential);
        let h = integral_value(&self.h_spec, &s, pot)?;
        let k1tilde = integral_value(&self.k_spec, &s, None)? + self.k1.value(self.cfg, q)?;
        let row = Sample { t, x: q[0], y: q[1], px: p[0], py: p[1], h, k1tilde };
        self.samples.push(row.clone());
        Ok(row)
    }
}

fn rel(x: f64, x0: f64) -> f64 {
    (x - x0).abs() / x0.abs().max(f64::MIN_POSITIVE)
}

/// Alternates flight and reflection until `t_max` or `bounce_max`.
pub fn run(cfg: &SimConfig) -> Result<(Trajectory, ConservationReport)> {
    cfg.validate()?;
    let (fa, fb) = (f64_to_rational(cfg.a)?, f64_to_rational(cfg.b)?);
    let mut rec = Recorder {
        cfg,
        k1: K1Eval::new(cfg)?,
        h_spec: IntegralSpec::hamiltonian(2),
        k_spec: IntegralSpec::ellipse_k1(fa, fb),
        samples: Vec::new(),
    };
    let mut q = [cfg.initial.q[0], cfg.initial.q[1]];
    let mut p = [cfg.initial.p[0], cfg.initial.p[1]];
    let mut t = 0.0;
    let mut stats = IntegratorStats::default();
    let mut bounces = Vec::new();
    let mut aborted = None;
    let mut max_jump = 0.0f64;
    let first = rec.sample(t, q, p)?;
    let mut since_sample = 0;

    while t < cfg.t_max && bounces.len() < cfg.bounce_max {
        let step = match &cfg.potential {
            Some(_) => cfg.dt.min(cfg.t_max - t),
            None => {
                let hit = free_flight_hit(q, p, cfg.a, cfg.b, cfg.tol)?;
                (hit * (1.0 + 1e-9) + 1e-300).min(cfg.t_max - t)
            }
        };
        let seg = match integrate_segment(cfg, q, p, step, &mut stats) {
            Ok(s) => s,
            Err(Error::Simulation(msg)) => {
                aborted = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        };
        t += seg.elapsed;
        q = seg.q;
        p = seg.p;
        since_sample += 1;
        if seg.hit.is_some() {
            let before = rec.sample(t, q, p)?;
            let p_out = reflect(q, p, cfg.a, cfg.b, 1e-12)?;
            bounces.push(BounceEvent { time: t, point: q, p_in: p, p_out });
            p = p_out;
            let after = rec.sample(t, q, p)?;
            max_jump = max_jump.max(rel(after.k1tilde, before.k1tilde));
            since_sample = 0;
        } else if since_sample >= cfg.sample_every {
            rec.sample(t, q, p)?;
            since_sample = 0;
        }
    }
    if rec.samples.last().map(|s| s.t) != Some(t) {
        rec.sample(t, q, p)?;
    }

    let max_h = rec.samples.iter().map(|s| rel(s.h, first.h)).fold(0.0, f64::max);
    let max_k = rec.samples.iter().map(|s| rel(s.k1tilde, first.k1tilde)).fold(0.0, f64::max);
    let report = ConservationReport {
        h0: first.h,
        k1tilde0: first.k1tilde,
        max_rel_drift_h: max_h,
        max_rel_drift_k1tilde: max_k,
        max_k1tilde_jump_at_bounce: max_jump,
        bounces: bounces.len(),
        samples: rec.samples.len(),
        t_end: t,
        k1_backend: rec.k1.backend(),
        refpoint: cfg.refpoint,
        stats,
        aborted,
    };
    Ok((Trajectory { samples: rec.samples, bounces }, report))
}

/// Runs independent simulations on separate threads; results keep the
/// order of `configs`.
pub fn run_many(configs: &[SimConfig]) -> Vec<Result<(Trajectory, ConservationReport)>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run(c))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    })
}
