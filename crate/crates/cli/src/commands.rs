use std::fs;
use std::path::{Path, PathBuf};

use appell_sep::billiard::{run as run_billiard, SimConfig, SimPotential};
use appell_sep::calibrate::verify_committed;
use appell_sep::hypergeom::{f4_eval, F4Params};
use appell_sep::mechanics::{poisson_bracket, poisson_bracket_exact, IntegralSpec, PhaseFunction, PhasePoint};
use appell_sep::potentials::{
    Branch, ClosedForm, CurvedFamilySpec, EllipseFamilySpec, EllipsoidFamilySpec, Family, FamilySpec,
    JacobiFamilySpec, Potential, PotentialForm, SymmetricNFamilySpec,
};
use appell_sep::residuals::{residual_exact, residual_fd, BDParams, FdConfig, Sys4Form, System};
use appell_sep::scalar::{as_integer, f64_to_rational, parse_rational, rational_to_f64, Rational};
use appell_sep::LaurentPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;
use crate::manifest::{render, RunManifest};
use crate::{CliError, Outcome, OUT_DIR_ENV};

type Result<T> = std::result::Result<T, CliError>;

pub fn path(cmd: &Command) -> Vec<&'static str> {
    match cmd {
        Command::F4(F4Command::Eval(_)) => vec!["f4", "eval"],
        Command::Potential(PotentialCommand::Gen(_)) => vec!["potential", "gen"],
        Command::Potential(PotentialCommand::Eval(_)) => vec!["potential", "eval"],
        Command::Verify(VerifyCommand::Pde(_)) => vec!["verify", "pde"],
        Command::Bracket(BracketCommand::Check(_)) => vec!["bracket", "check"],
        Command::Simulate(_) => vec!["simulate"],
        Command::Calibrate(_) => vec!["calibrate"],
    }
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    let name = path(cmd).join(" ");
    match cmd {
        Command::F4(F4Command::Eval(a)) => f4(&name, a),
        Command::Potential(PotentialCommand::Gen(a)) => potential_gen(&name, a),
        Command::Potential(PotentialCommand::Eval(a)) => potential_eval(&name, a),
        Command::Verify(VerifyCommand::Pde(a)) => verify(&name, a),
        Command::Bracket(BracketCommand::Check(a)) => bracket(&name, a),
        Command::Simulate(a) => simulate(&name, a),
        Command::Calibrate(a) => calibrate(&name, a),
    }
}

fn ok(manifest: &RunManifest, body: &impl Serialize, pass: bool) -> Result<Outcome> {
    Ok(Outcome { output: render(manifest, body)?, pass })
}

fn rational(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}

fn rationals(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| rational(s)).collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_poly(path: &Path) -> Result<LaurentPoly> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.parse()?)
}

#[derive(Serialize)]
struct F4Out {
    value: f64,
    exact_value: Option<String>,
    terms_used: usize,
    tail_estimate: f64,
    in_domain: bool,
}

fn f4(name: &str, a: &F4EvalArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, None);
    let r = rationals(&[a.a.clone(), a.b.clone(), a.c.clone(), a.d.clone(), a.x.clone(), a.y.clone()])?;
    let out = if a.exact {
        let p = F4Params::new(r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone());
        let v = f4_eval(&p, &r[4], &r[5], a.order)?;
        F4Out {
            value: rational_to_f64(&v.value),
            exact_value: Some(v.value.to_string()),
            terms_used: v.terms_used,
            tail_estimate: v.tail_estimate,
            in_domain: v.in_domain,
        }
    } else {
        let f: Vec<f64> = r.iter().map(rational_to_f64).collect();
        let v = f4_eval(&F4Params::new(f[0], f[1], f[2], f[3]), &f[4], &f[5], a.order)?;
        F4Out {
            value: v.value,
            exact_value: None,
            terms_used: v.terms_used,
            tail_estimate: v.tail_estimate,
            in_domain: v.in_domain,
        }
    };
    ok(&manifest, &out, true)
}

fn default_axes(family: Family) -> &'static [&'static str] {
    match family {
        Family::Ellipsoid3d => &["3", "3", "1"],
        Family::SymmetricN => &["3", "1"],
        _ => &["5", "3", "2"],
    }
}

fn axes_or_default(fa: &FamilyArgs, family: Family) -> Result<Vec<Rational>> {
    match &fa.axes {
        Some(v) => rationals(v),
        None => default_axes(family).iter().map(|s| rational(s)).collect(),
    }
}

fn three(axes: Vec<Rational>, what: &str) -> Result<[Rational; 3]> {
    axes.try_into().map_err(|v: Vec<Rational>| CliError::Usage(format!("{what} needs 3 axes, got {}", v.len())))
}

fn family_of(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Ellipse => Family::Ellipse,
        FamilyArg::Jacobi => Family::Jacobi,
        FamilyArg::Curved => Family::Curved,
        FamilyArg::Ellipsoid3d => Family::Ellipsoid3d,
        FamilyArg::SymmetricN => Family::SymmetricN,
    }
}

fn family_spec(fa: &FamilyArgs) -> Result<Option<FamilySpec>> {
    let Some(f) = fa.family else { return Ok(None) };
    let family = family_of(f);
    let g = fa.exponent.ok_or_else(|| CliError::Usage("--family needs --exponent".into()))?;
    let spec = match family {
        Family::Ellipse => {
            let mut s = EllipseFamilySpec::new(g, rational(&fa.lambda)?);
            s.alpha = rational(&fa.norm)?;
            if fa.branch == BranchArg::W {
                s.branch = Branch::W;
            }
            FamilySpec::Ellipse(s)
        }
        Family::Jacobi => {
            let [a, b, c] = three(axes_or_default(fa, family)?, "jacobi")?;
            let s = JacobiFamilySpec { gamma_exp: g, a, b, c };
            s.check()?;
            FamilySpec::Jacobi(s)
        }
        Family::Curved => {
            let [a, b, c] = three(axes_or_default(fa, family)?, "curved")?;
            let s = CurvedFamilySpec { gamma_exp: g, a, b, c, curvature_sign: fa.curvature };
            s.check()?;
            FamilySpec::Curved(s)
        }
        Family::Ellipsoid3d => {
            let [a, b, c] = three(axes_or_default(fa, family)?, "ellipsoid3d")?;
            FamilySpec::Ellipsoid3d(EllipsoidFamilySpec { l0: g, a, b, c })
        }
        Family::SymmetricN => {
            let axes = axes_or_default(fa, family)?;
            let [transverse, last]: [Rational; 2] = axes
                .try_into()
                .map_err(|_| CliError::Usage("symmetric-n takes --axes transverse,last".into()))?;
            let s = SymmetricNFamilySpec { k_exp: g, n: fa.n, transverse, last };
            s.check()?;
            FamilySpec::SymmetricN(s)
        }
    };
    Ok(Some(spec))
}

fn require_spec(fa: &FamilyArgs) -> Result<FamilySpec> {
    family_spec(fa)?.ok_or_else(|| CliError::Usage("--family is required".into()))
}

#[derive(Serialize)]
struct ClosedDescriptor {
    family: Family,
    gamma: f64,
    s: String,
    y: String,
    prefactor: String,
    inner_factor: f64,
    order: usize,
    kappa: Option<String>,
}

impl ClosedDescriptor {
    fn new(spec: &FamilySpec, cf: &ClosedForm) -> Result<Self> {
        let kappa = match as_integer(spec.exponent()) {
            Some(_) => Some(spec.kappa()?.to_string()),
            None => None,
        };
        Ok(ClosedDescriptor {
            family: cf.family,
            gamma: cf.gamma,
            s: cf.s.to_canonical_string(),
            y: cf.y.to_canonical_string(),
            prefactor: cf.homog.to_canonical_string(),
            inner_factor: cf.inner.value(cf.gamma),
            order: cf.order,
            kappa,
        })
    }
}

#[derive(Serialize)]
struct GenOut {
    family: Family,
    exponent: f64,
    nvars: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    laurent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<ClosedDescriptor>,
}

fn potential_gen(name: &str, a: &PotentialGenArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, None);
    let spec = require_spec(&a.family)?;
    let mut out = GenOut { family: spec.family(), exponent: spec.exponent(), nvars: spec.nvars(), laurent: None, closed_form: None };
    match a.form {
        FormArg::Laurent => {
            let text = spec.laurent()?.to_canonical_string();
            if let Some(p) = &a.out {
                write_file(p, &text)?;
            }
            out.laurent = Some(text);
        }
        FormArg::F4 => {
            if a.out.is_some() {
                return Err(CliError::Usage("--out writes Laurent text; use --form laurent".into()));
            }
            out.closed_form = Some(ClosedDescriptor::new(&spec, &spec.closed_form()?)?);
        }
    }
    ok(&manifest, &out, true)
}

#[derive(Serialize)]
struct EvalOut {
    point: Vec<f64>,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    in_domain: Option<bool>,
}

fn potential_eval(name: &str, a: &PotentialEvalArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, None);
    let spec = require_spec(&a.family)?;
    let out = match a.form {
        FormArg::Laurent => EvalOut {
            point: a.at.clone(),
            value: spec.laurent()?.eval_f64(&a.at)?,
            terms_used: None,
            tail_estimate: None,
            in_domain: None,
        },
        FormArg::F4 => {
            let v = spec.closed_form()?.with_order(a.order).eval(&a.at)?;
            EvalOut {
                point: a.at.clone(),
                value: v.value,
                terms_used: Some(v.terms_used),
                tail_estimate: Some(v.tail_estimate),
                in_domain: Some(v.in_domain),
            }
        }
    };
    ok(&manifest, &out, true)
}

fn system_of(a: &VerifyPdeArgs, spec: Option<&FamilySpec>) -> Result<System> {
    let fa = &a.family;
    let family = spec.map_or(Family::Jacobi, FamilySpec::family);
    Ok(match a.system {
        SystemArg::Eq1 => System::Eq1 { lambda: rational(&fa.lambda)? },
        SystemArg::Bd => System::Bd(BDParams::ellipse(&rational(&fa.lambda)?)),
        SystemArg::Sys8 => {
            let [a, b, c] = three(axes_or_default(fa, family)?, "sys8")?;
            System::Sys8 { a, b, c }
        }
        SystemArg::Sys10 => {
            let [a, b, c] = three(axes_or_default(fa, family)?, "sys10")?;
            System::Sys10 { a, b, c, curvature_sign: fa.curvature }
        }
        SystemArg::Sys4 => {
            let axes = match spec {
                Some(FamilySpec::SymmetricN(s)) => s.axes(),
                _ => axes_or_default(fa, family)?,
            };
            let repeated = axes.iter().enumerate().any(|(i, x)| axes[..i].contains(x));
            let form = if repeated { Sys4Form::Cleared } else { Sys4Form::Divided };
            System::Sys4 { axes, form }
        }
    })
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad coordinate {t:?} in points file"))))
                .collect()
        })
        .collect()
}

/// Coordinates in `0.1 <= |x_i| <= 1.5` with random signs; closed forms
/// also need `√|S| + √|Y| <= 0.5`.
fn random_points(v: &dyn Potential, closed: Option<&ClosedForm>, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) + 100_000 {
            return Err(CliError::Usage("could not find admissible random points; pass --points".into()));
        }
        let q: Vec<f64> = (0..v.nvars())
            .map(|_| {
                let m = rng.gen_range(0.1..1.5);
                if rng.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        if let Some(cf) = closed {
            let (Ok(s), Ok(y)) = (cf.s.eval_f64(&q), cf.y.eval_f64(&q)) else { continue };
            if s.abs().sqrt() + y.abs().sqrt() > 0.5 {
                continue;
            }
        }
        out.push(q);
    }
    Ok(out)
}

fn verify(name: &str, a: &VerifyPdeArgs) -> Result<Outcome> {
    let uses_seed = !a.exact && a.points.is_none();
    let manifest = RunManifest::new(name, a, uses_seed.then_some(a.seed));
    let spec = family_spec(&a.family)?;
    let system = system_of(a, spec.as_ref())?;
    let form = match (&spec, a.form) {
        (_, Some(f)) => f,
        (Some(s), None) if as_integer(s.exponent()).is_none() => FormArg::F4,
        _ => FormArg::Laurent,
    };
    let potential: PotentialForm = match (&spec, &a.potential_file) {
        (None, Some(p)) => PotentialForm::Laurent(read_poly(p)?),
        (Some(s), None) => match form {
            FormArg::Laurent => PotentialForm::Laurent(s.laurent()?),
            FormArg::F4 => PotentialForm::Closed(s.closed_form()?.with_order(a.order)),
        },
        _ => return Err(CliError::Usage("give either --family or --potential-file".into())),
    };
    let report = if a.exact {
        let PotentialForm::Laurent(v) = &potential else {
            return Err(CliError::Usage("--exact needs a Laurent potential".into()));
        };
        residual_exact(&system, v)?
    } else {
        let (v, closed): (&dyn Potential, Option<&ClosedForm>) = match &potential {
            PotentialForm::Laurent(p) => (p, None),
            PotentialForm::Closed(c) => (c, Some(c)),
        };
        let points = match &a.points {
            Some(p) => read_points(p)?,
            None => random_points(v, closed, a.random.unwrap_or(20), a.seed)?,
        };
        let mut cfg = FdConfig::default();
        if let Some(h) = a.step {
            cfg.h = h;
        }
        if let Some(t) = a.tolerance {
            cfg.tolerance = t;
        }
        residual_fd(&system, v, &points, &cfg)?
    };
    let pass = report.pass;
    ok(&manifest, &report, pass)
}

#[derive(Serialize)]
struct BracketOut {
    kind: BracketKind,
    axes: Vec<String>,
    pairs: Vec<String>,
    exact_zero: bool,
    samples: usize,
    max_abs: f64,
    max_relative: f64,
    worst_pair: Option<String>,
    tolerance: f64,
    pass: bool,
}

fn bracket(name: &str, a: &BracketCheckArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, Some(a.seed));
    let axes = match &a.axes {
        Some(v) => rationals(v)?,
        None => {
            let n = if a.kind == BracketKind::Ellipse { 2 } else { a.n };
            (0..n).map(|i| Rational::from_integer(((n + 1 - i) as i64).into())).collect()
        }
    };
    let mut named: Vec<(String, IntegralSpec)> = match a.kind {
        BracketKind::Ki => {
            if axes.len() != a.n {
                return Err(CliError::Usage(format!("--n {} but {} axes", a.n, axes.len())));
            }
            (0..a.n).map(|i| (format!("K{}", i + 1), IntegralSpec::ki(axes.clone(), i))).collect()
        }
        BracketKind::Ellipse => {
            let [a0, b0]: [Rational; 2] =
                axes.clone().try_into().map_err(|_| CliError::Usage("ellipse takes --axes A,B".into()))?;
            vec![("K1".into(), IntegralSpec::ellipse_k1(a0, b0))]
        }
    };
    let dim = match a.kind {
        BracketKind::Ki => a.n,
        BracketKind::Ellipse => 2,
    };
    named.push(("H".into(), IntegralSpec::hamiltonian(dim)));
    let funcs = named
        .iter()
        .map(|(_, s)| PhaseFunction::from_integral(s))
        .collect::<appell_sep::Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            pairs.push((i, j));
        }
    }
    let mut exact_zero = true;
    for &(i, j) in &pairs {
        exact_zero &= poisson_bracket_exact(&funcs[i].poly, &funcs[j].poly)?.is_zero();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (mut max_abs, mut max_rel, mut worst) = (0.0f64, 0.0f64, None);
    for _ in 0..a.samples {
        let q = (0..dim)
            .map(|_| {
                let m = rng.gen_range(0.1..1.5);
                if rng.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        let p = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s = PhasePoint::new(q, p)?;
        for &(i, j) in &pairs {
            let (v, scale) = poisson_bracket(&funcs[i], &funcs[j], &s)?;
            let rel = if scale > 0.0 { v.abs() / scale } else { 0.0 };
            max_abs = max_abs.max(v.abs());
            if worst.is_none() || rel > max_rel {
                max_rel = rel;
                worst = Some(format!("{{{}, {}}}", named[i].0, named[j].0));
            }
        }
    }
    let pass = exact_zero && max_rel <= a.tolerance;
    let out = BracketOut {
        kind: a.kind,
        axes: axes.iter().map(ToString::to_string).collect(),
        pairs: pairs.iter().map(|&(i, j)| format!("{{{}, {}}}", named[i].0, named[j].0)).collect(),
        exact_zero,
        samples: a.samples,
        max_abs,
        max_relative: max_rel,
        worst_pair: worst,
        tolerance: a.tolerance,
        pass,
    };
    ok(&manifest, &out, pass)
}

fn out_path(explicit: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    explicit.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)))
}

fn simulate(name: &str, a: &SimulateArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, None);
    let form = match (a.family, &a.potential_file) {
        (None, None) => None,
        (None, Some(p)) => Some(PotentialForm::Laurent(read_poly(p)?)),
        (Some(FamilyArg::Ellipse), None) => {
            let g = a.exponent.ok_or_else(|| CliError::Usage("--family needs --exponent".into()))?;
            let lambda = f64_to_rational(a.a)? - f64_to_rational(a.b)?;
            let spec = FamilySpec::Ellipse(EllipseFamilySpec::new(g, lambda));
            Some(match a.form {
                FormArg::Laurent => PotentialForm::Laurent(spec.laurent()?),
                FormArg::F4 => PotentialForm::Closed(spec.closed_form()?),
            })
        }
        (Some(f), None) => return Err(CliError::Usage(format!("the billiard is planar; {f:?} cannot drive it"))),
        (Some(_), Some(_)) => unreachable!("clap rejects --family with --potential-file"),
    };
    let potential = form.map(|form| SimPotential { form, amplitude: a.alpha });
    let initial = PhasePoint::new(vec![a.x0, a.y0], vec![a.px0, a.py0])?;
    let mut cfg = SimConfig::new(a.a, a.b, potential, initial);
    cfg.dt = a.dt;
    cfg.bounce_max = a.bounces;
    cfg.sample_every = a.sample_every;
    if let Some(t) = a.t_max {
        cfg.t_max = t;
    }
    let (traj, report) = run_billiard(&cfg)?;

    if let Some(p) = out_path(&a.out, "trajectory.csv") {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &traj.samples {
            w.serialize(s)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        let text = manifest.comment_lines() + &String::from_utf8_lossy(&body);
        write_file(&p, &text)?;
    }
    let pass = report.aborted.is_none();
    let doc = render(&manifest, &serde_json::json!({ "report": report, "bounce_events": traj.bounces.len() }))?;
    if let Some(p) = out_path(&a.report, "report.json") {
        write_file(&p, &doc)?;
    }
    Ok(Outcome { output: doc, pass })
}

#[derive(Serialize)]
struct CalibrationOut {
    families: Vec<serde_json::Value>,
    reproduced: bool,
}

fn calibrate(name: &str, a: &CalibrateArgs) -> Result<Outcome> {
    let manifest = RunManifest::new(name, a, None);
    let families: Vec<Family> = match a.family {
        Some(f) => vec![family_of(f)],
        None => Family::ALL.to_vec(),
    };
    let mut out = CalibrationOut { families: Vec::new(), reproduced: true };
    for f in families {
        let entry = match verify_committed(f) {
            Ok(rec) => serde_json::json!({ "family": f, "reproduced": true, "record": rec }),
            Err(e @ appell_sep::Error::Calibration(_)) => {
                out.reproduced = false;
                serde_json::json!({ "family": f, "reproduced": false, "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
        out.families.push(entry);
    }
    let pass = out.reproduced;
    ok(&manifest, &out, pass)
}
