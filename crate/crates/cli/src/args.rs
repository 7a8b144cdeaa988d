use std::path::PathBuf;

use appell_sep::scalar::parse_rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "appell", version, about = "Separable potentials from Appell F4: generate, evaluate, verify, simulate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Appell F4 double series
    #[command(subcommand)]
    F4(F4Command),
    /// Potentials of the five families
    #[command(subcommand)]
    Potential(PotentialCommand),
    /// Residuals of the separability systems
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Poisson brackets of first integrals
    #[command(subcommand)]
    Bracket(BracketCommand),
    /// Ellipse billiard with a potential; trajectory CSV and conservation report
    Simulate(SimulateArgs),
    /// Re-run the sign calibration and compare with the committed conventions
    Calibrate(CalibrateArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum F4Command {
    /// Evaluate F4(a, b; c, d; x, y)
    Eval(F4EvalArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialCommand {
    /// Laurent polynomial (canonical text) or closed-form descriptor
    Gen(PotentialGenArgs),
    /// Value at a point
    Eval(PotentialEvalArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCommand {
    /// Apply a separability system to a potential
    Pde(VerifyPdeArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketCommand {
    /// Sample brackets of a family of integrals at random phase points
    Check(BracketCheckArgs),
}

fn rational_text(s: &str) -> Result<String, String> {
    parse_rational(s).map(|_| s.trim().to_string()).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Serialize)]
pub struct F4EvalArgs {
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub d: String,
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, value_parser = rational_text, allow_hyphen_values = true)]
    pub y: String,
    /// Highest diagonal m + n summed
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    /// Sum in exact rational arithmetic
    #[arg(long)]
    pub exact: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Ellipse,
    Jacobi,
    Curved,
    Ellipsoid3d,
    SymmetricN,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    V,
    W,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Laurent,
    F4,
}

/// Family member and the geometry it lives on.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// γ, k or l0 depending on the family
    #[arg(long, allow_hyphen_values = true)]
    pub exponent: Option<f64>,
    /// Ellipse parameter A - B
    #[arg(long, default_value = "1", value_parser = rational_text, allow_hyphen_values = true)]
    pub lambda: String,
    /// Ellipse normalization constant
    #[arg(long = "norm", default_value = "1", value_parser = rational_text, allow_hyphen_values = true)]
    pub norm: String,
    #[arg(long, value_enum, default_value_t = BranchArg::V)]
    pub branch: BranchArg,
    /// Axes a,b,c (symmetric-n: transverse,last)
    #[arg(long, value_delimiter = ',', value_parser = rational_text)]
    pub axes: Option<Vec<String>>,
    /// Curvature sign of the curved family and sys10
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub curvature: i8,
    /// Dimension of the symmetric-n family
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct PotentialGenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = FormArg::Laurent)]
    pub form: FormArg,
    /// Also write the canonical Laurent text to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PotentialEvalArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = FormArg::F4)]
    pub form: FormArg,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub at: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    Eq1,
    Bd,
    Sys8,
    Sys10,
    Sys4,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyPdeArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Potential in canonical Laurent text instead of a family member
    #[arg(long, conflicts_with = "family")]
    pub potential_file: Option<PathBuf>,
    /// Form of a family member; default laurent at integer exponent, f4 otherwise
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    /// Exact residual polynomials instead of finite differences
    #[arg(long)]
    pub exact: bool,
    /// Points file, one comma-separated point per line
    #[arg(long, conflicts_with = "random")]
    pub points: Option<PathBuf>,
    /// Number of random admissible points
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    /// Finite-difference step, relative to each coordinate
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketKind {
    /// K_1..K_n of the ellipsoid billiard together with H
    Ki,
    /// Ellipse billiard K_1 with H, first two axes
    Ellipse,
}

#[derive(Args, Debug, Serialize)]
pub struct BracketCheckArgs {
    #[arg(long, value_enum, default_value_t = BracketKind::Ki)]
    pub kind: BracketKind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', value_parser = rational_text)]
    pub axes: Option<Vec<String>>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bound on |bracket| relative to the sum of its term magnitudes
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long = "A", default_value_t = 3.0)]
    #[serde(rename = "A")]
    pub a: f64,
    #[arg(long = "B", default_value_t = 2.0)]
    #[serde(rename = "B")]
    pub b: f64,
    /// Only the ellipse family drives the billiard
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub exponent: Option<f64>,
    #[arg(long, value_enum, default_value_t = FormArg::Laurent)]
    pub form: FormArg,
    /// Potential in canonical Laurent text instead of a family member
    #[arg(long, conflicts_with = "family")]
    pub potential_file: Option<PathBuf>,
    /// Amplitude multiplying the potential
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.15, allow_hyphen_values = true)]
    pub px0: f64,
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub py0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 50)]
    pub bounces: usize,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,
    /// Trajectory CSV; defaults to trajectory.csv in $APPELL_OUT_DIR when set
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON; defaults to report.json in $APPELL_OUT_DIR when set
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CalibrateArgs {
    /// Restrict to one family
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
}
