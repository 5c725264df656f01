//! Command surface: argument parsing, session configuration and dispatch.
//!
//! [`run`] never touches the process; it returns the text to print and the
//! exit code, so the binary and the tests share one path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetidf_core::calculus::total_derivative;
use jetidf_core::cdiff::{adjoint, linearization, CDiffOp, ModElem, ModuleDesc, MultiCDiffOp};
use jetidf_core::derivations::{bracket, KappaField};
use jetidf_core::form::wedge;
use jetidf_core::secondary::{
    covector_functional, d1, euler, helmholtz, insert, is_secondary_tensor, lie, volume, SecondaryForm,
};
use jetidf_core::{differential, kappa, AlgebraError, BundleConfig, FormExpr, MultiIndex, SlotKind};
use jetidf_lab::{cohomology_dim, one_line_samples, solve_preimage, FormMap, LabError, Report, TruncationSpec};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::checks::{run_all, Sizes, SuiteResult};
use crate::printer::{self, Format};
use crate::syntax::{self, ParseError};

/// Exit code for a computation refused by the algebra (out of domain).
pub const EXIT_DOMAIN: i32 = 1;
/// Exit code for unreadable input, flags or configuration.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "jetidf", version, about = "Iterated differential forms on jet spaces")]
pub struct Cli {
    #[command(flatten)]
    pub session: SessionArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct SessionArgs {
    /// Base dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Fiber dimension.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Number of de Rham slots.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Jet order bound for truncated slices.
    #[arg(long, global = true)]
    pub max_jet: Option<u32>,
    /// Polynomial degree bound for truncated slices.
    #[arg(long, global = true)]
    pub trunc_deg: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with any of the keys above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
    format: Option<Format>,
    #[serde(alias = "max-jet")]
    max_jet: Option<u32>,
    #[serde(alias = "trunc-deg")]
    trunc_deg: Option<u32>,
    seed: Option<u64>,
}

/// Resolved settings for one invocation; flags override the file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub bundle: BundleConfig,
    pub format: Format,
    pub max_jet: u32,
    pub trunc_deg: u32,
    pub seed: u64,
}

impl SessionConfig {
    pub fn resolve(a: &SessionArgs) -> Result<Self, Failure> {
        let file = match &a.config {
            None => FileConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
            }
        };
        let bundle = BundleConfig::new(
            a.n.or(file.n).unwrap_or(1),
            a.m.or(file.m).unwrap_or(1),
            a.k.or(file.k).unwrap_or(1),
        )
        .map_err(|e| Failure::usage(e.to_string()))?;
        Ok(SessionConfig {
            bundle,
            format: a.format.or(file.format).unwrap_or(Format::Text),
            max_jet: a.max_jet.or(file.max_jet).unwrap_or(2),
            trunc_deg: a.trunc_deg.or(file.trunc_deg).unwrap_or(2),
            seed: a.seed.or(file.seed).unwrap_or(0),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Module {
    /// Functions, even basis.
    F,
    /// `Lambda_{k-1} kappa`.
    Kappa,
    /// The adjoint of kappa (covectors).
    #[value(name = "kappa^")]
    KappaAdj,
    /// Top horizontal forms.
    B,
}

impl Module {
    fn desc(self, cfg: BundleConfig) -> ModuleDesc {
        match self {
            Module::F => ModuleDesc::scalar(false),
            Module::Kappa => ModuleDesc::kappa(cfg),
            Module::KappaAdj => ModuleDesc::kappa(cfg).adjoint(),
            Module::B => ModuleDesc::top(cfg),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SecondaryKind {
    /// A density `A`, read as `A d_k x^1 ... d_k x^n` unless already a top form.
    Lagrangian,
    /// A covector on kappa (degree one).
    Covector,
    /// An operator kappa -> kappa^ (degree two).
    Operator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapName {
    D,
    Dv,
    Dh,
    /// Total derivative `D_mu`.
    #[value(name = "Dtot")]
    Dtot,
    Euler,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a form in canonical order.
    Normalize {
        #[arg(allow_hyphen_values = true)]
        form: String,
    },
    /// Wedge product of two forms.
    Wedge {
        #[arg(allow_hyphen_values = true)]
        left: String,
        #[arg(allow_hyphen_values = true)]
        right: String,
    },
    /// Full differential in one slot.
    D {
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, default_value_t = 1)]
        slot: usize,
    },
    /// Vertical differential in one slot.
    Dv {
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, default_value_t = 1)]
        slot: usize,
    },
    /// Horizontal differential in one slot.
    Dh {
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, default_value_t = 1)]
        slot: usize,
    },
    /// Exchange slot 1 with the given slot.
    Kappa {
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, default_value_t = 1)]
        slot: usize,
    },
    /// Total derivative `D_sigma`, sigma given as `1,0`.
    #[command(name = "Dtot")]
    Dtot {
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long)]
        sigma: String,
    },
    /// Euler-Lagrange expression of a density.
    El {
        #[arg(allow_hyphen_values = true)]
        density: String,
    },
    /// Variational test of a covector.
    Helmholtz {
        #[arg(allow_hyphen_values = true)]
        covector: String,
    },
    /// Adjoint of an operator.
    Adjoint {
        #[arg(allow_hyphen_values = true)]
        operator: String,
        #[arg(long, value_enum, default_value = "f")]
        source: Module,
        #[arg(long, value_enum, default_value = "f")]
        target: Module,
    },
    /// Linearization of an element, an operator kappa -> module.
    Lin {
        #[arg(allow_hyphen_values = true)]
        element: String,
        #[arg(long, value_enum, default_value = "f")]
        module: Module,
    },
    /// Bracket of two fields.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        left: String,
        #[arg(allow_hyphen_values = true)]
        right: String,
    },
    /// Secondary differential.
    D1 {
        #[arg(allow_hyphen_values = true)]
        input: String,
        #[arg(long, value_enum, default_value = "covector")]
        kind: SecondaryKind,
        /// Fields frozen in front when the result has degree three or more.
        #[arg(long)]
        at: Vec<String>,
    },
    /// Lie derivative of a secondary form along a field.
    Lie {
        #[arg(allow_hyphen_values = true)]
        field: String,
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, value_enum, default_value = "covector")]
        kind: SecondaryKind,
    },
    /// Insert a field into a secondary form.
    Insert {
        #[arg(allow_hyphen_values = true)]
        field: String,
        #[arg(allow_hyphen_values = true)]
        form: String,
        #[arg(long, value_enum, default_value = "covector")]
        kind: SecondaryKind,
    },
    /// Secondary covariant tensor test of a covector or of an operator kappa -> F.
    TensorCheck {
        #[arg(allow_hyphen_values = true)]
        input: String,
    },
    /// Truncated cohomology, preimage search or One Line samples.
    Cohomology(CohomologyArgs),
    /// Run the randomized self-check suites.
    Selfcheck {
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Debug)]
pub struct CohomologyArgs {
    #[arg(long, value_enum, default_value = "dh")]
    pub map: MapName,
    /// Slot of the differential; defaults to k.
    #[arg(long)]
    pub slot: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub mu: usize,
    /// Multidegree of the slice, e.g. `0,1` (with `--target`, of the
    /// preimage; with `--one-line`, the k-1 lower degrees); defaults to zeros.
    #[arg(long)]
    pub grade: Option<String>,
    /// Degree bound in the base coordinates.
    #[arg(long, default_value_t = 1)]
    pub x_deg: u32,
    /// Map into the slice; omitted means zero.
    #[arg(long, value_enum)]
    pub incoming: Option<MapName>,
    /// Search a preimage of this form instead of computing dimensions.
    #[arg(long)]
    pub target: Option<String>,
    /// Sample closed operators and search w-preimages.
    #[arg(long)]
    pub one_line: bool,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Operator degree for `--one-line`; defaults to n-1.
    #[arg(long)]
    pub q: Option<usize>,
    /// Differential order bound for `--one-line`.
    #[arg(long, default_value_t = 1)]
    pub op_order: u32,
}

/// A refused invocation.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { code: EXIT_USAGE, message }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::usage(format!("parse error: {e}"))
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        let code = match e {
            AlgebraError::InvalidConfig(_) | AlgebraError::SlotOutOfRange { .. } | AlgebraError::CoordinateOutOfRange(_) => {
                EXIT_USAGE
            }
            _ => EXIT_DOMAIN,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Algebra(a) => a.into(),
            LabError::Spec(_) | LabError::Unbounded(_) => Failure::usage(e.to_string()),
            _ => Failure { code: EXIT_DOMAIN, message: e.to_string() },
        }
    }
}

/// What a command produced.
pub enum Output {
    Form(FormExpr),
    Field(KappaField),
    Element(ModElem),
    Operator(CDiffOp),
    /// One line of text plus its structured form.
    Verdict(String, Value),
    Report(Report),
    Suites(Vec<SuiteResult>),
}

/// Printed output and exit code of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let session = match SessionConfig::resolve(&cli.session) {
        Ok(s) => s,
        Err(f) => return failure(f),
    };
    match execute(&cli.command, &session) {
        Ok(out) => {
            let code = match &out {
                Output::Suites(s) if !s.iter().all(SuiteResult::passed) => EXIT_DOMAIN,
                _ => 0,
            };
            Outcome { stdout: render(&out, command_name(&cli.command), &session), stderr: String::new(), code }
        }
        Err(f) => failure(f),
    }
}

fn failure(f: Failure) -> Outcome {
    Outcome { stdout: String::new(), stderr: format!("error: {}\n", f.message), code: f.code }
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Normalize { .. } => "normalize",
        Command::Wedge { .. } => "wedge",
        Command::D { .. } => "d",
        Command::Dv { .. } => "dv",
        Command::Dh { .. } => "dh",
        Command::Kappa { .. } => "kappa",
        Command::Dtot { .. } => "Dtot",
        Command::El { .. } => "el",
        Command::Helmholtz { .. } => "helmholtz",
        Command::Adjoint { .. } => "adjoint",
        Command::Lin { .. } => "lin",
        Command::Bracket { .. } => "bracket",
        Command::D1 { .. } => "d1",
        Command::Lie { .. } => "lie",
        Command::Insert { .. } => "insert",
        Command::TensorCheck { .. } => "tensor-check",
        Command::Cohomology(_) => "cohomology",
        Command::Selfcheck { .. } => "selfcheck",
    }
}

fn ints(s: &str, what: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| Failure::usage(format!("bad {what} `{s}`"))))
        .collect()
}

fn lagrangian(src: &str, cfg: BundleConfig) -> Result<FormExpr, Failure> {
    let f = syntax::parse_form(src, cfg)?;
    Ok(if f.as_poly().is_some() { &f * &volume(cfg) } else { f })
}

fn covector(src: &str, cfg: BundleConfig) -> Result<ModElem, Failure> {
    Ok(syntax::parse_element(src, cfg, &ModuleDesc::kappa(cfg).adjoint())?)
}

fn secondary(src: &str, cfg: BundleConfig, kind: SecondaryKind) -> Result<MultiCDiffOp, Failure> {
    Ok(match kind {
        SecondaryKind::Lagrangian => {
            return Err(Failure::usage("a density is a degree-zero class; use el or d1 --kind lagrangian".into()))
        }
        SecondaryKind::Covector => MultiCDiffOp::from_covector(covector(src, cfg)?)?,
        SecondaryKind::Operator => {
            let kappa = ModuleDesc::kappa(cfg);
            MultiCDiffOp::from_operator(syntax::parse_operator(src, cfg, &kappa, &kappa.adjoint())?)?
        }
    })
}

/// Degree one prints as a covector, degree two as an operator; higher
/// degrees freeze the leading arguments at `at`.
fn show_multi(theta: &MultiCDiffOp, at: &[KappaField]) -> Result<Output, Failure> {
    match theta.arity {
        1 => Ok(Output::Element(theta.eval(&[])?)),
        p if at.len() + 2 == p => Ok(Output::Operator(theta.freeze(at)?)),
        p => Err(Failure::usage(format!("a degree-{p} result needs {} --at field(s), got {}", p - 2, at.len()))),
    }
}

fn form_map(name: MapName, slot: usize, mu: usize) -> FormMap {
    match name {
        MapName::D => FormMap::Differential { slot, kind: SlotKind::Full },
        MapName::Dv => FormMap::Differential { slot, kind: SlotKind::Vertical },
        MapName::Dh => FormMap::Differential { slot, kind: SlotKind::Horizontal },
        MapName::Dtot => FormMap::TotalDerivative { mu },
        MapName::Euler => FormMap::Euler,
    }
}

pub fn execute(cmd: &Command, s: &SessionConfig) -> Result<Output, Failure> {
    let cfg = s.bundle;
    let form = |src: &str| syntax::parse_form(src, cfg);
    let diff = |src: &str, slot: usize, kind| -> Result<Output, Failure> {
        cfg.check_slot(slot)?;
        Ok(Output::Form(differential(slot, kind, &form(src)?)?))
    };
    Ok(match cmd {
        Command::Normalize { form: f } => Output::Form(form(f)?),
        Command::Wedge { left, right } => Output::Form(wedge(&form(left)?, &form(right)?)?),
        Command::D { form: f, slot } => diff(f, *slot, SlotKind::Full)?,
        Command::Dv { form: f, slot } => diff(f, *slot, SlotKind::Vertical)?,
        Command::Dh { form: f, slot } => diff(f, *slot, SlotKind::Horizontal)?,
        Command::Kappa { form: f, slot } => {
            cfg.check_slot(*slot)?;
            Output::Form(kappa(*slot, &form(f)?)?)
        }
        Command::Dtot { form: f, sigma } => {
            let sigma = MultiIndex::new(ints(sigma, "multi-index")?);
            if sigma.arity() != cfg.n {
                return Err(Failure::usage(format!("multi-index needs {} entries for n={}", cfg.n, cfg.n)));
            }
            Output::Form(total_derivative(&sigma, &form(f)?)?)
        }
        Command::El { density } => Output::Element(euler(&lagrangian(density, cfg)?)?),
        Command::Helmholtz { covector: c } => {
            let rep = helmholtz(&covector(c, cfg)?)?;
            let v = json!({ "self_adjoint": rep.self_adjoint, "d1_vanishes": rep.d1_vanishes, "verdict": rep.verdict() });
            let text = if rep.self_adjoint == rep.d1_vanishes {
                rep.verdict().to_string()
            } else {
                format!("{} (d1 disagrees)", rep.verdict())
            };
            Output::Verdict(text, v)
        }
        Command::Adjoint { operator, source, target } => {
            let op = syntax::parse_operator(operator, cfg, &source.desc(cfg), &target.desc(cfg))?;
            Output::Operator(adjoint(&op))
        }
        Command::Lin { element, module } => {
            let e = syntax::parse_element(element, cfg, &module.desc(cfg))?;
            Output::Operator(linearization(&e)?)
        }
        Command::Bracket { left, right } => {
            Output::Field(bracket(&syntax::parse_field(left, cfg)?, &syntax::parse_field(right, cfg)?))
        }
        Command::D1 { input, kind, at } => match kind {
            SecondaryKind::Lagrangian => Output::Element(euler(&lagrangian(input, cfg)?)?),
            _ => {
                let at = at.iter().map(|a| syntax::parse_field(a, cfg)).collect::<Result<Vec<_>, _>>()?;
                show_multi(&d1(&secondary(input, cfg, *kind)?)?, &at)?
            }
        },
        Command::Lie { field, form: f, kind } => {
            let chi = syntax::parse_field(field, cfg)?;
            show_multi(&lie(&chi, &secondary(f, cfg, *kind)?)?, &[])?
        }
        Command::Insert { field, form: f, kind } => {
            let chi = syntax::parse_field(field, cfg)?;
            match insert(&chi, &secondary(f, cfg, *kind)?)? {
                SecondaryForm::Class(c) => Output::Form(c),
                SecondaryForm::Multi(t) => show_multi(&t, &[])?,
            }
        }
        Command::TensorCheck { input } => {
            let op = if input.trim_start().starts_with('<') {
                syntax::parse_operator(input, cfg, &ModuleDesc::kappa(cfg), &ModuleDesc::scalar(false))?
            } else {
                covector_functional(&covector(input, cfg)?)?
            };
            let yes = is_secondary_tensor(&op);
            let text = if yes { "secondary tensor: yes" } else { "secondary tensor: no" };
            Output::Verdict(text.into(), json!({ "secondary_tensor": yes }))
        }
        Command::Cohomology(a) => cohomology(a, s)?,
        Command::Selfcheck { quick } => {
            Output::Suites(run_all(if *quick { Sizes::QUICK } else { Sizes::FULL }, s.seed))
        }
    })
}

fn cohomology(a: &CohomologyArgs, s: &SessionConfig) -> Result<Output, Failure> {
    let cfg = s.bundle;
    let slot = a.slot.unwrap_or(cfg.k);
    cfg.check_slot(slot)?;
    if a.mu == 0 || a.mu > cfg.n {
        return Err(Failure::usage(format!("mu={} out of range for n={}", a.mu, cfg.n)));
    }
    let spec = TruncationSpec::new(cfg, s.max_jet, s.trunc_deg, a.x_deg).with_op_order(a.op_order);
    if a.one_line {
        let lower: Vec<i32> = match &a.grade {
            None => vec![0; cfg.k - 1],
            Some(g) => ints(g, "grade")?.into_iter().map(|x| x as i32).collect(),
        };
        if lower.len() + 1 != cfg.k {
            return Err(Failure::usage(format!("--one-line takes {} lower degrees", cfg.k - 1)));
        }
        let q = a.q.unwrap_or(cfg.n - 1);
        let mut rng = StdRng::seed_from_u64(s.seed);
        return Ok(Output::Report(one_line_samples(&spec, &lower, q, a.samples, &mut rng)?.report()));
    }
    let grade: Vec<i32> = match &a.grade {
        None => vec![0; cfg.k],
        Some(g) => ints(g, "grade")?.into_iter().map(|x| x as i32).collect(),
    };
    if grade.len() != cfg.k {
        return Err(Failure::usage(format!("grade needs {} entries for k={}", cfg.k, cfg.k)));
    }
    let map = form_map(a.map, slot, a.mu);
    if let Some(t) = &a.target {
        let target = syntax::parse_form(t, cfg)?;
        return Ok(Output::Report(solve_preimage(map, &[target], &spec, &grade)?.report(map)));
    }
    let incoming = a.incoming.map(|m| form_map(m, slot, a.mu));
    Ok(Output::Report(cohomology_dim(incoming, Some(map), &spec, &grade)?.report()))
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '^' | '{' | '}' | '&' | '%' | '$' | '#' => {
                out.push('\\');
                out.push(c);
                if c == '^' {
                    out.push_str("{}");
                }
            }
            '\\' => out.push_str("\\textbackslash{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            _ => out.push(c),
        }
    }
    out
}

fn report_lines(r: &Report) -> Vec<String> {
    let mut lines = vec![format!("operator: {}", r.operator), format!("bounds: {}", r.spec.bounds())];
    for (k, v) in &r.dims {
        lines.push(format!("{k}: {v}"));
    }
    for w in &r.witnesses {
        lines.push(format!("witness: {w}"));
    }
    lines.push(format!("verdict: {}", r.verdict));
    lines
}

fn text_lines(out: &Output) -> Vec<String> {
    match out {
        Output::Verdict(t, _) => vec![t.clone()],
        Output::Report(r) => report_lines(r),
        Output::Suites(s) => {
            let mut v: Vec<String> = s.iter().map(SuiteResult::line).collect();
            let ok = s.iter().all(SuiteResult::passed);
            v.push(if ok { "selfcheck: all suites passed".into() } else { "selfcheck: FAILED".into() });
            v
        }
        _ => unreachable!("objects are printed directly"),
    }
}

/// Renders an output; identical inputs give identical bytes.
pub fn render(out: &Output, command: &str, s: &SessionConfig) -> String {
    match s.format {
        Format::Text => {
            let body = match out {
                Output::Form(f) => printer::form_text(f),
                Output::Field(f) => printer::field_text(f),
                Output::Element(e) => printer::element_text(e),
                Output::Operator(o) => printer::operator_text(o),
                other => text_lines(other).join("\n"),
            };
            body + "\n"
        }
        Format::Latex => match out {
            Output::Form(f) => printer::latex_document(&printer::form_latex(f)),
            Output::Field(f) => printer::latex_document(&printer::field_latex(f)),
            Output::Element(e) => printer::latex_document(&printer::element_latex(e)),
            Output::Operator(o) => printer::latex_document(&printer::operator_latex(o)),
            other => {
                let lines: Vec<String> = text_lines(other).iter().map(|l| latex_escape(l)).collect();
                format!(
                    "\\documentclass{{article}}\n\\begin{{document}}\n\\noindent\n{}\n\\end{{document}}\n",
                    lines.join("\\\\\n")
                )
            }
        },
        Format::Json => {
            let result = match out {
                Output::Form(f) => printer::form_json(f),
                Output::Field(f) => printer::field_json(f),
                Output::Element(e) => printer::element_json(e),
                Output::Operator(o) => printer::operator_json(o),
                Output::Verdict(_, v) => v.clone(),
                Output::Report(r) => serde_json::to_value(r).expect("report serializes"),
                Output::Suites(v) => json!({
                    "suites": v,
                    "passed": v.iter().all(SuiteResult::passed),
                }),
            };
            let doc = json!({
                "command": command,
                "config": printer::config_json(s.bundle),
                "seed": s.seed,
                "result": result,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    }
}
