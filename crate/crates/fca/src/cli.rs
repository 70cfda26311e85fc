//! The `fca` command line.
//!
//! Exit codes: 0 success, 1 constraint failure, 2 malformed input,
//! 3 internal invariant violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fca_core::constraints::{derive_constraints, verify_solution, ConstraintSystem, DeriveOptions};
use fca_core::discrimination::{analyze, relative_unitary, AnalysisOptions, AnalysisScope, DiscriminationError};
use fca_core::groups::{is_regular, BaseNeighborhood, GroupError, QuotientSpec};
use fca_core::matrixrep::{sector_blocks, synthesize_unitary_with, BasisOrdering, MatrixError, SynthesisMethod};
use fca_core::rules::{family_rule, CaseId, RuleError, SymbolicTemplate};
use fca_core::{CayleyGraph, Complex64, FiniteGroup, LocalRule, SymPoly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::json::{self, FormatError, ParsedRule};
use crate::sample;

#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Constraint(String),
    /// Exit 2.
    Input(String),
    /// Exit 3.
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Constraint(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Constraint(m) | CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RuleError> for CliError {
    fn from(e: RuleError) -> Self {
        match e {
            RuleError::NoSolution { .. } | RuleError::ConstraintViolation(_) => CliError::Constraint(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            // No intertwiner means the rule does not preserve the CAR.
            MatrixError::NullSpaceDimension(0) => CliError::Constraint(e.to_string()),
            MatrixError::BadOrdering(_)
            | MatrixError::OrderingMismatch(_)
            | MatrixError::DimensionMismatch(..)
            | MatrixError::ModeMismatch { .. }
            | MatrixError::SymbolicCoefficient => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<DiscriminationError> for CliError {
    fn from(e: DiscriminationError) -> Self {
        match e {
            DiscriminationError::Matrix(m) => m.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fca", version, about = "Fermionic cellular automata on finite Cayley graphs")]
pub struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the constraint system of a symbolic rule.
    Derive(DeriveArgs),
    /// Check an assignment, a numeric rule or family draws against the constraints.
    Verify(VerifyArgs),
    /// Synthesize the evolution unitary of a rule.
    Unitary(UnitaryArgs),
    /// Split a case-study unitary into its named sector blocks.
    Blocks(BlocksArgs),
    /// Compare a linear and a nonlinear unitary.
    Discriminate(DiscriminateArgs),
    /// Wrapping-lemma regularity of a quotient.
    Regular(RegularArgs),
}

#[derive(Debug, Args, Default)]
pub struct GraphArgs {
    /// Group preset (`z2xz2`, `z5`, `zN`).
    #[arg(long)]
    pub group: Option<String>,
    /// Ordered neighbourhood template as comma-separated element labels.
    #[arg(long, value_delimiter = ',')]
    pub neighborhood: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub generators: Option<Vec<String>>,
    /// Site order as comma-separated element labels.
    #[arg(long, value_delimiter = ',')]
    pub site_order: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Symbolic rule JSON; overrides the graph flags.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Use every number-preserving descriptor.
    #[arg(long, conflicts_with = "general")]
    pub number_preserving: bool,
    /// Use every odd-degree descriptor.
    #[arg(long)]
    pub general: bool,
    /// Use every site pair instead of pairs anchored at the identity.
    #[arg(long)]
    pub all_pairs: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Constraint system JSON.
    #[arg(long, requires = "assign")]
    pub system: Option<PathBuf>,
    /// Assignment JSON `{name: [re, im]}`.
    #[arg(long)]
    pub assign: Option<PathBuf>,
    /// Numeric rule JSON.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<u32>,
    /// Family parameters as JSON, or `@path`.
    #[arg(long)]
    pub params: Option<String>,
    /// Verify this many random parameter draws of `--family` (seed: FCA_SEED).
    #[arg(long, conflicts_with = "params")]
    pub draws: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UnitaryArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Numeric rule JSON.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<u32>,
    /// Family parameters as JSON, or `@path`.
    #[arg(long)]
    pub params: Option<String>,
    /// Drop every nonlinear coefficient first.
    #[arg(long)]
    pub linearized: bool,
    /// Use the full stacked null-space solve.
    #[arg(long)]
    pub stacked: bool,
}

#[derive(Debug, Args)]
pub struct BlocksArgs {
    /// Unitary JSON.
    #[arg(long)]
    pub u: PathBuf,
    /// Case study (`z2xz2` or `z5`); inferred from the ordering when omitted.
    #[arg(long)]
    pub case: Option<String>,
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    #[arg(long)]
    pub u0: PathBuf,
    #[arg(long)]
    pub u1: PathBuf,
    /// Base the standard success probability on the better parity polygon.
    #[arg(long)]
    pub parity_restricted: bool,
    /// Restrict to these particle numbers (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub sector: Option<Vec<u32>>,
    /// Include the distinct eigenvalues as a `polygon` field.
    #[arg(long)]
    pub emit_polygon: bool,
}

#[derive(Debug, Args)]
pub struct RegularArgs {
    /// `Z` for the integers, or a finite group preset.
    #[arg(long)]
    pub base: String,
    /// Integer offsets of the neighbourhood on `Z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<i64>>,
    /// Modulus `n` of `Z → Z_n`.
    #[arg(long)]
    pub quotient: Option<usize>,
    /// Neighbourhood labels in a finite base group.
    #[arg(long, value_delimiter = ',')]
    pub neighborhood: Option<Vec<String>>,
    /// Kernel labels in a finite base group.
    #[arg(long, value_delimiter = ',')]
    pub kernel: Option<Vec<String>>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {}", path.display(), e)))
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    json::from_str(&read(path)?).map_err(|e| input(format!("{}: {}", path.display(), e)))
}

fn case_of(graph: &CayleyGraph) -> Option<CaseId> {
    [CaseId::KleinFour, CaseId::Cyclic5].into_iter().find(|c| c.graph() == *graph)
}

impl GraphArgs {
    fn graph(&self) -> Result<CayleyGraph, CliError> {
        let name = self.group.as_deref().ok_or_else(|| input("--group is required"))?;
        let group = FiniteGroup::preset(name)?;
        match &self.neighborhood {
            Some(n) => Ok(json::build_graph(group, self.generators.as_deref(), n, self.site_order.as_deref())?),
            None => {
                if self.generators.is_some() || self.site_order.is_some() {
                    return Err(input("--generators and --site-order need --neighborhood"));
                }
                if let Some(case) = CaseId::parse(name).filter(|c| *c.graph().group() == group) {
                    return Ok(case.graph());
                }
                Ok(CayleyGraph::cycle(group.order())?)
            }
        }
    }

    fn case(&self) -> Result<CaseId, CliError> {
        let graph = self.graph()?;
        case_of(&graph).ok_or_else(|| input("solution families exist only for the z2xz2 and z5 presets"))
    }
}

fn parse_params(raw: &str) -> Result<fca_core::rules::FamilyParams, CliError> {
    let text = match raw.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => raw.to_string(),
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| input(format!("--params: {}", e)))?;
    Ok(json::params_from_json(&v)?)
}

/// Output of a successful command, plus whether it signals a constraint
/// failure.
struct Outcome {
    text: String,
    failed: Option<String>,
}

fn emit<T: Serialize>(doc: &T) -> Result<Outcome, CliError> {
    Ok(Outcome { text: json::to_string(doc).map_err(|e| CliError::Internal(e.to_string()))?, failed: None })
}

fn template(graph: CayleyGraph, number_preserving: bool) -> Result<SymbolicTemplate, CliError> {
    let quintic = case_of(&graph).unwrap_or(CaseId::KleinFour).quintic_name();
    let t = if number_preserving {
        SymbolicTemplate::number_preserving(graph, quintic)
    } else {
        SymbolicTemplate::general(graph, quintic)
    };
    Ok(t?)
}

fn derive(args: &DeriveArgs) -> Result<Outcome, CliError> {
    let rule: LocalRule<SymPoly> = match &args.rule {
        Some(path) => match read_doc::<json::RuleDoc>(path)?.rule()? {
            ParsedRule::Symbolic(r) => r,
            ParsedRule::Numeric(_) => return Err(input("derive needs a symbolic rule (terms with `symbol`)")),
        },
        None => {
            let graph = args.graph.graph()?;
            let np = if args.number_preserving || args.general {
                args.number_preserving
            } else {
                case_of(&graph).is_none_or(CaseId::number_preserving)
            };
            template(graph, np)?.rule
        }
    };
    let system = derive_constraints(&rule, DeriveOptions { anchor_at_identity: !args.all_pairs });
    emit(&json::system_doc(&system))
}

fn verify_against(system: &ConstraintSystem, assignment: &BTreeMap<String, Complex64>, tol: f64) -> Result<Outcome, CliError> {
    let report = verify_solution(system, assignment, tol).map_err(|e| input(e.to_string()))?;
    let mut out = emit(&json::VerificationDoc::new(&report))?;
    if !report.pass {
        out.failed = Some(format!("{} equation(s) violated, max residual {:e}", report.failures.len(), report.max_residual));
    }
    Ok(out)
}

fn system_for(rule: &LocalRule<Complex64>) -> Result<(SymbolicTemplate, ConstraintSystem), CliError> {
    let t = template(rule.graph().clone(), rule.is_number_preserving())?;
    let s = derive_constraints(&t.rule, DeriveOptions::default());
    Ok((t, s))
}

#[derive(Serialize)]
struct DrawFailure {
    params: Value,
    max_residual: Option<f64>,
}

#[derive(Serialize)]
struct DrawsDoc {
    case: String,
    family: u32,
    seed: u64,
    draws: usize,
    passed: usize,
    max_residual: Option<f64>,
    failures: Vec<DrawFailure>,
}

fn verify(args: &VerifyArgs, tol: f64) -> Result<Outcome, CliError> {
    if let (Some(sys), Some(assign)) = (&args.system, &args.assign) {
        let system = json::system_from_doc(&read_doc::<Vec<json::EquationDoc>>(sys)?)?;
        let assignment = json::assignment_from_doc(&read_doc(assign)?);
        return verify_against(&system, &assignment, tol);
    }
    if let Some(path) = &args.rule {
        let rule = match read_doc::<json::RuleDoc>(path)?.rule()? {
            ParsedRule::Numeric(r) => r,
            ParsedRule::Symbolic(_) => return Err(input("verify needs a numeric rule (terms with `coeff`)")),
        };
        let (t, s) = system_for(&rule)?;
        return verify_against(&s, &t.assignment(&rule)?, tol);
    }
    let family = args.family.ok_or_else(|| input("give --system and --assign, --rule, or --family"))?;
    let case = args.graph.case()?;
    if let Some(draws) = args.draws {
        let seed = sample::seed_from_env().map_err(input)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut doc = DrawsDoc {
            case: case.name().into(),
            family,
            seed,
            draws,
            passed: 0,
            max_residual: Some(0.0),
            failures: Vec::new(),
        };
        let mut system: Option<(SymbolicTemplate, ConstraintSystem)> = None;
        let mut worst = 0.0_f64;
        for _ in 0..draws {
            let params = sample::sample_params(&mut rng, case, family)
                .ok_or_else(|| CliError::from(family_rule(case, family, &Default::default()).err().unwrap_or(
                    RuleError::UnknownFamily { case: case.name(), family },
                )))?;
            let rule = family_rule(case, family, &params)?;
            if system.is_none() {
                system = Some(system_for(&rule)?);
            }
            let (t, s) = system.as_ref().expect("set above");
            let r = verify_solution(s, &t.assignment(&rule)?, tol).map_err(|e| input(e.to_string()))?;
            worst = worst.max(r.max_residual);
            if r.pass {
                doc.passed += 1;
            } else {
                doc.failures.push(DrawFailure { params: json::params_to_json(&params), max_residual: r.max_residual.is_finite().then_some(r.max_residual) });
            }
        }
        doc.max_residual = worst.is_finite().then_some(worst);
        let failed = (doc.passed < draws).then(|| format!("{} of {} draws failed", draws - doc.passed, draws));
        let mut out = emit(&doc)?;
        out.failed = failed;
        return Ok(out);
    }
    let params = parse_params(args.params.as_deref().unwrap_or("{}"))?;
    let rule = family_rule(case, family, &params)?;
    let (t, s) = system_for(&rule)?;
    verify_against(&s, &t.assignment(&rule)?, tol)
}

fn numeric_rule(graph: &GraphArgs, rule: &Option<PathBuf>, family: Option<u32>, params: &Option<String>) -> Result<LocalRule<Complex64>, CliError> {
    if let Some(path) = rule {
        return match read_doc::<json::RuleDoc>(path)?.rule()? {
            ParsedRule::Numeric(r) => Ok(r),
            ParsedRule::Symbolic(_) => Err(input("a numeric rule (terms with `coeff`) is required")),
        };
    }
    let family = family.ok_or_else(|| input("give --rule or --group with --family"))?;
    let params = parse_params(params.as_deref().unwrap_or("{}"))?;
    Ok(family_rule(graph.case()?, family, &params)?)
}

fn unitary(args: &UnitaryArgs, tol: f64) -> Result<Outcome, CliError> {
    let mut rule = numeric_rule(&args.graph, &args.rule, args.family, &args.params)?;
    if args.linearized {
        rule = rule.linearized();
    }
    let ordering = BasisOrdering::for_graph(rule.graph())?;
    let method = if args.stacked { SynthesisMethod::StackedSvd } else { SynthesisMethod::VacuumSeeded };
    let u = synthesize_unitary_with(&rule, &ordering, method)?;
    if fca_core::linalg::unitarity_residual(&u.matrix) > tol {
        return Err(CliError::Internal("synthesized matrix fails the unitarity tolerance".into()));
    }
    emit(&json::MatrixDoc::new(&u))
}

fn blocks(args: &BlocksArgs, tol: f64) -> Result<Outcome, CliError> {
    let u = read_doc::<json::MatrixDoc>(&args.u)?.evolution(tol)?;
    let case = match &args.case {
        Some(c) => CaseId::parse(c).ok_or_else(|| input(format!("unknown case `{}`", c)))?,
        None => [CaseId::KleinFour, CaseId::Cyclic5]
            .into_iter()
            .find(|c| BasisOrdering::for_case(*c) == u.ordering)
            .ok_or_else(|| input("the ordering matches no case study; pass --case"))?,
    };
    emit(&json::BlocksDoc::new(&sector_blocks(&u, case)?))
}

fn discriminate(args: &DiscriminateArgs, tol: f64) -> Result<Outcome, CliError> {
    let u0 = read_doc::<json::MatrixDoc>(&args.u0)?.evolution(tol)?;
    let u1 = read_doc::<json::MatrixDoc>(&args.u1)?.evolution(tol)?;
    let v = relative_unitary(&u0, &u1)?;
    let scope = match &args.sector {
        Some(n) => AnalysisScope::ParticleNumbers(n.clone()),
        None => AnalysisScope::Full,
    };
    let report = analyze(&v, &AnalysisOptions { scope, parity_restricted: args.parity_restricted })?;
    emit(&json::ReportDoc::new(&report, args.emit_polygon))
}

#[derive(Serialize)]
struct RegularDoc {
    regular: bool,
}

fn regular(args: &RegularArgs) -> Result<Outcome, CliError> {
    let result = if args.base.eq_ignore_ascii_case("z") {
        let offsets = args.offsets.clone().ok_or_else(|| input("--offsets is required for base Z"))?;
        let modulus = args.quotient.ok_or_else(|| input("--quotient is required for base Z"))?;
        is_regular(&BaseNeighborhood::Offsets(offsets), &QuotientSpec::Integers { modulus })
    } else {
        let base = FiniteGroup::preset(&args.base)?;
        let look = |ls: &Option<Vec<String>>, flag: &str| -> Result<Vec<_>, CliError> {
            let ls = ls.as_ref().ok_or_else(|| input(format!("--{} is required for a finite base", flag)))?;
            Ok(ls.iter().map(|l| base.element(l)).collect::<Result<Vec<_>, _>>()?)
        };
        let template = look(&args.neighborhood, "neighborhood")?;
        let kernel = look(&args.kernel, "kernel")?;
        is_regular(&BaseNeighborhood::Template(template), &QuotientSpec::Finite { base: base.clone(), kernel })
    };
    emit(&RegularDoc { regular: result? })
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(input("--tol must be a positive number"));
    }
    match &cli.command {
        Command::Derive(a) => derive(a),
        Command::Verify(a) => verify(a, cli.tol),
        Command::Unitary(a) => unitary(a, cli.tol),
        Command::Blocks(a) => blocks(a, cli.tol),
        Command::Discriminate(a) => discriminate(a, cli.tol),
        Command::Regular(a) => regular(a),
    }
}

/// Runs the command line and returns the process exit code. Results go to
/// `--out` or standard output, diagnostics to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &out.text).map_err(|e| format!("cannot write {}: {}", p.display(), e)),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("fca: {}", e);
                return 2;
            }
            match out.failed {
                Some(msg) => {
                    eprintln!("fca: {}", msg);
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("fca: {}", e.message());
            e.code()
        }
    }
}
