//! Command-line front end for the transseries kernel.

pub mod parse;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod guide {}

use std::fmt;
use std::io::BufRead;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::{json, Value};

use transseries::calculus::{self, CompositionHandle, OperatorHandle};
use transseries::monomials;
use transseries::powerseries::{cut_member, CutSpec, PowerSeries};
use transseries::series_core::Prefix;
use transseries::taylor::{
    analytic_commutation_check, chain_rule_transport_check, locus_contains, taylor_identity_check, CheckOutcome,
    CheckReport, LocusSpec,
};
use transseries::{Constant, KernelError, Monomial, TransSeries};

pub use parse::{parse, Expr, ExprKind, ParseError, Span};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNEQUAL: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_SKIPPED: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Float,
}

/// A kernel error raised while elaborating the subexpression at `span`.
#[derive(Debug)]
pub struct ElabError {
    pub span: Span,
    pub error: KernelError,
}

impl fmt::Display for ElabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}..{}: {}", self.span.start, self.span.end, self.error)
    }
}

impl std::error::Error for ElabError {}

/// Evaluates an expression bottom-up into a transseries.
pub fn elaborate(e: &Expr, backend: Backend) -> Result<TransSeries, ElabError> {
    let at = |error: KernelError| ElabError { span: e.span, error };
    let value = match &e.kind {
        ExprKind::Const(r) => TransSeries::constant(match backend {
            Backend::Exact => Constant::Exact(r.clone()),
            Backend::Float => Constant::Exact(r.clone()).to_float(),
        }),
        ExprKind::X => TransSeries::x(),
        ExprKind::Neg(a) => elaborate(a, backend)?.neg(),
        ExprKind::Add(a, b) => elaborate(a, backend)?.add(&elaborate(b, backend)?),
        ExprKind::Sub(a, b) => elaborate(a, backend)?.sub(&elaborate(b, backend)?),
        ExprKind::Mul(a, b) => elaborate(a, backend)?.mul(&elaborate(b, backend)?),
        ExprKind::Div(a, b) => {
            let (a, b) = (elaborate(a, backend)?, elaborate(b, backend)?);
            a.div(&b).map_err(at)?
        }
        ExprKind::Pow(a, r) => calculus::pow(&elaborate(a, backend)?, r).map_err(at)?,
        ExprKind::Log(a) => calculus::log_series(&elaborate(a, backend)?).map_err(at)?,
        ExprKind::Exp(a) => calculus::exp_series(&elaborate(a, backend)?).map_err(at)?,
    };
    Ok(value)
}

#[derive(Parser, Debug)]
#[command(name = "tsx", about = "Expand and check log-exp transseries expressions", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Number of terms to print
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=1000))]
    terms: u64,
    /// Truncation order for power series
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=64))]
    order: u64,
    #[arg(long, global = true, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Maximal logarithmic depth of monomials
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=16))]
    depth_bound: Option<u64>,
    /// Maximal exponential height of monomials
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=16))]
    height_bound: Option<u64>,
    /// Emit a JSON object instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IdentityKind {
    /// T(log f) = log T(f)
    Log,
    /// T(f)' = T(x)' T(f')
    Chain,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Expand an expression
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Differentiate an expression
    Derive {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Number of derivatives
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Compose F after G
    Compose {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
    /// Compare F(G + D) with its Taylor expansion at G
    Taylor {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
        #[arg(allow_hyphen_values = true)]
        delta: String,
    },
    /// Decide whether F lies in the convergence locus
    Locus {
        #[arg(allow_hyphen_values = true)]
        f: String,
        /// `identity` or `compose:G`
        #[arg(long, default_value = "identity")]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
    /// Decide membership of a power series in a cut algebra
    Cutcheck {
        /// `geometric:W`, `exponential:W`, `doubling` or `poly:P0,P1,...`
        series: String,
        /// `all`, `empty`, `above:B` or `above-eq:B`
        #[arg(long)]
        cut: String,
        /// Coefficients inspected
        #[arg(long, default_value_t = 5)]
        prefix: usize,
    },
    /// Check a transport identity of the Taylor deformation
    IdentityCheck {
        #[arg(value_enum)]
        kind: IdentityKind,
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value = "identity")]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Eval { .. } => "eval",
            Cmd::Derive { .. } => "derive",
            Cmd::Compose { .. } => "compose",
            Cmd::Taylor { .. } => "taylor",
            Cmd::Locus { .. } => "locus",
            Cmd::Cutcheck { .. } => "cutcheck",
            Cmd::IdentityCheck { .. } => "identity-check",
        }
    }
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure(String);

impl From<ElabError> for Failure {
    fn from(e: ElabError) -> Failure {
        Failure(e.to_string())
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Failure {
        Failure(e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure(e.to_string())
    }
}

struct Ctx<'a> {
    backend: Backend,
    terms: usize,
    order: usize,
    stdin: &'a mut dyn BufRead,
}

impl Ctx<'_> {
    /// Source text of an argument; `-` reads the next line of standard input.
    fn source(&mut self, arg: &str) -> Result<String, Failure> {
        if arg != "-" {
            return Ok(arg.to_string());
        }
        let mut line = String::new();
        self.stdin
            .read_line(&mut line)
            .map_err(|e| Failure(format!("cannot read standard input: {e}")))?;
        if line.is_empty() {
            return Err(Failure("standard input is exhausted".into()));
        }
        Ok(line.trim().to_string())
    }

    fn series(&mut self, arg: &str) -> Result<TransSeries, Failure> {
        let src = self.source(arg)?;
        Ok(elaborate(&parse(&src)?, self.backend)?)
    }

    fn monomial(&mut self, arg: &str) -> Result<Monomial, Failure> {
        let s = self.series(arg)?;
        match s.as_finite().as_deref() {
            Some([t]) if t.coeff.is_one() => Ok(t.mono.clone()),
            _ => Err(Failure(format!("{arg} is not a monomial"))),
        }
    }

    fn operator(&mut self, arg: &str) -> Result<OperatorHandle, Failure> {
        if arg == "identity" {
            return Ok(OperatorHandle::Identity);
        }
        match arg.strip_prefix("compose:") {
            Some(g) => Ok(OperatorHandle::right_compose(self.series(g)?)?),
            None => Err(Failure(format!("unknown operator {arg}; expected identity or compose:G"))),
        }
    }

    fn cut(&mut self, arg: &str) -> Result<CutSpec, Failure> {
        Ok(match arg {
            "all" => CutSpec::All,
            "empty" => CutSpec::Empty,
            _ => {
                if let Some(b) = arg.strip_prefix("above-eq:") {
                    CutSpec::AboveEq(self.monomial(b)?)
                } else if let Some(b) = arg.strip_prefix("above:") {
                    CutSpec::Above(self.monomial(b)?)
                } else {
                    return Err(Failure(format!("unknown cut {arg}")));
                }
            }
        })
    }

    fn power_series(&mut self, arg: &str) -> Result<PowerSeries, Failure> {
        if arg == "doubling" {
            return Ok(PowerSeries::lacunary(|k| 1i64.checked_shl(k as u32).unwrap_or(i64::MAX))?);
        }
        if let Some(w) = arg.strip_prefix("geometric:") {
            return Ok(PowerSeries::geometric(self.monomial(w)?));
        }
        if let Some(w) = arg.strip_prefix("exponential:") {
            return Ok(PowerSeries::exponential(self.monomial(w)?));
        }
        if let Some(cs) = arg.strip_prefix("poly:") {
            let coeffs = cs.split(',').map(|c| self.series(c.trim())).collect::<Result<Vec<_>, _>>()?;
            return Ok(PowerSeries::polynomial(coeffs));
        }
        Err(Failure(format!("unknown power series {arg}")))
    }

    fn prefix(&self, s: &TransSeries) -> Result<Prefix, Failure> {
        Ok(s.prefix(self.terms)?)
    }
}

fn render(p: &Prefix) -> String {
    transseries::series_core::render_prefix(p)
}

fn json_terms(p: &Prefix) -> Value {
    Value::Array(
        p.terms
            .iter()
            .map(|t| json!({ "coeff": t.coeff.to_string(), "monomial": t.mono.to_string() }))
            .collect(),
    )
}

struct Report {
    code: i32,
    text: String,
    verdict: Option<String>,
    terms: Value,
    witnesses: Vec<String>,
}

impl Report {
    fn series(text: String, p: &Prefix) -> Report {
        Report { code: EXIT_OK, text, verdict: None, terms: json_terms(p), witnesses: Vec::new() }
    }
}

fn check_report(ctx: &Ctx, r: &CheckReport) -> Result<Report, Failure> {
    let mut text = String::new();
    let mut witnesses = Vec::new();
    if let Some(l) = &r.locus {
        text.push_str(&format!("locus: {l}\n"));
        witnesses = l.witnesses.iter().map(|m| m.to_string()).collect();
    }
    let mut terms = Value::Array(Vec::new());
    if let (Some(lhs), Some(rhs)) = (&r.lhs, &r.rhs) {
        let (pl, pr) = (ctx.prefix(lhs)?, ctx.prefix(rhs)?);
        text.push_str(&format!("lhs: {}\nrhs: {}\n", render(&pl), render(&pr)));
        terms = json_terms(&pr);
    }
    text.push_str(&format!("{}\n", r.outcome));
    let (code, verdict) = match &r.outcome {
        CheckOutcome::Equal => (EXIT_OK, "EQUAL"),
        CheckOutcome::Unequal { .. } => (EXIT_UNEQUAL, "UNEQUAL"),
        CheckOutcome::Skipped(_) => (EXIT_SKIPPED, "SKIPPED"),
    };
    Ok(Report { code, text, verdict: Some(verdict.into()), terms, witnesses })
}

fn execute(cmd: &Cmd, ctx: &mut Ctx) -> Result<Report, Failure> {
    match cmd {
        Cmd::Eval { expr } => {
            let s = ctx.series(expr)?;
            let p = ctx.prefix(&s)?;
            Ok(Report::series(format!("{}\n", render(&p)), &p))
        }
        Cmd::Derive { expr, n } => {
            let s = calculus::derive_n(&ctx.series(expr)?, *n)?;
            let p = ctx.prefix(&s)?;
            Ok(Report::series(format!("{}\n", render(&p)), &p))
        }
        Cmd::Compose { f, g } => {
            let (f, g) = (ctx.series(f)?, ctx.series(g)?);
            let s = calculus::compose(&f, &CompositionHandle::new(g)?)?;
            let p = ctx.prefix(&s)?;
            Ok(Report::series(format!("{}\n", render(&p)), &p))
        }
        Cmd::Taylor { f, g, delta } => {
            let (f, g, d) = (ctx.series(f)?, ctx.series(g)?, ctx.series(delta)?);
            let r = taylor_identity_check(&f, &g, &d, ctx.terms)?;
            check_report(ctx, &r)
        }
        Cmd::Locus { f, op, delta } => {
            let f = ctx.series(f)?;
            let op = ctx.operator(op)?;
            let spec = LocusSpec::new(op, ctx.series(delta)?);
            let r = locus_contains(&spec, &f)?;
            Ok(Report {
                code: EXIT_OK,
                text: format!("{r}\n"),
                verdict: Some(r.verdict.to_string()),
                terms: Value::Array(Vec::new()),
                witnesses: r.witnesses.iter().map(|m| m.to_string()).collect(),
            })
        }
        Cmd::Cutcheck { series, cut, prefix } => {
            let p = ctx.power_series(series)?;
            let s = ctx.cut(cut)?;
            let r = cut_member(&p, &s, *prefix)?;
            let mut text = format!("series: {}\ncut: {s}\n{} ({})\n", p.render(ctx.order, 3)?, r.verdict, r.detail);
            let pairs: Vec<String> = r.witnesses.iter().map(|(m, k)| format!("({m}, {k})")).collect();
            if !pairs.is_empty() {
                text.push_str(&format!("witness pairs: {}\n", pairs.join(", ")));
            }
            Ok(Report { code: EXIT_OK, text, verdict: Some(r.verdict.to_string()), terms: Value::Array(Vec::new()), witnesses: pairs })
        }
        Cmd::IdentityCheck { kind, f, op, delta } => {
            let f = ctx.series(f)?;
            let op = ctx.operator(op)?;
            let spec = LocusSpec::new(op, ctx.series(delta)?);
            let depth = ctx.terms;
            let r = match kind {
                IdentityKind::Log => analytic_commutation_check(&f, &spec, depth)?,
                IdentityKind::Chain => chain_rule_transport_check(&f, &spec, depth)?,
            };
            check_report(ctx, &r)
        }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, S>(args: I, stdin: &mut dyn BufRead) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let saved_bounds = monomials::bounds();
    let saved_order = calculus::faa_di_bruno_order();
    let (h, d) = saved_bounds;
    monomials::set_bounds(
        cli.height_bound.map_or(h, |v| v as usize),
        cli.depth_bound.map_or(d, |v| v as usize),
    );
    calculus::set_faa_di_bruno_order(cli.order as usize);
    let mut ctx = Ctx { backend: cli.backend, terms: cli.terms as usize, order: cli.order as usize, stdin };
    let result = execute(&cli.command, &mut ctx);
    monomials::set_bounds(saved_bounds.0, saved_bounds.1);
    calculus::set_faa_di_bruno_order(saved_order);
    match result {
        Ok(r) => {
            let stdout = if cli.json {
                let v = json!({
                    "command": cli.command.name(),
                    "verdict": r.verdict,
                    "terms": r.terms,
                    "witnesses": r.witnesses,
                });
                format!("{v}\n")
            } else {
                r.text
            };
            Outcome { code: r.code, stdout, stderr: String::new() }
        }
        Err(Failure(msg)) => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

/// Parses `r` as an exact rational, for callers that build exponents.
pub fn rational(r: &str) -> Option<BigRational> {
    match parse(r).ok()?.kind {
        ExprKind::Const(q) => Some(q),
        _ => None,
    }
}
