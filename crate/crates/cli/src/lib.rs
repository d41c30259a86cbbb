//! `hsets`: evaluate, refine and combine piecewise functions written over
//! symbolic hybrid-set regions.

pub mod workspace;

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hybridsets::apps::{complement_breakdown, matrix_add, matrix_eval_cell, spline_eval_region, spline_merge};
use hybridsets::batch::eval_points;
use hybridsets::calculus::{
    karr_split_check, linear_additivity_check, star_inverse_identity_check, validate_linear_operator, CheckReport,
    FiniteSum,
};
use hybridsets::point::{fmt_rational, parse_rational, to_i64};
use hybridsets::refine::{
    canonical_choice_matrix, common_strict_refinement, ChoiceMatrix, ChoiceStyle, GeneralisedPartition, Refinement,
};
use hybridsets::{
    EvalOutcome, FreeWord, HybridError, HybridExpr, HybridTerm, ParamExpr, Point, RegionShape, StarOp,
    SymbolicHybridSet, Valuation, Value,
};
use serde_json::json;
use thiserror::Error;

pub use workspace::{render_expr, Workspace, WorkspaceError};

/// Largest grid enumerated when a check needs sample points.
const MAX_SAMPLE: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{source}")]
    Workspace {
        path: String,
        #[source]
        source: WorkspaceError,
    },

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Library(#[from] HybridError),

    #[error("{0}")]
    Usage(String),

    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl From<WorkspaceError> for CliError {
    /// Errors in text given on the command line, which has no line number.
    fn from(e: WorkspaceError) -> Self {
        CliError::Usage(format!("in argument, column {}: {}", e.col(), e.message()))
    }
}

/// Result of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    TopRow,
    UpperTriangle,
}

impl From<Style> for ChoiceStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::TopRow => ChoiceStyle::OnesOnTopRow,
            Style::UpperTriangle => ChoiceStyle::FullUpperTriangle,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hsets",
    version,
    about = "Piecewise functions over symbolic hybrid-set regions"
)]
pub struct Cli {
    /// Workspace file with the declarations to use.
    #[arg(short = 'w', long = "workspace", global = true, value_name = "FILE")]
    pub workspace: Option<PathBuf>,

    /// Output format for evaluation tables and reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an expression, matrix or spline at points.
    Eval {
        /// Name of an expression, matrix or spline, or an expression such
        /// as `join(term(f, A), ...)`.
        expr: String,
        /// Point: `1/2`, or `2,3` for a matrix cell.
        #[arg(long = "at", required = true, value_name = "POINT", allow_hyphen_values = true)]
        at: Vec<String>,
        /// Declared valuation name or inline `a=1/2, b=3`.
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// Common strict refinement of partitions, matrices or splines.
    Refine {
        #[arg(required = true, value_name = "PART")]
        parts: Vec<String>,
        #[arg(long, value_enum, default_value_t = Style::TopRow)]
        style: Style,
        /// Base name for pieces that are not original pieces.
        #[arg(long, default_value = "R")]
        complement: String,
        /// Explicit choice matrix, rows separated by `;`.
        #[arg(long, value_name = "ROWS")]
        matrix: Option<String>,
    },
    /// Symbolic sum of two block matrices.
    MatrixAdd {
        m1: String,
        m2: String,
        /// Cell to evaluate, as `i,j`.
        #[arg(long = "cell", value_name = "I,J", allow_hyphen_values = true)]
        cells: Vec<String>,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// Merge of two splines over a common refinement of their knots.
    SplineMerge {
        s: String,
        t: String,
        #[arg(long = "at", value_name = "X", allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// Sampled identity checks; exit status 1 if any fails.
    Check {
        #[command(subcommand)]
        check: Check,
    },
    /// Print the workspace in canonical form.
    Print,
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Karr's split and telescoping identities for a function atom.
    Karr {
        atom: String,
        /// Three summation bounds `l,m,n`, tried in every order.
        #[arg(long, value_name = "L,M,N", allow_hyphen_values = true)]
        bounds: String,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// `f^P` joined with its inverse under a group operation gives the unit.
    Invert {
        atom: String,
        /// Region expression `P`.
        #[arg(long, value_name = "REGION")]
        over: String,
        #[arg(long, default_value = "+")]
        op: String,
        #[arg(long = "at", value_name = "POINT", allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// Additivity of a finite sum over the pieces of a partition.
    Linear {
        atom: String,
        #[arg(long, value_name = "PART")]
        partition: String,
        /// Integer summation range `lo..hi`, inclusive.
        #[arg(long, value_name = "LO..HI", allow_hyphen_values = true)]
        sum: String,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// The pieces of a partition sum to its universe at every point.
    Partition {
        part: String,
        #[arg(long = "at", value_name = "POINT", allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
}

pub fn load_workspace(path: Option<&Path>) -> Result<Workspace, CliError> {
    let Some(path) = path else {
        return Ok(Workspace::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Workspace::parse(&text).map_err(|source| CliError::Workspace {
        path: path.display().to_string(),
        source,
    })
}

/// Runs a parsed command line, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let ws = load_workspace(cli.workspace.as_deref())?;
    let mut ctx = Ctx {
        ws: &ws,
        out,
        format: cli.format,
    };
    match &cli.command {
        Command::Eval { expr, at, with } => ctx.eval(expr, at, with.as_deref()),
        Command::Refine {
            parts,
            style,
            complement,
            matrix,
        } => ctx.refine(parts, (*style).into(), complement, matrix.as_deref()),
        Command::MatrixAdd { m1, m2, cells, with } => ctx.matrix_add(m1, m2, cells, with.as_deref()),
        Command::SplineMerge { s, t, at, with } => ctx.spline_merge(s, t, at, with.as_deref()),
        Command::Check { check } => ctx.check(check),
        Command::Print => {
            write!(ctx.out, "{ws}")?;
            Ok(Status::Ok)
        }
    }
}

struct Ctx<'a> {
    ws: &'a Workspace,
    out: &'a mut dyn Write,
    format: Format,
}

impl Ctx<'_> {
    fn json(&self) -> bool {
        self.format == Format::JsonLines
    }

    fn valuation(&self, with: Option<&str>) -> Result<Valuation, CliError> {
        match with {
            None => Ok(Valuation::new()),
            Some(text) => match self.ws.valuation(text.trim()) {
                Some(v) => Ok(v.clone()),
                None if text.contains('=') => Ok(self.ws.parse_valuation(text)?),
                None => Err(CliError::Usage(format!("unknown valuation `{text}`"))),
            },
        }
    }

    fn expression(&self, name: &str) -> Result<HybridExpr, CliError> {
        if let Some(e) = self.ws.expr(name) {
            return Ok(e.clone());
        }
        if let Some(m) = self.ws.matrix(name) {
            return Ok(m.as_expr());
        }
        if let Some(s) = self.ws.spline(name) {
            return Ok(s.as_expr());
        }
        Ok(self.ws.parse_expr(name)?)
    }

    fn partition(&self, name: &str) -> Result<GeneralisedPartition, CliError> {
        if let Some(p) = self.ws.partition(name) {
            return Ok(p.clone());
        }
        if let Some(m) = self.ws.matrix(name) {
            return Ok(m.partition()?);
        }
        if let Some(s) = self.ws.spline(name) {
            return Ok(s.partition()?);
        }
        Err(CliError::Usage(format!("unknown partition, matrix or spline `{name}`")))
    }

    fn eval(&mut self, name: &str, at: &[String], with: Option<&str>) -> Result<Status, CliError> {
        let e = self.expression(name)?;
        let v = self.valuation(with)?;
        let points = parse_points(at)?;
        let label = if self.ws.expr(name).is_some() || self.ws.matrix(name).is_some() || self.ws.spline(name).is_some()
        {
            name
        } else {
            "e"
        };
        let outcomes = eval_points(&e, &self.ws.env, &points, &v);
        for (p, outcome) in points.iter().zip(outcomes) {
            let outcome = outcome?;
            if self.json() {
                let mut row = json!({
                    "expr": label,
                    "point": p.to_string(),
                    "defined": !outcome.is_undefined(),
                    "outcome": outcome.to_string(),
                });
                if let EvalOutcome::Value { value, multiplicity } = &outcome {
                    row["value"] = json!(value.to_string());
                    row["multiplicity"] = json!(multiplicity);
                    if let Value::Scalar(r) = value {
                        row["scalar"] = json!(fmt_rational(r));
                    }
                }
                writeln!(self.out, "{row}")?;
            } else {
                writeln!(self.out, "{label}({}) = {outcome}", bare(p))?;
            }
        }
        Ok(Status::Ok)
    }

    fn refine(
        &mut self,
        names: &[String],
        style: ChoiceStyle,
        complement: &str,
        matrix: Option<&str>,
    ) -> Result<Status, CliError> {
        let parts = names.iter().map(|n| self.partition(n)).collect::<Result<Vec<_>, _>>()?;
        let c = match matrix {
            Some(text) => ChoiceMatrix::parse(text)?,
            None => {
                let sizes: Vec<usize> = parts.iter().map(GeneralisedPartition::len).collect();
                canonical_choice_matrix(&sizes, style)?
            }
        };
        let r = common_strict_refinement(&parts, &c, complement)?;
        if self.json() {
            self.refinement_json(&r)?;
            return Ok(Status::Ok);
        }
        writeln!(self.out, "choice matrix ({0}x{0}):", c.dim())?;
        for line in c.to_string().lines() {
            writeln!(self.out, "  {line}")?;
        }
        write!(self.out, "{r}")?;
        Ok(Status::Ok)
    }

    fn refinement_json(&mut self, r: &Refinement) -> Result<(), CliError> {
        for p in &r.pieces {
            writeln!(
                self.out,
                "{}",
                json!({"piece": p.label, "region": p.region.to_string()})
            )?;
        }
        for w in &r.rewrite {
            writeln!(
                self.out,
                "{}",
                json!({"rewrite": w.label, "as": r.render_coeffs(&w.coeffs), "coeffs": w.coeffs})
            )?;
        }
        Ok(())
    }

    fn matrix_add(&mut self, a: &str, b: &str, cells: &[String], with: Option<&str>) -> Result<Status, CliError> {
        let lookup = |n: &str| {
            self.ws
                .matrix(n)
                .ok_or_else(|| CliError::Usage(format!("unknown matrix `{n}`")))
        };
        let (m1, m2) = (lookup(a)?, lookup(b)?);
        let v = self.valuation(with)?;
        let (sum, r) = matrix_add(m1, m2)?;
        // Pieces that are not original blocks, such as the complement.
        let derived = r.aliases();
        let rendered = sum.render_with(&derived);
        if self.json() {
            writeln!(self.out, "{}", json!({"sum": format!("{a} + {b}"), "expr": rendered}))?;
            self.refinement_json(&r)?;
        } else {
            writeln!(self.out, "{a} + {b} = {rendered}")?;
            write!(self.out, "{r}")?;
        }
        for cell in cells {
            let p: Point = cell.parse()?;
            let (i, j) = match p.coords() {
                [i, j] => match (to_i64(i), to_i64(j)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => return Err(CliError::Usage(format!("cell `{cell}` is not an integer pair"))),
                },
                _ => return Err(CliError::Usage(format!("cell `{cell}` must be `i,j`"))),
            };
            let value = matrix_eval_cell(&sum, &self.ws.env, i, j, &v)?;
            let mut breakdown = Vec::new();
            for (k, piece) in r
                .pieces
                .iter()
                .enumerate()
                .filter(|(_, q)| derived.contains_key(&q.region))
            {
                if let Some(s) = complement_breakdown(&r, k, &self.ws.env, &p, &v)? {
                    breakdown.push((piece.label.clone(), s));
                }
            }
            if self.json() {
                let row = json!({
                    "cell": [i, j],
                    "value": value.to_string(),
                    "blocks": value.blocks,
                    "complement": breakdown.iter().map(|(l, s)| json!({"piece": l, "multiplicity": s})).collect::<Vec<_>>(),
                });
                writeln!(self.out, "{row}")?;
            } else {
                writeln!(self.out, "cell ({i},{j}) = {value}")?;
                for (label, s) in breakdown {
                    writeln!(self.out, "  {label}: {s}")?;
                }
            }
        }
        Ok(Status::Ok)
    }

    fn spline_merge(&mut self, a: &str, b: &str, at: &[String], with: Option<&str>) -> Result<Status, CliError> {
        let lookup = |n: &str| {
            self.ws
                .spline(n)
                .ok_or_else(|| CliError::Usage(format!("unknown spline `{n}`")))
        };
        let (s, t) = (lookup(a)?, lookup(b)?);
        let v = self.valuation(with)?;
        let (merged, r) = spline_merge(s, t)?;
        let rendered = merged.render_with(&r.aliases());
        if self.json() {
            writeln!(
                self.out,
                "{}",
                json!({"merge": format!("{a} >< {b}"), "expr": rendered})
            )?;
            self.refinement_json(&r)?;
        } else {
            writeln!(self.out, "{a} >< {b} = {rendered}")?;
            write!(self.out, "{r}")?;
        }
        for x in at {
            let x = parse_rational(x)?;
            let seg = spline_eval_region(&merged, &self.ws.env, &[s, t], &x, &v)?;
            if self.json() {
                let row = match &seg {
                    Some(g) => json!({
                        "x": fmt_rational(&x),
                        "atoms": g.atoms,
                        "lo": fmt_rational(&g.lo),
                        "hi": fmt_rational(&g.hi),
                    }),
                    None => json!({"x": fmt_rational(&x), "atoms": null}),
                };
                writeln!(self.out, "{row}")?;
            } else {
                match seg {
                    Some(g) => writeln!(self.out, "at {} = {g}", fmt_rational(&x))?,
                    None => writeln!(self.out, "at {} = outside", fmt_rational(&x))?,
                }
            }
        }
        Ok(Status::Ok)
    }

    fn check(&mut self, check: &Check) -> Result<Status, CliError> {
        let env = &self.ws.env;
        let report = match check {
            Check::Karr { atom, bounds, with } => {
                let f = env.atoms.get(atom)?;
                let b = parse_ints(bounds)?;
                let bounds: [i64; 3] = b
                    .try_into()
                    .map_err(|_| CliError::Usage(format!("expected three bounds, got `{bounds}`")))?;
                karr_split_check(f, bounds, &self.valuation(with.as_deref())?)?
            }
            Check::Invert {
                atom,
                over,
                op,
                at,
                with,
            } => {
                let star = StarOp::builtin(op)?;
                let region = self.ws.parse_region(over)?;
                let v = self.valuation(with.as_deref())?;
                let sample = self.sample(&[&region], at, &v)?;
                let term = HybridTerm::new(FreeWord::parse(atom)?, region);
                star_inverse_identity_check(&star, &term, env, &v, &sample)?
            }
            Check::Linear {
                atom,
                partition,
                sum,
                with,
            } => {
                let (lo, hi) = sum
                    .split_once("..")
                    .ok_or_else(|| CliError::Usage(format!("expected `lo..hi`, got `{sum}`")))?;
                let (lo, hi) = (parse_int(lo)?, parse_int(hi)?);
                let op = FiniteSum::new(lo, hi)?;
                let p = self.partition(partition)?;
                let v = self.valuation(with.as_deref())?;
                let mut report = linear_additivity_check(&op, atom, &p, env, &v)?;
                report.absorb(validate_linear_operator(&op)?);
                report
            }
            Check::Partition { part, at, with } => {
                let p = self.partition(part)?;
                let v = self.valuation(with.as_deref())?;
                let mut regions = vec![&p.universe];
                regions.extend(p.pieces.iter().map(|q| &q.region));
                let sample = self.sample(&regions, at, &v)?;
                partition_report(&p, self.ws, &v, &sample)?
            }
        };
        if self.json() {
            let row = json!({
                "check": report.name,
                "passed": report.passed(),
                "checked": report.checked,
                "violations": report.violations,
            });
            writeln!(self.out, "{row}")?;
        } else {
            writeln!(self.out, "{report}")?;
        }
        Ok(if report.passed() {
            Status::Ok
        } else {
            Status::CheckFailed
        })
    }

    /// Points given with `--at`, or every point of the given regions when
    /// each is a single grid rectangle or finite point set.
    fn sample(&self, regions: &[&SymbolicHybridSet], at: &[String], v: &Valuation) -> Result<Vec<Point>, CliError> {
        if !at.is_empty() {
            return parse_points(at);
        }
        let mut points = BTreeSet::new();
        for region in regions {
            for (name, _) in region.terms() {
                points.extend(self.enumerate(name, v)?);
            }
        }
        Ok(points.into_iter().collect())
    }

    fn enumerate(&self, name: &str, v: &Valuation) -> Result<Vec<Point>, CliError> {
        let no_default = || CliError::Usage(format!("cannot enumerate region `{name}`; pass points with --at"));
        match &self.ws.env.regions.get(name)?.shape {
            RegionShape::FinitePointSet(points) => Ok(points.clone()),
            RegionShape::GridRect {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
            } => {
                let range = |lo: &ParamExpr, hi: &ParamExpr| -> Result<(i64, i64), CliError> {
                    let (lo, hi) = (lo.eval(v)?.ceil(), hi.eval(v)?.floor());
                    match (to_i64(&lo), to_i64(&hi)) {
                        (Some(lo), Some(hi)) => Ok((lo, hi)),
                        _ => Err(no_default()),
                    }
                };
                let (r0, r1) = range(row_lo, row_hi)?;
                let (c0, c1) = range(col_lo, col_hi)?;
                let count = (r1 - r0 + 1).max(0) as u128 * (c1 - c0 + 1).max(0) as u128;
                if count > MAX_SAMPLE as u128 {
                    return Err(CliError::Usage(format!(
                        "region `{name}` has {count} cells; pass points with --at"
                    )));
                }
                Ok((r0..=r1)
                    .flat_map(|i| (c0..=c1).map(move |j| Point::cell(i, j)))
                    .collect())
            }
            _ => Err(no_default()),
        }
    }
}

fn partition_report(
    p: &GeneralisedPartition,
    ws: &Workspace,
    v: &Valuation,
    sample: &[Point],
) -> Result<CheckReport, CliError> {
    let regions = &ws.env.regions;
    let mut report = CheckReport {
        name: format!("partition `{}`", p.name),
        checked: 0,
        violations: Vec::new(),
    };
    for x in sample {
        let mut sum = 0i64;
        for piece in &p.pieces {
            sum += regions.multiplicity(&piece.region, x, v)?;
        }
        let whole = regions.multiplicity(&p.universe, x, v)?;
        report.checked += 1;
        if sum != whole {
            report
                .violations
                .push(format!("at {x}: pieces sum to {sum}, {} has {whole}", p.universe));
        }
    }
    Ok(report)
}

/// `(2,3)` as `2,3`, for `name(2,3)`.
fn bare(p: &Point) -> String {
    let s = p.to_string();
    match s.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        Some(inner) => inner.to_string(),
        None => s,
    }
}

fn parse_points(at: &[String]) -> Result<Vec<Point>, CliError> {
    at.iter().map(|s| s.parse::<Point>().map_err(CliError::from)).collect()
}

fn parse_int(s: &str) -> Result<i64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("expected an integer, got `{s}`")))
}

fn parse_ints(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',').map(parse_int).collect()
}
