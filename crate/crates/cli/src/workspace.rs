//! Line-oriented workspace files.
//!
//! ```text
//! # comment
//! param a, b
//! region A1 = interval[0, a)
//! region U = universe
//! fn f(x) = 2*x + 1
//! fn S opaque
//! matrix M1 (n, m) over G = A1, B1, C1, D1
//! spline S over I = S_ac[a, c] on P1, S_cb[c, b] on P2
//! partition A over U = A1, A2: U - A1
//! expr e = join(term(f, A1), term(g, U - A1))
//! valuation v1 = a=1/2, b=3
//! ```
//!
//! Names must be declared before use. Matrices and splines declare their
//! grid or interval region, and splines also their piece regions and
//! segment atoms.

use std::fmt;

use hybridsets::apps::{Block, Segment, SymbolicBlockMatrix, SymbolicSpline};
use hybridsets::refine::GeneralisedPartition;
use hybridsets::{
    join, marked_join, Env, FreeWord, FunctionAtom, HybridError, HybridExpr, HybridTerm, JoinOp, ParamExpr, Point,
    RegionAtom, RegionShape, ScalarExpr, StarOp, SymbolicHybridSet, Valuation,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkspaceError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("{line}:{col}: unresolved {kind} `{name}`")]
    Unresolved {
        line: usize,
        col: usize,
        kind: &'static str,
        name: String,
    },

    #[error("{line}:{col}: duplicate {kind} `{name}`")]
    Duplicate {
        line: usize,
        col: usize,
        kind: &'static str,
        name: String,
    },
}

impl WorkspaceError {
    pub fn line(&self) -> usize {
        match self {
            WorkspaceError::Syntax { line, .. }
            | WorkspaceError::Unresolved { line, .. }
            | WorkspaceError::Duplicate { line, .. } => *line,
        }
    }

    /// The error without its location.
    pub fn message(&self) -> String {
        match self {
            WorkspaceError::Syntax { msg, .. } => format!("syntax error: {msg}"),
            WorkspaceError::Unresolved { kind, name, .. } => format!("unresolved {kind} `{name}`"),
            WorkspaceError::Duplicate { kind, name, .. } => format!("duplicate {kind} `{name}`"),
        }
    }

    pub fn col(&self) -> usize {
        match self {
            WorkspaceError::Syntax { col, .. }
            | WorkspaceError::Unresolved { col, .. }
            | WorkspaceError::Duplicate { col, .. } => *col,
        }
    }
}

type Result<T> = std::result::Result<T, WorkspaceError>;

/// A named expression binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub expr: HybridExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedValuation {
    pub name: String,
    pub valuation: Valuation,
}

/// Parsed and resolved declarations, in file order within each kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workspace {
    pub params: Vec<String>,
    pub regions: Vec<RegionAtom>,
    pub functions: Vec<FunctionAtom>,
    pub matrices: Vec<SymbolicBlockMatrix>,
    pub splines: Vec<SymbolicSpline>,
    pub partitions: Vec<GeneralisedPartition>,
    pub exprs: Vec<Binding>,
    pub valuations: Vec<NamedValuation>,
    /// Every region and function atom, including those declared by
    /// matrices and splines.
    pub env: Env,
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ws = Workspace::default();
        for (k, raw) in text.lines().enumerate() {
            let content = match raw.find('#') {
                Some(c) => &raw[..c],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let line = Line { no: k + 1, text: raw };
            ws.declare(&line, content.trim())?;
        }
        Ok(ws)
    }

    pub fn expr(&self, name: &str) -> Option<&HybridExpr> {
        self.exprs.iter().find(|b| b.name == name).map(|b| &b.expr)
    }

    pub fn matrix(&self, name: &str) -> Option<&SymbolicBlockMatrix> {
        self.matrices.iter().find(|m| m.name == name)
    }

    pub fn spline(&self, name: &str) -> Option<&SymbolicSpline> {
        self.splines.iter().find(|s| s.name == name)
    }

    pub fn partition(&self, name: &str) -> Option<&GeneralisedPartition> {
        self.partitions.iter().find(|p| p.name == name)
    }

    pub fn valuation(&self, name: &str) -> Option<&Valuation> {
        self.valuations.iter().find(|v| v.name == name).map(|v| &v.valuation)
    }

    /// Parses an expression against this workspace, as on the right-hand
    /// side of an `expr` line.
    pub fn parse_expr(&self, text: &str) -> Result<HybridExpr> {
        let line = Line { no: 0, text };
        self.expression(&line, text.trim())
    }

    fn declare(&mut self, line: &Line, content: &str) -> Result<()> {
        let (keyword, rest) = split_word(content);
        match keyword {
            "param" => self.declare_params(line, rest),
            "region" => self.declare_region(line, rest),
            "fn" => self.declare_fn(line, rest),
            "matrix" => self.declare_matrix(line, rest),
            "spline" => self.declare_spline(line, rest),
            "partition" => self.declare_partition(line, rest),
            "expr" => self.declare_expr(line, rest),
            "valuation" => self.declare_valuation(line, rest),
            _ => Err(line.syntax(keyword, format!("unknown declaration `{keyword}`"))),
        }
    }

    fn declare_params(&mut self, line: &Line, rest: &str) -> Result<()> {
        for name in split_top(rest, ',') {
            let name = line.ident(name)?;
            if self.params.iter().any(|p| p == name) {
                return Err(line.duplicate(name, name, "parameter"));
            }
            self.params.push(name.to_string());
        }
        Ok(())
    }

    fn declare_region(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (name, body) = line.binding(rest)?;
        let shape = self.shape(line, body)?;
        if self.env.regions.contains(name) {
            return Err(line.duplicate(name, name, "region"));
        }
        let atom = RegionAtom::new(name, shape);
        self.env.regions.insert(atom.clone()).map_err(|e| line.lib(name, e))?;
        self.regions.push(atom);
        Ok(())
    }

    fn declare_fn(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (head, tail) = split_word(rest);
        let atom = if tail == "opaque" {
            FunctionAtom::opaque(line.ident(head)?)
        } else {
            let (lhs, body) = line.assignment(rest)?;
            let name = match lhs.strip_suffix("(x)") {
                Some(n) => n.trim_end(),
                None => lhs,
            };
            let name = line.ident(name)?;
            let expr = ScalarExpr::parse(body).map_err(|e| line.lib(body, e))?;
            for p in scalar_params(&expr) {
                self.require_param(line, body, &p)?;
            }
            FunctionAtom::with_body(name, expr)
        };
        if self.env.atoms.contains(&atom.name) {
            let at = split_word(rest).0;
            return Err(line.duplicate(at, &atom.name, "function atom"));
        }
        self.env.atoms.insert(atom.clone()).map_err(|e| line.lib(rest, e))?;
        self.functions.push(atom);
        Ok(())
    }

    fn declare_matrix(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (head, body) = line.assignment(rest)?;
        let (name, tail) = split_word(head);
        let name = line.ident(name)?;
        let tail = tail
            .strip_prefix('(')
            .ok_or_else(|| line.syntax(tail, "expected `(rows, cols)`"))?;
        let (dims, tail) = tail.split_once(')').ok_or_else(|| line.syntax(tail, "unclosed `(`"))?;
        let [rows, cols] = split_top(dims, ',')[..] else {
            return Err(line.syntax(dims, "expected `rows, cols`"));
        };
        let rows = self.bound(line, rows)?;
        let cols = self.bound(line, cols)?;
        let universe = line.over(tail.trim())?;
        let mut blocks = Vec::new();
        for b in split_top(body, ',') {
            let b = line.ident(b)?;
            let region = self
                .env
                .regions
                .get(b)
                .map_err(|_| line.unresolved(b, "region"))?
                .clone();
            blocks.push(Block {
                name: b.to_string(),
                region,
            });
        }
        if self.matrix(name).is_some() {
            return Err(line.duplicate(name, name, "matrix"));
        }
        let m = SymbolicBlockMatrix::new(name, rows, cols, universe, blocks).map_err(|e| line.lib(body, e))?;
        m.register(&mut self.env).map_err(|e| line.lib(rest, e))?;
        self.matrices.push(m);
        Ok(())
    }

    fn declare_spline(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (head, body) = line.assignment(rest)?;
        let (name, tail) = split_word(head);
        let name = line.ident(name)?;
        let universe = line.over(tail)?;
        let mut segments = Vec::new();
        for seg in split_top(body, ',') {
            let (lhs, piece) = seg
                .split_once(" on ")
                .ok_or_else(|| line.syntax(seg, "expected `ATOM[lo, hi] on PIECE`"))?;
            let (atom, knots) = lhs
                .trim()
                .split_once('[')
                .ok_or_else(|| line.syntax(lhs, "expected `ATOM[lo, hi]`"))?;
            let knots = knots
                .strip_suffix(']')
                .ok_or_else(|| line.syntax(knots, "expected `]`"))?;
            let [lo, hi] = split_top(knots, ',')[..] else {
                return Err(line.syntax(knots, "expected two knots"));
            };
            segments.push(Segment {
                atom: line.ident(atom.trim())?.to_string(),
                lo: self.bound(line, lo)?,
                hi: self.bound(line, hi)?,
                piece: line.ident(piece.trim())?.to_string(),
            });
        }
        if self.spline(name).is_some() {
            return Err(line.duplicate(name, name, "spline"));
        }
        let s = SymbolicSpline::new(name, universe, segments).map_err(|e| line.lib(body, e))?;
        s.register(&mut self.env).map_err(|e| line.lib(rest, e))?;
        self.splines.push(s);
        Ok(())
    }

    fn declare_partition(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (head, body) = line.assignment(rest)?;
        let (name, tail) = split_word(head);
        let name = line.ident(name)?;
        let (universe, assumed) = match tail.strip_suffix("assumed") {
            Some(u) => (u.trim(), true),
            None => (tail, false),
        };
        let universe = universe
            .strip_prefix("over")
            .filter(|u| u.starts_with(char::is_whitespace))
            .ok_or_else(|| line.syntax(tail, "expected `over REGION`"))?;
        let universe = self.region_expr(line, universe.trim())?;
        let mut pieces = Vec::new();
        for piece in split_top(body, ',') {
            let (label, region) = match piece.split_once(':') {
                Some((l, r)) => (line.ident(l.trim())?.to_string(), r.trim()),
                None => (String::new(), piece),
            };
            let region = self.region_expr(line, region)?;
            let label = if label.is_empty() { region.to_string() } else { label };
            pieces.push((label, region));
        }
        if self.partition(name).is_some() {
            return Err(line.duplicate(name, name, "partition"));
        }
        let p = if assumed {
            GeneralisedPartition::assumed(name, universe, pieces)
        } else {
            GeneralisedPartition::new(name, universe, pieces)
        };
        self.partitions.push(p.map_err(|e| line.lib(body, e))?);
        Ok(())
    }

    fn declare_expr(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (name, body) = line.binding(rest)?;
        let expr = self.expression(line, body)?;
        if self.expr(name).is_some() {
            return Err(line.duplicate(name, name, "expression"));
        }
        self.exprs.push(Binding {
            name: name.to_string(),
            expr,
        });
        Ok(())
    }

    fn declare_valuation(&mut self, line: &Line, rest: &str) -> Result<()> {
        let (name, body) = line.binding(rest)?;
        let valuation = self.valuation_text(line, body)?;
        if self.valuation(name).is_some() {
            return Err(line.duplicate(name, name, "valuation"));
        }
        self.valuations.push(NamedValuation {
            name: name.to_string(),
            valuation,
        });
        Ok(())
    }

    /// Parses `a=1/2, b=3`, where every name must be a declared parameter.
    pub fn parse_valuation(&self, text: &str) -> Result<Valuation> {
        self.valuation_text(&Line { no: 0, text }, text)
    }

    fn valuation_text(&self, line: &Line, body: &str) -> Result<Valuation> {
        for part in split_top(body, ',') {
            let name = part.split_once('=').map_or(part, |(n, _)| n.trim());
            self.require_param(line, name, name)?;
        }
        Valuation::parse(body).map_err(|e| line.lib(body, e))
    }

    fn require_param(&self, line: &Line, at: &str, name: &str) -> Result<()> {
        if self.params.iter().any(|p| p == name) {
            Ok(())
        } else {
            Err(line.unresolved_at(at, name, "parameter"))
        }
    }

    fn bound(&self, line: &Line, text: &str) -> Result<ParamExpr> {
        let b = ParamExpr::parse(text).map_err(|e| line.lib(text, e))?;
        if let Some(p) = &b.param {
            self.require_param(line, text, p)?;
        }
        Ok(b)
    }

    fn shape(&self, line: &Line, body: &str) -> Result<RegionShape> {
        if body == "universe" {
            return Ok(RegionShape::Universe);
        }
        if let Some(inner) = body.strip_prefix("interval") {
            let inner = inner.trim_start();
            let lo_closed = match inner.chars().next() {
                Some('[') => true,
                Some('(') => false,
                _ => return Err(line.syntax(inner, "expected `[` or `(`")),
            };
            let hi_closed = match inner.chars().last() {
                Some(']') => true,
                Some(')') => false,
                _ => return Err(line.syntax(inner, "expected `]` or `)`")),
            };
            let [lo, hi] = split_top(&inner[1..inner.len() - 1], ',')[..] else {
                return Err(line.syntax(inner, "expected two bounds"));
            };
            return Ok(RegionShape::interval(
                self.bound(line, lo)?,
                self.bound(line, hi)?,
                lo_closed,
                hi_closed,
            ));
        }
        if let Some(inner) = body.strip_prefix("rect") {
            let inner = line.enclosed(inner.trim_start(), '(', ')')?;
            let [rows, cols] = split_top(inner, ',')[..] else {
                return Err(line.syntax(inner, "expected `r0..r1, c0..c1`"));
            };
            let range = |text: &str| -> Result<(ParamExpr, ParamExpr)> {
                let (lo, hi) = text
                    .split_once("..")
                    .ok_or_else(|| line.syntax(text, "expected `lo..hi`"))?;
                Ok((self.bound(line, lo.trim())?, self.bound(line, hi.trim())?))
            };
            let (r0, r1) = range(rows)?;
            let (c0, c1) = range(cols)?;
            return Ok(RegionShape::rect(r0, r1, c0, c1));
        }
        if let Some(inner) = body.strip_prefix("points") {
            let inner = line.enclosed(inner.trim_start(), '{', '}')?;
            let points = split_top(inner, ',')
                .into_iter()
                .map(|p| p.parse::<Point>().map_err(|e| line.lib(p, e)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(RegionShape::FinitePointSet(points));
        }
        Err(line.syntax(body, "expected `universe`, `interval`, `rect` or `points`"))
    }

    /// Parses a region expression whose atoms must all be declared.
    pub fn parse_region(&self, text: &str) -> Result<SymbolicHybridSet> {
        self.region_expr(&Line { no: 0, text }, text.trim())
    }

    fn region_expr(&self, line: &Line, text: &str) -> Result<SymbolicHybridSet> {
        let s = SymbolicHybridSet::parse(text).map_err(|e| line.lib(text, e))?;
        if let Some(a) = s.atoms().find(|a| !self.env.regions.contains(a)) {
            return Err(line.unresolved_at(text, a, "region"));
        }
        Ok(s)
    }

    fn expression(&self, line: &Line, text: &str) -> Result<HybridExpr> {
        if let Some(inner) = text.strip_prefix("mjoin") {
            let inner = line.enclosed(inner.trim_start(), '(', ')')?;
            let args = split_top(inner, ',');
            let Some((op, args)) = args.split_first() else {
                return Err(line.syntax(inner, "expected an operation"));
            };
            let star = StarOp::builtin(op).map_err(|e| line.lib(op, e))?;
            let mut terms = Vec::new();
            for a in args {
                terms.extend(self.expression(line, a)?.terms);
            }
            return marked_join(star, terms).map_err(|e| line.lib(text, e));
        }
        if let Some(inner) = text.strip_prefix("join") {
            let inner = line.enclosed(inner.trim_start(), '(', ')')?;
            let args = split_top(inner, ',');
            if args.iter().all(|a| a.starts_with("term")) {
                let terms = args.iter().map(|a| self.term(line, a)).collect::<Result<Vec<_>>>()?;
                return Ok(HybridExpr::join_of(terms));
            }
            let mut acc = HybridExpr::empty_join();
            for a in args {
                acc = join(acc, self.expression(line, a)?).map_err(|e| line.lib(a, e))?;
            }
            return Ok(acc);
        }
        if text.starts_with("term") {
            return Ok(self.term(line, text)?.into());
        }
        match self.expr(text) {
            Some(e) => Ok(e.clone()),
            None if is_ident(text) => Err(line.unresolved(text, "expression")),
            None => Err(line.syntax(text, "expected `join(...)`, `mjoin(...)`, `term(...)` or a name")),
        }
    }

    fn term(&self, line: &Line, text: &str) -> Result<HybridTerm> {
        let inner = text
            .strip_prefix("term")
            .ok_or_else(|| line.syntax(text, "expected `term(WORD, REGION)`"))?;
        let inner = line.enclosed(inner.trim_start(), '(', ')')?;
        let [word, region] = split_top(inner, ',')[..] else {
            return Err(line.syntax(inner, "expected `WORD, REGION`"));
        };
        let value = FreeWord::parse(word).map_err(|e| line.lib(word, e))?;
        if let Some((a, _)) = value.exponents().find(|(a, _)| !self.env.atoms.contains(a)) {
            return Err(line.unresolved_at(word, a, "function atom"));
        }
        Ok(HybridTerm::new(value, self.region_expr(line, region)?))
    }
}

/// Word separator that [`FreeWord::parse`] reads back.
fn word_symbol(e: &HybridExpr) -> &str {
    match e.word_symbol() {
        s @ ("+" | "*" | "><") => s,
        _ => ".",
    }
}

/// Renders an expression in workspace syntax.
pub fn render_expr(e: &HybridExpr) -> String {
    let sym = word_symbol(e);
    let terms: Vec<String> = e
        .terms
        .iter()
        .map(|t| format!("term({}, {})", t.value.render(sym), t.region))
        .collect();
    match &e.op {
        JoinOp::Join => format!("join({})", terms.join(", ")),
        JoinOp::Marked(s) => {
            let mut parts = vec![s.name().to_string()];
            parts.extend(terms);
            format!("mjoin({})", parts.join(", "))
        }
    }
}

impl fmt::Display for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.params.is_empty() {
            writeln!(f, "param {}", self.params.join(", "))?;
        }
        for r in &self.regions {
            writeln!(f, "region {} = {}", r.name, r.shape)?;
        }
        for a in &self.functions {
            match &a.body {
                Some(b) => writeln!(f, "fn {}(x) = {b}", a.name)?,
                None => writeln!(f, "fn {} opaque", a.name)?,
            }
        }
        for m in &self.matrices {
            let blocks: Vec<&str> = m.blocks.iter().map(|b| b.name.as_str()).collect();
            writeln!(
                f,
                "matrix {} ({}, {}) over {} = {}",
                m.name,
                m.rows,
                m.cols,
                m.universe,
                blocks.join(", ")
            )?;
        }
        for s in &self.splines {
            let segs: Vec<String> = s
                .segments
                .iter()
                .map(|g| format!("{}[{}, {}] on {}", g.atom, g.lo, g.hi, g.piece))
                .collect();
            writeln!(f, "spline {} over {} = {}", s.name, s.universe, segs.join(", "))?;
        }
        for p in &self.partitions {
            let pieces: Vec<String> = p
                .pieces
                .iter()
                .map(|q| {
                    let region = q.region.to_string();
                    if region == q.label {
                        region
                    } else {
                        format!("{}: {region}", q.label)
                    }
                })
                .collect();
            let assumed = if p.assumed { " assumed" } else { "" };
            writeln!(
                f,
                "partition {} over {}{assumed} = {}",
                p.name,
                p.universe,
                pieces.join(", ")
            )?;
        }
        for b in &self.exprs {
            writeln!(f, "expr {} = {}", b.name, render_expr(&b.expr))?;
        }
        for v in &self.valuations {
            writeln!(f, "valuation {} = {}", v.name, v.valuation)?;
        }
        Ok(())
    }
}

/// One source line, for locating errors. Fragments passed to its methods
/// must be subslices of `text`.
struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl Line<'_> {
    fn col(&self, fragment: &str) -> usize {
        let base = self.text.as_ptr() as usize;
        let at = fragment.as_ptr() as usize;
        if at < base || at > base + self.text.len() {
            return 1;
        }
        self.text[..at - base].chars().count() + 1
    }

    fn syntax(&self, at: &str, msg: impl Into<String>) -> WorkspaceError {
        WorkspaceError::Syntax {
            line: self.no,
            col: self.col(at),
            msg: msg.into(),
        }
    }

    fn lib(&self, at: &str, e: HybridError) -> WorkspaceError {
        match e {
            HybridError::UnknownRegion(name) => self.unresolved_at(at, &name, "region"),
            HybridError::UnknownAtom(name) => self.unresolved_at(at, &name, "function atom"),
            HybridError::Parse(msg) => self.syntax(at, msg),
            other => self.syntax(at, other.to_string()),
        }
    }

    fn unresolved(&self, name: &str, kind: &'static str) -> WorkspaceError {
        self.unresolved_at(name, name, kind)
    }

    fn unresolved_at(&self, at: &str, name: &str, kind: &'static str) -> WorkspaceError {
        // Point at the name itself when it occurs in the fragment.
        let col = match at.find(name) {
            Some(k) => self.col(&at[k..]),
            None => self.col(at),
        };
        WorkspaceError::Unresolved {
            line: self.no,
            col,
            kind,
            name: name.to_string(),
        }
    }

    fn duplicate(&self, at: &str, name: &str, kind: &'static str) -> WorkspaceError {
        WorkspaceError::Duplicate {
            line: self.no,
            col: self.col(at),
            kind,
            name: name.to_string(),
        }
    }

    fn ident<'s>(&self, s: &'s str) -> Result<&'s str> {
        if is_ident(s) {
            Ok(s)
        } else {
            Err(self.syntax(s, format!("expected a name, found `{s}`")))
        }
    }

    /// `LHS = RHS`.
    fn assignment<'s>(&self, s: &'s str) -> Result<(&'s str, &'s str)> {
        let (lhs, rhs) = s.split_once('=').ok_or_else(|| self.syntax(s, "expected `=`"))?;
        let rhs = rhs.trim();
        if rhs.is_empty() {
            return Err(self.syntax(rhs, "missing right-hand side"));
        }
        Ok((lhs.trim(), rhs))
    }

    /// `NAME = RHS`.
    fn binding<'s>(&self, s: &'s str) -> Result<(&'s str, &'s str)> {
        let (lhs, rhs) = self.assignment(s)?;
        Ok((self.ident(lhs)?, rhs))
    }

    fn over<'s>(&self, s: &'s str) -> Result<&'s str> {
        let (kw, name) = split_word(s);
        if kw != "over" {
            return Err(self.syntax(s, "expected `over NAME`"));
        }
        self.ident(name)
    }

    fn enclosed<'s>(&self, s: &'s str, open: char, close: char) -> Result<&'s str> {
        s.strip_prefix(open)
            .and_then(|r| r.strip_suffix(close))
            .map(str::trim)
            .ok_or_else(|| self.syntax(s, format!("expected `{open}...{close}`")))
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// First whitespace-separated word and the trimmed rest.
fn split_word(s: &str) -> (&str, &str) {
    match s.find(char::is_whitespace) {
        Some(k) => (&s[..k], s[k..].trim()),
        None => (s, ""),
    }
}

/// Splits on `sep` outside brackets, trimming each part. Empty input gives
/// no parts.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(s[start..k].trim());
                start = k + c.len_utf8();
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !parts.is_empty() {
        parts.push(last);
    }
    parts
}

fn scalar_params(e: &ScalarExpr) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![e];
    while let Some(e) = stack.pop() {
        match e {
            ScalarExpr::Param(p) => out.push(p.clone()),
            ScalarExpr::Neg(a) => stack.push(a),
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) | ScalarExpr::Mul(a, b) | ScalarExpr::Div(a, b) => {
                stack.push(a);
                stack.push(b);
            }
            ScalarExpr::Const(_) | ScalarExpr::X => {}
        }
    }
    out
}
