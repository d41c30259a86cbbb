//! Fixtures shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

pub mod checks;

use hybridsets::apps::{SymbolicBlockMatrix, SymbolicSpline};
use hybridsets::oracle::{ClassicalPiecewise, PieceFn};
use hybridsets::point::{int, ratio};
use hybridsets::refine::{common_strict_refinement, ChoiceMatrix, GeneralisedPartition, Refinement};
use hybridsets::{
    AtomTable, Env, FunctionAtom, HybridExpr, HybridTerm, ParamExpr, Point, Rational, RegionAtom, RegionShape,
    RegionTable, ScalarExpr, SymbolicHybridSet, Valuation,
};

pub fn r(s: &str) -> SymbolicHybridSet {
    SymbolicHybridSet::parse(s).unwrap()
}

pub fn pe(s: &str) -> ParamExpr {
    ParamExpr::parse(s).unwrap()
}

/// `k/n` for `k = 0..n`.
pub fn unit_grid(n: i64) -> Vec<Rational> {
    (0..n).map(|k| ratio(k, n)).collect()
}

pub fn points(xs: &[Rational]) -> Vec<Point> {
    xs.iter().cloned().map(Point::scalar).collect()
}

pub fn half_open(name: &str, lo: ParamExpr, hi: ParamExpr) -> RegionAtom {
    RegionAtom::new(name, RegionShape::interval(lo, hi, true, false))
}

/// The two step functions `f = 2 on [0,a), 0 after` and
/// `g = 5 on [0,b), 7 after`, on `U = [0,1)`.
pub struct Mult0 {
    pub env: Env,
    pub f: HybridExpr,
    pub g: HybridExpr,
    pub refinement: Refinement,
}

pub fn mult0() -> Mult0 {
    let regions = RegionTable::new()
        .with(half_open("U", pe("0"), pe("1")))
        .with(half_open("A1", pe("0"), pe("a")))
        .with(half_open("B1", pe("0"), pe("b")));
    let atoms = AtomTable::new()
        .with(FunctionAtom::constant("f1", int(2)))
        .with(FunctionAtom::constant("f2", int(0)))
        .with(FunctionAtom::constant("g1", int(5)))
        .with(FunctionAtom::constant("g2", int(7)));
    let f = HybridExpr::join_of(vec![
        HybridTerm::atom("f1", r("A1")),
        HybridTerm::atom("f2", r("U - A1")),
    ]);
    let g = HybridExpr::join_of(vec![
        HybridTerm::atom("g1", r("B1")),
        HybridTerm::atom("g2", r("U - B1")),
    ]);
    let pa = GeneralisedPartition::new("A", r("U"), vec![("A1", r("A1")), ("A2", r("U - A1"))]).unwrap();
    let pb = GeneralisedPartition::new("B", r("U"), vec![("B1", r("B1")), ("B2", r("U - B1"))]).unwrap();
    // Rows: U = P1 + P2 + P3, A1 = P1, B1 = P1 + P2; so the pieces are
    // A1, B1 - A1 and U - B1.
    let c = ChoiceMatrix::parse("1 1 1; 1 0 0; 1 1 0").unwrap();
    let refinement = common_strict_refinement(&[pa, pb], &c, "P").unwrap();
    Mult0 {
        env: Env::new(regions, atoms),
        f,
        g,
        refinement,
    }
}

fn konst(c: Rational) -> PieceFn<Rational, Rational> {
    Arc::new(move |_| Some(c.clone()))
}

/// Two-piece step function on a finite grid: `lo` below `cut`, `hi` from
/// `cut` on.
pub fn classical_step(
    grid: &[Rational],
    cut: &Rational,
    lo: Rational,
    hi: Rational,
) -> ClassicalPiecewise<Rational, Rational> {
    let universe: BTreeSet<Rational> = grid.iter().cloned().collect();
    let below: BTreeSet<Rational> = grid.iter().filter(|x| *x < cut && **x >= int(0)).cloned().collect();
    let rest: BTreeSet<Rational> = universe.difference(&below).cloned().collect();
    ClassicalPiecewise::new(universe, vec![(below, konst(lo)), (rest, konst(hi))]).unwrap()
}

pub fn mult0_valuation(a: Rational, b: Rational) -> Valuation {
    Valuation::new().with("a", a).with("b", b)
}

pub fn matrix_pair() -> (SymbolicBlockMatrix, SymbolicBlockMatrix, Env) {
    let m1 = SymbolicBlockMatrix::two_by_two(
        "M1",
        (pe("n"), pe("m")),
        (pe("h1"), pe("k1")),
        "U",
        ["A1", "B1", "C1", "D1"],
    )
    .unwrap();
    let m2 = SymbolicBlockMatrix::two_by_two(
        "M2",
        (pe("n"), pe("m")),
        (pe("h2"), pe("k2")),
        "U",
        ["A2", "B2", "C2", "D2"],
    )
    .unwrap();
    let mut env = Env::default();
    m1.register(&mut env).unwrap();
    m2.register(&mut env).unwrap();
    (m1, m2, env)
}

pub fn matrix_valuation(n: i64, m: i64, h1: i64, h2: i64, k1: i64, k2: i64) -> Valuation {
    Valuation::new()
        .with("n", int(n))
        .with("m", int(m))
        .with("h1", int(h1))
        .with("h2", int(h2))
        .with("k1", int(k1))
        .with("k2", int(k2))
}

/// Blockwise layout of a concrete 2x2 block matrix as a classical piecewise
/// function from cells to block names.
pub fn classical_blocks(
    n: i64,
    m: i64,
    h: i64,
    k: i64,
    names: [&str; 4],
) -> ClassicalPiecewise<(i64, i64), Vec<String>> {
    let cells: BTreeSet<(i64, i64)> = (1..=n).flat_map(|i| (1..=m).map(move |j| (i, j))).collect();
    let pick = |top: bool, left: bool| -> BTreeSet<(i64, i64)> {
        cells
            .iter()
            .filter(|(i, j)| (*i <= h) == top && (*j <= k) == left)
            .cloned()
            .collect()
    };
    let named = |s: &str| -> PieceFn<(i64, i64), Vec<String>> {
        let s = s.to_string();
        Arc::new(move |_| Some(vec![s.clone()]))
    };
    ClassicalPiecewise::new(
        cells.clone(),
        vec![
            (pick(true, true), named(names[0])),
            (pick(false, true), named(names[1])),
            (pick(true, false), named(names[2])),
            (pick(false, false), named(names[3])),
        ],
    )
    .unwrap()
}

pub fn spline_pair() -> (SymbolicSpline, SymbolicSpline, Env) {
    let s =
        SymbolicSpline::from_knots("S", "U", &[pe("a"), pe("c"), pe("b")], &["S_ac", "S_cb"], &["P1", "P2"]).unwrap();
    let t =
        SymbolicSpline::from_knots("T", "U", &[pe("a"), pe("d"), pe("b")], &["T_ad", "T_db"], &["Q1", "Q2"]).unwrap();
    let mut env = Env::default();
    s.register(&mut env).unwrap();
    t.register(&mut env).unwrap();
    (s, t, env)
}

pub fn spline_valuation(a: Rational, b: Rational, c: Rational, d: Rational) -> Valuation {
    Valuation::new().with("a", a).with("b", b).with("c", c).with("d", d)
}

/// `n` step functions `Z` on `L_i = [0, k_i)` and `A_i` on `U ⊖ L_i`, on
/// `U = [0, 1)`, with `Z = 0` and `A_i = values[i]`.
pub struct Steps {
    pub env: Env,
    pub operands: Vec<HybridExpr>,
}

pub fn steps(values: &[Rational]) -> Steps {
    let mut regions = RegionTable::new().with(half_open("U", pe("0"), pe("1")));
    let mut atoms = AtomTable::new().with(FunctionAtom::constant("Z", int(0)));
    let mut operands = Vec::new();
    for (i, a) in values.iter().enumerate() {
        let l = format!("L{}", i + 1);
        let name = format!("A{}", i + 1);
        regions = regions.with(half_open(&l, pe("0"), pe(&format!("k{}", i + 1))));
        atoms = atoms.with(FunctionAtom::with_body(name.clone(), ScalarExpr::Const(a.clone())));
        operands.push(HybridExpr::join_of(vec![
            HybridTerm::atom("Z", r(&l)),
            HybridTerm::atom(name, r(&format!("U - {l}"))),
        ]));
    }
    Steps {
        env: Env::new(regions, atoms),
        operands,
    }
}
