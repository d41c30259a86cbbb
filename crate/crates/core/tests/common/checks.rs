//! Law and oracle checks shared by the property tests and the acceptance
//! suite. Each check returns `Err` with a description of the first failure.

use std::collections::{BTreeMap, BTreeSet};

use hybridsets::apps::{matrix_add, matrix_eval_cell, spline_eval_region, spline_merge};
use hybridsets::calculus::{
    karr_split_check, linear_additivity_check, pointwise_star, pointwise_star_canonical, FiniteSum,
};
use hybridsets::hybridfn::graph;
use hybridsets::oracle::{classical_join, classical_star, classical_star_all, restrict};
use hybridsets::point::{int, ratio};
use hybridsets::refine::{canonical_choice_matrix, common_strict_refinement, ChoiceStyle, GeneralisedPartition};
use hybridsets::{
    eval, join, AtomTable, Element, Env, EvalOutcome, FunctionAtom, HybridExpr, HybridSet, HybridTerm, ParamExpr,
    Point, Rational, RegionAtom, RegionShape, RegionTable, ScalarExpr, StarOp, SymbolicHybridSet, Valuation,
};

use super::{
    classical_blocks, classical_step, matrix_pair, matrix_valuation, mult0, points, r, spline_pair, steps, unit_grid,
};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// Z-module laws

pub fn tokens(mults: &[i64]) -> HybridSet {
    HybridSet::from_entries(
        "U",
        mults
            .iter()
            .enumerate()
            .map(|(k, &m)| (Element::token(format!("t{k}")), m)),
    )
    .unwrap()
}

pub fn zmodule_laws(a: &HybridSet, b: &HybridSet, c: &HybridSet, n: i64, m: i64) -> Check {
    let empty = HybridSet::new("U");
    let law = |name: &str, lhs: HybridSet, rhs: HybridSet| {
        ensure(lhs == rhs, || {
            format!("{name}: {lhs} != {rhs} for a={a}, b={b}, c={c}, n={n}, m={m}")
        })
    };
    let run = || -> hybridsets::Result<Check> {
        let checks = [
            law("associativity", a.oplus(b)?.oplus(c)?, a.oplus(&b.oplus(c)?)?),
            law("commutativity", a.oplus(b)?, b.oplus(a)?),
            law("identity", a.oplus(&empty)?, a.clone()),
            law("inverse", a.oplus(&a.negate()?)?, empty.clone()),
            law("difference", a.ominus(b)?, a.oplus(&b.negate()?)?),
            law("n(a+b)", a.oplus(b)?.scalar(n)?, a.scalar(n)?.oplus(&b.scalar(n)?)?),
            law("(n+m)a", a.scalar(n + m)?, a.scalar(n)?.oplus(&a.scalar(m)?)?),
            law("(nm)a", a.scalar(n * m)?, a.scalar(m)?.scalar(n)?),
            law("1a", a.scalar(1)?, a.clone()),
            law("0a", a.scalar(0)?, empty.clone()),
            law("otimes commutes", a.otimes(b)?, b.otimes(a)?),
            law("otimes associates", a.otimes(b)?.otimes(c)?, a.otimes(&b.otimes(c)?)?),
            law(
                "otimes distributes",
                a.otimes(&b.oplus(c)?)?,
                a.otimes(b)?.oplus(&a.otimes(c)?)?,
            ),
            law("otimes scalar", a.scalar(n)?.otimes(b)?, a.otimes(b)?.scalar(n)?),
        ];
        Ok(checks.into_iter().collect())
    };
    run().map_err(e2s)?
}

// ---------------------------------------------------------------------------
// Join theorem on a finite universe {0, .., k-1} of singleton regions.

pub fn singleton_env(k: usize) -> Env {
    let mut regions = RegionTable::new();
    for i in 0..k {
        let p = Point::scalar(int(i as i64));
        regions = regions.with(RegionAtom::new(format!("x{i}"), RegionShape::FinitePointSet(vec![p])));
    }
    let x = || Box::new(ScalarExpr::X);
    let c = |n: i64| Box::new(ScalarExpr::Const(int(n)));
    let atoms = AtomTable::new()
        .with(FunctionAtom::with_body("f", ScalarExpr::X))
        .with(FunctionAtom::with_body("g", ScalarExpr::Add(x(), c(10))))
        .with(FunctionAtom::with_body(
            "h",
            ScalarExpr::Add(Box::new(ScalarExpr::Mul(c(2), x())), c(1)),
        ));
    Env::new(regions, atoms)
}

pub fn region_of(mults: &[i64]) -> SymbolicHybridSet {
    SymbolicHybridSet::from_coeffs(mults.iter().enumerate().map(|(i, &m)| (format!("x{i}"), m))).unwrap()
}

fn sample(k: usize) -> Vec<Point> {
    (0..k as i64).map(|i| Point::scalar(int(i))).collect()
}

fn body(name: &str) -> impl Fn(&i64) -> Option<Rational> + '_ {
    move |x| {
        let x = int(*x);
        Some(match name {
            "f" => x,
            "g" => x + int(10),
            _ => int(2) * x + int(1),
        })
    }
}

/// `⊕ mults(x) · ⟬(x, h(x))⟭`, built without the hybrid machinery.
fn expected_graph(mults: &[i64], h: &BTreeMap<i64, Rational>) -> Option<HybridSet> {
    let mut out = HybridSet::new("U");
    for (x, &m) in mults.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let v = h.get(&(x as i64))?;
        out.add(
            Element::pair(Element::scalar(int(x as i64)), Element::scalar(v.clone())),
            m,
        )
        .unwrap();
    }
    Some(out)
}

fn total(name: &str, k: usize) -> BTreeMap<i64, Rational> {
    let all: BTreeSet<i64> = (0..k as i64).collect();
    restrict(body(name), &all)
}

fn support(mults: &[i64]) -> BTreeSet<i64> {
    mults
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != 0)
        .map(|(x, _)| x as i64)
        .collect()
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Which way the different-functions equivalence was exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Disjoint,
    Overlapping,
}

/// The five join laws for one pair of hybrid sets of equal length. Returns
/// the direction of the different-functions equivalence that was exercised.
pub fn join_theorem(a: &[i64], b: &[i64]) -> Result<Direction, String> {
    let k = a.len();
    let env = singleton_env(k);
    let v = Valuation::new();
    let pts = sample(k);
    let (ra, rb) = (region_of(a), region_of(b));
    let gr = |e: &HybridExpr| graph(e, &env, &v, &pts).map_err(e2s);
    let term = |f: &str, reg: &SymbolicHybridSet| HybridTerm::atom(f, reg.clone());

    // Empty region: f^∅ reduces to the empty function.
    let g0 = gr(&HybridExpr::from(term("f", &SymbolicHybridSet::empty())))?;
    let reduced = g0.reduce().map_err(e2s)?;
    ensure(reduced.is_empty(), || {
        format!("empty region: f^∅ reduces to {reduced:?}")
    })?;

    // Self join: f^A ⊛ f^A = f^{2A}.
    let lhs = gr(&HybridExpr::join_of(vec![term("f", &ra), term("f", &ra)]))?;
    let two_a = ra.scale(2).map_err(e2s)?;
    let rhs = gr(&HybridExpr::from(term("f", &two_a)))?;
    let want = expected_graph(&a.iter().map(|m| 2 * m).collect::<Vec<_>>(), &total("f", k)).unwrap();
    ensure(lhs == rhs && rhs == want, || {
        format!("self join: {lhs} vs {rhs} vs {want} for A={a:?}")
    })?;

    // Same function: f^A ⊛ f^B = f^{A⊕B}, a hybrid function.
    let raw = HybridExpr::join_of(vec![term("f", &ra), term("f", &rb)]);
    let lhs = gr(&raw)?;
    let reduced = join(term("f", &ra), term("f", &rb)).map_err(e2s)?;
    let sum = ra.oplus(&rb).map_err(e2s)?;
    let rhs = gr(&HybridExpr::from(term("f", &sum)))?;
    let want = expected_graph(&add(a, b), &total("f", k)).unwrap();
    ensure(lhs == rhs && rhs == want && gr(&reduced)? == want, || {
        format!("same function: {lhs} vs {want} for A={a:?}, B={b:?}")
    })?;
    let mut per_point: BTreeMap<Element, usize> = BTreeMap::new();
    for (e, _) in lhs.iter() {
        if let Element::Pair(x, _) = e {
            *per_point.entry((**x).clone()).or_default() += 1;
        }
    }
    ensure(per_point.values().all(|&n| n == 1), || {
        format!("same function: {lhs} is not a function")
    })?;

    // Different functions: f^A ⊛ g^B = (f ⊛ g)^{A⊕B} iff A ⊗ B = ∅, with f ≠ g everywhere.
    let lhs = gr(&HybridExpr::join_of(vec![term("f", &ra), term("g", &rb)]))?;
    let fg = classical_join(&[restrict(body("f"), &support(a)), restrict(body("g"), &support(b))]);
    let equal = match fg {
        Ok(h) => expected_graph(&add(a, b), &h).is_some_and(|want| want == lhs),
        Err(_) => false,
    };
    let disjoint = tokens(a).is_disjoint(&tokens(b)).map_err(e2s)?;
    ensure(equal == disjoint, || {
        format!("different functions: equal={equal} but disjoint={disjoint} for A={a:?}, B={b:?}")
    })?;

    // Disjoint supports: supports: f1^{H1} ⊛ f2^{H2} = (f1 ⊛ f2)^{H1⊕H2}.
    let h2: Vec<i64> = a.iter().zip(b).map(|(&x, &y)| if x == 0 { y } else { 0 }).collect();
    let lhs = gr(&HybridExpr::join_of(vec![term("f", &ra), term("h", &region_of(&h2))]))?;
    let fh = classical_join(&[restrict(body("f"), &support(a)), restrict(body("h"), &support(&h2))])
        .map_err(|e| format!("disjoint supports: classical join failed: {e}"))?;
    let want = expected_graph(&add(a, &h2), &fh).ok_or("disjoint supports: join undefined on support")?;
    ensure(lhs == want, || {
        format!("disjoint supports: {lhs} vs {want} for H1={a:?}, H2={h2:?}")
    })?;

    Ok(if disjoint {
        Direction::Disjoint
    } else {
        Direction::Overlapping
    })
}

// ---------------------------------------------------------------------------
// Pointwise product of two step functions against case analysis.

/// Compares `f × g` over the symbolic refinement with the classical
/// product on the grid `k/100`. Returns the number of points compared.
pub fn mult0_matches_oracle(a: &Rational, b: &Rational) -> Result<usize, String> {
    let fx = mult0();
    let e = pointwise_star(&StarOp::mul(), &[fx.f.clone(), fx.g.clone()], &fx.refinement).map_err(e2s)?;
    let grid = unit_grid(100);
    let (oracle, _) = classical_star(
        &classical_step(&grid, a, int(2), int(0)),
        &classical_step(&grid, b, int(5), int(7)),
        |x: &Rational, y: &Rational| x * y,
    )
    .map_err(e2s)?;
    let v = super::mult0_valuation(a.clone(), b.clone());
    for x in &grid {
        let got = eval(&e, &fx.env, &Point::scalar(x.clone()), &v).map_err(e2s)?;
        let want = oracle.eval(x);
        ensure(got.as_scalar() == want.as_ref(), || {
            format!("x={x}, a={a}, b={b}: got {got}, oracle {want:?}")
        })?;
    }
    Ok(grid.len())
}

// ---------------------------------------------------------------------------
// Matrix addition against blockwise addition.

/// Every cell of an `n × m` sum agrees with the classical blockwise sum.
pub fn matrix_matches_oracle(n: i64, m: i64, h1: i64, h2: i64, k1: i64, k2: i64) -> Result<usize, String> {
    let (m1, m2, env) = matrix_pair();
    let (sum, _) = matrix_add(&m1, &m2).map_err(e2s)?;
    let v = matrix_valuation(n, m, h1, h2, k1, k2);
    let (oracle, _) = classical_star(
        &classical_blocks(n, m, h1, k1, ["A1", "B1", "C1", "D1"]),
        &classical_blocks(n, m, h2, k2, ["A2", "B2", "C2", "D2"]),
        |x: &Vec<String>, y: &Vec<String>| {
            let mut s = x.clone();
            s.extend(y.iter().cloned());
            s.sort();
            s
        },
    )
    .map_err(e2s)?;
    let mut cells = 0;
    for i in 1..=n {
        for j in 1..=m {
            let cell = matrix_eval_cell(&sum, &env, i, j, &v).map_err(e2s)?;
            let mut got: Vec<String> = Vec::new();
            for (name, k) in &cell.blocks {
                ensure(*k == 1, || format!("({i},{j}): {name} has exponent {k}"))?;
                got.push(name.clone());
            }
            got.sort();
            let want = oracle.eval(&(i, j)).unwrap_or_default();
            ensure(got == want, || {
                format!("cell ({i},{j}) with h=({h1},{h2}) k=({k1},{k2}): got {cell}, oracle {want:?}")
            })?;
            cells += 1;
        }
    }
    Ok(cells)
}

// ---------------------------------------------------------------------------
// Spline merge covers the universe with one segment from each spline.

/// Segments found along `[a, b]`, in order of their left ends.
pub fn spline_segments(
    a: Rational,
    b: Rational,
    c: Rational,
    d: Rational,
) -> Result<Vec<(Vec<String>, Rational, Rational)>, String> {
    let (s, t, env) = spline_pair();
    let (e, _) = spline_merge(&s, &t).map_err(e2s)?;
    let v = super::spline_valuation(a.clone(), b.clone(), c, d);
    let mut found: Vec<(Vec<String>, Rational, Rational)> = Vec::new();
    let steps = 240;
    for k in 0..=steps {
        let x = &a + (&b - &a) * ratio(k, steps);
        let seg = spline_eval_region(&e, &env, &[&s, &t], &x, &v)
            .map_err(e2s)?
            .ok_or_else(|| format!("x={x} is outside the merge"))?;
        ensure(seg.atoms.len() == 2, || format!("x={x}: residual atoms in {seg}"))?;
        ensure(
            seg.atoms.iter().any(|n| n.starts_with("S_")) && seg.atoms.iter().any(|n| n.starts_with("T_")),
            || format!("x={x}: {seg} does not pair one segment of each spline"),
        )?;
        ensure(seg.contains(&x), || format!("x={x} lies outside its segment {seg}"))?;
        let key = (seg.atoms.clone(), seg.lo.clone(), seg.hi.clone());
        if !found.contains(&key) {
            found.push(key);
        }
    }
    found.sort_by(|x, y| x.1.cmp(&y.1));
    // Consecutive segments must abut: [a, x1], [x1, x2], ..., [xk, b].
    ensure(
        found.first().map(|s| &s.1) == Some(&a) && found.last().map(|s| &s.2) == Some(&b),
        || format!("segments {found:?} do not span [{a}, {b}]"),
    )?;
    for w in found.windows(2) {
        ensure(w[0].2 == w[1].1, || format!("gap or overlap between {w:?}"))?;
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// Karr identities and linearity.

pub fn poly(coeffs: &[i64]) -> ScalarExpr {
    let mut e = ScalarExpr::Const(int(0));
    for &c in coeffs.iter().rev() {
        e = ScalarExpr::Add(
            Box::new(ScalarExpr::Mul(Box::new(e), Box::new(ScalarExpr::X))),
            Box::new(ScalarExpr::Const(int(c))),
        );
    }
    e
}

pub fn karr(coeffs: &[i64], bounds: [i64; 3]) -> Check {
    let f = FunctionAtom::with_body("f", poly(coeffs));
    let report = karr_split_check(&f, bounds, &Valuation::new()).map_err(e2s)?;
    ensure(report.passed() && report.checked == 12, || report.to_string())
}

/// Additivity of `Σ_{-5 ≤ x ≤ 15}` over `I1, I2, U ⊖ I1 ⊖ I2` with
/// `U = [0, 10]` and closed integer intervals `I1`, `I2`.
pub fn additivity(coeffs: &[i64], i1: (i64, i64), i2: (i64, i64)) -> Check {
    let closed = |name: &str, (lo, hi): (i64, i64)| {
        RegionAtom::new(
            name,
            RegionShape::interval(ParamExpr::constant(int(lo)), ParamExpr::constant(int(hi)), true, true),
        )
    };
    let regions = RegionTable::new()
        .with(closed("U", (0, 10)))
        .with(closed("I1", i1))
        .with(closed("I2", i2));
    let env = Env::new(
        regions,
        AtomTable::new().with(FunctionAtom::with_body("f", poly(coeffs))),
    );
    let p = GeneralisedPartition::new(
        "P",
        r("U"),
        vec![("P1", r("I1")), ("P2", r("I2")), ("P3", r("U - I1 - I2"))],
    )
    .map_err(e2s)?;
    let op = FiniteSum::new(-5, 15).map_err(e2s)?;
    let report = linear_additivity_check(&op, "f", &p, &env, &Valuation::new()).map_err(e2s)?;
    ensure(report.passed(), || report.to_string())
}

// ---------------------------------------------------------------------------
// Refinement invariance.

/// A term `f^P` with `P` a piece of one of two formal partitions of
/// `U = [0, 1)`. Each partition is a list of half-open intervals plus the
/// complement `U ⊖ ⊕ intervals`.
#[derive(Debug, Clone)]
pub struct InvarianceCase {
    pub cuts: [Vec<(i64, i64)>; 2],
    pub piece: (usize, usize),
    pub coeffs: Vec<i64>,
    pub upper_triangle: bool,
}

/// Eighths, so intervals can stick out of `U` and be empty or reversed.
const EIGHTHS: i64 = 8;

pub fn refinement_invariance(case: &InvarianceCase) -> Result<usize, String> {
    let mut regions = RegionTable::new().with(super::half_open("U", super::pe("0"), super::pe("1")));
    let mut parts = Vec::new();
    for (p, cuts) in case.cuts.iter().enumerate() {
        let mut pieces = Vec::new();
        let mut rest = r("U");
        for (i, &(lo, hi)) in cuts.iter().enumerate() {
            let name = format!("I{p}_{i}");
            regions = regions.with(RegionAtom::new(
                name.clone(),
                RegionShape::interval(
                    ParamExpr::constant(ratio(lo, EIGHTHS)),
                    ParamExpr::constant(ratio(hi, EIGHTHS)),
                    true,
                    false,
                ),
            ));
            let atom = SymbolicHybridSet::atom(name.clone());
            rest = rest.ominus(&atom).map_err(e2s)?;
            pieces.push((name, atom));
        }
        pieces.push((format!("Rest{p}"), rest));
        parts.push(GeneralisedPartition::new(format!("part{p}"), r("U"), pieces).map_err(e2s)?);
    }
    let style = if case.upper_triangle {
        ChoiceStyle::FullUpperTriangle
    } else {
        ChoiceStyle::OnesOnTopRow
    };
    let sizes: Vec<usize> = parts.iter().map(GeneralisedPartition::len).collect();
    let c = canonical_choice_matrix(&sizes, style).map_err(e2s)?;
    let refinement = common_strict_refinement(&parts, &c, "Q").map_err(e2s)?;

    let (which, k) = case.piece;
    let part = &parts[which % 2];
    let piece = &part.pieces[k % part.len()].region;
    let rw = refinement.rewrite_for(piece).ok_or("no rewrite for the chosen piece")?;
    ensure(refinement.expand(&rw.coeffs).map_err(e2s)? == *piece, || {
        format!("rewrite of {piece} expands to something else")
    })?;
    let refined = HybridExpr::join_of(
        rw.coeffs
            .iter()
            .zip(&refinement.pieces)
            .filter(|(c, _)| **c != 0)
            .map(|(&c, q)| HybridTerm::atom("f", q.region.scale(c).unwrap()))
            .collect(),
    );
    let original = HybridExpr::from(HybridTerm::atom("f", piece.clone()));
    let env = Env::new(
        regions,
        AtomTable::new().with(FunctionAtom::with_body("f", poly(&case.coeffs))),
    );
    let v = Valuation::new();
    let sample: Vec<Point> = (-8..24).map(|k| Point::scalar(ratio(k, 16))).collect();
    for p in &sample {
        let want = eval(&original, &env, p, &v).map_err(e2s)?;
        let got = eval(&refined, &env, p, &v).map_err(e2s)?;
        ensure(got == want, || {
            format!("at {p}: refined {got}, original {want} for {case:?}")
        })?;
    }
    Ok(sample.len())
}

// ---------------------------------------------------------------------------
// Sum of step functions against exhaustive case analysis.

pub struct StepsOutcome {
    pub terms: usize,
    pub oracle_cases: usize,
    pub points: usize,
}

/// `Σ_i A_i H(x - k_i)` for the given jumps and heights.
pub fn steps_match_oracle(ks: &[Rational], values: &[Rational]) -> Result<StepsOutcome, String> {
    let fx = steps(values);
    let (e, _) = pointwise_star_canonical(&StarOp::add(), &fx.operands, &r("U"), "R").map_err(e2s)?;
    let grid = unit_grid(200);
    let classical: Vec<_> = ks
        .iter()
        .zip(values)
        .map(|(k, a)| classical_step(&grid, k, int(0), a.clone()))
        .collect();
    let (oracle, examined) = classical_star_all(&classical, |x: &Rational, y: &Rational| x + y).map_err(e2s)?;
    let mut v = Valuation::new();
    for (i, k) in ks.iter().enumerate() {
        v.set(format!("k{}", i + 1), k.clone());
    }
    let outcomes = hybridsets::batch::eval_points(&e, &fx.env, &points(&grid), &v);
    for (x, got) in grid.iter().zip(outcomes) {
        let got = got.map_err(e2s)?;
        let want = oracle.eval(x);
        ensure(got.as_scalar() == want.as_ref(), || {
            format!("x={x}: got {got}, oracle {want:?}")
        })?;
    }
    Ok(StepsOutcome {
        terms: e.len(),
        oracle_cases: examined,
        points: grid.len(),
    })
}

/// True iff `e` evaluates to something other than `want` at some point.
pub fn disagrees_somewhere(
    e: &HybridExpr,
    env: &Env,
    v: &Valuation,
    xs: &[Rational],
    want: impl Fn(&Rational) -> Option<Rational>,
) -> Option<Rational> {
    xs.iter()
        .find(|x| {
            let got = eval(e, env, &Point::scalar((*x).clone()), v).ok();
            got.as_ref().and_then(EvalOutcome::as_scalar) != want(x).as_ref()
        })
        .cloned()
}

// ---------------------------------------------------------------------------
// Choice matrices.

/// Determinant exactly 1 and the expected integer inverse: first row
/// `1, -1, .., -1` for the top-row style, a `-1` superdiagonal band for the
/// upper-triangle style.
pub fn choice_matrix_patterns(dim: usize) -> Check {
    use hybridsets::refine::{integer_inverse, ChoiceMatrix};
    for style in [ChoiceStyle::OnesOnTopRow, ChoiceStyle::FullUpperTriangle] {
        let c = ChoiceMatrix::canonical(dim, style);
        let det = c.determinant();
        ensure(det == 1.into(), || {
            format!("{style:?} of size {dim} has determinant {det}")
        })?;
        let inv = integer_inverse(&c).map_err(e2s)?;
        let want: Vec<Vec<i64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| match style {
                        ChoiceStyle::OnesOnTopRow if i == 0 && j > 0 => -1,
                        ChoiceStyle::FullUpperTriangle if j == i + 1 => -1,
                        _ => i64::from(i == j),
                    })
                    .collect()
            })
            .collect();
        ensure(inv.rows() == want.as_slice(), || {
            format!("{style:?} of size {dim}: inverse\n{inv}")
        })?;
        let id = c.mul(&inv).map_err(e2s)?;
        ensure(id == ChoiceMatrix::identity(dim), || {
            format!("{style:?} of size {dim}: C * C^-1 =\n{id}")
        })?;
    }
    Ok(())
}
