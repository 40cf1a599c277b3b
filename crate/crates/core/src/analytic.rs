//! Closed-form predictions for the generator's functional graph: a total
//! classification of the parameter space, per-state pre-period and period,
//! and the full multiset of graph components, all without enumerating.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ext::{roots_of_char_poly, ExtElem, QuadExt, RootsResult};
use crate::iprng::{Params, PeriodInfo};
use crate::ring::{Modulus, RingElem};

/// Which regime the parameters (a, b) fall into. `Field*` labels cover
/// e = 1; the rest require e >= 2 and sort by whether a, b and the
/// discriminant 4a + b^2 are units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseLabel {
    FieldAZero,
    FieldBZero,
    FieldRepeatedRoot,
    FieldGeneric,
    AZero,
    BothInIdeal,
    AInIdeal,
    BInIdealSplit,
    BInIdealNonsplit,
    UnitsSplit,
    UnitsNonsplit,
    UnitsRepeatedRoot,
    UnitsRepeatedRootDeep,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaseLabel::FieldAZero => "field-a-zero",
            CaseLabel::FieldBZero => "field-b-zero",
            CaseLabel::FieldRepeatedRoot => "field-repeated-root",
            CaseLabel::FieldGeneric => "field-generic",
            CaseLabel::AZero => "a-zero",
            CaseLabel::BothInIdeal => "a-b-in-ideal",
            CaseLabel::AInIdeal => "a-in-ideal",
            CaseLabel::BInIdealSplit => "b-in-ideal-split",
            CaseLabel::BInIdealNonsplit => "b-in-ideal-nonsplit",
            CaseLabel::UnitsSplit => "units-split",
            CaseLabel::UnitsNonsplit => "units-nonsplit",
            CaseLabel::UnitsRepeatedRoot => "units-repeated-root",
            CaseLabel::UnitsRepeatedRootDeep => "units-repeated-root-deep",
        };
        f.write_str(name)
    }
}

/// Everything the predictors need, computed once per parameter set. Only
/// the fields meaningful for the label are populated.
#[derive(Clone, Debug)]
pub struct CaseAnalysis {
    pub label: CaseLabel,
    /// Roots of t^2 - b*t - a when the discriminant is a unit.
    pub roots: Option<RootsResult>,
    /// Valuation of b (capped at e).
    pub b_valuation: Option<u32>,
    /// Order of the ratio of roots in the residue field.
    pub ratio_order_mod_p: Option<u64>,
    /// Order of the ratio of roots mod p^e.
    pub ratio_order_full: Option<u64>,
    /// The repeated root of the reduction mod p, when there is one.
    pub omega: Option<u64>,
    /// f(omega) mod p^2; zero here is the unsupported degeneration.
    pub f_omega_mod_p2: Option<u64>,
    /// Tree height parameter h: the fixed point is reached from b in h steps.
    pub tree_height: Option<u64>,
    /// The unique fixed point of the convergent-tree case.
    pub fixed_point: Option<u64>,
}

impl CaseAnalysis {
    fn bare(label: CaseLabel) -> CaseAnalysis {
        CaseAnalysis {
            label,
            roots: None,
            b_valuation: None,
            ratio_order_mod_p: None,
            ratio_order_full: None,
            omega: None,
            f_omega_mod_p2: None,
            tree_height: None,
            fixed_point: None,
        }
    }

    /// The same analysis with the two roots' roles exchanged; predictions
    /// are invariant under this.
    pub fn with_swapped_roots(&self) -> CaseAnalysis {
        CaseAnalysis { roots: self.roots.map(|r| r.swapped()), ..self.clone() }
    }
}

/// Sorts the parameters into their case and precomputes the case data.
pub fn classify(g: &Params) -> CaseAnalysis {
    let m = *g.modulus();
    let (a, b) = (g.a(), g.b());
    let (p, e) = (m.p(), m.e());
    let disc = m.add(m.mul(m.elem(4), a), m.mul(b, b));

    if e == 1 {
        if a.value() == 0 {
            return CaseAnalysis::bare(CaseLabel::FieldAZero);
        }
        if b.value() == 0 {
            return CaseAnalysis::bare(CaseLabel::FieldBZero);
        }
        if !m.is_unit(disc) {
            let alpha = m.mul(m.inverse(m.elem(2)).unwrap(), b);
            return CaseAnalysis {
                roots: Some(RootsResult::Split { alpha, beta: alpha }),
                ..CaseAnalysis::bare(CaseLabel::FieldRepeatedRoot)
            };
        }
        let roots = roots_of_char_poly(&m, a, b).unwrap();
        let k = ratio_order(&m, &roots);
        return CaseAnalysis {
            roots: Some(roots),
            ratio_order_mod_p: Some(k),
            ..CaseAnalysis::bare(CaseLabel::FieldGeneric)
        };
    }

    if a.value() == 0 {
        return CaseAnalysis::bare(CaseLabel::AZero);
    }
    if !m.is_unit(a) {
        if !m.is_unit(b) {
            return CaseAnalysis::bare(CaseLabel::BothInIdeal);
        }
        let la = m.valuation(a);
        let h = (e.div_ceil(la) - 1) as u64;
        let x_tilde = g.orbit_iter(b).nth(h as usize).unwrap();
        return CaseAnalysis {
            tree_height: Some(h),
            fixed_point: Some(x_tilde.value()),
            ..CaseAnalysis::bare(CaseLabel::AInIdeal)
        };
    }
    if !m.is_unit(b) {
        // 4a is a unit and b^2 is not, so the discriminant is a unit
        let kb = m.valuation(b);
        let roots = roots_of_char_poly(&m, a, b).unwrap();
        let split = matches!(roots, RootsResult::Split { .. });
        let label = if split { CaseLabel::BInIdealSplit } else { CaseLabel::BInIdealNonsplit };
        return CaseAnalysis {
            roots: Some(roots),
            b_valuation: Some(kb),
            ratio_order_full: Some(2 * p.pow(e - kb)),
            ..CaseAnalysis::bare(label)
        };
    }
    if m.is_unit(disc) {
        let roots = roots_of_char_poly(&m, a, b).unwrap();
        let m1 = m.with_exponent(1);
        let reduced = roots_of_char_poly(&m1, m1.elem(a.value()), m1.elem(b.value())).unwrap();
        let label = if matches!(roots, RootsResult::Split { .. }) {
            CaseLabel::UnitsSplit
        } else {
            CaseLabel::UnitsNonsplit
        };
        return CaseAnalysis {
            ratio_order_mod_p: Some(ratio_order(&m1, &reduced)),
            ratio_order_full: Some(ratio_order(&m, &roots)),
            roots: Some(roots),
            ..CaseAnalysis::bare(label)
        };
    }
    // repeated root mod p: omega = b/2 in the residue field
    let m1 = m.with_exponent(1);
    let omega = m1.mul(m1.inverse(m1.elem(2)).unwrap(), m1.elem(b.value())).value();
    let m2 = m.with_exponent(2);
    let (a2, b2, w) = (m2.elem(a.value()), m2.elem(b.value()), m2.elem(omega));
    let f_omega = m2.sub(m2.mul(w, w), m2.add(m2.mul(b2, w), a2)).value();
    let label = if f_omega != 0 {
        CaseLabel::UnitsRepeatedRoot
    } else {
        CaseLabel::UnitsRepeatedRootDeep
    };
    CaseAnalysis {
        omega: Some(omega),
        f_omega_mod_p2: Some(f_omega),
        ..CaseAnalysis::bare(label)
    }
}

/// Order of alpha/beta in the given ring, through whichever representation
/// the roots have there.
fn ratio_order(m: &Modulus, roots: &RootsResult) -> u64 {
    match *roots {
        RootsResult::Split { alpha, beta } => {
            m.multiplicative_order(m.mul(alpha, m.inverse(beta).unwrap())).unwrap()
        }
        RootsResult::Irreducible { ext, alpha, beta } => {
            ext.order(ext.mul(alpha, ext.inverse(beta).unwrap())).unwrap()
        }
    }
}

/// The roots' images in the residue field (or its quadratic extension).
enum ReducedRoots {
    Field { m1: Modulus, alpha: RingElem, beta: RingElem },
    ExtField { ext: QuadExt, alpha: ExtElem, beta: ExtElem },
}

fn reduce_roots(m: &Modulus, roots: &RootsResult) -> ReducedRoots {
    let m1 = m.with_exponent(1);
    match *roots {
        RootsResult::Split { alpha, beta } => {
            ReducedRoots::Field { m1, alpha: m1.elem(alpha.value()), beta: m1.elem(beta.value()) }
        }
        RootsResult::Irreducible { ext, alpha, beta } => {
            let (c1, c0) = ext.modulus_coeffs();
            let e1 = QuadExt::new(m1, m1.elem(c1.value()), m1.elem(c0.value()));
            let red = |x: ExtElem| {
                let (u0, u1) = x.parts();
                e1.elem(m1.elem(u0.value()), m1.elem(u1.value()))
            };
            ReducedRoots::ExtField { ext: e1, alpha: red(alpha), beta: red(beta) }
        }
    }
}

impl ReducedRoots {
    /// Discrete position of (x - alpha)/(x - beta) among the powers of
    /// alpha/beta in the residue field, if it is one; x must differ from
    /// both root residues. Walks the powers, so costs at most the order.
    fn ratio_index(&self, x: u64) -> Option<u64> {
        match self {
            ReducedRoots::Field { m1, alpha, beta } => {
                let x = m1.elem(x);
                debug_assert!(x != *alpha && x != *beta);
                let g = m1.mul(*alpha, m1.inverse(*beta).unwrap());
                let target = m1.mul(m1.sub(x, *alpha), m1.inverse(m1.sub(x, *beta)).unwrap());
                let mut acc = g;
                for j in 1.. {
                    if acc == target {
                        return Some(j);
                    }
                    if acc == m1.one() {
                        return None;
                    }
                    acc = m1.mul(acc, g);
                }
                unreachable!()
            }
            ReducedRoots::ExtField { ext, alpha, beta } => {
                let x = ext.scalar(ext.base().elem(x));
                let g = ext.mul(*alpha, ext.inverse(*beta).unwrap());
                let target = ext.mul(ext.sub(x, *alpha), ext.inverse(ext.sub(x, *beta)).unwrap());
                let mut acc = g;
                for j in 1.. {
                    if acc == target {
                        return Some(j);
                    }
                    if acc == ext.one() {
                        return None;
                    }
                    acc = ext.mul(acc, g);
                }
                unreachable!()
            }
        }
    }
}

fn nth_iterate(g: &Params, x0: RingElem, n: u64) -> RingElem {
    g.orbit_iter(x0).nth(n as usize).unwrap()
}

/// n-th term of u_{k+2} = b*u_{k+1} + a*u_k with u_0 = 0, u_1 = 1 — the
/// difference quotient (alpha^n - beta^n)/(alpha - beta) as a polynomial
/// in a and b — by companion-matrix power.
fn difference_quotient_term(m: &Modulus, a: RingElem, b: RingElem, n: u64) -> RingElem {
    let mul = |x: [RingElem; 4], y: [RingElem; 4]| {
        [
            m.add(m.mul(x[0], y[0]), m.mul(x[1], y[2])),
            m.add(m.mul(x[0], y[1]), m.mul(x[1], y[3])),
            m.add(m.mul(x[2], y[0]), m.mul(x[3], y[2])),
            m.add(m.mul(x[2], y[1]), m.mul(x[3], y[3])),
        ]
    };
    let mut acc = [m.one(), m.zero(), m.zero(), m.one()];
    let mut base = [b, a, m.one(), m.zero()];
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        n >>= 1;
    }
    acc[2]
}

/// Period of the states over the repeated root whose characteristic value
/// has valuation e0: the least p^j at which the difference quotient of the
/// root powers gains valuation e - e0. For the split or unramified root
/// pair that valuation grows by exactly one per step, giving p^(e - e0);
/// when the discriminant has odd valuation the roots are ramified and, for
/// p = 3, the quotient can gain valuation faster.
fn repeated_root_cycle_period(m: &Modulus, a: RingElem, b: RingElem, e0: u32) -> u64 {
    let need = m.e() - e0;
    let mut n = 1;
    while m.valuation(difference_quotient_term(m, a, b, n)) < need {
        n *= m.p();
    }
    n
}

/// Valuation of x^2 - b*x - a at x0.
pub(crate) fn char_value_valuation(g: &Params, x0: RingElem) -> u32 {
    let m = g.modulus();
    m.valuation(m.sub(m.mul(x0, x0), m.add(m.mul(g.b(), x0), g.a())))
}

/// Pre-period and period of the orbit of x0, under the repeated-root
/// regime: states over the repeated root omega are purely periodic with
/// the difference-quotient period; all others feed the (p-1)-component.
pub(crate) fn repeated_root_period(g: &Params, omega: u64, x0: RingElem) -> PeriodInfo {
    let m = g.modulus();
    let p = m.p();
    if x0.value() % p == omega {
        let e0 = char_value_valuation(g, x0);
        let period = repeated_root_cycle_period(m, g.a(), g.b(), e0);
        return PeriodInfo { pre_period: 0, period };
    }
    let period = p - 1;
    if nth_iterate(g, x0, period) == x0 {
        return PeriodInfo { pre_period: 0, period };
    }
    // first companion-term zero: the n >= 1 with n*(x0/omega - 1) = -1 mod p
    let m1 = m.with_exponent(1);
    let ratio = m1.mul(m1.inverse(m1.elem(omega)).unwrap(), m1.elem(x0.value()));
    let slope = m1.sub(ratio, m1.one());
    let pre = m1.neg(m1.inverse(slope).unwrap()).value();
    PeriodInfo { pre_period: pre, period }
}

/// Predicts the exact (pre-period, period) of the orbit of x0, or None for
/// the unsupported degeneration.
pub fn predict_period(g: &Params, x0: RingElem) -> Option<PeriodInfo> {
    predict_period_for(g, &classify(g), x0)
}

/// [`predict_period`] against a precomputed analysis.
pub fn predict_period_for(g: &Params, cs: &CaseAnalysis, x0: RingElem) -> Option<PeriodInfo> {
    let m = *g.modulus();
    let (p, e) = (m.p(), m.e());
    let b = g.b();
    let pi = |pre_period, period| Some(PeriodInfo { pre_period, period });
    match cs.label {
        CaseLabel::FieldAZero | CaseLabel::AZero => {
            if x0 == b {
                pi(0, 1)
            } else {
                pi(1, 1)
            }
        }
        CaseLabel::BothInIdeal => {
            if x0 == b {
                pi(0, 1)
            } else if !m.is_unit(x0) {
                pi(1, 1)
            } else {
                pi(2, 1)
            }
        }
        CaseLabel::FieldBZero => {
            if x0.value() == 0 || m.mul(x0, x0) == g.a() {
                pi(0, 1)
            } else {
                pi(0, 2)
            }
        }
        CaseLabel::FieldRepeatedRoot => {
            let Some(RootsResult::Split { alpha, .. }) = cs.roots else { unreachable!() };
            if x0 == alpha {
                pi(0, 1)
            } else {
                pi(0, p - 1)
            }
        }
        CaseLabel::FieldGeneric => {
            let k = cs.ratio_order_mod_p.unwrap();
            let roots = cs.roots.as_ref().unwrap();
            if let RootsResult::Split { alpha, beta } = *roots {
                if x0 == alpha || x0 == beta {
                    return pi(0, 1);
                }
            }
            match reduce_roots(&m, roots).ratio_index(x0.value()) {
                Some(_) => pi(0, k - 1),
                None => pi(0, k),
            }
        }
        CaseLabel::AInIdeal => pi(tree_distance(g, cs, x0), 1),
        CaseLabel::BInIdealSplit | CaseLabel::BInIdealNonsplit => {
            if !m.is_unit(x0) {
                return if x0 == b { pi(0, 1) } else { pi(1, 1) };
            }
            let kb = cs.b_valuation.unwrap();
            let kp = match cs.roots {
                Some(RootsResult::Split { alpha, beta }) => {
                    if x0 == alpha || x0 == beta {
                        return pi(0, 1);
                    }
                    m.valuation(m.sub(x0, alpha)).max(m.valuation(m.sub(x0, beta)))
                }
                _ => 0,
            };
            pi(0, 2 * p.pow((e - kp).saturating_sub(kb)))
        }
        CaseLabel::UnitsSplit | CaseLabel::UnitsNonsplit => {
            let roots = cs.roots.as_ref().unwrap();
            if let RootsResult::Split { alpha, beta } = *roots {
                if x0 == alpha || x0 == beta {
                    return pi(0, 1);
                }
                // congruent to a root without equaling it: the orbit stays
                // on units and cycles with the order at the reduced modulus
                let kp = m.valuation(m.sub(x0, alpha)).max(m.valuation(m.sub(x0, beta)));
                if kp >= 1 {
                    let m2 = m.with_exponent(e - kp);
                    let ratio = m2.elem(m.mul(alpha, m.inverse(beta).unwrap()).value());
                    return pi(0, m2.multiplicative_order(ratio).unwrap());
                }
            }
            match reduce_roots(&m, roots).ratio_index(x0.value()) {
                Some(j) => {
                    let period = cs.ratio_order_mod_p.unwrap() - 1;
                    if nth_iterate(g, x0, period) == x0 {
                        pi(0, period)
                    } else {
                        pi(j, period)
                    }
                }
                None => pi(0, cs.ratio_order_full.unwrap()),
            }
        }
        CaseLabel::UnitsRepeatedRoot => Some(repeated_root_period(g, cs.omega.unwrap(), x0)),
        CaseLabel::UnitsRepeatedRootDeep => None,
    }
}

/// Distance to the fixed point in the convergent-tree case, from the
/// valuation of x0 - x_tilde alone.
fn tree_distance(g: &Params, cs: &CaseAnalysis, x0: RingElem) -> u64 {
    let m = g.modulus();
    let e = m.e();
    let v = m.valuation(m.sub(x0, m.elem(cs.fixed_point.unwrap())));
    distance_for_valuation(e, m.valuation(g.a()), cs.tree_height.unwrap(), v)
}

fn distance_for_valuation(e: u32, la: u32, h: u64, v: u32) -> u64 {
    let k = e - (h as u32) * la;
    if v == e {
        0
    } else if v < k {
        h + 1
    } else {
        h - ((v - k) / la) as u64
    }
}

/// Node count at each distance from the fixed point, for the
/// convergent-tree case only.
pub fn tree_depth_profile(g: &Params) -> Result<BTreeMap<u64, u64>, Error> {
    tree_depth_profile_for(g, &classify(g))
}

/// [`tree_depth_profile`] against a precomputed analysis.
pub fn tree_depth_profile_for(g: &Params, cs: &CaseAnalysis) -> Result<BTreeMap<u64, u64>, Error> {
    if cs.label != CaseLabel::AInIdeal {
        return Err(Error::WrongCase);
    }
    let m = g.modulus();
    let (p, e) = (m.p(), m.e());
    let la = m.valuation(g.a());
    let h = cs.tree_height.unwrap();
    let mut profile = BTreeMap::from([(0, 1)]);
    for v in 0..e {
        let d = distance_for_valuation(e, la, h, v);
        *profile.entry(d).or_insert(0) += (p - 1) * p.pow(e - 1 - v);
    }
    Ok(profile)
}

/// One piece of a predicted or observed graph decomposition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "component", rename_all = "snake_case")]
pub enum ComponentSpec {
    /// A cycle of length `cycle_len` with `branches` disjoint tails of the
    /// same length feeding one distinguished cycle node.
    Unilateral { cycle_len: u64, branches: u64 },
    /// A single fixed point every state converges to, described by node
    /// counts per distance.
    ConvergentTree { fixed_point: u64, depth_profile: BTreeMap<u64, u64> },
    /// `count` bare cycles of length `length`.
    Cycles { length: u64, count: u64 },
    /// `count` bare fixed points.
    SelfLoops { count: u64 },
}

impl ComponentSpec {
    fn node_count(&self) -> u64 {
        match self {
            ComponentSpec::Unilateral { cycle_len, branches } => cycle_len * (branches + 1),
            ComponentSpec::ConvergentTree { depth_profile, .. } => depth_profile.values().sum(),
            ComponentSpec::Cycles { length, count } => length * count,
            ComponentSpec::SelfLoops { count } => *count,
        }
    }
}

impl fmt::Display for ComponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSpec::Unilateral { cycle_len, branches } => {
                write!(f, "G({cycle_len},{branches})")
            }
            ComponentSpec::ConvergentTree { fixed_point, depth_profile } => {
                write!(f, "tree(fixed={fixed_point}; depths ")?;
                let mut first = true;
                for (d, n) in depth_profile {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{d}:{n}")?;
                    first = false;
                }
                write!(f, ")")
            }
            ComponentSpec::Cycles { length, count } => write!(f, "cycle({length})×{count}"),
            ComponentSpec::SelfLoops { count } => write!(f, "self-loop×{count}"),
        }
    }
}

/// A canonical multiset of components partitioning the state space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStructure {
    components: Vec<ComponentSpec>,
}

impl GraphStructure {
    /// Canonicalizes: merges same-length cycle sets, folds length-1 cycles
    /// into self-loops, drops empty entries, and fixes the order.
    pub fn new(parts: Vec<ComponentSpec>) -> GraphStructure {
        let mut cycles: BTreeMap<u64, u64> = BTreeMap::new();
        let mut self_loops = 0;
        let mut head = Vec::new();
        for part in parts {
            match part {
                ComponentSpec::Cycles { length: 1, count } => self_loops += count,
                ComponentSpec::Cycles { count: 0, .. } => {}
                ComponentSpec::Cycles { length, count } => *cycles.entry(length).or_insert(0) += count,
                ComponentSpec::SelfLoops { count } => self_loops += count,
                other => head.push(other),
            }
        }
        head.sort();
        let mut components = head;
        components.extend(cycles.into_iter().map(|(length, count)| ComponentSpec::Cycles { length, count }));
        if self_loops > 0 {
            components.push(ComponentSpec::SelfLoops { count: self_loops });
        }
        GraphStructure { components }
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn total_nodes(&self) -> u64 {
        self.components.iter().map(ComponentSpec::node_count).sum()
    }
}

impl fmt::Display for GraphStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("(empty)");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Outcome of structure prediction: a full closed form, a deferral to the
/// enumerator, or the unsupported degeneration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "structure", rename_all = "snake_case")]
pub enum StructurePrediction {
    Exact(GraphStructure),
    Delegated,
    Unsupported,
}

impl fmt::Display for StructurePrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructurePrediction::Exact(s) => s.fmt(f),
            StructurePrediction::Delegated => f.write_str("delegated to enumeration (no closed form)"),
            StructurePrediction::Unsupported => f.write_str("unsupported parameter family"),
        }
    }
}

fn exact_div(n: u64, d: u64) -> u64 {
    assert!(n % d == 0, "component count {n}/{d} is not integral");
    n / d
}

/// Predicts the complete component multiset of the functional graph.
pub fn predict_structure(g: &Params) -> StructurePrediction {
    predict_structure_for(g, &classify(g))
}

/// [`predict_structure`] against a precomputed analysis.
pub fn predict_structure_for(g: &Params, cs: &CaseAnalysis) -> StructurePrediction {
    use ComponentSpec::*;
    let m = *g.modulus();
    let (p, e, q) = (m.p(), m.e(), m.q());
    let parts = match cs.label {
        CaseLabel::FieldAZero | CaseLabel::AZero => {
            vec![Unilateral { cycle_len: 1, branches: q - 1 }]
        }
        CaseLabel::FieldBZero => {
            let s = if m.is_quadratic_residue(g.a()).unwrap() { 2 } else { 0 };
            vec![Cycles { length: 2, count: exact_div(p - 1 - s, 2) }, SelfLoops { count: s + 1 }]
        }
        CaseLabel::FieldRepeatedRoot => {
            vec![Cycles { length: p - 1, count: 1 }, SelfLoops { count: 1 }]
        }
        CaseLabel::FieldGeneric => {
            let k = cs.ratio_order_mod_p.unwrap();
            let v = if matches!(cs.roots, Some(RootsResult::Split { .. })) { 2 } else { 0 };
            vec![
                Cycles { length: k - 1, count: 1 },
                Cycles { length: k, count: exact_div(p + 1 - k - v, k) },
                SelfLoops { count: v },
            ]
        }
        CaseLabel::AInIdeal => vec![ConvergentTree {
            fixed_point: cs.fixed_point.unwrap(),
            depth_profile: tree_depth_profile_for(g, cs).unwrap(),
        }],
        CaseLabel::BInIdealSplit => {
            let kb = cs.b_valuation.unwrap();
            let mut parts = vec![
                Unilateral { cycle_len: 1, branches: p.pow(e - 1) - 1 },
                Cycles {
                    length: 2 * p.pow(e - kb),
                    count: exact_div((p - 3) * p.pow(kb - 1), 2),
                },
            ];
            let twos = if e >= kb + 2 {
                for kp in 1..=(e - kb - 1) {
                    parts.push(Cycles {
                        length: 2 * p.pow(e - kb - kp),
                        count: (p - 1) * p.pow(kb - 1),
                    });
                }
                p.pow(kb) - 1
            } else {
                p.pow(e - 1) - 1
            };
            parts.push(Cycles { length: 2, count: twos });
            parts.push(SelfLoops { count: 2 });
            parts
        }
        CaseLabel::BInIdealNonsplit => {
            let kb = cs.b_valuation.unwrap();
            vec![
                Unilateral { cycle_len: 1, branches: p.pow(e - 1) - 1 },
                Cycles {
                    length: 2 * p.pow(e - kb),
                    count: exact_div((p - 1) * p.pow(kb - 1), 2),
                },
            ]
        }
        CaseLabel::UnitsSplit => {
            let k = cs.ratio_order_mod_p.unwrap();
            let ord = cs.ratio_order_full.unwrap();
            let Some(RootsResult::Split { alpha, beta }) = cs.roots else { unreachable!() };
            let ratio = m.mul(alpha, m.inverse(beta).unwrap());
            let mut parts = vec![
                Unilateral { cycle_len: k - 1, branches: p.pow(e - 1) - 1 },
                Cycles { length: ord, count: exact_div((p - 1 - k) * p.pow(e - 1), ord) },
            ];
            for kp in 1..e {
                let m2 = m.with_exponent(e - kp);
                let ordk = m2.multiplicative_order(m2.elem(ratio.value())).unwrap();
                parts.push(Cycles {
                    length: ordk,
                    count: exact_div(2 * (p - 1) * p.pow(e - kp - 1), ordk),
                });
            }
            parts.push(SelfLoops { count: 2 });
            parts
        }
        CaseLabel::UnitsNonsplit => {
            let k = cs.ratio_order_mod_p.unwrap();
            let ord = cs.ratio_order_full.unwrap();
            vec![
                Unilateral { cycle_len: k - 1, branches: p.pow(e - 1) - 1 },
                Cycles { length: ord, count: exact_div((p + 1 - k) * p.pow(e - 1), ord) },
            ]
        }
        CaseLabel::UnitsRepeatedRoot => {
            // every state over omega has characteristic valuation exactly 1
            let t = repeated_root_cycle_period(&m, g.a(), g.b(), 1);
            vec![
                Unilateral { cycle_len: p - 1, branches: p.pow(e - 1) - 1 },
                Cycles { length: t, count: exact_div(p.pow(e - 1), t) },
            ]
        }
        CaseLabel::BothInIdeal => return StructurePrediction::Delegated,
        CaseLabel::UnitsRepeatedRootDeep => return StructurePrediction::Unsupported,
    };
    let structure = GraphStructure::new(parts);
    assert_eq!(structure.total_nodes(), q, "structure must partition the state space");
    StructurePrediction::Exact(structure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iprng::Params;

    fn params(p: u64, e: u32, a: u64, b: u64) -> Params {
        Params::new(Modulus::new(p, e).unwrap(), a, b)
    }

    fn structure(parts: Vec<ComponentSpec>) -> StructurePrediction {
        StructurePrediction::Exact(GraphStructure::new(parts))
    }

    fn cycles(length: u64, count: u64) -> ComponentSpec {
        ComponentSpec::Cycles { length, count }
    }

    fn loops(count: u64) -> ComponentSpec {
        ComponentSpec::SelfLoops { count }
    }

    fn g_comp(cycle_len: u64, branches: u64) -> ComponentSpec {
        ComponentSpec::Unilateral { cycle_len, branches }
    }

    #[test]
    fn classify_examples() {
        let cs = classify(&params(5, 2, 6, 5));
        assert_eq!(cs.label, CaseLabel::BInIdealSplit);
        assert_eq!(cs.b_valuation, Some(1));

        let cs = classify(&params(5, 2, 6, 6));
        assert_eq!(cs.label, CaseLabel::UnitsRepeatedRoot);
        assert_eq!(cs.omega, Some(3));
        // f(3) = 9 - 18 - 6 = -15 = 10 mod 25
        assert_eq!(cs.f_omega_mod_p2, Some(10));

        let cs = classify(&params(5, 2, 5, 6));
        assert_eq!(cs.label, CaseLabel::AInIdeal);
        assert_eq!(cs.tree_height, Some(1));
        assert_eq!(cs.fixed_point, Some(11));

        // f = (t - 1)^2 has f(1) = 0 mod 25
        let cs = classify(&params(5, 2, 24, 2));
        assert_eq!(cs.label, CaseLabel::UnitsRepeatedRootDeep);
        assert_eq!(cs.f_omega_mod_p2, Some(0));

        assert_eq!(classify(&params(13, 1, 0, 3)).label, CaseLabel::FieldAZero);
        assert_eq!(classify(&params(13, 1, 3, 0)).label, CaseLabel::FieldBZero);
        assert_eq!(classify(&params(13, 1, 1, 3)).label, CaseLabel::FieldRepeatedRoot);
        assert_eq!(classify(&params(13, 1, 7, 5)).label, CaseLabel::FieldGeneric);
        assert_eq!(classify(&params(5, 2, 0, 7)).label, CaseLabel::AZero);
        assert_eq!(classify(&params(5, 2, 10, 15)).label, CaseLabel::BothInIdeal);

        let cs = classify(&params(5, 2, 8, 8));
        assert_eq!(cs.label, CaseLabel::UnitsSplit);
        assert_eq!(cs.ratio_order_mod_p, Some(4));
        assert_eq!(cs.ratio_order_full, Some(20));

        let cs = classify(&params(5, 2, 6, 8));
        assert_eq!(cs.label, CaseLabel::UnitsNonsplit);
        assert_eq!(cs.ratio_order_mod_p, Some(3));
        assert_eq!(cs.ratio_order_full, Some(15));
    }

    #[test]
    fn period_examples() {
        let g = params(5, 2, 8, 8);
        // x0 = 22 is a root of t^2 - 8t - 8
        assert_eq!(
            predict_period(&g, g.modulus().elem(22)),
            Some(PeriodInfo { pre_period: 0, period: 1 })
        );

        let g = params(5, 2, 6, 6);
        // x0 = 3 sits over the repeated root, f(3) has valuation 1
        assert_eq!(
            predict_period(&g, g.modulus().elem(3)),
            Some(PeriodInfo { pre_period: 0, period: 5 })
        );

        let g = params(5, 2, 6, 8);
        assert_eq!(
            predict_period(&g, g.modulus().elem(13)),
            Some(PeriodInfo { pre_period: 2, period: 2 })
        );

        let g = params(13, 1, 7, 5);
        assert_eq!(
            predict_period(&g, g.modulus().elem(3)),
            Some(PeriodInfo { pre_period: 0, period: 1 })
        );

        let g = params(13, 1, 1, 3);
        assert_eq!(
            predict_period(&g, g.modulus().elem(3)),
            Some(PeriodInfo { pre_period: 0, period: 12 })
        );

        let g = params(5, 2, 24, 2);
        assert_eq!(predict_period(&g, g.modulus().elem(3)), None);
    }

    #[test]
    fn structure_examples_field() {
        assert_eq!(
            predict_structure(&params(13, 1, 0, 3)),
            structure(vec![g_comp(1, 12)])
        );
        assert_eq!(
            predict_structure(&params(13, 1, 3, 0)),
            structure(vec![cycles(2, 5), loops(3)])
        );
        assert_eq!(
            predict_structure(&params(13, 1, 1, 3)),
            structure(vec![cycles(12, 1), loops(1)])
        );
        assert_eq!(
            predict_structure(&params(13, 1, 7, 5)),
            structure(vec![cycles(3, 1), cycles(4, 2), loops(2)])
        );
        assert_eq!(
            predict_structure(&params(13, 1, 1, 4)),
            structure(vec![cycles(6, 1), cycles(7, 1)])
        );
    }

    #[test]
    fn structure_examples_prime_square() {
        assert_eq!(
            predict_structure(&params(5, 2, 6, 5)),
            structure(vec![g_comp(1, 4), cycles(10, 1), cycles(2, 4), loops(2)])
        );
        assert_eq!(
            predict_structure(&params(5, 2, 7, 5)),
            structure(vec![g_comp(1, 4), cycles(10, 2)])
        );
        assert_eq!(
            predict_structure(&params(5, 2, 6, 8)),
            structure(vec![g_comp(2, 4), cycles(15, 1)])
        );
        assert_eq!(
            predict_structure(&params(5, 2, 8, 8)),
            structure(vec![g_comp(3, 4), cycles(4, 2), loops(2)])
        );
        assert_eq!(
            predict_structure(&params(5, 2, 6, 6)),
            structure(vec![g_comp(4, 4), cycles(5, 1)])
        );
        assert_eq!(predict_structure(&params(5, 2, 24, 2)), StructurePrediction::Unsupported);
        assert_eq!(predict_structure(&params(5, 2, 10, 15)), StructurePrediction::Delegated);
    }

    #[test]
    fn structure_example_deep_ideal_b() {
        // b = 25 has valuation 2 in Z_625; two step-down cycle families
        assert_eq!(
            predict_structure(&params(5, 4, 6, 25)),
            structure(vec![
                g_comp(1, 124),
                cycles(50, 5),
                cycles(10, 20),
                cycles(2, 24),
                loops(2),
            ])
        );
    }

    #[test]
    fn repeated_root_ramified_cycles_can_split() {
        // 4a + b^2 = 780 has valuation 1, so the roots ramify; the nine
        // states over omega split into three 3-cycles, not one 9-cycle
        assert_eq!(
            predict_structure(&params(3, 3, 26, 26)),
            structure(vec![g_comp(2, 8), cycles(3, 3)])
        );
        let g = params(3, 3, 26, 26);
        assert_eq!(
            predict_period(&g, g.modulus().elem(1)),
            Some(PeriodInfo { pre_period: 0, period: 3 })
        );

        // 4a + b^2 = 21 also ramifies yet keeps the single maximal cycle
        assert_eq!(
            predict_structure(&params(3, 3, 5, 1)),
            structure(vec![g_comp(2, 8), cycles(9, 1)])
        );
        let g = params(3, 3, 5, 1);
        assert_eq!(
            predict_period(&g, g.modulus().elem(2)),
            Some(PeriodInfo { pre_period: 0, period: 9 })
        );
    }

    #[test]
    fn tree_profile_example() {
        let g = params(5, 2, 5, 6);
        let profile = tree_depth_profile(&g).unwrap();
        assert_eq!(profile, BTreeMap::from([(0, 1), (1, 4), (2, 20)]));
        assert_eq!(tree_depth_profile(&params(5, 2, 6, 6)), Err(Error::WrongCase));
    }

    #[test]
    fn tree_profile_partitions_all_states() {
        for (p, e, a, b) in [(5, 2, 5, 6), (3, 4, 6, 2), (3, 4, 9, 1), (5, 3, 50, 3), (7, 2, 7, 3)] {
            let g = params(p, e, a, b);
            let cs = classify(&g);
            assert_eq!(cs.label, CaseLabel::AInIdeal);
            let profile = tree_depth_profile(&g).unwrap();
            assert_eq!(profile.values().sum::<u64>(), g.modulus().q());
            assert_eq!(profile[&0], 1);
            // the fixed point actually is one
            let x = g.modulus().elem(cs.fixed_point.unwrap());
            assert_eq!(g.step(x), x);
        }
    }

    #[test]
    fn predictions_are_root_swap_invariant() {
        for (p, e) in [(3, 1), (3, 2), (5, 1), (5, 2), (13, 1)] {
            {
                let m = Modulus::new(p, e).unwrap();
                for a in 0..m.q() {
                    for b in 0..m.q() {
                        let g = Params::new(m, a, b);
                        let cs = classify(&g);
                        if cs.roots.is_none() {
                            continue;
                        }
                        let swapped = cs.with_swapped_roots();
                        assert_eq!(
                            predict_structure_for(&g, &cs),
                            predict_structure_for(&g, &swapped)
                        );
                        for x0 in 0..m.q() {
                            let x0 = m.elem(x0);
                            assert_eq!(
                                predict_period_for(&g, &cs, x0),
                                predict_period_for(&g, &swapped, x0),
                                "swap changed the prediction at p={p} e={e} a={a} b={b} x0={x0}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_form_merges_and_sorts() {
        let s = GraphStructure::new(vec![
            cycles(4, 1),
            loops(1),
            cycles(2, 3),
            cycles(4, 2),
            cycles(1, 2),
            cycles(9, 0),
            loops(1),
        ]);
        assert_eq!(
            s.components(),
            &[cycles(2, 3), cycles(4, 3), loops(4)]
        );
        assert_eq!(s.total_nodes(), 6 + 12 + 4);
        assert_eq!(format!("{s}"), "cycle(2)×3, cycle(4)×3, self-loop×4");
    }

    #[test]
    fn display_matches_canonical_text() {
        let s = GraphStructure::new(vec![g_comp(4, 4), cycles(5, 1)]);
        assert_eq!(format!("{s}"), "G(4,4), cycle(5)×1");
    }
}
