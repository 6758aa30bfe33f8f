//! Extending sections of `O(mS)` (and of the twist `O(mS + D0 − D1)`) from
//! the central fiber `C ∪ C_a` of a one-tail family to the thickenings
//! `W_k = (k+1)C + kC_a`, plus a checker for the gluing data of `O(mS)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::exactalg::linalg::{kernel_basis_with_cols, matrix_rank};
use crate::exactalg::Scalar;
use crate::nodalcurve::{h0_h1, BundleOnCurve, Component, CurveError, CurveGraph, Node, NodeEnd, PointLabel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error("multiplicity must be at least 1, got {0}")]
    BadMultiplicity(i64),
    #[error("thickening level must be at least 1, got {0}")]
    BadLevel(u32),
    #[error("unknown twist `{0}` (expected none or d0-d1)")]
    UnknownTwist(String),
    #[error("extendable sections do not form a span of basis monomials")]
    NotMonomialSpan,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistSpec {
    None,
    /// `O(mS + D0 − D1)` with `D0`, `D1` through general points of `C`.
    D0MinusD1,
}

impl TwistSpec {
    pub fn parse(s: &str) -> Result<Self, ExtensionError> {
        match s {
            "none" => Ok(TwistSpec::None),
            "d0-d1" => Ok(TwistSpec::D0MinusD1),
            other => Err(ExtensionError::UnknownTwist(other.to_string())),
        }
    }
}

impl fmt::Display for TwistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwistSpec::None => "none",
            TwistSpec::D0MinusD1 => "d0-d1",
        })
    }
}

/// The section `u0^{m−i} u1^i` of `O(m)` on the rational component, where
/// `[1,0]` is the node and `[0,1]` meets `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Section {
    pub m: u32,
    pub i: u32,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let power = |v: &str, e: u32| match e {
            0 => None,
            1 => Some(v.to_string()),
            e => Some(format!("{v}^{e}")),
        };
        let parts: Vec<String> = [power("u0", self.m - self.i), power("u1", self.i)].into_iter().flatten().collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

fn check_m(m: i64) -> Result<u32, ExtensionError> {
    if m < 1 {
        return Err(ExtensionError::BadMultiplicity(m));
    }
    Ok(m as u32)
}

/// A finite-dimensional section space with an evaluation into the gluing
/// ring `k[u1]/(u1^{n})`, coefficients listed by power of `u1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThickenedSectionSpace {
    pub level: u32,
    pub basis: Vec<String>,
    pub evaluation: Vec<Vec<Scalar>>,
}

/// The elliptic side over `(level+1)C` restricted to the node, for
/// `level ≤ 1`.
fn elliptic_side(level: u32, twist: TwistSpec) -> ThickenedSectionSpace {
    let n = level as usize + 1;
    let unit = |k: usize| -> Vec<Scalar> { (0..n).map(|j| Scalar::from_int((j == k) as i64)).collect() };
    let (basis, evaluation) = match (level, twist) {
        // constants on C
        (0, TwistSpec::None) => (vec!["a"], vec![unit(0)]),
        // H⁰(O_C(q0 − q1)) = 0
        (0, TwistSpec::D0MinusD1) => (vec![], vec![]),
        // a + b t, where t restricts to zero on 2C ∩ C_a
        (_, TwistSpec::None) => (vec!["a", "t"], vec![unit(0), vec![Scalar::zero(); n]]),
        // the generator s evaluating to u1
        (_, TwistSpec::D0MinusD1) => (vec!["s"], vec![unit(1)]),
    };
    ThickenedSectionSpace { level, basis: basis.into_iter().map(str::to_string).collect(), evaluation }
}

/// `H⁰(O_{C_a}(m))` evaluated into `k[u1]/(u1^{level+1})` at the node.
fn rational_side(m: u32, level: u32) -> ThickenedSectionSpace {
    let n = level as usize + 1;
    ThickenedSectionSpace {
        level,
        basis: (0..=m).map(|i| Section { m, i }.to_string()).collect(),
        evaluation: (0..=m as usize).map(|i| (0..n).map(|j| Scalar::from_int((i == j) as i64)).collect()).collect(),
    }
}

/// Result of solving `φ1(w1) = φ2(w2)` in the gluing ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberProduct {
    pub level: u32,
    pub dim: usize,
    /// Rational-side monomials reached by some global section.
    pub extendable: Vec<Section>,
    pub obstructed: Vec<Section>,
}

fn fiber_product(m: u32, twist: TwistSpec, level: u32) -> Result<FiberProduct, ExtensionError> {
    let e = elliptic_side(level, twist);
    let r = rational_side(m, level);
    let (ne, nr) = (e.basis.len(), r.basis.len());
    let n = level as usize + 1;
    // rows: coefficients of u1^j; columns: elliptic basis, then rational
    let matrix: Vec<Vec<Scalar>> = (0..n)
        .map(|j| {
            e.evaluation
                .iter()
                .map(|v| v[j].clone())
                .chain(r.evaluation.iter().map(|v| -&v[j]))
                .collect()
        })
        .collect();
    let kernel = kernel_basis_with_cols(&matrix, ne + nr);
    let projection: Vec<Vec<Scalar>> = kernel.iter().map(|v| v[ne..].to_vec()).collect();
    let image_rank = matrix_rank(&projection);
    let mut extendable = Vec::new();
    let mut obstructed = Vec::new();
    for i in 0..=m {
        let mut with = projection.clone();
        with.push((0..nr).map(|k| Scalar::from_int((k == i as usize) as i64)).collect());
        if matrix_rank(&with) == image_rank {
            extendable.push(Section { m, i });
        } else {
            obstructed.push(Section { m, i });
        }
    }
    if extendable.len() != image_rank {
        return Err(ExtensionError::NotMonomialSpan);
    }
    Ok(FiberProduct { level, dim: kernel.len(), extendable, obstructed })
}

/// Basis of `H⁰(Z0, L)` as rational-side monomials.
pub fn central_sections(m: i64, twist: TwistSpec) -> Result<Vec<Section>, ExtensionError> {
    Ok(fiber_product(check_m(m)?, twist, 0)?.extendable)
}

/// Which central sections lift to `W_1 = 2C + C_a`.
pub fn extend_once(m: i64, twist: TwistSpec) -> Result<FiberProduct, ExtensionError> {
    let m = check_m(m)?;
    let mut fp = fiber_product(m, twist, 1)?;
    // only sections that exist on the central fiber count
    let central = fiber_product(m, twist, 0)?.extendable;
    fp.obstructed.retain(|s| central.contains(s));
    Ok(fp)
}

/// `Z0 = C ∪ C_a` meeting at `q`, with `C` elliptic.
fn central_fiber() -> CurveGraph {
    CurveGraph::new(
        vec![Component::elliptic("C"), Component::rational("C_a")],
        vec![Node(NodeEnd::new("C", PointLabel::Generic("q".into())), NodeEnd::new("C_a", PointLabel::Zero))],
    )
    .expect("two components, one node")
}

/// `O(mS − C)|_{Z0}` (twisted by `D0 − D1` if asked), with the rational
/// degree overridable for sanity checks.
fn obstruction_bundle(twist: TwistSpec, rational_degree: i64) -> BundleOnCurve {
    let b = BundleOnCurve::new(&[("C", 1), ("C_a", rational_degree)]);
    match twist {
        // O_C(q): its section vanishes at the node
        TwistSpec::None => b.with_divisor_at(NodeEnd::new("C", PointLabel::Generic("q".into()))),
        // O_C(q + q0 − q1): degree one, divisor away from the node
        TwistSpec::D0MinusD1 => b,
    }
}

/// `(h⁰, h¹)` of `O(mS − C)|_{Z0}` with the rational degree replaced.
pub fn obstruction_cohomology(m: i64, twist: TwistSpec, rational_degree: i64) -> Result<(usize, usize), ExtensionError> {
    check_m(m)?;
    Ok(h0_h1(&central_fiber(), &obstruction_bundle(twist, rational_degree))?)
}

/// `h¹(O(mS − W_k)|_{Z0})`, using `O(mS − W_k)|_{Z0} ≅ O(mS − C)|_{Z0}`.
pub fn obstruction_space(m: i64, twist: TwistSpec, k: u32) -> Result<usize, ExtensionError> {
    if k < 1 {
        return Err(ExtensionError::BadLevel(k));
    }
    Ok(obstruction_cohomology(m, twist, m - 1)?.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Extends,
    Obstructed,
    /// A nonzero obstruction space: this level does not decide.
    Undetermined,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Extends => "extends",
            Status::Obstructed => "obstructed",
            Status::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRecord {
    pub level: u32,
    pub obstruction: usize,
    pub statuses: Vec<(Section, Status)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionReport {
    pub m: u32,
    pub twist: TwistSpec,
    pub central: Vec<Section>,
    pub h0_w1: usize,
    pub levels: Vec<LevelRecord>,
}

impl ExtensionReport {
    /// Sections marked as extending at the last level.
    pub fn surviving(&self) -> Vec<Section> {
        self.levels
            .last()
            .map(|l| l.statuses.iter().filter(|(_, s)| *s == Status::Extends).map(|(x, _)| *x).collect())
            .unwrap_or_default()
    }
}

/// Level 1 by the fiber product; each further level by the vanishing of the
/// obstruction space, so that everything on `W_k` lifts to `W_{k+1}`.
pub fn extend_all(m: i64, twist: TwistSpec, k_max: u32) -> Result<ExtensionReport, ExtensionError> {
    if k_max < 1 {
        return Err(ExtensionError::BadLevel(k_max));
    }
    let central = central_sections(m, twist)?;
    let once = extend_once(m, twist)?;
    let mut statuses: Vec<(Section, Status)> = central
        .iter()
        .map(|s| (*s, if once.extendable.contains(s) { Status::Extends } else { Status::Obstructed }))
        .collect();
    let mut levels = vec![LevelRecord { level: 1, obstruction: 0, statuses: statuses.clone() }];
    for k in 2..=k_max {
        let obstruction = obstruction_space(m, twist, k - 1)?;
        if obstruction > 0 {
            for (s, st) in statuses.iter_mut() {
                // the tautological section vanishing to order m along S
                // always extends
                let tautological = s.i == 0 && twist == TwistSpec::None;
                if *st == Status::Extends && !tautological {
                    *st = Status::Undetermined;
                }
            }
        }
        levels.push(LevelRecord { level: k, obstruction, statuses: statuses.clone() });
    }
    Ok(ExtensionReport { m: m as u32, twist, central, h0_w1: once.dim, levels })
}

/// Dimensions of `H⁰(W_k)` for `k = 1..=k_max` read off the exact sequences
/// `0 → H⁰(O(mS − C)|Z0) → H⁰(W_{k+1}) → H⁰(W_k) → H¹(O(mS − C)|Z0)`,
/// valid when the `H¹` vanishes; `None` for levels where it does not.
pub fn ladder_dims(m: i64, twist: TwistSpec, k_max: u32) -> Result<Vec<Option<usize>>, ExtensionError> {
    let (h0, h1) = obstruction_cohomology(m, twist, m - 1)?;
    let mut dim = Some(extend_once(m, twist)?.dim);
    let mut out = vec![dim];
    for _ in 2..=k_max {
        dim = if h1 == 0 { dim.map(|d| d + h0) } else { None };
        out.push(dim);
    }
    Ok(out)
}

/// `c · Π x^e` with integer (possibly negative) exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMonomial {
    pub coeff: Scalar,
    pub exps: BTreeMap<String, i64>,
}

impl LaurentMonomial {
    pub fn new(coeff: i64, exps: &[(&str, i64)]) -> Self {
        let mut m = LaurentMonomial { coeff: Scalar::from_int(coeff), exps: BTreeMap::new() };
        for (v, e) in exps {
            *m.exps.entry(v.to_string()).or_insert(0) += e;
        }
        m.exps.retain(|_, e| *e != 0);
        m
    }

    pub fn one() -> Self {
        LaurentMonomial::new(1, &[])
    }

    pub fn mul(&self, other: &LaurentMonomial) -> LaurentMonomial {
        let mut out = LaurentMonomial { coeff: &self.coeff * &other.coeff, exps: self.exps.clone() };
        for (v, e) in &other.exps {
            *out.exps.entry(v.clone()).or_insert(0) += e;
        }
        out.exps.retain(|_, e| *e != 0);
        out
    }

    fn pow(&self, e: i64) -> LaurentMonomial {
        let coeff = if e >= 0 { self.coeff.pow(e as u32) } else { self.coeff.recip().pow((-e) as u32) };
        LaurentMonomial { coeff, exps: self.exps.iter().map(|(v, x)| (v.clone(), x * e)).filter(|(_, x)| *x != 0).collect() }
    }

    /// Substitute a Laurent monomial for each variable named in `images`.
    pub fn substitute(&self, images: &BTreeMap<String, LaurentMonomial>) -> LaurentMonomial {
        let mut out = LaurentMonomial { coeff: self.coeff.clone(), exps: BTreeMap::new() };
        for (v, e) in &self.exps {
            let img = images.get(v).cloned().unwrap_or_else(|| LaurentMonomial::new(1, &[(v, 1)]));
            out = out.mul(&img.pow(*e));
        }
        out
    }
}

impl fmt::Display for LaurentMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.coeff.is_one() || self.exps.is_empty() {
            parts.push(self.coeff.to_string());
        }
        for (v, e) in &self.exps {
            parts.push(if *e == 1 { v.clone() } else { format!("{v}^{e}") });
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Three charts with coordinate transitions `φ_ij : V_i → V_j` (images of
/// `V_j`'s coordinates in `V_i`'s) and bundle transitions `η_j = g_ij η_i`
/// written in `V_i`'s coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trivialization {
    pub coords: [Vec<String>; 3],
    pub transitions: BTreeMap<(usize, usize), Vec<LaurentMonomial>>,
    pub bundle: BTreeMap<(usize, usize), LaurentMonomial>,
}

impl Trivialization {
    /// `O(mS)` near the exceptional curve: `V0 = (u0, z)`, `V1 = (u1, t)`,
    /// `V2 = (z, t)` with `u0 z = u1 t`; `u0^m η1 = η0 u1^m` and `η2 = η1`.
    pub fn standard(m: i64) -> Self {
        Trivialization::with_v0_v1_t_exponent(m, 1)
    }

    /// The same data with `t = u0^a z` on `V0 ∩ V1`; only `a = 1` is
    /// compatible with `u0 z = u1 t`.
    pub fn with_v0_v1_t_exponent(m: i64, a: i64) -> Self {
        let coords = [
            vec!["u0".to_string(), "z".to_string()],
            vec!["u1".to_string(), "t".to_string()],
            vec!["z".to_string(), "t".to_string()],
        ];
        let l = LaurentMonomial::new;
        let transitions = [
            ((0, 1), vec![l(1, &[("u0", -1)]), l(1, &[("u0", a), ("z", 1)])]),
            ((0, 2), vec![l(1, &[("z", 1)]), l(1, &[("u0", 1), ("z", 1)])]),
            ((1, 2), vec![l(1, &[("u1", 1), ("t", 1)]), l(1, &[("t", 1)])]),
        ]
        .into_iter()
        .collect();
        let bundle = [
            ((0, 1), l(1, &[("u0", -m)])),
            ((1, 2), LaurentMonomial::one()),
            ((0, 2), l(1, &[("u0", -m)])),
        ]
        .into_iter()
        .collect();
        Trivialization { coords, transitions, bundle }
    }

    /// Every way to change one exponent (including absent ones) by ±1, in a
    /// fixed order, with a description.
    pub fn single_exponent_mutations(&self) -> Vec<(String, Trivialization)> {
        let mut out = Vec::new();
        for (key, images) in &self.transitions {
            for k in 0..images.len() {
                for v in &self.coords[key.0] {
                    for delta in [-1, 1] {
                        let mut t = self.clone();
                        let target = &mut t.transitions.get_mut(key).unwrap()[k];
                        *target = target.mul(&LaurentMonomial::new(1, &[(v, delta)]));
                        let what = format!("phi{}{}[{}] {v}{delta:+}", key.0, key.1, self.coords[key.1][k]);
                        out.push((what, t));
                    }
                }
            }
        }
        for key in self.bundle.keys() {
            for v in &self.coords[key.0] {
                for delta in [-1, 1] {
                    let mut t = self.clone();
                    let g = t.bundle.get_mut(key).unwrap();
                    *g = g.mul(&LaurentMonomial::new(1, &[(v, delta)]));
                    out.push((format!("g{}{} {v}{delta:+}", key.0, key.1), t));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleCheck {
    pub ok: bool,
    pub failure: Option<String>,
}

fn determinant(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..].iter().map(|row| [&row[..j], &row[j + 1..]].concat()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * determinant(&minor)
            })
            .sum(),
    }
}

/// Check the transitions are invertible, compose (`φ12 ∘ φ01 = φ02`), and
/// that the bundle transitions satisfy `g02 = (g12 ∘ φ01) · g01`.
pub fn check_cocycle(t: &Trivialization) -> CocycleCheck {
    let fail = |msg: String| CocycleCheck { ok: false, failure: Some(msg) };
    for ((i, j), images) in &t.transitions {
        if images.len() != t.coords[*j].len() {
            return fail(format!("phi{i}{j} has {} components", images.len()));
        }
        let exps: Vec<Vec<i64>> =
            images.iter().map(|img| t.coords[*i].iter().map(|v| img.exps.get(v).copied().unwrap_or(0)).collect()).collect();
        if images.iter().any(|img| img.exps.keys().any(|v| !t.coords[*i].contains(v))) {
            return fail(format!("phi{i}{j} uses a variable outside chart V{i}"));
        }
        if images.iter().any(|img| img.coeff.is_zero()) || determinant(&exps).abs() != 1 {
            return fail(format!("phi{i}{j} is not invertible"));
        }
    }
    for ((i, j), g) in &t.bundle {
        if g.coeff.is_zero() || g.exps.keys().any(|v| !t.coords[*i].contains(v)) {
            return fail(format!("g{i}{j} is not a unit on V{i}"));
        }
    }
    let as_map = |i: usize, j: usize| -> BTreeMap<String, LaurentMonomial> {
        t.coords[j].iter().cloned().zip(t.transitions[&(i, j)].iter().cloned()).collect()
    };
    let phi01 = as_map(0, 1);
    for (k, img) in t.transitions[&(1, 2)].iter().enumerate() {
        let composed = img.substitute(&phi01);
        let direct = &t.transitions[&(0, 2)][k];
        if &composed != direct {
            return fail(format!("phi12∘phi01 gives {} = {composed}, phi02 gives {direct}", t.coords[2][k]));
        }
    }
    let lhs = t.bundle[&(1, 2)].substitute(&phi01).mul(&t.bundle[&(0, 1)]);
    if lhs != t.bundle[&(0, 2)] {
        return fail(format!("(g12∘phi01)·g01 = {lhs}, g02 = {}", t.bundle[&(0, 2)]));
    }
    CocycleCheck { ok: true, failure: None }
}
