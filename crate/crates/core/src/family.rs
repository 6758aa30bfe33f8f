//! Families of genus-one curves with rational tails over a base with
//! smoothing parameters: the β-map, the split model of the direct image,
//! fiber ranks over strata and their comparison with fiberwise cohomology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cohomology::{splitting_obstruction, CohomError, MultiDegree};
use crate::exactalg::fiber::syzygy_fiber_dim;
use crate::exactalg::{monomial_syzygies, AlgError, Monomial, PointAssignment, Polynomial, PrimeSequence};
use crate::nodalcurve::{h0_h1, BundleOnCurve, Component, CurveError, CurveGraph, Node, NodeEnd, PointLabel};

/// Component id of the elliptic core in fiber curves.
pub const CORE: &str = "core";
/// The smoothing parameter shared by all tails when they are smoothed in
/// one direction.
pub const SHARED_PARAMETER: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("tail parameter `{0}` appears twice")]
    DuplicateTail(String),
    #[error("`{0}` is used both as a tail parameter and in a chain")]
    ParameterClash(String),
    #[error("`{0}` is a reserved name")]
    ReservedName(String),
    #[error("ghost `{0}` is attached to different parents in different chains")]
    InconsistentChain(String),
    #[error("chain repeats `{0}`")]
    RepeatedInChain(String),
    #[error("tails smoothed in one direction cannot have chains")]
    ChainInSingleDirection,
    #[error("multiplicity {m} for `{tail}` is negative")]
    NegativeMultiplicity { tail: String, m: i64 },
    #[error("expected {expected} multiplicities, got {got}")]
    MultiplicityCount { expected: usize, got: usize },
    #[error("no value for base parameter `{0}`")]
    MissingCoordinate(String),
    #[error("multiprojective data requested for a local base")]
    NotMultiprojective,
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Cohom(#[from] CohomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMode {
    /// Affine coordinates around the deepest point.
    Local,
    /// `(ℙ¹)^n`, one factor per base parameter.
    Multiprojective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// One smoothing parameter per tail.
    Independent,
    /// All tails smoothed together by a single parameter.
    Single,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSpec {
    /// The smoothing parameter of the node joining the tail to the rest.
    pub param: String,
    pub m: i64,
    /// Ghost parameters between the core and the tail, core first.
    pub chain: Vec<String>,
}

impl TailSpec {
    pub fn new(param: &str, m: i64) -> Self {
        TailSpec { param: param.to_string(), m, chain: Vec::new() }
    }

    pub fn with_chain<S: AsRef<str>>(mut self, chain: &[S]) -> Self {
        self.chain = chain.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyConfig {
    pub tails: Vec<TailSpec>,
    pub mode: BaseMode,
    pub direction: Direction,
}

impl FamilyConfig {
    pub fn new(tails: Vec<TailSpec>, mode: BaseMode, direction: Direction) -> Result<Self, FamilyError> {
        let config = FamilyConfig { tails, mode, direction };
        config.validate()?;
        Ok(config)
    }

    /// `r` tails `t1..tr` without chains.
    pub fn plain(m: &[i64], mode: BaseMode) -> Self {
        let tails = m.iter().enumerate().map(|(i, &mi)| TailSpec::new(&format!("t{}", i + 1), mi)).collect();
        FamilyConfig::new(tails, mode, Direction::Independent).expect("plain configurations are valid")
    }

    fn validate(&self) -> Result<(), FamilyError> {
        let mut params = BTreeSet::new();
        for t in &self.tails {
            if t.param == CORE {
                return Err(FamilyError::ReservedName(t.param.clone()));
            }
            if !params.insert(t.param.as_str()) {
                return Err(FamilyError::DuplicateTail(t.param.clone()));
            }
            if t.m < 0 {
                return Err(FamilyError::NegativeMultiplicity { tail: t.param.clone(), m: t.m });
            }
        }
        if self.direction == Direction::Single {
            if self.tails.iter().any(|t| !t.chain.is_empty()) {
                return Err(FamilyError::ChainInSingleDirection);
            }
            return Ok(());
        }
        self.parents()?;
        Ok(())
    }

    /// Parent of every tail and ghost parameter (`None` = the core).
    fn parents(&self) -> Result<BTreeMap<String, Option<String>>, FamilyError> {
        let tail_params: BTreeSet<&str> = self.tails.iter().map(|t| t.param.as_str()).collect();
        let mut parent: BTreeMap<String, Option<String>> = BTreeMap::new();
        let mut set = |x: &str, p: Option<&String>| -> Result<(), FamilyError> {
            match parent.get(x) {
                Some(old) if old.as_ref() != p => Err(FamilyError::InconsistentChain(x.to_string())),
                _ => {
                    parent.insert(x.to_string(), p.cloned());
                    Ok(())
                }
            }
        };
        for t in &self.tails {
            let mut seen = BTreeSet::new();
            let mut prev: Option<&String> = None;
            for g in &t.chain {
                if g == CORE {
                    return Err(FamilyError::ReservedName(g.clone()));
                }
                if tail_params.contains(g.as_str()) {
                    return Err(FamilyError::ParameterClash(g.clone()));
                }
                if !seen.insert(g) {
                    return Err(FamilyError::RepeatedInChain(g.clone()));
                }
                set(g, prev)?;
                prev = Some(g);
            }
            set(&t.param, prev)?;
        }
        Ok(parent)
    }

    pub fn r(&self) -> usize {
        self.tails.len()
    }

    pub fn multiplicities(&self) -> Vec<i64> {
        self.tails.iter().map(|t| t.m).collect()
    }

    /// Replace the multiplicities.
    pub fn with_m(&self, m: &[i64]) -> Result<FamilyConfig, FamilyError> {
        if m.len() != self.tails.len() {
            return Err(FamilyError::MultiplicityCount { expected: self.tails.len(), got: m.len() });
        }
        let mut out = self.clone();
        for (t, &mi) in out.tails.iter_mut().zip(m) {
            t.m = mi;
        }
        out.validate()?;
        Ok(out)
    }

    /// Base parameters: for each tail its chain (core first) then its own
    /// parameter, in order of first appearance.
    pub fn universe(&self) -> Vec<String> {
        if self.direction == Direction::Single {
            return if self.tails.is_empty() { vec![] } else { vec![SHARED_PARAMETER.to_string()] };
        }
        let mut out: Vec<String> = Vec::new();
        for t in &self.tails {
            for x in t.chain.iter().chain(std::iter::once(&t.param)) {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
        }
        out
    }

    /// The parameters whose product smooths tail `i` away: its own and its
    /// chain's.
    fn tail_divisor(&self, i: usize) -> Vec<String> {
        match self.direction {
            Direction::Single => vec![SHARED_PARAMETER.to_string()],
            Direction::Independent => {
                let t = &self.tails[i];
                t.chain.iter().cloned().chain(std::iter::once(t.param.clone())).collect()
            }
        }
    }

    /// Drop tails of multiplicity zero; they do not affect the sheaf.
    pub fn normalized(&self) -> (FamilyConfig, Vec<String>) {
        let dropped = self.tails.iter().filter(|t| t.m == 0).map(|t| t.param.clone()).collect();
        let kept = FamilyConfig {
            tails: self.tails.iter().filter(|t| t.m != 0).cloned().collect(),
            ..self.clone()
        };
        (kept, dropped)
    }
}

/// A line bundle `O(Σ c_x V_x)` on the base, `V_x = {x = 0}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Twist(BTreeMap<String, i64>);

impl Twist {
    pub fn trivial() -> Self {
        Twist::default()
    }

    fn of(params: &[String], k: i64) -> Self {
        let mut t = Twist::trivial();
        for p in params {
            *t.0.entry(p.clone()).or_insert(0) += k;
        }
        t.0.retain(|_, c| *c != 0);
        t
    }

    pub fn coefficient(&self, param: &str) -> i64 {
        self.0.get(param).copied().unwrap_or(0)
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    /// `k` times the class.
    pub fn scale(&self, k: i64) -> Twist {
        Twist(self.0.iter().map(|(p, c)| (p.clone(), c * k)).filter(|(_, c)| *c != 0).collect())
    }

    /// The class on `(ℙ¹)^n`, slots in `universe` order.
    pub fn multidegree(&self, universe: &[String]) -> Result<MultiDegree, CohomError> {
        MultiDegree::new(universe.iter().map(|p| self.coefficient(p)).collect())
    }

    /// For an anti-effective twist on a local base, the monomial generating
    /// the corresponding principal ideal.
    pub fn principal_monomial(&self) -> Option<Monomial> {
        if self.0.values().any(|&c| c > 0) {
            return None;
        }
        Some(Monomial::from_pairs(self.0.iter().map(|(p, c)| (p.as_str(), (-c) as u32))))
    }
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "O");
        }
        write!(f, "O(")?;
        for (n, (p, &c)) in self.0.iter().enumerate() {
            let sign = if c < 0 { "-" } else if n > 0 { "+" } else { "" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            write!(f, "{sign}{mag}V_{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `O(−(V_i + Σ_j V_ij))`, the direct image of the normal bundle of the
/// tail's section.
pub fn normal_bundle_of_section(config: &FamilyConfig, tail: usize) -> Twist {
    Twist::of(&config.tail_divisor(tail), -1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaMap {
    pub entries: Vec<Monomial>,
}

impl BetaMap {
    pub fn as_polynomials(&self) -> Vec<Polynomial> {
        self.entries.iter().cloned().map(Polynomial::from).collect()
    }
}

impl fmt::Display for BetaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(Monomial::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Entry `i` is the product of the parameters smoothing tail `i`.
pub fn beta_map(config: &FamilyConfig) -> BetaMap {
    BetaMap { entries: (0..config.r()).map(|i| Monomial::product_of(&config.tail_divisor(i))).collect() }
}

fn twists_with_d(config: &FamilyConfig) -> Vec<Twist> {
    let mut out = vec![Twist::trivial()];
    for (i, t) in config.tails.iter().enumerate() {
        let n = normal_bundle_of_section(config, i);
        out.extend((1..=t.m).map(|k| n.scale(k)));
    }
    out
}

/// The split direct image with the extra section `D`:
/// `O ⊕ ⊕_i ⊕_{k=1}^{m_i} O(−k(V_i + Σ_j V_ij))`.
pub fn pushforward_with_d(config: &FamilyConfig) -> Vec<Twist> {
    twists_with_d(&config.normalized().0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushforwardModel {
    /// The configuration after dropping multiplicity-zero tails.
    pub config: FamilyConfig,
    pub dropped: Vec<String>,
    pub v_m0: Vec<Twist>,
    pub v1: Vec<Twist>,
    pub beta: BetaMap,
    pub kernel_generators: Vec<Vec<Polynomial>>,
}

impl PushforwardModel {
    pub fn universe(&self) -> Vec<String> {
        self.config.universe()
    }

    pub fn total_multiplicity(&self) -> i64 {
        self.config.tails.iter().map(|t| t.m).sum()
    }

    /// `rank V_{m,0} + rank ker β` at a generic point.
    pub fn expected_generic_rank(&self) -> usize {
        self.v_m0.len() + self.v1.len().saturating_sub(1)
    }
}

/// The direct image of `O(mS)` as `V_{m,0} ⊕ ker β`.
pub fn pushforward(config: &FamilyConfig) -> PushforwardModel {
    let (config, dropped) = config.normalized();
    let mut v_m0 = vec![Twist::trivial()];
    let mut v1 = Vec::new();
    for (i, t) in config.tails.iter().enumerate() {
        let n = normal_bundle_of_section(&config, i);
        v1.push(n.clone());
        v_m0.extend((2..=t.m).map(|k| n.scale(k)));
    }
    let beta = beta_map(&config);
    let kernel_generators = monomial_syzygies(&beta.entries);
    PushforwardModel { config, dropped, v_m0, v1, beta, kernel_generators }
}

fn check_point(universe: &[String], point: &PointAssignment) -> Result<(), FamilyError> {
    match universe.iter().find(|p| point.value(p).is_none()) {
        Some(p) => Err(FamilyError::MissingCoordinate(p.clone())),
        None => Ok(()),
    }
}

/// Minimal number of generators of `ker β` at the point.
pub fn kernel_fiber_dim(model: &PushforwardModel, point: &PointAssignment, degree_bound: u32) -> Result<usize, FamilyError> {
    check_point(&model.universe(), point)?;
    if model.beta.entries.len() <= 1 {
        return Ok(0);
    }
    Ok(syzygy_fiber_dim(&model.beta.entries, point, degree_bound)?.trusted()?)
}

/// `dim_k (V_{m,0} ⊕ ker β) ⊗ k(x)`.
pub fn fiber_rank(model: &PushforwardModel, point: &PointAssignment, degree_bound: u32) -> Result<usize, FamilyError> {
    Ok(model.v_m0.len() + kernel_fiber_dim(model, point, degree_bound)?)
}

/// Fiber rank at a generic point, computed at both prime sequences.
pub fn generic_fiber_rank(model: &PushforwardModel, degree_bound: u32) -> Result<usize, FamilyError> {
    let u = model.universe();
    let a = fiber_rank(model, &PointAssignment::generic(&u, PrimeSequence::Primary), degree_bound)?;
    let b = fiber_rank(model, &PointAssignment::generic(&u, PrimeSequence::Secondary), degree_bound)?;
    if a != b {
        return Err(AlgError::PrimeDisagreement { primary: a, secondary: b }.into());
    }
    Ok(a)
}

/// `R¹π_*O(mS) ≅ O/(β entries)`: a length-one sheaf on the zero locus of the
/// entry ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct R1Model {
    /// Irreducible components of the support, each the coordinate subspace
    /// where the listed parameters vanish.
    pub support: Vec<BTreeSet<String>>,
    /// The common zero locus of the tail parameters.
    pub tail_locus: BTreeSet<String>,
}

impl R1Model {
    /// Dimension of the fiber of `R¹` at a point: 1 on the support, 0 off it.
    pub fn fiber_dim(&self, point: &PointAssignment) -> usize {
        let vanishes = |p: &String| point.value(p).is_some_and(|v| v.is_zero());
        self.support.iter().any(|c| c.iter().all(vanishes)) as usize
    }
}

/// Minimal vertex covers of the hypergraph whose edges are the variable
/// sets of the entries: the minimal primes of a squarefree monomial ideal.
fn minimal_covers(entries: &[Monomial], universe: &[String]) -> Vec<BTreeSet<String>> {
    let edges: Vec<BTreeSet<&str>> = entries.iter().map(|m| m.variables().collect()).collect();
    let n = universe.len();
    let mut covers: Vec<BTreeSet<String>> = Vec::new();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let set: BTreeSet<&str> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| universe[i].as_str()).collect();
        if !edges.iter().all(|e| e.iter().any(|x| set.contains(x))) {
            continue;
        }
        if covers.iter().any(|c| c.iter().all(|x| set.contains(x.as_str()))) {
            continue;
        }
        covers.push(set.into_iter().map(str::to_string).collect());
    }
    covers
}

pub fn r1_model(config: &FamilyConfig) -> R1Model {
    let (config, _) = config.normalized();
    let beta = beta_map(&config);
    let tail_locus = match config.direction {
        Direction::Single => config.universe().into_iter().collect(),
        Direction::Independent => config.tails.iter().map(|t| t.param.clone()).collect(),
    };
    R1Model { support: minimal_covers(&beta.entries, &config.universe()), tail_locus }
}

/// The central fiber over the stratum where exactly the parameters in
/// `stratum` vanish, with the line bundle `O(mS)` restricted to it.
pub fn fiber_curve(config: &FamilyConfig, stratum: &BTreeSet<String>) -> Result<(CurveGraph, BundleOnCurve), FamilyError> {
    let (config, _) = config.normalized();
    let mut components = vec![Component::elliptic(CORE)];
    let mut nodes = Vec::new();
    let mut degrees: BTreeMap<String, i64> = [(CORE.to_string(), 0)].into_iter().collect();

    let attach = |child: &str, parent: Option<&str>, nodes: &mut Vec<Node>| {
        let end = match parent {
            None => NodeEnd::new(CORE, PointLabel::Generic(format!("q_{child}"))),
            Some(p) => NodeEnd::new(p, PointLabel::Generic(format!("p_{child}"))),
        };
        nodes.push(Node(end, NodeEnd::new(child, PointLabel::Zero)));
    };

    match config.direction {
        Direction::Single => {
            let open = stratum.contains(SHARED_PARAMETER);
            for t in &config.tails {
                if open {
                    components.push(Component::rational(&t.param));
                    attach(&t.param, None, &mut nodes);
                    degrees.insert(t.param.clone(), t.m);
                } else {
                    *degrees.get_mut(CORE).unwrap() += t.m;
                }
            }
        }
        Direction::Independent => {
            let parents = config.parents()?;
            let nearest_present = |mut x: Option<String>| -> Option<String> {
                while let Some(y) = x {
                    if stratum.contains(&y) {
                        return Some(y);
                    }
                    x = parents[&y].clone();
                }
                None
            };
            for p in config.universe() {
                if stratum.contains(&p) {
                    components.push(Component::rational(&p));
                    degrees.insert(p.clone(), 0);
                    let up = nearest_present(parents[&p].clone());
                    attach(&p, up.as_deref(), &mut nodes);
                }
            }
            for t in &config.tails {
                let home = nearest_present(Some(t.param.clone())).unwrap_or_else(|| CORE.to_string());
                *degrees.get_mut(&home).unwrap() += t.m;
            }
        }
    }
    let graph = CurveGraph::new(components, nodes)?;
    let core_degree = degrees[CORE];
    let mut bundle = BundleOnCurve { degrees, ..Default::default() };
    if core_degree == 0 {
        bundle.trivial.insert(CORE.to_string());
    }
    Ok((graph, bundle))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `h¹ = 0` and the module fiber equals `h⁰`.
    Equal,
    /// `h¹ > 0`; base change is not expected to hold.
    Jump,
    /// Something the theory forbids: a mismatch where `h¹ = 0`, or a fiber
    /// rank below the generic rank.
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equal => "EQUAL",
            Verdict::Jump => "JUMP",
            Verdict::Violation => "VIOLATION",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseChangeReport {
    pub stratum: BTreeSet<String>,
    pub module_fiber: usize,
    pub generic_rank: usize,
    pub h0: usize,
    pub h1: usize,
    pub chi: i64,
    pub r1_fiber: usize,
    pub verdict: Verdict,
}

impl BaseChangeReport {
    /// All the invariants that should hold on this stratum.
    pub fn consistent(&self, total_multiplicity: i64) -> bool {
        self.verdict != Verdict::Violation && self.chi == total_multiplicity && self.r1_fiber == self.h1
    }
}

fn compare(
    model: &PushforwardModel,
    stratum: BTreeSet<String>,
    kernel_dim: usize,
    generic_rank: usize,
    r1: &R1Model,
) -> Result<BaseChangeReport, FamilyError> {
    let (graph, bundle) = fiber_curve(&model.config, &stratum)?;
    let (h0, h1) = h0_h1(&graph, &bundle)?;
    let chi = h0 as i64 - h1 as i64;
    let module_fiber = model.v_m0.len() + kernel_dim;
    let verdict = if h1 == 0 {
        if module_fiber == h0 { Verdict::Equal } else { Verdict::Violation }
    } else if module_fiber >= generic_rank {
        Verdict::Jump
    } else {
        Verdict::Violation
    };
    let point = PointAssignment::stratum_point(&model.universe(), &stratum, PrimeSequence::Primary);
    Ok(BaseChangeReport { r1_fiber: r1.fiber_dim(&point), stratum, module_fiber, generic_rank, h0, h1, chi, verdict })
}

/// Compare the module fiber with fiberwise cohomology at a point.
pub fn base_change_check(config: &FamilyConfig, point: &PointAssignment, degree_bound: u32) -> Result<BaseChangeReport, FamilyError> {
    let model = pushforward(config);
    check_point(&model.universe(), point)?;
    let stratum: BTreeSet<String> =
        model.universe().into_iter().filter(|p| point.value(p).is_some_and(|v| v.is_zero())).collect();
    let kernel_dim = kernel_fiber_dim(&model, point, degree_bound)?;
    let generic = generic_fiber_rank(&model, degree_bound)?;
    compare(&model, stratum, kernel_dim, generic, &r1_model(config))
}

/// Every subset of the base parameters, smallest first.
pub fn strata(universe: &[String]) -> Vec<BTreeSet<String>> {
    let n = universe.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
    masks
        .into_iter()
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| universe[i].clone()).collect())
        .collect()
}

/// Kernel fiber dimensions on every stratum and at a generic point. They
/// depend only on β, so one table serves every multiplicity vector with all
/// `m_i ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTable {
    pub by_stratum: BTreeMap<BTreeSet<String>, usize>,
    pub generic: usize,
}

pub fn kernel_table(config: &FamilyConfig, degree_bound: u32) -> Result<KernelTable, FamilyError> {
    let model = pushforward(config);
    let u = model.universe();
    let by_stratum = strata(&u)
        .into_iter()
        .map(|s| {
            let p = PointAssignment::stratum_point(&u, &s, PrimeSequence::Primary);
            Ok((s, kernel_fiber_dim(&model, &p, degree_bound)?))
        })
        .collect::<Result<_, FamilyError>>()?;
    let generic = generic_fiber_rank(&model, degree_bound)? - model.v_m0.len();
    Ok(KernelTable { by_stratum, generic })
}

/// Base-change reports over the full stratum lattice.
pub fn stratum_sweep(config: &FamilyConfig, degree_bound: u32) -> Result<Vec<BaseChangeReport>, FamilyError> {
    sweep_with_table(config, &kernel_table(config, degree_bound)?)
}

pub fn sweep_with_table(config: &FamilyConfig, table: &KernelTable) -> Result<Vec<BaseChangeReport>, FamilyError> {
    let model = pushforward(config);
    let generic = model.v_m0.len() + table.generic;
    let r1 = r1_model(config);
    strata(&model.universe())
        .into_iter()
        .map(|s| {
            let k = table.by_stratum[&s];
            compare(&model, s, k, generic, &r1)
        })
        .collect()
}

/// One inductive step `π_*O(m'S + D) → π_*O((m' + e_j)S + D) → O(−(m'_j+1)N_j)`
/// and the Ext¹ obstruction to its splitting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingStep {
    pub from: Vec<i64>,
    pub tail: usize,
    pub quotient: MultiDegree,
    pub subs: Vec<MultiDegree>,
    pub obstruction: usize,
}

/// All steps from `m' = 0` up to the configuration's multiplicities, on the
/// multiprojective base.
pub fn splitting_steps(config: &FamilyConfig) -> Result<Vec<SplittingStep>, FamilyError> {
    if config.mode != BaseMode::Multiprojective {
        return Err(FamilyError::NotMultiprojective);
    }
    let u = config.universe();
    let bounds = config.multiplicities();
    let mut out = Vec::new();
    let mut m = vec![0i64; bounds.len()];
    loop {
        let here = config.with_m(&m)?;
        let subs = twists_with_d(&here).iter().map(|t| t.multidegree(&u)).collect::<Result<Vec<_>, _>>()?;
        for j in 0..m.len() {
            if m[j] < bounds[j] {
                let quotient = normal_bundle_of_section(config, j).scale(m[j] + 1).multidegree(&u)?;
                let obstruction = splitting_obstruction(&quotient, &subs)?;
                out.push(SplittingStep { from: m.clone(), tail: j, quotient, subs: subs.clone(), obstruction });
            }
        }
        // next multiplicity vector below the bounds
        let mut i = 0;
        while i < m.len() {
            m[i] += 1;
            if m[i] <= bounds[i] {
                break;
            }
            m[i] = 0;
            i += 1;
        }
        if i == m.len() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn oabc(mb: i64, mc: i64) -> FamilyConfig {
        FamilyConfig::new(
            vec![TailSpec::new("t_b", mb).with_chain(&["t_a"]), TailSpec::new("t_c", mc).with_chain(&["t_a"])],
            BaseMode::Local,
            Direction::Independent,
        )
        .unwrap()
    }

    fn degrees(ts: &[Twist], u: &[String]) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = ts.iter().map(|t| t.multidegree(u).unwrap().degrees().to_vec()).collect();
        v.sort();
        v
    }

    #[test]
    fn beta_rows() {
        assert_eq!(beta_map(&FamilyConfig::plain(&[2], BaseMode::Local)).to_string(), "(t1)");
        assert_eq!(beta_map(&FamilyConfig::plain(&[1, 1, 1], BaseMode::Local)).to_string(), "(t1, t2, t3)");
        assert_eq!(beta_map(&oabc(1, 1)).to_string(), "(t_a*t_b, t_a*t_c)");
    }

    #[test]
    fn one_tail_model() {
        for m in 1..=6 {
            let c = FamilyConfig::plain(&[m], BaseMode::Multiprojective);
            let model = pushforward(&c);
            let u = c.universe();
            let mut expected: Vec<Vec<i64>> = std::iter::once(0).chain(2..=m).map(|k| vec![-k]).collect();
            expected.sort();
            assert_eq!(degrees(&model.v_m0, &u), expected);
            assert_eq!(degrees(&model.v1, &u), vec![vec![-1]]);
            assert!(model.kernel_generators.is_empty());
            assert_eq!(pushforward_with_d(&c).len() as i64, m + 1);
        }
    }

    #[test]
    fn with_d_examples() {
        let c = FamilyConfig::plain(&[2], BaseMode::Multiprojective);
        assert_eq!(degrees(&pushforward_with_d(&c), &c.universe()), vec![vec![-2], vec![-1], vec![0]]);
        let c = FamilyConfig::plain(&[1, 1], BaseMode::Multiprojective);
        assert_eq!(degrees(&pushforward_with_d(&c), &c.universe()), vec![vec![-1, 0], vec![0, -1], vec![0, 0]]);
        let names: Vec<String> = pushforward_with_d(&oabc(1, 1)).iter().map(Twist::to_string).collect();
        assert_eq!(names, vec!["O", "O(-V_t_a-V_t_b)", "O(-V_t_a-V_t_c)"]);
    }

    #[test]
    fn normal_bundles() {
        let c = FamilyConfig::plain(&[1, 1, 1], BaseMode::Multiprojective);
        let n = normal_bundle_of_section(&c, 1);
        assert_eq!(n.multidegree(&c.universe()).unwrap().degrees(), &[0, -1, 0]);
        assert_eq!(normal_bundle_of_section(&oabc(1, 1), 0).to_string(), "O(-V_t_a-V_t_b)");
        let local = FamilyConfig::plain(&[2], BaseMode::Local);
        assert_eq!(normal_bundle_of_section(&local, 0).principal_monomial(), Some(Monomial::var("t1")));
    }

    #[test]
    fn generic_and_origin_ranks() {
        let c = FamilyConfig::plain(&[1, 1, 1], BaseMode::Local);
        let model = pushforward(&c);
        assert_eq!(generic_fiber_rank(&model, 6).unwrap(), 3);
        assert_eq!(fiber_rank(&model, &PointAssignment::origin(&c.universe()), 6).unwrap(), 4);
        let c = FamilyConfig::plain(&[1, 1], BaseMode::Local);
        let model = pushforward(&c);
        assert_eq!(fiber_rank(&model, &PointAssignment::origin(&c.universe()), 6).unwrap(), 2);
        assert_eq!(model.kernel_generators.len(), 1);
    }

    #[test]
    fn kernel_generators_annihilate_beta() {
        for c in [oabc(1, 2), FamilyConfig::plain(&[1, 2, 3, 1], BaseMode::Local)] {
            let model = pushforward(&c);
            let row = model.beta.as_polynomials();
            for g in &model.kernel_generators {
                assert!(crate::exactalg::syzygy::apply_row(&row, g).is_zero());
            }
        }
    }

    #[test]
    fn zero_multiplicity_tails_are_dropped() {
        let with = pushforward(&FamilyConfig::plain(&[2, 0, 1], BaseMode::Local));
        let without = pushforward(
            &FamilyConfig::new(vec![TailSpec::new("t1", 2), TailSpec::new("t3", 1)], BaseMode::Local, Direction::Independent).unwrap(),
        );
        assert_eq!(with.dropped, vec!["t2".to_string()]);
        assert_eq!((with.v_m0, with.v1, with.beta), (without.v_m0, without.v1, without.beta));
        assert!(matches!(
            FamilyConfig::plain(&[1], BaseMode::Local).with_m(&[-1]),
            Err(FamilyError::NegativeMultiplicity { .. })
        ));
    }

    #[test]
    fn r1_supports() {
        assert_eq!(r1_model(&FamilyConfig::plain(&[3], BaseMode::Local)).support, vec![set(&["t1"])]);
        let r3 = r1_model(&FamilyConfig::plain(&[1, 1, 1], BaseMode::Multiprojective));
        assert_eq!(r3.support, vec![set(&["t1", "t2", "t3"])]);
        assert_eq!(r3.tail_locus, set(&["t1", "t2", "t3"]));
        let chained = r1_model(&oabc(1, 1));
        assert_eq!(chained.support, vec![set(&["t_a"]), set(&["t_b", "t_c"])]);
        assert_eq!(chained.tail_locus, set(&["t_b", "t_c"]));
    }

    #[test]
    fn one_tail_base_change() {
        for m in 1..=4 {
            let c = FamilyConfig::plain(&[m], BaseMode::Local);
            let u = c.universe();
            let generic = base_change_check(&c, &PointAssignment::generic(&u, PrimeSequence::Primary), 6).unwrap();
            assert_eq!((generic.module_fiber, generic.h0, generic.h1, generic.verdict), (m as usize, m as usize, 0, Verdict::Equal));
            let at_p = base_change_check(&c, &PointAssignment::origin(&u), 6).unwrap();
            assert_eq!((at_p.module_fiber, at_p.h0, at_p.h1, at_p.verdict), (m as usize, m as usize + 1, 1, Verdict::Jump));
        }
        let c = FamilyConfig::plain(&[1, 1], BaseMode::Local);
        let rep = base_change_check(&c, &PointAssignment::origin(&c.universe()), 6).unwrap();
        assert_eq!((rep.module_fiber, rep.h0, rep.h1), (2, 3, 1));
    }

    #[test]
    fn oabc_sweep() {
        let c = oabc(1, 1);
        let reports = stratum_sweep(&c, 6).unwrap();
        assert_eq!(reports.len(), 8);
        for rep in &reports {
            assert!(rep.consistent(2), "{rep:?}");
        }
        // ghost a alone forces a trivial core
        let a_only = reports.iter().find(|r| r.stratum == set(&["t_a"])).unwrap();
        assert_eq!((a_only.h1, a_only.verdict), (1, Verdict::Jump));
    }

    #[test]
    fn single_direction() {
        let c = FamilyConfig::new(
            vec![TailSpec::new("a", 1), TailSpec::new("b", 2), TailSpec::new("c", 1)],
            BaseMode::Local,
            Direction::Single,
        )
        .unwrap();
        assert_eq!(c.universe(), vec!["t".to_string()]);
        assert_eq!(beta_map(&c).to_string(), "(t, t, t)");
        for rep in stratum_sweep(&c, 6).unwrap() {
            assert!(rep.consistent(4));
            // ker β is free here, so the module never jumps
            assert_eq!(rep.module_fiber, 4);
        }
        assert!(matches!(
            FamilyConfig::new(vec![TailSpec::new("a", 1).with_chain(&["g"])], BaseMode::Local, Direction::Single),
            Err(FamilyError::ChainInSingleDirection)
        ));
    }

    #[test]
    fn invalid_chains() {
        let bad = FamilyConfig::new(
            vec![TailSpec::new("t1", 1).with_chain(&["a", "b"]), TailSpec::new("t2", 1).with_chain(&["b"])],
            BaseMode::Local,
            Direction::Independent,
        );
        assert!(matches!(bad, Err(FamilyError::InconsistentChain(_))));
        let clash = FamilyConfig::new(
            vec![TailSpec::new("t1", 1), TailSpec::new("t2", 1).with_chain(&["t1"])],
            BaseMode::Local,
            Direction::Independent,
        );
        assert!(matches!(clash, Err(FamilyError::ParameterClash(_))));
    }

    #[test]
    fn splitting_steps_single_slot_and_mixed() {
        let one = FamilyConfig::plain(&[3], BaseMode::Multiprojective);
        let steps = splitting_steps(&one).unwrap();
        assert_eq!(steps.len(), 3);
        assert!(steps.iter().all(|s| s.obstruction == 0));
        // two tails with m = (1,1): every step splits
        let steps = splitting_steps(&FamilyConfig::plain(&[1, 1], BaseMode::Multiprojective)).unwrap();
        assert!(steps.iter().all(|s| s.obstruction == 0));
        // from (2,0) adding S_2: Ext¹(O(0,-1), O(-2,0)) = h¹(O(-2,1)) = 2
        let steps = splitting_steps(&FamilyConfig::plain(&[2, 1], BaseMode::Multiprojective)).unwrap();
        let s = steps.iter().find(|s| s.from == vec![2, 0] && s.tail == 1).unwrap();
        assert_eq!(s.obstruction, 2);
        assert!(matches!(splitting_steps(&FamilyConfig::plain(&[1], BaseMode::Local)), Err(FamilyError::NotMultiprojective)));
    }
}
