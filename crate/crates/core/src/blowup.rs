//! Blowing up the base along coordinate subspaces, and deciding when the
//! pulled-back kernel of β becomes locally free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::exactalg::fiber::syzygy_fiber_dim;
use crate::exactalg::{AlgError, Monomial, PointAssignment, PrimeSequence};
use crate::family::{beta_map, FamilyConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlowupError {
    #[error("blowup center is empty")]
    EmptyCenter,
    #[error("`{0}` appears twice in the center")]
    RepeatedCenter(String),
    #[error("center parameter `{0}` is not a base parameter")]
    UnknownCenter(String),
    #[error("the row is empty")]
    EmptyRow,
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// The blowup along `{t_c1 = ... = t_ck = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupSpec {
    pub center: Vec<String>,
}

impl BlowupSpec {
    pub fn new<S: AsRef<str>>(center: &[S]) -> Result<Self, BlowupError> {
        let center: Vec<String> = center.iter().map(|s| s.as_ref().to_string()).collect();
        if center.is_empty() {
            return Err(BlowupError::EmptyCenter);
        }
        let mut seen = BTreeSet::new();
        for c in &center {
            if !seen.insert(c) {
                return Err(BlowupError::RepeatedCenter(c.clone()));
            }
        }
        Ok(BlowupSpec { center })
    }
}

/// Name of the chart coordinate replacing `name`: `t…` becomes `s…`,
/// anything else gets a prime.
pub fn chart_name(name: &str) -> String {
    match name.strip_prefix('t') {
        Some(rest) => format!("s{rest}"),
        None => format!("{name}'"),
    }
}

/// The standard affine chart where `t_ℓ` generates the center ideal:
/// `t_ℓ ↦ s_ℓ`, `t_j ↦ s_ℓ s_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub index: String,
    pub substitution: BTreeMap<String, Monomial>,
    /// Old coordinate name → new coordinate name, for center parameters.
    pub renames: BTreeMap<String, String>,
    /// The coordinate cutting out the exceptional divisor, if any.
    pub exceptional: Option<String>,
}

impl Chart {
    pub fn pullback(&self, m: &Monomial) -> Monomial {
        m.substitute(&self.substitution)
    }
}

/// One chart per center parameter. A one-parameter center is a Cartier
/// divisor already, so its single chart is the identity.
pub fn charts(spec: &BlowupSpec) -> Vec<Chart> {
    if spec.center.len() == 1 {
        return vec![Chart {
            index: spec.center[0].clone(),
            substitution: BTreeMap::new(),
            renames: BTreeMap::new(),
            exceptional: None,
        }];
    }
    let renames: BTreeMap<String, String> = spec.center.iter().map(|c| (c.clone(), chart_name(c))).collect();
    spec.center
        .iter()
        .map(|l| {
            let sl = Monomial::var(&renames[l]);
            let substitution = spec
                .center
                .iter()
                .map(|c| {
                    let image = if c == l { sl.clone() } else { sl.mul(&Monomial::var(&renames[c])) };
                    (c.clone(), image)
                })
                .collect();
            Chart { index: l.clone(), substitution, renames: renames.clone(), exceptional: Some(renames[l].clone()) }
        })
        .collect()
}

pub fn pullback_beta(row: &[Monomial], chart: &Chart) -> Vec<Monomial> {
    row.iter().map(|m| chart.pullback(m)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Freeness {
    Free(usize),
    NotFree { origin: usize, generic: usize },
}

impl Freeness {
    pub fn is_free(&self) -> bool {
        matches!(self, Freeness::Free(_))
    }
}

impl fmt::Display for Freeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Freeness::Free(r) => write!(f, "FREE({r})"),
            Freeness::NotFree { origin, generic } => write!(f, "NOT_FREE({origin},{generic})"),
        }
    }
}

fn row_gcd(row: &[Monomial]) -> Monomial {
    row.iter().skip(1).fold(row[0].clone(), |g, m| g.gcd(m))
}

fn reduced_row(row: &[Monomial]) -> Vec<Monomial> {
    let g = row_gcd(row);
    row.iter().map(|m| g.quotient_of(m).expect("gcd divides")).collect()
}

fn row_variables(row: &[Monomial]) -> Vec<String> {
    let set: BTreeSet<String> = row.iter().flat_map(|m| m.variables().map(str::to_string)).collect();
    set.into_iter().collect()
}

fn generic_kernel_dim(row: &[Monomial], degree_bound: u32) -> Result<usize, BlowupError> {
    let vars = row_variables(row);
    let a = syzygy_fiber_dim(row, &PointAssignment::generic(&vars, PrimeSequence::Primary), degree_bound)?.trusted()?;
    let b = syzygy_fiber_dim(row, &PointAssignment::generic(&vars, PrimeSequence::Secondary), degree_bound)?.trusted()?;
    if a != b {
        return Err(AlgError::PrimeDisagreement { primary: a, secondary: b }.into());
    }
    Ok(a)
}

/// Whether the syzygy module of a monomial row is locally free near the
/// origin. The row is first divided by the gcd of its entries, which does
/// not change the kernel.
pub fn kernel_local_freeness(row: &[Monomial], degree_bound: u32) -> Result<Freeness, BlowupError> {
    if row.is_empty() {
        return Err(BlowupError::EmptyRow);
    }
    let reduced = reduced_row(row);
    if reduced.iter().any(Monomial::is_one) {
        // a unit entry: the kernel is the graph of the other entries
        return Ok(Freeness::Free(row.len() - 1));
    }
    let vars = row_variables(&reduced);
    let origin = syzygy_fiber_dim(&reduced, &PointAssignment::origin(&vars), degree_bound)?.trusted()?;
    let generic = generic_kernel_dim(&reduced, degree_bound)?;
    Ok(if origin == generic { Freeness::Free(generic) } else { Freeness::NotFree { origin, generic } })
}

/// The same question answered by the maximal fiber dimension over every
/// coordinate stratum instead of the origin alone.
pub fn kernel_local_freeness_by_strata(row: &[Monomial], degree_bound: u32) -> Result<Freeness, BlowupError> {
    if row.is_empty() {
        return Err(BlowupError::EmptyRow);
    }
    let reduced = reduced_row(row);
    let vars = row_variables(&reduced);
    let generic = generic_kernel_dim(&reduced, degree_bound)?;
    let mut worst = generic;
    for stratum in crate::family::strata(&vars) {
        let p = PointAssignment::stratum_point(&vars, &stratum, PrimeSequence::Primary);
        worst = worst.max(syzygy_fiber_dim(&reduced, &p, degree_bound)?.trusted()?);
    }
    Ok(if worst == generic { Freeness::Free(generic) } else { Freeness::NotFree { origin: worst, generic } })
}

/// A leaf of the chart tree after a sequence of blowups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafChart {
    /// Chart index chosen at each blowup.
    pub path: Vec<String>,
    /// Each original parameter as a monomial in the leaf's coordinates.
    pub substitution: BTreeMap<String, Monomial>,
    pub row: Vec<Monomial>,
    pub verdict: Freeness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolveReport {
    pub leaves: Vec<LeafChart>,
}

impl ResolveReport {
    pub fn resolved(&self) -> bool {
        self.leaves.iter().all(|l| l.verdict.is_free())
    }
}

struct Branch {
    path: Vec<String>,
    /// Original parameter → its current coordinate name.
    names: BTreeMap<String, String>,
    substitution: BTreeMap<String, Monomial>,
}

/// Apply the blowups in order, following every chart, and test the pulled
/// back kernel on each leaf. Centers name original parameters; in later
/// blowups they refer to those parameters' current chart coordinates.
pub fn resolve_check(config: &FamilyConfig, specs: &[BlowupSpec], degree_bound: u32) -> Result<ResolveReport, BlowupError> {
    let universe = config.normalized().0.universe();
    let beta = beta_map(&config.normalized().0);
    let mut branches = vec![Branch {
        path: Vec::new(),
        names: universe.iter().map(|p| (p.clone(), p.clone())).collect(),
        substitution: universe.iter().map(|p| (p.clone(), Monomial::var(p))).collect(),
    }];
    for spec in specs {
        let mut next = Vec::new();
        for b in &branches {
            let center = spec
                .center
                .iter()
                .map(|c| b.names.get(c).cloned().ok_or_else(|| BlowupError::UnknownCenter(c.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let taken: BTreeSet<&String> = b.names.values().collect();
            for mut chart in charts(&BlowupSpec::new(&center)?) {
                avoid_collisions(&mut chart, &taken);
                let mut names = b.names.clone();
                for v in names.values_mut() {
                    if let Some(n) = chart.renames.get(v) {
                        *v = n.clone();
                    }
                }
                let substitution =
                    b.substitution.iter().map(|(k, m)| (k.clone(), chart.pullback(m))).collect();
                let orig_index = b.names.iter().find(|(_, v)| **v == chart.index).map(|(k, _)| k.clone()).unwrap();
                let mut path = b.path.clone();
                path.push(orig_index);
                next.push(Branch { path, names, substitution });
            }
        }
        branches = next;
    }
    let leaves = branches
        .into_iter()
        .map(|b| {
            let row: Vec<Monomial> = beta.entries.iter().map(|m| m.substitute(&b.substitution)).collect();
            let verdict = kernel_local_freeness(&row, degree_bound)?;
            Ok(LeafChart { path: b.path, substitution: b.substitution, row, verdict })
        })
        .collect::<Result<Vec<_>, BlowupError>>()?;
    Ok(ResolveReport { leaves })
}

/// Rename new chart coordinates that would clash with coordinates already
/// in use (other than the ones being replaced).
fn avoid_collisions(chart: &mut Chart, taken: &BTreeSet<&String>) {
    let replaced: BTreeSet<&String> = chart.renames.keys().collect();
    let mut fixes = BTreeMap::new();
    for new in chart.renames.values() {
        let mut n = new.clone();
        while taken.contains(&n) && !replaced.contains(&n) {
            n.push('\'');
        }
        if &n != new {
            fixes.insert(new.clone(), n);
        }
    }
    if fixes.is_empty() {
        return;
    }
    let swap: BTreeMap<String, Monomial> = fixes.iter().map(|(a, b)| (a.clone(), Monomial::var(b))).collect();
    for m in chart.substitution.values_mut() {
        *m = m.substitute(&swap);
    }
    for v in chart.renames.values_mut() {
        if let Some(n) = fixes.get(v) {
            *v = n.clone();
        }
    }
    if let Some(e) = chart.exceptional.as_mut() {
        if let Some(n) = fixes.get(e) {
            *e = n.clone();
        }
    }
}
