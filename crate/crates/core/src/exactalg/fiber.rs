//! Points of the base and fiber dimensions `dim_k M ⊗ k(x)` of submodules of
//! free modules.

use std::collections::{BTreeMap, BTreeSet};

use super::linalg::{sparse_rank, SparseRow};
use super::syzygy::{exponents_up_to_degree, monomial_syzygies};
use super::{AlgError, Monomial, Polynomial, Scalar};

/// Default degree bound for truncated computations.
pub const DEFAULT_DEGREE_BOUND: u32 = 6;

/// Which deterministic prime sequence supplies the coordinates of a generic
/// point. The two sequences are disjoint so a rank claim can be checked twice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeSequence {
    /// 2, 3, 5, 7, ...
    Primary,
    /// the next block of primes, starting at 11 for four parameters
    Secondary,
}

pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

impl PrimeSequence {
    /// `n` values, one per parameter. Secondary values never collide with
    /// primary ones for the same `n`.
    pub fn values(self, n: usize) -> Vec<u64> {
        let n_eff = n.max(4);
        let primes = first_primes(2 * n_eff);
        match self {
            PrimeSequence::Primary => primes[..n].to_vec(),
            PrimeSequence::Secondary => primes[n_eff..n_eff + n].to_vec(),
        }
    }
}

/// A point of the base: every parameter in the stratum is zero, every other
/// parameter is a nonzero scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointAssignment {
    values: BTreeMap<String, Scalar>,
    stratum: BTreeSet<String>,
}

impl PointAssignment {
    pub fn new(values: BTreeMap<String, Scalar>) -> Self {
        let stratum = values
            .iter()
            .filter(|(_, v)| v.is_zero())
            .map(|(k, _)| k.clone())
            .collect();
        PointAssignment { values, stratum }
    }

    pub fn origin<S: AsRef<str>>(universe: &[S]) -> Self {
        let stratum: BTreeSet<String> = universe.iter().map(|s| s.as_ref().to_string()).collect();
        PointAssignment::stratum_point(universe, &stratum, PrimeSequence::Primary)
    }

    pub fn generic<S: AsRef<str>>(universe: &[S], seq: PrimeSequence) -> Self {
        PointAssignment::stratum_point(universe, &BTreeSet::new(), seq)
    }

    /// Zero on `stratum`, deterministic primes elsewhere (in universe order).
    pub fn stratum_point<S: AsRef<str>>(universe: &[S], stratum: &BTreeSet<String>, seq: PrimeSequence) -> Self {
        let free: Vec<&str> = universe
            .iter()
            .map(|s| s.as_ref())
            .filter(|s| !stratum.contains(*s))
            .collect();
        let primes = seq.values(free.len());
        let mut values: BTreeMap<String, Scalar> = universe
            .iter()
            .map(|s| (s.as_ref().to_string(), Scalar::zero()))
            .collect();
        for (name, p) in free.iter().zip(primes) {
            values.insert(name.to_string(), Scalar::from_int(p as i64));
        }
        PointAssignment::new(values)
    }

    pub fn values(&self) -> &BTreeMap<String, Scalar> {
        &self.values
    }

    pub fn value(&self, name: &str) -> Option<&Scalar> {
        self.values.get(name)
    }

    pub fn stratum(&self) -> &BTreeSet<String> {
        &self.stratum
    }

    pub fn parameters(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn is_origin(&self) -> bool {
        self.values.values().all(Scalar::is_zero)
    }
}

/// A fiber dimension together with whether it was stable between the
/// degree bounds `bound - 1` and `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberDim {
    pub dim: usize,
    pub stabilized: bool,
    pub bound: u32,
}

impl FiberDim {
    /// The value, or an error if it had not stabilized.
    pub fn trusted(self) -> Result<usize, AlgError> {
        if self.stabilized {
            Ok(self.dim)
        } else {
            Err(AlgError::NotStabilized { bound: self.bound })
        }
    }
}

fn check_shape(generators: &[Vec<Polynomial>]) -> Result<usize, AlgError> {
    let len = generators.first().map_or(0, Vec::len);
    if generators.iter().any(|g| g.len() != len) {
        return Err(AlgError::ShapeMismatch);
    }
    Ok(len)
}

/// Number of minimal generators at `point` of the submodule spanned by
/// `generators`, i.e. `dim_k M/𝔪M`. Computed as
/// `rank(span{x^β g}) − rank(span{x^β g : |β| ≥ 1})` with `|β| ≤ degree_bound`
/// in coordinates centred at the point, and compared against the same
/// quantity at `degree_bound − 1`.
pub fn fiber_dim_of_submodule(
    generators: &[Vec<Polynomial>],
    point: &PointAssignment,
    degree_bound: u32,
) -> Result<FiberDim, AlgError> {
    check_shape(generators)?;
    let gens: Vec<Vec<Polynomial>> = generators
        .iter()
        .filter(|g| g.iter().any(|p| !p.is_zero()))
        .cloned()
        .collect();
    let vars = generator_variables(&gens);
    for v in &vars {
        if point.value(v).is_none() {
            return Err(AlgError::MissingValue(v.clone()));
        }
    }
    let at_origin = vars.iter().all(|v| point.value(v).unwrap().is_zero());
    if at_origin {
        if let Some(grading) = MultiGrading::infer(&gens, &vars) {
            let hi = grading.origin_fiber_dim(&gens, &vars, degree_bound);
            let lo = grading.origin_fiber_dim(&gens, &vars, degree_bound.saturating_sub(1));
            return Ok(FiberDim { dim: hi, stabilized: hi == lo, bound: degree_bound });
        }
    }
    fiber_dim_by_translation(&gens, point, degree_bound)
}

/// The general route: translate the point to the origin and compare the
/// truncated spans of `M` and `𝔪M` directly.
pub fn fiber_dim_by_translation(
    generators: &[Vec<Polynomial>],
    point: &PointAssignment,
    degree_bound: u32,
) -> Result<FiberDim, AlgError> {
    check_shape(generators)?;
    let vars = generator_variables(generators);
    let mut shift = BTreeMap::new();
    for v in &vars {
        let c = point.value(v).ok_or_else(|| AlgError::MissingValue(v.clone()))?;
        shift.insert(v.clone(), &Polynomial::var(v) + &Polynomial::constant(c.clone()));
    }
    let translated: Vec<Vec<Polynomial>> = generators
        .iter()
        .map(|g| g.iter().map(|p| p.substitute(&shift)).collect())
        .collect();
    let hi = truncated_quotient_dim(&translated, &vars, degree_bound);
    let lo = truncated_quotient_dim(&translated, &vars, degree_bound.saturating_sub(1));
    Ok(FiberDim { dim: hi, stabilized: hi == lo, bound: degree_bound })
}

fn truncated_quotient_dim(gens: &[Vec<Polynomial>], vars: &[String], bound: u32) -> usize {
    let mut coords: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    let mut all_rows: Vec<SparseRow> = Vec::new();
    let mut max_ideal_rows: Vec<SparseRow> = Vec::new();
    for g in gens {
        for beta in exponents_up_to_degree(vars.len(), bound) {
            let shift = Monomial::from_exponent_vector(vars, &beta);
            let mut entries: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, p) in g.iter().enumerate() {
                for (m, c) in p.terms() {
                    let next = coords.len();
                    let idx = *coords.entry((k, m.mul(&shift))).or_insert(next);
                    let e = entries.entry(idx).or_insert_with(Scalar::zero);
                    *e = &*e + c;
                }
            }
            let row: SparseRow = entries.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if !shift.is_one() {
                max_ideal_rows.push(row.clone());
            }
            all_rows.push(row);
        }
    }
    sparse_rank(&all_rows) - sparse_rank(&max_ideal_rows)
}

fn generator_variables(gens: &[Vec<Polynomial>]) -> Vec<String> {
    let set: BTreeSet<String> = gens.iter().flatten().flat_map(Polynomial::variables).collect();
    set.into_iter().collect()
}

/// A ℤⁿ-grading under which every generator is homogeneous: entry `k` of
/// generator `j` is a single term of exponent `gen_deg[j] − comp_shift[k]`.
struct MultiGrading {
    gen_deg: Vec<Vec<i64>>,
    comp_shift: Vec<Vec<i64>>,
}

impl MultiGrading {
    fn infer(gens: &[Vec<Polynomial>], vars: &[String]) -> Option<MultiGrading> {
        let n = vars.len();
        let r = gens.first().map_or(0, Vec::len);
        let mut exps: Vec<Vec<Option<Vec<i64>>>> = Vec::new();
        for g in gens {
            let mut row = Vec::new();
            for p in g {
                if p.is_zero() {
                    row.push(None);
                } else {
                    let (m, _) = p.as_term()?;
                    row.push(Some(m.exponent_vector(vars).into_iter().map(i64::from).collect()));
                }
            }
            exps.push(row);
        }
        let mut gen_deg: Vec<Option<Vec<i64>>> = vec![None; gens.len()];
        let mut comp_shift: Vec<Option<Vec<i64>>> = vec![None; r];
        // propagate over the bipartite incidence graph, one part at a time
        for start in 0..gens.len() {
            if gen_deg[start].is_some() {
                continue;
            }
            gen_deg[start] = Some(vec![0; n]);
            let mut changed = true;
            while changed {
                changed = false;
                for j in 0..gens.len() {
                    for k in 0..r {
                        let Some(e) = &exps[j][k] else { continue };
                        match (&gen_deg[j], &comp_shift[k]) {
                            (Some(d), None) => {
                                comp_shift[k] = Some(d.iter().zip(e).map(|(a, b)| a - b).collect());
                                changed = true;
                            }
                            (None, Some(w)) => {
                                gen_deg[j] = Some(w.iter().zip(e).map(|(a, b)| a + b).collect());
                                changed = true;
                            }
                            (Some(d), Some(w)) => {
                                if d.iter().zip(w).zip(e).any(|((a, b), c)| a - b != *c) {
                                    return None;
                                }
                            }
                            (None, None) => {}
                        }
                    }
                }
            }
        }
        Some(MultiGrading {
            gen_deg: gen_deg.into_iter().map(|d| d.unwrap()).collect(),
            comp_shift: comp_shift.into_iter().map(|w| w.unwrap_or_else(|| vec![0; n])).collect(),
        })
    }

    /// At the origin only blocks whose multidegree is a generator degree can
    /// contribute a constant-multiplier generator, so the truncated spans
    /// split into small blocks `δ ∈ {gen_deg}`.
    fn origin_fiber_dim(&self, gens: &[Vec<Polynomial>], vars: &[String], bound: u32) -> usize {
        let blocks: BTreeSet<&Vec<i64>> = self.gen_deg.iter().collect();
        let mut total = 0;
        for delta in blocks {
            let mut all_rows: Vec<SparseRow> = Vec::new();
            let mut max_ideal_rows: Vec<SparseRow> = Vec::new();
            for (j, g) in gens.iter().enumerate() {
                let diff: Vec<i64> = delta.iter().zip(&self.gen_deg[j]).map(|(a, b)| a - b).collect();
                if diff.iter().any(|&x| x < 0) || diff.iter().sum::<i64>() > bound as i64 {
                    continue;
                }
                // every multiple in this block sits at monomial δ − shift_k in
                // component k; keep only the coefficients
                let row: SparseRow = g
                    .iter()
                    .enumerate()
                    .filter_map(|(k, p)| p.as_term().map(|(_, c)| (k, c.clone())))
                    .collect();
                debug_assert!(self.comp_shift.len() == g.len() && vars.len() == delta.len());
                if diff.iter().any(|&x| x != 0) {
                    max_ideal_rows.push(row.clone());
                }
                all_rows.push(row);
            }
            total += sparse_rank(&all_rows) - sparse_rank(&max_ideal_rows);
        }
        total
    }
}

/// Fiber dimension at `point` of the syzygy module of a monomial row.
///
/// Near the point every parameter that does not vanish there is a unit, so
/// the kernel is isomorphic to the kernel of the row with those parameters
/// set to 1; the remaining computation happens at the origin of the
/// vanishing parameters.
pub fn syzygy_fiber_dim(row: &[Monomial], point: &PointAssignment, degree_bound: u32) -> Result<FiberDim, AlgError> {
    let mut reduced = Vec::with_capacity(row.len());
    let mut vanishing = BTreeSet::new();
    for m in row {
        let mut kept = Vec::new();
        for (name, e) in m.exponents() {
            let v = point.value(name).ok_or_else(|| AlgError::MissingValue(name.to_string()))?;
            if v.is_zero() {
                kept.push((name, e));
                vanishing.insert(name.to_string());
            }
        }
        reduced.push(Monomial::from_pairs(kept));
    }
    let origin = PointAssignment::origin(&vanishing.into_iter().collect::<Vec<_>>());
    fiber_dim_of_submodule(&monomial_syzygies(&reduced), &origin, degree_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    fn row(n: &[&str]) -> Vec<Monomial> {
        n.iter().map(|s| Monomial::var(s)).collect()
    }

    #[test]
    fn primes_are_disjoint() {
        assert_eq!(PrimeSequence::Primary.values(4), vec![2, 3, 5, 7]);
        assert_eq!(PrimeSequence::Secondary.values(4), vec![11, 13, 17, 19]);
        let p = PrimeSequence::Primary.values(9);
        let s = PrimeSequence::Secondary.values(9);
        assert!(p.iter().all(|x| !s.contains(x)));
    }

    #[test]
    fn stratum_point_invariant() {
        let u = names(&["t1", "t2", "t3"]);
        let stratum: BTreeSet<String> = ["t2".to_string()].into_iter().collect();
        let p = PointAssignment::stratum_point(&u, &stratum, PrimeSequence::Primary);
        assert!(p.value("t2").unwrap().is_zero());
        assert_eq!(p.value("t1"), Some(&Scalar::from_int(2)));
        assert_eq!(p.value("t3"), Some(&Scalar::from_int(3)));
        assert_eq!(p.stratum(), &stratum);
    }

    #[test]
    fn single_koszul_generator_at_origin() {
        let g = monomial_syzygies(&row(&["t1", "t2"]));
        let o = PointAssignment::origin(&names(&["t1", "t2"]));
        let fd = fiber_dim_of_submodule(&g, &o, 6).unwrap();
        assert_eq!(fd, FiberDim { dim: 1, stabilized: true, bound: 6 });
    }

    #[test]
    fn koszul_three_origin_and_generic() {
        let u = names(&["t1", "t2", "t3"]);
        let g = monomial_syzygies(&row(&["t1", "t2", "t3"]));
        assert_eq!(fiber_dim_of_submodule(&g, &PointAssignment::origin(&u), 6).unwrap().trusted().unwrap(), 3);
        let generic = PointAssignment::generic(&u, PrimeSequence::Primary);
        assert_eq!(fiber_dim_of_submodule(&g, &generic, 4).unwrap().trusted().unwrap(), 2);
    }

    #[test]
    fn koszul_pair_everywhere() {
        let u = names(&["t1", "t2"]);
        let g = monomial_syzygies(&row(&["t1", "t2"]));
        for stratum in [vec![], vec!["t1"], vec!["t2"], vec!["t1", "t2"]] {
            let s: BTreeSet<String> = stratum.iter().map(|x| x.to_string()).collect();
            for seq in [PrimeSequence::Primary, PrimeSequence::Secondary] {
                let p = PointAssignment::stratum_point(&u, &s, seq);
                assert_eq!(fiber_dim_by_translation(&g, &p, 4).unwrap().trusted().unwrap(), 1);
                assert_eq!(syzygy_fiber_dim(&row(&["t1", "t2"]), &p, 4).unwrap().trusted().unwrap(), 1);
            }
        }
    }

    #[test]
    fn graded_and_translation_routes_agree_at_origin() {
        let rows = [
            row(&["t1", "t2", "t3"]),
            vec![Monomial::product_of(&["a", "b"]), Monomial::product_of(&["a", "c"]), Monomial::var("b")],
            vec![Monomial::from_pairs([("x", 2)]), Monomial::product_of(&["x", "y"]), Monomial::from_pairs([("y", 2)])],
        ];
        for r in rows {
            let g = monomial_syzygies(&r);
            let vars: BTreeSet<String> = r.iter().flat_map(|m| m.variables().map(str::to_string)).collect();
            let o = PointAssignment::origin(&vars.into_iter().collect::<Vec<_>>());
            let a = fiber_dim_of_submodule(&g, &o, 4).unwrap();
            let b = fiber_dim_by_translation(&g, &o, 4).unwrap();
            assert_eq!(a.dim, b.dim, "{r:?}");
        }
    }

    #[test]
    fn low_bound_is_flagged() {
        // (x^2, xy, y^2): the outer pairwise syzygy is a linear combination
        // of the other two, which a bound of 0 cannot see
        let r = vec![Monomial::from_pairs([("x", 2)]), Monomial::product_of(&["x", "y"]), Monomial::from_pairs([("y", 2)])];
        let g = monomial_syzygies(&r);
        let o = PointAssignment::origin(&names(&["x", "y"]));
        let fd = fiber_dim_of_submodule(&g, &o, 1).unwrap();
        assert_eq!(fd.dim, 2);
        assert!(!fd.stabilized);
        assert_eq!(fiber_dim_of_submodule(&g, &o, 2).unwrap().trusted().unwrap(), 2);
        assert_eq!(fiber_dim_by_translation(&g, &o, 2).unwrap().trusted().unwrap(), 2);
        assert!(matches!(
            FiberDim { dim: 3, stabilized: false, bound: 0 }.trusted(),
            Err(AlgError::NotStabilized { bound: 0 })
        ));
    }

    #[test]
    fn missing_coordinate_is_error() {
        let g = monomial_syzygies(&row(&["t1", "t2"]));
        let p = PointAssignment::origin(&names(&["t1"]));
        assert!(matches!(fiber_dim_of_submodule(&g, &p, 3), Err(AlgError::MissingValue(_))));
    }
}
