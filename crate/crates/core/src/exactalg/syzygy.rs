//! Syzygies of monomial rows and the degree-truncated brute-force kernel
//! used to check them.

use std::collections::{BTreeMap, BTreeSet};

use super::linalg::{kernel_basis_with_cols, sparse_rank, SparseRow};
use super::{AlgError, Monomial, Polynomial, Scalar};

/// Pairwise lcm syzygies `(lcm/m_i)·e_i − (lcm/m_j)·e_j`, `i < j`. Together
/// they generate the full syzygy module of a monomial row.
pub fn monomial_syzygies(row: &[Monomial]) -> Vec<Vec<Polynomial>> {
    let n = row.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let l = row[i].lcm(&row[j]);
            let mut v = vec![Polynomial::zero(); n];
            v[i] = Polynomial::monomial(row[i].quotient_of(&l).expect("m_i divides lcm"));
            v[j] = -&Polynomial::monomial(row[j].quotient_of(&l).expect("m_j divides lcm"));
            out.push(v);
        }
    }
    out
}

/// Like [`monomial_syzygies`], for a row given as polynomials. Every entry
/// must be a nonzero monomial (coefficients are divided out).
pub fn monomial_syzygies_of(row: &[Polynomial]) -> Result<Vec<Vec<Polynomial>>, AlgError> {
    let monos = monomial_entries(row)?;
    let coeffs: Vec<Scalar> = row.iter().map(|p| p.as_term().unwrap().1.clone()).collect();
    Ok(monomial_syzygies(&monos)
        .into_iter()
        .map(|v| {
            v.into_iter()
                .zip(&coeffs)
                .map(|(p, c)| p.scale(&c.recip()))
                .collect()
        })
        .collect())
}

pub(crate) fn monomial_entries(row: &[Polynomial]) -> Result<Vec<Monomial>, AlgError> {
    row.iter()
        .enumerate()
        .map(|(k, p)| {
            if p.is_zero() {
                return Err(AlgError::ZeroEntry(k));
            }
            p.as_term()
                .map(|(m, _)| m.clone())
                .ok_or_else(|| AlgError::NotMonomial(p.to_string()))
        })
        .collect()
}

/// `Σ_k row_k · v_k`.
pub fn apply_row(row: &[Polynomial], v: &[Polynomial]) -> Polynomial {
    assert_eq!(row.len(), v.len(), "length mismatch");
    row.iter()
        .zip(v)
        .fold(Polynomial::zero(), |acc, (a, b)| &acc + &(a * b))
}

/// All exponent vectors of total degree `d` in `n` variables, in
/// lexicographic order.
pub fn exponents_of_degree(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n - 1, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

pub fn exponents_up_to_degree(n: usize, d: u32) -> Vec<Vec<u32>> {
    (0..=d).flat_map(|k| exponents_of_degree(n, k)).collect()
}

fn row_variables(row: &[Polynomial]) -> Vec<String> {
    let set: BTreeSet<String> = row.iter().flat_map(Polynomial::variables).collect();
    set.into_iter().collect()
}

fn homogeneous_degrees(row: &[Polynomial]) -> Result<Vec<u32>, AlgError> {
    row.iter()
        .map(|p| {
            if !p.is_homogeneous() {
                return Err(AlgError::NotHomogeneous(p.to_string()));
            }
            p.degree().ok_or(AlgError::ZeroEntry(0))
        })
        .collect()
}

/// For each shifted degree `d ≤ degree_bound`, the dimension of the space of
/// syzygy vectors `v` with `v_k` homogeneous of degree
/// `d + min_j deg(row_j) − deg(row_k)`. For a row of equal-degree entries
/// `d` is simply the degree of the entries of `v`.
///
/// Computed by brute force: the coefficient matrix of `Σ_k row_k·v_k = 0`
/// is assembled and handed to `kernel_basis`. Rows of monomials split that
/// matrix into independent blocks, one per multidegree.
pub fn truncated_kernel_dim(row: &[Polynomial], degree_bound: u32) -> Result<BTreeMap<u32, usize>, AlgError> {
    if row.iter().any(Polynomial::is_zero) {
        let k = row.iter().position(Polynomial::is_zero).unwrap();
        return Err(AlgError::ZeroEntry(k));
    }
    let degs = homogeneous_degrees(row)?;
    let min_deg = degs.iter().copied().min().unwrap_or(0);
    let vars = row_variables(row);
    let all_terms = row.iter().all(|p| p.num_terms() == 1);
    let mut out = BTreeMap::new();
    for d in 0..=degree_bound {
        let internal = d + min_deg;
        let dim = if all_terms {
            kernel_dim_blocks(row, &vars, internal)
        } else {
            kernel_dim_dense(row, &degs, &vars, internal)
        };
        out.insert(d, dim);
    }
    Ok(out)
}

fn kernel_dim_blocks(row: &[Polynomial], vars: &[String], internal: u32) -> usize {
    let entries: Vec<(Vec<u32>, Scalar)> = row
        .iter()
        .map(|p| {
            let (m, c) = p.as_term().unwrap();
            (m.exponent_vector(vars), c.clone())
        })
        .collect();
    let mut total = 0;
    for delta in exponents_of_degree(vars.len(), internal) {
        let cols: Vec<&Scalar> = entries
            .iter()
            .filter(|(a, _)| a.iter().zip(&delta).all(|(x, y)| x <= y))
            .map(|(_, c)| c)
            .collect();
        if cols.is_empty() {
            continue;
        }
        // one equation: the coefficient of x^delta in Σ row_k v_k
        let block = vec![cols.into_iter().cloned().collect::<Vec<_>>()];
        let width = block[0].len();
        total += kernel_basis_with_cols(&block, width).len();
    }
    total
}

fn kernel_dim_dense(row: &[Polynomial], degs: &[u32], vars: &[String], internal: u32) -> usize {
    let n = vars.len();
    // unknowns: coefficients of v_k on monomials of degree internal - deg_k
    let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
    for (k, &dk) in degs.iter().enumerate() {
        if dk > internal {
            continue;
        }
        for e in exponents_of_degree(n, internal - dk) {
            unknowns.push((k, Monomial::from_exponent_vector(vars, &e)));
        }
    }
    if unknowns.is_empty() {
        return 0;
    }
    let targets: Vec<Monomial> = exponents_of_degree(n, internal)
        .iter()
        .map(|e| Monomial::from_exponent_vector(vars, e))
        .collect();
    let index: BTreeMap<&Monomial, usize> = targets.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut matrix = vec![vec![Scalar::zero(); unknowns.len()]; targets.len()];
    for (col, (k, mono)) in unknowns.iter().enumerate() {
        for (m, c) in row[*k].terms() {
            let i = index[&m.mul(mono)];
            matrix[i][col] = &matrix[i][col] + c;
        }
    }
    kernel_basis_with_cols(&matrix, unknowns.len()).len()
}

/// For each shifted degree `d ≤ degree_bound` (same convention as
/// [`truncated_kernel_dim`]), the dimension of the degree piece of the
/// submodule spanned by homogeneous `generators` of syzygies of `row`.
pub fn generated_degree_dims(
    row: &[Polynomial],
    generators: &[Vec<Polynomial>],
    degree_bound: u32,
) -> Result<BTreeMap<u32, usize>, AlgError> {
    let degs = homogeneous_degrees(row)?;
    let min_deg = degs.iter().copied().min().unwrap_or(0);
    let mut vars: BTreeSet<String> = row.iter().flat_map(Polynomial::variables).collect();
    for g in generators {
        for p in g {
            vars.extend(p.variables());
        }
    }
    let vars: Vec<String> = vars.into_iter().collect();
    // internal degree of each generator
    let mut gen_degs = Vec::new();
    for g in generators {
        let mut deg = None;
        for (k, p) in g.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !p.is_homogeneous() {
                return Err(AlgError::NotHomogeneous(p.to_string()));
            }
            let dk = p.degree().unwrap() + degs[k];
            match deg {
                None => deg = Some(dk),
                Some(d0) if d0 != dk => return Err(AlgError::NotHomogeneous(format!("{g:?}"))),
                _ => {}
            }
        }
        gen_degs.push(deg);
    }
    let mut out = BTreeMap::new();
    for d in 0..=degree_bound {
        let internal = d + min_deg;
        // group the products x^alpha * g by the multidegree of their terms
        let mut groups: BTreeMap<Vec<u32>, Vec<SparseRow>> = BTreeMap::new();
        let mut coords: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
        for (g, gd) in generators.iter().zip(&gen_degs) {
            let Some(gd) = *gd else { continue };
            if gd > internal {
                continue;
            }
            for alpha in exponents_of_degree(vars.len(), internal - gd) {
                let shift = Monomial::from_exponent_vector(&vars, &alpha);
                let mut entries: BTreeMap<usize, Scalar> = BTreeMap::new();
                let mut key: Option<Vec<u32>> = None;
                let mut mixed = false;
                for (k, p) in g.iter().enumerate() {
                    for (m, c) in p.terms() {
                        let m = m.mul(&shift);
                        let row_mono = row[k].terms().next().map(|(rm, _)| rm.clone()).unwrap_or_default();
                        let md = m.mul(&row_mono).exponent_vector(&vars);
                        match &key {
                            None => key = Some(md),
                            Some(k0) if *k0 != md => mixed = true,
                            _ => {}
                        }
                        let next = coords.len();
                        let idx = *coords.entry((k, m)).or_insert(next);
                        let e = entries.entry(idx).or_insert_with(Scalar::zero);
                        *e = &*e + c;
                    }
                }
                let sparse: SparseRow = entries.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                let key = if mixed || row.iter().any(|p| p.num_terms() != 1) {
                    Vec::new()
                } else {
                    key.unwrap_or_default()
                };
                groups.entry(key).or_default().push(sparse);
            }
        }
        let dim: usize = groups.values().map(|rows| sparse_rank(rows)).sum();
        out.insert(d, dim);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<Monomial> {
        names.iter().map(|n| Monomial::var(n)).collect()
    }

    fn polys(ms: &[Monomial]) -> Vec<Polynomial> {
        ms.iter().cloned().map(Polynomial::monomial).collect()
    }

    #[test]
    fn single_entry_has_no_syzygies() {
        assert!(monomial_syzygies(&vars(&["t1"])).is_empty());
        let dims = truncated_kernel_dim(&polys(&vars(&["t1"])), 5).unwrap();
        assert!(dims.values().all(|&d| d == 0));
    }

    #[test]
    fn koszul_pair() {
        let syz = monomial_syzygies(&vars(&["t1", "t2"]));
        assert_eq!(syz, vec![vec![Polynomial::var("t2"), -&Polynomial::var("t1")]]);
    }

    #[test]
    fn chained_entries_share_a_factor() {
        let row = vec![Monomial::product_of(&["t_a", "t_b"]), Monomial::product_of(&["t_a", "t_c"])];
        let syz = monomial_syzygies(&row);
        assert_eq!(syz, vec![vec![Polynomial::var("t_c"), -&Polynomial::var("t_b")]]);
    }

    #[test]
    fn syzygies_annihilate_row() {
        let row = vec![
            Monomial::from_pairs([("a", 2), ("b", 1)]),
            Monomial::from_pairs([("b", 3)]),
            Monomial::from_pairs([("a", 1), ("c", 1)]),
        ];
        let prow = polys(&row);
        for s in monomial_syzygies(&row) {
            assert!(apply_row(&prow, &s).is_zero());
        }
    }

    #[test]
    fn zero_or_nonmonomial_entries_rejected() {
        let row = vec![Polynomial::var("t1"), Polynomial::zero()];
        assert!(matches!(monomial_syzygies_of(&row), Err(AlgError::ZeroEntry(1))));
        let row = vec![&Polynomial::var("t1") + &Polynomial::var("t2")];
        assert!(matches!(monomial_syzygies_of(&row), Err(AlgError::NotMonomial(_))));
    }

    #[test]
    fn three_koszul_pairs_in_degree_one() {
        let row = polys(&vars(&["t1", "t2", "t3"]));
        let dims = truncated_kernel_dim(&row, 2).unwrap();
        assert_eq!(dims[&0], 0);
        assert_eq!(dims[&1], 3);
        // degree 2: 3 Koszul pairs times 3 linear forms, minus the one
        // second syzygy
        assert_eq!(dims[&2], 8);
    }

    #[test]
    fn dense_and_block_paths_agree() {
        // scale entries so the dense path handles the same kernel
        let row = vec![
            Polynomial::term(Scalar::from_int(2), Monomial::product_of(&["a", "b"])),
            Polynomial::monomial(Monomial::product_of(&["b", "c"])),
            Polynomial::monomial(Monomial::from_pairs([("a", 2)])),
        ];
        let blocks = truncated_kernel_dim(&row, 4).unwrap();
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let degs = vec![2, 2, 2];
        for (d, dim) in blocks {
            assert_eq!(dim, kernel_dim_dense(&row, &degs, &vars, d + 2), "degree {d}");
        }
    }

    #[test]
    fn non_homogeneous_row_is_rejected() {
        let row = vec![&Polynomial::var("t1") + &Polynomial::constant(1)];
        assert!(matches!(truncated_kernel_dim(&row, 2), Err(AlgError::NotHomogeneous(_))));
    }

    #[test]
    fn generated_span_matches_kernel_for_koszul() {
        let ms = vars(&["t1", "t2", "t3"]);
        let row = polys(&ms);
        let gens = monomial_syzygies(&ms);
        assert_eq!(generated_degree_dims(&row, &gens, 6).unwrap(), truncated_kernel_dim(&row, 6).unwrap());
    }

    #[test]
    fn exponent_enumeration_counts() {
        assert_eq!(exponents_of_degree(3, 2).len(), 6);
        assert_eq!(exponents_up_to_degree(4, 6).len(), 210);
        assert_eq!(exponents_of_degree(0, 0), vec![Vec::<u32>::new()]);
        assert!(exponents_of_degree(0, 1).is_empty());
    }
}
