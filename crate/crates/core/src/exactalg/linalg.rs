//! Dense and sparse exact linear algebra over ℚ, with a prime-field rank for
//! cross-checks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::scalar::{inv_mod, mulmod};
use super::Scalar;

pub type ScalarMatrix = Vec<Vec<Scalar>>;

/// A sparse row: strictly increasing column indices with nonzero entries.
pub type SparseRow = Vec<(usize, Scalar)>;

pub fn transpose(m: &ScalarMatrix) -> ScalarMatrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn matmul(a: &ScalarMatrix, b: &ScalarMatrix) -> ScalarMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "shape mismatch");
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .fold(Scalar::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(m: &ScalarMatrix, v: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Scalar::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn to_sparse(m: &ScalarMatrix) -> Vec<SparseRow> {
    m.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| (j, x.clone()))
                .collect()
        })
        .collect()
}

/// Clear denominators and divide out the content, leaving a primitive
/// integer row.
fn primitive_integer_row(row: &SparseRow) -> Vec<(usize, BigInt)> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
    let mut ints: Vec<(usize, BigInt)> = row
        .iter()
        .map(|(j, x)| (*j, x.numer() * (&lcm / x.denom())))
        .collect();
    normalize_content(&mut ints);
    ints
}

fn normalize_content(row: &mut [(usize, BigInt)]) {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, x)| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for (_, x) in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// `a*x - b*y` on sparse integer rows.
fn combine(a: &BigInt, x: &[(usize, BigInt)], b: &BigInt, y: &[(usize, BigInt)]) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take = match (x.get(i), y.get(j)) {
            (Some((ci, _)), Some((cj, _))) => ci.cmp(cj),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => unreachable!(),
        };
        match take {
            std::cmp::Ordering::Less => {
                out.push((x[i].0, a * &x[i].1));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((y[j].0, -(b * &y[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = a * &x[i].1 - b * &y[j].1;
                if !v.is_zero() {
                    out.push((x[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Rank of a sparse rational matrix by fraction-free elimination over ℤ
/// (rows are kept primitive to contain coefficient growth).
pub fn sparse_rank(rows: &[SparseRow]) -> usize {
    let mut active: Vec<Vec<(usize, BigInt)>> = rows
        .iter()
        .filter(|r| !r.is_empty())
        .map(primitive_integer_row)
        .collect();
    let mut rank = 0;
    while !active.is_empty() {
        // leading column of each row is its first entry
        let lead = active.iter().map(|r| r[0].0).min().unwrap();
        let mut with_lead: Vec<usize> = (0..active.len()).filter(|&i| active[i][0].0 == lead).collect();
        // pivot: shortest row, then smallest leading magnitude
        with_lead.sort_by(|&a, &b| {
            active[a]
                .len()
                .cmp(&active[b].len())
                .then_with(|| active[a][0].1.abs().cmp(&active[b][0].1.abs()))
        });
        let pivot_idx = with_lead[0];
        let pivot = active.swap_remove(pivot_idx);
        rank += 1;
        let pv = pivot[0].1.clone();
        let mut next = Vec::with_capacity(active.len());
        for row in active.into_iter() {
            if row[0].0 != lead {
                next.push(row);
                continue;
            }
            let g = pv.gcd(&row[0].1);
            let a = &pv / &g;
            let b = &row[0].1 / &g;
            let mut reduced = combine(&a, &row, &b, &pivot);
            if reduced.is_empty() {
                continue;
            }
            normalize_content(&mut reduced);
            next.push(reduced);
        }
        active = next;
    }
    rank
}

/// Exact rank over ℚ by fraction-free Gaussian elimination.
pub fn matrix_rank(m: &ScalarMatrix) -> usize {
    sparse_rank(&to_sparse(m))
}

/// Rank over the prime field 𝔽_p. Fails if `p` divides a denominator.
pub fn matrix_rank_mod_p(m: &ScalarMatrix, p: u64) -> Option<usize> {
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|row| row.iter().map(|x| x.mod_prime(p)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = inv_mod(a[rank][c], p);
        for j in c..cols {
            a[rank][j] = mulmod(a[rank][j], inv, p);
        }
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in c..cols {
                    let sub = mulmod(f, a[rank][j], p);
                    a[i][j] = (a[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    Some(rank)
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut ScalarMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A basis of the right kernel `{v : m·v = 0}`; `cols` is needed for the
/// matrix with no rows.
pub fn kernel_basis_with_cols(m: &ScalarMatrix, cols: usize) -> Vec<Vec<Scalar>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); cols];
            v[f] = Scalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[r][f];
            }
            v
        })
        .collect()
}

pub fn kernel_basis(m: &ScalarMatrix) -> Vec<Vec<Scalar>> {
    let cols = m.first().map_or(0, Vec::len);
    kernel_basis_with_cols(m, cols)
}
