//! Cohomology of line bundles on ℙ¹, on products (ℙ¹)^r and on elliptic
//! curves, and the Ext¹ groups built from them.

use std::fmt;
use std::ops::{Add, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomError {
    #[error("multidegrees live on different products: r = {0} vs r = {1}")]
    RankMismatch(usize, usize),
    #[error("a multidegree needs at least one slot")]
    Empty,
}

/// The line bundle `O(a_1, ..., a_r)` on `(ℙ¹)^r`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiDegree(Vec<i64>);

impl MultiDegree {
    pub fn new(degrees: Vec<i64>) -> Result<Self, CohomError> {
        if degrees.is_empty() {
            return Err(CohomError::Empty);
        }
        Ok(MultiDegree(degrees))
    }

    /// The structure sheaf on `(ℙ¹)^r`.
    pub fn zero(r: usize) -> Self {
        assert!(r >= 1);
        MultiDegree(vec![0; r])
    }

    /// Degree `k` in slot `j`, zero elsewhere: `O(kW_j)`.
    pub fn slot(r: usize, j: usize, k: i64) -> Self {
        let mut d = MultiDegree::zero(r);
        d.0[j] = k;
        d
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    fn check(&self, other: &MultiDegree) -> Result<(), CohomError> {
        if self.r() != other.r() {
            return Err(CohomError::RankMismatch(self.r(), other.r()));
        }
        Ok(())
    }

    pub fn checked_sub(&self, other: &MultiDegree) -> Result<MultiDegree, CohomError> {
        self.check(other)?;
        Ok(MultiDegree(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }
}

impl Add for &MultiDegree {
    type Output = MultiDegree;
    fn add(self, rhs: &MultiDegree) -> MultiDegree {
        assert_eq!(self.r(), rhs.r(), "multidegree length mismatch");
        MultiDegree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Panics on mismatched `r`; use `checked_sub` for untrusted input.
impl Sub for &MultiDegree {
    type Output = MultiDegree;
    fn sub(self, rhs: &MultiDegree) -> MultiDegree {
        self.checked_sub(rhs).expect("multidegree length mismatch")
    }
}

impl Neg for &MultiDegree {
    type Output = MultiDegree;
    fn neg(self) -> MultiDegree {
        MultiDegree(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "O({})", parts.join(","))
    }
}

impl fmt::Debug for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(h⁰, h¹)` of `O(d)` on ℙ¹.
pub fn h_p1(d: i64) -> (usize, usize) {
    ((d + 1).max(0) as usize, (-d - 1).max(0) as usize)
}

/// `(h⁰, ..., h^r)` of `O(a)` on `(ℙ¹)^r` by Künneth.
pub fn h_multi(a: &MultiDegree) -> Vec<usize> {
    // polynomial product: slot j contributes h⁰ in degree 0 and h¹ in degree 1
    let mut h = vec![1usize];
    for &d in a.degrees() {
        let (h0, h1) = h_p1(d);
        let mut next = vec![0usize; h.len() + 1];
        for (k, &x) in h.iter().enumerate() {
            next[k] += x * h0;
            next[k + 1] += x * h1;
        }
        h = next;
    }
    h
}

pub fn euler_char_multi(a: &MultiDegree) -> i64 {
    a.degrees().iter().map(|d| d + 1).product()
}

/// `dim Ext¹(O(source), O(target)) = h¹(O(target − source))`.
pub fn ext1(source: &MultiDegree, target: &MultiDegree) -> Result<usize, CohomError> {
    source.check(target)?;
    Ok(h_multi(&(target - source))[1])
}

/// `Σ_i dim Ext¹(quotient, sub_i)`; zero means every extension of the
/// quotient by the direct sum of the subs splits.
pub fn splitting_obstruction(quotient: &MultiDegree, subs: &[MultiDegree]) -> Result<usize, CohomError> {
    subs.iter().map(|s| ext1(quotient, s)).sum()
}

/// A line bundle on a smooth genus-one curve, described only by the data
/// that determines its cohomology and its values at nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticBundleData {
    pub degree: i64,
    /// Only meaningful in degree 0.
    pub trivial: bool,
    /// Per node: whether the divisor of the distinguished section contains
    /// it. `None` means general position.
    pub node_in_divisor: Vec<Option<bool>>,
}

impl EllipticBundleData {
    pub fn new(degree: i64) -> Self {
        EllipticBundleData { degree, trivial: false, node_in_divisor: Vec::new() }
    }

    pub fn trivial() -> Self {
        EllipticBundleData { degree: 0, trivial: true, node_in_divisor: Vec::new() }
    }
}

/// `(h⁰, h¹)` by Riemann–Roch on a genus-one curve.
pub fn h_elliptic(data: &EllipticBundleData) -> (usize, usize) {
    match data.degree {
        d if d > 0 => (d as usize, 0),
        d if d < 0 => (0, (-d) as usize),
        _ if data.trivial => (1, 1),
        _ => (0, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{matrix_rank, Scalar};

    fn md(v: &[i64]) -> MultiDegree {
        MultiDegree::new(v.to_vec()).unwrap()
    }

    /// Čech cohomology of O(a) on (ℙ¹)^r for the cover by the 2^r products
    /// of standard affines. The complex splits by Laurent exponent `e`;
    /// slot j admits `e_j` on an intersection whose slot-j charts are
    /// {0}: `e_j ≥ 0`, {1}: `e_j ≤ a_j`, {0,1}: anything.
    fn cech(a: &[i64]) -> Vec<usize> {
        let r = a.len();
        let opens = 1usize << r;
        let subsets: Vec<Vec<usize>> = (1u64..(1u64 << opens))
            .map(|mask| (0..opens).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        let mut total = vec![0usize; r + 1];
        let lo: Vec<i64> = a.iter().map(|&x| x.min(0) - 3).collect();
        let hi: Vec<i64> = a.iter().map(|&x| x.max(0) + 3).collect();
        let mut e = lo.clone();
        loop {
            let admits = |s: &[usize]| {
                (0..r).all(|j| {
                    let has0 = s.iter().any(|&o| o >> j & 1 == 0);
                    let has1 = s.iter().any(|&o| o >> j & 1 == 1);
                    match (has0, has1) {
                        (true, false) => e[j] >= 0,
                        (false, true) => e[j] <= a[j],
                        _ => true,
                    }
                })
            };
            let cells: Vec<Vec<Vec<usize>>> = (1..=opens)
                .map(|p| subsets.iter().filter(|s| s.len() == p && admits(s)).cloned().collect())
                .collect();
            // d^p : C^p → C^{p+1}
            let rank_of = |p: usize| -> usize {
                if p + 1 >= cells.len() || cells[p].is_empty() || cells[p + 1].is_empty() {
                    return 0;
                }
                let m: Vec<Vec<Scalar>> = cells[p + 1]
                    .iter()
                    .map(|big| {
                        cells[p]
                            .iter()
                            .map(|small| {
                                if small.iter().all(|x| big.contains(x)) {
                                    let missing = big.iter().position(|x| !small.contains(x)).unwrap();
                                    Scalar::from_int(if missing % 2 == 0 { 1 } else { -1 })
                                } else {
                                    Scalar::zero()
                                }
                            })
                            .collect()
                    })
                    .collect();
                matrix_rank(&m)
            };
            let ranks: Vec<usize> = (0..opens).map(rank_of).collect();
            for k in 0..=r {
                let dim = cells[k].len();
                let out = ranks[k];
                let inc = if k == 0 { 0 } else { ranks[k - 1] };
                let h = dim - out - inc;
                if h > 0 {
                    // everything lives strictly inside the box
                    assert!((0..r).all(|j| e[j] > lo[j] && e[j] < hi[j]), "contribution at box edge {e:?}");
                }
                total[k] += h;
            }
            // next exponent in the box
            let mut j = 0;
            while j < r {
                e[j] += 1;
                if e[j] <= hi[j] {
                    break;
                }
                e[j] = lo[j];
                j += 1;
            }
            if j == r {
                break;
            }
        }
        total
    }

    #[test]
    fn p1_values() {
        assert_eq!(h_p1(0), (1, 0));
        assert_eq!(h_p1(4), (5, 0));
        assert_eq!(h_p1(-1), (0, 0));
        assert_eq!(h_p1(-2), (0, 1));
        for d in -10..=10 {
            let (h0, h1) = h_p1(d);
            assert_eq!(h0 as i64 - h1 as i64, d + 1);
            assert_eq!(h_multi(&md(&[d])), vec![h0, h1]);
        }
    }

    #[test]
    fn kunneth_examples() {
        assert_eq!(h_multi(&MultiDegree::zero(3)), vec![1, 0, 0, 0]);
        for b in -4..=4 {
            assert_eq!(h_multi(&md(&[-1, b])), vec![0, 0, 0]);
        }
        assert_eq!(h_multi(&md(&[-2, -2])), vec![0, 0, 1]);
        assert_eq!(h_multi(&md(&[2, -2])), vec![0, 3, 0]);
    }

    #[test]
    fn kunneth_matches_cech_on_p1_and_p1xp1() {
        for a in -5..=4 {
            assert_eq!(h_multi(&md(&[a])), cech(&[a]), "a = {a}");
        }
        for a in -4..=3 {
            for b in -4..=3 {
                assert_eq!(h_multi(&md(&[a, b])), cech(&[a, b]), "a = ({a},{b})");
            }
        }
    }

    #[test]
    fn kunneth_matches_cech_on_triple_product_samples() {
        for a in [[0, 0, 0], [-2, 1, 0], [-2, -2, 1], [2, -3, -2], [-1, 3, 2], [1, 1, -2]] {
            assert_eq!(h_multi(&md(&a)), cech(&a), "a = {a:?}");
        }
    }

    #[test]
    fn ext_and_splitting() {
        // on ℙ¹: O(-m-1) against O(0..-m) never has Ext¹
        for m in 0..6 {
            let q = md(&[-m - 1]);
            let subs: Vec<MultiDegree> = (0..=m).map(|i| md(&[-i])).collect();
            assert_eq!(splitting_obstruction(&q, &subs).unwrap(), 0);
        }
        assert_eq!(ext1(&md(&[0]), &md(&[0])).unwrap(), 0);
        assert_eq!(splitting_obstruction(&md(&[0]), &[md(&[-2])]).unwrap(), 1);
        assert!(matches!(ext1(&md(&[0]), &md(&[0, 0])), Err(CohomError::RankMismatch(1, 2))));
    }

    #[test]
    fn mixed_slot_ext_is_not_zero() {
        // Ext¹(O(-(m_j+1)W_j), O(-kW_i)) = h¹(O(m_j+1 in slot j, -k in slot i))
        for mj in 1..=3i64 {
            for k in 1..=3i64 {
                let src = MultiDegree::slot(2, 1, -(mj + 1));
                let tgt = MultiDegree::slot(2, 0, -k);
                let expected = ((mj + 2) * (k - 1)) as usize;
                assert_eq!(ext1(&src, &tgt).unwrap(), expected);
            }
        }
        // same slot: degree m_j + 1 - k ≥ 1, no Ext
        for mj in 1..=3i64 {
            for k in 1..=mj {
                assert_eq!(ext1(&MultiDegree::slot(3, 2, -(mj + 1)), &MultiDegree::slot(3, 2, -k)).unwrap(), 0);
            }
        }
    }

    #[test]
    fn serre_duality_and_euler_characteristic() {
        let mut state: u64 = 17;
        for _ in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = 1 + (state >> 60) as usize % 4;
            let a: Vec<i64> = (0..r).map(|j| ((state >> (8 * j + 8)) % 13) as i64 - 6).collect();
            let a = md(&a);
            let h = h_multi(&a);
            let dual = h_multi(&(&(-&a) - &md(&vec![2; r])));
            for k in 0..=r {
                assert_eq!(h[k], dual[r - k]);
            }
            let chi: i64 = h.iter().enumerate().map(|(k, &x)| if k % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
            assert_eq!(chi, euler_char_multi(&a));
        }
    }

    #[test]
    fn elliptic_rules() {
        assert_eq!(h_elliptic(&EllipticBundleData::new(1)), (1, 0));
        assert_eq!(h_elliptic(&EllipticBundleData::new(0)), (0, 0));
        assert_eq!(h_elliptic(&EllipticBundleData::trivial()), (1, 1));
        for d in -5..=5 {
            for trivial in [false, true] {
                let data = EllipticBundleData { degree: d, trivial, node_in_divisor: vec![] };
                let (h0, h1) = h_elliptic(&data);
                let expected = if d == 0 { 0 } else { d };
                assert_eq!(h0 as i64 - h1 as i64, expected);
            }
        }
    }
}
