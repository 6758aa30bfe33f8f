use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{AlgError, Monomial, Scalar};

/// A polynomial over ℚ in named parameters. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: impl Into<Scalar>) -> Self {
        Polynomial::term(c.into(), Monomial::one())
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Polynomial::term(Scalar::one(), m)
    }

    pub fn var(name: &str) -> Self {
        Polynomial::monomial(Monomial::var(name))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The single term, if the polynomial is a nonzero scalar times a monomial.
    pub fn as_term(&self) -> Option<(&Monomial, &Scalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.variables().map(str::to_string))
            .collect()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at an assignment covering every variable that occurs.
    pub fn evaluate(&self, values: &BTreeMap<String, Scalar>) -> Result<Scalar, AlgError> {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (name, e) in m.exponents() {
                let x = values
                    .get(name)
                    .ok_or_else(|| AlgError::MissingValue(name.to_string()))?;
                v = v * x.pow(e);
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Substitute polynomials for variables; unlisted variables are kept.
    pub fn substitute(&self, subst: &BTreeMap<String, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone());
            for (name, e) in m.exponents() {
                let image = subst.get(name).cloned().unwrap_or_else(|| Polynomial::var(name));
                prod = &prod * &image.pow(e);
            }
            out = &out + &prod;
        }
        out
    }

    pub fn substitute_monomials(&self, subst: &BTreeMap<String, Monomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.substitute(subst), c.clone());
        }
        out
    }
}

impl From<Monomial> for Polynomial {
    fn from(m: Monomial) -> Self {
        Polynomial::monomial(m)
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&Scalar::from_int(-1))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.numer() < &num_bigint::BigInt::from(0);
            let abs = c.abs();
            let body = match (abs.is_one(), m.is_one()) {
                (true, true) => "1".to_string(),
                (true, false) => m.to_string(),
                (false, true) => abs.to_string(),
                (false, false) => format!("{abs}*{m}"),
            };
            if first {
                write!(f, "{}{}", if neg { "-" } else { "" }, body)?;
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A rectangular grid of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        PolyMatrix { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix::new(rows, cols, vec![Polynomial::zero(); rows * cols])
    }

    /// A single row.
    pub fn row(entries: Vec<Polynomial>) -> Self {
        let n = entries.len();
        PolyMatrix::new(1, n, entries)
    }

    /// Columns given as vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Polynomial>]) -> Self {
        let mut m = PolyMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, p) in col.iter().enumerate() {
                m.entries[i * m.cols + j] = p.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = PolyMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Polynomial::zero();
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * rhs.get(k, j));
                }
                out.entries[i * rhs.cols + j] = acc;
            }
        }
        out
    }

    pub fn evaluate(&self, values: &BTreeMap<String, Scalar>) -> Result<Vec<Vec<Scalar>>, AlgError> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).evaluate(values)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::linalg::matmul;
    use proptest::prelude::*;

    fn small_poly(coeffs: &[i64]) -> Polynomial {
        // coefficients on 1, x, y, xy
        let monos = [
            Monomial::one(),
            Monomial::var("x"),
            Monomial::var("y"),
            Monomial::product_of(&["x", "y"]),
        ];
        let mut p = Polynomial::zero();
        for (c, m) in coeffs.iter().zip(monos) {
            p = &p + &Polynomial::term(Scalar::from_int(*c), m);
        }
        p
    }

    fn assignment(x: i64, y: i64) -> BTreeMap<String, Scalar> {
        [("x".to_string(), Scalar::from_int(x)), ("y".to_string(), Scalar::from_int(y))]
            .into_iter()
            .collect()
    }

    #[test]
    fn display_and_cancellation() {
        let p = &Polynomial::var("t2") - &Polynomial::var("t1");
        assert_eq!(p.to_string(), "-t1 + t2");
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn missing_value_is_error() {
        let p = Polynomial::var("z");
        assert!(matches!(p.evaluate(&assignment(1, 1)), Err(AlgError::MissingValue(_))));
    }

    proptest! {
        #[test]
        fn evaluation_is_ring_homomorphism(
            a in prop::collection::vec(-5i64..5, 4),
            b in prop::collection::vec(-5i64..5, 4),
            x in -6i64..6, y in -6i64..6,
        ) {
            let (p, q) = (small_poly(&a), small_poly(&b));
            let pt = assignment(x, y);
            let pv = p.evaluate(&pt).unwrap();
            let qv = q.evaluate(&pt).unwrap();
            prop_assert_eq!((&p * &q).evaluate(&pt).unwrap(), &pv * &qv);
            prop_assert_eq!((&p + &q).evaluate(&pt).unwrap(), &pv + &qv);
        }

        #[test]
        fn evaluation_commutes_with_matrix_product(
            a in prop::collection::vec(prop::collection::vec(-3i64..3, 4), 4),
            b in prop::collection::vec(prop::collection::vec(-3i64..3, 4), 4),
            x in -4i64..4, y in -4i64..4,
        ) {
            let ma = PolyMatrix::new(2, 2, a.iter().map(|c| small_poly(c)).collect());
            let mb = PolyMatrix::new(2, 2, b.iter().map(|c| small_poly(c)).collect());
            let pt = assignment(x, y);
            let lhs = ma.mul(&mb).evaluate(&pt).unwrap();
            let rhs = matmul(&ma.evaluate(&pt).unwrap(), &mb.evaluate(&pt).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
