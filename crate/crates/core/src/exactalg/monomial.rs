use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A monomial in named parameters. Zero exponents are never stored, so two
/// monomials are equal exactly when their exponent maps are.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: BTreeMap<String, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        Monomial::from_pairs([(name, 1)])
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u32)>) -> Self {
        let mut exps = BTreeMap::new();
        for (name, e) in pairs {
            if e > 0 {
                *exps.entry(name.to_string()).or_insert(0) += e;
            }
        }
        Monomial { exps }
    }

    /// Product of the named variables, each to the first power (repeats add).
    pub fn product_of<S: AsRef<str>>(names: &[S]) -> Self {
        Monomial::from_pairs(names.iter().map(|n| (n.as_ref(), 1)))
    }

    pub fn exponent(&self, name: &str) -> u32 {
        self.exps.get(name).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&str, u32)> {
        self.exps.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.exps.keys().map(String::as_str)
    }

    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (k, v) in &other.exps {
            *exps.entry(k.clone()).or_insert(0) += v;
        }
        Monomial { exps }
    }

    pub fn pow(&self, e: u32) -> Monomial {
        Monomial {
            exps: if e == 0 {
                BTreeMap::new()
            } else {
                self.exps.iter().map(|(k, v)| (k.clone(), v * e)).collect()
            },
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().all(|(k, v)| other.exponent(k) >= *v)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let exps = other
            .exps
            .iter()
            .filter_map(|(k, v)| {
                let e = v - self.exponent(k);
                (e > 0).then(|| (k.clone(), e))
            })
            .collect();
        Some(Monomial { exps })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (k, v) in &other.exps {
            let e = exps.entry(k.clone()).or_insert(0);
            *e = (*e).max(*v);
        }
        Monomial { exps }
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .filter_map(|(k, v)| {
                let e = (*v).min(other.exponent(k));
                (e > 0).then(|| (k.clone(), e))
            })
            .collect();
        Monomial { exps }
    }

    /// Replace every variable by a monomial (variables missing from `subst`
    /// are kept).
    pub fn substitute(&self, subst: &BTreeMap<String, Monomial>) -> Monomial {
        let mut out = Monomial::one();
        for (k, v) in &self.exps {
            let image = subst.get(k).cloned().unwrap_or_else(|| Monomial::var(k));
            out = out.mul(&image.pow(*v));
        }
        out
    }

    /// Exponent vector over an ordered variable list. Panics if the monomial
    /// uses a variable outside the list.
    pub fn exponent_vector(&self, vars: &[String]) -> Vec<u32> {
        let v: Vec<u32> = vars.iter().map(|n| self.exponent(n)).collect();
        debug_assert_eq!(v.iter().sum::<u32>(), self.degree(), "variable outside list");
        v
    }

    pub fn from_exponent_vector(vars: &[String], exps: &[u32]) -> Monomial {
        Monomial::from_pairs(vars.iter().map(String::as_str).zip(exps.iter().copied()))
    }
}

/// Deterministic order: lexicographic on parameter names (higher power of the
/// earliest name first), ties broken by degree.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut names: Vec<&String> = self.exps.keys().chain(other.exps.keys()).collect();
        names.sort();
        names.dedup();
        for n in names {
            match self.exponent(n).cmp(&other.exponent(n)) {
                Ordering::Equal => continue,
                ord => return ord.reverse(),
            }
        }
        self.degree().cmp(&other.degree())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|(k, v)| if *v == 1 { k.clone() } else { format!("{k}^{v}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
