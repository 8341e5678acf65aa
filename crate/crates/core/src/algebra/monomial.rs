use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::BuildHasherDefault;

use num_complex::Complex64 as C64;
use smallvec::SmallVec;

/// Exponent storage; 12 slots cover the widest integrand the star
/// composition builds for two degrees of freedom.
pub type Exponents = SmallVec<[u16; 12]>;

/// Hash map keyed by monomials with a fixed hasher, so iteration order
/// (and floating-point summation order) is the same in every process.
pub(crate) type MonoMap<V> = HashMap<Monomial, V, BuildHasherDefault<DefaultHasher>>;

/// Exponent multi-index of a monomial.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vectors lexicographically in variable order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Exponents);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(smallvec::smallvec![0; nvars])
    }

    pub fn new(exps: &[u16]) -> Self {
        Monomial(Exponents::from_slice(exps))
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[index] = 1;
        m
    }

    #[inline]
    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    #[inline]
    pub(crate) fn exps_mut(&mut self) -> &mut [u16] {
        &mut self.0
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// `self` divides `other` componentwise.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.0
            .iter()
            .zip(z)
            .filter(|(&e, _)| e > 0)
            .fold(C64::new(1.0, 0.0), |acc, (&e, &v)| acc * v.powu(e as u32))
    }

    /// Splits into the exponents selected by `mask == false` and `mask == true`.
    pub(crate) fn split(&self, mask: &[bool]) -> (Monomial, Monomial) {
        let mut keep = Exponents::new();
        let mut take = Exponents::new();
        for (&e, &m) in self.0.iter().zip(mask) {
            if m {
                take.push(e);
            } else {
                keep.push(e);
            }
        }
        (Monomial(keep), Monomial(take))
    }

    /// Places this monomial's exponents at `positions` inside a monomial with
    /// `nvars` variables.
    pub(crate) fn embed(&self, nvars: usize, positions: &[usize]) -> Monomial {
        let mut out = Monomial::one(nvars);
        for (&e, &p) in self.0.iter().zip(positions) {
            out.0[p] = e;
        }
        out
    }

    /// Key used by the JSON form, e.g. `"2,0,1,0"`.
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_key(key: &str) -> Option<Monomial> {
        if key.trim().is_empty() {
            return Some(Monomial(Exponents::new()));
        }
        key.split(',')
            .map(|s| s.trim().parse::<u16>().ok())
            .collect::<Option<Exponents>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^[{}]", self.key())
    }
}

/// Calls `visit` for every multi-index `gamma <= beta` componentwise.
pub(crate) fn for_each_divisor(beta: &[u16], mut visit: impl FnMut(&[u16])) {
    let n = beta.len();
    let mut gamma: Exponents = smallvec::smallvec![0; n];
    loop {
        visit(&gamma);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if gamma[i] < beta[i] {
                gamma[i] += 1;
                break;
            }
            gamma[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let a = Monomial::new(&[2, 0]);
        let b = Monomial::new(&[0, 3]);
        let c = Monomial::new(&[1, 1]);
        assert!(a < b);
        assert!(c < a);
        assert!(Monomial::one(2) < c);
    }

    #[test]
    fn divisors_enumerated() {
        let mut seen = Vec::new();
        for_each_divisor(&[1, 2], |g| seen.push(g.to_vec()));
        assert_eq!(seen.len(), 6);
        assert!(seen.contains(&vec![1, 2]));
        assert!(seen.contains(&vec![0, 0]));
    }

    #[test]
    fn key_round_trip() {
        let m = Monomial::new(&[3, 0, 1]);
        assert_eq!(Monomial::parse_key(&m.key()), Some(m));
        assert_eq!(Monomial::parse_key("a,1"), None);
    }
}
