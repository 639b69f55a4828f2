//! Affine permutations `x -> a*x + b` over `Z_P`.
//!
//! Matrix convention used throughout the crate: the permutation matrix of `f`
//! has `M[x][y] = 1` iff `f(x) = y`. With this convention
//! `M(f) * M(g) = M(g ∘ f)` and `M(f)^T = M(f^-1)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("multiplier {a} is not a unit modulo {modulus}")]
    NotUnit { a: u64, modulus: u64 },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("empty permutation word")]
    EmptyWord,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m` via extended Euclid, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// The map `x -> a*x + b (mod P)` with `gcd(a, P) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffinePerm {
    a: u64,
    b: u64,
    modulus: u64,
}

impl AffinePerm {
    /// Builds a permutation, reducing `a` and `b` into `[0, P)`.
    pub fn new(a: u64, b: u64, modulus: u64) -> Result<Self, AffineError> {
        if modulus == 0 {
            return Err(AffineError::ZeroModulus);
        }
        let a = a % modulus;
        if gcd(a, modulus) != 1 {
            return Err(AffineError::NotUnit { a, modulus });
        }
        Ok(Self {
            a,
            b: b % modulus,
            modulus,
        })
    }

    pub fn identity(modulus: u64) -> Self {
        Self {
            a: 1 % modulus,
            b: 0,
            modulus,
        }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 % self.modulus && self.b == 0
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        debug_assert!(x < self.modulus);
        (self.a * x + self.b) % self.modulus
    }

    /// `self ∘ other`, i.e. `x -> self(other(x))`.
    pub fn compose(&self, other: &AffinePerm) -> Result<AffinePerm, AffineError> {
        self.check_modulus(other)?;
        let m = self.modulus;
        Ok(AffinePerm {
            a: self.a * other.a % m,
            b: (self.a * other.b + self.b) % m,
            modulus: m,
        })
    }

    pub fn invert(&self) -> AffinePerm {
        let m = self.modulus;
        let inv = mod_inverse(self.a, m).expect("multiplier is a unit by construction");
        AffinePerm {
            a: inv,
            b: (m - inv * self.b % m) % m,
            modulus: m,
        }
    }

    /// Tests `self ∘ other == other ∘ self` through the congruence
    /// `d(a - 1) - b(c - 1) ≡ 0 (mod P)` with `self = (a, b)`, `other = (c, d)`.
    pub fn commutes(&self, other: &AffinePerm) -> Result<bool, AffineError> {
        self.check_modulus(other)?;
        Ok(commutation_residue(self, other) == 0)
    }

    /// Number of `x` with `self(x) = x`.
    pub fn fixed_point_count(&self) -> u64 {
        let m = self.modulus;
        let g = gcd((self.a + m - 1) % m, m);
        if self.b.is_multiple_of(g) {
            g
        } else {
            0
        }
    }

    /// All fixed points in increasing order.
    pub fn fixed_points(&self) -> Vec<u64> {
        let m = self.modulus;
        let count = self.fixed_point_count();
        if count == 0 {
            return Vec::new();
        }
        // (a - 1) x ≡ -b (mod m): divide through by g and invert.
        let g = count;
        let step = m / g;
        let coeff = ((self.a + m - 1) % m) / g;
        let rhs = ((m - self.b) % m) / g;
        let x0 = match mod_inverse(coeff % step, step) {
            Some(inv) => rhs % step * inv % step,
            None => 0,
        };
        (0..g).map(|k| x0 + k * step).collect()
    }

    fn check_modulus(&self, other: &AffinePerm) -> Result<(), AffineError> {
        if self.modulus != other.modulus {
            return Err(AffineError::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }
}

/// `d(a - 1) - b(c - 1) mod P` for `f = (a, b)`, `g = (c, d)`; zero iff they commute.
pub fn commutation_residue(f: &AffinePerm, g: &AffinePerm) -> u64 {
    let m = f.modulus;
    let lhs = g.b * ((f.a + m - 1) % m) % m;
    let rhs = f.b * ((g.a + m - 1) % m) % m;
    (lhs + m - rhs) % m
}

impl fmt::Display for AffinePerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x+{} mod {}", self.a, self.b, self.modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Plus,
    Minus,
}

impl Exponent {
    pub fn flip(self) -> Self {
        match self {
            Exponent::Plus => Exponent::Minus,
            Exponent::Minus => Exponent::Plus,
        }
    }
}

/// An ordered product of affine permutations and their inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermWord {
    factors: Vec<(AffinePerm, Exponent)>,
}

impl PermWord {
    pub fn new(factors: Vec<(AffinePerm, Exponent)>) -> Result<Self, AffineError> {
        let first = factors.first().ok_or(AffineError::EmptyWord)?;
        let m = first.0.modulus();
        if let Some((p, _)) = factors.iter().find(|(p, _)| p.modulus() != m) {
            return Err(AffineError::ModulusMismatch(m, p.modulus()));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(AffinePerm, Exponent)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The word followed by its formal inverse.
    pub fn formal_inverse(&self) -> PermWord {
        PermWord {
            factors: self.factors.iter().rev().map(|&(p, e)| (p, e.flip())).collect(),
        }
    }

    pub fn concat(&self, other: &PermWord) -> Result<PermWord, AffineError> {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        PermWord::new(factors)
    }

    /// Composes the factors left to right: `w1 ∘ w2 ∘ ... ∘ wk`, so that the
    /// rightmost factor acts first. Equivalently, `M(reduce(w))` equals the
    /// product of the factor matrices taken in reverse order.
    pub fn reduce(&self) -> AffinePerm {
        let m = self.factors[0].0.modulus();
        self.factors.iter().fold(AffinePerm::identity(m), |acc, &(p, e)| {
            let p = match e {
                Exponent::Plus => p,
                Exponent::Minus => p.invert(),
            };
            acc.compose(&p).expect("moduli checked at construction")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ap(a: u64, b: u64, m: u64) -> AffinePerm {
        AffinePerm::new(a, b, m).unwrap()
    }

    /// Dense permutation matrix oracle: `m[x][y] = 1` iff `f(x) = y`.
    fn dense(f: &AffinePerm) -> Vec<Vec<u8>> {
        let p = f.modulus() as usize;
        let mut m = vec![vec![0u8; p]; p];
        for x in 0..p {
            m[x][f.apply(x as u64) as usize] = 1;
        }
        m
    }

    fn dense_mul(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let n = a.len();
        let mut c = vec![vec![0u8; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == 1 {
                    for j in 0..n {
                        c[i][j] ^= b[k][j];
                    }
                }
            }
        }
        c
    }

    #[test]
    fn apply_examples() {
        assert_eq!(ap(1, 0, 7).apply(3), 3);
        assert_eq!(ap(2, 1, 7).apply(3), 0);
        assert_eq!(ap(763, 435, 768).apply(0), 435);
    }

    #[test]
    fn compose_and_invert_examples() {
        let g = ap(3, 2, 7);
        assert_eq!(AffinePerm::identity(7).compose(&g).unwrap(), g);
        assert_eq!(ap(2, 1, 7).compose(&g).unwrap(), ap(6, 5, 7));
        assert_eq!(ap(2, 1, 7).invert(), ap(4, 3, 7));
        assert_eq!(ap(1, 0, 9).invert(), ap(1, 0, 9));
        let f = ap(763, 435, 768);
        let h = f.invert();
        assert!(h.compose(&f).unwrap().is_identity());
        for x in 0..768 {
            assert_eq!(h.apply(f.apply(x)), x);
        }
        assert!(matches!(f.compose(&g), Err(AffineError::ModulusMismatch(768, 7))));
    }

    #[test]
    fn rejects_non_units() {
        assert!(matches!(AffinePerm::new(4, 1, 8), Err(AffineError::NotUnit { .. })));
        assert!(AffinePerm::new(1, 0, 0).is_err());
    }

    #[test]
    fn commutation_examples() {
        let p = 768;
        let f0 = ap(763, 435, p);
        let g0 = ap(289, 496, p);
        let g3 = ap(41, 524, p);
        assert!(AffinePerm::identity(p).commutes(&g3).unwrap());
        assert!(f0.commutes(&g0).unwrap());
        assert!(!f0.commutes(&g3).unwrap());
        assert_eq!(commutation_residue(&f0, &g3), 192);
        // composition oracle
        assert_eq!(f0.compose(&g0).unwrap(), g0.compose(&f0).unwrap());
        assert_ne!(f0.compose(&g3).unwrap(), g3.compose(&f0).unwrap());
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(ap(1, 0, 768).fixed_point_count(), 768);
        assert_eq!(ap(1, 1, 768).fixed_point_count(), 0);
        assert_eq!(ap(3, 2, 4).fixed_point_count(), 2);
        assert_eq!(ap(3, 2, 4).fixed_points(), vec![1, 3]);
    }

    #[test]
    fn word_examples() {
        let f = ap(2, 1, 7);
        let g = ap(3, 2, 7);
        let w = PermWord::new(vec![(f, Exponent::Plus), (f, Exponent::Minus)]).unwrap();
        assert!(w.reduce().is_identity());
        let w = PermWord::new(vec![(f, Exponent::Plus), (g, Exponent::Plus)]).unwrap();
        assert_eq!(w.reduce(), ap(6, 5, 7));
        assert!(PermWord::new(vec![]).is_err());
        assert!(PermWord::new(vec![(f, Exponent::Plus), (ap(1, 0, 8), Exponent::Plus)]).is_err());
    }

    #[test]
    fn matrix_convention_product_is_reverse_composition() {
        let f = ap(5, 3, 12);
        let g = ap(7, 10, 12);
        let lhs = dense_mul(&dense(&f), &dense(&g));
        assert_eq!(lhs, dense(&g.compose(&f).unwrap()));
        // transpose is the inverse
        let m = dense(&f);
        let inv = dense(&f.invert());
        for x in 0..12 {
            for y in 0..12 {
                assert_eq!(m[x][y], inv[y][x]);
            }
        }
    }

    fn arb_perm(max_p: u64) -> impl Strategy<Value = (u64, u64, u64, u64, u64)> {
        (2..=max_p).prop_flat_map(|p| (Just(p), 0..p, 0..p, 0..p, 0..p))
    }

    fn unit_near(a: u64, p: u64) -> u64 {
        (0..p).map(|k| (a + k) % p).find(|&c| gcd(c, p) == 1).unwrap()
    }

    proptest! {
        #[test]
        fn commutes_matches_dense_matrices((p, a, b, c, d) in arb_perm(32)) {
            let f = ap(unit_near(a, p), b, p);
            let g = ap(unit_near(c, p), d, p);
            let (mf, mg) = (dense(&f), dense(&g));
            let dense_commute = dense_mul(&mf, &mg) == dense_mul(&mg, &mf);
            prop_assert_eq!(f.commutes(&g).unwrap(), dense_commute);
        }

        #[test]
        fn fixed_points_match_scan((p, a, b, _c, _d) in arb_perm(1024)) {
            let f = ap(unit_near(a, p), b, p);
            let scan: Vec<u64> = (0..p).filter(|&x| f.apply(x) == x).collect();
            prop_assert_eq!(f.fixed_point_count(), scan.len() as u64);
            prop_assert_eq!(f.fixed_points(), scan);
        }

        #[test]
        fn group_laws((p, a, b, c, d) in arb_perm(200), x in 0u64..200, e in 0u64..200, h in 0u64..200) {
            let f = ap(unit_near(a, p), b, p);
            let g = ap(unit_near(c, p), d, p);
            let k = ap(unit_near(e % p, p), h % p, p);
            let x = x % p;
            prop_assert_eq!(f.compose(&g).unwrap().apply(x), f.apply(g.apply(x)));
            prop_assert_eq!(
                f.compose(&g).unwrap().compose(&k).unwrap(),
                f.compose(&g.compose(&k).unwrap()).unwrap()
            );
            prop_assert!(f.compose(&f.invert()).unwrap().is_identity());
            prop_assert!(f.invert().compose(&f).unwrap().is_identity());
            let w = PermWord::new(vec![(f, Exponent::Plus), (g, Exponent::Minus), (k, Exponent::Plus)]).unwrap();
            prop_assert!(w.concat(&w.formal_inverse()).unwrap().reduce().is_identity());
        }
    }
}
