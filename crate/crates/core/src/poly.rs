//! Exact bivariate polynomials with rational coefficients: the ground truth
//! for the reflection identities.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// `Σ c_{ab} x^a y^b`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(rat(c), 0, 0)
    }

    pub fn monomial(c: BigRational, a: u32, b: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    /// `c x^a y^b` with an integer coefficient.
    pub fn term(c: i64, a: u32, b: u32) -> Self {
        Self::monomial(rat(c), a, b)
    }

    pub fn x() -> Self {
        Self::term(1, 1, 0)
    }

    pub fn y() -> Self {
        Self::term(1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, key: (u32, u32), c: BigRational) {
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&rat(c))
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a > 0 {
                out.insert_add((a - 1, b), c * rat(a as i64));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if b > 0 {
                out.insert_add((a, b - 1), c * rat(b as i64));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        &self.dx().dx() + &self.dy().dy()
    }

    pub fn bilaplacian(&self) -> Self {
        self.laplacian().laplacian()
    }

    /// `p(x, -y)`.
    pub fn mirror_y(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((a, b), if b % 2 == 1 { -c.clone() } else { c.clone() }))
                .collect(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c.to_f64().unwrap_or(f64::NAN) * x.powi(a as i32) * y.powi(b as i32))
            .sum()
    }

    pub fn eval_exact(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(a, b), c) in &self.terms {
            acc += c * num_traits::pow(x.clone(), a as usize) * num_traits::pow(y.clone(), b as usize);
        }
        acc
    }

    /// Largest |coefficient| as a float (for scaling tolerances).
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    /// `y² p(x, y)` with `p` of degree ≤ `deg_p` and integer coefficients in
    /// `[-5, 5]`; such polynomials vanish with their y-derivative on `y = 0`.
    pub fn random_clamped<R: Rng>(rng: &mut R, deg_p: u32) -> Self {
        let mut p = Self::zero();
        for total in 0..=deg_p {
            for a in 0..=total {
                let c: i64 = rng.random_range(-5..=5);
                p = &p + &Self::term(c, a, total - a);
            }
        }
        if p.is_zero() {
            p = Self::constant(1);
        }
        &Self::term(1, 0, 2) * &p
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0, 0)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.insert_add(*k, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                out.insert_add((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calculus_on_known_polynomials() {
        // Δ²(x³y³) = 72xy
        let p = Poly::term(1, 3, 3);
        assert_eq!(p.bilaplacian(), Poly::term(72, 1, 1));
        assert_eq!(Poly::term(1, 4, 0).bilaplacian(), Poly::constant(24));
        assert_eq!(Poly::term(1, 2, 2).bilaplacian(), Poly::constant(8));
        let m = (&Poly::term(2, 1, 3) + &Poly::term(1, 0, 2)).mirror_y();
        assert_eq!(m, &Poly::term(-2, 1, 3) + &Poly::term(1, 0, 2));
    }

    #[test]
    fn algebra_identities() {
        let p = &Poly::x() + &Poly::term(3, 0, 2);
        let q = &Poly::y() - &Poly::constant(2);
        assert_eq!((&p * &q).dx(), &(&p.dx() * &q) + &(&p * &q.dx()));
        assert!((&p - &p).is_zero());
        assert_eq!((&p * &q).degree(), 3);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(p.eval_exact(&half, &half), BigRational::new(BigInt::from(5), BigInt::from(4)));
    }
}
