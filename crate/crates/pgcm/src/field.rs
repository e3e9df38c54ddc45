//! Arithmetic in the prime field F_p and quadratic-residue machinery.
//!
//! A [`PrimeContext`] fixes the prime and, for odd p, the canonical quadratic
//! non-residue `eta` (the least positive one), which parameterizes the
//! classification tables.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// Element of F_p, stored reduced into `[0, p)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize)]
pub struct Fp(pub u32);

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const ZERO: Fp = Fp(0);
pub const ONE: Fp = Fp(1);

/// Default upper bound on accepted primes.
pub const DEFAULT_PRIME_CAP: u32 = 10_000;

/// The prime p together with the fixed least quadratic non-residue (odd p).
///
/// Immutable after construction; cheap to copy.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct PrimeContext {
    p: u32,
    eta: Option<Fp>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeContext {
    /// Builds the context for a prime `p` with the default cap.
    pub fn new(p: u32) -> Result<Self> {
        Self::with_cap(p, DEFAULT_PRIME_CAP)
    }

    pub fn with_cap(p: u32, cap: u32) -> Result<Self> {
        if p > cap {
            return Err(Error::PrimeCap(p, cap));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let eta = if p == 2 {
            None
        } else {
            let mut e = None;
            for a in 2..p {
                if !euler_is_square(p, a) {
                    e = Some(Fp(a));
                    break;
                }
            }
            e
        };
        if p != 2 && eta.is_none() {
            return Err(Error::Internal(format!("no non-residue found mod {p}")));
        }
        Ok(PrimeContext { p, eta })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_two(&self) -> bool {
        self.p == 2
    }

    /// The fixed quadratic non-residue; absent for p = 2.
    pub fn eta(&self) -> Result<Fp> {
        self.eta.ok_or(Error::NoEta)
    }

    /// Reduces an arbitrary signed integer into the field.
    pub fn el(&self, v: i64) -> Fp {
        let p = self.p as i64;
        Fp(v.rem_euclid(p) as u32)
    }

    pub fn add(&self, a: Fp, b: Fp) -> Fp {
        let s = a.0 + b.0;
        Fp(if s >= self.p { s - self.p } else { s })
    }

    pub fn sub(&self, a: Fp, b: Fp) -> Fp {
        Fp(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    pub fn neg(&self, a: Fp) -> Fp {
        Fp(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    pub fn mul(&self, a: Fp, b: Fp) -> Fp {
        Fp(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32)
    }

    pub fn pow(&self, a: Fp, mut e: u64) -> Fp {
        let mut base = a;
        let mut acc = ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(&self, a: Fp) -> Result<Fp> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero(self.p));
        }
        Ok(self.pow(a, (self.p - 2) as u64))
    }

    pub fn div(&self, a: Fp, b: Fp) -> Result<Fp> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// True iff `a` lies in (F_p^*)^2 or is zero. Use [`Fp`] equality with
    /// [`ZERO`] to distinguish the zero case.
    pub fn is_square(&self, a: Fp) -> bool {
        if a.0 == 0 || self.p == 2 {
            return true;
        }
        euler_is_square(self.p, a.0)
    }

    /// True iff `a` is a nonzero square.
    pub fn is_nonzero_square(&self, a: Fp) -> bool {
        a.0 != 0 && self.is_square(a)
    }

    /// Least square root of `a`, when one exists.
    pub fn sqrt(&self, a: Fp) -> Result<Fp> {
        for s in 0..self.p {
            if self.mul(Fp(s), Fp(s)) == a {
                return Ok(Fp(s));
            }
        }
        Err(Error::NotASquare(a.0, self.p))
    }

    /// All field elements in order.
    pub fn elements(&self) -> impl Iterator<Item = Fp> {
        (0..self.p).map(Fp)
    }

    /// Nonzero field elements in order.
    pub fn units(&self) -> impl Iterator<Item = Fp> {
        (1..self.p).map(Fp)
    }

    /// A non-square `zeta` with `zeta - 1` a nonzero square, together with
    /// `gamma = sqrt(zeta - 1)`. Exists for every odd prime; used to rewrite
    /// diag(1,1,eta) into the identity under quasi-congruence.
    pub fn zeta(&self) -> Result<(Fp, Fp)> {
        if self.p == 2 {
            return Err(Error::NoEta);
        }
        for z in 2..self.p {
            let zeta = Fp(z);
            let zm1 = self.sub(zeta, ONE);
            if !self.is_square(zeta) && self.is_nonzero_square(zm1) {
                return Ok((zeta, self.sqrt(zm1)?));
            }
        }
        Err(Error::Internal(format!(
            "no zeta with zeta non-square and zeta-1 square mod {}",
            self.p
        )))
    }
}

fn euler_is_square(p: u32, a: u32) -> bool {
    // a^((p-1)/2) == 1 for nonzero squares.
    debug_assert!(p > 2 && a % p != 0);
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_examples() {
        assert_eq!(PrimeContext::new(3).unwrap().eta().unwrap(), Fp(2));
        assert_eq!(PrimeContext::new(7).unwrap().eta().unwrap(), Fp(3));
        assert!(PrimeContext::new(2).unwrap().eta().is_err());
    }

    #[test]
    fn rejects_bad_primes() {
        assert_eq!(PrimeContext::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeContext::new(9), Err(Error::NotPrime(9)));
        assert_eq!(
            PrimeContext::with_cap(10_007, 10_000),
            Err(Error::PrimeCap(10_007, 10_000))
        );
    }

    #[test]
    fn square_examples() {
        let f5 = PrimeContext::new(5).unwrap();
        assert!(!f5.is_square(Fp(2)));
        assert!(f5.is_square(Fp(4)));
        // Exhaustive square table for p = 13.
        let f13 = PrimeContext::new(13).unwrap();
        let table: std::collections::HashSet<u32> =
            (1..13).map(|a| a * a % 13).collect();
        for a in 1..13 {
            assert_eq!(f13.is_square(Fp(a)), table.contains(&a), "a = {a}");
        }
        assert!(!f13.is_square(Fp(5)));
    }

    #[test]
    fn inverse_round_trip() {
        let ctx = PrimeContext::new(101).unwrap();
        // Extended-gcd style oracle: multiply back.
        let a = Fp(37);
        let inv = ctx.inv(a).unwrap();
        assert_eq!(ctx.mul(a, inv), ONE);
        for a in ctx.units() {
            assert_eq!(ctx.inv(ctx.inv(a).unwrap()).unwrap(), a);
        }
        assert!(ctx.inv(ZERO).is_err());
    }

    #[test]
    fn square_counts_and_euler_agreement() {
        for p in [3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
        {
            let ctx = PrimeContext::new(p).unwrap();
            let squares: std::collections::HashSet<u32> =
                (1..p).map(|a| (a as u64 * a as u64 % p as u64) as u32).collect();
            assert_eq!(squares.len() as u32, (p - 1) / 2);
            for a in 1..p {
                assert_eq!(ctx.is_square(Fp(a)), squares.contains(&a));
            }
            // eta least: everything below is a square.
            let eta = ctx.eta().unwrap();
            assert!(!ctx.is_square(eta));
            for b in 1..eta.0 {
                assert!(ctx.is_square(Fp(b)));
            }
        }
    }

    #[test]
    fn sqrt_is_least_root() {
        let ctx = PrimeContext::new(13).unwrap();
        for a in ctx.elements() {
            if ctx.is_square(a) {
                let s = ctx.sqrt(a).unwrap();
                assert_eq!(ctx.mul(s, s), a);
                assert!(s.0 <= ctx.neg(s).0 || a == ZERO);
            } else {
                assert!(ctx.sqrt(a).is_err());
            }
        }
    }

    #[test]
    fn zeta_exists_for_small_primes() {
        for p in [3u32, 5, 7, 11, 13] {
            let ctx = PrimeContext::new(p).unwrap();
            let (zeta, gamma) = ctx.zeta().unwrap();
            assert!(!ctx.is_square(zeta));
            assert_eq!(ctx.mul(gamma, gamma), ctx.sub(zeta, ONE));
        }
    }
}
