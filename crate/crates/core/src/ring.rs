//! Exact arithmetic in Z_{p^e} for an odd prime p: inverses, capped p-adic
//! valuations, quadratic residues, square roots with Hensel lifting,
//! multiplicative orders, and small-integer factorization.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A residue in `[0, q)`. Always reduced; construct through [`Modulus::elem`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingElem(u64);

impl RingElem {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for RingElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The modulus q = p^e with p an odd prime, e >= 1 and q < 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus {
    p: u64,
    e: u32,
    q: u64,
}

impl Modulus {
    pub fn new(p: u64, e: u32) -> Result<Self, Error> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotAnOddPrime(p));
        }
        if e == 0 {
            return Err(Error::ZeroExponent);
        }
        let mut q: u64 = 1;
        for _ in 0..e {
            q = q.checked_mul(p).ok_or(Error::ModulusTooLarge)?;
        }
        if q >= 1 << 63 {
            return Err(Error::ModulusTooLarge);
        }
        Ok(Modulus { p, e, q })
    }

    /// The same prime with a smaller exponent; skips revalidation.
    pub fn with_exponent(&self, e: u32) -> Modulus {
        debug_assert!(e >= 1 && e <= self.e);
        Modulus { p: self.p, e, q: self.p.pow(e) }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn elem(&self, v: u64) -> RingElem {
        RingElem(v % self.q)
    }

    pub fn zero(&self) -> RingElem {
        RingElem(0)
    }

    pub fn one(&self) -> RingElem {
        RingElem(1)
    }

    pub fn add(&self, x: RingElem, y: RingElem) -> RingElem {
        let s = x.0 + y.0;
        RingElem(if s >= self.q { s - self.q } else { s })
    }

    pub fn sub(&self, x: RingElem, y: RingElem) -> RingElem {
        RingElem(if x.0 >= y.0 { x.0 - y.0 } else { x.0 + self.q - y.0 })
    }

    pub fn neg(&self, x: RingElem) -> RingElem {
        RingElem(if x.0 == 0 { 0 } else { self.q - x.0 })
    }

    pub fn mul(&self, x: RingElem, y: RingElem) -> RingElem {
        RingElem((x.0 as u128 * y.0 as u128 % self.q as u128) as u64)
    }

    pub fn pow(&self, x: RingElem, mut n: u64) -> RingElem {
        let mut base = x;
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// A residue is a unit iff p does not divide it.
    pub fn is_unit(&self, x: RingElem) -> bool {
        x.0 % self.p != 0
    }

    /// Inverse of a unit, by the extended Euclidean algorithm.
    pub fn inverse(&self, x: RingElem) -> Result<RingElem, Error> {
        if !self.is_unit(x) {
            return Err(Error::NotAUnit(x.0));
        }
        let (mut r0, mut r1) = (self.q as i128, x.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let k = r0 / r1;
            (r0, r1) = (r1, r0 - k * r1);
            (t0, t1) = (t1, t0 - k * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(RingElem(t0.rem_euclid(self.q as i128) as u64))
    }

    /// p-adic valuation capped at e; the valuation of 0 is e.
    pub fn valuation(&self, x: RingElem) -> u32 {
        if x.0 == 0 {
            return self.e;
        }
        let mut v = x.0;
        let mut k = 0;
        while v % self.p == 0 {
            v /= self.p;
            k += 1;
        }
        k
    }

    /// Least n >= 1 with x^n = 1: divide-down from the unit-group order
    /// p^(e-1)(p-1) through its prime factorization.
    pub fn multiplicative_order(&self, x: RingElem) -> Result<u64, Error> {
        if !self.is_unit(x) {
            return Err(Error::NotAUnit(x.0));
        }
        let group = self.p.pow(self.e - 1) * (self.p - 1);
        debug_assert_eq!(self.pow(x, group).0, 1);
        let mut ord = group;
        for &(l, _) in factorize(group).prime_powers() {
            while ord % l == 0 && self.pow(x, ord / l).0 == 1 {
                ord /= l;
            }
        }
        Ok(ord)
    }

    /// Euler's criterion on the reduction mod p. A unit of Z_{p^e} is a
    /// square iff its image in F_p is.
    pub fn is_quadratic_residue(&self, d: RingElem) -> Result<bool, Error> {
        if !self.is_unit(d) {
            return Err(Error::NotAUnit(d.0));
        }
        Ok(pow_mod(d.0 % self.p, (self.p - 1) / 2, self.p) == 1)
    }

    /// Canonical square root of a unit residue: Tonelli-Shanks mod p, then
    /// Newton steps r <- r - (r^2 - d) / (2r); the smaller of the two roots.
    pub fn sqrt(&self, d: RingElem) -> Result<RingElem, Error> {
        if !self.is_quadratic_residue(d)? {
            return Err(Error::NotAResidue(d.0));
        }
        let mut r = self.elem(tonelli_shanks(d.0 % self.p, self.p));
        for _ in 1..self.e {
            let err = self.sub(self.mul(r, r), d);
            let slope = self.inverse(self.add(r, r))?;
            r = self.sub(r, self.mul(err, slope));
        }
        debug_assert_eq!(self.mul(r, r), d);
        Ok(RingElem(r.0.min(self.q - r.0)))
    }
}

/// A factorization into prime powers, ascending by prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn prime_powers(&self) -> &[(u64, u32)] {
        &self.prime_powers
    }

    /// Raise every multiplicity, merging in an extra prime power.
    pub(crate) fn push(&mut self, p: u64, k: u32) {
        match self.prime_powers.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.prime_powers[i].1 += k,
            Err(i) => self.prime_powers.insert(i, (p, k)),
        }
    }

    pub(crate) fn merged(mut self, other: &Factorization) -> Factorization {
        for &(p, k) in &other.prime_powers {
            self.push(p, k);
        }
        self
    }
}

/// Trial division; n = 1 yields the empty factorization.
pub fn factorize(mut n: u64) -> Factorization {
    let mut prime_powers = Vec::new();
    let mut d = 2;
    while d as u128 * d as u128 <= n as u128 {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            prime_powers.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        prime_powers.push((n, 1));
    }
    Factorization { prime_powers }
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(mut base: u64, mut n: u64, m: u64) -> u64 {
    base %= m;
    let mut acc: u64 = 1 % m;
    while n > 0 {
        if n & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        n >>= 1;
    }
    acc
}

/// Square root of a residue n mod an odd prime p; n must be a square.
fn tonelli_shanks(n: u64, p: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(n, (p + 1) / 4, p);
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1).unwrap();
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, (q + 1) / 2, p);
    while t != 1 {
        let i = (1..m)
            .scan(t, |acc, i| {
                *acc = (*acc as u128 * *acc as u128 % p as u128) as u64;
                Some((i, *acc))
            })
            .find(|&(_, sq)| sq == 1)
            .map(|(i, _)| i)
            .unwrap();
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = (b as u128 * b as u128 % p as u128) as u64;
        t = (t as u128 * c as u128 % p as u128) as u64;
        r = (r as u128 * b as u128 % p as u128) as u64;
    }
    r
}
