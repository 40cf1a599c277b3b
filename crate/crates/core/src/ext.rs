//! The quadratic quotient ring Z_{p^e}[t] / (t^2 + c1*t + c0): arithmetic,
//! inverses via the conjugate norm, element orders, and the splitting of the
//! map's characteristic polynomial f(t) = t^2 - b*t - a.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ring::{factorize, Modulus, RingElem};

/// An element u0 + u1*t of a quadratic quotient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtElem {
    u0: RingElem,
    u1: RingElem,
}

impl ExtElem {
    pub fn parts(self) -> (RingElem, RingElem) {
        (self.u0, self.u1)
    }
}

impl std::fmt::Display for ExtElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}t", self.u0, self.u1)
    }
}

/// Z_{p^e}[t] / (t^2 + c1*t + c0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadExt {
    m: Modulus,
    c1: RingElem,
    c0: RingElem,
}

impl QuadExt {
    pub fn new(m: Modulus, c1: RingElem, c0: RingElem) -> QuadExt {
        QuadExt { m, c1, c0 }
    }

    pub fn base(&self) -> &Modulus {
        &self.m
    }

    pub fn modulus_coeffs(&self) -> (RingElem, RingElem) {
        (self.c1, self.c0)
    }

    pub fn elem(&self, u0: RingElem, u1: RingElem) -> ExtElem {
        ExtElem { u0, u1 }
    }

    pub fn scalar(&self, c: RingElem) -> ExtElem {
        ExtElem { u0: c, u1: self.m.zero() }
    }

    pub fn one(&self) -> ExtElem {
        self.scalar(self.m.one())
    }

    /// The class of t.
    pub fn gen(&self) -> ExtElem {
        ExtElem { u0: self.m.zero(), u1: self.m.one() }
    }

    pub fn add(&self, x: ExtElem, y: ExtElem) -> ExtElem {
        ExtElem { u0: self.m.add(x.u0, y.u0), u1: self.m.add(x.u1, y.u1) }
    }

    pub fn sub(&self, x: ExtElem, y: ExtElem) -> ExtElem {
        ExtElem { u0: self.m.sub(x.u0, y.u0), u1: self.m.sub(x.u1, y.u1) }
    }

    /// Product, reducing t^2 = -c1*t - c0.
    pub fn mul(&self, x: ExtElem, y: ExtElem) -> ExtElem {
        let m = &self.m;
        let cross = m.add(m.mul(x.u0, y.u1), m.mul(x.u1, y.u0));
        let high = m.mul(x.u1, y.u1);
        ExtElem {
            u0: m.sub(m.mul(x.u0, y.u0), m.mul(high, self.c0)),
            u1: m.sub(cross, m.mul(high, self.c1)),
        }
    }

    pub fn pow(&self, x: ExtElem, mut n: u128) -> ExtElem {
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

    /// Norm x * x' where x' = u0 - u1*c1 - u1*t is the conjugate by the
    /// other root of the modulus polynomial; always a scalar.
    pub fn norm(&self, x: ExtElem) -> RingElem {
        let m = &self.m;
        let sq = m.mul(x.u0, x.u0);
        let mixed = m.mul(self.c1, m.mul(x.u0, x.u1));
        m.add(m.sub(sq, mixed), m.mul(self.c0, m.mul(x.u1, x.u1)))
    }

    /// Inverse x' / norm(x), defined whenever the norm is a unit.
    pub fn inverse(&self, x: ExtElem) -> Result<ExtElem, Error> {
        let m = &self.m;
        let n = self.norm(x);
        if !m.is_unit(n) {
            return Err(Error::NotAUnit(n.value()));
        }
        let n_inv = m.inverse(n)?;
        let conj = ExtElem { u0: m.sub(x.u0, m.mul(x.u1, self.c1)), u1: m.neg(x.u1) };
        Ok(ExtElem { u0: m.mul(conj.u0, n_inv), u1: m.mul(conj.u1, n_inv) })
    }

    /// Least n >= 1 with x^n = 1: divide-down from the unit-group order
    /// p^(2(e-1)) * (p^2 - 1), assembled as factored pieces to avoid
    /// overflow. Requires the modulus polynomial to be basic irreducible.
    pub fn order(&self, x: ExtElem) -> Result<u64, Error> {
        if !self.m.is_unit(self.norm(x)) {
            return Err(Error::NotAUnit(self.norm(x).value()));
        }
        let (p, e) = (self.m.p(), self.m.e());
        let mut fact = factorize(p - 1).merged(&factorize(p + 1));
        if e >= 2 {
            fact.push(p, 2 * (e - 1));
        }
        let group: u128 = (p as u128).pow(2 * (e - 1)) * (p as u128 * p as u128 - 1);
        if self.pow(x, group) != self.one() {
            return Err(Error::NoFiniteOrder);
        }
        let mut ord = group;
        for &(l, _) in fact.prime_powers() {
            let l = l as u128;
            while ord % l == 0 && self.pow(x, ord / l) == self.one() {
                ord /= l;
            }
        }
        Ok(ord as u64)
    }
}

/// How f(t) = t^2 - b*t - a decomposes over Z_{p^e}, given a unit
/// discriminant 4a + b^2. Roots always satisfy alpha + beta = b and
/// alpha * beta = -a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootsResult {
    Split { alpha: RingElem, beta: RingElem },
    Irreducible { ext: QuadExt, alpha: ExtElem, beta: ExtElem },
}

impl RootsResult {
    /// The same decomposition with the two roots' roles exchanged.
    pub fn swapped(&self) -> RootsResult {
        match *self {
            RootsResult::Split { alpha, beta } => RootsResult::Split { alpha: beta, beta: alpha },
            RootsResult::Irreducible { ext, alpha, beta } => {
                RootsResult::Irreducible { ext, alpha: beta, beta: alpha }
            }
        }
    }
}

/// Splits f(t) = t^2 - b*t - a over Z_{p^e} when the discriminant 4a + b^2
/// is a square unit, and otherwise adjoins a root: alpha = the class of t in
/// Z_{p^e}[t]/(f), beta = b - alpha.
pub fn roots_of_char_poly(m: &Modulus, a: RingElem, b: RingElem) -> Result<RootsResult, Error> {
    let four_a = m.add(m.add(a, a), m.add(a, a));
    let disc = m.add(four_a, m.mul(b, b));
    if !m.is_unit(disc) {
        return Err(Error::NotAUnit(disc.value()));
    }
    let half = m.inverse(m.elem(2))?;
    if m.is_quadratic_residue(disc)? {
        let r = m.sqrt(disc)?;
        let alpha = m.mul(half, m.add(b, r));
        let beta = m.mul(half, m.sub(b, r));
        Ok(RootsResult::Split { alpha, beta })
    } else {
        let ext = QuadExt::new(*m, m.neg(b), m.neg(a));
        let alpha = ext.gen();
        let beta = ext.sub(ext.scalar(b), alpha);
        Ok(RootsResult::Irreducible { ext, alpha, beta })
    }
}

/// An irreducible f stays irreducible mod p (is basic irreducible) iff the
/// discriminant 4a + b^2 is a unit.
pub fn is_basic_irreducible(m: &Modulus, a: RingElem, b: RingElem) -> bool {
    let four_a = m.add(m.add(a, a), m.add(a, a));
    m.is_unit(m.add(four_a, m.mul(b, b)))
}

/// Order of the ratio of the roots of f, without computing the roots: it is
/// the order of the class of t in Z_{p^e}[t] / (g) for
/// g(t) = t^2 + (b^2/a + 2)*t + 1, whose roots are the two root ratios.
pub fn root_ratio_order(m: &Modulus, a: RingElem, b: RingElem) -> Result<u64, Error> {
    let c = m.add(m.mul(m.inverse(a)?, m.mul(b, b)), m.elem(2));
    let g = QuadExt::new(*m, c, m.one());
    g.order(g.gen())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64, e: u32) -> Modulus {
        Modulus::new(p, e).unwrap()
    }

    #[test]
    fn mul_reduces_by_modulus_polynomial() {
        let z13 = m(13, 1);
        let r = QuadExt::new(z13, z13.elem(5), z13.elem(1));
        // t^2 = -5t - 1 = 8t + 12
        let t2 = r.mul(r.gen(), r.gen());
        assert_eq!(t2, r.elem(z13.elem(12), z13.elem(8)));

        let z25 = m(5, 2);
        let r = QuadExt::new(z25, z25.elem(21), z25.elem(1));
        let t2 = r.mul(r.gen(), r.gen());
        assert_eq!(t2, r.elem(z25.elem(24), z25.elem(4)));
    }

    #[test]
    fn inverse_example() {
        let z13 = m(13, 1);
        let r = QuadExt::new(z13, z13.elem(5), z13.elem(1));
        // t * (-t - 5) = -t^2 - 5t = 1, so t^-1 = 8 + 12t
        let inv = r.inverse(r.gen()).unwrap();
        assert_eq!(inv, r.elem(z13.elem(8), z13.elem(12)));
        assert_eq!(r.mul(r.gen(), inv), r.one());
    }

    #[test]
    fn inverse_roundtrip_and_nonunits() {
        let z25 = m(5, 2);
        let r = QuadExt::new(z25, z25.elem(21), z25.elem(1));
        for u0 in 0..25 {
            for u1 in 0..25 {
                let x = r.elem(z25.elem(u0), z25.elem(u1));
                match r.inverse(x) {
                    Ok(inv) => assert_eq!(r.mul(x, inv), r.one()),
                    Err(_) => assert!(!z25.is_unit(r.norm(x))),
                }
            }
        }
    }

    #[test]
    fn order_examples() {
        let z13 = m(13, 1);
        let r = QuadExt::new(z13, z13.elem(5), z13.elem(1));
        assert_eq!(r.order(r.gen()).unwrap(), 7);
        assert_eq!(r.order(r.one()).unwrap(), 1);

        let z25 = m(5, 2);
        let r = QuadExt::new(z25, z25.elem(21), z25.elem(1));
        assert_eq!(r.order(r.gen()).unwrap(), 15);
    }

    #[test]
    fn order_matches_brute_force_power_walk() {
        for (p, e, c1, c0) in [(13, 1, 5, 1), (5, 2, 21, 1), (3, 3, 1, 2)] {
            let md = m(p, e);
            let r = QuadExt::new(md, md.elem(c1), md.elem(c0));
            for u0 in 0..md.q().min(30) {
                for u1 in 0..md.q().min(30) {
                    let x = r.elem(md.elem(u0), md.elem(u1));
                    let Ok(ord) = r.order(x) else { continue };
                    let mut acc = r.one();
                    let brute = (1..)
                        .map(|s| {
                            acc = r.mul(acc, x);
                            (s, acc)
                        })
                        .find(|&(_, y)| y == r.one())
                        .map(|(s, _)| s)
                        .unwrap();
                    assert_eq!(ord, brute);
                }
            }
        }
    }

    #[test]
    fn root_ratio_order_examples() {
        let z13 = m(13, 1);
        // a = 1, b = 4: g = t^2 + 5t + 1
        assert_eq!(root_ratio_order(&z13, z13.elem(1), z13.elem(4)).unwrap(), 7);
        let z25 = m(5, 2);
        // a = 6, b = 8: g = t^2 + 21t + 1
        assert_eq!(root_ratio_order(&z25, z25.elem(6), z25.elem(8)).unwrap(), 15);
        let z5 = m(5, 1);
        // the reduction mod 5: g = t^2 + t + 1
        assert_eq!(root_ratio_order(&z5, z5.elem(6), z5.elem(8)).unwrap(), 3);
    }

    #[test]
    fn roots_examples() {
        let z13 = m(13, 1);
        match roots_of_char_poly(&z13, z13.elem(7), z13.elem(5)).unwrap() {
            // 4*7 + 25 = 53 = 1 mod 13; alpha = (5 + 1)/2 = 3
            RootsResult::Split { alpha, beta } => {
                assert_eq!((alpha.value(), beta.value()), (3, 2));
            }
            _ => panic!("should split"),
        }

        let z25 = m(5, 2);
        match roots_of_char_poly(&z25, z25.elem(8), z25.elem(8)).unwrap() {
            RootsResult::Split { alpha, beta } => {
                assert_eq!((alpha.value(), beta.value()), (22, 11));
            }
            _ => panic!("should split"),
        }

        match roots_of_char_poly(&z13, z13.elem(1), z13.elem(4)).unwrap() {
            RootsResult::Irreducible { ext, alpha, beta } => {
                assert_eq!(ext.modulus_coeffs(), (z13.elem(9), z13.elem(12)));
                assert_eq!(ext.add(alpha, beta), ext.scalar(z13.elem(4)));
            }
            _ => panic!("should be irreducible"),
        }

        // discriminant 4*5 + 25 = 45 in the ideal (5)
        let err = roots_of_char_poly(&z25, z25.elem(5), z25.elem(5));
        assert_eq!(err, Err(Error::NotAUnit(20)));
    }

    #[test]
    fn root_identities_hold_in_both_branches() {
        for (p, e) in [(13, 1), (5, 2), (3, 3)] {
            let md = m(p, e);
            for a in 0..md.q() {
                for b in 0..md.q() {
                    let (a, b) = (md.elem(a), md.elem(b));
                    let Ok(roots) = roots_of_char_poly(&md, a, b) else { continue };
                    match roots {
                        RootsResult::Split { alpha, beta } => {
                            assert_eq!(md.add(alpha, beta), b);
                            assert_eq!(md.mul(alpha, beta), md.neg(a));
                        }
                        RootsResult::Irreducible { ext, alpha, beta } => {
                            assert_eq!(ext.add(alpha, beta), ext.scalar(b));
                            assert_eq!(ext.mul(alpha, beta), ext.scalar(md.neg(a)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn basic_irreducibility_examples() {
        let z25 = m(5, 2);
        // 4*6 + 36 = 60 = 0 mod 5
        assert!(!is_basic_irreducible(&z25, z25.elem(6), z25.elem(6)));
        // 4*6 + 64 = 88 = 3 mod 5
        assert!(is_basic_irreducible(&z25, z25.elem(6), z25.elem(8)));
        let z13 = m(13, 1);
        assert!(is_basic_irreducible(&z13, z13.elem(1), z13.elem(4)));
    }
}
