//! Polynomials over a small prime field, used by the modular factorizer.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rand::Rng;

/// Dense polynomial over 𝔽ₚ, ascending coefficients, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyP {
    pub c: Vec<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct Field {
    pub p: u64,
}

impl PolyP {
    pub fn new(mut c: Vec<u64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self { c: vec![1] }
    }

    pub fn x() -> Self {
        Self { c: vec![0, 1] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!(p < (1 << 31));
        Self { p }
    }

    pub fn reduce_big(&self, x: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let r = ((x % &p) + &p) % &p;
        r.to_u64().expect("residue fits")
    }

    pub fn from_ints(&self, coeffs: &[BigInt]) -> PolyP {
        PolyP::new(coeffs.iter().map(|c| self.reduce_big(c)).collect())
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn padd(&self, a: &PolyP, b: &PolyP) -> PolyP {
        let n = a.c.len().max(b.c.len());
        PolyP::new(
            (0..n)
                .map(|i| self.add(*a.c.get(i).unwrap_or(&0), *b.c.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    pub fn psub(&self, a: &PolyP, b: &PolyP) -> PolyP {
        let n = a.c.len().max(b.c.len());
        PolyP::new(
            (0..n)
                .map(|i| self.sub(*a.c.get(i).unwrap_or(&0), *b.c.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    pub fn pmul(&self, a: &PolyP, b: &PolyP) -> PolyP {
        if a.is_zero() || b.is_zero() {
            return PolyP::zero();
        }
        let mut out = vec![0u64; a.c.len() + b.c.len() - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % self.p;
            }
        }
        PolyP::new(out)
    }

    pub fn scale(&self, a: &PolyP, s: u64) -> PolyP {
        PolyP::new(a.c.iter().map(|&x| self.mul(x, s)).collect())
    }

    pub fn monic(&self, a: &PolyP) -> PolyP {
        if a.is_zero() {
            return a.clone();
        }
        self.scale(a, self.inv(a.lead()))
    }

    pub fn divrem(&self, a: &PolyP, b: &PolyP) -> (PolyP, PolyP) {
        let db = b.degree().expect("division by zero polynomial");
        let inv = self.inv(b.lead());
        let mut r = a.c.clone();
        if r.len() <= db {
            return (PolyP::zero(), a.clone());
        }
        let mut q = vec![0u64; r.len() - db];
        for i in (0..q.len()).rev() {
            let coef = self.mul(r[i + db], inv);
            if coef == 0 {
                continue;
            }
            q[i] = coef;
            for (j, &bj) in b.c.iter().enumerate() {
                r[i + j] = self.sub(r[i + j], self.mul(coef, bj));
            }
        }
        (PolyP::new(q), PolyP::new(r))
    }

    pub fn rem(&self, a: &PolyP, b: &PolyP) -> PolyP {
        self.divrem(a, b).1
    }

    pub fn gcd(&self, a: &PolyP, b: &PolyP) -> PolyP {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// Returns `(g, s, t)` with `s·a + t·b = g = gcd(a, b)` monic.
    pub fn xgcd(&self, a: &PolyP, b: &PolyP) -> (PolyP, PolyP, PolyP) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (PolyP::one(), PolyP::zero());
        let (mut t0, mut t1) = (PolyP::zero(), PolyP::one());
        while !r1.is_zero() {
            let (q, r) = self.divrem(&r0, &r1);
            let s2 = self.psub(&s0, &self.pmul(&q, &s1));
            let t2 = self.psub(&t0, &self.pmul(&q, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        let inv = self.inv(r0.lead());
        (
            self.scale(&r0, inv),
            self.scale(&s0, inv),
            self.scale(&t0, inv),
        )
    }

    pub fn derivative(&self, a: &PolyP) -> PolyP {
        PolyP::new(
            a.c.iter()
                .enumerate()
                .skip(1)
                .map(|(k, &x)| self.mul(x, k as u64 % self.p))
                .collect(),
        )
    }

    pub fn powmod(&self, base: &PolyP, exp: &BigUint, modulus: &PolyP) -> PolyP {
        let mut result = PolyP::one();
        let mut b = self.rem(base, modulus);
        for i in 0..exp.bits() {
            if exp.bit(i) {
                result = self.rem(&self.pmul(&result, &b), modulus);
            }
            b = self.rem(&self.pmul(&b, &b), modulus);
        }
        result
    }

    /// Distinct-degree factorization of a monic square-free polynomial:
    /// pairs `(product of all irreducible factors of degree d, d)`.
    pub fn distinct_degree(&self, f: &PolyP) -> Vec<(PolyP, usize)> {
        let mut out = Vec::new();
        let mut rest = f.clone();
        let mut h = PolyP::x();
        let p = BigUint::from(self.p);
        let mut d = 0;
        while rest.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = self.powmod(&h, &p, &rest);
            let g = self.gcd(&self.psub(&h, &PolyP::x()), &rest);
            if g.degree().unwrap_or(0) > 0 {
                rest = self.divrem(&rest, &g).0;
                h = self.rem(&h, &rest);
                out.push((g, d));
            }
        }
        if rest.degree().unwrap_or(0) > 0 {
            let deg = rest.degree().unwrap();
            out.push((rest, deg));
        }
        out
    }

    /// Cantor–Zassenhaus equal-degree splitting (odd `p`).
    pub fn equal_degree<R: Rng>(&self, f: &PolyP, d: usize, rng: &mut R) -> Vec<PolyP> {
        let n = f.degree().unwrap_or(0);
        if n == d {
            return vec![self.monic(f)];
        }
        let exp = (BigUint::from(self.p).pow(d as u32) - BigUint::one()) >> 1;
        loop {
            let a = PolyP::new((0..n).map(|_| rng.gen_range(0..self.p)).collect());
            if a.degree().unwrap_or(0) < 1 {
                continue;
            }
            let g = self.gcd(&a, f);
            let split = if g.degree().unwrap_or(0) > 0 {
                g
            } else {
                let b = self.psub(&self.powmod(&a, &exp, f), &PolyP::one());
                self.gcd(&b, f)
            };
            let ds = split.degree().unwrap_or(0);
            if ds > 0 && ds < n {
                let other = self.divrem(f, &split).0;
                let mut out = self.equal_degree(&split, d, rng);
                out.extend(self.equal_degree(&other, d, rng));
                return out;
            }
        }
    }

    pub fn is_squarefree(&self, f: &PolyP) -> bool {
        let df = self.derivative(f);
        !df.is_zero() && self.gcd(f, &df).degree() == Some(0)
    }
}

pub fn to_bigint(a: &PolyP) -> Vec<BigInt> {
    a.c.iter().map(|&x| BigInt::from(x)).collect()
}

/// Sieve of small odd primes.
pub fn odd_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize + 1;
    let mut sieve = vec![true; n];
    let mut out = Vec::new();
    for i in 2..n {
        if sieve[i] {
            if i > 2 {
                out.push(i as u64);
            }
            let mut j = i * i;
            while j < n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}
