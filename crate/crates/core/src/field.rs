//! Finite fields `F_{p^e}` with table-driven arithmetic.
//!
//! Elements are stored by their canonical key `sum c_i p^i`, where
//! `c_0 + c_1 t + ... + c_{e-1} t^{e-1}` is the little-endian coefficient
//! vector modulo the defining polynomial. Multiplication goes through
//! discrete log / antilog tables built once at construction; fields here
//! never exceed a few tens of thousands of elements.

use std::fmt;

use crate::error::{Error, Result};

/// An element of a [`FieldSpec`], identified by its canonical key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn key(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

const MAX_FIELD_SIZE: u64 = 1 << 20;
const ADD_TABLE_LIMIT: u32 = 1024;

/// A finite field `F_q`, `q = p^e`, with its deterministic defining polynomial.
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    // antilog table, doubled so that log a + log b never needs a reduction
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u16>>,
    neg: Vec<u32>,
    trace: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q` as `p^e` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = *prime_factors(q).first()?;
    let mut e = 0;
    let mut m = q;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p as u32, e))
}

/// Dense polynomial helpers over the prime field, used only while building tables.
mod fp {
    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let inv_lead = inv(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top] * inv_lead % p;
            if c != 0 {
                for (i, &mi) in m.iter().enumerate() {
                    let idx = top - dm + i;
                    r[idx] = (r[idx] + p - c * mi % p) % p;
                }
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }

    pub fn powmod(base: &[u64], mut n: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while n > 0 {
            if n & 1 == 1 {
                acc = mulmod(&acc, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            n >>= 1;
        }
        rem(&acc, m, p)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut n = p - 2;
        while n > 0 {
            if n & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            n >>= 1;
        }
        r
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    /// Rabin's irreducibility test for a monic polynomial of degree `e`.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let e = (f.len() - 1) as u64;
        if e == 1 {
            return true;
        }
        let x = vec![0u64, 1];
        let mut frob = vec![x.clone()];
        for _ in 0..e {
            let last = frob.last().unwrap().clone();
            frob.push(powmod(&last, p, f, p));
        }
        if !sub(&frob[e as usize], &rem(&x, f, p), p).is_empty() {
            return false;
        }
        for r in super::prime_factors(e) {
            let h = sub(&frob[(e / r) as usize], &x, p);
            let g = gcd(&h, f, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}

impl FieldSpec {
    /// Builds `F_{p^e}` with the lexicographically smallest monic irreducible
    /// modulus, coefficients compared from degree `e-1` down to `0`.
    pub fn new(p: u32, e: u32) -> Result<FieldSpec> {
        if p.is_multiple_of(2) || !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("p = {p} is not an odd prime")));
        }
        if e == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        let q64 = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::InvalidField(format!("{p}^{e} exceeds the supported size")))?;
        let q = q64 as u32;
        let modulus = Self::find_modulus(p, e);
        let pm: Vec<u64> = modulus.iter().map(|&c| c as u64).collect();
        let slow_mul = |a: u32, b: u32| -> u32 {
            let da = digits(a, p, e);
            let db = digits(b, p, e);
            let prod = fp::mulmod(&da, &db, &pm, p as u64);
            undigits(&prod, p)
        };
        let slow_pow = |a: u32, mut n: u64| -> u32 {
            let mut acc = 1u32;
            let mut b = a;
            while n > 0 {
                if n & 1 == 1 {
                    acc = slow_mul(acc, b);
                }
                b = slow_mul(b, b);
                n >>= 1;
            }
            acc
        };
        let order = q64 - 1;
        let divisors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| divisors.iter().all(|&r| slow_pow(g, order / r) != 1))
            .expect("multiplicative group is cyclic");
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..n {
            exp[i] = cur;
            exp[i + n] = cur;
            log[cur as usize] = i as u32;
            cur = slow_mul(cur, generator);
        }
        debug_assert_eq!(cur, 1);

        let neg: Vec<u32> = (0..q)
            .map(|a| {
                let d: Vec<u64> = digits(a, p, e).iter().map(|&c| (p as u64 - c) % p as u64).collect();
                undigits(&d, p)
            })
            .collect();

        let add_table = (q <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = add_digits(a, b, p, e) as u16;
                }
            }
            t
        });

        let mut spec = FieldSpec { p, e, q, modulus, exp, log, add_table, neg, trace: Vec::new() };
        spec.trace = (0..q)
            .map(|x| {
                let mut acc = 0u32;
                let mut y = x;
                for _ in 0..e {
                    acc = spec.add_raw(acc, y);
                    y = spec.pow_raw(y, p as u64);
                }
                debug_assert!(acc < p);
                acc
            })
            .collect();
        Ok(spec)
    }

    fn find_modulus(p: u32, e: u32) -> Vec<u32> {
        if e == 1 {
            return vec![0, 1];
        }
        let count = (p as u64).pow(e);
        for n in 0..count {
            // n's base-p digits, most significant = c_{e-1}
            let mut coeffs: Vec<u64> = digits(n as u32, p, e);
            coeffs.push(1);
            if coeffs[0] == 0 {
                continue;
            }
            if fp::is_irreducible(&coeffs, p as u64) {
                return coeffs.iter().map(|&c| c as u32).collect();
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Defining polynomial, little-endian, monic of degree `e`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    pub fn elem_from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() > self.e as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::OutOfRange(format!("coefficients {coeffs:?} for F_{}", self.q)));
        }
        Ok(FieldElem(undigits(&coeffs.iter().map(|&c| c as u64).collect::<Vec<_>>(), self.p)))
    }

    pub fn coeffs(&self, x: FieldElem) -> Vec<u32> {
        digits(x.0, self.p, self.e).into_iter().map(|c| c as u32).collect()
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn add_raw(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[(a * self.q + b) as usize] as u32,
            None => add_digits(a, b, self.p, self.e),
        }
    }
    #[inline]
    pub fn neg_raw(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn sub_raw(&self, a: u32, b: u32) -> u32 {
        self.add_raw(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }
    /// Panics on zero.
    #[inline]
    pub fn inv_raw(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let n = self.q - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }
    #[inline]
    pub fn pow_raw(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (n % order)) % order) as usize]
    }
    /// Discrete logarithm to the fixed generator; `None` for zero.
    #[inline]
    pub fn log_raw(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }
    #[inline]
    pub fn exp_raw(&self, i: u64) -> u32 {
        self.exp[(i % (self.q as u64 - 1)) as usize]
    }
    #[inline]
    pub fn trace_raw(&self, a: u32) -> u32 {
        self.trace[a as usize]
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.add_raw(a.0, b.0))
    }
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.sub_raw(a.0, b.0))
    }
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.neg_raw(a.0))
    }
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.mul_raw(a.0, b.0))
    }
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        (!a.is_zero()).then(|| FieldElem(self.inv_raw(a.0)))
    }
    pub fn pow(&self, a: FieldElem, n: u64) -> FieldElem {
        FieldElem(self.pow_raw(a.0, n))
    }

    /// `tr_{F_q/F_p}(x)`, returned as an integer in `0..p`.
    pub fn trace_to_prime(&self, x: FieldElem) -> u32 {
        self.trace[x.0 as usize]
    }

    /// `x -> x^{p^k}`.
    pub fn frobenius(&self, x: FieldElem, k: u32) -> FieldElem {
        FieldElem(self.pow_raw(x.0, (self.p as u64).pow(k)))
    }

    pub fn is_prime_field(&self) -> bool {
        self.e == 1
    }

    /// Text encoding: an integer for prime fields, `[c0,c1,...]` otherwise.
    pub fn encode(&self, x: FieldElem) -> String {
        if self.e == 1 {
            x.0.to_string()
        } else {
            let cs: Vec<String> = self.coeffs(x).iter().map(|c| c.to_string()).collect();
            format!("[{}]", cs.join(","))
        }
    }

    pub fn decode(&self, s: &str) -> Result<FieldElem> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad field element {s:?} for F_{}", self.q));
        if self.e == 1 {
            let v: u32 = s.parse().map_err(|_| bad())?;
            if v >= self.p {
                return Err(bad());
            }
            return Ok(FieldElem(v));
        }
        let inner = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let cs: std::result::Result<Vec<u32>, _> = inner.split(',').map(|c| c.trim().parse::<u32>()).collect();
        let cs = cs.map_err(|_| bad())?;
        if cs.len() != self.e as usize {
            return Err(bad());
        }
        self.elem_from_coeffs(&cs).map_err(|_| bad())
    }
}

fn digits(mut a: u32, p: u32, e: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push((a % p) as u64);
        a /= p;
    }
    out
}

fn undigits(d: &[u64], p: u32) -> u32 {
    d.iter().rev().fold(0u32, |acc, &c| acc * p + c as u32)
}

#[inline]
fn add_digits(mut a: u32, mut b: u32, p: u32, e: u32) -> u32 {
    if e == 1 {
        let s = a + b;
        return if s >= p { s - p } else { s };
    }
    let mut r = 0;
    let mut pw = 1;
    for _ in 0..e {
        let mut s = a % p + b % p;
        if s >= p {
            s -= p;
        }
        r += s * pw;
        a /= p;
        b /= p;
        pw *= p;
    }
    r
}

/// The fixed identification of the abstract cube roots of unity with `mu_3`
/// inside a field of order `= 1 mod 3`.
#[derive(Clone, Debug)]
pub struct OmegaMap {
    zeta: FieldElem,
    // exponent j with x^{(Q-1)/3} = zeta^j, 3 for x = 0
    cubic: Vec<u8>,
}

impl OmegaMap {
    /// Chooses the primitive cube root with the smaller canonical key.
    pub fn new(field: &FieldSpec) -> Result<OmegaMap> {
        Self::build(field, false)
    }

    /// The other primitive cube root; used to check that results do not
    /// depend on the choice.
    pub fn alternate(field: &FieldSpec) -> Result<OmegaMap> {
        Self::build(field, true)
    }

    fn build(field: &FieldSpec, alternate: bool) -> Result<OmegaMap> {
        let n = field.q() - 1;
        if !n.is_multiple_of(3) {
            return Err(Error::InvalidField(format!("3 does not divide {n}")));
        }
        let r1 = field.exp_raw((n / 3) as u64);
        let r2 = field.exp_raw((2 * n / 3) as u64);
        let (small, large) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let zeta = if alternate { large } else { small };
        let step = if r1 == zeta { 1 } else { 2 };
        let cubic = (0..field.q())
            .map(|x| match field.log_raw(x) {
                None => 3u8,
                Some(l) => ((l as u64 * step) % 3) as u8,
            })
            .collect();
        Ok(OmegaMap { zeta: FieldElem(zeta), cubic })
    }

    /// `Omega(omega)`.
    pub fn zeta(&self) -> FieldElem {
        self.zeta
    }

    /// `Omega(omega^j)`.
    pub fn image(&self, field: &FieldSpec, j: u8) -> FieldElem {
        field.pow(self.zeta, (j % 3) as u64)
    }

    /// `Omega^{-1}` on `mu_3`; `None` if `x` is not a cube root of unity.
    pub fn preimage(&self, field: &FieldSpec, x: FieldElem) -> Option<u8> {
        (0..3u8).find(|&j| self.image(field, j) == x)
    }

    /// Exponent `j` with `x^{(Q-1)/3} = Omega(omega^j)`; `3` encodes `x = 0`.
    #[inline]
    pub fn cubic_exponent(&self, x: u32) -> u8 {
        self.cubic[x as usize]
    }
}

/// Embedding of `small` into `big` (same characteristic, degree dividing),
/// as a key-to-key table. The generator of `small` is sent to the smallest-key
/// root of its modulus in `big`.
pub fn embedding(small: &FieldSpec, big: &FieldSpec) -> Result<Vec<u32>> {
    if small.p() != big.p() || !big.e().is_multiple_of(small.e()) {
        return Err(Error::RingMismatch(format!("F_{} does not embed in F_{}", small.q(), big.q())));
    }
    if small.e() == 1 {
        return Ok((0..small.q()).collect());
    }
    let m = small.modulus();
    let root = (0..big.q())
        .find(|&x| {
            let mut acc = 0u32;
            for &c in m.iter().rev() {
                acc = big.add_raw(big.mul_raw(acc, x), c);
            }
            acc == 0
        })
        .ok_or_else(|| Error::InvalidField("no root of the subfield modulus".into()))?;
    Ok((0..small.q())
        .map(|k| {
            let cs = small.coeffs(FieldElem(k));
            let mut acc = 0u32;
            for &c in cs.iter().rev() {
                acc = big.add_raw(big.mul_raw(acc, root), c);
            }
            acc
        })
        .collect())
}

/// Rejects family base fields with `q != 2 mod 3` or even `q`.
pub fn check_family_base(q: u64) -> Result<(u32, u32)> {
    let (p, e) = prime_power(q).ok_or_else(|| Error::InvalidField(format!("q = {q} is not a prime power")))?;
    if p == 2 {
        return Err(Error::InvalidField(format!("q = {q} is even")));
    }
    if q % 3 != 2 {
        return Err(Error::InvalidField(format!("q = {q} is {} mod 3; the non-Kummer family needs q = 2 mod 3", q % 3)));
    }
    Ok((p, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_t() {
        let f = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.q(), 5);
    }

    #[test]
    fn f25_modulus_is_x2_plus_2() {
        let f = FieldSpec::new(5, 2).unwrap();
        assert_eq!(f.modulus(), &[2, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FieldSpec::new(4, 1).is_err());
        assert!(FieldSpec::new(2, 3).is_err());
        assert!(FieldSpec::new(9, 1).is_err());
        assert!(FieldSpec::new(5, 0).is_err());
        assert!(check_family_base(7).is_err());
        assert!(check_family_base(25).is_err());
        assert!(check_family_base(8).is_err());
        assert!(check_family_base(5).is_ok());
        assert!(check_family_base(125).is_ok());
    }

    #[test]
    fn modulus_is_smallest_irreducible() {
        // brute force: a monic quadratic over F_p is irreducible iff it has no root
        for p in [3u32, 5, 7, 11] {
            let f = FieldSpec::new(p, 2).unwrap();
            let mut expect = None;
            'outer: for c1 in 0..p {
                for c0 in 0..p {
                    let has_root = (0..p).any(|x| (x * x + c1 * x + c0) % p == 0);
                    if !has_root {
                        expect = Some(vec![c0, c1, 1]);
                        break 'outer;
                    }
                }
            }
            assert_eq!(f.modulus(), expect.unwrap().as_slice());
        }
    }

    #[test]
    fn trace_examples() {
        let f = FieldSpec::new(5, 2).unwrap();
        assert_eq!(f.trace_to_prime(FieldElem::ONE), 2);
        assert_eq!(f.trace_to_prime(FieldElem::ZERO), 0);
        for x in f.elements() {
            for y in f.elements() {
                let lhs = f.trace_to_prime(f.add(x, y));
                let rhs = (f.trace_to_prime(x) + f.trace_to_prime(y)) % 5;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn inverses_exhaustive() {
        for (p, e) in [(5, 1), (5, 2), (11, 2), (3, 3)] {
            let f = FieldSpec::new(p, e).unwrap();
            for x in f.elements().skip(1) {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), FieldElem::ONE);
            }
            assert!(f.inv(FieldElem::ZERO).is_none());
        }
    }

    #[test]
    fn frobenius_fixes_exactly_the_subfield() {
        for (p, e, qe) in [(5u32, 2u32, 1u32), (11, 2, 1), (5, 4, 2)] {
            let big = FieldSpec::new(p, e).unwrap();
            let small = FieldSpec::new(p, qe).unwrap();
            let emb = embedding(&small, &big).unwrap();
            let fixed: Vec<u32> = big
                .elements()
                .filter(|&x| big.frobenius(x, qe) == x)
                .map(|x| x.0)
                .collect();
            let mut image = emb.clone();
            image.sort_unstable();
            assert_eq!(fixed, image);
            // automorphism: additive and multiplicative
            for x in big.elements().step_by(7) {
                for y in big.elements().step_by(5) {
                    let fx = big.frobenius(x, qe);
                    let fy = big.frobenius(y, qe);
                    assert_eq!(big.frobenius(big.add(x, y), qe), big.add(fx, fy));
                    assert_eq!(big.frobenius(big.mul(x, y), qe), big.mul(fx, fy));
                }
            }
        }
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let small = FieldSpec::new(5, 3).unwrap();
        let big = FieldSpec::new(5, 6).unwrap();
        let emb = embedding(&small, &big).unwrap();
        for a in (0..125).step_by(3) {
            for b in (0..125).step_by(7) {
                let s = small.add_raw(a, b);
                let m = small.mul_raw(a, b);
                assert_eq!(emb[s as usize], big.add_raw(emb[a as usize], emb[b as usize]));
                assert_eq!(emb[m as usize], big.mul_raw(emb[a as usize], emb[b as usize]));
            }
        }
    }

    #[test]
    fn omega_map_properties() {
        let f = FieldSpec::new(5, 2).unwrap();
        let cube_roots: Vec<_> = f.elements().filter(|&x| f.pow(x, 3) == FieldElem::ONE).collect();
        assert_eq!(cube_roots.len(), 3);
        let om = OmegaMap::new(&f).unwrap();
        assert_eq!(om.image(&f, 0), FieldElem::ONE);
        assert_ne!(om.zeta(), FieldElem::ONE);
        assert_eq!(f.pow(om.zeta(), 3), FieldElem::ONE);
        assert_eq!(f.mul(om.image(&f, 1), om.image(&f, 2)), FieldElem::ONE);
        for a in 0..3u8 {
            for b in 0..3u8 {
                assert_eq!(om.image(&f, (a + b) % 3), f.mul(om.image(&f, a), om.image(&f, b)));
            }
        }
        let alt = OmegaMap::alternate(&f).unwrap();
        assert_eq!(f.mul(alt.zeta(), om.zeta()), FieldElem::ONE);
        assert!(om.zeta() < alt.zeta());
        // the exponent table agrees with the defining power
        for x in f.elements().skip(1) {
            let y = f.pow(x, 8);
            assert_eq!(om.preimage(&f, y), Some(om.cubic_exponent(x.0)));
        }
        assert!(OmegaMap::new(&FieldSpec::new(5, 1).unwrap()).is_err());
    }

    #[test]
    fn encode_roundtrip() {
        let f = FieldSpec::new(5, 2).unwrap();
        for x in f.elements() {
            assert_eq!(f.decode(&f.encode(x)).unwrap(), x);
        }
        assert_eq!(f.encode(FieldElem(7)), "[2,1]");
        assert!(f.decode("[5,0]").is_err());
    }
}
