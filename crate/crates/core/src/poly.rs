//! Dense univariate polynomials over a [`FieldSpec`].
//!
//! A [`Poly`] is a trimmed little-endian vector of element keys; it does not
//! carry its field. All arithmetic goes through a [`PolyRing`], which borrows
//! the field tables.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    c: Vec<u32>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { c: vec![1] }
    }

    /// `T`.
    pub fn x() -> Poly {
        Poly { c: vec![0, 1] }
    }

    pub fn constant(k: u32) -> Poly {
        Poly::from_keys(vec![k])
    }

    pub fn from_keys(mut c: Vec<u32>) -> Poly {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { c }
    }

    /// Coefficient keys, constant term first.
    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    /// `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree, with `0` for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> u32 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }
}

/// Monic irreducible factors with multiplicities, plus the leading unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FieldElem,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Number of monic irreducibles of degree `d` over `F_q`.
pub fn irreducible_count(q: u64, d: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::OutOfRange("irreducible_count needs d >= 1".into()));
    }
    let mut total: i128 = 0;
    for e in 1..=d {
        if d.is_multiple_of(e) {
            let mu = mobius_int(e as u64) as i128;
            if mu != 0 {
                total += mu * (q as i128).pow(d / e);
            }
        }
    }
    Ok((total / d as i128) as u64)
}

pub(crate) fn mobius_int(mut n: u64) -> i32 {
    let mut r = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            r = -r;
        }
        d += 1;
    }
    if n > 1 {
        r = -r;
    }
    r
}

/// `(q^n - 1)/(q - 1)`: the number of monic polynomials of degree `< n`.
pub fn monic_offset(q: u64, n: usize) -> u64 {
    (0..n).map(|k| q.pow(k as u32)).sum()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

#[derive(Clone, Copy)]
pub struct PolyRing<'a> {
    field: &'a FieldSpec,
}

impl<'a> PolyRing<'a> {
    pub fn new(field: &'a FieldSpec) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &'a FieldSpec {
        self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let f = self.field;
        let n = a.c.len().max(b.c.len());
        let c = (0..n).map(|i| f.add_raw(a.coeff(i), b.coeff(i))).collect();
        Poly::from_keys(c)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let f = self.field;
        let n = a.c.len().max(b.c.len());
        let c = (0..n).map(|i| f.sub_raw(a.coeff(i), b.coeff(i))).collect();
        Poly::from_keys(c)
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly::from_keys(a.c.iter().map(|&x| self.field.neg_raw(x)).collect())
    }

    pub fn scale(&self, a: &Poly, k: u32) -> Poly {
        Poly::from_keys(a.c.iter().map(|&x| self.field.mul_raw(x, k)).collect())
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let f = self.field;
        let mut out = vec![0u32; a.c.len() + b.c.len() - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                out[i + j] = f.add_raw(out[i + j], f.mul_raw(x, y));
            }
        }
        Poly::from_keys(out)
    }

    pub fn pow(&self, a: &Poly, mut n: u64) -> Poly {
        let mut acc = Poly::one();
        let mut b = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    /// Division with remainder; fails on a zero divisor.
    pub fn divrem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.divrem_nz(a, b))
    }

    fn divrem_nz(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        let f = self.field;
        let db = b.c.len() - 1;
        if a.c.len() <= db {
            return (Poly::zero(), a.clone());
        }
        let inv = f.inv_raw(b.lead());
        let mut r = a.c.clone();
        let mut quo = vec![0u32; r.len() - db];
        for top in (db..r.len()).rev() {
            let c = f.mul_raw(r[top], inv);
            if c == 0 {
                continue;
            }
            quo[top - db] = c;
            for (i, &bi) in b.c.iter().enumerate() {
                let idx = top - db + i;
                r[idx] = f.sub_raw(r[idx], f.mul_raw(c, bi));
            }
        }
        r.truncate(db);
        (Poly::from_keys(quo), Poly::from_keys(r))
    }

    /// `a mod b` for nonzero `b`.
    pub fn rem(&self, a: &Poly, b: &Poly) -> Poly {
        assert!(!b.is_zero(), "reduction modulo zero");
        self.divrem_nz(a, b).1
    }

    /// Exact quotient; panics if the division is not exact.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Poly {
        let (q, r) = self.divrem_nz(a, b);
        assert!(r.is_zero(), "inexact division");
        q
    }

    pub fn divides(&self, d: &Poly, a: &Poly) -> bool {
        if d.is_zero() {
            return a.is_zero();
        }
        self.divrem_nz(a, d).1.is_zero()
    }

    /// Splits off the leading coefficient: `(lc, a / lc)`. Zero maps to `(0, 0)`.
    pub fn monic(&self, a: &Poly) -> (u32, Poly) {
        if a.is_zero() {
            return (0, Poly::zero());
        }
        let lc = a.lead();
        (lc, self.scale(a, self.field.inv_raw(lc)))
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let r = self.divrem_nz(&x, &y).1;
            x = y;
            y = r;
        }
        self.monic(&x).1
    }

    /// `(g, s, t)` with `s a + t b = g` and `g` the monic gcd.
    pub fn ext_gcd(&self, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (qq, r) = self.divrem_nz(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = self.sub(&s0, &self.mul(&qq, &s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = self.sub(&t0, &self.mul(&qq, &t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = self.field.inv_raw(r0.lead());
        (self.scale(&r0, inv), self.scale(&s0, inv), self.scale(&t0, inv))
    }

    /// Inverse of `a` modulo `m`, if it exists.
    pub fn inv_mod(&self, a: &Poly, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.ext_gcd(&self.rem(a, m), m);
        g.is_one().then(|| self.rem(&s, m))
    }

    pub fn mulmod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m)
    }

    pub fn powmod(&self, a: &Poly, mut n: u64, m: &Poly) -> Poly {
        let mut acc = self.rem(&Poly::one(), m);
        let mut b = self.rem(a, m);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mulmod(&acc, &b, m);
            }
            n >>= 1;
            if n > 0 {
                b = self.mulmod(&b, &b, m);
            }
        }
        acc
    }

    pub fn derivative(&self, a: &Poly) -> Poly {
        let f = self.field;
        let c = a
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &x)| f.mul_raw(x, f.from_int(i as i64).0))
            .collect();
        Poly::from_keys(c)
    }

    pub fn eval(&self, a: &Poly, x: u32) -> u32 {
        let f = self.field;
        a.c.iter().rev().fold(0, |acc, &c| f.add_raw(f.mul_raw(acc, x), c))
    }

    /// Canonical key `sum c_i Q^i` over all coefficients.
    pub fn key(&self, a: &Poly) -> u128 {
        let q = self.q() as u128;
        a.c.iter().rev().fold(0u128, |acc, &c| acc * q + c as u128)
    }

    /// Canonical order: degree first, then key.
    pub fn cmp(&self, a: &Poly, b: &Poly) -> Ordering {
        a.c.len().cmp(&b.c.len()).then_with(|| self.key(a).cmp(&self.key(b)))
    }

    /// Polynomial of degree `< n` (not necessarily monic) with the given key.
    pub fn from_key(&self, mut key: u64, n: usize) -> Poly {
        let q = self.q();
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            c.push((key % q) as u32);
            key /= q;
        }
        Poly::from_keys(c)
    }

    /// The monic polynomial of degree `n` whose lower coefficients have key `key`.
    pub fn monic_from_key(&self, key: u64, n: usize) -> Poly {
        let q = self.q();
        let mut c = Vec::with_capacity(n + 1);
        let mut k = key;
        for _ in 0..n {
            c.push((k % q) as u32);
            k /= q;
        }
        c.push(1);
        Poly { c }
    }

    /// Position of a monic polynomial in the `(degree, key)` enumeration.
    pub fn monic_index(&self, a: &Poly) -> u64 {
        debug_assert!(a.is_monic());
        let n = a.degree();
        let q = self.q();
        let key = a.c[..n].iter().rev().fold(0u64, |acc, &c| acc * q + c as u64);
        monic_offset(q, n) + key
    }

    pub fn monic_from_index(&self, idx: u64) -> Poly {
        let q = self.q();
        let mut n = 0usize;
        let mut off = 0u64;
        loop {
            let size = q.pow(n as u32);
            if idx < off + size {
                return self.monic_from_key(idx - off, n);
            }
            off += size;
            n += 1;
        }
    }

    /// All monic polynomials of degree `n`, in key order.
    pub fn enumerate_monic(&self, n: usize) -> impl Iterator<Item = Poly> + 'a {
        let ring = *self;
        let count = self.q().pow(n as u32);
        (0..count).map(move |k| ring.monic_from_key(k, n))
    }

    /// Squarefree monic polynomials of degree `n`, in key order.
    pub fn enumerate_squarefree(&self, n: usize) -> impl Iterator<Item = Poly> + 'a {
        let ring = *self;
        self.enumerate_monic(n).filter(move |f| ring.is_squarefree(f))
    }

    /// All polynomials of degree `< n`, zero included, in key order.
    pub fn enumerate_residues(&self, n: usize) -> impl Iterator<Item = Poly> + 'a {
        let ring = *self;
        let count = self.q().pow(n as u32);
        (0..count).map(move |k| ring.from_key(k, n))
    }

    pub fn is_squarefree(&self, a: &Poly) -> bool {
        if a.is_zero() {
            return false;
        }
        if a.is_constant() {
            return true;
        }
        self.gcd(a, &self.derivative(a)).is_one()
    }

    /// Rabin's test.
    pub fn is_irreducible(&self, a: &Poly) -> bool {
        let Some(n) = a.deg() else { return false };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let m = self.monic(a).1;
        let q = self.q();
        let x = Poly::x();
        let mut frob = vec![self.rem(&x, &m)];
        for _ in 0..n {
            let last = frob.last().unwrap();
            frob.push(self.powmod(last, q, &m));
        }
        if frob[n] != frob[0] {
            return false;
        }
        for r in crate::field::prime_factors(n as u64) {
            let h = self.sub(&frob[n / r as usize], &x);
            if !self.gcd(&h, &m).is_one() {
                return false;
            }
        }
        true
    }

    /// `x -> x^{p^{e/2}}` applied to coefficients; the field must be a quadratic
    /// extension of the family base.
    pub fn frobenius_conjugate(&self, a: &Poly) -> Result<Poly> {
        let e = self.field.e();
        if e % 2 == 1 {
            return Err(Error::InvalidField(format!(
                "F_{} is not a quadratic extension; sigma is undefined",
                self.field.q()
            )));
        }
        Ok(self.frobenius_unchecked(a))
    }

    pub(crate) fn frobenius_unchecked(&self, a: &Poly) -> Poly {
        let f = self.field;
        let k = (f.p() as u64).pow(f.e() / 2);
        Poly::from_keys(a.c.iter().map(|&x| f.pow_raw(x, k)).collect())
    }

    /// Deterministic factorization: squarefree, distinct-degree, then
    /// equal-degree splitting with trial polynomials in key order.
    pub fn factorize(&self, a: &Poly) -> Result<Factorization> {
        if a.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let (lc, m) = self.monic(a);
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (part, mult) in self.squarefree_decomposition(&m) {
            for (g, d) in self.distinct_degree(&part) {
                for p in self.equal_degree(&g, d) {
                    factors.push((p, mult));
                }
            }
        }
        factors.sort_by(|x, y| self.cmp(&x.0, &y.0));
        Ok(Factorization { unit: FieldElem(lc), factors })
    }

    fn pth_root(&self, a: &Poly) -> Poly {
        let f = self.field;
        let p = f.p() as usize;
        let k = (f.p() as u64).pow(f.e() - 1);
        let c = a.c.iter().step_by(p).map(|&x| f.pow_raw(x, k)).collect();
        Poly::from_keys(c)
    }

    fn squarefree_decomposition(&self, a: &Poly) -> Vec<(Poly, u32)> {
        if a.is_constant() {
            return Vec::new();
        }
        let p = self.field.p();
        let da = self.derivative(a);
        if da.is_zero() {
            return self
                .squarefree_decomposition(&self.pth_root(a))
                .into_iter()
                .map(|(g, e)| (g, e * p))
                .collect();
        }
        let mut out = Vec::new();
        let mut r = self.gcd(a, &da);
        let mut w = self.div_exact(a, &r);
        let mut i = 1;
        while !w.is_one() {
            let y = self.gcd(&w, &r);
            let z = self.div_exact(&w, &y);
            if !z.is_one() {
                out.push((z, i));
            }
            i += 1;
            r = self.div_exact(&r, &y);
            w = y;
        }
        if !r.is_one() {
            for (g, e) in self.squarefree_decomposition(&self.pth_root(&r)) {
                out.push((g, e * p));
            }
        }
        out
    }

    fn distinct_degree(&self, a: &Poly) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut f = a.clone();
        let q = self.q();
        let x = Poly::x();
        let mut h = self.rem(&x, &f);
        let mut d = 1;
        while f.degree() >= 2 * d {
            h = self.powmod(&h, q, &f);
            let g = self.gcd(&self.sub(&h, &x), &f);
            if !g.is_one() {
                f = self.div_exact(&f, &g);
                h = self.rem(&h, &f);
                out.push((g, d));
            }
            d += 1;
        }
        if f.degree() > 0 {
            let n = f.degree();
            out.push((f, n));
        }
        out
    }

    fn equal_degree(&self, a: &Poly, d: usize) -> Vec<Poly> {
        let n = a.degree();
        if n == d {
            return vec![a.clone()];
        }
        let q = self.q();
        let total = q.saturating_pow(n as u32);
        for key in q..total {
            let t = self.from_key(key, n);
            // t^{(q^d - 1)/2} = (t * t^q * ... * t^{q^{d-1}})^{(q-1)/2}
            let mut norm = Poly::one();
            let mut frob = self.rem(&t, a);
            for _ in 0..d {
                norm = self.mulmod(&norm, &frob, a);
                frob = self.powmod(&frob, q, a);
            }
            let b = self.sub(&self.powmod(&norm, (q - 1) / 2, a), &Poly::one());
            let g = self.gcd(&b, a);
            if !g.is_one() && g.degree() < n {
                let other = self.div_exact(a, &g);
                let mut out = self.equal_degree(&g, d);
                out.extend(self.equal_degree(&other, d));
                return out;
            }
        }
        unreachable!("equal-degree splitting found no separating element")
    }

    pub fn mobius(&self, a: &Poly) -> Result<i8> {
        let fac = self.factorize(a)?;
        if !fac.is_squarefree() {
            return Ok(0);
        }
        Ok(if fac.factors.len() % 2 == 0 { 1 } else { -1 })
    }

    /// `|(F_q[T]/a)^x|`.
    pub fn euler_phi(&self, a: &Poly) -> Result<u128> {
        let fac = self.factorize(a)?;
        let q = self.q() as u128;
        Ok(fac
            .factors
            .iter()
            .map(|(p, e)| {
                let np = q.pow(p.degree() as u32);
                np.pow(*e) - np.pow(*e - 1)
            })
            .product())
    }

    /// Number of ordered factorizations into `k` monic factors.
    pub fn divisor_count(&self, a: &Poly, k: u32) -> Result<u64> {
        if !a.is_monic() {
            return Err(Error::NotMonic);
        }
        if k < 1 {
            return Err(Error::OutOfRange("divisor_count needs k >= 1".into()));
        }
        let fac = self.factorize(a)?;
        Ok(fac
            .factors
            .iter()
            .map(|&(_, e)| binomial(e as u64 + k as u64 - 1, k as u64 - 1))
            .product())
    }

    /// `Res(a, b) = lc(a)^{deg b} prod_{a(x)=0} b(x)`; zero if either is zero.
    pub fn resultant(&self, a: &Poly, b: &Poly) -> u32 {
        if a.is_zero() || b.is_zero() {
            return 0;
        }
        resultant_slices(self.field, &a.c, &b.c)
    }

    /// Text form: comma-separated coefficients, constant term first.
    pub fn encode(&self, a: &Poly) -> String {
        if a.is_zero() {
            return self.field.encode(FieldElem::ZERO);
        }
        a.c.iter()
            .map(|&x| self.field.encode(FieldElem(x)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn decode(&self, s: &str) -> Result<Poly> {
        let mut out = Vec::new();
        for tok in split_top_level(s.trim()) {
            out.push(self.field.decode(tok)?.0);
        }
        Ok(Poly::from_keys(out))
    }
}

/// Splits on commas that are not inside brackets.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Euclidean resultant on trimmed nonzero coefficient slices.
pub(crate) fn resultant_slices(f: &FieldSpec, a: &[u32], b: &[u32]) -> u32 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let mut acc = 1u32;
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            return f.mul_raw(acc, f.pow_raw(b[0], da as u64));
        }
        if da == 0 {
            return f.mul_raw(acc, f.pow_raw(a[0], db as u64));
        }
        // r = a mod b
        let inv = f.inv_raw(b[db]);
        let mut r = a.clone();
        for top in (db..r.len()).rev() {
            let c = f.mul_raw(r[top], inv);
            if c != 0 {
                for (i, &bi) in b.iter().enumerate() {
                    let idx = top - db + i;
                    r[idx] = f.sub_raw(r[idx], f.mul_raw(c, bi));
                }
            }
        }
        r.truncate(db);
        trim(&mut r);
        if r.is_empty() {
            return 0;
        }
        let dr = r.len() - 1;
        // res(a,b) = (-1)^{da db} lc(b)^{da - dr} res(b, r)
        if (da * db) % 2 == 1 {
            acc = f.neg_raw(acc);
        }
        acc = f.mul_raw(acc, f.pow_raw(b[db], (da - dr) as u64));
        a = b;
        b = r;
    }
}

/// Smallest-prime-factor sieve over the monic polynomials of degree `<= max_deg`,
/// indexed in `(degree, key)` order.
pub struct MonicSieve {
    q: u64,
    max_deg: usize,
    offsets: Vec<u64>,
    spf: Vec<u32>,
    exp: Vec<u8>,
    rest: Vec<u32>,
    primes: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl MonicSieve {
    pub fn new(ring: &PolyRing<'_>, max_deg: usize) -> MonicSieve {
        let q = ring.q();
        let offsets: Vec<u64> = (0..=max_deg + 1).map(|n| monic_offset(q, n)).collect();
        let total = offsets[max_deg + 1] as usize;
        assert!(total < NONE as usize, "sieve too large");
        let mut spf = vec![NONE; total];
        let mut cof = vec![NONE; total];
        let mut primes = Vec::new();
        let f = ring.field();
        let mut prod = vec![0u32; max_deg + 1];
        for idx in 1..total {
            if spf[idx] != NONE {
                continue;
            }
            spf[idx] = idx as u32;
            cof[idx] = 0;
            primes.push(idx as u32);
            let p = ring.monic_from_index(idx as u64);
            let dp = p.degree();
            let hmax = max_deg - dp;
            if hmax == 0 {
                continue;
            }
            // multiples p*h with 1 <= deg h <= max_deg - deg p
            for hidx in 1..offsets[hmax + 1] as usize {
                let h = ring.monic_from_index(hidx as u64);
                let dh = h.degree();
                let n = dp + dh;
                for x in prod[..=n].iter_mut() {
                    *x = 0;
                }
                for (i, &x) in p.coeffs().iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in h.coeffs().iter().enumerate() {
                        prod[i + j] = f.add_raw(prod[i + j], f.mul_raw(x, y));
                    }
                }
                let key = prod[..n].iter().rev().fold(0u64, |acc, &c| acc * q + c as u64);
                let m = (offsets[n] + key) as usize;
                if spf[m] == NONE {
                    spf[m] = idx as u32;
                    cof[m] = hidx as u32;
                }
            }
        }
        let mut exp = vec![0u8; total];
        let mut rest = vec![0u32; total];
        for idx in 1..total {
            let c = cof[idx] as usize;
            if c != 0 && spf[c] == spf[idx] {
                exp[idx] = exp[c] + 1;
                rest[idx] = rest[c];
            } else {
                exp[idx] = 1;
                rest[idx] = c as u32;
            }
        }
        MonicSieve { q, max_deg, offsets, spf, exp, rest, primes }
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn max_deg(&self) -> usize {
        self.max_deg
    }
    pub fn len(&self) -> usize {
        self.spf.len()
    }
    pub fn is_empty(&self) -> bool {
        self.spf.is_empty()
    }
    /// Index range of the monic polynomials of degree `n`.
    pub fn degree_range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n] as usize..self.offsets[n + 1] as usize
    }
    pub fn degree_of(&self, idx: usize) -> usize {
        self.offsets.partition_point(|&o| o <= idx as u64) - 1
    }
    /// Prime indices in `(degree, key)` order.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }
    pub fn is_prime(&self, idx: usize) -> bool {
        idx != 0 && self.spf[idx] as usize == idx
    }
    /// Smallest prime factor `P`, its exponent `a`, and the index of `f / P^a`.
    /// Not meaningful for index 0.
    #[inline]
    pub fn split(&self, idx: usize) -> (usize, u8, usize) {
        (self.spf[idx] as usize, self.exp[idx], self.rest[idx] as usize)
    }
    /// `d_k` for every index.
    pub fn divisor_counts(&self, k: u64) -> Vec<u64> {
        let mut d = vec![1u64; self.len()];
        for idx in 1..self.len() {
            let (_, a, r) = self.split(idx);
            d[idx] = binomial(a as u64 + k - 1, k - 1) * d[r];
        }
        d
    }

    /// `d_2(f^3)` for every index.
    pub fn cube_divisor_counts(&self) -> Vec<u64> {
        let mut d = vec![1u64; self.len()];
        for idx in 1..self.len() {
            let (_, a, r) = self.split(idx);
            d[idx] = (3 * a as u64 + 1) * d[r];
        }
        d
    }

    pub fn mobius_values(&self) -> Vec<i8> {
        let mut mu = vec![1i8; self.len()];
        for idx in 1..self.len() {
            let (_, a, r) = self.split(idx);
            mu[idx] = if a > 1 { 0 } else { -mu[r] };
        }
        mu
    }

    /// Whether every exponent is divisible by 3.
    pub fn cube_flags(&self) -> Vec<bool> {
        let mut c = vec![true; self.len()];
        for idx in 1..self.len() {
            let (_, a, r) = self.split(idx);
            c[idx] = a % 3 == 0 && c[r];
        }
        c
    }

    pub fn squarefree_flags(&self) -> Vec<bool> {
        self.mobius_values().into_iter().map(|m| m != 0).collect()
    }
}
