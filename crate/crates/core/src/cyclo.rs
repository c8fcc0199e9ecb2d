//! Exact value rings.
//!
//! * [`ZOmega`] / [`QOmega`]: `Z[w]` and `Q(w)`, `w = exp(2 pi i / 3)`, basis `{1, w}`.
//! * [`QuadExt`]: `Q(w)[s]/(s^2 - 1/q)`, basis `{1, w, s, ws}`; `s` stands for `q^{-1/2}`.
//! * [`CycloNumber`]: `Q(w, z_p)` on the basis `z_p^i w^j`, `i <= p-2`, `j <= 1`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `q^e` for a possibly negative integer exponent.
pub fn rat_pow(q: u64, e: i64) -> BigRational {
    let base = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Always `num/den`, denominator positive.
pub fn fmt_frac(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_frac(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad fraction {s:?}"));
    let (n, d) = s.trim().split_once('/').ok_or_else(bad)?;
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

fn omega_c() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

fn to_f(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `a + b w` with integer coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ZOmega {
    pub a: i64,
    pub b: i64,
}

impl ZOmega {
    pub const ZERO: ZOmega = ZOmega { a: 0, b: 0 };
    pub const ONE: ZOmega = ZOmega { a: 1, b: 0 };

    pub fn new(a: i64, b: i64) -> Self {
        ZOmega { a, b }
    }

    /// `w^j`.
    pub fn root(j: u8) -> Self {
        match j % 3 {
            0 => ZOmega::new(1, 0),
            1 => ZOmega::new(0, 1),
            _ => ZOmega::new(-1, -1),
        }
    }

    /// `c0 + c1 w + c2 w^2`.
    pub fn from_counts(c: [i64; 3]) -> Self {
        ZOmega::new(c[0] - c[2], c[1] - c[2])
    }

    pub fn conj(self) -> Self {
        ZOmega::new(self.a - self.b, -self.b)
    }

    /// `|x|^2 = a^2 - ab + b^2`.
    pub fn norm(self) -> i64 {
        self.a * self.a - self.a * self.b + self.b * self.b
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn to_qomega(self) -> QOmega {
        QOmega::new(rat(self.a), rat(self.b))
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.a as f64, 0.0) + omega_c() * self.b as f64
    }
}

impl Add for ZOmega {
    type Output = ZOmega;
    fn add(self, o: ZOmega) -> ZOmega {
        ZOmega::new(self.a + o.a, self.b + o.b)
    }
}

impl AddAssign for ZOmega {
    fn add_assign(&mut self, o: ZOmega) {
        self.a += o.a;
        self.b += o.b;
    }
}

impl Sub for ZOmega {
    type Output = ZOmega;
    fn sub(self, o: ZOmega) -> ZOmega {
        ZOmega::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for ZOmega {
    type Output = ZOmega;
    fn neg(self) -> ZOmega {
        ZOmega::new(-self.a, -self.b)
    }
}

impl Mul for ZOmega {
    type Output = ZOmega;
    fn mul(self, o: ZOmega) -> ZOmega {
        let bd = self.b * o.b;
        ZOmega::new(self.a * o.a - bd, self.a * o.b + self.b * o.a - bd)
    }
}

impl Mul<i64> for ZOmega {
    type Output = ZOmega;
    fn mul(self, k: i64) -> ZOmega {
        ZOmega::new(self.a * k, self.b * k)
    }
}

/// `a + b w` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QOmega {
    pub a: BigRational,
    pub b: BigRational,
}

impl Default for QOmega {
    fn default() -> Self {
        QOmega::zero()
    }
}

impl QOmega {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QOmega { a, b }
    }

    pub fn zero() -> Self {
        QOmega::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        QOmega::from_rational(BigRational::one())
    }

    pub fn from_rational(a: BigRational) -> Self {
        QOmega::new(a, BigRational::zero())
    }

    pub fn omega() -> Self {
        QOmega::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QOmega::new(&self.a - &self.b, -&self.b)
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.a * &self.b + &self.b * &self.b
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        QOmega::new(&self.a * k, &self.b * k)
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::Pole("inverse of zero in Q(w)".into()));
        }
        Ok(self.conj().scale(&n.recip()))
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut acc = QOmega::one();
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f(&self.a), 0.0) + omega_c() * to_f(&self.b)
    }
}

impl From<ZOmega> for QOmega {
    fn from(z: ZOmega) -> Self {
        z.to_qomega()
    }
}

impl<'a> Add<&'a QOmega> for &'a QOmega {
    type Output = QOmega;
    fn add(self, o: &QOmega) -> QOmega {
        QOmega::new(&self.a + &o.a, &self.b + &o.b)
    }
}

impl<'a> Sub<&'a QOmega> for &'a QOmega {
    type Output = QOmega;
    fn sub(self, o: &QOmega) -> QOmega {
        QOmega::new(&self.a - &o.a, &self.b - &o.b)
    }
}

impl<'a> Mul<&'a QOmega> for &'a QOmega {
    type Output = QOmega;
    fn mul(self, o: &QOmega) -> QOmega {
        let bd = &self.b * &o.b;
        QOmega::new(&self.a * &o.a - &bd, &self.a * &o.b + &self.b * &o.a - bd)
    }
}

impl Neg for &QOmega {
    type Output = QOmega;
    fn neg(self) -> QOmega {
        QOmega::new(-&self.a, -&self.b)
    }
}

impl AddAssign<&QOmega> for QOmega {
    fn add_assign(&mut self, o: &QOmega) {
        self.a += &o.a;
        self.b += &o.b;
    }
}

/// `x + y s` with `x, y` in `Q(w)` and `s^2 = 1/q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    q: u64,
    pub x: QOmega,
    pub y: QOmega,
}

impl QuadExt {
    pub fn new(q: u64, x: QOmega, y: QOmega) -> Self {
        QuadExt { q, x, y }
    }

    pub fn zero(q: u64) -> Self {
        QuadExt::new(q, QOmega::zero(), QOmega::zero())
    }

    pub fn one(q: u64) -> Self {
        QuadExt::new(q, QOmega::one(), QOmega::zero())
    }

    /// `s = q^{-1/2}`.
    pub fn s(q: u64) -> Self {
        QuadExt::new(q, QOmega::zero(), QOmega::one())
    }

    pub fn from_qomega(q: u64, x: QOmega) -> Self {
        QuadExt::new(q, x, QOmega::zero())
    }

    pub fn from_rational(q: u64, r: BigRational) -> Self {
        QuadExt::from_qomega(q, QOmega::from_rational(r))
    }

    /// `q^{-n/2} = s^n`.
    pub fn s_pow(q: u64, n: u32) -> Self {
        let half = rat_pow(q, -((n / 2) as i64));
        if n.is_multiple_of(2) {
            QuadExt::from_rational(q, half)
        } else {
            QuadExt::new(q, QOmega::zero(), QOmega::from_rational(half))
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Coefficients on `{1, w, s, ws}`.
    pub fn coeffs(&self) -> [BigRational; 4] {
        [self.x.a.clone(), self.x.b.clone(), self.y.a.clone(), self.y.b.clone()]
    }

    pub fn from_coeffs(q: u64, c: [BigRational; 4]) -> Self {
        let [a, b, c2, d] = c;
        QuadExt::new(q, QOmega::new(a, b), QOmega::new(c2, d))
    }

    /// Complex conjugation: `w -> w^2`, `s` fixed.
    pub fn conj(&self) -> Self {
        QuadExt::new(self.q, self.x.conj(), self.y.conj())
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        QuadExt::new(self.q, self.x.scale(k), self.y.scale(k))
    }

    pub fn mul_qomega(&self, k: &QOmega) -> Self {
        QuadExt::new(self.q, &self.x * k, &self.y * k)
    }

    fn check(&self, o: &QuadExt) -> Result<()> {
        if self.q != o.q {
            return Err(Error::RingMismatch(format!("s^2 = 1/{} vs 1/{}", self.q, o.q)));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &QuadExt) -> Result<QuadExt> {
        self.check(o)?;
        Ok(QuadExt::new(self.q, &self.x + &o.x, &self.y + &o.y))
    }

    pub fn try_sub(&self, o: &QuadExt) -> Result<QuadExt> {
        self.check(o)?;
        Ok(QuadExt::new(self.q, &self.x - &o.x, &self.y - &o.y))
    }

    pub fn try_mul(&self, o: &QuadExt) -> Result<QuadExt> {
        self.check(o)?;
        let inv_q = rat_frac(1, self.q as i64);
        let x = &(&self.x * &o.x) + &(&self.y * &o.y).scale(&inv_q);
        let y = &(&self.x * &o.y) + &(&self.y * &o.x);
        Ok(QuadExt::new(self.q, x, y))
    }

    pub fn inv(&self) -> Result<QuadExt> {
        // (x + ys)^{-1} = (x - ys) / (x^2 - y^2/q)
        let inv_q = rat_frac(1, self.q as i64);
        let d = &(&self.x * &self.x) - &(&self.y * &self.y).scale(&inv_q);
        let di = d.inv()?;
        Ok(QuadExt::new(self.q, &self.x * &di, -&(&self.y * &di)))
    }

    pub fn pow(&self, mut n: u32) -> QuadExt {
        let mut acc = QuadExt::one(self.q);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// Numeric value with `s = q^{-1/2}`; diagnostics only.
    pub fn to_complex(&self) -> Complex64 {
        self.x.to_complex() + self.y.to_complex() * (self.q as f64).powf(-0.5)
    }

    /// Four `num/den` strings on `{1, w, s, ws}`.
    pub fn to_fraction_strings(&self) -> [String; 4] {
        self.coeffs().map(|c| fmt_frac(&c))
    }

    pub fn from_fraction_strings(q: u64, parts: &[&str]) -> Result<QuadExt> {
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected 4 fractions, got {}", parts.len())));
        }
        let c = [
            parse_frac(parts[0])?,
            parse_frac(parts[1])?,
            parse_frac(parts[2])?,
            parse_frac(parts[3])?,
        ];
        Ok(QuadExt::from_coeffs(q, c))
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, o: &QuadExt) -> QuadExt {
        self.try_add(o).expect("QuadExt: mismatched q")
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, o: &QuadExt) -> QuadExt {
        self.try_sub(o).expect("QuadExt: mismatched q")
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, o: &QuadExt) -> QuadExt {
        self.try_mul(o).expect("QuadExt: mismatched q")
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(self.q, -&self.x, -&self.y)
    }
}

impl AddAssign<&QuadExt> for QuadExt {
    fn add_assign(&mut self, o: &QuadExt) {
        assert_eq!(self.q, o.q, "QuadExt: mismatched q");
        self.x += &o.x;
        self.y += &o.y;
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.coeffs();
        write!(f, "({a}) + ({b})w + ({c})s + ({d})ws")
    }
}

/// An element of `Q(w, z_p)` in the reduced basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloNumber {
    p: u32,
    // index 2*i + j for z^i w^j
    c: Vec<BigRational>,
}

/// Integer accumulator for sums of `z_p^k w^j` before reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloCounts {
    p: u32,
    grid: Vec<[i64; 3]>,
}

impl CycloCounts {
    pub fn new(p: u32) -> Self {
        CycloCounts { p, grid: vec![[0; 3]; p as usize] }
    }

    /// Adds `n * z^k w^j`.
    #[inline]
    pub fn add(&mut self, k: u32, j: u8, n: i64) {
        self.grid[(k % self.p) as usize][(j % 3) as usize] += n;
    }

    pub fn merge(&mut self, o: &CycloCounts) {
        for (a, b) in self.grid.iter_mut().zip(&o.grid) {
            for t in 0..3 {
                a[t] += b[t];
            }
        }
    }

    pub fn to_number(&self) -> CycloNumber {
        let g: Vec<[BigRational; 3]> = self.grid.iter().map(|r| r.map(rat)).collect();
        CycloNumber::from_grid(self.p, g)
    }
}

impl CycloNumber {
    fn dim(p: u32) -> usize {
        2 * (p as usize - 1)
    }

    pub fn zero(p: u32) -> Self {
        CycloNumber { p, c: vec![BigRational::zero(); Self::dim(p)] }
    }

    pub fn one(p: u32) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: u32, r: BigRational) -> Self {
        let mut z = Self::zero(p);
        z.c[0] = r;
        z
    }

    pub fn from_qomega(p: u32, x: &QOmega) -> Self {
        let mut z = Self::zero(p);
        z.c[0] = x.a.clone();
        z.c[1] = x.b.clone();
        z
    }

    /// `z_p^k w^j`.
    pub fn root(p: u32, k: u32, j: u8) -> Self {
        let mut g = vec![[0i64; 3]; p as usize];
        g[(k % p) as usize][(j % 3) as usize] = 1;
        CycloCounts { p, grid: g }.to_number()
    }

    /// Reduces a raw `p x 3` grid (`grid[k][j]` multiplies `z^k w^j`).
    pub fn from_grid(p: u32, mut g: Vec<[BigRational; 3]>) -> Self {
        let pu = p as usize;
        // w^2 = -1 - w
        for row in g.iter_mut() {
            let t = std::mem::take(&mut row[2]);
            row[0] -= &t;
            row[1] -= &t;
        }
        // z^{p-1} = -(1 + z + ... + z^{p-2})
        let last = std::mem::take(&mut g[pu - 1]);
        let mut c = Vec::with_capacity(Self::dim(p));
        for row in g.iter().take(pu - 1) {
            c.push(&row[0] - &last[0]);
            c.push(&row[1] - &last[1]);
        }
        CycloNumber { p, c }
    }

    fn to_grid(&self) -> Vec<[BigRational; 3]> {
        let mut g = vec![[BigRational::zero(), BigRational::zero(), BigRational::zero()]; self.p as usize];
        for (idx, v) in self.c.iter().enumerate() {
            g[idx / 2][idx % 2] = v.clone();
        }
        g
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    fn check(&self, o: &CycloNumber) -> Result<()> {
        if self.p != o.p {
            return Err(Error::RingMismatch(format!("Q(z_{}) vs Q(z_{})", self.p, o.p)));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &CycloNumber) -> Result<CycloNumber> {
        self.check(o)?;
        Ok(CycloNumber { p: self.p, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, o: &CycloNumber) -> Result<CycloNumber> {
        self.check(o)?;
        Ok(CycloNumber { p: self.p, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() })
    }

    pub fn try_mul(&self, o: &CycloNumber) -> Result<CycloNumber> {
        self.check(o)?;
        let p = self.p as usize;
        let mut g = vec![[BigRational::zero(), BigRational::zero(), BigRational::zero()]; p];
        for (i1, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i2, y) in o.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let k = (i1 / 2 + i2 / 2) % p;
                let j = (i1 % 2 + i2 % 2) % 3;
                g[k][j] += x * y;
            }
        }
        Ok(CycloNumber::from_grid(self.p, g))
    }

    pub fn scale(&self, k: &BigRational) -> CycloNumber {
        CycloNumber { p: self.p, c: self.c.iter().map(|x| x * k).collect() }
    }

    /// Complex conjugation: `z -> z^{-1}`, `w -> w^2`.
    pub fn conj(&self) -> CycloNumber {
        let p = self.p as usize;
        let src = self.to_grid();
        let mut g = vec![[BigRational::zero(), BigRational::zero(), BigRational::zero()]; p];
        for (k, row) in src.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    g[(p - k) % p][(3 - j) % 3] += v;
                }
            }
        }
        CycloNumber::from_grid(self.p, g)
    }

    pub fn pow(&self, mut n: u32) -> CycloNumber {
        let mut acc = CycloNumber::one(self.p);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// `Some` if the value lies in `Q(w)`.
    pub fn as_qomega(&self) -> Option<QOmega> {
        self.c[2..]
            .iter()
            .all(|x| x.is_zero())
            .then(|| QOmega::new(self.c[0].clone(), self.c[1].clone()))
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_qomega().filter(|x| x.is_rational()).map(|x| x.a)
    }

    pub fn to_complex(&self) -> Complex64 {
        let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / self.p as f64);
        let w = omega_c();
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, v) in self.c.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let base = zeta.powu((idx / 2) as u32) * if idx % 2 == 1 { w } else { Complex64::new(1.0, 0.0) };
            acc += base * to_f(v);
        }
        acc
    }

    pub fn to_fraction_strings(&self) -> Vec<String> {
        self.c.iter().map(fmt_frac).collect()
    }

    /// Largest absolute numerator, for magnitude logging.
    pub fn height(&self) -> BigInt {
        self.c.iter().map(|x| x.numer().abs()).max().unwrap_or_default()
    }
}

impl<'a> Add<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn add(self, o: &CycloNumber) -> CycloNumber {
        self.try_add(o).expect("CycloNumber: mismatched p")
    }
}

impl<'a> Sub<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn sub(self, o: &CycloNumber) -> CycloNumber {
        self.try_sub(o).expect("CycloNumber: mismatched p")
    }
}

impl<'a> Mul<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn mul(self, o: &CycloNumber) -> CycloNumber {
        self.try_mul(o).expect("CycloNumber: mismatched p")
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber { p: self.p, c: self.c.iter().map(|x| -x).collect() }
    }
}

impl AddAssign<&CycloNumber> for CycloNumber {
    fn add_assign(&mut self, o: &CycloNumber) {
        assert_eq!(self.p, o.p, "CycloNumber: mismatched p");
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
    }
}
