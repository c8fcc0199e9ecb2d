//! Truncated power series, Euler products over `F_q[T]`, `A_q(z, u)` and
//! coefficient extraction.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::characters::{CharTable, FamilyContext};
use crate::cyclo::{rat, rat_pow, QOmega, QuadExt};
use crate::error::{Error, Result};
use crate::poly::{mobius_int, resultant_slices, MonicSieve, Poly};

/// Coefficient ring for [`TruncSeries`].
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn c_zero() -> Self;
    fn c_one() -> Self;
    fn c_is_zero(&self) -> bool;
    fn c_add(&self, o: &Self) -> Self;
    fn c_sub(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_inv(&self) -> Option<Self>;
}

impl Coeff for BigRational {
    fn c_zero() -> Self {
        Zero::zero()
    }
    fn c_one() -> Self {
        One::one()
    }
    fn c_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Coeff for QOmega {
    fn c_zero() -> Self {
        QOmega::zero()
    }
    fn c_one() -> Self {
        QOmega::one()
    }
    fn c_is_zero(&self) -> bool {
        QOmega::is_zero(self)
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_inv(&self) -> Option<Self> {
        QOmega::inv(self).ok()
    }
}

/// `c_0 + c_1 u + ... + c_N u^N`, exact modulo `u^{N+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries<C> {
    c: Vec<C>,
}

impl<C: Coeff> TruncSeries<C> {
    /// Pads or truncates `coeffs` to order `n`.
    pub fn new(mut coeffs: Vec<C>, n: usize) -> Self {
        coeffs.resize(n + 1, C::c_zero());
        TruncSeries { c: coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Vec::new(), n)
    }

    pub fn one(n: usize) -> Self {
        Self::new(vec![C::c_one()], n)
    }

    /// `c u^k`.
    pub fn monomial(k: usize, c: C, n: usize) -> Self {
        let mut s = Self::zero(n);
        if k <= n {
            s.c[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &C {
        &self.c[i]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.c
    }

    pub fn add(&self, o: &Self) -> Self {
        TruncSeries { c: self.c.iter().zip(&o.c).map(|(a, b)| a.c_add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        TruncSeries { c: self.c.iter().zip(&o.c).map(|(a, b)| a.c_sub(b)).collect() }
    }

    pub fn scale(&self, k: &C) -> Self {
        TruncSeries { c: self.c.iter().map(|a| a.c_mul(k)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let mut c = vec![C::c_zero(); n + 1];
        for (i, a) in self.c.iter().enumerate().take(n + 1) {
            if a.c_is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n + 1 - i) {
                if !b.c_is_zero() {
                    c[i + j] = c[i + j].c_add(&a.c_mul(b));
                }
            }
        }
        TruncSeries { c }
    }

    pub fn inv(&self) -> Result<Self> {
        let a0 = self.c[0].c_inv().ok_or_else(|| Error::Pole("series with zero constant term".into()))?;
        let n = self.order();
        let mut b = vec![C::c_zero(); n + 1];
        b[0] = a0.clone();
        for k in 1..=n {
            let mut acc = C::c_zero();
            for i in 1..=k {
                if !self.c[i].c_is_zero() {
                    acc = acc.c_add(&self.c[i].c_mul(&b[k - i]));
                }
            }
            b[k] = C::c_zero().c_sub(&acc.c_mul(&a0));
        }
        Ok(TruncSeries { c: b })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.order());
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// `f(u^d)`.
    pub fn subst_power(&self, d: usize) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        for (i, a) in self.c.iter().enumerate() {
            if i * d > n {
                break;
            }
            out.c[i * d] = a.clone();
        }
        out
    }

    /// Multiplication by `1/(1 - u)`.
    pub fn prefix_sums(&self) -> Self {
        let mut acc = C::c_zero();
        let c = self
            .c
            .iter()
            .map(|a| {
                acc = acc.c_add(a);
                acc.clone()
            })
            .collect();
        TruncSeries { c }
    }
}

/// Which coefficient functional to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerronMode {
    /// `sum_{f in M_n} a(f)`.
    Exact,
    /// `sum_{f in M_{<=n}} a(f)`.
    UpTo,
}

/// Coefficient extraction: the contour integrals of Perron's formula are
/// Cauchy's formula, so they reduce to reading coefficients.
pub fn perron_extract<C: Coeff>(series: &TruncSeries<C>, n: usize, mode: PerronMode) -> Result<C> {
    if n > series.order() {
        return Err(Error::OutOfRange(format!("n = {n} beyond truncation {}", series.order())));
    }
    Ok(match mode {
        PerronMode::Exact => series.coeff(n).clone(),
        PerronMode::UpTo => series.prefix_sums().coeff(n).clone(),
    })
}

/// Twice a half-integer, so `HalfInt(3)` is `3/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfInt(pub i64);

/// `Z(u) = 1/(1 - qu)` to order `n`.
pub fn zeta_series(q: u64, n: usize) -> TruncSeries<BigRational> {
    TruncSeries::new((0..=n).map(|k| rat_pow(q, k as i64)).collect(), n)
}

/// `q^{k/2}` in `Q(s)`.
pub fn half_power(q: u64, k: i64) -> QuadExt {
    if k % 2 == 0 {
        QuadExt::from_rational(q, rat_pow(q, k / 2))
    } else {
        // q^{k/2} = q^{(k+1)/2} s
        QuadExt::s(q).scale(&rat_pow(q, (k + 1).div_euclid(2)))
    }
}

/// `zeta_q(s) = 1/(1 - q^{1-s})`.
pub fn zeta_value(q: u64, s: HalfInt) -> Result<QuadExt> {
    let k = 2 - s.0;
    if k == 0 {
        return Err(Error::Pole("zeta_q has a pole at s = 1".into()));
    }
    (&QuadExt::one(q) - &half_power(q, k)).inv()
}

/// Irreducibles of degree `d >= 1` over `F_q`, as `f64` (no overflow).
pub fn prime_count_f64(q: u64, d: u32) -> f64 {
    let mut total = 0f64;
    for e in 1..=d {
        if d.is_multiple_of(e) {
            let mu = mobius_int(e as u64);
            if mu != 0 {
                total += mu as f64 * (q as f64).powi((d / e) as i32);
            }
        }
    }
    total / d as f64
}

fn prime_count(q: u64, d: u32) -> Result<u64> {
    let mut total: i128 = 0;
    for e in 1..=d {
        if d.is_multiple_of(e) {
            let mu = mobius_int(e as u64) as i128;
            if mu != 0 {
                let pw = (q as i128)
                    .checked_pow(d / e)
                    .ok_or_else(|| Error::OutOfRange(format!("{q}^{d} overflows")))?;
                total += mu * pw;
            }
        }
    }
    u64::try_from(total / d as i128).map_err(|_| Error::OutOfRange(format!("pi_{q}({d}) overflows")))
}

/// Degrees of the irreducibles an Euler product runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    All,
}

impl Parity {
    fn admits(self, d: usize) -> bool {
        match self {
            Parity::Odd => d % 2 == 1,
            Parity::Even => d.is_multiple_of(2),
            Parity::All => true,
        }
    }
}

/// `prod_{R, deg R = d <= max_deg} local(d)` with each factor raised to the
/// number of irreducibles of degree `d`.
pub fn euler_product<C, F>(q: u64, n: usize, max_deg: usize, parity: Parity, local: F) -> Result<TruncSeries<C>>
where
    C: Coeff,
    F: Fn(usize) -> TruncSeries<C>,
{
    let mut acc = TruncSeries::one(n);
    for d in 1..=max_deg {
        if !parity.admits(d) {
            continue;
        }
        let f = local(d);
        if *f.coeff(0) != C::c_one() {
            return Err(Error::Unsupported(format!("local factor at degree {d} has constant term != 1")));
        }
        acc = acc.mul(&f.pow(prime_count(q, d as u32)?));
    }
    Ok(acc)
}

/// `sum c_{ij} u^i z^j`, exact modulo `u^{N_u+1}` and `z^{N_z+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries2 {
    nu: usize,
    nz: usize,
    c: Vec<BigRational>,
}

impl TruncSeries2 {
    pub fn zero(nu: usize, nz: usize) -> Self {
        TruncSeries2 { nu, nz, c: vec![BigRational::zero(); (nu + 1) * (nz + 1)] }
    }

    pub fn one(nu: usize, nz: usize) -> Self {
        Self::monomial(0, 0, BigRational::one(), nu, nz)
    }

    /// `c u^i z^j`.
    pub fn monomial(i: usize, j: usize, c: BigRational, nu: usize, nz: usize) -> Self {
        let mut s = Self::zero(nu, nz);
        if i <= nu && j <= nz {
            s.c[i * (nz + 1) + j] = c;
        }
        s
    }

    /// A series in `u` alone.
    pub fn from_u(f: &TruncSeries<BigRational>, nu: usize, nz: usize) -> Self {
        let mut s = Self::zero(nu, nz);
        for i in 0..=nu.min(f.order()) {
            s.c[i * (nz + 1)] = f.coeff(i).clone();
        }
        s
    }

    /// A series in `z` alone.
    pub fn from_z(f: &TruncSeries<BigRational>, nu: usize, nz: usize) -> Self {
        let mut s = Self::zero(nu, nz);
        for j in 0..=nz.min(f.order()) {
            s.c[j] = f.coeff(j).clone();
        }
        s
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn coeff(&self, i: usize, j: usize) -> &BigRational {
        &self.c[i * (self.nz + 1) + j]
    }

    pub fn add(&self, o: &Self) -> Self {
        TruncSeries2 { nu: self.nu, nz: self.nz, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        TruncSeries2 { nu: self.nu, nz: self.nz, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        TruncSeries2 { nu: self.nu, nz: self.nz, c: self.c.iter().map(|a| a * k).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (nu, nz) = (self.nu, self.nz);
        let w = nz + 1;
        let mut out = Self::zero(nu, nz);
        for i1 in 0..=nu {
            for j1 in 0..=nz {
                let a = &self.c[i1 * w + j1];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=nu - i1 {
                    for j2 in 0..=nz - j1 {
                        let b = &o.c[i2 * w + j2];
                        if !b.is_zero() {
                            out.c[(i1 + i2) * w + j1 + j2] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn inv(&self) -> Result<Self> {
        let w = self.nz + 1;
        let a0 = self.c[0].clone();
        if a0.is_zero() {
            return Err(Error::Pole("series with zero constant term".into()));
        }
        let a0i = a0.recip();
        let mut b = Self::zero(self.nu, self.nz);
        for i in 0..=self.nu {
            for j in 0..=self.nz {
                if i == 0 && j == 0 {
                    b.c[0] = a0i.clone();
                    continue;
                }
                let mut acc = BigRational::zero();
                for k in 0..=i {
                    for l in 0..=j {
                        if k == 0 && l == 0 {
                            continue;
                        }
                        let a = &self.c[k * w + l];
                        if !a.is_zero() {
                            acc += a * &b.c[(i - k) * w + j - l];
                        }
                    }
                }
                b.c[i * w + j] = -acc * &a0i;
            }
        }
        Ok(b)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.nu, self.nz);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }
}

/// Bivariate version of [`euler_product`].
pub fn euler_product2<F>(q: u64, nu: usize, nz: usize, max_deg: usize, parity: Parity, local: F) -> Result<TruncSeries2>
where
    F: Fn(usize) -> Result<TruncSeries2>,
{
    let mut acc = TruncSeries2::one(nu, nz);
    for d in 1..=max_deg {
        if !parity.admits(d) {
            continue;
        }
        let f = local(d)?;
        if !f.coeff(0, 0).is_one() {
            return Err(Error::Unsupported(format!("local factor at degree {d} has constant term != 1")));
        }
        acc = acc.mul(&f.pow(prime_count(q, d as u32)?));
    }
    Ok(acc)
}

fn poly_series(terms: &[(usize, i64)], n: usize) -> TruncSeries<BigRational> {
    let mut s = TruncSeries::zero(n);
    for &(k, c) in terms {
        if k <= n {
            s.c[k] = &s.c[k] + rat(c);
        }
    }
    s
}

/// Local factor of `A_q` at an irreducible of degree `d`:
/// odd `d`: `(1 - 3u^{2d} + 2u^{3d}) / (1 + z^d)`;
/// even `d`: `(2 z^{d/2} (1 - u^d)^4 + 1 - 3u^{2d} + 2u^{3d}) / (1 + z^{d/2})^2`.
pub fn a_q_local(d: usize, nu: usize, nz: usize) -> Result<TruncSeries2> {
    let cubic_u = TruncSeries2::from_u(&poly_series(&[(0, 1), (2 * d, -3), (3 * d, 2)], nu), nu, nz);
    if d % 2 == 1 {
        let den = TruncSeries2::from_z(&poly_series(&[(0, 1), (d, 1)], nz), nu, nz);
        Ok(cubic_u.mul(&den.inv()?))
    } else {
        let h = d / 2;
        let one_minus = TruncSeries2::from_u(&poly_series(&[(0, 1), (d, -1)], nu), nu, nz).pow(4);
        let zh = TruncSeries2::monomial(0, h, rat(2), nu, nz);
        let num = zh.mul(&one_minus).add(&cubic_u);
        let den = TruncSeries2::from_z(&poly_series(&[(0, 1), (h, 1)], nz), nu, nz).pow(2);
        Ok(num.mul(&den.inv()?))
    }
}

/// `A_q(z, u)` modulo `u^{N_u+1}, z^{N_z+1}`.
pub fn a_q_series(q: u64, nu: usize, nz: usize) -> Result<TruncSeries2> {
    let max_deg = nu.max(2 * nz).max(1);
    euler_product2(q, nu, nz, max_deg, Parity::All, |d| a_q_local(d, nu, nz))
}

/// `Z_q(u)^4 Z_{q^2}(z) / Z_{q^2}(z^2) A_q(z, u)`.
pub fn b2_closed_form(q: u64, nu: usize, nz: usize) -> Result<TruncSeries2> {
    let zu = TruncSeries2::from_u(&zeta_series(q, nu), nu, nz).pow(4);
    let q2 = q * q;
    let zz = TruncSeries2::from_z(&zeta_series(q2, nz), nu, nz);
    let zz2 = TruncSeries2::from_z(&zeta_series(q2, nz).subst_power(2), nu, nz);
    Ok(zu.mul(&zz).mul(&zz2.inv()?).mul(&a_q_series(q, nu, nz)?))
}

/// Right side of the family-count generating function for a fixed `l`:
/// `Z_{q^2}(z) / Z_{q^2}(z^2) / prod_{P | l} (1 + z^{deg P})
///  * prod_{R not dividing l} (A_R or B_R)`, with `A_R = 1/(1 + z^d)` for odd
/// `d = deg R` and `B_R = (1 + 2z^{d/2}) / (1 + z^{d/2})^2` for even `d`.
///
/// `ext_prime_degrees` lists `deg P` over `F_{q^2}` for `P | l`;
/// `base_prime_degrees` lists `deg R` over `F_q` for `R | l`.
pub fn family_genfun(q: u64, nz: usize, ext_prime_degrees: &[usize], base_prime_degrees: &[usize]) -> Result<TruncSeries<BigRational>> {
    let q2 = q * q;
    let local = |d: usize| -> Result<TruncSeries<BigRational>> {
        if d % 2 == 1 {
            poly_series(&[(0, 1), (d, 1)], nz).inv()
        } else {
            let h = d / 2;
            let den = poly_series(&[(0, 1), (h, 1)], nz).pow(2);
            Ok(poly_series(&[(0, 1), (h, 2)], nz).mul(&den.inv()?))
        }
    };
    let locals: Vec<TruncSeries<BigRational>> = (0..=2 * nz).map(|d| if d == 0 { Ok(TruncSeries::one(nz)) } else { local(d) }).collect::<Result<_>>()?;
    let mut acc = euler_product(q, nz, 2 * nz, Parity::All, |d| locals[d].clone())?;
    acc = acc.mul(&zeta_series(q2, nz));
    acc = acc.mul(&zeta_series(q2, nz).subst_power(2).inv()?);
    for &d in ext_prime_degrees {
        acc = acc.mul(&poly_series(&[(0, 1), (d, 1)], nz).inv()?);
    }
    for &d in base_prime_degrees {
        if d <= 2 * nz {
            acc = acc.mul(&locals[d].inv()?);
        }
    }
    Ok(acc)
}

/// Family size for conductor degree `m`: the `z^m` coefficient of the
/// generating function at `l = 1`.
pub fn family_count_closed_form(q: u64, m: usize) -> Result<BigRational> {
    Ok(family_genfun(q, m, &[], &[])?.coeff(m).clone())
}

/// Squarefree `F` in `F_q[T]` of degree `m` all of whose primes have even
/// degree, i.e. the conductors over `F_{q^2}` of degree `m` that lie in
/// `F_q[T]` with no factor there: `z^m` of `prod_{d even} (1 + z^d)^{pi_q(d)}`.
pub fn split_pair_count_closed_form(q: u64, m: usize) -> Result<BigRational> {
    let s = euler_product(q, m, m, Parity::Even, |d| poly_series(&[(0, 1), (d, 1)], m))?;
    Ok(s.coeff(m).clone())
}

/// Squarefree `F` over `F_{q^2}` of degree `m` with no prime factor defined
/// over `F_q`: `z^m` of `prod_{d even} (1 + z^{d/2})^{2 pi_q(d)}`.
pub fn prefilter_count_closed_form(q: u64, m: usize) -> Result<BigRational> {
    let s = euler_product(q, m, 2 * m, Parity::Even, |d| poly_series(&[(0, 1), (d / 2, 1)], m).pow(2))?;
    Ok(s.coeff(m).clone())
}

/// Generating series of an arithmetic function on `M_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithFn {
    One,
    /// `d_k`.
    Divisor(u32),
    Mobius,
}

pub fn arith_series(f: ArithFn, q: u64, n: usize) -> Result<TruncSeries<BigRational>> {
    let z = zeta_series(q, n);
    Ok(match f {
        ArithFn::One => z,
        ArithFn::Divisor(k) => z.pow(k as u64),
        ArithFn::Mobius => z.inv()?,
    })
}

/// Perron extraction from [`arith_series`] against sums over a sieve, for
/// `1`, `d_2`, `d_3` and `mu`, every `n <= max_n`.
pub fn perron_arith_check(q: u64, max_n: usize) -> Result<bool> {
    let (p, e) = crate::field::prime_power(q).ok_or_else(|| Error::InvalidField(format!("q = {q} is not a prime power")))?;
    let field = crate::field::FieldSpec::new(p, e)?;
    let sieve = MonicSieve::new(&crate::poly::PolyRing::new(&field), max_n);
    let mu: Vec<i64> = sieve.mobius_values().into_iter().map(i64::from).collect();
    let cases: [(ArithFn, Vec<i64>); 4] = [
        (ArithFn::One, vec![1; sieve.len()]),
        (ArithFn::Divisor(2), sieve.divisor_counts(2).into_iter().map(|x| x as i64).collect()),
        (ArithFn::Divisor(3), sieve.divisor_counts(3).into_iter().map(|x| x as i64).collect()),
        (ArithFn::Mobius, mu),
    ];
    for (f, vals) in &cases {
        let series = arith_series(*f, q, max_n)?;
        let mut running = 0i64;
        for n in 0..=max_n {
            let direct: i64 = sieve.degree_range(n).map(|i| vals[i]).sum();
            running += direct;
            if perron_extract(&series, n, PerronMode::Exact)? != rat(direct)
                || perron_extract(&series, n, PerronMode::UpTo)? != rat(running)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `L(u, chi) = prod_P (1 - chi(P) u^{deg P})^{-1}`, from
/// `counts[d][j] = #{P : deg P = d, chi(P) = w^j}` (index 0 unused).
pub fn character_series(counts: &[[u64; 3]], n: usize) -> Result<TruncSeries<QOmega>> {
    let mut acc = TruncSeries::<QOmega>::one(n);
    for (d, row) in counts.iter().enumerate().take(n + 1).skip(1) {
        for (j, &m) in row.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let w = QOmega::omega().pow(j as u32);
            let one_minus = TruncSeries::new(vec![QOmega::one(), -&w], n).subst_power(d);
            acc = acc.mul(&one_minus.inv()?.pow(m));
        }
    }
    Ok(acc)
}

/// `counts[d][j] = #{P prime, deg P = d, chi(P) = w^j}` from a character table.
pub fn prime_value_counts(table: &CharTable, sieve: &MonicSieve) -> Vec<[u64; 3]> {
    let mut counts = vec![[0u64; 3]; sieve.max_deg() + 1];
    for &idx in sieve.primes() {
        let c = table.code(idx as usize);
        if c < 3 {
            counts[sieve.degree_of(idx as usize)][c as usize] += 1;
        }
    }
    counts
}

/// A certified value of `A_q(q^{-2}, q^{-3/2})`.
#[derive(Clone, Debug, PartialEq)]
pub struct AqEnclosure {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub truncation_degree: usize,
}

impl AqEnclosure {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `|phi_d - 1| <= A_Q_TAIL_C q^{-2d}` for every local factor at
/// `(z, u) = (q^{-2}, q^{-3/2})`, `q >= 5`: below `2` for odd `d`, `3` for even.
pub const A_Q_TAIL_C: f64 = 4.0;

const A_Q_MAX_DEGREE: usize = 30;

/// Exact local factor `phi_d` at `(q^{-2}, q^{-3/2})`.
pub fn a_q_local_value(q: u64, d: usize) -> Result<QuadExt> {
    // u = q^{-3/2}, so u^d = q^{-3d/2}; z^{d/2} = q^{-d}
    let u = |k: usize| half_power(q, -3 * k as i64);
    let one = QuadExt::one(q);
    let cubic = &(&one - &u(2 * d).scale(&rat(3))) + &u(3 * d).scale(&rat(2));
    if d % 2 == 1 {
        let den = &one + &QuadExt::from_rational(q, rat_pow(q, -2 * d as i64));
        Ok(&cubic * &den.inv()?)
    } else {
        let zh = QuadExt::from_rational(q, rat_pow(q, -(d as i64)));
        let om = (&one - &u(d)).pow(4);
        let num = &(&zh.scale(&rat(2)) * &om) + &cubic;
        let den = (&one + &zh).pow(2);
        Ok(&num * &den.inv()?)
    }
}

fn real_part(x: &QuadExt) -> Result<f64> {
    if !x.y.b.is_zero() || !x.x.b.is_zero() {
        return Err(Error::Unsupported("expected a real value".into()));
    }
    let s = (x.q() as f64).powf(-0.5);
    let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    Ok(f(&x.x.a) + f(&x.y.a) * s)
}

/// Enclosure of `A_q(q^{-2}, q^{-3/2})` from the product over degrees `<= D`.
pub fn a_q_enclosure(q: u64, big_d: usize) -> Result<AqEnclosure> {
    if q < 5 {
        return Err(Error::OutOfRange(format!("tail bound assumes q >= 5, got {q}")));
    }
    let mut log_sum = 0f64;
    let mut abs_sum = 0f64;
    for d in 1..=big_d {
        let phi = a_q_local_value(q, d)?;
        let x = real_part(&(&phi - &QuadExt::one(q)))?;
        let term = prime_count_f64(q, d as u32) * x.ln_1p();
        log_sum += term;
        abs_sum += term.abs();
    }
    let qf = q as f64;
    let d1 = (big_d + 1) as f64;
    let lead = A_Q_TAIL_C * qf.powf(-2.0 * d1);
    let tail = A_Q_TAIL_C / (d1 * (1.0 - lead)) * qf.powf(-d1) / (1.0 - 1.0 / qf);
    let err = tail + 1e-12 * (1.0 + abs_sum);
    let value = log_sum.exp();
    Ok(AqEnclosure {
        value,
        lower: (log_sum - err).exp(),
        upper: (log_sum + err).exp(),
        truncation_degree: big_d,
    })
}

/// Smallest truncation whose enclosure is narrower than `tol`.
pub fn a_q_value(q: u64, tol: f64) -> Result<AqEnclosure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    let mut last_width = f64::INFINITY;
    for d in 0..=A_Q_MAX_DEGREE {
        let e = a_q_enclosure(q, d)?;
        let w = e.width();
        if w > last_width {
            return Err(Error::Unsupported(format!("enclosure widened at degree {d}")));
        }
        if w < tol {
            return Ok(e);
        }
        last_width = w;
    }
    Err(Error::OutOfRange(format!("tolerance {tol} not reached by degree {A_Q_MAX_DEGREE}")))
}

/// Squarefree monic `F` over `F_{q^2}` of degree `<= n` with `gcd(F, sigma F) = 1`,
/// i.e. no prime of `F_q[T]` divides `F`.
fn admissible_conductors(ctx: &FamilyContext, n: usize) -> Vec<Poly> {
    let r = ctx.ext_ring();
    (0..=n)
        .flat_map(|d| r.enumerate_squarefree(d))
        .filter(|f| r.gcd(f, &r.frobenius_unchecked(f)).is_one())
        .collect()
}

fn coprime_ext(ctx: &FamilyContext, big_f: &Poly, lifted: &Poly) -> bool {
    resultant_slices(ctx.ext(), big_f.coeffs(), lifted.coeffs()) != 0
}

/// `sum_{F admissible, (F, l) = 1} z^{deg F}` by enumeration.
pub fn family_genfun_direct(ctx: &FamilyContext, l: &Poly, nz: usize) -> TruncSeries<BigRational> {
    let ll = ctx.lift(l);
    let mut c = vec![0i64; nz + 1];
    for f in admissible_conductors(ctx, nz) {
        if coprime_ext(ctx, &f, &ll) {
            c[f.degree()] += 1;
        }
    }
    TruncSeries::new(c.into_iter().map(rat).collect(), nz)
}

/// Enumeration against the Euler-product closed form, for `l` in `F_q[T]`.
pub fn family_count_genfun_check(ctx: &FamilyContext, l: &Poly, nz: usize) -> Result<bool> {
    let q = ctx.spec().q();
    let base = ctx.base_ring().factorize(l)?;
    let ext = ctx.ext_ring().factorize(&ctx.lift(l))?;
    let bd: Vec<usize> = base.factors.iter().map(|(p, _)| p.degree()).collect();
    let ed: Vec<usize> = ext.factors.iter().map(|(p, _)| p.degree()).collect();
    Ok(family_genfun_direct(ctx, l, nz) == family_genfun(q, nz, &ed, &bd)?)
}

/// `B_2(u, z) = sum_l d(l^3) u^{deg l} sum_{F admissible, (F, l) = 1} z^{deg F}`
/// by double enumeration.
pub fn b2_direct(ctx: &FamilyContext, nu: usize, nz: usize) -> TruncSeries2 {
    let br = ctx.base_ring();
    let sieve = MonicSieve::new(&br, nu);
    let dl3 = sieve.cube_divisor_counts();
    let primes: Vec<usize> = sieve.primes().iter().map(|&i| i as usize).collect();
    let pos: HashMap<usize, usize> = primes.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let lifted: Vec<Poly> = primes.iter().map(|&i| ctx.lift(&br.monic_from_index(i as u64))).collect();
    // prime positions of each l
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); sieve.len()];
    for idx in 1..sieve.len() {
        let (p, _, rest) = sieve.split(idx);
        let mut s = support[rest].clone();
        s.push(pos[&p]);
        support[idx] = s;
    }
    let mut grid = vec![vec![0i64; nz + 1]; nu + 1];
    for f in admissible_conductors(ctx, nz) {
        let blocked: Vec<bool> = lifted.iter().map(|r| !coprime_ext(ctx, &f, r)).collect();
        let j = f.degree();
        for (idx, sup) in support.iter().enumerate() {
            if sup.iter().all(|&k| !blocked[k]) {
                grid[sieve.degree_of(idx)][j] += dl3[idx] as i64;
            }
        }
    }
    let mut out = TruncSeries2::zero(nu, nz);
    for (i, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out = out.add(&TruncSeries2::monomial(i, j, rat(v), nu, nz));
        }
    }
    out
}

pub fn b2_identity_check(ctx: &FamilyContext, nu: usize, nz: usize) -> Result<bool> {
    Ok(b2_direct(ctx, nu, nz) == b2_closed_form(ctx.spec().q(), nu, nz)?)
}
