//! L-polynomials of the restricted characters, root numbers, functional
//! equation and approximate functional equation checks, central values.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::characters::CharTable;
use crate::cyclo::{rat, rat_pow, QOmega, QuadExt, ZOmega};
use crate::error::{Error, Result};
use crate::poly::{binomial, MonicSieve};

/// `L(u, chi) = sum_n a_n u^n` for an even primitive character whose
/// restricted conductor has degree `g + 2`; stores `a_0..a_{g+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LPolynomial {
    q: u64,
    g: u32,
    a: Vec<ZOmega>,
}

/// Coefficients of the product of two polynomials over `Z[w]`.
pub fn poly_mul(a: &[ZOmega], b: &[ZOmega]) -> Vec<ZOmega> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZOmega::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `sum_n c_n s^n` with `s = q^{-1/2}`.
pub fn eval_at_s(q: u64, c: &[ZOmega]) -> QuadExt {
    let mut acc = QuadExt::zero(q);
    for (n, &x) in c.iter().enumerate() {
        if !x.is_zero() {
            acc += &QuadExt::s_pow(q, n as u32).mul_qomega(&x.to_qomega());
        }
    }
    acc
}

impl LPolynomial {
    pub fn new(q: u64, g: u32, mut a: Vec<ZOmega>) -> Result<LPolynomial> {
        if a.first() != Some(&ZOmega::ONE) {
            return Err(Error::OutOfRange("a_0 must be 1".into()));
        }
        let len = g as usize + 2;
        if a.len() > len {
            if a[len..].iter().any(|x| !x.is_zero()) {
                return Err(Error::OutOfRange(format!("degree exceeds g + 1 = {}", g + 1)));
            }
            a.truncate(len);
        }
        a.resize(len, ZOmega::ZERO);
        Ok(LPolynomial { q, g, a })
    }

    /// `a_n = sum_{f in M_n} chi(f)` for `n <= g + 1` from a character table.
    pub fn from_table(q: u64, g: u32, table: &CharTable, sieve: &MonicSieve) -> Result<LPolynomial> {
        let top = g as usize + 1;
        if sieve.max_deg() < top {
            return Err(Error::OutOfRange(format!("table degree {} < {}", sieve.max_deg(), top)));
        }
        let a: Vec<ZOmega> = (0..=top).map(|n| table.degree_sum(sieve, n)).collect();
        if a[0] != ZOmega::ONE {
            return Err(Error::TrivialCharacter);
        }
        Ok(LPolynomial { q, g, a })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn coeffs(&self) -> &[ZOmega] {
        &self.a
    }

    pub fn conj(&self) -> LPolynomial {
        LPolynomial { q: self.q, g: self.g, a: self.a.iter().map(|x| x.conj()).collect() }
    }

    pub fn value_at_one(&self) -> ZOmega {
        self.a.iter().fold(ZOmega::ZERO, |acc, &x| acc + x)
    }

    /// `L(u) / (1 - u)`, coefficients `c_0..c_g`; requires the trivial zero.
    pub fn quotient(&self) -> Result<Vec<ZOmega>> {
        if !self.value_at_one().is_zero() {
            return Err(Error::OutOfRange("L(1) != 0: no trivial zero".into()));
        }
        let mut c = Vec::with_capacity(self.g as usize + 1);
        let mut acc = ZOmega::ZERO;
        for &x in &self.a[..=self.g as usize] {
            acc += x;
            c.push(acc);
        }
        Ok(c)
    }

    /// Coefficients of `L(u)^k`.
    pub fn power(&self, k: u32) -> Vec<ZOmega> {
        let mut acc = vec![ZOmega::ONE];
        for _ in 0..k {
            acc = poly_mul(&acc, &self.a);
        }
        acc
    }

    /// `b_n` of `(L(u)/(1 - u))^k`, `n = 0..kg`.
    pub fn quotient_power(&self, k: u32) -> Result<Vec<ZOmega>> {
        let c = self.quotient()?;
        let mut acc = vec![ZOmega::ONE];
        for _ in 0..k {
            acc = poly_mul(&acc, &c);
        }
        Ok(acc)
    }

    /// `L(1/2)^k` in `Q(w)[s]`.
    pub fn central_value(&self, k: u32) -> QuadExt {
        eval_at_s(self.q, &self.a).pow(k)
    }

    /// `omega(chi) = -q^{-g/2} a_{g+1}` (even character, `deg h = g + 2`).
    pub fn root_number(&self) -> QOmega {
        let top = self.a[self.g as usize + 1];
        (-top).to_qomega().scale(&rat_pow(self.q, -(self.g as i64 / 2)))
    }

    /// `b_n(chi) = b_{kg-n}(chi-bar) omega^k q^{n - kg/2}` for `n = 0..kg`.
    pub fn functional_equation_check(&self, k: u32) -> Result<bool> {
        let kg = (k * self.g) as usize;
        if kg % 2 == 1 {
            return Err(Error::Unsupported("kg odd needs a half-integral power of q".into()));
        }
        let b = self.quotient_power(k)?;
        let bc = self.conj().quotient_power(k)?;
        let wk = self.root_number().pow(k);
        for n in 0..=kg {
            let lhs = b[n].to_qomega();
            let scale = rat_pow(self.q, n as i64 - (kg / 2) as i64);
            let rhs = (&bc[kg - n].to_qomega() * &wk).scale(&scale);
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Right side of the approximate functional equation, from `L(u)^k`.
    pub fn afe(&self, k: u32, big_a: u32, weights: AfeWeights) -> Result<QuadExt> {
        let pk = self.power(k);
        let conj: Vec<ZOmega> = pk.iter().map(|x| x.conj()).collect();
        afe_value(self.q, self.g, k, big_a, &self.root_number(), &pk, &conj, weights)
    }

    pub fn afe_check(&self, k: u32, big_a: u32) -> Result<bool> {
        Ok(self.afe(k, big_a, AfeWeights::Scaled)? == self.central_value(k))
    }

    /// Moduli of the roots of `L(u)/(1 - u)`; all equal `q^{-1/2}` under RH.
    pub fn rh_moduli(&self) -> Result<Vec<f64>> {
        let c = self.quotient()?;
        let c: Vec<Complex64> = c.iter().map(|x| x.to_complex()).collect();
        polynomial_root_moduli(&c)
    }

    /// `L_C(u, chi) L_C(u, chi-bar)` has integer coefficients.
    pub fn weil_pair_is_integral(&self) -> Result<bool> {
        let p = poly_mul(&self.quotient()?, &self.conj().quotient()?);
        Ok(p.iter().all(|x| x.b == 0))
    }
}

/// Layer weights in the approximate functional equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfeWeights {
    /// `C(k+i-1, i) q^{-i/2}`: what expanding `(1 - u)^{-k}` at `u = q^{-1/2}` gives.
    Scaled,
    /// `C(k+i-1, i)` alone. Not an identity; kept to measure the discrepancy.
    Unscaled,
}

impl AfeWeights {
    pub fn weight(self, q: u64, k: u32, i: u32) -> QuadExt {
        let c = rat(binomial((k + i - 1) as u64, i as u64) as i64);
        match self {
            AfeWeights::Scaled => QuadExt::s_pow(q, i).scale(&c),
            AfeWeights::Unscaled => QuadExt::from_rational(q, c),
        }
    }
}

/// `(1 - s)^k ( sum_{i<=A} w_i sum_{n<=A-i} x_n s^n
///   + omega^k sum_{i<=kg-A-1} w_i sum_{n<=kg-A-1-i} y_n s^n )`
/// where `x_n = sum_{f in M_n} chi(f) d_k(f)` and `y_n` the same for `chi-bar`.
#[allow(clippy::too_many_arguments)]
pub fn afe_value(
    q: u64,
    g: u32,
    k: u32,
    big_a: u32,
    omega: &QOmega,
    x: &[ZOmega],
    y: &[ZOmega],
    weights: AfeWeights,
) -> Result<QuadExt> {
    let kg = k * g;
    if big_a >= kg {
        return Err(Error::OutOfRange(format!("A = {big_a} not in 0..{kg}")));
    }
    let dual_top = kg - big_a - 1;
    if x.len() <= big_a as usize || y.len() <= dual_top as usize {
        return Err(Error::OutOfRange("not enough coefficient sums".into()));
    }
    let prefix = |v: &[ZOmega], top: u32| -> QuadExt { eval_at_s(q, &v[..=top as usize]) };
    let mut prin = QuadExt::zero(q);
    for i in 0..=big_a {
        prin += &(&prefix(x, big_a - i) * &weights.weight(q, k, i));
    }
    let mut dual = QuadExt::zero(q);
    for i in 0..=dual_top {
        dual += &(&prefix(y, dual_top - i) * &weights.weight(q, k, i));
    }
    let dual = dual.mul_qomega(&omega.pow(k));
    let pre = (&QuadExt::one(q) - &QuadExt::s(q)).pow(k);
    Ok(&pre * &(&prin + &dual))
}

/// Root moduli of `sum c_n u^n` via companion-matrix eigenvalues.
pub fn polynomial_root_moduli(c: &[Complex64]) -> Result<Vec<f64>> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    // shifted QR can stall on spectra symmetric about the origin; moving
    // the spectrum by a fixed offset breaks the symmetry
    for attempt in 0..4 {
        let shift = Complex64::new(0.31, 0.17) * attempt as f64;
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += shift;
        }
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, 2000) {
            let (_, t) = schur.unpack();
            let mut out: Vec<f64> = (0..n).map(|i| (t[(i, i)] - shift).norm()).collect();
            out.sort_by(|a, b| a.total_cmp(b));
            return Ok(out);
        }
    }
    Err(Error::Unsupported("eigenvalue iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{CubicChar, FamilyContext, FamilySpec, LiftedPrimes};

    fn family_lpolys(q: u64, g: u32, step: usize) -> Vec<(LPolynomial, LPolynomial)> {
        let ctx = FamilyContext::new(FamilySpec::new(q, g).unwrap()).unwrap();
        let br = ctx.base_ring();
        let sieve = MonicSieve::new(&br, g as usize + 2);
        let lp = LiftedPrimes::new(&ctx, &sieve);
        ctx.family()
            .iter()
            .step_by(step)
            .map(|f| {
                let chi = CubicChar::from_conductor(&ctx, f).unwrap();
                let t = CharTable::build(&ctx, &chi, &sieve, &lp);
                let tc = CharTable::build(&ctx, &chi.conj(), &sieve, &lp);
                assert!(t.degree_sum(&sieve, g as usize + 2).is_zero());
                (
                    LPolynomial::from_table(q, g, &t, &sieve).unwrap(),
                    LPolynomial::from_table(q, g, &tc, &sieve).unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn identities_on_sampled_family() {
        let mut unscaled_misses = 0;
        for (l, lc) in family_lpolys(5, 2, 7) {
            assert_eq!(l.coeffs()[0], ZOmega::ONE);
            assert!(l.value_at_one().is_zero());
            assert_eq!(lc, l.conj());
            let w = l.root_number();
            assert_eq!(&w * &w.conj(), QOmega::one());
            assert_eq!(lc.root_number(), w.conj());
            assert!(l.functional_equation_check(1).unwrap());
            assert!(l.functional_equation_check(2).unwrap());
            for a in 0..4 {
                assert!(l.afe_check(2, a).unwrap());
            }
            if l.afe(2, 1, AfeWeights::Unscaled).unwrap() != l.central_value(2) {
                unscaled_misses += 1;
            }
            for a in 0..2 {
                assert!(l.afe_check(1, a).unwrap());
            }
            assert_eq!(l.central_value(2), l.central_value(1).pow(2));
            assert_eq!(lc.central_value(1), l.central_value(1).conj());
            assert!(l.weil_pair_is_integral().unwrap());
            for m in l.rh_moduli().unwrap() {
                assert!((m - 5f64.powf(-0.5)).abs() < 1e-6);
            }
        }
        assert!(unscaled_misses > 0);
    }

    #[test]
    fn genus_zero_family_sum_is_real() {
        let mut acc = QuadExt::zero(5);
        for (l, _) in family_lpolys(5, 0, 1) {
            acc += &l.central_value(1);
        }
        assert!(acc.is_real());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LPolynomial::new(5, 2, vec![ZOmega::new(2, 0)]).is_err());
        let l = LPolynomial::new(5, 2, vec![ZOmega::ONE, ZOmega::new(1, 0)]).unwrap();
        assert!(l.quotient().is_err());
        assert!(l.afe(2, 4, AfeWeights::Scaled).is_err());
    }

    #[test]
    fn root_moduli_of_known_polynomial() {
        // (1 - 2u)(1 + 3u) = 1 + u - 6u^2
        let c = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-6.0, 0.0)];
        let m = polynomial_root_moduli(&c).unwrap();
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
    }
}
