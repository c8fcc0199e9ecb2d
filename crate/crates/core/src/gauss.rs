//! Hayes exponential and Gauss sums.
//!
//! Generalized sums `G(V, f) = sum_{u mod f} chi_f(u) e(uV/f)` live over a base
//! field `F_Q` with `Q = 1 mod 6`; `chi_f(u)` is read off `Res(f, u)`, which is
//! multiplicative in `f` and so covers non-squarefree moduli too.

use std::collections::HashMap;

use num_rational::BigRational;

use crate::characters::{CubicChar, FamilyContext};
use crate::cyclo::{rat, rat_pow, CycloCounts, CycloNumber, QOmega, ZOmega};
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec, OmegaMap};
use crate::poly::{resultant_slices, Poly, PolyRing};

/// The `1/T` coefficient of `a/h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LaurentHead(pub FieldElem);

pub fn hayes_head(ring: &PolyRing<'_>, a: &Poly, h: &Poly) -> Result<LaurentHead> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = h.degree();
    if n == 0 {
        return Ok(LaurentHead(FieldElem::ZERO));
    }
    let r = ring.rem(a, h);
    let f = ring.field();
    Ok(LaurentHead(FieldElem(f.mul_raw(r.coeff(n - 1), f.inv_raw(h.lead())))))
}

/// `e(a/h) = z_p^{tr(head)}`.
pub fn hayes_e(ring: &PolyRing<'_>, a: &Poly, h: &Poly) -> Result<CycloNumber> {
    let head = hayes_head(ring, a, h)?;
    let f = ring.field();
    Ok(CycloNumber::root(f.p(), f.trace_to_prime(head.0), 0))
}

/// A Gauss sum with the data it was computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussSumValue {
    pub value: CycloNumber,
    pub v: Poly,
    pub f: Poly,
    pub base_q: u32,
}

/// Heads of `T^j V / h` for `j < count`, `h` monic.
fn linear_heads(ring: &PolyRing<'_>, v: &Poly, h: &Poly, count: usize) -> Vec<u32> {
    let n = h.degree();
    if n == 0 {
        return vec![0; count];
    }
    let mut r = ring.rem(v, h);
    let t = Poly::x();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(r.coeff(n - 1));
        r = ring.rem(&ring.mul(&r, &t), h);
    }
    out
}

/// `tr(sum_j u_j h_j)` for every residue index `sum_j u_j Q^j`.
fn residue_traces(field: &FieldSpec, heads: &[u32]) -> Vec<u32> {
    let q = field.q() as usize;
    let p = field.p();
    let mut tr = Vec::with_capacity(q.pow(heads.len() as u32));
    tr.push(0u32);
    for &h in heads {
        let len = tr.len();
        for c in 1..q as u32 {
            let t = field.trace_raw(field.mul_raw(c, h));
            for k in 0..len {
                let x = tr[k] + t;
                tr.push(if x >= p { x - p } else { x });
            }
        }
    }
    tr
}

fn digits(idx: u64, q: u64, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    let mut k = idx;
    for _ in 0..n {
        out.push((k % q) as u32);
        k /= q;
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// `chi_h` on every residue class mod a monic `h`, as codes (`3` for zero).
#[derive(Clone, Debug)]
pub struct ResidueTable {
    h: Poly,
    codes: Vec<u8>,
}

impl ResidueTable {
    pub fn modulus(&self) -> &Poly {
        &self.h
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// Adds `weight * G(V, h)` into `acc`, with the character raised to `mult`.
    pub fn accumulate(&self, gf: &GaussField<'_>, v: &Poly, mult: u8, weight: i64, acc: &mut CycloCounts) {
        let n = self.h.degree();
        let heads = linear_heads(&gf.ring(), v, &self.h, n);
        let tr = residue_traces(gf.field, &heads);
        let mut grid = vec![[0i64; 3]; gf.field.p() as usize];
        for (&c, &t) in self.codes.iter().zip(&tr) {
            if c != 3 {
                grid[t as usize][((c as u32 * mult as u32) % 3) as usize] += 1;
            }
        }
        for (k, row) in grid.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                if n != 0 {
                    acc.add(k as u32, j as u8, n * weight);
                }
            }
        }
    }

    pub fn gauss(&self, gf: &GaussField<'_>, v: &Poly) -> CycloNumber {
        let mut acc = CycloCounts::new(gf.field.p());
        self.accumulate(gf, v, 1, 1, &mut acc);
        acc.to_number()
    }
}

/// Base field `F_Q`, `Q = 1 mod 6`, with its fixed `Omega`.
#[derive(Clone, Copy, Debug)]
pub struct GaussField<'a> {
    field: &'a FieldSpec,
    omega: &'a OmegaMap,
}

impl<'a> GaussField<'a> {
    pub fn new(field: &'a FieldSpec, omega: &'a OmegaMap) -> Result<Self> {
        if field.q() % 6 != 1 {
            return Err(Error::InvalidField(format!("Gauss sums need Q = 1 mod 6, got {}", field.q())));
        }
        Ok(GaussField { field, omega })
    }

    /// `F_{q^2}` of a family, sharing its `Omega`.
    pub fn from_family(ctx: &'a FamilyContext) -> Self {
        GaussField { field: ctx.ext(), omega: ctx.omega() }
    }

    pub fn field(&self) -> &'a FieldSpec {
        self.field
    }

    pub fn ring(&self) -> PolyRing<'a> {
        PolyRing::new(self.field)
    }

    fn p(&self) -> u32 {
        self.field.p()
    }

    fn big_q(&self) -> u64 {
        self.field.q() as u64
    }

    /// `chi_f(u)` as a code.
    pub fn char_code(&self, f: &Poly, u: &Poly) -> u8 {
        if u.is_zero() {
            return if f.degree() == 0 { 0 } else { 3 };
        }
        self.omega.cubic_exponent(resultant_slices(self.field, f.coeffs(), u.coeffs()))
    }

    pub fn residue_table(&self, h: &Poly) -> Result<ResidueTable> {
        if !h.is_monic() {
            return Err(Error::NotMonic);
        }
        let n = h.degree();
        let q = self.big_q();
        let size = q.pow(n as u32);
        let codes = if n == 0 {
            vec![0]
        } else {
            (0..size)
                .map(|idx| {
                    let u = digits(idx, q, n);
                    if u.is_empty() {
                        3
                    } else {
                        self.omega.cubic_exponent(resultant_slices(self.field, h.coeffs(), &u))
                    }
                })
                .collect()
        };
        Ok(ResidueTable { h: h.clone(), codes })
    }

    /// Direct summation over residues mod `f`. `G(V, 1) = 1`.
    pub fn gen_gauss(&self, v: &Poly, f: &Poly) -> Result<GaussSumValue> {
        let t = self.residue_table(f)?;
        Ok(GaussSumValue { value: t.gauss(self, v), v: v.clone(), f: f.clone(), base_q: self.field.q() })
    }

    /// `tau_k = sum_{a != 0} w^{k cubic(a)} z_p^{tr a}`: the constant-field Gauss sum
    /// of a character that acts on constants as `cubic^k`.
    pub fn tau(&self, k: u8) -> CycloNumber {
        let mut acc = CycloCounts::new(self.p());
        for a in 1..self.field.q() {
            let c = self.omega.cubic_exponent(a);
            acc.add(self.field.trace_raw(a), ((c as u32 * k as u32) % 3) as u8, 1);
        }
        acc.to_number()
    }

    /// `G(V, P^i)` for prime `P` with the closed-form table.
    pub fn gen_gauss_prime_power(&self, v: &Poly, p: &Poly, i: u32) -> Result<CycloNumber> {
        PrimeGauss::new(self, p)?.closed(v, i)
    }

    /// `G(V, f)` from the factorization of `f`, via
    /// `G(V, f1 f2) = G(V f2, f1) G(V, f2)` and the prime-power table.
    pub fn gen_gauss_factored(&self, v: &Poly, f: &Poly) -> Result<CycloNumber> {
        if !f.is_monic() {
            return Err(Error::NotMonic);
        }
        let r = self.ring();
        let fac = r.factorize(f)?;
        let mut acc = CycloNumber::one(self.p());
        let mut rest = f.clone();
        for (pr, e) in &fac.factors {
            let pe = r.pow(pr, *e as u64);
            rest = r.div_exact(&rest, &pe);
            let g = PrimeGauss::new(self, pr)?.closed(&r.mul(v, &rest), *e)?;
            acc = &acc * &g;
        }
        Ok(acc)
    }

    /// `sum_{h in M_m} chi_f(h)`, directly.
    pub fn char_sum(&self, f: &Poly, m: usize) -> ZOmega {
        let mut c = [0i64; 3];
        for h in self.ring().enumerate_monic(m) {
            let code = self.char_code(f, &h);
            if code != 3 {
                c[code as usize] += 1;
            }
        }
        ZOmega::from_counts(c)
    }

    /// The Gauss-sum side of the character-sum identity: for `n = deg f`,
    /// `3 | n`: `Q^m/|f| [G(0,f) + (Q-1) sum_{M_{<=n-m-2}} G(V,f) - sum_{M_{n-m-1}} G(V,f)]`,
    /// otherwise `Q^m/|f| conj(tau(chi_f)) sum_{M_{n-m-1}} G(V,f)`.
    pub fn char_sum_via_gauss(&self, f: &Poly, m: usize) -> Result<CycloNumber> {
        let n = f.degree();
        let t = self.residue_table(f)?;
        let r = self.ring();
        let scale = rat_pow(self.big_q(), m as i64 - n as i64);
        let top = n as i64 - m as i64 - 1;
        let mut last = CycloCounts::new(self.p());
        if top >= 0 {
            for v in r.enumerate_monic(top as usize) {
                t.accumulate(self, &v, 1, 1, &mut last);
            }
        }
        let last = last.to_number();
        if n.is_multiple_of(3) {
            let mut low = CycloCounts::new(self.p());
            t.accumulate(self, &Poly::zero(), 1, 1, &mut low);
            let w = self.big_q() as i64 - 1;
            for d in 0..top.max(0) as usize {
                for v in r.enumerate_monic(d) {
                    t.accumulate(self, &v, 1, w, &mut low);
                }
            }
            Ok((&low.to_number() - &last).scale(&scale))
        } else {
            let tau = self.tau((n % 3) as u8).conj();
            Ok((&tau * &last).scale(&scale))
        }
    }

    pub fn char_sum_check(&self, f: &Poly, m: usize) -> Result<bool> {
        let lhs = CycloNumber::from_qomega(self.p(), &self.char_sum(f, m).to_qomega());
        Ok(lhs == self.char_sum_via_gauss(f, m)?)
    }

    /// `sum_{F in M_d, (F, f) = 1} G(f, F)`.
    pub fn gauss_average_direct(&self, f: &Poly, d: usize) -> Result<CycloNumber> {
        let r = self.ring();
        let mut acc = CycloCounts::new(self.p());
        for big_f in r.enumerate_monic(d) {
            if !r.gcd(&big_f, f).is_one() {
                continue;
            }
            self.residue_table(&big_f)?.accumulate(self, f, 1, 1, &mut acc);
        }
        Ok(acc.to_number())
    }
}

/// Per-prime data for `G(V, P^i)`: `chi_P` on residues mod `P` and the
/// character sums over `M_{deg P - 1}`.
#[derive(Clone, Debug)]
pub struct PrimeGauss<'a> {
    gf: GaussField<'a>,
    p: Poly,
    table: ResidueTable,
    // root_factor(i) w^k at [i mod 3][k]
    roots: [[CycloNumber; 3]; 3],
}

impl<'a> PrimeGauss<'a> {
    pub fn new(gf: &GaussField<'a>, p: &Poly) -> Result<Self> {
        let r = gf.ring();
        if !p.is_monic() {
            return Err(Error::NotMonic);
        }
        if p.degree() == 0 || !r.is_irreducible(p) {
            return Err(Error::NotPrime);
        }
        let table = gf.residue_table(p)?;
        let mut c = [[0i64; 3]; 3];
        for h in r.enumerate_monic(p.degree() - 1) {
            let code = gf.char_code(p, &h);
            if code != 3 {
                for (k, row) in c.iter_mut().enumerate() {
                    row[(code as usize * k) % 3] += 1;
                }
            }
        }
        // sum_{h in M_{d-1}} chi_P(h)^k for k = 0, 1, 2
        let top_sums = c.map(ZOmega::from_counts);
        let roots = [0u32, 1, 2].map(|i| {
            let f = Self::compute_root_factor(gf, p.degree() as u32, &top_sums, i);
            [0u8, 1, 2].map(|k| &f * &CycloNumber::root(gf.p(), 0, k))
        });
        Ok(PrimeGauss { gf: *gf, p: p.clone(), table, roots })
    }

    fn norm(&self) -> u64 {
        self.gf.big_q().pow(self.p.degree() as u32)
    }

    /// `(alpha, V_1)` with `V = V_1 P^alpha`; `None` for `V = 0`.
    fn valuation(&self, v: &Poly) -> Option<(u32, Poly)> {
        if v.is_zero() {
            return None;
        }
        let r = self.gf.ring();
        let mut alpha = 0;
        let mut v1 = v.clone();
        loop {
            let (quo, rem) = r.divrem(&v1, &self.p).expect("P nonzero");
            if !rem.is_zero() {
                return Some((alpha, v1));
            }
            v1 = quo;
            alpha += 1;
        }
    }

    /// `eps(chi) omega(chi) |P|^{1/2}` for `chi = chi_P^i`, `3 ∤ i`:
    /// `-Q S` when `chi` is trivial on constants (`3 | i deg P`), `tau S` otherwise,
    /// with `S = sum_{M_{deg P - 1}} chi`.
    pub fn root_factor(&self, i: u32) -> CycloNumber {
        self.roots[(i % 3) as usize][0].clone()
    }

    fn compute_root_factor(gf: &GaussField<'_>, d: u32, top_sums: &[ZOmega; 3], i: u32) -> CycloNumber {
        let p = gf.p();
        let s = CycloNumber::from_qomega(p, &top_sums[(i % 3) as usize].to_qomega());
        if (d * i).is_multiple_of(3) {
            s.scale(&-rat(gf.big_q() as i64))
        } else {
            &gf.tau(((d * i) % 3) as u8) * &s
        }
    }

    /// Closed-form `G(V, P^i)`.
    pub fn closed(&self, v: &Poly, i: u32) -> Result<CycloNumber> {
        let p = self.gf.p();
        if i == 0 {
            return Ok(CycloNumber::one(p));
        }
        let norm = self.norm();
        let val = self.valuation(v);
        let alpha = val.as_ref().map(|x| x.0);
        let le = |k: u32| alpha.is_none_or(|a| k <= a);
        if le(i) {
            if !i.is_multiple_of(3) {
                return Ok(CycloNumber::zero(p));
            }
            let phi = rat_pow(norm, i as i64) - rat_pow(norm, i as i64 - 1);
            return Ok(CycloNumber::from_rational(p, phi));
        }
        let (alpha, v1) = val.expect("finite valuation");
        if i >= alpha + 2 {
            return Ok(CycloNumber::zero(p));
        }
        let scale = rat_pow(norm, i as i64 - 1);
        if i.is_multiple_of(3) {
            return Ok(CycloNumber::from_rational(p, -scale));
        }
        // chi_{P^i}(V_1^{-1}) = conj(chi_P(V_1))^i
        let c = self.gf.char_code(&self.p, &v1);
        let k = (3 - c % 3) as u32 * i % 3;
        Ok(self.roots[(i % 3) as usize][k as usize].scale(&scale))
    }

    /// `G(V, P^i)` by summation, reduced to residues mod `P`: with
    /// `u = u_0 + P w`, the sum over `w` is `|P|^{i-1}` or `0` according as
    /// `w -> e(wV/P^{i-1})` is trivial.
    pub fn direct(&self, v: &Poly, i: u32) -> CycloNumber {
        let gf = &self.gf;
        let p = gf.p();
        if i == 0 {
            return CycloNumber::one(p);
        }
        let r = gf.ring();
        let d = self.p.degree();
        if i >= 2 {
            let inner = r.pow(&self.p, i as u64 - 1);
            let heads = linear_heads(&r, v, &inner, d * (i as usize - 1));
            let field = gf.field;
            for &h in &heads {
                for b in 0..field.e() as usize {
                    let mut unit = vec![0u32; b + 1];
                    unit[b] = 1;
                    let c = field.elem_from_coeffs(&unit).expect("basis element");
                    if field.trace_raw(field.mul_raw(c.0, h)) != 0 {
                        return CycloNumber::zero(p);
                    }
                }
            }
        }
        let outer_mod = r.pow(&self.p, i as u64);
        let heads = linear_heads(&r, v, &outer_mod, d);
        let tr = residue_traces(gf.field, &heads);
        let mut acc = CycloCounts::new(p);
        for (&c, &t) in self.table.codes.iter().zip(&tr) {
            if c != 3 {
                acc.add(t, ((c as u32 * i) % 3) as u8, 1);
            }
        }
        acc.to_number().scale(&rat_pow(self.norm(), i as i64 - 1))
    }
}

/// Counts from an exhaustive identity grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GridStats {
    pub checked: usize,
    pub failed: usize,
}

impl GridStats {
    fn record(&mut self, pass: bool) {
        self.checked += 1;
        if !pass {
            self.failed += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.failed == 0
    }
}

/// Closed form against summation for every prime, `1 <= i <= max_i` and every
/// `V` given, plus `V P^a` for `a <= max_i + 1` to reach each valuation branch.
pub fn prime_power_grid(gf: &GaussField<'_>, primes: &[Poly], vs: &[Poly], max_i: u32) -> Result<GridStats> {
    let r = gf.ring();
    let mut st = GridStats::default();
    for p in primes {
        let pg = PrimeGauss::new(gf, p)?;
        let mut pv = vs.to_vec();
        let mut pa = Poly::one();
        for _ in 0..=max_i {
            pa = r.mul(&pa, p);
            pv.push(pa.clone());
            pv.push(r.mul(&pa, &Poly::x()));
        }
        // the summand depends on V only through V mod P^i
        for i in 1..=max_i {
            let pi = r.pow(p, i as u64);
            let mut direct: HashMap<Poly, CycloNumber> = HashMap::new();
            for v in &pv {
                let d = direct.entry(r.rem(v, &pi)).or_insert_with_key(|rv| pg.direct(rv, i));
                st.record(pg.closed(v, i)? == *d);
            }
        }
    }
    Ok(st)
}

/// For coprime `f1 != f2` among `moduli`, `G(V, f1 f2)` against
/// `conj(chi_{f1}(f2)) G(V, f1) G(V, f2)`, `G(V f2, f1) G(V, f2)` and the
/// factorization route.
pub fn multiplicativity_grid(gf: &GaussField<'_>, moduli: &[Poly], vs: &[Poly]) -> Result<GridStats> {
    let r = gf.ring();
    let p = gf.p();
    let mut st = GridStats::default();
    for (a, f1) in moduli.iter().enumerate() {
        let t1 = gf.residue_table(f1)?;
        for f2 in &moduli[a + 1..] {
            if !r.gcd(f1, f2).is_one() {
                continue;
            }
            let f12 = r.mul(f1, f2);
            let t2 = gf.residue_table(f2)?;
            let t12 = gf.residue_table(&f12)?;
            let c = gf.char_code(f1, f2);
            let chi2 = CycloNumber::root(p, 0, ((2 * c as u32) % 3) as u8);
            for v in vs {
                let lhs = t12.gauss(gf, v);
                let g2 = t2.gauss(gf, v);
                st.record(lhs == &chi2 * &(&t1.gauss(gf, v) * &g2));
                st.record(lhs == &t1.gauss(gf, &r.mul(v, f2)) * &g2);
                st.record(lhs == gf.gen_gauss_factored(v, &f12)?);
            }
        }
    }
    Ok(st)
}

/// `G(aV, f) = conj(chi_f(a)) G(V, f)` for `a` coprime to `f`.
pub fn twist_grid(gf: &GaussField<'_>, f: &Poly, twists: &[Poly], vs: &[Poly]) -> Result<GridStats> {
    let r = gf.ring();
    let t = gf.residue_table(f)?;
    let mut st = GridStats::default();
    for a in twists {
        if a.is_zero() || !r.gcd(a, f).is_one() {
            continue;
        }
        let c = gf.char_code(f, a);
        let phase = CycloNumber::root(gf.p(), 0, (3 - c) % 3);
        for v in vs {
            st.record(t.gauss(gf, &r.mul(a, v)) == &phase * &t.gauss(gf, v));
        }
    }
    Ok(st)
}

/// `G_{q^2}(1, F) = q^{deg F}` for squarefree monic `F` in `F_q[T]`, `deg F <= max_deg`.
pub fn lifted_conductor_grid(ctx: &FamilyContext, max_deg: usize) -> Result<GridStats> {
    let gf = GaussField::from_family(ctx);
    let br = ctx.base_ring();
    let p = ctx.ext().p();
    let q = ctx.spec().q();
    let mut st = GridStats::default();
    for d in 1..=max_deg {
        for f in br.enumerate_squarefree(d) {
            let g = gf.residue_table(&ctx.lift(&f))?.gauss(&gf, &Poly::one());
            st.record(g == norm_power(p, q, d));
        }
    }
    Ok(st)
}

/// `F sigma(F)` as a polynomial over `F_q`.
pub fn restricted_modulus(ctx: &FamilyContext, chi: &CubicChar) -> Result<Poly> {
    let r = ctx.ext_ring();
    let f = chi.conductor();
    let h = r.mul(f, &r.frobenius_conjugate(f)?);
    ctx.descend(&h).ok_or_else(|| Error::InvalidFamily(format!("{} sigma(F) not over F_q", r.encode(f))))
}

/// `G(chi) = sum_{a mod h} chi(a) e_q(a/h)` for the restriction of `chi` to
/// `F_q[T]`, `h = F sigma(F)`.
pub fn gauss_full(ctx: &FamilyContext, chi: &CubicChar) -> Result<GaussSumValue> {
    let h = restricted_modulus(ctx, chi)?;
    let base = ctx.base();
    let n = h.degree();
    let q = base.q() as u64;
    let mut acc = CycloCounts::new(base.p());
    let mut lifted = Vec::with_capacity(n);
    for idx in 0..q.pow(n as u32) {
        let a = digits(idx, q, n);
        lifted.clear();
        lifted.extend(a.iter().map(|&c| ctx.lift_key(c)));
        let code = chi.eval_code_slice(ctx, &lifted);
        if code == 3 {
            continue;
        }
        // deg a < deg h and h monic: the head is the top coefficient
        let head = if a.len() == n { a[n - 1] } else { 0 };
        acc.add(base.trace_raw(head), code, 1);
    }
    Ok(GaussSumValue { value: acc.to_number(), v: Poly::one(), f: h, base_q: base.q() })
}

/// `omega(chi) = q^{-deg h / 2} G(chi)` for the even restricted character.
pub fn root_number_via_gauss(ctx: &FamilyContext, chi: &CubicChar) -> Result<QOmega> {
    let g = gauss_full(ctx, chi)?;
    let w = g
        .value
        .as_qomega()
        .ok_or_else(|| Error::Unsupported("restricted Gauss sum outside Q(w)".into()))?;
    let n = g.f.degree() as i64;
    if n % 2 == 1 {
        return Err(Error::Unsupported("odd conductor degree".into()));
    }
    Ok(w.scale(&rat_pow(ctx.spec().q(), -n / 2)))
}

/// `|value|^2` when the value lies in `Q(w)`.
pub fn norm_if_qomega(x: &CycloNumber) -> Option<BigRational> {
    x.as_qomega().map(|w| w.norm())
}

/// `q^{deg F}` as a `CycloNumber` over `Q(z_p)`.
pub fn norm_power(p: u32, q: u64, deg: usize) -> CycloNumber {
    CycloNumber::from_rational(p, rat_pow(q, deg as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::FamilySpec;
    use crate::lfun::LPolynomial;
    use crate::characters::{CharTable, LiftedPrimes};
    use crate::poly::MonicSieve;
    use proptest::prelude::*;

    fn f25() -> (FieldSpec, OmegaMap) {
        let f = FieldSpec::new(5, 2).unwrap();
        let o = OmegaMap::new(&f).unwrap();
        (f, o)
    }

    #[test]
    fn hayes_basics() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let r = PolyRing::new(&f5);
        let t = Poly::x();
        let t2 = r.mul(&t, &t);
        assert_eq!(hayes_head(&r, &t, &t2).unwrap(), LaurentHead(FieldElem(1)));
        assert_eq!(hayes_e(&r, &t, &t2).unwrap(), CycloNumber::root(5, 1, 0));
        assert_eq!(hayes_e(&r, &t2, &Poly::one()).unwrap(), CycloNumber::one(5));
        assert!(hayes_e(&r, &t, &Poly::zero()).is_err());
    }

    fn arb_poly(q: u32, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0..q, 0..max_len)
    }

    proptest! {
        #[test]
        fn hayes_additive_and_periodic(a in arb_poly(25, 6), b in arb_poly(25, 6), h in arb_poly(25, 4)) {
            let (f, _) = f25();
            let r = PolyRing::new(&f);
            let a = Poly::from_keys(a);
            let b = Poly::from_keys(b);
            let mut hk = h;
            hk.push(1);
            let h = Poly::from_keys(hk);
            let ea = hayes_e(&r, &a, &h).unwrap();
            let eb = hayes_e(&r, &b, &h).unwrap();
            prop_assert_eq!(hayes_e(&r, &r.add(&a, &b), &h).unwrap(), &ea * &eb);
            prop_assert_eq!(hayes_e(&r, &r.add(&a, &r.mul(&b, &h)), &h).unwrap(), ea);
            prop_assert_eq!(hayes_e(&r, &r.mul(&a, &h), &h).unwrap(), CycloNumber::one(5));
        }
    }

    #[test]
    fn base_fields() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert!(OmegaMap::new(&f5).is_err());
        let f7 = FieldSpec::new(7, 1).unwrap();
        let o7 = OmegaMap::new(&f7).unwrap();
        let gf = GaussField::new(&f7, &o7).unwrap();
        let r = gf.ring();
        // |G(1, P)|^2 = |P| for a linear prime over F_7
        let g = gf.gen_gauss(&Poly::one(), &r.enumerate_monic(1).nth(3).unwrap()).unwrap();
        let z = g.value.to_complex();
        assert!((z.norm_sqr() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn trivial_modulus() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let g = gf.gen_gauss(&Poly::x(), &Poly::one()).unwrap();
        assert_eq!(g.value, CycloNumber::one(5));
        assert_eq!(gf.gauss_average_direct(&Poly::x(), 0).unwrap(), CycloNumber::one(5));
    }

    #[test]
    fn closed_form_matches_direct_on_linear_and_quadratic_primes() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let r = gf.ring();
        let primes: Vec<Poly> = r
            .enumerate_monic(1)
            .step_by(6)
            .chain(r.enumerate_monic(2).filter(|p| r.is_irreducible(p)).step_by(60))
            .collect();
        let mut vs: Vec<Poly> = vec![Poly::zero(), Poly::constant(7)];
        vs.extend(r.enumerate_monic(1).step_by(5));
        vs.extend(r.enumerate_monic(2).step_by(97));
        for p in &primes {
            let pg = PrimeGauss::new(&gf, p).unwrap();
            let mut pv = vs.clone();
            pv.push(p.clone());
            pv.push(r.mul(p, &Poly::constant(3)));
            pv.push(r.mul(p, p));
            for v in &pv {
                for i in 1..=4 {
                    assert_eq!(pg.closed(v, i).unwrap(), pg.direct(v, i), "P={p:?} V={v:?} i={i}");
                }
            }
        }
    }

    #[test]
    fn radical_reduction_matches_plain_sum() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let r = gf.ring();
        let p = r.enumerate_monic(1).nth(3).unwrap();
        let pg = PrimeGauss::new(&gf, &p).unwrap();
        for i in 1..=3u32 {
            let pi = r.pow(&p, i as u64);
            for v in [Poly::one(), Poly::x(), p.clone(), r.mul(&p, &Poly::x()), Poly::zero()] {
                assert_eq!(gf.gen_gauss(&v, &pi).unwrap().value, pg.direct(&v, i));
            }
        }
    }

    #[test]
    fn table_rows() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let r = gf.ring();
        let p = r.enumerate_monic(1).nth(2).unwrap();
        let pg = PrimeGauss::new(&gf, &p).unwrap();
        // i = alpha + 2
        assert!(pg.closed(&Poly::one(), 2).unwrap().is_zero());
        // i <= alpha, 3 | i
        let p3 = r.pow(&p, 3);
        assert_eq!(pg.closed(&p3, 3).unwrap(), CycloNumber::from_rational(5, rat(25i64.pow(3) - 25i64.pow(2))));
        assert_eq!(pg.closed(&Poly::zero(), 3).unwrap(), pg.direct(&Poly::zero(), 3));
    }

    #[test]
    fn multiplicativity_and_twist() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let r = gf.ring();
        let lin: Vec<Poly> = r.enumerate_monic(1).step_by(4).collect();
        let vs: Vec<Poly> = r.enumerate_monic(1).step_by(3).chain([Poly::one(), Poly::zero()]).collect();
        for (a, f1) in lin.iter().enumerate() {
            for f2 in &lin[a + 1..] {
                let f12 = r.mul(f1, f2);
                let c = gf.char_code(f1, f2);
                let chi2 = CycloNumber::root(5, 0, ((2 * c as u32) % 3) as u8);
                for v in &vs {
                    let lhs = gf.gen_gauss(v, &f12).unwrap().value;
                    let rhs = &chi2 * &(&gf.gen_gauss(v, f1).unwrap().value * &gf.gen_gauss(v, f2).unwrap().value);
                    assert_eq!(lhs, rhs);
                    let alt = &gf.gen_gauss(&r.mul(v, f2), f1).unwrap().value * &gf.gen_gauss(v, f2).unwrap().value;
                    assert_eq!(lhs, alt);
                    assert_eq!(gf.gen_gauss_factored(v, &f12).unwrap(), lhs);
                }
            }
        }
        // twisted relation G(aV, f) = conj(chi_f(a)) G(V, f)
        let f0 = r.mul(&lin[0], &r.enumerate_monic(2).nth(40).unwrap());
        for a in r.enumerate_monic(1).step_by(7).chain([Poly::constant(2), Poly::constant(13)]) {
            if !r.gcd(&a, &f0).is_one() {
                continue;
            }
            let c = gf.char_code(&f0, &a);
            let phase = CycloNumber::root(5, 0, (3 - c) % 3);
            for v in [Poly::one(), Poly::x()] {
                let lhs = gf.gen_gauss(&r.mul(&a, &v), &f0).unwrap().value;
                assert_eq!(lhs, &phase * &gf.gen_gauss(&v, &f0).unwrap().value);
            }
        }
    }

    #[test]
    fn base_field_conductors_have_real_gauss_sums() {
        let ctx = FamilyContext::new(FamilySpec::new(5, 0).unwrap()).unwrap();
        let gf = GaussField::from_family(&ctx);
        let br = ctx.base_ring();
        for d in 1..=2 {
            for f in br.enumerate_squarefree(d) {
                let g = gf.gen_gauss(&Poly::one(), &ctx.lift(&f)).unwrap().value;
                assert_eq!(g, norm_power(5, 5, d));
            }
        }
    }

    #[test]
    fn char_sum_identity() {
        let (f, o) = f25();
        let gf = GaussField::new(&f, &o).unwrap();
        let r = gf.ring();
        let quad = r.enumerate_monic(2).find(|p| r.is_irreducible(p)).unwrap();
        assert!(gf.char_sum_check(&quad, 0).unwrap());
        assert!(gf.char_sum_check(&quad, 1).unwrap());
        assert!(gf.char_sum_check(&quad, 2).unwrap());
        let lin = r.enumerate_monic(1).nth(1).unwrap();
        let cubic = r.mul(&quad, &lin);
        assert!(gf.char_sum_check(&cubic, 1).unwrap());
        assert!(gf.char_sum_check(&cubic, 3).unwrap());
    }

    #[test]
    fn family_gauss_sums_agree() {
        let ctx = FamilyContext::new(FamilySpec::new(5, 2).unwrap()).unwrap();
        let gf = GaussField::from_family(&ctx);
        let br = ctx.base_ring();
        let sieve = MonicSieve::new(&br, 4);
        let lp = LiftedPrimes::new(&ctx, &sieve);
        for chi in ctx.family_iter().step_by(37) {
            let g = gauss_full(&ctx, &chi).unwrap();
            let g2 = gf.gen_gauss(&Poly::one(), chi.conductor()).unwrap().value;
            assert_eq!(g.value, g2);
            let gbar = gauss_full(&ctx, &chi.conj()).unwrap();
            assert_eq!(g.value.conj(), gbar.value);
            let t = CharTable::build(&ctx, &chi, &sieve, &lp);
            let l = LPolynomial::from_table(5, 2, &t, &sieve).unwrap();
            assert_eq!(root_number_via_gauss(&ctx, &chi).unwrap(), l.root_number());
            assert_eq!(norm_if_qomega(&g.value), Some(rat(5i64.pow(4))));
        }
    }
}
