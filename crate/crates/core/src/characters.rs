//! Cubic characters over `F_{q^2}[T]` and the genus-`g` family restricted to `F_q[T]`.
//!
//! For monic `F` over `F_Q` (`Q = q^2`) and any `a`, `chi_F(a)` is read off
//! `Res(F, a) = prod_{P | F} N_{P}(a mod P)`: the cube class of the norm is the
//! cubic residue symbol, so one resultant evaluates the whole product.

use std::collections::HashSet;
use std::fmt;

use crate::cyclo::ZOmega;
use crate::error::{Error, Result};
use crate::field::{check_family_base, embedding, FieldSpec, OmegaMap};
use crate::poly::{resultant_slices, MonicSieve, Poly, PolyRing};

/// A value of a cubic character: `0` or `w^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CharValue {
    Zero,
    Root(u8),
}

impl CharValue {
    pub const ONE: CharValue = CharValue::Root(0);

    /// `3` encodes zero, as in [`OmegaMap::cubic_exponent`].
    #[inline]
    pub fn from_code(c: u8) -> CharValue {
        if c >= 3 {
            CharValue::Zero
        } else {
            CharValue::Root(c)
        }
    }

    #[inline]
    pub fn code(self) -> u8 {
        match self {
            CharValue::Zero => 3,
            CharValue::Root(j) => j,
        }
    }

    pub fn is_zero(self) -> bool {
        self == CharValue::Zero
    }

    pub fn pow(self, k: u32) -> CharValue {
        match self {
            CharValue::Zero if k == 0 => CharValue::ONE,
            CharValue::Zero => CharValue::Zero,
            CharValue::Root(j) => CharValue::Root(((j as u32 * k) % 3) as u8),
        }
    }

    pub fn conj(self) -> CharValue {
        self.pow(2)
    }

    pub fn to_zomega(self) -> ZOmega {
        match self {
            CharValue::Zero => ZOmega::ZERO,
            CharValue::Root(j) => ZOmega::root(j),
        }
    }
}

impl std::ops::Mul for CharValue {
    type Output = CharValue;

    fn mul(self, o: CharValue) -> CharValue {
        match (self, o) {
            (CharValue::Root(a), CharValue::Root(b)) => CharValue::Root((a + b) % 3),
            _ => CharValue::Zero,
        }
    }
}

#[inline]
fn mul_code(a: u8, b: u8) -> u8 {
    if a == 3 || b == 3 {
        3
    } else {
        (a + b) % 3
    }
}

/// `(q, g)` for the non-Kummer family: `q = 2 mod 3`, `g` even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    q: u64,
    g: u32,
}

impl FamilySpec {
    pub fn new(q: u64, g: u32) -> Result<FamilySpec> {
        check_family_base(q)?;
        if g % 2 == 1 {
            return Err(Error::InvalidFamily(format!(
                "genus must be even (conductor degree g/2 + 1 over F_q^2), got g = {g}"
            )));
        }
        Ok(FamilySpec { q, g })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    /// Conductor degree over `F_{q^2}`.
    pub fn m(&self) -> usize {
        self.g as usize / 2 + 1
    }

    /// Conductor degree of the restriction to `F_q[T]`.
    pub fn restricted_degree(&self) -> usize {
        self.g as usize + 2
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} g={}", self.q, self.g)
    }
}

/// Fields, embedding and `Omega` shared by every character of one family.
#[derive(Debug)]
pub struct FamilyContext {
    spec: FamilySpec,
    base: FieldSpec,
    ext: FieldSpec,
    omega: OmegaMap,
    embed: Vec<u32>,
}

impl FamilyContext {
    pub fn new(spec: FamilySpec) -> Result<FamilyContext> {
        Self::build(spec, false)
    }

    /// Same family with the other choice of `Omega`.
    pub fn with_alternate_omega(spec: FamilySpec) -> Result<FamilyContext> {
        Self::build(spec, true)
    }

    fn build(spec: FamilySpec, alternate: bool) -> Result<FamilyContext> {
        let (p, e) = check_family_base(spec.q)?;
        let base = FieldSpec::new(p, e)?;
        let ext = FieldSpec::new(p, 2 * e)?;
        let omega = if alternate { OmegaMap::alternate(&ext)? } else { OmegaMap::new(&ext)? };
        let embed = embedding(&base, &ext)?;
        Ok(FamilyContext { spec, base, ext, omega, embed })
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    pub fn ext(&self) -> &FieldSpec {
        &self.ext
    }

    pub fn omega(&self) -> &OmegaMap {
        &self.omega
    }

    pub fn base_ring(&self) -> PolyRing<'_> {
        PolyRing::new(&self.base)
    }

    pub fn ext_ring(&self) -> PolyRing<'_> {
        PolyRing::new(&self.ext)
    }

    /// `F_q[T] -> F_{q^2}[T]`.
    pub fn lift(&self, a: &Poly) -> Poly {
        Poly::from_keys(a.coeffs().iter().map(|&c| self.embed[c as usize]).collect())
    }

    #[inline]
    pub fn lift_key(&self, c: u32) -> u32 {
        self.embed[c as usize]
    }

    /// Inverse of [`lift`](Self::lift); `None` if some coefficient is outside `F_q`.
    pub fn descend(&self, a: &Poly) -> Option<Poly> {
        let mut out = Vec::with_capacity(a.coeffs().len());
        for &c in a.coeffs() {
            out.push(self.embed.iter().position(|&x| x == c)? as u32);
        }
        Some(Poly::from_keys(out))
    }

    /// Whether `a` over `F_{q^2}` has all coefficients in `F_q`.
    pub fn is_defined_over_base(&self, a: &Poly) -> bool {
        self.ext_ring().frobenius_unchecked(a) == *a
    }

    /// `F` is a family conductor: monic, squarefree, degree `m`, and no prime of
    /// `F_q[T]` divides it (equivalently `gcd(F, sigma F) = 1`).
    pub fn is_family_conductor(&self, f: &Poly) -> bool {
        if f.degree() != self.spec.m() || !f.is_monic() {
            return false;
        }
        let r = self.ext_ring();
        r.is_squarefree(f) && r.gcd(f, &r.frobenius_unchecked(f)).is_one()
    }

    /// Family conductors in canonical order.
    pub fn family(&self) -> Vec<Poly> {
        let r = self.ext_ring();
        r.enumerate_monic(self.spec.m()).filter(|f| self.is_family_conductor(f)).collect()
    }

    pub fn family_count(&self) -> usize {
        let r = self.ext_ring();
        r.enumerate_monic(self.spec.m()).filter(|f| self.is_family_conductor(f)).count()
    }

    /// Characters of the family, all exponents `1`.
    pub fn family_iter(&self) -> impl Iterator<Item = CubicChar> + '_ {
        let r = self.ext_ring();
        r.enumerate_monic(self.spec.m())
            .filter(move |f| self.is_family_conductor(f))
            .map(move |f| CubicChar::from_conductor(self, &f).expect("family conductor"))
    }

    /// Squarefree monic `F` of degree `m` none of whose `F_{q^2}`-prime factors has
    /// coefficients in `F_q`. This admits `F = pi * sigma(pi)` for primes `pi`
    /// above an even-degree prime of `F_q[T]`, whose restriction is principal.
    pub fn prefilter_count(&self) -> usize {
        let r = self.ext_ring();
        r.enumerate_squarefree(self.spec.m())
            .filter(|f| {
                let fac = r.factorize(f).expect("nonzero");
                fac.factors.iter().all(|(p, _)| !self.is_defined_over_base(p))
            })
            .count()
    }

    /// Prefiltered `F` sharing a factor with `sigma(F)`, i.e. divisible by some
    /// `pi * sigma(pi)`; the prefilter count is the family plus these.
    pub fn conjugate_pair_count(&self) -> usize {
        let r = self.ext_ring();
        r.enumerate_squarefree(self.spec.m())
            .filter(|f| {
                let fac = r.factorize(f).expect("nonzero");
                fac.factors.iter().all(|(p, _)| !self.is_defined_over_base(p))
                    && !r.gcd(f, &r.frobenius_unchecked(f)).is_one()
            })
            .count()
    }

    /// Prefiltered `F` that lie in `F_q[T]`: products of split pairs `pi * sigma(pi)`.
    pub fn split_pair_count(&self) -> usize {
        let r = self.ext_ring();
        r.enumerate_squarefree(self.spec.m())
            .filter(|f| {
                let fac = r.factorize(f).expect("nonzero");
                self.is_defined_over_base(f) && fac.factors.iter().all(|(p, _)| !self.is_defined_over_base(p))
            })
            .count()
    }
}

/// `chi_F = prod chi_{P_i}^{e_i}` with `F = prod P_i` squarefree over `F_{q^2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubicChar {
    conductor: Poly,
    primes: Vec<Poly>,
    exps: Vec<u8>,
}

impl CubicChar {
    /// Primitive character of conductor `f` with all exponents `1`.
    pub fn from_conductor(ctx: &FamilyContext, f: &Poly) -> Result<CubicChar> {
        let r = ctx.ext_ring();
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !f.is_monic() {
            return Err(Error::NotMonic);
        }
        if f.is_constant() {
            return Err(Error::TrivialCharacter);
        }
        let fac = r.factorize(f)?;
        if !fac.is_squarefree() {
            return Err(Error::NotSquarefree);
        }
        let primes: Vec<Poly> = fac.factors.into_iter().map(|(p, _)| p).collect();
        let exps = vec![1; primes.len()];
        Ok(CubicChar { conductor: f.clone(), primes, exps })
    }

    /// Character with explicit exponents in `{1, 2}` on distinct monic primes.
    pub fn from_primes(ctx: &FamilyContext, primes: &[(Poly, u8)]) -> Result<CubicChar> {
        let r = ctx.ext_ring();
        if primes.is_empty() {
            return Err(Error::TrivialCharacter);
        }
        let mut v: Vec<(Poly, u8)> = primes.to_vec();
        v.sort_by(|a, b| r.cmp(&a.0, &b.0));
        let mut conductor = Poly::one();
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::NotSquarefree);
            }
        }
        for (p, e) in &v {
            if !p.is_monic() {
                return Err(Error::NotMonic);
            }
            if !r.is_irreducible(p) {
                return Err(Error::NotPrime);
            }
            if !(1..=2).contains(e) {
                return Err(Error::OutOfRange(format!("exponent {e} not in {{1, 2}}")));
            }
            conductor = r.mul(&conductor, p);
        }
        let (primes, exps) = v.into_iter().unzip();
        Ok(CubicChar { conductor, primes, exps })
    }

    pub fn conductor(&self) -> &Poly {
        &self.conductor
    }

    pub fn primes(&self) -> &[Poly] {
        &self.primes
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    /// Genus of the restriction, from `deg F = g/2 + 1`.
    pub fn genus(&self) -> u32 {
        2 * (self.conductor.degree() as u32 - 1)
    }

    /// `chi-bar`: exponents doubled.
    pub fn conj(&self) -> CubicChar {
        CubicChar {
            conductor: self.conductor.clone(),
            primes: self.primes.clone(),
            exps: self.exps.iter().map(|&e| 3 - e).collect(),
        }
    }

    /// `chi_{sigma F}` with the same exponents.
    pub fn sigma(&self, ctx: &FamilyContext) -> CubicChar {
        let r = ctx.ext_ring();
        let mut v: Vec<(Poly, u8)> =
            self.primes.iter().zip(&self.exps).map(|(p, &e)| (r.frobenius_unchecked(p), e)).collect();
        v.sort_by(|a, b| r.cmp(&a.0, &b.0));
        let (primes, exps) = v.into_iter().unzip();
        CubicChar { conductor: r.frobenius_unchecked(&self.conductor), primes, exps }
    }

    fn all_ones(&self) -> bool {
        self.exps.iter().all(|&e| e == 1)
    }

    /// Value on `a` over `F_{q^2}`, as a code (`3` for zero).
    #[inline]
    pub fn eval_code_slice(&self, ctx: &FamilyContext, a: &[u32]) -> u8 {
        if a.is_empty() {
            return 3;
        }
        let f = ctx.ext();
        let om = ctx.omega();
        if self.all_ones() {
            return om.cubic_exponent(resultant_slices(f, self.conductor.coeffs(), a));
        }
        let mut acc = 0u8;
        for (p, &e) in self.primes.iter().zip(&self.exps) {
            let c = om.cubic_exponent(resultant_slices(f, p.coeffs(), a));
            if c == 3 {
                return 3;
            }
            acc = (acc + c * e) % 3;
        }
        acc
    }

    pub fn eval_ext(&self, ctx: &FamilyContext, a: &Poly) -> CharValue {
        CharValue::from_code(self.eval_code_slice(ctx, a.coeffs()))
    }

    /// Value on `a` in `F_q[T]` via the inclusion into `F_{q^2}[T]`.
    pub fn eval_base(&self, ctx: &FamilyContext, a: &Poly) -> CharValue {
        self.eval_ext(ctx, &ctx.lift(a))
    }

    /// `(P1)^e1*(P2)^e2*...` in canonical prime order.
    pub fn encode(&self, ctx: &FamilyContext) -> String {
        let r = ctx.ext_ring();
        self.primes
            .iter()
            .zip(&self.exps)
            .map(|(p, e)| format!("({})^{}", r.encode(p), e))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn decode(ctx: &FamilyContext, s: &str) -> Result<CubicChar> {
        let r = ctx.ext_ring();
        let bad = || Error::Parse(format!("bad character encoding {s:?}"));
        let mut primes = Vec::new();
        for part in split_star(s.trim()) {
            let (body, e) = part.rsplit_once(")^").ok_or_else(bad)?;
            let body = body.strip_prefix('(').ok_or_else(bad)?;
            let e: u8 = e.parse().map_err(|_| bad())?;
            primes.push((r.decode(body)?, e));
        }
        CubicChar::from_primes(ctx, &primes)
    }
}

fn split_star(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Cubic residue symbol by the modular power `a^{(|P|-1)/3} mod P`.
pub fn cubic_symbol(field: &FieldSpec, omega: &OmegaMap, p: &Poly, a: &Poly) -> Result<CharValue> {
    let r = PolyRing::new(field);
    if !p.is_monic() || !r.is_irreducible(p) {
        return Err(Error::NotPrime);
    }
    let norm = (field.q() as u64)
        .checked_pow(p.degree() as u32)
        .ok_or_else(|| Error::OutOfRange("residue field too large".into()))?;
    if (norm - 1) % 3 != 0 {
        return Err(Error::InvalidField(format!("3 does not divide {norm} - 1")));
    }
    let a = r.rem(a, p);
    if a.is_zero() {
        return Ok(CharValue::Zero);
    }
    let v = r.powmod(&a, (norm - 1) / 3, p);
    if !v.is_constant() {
        return Err(Error::InvalidField("power residue is not a constant".into()));
    }
    let j = omega
        .preimage(field, crate::field::FieldElem(v.coeff(0)))
        .ok_or_else(|| Error::InvalidField("power residue is not a cube root of unity".into()))?;
    Ok(CharValue::Root(j))
}

/// `chi_F(f)` for `F, f` squarefree in `F_q[T]`, where `chi_F` is the character
/// of `F` over `F_{q^2}[T]`. Odd-degree primes of `F` stay prime over `F_{q^2}`
/// and contribute `chi_P` with norm `q^{2 deg P}`; even-degree primes split as
/// `Q * sigma(Q)` and contribute `chi_Q chi_{sigma Q}`.
pub fn restricted_value(ctx: &FamilyContext, big_f: &Poly, f: &Poly) -> Result<CharValue> {
    let br = ctx.base_ring();
    let er = ctx.ext_ring();
    for x in [big_f, f] {
        if !br.is_squarefree(x) {
            return Err(Error::NotSquarefree);
        }
    }
    let fl = ctx.lift(f);
    let mut acc = CharValue::ONE;
    for (p, _) in br.factorize(big_f)?.factors {
        let pl = ctx.lift(&p);
        if p.degree() % 2 == 1 {
            acc = acc * cubic_symbol(ctx.ext(), ctx.omega(), &pl, &fl)?;
        } else {
            let split = er.factorize(&pl)?;
            if split.factors.len() != 2 {
                return Err(Error::InvalidField("even-degree prime did not split".into()));
            }
            for (qq, _) in &split.factors {
                acc = acc * cubic_symbol(ctx.ext(), ctx.omega(), qq, &fl)?;
            }
        }
    }
    Ok(acc)
}

/// Whether `chi_F(f) = 1` for squarefree `F, f` in `F_q[T]`.
pub fn restriction_triviality_check(ctx: &FamilyContext, big_f: &Poly, f: &Poly) -> Result<bool> {
    Ok(restricted_value(ctx, big_f, f)? == CharValue::ONE)
}

/// `chi_{sigma F}(f) = conj(chi_F(f))` for every monic `f` in `F_q[T]` of degree `<= n`.
pub fn conjugation_symmetry(ctx: &FamilyContext, chi: &CubicChar, n: usize) -> bool {
    let s = chi.sigma(ctx);
    let br = ctx.base_ring();
    (0..=n).all(|d| br.enumerate_monic(d).all(|f| s.eval_base(ctx, &f) == chi.eval_base(ctx, &f).conj()))
}

/// Whether `sigma` permutes the family.
pub fn family_sigma_closed(ctx: &FamilyContext, family: &[Poly]) -> bool {
    let r = ctx.ext_ring();
    let set: HashSet<&Poly> = family.iter().collect();
    let images: HashSet<Poly> = family.iter().map(|f| r.frobenius_unchecked(f)).collect();
    images.len() == family.len() && images.iter().all(|f| set.contains(f))
}

/// Orthogonality of all cubic characters modulo a squarefree `F` over `F_{q^2}`:
/// `sum_{a mod F} chi(a) conj(psi(a)) = phi(F) delta(chi, psi)`.
pub fn orthogonality_check(ctx: &FamilyContext, f: &Poly) -> Result<bool> {
    let r = ctx.ext_ring();
    let fac = r.factorize(f)?;
    if !fac.is_squarefree() || !f.is_monic() {
        return Err(Error::NotSquarefree);
    }
    let primes: Vec<Poly> = fac.factors.into_iter().map(|(p, _)| p).collect();
    let residues: Vec<Poly> = r.enumerate_residues(f.degree()).collect();
    let om = ctx.omega();
    // symbol codes per prime per residue
    let codes: Vec<Vec<u8>> = primes
        .iter()
        .map(|p| {
            residues
                .iter()
                .map(|a| if a.is_zero() { 3 } else { om.cubic_exponent(resultant_slices(ctx.ext(), p.coeffs(), a.coeffs())) })
                .collect()
        })
        .collect();
    let k = primes.len();
    let nchars = 3usize.pow(k as u32);
    let exps = |idx: usize| -> Vec<u8> { (0..k).map(|i| ((idx / 3usize.pow(i as u32)) % 3) as u8).collect() };
    let value = |e: &[u8], a: usize| -> u8 {
        let mut acc = 0u8;
        for i in 0..k {
            let c = codes[i][a];
            if c == 3 {
                return 3;
            }
            acc = (acc + c * e[i]) % 3;
        }
        acc
    };
    let phi = r.euler_phi(f)? as i64;
    for x in 0..nchars {
        let ex = exps(x);
        for y in 0..nchars {
            let ey = exps(y);
            let mut counts = [0i64; 3];
            for a in 0..residues.len() {
                let (vx, vy) = (value(&ex, a), value(&ey, a));
                if vx == 3 || vy == 3 {
                    continue;
                }
                counts[((vx + 2 * vy) % 3) as usize] += 1;
            }
            let s = ZOmega::from_counts(counts);
            let expect = if x == y { ZOmega::new(phi, 0) } else { ZOmega::ZERO };
            if s != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lifted coefficient vectors of the sieve primes, shared by all table builds.
pub struct LiftedPrimes {
    idx: Vec<u32>,
    coeffs: Vec<Vec<u32>>,
}

impl LiftedPrimes {
    pub fn new(ctx: &FamilyContext, sieve: &MonicSieve) -> LiftedPrimes {
        let br = ctx.base_ring();
        let idx = sieve.primes().to_vec();
        let coeffs = idx
            .iter()
            .map(|&i| ctx.lift(&br.monic_from_index(i as u64)).coeffs().to_vec())
            .collect();
        LiftedPrimes { idx, coeffs }
    }
}

/// Values of one character on every monic `f` in `F_q[T]` covered by a sieve,
/// as codes (`3` for zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharTable {
    codes: Vec<u8>,
}

impl CharTable {
    pub fn build(ctx: &FamilyContext, chi: &CubicChar, sieve: &MonicSieve, primes: &LiftedPrimes) -> CharTable {
        let mut codes = vec![0u8; sieve.len()];
        for (&i, c) in primes.idx.iter().zip(&primes.coeffs) {
            codes[i as usize] = chi.eval_code_slice(ctx, c);
        }
        for idx in 1..sieve.len() {
            if sieve.is_prime(idx) {
                continue;
            }
            let (p, a, rest) = sieve.split(idx);
            let cp = codes[p];
            let v = if cp == 3 { 3 } else { (cp * a) % 3 };
            codes[idx] = mul_code(v, codes[rest]);
        }
        CharTable { codes }
    }

    #[inline]
    pub fn code(&self, idx: usize) -> u8 {
        self.codes[idx]
    }

    pub fn value(&self, idx: usize) -> CharValue {
        CharValue::from_code(self.codes[idx])
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// `sum_{f in M_n} chi(f)`.
    pub fn degree_sum(&self, sieve: &MonicSieve, n: usize) -> ZOmega {
        let mut c = [0i64; 3];
        for &v in &self.codes[sieve.degree_range(n)] {
            if v < 3 {
                c[v as usize] += 1;
            }
        }
        ZOmega::from_counts(c)
    }

    /// `sum_{f in M_n} chi(f) w(f)` for integer weights indexed like the sieve.
    pub fn weighted_degree_sum(&self, sieve: &MonicSieve, n: usize, w: &[u64]) -> ZOmega {
        let mut c = [0i64; 3];
        for idx in sieve.degree_range(n) {
            let v = self.codes[idx];
            if v < 3 {
                c[v as usize] += w[idx] as i64;
            }
        }
        ZOmega::from_counts(c)
    }
}
