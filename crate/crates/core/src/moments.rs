//! Family sweeps and the exact second moment: principal and dual terms,
//! cube / non-cube split, dual terms through Gauss sums, the main term and
//! the comparison report, plus the on-disk store.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{CharTable, CubicChar, FamilyContext, FamilySpec, LiftedPrimes};
use crate::cyclo::{rat, rat_pow, CycloCounts, CycloNumber, QOmega, QuadExt, ZOmega};
use crate::error::{Error, Result};
use crate::gauss::GaussField;
use crate::lfun::{eval_at_s, AfeWeights, LPolynomial};
use crate::poly::{monic_offset, MonicSieve, Poly};
use crate::series::{a_q_value, b2_closed_form, zeta_value, AqEnclosure, HalfInt};

/// Sweeps whose estimated character evaluations exceed this are refused without `force`.
pub const SWEEP_BUDGET: f64 = 1e9;

pub const REPORT_SCHEMA: &str = "cubic-moments/report/v1";
pub const STERMS_SCHEMA: &str = "cubic-moments/sterms/v1";
const RECORDS_HEADER: &str = "# cubic-moments characters v1";

/// `Q^m` candidate conductors times `#M_{<= g+1}` table entries.
pub fn sweep_cost(spec: FamilySpec) -> f64 {
    let q = spec.q() as f64;
    let conductors = (q * q).powi(spec.m() as i32);
    let table = monic_offset(spec.q(), spec.g() as usize + 2) as f64;
    conductors * table
}

pub fn check_budget(spec: FamilySpec, force: bool) -> Result<()> {
    let estimate = sweep_cost(spec);
    if estimate > SWEEP_BUDGET && !force {
        return Err(Error::Budget { estimate, limit: SWEEP_BUDGET });
    }
    Ok(())
}

/// Largest `t` with a principal / dual term.
fn t_max(g: u32) -> Option<u32> {
    (2 * g).checked_sub(1)
}

fn cube_len(g: u32) -> usize {
    t_max(g).map_or(1, |t| t as usize / 3 + 1)
}

/// What the sweep keeps for one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharRecord {
    pub conductor: Poly,
    pub l: LPolynomial,
    /// `L(1/2, chi)^2`.
    pub central: QuadExt,
    /// `cube[k] = sum_{l in M_k, (l, F) = 1} d(l^3)`.
    pub cube: Vec<u64>,
}

struct SweepTables {
    sieve: MonicSieve,
    primes: LiftedPrimes,
    dl3: Vec<u64>,
}

impl SweepTables {
    fn new(ctx: &FamilyContext) -> SweepTables {
        let sieve = MonicSieve::new(&ctx.base_ring(), ctx.spec().g() as usize + 1);
        let primes = LiftedPrimes::new(ctx, &sieve);
        let dl3 = sieve.cube_divisor_counts();
        SweepTables { sieve, primes, dl3 }
    }
}

impl CharRecord {
    fn compute(ctx: &FamilyContext, f: &Poly, t: &SweepTables) -> Result<CharRecord> {
        let spec = ctx.spec();
        let chi = CubicChar::from_conductor(ctx, f)?;
        let table = CharTable::build(ctx, &chi, &t.sieve, &t.primes);
        let l = LPolynomial::from_table(spec.q(), spec.g(), &table, &t.sieve)?;
        let cube = (0..cube_len(spec.g()))
            .map(|k| {
                t.sieve
                    .degree_range(k)
                    .filter(|&i| table.code(i) != 3)
                    .map(|i| t.dl3[i])
                    .sum()
            })
            .collect();
        let central = l.central_value(2);
        Ok(CharRecord { conductor: f.clone(), l, central, cube })
    }

    /// `conductor|a_0;...;a_{g+1}|c_1 c_w c_s c_ws|cube_0;cube_1;...`,
    /// `a_n` written `a,b` for `a + b w`.
    pub fn encode(&self, ctx: &FamilyContext) -> String {
        let a: Vec<String> = self.l.coeffs().iter().map(|z| format!("{},{}", z.a, z.b)).collect();
        let cube: Vec<String> = self.cube.iter().map(|c| c.to_string()).collect();
        format!(
            "{}|{}|{}|{}",
            ctx.ext_ring().encode(&self.conductor),
            a.join(";"),
            self.central.to_fraction_strings().join(" "),
            cube.join(";")
        )
    }

    /// Parses and checks a record: family conductor, `L` shape, stored central
    /// value against the coefficients.
    pub fn decode(ctx: &FamilyContext, s: &str) -> std::result::Result<CharRecord, String> {
        let spec = ctx.spec();
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 fields, got {}", parts.len()));
        }
        let conductor = ctx.ext_ring().decode(parts[0]).map_err(|e| e.to_string())?;
        if !ctx.is_family_conductor(&conductor) {
            return Err("not a family conductor".into());
        }
        let mut a = Vec::new();
        for tok in parts[1].split(';') {
            let (x, y) = tok.split_once(',').ok_or_else(|| format!("bad coefficient {tok:?}"))?;
            let x: i64 = x.trim().parse().map_err(|_| format!("bad coefficient {tok:?}"))?;
            let y: i64 = y.trim().parse().map_err(|_| format!("bad coefficient {tok:?}"))?;
            a.push(ZOmega::new(x, y));
        }
        if a.len() != spec.g() as usize + 2 {
            return Err(format!("expected {} coefficients, got {}", spec.g() + 2, a.len()));
        }
        let l = LPolynomial::new(spec.q(), spec.g(), a).map_err(|e| e.to_string())?;
        let cv: Vec<&str> = parts[2].split_whitespace().collect();
        let central = QuadExt::from_fraction_strings(spec.q(), &cv).map_err(|e| e.to_string())?;
        if central != l.central_value(2) {
            return Err("central value does not match coefficients".into());
        }
        let cube: std::result::Result<Vec<u64>, _> = parts[3].split(';').map(|c| c.trim().parse::<u64>()).collect();
        let cube = cube.map_err(|_| format!("bad cube sums {:?}", parts[3]))?;
        if cube.len() != cube_len(spec.g()) {
            return Err(format!("expected {} cube sums, got {}", cube_len(spec.g()), cube.len()));
        }
        Ok(CharRecord { conductor, l, central, cube })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub jobs: usize,
    pub force: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { jobs: 1, force: false }
    }
}

/// Per-character records of a whole family and their exact sums.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub spec: FamilySpec,
    pub records: Vec<CharRecord>,
    /// `sum_F a_n(F)`.
    pub first: Vec<ZOmega>,
    /// `sum_F sum_{f in M_n} d(f) chi_F(f)`, from `L^2`.
    pub second: Vec<ZOmega>,
    /// `sum_F omega_F^2 sum_{f in M_n} d(f) conj(chi_F(f))`, `n <= 2g - 1`.
    pub dual: Vec<QOmega>,
    /// `sum_F cube_k(F)`.
    pub cube: Vec<u64>,
    pub first_moment: QuadExt,
    pub second_moment: QuadExt,
    /// Records taken from the store instead of recomputed.
    pub reused: usize,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::OutOfRange("jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

/// Every character of the family; with a store, records already on disk are
/// reused and the record file is rewritten only if its contents change.
pub fn sweep(ctx: &FamilyContext, opts: &SweepOptions, store: Option<&Store>) -> Result<Sweep> {
    let spec = ctx.spec();
    check_budget(spec, opts.force)?;
    let family = ctx.family();
    let mut cached: HashMap<Poly, CharRecord> = match store {
        Some(s) => s.load_records(ctx)?.into_iter().map(|r| (r.conductor.clone(), r)).collect(),
        None => HashMap::new(),
    };
    let tables = SweepTables::new(ctx);
    let reused = family.iter().filter(|f| cached.contains_key(*f)).count();
    let fresh: Vec<CharRecord> = pool(opts.jobs)?.install(|| {
        family
            .par_iter()
            .filter(|f| !cached.contains_key(*f))
            .map(|f| CharRecord::compute(ctx, f, &tables))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut fresh = fresh.into_iter();
    let records: Vec<CharRecord> = family
        .iter()
        .map(|f| match cached.remove(f) {
            Some(r) => r,
            None => fresh.next().expect("one fresh record per missing conductor"),
        })
        .collect();
    if let Some(s) = store {
        s.save_records(ctx, &records)?;
    }
    Ok(Sweep::from_records(spec, records, reused))
}

impl Sweep {
    pub fn from_records(spec: FamilySpec, records: Vec<CharRecord>, reused: usize) -> Sweep {
        let (q, g) = (spec.q(), spec.g());
        let mut first = vec![ZOmega::ZERO; g as usize + 2];
        let mut second = vec![ZOmega::ZERO; 2 * g as usize + 3];
        let mut dual = vec![QOmega::zero(); 2 * g as usize];
        let mut cube = vec![0u64; cube_len(g)];
        let mut second_moment = QuadExt::zero(q);
        for r in &records {
            for (acc, &a) in first.iter_mut().zip(r.l.coeffs()) {
                *acc += a;
            }
            let x = r.l.power(2);
            for (acc, &b) in second.iter_mut().zip(&x) {
                *acc += b;
            }
            let w2 = r.l.root_number().pow(2);
            for (n, acc) in dual.iter_mut().enumerate() {
                if !x[n].is_zero() {
                    *acc += &(&w2 * &x[n].conj().to_qomega());
                }
            }
            for (acc, &c) in cube.iter_mut().zip(&r.cube) {
                *acc += c;
            }
            second_moment += &r.central;
        }
        let first_moment = eval_at_s(q, &first);
        Sweep { spec, records, first, second, dual, cube, first_moment, second_moment, reused }
    }

    pub fn family_count(&self) -> usize {
        self.records.len()
    }

    fn check_t(&self, t: u32) -> Result<()> {
        match t_max(self.spec.g()) {
            Some(top) if t <= top => Ok(()),
            _ => Err(Error::OutOfRange(format!("t = {t} outside 0..=2g-1 for g = {}", self.spec.g()))),
        }
    }

    /// `S_{t,prin} = sum_{f in M_{<=t}} d(f) |f|^{-1/2} sum_F chi_F(f)`.
    pub fn s_prin(&self, t: u32) -> Result<QuadExt> {
        self.check_t(t)?;
        Ok(eval_at_s(self.spec.q(), &self.second[..=t as usize]))
    }

    /// Cube part: `sum_{l in M_{<= t/3}} d(l^3) |l|^{-3/2} #{F : (F, l) = 1}`.
    pub fn s_prin_cube(&self, t: u32) -> Result<QuadExt> {
        self.check_t(t)?;
        let q = self.spec.q();
        let mut acc = QuadExt::zero(q);
        for k in 0..=(t / 3) as usize {
            acc += &QuadExt::s_pow(q, 3 * k as u32).scale(&rat(self.cube[k] as i64));
        }
        Ok(acc)
    }

    /// `S_{t,dual} = sum_F omega_F^2 sum_{f in M_{<=2g-t-1}} d(f) |f|^{-1/2} conj(chi_F(f))`;
    /// empty (zero) once `t > 2g - 1`.
    pub fn s_dual(&self, t: u32) -> QuadExt {
        let q = self.spec.q();
        let top = match t_max(self.spec.g()) {
            Some(top) if t <= top => (top - t) as usize,
            _ => return QuadExt::zero(q),
        };
        let mut acc = QuadExt::zero(q);
        for (n, x) in self.dual[..=top].iter().enumerate() {
            if !x.is_zero() {
                acc += &QuadExt::s_pow(q, n as u32).mul_qomega(x);
            }
        }
        acc
    }

    pub fn s_terms(&self, t: u32) -> Result<STerms> {
        let prin = self.s_prin(t)?;
        let cube = self.s_prin_cube(t)?;
        let noncube = &prin - &cube;
        Ok(STerms { t, t0: t / 3, t1: t % 3, prin, cube, noncube, dual: self.s_dual(t) })
    }
}

/// The four S-terms at one `t`, with `t = 3 t0 + t1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STerms {
    pub t: u32,
    pub t0: u32,
    pub t1: u32,
    pub prin: QuadExt,
    pub cube: QuadExt,
    pub noncube: QuadExt,
    pub dual: QuadExt,
}

impl STerms {
    /// `|S_{t,prin,noncube}| q^{-t/2}`.
    pub fn noncube_ratio(&self) -> f64 {
        self.noncube.to_complex().norm() * (self.prin.q() as f64).powf(-(self.t as f64) / 2.0)
    }
}

/// Which `t` the `i`-th dual layer reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualIndex {
    /// `A + i`: the layer `i` of the approximate functional equation.
    Forward,
    /// `2g - A - 1 + i`.
    Mirrored,
    /// `2g - A - 1 - i`.
    MirroredDown,
}

impl DualIndex {
    fn index(self, g: u32, big_a: u32, i: u32) -> Option<u32> {
        let top = 2 * g - big_a - 1;
        match self {
            DualIndex::Forward => Some(big_a + i),
            DualIndex::Mirrored => Some(top + i),
            DualIndex::MirroredDown => top.checked_sub(i),
        }
    }
}

/// `(1 - s)^2 ( sum_{i<=A} w_i S_{A-i,prin} + sum_{i<=2g-A-1} w_i S_{idx(i),dual} )`.
pub fn decomposition(sweep: &Sweep, big_a: u32, weights: AfeWeights, index: DualIndex) -> Result<QuadExt> {
    let (q, g) = (sweep.spec.q(), sweep.spec.g());
    match t_max(g) {
        Some(top) if big_a <= top => {}
        _ => return Err(Error::OutOfRange(format!("A = {big_a} outside 0..=2g-1 for g = {g}"))),
    }
    let mut prin = QuadExt::zero(q);
    for i in 0..=big_a {
        prin += &(&weights.weight(q, 2, i) * &sweep.s_prin(big_a - i)?);
    }
    let mut dual = QuadExt::zero(q);
    for i in 0..=(2 * g - big_a - 1) {
        if let Some(t) = index.index(g, big_a, i) {
            dual += &(&weights.weight(q, 2, i) * &sweep.s_dual(t));
        }
    }
    let pre = (&QuadExt::one(q) - &QuadExt::s(q)).pow(2);
    Ok(&pre * &(&prin + &dual))
}

/// The decomposition with scaled weights and dual index `A + i` reproduces the moment.
pub fn decomposition_check(sweep: &Sweep, big_a: u32) -> Result<bool> {
    Ok(decomposition(sweep, big_a, AfeWeights::Scaled, DualIndex::Forward)? == sweep.second_moment)
}

/// Cube part from gcds over the family, no character values involved.
pub fn cube_by_coprimality(ctx: &FamilyContext, t: u32) -> Result<QuadExt> {
    let spec = ctx.spec();
    match t_max(spec.g()) {
        Some(top) if t <= top => {}
        _ => return Err(Error::OutOfRange(format!("t = {t} outside 0..=2g-1"))),
    }
    let q = spec.q();
    let family = ctx.family();
    let br = ctx.base_ring();
    let er = ctx.ext_ring();
    let mut acc = QuadExt::zero(q);
    for k in 0..=(t / 3) as usize {
        let mut total = 0u64;
        for l in br.enumerate_monic(k) {
            let ll = ctx.lift(&l);
            let coprime = family.iter().filter(|f| er.gcd(f, &ll).is_one()).count() as u64;
            total += br.divisor_count(&br.pow(&l, 3), 2)? * coprime;
        }
        acc += &QuadExt::s_pow(q, 3 * k as u32).scale(&rat(total as i64));
    }
    Ok(acc)
}

/// Cube part read off the `u^k z^m` coefficients of the closed-form `B_2(u, z)`.
pub fn cube_by_series(spec: FamilySpec, t: u32) -> Result<QuadExt> {
    match t_max(spec.g()) {
        Some(top) if t <= top => {}
        _ => return Err(Error::OutOfRange(format!("t = {t} outside 0..=2g-1"))),
    }
    let q = spec.q();
    let t0 = (t / 3) as usize;
    let b2 = b2_closed_form(q, t0, spec.m())?;
    let mut acc = QuadExt::zero(q);
    for k in 0..=t0 {
        acc += &QuadExt::s_pow(q, 3 * k as u32).scale(b2.coeff(k, spec.m()));
    }
    Ok(acc)
}

/// How the dual coefficients are rebuilt from Gauss sums over `F_{q^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualRoute {
    /// `omega_F^2 conj(chi_F(f)) = q^{-g-2} G(1, F) G(f, F)`.
    Paired,
    /// `omega_F^2 conj(chi_F(f)) = q^{-g/2-1} G(f, F)`, as sometimes written.
    Single,
}

/// Dual coefficients `sum_F omega_F^2 sum_{f in M_n} d(f) conj(chi_F(f))`,
/// `n <= 2g - 1`, from Gauss sums.
pub fn dual_via_gauss(ctx: &FamilyContext, route: DualRoute, jobs: usize) -> Result<Vec<CycloNumber>> {
    let spec = ctx.spec();
    let g = spec.g();
    let gf = GaussField::from_family(ctx);
    let p = ctx.ext().p();
    let len = 2 * g as usize;
    let br = ctx.base_ring();
    let sieve = MonicSieve::new(&br, len.saturating_sub(1));
    let d = sieve.divisor_counts(2);
    let lifted: Vec<(usize, Poly, i64)> = (0..sieve.len())
        .filter(|&i| sieve.degree_of(i) < len)
        .map(|i| (sieve.degree_of(i), ctx.lift(&br.monic_from_index(i as u64)), d[i] as i64))
        .collect();
    let family = ctx.family();
    let per_f: Vec<Vec<CycloNumber>> = pool(jobs)?.install(|| {
        family
            .par_iter()
            .map(|f| -> Result<Vec<CycloNumber>> {
                let table = gf.residue_table(f)?;
                let mut counts = vec![CycloCounts::new(p); len];
                for (n, lf, w) in &lifted {
                    table.accumulate(&gf, lf, 1, *w, &mut counts[*n]);
                }
                let y = counts.iter().map(|c| c.to_number());
                Ok(match route {
                    DualRoute::Paired => {
                        let g1 = table.gauss(&gf, &Poly::one());
                        y.map(|v| &g1 * &v).collect()
                    }
                    DualRoute::Single => y.collect(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let q = spec.q();
    let scale = match route {
        DualRoute::Paired => rat_pow(q, -(g as i64) - 2),
        DualRoute::Single => rat_pow(q, -(g as i64) / 2 - 1),
    };
    let mut out = vec![CycloNumber::zero(p); len];
    for v in &per_f {
        for (acc, x) in out.iter_mut().zip(v) {
            *acc = &*acc + x;
        }
    }
    Ok(out.into_iter().map(|x| x.scale(&scale)).collect())
}

/// Coefficientwise comparison of the Gauss-sum dual coefficients with the
/// sweep's; equal coefficients give equal `S_{t,dual}` for every `t`.
pub fn dual_agrees(sweep: &Sweep, via_gauss: &[CycloNumber]) -> bool {
    via_gauss.len() == sweep.dual.len()
        && via_gauss
            .iter()
            .zip(&sweep.dual)
            .all(|(z, x)| *z == CycloNumber::from_qomega(z.p(), x))
}

/// `g(g+2) A_q zeta_q(3/2)^2 / (8 zeta_q(3)) q^{g+2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MainTerm {
    /// Everything but `A_q`, exact.
    pub factor: QuadExt,
    pub a_q: AqEnclosure,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn main_term_factor(spec: FamilySpec) -> Result<QuadExt> {
    let (q, g) = (spec.q(), spec.g() as i64);
    let z32 = zeta_value(q, HalfInt(3))?;
    let z3 = zeta_value(q, HalfInt(6))?;
    let k = BigRational::new(BigInt::from(g * (g + 2)), BigInt::from(8)) * rat_pow(q, g + 2);
    Ok((&z32.pow(2) * &z3.inv()?).scale(&k))
}

pub fn main_term(spec: FamilySpec, tol: f64) -> Result<MainTerm> {
    let factor = main_term_factor(spec)?;
    let a_q = a_q_value(spec.q(), tol)?;
    let f = factor.to_complex().re;
    Ok(MainTerm { value: f * a_q.value, lower: f * a_q.lower, upper: f * a_q.upper, factor, a_q })
}

/// Everything one `(q, g)` run produces.
#[derive(Clone, Debug)]
pub struct MomentLedger {
    pub spec: FamilySpec,
    pub family_count: usize,
    pub first_moment: QuadExt,
    pub second_moment: QuadExt,
    pub big_a: Option<u32>,
    pub decomposition_exact: Option<bool>,
    pub rows: Vec<STerms>,
    pub main: MainTerm,
    /// `(moment - main) / main`; `None` when the main term vanishes.
    pub relative_deviation: Option<f64>,
}

impl MomentLedger {
    /// `big_a` defaults to `g - 1` (the middle cutoff); `None` for `g = 0`.
    pub fn assemble(sweep: &Sweep, big_a: Option<u32>, tol: f64) -> Result<MomentLedger> {
        let g = sweep.spec.g();
        let rows = match t_max(g) {
            Some(top) => (0..=top).map(|t| sweep.s_terms(t)).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let big_a = big_a.or_else(|| g.checked_sub(1));
        let decomposition_exact = match big_a {
            Some(a) => Some(decomposition_check(sweep, a)?),
            None => None,
        };
        let main = main_term(sweep.spec, tol)?;
        let moment = sweep.second_moment.to_complex().re;
        let relative_deviation = (main.value != 0.0).then(|| (moment - main.value) / main.value);
        Ok(MomentLedger {
            spec: sweep.spec,
            family_count: sweep.family_count(),
            first_moment: sweep.first_moment.clone(),
            second_moment: sweep.second_moment.clone(),
            big_a,
            decomposition_exact,
            rows,
            main,
            relative_deviation,
        })
    }

    pub fn report(&self) -> Report {
        let a = &self.main.a_q;
        Report {
            schema: REPORT_SCHEMA.into(),
            q: self.spec.q(),
            g: self.spec.g(),
            family_count: self.family_count,
            first_moment: self.first_moment.to_fraction_strings(),
            second_moment: self.second_moment.to_fraction_strings(),
            second_moment_approx: self.second_moment.to_complex().re,
            big_a: self.big_a,
            decomposition_exact: self.decomposition_exact,
            main_term_factor: self.main.factor.to_fraction_strings(),
            a_q_approx: AqRecord {
                value: a.value,
                lower: a.lower,
                upper: a.upper,
                truncation_degree: a.truncation_degree,
            },
            main_term_approx: self.main.value,
            main_term_lower_approx: self.main.lower,
            main_term_upper_approx: self.main.upper,
            relative_deviation_approx: self.relative_deviation,
        }
    }

    pub fn sterms_table(&self) -> STermTable {
        STermTable {
            schema: STERMS_SCHEMA.into(),
            q: self.spec.q(),
            g: self.spec.g(),
            rows: self
                .rows
                .iter()
                .map(|r| STermRow {
                    t: r.t,
                    t0: r.t0,
                    t1: r.t1,
                    prin: r.prin.to_fraction_strings(),
                    cube: r.cube.to_fraction_strings(),
                    noncube: r.noncube.to_fraction_strings(),
                    dual: r.dual.to_fraction_strings(),
                    noncube_ratio_approx: r.noncube_ratio(),
                })
                .collect(),
        }
    }
}

/// Exact values as four `num/den` strings on `{1, w, s, ws}`, `s = q^{-1/2}`;
/// fields ending in `_approx` are floats for convenience only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub q: u64,
    pub g: u32,
    pub family_count: usize,
    pub first_moment: [String; 4],
    pub second_moment: [String; 4],
    pub second_moment_approx: f64,
    pub big_a: Option<u32>,
    pub decomposition_exact: Option<bool>,
    pub main_term_factor: [String; 4],
    pub a_q_approx: AqRecord,
    pub main_term_approx: f64,
    pub main_term_lower_approx: f64,
    pub main_term_upper_approx: f64,
    pub relative_deviation_approx: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AqRecord {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub truncation_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STermTable {
    pub schema: String,
    pub q: u64,
    pub g: u32,
    pub rows: Vec<STermRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STermRow {
    pub t: u32,
    pub t0: u32,
    pub t1: u32,
    pub prin: [String; 4],
    pub cube: [String; 4],
    pub noncube: [String; 4],
    pub dual: [String; 4],
    pub noncube_ratio_approx: f64,
}

impl Report {
    pub fn second_moment_exact(&self) -> Result<QuadExt> {
        let parts: Vec<&str> = self.second_moment.iter().map(|s| s.as_str()).collect();
        QuadExt::from_fraction_strings(self.q, &parts)
    }
}

/// One directory per `(q, g)`: `characters.txt`, `report.json`, `sterms.json`.
#[derive(Clone, Debug)]
pub struct Store {
    dir: PathBuf,
}

/// Writes `contents` unless the file already holds exactly that; returns
/// whether it wrote.
pub fn write_if_changed(path: &Path, contents: &str) -> Result<bool> {
    if let Ok(old) = fs::read(path) {
        if old == contents.as_bytes() {
            return Ok(false);
        }
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(true)
}

impl Store {
    pub fn new(root: &Path, spec: FamilySpec) -> Store {
        Store { dir: root.join(format!("q{}_g{}", spec.q(), spec.g())) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn records_path(&self) -> PathBuf {
        self.dir.join("characters.txt")
    }

    pub fn report_path(&self) -> PathBuf {
        self.dir.join("report.json")
    }

    pub fn sterms_path(&self) -> PathBuf {
        self.dir.join("sterms.json")
    }

    fn header(spec: FamilySpec) -> String {
        format!("{RECORDS_HEADER} q={} g={}", spec.q(), spec.g())
    }

    /// Records on disk, empty if there is no file yet.
    pub fn load_records(&self, ctx: &FamilyContext) -> Result<Vec<CharRecord>> {
        let path = self.records_path();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |line: usize, msg: String| Error::CorruptRecord { path: path.display().to_string(), line, msg };
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != Self::header(ctx.spec()) {
                    return Err(corrupt(1, format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            out.push(CharRecord::decode(ctx, line).map_err(|m| corrupt(i + 1, m))?);
        }
        Ok(out)
    }

    pub fn save_records(&self, ctx: &FamilyContext, records: &[CharRecord]) -> Result<bool> {
        let mut text = Self::header(ctx.spec());
        text.push('\n');
        for r in records {
            text.push_str(&r.encode(ctx));
            text.push('\n');
        }
        write_if_changed(&self.records_path(), &text)
    }

    pub fn save_ledger(&self, ledger: &MomentLedger) -> Result<bool> {
        let a = write_if_changed(&self.report_path(), &to_json(&ledger.report())?)?;
        let b = write_if_changed(&self.sterms_path(), &to_json(&ledger.sterms_table())?)?;
        Ok(a || b)
    }

    pub fn load_report(&self) -> Result<Report> {
        Ok(serde_json::from_str(&fs::read_to_string(self.report_path())?)?)
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(q: u64, g: u32) -> FamilyContext {
        FamilyContext::new(FamilySpec::new(q, g).unwrap()).unwrap()
    }

    fn run(q: u64, g: u32) -> Sweep {
        sweep(&ctx(q, g), &SweepOptions::default(), None).unwrap()
    }

    #[test]
    fn genus_zero() {
        let s = run(5, 0);
        assert_eq!(s.family_count(), 20);
        assert!(s.second_moment.is_real());
        assert!(s.s_terms(0).is_err());
        assert!(decomposition(&s, 0, AfeWeights::Scaled, DualIndex::Forward).is_err());
        let m = main_term(s.spec, 1e-8).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn genus_two_identities() {
        let c = ctx(5, 2);
        let s = sweep(&c, &SweepOptions::default(), None).unwrap();
        assert_eq!(s.family_count(), 480);
        assert!(s.second_moment.is_real());
        assert_eq!(eval_at_s(5, &s.second), s.second_moment);
        let direct_first = s.records.iter().fold(QuadExt::zero(5), |acc, r| &acc + &eval_at_s(5, r.l.coeffs()));
        assert_eq!(direct_first, s.first_moment);
        for a in 0..=3 {
            assert!(decomposition_check(&s, a).unwrap(), "A = {a}");
        }
        for t in 0..=3 {
            let st = s.s_terms(t).unwrap();
            assert_eq!(&st.cube + &st.noncube, st.prin);
            assert_eq!(st.cube, cube_by_coprimality(&c, t).unwrap());
            assert_eq!(st.cube, cube_by_series(c.spec(), t).unwrap());
            if t < 3 {
                assert_eq!(st.cube, QuadExt::from_rational(5, rat(480)));
            }
        }
        assert!(s.s_terms(4).is_err());
        // A = 2g - 1: only the i = 0 dual layer, S_{2g-1,dual} = sum_F omega^2
        let last = s.s_dual(3);
        assert_eq!(last, QuadExt::from_qomega(5, s.dual[0].clone()));
    }

    #[test]
    fn dual_routes() {
        let c = ctx(5, 2);
        let s = sweep(&c, &SweepOptions::default(), None).unwrap();
        let paired = dual_via_gauss(&c, DualRoute::Paired, 1).unwrap();
        assert!(dual_agrees(&s, &paired));
    }

    #[test]
    fn alternate_omega_same_moment() {
        let spec = FamilySpec::new(5, 2).unwrap();
        let a = sweep(&FamilyContext::new(spec).unwrap(), &SweepOptions::default(), None).unwrap();
        let b = sweep(&FamilyContext::with_alternate_omega(spec).unwrap(), &SweepOptions::default(), None).unwrap();
        assert_eq!(a.second_moment, b.second_moment);
    }

    #[test]
    fn partition_independent() {
        let c = ctx(5, 2);
        let a = sweep(&c, &SweepOptions { jobs: 1, force: false }, None).unwrap();
        let b = sweep(&c, &SweepOptions { jobs: 3, force: false }, None).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.second_moment, b.second_moment);
    }

    #[test]
    fn budget_gate() {
        let big = FamilySpec::new(11, 4).unwrap();
        assert!(matches!(check_budget(big, false), Err(Error::Budget { .. })));
        assert!(check_budget(big, true).is_ok());
        assert!(check_budget(FamilySpec::new(5, 4).unwrap(), false).is_ok());
    }

    #[test]
    fn main_term_assembly() {
        let s2 = FamilySpec::new(5, 2).unwrap();
        let f2 = main_term_factor(s2).unwrap();
        assert!(f2.is_real());
        let m = main_term(s2, 1e-10).unwrap();
        assert!(m.lower <= m.value && m.value <= m.upper);
        let s4 = FamilySpec::new(5, 4).unwrap();
        // g = 2 -> 4 changes only g(g+2) and q^{g+2}
        let ratio = &main_term_factor(s4).unwrap() * &f2.inv().unwrap();
        assert_eq!(ratio, QuadExt::from_rational(5, rat(25 * 24) / rat(8)));
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = ctx(5, 2);
        let store = Store::new(dir.path(), c.spec());
        let s = sweep(&c, &SweepOptions::default(), Some(&store)).unwrap();
        assert_eq!(s.reused, 0);
        let before = fs::read(store.records_path()).unwrap();
        let again = sweep(&c, &SweepOptions { jobs: 2, force: false }, Some(&store)).unwrap();
        assert_eq!(again.reused, 480);
        assert_eq!(again.second_moment, s.second_moment);
        assert_eq!(fs::read(store.records_path()).unwrap(), before);

        let ledger = MomentLedger::assemble(&s, None, 1e-8).unwrap();
        assert_eq!(ledger.decomposition_exact, Some(true));
        assert!(store.save_ledger(&ledger).unwrap());
        assert!(!store.save_ledger(&ledger).unwrap());
        let back = store.load_report().unwrap();
        assert_eq!(back, ledger.report());
        assert_eq!(back.second_moment_exact().unwrap(), s.second_moment);
        let t: STermTable = serde_json::from_str(&fs::read_to_string(store.sterms_path()).unwrap()).unwrap();
        assert_eq!(t, ledger.sterms_table());
    }

    #[test]
    fn corrupt_records_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let c = ctx(5, 0);
        let store = Store::new(dir.path(), c.spec());
        sweep(&c, &SweepOptions::default(), Some(&store)).unwrap();
        let text = fs::read_to_string(store.records_path()).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = lines[3].replacen('|', "|9,9;", 1);
        fs::write(store.records_path(), lines.join("\n")).unwrap();
        match sweep(&c, &SweepOptions::default(), Some(&store)) {
            Err(Error::CorruptRecord { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected a corrupt record, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn record_encoding_round_trips(k in 0usize..20) {
            let c = ctx(5, 0);
            let s = run(5, 0);
            let r = &s.records[k];
            prop_assert_eq!(&CharRecord::decode(&c, &r.encode(&c)).unwrap(), r);
        }
    }
}
