//! The identity battery behind `verify`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{family_sigma_closed, CharTable, FamilyContext, FamilySpec, LiftedPrimes};
use crate::cyclo::{rat, rat_pow, CycloNumber, ZOmega};
use crate::error::Result;
use crate::gauss::{
    lifted_conductor_grid, multiplicativity_grid, prime_power_grid, root_number_via_gauss, twist_grid, GaussField,
    GridStats,
};
use crate::lfun::{AfeWeights, LPolynomial};
use crate::moments::{
    cube_by_coprimality, cube_by_series, decomposition, dual_agrees, dual_via_gauss, sweep, DualIndex, DualRoute,
    Sweep,
};
use crate::poly::{MonicSieve, Poly};
use crate::series::{
    b2_identity_check, family_count_closed_form, family_count_genfun_check, perron_arith_check,
    prefilter_count_closed_form, split_pair_count_closed_form,
};

use super::RunConfig;

pub const VERIFY_SCHEMA: &str = "cubic-moments/verify/v1";

/// Subchecks whose estimated work exceeds this are skipped.
const CHECK_BUDGET: f64 = 5e7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Non-gating checks are diagnostics; they never change the exit status.
    pub gating: bool,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn gate(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), gating: true, passed, detail: detail.into() }
    }

    fn diag(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), gating: false, passed, detail: detail.into() }
    }

    fn skipped(name: &str, cost: f64) -> Check {
        Check::diag(name, false, format!("skipped: estimated cost {cost:.2e} over {CHECK_BUDGET:.0e}"))
    }

    fn grid(name: &str, st: GridStats) -> Check {
        Check::gate(name, st.passed(), format!("{} of {} cases failed", st.failed, st.checked))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub q: u64,
    pub g: u32,
    /// All gating checks passed.
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_battery(spec: FamilySpec, cfg: &RunConfig) -> Result<VerifyReport> {
    let ctx = FamilyContext::new(spec)?;
    let mut checks = family_checks(&ctx)?;
    checks.extend(lfun_checks(&ctx, cfg.jobs)?);
    checks.extend(gauss_checks(&ctx)?);
    checks.extend(series_checks(&ctx, cfg.trunc_u, cfg.trunc_z)?);
    let sw = sweep(&ctx, &cfg.sweep_options(), None)?;
    checks.extend(moment_checks(&ctx, &sw, cfg)?);
    let passed = checks.iter().filter(|c| c.gating).all(|c| c.passed);
    Ok(VerifyReport { schema: VERIFY_SCHEMA.into(), q: spec.q(), g: spec.g(), passed, checks })
}

pub fn family_checks(ctx: &FamilyContext) -> Result<Vec<Check>> {
    let spec = ctx.spec();
    let fam = ctx.family();
    let n = fam.len();
    let split = ctx.split_pair_count();
    let prefilter = ctx.prefilter_count();
    let closed = family_count_closed_form(spec.q(), spec.m())?;
    let closed_split = split_pair_count_closed_form(spec.q(), spec.m())?;
    let closed_prefilter = prefilter_count_closed_form(spec.q(), spec.m())?;
    let pairs = ctx.conjugate_pair_count();
    Ok(vec![
        Check::gate("family.count", closed == rat(n as i64), format!("{n} conductors, closed form {closed}")),
        Check::gate("family.split_pairs", closed_split == rat(split as i64), format!("{split} split pairs, closed form {closed_split}")),
        Check::gate("family.prefilter", closed_prefilter == rat(prefilter as i64), format!("{prefilter} before removing conjugate pairs, closed form {closed_prefilter}")),
        Check::gate("family.conjugate_pairs", prefilter == n + pairs, format!("{pairs} conductors divisible by some pi sigma(pi)")),
        Check::gate("family.sigma_closed", family_sigma_closed(ctx, &fam), ""),
    ])
}

#[derive(Default)]
struct LFlags {
    a0: bool,
    top: bool,
    trivial_zero: bool,
    fe1: bool,
    fe2: bool,
    afe1: bool,
    afe2: bool,
    afe2_unscaled: bool,
    rh_dev: f64,
    root_gauss: Option<bool>,
    omega_sq: Option<bool>,
    unit_exact: bool,
    unit_dev: f64,
}

pub fn lfun_checks(ctx: &FamilyContext, jobs: usize) -> Result<Vec<Check>> {
    let spec = ctx.spec();
    let (q, g) = (spec.q(), spec.g());
    let sieve = MonicSieve::new(&ctx.base_ring(), g as usize + 2);
    let primes = LiftedPrimes::new(ctx, &sieve);
    let n = ctx.family_count();
    let gauss_cost = n as f64 * (q as f64).powi(g as i32 + 2);
    let with_gauss = gauss_cost <= CHECK_BUDGET;
    let gf = GaussField::from_family(ctx);
    let p = ctx.ext().p();
    let chars: Vec<_> = ctx.family_iter().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| crate::Error::Unsupported(format!("thread pool: {e}")))?;
    let flags: Vec<LFlags> = pool.install(|| {
        chars
            .par_iter()
            .map(|chi| -> Result<LFlags> {
                let t = CharTable::build(ctx, chi, &sieve, &primes);
                let a0 = t.degree_sum(&sieve, 0) == ZOmega::ONE;
                let top = t.degree_sum(&sieve, g as usize + 2).is_zero();
                let l = LPolynomial::from_table(q, g, &t, &sieve)?;
                let trivial_zero = l.value_at_one().is_zero();
                let mut f = LFlags { a0, top, trivial_zero, ..Default::default() };
                if !trivial_zero {
                    return Ok(f);
                }
                f.fe1 = l.functional_equation_check(1)?;
                f.fe2 = l.functional_equation_check(2)?;
                f.afe1 = (0..g).try_fold(true, |ok, a| Ok::<_, crate::Error>(ok && l.afe_check(1, a)?))?;
                f.afe2 = (0..2 * g).try_fold(true, |ok, a| Ok::<_, crate::Error>(ok && l.afe_check(2, a)?))?;
                let cv = l.central_value(2);
                f.afe2_unscaled = g > 0
                    && (0..2 * g).try_fold(true, |ok, a| Ok::<_, crate::Error>(ok && l.afe(2, a, AfeWeights::Unscaled)? == cv))?;
                let target = (q as f64).powf(-0.5);
                f.rh_dev = l.rh_moduli()?.iter().map(|m| (m - target).abs()).fold(0.0, f64::max);
                let w = l.root_number();
                f.unit_exact = w.norm() == rat(1);
                f.unit_dev = (w.to_complex().norm() - 1.0).abs();
                if with_gauss {
                    f.root_gauss = Some(root_number_via_gauss(ctx, chi)? == w);
                    let g1 = gf.residue_table(chi.conductor())?.gauss(&gf, &Poly::one());
                    let lhs = CycloNumber::from_qomega(p, &w.pow(2));
                    f.omega_sq = Some(lhs == g1.pow(2).scale(&rat_pow(q, -(g as i64) - 2)));
                }
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let count = |pred: &dyn Fn(&LFlags) -> bool| flags.iter().filter(|f| pred(f)).count();
    let all = |name: &str, pred: &dyn Fn(&LFlags) -> bool| {
        let k = count(pred);
        Check::gate(name, k == n, format!("{k} of {n} characters"))
    };
    let rh = flags.iter().map(|f| f.rh_dev).fold(0.0, f64::max);
    let unit = flags.iter().map(|f| f.unit_dev).fold(0.0, f64::max);
    let mut out = vec![
        all("lfun.a0_is_one", &|f| f.a0),
        all("lfun.top_coefficient_vanishes", &|f| f.top),
        all("lfun.trivial_zero", &|f| f.trivial_zero),
        all("lfun.functional_equation_k1", &|f| f.fe1),
        all("lfun.functional_equation_k2", &|f| f.fe2),
        all("lfun.afe_k1_all_cutoffs", &|f| f.afe1),
        all("lfun.afe_k2_all_cutoffs", &|f| f.afe2),
        Check::gate("lfun.rh_moduli", rh <= 1e-6, format!("max |modulus - q^(-1/2)| = {rh:.3e}")),
        all("root.norm_exactly_one", &|f| f.unit_exact),
        Check::gate("root.abs_one_float", unit <= 1e-10, format!("max ||w| - 1| = {unit:.3e}")),
    ];
    if with_gauss {
        out.push(all("root.gauss_sum_formula", &|f| f.root_gauss == Some(true)));
        out.push(all("root.omega_squared_gauss", &|f| f.omega_sq == Some(true)));
    } else {
        out.push(Check::skipped("root.gauss_sum_formula", gauss_cost));
        out.push(Check::skipped("root.omega_squared_gauss", gauss_cost));
    }
    let k = count(&|f| f.afe2_unscaled);
    out.push(Check::diag(
        "lfun.afe_k2_without_half_powers",
        k == n,
        format!("identity with weights (i+1) in place of (i+1) q^(-i/2) holds for {k} of {n} characters"),
    ));
    Ok(out)
}

pub fn gauss_checks(ctx: &FamilyContext) -> Result<Vec<Check>> {
    let gf = GaussField::from_family(ctx);
    let r = gf.ring();
    let big_q = ctx.ext().q();
    let lin: Vec<Poly> = r.enumerate_monic(1).collect();
    let mut vs: Vec<Poly> = vec![Poly::zero(), Poly::one(), Poly::constant(2 % big_q)];
    vs.extend(lin.iter().cloned());
    let pp = prime_power_grid(&gf, &lin, &vs, 4)?;
    let mod_sample: Vec<Poly> = lin.iter().step_by(3).cloned().collect();
    let small_vs: Vec<Poly> = vec![Poly::zero(), Poly::one(), Poly::x(), lin[1].clone()];
    let mult = multiplicativity_grid(&gf, &mod_sample, &small_vs)?;
    let f0 = r.mul(&lin[0], &lin[1]);
    let twists: Vec<Poly> = lin.iter().cloned().chain([Poly::constant(2 % big_q), Poly::constant(3 % big_q)]).collect();
    let tw = twist_grid(&gf, &f0, &twists, &[Poly::one(), Poly::x()])?;
    let lifted = lifted_conductor_grid(ctx, 2)?;
    let quad = r.enumerate_monic(2).find(|p| r.is_irreducible(p)).expect("an irreducible quadratic");
    let cubic = r.mul(&quad, &lin[1]);
    let mut cs = GridStats::default();
    for (f, m) in [(&quad, 0), (&quad, 1), (&quad, 2), (&cubic, 1), (&cubic, 3)] {
        cs.checked += 1;
        if !gf.char_sum_check(f, m)? {
            cs.failed += 1;
        }
    }
    Ok(vec![
        Check::grid("gauss.prime_power_table", pp),
        Check::grid("gauss.multiplicativity", mult),
        Check::grid("gauss.twist", tw),
        Check::grid("gauss.lifted_conductors", lifted),
        Check::grid("gauss.char_sum_identity", cs),
    ])
}

pub fn series_checks(ctx: &FamilyContext, nu: usize, nz: usize) -> Result<Vec<Check>> {
    let q = ctx.spec().q();
    let br = ctx.base_ring();
    let t = Poly::x();
    let t1 = br.mul(&t, &Poly::from_keys(vec![1, 1]));
    let mut fg = GridStats::default();
    for l in [Poly::one(), t, t1] {
        fg.checked += 1;
        if !family_count_genfun_check(ctx, &l, nz)? {
            fg.failed += 1;
        }
    }
    Ok(vec![
        Check::gate("series.b2_grid", b2_identity_check(ctx, nu, nz)?, format!("u^i z^j, i <= {nu}, j <= {nz}")),
        Check::grid("series.family_genfun", fg),
        Check::gate("series.perron", perron_arith_check(q, nu)?, format!("1, d_2, d_3, mu; n <= {nu}")),
    ])
}

pub fn moment_checks(ctx: &FamilyContext, sw: &Sweep, cfg: &RunConfig) -> Result<Vec<Check>> {
    let spec = ctx.spec();
    let g = spec.g();
    let mut out = vec![Check::gate("moments.second_moment_real", sw.second_moment.is_real(), sw.second_moment.to_string())];
    let alt = sweep(&FamilyContext::with_alternate_omega(spec)?, &cfg.sweep_options(), None)?;
    out.push(Check::gate("moments.omega_invariance", alt.second_moment == sw.second_moment, ""));
    if g == 0 {
        return Ok(out);
    }
    let cutoffs: Vec<u32> = (0..2 * g).collect();
    let holds = |w: AfeWeights, ix: DualIndex| -> Result<Vec<u32>> {
        let mut ok = Vec::new();
        for &a in &cutoffs {
            if decomposition(sw, a, w, ix)? == sw.second_moment {
                ok.push(a);
            }
        }
        Ok(ok)
    };
    let main = holds(AfeWeights::Scaled, DualIndex::Forward)?;
    out.push(Check::gate("moments.decomposition", main.len() == cutoffs.len(), format!("exact at A in {main:?}")));
    for (name, w, ix) in [
        ("moments.decomposition_without_half_powers", AfeWeights::Unscaled, DualIndex::Forward),
        ("moments.decomposition_dual_index_mirrored", AfeWeights::Scaled, DualIndex::Mirrored),
        ("moments.decomposition_dual_index_mirrored_down", AfeWeights::Scaled, DualIndex::MirroredDown),
    ] {
        let ok = holds(w, ix)?;
        out.push(Check::diag(name, ok.len() == cutoffs.len(), format!("exact at A in {ok:?}")));
    }
    let mut split = GridStats::default();
    for t in 0..2 * g {
        let st = sw.s_terms(t)?;
        for pass in [
            &st.cube + &st.noncube == st.prin,
            st.cube == cube_by_coprimality(ctx, t)?,
            st.cube == cube_by_series(spec, t)?,
        ] {
            split.checked += 1;
            if !pass {
                split.failed += 1;
            }
        }
    }
    out.push(Check::grid("moments.cube_split", split));
    let big_q = ctx.ext().q() as f64;
    let dual_cost = sw.family_count() as f64 * big_q.powi(spec.m() as i32) * crate::poly::monic_offset(spec.q(), 2 * g as usize) as f64;
    if dual_cost <= CHECK_BUDGET {
        let paired = dual_via_gauss(ctx, DualRoute::Paired, cfg.jobs)?;
        out.push(Check::gate("moments.dual_via_gauss", dual_agrees(sw, &paired), "omega^2 conj(chi(f)) = q^(-g-2) G(1,F) G(f,F), all t"));
        let single = dual_via_gauss(ctx, DualRoute::Single, cfg.jobs)?;
        let agree = single.iter().zip(&sw.dual).filter(|(z, x)| **z == CycloNumber::from_qomega(z.p(), x)).count();
        out.push(Check::diag(
            "moments.dual_via_single_gauss_sum",
            dual_agrees(sw, &single),
            format!("omega^2 conj(chi(f)) = q^(-g/2-1) G(f,F): {agree} of {} coefficients agree", single.len()),
        ));
    } else {
        out.push(Check::skipped("moments.dual_via_gauss", dual_cost));
    }
    Ok(out)
}
