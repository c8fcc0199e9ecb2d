//! Command-line front end.

mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::characters::{FamilyContext, FamilySpec};
use crate::cyclo::{fmt_frac, rat};
use crate::error::{Error, Result};
use crate::field::check_family_base;
use crate::gauss::{GaussField, PrimeGauss};
use crate::poly::Poly;
use crate::moments::{sweep, to_json, write_if_changed, MomentLedger, STermTable, Store, SweepOptions};
use crate::series::{a_q_value, family_count_closed_form, split_pair_count_closed_form};

pub use verify::{family_checks, gauss_checks, lfun_checks, moment_checks, run_battery, series_checks, Check, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INVALID_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cubic-moments", version, about = "Exact second moments of cubic Dirichlet L-functions over F_q(T), q = 2 mod 3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact identity battery for (q, g).
    Verify,
    /// Sweep the family, write the report and the per-character records.
    Sweep,
    /// Closed-form G(V, P^i) over F_{q^2} for small primes P, with direct sums.
    GaussTable {
        /// Largest prime degree.
        #[arg(long, default_value_t = 1)]
        max_deg: usize,
        /// Largest exponent i.
        #[arg(long, default_value_t = 4)]
        max_power: u32,
    },
    /// Certified value of A_q(q^{-2}, q^{-3/2}).
    AqEval,
    /// Family size for (q, g) with its closed-form counts.
    FamilyCount,
    /// Re-emit a cached report or S-term table.
    Export {
        #[arg(long, value_enum, default_value_t = ExportWhat::Report)]
        what: ExportWhat,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportWhat {
    Report,
    Sterms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, default_value_t = 5)]
    pub q: u64,
    #[arg(long, global = true, default_value_t = 2)]
    pub g: u32,
    /// Cutoff of the approximate functional equation (default g - 1).
    #[arg(long = "A", global = true)]
    pub big_a: Option<u32>,
    /// u-order of series checks.
    #[arg(long, global = true, default_value_t = 4)]
    pub trunc_u: usize,
    /// z-order of series checks.
    #[arg(long, global = true, default_value_t = 3)]
    pub trunc_z: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, env = "CACHE_DIR", default_value = "cache")]
    pub cache_dir: PathBuf,
    /// Run sweeps over the work budget.
    #[arg(long, global = true)]
    pub force: bool,
}

/// Validated options.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: u64,
    pub g: u32,
    pub big_a: Option<u32>,
    pub trunc_u: usize,
    pub trunc_z: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub cache_dir: PathBuf,
    pub force: bool,
}

impl RunConfig {
    pub fn from_opts(o: &GlobalOpts, default_format: Format) -> Result<RunConfig> {
        check_family_base(o.q)?;
        if o.jobs == 0 {
            return Err(Error::OutOfRange("--jobs must be at least 1".into()));
        }
        if o.tol.is_nan() || o.tol <= 0.0 {
            return Err(Error::OutOfRange(format!("--tol must be positive, got {}", o.tol)));
        }
        Ok(RunConfig {
            q: o.q,
            g: o.g,
            big_a: o.big_a,
            trunc_u: o.trunc_u,
            trunc_z: o.trunc_z,
            tol: o.tol,
            out: o.out.clone(),
            format: o.format.unwrap_or(default_format),
            jobs: o.jobs,
            cache_dir: o.cache_dir.clone(),
            force: o.force,
        })
    }

    pub fn family(&self) -> Result<FamilySpec> {
        let spec = FamilySpec::new(self.q, self.g)?;
        if let Some(a) = self.big_a {
            if self.g == 0 || a > 2 * self.g - 1 {
                return Err(Error::OutOfRange(format!("--A = {a} outside 0..=2g-1")));
            }
        }
        Ok(spec)
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions { jobs: self.jobs, force: self.force }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::InvalidField(_) | Error::InvalidFamily(_) | Error::OutOfRange(_) | Error::Parse(_) => EXIT_INVALID_CONFIG,
        _ => EXIT_CHECK_FAILED,
    }
}

/// Parses the process arguments and runs.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}

pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Verify => cmd_verify(&RunConfig::from_opts(&cli.opts, Format::Json)?),
        Command::Sweep => cmd_sweep(&RunConfig::from_opts(&cli.opts, Format::Json)?),
        Command::GaussTable { max_deg, max_power } => {
            cmd_gauss_table(&RunConfig::from_opts(&cli.opts, Format::Csv)?, *max_deg, *max_power)
        }
        Command::AqEval => cmd_aq_eval(&RunConfig::from_opts(&cli.opts, Format::Json)?),
        Command::FamilyCount => cmd_family_count(&RunConfig::from_opts(&cli.opts, Format::Json)?),
        Command::Export { what } => cmd_export(&RunConfig::from_opts(&cli.opts, Format::Json)?, *what),
    }
}

/// Single writer: the output file (rewritten only on change) or standard output.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            write_if_changed(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields
        .iter()
        .map(|f| if f.contains(',') || f.contains('"') { format!("\"{}\"", f.replace('"', "\"\"")) } else { f.clone() })
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    s
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<u8> {
    let spec = cfg.family()?;
    let report = run_battery(spec, cfg)?;
    let text = match cfg.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = csv_line(&["check".into(), "gating".into(), "passed".into(), "detail".into()]);
            for c in &report.checks {
                s.push_str(&csv_line(&[c.name.clone(), c.gating.to_string(), c.passed.to_string(), c.detail.clone()]));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Fixed column order: `t,t0,t1`, then `prin`, `cube`, `noncube`, `dual`, each
/// as four fractions on `1, w, s, ws`, then `noncube_ratio_approx`.
pub fn sterms_csv(t: &STermTable) -> String {
    let mut head = vec!["t".to_string(), "t0".into(), "t1".into()];
    for name in ["prin", "cube", "noncube", "dual"] {
        for b in ["1", "w", "s", "ws"] {
            head.push(format!("{name}_{b}"));
        }
    }
    head.push("noncube_ratio_approx".into());
    let mut s = csv_line(&head);
    for r in &t.rows {
        let mut row = vec![r.t.to_string(), r.t0.to_string(), r.t1.to_string()];
        for v in [&r.prin, &r.cube, &r.noncube, &r.dual] {
            row.extend(v.iter().cloned());
        }
        row.push(format!("{:e}", r.noncube_ratio_approx));
        s.push_str(&csv_line(&row));
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<u8> {
    let spec = cfg.family()?;
    let ctx = FamilyContext::new(spec)?;
    let store = Store::new(&cfg.cache_dir, spec);
    let sw = sweep(&ctx, &cfg.sweep_options(), Some(&store))?;
    let ledger = MomentLedger::assemble(&sw, cfg.big_a, cfg.tol)?;
    store.save_ledger(&ledger)?;
    let text = match cfg.format {
        Format::Json => to_json(&ledger.report())?,
        Format::Csv => sterms_csv(&ledger.sterms_table()),
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(match ledger.decomposition_exact {
        Some(false) => EXIT_CHECK_FAILED,
        _ => EXIT_OK,
    })
}

#[derive(Serialize)]
struct GaussRow {
    prime: String,
    i: u32,
    v: String,
    value: Vec<String>,
    matches_direct: bool,
}

pub fn cmd_gauss_table(cfg: &RunConfig, max_deg: usize, max_power: u32) -> Result<u8> {
    if max_deg == 0 || max_deg > 2 || max_power == 0 || max_power > 6 {
        return Err(Error::OutOfRange("gauss-table needs 1 <= --max-deg <= 2 and 1 <= --max-power <= 6".into()));
    }
    let ctx = FamilyContext::new(FamilySpec::new(cfg.q, 0)?)?;
    let gf = GaussField::from_family(&ctx);
    let r = gf.ring();
    let mut vs = vec![Poly::zero(), Poly::one(), Poly::x()];
    vs.push(r.add(&Poly::x(), &Poly::one()));
    let mut rows = Vec::new();
    for d in 1..=max_deg {
        for p in r.enumerate_monic(d).filter(|p| r.is_irreducible(p)) {
            let pg = PrimeGauss::new(&gf, &p)?;
            for i in 1..=max_power {
                for v in &vs {
                    let c = pg.closed(v, i)?;
                    rows.push(GaussRow {
                        prime: r.encode(&p),
                        i,
                        v: r.encode(v),
                        matches_direct: c == pg.direct(v, i),
                        value: c.coeffs().iter().map(fmt_frac).collect(),
                    });
                }
            }
        }
    }
    let all = rows.iter().all(|r| r.matches_direct);
    let text = match cfg.format {
        Format::Json => to_json(&serde_json::json!({
            "schema": "cubic-moments/gauss-table/v1",
            "q": cfg.q,
            "base_field": cfg.q * cfg.q,
            "basis": "z^k w^j at index 2k + j, z a primitive p-th root of unity",
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut s = csv_line(&["prime".into(), "i".into(), "v".into(), "matches_direct".into(), "value".into()]);
            for row in &rows {
                s.push_str(&csv_line(&[
                    row.prime.clone(),
                    row.i.to_string(),
                    row.v.clone(),
                    row.matches_direct.to_string(),
                    row.value.join(" "),
                ]));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_aq_eval(cfg: &RunConfig) -> Result<u8> {
    let e = a_q_value(cfg.q, cfg.tol)?;
    let text = match cfg.format {
        Format::Json => to_json(&serde_json::json!({
            "schema": "cubic-moments/aq-eval/v1",
            "q": cfg.q,
            "value_decimal": format!("{:.15}", e.value),
            "lower": e.lower,
            "upper": e.upper,
            "enclosure_width": e.width(),
            "truncation_degree": e.truncation_degree,
        }))?,
        Format::Csv => {
            let mut s = csv_line(&["q".into(), "value_decimal".into(), "lower".into(), "upper".into(), "enclosure_width".into(), "truncation_degree".into()]);
            s.push_str(&csv_line(&[
                cfg.q.to_string(),
                format!("{:.15}", e.value),
                format!("{:e}", e.lower),
                format!("{:e}", e.upper),
                format!("{:e}", e.width()),
                e.truncation_degree.to_string(),
            ]));
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn cmd_family_count(cfg: &RunConfig) -> Result<u8> {
    let spec = cfg.family()?;
    let ctx = FamilyContext::new(spec)?;
    let count = ctx.family_count();
    let prefilter = ctx.prefilter_count();
    let split = ctx.split_pair_count();
    let pairs = ctx.conjugate_pair_count();
    let closed = family_count_closed_form(spec.q(), spec.m())?;
    let closed_split = split_pair_count_closed_form(spec.q(), spec.m())?;
    let ok = closed == rat(count as i64) && closed_split == rat(split as i64) && prefilter == count + pairs;
    let text = match cfg.format {
        Format::Json => to_json(&serde_json::json!({
            "schema": "cubic-moments/family-count/v1",
            "q": spec.q(),
            "g": spec.g(),
            "family_count": count,
            "prefilter_count": prefilter,
            "conjugate_pairs": pairs,
            "split_pairs": split,
            "family_count_closed_form": fmt_frac(&closed),
            "split_pairs_closed_form": fmt_frac(&closed_split),
        }))?,
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "q,g,family_count,prefilter_count,conjugate_pairs,split_pairs").expect("string write");
            writeln!(s, "{},{},{},{},{},{}", spec.q(), spec.g(), count, prefilter, pairs, split).expect("string write");
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_export(cfg: &RunConfig, what: ExportWhat) -> Result<u8> {
    let spec = cfg.family()?;
    let store = Store::new(&cfg.cache_dir, spec);
    let missing = |p: &Path| Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{} missing; run sweep first", p.display())));
    let text = match what {
        ExportWhat::Report => {
            if !store.report_path().exists() {
                return Err(missing(&store.report_path()));
            }
            let r = store.load_report()?;
            match cfg.format {
                Format::Json => to_json(&r)?,
                Format::Csv => {
                    let mut s = csv_line(&["q".into(), "g".into(), "family_count".into(), "second_moment".into(), "second_moment_approx".into(), "main_term_approx".into(), "relative_deviation_approx".into()]);
                    s.push_str(&csv_line(&[
                        r.q.to_string(),
                        r.g.to_string(),
                        r.family_count.to_string(),
                        r.second_moment.join(" "),
                        format!("{:e}", r.second_moment_approx),
                        format!("{:e}", r.main_term_approx),
                        r.relative_deviation_approx.map_or(String::new(), |d| format!("{d:e}")),
                    ]));
                    s
                }
            }
        }
        ExportWhat::Sterms => {
            let p = store.sterms_path();
            if !p.exists() {
                return Err(missing(&p));
            }
            let t: STermTable = serde_json::from_str(&std::fs::read_to_string(&p)?)?;
            match cfg.format {
                Format::Json => to_json(&t)?,
                Format::Csv => sterms_csv(&t),
            }
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}
