use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cmlv_core::algprecomp::{build_bundle, load_bundle, save_bundle, BundleError, PrecompBundle};
use cmlv_core::curvefam::{make_params, CurveParams};
use cmlv_core::padicscan::{
    cp_plus_mod, scan, verdict, CpResult, Ord, ScanConfig, ScanError, ScanReport,
};
use cmlv_core::traceexact::{cp_plus_exact, EXACT_P_MAX};

mod selftest;

const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_ANOMALY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cmlv",
    version,
    about = "Normalized L-values c_p+ of the curves y^2 = x^3 - Dx"
)]
struct Cli {
    /// Directory holding precomputed bundles.
    #[arg(long, global = true, env = "CMLV_CACHE", default_value = "cmlv-cache")]
    cache_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify G, J and the power sums for one curve.
    Precompute {
        #[arg(long, allow_hyphen_values = true)]
        d_param: i64,
        /// Write the bundle here instead of the cache directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rebuild even if a valid bundle is cached.
        #[arg(long)]
        force: bool,
    },
    /// c_p+ at a single prime.
    Cp {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        p: u64,
        /// Also print the exact rational value (p <= 101).
        #[arg(long)]
        exact: bool,
    },
    /// c_p+ for every prime p = 1 mod 4 in [pmin, pmax].
    Scan {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 5)]
        pmin: u64,
        #[arg(long)]
        pmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// The Sha(E/K)(p) statement implied by a given valuation.
    Verdict {
        #[arg(long)]
        ord: u32,
        #[arg(long, default_value_t = 2)]
        rank: u32,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        parity_ok: bool,
        /// p is a good ordinary prime with E(K) of order prime to p.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        good_ordinary: bool,
    },
    /// Run the built-in consistency checks.
    Selftest {
        /// Alternative B_13 fixture file.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Also check these curves (bundles are built if missing).
        #[arg(long = "d-param", allow_hyphen_values = true)]
        extra: Vec<i64>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, allow_hyphen_values = true)]
    d_param: i64,
    /// Rank g of E(Q).
    #[arg(long, default_value_t = 2)]
    rank: u32,
    /// p-adic precision exponent (default rank + 3).
    #[arg(long)]
    k: Option<u32>,
    /// The analytic rank has the same parity as g.
    #[arg(long)]
    parity_ok: bool,
    /// Use this bundle file instead of the cache.
    #[arg(long)]
    bundle: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            msg: msg.into(),
        }
    }

    fn verify(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VERIFY,
            msg: msg.into(),
        }
    }
}

fn scan_failure(e: ScanError) -> Failure {
    match e {
        ScanError::DualEmbeddingMismatch { .. } | ScanError::NotInvertible(_) => {
            Failure::verify(e.to_string())
        }
        _ => Failure::input(e.to_string()),
    }
}

pub(crate) fn bundle_path(cache: &Path, d: i64) -> PathBuf {
    cache.join(format!("D{d}.bundle"))
}

fn params_for(d: i64) -> Result<CurveParams, Failure> {
    make_params(d).map_err(|e| Failure::input(format!("D = {d}: {e}")))
}

fn load(path: &Path, d: i64) -> Result<PrecompBundle, Failure> {
    match load_bundle(path) {
        Ok(b) if b.params.d_param == d => Ok(b),
        Ok(b) => Err(Failure::input(format!(
            "{} holds D = {}, not {d}",
            path.display(),
            b.params.d_param
        ))),
        Err(BundleError::NotFound(p)) => Err(Failure::input(format!(
            "no bundle at {p}; run `cmlv precompute --d-param {d}` first"
        ))),
        Err(e @ BundleError::Verification(_)) => Err(Failure::verify(e.to_string())),
        Err(e) => Err(Failure::input(e.to_string())),
    }
}

impl RunArgs {
    fn config(&self) -> Result<ScanConfig, Failure> {
        let mut cfg = ScanConfig::new(self.rank);
        if let Some(k) = self.k {
            if k < 1 {
                return Err(Failure::input("--k must be at least 1"));
            }
            cfg.k = k;
        }
        cfg.parity_ok = self.parity_ok;
        Ok(cfg)
    }

    fn bundle(&self, cache: &Path) -> Result<(CurveParams, PrecompBundle), Failure> {
        let params = params_for(self.d_param)?;
        let path = self
            .bundle
            .clone()
            .unwrap_or_else(|| bundle_path(cache, self.d_param));
        Ok((params, load(&path, self.d_param)?))
    }
}

/// Valuation below the rank contradicts `ord_p ≥ s_𝔭 ≥ g`; saturation
/// means the digits asked for are unknown.
fn is_anomalous(r: &CpResult, cfg: &ScanConfig) -> bool {
    match r.ord {
        Ord::Exact(v) => v < cfg.rank,
        Ord::AtLeast(_) => true,
    }
}

fn print_table(report: &ScanReport) {
    let mut rows: Vec<(u64, String)> = report
        .results
        .iter()
        .map(|r| {
            let mut line = format!("{:>6}  {:>6}", r.p, r.table_digit.to_string());
            if r.exceptional {
                line.push_str(&format!("   exceptional, ord {}", r.ord));
            } else if r.ord != Ord::Exact(2) {
                line.push_str(&format!("   ord {}", r.ord));
            }
            (r.p, line)
        })
        .collect();
    rows.extend(
        report
            .skipped
            .iter()
            .map(|(p, _)| (*p, format!("{p:>6}  not valid"))),
    );
    rows.sort_by_key(|(p, _)| *p);
    println!("{:>6}  {:>6}", "p", "digit");
    for (_, l) in rows {
        println!("{l}");
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Precompute {
            d_param,
            out,
            force,
        } => {
            let params = params_for(d_param)?;
            let path = out.unwrap_or_else(|| bundle_path(&cli.cache_dir, d_param));
            if !force {
                if let Ok(b) = load(&path, d_param) {
                    println!(
                        "D = {d_param}: verified bundle already at {}",
                        path.display()
                    );
                    print_bundle_summary(&b);
                    return Ok(0);
                }
            }
            let b = build_bundle(&params).map_err(|e| Failure::verify(e.to_string()))?;
            save_bundle(&b, &path).map_err(|e| Failure::input(e.to_string()))?;
            println!("D = {d_param}: wrote {}", path.display());
            print_bundle_summary(&b);
            Ok(0)
        }
        Command::Cp { run, p, exact } => {
            let cfg = run.config()?;
            let (params, bundle) = run.bundle(&cli.cache_dir)?;
            let r = cp_plus_mod(&params, &bundle, p, &cfg).map_err(scan_failure)?;
            println!("p = {p}, k = {}", r.k);
            println!("c_p+ mod p^k = {}", r.residue);
            println!("ord_p = {}", r.ord);
            if let Some(u) = r.unit_digit {
                println!("unit digit = {u}");
            }
            println!("table digit = {}", r.table_digit);
            println!("exceptional = {}", r.exceptional);
            println!("verdict = {}", r.verdict);
            println!("note: {}", r.m_p_bound_note);
            if exact {
                if p > EXACT_P_MAX {
                    return Err(Failure::input(format!("--exact needs p <= {EXACT_P_MAX}")));
                }
                let c = cp_plus_exact(&params, &bundle, p)
                    .map_err(|e| Failure::verify(e.to_string()))?;
                println!("c_p+ = {c}");
            }
            Ok(if is_anomalous(&r, &cfg) {
                EXIT_ANOMALY
            } else {
                0
            })
        }
        Command::Scan {
            run,
            pmin,
            pmax,
            format,
            threads,
        } => {
            if pmin == 0 || pmax == 0 {
                return Err(Failure::input("prime bounds must be positive"));
            }
            let cfg = run.config()?;
            let (params, bundle) = run.bundle(&cli.cache_dir)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Failure::input(e.to_string()))?;
            let report = pool
                .install(|| scan(&params, &bundle, pmin, pmax, &cfg))
                .map_err(scan_failure)?;
            match format {
                Format::Table => print_table(&report),
                Format::Csv => {
                    println!("{}", CpResult::CSV_HEADER);
                    for r in &report.results {
                        println!("{}", r.csv_row());
                    }
                    for (p, why) in &report.skipped {
                        eprintln!("skipped {p}: {why}");
                    }
                }
            }
            let anomalies: Vec<u64> = report
                .results
                .iter()
                .filter(|r| is_anomalous(r, &cfg))
                .map(|r| r.p)
                .collect();
            if anomalies.is_empty() {
                Ok(0)
            } else {
                eprintln!("anomalous primes: {anomalies:?}");
                Ok(EXIT_ANOMALY)
            }
        }
        Command::Verdict {
            ord,
            rank,
            p,
            parity_ok,
            good_ordinary,
        } => {
            let v = verdict(ord, rank, p, parity_ok, good_ordinary);
            println!("{v}");
            if ord > rank {
                println!("exceptional (ord {ord} > g = {rank})");
            }
            Ok(0)
        }
        Command::Selftest { fixtures, extra } => {
            let ok = selftest::run(&cli.cache_dir, fixtures.as_deref(), &extra)?;
            Ok(if ok { 0 } else { EXIT_VERIFY })
        }
    }
}

fn print_bundle_summary(b: &PrecompBundle) {
    println!("d = {}", b.params.degree);
    println!("G: {} bits max coefficient", b.g.max_coeff_bits());
    println!("J: denominator {} bits", b.j.denom.significant_bits());
    println!(
        "precision: G {} bits, J {} bits",
        b.provenance.g_prec_bits, b.provenance.j_prec_bits
    );
    for c in &b.provenance.checks {
        println!("verified: {c}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
