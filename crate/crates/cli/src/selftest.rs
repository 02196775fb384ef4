use std::fs;
use std::path::Path;

use cmlv_core::algprecomp::{build_bundle, is_separable, load_bundle, save_bundle, PrecompBundle};
use cmlv_core::curvefam::{ap_point_count, make_params, psi, CurveParams};
use cmlv_core::gaussint::{factor, GaussInt, IdealRep};
use cmlv_core::mpcomplex::PrecisionCtx;
use cmlv_core::numoracle::xi_p_numeric;
use cmlv_core::padicscan::{cp_residue_checked, make_ctx};
use cmlv_core::primes::split_primes;
use cmlv_core::traceexact::{
    bn_leading_coefficient, bn_poly_exact, cp_plus_exact, newton_power_sums, parse_bn_fixtures,
    rational_ord, EXACT_P_MAX,
};
use rug::{Integer, Rational};

use crate::{bundle_path, Failure};

const DEFAULT_FIXTURES: &str = include_str!("../../../fixtures/b13.txt");
const BASE_CURVES: [i64; 2] = [3, 5];

type Check = Result<(), String>;

struct Report {
    failures: usize,
}

impl Report {
    fn record(&mut self, name: &str, outcome: Check) {
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                self.failures += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
}

/// Compares every fixture block with `B_n` computed from scratch.
fn check_b13(text: &str) -> Check {
    let fixtures = parse_bn_fixtures(text)?;
    if fixtures.is_empty() {
        return Err("no fixtures found".into());
    }
    for fx in fixtures {
        let b = bn_poly_exact(fx.d_param, fx.coeffs.len() - 1);
        if let Some(j) = (0..fx.coeffs.len()).find(|&j| b.coeffs[j] != fx.coeffs[j]) {
            return Err(format!(
                "D = {}: X^{j} coefficient {} differs from fixture {}",
                fx.d_param, b.coeffs[j], fx.coeffs[j]
            ));
        }
    }
    Ok(())
}

fn check_bn_laws() -> Check {
    for d in [17i64, -14, 3, 5] {
        for n in 1..=40 {
            let b = bn_poly_exact(d, n);
            if *b.leading() != bn_leading_coefficient(n) || !b.has_parity() {
                return Err(format!("D = {d}, n = {n}"));
            }
        }
    }
    Ok(())
}

fn check_psi(d: i64) -> Check {
    let params = make_params(d).map_err(|e| e.to_string())?;
    for p in split_primes(5, 199) {
        if (2 * d.unsigned_abs()).is_multiple_of(p) {
            continue;
        }
        let ap = ap_point_count(d, p).map_err(|e| e.to_string())?;
        for (pi, _) in factor(&GaussInt::from_int(p)).map_err(|e| e.to_string())? {
            let v = psi(&params, &IdealRep::new(pi).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if Integer::from(&v.re * 2) != ap {
                return Err(format!(
                    "p = {p}: 2 Re psi = {}, a_p = {ap}",
                    v.re.clone() * 2
                ));
            }
        }
    }
    Ok(())
}

fn obtain_bundle(cache: &Path, params: &CurveParams) -> Result<PrecompBundle, String> {
    let path = bundle_path(cache, params.d_param);
    if let Ok(b) = load_bundle(&path) {
        return Ok(b);
    }
    let b = build_bundle(params).map_err(|e| e.to_string())?;
    // a cache write failure does not invalidate the bundle itself
    let _ = save_bundle(&b, &path);
    Ok(b)
}

fn check_bundle(b: &PrecompBundle) -> Check {
    if !is_separable(&b.g) {
        return Err("G is not separable".into());
    }
    let s = newton_power_sums(&b.g, b.params.degree).map_err(|e| e.to_string())?;
    if s.values != b.power_sums {
        return Err("stored power sums differ from Newton recomputation".into());
    }
    Ok(())
}

fn valid_primes(params: &CurveParams, hi: u64) -> Vec<u64> {
    split_primes(5, hi)
        .into_iter()
        .filter(|p| !(2 * params.d_param.unsigned_abs()).is_multiple_of(*p))
        .collect()
}

fn check_oracle(params: &CurveParams, b: &PrecompBundle) -> Check {
    let ctx = PrecisionCtx::new(256 + 16 * params.degree as u32);
    for p in valid_primes(params, 41) {
        let r = xi_p_numeric(params, b, p, &ctx).map_err(|e| e.to_string())?;
        if !r.matched {
            return Err(format!("p = {p}: oracle value {} disagrees", r.rounded));
        }
        let exact = cp_plus_exact(params, b, p).map_err(|e| e.to_string())?;
        if exact != r.cp_plus {
            return Err(format!("p = {p}: oracle c_p+ differs"));
        }
    }
    Ok(())
}

fn residue_of(c: &Rational, modulus: u128) -> Option<u128> {
    let m = Integer::from(modulus);
    let inv = c.denom().clone().invert(&m).ok()?;
    (Integer::from(c.numer() * &inv)).div_rem_euc(m).1.to_u128()
}

fn check_exact_vs_modular(params: &CurveParams, b: &PrecompBundle) -> Check {
    for p in valid_primes(params, EXACT_P_MAX) {
        let exact = cp_plus_exact(params, b, p).map_err(|e| e.to_string())?;
        if rational_ord(&exact, p).is_some_and(|o| o < 0) {
            return Err(format!("p = {p}: negative valuation"));
        }
        let k = 5;
        let ctx = make_ctx(p, k, params).map_err(|e| e.to_string())?;
        let (_, modular) = cp_residue_checked(params, b, p, k).map_err(|e| e.to_string())?;
        if residue_of(&exact, ctx.modulus) != Some(modular) {
            return Err(format!("p = {p}: exact and modular residues differ"));
        }
    }
    Ok(())
}

pub(crate) fn run(cache: &Path, fixtures: Option<&Path>, extra: &[i64]) -> Result<bool, Failure> {
    let mut report = Report { failures: 0 };
    let text = match fixtures {
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display())),
        None => Ok(DEFAULT_FIXTURES.to_string()),
    };
    report.record("b13-fixtures", text.and_then(|t| check_b13(&t)));
    report.record("bn-leading-and-parity", check_bn_laws());
    for d in [3i64, 5, 17, -14] {
        report.record(&format!("psi-vs-point-count D={d}"), check_psi(d));
    }
    let mut curves: Vec<i64> = BASE_CURVES.to_vec();
    curves.extend(extra.iter().filter(|d| !BASE_CURVES.contains(d)));
    for d in curves {
        let params = make_params(d).map_err(|e| Failure::input(format!("D = {d}: {e}")))?;
        let bundle = match obtain_bundle(cache, &params) {
            Ok(b) => b,
            Err(why) => {
                report.record(&format!("bundle D={d}"), Err(why));
                continue;
            }
        };
        report.record(&format!("bundle D={d}"), check_bundle(&bundle));
        report.record(&format!("oracle D={d}"), check_oracle(&params, &bundle));
        report.record(
            &format!("exact-vs-modular+dual-embedding D={d}"),
            check_exact_vs_modular(&params, &bundle),
        );
    }
    println!(
        "{}",
        if report.failures == 0 {
            "selftest: all checks passed".to_string()
        } else {
            format!("selftest: {} check(s) failed", report.failures)
        }
    );
    Ok(report.failures == 0)
}
