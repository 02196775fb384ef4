//! Plain-text persistence for [`PrecompBundle`].
//!
//! ```text
//! cmlv-bundle v1
//! D 17
//! f_gen 34 34
//! alpha 1 0
//! d 256
//! G
//! 0 <re> <im>
//! ...
//! denom 1
//! J
//! ...
//! denom <δ>
//! s
//! <re> <im>
//! ...
//! provenance g_prec_bits <n>
//! provenance j_prec_bits <n>
//! provenance psi <name>
//! provenance period <name>
//! provenance check <text>
//! end
//! ```
//!
//! Zero coefficients are omitted from the `G`/`J` sections.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rug::Integer;
use thiserror::Error;

use super::{verify_bundle, PrecompBundle, PrecompError, Provenance, ZiPoly};
use crate::curvefam::make_params;
use crate::gaussint::GaussInt;

pub const BUNDLE_VERSION: &str = "cmlv-bundle v1";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle file not found: {0}")]
    NotFound(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("unsupported bundle version line {0:?}")]
    Version(String),
    #[error("malformed bundle, line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("bundle failed verification: {0}")]
    Verification(#[from] PrecompError),
}

fn write_poly(out: &mut String, name: &str, p: &ZiPoly) {
    let _ = writeln!(out, "{name}");
    for (j, c) in p.coeffs.iter().enumerate() {
        if !c.is_zero() {
            let _ = writeln!(out, "{j} {} {}", c.re, c.im);
        }
    }
    let _ = writeln!(out, "denom {}", p.denom);
}

/// Canonical text form of a bundle.
pub fn bundle_to_string(b: &PrecompBundle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{BUNDLE_VERSION}");
    let _ = writeln!(out, "D {}", b.params.d_param);
    let _ = writeln!(out, "f_gen {} {}", b.params.f_gen.re, b.params.f_gen.im);
    let _ = writeln!(out, "alpha {} {}", b.params.alpha.re, b.params.alpha.im);
    let _ = writeln!(out, "d {}", b.params.degree);
    write_poly(&mut out, "G", &b.g);
    write_poly(&mut out, "J", &b.j);
    let _ = writeln!(out, "s");
    for s in &b.power_sums {
        let _ = writeln!(out, "{} {}", s.re, s.im);
    }
    let p = &b.provenance;
    let _ = writeln!(out, "provenance g_prec_bits {}", p.g_prec_bits);
    let _ = writeln!(out, "provenance j_prec_bits {}", p.j_prec_bits);
    let _ = writeln!(out, "provenance psi {}", p.psi_convention);
    let _ = writeln!(out, "provenance period {}", p.period_convention);
    for c in &p.checks {
        let _ = writeln!(out, "provenance check {c}");
    }
    let _ = writeln!(out, "end");
    out
}

pub fn save_bundle(bundle: &PrecompBundle, path: &Path) -> Result<(), BundleError> {
    let io_err = |source| BundleError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
    }
    // write-then-rename so a concurrent reader never sees a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bundle_to_string(bundle)).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn load_bundle(path: &Path) -> Result<PrecompBundle, BundleError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(BundleError::NotFound(path.display().to_string()))
        }
        Err(source) => {
            return Err(BundleError::Io {
                path: path.display().to_string(),
                source,
            })
        }
    };
    bundle_from_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, BundleError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.line = n + 1;
                Ok(l.trim_end())
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> BundleError {
        BundleError::Malformed {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, BundleError> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(parts.collect())
    }

    fn int(&self, s: &str) -> Result<Integer, BundleError> {
        s.parse::<Integer>()
            .map_err(|_| self.err(format!("bad integer {s:?}")))
    }

    fn gauss(&self, parts: &[&str]) -> Result<GaussInt, BundleError> {
        if parts.len() != 2 {
            return Err(self.err("expected `re im`"));
        }
        Ok(GaussInt::new(self.int(parts[0])?, self.int(parts[1])?))
    }

    fn poly(&mut self, name: &str, d: usize) -> Result<ZiPoly, BundleError> {
        if self.next()? != name {
            return Err(self.err(format!("expected section `{name}`")));
        }
        let mut coeffs = vec![GaussInt::zero(); d + 1];
        loop {
            let l = self.next()?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.first() == Some(&"denom") {
                if parts.len() != 2 {
                    return Err(self.err("expected `denom n`"));
                }
                let denom = self.int(parts[1])?;
                if denom <= 0 {
                    return Err(self.err("denominator must be positive"));
                }
                return Ok(ZiPoly::new(coeffs, denom));
            }
            if parts.len() != 3 {
                return Err(self.err("expected `degree re im`"));
            }
            let j: usize = parts[0].parse().map_err(|_| self.err("bad degree"))?;
            if j > d {
                return Err(self.err(format!("degree {j} exceeds d = {d}")));
            }
            coeffs[j] = self.gauss(&parts[1..])?;
        }
    }
}

pub fn bundle_from_str(text: &str) -> Result<PrecompBundle, BundleError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version = lines.next()?;
    if version != BUNDLE_VERSION {
        return Err(BundleError::Version(version.to_string()));
    }
    let dv = lines.keyed("D")?;
    let d_param: i64 = dv
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| lines.err("bad D"))?;
    let params = make_params(d_param).map_err(|e| lines.err(e.to_string()))?;
    let parts = lines.keyed("f_gen")?;
    let f_gen = lines.gauss(&parts)?;
    let parts = lines.keyed("alpha")?;
    let alpha = lines.gauss(&parts)?;
    if f_gen != params.f_gen || alpha != params.alpha {
        return Err(lines.err("f_gen/alpha disagree with the curve parameters"));
    }
    let d: usize = lines
        .keyed("d")?
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| lines.err("bad d"))?;
    if d != params.degree {
        return Err(lines.err(format!("d = {d}, expected {}", params.degree)));
    }
    let g = lines.poly("G", d)?;
    let j = lines.poly("J", d)?;
    if lines.next()? != "s" {
        return Err(lines.err("expected section `s`"));
    }
    let mut power_sums = Vec::with_capacity(d);
    for _ in 0..d {
        let l = lines.next()?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        power_sums.push(lines.gauss(&parts)?);
    }
    let mut provenance = Provenance::default();
    loop {
        let l = lines.next()?;
        if l == "end" {
            break;
        }
        let rest = l
            .strip_prefix("provenance ")
            .ok_or_else(|| lines.err("expected `provenance` or `end`"))?;
        let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
        match key {
            "g_prec_bits" => {
                provenance.g_prec_bits = value.parse().map_err(|_| lines.err("bad precision"))?
            }
            "j_prec_bits" => {
                provenance.j_prec_bits = value.parse().map_err(|_| lines.err("bad precision"))?
            }
            "psi" => provenance.psi_convention = value.to_string(),
            "period" => provenance.period_convention = value.to_string(),
            "check" => provenance.checks.push(value.to_string()),
            other => return Err(lines.err(format!("unknown provenance key {other:?}"))),
        }
    }
    let bundle = PrecompBundle {
        params,
        g,
        j,
        power_sums,
        provenance,
    };
    verify_bundle(&bundle)?;
    Ok(bundle)
}
