//! Normalized Hecke L-values `c_p⁺(E)` for the CM curves `E_D : y² = x³ − Dx`.

pub mod algprecomp;
pub mod curvefam;
pub mod gaussint;
pub mod mpcomplex;
pub mod numoracle;
pub mod padicscan;
pub mod primes;
pub mod traceexact;
