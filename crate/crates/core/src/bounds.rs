//! Closed-form bounds on the number of systematic nodes k for a given
//! sub-packetization ell and parity count r.
//!
//! Which code each bound speaks about:
//! - `quadratic` (ell^2) bounds k of the original code directly.
//! - `linear_r2` (max(4 ell, 8 log2 ell)) bounds the number of pairs in a
//!   two-parity operator system.
//! - `logsq` (2 log2 ell (floor(log_delta ell) + 1) + 1) bounds k of the
//!   original code; the trailing +1 undoes the one-node reduction from a
//!   (k+r+1, k+1, ell) code to a helper-independent (k+r, k, ell) code.
//!
//! Every operator system with K pairs comes from a code with at most K + 1
//! systematic nodes, so all three bounds also cap K.

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::code::CodeParams;
use crate::error::{Error, Result};
use crate::repair::bandwidth_of;

fn log2_exact(ell: u64) -> Result<u32> {
    if ell == 0 || !ell.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(ell));
    }
    Ok(ell.trailing_zeros())
}

/// k <= ell^2.
pub fn bound_quadratic(ell: u64) -> u64 {
    ell.saturating_mul(ell)
}

/// max(4 ell, 8 log2 ell), for two parities and ell a power of two.
pub fn bound_linear_r2(ell: u64) -> Result<u64> {
    let lg = log2_exact(ell)? as u64;
    Ok((4 * ell).max(8 * lg))
}

/// floor(log_delta ell) with delta = r / (r - 1): the largest e with
/// r^e <= ell (r - 1)^e. Computed in exact integers.
pub fn floor_log_delta(ell: u64, r: u64) -> Result<u64> {
    if r < 2 || ell < 1 {
        return Err(Error::InvalidParams(format!("log_delta needs r >= 2 and ell >= 1 (r={r}, ell={ell})")));
    }
    let ell_big = BigUint::from(ell);
    let mut num = BigUint::from(1u32); // r^e
    let mut den = BigUint::from(1u32); // (r-1)^e
    let mut e = 0u64;
    loop {
        let next_num = &num * r;
        let next_den = &den * (r - 1);
        if next_num > &ell_big * &next_den {
            return Ok(e);
        }
        num = next_num;
        den = next_den;
        e += 1;
    }
}

/// 2 log2 ell (floor(log_delta ell) + 1) + 1.
pub fn bound_logsq(ell: u64, r: u64) -> Result<u64> {
    if ell < 2 || r < 2 {
        return Err(Error::InvalidParams(format!("logsq bound needs ell >= 2 and r >= 2 (ell={ell}, r={r})")));
    }
    let lg = log2_exact(ell).map_err(|_| Error::InvalidParams(format!("ell = {ell} is not a power of two")))?;
    Ok(2 * lg as u64 * (floor_log_delta(ell, r)? + 1) + 1)
}

/// (r + 1) log_r ell, the k reached by known constructions.
pub fn known_achievable(ell: u64, r: u64) -> Result<f64> {
    if ell < 2 || r < 2 {
        return Err(Error::InvalidParams(format!("need ell >= 2 and r >= 2 (ell={ell}, r={r})")));
    }
    // exact when ell is a power of r
    let mut pow = 1u64;
    let mut e = 0u64;
    while pow < ell {
        match pow.checked_mul(r) {
            Some(p) => pow = p,
            None => break,
        }
        e += 1;
    }
    if pow == ell {
        return Ok(((r + 1) * e) as f64);
    }
    Ok((r + 1) as f64 * (ell as f64).ln() / (r as f64).ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub ell: u64,
    pub r: u64,
    pub n: Option<u64>,
    pub quadratic: u64,
    /// Only for r = 2 and ell a power of two.
    pub linear_r2: Option<u64>,
    /// Only for ell >= 2 a power of two and r >= 2.
    pub logsq: Option<u64>,
    pub known_achievable: Option<f64>,
    /// (n - 1) ell / r when n is known.
    pub bandwidth: Option<Ratio<u64>>,
}

impl BoundReport {
    pub fn new(ell: u64, r: u64, n: Option<u64>) -> Result<BoundReport> {
        if ell == 0 || r == 0 {
            return Err(Error::InvalidParams("ell and r must be positive".into()));
        }
        let bandwidth = match n {
            Some(n) if n > r => {
                let params = CodeParams::new(ell as usize, (n - r) as usize, r as usize)?;
                Some(bandwidth_of(params))
            }
            Some(n) => {
                return Err(Error::InvalidParams(format!("n = {n} must exceed r = {r}")));
            }
            None => None,
        };
        Ok(BoundReport {
            ell,
            r,
            n,
            quadratic: bound_quadratic(ell),
            linear_r2: if r == 2 { bound_linear_r2(ell).ok() } else { None },
            logsq: bound_logsq(ell, r).ok(),
            known_achievable: known_achievable(ell, r).ok(),
            bandwidth,
        })
    }

    /// The upper bounds that apply, by name.
    pub fn upper_bounds(&self) -> Vec<(&'static str, u64)> {
        let mut out = vec![("quadratic", self.quadratic)];
        if let Some(b) = self.linear_r2 {
            out.push(("linear_r2", b));
        }
        if let Some(b) = self.logsq {
            out.push(("logsq", b));
        }
        out
    }
}

/// Checks a searched k against every applicable upper bound. A violation is
/// returned as an error carrying the offending bound.
pub fn consistency_assert(search_kmax: u64, report: &BoundReport) -> Result<bool> {
    for (name, bound) in report.upper_bounds() {
        if search_kmax > bound {
            return Err(Error::BoundViolated {
                kmax: search_kmax,
                bound_name: name,
                bound,
                ell: report.ell,
                r: report.r,
            });
        }
    }
    Ok(true)
}
