use serde::Serialize;

use crate::error::Result;

/// A threshold located by bisection on a predicate that is true below it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub kind: String,
    pub h_lo: f64,
    pub h_hi: f64,
    pub h_mid: f64,
    pub tol: f64,
    pub iterations: usize,
    pub estimator: String,
    pub flags: Vec<String>,
    /// The bisection trusts the predicate to switch exactly once on the bracket.
    pub monotone_assumed: bool,
    pub de_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Box<ThresholdReport>>,
}

impl ThresholdReport {
    pub fn exact(h: f64, tol: f64) -> Self {
        Self {
            kind: String::new(),
            h_lo: h,
            h_hi: h,
            h_mid: h,
            tol,
            iterations: 0,
            estimator: String::new(),
            flags: Vec::new(),
            monotone_assumed: false,
            de_iterations: 0,
            cross_check: None,
        }
    }

    pub fn flagged(&self) -> bool {
        !self.flags.is_empty() || self.cross_check.as_ref().is_some_and(|c| c.flagged())
    }
}

/// Bisection on `[lo, hi]` for the switch of `pred` from true to false.
pub fn bisect(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut pred: impl FnMut(f64) -> Result<bool>,
) -> Result<ThresholdReport> {
    let mut report = ThresholdReport::exact(lo, tol);
    report.monotone_assumed = true;
    if !pred(lo)? {
        report.flags.push(format!("predicate already false at the lower end h={lo}"));
        return Ok(report);
    }
    if pred(hi)? {
        report.flags.push(format!("predicate still true at the upper end h={hi}"));
        let mut r = ThresholdReport::exact(hi, tol);
        r.flags = report.flags;
        r.monotone_assumed = true;
        return Ok(r);
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    report.h_lo = lo;
    report.h_hi = hi;
    report.h_mid = 0.5 * (lo + hi);
    report.iterations = iterations;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_switch_point() {
        let r = bisect(0.0, 1.0, 1e-6, |h| Ok(h < 0.3141)).unwrap();
        assert!(r.h_lo <= 0.3141 && r.h_hi >= 0.3141 && r.h_hi - r.h_lo <= 1e-6);
        assert!(r.flags.is_empty());
        let bad = bisect(0.0, 1.0, 1e-3, |_| Ok(false)).unwrap();
        assert!(bad.flagged());
    }
}
