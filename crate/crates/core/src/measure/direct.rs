//! Pairwise kernels: every pair of interior cells is pushed through the node rule and
//! deposited with the mean-preserving split. O(B^2) per operation.

use super::{GridSpec, HatMeasure};

#[inline]
fn deposit(grid: &GridSpec, out: &mut [f64], m: f64, w: f64) {
    let (lo, f) = grid.locate(m);
    out[lo] += w * (1.0 - f);
    out[lo + 1] += w * f;
}

pub(crate) fn var_conv(x: &HatMeasure, y: &HatMeasure) -> HatMeasure {
    let grid = x.grid();
    let b = grid.bins();
    let (xe, ye) = (x.ext(), y.ext());
    let mut out = vec![0.0; b + 2];
    let (x1, y1) = (xe[b + 1], ye[b + 1]);
    out[b + 1] = x1 + y1 - x1 * y1;
    // atom0 is the identity
    let (x0, y0) = (xe[0], ye[0]);
    out[0] += x0 * y0;
    for i in 1..=b {
        out[i] += x0 * ye[i] + y0 * xe[i];
    }
    for i in 1..=b {
        let wi = xe[i];
        if wi == 0.0 {
            continue;
        }
        let m1 = grid.center(i - 1);
        for j in 1..=b {
            let wj = ye[j];
            if wj == 0.0 {
                continue;
            }
            let m2 = grid.center(j - 1);
            let p = m1 * m2;
            let w = wi * wj;
            deposit(&grid, &mut out, (m1 + m2) / (1.0 + p), 0.5 * w * (1.0 + p));
            deposit(&grid, &mut out, (m1 - m2).abs() / (1.0 - p), 0.5 * w * (1.0 - p));
        }
    }
    HatMeasure::from_ext_unchecked(grid, out)
}

pub(crate) fn check_conv(x: &HatMeasure, y: &HatMeasure) -> HatMeasure {
    let grid = x.grid();
    let b = grid.bins();
    let (xe, ye) = (x.ext(), y.ext());
    let mut out = vec![0.0; b + 2];
    let (x0, y0) = (xe[0], ye[0]);
    out[0] = x0 + y0 - x0 * y0;
    // atom1 is the identity
    let (x1, y1) = (xe[b + 1], ye[b + 1]);
    out[b + 1] += x1 * y1;
    for i in 1..=b {
        out[i] += x1 * ye[i] + y1 * xe[i];
    }
    for i in 1..=b {
        let wi = xe[i];
        if wi == 0.0 {
            continue;
        }
        let m1 = grid.center(i - 1);
        for j in 1..=b {
            let wj = ye[j];
            if wj == 0.0 {
                continue;
            }
            deposit(&grid, &mut out, m1 * grid.center(j - 1), wi * wj);
        }
    }
    HatMeasure::from_ext_unchecked(grid, out)
}
