//! Transform kernels.
//!
//! Check side: magnitudes multiply, so `u = -ln m` adds and the product law is a
//! convolution on a uniform `u` grid. Variable side: LLRs add, so the full two-sided
//! LLR density is convolved on a uniform `alpha` grid. Interior cells are split
//! linearly onto the auxiliary grid, the polynomial is evaluated pointwise in the
//! frequency domain, and the result is deposited back onto the magnitude grid with
//! the mean-preserving split. Atom masses are tracked analytically.

use std::cell::RefCell;

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use super::tables::tables;
use super::{GridSpec, HatMeasure};

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Check,
    Var,
}

fn fast_len(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < 2 * n.max(1) {
        let mut l = 2 * p3;
        while l < n {
            l *= 2;
        }
        best = best.min(l);
        p3 *= 3;
    }
    best
}

fn forward(mut signal: Vec<f64>) -> Vec<Complex<f64>> {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(signal.len());
        let mut out = fft.make_output_vec();
        fft.process(&mut signal, &mut out).expect("forward transform");
        out
    })
}

fn inverse(mut spectrum: Vec<Complex<f64>>, len: usize) -> Vec<f64> {
    spectrum[0].im = 0.0;
    if let Some(last) = spectrum.last_mut() {
        last.im = 0.0;
    }
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(len);
        let mut out = fft.make_output_vec();
        fft.process(&mut spectrum, &mut out).expect("inverse transform");
        let scale = 1.0 / len as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    })
}

/// Largest auxiliary index touched by the interior of `x`.
fn extent(side: Side, x: &HatMeasure) -> usize {
    let t = tables(x.grid());
    let map = match side {
        Side::Check => &t.u_in,
        Side::Var => &t.alpha_in,
    };
    x.interior().iter().zip(map).filter(|(w, _)| **w > 0.0).map(|(_, (k, _))| *k as usize + 1).max().unwrap_or(0)
}

fn signal(side: Side, x: &HatMeasure, len: usize) -> Vec<f64> {
    let t = tables(x.grid());
    let mut s = vec![0.0; len];
    match side {
        Side::Check => {
            s[0] += x.atom1();
            for (&w, &(k, f)) in x.interior().iter().zip(&t.u_in) {
                if w > 0.0 {
                    s[k as usize] += w * (1.0 - f);
                    s[k as usize + 1] += w * f;
                }
            }
        }
        Side::Var => {
            s[0] += x.atom0();
            let neg = |k: usize| (len - k) % len;
            for (j, (&w, &(k, f))) in x.interior().iter().zip(&t.alpha_in).enumerate() {
                if w > 0.0 {
                    let m = x.grid().center(j);
                    let (wp, wn) = (0.5 * w * (1.0 + m), 0.5 * w * (1.0 - m));
                    let k = k as usize;
                    s[k] += wp * (1.0 - f);
                    s[k + 1] += wp * f;
                    s[neg(k)] += wn * (1.0 - f);
                    s[neg(k + 1)] += wn * f;
                }
            }
        }
    }
    s
}

fn eval_poly(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `(⊛ or ⊠ over factors) ∗ sum_n p_n x^{∗n}` on the chosen side.
pub(crate) fn combine(
    side: Side,
    grid: GridSpec,
    factors: &[&HatMeasure],
    poly: Option<(&[f64], &HatMeasure)>,
) -> HatMeasure {
    let b = grid.bins();
    // Mass that escapes the auxiliary grid: atom0 on the check side, atom1 on the variable side.
    let escape = |x: &HatMeasure| match side {
        Side::Check => x.atom0(),
        Side::Var => x.atom1(),
    };
    // Mass sitting on the auxiliary origin: atom1 for check, atom0 for variable.
    let origin = |x: &HatMeasure| match side {
        Side::Check => x.atom1(),
        Side::Var => x.atom0(),
    };
    let factors: Vec<&HatMeasure> = factors.iter().copied().filter(|f| origin(f) != 1.0).collect();
    let unit_poly = poly.is_none_or(|(p, _)| p.len() == 2 && p[0] == 0.0 && p[1] == 1.0);
    if unit_poly {
        let single: Vec<&HatMeasure> = factors.iter().copied().chain(poly.map(|(_, x)| x)).collect();
        match single.as_slice() {
            [] => {
                return match side {
                    Side::Check => HatMeasure::delta_inf(grid),
                    Side::Var => HatMeasure::delta0(grid),
                }
            }
            [only] => return (*only).clone(),
            _ => {}
        }
    }
    let (stay, at_origin) = {
        let (mut s, mut o) = (1.0, 1.0);
        for f in &factors {
            s *= 1.0 - escape(f);
            o *= origin(f);
        }
        if let Some((p, x)) = poly {
            s *= eval_poly(p, 1.0 - escape(x));
            o *= eval_poly(p, origin(x));
        }
        (s, o)
    };
    let (escape_idx, origin_idx) = match side {
        Side::Check => (0, b + 1),
        Side::Var => (b + 1, 0),
    };
    let mut ext = vec![0.0; b + 2];
    ext[escape_idx] = 1.0 - stay;
    let interior_target = (stay - at_origin).max(0.0);
    let all_atomic = factors.iter().all(|f| f.is_atomic()) && poly.is_none_or(|(_, x)| x.is_atomic());
    if all_atomic || interior_target == 0.0 {
        ext[origin_idx] += at_origin;
        ext[escape_idx] += interior_target;
        return HatMeasure::from_ext_unchecked(grid, ext);
    }

    let fx: Vec<usize> = factors.iter().map(|f| extent(side, f)).collect();
    let (deg, ex) = poly.map_or((0, 0), |(p, x)| (p.len() - 1, extent(side, x)));
    let span = fx.iter().sum::<usize>() + deg * ex;
    let needed = match side {
        Side::Check => span + 1,
        Side::Var => 2 * span + 1,
    };
    let len = fast_len(needed.max(2));

    let mut spec = match poly {
        Some((p, x)) => {
            let xs = forward(signal(side, x, len));
            xs.iter()
                .map(|&z| {
                    let mut acc = Complex::new(p[deg], 0.0);
                    for n in (0..deg).rev() {
                        acc = acc * z + p[n];
                    }
                    acc
                })
                .collect()
        }
        None => vec![Complex::new(1.0, 0.0); len / 2 + 1],
    };
    for f in &factors {
        let fs = forward(signal(side, f, len));
        spec.iter_mut().zip(&fs).for_each(|(a, b)| *a *= b);
    }
    let v = inverse(spec, len);

    let t = tables(grid);
    // Check side: bin 0 holds only the analytic atom1 product, replaced exactly.
    // Variable side: bin 0 also collects cancelling LLRs, so it stays in the transform.
    let (mags, back, target) = match side {
        Side::Check => {
            let mut m: Vec<f64> = v[..span + 1].iter().map(|x| x.max(0.0)).collect();
            m[0] = 0.0;
            ext[origin_idx] += at_origin;
            (m, t.u_back(span + 1), interior_target)
        }
        Side::Var => {
            let mut m = Vec::with_capacity(span + 1);
            m.push(v[0].max(0.0));
            for k in 1..=span {
                m.push((v[k] + v[len - k]).max(0.0));
            }
            (m, t.alpha_back(span + 1), stay)
        }
    };
    let total: f64 = mags.iter().sum();
    if total > 0.0 {
        let scale = target / total;
        for (k, &w) in mags.iter().enumerate() {
            if w > 0.0 {
                let (lo, f) = back[k];
                let w = w * scale;
                ext[lo as usize] += w * (1.0 - f);
                ext[lo as usize + 1] += w * f;
            }
        }
    } else {
        ext[escape_idx] += target;
    }
    HatMeasure::from_ext_unchecked(grid, ext)
}

#[cfg(test)]
mod tests {
    use super::fast_len;

    #[test]
    fn fast_lengths() {
        assert_eq!(fast_len(2), 2);
        assert_eq!(fast_len(5), 6);
        assert_eq!(fast_len(17), 18);
        assert_eq!(fast_len(1025), 1152);
        for n in [3usize, 100, 4097, 99_999] {
            let l = fast_len(n);
            assert!(l >= n && l.is_multiple_of(2));
        }
    }
}
