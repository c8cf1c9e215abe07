#![allow(dead_code)]

use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::{GridSpec, HatMeasure};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 20261016;

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

/// A random symmetric measure: point mixtures, smooth bumps, or a channel density,
/// each with random endpoint atoms mixed in.
pub fn random_measure(grid: GridSpec, rng: &mut ChaCha8Rng) -> HatMeasure {
    let shape = rng.gen_range(0..3);
    let base = match shape {
        0 => {
            let k = rng.gen_range(1..=5);
            let pts: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen::<f64>(), rng.gen::<f64>() + 0.05)).collect();
            let total: f64 = pts.iter().map(|p| p.1).sum();
            let pts: Vec<(f64, f64)> = pts.iter().map(|&(m, w)| (m, w / total)).collect();
            HatMeasure::from_points(grid, &pts).unwrap()
        }
        1 => {
            let n = grid.bins();
            let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=3))
                .map(|_| (rng.gen(), 0.02 + 0.2 * rng.gen::<f64>(), rng.gen::<f64>() + 0.1))
                .collect();
            let mut w: Vec<f64> = (0..n)
                .map(|j| {
                    let m = grid.center(j);
                    bumps.iter().map(|&(c, s, a)| a * (-(m - c).powi(2) / (2.0 * s * s)).exp()).sum()
                })
                .collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            HatMeasure::from_parts(grid, 0.0, w, 0.0).unwrap()
        }
        _ => {
            let kind = if rng.gen() { ChannelKind::Bsc } else { ChannelKind::Bawgn };
            ChannelFamily::new(kind, grid).density(0.05 + 0.9 * rng.gen::<f64>()).unwrap()
        }
    };
    let a0 = 0.2 * rng.gen::<f64>() * (rng.gen::<f64>() < 0.5) as u8 as f64;
    let a1 = 0.2 * rng.gen::<f64>() * (rng.gen::<f64>() < 0.5) as u8 as f64;
    let scale = 1.0 - a0 - a1;
    let interior: Vec<f64> = base.interior().iter().map(|v| v * scale).collect();
    HatMeasure::from_parts(grid, base.atom0() * scale + a0, interior, base.atom1() * scale + a1).unwrap()
}

/// Textbook scalar potential of (3,6) on the BEC in the variable-to-check erasure
/// `x`: `x g(x) - G(x) - F(g(x))` with `g(x) = 1-(1-x)^5`, `f = eps t^2`.
pub fn bec36_potential(x: f64, eps: f64) -> f64 {
    let g = 1.0 - (1.0 - x).powi(5);
    let big_g = x - (1.0 - (1.0 - x).powi(6)) / 6.0;
    x * g - big_g - eps * g.powi(3) / 3.0
}

/// Erasure probability where the scalar potential first touches zero away from the origin.
pub fn bec36_potential_threshold() -> f64 {
    let min_u =
        |eps: f64| (1..=20_000).map(|k| bec36_potential(k as f64 / 20_000.0, eps)).fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.3, 0.7);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if min_u(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// BP threshold of the scalar recursion `x <- eps (1-(1-x)^5)^2`.
pub fn bec36_bp_threshold() -> f64 {
    let decodes = |eps: f64| {
        let mut x = eps;
        for _ in 0..200_000 {
            x = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
            if x < 1e-12 {
                return true;
            }
        }
        false
    };
    let (mut lo, mut hi) = (0.3, 0.5);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if decodes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
