use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::GridSpec;

/// Auxiliary grid points per `1/B` on the `u = -ln m` axis.
pub(crate) const U_POINTS_PER_BIN: f64 = 2.0;
/// Auxiliary grid points per `1/B` on the LLR axis.
pub(crate) const ALPHA_POINTS_PER_BIN: f64 = 1.0;

/// Per-grid lookup data shared by every measure on that grid.
pub(crate) struct GridTables {
    pub support: Vec<f64>,
    pub entropy: Vec<f64>,
    pub bhattacharyya: Vec<f64>,
    pub u_step: f64,
    pub alpha_step: f64,
    /// interior cell -> (lower u index, fraction to the upper one)
    pub u_in: Vec<(u32, f64)>,
    /// interior cell -> (lower |alpha| index, fraction to the upper one)
    pub alpha_in: Vec<(u32, f64)>,
    u_back: Mutex<Arc<Vec<(u32, f64)>>>,
    alpha_back: Mutex<Arc<Vec<(u32, f64)>>>,
    grid: GridSpec,
}

pub(crate) fn binary_entropy_of_magnitude(m: f64) -> f64 {
    let p = 0.5 * (1.0 - m);
    let q = 0.5 * (1.0 + m);
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if q > 0.0 {
        h -= q * q.log2();
    }
    h
}

fn split_point(pos: f64) -> (u32, f64) {
    let k = pos.floor();
    (k as u32, pos - k)
}

impl GridTables {
    fn build(grid: GridSpec) -> Self {
        let b = grid.bins();
        let support: Vec<f64> = (0..b + 2).map(|i| grid.support_point(i)).collect();
        let entropy = support.iter().map(|&m| binary_entropy_of_magnitude(m)).collect();
        let bhattacharyya = support.iter().map(|&m| (1.0 - m * m).max(0.0).sqrt()).collect();
        let u_step = 1.0 / (U_POINTS_PER_BIN * b as f64);
        let alpha_step = 1.0 / (ALPHA_POINTS_PER_BIN * b as f64);
        let u_in = (0..b).map(|j| split_point(-grid.center(j).ln() / u_step)).collect();
        let alpha_in = (0..b)
            .map(|j| {
                let m = grid.center(j).min(super::MAX_INTERIOR_MAGNITUDE);
                split_point(((1.0 + m) / (1.0 - m)).ln() / alpha_step)
            })
            .collect();
        Self {
            support,
            entropy,
            bhattacharyya,
            u_step,
            alpha_step,
            u_in,
            alpha_in,
            u_back: Mutex::new(Arc::new(Vec::new())),
            alpha_back: Mutex::new(Arc::new(Vec::new())),
            grid,
        }
    }

    fn grow(slot: &Mutex<Arc<Vec<(u32, f64)>>>, len: usize, f: impl Fn(usize) -> (u32, f64)) -> Arc<Vec<(u32, f64)>> {
        let mut guard = slot.lock().unwrap();
        if guard.len() < len {
            let target = len.max(2 * guard.len());
            *guard = Arc::new((0..target).map(f).collect());
        }
        guard.clone()
    }

    /// u index -> deposit target on the extended support.
    pub fn u_back(&self, len: usize) -> Arc<Vec<(u32, f64)>> {
        let (g, du) = (self.grid, self.u_step);
        Self::grow(&self.u_back, len, |k| {
            let (lo, f) = g.locate((-(k as f64) * du).exp());
            (lo as u32, f)
        })
    }

    /// |alpha| index -> deposit target on the extended support.
    pub fn alpha_back(&self, len: usize) -> Arc<Vec<(u32, f64)>> {
        let (g, da) = (self.grid, self.alpha_step);
        Self::grow(&self.alpha_back, len, |k| {
            let (lo, f) = g.locate((0.5 * k as f64 * da).tanh());
            (lo as u32, f)
        })
    }
}

pub(crate) fn tables(grid: GridSpec) -> Arc<GridTables> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GridTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(grid.bins()).or_insert_with(|| Arc::new(GridTables::build(grid))).clone()
}
