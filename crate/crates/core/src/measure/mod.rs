//! Quantized symmetric measures on the magnitude axis `m = |tanh(alpha/2)|`.
//!
//! A measure holds `B` interior cells centred at `(j + 0.5)/B` plus exact atoms at
//! `m = 0` (the useless channel) and `m = 1` (the perfect channel). Internally the
//! masses live in one "extended" vector of length `B + 2`: index 0 is the atom at 0,
//! indices `1..=B` the interior cells, index `B + 1` the atom at 1.

mod direct;
mod ops;
mod spectral;
pub(crate) mod tables;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use ops::{
    average, check_conv, check_conv_poly, check_conv_with, mix, poly_check, poly_check_with, poly_var, poly_var_with,
    var_conv, var_conv_poly, var_conv_with, Kernel,
};
use tables::tables;

/// Largest magnitude ever fed to `atanh`.
pub const MAX_INTERIOR_MAGNITUDE: f64 = 1.0 - 1.0 / (1u64 << 40) as f64;

pub const DEFAULT_BINS: usize = 4096;
pub const DEFAULT_MOMENT_ORDER: usize = 200;
/// Environment variable overriding the default bin count.
pub const BINS_ENV: &str = "COUPLED_DE_BINS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    bins: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let bins = std::env::var(BINS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|&b: &usize| b >= 2)
            .unwrap_or(DEFAULT_BINS);
        Self { bins }
    }
}

impl GridSpec {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Parameter(format!("grid needs at least 2 bins, got {bins}")));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.bins as f64
    }

    /// Magnitude of extended-support index `i`.
    pub fn support_point(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else if i > self.bins {
            1.0
        } else {
            self.center(i - 1)
        }
    }

    /// Mean-preserving split of a point mass at `m`: returns the lower extended
    /// index and the fraction of mass that goes to the next index up.
    pub fn locate(&self, m: f64) -> (usize, f64) {
        let b = self.bins as f64;
        if !(m > 0.0) {
            return (0, 0.0);
        }
        if m >= 1.0 {
            return (self.bins, 1.0);
        }
        let t = m * b - 0.5;
        if t < 0.0 {
            (0, 2.0 * m * b)
        } else if t >= b - 1.0 {
            (self.bins, ((t - (b - 1.0)) * 2.0).min(1.0))
        } else {
            let j = t.floor();
            (j as usize + 1, t - j)
        }
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.bins != other.bins {
            return Err(Error::GridMismatch(self.bins, other.bins));
        }
        Ok(())
    }
}

/// `gamma_k = 1 / (ln 2 * 2k (2k - 1))`, the weights of the moment series of `H`.
pub fn gamma(k: usize) -> f64 {
    let k = k as f64;
    1.0 / (std::f64::consts::LN_2 * 2.0 * k * (2.0 * k - 1.0))
}

/// Upper bound on `sum_{k > order} gamma_k`.
pub fn gamma_tail_bound(order: usize) -> f64 {
    1.0 / (2.0 * order as f64 * std::f64::consts::LN_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyDistance {
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HatMeasure {
    grid: GridSpec,
    ext: Vec<f64>,
}

impl HatMeasure {
    pub fn delta0(grid: GridSpec) -> Self {
        let mut ext = vec![0.0; grid.bins + 2];
        ext[0] = 1.0;
        Self { grid, ext }
    }

    pub fn delta_inf(grid: GridSpec) -> Self {
        let mut ext = vec![0.0; grid.bins + 2];
        ext[grid.bins + 1] = 1.0;
        Self { grid, ext }
    }

    /// Atom-only measure: `atom0` at `m = 0`, the rest at `m = 1`.
    pub fn erasure(grid: GridSpec, atom0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&atom0) {
            return Err(Error::Parameter(format!("erasure mass {atom0} outside [0,1]")));
        }
        let mut ext = vec![0.0; grid.bins + 2];
        ext[0] = atom0;
        ext[grid.bins + 1] = 1.0 - atom0;
        Ok(Self { grid, ext })
    }

    pub fn from_parts(grid: GridSpec, atom0: f64, interior: Vec<f64>, atom1: f64) -> Result<Self> {
        if interior.len() != grid.bins {
            return Err(Error::Measure(format!("{} interior masses for {} bins", interior.len(), grid.bins)));
        }
        let mut ext = Vec::with_capacity(grid.bins + 2);
        ext.push(atom0);
        ext.extend(interior);
        ext.push(atom1);
        Self::from_ext(grid, ext)
    }

    /// Deposits weighted point masses `(m, w)` with the mean-preserving split.
    pub fn from_points(grid: GridSpec, points: &[(f64, f64)]) -> Result<Self> {
        let mut ext = vec![0.0; grid.bins + 2];
        for &(m, w) in points {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::Measure(format!("magnitude {m} outside [0,1]")));
            }
            let (lo, f) = grid.locate(m);
            ext[lo] += w * (1.0 - f);
            ext[lo + 1] += w * f;
        }
        Self::from_ext(grid, ext)
    }

    pub(crate) fn from_ext(grid: GridSpec, mut ext: Vec<f64>) -> Result<Self> {
        if let Some(w) = ext.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Measure(format!("mass {w} is negative or not finite")));
        }
        let total: f64 = ext.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Measure(format!("total mass {total} is not 1")));
        }
        if total != 1.0 {
            ext.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self { grid, ext })
    }

    /// Trusted constructor for kernel output that is already normalized.
    pub(crate) fn from_ext_unchecked(grid: GridSpec, ext: Vec<f64>) -> Self {
        debug_assert_eq!(ext.len(), grid.bins + 2);
        Self { grid, ext }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn atom0(&self) -> f64 {
        self.ext[0]
    }

    pub fn atom1(&self) -> f64 {
        self.ext[self.grid.bins + 1]
    }

    pub fn interior(&self) -> &[f64] {
        &self.ext[1..=self.grid.bins]
    }

    pub(crate) fn ext(&self) -> &[f64] {
        &self.ext
    }

    pub fn total_mass(&self) -> f64 {
        self.ext.iter().sum()
    }

    pub fn is_atomic(&self) -> bool {
        self.interior().iter().all(|&w| w == 0.0)
    }

    pub fn same_grid(&self, other: &HatMeasure) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    fn dot(&self, table: &[f64]) -> f64 {
        self.ext.iter().zip(table).map(|(w, v)| w * v).sum()
    }

    /// Entropy in bits, `sum mass * h2((1 - m)/2)`.
    pub fn entropy(&self) -> f64 {
        self.dot(&tables(self.grid).entropy)
    }

    pub fn bhattacharyya(&self) -> f64 {
        self.dot(&tables(self.grid).bhattacharyya)
    }

    /// Bit error probability of a hard decision, `sum mass * (1 - m)/2`.
    pub fn error_prob(&self) -> f64 {
        let t = tables(self.grid);
        self.ext.iter().zip(&t.support).map(|(w, m)| w * 0.5 * (1.0 - m)).sum()
    }

    pub fn moment(&self, k: usize) -> Result<f64> {
        if k < 1 {
            return Err(Error::Parameter("moment order must be >= 1".into()));
        }
        let t = tables(self.grid);
        Ok(self.ext.iter().zip(&t.support).map(|(w, m)| w * m.powi(2 * k as i32)).sum())
    }

    /// `[M_1, ..., M_order]`.
    pub fn moments(&self, order: usize) -> Vec<f64> {
        weighted_moments(self.grid, self.ext.iter().copied(), order)
    }

    /// Truncated entropy distance and the analytic bound on the omitted tail.
    pub fn entropy_distance(&self, other: &HatMeasure, order: usize) -> Result<EntropyDistance> {
        self.same_grid(other)?;
        let diff = weighted_moments(self.grid, self.ext.iter().zip(&other.ext).map(|(a, b)| a - b), order);
        let value = diff.iter().enumerate().map(|(k, d)| gamma(k + 1) * d.abs()).sum();
        Ok(EntropyDistance { value, tail_bound: gamma_tail_bound(order) })
    }

    /// `E[(M - t)^+]` at every support point `t`, in increasing order of `t`.
    pub fn hinge_profile(&self) -> Vec<f64> {
        let t = tables(self.grid);
        let n = self.ext.len();
        let mut out = vec![0.0; n];
        let (mut s0, mut s1) = (0.0, 0.0);
        for i in (0..n).rev() {
            out[i] = (s1 - t.support[i] * s0).max(0.0);
            s0 += self.ext[i];
            s1 += self.ext[i] * t.support[i];
        }
        out
    }

    /// Largest violation of `self ⪰ other` over the hinge family; `<= 0` means degraded.
    pub fn degradation_margin(&self, other: &HatMeasure) -> Result<f64> {
        self.same_grid(other)?;
        let a = self.hinge_profile();
        let b = other.hinge_profile();
        Ok(a.iter().zip(&b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max))
    }

    /// True when `self ⪰ other` (self is the worse channel) up to `slack`.
    pub fn is_degraded(&self, other: &HatMeasure, slack: f64) -> Result<bool> {
        Ok(self.degradation_margin(other)? <= slack)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m_center", "mass"])?;
        w.write_record(["atom0", &format!("{:e}", self.atom0())])?;
        w.write_record(["atom1", &format!("{:e}", self.atom1())])?;
        for (j, mass) in self.interior().iter().enumerate() {
            w.write_record([format!("{}", self.grid.center(j)), format!("{mass:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let (mut atom0, mut atom1) = (None, None);
        let mut interior = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let key = rec.get(0).unwrap_or_default().trim();
            let mass: f64 = rec
                .get(1)
                .unwrap_or_default()
                .trim()
                .parse()
                .map_err(|e| Error::Measure(format!("bad mass in row {key}: {e}")))?;
            match key {
                "atom0" => atom0 = Some(mass),
                "atom1" => atom1 = Some(mass),
                _ => interior.push(mass),
            }
        }
        let grid = GridSpec::new(interior.len())?;
        let (a0, a1) = atom0.zip(atom1).ok_or_else(|| Error::Measure("missing atom rows".into()))?;
        Self::from_parts(grid, a0, interior, a1)
    }
}

fn weighted_moments(grid: GridSpec, weights: impl Iterator<Item = f64>, order: usize) -> Vec<f64> {
    let t = tables(grid);
    let mut acc = vec![0.0; order];
    for (w, &m) in weights.zip(&t.support) {
        if w == 0.0 || m == 0.0 {
            continue;
        }
        let u = m * m;
        let mut p = w * u;
        for a in acc.iter_mut() {
            *a += p;
            p *= u;
            if p.abs() < 1e-300 {
                break;
            }
        }
    }
    acc
}
