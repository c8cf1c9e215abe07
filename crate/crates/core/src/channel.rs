//! BEC, BSC and BAWGN channel families indexed by entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{GridSpec, HatMeasure};

pub const DEFAULT_ENTROPY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bec,
    Bsc,
    Bawgn,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bec" => Ok(ChannelKind::Bec),
            "bsc" => Ok(ChannelKind::Bsc),
            "bawgn" | "bawgnc" | "awgn" => Ok(ChannelKind::Bawgn),
            other => Err(Error::Config(format!("unknown channel family '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelFamily {
    pub kind: ChannelKind,
    pub grid: GridSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamSolve {
    pub param: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn gauss_pdf(a: f64, mean: f64, var: f64) -> f64 {
    let d = a - mean;
    (-(d * d) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [0.1834346424956498, 0.525_532_409_916_329, 0.7966664774136267, 0.9602898564975363];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

fn gauss_legendre(f: &impl Fn(f64) -> [f64; 2], a: f64, b: f64) -> [f64; 2] {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = [0.0; 2];
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        for v in [f(mid - half * x), f(mid + half * x)] {
            acc[0] += w * v[0];
            acc[1] += w * v[1];
        }
    }
    [acc[0] * half, acc[1] * half]
}

/// Folded Gaussian LLR density integrated against the two hat weights of each
/// interval between consecutive support points. Pieces are cut at the support
/// points and every quarter standard deviation around the mean.
fn bawgn_density(grid: GridSpec, sigma: f64) -> Result<HatMeasure> {
    let mean = 2.0 / (sigma * sigma);
    let var = 2.0 * mean;
    let sd = var.sqrt();
    let b = grid.bins();
    let to_alpha = |m: f64| {
        let m = m.min(crate::measure::MAX_INTERIOR_MAGNITUDE);
        ((1.0 + m) / (1.0 - m)).ln()
    };
    let a_max = mean + 40.0 * sd;
    let mut cuts: Vec<f64> =
        (-160..=160).map(|k| mean + k as f64 * 0.25 * sd).filter(|&a| a > 0.0 && a < a_max).collect();
    cuts.push(a_max);
    let mut next_cut = 0;
    let mut ext = vec![0.0; b + 2];
    let mut placed = 0.0;
    for i in 0..=b {
        let (s_lo, s_hi) = (grid.support_point(i), grid.support_point(i + 1));
        let lo = to_alpha(s_lo);
        if lo >= a_max {
            break;
        }
        let hi = if i == b { a_max } else { to_alpha(s_hi).min(a_max) };
        let width = s_hi - s_lo;
        let f = |a: f64| {
            let dens = gauss_pdf(a, mean, var) + gauss_pdf(-a, mean, var);
            let m = (0.5 * a).tanh();
            let up = ((m - s_lo) / width).clamp(0.0, 1.0);
            [dens * (1.0 - up), dens * up]
        };
        let mut a = lo;
        let mut w = [0.0; 2];
        while next_cut < cuts.len() && cuts[next_cut] <= a {
            next_cut += 1;
        }
        loop {
            let stop = if next_cut < cuts.len() && cuts[next_cut] < hi { cuts[next_cut] } else { hi };
            let part = gauss_legendre(&f, a, stop);
            w[0] += part[0];
            w[1] += part[1];
            a = stop;
            if a >= hi {
                break;
            }
            next_cut += 1;
        }
        ext[i] += w[0].max(0.0);
        ext[i + 1] += w[1].max(0.0);
        placed += w[0].max(0.0) + w[1].max(0.0);
    }
    // Whatever the quadrature did not place lies beyond the clamp.
    ext[b + 1] += (1.0 - placed).max(0.0);
    let total: f64 = ext.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Numeric(format!("BAWGN quantization lost mass: total {total} at sigma {sigma}")));
    }
    HatMeasure::from_ext(grid, ext)
}

impl ChannelFamily {
    pub fn new(kind: ChannelKind, grid: GridSpec) -> Self {
        Self { kind, grid }
    }

    /// Density at the family's native parameter: erasure probability, crossover
    /// probability or noise standard deviation.
    pub fn density_from_param(&self, p: f64) -> Result<HatMeasure> {
        let out_of_range = || Error::Parameter(format!("{:?} parameter {p} out of range", self.kind));
        match self.kind {
            ChannelKind::Bec => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(out_of_range());
                }
                HatMeasure::erasure(self.grid, p)
            }
            ChannelKind::Bsc => {
                if !(0.0..=0.5).contains(&p) {
                    return Err(out_of_range());
                }
                HatMeasure::from_points(self.grid, &[(1.0 - 2.0 * p, 1.0)])
            }
            ChannelKind::Bawgn => {
                if p.is_nan() || p < 0.0 {
                    return Err(out_of_range());
                }
                if p == 0.0 {
                    Ok(HatMeasure::delta_inf(self.grid))
                } else if p.is_infinite() {
                    Ok(HatMeasure::delta0(self.grid))
                } else {
                    bawgn_density(self.grid, p)
                }
            }
        }
    }

    /// Native parameter whose density has entropy `h`, by bisection.
    pub fn param_from_entropy(&self, h: f64, tol: f64) -> Result<ParamSolve> {
        if !(0.0..=1.0).contains(&h) {
            return Err(Error::Parameter(format!("entropy {h} outside [0,1]")));
        }
        let entropy_at = |p: f64| self.density_from_param(p).map(|d| d.entropy());
        let (mut lo, mut hi, log_scale) = match self.kind {
            ChannelKind::Bec => return Ok(ParamSolve { param: h, iterations: 0, residual: 0.0 }),
            ChannelKind::Bsc => (0.0, 0.5, false),
            ChannelKind::Bawgn => {
                if h == 0.0 {
                    return Ok(ParamSolve { param: 0.0, iterations: 0, residual: 0.0 });
                }
                if h == 1.0 {
                    return Ok(ParamSolve { param: f64::INFINITY, iterations: 0, residual: 0.0 });
                }
                (1e-2, 1e3, true)
            }
        };
        if log_scale && (entropy_at(lo)? > h || entropy_at(hi)? < h) {
            return Err(Error::Numeric(format!("entropy {h} not bracketed by sigma in [{lo}, {hi}]")));
        }
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mid = if log_scale { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            let hm = entropy_at(mid)?;
            let residual = (hm - h).abs();
            if residual < tol || iterations >= 200 || mid == lo || mid == hi {
                if residual >= tol {
                    return Err(Error::Numeric(format!("entropy bisection stalled at residual {residual}")));
                }
                return Ok(ParamSolve { param: mid, iterations, residual });
            }
            if hm < h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Density with entropy `h` (bisection tolerance 1e-8).
    pub fn density(&self, h: f64) -> Result<HatMeasure> {
        let p = self.param_from_entropy(h, DEFAULT_ENTROPY_TOL)?;
        self.density_from_param(p.param)
    }
}

/// Channel selection as it appears in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub family: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

impl ChannelSpec {
    pub fn density(&self, grid: GridSpec) -> Result<HatMeasure> {
        let fam = ChannelFamily::new(self.family, grid);
        match (self.h, self.param) {
            (Some(h), None) => fam.density(h),
            (None, Some(p)) => fam.density_from_param(p),
            _ => Err(Error::Config("channel needs exactly one of 'h' or 'param'".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(kind: ChannelKind, b: usize) -> ChannelFamily {
        ChannelFamily::new(kind, GridSpec::new(b).unwrap())
    }

    #[test]
    fn endpoints() {
        let g = GridSpec::new(64).unwrap();
        assert_eq!(fam(ChannelKind::Bec, 64).density_from_param(0.0).unwrap(), HatMeasure::delta_inf(g));
        assert_eq!(fam(ChannelKind::Bsc, 64).density_from_param(0.5).unwrap(), HatMeasure::delta0(g));
        assert!(fam(ChannelKind::Bsc, 64).density_from_param(0.6).is_err());
        assert!(fam(ChannelKind::Bec, 64).density_from_param(-0.1).is_err());
        let sharp = fam(ChannelKind::Bawgn, 1024).density_from_param(0.05).unwrap();
        assert!(sharp.entropy() < 1e-12 && sharp.atom1() > 0.999);
    }

    #[test]
    fn bsc_inversion() {
        let f = fam(ChannelKind::Bsc, 4096);
        let s = f.param_from_entropy(0.416, 1e-8).unwrap();
        assert!((s.param - 0.0840).abs() < 5e-5, "p = {}", s.param);
        assert_eq!(fam(ChannelKind::Bec, 16).param_from_entropy(0.43, 1e-8).unwrap().param, 0.43);
    }

    #[test]
    fn bawgn_round_trip() {
        let f = fam(ChannelKind::Bawgn, 1024);
        let s = f.param_from_entropy(0.5, 1e-8).unwrap();
        let d = f.density_from_param(s.param).unwrap();
        assert!((d.entropy() - 0.5).abs() < 1e-8);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        // sigma ~ 0.98 for capacity 1/2
        assert!((s.param - 0.979).abs() < 0.01, "sigma = {}", s.param);
    }

    #[test]
    fn spec_parsing() {
        let s: ChannelSpec = serde_json::from_str(r#"{"family":"bsc","h":0.3}"#).unwrap();
        assert!((s.density(GridSpec::new(256).unwrap()).unwrap().entropy() - 0.3).abs() < 1e-8);
        let bad: ChannelSpec = serde_json::from_str(r#"{"family":"bec"}"#).unwrap();
        assert!(bad.density(GridSpec::new(8).unwrap()).is_err());
    }
}
