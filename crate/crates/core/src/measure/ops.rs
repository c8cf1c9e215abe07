use super::spectral::{combine, Side};
use super::{direct, HatMeasure};
use crate::ensemble::DegreePolynomial;
use crate::error::{Error, Result};

/// How the node operators are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Pairwise enumeration of cells; O(B^2) per product.
    Direct,
    /// Transform-domain convolution; O(B log B) per product.
    Spectral,
}

impl Kernel {
    /// Pairwise for small grids, transforms otherwise.
    pub fn auto(bins: usize) -> Kernel {
        if bins <= 128 {
            Kernel::Direct
        } else {
            Kernel::Spectral
        }
    }
}

fn check_poly(p: &DegreePolynomial) -> Result<()> {
    p.check_distribution()
}

fn same(a: &HatMeasure, b: &HatMeasure) -> Result<()> {
    a.same_grid(b)
}

/// `x ⊛ y`.
pub fn var_conv(x: &HatMeasure, y: &HatMeasure) -> Result<HatMeasure> {
    var_conv_with(Kernel::auto(x.grid().bins()), x, y)
}

pub fn var_conv_with(kernel: Kernel, x: &HatMeasure, y: &HatMeasure) -> Result<HatMeasure> {
    same(x, y)?;
    Ok(match kernel {
        Kernel::Direct => direct::var_conv(x, y),
        Kernel::Spectral => combine(Side::Var, x.grid(), &[x, y], None),
    })
}

/// `x ⊠ y`.
pub fn check_conv(x: &HatMeasure, y: &HatMeasure) -> Result<HatMeasure> {
    check_conv_with(Kernel::auto(x.grid().bins()), x, y)
}

pub fn check_conv_with(kernel: Kernel, x: &HatMeasure, y: &HatMeasure) -> Result<HatMeasure> {
    same(x, y)?;
    Ok(match kernel {
        Kernel::Direct => direct::check_conv(x, y),
        Kernel::Spectral => combine(Side::Check, x.grid(), &[x, y], None),
    })
}

/// `sum_n p_n x^{⊛n}` with `x^{⊛0} = Δ₀`.
pub fn poly_var(p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    var_conv_poly(None, p, x)
}

/// `sum_n p_n x^{⊠n}` with `x^{⊠0} = Δ∞`.
pub fn poly_check(p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    check_conv_poly(None, p, x)
}

/// `c ⊛ p^⊛(x)` in one pass.
pub fn var_conv_poly(c: Option<&HatMeasure>, p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    poly_with(Kernel::auto(x.grid().bins()), Side::Var, c, p, x)
}

/// `c ⊠ p^⊠(x)` in one pass.
pub fn check_conv_poly(c: Option<&HatMeasure>, p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    poly_with(Kernel::auto(x.grid().bins()), Side::Check, c, p, x)
}

pub fn poly_var_with(kernel: Kernel, p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    poly_with(kernel, Side::Var, None, p, x)
}

pub fn poly_check_with(kernel: Kernel, p: &DegreePolynomial, x: &HatMeasure) -> Result<HatMeasure> {
    poly_with(kernel, Side::Check, None, p, x)
}

fn poly_with(
    kernel: Kernel,
    side: Side,
    c: Option<&HatMeasure>,
    p: &DegreePolynomial,
    x: &HatMeasure,
) -> Result<HatMeasure> {
    check_poly(p)?;
    if let Some(c) = c {
        same(c, x)?;
    }
    let grid = x.grid();
    match kernel {
        Kernel::Spectral => {
            let factors: Vec<&HatMeasure> = c.into_iter().collect();
            Ok(combine(side, grid, &factors, Some((p.coeffs(), x))))
        }
        Kernel::Direct => {
            let op = |a: &HatMeasure, b: &HatMeasure| match side {
                Side::Var => direct::var_conv(a, b),
                Side::Check => direct::check_conv(a, b),
            };
            let identity = match side {
                Side::Var => HatMeasure::delta0(grid),
                Side::Check => HatMeasure::delta_inf(grid),
            };
            let mut terms = Vec::new();
            let mut power = identity;
            for (n, &pn) in p.coeffs().iter().enumerate() {
                if n > 0 {
                    power = op(&power, x);
                }
                if pn > 0.0 {
                    terms.push((pn, power.clone()));
                }
            }
            let refs: Vec<(f64, &HatMeasure)> = terms.iter().map(|(w, m)| (*w, m)).collect();
            let sum = mix(&refs)?;
            Ok(match c {
                Some(c) => op(c, &sum),
                None => sum,
            })
        }
    }
}

/// Convex combination `sum w_i x_i`; weights must be nonnegative and sum to 1.
pub fn mix(parts: &[(f64, &HatMeasure)]) -> Result<HatMeasure> {
    let first = parts.first().ok_or_else(|| Error::Measure("empty mixture".into()))?.1;
    let grid = first.grid();
    let mut ext = vec![0.0; grid.bins() + 2];
    let mut total_w = 0.0;
    for &(w, x) in parts {
        same(first, x)?;
        if w < 0.0 {
            return Err(Error::Measure(format!("negative mixture weight {w}")));
        }
        total_w += w;
        for (o, v) in ext.iter_mut().zip(x.ext()) {
            *o += w * v;
        }
    }
    if (total_w - 1.0).abs() > 1e-9 {
        return Err(Error::Measure(format!("mixture weights sum to {total_w}")));
    }
    HatMeasure::from_ext(grid, ext)
}

/// Uniform average, summed in mirrored pairs so that reversing `parts` gives a
/// bitwise identical result.
pub fn average(parts: &[&HatMeasure]) -> Result<HatMeasure> {
    let first = *parts.first().ok_or_else(|| Error::Measure("empty average".into()))?;
    for x in parts {
        same(first, x)?;
    }
    let n = parts.len();
    let scale = 1.0 / n as f64;
    let mut ext = vec![0.0; first.grid().bins() + 2];
    for (idx, o) in ext.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n / 2 {
            acc += parts[j].ext()[idx] + parts[n - 1 - j].ext()[idx];
        }
        if n % 2 == 1 {
            acc += parts[n / 2].ext()[idx];
        }
        *o = acc * scale;
    }
    HatMeasure::from_ext(first.grid(), ext)
}
