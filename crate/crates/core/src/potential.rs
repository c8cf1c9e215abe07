//! Single-system potential, its directional derivative, energy gaps and the
//! potential threshold.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelFamily, ChannelKind};
use crate::de::{self, Basin, DeStatus, StopRule, ABSORB_ENTROPY, BASIN_DISTANCE};
use crate::ensemble::{DegreePolynomial, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::measure::{self, gamma, gamma_tail_bound, HatMeasure};
use crate::threshold::{bisect, ThresholdReport};

/// Moment order used for derivative evaluations.
pub const DERIVATIVE_ORDER: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialTerm {
    pub label: String,
    pub weight: f64,
    pub entropy: f64,
}

impl PotentialTerm {
    fn new(label: &str, weight: f64, entropy: f64) -> Self {
        Self { label: label.into(), weight, entropy }
    }

    pub fn contribution(&self) -> f64 {
        self.weight * self.entropy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialReport {
    pub value: f64,
    pub terms: Vec<PotentialTerm>,
    /// Duality-rule defect on `(x, rho(x))`, scaled by `L'(1)`.
    pub grid_residual: f64,
}

impl PotentialReport {
    fn from_terms(terms: Vec<PotentialTerm>, grid_residual: f64) -> Self {
        let value = terms.iter().map(PotentialTerm::contribution).sum();
        Self { value, terms, grid_residual }
    }
}

fn duality_defect(a: &HatMeasure, b: &HatMeasure) -> Result<f64> {
    let v = measure::var_conv(a, b)?;
    let c = measure::check_conv(a, b)?;
    Ok((v.entropy() + c.entropy() - a.entropy() - b.entropy()).abs())
}

/// `U_s(x; c)` for either ensemble kind.
pub fn potential(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<PotentialReport> {
    match e.kind {
        EnsembleKind::Ldpc => potential_ldpc(e, x, c),
        EnsembleKind::Ldgm => potential_ldgm(e, x, c),
    }
}

/// `(L'/R') H(R(x)) + L' H(rho(x)) - L' H(x ⊠ rho(x)) - H(c ⊛ L(rho(x)))`, products in ⊠ and ⊛.
pub fn potential_ldpc(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<PotentialReport> {
    if e.kind != EnsembleKind::Ldpc {
        return Err(Error::Precondition("LDPC potential requested for an LDGM ensemble".into()));
    }
    let (terms, r) = ldpc_terms(e, x, c)?;
    let lp = e.constants().l_d1_1;
    Ok(PotentialReport::from_terms(terms, lp * duality_defect(x, &r)?))
}

fn ldpc_terms(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<(Vec<PotentialTerm>, HatMeasure)> {
    x.same_grid(c)?;
    let k = e.constants();
    let r = measure::poly_check(&e.rho, x)?;
    let big_r = measure::poly_check(&e.r_node, x)?;
    let xr = measure::check_conv(x, &r)?;
    let out = measure::var_conv_poly(Some(c), &e.l_node, &r)?;
    let terms = vec![
        PotentialTerm::new("H(R(x))", k.l_d1_1 / k.r_d1_1, big_r.entropy()),
        PotentialTerm::new("H(rho(x))", k.l_d1_1, r.entropy()),
        PotentialTerm::new("H(x*rho(x))", -k.l_d1_1, xr.entropy()),
        PotentialTerm::new("H(c+L(rho(x)))", -1.0, out.entropy()),
    ];
    Ok((terms, r))
}

/// The LDGM potential, five terms including `-(L'/R') H(c)`.
pub fn potential_ldgm(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<PotentialReport> {
    if e.kind != EnsembleKind::Ldgm {
        return Err(Error::Precondition("LDGM potential requested for an LDPC ensemble".into()));
    }
    let (terms, s) = ldgm_terms(e, x, c)?;
    let lp = e.constants().l_d1_1;
    Ok(PotentialReport::from_terms(terms, lp * duality_defect(x, &s)?))
}

fn ldgm_terms(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<(Vec<PotentialTerm>, HatMeasure)> {
    x.same_grid(c)?;
    let k = e.constants();
    let s = measure::check_conv_poly(Some(c), &e.rho, x)?;
    let cr = measure::check_conv_poly(Some(c), &e.r_node, x)?;
    let xs = measure::check_conv(x, &s)?;
    let out = measure::poly_var(&e.l_node, &s)?;
    let terms = vec![
        PotentialTerm::new("H(c*R(x))", k.l_d1_1 / k.r_d1_1, cr.entropy()),
        PotentialTerm::new("H(x*c*rho(x))", -k.l_d1_1, xs.entropy()),
        PotentialTerm::new("H(c*rho(x))", k.l_d1_1, s.entropy()),
        PotentialTerm::new("H(L(c*rho(x)))", -1.0, out.entropy()),
        PotentialTerm::new("H(c)", -k.l_d1_1 / k.r_d1_1, c.entropy()),
    ];
    Ok((terms, s))
}

/// Potential value without the residual estimate.
pub fn potential_value(e: &EnsembleSpec, x: &HatMeasure, c: &HatMeasure) -> Result<f64> {
    let (terms, _) = match e.kind {
        EnsembleKind::Ldpc => ldpc_terms(e, x, c)?,
        EnsembleKind::Ldgm => ldgm_terms(e, x, c)?,
    };
    Ok(terms.iter().map(PotentialTerm::contribution).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Derivative {
    pub value: f64,
    /// Bound on the part of the moment series past `order`.
    pub tail_bound: f64,
    pub order: usize,
}

/// Moments of `x - y` for k = 1..=order and the bound `sum |x_j - y_j| m_j^(2(order+1))`
/// on every later one.
pub(crate) fn moment_difference(x: &HatMeasure, y: &HatMeasure, order: usize) -> Result<(Vec<f64>, f64)> {
    x.same_grid(y)?;
    let a = x.moments(order);
    let b = y.moments(order);
    let grid = x.grid();
    let mut tail = (x.atom1() - y.atom1()).abs();
    for (j, (p, q)) in x.interior().iter().zip(y.interior()).enumerate() {
        tail += (p - q).abs() * grid.center(j).powi(2 * (order as i32 + 1));
    }
    Ok((a.iter().zip(&b).map(|(p, q)| p - q).collect(), tail))
}

/// `d_x U_s(x; c)[y+ - y-]` from the closed form `L'(1) H([T(x) - x] ⊠ rho'(x) ⊠ y)`
/// (LDGM: an extra `c ⊠`), evaluated through the moment series where ⊠ is exact.
pub fn directional_derivative(
    e: &EnsembleSpec,
    x: &HatMeasure,
    c: &HatMeasure,
    y_plus: &HatMeasure,
    y_minus: &HatMeasure,
    order: usize,
) -> Result<Derivative> {
    let t = de::de_step(e, x, c)?;
    derivative_with_step(e, x, &t, c, y_plus, y_minus, order)
}

fn derivative_with_step(
    e: &EnsembleSpec,
    x: &HatMeasure,
    t: &HatMeasure,
    c: &HatMeasure,
    y_plus: &HatMeasure,
    y_minus: &HatMeasure,
    order: usize,
) -> Result<Derivative> {
    let k = e.constants();
    let (dt, tail_t) = moment_difference(t, x, order)?;
    let (dy, _) = moment_difference(y_plus, y_minus, order)?;
    let mx = x.moments(order);
    let mc = match e.kind {
        EnsembleKind::Ldpc => None,
        EnsembleKind::Ldgm => Some(c.moments(order)),
    };
    let mut sum = 0.0;
    for i in 0..order {
        let factor = mc.as_ref().map_or(1.0, |m| m[i]);
        sum += gamma(i + 1) * dt[i] * factor * e.rho.eval_d1(mx[i]) * dy[i];
    }
    Ok(Derivative {
        value: -k.l_d1_1 * sum,
        tail_bound: k.l_d1_1 * k.rho_d1_1 * tail_t * gamma_tail_bound(order),
        order,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub max_abs: f64,
    pub values: Vec<f64>,
    pub tail_bound: f64,
}

/// Largest `|d_x U_s(x;c)[y]|` over the given directions `(y+, y-)`.
pub fn stationarity_residual(
    e: &EnsembleSpec,
    x: &HatMeasure,
    c: &HatMeasure,
    directions: &[(HatMeasure, HatMeasure)],
) -> Result<StationarityReport> {
    let t = de::de_step(e, x, c)?;
    let mut values = Vec::with_capacity(directions.len());
    let mut tail_bound: f64 = 0.0;
    for (yp, ym) in directions {
        let d = derivative_with_step(e, x, &t, c, yp, ym, DERIVATIVE_ORDER)?;
        values.push(d.value);
        tail_bound = tail_bound.max(d.tail_bound);
    }
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(StationarityReport { max_abs, values, tail_bound })
}

/// `H(x) + (dv - 1 - dv/dc) H(x^dc) - (dv - 1) H(x^(dc-1))` with ⊠ powers.
pub fn area_functional(dv: usize, dc: usize, x: &HatMeasure) -> Result<f64> {
    if dv < 2 || dc < 2 {
        return Err(Error::Parameter(format!("area functional needs dv, dc >= 2, got ({dv}, {dc})")));
    }
    let below = measure::poly_check(&DegreePolynomial::monomial(dc - 1), x)?;
    let full = measure::check_conv(&below, x)?;
    let (dv, dcf) = (dv as f64, dc as f64);
    Ok(x.entropy() + (dv - 1.0 - dv / dcf) * full.entropy() - (dv - 1.0) * below.entropy())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateStrategy {
    /// Probe entropies per family, placed at `j / (probes + 1)`.
    pub probes: usize,
    pub probe_families: Vec<ChannelKind>,
    pub mixtures: Vec<f64>,
    pub stop: StopRule,
}

impl Default for CandidateStrategy {
    fn default() -> Self {
        Self {
            probes: 32,
            probe_families: vec![ChannelKind::Bsc, ChannelKind::Bawgn],
            mixtures: vec![0.25, 0.5, 0.75],
            stop: StopRule::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifiedBy {
    /// Comparison with the forward fixed point in the degradation order.
    Dominance,
    DensityEvolution,
    /// Potential at or above the running minimum, so membership cannot change the result.
    NotNeeded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<f64>,
    pub basin: Option<Basin>,
    pub classified_by: ClassifiedBy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyGapReport {
    /// `None` encodes an empty complement of the basin (gap `+inf`).
    pub gap: Option<f64>,
    pub infinite: bool,
    pub argmin: Option<String>,
    pub candidates: usize,
    pub outside_basin: usize,
    pub in_basin: usize,
    pub unknown: usize,
    /// `U_s(f0; c)` for LDGM, zero for LDPC.
    pub reference: f64,
    pub unverified: bool,
    pub bound: &'static str,
    pub forward_status: DeStatus,
    pub records: Vec<CandidateRecord>,
}

impl EnergyGapReport {
    pub fn positive(&self) -> bool {
        self.gap.is_none_or(|g| g > 0.0)
    }
}

/// Lowest potential over the candidate set outside the basin of `Δ∞` (LDPC) or
/// `f0(c)` (LDGM), minus `U_s(f0)` for LDGM. An upper bound on the true infimum.
pub fn energy_gap(e: &EnsembleSpec, c: &HatMeasure, strategy: &CandidateStrategy) -> Result<EnergyGapReport> {
    let grid = c.grid();
    let stop = strategy.stop;
    let target = match e.kind {
        EnsembleKind::Ldpc => HatMeasure::delta_inf(grid),
        EnsembleKind::Ldgm => de::minimal_fixed_point(e, c, stop)?,
    };
    let reference = match e.kind {
        EnsembleKind::Ldpc => 0.0,
        EnsembleKind::Ldgm => potential_value(e, &target, c)?,
    };
    let perfect = e.kind == EnsembleKind::Ldpc;
    let fwd_stop = StopRule { absorb_below: if perfect { Some(ABSORB_ENTROPY) } else { stop.absorb_below }, ..stop };
    let forward = de::de_trajectory(e, &HatMeasure::delta0(grid), c, fwd_stop)?;
    let forward_basin = match forward.status {
        DeStatus::Absorbed => Basin::Yes,
        DeStatus::MaxIterReached => Basin::Unknown,
        DeStatus::Converged => {
            let close = if perfect {
                forward.terminal.entropy() < ABSORB_ENTROPY
            } else {
                forward.terminal.entropy_distance(&target, stop.order)?.value < BASIN_DISTANCE
            };
            if close {
                Basin::Yes
            } else {
                Basin::No
            }
        }
    };

    let mut probes = Vec::new();
    for &kind in &strategy.probe_families {
        let fam = ChannelFamily::new(kind, grid);
        for j in 1..=strategy.probes {
            let h = j as f64 / (strategy.probes + 1) as f64;
            probes.push((format!("{kind:?} probe h={h:.4}").to_lowercase(), fam.density(h)?));
        }
    }
    let path = &forward.path;
    let mixtures = path.len().saturating_sub(1) * strategy.mixtures.len();
    let total = path.len() + mixtures + probes.len();

    let mut records = Vec::with_capacity(total);
    let mut best: Option<(f64, String)> = None;
    let mut unknown = 0;

    if forward_basin == Basin::Yes {
        // Every measure is dominated by Δ0, so every DE run ends where the forward one does.
        for (l, _) in path.iter().enumerate() {
            records.push(dominated(format!("iterate {l}"), Basin::Yes));
        }
        for l in 1..path.len() {
            for t in &strategy.mixtures {
                records.push(dominated(format!("mixture {t} of iterates {} and {l}", l - 1), Basin::Yes));
            }
        }
        for (label, _) in probes {
            records.push(dominated(label, Basin::Yes));
        }
        return Ok(EnergyGapReport {
            gap: None,
            infinite: true,
            argmin: None,
            candidates: total,
            outside_basin: 0,
            in_basin: total,
            unknown: 0,
            reference,
            unverified: false,
            bound: "upper",
            forward_status: forward.status,
            records,
        });
    }

    let trajectory_basin = forward_basin;
    let consider = |label: String,
                    u: f64,
                    basin: Basin,
                    by: ClassifiedBy,
                    best: &mut Option<(f64, String)>,
                    records: &mut Vec<CandidateRecord>| {
        if basin == Basin::No && best.as_ref().is_none_or(|(b, _)| u < *b) {
            *best = Some((u, label.clone()));
        }
        records.push(CandidateRecord { label, potential: Some(u), basin: Some(basin), classified_by: by });
    };
    // Iterates and their mixtures all dominate the forward fixed point.
    for (l, x) in path.iter().enumerate() {
        let u = potential_value(e, x, c)?;
        consider(format!("iterate {l}"), u, trajectory_basin, ClassifiedBy::Dominance, &mut best, &mut records);
    }
    for l in 1..path.len() {
        for &t in &strategy.mixtures {
            let m = measure::mix(&[(1.0 - t, &path[l - 1]), (t, &path[l])])?;
            let u = potential_value(e, &m, c)?;
            consider(
                format!("mixture {t} of iterates {} and {l}", l - 1),
                u,
                trajectory_basin,
                ClassifiedBy::Dominance,
                &mut best,
                &mut records,
            );
        }
    }
    if trajectory_basin == Basin::Unknown {
        unknown += records.len();
    }
    for (label, p) in probes {
        let u = potential_value(e, &p, c)?;
        if forward_basin == Basin::No && p.is_degraded(&forward.terminal, 0.0)? {
            consider(label, u, Basin::No, ClassifiedBy::Dominance, &mut best, &mut records);
        } else if best.as_ref().is_none_or(|(b, _)| u < *b) {
            let basin = de::in_basin(e, &p, c, &target, stop)?.basin;
            if basin == Basin::Unknown {
                unknown += 1;
            }
            consider(label, u, basin, ClassifiedBy::DensityEvolution, &mut best, &mut records);
        } else {
            records.push(CandidateRecord {
                label,
                potential: Some(u),
                basin: None,
                classified_by: ClassifiedBy::NotNeeded,
            });
        }
    }
    let outside = records.iter().filter(|r| r.basin == Some(Basin::No)).count();
    let inside = records.iter().filter(|r| r.basin == Some(Basin::Yes)).count();
    let (gap, argmin) = match best {
        Some((u, label)) => (Some(u - reference), Some(label)),
        None => (None, None),
    };
    Ok(EnergyGapReport {
        infinite: gap.is_none(),
        gap,
        argmin,
        candidates: total,
        outside_basin: outside,
        in_basin: inside,
        unknown,
        reference,
        unverified: unknown > 0,
        bound: "upper",
        forward_status: forward.status,
        records,
    })
}

fn dominated(label: String, basin: Basin) -> CandidateRecord {
    CandidateRecord { label, potential: None, basin: Some(basin), classified_by: ClassifiedBy::Dominance }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialEstimator {
    ForwardFpSign,
    EnergyGapSign,
}

impl PotentialEstimator {
    pub fn name(self) -> &'static str {
        match self {
            PotentialEstimator::ForwardFpSign => "forward-fp-sign",
            PotentialEstimator::EnergyGapSign => "energy-gap-sign",
        }
    }

    fn other(self) -> Self {
        match self {
            PotentialEstimator::ForwardFpSign => PotentialEstimator::EnergyGapSign,
            PotentialEstimator::EnergyGapSign => PotentialEstimator::ForwardFpSign,
        }
    }
}

impl std::str::FromStr for PotentialEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward-fp-sign" => Ok(PotentialEstimator::ForwardFpSign),
            "energy-gap-sign" => Ok(PotentialEstimator::EnergyGapSign),
            other => Err(Error::Config(format!("unknown potential estimator '{other}'"))),
        }
    }
}

/// Sign of `U_s` at the forward fixed point; absorbed runs count as zero.
pub fn forward_fp_potential(e: &EnsembleSpec, c: &HatMeasure, stop: StopRule) -> Result<(f64, de::DeTrace)> {
    let stop = StopRule { absorb_below: Some(ABSORB_ENTROPY), ..stop };
    let trace = de::de_fixed_point(e, &HatMeasure::delta0(c.grid()), c, stop)?;
    let u = if trace.status == DeStatus::Absorbed || trace.terminal.entropy() < ABSORB_ENTROPY {
        0.0
    } else {
        potential_value(e, &trace.terminal, c)?
    };
    Ok((u, trace))
}

fn estimate(
    e: &EnsembleSpec,
    family: ChannelFamily,
    estimator: PotentialEstimator,
    lo: f64,
    hi: f64,
    tol_h: f64,
    strategy: &CandidateStrategy,
) -> Result<ThresholdReport> {
    let mut de_iterations = 0;
    let mut notes = Vec::new();
    let mut report = match estimator {
        PotentialEstimator::ForwardFpSign => bisect(lo, hi, tol_h, |h| {
            let c = family.density(h)?;
            let (u, trace) = forward_fp_potential(e, &c, strategy.stop)?;
            de_iterations += trace.iterations();
            if trace.status == DeStatus::MaxIterReached {
                notes.push(format!("forward DE hit max-iter at h={h:.6}"));
            }
            Ok(u >= 0.0)
        })?,
        PotentialEstimator::EnergyGapSign => bisect(lo, hi, tol_h, |h| {
            let c = family.density(h)?;
            let gap = energy_gap(e, &c, strategy)?;
            if gap.unverified {
                notes.push(format!("energy gap unverified at h={h:.6}"));
            }
            Ok(gap.positive())
        })?,
    };
    report.kind = "potential".into();
    report.estimator = estimator.name().into();
    report.de_iterations = de_iterations;
    report.flags.extend(notes);
    Ok(report)
}

/// Potential threshold by bisection on `[0, 1]`, optionally cross-checked by the other estimator.
pub fn potential_threshold(
    e: &EnsembleSpec,
    family: ChannelFamily,
    estimator: PotentialEstimator,
    tol_h: f64,
    cross_check: bool,
    strategy: &CandidateStrategy,
) -> Result<ThresholdReport> {
    if e.kind != EnsembleKind::Ldpc {
        return Err(Error::Precondition("the potential threshold is defined for LDPC ensembles".into()));
    }
    let mut report = estimate(e, family, estimator, 0.0, 1.0, tol_h, strategy)?;
    if cross_check {
        let other = estimate(e, family, estimator.other(), 0.0, 1.0, tol_h, strategy)?;
        let gap = (other.h_mid - report.h_mid).abs();
        if gap > 2.0 * tol_h {
            report.flags.push(format!(
                "estimators disagree: {} gives {:.6}, {} gives {:.6}",
                report.estimator, report.h_mid, other.estimator, other.h_mid
            ));
        }
        report.cross_check = Some(Box::new(other));
    }
    Ok(report)
}

/// Lowest channel entropy in `[lo, hi]` at which DE from `Δ0` no longer returns to `f0`.
pub fn ldgm_second_fixed_point(
    e: &EnsembleSpec,
    family: ChannelFamily,
    lo: f64,
    hi: f64,
    tol_h: f64,
    stop: StopRule,
) -> Result<ThresholdReport> {
    if e.kind != EnsembleKind::Ldgm {
        return Err(Error::Precondition("second fixed point search is for LDGM ensembles".into()));
    }
    let mut de_iterations = 0;
    let mut notes = Vec::new();
    let mut report = bisect(lo, hi, tol_h, |h| {
        let c = family.density(h)?;
        let f0 = de::minimal_fixed_point(e, &c, stop)?;
        let out = de::in_basin(e, &HatMeasure::delta0(family.grid), &c, &f0, stop)?;
        de_iterations += out.trace.iterations();
        if out.basin == Basin::Unknown {
            notes.push(format!("max-iter reached at h={h:.6}; counted as a separate fixed point"));
        }
        Ok(out.basin == Basin::Yes)
    })?;
    report.kind = "ldgm-second-fixed-point".into();
    report.estimator = "de-from-delta0-vs-minimal".into();
    report.de_iterations = de_iterations;
    report.flags.extend(notes);
    Ok(report)
}

/// Entropy in `[lo, hi]` where the LDGM energy gap turns from positive to negative.
pub fn ldgm_gap_sign_change(
    e: &EnsembleSpec,
    family: ChannelFamily,
    lo: f64,
    hi: f64,
    tol_h: f64,
    strategy: &CandidateStrategy,
) -> Result<ThresholdReport> {
    if e.kind != EnsembleKind::Ldgm {
        return Err(Error::Precondition("gap sign search here is for LDGM ensembles".into()));
    }
    let mut report = estimate(e, family, PotentialEstimator::EnergyGapSign, lo, hi, tol_h, strategy)?;
    report.kind = "ldgm-gap-sign".into();
    Ok(report)
}

/// `U_s(probe(h~); c)` over the probe entropies.
pub fn potential_curve(
    e: &EnsembleSpec,
    c: &HatMeasure,
    probe: ChannelFamily,
    probe_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    probe_grid.iter().map(|&h| Ok((h, potential_value(e, &probe.density(h)?, c)?))).collect()
}

/// Fixed notation with six significant digits.
pub fn six_significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.5}", v);
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{:.*}", decimals, v)
}

pub fn write_curve_csv<W: Write>(rows: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h_tilde", "U_s"])?;
    for &(h, u) in rows {
        w.write_record([six_significant(h), six_significant(u)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridSpec;

    fn bec(grid: GridSpec, e: f64) -> HatMeasure {
        HatMeasure::erasure(grid, e).unwrap()
    }

    /// The four LDPC terms with erasure arithmetic.
    fn scalar_ldpc(e: &EnsembleSpec, x: f64, eps: f64) -> f64 {
        let k = e.constants();
        let r = 1.0 - e.rho.eval(1.0 - x);
        let big_r = 1.0 - e.r_node.eval(1.0 - x);
        let xr = 1.0 - (1.0 - x) * (1.0 - r);
        k.l_d1_1 / k.r_d1_1 * big_r + k.l_d1_1 * r - k.l_d1_1 * xr - eps * e.l_node.eval(r)
    }

    #[test]
    fn ldpc_erasure_potential_matches_scalar() {
        let grid = GridSpec::new(32).unwrap();
        let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
        for (x, eps) in [(0.1, 0.4), (0.3, 0.45), (0.7, 0.5), (1.0, 1.0)] {
            let r = potential(&e, &bec(grid, x), &bec(grid, eps)).unwrap();
            assert!((r.value - scalar_ldpc(&e, x, eps)).abs() < 1e-14);
            let sum: f64 = r.terms.iter().map(|t| t.contribution()).sum();
            assert_eq!(sum, r.value);
        }
        let c = HatMeasure::from_points(grid, &[(0.6, 1.0)]).unwrap();
        assert_eq!(potential(&e, &HatMeasure::delta_inf(grid), &c).unwrap().value, 0.0);
    }

    #[test]
    fn ldgm_erasure_potential_matches_scalar() {
        let grid = GridSpec::new(32).unwrap();
        let e = EnsembleSpec::from_edge_perspective(
            DegreePolynomial::monomial(8),
            DegreePolynomial::new(vec![3.0, 6.0, 9.0, 12.0, 20.0]).unwrap(),
            EnsembleKind::Ldgm,
        )
        .unwrap();
        let k = e.constants();
        for (x, eps) in [(0.1, 0.4), (0.5, 0.6), (0.9, 0.2)] {
            let s = 1.0 - (1.0 - eps) * e.rho.eval(1.0 - x);
            let big_r = 1.0 - (1.0 - eps) * e.r_node.eval(1.0 - x);
            let xs = 1.0 - (1.0 - x) * (1.0 - s);
            let want = k.l_d1_1 / k.r_d1_1 * (big_r - eps) - k.l_d1_1 * xs + k.l_d1_1 * s - e.l_node.eval(s);
            let got = potential(&e, &bec(grid, x), &bec(grid, eps)).unwrap().value;
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        let d = HatMeasure::delta_inf(grid);
        assert_eq!(potential(&e, &d, &d).unwrap().value, 0.0);
        // a perfect channel does not zero the potential at other x
        assert!(potential(&e, &bec(grid, 0.5), &d).unwrap().value.abs() > 1e-3);
    }

    #[test]
    fn derivative_matches_difference_quotient_on_erasures() {
        let grid = GridSpec::new(16).unwrap();
        let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
        let c = bec(grid, 0.45);
        let x = bec(grid, 0.3);
        let z = bec(grid, 0.6);
        let d = directional_derivative(&e, &x, &c, &z, &x, DERIVATIVE_ORDER).unwrap();
        let delta = 1e-3;
        let moved = measure::mix(&[(1.0 - delta, &x), (delta, &z)]).unwrap();
        let fd = (potential_value(&e, &moved, &c).unwrap() - potential_value(&e, &x, &c).unwrap()) / delta;
        assert!((d.value - fd).abs() < 20.0 * delta + d.tail_bound, "{} vs {fd}", d.value);
    }

    #[test]
    fn area_at_endpoints() {
        let grid = GridSpec::new(32).unwrap();
        assert_eq!(area_functional(3, 6, &HatMeasure::delta_inf(grid)).unwrap(), 0.0);
        assert!((area_functional(3, 6, &HatMeasure::delta0(grid)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn six_digit_formatting() {
        assert_eq!(six_significant(0.0), "0.00000");
        assert_eq!(six_significant(0.123456789), "0.123457");
        assert_eq!(six_significant(-12.3456789), "-12.3457");
        assert_eq!(six_significant(0.5), "0.500000");
    }
}
