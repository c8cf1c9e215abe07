//! One PASS/FAIL line per acceptance criterion.
//! `ACCEPTANCE_ONLY=4,7` restricts the run to the listed criteria.
//! Failures are reported, not fatal, unless `ACCEPTANCE_STRICT` is set.

mod common;

use std::time::Instant;

use common::{random_measure, rng};
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::coupled::{self, ChainProfile, CoupledSpec, CoupledSystem, SweepOptions, SweepReport};
use coupled_de::de::{self, DeStatus, StopRule, ABSORB_ENTROPY};
use coupled_de::measure;
use coupled_de::potential::{self, CandidateStrategy, PotentialEstimator};
use coupled_de::{DegreePolynomial, EnsembleKind, EnsembleSpec, GridSpec, HatMeasure};

type Check = coupled_de::Result<(bool, String)>;

const FULL_BINS: usize = 4096;
const CHAIN_BINS: usize = 1024;

fn ldpc36() -> EnsembleSpec {
    EnsembleSpec::regular_ldpc(3, 6).unwrap()
}

fn ldgm_irregular() -> EnsembleSpec {
    EnsembleSpec::from_edge_perspective(
        DegreePolynomial::monomial(8),
        DegreePolynomial::new(vec![3.0, 6.0, 9.0, 12.0, 20.0]).unwrap(),
        EnsembleKind::Ldgm,
    )
    .unwrap()
}

fn grid(bins: usize) -> GridSpec {
    GridSpec::new(bins).unwrap()
}

fn bsc(bins: usize) -> ChannelFamily {
    ChannelFamily::new(ChannelKind::Bsc, grid(bins))
}

fn erasure_oracle() -> Check {
    let g = grid(FULL_BINS);
    let e = ldpc36();
    let mut worst = 0.0f64;
    for eps in [0.40, 0.42, 0.43] {
        let c = HatMeasure::erasure(g, eps)?;
        let stop = StopRule { max_iter: 200, tol_dh: 0.0, ..StopRule::default() };
        let t = de::de_trajectory(&e, &HatMeasure::delta0(g), &c, stop)?;
        let mut x = 1.0f64;
        for m in &t.path[1..] {
            x = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
            worst = worst.max((m.atom0() - x).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |atom0 - scalar| = {worst:.1e} over 3 x 200 iterations")))
}

fn random_pairs() -> Vec<(HatMeasure, HatMeasure)> {
    let g = grid(FULL_BINS);
    let mut r = rng(100);
    (0..100).map(|_| (random_measure(g, &mut r), random_measure(g, &mut r))).collect()
}

fn duality(pairs: &[(HatMeasure, HatMeasure)]) -> Check {
    let mut worst = 0.0f64;
    for (x, y) in pairs {
        let v = measure::var_conv(x, y)?;
        let c = measure::check_conv(x, y)?;
        worst = worst.max((v.entropy() + c.entropy() - x.entropy() - y.entropy()).abs());
    }
    Ok((worst <= 1e-4, format!("max duality residual {worst:.2e} over {} pairs", pairs.len())))
}

fn moments(pairs: &[(HatMeasure, HatMeasure)]) -> Check {
    let mut worst = (0.0f64, 0usize);
    for (x, y) in pairs {
        let c = measure::check_conv(x, y)?;
        for k in 1..=10 {
            let res = (c.moment(k)? - x.moment(k)? * y.moment(k)?).abs();
            if res > worst.0 {
                worst = (res, k);
            }
        }
    }
    Ok((worst.0 <= 1e-6, format!("max |M_k(x⊠y) - M_k(x)M_k(y)| = {:.2e} (at k={})", worst.0, worst.1)))
}

fn bp_thresholds() -> Check {
    let stop = StopRule::default();
    let e = ldpc36();
    let t = Instant::now();
    let b = de::bp_threshold(&e, bsc(FULL_BINS), 1e-3, stop)?;
    let t_bsc = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let oracle = common::bec36_bp_threshold();
    let r = de::bp_threshold(&e, ChannelFamily::new(ChannelKind::Bec, grid(FULL_BINS)), 1e-4, stop)?;
    let t_bec = t.elapsed().as_secs_f64();
    let ok = (b.h_mid - 0.416).abs() <= 0.003
        && (r.h_mid - 0.4294).abs() <= 0.0005
        && (r.h_mid - oracle).abs() <= 0.0005
        && t_bsc < 300.0
        && t_bec < 300.0;
    Ok((ok, format!("BSC {:.4} ({t_bsc:.0}s), BEC {:.4} vs scalar {oracle:.4} ({t_bec:.0}s)", b.h_mid, r.h_mid)))
}

fn potential_thresholds() -> Check {
    let e = ldpc36();
    let strategy = CandidateStrategy::default();
    let tol = 1e-3;
    let b =
        potential::potential_threshold(&e, bsc(FULL_BINS), PotentialEstimator::ForwardFpSign, tol, true, &strategy)?;
    let b_other = b.cross_check.as_ref().map_or(f64::NAN, |c| c.h_mid);
    let oracle = common::bec36_potential_threshold();
    let bec = ChannelFamily::new(ChannelKind::Bec, grid(FULL_BINS));
    let r = potential::potential_threshold(&e, bec, PotentialEstimator::ForwardFpSign, 1e-4, true, &strategy)?;
    let r_other = r.cross_check.as_ref().map_or(f64::NAN, |c| c.h_mid);
    let ok = (b.h_mid - 0.469).abs() <= 0.004
        && (b_other - b.h_mid).abs() <= 2.0 * tol
        && (r.h_mid - 0.4881).abs() <= 0.001
        && (r.h_mid - oracle).abs() <= 0.001
        && (r_other - r.h_mid).abs() <= 2.0 * 1e-4;
    Ok((
        ok,
        format!(
            "BSC forward {:.4} / gap {:.4}; BEC forward {:.4} / gap {:.4}, scalar {oracle:.4}",
            b.h_mid, b_other, r.h_mid, r_other
        ),
    ))
}

fn ldgm_anchors() -> Check {
    let e = ldgm_irregular();
    let fam = bsc(CHAIN_BINS);
    let stop = StopRule::default();
    let emergence = potential::ldgm_second_fixed_point(&e, fam, 0.37, 0.67, 1e-3, stop)?;
    let gap = potential::ldgm_gap_sign_change(&e, fam, 0.37, 0.67, 1e-3, &CandidateStrategy::default())?;
    let mut probes = Vec::new();
    for h in [0.62, 0.66] {
        let c = fam.density(h)?;
        let f0 = de::minimal_fixed_point(&e, &c, stop)?;
        let fwd = de::de_fixed_point(&e, &HatMeasure::delta0(fam.grid), &c, stop)?.terminal;
        let g = potential::energy_gap(&e, &c, &CandidateStrategy::default())?;
        probes.push(format!(
            "h={h}: H(fwd)={:.3} H(f0)={:.3} gap={}",
            fwd.entropy(),
            f0.entropy(),
            g.gap.map_or("+inf".into(), |v| format!("{v:+.4}"))
        ));
    }
    let ok = (emergence.h_mid - 0.4529).abs() <= 0.005 && (gap.h_mid - 0.5902).abs() <= 0.006;
    Ok((
        ok,
        format!(
            "second fixed point from Δ0 at {:.4} (want 0.4529), gap sign change at {:.4} (want 0.5902); {}",
            emergence.h_mid,
            gap.h_mid,
            probes.join("; ")
        ),
    ))
}

fn chain_stop() -> StopRule {
    StopRule { tol_dh: 1e-9, max_iter: 20_000, absorb_below: Some(ABSORB_ENTROPY), ..StopRule::default() }
}

fn saturation(sweep: &mut Option<SweepReport>) -> Check {
    let e = ldpc36();
    let fam = bsc(CHAIN_BINS);
    let mut cells = Vec::new();
    let mut slowest = 0.0f64;
    for h in [0.46, 0.48] {
        let t = Instant::now();
        let spec = CoupledSpec::new(e.clone(), 32, 3)?;
        let len = spec.len();
        let sys = CoupledSystem::new(spec, fam.density(h)?, chain_stop())?;
        let tr = sys.fixed_point(&ChainProfile::delta0(fam.grid, len), chain_stop(), None)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        cells.push((h, tr.status, tr.terminal.max_entropy()));
    }
    let report = coupled::saturation_sweep(
        &e,
        fam,
        &[16],
        &[1, 2, 3, 4],
        &[0.40, 0.42, 0.44, 0.46, 0.48],
        &SweepOptions::default(),
    )?;
    slowest = report.cells.iter().fold(slowest, |m, c| m.max(c.seconds));
    let th: Vec<f64> = report.thresholds.iter().map(|t| t.empirical.unwrap_or(0.0)).collect();
    let nondecreasing = th.windows(2).all(|w| w[1] >= w[0]);
    let ok = cells[0].1 == DeStatus::Absorbed
        && cells[0].2 < 1e-6
        && cells[1].1 != DeStatus::Absorbed
        && nondecreasing
        && th[1] > 0.416
        && slowest < 600.0;
    let detail = format!(
        "N=32 w=3: h=0.46 {:?} maxH {:.1e}, h=0.48 {:?} maxH {:.3}; N=16 thresholds by w {:?}; slowest cell {slowest:.0}s",
        cells[0].1, cells[0].2, cells[1].1, cells[1].2, th
    );
    *sweep = Some(report);
    Ok((ok, detail))
}

fn lemma_checks() -> Check {
    let e = ldpc36();
    let fam = bsc(FULL_BINS);
    let fp_stop = StopRule { tol_dh: 1e-12, max_iter: 5000, ..StopRule::default() };
    let mut r = rng(101);
    let mut stat = 0.0f64;
    let mut area = 0.0f64;
    for h in [0.44, 0.46, 0.48] {
        let c = fam.density(h)?;
        let fp = de::de_fixed_point(&e, &HatMeasure::delta0(fam.grid), &c, fp_stop)?.terminal;
        let dirs: Vec<_> =
            (0..10).map(|_| (random_measure(fam.grid, &mut r), random_measure(fam.grid, &mut r))).collect();
        stat = stat.max(potential::stationarity_residual(&e, &fp, &c, &dirs)?.max_abs);
        area = area.max((potential::area_functional(3, 6, &fp)? + potential::potential_value(&e, &fp, &c)?).abs());
    }

    let cfam = bsc(CHAIN_BINS);
    let spec = CoupledSpec::new(e, 16, 3)?.modified();
    let len = spec.len();
    let stop = StopRule { max_iter: 20_000, ..StopRule::default() };
    let sys = CoupledSystem::new(spec, cfam.density(0.48)?, stop)?;
    let fp = sys.fixed_point(&ChainProfile::delta0(cfam.grid, len), stop, None)?;
    let ordered = fp.terminal.spatially_ordered(1e-8)?;
    let shift = sys.shift_bound(&fp.terminal, 1e-4)?;
    let ok = stat <= 1e-5 && ordered && shift.holds && area <= 1e-4;
    Ok((
        ok,
        format!(
            "stationarity {stat:.1e}; modified chain ordered {ordered}; shift {:+.5} <= {:+.5}; |A + U_s| {area:.1e}",
            shift.lhs, shift.rhs
        ),
    ))
}

fn k_constant(sweep: &Option<SweepReport>) -> Check {
    let k = ldpc36().constants().k;
    let Some(report) = sweep else {
        return Ok((false, format!("K = {k}; no sweep available (criterion 7 not run)")));
    };
    let emitted = report.width_bounds.len() == 5;
    let consistent = report.width_bounds.iter().all(|b| b.consistent);
    let widths: Vec<String> = report
        .width_bounds
        .iter()
        .map(|b| format!("{}: {}", b.h, b.sufficient_w.map_or("none".into(), |w| w.to_string())))
        .collect();
    Ok((
        k == 435.0 && report.k == 435.0 && emitted && consistent,
        format!("K = {k}; sufficient w by h [{}]", widths.join(", ")),
    ))
}

fn ldgm_saturation() -> Check {
    let e = ldgm_irregular();
    let fam = bsc(FULL_BINS);
    let c = fam.density(0.56)?;
    let stop = StopRule::default();
    let f0 = de::minimal_fixed_point(&e, &c, stop)?;
    let spec = CoupledSpec::new(e, 16, 4)?;
    let len = spec.len();
    let sys = CoupledSystem::new(spec, c, stop)?;
    let fp = sys.fixed_point(&ChainProfile::delta0(fam.grid, len), StopRule { max_iter: 20_000, ..stop }, None)?;
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for x in &fp.terminal.positions {
        worst = worst.max(f0.degradation_margin(x)?);
        all &= f0.is_degraded(x, 1e-8)?;
    }
    Ok((all, format!("{:?} after {} iterations, worst margin {worst:.1e}", fp.status, fp.iterations())))
}

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let wanted = |id: u32| only.as_ref().is_none_or(|v| v.contains(&id));
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Check| {
        if !wanted(id) {
            return;
        }
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {id} ({name}): {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    };
    let pairs = if wanted(2) || wanted(3) { random_pairs() } else { Vec::new() };
    let mut sweep = None;
    report(1, "erasure oracle", &mut erasure_oracle);
    report(2, "duality rule", &mut || duality(&pairs));
    report(3, "moment multiplicativity", &mut || moments(&pairs));
    report(4, "BP thresholds", &mut bp_thresholds);
    report(5, "potential thresholds", &mut potential_thresholds);
    report(6, "LDGM fixed-point anchors", &mut ldgm_anchors);
    report(7, "threshold saturation", &mut || saturation(&mut sweep));
    report(8, "fixed-point lemma checks", &mut lemma_checks);
    report(9, "K constant and width bound", &mut || k_constant(&sweep));
    report(10, "LDGM saturation", &mut ldgm_saturation);
    println!("failed criteria: {failures}");
    if failures > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
