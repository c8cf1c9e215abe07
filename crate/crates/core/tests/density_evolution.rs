use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::de::{self, DeStatus, StopRule};
use coupled_de::{DegreePolynomial, EnsembleKind, EnsembleSpec, GridSpec, HatMeasure};

fn ldgm_irregular() -> EnsembleSpec {
    EnsembleSpec::from_edge_perspective(
        DegreePolynomial::monomial(8),
        DegreePolynomial::new(vec![3.0, 6.0, 9.0, 12.0, 20.0]).unwrap(),
        EnsembleKind::Ldgm,
    )
    .unwrap()
}

#[test]
fn erasure_iterates_follow_the_scalar_recursion() {
    let grid = GridSpec::new(64).unwrap();
    let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
    for eps in [0.40, 0.42, 0.43] {
        let c = HatMeasure::erasure(grid, eps).unwrap();
        let stop = StopRule { max_iter: 200, tol_dh: 0.0, ..StopRule::default() };
        let t = de::de_trajectory(&e, &HatMeasure::delta0(grid), &c, stop).unwrap();
        let mut x = 1.0f64;
        for m in &t.path[1..] {
            x = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
            assert!(m.is_atomic());
            assert!((m.atom0() - x).abs() <= 1e-12);
        }
    }
}

#[test]
fn iterates_from_useless_start_improve() {
    let grid = GridSpec::new(512).unwrap();
    let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
    for h in [0.40, 0.44, 0.48] {
        let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(h).unwrap();
        let t = de::de_fixed_point(&e, &HatMeasure::delta0(grid), &c, StopRule::default()).unwrap();
        for w in t.iterates.windows(2) {
            assert!(w[1].entropy <= w[0].entropy + 1e-9, "h={h} at {}", w[1].iteration);
        }
    }
}

#[test]
fn ldgm_iterates_from_perfect_start_get_worse() {
    let grid = GridSpec::new(256).unwrap();
    let e = ldgm_irregular();
    let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(0.5).unwrap();
    let t = de::de_fixed_point(&e, &HatMeasure::delta_inf(grid), &c, StopRule::default()).unwrap();
    assert_eq!(t.status, DeStatus::Converged);
    for w in t.iterates.windows(2) {
        assert!(w[1].entropy >= w[0].entropy - 1e-9);
    }
}

#[test]
fn terminals_are_ordered_by_channel() {
    let grid = GridSpec::new(512).unwrap();
    let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
    let fam = ChannelFamily::new(ChannelKind::Bsc, grid);
    let terminals: Vec<HatMeasure> = [0.44, 0.46, 0.48]
        .iter()
        .map(|&h| {
            de::de_fixed_point(&e, &HatMeasure::delta0(grid), &fam.density(h).unwrap(), StopRule::default())
                .unwrap()
                .terminal
        })
        .collect();
    for w in terminals.windows(2) {
        assert!(w[1].is_degraded(&w[0], 1e-6).unwrap());
    }
}

#[test]
fn terminals_are_fixed_points() {
    let grid = GridSpec::new(512).unwrap();
    let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
    let stop = StopRule::default();
    for h in [0.44, 0.47] {
        let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(h).unwrap();
        let t = de::de_fixed_point(&e, &HatMeasure::delta0(grid), &c, stop).unwrap();
        assert_eq!(t.status, DeStatus::Converged);
        let again = de::de_step(&e, &t.terminal, &c).unwrap();
        assert!(again.entropy_distance(&t.terminal, stop.order).unwrap().value < 10.0 * stop.tol_dh);
    }
}

#[test]
fn below_and_above_the_bsc_threshold() {
    let grid = GridSpec::new(1024).unwrap();
    let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
    let fam = ChannelFamily::new(ChannelKind::Bsc, grid);
    let low =
        de::de_fixed_point(&e, &HatMeasure::delta0(grid), &fam.density(0.40).unwrap(), StopRule::default()).unwrap();
    assert!(low.terminal.entropy() < 1e-6);
    let mid =
        de::de_fixed_point(&e, &HatMeasure::delta0(grid), &fam.density(0.44).unwrap(), StopRule::default()).unwrap();
    assert!(mid.terminal.entropy() > 0.1);
}

#[test]
fn erasure_bp_threshold_matches_scalar_bisection() {
    let oracle = common::bec36_bp_threshold();
    let fam = ChannelFamily::new(ChannelKind::Bec, GridSpec::new(16).unwrap());
    let r = de::bp_threshold(&EnsembleSpec::regular_ldpc(3, 6).unwrap(), fam, 1e-4, StopRule::default()).unwrap();
    // the finite iteration budget stops just short of the threshold
    assert!((r.h_mid - oracle).abs() < 1e-3, "{} vs {oracle}", r.h_mid);
    assert!(r.h_mid <= oracle + 1e-4);
}

#[test]
fn stability_needs_degree_two_variables() {
    let grid = GridSpec::new(256).unwrap();
    let fam = ChannelFamily::new(ChannelKind::Bec, grid);
    let r = de::stability_threshold(&EnsembleSpec::regular_ldpc(3, 6).unwrap(), fam, 1e-4).unwrap();
    assert_eq!(r.h_mid, 1.0);
    let lam = DegreePolynomial::new(vec![0.0, 0.5, 0.5]).unwrap();
    let e = EnsembleSpec::from_edge_perspective(lam, DegreePolynomial::monomial(5), EnsembleKind::Ldpc).unwrap();
    let r = de::stability_threshold(&e, fam, 1e-4).unwrap();
    // B(BEC(eps)) = eps, so the threshold is 1 / (lambda'(0) rho'(1)) = 1 / (0.5 * 5)
    assert!((r.h_mid - 0.4).abs() < 1e-12);
}

mod common;
