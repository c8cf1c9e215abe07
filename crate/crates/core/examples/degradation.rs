//! Degradation order: channel families, DE monotonicity and the hinge test.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::de::{self, StopRule};
use coupled_de::{EnsembleSpec, GridSpec, HatMeasure};

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let grid = GridSpec::new(bins)?;

    // within a family, higher entropy is degraded
    for kind in [ChannelKind::Bec, ChannelKind::Bsc, ChannelKind::Bawgn] {
        let fam = ChannelFamily::new(kind, grid);
        let (lo, hi) = (fam.density(0.3)?, fam.density(0.5)?);
        println!(
            "{kind:?}: c(0.5) ⪰ c(0.3): {}, reverse: {}, margin {:+.2e}",
            hi.is_degraded(&lo, 1e-12)?,
            lo.is_degraded(&hi, 1e-12)?,
            hi.degradation_margin(&lo)?
        );
    }

    // across families at one entropy the order can fail both ways
    let bsc = ChannelFamily::new(ChannelKind::Bsc, grid).density(0.5)?;
    let bec = ChannelFamily::new(ChannelKind::Bec, grid).density(0.5)?;
    println!("BSC(H=.5) vs BEC(H=.5): {} / {}", bsc.is_degraded(&bec, 1e-12)?, bec.is_degraded(&bsc, 1e-12)?);

    // DE from Δ0 moves down the order at every step
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(0.44)?;
    let trace = de::de_trajectory(&e, &HatMeasure::delta0(grid), &c, StopRule { max_iter: 30, ..StopRule::default() })?;
    let mut worst = f64::NEG_INFINITY;
    for p in trace.path.windows(2) {
        worst = worst.max(p[0].degradation_margin(&p[1])?);
    }
    // the residue is quantization and shrinks with the bin count
    println!("30 DE steps from Δ0 at h = 0.44: worst order violation {worst:.1e}");
    Ok(())
}
