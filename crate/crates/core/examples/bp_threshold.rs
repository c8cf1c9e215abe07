//! BP and stability thresholds of the (3,6) ensemble, with the BEC recursion as a cross-check.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::de::{self, StopRule};
use coupled_de::{EnsembleSpec, GridSpec, HatMeasure};

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let grid = GridSpec::new(bins)?;
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let stop = StopRule::default();

    // erasure path against x <- eps (1 - (1 - x)^5)^2
    let eps = 0.42;
    let c = HatMeasure::erasure(grid, eps)?;
    let trace = de::de_trajectory(&e, &HatMeasure::delta0(grid), &c, StopRule { max_iter: 50, ..stop })?;
    let mut x = 1.0f64;
    let mut worst = 0.0f64;
    for m in trace.path.iter().skip(1) {
        x = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
        worst = worst.max((m.atom0() - x).abs());
    }
    println!("BEC({eps}) measure DE vs scalar recursion over {} steps: max gap {worst:.1e}", trace.path.len() - 1);

    for kind in [ChannelKind::Bec, ChannelKind::Bsc, ChannelKind::Bawgn] {
        let fam = ChannelFamily::new(kind, grid);
        let bp = de::bp_threshold(&e, fam, 1e-3, stop)?;
        let st = de::stability_threshold(&e, fam, 1e-3)?;
        println!("{kind:?}: h_BP in [{:.4}, {:.4}], h_stab = {:.3}", bp.h_lo, bp.h_hi, st.h_mid);
    }
    Ok(())
}
