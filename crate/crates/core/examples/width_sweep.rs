//! Empirical coupled thresholds per width next to the width the energy gap guarantees.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::coupled::{self, SweepOptions};
use coupled_de::EnsembleSpec;
use coupled_de::GridSpec;

fn main() -> coupled_de::Result<()> {
    let mut args = std::env::args().skip(1);
    let bins: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(256);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let fam = ChannelFamily::new(ChannelKind::Bsc, GridSpec::new(bins)?);
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let report =
        coupled::saturation_sweep(&e, fam, &[n], &[1, 2, 3], &[0.40, 0.44, 0.46, 0.48], &SweepOptions::default())?;

    println!("K = {}", report.k);
    for t in &report.thresholds {
        println!("N = {} w = {}: largest saturating h = {:?}", t.n, t.w, t.empirical);
    }
    for b in &report.width_bounds {
        println!(
            "h = {:.2}: gap {:?}, sufficient w {:?}, smallest working w {:?}",
            b.h, b.energy_gap, b.sufficient_w, b.empirical_w
        );
    }
    coupled::write_sweep_csv(&report, std::io::stdout().lock())?;
    Ok(())
}
