//! Single-system potential along a BAWGN probe path for a few BSC channels.
//! Pass an output directory as the second argument to get one CSV per channel.
use std::fs::File;
use std::path::PathBuf;

use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::potential;
use coupled_de::{EnsembleSpec, GridSpec};

fn main() -> coupled_de::Result<()> {
    let mut args = std::env::args().skip(1);
    let bins: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1024);
    let out_dir = args.next().map(PathBuf::from);
    let grid = GridSpec::new(bins)?;
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let probe = ChannelFamily::new(ChannelKind::Bawgn, grid);
    let probes: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();

    for h in [0.40, 0.44, 0.48, 0.50] {
        let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(h)?;
        let rows = potential::potential_curve(&e, &c, probe, &probes)?;
        let minima: Vec<String> = rows
            .windows(3)
            .filter(|w| w[1].1 < w[0].1 && w[1].1 <= w[2].1)
            .map(|w| format!("U_s({:.2}) = {:+.5}", w[1].0, w[1].1))
            .collect();
        if minima.is_empty() {
            println!("h = {h:.2}: no interior minimum, U_s rises from 0");
        } else {
            println!("h = {h:.2}: interior minimum {}", minima.join(", "));
        }
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("potential_bsc_{h:.2}.csv"));
            potential::write_curve_csv(&rows, File::create(&path)?)?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}
