//! The decoding wave: a (3,6) chain over the BSC between the uncoupled BP
//! threshold and the potential threshold.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::coupled::{ChainProfile, CoupledSpec, CoupledSystem};
use coupled_de::de::{self, StopRule};
use coupled_de::{EnsembleSpec, GridSpec};

fn bar(h: f64) -> char {
    [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'][((h * 9.0).round() as usize).min(9)]
}

fn main() -> coupled_de::Result<()> {
    let mut args = std::env::args().skip(1);
    let bins: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(256);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(12);
    let grid = GridSpec::new(bins)?;
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let stop = StopRule { max_iter: 5000, absorb_below: Some(de::ABSORB_ENTROPY), ..StopRule::default() };

    for h in [0.44, 0.50] {
        let c = ChannelFamily::new(ChannelKind::Bsc, grid).density(h)?;
        let spec = CoupledSpec::new(e.clone(), n, 3)?;
        let len = spec.len();
        let sys = CoupledSystem::new(spec, c, stop)?;
        let trace = sys.fixed_point(&ChainProfile::delta0(grid, len), stop, Some(10))?;
        println!("h = {h:.2}, N = {n}, w = 3: {:?} after {} iterations", trace.status, trace.iterations());
        for (it, stats) in &trace.snapshots {
            let row: String = stats.iter().map(|s| bar(s.entropy)).collect();
            println!("  {it:>5} |{row}|");
        }
    }
    Ok(())
}
