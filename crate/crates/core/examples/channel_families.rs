//! The three channel families at matched entropy.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::GridSpec;

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2048);
    let grid = GridSpec::new(bins)?;
    println!("{:>6} {:>6} {:>12} {:>10} {:>10}", "family", "H", "param", "B", "P_err");
    for h in [0.2, 0.4296, 0.5, 0.8] {
        for kind in [ChannelKind::Bec, ChannelKind::Bsc, ChannelKind::Bawgn] {
            let fam = ChannelFamily::new(kind, grid);
            let p = fam.param_from_entropy(h, 1e-10)?;
            let c = fam.density_from_param(p.param)?;
            println!(
                "{:>6} {:>6.4} {:>12.6} {:>10.6} {:>10.6}",
                format!("{kind:?}").to_lowercase(),
                c.entropy(),
                p.param,
                c.bhattacharyya(),
                c.error_prob()
            );
        }
    }
    Ok(())
}
