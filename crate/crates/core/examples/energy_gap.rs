//! Energy gap of (3,6) over the BSC across the interesting range, and the
//! potential threshold from both estimators.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::potential::{self, CandidateStrategy, PotentialEstimator};
use coupled_de::{EnsembleSpec, GridSpec};

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let grid = GridSpec::new(bins)?;
    let e = EnsembleSpec::regular_ldpc(3, 6)?;
    let fam = ChannelFamily::new(ChannelKind::Bsc, grid);
    let strategy = CandidateStrategy::default();
    let k = e.constants().k;

    for h in [0.40, 0.42, 0.44, 0.46, 0.47, 0.48] {
        let gap = potential::energy_gap(&e, &fam.density(h)?, &strategy)?;
        match gap.gap {
            None => println!("h = {h:.2}: gap = +inf (every candidate decodes)"),
            Some(g) if g > 0.0 => println!(
                "h = {h:.2}: gap <= {g:.5} from {}, width bound K/(2 gap) = {:.0}",
                gap.argmin.as_deref().unwrap_or("?"),
                k / (2.0 * g)
            ),
            Some(g) => println!("h = {h:.2}: gap <= {g:.5} (non-positive)"),
        }
    }

    let t = potential::potential_threshold(&e, fam, PotentialEstimator::ForwardFpSign, 1e-3, true, &strategy)?;
    let other = t.cross_check.as_ref().map_or(f64::NAN, |c| c.h_mid);
    println!("potential threshold: forward-fp-sign {:.4}, energy-gap-sign {:.4}", t.h_mid, other);
    for f in &t.flags {
        println!("  flag: {f}");
    }
    Ok(())
}
