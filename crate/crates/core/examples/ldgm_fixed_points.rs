//! LDGM: the minimal fixed point f0 against the fixed point reached from Δ0,
//! scanned over the BSC.
use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::de::{self, StopRule};
use coupled_de::potential;
use coupled_de::{EnsembleSpec, GridSpec, HatMeasure};

const ENSEMBLE: &str = r#"{"kind":"ldgm","lambda":[0,0,0,0,0,0,0,0,1],
    "rho":[{"num":3,"den":50},{"num":6,"den":50},{"num":9,"den":50},{"num":12,"den":50},{"num":20,"den":50}]}"#;

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let grid = GridSpec::new(bins)?;
    let e = EnsembleSpec::from_json(ENSEMBLE)?;
    let k = e.constants();
    println!("design rate {:.4}, K = {:.2}", k.design_rate, k.k);
    let fam = ChannelFamily::new(ChannelKind::Bsc, grid);
    let stop = StopRule::default();

    println!("{:>6} {:>10} {:>10} {:>12}", "h", "H(f0)", "H(fwd)", "U(fwd)-U(f0)");
    for step in 0..=12 {
        let h = 0.40 + 0.025 * step as f64;
        let c = fam.density(h)?;
        let f0 = de::minimal_fixed_point(&e, &c, stop)?;
        let fwd = de::de_fixed_point(&e, &HatMeasure::delta0(grid), &c, stop)?.terminal;
        let du = potential::potential_value(&e, &fwd, &c)? - potential::potential_value(&e, &f0, &c)?;
        println!("{h:>6.3} {:>10.5} {:>10.5} {du:>+12.5}", f0.entropy(), fwd.entropy());
    }
    Ok(())
}
