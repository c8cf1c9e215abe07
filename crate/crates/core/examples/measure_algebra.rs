//! Builds a few hat-domain measures and checks the basic identities of the two products.
use coupled_de::measure::{self, gamma_tail_bound};
use coupled_de::{GridSpec, HatMeasure};

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let grid = GridSpec::new(bins)?;

    // a BSC-like point mass, an erasure and a two-point mixture
    let x = HatMeasure::from_points(grid, &[(0.8, 1.0)])?;
    let y = HatMeasure::erasure(grid, 0.3)?;
    let z = HatMeasure::from_points(grid, &[(0.25, 0.4), (0.9, 0.6)])?;

    for (name, a, b) in [("x,y", &x, &y), ("x,z", &x, &z), ("y,z", &y, &z)] {
        let v = measure::var_conv(a, b)?;
        let c = measure::check_conv(a, b)?;
        let dual = v.entropy() + c.entropy() - a.entropy() - b.entropy();
        let m3 = c.moment(3)? - a.moment(3)? * b.moment(3)?;
        println!(
            "{name}: H(a⊛b)={:.6} H(a⊠b)={:.6} duality residual {dual:+.2e} moment-3 residual {m3:+.2e}",
            v.entropy(),
            c.entropy()
        );
    }

    // identities of the two products
    let d0 = HatMeasure::delta0(grid);
    let dinf = HatMeasure::delta_inf(grid);
    println!("x⊛Δ0 == x: {}", measure::var_conv(&x, &d0)? == x);
    println!("x⊠Δ∞ == x: {}", measure::check_conv(&x, &dinf)? == x);

    let d = z.entropy_distance(&dinf, 200)?;
    println!("d_H(z, Δ∞) = {:.6} (tail <= {:.2e}), H(z) = {:.6}", d.value, gamma_tail_bound(200), z.entropy());

    // combining with a channel only makes things better
    let better = measure::var_conv(&z, &x)?;
    println!("z ⪰ z⊛x: {}", z.is_degraded(&better, 1e-12)?);
    println!("z⊠x ⪰ z: {}", measure::check_conv(&z, &x)?.is_degraded(&z, 1e-12)?);
    Ok(())
}
