//! Times one product of each kind at a given grid size.
use std::time::Instant;

use coupled_de::measure::{self, Kernel};
use coupled_de::{DegreePolynomial, GridSpec, HatMeasure};

fn main() -> coupled_de::Result<()> {
    let bins: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4096);
    let grid = GridSpec::new(bins)?;
    let n = grid.bins();
    let interior: Vec<f64> = (0..n).map(|j| 1.0 + (j % 7) as f64).collect();
    let s: f64 = interior.iter().sum();
    let x = HatMeasure::from_parts(grid, 0.0, interior.iter().map(|v| v / s).collect(), 0.0)?;
    for kernel in [Kernel::Spectral, Kernel::Direct] {
        let t = Instant::now();
        let v = measure::var_conv_with(kernel, &x, &x)?;
        let tv = t.elapsed();
        let t = Instant::now();
        let c = measure::check_conv_with(kernel, &x, &x)?;
        let tc = t.elapsed();
        println!("{kernel:?}: var {tv:?} (H={:.6})  check {tc:?} (H={:.6})", v.entropy(), c.entropy());
    }
    let rho = DegreePolynomial::monomial(5);
    let lam = DegreePolynomial::monomial(2);
    for _ in 0..3 {
        let t = Instant::now();
        let r = measure::poly_check(&rho, &x)?;
        let tr = t.elapsed();
        let l = measure::var_conv_poly(Some(&x), &lam, &r)?;
        println!("one (3,6) step: {:?} (check part {tr:?}) H={:.6}", t.elapsed(), l.entropy());
    }
    Ok(())
}
