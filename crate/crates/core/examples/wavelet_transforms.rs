//! Fourier transforms of the Meyer and Daubechies scaling functions and
//! mother wavelets, with their sup bounds C₁ and C₂.
//!
//!     cargo run --release --example wavelet_transforms

use wavesim::wavelets::{build_daubechies, build_meyer};

fn main() -> wavesim::Result<()> {
    let meyer = build_meyer();
    let db4 = build_daubechies(4, 24)?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "y", "|φ̂| meyer", "|ψ̂| meyer", "|φ̂| db4", "|ψ̂| db4");
    for i in 0..=16 {
        let y = i as f64 * 0.5;
        println!(
            "{y:>8.2} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            meyer.phi_hat(y).norm(),
            meyer.psi_hat(y).norm(),
            db4.phi_hat(y).norm(),
            db4.psi_hat(y).norm()
        );
    }

    for (name, w) in [("meyer", &meyer), ("db4", &db4)] {
        let (c1, c2) = w.sup_bounds()?;
        println!("{name}: C1 = {c1:.6}, C2 = {c2:.6}, φ̂ support = {:?}, ψ̂ band = {:?}", w.phi_support(), w.psi_band());
    }

    // Partition of unity: |φ̂(y)|² + Σ_j |ψ̂(y/2ʲ)|² = 1 for y ≠ 0 in the Meyer band.
    let y = 3.0;
    let total: f64 = meyer.phi_hat(y).norm_sqr() + (0..30).map(|j| meyer.psi_hat(y / 2f64.powi(j)).norm_sqr()).sum::<f64>();
    println!("meyer partition of unity at y = {y}: {total:.15}");
    Ok(())
}
