//! Nonlinear dispersion `ω_nl(k)` and the linear dispersion `λ_lin(ℓ)` of the CGL wave train.

use contact_defects::models::{cgl_quintic, CglQuinticParams};
use contact_defects::wave_trains::{dispersion, find_wave_train};

fn main() -> contact_defects::Result<()> {
    let p = CglQuinticParams::default();
    let sys = cgl_quintic(&p)?;
    let r = p.amplitude_squared().sqrt();
    let wt = find_wave_train(&sys, |t| vec![r * t.cos(), r * t.sin()], 16)?;
    let k: Vec<f64> = (-4..=4).map(|i| 0.05 * f64::from(i)).collect();
    let l: Vec<f64> = (-4..=4).map(|i| 0.05 * f64::from(i)).collect();
    let d = dispersion(&sys, &wt, &k, &l)?;
    for (k, w) in &d.nonlinear.samples {
        println!("k {k:+.2}  omega_nl {w:+.12e}");
    }
    for (l, re, im) in &d.linear.samples {
        println!("l {l:.2}  lambda_lin {re:+.6e} {im:+.6e}i");
    }
    println!("omega_nl''(0) = {:.6}, lambda_lin''(0) = {:.6}", d.nonlinear.omega_nl_pp0, d.linear.lambda_lin_pp0);
    Ok(())
}
