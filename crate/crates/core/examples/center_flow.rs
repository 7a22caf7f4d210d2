//! The second-order center flow `α'' = ε² + α'² + g`: passage length and phase drift.

use contact_defects::center_flow::{passage_report, phase_drift_log_check};
use contact_defects::scalar_saddle::SaddleField;

fn main() -> contact_defects::Result<()> {
    let field = SaddleField::quadratic();
    for eps in [1e-1, 1e-2, 1e-3] {
        let r = passage_report(&field, eps, 0.5)?;
        println!(
            "eps {eps:.0e}: L = {:.6e}, eps·L = {:.6}, drift = {:.6}",
            r.l_of_eps,
            eps * r.l_of_eps,
            r.alpha_drift
        );
    }
    let fit = phase_drift_log_check(&field, (10.0, 1e4))?;
    println!("alpha against log x: slope {:.6} (rms {:.1e})", fit.slope, fit.residual);
    Ok(())
}
