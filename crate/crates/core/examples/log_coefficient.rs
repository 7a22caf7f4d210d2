//! The `ε log ε` term in `ε T`: present with a cubic Taylor coefficient, absent for `g = y^4`.

use contact_defects::scalar_saddle::{extract_log_coefficient, SaddleField, SaddleWindow};

fn main() -> contact_defects::Result<()> {
    let eps: Vec<f64> = (0..12).map(|k| 0.05 * 0.5f64.powi(k)).collect();
    for (name, field) in [("cubic", SaddleField::cubic(1.0)), ("quartic", SaddleField::quartic())] {
        let est = extract_log_coefficient(&field, &eps, 0.5, &SaddleWindow::default())?;
        println!("{name}: d eta / d eps at 0 = {:.6}", est.slope_at_zero);
        for (e, eta) in est.eps.iter().zip(&est.eta_samples).step_by(3) {
            println!("  eps {e:.3e}  eta {eta:+.6e}");
        }
    }
    Ok(())
}
