//! Spatially homogeneous oscillations of the lambda-omega and quintic CGL models,
//! with the structural hypotheses checked on each.

use contact_defects::models::{cgl_quintic, lambda_omega, CglQuinticParams, LambdaOmegaParams};
use contact_defects::wave_trains::{check_hypotheses, find_wave_train};

fn main() -> contact_defects::Result<()> {
    let lo = lambda_omega(&LambdaOmegaParams::default())?;
    let p = CglQuinticParams::default();
    let cgl = cgl_quintic(&p)?;
    let r = p.amplitude_squared().sqrt();
    for (name, sys, amp) in [("lambda-omega", &lo, 1.0), ("quintic CGL", &cgl, r)] {
        let wt = find_wave_train(sys, |t| vec![amp * t.cos(), amp * t.sin()], 16)?;
        let h = check_hypotheses(sys, &wt)?;
        println!("{name}: omega_d = {:.15}, residual {:.1e}", wt.omega_d, wt.residual);
        println!(
            "  zero multiplicity {}, gap {:.4}, omega_nl'' {:.6}, lambda_lin'' {:.6}, reversers {:.1e}/{:.1e}",
            h.zero_multiplicity,
            h.spectral_gap,
            h.omega_nl_pp0,
            h.lambda_lin_pp0,
            h.reverser_defects.0,
            h.reverser_defects.1
        );
        println!("  H2 {} H5 {}", h.h2_pass, h.h5_pass);
    }
    Ok(())
}
