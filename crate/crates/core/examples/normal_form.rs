//! Normal form of the flow near the saddle-node, then the passage time from its
//! partial-fraction split compared with direct integration.

use contact_defects::scalar_saddle::{
    fit_normal_form, travel_time_direct, travel_time_partial_fraction, Leg, SaddleField, SaddleWindow,
};

fn main() -> contact_defects::Result<()> {
    let field = SaddleField::cubic(1.0);
    let nf = fit_normal_form(&field, 5)?;
    println!("a = {:?}", nf.a);
    println!("b = {:?}", nf.b);
    println!("residual {:.3e}", nf.residual_norm);
    for eps in [1e-2, 1e-3] {
        let pf = travel_time_partial_fraction(&nf, eps, 0.5, Leg::ZeroToPlus)?;
        let direct = travel_time_direct(&field, eps, 0.5, Leg::ZeroToPlus, &SaddleWindow::default())?;
        println!(
            "eps {eps:.0e}: partial fractions {:.12e}, direct {:.12e}, log coefficient {:.6}",
            pf.result.t,
            direct.t,
            pf.split.log_coefficient()
        );
    }
    Ok(())
}
