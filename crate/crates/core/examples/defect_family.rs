//! A truncated contact defect of the quintic CGL on `[-L, L]`, continued to larger `L`.
//! Pass `--full` to continue to `L = 256` (about a minute in release mode).

use contact_defects::defect_bvp::{
    build_dark_core_guess, check_reversibility, continue_in_l_logged, newton_solve, ContinuationOptions, Reverser,
    SpaceTimeGrid,
};
use contact_defects::models::{cgl_quintic, CglQuinticParams};
use contact_defects::wave_trains::find_wave_train;

fn main() -> contact_defects::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let p = CglQuinticParams::default();
    let sys = cgl_quintic(&p)?;
    let r = p.amplitude_squared().sqrt();
    let wt = find_wave_train(&sys, |t| vec![r * t.cos(), r * t.sin()], 16)?;

    let grid = SpaceTimeGrid::new(16.0, 65, 16)?;
    let guess = build_dark_core_guess(&wt, &grid, 5.0, 3.0)?;
    let d0 = newton_solve(&sys, &grid, &guess, wt.omega_d)?;
    println!(
        "L = 16: omega = {:.12}, residual {:.1e}, {} Newton steps, R_pi defect {:.1e}",
        d0.omega,
        d0.residual_norm,
        d0.newton_iters,
        check_reversibility(&d0, Reverser::Rpi)
    );

    let schedule: Vec<f64> = if full { vec![16.0, 32.0, 64.0, 128.0, 256.0] } else { vec![16.0, 24.0, 32.0] };
    let (family, steps) = continue_in_l_logged(&sys, &d0, &schedule, &ContinuationOptions::default())?;
    for s in &steps {
        println!("  step to L = {:>7.2}: omega {:.12}, {} Newton steps", s.l, s.omega, s.newton_iters);
    }
    for d in &family {
        println!("L = {:>5}: omega - omega_d = {:.6e}", d.grid.l, d.omega - wt.omega_d);
    }
    Ok(())
}
