//! Passage time through the saddle-node for `y' = ε² + y² + g(y)`, against `atan` for `g = 0`.

use contact_defects::scalar_saddle::{travel_time_direct, Leg, SaddleField, SaddleWindow};

fn main() -> contact_defects::Result<()> {
    let window = SaddleWindow::default();
    let delta = 0.5;
    println!("{:>10} {:>22} {:>22} {:>22}", "eps", "T (g=0)", "atan oracle", "eps*T (g=y^4)");
    for eps in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
        let t = travel_time_direct(&SaddleField::quadratic(), eps, delta, Leg::ZeroToPlus, &window)?.t;
        let oracle = (delta / eps).atan() / eps;
        let t4 = travel_time_direct(&SaddleField::quartic(), eps, delta, Leg::ZeroToPlus, &window)?.t;
        println!("{eps:>10.1e} {t:>22.15e} {oracle:>22.15e} {:>22.15e}", eps * t4);
    }
    println!("eps*T tends to pi/2 = {:.15e}", std::f64::consts::FRAC_PI_2);
    Ok(())
}
