//! Given a travel length `L`, find `ε*` with `T(ε*) = L`; `ε*·L` approaches `π/2`.

use contact_defects::scalar_saddle::{solve_epsilon_for_length, SaddleField, SaddleWindow};

fn main() -> contact_defects::Result<()> {
    let field = SaddleField::quadratic();
    let window = SaddleWindow::default();
    println!("{:>8} {:>20} {:>12} {:>14} {:>14}", "L", "eps*", "eps*·L", "deps*/dL", "residual");
    for k in 5..=11 {
        let l = f64::from(1u32 << k);
        let r = solve_epsilon_for_length(&field, l, 0.5, &window)?;
        println!(
            "{l:>8} {:>20.12e} {:>12.8} {:>14.6e} {:>14.3e}",
            r.epsilon_star,
            r.epsilon_star * l,
            r.derivative,
            r.residual
        );
    }
    Ok(())
}
