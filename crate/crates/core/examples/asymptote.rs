//! At `ε = 0` the solution approaches `-1/x`; the weighted deviation stays bounded.

use contact_defects::scalar_saddle::{asymptote_check, SaddleField};

fn main() -> contact_defects::Result<()> {
    for (name, field) in [("g = 0", SaddleField::quadratic()), ("g = y^3", SaddleField::cubic(1.0))] {
        for x_max in [1e2, 1e3, 1e4] {
            let r = asymptote_check(&field, (2.0, x_max))?;
            println!(
                "{name:>8} x <= {x_max:>6.0e}: sup x^2|y+1/x| = {:.5}, sup x^2/log x |y+1/x| = {:.5}",
                r.sup_x2, r.sup_x2_over_log
            );
        }
    }
    Ok(())
}
