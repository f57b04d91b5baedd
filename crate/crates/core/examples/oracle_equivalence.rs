//! One capacity integral three ways: closed form, certified quadrature, Monte Carlo.
//!
//! `cargo run --release --example oracle_equivalence`

use delta2_capacity::capacity::{capacity_opts, mc_estimate, snr, Fading, Kernel};
use delta2_capacity::fixtures;
use delta2_capacity::oracle::bump_capacity_closed_form;

fn main() -> delta2_capacity::Result<()> {
    for (i, (shift, power, sigma_sq)) in fixtures::single_bumps().into_iter().enumerate() {
        let c = snr(&power, &sigma_sq)?;
        let closed = bump_capacity_closed_form(&shift, &c)?;
        let f = Fading::bump(shift.clone())?;
        let quad = f.integrate(&Kernel::Capacity { snr: c }, None, &capacity_opts())?.enclosure;
        let mc = mc_estimate(&f, &power, &sigma_sq, 200_000, i as u64)?;
        println!(
            "shift {shift}: closed {} quad width {:.1e} contains closed {} mc {:.5} +- {:.5}",
            closed.mid().to_decimal(12),
            quad.width().to_f64(),
            quad.contains_interval(&closed),
            mc.mean,
            mc.ci95
        );
    }
    Ok(())
}
