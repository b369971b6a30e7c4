//! Build a Bell circuit, walk its snapshot trace, and assemble the uniform
//! history state that every construction in this crate encodes as a ground
//! state.
//!
//! Run with: cargo run --example history_state

use adiaforge::circuit::{unary_clock_index, Circuit, Gate};
use adiaforge::evolution::measure_clock;
use adiaforge::five_local::build_5local;

fn main() -> adiaforge::Result<()> {
    let bell = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)])?;
    println!("circuit: H on qubit 0, then CNOT(0 -> 1), L = {} gates\n", bell.len());

    // snapshots alpha(ell) = U_ell ... U_1 |00>
    let trace = bell.simulate();
    for (ell, state) in trace.states.iter().enumerate() {
        let amps: Vec<String> = state.iter().map(|z| format!("{:+.3}{:+.3}i", z.re, z.im)).collect();
        println!("alpha({ell}) = [{}]", amps.join(", "));
    }

    // |eta> = sum_ell alpha(ell) (x) |1^ell 0^(L-ell)> / sqrt(L+1)
    let eta = bell.history_state()?;
    println!("\nhistory state lives on {} qubits (2 computation + 2 clock)", 4);
    for ell in 0..=bell.len() {
        let c = unary_clock_index(ell, bell.len());
        let slice: Vec<String> = (0..4)
            .map(|z| format!("{:+.3}{:+.3}i", eta[z * 4 + c].re, eta[z * 4 + c].im))
            .collect();
        println!("clock {ell} ({:02b}): [{}]", c, slice.join(", "));
    }

    // measuring the clock of the exact history state is uniform over 0..=L
    let program = build_5local(&bell)?;
    let outcome = measure_clock(&eta, &program)?;
    println!("\nclock histogram of |eta|: {:?}", outcome.histogram);
    println!("weight on illegal clock patterns: {:.2e}", outcome.illegal);

    // the conditional state at clock L is the circuit output
    let final_state = outcome.conditional.last().unwrap().as_ref().unwrap();
    println!(
        "conditional state at clock L: [{}]",
        final_state
            .iter()
            .map(|z| format!("{:+.3}", z.re))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}
