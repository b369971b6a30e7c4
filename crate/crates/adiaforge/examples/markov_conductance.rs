//! Map the history chain's ground problem to a reversible Markov chain and
//! bound its gap by conductance. G = I - H has nonnegative entries, the
//! Perron vector turns it into a stochastic P, and Cheeger's inequality
//! turns a combinatorial cut quantity into a spectral floor.
//!
//! Run with: cargo run --example markov_conductance

use adiaforge::spectral::{conductance, perron_chain, s0_closed_form};

fn main() -> adiaforge::Result<()> {
    // the worked instance: s = 1, L = 2 has phi = 1/2 exactly
    let chain = perron_chain(&s0_closed_form(1.0, 2))?;
    let report = conductance(&chain)?;
    println!("s = 1, L = 2:");
    println!("  P = {:.4}", chain.p);
    println!("  pi = [{}]", chain.pi.iter().map(|x| format!("{:.4}", x)).collect::<Vec<_>>().join(", "));
    println!("  phi = {:.6} (witness cut B = {:?})", report.phi, report.witness);
    println!("  Cheeger bound phi^2/2 = {:.6}, actual gap(P) = {:.6}", report.bound, chain.gap());

    // the floor phi >= 1/(6L) across interpolation points and lengths
    println!("\n{:>4} {:>6} {:>10} {:>10} {:>10} {:>10}", "L", "s", "phi", "1/(6L)", "gap(P)", "phi^2/2");
    for l in [2usize, 4, 8, 12] {
        for s in [1.0 / 3.0, 0.5, 0.75, 1.0] {
            let chain = perron_chain(&s0_closed_form(s, l))?;
            let rep = conductance(&chain)?;
            println!(
                "{:>4} {:>6.3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
                l,
                s,
                rep.phi,
                1.0 / (6.0 * l as f64),
                chain.gap(),
                rep.bound
            );
        }
    }

    // the similarity transform behind the mapping: gap(H) = mu * gap(P)
    let chain = perron_chain(&s0_closed_form(0.5, 8))?;
    println!(
        "\ntransfer identity at s = 0.5, L = 8: gap(H) = {:.8}, mu * gap(P) = {:.8}",
        chain.gap_h,
        chain.mu * chain.gap()
    );
    Ok(())
}
