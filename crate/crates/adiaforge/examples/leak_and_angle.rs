//! Two certificates behind the penalty constructions. The leak certificate
//! bounds how far a large penalty J on the illegal clock space can move the
//! low spectrum away from the legal restriction; the angle bound lower-bounds
//! the ground energy of a sum by the principal angle between the two
//! summands' ground spaces.
//!
//! Run with: cargo run --example leak_and_angle

use adiaforge::circuit::{unary_clock_index, Circuit, Gate};
use adiaforge::five_local::clock_term;
use adiaforge::linalg::cr;
use adiaforge::spectral::{angle_certify, leak_certify};
use adiaforge::three_local::build_3local;
use adiaforge::{CMatrix, CVector};

fn main() -> adiaforge::Result<()> {
    let bell = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)])?;
    let (n, l) = (bell.n, bell.len());

    // legal clock space: product states with unary clock patterns
    let mut legal = CMatrix::zeros(1 << (n + l), (l + 1) << n);
    let mut col = 0;
    for z in 0..(1usize << n) {
        for ell in 0..=l {
            legal[(z * (1 << l) + unary_clock_index(ell, l), col)] = cr(1.0);
            col += 1;
        }
    }

    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "J", "shift", "a'", "a(legal)", "overlap^2");
    for j in [50.0, 200.0, 1000.0, 16384.0] {
        let program = build_3local(&bell, 0.5, Some(j))?;
        let h2 = clock_term(n, l).scaled(j).to_dense()?;
        let h1 = program.at(1.0)?.to_dense()? - &h2;
        let rep = leak_certify(&h1, &legal, &h2, j)?;
        println!(
            "{:>8} {:>12.3e} {:>12.6} {:>12.6} {:>12.8}",
            j, rep.shift, rep.a_prime, rep.a, rep.overlap_sq
        );
        assert!(rep.holds(1e-9));
    }
    println!("(shift = K^2/(J - 2K) shrinks as J grows; the penalized ground tracks the restriction)");

    // angle bound worked instance: H1 = diag(0, 1), H2 = |-><-|, Lambda = 1
    let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.0), cr(1.0)]));
    let h2 = CMatrix::from_fn(2, 2, |i, j| cr(if i == j { 0.5 } else { -0.5 }));
    let rep = angle_certify(&h1, &h2, Some(1.0))?;
    println!("\nangle bound on diag(0,1) + |-><-|:");
    println!("  cos(theta) = {:.10} (expect sqrt(1/2))", rep.cos_theta);
    println!("  bound  = {:.10}", rep.bound);
    println!("  actual = {:.10} (expect 1 - sqrt(2)/2 = {:.10})", rep.actual, 1.0 - 0.5 * 2f64.sqrt());
    Ok(())
}
