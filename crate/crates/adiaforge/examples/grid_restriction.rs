//! The grid program seen from inside its legal sector. For the Bell circuit
//! on a 2x2 grid (dim 6^4 = 1296) the history lines of the four inputs are
//! each invariant, the Hamiltonian is block-diagonal across them, the j = 0
//! block is the same (L+1)x(L+1) chain matrix the qubit flavors produce, and
//! the input term's diagonal follows the popcount of the not-yet-consumed
//! input bits.
//!
//! Run with: cargo run --example grid_restriction

use adiaforge::circuit::{Circuit, Gate};
use adiaforge::grid::{build_grid_program, grid_gamma_basis, input_term_grid};
use adiaforge::spectral::{complexify, restrict, s0_closed_form, Operator};
use adiaforge::{CMatrix, CVector};

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn apply_columns(op: &Operator, basis: &CMatrix) -> CMatrix {
    let mut hb = CMatrix::zeros(basis.nrows(), basis.ncols());
    for c in 0..basis.ncols() {
        let col: CVector = basis.column(c).into_owned();
        hb.set_column(c, &op.apply(&col));
    }
    hb
}

fn main() -> adiaforge::Result<()> {
    let bell = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)])?;
    let layout = bell.to_grid_layout()?;
    let gp = build_grid_program(&layout, 0.5, None)?;
    let (n, l) = (gp.n, gp.program.l);
    println!(
        "Bell on the grid: n = {}, R = {}, L = {}, dim = 6^{} = {}",
        n, gp.r, l, n * (gp.r + 1), 6usize.pow((n * (gp.r + 1)) as u32)
    );

    let bases: Vec<CMatrix> =
        (0..1usize << n).map(|j| grid_gamma_basis(&layout, j)).collect::<Result<_, _>>()?;

    for &s in &[0.0, 0.5, 1.0] {
        let h = gp.program.at(s)?;
        let op = Operator::Sum(&h);

        // j = 0 block against the closed-form chain
        let block0 = restrict(&op, &bases[0])?;
        let defect = max_abs(&(&block0.matrix - complexify(&s0_closed_form(s, l))));
        assert!(defect <= 1e-10);

        // cross-block elements between different input lines
        let images: Vec<CMatrix> = bases.iter().map(|b| apply_columns(&op, b)).collect();
        let mut cross = 0.0f64;
        for j in 0..bases.len() {
            for jp in 0..bases.len() {
                if j != jp {
                    cross = cross.max(max_abs(&(bases[j].adjoint() * &images[jp])));
                }
            }
        }
        assert!(cross <= 1e-12);
        println!(
            "s = {:.2}: j = 0 block vs closed form {:.3e}, largest cross-block element {:.3e}",
            s, defect, cross
        );
    }

    // the input term alone: diagonal in every gamma line, entries given by the
    // popcount of the input bits still sitting untouched in column 0
    println!("\ninput-term diagonal per line (rows ell = 0..L):");
    let input = input_term_grid(n, gp.r);
    let op = Operator::Sum(&input);
    for (j, basis) in bases.iter().enumerate() {
        let r = restrict(&op, basis)?;
        let mut diag = Vec::with_capacity(l + 1);
        for ell in 0..=l {
            let expected = if ell <= n {
                (j & ((1 << (n - ell)) - 1)).count_ones() as f64
            } else {
                0.0
            };
            let got = r.matrix[(ell, ell)].re;
            assert!((got - expected).abs() <= 1e-12);
            diag.push(format!("{:.0}", got));
        }
        let off = max_abs(&(&r.matrix - CMatrix::from_diagonal(&r.matrix.diagonal())));
        assert!(off <= 1e-12);
        println!("  j = {:02b}: diag({})  off-diagonal {:.1e}", j, diag.join(", "), off);
    }
    println!("(ell = 0 counts every 1-bit of j; each clock step that consumes a row drops its bit)");
    Ok(())
}
