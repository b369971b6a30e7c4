//! Shared dense helpers: local-operator application on d-ary registers, phase
//! fixing, orthonormality checks, seeded random unitaries.

use nalgebra::linalg::QR;
use rand::Rng;

use crate::{C64, CMatrix, CVector};

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// d^k, checked against usize overflow at the scales this crate allows.
pub fn pow_dim(d: usize, k: usize) -> usize {
    d.checked_pow(k as u32).expect("dimension overflow")
}

/// Apply a k-site operator `m` (d^k x d^k) to `state` on `support` sites of an
/// `n_sites`-site register with local dimension `d`. Site 0 is the most
/// significant digit of a basis index, and `support[0]` is the most
/// significant digit of the operator's own index.
pub fn apply_local(
    state: &CVector,
    n_sites: usize,
    d: usize,
    support: &[usize],
    m: &CMatrix,
    scale: f64,
    out: &mut CVector,
) {
    let k = support.len();
    let dk = pow_dim(d, k);
    assert_eq!(m.nrows(), dk, "operator size does not match support");
    let dim = state.len();

    let strides: Vec<usize> = support
        .iter()
        .map(|&s| pow_dim(d, n_sites - 1 - s))
        .collect();

    // offsets[a] = global offset of local configuration a scattered onto the support
    let mut offsets = vec![0usize; dk];
    for a in 0..dk {
        let mut rem = a;
        let mut off = 0;
        for i in (0..k).rev() {
            off += (rem % d) * strides[i];
            rem /= d;
        }
        offsets[a] = off;
    }

    let sc = cr(scale);
    for idx in 0..dim {
        let mut base = true;
        for &st in &strides {
            if (idx / st) % d != 0 {
                base = false;
                break;
            }
        }
        if !base {
            continue;
        }
        for a in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dk {
                let me = m[(a, b)];
                if me.re != 0.0 || me.im != 0.0 {
                    acc += me * state[idx + offsets[b]];
                }
            }
            out[idx + offsets[a]] += sc * acc;
        }
    }
}

/// Max-entry magnitude of M - M†.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max-entry magnitude of U†U - I.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let p = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { cr(1.0) } else { cr(0.0) };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// Max-entry magnitude of B†B - I for a column basis.
pub fn orthonormality_defect(b: &CMatrix) -> f64 {
    unitarity_defect(b)
}

/// Rotate a vector by a global phase so its largest-magnitude coordinate is
/// real and positive; ties break toward the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let mag = x.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[best] / cr(best_mag);
    let rot = phase.conj();
    for x in v.iter_mut() {
        *x *= rot;
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Haar-random k-dimensional unitary from a seeded RNG (QR of a complex
/// Gaussian matrix with the R-diagonal phases absorbed).
pub fn random_unitary<R: Rng>(k: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(k, k, |_, _| {
        C64::new(gaussian(rng), gaussian(rng))
    });
    let qr = QR::new(g);
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { cr(1.0) };
        for i in 0..k {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random Hermitian matrix with entries of unit scale.
pub fn random_hermitian<R: Rng>(k: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(k, k, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    (&g + g.adjoint()) * cr(0.5)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; adequate for test instances.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
