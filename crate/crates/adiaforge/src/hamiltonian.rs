//! Local Hamiltonian terms on d-ary registers, their sparse assembly, and the
//! interpolated programs H(s) = (1-s)·H_init + s·H_final that the adiabatic
//! pipeline evolves along.

use serde::{Deserialize, Serialize};

use crate::circuit::{matrix_from_json, matrix_to_json};
use crate::linalg::{apply_local, cr, hermiticity_defect, pow_dim};
use crate::{ensure, C64, CMatrix, CVector, Error, Result};

/// Dense-assembly guard: d^N above this is refused by [`HamiltonianSum::assemble`].
pub const ASSEMBLY_CAP: usize = 1 << 20;

/// One Hermitian term acting on `support` (distinct particle indices;
/// `support[0]` is the most significant digit of the term's matrix index),
/// entering the sum as `coefficient · matrix`.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub support: Vec<usize>,
    pub coefficient: f64,
    pub matrix: CMatrix,
}

impl LocalTerm {
    pub fn new(support: Vec<usize>, coefficient: f64, matrix: CMatrix) -> LocalTerm {
        LocalTerm {
            support,
            coefficient,
            matrix,
        }
    }
}

/// A sum of local terms on `particle_count` particles of dimension `particle_dim`.
#[derive(Debug, Clone)]
pub struct HamiltonianSum {
    pub particle_count: usize,
    pub particle_dim: usize,
    pub terms: Vec<LocalTerm>,
}

impl HamiltonianSum {
    pub fn new(particle_count: usize, particle_dim: usize) -> HamiltonianSum {
        HamiltonianSum {
            particle_count,
            particle_dim,
            terms: Vec::new(),
        }
    }

    /// Validate and append a term.
    pub fn push(&mut self, term: LocalTerm) -> Result<()> {
        let k = term.support.len();
        ensure!(k >= 1, "term needs a nonempty support");
        for &s in &term.support {
            ensure!(
                s < self.particle_count,
                "support index {} out of range for {} particles",
                s,
                self.particle_count
            );
        }
        for i in 0..k {
            for j in i + 1..k {
                ensure!(
                    term.support[i] != term.support[j],
                    "duplicate particle {} in support",
                    term.support[i]
                );
            }
        }
        let dk = pow_dim(self.particle_dim, k);
        ensure!(
            term.matrix.nrows() == dk && term.matrix.ncols() == dk,
            "term matrix is {}x{} but support size {} needs {}x{}",
            term.matrix.nrows(),
            term.matrix.ncols(),
            k,
            dk,
            dk
        );
        let defect = hermiticity_defect(&term.matrix);
        ensure!(
            defect <= 1e-12,
            "term matrix is not Hermitian (defect {:.3e})",
            defect
        );
        ensure!(
            term.coefficient.is_finite(),
            "non-finite coefficient {}",
            term.coefficient
        );
        self.terms.push(term);
        Ok(())
    }

    /// Total Hilbert-space dimension d^N.
    pub fn dim(&self) -> usize {
        pow_dim(self.particle_dim, self.particle_count)
    }

    /// Largest support size over all terms.
    pub fn locality(&self) -> usize {
        self.terms.iter().map(|t| t.support.len()).max().unwrap_or(0)
    }

    /// Matrix-free application H·v.
    pub fn apply(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.dim(), "state dimension mismatch");
        let mut out = CVector::zeros(v.len());
        for t in &self.terms {
            if t.coefficient == 0.0 {
                continue;
            }
            apply_local(
                v,
                self.particle_count,
                self.particle_dim,
                &t.support,
                &t.matrix,
                t.coefficient,
                &mut out,
            );
        }
        out
    }

    /// Assemble into a sparse matrix, summing duplicate entries.
    pub fn assemble(&self) -> Result<SparseHermitian> {
        let dim = self.dim();
        ensure!(
            dim <= ASSEMBLY_CAP,
            "assembly dimension {} exceeds cap {}",
            dim,
            ASSEMBLY_CAP
        );
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
        for t in &self.terms {
            if t.coefficient == 0.0 {
                continue;
            }
            let k = t.support.len();
            let dk = pow_dim(self.particle_dim, k);
            let strides: Vec<usize> = t
                .support
                .iter()
                .map(|&s| pow_dim(self.particle_dim, self.particle_count - 1 - s))
                .collect();
            let mut offsets = vec![0usize; dk];
            for a in 0..dk {
                let mut rem = a;
                let mut off = 0;
                for i in (0..k).rev() {
                    off += (rem % self.particle_dim) * strides[i];
                    rem /= self.particle_dim;
                }
                offsets[a] = off;
            }
            let coef = cr(t.coefficient);
            for idx in 0..dim {
                let mut base = true;
                for &st in &strides {
                    if (idx / st) % self.particle_dim != 0 {
                        base = false;
                        break;
                    }
                }
                if !base {
                    continue;
                }
                for a in 0..dk {
                    for b in 0..dk {
                        let val = t.matrix[(a, b)];
                        if val.re != 0.0 || val.im != 0.0 {
                            triplets.push((idx + offsets[a], idx + offsets[b], coef * val));
                        }
                    }
                }
            }
        }
        Ok(SparseHermitian::from_triplets(dim, triplets))
    }

    /// Dense matrix (small systems and tests).
    pub fn to_dense(&self) -> Result<CMatrix> {
        Ok(self.assemble()?.to_dense())
    }

    /// Triangle-inequality bound Σ |c_i|·‖M_i‖ on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.abs() * crate::linalg::spectral_norm(&t.matrix))
            .sum()
    }

    /// Same terms with every coefficient multiplied by `factor`; terms that
    /// would become exactly zero are dropped.
    pub fn scaled(&self, factor: f64) -> HamiltonianSum {
        let mut out = HamiltonianSum::new(self.particle_count, self.particle_dim);
        if factor == 0.0 {
            return out;
        }
        for t in &self.terms {
            out.terms.push(LocalTerm::new(
                t.support.clone(),
                t.coefficient * factor,
                t.matrix.clone(),
            ));
        }
        out
    }

    /// Concatenate another sum's terms (same register shape required).
    pub fn extend(&mut self, other: &HamiltonianSum) {
        assert_eq!(self.particle_count, other.particle_count);
        assert_eq!(self.particle_dim, other.particle_dim);
        self.terms.extend(other.terms.iter().cloned());
    }
}

/// Validate the penalty weight shared by the 3-local and grid flavors:
/// default J = ε⁻²L⁶, and any J must exceed twice the spectral bound of the
/// non-penalty part or the leak analysis has no purchase.
pub(crate) fn validated_penalty(
    epsilon: f64,
    l: usize,
    j_override: Option<f64>,
    k_bound: f64,
) -> Result<f64> {
    ensure!(
        epsilon > 0.0 && epsilon <= 1.0,
        "epsilon must be in (0, 1], got {}",
        epsilon
    );
    let j = match j_override {
        Some(j) => j,
        None => (l as f64).powi(6) / (epsilon * epsilon),
    };
    ensure!(j.is_finite() && j > 0.0, "penalty J must be positive and finite");
    ensure!(
        j > 2.0 * k_bound,
        "penalty J = {:.3e} must exceed 2K = {:.3e} (K bounds the non-penalty terms)",
        j,
        2.0 * k_bound
    );
    Ok(j)
}

/// CSR storage for an assembled Hermitian operator.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    pub dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitian {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> SparseHermitian {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseHermitian {
            dim,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row i.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |t| (self.col_idx[t], self.vals[t]))
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.dim);
        let mut out = CVector::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.col_idx[k]];
            }
            out[r] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Which construction produced a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "5local")]
    FiveLocal,
    #[serde(rename = "3local")]
    ThreeLocal,
    #[serde(rename = "grid")]
    Grid,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::FiveLocal => write!(f, "5local"),
            Flavor::ThreeLocal => write!(f, "3local"),
            Flavor::Grid => write!(f, "grid"),
        }
    }
}

/// An adiabatic program: the two endpoint Hamiltonians plus the metadata
/// needed to interpret clock measurements.
#[derive(Debug, Clone)]
pub struct AdiabaticProgram {
    pub flavor: Flavor,
    pub n: usize,
    pub l: usize,
    pub epsilon: Option<f64>,
    pub j: Option<f64>,
    pub h_init: HamiltonianSum,
    pub h_final: HamiltonianSum,
}

impl AdiabaticProgram {
    pub fn particle_count(&self) -> usize {
        self.h_init.particle_count
    }

    pub fn particle_dim(&self) -> usize {
        self.h_init.particle_dim
    }

    pub fn dim(&self) -> usize {
        self.h_init.dim()
    }

    /// Largest support size over both endpoints.
    pub fn locality(&self) -> usize {
        self.h_init.locality().max(self.h_final.locality())
    }

    /// H(s) = (1-s)·H_init + s·H_final as a term list. Shared terms appear
    /// once per endpoint with weights summing to their full coefficient.
    pub fn at(&self, s: f64) -> Result<HamiltonianSum> {
        ensure!((0.0..=1.0).contains(&s), "s = {} outside [0, 1]", s);
        let mut h = self.h_init.scaled(1.0 - s);
        h.extend(&self.h_final.scaled(s));
        Ok(h)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProgramJson::from(self)).expect("program serialization")
    }

    pub fn from_json(s: &str) -> Result<AdiabaticProgram> {
        let pj: ProgramJson = serde_json::from_str(s)?;
        pj.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    support: Vec<usize>,
    coefficient: f64,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ProgramJson {
    flavor: Flavor,
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    particle_dim: usize,
    particle_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    j: Option<f64>,
    h_init: Vec<TermJson>,
    h_final: Vec<TermJson>,
}

fn terms_to_json(h: &HamiltonianSum) -> Vec<TermJson> {
    h.terms
        .iter()
        .map(|t| TermJson {
            support: t.support.clone(),
            coefficient: t.coefficient,
            matrix: matrix_to_json(&t.matrix),
        })
        .collect()
}

fn terms_from_json(
    terms: &[TermJson],
    particle_count: usize,
    particle_dim: usize,
) -> Result<HamiltonianSum> {
    let mut h = HamiltonianSum::new(particle_count, particle_dim);
    for t in terms {
        h.push(LocalTerm::new(
            t.support.clone(),
            t.coefficient,
            matrix_from_json(&t.matrix)?,
        ))?;
    }
    Ok(h)
}

impl From<&AdiabaticProgram> for ProgramJson {
    fn from(p: &AdiabaticProgram) -> Self {
        ProgramJson {
            flavor: p.flavor,
            n: p.n,
            l: p.l,
            particle_dim: p.particle_dim(),
            particle_count: p.particle_count(),
            epsilon: p.epsilon,
            j: p.j,
            h_init: terms_to_json(&p.h_init),
            h_final: terms_to_json(&p.h_final),
        }
    }
}

impl TryFrom<ProgramJson> for AdiabaticProgram {
    type Error = Error;

    fn try_from(pj: ProgramJson) -> Result<AdiabaticProgram> {
        let h_init = terms_from_json(&pj.h_init, pj.particle_count, pj.particle_dim)?;
        let h_final = terms_from_json(&pj.h_final, pj.particle_count, pj.particle_dim)?;
        Ok(AdiabaticProgram {
            flavor: pj.flavor,
            n: pj.n,
            l: pj.l,
            epsilon: pj.epsilon,
            j: pj.j,
            h_init,
            h_final,
        })
    }
}
