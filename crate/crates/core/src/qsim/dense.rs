//! Brute-force state-vector backend, used as an oracle for the sparse path.
//!
//! Index convention: qubit 0 is the most significant bit of the amplitude
//! index, so the index read in binary spells the ket left to right.

use rand::RngCore;

use super::sparse::SparseState;
use super::{BitString, QsimError};

pub const DEFAULT_DENSE_MAX_QUBITS: usize = 20;

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_qubits: usize,
    amplitudes: Vec<f64>,
}

impl DenseState {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<f64>) -> Result<Self, QsimError> {
        if n_qubits > DEFAULT_DENSE_MAX_QUBITS {
            return Err(QsimError::TooManyQubits {
                n_qubits,
                max: DEFAULT_DENSE_MAX_QUBITS,
            });
        }
        if amplitudes.len() != 1usize << n_qubits {
            return Err(QsimError::WidthMismatch {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_sparse(state: &SparseState) -> Result<Self, QsimError> {
        let n = state.n_qubits();
        if n > DEFAULT_DENSE_MAX_QUBITS {
            return Err(QsimError::TooManyQubits {
                n_qubits: n,
                max: DEFAULT_DENSE_MAX_QUBITS,
            });
        }
        let mag = 1.0 / (state.num_terms() as f64).sqrt();
        let mut amplitudes = vec![0.0; 1 << n];
        for t in state.terms() {
            amplitudes[index_of(&t.basis)] = t.sign.as_f64() * mag;
        }
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn amplitude(&self, basis: &BitString) -> f64 {
        self.amplitudes[index_of(basis)]
    }

    /// `H^{\otimes n}` applied in place by the fast Walsh-Hadamard butterfly.
    pub fn hadamard_all(&self) -> DenseState {
        let mut a = self.amplitudes.clone();
        let mut h = 1;
        while h < a.len() {
            for block in (0..a.len()).step_by(2 * h) {
                for i in block..block + h {
                    let (x, y) = (a[i], a[i + h]);
                    a[i] = x + y;
                    a[i + h] = x - y;
                }
            }
            h *= 2;
        }
        let scale = (a.len() as f64).sqrt().recip();
        a.iter_mut().for_each(|v| *v *= scale);
        DenseState {
            n_qubits: self.n_qubits,
            amplitudes: a,
        }
    }

    /// Born-rule probabilities of a computational-basis measurement.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }

    /// Outcome distribution of measuring every qubit in the Hadamard basis.
    pub fn hadamard_distribution(&self) -> Vec<f64> {
        self.hadamard_all().probabilities()
    }

    /// `<self|other>` for real amplitudes.
    pub fn overlap(&self, other: &DenseState) -> Result<f64, QsimError> {
        if self.n_qubits != other.n_qubits {
            return Err(QsimError::WidthMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Trace distance between two pure states, `sqrt(1 - |<a|b>|^2)`.
    pub fn trace_distance(&self, other: &DenseState) -> Result<f64, QsimError> {
        let f = self.overlap(other)?;
        Ok((1.0 - f * f).max(0.0).sqrt())
    }

    /// Samples a Hadamard-basis measurement outcome for states with any number of terms.
    pub fn sample_hadamard<R: RngCore + ?Sized>(&self, rng: &mut R) -> BitString {
        let table = self.hadamard_distribution();
        let idx = sample_table(&table, rng);
        BitString::from_u64(idx as u64, self.n_qubits).expect("n <= 20")
    }
}

pub fn dense_hadamard_distribution(state: &DenseState) -> Vec<f64> {
    state.hadamard_distribution()
}

fn index_of(basis: &BitString) -> usize {
    basis.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
}

fn sample_table<R: RngCore + ?Sized>(table: &[f64], rng: &mut R) -> usize {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut acc = 0.0;
    for (i, p) in table.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding slack: fall back to the last outcome with nonzero mass
    table.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}
