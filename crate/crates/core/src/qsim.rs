//! Dense statevector simulator.
//!
//! Basis index `k` stores qubit 0 in its most significant bit, so on a
//! two-qubit register `|10⟩` (qubit 0 set) lives at index 2.
//!
//! Gates mutate the state in place and hand back `&mut Self` so calls chain:
//!
//! ```
//! use hybrid_qlstm::qsim::StateVector;
//!
//! let mut psi = StateVector::new(2).unwrap();
//! psi.ry(0, std::f64::consts::PI).unwrap().cnot(0, 1).unwrap();
//! assert!((psi.expect_z(1).unwrap() + 1.0).abs() < 1e-12);
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate (2^16 amplitudes).
pub const MAX_QUBITS: usize = 16;

type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0…0⟩`.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from explicit amplitudes. The vector must have length
    /// `2^n_qubits` and unit norm (to 1e-10).
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::shape("StateVector::from_amplitudes", 1usize << n_qubits, amps.len()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::shape("StateVector::inner", self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn mask(&self, q: usize) -> Result<usize> {
        if q >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(1 << (self.n_qubits - 1 - q))
    }

    fn apply_mat2(&mut self, q: usize, m: &Mat2) -> Result<&mut Self> {
        let mask = self.mask(q)?;
        let dim = self.amps.len();
        let mut block = 0;
        while block < dim {
            for lo in block..block + mask {
                let hi = lo | mask;
                let a = self.amps[lo];
                let b = self.amps[hi];
                self.amps[lo] = m[0][0] * a + m[0][1] * b;
                self.amps[hi] = m[1][0] * a + m[1][1] * b;
            }
            block += 2 * mask;
        }
        Ok(self)
    }

    /// `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`
    pub fn ry(&mut self, q: usize, theta: f64) -> Result<&mut Self> {
        self.apply_mat2(q, &ry_matrix(theta))
    }

    /// `RZ(φ) = diag(e^{−iφ/2}, e^{iφ/2})`
    pub fn rz(&mut self, q: usize, phi: f64) -> Result<&mut Self> {
        let mask = self.mask(q)?;
        let lo = Complex64::from_polar(1.0, -phi / 2.0);
        let hi = Complex64::from_polar(1.0, phi / 2.0);
        for (k, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if k & mask == 0 { lo } else { hi };
        }
        Ok(self)
    }

    /// Euler rotation `RZ(γ)·RY(β)·RZ(α)`: RZ(α) acts first.
    pub fn rot(&mut self, q: usize, alpha: f64, beta: f64, gamma: f64) -> Result<&mut Self> {
        self.apply_mat2(q, &rot_matrix(alpha, beta, gamma))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        if control == target {
            return Err(Error::InvalidArgument(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        for k in 0..self.amps.len() {
            if k & cmask != 0 && k & tmask == 0 {
                self.amps.swap(k, k | tmask);
            }
        }
        Ok(self)
    }

    /// ⟨Z_q⟩ = Σ |a_k|² · (±1 by bit q of k).
    pub fn expect_z(&self, q: usize) -> Result<f64> {
        let mask = self.mask(q)?;
        let z: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| if k & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        Ok(z.clamp(-1.0, 1.0))
    }

    /// ⟨Z_q⟩ for every qubit, in wire order.
    pub fn expect_z_all(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = vec![0.0; n];
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, z) in out.iter_mut().enumerate() {
                if k & (1 << (n - 1 - q)) == 0 {
                    *z += p;
                } else {
                    *z -= p;
                }
            }
        }
        for z in &mut out {
            *z = z.clamp(-1.0, 1.0);
        }
        out
    }
}

fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn rot_matrix(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    // RZ(γ)·RY(β)·RZ(α), multiplied out.
    let (s, c) = (beta / 2.0).sin_cos();
    let plus = (alpha + gamma) / 2.0;
    let minus = (alpha - gamma) / 2.0;
    [
        [Complex64::from_polar(c, -plus), Complex64::from_polar(-s, minus)],
        [Complex64::from_polar(s, -minus), Complex64::from_polar(c, plus)],
    ]
}
