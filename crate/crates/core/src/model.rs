//! Physical parameters of the fully connected N-qubit model
//!
//! ```text
//! H = sum_i H_i + V
//! H_i = h Z_i + N h^2 / c
//! V   = 2k X_1 X_2 ... X_N + 4k^2 / c
//! c   = sqrt(N^2 h^2 + 4k^2)
//! ```
//!
//! The constants shift every term so that its ground-state expectation is
//! zero, which makes the ground energy of `H` exactly zero.
//!
//! Qubits are indexed from 0. Qubit 0 is the most significant bit of a basis
//! index, and bit value 0 is the `Z = +1` eigenstate.

use serde::Serialize;

use crate::error::{QetError, Result};

/// Largest qubit count handled by the dense statevector oracle.
pub const DEFAULT_ORACLE_CAP: u64 = 12;

/// Largest qubit count handled by the 2x2 block ground-state scan.
pub const BLOCK_CAP: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    n_qubits: u64,
    h: f64,
    k: f64,
}

impl ModelParams {
    pub fn new(n_qubits: u64, h: f64, k: f64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(QetError::TooFewQubits(n_qubits));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(h) || !positive(k) {
            return Err(QetError::NonPositiveCoupling { h, k });
        }
        Ok(Self { n_qubits, h, k })
    }

    /// Parameters in units of `h = 1` with `k = ratio`.
    pub fn from_ratio(n_qubits: u64, ratio: f64) -> Result<Self> {
        Self::new(n_qubits, 1.0, ratio)
    }

    /// The `k -> 0+` endpoint. Every closed form is continuous there, so this
    /// exists only for figure grids that start at zero coupling.
    pub fn uncoupled(n_qubits: u64, h: f64) -> Result<Self> {
        let p = Self::new(n_qubits, h, 1.0)?;
        Ok(Self { k: 0.0, ..p })
    }

    /// Rejects parameters whose Hilbert space is too large for `cap`.
    pub fn check_oracle(&self, cap: u64) -> Result<()> {
        if self.n_qubits > cap {
            return Err(QetError::OracleCapExceeded {
                n: self.n_qubits,
                cap,
            });
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> u64 {
        self.n_qubits
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ratio(&self) -> f64 {
        self.k / self.h
    }

    /// `N h` as a float.
    pub fn nh(&self) -> f64 {
        self.n_qubits as f64 * self.h
    }

    /// The energy scale `c = sqrt(N^2 h^2 + 4 k^2)`.
    pub fn scale(&self) -> f64 {
        self.nh().hypot(2.0 * self.k)
    }

    /// Constant term of each local `H_i`, equal to `N h^2 / c`.
    pub fn local_constant(&self) -> f64 {
        self.nh() * self.h / self.scale()
    }

    /// Constant term of `V`, equal to `4 k^2 / c`.
    pub fn interaction_constant(&self) -> f64 {
        let two_k = 2.0 * self.k;
        two_k * (two_k / self.scale())
    }

    pub fn ground_state_amplitudes(&self) -> GroundStateAmplitudes {
        let c = self.scale();
        let nh = self.nh();
        // 1 - Nh/c = 4k^2 / (c (c + Nh)) avoids cancellation at small k.
        let a_all_zero = (self.k / c.sqrt()) * (2.0 / (c + nh)).sqrt();
        let a_all_one = -(0.5 + 0.5 * (nh / c)).sqrt();
        GroundStateAmplitudes {
            a_all_zero,
            a_all_one,
        }
    }
}

/// Real amplitudes of the ground state `a0 |0...0> + a1 |1...1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateAmplitudes {
    pub a_all_zero: f64,
    pub a_all_one: f64,
}

impl GroundStateAmplitudes {
    /// `cos 2a` of the generalized GHZ form `cos a |0..0> + sin a |1..1>`.
    pub fn cos_2alpha(&self) -> f64 {
        self.a_all_zero * self.a_all_zero - self.a_all_one * self.a_all_one
    }

    pub fn sin_2alpha(&self) -> f64 {
        2.0 * self.a_all_zero * self.a_all_one
    }
}

/// Split of the qubits into measured inputs and `m` outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    n_qubits: u64,
    outputs: Vec<usize>,
}

impl Partition {
    /// The last `m` qubits are the outputs.
    pub fn trailing(n_qubits: u64, m: u64) -> Result<Self> {
        if m < 1 || m >= n_qubits {
            return Err(QetError::InvalidPartition(format!(
                "need 1 <= m <= N-1, got m = {m} for N = {n_qubits}"
            )));
        }
        let start = (n_qubits - m) as usize;
        Ok(Self {
            n_qubits,
            outputs: (start..n_qubits as usize).collect(),
        })
    }

    /// Arbitrary output set, given as 0-based qubit indices.
    pub fn with_outputs(n_qubits: u64, outputs: &[usize]) -> Result<Self> {
        let mut sorted = outputs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != outputs.len() {
            return Err(QetError::InvalidPartition("duplicate output qubit".into()));
        }
        if let Some(&q) = sorted.last()
            && q as u64 >= n_qubits
        {
            return Err(QetError::InvalidPartition(format!(
                "qubit {q} out of range for N = {n_qubits}"
            )));
        }
        let m = sorted.len() as u64;
        if m < 1 || m >= n_qubits {
            return Err(QetError::InvalidPartition(format!(
                "need 1 <= m <= N-1, got m = {m} for N = {n_qubits}"
            )));
        }
        Ok(Self {
            n_qubits,
            outputs: sorted,
        })
    }

    pub fn n_qubits(&self) -> u64 {
        self.n_qubits
    }

    pub fn m(&self) -> u64 {
        self.outputs.len() as u64
    }

    pub fn n_inputs(&self) -> u64 {
        self.n_qubits - self.m()
    }

    /// Output qubits in ascending order.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Measured qubits in ascending order.
    pub fn inputs(&self) -> Vec<usize> {
        (0..self.n_qubits as usize)
            .filter(|q| self.outputs.binary_search(q).is_err())
            .collect()
    }

    pub fn is_output(&self, q: usize) -> bool {
        self.outputs.binary_search(&q).is_ok()
    }

    pub(crate) fn check_matches(&self, params: &ModelParams) -> Result<()> {
        if self.n_qubits != params.n_qubits() {
            return Err(QetError::InvalidPartition(format!(
                "partition is for N = {}, model has N = {}",
                self.n_qubits,
                params.n_qubits()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let p = ModelParams::new(3, 1.0, 1.0).unwrap();
        assert_eq!((p.n_qubits(), p.h(), p.k()), (3, 1.0, 1.0));
        assert_eq!(
            ModelParams::new(1, 1.0, 1.0),
            Err(QetError::TooFewQubits(1))
        );
        assert!(matches!(
            ModelParams::new(3, 0.0, 1.0),
            Err(QetError::NonPositiveCoupling { .. })
        ));
        assert!(matches!(
            ModelParams::new(3, 1.0, -2.0),
            Err(QetError::NonPositiveCoupling { .. })
        ));
        assert!(ModelParams::new(3, f64::NAN, 1.0).is_err());
        assert_eq!(
            ModelParams::new(13, 1.0, 1.0).unwrap().check_oracle(12),
            Err(QetError::OracleCapExceeded { n: 13, cap: 12 })
        );
    }

    #[test]
    fn amplitudes_n3() {
        let g = ModelParams::new(3, 1.0, 1.0)
            .unwrap()
            .ground_state_amplitudes();
        let s13 = 13f64.sqrt();
        assert!((g.a_all_zero - ((1.0 - 3.0 / s13) / 2.0).sqrt()).abs() < 1e-15);
        assert!((g.a_all_one + ((1.0 + 3.0 / s13) / 2.0).sqrt()).abs() < 1e-15);
        assert!((g.a_all_zero - 0.289_784_15).abs() < 1e-8);
        assert!((g.a_all_one + 0.957_092_03).abs() < 1e-8);
    }

    #[test]
    fn amplitude_limits() {
        let weak = ModelParams::new(3, 1.0, 1e-12)
            .unwrap()
            .ground_state_amplitudes();
        assert!(weak.a_all_zero.abs() < 1e-11);
        assert!((weak.a_all_one + 1.0).abs() < 1e-15);

        let strong = ModelParams::new(7, 1.0, 1e12)
            .unwrap()
            .ground_state_amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((strong.a_all_zero - r).abs() < 1e-10);
        assert!((strong.a_all_one + r).abs() < 1e-10);
    }

    #[test]
    fn constants() {
        let p3 = ModelParams::new(3, 1.0, 1.0).unwrap();
        let s13 = 13f64.sqrt();
        assert!((p3.local_constant() - 3.0 / s13).abs() < 1e-15);
        assert!((p3.interaction_constant() - 4.0 / s13).abs() < 1e-15);

        // printed four-qubit forms 2h^2/sqrt(4h^2+k^2) and 2k^2/sqrt(4h^2+k^2)
        for &(h, k) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.25)] {
            let p4 = ModelParams::new(4, h, k).unwrap();
            let d = (4.0 * h * h + k * k).sqrt();
            assert!((p4.local_constant() - 2.0 * h * h / d).abs() < 1e-14);
            assert!((p4.interaction_constant() - 2.0 * k * k / d).abs() < 1e-14);
        }

        let weak = ModelParams::new(2, 1.0, 1e-300).unwrap();
        assert_eq!(weak.local_constant(), 1.0);
        assert_eq!(weak.interaction_constant(), 0.0);
    }

    #[test]
    fn huge_n_is_finite() {
        let p = ModelParams::new(1_000_000, 1.0, 1e6).unwrap();
        assert!(p.scale().is_finite() && p.scale() > p.nh());
        let g = p.ground_state_amplitudes();
        assert!((g.a_all_zero.powi(2) + g.a_all_one.powi(2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partitions() {
        let p = Partition::trailing(5, 2).unwrap();
        assert_eq!(p.outputs(), &[3, 4]);
        assert_eq!(p.inputs(), vec![0, 1, 2]);
        assert!(Partition::trailing(3, 0).is_err());
        assert!(Partition::trailing(3, 3).is_err());
        assert!(Partition::with_outputs(3, &[0, 1, 2]).is_err());
        assert!(Partition::with_outputs(3, &[1, 1]).is_err());
        assert!(Partition::with_outputs(3, &[3]).is_err());
        let q = Partition::with_outputs(4, &[2, 0]).unwrap();
        assert_eq!(q.outputs(), &[0, 2]);
        assert_eq!(q.inputs(), vec![1, 3]);
    }

    proptest::proptest! {
        #[test]
        fn normalization_and_signs(n in 2u64..2000, h in 1e-3f64..1e3, k in 1e-6f64..1e6) {
            let g = ModelParams::new(n, h, k).unwrap().ground_state_amplitudes();
            proptest::prop_assert!((g.a_all_zero.powi(2) + g.a_all_one.powi(2) - 1.0).abs() <= 1e-14);
            proptest::prop_assert!(g.a_all_one < 0.0 && 0.0 < g.a_all_zero);
        }
    }
}
