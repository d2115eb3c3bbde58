//! Spin quantum numbers, operator conventions and the tensor-product register.
//!
//! Local basis ordering is always by descending magnetic quantum number:
//! index `k` of a local factor holds `m = s - k` in the `S^z` eigenbasis.
//! Factors of a register are ordered ancillas first, then system sites, and
//! the first factor is the most significant digit of the global index, so
//! `A ⊗ S_1 ⊗ ... ⊗ S_N` is the ordinary Kronecker product in that order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the total Hilbert-space dimension (12 spin-1/2 factors).
pub const DEFAULT_MAX_DIMENSION: usize = 1 << 12;

/// A spin quantum number `s`, stored as the integer `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(twice));
        }
        Ok(Spin { twice })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Local dimension `2s + 1`.
    pub fn levels(self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum numbers `s, s-1, ..., -s`.
    pub fn magnetic_numbers(self) -> Vec<f64> {
        let s = self.value();
        (0..self.levels()).map(|k| s - k as f64).collect()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse spin '{s}'"));
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Spin::from_twice(num),
                "1" => Spin::from_twice(2 * num),
                _ => Err(bad()),
            }
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            let twice = (2.0 * v).round();
            if (2.0 * v - twice).abs() > 1e-12 || twice < 1.0 {
                return Err(bad());
            }
            Spin::from_twice(twice as u32)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit_vector(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
        }
    }
}

/// Which operators represent a spin component.
///
/// `SpinS` uses `S^a` with eigenvalues `s, ..., -s`; `Pauli` uses
/// `σ^a = 2 S^a` with eigenvalues `±1` and is only defined for spin 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    SpinS,
    Pauli,
}

impl Convention {
    /// Factor relating the convention's operators to `S^a`.
    pub fn scale(self, spin: Spin) -> Result<f64> {
        match self {
            Convention::SpinS => Ok(1.0),
            Convention::Pauli if spin == Spin::HALF => Ok(2.0),
            Convention::Pauli => Err(Error::Convention {
                twice_spin: spin.twice(),
            }),
        }
    }

    /// Eigenvalues of a single-site spin component, in descending order.
    pub fn eigenvalues(self, spin: Spin) -> Result<Vec<f64>> {
        let scale = self.scale(spin)?;
        Ok(spin.magnetic_numbers().into_iter().map(|m| scale * m).collect())
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::SpinS => "spin-s",
            Convention::Pauli => "pauli",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pauli" => Ok(Convention::Pauli),
            "spin-s" | "spins" | "spin" => Ok(Convention::SpinS),
            other => Err(Error::InvalidArgument(format!(
                "unknown operator convention '{other}'"
            ))),
        }
    }
}

/// The tensor-product space of `ancilla_count` ancillas followed by
/// `system_site_count` system sites, all carrying the same spin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinRegister {
    system_site_count: usize,
    spin: Spin,
    ancilla_count: usize,
    convention: Convention,
}

impl SpinRegister {
    pub fn new(
        system_site_count: usize,
        spin: Spin,
        ancilla_count: usize,
        convention: Convention,
    ) -> Result<Self> {
        Self::with_dimension_cap(
            system_site_count,
            spin,
            ancilla_count,
            convention,
            DEFAULT_MAX_DIMENSION,
        )
    }

    pub fn with_dimension_cap(
        system_site_count: usize,
        spin: Spin,
        ancilla_count: usize,
        convention: Convention,
        cap: usize,
    ) -> Result<Self> {
        if system_site_count == 0 {
            return Err(Error::InvalidArgument(
                "a register needs at least one system site".into(),
            ));
        }
        convention.scale(spin)?;
        let factors = system_site_count + ancilla_count;
        let local_dim = spin.levels();
        let too_large = || Error::RegisterTooLarge {
            factors,
            local_dim,
            cap,
        };
        let mut dim: usize = 1;
        for _ in 0..factors {
            dim = dim.checked_mul(local_dim).ok_or_else(too_large)?;
            if dim > cap {
                return Err(too_large());
            }
        }
        Ok(SpinRegister {
            system_site_count,
            spin,
            ancilla_count,
            convention,
        })
    }

    /// Spin-1/2 system in the Pauli convention.
    pub fn qubits(system_site_count: usize, ancilla_count: usize) -> Result<Self> {
        Self::new(system_site_count, Spin::HALF, ancilla_count, Convention::Pauli)
    }

    pub fn system_site_count(&self) -> usize {
        self.system_site_count
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_count
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn factor_count(&self) -> usize {
        self.system_site_count + self.ancilla_count
    }

    pub fn local_dimension(&self) -> usize {
        self.spin.levels()
    }

    pub fn dimension(&self) -> usize {
        self.local_dimension().pow(self.factor_count() as u32)
    }

    pub fn system_dimension(&self) -> usize {
        self.local_dimension().pow(self.system_site_count as u32)
    }

    pub fn ancilla_dimension(&self) -> usize {
        self.local_dimension().pow(self.ancilla_count as u32)
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.local_dimension(); self.factor_count()]
    }

    /// Factor index of system site `site` (0-based).
    pub fn site(&self, site: usize) -> Result<usize> {
        if site >= self.system_site_count {
            return Err(Error::FactorOutOfRange {
                index: site,
                factors: self.system_site_count,
            });
        }
        Ok(self.ancilla_count + site)
    }

    /// Factor index of ancilla `k` (0-based).
    pub fn ancilla(&self, k: usize) -> Result<usize> {
        if k >= self.ancilla_count {
            return Err(Error::FactorOutOfRange {
                index: k,
                factors: self.ancilla_count,
            });
        }
        Ok(k)
    }

    /// The same system with a different number of ancillas.
    pub fn with_ancillas(&self, ancilla_count: usize) -> Result<Self> {
        Self::new(self.system_site_count, self.spin, ancilla_count, self.convention)
    }

    /// Eigenvalues of a single-site component under this register's convention.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.convention
            .eigenvalues(self.spin)
            .expect("convention validated at construction")
    }

    pub fn scale(&self) -> f64 {
        self.convention
            .scale(self.spin)
            .expect("convention validated at construction")
    }
}

/// `S^+` in the `S^z` eigenbasis.
pub(crate) fn raising_z(spin: Spin) -> DMatrix<C64> {
    let d = spin.levels();
    let s = spin.value();
    let mut m = DMatrix::zeros(d, d);
    for k in 1..d {
        // column k holds m = s - k, raised into row k - 1
        let mz = s - k as f64;
        m[(k - 1, k)] = C64::new((s * (s + 1.0) - mz * (mz + 1.0)).sqrt(), 0.0);
    }
    m
}

/// Spin matrices `S^a` (not scaled by the convention) in the `S^z` basis.
pub(crate) fn spin_matrix(spin: Spin, axis: Axis) -> DMatrix<C64> {
    let d = spin.levels();
    match axis {
        Axis::Z => DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                C64::new(spin.value() - r as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        Axis::X => {
            let p = raising_z(spin);
            (&p + p.adjoint()) * C64::new(0.5, 0.0)
        }
        Axis::Y => {
            let p = raising_z(spin);
            (&p - p.adjoint()) * C64::new(0.0, -0.5)
        }
    }
}
