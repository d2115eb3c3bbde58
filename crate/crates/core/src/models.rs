//! Hamiltonians, system initial states and ancilla initial states.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::operator::{check_unit, eigenbasis, embed_factors, spin_component, Operator};
use crate::spin::{Axis, Spin, SpinRegister};
use crate::state::StateVector;
use crate::C64;

/// Tolerance on the norm of user-supplied ancilla coefficients.
pub const ANCILLA_NORM_TOLERANCE: f64 = 1e-10;

/// One product term `coefficient · Π_k S_{site_k}^{axis_k}` of a Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<(usize, Axis)>,
}

/// System Hamiltonians. Spin components follow the register's convention, so
/// on a Pauli register `IsingXx` is `σ_0^x σ_1^x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HamiltonianSpec {
    /// `S_0^x S_1^x`.
    IsingXx,
    /// `(n·S)_0 (m·S)_1` for unit vectors `n`, `m`.
    AxisPair { n: [f64; 3], m: [f64; 3] },
    /// A sum of product terms.
    LocalTerms(Vec<Term>),
}

fn along(spin: Spin, register: &SpinRegister, n: [f64; 3]) -> Result<Operator> {
    check_unit(n)?;
    let d = spin.levels();
    let mut m = DMatrix::zeros(d, d);
    for (axis, w) in Axis::ALL.into_iter().zip(n) {
        m += spin_component(spin, axis, register.convention())?.matrix() * C64::new(w, 0.0);
    }
    Operator::hermitian(m)
}

fn require_sites(register: &SpinRegister, count: usize) -> Result<()> {
    if register.system_site_count() < count {
        return Err(Error::InvalidArgument(format!(
            "Hamiltonian needs {count} sites, register has {}",
            register.system_site_count()
        )));
    }
    Ok(())
}

/// The Hamiltonian on the system factors only.
pub fn build_system_hamiltonian(spec: &HamiltonianSpec, register: &SpinRegister) -> Result<Operator> {
    let system = register.with_ancillas(0)?;
    let dims = system.dims();
    let spin = system.spin();
    let pair = |a: Operator, b: Operator| -> Result<Operator> {
        require_sites(&system, 2)?;
        embed_factors(&a.kron(&b), &[0, 1], &dims)
    };
    let h = match spec {
        HamiltonianSpec::IsingXx => {
            let x = spin_component(spin, Axis::X, system.convention())?;
            pair(x.clone(), x)?.into_matrix()
        }
        HamiltonianSpec::AxisPair { n, m } => {
            pair(along(spin, &system, *n)?, along(spin, &system, *m)?)?.into_matrix()
        }
        HamiltonianSpec::LocalTerms(terms) => {
            let d = system.dimension();
            let mut total = DMatrix::zeros(d, d);
            for term in terms {
                let mut product = DMatrix::identity(d, d);
                for &(site, axis) in &term.factors {
                    let local = spin_component(spin, axis, system.convention())?;
                    product *= embed_factors(&local, &[system.site(site)?], &dims)?.matrix();
                }
                total += product * C64::new(term.coefficient, 0.0);
            }
            total
        }
    };
    Operator::hermitian(h)
}

/// `1_A ⊗ H_S` on the full register.
pub fn build_hamiltonian(spec: &HamiltonianSpec, register: &SpinRegister) -> Result<Operator> {
    let h = build_system_hamiltonian(spec, register)?;
    Ok(Operator::identity(register.ancilla_dimension()).kron(&h))
}

/// Per-site angles of `cos α e^{-iθ/2}|+⟩ + sin α e^{iθ/2}|−⟩`, with
/// `α ∈ [0, π/2]` and `θ ∈ [0, 2π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteAngles {
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemStateSpec {
    /// Spin-1/2 product state from per-site angles.
    Angles(Vec<SiteAngles>),
    /// Product state from per-site amplitudes in the `S^z` basis (normalized on build).
    Product(Vec<Vec<C64>>),
    /// Arbitrary amplitudes over the whole system space (normalized on build).
    Full(Vec<C64>),
}

pub fn spin_half_state(angles: SiteAngles) -> [C64; 2] {
    let (s, c) = angles.alpha.sin_cos();
    [
        C64::from_polar(c, -angles.theta / 2.0),
        C64::from_polar(s, angles.theta / 2.0),
    ]
}

pub fn build_system_state(spec: &SystemStateSpec, register: &SpinRegister) -> Result<StateVector> {
    let n = register.system_site_count();
    let d = register.local_dimension();
    let check_count = |count: usize| {
        if count != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: count,
            });
        }
        Ok(())
    };
    match spec {
        SystemStateSpec::Angles(sites) => {
            check_count(sites.len())?;
            if d != 2 {
                return Err(Error::Unsupported("angle parametrization needs spin 1/2".into()));
            }
            let factors = sites
                .iter()
                .map(|&a| StateVector::local(&spin_half_state(a)))
                .collect::<Result<Vec<_>>>()?;
            StateVector::product(&factors)
        }
        SystemStateSpec::Product(sites) => {
            check_count(sites.len())?;
            let factors = sites
                .iter()
                .map(|amps| {
                    if amps.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            actual: amps.len(),
                        });
                    }
                    StateVector::normalized(DVector::from_column_slice(amps), vec![d])
                })
                .collect::<Result<Vec<_>>>()?;
            StateVector::product(&factors)
        }
        SystemStateSpec::Full(amps) => StateVector::normalized(DVector::from_column_slice(amps), vec![d; n]),
    }
}

/// Ancilla preparation, expressed in the eigenbasis of the coupling axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AncillaStateSpec {
    /// `c_m = 1/√(2s+1)` for every `m`.
    Uniform,
    /// Coefficients `c_m` ordered by descending `m`.
    Coefficients(Vec<C64>),
}

impl AncillaStateSpec {
    fn coefficients(&self, spin: Spin) -> Result<Vec<C64>> {
        let d = spin.levels();
        match self {
            AncillaStateSpec::Uniform => Ok(vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d]),
            AncillaStateSpec::Coefficients(c) => {
                if c.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: c.len(),
                    });
                }
                Ok(c.clone())
            }
        }
    }

    /// `Σ_m m |c_m|²` in units of `S^a`; zero for a balanced ancilla.
    pub fn polarization(&self, spin: Spin) -> Result<f64> {
        let c = self.coefficients(spin)?;
        Ok(spin
            .magnetic_numbers()
            .iter()
            .zip(&c)
            .map(|(m, z)| m * z.norm_sqr())
            .sum())
    }
}

/// The ancilla factor state `Σ c_m |m⟩_a`.
pub fn build_ancilla_state(spec: &AncillaStateSpec, spin: Spin, axis: Axis) -> Result<StateVector> {
    let c = spec.coefficients(spin)?;
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > ANCILLA_NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let polarization = spec.polarization(spin)?;
    if polarization.abs() > 1e-12 {
        log::warn!("ancilla state has nonzero polarization {polarization:e}; estimator prefactors change");
    }
    let v = eigenbasis(spin, axis) * DVector::from_vec(c);
    StateVector::normalized(v, vec![spin.levels()])
}

/// A system register with its Hamiltonian, cached propagator and initial state.
#[derive(Clone, Debug)]
pub struct System {
    register: SpinRegister,
    hamiltonian: Operator,
    propagator: Propagator,
    state: StateVector,
}

impl System {
    pub fn new(register: &SpinRegister, hamiltonian: &HamiltonianSpec, state: &SystemStateSpec) -> Result<Self> {
        let register = register.with_ancillas(0)?;
        let h = build_system_hamiltonian(hamiltonian, &register)?;
        let psi = build_system_state(state, &register)?;
        Self::from_parts(&register, h, psi)
    }

    /// Any Hermitian system Hamiltonian and system state on `register`'s sites.
    pub fn from_parts(register: &SpinRegister, hamiltonian: Operator, state: StateVector) -> Result<Self> {
        let register = register.with_ancillas(0)?;
        let d = register.dimension();
        if hamiltonian.dim() != d || state.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: if hamiltonian.dim() != d { hamiltonian.dim() } else { state.dim() },
            });
        }
        let propagator = Propagator::new(&hamiltonian)?;
        Ok(System {
            register,
            hamiltonian,
            propagator,
            state,
        })
    }

    /// The register without ancillas.
    pub fn register(&self) -> &SpinRegister {
        &self.register
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Spin component at a system site, embedded in the system space.
    pub fn component(&self, site: usize, axis: Axis) -> Result<Operator> {
        crate::operator::site_component(&self.register, site, axis)
    }
}
