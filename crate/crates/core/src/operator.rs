//! Dense operators, spin components and tensor embedding.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::spin::{raising_z, spin_matrix, Axis, Convention, Spin, SpinRegister};
use crate::C64;

/// Tolerance for the Hermiticity check on construction.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// A dense complex square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    /// Wraps a square matrix without any Hermiticity claim.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        Ok(Operator {
            matrix,
            hermitian: false,
        })
    }

    /// Wraps a matrix that must be Hermitian to within [`HERMITIAN_TOLERANCE`].
    pub fn hermitian(matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let deviation = hermitian_deviation(&op.matrix);
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NonHermitian { deviation });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            matrix: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            matrix: &self.matrix * C64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rhs.dim(),
            });
        }
        Operator::new(&self.matrix * &rhs.matrix)
    }

    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rhs.dim(),
            });
        }
        Operator::new(&self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .singular_values()
            .iter()
            .fold(0.0_f64, |acc, &v| acc.max(v))
    }

    /// `max |M_rc - N_rc|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Columns are the eigenvectors `|m⟩_a` of `S^a`, ordered by descending `m`.
///
/// The `S^x` basis is the `S^z` basis rotated by `π/2` about `y`; the `S^y`
/// basis is the `S^x` basis rotated further by `π/2` about `z`. For spin 1/2
/// this gives `|+x⟩ = (|+⟩ + |−⟩)/√2` and `|−x⟩ = (−|+⟩ + |−⟩)/√2`.
pub fn eigenbasis(spin: Spin, axis: Axis) -> DMatrix<C64> {
    let d = spin.levels();
    let rotate = |around: Axis| {
        let generator = Operator::hermitian(spin_matrix(spin, around)).expect("spin matrices are Hermitian");
        Propagator::new(&generator)
            .expect("Hermitian generator")
            .unitary(std::f64::consts::FRAC_PI_2)
    };
    let basis = match axis {
        Axis::Z => DMatrix::identity(d, d),
        Axis::X => rotate(Axis::Y),
        Axis::Y => rotate(Axis::Z) * rotate(Axis::Y),
    };
    clean(basis)
}

/// Zeroes entries below 1e-15 so exact structure survives the rotation.
fn clean(mut m: DMatrix<C64>) -> DMatrix<C64> {
    for z in m.iter_mut() {
        if z.re.abs() < 1e-15 {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
    }
    m
}

/// Spin component `S^a` (or `σ^a`) on a single factor, in the `S^z` basis.
pub fn spin_component(spin: Spin, axis: Axis, convention: Convention) -> Result<Operator> {
    let scale = convention.scale(spin)?;
    Operator::hermitian(spin_matrix(spin, axis) * c(scale, 0.0))
}

/// Ladder operators `(S_a^+, S_a^-)` with respect to the `S^a` eigenbasis of
/// [`eigenbasis`], expressed in the `S^z` basis.
pub fn raising_lowering(spin: Spin, axis: Axis) -> (Operator, Operator) {
    let basis = eigenbasis(spin, axis);
    let raising = &basis * raising_z(spin) * basis.adjoint();
    let lowering = raising.adjoint();
    (
        Operator::new(raising).expect("square"),
        Operator::new(lowering).expect("square"),
    )
}

/// The coupling operator `B^(1) = S^a` (convention-scaled).
pub fn coupling_b1(spin: Spin, axis: Axis, convention: Convention) -> Result<Operator> {
    spin_component(spin, axis, convention)
}

/// The coupling operator `B^(2) = -(i/2)(S_a^+ - S_a^-)` (convention-scaled).
pub fn coupling_b2(spin: Spin, axis: Axis, convention: Convention) -> Result<Operator> {
    let scale = convention.scale(spin)?;
    let (up, down) = raising_lowering(spin, axis);
    let m = (up.matrix() - down.matrix()) * c(0.0, -0.5 * scale);
    Operator::hermitian(m)
}

/// `(n·σ)` for spin 1/2 (Pauli matrices regardless of register convention).
pub fn pauli_along(n: [f64; 3]) -> Result<Operator> {
    check_unit(n)?;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(n[2], 0.0),
            c(n[0], -n[1]),
            c(n[0], n[1]),
            c(-n[2], 0.0),
        ],
    );
    Operator::hermitian(m)
}

pub(crate) fn check_unit(n: [f64; 3]) -> Result<()> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitAxis(n));
    }
    Ok(())
}

/// Local rotation `exp(-i θ/2 (n·σ))` on a spin-1/2 factor.
pub fn spin_half_rotation(theta: f64, n: [f64; 3]) -> Result<Operator> {
    let generator = pauli_along(n)?;
    let (sin, cos) = (theta / 2.0).sin_cos();
    let m = DMatrix::identity(2, 2) * c(cos, 0.0) - generator.matrix() * c(0.0, sin);
    Operator::new(m)
}

/// Embeds an operator on a set of factors into the full register, with the
/// identity elsewhere. `factors` lists the factor indices in the order of the
/// Kronecker factors of `local`.
pub fn embed_factors(local: &Operator, factors: &[usize], dims: &[usize]) -> Result<Operator> {
    let local_dim: usize = factors
        .iter()
        .map(|&f| dims.get(f).copied().ok_or(Error::FactorOutOfRange { index: f, factors: dims.len() }))
        .product::<Result<usize>>()?;
    if local.dim() != local_dim {
        return Err(Error::DimensionMismatch {
            expected: local_dim,
            actual: local.dim(),
        });
    }
    let total: usize = dims.iter().product();
    let layout = crate::state::FactorLayout::new(dims, factors)?;
    let mut out = DMatrix::zeros(total, total);
    for rest in 0..layout.rest_count() {
        for a in 0..local_dim {
            let row = layout.global_index(rest, a);
            for b in 0..local_dim {
                let col = layout.global_index(rest, b);
                out[(row, col)] = local.matrix()[(a, b)];
            }
        }
    }
    Ok(Operator {
        matrix: out,
        hermitian: local.hermitian,
    })
}

/// Embeds a single-factor operator at `factor` of `register`.
pub fn embed(local: &Operator, factor: usize, register: &SpinRegister) -> Result<Operator> {
    embed_factors(local, &[factor], &register.dims())
}

/// Embedded spin component at system site `site`.
pub fn site_component(register: &SpinRegister, site: usize, axis: Axis) -> Result<Operator> {
    let op = spin_component(register.spin(), axis, register.convention())?;
    embed(&op, register.site(site)?, register)
}
