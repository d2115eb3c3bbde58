//! Projective measurement of single factors: spectra, projectors, Born rule, collapse.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{eigenbasis, embed_factors, Operator};
use crate::spin::{Axis, Convention, Spin, SpinRegister};
use crate::state::{apply_factors, StateVector};
use crate::C64;

/// Window outside `[0, 1]` that is clamped rather than rejected.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Branches at or below this probability cannot be collapsed onto.
pub const COLLAPSE_EPSILON: f64 = 1e-14;

/// Eigenvalues closer than this are treated as one degenerate level.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

/// A Hermitian single-factor observable split into its distinct eigenvalues
/// (descending) and the matching local spectral projectors.
#[derive(Clone, Debug)]
pub struct LocalObservable {
    values: Vec<f64>,
    projectors: Vec<DMatrix<C64>>,
}

impl LocalObservable {
    /// `S^a` (or `σ^a`) with projectors `|m⟩_a⟨m|_a`.
    pub fn spin(spin: Spin, axis: Axis, convention: Convention) -> Result<Self> {
        let values = convention.eigenvalues(spin)?;
        let basis = eigenbasis(spin, axis);
        let projectors = (0..spin.levels())
            .map(|k| {
                let col = basis.column(k);
                col * col.adjoint()
            })
            .collect();
        Ok(LocalObservable { values, projectors })
    }

    /// The spin component measured on any site of `register`.
    pub fn for_register(register: &SpinRegister, axis: Axis) -> Self {
        Self::spin(register.spin(), axis, register.convention()).expect("convention validated at construction")
    }

    /// Any Hermitian matrix; eigenvalues within [`SPECTRUM_TOLERANCE`] are grouped.
    pub fn from_hermitian(op: &Operator) -> Result<Self> {
        let checked = Operator::hermitian(op.matrix().clone())?;
        let eig = checked.matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let d = checked.dim();
        let mut values: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for k in order {
            let e = eig.eigenvalues[k];
            match values.last() {
                Some(&last) if (last - e).abs() <= SPECTRUM_TOLERANCE => members.last_mut().unwrap().push(k),
                _ => {
                    values.push(e);
                    members.push(vec![k]);
                }
            }
        }
        let projectors = members
            .iter()
            .map(|group| {
                let mut p = DMatrix::zeros(d, d);
                for &k in group {
                    let col = eig.eigenvectors.column(k);
                    p += col * col.adjoint();
                }
                p
            })
            .collect();
        for (v, group) in values.iter_mut().zip(&members) {
            *v = group.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / group.len() as f64;
        }
        Ok(LocalObservable { values, projectors })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn projector(&self, level: usize) -> &DMatrix<C64> {
        &self.projectors[level]
    }

    pub fn projectors(&self) -> &[DMatrix<C64>] {
        &self.projectors
    }

    /// Index of the level with eigenvalue `m`.
    pub fn level_of(&self, m: f64) -> Result<usize> {
        self.values
            .iter()
            .position(|&v| (v - m).abs() <= SPECTRUM_TOLERANCE)
            .ok_or(Error::NotInSpectrum { value: m })
    }

    /// `Σ_m m Π^m`.
    pub fn matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        self.values
            .iter()
            .zip(&self.projectors)
            .fold(DMatrix::zeros(d, d), |acc, (&v, p)| acc + p * C64::new(v, 0.0))
    }
}

/// Clamps a probability that is within [`PROBABILITY_CLAMP`] of `[0, 1]`.
pub fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || p < -PROBABILITY_CLAMP || p > 1.0 + PROBABILITY_CLAMP {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Embedded projector onto eigenvalue `m` of the `axis` component at system site `site`.
pub fn projector(register: &SpinRegister, site: usize, m: f64, axis: Axis) -> Result<Operator> {
    let obs = LocalObservable::for_register(register, axis);
    let level = obs.level_of(m)?;
    let local = Operator::hermitian(obs.projector(level).clone())?;
    embed_factors(&local, &[register.site(site)?], &register.dims())
}

fn norm_sqr(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Born probabilities of each level of `obs` measured on `factor`, in level order.
pub fn factor_probabilities(state: &StateVector, factor: usize, obs: &LocalObservable) -> Result<Vec<f64>> {
    obs.projectors
        .iter()
        .map(|p| {
            let v = apply_factors(state.amplitudes(), state.dims(), p, &[factor])?;
            clamp_probability(norm_sqr(&v))
        })
        .collect()
}

/// Born probabilities `m → ⟨ψ|Π^m|ψ⟩` for the `axis` component at a system site.
pub fn born_probabilities(
    state: &StateVector,
    register: &SpinRegister,
    site: usize,
    axis: Axis,
) -> Result<Vec<(f64, f64)>> {
    let obs = LocalObservable::for_register(register, axis);
    let probs = factor_probabilities(state, register.site(site)?, &obs)?;
    Ok(obs.values.iter().copied().zip(probs).collect())
}

/// Normalized projection onto `level` of `obs` at `factor`, with the global
/// phase fixed so the first nonzero amplitude is real and positive.
pub fn collapse_factor(
    state: &StateVector,
    factor: usize,
    obs: &LocalObservable,
    level: usize,
) -> Result<(StateVector, f64)> {
    let v = apply_factors(state.amplitudes(), state.dims(), obs.projector(level), &[factor])?;
    let probability = norm_sqr(&v);
    if probability <= COLLAPSE_EPSILON {
        return Err(Error::ZeroProbabilityBranch { probability });
    }
    let out = StateVector::normalized(v, state.dims().to_vec())?.fix_global_phase();
    Ok((out, probability.min(1.0)))
}

/// Collapse onto eigenvalue `m` of the `axis` component at a system site.
pub fn collapse(state: &StateVector, register: &SpinRegister, site: usize, axis: Axis, m: f64) -> Result<StateVector> {
    let obs = LocalObservable::for_register(register, axis);
    let level = obs.level_of(m)?;
    Ok(collapse_factor(state, register.site(site)?, &obs, level)?.0)
}

/// Joint probabilities of measuring every listed factor, in descending
/// lexicographic order of the level tuple (first listed factor most significant).
pub fn joint_probabilities(state: &StateVector, measured: &[(usize, &LocalObservable)]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    joint_recurse(state.amplitudes(), state.dims(), measured, &mut out)?;
    out.into_iter().map(clamp_probability).collect()
}

fn joint_recurse(
    v: &DVector<C64>,
    dims: &[usize],
    measured: &[(usize, &LocalObservable)],
    out: &mut Vec<f64>,
) -> Result<()> {
    match measured.split_first() {
        None => {
            out.push(norm_sqr(v));
            Ok(())
        }
        Some((&(factor, obs), rest)) => {
            for p in obs.projectors() {
                let projected = apply_factors(v, dims, p, &[factor])?;
                joint_recurse(&projected, dims, rest, out)?;
            }
            Ok(())
        }
    }
}
