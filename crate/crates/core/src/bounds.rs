//! Systematic and statistical error bounds, coupling-strength optimization and
//! sample-size scaling.
//!
//! The statistical bound carries a `1/n` per outcome: the count deviation
//! `±√n_m` becomes a frequency deviation `±√n_m / n`, so the bound falls like
//! `1/√n`. With expected counts `n P_m` the bound is `κ / √n` for a constant
//! `κ` per grid point, which is what [`BoundModel`] stores to make sample-size
//! sweeps cheap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::System;
use crate::oracle::{exact_correlation, CorrelationQuery};
use crate::protocols::cnimp::{amplification, cnimp_exact, cnimp_runs, cnimp_estimators, Cnimp, CnimpEstimates, PLANS};
use crate::protocols::estimator::FFactors;
use crate::protocols::snimp::{snimp_pair, Snimp, SnimpPair};
use crate::sampling::{finite_sample_estimator, stream_for, SampleRun, B1_STREAM, B2_STREAM};
use crate::C64;

/// Relative errors are undefined below this `|C|`.
pub const NORMALIZATION_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_sys: f64,
    pub eps_stat_bound: f64,
    pub eps_tot_bound: f64,
    pub measured_dev: Option<f64>,
    /// `|C|`.
    pub normalization: f64,
    pub relative: bool,
}

impl ErrorReport {
    pub fn absolute(eps_sys: f64, eps_stat_bound: f64, normalization: f64) -> Self {
        ErrorReport {
            eps_sys,
            eps_stat_bound,
            eps_tot_bound: eps_sys + eps_stat_bound,
            measured_dev: None,
            normalization,
            relative: false,
        }
    }

    pub fn with_measured(mut self, dev: f64) -> Self {
        self.measured_dev = Some(dev);
        self
    }

    /// Divides every error by `|C|`.
    pub fn to_relative(&self) -> Result<Self> {
        if self.relative {
            return Ok(*self);
        }
        let c = checked_normalization(self.normalization)?;
        Ok(ErrorReport {
            eps_sys: self.eps_sys / c,
            eps_stat_bound: self.eps_stat_bound / c,
            eps_tot_bound: self.eps_tot_bound / c,
            measured_dev: self.measured_dev.map(|d| d / c),
            normalization: self.normalization,
            relative: true,
        })
    }
}

fn checked_normalization(c: f64) -> Result<f64> {
    if c < NORMALIZATION_FLOOR {
        return Err(Error::Normalization { magnitude: c });
    }
    Ok(c)
}

/// `|C − C^λ|`.
pub fn systematic_error(exact: C64, estimate: C64) -> f64 {
    (exact - estimate).norm()
}

/// `(2s+1)/(2|λ|) Σ_m |w_m| (√n2_m/|f2| + √n1_m/|f1|) / n`.
///
/// `counts_b1`, `counts_b2` are observed or expected counts of the two runs and
/// `weights` the eigenvalue products `m_a m_b` of each outcome.
pub fn statistical_bound(
    counts_b1: &[f64],
    counts_b2: &[f64],
    weights: &[f64],
    n: f64,
    lambda: f64,
    levels: usize,
    factors: FFactors,
) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if counts_b1.len() != weights.len() || counts_b2.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: counts_b1.len().min(counts_b2.len()),
        });
    }
    let sum: f64 = weights
        .iter()
        .zip(counts_b1.iter().zip(counts_b2))
        .map(|(w, (n1, n2))| w.abs() * (n2.sqrt() / factors.f2.abs() + n1.sqrt() / factors.f1.abs()))
        .sum();
    Ok(levels as f64 / (2.0 * lambda.abs()) * sum / n)
}

/// Predictive bound from the expected counts `n P` of an exact sNIMP pair.
pub fn predictive_bound(pair: &SnimpPair, n: f64) -> Result<f64> {
    let c = &pair.components;
    let scaled = |p: &[f64]| p.iter().map(|x| x * n).collect::<Vec<_>>();
    statistical_bound(
        &scaled(pair.b1.probabilities()),
        &scaled(pair.b2.probabilities()),
        &pair.b1.weights(&[0, 1]),
        n,
        c.lambda,
        c.levels,
        c.factors,
    )
}

/// Bound from observed frequency tables.
pub fn empirical_bound(run_b1: &SampleRun, run_b2: &SampleRun, lambda: f64, levels: usize, factors: FFactors) -> Result<f64> {
    statistical_bound(
        &run_b1.table.counts_f64(),
        &run_b2.table.counts_f64(),
        &run_b1.table.weights(&[0, 1]),
        run_b1.n as f64,
        lambda,
        levels,
        factors,
    )
}

/// Full sNIMP error report at one `λ`, optionally with a seeded finite sample.
pub fn snimp_error_report(system: &System, base: &Snimp, n: u64, seed: Option<(u64, u64)>) -> Result<(ErrorReport, C64, Option<C64>)> {
    let exact = exact_correlation(system, &base.query)?;
    let pair = snimp_pair(system, base)?;
    let c = pair.components;
    let estimate = crate::protocols::estimator::assemble_estimator(&c)?;
    let stat = predictive_bound(&pair, n as f64)?;
    let mut report = ErrorReport::absolute(systematic_error(exact, estimate), stat, exact.norm());
    let mut sampled = None;
    if let Some((seed, point)) = seed {
        let r1 = SampleRun::draw(&pair.b1, n, seed, stream_for(point, B1_STREAM))?;
        let r2 = SampleRun::draw(&pair.b2, n, seed, stream_for(point, B2_STREAM))?;
        let cn = finite_sample_estimator(&r1, &r2, c.factors, c.lambda, c.levels)?;
        report = report.with_measured((cn - exact).norm());
        sampled = Some(cn);
    }
    Ok((report, estimate, sampled))
}

pub(crate) fn map_points<T: Send, F>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// `step, 2·step, …` up to `max` inclusive.
pub fn lambda_grid(step: f64, max: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= step) {
        return Err(Error::InvalidArgument(format!("bad grid: step {step}, max {max}")));
    }
    let count = (max / step + 1e-9).floor() as usize;
    Ok((1..=count).map(|k| k as f64 * step).collect())
}

/// `0, step, …` up to `max` inclusive.
pub fn grid_from_zero(step: f64, max: f64) -> Result<Vec<f64>> {
    let mut g = lambda_grid(step, max)?;
    g.insert(0, 0.0);
    Ok(g)
}

/// Default sNIMP grid: steps of 0.005 on `(0, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(0.005, 1.0).expect("valid grid")
}

/// Default cNIMP grid: steps of 0.01 on `[0, 1]` per coupling.
pub fn default_cnimp_grid() -> Vec<f64> {
    grid_from_zero(0.01, 1.0).expect("valid grid")
}

/// Relative total bound `sys_k + stat_k / √n` over a fixed grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundModel {
    /// `(λ1, λ2)`; `λ2` is `None` for sNIMP.
    pub points: Vec<(f64, Option<f64>)>,
    pub sys: Vec<f64>,
    /// Relative statistical bound at `n = 1`.
    pub stat_unit: Vec<f64>,
}

impl BoundModel {
    pub fn stat(&self, k: usize, n: f64) -> f64 {
        self.stat_unit[k] / n.sqrt()
    }

    pub fn total(&self, k: usize, n: f64) -> f64 {
        self.sys[k] + self.stat(k, n)
    }

    /// Grid argmin of the total bound; ties go to the first point.
    pub fn argmin(&self, n: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for k in 0..self.points.len() {
            let v = self.total(k, n);
            if v < best.1 {
                best = (k, v);
            }
        }
        best
    }
}

/// Precomputes the sNIMP bound model on `grid`.
pub fn snimp_bound_model(system: &System, base: &Snimp, grid: &[f64]) -> Result<BoundModel> {
    let exact = exact_correlation(system, &base.query)?;
    let norm = checked_normalization(exact.norm())?;
    let rows = map_points(grid.len(), |k| {
        let run = Snimp { lambda: grid[k], ..base.clone() };
        let pair = snimp_pair(system, &run)?;
        let estimate = crate::protocols::estimator::assemble_estimator(&pair.components)?;
        Ok((systematic_error(exact, estimate) / norm, predictive_bound(&pair, 1.0)? / norm))
    })?;
    Ok(BoundModel {
        points: grid.iter().map(|&l| (l, None)).collect(),
        sys: rows.iter().map(|r| r.0).collect(),
        stat_unit: rows.iter().map(|r| r.1).collect(),
    })
}

/// One sweep grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub lambda2: Option<f64>,
    pub n: u64,
    pub seed: Option<u64>,
    pub exact: C64,
    pub estimate: C64,
    pub sampled: Option<C64>,
    /// Relative errors.
    pub report: ErrorReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub points: Vec<SweepPoint>,
    /// Index of the grid argmin of the relative total bound.
    pub best: usize,
}

impl LambdaSweep {
    pub fn lambda_star(&self) -> f64 {
        self.points[self.best].lambda
    }

    pub fn min(&self) -> f64 {
        self.points[self.best].report.eps_tot_bound
    }
}

/// Relative error reports over `grid`; with a seed, every point also gets a
/// finite-sample estimate drawn on its own streams.
pub fn sweep_lambda(system: &System, base: &Snimp, n: u64, grid: &[f64], seed: Option<u64>) -> Result<LambdaSweep> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty coupling grid".into()));
    }
    let points = map_points(grid.len(), |k| {
        let run = Snimp { lambda: grid[k], ..base.clone() };
        let (report, estimate, sampled) = snimp_error_report(system, &run, n, seed.map(|s| (s, k as u64)))?;
        Ok(SweepPoint {
            lambda: grid[k],
            lambda2: None,
            n,
            seed,
            exact: exact_correlation(system, &base.query)?,
            estimate,
            sampled,
            report: report.to_relative()?,
        })
    })?;
    let mut best = 0;
    for (k, p) in points.iter().enumerate() {
        if p.report.eps_tot_bound < points[best].report.eps_tot_bound {
            best = k;
        }
    }
    Ok(LambdaSweep { points, best })
}

/// `(λ*, minimum relative total bound)` on `grid`.
pub fn lambda_star(system: &System, base: &Snimp, n: u64, grid: &[f64]) -> Result<(f64, f64)> {
    let model = snimp_bound_model(system, base, grid)?;
    let (k, v) = model.argmin(n as f64);
    Ok((grid[k], v))
}

/// `y = prefactor · x^exponent`, fitted by least squares on `log10` values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }

    /// The `x` at which the law reaches `y`.
    pub fn solve(&self, y: f64) -> f64 {
        (y / self.prefactor).powf(1.0 / self.exponent)
    }
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLaw> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("a power-law fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("power-law fits need positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("power-law fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(PowerLaw {
        exponent: slope,
        prefactor: 10f64.powf(intercept),
        r_squared,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NSweepRow {
    pub n: f64,
    pub lambda_star: f64,
    pub lambda2_star: Option<f64>,
    pub min: f64,
}

/// Bound minimum and its location for every sample size.
pub fn sweep_n(model: &BoundModel, ns: &[f64]) -> Vec<NSweepRow> {
    ns.iter()
        .map(|&n| {
            let (k, min) = model.argmin(n);
            NSweepRow {
                n,
                lambda_star: model.points[k].0,
                lambda2_star: model.points[k].1,
                min,
            }
        })
        .collect()
}

/// Power-law fit of the minimum against `n`.
pub fn fit_minima(rows: &[NSweepRow]) -> Result<PowerLaw> {
    let xs: Vec<f64> = rows.iter().map(|r| r.n).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.min).collect();
    fit_power_law(&xs, &ys)
}

/// Sample sizes `10^2 … 10^8`.
pub fn default_sample_sizes() -> Vec<f64> {
    (2..=8).map(|e| 10f64.powi(e)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CnimpTarget {
    C12,
    C13,
    C23,
}

impl CnimpTarget {
    pub const ALL: [CnimpTarget; 3] = [CnimpTarget::C12, CnimpTarget::C13, CnimpTarget::C23];

    pub fn name(self) -> &'static str {
        match self {
            CnimpTarget::C12 => "C(t1,t2)",
            CnimpTarget::C13 => "C(t1,t3)",
            CnimpTarget::C23 => "C(t2,t3)",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn pick(self, e: &CnimpEstimates) -> C64 {
        match self {
            CnimpTarget::C12 => e.c12,
            CnimpTarget::C13 => e.c13,
            CnimpTarget::C23 => e.c23,
        }
    }
}

/// Relative bound surfaces of the three cNIMP estimators over `grid × grid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnimpSurface {
    pub grid: Vec<f64>,
    pub exact: CnimpEstimates,
    pub models: Vec<BoundModel>,
}

impl CnimpSurface {
    pub fn model(&self, target: CnimpTarget) -> &BoundModel {
        &self.models[target.index()]
    }
}

/// Grid points where an estimator's amplification diverges get an infinite bound.
pub fn cnimp_error_surface(system: &System, query: &CorrelationQuery, grid: &[f64]) -> Result<CnimpSurface> {
    let exact = cnimp_exact(system, &Cnimp::new(*query, 1.0, 1.0))?;
    let norms = CnimpTarget::ALL.map(|t| checked_normalization(t.pick(&exact).norm()));
    let g = grid.len();
    let rows = map_points(g * g, |k| {
        let (l1, l2) = (grid[k / g], grid[k % g]);
        let runs = cnimp_runs(system, &Cnimp::new(*query, l1, l2))?;
        let dists = [&runs.run1, &runs.run2, &runs.run3];
        let amp = amplification(l1, l2);
        let estimates = if l1 != 0.0 && l2 != 0.0 {
            Some(cnimp_estimators(&runs, l1, l2)?)
        } else {
            None
        };
        let mut out = [(f64::INFINITY, f64::INFINITY); 3];
        for target in CnimpTarget::ALL {
            let k = target.index();
            if !amp[k].is_finite() {
                continue;
            }
            let plan = &PLANS[k];
            let estimate = match estimates {
                Some(e) => target.pick(&e),
                // the only finite estimator with a zero coupling is assembled directly
                None => C64::new(
                    dists[plan.re_run].correlate_registers(&plan.pair),
                    dists[plan.im_run].correlate_registers(&plan.pair),
                ) * amp[k],
            };
            let weights = dists[plan.re_run].weights(&plan.pair);
            let spread: f64 = weights
                .iter()
                .zip(dists[plan.re_run].probabilities().iter().zip(dists[plan.im_run].probabilities()))
                .map(|(w, (p, q))| w.abs() * (p.sqrt() + q.sqrt()))
                .sum();
            let norm = norms[k].clone()?;
            out[k] = (systematic_error(target.pick(&exact), estimate) / norm, amp[k].abs() * spread / norm);
        }
        Ok(out)
    })?;
    let points: Vec<(f64, Option<f64>)> = (0..g * g).map(|k| (grid[k / g], Some(grid[k % g]))).collect();
    let models = (0..3)
        .map(|t| BoundModel {
            points: points.clone(),
            sys: rows.iter().map(|r| r[t].0).collect(),
            stat_unit: rows.iter().map(|r| r[t].1).collect(),
        })
        .collect();
    Ok(CnimpSurface {
        grid: grid.to_vec(),
        exact,
        models,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub target: String,
    pub protocol: String,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Sample size per run at which the fitted minimum reaches the accuracy goal.
    pub n_per_sample: f64,
    /// Independent runs the estimator needs.
    pub samples: u64,
    pub total_measurements: f64,
}

/// Both estimators of `C(t1,t2)` and `C(t1,t3)` use two samples of `n` shots.
pub const SAMPLES_PER_ESTIMATOR: u64 = 2;

fn efficiency_row(target: CnimpTarget, protocol: &str, fit: PowerLaw, accuracy: f64) -> EfficiencyRow {
    let n = fit.solve(accuracy);
    EfficiencyRow {
        target: target.name().into(),
        protocol: protocol.into(),
        exponent: fit.exponent,
        prefactor: fit.prefactor,
        r_squared: fit.r_squared,
        n_per_sample: n,
        samples: SAMPLES_PER_ESTIMATOR,
        total_measurements: n * SAMPLES_PER_ESTIMATOR as f64,
    }
}

/// Sample sizes each protocol needs for relative accuracy `accuracy` on
/// `C(t1,t2)` and `C(t1,t3)`, extrapolated from power-law fits of the bound minima.
pub fn protocol_efficiency_compare(
    system: &System,
    query: &CorrelationQuery,
    accuracy: f64,
    ns: &[f64],
    snimp_grid: &[f64],
    cnimp_grid: &[f64],
) -> Result<Vec<EfficiencyRow>> {
    if !(accuracy > 0.0 && accuracy < 1.0) {
        return Err(Error::InvalidArgument(format!("accuracy must lie in (0, 1), got {accuracy}")));
    }
    let t3 = query
        .t3
        .ok_or_else(|| Error::InvalidQuery("the comparison needs a third time t3".into()))?;
    let surface = cnimp_error_surface(system, query, cnimp_grid)?;
    let mut rows = Vec::new();
    for (target, t_later) in [(CnimpTarget::C12, query.t2), (CnimpTarget::C13, t3)] {
        let q = CorrelationQuery { t2: t_later, t3: None, ..*query };
        let snimp = snimp_bound_model(system, &Snimp::new(q, 1.0, crate::protocols::CouplingChoice::B1), snimp_grid)?;
        rows.push(efficiency_row(target, "sNIMP", fit_minima(&sweep_n(&snimp, ns))?, accuracy));
        rows.push(efficiency_row(target, "cNIMP", fit_minima(&sweep_n(surface.model(target), ns))?, accuracy));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HamiltonianSpec, SiteAngles, SystemStateSpec};
    use crate::oracle::{closed_form_systematic_error, TwoSpinParams};
    use crate::protocols::CouplingChoice;
    use crate::spin::{Axis, SpinRegister};
    use std::f64::consts::PI;

    fn two_spins() -> (System, TwoSpinParams) {
        let p = TwoSpinParams { alpha1: PI / 3.0, alpha2: PI / 3.0, theta1: PI / 7.0, theta2: PI / 5.0, t1: 1.0, t2: 10.0 };
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let state = SystemStateSpec::Angles(vec![
            SiteAngles { alpha: p.alpha1, theta: p.theta1 },
            SiteAngles { alpha: p.alpha2, theta: p.theta2 },
        ]);
        (System::new(&reg, &HamiltonianSpec::IsingXx, &state).unwrap(), p)
    }

    fn base(p: &TwoSpinParams) -> Snimp {
        Snimp::new(CorrelationQuery::new(0, Axis::Z, p.t1, 1, Axis::Z, p.t2), 0.1, CouplingChoice::B1)
    }

    #[test]
    fn grids() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[199], 1.0);
        assert!((g[83] - 0.42).abs() < 1e-15);
        assert_eq!(default_cnimp_grid().len(), 101);
    }

    #[test]
    fn zero_weight_outcome_gives_zero_bound() {
        let f = FFactors { f1: 2.0, f2: 2.0 };
        let b = statistical_bound(&[0.0, 10.0], &[0.0, 10.0], &[1.0, 0.0], 10.0, 0.3, 2, f).unwrap();
        assert_eq!(b, 0.0);
        assert_eq!(statistical_bound(&[1.0], &[1.0], &[1.0], 1.0, 0.0, 2, f), Err(Error::ZeroCoupling));
    }

    #[test]
    fn bound_scales_like_inverse_lambda_root_n() {
        let (sys, p) = two_spins();
        let pair = snimp_pair(&sys, &Snimp { lambda: 0.3, ..base(&p) }).unwrap();
        let b1 = predictive_bound(&pair, 1e4).unwrap();
        let b2 = predictive_bound(&pair, 4e4).unwrap();
        assert!((b1 / b2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn systematic_error_matches_closed_form() {
        let (sys, p) = two_spins();
        for lambda in [0.05, 0.42, 0.9] {
            let (r, _, _) = snimp_error_report(&sys, &Snimp { lambda, ..base(&p) }, 10_000, None).unwrap();
            assert!((r.eps_sys - closed_form_systematic_error(&p, lambda)).abs() < 1e-10);
        }
    }

    #[test]
    fn relative_systematic_error_increases() {
        let (sys, p) = two_spins();
        let model = snimp_bound_model(&sys, &base(&p), &lambda_grid(0.05, 1.0).unwrap()).unwrap();
        assert!(model.sys.windows(2).all(|w| w[1] > w[0]));
        // λ = 0.4
        assert!((model.sys[7] - (0.8 - 0.8_f64.sin()) / 0.8).abs() < 1e-10);
    }

    #[test]
    fn power_law_recovers_exact_exponent() {
        let xs = [1e2, 1e3, 1e4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
        assert!((fit.solve(0.03) - 1e4).abs() < 1e-6);
    }

    #[test]
    fn zero_correlation_has_no_relative_error() {
        let r = ErrorReport::absolute(0.1, 0.1, 0.0);
        assert!(matches!(r.to_relative(), Err(Error::Normalization { .. })));
    }

    #[test]
    fn sampled_sweep_is_reproducible() {
        let (sys, p) = two_spins();
        let grid = [0.2, 0.4];
        let a = sweep_lambda(&sys, &base(&p), 1000, &grid, Some(5)).unwrap();
        let b = sweep_lambda(&sys, &base(&p), 1000, &grid, Some(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.points[0].sampled != a.points[1].sampled);
    }
}
