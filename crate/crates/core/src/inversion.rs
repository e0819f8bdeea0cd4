//! Target population-inversion waveforms W(t) with exact time derivatives.
//!
//! Every analytic target except the √t-coupling waveform is a finite cosine
//! series `c₀ + Σ aₖ cos(ωₖ t)` with `c₀ + Σ aₖ = 1`, so one evaluator
//! serves them all. Writing `1 - W = Σ 2aₖ sin²(ωₖt/2)` and
//! `1 + W = 2c₀ + Σ 2aₖ cos²(ωₖt/2)` keeps `1 - W²` accurate to full
//! relative precision close to `|W| = 1`, where the coupling synthesis
//! divides by its square root.

use crate::domain::{PhotonStatistics, PhysicalParams, TimeGrid, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};

/// Which closed form (or sampled data set) a target represents.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// `cos(Ω_n t)`: the n-photon sector under constant coupling.
    ConstantCoupling(usize),
    /// `cos((4/3) λ₀ √(ζ t³))`: the response to `λ(t) = λ₀ √(ζ t)`.
    SqrtTime,
    /// `cos²(Ω_n t / 2)`: an inversion that never drops below zero.
    CosSquared(usize),
    /// Coherent-state collapse and revival, `Σ P_n cos(Ω_n t)`.
    CoherentSeries,
    /// Coherent-state inversion of the κ-deformed model.
    DeformedCoherentSeries,
    /// One bracketed summand of the deformed coherent series.
    DeformedSectorSummand(usize),
    /// Thermal field, `Σ P_n cos²(Ω_n t / 2)`.
    ThermalCosSquaredSeries,
    Sampled(SampledInversion),
}

/// W and its derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionJet {
    pub value: f64,
    pub derivative: f64,
    pub second_derivative: f64,
    /// `1 - W`, computed without cancellation for analytic targets.
    pub one_minus: f64,
    /// `1 + W`, computed without cancellation for analytic targets.
    pub one_plus: f64,
}

impl InversionJet {
    /// `1 - W²`.
    pub fn complement(&self) -> f64 {
        self.one_minus * self.one_plus
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
struct CosineSeries {
    offset: f64,
    /// (amplitude, angular frequency)
    terms: Vec<(f64, f64)>,
}

impl CosineSeries {
    fn jet(&self, t: f64) -> InversionJet {
        let mut value = self.offset;
        let mut derivative = 0.0;
        let mut second = 0.0;
        let mut one_minus = 0.0;
        let mut one_plus = 2.0 * self.offset;
        for &(a, w) in &self.terms {
            let (s, c) = (0.5 * w * t).sin_cos();
            let sin_full = 2.0 * s * c;
            let cos_full = c * c - s * s;
            value += a * cos_full;
            derivative -= a * w * sin_full;
            second -= a * w * w * cos_full;
            one_minus += 2.0 * a * s * s;
            one_plus += 2.0 * a * c * c;
        }
        InversionJet {
            value,
            derivative,
            second_derivative: second,
            one_minus,
            one_plus,
        }
    }
}

/// Inversion samples on a uniform grid with finite-difference derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInversion {
    grid: TimeGrid,
    values: Vec<f64>,
    node_derivative: Vec<f64>,
    node_second: Vec<f64>,
}

impl SampledInversion {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("sample {i} is not finite")));
        }
        let node_derivative = first_differences(&values, grid.step());
        let node_second = second_differences(&values, grid.step());
        Ok(SampledInversion {
            grid,
            values,
            node_derivative,
            node_second,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn jet(&self, t: f64) -> Result<InversionJet> {
        let (i, frac) = locate(&self.grid, t)?;
        let lerp = |v: &[f64]| v[i] + frac * (v[i + 1] - v[i]);
        let value = lerp(&self.values);
        Ok(InversionJet {
            value,
            derivative: lerp(&self.node_derivative),
            second_derivative: lerp(&self.node_second),
            one_minus: 1.0 - value,
            one_plus: 1.0 + value,
        })
    }
}

/// Finds the grid interval holding `t` and the fractional position inside
/// it. Times within a rounding margin of either end are clamped.
pub(crate) fn locate(grid: &TimeGrid, t: f64) -> Result<(usize, f64)> {
    let margin = 1e-12 * grid.span();
    if !(t >= grid.t_start() - margin && t <= grid.t_end() + margin) {
        return Err(Error::OutOfRange {
            t,
            start: grid.t_start(),
            end: grid.t_end(),
        });
    }
    let h = grid.step();
    let last = grid.len() - 2;
    let x = ((t - grid.t_start()) / h).max(0.0);
    let i = (x.floor() as usize).min(last);
    let frac = (x - i as f64).clamp(0.0, 1.0);
    Ok((i, frac))
}

/// Central differences, second-order one-sided at the ends.
pub(crate) fn first_differences(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    if n == 2 {
        let d = (v[1] - v[0]) / h;
        return vec![d, d];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

pub(crate) fn second_differences(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let h2 = h * h;
    (0..n)
        .map(|i| {
            if i == 0 {
                if n >= 4 {
                    (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
                } else {
                    (v[0] - 2.0 * v[1] + v[2]) / h2
                }
            } else if i == n - 1 {
                if n >= 4 {
                    (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2
                } else {
                    (v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) / h2
                }
            } else {
                (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2
            }
        })
        .collect()
}

/// A prescribed population inversion W(t).
#[derive(Debug, Clone, PartialEq)]
pub struct InversionTarget {
    kind: TargetKind,
    params: PhysicalParams,
    series: CosineSeries,
    truncation: Option<usize>,
}

impl InversionTarget {
    pub fn new(kind: TargetKind, params: PhysicalParams) -> Result<Self> {
        Self::with_tail_tol(kind, params, DEFAULT_TAIL_TOL)
    }

    /// Builds a target; series variants are truncated where the remaining
    /// photon-number mass drops below `tail_tol`.
    pub fn with_tail_tol(kind: TargetKind, params: PhysicalParams, tail_tol: f64) -> Result<Self> {
        params.validate()?;
        let omega = |n: usize| params.rabi_frequency(n).get();
        let e = params.deformation_strength();
        let mut truncation = None;
        let mut weights = |stats: PhotonStatistics| -> Result<Vec<f64>> {
            let w = stats.truncated_weights(tail_tol)?;
            truncation = Some(w.len() - 1);
            Ok(w)
        };
        let series = match &kind {
            TargetKind::ConstantCoupling(n) => CosineSeries {
                offset: 0.0,
                terms: vec![(1.0, omega(*n))],
            },
            TargetKind::CosSquared(n) => CosineSeries {
                offset: 0.5,
                terms: vec![(0.5, omega(*n))],
            },
            TargetKind::DeformedSectorSummand(n) => CosineSeries {
                offset: 0.0,
                terms: vec![(1.0 - e, omega(*n)), (e, omega(n + 2))],
            },
            TargetKind::CoherentSeries => {
                let w = weights(PhotonStatistics::Poisson { mean: params.mean_n })?;
                CosineSeries {
                    offset: 0.0,
                    terms: w.iter().enumerate().map(|(n, &p)| (p, omega(n))).collect(),
                }
            }
            TargetKind::DeformedCoherentSeries => {
                let w = weights(PhotonStatistics::Poisson { mean: params.mean_n })?;
                CosineSeries {
                    offset: 0.0,
                    terms: w
                        .iter()
                        .enumerate()
                        .flat_map(|(n, &p)| [(p * (1.0 - e), omega(n)), (p * e, omega(n + 2))])
                        .collect(),
                }
            }
            TargetKind::ThermalCosSquaredSeries => {
                let w = weights(PhotonStatistics::BoseEinstein { mean: params.mean_n })?;
                CosineSeries {
                    offset: 0.5,
                    terms: w
                        .iter()
                        .enumerate()
                        .map(|(n, &p)| (0.5 * p, omega(n)))
                        .collect(),
                }
            }
            TargetKind::SqrtTime | TargetKind::Sampled(_) => CosineSeries::default(),
        };
        Ok(InversionTarget {
            kind,
            params,
            series,
            truncation,
        })
    }

    pub fn constant_coupling(n: usize, params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::ConstantCoupling(n), params)
    }

    pub fn sqrt_time(params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::SqrtTime, params)
    }

    pub fn cos_squared(n: usize, params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::CosSquared(n), params)
    }

    pub fn coherent_series(params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::CoherentSeries, params)
    }

    pub fn deformed_coherent_series(params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::DeformedCoherentSeries, params)
    }

    pub fn deformed_sector_summand(n: usize, params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::DeformedSectorSummand(n), params)
    }

    pub fn thermal_cos_squared_series(params: PhysicalParams) -> Result<Self> {
        Self::new(TargetKind::ThermalCosSquaredSeries, params)
    }

    pub fn sampled(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        let data = SampledInversion::new(grid, values)?;
        Ok(InversionTarget {
            kind: TargetKind::Sampled(data),
            params: PhysicalParams::default(),
            series: CosineSeries::default(),
            truncation: None,
        })
    }

    pub fn kind(&self) -> &TargetKind {
        &self.kind
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// Last photon number kept in a series target.
    pub fn truncation_index(&self) -> Option<usize> {
        self.truncation
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, TargetKind::Sampled(_))
    }

    /// W, Ẇ, Ẅ, 1-W and 1+W at `t`.
    pub fn jet(&self, t: f64) -> Result<InversionJet> {
        match &self.kind {
            TargetKind::Sampled(data) => data.jet(t),
            _ if !(t >= 0.0) => Err(Error::OutOfRange {
                t,
                start: 0.0,
                end: f64::INFINITY,
            }),
            TargetKind::SqrtTime => Ok(self.sqrt_time_jet(t)),
            _ => Ok(self.series.jet(t)),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t)?.value)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t)?.derivative)
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t)?.second_derivative)
    }

    /// Samples W on every grid point.
    pub fn sample(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        (0..grid.len()).map(|i| self.eval(grid.time(i))).collect()
    }

    fn sqrt_time_jet(&self, t: f64) -> InversionJet {
        // phase φ = (4/3) r t^{3/2} with r = λ₀ √ζ
        let rate = self.params.lambda0 * self.params.zeta.sqrt();
        let root = t.sqrt();
        let phase = 4.0 / 3.0 * rate * t * root;
        let phase_dot = 2.0 * rate * root;
        let (s, c) = phase.sin_cos();
        let (hs, hc) = (0.5 * phase).sin_cos();
        // sin φ · φ̈ → 0 as t → 0 even though φ̈ = r/√t diverges
        let curvature = if t > 0.0 { s * rate / root } else { 0.0 };
        InversionJet {
            value: c,
            derivative: -s * phase_dot,
            second_derivative: -c * phase_dot * phase_dot - curvature,
            one_minus: 2.0 * hs * hs,
            one_plus: 2.0 * hc * hc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    fn all_analytic(p: PhysicalParams) -> Vec<InversionTarget> {
        vec![
            InversionTarget::constant_coupling(0, p).unwrap(),
            InversionTarget::constant_coupling(3, p).unwrap(),
            InversionTarget::sqrt_time(p).unwrap(),
            InversionTarget::cos_squared(5, p).unwrap(),
            InversionTarget::coherent_series(p).unwrap(),
            InversionTarget::deformed_coherent_series(p).unwrap(),
            InversionTarget::deformed_sector_summand(0, p).unwrap(),
            InversionTarget::deformed_sector_summand(4, p).unwrap(),
            InversionTarget::thermal_cos_squared_series(p).unwrap(),
        ]
    }

    #[test]
    fn sqrt_time_starts_excited() {
        let t = InversionTarget::sqrt_time(params()).unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 1.0);
        assert_eq!(t.derivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_time_derivative_against_central_difference() {
        let t = InversionTarget::sqrt_time(params()).unwrap();
        let d = t.derivative(1.0).unwrap();
        assert!((d + 2.0 * (4.0f64 / 3.0).sin()).abs() < 1e-14);
        let h = 1e-6;
        let fd = (t.eval(1.0 + h).unwrap() - t.eval(1.0 - h).unwrap()) / (2.0 * h);
        assert!((d - fd).abs() < 1e-8);
    }

    #[test]
    fn coherent_series_vacuum_limit() {
        let p = PhysicalParams { mean_n: 0.0, ..params() };
        let t = InversionTarget::coherent_series(p).unwrap();
        assert_eq!(t.truncation_index(), Some(0));
        assert!(t.eval(PI / 4.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn coherent_series_golden_value() {
        // Brute-force sum over n <= 200 in 40-digit arithmetic.
        let t = InversionTarget::coherent_series(params()).unwrap();
        let golden = 0.074_017_238_203_576_558_787;
        assert!((t.eval(1.0).unwrap() - golden).abs() < 1e-11);
    }

    #[test]
    fn deformed_series_at_zero_epsilon_is_coherent_series() {
        let p = params().undeformed();
        let a = InversionTarget::deformed_coherent_series(p).unwrap();
        let b = InversionTarget::coherent_series(p).unwrap();
        let grid = TimeGrid::new(0.0, 25.0, 1000).unwrap();
        for t in grid.times() {
            assert!((a.eval(t).unwrap() - b.eval(t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn simple_derivatives_at_origin() {
        let t = InversionTarget::constant_coupling(0, params()).unwrap();
        assert_eq!(t.derivative(0.0).unwrap(), 0.0);
        let s = InversionTarget::deformed_sector_summand(0, params()).unwrap();
        assert_eq!(s.derivative(0.0).unwrap(), 0.0);
        assert_eq!(s.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn starts_at_unity() {
        for target in all_analytic(params()) {
            assert!((target.eval(0.0).unwrap() - 1.0).abs() < 1e-14, "{:?}", target.kind());
            assert_eq!(target.jet(0.0).unwrap().one_minus, 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for target in all_analytic(params()) {
            for i in 1..=200 {
                let t = 25.0 * i as f64 / 200.0;
                let jet = target.jet(t).unwrap();
                let fd = (target.eval(t + h).unwrap() - target.eval(t - h).unwrap()) / (2.0 * h);
                let tol = 1e-6 * (1.0 + jet.derivative.abs());
                assert!(
                    (jet.derivative - fd).abs() <= tol,
                    "{:?} t={t} d={} fd={fd}",
                    target.kind(),
                    jet.derivative
                );
                let fd2 = (target.derivative(t + h).unwrap() - target.derivative(t - h).unwrap())
                    / (2.0 * h);
                assert!(
                    (jet.second_derivative - fd2).abs() <= 1e-5 * (1.0 + fd2.abs()),
                    "{:?} t={t}",
                    target.kind()
                );
            }
        }
    }

    #[test]
    fn bounded_and_consistent_complement() {
        for target in all_analytic(params()) {
            for i in 0..5000 {
                let t = 25.0 * i as f64 / 4999.0;
                let jet = target.jet(t).unwrap();
                assert!(jet.value.abs() <= 1.0 + 1e-12);
                assert!((jet.one_minus - (1.0 - jet.value)).abs() < 1e-13);
                assert!((jet.one_plus - (1.0 + jet.value)).abs() < 1e-13);
                assert!(jet.complement() >= 0.0);
            }
        }
    }

    #[test]
    fn deformation_is_first_order() {
        let grid = TimeGrid::new(0.0, 25.0, 2001).unwrap();
        let base = InversionTarget::coherent_series(params()).unwrap().sample(&grid).unwrap();
        let max_diff = |eps: f64| {
            let d = InversionTarget::deformed_coherent_series(params().with_epsilon(eps))
                .unwrap()
                .sample(&grid)
                .unwrap();
            d.iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = max_diff(5e-4) / max_diff(2.5e-4);
        assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn thermal_series_is_nonnegative() {
        let t = InversionTarget::thermal_cos_squared_series(params()).unwrap();
        assert_eq!(t.truncation_index(), Some(151));
        for i in 0..20000 {
            assert!(t.eval(i as f64 * 0.005).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sampled_interpolates_and_differentiates() {
        let grid = TimeGrid::new(0.0, 2.0, 2001).unwrap();
        let values: Vec<f64> = grid.times().iter().map(|t| (2.0 * t).cos()).collect();
        let s = InversionTarget::sampled(grid, values).unwrap();
        assert!(!s.is_analytic());
        assert!((s.eval(0.5).unwrap() - 1f64.cos()).abs() < 1e-6);
        assert!((s.derivative(0.5).unwrap() + 2.0 * 1f64.sin()).abs() < 1e-5);
        assert!((s.derivative(0.0).unwrap()).abs() < 1e-5);
        assert!((s.second_derivative(0.0).unwrap() + 4.0).abs() < 1e-4);
        assert!(matches!(s.eval(2.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.eval(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn sampled_rejects_length_mismatch() {
        let grid = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert!(matches!(
            InversionTarget::sampled(grid, vec![1.0; 4]),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn negative_time_rejected() {
        let t = InversionTarget::coherent_series(params()).unwrap();
        assert!(t.eval(-1.0).is_err());
    }
}
