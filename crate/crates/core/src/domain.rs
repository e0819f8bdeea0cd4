//! Shared domain types: physical parameters, uniform time grids, photon
//! statistics of the initial cavity field and Rabi frequencies.

use std::fmt;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Default truncation tolerance for the photon-number series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Deformation parameters above this value are rejected outright.
pub const EPSILON_HARD_LIMIT: f64 = 1e-2;

/// Working upper bound for the deformation parameter; larger values are
/// accepted with a warning.
pub const EPSILON_WORKING_BOUND: f64 = 5e-4;

/// Physical parameters shared by every model in the crate.
///
/// `lambda0`, `zeta` and `detuning` carry units of inverse time, `epsilon`
/// and `mean_n` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub lambda0: f64,
    pub zeta: f64,
    pub epsilon: f64,
    pub mean_n: f64,
    pub detuning: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            lambda0: 1.0,
            zeta: 1.0,
            epsilon: 5e-4,
            mean_n: 5.0,
            detuning: 0.0,
        }
    }
}

/// Non-fatal parameter diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamWarning {
    EpsilonAboveWorkingBound(f64),
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::EpsilonAboveWorkingBound(eps) => write!(
                f,
                "epsilon = {eps} exceeds the working bound {EPSILON_WORKING_BOUND}; \
                 first-order deformation formulas may be inaccurate"
            ),
        }
    }
}

impl PhysicalParams {
    /// Checks the parameter bounds. Returns warnings for values that are
    /// legal but outside the regime the deformation formulas target.
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(Error::invalid("lambda0", format!("must be > 0, got {}", self.lambda0)));
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(Error::invalid("zeta", format!("must be > 0, got {}", self.zeta)));
        }
        if !(self.mean_n.is_finite() && self.mean_n >= 0.0) {
            return Err(Error::invalid("mean_n", format!("must be >= 0, got {}", self.mean_n)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid("epsilon", format!("must be >= 0, got {}", self.epsilon)));
        }
        if self.epsilon > EPSILON_HARD_LIMIT {
            return Err(Error::invalid(
                "epsilon",
                format!("{} exceeds the hard limit {EPSILON_HARD_LIMIT}", self.epsilon),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        let mut warnings = Vec::new();
        if self.epsilon > EPSILON_WORKING_BOUND {
            warnings.push(ParamWarning::EpsilonAboveWorkingBound(self.epsilon));
        }
        Ok(warnings)
    }

    /// Synthesis and propagation are only defined at resonance.
    pub fn require_resonance(&self) -> Result<()> {
        if self.detuning != 0.0 {
            return Err(Error::invalid(
                "detuning",
                format!("synthesis and propagation require resonance, got {}", self.detuning),
            ));
        }
        Ok(())
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        PhysicalParams { epsilon, ..self }
    }

    pub fn undeformed(self) -> Self {
        self.with_epsilon(0.0)
    }

    pub fn rabi_frequency(&self, n: usize) -> RabiFrequency {
        rabi_frequency(self, n)
    }

    /// ε⟨n⟩, the coefficient of the first-order deformation correction.
    pub fn deformation_strength(&self) -> f64 {
        self.epsilon * self.mean_n
    }
}

/// Vacuum Rabi frequency of the n-photon sector, `2 λ₀ √(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RabiFrequency(f64);

impl RabiFrequency {
    pub fn get(self) -> f64 {
        self.0
    }
}

pub fn rabi_frequency(params: &PhysicalParams, n: usize) -> RabiFrequency {
    RabiFrequency(2.0 * params.lambda0 * ((n + 1) as f64).sqrt())
}

/// A uniform, strictly increasing time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::invalid("grid", "endpoints must be finite"));
        }
        if n_samples < 2 {
            return Err(Error::invalid(
                "samples",
                format!("need at least 2 samples, got {n_samples}"),
            ));
        }
        if t_end <= t_start {
            return Err(Error::invalid(
                "grid",
                format!("t_end ({t_end}) must exceed t_start ({t_start})"),
            ));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            n_samples,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn step(&self) -> f64 {
        self.span() / (self.n_samples - 1) as f64
    }

    /// Time of sample `i`. The last sample is exactly `t_end`.
    pub fn time(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_samples);
        if i + 1 == self.n_samples {
            self.t_end
        } else {
            self.t_start + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }

    /// True when `i` lies within `radius` samples of any index in `indices`.
    pub fn near_any(i: usize, indices: &[usize], radius: usize) -> bool {
        indices.iter().any(|&k| i.abs_diff(k) <= radius)
    }
}

/// Photon-number distribution of the initial cavity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonStatistics {
    Fock(usize),
    /// Coherent state with mean photon number `mean`.
    Poisson { mean: f64 },
    /// Thermal state with mean photon number `mean`.
    BoseEinstein { mean: f64 },
}

impl PhotonStatistics {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhotonStatistics::Fock(_) => Ok(()),
            PhotonStatistics::Poisson { mean } | PhotonStatistics::BoseEinstein { mean } => {
                if mean.is_finite() && mean >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("mean_n", format!("must be >= 0, got {mean}")))
                }
            }
        }
    }

    /// Natural log of P_n; `-inf` where the probability is zero.
    pub fn ln_weight(&self, n: usize) -> f64 {
        let k = n as f64;
        match *self {
            PhotonStatistics::Fock(m) => {
                if n == m {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PhotonStatistics::Poisson { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                k * mean.ln() - mean - ln_gamma(k + 1.0)
            }
            PhotonStatistics::BoseEinstein { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                k * mean.ln() - (k + 1.0) * mean.ln_1p()
            }
        }
    }

    /// Probability P_n, evaluated in log space.
    pub fn weight(&self, n: usize) -> f64 {
        self.ln_weight(n).exp()
    }

    /// Smallest N whose cumulative mass reaches `1 - tail_tol`.
    pub fn truncation_index(&self, tail_tol: f64) -> Result<usize> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::invalid(
                "tail_tol",
                format!("must lie in (0, 1), got {tail_tol}"),
            ));
        }
        self.validate()?;
        match *self {
            PhotonStatistics::Fock(m) => Ok(m),
            PhotonStatistics::Poisson { .. } => {
                let target = 1.0 - tail_tol;
                let mut cumulative = 0.0;
                let mut n = 0;
                loop {
                    cumulative += self.weight(n);
                    if cumulative >= target {
                        return Ok(n);
                    }
                    n += 1;
                }
            }
            PhotonStatistics::BoseEinstein { mean } => {
                if mean == 0.0 {
                    return Ok(0);
                }
                // Tail mass beyond N is q^(N+1) with q = <n>/(<n>+1).
                let ln_q = mean.ln() - mean.ln_1p();
                let tail = |n: usize| ((n + 1) as f64 * ln_q).exp();
                let mut n = ((tail_tol.ln() / ln_q).ceil() as usize).saturating_sub(1);
                while n > 0 && tail(n - 1) <= tail_tol {
                    n -= 1;
                }
                while tail(n) > tail_tol {
                    n += 1;
                }
                Ok(n)
            }
        }
    }

    /// Weights `P_0..=P_N` truncated at `tail_tol` and renormalised to sum
    /// to one, so that every series built on them starts exactly at W = 1.
    pub fn truncated_weights(&self, tail_tol: f64) -> Result<Vec<f64>> {
        let last = self.truncation_index(tail_tol)?;
        let mut weights: Vec<f64> = (0..=last).map(|n| self.weight(n)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(weights)
    }

    /// Most probable photon number within the truncated support.
    pub fn modal_index(&self, tail_tol: f64) -> Result<usize> {
        let last = self.truncation_index(tail_tol)?;
        // P_{k-1} = P_k exactly when <n> = k, so near-equal log weights tie.
        let mut best = 0;
        for n in 1..=last {
            if self.ln_weight(n) > self.ln_weight(best) + 1e-12 {
                best = n;
            }
        }
        Ok(best)
    }
}
