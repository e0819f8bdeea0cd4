//! Coupling synthesis: the inverse-problem formula
//! `Λ_n(t) = -Ẇ / (2 √(n+1) √(1 - W²))` on a grid, the closed-form
//! couplings it produces for the cos² and deformed-summand targets, and
//! the removable-singularity rule used wherever `|W| = 1`.
//!
//! At `|W| = 1` numerator and denominator vanish together. Writing
//! `W = cos(2√(n+1) Θ)` gives the finite limit `|Θ̇| = √|Ẅ| / (2√(n+1))`,
//! which is applied whenever `1 - W² <= η²`; the sign is carried over from
//! the nearest regular grid neighbour.

use std::sync::Arc;

use crate::domain::{PhysicalParams, TimeGrid};
use crate::error::{Error, Result};
use crate::inversion::{locate, InversionJet, InversionTarget};

/// Default singularity threshold η.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Samples within this many grid steps of a regularized point are treated
/// as lying inside its window when residuals are judged.
pub const REGULARIZATION_WINDOW: usize = 3;

/// Slack on `|W| <= 1` before a target is rejected.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// Tolerance on the `W(t_start) = 1` precondition.
pub const INITIAL_STATE_TOL: f64 = 1e-9;

/// Radicands below this are reported as domain errors by the closed form.
pub const RADICAND_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Point {
    Regular(f64),
    /// Magnitude from the second-derivative limit; sign still to be fixed.
    Singular(f64),
}

fn synthesize_point(jet: &InversionJet, n: usize, eta: f64, t: f64) -> Result<Point> {
    if !(jet.value.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::Domain {
            t,
            reason: format!("|W| = {} exceeds 1; 1 - W² is negative", jet.value.abs()),
        });
    }
    let scale = 2.0 * ((n + 1) as f64).sqrt();
    let complement = jet.complement();
    if complement <= eta * eta {
        Ok(Point::Singular(jet.second_derivative.abs().sqrt() / scale))
    } else {
        Ok(Point::Regular(-jet.derivative / (scale * complement.sqrt())))
    }
}

fn sign_or_positive(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A coupling synthesized on a grid.
///
/// When the source target is analytic the coupling can also be evaluated
/// between grid points by re-applying the synthesis formula; otherwise
/// values are interpolated linearly.
#[derive(Debug, Clone)]
pub struct SynthesizedCoupling {
    grid: TimeGrid,
    values: Vec<f64>,
    regularized_points: Vec<usize>,
    n: usize,
    eta: f64,
    source: Option<Arc<InversionTarget>>,
}

impl SynthesizedCoupling {
    /// Wraps externally produced samples; evaluated by linear interpolation.
    pub fn from_samples(grid: TimeGrid, values: Vec<f64>, n: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coupling samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("coupling", format!("sample {i} is not finite")));
        }
        Ok(SynthesizedCoupling {
            grid,
            values,
            regularized_points: Vec::new(),
            n,
            eta: DEFAULT_ETA,
            source: None,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid indices where the removable-singularity rule was applied.
    pub fn regularized_points(&self) -> &[usize] {
        &self.regularized_points
    }

    pub fn sector(&self) -> usize {
        self.n
    }

    pub fn is_pointwise(&self) -> bool {
        self.source.is_some()
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match &self.source {
            Some(target) => {
                locate(&self.grid, t)?;
                let jet = target.jet(t)?;
                match synthesize_point(&jet, self.n, self.eta, t)? {
                    Point::Regular(v) => Ok(v),
                    Point::Singular(m) => Ok(sign_or_positive(-jet.derivative) * m),
                }
            }
            None => {
                let (i, frac) = locate(&self.grid, t)?;
                Ok(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
            }
        }
    }
}

/// A real, time-dependent coupling λ(t).
#[derive(Debug, Clone)]
pub enum CouplingProfile {
    Constant {
        lambda0: f64,
    },
    /// `λ₀ √(ζ t)`.
    SqrtTime {
        lambda0: f64,
        zeta: f64,
    },
    /// Closed-form coupling reproducing `cos²(Ω_n t / 2)` from `|e,n⟩`.
    CosSquaredClosedForm {
        n: usize,
        params: PhysicalParams,
        eta: f64,
    },
    /// Closed-form coupling reproducing one deformed coherent summand from `|e,n⟩`.
    DeformedGipaClosedForm {
        n: usize,
        params: PhysicalParams,
        eta: f64,
    },
    SynthesizedGrid(SynthesizedCoupling),
}

impl CouplingProfile {
    pub fn zero() -> Self {
        CouplingProfile::Constant { lambda0: 0.0 }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            CouplingProfile::Constant { lambda0 } => Ok(*lambda0),
            CouplingProfile::SqrtTime { lambda0, zeta } => {
                if t < 0.0 {
                    return Err(Error::OutOfRange {
                        t,
                        start: 0.0,
                        end: f64::INFINITY,
                    });
                }
                Ok(lambda0 * (zeta * t).sqrt())
            }
            CouplingProfile::CosSquaredClosedForm { n, params, eta } => {
                Ok(cos_squared_closed_form_with_eta(*n, params, t, *eta))
            }
            CouplingProfile::DeformedGipaClosedForm { n, params, eta } => {
                deformed_gipa_closed_form_with_eta(*n, params, t, *eta)
            }
            CouplingProfile::SynthesizedGrid(s) => s.value(t),
        }
    }

    /// Samples the profile on `grid`, returning the values and the indices
    /// where a removable singularity was regularized.
    pub fn sample(&self, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<usize>)> {
        match self {
            CouplingProfile::SynthesizedGrid(s) if s.grid == *grid => {
                Ok((s.values.clone(), s.regularized_points.clone()))
            }
            CouplingProfile::CosSquaredClosedForm { n, params, eta } => {
                let omega = params.rabi_frequency(*n).get();
                let mut singular = Vec::new();
                let values = (0..grid.len())
                    .map(|i| {
                        let (s, c) = (0.5 * omega * grid.time(i)).sin_cos();
                        if s * s * (1.0 + c * c) <= eta * eta {
                            singular.push(i);
                        }
                        cos_squared_closed_form_with_eta(*n, params, grid.time(i), *eta)
                    })
                    .collect();
                Ok((values, singular))
            }
            CouplingProfile::DeformedGipaClosedForm { n, params, eta } => {
                let mut singular = Vec::new();
                let values = (0..grid.len())
                    .map(|i| {
                        let t = grid.time(i);
                        if deformed_radicand(*n, params, t) <= eta * eta {
                            singular.push(i);
                        }
                        deformed_gipa_closed_form_with_eta(*n, params, t, *eta)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((values, singular))
            }
            _ => {
                let values = (0..grid.len())
                    .map(|i| self.value(grid.time(i)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((values, Vec::new()))
            }
        }
    }
}

/// Vacuum inverse-problem synthesis; identical to `gipa(target, 0, grid)`.
pub fn ipa(target: &InversionTarget, grid: &TimeGrid) -> Result<CouplingProfile> {
    gipa(target, 0, grid)
}

/// Generalized synthesis for an initial `|e,n⟩` state.
pub fn gipa(target: &InversionTarget, n: usize, grid: &TimeGrid) -> Result<CouplingProfile> {
    gipa_with_eta(target, n, grid, DEFAULT_ETA)
}

pub fn gipa_with_eta(
    target: &InversionTarget,
    n: usize,
    grid: &TimeGrid,
    eta: f64,
) -> Result<CouplingProfile> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid("eta", format!("must be > 0, got {eta}")));
    }
    if target.is_analytic() {
        target.params().require_resonance()?;
    }
    let w0 = target.eval(grid.t_start())?;
    if (w0 - 1.0).abs() > INITIAL_STATE_TOL {
        return Err(Error::invalid(
            "target",
            format!(
                "synthesis assumes an initially excited atom, but W({}) = {w0}",
                grid.t_start()
            ),
        ));
    }

    let points = (0..grid.len())
        .map(|i| {
            let t = grid.time(i);
            synthesize_point(&target.jet(t)?, n, eta, t)
        })
        .collect::<Result<Vec<_>>>()?;

    let regularized_points: Vec<usize> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| matches!(p, Point::Singular(_)).then_some(i))
        .collect();
    let values = points
        .iter()
        .enumerate()
        .map(|(i, p)| match *p {
            Point::Regular(v) => v,
            Point::Singular(m) => nearest_regular_sign(&points, i) * m,
        })
        .collect();

    let source = target.is_analytic().then(|| Arc::new(target.clone()));
    Ok(CouplingProfile::SynthesizedGrid(SynthesizedCoupling {
        grid: *grid,
        values,
        regularized_points,
        n,
        eta,
        source,
    }))
}

/// Sign of the closest regular neighbour of `i`; ties go to the left.
fn nearest_regular_sign(points: &[Point], i: usize) -> f64 {
    for d in 1..points.len() {
        let left = i.checked_sub(d).and_then(|k| points.get(k));
        let right = points.get(i + d);
        for p in [left, right].into_iter().flatten() {
            if let Point::Regular(v) = *p {
                return sign_or_positive(v);
            }
        }
        if i < d && i + d >= points.len() {
            break;
        }
    }
    1.0
}

/// Undoes the sign rectification of a synthesized coupling.
///
/// The synthesis formula returns `λ · sign(sin 2√(n+1)Θ)`, flipping sign at
/// every instant where `|W|` touches one. Walking the grid, each sample
/// takes whichever sign lies closer to the linear extrapolation of the two
/// preceding samples, which restores the continuous branch. The result is
/// evaluated by linear interpolation.
pub fn continue_sign_branch(coupling: &SynthesizedCoupling) -> SynthesizedCoupling {
    let v = &coupling.values;
    let mut out = Vec::with_capacity(v.len());
    for (i, &x) in v.iter().enumerate() {
        if i < 2 {
            out.push(x);
            continue;
        }
        let predicted = 2.0 * out[i - 1] - out[i - 2];
        if (x - predicted).abs() <= (-x - predicted).abs() {
            out.push(x);
        } else {
            out.push(-x);
        }
    }
    SynthesizedCoupling {
        grid: coupling.grid,
        values: out,
        regularized_points: coupling.regularized_points.clone(),
        n: coupling.n,
        eta: coupling.eta,
        source: None,
    }
}

/// Closed-form coupling for the `cos²(Ω_n t / 2)` target:
/// `λ₀ sin(Ω_n t) / (2 √(1 - cos⁴(Ω_n t / 2)))`.
pub fn cos_squared_closed_form(n: usize, params: &PhysicalParams, t: f64) -> f64 {
    cos_squared_closed_form_with_eta(n, params, t, DEFAULT_ETA)
}

fn cos_squared_closed_form_with_eta(n: usize, params: &PhysicalParams, t: f64, eta: f64) -> f64 {
    let omega = params.rabi_frequency(n).get();
    let (s, c) = (0.5 * omega * t).sin_cos();
    let sin_full = 2.0 * s * c;
    // 1 - cos⁴ = sin² (1 + cos²)
    let radicand = s * s * (1.0 + c * c);
    if radicand <= eta * eta {
        let second = 0.5 * omega * omega * (c * c - s * s);
        let magnitude = second.abs().sqrt() / (2.0 * ((n + 1) as f64).sqrt());
        return sign_or_positive(sin_full) * magnitude;
    }
    params.lambda0 * sin_full / (2.0 * radicand.sqrt())
}

/// `1 - W_n²` for the deformed summand, including the `(ε⟨n⟩)²` term.
fn deformed_radicand(n: usize, params: &PhysicalParams, t: f64) -> f64 {
    let e = params.deformation_strength();
    let a = params.rabi_frequency(n).get() * t;
    let b = params.rabi_frequency(n + 2).get() * t;
    let (sa, ca) = a.sin_cos();
    let cb = b.cos();
    let gap = cb - ca;
    sa * sa - 2.0 * e * ca * gap - e * e * gap * gap
}

fn deformed_numerator(n: usize, params: &PhysicalParams, t: f64) -> f64 {
    let e = params.deformation_strength();
    let sa = (params.rabi_frequency(n).get() * t).sin();
    let sb = (params.rabi_frequency(n + 2).get() * t).sin();
    let ratio = ((n + 3) as f64 / (n + 1) as f64).sqrt();
    params.lambda0 * (sa - e * (sa - ratio * sb))
}

/// Coupling that reproduces the deformed coherent summand
/// `cos(Ω_n t) + ε⟨n⟩[cos(Ω_{n+2} t) - cos(Ω_n t)]` from `|e,n⟩`.
///
/// The radicand is the exact `1 - W_n²`, so this agrees with [`gipa`]
/// applied to the summand to rounding error. See
/// [`deformed_gipa_first_order`] for the variant linearised in ε.
pub fn deformed_gipa_closed_form(n: usize, params: &PhysicalParams, t: f64) -> Result<f64> {
    deformed_gipa_closed_form_with_eta(n, params, t, DEFAULT_ETA)
}

pub fn deformed_gipa_closed_form_with_eta(
    n: usize,
    params: &PhysicalParams,
    t: f64,
    eta: f64,
) -> Result<f64> {
    deformed_coupling(n, params, t, eta, deformed_radicand(n, params, t))
}

/// Same coupling with the radicand truncated at first order in ε⟨n⟩,
/// `1 - cos²(Ω_n t) - 2ε⟨n⟩[cos(Ω_n t) cos(Ω_{n+2} t) - cos²(Ω_n t)]`.
/// Differs from [`deformed_gipa_closed_form`] at O((ε⟨n⟩)²) away from
/// `|W| = 1`; close to those points the radicand is itself O(ε⟨n⟩) and the
/// gap is first order.
pub fn deformed_gipa_first_order(n: usize, params: &PhysicalParams, t: f64) -> Result<f64> {
    let e = params.deformation_strength();
    let a = params.rabi_frequency(n).get() * t;
    let b = params.rabi_frequency(n + 2).get() * t;
    let (sa, ca) = a.sin_cos();
    let radicand = sa * sa - 2.0 * e * ca * (b.cos() - ca);
    deformed_coupling(n, params, t, DEFAULT_ETA, radicand)
}

fn deformed_coupling(
    n: usize,
    params: &PhysicalParams,
    t: f64,
    eta: f64,
    radicand: f64,
) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::OutOfRange {
            t,
            start: 0.0,
            end: f64::INFINITY,
        });
    }
    if radicand < RADICAND_FLOOR {
        return Err(Error::Domain {
            t,
            reason: format!(
                "negative radicand {radicand} for n = {n}, eps*<n> = {}",
                params.deformation_strength()
            ),
        });
    }
    let numerator = deformed_numerator(n, params, t);
    if radicand <= eta * eta {
        let e = params.deformation_strength();
        let wa = params.rabi_frequency(n).get();
        let wb = params.rabi_frequency(n + 2).get();
        let second = -(1.0 - e) * wa * wa * (wa * t).cos() - e * wb * wb * (wb * t).cos();
        let magnitude = second.abs().sqrt() / (2.0 * ((n + 1) as f64).sqrt());
        return Ok(sign_or_positive(numerator) * magnitude);
    }
    Ok(numerator / radicand.sqrt())
}

/// Pointwise difference `a - b` of two couplings on `grid`.
pub fn delta_lambda(
    profile_a: &CouplingProfile,
    profile_b: &CouplingProfile,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let (a, _) = profile_a.sample(grid)?;
    let (b, _) = profile_b.sample(grid)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}
