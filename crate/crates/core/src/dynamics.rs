//! Forward propagation of the two-amplitude system in each Fock sector and
//! the weighted multi-sector pipeline built on top of it.
//!
//! In the sector spanned by `|e,n⟩` and `|g,n+1⟩` the resonant interaction
//! picture gives
//!
//! ```text
//! i Ċ_e = λ(t) √(n+1) C_g,    i Ċ_g = λ(t) √(n+1) C_e
//! ```
//!
//! which is integrated as four real equations. The amplitudes are never
//! renormalized, so `|C_e|² + |C_g|² - 1` measures integration error.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::{PhotonStatistics, TimeGrid, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::integrator::{Dopri5, IntegratorStats};
use crate::inversion::InversionTarget;
use crate::synth::{gipa_with_eta, CouplingProfile, DEFAULT_ETA, REGULARIZATION_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorState {
    pub n: usize,
    pub c_e: Complex64,
    pub c_g: Complex64,
}

impl SectorState {
    /// `|e,n⟩`.
    pub fn excited(n: usize) -> Self {
        SectorState {
            n,
            c_e: Complex64::new(1.0, 0.0),
            c_g: Complex64::new(0.0, 0.0),
        }
    }

    pub fn inversion(&self) -> f64 {
        self.c_e.norm_sqr() - self.c_g.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_g.norm_sqr()
    }

    fn to_real(self) -> [f64; 4] {
        [self.c_e.re, self.c_e.im, self.c_g.re, self.c_g.im]
    }

    fn from_real(n: usize, y: &[f64; 4]) -> Self {
        SectorState {
            n,
            c_e: Complex64::new(y[0], y[1]),
            c_g: Complex64::new(y[2], y[3]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SectorTrajectory {
    pub n: usize,
    pub grid: TimeGrid,
    pub states: Vec<SectorState>,
    pub inversion: Vec<f64>,
    pub stats: IntegratorStats,
}

impl SectorTrajectory {
    /// `max_t | |C_e|² + |C_g|² - 1 |`.
    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Propagates `|e,n⟩` under `coupling` and samples the result on `grid`.
pub fn propagate_sector(
    coupling: &CouplingProfile,
    n: usize,
    grid: &TimeGrid,
) -> Result<SectorTrajectory> {
    propagate_sector_with(coupling, n, grid, &Dopri5::default())
}

pub fn propagate_sector_with(
    coupling: &CouplingProfile,
    n: usize,
    grid: &TimeGrid,
    integrator: &Dopri5,
) -> Result<SectorTrajectory> {
    propagate_state_with(coupling, SectorState::excited(n), grid, integrator)
}

/// Propagates an arbitrary initial state of one sector.
pub fn propagate_state_with(
    coupling: &CouplingProfile,
    initial: SectorState,
    grid: &TimeGrid,
    integrator: &Dopri5,
) -> Result<SectorTrajectory> {
    let n = initial.n;
    let root = ((n + 1) as f64).sqrt();
    let rhs = |t: f64, y: &[f64; 4], dy: &mut [f64; 4]| -> Result<()> {
        let g = coupling.value(t)? * root;
        dy[0] = g * y[3];
        dy[1] = -g * y[2];
        dy[2] = g * y[1];
        dy[3] = -g * y[0];
        Ok(())
    };
    let (ys, stats) = integrator.integrate(rhs, initial.to_real(), grid)?;
    let states: Vec<SectorState> = ys.iter().map(|y| SectorState::from_real(n, y)).collect();
    let inversion = states.iter().map(SectorState::inversion).collect();
    Ok(SectorTrajectory {
        n,
        grid: *grid,
        states,
        inversion,
        stats,
    })
}

/// Independent reference for the propagated inversion.
///
/// With a real coupling and an excited initial state the sector solution is
/// `W_n(t) = cos(2√(n+1) ∫₀ᵗ λ)`; the integral is evaluated by adaptive
/// Simpson quadrature on each grid interval.
pub fn phase_integral_oracle(
    coupling: &CouplingProfile,
    n: usize,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let scale = 2.0 * ((n + 1) as f64).sqrt();
    let tol = 1e-14;
    let f = |t: f64| coupling.value(t);
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    out.push(1.0);
    for i in 1..grid.len() {
        let (a, b) = (grid.time(i - 1), grid.time(i));
        phase += simpson(&f, a, b, tol)?;
        out.push((scale * phase).cos());
    }
    Ok(out)
}

fn simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (fa, fb) = (f(a)?, f(b)?);
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below this the difference is rounding noise and halving tol would
    // split every interval down to full depth.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Knobs shared by every pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub tail_tol: f64,
    pub eta: f64,
    pub integrator: Dopri5,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            tail_tol: DEFAULT_TAIL_TOL,
            eta: DEFAULT_ETA,
            integrator: Dopri5::default(),
        }
    }
}

/// Per-sector outcome of a pipeline run.
#[derive(Debug, Clone)]
pub struct SectorReport {
    pub n: usize,
    pub weight: f64,
    pub target_w: Vec<f64>,
    pub coupling: Vec<f64>,
    pub regularized_points: Vec<usize>,
    pub inversion: Vec<f64>,
    pub max_norm_drift: f64,
}

/// Everything a scenario produces on its output grid.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub grid: TimeGrid,
    pub target_w: Vec<f64>,
    /// Coupling of the sector named by `coupling_sector`.
    pub coupling: Vec<f64>,
    pub coupling_sector: usize,
    pub reproduced_w: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Union over sectors, sorted.
    pub regularized_points: Vec<usize>,
    pub max_norm_drift: f64,
    pub sectors: Vec<SectorReport>,
}

impl ScenarioResult {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    pub fn in_regularization_window(&self, i: usize) -> bool {
        TimeGrid::near_any(i, &self.regularized_points, REGULARIZATION_WINDOW)
    }

    /// Largest residual excluding samples near a regularized point.
    pub fn max_abs_residual_outside_windows(&self) -> f64 {
        self.residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.in_regularization_window(*i))
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max)
    }

    fn from_sectors(grid: TimeGrid, sectors: Vec<SectorReport>, coupling_sector: usize) -> Self {
        let len = grid.len();
        let mut target_w = vec![0.0; len];
        let mut reproduced_w = vec![0.0; len];
        let mut regularized = Vec::new();
        let mut drift = 0.0_f64;
        for s in &sectors {
            for i in 0..len {
                target_w[i] += s.weight * s.target_w[i];
                reproduced_w[i] += s.weight * s.inversion[i];
            }
            regularized.extend_from_slice(&s.regularized_points);
            drift = drift.max(s.max_norm_drift);
        }
        regularized.sort_unstable();
        regularized.dedup();
        let coupling = sectors
            .iter()
            .find(|s| s.n == coupling_sector)
            .map(|s| s.coupling.clone())
            .unwrap_or_else(|| vec![0.0; len]);
        let residuals = reproduced_w
            .iter()
            .zip(&target_w)
            .map(|(r, t)| r - t)
            .collect();
        ScenarioResult {
            grid,
            target_w,
            coupling,
            coupling_sector,
            reproduced_w,
            residuals,
            regularized_points: regularized,
            max_norm_drift: drift,
            sectors,
        }
    }
}

fn sector_report(
    n: usize,
    weight: f64,
    target: &InversionTarget,
    coupling: &CouplingProfile,
    grid: &TimeGrid,
    integrator: &Dopri5,
) -> Result<SectorReport> {
    let target_w = target.sample(grid)?;
    let (values, regularized_points) = coupling.sample(grid)?;
    let traj = propagate_sector_with(coupling, n, grid, integrator)?;
    Ok(SectorReport {
        n,
        weight,
        target_w,
        coupling: values,
        regularized_points,
        max_norm_drift: traj.max_norm_drift(),
        inversion: traj.inversion,
    })
}

/// Propagates a prescribed coupling from `|e,n⟩` and compares with `target`.
pub fn run_forward(
    coupling: &CouplingProfile,
    n: usize,
    target: &InversionTarget,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<ScenarioResult> {
    let report = sector_report(n, 1.0, target, coupling, grid, &options.integrator)?;
    Ok(ScenarioResult::from_sectors(*grid, vec![report], n))
}

/// Vacuum synthesis followed by forward propagation of `|e,0⟩`.
pub fn run_ipa(
    target: &InversionTarget,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<ScenarioResult> {
    let coupling = gipa_with_eta(target, 0, grid, options.eta)?;
    run_forward(&coupling, 0, target, grid, options)
}

/// Runs every sector of `stats` with the target and coupling returned by
/// `sector`, then sums the inversions with the truncated, renormalized
/// weights. Sectors of zero weight are skipped. The reported coupling is
/// that of the modal sector.
pub fn run_sector_pipeline<F>(
    sector: F,
    stats: &PhotonStatistics,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<ScenarioResult>
where
    F: Fn(usize) -> Result<(InversionTarget, CouplingProfile)> + Sync,
{
    stats.validate()?;
    let weights = stats.truncated_weights(options.tail_tol)?;
    let modal = stats.modal_index(options.tail_tol)?;
    let reports = weights
        .par_iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(n, &w)| {
            let (target, coupling) = sector(n).map_err(|e| e.in_sector(n))?;
            sector_report(n, w, &target, &coupling, grid, &options.integrator)
                .map_err(|e| e.in_sector(n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioResult::from_sectors(*grid, reports, modal))
}

/// Multi-sector synthesis: sector `n` gets the coupling synthesized from
/// `family(n)` for the initial state `|e,n⟩`.
pub fn run_gipa_pipeline<F>(
    family: F,
    stats: &PhotonStatistics,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<ScenarioResult>
where
    F: Fn(usize) -> Result<InversionTarget> + Sync,
{
    run_sector_pipeline(
        |n| {
            let target = family(n)?;
            let coupling = gipa_with_eta(&target, n, grid, options.eta)?;
            Ok((target, coupling))
        },
        stats,
        grid,
        options,
    )
}

/// Pointwise difference of two equally sampled series.
pub fn delta_w(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "series of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PhysicalParams;
    use crate::synth::ipa;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_coupling_gives_rabi_cosine() {
        let grid = TimeGrid::new(0.0, 25.0, 2001).unwrap();
        let traj = propagate_sector(&CouplingProfile::Constant { lambda0: 1.0 }, 0, &grid).unwrap();
        let exact: Vec<f64> = grid.times().iter().map(|t| (2.0 * t).cos()).collect();
        assert!(max_abs_diff(&traj.inversion, &exact) < 1e-8);
        assert!(traj.max_norm_drift() < 1e-9);
    }

    #[test]
    fn higher_sector_uses_sqrt_n_plus_one() {
        let grid = TimeGrid::new(0.0, 5.0, 501).unwrap();
        let traj = propagate_sector(&CouplingProfile::Constant { lambda0: 0.7 }, 3, &grid).unwrap();
        let exact: Vec<f64> = grid.times().iter().map(|t| (1.4 * 2.0 * t).cos()).collect();
        assert!(max_abs_diff(&traj.inversion, &exact) < 1e-8);
    }

    #[test]
    fn zero_coupling_freezes_state() {
        let grid = TimeGrid::new(0.0, 3.0, 31).unwrap();
        let traj = propagate_sector(&CouplingProfile::zero(), 2, &grid).unwrap();
        assert!(traj.inversion.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn sqrt_time_coupling_matches_closed_form() {
        let grid = TimeGrid::new(0.0, 6.0, 1201).unwrap();
        let coupling = CouplingProfile::SqrtTime {
            lambda0: 1.0,
            zeta: 1.0,
        };
        let traj = propagate_sector(&coupling, 0, &grid).unwrap();
        let exact: Vec<f64> = grid
            .times()
            .iter()
            .map(|t| (4.0 / 3.0 * t.powf(1.5)).cos())
            .collect();
        assert!(max_abs_diff(&traj.inversion, &exact) < 1e-8);
    }

    #[test]
    fn oracle_agrees_with_integrator_for_sampled_coupling() {
        let grid = TimeGrid::new(0.0, 4.0, 81).unwrap();
        let values: Vec<f64> = grid.times().iter().map(|t| 1.0 + 0.5 * t.sin()).collect();
        let coupling = CouplingProfile::SynthesizedGrid(
            crate::synth::SynthesizedCoupling::from_samples(grid, values, 1).unwrap(),
        );
        let traj = propagate_sector(&coupling, 1, &grid).unwrap();
        let oracle = phase_integral_oracle(&coupling, 1, &grid).unwrap();
        assert!(max_abs_diff(&traj.inversion, &oracle) < 1e-8);
    }

    #[test]
    fn vacuum_ipa_reproduces_coherent_series() {
        let params = PhysicalParams::default();
        let grid = TimeGrid::new(0.0, 25.0, 2001).unwrap();
        let target = InversionTarget::coherent_series(params).unwrap();
        let result = run_ipa(&target, &grid, &PipelineOptions::default()).unwrap();
        assert!(result.max_abs_residual_outside_windows() < 1e-6);
        assert_eq!(result.regularized_points, vec![0]);
        let direct = ipa(&target, &grid).unwrap();
        let oracle = phase_integral_oracle(&direct, 0, &grid).unwrap();
        assert!(max_abs_diff(&result.reproduced_w, &oracle) < 1e-7);
    }

    #[test]
    fn fock_pipeline_is_single_sector() {
        let params = PhysicalParams::default();
        let grid = TimeGrid::new(0.0, 10.0, 401).unwrap();
        let options = PipelineOptions::default();
        let piped = run_gipa_pipeline(
            |n| InversionTarget::cos_squared(n, params),
            &PhotonStatistics::Fock(4),
            &grid,
            &options,
        )
        .unwrap();
        let target = InversionTarget::cos_squared(4, params).unwrap();
        let coupling = gipa_with_eta(&target, 4, &grid, options.eta).unwrap();
        let single = propagate_sector(&coupling, 4, &grid).unwrap();
        assert_eq!(piped.sectors.len(), 1);
        assert_eq!(piped.coupling_sector, 4);
        assert_eq!(piped.reproduced_w, single.inversion);
    }

    #[test]
    fn sector_errors_are_tagged() {
        let grid = TimeGrid::new(0.0, 1.0, 11).unwrap();
        let err = run_sector_pipeline(
            |n| {
                if n == 3 {
                    Err(Error::invalid("test", "boom"))
                } else {
                    Ok((
                        InversionTarget::constant_coupling(n, PhysicalParams::default())?,
                        CouplingProfile::Constant { lambda0: 1.0 },
                    ))
                }
            },
            &PhotonStatistics::Poisson { mean: 2.0 },
            &grid,
            &PipelineOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Sector { n: 3, .. }), "{err}");
    }

    #[test]
    fn delta_w_rejects_mismatch() {
        assert!(matches!(
            delta_w(&[1.0, 2.0], &[1.0]),
            Err(Error::GridMismatch(_))
        ));
        assert_eq!(delta_w(&[3.0, 2.0], &[1.0, 2.0]).unwrap(), vec![2.0, 0.0]);
    }
}
