//! κ-deformed observables: the detuned transition probability `S_n(t)`,
//! the deformed spin expectation, and the deformed-versus-undeformed
//! scenario that yields ΔW and Δλ.

use crate::domain::{PhotonStatistics, PhysicalParams, TimeGrid};
use crate::dynamics::{delta_w, run_ipa, run_sector_pipeline, PipelineOptions, ScenarioResult};
use crate::error::Result;
use crate::inversion::{InversionTarget, TargetKind};
use crate::synth::CouplingProfile;

/// Ground-state occupation of sector `n` after time `t` starting from
/// `|e,n⟩`, with detuning: `Ω_n²/(Δ²+Ω_n²) · sin²(½√(Δ²+Ω_n²) t)`.
pub fn s_n(n: usize, t: f64, params: &PhysicalParams) -> f64 {
    let omega = params.rabi_frequency(n).get();
    let delta = params.detuning;
    let generalized_sq = delta * delta + omega * omega;
    if generalized_sq == 0.0 {
        return 0.0;
    }
    let s = (0.5 * generalized_sq.sqrt() * t).sin();
    omega * omega / generalized_sq * s * s
}

/// `⟨S_z⟩(t)` for a coherent field with first-order κ-deformation.
///
/// ```text
/// ⟨S_z⟩ = ½ - Σ P_n S_n + ε ⟨n⟩ Σ P_n (S_n - S_{n+2})
/// ```
///
/// `P_n` are the truncated, renormalized Poisson weights.
pub fn expected_sz(t: f64, params: &PhysicalParams) -> Result<f64> {
    expected_sz_with_tail(t, params, crate::domain::DEFAULT_TAIL_TOL)
}

pub fn expected_sz_with_tail(t: f64, params: &PhysicalParams, tail_tol: f64) -> Result<f64> {
    let stats = PhotonStatistics::Poisson {
        mean: params.mean_n,
    };
    let weights = stats.truncated_weights(tail_tol)?;
    let deformation = params.epsilon * params.mean_n;
    let mut population = 0.0;
    let mut correction = 0.0;
    for (n, w) in weights.iter().enumerate() {
        let sn = s_n(n, t, params);
        population += w * sn;
        correction += w * (sn - s_n(n + 2, t, params));
    }
    Ok(0.5 - population + deformation * correction)
}

/// Output of [`deformed_scenario`].
#[derive(Debug, Clone)]
pub struct DeformedScenario {
    /// Vacuum synthesis and propagation for the deformed coherent target.
    pub deformed: ScenarioResult,
    /// The same for the undeformed coherent target.
    pub undeformed: ScenarioResult,
    /// Sector-resolved reproduction of the deformed coherent target with
    /// the closed-form deformed couplings.
    pub sector_resolved: ScenarioResult,
    /// Reproduced deformed minus reproduced undeformed inversion.
    pub delta_w: Vec<f64>,
    /// Deformed minus undeformed vacuum coupling.
    pub delta_lambda: Vec<f64>,
}

pub fn deformed_scenario(params: &PhysicalParams, grid: &TimeGrid) -> Result<DeformedScenario> {
    deformed_scenario_with(params, grid, &PipelineOptions::default())
}

pub fn deformed_scenario_with(
    params: &PhysicalParams,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<DeformedScenario> {
    params.validate()?;
    params.require_resonance()?;
    let deformed_target =
        InversionTarget::with_tail_tol(TargetKind::DeformedCoherentSeries, *params, options.tail_tol)?;
    let plain_target = InversionTarget::with_tail_tol(
        TargetKind::CoherentSeries,
        params.undeformed(),
        options.tail_tol,
    )?;
    let deformed = run_ipa(&deformed_target, grid, options)?;
    let undeformed = run_ipa(&plain_target, grid, options)?;
    let sector_resolved = deformed_sector_pipeline(params, grid, options)?;
    let dw = delta_w(&deformed.reproduced_w, &undeformed.reproduced_w)?;
    let dl = delta_w(&deformed.coupling, &undeformed.coupling)?;
    Ok(DeformedScenario {
        deformed,
        undeformed,
        sector_resolved,
        delta_w: dw,
        delta_lambda: dl,
    })
}

/// Poisson-weighted pipeline where sector `n` is driven by the closed-form
/// deformed coupling and compared with the deformed summand.
pub fn deformed_sector_pipeline(
    params: &PhysicalParams,
    grid: &TimeGrid,
    options: &PipelineOptions,
) -> Result<ScenarioResult> {
    params.require_resonance()?;
    let params = *params;
    run_sector_pipeline(
        |n| {
            Ok((
                InversionTarget::deformed_sector_summand(n, params)?,
                CouplingProfile::DeformedGipaClosedForm {
                    n,
                    params,
                    eta: options.eta,
                },
            ))
        },
        &PhotonStatistics::Poisson {
            mean: params.mean_n,
        },
        grid,
        options,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    #[test]
    fn s_n_detuned_golden() {
        let p = PhysicalParams {
            detuning: 20.0,
            ..params()
        };
        let v = s_n(0, 1.0, &p);
        assert!((v - 0.0033904108908978390463).abs() < 1e-15);
        assert!(v <= 1.0 / 101.0);
    }

    #[test]
    fn s_n_resonant_reduction() {
        for n in [0, 3, 9] {
            for t in [0.0, 0.4, 2.2, 13.0] {
                let omega = params().rabi_frequency(n).get();
                let expected = 0.5 * (1.0 - (omega * t).cos());
                assert!((s_n(n, t, &params()) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn expected_sz_starts_at_half() {
        assert_eq!(expected_sz(0.0, &params()).unwrap(), 0.5);
    }

    #[test]
    fn twice_expected_sz_is_deformed_series() {
        for eps in [0.0, 5e-4] {
            let p = params().with_epsilon(eps);
            let target = InversionTarget::deformed_coherent_series(p).unwrap();
            for i in 0..=500 {
                let t = i as f64 * 0.05;
                let lhs = 2.0 * expected_sz(t, &p).unwrap();
                assert!((lhs - target.eval(t).unwrap()).abs() < 1e-10, "eps={eps} t={t}");
            }
        }
    }

    #[test]
    fn undeformed_reduces_to_half_coherent_series() {
        let p = params().undeformed();
        let target = InversionTarget::coherent_series(p).unwrap();
        for t in [0.3, 1.0, 7.5, 14.0] {
            let v = expected_sz(t, &p).unwrap();
            assert!((2.0 * v - target.eval(t).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn s_n_is_bounded(n in 0usize..60, t in 0.0f64..50.0, delta in -30.0f64..30.0) {
            let p = PhysicalParams { detuning: delta, ..params() };
            let omega = p.rabi_frequency(n).get();
            let bound = omega * omega / (delta * delta + omega * omega);
            let v = s_n(n, t, &p);
            prop_assert!(v >= 0.0 && v <= bound + 1e-15);
        }

        #[test]
        fn expected_sz_is_bounded(t in 0.0f64..40.0, eps in 0.0f64..5e-4) {
            let p = params().with_epsilon(eps);
            let v = expected_sz(t, &p).unwrap();
            prop_assert!(v.abs() <= 0.5 + 10.0 * eps);
        }
    }

    #[test]
    fn zero_deformation_gives_zero_deltas() {
        let grid = TimeGrid::new(0.0, 5.0, 201).unwrap();
        let s = deformed_scenario(&params().undeformed(), &grid).unwrap();
        assert!(s.delta_w.iter().all(|&d| d.abs() <= 1e-12));
        assert!(s.delta_lambda.iter().all(|&d| d.abs() <= 1e-12));
    }

    #[test]
    fn detuning_is_rejected_by_scenario() {
        let grid = TimeGrid::new(0.0, 1.0, 11).unwrap();
        let p = PhysicalParams {
            detuning: 0.5,
            ..params()
        };
        assert!(deformed_scenario(&p, &grid).is_err());
    }
}
