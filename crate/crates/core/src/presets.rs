//! Reference scenarios calibrated to the published observables.
//!
//! The correlation-reproduction scenario solves the spectral shape so the
//! synthetic-tag analysis lands on the published figures: smoothed peak
//! correlation 35 near 25 ns and a single 300 ns window value of 10. The
//! ratio of those two numbers pins the window-energy scale
//! `W = F(0..300 ns) * tau_eq = 300 * 9/34 ~= 79.4 ns`, which is shorter
//! than the 300 ns coherence-time anchor used by the power-law calibration;
//! the published definitions cannot be reconciled under one waveform, so the
//! correlation scenario and the coherence-time law are calibrated to their
//! respective observables.

use crate::coincidence::{
    EfficiencyChain, ExperimentScenario, REFERENCE_DUTY_CYCLE, REFERENCE_PAIR_RATE_HZ,
};
use crate::error::{Error, Result};
use crate::optics::{dephased_two_path_density, SfwmPathConfig};
use crate::quantum::{bell_state, BellKind, PairState};
use crate::spectrum::{
    coherence_time, model_waveform, FrequencyGrid, SpectralModelParams, TemporalWaveform,
};

/// Published peak of the normalized cross-correlation.
pub const REFERENCE_G2_PEAK: f64 = 35.0;
/// Published single 300 ns window correlation.
pub const REFERENCE_G2_WINDOW: f64 = 10.0;
/// Published delay of the correlation peak (ns).
pub const REFERENCE_PEAK_DELAY_NS: f64 = 25.0;
/// Published polarization-fringe visibility.
pub const REFERENCE_VISIBILITY: f64 = 0.893;
/// Zero-delay autocorrelation of each (thermal) marginal.
pub const REFERENCE_AUTOCORRELATION: f64 = 2.0;

/// Window-energy scale implied by the peak/window pair:
/// `(g2_window - 1)/(g2_peak - 1) = F * tau_eq / 300`.
pub fn window_energy_target_ns() -> f64 {
    300.0 * (REFERENCE_G2_WINDOW - 1.0) / (REFERENCE_G2_PEAK - 1.0)
}

fn shape_metrics(wf: &TemporalWaveform<f64>) -> Result<(f64, f64)> {
    let tau_eq = coherence_time(wf)?;
    let w = wf.energy_fraction_in(0.0, 300.0) * tau_eq;
    Ok((wf.peak_time_ns(), w))
}

/// Solve the spectral shape whose waveform peaks at `peak_target_ns` and
/// carries window-energy scale `w_target_ns`.
///
/// The group delay is pinned to the published peak delay (the rectangle of
/// the phase-matching factor is what delays the correlation peak); the
/// onset time then fine-tunes the peak location and the window width sets
/// the tail. Nested bisection on (rise, window).
fn solve_correlation_shape(
    peak_target_ns: f64,
    w_target_ns: f64,
    grid: &FrequencyGrid<f64>,
) -> Result<SpectralModelParams<f64>> {
    let group_delay_ns = peak_target_ns;
    let wf_of = |window_mhz: f64, rise_ns: f64| -> Result<TemporalWaveform<f64>> {
        let mut p = SpectralModelParams::new(2.0, window_mhz, group_delay_ns);
        p.rise_time_ns = rise_ns;
        model_waveform(&p, grid)
    };
    // Inner: narrower window -> slower tail -> larger window-energy scale.
    let solve_window = |rise_ns: f64| -> Result<Option<f64>> {
        let (mut lo, mut hi) = (0.3f64, 20.0f64);
        let (_, w_at_lo) = shape_metrics(&wf_of(lo, rise_ns)?)?;
        let (_, w_at_hi) = shape_metrics(&wf_of(hi, rise_ns)?)?;
        if w_at_lo < w_target_ns || w_at_hi > w_target_ns {
            return Ok(None);
        }
        for _ in 0..44 {
            let mid = (lo * hi).sqrt();
            let (_, w) = shape_metrics(&wf_of(mid, rise_ns)?)?;
            if w > w_target_ns {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some((lo * hi).sqrt()))
    };
    // Outer: longer onset -> later peak.
    let (mut r_lo, mut r_hi) = (0.5f64, 25.0f64);
    let mut best: Option<(f64, SpectralModelParams<f64>)> = None;
    for _ in 0..32 {
        let rise = 0.5 * (r_lo + r_hi);
        let Some(w_mhz) = solve_window(rise)? else {
            r_hi = rise;
            continue;
        };
        let (peak, _) = shape_metrics(&wf_of(w_mhz, rise)?)?;
        let err = (peak - peak_target_ns).abs();
        if best.as_ref().map(|(e, _)| err < *e).unwrap_or(true) {
            let mut p = SpectralModelParams::new(2.0, w_mhz, group_delay_ns);
            p.rise_time_ns = rise;
            best = Some((err, p));
        }
        if peak > peak_target_ns {
            r_hi = rise;
        } else {
            r_lo = rise;
        }
    }
    best.map(|(_, p)| p).ok_or(Error::Format {
        what: "correlation shape solve",
        reason: "no feasible window/onset pair".into(),
    })
}

/// Spectral parameters of the correlation-reproduction scenario.
pub fn correlation_reference_params() -> Result<SpectralModelParams<f64>> {
    let grid = FrequencyGrid::fine_time();
    solve_correlation_shape(REFERENCE_PEAK_DELAY_NS, window_energy_target_ns(), &grid)
}

/// The waveform used by the correlation-reproduction scenario.
pub fn correlation_reference_waveform() -> Result<TemporalWaveform<f64>> {
    let params = correlation_reference_params()?;
    model_waveform(&params, &FrequencyGrid::fine_time())
}

/// Correlation-reproduction scenario plus the observables it targets.
#[derive(Clone, Debug)]
pub struct CorrelationScenario {
    pub scenario: ExperimentScenario,
    pub expected_peak_g2: f64,
    pub expected_window_g2: f64,
    pub expected_peak_delay_ns: f64,
}

/// Scenario calibrated so the synthetic-tag analysis reproduces the
/// published correlation numbers: reference rates and efficiency chains,
/// singles solved so the accidental floor puts the smoothed peak at 35.
pub fn correlation_reference_scenario(duration_s: f64, seed: u64) -> Result<CorrelationScenario> {
    let waveform = correlation_reference_waveform()?;
    let peak_intensity_per_ns = 1.0 / coherence_time(&waveform)?;

    // Smoothed-peak expectation: (g2_peak - 1) = R_pair I_p / (duty (R_pair + r)^2)
    // in per-second units; solve for the source singles rate r.
    let i_p_hz = peak_intensity_per_ns * 1e9;
    let target = REFERENCE_G2_PEAK - 1.0;
    let total_rate = (REFERENCE_PAIR_RATE_HZ * i_p_hz / (REFERENCE_DUTY_CYCLE * target)).sqrt();
    let singles_rate = total_rate - REFERENCE_PAIR_RATE_HZ;
    if singles_rate <= 0.0 {
        return Err(Error::Format {
            what: "correlation scenario",
            reason: "reference rates leave no room for the accidental floor".into(),
        });
    }

    let mut scenario = ExperimentScenario::new(
        PairState::Pure(bell_state(BellKind::PsiPlus)),
        waveform,
        REFERENCE_PAIR_RATE_HZ,
        duration_s,
        seed,
    );
    scenario.singles_rate_hz = [singles_rate, singles_rate];
    scenario.efficiencies = [EfficiencyChain::REFERENCE, EfficiencyChain::REFERENCE];
    scenario.duty_cycle = REFERENCE_DUTY_CYCLE;
    Ok(CorrelationScenario {
        scenario,
        expected_peak_g2: REFERENCE_G2_PEAK,
        expected_window_g2: REFERENCE_G2_WINDOW,
        expected_peak_delay_ns: REFERENCE_PEAK_DELAY_NS,
    })
}

/// Fringe-scan scenario with the accidental floor solved for a target
/// fitted visibility (`coincidences ~ S/2 / (S/2 + 2 Acc)` in the window).
pub fn fringe_reference_scenario(
    target_visibility: f64,
    duration_s: f64,
    seed: u64,
) -> Result<ExperimentScenario> {
    if !(0.0 < target_visibility && target_visibility < 1.0) {
        return Err(Error::Format {
            what: "fringe scenario",
            reason: format!("target visibility must be in (0,1), got {target_visibility}"),
        });
    }
    let waveform = correlation_reference_waveform()?;
    let window_ns = crate::coincidence::COINCIDENCE_WINDOW_NS as f64;
    let in_window = waveform.energy_fraction_in(0.0, window_ns);

    let eta = EfficiencyChain::REFERENCE.product();
    let duty = REFERENCE_DUTY_CYCLE;
    let window_s = duration_s * duty;
    // Detected pair signal at the fringe maximum (projection 1/2).
    let pairs_detected = REFERENCE_PAIR_RATE_HZ * eta * eta * window_s * in_window;
    let signal_peak = pairs_detected / 2.0;
    let accidental_target = signal_peak * (1.0 - target_visibility) / (2.0 * target_visibility);
    // Accidentals per point: N1 N2 window / T with N = r_source eta duty T.
    let duration_ns = duration_s * 1e9;
    let n_product = accidental_target * duration_ns / window_ns;
    let detected_singles = n_product.sqrt();
    let singles_rate = detected_singles / (eta * window_s / duty) / duty;

    let mut scenario = ExperimentScenario::new(
        PairState::Pure(bell_state(BellKind::PsiPlus)),
        waveform,
        REFERENCE_PAIR_RATE_HZ,
        duration_s,
        seed,
    );
    scenario.singles_rate_hz = [singles_rate, singles_rate];
    scenario.efficiencies = [EfficiencyChain::REFERENCE, EfficiencyChain::REFERENCE];
    scenario.duty_cycle = duty;
    Ok(scenario)
}

/// Fringe scenario with the two-path coherence fully dephased, as when the
/// interferometer phase is left unlocked.
pub fn unlocked_fringe_scenario(duration_s: f64, seed: u64) -> Result<ExperimentScenario> {
    let mut scenario = fringe_reference_scenario(REFERENCE_VISIBILITY, duration_s, seed)?;
    let rho = dephased_two_path_density(&SfwmPathConfig::<f64>::bell(BellKind::PsiPlus), 0.0);
    scenario.pair_state = PairState::Mixed(rho);
    Ok(scenario)
}
