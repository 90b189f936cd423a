//! Two-path phase algebra, reference-interferometer locking, and the
//! phase-noise visibility penalty.
//!
//! The two-path phase is `phi = (2 pi / lambda_c)(L_c2 - L_c1)
//! + (2 pi / lambda_p)(L_p2 - L_p1)`. Writing `k0 = (k_c + k_p)/2` and
//! `delta = (k_c - k_p)/2`, it splits exactly into a common-mode part
//! `k0 * S` read by the reference interferometer and a small differential
//! remainder `delta * D`, giving the affine lock relation
//! `phi ~= (k0/k_l) phi_lock + phi_0`.

use crate::error::{Error, Result};
use crate::fit::{linear_fit, sinusoid_fit, LinearFit};
use crate::optics::{two_path_state, SfwmPathConfig};
use crate::quantum::{BellKind, PolarizationVector, TwoQubitState};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Arm lengths and wavelengths of the stacked interferometers.
#[derive(Clone, Copy, Debug)]
pub struct InterferometerGeometry<T> {
    pub arm_c1_m: T,
    pub arm_c2_m: T,
    pub arm_p1_m: T,
    pub arm_p2_m: T,
    pub lambda_p_m: T,
    pub lambda_c_m: T,
    pub lambda_lock_m: T,
    /// Offset between the reference and two-path interferometers (rad).
    pub offset_phase_rad: T,
}

impl<T: Real> InterferometerGeometry<T> {
    /// Equal-arm geometry at the experiment wavelengths
    /// (pump 780 nm, coupling 795 nm, lock 795 nm).
    pub fn equal_arms(arm_m: T) -> Self {
        Self {
            arm_c1_m: arm_m,
            arm_c2_m: arm_m,
            arm_p1_m: arm_m,
            arm_p2_m: arm_m,
            lambda_p_m: T::of(780e-9),
            lambda_c_m: T::of(795e-9),
            lambda_lock_m: T::of(795e-9),
            offset_phase_rad: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.arm_c1_m,
            self.arm_c2_m,
            self.arm_p1_m,
            self.arm_p2_m,
            self.lambda_p_m,
            self.lambda_c_m,
            self.lambda_lock_m,
        ];
        if all.iter().any(|v| *v <= T::zero() || !v.is_finite()) {
            return Err(Error::Format {
                what: "interferometer geometry",
                reason: "lengths and wavelengths must be positive".into(),
            });
        }
        Ok(())
    }

    /// Common-mode arm-length sum `S = (L_c2 + L_p2) - (L_c1 + L_p1)`.
    pub fn common_mode_m(&self) -> T {
        (self.arm_c2_m + self.arm_p2_m) - (self.arm_c1_m + self.arm_p1_m)
    }

    /// Differential remainder `D = (L_c2 - L_p2) - (L_c1 - L_p1)`.
    pub fn differential_m(&self) -> T {
        (self.arm_c2_m - self.arm_p2_m) - (self.arm_c1_m - self.arm_p1_m)
    }
}

/// Exact two-path phase from the arm lengths.
pub fn sfwm_phase_exact<T: Real>(geom: &InterferometerGeometry<T>) -> T {
    let two_pi = T::of(2.0) * T::PI();
    two_pi / geom.lambda_c_m * (geom.arm_c2_m - geom.arm_c1_m)
        + two_pi / geom.lambda_p_m * (geom.arm_p2_m - geom.arm_p1_m)
}

/// Reduce a phase to `[0, 2 pi)`.
pub fn reduce_mod_2pi<T: Real>(phi: T) -> T {
    let two_pi = T::of(2.0) * T::PI();
    let mut r = phi % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    r
}

/// Lock ratio `k0 / k_l = (1/lambda_c + 1/lambda_p) / 2 * lambda_l`.
pub fn lock_ratio<T: Real>(lambda_p: T, lambda_c: T, lambda_lock: T) -> T {
    (T::one() / lambda_c + T::one() / lambda_p) * T::of(0.5) * lambda_lock
}

/// Affine relation between a reference-interferometer lock point and the
/// two-path phase.
#[derive(Clone, Copy, Debug)]
pub struct PhaseLink<T> {
    pub ratio: T,
    pub offset_rad: T,
}

impl<T: Real> PhaseLink<T> {
    pub fn from_wavelengths(lambda_p: T, lambda_c: T, lambda_lock: T, offset_rad: T) -> Self {
        Self {
            ratio: lock_ratio(lambda_p, lambda_c, lambda_lock),
            offset_rad,
        }
    }

    pub fn from_geometry(geom: &InterferometerGeometry<T>) -> Self {
        Self::from_wavelengths(
            geom.lambda_p_m,
            geom.lambda_c_m,
            geom.lambda_lock_m,
            geom.offset_phase_rad,
        )
    }

    /// `phi = ratio * phi_lock + offset`.
    pub fn phase_for_lock_point(&self, phi_lock: T) -> T {
        self.ratio * phi_lock + self.offset_rad
    }

    /// Lock point producing a requested two-path phase.
    pub fn lock_point_for_phase(&self, phi: T) -> Result<T> {
        if self.ratio == T::zero() {
            return Err(Error::ZeroLockRatio);
        }
        Ok((phi - self.offset_rad) / self.ratio)
    }
}

/// Linearized two-path phase `(k0/k_l) phi_lock + phi_0`.
pub fn sfwm_phase_approx<T: Real>(phi_lock: T, ratio: T, offset_rad: T) -> T {
    ratio * phi_lock + offset_rad
}

/// Random-walk drift of the reference interferometer phase.
#[derive(Clone, Copy, Debug)]
pub struct DriftModel<T> {
    /// Standard deviation of one random-walk step (rad).
    pub step_std_rad: T,
    /// Time between steps (ms).
    pub step_interval_ms: T,
    pub seed: u64,
}

impl<T: Real> DriftModel<T> {
    pub fn new(step_std_rad: T, step_interval_ms: T, seed: u64) -> Self {
        Self {
            step_std_rad,
            step_interval_ms,
            seed,
        }
    }
}

/// Discrete proportional-integral controller with anti-windup clamping.
#[derive(Clone, Copy, Debug)]
pub struct ControllerParams<T> {
    pub proportional_gain: T,
    pub integral_gain: T,
    /// Largest actuation per step (rad).
    pub actuation_limit_rad: T,
    /// Lock setpoint for the reference phase (rad).
    pub setpoint_rad: T,
}

impl<T: Real> ControllerParams<T> {
    /// Gains that hold the residual comfortably below 0.1 rad RMS for
    /// per-step drift up to a few hundredths of a radian.
    pub fn default_tuned(setpoint_rad: T) -> Self {
        Self {
            proportional_gain: T::of(0.5),
            integral_gain: T::of(0.05),
            actuation_limit_rad: T::of(0.5),
            setpoint_rad,
        }
    }

    /// Open-loop controller: the phase random-walks freely.
    pub fn disabled() -> Self {
        Self {
            proportional_gain: T::zero(),
            integral_gain: T::zero(),
            actuation_limit_rad: T::zero(),
            setpoint_rad: T::zero(),
        }
    }
}

/// One recorded sample of the lock simulation.
#[derive(Clone, Copy, Debug)]
pub struct PhaseSample<T> {
    pub t_ms: T,
    pub phi_lock_rad: T,
    pub phi_rad: T,
}

/// Time series of (t, phi_lock, phi); time strictly increasing.
#[derive(Clone, Debug)]
pub struct PhaseTrace<T> {
    samples: Vec<PhaseSample<T>>,
}

impl<T: Real> PhaseTrace<T> {
    pub fn from_samples(samples: Vec<PhaseSample<T>>) -> Result<Self> {
        for w in samples.windows(2) {
            if w[1].t_ms <= w[0].t_ms {
                return Err(Error::Format {
                    what: "phase trace",
                    reason: "time must be strictly increasing".into(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[PhaseSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// RMS of `phi - target` over the trace.
    pub fn residual_rms(&self, target_rad: T) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let sum = self.samples.iter().fold(T::zero(), |acc, s| {
            let d = s.phi_rad - target_rad;
            acc + d * d
        });
        (sum / T::of(self.samples.len() as f64)).sqrt()
    }

    /// RMS of `phi_lock - setpoint`.
    pub fn lock_residual_rms(&self, setpoint_rad: T) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let sum = self.samples.iter().fold(T::zero(), |acc, s| {
            let d = s.phi_lock_rad - setpoint_rad;
            acc + d * d
        });
        (sum / T::of(self.samples.len() as f64)).sqrt()
    }
}

/// Simulate drift plus feedback. Deterministic for a fixed drift seed.
pub fn simulate_lock<T: Real>(
    drift: &DriftModel<T>,
    controller: &ControllerParams<T>,
    duration_ms: T,
    link: &PhaseLink<T>,
) -> PhaseTrace<T> {
    let steps = (duration_ms / drift.step_interval_ms)
        .floor()
        .as_f64()
        .max(1.0) as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(drift.seed);
    let mut phi_lock = controller.setpoint_rad;
    let mut integral = T::zero();
    let mut samples = Vec::with_capacity(steps);
    for k in 0..steps {
        let noise: f64 = rng.sample(StandardNormal);
        phi_lock += drift.step_std_rad * T::of(noise);

        let err = controller.setpoint_rad - phi_lock;
        let proposed_integral = integral + err;
        let raw = controller.proportional_gain * err + controller.integral_gain * proposed_integral;
        let limit = controller.actuation_limit_rad;
        let clamped = raw.max(-limit).min(limit);
        // Conditional integration: only accumulate when not saturated.
        if raw == clamped {
            integral = proposed_integral;
        }
        phi_lock += clamped;

        samples.push(PhaseSample {
            t_ms: T::of((k + 1) as f64) * drift.step_interval_ms,
            phi_lock_rad: phi_lock,
            phi_rad: link.phase_for_lock_point(phi_lock),
        });
    }
    PhaseTrace { samples }
}

/// Interference coherence factor `|< e^{i phi} >|` of a phase trace; this
/// multiplies the off-diagonal coherence of the two-path state.
pub fn visibility_penalty<T: Real>(trace: &PhaseTrace<T>) -> T {
    if trace.samples.is_empty() {
        return T::one();
    }
    let (mut re, mut im) = (T::zero(), T::zero());
    for s in &trace.samples {
        re += s.phi_rad.cos();
        im += s.phi_rad.sin();
    }
    let n = T::of(trace.samples.len() as f64);
    ((re / n).powi(2) + (im / n).powi(2)).sqrt()
}

/// Extract the two-path phase of a `(|HH> + e^{i phi}|VV>)/sqrt(2)`-class
/// state from two polarization fringe fits, the way the lock-point
/// calibration does it: the linear-analyzer fringe at -45 degrees reads
/// `cos(phi)`, an elliptical-analyzer fringe reads `sin(phi)`.
pub fn extract_two_path_phase<T: Real>(state: &TwoQubitState<T>) -> Result<T> {
    let quarter = T::of(0.25);
    let n_angles = 16usize;
    let mut xs = Vec::with_capacity(n_angles);
    let mut cos_scan = Vec::with_capacity(n_angles);
    let mut sin_scan = Vec::with_capacity(n_angles);
    let minus45 = PolarizationVector::linear(-T::PI() * quarter);
    let circular = PolarizationVector::sigma_plus();
    for k in 0..n_angles {
        let theta = T::of(k as f64) * T::PI() / T::of(n_angles as f64);
        let analyzer = PolarizationVector::linear(theta);
        xs.push(T::of(2.0) * theta);
        cos_scan.push(state.projection_probability(&minus45, &analyzer));
        sin_scan.push(state.projection_probability(&circular, &analyzer));
    }
    // p_cos = 1/4 - (cos phi / 4) sin 2theta; p_sin = 1/4 + (sin phi / 4) sin 2theta
    let cos_fit = sinusoid_fit(&xs, &cos_scan)?;
    let sin_fit = sinusoid_fit(&xs, &sin_scan)?;
    let four = T::of(4.0);
    let cos_phi = -four * cos_fit.amplitude * cos_fit.phase.sin();
    let sin_phi = four * sin_fit.amplitude * sin_fit.phase.sin();
    Ok(sin_phi.atan2(cos_phi))
}

/// Result of the lock-point calibration scan.
#[derive(Clone, Debug)]
pub struct LockCalibration<T> {
    /// (lock point, extracted two-path phase) pairs.
    pub points: Vec<(T, T)>,
    /// Affine fit of phase versus lock point.
    pub fit: LinearFit<T>,
}

/// Calibrate the affine (lock point -> two-path phase) relation by fringe
/// fitting at each lock setpoint and fitting a line through the extracted
/// phases. Slope estimates the lock ratio, intercept the offset phase.
pub fn calibrate_lock_points<T: Real>(
    setpoints: &[T],
    link: &PhaseLink<T>,
) -> Result<LockCalibration<T>> {
    if setpoints.len() < 2 {
        return Err(Error::Format {
            what: "lock calibration",
            reason: "need at least two setpoints".into(),
        });
    }
    let mut points = Vec::with_capacity(setpoints.len());
    let mut prev: Option<T> = None;
    let two_pi = T::of(2.0) * T::PI();
    for &lock in setpoints {
        let phi_true = link.phase_for_lock_point(lock);
        let mut cfg = SfwmPathConfig::<T>::bell(BellKind::PsiPlus);
        cfg.phase = phi_true;
        let state = two_path_state(&cfg).state;
        let mut phi = extract_two_path_phase(&state)?;
        // unwrap onto the branch nearest the previous point
        if let Some(p) = prev {
            while phi - p > T::PI() {
                phi -= two_pi;
            }
            while p - phi > T::PI() {
                phi += two_pi;
            }
        }
        prev = Some(phi);
        points.push((lock, phi));
    }
    let xs: Vec<T> = points.iter().map(|&(x, _)| x).collect();
    let ys: Vec<T> = points.iter().map(|&(_, y)| y).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(LockCalibration { points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    const PI: f64 = std::f64::consts::PI;

    fn geometry(dc: f64, dp: f64) -> InterferometerGeometry<f64> {
        let mut g = InterferometerGeometry::equal_arms(0.35);
        g.arm_c2_m += dc;
        g.arm_p2_m += dp;
        g
    }

    #[test]
    fn equal_arms_give_zero_phase() {
        let g = InterferometerGeometry::<f64>::equal_arms(0.2);
        assert_eq!(sfwm_phase_exact(&g), 0.0);
    }

    #[test]
    fn half_coupling_wavelength_gives_pi() {
        let g = geometry(795e-9 / 2.0, 0.0);
        assert!((sfwm_phase_exact(&g) - PI).abs() < 1e-9);
    }

    #[test]
    fn hundred_nm_on_both_arms() {
        // Independent arithmetic: 2 pi * 100 nm * (1/795 nm + 1/780 nm).
        let g = geometry(100e-9, 100e-9);
        let expected = 2.0 * PI * 100.0 * (1.0 / 795.0 + 1.0 / 780.0);
        // 1e-9 absorbs the cancellation error of (0.35 + 100 nm) - 0.35
        assert!((sfwm_phase_exact(&g) - expected).abs() < 1e-9);
        assert!((expected - 1.5959).abs() < 1e-3);
    }

    #[test]
    fn phase_invariant_under_common_arm_shift() {
        let g0 = geometry(120e-9, -40e-9);
        let mut g1 = g0;
        g1.arm_c1_m += 5e-6;
        g1.arm_c2_m += 5e-6;
        assert!((sfwm_phase_exact(&g0) - sfwm_phase_exact(&g1)).abs() < 1e-9);
    }

    #[test]
    fn lock_ratio_values() {
        assert!((lock_ratio(1.0f64, 1.0, 1.0) - 1.0).abs() < 1e-15);
        // (1 + 795/780)/2 at the experiment wavelengths
        let r = lock_ratio(780e-9f64, 795e-9, 795e-9);
        let expected = (1.0 + 795.0 / 780.0) / 2.0;
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 1.009615).abs() < 1e-6, "ratio {r}");
        // lambda_l twice the degenerate pump/coupling wavelength
        assert!((lock_ratio(0.5f64, 0.5, 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn approx_phase_is_affine_and_invertible() {
        let link = PhaseLink {
            ratio: 1.0,
            offset_rad: 0.0,
        };
        assert_eq!(sfwm_phase_approx(0.7, link.ratio, link.offset_rad), 0.7);
        let link = PhaseLink {
            ratio: 1.2f64,
            offset_rad: 0.3,
        };
        let phi = link.phase_for_lock_point(0.9);
        let back = link.lock_point_for_phase(phi).unwrap();
        assert!((back - 0.9).abs() < 1e-12);
        let bad = PhaseLink {
            ratio: 0.0,
            offset_rad: 0.0,
        };
        assert!(bad.lock_point_for_phase(1.0).is_err());
    }

    #[test]
    fn lock_point_grid_maps_affinely() {
        let link = PhaseLink::from_wavelengths(780e-9, 795e-9, 795e-9, 0.2);
        let grid = [0.0, PI / 3.0, 2.0 * PI / 3.0, PI];
        let xs: Vec<f64> = grid.to_vec();
        let ys: Vec<f64> = grid.iter().map(|&x| link.phase_for_lock_point(x)).collect();
        let f = linear_fit(&xs, &ys);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.slope - link.ratio).abs() < 1e-12);
    }

    // S.6 split: phi_exact = k0 * S + delta * D exactly, so the approximation
    // error of dropping the differential term is |delta * D|.
    #[test]
    fn approximation_error_bounded_by_differential_term() {
        let cases = [
            (100e-9, -60e-9),
            (450e-9, 390e-9),
            (-200e-9, 1e-6),
            (0.0, 777e-9),
        ];
        for &(dc, dp) in &cases {
            let g = geometry(dc, dp);
            let kc = 2.0 * PI / g.lambda_c_m;
            let kp = 2.0 * PI / g.lambda_p_m;
            let k0 = (kc + kp) / 2.0;
            let delta = (kc - kp) / 2.0;
            let exact = sfwm_phase_exact(&g);
            let approx = k0 * g.common_mode_m();
            let bound = (delta * g.differential_m()).abs();
            assert!(
                ((exact - approx).abs() - bound).abs() < 1e-9,
                "dc={dc} dp={dp}"
            );
        }
    }

    #[test]
    fn zero_drift_locks_exactly() {
        let drift = DriftModel::new(0.0, 1.0, 7);
        let ctrl = ControllerParams::default_tuned(0.4);
        let link = PhaseLink::from_wavelengths(780e-9, 795e-9, 795e-9, 0.0);
        let trace = simulate_lock(&drift, &ctrl, 200.0, &link);
        assert!(trace.lock_residual_rms(0.4) < 1e-12);
    }

    #[test]
    fn unlocked_random_walk_statistics() {
        // With gains zero the lock phase is a pure random walk; the
        // time-averaged mean square over N steps is s^2 (N+1)/2. Monte Carlo
        // ensemble against that closed form.
        let s = 0.01;
        let n_steps = 400usize;
        let n_runs = 300usize;
        let link = PhaseLink {
            ratio: 1.0,
            offset_rad: 0.0,
        };
        let mut acc = 0.0f64;
        for run in 0..n_runs {
            let drift = DriftModel::new(s, 1.0, 1000 + run as u64);
            let trace = simulate_lock(&drift, &ControllerParams::disabled(), n_steps as f64, &link);
            let rms = trace.lock_residual_rms(0.0);
            acc += rms * rms;
        }
        let mean_sq = acc / n_runs as f64;
        let expected = s * s * (n_steps as f64 + 1.0) / 2.0;
        assert!(
            (mean_sq - expected).abs() / expected < 0.15,
            "mean square {mean_sq} vs {expected}"
        );
    }

    #[test]
    fn tuned_controller_meets_residual_budget() {
        let drift = DriftModel::new(0.02, 1.0, 42);
        let ctrl = ControllerParams::default_tuned(0.0);
        let link = PhaseLink {
            ratio: 1.0,
            offset_rad: 0.0,
        };
        let trace = simulate_lock(&drift, &ctrl, 1e4, &link);
        assert_eq!(trace.len(), 10_000);
        let rms = trace.residual_rms(0.0);
        assert!(rms < 0.1, "residual RMS {rms}");
    }

    #[test]
    fn simulation_is_bit_reproducible() {
        let drift = DriftModel::<f64>::new(0.05, 0.5, 99);
        let ctrl = ControllerParams::default_tuned(1.0);
        let link = PhaseLink::from_wavelengths(780e-9, 795e-9, 795e-9, 0.1);
        let a = simulate_lock(&drift, &ctrl, 500.0, &link);
        let b = simulate_lock(&drift, &ctrl, 500.0, &link);
        for (x, y) in a.samples().iter().zip(b.samples().iter()) {
            assert_eq!(x.phi_lock_rad.to_bits(), y.phi_lock_rad.to_bits());
            assert_eq!(x.phi_rad.to_bits(), y.phi_rad.to_bits());
        }
    }

    #[test]
    fn penalty_constant_phase_is_one() {
        let samples: Vec<PhaseSample<f64>> = (0..100)
            .map(|k| PhaseSample {
                t_ms: k as f64,
                phi_lock_rad: 0.0,
                phi_rad: 1.3,
            })
            .collect();
        let trace = PhaseTrace::from_samples(samples).unwrap();
        assert!((visibility_penalty(&trace) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_uniform_phase_vanishes() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 200_000usize;
        let samples: Vec<PhaseSample<f64>> = (0..n)
            .map(|k| PhaseSample {
                t_ms: k as f64,
                phi_lock_rad: 0.0,
                phi_rad: (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 * PI,
            })
            .collect();
        let trace = PhaseTrace::from_samples(samples).unwrap();
        let p = visibility_penalty(&trace);
        // circular mean of uniform phase: O(1/sqrt(N))
        assert!(p < 5.0 / (n as f64).sqrt(), "penalty {p}");
    }

    #[test]
    fn penalty_gaussian_phase_matches_characteristic_function() {
        let sigma = 0.3f64;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 200_000usize;
        let samples: Vec<PhaseSample<f64>> = (0..n)
            .map(|k| {
                let g: f64 = rng.sample(StandardNormal);
                PhaseSample {
                    t_ms: k as f64,
                    phi_lock_rad: 0.0,
                    phi_rad: 0.7 + sigma * g,
                }
            })
            .collect();
        let trace = PhaseTrace::from_samples(samples).unwrap();
        let p = visibility_penalty(&trace);
        let expected = (-sigma * sigma / 2.0).exp(); // ~0.9560
        assert!((p - expected).abs() < 0.01, "penalty {p} vs {expected}");
        assert!((expected - 0.956).abs() < 1e-3);
    }

    // Link with the polarization sector: a dephased two-path state has
    // fringe visibility exactly equal to the coherence factor.
    #[test]
    fn dephased_state_fringe_visibility_equals_penalty() {
        use crate::optics::dephased_two_path_density;
        for &penalty in &[1.0, 0.7, 0.3, 0.0] {
            let cfg = SfwmPathConfig::<f64>::bell(BellKind::PsiPlus);
            let rho = dephased_two_path_density(&cfg, penalty);
            let mut pmax = f64::MIN;
            let mut pmin = f64::MAX;
            for k in 0..64 {
                let theta = k as f64 * PI / 32.0;
                let p = rho.projection_probability(
                    &PolarizationVector::linear(-PI / 4.0),
                    &PolarizationVector::linear(theta),
                );
                pmax = pmax.max(p);
                pmin = pmin.min(p);
            }
            let vis = (pmax - pmin) / (pmax + pmin);
            assert!((vis - penalty).abs() < 1e-9, "penalty {penalty} vis {vis}");
        }
    }

    #[test]
    fn phase_extraction_recovers_known_phases() {
        for &phi in &[0.0, 0.4, PI / 3.0, 1.9, PI, -2.0, 2.0 * PI / 3.0] {
            let mut cfg = SfwmPathConfig::<f64>::bell(BellKind::PsiPlus);
            cfg.phase = phi;
            let state = two_path_state(&cfg).state;
            let got = extract_two_path_phase(&state).unwrap();
            let diff = (got - phi + PI).rem_euclid(2.0 * PI) - PI;
            assert!(diff.abs() < 1e-9, "phi {phi}: extracted {got}");
        }
    }

    #[test]
    fn four_setpoint_calibration_is_linear() {
        let link = PhaseLink::from_wavelengths(780e-9, 795e-9, 795e-9, 0.15);
        let setpoints = [0.0, PI / 3.0, 2.0 * PI / 3.0, PI];
        let cal = calibrate_lock_points(&setpoints, &link).unwrap();
        assert!(cal.fit.r_squared > 0.9999, "R^2 = {}", cal.fit.r_squared);
        assert!((cal.fit.slope - link.ratio).abs() < 1e-6);
        assert!((cal.fit.intercept - 0.15).abs() < 1e-6);
    }

    #[test]
    fn trace_requires_increasing_time() {
        let samples = vec![
            PhaseSample {
                t_ms: 0.0,
                phi_lock_rad: 0.0,
                phi_rad: 0.0,
            },
            PhaseSample {
                t_ms: 0.0,
                phi_lock_rad: 0.1,
                phi_rad: 0.1,
            },
        ];
        assert!(PhaseTrace::from_samples(samples).is_err());
    }
}
