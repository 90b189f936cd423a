//! Joint spectral amplitude of the photon pair and its Fourier-domain
//! temporal waveform.
//!
//! The physical spectrum is not derivable from first principles here, so a
//! declared parametric stand-in is used: a complex Lorentzian transparency
//! window of FWHM `window_fwhm_mhz` multiplied by a causal phase-matching
//! sinc of group delay `group_delay_ns`,
//!
//! ```text
//! Phi(x) = sinc(g x) e^{i g x} / (1 - 2 i x / w),   g = group_delay / 2,
//! ```
//!
//! whose inverse transform is a one-sided exponential convolved with a
//! rectangle of width `group_delay_ns` -- causal by construction. A
//! detector-side rise factor `1 - e^{-tau/rise_time}` shapes the onset.
//! The window and group delay are tied to coupling power by fitting power
//! laws through measured (power, coherence-time, bandwidth) anchor points;
//! any parameter pair reproducing those observables is an equally valid
//! stand-in.

use crate::error::{Error, Result};
use crate::fft;
use crate::fit::{self, PowerLaw};
use crate::scalar::{cr, czero, Real, C};

/// Default rise time of the temporal waveform onset (ns).
pub const DEFAULT_RISE_TIME_NS: f64 = 25.0;

/// Measured (coupling power mW, coherence time ns, bandwidth MHz) anchors
/// used for the default calibration.
pub const REFERENCE_ANCHORS: [(f64, f64, f64); 2] = [(2.0, 300.0, 2.9), (0.13, 900.0, 0.8)];

/// Uniform angular-frequency grid of detunings around line center.
///
/// Frequencies are stored as rad/ns; `span_mhz` is the one-sided extent, so
/// the grid covers `[-span, +span]` MHz with a power-of-two point count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    len: usize,
    span_mhz: T,
}

/// rad/ns per MHz.
fn mhz_to_rad_per_ns<T: Real>(mhz: T) -> T {
    mhz * T::of(2.0 * std::f64::consts::PI * 1e-3)
}

/// MHz per rad/ns.
fn rad_per_ns_to_mhz<T: Real>(x: T) -> T {
    x * T::of(1e3 / (2.0 * std::f64::consts::PI))
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(len: usize, span_mhz: T) -> Result<Self> {
        if !len.is_power_of_two() || len < 4 {
            return Err(Error::GridNotPowerOfTwo { len });
        }
        Ok(Self { len, span_mhz })
    }

    /// Default analysis grid: 2^14 points spanning +-64 MHz.
    pub fn default_analysis() -> Self {
        Self {
            len: 1 << 14,
            span_mhz: T::of(64.0),
        }
    }

    /// Time-focused grid: 2^15 points spanning +-512 MHz, giving about 1 ns
    /// waveform resolution for peak-location work.
    pub fn fine_time() -> Self {
        Self {
            len: 1 << 15,
            span_mhz: T::of(512.0),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span_mhz(&self) -> T {
        self.span_mhz
    }

    /// Grid step in rad/ns.
    pub fn step_rad_per_ns(&self) -> T {
        mhz_to_rad_per_ns(self.span_mhz) * T::of(2.0) / T::of(self.len as f64)
    }

    /// Detuning of sample `k` in rad/ns.
    pub fn detuning(&self, k: usize) -> T {
        let centered = T::of(k as f64) - T::of((self.len / 2) as f64);
        centered * self.step_rad_per_ns()
    }

    /// Waveform sample spacing implied by this grid (ns).
    pub fn time_step_ns(&self) -> T {
        T::of(2.0 * std::f64::consts::PI) / (self.step_rad_per_ns() * T::of(self.len as f64))
    }
}

/// Stand-in model parameters for the pair spectrum.
#[derive(Clone, Copy, Debug)]
pub struct SpectralModelParams<T> {
    /// Optical depth of the medium (context parameter).
    pub optical_depth: T,
    /// Medium length in meters (context parameter).
    pub medium_length_m: T,
    /// Coupling laser power (mW).
    pub coupling_power_mw: T,
    /// Pump detuning from resonance (MHz, context parameter).
    pub pump_detuning_mhz: T,
    /// Extra dephasing broadening the transparency window (MHz).
    pub dephasing_mhz: T,
    /// FWHM of the Lorentzian transparency window (MHz).
    pub window_fwhm_mhz: T,
    /// Width of the causal phase-matching rectangle (ns).
    pub group_delay_ns: T,
    /// Onset rise time of the temporal waveform (ns); zero disables shaping.
    pub rise_time_ns: T,
    /// Amplitude weight of a broad second spectral component, modeling the
    /// wide pedestal around the transparency window. Zero (the default)
    /// reduces to the single-window model.
    pub broad_weight: T,
    /// FWHM of the broad component (MHz); ignored when `broad_weight` is 0.
    pub broad_fwhm_mhz: T,
}

impl<T: Real> SpectralModelParams<T> {
    /// Context defaults with an explicit spectral shape.
    pub fn new(coupling_power_mw: T, window_fwhm_mhz: T, group_delay_ns: T) -> Self {
        Self {
            optical_depth: T::of(32.0),
            medium_length_m: T::of(0.017),
            coupling_power_mw,
            pump_detuning_mhz: T::of(80.0),
            dephasing_mhz: T::zero(),
            window_fwhm_mhz,
            group_delay_ns,
            rise_time_ns: T::of(DEFAULT_RISE_TIME_NS),
            broad_weight: T::zero(),
            broad_fwhm_mhz: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("optical_depth", self.optical_depth),
            ("medium_length_m", self.medium_length_m),
            ("coupling_power_mw", self.coupling_power_mw),
            ("window_fwhm_mhz", self.window_fwhm_mhz),
        ];
        for (name, v) in checks {
            if v <= T::zero() || !v.is_finite() {
                return Err(Error::Format {
                    what: "spectral model parameters",
                    reason: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        if self.group_delay_ns < T::zero() || self.rise_time_ns < T::zero() {
            return Err(Error::Format {
                what: "spectral model parameters",
                reason: "group_delay_ns and rise_time_ns must be non-negative".into(),
            });
        }
        if self.broad_weight < T::zero()
            || self.broad_weight > T::one()
            || (self.broad_weight > T::zero() && self.broad_fwhm_mhz <= T::zero())
        {
            return Err(Error::Format {
                what: "spectral model parameters",
                reason: "broad component needs weight in [0,1] and a positive width".into(),
            });
        }
        Ok(())
    }

    /// Window FWHM including the dephasing contribution (MHz).
    pub fn effective_window_mhz(&self) -> T {
        self.window_fwhm_mhz + T::of(2.0) * self.dephasing_mhz
    }
}

/// Sampled complex spectral amplitude on a uniform detuning grid, peak
/// normalized to unit magnitude.
#[derive(Clone, Debug)]
pub struct BiphotonSpectrum<T> {
    grid: FrequencyGrid<T>,
    amps: Vec<C<T>>,
}

impl<T: Real> BiphotonSpectrum<T> {
    /// Wrap externally computed samples (test fixtures, file ingestion).
    pub fn from_samples(grid: FrequencyGrid<T>, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::Format {
                what: "spectrum samples",
                reason: format!("expected {} samples, got {}", grid.len(), amps.len()),
            });
        }
        Ok(Self { grid, amps })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    /// `|Phi(edge)| / |Phi(peak)|`, the grid-truncation figure of merit.
    pub fn edge_ratio(&self) -> T {
        let peak = self
            .amps
            .iter()
            .fold(T::zero(), |a, z| if z.norm() > a { z.norm() } else { a });
        if peak <= T::zero() {
            return T::zero();
        }
        let edge = self.amps[0]
            .norm()
            .max(self.amps[self.amps.len() - 1].norm());
        edge / peak
    }

    /// FWHM of `|Phi|^2` in MHz, if resolvable on the grid.
    pub fn bandwidth_fwhm_mhz(&self) -> Option<T> {
        let xs: Vec<T> = (0..self.grid.len())
            .map(|k| self.grid.detuning(k))
            .collect();
        let ys: Vec<T> = self.amps.iter().map(|z| z.norm_sqr()).collect();
        fit::fwhm(&xs, &ys).map(rad_per_ns_to_mhz)
    }
}

/// Evaluate the spectral model on a grid.
///
/// The grid must span at least ten window widths; the returned amplitude is
/// peak-normalized, and [`BiphotonSpectrum::edge_ratio`] reports how far the
/// amplitude has fallen at the grid boundary.
pub fn spectrum<T: Real>(
    params: &SpectralModelParams<T>,
    grid: &FrequencyGrid<T>,
) -> Result<BiphotonSpectrum<T>> {
    params.validate()?;
    let w_mhz = params.effective_window_mhz();
    let widest = if params.broad_weight > T::zero() {
        w_mhz.max(params.broad_fwhm_mhz)
    } else {
        w_mhz
    };
    let full_span_mhz = grid.span_mhz * T::of(2.0);
    let required = widest * T::of(10.0);
    if full_span_mhz < required {
        return Err(Error::GridTooNarrow {
            span_mhz: full_span_mhz.as_f64(),
            required_span_mhz: required.as_f64(),
        });
    }

    let w = mhz_to_rad_per_ns(w_mhz);
    let wb = mhz_to_rad_per_ns(params.broad_fwhm_mhz.max(T::of(1e-6)));
    let beta = params.broad_weight;
    let g = params.group_delay_ns * T::of(0.5);
    let two = T::of(2.0);
    let mut amps: Vec<C<T>> = (0..grid.len())
        .map(|k| {
            let x = grid.detuning(k);
            let narrow = cr(T::one() - beta) / C::new(T::one(), -two * x / w);
            let window = if beta > T::zero() {
                narrow + cr(beta) / C::new(T::one(), -two * x / wb)
            } else {
                narrow
            };
            let gx = g * x;
            let sinc = if gx.abs() < T::of(1e-8) {
                T::one()
            } else {
                gx.sin() / gx
            };
            window * C::new(gx.cos(), gx.sin()) * cr(sinc)
        })
        .collect();

    let peak = amps
        .iter()
        .fold(T::zero(), |a, z| if z.norm() > a { z.norm() } else { a });
    let inv = cr(T::one() / peak);
    for a in amps.iter_mut() {
        *a *= inv;
    }
    Ok(BiphotonSpectrum { grid: *grid, amps })
}

/// Complex temporal waveform on a uniform, centered time grid, normalized to
/// unit L2 norm.
#[derive(Clone, Debug)]
pub struct TemporalWaveform<T> {
    t0_ns: T,
    dt_ns: T,
    samples: Vec<C<T>>,
}

impl<T: Real> TemporalWaveform<T> {
    /// Wrap raw samples and normalize to unit L2 norm.
    pub fn from_samples(t0_ns: T, dt_ns: T, samples: Vec<C<T>>) -> Result<Self> {
        let mut wf = Self {
            t0_ns,
            dt_ns,
            samples,
        };
        wf.normalize()?;
        Ok(wf)
    }

    fn normalize(&mut self) -> Result<()> {
        let energy = self.samples.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) * self.dt_ns;
        if energy <= T::zero() {
            return Err(Error::EmptyWaveform);
        }
        let inv = cr(T::one() / energy.sqrt());
        for s in self.samples.iter_mut() {
            *s *= inv;
        }
        Ok(())
    }

    pub fn dt_ns(&self) -> T {
        self.dt_ns
    }

    pub fn time_ns(&self, j: usize) -> T {
        self.t0_ns + T::of(j as f64) * self.dt_ns
    }

    pub fn samples(&self) -> &[C<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `|psi|^2` samples.
    pub fn intensity(&self) -> Vec<T> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Time of the intensity maximum (ns).
    pub fn peak_time_ns(&self) -> T {
        let mut best = (T::zero(), T::min_value());
        for (j, z) in self.samples.iter().enumerate() {
            let i = z.norm_sqr();
            if i > best.1 {
                best = (self.time_ns(j), i);
            }
        }
        best.0
    }

    /// Fraction of the total intensity inside `[from_ns, to_ns)`.
    pub fn energy_fraction_in(&self, from_ns: T, to_ns: T) -> T {
        let mut inside = T::zero();
        let mut total = T::zero();
        for (j, z) in self.samples.iter().enumerate() {
            let t = self.time_ns(j);
            let i = z.norm_sqr();
            total += i;
            if t >= from_ns && t < to_ns {
                inside += i;
            }
        }
        if total > T::zero() {
            inside / total
        } else {
            T::zero()
        }
    }

    /// Multiply by the onset factor `1 - e^{-tau/rise}` for `tau >= 0`,
    /// zero out `tau < 0`, and renormalize. `rise_ns = 0` only enforces
    /// causality.
    pub fn with_rise(&self, rise_ns: T) -> Result<Self> {
        let mut out = self.clone();
        for (j, z) in out.samples.iter_mut().enumerate() {
            let t = self.t0_ns + T::of(j as f64) * self.dt_ns;
            if t < T::zero() {
                *z = czero();
            } else if rise_ns > T::zero() {
                let f = T::one() - (-t / rise_ns).exp();
                *z *= cr(f);
            }
        }
        out.normalize()?;
        Ok(out)
    }
}

/// Discrete inverse Fourier transform of the spectrum, normalized to unit
/// L2 norm. `spectrum_from_waveform` is its inverse up to normalization.
pub fn waveform_from_spectrum<T: Real>(spec: &BiphotonSpectrum<T>) -> TemporalWaveform<T> {
    let (samples, t0, dt) = inverse_transform_raw(spec);
    TemporalWaveform::from_samples(t0, dt, samples).expect("spectrum has nonzero energy")
}

/// Raw centered inverse transform: `psi(t_j) = (dw/2pi) sum_k Phi_k e^{-i x_k t_j}`.
fn inverse_transform_raw<T: Real>(spec: &BiphotonSpectrum<T>) -> (Vec<C<T>>, T, T) {
    let n = spec.grid.len();
    let dw = spec.grid.step_rad_per_ns();
    let dt = spec.grid.time_step_ns();
    let mut buf: Vec<C<T>> = spec
        .amps
        .iter()
        .enumerate()
        .map(|(k, z)| if k % 2 == 0 { *z } else { -*z })
        .collect();
    fft::fft(&mut buf);
    let scale = dw / T::of(2.0 * std::f64::consts::PI);
    for (j, z) in buf.iter_mut().enumerate() {
        let sign = if j % 2 == 0 { scale } else { -scale };
        *z *= cr(sign);
    }
    let t0 = -T::of((n / 2) as f64) * dt;
    (buf, t0, dt)
}

/// Forward transform of a waveform back onto its frequency grid,
/// peak-normalized like [`spectrum`] output.
pub fn spectrum_from_waveform<T: Real>(
    wf: &TemporalWaveform<T>,
    grid: &FrequencyGrid<T>,
) -> Result<BiphotonSpectrum<T>> {
    if wf.len() != grid.len() {
        return Err(Error::Format {
            what: "waveform",
            reason: format!("length {} does not match grid {}", wf.len(), grid.len()),
        });
    }
    let mut buf: Vec<C<T>> = wf
        .samples
        .iter()
        .enumerate()
        .map(|(j, z)| if j % 2 == 0 { *z } else { -*z })
        .collect();
    fft::ifft(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        if k % 2 == 1 {
            *z = -*z;
        }
    }
    let peak = buf
        .iter()
        .fold(T::zero(), |a, z| if z.norm() > a { z.norm() } else { a });
    if peak <= T::zero() {
        return Err(Error::EmptyWaveform);
    }
    let inv = cr(T::one() / peak);
    for z in buf.iter_mut() {
        *z *= inv;
    }
    BiphotonSpectrum::from_samples(*grid, buf)
}

/// Model waveform for a parameter set: spectrum, inverse transform, rise
/// shaping, unit normalization.
pub fn model_waveform<T: Real>(
    params: &SpectralModelParams<T>,
    grid: &FrequencyGrid<T>,
) -> Result<TemporalWaveform<T>> {
    let spec = spectrum(params, grid)?;
    waveform_from_spectrum(&spec).with_rise(params.rise_time_ns)
}

/// Coherence time as the equivalent width of `|psi|^2`: integral over peak,
/// in ns. For a unit-norm waveform this is the inverse peak intensity.
pub fn coherence_time<T: Real>(wf: &TemporalWaveform<T>) -> Result<T> {
    fit::equivalent_width(&wf.intensity(), wf.dt_ns).ok_or(Error::EmptyWaveform)
}

/// Least-squares power law `tau_c = a * P^-b` through measured
/// (power, coherence-time) points; exact through two points.
///
/// Returned as a [`PowerLaw`] whose `exponent` is `-b`.
pub fn calibrate_power_law<T: Real>(points: &[(T, T)]) -> Result<PowerLaw<T>> {
    fit::power_law_fit(points)
}

/// Power-law calibration of the spectral shape against anchor observables.
#[derive(Clone, Copy, Debug)]
pub struct PowerCalibration<T> {
    /// Coherence time law (ns vs mW), exponent negative.
    pub tau_law: PowerLaw<T>,
    /// Bandwidth law (MHz vs mW), exponent positive.
    pub bandwidth_law: PowerLaw<T>,
    /// Rise time applied to calibrated waveforms (ns).
    pub rise_time_ns: T,
}

impl<T: Real> PowerCalibration<T> {
    /// Fit both laws through (power, coherence time, bandwidth) anchors.
    pub fn from_anchors(anchors: &[(T, T, T)], rise_time_ns: T) -> Result<Self> {
        let tau_pts: Vec<(T, T)> = anchors.iter().map(|&(p, t, _)| (p, t)).collect();
        let bw_pts: Vec<(T, T)> = anchors.iter().map(|&(p, _, b)| (p, b)).collect();
        Ok(Self {
            tau_law: calibrate_power_law(&tau_pts)?,
            bandwidth_law: calibrate_power_law(&bw_pts)?,
            rise_time_ns,
        })
    }

    /// Calibration through the built-in reference anchors.
    pub fn reference() -> Self {
        let anchors: Vec<(T, T, T)> = REFERENCE_ANCHORS
            .iter()
            .map(|&(p, t, b)| (T::of(p), T::of(t), T::of(b)))
            .collect();
        Self::from_anchors(&anchors, T::of(DEFAULT_RISE_TIME_NS)).expect("anchors are valid")
    }

    pub fn coherence_time_ns(&self, power_mw: T) -> T {
        self.tau_law.eval(power_mw)
    }

    pub fn bandwidth_mhz(&self, power_mw: T) -> T {
        self.bandwidth_law.eval(power_mw)
    }

    /// Solve the spectral shape at a coupling power: the group delay is
    /// bisected so the calibrated waveform hits the coherence-time law
    /// exactly; the window FWHM is then chosen to bring the spectral FWHM
    /// as close to the bandwidth law as the model family allows.
    pub fn params_for_power(
        &self,
        power_mw: T,
        grid: &FrequencyGrid<T>,
    ) -> Result<SpectralModelParams<T>> {
        if power_mw <= T::zero() {
            return Err(Error::NonPositivePowerLawPoint {
                x: power_mw.as_f64(),
                y: 0.0,
            });
        }
        let tau_target = self.coherence_time_ns(power_mw);
        let bw_target = self.bandwidth_mhz(power_mw);

        // Window candidates from a fraction of the bandwidth target up to the
        // widest window the grid span admits.
        let span_cap = grid.span_mhz * T::of(2.0) / T::of(10.0);
        let w_lo = bw_target * T::of(0.3);
        let w_hi = (bw_target * T::of(4.0)).min(span_cap);
        if w_hi <= w_lo {
            return Err(Error::GridTooNarrow {
                span_mhz: (grid.span_mhz * T::of(2.0)).as_f64(),
                required_span_mhz: (w_lo * T::of(10.0)).as_f64(),
            });
        }

        let eval = |w_mhz: T| -> Option<(SpectralModelParams<T>, T)> {
            let params = self.solve_group_delay(power_mw, w_mhz, tau_target, grid)?;
            let bw = spectrum(&params, grid).ok()?.bandwidth_fwhm_mhz()?;
            Some((params, bw))
        };

        // Coarse scan, then golden-section refinement of |bw - target|.
        let n_scan = 13;
        let ratio = (w_hi / w_lo).as_f64().ln() / (n_scan - 1) as f64;
        let mut best: Option<(T, SpectralModelParams<T>, T)> = None;
        let mut best_idx = 0usize;
        for i in 0..n_scan {
            let w = w_lo * T::of((ratio * i as f64).exp());
            if let Some((params, bw)) = eval(w) {
                let err = (bw - bw_target).abs();
                if best.as_ref().map(|(e, _, _)| err < *e).unwrap_or(true) {
                    best = Some((err, params, w));
                    best_idx = i;
                }
            }
        }
        let (_, mut best_params, _) = best.ok_or(Error::Format {
            what: "power calibration",
            reason: format!("no feasible window at {power_mw} mW"),
        })?;

        // Golden-section polish on the bracketing interval.
        let lo_i = best_idx.saturating_sub(1);
        let hi_i = (best_idx + 1).min(n_scan - 1);
        let mut a = w_lo * T::of((ratio * lo_i as f64).exp());
        let mut b = w_lo * T::of((ratio * hi_i as f64).exp());
        let gr = T::of(0.618_033_988_749_895);
        let mut best_err = (spectrum(&best_params, grid)?
            .bandwidth_fwhm_mhz()
            .unwrap_or(T::zero())
            - bw_target)
            .abs();
        for _ in 0..20 {
            let c1 = b - (b - a) * gr;
            let c2 = a + (b - a) * gr;
            let e1 = eval(c1);
            let e2 = eval(c2);
            let f1 = e1.as_ref().map(|(_, bw)| (*bw - bw_target).abs());
            let f2 = e2.as_ref().map(|(_, bw)| (*bw - bw_target).abs());
            match (f1, f2) {
                (Some(v1), Some(v2)) => {
                    if v1 < v2 {
                        b = c2;
                        if v1 < best_err {
                            best_err = v1;
                            best_params = e1.unwrap().0;
                        }
                    } else {
                        a = c1;
                        if v2 < best_err {
                            best_err = v2;
                            best_params = e2.unwrap().0;
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(best_params)
    }

    /// Bisect the group delay so the rise-shaped waveform's equivalent width
    /// matches `tau_target` on `grid`. Returns `None` when even a vanishing
    /// group delay overshoots the target (window too narrow).
    fn solve_group_delay(
        &self,
        power_mw: T,
        window_mhz: T,
        tau_target: T,
        grid: &FrequencyGrid<T>,
    ) -> Option<SpectralModelParams<T>> {
        let tau_of = |tg: T| -> Option<T> {
            let mut p = SpectralModelParams::new(power_mw, window_mhz, tg);
            p.rise_time_ns = self.rise_time_ns;
            let wf = model_waveform(&p, grid).ok()?;
            coherence_time(&wf).ok()
        };
        let mut lo = T::of(1.0);
        let mut hi = tau_target * T::of(8.0);
        let tau_lo = tau_of(lo)?;
        if tau_lo > tau_target {
            return None;
        }
        let tau_hi = tau_of(hi)?;
        if tau_hi < tau_target {
            return None;
        }
        for _ in 0..50 {
            let mid = (lo + hi) * T::of(0.5);
            let t = tau_of(mid)?;
            if t < tau_target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) / tau_target < T::of(1e-4) {
                break;
            }
        }
        let tg = (lo + hi) * T::of(0.5);
        let mut p = SpectralModelParams::new(power_mw, window_mhz, tg);
        p.rise_time_ns = self.rise_time_ns;
        Some(p)
    }
}
