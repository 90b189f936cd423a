//! Time-tag stream synthesis and correlation analysis.
//!
//! Pairs are generated as a homogeneous Poisson process thinned by the
//! polarization projection probability; each pair's anti-Stokes delay is
//! drawn from the temporal waveform intensity, each photon independently
//! survives its efficiency chain, and uncorrelated singles ride on top.
//! Times are quantized to integer nanoseconds. Everything is deterministic
//! under a fixed seed.

use crate::error::{Error, Result};
use crate::quantum::{PairState, PolarizationVector};
use crate::spectrum::TemporalWaveform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Detector channel identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Stokes = 0,
    AntiStokes = 1,
}

/// Per-channel efficiency chain.
#[derive(Clone, Copy, Debug)]
pub struct EfficiencyChain {
    pub fiber: f64,
    pub filter: f64,
    pub detector: f64,
}

impl EfficiencyChain {
    /// Fiber 70%, filter 70%, detector 50%.
    pub const REFERENCE: EfficiencyChain = EfficiencyChain {
        fiber: 0.70,
        filter: 0.70,
        detector: 0.50,
    };

    pub const UNIT: EfficiencyChain = EfficiencyChain {
        fiber: 1.0,
        filter: 1.0,
        detector: 1.0,
    };

    pub fn product(&self) -> f64 {
        self.fiber * self.filter * self.detector
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fiber", self.fiber),
            ("filter", self.filter),
            ("detector", self.detector),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Format {
                    what: "efficiency chain",
                    reason: format!("{name} efficiency must be in (0, 1], got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Duty cycle of the generation window.
pub const REFERENCE_DUTY_CYCLE: f64 = 0.10;
/// Reference spontaneous pair generation rate (1/s).
pub const REFERENCE_PAIR_RATE_HZ: f64 = 9800.0;
/// Reference total pump power (mW).
pub const REFERENCE_PUMP_POWER_MW: f64 = 0.016;
/// Coincidence window used for polarization statistics (ns).
pub const COINCIDENCE_WINDOW_NS: u64 = 300;

/// Sorted integer-nanosecond detection events on one channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeTagStream {
    pub channel: Channel,
    times_ns: Vec<u64>,
}

impl TimeTagStream {
    pub fn new(channel: Channel, times_ns: Vec<u64>) -> Result<Self> {
        for (i, w) in times_ns.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::UnsortedStream { index: i + 1 });
            }
        }
        Ok(Self { channel, times_ns })
    }

    pub fn from_unsorted(channel: Channel, mut times_ns: Vec<u64>) -> Self {
        times_ns.sort_unstable();
        Self { channel, times_ns }
    }

    pub fn times(&self) -> &[u64] {
        &self.times_ns
    }

    pub fn len(&self) -> usize {
        self.times_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ns.is_empty()
    }
}

/// Full description of one synthetic acquisition.
#[derive(Clone, Debug)]
pub struct ExperimentScenario {
    pub pair_state: PairState<f64>,
    pub waveform: TemporalWaveform<f64>,
    /// Spontaneous pair generation rate inside the duty window (1/s).
    pub pair_rate_hz: f64,
    /// Source-side uncorrelated singles rates (1/s), before efficiency.
    pub singles_rate_hz: [f64; 2],
    /// Uncorrelated leakage pair rate (1/s): one photon to each channel at
    /// independent times.
    pub leakage_pair_rate_hz: f64,
    pub efficiencies: [EfficiencyChain; 2],
    pub duty_cycle: f64,
    /// Analyzer acceptance states; `None` collects all polarizations.
    pub analyzers: Option<(PolarizationVector<f64>, PolarizationVector<f64>)>,
    pub duration_s: f64,
    pub seed: u64,
    /// Cap on generated (pre-thinning) events.
    pub event_cap: f64,
}

impl ExperimentScenario {
    pub fn new(
        pair_state: PairState<f64>,
        waveform: TemporalWaveform<f64>,
        pair_rate_hz: f64,
        duration_s: f64,
        seed: u64,
    ) -> Self {
        Self {
            pair_state,
            waveform,
            pair_rate_hz,
            singles_rate_hz: [0.0, 0.0],
            leakage_pair_rate_hz: 0.0,
            efficiencies: [EfficiencyChain::UNIT, EfficiencyChain::UNIT],
            duty_cycle: 1.0,
            analyzers: None,
            duration_s,
            seed,
            event_cap: 5e7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pair_rate_hz < 0.0
            || self.leakage_pair_rate_hz < 0.0
            || self.singles_rate_hz.iter().any(|r| *r < 0.0)
        {
            return Err(Error::Format {
                what: "scenario",
                reason: "rates must be non-negative".into(),
            });
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return Err(Error::Format {
                what: "scenario",
                reason: format!("duty cycle must be in (0, 1], got {}", self.duty_cycle),
            });
        }
        if self.duration_s <= 0.0 {
            return Err(Error::Format {
                what: "scenario",
                reason: "duration must be positive".into(),
            });
        }
        for e in &self.efficiencies {
            e.validate()?;
        }
        Ok(())
    }

    /// Projection probability of the analyzer pair on the polarization state.
    pub fn projection_probability(&self) -> f64 {
        match &self.analyzers {
            Some((a_s, a_as)) => self.pair_state.projection_probability(a_s, a_as),
            None => 1.0,
        }
    }

    fn expected_generated_events(&self) -> f64 {
        let window_s = self.duration_s * self.duty_cycle;
        let pairs = self.pair_rate_hz * self.projection_probability() * window_s;
        let leakage = self.leakage_pair_rate_hz * window_s;
        let singles: f64 = self.singles_rate_hz.iter().sum::<f64>() * window_s;
        2.0 * pairs + 2.0 * leakage + singles
    }
}

/// Inverse-CDF sampler over the waveform intensity, linear within bins.
struct DelaySampler {
    t0_ns: f64,
    dt_ns: f64,
    cdf: Vec<f64>,
}

impl DelaySampler {
    fn new(wf: &TemporalWaveform<f64>) -> Result<Self> {
        let intensity = wf.intensity();
        let total: f64 = intensity.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyWaveform);
        }
        let mut cdf = Vec::with_capacity(intensity.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in &intensity {
            acc += i / total;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self {
            t0_ns: wf.time_ns(0),
            dt_ns: wf.dt_ns(),
            cdf,
        })
    }

    fn sample(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).saturating_sub(1);
        let k = k.min(self.cdf.len() - 2);
        let lo = self.cdf[k];
        let hi = self.cdf[k + 1];
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        self.t0_ns + (k as f64 + frac) * self.dt_ns
    }
}

/// Synthesize both detection streams for a scenario.
pub fn generate_timetags(scenario: &ExperimentScenario) -> Result<(TimeTagStream, TimeTagStream)> {
    scenario.validate()?;
    let expected = scenario.expected_generated_events();
    if expected > scenario.event_cap {
        return Err(Error::EventBudgetExceeded {
            expected_events: expected,
            cap: scenario.event_cap,
        });
    }
    let sampler = DelaySampler::new(&scenario.waveform)?;
    let mut rng = ChaCha12Rng::seed_from_u64(scenario.seed);
    let duration_ns = scenario.duration_s * 1e9;
    let window_s = scenario.duration_s * scenario.duty_cycle;
    let eta = [
        scenario.efficiencies[0].product(),
        scenario.efficiencies[1].product(),
    ];

    let mut stokes: Vec<u64> = Vec::new();
    let mut anti: Vec<u64> = Vec::new();

    let draw_count = |rng: &mut ChaCha12Rng, mean: f64| -> u64 {
        if mean <= 0.0 {
            0
        } else {
            Poisson::new(mean).expect("positive mean").sample(rng) as u64
        }
    };

    // Correlated pairs.
    let n_pairs = draw_count(
        &mut rng,
        scenario.pair_rate_hz * scenario.projection_probability() * window_s,
    );
    for _ in 0..n_pairs {
        let t_s = rng.gen::<f64>() * duration_ns;
        let tau = sampler.sample(rng.gen::<f64>());
        let keep_s = rng.gen::<f64>() < eta[0];
        let keep_as = rng.gen::<f64>() < eta[1];
        let t_as = t_s + tau;
        if keep_s && t_s >= 0.0 && t_s < duration_ns {
            stokes.push(t_s.round() as u64);
        }
        if keep_as && t_as >= 0.0 && t_as < duration_ns {
            anti.push(t_as.round() as u64);
        }
    }

    // Uncorrelated leakage pairs: independent times on each channel.
    let n_leak = draw_count(&mut rng, scenario.leakage_pair_rate_hz * window_s);
    for _ in 0..n_leak {
        let t_s = rng.gen::<f64>() * duration_ns;
        let t_as = rng.gen::<f64>() * duration_ns;
        if rng.gen::<f64>() < eta[0] {
            stokes.push(t_s.round() as u64);
        }
        if rng.gen::<f64>() < eta[1] {
            anti.push(t_as.round() as u64);
        }
    }

    // Uncorrelated singles.
    for (ch, out) in [(0usize, &mut stokes), (1usize, &mut anti)] {
        let n = draw_count(&mut rng, scenario.singles_rate_hz[ch] * window_s);
        for _ in 0..n {
            if rng.gen::<f64>() < eta[ch] {
                out.push((rng.gen::<f64>() * duration_ns).round() as u64);
            }
        }
    }

    stokes.sort_unstable();
    anti.sort_unstable();
    Ok((
        TimeTagStream {
            channel: Channel::Stokes,
            times_ns: stokes,
        },
        TimeTagStream {
            channel: Channel::AntiStokes,
            times_ns: anti,
        },
    ))
}

/// Binned coincidence counts over a delay range, with the singles totals and
/// duration needed for normalization.
#[derive(Clone, Debug)]
pub struct CoincidenceHistogram {
    pub bin_ns: u64,
    pub tau_min_ns: i64,
    pub counts: Vec<u64>,
    pub singles: (u64, u64),
    pub duration_ns: u64,
}

impl CoincidenceHistogram {
    pub fn tau_center_ns(&self, bin: usize) -> f64 {
        self.tau_min_ns as f64 + (bin as f64 + 0.5) * self.bin_ns as f64
    }

    /// Accidental (uncorrelated) counts expected per bin.
    pub fn accidental_level(&self) -> f64 {
        let (n1, n2) = self.singles;
        n1 as f64 * n2 as f64 * self.bin_ns as f64 / self.duration_ns as f64
    }

    /// Normalized cross-correlation per bin.
    pub fn g2(&self) -> Vec<f64> {
        let acc = self.accidental_level();
        self.counts.iter().map(|&c| c as f64 / acc).collect()
    }

    /// Peak of the moving-average-smoothed g2 (default 5-bin window) and the
    /// delay at which it occurs. Smoothing suppresses single-bin shot noise.
    pub fn smoothed_peak(&self, smooth_bins: usize) -> (f64, f64) {
        let g2 = self.g2();
        let half = smooth_bins / 2;
        let mut best = (0.0f64, 0.0f64);
        for i in half..g2.len().saturating_sub(half) {
            let lo = i - half;
            let hi = (i + half + 1).min(g2.len());
            let avg = g2[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            if avg > best.0 {
                best = (avg, self.tau_center_ns(i));
            }
        }
        best
    }
}

fn require_sorted_nonempty(s: &TimeTagStream) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(())
}

/// Duration estimate for externally read streams: latest tag + 1 ns.
pub fn estimate_duration_ns(streams: &[&TimeTagStream]) -> u64 {
    streams
        .iter()
        .filter_map(|s| s.times().last().copied())
        .max()
        .map(|t| t + 1)
        .unwrap_or(0)
}

/// Raw coincidence histogram of `t2 - t1` over `[range.0, range.1)` plus the
/// normalized correlation. Two-pointer sweep, O(N + M + matches).
pub fn cross_correlation(
    s1: &TimeTagStream,
    s2: &TimeTagStream,
    bin_ns: u64,
    range_ns: (i64, i64),
    duration_ns: u64,
) -> Result<CoincidenceHistogram> {
    require_sorted_nonempty(s1)?;
    require_sorted_nonempty(s2)?;
    let (lo, hi) = range_ns;
    if hi <= lo || bin_ns == 0 || !((hi - lo) as u64).is_multiple_of(bin_ns) {
        return Err(Error::Format {
            what: "correlation range",
            reason: format!("range ({lo}, {hi}) must be a positive multiple of bin {bin_ns}"),
        });
    }
    let n_bins = ((hi - lo) as u64 / bin_ns) as usize;
    let mut counts = vec![0u64; n_bins];
    let t2 = s2.times();
    let mut start = 0usize;
    for &t1 in s1.times() {
        let t1 = t1 as i64;
        while start < t2.len() && (t2[start] as i64) < t1 + lo {
            start += 1;
        }
        let mut j = start;
        while j < t2.len() && (t2[j] as i64) < t1 + hi {
            let tau = t2[j] as i64 - t1;
            counts[((tau - lo) as u64 / bin_ns) as usize] += 1;
            j += 1;
        }
    }
    Ok(CoincidenceHistogram {
        bin_ns,
        tau_min_ns: lo,
        counts,
        singles: (s1.len() as u64, s2.len() as u64),
        duration_ns,
    })
}

/// Coincidences with `t2 - t1` in `[lo, hi)`.
pub fn coincidences_in_window(s1: &TimeTagStream, s2: &TimeTagStream, lo: i64, hi: i64) -> u64 {
    let t2 = s2.times();
    let mut start = 0usize;
    let mut count = 0u64;
    for &t1 in s1.times() {
        let t1 = t1 as i64;
        while start < t2.len() && (t2[start] as i64) < t1 + lo {
            start += 1;
        }
        let mut j = start;
        while j < t2.len() && (t2[j] as i64) < t1 + hi {
            count += 1;
            j += 1;
        }
    }
    count
}

/// Single-window normalized correlation over `[lo, hi)` ns.
pub fn window_g2(
    s1: &TimeTagStream,
    s2: &TimeTagStream,
    lo: i64,
    hi: i64,
    duration_ns: u64,
) -> Result<f64> {
    require_sorted_nonempty(s1)?;
    require_sorted_nonempty(s2)?;
    let counts = coincidences_in_window(s1, s2, lo, hi) as f64;
    let acc = s1.len() as f64 * s2.len() as f64 * (hi - lo) as f64 / duration_ns as f64;
    Ok(counts / acc)
}

/// Zero-delay autocorrelation estimate.
#[derive(Clone, Copy, Debug)]
pub struct AutoCorrelation {
    pub g2_zero: f64,
    pub events: u64,
    /// Fewer than 1000 events: the estimate carries wide uncertainty.
    pub low_statistics: bool,
}

/// Hanbury Brown-Twiss emulation: split the stream 50/50 at a seeded
/// beamsplitter and normalize the zero-delay cross coincidences.
pub fn auto_correlation(
    stream: &TimeTagStream,
    bin_ns: u64,
    seed: u64,
    duration_ns: u64,
) -> Result<AutoCorrelation> {
    require_sorted_nonempty(stream)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &t in stream.times() {
        if rng.gen::<bool>() {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    let events = stream.len() as u64;
    let low_statistics = events < 1000;
    if a.is_empty() || b.is_empty() {
        return Ok(AutoCorrelation {
            g2_zero: f64::NAN,
            events,
            low_statistics: true,
        });
    }
    let sa = TimeTagStream {
        channel: stream.channel,
        times_ns: a,
    };
    let sb = TimeTagStream {
        channel: stream.channel,
        times_ns: b,
    };
    let half = (bin_ns / 2).max(1) as i64;
    let counts = coincidences_in_window(&sa, &sb, -half, half) as f64;
    let acc = sa.len() as f64 * sb.len() as f64 * (2 * half) as f64 / duration_ns as f64;
    Ok(AutoCorrelation {
        g2_zero: counts / acc,
        events,
        low_statistics,
    })
}

/// Homogeneous Poisson stream (coherent-light statistics).
pub fn generate_poisson_stream(
    channel: Channel,
    rate_hz: f64,
    duration_s: f64,
    seed: u64,
) -> TimeTagStream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mean = rate_hz * duration_s;
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
    } else {
        0
    };
    let duration_ns = duration_s * 1e9;
    let mut times: Vec<u64> = (0..n)
        .map(|_| (rng.gen::<f64>() * duration_ns).round() as u64)
        .collect();
    times.sort_unstable();
    TimeTagStream {
        channel,
        times_ns: times,
    }
}

/// Chaotic (thermal) stream: a doubly stochastic Poisson process whose
/// intensity is the squared magnitude of a complex Ornstein-Uhlenbeck field,
/// giving `g2(0) = 2` for bins well inside the coherence time.
pub fn generate_thermal_stream(
    channel: Channel,
    mean_rate_hz: f64,
    coherence_ns: f64,
    duration_s: f64,
    seed: u64,
) -> TimeTagStream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dt_ns = coherence_ns / 25.0;
    let n_seg = (duration_s * 1e9 / dt_ns).ceil() as u64;
    let decay = (-dt_ns / coherence_ns).exp();
    let refresh = (1.0 - decay * decay).sqrt();
    // stationary complex field with <|E|^2> = 1
    let mut e_re: f64 = rng.sample::<f64, _>(StandardNormal) / 2.0f64.sqrt();
    let mut e_im: f64 = rng.sample::<f64, _>(StandardNormal) / 2.0f64.sqrt();
    let mut times = Vec::new();
    for seg in 0..n_seg {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        e_re = decay * e_re + refresh * g1 / 2.0f64.sqrt();
        e_im = decay * e_im + refresh * g2 / 2.0f64.sqrt();
        let intensity = mean_rate_hz * (e_re * e_re + e_im * e_im);
        let mean_count = intensity * dt_ns * 1e-9;
        let n = if mean_count > 0.0 {
            Poisson::new(mean_count)
                .expect("positive mean")
                .sample(&mut rng) as u64
        } else {
            0
        };
        let t_start = seg as f64 * dt_ns;
        for _ in 0..n {
            times.push((t_start + rng.gen::<f64>() * dt_ns).round() as u64);
        }
    }
    times.sort_unstable();
    TimeTagStream {
        channel,
        times_ns: times,
    }
}

/// Cauchy-Schwarz violation factor `g2_cross^2 / (g2_auto_s g2_auto_as)`;
/// values above 1 are nonclassical.
pub fn cauchy_schwarz_factor(g2_cross_peak: f64, g2_auto_s: f64, g2_auto_as: f64) -> f64 {
    g2_cross_peak * g2_cross_peak / (g2_auto_s * g2_auto_as)
}

/// Visibility bound from the normalized cross-correlation,
/// `V = (g2 - 1)/(g2 + 1)`.
pub fn visibility_from_g2(g2: f64) -> f64 {
    (g2 - 1.0) / (g2 + 1.0)
}

/// Inverse of [`visibility_from_g2`].
pub fn g2_for_visibility(v: f64) -> f64 {
    (1.0 + v) / (1.0 - v)
}

/// One fringe-scan acquisition: coincidence counts versus analyzer angle
/// plus the fitted sinusoid.
#[derive(Clone, Debug)]
pub struct FringeScan {
    /// (anti-Stokes analyzer angle rad, window coincidences).
    pub points: Vec<(f64, u64)>,
    pub fit: Option<crate::fit::SinusoidFit<f64>>,
    pub visibility: Option<f64>,
    /// Populated when the sinusoid fit fails; raw points stay available.
    pub fit_error: Option<String>,
}

/// Scan the anti-Stokes analyzer over `scan_angles` with the Stokes analyzer
/// fixed, counting coincidences in `[0, window_ns)` per point. Each point
/// derives its own seed from the scenario seed.
pub fn fringe_scan(
    base: &ExperimentScenario,
    fixed_stokes_angle_rad: f64,
    scan_angles_rad: &[f64],
    window_ns: u64,
) -> Result<FringeScan> {
    base.validate()?;
    let mut points = Vec::with_capacity(scan_angles_rad.len());
    for (k, &angle) in scan_angles_rad.iter().enumerate() {
        let mut scenario = base.clone();
        scenario.analyzers = Some((
            PolarizationVector::linear(fixed_stokes_angle_rad),
            PolarizationVector::linear(angle),
        ));
        scenario.seed = base
            .seed
            .wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (s, a) = generate_timetags(&scenario)?;
        let counts = if s.is_empty() || a.is_empty() {
            0
        } else {
            coincidences_in_window(&s, &a, 0, window_ns as i64)
        };
        points.push((angle, counts));
    }
    // Fringe argument is 2 theta for polarization fringes.
    let xs: Vec<f64> = points.iter().map(|&(a, _)| 2.0 * a).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| c as f64).collect();
    match crate::fit::sinusoid_fit(&xs, &ys) {
        Ok(fit) if fit.offset > 0.0 => {
            let visibility = fit.visibility();
            Ok(FringeScan {
                points,
                fit: Some(fit),
                visibility: Some(visibility),
                fit_error: None,
            })
        }
        Ok(fit) => Ok(FringeScan {
            points,
            fit: Some(fit),
            visibility: None,
            fit_error: Some("fitted offset is not positive".into()),
        }),
        Err(e) => Ok(FringeScan {
            points,
            fit: None,
            visibility: None,
            fit_error: Some(e.to_string()),
        }),
    }
}

/// Rate accounting from detected coincidences back to generated pairs and
/// brightness figures.
#[derive(Clone, Copy, Debug)]
pub struct BrightnessReport {
    pub detected_pair_rate_hz: f64,
    pub pair_efficiency: f64,
    pub duty_cycle: f64,
    pub generated_pair_rate_hz: f64,
    /// Generated pairs per second per MHz of bandwidth.
    pub spectral_brightness: f64,
    /// Spectral brightness per mW of pump power.
    pub normalized_brightness: f64,
}

pub fn brightness_report(
    detected_pair_rate_hz: f64,
    efficiencies: &[EfficiencyChain; 2],
    duty_cycle: f64,
    bandwidth_mhz: f64,
    pump_power_mw: f64,
) -> BrightnessReport {
    let pair_efficiency = efficiencies[0].product() * efficiencies[1].product();
    let generated = detected_pair_rate_hz / (pair_efficiency * duty_cycle);
    let spectral = generated / bandwidth_mhz;
    BrightnessReport {
        detected_pair_rate_hz,
        pair_efficiency,
        duty_cycle,
        generated_pair_rate_hz: generated,
        spectral_brightness: spectral,
        normalized_brightness: spectral / pump_power_mw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_state, BellKind, DensityMatrix};
    use crate::scalar::{cr, czero};
    use crate::C;

    /// Exponential-intensity test waveform peaked just after zero.
    fn test_waveform(tau0_ns: f64) -> TemporalWaveform<f64> {
        let dt = 1.0;
        let n = 4096usize;
        let samples: Vec<C<f64>> = (0..n)
            .map(|j| {
                let t = (j as f64 - 64.0) * dt;
                if t < 0.0 {
                    czero()
                } else {
                    cr((-t / (2.0 * tau0_ns)).exp())
                }
            })
            .collect();
        TemporalWaveform::from_samples(-64.0, dt, samples).unwrap()
    }

    fn bare_scenario(pair_rate: f64, duration_s: f64, seed: u64) -> ExperimentScenario {
        ExperimentScenario::new(
            PairState::Pure(bell_state(BellKind::PsiPlus)),
            test_waveform(120.0),
            pair_rate,
            duration_s,
            seed,
        )
    }

    /// Asymptotic Kolmogorov-Smirnov p-value.
    fn ks_p_value(d: f64, n: f64) -> f64 {
        let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
        let mut p = 0.0;
        for k in 1..=100 {
            let sign = if k % 2 == 1 { 2.0 } else { -2.0 };
            p += sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        }
        p.clamp(0.0, 1.0)
    }

    #[test]
    fn zero_pairs_gives_poisson_singles_budget() {
        let mut sc = bare_scenario(0.0, 2.0, 11);
        sc.singles_rate_hz = [4000.0, 6000.0];
        let (s, a) = generate_timetags(&sc).unwrap();
        for (stream, rate) in [(&s, 4000.0), (&a, 6000.0)] {
            let mean: f64 = rate * 2.0;
            let sigma = mean.sqrt();
            let n = stream.len() as f64;
            assert!((n - mean).abs() < 5.0 * sigma, "count {n} vs mean {mean}");
        }
    }

    #[test]
    fn pair_delays_follow_waveform_shape() {
        // Unit efficiencies, no extra singles: the correlation histogram is
        // the delay distribution plus the pair-pair accidental floor.
        // One-sample KS test against that mixture.
        let sc = bare_scenario(10_000.0, 2.0, 21);
        let (s, a) = generate_timetags(&sc).unwrap();
        let duration_ns = (sc.duration_s * 1e9) as u64;
        let (lo_ns, hi_ns) = (-64i64, 1536i64);
        let hist = cross_correlation(&s, &a, 4, (lo_ns, hi_ns), duration_ns).unwrap();
        let total: f64 = hist.counts.iter().sum::<u64>() as f64;
        assert!(total > 5000.0);

        // Model CDF over the same bins from the waveform intensity, mixed
        // with the flat accidental contribution implied by the singles.
        let range_ns = (hi_ns - lo_ns) as f64;
        let expected_acc = s.len() as f64 * a.len() as f64 * range_ns / duration_ns as f64;
        let acc_frac = expected_acc / total;
        let wf = &sc.waveform;
        let dt = wf.dt_ns();
        let intensity = wf.intensity();
        let bin_mass = |lo: f64, hi: f64| -> f64 {
            intensity
                .iter()
                .enumerate()
                .filter(|(j, _)| {
                    let t = wf.time_ns(*j);
                    t >= lo && t < hi
                })
                .map(|(_, i)| i * dt)
                .sum()
        };
        let range_mass = bin_mass(lo_ns as f64, hi_ns as f64);
        let mut d_max: f64 = 0.0;
        let mut emp_acc = 0.0;
        let mut model_acc = 0.0;
        for (k, &c) in hist.counts.iter().enumerate() {
            let lo = hist.tau_min_ns as f64 + k as f64 * hist.bin_ns as f64;
            emp_acc += c as f64 / total;
            model_acc += (1.0 - acc_frac) * bin_mass(lo, lo + hist.bin_ns as f64) / range_mass
                + acc_frac * hist.bin_ns as f64 / range_ns;
            d_max = d_max.max((emp_acc - model_acc).abs());
        }
        let p = ks_p_value(d_max, total);
        assert!(p > 0.01, "KS p = {p}, D = {d_max}");
    }

    #[test]
    fn efficiency_and_duty_accounting_recovers_generated_rate() {
        let mut sc = bare_scenario(REFERENCE_PAIR_RATE_HZ, 40.0, 33);
        sc.efficiencies = [EfficiencyChain::REFERENCE, EfficiencyChain::REFERENCE];
        sc.duty_cycle = REFERENCE_DUTY_CYCLE;
        let (s, a) = generate_timetags(&sc).unwrap();
        // True detected pairs: coincidences in a wide window minus accidental
        // background (negligible here: no singles configured).
        let detected = coincidences_in_window(&s, &a, -64, 1536) as f64;
        let detected_rate = detected / sc.duration_s;
        let report = brightness_report(
            detected_rate,
            &sc.efficiencies,
            sc.duty_cycle,
            2.9,
            REFERENCE_PUMP_POWER_MW,
        );
        let expect_detected_rate = REFERENCE_PAIR_RATE_HZ
            * EfficiencyChain::REFERENCE.product().powi(2)
            * REFERENCE_DUTY_CYCLE;
        let sigma = (expect_detected_rate * sc.duration_s).sqrt() / sc.duration_s;
        assert!(
            (detected_rate - expect_detected_rate).abs() < 5.0 * sigma,
            "detected {detected_rate} vs {expect_detected_rate}"
        );
        assert!(
            (report.generated_pair_rate_hz - REFERENCE_PAIR_RATE_HZ).abs()
                < 5.0 * sigma / (report.pair_efficiency * report.duty_cycle),
            "generated {}",
            report.generated_pair_rate_hz
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let mut sc = bare_scenario(5000.0, 1.0, 77);
        sc.singles_rate_hz = [2000.0, 1000.0];
        sc.leakage_pair_rate_hz = 500.0;
        let (s1, a1) = generate_timetags(&sc).unwrap();
        let (s2, a2) = generate_timetags(&sc).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(a1, a2);
    }

    #[test]
    fn generation_rejects_over_budget() {
        let mut sc = bare_scenario(1e9, 100.0, 1);
        sc.event_cap = 1e6;
        assert!(matches!(
            generate_timetags(&sc),
            Err(Error::EventBudgetExceeded { .. })
        ));
    }

    #[test]
    fn uncorrelated_streams_have_unit_g2() {
        let s = generate_poisson_stream(Channel::Stokes, 50_000.0, 4.0, 5);
        let a = generate_poisson_stream(Channel::AntiStokes, 50_000.0, 4.0, 6);
        assert!(s.len() + a.len() > 100_000);
        let duration_ns = 4_000_000_000u64;
        let hist = cross_correlation(&s, &a, 50, (-1000, 1000), duration_ns).unwrap();
        let g2 = hist.g2();
        let acc = hist.accidental_level();
        let sigma = 1.0 / acc.sqrt();
        for (k, v) in g2.iter().enumerate() {
            assert!((v - 1.0).abs() < 5.0 * sigma, "bin {k}: g2 = {v}");
        }
        // Normalization closure: the mean sits within 2% of unity.
        let mean: f64 = g2.iter().sum::<f64>() / g2.len() as f64;
        assert!((0.98..=1.02).contains(&mean), "mean g2 = {mean}");
    }

    #[test]
    fn correlation_rejects_bad_range_and_empty() {
        let s = generate_poisson_stream(Channel::Stokes, 1000.0, 0.1, 1);
        let empty = TimeTagStream::new(Channel::AntiStokes, vec![]).unwrap();
        assert!(matches!(
            cross_correlation(&s, &empty, 1, (0, 100), 1000),
            Err(Error::EmptyStream)
        ));
        let a = generate_poisson_stream(Channel::AntiStokes, 1000.0, 0.1, 2);
        assert!(cross_correlation(&s, &a, 7, (0, 100), 1000).is_err());
    }

    #[test]
    fn stream_construction_validates_order() {
        assert!(TimeTagStream::new(Channel::Stokes, vec![1, 2, 2, 5]).is_ok());
        assert!(matches!(
            TimeTagStream::new(Channel::Stokes, vec![5, 2]),
            Err(Error::UnsortedStream { index: 1 })
        ));
    }

    #[test]
    fn poisson_stream_autocorrelation_is_one() {
        let s = generate_poisson_stream(Channel::Stokes, 200_000.0, 5.0, 9);
        let auto = auto_correlation(&s, 100, 1, 5_000_000_000).unwrap();
        assert!(!auto.low_statistics);
        // ~50k coincidences expected in the +-50 ns window; 5 sigma.
        let acc = (s.len() as f64 / 2.0).powi(2) * 100.0 / 5e9;
        let sigma = 1.0 / acc.sqrt();
        assert!(
            (auto.g2_zero - 1.0).abs() < 5.0 * sigma,
            "g2(0) = {}",
            auto.g2_zero
        );
    }

    #[test]
    fn thermal_stream_autocorrelation_is_two() {
        let s = generate_thermal_stream(Channel::Stokes, 150_000.0, 400.0, 6.0, 13);
        let auto = auto_correlation(&s, 20, 2, 6_000_000_000).unwrap();
        assert!(!auto.low_statistics);
        // bin (20 ns) well inside the coherence time (400 ns)
        assert!(
            (auto.g2_zero - 2.0).abs() < 0.15,
            "g2(0) = {}",
            auto.g2_zero
        );
    }

    #[test]
    fn sparse_stream_flags_low_statistics() {
        let s = TimeTagStream::new(Channel::Stokes, vec![1000]).unwrap();
        let auto = auto_correlation(&s, 10, 3, 1_000_000).unwrap();
        assert!(auto.low_statistics);
    }

    #[test]
    fn cauchy_schwarz_reference_values() {
        assert!((cauchy_schwarz_factor(35.0, 2.0, 2.0) - 306.25).abs() < 1e-12);
        assert!((cauchy_schwarz_factor(10.0, 2.0, 2.0) - 25.0).abs() < 1e-12);
        assert!((cauchy_schwarz_factor(2.0, 2.0, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visibility_formula_and_inverse() {
        assert!((visibility_from_g2(10.0) - 9.0 / 11.0).abs() < 1e-15);
        assert!((visibility_from_g2(1.0)).abs() < 1e-15);
        assert!(visibility_from_g2(1e12) > 0.999_999);
        let g2_boundary = g2_for_visibility(1.0 / 2.0f64.sqrt());
        assert!((g2_boundary - 5.8284).abs() < 1e-3, "g2 = {g2_boundary}");
    }

    #[test]
    fn fringe_scan_of_pure_bell_state_has_unit_visibility() {
        let mut sc = bare_scenario(100_000.0, 1.0, 55);
        sc.pair_state = PairState::Pure(bell_state(BellKind::PsiPlus));
        let angles: Vec<f64> = (0..12)
            .map(|k| k as f64 * std::f64::consts::PI / 12.0)
            .collect();
        let scan = fringe_scan(&sc, 0.0, &angles, COINCIDENCE_WINDOW_NS).unwrap();
        let v = scan.visibility.expect("fit succeeds");
        assert!(v > 0.98, "visibility {v}");
    }

    #[test]
    fn fringe_scan_of_dephased_state_is_flat() {
        use crate::optics::{dephased_two_path_density, SfwmPathConfig};
        let rho = dephased_two_path_density(&SfwmPathConfig::<f64>::bell(BellKind::PsiPlus), 0.0);
        let mut sc = bare_scenario(100_000.0, 1.0, 56);
        sc.pair_state = PairState::Mixed(rho);
        let angles: Vec<f64> = (0..12)
            .map(|k| k as f64 * std::f64::consts::PI / 12.0)
            .collect();
        let scan = fringe_scan(&sc, -std::f64::consts::FRAC_PI_4, &angles, 300).unwrap();
        let v = scan.visibility.expect("fit succeeds");
        assert!(v < 0.05, "visibility {v}");
    }

    #[test]
    fn fringe_visibility_converges_with_duration() {
        // Monotone (within error bars) approach of the fitted visibility to 1
        // for a pure Bell state as statistics grow.
        let angles: Vec<f64> = (0..12)
            .map(|k| k as f64 * std::f64::consts::PI / 12.0)
            .collect();
        let mut visibilities = Vec::new();
        for &duration in &[0.02, 0.2, 2.0] {
            let sc = bare_scenario(50_000.0, duration, 71);
            let scan = fringe_scan(&sc, 0.0, &angles, 300).unwrap();
            visibilities.push(scan.visibility.expect("fit succeeds"));
        }
        assert!(visibilities[2] > 0.99);
        // allow shot-noise slack on the shorter runs
        assert!(visibilities[2] >= visibilities[0] - 0.05);
        assert!(visibilities[1] >= visibilities[0] - 0.05);
    }

    #[test]
    fn efficiency_scaling_preserves_g2_peak() {
        // Scaling both chains by alpha: pair coincidences scale by alpha^2,
        // singles by alpha, so the normalized peak is invariant in
        // expectation.
        let build = |alpha: f64, seed: u64| {
            let mut sc = bare_scenario(30_000.0, 8.0, seed);
            sc.singles_rate_hz = [15_000.0, 15_000.0];
            let eff = EfficiencyChain {
                fiber: alpha,
                filter: 1.0,
                detector: 1.0,
            };
            sc.efficiencies = [eff, eff];
            sc
        };
        let peak_of = |alpha: f64, seed: u64| {
            let sc = build(alpha, seed);
            let (s, a) = generate_timetags(&sc).unwrap();
            let hist =
                cross_correlation(&s, &a, 4, (-64, 1536), (sc.duration_s * 1e9) as u64).unwrap();
            hist.smoothed_peak(5).0
        };
        let mut full = Vec::new();
        let mut half = Vec::new();
        for k in 0..4 {
            full.push(peak_of(1.0, 100 + k));
            half.push(peak_of(0.6, 200 + k));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let m_full = mean(&full);
        let m_half = mean(&half);
        assert!(
            (m_full - m_half).abs() / m_full < 0.25,
            "peaks {m_full} vs {m_half}"
        );
    }

    #[test]
    fn mixed_state_projection_thins_pair_rate() {
        // Maximally mixed state with crossed analyzers keeps 1/4 of pairs.
        let mut sc = bare_scenario(40_000.0, 2.0, 91);
        sc.pair_state = PairState::Mixed(DensityMatrix::maximally_mixed());
        sc.analyzers = Some((
            PolarizationVector::horizontal(),
            PolarizationVector::vertical(),
        ));
        let (s, _) = generate_timetags(&sc).unwrap();
        let mean = 40_000.0 * 0.25 * 2.0;
        assert!((s.len() as f64 - mean).abs() < 5.0 * mean.sqrt());
    }

    #[test]
    fn brightness_reference_arithmetic() {
        let report = brightness_report(
            REFERENCE_PAIR_RATE_HZ
                * EfficiencyChain::REFERENCE.product().powi(2)
                * REFERENCE_DUTY_CYCLE,
            &[EfficiencyChain::REFERENCE, EfficiencyChain::REFERENCE],
            REFERENCE_DUTY_CYCLE,
            2.9,
            REFERENCE_PUMP_POWER_MW,
        );
        assert!((report.generated_pair_rate_hz - 9800.0).abs() < 1e-6);
        assert!((report.spectral_brightness - 9800.0 / 2.9).abs() < 1e-6);
        assert!((report.spectral_brightness - 3379.3).abs() < 0.1);
        assert!((report.normalized_brightness - 9800.0 / 2.9 / 0.016).abs() < 1e-6);
        assert!((report.normalized_brightness - 211_206.9).abs() < 0.1);
    }

    #[test]
    fn unit_efficiency_unit_duty_is_identity() {
        let report = brightness_report(
            1234.0,
            &[EfficiencyChain::UNIT, EfficiencyChain::UNIT],
            1.0,
            1.0,
            1.0,
        );
        assert!((report.generated_pair_rate_hz - 1234.0).abs() < 1e-12);
    }
}
