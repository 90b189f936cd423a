//! Least-squares fitting helpers shared by the analysis layers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Straight-line least-squares fit `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> LinearFit<T> {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "linear fit needs at least two points");
    let n = T::of(xs.len() as f64);
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &x| a + x) / n;
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    };
    let intercept = my - slope * mx;
    let r_squared = if sxx > T::zero() && syy > T::zero() {
        (sxy * sxy) / (sxx * syy)
    } else if syy == T::zero() {
        T::one() // constant data, perfectly reproduced
    } else {
        T::zero()
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Power law `y = amplitude * x^exponent`, fitted in log-log space.
#[derive(Clone, Copy, Debug)]
pub struct PowerLaw<T> {
    pub amplitude: T,
    pub exponent: T,
}

impl<T: Real> PowerLaw<T> {
    pub fn eval(&self, x: T) -> T {
        self.amplitude * x.powf(self.exponent)
    }
}

/// Least-squares power-law fit through `(x, y)` points; exact for two points.
pub fn power_law_fit<T: Real>(points: &[(T, T)]) -> Result<PowerLaw<T>> {
    if points.len() < 2 {
        return Err(Error::DegeneratePowerLaw);
    }
    for &(x, y) in points {
        if x <= T::zero() || y <= T::zero() {
            return Err(Error::NonPositivePowerLawPoint {
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
    }
    let xs: Vec<T> = points.iter().map(|&(x, _)| x.ln()).collect();
    let ys: Vec<T> = points.iter().map(|&(_, y)| y.ln()).collect();
    let first = xs[0];
    if xs
        .iter()
        .all(|&x| (x - first).abs() < T::epsilon() * T::of(16.0))
    {
        // All abscissae identical: degenerate in the exponent, constant in y.
        let my = ys.iter().fold(T::zero(), |a, &v| a + v) / T::of(ys.len() as f64);
        return Ok(PowerLaw {
            amplitude: my.exp(),
            exponent: T::zero(),
        });
    }
    let lf = linear_fit(&xs, &ys);
    Ok(PowerLaw {
        amplitude: lf.intercept.exp(),
        exponent: lf.slope,
    })
}

/// Sinusoid `y = offset + amplitude * cos(x - phase)` fitted linearly via the
/// `[1, cos x, sin x]` basis (`x` is already the full fringe argument).
#[derive(Clone, Copy, Debug)]
pub struct SinusoidFit<T> {
    pub offset: T,
    pub amplitude: T,
    pub phase: T,
}

impl<T: Real> SinusoidFit<T> {
    pub fn eval(&self, x: T) -> T {
        self.offset + self.amplitude * (x - self.phase).cos()
    }

    /// Fringe contrast `(max - min) / (max + min)` of the fitted curve.
    pub fn visibility(&self) -> T {
        let hi = self.offset + self.amplitude;
        let lo = self.offset - self.amplitude;
        if hi + lo == T::zero() {
            T::zero()
        } else {
            (hi - lo) / (hi + lo)
        }
    }
}

pub fn sinusoid_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<SinusoidFit<T>> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 3 {
        return Err(Error::FringeFit {
            reason: format!("need at least 3 samples, got {}", xs.len()),
        });
    }
    // Normal equations for the 3-parameter linear model.
    let mut a = vec![vec![T::zero(); 3]; 3];
    let mut b = vec![T::zero(); 3];
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        let basis = [T::one(), x.cos(), x.sin()];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
            b[i] += basis[i] * y;
        }
    }
    let coeffs = crate::linalg::solve_real(&mut a, &mut b, "sinusoid fit").map_err(|_| {
        Error::FringeFit {
            reason: "singular normal equations (degenerate angle set)".into(),
        }
    })?;
    let offset = coeffs[0];
    let amplitude = (coeffs[1] * coeffs[1] + coeffs[2] * coeffs[2]).sqrt();
    let phase = coeffs[2].atan2(coeffs[1]);
    Ok(SinusoidFit {
        offset,
        amplitude,
        phase,
    })
}

/// Full width at half maximum of a sampled non-negative curve on a uniform
/// grid, with linear interpolation of the half-max crossings.
pub fn fwhm<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    assert_eq!(xs.len(), ys.len());
    let (peak_idx, &peak) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    if peak <= T::zero() {
        return None;
    }
    let half = peak * T::of(0.5);

    let mut left = None;
    for i in (1..=peak_idx).rev() {
        if ys[i - 1] <= half && ys[i] > half {
            let f = (half - ys[i - 1]) / (ys[i] - ys[i - 1]);
            left = Some(xs[i - 1] + f * (xs[i] - xs[i - 1]));
            break;
        }
    }
    let mut right = None;
    for i in peak_idx..(ys.len() - 1) {
        if ys[i] > half && ys[i + 1] <= half {
            let f = (ys[i] - half) / (ys[i] - ys[i + 1]);
            right = Some(xs[i] + f * (xs[i + 1] - xs[i]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    }
}

/// Equivalent width of a sampled non-negative profile: integral divided by
/// peak value.
pub fn equivalent_width<T: Real>(ys: &[T], dx: T) -> Option<T> {
    let peak = ys
        .iter()
        .cloned()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if peak <= T::zero() {
        return None;
    }
    let integral = ys.iter().fold(T::zero(), |a, &b| a + b) * dx;
    Some(integral / peak)
}
