//! Least-squares fit of `offset + A cos(ωt + φ) e^{−κt}` to a sampled series.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // needed without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::solve_real;

pub const MIN_SAMPLES: usize = 50;
/// A fit fails when its residual rms exceeds this fraction of the series'
/// peak-to-peak range.
pub const MAX_RELATIVE_RESIDUAL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscillationFit {
    /// Angular frequency `ω ≥ 0`.
    pub frequency: f64,
    pub damping: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    pub residual_rms: f64,
    /// False when the series holds fewer than two cycles of any
    /// oscillation; `amplitude` is then the largest deviation from a
    /// straight line through the data.
    pub frequency_identified: bool,
}

impl OscillationFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.frequency * t + self.phase).cos() * (-self.damping * t).exp()
    }

    /// Fitted oscillation extrapolated to `t = 0`.
    pub fn start_value(&self) -> f64 {
        self.evaluate(0.0)
    }
}

fn peak_to_peak(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    hi - lo
}

/// Least-squares line through the data: `(intercept, slope)`.
fn linear_trend(t: &[f64], v: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in t.iter().zip(v) {
        sxx += (x - mt) * (x - mt);
        sxy += (x - mt) * (y - mv);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (mv - slope * mt, slope)
}

fn periodogram(t: &[f64], v: &[f64], omega: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in t.iter().zip(v) {
        let (s, c) = (omega * x).sin_cos();
        re += y * c;
        im -= y * s;
    }
    re * re + im * im
}

/// Frequency of the largest periodogram peak of the detrended series,
/// located on a twice-oversampled grid and refined by golden-section search.
fn spectral_peak(t: &[f64], detrended: &[f64]) -> f64 {
    let span = t[t.len() - 1] - t[0];
    let dt = span / (t.len() - 1) as f64;
    let d_omega = PI / span;
    let nyquist = PI / dt;
    let count = (nyquist / d_omega) as usize;
    let uniform = t
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));

    let mut best = (d_omega, -1.0);
    if uniform {
        // phasor recurrence along the uniform grid
        for k in 1..=count {
            let omega = k as f64 * d_omega;
            let (s0, c0) = (omega * t[0]).sin_cos();
            let (sd, cd) = (omega * dt).sin_cos();
            let (mut c, mut s) = (c0, s0);
            let (mut re, mut im) = (0.0, 0.0);
            for y in detrended {
                re += y * c;
                im -= y * s;
                let cn = c * cd - s * sd;
                s = s * cd + c * sd;
                c = cn;
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = (omega, p);
            }
        }
    } else {
        for k in 1..=count {
            let omega = k as f64 * d_omega;
            let p = periodogram(t, detrended, omega);
            if p > best.1 {
                best = (omega, p);
            }
        }
    }

    let (mut a, mut b) = ((best.0 - d_omega).max(0.5 * d_omega), best.0 + d_omega);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if periodogram(t, detrended, x1) >= periodogram(t, detrended, x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    0.5 * (a + b)
}

// parameter order: offset, amplitude, frequency, phase, damping
fn residuals_and_jacobian(t: &[f64], v: &[f64], p: &[f64; 5], jac: Option<&mut Vec<[f64; 5]>>) -> (Vec<f64>, f64) {
    let [off, amp, w, ph, k] = *p;
    let mut res = Vec::with_capacity(t.len());
    let mut cost = 0.0;
    let mut rows = jac;
    if let Some(j) = rows.as_deref_mut() {
        j.clear();
    }
    for (x, y) in t.iter().zip(v) {
        let e = (-k * x).exp();
        let (s, c) = (w * x + ph).sin_cos();
        let r = off + amp * c * e - y;
        cost += r * r;
        res.push(r);
        if let Some(j) = rows.as_deref_mut() {
            j.push([1.0, c * e, -amp * x * s * e, -amp * s * e, -amp * x * c * e]);
        }
    }
    (res, cost)
}

fn levenberg_marquardt(t: &[f64], v: &[f64], mut p: [f64; 5]) -> [f64; 5] {
    let mut jac = Vec::with_capacity(t.len());
    let (mut res, mut cost) = residuals_and_jacobian(t, v, &p, Some(&mut jac));
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [0.0f64; 25];
        let mut jtr = [0.0f64; 5];
        for (row, r) in jac.iter().zip(&res) {
            for a in 0..5 {
                jtr[a] += row[a] * r;
                for b in 0..5 {
                    jtj[a * 5 + b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for d in 0..5 {
                a[d * 5 + d] += lambda * jtj[d * 5 + d].max(1e-300);
            }
            let mut step = jtr.map(|x| -x);
            if !solve_real(&mut a, &mut step, 5) {
                lambda *= 10.0;
                continue;
            }
            let mut trial = p;
            for d in 0..5 {
                trial[d] += step[d];
            }
            let (_, trial_cost) = residuals_and_jacobian(t, v, &trial, None);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                let out = residuals_and_jacobian(t, v, &p, Some(&mut jac));
                res = out.0;
                cost = out.1;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                if rel < 1e-14 {
                    return p;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}

/// Fits `offset + A cos(ωt + φ) e^{−κt}`.
///
/// Without an initial guess the frequency is seeded from the periodogram
/// peak of the linearly detrended series and the damping from zero; with a
/// guess carrying a positive frequency, its frequency and damping are used.
/// Amplitude, phase and offset seeds always come from a linear least-squares
/// projection at the seeded frequency.
pub fn fit_oscillation(
    times: &[f64],
    values: &[f64],
    initial_guess: Option<&OscillationFit>,
) -> Result<OscillationFit> {
    if times.len() != values.len() {
        return Err(Error::InsufficientData(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_SAMPLES}",
            times.len()
        )));
    }
    if times.iter().chain(values).any(|x| !x.is_finite()) {
        return Err(Error::InsufficientData("non-finite sample".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::InsufficientData("times must increase".into()));
    }

    let ptp = peak_to_peak(values);
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (intercept, slope) = linear_trend(times, values);
    let detrended: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(x, y)| y - intercept - slope * x)
        .collect();

    let no_oscillation = || {
        let max_dev = detrended.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let rms = (detrended.iter().map(|r| r * r).sum::<f64>() / detrended.len() as f64).sqrt();
        OscillationFit {
            frequency: 0.0,
            damping: 0.0,
            amplitude: max_dev,
            offset: values.iter().sum::<f64>() / values.len() as f64,
            phase: 0.0,
            residual_rms: rms,
            frequency_identified: false,
        }
    };

    if ptp <= 1e-14 * scale || ptp == 0.0 {
        return Ok(no_oscillation());
    }

    let (omega0, kappa0) = match initial_guess {
        Some(g) if g.frequency > 0.0 => (g.frequency, g.damping),
        _ => (spectral_peak(times, &detrended), 0.0),
    };
    if omega0 * span < 4.0 * PI {
        return Ok(no_oscillation());
    }

    // fit in shifted time for conditioning
    let t0 = times[0];
    let shifted: Vec<f64> = times.iter().map(|x| x - t0).collect();
    let seed = linear_seed(&shifted, values, omega0, kappa0);
    let p = levenberg_marquardt(&shifted, values, seed);

    let [offset, mut amp, mut w, mut ph, kappa] = p;
    if amp < 0.0 {
        amp = -amp;
        ph += PI;
    }
    if w < 0.0 {
        w = -w;
        ph = -ph;
    }
    // back to absolute time
    let amplitude = amp * (kappa * t0).exp();
    let phase = wrap_phase(ph - w * t0);
    let fit = OscillationFit {
        frequency: w,
        damping: kappa,
        amplitude,
        offset,
        phase,
        residual_rms: 0.0,
        frequency_identified: true,
    };
    let ss: f64 = times
        .iter()
        .zip(values)
        .map(|(x, y)| (fit.evaluate(*x) - y).powi(2))
        .sum();
    let rms = (ss / times.len() as f64).sqrt();
    if !rms.is_finite() || !p.iter().all(|x| x.is_finite()) || rms > MAX_RELATIVE_RESIDUAL * ptp {
        return Err(Error::FitDiverged {
            residual_rms: rms,
            peak_to_peak: ptp,
        });
    }
    if w * span < 4.0 * PI {
        return Ok(no_oscillation());
    }
    Ok(OscillationFit {
        residual_rms: rms,
        ..fit
    })
}

fn wrap_phase(ph: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = ph % two_pi;
    if x > PI {
        x -= two_pi;
    } else if x <= -PI {
        x += two_pi;
    }
    x
}

fn linear_seed(t: &[f64], v: &[f64], omega: f64, kappa: f64) -> [f64; 5] {
    let mut a = [0.0f64; 9];
    let mut b = [0.0f64; 3];
    for (x, y) in t.iter().zip(v) {
        let e = (-kappa * x).exp();
        let (s, c) = (omega * x).sin_cos();
        let basis = [1.0, c * e, s * e];
        for i in 0..3 {
            b[i] += basis[i] * y;
            for j in 0..3 {
                a[i * 3 + j] += basis[i] * basis[j];
            }
        }
    }
    if !solve_real(&mut a, &mut b, 3) {
        return [v.iter().sum::<f64>() / v.len() as f64, 0.0, omega, 0.0, kappa];
    }
    // c1 cos + c2 sin = A cos(ωt + φ) with A cos φ = c1, −A sin φ = c2
    let amp = b[1].hypot(b[2]);
    let phase = (-b[2]).atan2(b[1]);
    [b[0], amp, omega, phase, kappa]
}
