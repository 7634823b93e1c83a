//! Multi-Gaussian peak extraction by Levenberg-Marquardt least squares.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::synth::Spectrum;
use crate::matrix::{cholesky_solve, spd_inverse, Matrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPeak<T> {
    pub center: T,
    pub sigma: T,
    /// Peak height.
    pub amplitude: T,
}

impl<T: Real> GaussianPeak<T> {
    pub fn eval(&self, x: T) -> T {
        let u = (x - self.center) / self.sigma;
        self.amplitude * (-(u * u) * T::lit(0.5)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_peaks: usize,
    /// Fit an additional constant offset.
    pub baseline: bool,
    pub max_iterations: usize,
    /// Minimum spacing of initial centres (MHz); defaults to three grid steps.
    pub min_separation: Option<f64>,
}

impl FitOptions {
    pub fn new(n_peaks: usize) -> Self {
        Self {
            n_peaks,
            baseline: false,
            max_iterations: 200,
            min_separation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport<T> {
    /// Sorted by ascending centre.
    pub peaks: Vec<GaussianPeak<T>>,
    pub baseline: Option<T>,
    /// Parameter covariance, parameters ordered `(center, sigma, amplitude)`
    /// per peak in fit order, then baseline.
    pub covariance: Option<Vec<Vec<T>>>,
    pub residual_norm: T,
    pub iterations: usize,
    pub converged: bool,
    pub reseeded: bool,
}

impl<T: Real> FitReport<T> {
    /// Heights scaled so the largest equals `reference` (use one for a
    /// plain global normalization).
    pub fn normalized_heights(&self, reference: T) -> Vec<T> {
        let max = self
            .peaks
            .iter()
            .fold(T::zero(), |m, p| m.max(p.amplitude.abs()));
        self.peaks
            .iter()
            .map(|p| {
                if max > T::zero() {
                    p.amplitude / max * reference
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum FitError<T: Real> {
    #[error("fit precondition: {0}")]
    Precondition(String),
    #[error("could not place {wanted} distinct initial peaks (found {found})")]
    DegenerateInit { wanted: usize, found: usize },
    #[error("fit did not converge after {} iterations (residual {})", .0.iterations, .0.residual_norm)]
    NotConverged(Box<FitReport<T>>),
}

fn model<T: Real>(params: &[T], n_peaks: usize, x: T) -> T {
    let mut y = if params.len() > 3 * n_peaks {
        params[3 * n_peaks]
    } else {
        T::zero()
    };
    for k in 0..n_peaks {
        let (c, s, a) = (params[3 * k], params[3 * k + 1], params[3 * k + 2]);
        let u = (x - c) / s;
        y = y + a * (-(u * u) * T::lit(0.5)).exp();
    }
    y
}

fn residuals<T: Real>(params: &[T], n_peaks: usize, s: &Spectrum<T>) -> Vec<T> {
    s.detuning
        .iter()
        .zip(&s.signal)
        .map(|(&x, &y)| model(params, n_peaks, x) - y)
        .collect()
}

fn jacobian<T: Real>(params: &[T], n_peaks: usize, s: &Spectrum<T>) -> Matrix<T> {
    let m = s.len();
    let np = params.len();
    let mut j = Matrix::zeros(m, np);
    for (i, &x) in s.detuning.iter().enumerate() {
        for k in 0..n_peaks {
            let (c, sg, a) = (params[3 * k], params[3 * k + 1], params[3 * k + 2]);
            let d = x - c;
            let e = (-(d * d) / (T::lit(2.0) * sg * sg)).exp();
            j[(i, 3 * k)] = a * e * d / (sg * sg);
            j[(i, 3 * k + 1)] = a * e * d * d / (sg * sg * sg);
            j[(i, 3 * k + 2)] = e;
        }
        if np > 3 * n_peaks {
            j[(i, 3 * n_peaks)] = T::one();
        }
    }
    j
}

fn half_sq<T: Real>(r: &[T]) -> T {
    r.iter().map(|&x| x * x).sum::<T>() * T::lit(0.5)
}

/// Indices of strict local maxima, highest first, at least `min_sep` apart.
fn pick_maxima<T: Real>(s: &Spectrum<T>, min_sep: T, candidates: Vec<usize>, want: usize) -> Vec<usize> {
    let mut c = candidates;
    c.sort_by(|&a, &b| s.signal[b].partial_cmp(&s.signal[a]).unwrap().then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    for i in c {
        if chosen.len() == want {
            break;
        }
        if chosen
            .iter()
            .all(|&j| (s.detuning[i] - s.detuning[j]).abs() >= min_sep)
        {
            chosen.push(i);
        }
    }
    chosen
}

fn local_maxima<T: Real>(y: &[T]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > T::zero())
        .collect()
}

/// Local minima of the (negative) second difference: centres of peaks and
/// of shoulders that have no maximum of their own.
fn shoulders<T: Real>(y: &[T]) -> Vec<usize> {
    let n = y.len();
    if n < 5 {
        return Vec::new();
    }
    let d2: Vec<T> = (1..n - 1)
        .map(|i| y[i + 1] - T::lit(2.0) * y[i] + y[i - 1])
        .collect();
    (1..d2.len() - 1)
        .filter(|&k| d2[k] < T::zero() && d2[k] < d2[k - 1] && d2[k] <= d2[k + 1] && y[k + 1] > T::zero())
        .map(|k| k + 1)
        .collect()
}

fn half_width<T: Real>(s: &Spectrum<T>, i: usize, floor: T) -> T {
    let half = (s.signal[i] + floor) * T::lit(0.5);
    let mut lo = i;
    while lo > 0 && s.signal[lo - 1] > half && s.signal[lo - 1] <= s.signal[lo] {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < s.len() && s.signal[hi + 1] > half && s.signal[hi + 1] <= s.signal[hi] {
        hi += 1;
    }
    // FWHM = 2 sqrt(2 ln 2) sigma
    (s.detuning[hi] - s.detuning[lo]) / T::lit(2.354_820_045_030_949)
}

fn initial_params<T: Real>(s: &Spectrum<T>, idx: &[usize], baseline: bool, step: T) -> Vec<T> {
    let floor = if baseline {
        s.signal.iter().fold(T::infinity(), |m, &y| m.min(y))
    } else {
        T::zero()
    };
    let mut p = Vec::with_capacity(3 * idx.len() + 1);
    for &i in idx {
        p.push(s.detuning[i]);
        p.push(half_width(s, i, floor).max(step));
        p.push(s.signal[i] - floor);
    }
    if baseline {
        p.push(floor);
    }
    p
}

/// Fit `n_peaks` Gaussians to a spectrum.
///
/// Initial centres are the highest local maxima at least the minimum
/// separation apart. If too few exist, shoulders are added once before
/// giving up.
pub fn fit_peaks<T: Real>(s: &Spectrum<T>, opts: &FitOptions) -> Result<FitReport<T>, FitError<T>> {
    let n = opts.n_peaks;
    if n == 0 {
        return Err(FitError::Precondition("need at least one peak".into()));
    }
    if s.len() < 9 * n {
        return Err(FitError::Precondition(format!(
            "{} samples are too few for {n} peaks (need {})",
            s.len(),
            9 * n
        )));
    }
    if s.detuning.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FitError::Precondition("detuning grid must be strictly ascending".into()));
    }
    let step = (s.detuning[s.len() - 1] - s.detuning[0]) / T::lit((s.len() - 1) as f64);
    let min_sep = opts
        .min_separation
        .map(T::lit)
        .unwrap_or(step * T::lit(3.0));

    let mut reseeded = false;
    let mut chosen = pick_maxima(s, min_sep, local_maxima(&s.signal), n);
    if chosen.len() < n {
        reseeded = true;
        let mut cands = local_maxima(&s.signal);
        cands.extend(shoulders(&s.signal));
        cands.sort_unstable();
        cands.dedup();
        chosen = pick_maxima(s, min_sep, cands, n);
        if chosen.len() < n {
            return Err(FitError::DegenerateInit {
                wanted: n,
                found: chosen.len(),
            });
        }
    }
    chosen.sort_by(|&a, &b| s.detuning[a].partial_cmp(&s.detuning[b]).unwrap());

    let mut params = initial_params(s, &chosen, opts.baseline, step);
    let np = params.len();
    let mut r = residuals(&params, n, s);
    let mut cost = half_sq(&r);
    let scale = half_sq(&s.signal).max(T::min_positive_value());

    let mut lambda = T::lit(1e-3);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let j = jacobian(&params, n, s);
        let jt = j.transpose();
        let jtj = jt.matmul(&j);
        let grad = jt.mul_vec(&r);
        let grad_inf = grad.iter().fold(T::zero(), |m, &g| m.max(g.abs()));
        if cost <= T::lit(1e-30) * scale || grad_inf <= T::lit(1e-15) * scale {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda < T::lit(1e16) {
            let mut a = jtj.clone();
            for d in 0..np {
                a[(d, d)] = a[(d, d)] + lambda * jtj[(d, d)].max(T::lit(1e-30));
            }
            let neg: Vec<T> = grad.iter().map(|&g| -g).collect();
            let Some(delta) = cholesky_solve(&a, &neg) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let trial: Vec<T> = params.iter().zip(&delta).map(|(&p, &d)| p + d).collect();
            let r_trial = residuals(&trial, n, s);
            let c_trial = half_sq(&r_trial);
            if c_trial.is_finite() && c_trial < cost {
                let step_norm = delta.iter().map(|&d| d * d).sum::<T>().sqrt();
                let p_norm = params.iter().map(|&p| p * p).sum::<T>().sqrt();
                let rel_drop = (cost - c_trial) / cost;
                params = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda * T::lit(0.3)).max(T::lit(1e-12));
                accepted = true;
                if rel_drop < T::lit(1e-14) || step_norm <= T::lit(1e-13) * (p_norm + T::lit(1e-13)) {
                    converged = true;
                }
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if converged {
            break;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
            break;
        }
    }

    let m = s.len();
    let dof = m.saturating_sub(np).max(1);
    let jtj = {
        let j = jacobian(&params, n, s);
        j.transpose().matmul(&j)
    };
    let s2 = (cost * T::lit(2.0)) / T::lit(dof as f64);
    let covariance = spd_inverse(&jtj).map(|inv| {
        (0..np)
            .map(|a| (0..np).map(|b| inv[(a, b)] * s2).collect())
            .collect()
    });

    let mut peaks: Vec<GaussianPeak<T>> = (0..n)
        .map(|k| GaussianPeak {
            center: params[3 * k],
            sigma: params[3 * k + 1].abs(),
            amplitude: params[3 * k + 2],
        })
        .collect();
    peaks.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    let report = FitReport {
        peaks,
        baseline: opts.baseline.then(|| params[3 * n]),
        covariance,
        residual_norm: (cost * T::lit(2.0)).sqrt(),
        iterations,
        converged,
        reseeded,
    };
    if converged {
        Ok(report)
    } else {
        Err(FitError::NotConverged(Box::new(report)))
    }
}
