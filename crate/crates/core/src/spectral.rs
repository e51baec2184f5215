//! Exact spectral engine for the k-step law of the walk.
//!
//! The generating measure is bi-invariant under rotations fixing the pole,
//! so every Fourier transform reduces to its zonal entry. The k-step
//! coefficient of degree `n` is `λ_n^k` with `λ_n = P_n(cos θ)`, and the
//! probability of a cap of radius `r` whose center sits at polar angle `γ`
//! is
//!
//! ```text
//! (1 - cos r)/2 + Σ_{n>=1} (2n+1) λ_n^k c_n(r) P_n(cos γ)
//! ```
//!
//! with `c_n` the cap coefficient from [`crate::legendre::cap_coefficient`].
//! Every summand is bounded by `|λ_n|^k`, so Jackson's bound on `λ_n²`
//! certifies the tail of the series for `k >= 4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_angle, check_theta, Error, Result};
use crate::legendre::{legendre_eval, LegendreRecurrence, SMALL_THETA_LIMIT};

/// Default target for the certified truncation tail.
pub const DEFAULT_EPSILON: f64 = 1e-9;
/// Largest cutoff degree [`truncation_for`] will consider.
pub const MAX_TRUNCATION_DEGREE: usize = 1_000_000;
/// Smallest step count for which the certified tail formula is used.
pub const MIN_CERTIFIED_STEPS: u32 = 4;

/// `P_n(cos θ)^k`, the zonal Fourier coefficient of the k-step law.
pub fn walk_coefficient(theta: f64, k: u32, n: usize) -> Result<f64> {
    check_theta(theta)?;
    Ok(legendre_eval(n, theta.cos())?.powi(k as i32))
}

/// `E[P_n(cos Θ_k)]` where `Θ_k` is the polar angle after `k` steps.
///
/// Identical to [`walk_coefficient`]; kept separate because it is the
/// quantity Monte Carlo estimators are checked against.
pub fn moment(theta: f64, k: u32, n: usize) -> Result<f64> {
    walk_coefficient(theta, k, n)
}

/// Single-step coefficients `λ_n = P_n(cos θ)` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpectrum {
    theta: f64,
    k: u32,
    lambda: Vec<f64>,
}

impl WalkSpectrum {
    pub fn new(theta: f64, k: u32, max_degree: usize) -> Result<Self> {
        check_theta(theta)?;
        let lambda = LegendreRecurrence::new(theta.cos())
            .take(max_degree + 1)
            .collect();
        Ok(WalkSpectrum { theta, k, lambda })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn steps(&self) -> u32 {
        self.k
    }

    pub fn max_degree(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `λ_n^k`.
    pub fn coefficient(&self, n: usize) -> f64 {
        self.lambda[n].powi(self.k as i32)
    }
}

/// A cutoff degree together with a certified bound on the discarded mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub degree: usize,
    pub tail_bound: f64,
}

/// Certified bound on `Σ_{n>N} |P_n(cos θ)|^k` for `k > 2`:
/// `(2/(π sin²θ))^{k/2} [ 2/(k-2) N^{1-k/2} + N^{-k/2} ]`.
pub fn certified_tail(theta: f64, k: u32, degree: usize) -> f64 {
    debug_assert!(k > 2 && degree >= 1);
    let s2 = theta.sin().powi(2);
    let half = k as f64 / 2.0;
    let n = degree as f64;
    // logs keep (2/(π s²))^{k/2} from overflowing when θ is near 0 or π
    let log_scale = half * (2.0 / (PI * s2)).ln();
    let a = (2.0 / (k as f64 - 2.0)).ln() + (1.0 - half) * n.ln();
    let b = -half * n.ln();
    (log_scale + a).exp() + (log_scale + b).exp()
}

/// Smallest `N >= ⌈0.9 / sin²θ⌉` whose certified tail is at most `epsilon`.
pub fn truncation_for(theta: f64, k: u32, epsilon: f64) -> Result<Truncation> {
    check_theta(theta)?;
    if k < MIN_CERTIFIED_STEPS {
        return Err(Error::Precondition(format!(
            "certified truncation needs k >= {MIN_CERTIFIED_STEPS}, got {k}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
            domain: "(0, inf)",
        });
    }
    let s2 = theta.sin().powi(2);
    let start = ((SMALL_THETA_LIMIT / s2).ceil() as usize).max(1);
    let fail = Error::Truncation {
        theta,
        k,
        epsilon,
        max_degree: MAX_TRUNCATION_DEGREE,
    };
    if start > MAX_TRUNCATION_DEGREE || certified_tail(theta, k, MAX_TRUNCATION_DEGREE) > epsilon {
        return Err(fail);
    }
    // the bound is decreasing in N, so bisect for the first passing degree
    let (mut lo, mut hi) = (start, MAX_TRUNCATION_DEGREE);
    if certified_tail(theta, k, lo) <= epsilon {
        hi = lo;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if certified_tail(theta, k, mid) <= epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Truncation {
        degree: hi,
        tail_bound: certified_tail(theta, k, hi),
    })
}

/// Cutoff used when the certified formula does not apply (k = 2, 3) or
/// cannot reach the target: `max(10⁴, ⌈100 / sin²θ⌉)`.
pub fn fallback_degree(theta: f64) -> usize {
    let s2 = theta.sin().powi(2);
    ((100.0 / s2).ceil() as usize).clamp(10_000, MAX_TRUNCATION_DEGREE)
}

/// How the tail of a truncated series is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailControl {
    /// Uniform certified bound, valid at every `(γ, r)`.
    Certified { bound: f64 },
    /// Estimated pointwise from the absolute mass of the last decade of
    /// retained terms (`N/10 < n <= N`).
    LastDecade,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// The truncated deviation series `Σ_{n=1}^{N} (2n+1) λ_n^k c_n(r) P_n(cos γ)`.
#[derive(Debug, Clone)]
pub struct DeviationSeries {
    theta: f64,
    k: u32,
    /// `(2n+1) λ_n^k`; entry 0 is unused and zero.
    weights: Vec<f64>,
    tail: TailControl,
}

/// One evaluation of the deviation series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl DeviationSeries {
    /// Series truncated exactly as [`cap_probability`] does: certified for
    /// `k >= 4` (failing if `epsilon` is out of reach), last-decade estimate
    /// for `k ∈ {2, 3}`.
    pub fn strict(theta: f64, k: u32, epsilon: f64) -> Result<Self> {
        Self::build(theta, k, epsilon, false)
    }

    /// Like [`DeviationSeries::strict`], but when no cutoff up to
    /// [`MAX_TRUNCATION_DEGREE`] reaches `epsilon` the series is cut there and
    /// the (larger) certified tail at that cutoff is reported instead.
    pub fn best_effort(theta: f64, k: u32, epsilon: f64) -> Result<Self> {
        Self::build(theta, k, epsilon, true)
    }

    fn build(theta: f64, k: u32, epsilon: f64, relax: bool) -> Result<Self> {
        check_theta(theta)?;
        if k < 2 {
            return Err(Error::Precondition(format!(
                "the exact series needs k >= 2 (the k-step law has no continuous \
                 cap function below that), got k = {k}"
            )));
        }
        let (degree, tail) = if k >= MIN_CERTIFIED_STEPS {
            match truncation_for(theta, k, epsilon) {
                Ok(t) => (t.degree, TailControl::Certified { bound: t.tail_bound }),
                Err(Error::Truncation { .. }) if relax => (
                    MAX_TRUNCATION_DEGREE,
                    TailControl::Certified {
                        bound: certified_tail(theta, k, MAX_TRUNCATION_DEGREE),
                    },
                ),
                Err(e) => return Err(e),
            }
        } else {
            (fallback_degree(theta), TailControl::LastDecade)
        };
        Ok(Self::with_degree(theta, k, degree, tail))
    }

    /// Series with an explicit cutoff.
    pub fn with_degree(theta: f64, k: u32, degree: usize, tail: TailControl) -> Self {
        let weights = LegendreRecurrence::new(theta.cos())
            .take(degree + 1)
            .enumerate()
            .map(|(n, l)| if n == 0 { 0.0 } else { (2 * n + 1) as f64 * l.powi(k as i32) })
            .collect();
        DeviationSeries {
            theta,
            k,
            weights,
            tail,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn steps(&self) -> u32 {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn tail(&self) -> TailControl {
        self.tail
    }

    /// `(2n+1) λ_n^k` for `n = 0..=N` (entry 0 is zero).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same series cut at a lower degree, used for coarse scans.
    pub fn truncated(&self, degree: usize) -> DeviationSeries {
        let degree = degree.min(self.degree());
        DeviationSeries {
            theta: self.theta,
            k: self.k,
            weights: self.weights[..=degree].to_vec(),
            tail: self.tail,
        }
    }

    /// Lipschitz constant (per radian, in any direction of the `(γ, r)`
    /// plane) of the truncated series: `Σ (2n+1) |λ_n|^k`.
    ///
    /// Follows from `|d/dγ P_n(cos γ)| <= n` (Bernstein) and
    /// `|d/dr c_n(r)| = |P_n(cos r) sin r| / 2 <= 1/2`.
    pub fn lipschitz(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    fn decade_start(&self) -> usize {
        self.degree() / 10
    }

    /// Evaluate at cap center polar angle `gamma` and radius `r`.
    pub fn eval(&self, gamma: f64, r: f64) -> DeviationValue {
        let sign = if cfg!(feature = "fault-flip-cap-sign") { -1.0 } else { 1.0 };
        let decade = self.decade_start();
        let mut pg = LegendreRecurrence::new(gamma.cos()).skip(1);
        let mut pr = LegendreRecurrence::new(r.cos());
        let mut r_prev = pr.next().unwrap();
        let mut r_cur = pr.next().unwrap();
        let mut sum = CompensatedSum::default();
        let mut last = 0.0;
        for (n, w) in self.weights.iter().enumerate().skip(1) {
            let g = pg.next().unwrap();
            let r_next = pr.next().unwrap();
            let c = sign * (r_prev - r_next) / (2.0 * (2 * n + 1) as f64);
            let term = w * c * g;
            sum.add(term);
            if n > decade {
                last += term.abs();
            }
            r_prev = r_cur;
            r_cur = r_next;
        }
        DeviationValue {
            value: sum.total(),
            tail_bound: self.tail_at(last),
        }
    }

    fn tail_at(&self, last_decade: f64) -> f64 {
        match self.tail {
            TailControl::Certified { bound } => bound,
            TailControl::LastDecade => last_decade,
        }
    }

    /// Collapse the cap radius: returns `b_n = (2n+1) λ_n^k c_n(r)`.
    pub fn profile_in_gamma(&self, r: f64) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.weights.len());
        crate::legendre::fill_cap_coefficients(r.cos(), self.degree(), &mut c);
        c[0] = 0.0;
        c.iter().zip(&self.weights).map(|(c, w)| c * w).collect()
    }

    /// Collapse the cap center: returns `a_n = (2n+1) λ_n^k P_n(cos γ)`.
    pub fn profile_in_radius(&self, gamma: f64) -> Vec<f64> {
        LegendreRecurrence::new(gamma.cos())
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .collect()
    }
}

/// `Σ_n b_n P_n(cos γ)` for a profile from [`DeviationSeries::profile_in_gamma`].
pub fn eval_profile_gamma(profile: &[f64], gamma: f64) -> f64 {
    let mut sum = CompensatedSum::default();
    for (b, p) in profile.iter().zip(LegendreRecurrence::new(gamma.cos())).skip(1) {
        sum.add(b * p);
    }
    sum.total()
}

/// `Σ_n a_n c_n(r)` for a profile from [`DeviationSeries::profile_in_radius`].
pub fn eval_profile_radius(profile: &[f64], r: f64) -> f64 {
    let sign = if cfg!(feature = "fault-flip-cap-sign") { -1.0 } else { 1.0 };
    let mut rec = LegendreRecurrence::new(r.cos());
    let mut p_prev = rec.next().unwrap();
    let mut p_cur = rec.next().unwrap();
    let mut sum = CompensatedSum::default();
    for (n, a) in profile.iter().enumerate().skip(1) {
        let p_next = rec.next().unwrap();
        sum.add(a * sign * (p_prev - p_next) / (2.0 * (2 * n + 1) as f64));
        p_prev = p_cur;
        p_cur = p_next;
    }
    sum.total()
}

/// Probability of a cap together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapProbability {
    /// Unclamped series value; lies in `[-tail_bound, 1 + tail_bound]`.
    pub probability: f64,
    pub tail_bound: f64,
    pub degree: usize,
}

impl CapProbability {
    pub fn clamped(&self) -> f64 {
        self.probability.clamp(0.0, 1.0)
    }
}

/// Probability that the walk started at the north pole lies, after `k`
/// steps, in the cap of radius `r` whose center has polar angle `gamma`.
pub fn cap_probability(theta: f64, k: u32, gamma: f64, r: f64, epsilon: f64) -> Result<CapProbability> {
    check_angle("gamma", gamma)?;
    check_angle("r", r)?;
    let series = DeviationSeries::strict(theta, k, epsilon)?;
    Ok(cap_probability_with(&series, gamma, r))
}

/// [`cap_probability`] on a prepared series.
pub fn cap_probability_with(series: &DeviationSeries, gamma: f64, r: f64) -> CapProbability {
    let dev = series.eval(gamma, r);
    CapProbability {
        probability: 0.5 * (1.0 - r.cos()) + dev.value,
        tail_bound: dev.tail_bound,
        degree: series.degree(),
    }
}
