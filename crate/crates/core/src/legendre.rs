//! Legendre polynomials, the zonal Fourier coefficient of a cap indicator,
//! and two upper bounds on `P_n(cos θ)²`.
//!
//! Evaluation uses the upward three-term recurrence
//! `(n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x)`, which is stable on
//! `[-1, 1]`.

use std::f64::consts::PI;

use crate::error::{check_angle, check_theta, Error, Result};

/// Inputs up to this far outside `[-1, 1]` are treated as roundoff and clamped.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Validity threshold of [`bound_small_theta`]: `n sin²θ <= 0.9`.
pub const SMALL_THETA_LIMIT: f64 = 0.9;

fn check_x(x: f64) -> Result<f64> {
    if x.is_finite() && x.abs() <= 1.0 + DOMAIN_SLACK {
        Ok(x.clamp(-1.0, 1.0))
    } else {
        Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[-1, 1]",
        })
    }
}

/// Streaming recurrence yielding `P_0(x), P_1(x), P_2(x), ...`.
#[derive(Debug, Clone)]
pub struct LegendreRecurrence {
    x: f64,
    n: usize,
    prev: f64,
    cur: f64,
}

impl LegendreRecurrence {
    /// `x` must already lie in `[-1, 1]`.
    pub fn new(x: f64) -> Self {
        LegendreRecurrence {
            x,
            n: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for LegendreRecurrence {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let n = self.n as f64;
        let next = ((2.0 * n + 1.0) * self.x * self.cur - n * self.prev) / (n + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}

/// `P_n(x)`.
pub fn legendre_eval(n: usize, x: f64) -> Result<f64> {
    let x = check_x(x)?;
    Ok(LegendreRecurrence::new(x).nth(n).unwrap())
}

/// `P_0(x) ..= P_N(x)` from a single recurrence pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreTable {
    x: f64,
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn new(nmax: usize, x: f64) -> Result<Self> {
        let x = check_x(x)?;
        let values = LegendreRecurrence::new(x).take(nmax + 1).collect();
        Ok(LegendreTable { x, values })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn legendre_batch(nmax: usize, x: f64) -> Result<LegendreTable> {
    LegendreTable::new(nmax, x)
}

#[inline]
fn cap_sign() -> f64 {
    if cfg!(feature = "fault-flip-cap-sign") {
        -1.0
    } else {
        1.0
    }
}

/// Signed zonal Fourier coefficient of the indicator of a cap of radius `r`:
/// `(P_{n-1}(cos r) - P_{n+1}(cos r)) / (2(2n+1))`, which equals
/// `½ ∫_{cos r}^1 P_n(x) dx`. Its magnitude never exceeds `1/(2n+1)`.
pub fn cap_coefficient(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition(
            "cap_coefficient needs n >= 1; use uniform_cap_measure for n = 0".into(),
        ));
    }
    check_angle("r", r)?;
    let c = r.cos();
    let mut it = LegendreRecurrence::new(c).skip(n - 1);
    let lo = it.next().unwrap();
    let _ = it.next();
    let hi = it.next().unwrap();
    Ok(cap_sign() * (lo - hi) / (2.0 * (2 * n + 1) as f64))
}

/// Cap coefficients for degrees `0..=nmax` from one recurrence pass.
/// Entry 0 is the cap's uniform measure `(1 - cos r)/2`.
pub fn cap_coefficients(nmax: usize, r: f64) -> Result<Vec<f64>> {
    check_angle("r", r)?;
    let mut out = Vec::with_capacity(nmax + 1);
    fill_cap_coefficients(r.cos(), nmax, &mut out);
    Ok(out)
}

/// Unchecked worker for [`cap_coefficients`]; `c = cos r`.
pub(crate) fn fill_cap_coefficients(c: f64, nmax: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.5 * (1.0 - c));
    let sign = cap_sign();
    let mut rec = LegendreRecurrence::new(c);
    let mut p_prev = rec.next().unwrap();
    let mut p_cur = rec.next().unwrap();
    for n in 1..=nmax {
        let p_next = rec.next().unwrap();
        out.push(sign * (p_prev - p_next) / (2.0 * (2 * n + 1) as f64));
        p_prev = p_cur;
        p_cur = p_next;
    }
}

/// Jackson's bound `2 / (π n sin²θ)` on `P_n(cos θ)²`.
pub fn bound_jackson(n: usize, theta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("bound_jackson needs n >= 1".into()));
    }
    check_theta(theta)?;
    let s2 = theta.sin().powi(2);
    Ok(2.0 / (PI * n as f64 * s2))
}

/// Small-step bound `1 - n sin²θ / 4` on `P_n(cos θ)²`, valid only while
/// `n sin²θ <= 0.9`.
pub fn bound_small_theta(n: usize, theta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("bound_small_theta needs n >= 1".into()));
    }
    if !theta.is_finite() {
        return Err(Error::Domain {
            what: "theta",
            value: theta,
            domain: "finite",
        });
    }
    let t = n as f64 * theta.sin().powi(2);
    // the slack only absorbs roundoff in sin² at the boundary
    if t > SMALL_THETA_LIMIT + 1e-12 {
        return Err(Error::Precondition(format!(
            "n sin^2(theta) = {t} exceeds {SMALL_THETA_LIMIT}"
        )));
    }
    Ok(1.0 - t / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    /// Explicit expansion
    /// `P_n(x) = 2^{-n} Σ_k (-1)^k C(n,k) C(2n-2k, n) x^{n-2k}`.
    fn monomial_oracle(n: usize, x: f64) -> f64 {
        fn binom(n: usize, k: usize) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let mut s = 0.0;
        for k in 0..=n / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(n, k) * binom(2 * n - 2 * k, n) * x.powi((n - 2 * k) as i32);
        }
        s / 2f64.powi(n as i32)
    }

    #[test]
    fn closed_form_values() {
        assert_abs_diff_eq!(legendre_eval(2, 0.5).unwrap(), -0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_eval(3, 0.2).unwrap(), -0.28, epsilon = 1e-15);
        for n in 0..=50 {
            assert_abs_diff_eq!(legendre_eval(n, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn recurrence_matches_monomial_expansion() {
        assert_abs_diff_eq!(legendre_eval(7, 0.3).unwrap(), monomial_oracle(7, 0.3), epsilon = 1e-12);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-1.0..=1.0);
            for n in 0..=10 {
                assert_abs_diff_eq!(legendre_eval(n, x).unwrap(), monomial_oracle(n, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(legendre_eval(3, 1.1).is_err());
        assert!(legendre_eval(3, f64::NAN).is_err());
        assert_eq!(legendre_eval(4, 1.0 + 1e-13).unwrap(), legendre_eval(4, 1.0).unwrap());
    }

    #[test]
    fn batch_values() {
        let t = legendre_batch(3, 0.0).unwrap();
        assert_eq!(t.values(), &[1.0, 0.0, -0.5, 0.0]);
        let t = legendre_batch(1, 0.37).unwrap();
        assert_eq!(t.values(), &[1.0, 0.37]);
        let t = legendre_batch(200, 0.9).unwrap();
        assert!(t.values().iter().all(|v| v.abs() <= 1.0 + 1e-12));
        for n in 0..=200 {
            assert_eq!(t.get(n), legendre_eval(n, 0.9).unwrap());
        }
    }

    #[test]
    fn bounded_by_one() {
        for i in 0..=200 {
            let x = -1.0 + 2.0 * i as f64 / 200.0;
            let t = legendre_batch(500, x).unwrap();
            assert!(t.values().iter().all(|v| v.abs() <= 1.0 + 1e-12), "x = {x}");
        }
    }

    #[test]
    fn cap_coefficient_values() {
        assert_abs_diff_eq!(cap_coefficient(1, FRAC_PI_2).unwrap(), 0.25, epsilon = 1e-16);
        for n in 1..40 {
            assert_eq!(cap_coefficient(n, 0.0).unwrap(), 0.0);
            assert_eq!(cap_coefficient(n, PI).unwrap(), 0.0);
        }
        assert!(cap_coefficient(0, 1.0).is_err());
        assert!(cap_coefficient(2, -0.5).is_err());
    }

    #[test]
    fn cap_coefficient_magnitude() {
        for j in 0..=64 {
            let r = PI * j as f64 / 64.0;
            let table = cap_coefficients(300, r).unwrap();
            for (n, c) in table.iter().enumerate().skip(1) {
                assert!(c.abs() <= 1.0 / (2 * n + 1) as f64 + 1e-15);
                assert_eq!(*c, cap_coefficient(n, r).unwrap());
            }
            assert_eq!(table[0], 0.5 * (1.0 - r.cos()));
        }
    }

    #[test]
    fn degree_two_coefficient_peak() {
        // c_2 as a function of c = cos r is c(1-c²)/4, maximal at 1/√3;
        // scan cos r on a fine grid and compare.
        let mut best = (f64::MIN, 0.0);
        for i in 0..=200_000 {
            let c = -1.0 + 2.0 * i as f64 / 200_000.0;
            let v = cap_coefficient(2, c.acos()).unwrap();
            assert_abs_diff_eq!(v, c * (1.0 - c * c) / 4.0, epsilon = 1e-15);
            if v > best.0 {
                best = (v, c);
            }
        }
        assert_abs_diff_eq!(best.1, 1.0 / 3f64.sqrt(), epsilon = 1e-4);
        let c = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(best.0, c * (1.0 - c * c) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn jackson_bound_values() {
        let b = bound_jackson(1, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(b, 2.0 / PI, epsilon = 1e-15);
        assert!(legendre_eval(1, 0.0).unwrap().powi(2) <= b);
        assert_abs_diff_eq!(
            bound_jackson(100, 0.1).unwrap(),
            2.0 / (PI * 100.0 * 0.1f64.sin().powi(2)),
            epsilon = 1e-12
        );
        assert!(bound_jackson(3, 0.0).is_err());
        assert!(bound_jackson(3, PI).is_err());
        assert!(bound_jackson(0, 1.0).is_err());
    }

    #[test]
    fn small_theta_bound_values() {
        let theta = 0.5f64.sqrt().asin();
        assert_abs_diff_eq!(bound_small_theta(1, theta).unwrap(), 0.875, epsilon = 1e-15);
        assert!(theta.cos().powi(2) <= 0.875);
        let n = 9;
        let theta = (0.9f64 / n as f64).sqrt().asin();
        assert_abs_diff_eq!(bound_small_theta(n, theta).unwrap(), 0.775, epsilon = 1e-12);
        assert!(bound_small_theta(10, 0.5).is_err());
    }

    #[test]
    fn bounds_dominate_on_grid() {
        for j in 1..=128 {
            let theta = PI * j as f64 / 129.0;
            let t = legendre_batch(500, theta.cos()).unwrap();
            for n in 1..=500 {
                let p2 = t.get(n).powi(2);
                assert!(p2 <= bound_jackson(n, theta).unwrap());
                if let Ok(b) = bound_small_theta(n, theta) {
                    assert!(p2 <= b, "n = {n}, theta = {theta}");
                }
            }
        }
    }
}
