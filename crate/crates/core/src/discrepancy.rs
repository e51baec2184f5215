//! The discrepancy `D(k)` between the k-step law and the uniform measure:
//! the supremum over all spherical caps of `|P_k(cap) - U(cap)|`.
//!
//! By rotational symmetry about the pole only the cap center's polar angle
//! `γ` and the radius `r` matter, so `D(k)` is the supremum of the deviation
//! series over the square `[0, π]²`. [`exact_discrepancy`] scans that square
//! on a grid, then polishes the best local maxima by coordinate-wise
//! golden-section search.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_theta, Error, Result};
use crate::legendre::{fill_cap_coefficients, LegendreRecurrence};
use crate::spectral::{
    certified_tail, eval_profile_gamma, eval_profile_radius, fallback_degree, truncation_for, DeviationSeries,
    DEFAULT_EPSILON, MAX_TRUNCATION_DEGREE, MIN_CERTIFIED_STEPS,
};
use crate::sphere::UnitVec3;
use crate::walk::SampleSet;

/// Constant of the closed-form upper bound `4.442 e^{-C/8}`.
pub const UPPER_CLOSED_CONSTANT: f64 = 4.442;
/// Constant of the lower bound `0.4330 e^{-C/2}`.
pub const LOWER_CLOSED_CONSTANT: f64 = 0.4330;
/// Significance level behind the empirical estimator's uncertainty.
pub const EMPIRICAL_SIGNIFICANCE: f64 = 0.001;
/// Smallest sample accepted by [`empirical_discrepancy`].
pub const MIN_EMPIRICAL_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactSpectral,
    Empirical,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub argmax_gamma: f64,
    pub argmax_r: f64,
    /// Truncation tail plus grid gap (exact) or sampling error (empirical).
    pub uncertainty: f64,
    pub method: Method,
}

/// Grid over `(γ, r) ∈ [0, π]²`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub n_gamma: usize,
    pub n_r: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid { n_gamma: 256, n_r: 256 }
    }
}

/// Tuning for [`exact_discrepancy_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub grid: SearchGrid,
    pub refine: bool,
    /// Target for the certified truncation tail.
    pub epsilon: f64,
    /// Highest degree used during the coarse grid scan. The final value is
    /// always evaluated with the full truncated series.
    pub scan_degree: usize,
    /// Number of grid local maxima that are refined.
    pub candidates: usize,
    /// Refinement stops once coordinate moves fall below this fraction of a
    /// grid cell.
    pub relative_cell: f64,
    /// When `epsilon` needs a cutoff above the maximum degree, the search
    /// still runs at that degree and reports the larger certified tail, as
    /// long as the tail stays below this ceiling.
    pub max_tail: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            grid: SearchGrid::default(),
            refine: true,
            epsilon: DEFAULT_EPSILON,
            scan_degree: 2000,
            candidates: 6,
            relative_cell: 1e-6,
            max_tail: 1e-4,
        }
    }
}

/// Detailed outcome of the exact search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSearch {
    pub result: DiscrepancyResult,
    /// Signed deviation at the maximizer.
    pub signed_value: f64,
    pub degree: usize,
    pub tail_bound: f64,
    pub grid_gap: f64,
    pub lipschitz: f64,
    pub certified_tail: bool,
}

/// `D(k)` from the spectral series with default search settings.
pub fn exact_discrepancy(theta: f64, k: u32, grid: SearchGrid, refine: bool) -> Result<DiscrepancyResult> {
    let opts = ExactOptions {
        grid,
        refine,
        ..ExactOptions::default()
    };
    Ok(exact_discrepancy_with(theta, k, &opts)?.result)
}

fn linspace(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![FRAC_PI_2];
    }
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

pub fn exact_discrepancy_with(theta: f64, k: u32, opts: &ExactOptions) -> Result<ExactSearch> {
    check_theta(theta)?;
    if opts.grid.n_gamma < 2 || opts.grid.n_r < 2 {
        return Err(Error::Precondition("search grid needs at least 2 points per axis".into()));
    }
    let series = DeviationSeries::best_effort(theta, k, opts.epsilon)?;
    if let crate::spectral::TailControl::Certified { bound } = series.tail() {
        if bound > opts.max_tail.max(opts.epsilon) {
            return Err(Error::Truncation {
                theta,
                k,
                epsilon: opts.epsilon,
                max_degree: series.degree(),
            });
        }
    }
    let scan = series.truncated(opts.scan_degree);
    let gammas = linspace(opts.grid.n_gamma);
    let radii = linspace(opts.grid.n_r);
    let values = scan_grid(&scan, &gammas, &radii);
    let h_gamma = PI / (opts.grid.n_gamma - 1) as f64;
    let h_r = PI / (opts.grid.n_r - 1) as f64;

    let mut picks = local_maxima(&values, gammas.len(), radii.len());
    picks.truncate(opts.candidates.max(1));

    let (gamma, r, cell_diag) = if opts.refine {
        let tol_g = opts.relative_cell * h_gamma;
        let tol_r = opts.relative_cell * h_r;
        let box_of = |i: usize, j: usize| {
            (
                ((gammas[i] - h_gamma).max(0.0), (gammas[i] + h_gamma).min(PI)),
                ((radii[j] - h_r).max(0.0), (radii[j] + h_r).min(PI)),
            )
        };
        // polish every candidate on the cheap scan series, then the best two
        // on the full series
        let mut polished: Vec<(f64, f64, f64, usize)> = picks
            .iter()
            .map(|&(i, j)| {
                let (gb, rb) = box_of(i, j);
                let (g, r, v) = coordinate_ascent(&scan, gammas[i], radii[j], gb, rb, tol_g, tol_r);
                (g, r, v, i * radii.len() + j)
            })
            .collect();
        polished.sort_by(|a, b| b.2.total_cmp(&a.2));
        polished.truncate(2);
        let mut best = (gammas[0], radii[0], f64::MIN);
        for &(g, r, _, flat) in &polished {
            let (i, j) = (flat / radii.len(), flat % radii.len());
            let (gb, rb) = box_of(i, j);
            let (g, r, v) = if series.degree() > scan.degree() {
                coordinate_ascent(&series, g, r, gb, rb, tol_g, tol_r)
            } else {
                (g, r, series.eval(g, r).value.abs())
            };
            if v > best.2 {
                best = (g, r, v);
            }
        }
        (best.0, best.1, tol_g.hypot(tol_r))
    } else {
        let mut best = (gammas[0], radii[0], f64::MIN);
        for &(i, j) in &picks {
            let v = series.eval(gammas[i], radii[j]).value.abs();
            if v > best.2 {
                best = (gammas[i], radii[j], v);
            }
        }
        (best.0, best.1, h_gamma.hypot(h_r))
    };

    let at = series.eval(gamma, r);
    let lipschitz = series.lipschitz();
    let grid_gap = lipschitz * cell_diag;
    let uncertainty = at.tail_bound + grid_gap;
    Ok(ExactSearch {
        result: DiscrepancyResult {
            value: at.value.abs(),
            argmax_gamma: gamma,
            argmax_r: r,
            uncertainty,
            method: Method::ExactSpectral,
        },
        signed_value: at.value,
        degree: series.degree(),
        tail_bound: at.tail_bound,
        grid_gap,
        lipschitz,
        certified_tail: matches!(series.tail(), crate::spectral::TailControl::Certified { .. }),
    })
}

/// Deviation series on the grid; `values[i * radii.len() + j]` is the value
/// at `(gammas[i], radii[j])`.
pub fn scan_grid(series: &DeviationSeries, gammas: &[f64], radii: &[f64]) -> Vec<f64> {
    let degree = series.degree();
    let gamma_tables: Vec<Vec<f64>> = gammas
        .iter()
        .map(|g| LegendreRecurrence::new(g.cos()).take(degree + 1).collect())
        .collect();
    // one column per radius, each with its own cap-coefficient pass
    let columns = crate::par_map(radii, |&r| {
        let mut c = Vec::with_capacity(degree + 1);
        fill_cap_coefficients(r.cos(), degree, &mut c);
        let b: Vec<f64> = c.iter().zip(series.weights()).map(|(c, w)| c * w).collect();
        gamma_tables
            .iter()
            .map(|p| b[1..].iter().zip(&p[1..]).map(|(b, p)| b * p).sum::<f64>())
            .collect::<Vec<f64>>()
    });
    let mut values = vec![0.0; gammas.len() * radii.len()];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * radii.len() + j] = *v;
        }
    }
    values
}

/// Grid points whose `|value|` is at least that of every neighbour, sorted
/// by decreasing `|value|`.
fn local_maxima(values: &[f64], n_gamma: usize, n_r: usize) -> Vec<(usize, usize)> {
    let at = |i: usize, j: usize| values[i * n_r + j].abs();
    let mut out = Vec::new();
    for i in 0..n_gamma {
        for j in 0..n_r {
            let v = at(i, j);
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= n_gamma as i64 || nj >= n_r as i64 {
                        continue;
                    }
                    if at(ni as usize, nj as usize) > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                out.push((i, j));
            }
        }
    }
    out.sort_by(|a, b| at(b.0, b.1).total_cmp(&at(a.0, a.1)));
    out
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Alternate golden-section line searches in `γ` and `r` inside the box,
/// never accepting a move that lowers `|deviation|`.
fn coordinate_ascent(
    series: &DeviationSeries,
    gamma0: f64,
    r0: f64,
    gamma_box: (f64, f64),
    r_box: (f64, f64),
    tol_gamma: f64,
    tol_r: f64,
) -> (f64, f64, f64) {
    let (mut g, mut r) = (gamma0, r0);
    let mut best = series.eval(g, r).value.abs();
    for _ in 0..40 {
        let (g_old, r_old) = (g, r);
        let profile = series.profile_in_gamma(r);
        let (g_new, v) = golden_section_max(|x| eval_profile_gamma(&profile, x).abs(), gamma_box.0, gamma_box.1, tol_gamma);
        if v > best {
            g = g_new;
            best = v;
        }
        let profile = series.profile_in_radius(g);
        let (r_new, v) = golden_section_max(|x| eval_profile_radius(&profile, x).abs(), r_box.0, r_box.1, tol_r);
        if v > best {
            r = r_new;
            best = v;
        }
        if (g - g_old).abs() <= tol_gamma && (r - r_old).abs() <= tol_r {
            break;
        }
    }
    (g, r, best)
}

/// Fibonacci lattice of `n` nearly uniform points.
pub fn fibonacci_lattice(n: usize) -> Vec<UnitVec3> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            UnitVec3::from_spherical(z.clamp(-1.0, 1.0).acos(), golden_angle * i as f64)
        })
        .collect()
}

/// Empirical discrepancy of a sample against the uniform measure.
pub fn empirical_discrepancy(samples: &SampleSet, n_centers: usize, n_radii: usize) -> Result<DiscrepancyResult> {
    empirical_discrepancy_points(&samples.points, n_centers, n_radii)
}

/// Caps are centered on a Fibonacci lattice plus both poles, with radii on
/// a uniform grid of `[0, π]`. The uncertainty is a union-bound
/// concentration radius at significance [`EMPIRICAL_SIGNIFICANCE`].
pub fn empirical_discrepancy_points(points: &[UnitVec3], n_centers: usize, n_radii: usize) -> Result<DiscrepancyResult> {
    let m = points.len();
    if m < MIN_EMPIRICAL_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: m,
            required: MIN_EMPIRICAL_SAMPLES,
        });
    }
    if n_radii < 2 {
        return Err(Error::Precondition("need at least 2 radii".into()));
    }
    let mut centers = fibonacci_lattice(n_centers);
    centers.push(UnitVec3::NORTH);
    centers.push(UnitVec3::SOUTH);
    let radii = linspace(n_radii);
    // thresholds cos r in decreasing order
    let thresholds: Vec<f64> = radii.iter().map(|r| r.cos()).collect();
    let per_center = crate::par_map(&centers, |center| {
        // bucket[j] counts points whose dot lies in [t_j, t_{j-1})
        let mut buckets = vec![0u64; thresholds.len() + 1];
        for p in points {
            let d = center.dot(p).clamp(-1.0, 1.0);
            let j = thresholds.partition_point(|&t| t > d);
            buckets[j] += 1;
        }
        let mut best = (0.0, 0.0);
        let mut inside = 0u64;
        for (j, r) in radii.iter().enumerate() {
            inside += buckets[j];
            let gap = (inside as f64 / m as f64 - 0.5 * (1.0 - r.cos())).abs();
            if gap > best.0 {
                best = (gap, *r);
            }
        }
        best
    });
    let (idx, &(value, r)) = per_center
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("at least the two poles");
    let tests = (centers.len() * radii.len()) as f64;
    let uncertainty = 2.0 * ((2.0 * tests / EMPIRICAL_SIGNIFICANCE).ln() / (2.0 * m as f64)).sqrt();
    Ok(DiscrepancyResult {
        value,
        argmax_gamma: centers[idx].polar(),
        argmax_r: r,
        uncertainty,
        method: Method::Empirical,
    })
}

fn check_steps(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::Precondition(format!("bounds need k >= 2, got {k}")));
    }
    Ok(())
}

/// `Σ_{n>=1} |P_n(cos θ)|^k`, an upper bound on `D(k)`.
///
/// Summed exactly up to a cutoff, plus the certified Jackson tail. For
/// `k = 2` the series diverges and the bound is `+∞`.
pub fn upper_bound_series(theta: f64, k: u32) -> Result<f64> {
    check_theta(theta)?;
    check_steps(k)?;
    if k == 2 {
        return Ok(f64::INFINITY);
    }
    let (degree, tail) = if k >= MIN_CERTIFIED_STEPS {
        match truncation_for(theta, k, DEFAULT_EPSILON) {
            Ok(t) => (t.degree, t.tail_bound),
            Err(Error::Truncation { .. }) => {
                (MAX_TRUNCATION_DEGREE, certified_tail(theta, k, MAX_TRUNCATION_DEGREE))
            }
            Err(e) => return Err(e),
        }
    } else {
        let n = fallback_degree(theta);
        (n, certified_tail(theta, k, n))
    };
    let mut sum = crate::spectral::CompensatedSum::default();
    for p in LegendreRecurrence::new(theta.cos()).skip(1).take(degree) {
        sum.add(p.abs().powi(k as i32));
    }
    Ok(sum.total() + tail)
}

/// `min(1, 4.442 e^{-C/8})`.
pub fn upper_bound_closed(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain {
            what: "C",
            value: c,
            domain: "(0, inf)",
        });
    }
    Ok((UPPER_CLOSED_CONSTANT * (-c / 8.0).exp()).min(1.0))
}

/// `(√3/4) |cos θ|^k`: the degree-one Plancherel term at `r = π/2`.
pub fn lower_bound_dominant(theta: f64, k: u32) -> Result<f64> {
    check_theta(theta)?;
    check_steps(k)?;
    Ok(3f64.sqrt() / 4.0 * theta.cos().abs().powi(k as i32))
}

/// `sqrt( Σ_{n=1}^{n_terms} (2n+1) (λ_n^k c_n(r))² )` for one radius.
pub fn plancherel_sum(theta: f64, k: u32, n_terms: usize, r: f64) -> Result<f64> {
    check_theta(theta)?;
    check_steps(k)?;
    crate::error::check_angle("r", r)?;
    if n_terms == 0 {
        return Err(Error::Precondition("n_terms must be >= 1".into()));
    }
    let lambda: Vec<f64> = LegendreRecurrence::new(theta.cos())
        .take(n_terms + 1)
        .map(|l| l.powi(k as i32))
        .collect();
    Ok(plancherel_at(&lambda, r))
}

fn plancherel_at(lambda_k: &[f64], r: f64) -> f64 {
    let mut c = Vec::with_capacity(lambda_k.len());
    fill_cap_coefficients(r.cos(), lambda_k.len() - 1, &mut c);
    let s: f64 = (1..lambda_k.len())
        .map(|n| (2 * n + 1) as f64 * (lambda_k[n] * c[n]).powi(2))
        .sum();
    s.sqrt()
}

/// Plancherel lower bound maximized over a uniform grid of `r_grid` radii
/// (plus `π/2`, where the degree-one term peaks).
pub fn lower_bound_plancherel(theta: f64, k: u32, n_terms: usize, r_grid: usize) -> Result<f64> {
    check_theta(theta)?;
    check_steps(k)?;
    if n_terms == 0 || r_grid < 2 {
        return Err(Error::Precondition("need n_terms >= 1 and r_grid >= 2".into()));
    }
    let lambda: Vec<f64> = LegendreRecurrence::new(theta.cos())
        .take(n_terms + 1)
        .map(|l| l.powi(k as i32))
        .collect();
    let mut radii = linspace(r_grid);
    radii.push(FRAC_PI_2);
    Ok(radii
        .iter()
        .map(|&r| plancherel_at(&lambda, r))
        .fold(0.0, f64::max))
}

pub const DEFAULT_PLANCHEREL_TERMS: usize = 20;
pub const DEFAULT_PLANCHEREL_RADII: usize = 512;

/// Every bound on `D(k)` for one `(θ, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theta: f64,
    pub k: u32,
    /// `k sin²θ`.
    #[serde(rename = "C")]
    pub c: f64,
    /// `null` in JSON when the series diverges (k = 2).
    #[serde(serialize_with = "finite_or_null")]
    pub upper_series: f64,
    pub upper_closed: f64,
    pub lower_dominant: f64,
    pub lower_plancherel: f64,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

pub fn bound_report(theta: f64, k: u32) -> Result<BoundReport> {
    check_theta(theta)?;
    check_steps(k)?;
    let c = k as f64 * theta.sin().powi(2);
    Ok(BoundReport {
        theta,
        k,
        c,
        upper_series: upper_bound_series(theta, k)?,
        upper_closed: upper_bound_closed(c)?,
        lower_dominant: lower_bound_dominant(theta, k)?,
        lower_plancherel: lower_bound_plancherel(theta, k, DEFAULT_PLANCHEREL_TERMS, DEFAULT_PLANCHEREL_RADII)?,
    })
}

/// One row of the `D(k)`-versus-bounds curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub k: u32,
    pub lower_plancherel: f64,
    pub exact: f64,
    pub exact_uncertainty: f64,
    pub upper_series: f64,
    pub upper_closed: f64,
}

pub fn curve(theta: f64, k_min: u32, k_max: u32, opts: &ExactOptions) -> Result<Vec<CurveRow>> {
    check_theta(theta)?;
    if k_min < 2 || k_min > k_max {
        return Err(Error::Precondition(format!(
            "need 2 <= k_min <= k_max, got k_min = {k_min}, k_max = {k_max}"
        )));
    }
    (k_min..=k_max)
        .map(|k| {
            let bounds = bound_report(theta, k)?;
            let exact = exact_discrepancy_with(theta, k, opts)?.result;
            Ok(CurveRow {
                k,
                lower_plancherel: bounds.lower_plancherel,
                exact: exact.value,
                exact_uncertainty: exact.uncertainty,
                upper_series: bounds.upper_series,
                upper_closed: bounds.upper_closed,
            })
        })
        .collect()
}
