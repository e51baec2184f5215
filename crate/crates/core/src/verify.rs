//! Self-verification harness.
//!
//! Each check reproduces one acceptance criterion and reports the measured
//! quantity next to its tolerance. `Profile::Full` runs the criteria at
//! their stated sizes; `Profile::Quick` shrinks sample counts and step
//! ranges for a desk-side smoke run.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discrepancy::{
    exact_discrepancy_with, lower_bound_dominant, lower_bound_plancherel, plancherel_sum, upper_bound_closed,
    upper_bound_series, ExactOptions, LOWER_CLOSED_CONSTANT, DEFAULT_PLANCHEREL_RADII, DEFAULT_PLANCHEREL_TERMS,
};
use crate::error::Error;
use crate::with_threads;
use crate::legendre::{bound_jackson, bound_small_theta, cap_coefficient, legendre_batch, legendre_eval};
use crate::quadrature::adaptive_simpson;
use crate::spectral::{cap_probability_with, DeviationSeries, DEFAULT_EPSILON};
use crate::sphere::{geodesic_distance, Cap, UnitVec3};
use crate::stats::{chi_square_uniform_pvalue, ks_two_sample};
use crate::walk::{empirical_moment, run_walk, step, trajectory_rng, Formulation, SampleSet, WalkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    /// Trajectories per simulated configuration.
    pub fn samples(&self) -> usize {
        match self {
            Profile::Quick => 20_000,
            Profile::Full => 100_000,
        }
    }

    /// Largest k in the sandwich sweep.
    pub fn sandwich_k_max(&self) -> u32 {
        match self {
            Profile::Quick => 20,
            Profile::Full => 60,
        }
    }

    /// Largest k in the monotonicity sweep.
    pub fn monotonicity_k_max(&self) -> u32 {
        match self {
            Profile::Quick => 20,
            Profile::Full => 40,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            _ => Err(Error::Precondition(format!("unknown profile '{s}' (expected quick or full)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Quick => "quick",
            Profile::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {}: {} (tolerance: {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub profile: Profile,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("verification profile: {}\n", self.profile);
        for c in &self.checks {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!(
            "{} of {} checks passed{}\n",
            self.checks.len() - failed,
            self.checks.len(),
            if failed == 0 { "" } else { " -- FAILED" }
        ));
        out
    }
}

fn outcome(id: u32, name: &str, passed: bool, measured: String, tolerance: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        id,
        name: name.to_string(),
        passed,
        measured,
        tolerance: tolerance.into(),
    }
}

fn errored(id: u32, name: &str, e: Error) -> CheckOutcome {
    outcome(id, name, false, format!("error: {e}"), "no error")
}

/// Run every check, reporting as each completes through `progress`.
pub fn run_with_progress(profile: Profile, mut progress: impl FnMut(&CheckOutcome)) -> VerifyReport {
    let mut checks = Vec::new();
    let mut push = |c: CheckOutcome| {
        progress(&c);
        checks.push(c);
    };
    push(theorem_envelope(profile));
    push(bound_chain(profile));
    push(spectral_vs_monte_carlo(profile));
    let sims = FormulationSamples::generate(profile);
    push(moment_identity(&sims));
    push(formulation_equivalence(&sims));
    push(step_size_contracts(profile));
    push(legendre_suite(profile));
    push(monotonicity(profile));
    push(determinism(profile));
    push(azimuthal_symmetry(profile));
    push(sandwich_sweep(profile));
    VerifyReport { profile, checks }
}

pub fn run(profile: Profile) -> VerifyReport {
    run_with_progress(profile, |_| {})
}

pub const ENVELOPE_THETAS: [f64; 4] = [0.5, 1.0, FRAC_PI_2, 2.2];
pub const ENVELOPE_CS: [f64; 3] = [4.0, 8.0, 16.0];
/// Largest uncertainty the exact search may report on the envelope grid.
pub const ENVELOPE_MAX_UNCERTAINTY: f64 = 1e-6;

/// `(θ, C, k_upper, k_lower)` with `k_upper = ⌈C/sin²θ⌉` and
/// `k_lower = max(2, ⌊C/sin²θ⌋)`.
pub fn envelope_grid() -> Vec<(f64, f64, u32, u32)> {
    let mut out = Vec::new();
    for &c in &ENVELOPE_CS {
        for &theta in &ENVELOPE_THETAS {
            let ratio = c / theta.sin().powi(2);
            out.push((theta, c, ratio.ceil() as u32, (ratio.floor() as u32).max(2)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSide {
    /// `D(⌈C/sin²θ⌉) <= min(1, 4.442 e^{-k sin²θ/8})`
    Upper,
    /// `D(max(2, ⌊C/sin²θ⌋)) >= 0.4330 e^{-k sin²θ/2} - uncertainty`
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCase {
    pub side: EnvelopeSide,
    pub theta: f64,
    pub c: f64,
    pub k: u32,
    pub bound: f64,
    pub exact: f64,
    pub uncertainty: f64,
    /// Distance to violation; negative when the inequality fails.
    pub slack: f64,
}

impl EnvelopeCase {
    pub fn holds(&self) -> bool {
        self.slack >= 0.0
    }
}

/// Exact `D(k)` against the closed-form envelope on the (C, θ) grid.
pub fn envelope_cases() -> Result<Vec<EnvelopeCase>, Error> {
    let opts = ExactOptions::default();
    let mut out = Vec::new();
    for (theta, c, k_up, k_lo) in envelope_grid() {
        let s2 = theta.sin().powi(2);
        let up = exact_discrepancy_with(theta, k_up, &opts)?.result;
        let bound = upper_bound_closed(k_up as f64 * s2)?;
        out.push(EnvelopeCase {
            side: EnvelopeSide::Upper,
            theta,
            c,
            k: k_up,
            bound,
            exact: up.value,
            uncertainty: up.uncertainty,
            slack: bound - (up.value + up.uncertainty),
        });
        let lo = exact_discrepancy_with(theta, k_lo, &opts)?.result;
        let bound = LOWER_CLOSED_CONSTANT * (-(k_lo as f64) * s2 / 2.0).exp();
        out.push(EnvelopeCase {
            side: EnvelopeSide::Lower,
            theta,
            c,
            k: k_lo,
            bound,
            exact: lo.value,
            uncertainty: lo.uncertainty,
            slack: lo.value - (bound - lo.uncertainty),
        });
    }
    Ok(out)
}

/// Criterion 1: exact `D(k)` sits inside `0.4330 e^{-C/2} <= D(k) <= 4.442 e^{-C/8}`.
///
/// The lower half does not hold away from θ → 0: `|cos θ|^k <= e^{-k sin²θ/2}`
/// for every θ, so the dominant-term bound never reaches `0.4330 e^{-C/2}`.
/// At θ = π/2, k = 4 the exact value is 0.02744 against a claimed 0.05860.
/// The check reports those cases as violations.
pub fn theorem_envelope(_profile: Profile) -> CheckOutcome {
    const NAME: &str = "two-sided exponential envelope on the (C, theta) grid";
    let cases = match envelope_cases() {
        Ok(c) => c,
        Err(e) => return errored(1, NAME, e),
    };
    let side_summary = |side: EnvelopeSide| {
        let sel: Vec<_> = cases.iter().filter(|c| c.side == side).collect();
        let held = sel.iter().filter(|c| c.holds()).count();
        let min_slack = sel.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
        let bad: Vec<String> = sel
            .iter()
            .filter(|c| !c.holds())
            .map(|c| format!("C={} theta={:.4} k={}: D={:.4e} < {:.4e}", c.c, c.theta, c.k, c.exact, c.bound))
            .collect();
        (held, sel.len(), min_slack, bad)
    };
    let (up_held, up_n, up_slack, _) = side_summary(EnvelopeSide::Upper);
    let (lo_held, lo_n, lo_slack, lo_bad) = side_summary(EnvelopeSide::Lower);
    let max_unc = cases.iter().map(|c| c.uncertainty).fold(0.0, f64::max);
    let passed = up_held == up_n && lo_held == lo_n && max_unc <= ENVELOPE_MAX_UNCERTAINTY;
    outcome(
        1,
        NAME,
        passed,
        format!(
            "upper {up_held}/{up_n} hold (min slack {up_slack:.3e}); lower {lo_held}/{lo_n} hold (min slack {lo_slack:.3e}); max uncertainty {max_unc:.3e}{}",
            if lo_bad.is_empty() { String::new() } else { format!("; lower violations: {}", lo_bad.join(", ")) }
        ),
        format!("slacks >= 0 using the reported uncertainty; uncertainty <= {ENVELOPE_MAX_UNCERTAINTY:e}"),
    )
}

/// Criterion 2: dominant <= Plancherel <= exact <= series on the envelope grid.
pub fn bound_chain(_profile: Profile) -> CheckOutcome {
    const NAME: &str = "bound chain dominant <= Plancherel <= exact <= series";
    let opts = ExactOptions::default();
    let mut failures = Vec::new();
    let mut worst_single: f64 = 0.0;
    let mut cases = 0;
    for (theta, _c, k_up, k_lo) in envelope_grid() {
        for k in [k_lo, k_up] {
            cases += 1;
            let run = || -> Result<(f64, f64, f64, f64, f64, f64), Error> {
                let exact = exact_discrepancy_with(theta, k, &opts)?.result;
                Ok((
                    lower_bound_dominant(theta, k)?,
                    lower_bound_plancherel(theta, k, DEFAULT_PLANCHEREL_TERMS, DEFAULT_PLANCHEREL_RADII)?,
                    exact.value,
                    exact.uncertainty,
                    upper_bound_series(theta, k)?,
                    plancherel_sum(theta, k, 1, FRAC_PI_2)?,
                ))
            };
            let (dom, planch, exact, unc, series, single) = match run() {
                Ok(v) => v,
                Err(e) => return errored(2, NAME, e),
            };
            let single_err = (single - 3f64.sqrt() / 4.0 * theta.cos().abs().powi(k as i32)).abs();
            worst_single = worst_single.max(single_err);
            if dom > planch + 1e-12 || planch > exact + unc || exact > series + 1e-9 || single_err > 1e-12 {
                failures.push(format!("theta={theta:.4} k={k}"));
            }
        }
    }
    outcome(
        2,
        NAME,
        failures.is_empty(),
        format!(
            "{} of {cases} (theta, k) cases ordered; single-term Plancherel error {worst_single:.2e}{}",
            cases - failures.len(),
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        ),
        "1e-12 / reported uncertainty / 1e-9; single term 1e-12",
    )
}

/// Criterion 3: cap probabilities against cap frequencies of simulated walks.
pub fn spectral_vs_monte_carlo(profile: Profile) -> CheckOutcome {
    const NAME: &str = "spectral cap probability vs Monte Carlo (theta = 1, k = 5)";
    let (theta, k) = (1.0, 5);
    let m = profile.samples();
    let cfg = WalkConfig::new(theta, k, Formulation::Drunkard, 0x5eed_0003, m).expect("valid config");
    let samples = run_walk(&cfg).expect("valid config");
    let series = match DeviationSeries::strict(theta, k, DEFAULT_EPSILON) {
        Ok(s) => s,
        Err(e) => return errored(3, NAME, e),
    };
    let mut within = 0;
    let mut worst_z: f64 = 0.0;
    for i in 0..5 {
        let gamma = PI * i as f64 / 4.0;
        for j in 0..5 {
            let r = 0.3 + 0.4 * j as f64;
            let cap = Cap::at_polar(gamma, r).expect("valid cap");
            let hits = samples.points.iter().filter(|p| cap.contains(p)).count();
            let freq = hits as f64 / m as f64;
            let p = cap_probability_with(&series, gamma, r).clamped();
            let sd = (p * (1.0 - p) / m as f64).sqrt().max(f64::MIN_POSITIVE);
            let z = (freq - p).abs() / sd;
            worst_z = worst_z.max(z);
            if (freq - p).abs() <= 4.0 * sd {
                within += 1;
            }
        }
    }
    outcome(
        3,
        NAME,
        within >= 24,
        format!("{within} of 25 caps within 4 standard errors (worst {worst_z:.2} sd, m = {m})"),
        ">= 24 of 25 within 4 sqrt(p(1-p)/m)",
    )
}

pub const MOMENT_THETAS: [f64; 3] = [0.7, FRAC_PI_2, 2.2];
pub const MOMENT_STEPS: [u32; 3] = [2, 5, 10];

/// Simulated end points for every formulation on the moment grid.
pub struct FormulationSamples {
    pub m: usize,
    /// `(θ, k, formulation, samples)`.
    pub runs: Vec<(f64, u32, Formulation, SampleSet)>,
}

impl FormulationSamples {
    pub fn generate(profile: Profile) -> Self {
        let m = profile.samples();
        let mut runs = Vec::new();
        for (ti, &theta) in MOMENT_THETAS.iter().enumerate() {
            for &k in &MOMENT_STEPS {
                for (fi, f) in Formulation::ALL.into_iter().enumerate() {
                    let seed = 0x4d4f_4d00 + (ti as u64) * 1000 + (k as u64) * 10 + fi as u64;
                    let cfg = WalkConfig::new(theta, k, f, seed, m).expect("valid config");
                    runs.push((theta, k, f, run_walk(&cfg).expect("valid config")));
                }
            }
        }
        FormulationSamples { m, runs }
    }
}

/// Criterion 4: `|empirical_moment - P_n(cos θ)^k| <= 4/√m`.
pub fn moment_identity(sims: &FormulationSamples) -> CheckOutcome {
    let tol = 4.0 / (sims.m as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (theta, k, f, samples) in &sims.runs {
        for n in 1..=5 {
            let exact = legendre_eval(n, theta.cos()).expect("|cos| <= 1").powi(*k as i32);
            let gap = (empirical_moment(samples, n) - exact).abs();
            worst = worst.max(gap);
            if gap > tol {
                failures.push(format!("{f} theta={theta:.3} k={k} n={n}"));
            }
        }
    }
    outcome(
        4,
        "moment identity E[P_n(cos polar)] = P_n(cos theta)^k",
        failures.is_empty(),
        format!(
            "max gap {worst:.3e} over {} moments{}",
            sims.runs.len() * 5,
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        ),
        format!("4/sqrt(m) = {tol:.3e}"),
    )
}

pub const KS_SIGNIFICANCE: f64 = 0.001;

/// Criterion 5: the four formulations produce the same law.
pub fn formulation_equivalence(sims: &FormulationSamples) -> CheckOutcome {
    let tol = 6.0 / (sims.m as f64).sqrt();
    let mut min_p: f64 = 1.0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = Vec::new();
    let mut tests = 0;
    for group in sims.runs.chunks(Formulation::ALL.len()) {
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                let (theta, k, fa, sa) = &group[a];
                let (_, _, fb, sb) = &group[b];
                tests += 1;
                let ks = ks_two_sample(&sa.cos_polar, &sb.cos_polar);
                min_p = min_p.min(ks.p_value);
                let mut ok = ks.p_value >= KS_SIGNIFICANCE;
                for n in 1..=5 {
                    let gap = (empirical_moment(sa, n) - empirical_moment(sb, n)).abs();
                    worst_gap = worst_gap.max(gap);
                    ok &= gap <= tol;
                }
                if !ok {
                    failures.push(format!("{fa}/{fb} theta={theta:.3} k={k}"));
                }
            }
        }
    }
    outcome(
        5,
        "formulation equivalence (pairwise KS and moment gaps)",
        failures.is_empty(),
        format!(
            "{tests} pairs: min KS p-value {min_p:.4}, max moment gap {worst_gap:.3e}{}",
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        ),
        format!("p >= {KS_SIGNIFICANCE}; gap <= 6/sqrt(m) = {tol:.3e}"),
    )
}

/// Criterion 6: step lengths of formulations 1, 2 and 4.
pub fn step_size_contracts(_profile: Profile) -> CheckOutcome {
    const STEPS: usize = 10_000;
    let mut f1_err: f64 = 0.0;
    let mut f2_excess = f64::NEG_INFINITY;
    for (i, &theta) in [0.3, 1.0, 2.5].iter().enumerate() {
        let mut rng = trajectory_rng(0x57e9, i as u64);
        let mut y = UnitVec3::NORTH;
        for _ in 0..STEPS {
            let next = step(Formulation::Drunkard, &y, theta, &mut rng);
            f1_err = f1_err.max((geodesic_distance(&y, &next) - theta).abs());
            y = next;
        }
        let mut rng = trajectory_rng(0x57e9, 100 + i as u64);
        let mut y = UnitVec3::NORTH;
        for _ in 0..STEPS {
            let next = step(Formulation::PottedPlant, &y, theta, &mut rng);
            f2_excess = f2_excess.max(geodesic_distance(&y, &next) - theta);
            y = next;
        }
    }
    let mut rng = trajectory_rng(0x57e9, 200);
    let mut y = UnitVec3::NORTH;
    let mut f4_max: f64 = 0.0;
    for _ in 0..STEPS {
        let next = step(Formulation::BiInvariant, &y, 1.0, &mut rng);
        f4_max = f4_max.max(geodesic_distance(&y, &next));
        y = next;
    }
    outcome(
        6,
        "step-size contracts",
        f1_err <= 1e-12 && f2_excess <= 1e-12 && f4_max > 1.0,
        format!(
            "drunkard |d - theta| max {f1_err:.2e}; potted d - theta max {f2_excess:.2e}; bi-invariant max d {f4_max:.4} at theta = 1"
        ),
        "1e-12; <= 1e-12; > theta",
    )
}

/// Criterion 7: Legendre integral identity, generating function and the
/// two bounds on `P_n(cos θ)²`.
pub fn legendre_suite(_profile: Profile) -> CheckOutcome {
    let mut integral_err: f64 = 0.0;
    for n in 1..=50 {
        for j in 0..64 {
            let r = PI * j as f64 / 63.0;
            let quad = 0.5 * adaptive_simpson(&|x: f64| legendre_eval(n, x).unwrap(), r.cos(), 1.0, 1e-12);
            let closed = cap_coefficient(n, r).unwrap();
            integral_err = integral_err.max((quad - closed).abs());
        }
    }

    let t = 0.5;
    let mut genfn_err: f64 = 0.0;
    for i in 0..33 {
        let x = -1.0 + 2.0 * i as f64 / 32.0;
        let table = legendre_batch(200, x).unwrap();
        let mut power = 1.0;
        let mut sum = 0.0;
        for p in table.values() {
            sum += p * power;
            power *= t;
        }
        genfn_err = genfn_err.max((sum - 1.0 / (1.0 - 2.0 * x * t + t * t).sqrt()).abs());
    }

    let mut jackson_ok = true;
    let mut small_ok = true;
    let mut small_checked = 0usize;
    let mut max_abs: f64 = 0.0;
    for j in 1..=128 {
        let theta = PI * j as f64 / 129.0;
        let table = legendre_batch(500, theta.cos()).unwrap();
        for n in 1..=500 {
            let p = table.get(n);
            max_abs = max_abs.max(p.abs());
            jackson_ok &= p * p <= bound_jackson(n, theta).unwrap();
            if let Ok(b) = bound_small_theta(n, theta) {
                small_checked += 1;
                small_ok &= p * p <= b;
            }
        }
    }
    // the coarse θ grid above barely enters the small-step region, so sweep
    // that region directly: sin²θ = 0.9 s / n for s in (0, 1]
    for n in 1..=500 {
        for s in 1..=128 {
            let theta = (0.9 * s as f64 / 128.0 / n as f64).sqrt().asin();
            let p = legendre_eval(n, theta.cos()).unwrap();
            small_checked += 1;
            small_ok &= p * p <= bound_small_theta(n, theta).unwrap();
        }
    }
    outcome(
        7,
        "Legendre suite (integral identity, generating function, bounds)",
        integral_err <= 1e-10 && genfn_err <= 1e-10 && jackson_ok && small_ok && max_abs <= 1.0 + 1e-12,
        format!(
            "integral identity err {integral_err:.2e}; generating fn err {genfn_err:.2e}; Jackson bound {}; small-theta bound {} ({small_checked} points); max |P_n| {max_abs:.15}",
            if jackson_ok { "holds" } else { "VIOLATED" },
            if small_ok { "holds" } else { "VIOLATED" },
        ),
        "1e-10; 1e-10; dominates; dominates; <= 1 + 1e-12",
    )
}

pub const MONOTONE_THETAS: [f64; 3] = [0.5, 1.0, 2.2];

/// Criterion 8: `D(k+1) <= D(k)` within the combined uncertainty.
pub fn monotonicity(profile: Profile) -> CheckOutcome {
    const NAME: &str = "monotone decrease of D(k)";
    let opts = ExactOptions::default();
    let k_max = profile.monotonicity_k_max();
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for &theta in &MONOTONE_THETAS {
        let mut prev = None;
        for k in 2..=k_max {
            let cur = match exact_discrepancy_with(theta, k, &opts) {
                Ok(s) => s.result,
                Err(e) => return errored(8, NAME, e),
            };
            if let Some(p) = prev {
                let p: crate::discrepancy::DiscrepancyResult = p;
                let excess = cur.value - p.value - (p.uncertainty + cur.uncertainty);
                worst = worst.max(excess);
                if excess > 0.0 {
                    failures.push(format!("theta={theta} k={}->{k}", k - 1));
                }
            }
            prev = Some(cur);
        }
    }
    outcome(
        8,
        NAME,
        failures.is_empty(),
        format!(
            "max D(k+1) - D(k) - uncertainty = {worst:.3e} for k = 2..{k_max}{}",
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        ),
        "<= 0",
    )
}

/// Criterion 9: simulation and exact search are bit-identical across runs
/// and thread counts.
pub fn determinism(_profile: Profile) -> CheckOutcome {
    let cfg = WalkConfig::new(1.3, 12, Formulation::BiInvariant, 0xd37e, 5_000).expect("valid config");
    let sim = |threads| with_threads(threads, || run_walk(&cfg).expect("valid config").to_csv(true));
    let a = sim(1);
    let b = sim(1);
    let c = sim(8);
    let opts = ExactOptions::default();
    let exact = |threads| {
        with_threads(threads, || {
            exact_discrepancy_with(1.0, 6, &opts).map(|s| {
                let r = s.result;
                [r.value, r.argmax_gamma, r.argmax_r, r.uncertainty].map(f64::to_bits)
            })
        })
    };
    let e1 = exact(1);
    let e2 = exact(1);
    let e8 = exact(8);
    let sim_ok = a == b && a == c;
    let exact_ok = e1.is_ok() && e1 == e2 && e1 == e8;
    outcome(
        9,
        "determinism across runs and thread counts",
        sim_ok && exact_ok,
        format!(
            "simulation {}; exact search {}",
            if sim_ok { "identical" } else { "DIFFERS" },
            if exact_ok { "identical" } else { "DIFFERS" }
        ),
        "bit-identical (1 vs 1 vs 8 threads)",
    )
}

/// Extra check: end-point azimuths are uniform for every formulation.
pub fn azimuthal_symmetry(profile: Profile) -> CheckOutcome {
    let mut min_p: f64 = 1.0;
    for (i, f) in Formulation::ALL.into_iter().enumerate() {
        let cfg = WalkConfig::new(0.9, 4, f, 0xa21 + i as u64, profile.samples()).expect("valid config");
        let s = run_walk(&cfg).expect("valid config");
        let mut counts = [0u64; 16];
        for p in &s.points {
            let az = p.azimuth().rem_euclid(std::f64::consts::TAU);
            counts[((az / std::f64::consts::TAU * 16.0) as usize).min(15)] += 1;
        }
        min_p = min_p.min(chi_square_uniform_pvalue(&counts));
    }
    outcome(
        10,
        "azimuthal symmetry of end points (chi-square, 16 bins)",
        min_p > 0.001,
        format!("min p-value {min_p:.4} over 4 formulations"),
        "p > 0.001",
    )
}

/// Extra check: Plancherel <= exact <= series for every k up to the profile limit.
pub fn sandwich_sweep(profile: Profile) -> CheckOutcome {
    const NAME: &str = "sandwich over k = 2..k_max";
    let opts = ExactOptions::default();
    let k_max = profile.sandwich_k_max();
    let mut failures = Vec::new();
    let mut cases = 0;
    for &theta in &ENVELOPE_THETAS {
        for k in 2..=k_max {
            cases += 1;
            let run = || -> Result<bool, Error> {
                let exact = exact_discrepancy_with(theta, k, &opts)?.result;
                let lower = lower_bound_plancherel(theta, k, DEFAULT_PLANCHEREL_TERMS, DEFAULT_PLANCHEREL_RADII)?;
                let upper = upper_bound_series(theta, k)?;
                Ok(lower <= exact.value + exact.uncertainty && exact.value <= upper + 1e-9)
            };
            match run() {
                Ok(true) => {}
                Ok(false) => failures.push(format!("theta={theta:.4} k={k}")),
                Err(e) => return errored(11, NAME, e),
            }
        }
    }
    outcome(
        11,
        NAME,
        failures.is_empty(),
        format!(
            "{} of {cases} (theta, k) cases sandwiched, k_max = {k_max}{}",
            cases - failures.len(),
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        ),
        "lower <= exact + uncertainty; exact <= series + 1e-9",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_names_round_trip() {
        for p in [Profile::Quick, Profile::Full] {
            assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        }
        assert!("medium".parse::<Profile>().is_err());
    }

    #[test]
    fn envelope_grid_steps() {
        let grid = envelope_grid();
        assert_eq!(grid.len(), 12);
        for (theta, c, up, lo) in grid {
            let ratio = c / theta.sin().powi(2);
            assert!(up as f64 >= ratio && (lo as f64) <= ratio.max(2.0));
            assert!(lo >= 2);
        }
    }

    #[test]
    fn report_rendering() {
        let report = VerifyReport {
            profile: Profile::Quick,
            checks: vec![
                outcome(1, "first", true, "0.1".into(), "0.2"),
                outcome(2, "second", false, "3".into(), "1"),
            ],
        };
        assert!(!report.passed());
        let text = report.render();
        assert!(text.contains("[PASS]  1. first: 0.1 (tolerance: 0.2)"));
        assert!(text.contains("[FAIL]  2. second"));
        assert!(text.contains("1 of 2 checks passed -- FAILED"));
    }

    #[test]
    fn cheap_checks_pass() {
        assert!(step_size_contracts(Profile::Quick).passed);
        assert!(determinism(Profile::Quick).passed);
    }
}
