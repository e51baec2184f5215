//! Acceptance criteria 1-9 at full size, one PASS/FAIL line each.
//!
//! Run with `cargo test -p spheremix-cli --test acceptance -- --nocapture`
//! to see the report.

use std::process::Command;
use std::time::Instant;

use spheremix::verify::{self, envelope_cases, CheckOutcome, EnvelopeSide, FormulationSamples, Profile};

const PROFILE: Profile = Profile::Full;

/// Criteria that cannot hold as stated, with the reason. These still run
/// and print FAIL; the test only requires that nothing else fails.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    1,
    "the lower half 0.4330 e^{-C/2} <= D(k) is false away from theta -> 0: \
     |cos theta|^k <= e^{-k sin^2 theta / 2} for every theta, and at theta = pi/2, k = 4 \
     the exact value 0.02744 (Monte Carlo agrees) is below 0.05860",
)];

fn spheremix(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_spheremix"))
        .args(args)
        .env_remove("SPHEREMIX_THREADS")
        .output()
        .expect("spawn spheremix");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Criterion 9 through the command line: `simulate` and `exact` give the
/// same bytes on repeated runs and with 1 or 8 threads.
fn cli_determinism() -> CheckOutcome {
    let sim = [
        "simulate", "--theta", "1.3", "--k", "12", "--samples", "20000", "--seed", "4242", "--formulation",
        "bi_invariant", "--points",
    ];
    let exact = ["exact", "--theta", "0.7", "--k", "9"];
    let mut identical = true;
    for base in [&sim[..], &exact[..]] {
        let a = spheremix(&[base, &["--threads", "1"]].concat());
        let b = spheremix(&[base, &["--threads", "1"]].concat());
        let c = spheremix(&[base, &["--threads", "8"]].concat());
        identical &= a == b && a == c;
    }
    let in_process = verify::determinism(PROFILE);
    CheckOutcome {
        id: 9,
        name: "determinism across runs and thread counts (library and CLI)".into(),
        passed: identical && in_process.passed,
        measured: format!(
            "CLI simulate/exact {}; {}",
            if identical { "identical" } else { "DIFFER" },
            in_process.measured
        ),
        tolerance: in_process.tolerance,
    }
}

#[test]
fn acceptance_criteria() {
    let started = Instant::now();
    let mut outcomes = Vec::new();
    let mut record = |c: CheckOutcome| {
        println!("{c}  [{:.1}s]", started.elapsed().as_secs_f64());
        outcomes.push(c);
    };

    record(verify::theorem_envelope(PROFILE));
    record(verify::bound_chain(PROFILE));
    record(verify::spectral_vs_monte_carlo(PROFILE));
    let sims = FormulationSamples::generate(PROFILE);
    record(verify::moment_identity(&sims));
    record(verify::formulation_equivalence(&sims));
    record(verify::step_size_contracts(PROFILE));
    record(verify::legendre_suite(PROFILE));
    record(verify::monotonicity(PROFILE));
    record(cli_determinism());

    let mut unexpected = Vec::new();
    for c in &outcomes {
        match KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == c.id) {
            Some((_, why)) => {
                println!("criterion {} is known to be unattainable: {why}", c.id);
                assert!(!c.passed, "criterion {} now passes; drop it from KNOWN_UNATTAINABLE", c.id);
            }
            None if !c.passed => unexpected.push(c.id),
            None => {}
        }
    }
    let passed = outcomes.iter().filter(|c| c.passed).count();
    println!("{passed} of {} acceptance criteria passed", outcomes.len());
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}

/// The half of criterion 1 that does hold, and the reported uncertainty cap.
#[test]
fn criterion_1_upper_half_and_uncertainty() {
    let cases = envelope_cases().unwrap();
    for c in cases.iter().filter(|c| c.side == EnvelopeSide::Upper) {
        assert!(c.holds(), "{c:?}");
    }
    for c in &cases {
        assert!(c.uncertainty <= verify::ENVELOPE_MAX_UNCERTAINTY, "{c:?}");
    }
    // the lower-half failures sit far outside the uncertainty
    let worst = cases
        .iter()
        .filter(|c| c.side == EnvelopeSide::Lower)
        .map(|c| c.slack)
        .fold(f64::INFINITY, f64::min);
    assert!(worst < -1e-3);
}
