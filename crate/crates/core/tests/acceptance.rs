//! Acceptance suite. Every criterion prints one line; the process exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use qsde_core::algebra::{CommutationMatrix, OpPoly};
use qsde_core::fock::{ExactComplex, TruncatedRep};
use qsde_core::frontend::{parse, print, run_source, Command, RunFlags};
use qsde_core::matrix::{comm_adj_vec, comm_vec_adj, OpMatrix, OpVector};
use qsde_core::realize::{
    analyze, check_physical_realizability, check_preservation, extract_hamiltonian, generator_identity_terms,
    generator_target, synthesize, ExtractionMode, Oscillator, Verdict,
};
use qsde_core::scalar::Scalar;
use qsde_core::system::{double_up, ClassOptions, DoubledSystem};
use num_complex::Complex64;

const OPO_RUNTIME: Duration = Duration::from_secs(1);
const ROUND_TRIP_RUNTIME: Duration = Duration::from_secs(30);
const ROUND_TRIP_SAMPLES: usize = 60;
const ROUND_TRIP_COUPLING_DEGREE: u32 = 2;
const LAW_INSTANCES: usize = 200;
const LAW_MAX_MODES: usize = 3;
const LAW_MAX_DEGREE: u32 = 4;
const ORACLE_CASES: usize = 120;
const ORACLE_TOLERANCE: f64 = 1e-9;
const NBAR_OPO: u32 = 3;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn opo_doubled() -> DoubledSystem {
    double_up(&load("opo.qs").system)
}

fn diag(n: usize, entries: Vec<OpPoly>) -> OpMatrix {
    let mut m = OpMatrix::zeros(n, entries.len(), entries.len());
    for (j, e) in entries.into_iter().enumerate() {
        m.set(j, j, e);
    }
    m
}

fn c(s: Scalar) -> OpPoly {
    OpPoly::constant(2, s)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let src = fixture("opo.qs");
    let report = run_source(Command::Check, &src, &RunFlags::default());
    let elapsed = start.elapsed();
    let r = report.realizability.as_ref().expect("analysis ran");
    let zero = r.conditions.iter().all(|c| c.pass && c.nonzero.is_empty());
    let pass = report.exit_code == 0
        && r.premise
        && r.conditions.len() == 5
        && zero
        && report.verdict == Some(Verdict::Realizable)
        && elapsed < OPO_RUNTIME;
    Outcome::new(
        pass,
        format!(
            "{} of 5 realizability conditions have zero residual, verdict {:?}, {:.1} ms (limit {} ms)",
            r.conditions.iter().filter(|c| c.nonzero.is_empty()).count(),
            report.verdict,
            elapsed.as_secs_f64() * 1e3,
            OPO_RUNTIME.as_millis()
        ),
    )
}

fn criterion_2() -> Outcome {
    let d = opo_doubled();
    let theta = d.theta();
    let (b1, b2, chi) = (p("b1"), p("b2"), p("chi"));
    let half = Scalar::ratio(1, 2);
    let k1 = &(&b1 * &b1) * &half;
    let k2 = &(&b2 * &b2) * &half;
    let two_chi = &Scalar::from_int(2) * &chi;
    let z = || OpPoly::zero(2);

    // [Ā, ā†]
    let drift_left = OpMatrix::from_rows(
        2,
        vec![
            vec![c(-k1.clone()), term(-two_chi.clone(), &[1, 0], &[0, 0]), term(two_chi.clone(), &[0, 0], &[0, 1]), z()],
            vec![term(two_chi.clone(), &[0, 0], &[1, 0]), c(-k2.clone()), z(), z()],
            vec![term(-two_chi.clone(), &[0, 1], &[0, 0]), z(), c(k1.clone()), term(two_chi.clone(), &[0, 0], &[1, 0])],
            vec![z(), z(), term(-two_chi.clone(), &[1, 0], &[0, 0]), c(k2.clone())],
        ],
    )
    .unwrap();
    // [ā, Ā†]
    let drift_right = OpMatrix::from_rows(
        2,
        vec![
            vec![c(-k1.clone()), term(two_chi.clone(), &[1, 0], &[0, 0]), term(-two_chi.clone(), &[0, 0], &[0, 1]), z()],
            vec![term(-two_chi.clone(), &[0, 0], &[1, 0]), c(-k2.clone()), z(), z()],
            vec![term(two_chi.clone(), &[0, 1], &[0, 0]), z(), c(k1.clone()), term(-two_chi.clone(), &[0, 0], &[1, 0])],
            vec![z(), z(), term(two_chi.clone(), &[1, 0], &[0, 0]), c(k2.clone())],
        ],
    )
    .unwrap();
    let two = Scalar::from_int(2);
    let bjb = diag(
        2,
        vec![c(&two * &k1), c(&two * &k2), c(-(&two * &k1)), c(-(&two * &k2))],
    );
    let cj = diag(2, vec![c(-b1.clone()), c(-b2.clone()), c(-b1.clone()), c(-b2.clone())]);
    let half_chi = &half * &chi;
    let identity_lhs = OpVector::new(
        2,
        vec![
            term(-chi.clone(), &[1, 0], &[0, 1]),
            term(half_chi.clone(), &[0, 0], &[2, 0]),
            term(-chi.clone(), &[0, 1], &[1, 0]),
            term(half_chi.clone(), &[2, 0], &[0, 0]),
        ],
    )
    .unwrap();
    let g = OpVector::new(
        2,
        vec![
            term(-two_chi.clone(), &[1, 0], &[0, 1]),
            term(chi.clone(), &[0, 0], &[2, 0]),
            term(-two_chi.clone(), &[0, 1], &[1, 0]),
            term(chi.clone(), &[2, 0], &[0, 0]),
        ],
    )
    .unwrap();

    let j = d.signature().to_op(2);
    let b = d.diffusion();
    let got_bjb = b.matmul(&j, theta).unwrap().matmul(&b.adjoint(), theta).unwrap();
    let got_cj = comm_adj_vec(d.output(), d.state(), theta).unwrap().matmul(&j, theta).unwrap();
    let checks = [
        ("[Ā, ā†]", comm_vec_adj(d.drift(), d.state(), theta).unwrap() == drift_left),
        ("[ā, Ā†]", comm_vec_adj(d.state(), d.drift(), theta).unwrap() == drift_right),
        ("B̄J̄B̄†", got_bjb == bjb),
        ("[C̄†, ā]J̄", got_cj == cj),
        ("(1/2n̄)[Ā†Θ̄⁻¹ā, ā]", generator_identity_terms(&d, NBAR_OPO).unwrap().0 == identity_lhs),
        ("Ā − ½B̄C̄", generator_target(&d).unwrap() == g),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    Outcome::new(
        failed.is_empty(),
        if failed.is_empty() {
            format!("all {} displayed matrices match exactly", checks.len())
        } else {
            format!("mismatch in {}", failed.join(", "))
        },
    )
}

fn criterion_3() -> Outcome {
    let d = opo_doubled();
    let ex = extract_hamiltonian(&d, ExtractionMode::Graded).unwrap();
    let h = &ex.hamiltonian;
    let chi = p("chi");
    let support: Vec<_> = h.terms().map(|(m, _)| (m.creation().to_vec(), m.annihilation().to_vec())).collect();
    let expected_support = vec![(vec![0, 1], vec![2, 0]), (vec![2, 0], vec![0, 1])];
    let magnitude = h.terms().all(|(_, c)| c * &c.conj() == &chi * &chi);
    let report = run_source(Command::Extract, &fixture("opo.qs"), &RunFlags::default());
    let documented = report
        .hamiltonian
        .as_ref()
        .is_some_and(|s| s.sign_convention.contains("−i[ā, H̄] = Ā − ½B̄C̄"));
    let mut sorted = support.clone();
    sorted.sort();
    let pass = ex.self_adjoint && sorted == expected_support && magnitude && ex.reproduction.pass && documented;
    Outcome::new(
        pass,
        format!(
            "H̄ = {}, self-adjoint {}, |coefficient| = χ {}, reproduction {}, sign documented {}",
            h,
            ex.self_adjoint,
            magnitude,
            ex.reproduction.pass,
            documented
        ),
    )
}

struct RoundTrip {
    oscillator: Oscillator,
    quadratic_coupling: bool,
    realizable: bool,
    recovered: bool,
    preserved: bool,
}

fn round_trip_sample() -> (Vec<RoundTrip>, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0517_4e55);
    let start = Instant::now();
    let out = (0..ROUND_TRIP_SAMPLES)
        .map(|_| {
            let osc = random_oscillator(&mut rng, ROUND_TRIP_COUPLING_DEGREE);
            let sys = synthesize(&osc).unwrap();
            let d = double_up(&sys);
            let realizable = check_physical_realizability(&d).unwrap().pass();
            let rep = analyze(&sys, ClassOptions::default()).unwrap();
            let recovered = rep.extraction.hamiltonian.without_constant() == osc.hamiltonian().without_constant();
            let t_bar = d.signature().clone();
            let dj = d.with_noise_commutation(t_bar).unwrap();
            let preserved = check_preservation(&dj).unwrap().iter().all(|c| c.pass);
            RoundTrip {
                quadratic_coupling: osc.coupling().iter().any(|l| l.degree() == Some(2)),
                oscillator: osc,
                realizable,
                recovered,
                preserved,
            }
        })
        .collect();
    (out, start.elapsed())
}

fn first_failure(sample: &[RoundTrip], ok: impl Fn(&RoundTrip) -> bool) -> String {
    sample
        .iter()
        .find(|r| !ok(r))
        .map(|r| {
            let l: Vec<String> = r.oscillator.coupling().iter().map(|l| l.to_string()).collect();
            format!("; first failure H = {}, L = [{}]", r.oscillator.hamiltonian(), l.join("; "))
        })
        .unwrap_or_default()
}

fn criterion_4(sample: &[RoundTrip], elapsed: Duration) -> Outcome {
    let realizable = sample.iter().filter(|r| r.realizable).count();
    let recovered = sample.iter().filter(|r| r.recovered).count();
    let affine_fail = sample.iter().filter(|r| !r.quadratic_coupling && !r.realizable).count();
    let quadratic = sample.iter().filter(|r| r.quadratic_coupling).count();
    let pass = sample.len() >= 50 && realizable == sample.len() && recovered == sample.len() && elapsed < ROUND_TRIP_RUNTIME;
    Outcome::new(
        pass,
        format!(
            "{realizable}/{n} realizable, {recovered}/{n} recover H, {quadratic} with a degree-2 coupling, \
             {affine_fail} failures with affine coupling, {:.2} s (limit {} s){}",
            elapsed.as_secs_f64(),
            ROUND_TRIP_RUNTIME.as_secs(),
            first_failure(sample, |r| r.realizable && r.recovered),
            n = sample.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a55);
    let mut failures = Vec::new();
    for i in 0..LAW_INSTANCES {
        let n = 1 + i % LAW_MAX_MODES;
        let theta = CommutationMatrix::identity(n);
        let [x, y, z] = std::array::from_fn(|_| random_poly(&mut rng, n, LAW_MAX_DEGREE, 3, true));
        let mul = |a: &OpPoly, b: &OpPoly| a.product(b, &theta).unwrap();
        let br = |a: &OpPoly, b: &OpPoly| a.commutator(b, &theta).unwrap();
        let laws = [
            ("associativity", mul(&mul(&x, &y), &z) == mul(&x, &mul(&y, &z))),
            ("leibniz", br(&x, &mul(&y, &z)) == &mul(&br(&x, &y), &z) + &mul(&y, &br(&x, &z))),
            (
                "jacobi",
                (&(&br(&x, &br(&y, &z)) + &br(&y, &br(&z, &x))) + &br(&z, &br(&x, &y))).is_zero(),
            ),
            ("adjoint involution", x.adjoint().adjoint() == x),
            ("product adjoint", mul(&x, &y).adjoint() == mul(&y.adjoint(), &x.adjoint())),
            ("antisymmetry", br(&x, &y) == -br(&y, &x)),
        ];
        failures.extend(laws.iter().filter(|(_, ok)| !ok).map(|(name, _)| format!("{name} #{i}")));
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{LAW_INSTANCES} triples, n ≤ {LAW_MAX_MODES}, degree ≤ {LAW_MAX_DEGREE}, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0c6);
    let sigma = [("x", rational(3, 2)), ("y", rational(-1, 3))]
        .into_iter()
        .map(|(k, v)| (qsde_core::scalar::Param::new(k), v))
        .collect();
    let mut failures = 0;
    let mut worst = 0f64;
    let mut elements = 0;
    for i in 0..ORACLE_CASES {
        let cutoff = 6 + (i % 3) as u32;
        let n = if cutoff == 6 { 1 + i % 3 } else { 1 + i % 2 };
        let theta = CommutationMatrix::identity(n);
        let rep = TruncatedRep::new(&theta, cutoff).unwrap();
        let x = random_poly(&mut rng, n, 4, 3, true);
        let y = random_poly(&mut rng, n, 4, 3, true);
        let (float, exact) = if i % 2 == 0 {
            (
                rep.check_product::<Complex64>(&x, &y, &theta, &sigma, ORACLE_TOLERANCE).unwrap(),
                rep.check_product::<ExactComplex>(&x, &y, &theta, &sigma, 0.0).unwrap(),
            )
        } else {
            (
                rep.check_commutator::<Complex64>(&x, &y, &theta, &sigma, ORACLE_TOLERANCE).unwrap(),
                rep.check_commutator::<ExactComplex>(&x, &y, &theta, &sigma, 0.0).unwrap(),
            )
        };
        worst = worst.max(float.max_error);
        elements += float.checked;
        if !(float.agree && exact.agree && exact.max_error == 0.0) {
            failures += 1;
        }
    }
    Outcome::new(
        failures == 0,
        format!(
            "{ORACLE_CASES} cases at cutoff 6-8, {failures} disagreements, {elements} elements, \
             max float relative error {worst:e} (limit {ORACLE_TOLERANCE:e}), exact mode equal"
        ),
    )
}

fn criterion_7(sample: &[RoundTrip]) -> Outcome {
    let preserved = sample.iter().filter(|r| r.preserved).count();
    let affine_fail = sample.iter().filter(|r| !r.quadratic_coupling && !r.preserved).count();
    Outcome::new(
        preserved == sample.len(),
        format!(
            "{preserved}/{} synthesized systems preserve commutation with T̄ = J̄, {affine_fail} failures with affine coupling{}",
            sample.len(),
            first_failure(sample, |r| r.preserved)
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut problems = Vec::new();
    for name in FIXTURES {
        let src = fixture(name);
        let first = parse(&src).unwrap();
        let printed = print(&first);
        let second = parse(&printed).unwrap();
        if second != first || print(&second) != printed {
            problems.push(format!("{name} not idempotent"));
        }
    }
    for (name, condition) in [
        ("opo_d2.qs", "realizability.feedthrough"),
        ("opo_flipped_b.qs", "realizability.coupling"),
    ] {
        let report = run_source(Command::Check, &fixture(name), &RunFlags::default());
        let failing: Vec<&str> = report
            .realizability
            .iter()
            .flat_map(|r| &r.conditions)
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        if report.exit_code != 1 || !failing.contains(&condition) {
            problems.push(format!("{name}: exit {} failing {:?}", report.exit_code, failing));
        }
    }
    Outcome::new(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} fixtures idempotent, negative fixtures exit 1 naming their condition", FIXTURES.len())
        } else {
            problems.join("; ")
        },
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::new(false, format!("panicked: {msg}"))
    })
}

fn main() {
    let (sample, elapsed) = round_trip_sample();
    let results = [
        ("1", "OPO passes all five realizability conditions", guarded(criterion_1)),
        ("2", "OPO displayed matrices reproduced exactly", guarded(criterion_2)),
        ("3", "OPO Hamiltonian support, magnitude and sign", guarded(criterion_3)),
        ("4", "synthesized oscillators realizable and H recovered", guarded(|| criterion_4(&sample, elapsed))),
        ("5", "algebra laws", guarded(criterion_5)),
        ("6", "Fock oracle agreement", guarded(criterion_6)),
        ("7", "commutation preservation of synthesized systems", guarded(|| criterion_7(&sample))),
        ("8", "frontend idempotence and negative fixtures", guarded(criterion_8)),
    ];
    let mut failed = 0;
    for (id, title, outcome) in &results {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{status}] {title}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
