//! Acceptance criteria 1-9. Each criterion prints one PASS/FAIL line with its
//! worst residual and wall time; the process fails if any criterion fails.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use spraykit::bryant::BryantParams;
use spraykit::families::{Family, VolumeChoice};
use spraykit::report::Check;
use spraykit::sampling::SampleSpec;
use spraykit::suite::{self, Command, RunConfig};

const SEED: u64 = 20240917;

struct Outcome {
    checks: Vec<Check>,
    note: String,
}

fn outcome(checks: Vec<Check>, note: impl Into<String>) -> Outcome {
    Outcome {
        checks,
        note: note.into(),
    }
}

fn points(family: Family, n: usize, count: usize) -> Vec<spraykit::sampling::SamplePoint> {
    SampleSpec::new(SEED, count, family.radius()).points(n)
}

fn labelled(mut checks: Vec<Check>, label: &str) -> Vec<Check> {
    for c in &mut checks {
        c.name = format!("{label}/{}", c.name);
    }
    checks
}

fn criterion1() -> Outcome {
    let mut checks = Vec::new();
    for n in [4, 5] {
        for family in Family::pontryagin_witnesses() {
            let spray = family.build(n, FRAC_PI_4, SEED).unwrap();
            let volume = VolumeChoice::Euclidean.build(n).unwrap();
            let (c, _) = suite::pontryagin_checks(family, &spray, &volume, &points(family, n, 16), 1, None);
            checks.extend(labelled(c, &format!("{family} n={n}")));
        }
    }
    outcome(checks, "sigma2 of hat forms, 7 sprays x n in {4,5} x 16 points")
}

fn criterion2() -> Outcome {
    let mut checks = Vec::new();
    for (family, n) in [(Family::SphereP2, 4), (Family::Randers, 4), (Family::Bryant, 3)] {
        let spray = family.build(n, FRAC_PI_4, SEED).unwrap();
        let volume = VolumeChoice::Exponential.build(n).unwrap();
        let samples = suite::sample_packs(&spray, &volume, &points(family, n, 32));
        let c = suite::hat_lemma_checks(&spray, &volume, &samples, Some(1e-8));
        checks.extend(labelled(c, &format!("{family} n={n}")));
    }
    outcome(checks, "hat Berwald = Douglas and hat S = 0, 3 Douglas sprays x 32 points")
}

fn criterion3() -> Outcome {
    let mut checks = Vec::new();
    for &family in Family::all() {
        let spray = family.build(3, FRAC_PI_4, SEED).unwrap();
        let volume = VolumeChoice::Exponential.build(3).unwrap();
        let samples = suite::sample_packs(&spray, &volume, &points(family, 3, 32));
        let mut c = suite::cross_identity_checks(&samples, Some(1e-8));
        c.extend(suite::flatness_checks(family, &samples, Some(1e-8)));
        checks.extend(labelled(c, family.name()));
    }
    outcome(checks, "R4 = R4_alt, chi routes, W-chi, W = D = 0 iff flat constructor; 12 families x 32 points")
}

fn criterion4() -> Outcome {
    let mut checks = Vec::new();
    for n in [3, 4] {
        for &family in Family::all() {
            let spray = family.build(n, FRAC_PI_4, SEED).unwrap();
            let volume = VolumeChoice::Exponential.build(n).unwrap();
            let samples = suite::sample_packs(&spray, &volume, &points(family, n, 8));
            let c = suite::forced_identity_checks(&samples, Some(1e-9));
            checks.extend(labelled(c, &format!("{family} n={n}")));
        }
    }
    outcome(checks, "Ry, Wy, tr W, chi y, B symmetry, By, tr D; 12 families x n in {3,4}")
}

fn criterion5() -> Outcome {
    let mut checks = Vec::new();
    for &family in Family::all() {
        let spray = family.build(3, FRAC_PI_4, SEED).unwrap();
        let volume = VolumeChoice::Euclidean.build(3).unwrap();
        let samples = suite::sample_packs(&spray, &volume, &points(family, 3, 16));
        let c = suite::projective_invariance_check(&spray, &samples, SEED, Some(1e-8));
        checks.extend(labelled(vec![c], family.name()));
    }
    outcome(checks, "W and D under 3 random P per base spray")
}

fn criterion6() -> Outcome {
    let checks = suite::fd_battery(SEED, 200, None).unwrap();
    let tolerances_ok = checks
        .iter()
        .all(|c| c.tolerance == if c.name.ends_with('4') { 1e-4 } else { 1e-6 });
    assert!(tolerances_ok, "unexpected finite-difference tolerances");
    outcome(checks, "200 jet/FD cases, orders 1-4")
}

fn criterion7() -> Outcome {
    let mut checks = Vec::new();
    for alpha in [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let params = BryantParams::new(alpha).unwrap();
        let (c, _) = suite::bryant_checks(&params, 3, SEED, 16, 3.0, 1e-3, None);
        let wanted: &[&str] = if alpha == FRAC_PI_4 {
            &[
                "ode_residual",
                "ode_reflected_residual",
                "ode_convergence_order",
                "s_formula_cross_check",
                "alpha_zero_sphere_limit",
                "projective_fit",
                "weyl_vanishing",
                "douglas_vanishing",
                "p_relation",
            ]
        } else {
            &["ode_residual", "ode_reflected_residual", "ode_convergence_order"]
        };
        let c: Vec<Check> = c.into_iter().filter(|c| wanted.contains(&c.name.as_str())).collect();
        assert_eq!(c.len(), wanted.len());
        checks.extend(labelled(c, &format!("alpha={alpha:.4}")));
    }
    outcome(checks, "ODE on [0,3] for 3 angles; s, alpha->0, fit, W/D, P-relation at pi/4")
}

fn criterion8() -> Outcome {
    let checks: Vec<Check> = suite::chern_weil_battery(SEED, None)
        .into_iter()
        .filter(|c| c.name == "sigma_vs_determinant" || c.name == "sigma_conjugation_invariance")
        .collect();
    assert_eq!(checks.len(), 2);
    outcome(checks, "sigma_r vs determinant expansion (20 matrices) and conjugation invariance")
}

fn run_binary(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Process::new(env!("CARGO_BIN_EXE_spraykit"))
        .args(args)
        .output()
        .expect("spraykit binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn criterion9() -> Outcome {
    let mut checks = Vec::new();
    let base = ["verify", "--spray", "sphere-p2", "--dim", "4", "--samples", "8", "--seed", "7", "--no-timing"];
    let (a, code_a) = run_binary(&[&base[..], &["--threads", "1"]].concat());
    let (b, code_b) = run_binary(&[&base[..], &["--threads", "4"]].concat());
    let ok = a == b && !a.is_empty() && code_a == 0 && code_b == 0;
    checks.push(Check::new("verify_binary_threads_1_vs_4", "cli:determinism", if ok { 0.0 } else { 1.0 }, 0.0, 2));

    let base = ["pontryagin", "--spray", "randers", "--dim", "4", "--samples", "4", "--no-timing"];
    let (a, _) = run_binary(&[&base[..], &["--threads", "2"]].concat());
    let (b, _) = run_binary(&[&base[..], &["--threads", "3"]].concat());
    let ok = a == b && !a.is_empty();
    checks.push(Check::new("pontryagin_binary_threads_2_vs_3", "cli:determinism", if ok { 0.0 } else { 1.0 }, 0.0, 2));

    let config = RunConfig {
        spray: Family::Bryant,
        samples: 6,
        ..RunConfig::new(Command::Bryant)
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
    let a = one.install(|| suite::run(&config)).unwrap().report.to_json();
    let b = many.install(|| suite::run(&config)).unwrap().report.to_json();
    checks.push(Check::new("bryant_in_process_threads_1_vs_6", "cli:determinism", if a == b { 0.0 } else { 1.0 }, 0.0, 2));
    outcome(checks, "byte-identical JSON across runs and thread counts")
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 9] = [
        (1, "Pontryagin forms vanish", Duration::from_secs(60), criterion1),
        (2, "hat spray lemma", Duration::from_secs(20), criterion2),
        (3, "cross identities and flatness", Duration::from_secs(30), criterion3),
        (4, "forced identities", Duration::from_secs(10), criterion4),
        (5, "projective invariance", Duration::from_secs(15), criterion5),
        (6, "jet vs finite differences", Duration::from_secs(20), criterion6),
        (7, "Bryant suite", Duration::from_secs(90), criterion7),
        (8, "Chern-Weil kernel", Duration::from_secs(10), criterion8),
        (9, "determinism", Duration::from_secs(120), criterion9),
    ];
    let mut failed = 0;
    for (id, title, limit, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let worst = out
            .checks
            .iter()
            .filter(|c| !c.name.contains("control"))
            .map(|c| match (c.max_residual, c.tolerance) {
                (r, _) if r == 0.0 => 0.0,
                (r, t) if t > 0.0 => r / t,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        let failures: Vec<&Check> = out.checks.iter().filter(|c| !c.pass).collect();
        let in_time = elapsed <= limit;
        let pass = failures.is_empty() && in_time && !out.checks.is_empty();
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} {}: {title} ({}); {} checks, worst residual/tolerance {worst:.2e}; {:.2} s (limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            out.note,
            out.checks.len(),
            elapsed.as_secs_f64(),
            limit.as_secs(),
        );
        for c in failures {
            println!(
                "    failed {} [{}]: {:e} > {:e} {}",
                c.name,
                c.anchor,
                c.max_residual,
                c.tolerance,
                c.detail.as_deref().unwrap_or("")
            );
        }
        if !in_time {
            println!("    over the time limit");
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
