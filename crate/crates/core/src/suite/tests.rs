use super::*;

fn config(command: Command, spray: Family, dim: usize, samples: usize) -> RunConfig {
    RunConfig {
        spray,
        dim,
        samples,
        ..RunConfig::new(command)
    }
}

fn assert_all_pass(report: &VerificationReport) {
    let failures: Vec<_> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn validation_rejects_bad_configs() {
    let ok = RunConfig::new(Command::Verify);
    assert!(ok.validate().is_ok());
    for bad in [
        RunConfig { dim: 2, ..ok.clone() },
        RunConfig { samples: 0, ..ok.clone() },
        RunConfig { alpha: 2.0, ..ok.clone() },
        RunConfig { tol: Some(-1.0), ..ok.clone() },
        RunConfig { umax: 0.5, ..ok.clone() },
        RunConfig { step: 0.0, ..ok.clone() },
        RunConfig { k: 2, ..RunConfig::new(Command::Pontryagin) },
        RunConfig { spray: Family::Sphere, ..RunConfig::new(Command::Bryant) },
    ] {
        assert!(run(&bad).is_err(), "{bad:?}");
    }
    assert_eq!("verify".parse::<Command>().unwrap(), Command::Verify);
}

#[test]
fn verify_sphere_passes() {
    let out = run(&config(Command::Verify, Family::Sphere, 4, 6)).unwrap();
    assert_all_pass(&out.report);
    assert!(out.report.check("hat_s_vanishes").is_some());
}

#[test]
fn verify_control_fails_flatness_but_passes_control() {
    let out = run(&config(Command::Verify, Family::BerwaldRandom, 3, 4)).unwrap();
    assert_all_pass(&out.report);
    assert!(out.report.check("weyl_nonzero_control").unwrap().pass);
    assert!(out.report.check("weyl_vanishing").is_none());
}

#[test]
fn flatness_checks_detect_non_flat_spray() {
    let spray = Family::BerwaldRandom.build(3, 0.5, 1).unwrap();
    let points = SampleSpec::new(1, 4, 1.0).points(3);
    let samples = sample_packs(&spray, &VolumeForm::euclidean(3), &points);
    let checks = flatness_checks(Family::Sphere, &samples, None);
    assert!(!checks[0].pass);
}

#[test]
fn pontryagin_flat_is_exactly_zero_and_control_is_not() {
    let out = run(&config(Command::Pontryagin, Family::Flat, 4, 3)).unwrap();
    assert_all_pass(&out.report);
    let table = out.table.unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| r[2] == "0"));
    let out = run(&config(Command::Pontryagin, Family::BerwaldRandom, 4, 3)).unwrap();
    assert!(out.report.check("sigma2_nonzero_control").unwrap().pass);
}

#[test]
fn pontryagin_failure_is_a_failed_check() {
    // The control is not Douglas-flat after a non-Douglas perturbation, so
    // the suite reports rather than panics.
    let spray = Family::BerwaldRandom.build(4, 0.5, 3).unwrap();
    let skew = SprayField::new(4, "skew", move |c| {
        let mut g = spray.coefficients(c)?;
        let y = c.y();
        g[0] += &(&(&y[1] * &y[1]) * &y[1]).try_div(&dot(y, y).sqrt()?)?;
        Ok(g)
    });
    let points = SampleSpec::new(1, 2, 1.0).points(4);
    let (checks, _) = pontryagin_checks(Family::Sphere, &skew, &VolumeForm::euclidean(4), &points, 1, None);
    assert!(!checks[0].pass);
    assert!(checks[0].detail.as_deref().unwrap().contains("not Douglas"));
    assert!(checks[0].max_residual.is_infinite());
}

#[test]
fn bryant_suite_passes() {
    let out = run(&config(Command::Bryant, Family::Bryant, 3, 4)).unwrap();
    assert_all_pass(&out.report);
    let table = out.table.unwrap();
    assert_eq!(table.header, ["u", "r", "dr_du", "residual"]);
    assert_eq!(table.rows.len(), 3001);
}

#[test]
fn selftest_passes() {
    let out = run(&config(Command::Selftest, Family::Sphere, 3, 40)).unwrap();
    assert_all_pass(&out.report);
}

#[test]
fn curvature_dump_has_rows_for_every_tensor() {
    let out = run(&config(Command::Curvature, Family::SphereP1, 3, 2)).unwrap();
    assert_all_pass(&out.report);
    let table = out.table.unwrap();
    assert!(table.rows.iter().any(|r| r[1] == "chi_from_S"));
    assert!(table.rows.iter().any(|r| r[0] == "1" && r[1] == "D" && r[2] == "2:2:2:2"));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = config(Command::Verify, Family::SphereP2, 3, 6);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run(&cfg)).unwrap().report.to_json();
    let b = four.install(|| run(&cfg)).unwrap().report.to_json();
    assert_eq!(a, b);
}

#[test]
fn random_factors_are_seeded() {
    let x = [0.1, 0.2, 0.3];
    let y = [1.0, -0.5, 0.25];
    let a = random_projective_factor(7, 0, 3).value(&x, &y).unwrap();
    let b = random_projective_factor(7, 0, 3).value(&x, &y).unwrap();
    let c = random_projective_factor(7, 1, 3).value(&x, &y).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let y2: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
    let d = random_projective_factor(7, 0, 3).value(&x, &y2).unwrap();
    assert!((d - 3.0 * a).abs() < 1e-13);
}
