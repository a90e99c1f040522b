use super::*;
use crate::spray::{
    flat_spray, generic_berwald_spray, height_potential, projective_modify, randers_sphere_spray,
    rotation_factor, sphere_metric, sphere_spray, twisted_length,
};
use approx::assert_relative_eq;

const POINTS: [([f64; 3], [f64; 3]); 3] = [
    ([0.3, -0.2, 0.5], [1.0, 0.4, -0.7]),
    ([-0.6, 0.1, 0.2], [-0.3, 1.2, 0.5]),
    ([0.05, 0.7, -0.4], [0.8, -0.9, 0.2]),
];

fn sprays() -> Vec<SprayField> {
    vec![
        sphere_spray(3).unwrap(),
        projective_modify(&sphere_spray(3).unwrap(), &twisted_length(0.7)),
        projective_modify(&sphere_spray(3).unwrap(), &rotation_factor(0.4)),
        randers_sphere_spray(3, &height_potential(), 0.1).unwrap().spray,
        generic_berwald_spray(3, 7).unwrap(),
    ]
}

#[test]
fn flat_spray_has_no_curvature() {
    let pack =
        CurvaturePack::compute(&flat_spray(3).unwrap(), &VolumeForm::euclidean(3), &POINTS[0].0, &POINTS[0].1)
            .unwrap();
    for (name, t) in pack.tensors() {
        assert_eq!(t.max_abs(), 0.0, "{name}");
    }
    assert_eq!(pack.s_chi.s, 0.0);
}

#[test]
fn sphere_at_origin_has_unit_sectional_curvature() {
    let y = [0.4, -1.1, 0.3];
    let r = riemann_pack(&sphere_spray(3).unwrap(), &[0.0; 3], &y).unwrap();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    for i in 0..3 {
        for k in 0..3 {
            let expected = if i == k { yy } else { 0.0 } - y[i] * y[k];
            assert_relative_eq!(r.riemann.get(&[i, k]), expected, epsilon = 1e-13);
        }
    }
    assert_relative_eq!(r.scalar, yy, epsilon = 1e-13);
    assert!(r.weyl.max_abs() < 1e-13);
}

#[test]
fn structural_identities_hold() {
    let vol = VolumeForm::exponential(vec![0.3, -0.1, 0.2]);
    for spray in sprays() {
        for (x, y) in POINTS {
            let p = CurvaturePack::compute(&spray, &vol, &x, &y).unwrap();
            let g = spray.values(&x, &y).unwrap();
            let ctx = spray.label();
            for i in 0..3 {
                let euler: f64 = (0..3).map(|j| p.connection.nonlinear.get(&[i, j]) * y[j]).sum();
                assert_relative_eq!(euler, 2.0 * g[i], epsilon = 1e-11);
                let ry: f64 = (0..3).map(|k| p.riemann.riemann.get(&[i, k]) * y[k]).sum();
                assert!(ry.abs() < 1e-10, "{ctx}: R y = {ry}");
                let wy: f64 = (0..3).map(|k| p.riemann.weyl.get(&[i, k]) * y[k]).sum();
                assert!(wy.abs() < 1e-10, "{ctx}: W y = {wy}");
            }
            let trace_w: f64 = (0..3).map(|m| p.riemann.weyl.get(&[m, m])).sum();
            assert!(trace_w.abs() < 1e-10, "{ctx}: tr W = {trace_w}");
            let chi_y: f64 = (0..3).map(|k| p.s_chi.chi_from_s.get(&[k]) * y[k]).sum();
            assert!(chi_y.abs() < 1e-10, "{ctx}: chi y = {chi_y}");
            for k in 0..3 {
                for l in 0..3 {
                    let tr: f64 = (0..3).map(|m| p.berwald.douglas.get(&[m, m, k, l])).sum();
                    assert!(tr.abs() < 1e-10, "{ctx}: tr D = {tr}");
                    for i in 0..3 {
                        let by: f64 =
                            (0..3).map(|j| p.berwald.berwald.get(&[i, j, k, l]) * y[j]).sum();
                        assert!(by.abs() < 1e-10, "{ctx}: B y = {by}");
                        for j in 0..3 {
                            let b = p.berwald.berwald.get(&[i, j, k, l]);
                            assert_relative_eq!(b, p.berwald.berwald.get(&[i, k, j, l]), epsilon = 1e-11);
                            assert_relative_eq!(b, p.berwald.berwald.get(&[i, l, k, j]), epsilon = 1e-11);
                        }
                    }
                }
            }
            let scale = 1.0 + p.riemann.riemann4.max_abs();
            assert!(p.riemann.riemann4.max_diff(&p.riemann.riemann4_alt) / scale < 1e-9, "{ctx}");
            let scale = 1.0 + p.s_chi.chi_from_r.max_abs();
            assert!(p.s_chi.chi_from_r.max_diff(&p.s_chi.chi_from_s) / scale < 1e-9, "{ctx}");
            assert!(p.weyl_via_chi.max_diff(&p.riemann.weyl) < 1e-9, "{ctx}");
        }
    }
}

#[test]
fn douglas_and_weyl_are_projectively_invariant() {
    let base = randers_sphere_spray(3, &height_potential(), 0.1).unwrap().spray;
    let modified = projective_modify(&base, &twisted_length(-0.5));
    for (x, y) in POINTS {
        let a = berwald_pack(&base, &x, &y).unwrap();
        let b = berwald_pack(&modified, &x, &y).unwrap();
        assert!(a.douglas.max_diff(&b.douglas) < 1e-10);
        let a = riemann_pack(&base, &x, &y).unwrap();
        let b = riemann_pack(&modified, &x, &y).unwrap();
        assert!(a.weyl.max_diff(&b.weyl) < 1e-10);
    }
}

#[test]
fn projectively_flat_families_have_vanishing_weyl_and_douglas() {
    for spray in sprays().into_iter().take(4) {
        for (x, y) in POINTS {
            let d = berwald_pack(&spray, &x, &y).unwrap();
            let r = riemann_pack(&spray, &x, &y).unwrap();
            assert!(d.douglas.max_abs() < 1e-9, "{}", spray.label());
            assert!(r.weyl.max_abs() < 1e-9, "{}", spray.label());
        }
    }
}

#[test]
fn generic_berwald_spray_is_not_projectively_flat() {
    let spray = generic_berwald_spray(3, 7).unwrap();
    let w = (0..POINTS.len())
        .map(|i| riemann_pack(&spray, &POINTS[i].0, &POINTS[i].1).unwrap().weyl.max_abs())
        .fold(0.0, f64::max);
    assert!(w > 1e-3, "max |W| = {w}");
}

#[test]
fn exponential_volume_on_flat_spray() {
    let vol = VolumeForm::exponential(vec![1.0, 0.0, 0.0]);
    let y = [0.7, -0.2, 1.3];
    let s = s_curvature(&flat_spray(3).unwrap(), &vol, &[0.2, 0.1, -0.3], &y).unwrap();
    assert_relative_eq!(s, -0.7, epsilon = 1e-14);
}

#[test]
fn riemannian_volume_kills_sphere_s_curvature() {
    let vol = VolumeForm::riemannian(&sphere_metric(3).unwrap()).unwrap();
    for (x, y) in POINTS {
        let s = s_curvature(&sphere_spray(3).unwrap(), &vol, &x, &y).unwrap();
        assert!(s.abs() < 1e-13, "S = {s}");
    }
}

#[test]
fn hat_spray_has_zero_s_and_berwald_equal_to_douglas() {
    let vol = VolumeForm::exponential(vec![0.2, 0.5, -0.3]);
    let base = projective_modify(&sphere_spray(3).unwrap(), &twisted_length(0.3));
    let hat = hat_spray(&base, &vol).unwrap();
    for (x, y) in POINTS {
        assert!(s_curvature(&hat, &vol, &x, &y).unwrap().abs() < 1e-12);
        let b_hat = berwald_pack(&hat, &x, &y).unwrap();
        let d = berwald_pack(&base, &x, &y).unwrap();
        assert!(b_hat.berwald.max_diff(&d.douglas) < 1e-10);
    }
}

#[test]
fn tau_fits_projectively_flat_a() {
    let spray = projective_modify(&sphere_spray(3).unwrap(), &twisted_length(0.7));
    let (x, y) = POINTS[1];
    let r = riemann_pack(&spray, &x, &y).unwrap();
    assert!(r.tau_residual < 1e-10);
}

#[test]
fn rejects_zero_direction() {
    let err = riemann_pack(&sphere_spray(3).unwrap(), &[0.0; 3], &[0.0; 3]).unwrap_err();
    assert!(matches!(err, Error::DegenerateDirection(_)));
}

#[test]
fn flatness_test_separates_flat_and_generic_sprays() {
    let spec = SampleSpec::new(42, 8, 2.0);
    let flat = projective_modify(&flat_spray(4).unwrap(), &crate::spray::euclidean_length());
    let report = projective_flatness_test(&flat, &spec, DEFAULT_TOLERANCE).unwrap();
    assert!(report.all_pass(), "{}", report.to_json());
    let report = projective_flatness_test(&flat_spray(4).unwrap(), &spec, 1e-12).unwrap();
    assert!(report.all_pass());
    let generic = generic_berwald_spray(4, 3).unwrap();
    let report = projective_flatness_test(&generic, &spec, DEFAULT_TOLERANCE).unwrap();
    assert!(!report.check("weyl_vanishing").unwrap().pass);
    assert!(projective_flatness_test(&flat_spray(2).unwrap(), &spec, 1e-8).is_err());
}
