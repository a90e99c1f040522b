use super::*;
use crate::oracle::det_expansion;
use crate::sampling::{gaussian_vector, stream, Purpose};
use crate::spray::{
    euclidean_length, flat_spray, generic_berwald_spray, projective_modify, riemannian_spray,
    sphere_metric, sphere_spray, twisted_length, JetChart,
};
use nalgebra::DMatrix;

fn random_form(rng: &mut impl rand::Rng, n: usize, p: usize) -> AltForm {
    let len = AltForm::zero(n, p).unwrap().components().len();
    AltForm::from_components(n, p, gaussian_vector(rng, len)).unwrap()
}

fn random_matrix(seed: u64, n: usize) -> FormMatrix {
    let mut rng = stream(seed, Purpose::Matrices, n as u64);
    FormMatrix::from_fn(n, |_, _| random_form(&mut rng, n, 2)).unwrap()
}

#[test]
fn permutation_signs() {
    let perms = signed_permutations(3);
    assert_eq!(perms.len(), 6);
    let total: f64 = perms.iter().map(|(_, s)| s).sum();
    assert_eq!(total, 0.0);
    for (p, s) in perms {
        let inversions = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        assert_eq!(s, if inversions % 2 == 0 { 1.0 } else { -1.0 });
    }
}

#[test]
fn diagonal_matrix_sigmas() {
    let (a, b) = (1.5, -0.25);
    let mut omega = FormMatrix::zero(4).unwrap();
    *omega.get_mut(0, 0) = AltForm::monomial(4, &[0, 1], a).unwrap();
    *omega.get_mut(1, 1) = AltForm::monomial(4, &[2, 3], b).unwrap();
    let s1 = sigma_r(&omega, 1).unwrap();
    assert_eq!(s1.get(&[0, 1]), a);
    assert_eq!(s1.get(&[2, 3]), b);
    let s2 = sigma_r(&omega, 2).unwrap();
    assert_eq!(s2.components(), &[a * b]);
    assert_eq!(sigma_r(&FormMatrix::zero(4).unwrap(), 2).unwrap().max_abs(), 0.0);
    assert!(sigma_r(&omega, 3).is_err());
}

#[test]
fn sigma_matches_determinant_expansion() {
    for case in 0..20u64 {
        let n = 4 + (case % 3) as usize;
        let omega = random_matrix(case, n);
        let det = det_expansion(&omega).unwrap();
        for r in 1..=2 {
            let s = sigma_r(&omega, r).unwrap();
            assert!(s.max_diff(&det[r]) <= 1e-12 * (1.0 + det[r].max_abs()), "n = {n}, r = {r}");
        }
        assert_eq!(sigma_r(&omega, 1).unwrap(), omega.trace());
    }
}

#[test]
fn graded_commutativity() {
    let mut rng = stream(11, Purpose::Matrices, 0);
    for case in 0..100 {
        let p = case % 4;
        let q = (case / 4) % 3;
        let a = random_form(&mut rng, 6, p);
        let b = random_form(&mut rng, 6, q);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(if p * q % 2 == 0 { 1.0 } else { -1.0 });
        assert!(ab.max_diff(&ba) <= 1e-14 * (1.0 + ab.max_abs()));
    }
}

#[test]
fn sigma_is_conjugation_invariant() {
    for case in 0..5u64 {
        let n = 4 + (case % 2) as usize;
        let omega = random_matrix(100 + case, n);
        let mut rng = stream(case, Purpose::Matrices, 99);
        let a = DMatrix::from_fn(n, n, |i, j| {
            rand::Rng::random_range(&mut rng, -1.0..1.0) + if i == j { 2.0 } else { 0.0 }
        });
        let conj = omega.conjugate(&a).unwrap();
        for r in 1..=2 {
            let s = sigma_r(&omega, r).unwrap();
            let c = sigma_r(&conj, r).unwrap();
            assert!(s.max_diff(&c) <= 1e-9 * (1.0 + s.max_abs()));
        }
    }
}

#[test]
fn flat_spray_forms_vanish() {
    let x = [0.1, -0.2, 0.3, 0.05];
    let flat = flat_spray(4).unwrap();
    assert_eq!(berwald_connection_forms(&flat, &x).unwrap().max_abs(), 0.0);
    let vol = VolumeForm::euclidean(4);
    assert_eq!(hat_curvature_forms(&flat, &vol, &x).unwrap().max_abs(), 0.0);
    assert_eq!(pontryagin_density(&flat, &vol, &x, 1).unwrap().max_abs(), 0.0);
}

#[test]
fn riemannian_sphere_forms() {
    let x = [0.3, -0.4, 0.2, 0.6];
    let spray = riemannian_spray(&sphere_metric(4).unwrap()).unwrap();
    let omega = berwald_connection_forms(&spray, &x).unwrap();
    assert!(omega.max_abs() > 0.1);
    // Constant curvature: σ₂ of the Riemannian curvature forms vanishes.
    let s2 = sigma_r(&omega, 2).unwrap();
    assert!(s2.max_abs() < 1e-12 * omega.max_abs().powi(2));
}

#[test]
fn non_berwald_input_is_rejected() {
    let spray = projective_modify(&flat_spray(4).unwrap(), &euclidean_length());
    let err = berwald_connection_forms(&spray, &[0.0; 4]).unwrap_err();
    assert!(matches!(err, Error::NotBerwald { .. }));
}

#[test]
fn hat_forms_agree_with_berwald_forms_of_hat_spray() {
    let spray = projective_modify(&sphere_spray(4).unwrap(), &twisted_length(0.4));
    let vol = VolumeForm::exponential(vec![0.2, -0.1, 0.3, 0.0]);
    for x in [[0.1, 0.2, -0.3, 0.4], [-0.5, 0.0, 0.3, 0.1]] {
        let a = hat_curvature_forms(&spray, &vol, &x).unwrap();
        let b = berwald_connection_forms(&hat_spray(&spray, &vol).unwrap(), &x).unwrap();
        assert!(a.max_diff(&b) <= 1e-8 * (1.0 + a.max_abs()));
        assert!(a.max_abs() > 1e-3);
        let p = pontryagin_density(&spray, &vol, &x, 1).unwrap();
        assert!(p.max_abs() <= 1e-7 * (1.0 + a.max_abs().powi(2)));
    }
}

#[test]
fn generic_berwald_control_has_nonzero_sigma2() {
    let spray = generic_berwald_spray(4, 5).unwrap();
    let x = [0.2, 0.1, -0.3, 0.25];
    let omega = berwald_connection_forms(&spray, &x).unwrap();
    let s2 = sigma_r(&omega, 2).unwrap();
    assert!(s2.max_diff(&det_expansion(&omega).unwrap()[2]) < 1e-12 * (1.0 + s2.max_abs()));
    assert!(s2.max_abs() > 1e-3, "{s2:?}");
}

#[test]
fn pontryagin_preconditions() {
    let vol = VolumeForm::euclidean(4);
    let err = pontryagin_density(&flat_spray(4).unwrap(), &vol, &[0.0; 4], 2).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
    // G¹ = (y²)³/|y| is not projectively related to anything flat.
    let skew = SprayField::new(4, "skew", |c: &JetChart| {
        let y = c.y();
        let len = crate::spray::dot(y, y).sqrt()?;
        let g1 = (&(&y[1] * &y[1]) * &y[1]).try_div(&len)?;
        Ok(vec![g1, c.constant(0.0), c.constant(0.0), c.constant(0.0)])
    });
    let err = pontryagin_density(&skew, &vol, &[0.1; 4], 1).unwrap_err();
    assert!(matches!(err, Error::NotDouglas { .. }));
    let err = hat_curvature_forms(&skew, &vol, &[0.1; 4]).unwrap_err();
    assert!(matches!(err, Error::NotProjectivelyFlat { .. }));
}
