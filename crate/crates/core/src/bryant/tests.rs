use super::*;
use crate::curvature::flatness_residuals;
use crate::sampling::SampleSpec;
use crate::spray::{linear_factor, projective_modify};
use approx::assert_relative_eq;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

fn params() -> BryantParams {
    BryantParams::new(FRAC_PI_4).unwrap()
}

#[test]
fn rejects_alpha_outside_range() {
    assert!(BryantParams::new(0.0).is_err());
    assert!(BryantParams::new(FRAC_PI_2).is_err());
}

#[test]
fn origin_values() {
    let p = BryantParams::new(0.3).unwrap();
    let y = [0.6, -0.8, 1.1];
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let [a, b, c, d] = bryant_abcd(&p, &[0.0; 3], &y);
    assert_relative_eq!(a, yy * yy, epsilon = 1e-14);
    assert_relative_eq!(b, p.cos2() * yy, epsilon = 1e-14);
    assert_eq!(c, 0.0);
    assert_eq!(d, 1.0);
    let f = bryant_f(&p).value(&[0.0; 3], &y).unwrap();
    assert_relative_eq!(f, yy.sqrt() * p.alpha().cos(), epsilon = 1e-14);
}

#[test]
fn jet_norm_matches_scalar_formulas() {
    let p = BryantParams::new(FRAC_PI_8).unwrap();
    let (x, y) = ([0.4, -0.3, 0.9], [1.2, 0.1, -0.5]);
    let [a, b, c, d] = bryant_abcd(&p, &x, &y);
    let expected = ((a.sqrt() + b) / (2.0 * d) + (c / d).powi(2)).sqrt() + c / d;
    assert_relative_eq!(bryant_f(&p).value(&x, &y).unwrap(), expected, epsilon = 1e-14);
    let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
    assert_relative_eq!(bryant_f(&p).value(&x, &y2).unwrap(), 2.0 * expected, epsilon = 1e-13);
}

#[test]
fn small_alpha_reduces_to_sphere_norm() {
    let p = BryantParams::new(1e-6).unwrap();
    let sphere = crate::spray::sphere_metric(3).unwrap();
    for pt in SampleSpec::new(5, 16, 1.5).points(3) {
        let f = bryant_f(&p).value(&pt.x, &pt.y).unwrap();
        let s = sphere.norm(&JetChart::point(&pt.x, &pt.y).unwrap()).unwrap().value();
        assert!((f - s).abs() <= 1e-5 * (1.0 + s), "{f} vs {s}");
    }
}

#[test]
fn fundamental_tensor_is_positive_definite() {
    for alpha in [FRAC_PI_8, FRAC_PI_4] {
        let metric = bryant_metric(&BryantParams::new(alpha).unwrap(), 3);
        for pt in SampleSpec::new(2, 200, 1.5).points(3) {
            assert!(metric.min_eigenvalue(&pt.x, &pt.y).unwrap() > 0.0);
        }
    }
    let metric = bryant_metric(&BryantParams::new(3.0 * FRAC_PI_8).unwrap(), 3);
    for pt in SampleSpec::new(2, 200, 1.3).points(3) {
        assert!(metric.min_eigenvalue(&pt.x, &pt.y).unwrap() > 0.0);
    }
}

#[test]
fn displayed_norm_loses_convexity_near_the_chart_edge_at_large_alpha() {
    // Reference eigenvalue from a 40-digit evaluation of the displayed formula.
    let metric = bryant_metric(&BryantParams::new(3.0 * FRAC_PI_8).unwrap(), 3);
    let x = [0.9805076855801121, -0.4085754890267038, 1.0123212246969369];
    let y = [-0.42747673109518, 0.27494418461413167, 1.0265209444915697];
    let e = metric.min_eigenvalue(&x, &y).unwrap();
    assert_relative_eq!(e, -0.006250747145020938, max_relative = 1e-8);
}

#[test]
fn p_and_q_at_origin() {
    let p = BryantParams::new(0.2).unwrap();
    let (pv, qv) = pq_eval(&p, &[0.0; 3]).unwrap();
    assert_eq!(pv, 0.0);
    assert_relative_eq!(qv, FRAC_PI_4 - 0.2, epsilon = 1e-15);
}

#[test]
fn ode_residuals_and_convergence() {
    for alpha in [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let sol = solve_dep(&BryantParams::new(alpha).unwrap(), 3.0, 1e-3).unwrap();
        assert!(sol.max_residual() <= 1e-9, "{}", sol.max_residual());
        assert!(sol.reflected_residual() <= 1e-9);
        let order = sol.convergence().observed_order.unwrap();
        assert!((3.5..=4.5).contains(&order), "{order}");
        assert_eq!(sol.dr()[0], 0.0);
        assert_eq!(sol.nodes(), 3001);
    }
}

#[test]
fn vanishing_forcing_gives_vanishing_r() {
    let sol = solve_dep(&BryantParams::new(1e-9).unwrap(), 3.0, 1e-2).unwrap();
    assert!(sol.r().iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn interpolation_reproduces_nodes_and_rejects_outside() {
    let sol = solve_dep(&params(), 2.0, 1e-2).unwrap();
    let v = sol.eval(1.0).unwrap();
    assert_relative_eq!(v.r, sol.r()[100], epsilon = 1e-14);
    assert_relative_eq!(v.dr, sol.dr()[100], epsilon = 1e-14);
    assert!(matches!(sol.eval(2.5), Err(Error::OutsideGrid { .. })));
    assert!(sol.eval(-0.1).is_err());
}

#[test]
fn s_formulas_agree() {
    let sol = solve_dep(&params(), 10.0, 1e-3).unwrap();
    for i in 0..16 {
        let t = 0.02 + 0.15 * i as f64;
        let u = 1.0 / t.sqrt();
        let su = s_from_r(&sol, u).unwrap();
        let st = s_from_t(&sol, t).unwrap();
        assert!((su - st).abs() <= 1e-7 * (1.0 + st.abs()), "t = {t}: {su} vs {st}");
    }
}

#[test]
fn printed_s_coefficient_disagrees_with_chain_rule() {
    let sol = solve_dep(&params(), 3.0, 1e-3).unwrap();
    let u: f64 = 1.3;
    let v = sol.eval(u).unwrap();
    let printed = u * u * (1.0 + u * u).powi(2) * v.d2r + (3.0 * u.powi(3) + 5.0 * u) * (u * u + 1.0) * v.dr;
    let st = s_from_t(&sol, 1.0 / (u * u)).unwrap();
    assert!((printed - st).abs() > 1e-3);
}

#[test]
fn radial_field_gradient() {
    let sol = solve_dep(&params(), 10.0, 1e-3).unwrap();
    let x = [0.5, -0.4, 0.3];
    let t: f64 = x.iter().map(|v| v * v).sum();
    let chart = JetChart::new(&x, &[1.0, 0.0, 0.0], 2, None).unwrap();
    let j = sol.radial_field().eval(&chart).unwrap();
    let (rt, rtt) = sol.t_derivatives(t).unwrap();
    assert_relative_eq!(j.d1(0).unwrap(), 2.0 * rt * x[0], epsilon = 1e-12);
    assert_relative_eq!(j.d2(0, 1).unwrap(), 4.0 * rtt * x[0] * x[1], epsilon = 1e-11);
}

#[test]
fn projective_fit() {
    let sphere = sphere_spray(3).unwrap();
    let (x, y) = ([0.3, 0.1, -0.2], [0.5, 1.0, -0.4]);
    let fit = extract_p(&sphere, &sphere, &x, &y).unwrap();
    assert_eq!(fit.p, 0.0);
    assert_eq!(fit.residual, 0.0);
    let factor = linear_factor(vec![0.3, -0.2, 0.5]);
    let modified = projective_modify(&sphere, &factor);
    let fit = extract_p(&modified, &sphere, &x, &y).unwrap();
    assert_relative_eq!(fit.p, factor.value(&x, &y).unwrap(), epsilon = 1e-12);
    let other = crate::spray::generic_berwald_spray(3, 1).unwrap();
    assert!(matches!(
        extract_p(&other, &sphere, &x, &y),
        Err(Error::NotProjectivelyRelated { .. })
    ));
}

#[test]
fn bryant_spray_is_projectively_flat() {
    let spray = bryant_spray(&params(), 3).unwrap();
    let sphere = sphere_spray(3).unwrap();
    for pt in SampleSpec::new(9, 4, 1.5).points(3) {
        assert!(extract_p(&spray, &sphere, &pt.x, &pt.y).unwrap().residual <= 1e-7);
        let (w, d) = flatness_residuals(&spray, &pt.x, &pt.y).unwrap();
        assert!(w <= 1e-7 && d <= 1e-7, "{w} {d}");
    }
}

#[test]
fn p_relation_holds() {
    let sol = solve_dep(&params(), 10.0, 1e-3).unwrap();
    for pt in SampleSpec::new(3, 6, 1.5).annulus(0.1).points(3) {
        let rel = verify_p_relation(&params(), &sol, &pt.x, &pt.y).unwrap();
        assert!(rel.residual <= 1e-5, "{rel:?}");
        let y2: Vec<f64> = pt.y.iter().map(|v| 2.0 * v).collect();
        let rel2 = verify_p_relation(&params(), &sol, &pt.x, &y2).unwrap();
        assert!((rel2.lhs - 16.0 * rel.lhs).abs() <= 1e-9 * (1.0 + 16.0 * rel.lhs.abs()));
    }
}

#[test]
fn p_relation_degenerates_as_alpha_vanishes() {
    let p = BryantParams::new(1e-7).unwrap();
    let sol = solve_dep(&p, 10.0, 1e-2).unwrap();
    let rel = verify_p_relation(&p, &sol, &[0.3, -0.5, 0.2], &[1.0, 0.2, 0.4]).unwrap();
    assert!(rel.p.abs() < 1e-6);
    assert!(rel.lhs.abs() < 1e-10 && rel.rhs.abs() < 1e-10, "{rel:?}");
}

#[test]
fn points_inside_the_inner_radius_are_outside_the_grid() {
    let sol = solve_dep(&params(), 3.0, 1e-2).unwrap();
    let err = verify_p_relation(&params(), &sol, &[0.1, 0.1, 0.0], &[1.0, 0.0, 0.0]).unwrap_err();
    assert!(matches!(err, Error::OutsideGrid { .. }));
}
