//! Bryant metrics in gnomonic coordinates, the radial ODE for `r`, and the
//! implicit relation satisfied by their projective factor.
//!
//! The radial function is integrated in `u = 1/|x|`, so `u = 0` is the pole
//! at infinity of the chart and the solution on `[0, u_max]` covers the region
//! `|x| ≥ 1/u_max`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::spray::{
    covariant_hessian, dot, finsler_spray, sphere_metric, sphere_spray, JetChart, MetricField,
    ScalarField, SprayField,
};

/// Residual bound for the projective fit `G − G_ref = P y`.
pub const PROJECTIVE_FIT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BryantParams {
    alpha: f64,
    cos2: f64,
    sin2: f64,
}

impl BryantParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < FRAC_PI_2) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, pi/2)")));
        }
        Ok(BryantParams {
            alpha,
            cos2: (2.0 * alpha).cos(),
            sin2: (2.0 * alpha).sin(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cos2(&self) -> f64 {
        self.cos2
    }

    pub fn sin2(&self) -> f64 {
        self.sin2
    }

    /// Right side of the u-form equation, `sin2α / (2(1 + 2cos2α u² + u⁴))`.
    pub fn forcing(&self, u: f64) -> f64 {
        let u2 = u * u;
        self.sin2 / (2.0 * (1.0 + 2.0 * self.cos2 * u2 + u2 * u2))
    }

    fn forcing_du(&self, u: f64) -> f64 {
        let u2 = u * u;
        let d = 1.0 + 2.0 * self.cos2 * u2 + u2 * u2;
        -self.sin2 * (4.0 * self.cos2 * u + 4.0 * u2 * u) / (2.0 * d * d)
    }

    /// `r''` from the u-form equation given `r'`.
    pub fn second_derivative(&self, u: f64, dr: f64) -> f64 {
        (self.forcing(u) - 3.0 * u * dr) / (1.0 + u * u)
    }
}

/// The four displayed quantities `A, B, C, D` at a point.
pub fn bryant_abcd(params: &BryantParams, x: &[f64], y: &[f64]) -> [f64; 4] {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let b = params.cos2 * yy + (xx * yy - xy * xy);
    let a = b * b + (params.sin2 * yy).powi(2);
    let c = params.sin2 * xy;
    let d = xx * xx + 2.0 * params.cos2 * xx + 1.0;
    [a, b, c, d]
}

/// `F = √((√A + B)/(2D) + (C/D)²) + C/D` as a jet-capable field.
pub fn bryant_f(params: &BryantParams) -> ScalarField {
    let p = *params;
    ScalarField::new(format!("bryant(alpha = {})", p.alpha), move |chart| {
        let (x, y) = (chart.x(), chart.y());
        let xx = dot(x, x);
        let yy = dot(y, y);
        let xy = dot(x, y);
        let b = yy.scale(p.cos2) + &(&xx * &yy) - &(&xy * &xy);
        let sy = yy.scale(p.sin2);
        let a = &b * &b + &(&sy * &sy);
        let c = xy.scale(p.sin2);
        let d = (&xx * &xx + &xx.scale(2.0 * p.cos2)).add_scalar(1.0);
        let c_over_d = c.try_div(&d)?;
        let inner = (a.sqrt()? + &b).try_div(&d.scale(2.0))? + &(&c_over_d * &c_over_d);
        Ok(inner.sqrt()? + &c_over_d)
    })
}

pub fn bryant_metric(params: &BryantParams, n: usize) -> MetricField {
    MetricField::finsler(n, format!("bryant(alpha = {})", params.alpha), bryant_f(params))
}

pub fn bryant_spray(params: &BryantParams, n: usize) -> Result<SprayField> {
    finsler_spray(&bryant_metric(params, n))
}

/// `p = ¼ ln((1 + 2cos2α|x|² + |x|⁴)/(1 + 2|x|² + |x|⁴))`.
pub fn p_field(params: &BryantParams) -> ScalarField {
    let p = *params;
    ScalarField::new("bryant p", move |chart| {
        let t = dot(chart.x(), chart.x());
        let t2 = &t * &t;
        let num = (&t2 + &t.scale(2.0 * p.cos2)).add_scalar(1.0);
        let den = (&t2 + &t.scale(2.0)).add_scalar(1.0);
        Ok(num.try_div(&den)?.ln()?.scale(0.25))
    })
}

/// `q = ½ atan((|x|² + cos2α)/sin2α)`.
pub fn q_field(params: &BryantParams) -> ScalarField {
    let p = *params;
    ScalarField::new("bryant q", move |chart| {
        let t = dot(chart.x(), chart.x());
        Ok(t.add_scalar(p.cos2).scale(1.0 / p.sin2).atan().scale(0.5))
    })
}

pub fn pq_eval(params: &BryantParams, x: &[f64]) -> Result<(f64, f64)> {
    let zeros = vec![0.0; x.len()];
    Ok((
        p_field(params).value(x, &zeros)?,
        q_field(params).value(x, &zeros)?,
    ))
}

/// `r` and its first three u-derivatives at one abscissa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialValues {
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    pub d3r: f64,
}

/// Outcome of the step-refinement audit.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceAudit {
    /// Steps of the three coarse runs.
    pub steps: [f64; 3],
    /// `|r_h − r_{h/2}|` and `|r_{h/2} − r_{h/4}|` at `u_max`.
    pub differences: [f64; 2],
    /// `log₂` of the difference ratio; `None` when both differences are at
    /// roundoff level.
    pub observed_order: Option<f64>,
}

/// Differences below this are treated as roundoff in the convergence audit.
const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct OdeSolution {
    params: BryantParams,
    h: f64,
    r: Vec<f64>,
    dr: Vec<f64>,
    residual: Vec<f64>,
    convergence: ConvergenceAudit,
}

fn rk4(params: &BryantParams, u_max: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let h = u_max / steps as f64;
    let f = |u: f64, dr: f64| params.second_derivative(u, dr);
    let mut r = Vec::with_capacity(steps + 1);
    let mut dr = Vec::with_capacity(steps + 1);
    let (mut a, mut b) = (0.0, 0.0);
    r.push(a);
    dr.push(b);
    for i in 0..steps {
        let u = i as f64 * h;
        let (k1a, k1b) = (b, f(u, b));
        let (k2a, k2b) = (b + 0.5 * h * k1b, f(u + 0.5 * h, b + 0.5 * h * k1b));
        let (k3a, k3b) = (b + 0.5 * h * k2b, f(u + 0.5 * h, b + 0.5 * h * k2b));
        let (k4a, k4b) = (b + h * k3b, f(u + h, b + h * k3b));
        a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        r.push(a);
        dr.push(b);
    }
    (r, dr)
}

/// Fourth-order finite-difference derivative of nodal values `v` on a
/// uniform grid; `odd` extends `v` to negative nodes by `v(−u) = −v(u)`.
fn nodal_derivative(v: &[f64], h: f64, odd: bool) -> Vec<f64> {
    let n = v.len() - 1;
    let at = |i: isize| -> f64 {
        if i >= 0 {
            v[i as usize]
        } else if odd {
            -v[(-i) as usize]
        } else {
            v[(-i) as usize]
        }
    };
    (0..=n)
        .map(|i| {
            let ii = i as isize;
            if i + 2 <= n {
                (-at(ii + 2) + 8.0 * at(ii + 1) - 8.0 * at(ii - 1) + at(ii - 2)) / (12.0 * h)
            } else if i + 1 == n {
                (3.0 * at(ii + 1) + 10.0 * at(ii) - 18.0 * at(ii - 1) + 6.0 * at(ii - 2) - at(ii - 3))
                    / (12.0 * h)
            } else {
                (25.0 * at(ii) - 48.0 * at(ii - 1) + 36.0 * at(ii - 2) - 16.0 * at(ii - 3)
                    + 3.0 * at(ii - 4))
                    / (12.0 * h)
            }
        })
        .collect()
}

/// Integrate `(1+u²)r'' + 3u r' = sin2α/(2(1+2cos2α u²+u⁴))` from `r(0) = r'(0) = 0`
/// with classical RK4, then audit residuals and step refinement.
pub fn solve_dep(params: &BryantParams, u_max: f64, step: f64) -> Result<OdeSolution> {
    if !(u_max > 0.0 && u_max.is_finite()) || !(step > 0.0) {
        return Err(Error::invalid(format!(
            "need u_max > 0 and step > 0, got u_max = {u_max}, step = {step}"
        )));
    }
    let steps = ((u_max / step).round() as usize).max(8);
    let h = u_max / steps as f64;
    let (r, dr) = rk4(params, u_max, steps);
    let d2_fd = nodal_derivative(&dr, h, true);
    let residual = (0..=steps)
        .map(|i| {
            let u = i as f64 * h;
            ((1.0 + u * u) * d2_fd[i] + 3.0 * u * dr[i] - params.forcing(u)).abs()
        })
        .collect();

    let coarse = (steps / 32).max(8);
    let ends: Vec<f64> = [coarse, 2 * coarse, 4 * coarse]
        .iter()
        .map(|&m| *rk4(params, u_max, m).0.last().expect("non-empty"))
        .collect();
    let differences = [(ends[0] - ends[1]).abs(), (ends[1] - ends[2]).abs()];
    let observed_order = if differences[0] < ROUNDOFF_FLOOR && differences[1] < ROUNDOFF_FLOOR {
        None
    } else {
        Some((differences[0] / differences[1]).log2())
    };
    let convergence = ConvergenceAudit {
        steps: [
            u_max / coarse as f64,
            u_max / (2 * coarse) as f64,
            u_max / (4 * coarse) as f64,
        ],
        differences,
        observed_order,
    };
    if let Some(order) = observed_order {
        if !(3.5..=4.5).contains(&order) {
            return Err(Error::NonConvergent {
                observed_order: order,
                differences: differences.to_vec(),
            });
        }
    }
    Ok(OdeSolution {
        params: *params,
        h,
        r,
        dr,
        residual,
        convergence,
    })
}

impl OdeSolution {
    pub fn params(&self) -> &BryantParams {
        &self.params
    }

    pub fn u_max(&self) -> f64 {
        self.h * (self.r.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> usize {
        self.r.len()
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.r.len()).map(move |i| i as f64 * self.h)
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn dr(&self) -> &[f64] {
        &self.dr
    }

    /// `|(1+u²)r'' + 3u r' − rhs|` per node, with `r''` differentiated
    /// numerically from the nodal `r'`.
    pub fn residuals(&self) -> &[f64] {
        &self.residual
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn convergence(&self) -> &ConvergenceAudit {
        &self.convergence
    }

    /// Residual of the even extension `r(−u) = r(u)` on `[−u_max, u_max]`.
    pub fn reflected_residual(&self) -> f64 {
        let n = self.r.len() - 1;
        let full: Vec<f64> = (0..=2 * n)
            .map(|i| {
                if i >= n {
                    self.dr[i - n]
                } else {
                    -self.dr[n - i]
                }
            })
            .collect();
        // Interior central differences only; the ends are covered by `residuals`.
        let mut worst: f64 = 0.0;
        for i in 2..=2 * n - 2 {
            let u = (i as f64 - n as f64) * self.h;
            let d2 = (-full[i + 2] + 8.0 * full[i + 1] - 8.0 * full[i - 1] + full[i - 2])
                / (12.0 * self.h);
            let res = (1.0 + u * u) * d2 + 3.0 * u * full[i] - self.params.forcing(u);
            worst = worst.max(res.abs());
        }
        worst
    }

    /// `r` and derivatives at `u` by cubic Hermite interpolation of `(r, r')`
    /// and `(r', r'')`; higher derivatives come from the equation.
    pub fn eval(&self, u: f64) -> Result<RadialValues> {
        let u_max = self.u_max();
        if !(0.0..=u_max * (1.0 + 1e-12)).contains(&u) {
            return Err(Error::OutsideGrid { u, u_max });
        }
        let n = self.r.len() - 1;
        let i = ((u / self.h).floor() as usize).min(n - 1);
        let h = self.h;
        let t = (u - i as f64 * h) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let u0 = i as f64 * h;
        let u1 = u0 + h;
        let d2 = |k: usize, uk: f64| self.params.second_derivative(uk, self.dr[k]);
        let r = h00 * self.r[i] + h10 * h * self.dr[i] + h01 * self.r[i + 1] + h11 * h * self.dr[i + 1];
        let dr = h00 * self.dr[i] + h10 * h * d2(i, u0) + h01 * self.dr[i + 1] + h11 * h * d2(i + 1, u1);
        let d2r = self.params.second_derivative(u, dr);
        let d3r = (self.params.forcing_du(u) - 5.0 * u * d2r - 3.0 * dr) / (1.0 + u * u);
        Ok(RadialValues { r, dr, d2r, d3r })
    }

    /// `(dr/dt, d²r/dt²)` for `t = |x|² = 1/u²`.
    pub fn t_derivatives(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("t = {t} must be positive")));
        }
        let u = 1.0 / t.sqrt();
        let v = self.eval(u)?;
        let rt = -0.5 * u.powi(3) * v.dr;
        let rtt = 0.25 * (u.powi(6) * v.d2r + 3.0 * u.powi(5) * v.dr);
        Ok((rt, rtt))
    }

    /// `x ↦ r(|x|²)` as a field, valid for `|x| ≥ 1/u_max` and jet order ≤ 3.
    pub fn radial_field(&self) -> ScalarField {
        let sol = self.clone();
        ScalarField::new("bryant r(|x|^2)", move |chart| {
            if chart.order() > 3 {
                return Err(Error::invalid("the radial field carries at most third derivatives"));
            }
            let t = dot(chart.x(), chart.x());
            let u = t.sqrt()?.recip()?;
            let v = sol.eval(u.value())?;
            let h = u.add_scalar(-u.value());
            let series = [v.r, v.dr, v.d2r / 2.0, v.d3r / 6.0];
            Ok(h.compose_series(&series))
        })
    }

    /// Nodal table `(u, r, dr/du, residual)`.
    pub fn table(&self) -> Vec<[f64; 4]> {
        self.grid()
            .enumerate()
            .map(|(i, u)| [u, self.r[i], self.dr[i], self.residual[i]])
            .collect()
    }
}

/// `s(u) = u²(1+u²)² r'' + (3u³ + u)(u² + 1) r'`.
pub fn s_from_r(sol: &OdeSolution, u: f64) -> Result<f64> {
    let v = sol.eval(u)?;
    let u2 = u * u;
    Ok(u2 * (1.0 + u2).powi(2) * v.d2r + (3.0 * u2 * u + u) * (u2 + 1.0) * v.dr)
}

/// `s(t) = 4(1+t)² r''(t) + 4(1+t) r'(t)` with `t = |x|²`.
pub fn s_from_t(sol: &OdeSolution, t: f64) -> Result<f64> {
    let (rt, rtt) = sol.t_derivatives(t)?;
    Ok(4.0 * (1.0 + t).powi(2) * rtt + 4.0 * (1.0 + t) * rt)
}

/// Projective factor fitted from `G − G_ref = P y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveFit {
    pub p: f64,
    /// `max_i |ΔGⁱ − P yⁱ| / (1 + max_i |Gⁱ|)`.
    pub residual: f64,
}

/// Least-squares `P = ⟨ΔG, y⟩/|y|²`; errors when the residual exceeds
/// [`PROJECTIVE_FIT_TOL`].
pub fn extract_p(g: &SprayField, g_ref: &SprayField, x: &[f64], y: &[f64]) -> Result<ProjectiveFit> {
    let fit = fit_projective_factor(g, g_ref, x, y)?;
    if !(fit.residual <= PROJECTIVE_FIT_TOL) {
        return Err(Error::NotProjectivelyRelated {
            residual: fit.residual,
        });
    }
    Ok(fit)
}

/// The fit behind [`extract_p`] without the tolerance gate.
pub fn fit_projective_factor(
    g: &SprayField,
    g_ref: &SprayField,
    x: &[f64],
    y: &[f64],
) -> Result<ProjectiveFit> {
    crate::curvature::check_direction(y)?;
    let a = g.values(x, y)?;
    let b = g_ref.values(x, y)?;
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let p = a.iter().zip(&b).zip(y).map(|((ai, bi), yi)| (ai - bi) * yi).sum::<f64>() / yy;
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let worst = a
        .iter()
        .zip(&b)
        .zip(y)
        .fold(0.0_f64, |m, ((ai, bi), yi)| m.max((ai - bi - p * yi).abs()));
    Ok(ProjectiveFit {
        p,
        residual: worst / (1.0 + scale),
    })
}

/// Both sides of the relation and the normalized residual at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PRelation {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / (1 + |rhs|)`
    pub residual: f64,
}

/// Evaluate `[(P + dp)² + dq²][(F − dq)² − dq²] = (Hess r(y,y) + s g_S(y,y))²`
/// with `P` extracted from the Bryant and sphere sprays.
pub fn verify_p_relation(
    params: &BryantParams,
    sol: &OdeSolution,
    x: &[f64],
    y: &[f64],
) -> Result<PRelation> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if radius == 0.0 {
        return Err(Error::OutsideGrid {
            u: f64::INFINITY,
            u_max: sol.u_max(),
        });
    }
    let sphere = sphere_spray(n)?;
    let fit = extract_p(&bryant_spray(params, n)?, &sphere, x, y)?;

    let chart = JetChart::new(x, y, 1, None)?;
    let directional = |f: &ScalarField| -> Result<f64> {
        let j: Jet = f.eval(&chart)?;
        (0..n).try_fold(0.0, |acc, i| Ok(acc + j.d1(chart.x_var(i))? * y[i]))
    };
    let dp = directional(&p_field(params))?;
    let dq = directional(&q_field(params))?;
    let f = bryant_f(params).value(x, y)?;
    let hess = covariant_hessian(&sol.radial_field(), &sphere, x, y)?;
    let s = s_from_r(sol, 1.0 / radius)?;
    let g_s = sphere_metric(n)?.norm(&JetChart::point(x, y)?)?.value().powi(2);

    let lhs = ((fit.p + dp).powi(2) + dq * dq) * ((f - dq).powi(2) - dq * dq);
    let rhs = (hess + s * g_s).powi(2);
    Ok(PRelation {
        p: fit.p,
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / (1.0 + rhs.abs()),
    })
}

#[cfg(test)]
mod tests;
