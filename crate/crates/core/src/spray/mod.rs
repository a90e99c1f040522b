//! Sprays, metrics and volume forms on an `n`-dimensional chart, and the
//! constructors for every example family used by the checks.

mod chart;
mod field;
pub mod linalg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::Jet;

pub use chart::{dot, JetChart};
pub use field::{quadratic_form, MetricField, MetricKind, ScalarField, SprayField, VolumeForm};

fn require_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::invalid(format!(
            "dimension {n} is below the minimum {min}"
        )));
    }
    Ok(())
}

/// `G^i ≡ 0`.
pub fn flat_spray(n: usize) -> Result<SprayField> {
    require_dim(n, 2)?;
    Ok(SprayField::new(n, "flat", move |c| {
        Ok(vec![c.constant(0.0); n])
    }))
}

/// Geodesic spray `G^i = ½ Γ^i_{jk}(x) yʲ yᵏ` of a Riemannian metric.
pub fn riemannian_spray(metric: &MetricField) -> Result<SprayField> {
    if !matches!(metric.kind(), MetricKind::Riemannian(_)) {
        return Err(Error::invalid(format!(
            "{} is not Riemannian; use finsler_spray",
            metric.label()
        )));
    }
    let n = metric.dim();
    let m = metric.clone();
    Ok(SprayField::new(
        n,
        format!("riemannian({})", metric.label()),
        move |chart| {
            let hi = chart.raised(1, 1)?;
            let g_hi = m.matrix(&hi)?;
            // dg[k][i][j] = ∂_k g_ij
            let mut dg = Vec::with_capacity(n);
            for k in 0..n {
                let mut dk = Vec::with_capacity(n);
                for row in &g_hi {
                    dk.push(
                        row.iter()
                            .map(|gij| gij.derivative(hi.x_var(k)))
                            .collect::<std::result::Result<Vec<_>, _>>()?,
                    );
                }
                dg.push(dk);
            }
            let y = chart.y();
            // v_l = ½ Γ_{l jk} yʲ yᵏ with Γ_{ljk} = ½(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)
            // which simplifies to v_l = ½ (2 ∂_j g_lk − ∂_l g_jk) yʲ yᵏ / 2.
            let mut v = Vec::with_capacity(n);
            for l in 0..n {
                let mut acc = chart.constant(0.0);
                for j in 0..n {
                    for k in 0..n {
                        let coef = dg[j][l][k].scale(2.0) - &dg[l][j][k];
                        acc += &(&(&coef * &y[j]) * &y[k]);
                    }
                }
                v.push(acc.scale(0.25));
            }
            let g: Vec<Vec<Jet>> = g_hi
                .iter()
                .map(|row| row.iter().map(|e| e.truncate(chart.order())))
                .map(|row| row.collect::<std::result::Result<Vec<_>, _>>())
                .collect::<std::result::Result<_, _>>()?;
            linalg::solve_vec(&g, &v, "Riemannian metric")
        },
    ))
}

/// Geodesic spray of a Finsler norm:
/// `G^i = ¼ g^{il}([F²]_{xᵐyˡ} yᵐ − [F²]_{xˡ})`.
pub fn finsler_spray(metric: &MetricField) -> Result<SprayField> {
    let n = metric.dim();
    let m = metric.as_finsler();
    Ok(SprayField::new(
        n,
        format!("finsler({})", metric.label()),
        move |chart| {
            let hi = chart.raised(2, 1)?;
            let f = m.norm(&hi)?;
            let l = &f * &f;
            let ly: Vec<Jet> = (0..n)
                .map(|i| l.derivative(hi.y_var(i)))
                .collect::<std::result::Result<_, _>>()?;
            let mut g = Vec::with_capacity(n);
            for (k, lyk) in ly.iter().enumerate() {
                let row = (0..n)
                    .map(|j| Ok(lyk.derivative(hi.y_var(j))?.scale(0.5)))
                    .collect::<Result<Vec<_>>>()?;
                debug_assert_eq!(row.len(), n, "row {k}");
                g.push(row);
            }
            let y = chart.y();
            let mut rhs = Vec::with_capacity(n);
            for (lidx, lyl) in ly.iter().enumerate() {
                let mut acc = l.derivative(hi.x_var(lidx))?.scale(-1.0);
                for (mi, ym) in y.iter().enumerate() {
                    let lxy = lyl.derivative(hi.x_var(mi))?;
                    acc += &(&lxy * ym);
                }
                rhs.push(acc.scale(0.25));
            }
            let g = g
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|e| e.truncate(chart.order()))
                        .collect::<std::result::Result<Vec<_>, _>>()
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            linalg::solve_vec(&g, &rhs, "fundamental tensor")
        },
    ))
}

/// `G̃^i = G^i + P yⁱ` for a positively 1-homogeneous `P`.
pub fn projective_modify(spray: &SprayField, p: &ScalarField) -> SprayField {
    let base = spray.clone();
    let p = p.clone();
    SprayField::new(
        spray.dim(),
        format!("{} + ({})y", spray.label(), p.label()),
        move |chart| {
            let g = base.coefficients(chart)?;
            let pj = p.eval(chart)?;
            Ok(g
                .iter()
                .zip(chart.y())
                .map(|(gi, yi)| gi + &(&pj * yi))
                .collect())
        },
    )
}

/// `1 + |x|²` as a jet.
fn one_plus_x2(chart: &JetChart) -> Jet {
    dot(chart.x(), chart.x()).add_scalar(1.0)
}

/// Gnomonic-chart metric of the unit sphere,
/// `g_ij = ((1+|x|²)δ_ij − xᵢxⱼ)/(1+|x|²)²`.
pub fn sphere_metric(n: usize) -> Result<MetricField> {
    require_dim(n, 2)?;
    Ok(MetricField::riemannian(n, "sphere", move |chart| {
        let w = one_plus_x2(chart);
        let inv2 = w.powi(-2)?;
        let x = chart.x();
        let mut g = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut e = -(&x[i] * &x[j]);
                if i == j {
                    e += &w;
                }
                row.push(&e * &inv2);
            }
            g.push(row);
        }
        Ok(g)
    }))
}

/// `P₀(x, y) = −⟨x, y⟩/(1+|x|²)`.
pub fn sphere_factor() -> ScalarField {
    ScalarField::new("-<x,y>/(1+|x|^2)", |chart| {
        Ok(-(dot(chart.x(), chart.y()).try_div(&one_plus_x2(chart))?))
    })
}

/// Geodesic spray of the round sphere in the gnomonic chart, `G₀^i = P₀ yⁱ`.
pub fn sphere_spray(n: usize) -> Result<SprayField> {
    require_dim(n, 2)?;
    let p0 = sphere_factor();
    Ok(SprayField::new(n, "sphere", move |chart| {
        let p = p0.eval(chart)?;
        Ok(chart.y().iter().map(|yi| &p * yi).collect())
    }))
}

/// Covariant Hessian `∇²f(y, y) = yⁱyʲ∂ᵢ∂ⱼf − 2Gᵏ∂ₖf` of a chart function
/// with respect to the metric whose geodesic spray is `metric_spray`.
pub fn covariant_hessian(
    f: &ScalarField,
    metric_spray: &SprayField,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let chart = JetChart::new(x, y, 2, Some(2))?;
    let fj = f.eval(&chart)?;
    let g = metric_spray.values(x, y)?;
    let n = x.len();
    let mut h = 0.0;
    for i in 0..n {
        for j in 0..n {
            h += y[i] * y[j] * fj.d2(i, j)?;
        }
        h -= 2.0 * g[i] * fj.d1(i)?;
    }
    Ok(h)
}

/// Randers sphere `F = √(g_{Sⁿ}(y,y)) + ε df(y)` with its spray and the
/// predicted projective factor relative to the sphere spray.
#[derive(Clone, Debug)]
pub struct RandersSphere {
    pub metric: MetricField,
    pub spray: SprayField,
    pub potential: ScalarField,
    pub epsilon: f64,
    n: usize,
}

impl RandersSphere {
    /// `P = ε Hess f(y,y) / (2F(y))`.
    pub fn predicted_factor(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let sphere = sphere_spray(self.n)?;
        let hess = covariant_hessian(&self.potential, &sphere, x, y)?;
        let f = self.metric.norm(&JetChart::point(x, y)?)?.value();
        Ok(self.epsilon * hess / (2.0 * f))
    }

    /// `‖ε df‖` in the sphere metric; must stay below 1.
    pub fn one_form_norm(&self, x: &[f64]) -> Result<f64> {
        one_form_norm(&self.potential, self.epsilon, x)
    }
}

fn one_form_norm(f: &ScalarField, eps: f64, x: &[f64]) -> Result<f64> {
    let n = x.len();
    let zeros = vec![0.0; n];
    let chart = JetChart::new(x, &zeros, 1, None)?;
    let fj = f.eval(&chart)?;
    let df: Vec<f64> = (0..n)
        .map(|i| fj.d1(i).map(|v| eps * v))
        .collect::<std::result::Result<_, _>>()?;
    // Inverse gnomonic metric: (1+|x|²)(I + x xᵀ).
    let w = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
    let xd: f64 = x.iter().zip(&df).map(|(a, b)| a * b).sum();
    let dd: f64 = df.iter().map(|v| v * v).sum();
    Ok((w * (dd + xd * xd)).sqrt())
}

pub fn randers_sphere_spray(n: usize, f: &ScalarField, epsilon: f64) -> Result<RandersSphere> {
    require_dim(n, 2)?;
    let sphere = sphere_metric(n)?;
    let pot = f.clone();
    let norm = ScalarField::new(format!("randers({}, {epsilon})", f.label()), move |chart| {
        let beta_norm = one_form_norm(&pot, epsilon, chart.x0())?;
        if !(beta_norm < 1.0) {
            return Err(Error::RandersPositivity {
                point: chart.x0().to_vec(),
                norm: beta_norm,
            });
        }
        let alpha = sphere.norm(chart)?;
        let hi = chart.raised(1, 1)?;
        let fj = pot.eval(&hi)?;
        let mut beta = chart.constant(0.0);
        for (i, yi) in chart.y().iter().enumerate() {
            beta += &(&fj.derivative(hi.x_var(i))? * yi);
        }
        Ok(alpha + beta.scale(epsilon))
    });
    let metric = MetricField::finsler(n, format!("randers({})", f.label()), norm);
    let spray = finsler_spray(&metric)?;
    Ok(RandersSphere {
        metric,
        spray,
        potential: f.clone(),
        epsilon,
        n,
    })
}

/// `f = x¹/√(1+|x|²)`, the height function restricted to the gnomonic chart.
pub fn height_potential() -> ScalarField {
    ScalarField::new("x1/sqrt(1+|x|^2)", |chart| {
        Ok(chart.x()[0].try_div(&one_plus_x2(chart).sqrt()?)?)
    })
}

/// Berwald spray `G^i = ½ Γ^i_{jk}(x) yʲ yᵏ` with `Γ(x) = C + Σ_m L_m x^m`,
/// coefficients drawn from `seed`.
pub fn generic_berwald_spray(n: usize, seed: u64) -> Result<SprayField> {
    require_dim(n, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constant = vec![0.0; n * n * n];
    let mut linear = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let c: f64 = rng.random_range(-1.0..1.0);
                constant[(i * n + j) * n + k] = c;
                constant[(i * n + k) * n + j] = c;
                for m in 0..n {
                    let l: f64 = rng.random_range(-0.5..0.5);
                    linear[((i * n + j) * n + k) * n + m] = l;
                    linear[((i * n + k) * n + j) * n + m] = l;
                }
            }
        }
    }
    Ok(SprayField::new(n, format!("berwald-random({seed})"), move |chart| {
        let (x, y) = (chart.x(), chart.y());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = chart.constant(0.0);
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    let mut gamma = chart.constant(constant[idx]);
                    for (m, xm) in x.iter().enumerate() {
                        gamma += &xm.scale(linear[idx * n + m]);
                    }
                    acc += &(&(&gamma * &y[j]) * &y[k]);
                }
            }
            out.push(acc.scale(0.5));
        }
        Ok(out)
    }))
}

/// Euclidean length `|y|`.
pub fn euclidean_length() -> ScalarField {
    ScalarField::new("|y|", |chart| Ok(dot(chart.y(), chart.y()).sqrt()?))
}

/// Linear factor `⟨a, y⟩(1 + |x|²)`.
pub fn linear_factor(a: Vec<f64>) -> ScalarField {
    ScalarField::new(format!("<{a:?},y>(1+|x|^2)"), move |chart| {
        let mut acc = chart.constant(0.0);
        for (ai, yi) in a.iter().zip(chart.y()) {
            acc += &yi.scale(*ai);
        }
        Ok(&acc * &one_plus_x2(chart))
    })
}

/// `s √(|y|² + ⟨x, y⟩²)`.
pub fn twisted_length(s: f64) -> ScalarField {
    ScalarField::new(format!("{s}*sqrt(|y|^2+<x,y>^2)"), move |chart| {
        let xy = dot(chart.x(), chart.y());
        let q = dot(chart.y(), chart.y()) + &xy * &xy;
        Ok(q.sqrt()?.scale(s))
    })
}

/// Rotation-type factor `s (x¹y² − x²y¹)/(1+|x|²)`.
pub fn rotation_factor(s: f64) -> ScalarField {
    ScalarField::new(format!("{s}*(x1 y2 - x2 y1)/(1+|x|^2)"), move |chart| {
        let (x, y) = (chart.x(), chart.y());
        let num = &x[0] * &y[1] - &x[1] * &y[0];
        Ok(num.try_div(&one_plus_x2(chart))?.scale(s))
    })
}
