//! The curvature stack of a spray at a point `(x, y)`.
//!
//! Everything is read off one jet expansion of the spray coefficients. The
//! total order requested is the minimum each quantity needs: 2 for `N`/`Γ`,
//! 3 for `B`/`R⁴`/`χ`, 4 for `D`, the `1/3`-identity route and `W`. Hat sprays
//! raise their own order internally since `Ĝ` embeds `∂G/∂y`.

mod tensor;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::jet::{Jet, MultiIndex};
use crate::report::{Check, VerificationReport};
use crate::sampling::SampleSpec;
use crate::spray::{JetChart, ScalarField, SprayField, VolumeForm};

pub use tensor::{TensorValue, Valence};

/// Default relative tolerance; residuals are divided by `1 + scale`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Directions shorter than this are rejected.
pub const MIN_DIRECTION_NORM: f64 = 1e-9;
/// Spray coefficients are never differentiated twice in `x`.
const X_CAP: usize = 1;

pub(crate) fn check_direction(y: &[f64]) -> Result<()> {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm >= MIN_DIRECTION_NORM) {
        return Err(Error::DegenerateDirection(norm));
    }
    Ok(())
}

/// Spray coefficient jets at one point.
pub(crate) struct SprayJets {
    n: usize,
    chart: JetChart,
    g: Vec<Jet>,
}

impl SprayJets {
    pub(crate) fn evaluate(spray: &SprayField, x: &[f64], y: &[f64], order: usize) -> Result<Self> {
        check_direction(y)?;
        let chart = JetChart::new(x, y, order, Some(X_CAP))?;
        let g = spray.coefficients(&chart)?;
        Ok(SprayJets {
            n: spray.dim(),
            chart,
            g,
        })
    }

    fn idx(&self, xs: &[usize], ys: &[usize]) -> MultiIndex {
        let vars: Vec<usize> = xs
            .iter()
            .copied()
            .chain(ys.iter().map(|&v| self.n + v))
            .collect();
        MultiIndex::from_vars(2 * self.n, &vars)
    }

    /// `∂_{x^xs} ∂_{y^ys} G^i` at the base point.
    fn part(&self, i: usize, xs: &[usize], ys: &[usize]) -> Result<f64> {
        Ok(self.g[i].partial(&self.idx(xs, ys))?)
    }

    fn partial_of(&self, j: &Jet, xs: &[usize], ys: &[usize]) -> Result<f64> {
        Ok(j.partial(&self.idx(xs, ys))?)
    }

    fn dy(&self, j: &Jet, v: usize) -> Result<Jet> {
        Ok(j.derivative(self.n + v)?)
    }

    fn dx(&self, j: &Jet, v: usize) -> Result<Jet> {
        Ok(j.derivative(v)?)
    }

    fn y(&self) -> &[Jet] {
        self.chart.y()
    }

    fn y0(&self) -> &[f64] {
        self.chart.y0()
    }

    fn nonlinear_jets(&self) -> Result<Vec<Vec<Jet>>> {
        self.g
            .iter()
            .map(|gi| (0..self.n).map(|j| self.dy(gi, j)).collect())
            .collect()
    }

    /// Two-index Riemann curvature as jets, order `d − 2`:
    /// `Rⁱ_k = 2∂G/∂xᵏ − yʲ∂²G/∂xʲ∂yᵏ + 2Gʲ∂²G/∂yʲ∂yᵏ − ∂G/∂yʲ ∂Gʲ/∂yᵏ`.
    fn riemann_jets(&self, nl: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
        let n = self.n;
        let y = self.y();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                let mut acc = self.dx(&self.g[i], k)?.scale(2.0);
                let gamma_ik: Vec<Jet> = (0..n)
                    .map(|j| self.dy(&nl[i][j], k))
                    .collect::<Result<_>>()?;
                for j in 0..n {
                    acc -= &(&y[j] * &self.dx(&nl[i][k], j)?);
                    acc += &(&self.g[j] * &gamma_ik[j]).scale(2.0);
                    acc -= &(&nl[i][j] * &nl[j][k]);
                }
                row.push(acc);
            }
            out.push(row);
        }
        Ok(out)
    }

    fn connection(&self) -> Result<Connection> {
        let n = self.n;
        let nonlinear = TensorValue::try_from_fn("ud", n, |ix| self.part(ix[0], &[], &[ix[1]]))?;
        let gamma =
            TensorValue::try_from_fn("udd", n, |ix| self.part(ix[0], &[], &[ix[1], ix[2]]))?;
        Ok(Connection { nonlinear, gamma })
    }

    fn berwald(&self) -> Result<BerwaldPack> {
        let n = self.n;
        let berwald = TensorValue::try_from_fn("uddd", n, |ix| {
            self.part(ix[0], &[], &[ix[1], ix[2], ix[3]])
        })?;
        let mut mean = TensorValue::zeros("dd", n);
        // ∂E_jk/∂yˡ
        let mut mean_dy = vec![0.0; n * n * n];
        for j in 0..n {
            for k in 0..n {
                let mut e = 0.0;
                for m in 0..n {
                    e += berwald.get(&[m, m, j, k]);
                    for l in 0..n {
                        mean_dy[(j * n + k) * n + l] += 0.5 * self.part(m, &[], &[m, j, k, l])?;
                    }
                }
                mean.set(&[j, k], 0.5 * e);
            }
        }
        let y = self.y0();
        let c = 2.0 / (n as f64 + 1.0);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let douglas = TensorValue::from_fn("uddd", n, |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            berwald.get(ix)
                - c * (mean.get(&[j, k]) * delta(i, l)
                    + mean.get(&[j, l]) * delta(i, k)
                    + mean.get(&[k, l]) * delta(i, j)
                    + mean_dy[(j * n + k) * n + l] * y[i])
        });
        Ok(BerwaldPack {
            berwald,
            mean_berwald: mean,
            douglas,
        })
    }

    /// `Rⁱ_{j kl} = δΓⁱ_jl/δxᵏ − δΓⁱ_jk/δxˡ + Γⁱ_km Γᵐ_jl − Γⁱ_lm Γᵐ_jk`; order 3.
    fn riemann4(&self) -> Result<TensorValue> {
        let n = self.n;
        let nv = |m: usize, k: usize| self.part(m, &[], &[k]);
        let mut riemann4 = TensorValue::zeros("uddd", n);
        let gamma = |i: usize, j: usize, k: usize| self.part(i, &[], &[j, k]);
        let delta_gamma = |i: usize, j: usize, l: usize, k: usize| -> Result<f64> {
            let mut v = self.part(i, &[k], &[j, l])?;
            for m in 0..n {
                v -= nv(m, k)? * self.part(i, &[], &[j, l, m])?;
            }
            Ok(v)
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = delta_gamma(i, j, l, k)? - delta_gamma(i, j, k, l)?;
                        for m in 0..n {
                            v += gamma(i, k, m)? * gamma(m, j, l)?
                                - gamma(i, l, m)? * gamma(m, j, k)?;
                        }
                        riemann4.set(&[i, j, k, l], v);
                    }
                }
            }
        }
        Ok(riemann4)
    }

    fn riemann(&self) -> Result<RiemannPack> {
        let n = self.n;
        let nl = self.nonlinear_jets()?;
        let r2 = self.riemann_jets(&nl)?;
        let y = self.y0();
        let riemann4 = self.riemann4()?;

        let r2v = |i: usize, k: usize, ys: &[usize]| self.partial_of(&r2[i][k], &[], ys);
        let riemann = TensorValue::from_fn("ud", n, |ix| r2[ix[0]][ix[1]].value());

        let mut riemann4_alt = TensorValue::zeros("uddd", n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = (r2v(i, k, &[l, j])? - r2v(i, l, &[k, j])?) / 3.0;
                        riemann4_alt.set(&[i, j, k, l], v);
                    }
                }
            }
        }

        let inv = 1.0 / (n as f64 - 1.0);
        let mut trace = r2[0][0].clone();
        for m in 1..n {
            trace += &r2[m][m];
        }
        let scalar_jet = trace.scale(inv);
        let scalar = scalar_jet.value();
        let mut scalar_dy = TensorValue::zeros("d", n);
        let mut scalar_hessian = TensorValue::zeros("dd", n);
        for k in 0..n {
            scalar_dy.set(&[k], self.partial_of(&scalar_jet, &[], &[k])?);
            for j in 0..n {
                scalar_hessian.set(&[k, j], self.partial_of(&scalar_jet, &[], &[k, j])?);
            }
        }

        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let a = TensorValue::from_fn("ud", n, |ix| {
            riemann.get(ix) - scalar * delta(ix[0], ix[1])
        });
        // ∂A^m_k/∂y^m = R^m_{k·m} − R_{·k}
        let mut div_a = vec![0.0; n];
        for (k, d) in div_a.iter_mut().enumerate() {
            let mut v = -scalar_dy.get(&[k]);
            for m in 0..n {
                v += r2v(m, k, &[m])?;
            }
            *d = v;
        }
        let weyl = TensorValue::from_fn("ud", n, |ix| {
            a.get(ix) - div_a[ix[1]] * y[ix[0]] / (n as f64 + 1.0)
        });

        let yy: f64 = y.iter().map(|v| v * v).sum();
        let tau = TensorValue::from_fn("d", n, |ix| {
            -(0..n).map(|i| y[i] * a.get(&[i, ix[0]])).sum::<f64>() / yy
        });
        let mut tau_residual: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                tau_residual = tau_residual.max((a.get(&[i, k]) + tau.get(&[k]) * y[i]).abs());
            }
        }

        let mut chi = TensorValue::zeros("d", n);
        for k in 0..n {
            let mut v = 0.0;
            for m in 0..n {
                v += 2.0 * r2v(m, k, &[m])? + r2v(m, m, &[k])?;
            }
            chi.set(&[k], -v / 6.0);
        }

        Ok(RiemannPack {
            riemann,
            riemann4,
            riemann4_alt,
            scalar,
            scalar_dy,
            scalar_hessian,
            a,
            weyl,
            tau,
            tau_residual,
            chi_from_r: chi,
        })
    }

    /// `S = ∂Gᵐ/∂yᵐ − yᵐ ∂ₘ ln σ` as a jet of order `d − 1`.
    fn s_jet(&self, volume: &VolumeForm) -> Result<Jet> {
        if volume.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: volume.dim(),
            });
        }
        let hi = self.chart.raised(0, 1)?;
        let ln_sigma = volume.log_density(&hi)?;
        let y = self.y();
        let mut s = self.dy(&self.g[0], 0)?;
        for m in 1..self.n {
            s += &self.dy(&self.g[m], m)?;
        }
        for (m, ym) in y.iter().enumerate() {
            s -= &(ym * &self.dx(&ln_sigma, m)?);
        }
        Ok(s)
    }

    fn s_chi(&self, volume: &VolumeForm, chi_from_r: TensorValue) -> Result<SChiPack> {
        let n = self.n;
        let s = self.s_jet(volume)?;
        let y = self.y0();
        let sp = |xs: &[usize], ys: &[usize]| self.partial_of(&s, xs, ys);
        let nv = |m: usize, k: usize| self.part(m, &[], &[k]);
        let mut chi_from_s = TensorValue::zeros("d", n);
        for k in 0..n {
            // S_{·k|m} yᵐ
            let mut first = 0.0;
            for m in 0..n {
                let mut v = sp(&[m], &[k])?;
                for p in 0..n {
                    v -= nv(p, m)? * sp(&[], &[k, p])?;
                }
                first += v * y[m];
            }
            // Berwald connection term: Γᵖ_km yᵐ = Nᵖ_k
            for p in 0..n {
                first -= sp(&[], &[p])? * nv(p, k)?;
            }
            // S_{|k}
            let mut second = sp(&[k], &[])?;
            for p in 0..n {
                second -= nv(p, k)? * sp(&[], &[p])?;
            }
            chi_from_s.set(&[k], 0.5 * (first - second));
        }
        Ok(SChiPack {
            s: s.value(),
            chi_from_r,
            chi_from_s,
        })
    }
}

/// `Nⁱ_j = ∂Gⁱ/∂yʲ` and `Γⁱ_jk = ∂²Gⁱ/∂yʲ∂yᵏ`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub nonlinear: TensorValue,
    pub gamma: TensorValue,
}

/// Berwald curvature `B`, mean Berwald curvature `E` and Douglas curvature `D`.
#[derive(Clone, Debug)]
pub struct BerwaldPack {
    pub berwald: TensorValue,
    pub mean_berwald: TensorValue,
    pub douglas: TensorValue,
}

#[derive(Clone, Debug)]
pub struct RiemannPack {
    /// `Rⁱ_k`
    pub riemann: TensorValue,
    /// `Rⁱ_{j kl}` through `δΓ/δx`
    pub riemann4: TensorValue,
    /// `Rⁱ_{j kl} = ⅓(Rⁱ_{k·l·j} − Rⁱ_{l·k·j})`
    pub riemann4_alt: TensorValue,
    /// `R = Rᵐ_m/(n−1)`
    pub scalar: f64,
    /// `R_{·k}`
    pub scalar_dy: TensorValue,
    /// `R_{·k·j}`
    pub scalar_hessian: TensorValue,
    /// `Aⁱ_k = Rⁱ_k − Rδⁱ_k`
    pub a: TensorValue,
    /// Weyl tensor `Wⁱ_k`
    pub weyl: TensorValue,
    /// Least-squares fit of `Aⁱ_k = −τ_k yⁱ`.
    pub tau: TensorValue,
    pub tau_residual: f64,
    /// `χ_k = −⅙(2Rᵐ_{k·m} + Rᵐ_{m·k})`
    pub chi_from_r: TensorValue,
}

#[derive(Clone, Debug)]
pub struct SChiPack {
    pub s: f64,
    pub chi_from_r: TensorValue,
    /// `χ_k = ½(S_{·k|m}yᵐ − S_{|k})`
    pub chi_from_s: TensorValue,
}

/// Every tensor of the stack at one `(x, y)`.
#[derive(Clone, Debug)]
pub struct CurvaturePack {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub connection: Connection,
    pub berwald: BerwaldPack,
    pub riemann: RiemannPack,
    pub s_chi: SChiPack,
    /// `Rⁱ_k − (Rδⁱ_k − ½R_{·k}yⁱ) + 3/(n+1) χ_k yⁱ` with `χ` from `S`.
    pub weyl_via_chi: TensorValue,
    /// `Rⁱ_k − (Rδⁱ_k − ½R_{·k}yⁱ)`, the Weyl tensor when `S = 0`.
    pub weyl_s_free: TensorValue,
}

impl CurvaturePack {
    pub fn compute(spray: &SprayField, volume: &VolumeForm, x: &[f64], y: &[f64]) -> Result<Self> {
        let jets = SprayJets::evaluate(spray, x, y, 4)?;
        let connection = jets.connection()?;
        let berwald = jets.berwald()?;
        let riemann = jets.riemann()?;
        let s_chi = jets.s_chi(volume, riemann.chi_from_r.clone())?;
        let n = spray.dim();
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let weyl_s_free = TensorValue::from_fn("ud", n, |ix| {
            let (i, k) = (ix[0], ix[1]);
            riemann.riemann.get(ix)
                - (riemann.scalar * delta(i, k) - 0.5 * riemann.scalar_dy.get(&[k]) * y[i])
        });
        let weyl_via_chi = TensorValue::from_fn("ud", n, |ix| {
            weyl_s_free.get(ix) + 3.0 / (n as f64 + 1.0) * s_chi.chi_from_s.get(&[ix[1]]) * y[ix[0]]
        });
        Ok(CurvaturePack {
            x: x.to_vec(),
            y: y.to_vec(),
            connection,
            berwald,
            riemann,
            s_chi,
            weyl_via_chi,
            weyl_s_free,
        })
    }

    /// Named tensors for tabular export.
    pub fn tensors(&self) -> Vec<(&'static str, &TensorValue)> {
        vec![
            ("N", &self.connection.nonlinear),
            ("Gamma", &self.connection.gamma),
            ("B", &self.berwald.berwald),
            ("E", &self.berwald.mean_berwald),
            ("D", &self.berwald.douglas),
            ("R2", &self.riemann.riemann),
            ("R4", &self.riemann.riemann4),
            ("R4_alt", &self.riemann.riemann4_alt),
            ("R_dot", &self.riemann.scalar_dy),
            ("A", &self.riemann.a),
            ("W", &self.riemann.weyl),
            ("tau", &self.riemann.tau),
            ("chi_from_R", &self.s_chi.chi_from_r),
            ("chi_from_S", &self.s_chi.chi_from_s),
        ]
    }
}

pub fn connection_coeffs(spray: &SprayField, x: &[f64], y: &[f64]) -> Result<Connection> {
    SprayJets::evaluate(spray, x, y, 2)?.connection()
}

pub fn berwald_pack(spray: &SprayField, x: &[f64], y: &[f64]) -> Result<BerwaldPack> {
    if spray.dim() < 2 {
        return Err(Error::invalid("Douglas curvature needs n >= 2"));
    }
    SprayJets::evaluate(spray, x, y, 4)?.berwald()
}

pub fn riemann_pack(spray: &SprayField, x: &[f64], y: &[f64]) -> Result<RiemannPack> {
    SprayJets::evaluate(spray, x, y, 4)?.riemann()
}

pub fn s_chi_pack(
    spray: &SprayField,
    volume: &VolumeForm,
    x: &[f64],
    y: &[f64],
) -> Result<SChiPack> {
    let jets = SprayJets::evaluate(spray, x, y, 3)?;
    let n = spray.dim();
    // χ from R only needs R to first order in y.
    let nl = jets.nonlinear_jets()?;
    let r2 = jets.riemann_jets(&nl)?;
    let mut chi = TensorValue::zeros("d", n);
    for k in 0..n {
        let mut v = 0.0;
        for m in 0..n {
            v += 2.0 * jets.partial_of(&r2[m][k], &[], &[m])?
                + jets.partial_of(&r2[m][m], &[], &[k])?;
        }
        chi.set(&[k], -v / 6.0);
    }
    jets.s_chi(volume, chi)
}

/// `B` and `R⁴` from a single order-3 expansion.
pub(crate) fn berwald_and_riemann4(
    spray: &SprayField,
    x: &[f64],
    y: &[f64],
) -> Result<(TensorValue, TensorValue)> {
    let jets = SprayJets::evaluate(spray, x, y, 3)?;
    let n = spray.dim();
    let b = TensorValue::try_from_fn("uddd", n, |ix| {
        jets.part(ix[0], &[], &[ix[1], ix[2], ix[3]])
    })?;
    Ok((b, jets.riemann4()?))
}

/// `R_{·k·j}`, the y-Hessian of the scalar `R = Rᵐ_m/(n−1)`.
pub fn scalar_hessian(spray: &SprayField, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let jets = SprayJets::evaluate(spray, x, y, 4)?;
    let n = spray.dim();
    let nl = jets.nonlinear_jets()?;
    let r2 = jets.riemann_jets(&nl)?;
    let mut trace = r2[0][0].clone();
    for (m, row) in r2.iter().enumerate().skip(1) {
        trace += &row[m];
    }
    let scalar = trace.scale(1.0 / (n as f64 - 1.0));
    TensorValue::try_from_fn("dd", n, |ix| jets.partial_of(&scalar, &[], &[ix[0], ix[1]]))
}

/// S-curvature `S(x, y)` alone.
pub fn s_curvature(spray: &SprayField, volume: &VolumeForm, x: &[f64], y: &[f64]) -> Result<f64> {
    let jets = SprayJets::evaluate(spray, x, y, 1)?;
    Ok(jets.s_jet(volume)?.value())
}

/// `Ĝⁱ = Gⁱ − S/(n+1) yⁱ`, the projective change by the S-curvature.
pub fn hat_spray(spray: &SprayField, volume: &VolumeForm) -> Result<SprayField> {
    let n = spray.dim();
    if n < 2 {
        return Err(Error::invalid("hat spray needs n >= 2"));
    }
    if volume.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: volume.dim(),
        });
    }
    let base = spray.clone();
    let vol = volume.clone();
    let factor = ScalarField::new(format!("-S/(n+1) of {}", spray.label()), move |chart| {
        let hi = chart.raised(1, 0)?;
        let g = base.coefficients(&hi)?;
        let ln_sigma = vol.log_density(&hi.raised(0, 1)?)?;
        let mut s = g[0].derivative(hi.y_var(0))?;
        for (m, gm) in g.iter().enumerate().skip(1) {
            s += &gm.derivative(hi.y_var(m))?;
        }
        for (m, ym) in chart.y().iter().enumerate() {
            s -= &(ym * &ln_sigma.derivative(hi.x_var(m))?);
        }
        Ok(s.scale(-1.0 / (n as f64 + 1.0)))
    });
    let base = spray.clone();
    let label = format!("hat({}, {})", spray.label(), volume.label());
    Ok(SprayField::new(n, label, move |chart| {
        let hi = chart.raised(1, 0)?;
        let g = base.coefficients(&hi)?;
        let p = factor.eval(chart)?;
        g.iter()
            .zip(chart.y())
            .map(|(gi, yi)| Ok(gi.truncate(chart.order())? + &(&p * yi)))
            .collect()
    }))
}

/// `max|W| / (1 + max|R|)` and `max|D| / (1 + max|B|)` at one point.
pub fn flatness_residuals(spray: &SprayField, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let jets = SprayJets::evaluate(spray, x, y, 4)?;
    let r = jets.riemann()?;
    let b = jets.berwald()?;
    Ok((
        r.weyl.max_abs() / (1.0 + r.riemann.max_abs()),
        b.douglas.max_abs() / (1.0 + b.berwald.max_abs()),
    ))
}

/// Sampled `W = 0 ∧ D = 0` test; the characterization needs `n ≥ 3`.
pub fn projective_flatness_test(
    spray: &SprayField,
    spec: &SampleSpec,
    tolerance: f64,
) -> Result<VerificationReport> {
    let n = spray.dim();
    if n < 3 {
        return Err(Error::invalid(format!(
            "W = 0 and D = 0 characterize projective flatness only for n >= 3, got n = {n}"
        )));
    }
    let residuals: Vec<Result<(f64, f64)>> = spec
        .points(n)
        .par_iter()
        .map(|p| flatness_residuals(spray, &p.x, &p.y))
        .collect();
    let mut report = VerificationReport::new(json!({
        "spray": spray.label(),
        "dim": n,
        "seed": spec.seed,
        "samples": spec.count,
        "radius": spec.radius,
        "tolerance": tolerance,
    }));
    report.push(Check::from_samples(
        "weyl_vanishing",
        "lemma2.1:weyl",
        tolerance,
        residuals.iter().map(|r| r.clone().map(|v| v.0)),
    ));
    report.push(Check::from_samples(
        "douglas_vanishing",
        "lemma2.1:douglas",
        tolerance,
        residuals.into_iter().map(|r| r.map(|v| v.1)),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests;
