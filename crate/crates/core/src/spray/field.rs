use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;

use super::chart::JetChart;
use super::linalg;

pub type ScalarEval = dyn Fn(&JetChart) -> Result<Jet> + Send + Sync;
pub type SprayEval = dyn Fn(&JetChart) -> Result<Vec<Jet>> + Send + Sync;
pub type MatrixEval = dyn Fn(&JetChart) -> Result<Vec<Vec<Jet>>> + Send + Sync;

/// A jet-capable function on the chart (or on the slit tangent bundle).
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    eval: Arc<ScalarEval>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

impl ScalarField {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&JetChart) -> Result<Jet> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn constant(value: f64) -> Self {
        ScalarField::new(format!("const({value})"), move |c| Ok(c.constant(value)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, chart: &JetChart) -> Result<Jet> {
        (self.eval)(chart)
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.eval(&JetChart::point(x, y)?)?.value())
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        let inner = self.clone();
        ScalarField::new(format!("{s}*{}", self.label), move |c| {
            Ok(inner.eval(c)?.scale(s))
        })
    }
}

/// Spray coefficients `G^i(x, y)` as jets.
#[derive(Clone)]
pub struct SprayField {
    dim: usize,
    label: String,
    eval: Arc<SprayEval>,
}

impl fmt::Debug for SprayField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SprayField({}, n = {})", self.label, self.dim)
    }
}

impl SprayField {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        eval: impl Fn(&JetChart) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        SprayField {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coefficients(&self, chart: &JetChart) -> Result<Vec<Jet>> {
        if chart.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: chart.dim(),
            });
        }
        let g = (self.eval)(chart)?;
        if g.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.len(),
            });
        }
        Ok(g)
    }

    pub fn values(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .coefficients(&JetChart::point(x, y)?)?
            .iter()
            .map(Jet::value)
            .collect())
    }
}

#[derive(Clone)]
pub enum MetricKind {
    /// `g_ij(x)`.
    Riemannian(Arc<MatrixEval>),
    /// `F(x, y)`, positively 1-homogeneous in `y`.
    Finsler(ScalarField),
}

#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    label: String,
    kind: MetricKind,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MetricKind::Riemannian(_) => "Riemannian",
            MetricKind::Finsler(_) => "Finsler",
        };
        write!(f, "MetricField({kind} {}, n = {})", self.label, self.dim)
    }
}

impl MetricField {
    pub fn riemannian(
        dim: usize,
        label: impl Into<String>,
        g: impl Fn(&JetChart) -> Result<Vec<Vec<Jet>>> + Send + Sync + 'static,
    ) -> Self {
        MetricField {
            dim,
            label: label.into(),
            kind: MetricKind::Riemannian(Arc::new(g)),
        }
    }

    pub fn finsler(dim: usize, label: impl Into<String>, norm: ScalarField) -> Self {
        MetricField {
            dim,
            label: label.into(),
            kind: MetricKind::Finsler(norm),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Riemannian metric matrix `g_ij(x)` as jets.
    pub fn matrix(&self, chart: &JetChart) -> Result<Vec<Vec<Jet>>> {
        match &self.kind {
            MetricKind::Riemannian(g) => g(chart),
            MetricKind::Finsler(_) => Err(Error::invalid(format!(
                "metric {} is Finsler; it has no y-independent matrix",
                self.label
            ))),
        }
    }

    /// `F(x, y)` as a jet. Riemannian metrics give `√(g_ij yⁱ yʲ)`.
    pub fn norm(&self, chart: &JetChart) -> Result<Jet> {
        match &self.kind {
            MetricKind::Finsler(f) => f.eval(chart),
            MetricKind::Riemannian(g) => {
                let g = g(chart)?;
                Ok(quadratic_form(&g, chart.y()).sqrt()?)
            }
        }
    }

    /// The same metric viewed as a Finsler norm.
    pub fn as_finsler(&self) -> MetricField {
        match &self.kind {
            MetricKind::Finsler(_) => self.clone(),
            MetricKind::Riemannian(_) => {
                let me = self.clone();
                MetricField::finsler(
                    self.dim,
                    format!("norm({})", self.label),
                    ScalarField::new(format!("norm({})", self.label), move |c| me.norm(c)),
                )
            }
        }
    }

    /// Fundamental tensor `g_ij(x, y) = ½ [F²]_{yⁱyʲ}` at a point.
    pub fn fundamental_tensor(&self, x: &[f64], y: &[f64]) -> Result<Vec<Vec<f64>>> {
        match &self.kind {
            MetricKind::Riemannian(g) => Ok(g(&JetChart::point(x, y)?)?
                .iter()
                .map(|row| row.iter().map(Jet::value).collect())
                .collect()),
            MetricKind::Finsler(f) => {
                let chart = JetChart::new(x, y, 2, Some(0))?;
                let f = f.eval(&chart)?;
                let l = &f * &f;
                let n = self.dim;
                let mut g = vec![vec![0.0; n]; n];
                for (i, row) in g.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = 0.5 * l.d2(chart.y_var(i), chart.y_var(j))?;
                    }
                }
                Ok(g)
            }
        }
    }

    /// Smallest eigenvalue of the fundamental tensor at a point.
    pub fn min_eigenvalue(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let g = self.fundamental_tensor(x, y)?;
        let n = g.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j]);
        Ok(linalg::eigen_extremes(&m).0)
    }
}

/// `g_ij vⁱ vʲ`.
pub fn quadratic_form(g: &[Vec<Jet>], v: &[Jet]) -> Jet {
    let mut acc: Option<Jet> = None;
    for (i, row) in g.iter().enumerate() {
        let gv = super::chart::dot(row, v);
        let term = &gv * &v[i];
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.expect("non-empty metric")
}

/// `dV = σ(x) dx¹∧…∧dxⁿ`.
#[derive(Clone, Debug)]
pub struct VolumeForm {
    dim: usize,
    sigma: ScalarField,
}

impl VolumeForm {
    pub fn new(dim: usize, sigma: ScalarField) -> Self {
        VolumeForm { dim, sigma }
    }

    /// `σ ≡ 1`.
    pub fn euclidean(dim: usize) -> Self {
        VolumeForm::new(dim, ScalarField::constant(1.0))
    }

    /// `σ = exp(⟨c, x⟩)`.
    pub fn exponential(c: Vec<f64>) -> Self {
        let dim = c.len();
        VolumeForm::new(
            dim,
            ScalarField::new(format!("exp(<{c:?}, x>)"), move |chart| {
                let mut acc = chart.constant(0.0);
                for (ci, xi) in c.iter().zip(chart.x()) {
                    acc += &xi.scale(*ci);
                }
                Ok(acc.exp())
            }),
        )
    }

    /// `σ = √det g` for a Riemannian metric.
    pub fn riemannian(metric: &MetricField) -> Result<Self> {
        if !matches!(metric.kind(), MetricKind::Riemannian(_)) {
            return Err(Error::invalid("Riemannian volume needs a Riemannian metric"));
        }
        let m = metric.clone();
        Ok(VolumeForm::new(
            metric.dim(),
            ScalarField::new(format!("sqrt(det {})", metric.label()), move |c| {
                Ok(linalg::determinant(&m.matrix(c)?)?.sqrt()?)
            }),
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        self.sigma.label()
    }

    pub fn density(&self) -> &ScalarField {
        &self.sigma
    }

    /// `ln σ` as a jet; fails where `σ ≤ 0`.
    pub fn log_density(&self, chart: &JetChart) -> Result<Jet> {
        let s = self.sigma.eval(chart)?;
        if !(s.value() > 0.0) {
            return Err(Error::NonPositiveVolume {
                point: chart.x0().to_vec(),
                value: s.value(),
            });
        }
        Ok(s.ln()?)
    }
}
