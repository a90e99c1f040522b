use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{BlockCap, Jet, JetSpace, SpaceKey};

/// Coordinate jets `(x¹…xⁿ, y¹…yⁿ)` expanded at a point of the slit tangent
/// bundle.
///
/// Variables `0..n` are the chart coordinates and `n..2n` the fibre
/// coordinates. `x_cap` bounds the total `x`-degree carried; evaluators that
/// need more (to differentiate in `x` internally) ask for [`raised`] charts.
///
/// [`raised`]: JetChart::raised
#[derive(Clone, Debug)]
pub struct JetChart {
    x0: Vec<f64>,
    y0: Vec<f64>,
    order: usize,
    x_cap: Option<usize>,
    space: Arc<JetSpace>,
    x: Vec<Jet>,
    y: Vec<Jet>,
}

impl JetChart {
    pub fn new(x0: &[f64], y0: &[f64], order: usize, x_cap: Option<usize>) -> Result<Self> {
        let n = x0.len();
        if y0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y0.len(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("chart dimension must be positive"));
        }
        if x0.iter().chain(y0).any(|v| !v.is_finite()) {
            return Err(Error::invalid("chart point has non-finite entries"));
        }
        let space = JetSpace::get(SpaceKey {
            num_vars: 2 * n,
            order,
            cap: x_cap.map(|degree| BlockCap { vars: n, degree }),
        })?;
        let x = x0
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(&space, v, i))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let y = y0
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(&space, v, n + i))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(JetChart {
            x0: x0.to_vec(),
            y0: y0.to_vec(),
            order,
            x_cap,
            space,
            x,
            y,
        })
    }

    /// Plain values: an order-0 chart.
    pub fn point(x0: &[f64], y0: &[f64]) -> Result<Self> {
        JetChart::new(x0, y0, 0, None)
    }

    /// Same base point with `extra_order` more total order and `extra_cap`
    /// more `x`-degree.
    pub fn raised(&self, extra_order: usize, extra_cap: usize) -> Result<Self> {
        JetChart::new(
            &self.x0,
            &self.y0,
            self.order + extra_order,
            self.x_cap.map(|c| c + extra_cap),
        )
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn x_cap(&self) -> Option<usize> {
        self.x_cap
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn x(&self) -> &[Jet] {
        &self.x
    }

    pub fn y(&self) -> &[Jet] {
        &self.y
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn constant(&self, value: f64) -> Jet {
        Jet::constant(&self.space, value)
    }

    /// Jet variable index of `x^i`.
    pub fn x_var(&self, i: usize) -> usize {
        i
    }

    /// Jet variable index of `y^i`.
    pub fn y_var(&self, i: usize) -> usize {
        self.dim() + i
    }
}

/// `Σ aᵢbᵢ` over jets.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = &a[0] * &b[0];
    for (u, v) in a.iter().zip(b).skip(1) {
        acc += &(u * v);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_are_laid_out_x_then_y() {
        let c = JetChart::new(&[1.0, 2.0], &[3.0, 4.0], 1, None).unwrap();
        assert_eq!(c.y()[1].value(), 4.0);
        assert_eq!(c.y()[1].d1(c.y_var(1)).unwrap(), 1.0);
        assert_eq!(c.x()[0].d1(c.y_var(0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_mismatched_point() {
        assert!(JetChart::new(&[1.0], &[1.0, 2.0], 1, None).is_err());
        assert!(JetChart::new(&[f64::NAN], &[1.0], 1, None).is_err());
    }

    #[test]
    fn raised_chart_keeps_base_point() {
        let c = JetChart::new(&[0.5], &[1.0], 2, Some(1)).unwrap();
        let r = c.raised(2, 1).unwrap();
        assert_eq!(r.order(), 4);
        assert_eq!(r.x_cap(), Some(2));
        assert_eq!(r.x0(), c.x0());
    }
}
