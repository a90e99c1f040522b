//! Alternating forms with constant coefficients on an `n`-dimensional chart.
//!
//! A basis element `dx^{i₁}∧⋯∧dx^{i_p}` with `i₁ < ⋯ < i_p` is encoded as the
//! bitmask `Σ 2^{i_s}`; components of a `p`-form are stored in increasing
//! mask order over all masks of popcount `p`.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported chart dimension.
pub const MAX_FORM_DIM: usize = 16;

fn masks(n: usize, p: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == p).collect()
}

/// Sign of `dx^A ∧ dx^B` relative to `dx^{A∪B}`; zero when they overlap.
fn merge_sign(a: u32, b: u32) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        inversions += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, PartialEq)]
pub struct AltForm {
    dim: usize,
    degree: usize,
    masks: Vec<u32>,
    components: Vec<f64>,
}

impl fmt::Debug for AltForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AltForm(n = {}, p = {}) [", self.dim, self.degree)?;
        let mut first = true;
        for (idx, v) in self.iter().filter(|(_, v)| *v != 0.0) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<String> = idx.iter().map(|i| format!("dx{}", i + 1)).collect();
            write!(f, "{v}·{}", names.join("∧"))?;
        }
        write!(f, "]")
    }
}

impl AltForm {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_FORM_DIM {
            return Err(Error::invalid(format!("form dimension {dim} outside 1..={MAX_FORM_DIM}")));
        }
        if degree > dim {
            return Err(Error::invalid(format!("degree {degree} exceeds dimension {dim}")));
        }
        let masks = masks(dim, degree);
        let components = vec![0.0; masks.len()];
        Ok(AltForm {
            dim,
            degree,
            masks,
            components,
        })
    }

    /// `c · dx^{i₁}∧⋯∧dx^{i_p}` for arbitrary (not necessarily sorted) indices.
    pub fn monomial(dim: usize, indices: &[usize], c: f64) -> Result<Self> {
        let mut form = AltForm::zero(dim, indices.len())?;
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &i in indices {
            if i >= dim {
                return Err(Error::invalid(format!("index {i} out of range for n = {dim}")));
            }
            let bit = 1u32 << i;
            sign *= merge_sign(mask, bit);
            mask |= bit;
        }
        if sign != 0.0 {
            let slot = form.slot(mask).expect("mask has the form's degree");
            form.components[slot] = sign * c;
        }
        Ok(form)
    }

    /// Coefficients from a function of the increasing index tuple.
    pub fn from_fn(dim: usize, degree: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut form = AltForm::zero(dim, degree)?;
        let mut idx = Vec::with_capacity(degree);
        for (m, c) in form.masks.iter().zip(form.components.iter_mut()) {
            idx.clear();
            idx.extend((0..dim).filter(|i| m & (1 << i) != 0));
            *c = f(&idx);
        }
        Ok(form)
    }

    /// Form with components given in increasing-tuple order.
    pub fn from_components(dim: usize, degree: usize, components: Vec<f64>) -> Result<Self> {
        let mut form = AltForm::zero(dim, degree)?;
        if components.len() != form.components.len() {
            return Err(Error::DimensionMismatch {
                expected: form.components.len(),
                got: components.len(),
            });
        }
        form.components = components;
        Ok(form)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    fn slot(&self, mask: u32) -> Option<usize> {
        self.masks.binary_search(&mask).ok()
    }

    /// Coefficient on `dx^{i₁}∧⋯∧dx^{i_p}`, signed for unsorted indices.
    pub fn get(&self, indices: &[usize]) -> f64 {
        if indices.len() != self.degree {
            return 0.0;
        }
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &i in indices {
            let bit = 1u32 << i;
            sign *= merge_sign(mask, bit);
            mask |= bit;
        }
        if sign == 0.0 {
            return 0.0;
        }
        self.slot(mask).map_or(0.0, |s| sign * self.components[s])
    }

    /// `(increasing index tuple, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.masks.iter().zip(&self.components).map(|(&m, &v)| {
            let idx = (0..self.dim).filter(|i| m & (1 << i) != 0).collect();
            (idx, v)
        })
    }

    fn check_same(&self, other: &AltForm) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::invalid(format!(
                "incompatible forms: ({}, {}) vs ({}, {})",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &AltForm) -> Result<AltForm> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        Ok(out)
    }

    pub fn sub(&self, other: &AltForm) -> Result<AltForm> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        Ok(out)
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &AltForm, s: f64) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            *a += s * b;
        }
    }

    pub fn scale(&self, s: f64) -> AltForm {
        let mut out = self.clone();
        out.components.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn wedge(&self, other: &AltForm) -> Result<AltForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = AltForm::zero(self.dim, self.degree + other.degree)?;
        for (&ma, &a) in self.masks.iter().zip(&self.components) {
            if a == 0.0 {
                continue;
            }
            for (&mb, &b) in other.masks.iter().zip(&other.components) {
                let sign = merge_sign(ma, mb);
                if sign == 0.0 || b == 0.0 {
                    continue;
                }
                let slot = out.slot(ma | mb).expect("degrees add");
                out.components[slot] += sign * a * b;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &AltForm) -> f64 {
        if self.dim != other.dim || self.degree != other.degree {
            return f64::INFINITY;
        }
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// An `n × n` matrix of 2-forms; `get(i, j)` is `Ω_j^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix {
    n: usize,
    entries: Vec<AltForm>,
}

impl FormMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        let z = AltForm::zero(n, 2)?;
        Ok(FormMatrix {
            n,
            entries: vec![z; n * n],
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> AltForm) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let e = f(i, j);
                if e.dim() != n || e.degree() != 2 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) is a {}-form on R^{}, expected a 2-form on R^{n}",
                        e.degree(),
                        e.dim()
                    )));
                }
                entries.push(e);
            }
        }
        Ok(FormMatrix { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &AltForm {
        &self.entries[i * self.n + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut AltForm {
        &mut self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> AltForm {
        let mut t = self.get(0, 0).scale(0.0);
        for i in 0..self.n {
            t.add_assign_scaled(self.get(i, i), 1.0);
        }
        t
    }

    /// `A Ω A⁻¹` for a constant invertible `A`.
    pub fn conjugate(&self, a: &DMatrix<f64>) -> Result<FormMatrix> {
        let n = self.n;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("conjugating matrix is singular"))?;
        let mut out = FormMatrix::zero(n)?;
        for i in 0..n {
            for j in 0..n {
                let target = out.get_mut(i, j);
                for p in 0..n {
                    for q in 0..n {
                        let c = a[(i, p)] * inv[(q, j)];
                        if c != 0.0 {
                            target.add_assign_scaled(&self.entries[p * n + q], c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max_abs()))
    }

    pub fn max_diff(&self, other: &FormMatrix) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_wedges() {
        let dx = |i| AltForm::monomial(4, &[i], 1.0).unwrap();
        let w12 = dx(0).wedge(&dx(1)).unwrap();
        assert_eq!(w12.get(&[0, 1]), 1.0);
        assert_eq!(w12.get(&[1, 0]), -1.0);
        assert_eq!(dx(0).wedge(&dx(0)).unwrap().max_abs(), 0.0);
        let w34 = dx(2).wedge(&dx(3)).unwrap();
        let top = w12.wedge(&w34).unwrap();
        assert_eq!(top.components(), &[1.0]);
        assert_eq!(w34.wedge(&w12).unwrap().components(), &[1.0]);
        let w21 = dx(1).wedge(&dx(0)).unwrap();
        assert_eq!(w21.add(&w12).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn monomial_sorts_with_sign() {
        let f = AltForm::monomial(5, &[3, 0, 2], 2.0).unwrap();
        // (3,0,2) -> (0,2,3) takes two transpositions
        assert_eq!(f.get(&[0, 2, 3]), 2.0);
        assert_eq!(AltForm::monomial(5, &[1, 1], 1.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn degree_overflow_is_rejected() {
        let a = AltForm::monomial(3, &[0, 1], 1.0).unwrap();
        assert!(a.wedge(&a).is_err());
        assert!(AltForm::zero(3, 4).is_err());
    }

    #[test]
    fn identity_conjugation_is_noop() {
        let mut m = FormMatrix::zero(3).unwrap();
        *m.get_mut(0, 2) = AltForm::monomial(3, &[0, 1], 1.5).unwrap();
        let c = m.conjugate(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(c, m);
    }
}
