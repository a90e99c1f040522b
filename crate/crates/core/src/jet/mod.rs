//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores `c_α = ∂^α f(x₀) / α!` for every monomial carried by its
//! [`JetSpace`], so products are plain coefficient convolutions and any
//! partial derivative up to the truncation order is read off exactly. All
//! derivatives used by the curvature code come from here.

mod multi_index;
pub(crate) mod series;
mod space;

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use thiserror::Error;

pub use multi_index::MultiIndex;
pub use space::{full_len, BlockCap, JetSpace, SpaceKey, MAX_ORDER, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets over {left} and {right} variables cannot be combined")]
    VariableMismatch { left: usize, right: usize },
    #[error("jets with different block layouts cannot be combined")]
    BlockMismatch,
    #[error("variable index {index} out of range for {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("{0} variables exceeds the supported maximum of {MAX_VARS}")]
    TooManyVariables(usize),
    #[error("truncation order {0} exceeds the supported maximum of {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error("no derivative order left to differentiate in variable {var}")]
    OrderExhausted { var: usize },
    #[error("partial {index} is not carried by a jet of order {order}")]
    NotCarried { index: String, order: usize },
    #[error("{op} undefined for constant term {constant}")]
    Domain { op: &'static str, constant: f64 },
    #[error("{op} needs a second operand")]
    MissingOperand { op: &'static str },
}

/// Operation selector for [`Jet::compose`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Ln,
    Exp,
    Atan,
    PowInt(i32),
}

#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

/// Seed the jet of a constant (`var_index = None`) or of the coordinate
/// `x ↦ x[var_index]`, expanded at `base` with `m` variables to order `d`.
pub fn jet_seed(
    base: &[f64],
    var_index: Option<usize>,
    m: usize,
    d: usize,
) -> Result<Jet, JetError> {
    let space = JetSpace::full(m, d)?;
    match var_index {
        None => {
            let value = base.first().copied().unwrap_or(0.0);
            Ok(Jet::constant(&space, value))
        }
        Some(v) => {
            if v >= m {
                return Err(JetError::VariableOutOfRange {
                    index: v,
                    num_vars: m,
                });
            }
            if base.len() != m {
                return Err(JetError::VariableMismatch {
                    left: base.len(),
                    right: m,
                });
            }
            Jet::variable(&space, base[v], v)
        }
    }
}

/// `∂^α f` at the expansion point.
pub fn extract_partial(j: &Jet, alpha: &MultiIndex) -> Result<f64, JetError> {
    j.partial(alpha)
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// Coordinate function `var` with value `value` at the expansion point.
    pub fn variable(space: &Arc<JetSpace>, value: f64, var: usize) -> Result<Jet, JetError> {
        let m = space.num_vars();
        if var >= m {
            return Err(JetError::VariableOutOfRange {
                index: var,
                num_vars: m,
            });
        }
        let mut jet = Jet::constant(space, value);
        let unit = MultiIndex::unit(m, var);
        if let Some(i) = space.index_of(unit.exponents()) {
            jet.coeffs[i] = 1.0;
        }
        Ok(jet)
    }

    /// Build a jet from raw Taylor coefficients in the space's flat order.
    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        if coeffs.len() != space.len() {
            return Err(JetError::VariableMismatch {
                left: coeffs.len(),
                right: space.len(),
            });
        }
        Ok(Jet {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn num_vars(&self) -> usize {
        self.space.num_vars()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Function value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `c_α`. Monomials the space does not carry are an
    /// error, not zero: they were truncated, not computed.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64, JetError> {
        self.space
            .index_of(alpha.exponents())
            .map(|i| self.coeffs[i])
            .ok_or_else(|| JetError::NotCarried {
                index: alpha.to_string(),
                order: self.order(),
            })
    }

    /// `∂^α f = α! c_α`.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<f64, JetError> {
        if alpha.num_vars() != self.num_vars() {
            return Err(JetError::VariableMismatch {
                left: alpha.num_vars(),
                right: self.num_vars(),
            });
        }
        Ok(alpha.factorial() * self.coeff(alpha)?)
    }

    /// First partial in `var`, i.e. `∂f/∂x_var` at the expansion point.
    pub fn d1(&self, var: usize) -> Result<f64, JetError> {
        self.partial(&MultiIndex::unit(self.num_vars(), var))
    }

    /// Second partial in `a`, `b`.
    pub fn d2(&self, a: usize, b: usize) -> Result<f64, JetError> {
        self.partial(&MultiIndex::from_vars(self.num_vars(), &[a, b]))
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        let (target, map) = self.space.derivative_map(var)?;
        let coeffs = map
            .1
            .iter()
            .map(|&(src, factor)| self.coeffs[src as usize] * factor)
            .collect();
        Ok(Jet {
            space: target,
            coeffs,
        })
    }

    /// Restrict to a space carried by this one.
    pub fn project(&self, target: &Arc<JetSpace>) -> Result<Jet, JetError> {
        if Arc::ptr_eq(&self.space, target) {
            return Ok(self.clone());
        }
        if !self.space.contains(target) {
            return Err(JetError::NotCarried {
                index: format!("{:?}", target.key()),
                order: self.order(),
            });
        }
        let map = self.space.projection(target);
        Ok(Jet {
            space: target.clone(),
            coeffs: map.iter().map(|&i| self.coeffs[i as usize]).collect(),
        })
    }

    /// Lower the total truncation order.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        if order >= self.order() {
            return Ok(self.clone());
        }
        let key = SpaceKey {
            order,
            ..self.space.key()
        };
        self.project(&JetSpace::get(key)?)
    }

    fn common(&self, other: &Jet) -> Result<(Jet, Jet), JetError> {
        let key = self.space.key().meet(other.space.key())?;
        let space = JetSpace::get(key)?;
        Ok((self.project(&space)?, other.project(&space)?))
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet, JetError> {
        if Arc::ptr_eq(&self.space, &other.space) {
            return Ok(Jet {
                space: self.space.clone(),
                coeffs: self
                    .coeffs
                    .iter()
                    .zip(&other.coeffs)
                    .map(|(&a, &b)| f(a, b))
                    .collect(),
            });
        }
        let (a, b) = self.common(other)?;
        a.zip(&b, f)
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            let (a, b) = self.common(other)?;
            return a.try_mul(&b);
        }
        // Iterate over the sparser factor.
        let nnz = |c: &[f64]| c.iter().filter(|&&v| v != 0.0).count();
        let (a, b) = if nnz(&self.coeffs) <= nnz(&other.coeffs) {
            (self, other)
        } else {
            (other, self)
        };
        let space = &self.space;
        let mut out = vec![0.0; space.len()];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for &(j, k) in space.products(i) {
                out[k as usize] += ai * b.coeffs[j as usize];
            }
        }
        Ok(Jet {
            space: space.clone(),
            coeffs: out,
        })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `Σ c_k (f − f(x₀))^k` by Horner's rule.
    pub fn compose_series(&self, coeffs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = coeffs.len().min(self.order() + 1);
        if top == 0 {
            return Jet::zero(&self.space);
        }
        let mut acc = Jet::constant(&self.space, coeffs[top - 1]);
        for &c in coeffs[..top - 1].iter().rev() {
            acc = (&acc * &h).add_scalar(c);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if a0 == 0.0 || !a0.is_finite() {
            return Err(JetError::Domain {
                op: "division",
                constant: a0,
            });
        }
        Ok(self.compose_series(&series::recip(a0, self.order())))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(JetError::Domain {
                op: "sqrt",
                constant: a0,
            });
        }
        Ok(self.compose_series(&series::sqrt(a0, self.order())))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(JetError::Domain {
                op: "ln",
                constant: a0,
            });
        }
        Ok(self.compose_series(&series::ln(a0, self.order())))
    }

    pub fn exp(&self) -> Jet {
        self.compose_series(&series::exp(self.value(), self.order()))
    }

    pub fn atan(&self) -> Jet {
        self.compose_series(&series::atan(self.value(), self.order()))
    }

    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn compose(op: JetOp, a: &Jet, b: Option<&Jet>) -> Result<Jet, JetError> {
        let second = |name| b.ok_or(JetError::MissingOperand { op: name });
        match op {
            JetOp::Add => a.try_add(second("add")?),
            JetOp::Sub => a.try_sub(second("sub")?),
            JetOp::Mul => a.try_mul(second("mul")?),
            JetOp::Div => a.try_div(second("div")?),
            JetOp::Sqrt => a.sqrt(),
            JetOp::Ln => a.ln(),
            JetOp::Exp => Ok(a.exp()),
            JetOp::Atan => Ok(a.atan()),
            JetOp::PowInt(n) => a.powi(n),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            /// Panics if the operands live over different variable sets.
            fn $method(self, rhs: &Jet) -> Jet {
                self.$try(rhs).expect("incompatible jet operands")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_scalar(-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if Arc::ptr_eq(&self.space, &rhs.space) {
            self.coeffs
                .iter_mut()
                .zip(&rhs.coeffs)
                .for_each(|(a, b)| *a += b);
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if Arc::ptr_eq(&self.space, &rhs.space) {
            self.coeffs
                .iter_mut()
                .zip(&rhs.coeffs)
                .for_each(|(a, b)| *a -= b);
        } else {
            *self = &*self - rhs;
        }
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a>(jets: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut iter = jets.into_iter();
    let mut acc = iter.next()?.clone();
    for j in iter {
        acc += j;
    }
    Some(acc)
}
