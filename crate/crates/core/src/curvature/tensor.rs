use serde::Serialize;

/// Index position of a tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Valence {
    Up,
    Down,
}

/// Real components at a fixed `(x, y)`, row-major over the slots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorValue {
    valence: Vec<Valence>,
    dim: usize,
    components: Vec<f64>,
}

impl TensorValue {
    /// Build from a valence string over `{u, d}`, e.g. `"uddd"`.
    pub fn from_fn(valence: &str, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let valence: Vec<Valence> = valence
            .chars()
            .map(|c| match c {
                'u' => Valence::Up,
                'd' => Valence::Down,
                other => panic!("unknown valence marker {other:?}"),
            })
            .collect();
        let rank = valence.len();
        let len = dim.pow(rank as u32);
        let mut components = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for _ in 0..len {
            components.push(f(&idx));
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < dim {
                    break;
                }
                idx[slot] = 0;
            }
        }
        TensorValue {
            valence,
            dim,
            components,
        }
    }

    /// Fallible variant of [`TensorValue::from_fn`].
    pub fn try_from_fn<E>(
        valence: &str,
        dim: usize,
        mut f: impl FnMut(&[usize]) -> Result<f64, E>,
    ) -> Result<Self, E> {
        let mut err = None;
        let t = TensorValue::from_fn(valence, dim, |ix| {
            if err.is_some() {
                return 0.0;
            }
            f(ix).unwrap_or_else(|e| {
                err = Some(e);
                0.0
            })
        });
        err.map_or(Ok(t), Err)
    }

    pub fn zeros(valence: &str, dim: usize) -> Self {
        TensorValue::from_fn(valence, dim, |_| 0.0)
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> &[Valence] {
        &self.valence
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "index rank mismatch");
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.components[o] = value;
    }

    /// Iterate `(multi-index, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let rank = self.rank();
        let dim = self.dim;
        self.components.iter().enumerate().map(move |(mut o, &v)| {
            let mut idx = vec![0; rank];
            for slot in (0..rank).rev() {
                idx[slot] = o % dim;
                o /= dim;
            }
            (idx, v)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self − other|`; shapes must agree.
    pub fn max_diff(&self, other: &TensorValue) -> f64 {
        assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = TensorValue::from_fn("ud", 3, |i| (10 * i[0] + i[1]) as f64);
        assert_eq!(t.get(&[2, 1]), 21.0);
        assert_eq!(t.components().len(), 9);
        let (idx, v) = t.iter().nth(5).unwrap();
        assert_eq!(idx, vec![1, 2]);
        assert_eq!(v, 12.0);
    }

    #[test]
    fn scalar_has_rank_zero() {
        let s = TensorValue::from_fn("", 4, |_| 7.0);
        assert_eq!(s.get(&[]), 7.0);
        assert_eq!(s.rank(), 0);
    }
}
