use std::fmt;

/// Exponent vector selecting one partial derivative `∂^α`.
///
/// Stored as counts per variable, so the order in which derivatives are
/// requested never matters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(num_vars: usize) -> Self {
        MultiIndex(vec![0; num_vars])
    }

    pub fn unit(num_vars: usize, var: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = 1;
        MultiIndex(e)
    }

    /// Index for differentiating once per listed variable, in any order.
    pub fn from_vars(num_vars: usize, vars: &[usize]) -> Self {
        let mut e = vec![0u8; num_vars];
        for &v in vars {
            e[v] += 1;
        }
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=u32::from(e)).map(f64::from).product::<f64>())
            .product()
    }

    /// All indices in `num_vars` variables with order `1..=max_order`.
    pub fn all_up_to(num_vars: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; num_vars];
        fn rec(cur: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<MultiIndex>) {
            if pos == cur.len() {
                if cur.iter().any(|&e| e > 0) {
                    out.push(MultiIndex(cur.clone()));
                }
                return;
            }
            for e in 0..=left {
                cur[pos] = e as u8;
                rec(cur, pos + 1, left - e, out);
            }
            cur[pos] = 0;
        }
        rec(&mut cur, 0, max_order, &mut out);
        out.sort_by_key(|a| a.order());
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_factorial() {
        let a = MultiIndex::new(vec![2, 0, 3]);
        assert_eq!(a.order(), 5);
        assert_eq!(a.factorial(), 12.0);
        assert_eq!(MultiIndex::zero(3).factorial(), 1.0);
    }

    #[test]
    fn from_vars_ignores_request_order() {
        assert_eq!(
            MultiIndex::from_vars(3, &[0, 2, 0]),
            MultiIndex::from_vars(3, &[2, 0, 0])
        );
    }

    #[test]
    fn enumeration_counts() {
        // C(2+3,3) - 1 nonzero indices of order <= 3 in 2 variables
        assert_eq!(MultiIndex::all_up_to(2, 3).len(), 9);
    }
}
