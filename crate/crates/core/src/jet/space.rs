//! Monomial bookkeeping shared by every jet of a given truncation.
//!
//! A [`JetSpace`] fixes the variable count, the total-degree truncation and an
//! optional cap on the degree carried by a leading block of variables. The
//! block cap is what keeps chart computations cheap: curvature formulas never
//! differentiate spray coefficients more than once in `x`, so there is no
//! reason to carry `x`-degree 5 terms around.
//!
//! Spaces are interned; two jets built with the same parameters share one
//! `Arc<JetSpace>` and the tables hanging off it.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use super::JetError;

/// Bits used per exponent in a packed monomial key.
const KEY_BITS: usize = 5;
/// Largest variable count a packed key can hold.
pub const MAX_VARS: usize = 64 / KEY_BITS;
/// Largest truncation order a packed key can hold without carries.
pub const MAX_ORDER: usize = (1 << KEY_BITS) - 1;

/// Degree cap on the first `vars` variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockCap {
    pub vars: usize,
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceKey {
    pub num_vars: usize,
    pub order: usize,
    pub cap: Option<BlockCap>,
}

impl SpaceKey {
    fn normalized(mut self) -> Self {
        if let Some(cap) = self.cap {
            if cap.vars == 0 || cap.degree >= self.order {
                self.cap = None;
            }
        }
        self
    }

    /// The largest space contained in both `self` and `other`.
    pub(crate) fn meet(self, other: SpaceKey) -> Result<SpaceKey, JetError> {
        if self.num_vars != other.num_vars {
            return Err(JetError::VariableMismatch {
                left: self.num_vars,
                right: other.num_vars,
            });
        }
        let cap = match (self.cap, other.cap) {
            (None, c) | (c, None) => c,
            (Some(a), Some(b)) => {
                if a.vars != b.vars {
                    return Err(JetError::BlockMismatch);
                }
                Some(BlockCap {
                    vars: a.vars,
                    degree: a.degree.min(b.degree),
                })
            }
        };
        Ok(SpaceKey {
            num_vars: self.num_vars,
            order: self.order.min(other.order),
            cap,
        }
        .normalized())
    }
}

pub struct JetSpace {
    key: SpaceKey,
    exponents: Vec<u8>,
    keys: Vec<u64>,
    lookup: HashMap<u64, u32>,
    degree_start: Vec<usize>,
    products: Vec<Vec<(u32, u32)>>,
}

impl std::fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JetSpace")
            .field("key", &self.key)
            .field("len", &self.len())
            .finish()
    }
}

static SPACES: LazyLock<Mutex<HashMap<SpaceKey, Arc<JetSpace>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

static PROJECTIONS: LazyLock<Mutex<HashMap<(SpaceKey, SpaceKey), Arc<Vec<u32>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

type DerivativeMap = Arc<(SpaceKey, Vec<(u32, f64)>)>;

static DERIVATIVES: LazyLock<Mutex<HashMap<(SpaceKey, usize), DerivativeMap>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn pack(exps: &[u8]) -> u64 {
    exps.iter()
        .enumerate()
        .fold(0u64, |acc, (v, &e)| acc | (u64::from(e) << (KEY_BITS * v)))
}

impl JetSpace {
    /// Interned space with total order `order` and no block cap.
    pub fn full(num_vars: usize, order: usize) -> Result<Arc<JetSpace>, JetError> {
        Self::get(SpaceKey {
            num_vars,
            order,
            cap: None,
        })
    }

    pub fn get(key: SpaceKey) -> Result<Arc<JetSpace>, JetError> {
        if key.num_vars == 0 || key.num_vars > MAX_VARS {
            return Err(JetError::TooManyVariables(key.num_vars));
        }
        if key.order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(key.order));
        }
        if let Some(cap) = key.cap {
            if cap.vars > key.num_vars {
                return Err(JetError::BlockMismatch);
            }
        }
        let key = key.normalized();
        // Build outside the lock: large spaces take a while and other keys
        // should not wait on them.
        if let Some(space) = SPACES.lock().expect("jet space registry").get(&key) {
            return Ok(space.clone());
        }
        let built = Arc::new(JetSpace::build(key));
        let mut registry = SPACES.lock().expect("jet space registry");
        Ok(registry.entry(key).or_insert(built).clone())
    }

    fn build(key: SpaceKey) -> JetSpace {
        let m = key.num_vars;
        let (cap_vars, cap_degree) = match key.cap {
            Some(c) => (c.vars, c.degree),
            None => (0, usize::MAX),
        };
        let mut exponents = Vec::new();
        let mut degree_start = Vec::with_capacity(key.order + 2);
        let mut current = vec![0u8; m];
        for degree in 0..=key.order {
            degree_start.push(exponents.len() / m.max(1));
            enumerate(&mut current, 0, degree, &mut |e| {
                let block: usize = e[..cap_vars].iter().map(|&x| x as usize).sum();
                if block <= cap_degree {
                    exponents.extend_from_slice(e);
                }
            });
        }
        let len = exponents.len() / m;
        degree_start.push(len);

        let keys: Vec<u64> = exponents.chunks(m).map(pack).collect();
        let block_degree: Vec<u8> = exponents
            .chunks(m)
            .map(|e| e[..cap_vars].iter().sum())
            .collect();
        let lookup: HashMap<u64, u32> = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();

        let mut products = Vec::with_capacity(len);
        for i in 0..len {
            let degree: usize = exponents[i * m..(i + 1) * m]
                .iter()
                .map(|&x| x as usize)
                .sum();
            let partners = degree_start[key.order - degree + 1];
            let mut row = Vec::with_capacity(partners);
            for j in 0..partners {
                if block_degree[i] as usize + block_degree[j] as usize > cap_degree {
                    continue;
                }
                let k = lookup[&(keys[i] + keys[j])];
                row.push((j as u32, k));
            }
            products.push(row);
        }

        JetSpace {
            key,
            exponents,
            keys,
            lookup,
            degree_start,
            products,
        }
    }

    pub fn key(&self) -> SpaceKey {
        self.key
    }

    pub fn num_vars(&self) -> usize {
        self.key.num_vars
    }

    pub fn order(&self) -> usize {
        self.key.order
    }

    pub fn cap(&self) -> Option<BlockCap> {
        self.key.cap
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Exponent vector of the `i`-th monomial.
    pub fn exponents(&self, i: usize) -> &[u8] {
        let m = self.key.num_vars;
        &self.exponents[i * m..(i + 1) * m]
    }

    /// Flat index of a monomial, if it is carried by this space.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.key.num_vars || exps.iter().any(|&e| e as usize > MAX_ORDER) {
            return None;
        }
        self.lookup.get(&pack(exps)).map(|&i| i as usize)
    }

    /// Index range holding the monomials of total degree `degree`.
    pub fn degree_range(&self, degree: usize) -> std::ops::Range<usize> {
        if degree > self.key.order {
            return self.len()..self.len();
        }
        self.degree_start[degree]..self.degree_start[degree + 1]
    }

    pub(crate) fn products(&self, i: usize) -> &[(u32, u32)] {
        &self.products[i]
    }

    /// Whether every monomial of `other` is also carried by `self`.
    pub fn contains(&self, other: &JetSpace) -> bool {
        self.key.meet(other.key).map(|k| k == other.key).unwrap_or(false)
    }

    /// For each monomial of `target`, its index in `self`.
    pub(crate) fn projection(self: &Arc<Self>, target: &Arc<JetSpace>) -> Arc<Vec<u32>> {
        let cache_key = (self.key, target.key);
        if let Some(map) = PROJECTIONS.lock().expect("projection cache").get(&cache_key) {
            return map.clone();
        }
        let map: Vec<u32> = target
            .keys
            .iter()
            .map(|k| self.lookup[k])
            .collect();
        let map = Arc::new(map);
        PROJECTIONS
            .lock()
            .expect("projection cache")
            .entry(cache_key)
            .or_insert(map)
            .clone()
    }

    /// Target space and `(source index, factor)` per target monomial for
    /// differentiation with respect to `var`.
    pub(crate) fn derivative_map(
        self: &Arc<Self>,
        var: usize,
    ) -> Result<(Arc<JetSpace>, DerivativeMap), JetError> {
        if var >= self.key.num_vars {
            return Err(JetError::VariableOutOfRange {
                index: var,
                num_vars: self.key.num_vars,
            });
        }
        if self.key.order == 0 {
            return Err(JetError::OrderExhausted { var });
        }
        let cap = match self.key.cap {
            Some(c) if var < c.vars => {
                if c.degree == 0 {
                    return Err(JetError::OrderExhausted { var });
                }
                Some(BlockCap {
                    vars: c.vars,
                    degree: c.degree - 1,
                })
            }
            other => other,
        };
        let target_key = SpaceKey {
            num_vars: self.key.num_vars,
            order: self.key.order - 1,
            cap,
        }
        .normalized();
        let target = JetSpace::get(target_key)?;
        if let Some(map) = DERIVATIVES
            .lock()
            .expect("derivative cache")
            .get(&(self.key, var))
        {
            return Ok((target, map.clone()));
        }
        let shift = 1u64 << (KEY_BITS * var);
        let entries: Vec<(u32, f64)> = (0..target.len())
            .map(|i| {
                let e = target.exponents(i)[var];
                let src = self.lookup[&(target.keys[i] + shift)];
                (src, f64::from(e) + 1.0)
            })
            .collect();
        let map = Arc::new((target.key, entries));
        DERIVATIVES
            .lock()
            .expect("derivative cache")
            .entry((self.key, var))
            .or_insert(map.clone());
        Ok((target, map))
    }
}

/// Visit every exponent vector of the given total degree, in lexicographically
/// decreasing order of the leading exponents.
fn enumerate(current: &mut [u8], pos: usize, remaining: usize, visit: &mut impl FnMut(&[u8])) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        visit(current);
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        enumerate(current, pos + 1, remaining - e, visit);
    }
    current[pos] = 0;
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `C(m + d, d)`: coefficient count of an uncapped space.
pub fn full_len(num_vars: usize, order: usize) -> usize {
    binomial(num_vars + order, order)
}
