//! Seeded, order-independent sampling of chart points and directions.
//!
//! Each sample draws from its own ChaCha stream keyed by `(seed, purpose,
//! index)`, so the `i`-th point is the same whatever order or thread the
//! samples are generated in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::curvature::MIN_DIRECTION_NORM;

/// Independent sampling purposes draw from disjoint key spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Points,
    Directions,
    Factors,
    Matrices,
    Jets,
    Audit,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Points => 0x9e37_79b9_7f4a_7c15,
            Purpose::Directions => 0xbf58_476d_1ce4_e5b9,
            Purpose::Factors => 0x94d0_49bb_1331_11eb,
            Purpose::Matrices => 0xd6e8_feb8_6659_fd93,
            Purpose::Jets => 0xa076_1d64_78bd_642f,
            Purpose::Audit => 0xe703_7ed1_a0b4_28db,
        }
    }
}

/// Seed used for the y-independence audit directions.
pub const AUDIT_SEED: u64 = 0x5eed_a0d1;

/// RNG for sample `index` of `purpose` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.tag());
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePoint {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Where and how many `(x, y)` pairs to draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    /// Points are uniform in the ball `|x| ≤ radius`.
    pub radius: f64,
    /// Optional inner radius, giving an annulus.
    pub inner_radius: f64,
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize, radius: f64) -> Self {
        SampleSpec {
            seed,
            count,
            radius,
            inner_radius: 0.0,
        }
    }

    pub fn annulus(mut self, inner_radius: f64) -> Self {
        self.inner_radius = inner_radius;
        self
    }

    pub fn points(&self, n: usize) -> Vec<SamplePoint> {
        (0..self.count)
            .map(|i| SamplePoint {
                index: i,
                x: ball_point(&mut stream(self.seed, Purpose::Points, i as u64), n, self.inner_radius, self.radius),
                y: direction(&mut stream(self.seed, Purpose::Directions, i as u64), n),
            })
            .collect()
    }
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Uniform in `{inner ≤ |x| ≤ outer}`.
pub fn ball_point(rng: &mut impl Rng, n: usize, inner: f64, outer: f64) -> Vec<f64> {
    let dir = unit_vector(rng, n);
    let (a, b) = (inner.powi(n as i32), outer.powi(n as i32));
    let u: f64 = rng.random();
    let r = (a + u * (b - a)).powf(1.0 / n as f64);
    dir.into_iter().map(|v| v * r).collect()
}

/// Uniform unit direction scaled by `λ ∈ [0.5, 2]`; never shorter than the
/// slit-bundle cutoff.
pub fn direction(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let lambda: f64 = rng.random_range(0.5..2.0);
        let y: Vec<f64> = unit_vector(rng, n).into_iter().map(|v| v * lambda).collect();
        if y.iter().map(|v| v * v).sum::<f64>().sqrt() >= MIN_DIRECTION_NORM {
            return y;
        }
    }
}

/// Reference direction `(1, …, 1)/√n` followed by seven fixed audit directions.
pub fn audit_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0 / (n as f64).sqrt(); n]];
    out.extend((0..7).map(|i| direction(&mut stream(AUDIT_SEED, Purpose::Audit, i), n)));
    out
}
