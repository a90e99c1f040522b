//! Benchmark fixtures shared by the criterion targets.

use spraykit::families::{Family, VolumeChoice};
use spraykit::sampling::{SamplePoint, SampleSpec};
use spraykit::spray::{SprayField, VolumeForm};

/// A spray, its volume form and a fixed set of sample points.
pub struct Fixture {
    pub spray: SprayField,
    pub volume: VolumeForm,
    pub points: Vec<SamplePoint>,
}

pub fn fixture(family: Family, n: usize, count: usize) -> Fixture {
    Fixture {
        spray: family.build(n, std::f64::consts::FRAC_PI_4, 1).expect("family builds"),
        volume: VolumeChoice::Exponential.build(n).expect("volume builds"),
        points: SampleSpec::new(1, count, family.radius()).points(n),
    }
}
