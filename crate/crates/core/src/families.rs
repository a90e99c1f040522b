//! Named spray families selectable from the command line.

use std::fmt;
use std::str::FromStr;

use crate::bryant::{bryant_spray, BryantParams};
use crate::error::{Error, Result};
use crate::spray::{
    euclidean_length, finsler_spray, flat_spray, generic_berwald_spray, height_potential,
    linear_factor, projective_modify, randers_sphere_spray, riemannian_spray, rotation_factor,
    sphere_metric, sphere_spray, twisted_length, ScalarField, SprayField, VolumeForm,
};

/// `ε` of the Randers example `F = α_{Sⁿ} + ε d(x¹/√(1+|x|²))`.
pub const RANDERS_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Flat,
    /// Flat spray modified by `P = |y|`.
    FlatP1,
    /// Flat spray modified by `P = ⟨a, y⟩(1 + |x|²)`.
    FlatP2,
    /// Flat spray modified by `P = 0.6 √(|y|² + ⟨x, y⟩²)`.
    FlatP3,
    Sphere,
    /// Sphere spray modified by `P = 0.5 (x¹y² − x²y¹)/(1 + |x|²)`.
    SphereP1,
    /// Sphere spray modified by `P = 0.4 √(|y|² + ⟨x, y⟩²)`.
    SphereP2,
    Randers,
    Bryant,
    /// Berwald control with random affine Christoffel symbols.
    BerwaldRandom,
    /// Sphere spray through the Levi-Civita route.
    SphereRiemannian,
    /// Sphere spray through the Finsler route.
    SphereFinsler,
}

const ALL: [Family; 12] = [
    Family::Flat,
    Family::FlatP1,
    Family::FlatP2,
    Family::FlatP3,
    Family::Sphere,
    Family::SphereP1,
    Family::SphereP2,
    Family::Randers,
    Family::Bryant,
    Family::BerwaldRandom,
    Family::SphereRiemannian,
    Family::SphereFinsler,
];

/// Coefficients of the linear factor used by `flat-p2`.
pub fn linear_coefficients(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| [0.5, -0.3, 0.2, 0.4, -0.25, 0.15][i % 6])
        .collect()
}

impl Family {
    pub fn all() -> &'static [Family] {
        &ALL
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Flat => "flat",
            Family::FlatP1 => "flat-p1",
            Family::FlatP2 => "flat-p2",
            Family::FlatP3 => "flat-p3",
            Family::Sphere => "sphere",
            Family::SphereP1 => "sphere-p1",
            Family::SphereP2 => "sphere-p2",
            Family::Randers => "randers",
            Family::Bryant => "bryant",
            Family::BerwaldRandom => "berwald-random",
            Family::SphereRiemannian => "sphere-riemannian",
            Family::SphereFinsler => "sphere-finsler",
        }
    }

    /// The seven locally projectively flat families of the Pontryagin witness.
    pub fn pontryagin_witnesses() -> [Family; 7] {
        [
            Family::FlatP1,
            Family::FlatP2,
            Family::FlatP3,
            Family::Sphere,
            Family::SphereP1,
            Family::SphereP2,
            Family::Randers,
        ]
    }

    pub fn projectively_flat(self) -> bool {
        self != Family::BerwaldRandom
    }

    pub fn berwald(self) -> bool {
        matches!(
            self,
            Family::Flat
                | Family::FlatP2
                | Family::Sphere
                | Family::SphereRiemannian
                | Family::SphereFinsler
                | Family::BerwaldRandom
        )
    }

    /// Sampling radius for chart points.
    pub fn radius(self) -> f64 {
        match self {
            Family::Bryant => 1.5,
            Family::BerwaldRandom => 1.0,
            _ => 2.0,
        }
    }

    /// Projective factor relative to the base spray, where there is one.
    pub fn factor(self, n: usize) -> Option<ScalarField> {
        match self {
            Family::FlatP1 => Some(euclidean_length()),
            Family::FlatP2 => Some(linear_factor(linear_coefficients(n))),
            Family::FlatP3 => Some(twisted_length(0.6)),
            Family::SphereP1 => Some(rotation_factor(0.5)),
            Family::SphereP2 => Some(twisted_length(0.4)),
            _ => None,
        }
    }

    pub fn build(self, n: usize, alpha: f64, seed: u64) -> Result<SprayField> {
        let factor = self.factor(n);
        match self {
            Family::Flat => flat_spray(n),
            Family::FlatP1 | Family::FlatP2 | Family::FlatP3 => {
                Ok(projective_modify(&flat_spray(n)?, &factor.expect("flat family has a factor")))
            }
            Family::Sphere => sphere_spray(n),
            Family::SphereP1 | Family::SphereP2 => Ok(projective_modify(
                &sphere_spray(n)?,
                &factor.expect("sphere family has a factor"),
            )),
            Family::Randers => Ok(randers_sphere_spray(n, &height_potential(), RANDERS_EPSILON)?.spray),
            Family::Bryant => bryant_spray(&BryantParams::new(alpha)?, n),
            Family::BerwaldRandom => generic_berwald_spray(n, seed),
            Family::SphereRiemannian => riemannian_spray(&sphere_metric(n)?),
            Family::SphereFinsler => finsler_spray(&sphere_metric(n)?.as_finsler()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ALL.iter().map(|f| f.name()).collect();
                Error::invalid(format!("unknown spray family {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Volume form choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VolumeChoice {
    /// `σ ≡ 1`
    Euclidean,
    /// Riemannian volume of the gnomonic sphere metric.
    Sphere,
    /// `σ = exp(⟨c, x⟩)` with fixed `c`.
    Exponential,
}

impl VolumeChoice {
    pub fn name(self) -> &'static str {
        match self {
            VolumeChoice::Euclidean => "euclidean",
            VolumeChoice::Sphere => "sphere",
            VolumeChoice::Exponential => "exponential",
        }
    }

    pub fn build(self, n: usize) -> Result<VolumeForm> {
        match self {
            VolumeChoice::Euclidean => Ok(VolumeForm::euclidean(n)),
            VolumeChoice::Sphere => VolumeForm::riemannian(&sphere_metric(n)?),
            VolumeChoice::Exponential => Ok(VolumeForm::exponential(
                (0..n).map(|i| [0.3, -0.2, 0.1, 0.25, -0.15][i % 5]).collect(),
            )),
        }
    }
}

impl fmt::Display for VolumeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VolumeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(VolumeChoice::Euclidean),
            "sphere" => Ok(VolumeChoice::Sphere),
            "exponential" => Ok(VolumeChoice::Exponential),
            other => Err(Error::invalid(format!(
                "unknown volume form {other:?}; expected euclidean, sphere or exponential"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in Family::all() {
            assert_eq!(f.name().parse::<Family>().unwrap(), *f);
        }
        assert!("torus".parse::<Family>().is_err());
        assert_eq!("sphere".parse::<VolumeChoice>().unwrap(), VolumeChoice::Sphere);
    }

    #[test]
    fn every_family_builds_and_is_homogeneous() {
        let x = [0.3, -0.2, 0.4];
        let y = [0.7, 0.5, -1.1];
        for f in Family::all() {
            let g = f.build(3, std::f64::consts::FRAC_PI_4, 1).unwrap();
            let a = g.values(&x, &y).unwrap();
            let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
            let b = g.values(&x, &y2).unwrap();
            for (ai, bi) in a.iter().zip(&b) {
                assert!((bi - 4.0 * ai).abs() <= 1e-10 * (1.0 + ai.abs()), "{f}");
            }
        }
    }
}
