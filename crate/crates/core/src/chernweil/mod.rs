//! Chern–Weil forms of Berwald-type curvature at a chart point.
//!
//! For a Berwald spray the curvature forms `Ωⱼⁱ = ½Rⁱ_{j kl} dxᵏ∧dxˡ` do not
//! depend on `y` and live on the chart; for a Douglas spray the hat spray is
//! Berwald, and its forms represent the Pontryagin classes.

mod forms;

use crate::curvature::{
    berwald_and_riemann4, berwald_pack, flatness_residuals, hat_spray, scalar_hessian,
    TensorValue,
};
use crate::error::{Error, Result};
use crate::sampling::audit_directions;
use crate::spray::{SprayField, VolumeForm};

pub use forms::{AltForm, FormMatrix, MAX_FORM_DIM};

/// `max|B|` above which a spray is not treated as Berwald.
pub const BERWALD_GATE: f64 = 1e-8;
/// Relative spread allowed across the audit directions for y-independent data.
pub const Y_INDEPENDENCE_TOL: f64 = 1e-9;
/// Relative `W`/`D` level accepted as projectively flat (or Douglas).
pub const FLATNESS_GATE: f64 = 1e-8;

pub fn form_wedge(a: &AltForm, b: &AltForm) -> Result<AltForm> {
    a.wedge(b)
}

/// All permutations of `0..r` with their signs.
pub fn signed_permutations(r: usize) -> Vec<(Vec<usize>, f64)> {
    if r == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for (perm, sign) in signed_permutations(r - 1) {
        // Insert r-1 at every position; each shift to the left is a transposition.
        for pos in (0..=perm.len()).rev() {
            let mut p = perm.clone();
            p.insert(pos, r - 1);
            let moves = perm.len() - pos;
            out.push((p, if moves % 2 == 0 { sign } else { -sign }));
        }
    }
    out
}

/// `σ_r(Ω) = (1/r!) Σ_{i₁…i_r} Σ_{σ∈S_r} sign σ Ω_{i₁}^{i_σ(1)}∧⋯∧Ω_{i_r}^{i_σ(r)}`.
pub fn sigma_r(omega: &FormMatrix, r: usize) -> Result<AltForm> {
    let n = omega.dim();
    if r == 0 {
        return Err(Error::invalid("sigma_r needs r >= 1"));
    }
    if 2 * r > n {
        return Err(Error::invalid(format!(
            "sigma_{r} is a {}-form, above the chart dimension {n}",
            2 * r
        )));
    }
    let perms = signed_permutations(r);
    let mut out = AltForm::zero(n, 2 * r)?;
    let mut tuple = vec![0usize; r];
    loop {
        for (perm, sign) in &perms {
            let mut prod = omega.get(tuple[perm[0]], tuple[0]).clone();
            for s in 1..r {
                if prod.max_abs() == 0.0 {
                    break;
                }
                prod = prod.wedge(omega.get(tuple[perm[s]], tuple[s]))?;
            }
            if prod.degree() == 2 * r {
                out.add_assign_scaled(&prod, *sign);
            }
        }
        let mut slot = r;
        loop {
            if slot == 0 {
                let fact: f64 = (1..=r).map(|v| v as f64).product();
                return Ok(out.scale(1.0 / fact));
            }
            slot -= 1;
            tuple[slot] += 1;
            if tuple[slot] < n {
                break;
            }
            tuple[slot] = 0;
        }
    }
}

/// `Ωⱼⁱ = Σ_{k<l} Rⁱ_{j kl} dxᵏ∧dxˡ` from a four-index curvature.
fn forms_from_riemann4(r4: &TensorValue) -> Result<FormMatrix> {
    let n = r4.dim();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(AltForm::from_fn(n, 2, |kl| r4.get(&[i, j, kl[0], kl[1]]))?);
        }
    }
    let mut it = entries.into_iter();
    FormMatrix::from_fn(n, |_, _| it.next().expect("n² entries"))
}

/// Curvature forms of the Berwald connection of a Berwald spray at `x`.
///
/// The spray must be Berwald (`max|B| ≤ BERWALD_GATE`) along every audit
/// direction, and `R⁴` must agree across them.
pub fn berwald_connection_forms(spray: &SprayField, x: &[f64]) -> Result<FormMatrix> {
    let n = spray.dim();
    let mut reference: Option<TensorValue> = None;
    let mut spread: f64 = 0.0;
    for y in audit_directions(n) {
        let (b, r4) = berwald_and_riemann4(spray, x, &y)?;
        let max_berwald = b.max_abs();
        if !(max_berwald <= BERWALD_GATE) {
            return Err(Error::NotBerwald {
                point: x.to_vec(),
                max_berwald,
            });
        }
        match &reference {
            None => reference = Some(r4),
            Some(r) => spread = spread.max(r.max_diff(&r4)),
        }
    }
    let r4 = reference.expect("audit directions are non-empty");
    let rel = spread / (1.0 + r4.max_abs());
    if !(rel <= Y_INDEPENDENCE_TOL) {
        return Err(Error::DirectionDependent {
            what: "Berwald curvature R4",
            spread: rel,
        });
    }
    forms_from_riemann4(&r4)
}

fn check_douglas(spray: &SprayField, x: &[f64]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for y in audit_directions(spray.dim()) {
        let b = berwald_pack(spray, x, &y)?;
        worst = worst.max(b.douglas.max_abs() / (1.0 + b.berwald.max_abs()));
    }
    if !(worst <= FLATNESS_GATE) {
        return Err(Error::NotDouglas {
            point: x.to_vec(),
            max_douglas: worst,
        });
    }
    Ok(())
}

/// `Ω̂ⱼⁱ = ½R̂_{·l·j} dxⁱ∧dxˡ` for a locally projectively flat spray (`n ≥ 4`).
pub fn hat_curvature_forms(spray: &SprayField, volume: &VolumeForm, x: &[f64]) -> Result<FormMatrix> {
    let n = spray.dim();
    if n < 4 {
        return Err(Error::invalid(format!(
            "hat curvature forms are built for n >= 4, got n = {n}"
        )));
    }
    let directions = audit_directions(n);
    for y in &directions {
        let (w, d) = flatness_residuals(spray, x, y)?;
        if !(w <= FLATNESS_GATE && d <= FLATNESS_GATE) {
            return Err(Error::NotProjectivelyFlat {
                point: x.to_vec(),
                max_weyl: w,
                max_douglas: d,
            });
        }
    }
    let hat = hat_spray(spray, volume)?;
    let mut reference: Option<TensorValue> = None;
    let mut spread: f64 = 0.0;
    for y in &directions {
        let h = scalar_hessian(&hat, x, y)?;
        match &reference {
            None => reference = Some(h),
            Some(r) => spread = spread.max(r.max_diff(&h)),
        }
    }
    let h = reference.expect("audit directions are non-empty");
    let rel = spread / (1.0 + h.max_abs());
    if !(rel <= Y_INDEPENDENCE_TOL) {
        return Err(Error::DirectionDependent {
            what: "hat scalar curvature Hessian",
            spread: rel,
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(AltForm::from_fn(n, 2, |ab| {
                let (a, b) = (ab[0], ab[1]);
                let mut v = 0.0;
                if i == a {
                    v += 0.5 * h.get(&[b, j]);
                }
                if i == b {
                    v -= 0.5 * h.get(&[a, j]);
                }
                v
            })?);
        }
    }
    let mut it = entries.into_iter();
    FormMatrix::from_fn(n, |_, _| it.next().expect("n² entries"))
}

/// Berwald curvature forms of the hat spray of a Douglas spray.
pub fn hat_berwald_forms(spray: &SprayField, volume: &VolumeForm, x: &[f64]) -> Result<FormMatrix> {
    check_douglas(spray, x)?;
    berwald_connection_forms(&hat_spray(spray, volume)?, x)
}

/// `σ_{2k}(Ω̂)/(2π)^{2k}`, the Pontryagin-form representative at `x`.
pub fn pontryagin_density(
    spray: &SprayField,
    volume: &VolumeForm,
    x: &[f64],
    k: usize,
) -> Result<AltForm> {
    let n = spray.dim();
    if k == 0 || 4 * k > n {
        return Err(Error::invalid(format!(
            "the degree-{} Pontryagin form needs 1 <= k and 4k <= n (n = {n}, k = {k})",
            4 * k
        )));
    }
    let omega = hat_berwald_forms(spray, volume, x)?;
    Ok(sigma_r(&omega, 2 * k)?.scale((2.0 * std::f64::consts::PI).powi(-2 * k as i32)))
}

#[cfg(test)]
mod tests;
