//! Finite-difference partial derivatives, used only to cross-check jets.

use serde_json::json;

use crate::chernweil::{signed_permutations, AltForm, FormMatrix};
use crate::error::{Error, Result};
use crate::jet::MultiIndex;
use crate::report::{Check, VerificationReport};
use crate::spray::{JetChart, ScalarField};

/// Central stencils of accuracy 2 for derivative orders 0..=4 as
/// `(offset, weight)` pairs in units of the step.
fn stencil(order: usize) -> &'static [(f64, f64)] {
    match order {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        4 => &[(-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)],
        _ => &[],
    }
}

pub const MAX_FD_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilSpec {
    pub order: usize,
    /// Base step, scaled per axis by `1 + |coordinate|`.
    pub h: f64,
    pub richardson_levels: usize,
}

impl StencilSpec {
    pub fn new(order: usize, h: f64, richardson_levels: usize) -> Result<Self> {
        if order > MAX_FD_ORDER {
            return Err(Error::invalid(format!("finite differences stop at order {MAX_FD_ORDER}")));
        }
        if !(h > 0.0) {
            return Err(Error::invalid(format!("step must be positive, got {h}")));
        }
        Ok(StencilSpec {
            order,
            h,
            richardson_levels,
        })
    }

    /// One Richardson level with a step balancing truncation and roundoff.
    pub fn for_order(order: usize) -> Result<Self> {
        let h = match order {
            0..=2 => 1e-3,
            3 => 5e-3,
            _ => 1e-2,
        };
        StencilSpec::new(order, h, 1)
    }
}

fn raw_partial(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    alpha: &MultiIndex,
    steps: &[f64],
) -> Result<f64> {
    let active: Vec<(usize, usize)> = alpha
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| (v, e as usize))
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; active.len()];
    let mut probe = point.to_vec();
    loop {
        let mut weight = 1.0;
        probe.copy_from_slice(point);
        for (slot, &(var, ord)) in active.iter().enumerate() {
            let (off, w) = stencil(ord)[idx[slot]];
            probe[var] += off * steps[var];
            weight *= w / steps[var].powi(ord as i32);
        }
        total += weight * f(&probe)?;
        let mut slot = active.len();
        loop {
            if slot == 0 {
                return Ok(total);
            }
            slot -= 1;
            idx[slot] += 1;
            if idx[slot] < stencil(active[slot].1).len() {
                break;
            }
            idx[slot] = 0;
        }
    }
}

/// Central-difference estimate of `∂^α f` at `point`, with Richardson
/// extrapolation over step halving.
pub fn fd_partial(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    alpha: &MultiIndex,
    spec: &StencilSpec,
) -> Result<f64> {
    if alpha.num_vars() != point.len() {
        return Err(Error::DimensionMismatch {
            expected: point.len(),
            got: alpha.num_vars(),
        });
    }
    if alpha.order() > MAX_FD_ORDER || alpha.exponents().iter().any(|&e| e as usize > MAX_FD_ORDER) {
        return Err(Error::invalid(format!(
            "multi-index {alpha} exceeds the finite-difference order limit"
        )));
    }
    let base: Vec<f64> = point.iter().map(|v| spec.h * (1.0 + v.abs())).collect();
    let levels = spec.richardson_levels;
    let mut table: Vec<f64> = (0..=levels)
        .map(|l| {
            let s = 0.5f64.powi(l as i32);
            let steps: Vec<f64> = base.iter().map(|h| h * s).collect();
            raw_partial(f, point, alpha, &steps)
        })
        .collect::<Result<_>>()?;
    for l in 1..=levels {
        let factor = 4f64.powi(l as i32);
        for i in 0..table.len() - l {
            table[i] = (factor * table[i + 1] - table[i]) / (factor - 1.0);
        }
    }
    Ok(table[0])
}

/// Acceptance tolerance for the jet/FD comparison at a derivative order.
pub fn fd_tolerance(order: usize) -> f64 {
    if order <= 3 {
        1e-6
    } else {
        1e-4
    }
}

/// `|a − b| / (1 + |b|)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// One multi-index of a jet/FD comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub alpha: MultiIndex,
    pub jet: f64,
    pub fd: f64,
    pub relative: f64,
}

/// Jet and finite-difference values of every `∂^α f`, `1 ≤ |α| ≤ max_order`,
/// for a field of `(x, y)`.
pub fn jet_fd_discrepancies(
    f: &ScalarField,
    x: &[f64],
    y: &[f64],
    max_order: usize,
) -> Result<Vec<Discrepancy>> {
    jet_fd_discrepancies_with(f, x, y, max_order, StencilSpec::for_order)
}

/// As [`jet_fd_discrepancies`] with caller-chosen stencils per order.
pub fn jet_fd_discrepancies_with(
    f: &ScalarField,
    x: &[f64],
    y: &[f64],
    max_order: usize,
    spec_for: impl Fn(usize) -> Result<StencilSpec>,
) -> Result<Vec<Discrepancy>> {
    if max_order > MAX_FD_ORDER {
        return Err(Error::invalid(format!("finite differences stop at order {MAX_FD_ORDER}")));
    }
    let n = x.len();
    let chart = JetChart::new(x, y, max_order, None)?;
    let jet = f.eval(&chart)?;
    let point: Vec<f64> = x.iter().chain(y).copied().collect();
    let eval = |p: &[f64]| f.value(&p[..n], &p[n..]);
    let specs: Vec<StencilSpec> = (0..=max_order)
        .map(spec_for)
        .collect::<Result<_>>()?;
    MultiIndex::all_up_to(2 * n, max_order)
        .into_iter()
        .map(|alpha| {
            let j = jet.partial(&alpha)?;
            let d = fd_partial(&eval, &point, &alpha, &specs[alpha.order()])?;
            Ok(Discrepancy {
                relative: relative_error(j, d),
                alpha,
                jet: j,
                fd: d,
            })
        })
        .collect()
}

/// Worst discrepancy per derivative order, one check each.
pub fn compare_jet_fd(f: &ScalarField, x: &[f64], y: &[f64], max_order: usize) -> VerificationReport {
    summarize(f, x, y, max_order, jet_fd_discrepancies(f, x, y, max_order))
}

/// As [`compare_jet_fd`] with caller-chosen stencils per order.
pub fn compare_jet_fd_with(
    f: &ScalarField,
    x: &[f64],
    y: &[f64],
    max_order: usize,
    spec_for: impl Fn(usize) -> Result<StencilSpec>,
) -> VerificationReport {
    summarize(f, x, y, max_order, jet_fd_discrepancies_with(f, x, y, max_order, spec_for))
}

fn summarize(
    f: &ScalarField,
    x: &[f64],
    y: &[f64],
    max_order: usize,
    result: Result<Vec<Discrepancy>>,
) -> VerificationReport {
    let mut report = VerificationReport::new(json!({
        "field": f.label(),
        "x": x,
        "y": y,
        "max_order": max_order,
    }));
    match result {
        Ok(all) => {
            for order in 1..=max_order {
                let worst = all
                    .iter()
                    .filter(|d| d.alpha.order() == order)
                    .max_by(|a, b| a.relative.total_cmp(&b.relative));
                let count = all.iter().filter(|d| d.alpha.order() == order).count();
                let mut check = Check::new(
                    format!("jet_vs_fd_order{order}"),
                    "oracle:finite_difference",
                    worst.map_or(0.0, |d| d.relative),
                    fd_tolerance(order),
                    count,
                );
                if let Some(d) = worst {
                    check = check.with_detail(format!("worst alpha {}: jet {:e}, fd {:e}", d.alpha, d.jet, d.fd));
                }
                report.push(check);
            }
        }
        Err(e) => report.push(Check::failed("jet_vs_fd", "oracle:finite_difference", fd_tolerance(max_order), &e)),
    }
    report
}

/// `det(I + tΩ)` by the Leibniz expansion over all of `S_n`, returned as the
/// coefficients of `t⁰, t¹, …, t^{⌊n/2⌋}` (a `2r`-form for `t^r`).
///
/// Independent of [`crate::chernweil::sigma_r`]: it multiplies out whole
/// permutation products row by row rather than summing over index tuples.
pub fn det_expansion(omega: &FormMatrix) -> Result<Vec<AltForm>> {
    let n = omega.dim();
    let top = n / 2;
    let mut total: Vec<AltForm> = (0..=top)
        .map(|r| AltForm::zero(n, 2 * r))
        .collect::<Result<_>>()?;
    for (perm, sign) in signed_permutations(n) {
        let mut poly: Vec<AltForm> = total.iter().map(|f| f.scale(0.0)).collect();
        poly[0] = AltForm::from_components(n, 0, vec![1.0])?;
        for (i, &pi) in perm.iter().enumerate() {
            let delta = if i == pi { 1.0 } else { 0.0 };
            let entry = omega.get(i, pi);
            let mut next: Vec<AltForm> = poly.iter().map(|f| f.scale(delta)).collect();
            for r in 0..top {
                let w = poly[r].wedge(entry)?;
                next[r + 1] = next[r + 1].add(&w)?;
            }
            poly = next;
        }
        for (t, p) in total.iter_mut().zip(&poly) {
            *t = t.add(&p.scale(sign))?;
        }
    }
    Ok(total)
}
