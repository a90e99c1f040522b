//! Univariate Taylor coefficients `f^(k)(a)/k!` for the analytic kernels.
//!
//! Every multivariate kernel is `f(a₀ + h) = Σ c_k h^k` with `h` the
//! non-constant part of the argument jet, so only these coefficient
//! recurrences are kernel-specific.

pub fn recip(a0: f64, order: usize) -> Vec<f64> {
    let inv = 1.0 / a0;
    let mut c = Vec::with_capacity(order + 1);
    let mut term = inv;
    for _ in 0..=order {
        c.push(term);
        term *= -inv;
    }
    c
}

pub fn sqrt(a0: f64, order: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(a0.sqrt());
    for k in 1..=order {
        let prev = c[k - 1];
        c.push(prev * (0.5 - (k as f64 - 1.0)) / (k as f64 * a0));
    }
    c
}

pub fn ln(a0: f64, order: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(a0.ln());
    let inv = 1.0 / a0;
    let mut pow = 1.0;
    for k in 1..=order {
        pow *= inv;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        c.push(sign * pow / k as f64);
    }
    c
}

pub fn exp(a0: f64, order: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(a0.exp());
    for k in 1..=order {
        let prev = c[k - 1];
        c.push(prev / k as f64);
    }
    c
}

pub fn atan(a0: f64, order: usize) -> Vec<f64> {
    // d/dh atan(a0 + h) = 1 / (q0 + q1 h + h²)
    let q0 = 1.0 + a0 * a0;
    let q1 = 2.0 * a0;
    let mut w = Vec::with_capacity(order);
    for k in 0..order {
        let mut v = if k == 0 { 1.0 } else { 0.0 };
        if k >= 1 {
            v -= q1 * w[k - 1];
        }
        if k >= 2 {
            v -= w[k - 2];
        }
        w.push(v / q0);
    }
    let mut c = Vec::with_capacity(order + 1);
    c.push(a0.atan());
    for k in 1..=order {
        c.push(w[k - 1] / k as f64);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_series_at_reference_points() {
        let s = sqrt(1.0, 3);
        assert_relative_eq!(s[1], 0.5);
        assert_relative_eq!(s[2], -0.125);
        assert_relative_eq!(s[3], 1.0 / 16.0);
        let l = ln(1.0, 3);
        assert_eq!(l, vec![0.0, 1.0, -0.5, 1.0 / 3.0]);
        let a = atan(0.0, 5);
        assert_relative_eq!(a[1], 1.0);
        assert_relative_eq!(a[3], -1.0 / 3.0);
        assert_relative_eq!(a[5], 0.2);
        assert_eq!(a[2], 0.0);
        assert_eq!(recip(2.0, 2), vec![0.5, -0.25, 0.125]);
    }

    #[test]
    fn atan_off_origin_matches_derivatives() {
        // d/dx atan = 1/(1+x²), d²/dx² = -2x/(1+x²)²
        let x: f64 = 0.7;
        let c = atan(x, 2);
        assert_relative_eq!(c[1], 1.0 / (1.0 + x * x), epsilon = 1e-15);
        assert_relative_eq!(
            2.0 * c[2],
            -2.0 * x / (1.0 + x * x).powi(2),
            epsilon = 1e-15
        );
    }
}
