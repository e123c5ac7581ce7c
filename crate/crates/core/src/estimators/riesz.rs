//! `∬_{[0,1]²×[0,1]²} |x − y|^{−s} dx dy` for `0 ≤ s < 2`.

use crate::error::{invalid, Result};

fn check(s: f64) -> Result<()> {
    if !(0.0..2.0).contains(&s) {
        return invalid(format!("kernel exponent must lie in [0, 2), got {s}"));
    }
    Ok(())
}

// Substituting w = x − y leaves ∫_{[−1,1]²} (1−|w₁|)(1−|w₂|)|w|^{−s} dw; the
// radial integral over the eighth-wedge is closed form.
fn wedge(theta: f64, s: f64) -> f64 {
    let (sn, c) = theta.sin_cos();
    let r = 1.0 / c;
    r.powf(2.0 - s) / (2.0 - s) - (c + sn) * r.powf(3.0 - s) / (3.0 - s) + c * sn * r.powf(4.0 - s) / (4.0 - s)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Deterministic quadrature (adaptive Simpson after a polar reduction).
pub fn riesz_variance_integral(s: f64) -> Result<f64> {
    check(s)?;
    let f = |t: f64| wedge(t, s);
    let (a, b) = (0.0, std::f64::consts::FRAC_PI_4);
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Ok(8.0 * simpson(&f, a, b, fa, fm, fb, whole, 1e-15, 40))
}

/// Quasi-random oracle: the 4-dimensional additive recurrence built on the
/// real root of `g⁵ = g + 1`, with `n_points` points.
pub fn riesz_variance_qmc(s: f64, n_points: u64) -> Result<f64> {
    check(s)?;
    if n_points == 0 {
        return invalid("need at least one point");
    }
    let mut g = 1.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(0.2);
    }
    let alpha: [f64; 4] = std::array::from_fn(|k| g.powi(-(k as i32 + 1)));
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 1..=n_points {
        let p: [f64; 4] = std::array::from_fn(|k| (0.5 + i as f64 * alpha[k]).fract());
        let d2 = (p[0] - p[2]).powi(2) + (p[1] - p[3]).powi(2);
        let v = d2.powf(-s / 2.0);
        // Neumaier summation
        let t = acc + v;
        comp += if acc.abs() >= v.abs() { (acc - t) + v } else { (v - t) + acc };
        acc = t;
    }
    Ok((acc + comp) / n_points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    // high-precision value of the exponent-1/4 integral
    const RIESZ_QUARTER: f64 = 1.2392596325485772698;

    #[test]
    fn unit_volume_at_zero_exponent() {
        assert!((riesz_variance_integral(0.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((riesz_variance_qmc(0.0, 10).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_exponent_golden_value() {
        let v = riesz_variance_integral(0.25).unwrap();
        assert!((v - RIESZ_QUARTER).abs() < 1e-10, "{v}");
    }

    #[test]
    fn quadrature_agrees_with_qmc() {
        let q = riesz_variance_qmc(0.25, 1 << 20).unwrap();
        let v = riesz_variance_integral(0.25).unwrap();
        assert!((q - v).abs() < 1e-4, "{q} vs {v}");
    }

    #[test]
    fn coulomb_kernel_closed_form() {
        let exact = 4.0 * (1.0 + 2f64.sqrt()).ln() - 4.0 / 3.0 * (2f64.sqrt() - 1.0);
        assert!((riesz_variance_integral(1.0).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_integrable_exponents() {
        assert!(riesz_variance_integral(2.0).is_err());
        assert!(riesz_variance_integral(-0.5).is_err());
        assert!(riesz_variance_qmc(0.25, 0).is_err());
    }
}
