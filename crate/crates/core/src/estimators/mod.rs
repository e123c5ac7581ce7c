//! Statistics and scaling analysis on per-sample observable series.
//!
//! Every estimator takes the observable values of a sample stream in chain
//! order. Errors come from batch means over 32 batches (or a jackknife over
//! the same batches for nonlinear functions of the moments).

mod accumulator;
mod riesz;

pub use accumulator::{MomentAccumulator, PowerSums, MAX_ORDER};
pub use riesz::{riesz_variance_integral, riesz_variance_qmc};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::RenormScheme;
use crate::lattice::SubSquare;

/// Batches used for every batch-means error in the crate.
pub const N_BATCHES: usize = 32;
/// Fewer complete batches than this flag the error bar as unreliable.
pub const MIN_BATCHES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    /// Set when the error bar rests on fewer than 30 batches or too few samples.
    pub flagged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0, n: 0, flagged: false }
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target) / self.stderr
        }
    }
}

/// Standard error from leave-one-out replicate values.
pub fn jackknife_stderr(replicates: &[f64]) -> f64 {
    let g = replicates.len() as f64;
    if g < 2.0 {
        return f64::NAN;
    }
    let mean = replicates.iter().sum::<f64>() / g;
    let ss: f64 = replicates.iter().map(|r| (r - mean).powi(2)).sum();
    ((g - 1.0) / g * ss).sqrt()
}

/// Mean with a batch-means standard error.
pub fn batch_mean(samples: &[f64]) -> Estimate {
    let n = samples.len();
    if n == 0 {
        return Estimate { value: f64::NAN, stderr: f64::NAN, n: 0, flagged: true };
    }
    let value = samples.iter().sum::<f64>() / n as f64;
    let len = n / N_BATCHES;
    if len == 0 {
        return Estimate { value, stderr: f64::NAN, n, flagged: true };
    }
    let means: Vec<f64> = samples.chunks_exact(len).take(N_BATCHES).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let b = means.len() as f64;
    let mb = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mb).powi(2)).sum::<f64>() / (b - 1.0);
    Estimate { value, stderr: (var / b).sqrt(), n, flagged: means.len() < MIN_BATCHES }
}

/// Applies `f` to the full series and to each leave-one-batch-out
/// remainder; returns the full value and the jackknife error.
pub fn jackknife<F>(samples: &[f64], f: F) -> Estimate
where
    F: Fn(&PowerSums) -> f64,
{
    let acc = MomentAccumulator::from_samples(samples, N_BATCHES);
    let value = f(acc.total());
    let full: Vec<&PowerSums> = acc.full_batches().collect();
    let mut covered = PowerSums::default();
    full.iter().for_each(|b| covered.add(b));
    let reps: Vec<f64> = full.iter().map(|b| f(&covered.sub(b))).collect();
    Estimate {
        value,
        stderr: jackknife_stderr(&reps),
        n: samples.len(),
        flagged: full.len() < MIN_BATCHES,
    }
}

/// Sites `u`, `v` of the diagonal pair at separation `(N, N)`, centred in
/// an `n_side` grid.
pub fn diagonal_pair(n_side: usize, separation: usize) -> Result<(usize, usize)> {
    if n_side < 4 * separation || n_side < 2 {
        return invalid(format!("grid side {n_side} is smaller than 4 x separation {separation}"));
    }
    let c0 = (n_side - separation) / 2;
    let u = c0 * n_side + c0;
    let v = (c0 + separation) * n_side + c0 + separation;
    Ok((u, v))
}

/// `ρ̂(N)`: mean of `σ_u σ_v` (or of its FK counterpart `1{u ↔ v}`) over a
/// stream recorded on a grid at least four times the separation.
pub fn two_point_rho(separation: usize, n_side: usize, pair_values: &[f64]) -> Result<Estimate> {
    diagonal_pair(n_side, separation)?;
    if separation == 0 {
        return Ok(Estimate::exact(1.0));
    }
    Ok(batch_mean(pair_values))
}

/// `a² ρ̂^{−1/2}`.
pub fn theta_empirical(a: f64, rho_hat: f64) -> Result<f64> {
    if !(rho_hat > 0.0) || !rho_hat.is_finite() {
        return invalid(format!("rho_hat must be positive, got {rho_hat}"));
    }
    Ok(a * a / rho_hat.sqrt())
}

/// Inner square of an annulus whose inner-to-outer side ratio is
/// `1/eps_inv`, centred in an `n_side` grid. `None` when the annulus is
/// empty (`eps_inv = 1`).
pub fn one_arm_inner_block(n_side: usize, eps_inv: usize) -> Result<Option<SubSquare>> {
    if eps_inv == 0 || n_side % eps_inv != 0 {
        return invalid(format!("1/{eps_inv} does not resolve on a grid of side {n_side}"));
    }
    let side = n_side / eps_inv;
    if side >= n_side {
        return Ok(None);
    }
    let o = (n_side - side) / 2;
    Ok(Some(SubSquare::new(o, o, side)))
}

/// `α̂₁`: frequency of the inner-square-to-boundary connection. An empty
/// annulus has probability one.
pub fn one_arm_alpha1(n_side: usize, eps_inv: usize, indicators: &[f64]) -> Result<Estimate> {
    match one_arm_inner_block(n_side, eps_inv)? {
        None => Ok(Estimate::exact(1.0)),
        Some(_) => Ok(batch_mean(indicators)),
    }
}

/// `β(ε) = ε² / α̂₁(ε)`.
pub fn beta_epsilon(eps_inv: usize, alpha1: f64) -> Result<f64> {
    if !(alpha1 > 0.0) {
        return invalid(format!("one-arm probability must be positive, got {alpha1}"));
    }
    let eps = 1.0 / eps_inv as f64;
    Ok(eps * eps / alpha1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub mean: Estimate,
    pub variance: Estimate,
    pub skewness: Option<Estimate>,
    /// `E[(m − m̄)⁴] / (3 E[(m − m̄)²]²)`; `None` for a degenerate series.
    pub kurtosis_ratio: Option<Estimate>,
    /// Raw moments `E[m^k]`, `k = 1..=8`.
    pub raw: Vec<Estimate>,
    pub flagged: bool,
}

fn central(ps: &PowerSums) -> (f64, f64, f64, f64) {
    let m1 = ps.raw(1);
    let (r2, r3, r4) = (ps.raw(2), ps.raw(3), ps.raw(4));
    let c2 = r2 - m1 * m1;
    let c3 = r3 - 3.0 * m1 * r2 + 2.0 * m1.powi(3);
    let c4 = r4 - 4.0 * m1 * r3 + 6.0 * m1 * m1 * r2 - 3.0 * m1.powi(4);
    (m1, c2.max(0.0), c3, c4)
}

pub fn moments(samples: &[f64]) -> Result<MomentsReport> {
    if samples.len() < 2 {
        return invalid("need at least two samples");
    }
    let mean = batch_mean(samples);
    let variance = jackknife(samples, |p| central(p).1);
    let scale = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let degenerate = variance.value <= 1e-24 * scale.max(1e-300).powi(2);
    let skewness = (!degenerate).then(|| jackknife(samples, |p| {
        let (_, c2, c3, _) = central(p);
        c3 / c2.powf(1.5)
    }));
    let kurtosis_ratio = (!degenerate).then(|| jackknife(samples, |p| {
        let (_, c2, _, c4) = central(p);
        c4 / (3.0 * c2 * c2)
    }));
    let raw = (1..=MAX_ORDER).map(|k| jackknife(samples, move |p| p.raw(k))).collect();
    Ok(MomentsReport { flagged: mean.flagged, mean, variance, skewness, kurtosis_ratio, raw })
}

/// `log mean e^{t m}` with a max shift.
pub fn log_mgf(samples: &[f64], t: f64) -> f64 {
    let shift = samples.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(t * x));
    let s: f64 = samples.iter().map(|&x| (t * x - shift).exp()).sum();
    shift + (s / samples.len() as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdDifference {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

fn third_difference(samples: &[f64], t: f64, h: f64) -> f64 {
    let l = |s: f64| log_mgf(samples, s);
    (l(t + h) - 3.0 * l(t) + 3.0 * l(t - h) - l(t - 2.0 * h)) / (h * h * h)
}

/// Third finite differences of `L(t) = log E[e^{t m}]` on the grid
/// `0, h, …, t_max`, with block-bootstrap errors (200 resamples of 32
/// batches, fixed seed).
pub fn mgf_concavity_check(samples: &[f64], h: f64, t_max: f64) -> Result<Vec<ThirdDifference>> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    if !(h > 0.0) || !(t_max >= 0.0) {
        return invalid(format!("empty t grid (h = {h}, t_max = {t_max})"));
    }
    let steps = (t_max / h + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    let len = (samples.len() / N_BATCHES).max(1);
    let batches: Vec<&[f64]> = samples.chunks(len).collect();
    let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(0x6d67_6663);
    const RESAMPLES: usize = 200;
    let mut boot = vec![Vec::with_capacity(RESAMPLES); grid.len()];
    let mut resample = Vec::with_capacity(samples.len());
    for _ in 0..RESAMPLES {
        resample.clear();
        for _ in 0..batches.len() {
            resample.extend_from_slice(batches[rng.gen_range(0..batches.len())]);
        }
        for (i, &t) in grid.iter().enumerate() {
            boot[i].push(third_difference(&resample, t, h));
        }
    }
    Ok(grid
        .iter()
        .zip(boot)
        .map(|(&t, reps)| {
            let m = reps.iter().sum::<f64>() / reps.len() as f64;
            let sd = (reps.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt();
            ThirdDifference { t, value: third_difference(samples, t, h), stderr: sd }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFnCheck {
    /// `max_t |Ê[e^{itm}] − Σ_{k ≤ k_max} (it)^k Ê[m^k]/k!|`.
    pub max_discrepancy: f64,
    /// `max_t Ê|m|^{k_max+1} |t|^{k_max+1} / (k_max+1)!`.
    pub truncation_bound: f64,
    /// Largest batch-means error of the empirical real or imaginary part.
    pub stat_error: f64,
}

impl CharFnCheck {
    pub fn consistent(&self) -> bool {
        self.max_discrepancy <= self.truncation_bound + 3.0 * self.stat_error
    }
}

pub fn char_function_check(samples: &[f64], t_grid: &[f64], k_max: usize) -> Result<CharFnCheck> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    let n = samples.len() as f64;
    let raw: Vec<f64> = (0..=k_max).map(|k| samples.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n).collect();
    let abs_next = samples.iter().map(|x| x.abs().powi(k_max as i32 + 1)).sum::<f64>() / n;
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let mut out = CharFnCheck { max_discrepancy: 0.0, truncation_bound: 0.0, stat_error: 0.0 };
    for &t in t_grid {
        let cos: Vec<f64> = samples.iter().map(|x| (t * x).cos()).collect();
        let sin: Vec<f64> = samples.iter().map(|x| (t * x).sin()).collect();
        let (re_e, im_e) = (batch_mean(&cos), batch_mean(&sin));
        // Σ (it)^k E[m^k] / k!, with i^k cycling 1, i, −1, −i
        let (mut re_s, mut im_s) = (0.0, 0.0);
        for (k, &r) in raw.iter().enumerate() {
            let term = t.powi(k as i32) * r / fact(k);
            match k % 4 {
                0 => re_s += term,
                1 => im_s += term,
                2 => re_s -= term,
                _ => im_s -= term,
            }
        }
        let d = ((re_e.value - re_s).powi(2) + (im_e.value - im_s).powi(2)).sqrt();
        out.max_discrepancy = out.max_discrepancy.max(d);
        out.truncation_bound =
            out.truncation_bound.max(abs_next * t.abs().powi(k_max as i32 + 1) / fact(k_max + 1));
        for e in [re_e.stderr, im_e.stderr] {
            if e.is_finite() {
                out.stat_error = out.stat_error.max(e);
            }
        }
    }
    Ok(out)
}

/// Sites of the cells containing the continuum points `z_1..z_k`.
pub fn kpoint_sites(n_side: usize, points: &[(f64, f64)]) -> Result<Vec<usize>> {
    if points.is_empty() || points.len() > 6 {
        return invalid(format!("k must be between 1 and 6, got {}", points.len()));
    }
    let mut sites = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return invalid(format!("point ({x}, {y}) is not inside the unit square"));
        }
        let c = ((x * n_side as f64) as usize).min(n_side - 1);
        let r = ((y * n_side as f64) as usize).min(n_side - 1);
        let s = r * n_side + c;
        if sites.contains(&s) {
            return invalid(format!("point ({x}, {y}) coincides with another point at this mesh"));
        }
        sites.push(s);
    }
    Ok(sites)
}

/// Scaled `k`-point function: normalizer times the mean spin product.
pub fn kpoint_scaled(products: &[f64], k: usize, mesh: f64, scheme: &RenormScheme) -> Result<Estimate> {
    let norm = scheme.kpoint_normalizer(mesh, k)?;
    let e = batch_mean(products);
    Ok(Estimate { value: norm * e.value, stderr: norm * e.stderr, ..e })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub n1: usize,
    pub n2: usize,
    /// Set when either sample has fewer than 1000 values.
    pub flagged: bool,
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return invalid("empty sample");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        let v = if x[i].total_cmp(&y[j]).is_le() { x[i] } else { y[j] };
        while i < n1 && x[i] == v {
            i += 1;
        }
        while j < n2 && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    Ok(KsResult { d, n1, n2, flagged: n1 < 1000 || n2 < 1000 })
}

/// KS between `M_N / N^{15/8}` and `M_{2N} / (2N)^{15/8}` given raw spin sums.
pub fn scale_covariance_ks(n: usize, sums_n: &[f64], sums_2n: &[f64]) -> Result<KsResult> {
    let s1 = (n as f64).powf(15.0 / 8.0);
    let s2 = (2.0 * n as f64).powf(15.0 / 8.0);
    let a: Vec<f64> = sums_n.iter().map(|m| m / s1).collect();
    let b: Vec<f64> = sums_2n.iter().map(|m| m / s2).collect();
    ks_two_sample(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residual_norm: f64,
}

/// (Weighted) least squares of `log y` on `log x`.
pub fn loglog_fit(points: &[(f64, f64)], weights: Option<&[f64]>) -> Result<FitResult> {
    if points.len() < 3 {
        return invalid(format!("need at least 3 points, got {}", points.len()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return invalid("log-log fit needs positive x and y");
    }
    if let Some(w) = weights {
        if w.len() != points.len() || w.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return invalid("weights must be positive and match the points");
        }
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sw: f64 = (0..lx.len()).map(w).sum();
    let mx = (0..lx.len()).map(|i| w(i) * lx[i]).sum::<f64>() / sw;
    let my = (0..lx.len()).map(|i| w(i) * ly[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..lx.len()).map(|i| w(i) * (lx[i] - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all x values coincide");
    }
    let sxy: f64 = (0..lx.len()).map(|i| w(i) * (lx[i] - mx) * (ly[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..lx.len()).map(|i| w(i) * (ly[i] - intercept - slope * lx[i]).powi(2)).sum();
    let dof = (lx.len() - 2) as f64;
    let slope_stderr = match weights {
        // inverse-variance weights: the parameter covariance is 1/Sxx
        Some(_) => (1.0 / sxx).sqrt(),
        None => (rss / dof / sxx).sqrt(),
    };
    Ok(FitResult { slope, intercept, slope_stderr, residual_norm: rss.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::split;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn batch_mean_flags_short_series() {
        let e = batch_mean(&[1.0, 2.0, 3.0]);
        assert!(e.flagged);
        assert_eq!(e.value, 2.0);
        let long: Vec<f64> = (0..3200).map(|i| (i % 2) as f64).collect();
        let e = batch_mean(&long);
        assert!(!e.flagged);
        assert_eq!(e.value, 0.5);
    }

    #[test]
    fn two_point_geometry() {
        assert_eq!(two_point_rho(0, 8, &[]).unwrap().value, 1.0);
        assert!(two_point_rho(4, 15, &[1.0]).is_err());
        let (u, v) = diagonal_pair(16, 4).unwrap();
        assert_eq!((u / 16, u % 16), (6, 6));
        assert_eq!((v / 16, v % 16), (10, 10));
    }

    #[test]
    fn theta_identities() {
        for a in [0.5f64, 1.0 / 64.0, 1e-3] {
            let t = theta_empirical(a, a.powf(0.25)).unwrap();
            assert!((t - a.powf(15.0 / 8.0)).abs() < 1e-14 * t);
        }
        assert_eq!(theta_empirical(1.0, 1.0).unwrap(), 1.0);
        assert!(theta_empirical(0.5, 0.0).is_err());
        assert!(theta_empirical(0.5, -0.1).is_err());
    }

    #[test]
    fn one_arm_degenerate_annulus() {
        assert_eq!(one_arm_alpha1(32, 1, &[]).unwrap().value, 1.0);
        let b = one_arm_inner_block(32, 4).unwrap().unwrap();
        assert_eq!((b.row, b.col, b.side), (12, 12, 8));
        assert!(one_arm_inner_block(32, 3).is_err());
        assert!((beta_epsilon(4, 0.5).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn constant_series_has_no_kurtosis() {
        let r = moments(&vec![2.5; 1000]).unwrap();
        assert_eq!(r.mean.value, 2.5);
        assert!(r.variance.value.abs() < 1e-12);
        assert!(r.kurtosis_ratio.is_none());
    }

    #[test]
    fn fair_coin_moments() {
        let mut rng = split(17, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let r = moments(&xs).unwrap();
        assert!(r.mean.z_score(0.0).abs() < 3.0);
        let k = r.kurtosis_ratio.unwrap();
        assert!(k.z_score(1.0 / 3.0).abs() < 3.0, "{k:?}");
        assert!(!r.flagged);
    }

    #[test]
    fn gaussian_kurtosis_ratio_is_one() {
        let mut rng = split(18, 0);
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
                (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos() + 3.0
            })
            .collect();
        let k = moments(&xs).unwrap().kurtosis_ratio.unwrap();
        assert!(k.z_score(1.0).abs() < 3.0, "{k:?}");
    }

    #[test]
    fn log_mgf_handles_large_exponents() {
        let xs = vec![1000.0, 999.0];
        let l = log_mgf(&xs, 1.0);
        assert!((l - (1000.0 + ((1.0 + (-1.0f64).exp()) / 2.0).ln())).abs() < 1e-9);
        assert!(mgf_concavity_check(&xs, 0.1, -1.0).is_err());
        assert!(mgf_concavity_check(&xs, 0.0, 1.0).is_err());
        assert!(mgf_concavity_check(&[], 0.1, 1.0).is_err());
    }

    #[test]
    fn single_spin_third_difference_matches_closed_form() {
        // exact two-point law: P(±1) ∝ e^{±4β_c}
        let (beta_c, _) = crate::sampler::critical_constants();
        let h0 = 4.0 * beta_c;
        let p_plus = (h0.exp()) / (h0.exp() + (-h0).exp());
        let n = 1_000_000usize;
        let k = (p_plus * n as f64).round() as usize;
        let xs: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { -1.0 }).collect();
        let h = 0.01;
        for t in [0.5, 1.0, 2.0] {
            let d = third_difference(&xs, t, h);
            let tm = t - h / 2.0;
            let x = tm + h0;
            let exact = -2.0 / x.cosh().powi(2) * x.tanh();
            assert!((d - exact).abs() < 2e-3, "t={t}: {d} vs {exact}");
        }
    }

    #[test]
    fn symmetric_samples_have_flat_third_difference_at_zero() {
        let mut rng = split(19, 0);
        let half: Vec<f64> = (0..50_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut xs = Vec::with_capacity(100_000);
        for (i, &x) in half.iter().enumerate() {
            xs.push(x);
            if i % 2 == 0 {
                xs.push(-x);
            } else {
                xs.push(rng.gen_range(-1.0..1.0));
            }
        }
        let d = mgf_concavity_check(&xs, 0.1, 0.0).unwrap();
        assert_eq!(d.len(), 1);
        // centred at t = −h/2, the symmetric limit is −3κ₄ h/2 ≈ 0
        assert!(d[0].value.abs() < 3.0 * d[0].stderr + 0.02, "{:?}", d[0]);
    }

    #[test]
    fn char_function_trivial_and_gaussian() {
        let mut rng = split(20, 0);
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
                (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let c0 = char_function_check(&xs, &[0.0], 8).unwrap();
        assert_eq!(c0.max_discrepancy, 0.0);
        let c1 = char_function_check(&xs, &[1.0], 8).unwrap();
        assert!(c1.consistent());
        let emp = xs.iter().map(|x| x.cos()).sum::<f64>() / xs.len() as f64;
        assert!((emp - (-0.5f64).exp()).abs() < 0.01);
    }

    #[test]
    fn kpoint_validation() {
        assert!(kpoint_sites(8, &[(0.5, 0.5), (0.51, 0.52)]).is_err());
        assert!(kpoint_sites(8, &[]).is_err());
        assert!(kpoint_sites(8, &[(0.1, 0.1); 7]).is_err());
        assert_eq!(kpoint_sites(8, &[(0.01, 0.01), (0.99, 0.99)]).unwrap(), vec![0, 63]);
        let e = kpoint_scaled(&[0.5; 64], 2, 1.0 / 16.0, &RenormScheme::WuExponent).unwrap();
        assert!((e.value - 0.5 * 16f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn ks_extremes() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).unwrap().d, 0.0);
        let b: Vec<f64> = (0..50).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.d, 1.0);
        assert!(r.flagged);
    }

    #[test]
    fn ks_matches_brute_force() {
        let mut rng = split(22, 0);
        let a: Vec<f64> = (0..300).map(|_| (rng.gen_range(0..40) as f64) / 4.0).collect();
        let b: Vec<f64> = (0..200).map(|_| (rng.gen_range(0..50) as f64) / 5.0).collect();
        let mut brute = 0.0f64;
        for &v in a.iter().chain(&b) {
            let fa = a.iter().filter(|&&x| x <= v).count() as f64 / a.len() as f64;
            let fb = b.iter().filter(|&&x| x <= v).count() as f64 / b.len() as f64;
            brute = brute.max((fa - fb).abs());
        }
        assert!((ks_two_sample(&a, &b).unwrap().d - brute).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ks_invariant_under_monotone_maps(
            a in proptest::collection::vec(-5.0f64..5.0, 1..80),
            b in proptest::collection::vec(-5.0f64..5.0, 1..80),
        ) {
            let d = ks_two_sample(&a, &b).unwrap().d;
            let f = |x: &f64| x.exp() * 3.0 + 1.0;
            let fa: Vec<f64> = a.iter().map(f).collect();
            let fb: Vec<f64> = b.iter().map(f).collect();
            prop_assert!((ks_two_sample(&fa, &fb).unwrap().d - d).abs() < 1e-15);
        }
    }

    #[test]
    fn loglog_exact_power_laws() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&x| (x, 5.0 * x.powf(-0.25))).collect();
        let f = loglog_fit(&pts, None).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-14);
        assert!(f.residual_norm < 1e-14);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-14);
        let flat: Vec<(f64, f64)> = [1.0f64, 3.0, 9.0].iter().map(|&x| (x, 2.0)).collect();
        assert!(loglog_fit(&flat, None).unwrap().slope.abs() < 1e-15);
        assert!(loglog_fit(&pts[..2], None).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], None).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (-2.0, 1.0), (3.0, 1.0)], None).is_err());
    }
}
