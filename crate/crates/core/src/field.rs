//! The renormalized magnetization field as a piecewise-constant function on
//! the unit square, its sine-basis coefficients and negative Sobolev norms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{LatticeSpec, SubSquare};
use crate::sampler::SpinConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenormScheme {
    /// `Θ_a = a^{15/8}`.
    WuExponent,
    /// `Θ_a = a² ρ̂(a)^{−1/2}` from a measured two-point value.
    Empirical { rho_hat: f64 },
}

impl RenormScheme {
    pub fn theta(&self, mesh: f64) -> Result<f64> {
        match *self {
            RenormScheme::WuExponent => Ok(mesh.powf(15.0 / 8.0)),
            RenormScheme::Empirical { rho_hat } => crate::estimators::theta_empirical(mesh, rho_hat),
        }
    }

    /// Normalizer for a `k`-point spin product: `a^{−k/8}` or `ρ̂^{−k/2}`.
    pub fn kpoint_normalizer(&self, mesh: f64, k: usize) -> Result<f64> {
        match *self {
            RenormScheme::WuExponent => Ok(mesh.powf(-(k as f64) / 8.0)),
            RenormScheme::Empirical { rho_hat } => {
                if !(rho_hat > 0.0) {
                    return invalid(format!("rho_hat must be positive, got {rho_hat}"));
                }
                Ok(rho_hat.powf(-(k as f64) / 2.0))
            }
        }
    }
}

/// Cell values `Θ_a σ_x / a²`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    n_side: usize,
    values: Vec<f64>,
}

pub fn field_from_spins(spec: &LatticeSpec, spins: &SpinConfig, scheme: &RenormScheme) -> Result<FieldGrid> {
    let a = spec.mesh();
    let height = scheme.theta(a)? / (a * a);
    Ok(FieldGrid {
        n_side: spec.n_side(),
        values: spins.spins().iter().map(|&s| height * s as f64).collect(),
    })
}

/// `Θ_a Σ_x σ_x`.
pub fn magnetization(spec: &LatticeSpec, spins: &SpinConfig, scheme: &RenormScheme) -> Result<f64> {
    Ok(scheme.theta(spec.mesh())? * spins.spin_sum() as f64)
}

impl FieldGrid {
    pub fn from_values(n_side: usize, values: Vec<f64>) -> Result<Self> {
        if n_side == 0 || values.len() != n_side * n_side {
            return invalid(format!("expected {} cell values, got {}", n_side * n_side, values.len()));
        }
        Ok(FieldGrid { n_side, values })
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        let a = 1.0 / self.n_side as f64;
        self.values.iter().sum::<f64>() * a * a
    }

    /// The field times the indicator of `sub`.
    pub fn restricted(&self, sub: &SubSquare) -> FieldGrid {
        let n = self.n_side;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if sub.contains(crate::lattice::Site::new(i / n, i % n)) { v } else { 0.0 })
            .collect();
        FieldGrid { n_side: n, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Add for &FieldGrid {
    type Output = FieldGrid;

    fn add(self, rhs: &FieldGrid) -> FieldGrid {
        assert_eq!(self.n_side, rhs.n_side);
        FieldGrid {
            n_side: self.n_side,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `∫_{c/n}^{(c+1)/n} sin(jπx) dx`, in the product form
/// `2 sin(jπ(2c+1)/2n) sin(jπ/2n) / (jπ)` which avoids the cancellation in
/// the difference of cosines.
fn cell_sine_integral(j: usize, c: usize, n: usize) -> f64 {
    let jf = j as f64;
    let nf = n as f64;
    2.0 * (jf * PI * (2 * c + 1) as f64 / (2.0 * nf)).sin() * (jf * PI / (2.0 * nf)).sin() / (jf * PI)
}

fn sine_table(j_max: usize, n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(j_max * n);
    for j in 1..=j_max {
        for c in 0..n {
            t.push(cell_sine_integral(j, c, n));
        }
    }
    t
}

/// `⟨field, e_{j,k}⟩` with `e_{j,k}(x, y) = 2 sin(jπx) sin(kπy)`, by exact
/// per-cell integration.
pub fn fourier_coefficient(field: &FieldGrid, j: i64, k: i64) -> Result<f64> {
    if j < 1 || k < 1 {
        return invalid(format!("basis indices must be positive, got ({j}, {k})"));
    }
    let n = field.n_side;
    let (j, k) = (j as usize, k as usize);
    let sx: Vec<f64> = (0..n).map(|c| cell_sine_integral(j, c, n)).collect();
    let mut acc = 0.0;
    for r in 0..n {
        let sy = cell_sine_integral(k, r, n);
        let row: f64 = field.values[r * n..(r + 1) * n].iter().zip(&sx).map(|(v, s)| v * s).sum();
        acc += sy * row;
    }
    Ok(2.0 * acc)
}

/// Coefficients `a_{j,k}` for `1 ≤ j, k ≤ j_max`, with `j` the x index.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevCoeffs {
    j_max: usize,
    a: Vec<f64>,
    /// Uniform bound on `|a_{j,k}|` over all `(j, k)`, used for the tail.
    coeff_bound: f64,
}

impl SobolevCoeffs {
    /// From explicit values in `(j, k)` row-major order; the tail bound
    /// then uses the largest given magnitude.
    pub fn from_values(j_max: usize, a: Vec<f64>) -> Result<Self> {
        if j_max == 0 || a.len() != j_max * j_max {
            return invalid(format!("expected {} coefficients, got {}", j_max * j_max, a.len()));
        }
        let coeff_bound = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(SobolevCoeffs { j_max, a, coeff_bound })
    }

    /// Every coefficient up to `j_max`, via the separable cell integrals.
    pub fn compute(field: &FieldGrid, j_max: usize) -> Result<Self> {
        if j_max == 0 {
            return invalid("j_max must be positive");
        }
        let n = field.n_side;
        let s = sine_table(j_max, n);
        // t[r][j] = Σ_c v[r][c] S_j(c)
        let mut t = vec![0.0; n * j_max];
        for r in 0..n {
            let row = &field.values[r * n..(r + 1) * n];
            for j in 0..j_max {
                let sj = &s[j * n..(j + 1) * n];
                t[r * j_max + j] = row.iter().zip(sj).map(|(v, w)| v * w).sum();
            }
        }
        let mut a = vec![0.0; j_max * j_max];
        for k in 0..j_max {
            let sk = &s[k * n..(k + 1) * n];
            for j in 0..j_max {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += sk[r] * t[r * j_max + j];
                }
                a[j * j_max + k] = 2.0 * acc;
            }
        }
        // Σ_c |∫_cell sin(jπx)| ≤ ∫_0^1 |sin(jπx)| = 2/π in each direction
        let coeff_bound = 2.0 * field.max_abs() * (2.0 / PI) * (2.0 / PI);
        Ok(SobolevCoeffs { j_max, a, coeff_bound })
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.a[(j - 1) * self.j_max + (k - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorm {
    /// Truncated sum `Σ_{j,k ≤ J} a_{j,k}² (j² + k²)^{−α}`.
    pub value: f64,
    /// Bound on the omitted terms: `sup|a|² · Σ_{max(j,k) > J} (j²+k²)^{−α}`;
    /// infinite for `α ≤ 1`.
    pub tail_bound: f64,
}

/// Upper bound on `Σ_{max(j,k) > J} (j² + k²)^{−α}` for `α > 1`.
fn weight_tail(j_max: usize, alpha: f64) -> f64 {
    if alpha <= 1.0 {
        return f64::INFINITY;
    }
    let jm = j_max as f64;
    // ∫_0^∞ (1 + u²)^{−α} du
    let c = PI.sqrt() * libm::tgamma(alpha - 0.5) / (2.0 * libm::tgamma(alpha));
    // Σ_{j > J} j^{−s} ≤ J^{1−s}/(s−1)
    let tail_sum = |s: f64| jm.powf(1.0 - s) / (s - 1.0);
    // by symmetry count j > J (all k ≥ 1) twice; per row the k-sum is at
    // most j^{−2α} + c j^{1−2α}
    2.0 * (tail_sum(2.0 * alpha) + c * tail_sum(2.0 * alpha - 1.0))
}

pub fn sobolev_norm_sq(coeffs: &SobolevCoeffs, alpha: f64) -> Result<SobolevNorm> {
    if !(alpha >= 0.0) {
        return invalid(format!("alpha must be non-negative, got {alpha}"));
    }
    let jm = coeffs.j_max;
    let mut value = 0.0;
    for j in 1..=jm {
        for k in 1..=jm {
            let a = coeffs.a[(j - 1) * jm + (k - 1)];
            value += a * a / ((j * j + k * k) as f64).powf(alpha);
        }
    }
    let tail_bound = coeffs.coeff_bound * coeffs.coeff_bound * weight_tail(jm, alpha);
    Ok(SobolevNorm { value, tail_bound })
}

/// Default truncation order `max(64, 2N)`.
pub fn default_j_max(n_side: usize) -> usize {
    64.max(2 * n_side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, BoundaryCondition};
    use crate::rng::split;
    use proptest::prelude::*;

    #[test]
    fn all_plus_cell_height() {
        let spec = build_lattice(4, BoundaryCondition::Plus).unwrap();
        let spins = SpinConfig::uniform(&spec, 1);
        let f = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
        for &v in f.values() {
            assert!((v - 4f64.powf(1.0 / 8.0)).abs() < 1e-14);
            assert!((v - 1.189_207_115_002_721).abs() < 1e-12);
        }
    }

    #[test]
    fn magnetization_closed_forms() {
        let spec = build_lattice(4, BoundaryCondition::Free).unwrap();
        let wu = RenormScheme::WuExponent;
        let plus = SpinConfig::uniform(&spec, 1);
        let minus = SpinConfig::uniform(&spec, -1);
        let m = magnetization(&spec, &plus, &wu).unwrap();
        assert!((m - 2f64.powf(0.25)).abs() < 1e-14);
        assert!((magnetization(&spec, &minus, &wu).unwrap() + m).abs() < 1e-15);
        let half: Vec<i8> = (0..16).map(|i| if i < 8 { 1 } else { -1 }).collect();
        let half = SpinConfig::from_spins(&spec, half).unwrap();
        assert_eq!(magnetization(&spec, &half, &wu).unwrap(), 0.0);
        let f = field_from_spins(&spec, &plus, &wu).unwrap();
        assert!((f.integral() - m).abs() < 1e-14);
    }

    #[test]
    fn flip_negates_field() {
        let spec = build_lattice(8, BoundaryCondition::Free).unwrap();
        let mut rng = split(1, 0);
        let spins = SpinConfig::random(&spec, &mut rng);
        let mut flipped = spins.clone();
        flipped.flip_all();
        let a = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
        let b = field_from_spins(&spec, &flipped, &RenormScheme::WuExponent).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn empirical_scheme_matches_wu_on_exact_power_law() {
        let spec = build_lattice(16, BoundaryCondition::Free).unwrap();
        let a = spec.mesh();
        let mut rng = split(2, 0);
        let spins = SpinConfig::random(&spec, &mut rng);
        let wu = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
        let emp = field_from_spins(&spec, &spins, &RenormScheme::Empirical { rho_hat: a.powf(0.25) }).unwrap();
        for (x, y) in wu.values().iter().zip(emp.values()) {
            assert!((x - y).abs() < 1e-12 * x.abs());
        }
        assert!(field_from_spins(&spec, &spins, &RenormScheme::Empirical { rho_hat: 0.0 }).is_err());
        assert!(magnetization(&spec, &spins, &RenormScheme::Empirical { rho_hat: -1.0 }).is_err());
    }

    #[test]
    fn coefficients_of_simple_fields() {
        let zero = FieldGrid::from_values(8, vec![0.0; 64]).unwrap();
        assert_eq!(fourier_coefficient(&zero, 3, 5).unwrap(), 0.0);
        let one = FieldGrid::from_values(8, vec![1.0; 64]).unwrap();
        let c11 = fourier_coefficient(&one, 1, 1).unwrap();
        assert!((c11 - 8.0 / (PI * PI)).abs() < 1e-14);
        assert!((c11 - 0.810_569_469_138_702_3).abs() < 1e-12);
        assert!(fourier_coefficient(&one, 2, 1).unwrap().abs() < 1e-15);
        assert!(fourier_coefficient(&one, 0, 1).is_err());
        assert!(fourier_coefficient(&one, 1, -2).is_err());
    }

    #[test]
    fn table_matches_direct_coefficient() {
        let spec = build_lattice(8, BoundaryCondition::Free).unwrap();
        let mut rng = split(3, 0);
        let spins = SpinConfig::random(&spec, &mut rng);
        let f = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
        let c = SobolevCoeffs::compute(&f, 12).unwrap();
        for j in 1..=12 {
            for k in 1..=12 {
                let d = fourier_coefficient(&f, j as i64, k as i64).unwrap();
                assert!((c.get(j, k) - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_basis_function_recovers_its_coefficient() {
        // cell averages of e_{J,K}: coefficient (J, K) tends to 1 and the
        // off-diagonal ones vanish by orthogonality of the sampled sines
        let (jj, kk) = (2usize, 3usize);
        let mut prev_err = f64::INFINITY;
        for n in [16usize, 32, 64, 128] {
            let a = 1.0 / n as f64;
            let values = (0..n * n)
                .map(|i| {
                    let (r, c) = (i / n, i % n);
                    2.0 * cell_sine_integral(jj, c, n) * cell_sine_integral(kk, r, n) / (a * a)
                })
                .collect();
            let f = FieldGrid::from_values(n, values).unwrap();
            let diag = fourier_coefficient(&f, jj as i64, kk as i64).unwrap();
            let err = (diag - 1.0).abs();
            assert!(err < prev_err);
            // per-direction L2 mass lost to the cell average is O((jπa)²)
            assert!(err < 2.0 * (kk as f64 * PI * a).powi(2));
            prev_err = err;
            assert!(fourier_coefficient(&f, 1, 3).unwrap().abs() < 1e-12);
            assert!(fourier_coefficient(&f, 2, 2).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn single_term_norms() {
        let mut a = vec![0.0; 4];
        a[0] = 1.0;
        let c = SobolevCoeffs::from_values(2, a).unwrap();
        assert!((sobolev_norm_sq(&c, 3.0).unwrap().value - 0.125).abs() < 1e-15);
        let mut a = vec![0.0; 4];
        a[1] = 1.0; // (j, k) = (1, 2)
        let c = SobolevCoeffs::from_values(2, a).unwrap();
        assert!((sobolev_norm_sq(&c, 2.0).unwrap().value - 0.04).abs() < 1e-15);
        assert!(sobolev_norm_sq(&c, -0.5).is_err());
    }

    #[test]
    fn truncation_consistent_with_tail_bound() {
        let spec = build_lattice(32, BoundaryCondition::Plus).unwrap();
        let mut rng = split(4, 0);
        let spins = SpinConfig::random(&spec, &mut rng);
        let f = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
        let lo = sobolev_norm_sq(&SobolevCoeffs::compute(&f, 64).unwrap(), 2.0).unwrap();
        let hi = sobolev_norm_sq(&SobolevCoeffs::compute(&f, 128).unwrap(), 2.0).unwrap();
        assert!(hi.value >= lo.value);
        assert!(hi.value - lo.value <= lo.tail_bound, "{} > {}", hi.value - lo.value, lo.tail_bound);
        assert!(hi.tail_bound < lo.tail_bound);
    }

    #[test]
    fn tail_weight_bound_is_an_upper_bound() {
        for (jm, alpha) in [(8usize, 2.0f64), (16, 1.5), (10, 3.0)] {
            let mut brute = 0.0;
            for j in 1..=4000usize {
                for k in 1..=4000usize {
                    if j > jm || k > jm {
                        brute += 1.0 / ((j * j + k * k) as f64).powf(alpha);
                    }
                }
            }
            let bound = weight_tail(jm, alpha);
            assert!(brute <= bound, "{brute} > {bound}");
            assert!(bound < 3.0 * brute);
        }
        assert!(weight_tail(10, 1.0).is_infinite());
    }

    proptest! {
        #[test]
        fn coefficients_are_linear(seed in any::<u64>(), j in 1i64..20, k in 1i64..20) {
            let mut rng = split(seed, 0);
            use rand::Rng;
            let f = FieldGrid::from_values(8, (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            let g = FieldGrid::from_values(8, (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            let lhs = fourier_coefficient(&(&f + &g), j, k).unwrap();
            let rhs = fourier_coefficient(&f, j, k).unwrap() + fourier_coefficient(&g, j, k).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn norm_nonincreasing_in_alpha(seed in any::<u64>(), a1 in 0.0f64..4.0, da in 0.0f64..2.0) {
            let mut rng = split(seed, 1);
            use rand::Rng;
            let c = SobolevCoeffs::from_values(6, (0..36).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let lo = sobolev_norm_sq(&c, a1).unwrap().value;
            let hi = sobolev_norm_sq(&c, a1 + da).unwrap().value;
            prop_assert!(hi <= lo * (1.0 + 1e-12));
        }

        #[test]
        fn integral_equals_magnetization(seed in any::<u64>(), log_n in 1u32..6) {
            let n = 1usize << log_n;
            let spec = build_lattice(n, BoundaryCondition::Free).unwrap();
            let mut rng = split(seed, 2);
            let spins = SpinConfig::random(&spec, &mut rng);
            let f = field_from_spins(&spec, &spins, &RenormScheme::WuExponent).unwrap();
            let m = magnetization(&spec, &spins, &RenormScheme::WuExponent).unwrap();
            prop_assert!((f.integral() - m).abs() <= 1e-12 * (1.0 + m.abs()));
        }
    }
}
