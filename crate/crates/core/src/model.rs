//! Paired samples drawn from the Gaussian rotation model, with a quadrature
//! oracle for the population value of the dependence measure.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

/// Paired real observations `(x_i, y_i)`.
///
/// Always holds at least two finite pairs. `is_continuous` is true iff the
/// x values are pairwise distinct and the y values are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSample {
    x: Vec<f64>,
    y: Vec<f64>,
    continuous: bool,
}

impl BivariateSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::param(
                "sample",
                format!("x has {} values but y has {}", x.len(), y.len()),
            ));
        }
        if x.len() < 2 {
            return Err(Error::param("sample", "need at least two pairs"));
        }
        if let Some(pos) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::param(
                "sample",
                format!("non-finite value at position {}", pos % x.len()),
            ));
        }
        let continuous = all_distinct(&x) && all_distinct(&y);
        Ok(Self { x, y, continuous })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }

    /// Builds the sample in which pair `i` appears `counts[i]` times, in
    /// index order.
    pub fn repeat_by(&self, counts: &[u32]) -> Result<Self> {
        if counts.len() != self.len() {
            return Err(Error::param(
                "weights",
                format!("expected {} counts, got {}", self.len(), counts.len()),
            ));
        }
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        let mut x = Vec::with_capacity(total);
        let mut y = Vec::with_capacity(total);
        for (i, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                x.push(self.x[i]);
                y.push(self.y[i]);
            }
        }
        Self::new(x, y)
    }
}

pub(crate) fn all_distinct(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    s.windows(2).all(|w| w[0] != w[1])
}

/// Parameters of one draw from the bivariate Gaussian with unit variances
/// and correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub rho: f64,
    pub n: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(rho: f64, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { rho, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if self.n < 2 {
            return Err(Error::param("n", format!("need n >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::param(
            "rho",
            format!("must lie strictly inside (-1, 1), got {rho}"),
        ));
    }
    Ok(())
}

/// Draws `spec.n` pairs with `y = rho * x + sqrt(1 - rho^2) * z`.
pub fn gaussian_rotation_sample(spec: &ModelSpec) -> Result<BivariateSample> {
    gaussian_rotation_sample_traced(spec).map(|(s, _)| s)
}

/// Like [`gaussian_rotation_sample`], also returning how many times the draw
/// was regenerated because floating-point rounding produced a tie.
pub fn gaussian_rotation_sample_traced(spec: &ModelSpec) -> Result<(BivariateSample, u32)> {
    spec.validate()?;
    let scale = (1.0 - spec.rho * spec.rho).sqrt();
    for attempt in 0u32..64 {
        let seed = if attempt == 0 {
            spec.seed
        } else {
            derive_seed(spec.seed, &[u64::from(attempt)])
        };
        let mut rng = stream_rng(seed, 0);
        let mut x = Vec::with_capacity(spec.n);
        let mut y = Vec::with_capacity(spec.n);
        for _ in 0..spec.n {
            let a: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            x.push(a);
            y.push(spec.rho * a + scale * z);
        }
        let sample = BivariateSample::new(x, y)?;
        if sample.is_continuous() {
            return Ok((sample, attempt));
        }
    }
    Err(Error::Precondition(
        "could not draw a tie-free Gaussian sample in 64 attempts".into(),
    ))
}

/// Controls for [`true_xi_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    /// Target bound on the reported error estimate.
    pub tolerance: f64,
    /// Gauss-Legendre panels per unit length at the coarsest level.
    pub panels_per_unit: usize,
    pub max_refinements: u32,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            panels_per_unit: 2,
            max_refinements: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Population dependence measure of the Gaussian rotation model.
///
/// The denominator of the measure is `1/6` for any continuous `Y`, and
/// `P(Y >= y | X = x) = Phi((rho x - y) / s)` with `s = sqrt(1 - rho^2)`, so
///
/// ```text
/// xi = 6 * ( E[ Phi((rho X - y)/s)^2 ] integrated against dPhi(y)  -  1/3 ).
/// ```
///
/// The double integral is evaluated in coordinates `(x, u)` with
/// `y = rho x - s u`, which turns the steep edge of the conditional CDF into a
/// wide Gaussian factor. The error estimate is the change between two
/// successive panel refinements.
pub fn true_xi_oracle(rho: f64, settings: &OracleSettings) -> Result<OracleValue> {
    check_rho(rho)?;
    let rho = rho.abs();
    let s = (1.0 - rho * rho).sqrt();
    let mut panels = settings.panels_per_unit.max(1);
    let mut prev = integrate_squared_conditional(rho, s, panels);
    for _ in 0..settings.max_refinements {
        panels *= 2;
        let next = integrate_squared_conditional(rho, s, panels);
        let err = 6.0 * (next - prev).abs();
        if err <= settings.tolerance {
            let value = (6.0 * (next - 1.0 / 3.0)).clamp(0.0, 1.0);
            return Ok(OracleValue {
                value,
                error_estimate: err,
            });
        }
        prev = next;
    }
    Err(Error::Oracle(format!(
        "rho = {rho}: quadrature did not reach tolerance {} after {} refinements",
        settings.tolerance, settings.max_refinements
    )))
}

const HALF_WIDTH: f64 = 9.0;

fn integrate_squared_conditional(rho: f64, s: f64, panels_per_unit: usize) -> f64 {
    // integrand in (x, u): Phi(u)^2 * phi(x) * phi(rho x - s u) * s
    let outer = |x: f64| {
        let centre = rho * x / s;
        let half = HALF_WIDTH / s;
        let inner = |u: f64| {
            let p = normal_cdf(u);
            p * p * normal_pdf(rho * x - s * u) * s
        };
        gauss_legendre(inner, centre - half, centre + half, panels_per_unit)
    };
    gauss_legendre(
        |x| normal_pdf(x) * outer(x),
        -HALF_WIDTH,
        HALF_WIDTH,
        panels_per_unit,
    )
}

pub(crate) fn normal_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre rule.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels_per_unit: usize) -> f64 {
    let panels = (((b - a) * panels_per_unit as f64).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            acc += w * (f(mid - half * node) + f(mid + half * node));
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelSpec::new(1.0, 10, 0).is_err());
        assert!(ModelSpec::new(-1.0, 10, 0).is_err());
        assert!(ModelSpec::new(f64::NAN, 10, 0).is_err());
        assert!(ModelSpec::new(0.5, 1, 0).is_err());
        assert!(ModelSpec::new(0.999_999, 10, 0).is_ok());
        assert!(ModelSpec::new(0.9, 10, 0).is_ok());
    }

    #[test]
    fn sample_constructor_validates() {
        assert!(BivariateSample::new(vec![1.0], vec![1.0]).is_err());
        assert!(BivariateSample::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(BivariateSample::new(vec![1.0, f64::NAN], vec![1.0, 2.0]).is_err());
        let s = BivariateSample::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(!s.is_continuous());
        let s = BivariateSample::new(vec![1.0, 2.0], vec![2.0, 1.0]).unwrap();
        assert!(s.is_continuous());
    }

    #[test]
    fn identical_spec_gives_identical_sample() {
        let spec = ModelSpec::new(0.3, 200, 42).unwrap();
        let a = gaussian_rotation_sample(&spec).unwrap();
        let b = gaussian_rotation_sample(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.is_continuous());
        let c = gaussian_rotation_sample(&ModelSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn pearson_correlation_at_large_n() {
        let spec = ModelSpec::new(0.5, 1_000_000, 9).unwrap();
        let s = gaussian_rotation_sample(&spec).unwrap();
        let r = pearson(s.x(), s.y());
        assert!((r - 0.5).abs() < 0.005, "r = {r}");
    }

    #[test]
    fn independent_case_has_no_correlation() {
        // 250_000 samples of size 4 pooled: 10^6 pairs
        let mut x = Vec::new();
        let mut y = Vec::new();
        for seed in 0..250_000u64 {
            let s = gaussian_rotation_sample(&ModelSpec::new(0.0, 4, seed).unwrap()).unwrap();
            x.extend_from_slice(s.x());
            y.extend_from_slice(s.y());
        }
        let r = pearson(&x, &y);
        let se = 1.0 / (x.len() as f64).sqrt();
        assert!(r.abs() < 3.0 * se, "r = {r}, se = {se}");
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx).powi(2);
            syy += (b - my).powi(2);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn oracle_at_zero_and_symmetry() {
        let set = OracleSettings::default();
        let z = true_xi_oracle(0.0, &set).unwrap();
        assert!(z.value.abs() < 1e-10);
        for rho in [0.3, 0.7, 0.95] {
            let a = true_xi_oracle(rho, &set).unwrap().value;
            let b = true_xi_oracle(-rho, &set).unwrap().value;
            assert_eq!(a, b);
        }
        assert!(true_xi_oracle(1.0, &set).is_err());
    }

    #[test]
    fn oracle_regression_value_at_half() {
        // frozen from an independent scipy dblquad run in (x, y) coordinates
        let v = true_xi_oracle(0.5, &OracleSettings::default()).unwrap();
        assert!((v.value - 0.144_703_124_224_8).abs() < 1e-9, "{v:?}");
        assert!(v.error_estimate <= 0.002);
    }

    #[test]
    fn oracle_matches_known_closed_form() {
        // closed form from the literature, used only as a cross-check
        for rho in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let closed = 3.0 / std::f64::consts::PI * ((1.0 + rho * rho) / 2.0_f64).asin() - 0.5;
            let v = true_xi_oracle(rho, &OracleSettings::default())
                .unwrap()
                .value;
            assert!((v - closed).abs() < 1e-8, "rho {rho}: {v} vs {closed}");
        }
    }

    #[test]
    fn oracle_is_monotone_and_in_range() {
        let grid = [0.0, 0.3, 0.5, 0.7, 0.9];
        let vals: Vec<f64> = grid
            .iter()
            .map(|&r| true_xi_oracle(r, &OracleSettings::default()).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1] + 0.002));
        assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn oracle_nonconvergence_is_reported() {
        let set = OracleSettings {
            tolerance: 0.0,
            panels_per_unit: 1,
            max_refinements: 1,
        };
        assert!(matches!(true_xi_oracle(0.5, &set), Err(Error::Oracle(_))));
    }
}
