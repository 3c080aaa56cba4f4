//! Bivariate model built from three independent latent lifetimes
//! `U_i ~ EGWGD(a, b, c, d, α_i)` as `X_1 = max(U_1, U_3)`,
//! `X_2 = max(U_2, U_3)`.
//!
//! The shared factor `U_3` puts positive probability on the line
//! `x_1 = x_2`, so the law is a mixture of an absolutely continuous part
//! (densities `f_1` below and `f_2` above the diagonal) and a singular part
//! with a one-dimensional density `f_3` along the diagonal. Functions that
//! return densities tag them with a [`Region`] so the two kinds are never
//! mixed up.

use std::cell::RefCell;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::egwg::{check_point, Baseline, EgwgParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_log_scale, QuadratureConfig};

/// Which side of the diagonal a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `x_1 < x_2`
    Below,
    /// `x_1 > x_2`
    Above,
    /// `x_1 = x_2`; values tagged with this are densities along the line.
    Diagonal,
}

impl Region {
    /// Exact comparison; no tie tolerance is applied to analytic evaluation.
    pub fn of(x1: f64, x2: f64) -> Self {
        if x1 < x2 {
            Region::Below
        } else if x1 > x2 {
            Region::Above
        } else {
            Region::Diagonal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Below => "below",
            Region::Above => "above",
            Region::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the two observed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    First,
    Second,
}

impl Component {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Component::First),
            2 => Ok(Component::Second),
            _ => Err(Error::domain(format!("component index must be 1 or 2, got {i}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Component::First => Component::Second,
            Component::Second => Component::First,
        }
    }
}

/// Probability carried by each part of the joint law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassDecomposition {
    /// `∫∫_{x_1 < x_2} f_1`
    pub below: f64,
    /// `∫∫_{x_1 > x_2} f_2`
    pub above: f64,
    /// `∫ f_3(x, x) dx`, the probability of a tie.
    pub diagonal: f64,
}

impl MassDecomposition {
    pub fn total(&self) -> f64 {
        self.below + self.above + self.diagonal
    }
}

/// Shared baseline `(a, b, c, d)` with shape triple `(α_1, α_2, α_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BegwgParams {
    base: Baseline,
    alpha: [f64; 3],
}

impl BegwgParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha1: f64, alpha2: f64, alpha3: f64) -> Result<Self> {
        Self::from_baseline(Baseline::new(a, b, c, d)?, [alpha1, alpha2, alpha3])
    }

    pub fn from_baseline(base: Baseline, alpha: [f64; 3]) -> Result<Self> {
        for (name, v) in ["alpha1", "alpha2", "alpha3"].into_iter().zip(alpha) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        Ok(Self { base, alpha })
    }

    pub fn baseline(&self) -> &Baseline {
        &self.base
    }
    pub fn alphas(&self) -> [f64; 3] {
        self.alpha
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha[0]
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha[1]
    }
    pub fn alpha3(&self) -> f64 {
        self.alpha[2]
    }
    fn alpha_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    fn univariate(&self, alpha: f64) -> EgwgParams {
        EgwgParams::from_baseline(self.base, alpha).expect("positive shapes stay positive")
    }

    /// Law of `U_i`, `i ∈ {1, 2, 3}`.
    pub fn latent(&self, i: usize) -> Result<EgwgParams> {
        match i {
            1..=3 => Ok(self.univariate(self.alpha[i - 1])),
            _ => Err(Error::domain(format!("latent index must be 1, 2 or 3, got {i}"))),
        }
    }

    /// Law of `X_i`: the univariate family with shape `α_i + α_3`.
    pub fn marginal(&self, which: Component) -> EgwgParams {
        match which {
            Component::First => self.univariate(self.alpha[0] + self.alpha[2]),
            Component::Second => self.univariate(self.alpha[1] + self.alpha[2]),
        }
    }

    /// Law of `max(X_1, X_2)`: shape `α_1 + α_2 + α_3`.
    pub fn maximum(&self) -> EgwgParams {
        self.univariate(self.alpha_sum())
    }

    /// Same baseline with the two coordinates relabelled (`α_1 ↔ α_2`).
    pub fn swapped(&self) -> Self {
        Self { base: self.base, alpha: [self.alpha[1], self.alpha[0], self.alpha[2]] }
    }

    /// `ln F(x_1, x_2) = α_1 ln B(x_1) + α_2 ln B(x_2) + α_3 ln B(min(x_1, x_2))`
    /// with `B = 1 - e^{-G}`.
    pub fn ln_joint_cdf(&self, x1: f64, x2: f64) -> Result<f64> {
        let x1 = check_point(x1, true)?;
        let x2 = check_point(x2, true)?;
        if x1 == 0.0 || x2 == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let (l1, l2) = (self.base.ln_cdf(x1), self.base.ln_cdf(x2));
        let lz = if x1 <= x2 { l1 } else { l2 };
        Ok(self.alpha[0] * l1 + self.alpha[1] * l2 + self.alpha[2] * lz)
    }

    pub fn joint_cdf(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.ln_joint_cdf(x1, x2)?.exp())
    }

    /// Log of the region-appropriate density: `f_1` below the diagonal,
    /// `f_2` above it, and the line density `f_3` on it.
    pub fn ln_joint_pdf(&self, x1: f64, x2: f64) -> Result<(f64, Region)> {
        let x1 = check_point(x1, false)?;
        let x2 = check_point(x2, false)?;
        let [a1, a2, a3] = self.alpha;
        let region = Region::of(x1, x2);
        let value = match region {
            Region::Below => self.univariate(a1 + a3).log_pdf(x1)? + self.univariate(a2).log_pdf(x2)?,
            Region::Above => self.univariate(a1).log_pdf(x1)? + self.univariate(a2 + a3).log_pdf(x2)?,
            Region::Diagonal => {
                let s = self.alpha_sum();
                a3.ln() + self.base.ln_density(x1) + (s - 1.0) * self.base.ln_cdf(x1)
            }
        };
        Ok((value, region))
    }

    pub fn joint_pdf(&self, x1: f64, x2: f64) -> Result<(f64, Region)> {
        let (l, region) = self.ln_joint_pdf(x1, x2)?;
        Ok((l.exp(), region))
    }

    /// `f_3(x, x)`, the density of the tie value along the diagonal.
    pub fn diagonal_density(&self, x: f64) -> Result<f64> {
        Ok(self.joint_pdf(x, x)?.0)
    }

    /// Range `[lo, hi]` outside which every component carries less than
    /// `cfg.tail_prob` of mass.
    pub fn integration_range(&self, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
        let lo1 = self.marginal(Component::First).quantile_with(cfg.tail_prob, cfg)?;
        let lo2 = self.marginal(Component::Second).quantile_with(cfg.tail_prob, cfg)?;
        let hi = self.maximum().upper_quantile(cfg.tail_prob, cfg)?;
        Ok((lo1.min(lo2), hi))
    }

    /// `P(X_1 = X_2) = ∫ f_3(x, x) dx`, by adaptive quadrature.
    pub fn singular_mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let (lo, hi) = self.integration_range(cfg)?;
        let q = integrate_log_scale(|x| self.diagonal_density(x).unwrap_or(f64::NAN), lo, hi, cfg)?;
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// Mass of the three parts of the law, each by (nested) adaptive
    /// quadrature of the corresponding density. The inner integral of each
    /// double integral stops at the diagonal.
    pub fn mass_decomposition(&self, cfg: &QuadratureConfig) -> Result<MassDecomposition> {
        let (lo, hi) = self.integration_range(cfg)?;
        let [a1, a2, a3] = self.alpha;
        let below = self.off_diagonal_mass(self.univariate(a1 + a3), self.univariate(a2), lo, hi, cfg)?;
        let above = self.off_diagonal_mass(self.univariate(a2 + a3), self.univariate(a1), lo, hi, cfg)?;
        let diagonal = self.singular_mass(cfg)?;
        Ok(MassDecomposition { below, above, diagonal })
    }

    // ∫_{lo}^{hi} f_outer(y) ∫_{lo}^{y} f_inner(x) dx dy
    fn off_diagonal_mass(
        &self,
        inner: EgwgParams,
        outer: EgwgParams,
        lo: f64,
        hi: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |y: f64| -> f64 {
            let inner_mass = integrate_log_scale(|x| inner.pdf(x).unwrap_or(f64::NAN), lo, y, cfg);
            match (inner_mass, outer.pdf(y)) {
                (Ok(q), Ok(fy)) => q.value * fy,
                (Err(e), _) | (_, Err(e)) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let result = integrate_log_scale(integrand, lo, hi, cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(result?.value)
    }

    pub fn marginal_pdf(&self, which: Component, x: f64) -> Result<f64> {
        check_point(x, false)?;
        self.marginal(which).pdf(x)
    }

    pub fn marginal_cdf(&self, which: Component, x: f64) -> Result<f64> {
        self.marginal(which).cdf(x)
    }

    /// Conditional law of `X_i` given `X_j = x_j` (`j` the other coordinate),
    /// as `joint / marginal_j`. The region tag compares `x_i` with `x_j`;
    /// on the diagonal the value is the conditional probability of a tie.
    pub fn conditional_pdf(&self, i: Component, xi: f64, xj: f64) -> Result<(f64, Region)> {
        let (x1, x2) = match i {
            Component::First => (xi, xj),
            Component::Second => (xj, xi),
        };
        let (ln_joint, _) = self.ln_joint_pdf(x1, x2)?;
        let ln_marginal = self.marginal(i.other()).log_pdf(xj)?;
        Ok(((ln_joint - ln_marginal).exp(), Region::of(xi, xj)))
    }

    /// `P(min(X_1, X_2) <= t) = B^{α_1+α_3} + B^{α_2+α_3} - B^{α_1+α_2+α_3}`.
    pub fn min_cdf(&self, t: f64) -> Result<f64> {
        let t = check_point(t, true)?;
        let lb = self.base.ln_cdf(t);
        let [a1, a2, a3] = self.alpha;
        let v = (lb * (a1 + a3)).exp() + (lb * (a2 + a3)).exp() - (lb * (a1 + a2 + a3)).exp();
        Ok(v.clamp(0.0, 1.0))
    }

    /// `P(max(X_1, X_2) <= t) = B^{α_1+α_2+α_3}`.
    pub fn max_cdf(&self, t: f64) -> Result<f64> {
        self.maximum().cdf(t)
    }

    /// Draws `n` pairs `(max(U_1, U_3), max(U_2, U_3))`. Pairs where `U_3`
    /// is the largest latent value are exact ties.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<(f64, f64)>> {
        let cfg = QuadratureConfig::default();
        let latent = [self.univariate(self.alpha[0]), self.univariate(self.alpha[1]), self.univariate(self.alpha[2])];
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u1 = latent[0].quantile_with(rng.sample(rand::distr::Open01), &cfg)?;
            let u2 = latent[1].quantile_with(rng.sample(rand::distr::Open01), &cfg)?;
            let u3 = latent[2].quantile_with(rng.sample(rand::distr::Open01), &cfg)?;
            out.push((u1.max(u3), u2.max(u3)));
        }
        Ok(out)
    }
}

/// Conditional densities transcribed exactly as they are commonly printed,
/// kept only so the documentation tests can show where they agree with
/// [`BegwgParams::conditional_pdf`] and where they do not. The tie branch
/// printed as `α_3 B^{α_1 - 1} / (α_2 + α_3)` differs from the ratio
/// `f_3 / f_{X_j} = α_3 B^{α_i} / (α_j + α_3)`.
#[doc(hidden)]
pub mod as_printed {
    use super::*;

    pub fn conditional_pdf(p: &BegwgParams, i: Component, xi: f64, xj: f64) -> Result<(f64, Region)> {
        let xi = check_point(xi, false)?;
        let xj = check_point(xj, false)?;
        let [a1, a2, a3] = p.alphas();
        let (ai, aj) = match i {
            Component::First => (a1, a2),
            Component::Second => (a2, a1),
        };
        let base = p.baseline();
        let gamma_i = base.density(xi);
        let bi = base.cdf(xi);
        let bj = base.cdf(xj);
        let region = Region::of(xi, xj);
        let v = match region {
            Region::Below => aj * (ai + a3) * gamma_i * bi.powf(ai + a3 - 1.0) / ((aj + a3) * bj.powf(a3)),
            Region::Above => ai * gamma_i * bi.powf(ai - 1.0),
            Region::Diagonal => a3 * bi.powf(a1 - 1.0) / (a2 + a3),
        };
        Ok((v, region))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_log_scale;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> BegwgParams {
        BegwgParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn fitted() -> BegwgParams {
        BegwgParams::new(0.1, 0.2, 0.2, 0.5, 0.0323, 0.186, 0.406).unwrap()
    }

    // 40-digit evaluation of the joint distribution function at (5, 10).
    const JOINT_CDF_FITTED_5_10: f64 = 0.219_825_800_638_362_62;

    #[test]
    fn joint_cdf_reference_value() {
        assert_relative_eq!(fitted().joint_cdf(5.0, 10.0).unwrap(), JOINT_CDF_FITTED_5_10, max_relative = 1e-13);
    }

    #[test]
    fn joint_cdf_on_diagonal_collapses_exponents() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        for x in [0.1, 0.7, 1.5, 3.0] {
            let direct = p.baseline().cdf(x).powf(0.4 + 1.1 + 0.7);
            assert_relative_eq!(p.joint_cdf(x, x).unwrap(), direct, max_relative = 1e-13);
            assert_relative_eq!(p.max_cdf(x).unwrap(), p.joint_cdf(x, x).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn joint_cdf_limits_are_marginals() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        for x in [0.2, 1.0, 2.0] {
            assert_relative_eq!(
                p.joint_cdf(x, 60.0).unwrap(),
                p.marginal_cdf(Component::First, x).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                p.joint_cdf(60.0, x).unwrap(),
                p.marginal_cdf(Component::Second, x).unwrap(),
                max_relative = 1e-14
            );
        }
        assert_eq!(p.joint_cdf(0.0, 1.0).unwrap(), 0.0);
        assert!(p.joint_cdf(-1.0, 1.0).is_err());
    }

    #[test]
    fn joint_pdf_swap_symmetry() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        let q = p.swapped();
        for (x1, x2) in [(0.3, 0.9), (1.4, 0.2), (0.8, 0.8)] {
            let (v, r) = p.joint_pdf(x1, x2).unwrap();
            let (w, s) = q.joint_pdf(x2, x1).unwrap();
            assert_relative_eq!(v, w, max_relative = 1e-14);
            let mirrored = match r {
                Region::Below => Region::Above,
                Region::Above => Region::Below,
                Region::Diagonal => Region::Diagonal,
            };
            assert_eq!(s, mirrored);
        }
        assert!(p.joint_pdf(0.0, 1.0).is_err());
    }

    #[test]
    fn joint_pdf_is_mixed_partial_of_joint_cdf() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        for (x1, x2) in [(0.4, 1.1), (0.9, 1.6), (1.7, 0.6), (1.2, 0.5)] {
            let h = 1e-4;
            let f = |a: f64, b: f64| p.joint_cdf(a, b).unwrap();
            let fd = (f(x1 + h, x2 + h) - f(x1 + h, x2 - h) - f(x1 - h, x2 + h) + f(x1 - h, x2 - h)) / (4.0 * h * h);
            let (v, _) = p.joint_pdf(x1, x2).unwrap();
            assert_relative_eq!(v, fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn singular_mass_matches_shape_ratio() {
        let cfg = QuadratureConfig::default();
        // substituting u = B(x) in ∫ α_3 γ B^{s-1} gives α_3 / s
        assert_relative_eq!(unit().singular_mass(&cfg).unwrap(), 1.0 / 3.0, max_relative = 1e-9);
        let p = fitted();
        assert_relative_eq!(p.singular_mass(&cfg).unwrap(), 0.406 / (0.0323 + 0.186 + 0.406), max_relative = 1e-8);
        let tiny = BegwgParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-9).unwrap();
        assert!(tiny.singular_mass(&cfg).unwrap() < 1e-8);
    }

    #[test]
    fn mass_decomposition_sums_to_one_at_unit_params() {
        let m = unit().mass_decomposition(&QuadratureConfig::default()).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-6, "{m:?}");
        assert_relative_eq!(m.below, 1.0 / 3.0, max_relative = 1e-7);
    }

    #[test]
    fn marginal_delegates_to_univariate() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        let m1 = EgwgParams::new(0.3, 1.2, 0.5, 0.8, 1.1).unwrap();
        for x in [0.1, 0.5, 1.3] {
            assert_eq!(p.marginal_pdf(Component::First, x).unwrap(), m1.pdf(x).unwrap());
            let h = 1e-6 * x;
            let fd = (p.marginal_cdf(Component::Second, x + h).unwrap()
                - p.marginal_cdf(Component::Second, x - h).unwrap())
                / (2.0 * h);
            assert_relative_eq!(p.marginal_pdf(Component::Second, x).unwrap(), fd, max_relative = 1e-6);
        }
        assert_eq!(p.marginal_cdf(Component::First, 0.0).unwrap(), 0.0);
        assert!(p.marginal_pdf(Component::First, 0.0).is_err());
        let cfg = QuadratureConfig::default();
        let m = p.marginal(Component::Second);
        let q = integrate_log_scale(
            |x| m.pdf(x).unwrap(),
            m.quantile(cfg.tail_prob).unwrap(),
            m.upper_quantile(cfg.tail_prob, &cfg).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn conditional_law_is_normalised() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        let cfg = QuadratureConfig::default();
        for which in [Component::First, Component::Second] {
            for xj in [0.3, 1.0, 1.8] {
                let lo = 1e-12;
                let hi = p.maximum().upper_quantile(1e-14, &cfg).unwrap();
                let below =
                    integrate_log_scale(|x| p.conditional_pdf(which, x, xj).unwrap().0, lo, xj, &cfg).unwrap();
                let above =
                    integrate_log_scale(|x| p.conditional_pdf(which, x, xj).unwrap().0, xj, hi, &cfg).unwrap();
                let (tie, region) = p.conditional_pdf(which, xj, xj).unwrap();
                assert_eq!(region, Region::Diagonal);
                let total = below.value + above.value + tie;
                assert!((total - 1.0).abs() < 1e-6, "{which:?} xj={xj}: {total}");
            }
        }
    }

    #[test]
    fn conditional_reduces_to_marginal_without_shared_factor() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 1e-12).unwrap();
        for (xi, xj) in [(0.3, 0.9), (1.2, 0.4)] {
            let (v, _) = p.conditional_pdf(Component::First, xi, xj).unwrap();
            assert_relative_eq!(v, p.marginal_pdf(Component::First, xi).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn conditional_at_unit_params_is_ratio() {
        let p = unit();
        // independent evaluation: f_1(0.5, 1) / f_{X_2}(1) with the closed forms
        let base = p.baseline();
        let (g05, g1) = (base.density(0.5), base.density(1.0));
        let (b05, b1) = (base.cdf(0.5), base.cdf(1.0));
        let f1 = 2.0 * g05 * b05 * g1;
        let m2 = 2.0 * g1 * b1;
        let (v, r) = p.conditional_pdf(Component::First, 0.5, 1.0).unwrap();
        assert_eq!(r, Region::Below);
        assert_relative_eq!(v, f1 / m2, max_relative = 1e-13);
    }

    #[test]
    fn printed_conditional_agrees_off_diagonal_only() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        for which in [Component::First, Component::Second] {
            for (xi, xj) in [(0.3, 0.9), (1.2, 0.4)] {
                let (ratio, _) = p.conditional_pdf(which, xi, xj).unwrap();
                let (printed, _) = as_printed::conditional_pdf(&p, which, xi, xj).unwrap();
                assert_relative_eq!(ratio, printed, max_relative = 1e-12);
            }
        }
        let x = 0.8;
        let (ratio, _) = p.conditional_pdf(Component::First, x, x).unwrap();
        let (printed, _) = as_printed::conditional_pdf(&p, Component::First, x, x).unwrap();
        // printed tie branch is off by one power of B(x)
        assert_relative_eq!(printed * p.baseline().cdf(x), ratio, max_relative = 1e-12);
        assert!((printed - ratio).abs() > 1e-3);
    }

    #[test]
    fn min_and_max_distributions() {
        let p = BegwgParams::new(0.3, 1.2, 0.5, 0.8, 0.4, 1.1, 0.7).unwrap();
        assert_eq!(p.min_cdf(0.0).unwrap(), 0.0);
        for i in 1..100 {
            let t = 0.03 * i as f64;
            let lo = p.min_cdf(t).unwrap();
            let hi = p.max_cdf(t).unwrap();
            assert!(lo >= hi);
            let m = p.maximum();
            assert_eq!(hi, m.cdf(t).unwrap());
            // inclusion-exclusion on the event {min <= t}
            let ie = p.marginal_cdf(Component::First, t).unwrap() + p.marginal_cdf(Component::Second, t).unwrap()
                - p.joint_cdf(t, t).unwrap();
            assert_relative_eq!(lo, ie, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn sampler_is_deterministic_with_ties() {
        let p = unit();
        assert!(p.sample(&mut ChaCha8Rng::seed_from_u64(3), 0).unwrap().is_empty());
        let a = p.sample(&mut ChaCha8Rng::seed_from_u64(3), 3000).unwrap();
        let b = p.sample(&mut ChaCha8Rng::seed_from_u64(3), 3000).unwrap();
        assert_eq!(a, b);
        let ties = a.iter().filter(|(x, y)| x == y).count() as f64 / a.len() as f64;
        let se = (1.0f64 / 3.0 * 2.0 / 3.0 / 3000.0).sqrt();
        assert!((ties - 1.0 / 3.0).abs() < 3.0 * se, "tie fraction {ties}");
    }

    proptest! {
        #[test]
        fn rectangle_inequality_and_frechet_bound(
            x1 in 0.05f64..3.0, x2 in 0.05f64..3.0, w1 in 0.01f64..1.0, w2 in 0.01f64..1.0,
            a1 in 0.1f64..3.0, a2 in 0.1f64..3.0, a3 in 0.1f64..3.0,
        ) {
            let p = BegwgParams::new(0.5, 0.9, 0.7, 1.1, a1, a2, a3).unwrap();
            let f = |a: f64, b: f64| p.joint_cdf(a, b).unwrap();
            let (y1, y2) = (x1 + w1, x2 + w2);
            let mass = f(y1, y2) - f(x1, y2) - f(y1, x2) + f(x1, x2);
            prop_assert!(mass >= -1e-14);
            prop_assert!(f(x1, x2) <= f(y1, x2) + 1e-15);
            prop_assert!(f(x1, x2) <= f(x1, y2) + 1e-15);
            let bound = p.marginal_cdf(Component::First, x1).unwrap().min(p.marginal_cdf(Component::Second, x2).unwrap());
            prop_assert!(f(x1, x2) <= bound + 1e-15);
            // relabelling invariance
            prop_assert!((p.swapped().joint_cdf(x2, x1).unwrap() - f(x1, x2)).abs() <= 1e-15);
        }

        #[test]
        fn independence_limit(x1 in 0.05f64..3.0, x2 in 0.05f64..3.0) {
            let p = BegwgParams::new(0.5, 0.9, 0.7, 1.1, 0.8, 1.3, 1e-8).unwrap();
            let prod = p.marginal_cdf(Component::First, x1).unwrap() * p.marginal_cdf(Component::Second, x2).unwrap();
            prop_assert!((p.joint_cdf(x1, x2).unwrap() - prod).abs() < 1e-6);
        }
    }
}
