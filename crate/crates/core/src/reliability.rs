//! Survival, failure-rate and waiting-time functionals of the bivariate law.
//!
//! Throughout, `A = B(x_1)` and `B = B(x_2)` denote the α = 1 baseline
//! distribution function at each coordinate and `γ` its density.

use std::cell::RefCell;

use serde::Serialize;

use crate::bivariate::{BegwgParams, Component, Region};
use crate::egwg::{check_point, one_minus_exp};
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureConfig};

/// Cox failure-rate vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HazardVector {
    /// Failure rate of the system at the common age `min(x_1, x_2)`.
    pub h_diag: f64,
    /// Rate of component 1 at `x_1` given component 2 has failed.
    pub h_12: f64,
    /// Rate of component 2 at `x_2` given component 1 has failed.
    pub h_21: f64,
}

/// A pair of coordinate-wise rates, used for the hazard gradient and the
/// reversed-hazard gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientPair {
    pub g1: f64,
    pub g2: f64,
}

/// `1 - e^{k ln B}`, i.e. `1 - B^k`, without cancellation when `B^k ≈ 1`.
fn one_minus_pow(ln_b: f64, k: f64) -> f64 {
    one_minus_exp(k * ln_b)
}

/// `P(X_1 > x_1, X_2 > x_2)`.
///
/// Evaluated as `(1 - A^{α_1+α_3})(1 - B^{α_2}) + B^{α_2}(1 - B^{α_3})` for
/// `x_1 <= x_2` (and the mirror image otherwise), which is the
/// inclusion-exclusion identity rearranged into non-negative terms.
pub fn joint_survival(p: &BegwgParams, x1: f64, x2: f64) -> Result<f64> {
    let x1 = check_point(x1, true)?;
    let x2 = check_point(x2, true)?;
    let base = p.baseline();
    let (la, lb) = (base.ln_cdf(x1), base.ln_cdf(x2));
    let [a1, a2, a3] = p.alphas();
    let r = if x1 <= x2 {
        one_minus_pow(la, a1 + a3) * one_minus_pow(lb, a2) + (a2 * lb).exp() * one_minus_pow(lb, a3)
    } else {
        one_minus_pow(lb, a2 + a3) * one_minus_pow(la, a1) + (a1 * la).exp() * one_minus_pow(la, a3)
    };
    Ok(r.clamp(0.0, 1.0))
}

fn positive_survival(p: &BegwgParams, x1: f64, x2: f64) -> Result<f64> {
    let r = joint_survival(p, x1, x2)?;
    if r > 0.0 {
        Ok(r)
    } else {
        Err(Error::domain(format!("joint survival underflows to 0 at ({x1}, {x2})")))
    }
}

/// Basu failure rate `f(x_1, x_2) / R(x_1, x_2)`, tagged with the region of
/// the density used.
pub fn bvfr(p: &BegwgParams, x1: f64, x2: f64) -> Result<(f64, Region)> {
    let (ln_f, region) = p.ln_joint_pdf(x1, x2)?;
    let r = positive_survival(p, x1, x2)?;
    Ok(((ln_f - r.ln()).exp(), region))
}

/// Cox failure-rate vector at `(x_1, x_2)`.
pub fn cox_vector(p: &BegwgParams, x1: f64, x2: f64) -> Result<HazardVector> {
    let x1 = check_point(x1, false)?;
    let x2 = check_point(x2, false)?;
    let x = x1.min(x2);
    let base = p.baseline();
    let [a1, a2, a3] = p.alphas();
    let (s1, s2, s) = (a1 + a3, a2 + a3, a1 + a2 + a3);
    let lb = base.ln_cdf(x);
    // d/dx F_S = (γ / B) (s_1 B^{s_1} + s_2 B^{s_2} - s B^{s})
    let bracket = s1 * (s1 * lb).exp() + s2 * (s2 * lb).exp() - s * (s * lb).exp();
    let survival = positive_survival(p, x, x)?;
    let h_diag = (base.ln_density(x) - lb).exp() * bracket / survival;
    Ok(HazardVector {
        h_diag,
        h_12: p.latent(1)?.hazard(x1)?,
        h_21: p.latent(2)?.hazard(x2)?,
    })
}

/// Hazard gradient `(-∂ ln R / ∂x_1, -∂ ln R / ∂x_2)` off the diagonal.
pub fn hazard_gradient(p: &BegwgParams, x1: f64, x2: f64) -> Result<GradientPair> {
    let x1 = check_point(x1, false)?;
    let x2 = check_point(x2, false)?;
    if x1 == x2 {
        return Err(Error::domain(format!(
            "hazard gradient is discontinuous across the diagonal (x1 = x2 = {x1})"
        )));
    }
    if x1 > x2 {
        let g = hazard_gradient(&p.swapped(), x2, x1)?;
        return Ok(GradientPair { g1: g.g2, g2: g.g1 });
    }
    // x1 < x2: R = 1 - A^{s1} - B^{α2+α3} + A^{s1} B^{α2}
    let base = p.baseline();
    let [a1, a2, a3] = p.alphas();
    let s1 = a1 + a3;
    let (la, lb) = (base.ln_cdf(x1), base.ln_cdf(x2));
    let r = positive_survival(p, x1, x2)?;
    let g1 = s1 * (base.ln_density(x1) + (s1 - 1.0) * la).exp() * one_minus_pow(lb, a2) / r;
    let g2 = (base.ln_density(x2) + (a2 - 1.0) * lb).exp() * ((a2 + a3) * (a3 * lb).exp() - a2 * (s1 * la).exp()) / r;
    Ok(GradientPair { g1, g2 })
}

/// Bivariate reversed hazard `f(x_1, x_2) / F(x_1, x_2)` with region tag.
pub fn reversed_hazard(p: &BegwgParams, x1: f64, x2: f64) -> Result<(f64, Region)> {
    let (ln_f, region) = p.ln_joint_pdf(x1, x2)?;
    let ln_cdf = p.ln_joint_cdf(x1, x2)?;
    if ln_cdf == f64::NEG_INFINITY {
        return Err(Error::domain(format!("joint distribution function underflows at ({x1}, {x2})")));
    }
    Ok(((ln_f - ln_cdf).exp(), region))
}

/// Marginal reversed hazards `(f_{X_1} / F_{X_1})(x_1)` and `(f_{X_2} / F_{X_2})(x_2)`.
pub fn reversed_hazard_gradient(p: &BegwgParams, x1: f64, x2: f64) -> Result<GradientPair> {
    let x1 = check_point(x1, false)?;
    let x2 = check_point(x2, false)?;
    Ok(GradientPair {
        g1: p.marginal(Component::First).reversed_hazard(x1)?,
        g2: p.marginal(Component::Second).reversed_hazard(x2)?,
    })
}

/// Mean waiting time of coordinate `which`: `∫_0^t F_{X_i} / F_{X_i}(t)`.
pub fn mean_waiting_time_marginal(p: &BegwgParams, which: Component, t: f64) -> Result<f64> {
    mean_waiting_time_marginal_with(p, which, t, &QuadratureConfig::default())
}

pub fn mean_waiting_time_marginal_with(
    p: &BegwgParams,
    which: Component,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let t = check_point(t, false)?;
    let m = p.marginal(which);
    let ft = m.cdf(t)?;
    if ft == 0.0 {
        return Err(Error::domain(format!("marginal distribution function underflows at t = {t}")));
    }
    let q = integrate(|x| m.cdf(x).unwrap_or(f64::NAN), 0.0, t, cfg)?;
    Ok(q.value / ft)
}

/// Joint mean waiting time `∫_0^{t_1} ∫_0^{t_2} F(x_1, x_2) dx_2 dx_1 / F(t_1, t_2)`.
pub fn mean_waiting_time_joint(p: &BegwgParams, t1: f64, t2: f64) -> Result<f64> {
    mean_waiting_time_joint_with(p, t1, t2, &QuadratureConfig::default())
}

pub fn mean_waiting_time_joint_with(p: &BegwgParams, t1: f64, t2: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let t1 = check_point(t1, false)?;
    let t2 = check_point(t2, false)?;
    let ln_ft = p.ln_joint_cdf(t1, t2)?;
    if ln_ft == f64::NEG_INFINITY {
        return Err(Error::domain(format!("joint distribution function underflows at ({t1}, {t2})")));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |x1: f64, x2: f64| p.joint_cdf(x1, x2).unwrap_or(f64::NAN);
    let inner = |x1: f64| -> f64 {
        // split so each piece stays on one side of the diagonal
        let split = x1.min(t2);
        let mut total = 0.0;
        for (lo, hi) in [(0.0, split), (split, t2)] {
            if hi <= lo {
                continue;
            }
            match integrate(|x2| f(x1, x2), lo, hi, cfg) {
                Ok(q) => total += q.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return f64::NAN;
                }
            }
        }
        total
    };
    let outer = integrate(inner, 0.0, t1, cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer?.value / ln_ft.exp())
}
