//! Raw moments `E[X_i^r]` of the marginals.
//!
//! [`raw_moment_quadrature`] is the reference value. Two series are offered
//! next to it: [`raw_moment_series`], the closed quadruple sum in its
//! commonly printed form (which does not converge, see its docs), and
//! [`raw_moment_survival_series`], a binomial expansion of the survival
//! function that does.

use serde::Serialize;

use crate::bivariate::{BegwgParams, Component};
use crate::egwg::{Baseline, EgwgParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_log_scale, QuadratureConfig};

/// Survival probability beyond which the moment integrands are cut off.
pub const TAIL_CUT: f64 = 1e-14;

/// Truncation rule for the moment series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesControl {
    tol: f64,
    max_terms_per_index: usize,
    min_tail_checks: usize,
}

impl SeriesControl {
    pub fn new(tol: f64, max_terms_per_index: usize, min_tail_checks: usize) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter { name: "tol", value: tol });
        }
        if max_terms_per_index < 2 {
            return Err(Error::domain(format!("max_terms_per_index must be at least 2, got {max_terms_per_index}")));
        }
        if min_tail_checks < 1 {
            return Err(Error::domain("min_tail_checks must be at least 1"));
        }
        Ok(Self { tol, max_terms_per_index, min_tail_checks })
    }

    /// Bypasses validation so callers can probe forced truncation, e.g. a
    /// single term per index.
    pub fn forced(tol: f64, max_terms_per_index: usize, min_tail_checks: usize) -> Self {
        Self { tol, max_terms_per_index, min_tail_checks: min_tail_checks.max(1) }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
    pub fn max_terms_per_index(&self) -> usize {
        self.max_terms_per_index
    }
    pub fn min_tail_checks(&self) -> usize {
        self.min_tail_checks
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { tol: 1e-10, max_terms_per_index: 200, min_tail_checks: 3 }
    }
}

/// Outcome of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
}

/// The three integrals whose combination `ab(α_i + α_3)(I_1 - I_2 + (cd/b) I_3)`
/// is the moment, each by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentComponents {
    /// `∫ x^{r+b-1} e^{-G + c x^d} B^{α-1}`
    pub i1: f64,
    /// `∫ x^{r+b-1} e^{-G} B^{α-1}`
    pub i2: f64,
    /// `∫ x^{r+b+d-1} e^{-G + c x^d} B^{α-1}`
    pub i3: f64,
}

impl MomentComponents {
    pub fn combine(&self, base: &Baseline, alpha: f64) -> f64 {
        let (a, b, c, d) = (base.a(), base.b(), base.c(), base.d());
        a * b * alpha * (self.i1 - self.i2 + c * d / b * self.i3)
    }
}

fn check_order(r: u32) -> Result<()> {
    if r > 64 {
        return Err(Error::domain(format!("moment order {r} is not supported (max 64)")));
    }
    Ok(())
}

fn support(m: &EgwgParams, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    Ok((m.quantile_with(TAIL_CUT, cfg)?, m.upper_quantile(TAIL_CUT, cfg)?))
}

/// `E[X_i^r] = ∫ x^r f_{X_i}(x) dx` by adaptive quadrature on the range
/// that holds all but `2 × 1e-14` of the mass. `r = 0` gives the total mass.
pub fn raw_moment_quadrature(p: &BegwgParams, which: Component, r: u32) -> Result<f64> {
    raw_moment_quadrature_with(p, which, r, &QuadratureConfig::default())
}

pub fn raw_moment_quadrature_with(p: &BegwgParams, which: Component, r: u32, cfg: &QuadratureConfig) -> Result<f64> {
    check_order(r)?;
    let m = p.marginal(which);
    let (lo, hi) = support(&m, cfg)?;
    let base = *m.baseline();
    let alpha = m.alpha();
    let rf = r as f64;
    let q = integrate_log_scale(
        |x| {
            let ln = rf * x.ln() + alpha.ln() + base.ln_density(x) + (alpha - 1.0) * base.ln_cdf(x);
            ln.exp()
        },
        lo,
        hi,
        cfg,
    )?;
    Ok(q.value)
}

/// The integrals `I_1, I_2, I_3` for moment order `r`.
pub fn moment_components(p: &BegwgParams, which: Component, r: u32) -> Result<MomentComponents> {
    check_order(r)?;
    let cfg = QuadratureConfig::default();
    let m = p.marginal(which);
    let (lo, hi) = support(&m, &cfg)?;
    let base = *m.baseline();
    let (b, c, d) = (base.b(), base.c(), base.d());
    let am1 = m.alpha() - 1.0;
    let rf = r as f64;
    let common = move |x: f64| -> f64 { -base.cumulative_exponent(x) + am1 * base.ln_cdf(x) };
    let run = |power: f64, with_growth: bool| -> Result<f64> {
        let q = integrate_log_scale(
            |x| {
                let growth = if with_growth { c * x.powf(d) } else { 0.0 };
                ((power - 1.0) * x.ln() + common(x) + growth).exp()
            },
            lo,
            hi,
            &cfg,
        )?;
        Ok(q.value)
    };
    Ok(MomentComponents {
        i1: run(rf + b, true)?,
        i2: run(rf + b, false)?,
        i3: run(rf + b + d, true)?,
    })
}

/// Generalised binomial coefficient `C(v, m)`.
fn binomial(v: f64, m: usize) -> f64 {
    let mut out = 1.0;
    for k in 1..=m {
        out *= (v - (k - 1) as f64) / k as f64;
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Sums a batch of terms in order of increasing magnitude.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    terms.into_iter().sum()
}

/// The closed quadruple series for `E[X_i^r]` exactly as it is usually
/// printed, summed over `m, j, k <= j, l` with each index truncated by `ctl`.
///
/// Its `k = 0` terms carry `(c k)^{(r + b(j+1) + l d)/d} = 0` in the
/// denominator, and the termwise expansion behind it replaces a growing
/// exponential `e^{+c k x^d}` by a decaying one, so the sum has no finite
/// value. The function reports `converged = false` (with `value = NaN`)
/// as soon as a non-finite term or a non-decaying tail is met, rather than
/// returning a number. Use [`raw_moment_quadrature`] for values.
pub fn raw_moment_series(p: &BegwgParams, which: Component, r: u32, ctl: SeriesControl) -> SeriesResult {
    let m_law = p.marginal(which);
    let base = *m_law.baseline();
    let (a, b, c, d) = (base.a(), base.b(), base.c(), base.d());
    let alpha = m_law.alpha();
    let rf = r as f64;
    let n = ctl.max_terms_per_index;
    let mut total = 0.0;
    let mut terms_used = 0;
    let mut quiet = 0;
    let failed = |terms_used| SeriesResult { value: f64::NAN, terms_used, converged: false };

    for m in 0..n {
        let coef_m = binomial(alpha - 1.0, m);
        if coef_m == 0.0 {
            // integer exponent: the outer sum is finite
            return SeriesResult { value: a * b * alpha / d * total, terms_used, converged: quiet >= ctl.min_tail_checks };
        }
        let mut batch = Vec::new();
        for j in 0..n {
            for k in 0..=j {
                let ln_choose = ln_factorial(j) - ln_factorial(k) - ln_factorial(j - k);
                for l in 0..n {
                    let sign = if (m + j + k) % 2 == 0 { 1.0 } else { -1.0 };
                    let expo = (rf + b * (j as f64 + 1.0) + l as f64 * d) / d;
                    let ln_scale = l as f64 * c.ln() + j as f64 * (a * (1.0 + m as f64)).ln() + ln_choose
                        - ln_factorial(j)
                        - ln_factorial(l)
                        - d.ln()
                        - expo * (c * k as f64).ln();
                    let g1 = ln_gamma((rf + b * (j as f64 + 1.0) + d * (l as f64 - 1.0)) / d + 1.0).exp();
                    let g2 = ln_gamma(expo + 1.0).exp();
                    let jp = (1.0 + j as f64).powi(l as i32);
                    let jl = (j as f64).powi(l as i32);
                    let bracket = (jp - jl) * g1 + d * jp / (k as f64 * b) * g2;
                    let term = sign * coef_m * ln_scale.exp() * bracket;
                    terms_used += 1;
                    if !term.is_finite() {
                        return failed(terms_used);
                    }
                    batch.push(term);
                }
            }
        }
        let s = sorted_sum(batch);
        total += s;
        if s.abs() < ctl.tol * total.abs().max(1.0) {
            quiet += 1;
            if quiet >= ctl.min_tail_checks {
                return SeriesResult { value: a * b * alpha / d * total, terms_used, converged: true };
            }
        } else {
            quiet = 0;
        }
    }
    SeriesResult { value: a * b * alpha / d * total, terms_used, converged: false }
}

/// `E[X_i^r]` from the binomial expansion of the survival function,
///
/// `E[X^r] = Σ_{m>=1} (-1)^{m+1} C(α, m) ∫ r x^{r-1} e^{-m G(x)} dx`,
///
/// with each inner integral by quadrature. The sum terminates when `α` is
/// a positive integer. Otherwise the terms eventually keep one sign and
/// decay like a power of `m`, so the stopping test bounds the remainder by
/// `m |term|` and requires it below `tol` relative to the sum for
/// `min_tail_checks` consecutive terms.
pub fn raw_moment_survival_series(
    p: &BegwgParams,
    which: Component,
    r: u32,
    ctl: SeriesControl,
) -> Result<SeriesResult> {
    check_order(r)?;
    if r == 0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 0, converged: true });
    }
    let cfg = QuadratureConfig::default();
    let law = p.marginal(which);
    let base = *law.baseline();
    let alpha = law.alpha();
    let rf = r as f64;
    let lo = TAIL_CUT.powf(1.0 / rf) * 1e-2;
    let mut total = 0.0;
    let mut quiet = 0;
    for m in 1..=ctl.max_terms_per_index {
        let coef = binomial(alpha, m);
        if coef == 0.0 {
            return Ok(SeriesResult { value: total, terms_used: m - 1, converged: true });
        }
        let mf = m as f64;
        // e^{-m G} < TAIL_CUT beyond G = -ln(TAIL_CUT) / m
        let hi = base.solve_exponent((-TAIL_CUT.ln() / mf).ln(), &cfg)?;
        let mu = integrate_log_scale(
            |x| (rf.ln() + (rf - 1.0) * x.ln() - mf * base.cumulative_exponent(x)).exp(),
            lo,
            hi,
            &cfg,
        )?
        .value;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * coef * mu;
        total += term;
        if mf * term.abs() < ctl.tol * total.abs() {
            quiet += 1;
            if quiet >= ctl.min_tail_checks {
                return Ok(SeriesResult { value: total, terms_used: m, converged: true });
            }
        } else {
            quiet = 0;
        }
    }
    Ok(SeriesResult { value: total, terms_used: ctl.max_terms_per_index, converged: false })
}
