//! Univariate exponentiated generalized Weibull–Gompertz distribution.
//!
//! With the cumulative exponent `G(x) = a x^b (e^{c x^d} - 1)` the
//! distribution function is `F(x) = (1 - e^{-G(x)})^α`. Every evaluation
//! is carried out in log space: `G` through `expm1`, `ln(1 - e^{-G})`
//! through `log1p`/`expm1`, so neither the origin (where `G` vanishes like
//! `x^{b+d}`) nor the far tail (where `G` is astronomically large) loses
//! precision.
//!
//! Chen, Xie, Gompertz and generalized-exponential models are parameter
//! choices of this family (for instance `b → 0` with `d = 1` gives a
//! Gompertz-type cumulative exponent); they are not given separate types.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{newton_bisect, QuadratureConfig};

/// `ln(e^y - 1)` for `y > 0`.
pub(crate) fn ln_expm1(y: f64) -> f64 {
    if y > 36.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// `ln(1 - e^{-g})` for `g > 0`.
pub(crate) fn ln_one_minus_exp_neg(g: f64) -> f64 {
    if g < std::f64::consts::LN_2 {
        (-(-g).exp_m1()).ln()
    } else {
        (-(-g).exp()).ln_1p()
    }
}

/// `1 - e^{l}` for `l <= 0`, accurate when `l` is close to zero.
pub(crate) fn one_minus_exp(l: f64) -> f64 {
    -l.exp_m1()
}

fn check_param(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn check_point(x: f64, allow_zero: bool) -> Result<f64> {
    let ok = x.is_finite() && if allow_zero { x >= 0.0 } else { x > 0.0 };
    if ok {
        Ok(x)
    } else if allow_zero {
        Err(Error::domain(format!("argument must be finite and >= 0, got {x}")))
    } else {
        Err(Error::domain(format!("argument must be finite and > 0, got {x}")))
    }
}

/// The four parameters `(a, b, c, d)` shared by every member of the family:
/// `a` scale, `b` and `d` shape, `c` acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Baseline {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Ok(Self {
            a: check_param("a", a)?,
            b: check_param("b", b)?,
            c: check_param("c", c)?,
            d: check_param("d", d)?,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// `G(x) = a x^b (e^{c x^d} - 1)`; may be `+inf` far in the tail.
    pub fn cumulative_exponent(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        self.a * x.powf(self.b) * (self.c * x.powf(self.d)).exp_m1()
    }

    /// `ln G(x)`, finite even where `G` under- or overflows.
    pub fn ln_cumulative_exponent(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.a.ln() + self.b * x.ln() + ln_expm1(self.c * x.powf(self.d))
    }

    /// `ln(1 - e^{-G(x)})`, the log of the α = 1 distribution function.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_g = self.ln_cumulative_exponent(x);
        if ln_g < -18.0 {
            // 1 - e^{-g} = g (1 - g/2 + ...)
            ln_g - 0.5 * ln_g.exp()
        } else {
            ln_one_minus_exp_neg(ln_g.exp())
        }
    }

    /// The α = 1 distribution function `1 - e^{-G(x)}`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.ln_cdf(x).exp()
    }

    /// `ln γ(x)` where `γ = d/dx (1 - e^{-G})
    ///  = a b x^{b-1} e^{-G + c x^d} (1 + (c d / b) x^d - e^{-c x^d})`, for `x > 0`.
    pub fn ln_density(&self, x: f64) -> f64 {
        let xd = x.powf(self.d);
        let y = self.c * xd;
        let bracket = -(-y).exp_m1() + self.c * self.d / self.b * xd;
        (self.a * self.b).ln() + (self.b - 1.0) * x.ln() - self.cumulative_exponent(x) + y + bracket.ln()
    }

    /// `γ(x)`, the α = 1 density.
    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// Solves `ln G(x) = ln_target` for `x > 0`.
    ///
    /// The bracket starts at `[0, 1]`; the upper end doubles until it clears
    /// the target and the lower end halves until it falls below it. Newton
    /// runs in `t = ln x`, where the residual is convex and increasing with
    /// slope `b + d y / (1 - e^{-y})`, `y = c x^d`.
    pub fn solve_exponent(&self, ln_target: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if ln_target.is_nan() {
            return Err(Error::domain("quantile target is NaN"));
        }
        if ln_target.is_infinite() {
            return Err(Error::domain("quantile target is not representable"));
        }
        let residual = |t: f64| self.ln_cumulative_exponent(t.exp()) - ln_target;

        let mut t_hi = 0.0f64;
        let mut steps = 0;
        while residual(t_hi) < 0.0 {
            steps += 1;
            if steps > cfg.max_bracket_steps || !t_hi.exp().is_finite() {
                return Err(Error::Convergence { what: "quantile bracket expansion", iterations: steps });
            }
            t_hi += std::f64::consts::LN_2;
        }
        let mut t_lo = t_hi - std::f64::consts::LN_2;
        steps = 0;
        while residual(t_lo) > 0.0 {
            steps += 1;
            if steps > cfg.max_bracket_steps || t_lo.exp() == 0.0 {
                return Err(Error::Convergence { what: "quantile bracket contraction", iterations: steps });
            }
            t_lo -= std::f64::consts::LN_2;
        }

        let (b, c, d) = (self.b, self.c, self.d);
        let t = newton_bisect(
            |t| {
                let x = t.exp();
                let y = c * x.powf(d);
                let ratio = if y < 1e-8 { 1.0 + 0.5 * y } else { y / one_minus_exp(-y) };
                (residual(t), b + d * ratio)
            },
            t_lo,
            t_hi,
            1e-15 * t_hi.abs().max(t_lo.abs()).max(1.0),
            400,
        )?;
        Ok(t.exp())
    }
}

/// Parameters `(a, b, c, d, α)` of the univariate distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgwgParams {
    base: Baseline,
    alpha: f64,
}

impl EgwgParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha: f64) -> Result<Self> {
        Self::from_baseline(Baseline::new(a, b, c, d)?, alpha)
    }

    pub fn from_baseline(base: Baseline, alpha: f64) -> Result<Self> {
        Ok(Self { base, alpha: check_param("alpha", alpha)? })
    }

    pub fn baseline(&self) -> &Baseline {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same baseline, different exponentiation shape.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::from_baseline(self.base, alpha)
    }

    /// `ln F(x) = α ln(1 - e^{-G(x)})`.
    pub fn ln_cdf(&self, x: f64) -> Result<f64> {
        let x = check_point(x, true)?;
        Ok(self.alpha * self.base.ln_cdf(x))
    }

    // Computes whichever of F and 1 - F is smaller directly and the other
    // by subtraction, so that the two always sum to exactly one.
    fn cdf_and_survival(&self, x: f64) -> Result<(f64, f64)> {
        let l = self.ln_cdf(x)?;
        Ok(if l < -std::f64::consts::LN_2 {
            let c = l.exp();
            (c, 1.0 - c)
        } else {
            let s = one_minus_exp(l);
            (1.0 - s, s)
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_and_survival(x)?.0)
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_and_survival(x)?.1)
    }

    /// `ln(1 - F(x))` without forming `1 - F`.
    pub fn ln_survival(&self, x: f64) -> Result<f64> {
        let l = self.ln_cdf(x)?;
        Ok(if l < -std::f64::consts::LN_2 { (-l.exp()).ln_1p() } else { one_minus_exp(l).ln() })
    }

    /// Log density, evaluated term by term in log space.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        let x = check_point(x, false)?;
        let log_cdf_term = if self.alpha == 1.0 { 0.0 } else { (self.alpha - 1.0) * self.base.ln_cdf(x) };
        Ok(self.alpha.ln() + self.base.ln_density(x) + log_cdf_term)
    }

    /// Density. At `x = 0` the continuous extension is returned: the density
    /// behaves like `α (a c)^α (b + d) x^{α(b+d) - 1}` there, so the limit is
    /// `0` when `α(b+d) > 1`, `α (a c)^α (b + d)` when `α(b+d) = 1`, and the
    /// density is unbounded otherwise, in which case `0` is returned.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let x = check_point(x, true)?;
        if x == 0.0 {
            return Ok(self.density_at_origin());
        }
        Ok(self.log_pdf(x)?.exp())
    }

    /// Value used for the density at exactly `x = 0`.
    pub fn density_at_origin(&self) -> f64 {
        let Baseline { a, b, c, d } = self.base;
        let order = self.alpha * (b + d);
        if order == 1.0 {
            self.alpha * (a * c).powf(self.alpha) * (b + d)
        } else {
            0.0
        }
    }

    /// Failure rate `f / (1 - F)`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        let ln_s = self.ln_survival(x)?;
        if ln_s == f64::NEG_INFINITY {
            return Err(Error::domain(format!("survival underflows at x = {x}")));
        }
        Ok((self.log_pdf(x)? - ln_s).exp())
    }

    /// Reversed hazard `f / F = α γ(x) / (1 - e^{-G(x)})`.
    pub fn reversed_hazard(&self, x: f64) -> Result<f64> {
        let x = check_point(x, false)?;
        let ln_f = self.base.ln_cdf(x);
        if ln_f == f64::NEG_INFINITY {
            return Err(Error::domain(format!("distribution function underflows at x = {x}")));
        }
        Ok((self.alpha.ln() + self.base.ln_density(x) - ln_f).exp())
    }

    /// Inverse distribution function with the default numerical configuration.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.quantile_with(u, &QuadratureConfig::default())
    }

    /// Inverse distribution function: `x` with `F(x) = u`, `0 < u < 1`.
    pub fn quantile_with(&self, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("probability must lie in (0, 1), got {u}")));
        }
        // (1 - e^{-G})^α = u  ⇔  G = -ln(1 - u^{1/α})
        let l = u.ln() / self.alpha;
        let v = l.exp();
        let ln_g = if v < 1e-8 { l + 0.5 * v } else { (-(-v).ln_1p()).ln() };
        self.base.solve_exponent(ln_g, cfg)
    }

    /// Upper-tail inverse: `x` with `1 - F(x) = q`, `0 < q < 1`, accurate for tiny `q`.
    pub fn upper_quantile(&self, q: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("tail probability must lie in (0, 1), got {q}")));
        }
        // e^{-G} = 1 - (1 - q)^{1/α}
        let e_neg_g = one_minus_exp((-q).ln_1p() / self.alpha);
        let g = -e_neg_g.ln();
        self.base.solve_exponent(g.ln(), cfg)
    }

    /// Draws `n` independent variates by inversion of uniforms on (0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        let cfg = QuadratureConfig::default();
        (0..n).map(|_| self.quantile_with(rng.sample(Open01), &cfg)).collect()
    }
}
