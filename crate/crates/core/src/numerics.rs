//! Numerical kernels shared by every distribution routine: adaptive
//! Gauss–Kronrod quadrature, a log-scale variant for densities with
//! integrable power singularities at the origin, and a bracketed Newton
//! iteration.

use crate::error::{Error, Result};

/// Tolerances and limits for every numerical integral and root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute error target of an integral.
    pub abs_tol: f64,
    /// Relative error target; the integral is accepted when either target holds.
    pub rel_tol: f64,
    /// Upper bound on the number of subintervals of one adaptive integral.
    pub max_subdivisions: usize,
    /// Target for |cdf(x) - u| in quantile inversion.
    pub root_tol: f64,
    /// Probability mass below which a tail is cut from an infinite range.
    pub tail_prob: f64,
    /// Maximum number of bracket doublings (or halvings) during inversion.
    pub max_bracket_steps: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            root_tol: 1e-12,
            tail_prob: 1e-12,
            max_bracket_steps: 1024,
        }
    }
}

/// Value of a definite integral with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

// 21-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 10-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::Overflow { at: center });
    }
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut values = [0.0f64; 21];
    values[10] = fc;
    for i in 0..10 {
        let dx = half * XGK[i];
        let (xl, xr) = (center - dx, center + dx);
        let (fl, fr) = (f(xl), f(xr));
        if !fl.is_finite() {
            return Err(Error::Overflow { at: xl });
        }
        if !fr.is_finite() {
            return Err(Error::Overflow { at: xr });
        }
        values[i] = fl;
        values[20 - i] = fr;
        kronrod += WGK[i] * (fl + fr);
        abs_sum += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (fl + fr);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for i in 0..10 {
        asc += WGK[i] * ((values[i] - mean).abs() + (values[20 - i] - mean).abs());
    }

    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive 21-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// error meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        let q = integrate(f, b, a, cfg)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }

    let mut active = vec![kronrod21(&f, a, b)?];
    // Panels too narrow to bisect in floating point; their error still counts.
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 21;
    loop {
        let value: f64 = active.iter().chain(&frozen).map(|p| p.value).sum();
        let error: f64 = active.iter().chain(&frozen).map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error, evaluations });
        }
        if active.len() + frozen.len() >= cfg.max_subdivisions || active.is_empty() {
            return Err(Error::Quadrature { estimate: value, error });
        }

        let worst = active
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i)
            .expect("active panels are non-empty");
        let p = active.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid - p.a <= 8.0 * f64::EPSILON * mid.abs() || mid <= p.a || mid >= p.b {
            frozen.push(p);
            continue;
        }
        active.push(kronrod21(&f, p.a, mid)?);
        active.push(kronrod21(&f, mid, p.b)?);
        evaluations += 42;
    }
}

/// Integrates `f` over `[lo, hi]` (with `0 < lo < hi`) after the change of
/// variable `x = exp(t)`. Integrands that behave like `x^(k-1)` near the
/// origin become exponentials in `t`, which adaptive rules handle well.
pub fn integrate_log_scale<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature> {
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::domain(format!("log-scale limits must satisfy 0 < lo, hi finite; got [{lo}, {hi}]")));
    }
    if hi <= lo {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    integrate(
        |t| {
            let x = t.exp();
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * x
            }
        },
        lo.ln(),
        hi.ln(),
        cfg,
    )
}

/// Root of a monotone function inside a sign-changing bracket.
///
/// `f` returns `(value, derivative)`. Newton steps are taken when they stay
/// inside the current bracket and shrink the residual fast enough; bisection
/// otherwise. Stops when the step falls below `x_tol` or `value == 0`.
pub fn newton_bisect<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoRoot(format!("bracket [{lo}, {hi}] does not change sign")));
    }
    // Orient so that f(lo) < 0.
    if f_lo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut step_old = (hi - lo).abs();
    let mut step = step_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..max_iter {
        if fx == 0.0 {
            return Ok(x);
        }
        let newton_leaves = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        let too_slow = (2.0 * fx).abs() > (step_old * dfx).abs();
        step_old = step;
        if newton_leaves || too_slow || !dfx.is_finite() || dfx == 0.0 {
            step = 0.5 * (hi - lo);
            x = lo + step;
        } else {
            step = fx / dfx;
            x -= step;
        }
        if step.abs() < x_tol {
            return Ok(x);
        }
        let r = f(x);
        fx = r.0;
        dfx = r.1;
        if fx.is_nan() {
            return Err(Error::domain(format!("root function returned NaN at {x}")));
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Err(Error::Convergence { what: "bracketed Newton iteration", iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(q.value, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let q = integrate(f64::exp, 1.0, 0.0, &cfg).unwrap();
        assert_relative_eq!(q.value, 1.0 - std::f64::consts::E, max_relative = 1e-13);
    }

    #[test]
    fn adapts_to_endpoint_power_singularity() {
        // ∫_0^1 x^(-1/2) dx = 2
        let cfg = QuadratureConfig::default();
        let q = integrate(|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, &cfg).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn log_scale_handles_strong_singularity() {
        // ∫_{1e-200}^1 0.05 x^(-0.95) dx = 1 - 1e-10
        let cfg = QuadratureConfig::default();
        let q = integrate_log_scale(|x: f64| 0.05 * x.powf(-0.95), 1e-200, 1.0, &cfg).unwrap();
        assert!((q.value - (1.0 - 1e-10)).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let cfg = QuadratureConfig::default();
        let err = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, &cfg);
        assert!(err.is_err());
    }

    #[test]
    fn newton_bisect_finds_cube_root() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15, 100).unwrap();
        assert_relative_eq!(r, 2f64.cbrt(), max_relative = 1e-14);
    }

    #[test]
    fn newton_bisect_rejects_bad_bracket() {
        assert!(matches!(
            newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 50),
            Err(Error::NoRoot(_))
        ));
    }

    #[test]
    fn newton_bisect_survives_flat_derivative() {
        // Derivative vanishes at the start point.
        let r = newton_bisect(|x| (x.powi(3), 3.0 * x * x), -1.0, 2.0, 1e-14, 200).unwrap();
        assert!(r.abs() < 1e-4);
    }
}
