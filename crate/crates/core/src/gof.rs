//! One-sample Kolmogorov–Smirnov distance, used to check samplers against
//! their analytic distribution functions.

/// `sup_x |F_n(x) - F(x)|` for the empirical distribution of `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // step over ties so atoms in the sample are handled
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// Asymptotic critical value `sqrt(-ln(level / 2) / 2) / sqrt(n)` of the
/// KS distance at significance `level`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-(0.5 * level).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
