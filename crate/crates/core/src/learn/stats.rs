/// Upper end of the central `confidence` interval of `Binomial(n, p)`,
/// as a proportion: `k / n` for the smallest `k` with
/// `P(X <= k) >= (1 + confidence) / 2`.
pub fn binomial_upper_bound(n: usize, p: f64, confidence: f64) -> f64 {
    let target = 0.5 + confidence / 2.0;
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut ln_choose = 0.0; // ln C(n, 0)
    let mut cdf = 0.0;
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        cdf += (ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q).exp();
        if cdf >= target {
            return k as f64 / n as f64;
        }
    }
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_tabulated_quantile() {
        // Binomial(80, 0.5): P(X <= 48) = 0.9652, P(X <= 49) = 0.9798
        assert_eq!(binomial_upper_bound(80, 0.5, 0.95), 49.0 / 80.0);
        // Binomial(10, 0.5): P(X <= 7) = 0.9453, P(X <= 8) = 0.9893
        assert_eq!(binomial_upper_bound(10, 0.5, 0.95), 0.8);
    }
}
