//! Small numeric helpers shared across the crate.

/// `ln(sum(exp(x)))` over a slice, computed with max shifting so that large
/// negative log-probabilities do not underflow.
///
/// Returns `-inf` for an empty slice or when every term is `-inf`. A single
/// finite term is returned unchanged.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &x in terms {
        if x > max {
            max = x;
        }
    }
    if !max.is_finite() {
        // Either empty, all -inf, or contains +inf / NaN; max is the answer
        // in the first two cases and propagates the problem otherwise.
        return max;
    }
    if terms.len() == 1 {
        return max;
    }
    let mut sum = 0.0;
    for &x in terms {
        sum += (x - max).exp();
    }
    max + sum.ln()
}

/// Compensated (Neumaier) summation accumulator.
///
/// Log-probability sums over long sentences and whole corpora accumulate
/// enough rounding error to matter at the tolerances this crate asserts;
/// compensation keeps the result within a few ulps of the exact sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sum {
    total: f64,
    comp: f64,
}

impl Sum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.total + x;
        if self.total.abs() >= x.abs() {
            self.comp += (self.total - t) + x;
        } else {
            self.comp += (x - t) + self.total;
        }
        self.total = t;
    }

    pub fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// Pearson correlation coefficient. Returns 0.0 when either input has zero
/// variance (the coefficient is undefined there and callers treat "no
/// association" as the neutral answer).
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "pearson inputs must have equal length");
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

/// Chi-square goodness-of-fit statistic of observed counts against expected
/// probabilities. Cells with expected count below `min_expected` are pooled
/// into one tail cell so the chi-square approximation stays valid.
///
/// Returns `(statistic, degrees_of_freedom)`.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], min_expected: f64) -> (f64, usize) {
    assert_eq!(observed.len(), expected_probs.len());
    let n: u64 = observed.iter().sum();
    let n = n as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pooled_obs = 0.0;
    let mut pooled_exp = 0.0;
    for (&obs, &p) in observed.iter().zip(expected_probs) {
        let exp = n * p;
        if exp < min_expected {
            pooled_obs += obs as f64;
            pooled_exp += exp;
        } else {
            let d = obs as f64 - exp;
            stat += d * d / exp;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        let d = pooled_obs - pooled_exp;
        stat += d * d / pooled_exp;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}
