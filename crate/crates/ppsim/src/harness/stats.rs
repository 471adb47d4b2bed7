//! Estimators: binomial rates with Wilson score intervals and the
//! plug-in mutual information between message bits and Eve's guesses.

/// Two-sided 95% normal quantile.
pub const WILSON_Z_95: f64 = 1.959963984540054;

/// A binomial rate with its 95% Wilson score interval.
///
/// Wilson is well behaved near 0 and 1, where the interesting rates
/// (P_F at large N, zero-mismatch checks) live. Zero trials yield the
/// uninformative [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                successes,
                trials,
                rate: 0.0,
                lo: 0.0,
                hi: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z = WILSON_Z_95;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            successes,
            trials,
            rate: p,
            // The clamps absorb float rounding: mathematically the score
            // interval lies in [0,1] and always contains p.
            lo: (center - half).max(0.0).min(p),
            hi: (center + half).min(1.0).max(p),
        }
    }
}

/// Streaming success/trial counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counter {
    pub successes: u64,
    pub trials: u64,
}

impl Counter {
    pub fn record(&mut self, success: bool) {
        self.trials += 1;
        self.successes += u64::from(success);
    }

    pub fn estimate(&self) -> RateEstimate {
        RateEstimate::from_counts(self.successes, self.trials)
    }
}

/// Plug-in mutual information (bits) of a 2×2 joint count table indexed
/// [bit][guess]. Empty tables give 0.
pub fn empirical_mutual_information(joint: &[[u64; 2]; 2]) -> f64 {
    let total: u64 = joint.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let row: Vec<f64> = (0..2).map(|b| (joint[b][0] + joint[b][1]) as f64 / n).collect();
    let col: Vec<f64> = (0..2).map(|g| (joint[0][g] + joint[1][g]) as f64 / n).collect();
    let mut info = 0.0;
    for b in 0..2 {
        for g in 0..2 {
            let p = joint[b][g] as f64 / n;
            if p > 0.0 {
                info += p * (p / (row[b] * col[g])).log2();
            }
        }
    }
    info
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_bounds_solve_score_equation() {
        // The interval endpoints are the roots of
        // (p̂ − p)² = z²·p(1−p)/n, checked directly.
        for (successes, trials) in [(262u64, 1000u64), (1, 1000), (999, 1000), (50, 100)] {
            let est = RateEstimate::from_counts(successes, trials);
            let n = trials as f64;
            for bound in [est.lo, est.hi] {
                let lhs = (est.rate - bound).abs();
                let rhs = WILSON_Z_95 * (bound * (1.0 - bound) / n).sqrt();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
            }
            assert!(est.lo <= est.rate && est.rate <= est.hi);
        }
    }

    #[test]
    fn wilson_edge_counts() {
        let zero = RateEstimate::from_counts(0, 1000);
        assert_abs_diff_eq!(zero.lo, 0.0, epsilon = 1e-12);
        assert!(zero.hi > 0.0 && zero.hi < 0.01);
        let full = RateEstimate::from_counts(1000, 1000);
        assert_abs_diff_eq!(full.hi, 1.0, epsilon = 1e-12);
        assert!(full.lo < 1.0 && full.lo > 0.99);
        let empty = RateEstimate::from_counts(0, 0);
        assert_eq!((empty.rate, empty.lo, empty.hi), (0.0, 0.0, 1.0));
    }

    #[test]
    fn counter_accumulates() {
        let mut c = Counter::default();
        c.record(true);
        c.record(false);
        c.record(true);
        assert_eq!((c.successes, c.trials), (2, 3));
        assert_abs_diff_eq!(c.estimate().rate, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn mutual_information_matches_z_channel_formula() {
        // Counts proportional to the exact Z-channel joint at P_F = 0.25
        // (uniform input bit; I always decoded as I) reproduce the
        // closed form exactly.
        let joint = [[8000, 0], [2000, 6000]];
        let expect = analytics::eve_info_bits(0.25).unwrap();
        assert_abs_diff_eq!(
            empirical_mutual_information(&joint),
            expect,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mutual_information_degenerate_tables() {
        assert_eq!(empirical_mutual_information(&[[0, 0], [0, 0]]), 0.0);
        // Independent bit and guess.
        let independent = [[250, 250], [250, 250]];
        assert_abs_diff_eq!(
            empirical_mutual_information(&independent),
            0.0,
            epsilon = 1e-12
        );
        // Perfectly informative guess.
        let perfect = [[500, 0], [0, 500]];
        assert_abs_diff_eq!(
            empirical_mutual_information(&perfect),
            1.0,
            epsilon = 1e-12
        );
    }
}
