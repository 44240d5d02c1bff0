//! Small numeric helpers shared by the exact solver and rate formulas.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Threshold below which ratio products switch to log space; deep chains
/// of near-zero margin factors would otherwise underflow.
const LOG_SPACE_THRESHOLD: f64 = 1e-6;

/// Product of `num` factors divided by the product of `den` factors.
/// All factors must be positive; tiny factors route through log space.
pub fn product_ratio(num: &[f64], den: &[f64]) -> f64 {
    let tiny = num
        .iter()
        .chain(den.iter())
        .any(|&f| f < LOG_SPACE_THRESHOLD);
    if tiny {
        let log: f64 = num.iter().map(|f| f.ln()).sum::<f64>()
            - den.iter().map(|f| f.ln()).sum::<f64>();
        log.exp()
    } else {
        num.iter().product::<f64>() / den.iter().product::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let mut s = NeumaierSum::default();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn product_ratio_handles_tiny_factors() {
        let num = vec![1e-8; 40];
        let den = vec![2e-8; 40];
        let r = product_ratio(&num, &den);
        assert!((r - 0.5f64.powi(40)).abs() < 1e-24);

        assert!((product_ratio(&[0.5, 0.5], &[0.25]) - 1.0).abs() < 1e-15);
        assert_eq!(product_ratio(&[], &[]), 1.0);
    }
}
