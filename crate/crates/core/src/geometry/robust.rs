use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// General robust loss family parameterised by a shape `alpha` and a scale `c`.
///
/// `alpha = 2` is the scaled quadratic, `alpha = 0` the Cauchy/log form,
/// `alpha = -2` Geman-McClure and `alpha = -inf` Welsch. The argument is
/// whatever residual the caller passes; the losses in this crate pass squared
/// distances, so `c` carries squared units there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustLoss {
    pub alpha: f64,
    pub c: f64,
}

impl Default for RobustLoss {
    fn default() -> Self {
        Self {
            alpha: -2.0,
            c: 0.05,
        }
    }
}

impl RobustLoss {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        let loss = Self { alpha, c };
        loss.validate()?;
        Ok(loss)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invariant("robust.c", format!("scale must be positive, got {}", self.c)));
        }
        if self.alpha.is_nan() || self.alpha == f64::INFINITY {
            return Err(Error::invariant("robust.alpha", format!("unsupported shape {}", self.alpha)));
        }
        Ok(())
    }

    pub fn rho(&self, x: f64) -> f64 {
        let z = (x / self.c).powi(2);
        let a = self.alpha;
        if a == 2.0 {
            0.5 * z
        } else if a == 0.0 {
            (0.5 * z).ln_1p()
        } else if a == f64::NEG_INFINITY {
            -(-0.5 * z).exp_m1()
        } else {
            let b = (a - 2.0).abs();
            b / a * ((z / b + 1.0).powf(0.5 * a) - 1.0)
        }
    }

    /// `d rho / d x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let c2 = self.c * self.c;
        let z = x * x / c2;
        let a = self.alpha;
        if a == 2.0 {
            x / c2
        } else if a == f64::NEG_INFINITY {
            x / c2 * (-0.5 * z).exp()
        } else {
            let b = (a - 2.0).abs();
            x / c2 * (z / b + 1.0).powf(0.5 * a - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SHAPES: [f64; 6] = [2.0, 1.0, 0.0, -2.0, -7.5, f64::NEG_INFINITY];

    #[test]
    fn zero_at_origin() {
        for a in SHAPES {
            assert_eq!(RobustLoss::new(a, 0.3).unwrap().rho(0.0), 0.0);
        }
    }

    #[test]
    fn quadratic_limit() {
        let l = RobustLoss::new(2.0, 0.2).unwrap();
        for x in [0.01, 0.5, 3.0] {
            assert!((l.rho(x) - 0.5 * (x / 0.2f64).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn geman_mcclure_form_and_asymptote() {
        let l = RobustLoss::new(-2.0, 0.05).unwrap();
        for x in [0.001, 0.02, 0.4] {
            let r = (x / 0.05f64).powi(2);
            assert!((l.rho(x) - 2.0 * r / (r + 4.0)).abs() < 1e-12);
        }
        assert!((l.rho(1e6) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_central_differences() {
        for a in SHAPES {
            let l = RobustLoss::new(a, 0.07).unwrap();
            for x in [0.003, 0.05, 0.2] {
                let h = 1e-7;
                let fd = (l.rho(x + h) - l.rho(x - h)) / (2.0 * h);
                let an = l.derivative(x);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "alpha {a} x {x}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn nondecreasing_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for a in SHAPES {
            let l = RobustLoss::new(a, rng.gen_range(0.01..1.0)).unwrap();
            for _ in 0..10_000 {
                let x1: f64 = rng.gen_range(0.0..5.0);
                let x2: f64 = rng.gen_range(0.0..5.0);
                let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
                assert!(l.rho(lo) <= l.rho(hi));
            }
        }
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(RobustLoss::new(-2.0, 0.0).is_err());
    }
}
