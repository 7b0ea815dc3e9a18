//! Small numeric helpers shared across modules.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().total()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Two-sided p-value of a z statistic under the standard normal.
pub fn two_sided_normal_p(z: f64) -> f64 {
    (2.0 * Normal::standard().sf(z.abs())).clamp(0.0, 1.0)
}

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
pub fn two_sided_student_p(t: f64, dof: f64) -> f64 {
    match StudentsT::new(0.0, 1.0, dof) {
        Ok(dist) => (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

/// Mean of a slice; zero for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Population standard deviation (divisor n).
pub fn std_population(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    (ss / values.len() as f64).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1e16, 1.0, -1e16];
        values.extend(std::iter::repeat_n(1.0, 10));
        assert_eq!(compensated_sum(values), 11.0);
    }

    #[test]
    fn normal_p_values() {
        assert!((two_sided_normal_p(0.0) - 1.0).abs() < 1e-15);
        assert!((two_sided_normal_p(1.959963984540054) - 0.05).abs() < 1e-9);
        assert!((two_sided_normal_p(-3.231) - 0.0012335794).abs() < 1e-9);
    }

    #[test]
    fn student_approaches_normal() {
        let p = two_sided_student_p(2.0, 1e6);
        assert!((p - two_sided_normal_p(2.0)).abs() < 1e-5);
        assert!(two_sided_student_p(-1.8126, 261.0) > two_sided_normal_p(-1.8126));
    }

    #[test]
    fn population_std() {
        assert_eq!(std_population(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), 2.0);
        assert_eq!(std_population(&[3.0]), 0.0);
    }
}
