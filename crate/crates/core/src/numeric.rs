//! Small summation and moment helpers shared by the estimators.
//!
//! Every reduction here runs sequentially in index order so results do not
//! depend on how callers schedule work.

/// Compensated (Neumaier) sum.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            carry += (total - t) + v;
        } else {
            carry += (v - t) + total;
        }
        total = t;
    }
    total + carry
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    sum(values.iter().copied()) / values.len() as f64
}

/// Population covariance `(1/n) Σ (a_i - ā)(b_i - b̄)`, two-pass.
///
/// Panics if the slices differ in length; callers validate first.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    let ma = mean(a);
    let mb = mean(b);
    sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb))) / a.len() as f64
}

pub fn variance(a: &[f64]) -> f64 {
    covariance(a, a)
}

/// Median of a copy of `values` (mean of the two central values for even length).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1e16];
        v.extend(std::iter::repeat(1.0).take(1000));
        v.push(-1e16);
        assert_eq!(sum(v), 1000.0);
    }

    #[test]
    fn covariance_of_constant_is_zero() {
        assert_eq!(variance(&[3.0; 7]), 0.0);
        assert!((covariance(&[1.0, 3.0], &[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
