use super::NumericsError;

/// 1-based ranks with ties replaced by the average of the ranks they span.
///
/// Sort-based, `O(n log n)`. Inputs must be finite.
pub fn fractional_ranks(xs: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));

    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // -0.0 and 0.0 are the same value for ranking purposes
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    Ok(ranks)
}

/// Spearman's rank correlation: the Pearson correlation of tie-averaged ranks.
///
/// Returns 0 when either rank vector is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, NumericsError> {
    if xs.len() != ys.len() {
        return Err(NumericsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(NumericsError::TooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    let rx = fractional_ranks(xs)?;
    let ry = fractional_ranks(ys)?;
    Ok(pearson(&rx, &ry))
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_and_reversed_order() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn three_element_permutation() {
        // d = (2, -1, -1), sum d^2 = 6, rho = 1 - 6*6/(3*8)
        let expected = 1.0 - 6.0 * 6.0 / (3.0 * 8.0);
        assert_abs_diff_eq!(expected, -0.5);
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ties_get_average_rank() {
        assert_eq!(
            fractional_ranks(&[10.0, 20.0, 10.0, 30.0, 20.0]).unwrap(),
            vec![1.5, 3.5, 1.5, 5.0, 3.5]
        );
        assert_eq!(fractional_ranks(&[0.0, -0.0]).unwrap(), vec![1.5, 1.5]);
    }

    #[test]
    fn constant_input_gives_zero() {
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            spearman(&[1.0], &[1.0]),
            Err(NumericsError::TooShort { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(NumericsError::LengthMismatch { .. })
        ));
        assert_eq!(
            spearman(&[1.0, f64::NAN], &[1.0, 2.0]),
            Err(NumericsError::NonFinite)
        );
    }
}
