/// Empirical CDF as `(x, fraction <= x)` at each distinct value, ascending.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single() {
        assert_eq!(ecdf(&[1.0]), vec![(1.0, 1.0)]);
    }

    #[test]
    fn with_ties() {
        assert_eq!(ecdf(&[4.0, 2.0, 1.0, 2.0]), vec![(1.0, 0.25), (2.0, 0.75), (4.0, 1.0)]);
    }

    proptest! {
        #[test]
        fn ends_at_one(v in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let e = ecdf(&v);
            prop_assert_eq!(e.last().unwrap().1, 1.0);
            prop_assert!(e.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        }
    }
}
