use std::collections::BTreeMap;

use super::CodingError;

/// Cohen's kappa for two raters over the same items.
///
/// `p_o` is the share of items with equal labels and `p_e` the chance
/// agreement from each rater's marginal label frequencies. Perfect agreement
/// returns exactly 1, including the degenerate case where both raters use a
/// single label.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, CodingError> {
    if a.len() != b.len() {
        return Err(CodingError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(CodingError::EmptySequences);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    if agree == a.len() {
        return Ok(1.0);
    }
    let p_o = agree as f64 / n;

    let mut marginals: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for x in a {
        marginals.entry(x).or_default().0 += 1;
    }
    for y in b {
        marginals.entry(y).or_default().1 += 1;
    }
    let p_e: f64 = marginals.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return Err(CodingError::DegenerateMarginals);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_one() {
        assert_eq!(cohen_kappa(&["a", "b", "a"], &["a", "b", "a"]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["a", "a"], &["a", "a"]).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_zero() {
        let k = cohen_kappa(&["X", "X", "Y", "Y"], &["X", "Y", "X", "Y"]).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(cohen_kappa(&["a"], &["a", "b"]).unwrap_err().name(), "LengthMismatch");
        assert_eq!(cohen_kappa::<&str>(&[], &[]).unwrap_err().name(), "EmptySequences");
    }

    #[test]
    fn complete_disagreement_is_negative() {
        let k = cohen_kappa(&["X", "Y"], &["Y", "X"]).unwrap();
        assert!((k + 1.0).abs() < 1e-12);
    }
}
