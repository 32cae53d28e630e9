//! Uncertainty scores over a posterior distribution. Higher means more
//! uncertain, so candidates are queried in descending score order.
//!
//! For two classes all three induce the same ranking: each is a strictly
//! decreasing function of the maximum posterior.

/// `1 - max_k p_k`.
pub fn least_confidence(posterior: &[f64]) -> f64 {
    1.0 - posterior.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Negated gap between the two most probable classes.
pub fn margin(posterior: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &p in posterior {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    -(first - second)
}

/// Shannon entropy in nats; `0 ln 0` is taken as 0.
pub fn entropy(posterior: &[f64]) -> f64 {
    -posterior
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Candidate indices ordered most-uncertain first under `score`; ties keep
/// their input order.
pub fn rank_by<F: Fn(&[f64]) -> f64>(posteriors: &[[f64; 2]], score: F) -> Vec<usize> {
    let scores: Vec<f64> = posteriors.iter().map(|p| score(p)).collect();
    let mut idx: Vec<usize> = (0..posteriors.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_at_extremes() {
        assert_eq!(least_confidence(&[0.5, 0.5]), 0.5);
        assert_eq!(least_confidence(&[1.0, 0.0]), 0.0);
        assert_eq!(margin(&[0.5, 0.5]), 0.0);
        assert_eq!(margin(&[0.9, 0.1]), -0.8);
        assert!((entropy(&[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn ranking_most_uncertain_first() {
        let ps = [[0.9, 0.1], [0.55, 0.45], [0.3, 0.7]];
        assert_eq!(rank_by(&ps, least_confidence), vec![1, 2, 0]);
        assert_eq!(rank_by(&ps, margin), vec![1, 2, 0]);
        assert_eq!(rank_by(&ps, entropy), vec![1, 2, 0]);
    }
}
