use ndarray::Array2;

use crate::error::{Error, Result};

/// Mean negative log-likelihood of the true class after renormalising each
/// row of nonnegative `scores` to sum to one. Returns the loss and
/// `dL/dscores`.
pub fn cross_entropy(scores: &Array2<f64>, labels: &[u32]) -> Result<(f64, Array2<f64>)> {
    let (b, c) = scores.dim();
    if labels.len() != b {
        return Err(Error::Data(format!("{} labels for {b} score rows", labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= c) {
        return Err(Error::Data(format!("label {l} out of range for {c} classes")));
    }
    let mut loss = 0.0;
    let mut grad = Array2::zeros((b, c));
    let inv_b = 1.0 / b.max(1) as f64;
    for (i, &y) in labels.iter().enumerate() {
        let row = scores.row(i);
        let total: f64 = row.sum();
        let sy = row[y as usize];
        loss -= (sy / total).ln();
        for k in 0..c {
            grad[[i, k]] = inv_b / total;
        }
        grad[[i, y as usize]] -= inv_b / sy;
    }
    Ok((loss * inv_b, grad))
}

/// Index of the largest score per row (first on ties).
pub fn predictions(scores: &Array2<f64>) -> Vec<u32> {
    scores
        .rows()
        .into_iter()
        .map(|r| {
            let mut best = 0;
            for (k, &v) in r.iter().enumerate() {
                if v > r[best] {
                    best = k;
                }
            }
            best as u32
        })
        .collect()
}

pub fn correct(scores: &Array2<f64>, labels: &[u32]) -> usize {
    predictions(scores).iter().zip(labels).filter(|(p, l)| p == l).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_scores_give_log_c() {
        let (l, _) = cross_entropy(&Array2::from_elem((3, 7), 2.0), &[0, 3, 6]).unwrap();
        assert!((l - 7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn peaked_scores_near_zero() {
        let (l, _) = cross_entropy(&array![[1e-300, 5.0]], &[1]).unwrap();
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn hand_example() {
        let (l, _) = cross_entropy(&array![[0.75, 1.25]], &[1]).unwrap();
        assert!((l - 0.470_003_629_245_735_5).abs() < 1e-12);
        assert!((l + (1.25f64 / 2.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn label_range() {
        assert!(matches!(cross_entropy(&array![[0.5, 0.5]], &[2]), Err(Error::Data(_))));
    }

    #[test]
    fn gradient_matches_differences() {
        let s = array![[0.3, 1.2, 0.5], [2.0, 0.1, 0.9]];
        let y = [2, 0];
        let (_, g) = cross_entropy(&s, &y).unwrap();
        let h = 1e-7;
        for i in 0..2 {
            for k in 0..3 {
                let mut p = s.clone();
                p[[i, k]] += h;
                let mut m = s.clone();
                m[[i, k]] -= h;
                let fd = (cross_entropy(&p, &y).unwrap().0 - cross_entropy(&m, &y).unwrap().0) / (2.0 * h);
                assert!((fd - g[[i, k]]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn argmax_first_on_ties() {
        assert_eq!(predictions(&array![[1.0, 1.0, 0.5], [0.0, 0.2, 0.3]]), vec![0, 2]);
    }
}
