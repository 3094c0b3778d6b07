use ndarray::Array2;

use crate::error::{GladError, Result};

/// Cohen's kappa from observed and chance agreement.
pub fn kappa_from_agreement(observed: f64, chance: f64) -> Result<f64> {
    if chance >= 1.0 {
        return Err(GladError::UndefinedKappa);
    }
    Ok((observed - chance) / (1.0 - chance))
}

/// Cohen's kappa for a square table of counts (rows: annotator A,
/// columns: annotator B). Computed in integers up to the final division.
pub fn kappa(table: &Array2<u64>) -> Result<f64> {
    if table.nrows() != table.ncols() || table.is_empty() {
        return Err(GladError::Dimension(
            "agreement table must be square and non-empty".into(),
        ));
    }
    let k = table.nrows();
    let n: u128 = table.iter().map(|&v| v as u128).sum();
    if n == 0 {
        return Err(GladError::Empty("agreement table".into()));
    }
    let diag: u128 = (0..k).map(|i| table[[i, i]] as u128).sum();
    let rows: Vec<u128> = (0..k)
        .map(|i| table.row(i).iter().map(|&v| v as u128).sum())
        .collect();
    let cols: Vec<u128> = (0..k)
        .map(|j| table.column(j).iter().map(|&v| v as u128).sum())
        .collect();
    let chance: u128 = rows.iter().zip(&cols).map(|(r, c)| r * c).sum();
    // K = (n·diag − Σ r c) / (n² − Σ r c)
    let den = n * n - chance;
    if den == 0 {
        return Err(GladError::UndefinedKappa);
    }
    let num = (n * diag) as i128 - chance as i128;
    Ok(num as f64 / den as f64)
}

/// Contingency table for two label sequences over `k` categories.
pub fn agreement_table(a: &[usize], b: &[usize], k: usize) -> Result<Array2<u64>> {
    if a.len() != b.len() {
        return Err(GladError::Dimension(format!(
            "{} vs {} annotations",
            a.len(),
            b.len()
        )));
    }
    let mut t = Array2::zeros((k, k));
    for (&x, &y) in a.iter().zip(b) {
        if x >= k || y >= k {
            return Err(GladError::Dimension(format!(
                "category out of range 0..{k}"
            )));
        }
        t[[x, y]] += 1;
    }
    Ok(t)
}

/// Kappa for every annotator pair `(i, j)` with `i < j`.
pub fn pairwise_kappas(annotations: &[Vec<usize>], k: usize) -> Result<Vec<((usize, usize), f64)>> {
    let mut out = Vec::new();
    for i in 0..annotations.len() {
        for j in i + 1..annotations.len() {
            out.push((
                (i, j),
                kappa(&agreement_table(&annotations[i], &annotations[j], k)?)?,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn textbook_values() {
        // P(A) = 0.8, P(E) = 0.5
        let t = array![[40u64, 10], [10, 40]];
        assert_eq!(kappa(&t).unwrap(), 0.6);
        let chance = array![[25u64, 25], [25, 25]];
        assert_eq!(kappa(&chance).unwrap(), 0.0);
        assert_eq!(kappa(&array![[3u64, 0], [0, 7]]).unwrap(), 1.0);
        assert!(matches!(
            kappa(&array![[5u64, 0], [0, 0]]),
            Err(GladError::UndefinedKappa)
        ));
        assert!((kappa_from_agreement(0.8, 0.5).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn three_annotators_give_three_pairs() {
        let a = vec![vec![0, 1, 2, 2], vec![0, 1, 2, 1], vec![0, 0, 2, 2]];
        let ks = pairwise_kappas(&a, 3).unwrap();
        assert_eq!(
            ks.iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }
}
