//! Mean squared error.

use crate::error::{shape_err, Result};

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(shape_err(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Loss and `dL/dpred` of [`mse`].
pub fn mse_with_grad(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let loss = mse(pred, target)?;
    let k = 2.0 / pred.len().max(1) as f64;
    let grad = pred.iter().zip(target).map(|(p, t)| k * (p - t)).collect();
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(mse(&[1., 2.], &[1., 2.]).unwrap(), 0.0);
        assert_eq!(mse(&[0.], &[2.]).unwrap(), 4.0);
        assert_eq!(mse(&[1., 3.], &[3., 1.]).unwrap(), 4.0);
        assert!(mse(&[1.], &[1., 2.]).is_err());
    }

    #[test]
    fn gradient_matches_definition() {
        let (_, g) = mse_with_grad(&[1., 3.], &[3., 1.]).unwrap();
        assert_eq!(g, vec![-2.0, 2.0]);
    }
}
