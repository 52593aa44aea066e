//! Empirical cumulative distribution functions.

use std::io::Write;

use crate::error::{Error, Result};

/// Distinct sample values `x` (strictly increasing) with `f[i]` the fraction
/// of samples `<= x[i]`; `f` rises strictly to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfSeries {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub n: usize,
}

pub fn ecdf(values: &[f64]) -> Result<EcdfSeries> {
    if values.is_empty() {
        return Err(Error::Eval("ECDF of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eval("ECDF sample contains non-finite values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (mut x, mut f) = (Vec::new(), Vec::new());
    for (i, &val) in v.iter().enumerate() {
        if v.get(i + 1) != Some(&val) {
            x.push(val);
            f.push((i + 1) as f64 / n as f64);
        }
    }
    Ok(EcdfSeries { x, f, n })
}

impl EcdfSeries {
    /// F(t): fraction of samples `<= t`.
    pub fn at(&self, t: f64) -> f64 {
        match self.x.partition_point(|&x| x <= t) {
            0 => 0.0,
            i => self.f[i - 1],
        }
    }

    /// Fraction of samples `>= t`.
    pub fn mass_at_or_above(&self, t: f64) -> f64 {
        match self.x.partition_point(|&x| x < t) {
            0 => 1.0,
            i => 1.0 - self.f[i - 1],
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,F")?;
        for (x, f) in self.x.iter().zip(&self.f) {
            writeln!(w, "{x},{f}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let e = ecdf(&[1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(e.at(2.0), 0.75);
        assert_eq!(e.x, vec![1.0, 2.0, 5.0]);
        assert_eq!(e.at(0.5), 0.0);
        assert_eq!(e.at(9.0), 1.0);
        assert_eq!(e.mass_at_or_above(2.0), 0.75);
        assert_eq!(ecdf(&[3.0]).unwrap().at(3.0), 1.0);
    }

    #[test]
    fn negative_sample_has_no_positive_mass() {
        let e = ecdf(&[-3.0, -1.0, -0.5]).unwrap();
        assert_eq!(e.at(0.0), 1.0);
        assert_eq!(e.mass_at_or_above(0.0), 0.0);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(ecdf(&[]).is_err());
        assert!(ecdf(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        ecdf(&[2.0, 1.0]).unwrap().write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,F\n1,0.5\n2,1\n");
    }
}
