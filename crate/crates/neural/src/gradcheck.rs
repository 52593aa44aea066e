//! Central finite-difference verification of analytic gradients.

use crate::params::Params;

/// Worst relative error found by [`gradcheck`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    /// `(tensor index, element index)` of the worst entry.
    pub worst: (usize, usize),
    /// Analytic and numeric derivative at the worst entry.
    pub worst_values: (f64, f64),
    pub checked: usize,
    /// Nonzero analytic entries where both derivatives were below the floor.
    pub exempt: usize,
}

/// `|a - n| / max(|a|, |n|)`; both below `floor` counts as agreement.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < floor {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Compares every entry of `analytic` against `(L(p+ε) - L(p-ε)) / 2ε`.
///
/// Entries where both gradients are below `floor` in magnitude are counted
/// but cannot raise the error.
pub fn gradcheck<P, F>(model: &P, analytic: &P, loss: F, eps: f64, floor: f64) -> GradcheckReport
where
    P: Params + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = model.clone();
    let grads: Vec<Vec<f64>> = analytic
        .tensors()
        .iter()
        .map(|t| t.as_slice().to_vec())
        .collect();
    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        worst_values: (0.0, 0.0),
        checked: 0,
        exempt: 0,
    };
    for (ti, g) in grads.iter().enumerate() {
        for (ei, &a) in g.iter().enumerate() {
            let orig = probe.tensors()[ti].as_slice()[ei];
            probe.tensors_mut()[ti].as_mut_slice()[ei] = orig + eps;
            let plus = loss(&probe);
            probe.tensors_mut()[ti].as_mut_slice()[ei] = orig - eps;
            let minus = loss(&probe);
            probe.tensors_mut()[ti].as_mut_slice()[ei] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            if a != 0.0 && a.abs().max(numeric.abs()) < floor {
                report.exempt += 1;
            }
            let rel = relative_error(a, numeric, floor);
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = (ti, ei);
                report.worst_values = (a, numeric);
            }
            report.checked += 1;
        }
    }
    report
}
