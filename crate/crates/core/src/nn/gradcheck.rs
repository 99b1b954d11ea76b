//! Central finite-difference checks of analytic gradients.

use super::{Params, Scorer};

/// Relative error `|a - n| / max(|a| + |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(floor)
}

/// Worst relative error per parameter tensor, perturbing at most
/// `max_entries` evenly spaced entries of each tensor by `±eps`.
pub fn gradient_check<F>(scorer: &Scorer<f64>, loss: F, eps: f64, max_entries: usize) -> Vec<(String, f64)>
where
    F: Fn(&Scorer<f64>) -> (f64, Params<f64>),
{
    let (_, analytic) = loss(scorer);
    let names = scorer.params.names();
    let mut probe = scorer.clone();
    let mut report = Vec::new();
    for (k, name) in names.into_iter().enumerate() {
        let len = analytic.tensors()[k].len();
        let stride = (len / max_entries.max(1)).max(1);
        let mut worst = 0f64;
        for idx in (0..len).step_by(stride) {
            let original = probe.params.tensors()[k].as_slice().unwrap()[idx];
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[idx] = original + eps;
            let up = loss(&probe).0;
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[idx] = original - eps;
            let down = loss(&probe).0;
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[idx] = original;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.tensors()[k].as_slice().unwrap()[idx];
            worst = worst.max(relative_error(a, numeric, 1e-6));
        }
        report.push((name, worst));
    }
    report
}
