use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backward, forward, instance_loss, ClassifierModel};
use crate::error::{Error, Result};
use crate::seq::LabeledSequence;

/// Magnitude of the seeded noise added to every parameter before a check,
/// moving the model off ReLU kinks and max-pool ties.
pub const TIE_PERTURBATION: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Canonical index of the parameter with the largest error.
    pub worst_parameter: usize,
    pub parameters: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

/// `|a - b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Compares backpropagated gradients with central finite differences of
/// step `eps` on a tie-perturbed copy of `model`.
pub fn grad_check(model: &ClassifierModel, example: &LabeledSequence, eps: f64, seed: u64) -> Result<GradCheckReport> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::invalid(
            "finite-difference step",
            format!("{eps} outside [1e-7, 1e-3]"),
        ));
    }
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for slice in model.parameter_slices_mut() {
        for p in slice.iter_mut() {
            *p += rng.random_range(-TIE_PERTURBATION..=TIE_PERTURBATION);
        }
    }

    let (_, cache) = forward(&model, &example.sequence)?;
    let analytic = backward(&model, &cache, example.label)?.flatten();

    let base = model.parameters();
    let loss_at = |model: &mut ClassifierModel, i: usize, v: f64| -> Result<f64> {
        model.set_parameter(i, v);
        let (probs, _) = forward(model, &example.sequence)?;
        instance_loss(&probs, example.label)
    };
    let mut numeric = Vec::with_capacity(base.len());
    for (i, &p) in base.iter().enumerate() {
        let plus = loss_at(&mut model, i, p + eps)?;
        let minus = loss_at(&mut model, i, p - eps)?;
        model.set_parameter(i, p);
        numeric.push((plus - minus) / (2.0 * eps));
    }

    let (worst_parameter, max_relative_error) = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .enumerate()
        .fold((0, 0.0), |best, (i, e)| if e > best.1 { (i, e) } else { best });
    Ok(GradCheckReport {
        max_relative_error,
        worst_parameter,
        parameters: base.len(),
        analytic,
        numeric,
    })
}
