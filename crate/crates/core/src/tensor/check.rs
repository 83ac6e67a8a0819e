//! Finite-difference cross-check for tape gradients.
//!
//! The checker runs a closure twice: once on differentiable leaves to collect
//! analytic gradients, then coordinate-by-coordinate with central differences.
//! It reports the worst relative error, so a single broken backward rule shows
//! up no matter where it hides in the graph.

use super::{Tape, Tensor, TensorError, Var};

/// Default step for central differences; `h^2 ~ 1e-10` keeps truncation error
/// well below the acceptance thresholds while staying clear of cancellation.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Compare analytic gradients of `f` against central finite differences.
///
/// `f` must build a scalar from the given leaves, deterministically and
/// without other sources of variation. Returns the maximum over all input
/// coordinates of `|analytic - numeric| / max(1, |numeric|)`.
pub fn finite_difference_check<F>(
    f: F,
    inputs: &[Tensor],
    step: f64,
) -> Result<f64, TensorError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, TensorError>,
{
    // Analytic pass.
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    if tape.value(out).numel() != 1 {
        return Err(TensorError::NotScalar(tape.value(out).shape().to_vec()));
    }
    tape.backward(out)?;
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .map(|&v| tape.grad(v).expect("leaf requires grad").to_vec())
        .collect();

    let eval = |points: &[Tensor]| -> Result<f64, TensorError> {
        let mut t = Tape::new();
        let vs: Vec<Var> = points.iter().map(|p| t.constant(p.clone())).collect();
        let o = f(&mut t, &vs)?;
        let v = t.value(o).item();
        if !v.is_finite() {
            return Err(TensorError::NonFinite("finite_difference_check"));
        }
        Ok(v)
    };

    let mut worst: f64 = 0.0;
    let mut probe: Vec<Tensor> = inputs.to_vec();
    for (ti, input) in inputs.iter().enumerate() {
        for k in 0..input.numel() {
            let orig = input.data()[k];
            probe[ti].data_mut()[k] = orig + step;
            let up = eval(&probe)?;
            probe[ti].data_mut()[k] = orig - step;
            let down = eval(&probe)?;
            probe[ti].data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * step);
            let err = (analytic[ti][k] - numeric).abs() / numeric.abs().max(1.0);
            if err > worst {
                worst = err;
            }
        }
    }
    Ok(worst)
}
