use super::{AutodiffError, Tape, Tensor, Var};

/// Central-difference step used by [`grad_check`].
pub const FD_STEP: f64 = 1e-5;

/// Compares reverse-mode gradients of the scalar function `f` at `point`
/// against central finite differences. Returns the largest
/// `|a - n| / max(1, |a|, |n|)` over all coordinates.
pub fn grad_check<F>(f: F, point: &[Tensor]) -> Result<f64, AutodiffError>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>, AutodiffError>,
{
    grad_check_with_step(f, point, FD_STEP)
}

/// [`grad_check`] with an explicit central-difference step. A smaller step
/// keeps the stencil from straddling a ReLU kink close to `point`.
pub fn grad_check_with_step<F>(f: F, point: &[Tensor], step: f64) -> Result<f64, AutodiffError>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>, AutodiffError>,
{
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = point.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&tape, &vars)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars.iter().map(|&v| grads.wrt(v)).collect();

    let eval = |pt: &[Tensor]| -> Result<f64, AutodiffError> {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = pt.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&tape, &vars)?;
        Ok(out.item())
    };

    let mut probe = point.to_vec();
    let mut worst = 0.0f64;
    for k in 0..point.len() {
        for i in 0..point[k].len() {
            let x = point[k].data()[i];
            probe[k].data_mut()[i] = x + step;
            let up = eval(&probe)?;
            probe[k].data_mut()[i] = x - step;
            let down = eval(&probe)?;
            probe[k].data_mut()[i] = x;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[k].data()[i];
            let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
            if err.is_nan() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
