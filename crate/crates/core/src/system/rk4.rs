use super::SystemError;

/// One classical fourth-order Runge–Kutta step of `x' = f(x, u)` with the
/// input held constant over the step.
///
/// `derivative(state, input, out)` writes the state derivative into `out`.
pub fn rk4_step<F>(derivative: F, state: &[f64], input: &[f64], dt: f64) -> Result<Vec<f64>, SystemError>
where
    F: Fn(&[f64], &[f64], &mut [f64]),
{
    let n = state.len();
    if state.iter().chain(input).any(|v| !v.is_finite()) {
        return Err(SystemError::NonFinite);
    }
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    derivative(state, input, &mut k1);
    for j in 0..n {
        tmp[j] = state[j] + 0.5 * dt * k1[j];
    }
    derivative(&tmp, input, &mut k2);
    for j in 0..n {
        tmp[j] = state[j] + 0.5 * dt * k2[j];
    }
    derivative(&tmp, input, &mut k3);
    for j in 0..n {
        tmp[j] = state[j] + dt * k3[j];
    }
    derivative(&tmp, input, &mut k4);

    let next: Vec<f64> = (0..n)
        .map(|j| state[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(SystemError::NonFinite);
    }
    Ok(next)
}
