//! Cubic radial-basis interpolant with a polynomial tail.

use nalgebra::{DMatrix, DVector};

use super::SurrogateError;

const RIDGE: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-6;

/// `s(x) = Σ w_i ‖x - x_i‖³ + c_0 + Σ c_j x_j`.
///
/// The linear tail is used when there are more points than dimensions;
/// otherwise the tail is a constant.
#[derive(Debug, Clone)]
pub struct RbfSurrogate {
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    tail: Vec<f64>,
}

fn cubic(a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    r2 * r2.sqrt()
}

/// Fits an interpolant through `(points[i], values[i])`.
pub fn fit_surrogate(points: &[Vec<f64>], values: &[f64]) -> Result<RbfSurrogate, SurrogateError> {
    assert_eq!(points.len(), values.len(), "one value per point");
    let n = points.len();
    let distinct = points.iter().enumerate().any(|(i, p)| points[..i].iter().any(|q| q != p));
    if n < 2 || !distinct {
        return Err(SurrogateError::TooFewPoints);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SurrogateError::Degenerate);
    }
    if values.iter().all(|v| *v == values[0]) {
        return Err(SurrogateError::Degenerate);
    }
    let dim = points[0].len();
    let q = if n > dim { dim + 1 } else { 1 };
    let m = n + q;

    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..i {
            let phi = cubic(&points[i], &points[j]);
            a[(i, j)] = phi;
            a[(j, i)] = phi;
        }
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
        if q > 1 {
            for k in 0..dim {
                a[(i, n + 1 + k)] = points[i][k];
                a[(n + 1 + k, i)] = points[i][k];
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, v) in values.iter().enumerate() {
        rhs[i] = *v;
    }

    let solution = solve_checked(&a, &rhs).or_else(|| {
        let mut ridged = a.clone();
        for i in 0..n {
            ridged[(i, i)] += RIDGE;
        }
        solve_checked(&ridged, &rhs)
    });
    let x = solution.ok_or(SurrogateError::Degenerate)?;
    Ok(RbfSurrogate {
        centers: points.to_vec(),
        weights: x.rows(0, n).iter().copied().collect(),
        tail: x.rows(n, q).iter().copied().collect(),
    })
}

fn solve_checked(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let x = a.clone().lu().solve(b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let residual = (a * &x - b).amax();
    let scale = b.amax().max(1.0);
    (residual <= RESIDUAL_TOL * scale).then_some(x)
}

impl RbfSurrogate {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut s = self.tail[0];
        for (k, c) in self.tail.iter().skip(1).enumerate() {
            s += c * x[k];
        }
        for (center, w) in self.centers.iter().zip(&self.weights) {
            s += w * cubic(center, x);
        }
        s
    }
}
