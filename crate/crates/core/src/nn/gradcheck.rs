use alloc::vec::Vec;

pub const FD_STEP: f64 = 1e-5;

/// Below this magnitude differences are compared absolutely.
const FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

/// Largest relative error between `analytic` and central differences of
/// `loss` around `params`.
pub fn gradient_check<F: Fn(&[f64]) -> f64>(params: &[f64], analytic: &[f64], loss: F) -> f64 {
    assert_eq!(params.len(), analytic.len());
    let mut p: Vec<f64> = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + FD_STEP;
        let up = loss(&p);
        p[i] = orig - FD_STEP;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_is_exact() {
        let a = [0.5, -1.25, 3.0];
        let loss = |p: &[f64]| p.iter().zip(&a).map(|(x, w)| x * w).sum::<f64>();
        assert!(gradient_check(&[0.1, 0.2, 0.3], &a, loss) <= 1e-9);
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let loss = |p: &[f64]| p[0] * p[0];
        assert!(gradient_check(&[1.0], &[1.0], loss) > 0.4);
    }
}
