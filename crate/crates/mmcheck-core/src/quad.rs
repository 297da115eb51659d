//! Gauss–Legendre nodes and weights on [−1, 1], computed by Newton
//! iteration on the Legendre recurrence.

/// Returns `(nodes, weights)` for the m-point rule, nodes ascending.
/// Exact for polynomials of degree ≤ 2m − 1.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
        let (_, d) = legendre_with_derivative(m, 0.0);
        weights[m / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Legendre polynomial `P_m(x)` and its derivative via the three-term
/// recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` with the given rule mapped affinely.
pub(crate) fn integrate<F: FnMut(f64) -> f64>(
    nodes: &[f64],
    weights: &[f64],
    a: f64,
    b: f64,
    mut f: F,
) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let (n, w) = gauss_legendre(6);
        // Degree 11 is exact for a 6-point rule.
        let val = integrate(&n, &w, 0.0, 1.0, |x| x.powi(11));
        assert_abs_diff_eq!(val, 1.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for m in [1, 2, 5, 16, 48, 64] {
            let (_, w) = gauss_legendre(m);
            let sum: f64 = w.iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn smooth_integrand_converges_spectrally() {
        let (n, w) = gauss_legendre(32);
        let val = integrate(&n, &w, 0.0, std::f64::consts::PI, f64::sin);
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-13);
    }
}
