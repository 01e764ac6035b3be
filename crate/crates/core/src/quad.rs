//! Gauss-Legendre quadrature on the reference interval [-1, 1].
//!
//! Nodes and weights are computed by Newton iteration on the Legendre
//! polynomial, seeded with the Chebyshev estimate. An n-point rule is exact
//! for polynomials of degree 2n - 1; the weights sum to 2.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes come out in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Average of `f` over [lo, hi] by the n-point Gauss-Legendre rule.
pub fn average(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        acc += w * f(mid + half * x);
    }
    // weights sum to 2, so the cell average is acc / 2
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=20 {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: weight sum {s}");
        }
    }

    #[test]
    fn exact_for_design_degree() {
        // n-point rule integrates x^(2n-1) and below exactly.
        for n in 1..=8 {
            let (xs, ws) = gauss_legendre(n);
            for m in 0..2 * n {
                let quad: f64 = xs
                    .iter()
                    .zip(ws.iter())
                    .map(|(x, w)| w * x.powi(m as i32))
                    .sum();
                let exact = if m % 2 == 0 {
                    2.0 / (m as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (quad - exact).abs() < 1e-13,
                    "n = {n}, monomial degree {m}: {quad} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn average_of_sine() {
        let exact = (1.0 - 1.0_f64.cos()) / 1.0; // mean of sin on [0,1]
        let got = average(&|x: f64| x.sin(), 0.0, 1.0, 8);
        assert!((got - exact).abs() < 1e-14);
    }
}
