//! Gauss–Legendre quadrature nodes and weights on `[−1, 1]`.

use crate::error::Error;
use crate::Result;

/// Nodes and weights of the `q`-point Gauss–Legendre rule, exact for
/// polynomials of degree `≤ 2q − 1`. Nodes come out ascending.
pub fn gauss_legendre(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q < 1 {
        return Err(Error::InvalidQuadrature(q));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    // Newton iteration on P_q from the asymptotic root guess; symmetry
    // halves the work.
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
        let (_, d) = legendre_with_derivative(q, 0.0);
        weights[q / 2] = 2.0 / (d * d);
    }
    Ok((nodes, weights))
}

/// `(P_q(x), P_q'(x))` by the three-term recurrence.
fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=q {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if q == 0 {
        return (1.0, 0.0);
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
