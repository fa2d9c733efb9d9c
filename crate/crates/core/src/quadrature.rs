//! Gauss–Legendre rules on the unit interval.

use std::f64::consts::PI;

/// Points and weights of a quadrature rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<f64>()
            * h
    }
}

/// `n`-point Gauss–Legendre rule mapped to `[0, 1]`; exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1);
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1]
        points[n - 1 - i] = 0.5 * (1.0 + x);
        points[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    QuadratureRule { points, weights }
}

/// Rule with enough points to integrate polynomials of `degree` exactly.
pub fn gauss_legendre_for_degree(degree: usize) -> QuadratureRule {
    gauss_legendre(degree / 2 + 1)
}

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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_integrated_exactly() {
        for n in 1..=12 {
            let q = gauss_legendre(n);
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..2 * n {
                let v = q.integrate(0.0, 1.0, |x| x.powi(p as i32));
                assert!((v - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn points_sorted_and_interior() {
        let q = gauss_legendre(5);
        assert!(q.points.windows(2).all(|w| w[0] < w[1]));
        assert!(q.points.iter().all(|&x| x > 0.0 && x < 1.0));
        assert!((q.points[2] - 0.5).abs() < 1e-15);
    }
}
