//! Lagrange and Bernstein polynomial bases on `[0, 1]`.
//!
//! Bernstein polynomials are evaluated with the de Casteljau recurrence and
//! Lagrange polynomials with the second (true) barycentric formula. The
//! Bernstein–Vandermonde matrices built here convert between the two.

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix};

/// Bernstein basis of a fixed degree on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BernsteinBasis {
    pub degree: usize,
}

impl BernsteinBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values of all `n + 1` basis functions at `x`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        bernstein_values(self.degree, x)
    }

    /// First derivatives of all basis functions at `x`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        bernstein_derivatives(self.degree, x)
    }

    pub fn eval(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        bernstein_eval(self.degree, coeffs, x)
    }
}

/// `b^n_i(x)` for `i = 0..=n`, built by repeated convex blending so no binomials appear.
pub fn bernstein_values(n: usize, x: f64) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    let y = 1.0 - x;
    for k in 1..=n {
        let mut prev = 0.0;
        for j in 0..=k {
            let cur = b[j];
            b[j] = y * cur + x * prev;
            prev = cur;
        }
    }
    b
}

/// `d/dx b^n_i(x) = n (b^{n-1}_{i-1}(x) - b^{n-1}_i(x))`.
pub fn bernstein_derivatives(n: usize, x: f64) -> Vec<f64> {
    let mut d = vec![0.0; n + 1];
    if n == 0 {
        return d;
    }
    let lower = bernstein_values(n - 1, x);
    let nf = n as f64;
    for (i, di) in d.iter_mut().enumerate() {
        let left = if i > 0 { lower[i - 1] } else { 0.0 };
        let right = if i < n { lower[i] } else { 0.0 };
        *di = nf * (left - right);
    }
    d
}

/// de Casteljau evaluation without the domain check.
pub fn de_casteljau(coeffs: &[f64], x: f64) -> f64 {
    let mut work = coeffs.to_vec();
    let n = work.len();
    let y = 1.0 - x;
    for r in 1..n {
        for i in 0..n - r {
            work[i] = y * work[i] + x * work[i + 1];
        }
    }
    work.first().copied().unwrap_or(0.0)
}

/// Coefficients (degree `n - 1`) of the derivative of a degree-`n` Bernstein polynomial.
pub fn bernstein_derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len().saturating_sub(1) as f64;
    coeffs.windows(2).map(|w| n * (w[1] - w[0])).collect()
}

/// `Σ coeffs_i b^n_i(x)` for `x` in `[0, 1]`.
pub fn bernstein_eval(n: usize, coeffs: &[f64], x: f64) -> Result<f64> {
    if coeffs.len() != n + 1 {
        return Err(Error::Domain(format!(
            "degree {n} needs {} coefficients, got {}",
            n + 1,
            coeffs.len()
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Bernstein evaluation point {x} outside [0, 1]")));
    }
    Ok(de_casteljau(coeffs, x))
}

/// Lagrange basis on distinct nodes, with precomputed barycentric weights.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::DegenerateInterpolation("no interpolation nodes".into()));
        }
        let n = nodes.len();
        let mut weights = vec![1.0; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = nodes[i] - nodes[j];
                if d == 0.0 {
                    return Err(Error::DegenerateInterpolation(format!(
                        "repeated node {}",
                        nodes[i]
                    )));
                }
                weights[i] /= d;
            }
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ℓ_i(x)` for every node.
    pub fn values(&self, x: f64) -> Vec<f64> {
        if let Some(k) = self.nodes.iter().position(|&t| t == x) {
            let mut e = vec![0.0; self.len()];
            e[k] = 1.0;
            return e;
        }
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w / (x - t))
            .collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }

    /// `ℓ_i'(x)` for every node, from the product rule.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut sum = 0.0;
                for m in 0..n {
                    if m == i {
                        continue;
                    }
                    let mut prod = 1.0;
                    for j in 0..n {
                        if j != i && j != m {
                            prod *= x - self.nodes[j];
                        }
                    }
                    sum += prod;
                }
                sum * self.weights[i]
            })
            .collect()
    }

    /// Barycentric evaluation of `Σ coeffs_i ℓ_i(x)`.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} coefficients",
                self.len(),
                coeffs.len()
            )));
        }
        if let Some(k) = self.nodes.iter().position(|&t| t == x) {
            return Ok(coeffs[k]);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&t, &w), &c) in self.nodes.iter().zip(&self.weights).zip(coeffs) {
            let q = w / (x - t);
            num += q * c;
            den += q;
        }
        Ok(num / den)
    }
}

pub fn lagrange_eval(nodes: &[f64], coeffs: &[f64], x: f64) -> Result<f64> {
    LagrangeBasis::new(nodes)?.eval(coeffs, x)
}

/// `V_ij = b^n_j(node_i)` with `n = nodes.len() - 1`.
pub fn bernstein_vandermonde(nodes: &[f64]) -> DenseMatrix {
    let n = nodes.len().saturating_sub(1);
    let rows: Vec<Vec<f64>> = nodes.iter().map(|&t| bernstein_values(n, t)).collect();
    DenseMatrix::from_rows(&rows)
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    for (i, a) in nodes.iter().enumerate() {
        if nodes[i + 1..].contains(a) {
            return Err(Error::DegenerateInterpolation(format!("repeated node {a}")));
        }
    }
    Ok(())
}

/// Bernstein coefficients of the polynomial taking `values` at `nodes`.
pub fn lagrange_to_bernstein(nodes: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if nodes.len() != values.len() || nodes.is_empty() {
        return Err(Error::Domain(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    check_distinct(nodes)?;
    let lu = lu_factor(&bernstein_vandermonde(nodes)).map_err(|_| {
        Error::DegenerateInterpolation("singular Bernstein-Vandermonde matrix".into())
    })?;
    Ok(lu.solve(values))
}

/// Nodal values at `nodes` of the Bernstein polynomial with `coeffs`.
pub fn bernstein_to_lagrange(nodes: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
    if nodes.len() != coeffs.len() || nodes.is_empty() {
        return Err(Error::Domain(format!(
            "{} nodes but {} coefficients",
            nodes.len(),
            coeffs.len()
        )));
    }
    check_distinct(nodes)?;
    Ok(bernstein_vandermonde(nodes).matvec(coeffs))
}

/// Componentwise `(min, max)` of a coefficient vector.
///
/// For Bernstein coefficients this brackets the polynomial on all of `[0, 1]`.
pub fn control_net_bounds(coeffs: &[f64]) -> Result<(f64, f64)> {
    if coeffs.is_empty() {
        return Err(Error::Domain("empty coefficient vector".into()));
    }
    Ok(coeffs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        }))
}

/// Bernstein–Vandermonde partition mapping the Bernstein coefficients of the
/// collocating polynomial to its stage values.
///
/// With `Z̄ = (yⁿ, Z)` the Bernstein coefficients of the degree-`s` polynomial
/// on the step, the stage values are `Y = V Z + yⁿ v - w`, where `w` is zero
/// except in the confluent case (first entry `(k/s) f(tⁿ, yⁿ)`).
#[derive(Clone, Debug)]
pub struct CollocationTransform {
    /// Full `(s+1) × (s+1)` matrix `[[1, 0ᵀ], [v, V]]`.
    pub vbar: DenseMatrix,
    /// First column below the pivot.
    pub v: Vec<f64>,
    /// Trailing `s × s` block.
    pub vmat: DenseMatrix,
    pub confluent: bool,
    /// Row of `b'_j(0)` values; in the confluent system it is divided by `s`.
    pub derivative_row: Vec<f64>,
}

impl CollocationTransform {
    pub fn stages(&self) -> usize {
        self.v.len()
    }

    /// Degree of the collocating polynomial.
    pub fn degree(&self) -> usize {
        self.v.len()
    }
}

/// Builds the (possibly confluent) Bernstein–Vandermonde partition for nodes `c`.
pub fn collocation_transform(c: &[f64], confluent: bool) -> Result<CollocationTransform> {
    let s = c.len();
    if s == 0 {
        return Err(Error::Config("empty node vector".into()));
    }
    if c.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateInterpolation(
            "collocation nodes must be strictly increasing".into(),
        ));
    }
    if c.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::Config("collocation nodes must lie in [0, 1]".into()));
    }
    let derivative_row = bernstein_derivatives(s, 0.0);
    let vbar = if confluent {
        if c[0] != 0.0 {
            return Err(Error::Config(format!(
                "confluent transform needs c_1 = 0, got {}",
                c[0]
            )));
        }
        let mut rows = Vec::with_capacity(s + 1);
        rows.push(bernstein_values(s, 0.0));
        // b'(0)/s = (-1, 1, 0, ...); eliminating Z̄_0 = yⁿ leaves the unit row.
        let mut second = vec![0.0; s + 1];
        second[1] = 1.0;
        rows.push(second);
        for &t in &c[1..] {
            rows.push(bernstein_values(s, t));
        }
        DenseMatrix::from_rows(&rows)
    } else {
        if c[0] == 0.0 {
            return Err(Error::Config(
                "c_1 = 0 needs the confluent transform".into(),
            ));
        }
        let mut nodes = Vec::with_capacity(s + 1);
        nodes.push(0.0);
        nodes.extend_from_slice(c);
        bernstein_vandermonde(&nodes)
    };
    let v: Vec<f64> = (1..=s).map(|i| vbar[(i, 0)]).collect();
    let vmat = DenseMatrix::from_fn(s, s, |i, j| vbar[(i + 1, j + 1)]);
    Ok(CollocationTransform {
        vbar,
        v,
        vmat,
        confluent,
        derivative_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn partition_of_unity_value() {
        assert!((bernstein_eval(2, &[1.0, 1.0, 1.0], 0.37).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn last_basis_function_at_one() {
        assert_eq!(bernstein_eval(3, &[0.0, 0.0, 0.0, 1.0], 1.0).unwrap(), 1.0);
    }

    #[test]
    fn positive_polynomial_with_negative_bernstein_coefficient() {
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            assert!(bernstein_eval(2, &[1.0, -0.9, 1.0], x).unwrap() > 0.0);
        }
    }

    #[test]
    fn bernstein_eval_rejects_outside_points() {
        assert!(matches!(bernstein_eval(2, &[1.0; 3], 1.5), Err(Error::Domain(_))));
        assert!(matches!(bernstein_eval(2, &[1.0; 3], -0.1), Err(Error::Domain(_))));
        assert!(bernstein_eval(2, &[1.0; 2], 0.5).is_err());
    }

    #[test]
    fn lagrange_positive_coefficients_negative_value() {
        let v = lagrange_eval(&[0.0, 0.5, 1.0], &[0.01, 0.01, 1.0], 0.25).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn lagrange_reproduces_constants_and_lines() {
        let nodes = [0.1, 0.4, 0.45, 0.9];
        for &x in &[0.0, 0.3, 0.77, 1.0] {
            assert!((lagrange_eval(&nodes, &[1.0; 4], x).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((lagrange_eval(&[0.0, 1.0], &[0.0, 1.0], 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn duplicate_nodes_are_degenerate() {
        assert!(matches!(
            lagrange_eval(&[0.0, 0.5, 0.5], &[1.0; 3], 0.2),
            Err(Error::DegenerateInterpolation(_))
        ));
        assert!(matches!(
            lagrange_to_bernstein(&[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::DegenerateInterpolation(_))
        ));
    }

    #[test]
    fn lagrange_derivatives_match_finite_differences() {
        let basis = LagrangeBasis::new(&[0.0, 0.3, 0.7, 1.0]).unwrap();
        let x = 0.41;
        let h = 1e-6;
        let d = basis.derivatives(x);
        let plus = basis.values(x + h);
        let minus = basis.values(x - h);
        for i in 0..4 {
            assert!((d[i] - (plus[i] - minus[i]) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn bernstein_derivatives_match_finite_differences() {
        let x = 0.63;
        let h = 1e-6;
        for n in 0..6 {
            let d = bernstein_derivatives(n, x);
            let p = bernstein_values(n, x + h);
            let m = bernstein_values(n, x - h);
            for i in 0..=n {
                assert!((d[i] - (p[i] - m[i]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn constant_converts_to_constant() {
        let nodes = [0.0, 0.2, 0.6, 1.0];
        let z = lagrange_to_bernstein(&nodes, &[2.5; 4]).unwrap();
        assert!(z.iter().all(|&c| (c - 2.5).abs() < 1e-13));
    }

    #[test]
    fn tau_squared_bernstein_coefficients() {
        // τ² = Σ_i (i(i-1)/(n(n-1))) b^n_i(τ); for n = 2 that is (0, 0, 1).
        let nodes = [0.0, 1.0 / 3.0, 1.0];
        let vals: Vec<f64> = nodes.iter().map(|t| t * t).collect();
        let z = lagrange_to_bernstein(&nodes, &vals).unwrap();
        for (i, zi) in z.iter().enumerate() {
            let expected = (i * i.saturating_sub(1)) as f64 / 2.0;
            assert!((zi - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn control_net_bounds_examples() {
        assert_eq!(control_net_bounds(&[1.0, -0.9, 1.0]).unwrap(), (-0.9, 1.0));
        assert_eq!(control_net_bounds(&[0.3; 5]).unwrap(), (0.3, 0.3));
        assert!(control_net_bounds(&[]).is_err());
    }

    #[test]
    fn transform_backward_euler() {
        let t = collocation_transform(&[1.0], false).unwrap();
        assert_eq!(t.vbar, DenseMatrix::identity(2));
    }

    #[test]
    fn transform_radau2_row() {
        let t = collocation_transform(&[1.0 / 3.0, 1.0], false).unwrap();
        let expect = [4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0];
        for j in 0..3 {
            assert!((t.vbar[(1, j)] - expect[j]).abs() < 1e-15);
        }
        assert_eq!(t.vbar.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(t.v, vec![t.vbar[(1, 0)], t.vbar[(2, 0)]]);
    }

    #[test]
    fn transform_lobatto2_confluent() {
        let t = collocation_transform(&[0.0, 1.0], true).unwrap();
        assert_eq!(t.vmat, DenseMatrix::identity(2));
        assert_eq!(t.v, vec![0.0, 0.0]);
        assert_eq!(t.derivative_row, vec![-2.0, 2.0, 0.0]);
    }

    #[test]
    fn transform_confluent_needs_zero_node() {
        assert!(matches!(collocation_transform(&[0.5, 1.0], true), Err(Error::Config(_))));
        assert!(collocation_transform(&[0.0, 0.5, 1.0], false).is_err());
        assert!(collocation_transform(&[0.5, 0.5], false).is_err());
    }

    #[test]
    fn partition_identity_reproduces_blocks() {
        let t = collocation_transform(&[0.155, 0.645, 1.0], false).unwrap();
        let y = 0.7;
        let z = [0.2, -0.4, 1.3];
        let zbar = [y, z[0], z[1], z[2]];
        let full = t.vbar.matvec(&zbar);
        let vz = t.vmat.matvec(&z);
        assert!((full[0] - y).abs() < 1e-15);
        for i in 0..3 {
            assert!((full[i + 1] - (vz[i] + y * t.v[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn interpolation_consistency() {
        let c = [0.2, 0.5, 0.9];
        let t = collocation_transform(&c, false).unwrap();
        let zbar = [0.1, 2.0, -1.0, 0.4];
        let vals = t.vbar.matvec(&zbar);
        for (i, &ci) in c.iter().enumerate() {
            assert!((de_casteljau(&zbar, ci) - vals[i + 1]).abs() < 1e-14);
        }
    }

    proptest::proptest! {
        #[test]
        fn unit_coefficients_match_closed_form(n in 0usize..=10, i_frac in 0.0f64..1.0, x in 0.0f64..=1.0) {
            let i = ((n + 1) as f64 * i_frac).floor().min(n as f64) as usize;
            let mut e = vec![0.0; n + 1];
            e[i] = 1.0;
            let closed = binom(n, i) * x.powi(i as i32) * (1.0 - x).powi((n - i) as i32);
            proptest::prop_assert!((bernstein_eval(n, &e, x).unwrap() - closed).abs() <= 1e-14);
        }

        #[test]
        fn partition_of_unity(n in 0usize..=10, x in 0.0f64..=1.0) {
            let s: f64 = bernstein_values(n, x).iter().sum();
            proptest::prop_assert!((s - 1.0).abs() <= 1e-13);
        }

        #[test]
        fn conversion_round_trips(seed in 0u64..5000, deg in 1usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut nodes: Vec<f64> = (0..=deg).map(|i| i as f64 / deg as f64).collect();
            for t in nodes.iter_mut().skip(1).take(deg.saturating_sub(1)) {
                *t += rng.gen_range(-0.2..0.2) / deg as f64;
            }
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = lagrange_to_bernstein(&nodes, &bernstein_to_lagrange(&nodes, &coeffs).unwrap()).unwrap();
            let vals = bernstein_to_lagrange(&nodes, &lagrange_to_bernstein(&nodes, &coeffs).unwrap()).unwrap();
            for i in 0..=deg {
                proptest::prop_assert!((back[i] - coeffs[i]).abs() <= 1e-12);
                proptest::prop_assert!((vals[i] - coeffs[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn convex_hull(coeffs in proptest::collection::vec(-5.0f64..5.0, 1..8), x in 0.0f64..=1.0) {
            let (lo, hi) = control_net_bounds(&coeffs).unwrap();
            let v = bernstein_eval(coeffs.len() - 1, &coeffs, x).unwrap();
            proptest::prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
