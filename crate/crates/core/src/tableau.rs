//! Collocation nodes and Butcher tableaux for the RadauIIA, Gauss–Legendre
//! and LobattoIIIA families.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::polybasis::LagrangeBasis;
use crate::quadrature::gauss_legendre;

/// Largest supported stage count.
pub const MAX_STAGES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollocationFamily {
    RadauIIA,
    GaussLegendre,
    LobattoIIIA,
}

impl CollocationFamily {
    /// Whether `c_1 = 0`, which turns the collocating polynomial's
    /// interpolation problem into a confluent one.
    pub fn confluent(self) -> bool {
        matches!(self, Self::LobattoIIIA)
    }

    /// Classical order of the `s`-stage method.
    pub fn order(self, s: usize) -> usize {
        match self {
            Self::RadauIIA => 2 * s - 1,
            Self::GaussLegendre => 2 * s,
            Self::LobattoIIIA => 2 * s - 2,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::RadauIIA => "RIIA",
            Self::GaussLegendre => "GL",
            Self::LobattoIIIA => "LIIIA",
        }
    }
}

impl fmt::Display for CollocationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RadauIIA => "RadauIIA",
            Self::GaussLegendre => "GaussLegendre",
            Self::LobattoIIIA => "LobattoIIIA",
        })
    }
}

const GAUSS_NODES: [&[f64]; MAX_STAGES] = [
    &[0.5],
    &[0.211_324_865_405_187_117_745_4, 0.788_675_134_594_812_882_254_6],
    &[0.112_701_665_379_258_311_482_1, 0.5, 0.887_298_334_620_741_688_517_9],
    &[
        0.069_431_844_202_973_712_388_03,
        0.330_009_478_207_571_867_598_7,
        0.669_990_521_792_428_132_401_3,
        0.930_568_155_797_026_287_612,
    ],
    &[
        0.046_910_077_030_668_003_601_19,
        0.230_765_344_947_158_454_481_8,
        0.5,
        0.769_234_655_052_841_545_518_2,
        0.953_089_922_969_331_996_398_8,
    ],
];

const RADAU_NODES: [&[f64]; MAX_STAGES] = [
    &[1.0],
    &[1.0 / 3.0, 1.0],
    &[0.155_051_025_721_682_190_180_3, 0.644_948_974_278_317_809_819_7, 1.0],
    &[
        0.088_587_959_512_703_947_395_55,
        0.409_466_864_440_734_710_864_9,
        0.787_659_461_760_847_056_025_2,
        1.0,
    ],
    &[
        0.057_104_196_114_517_682_193_12,
        0.276_843_013_638_123_827_68,
        0.583_590_432_368_916_820_056_7,
        0.860_240_135_656_219_447_847_9,
        1.0,
    ],
];

const LOBATTO_NODES: [&[f64]; MAX_STAGES - 1] = [
    &[0.0, 1.0],
    &[0.0, 0.5, 1.0],
    &[0.0, 0.276_393_202_250_021_030_359_1, 0.723_606_797_749_978_969_640_9, 1.0],
    &[0.0, 0.172_673_164_646_011_428_100_9, 0.5, 0.827_326_835_353_988_571_899_1, 1.0],
];

/// Degree of polynomial a node set integrates exactly with its interpolatory weights.
fn quadrature_exactness(family: CollocationFamily, s: usize) -> usize {
    match family {
        CollocationFamily::GaussLegendre => 2 * s - 1,
        CollocationFamily::RadauIIA => 2 * s - 2,
        CollocationFamily::LobattoIIIA => 2 * s - 3,
    }
}

fn validated_tables() -> &'static Result<()> {
    static CHECK: OnceLock<Result<()>> = OnceLock::new();
    CHECK.get_or_init(|| {
        let families = [
            CollocationFamily::GaussLegendre,
            CollocationFamily::RadauIIA,
            CollocationFamily::LobattoIIIA,
        ];
        for family in families {
            let lo = if family == CollocationFamily::LobattoIIIA { 2 } else { 1 };
            for s in lo..=MAX_STAGES {
                let nodes = raw_nodes(family, s);
                let weights = interpolatory_weights(nodes)?;
                for p in 0..=quadrature_exactness(family, s) {
                    let q: f64 = nodes
                        .iter()
                        .zip(&weights)
                        .map(|(&c, &w)| w * c.powi(p as i32))
                        .sum();
                    if (q - 1.0 / (p as f64 + 1.0)).abs() > 1e-13 {
                        return Err(Error::Config(format!(
                            "stored {family}({s}) nodes fail the degree-{p} quadrature check"
                        )));
                    }
                }
            }
        }
        Ok(())
    })
}

fn raw_nodes(family: CollocationFamily, s: usize) -> &'static [f64] {
    match family {
        CollocationFamily::GaussLegendre => GAUSS_NODES[s - 1],
        CollocationFamily::RadauIIA => RADAU_NODES[s - 1],
        CollocationFamily::LobattoIIIA => LOBATTO_NODES[s - 2],
    }
}

/// `∫₀¹ ℓ_j` for the Lagrange polynomials on `nodes`.
fn interpolatory_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let basis = LagrangeBasis::new(nodes)?;
    let rule = gauss_legendre(nodes.len().div_ceil(2) + 1);
    let mut w = vec![0.0; nodes.len()];
    for (&x, &q) in rule.points.iter().zip(&rule.weights) {
        for (wj, lj) in w.iter_mut().zip(basis.values(x)) {
            *wj += q * lj;
        }
    }
    Ok(w)
}

/// Collocation nodes of the `s`-stage member of `family`.
pub fn collocation_nodes(family: CollocationFamily, s: usize) -> Result<Vec<f64>> {
    let min = if family == CollocationFamily::LobattoIIIA { 2 } else { 1 };
    if s < min || s > MAX_STAGES {
        return Err(Error::Config(format!(
            "{family} supports {min} <= s <= {MAX_STAGES}, got s = {s}"
        )));
    }
    if let Err(e) = validated_tables() {
        return Err(Error::Config(e.to_string()));
    }
    Ok(raw_nodes(family, s).to_vec())
}

/// An `s`-stage Runge–Kutta method in Butcher form.
#[derive(Clone, Debug)]
pub struct ButcherTableau {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// `c_s = 1` and the last row of `A` equals `b`.
    pub fn is_stiffly_accurate(&self) -> bool {
        let s = self.stages();
        self.c[s - 1] == 1.0 && (0..s).all(|j| (self.a[(s - 1, j)] - self.b[j]).abs() <= 1e-14)
    }

    pub fn is_confluent(&self) -> bool {
        self.c[0] == 0.0
    }
}

/// Tableau of the collocation method on nodes `c`:
/// `A_ij = ∫₀^{c_i} ℓ_j`, `b_j = ∫₀¹ ℓ_j`.
pub fn tableau_from_nodes(c: &[f64]) -> Result<ButcherTableau> {
    if c.is_empty() {
        return Err(Error::Config("empty node vector".into()));
    }
    if c.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInterpolation("repeated collocation node".into()));
    }
    if c.windows(2).any(|w| w[0] > w[1]) || c.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::Config(
            "collocation nodes must be increasing within [0, 1]".into(),
        ));
    }
    let s = c.len();
    let basis = LagrangeBasis::new(c)?;
    // ℓ_j has degree s - 1; ⌈(2s+1)/2⌉ points integrate it exactly.
    let rule = gauss_legendre((2 * s + 1).div_ceil(2));
    let integrate_to = |upper: f64| -> Vec<f64> {
        let mut acc = vec![0.0; s];
        for (&x, &w) in rule.points.iter().zip(&rule.weights) {
            for (a, l) in acc.iter_mut().zip(basis.values(upper * x)) {
                *a += w * upper * l;
            }
        }
        acc
    };
    let mut a = DenseMatrix::zeros(s, s);
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        a.row_mut(i).copy_from_slice(&integrate_to(ci));
    }
    let b = integrate_to(1.0);
    Ok(ButcherTableau { a, b, c: c.to_vec() })
}

/// Convenience: nodes plus tableau for a family member.
pub fn collocation_tableau(family: CollocationFamily, s: usize) -> Result<ButcherTableau> {
    tableau_from_nodes(&collocation_nodes(family, s)?)
}

/// Rooted tree stored as the sorted list of its children.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RootedTree(Vec<RootedTree>);

impl RootedTree {
    fn order(&self) -> usize {
        1 + self.0.iter().map(RootedTree::order).sum::<usize>()
    }

    fn density(&self) -> f64 {
        self.order() as f64 * self.0.iter().map(RootedTree::density).product::<f64>()
    }

    /// Internal weights `g_i = Σ_j a_ij Π_children g_child(j)`-style product at each stage.
    fn stage_product(&self, t: &ButcherTableau) -> Vec<f64> {
        let s = t.stages();
        let mut prod = vec![1.0; s];
        for child in &self.0 {
            let inner = child.stage_product(t);
            for (i, p) in prod.iter_mut().enumerate() {
                *p *= (0..s).map(|j| t.a[(i, j)] * inner[j]).sum::<f64>();
            }
        }
        prod
    }
}

/// All rooted trees with exactly `order` vertices.
fn trees_of_order(order: usize) -> Vec<RootedTree> {
    fn forests(total: usize, max_child: Option<&RootedTree>, cache: &[Vec<RootedTree>]) -> Vec<Vec<RootedTree>> {
        // Multisets of trees with `total` vertices, each child <= max_child, non-increasing.
        if total == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first_order in (1..=total).rev() {
            for tree in &cache[first_order] {
                if let Some(m) = max_child {
                    if tree > m {
                        continue;
                    }
                }
                for mut rest in forests(total - first_order, Some(tree), cache) {
                    rest.insert(0, tree.clone());
                    out.push(rest);
                }
            }
        }
        out
    }
    let mut cache: Vec<Vec<RootedTree>> = vec![vec![]];
    for n in 1..=order {
        let mut trees: Vec<RootedTree> = forests(n - 1, None, &cache)
            .into_iter()
            .map(RootedTree)
            .collect();
        trees.sort();
        trees.dedup();
        cache.push(trees);
    }
    cache.pop().unwrap_or_default()
}

/// `true` iff `bᵀ Φ(t) = 1/γ(t)` to 1e-10 for every rooted tree of order `<= p`.
pub fn order_conditions_check(t: &ButcherTableau, p: usize) -> bool {
    (1..=p).all(|n| {
        trees_of_order(n).iter().all(|tree| {
            let phi = tree.stage_product(t);
            let lhs: f64 = t.b.iter().zip(&phi).map(|(b, g)| b * g).sum();
            (lhs - 1.0 / tree.density()).abs() <= 1e-10
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| trees_of_order(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20]);
    }

    #[test]
    fn node_examples() {
        assert_eq!(collocation_nodes(CollocationFamily::RadauIIA, 1).unwrap(), vec![1.0]);
        assert_eq!(
            collocation_nodes(CollocationFamily::RadauIIA, 2).unwrap(),
            vec![1.0 / 3.0, 1.0]
        );
        assert_eq!(collocation_nodes(CollocationFamily::GaussLegendre, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn unsupported_stage_counts() {
        assert!(matches!(
            collocation_nodes(CollocationFamily::LobattoIIIA, 1),
            Err(Error::Config(_))
        ));
        assert!(collocation_nodes(CollocationFamily::RadauIIA, 0).is_err());
        assert!(collocation_nodes(CollocationFamily::GaussLegendre, 6).is_err());
    }

    #[test]
    fn stored_nodes_pass_quadrature_oracle() {
        assert!(validated_tables().is_ok());
    }

    #[test]
    fn family_node_shapes() {
        for s in 1..=MAX_STAGES {
            let r = collocation_nodes(CollocationFamily::RadauIIA, s).unwrap();
            assert_eq!(*r.last().unwrap(), 1.0);
            let g = collocation_nodes(CollocationFamily::GaussLegendre, s).unwrap();
            assert!(g.iter().all(|&c| c > 0.0 && c < 1.0));
        }
        for s in 2..=MAX_STAGES {
            let l = collocation_nodes(CollocationFamily::LobattoIIIA, s).unwrap();
            assert_eq!(l[0], 0.0);
            assert_eq!(*l.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn simple_tableaux() {
        let be = tableau_from_nodes(&[1.0]).unwrap();
        assert!((be.a[(0, 0)] - 1.0).abs() < 1e-15 && (be.b[0] - 1.0).abs() < 1e-15);
        let mid = tableau_from_nodes(&[0.5]).unwrap();
        assert!((mid.a[(0, 0)] - 0.5).abs() < 1e-15 && (mid.b[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            tableau_from_nodes(&[0.5, 0.5]),
            Err(Error::DegenerateInterpolation(_))
        ));
    }

    #[test]
    fn backward_euler_orders() {
        let be = tableau_from_nodes(&[1.0]).unwrap();
        assert!(order_conditions_check(&be, 1));
        assert!(!order_conditions_check(&be, 2));
    }

    #[test]
    fn classical_orders_and_structure() {
        use CollocationFamily::*;
        for (family, lo) in [(RadauIIA, 1), (GaussLegendre, 1), (LobattoIIIA, 2)] {
            for s in lo..=MAX_STAGES {
                let t = collocation_tableau(family, s).unwrap();
                let p = family.order(s);
                if p <= 5 {
                    assert!(order_conditions_check(&t, p), "{family}({s}) order {p}");
                    if p < 5 {
                        assert!(!order_conditions_check(&t, p + 1), "{family}({s}) exceeds order {p}");
                    }
                }
                assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for i in 0..s {
                    let row: f64 = t.a.row(i).iter().sum();
                    assert!((row - t.c[i]).abs() < 1e-12);
                }
                match family {
                    RadauIIA | LobattoIIIA => assert!(t.is_stiffly_accurate()),
                    GaussLegendre => assert!(!t.is_stiffly_accurate()),
                }
            }
        }
    }
}
