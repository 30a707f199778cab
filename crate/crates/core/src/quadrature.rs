//! Quadrature on triangles and on straight edges.

use crate::mesh::Point;

/// Symmetric rule in barycentric coordinates; weights sum to one and are
/// multiplied by the element area.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Six-point rule exact for polynomials of total degree 4.
    #[allow(clippy::excessive_precision)]
    pub fn degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const W1: f64 = 0.223_381_589_678_011_465_944_827_298_664;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402;
        const W2: f64 = 0.109_951_743_655_321_867_388_506_034_669;
        let b1 = 1.0 - 2.0 * A1;
        let b2 = 1.0 - 2.0 * A2;
        Self {
            points: vec![
                [b1, A1, A1],
                [A1, b1, A1],
                [A1, A1, b1],
                [b2, A2, A2],
                [A2, b2, A2],
                [A2, A2, b2],
            ],
            weights: vec![W1, W1, W1, W2, W2, W2],
            degree: 4,
        }
    }

    /// Maps the rule onto a physical triangle: `(point, weight × area)` pairs.
    pub fn mapped(&self, tri: &[Point; 3]) -> impl Iterator<Item = (Point, [f64; 3], f64)> + '_ {
        let [a, b, c] = *tri;
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
        let tri = *tri;
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let p = [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ];
            (p, *l, w * area)
        })
    }
}

impl Default for TriangleRule {
    fn default() -> Self {
        Self::degree4()
    }
}

/// Gauss–Legendre rule on `[0, 1]`; weights sum to one.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn gauss_legendre(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one point");
        let mut points = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // Newton on P_m starting from the Chebyshev-like guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map [-1, 1] -> [0, 1].
            points[i] = 0.5 * (1.0 - x);
            points[m - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[m - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    /// Highest polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.points.len() - 1
    }

    /// `(point, parameter t ∈ [0,1], weight × length)` along the segment `a → b`.
    pub fn mapped(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64, f64)> + '_ {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        self.points.iter().zip(&self.weights).map(move |(&t, &w)| {
            ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], t, w * len)
        })
    }
}

impl Default for EdgeRule {
    fn default() -> Self {
        Self::gauss_legendre(10)
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn integrate_triangle<F>(f: F, tri: &[Point; 3], rule: &TriangleRule) -> f64
where
    F: Fn(Point) -> f64,
{
    rule.mapped(tri).map(|(p, _, w)| w * f(p)).sum()
}

pub fn integrate_edge<F>(f: F, edge: [Point; 2], rule: &EdgeRule) -> f64
where
    F: Fn(Point) -> f64,
{
    rule.mapped(edge[0], edge[1]).map(|(p, _, w)| w * f(p)).sum()
}
