//! Gauss-Legendre rules on intervals and triangles.

use crate::geometry::Point;

/// Eight-point Gauss-Legendre nodes on `[-1, 1]`, positive half.
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Nodes and weights of the eight-point rule on `[-1, 1]`, ascending.
pub fn gauss_legendre_8() -> [(f64, f64); 8] {
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[3 - i] = (-GL8_NODES[i], GL8_WEIGHTS[i]);
        out[4 + i] = (GL8_NODES[i], GL8_WEIGHTS[i]);
    }
    out
}

/// Nodes and weights of the eight-point rule mapped to `[a, b]`.
pub fn gauss_legendre_8_on(a: f64, b: f64) -> [(f64, f64); 8] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre_8().map(|(x, w)| (mid + half * x, half * w))
}

/// Collapsed-square (Duffy) rule with 8 x 8 points on the triangle `abc`:
/// points and weights summing to its area.
pub fn triangle_rule(a: Point, b: Point, c: Point) -> Vec<(Point, f64)> {
    let two_area = (b - a).cross(c - a).abs();
    let g = gauss_legendre_8_on(0.0, 1.0);
    let mut out = Vec::with_capacity(64);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            let p = a + (b - a) * (u * (1.0 - v)) + (c - a) * (u * v);
            out.push((p, wu * wv * u * two_area));
        }
    }
    out
}

/// Splits a triangle into `m * m` similar copies.
pub fn subdivide_triangle(a: Point, b: Point, c: Point, m: usize) -> Vec<[Point; 3]> {
    let at = |i: usize, j: usize| a + (b - a) * (i as f64 / m as f64) + (c - a) * (j as f64 / m as f64);
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m - j {
            out.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
            if i + j + 1 < m {
                out.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rule_is_exact_to_degree_15() {
        let s: f64 = gauss_legendre_8_on(0.0, 2.0)
            .iter()
            .map(|(x, w)| w * x.powi(15))
            .sum();
        assert!((s - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_area_and_moment() {
        let (a, b, c) = (Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 1.0));
        let r = triangle_rule(a, b, c);
        let area: f64 = r.iter().map(|(_, w)| w).sum();
        let mx: f64 = r.iter().map(|(p, w)| w * p.x).sum();
        assert!((area - 1.0).abs() < 1e-14);
        assert!((mx - 2.0 / 3.0).abs() < 1e-14);
        let sub = subdivide_triangle(a, b, c, 3);
        assert_eq!(sub.len(), 9);
        let total: f64 = sub.iter().map(|t| 0.5 * (t[1] - t[0]).cross(t[2] - t[0])).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
