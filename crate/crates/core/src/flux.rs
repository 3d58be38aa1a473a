//! Divergence identities over polygons: the boundary flux of `phi N` or
//! `phi D N_perp` against the interior integral of its divergence.

use crate::error::{Error, Result};
use crate::fields::FrameField;
use crate::geometry::{Point, Rect};
use crate::quadrature::{gauss_legendre_8_on, subdivide_triangle, triangle_rule};
use charflow_expr::Expr;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A simple, counterclockwise polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonJson", into = "PolygonJson")]
pub struct PolygonDomain {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolygonJson {
    Bare(Vec<[f64; 2]>),
    Object { vertices: Vec<[f64; 2]> },
}

impl TryFrom<PolygonJson> for PolygonDomain {
    type Error = Error;
    fn try_from(j: PolygonJson) -> Result<Self> {
        let (PolygonJson::Bare(v) | PolygonJson::Object { vertices: v }) = j;
        PolygonDomain::new(v.into_iter().map(|[x, y]| Point::new(x, y)).collect())
    }
}

impl From<PolygonDomain> for PolygonJson {
    fn from(d: PolygonDomain) -> Self {
        PolygonJson::Object {
            vertices: d.vertices.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxResult {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

impl PolygonDomain {
    /// Validates vertex count, finiteness, simplicity and counterclockwise
    /// orientation. A clockwise polygon is rejected rather than reversed.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let d = PolygonDomain { vertices };
        let area = d.signed_area();
        if area == 0.0 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            return Err(Error::InvalidPolygon(
                "vertices are clockwise; outward normals need counterclockwise order".into(),
            ));
        }
        let n = d.vertices.len();
        for i in 0..n {
            let (a, b) = d.edge(i);
            if a == b {
                return Err(Error::InvalidPolygon(format!("repeated vertex {i}")));
            }
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, e) = d.edge(j);
                if segments_cross(a, b, c, e) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(d)
    }

    pub fn rectangle(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(xmin, ymin),
            Point::new(xmax, ymin),
            Point::new(xmax, ymax),
            Point::new(xmin, ymax),
        ])
    }

    /// Polygon through `m + 1` points on each arc of the annular sector
    /// `rmin <= r <= rmax`, `a0 <= angle <= a1`.
    pub fn annular_sector(rmin: f64, rmax: f64, a0: f64, a1: f64, m: usize) -> Result<Self> {
        let m = m.max(1);
        let angle = |i: usize| a0 + (a1 - a0) * i as f64 / m as f64;
        let mut v: Vec<Point> = (0..=m).map(|i| Point::polar(angle(i)) * rmax).collect();
        v.extend((0..=m).rev().map(|i| Point::polar(angle(i)) * rmin));
        Self::new(v)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn edge(&self, i: usize) -> (Point, Point) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = self.edge(i);
                a.cross(b)
            })
            .sum::<f64>()
    }

    /// Winding-number test; points within `1e-12` of the boundary count as
    /// outside.
    pub fn contains(&self, q: Point) -> bool {
        let n = self.vertices.len();
        let mut winding = 0i32;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if crate::tracer::segment_distance(a, b, q) < 1e-12 {
                return false;
            }
            let side = (b - a).cross(q - a);
            if a.y <= q.y {
                if b.y > q.y && side > 0.0 {
                    winding += 1;
                }
            } else if b.y <= q.y && side < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    /// Ear-clipping triangulation.
    pub fn triangulate(&self) -> Vec<[Point; 3]> {
        let mut idx: Vec<usize> = (0..self.vertices.len()).collect();
        let v = &self.vertices;
        let scale = self.signed_area().abs();
        let mut out = Vec::with_capacity(v.len().saturating_sub(2));
        while idx.len() > 3 {
            let m = idx.len();
            let mut clipped = false;
            for k in 0..m {
                let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
                let (a, b, c) = (v[ia], v[ib], v[ic]);
                let cr = (b - a).cross(c - b);
                if cr <= 1e-14 * scale {
                    continue;
                }
                let blocked = idx.iter().any(|&j| {
                    j != ia && j != ib && j != ic && in_triangle(v[j], a, b, c)
                });
                if !blocked {
                    out.push([a, b, c]);
                    idx.remove(k);
                    clipped = true;
                    break;
                }
            }
            if !clipped {
                // only flat or nearly flat corners remain; dropping the
                // flattest one does not change the region
                let k = (0..m)
                    .min_by(|&x, &y| {
                        let f = |k: usize| {
                            let (a, b, c) = (v[idx[(k + m - 1) % m]], v[idx[k]], v[idx[(k + 1) % m]]);
                            (b - a).cross(c - b).abs()
                        };
                        f(x).total_cmp(&f(y))
                    })
                    .expect("nonempty");
                idx.remove(k);
            }
        }
        out.push([v[idx[0]], v[idx[1]], v[idx[2]]]);
        out
    }

    /// Boundary integral of `g(q) . nu(q)` with eight-point Gauss-Legendre
    /// on edge pieces no longer than `1 / refinement`.
    pub fn boundary_integral<G>(&self, refinement: usize, g: G) -> Result<f64>
    where
        G: Fn(Point) -> Result<Point>,
    {
        let mut total = 0.0;
        for i in 0..self.vertices.len() {
            let (a, b) = self.edge(i);
            let len = a.dist(b);
            let nu = (b - a).rot_cw() * (1.0 / len);
            let pieces = ((len * refinement as f64) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let t0 = k as f64 / pieces as f64;
                let t1 = (k + 1) as f64 / pieces as f64;
                for (t, w) in gauss_legendre_8_on(t0, t1) {
                    total += w * len * g(a.lerp(b, t))?.dot(nu);
                }
            }
        }
        Ok(total)
    }

    /// Interior integral over the triangulation, each triangle split so that
    /// pieces are no longer than `32 / refinement`.
    pub fn interior_integral<G>(&self, refinement: usize, g: G) -> Result<f64>
    where
        G: Fn(Point) -> Result<f64> + Sync,
    {
        let tris = self.triangulate();
        let parts: Vec<f64> = tris
            .par_iter()
            .map(|t| {
                let longest = t[0].dist(t[1]).max(t[1].dist(t[2])).max(t[2].dist(t[0]));
                let m = ((longest * refinement as f64 / 32.0).ceil() as usize).max(1);
                let mut s = 0.0;
                for sub in subdivide_triangle(t[0], t[1], t[2], m) {
                    for (p, w) in triangle_rule(sub[0], sub[1], sub[2]) {
                        s += w * g(p)?;
                    }
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidPolygon(e.to_string()))
    }
}

fn in_triangle(q: Point, a: Point, b: Point, c: Point) -> bool {
    let d1 = (b - a).cross(q - a);
    let d2 = (c - b).cross(q - b);
    let d3 = (a - c).cross(q - c);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Rejects domains that meet the singular set on a 65 x 65 lattice over the
/// bounding box. Quadrature nodes alone can step over a singular curve.
fn require_nonsingular(field: &FrameField, domain: &PolygonDomain) -> Result<()> {
    if !field.is_graph() {
        return Ok(());
    }
    let v = domain.vertices();
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&Point) -> f64| v.iter().map(pick).fold(init, f);
    let bbox = Rect::new(
        fold(f64::min, f64::INFINITY, |p| p.x),
        fold(f64::max, f64::NEG_INFINITY, |p| p.x),
        fold(f64::min, f64::INFINITY, |p| p.y),
        fold(f64::max, f64::NEG_INFINITY, |p| p.y),
    );
    for q in bbox.grid(65) {
        if domain.contains(q) {
            if let Err(e @ Error::SingularPoint { .. }) = field.normal(q) {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn weight(phi: Option<&Expr>, p: Point) -> Result<(f64, Point)> {
    match phi {
        None => Ok((1.0, Point::default())),
        Some(e) => {
            let d = e
                .eval_dual(p.x, p.y)
                .map_err(|source| Error::Domain { p, source })?;
            Ok((d.value, Point::new(d.dx, d.dy)))
        }
    }
}

fn result(lhs: f64, rhs: f64) -> FluxResult {
    FluxResult {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    }
}

/// `closed integral of phi N . nu` against `integral of grad phi . N + phi H`.
pub fn flux_n(
    field: &FrameField,
    domain: &PolygonDomain,
    phi: Option<&Expr>,
    refinement: usize,
) -> Result<FluxResult> {
    require_nonsingular(field, domain)?;
    let lhs = domain.boundary_integral(refinement, |p| {
        let (w, _) = weight(phi, p)?;
        Ok(field.normal(p)? * w)
    })?;
    let rhs = domain.interior_integral(refinement, |p| {
        let (w, gw) = weight(phi, p)?;
        let n = field.normal(p)?;
        Ok(gw.dot(n) + w * field.h(p)?)
    })?;
    Ok(result(lhs, rhs))
}

/// `closed integral of phi D N_perp . nu` against
/// `integral of grad phi . D N_perp + phi rot F`. Graph mode only.
pub fn flux_dnperp(
    field: &FrameField,
    domain: &PolygonDomain,
    phi: Option<&Expr>,
    refinement: usize,
) -> Result<FluxResult> {
    if !field.is_graph() {
        return Err(Error::Mode(format!(
            "flux of D N_perp needs a graph-mode field; '{}' is direct",
            field.name
        )));
    }
    require_nonsingular(field, domain)?;
    let dnperp = |p: Point| -> Result<Point> {
        let (n, d) = field.normal_and_d(p)?;
        Ok(n.rot_cw() * d.expect("graph mode"))
    };
    let lhs = domain.boundary_integral(refinement, |p| {
        let (w, _) = weight(phi, p)?;
        Ok(dnperp(p)? * w)
    })?;
    let rhs = domain.interior_integral(refinement, |p| {
        let (w, gw) = weight(phi, p)?;
        Ok(gw.dot(dnperp(p)?) + w * field.rot_f(p)?)
    })?;
    Ok(result(lhs, rhs))
}
