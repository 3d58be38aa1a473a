//! Bundles of nearby integral curves: how far apart they end up, and the
//! flux through the wedge they sweep out.

use crate::error::{Error, Result};
use crate::fields::FrameField;
use crate::flux::{flux_dnperp, flux_n, PolygonDomain};
use crate::geometry::{Point, Rect};
use crate::tracer::{trace, Curve, CurveKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunnelRow {
    pub r: f64,
    /// Largest pairwise distance where the branches cross the transverse
    /// line at distance `r` ahead of the center.
    pub separation: Option<f64>,
    /// Same, measured where the branches first leave the ball `B_r`.
    pub sphere_separation: Option<f64>,
    /// Boundary flux through the wedge between the outermost branches,
    /// closed off by the transverse line.
    pub flux: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunnelReport {
    pub center: Point,
    pub kind: CurveKind,
    pub delta: f64,
    pub rows: Vec<FunnelRow>,
    pub branches: Vec<Curve>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunnelOptions {
    pub step: f64,
    pub bbox: Rect,
    /// Quadrature refinement for the wedge flux.
    pub refinement: usize,
    /// Vertex budget for each side of the wedge polygon.
    pub max_side_vertices: usize,
}

impl FunnelOptions {
    pub fn new(bbox: Rect) -> Self {
        Self {
            step: 1e-3,
            bbox,
            refinement: 64,
            max_side_vertices: 100,
        }
    }
}

/// First point where `level` (increasing along the curve from below `target`)
/// reaches `target`, with its index, by linear interpolation.
fn first_crossing<L: Fn(Point) -> f64>(pts: &[Point], level: L, target: f64) -> Option<(usize, Point)> {
    for (i, w) in pts.windows(2).enumerate() {
        let (la, lb) = (level(w[0]), level(w[1]));
        if la < target && lb >= target {
            let t = (target - la) / (lb - la);
            return Some((i, w[0].lerp(w[1], t)));
        }
    }
    None
}

fn max_pairwise(pts: &[Point]) -> f64 {
    let mut m = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            m = m.max(a.dist(*b));
        }
    }
    m
}

fn decimate(pts: &[Point], budget: usize) -> Vec<Point> {
    if pts.len() <= budget {
        return pts.to_vec();
    }
    let stride = (pts.len() - 1).div_ceil(budget - 1);
    let mut out: Vec<Point> = pts.iter().step_by(stride).copied().collect();
    if out.last() != pts.last() {
        out.push(*pts.last().expect("nonempty"));
    }
    out
}

/// Launches `n_branches` curves from `p` offset across `[-delta, delta]`
/// (along `N` for characteristics, along `N_perp` for seeds) and measures
/// them at each radius in `r_values`.
pub fn funnel(
    field: &FrameField,
    p: Point,
    kind: CurveKind,
    r_values: &[f64],
    n_branches: usize,
    delta: f64,
    opts: &FunnelOptions,
) -> Result<FunnelReport> {
    if n_branches < 2 || !(delta > 0.0) || r_values.iter().any(|&r| !(r > delta)) {
        return Err(Error::InvalidArgument(
            "funnel needs at least 2 branches, delta > 0 and every r > delta".into(),
        ));
    }
    let n = field.normal(p)?;
    let (offset_dir, ahead) = match kind {
        CurveKind::Characteristic => (n, n.rot_cw()),
        CurveKind::Seed => (n.rot_cw(), n),
    };
    let rmax = r_values.iter().fold(0.0f64, |m, &r| m.max(r));
    let branches: Vec<Curve> = (0..n_branches)
        .into_par_iter()
        .map(|b| {
            let o = -delta + 2.0 * delta * b as f64 / (n_branches - 1) as f64;
            trace(field, p + offset_dir * o, kind, 3.0 * rmax, opts.step, &opts.bbox)
        })
        .collect::<Result<_>>()?;
    let polylines: Vec<Vec<Point>> = branches.iter().map(Curve::points).collect();

    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let section: Option<Vec<(usize, Point)>> = polylines
            .iter()
            .map(|pl| first_crossing(pl, |q| (q - p).dot(ahead), r))
            .collect();
        let sphere: Option<Vec<Point>> = polylines
            .iter()
            .map(|pl| first_crossing(pl, |q| q.dist(p), r).map(|(_, q)| q))
            .collect();
        let flux = section.as_ref().and_then(|s| {
            let first = &polylines[0];
            let last = &polylines[n_branches - 1];
            let (i0, c0) = s[0];
            let (i1, c1) = s[n_branches - 1];
            let mut v = decimate(&first[..=i0], opts.max_side_vertices);
            v.push(c0);
            v.push(c1);
            let mut back = decimate(&last[..=i1], opts.max_side_vertices);
            back.reverse();
            v.extend(back);
            v.dedup();
            if polygon_area(&v) < 0.0 {
                v.reverse();
            }
            let poly = PolygonDomain::new(v).ok()?;
            let res = match kind {
                CurveKind::Seed => flux_n(field, &poly, None, opts.refinement),
                CurveKind::Characteristic => flux_dnperp(field, &poly, None, opts.refinement),
            };
            res.ok().map(|f| f.lhs)
        });
        rows.push(FunnelRow {
            r,
            separation: section.map(|s| max_pairwise(&s.iter().map(|(_, q)| *q).collect::<Vec<_>>())),
            sphere_separation: sphere.map(|s| max_pairwise(&s)),
            flux,
        });
    }
    Ok(FunnelReport {
        center: p,
        kind,
        delta,
        rows,
        branches,
    })
}

fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn parallel_lines_keep_their_spacing() {
        let e = catalog::get("bilinear").unwrap();
        let rep = funnel(
            &e.frame,
            e.center,
            CurveKind::Characteristic,
            &[0.1, 0.25, 0.5],
            5,
            1e-6,
            &FunnelOptions::new(e.trace_box),
        )
        .unwrap();
        for row in &rep.rows {
            assert!((row.separation.unwrap() - 2e-6).abs() < 1e-12);
        }
    }

    #[test]
    fn decimation_keeps_ends() {
        let pts: Vec<Point> = (0..1001).map(|i| Point::new(i as f64, 0.0)).collect();
        let d = decimate(&pts, 100);
        assert!(d.len() <= 101);
        assert_eq!(d[0], pts[0]);
        assert_eq!(*d.last().unwrap(), pts[1000]);
    }
}
