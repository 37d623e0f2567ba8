//! Hyperbolic volume of a wall polyhedron by adaptive column quadrature.
//!
//! In the upper half-space model the volume element is dx dy dz / z^3, so a
//! region bounded below by hemispheres and on the sides by vertical planes
//! has volume int_footprint 1 / (2 z_min(x, y)^2) dx dy, where z_min is the
//! height of the tallest hemisphere over the point. The integrand is smooth
//! away from hemisphere rims and ideal tangency points, so a quadtree with
//! midpoint cells and one step of Richardson extrapolation converges fast
//! where it can and subdivides where it must.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::halfspace::{positively_spans, KeepSide, PolyhedronSpec, Side, Wall};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadratureParams {
    /// Cells stop splitting after this many halvings of the footprint box.
    pub max_depth: u32,
    /// Absolute tolerance budget, distributed over cells by area.
    pub tol: f64,
    /// Hard cap on visited cells.
    pub max_cells: u64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { max_depth: 8, tol: 1e-6, max_cells: 100_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeEstimate {
    pub value: f64,
    /// Difference against the same quadrature one depth shallower.
    pub error_estimate: f64,
    pub cells: u64,
    pub max_depth: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum VolumeError {
    #[error("wall {index} keeps the inside of a hemisphere, which the column integral does not support")]
    UnsupportedWall { index: usize },
    #[error("volume diverges: the footprint of the vertical walls is unbounded")]
    UnboundedFootprint,
    #[error("volume diverges: the column above ({x}, {y}) reaches the boundary plane")]
    UncoveredColumn { x: f64, y: f64 },
    #[error("cell budget {budget} exhausted before reaching tolerance")]
    CellBudget { budget: u64 },
}

/// Half-plane `a x + b y >= c`.
#[derive(Clone, Copy)]
struct HalfPlane {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Clone, Copy)]
struct Disk {
    cx: f64,
    cy: f64,
    r2: f64,
}

/// Hyperbolic volume of the region cut out by the walls.
///
/// Returns the estimate at `params.max_depth` together with the difference
/// against a run one depth shallower. Hemispheres kept on the inside are
/// rejected, an unbounded footprint or an uncovered column of positive area
/// is reported as divergence.
pub fn polyhedron_volume(
    spec: &PolyhedronSpec,
    params: &QuadratureParams,
) -> Result<VolumeEstimate, VolumeError> {
    let mut half_planes = Vec::new();
    let mut inward = Vec::new();
    let mut disks = Vec::new();
    for (index, wall) in spec.walls.iter().enumerate() {
        match wall {
            Wall::VerticalPlane { normal, offset, keep } => {
                let s = match keep {
                    KeepSide::Geq => 1.0,
                    KeepSide::Leq => -1.0,
                };
                half_planes.push(HalfPlane {
                    a: s * normal[0].to_f64(),
                    b: s * normal[1].to_f64(),
                    c: s * offset.to_f64(),
                });
                let m = match keep {
                    KeepSide::Geq => normal.clone(),
                    KeepSide::Leq => [-normal[0].clone(), -normal[1].clone()],
                };
                inward.push(m);
            }
            Wall::Hemisphere { keep: Side::Inside, .. } => {
                return Err(VolumeError::UnsupportedWall { index });
            }
            Wall::Hemisphere { center, radius, keep: Side::Outside } => {
                let r = radius.to_f64();
                disks.push(Disk { cx: center[0].to_f64(), cy: center[1].to_f64(), r2: r * r });
            }
        }
    }

    let bound = clip_box_extent(&half_planes, &disks);
    let mut footprint = vec![
        (-bound, -bound),
        (bound, -bound),
        (bound, bound),
        (-bound, bound),
    ];
    for hp in &half_planes {
        footprint = clip_half_plane(&footprint, hp);
        if footprint.len() < 3 {
            return Ok(VolumeEstimate {
                value: 0.0,
                error_estimate: 0.0,
                cells: 0,
                max_depth: params.max_depth,
            });
        }
    }
    if !positively_spans(&inward) {
        return Err(VolumeError::UnboundedFootprint);
    }

    let edges = polygon_edges(&footprint);
    let (x0, y0, x1, y1) = bounding_box(&footprint);
    let root_area = (x1 - x0) * (y1 - y0);

    let shallow_depth = params.max_depth.saturating_sub(1);
    let run = |depth: u32| -> Result<(f64, u64), VolumeError> {
        let mut quad = Quadrature {
            edges: &edges,
            disks: &disks,
            tol_per_area: params.tol / root_area,
            max_depth: depth,
            max_cells: params.max_cells,
            cells: 0,
        };
        let value = quad.cell(x0, y0, x1, y1, 0)?;
        Ok((value, quad.cells))
    };
    let (shallow_value, _) = run(shallow_depth)?;
    let (value, cells) = run(params.max_depth)?;
    Ok(VolumeEstimate {
        value,
        error_estimate: (value - shallow_value).abs(),
        cells,
        max_depth: params.max_depth,
    })
}

fn clip_box_extent(half_planes: &[HalfPlane], disks: &[Disk]) -> f64 {
    let mut m: f64 = 1.0;
    for hp in half_planes {
        m = m.max(hp.c.abs());
    }
    for d in disks {
        m = m.max(d.cx.abs() + d.r2.sqrt());
        m = m.max(d.cy.abs() + d.r2.sqrt());
    }
    // A bounded footprint has all of its corners on pairwise line
    // intersections, so grow the box past every one of them.
    for (i, p) in half_planes.iter().enumerate() {
        for q in &half_planes[i + 1..] {
            let det = p.a * q.b - p.b * q.a;
            if det.abs() > 1e-12 {
                let x = (p.c * q.b - q.c * p.b) / det;
                let y = (p.a * q.c - q.a * p.c) / det;
                m = m.max(x.abs()).max(y.abs());
            }
        }
    }
    2.0 * m + 10.0
}

fn clip_half_plane(poly: &[(f64, f64)], hp: &HalfPlane) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let dp = hp.a * p.0 + hp.b * p.1 - hp.c;
        let dq = hp.a * q.0 + hp.b * q.1 - hp.c;
        if dp >= 0.0 {
            out.push(p);
            if dq < 0.0 {
                out.push(intersect(p, q, dp, dq));
            }
        } else if dq >= 0.0 {
            out.push(intersect(p, q, dp, dq));
        }
    }
    out
}

fn intersect(p: (f64, f64), q: (f64, f64), dp: f64, dq: f64) -> (f64, f64) {
    let t = dp / (dp - dq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

fn signed_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p.0 * q.1 - q.0 * p.1;
    }
    acc / 2.0
}

/// Area and centroid; degenerate polygons report zero area.
fn area_centroid(poly: &[(f64, f64)]) -> (f64, f64, f64) {
    if poly.len() < 3 {
        return (0.0, 0.0, 0.0);
    }
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        return (0.0, 0.0, 0.0);
    }
    let n = poly.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p.0 * q.1 - q.0 * p.1;
        cx += (p.0 + q.0) * w;
        cy += (p.1 + q.1) * w;
    }
    (a.abs(), cx / (6.0 * a), cy / (6.0 * a))
}

fn polygon_edges(poly: &[(f64, f64)]) -> Vec<HalfPlane> {
    let mut pts: Vec<(f64, f64)> = poly.to_vec();
    if signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    let n = pts.len();
    let mut edges = Vec::with_capacity(n);
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        if dx.abs() + dy.abs() < 1e-14 {
            continue;
        }
        // interior lies to the left of each counterclockwise edge
        let (a, b) = (-dy, dx);
        edges.push(HalfPlane { a, b, c: a * p.0 + b * p.1 });
    }
    edges
}

fn bounding_box(poly: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut x0 = f64::INFINITY;
    let mut y0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in poly {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    (x0, y0, x1, y1)
}

struct Quadrature<'a> {
    edges: &'a [HalfPlane],
    disks: &'a [Disk],
    tol_per_area: f64,
    max_depth: u32,
    max_cells: u64,
    cells: u64,
}

const SLIVER_FRACTION: f64 = 1e-9;

fn quarters(x0: f64, y0: f64, x1: f64, y1: f64) -> [(f64, f64, f64, f64); 4] {
    let mx = 0.5 * (x0 + x1);
    let my = 0.5 * (y0 + y1);
    [(x0, y0, mx, my), (mx, y0, x1, my), (x0, my, mx, y1), (mx, my, x1, y1)]
}

impl Quadrature<'_> {
    /// Column integral 1 / (2 z_min^2) over the tallest hemisphere, if any.
    fn column(&self, x: f64, y: f64) -> Option<f64> {
        let mut best: f64 = 0.0;
        for d in self.disks {
            let z2 = d.r2 - (x - d.cx).powi(2) - (y - d.cy).powi(2);
            best = best.max(z2);
        }
        if best > 0.0 {
            Some(0.5 / best)
        } else {
            None
        }
    }

    fn rect_fully_uncovered(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
        self.disks.iter().all(|d| {
            let nx = d.cx.clamp(x0, x1);
            let ny = d.cy.clamp(y0, y1);
            (nx - d.cx).powi(2) + (ny - d.cy).powi(2) >= d.r2
        })
    }

    fn clipped(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> (f64, f64, f64) {
        let mut poly = vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        for e in self.edges {
            poly = clip_half_plane(&poly, e);
            if poly.len() < 3 {
                return (0.0, 0.0, 0.0);
            }
        }
        area_centroid(&poly)
    }

    /// Midpoint estimate of one rect; `None` when the centroid column is
    /// uncovered, `Some(0)` when the rect misses the footprint.
    fn midpoint(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> Option<f64> {
        let (area, cx, cy) = self.clipped(x0, y0, x1, y1);
        if area <= 0.0 {
            return Some(0.0);
        }
        self.column(cx, cy).map(|f| area * f)
    }

    fn cell(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, depth: u32) -> Result<f64, VolumeError> {
        self.cells += 1;
        if self.cells > self.max_cells {
            return Err(VolumeError::CellBudget { budget: self.max_cells });
        }
        let (area, cx, cy) = self.clipped(x0, y0, x1, y1);
        if area <= 0.0 {
            return Ok(0.0);
        }
        let rect_area = (x1 - x0) * (y1 - y0);
        let in_footprint = area > SLIVER_FRACTION * rect_area;
        if in_footprint && self.rect_fully_uncovered(x0, y0, x1, y1) {
            return Err(VolumeError::UncoveredColumn { x: cx, y: cy });
        }
        let center = self.column(cx, cy);
        if depth >= self.max_depth {
            return match center {
                Some(f) => Ok(area * f),
                None if in_footprint => Err(VolumeError::UncoveredColumn { x: cx, y: cy }),
                None => Ok(0.0),
            };
        }

        // Midpoint sums at three scales give two Richardson extrapolants of
        // the order-two rule; their gap estimates the error of the finer one
        // at fourth order, so smooth cells settle shallow while rims and
        // tangency points keep splitting.
        'gate: {
            let Some(f_center) = center else { break 'gate };
            let est1 = area * f_center;
            let mut est2 = 0.0;
            let mut est4 = 0.0;
            for &(a0, b0, a1, b1) in &quarters(x0, y0, x1, y1) {
                match self.midpoint(a0, b0, a1, b1) {
                    Some(v) => est2 += v,
                    None => break 'gate,
                }
                for &(g0, h0, g1, h1) in &quarters(a0, b0, a1, b1) {
                    match self.midpoint(g0, h0, g1, h1) {
                        Some(v) => est4 += v,
                        None => break 'gate,
                    }
                }
            }
            let coarse = est2 + (est2 - est1) / 3.0;
            let fine = est4 + (est4 - est2) / 3.0;
            if (fine - coarse).abs() <= 15.0 * self.tol_per_area * rect_area {
                return Ok(fine);
            }
        }

        let mut total = 0.0;
        for &(a0, b0, a1, b1) in &quarters(x0, y0, x1, y1) {
            total += self.cell(a0, b0, a1, b1, depth + 1)?;
        }
        Ok(total)
    }
}
