//! Quasi-static stability: support hull, center-of-mass containment,
//! critical overturning angle and inertia.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Tolerance for half-plane and containment tests.
pub const HULL_EPS: f64 = 1e-9;

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HullKind {
    Point,
    Segment,
    Polygon,
}

/// Convex hull in counter-clockwise order without collinear vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hull {
    pub vertices: Vec<Point2>,
    pub kind: HullKind,
}

impl Hull {
    pub fn is_degenerate(&self) -> bool {
        self.kind != HullKind::Polygon
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        self.edges().map(|(a, b)| a[0] * b[1] - a[1] * b[0]).sum::<f64>() / 2.0
    }
}

#[inline]
fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone chain hull. Panics on an empty input.
pub fn convex_hull_2d(points: &[Point2]) -> Hull {
    assert!(!points.is_empty(), "convex hull of an empty set");
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() == 1 {
        return Hull { vertices: pts, kind: HullKind::Point };
    }

    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() == 2 {
        Hull { vertices: lower, kind: HullKind::Segment }
    } else {
        Hull { vertices: lower, kind: HullKind::Polygon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Containment {
    pub location: Location,
    /// Distance to the hull boundary, negative outside.
    pub signed_distance: f64,
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Signed distance from `p` to the left of the directed line `a -> b`.
fn line_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    cross(a, b, p) / len
}

/// Half-plane containment test for polygonal hulls.
pub fn point_in_hull(p: Point2, hull: &Hull) -> Result<Containment> {
    if hull.is_degenerate() {
        return Err(Error::DegenerateHull);
    }
    let inner = hull.edges().map(|(a, b)| line_distance(p, a, b)).fold(f64::INFINITY, f64::min);
    if inner >= -HULL_EPS {
        let location = if inner.abs() <= HULL_EPS { Location::Boundary } else { Location::Inside };
        return Ok(Containment { location, signed_distance: inner.max(0.0) });
    }
    let outer = hull.edges().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min);
    Ok(Containment { location: Location::Outside, signed_distance: -outer })
}

/// Signed distance for any hull kind. Degenerate hulls have no interior, so
/// the result is never positive.
pub fn hull_margin(p: Point2, hull: &Hull) -> f64 {
    match hull.kind {
        HullKind::Polygon => point_in_hull(p, hull).expect("polygon hull").signed_distance,
        HullKind::Point => -segment_distance(p, hull.vertices[0], hull.vertices[0]),
        HullKind::Segment => -segment_distance(p, hull.vertices[0], hull.vertices[1]),
    }
}

/// Smallest tilt, in degrees, about a hull edge that carries the projected
/// center of mass `c` over that edge. `z_ground` is the contact plane.
pub fn critical_tilt(c: [f64; 3], hull: &Hull, z_ground: f64) -> Result<f64> {
    let p = [c[0], c[1]];
    let height = c[2] - z_ground;
    if hull.is_degenerate() {
        return if hull_margin(p, hull) >= -HULL_EPS { Ok(0.0) } else { Err(Error::ComOutsideHull) };
    }
    let containment = point_in_hull(p, hull)?;
    if containment.location == Location::Outside {
        return Err(Error::ComOutsideHull);
    }
    let angle = hull
        .edges()
        .map(|(a, b)| line_distance(p, a, b).max(0.0).atan2(height))
        .fold(f64::INFINITY, f64::min);
    Ok(angle.to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassProperties {
    pub mass: f64,
    pub com: [f64; 3],
    /// Inertia tensor about the center of mass.
    pub inertia: [[f64; 3]; 3],
}

/// Mass, center of mass and inertia of a density field with unit material
/// density. Each cell is a solid cube: point-mass term about the center of
/// mass plus `m h^2 / 6` on the diagonal.
pub fn com_and_inertia(rho_t: &[f64], spec: &GridSpec) -> Result<MassProperties> {
    let dv = spec.cell_volume();
    let com = crate::objective::mass_center(rho_t, spec)?;
    let h2 = spec.cell_size().powi(2);
    let mut mass = 0.0;
    let mut inertia = [[0.0; 3]; 3];
    for (idx, &r) in rho_t.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let m = r * dv;
        mass += m;
        let p = spec.center_of(idx);
        let d = [p[0] - com[0], p[1] - com[1], p[2] - com[2]];
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { d2 + h2 / 6.0 } else { 0.0 };
                inertia[i][j] += m * (delta - d[i] * d[j]);
            }
        }
    }
    Ok(MassProperties { mass, com, inertia })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StabilityOptions {
    /// Use cell corners instead of centers for the support polygon.
    pub inflate_half_cell: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub mass: f64,
    pub com: [f64; 3],
    pub hull: Vec<Point2>,
    pub hull_kind: HullKind,
    pub support_cells: usize,
    pub stable: bool,
    pub margin: f64,
    pub critical_tilt_deg: Option<f64>,
    /// Tilt needed to bring an outside center of mass back over the hull
    /// boundary; zero for stable bodies.
    pub rot_deg: f64,
    pub inertia: [[f64; 3]; 3],
}

/// Static stability of a density field resting on the bottom face of layer
/// `z_min`.
pub fn evaluate_stability(rho_t: &[f64], spec: &GridSpec, z_min: usize, opts: &StabilityOptions) -> Result<StabilityReport> {
    if rho_t.len() != spec.len() {
        return Err(Error::SizeMismatch { expected: spec.len(), actual: rho_t.len() });
    }
    let n = spec.resolution();
    let half = spec.cell_size() / 2.0;
    let mut points = Vec::new();
    let mut support_cells = 0;
    for y in 0..n {
        for x in 0..n {
            if rho_t[spec.index(x, y, z_min)] <= 0.5 {
                continue;
            }
            support_cells += 1;
            let (cx, cy) = (spec.axis_center(x), spec.axis_center(y));
            if opts.inflate_half_cell {
                for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    points.push([cx + sx * half, cy + sy * half]);
                }
            } else {
                points.push([cx, cy]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }

    let props = com_and_inertia(rho_t, spec)?;
    let hull = convex_hull_2d(&points);
    let z_ground = spec.layer_bottom(z_min);
    let raw_margin = hull_margin([props.com[0], props.com[1]], &hull);
    let stable = raw_margin >= -HULL_EPS;
    let margin = if stable { raw_margin.max(0.0) } else { raw_margin };
    let critical_tilt_deg = if stable { Some(critical_tilt(props.com, &hull, z_ground)?) } else { None };
    let rot_deg = if stable { 0.0 } else { (-margin).atan2(props.com[2] - z_ground).to_degrees() };

    Ok(StabilityReport {
        mass: props.mass,
        com: props.com,
        hull: hull.vertices,
        hull_kind: hull.kind,
        support_cells,
        stable,
        margin,
        critical_tilt_deg,
        rot_deg,
        inertia: props.inertia,
    })
}
