//! Walls in the upper half-space model and their exact dihedral angles.
//!
//! A wall is a totally geodesic plane of H^3 together with a choice of closed
//! half-space: either a Euclidean vertical plane or a hemisphere centered on
//! the boundary plane. All wall data lives in Q(√2), so incidence questions
//! (transverse, tangent at an ideal point, disjoint, identical) are decided
//! exactly instead of through a floating-point epsilon.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{rat, rat_int, Q2};

/// Which closed half-space of a vertical plane `n.(x,y) = c` is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeepSide {
    /// Keep `n.(x,y) >= c`.
    Geq,
    /// Keep `n.(x,y) <= c`.
    Leq,
}

/// Which side of a hemisphere is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inside,
    Outside,
}

/// A geodesic wall of H^3 with a preferred closed half-space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Wall {
    /// Vertical Euclidean plane `normal . (x, y) = offset`, with `normal`
    /// of exact unit length.
    VerticalPlane { normal: [Q2; 2], offset: Q2, keep: KeepSide },
    /// Euclidean hemisphere of the given radius centered at `(center, 0)`.
    Hemisphere { center: [Q2; 2], radius: Q2, keep: Side },
}

/// A point of the boundary sphere at infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryPoint {
    Finite { x: Q2, y: Q2 },
    Infinity,
}

/// How two walls meet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleResult {
    /// Transverse intersection along a geodesic; the dihedral angle is
    /// measured inside the kept half-spaces and `radians = acos(cos)`.
    Angle { cos: Q2, radians: f64 },
    /// The walls meet only at a single ideal point.
    TangentIdeal { point: BoundaryPoint },
    /// The walls have positive distance or are nested.
    Disjoint,
    /// The walls coincide as subsets of H^3.
    Identical,
}

impl AngleResult {
    /// Transverse intersection with the given exact cosine.
    pub fn angle(cos: Q2) -> AngleResult {
        let radians = cos.to_f64().clamp(-1.0, 1.0).acos();
        AngleResult::Angle { cos, radians }
    }

    pub fn tangent_at(x: Q2, y: Q2) -> AngleResult {
        AngleResult::TangentIdeal { point: BoundaryPoint::Finite { x, y } }
    }

    pub fn tangent_at_infinity() -> AngleResult {
        AngleResult::TangentIdeal { point: BoundaryPoint::Infinity }
    }
}

impl fmt::Display for AngleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleResult::Angle { radians, .. } => write!(f, "{:.6} rad", radians),
            AngleResult::TangentIdeal { point: BoundaryPoint::Infinity } => {
                write!(f, "tangent at infinity")
            }
            AngleResult::TangentIdeal { point: BoundaryPoint::Finite { x, y } } => {
                write!(f, "tangent at ({}, {})", x, y)
            }
            AngleResult::Disjoint => write!(f, "disjoint"),
            AngleResult::Identical => write!(f, "identical"),
        }
    }
}

fn dot2(a: &[Q2; 2], b: &[Q2; 2]) -> Q2 {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone()
}

fn sub2(a: &[Q2; 2], b: &[Q2; 2]) -> [Q2; 2] {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

fn add2(a: &[Q2; 2], b: &[Q2; 2]) -> [Q2; 2] {
    [a[0].clone() + b[0].clone(), a[1].clone() + b[1].clone()]
}

fn scale2(v: &[Q2; 2], t: &Q2) -> [Q2; 2] {
    [v[0].clone() * t.clone(), v[1].clone() * t.clone()]
}

fn neg2(v: &[Q2; 2]) -> [Q2; 2] {
    [-v[0].clone(), -v[1].clone()]
}

fn perp2(v: &[Q2; 2]) -> [Q2; 2] {
    [-v[1].clone(), v[0].clone()]
}

fn rot2(v: &[Q2; 2], cos: &Q2, sin: &Q2) -> [Q2; 2] {
    [
        cos.clone() * v[0].clone() - sin.clone() * v[1].clone(),
        sin.clone() * v[0].clone() + cos.clone() * v[1].clone(),
    ]
}

fn keep_sign(keep: KeepSide) -> Q2 {
    match keep {
        KeepSide::Geq => Q2::one(),
        KeepSide::Leq => -Q2::one(),
    }
}

fn side_sign(side: Side) -> Q2 {
    match side {
        Side::Outside => Q2::one(),
        Side::Inside => -Q2::one(),
    }
}

fn assert_unit(n: &[Q2; 2]) {
    assert!(
        dot2(n, n) == Q2::one(),
        "vertical plane normal must have exact unit length"
    );
}

/// How two walls meet, decided exactly.
///
/// For a transverse intersection the cosine is taken between the inward
/// normals with a sign flip, so walls bounding the region from opposite
/// sides of a thin wedge report a small angle.
pub fn dihedral_angle(w1: &Wall, w2: &Wall) -> AngleResult {
    match (w1, w2) {
        (
            Wall::VerticalPlane { normal: n1, offset: c1, keep: k1 },
            Wall::VerticalPlane { normal: n2, offset: c2, keep: k2 },
        ) => plane_plane(n1, c1, *k1, n2, c2, *k2),
        (
            Wall::VerticalPlane { normal, offset, keep },
            Wall::Hemisphere { center, radius, keep: side },
        )
        | (
            Wall::Hemisphere { center, radius, keep: side },
            Wall::VerticalPlane { normal, offset, keep },
        ) => plane_sphere(normal, offset, *keep, center, radius, *side),
        (
            Wall::Hemisphere { center: q1, radius: r1, keep: s1 },
            Wall::Hemisphere { center: q2, radius: r2, keep: s2 },
        ) => sphere_sphere(q1, r1, *s1, q2, r2, *s2),
    }
}

fn plane_plane(n1: &[Q2; 2], c1: &Q2, k1: KeepSide, n2: &[Q2; 2], c2: &Q2, k2: KeepSide) -> AngleResult {
    assert_unit(n1);
    assert_unit(n2);
    let dot = dot2(n1, n2);
    if dot == Q2::one() {
        return if c1 == c2 {
            AngleResult::Identical
        } else {
            AngleResult::tangent_at_infinity()
        };
    }
    if dot == -Q2::one() {
        return if *c2 == -c1.clone() {
            AngleResult::Identical
        } else {
            AngleResult::tangent_at_infinity()
        };
    }
    AngleResult::angle(-(keep_sign(k1) * keep_sign(k2) * dot))
}

fn plane_sphere(n: &[Q2; 2], c: &Q2, keep: KeepSide, q: &[Q2; 2], r: &Q2, side: Side) -> AngleResult {
    assert_unit(n);
    let d = dot2(n, q) - c.clone();
    match d.abs().cmp(r) {
        std::cmp::Ordering::Greater => AngleResult::Disjoint,
        std::cmp::Ordering::Equal => {
            let p = sub2(q, &scale2(n, &d));
            AngleResult::tangent_at(p[0].clone(), p[1].clone())
        }
        std::cmp::Ordering::Less => {
            AngleResult::angle(side_sign(side) * keep_sign(keep) * d / r.clone())
        }
    }
}

fn sphere_sphere(q1: &[Q2; 2], r1: &Q2, s1: Side, q2: &[Q2; 2], r2: &Q2, s2: Side) -> AngleResult {
    let dq = sub2(q2, q1);
    let dd = dot2(&dq, &dq);
    if dd.is_zero() && r1 == r2 {
        return AngleResult::Identical;
    }
    let sum2 = (r1.clone() + r2.clone()).square();
    let dif2 = (r1.clone() - r2.clone()).square();
    if dd > sum2 || dd < dif2 {
        return AngleResult::Disjoint;
    }
    if dd == sum2 || dd == dif2 {
        let denom = if dd == sum2 {
            r1.clone() + r2.clone()
        } else {
            r1.clone() - r2.clone()
        };
        let p = add2(q1, &scale2(&dq, &(r1.clone() / denom)));
        return AngleResult::tangent_at(p[0].clone(), p[1].clone());
    }
    let num = r1.square() + r2.square() - dd;
    let den = Q2::from_int(2) * r1.clone() * r2.clone();
    AngleResult::angle(-(side_sign(s1) * side_sign(s2) * num / den))
}

/// All pairwise angles of a wall family, keyed by index pairs `i < j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AngleTable {
    pub entries: BTreeMap<(usize, usize), AngleResult>,
}

impl AngleTable {
    pub fn compute(walls: &[Wall]) -> AngleTable {
        let mut entries = BTreeMap::new();
        for i in 0..walls.len() {
            for j in i + 1..walls.len() {
                entries.insert((i, j), dihedral_angle(&walls[i], &walls[j]));
            }
        }
        AngleTable { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&AngleResult> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct AngleEntryWire {
    i: usize,
    j: usize,
    angle: AngleResult,
}

impl Serialize for AngleTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire: Vec<AngleEntryWire> = self
            .entries
            .iter()
            .map(|(&(i, j), angle)| AngleEntryWire { i, j, angle: angle.clone() })
            .collect();
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AngleTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = Vec::<AngleEntryWire>::deserialize(d)?;
        let mut entries = BTreeMap::new();
        for e in wire {
            let key = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
            entries.insert(key, e.angle);
        }
        Ok(AngleTable { entries })
    }
}

/// A point of the upper half-space model, `z > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H3Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl H3Point {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        assert!(z > 0.0, "upper half-space point needs z > 0");
        H3Point { x, y, z }
    }
}

/// Hyperbolic distance in the upper half-space metric.
pub fn hyperbolic_distance(p: H3Point, q: H3Point) -> f64 {
    assert!(p.z > 0.0 && q.z > 0.0);
    let dd = (p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2);
    (1.0 + dd / (2.0 * p.z * q.z)).acosh()
}

impl Wall {
    /// Signed slack of `p` against this wall; positive strictly inside the
    /// kept half-space, zero on the wall. Planes report a Euclidean distance,
    /// hemispheres a difference of squared radii.
    pub fn margin(&self, p: &H3Point) -> f64 {
        match self {
            Wall::VerticalPlane { normal, offset, keep } => {
                let v = normal[0].to_f64() * p.x + normal[1].to_f64() * p.y - offset.to_f64();
                match keep {
                    KeepSide::Geq => v,
                    KeepSide::Leq => -v,
                }
            }
            Wall::Hemisphere { center, radius, keep } => {
                let dx = p.x - center[0].to_f64();
                let dy = p.y - center[1].to_f64();
                let v = dx * dx + dy * dy + p.z * p.z - radius.to_f64().powi(2);
                match keep {
                    Side::Outside => v,
                    Side::Inside => -v,
                }
            }
        }
    }

    pub fn contains(&self, p: &H3Point) -> bool {
        self.margin(p) >= 0.0
    }

    /// Whether the ideal boundary of the wall passes through a finite
    /// boundary point, decided exactly.
    pub fn through_boundary_point(&self, p: &[Q2; 2]) -> bool {
        match self {
            Wall::VerticalPlane { normal, offset, .. } => dot2(normal, p) == *offset,
            Wall::Hemisphere { center, radius, .. } => {
                let d = sub2(p, center);
                dot2(&d, &d) == radius.square()
            }
        }
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Wall::VerticalPlane { .. })
    }

    /// Image under the horizontal translation by `t`, an isometry of H^3.
    pub fn translated(&self, t: &[Q2; 2]) -> Wall {
        match self {
            Wall::VerticalPlane { normal, offset, keep } => Wall::VerticalPlane {
                normal: normal.clone(),
                offset: offset.clone() + dot2(normal, t),
                keep: *keep,
            },
            Wall::Hemisphere { center, radius, keep } => Wall::Hemisphere {
                center: add2(center, t),
                radius: radius.clone(),
                keep: *keep,
            },
        }
    }

    /// Image under rotation about the vertical axis; `cos^2 + sin^2` must be
    /// exactly one.
    pub fn rotated(&self, cos: &Q2, sin: &Q2) -> Wall {
        assert!(
            cos.square() + sin.square() == Q2::one(),
            "rotation needs an exact unit cosine-sine pair"
        );
        match self {
            Wall::VerticalPlane { normal, offset, keep } => Wall::VerticalPlane {
                normal: rot2(normal, cos, sin),
                offset: offset.clone(),
                keep: *keep,
            },
            Wall::Hemisphere { center, radius, keep } => Wall::Hemisphere {
                center: rot2(center, cos, sin),
                radius: radius.clone(),
                keep: *keep,
            },
        }
    }

    /// Image under the dilation `x -> factor * x`, an isometry of H^3.
    pub fn scaled(&self, factor: &Q2) -> Wall {
        assert!(factor.sign() > 0, "dilation factor must be positive");
        match self {
            Wall::VerticalPlane { normal, offset, keep } => Wall::VerticalPlane {
                normal: normal.clone(),
                offset: offset.clone() * factor.clone(),
                keep: *keep,
            },
            Wall::Hemisphere { center, radius, keep } => Wall::Hemisphere {
                center: scale2(center, factor),
                radius: radius.clone() * factor.clone(),
                keep: *keep,
            },
        }
    }
}

impl BoundaryPoint {
    pub fn translated(&self, t: &[Q2; 2]) -> BoundaryPoint {
        match self {
            BoundaryPoint::Finite { x, y } => {
                let p = add2(&[x.clone(), y.clone()], t);
                BoundaryPoint::Finite { x: p[0].clone(), y: p[1].clone() }
            }
            BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        }
    }

    pub fn rotated(&self, cos: &Q2, sin: &Q2) -> BoundaryPoint {
        match self {
            BoundaryPoint::Finite { x, y } => {
                let p = rot2(&[x.clone(), y.clone()], cos, sin);
                BoundaryPoint::Finite { x: p[0].clone(), y: p[1].clone() }
            }
            BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        }
    }

    pub fn scaled(&self, factor: &Q2) -> BoundaryPoint {
        match self {
            BoundaryPoint::Finite { x, y } => BoundaryPoint::Finite {
                x: x.clone() * factor.clone(),
                y: y.clone() * factor.clone(),
            },
            BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        }
    }
}

/// Whether the vectors positively span the plane, i.e. every direction is a
/// nonnegative combination. Decided exactly; false for fewer than three
/// vectors.
pub(crate) fn positively_spans(vs: &[[Q2; 2]]) -> bool {
    if vs.len() < 3 {
        return false;
    }
    // The vectors fail to span exactly when they fit in a closed half-plane,
    // and a witness half-plane can always be rotated until its boundary
    // touches one of the vectors.
    for v in vs {
        for u in [perp2(v), neg2(&perp2(v))] {
            if vs.iter().all(|m| dot2(m, &u).sign() <= 0) {
                return false;
            }
        }
    }
    true
}

/// An ideal point in the closure of the polyhedron together with every wall
/// whose boundary circle passes through it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealCluster {
    pub point: BoundaryPoint,
    pub walls: BTreeSet<usize>,
}

/// Ideal tangency clusters of a wall family.
///
/// Finite clusters are collected at boundary points where some pair of walls
/// is mutually tangent; the cluster lists every wall through that point. The
/// cluster at infinity is present exactly when the inward normals of the
/// vertical walls positively span the plane, so the cross-section at large
/// height is compact.
pub fn ideal_clusters(walls: &[Wall]) -> Vec<IdealCluster> {
    let mut points: BTreeSet<[Q2; 2]> = BTreeSet::new();
    for i in 0..walls.len() {
        for j in i + 1..walls.len() {
            if let AngleResult::TangentIdeal { point: BoundaryPoint::Finite { x, y } } =
                dihedral_angle(&walls[i], &walls[j])
            {
                points.insert([x, y]);
            }
        }
    }
    let mut clusters = Vec::new();
    for p in points {
        let members: BTreeSet<usize> = walls
            .iter()
            .enumerate()
            .filter(|(_, w)| w.through_boundary_point(&p))
            .map(|(i, _)| i)
            .collect();
        clusters.push(IdealCluster {
            point: BoundaryPoint::Finite { x: p[0].clone(), y: p[1].clone() },
            walls: members,
        });
    }
    let verticals: Vec<usize> = (0..walls.len()).filter(|&i| walls[i].is_vertical()).collect();
    let inward: Vec<[Q2; 2]> = verticals
        .iter()
        .map(|&i| match &walls[i] {
            Wall::VerticalPlane { normal, keep, .. } => scale2(normal, &keep_sign(*keep)),
            Wall::Hemisphere { .. } => unreachable!(),
        })
        .collect();
    if positively_spans(&inward) {
        clusters.push(IdealCluster {
            point: BoundaryPoint::Infinity,
            walls: verticals.into_iter().collect(),
        });
    }
    clusters
}

/// A finite wall family cut out of H^3, with display labels and an interior
/// witness point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronSpec {
    pub walls: Vec<Wall>,
    pub labels: Vec<String>,
    pub witness: [f64; 3],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("wall {index}: vertical plane normal must have exact unit length")]
    NonUnitNormal { index: usize },
    #[error("wall {index}: hemisphere radius must be positive")]
    NonPositiveRadius { index: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("witness must have positive height")]
    WitnessHeight,
    #[error("witness is not strictly inside wall {index}")]
    WitnessOutside { index: usize },
}

impl PolyhedronSpec {
    /// Validates wall data exactly and checks that the witness point lies
    /// strictly inside every wall.
    pub fn new(walls: Vec<Wall>, labels: Vec<String>, witness: [f64; 3]) -> Result<Self, SpecError> {
        for (index, w) in walls.iter().enumerate() {
            match w {
                Wall::VerticalPlane { normal, .. } => {
                    if dot2(normal, normal) != Q2::one() {
                        return Err(SpecError::NonUnitNormal { index });
                    }
                }
                Wall::Hemisphere { radius, .. } => {
                    if radius.sign() <= 0 {
                        return Err(SpecError::NonPositiveRadius { index });
                    }
                }
            }
        }
        let labels = if labels.is_empty() {
            default_labels(walls.len())
        } else if labels.len() == walls.len() {
            labels
        } else {
            return Err(SpecError::LabelCount { expected: walls.len(), got: labels.len() });
        };
        if !(witness[2] > 0.0) {
            return Err(SpecError::WitnessHeight);
        }
        let p = H3Point { x: witness[0], y: witness[1], z: witness[2] };
        for (index, w) in walls.iter().enumerate() {
            if w.margin(&p) <= 0.0 {
                return Err(SpecError::WitnessOutside { index });
            }
        }
        Ok(PolyhedronSpec { walls, labels, witness })
    }

    /// Skips validation; for deliberately degenerate wall families.
    pub fn new_unchecked(walls: Vec<Wall>, labels: Vec<String>, witness: [f64; 3]) -> Self {
        let labels = if labels.is_empty() { default_labels(walls.len()) } else { labels };
        PolyhedronSpec { walls, labels, witness }
    }

    pub fn angle_table(&self) -> AngleTable {
        AngleTable::compute(&self.walls)
    }

    pub fn contains(&self, p: &H3Point) -> bool {
        self.walls.iter().all(|w| w.contains(p))
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("W{}", i)).collect()
}

/// The six-wall right-angled-flavored polyhedron whose quotient carries the
/// standard tangle complement structure: four vertical walls over a rectangle
/// and two outside-kept hemispheres, with two ideal tangency clusters.
pub fn build_tangle_polyhedron() -> PolyhedronSpec {
    let e1 = [Q2::one(), Q2::zero()];
    let e2 = [Q2::zero(), Q2::one()];
    let walls = vec![
        Wall::VerticalPlane { normal: e1.clone(), offset: Q2::zero(), keep: KeepSide::Geq },
        Wall::VerticalPlane {
            normal: e1.clone(),
            offset: Q2::new(rat_int(3), rat(3, 2)),
            keep: KeepSide::Leq,
        },
        Wall::VerticalPlane { normal: e2.clone(), offset: Q2::zero(), keep: KeepSide::Geq },
        Wall::VerticalPlane {
            normal: e2.clone(),
            offset: Q2::new(rat_int(1), rat(1, 2)),
            keep: KeepSide::Leq,
        },
        Wall::Hemisphere {
            center: [Q2::zero(), Q2::one()],
            radius: Q2::one(),
            keep: Side::Outside,
        },
        Wall::Hemisphere {
            center: [Q2::new(rat_int(2), rat_int(1)), Q2::zero()],
            radius: Q2::new(rat_int(2), rat_int(1)),
            keep: Side::Outside,
        },
    ];
    PolyhedronSpec::new(walls, Vec::new(), [1.0, 1.2, 3.0]).expect("canonical wall family is valid")
}

/// The full pairwise angle table of [`build_tangle_polyhedron`]: seven right
/// angles, two of pi/3, one of pi/4, four ideal tangencies and one disjoint
/// pair.
pub fn expected_tangle_angle_table() -> AngleTable {
    let right = || AngleResult::angle(Q2::zero());
    let third = || AngleResult::angle(Q2::rational(1, 2));
    let quarter = || AngleResult::angle(Q2::sqrt2_times(1, 2));
    let origin = || AngleResult::tangent_at(Q2::zero(), Q2::zero());
    let inf = AngleResult::tangent_at_infinity;
    let mut entries = BTreeMap::new();
    entries.insert((0, 1), inf());
    entries.insert((0, 2), right());
    entries.insert((0, 3), right());
    entries.insert((0, 4), right());
    entries.insert((0, 5), origin());
    entries.insert((1, 2), right());
    entries.insert((1, 3), right());
    entries.insert((1, 4), AngleResult::Disjoint);
    entries.insert((1, 5), third());
    entries.insert((2, 3), inf());
    entries.insert((2, 4), origin());
    entries.insert((2, 5), right());
    entries.insert((3, 4), quarter());
    entries.insert((3, 5), third());
    entries.insert((4, 5), right());
    AngleTable { entries }
}

/// One exact cosine value of the transverse angles, with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub cos: Q2,
    pub radians: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub i: usize,
    pub j: usize,
    pub expected: Option<AngleResult>,
    pub computed: Option<AngleResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub pass: bool,
    pub witness_ok: bool,
    pub table: AngleTable,
    pub mismatches: Vec<Mismatch>,
    pub ideal_clusters: Vec<IdealCluster>,
    pub angle_histogram: Vec<HistogramBin>,
    pub tangency_count: usize,
    pub disjoint_count: usize,
    pub identical_count: usize,
}

fn points_match(a: &BoundaryPoint, b: &BoundaryPoint, tol: f64) -> bool {
    match (a, b) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
        (BoundaryPoint::Finite { x: ax, y: ay }, BoundaryPoint::Finite { x: bx, y: by }) => {
            if tol == 0.0 {
                ax == bx && ay == by
            } else {
                (ax.to_f64() - bx.to_f64()).abs() <= tol && (ay.to_f64() - by.to_f64()).abs() <= tol
            }
        }
        _ => false,
    }
}

fn results_match(a: &AngleResult, b: &AngleResult, tol: f64) -> bool {
    match (a, b) {
        (AngleResult::Angle { cos: ca, radians: ra }, AngleResult::Angle { cos: cb, radians: rb }) => {
            ca == cb || (tol > 0.0 && (ra - rb).abs() <= tol)
        }
        (AngleResult::TangentIdeal { point: pa }, AngleResult::TangentIdeal { point: pb }) => {
            points_match(pa, pb, tol)
        }
        (AngleResult::Disjoint, AngleResult::Disjoint) => true,
        (AngleResult::Identical, AngleResult::Identical) => true,
        _ => false,
    }
}

/// Computes the full angle table of a wall family, compares it against an
/// expected table when one is given (angles within `tol` radians, or exact
/// when `tol` is zero), and summarizes incidences.
pub fn verify_polyhedron(
    spec: &PolyhedronSpec,
    expected: Option<&AngleTable>,
    tol: f64,
) -> VerificationReport {
    let table = spec.angle_table();
    let p = H3Point { x: spec.witness[0], y: spec.witness[1], z: spec.witness[2] };
    let witness_ok = spec.witness[2] > 0.0 && spec.walls.iter().all(|w| w.margin(&p) > 0.0);

    let mut mismatches = Vec::new();
    if let Some(exp) = expected {
        let keys: BTreeSet<(usize, usize)> =
            table.entries.keys().chain(exp.entries.keys()).copied().collect();
        for key in keys {
            let computed = table.entries.get(&key).cloned();
            let expected = exp.entries.get(&key).cloned();
            let ok = match (&computed, &expected) {
                (Some(c), Some(e)) => results_match(c, e, tol),
                _ => false,
            };
            if !ok {
                mismatches.push(Mismatch { i: key.0, j: key.1, expected, computed });
            }
        }
    }

    let mut bins: BTreeMap<Q2, HistogramBin> = BTreeMap::new();
    let mut tangency_count = 0;
    let mut disjoint_count = 0;
    let mut identical_count = 0;
    for angle in table.entries.values() {
        match angle {
            AngleResult::Angle { cos, radians } => {
                bins.entry(cos.clone())
                    .or_insert_with(|| HistogramBin { cos: cos.clone(), radians: *radians, count: 0 })
                    .count += 1;
            }
            AngleResult::TangentIdeal { .. } => tangency_count += 1,
            AngleResult::Disjoint => disjoint_count += 1,
            AngleResult::Identical => identical_count += 1,
        }
    }

    let pass = witness_ok && mismatches.is_empty();
    VerificationReport {
        pass,
        witness_ok,
        table,
        mismatches,
        ideal_clusters: ideal_clusters(&spec.walls),
        angle_histogram: bins.into_values().collect(),
        tangency_count,
        disjoint_count,
        identical_count,
    }
}
