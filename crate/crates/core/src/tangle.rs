//! The model tangle in a tetrahedron, the link it assembles into over a
//! closed triangulation, the associated punctured-sphere surface family,
//! barrier families, and piecewise-hyperbolic volume bookkeeping.
//!
//! The tangle and link are carried purely combinatorially: which faces,
//! edges, and arcs participate. The metric picture (circle radii 1/4 and
//! 1/8) is retained as exact symbolic parameters for documentation and
//! drawing export only; every downstream claim is combinatorial.

use std::collections::BTreeSet;

use num::rational::Rational64;
use num::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual_graph::{separated_tetrahedra, Annotations, HatTau, SeparationError, SimplexRef};
use crate::triangulation::{edge_index, validate_cooper_thurston, Triangulation, EDGE_VERTS};

/// Circle of radius 1/4 in a face, centered at the face barycenter.
/// Barycentric coordinates are over the tetrahedron corners; the entry at
/// the opposite corner is zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaceCircle {
    pub face: u8,
    pub radius: String,
    pub center: [String; 4],
}

/// Where an edge arc ends: inside the circle of `face`, displaced from the
/// edge midpoint toward the face's remaining corner by the stated multiple
/// of sqrt(3) along that median.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArcEndpoint {
    pub face: u8,
    pub toward_corner: u8,
    pub median_fraction_sqrt3: String,
}

/// Arc of radius 1/8 around an edge midpoint, in the plane orthogonal to
/// the edge, ending inside the two adjacent face circles.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeArc {
    pub edge: u8,
    pub radius: String,
    pub center: [String; 4],
    pub endpoints: [ArcEndpoint; 2],
}

/// The model tangle of one tetrahedron: four face circles and six edge arcs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TangleSpec {
    pub face_circles: Vec<FaceCircle>,
    pub edge_arcs: Vec<EdgeArc>,
}

/// The model tangle with exact parameters, identical in every tetrahedron.
pub fn tangle_spec() -> TangleSpec {
    let third = Rational64::new(1, 3).to_string();
    let half = Rational64::new(1, 2).to_string();
    let zero = Rational64::zero().to_string();
    let bary = |mask: [bool; 4], value: &str| -> [String; 4] {
        let mut out = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
        for (slot, hit) in mask.iter().enumerate() {
            if *hit {
                out[slot] = value.to_string();
            }
        }
        out
    };
    let face_circles = (0..4u8)
        .map(|face| {
            let mut mask = [true; 4];
            mask[face as usize] = false;
            FaceCircle { face, radius: "1/4".to_string(), center: bary(mask, &third) }
        })
        .collect();
    let edge_arcs = (0..6usize)
        .map(|e| {
            let (p, q) = EDGE_VERTS[e];
            let mut mask = [false; 4];
            mask[p] = true;
            mask[q] = true;
            let faces: Vec<u8> =
                (0..4u8).filter(|&f| f as usize != p && f as usize != q).collect();
            let endpoints: Vec<ArcEndpoint> = faces
                .iter()
                .map(|&face| {
                    let toward = faces.iter().copied().find(|&g| g != face).unwrap();
                    ArcEndpoint {
                        face,
                        toward_corner: toward,
                        median_fraction_sqrt3: "1/12".to_string(),
                    }
                })
                .collect();
            EdgeArc {
                edge: e as u8,
                radius: "1/8".to_string(),
                center: bary(mask, &half),
                endpoints: endpoints.try_into().unwrap(),
            }
        })
        .collect();
    TangleSpec { face_circles, edge_arcs }
}

/// Exact check that each arc endpoint lies strictly inside its face circle.
///
/// In a unit-edge face, the endpoint sits at distance sqrt(3)/6 - 1/8 from
/// the face barycenter; the claim reduces to 7/192 < sqrt(3)/24 and then to
/// the integer comparison 49 < 192.
pub fn arc_endpoints_inside_circles() -> bool {
    let r = |n: i64, d: i64| Rational64::new(n, d);
    // distance^2 = 1/12 + 1/64 - sqrt(3)/24; inside iff distance^2 < 1/16.
    let p = r(1, 12) + r(1, 64) - r(1, 16); // rational part of distance^2 - radius^2
    let q = r(1, 24); // coefficient of sqrt(3), subtracted
    // Inside iff p < q * sqrt(3), with p, q > 0: iff p^2 < 3 q^2.
    p > Rational64::zero() && q > Rational64::zero() && p * p < r(3, 1) * q * q
}

/// One component of the assembled link.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum LinkComponent {
    /// The circle in a face class.
    #[serde(rename_all = "camelCase")]
    Face { face_class: usize },
    /// The cycle of edge arcs around an edge class, as (tetrahedron, edge
    /// slot) pieces in cyclic order.
    #[serde(rename_all = "camelCase")]
    Edge { edge_class: usize, arcs: Vec<(usize, u8)> },
}

/// The link of a triangulation; component position is its cusp index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkData {
    pub components: Vec<LinkComponent>,
}

impl LinkData {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn total_arcs(&self) -> usize {
        self.components
            .iter()
            .map(|c| match c {
                LinkComponent::Face { .. } => 0,
                LinkComponent::Edge { arcs, .. } => arcs.len(),
            })
            .sum()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("triangulation is not a valid substrate for the link: {failures:?}")]
    PreconditionFailed { failures: Vec<String> },
    #[error("arcs around edge class {edge_class} close after {got} steps, expected {expected}")]
    ChainingFailed { edge_class: usize, expected: usize, got: usize },
}

/// Assembles the link: one face component per face class and one edge
/// component per edge class, the latter chained around the edge through the
/// face gluings. Requires an honest triangulation whose vertex links are
/// flag 2-spheres; edge-degree membership is not needed for counting.
pub fn build_link(t: &Triangulation) -> Result<LinkData, LinkError> {
    let report = validate_cooper_thurston(t);
    if !report.honest || !report.links_are_flag_spheres {
        return Err(LinkError::PreconditionFailed { failures: report.failures });
    }

    let edges = t.edge_classes();
    let faces = t.face_classes();
    let degrees = t.edge_degrees();
    let mut components: Vec<LinkComponent> =
        (0..faces.n_classes).map(|face_class| LinkComponent::Face { face_class }).collect();

    let members = edges.members();
    for (class, slots) in members.iter().enumerate() {
        let start = (slots[0] / 6, (slots[0] % 6) as u8);
        let mut arcs = vec![start];
        // Leave through the lesser face containing the edge, then always
        // through the face other than the entry face.
        let faces_of = |e: u8| -> [usize; 2] {
            let (p, q) = EDGE_VERTS[e as usize];
            let mut fs = (0..4).filter(|&f| f != p && f != q);
            [fs.next().unwrap(), fs.next().unwrap()]
        };
        let mut here = start;
        let mut exit = faces_of(start.1)[0];
        loop {
            let (tet2, entry, perm) = t.glued_to(here.0, exit);
            let (p, q) = EDGE_VERTS[here.1 as usize];
            let e2 = edge_index(perm.apply(p), perm.apply(q)) as u8;
            let next = (tet2, e2);
            if next == start {
                break;
            }
            if arcs.len() > degrees[class] {
                return Err(LinkError::ChainingFailed {
                    edge_class: class,
                    expected: degrees[class],
                    got: arcs.len() + 1,
                });
            }
            arcs.push(next);
            here = next;
            let [f1, f2] = faces_of(e2);
            exit = if f1 == entry { f2 } else { f1 };
        }
        if arcs.len() != degrees[class] {
            return Err(LinkError::ChainingFailed {
                edge_class: class,
                expected: degrees[class],
                got: arcs.len(),
            });
        }
        components.push(LinkComponent::Edge { edge_class: class, arcs });
    }
    Ok(LinkData { components })
}

/// What a surface is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "camelCase")]
pub enum SurfaceKind {
    Face(usize),
    Edge(usize),
    Tet(usize),
}

/// A punctured sphere of the surface family, described by its punctures and
/// the cusps (link components) they run into.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurfaceDescriptor {
    pub kind: SurfaceKind,
    pub puncture_count: usize,
    pub cusp_set: BTreeSet<usize>,
}

/// One surface per face class, edge class, and tetrahedron, in that order.
/// Face surfaces are 4-punctured, edge surfaces (deg+1)-punctured,
/// tetrahedron surfaces 4-punctured.
pub fn surface_family(t: &Triangulation, l: &LinkData) -> Vec<SurfaceDescriptor> {
    let faces = t.face_classes();
    let edges = t.edge_classes();
    let degrees = t.edge_degrees();
    let n_faces = faces.n_classes;
    // Component order in `l`: faces by class, then edges by class.
    let face_cusp = |c: usize| c;
    let edge_cusp = |c: usize| n_faces + c;
    debug_assert_eq!(l.n_components(), n_faces + edges.n_classes);

    let face_members = faces.members();
    let mut out = Vec::with_capacity(n_faces + edges.n_classes + t.n_tetrahedra());
    for (class, members) in face_members.iter().enumerate() {
        let (tet, f) = (members[0] / 4, members[0] % 4);
        let mut cusps = BTreeSet::from([face_cusp(class)]);
        let corners: Vec<usize> = (0..4).filter(|&c| c != f).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let e = edge_index(corners[i], corners[j]);
                cusps.insert(edge_cusp(edges.class_of[6 * tet + e]));
            }
        }
        out.push(SurfaceDescriptor {
            kind: SurfaceKind::Face(class),
            puncture_count: 4,
            cusp_set: cusps,
        });
    }
    let edge_members = edges.members();
    for (class, slots) in edge_members.iter().enumerate() {
        let mut cusps = BTreeSet::from([edge_cusp(class)]);
        for &slot in slots {
            let (tet, e) = (slot / 6, slot % 6);
            let (p, q) = EDGE_VERTS[e];
            for f in (0..4).filter(|&f| f != p && f != q) {
                cusps.insert(face_cusp(faces.class_of[4 * tet + f]));
            }
        }
        out.push(SurfaceDescriptor {
            kind: SurfaceKind::Edge(class),
            puncture_count: degrees[class] + 1,
            cusp_set: cusps,
        });
    }
    for tet in 0..t.n_tetrahedra() {
        let cusps: BTreeSet<usize> =
            (0..4).map(|f| face_cusp(faces.class_of[4 * tet + f])).collect();
        out.push(SurfaceDescriptor {
            kind: SurfaceKind::Tet(tet),
            puncture_count: 4,
            cusp_set: cusps,
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IntersectionRelation {
    Disjoint,
    SingleArc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurfacePair {
    pub a: usize,
    pub b: usize,
    pub relation: IntersectionRelation,
}

/// Labels every unordered pair of surfaces: an edge surface meets a face or
/// tetrahedron surface containing its edge in a single arc; every other
/// pair is disjoint. Containment is read off the cusp sets: a cusp index
/// below the face-class count is a face component, and an edge surface's
/// own component is its unique non-face cusp.
pub fn intersection_pattern(s: &[SurfaceDescriptor]) -> Vec<SurfacePair> {
    let n_faces = s.iter().filter(|d| matches!(d.kind, SurfaceKind::Face(_))).count();
    let single_arc = |x: &SurfaceDescriptor, y: &SurfaceDescriptor| -> bool {
        let (e, other) = match (x.kind, y.kind) {
            (SurfaceKind::Edge(_), SurfaceKind::Face(_) | SurfaceKind::Tet(_)) => (x, y),
            (SurfaceKind::Face(_) | SurfaceKind::Tet(_), SurfaceKind::Edge(_)) => (y, x),
            _ => return false,
        };
        match other.kind {
            // E is an edge of face F iff F's cusp set names E's component.
            SurfaceKind::Face(_) => {
                let edge_cusp = e.cusp_set.iter().copied().find(|&c| c >= n_faces);
                edge_cusp.is_some_and(|c| other.cusp_set.contains(&c))
            }
            // E is an edge of tet T iff some face of T contains E.
            SurfaceKind::Tet(_) => {
                other.cusp_set.iter().any(|fc| e.cusp_set.contains(fc))
            }
            SurfaceKind::Edge(_) => unreachable!(),
        }
    };
    let mut out = Vec::with_capacity(s.len() * (s.len().saturating_sub(1)) / 2);
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            let relation = if single_arc(&s[a], &s[b]) {
                IntersectionRelation::SingleArc
            } else {
                IntersectionRelation::Disjoint
            };
            out.push(SurfacePair { a, b, relation });
        }
    }
    out
}

/// The barrier family around a tetrahedron: its 4 face surfaces, the edge
/// surfaces of all edges meeting one of its vertices, and the tetrahedron
/// surfaces at barycenter-graph distance at most 2.
pub fn barrier_family(
    t: &Triangulation,
    g: &HatTau,
    surfaces: &[SurfaceDescriptor],
    tet: usize,
) -> Vec<SurfaceDescriptor> {
    let faces = t.face_classes();
    let edges = t.edge_classes();
    let verts = t.vertex_classes();
    let n_faces = faces.n_classes;
    let n_edges = edges.n_classes;

    let mut face_classes: Vec<usize> = (0..4).map(|f| faces.class_of[4 * tet + f]).collect();
    face_classes.sort_unstable();
    face_classes.dedup();

    let tet_vert_classes: BTreeSet<usize> =
        (0..4).map(|v| verts.class_of[4 * tet + v]).collect();
    let edge_members = edges.members();
    let mut edge_classes = Vec::new();
    for (class, slots) in edge_members.iter().enumerate() {
        let (tet0, e) = (slots[0] / 6, slots[0] % 6);
        let (p, q) = EDGE_VERTS[e];
        let a = verts.class_of[4 * tet0 + p];
        let b = verts.class_of[4 * tet0 + q];
        if tet_vert_classes.contains(&a) || tet_vert_classes.contains(&b) {
            edge_classes.push(class);
        }
    }

    // Tetrahedron nodes within graph distance 2.
    let mut near_tets = Vec::new();
    let mut dist = vec![usize::MAX; g.n_nodes()];
    dist[tet] = 0;
    let mut queue = std::collections::VecDeque::from([tet]);
    while let Some(u) = queue.pop_front() {
        if dist[u] >= 2 {
            continue;
        }
        for &w in &g.adjacency[u] {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    for (node, &d) in dist.iter().enumerate() {
        if d <= 2 {
            if let SimplexRef::Tet(i) = g.back_refs[node] {
                near_tets.push(i);
            }
        }
    }
    near_tets.sort_unstable();

    let mut out = Vec::new();
    for c in face_classes {
        out.push(surfaces[c].clone());
    }
    for c in edge_classes {
        out.push(surfaces[n_faces + c].clone());
    }
    for i in near_tets {
        out.push(surfaces[n_faces + n_edges + i].clone());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BarrierCertificate {
    pub surfaces: Vec<SurfaceDescriptor>,
    pub n: usize,
    pub pairwise_cusp_disjoint: bool,
    pub source_loop: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BarrierError {
    #[error("the provided loop annotates to zero, so it is homologically trivial")]
    TrivialLoop,
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("surfaces {i} and {j} share a cusp, which contradicts the established separation")]
    CuspOverlap { i: usize, j: usize },
}

/// First pair of surfaces whose cusp sets intersect, if any.
pub fn first_cusp_overlap(surfaces: &[SurfaceDescriptor]) -> Option<(usize, usize)> {
    for i in 0..surfaces.len() {
        for j in i + 1..surfaces.len() {
            if surfaces[i].cusp_set.intersection(&surfaces[j].cusp_set).next().is_some() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Builds the barrier certificate for a homologically nontrivial cycle:
/// selects `floor(sys_len/16)` separated tetrahedra along it, takes the
/// least-indexed face surface of each, and verifies that the chosen cusp
/// sets are pairwise disjoint. A cusp overlap is reported as an error since
/// it contradicts the separation.
pub fn barrier_certificate(
    t: &Triangulation,
    g: &HatTau,
    ann: &Annotations,
    cycle: &[u32],
    sys_len: usize,
) -> Result<BarrierCertificate, BarrierError> {
    let mut mask = 0u64;
    for i in 0..cycle.len() {
        let (a, b) = (cycle[i] as usize, cycle[(i + 1) % cycle.len()] as usize);
        mask ^= ann.mask_between(g, a, b);
    }
    if mask == 0 {
        return Err(BarrierError::TrivialLoop);
    }
    let chosen = separated_tetrahedra(g, cycle, sys_len)?;
    if chosen.is_empty() {
        // Nothing to select: the empty certificate is trivially valid and
        // needs no link, so even complexes failing the link precondition
        // certify their short loops.
        return Ok(BarrierCertificate {
            surfaces: Vec::new(),
            n: 0,
            pairwise_cusp_disjoint: true,
            source_loop: cycle.to_vec(),
        });
    }
    let link = build_link(t)?;
    let surfaces = surface_family(t, &link);
    let faces = t.face_classes();
    let picked: Vec<SurfaceDescriptor> = chosen
        .iter()
        .map(|&node| {
            let tet = node as usize;
            let least_face = (0..4).map(|f| faces.class_of[4 * tet + f]).min().unwrap();
            surfaces[least_face].clone()
        })
        .collect();
    if let Some((i, j)) = first_cusp_overlap(&picked) {
        return Err(BarrierError::CuspOverlap { i, j });
    }
    Ok(BarrierCertificate {
        n: picked.len(),
        surfaces: picked,
        pairwise_cusp_disjoint: true,
        source_loop: cycle.to_vec(),
    })
}

/// Total piecewise-hyperbolic (CAT(-1)) volume of the link complement:
/// 24 fundamental-domain copies per tetrahedron, each of volume `vol_p`.
/// This is bookkeeping over the glued structure, not the volume of the
/// Mostow-rigid hyperbolic metric.
pub fn complement_volume(t: &Triangulation, vol_p: f64) -> f64 {
    (t.n_tetrahedra() as u64 * 24) as f64 * vol_p
}

/// Draws the in-face tangle picture: the face triangle, its circle of
/// radius 1/4, and the three arc endpoints inside it.
pub fn face_tangle_svg() -> String {
    let h = 3f64.sqrt() / 2.0;
    let corners = [(0.0, 0.0), (1.0, 0.0), (0.5, h)];
    let center = (0.5, 3f64.sqrt() / 6.0);
    // Each side midpoint, pushed 1/8 along its inward normal.
    let mut dots = Vec::new();
    for i in 0..3 {
        let (ax, ay) = corners[i];
        let (bx, by) = corners[(i + 1) % 3];
        let (mx, my) = ((ax + bx) / 2.0, (ay + by) / 2.0);
        let (nx, ny) = (center.0 - mx, center.1 - my);
        let len = (nx * nx + ny * ny).sqrt();
        dots.push((mx + nx / len / 8.0, my + ny / len / 8.0));
    }
    let mut svg = String::new();
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-0.1 -0.1 1.2 1.1\" width=\"360\">\n",
    );
    svg.push_str(&format!(
        "  <polygon points=\"{:.4},{:.4} {:.4},{:.4} {:.4},{:.4}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.01\"/>\n",
        corners[0].0, corners[0].1, corners[1].0, corners[1].1, corners[2].0, corners[2].1
    ));
    svg.push_str(&format!(
        "  <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"0.25\" fill=\"none\" stroke=\"black\" stroke-width=\"0.01\"/>\n",
        center.0, center.1
    ));
    for (x, y) in dots {
        svg.push_str(&format!(
            "  <circle cx=\"{x:.4}\" cy=\"{y:.4}\" r=\"0.02\" fill=\"black\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_graph::{
        build_dual_graph, homological_systole, homology_annotations, SystoleOutcome,
        DEFAULT_SYSTOLE_CAP,
    };
    use crate::paving::{subdivide, torus_paving, trapezohedron_circle_paving, triangulate};
    use crate::triangulation::boundary_4_simplex;

    #[test]
    fn tangle_spec_shape_and_exact_margins() {
        let spec = tangle_spec();
        assert_eq!(spec.face_circles.len(), 4);
        assert_eq!(spec.edge_arcs.len(), 6);
        assert!(spec.face_circles.iter().all(|c| c.radius == "1/4"));
        assert!(spec.edge_arcs.iter().all(|a| a.radius == "1/8"));
        for arc in &spec.edge_arcs {
            let (p, q) = EDGE_VERTS[arc.edge as usize];
            for end in &arc.endpoints {
                assert!(end.face as usize != p && end.face as usize != q);
                assert_ne!(end.face, end.toward_corner);
            }
        }
        assert!(arc_endpoints_inside_circles());
    }

    #[test]
    fn tangle_spec_is_symmetry_invariant() {
        use crate::triangulation::Perm4;
        let spec = tangle_spec();
        let normalize = |s: &TangleSpec| {
            let mut fc = s.face_circles.clone();
            fc.sort();
            let mut ea: Vec<EdgeArc> = s
                .edge_arcs
                .iter()
                .map(|a| {
                    let mut e = a.clone();
                    e.endpoints.sort();
                    e
                })
                .collect();
            ea.sort();
            (fc, ea)
        };
        let base = normalize(&spec);
        let mut tried = 0;
        for perm in all_perms() {
            let p = Perm4::new(perm).unwrap();
            let relabeled = TangleSpec {
                face_circles: spec
                    .face_circles
                    .iter()
                    .map(|c| {
                        let mut center = [String::new(), String::new(), String::new(), String::new()];
                        for (i, v) in c.center.iter().enumerate() {
                            center[p.apply(i)] = v.clone();
                        }
                        FaceCircle {
                            face: p.apply(c.face as usize) as u8,
                            radius: c.radius.clone(),
                            center,
                        }
                    })
                    .collect(),
                edge_arcs: spec
                    .edge_arcs
                    .iter()
                    .map(|a| {
                        let (pp, qq) = EDGE_VERTS[a.edge as usize];
                        let mut center = [String::new(), String::new(), String::new(), String::new()];
                        for (i, v) in a.center.iter().enumerate() {
                            center[p.apply(i)] = v.clone();
                        }
                        EdgeArc {
                            edge: edge_index(p.apply(pp), p.apply(qq)) as u8,
                            radius: a.radius.clone(),
                            center,
                            endpoints: a.endpoints.clone().map(|e| ArcEndpoint {
                                face: p.apply(e.face as usize) as u8,
                                toward_corner: p.apply(e.toward_corner as usize) as u8,
                                median_fraction_sqrt3: e.median_fraction_sqrt3,
                            }),
                        }
                    })
                    .collect(),
            };
            assert_eq!(normalize(&relabeled), base);
            tried += 1;
        }
        assert_eq!(tried, 24);
    }

    fn all_perms() -> Vec<[u8; 4]> {
        let mut out = Vec::new();
        let mut vals = [0u8, 1, 2, 3];
        permute(&mut vals, 0, &mut out);
        out
    }

    fn permute(vals: &mut [u8; 4], k: usize, out: &mut Vec<[u8; 4]>) {
        if k == 4 {
            out.push(*vals);
            return;
        }
        for i in k..4 {
            vals.swap(k, i);
            permute(vals, k + 1, out);
            vals.swap(k, i);
        }
    }

    #[test]
    fn simplex_boundary_has_twenty_components() {
        let t = boundary_4_simplex();
        let link = build_link(&t).unwrap();
        assert_eq!(link.n_components(), 20);
        assert_eq!(link.total_arcs(), 30);
        for c in &link.components {
            if let LinkComponent::Edge { arcs, .. } = c {
                assert_eq!(arcs.len(), 3);
            }
        }
    }

    #[test]
    fn torus_link_counts_match_classes() {
        let geo = triangulate(&torus_paving(3));
        let t = &geo.tri;
        let link = build_link(t).unwrap();
        assert_eq!(
            link.n_components(),
            t.face_classes().n_classes + t.edge_classes().n_classes
        );
        assert_eq!(link.total_arcs(), 6 * t.n_tetrahedra());
        // Each edge component visits each incidence exactly once.
        let degrees = t.edge_degrees();
        let mut seen = BTreeSet::new();
        for c in &link.components {
            if let LinkComponent::Edge { edge_class, arcs } = c {
                assert_eq!(arcs.len(), degrees[*edge_class]);
                let mut tets: Vec<usize> = arcs.iter().map(|&(tet, _)| tet).collect();
                tets.sort_unstable();
                tets.dedup();
                assert_eq!(tets.len(), arcs.len(), "each tetrahedron visited once");
                for &(tet, e) in arcs {
                    assert!(seen.insert((tet, e)), "arc reused");
                }
            }
        }
        assert_eq!(seen.len(), 6 * t.n_tetrahedra());
    }

    #[test]
    fn puncture_table_and_maximum() {
        let geo = triangulate(&torus_paving(3));
        let link = build_link(&geo.tri).unwrap();
        let surfaces = surface_family(&geo.tri, &link);
        let degrees = geo.tri.edge_degrees();
        for s in &surfaces {
            match s.kind {
                SurfaceKind::Face(_) | SurfaceKind::Tet(_) => assert_eq!(s.puncture_count, 4),
                SurfaceKind::Edge(c) => assert_eq!(s.puncture_count, degrees[c] + 1),
            }
            assert!(s.puncture_count <= 11);
        }
        let max = surfaces.iter().map(|s| s.puncture_count).max().unwrap();
        assert_eq!(max, 9, "cube edges have degree 8 here");
    }

    #[test]
    fn degree_ten_edges_reach_eleven_punctures() {
        let geo = triangulate(&subdivide(&trapezohedron_circle_paving(), 3));
        let report = validate_cooper_thurston(&geo.tri);
        assert!(report.is_valid(), "failures: {:?}", report.failures);
        let link = build_link(&geo.tri).unwrap();
        let surfaces = surface_family(&geo.tri, &link);
        let max = surfaces.iter().map(|s| s.puncture_count).max().unwrap();
        assert_eq!(max, 11);
    }

    #[test]
    fn intersection_pattern_matches_incidence_oracle() {
        let geo = triangulate(&torus_paving(3));
        let t = &geo.tri;
        let link = build_link(t).unwrap();
        let surfaces = surface_family(t, &link);
        let pattern = intersection_pattern(&surfaces);

        // Oracle: edge-in-face and edge-in-tet read directly off the complex.
        let faces = t.face_classes();
        let edges = t.edge_classes();
        let n_f = faces.n_classes;
        let n_e = edges.n_classes;
        let mut face_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_f];
        let mut tet_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); t.n_tetrahedra()];
        for tet in 0..t.n_tetrahedra() {
            for f in 0..4 {
                let fc = faces.class_of[4 * tet + f];
                let corners: Vec<usize> = (0..4).filter(|&c| c != f).collect();
                for i in 0..3 {
                    for j in i + 1..3 {
                        let e = edges.class_of[6 * tet + edge_index(corners[i], corners[j])];
                        face_edges[fc].insert(e);
                    }
                }
            }
            for e in 0..6 {
                tet_edges[tet].insert(edges.class_of[6 * tet + e]);
            }
        }
        let expect = |a: usize, b: usize| -> IntersectionRelation {
            let kinds = (surfaces[a].kind, surfaces[b].kind);
            let hit = match kinds {
                (SurfaceKind::Edge(e), SurfaceKind::Face(f))
                | (SurfaceKind::Face(f), SurfaceKind::Edge(e)) => face_edges[f].contains(&e),
                (SurfaceKind::Edge(e), SurfaceKind::Tet(tt))
                | (SurfaceKind::Tet(tt), SurfaceKind::Edge(e)) => tet_edges[tt].contains(&e),
                _ => false,
            };
            if hit { IntersectionRelation::SingleArc } else { IntersectionRelation::Disjoint }
        };
        assert_eq!(pattern.len(), surfaces.len() * (surfaces.len() - 1) / 2);
        for p in &pattern {
            assert!(p.a < p.b);
            assert_eq!(p.relation, expect(p.a, p.b), "pair ({}, {})", p.a, p.b);
        }
        let _ = n_e;
    }

    #[test]
    fn barrier_family_shape() {
        let geo = triangulate(&torus_paving(3));
        let t = &geo.tri;
        let g = build_dual_graph(t);
        let link = build_link(t).unwrap();
        let surfaces = surface_family(t, &link);
        let family = barrier_family(t, &g, &surfaces, 0);
        let n_face_kind = family
            .iter()
            .filter(|s| matches!(s.kind, SurfaceKind::Face(_)))
            .count();
        assert_eq!(n_face_kind, 4);
        // Tetrahedron members = tets at distance <= 2 = tets sharing a class.
        let tet_members: BTreeSet<usize> = family
            .iter()
            .filter_map(|s| match s.kind {
                SurfaceKind::Tet(i) => Some(i),
                _ => None,
            })
            .collect();
        assert!(tet_members.contains(&0));
        for &i in &tet_members {
            assert!(g.distance(0, i).unwrap() <= 2);
        }
    }

    #[test]
    fn barrier_family_size_stabilizes_across_torus_sizes() {
        let size = |k: usize| {
            let geo = triangulate(&torus_paving(k));
            let g = build_dual_graph(&geo.tri);
            let link = build_link(&geo.tri).unwrap();
            let surfaces = surface_family(&geo.tri, &link);
            barrier_family(&geo.tri, &g, &surfaces, 0).len()
        };
        assert_eq!(size(3), size(4));
    }

    #[test]
    fn barrier_certificate_is_empty_below_sixteen() {
        let geo = triangulate(&torus_paving(3));
        let t = &geo.tri;
        let g = build_dual_graph(t);
        let ann = homology_annotations(t, &g).unwrap();
        let report = homological_systole(&g, &ann, DEFAULT_SYSTOLE_CAP, true);
        let SystoleOutcome::Finite { length, ref witness } = report.outcome else {
            panic!("expected finite systole");
        };
        let cert = barrier_certificate(t, &g, &ann, witness, length).unwrap();
        assert_eq!(cert.n, 0);
        assert!(cert.surfaces.is_empty());
        assert!(cert.pairwise_cusp_disjoint);
        assert_eq!(cert.source_loop, *witness);
    }

    #[test]
    fn cusp_overlap_detection() {
        let mk = |cusps: &[usize]| SurfaceDescriptor {
            kind: SurfaceKind::Face(0),
            puncture_count: 4,
            cusp_set: cusps.iter().copied().collect(),
        };
        assert_eq!(first_cusp_overlap(&[mk(&[0, 1]), mk(&[2, 3])]), None);
        assert_eq!(first_cusp_overlap(&[mk(&[0, 1]), mk(&[4]), mk(&[1, 5])]), Some((0, 2)));
    }

    #[test]
    fn complement_volume_bookkeeping() {
        let t = boundary_4_simplex();
        assert_eq!(complement_volume(&t, 1.0), 5.0 * 24.0);
        assert_eq!(complement_volume(&t, 0.0), 0.0);
        let geo = triangulate(&torus_paving(2));
        let v = complement_volume(&geo.tri, 2.5);
        assert_eq!(v, 192.0 * 24.0 * 2.5);
    }

    #[test]
    fn face_svg_has_triangle_circle_and_dots() {
        let svg = face_tangle_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
