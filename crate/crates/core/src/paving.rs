//! Cube pavings of closed 3-manifolds and their 24-tetrahedra-per-cube
//! triangulations.
//!
//! Conventions for the unit cube: corner id `x + 2y + 4z` over bits
//! `(x, y, z)`; face id `2a + s` for the face where axis `a` equals side `s`;
//! edge id `4a + 2s_b + s_c` for the edge running along axis `a` at sides
//! `s_b`, `s_c` of the other two axes `b < c`. Points of a glued face are
//! addressed by grid coordinates along its tangent axes in ascending order,
//! and the eight square symmetries are numbered `r + 4m` for rotation
//! `(i, j) -> (max - j, i)` applied `r` times after `m` applications of the
//! mirror `(i, j) -> (j, i)`.

use std::collections::BTreeMap;

use num::rational::Rational64;
use num::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triangulation::{Classes, Gluing, Perm4, Triangulation};

/// Applies square symmetry `s` to indices on a grid with maximum index `max`.
pub fn sym_apply(s: u8, max: usize, i: usize, j: usize) -> (usize, usize) {
    let (mut i, mut j) = (i, j);
    if s >= 4 {
        std::mem::swap(&mut i, &mut j);
    }
    for _ in 0..s % 4 {
        let t = i;
        i = max - j;
        j = t;
    }
    (i, j)
}

/// The symmetry undoing `s`.
pub fn sym_inverse(s: u8) -> u8 {
    let probes = [(0usize, 0usize), (0, 1)];
    (0..8)
        .find(|&t| {
            probes.iter().all(|&(i, j)| {
                let (a, b) = sym_apply(s, 1, i, j);
                sym_apply(t, 1, a, b) == (i, j)
            })
        })
        .expect("square symmetries form a group")
}

/// Normal axis and ascending tangent axes of a face.
fn face_axes(face: u8) -> (usize, usize, usize) {
    let a = (face / 2) as usize;
    match a {
        0 => (0, 1, 2),
        1 => (1, 0, 2),
        _ => (2, 0, 1),
    }
}

fn face_side(face: u8) -> usize {
    (face % 2) as usize
}

/// Corner of `face` at grid position `(i, j)` along its tangent axes.
pub fn corner_on_face(face: u8, i: usize, j: usize) -> u8 {
    let (a, b, c) = face_axes(face);
    ((face_side(face) << a) | (i << b) | (j << c)) as u8
}

/// Grid position of `corner` on `face`.
pub fn face_corner_coords(face: u8, corner: u8) -> (usize, usize) {
    let (a, b, c) = face_axes(face);
    debug_assert_eq!((corner as usize >> a) & 1, face_side(face));
    ((corner as usize >> b) & 1, (corner as usize >> c) & 1)
}

/// Endpoint corners of an edge, ascending.
pub fn edge_endpoints(edge: u8) -> (u8, u8) {
    let a = (edge / 4) as usize;
    let (b, c) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let sb = ((edge / 2) % 2) as usize;
    let sc = (edge % 2) as usize;
    let base = ((sb << b) | (sc << c)) as u8;
    (base, base | (1 << a) as u8)
}

/// Edge with the given endpoint corners, which must differ in one bit.
pub fn edge_between(v: u8, w: u8) -> u8 {
    let diff = v ^ w;
    debug_assert!(diff.count_ones() == 1, "corners {v} and {w} do not span an edge");
    let a = diff.trailing_zeros() as usize;
    let (b, c) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let sb = (v as usize >> b) & 1;
    let sc = (v as usize >> c) & 1;
    (4 * a + 2 * sb + sc) as u8
}

/// The four corners of a face, by ascending id.
pub fn corners_of_face(face: u8) -> [u8; 4] {
    let mut out = [
        corner_on_face(face, 0, 0),
        corner_on_face(face, 1, 0),
        corner_on_face(face, 0, 1),
        corner_on_face(face, 1, 1),
    ];
    out.sort_unstable();
    out
}

/// The four edges of a face.
pub fn edges_of_face(face: u8) -> [u8; 4] {
    let cs = corners_of_face(face);
    let mut out = Vec::with_capacity(4);
    for i in 0..4 {
        for j in i + 1..4 {
            if (cs[i] ^ cs[j]).count_ones() == 1 {
                out.push(edge_between(cs[i], cs[j]));
            }
        }
    }
    out.sort_unstable();
    out.try_into().expect("a face has four edges")
}

/// The two faces containing an edge, ascending.
pub fn faces_of_edge(edge: u8) -> [u8; 2] {
    let a = (edge / 4) as usize;
    let (b, c) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let sb = ((edge / 2) % 2) as usize;
    let sc = (edge % 2) as usize;
    let mut out = [(2 * b + sb) as u8, (2 * c + sc) as u8];
    out.sort_unstable();
    out
}

/// One face pairing of a paving, with one of the eight square symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaceGluing {
    pub cube_a: usize,
    pub face_a: u8,
    pub cube_b: usize,
    pub face_b: u8,
    pub symmetry: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PavingError {
    #[error("gluing references cube {cube} but there are only {n_cubes}")]
    CubeOutOfRange { cube: usize, n_cubes: usize },
    #[error("face index {face} out of range")]
    FaceOutOfRange { face: u8 },
    #[error("symmetry {symmetry} out of range 0..8")]
    SymmetryOutOfRange { symmetry: u8 },
    #[error("face {face} of cube {cube} appears in more than one gluing")]
    DuplicateSlot { cube: usize, face: u8 },
    #[error("face {face} of cube {cube} is glued to itself")]
    SelfGluedFace { cube: usize, face: u8 },
    #[error("face {face} of cube {cube} is unglued; the paving is not closed")]
    UnpairedSlot { cube: usize, face: u8 },
    #[error("edge {edge} of cube {cube} is identified with its own reversal; \
             the cyclic cube order around it is inconsistent")]
    NonManifoldEdge { cube: usize, edge: u8 },
}

/// A closed cube paving: `n` cubes with all `6n` face slots paired.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PavingWire", into = "PavingWire")]
pub struct Paving {
    n_cubes: usize,
    // Indexed by slot = 6 * cube + face: (partner slot, symmetry toward it).
    pairs: Vec<(u32, u8)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PavingWire {
    cubes: usize,
    gluings: Vec<FaceGluing>,
}

impl TryFrom<PavingWire> for Paving {
    type Error = PavingError;
    fn try_from(w: PavingWire) -> Result<Self, Self::Error> {
        Paving::from_gluings(w.cubes, &w.gluings)
    }
}

impl From<Paving> for PavingWire {
    fn from(p: Paving) -> PavingWire {
        PavingWire { cubes: p.n_cubes, gluings: p.gluings() }
    }
}

impl Paving {
    pub fn from_gluings(n_cubes: usize, gluings: &[FaceGluing]) -> Result<Self, PavingError> {
        let mut pairs: Vec<Option<(u32, u8)>> = vec![None; 6 * n_cubes];
        let claim = |cube: usize, face: u8| -> Result<usize, PavingError> {
            if cube >= n_cubes {
                return Err(PavingError::CubeOutOfRange { cube, n_cubes });
            }
            if face > 5 {
                return Err(PavingError::FaceOutOfRange { face });
            }
            Ok(6 * cube + face as usize)
        };
        for g in gluings {
            let a = claim(g.cube_a, g.face_a)?;
            let b = claim(g.cube_b, g.face_b)?;
            if g.symmetry > 7 {
                return Err(PavingError::SymmetryOutOfRange { symmetry: g.symmetry });
            }
            if a == b {
                return Err(PavingError::SelfGluedFace { cube: g.cube_a, face: g.face_a });
            }
            for (slot, partner, sym) in
                [(a, b, g.symmetry), (b, a, sym_inverse(g.symmetry))]
            {
                if pairs[slot].is_some() {
                    return Err(PavingError::DuplicateSlot {
                        cube: slot / 6,
                        face: (slot % 6) as u8,
                    });
                }
                pairs[slot] = Some((partner as u32, sym));
            }
        }
        let mut flat = Vec::with_capacity(6 * n_cubes);
        for (slot, p) in pairs.into_iter().enumerate() {
            match p {
                Some(pair) => flat.push(pair),
                None => {
                    return Err(PavingError::UnpairedSlot {
                        cube: slot / 6,
                        face: (slot % 6) as u8,
                    })
                }
            }
        }
        Ok(Paving { n_cubes, pairs: flat })
    }

    pub fn n_cubes(&self) -> usize {
        self.n_cubes
    }

    pub fn glued_to(&self, cube: usize, face: usize) -> (usize, usize, u8) {
        let (slot, sym) = self.pairs[6 * cube + face];
        ((slot / 6) as usize, (slot % 6) as usize, sym)
    }

    /// Each pairing once, keyed by its lesser slot.
    pub fn gluings(&self) -> Vec<FaceGluing> {
        let mut out = Vec::with_capacity(3 * self.n_cubes);
        for slot in 0..6 * self.n_cubes {
            let (partner, sym) = self.pairs[slot];
            if slot < partner as usize {
                out.push(FaceGluing {
                    cube_a: slot / 6,
                    face_a: (slot % 6) as u8,
                    cube_b: partner as usize / 6,
                    face_b: (partner % 6) as u8,
                    symmetry: sym,
                });
            }
        }
        out
    }

    /// Image of `corner` (on face `face` of `cube`) on the glued face.
    pub fn transport_corner(&self, cube: usize, face: usize, corner: u8) -> (usize, u8) {
        let (cube2, face2, sym) = self.glued_to(cube, face);
        let (i, j) = face_corner_coords(face as u8, corner);
        let (i2, j2) = sym_apply(sym, 1, i, j);
        (cube2, corner_on_face(face2 as u8, i2, j2))
    }

    /// Corner classes; incidence id is `8 * cube + corner`.
    pub fn vertex_classes(&self) -> Classes {
        let mut uf = SlotUnion::new(8 * self.n_cubes);
        for cube in 0..self.n_cubes {
            for face in 0..6 {
                for corner in corners_of_face(face as u8) {
                    let (cube2, corner2) = self.transport_corner(cube, face, corner);
                    uf.union(8 * cube + corner as usize, 8 * cube2 + corner2 as usize);
                }
            }
        }
        uf.into_classes()
    }

    /// Edge classes; incidence id is `12 * cube + edge`.
    pub fn edge_classes(&self) -> Classes {
        let mut uf = SlotUnion::new(12 * self.n_cubes);
        for cube in 0..self.n_cubes {
            for face in 0..6 {
                for edge in edges_of_face(face as u8) {
                    let (v, w) = edge_endpoints(edge);
                    let (cube2, v2) = self.transport_corner(cube, face, v);
                    let (_, w2) = self.transport_corner(cube, face, w);
                    let edge2 = edge_between(v2, w2);
                    uf.union(12 * cube + edge as usize, 12 * cube2 + edge2 as usize);
                }
            }
        }
        uf.into_classes()
    }

    /// Number of face classes (one per pairing).
    pub fn n_face_classes(&self) -> usize {
        3 * self.n_cubes
    }
}

// Thin deterministic union-find shared by the class computations here.
struct SlotUnion {
    parent: Vec<usize>,
}

impl SlotUnion {
    fn new(n: usize) -> Self {
        SlotUnion { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn into_classes(mut self) -> Classes {
        let n = self.parent.len();
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut class_of = Vec::with_capacity(n);
        for i in 0..n {
            let root = self.find(i);
            let next = remap.len();
            class_of.push(*remap.entry(root).or_insert(next));
        }
        Classes { n_classes: remap.len(), class_of }
    }
}

/// Degree report of a paving with the embedded-1-manifold conditions on the
/// degree-3 and degree-5 loci.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PavingReport {
    /// Edge class id to degree.
    pub edge_degrees: BTreeMap<usize, usize>,
    pub degree_3_edges: Vec<usize>,
    pub degree_5_edges: Vec<usize>,
    pub valid: bool,
    pub reasons: Vec<String>,
}

/// Checks edge degrees and the singular-locus conditions. Fails with a
/// witness if some edge is glued to its own reversal.
pub fn validate_paving(p: &Paving) -> Result<PavingReport, PavingError> {
    // Oriented edges detect inconsistent cyclic cube order: an orbit that
    // contains both orientations of one edge slot is non-manifold.
    let mut uf = SlotUnion::new(24 * p.n_cubes());
    let oriented = |cube: usize, v: u8, w: u8| -> usize {
        let edge = edge_between(v, w) as usize;
        24 * cube + 2 * edge + usize::from(v > w)
    };
    for cube in 0..p.n_cubes() {
        for face in 0..6 {
            for edge in edges_of_face(face as u8) {
                let (v, w) = edge_endpoints(edge);
                let (cube2, v2) = p.transport_corner(cube, face, v);
                let (_, w2) = p.transport_corner(cube, face, w);
                uf.union(oriented(cube, v, w), oriented(cube2, v2, w2));
            }
        }
    }
    for cube in 0..p.n_cubes() {
        for edge in 0..12u8 {
            let fwd = 24 * cube + 2 * edge as usize;
            if uf.find(fwd) == uf.find(fwd + 1) {
                return Err(PavingError::NonManifoldEdge { cube, edge });
            }
        }
    }

    let classes = p.edge_classes();
    let mut degree = vec![0usize; classes.n_classes];
    for &c in &classes.class_of {
        degree[c] += 1;
    }
    let edge_degrees: BTreeMap<usize, usize> =
        degree.iter().copied().enumerate().collect();

    let mut reasons = Vec::new();
    for (class, &d) in degree.iter().enumerate() {
        if !matches!(d, 3 | 4 | 5) {
            reasons.push(format!("edge class {class} has degree {d}, outside {{3, 4, 5}}"));
        }
    }

    // Endpoint vertex classes per edge class, from the least incidence.
    let vc = p.vertex_classes();
    let members = classes.members();
    let endpoints: Vec<(usize, usize)> = members
        .iter()
        .map(|m| {
            let (cube, edge) = (m[0] / 12, (m[0] % 12) as u8);
            let (v, w) = edge_endpoints(edge);
            (vc.class_of[8 * cube + v as usize], vc.class_of[8 * cube + w as usize])
        })
        .collect();

    let mut deg3 = Vec::new();
    let mut deg5 = Vec::new();
    let mut ends3 = vec![0usize; vc.n_classes];
    let mut ends5 = vec![0usize; vc.n_classes];
    for (class, &d) in degree.iter().enumerate() {
        let (a, b) = endpoints[class];
        if d == 3 {
            deg3.push(class);
            ends3[a] += 1;
            ends3[b] += 1;
        } else if d == 5 {
            deg5.push(class);
            ends5[a] += 1;
            ends5[b] += 1;
        }
    }
    for v in 0..vc.n_classes {
        if !matches!(ends3[v], 0 | 2) {
            reasons.push(format!("vertex class {v} meets {} degree-3 edge ends", ends3[v]));
        }
        if !matches!(ends5[v], 0 | 2) {
            reasons.push(format!("vertex class {v} meets {} degree-5 edge ends", ends5[v]));
        }
        if ends3[v] > 0 && ends5[v] > 0 {
            reasons.push(format!("vertex class {v} meets both degree-3 and degree-5 edges"));
        }
    }

    Ok(PavingReport {
        edge_degrees,
        degree_3_edges: deg3,
        degree_5_edges: deg5,
        valid: reasons.is_empty(),
        reasons,
    })
}

/// The 3-torus as a k-by-k-by-k block of cubes with opposite sides matched.
pub fn torus_paving(k: usize) -> Paving {
    assert!(k >= 1);
    let id = |x: usize, y: usize, z: usize| x % k + k * (y % k) + k * k * (z % k);
    let mut gluings = Vec::with_capacity(3 * k * k * k);
    for z in 0..k {
        for y in 0..k {
            for x in 0..k {
                let c = id(x, y, z);
                let neighbor = [id(x + 1, y, z), id(x, y + 1, z), id(x, y, z + 1)];
                for (axis, &n) in neighbor.iter().enumerate() {
                    gluings.push(FaceGluing {
                        cube_a: c,
                        face_a: (2 * axis + 1) as u8,
                        cube_b: n,
                        face_b: (2 * axis) as u8,
                        symmetry: 0,
                    });
                }
            }
        }
    }
    Paving::from_gluings(k * k * k, &gluings).expect("torus gluings are closed")
}

/// `m` cubes arranged around one shared edge like pie slices, each closed
/// into a circle along the remaining directions. The central edge class has
/// degree `m`, so `m = 6` gives the canonical invalid paving.
pub fn fan_paving(m: usize) -> Paving {
    assert!(m >= 2);
    let mut gluings = Vec::with_capacity(3 * m);
    for i in 0..m {
        let next = (i + 1) % m;
        // Side x = 0 of slice i meets side y = 0 of the next slice; the
        // identity symmetry carries (y, z) to (x, z), fixing the central edge.
        gluings.push(FaceGluing { cube_a: i, face_a: 0, cube_b: next, face_b: 2, symmetry: 0 });
        // Outer sides close up the same way one slice over.
        gluings.push(FaceGluing { cube_a: i, face_a: 1, cube_b: next, face_b: 3, symmetry: 0 });
        // Each slice is a circle in the z direction.
        gluings.push(FaceGluing { cube_a: i, face_a: 4, cube_b: i, face_b: 5, symmetry: 0 });
    }
    Paving::from_gluings(m, &gluings).expect("fan gluings are closed")
}

/// Product of a quadrangulated closed surface with a circle: one cube per
/// quad, square cross-sections glued along shared surface edges, and each
/// cube's top glued to its own bottom. Quads list their corners cyclically.
pub fn quad_surface_circle_paving(quads: &[[usize; 4]]) -> Result<Paving, PavingError> {
    // Side face of the cube over a quad, per cyclic quad edge: edge 0
    // (q0-q1) lies over face y=0, edge 1 (q1-q2) over x=1, edge 2 (q2-q3)
    // over y=1, edge 3 (q3-q0) over x=0. The in-face parameter of each side
    // runs along ascending cube coordinates, giving a direction to the edge.
    const SIDE_FACE: [u8; 4] = [2, 1, 3, 0];
    const SIDE_FORWARD: [bool; 4] = [true, true, false, false];

    let mut by_pair: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (q, quad) in quads.iter().enumerate() {
        for side in 0..4 {
            let (a, b) = (quad[side], quad[(side + 1) % 4]);
            by_pair.entry((a.min(b), a.max(b))).or_default().push((q, side));
        }
    }

    let mut gluings = Vec::with_capacity(3 * quads.len());
    for ((a, b), slots) in &by_pair {
        if slots.len() != 2 {
            // Surface is not closed; report through the unpaired-slot error.
            let (q, side) = slots[0];
            let _ = (a, b);
            return Err(PavingError::UnpairedSlot { cube: q, face: SIDE_FACE[side] });
        }
        let ((q1, s1), (q2, s2)) = (slots[0], slots[1]);
        let start = |q: usize, side: usize| {
            if SIDE_FORWARD[side] {
                quads[q][side]
            } else {
                quads[q][(side + 1) % 4]
            }
        };
        // Matching in-face parameters when both sides start at the same
        // surface vertex is the identity; otherwise reverse the parameter,
        // which is rotation-after-mirror, symmetry 5.
        let symmetry = if start(q1, s1) == start(q2, s2) { 0 } else { 5 };
        gluings.push(FaceGluing {
            cube_a: q1,
            face_a: SIDE_FACE[s1],
            cube_b: q2,
            face_b: SIDE_FACE[s2],
            symmetry,
        });
    }
    for q in 0..quads.len() {
        gluings.push(FaceGluing { cube_a: q, face_a: 4, cube_b: q, face_b: 5, symmetry: 0 });
    }
    Paving::from_gluings(quads.len(), &gluings)
}

/// Cube-surface quadrangulation: six quads, every vertex of degree 3.
pub fn cube_surface_quads() -> Vec<[usize; 4]> {
    let mut quads = Vec::with_capacity(6);
    for face in 0..6u8 {
        let ring = [
            corner_on_face(face, 0, 0) as usize,
            corner_on_face(face, 1, 0) as usize,
            corner_on_face(face, 1, 1) as usize,
            corner_on_face(face, 0, 1) as usize,
        ];
        quads.push(ring.try_into().unwrap());
    }
    quads
}

/// Pentagonal trapezohedron quadrangulation: ten kites, two vertices of
/// degree 5 (the apexes) and ten of degree 3.
pub fn trapezohedron_quads() -> Vec<[usize; 4]> {
    // Vertices: 0 and 1 are the apexes, 2 + i upper rim, 7 + i lower rim.
    let u = |i: usize| 2 + i % 5;
    let l = |i: usize| 7 + i % 5;
    let mut quads = Vec::with_capacity(10);
    for i in 0..5 {
        quads.push([0, u(i), l(i), u(i + 1)]);
        quads.push([1, l(i + 1), u(i + 1), l(i)]);
    }
    quads
}

/// The product of the cube surface (a 2-sphere) with a circle: six cubes,
/// vertical edge classes of degree 3.
pub fn sphere_circle_paving() -> Paving {
    quad_surface_circle_paving(&cube_surface_quads()).expect("cube surface is closed")
}

/// Trapezohedron-sphere cross circle: ten cubes with degree-3 and degree-5
/// edge classes forming disjoint circles.
pub fn trapezohedron_circle_paving() -> Paving {
    quad_surface_circle_paving(&trapezohedron_quads()).expect("trapezohedron surface is closed")
}

/// One cube whose x = 0 face meets its own y = 0 face through a z-reversal,
/// folding their shared edge onto its own reverse. [`validate_paving`]
/// rejects it with a witness.
pub fn mirrored_paving() -> Paving {
    Paving::from_gluings(
        1,
        &[
            FaceGluing { cube_a: 0, face_a: 0, cube_b: 0, face_b: 2, symmetry: 7 },
            FaceGluing { cube_a: 0, face_a: 1, cube_b: 0, face_b: 3, symmetry: 0 },
            FaceGluing { cube_a: 0, face_a: 4, cube_b: 0, face_b: 5, symmetry: 0 },
        ],
    )
    .expect("mirrored gluings are closed")
}

/// Splits every cube into k-cubed subcubes. Boundary subfaces follow the
/// original gluings through the symmetry's action on the subface grid;
/// interior subfaces are glued by the identity.
pub fn subdivide(p: &Paving, k: usize) -> Paving {
    assert!(k >= 1);
    let kk = k * k;
    let sub = |cube: usize, x: usize, y: usize, z: usize| cube * k * kk + x + k * y + kk * z;
    let mut gluings = Vec::with_capacity(3 * p.n_cubes() * k * kk);
    for cube in 0..p.n_cubes() {
        for z in 0..k {
            for y in 0..k {
                for x in 0..k {
                    let s = sub(cube, x, y, z);
                    let pos = [x, y, z];
                    for axis in 0..3 {
                        if pos[axis] + 1 < k {
                            let mut q = pos;
                            q[axis] += 1;
                            gluings.push(FaceGluing {
                                cube_a: s,
                                face_a: (2 * axis + 1) as u8,
                                cube_b: sub(cube, q[0], q[1], q[2]),
                                face_b: (2 * axis) as u8,
                                symmetry: 0,
                            });
                        }
                    }
                }
            }
        }
        // Boundary subfaces, driven from the lesser slot of each pairing.
        for face in 0..6u8 {
            let (cube2, face2, sym) = p.glued_to(cube, face as usize);
            let slot = 6 * cube + face as usize;
            let slot2 = 6 * cube2 + face2;
            if slot > slot2 {
                continue;
            }
            let (a, b, c) = face_axes(face);
            let (a2, b2, c2) = face_axes(face2 as u8);
            for i in 0..k {
                for j in 0..k {
                    let mut pos = [0usize; 3];
                    pos[a] = face_side(face) * (k - 1);
                    pos[b] = i;
                    pos[c] = j;
                    let (i2, j2) = sym_apply(sym, k - 1, i, j);
                    let mut pos2 = [0usize; 3];
                    pos2[a2] = face_side(face2 as u8) * (k - 1);
                    pos2[b2] = i2;
                    pos2[c2] = j2;
                    gluings.push(FaceGluing {
                        cube_a: sub(cube, pos[0], pos[1], pos[2]),
                        face_a: face,
                        cube_b: sub(cube2, pos2[0], pos2[1], pos2[2]),
                        face_b: face2 as u8,
                        symmetry: sym,
                    });
                }
            }
        }
    }
    Paving::from_gluings(p.n_cubes() * k * kk, &gluings).expect("subdivision stays closed")
}

// The 48 symmetries of the cube as corner permutations.
fn cube_symmetries() -> Vec<[u8; 8]> {
    let axis_perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for perm in axis_perms {
        for flips in 0..8usize {
            let mut table = [0u8; 8];
            for (v, entry) in table.iter_mut().enumerate() {
                let mut w = 0usize;
                for a in 0..3 {
                    let bit = ((v >> a) & 1) ^ ((flips >> a) & 1);
                    w |= bit << perm[a];
                }
                *entry = w as u8;
            }
            out.push(table);
        }
    }
    out
}

fn face_image(table: &[u8; 8], face: u8) -> u8 {
    let corners = corners_of_face(face);
    let images: Vec<u8> = corners.iter().map(|&c| table[c as usize]).collect();
    for axis in 0..3 {
        let bit = (images[0] >> axis) & 1;
        if images.iter().all(|&c| (c >> axis) & 1 == bit) {
            return 2 * axis as u8 + bit;
        }
    }
    unreachable!("images of a face's corners lie on a face")
}

/// Combinatorial isomorphism of connected pavings: seeds every (cube 0 image,
/// cube symmetry) pair and propagates across gluings.
pub fn pavings_isomorphic(p: &Paving, q: &Paving) -> bool {
    if p.n_cubes() != q.n_cubes() {
        return false;
    }
    if p.n_cubes() == 0 {
        return true;
    }
    let syms = cube_symmetries();
    let n = p.n_cubes();
    'seed: for q0 in 0..n {
        for g0 in &syms {
            let mut map: Vec<Option<(usize, [u8; 8])>> = vec![None; n];
            let mut used = vec![false; n];
            map[0] = Some((q0, *g0));
            used[q0] = true;
            let mut stack = vec![0usize];
            let mut reached = 1usize;
            while let Some(c) = stack.pop() {
                let (d, g) = map[c].expect("stacked cubes are mapped");
                for f in 0..6u8 {
                    let (c2, f2, _) = p.glued_to(c, f as usize);
                    let gf = face_image(&g, f);
                    let (d2, f2q, _) = q.glued_to(d, gf as usize);
                    // The induced symmetry on c2 is pinned by the corners of
                    // the glued face.
                    let mut want: Vec<(u8, u8)> = Vec::with_capacity(4);
                    for v in corners_of_face(f) {
                        let (_, w) = p.transport_corner(c, f as usize, v);
                        let (_, w_img) = q.transport_corner(d, gf as usize, g[v as usize]);
                        want.push((w, w_img));
                    }
                    let Some(h) = syms
                        .iter()
                        .find(|h| want.iter().all(|&(w, w_img)| h[w as usize] == w_img))
                    else {
                        continue 'seed;
                    };
                    if face_image(h, f2 as u8) != f2q as u8 {
                        continue 'seed;
                    }
                    match map[c2] {
                        None => {
                            if used[d2] {
                                continue 'seed;
                            }
                            used[d2] = true;
                            map[c2] = Some((d2, *h));
                            reached += 1;
                            stack.push(c2);
                        }
                        Some((d2_old, h_old)) => {
                            if d2_old != d2 || h_old != *h {
                                continue 'seed;
                            }
                        }
                    }
                }
            }
            if reached == n {
                return true;
            }
            // Disconnected pavings are out of scope for the search.
            return false;
        }
    }
    false
}

/// Kinds of triangulation edges in a triangulated paving, by what their
/// endpoints are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeKind {
    /// Both endpoints are cube corners: an original cube edge.
    CubeEdge,
    /// Cube corner to face center.
    Purple,
    /// Cube corner to cube center.
    Blue,
    /// Face center to cube center.
    Red,
}

/// A paving triangulated into 24 tetrahedra per cube, with exact unit-cube
/// corner coordinates per tetrahedron.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricTriangulation {
    pub tri: Triangulation,
    /// Cube containing each tetrahedron.
    pub tet_cube: Vec<usize>,
    /// Cube edge (0..12) spanning corners 0 and 1 of each tetrahedron.
    pub tet_edge: Vec<u8>,
    /// Cube face (0..6) whose center is corner 2 of each tetrahedron.
    pub tet_face: Vec<u8>,
}

impl GeometricTriangulation {
    /// Local index within its cube, `2 * edge + face rank`.
    pub fn local_id(&self, tet: usize) -> usize {
        tet % 24
    }

    /// Exact corner coordinates of a tetrahedron in its unit cube, ordered
    /// [edge endpoint, edge endpoint, face center, cube center].
    pub fn corner_coords(&self, tet: usize) -> [[Rational64; 3]; 4] {
        let half = Rational64::new(1, 2);
        let corner = |c: u8| {
            [
                Rational64::from_integer((c & 1) as i64),
                Rational64::from_integer(((c >> 1) & 1) as i64),
                Rational64::from_integer(((c >> 2) & 1) as i64),
            ]
        };
        let (v, w) = edge_endpoints(self.tet_edge[tet]);
        let face = self.tet_face[tet];
        let (a, _, _) = face_axes(face);
        let mut fc = [half, half, half];
        fc[a] = Rational64::from_integer(face_side(face) as i64);
        [corner(v), corner(w), fc, [half, half, half]]
    }

    /// Kind of each triangulation edge class.
    pub fn edge_kinds(&self) -> Vec<EdgeKind> {
        let classes = self.tri.edge_classes();
        let mut kinds = vec![None; classes.n_classes];
        for tet in 0..self.tri.n_tetrahedra() {
            for (e, &(p, q)) in crate::triangulation::EDGE_VERTS.iter().enumerate() {
                let kind = match (p, q) {
                    (0, 1) => EdgeKind::CubeEdge,
                    (0, 2) | (1, 2) => EdgeKind::Purple,
                    (0, 3) | (1, 3) => EdgeKind::Blue,
                    (2, 3) => EdgeKind::Red,
                    _ => unreachable!(),
                };
                let class = classes.class_of[6 * tet + e];
                match kinds[class] {
                    None => kinds[class] = Some(kind),
                    Some(k) => debug_assert_eq!(k, kind, "edge kind is class-invariant"),
                }
            }
        }
        kinds.into_iter().map(|k| k.expect("every class has a member")).collect()
    }

    /// Kind to (degree to class count).
    pub fn edge_kind_degree_table(&self) -> BTreeMap<EdgeKind, BTreeMap<usize, usize>> {
        let kinds = self.edge_kinds();
        let degrees = self.tri.edge_degrees();
        let mut out: BTreeMap<EdgeKind, BTreeMap<usize, usize>> = BTreeMap::new();
        for (class, kind) in kinds.iter().enumerate() {
            *out.entry(*kind).or_default().entry(degrees[class]).or_insert(0) += 1;
        }
        out
    }
}

/// Triangulates each cube into 24 tetrahedra, one per (edge, containing
/// face) incidence, spanned by the edge endpoints, the face center, and the
/// cube center.
pub fn triangulate(p: &Paving) -> GeometricTriangulation {
    let n = p.n_cubes();
    let tet_of = |cube: usize, edge: u8, face: u8| -> usize {
        let faces = faces_of_edge(edge);
        let rank = faces.iter().position(|&f| f == face).expect("face contains the edge");
        24 * cube + 2 * edge as usize + rank
    };

    let mut gluings = Vec::with_capacity(48 * n);
    for cube in 0..n {
        // Around each cube edge: its two tetrahedra share the face spanned by
        // the edge and the cube center, opposite corner 2 in both.
        for edge in 0..12u8 {
            let [f1, f2] = faces_of_edge(edge);
            gluings.push(Gluing {
                tet_a: tet_of(cube, edge, f1),
                face_a: 2,
                tet_b: tet_of(cube, edge, f2),
                face_b: 2,
                perm: Perm4::identity(),
            });
        }
        // Within each cube face: tetrahedra of edges meeting at a face corner
        // share the face spanned by that corner, the face center, and the
        // cube center.
        for face in 0..6u8 {
            let edges = edges_of_face(face);
            for corner in corners_of_face(face) {
                let at: Vec<u8> = edges
                    .iter()
                    .copied()
                    .filter(|&e| {
                        let (v, w) = edge_endpoints(e);
                        v == corner || w == corner
                    })
                    .collect();
                let (e1, e2) = (at[0], at[1]);
                let idx = |e: u8| {
                    let (v, _) = edge_endpoints(e);
                    usize::from(v != corner)
                };
                let (i1, i2) = (idx(e1), idx(e2));
                let mut images = [0u8; 4];
                images[i1] = i2 as u8;
                images[1 - i1] = (1 - i2) as u8;
                images[2] = 2;
                images[3] = 3;
                gluings.push(Gluing {
                    tet_a: tet_of(cube, e1, face),
                    face_a: (1 - i1) as u8,
                    tet_b: tet_of(cube, e2, face),
                    face_b: (1 - i2) as u8,
                    perm: Perm4::new(images).unwrap(),
                });
            }
        }
    }
    // Across paving gluings: the tetrahedron face on the cube face (opposite
    // the cube center, corner 3) matches its transported partner.
    for g in p.gluings() {
        for edge in edges_of_face(g.face_a) {
            let (v, w) = edge_endpoints(edge);
            let (cube2, v2) = p.transport_corner(g.cube_a, g.face_a as usize, v);
            let (_, w2) = p.transport_corner(g.cube_a, g.face_a as usize, w);
            let edge2 = edge_between(v2, w2);
            let mut images = [0u8; 4];
            let (lo2, _) = edge_endpoints(edge2);
            images[0] = u8::from(v2 != lo2);
            images[1] = u8::from(w2 != lo2);
            images[2] = 2;
            images[3] = 3;
            gluings.push(Gluing {
                tet_a: tet_of(g.cube_a, edge, g.face_a),
                face_a: 3,
                tet_b: tet_of(cube2, edge2, g.face_b),
                face_b: 3,
                perm: Perm4::new(images).unwrap(),
            });
        }
    }

    let mut tet_cube = vec![0usize; 24 * n];
    let mut tet_edge = vec![0u8; 24 * n];
    let mut tet_face = vec![0u8; 24 * n];
    for cube in 0..n {
        for edge in 0..12u8 {
            for face in faces_of_edge(edge) {
                let t = tet_of(cube, edge, face);
                tet_cube[t] = cube;
                tet_edge[t] = edge;
                tet_face[t] = face;
            }
        }
    }
    let tri = Triangulation::from_gluings(24 * n, &gluings)
        .expect("cube triangulation closes over a closed paving");
    GeometricTriangulation { tri, tet_cube, tet_edge, tet_face }
}

/// Per-cube barycenter geometry of the 24 tetrahedra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LengthReport {
    pub tets_per_cube: usize,
    /// Barycenter of each local tetrahedron, exact coordinates.
    pub barycenters: Vec<[String; 3]>,
    /// Squared distances from each barycenter to its four corners.
    pub corner_distances_squared: Vec<[String; 4]>,
    pub max_distance_squared: String,
    pub max_distance: f64,
    /// (local tetrahedron, corner) pairs attaining the maximum.
    pub attained: Vec<[usize; 2]>,
}

/// Exact barycenter-to-corner distances over the 24 tetrahedra of one cube.
pub fn euclidean_lengths(geo: &GeometricTriangulation) -> LengthReport {
    let mut barycenters = Vec::with_capacity(24);
    let mut dists = Vec::with_capacity(24);
    let mut max_sq = Rational64::zero();
    let mut attained = Vec::new();
    for local in 0..24.min(geo.tri.n_tetrahedra()) {
        let corners = geo.corner_coords(local);
        let quarter = Rational64::new(1, 4);
        let mut bary = [Rational64::zero(); 3];
        for c in &corners {
            for (axis, b) in bary.iter_mut().enumerate() {
                *b += c[axis] * quarter;
            }
        }
        let mut row = [Rational64::zero(); 4];
        for (ci, c) in corners.iter().enumerate() {
            let mut sq = Rational64::zero();
            for axis in 0..3 {
                let d = c[axis] - bary[axis];
                sq += d * d;
            }
            row[ci] = sq;
            if sq > max_sq {
                max_sq = sq;
                attained.clear();
            }
            if sq == max_sq {
                attained.push([local, ci]);
            }
        }
        barycenters.push([bary[0].to_string(), bary[1].to_string(), bary[2].to_string()]);
        dists.push([
            row[0].to_string(),
            row[1].to_string(),
            row[2].to_string(),
            row[3].to_string(),
        ]);
    }
    let max_f = rational_f64(max_sq).sqrt();
    LengthReport {
        tets_per_cube: barycenters.len(),
        barycenters,
        corner_distances_squared: dists,
        max_distance_squared: max_sq.to_string(),
        max_distance: max_f,
        attained,
    }
}

fn rational_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Euclidean length of a polyline with exact rational vertices.
pub fn polyline_length(points: &[[Rational64; 3]]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let mut sq = Rational64::zero();
            for axis in 0..3 {
                let d = w[1][axis] - w[0][axis];
                sq += d * d;
            }
            rational_f64(sq).sqrt()
        })
        .sum()
}

/// Rewrites a path from cube coordinates to the coordinates of the k-fold
/// subdivision, where each original cube spans k unit subcubes per axis.
pub fn scale_path(points: &[[Rational64; 3]], k: usize) -> Vec<[Rational64; 3]> {
    let f = Rational64::from_integer(k as i64);
    points.iter().map(|p| [p[0] * f, p[1] * f, p[2] * f]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::validate_cooper_thurston;
    use num::One;

    #[test]
    fn symmetries_form_a_group_of_eight() {
        // Distinct actions on the corner grid, and inverses verified.
        let mut images = std::collections::BTreeSet::new();
        for s in 0..8u8 {
            let img: Vec<(usize, usize)> =
                [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(i, j)| sym_apply(s, 1, i, j)).collect();
            images.insert(img);
            let inv = sym_inverse(s);
            for i in 0..2 {
                for j in 0..2 {
                    let (a, b) = sym_apply(s, 1, i, j);
                    assert_eq!(sym_apply(inv, 1, a, b), (i, j));
                }
            }
        }
        assert_eq!(images.len(), 8);
    }

    #[test]
    fn cube_incidence_tables_are_consistent() {
        for edge in 0..12u8 {
            let (v, w) = edge_endpoints(edge);
            assert!(v < w);
            assert_eq!(edge_between(v, w), edge);
            for face in faces_of_edge(edge) {
                assert!(edges_of_face(face).contains(&edge));
            }
        }
        for face in 0..6u8 {
            for corner in corners_of_face(face) {
                let (i, j) = face_corner_coords(face, corner);
                assert_eq!(corner_on_face(face, i, j), corner);
            }
        }
    }

    #[test]
    fn torus_class_counts() {
        for k in 1..=3usize {
            let p = torus_paving(k);
            let n = k * k * k;
            assert_eq!(p.n_cubes(), n);
            assert_eq!(p.n_face_classes(), 3 * n);
            assert_eq!(p.edge_classes().n_classes, 3 * n);
            assert_eq!(p.vertex_classes().n_classes, n);
            let report = validate_paving(&p).unwrap();
            assert!(report.valid, "reasons: {:?}", report.reasons);
            assert!(report.edge_degrees.values().all(|&d| d == 4));
            assert!(report.degree_3_edges.is_empty());
            assert!(report.degree_5_edges.is_empty());
        }
    }

    #[test]
    fn fan_paving_has_central_degree_m() {
        let report = validate_paving(&fan_paving(6)).unwrap();
        assert!(!report.valid);
        assert!(report.edge_degrees.values().any(|&d| d == 6));
        assert!(report.reasons.iter().any(|r| r.contains("degree 6")));
    }

    #[test]
    fn sphere_circle_paving_is_valid_with_degree_3_circles() {
        let p = sphere_circle_paving();
        assert_eq!(p.n_cubes(), 6);
        let report = validate_paving(&p).unwrap();
        assert!(report.valid, "reasons: {:?}", report.reasons);
        assert_eq!(report.degree_3_edges.len(), 8);
        assert!(report.degree_5_edges.is_empty());
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in report.edge_degrees.values() {
            *histogram.entry(d).or_insert(0) += 1;
        }
        assert_eq!(histogram, BTreeMap::from([(3, 8), (4, 12)]));
    }

    #[test]
    fn trapezohedron_paving_has_degree_3_and_5() {
        let p = trapezohedron_circle_paving();
        assert_eq!(p.n_cubes(), 10);
        let report = validate_paving(&p).unwrap();
        assert!(report.valid, "reasons: {:?}", report.reasons);
        assert_eq!(report.degree_3_edges.len(), 10);
        assert_eq!(report.degree_5_edges.len(), 2);
    }

    #[test]
    fn mirrored_paving_is_non_manifold() {
        let err = validate_paving(&mirrored_paving()).unwrap_err();
        assert!(matches!(err, PavingError::NonManifoldEdge { .. }));
    }

    #[test]
    fn unpaired_slot_fails_to_load() {
        let json = r#"{"cubes": 1, "gluings": [
            {"cubeA": 0, "faceA": 0, "cubeB": 0, "faceB": 1, "symmetry": 0}
        ]}"#;
        let err = serde_json::from_str::<Paving>(json).unwrap_err();
        assert!(err.to_string().contains("unglued"));
    }

    #[test]
    fn paving_serde_round_trips() {
        let p = trapezohedron_circle_paving();
        let json = serde_json::to_string(&p).unwrap();
        let back: Paving = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn subdivision_is_identity_at_one() {
        let p = sphere_circle_paving();
        assert_eq!(subdivide(&p, 1), p);
    }

    #[test]
    fn subdivision_of_unit_torus_is_larger_torus() {
        for k in 2..=3usize {
            assert!(pavings_isomorphic(&subdivide(&torus_paving(1), k), &torus_paving(k)));
        }
        assert!(!pavings_isomorphic(&torus_paving(2), &subdivide(&sphere_circle_paving(), 2)));
    }

    #[test]
    fn subdivision_composes() {
        let p = torus_paving(1);
        assert!(pavings_isomorphic(&subdivide(&subdivide(&p, 2), 2), &subdivide(&p, 4)));
        let q = sphere_circle_paving();
        assert!(pavings_isomorphic(&subdivide(&subdivide(&q, 2), 2), &subdivide(&q, 4)));
    }

    #[test]
    fn subdivision_preserves_validity_and_refines_singular_edges() {
        for k in 2..=3usize {
            let p = subdivide(&sphere_circle_paving(), k);
            let report = validate_paving(&p).unwrap();
            assert!(report.valid, "reasons: {:?}", report.reasons);
            assert_eq!(report.degree_3_edges.len(), 8 * k);
        }
        let p = subdivide(&trapezohedron_circle_paving(), 2);
        let report = validate_paving(&p).unwrap();
        assert!(report.valid);
        assert_eq!(report.degree_3_edges.len(), 20);
        assert_eq!(report.degree_5_edges.len(), 4);
    }

    #[test]
    fn triangulation_counts() {
        let geo = triangulate(&torus_paving(2));
        assert_eq!(geo.tri.n_tetrahedra(), 192);
        let geo1 = triangulate(&torus_paving(1));
        assert_eq!(geo1.tri.n_tetrahedra(), 24);
    }

    #[test]
    fn sample_tetrahedron_is_present() {
        let geo = triangulate(&torus_paving(1));
        let half = Rational64::new(1, 2);
        let zero = Rational64::zero();
        let one = Rational64::one();
        let want = [
            [zero, zero, zero],
            [zero, zero, one],
            [half, zero, half],
            [half, half, half],
        ];
        assert!((0..24).any(|t| geo.corner_coords(t) == want));
    }

    #[test]
    fn torus_edge_kind_degrees() {
        let geo = triangulate(&torus_paving(2));
        let table = geo.edge_kind_degree_table();
        let n = 8usize;
        assert_eq!(table[&EdgeKind::CubeEdge], BTreeMap::from([(8, 3 * n)]));
        assert_eq!(table[&EdgeKind::Purple], BTreeMap::from([(4, 12 * n)]));
        assert_eq!(table[&EdgeKind::Blue], BTreeMap::from([(6, 8 * n)]));
        assert_eq!(table[&EdgeKind::Red], BTreeMap::from([(4, 6 * n)]));
        assert_eq!(
            geo.tri.edge_degree_multiset(),
            BTreeMap::from([(4, 18 * n), (6, 8 * n), (8, 3 * n)])
        );
    }

    #[test]
    fn torus_triangulation_euler_characteristic_vanishes() {
        let geo = triangulate(&torus_paving(2));
        let v = geo.tri.vertex_classes().n_classes as i64;
        let e = geo.tri.edge_classes().n_classes as i64;
        let f = geo.tri.face_classes().n_classes as i64;
        let t = geo.tri.n_tetrahedra() as i64;
        assert_eq!(v, 40);
        assert_eq!(v - e + f - t, 0);
        assert!(geo.tri.orientable());
    }

    #[test]
    fn unit_torus_triangulation_is_dishonest() {
        let geo = triangulate(&torus_paving(1));
        let report = validate_cooper_thurston(&geo.tri);
        assert!(!report.honest);
        assert!(!report.failures.is_empty());
    }

    #[test]
    fn barycenter_and_maximum_distance() {
        let geo = triangulate(&torus_paving(1));
        let report = euclidean_lengths(&geo);
        assert_eq!(report.tets_per_cube, 24);
        assert!(report.barycenters.iter().any(|b| b == &["1/4", "1/8", "1/2"]));
        assert_eq!(report.max_distance_squared, "21/64");
        assert!((report.max_distance - 21f64.sqrt() / 8.0).abs() < 1e-15);
        // The maximum occurs at cube-vertex corners only.
        assert!(report.attained.iter().all(|&[_, c]| c < 2));
        assert_eq!(report.attained.len(), 48);
    }

    #[test]
    fn path_length_scales_with_subdivision() {
        let p = [
            [Rational64::zero(), Rational64::zero(), Rational64::zero()],
            [Rational64::one(), Rational64::new(1, 2), Rational64::zero()],
            [Rational64::one(), Rational64::one(), Rational64::one()],
        ];
        let base = polyline_length(&p);
        for k in 2..=4usize {
            let scaled = polyline_length(&scale_path(&p, k));
            assert!((scaled - k as f64 * base).abs() < 1e-12);
        }
    }
}
