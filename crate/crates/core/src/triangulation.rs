//! Face-gluing triangulations of closed 3-manifolds.
//!
//! A triangulation is a set of abstract tetrahedra together with a
//! fixed-point-free involution pairing their 4n boundary faces, each pairing
//! decorated with the corner permutation it induces. On top of that raw data
//! the module derives simplex classes, edge degrees, orientability, vertex
//! links as explicit triangle complexes, and the honesty / flag-link / degree
//! checks that together make up Cooper-Thurston validity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Corner pairs of the six edges of a tetrahedron, in index order.
pub const EDGE_VERTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index of the edge with the given corner pair.
pub fn edge_index(v: usize, w: usize) -> usize {
    let (a, b) = if v < w { (v, w) } else { (w, v) };
    EDGE_VERTS.iter().position(|&(p, q)| (p, q) == (a, b)).expect("corner pair out of range")
}

/// A permutation of the four corners of a tetrahedron.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 4]", into = "[u8; 4]")]
pub struct Perm4([u8; 4]);

impl Perm4 {
    pub fn identity() -> Self {
        Perm4([0, 1, 2, 3])
    }

    pub fn new(images: [u8; 4]) -> Result<Self, TriangulationError> {
        let mut seen = [false; 4];
        for &v in &images {
            if v > 3 || seen[v as usize] {
                return Err(TriangulationError::BadPermutation { images });
            }
            seen[v as usize] = true;
        }
        Ok(Perm4(images))
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self.compose(other)` applies `other` first, then `self`.
    pub fn compose(&self, other: &Perm4) -> Perm4 {
        Perm4([
            self.0[other.0[0] as usize],
            self.0[other.0[1] as usize],
            self.0[other.0[2] as usize],
            self.0[other.0[3] as usize],
        ])
    }

    pub fn inverse(&self) -> Perm4 {
        let mut inv = [0u8; 4];
        for i in 0..4 {
            inv[self.0[i] as usize] = i as u8;
        }
        Perm4(inv)
    }

    /// Parity: +1 for even permutations, -1 for odd ones.
    pub fn sign(&self) -> i8 {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn images(&self) -> [u8; 4] {
        self.0
    }
}

impl TryFrom<[u8; 4]> for Perm4 {
    type Error = TriangulationError;
    fn try_from(images: [u8; 4]) -> Result<Self, Self::Error> {
        Perm4::new(images)
    }
}

impl From<Perm4> for [u8; 4] {
    fn from(p: Perm4) -> [u8; 4] {
        p.0
    }
}

impl fmt::Debug for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {} {}]", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// One face pairing: face `face_a` of `tet_a` is glued to face `face_b` of
/// `tet_b`, and `perm` carries corners of `tet_a` to corners of `tet_b`
/// (so `perm[face_a] = face_b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gluing {
    pub tet_a: usize,
    pub face_a: u8,
    pub tet_b: usize,
    pub face_b: u8,
    pub perm: Perm4,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("corner images {images:?} are not a permutation of 0..4")]
    BadPermutation { images: [u8; 4] },
    #[error("gluing references tetrahedron {tet} but there are only {n_tets}")]
    TetOutOfRange { tet: usize, n_tets: usize },
    #[error("face index {face} out of range")]
    FaceOutOfRange { face: u8 },
    #[error("face {face} of tetrahedron {tet} appears in more than one gluing")]
    DuplicateSlot { tet: usize, face: u8 },
    #[error("face {face} of tetrahedron {tet} is glued to itself")]
    SelfGluedFace { tet: usize, face: u8 },
    #[error("gluing permutation must carry face {face_a} to face {face_b}")]
    PermFaceMismatch { face_a: u8, face_b: u8 },
    #[error("face {face} of tetrahedron {tet} is unglued; the complex is not closed")]
    UnpairedSlot { tet: usize, face: u8 },
}

/// A closed triangulation: `n` tetrahedra with all `4n` faces paired.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TriangulationWire", into = "TriangulationWire")]
pub struct Triangulation {
    n_tets: usize,
    // Indexed by slot = 4 * tet + face: (partner slot, corner permutation
    // from this tet to the partner tet).
    pairs: Vec<(u32, Perm4)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TriangulationWire {
    tets: usize,
    gluings: Vec<Gluing>,
}

impl TryFrom<TriangulationWire> for Triangulation {
    type Error = TriangulationError;
    fn try_from(w: TriangulationWire) -> Result<Self, Self::Error> {
        Triangulation::from_gluings(w.tets, &w.gluings)
    }
}

impl From<Triangulation> for TriangulationWire {
    fn from(t: Triangulation) -> TriangulationWire {
        TriangulationWire { tets: t.n_tets, gluings: t.gluings() }
    }
}

/// Partition of per-tetrahedron incidences (corners, edge slots, or face
/// slots) into classes of the quotient complex. Class ids are contiguous and
/// ordered by least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classes {
    pub class_of: Vec<usize>,
    pub n_classes: usize,
}

impl Classes {
    fn from_union_find(mut uf: UnionFind) -> Classes {
        let n = uf.parent.len();
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut class_of = Vec::with_capacity(n);
        for i in 0..n {
            let root = uf.find(i);
            let next = remap.len();
            class_of.push(*remap.entry(root).or_insert(next));
        }
        Classes { n_classes: remap.len(), class_of }
    }

    /// Incidence ids in each class, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (i, &c) in self.class_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
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
            // Larger roots point at smaller ones so class ids follow least members.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl Triangulation {
    pub fn from_gluings(n_tets: usize, gluings: &[Gluing]) -> Result<Self, TriangulationError> {
        let mut pairs: Vec<Option<(u32, Perm4)>> = vec![None; 4 * n_tets];
        let claim = |tet: usize, face: u8| -> Result<usize, TriangulationError> {
            if tet >= n_tets {
                return Err(TriangulationError::TetOutOfRange { tet, n_tets });
            }
            if face > 3 {
                return Err(TriangulationError::FaceOutOfRange { face });
            }
            Ok(4 * tet + face as usize)
        };
        for g in gluings {
            let a = claim(g.tet_a, g.face_a)?;
            let b = claim(g.tet_b, g.face_b)?;
            if a == b {
                return Err(TriangulationError::SelfGluedFace { tet: g.tet_a, face: g.face_a });
            }
            if g.perm.apply(g.face_a as usize) != g.face_b as usize {
                return Err(TriangulationError::PermFaceMismatch {
                    face_a: g.face_a,
                    face_b: g.face_b,
                });
            }
            for (slot, partner, perm) in
                [(a, b, g.perm), (b, a, g.perm.inverse())]
            {
                if pairs[slot].is_some() {
                    return Err(TriangulationError::DuplicateSlot {
                        tet: slot / 4,
                        face: (slot % 4) as u8,
                    });
                }
                pairs[slot] = Some((partner as u32, perm));
            }
        }
        let mut flat = Vec::with_capacity(4 * n_tets);
        for (slot, p) in pairs.into_iter().enumerate() {
            match p {
                Some(pair) => flat.push(pair),
                None => {
                    return Err(TriangulationError::UnpairedSlot {
                        tet: slot / 4,
                        face: (slot % 4) as u8,
                    })
                }
            }
        }
        Ok(Triangulation { n_tets, pairs: flat })
    }

    pub fn n_tetrahedra(&self) -> usize {
        self.n_tets
    }

    /// The partner of face `face` of tetrahedron `tet`.
    pub fn glued_to(&self, tet: usize, face: usize) -> (usize, usize, Perm4) {
        let (slot, perm) = self.pairs[4 * tet + face];
        ((slot / 4) as usize, (slot % 4) as usize, perm)
    }

    /// Each pairing once, keyed by its lesser slot.
    pub fn gluings(&self) -> Vec<Gluing> {
        let mut out = Vec::with_capacity(2 * self.n_tets);
        for slot in 0..4 * self.n_tets {
            let (partner, perm) = self.pairs[slot];
            if slot < partner as usize {
                out.push(Gluing {
                    tet_a: slot / 4,
                    face_a: (slot % 4) as u8,
                    tet_b: partner as usize / 4,
                    face_b: (partner % 4) as u8,
                    perm,
                });
            }
        }
        out
    }

    /// Corner classes; incidence id is `4 * tet + corner`.
    pub fn vertex_classes(&self) -> Classes {
        let mut uf = UnionFind::new(4 * self.n_tets);
        for slot in 0..4 * self.n_tets {
            let (partner, perm) = self.pairs[slot];
            let (tet, face) = (slot / 4, slot % 4);
            let tet2 = partner as usize / 4;
            for v in 0..4 {
                if v != face {
                    uf.union(4 * tet + v, 4 * tet2 + perm.apply(v));
                }
            }
        }
        Classes::from_union_find(uf)
    }

    /// Edge classes; incidence id is `6 * tet + edge` with [`EDGE_VERTS`] order.
    pub fn edge_classes(&self) -> Classes {
        let mut uf = UnionFind::new(6 * self.n_tets);
        for slot in 0..4 * self.n_tets {
            let (partner, perm) = self.pairs[slot];
            let (tet, face) = (slot / 4, slot % 4);
            let tet2 = partner as usize / 4;
            for (e, &(v, w)) in EDGE_VERTS.iter().enumerate() {
                if v != face && w != face {
                    let e2 = edge_index(perm.apply(v), perm.apply(w));
                    uf.union(6 * tet + e, 6 * tet2 + e2);
                }
            }
        }
        Classes::from_union_find(uf)
    }

    /// Face classes; incidence id is the face slot `4 * tet + face`.
    pub fn face_classes(&self) -> Classes {
        let mut uf = UnionFind::new(4 * self.n_tets);
        for slot in 0..4 * self.n_tets {
            uf.union(slot, self.pairs[slot].0 as usize);
        }
        Classes::from_union_find(uf)
    }

    /// Number of edge-slot incidences in each edge class, i.e. how many
    /// tetrahedron corners wrap around the edge.
    pub fn edge_degrees(&self) -> Vec<usize> {
        let classes = self.edge_classes();
        let mut degrees = vec![0usize; classes.n_classes];
        for &c in &classes.class_of {
            degrees[c] += 1;
        }
        degrees
    }

    /// Histogram of [`Self::edge_degrees`]: degree to number of classes.
    pub fn edge_degree_multiset(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for d in self.edge_degrees() {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    /// True when tetrahedra admit orientations with every gluing reversing
    /// them, i.e. every pairing permutation is odd under consistent signs.
    pub fn orientable(&self) -> bool {
        let mut orient: Vec<i8> = vec![0; self.n_tets];
        for start in 0..self.n_tets {
            if orient[start] != 0 {
                continue;
            }
            orient[start] = 1;
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                for f in 0..4 {
                    let (slot, perm) = self.pairs[4 * t + f];
                    let t2 = slot as usize / 4;
                    let want = -orient[t] * perm.sign();
                    if orient[t2] == 0 {
                        orient[t2] = want;
                        stack.push(t2);
                    } else if orient[t2] != want {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Why the quotient fails to be a simplicial complex; empty exactly when
    /// the triangulation is honest.
    pub fn honesty_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();
        let vc = self.vertex_classes();
        for t in 0..self.n_tets {
            let mut cs = [0usize; 4];
            for (v, c) in cs.iter_mut().enumerate() {
                *c = vc.class_of[4 * t + v];
            }
            let set: BTreeSet<usize> = cs.iter().copied().collect();
            if set.len() != 4 {
                failures.push(format!(
                    "tetrahedron {t} has repeated vertex classes {cs:?}"
                ));
            }
        }

        // Distinct simplices of the quotient must have distinct vertex sets.
        let ec = self.edge_classes();
        let mut edge_key: BTreeMap<usize, (Vec<usize>, usize)> = BTreeMap::new();
        let mut seen_edge: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for t in 0..self.n_tets {
            for (e, &(v, w)) in EDGE_VERTS.iter().enumerate() {
                let class = ec.class_of[6 * t + e];
                let mut key = vec![vc.class_of[4 * t + v], vc.class_of[4 * t + w]];
                key.sort_unstable();
                if key[0] == key[1] {
                    // Reported above via the repeated-corner check; skip the
                    // vertex-set map for degenerate edges.
                    continue;
                }
                edge_key.entry(class).or_insert_with(|| (key.clone(), 6 * t + e));
                match seen_edge.get(&key) {
                    Some(&other) if other != class => failures.push(format!(
                        "edge classes {other} and {class} share vertex classes {key:?}"
                    )),
                    _ => {
                        seen_edge.insert(key, class);
                    }
                }
            }
        }

        let fc = self.face_classes();
        let mut seen_face: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for t in 0..self.n_tets {
            for f in 0..4 {
                let class = fc.class_of[4 * t + f];
                let mut key: Vec<usize> =
                    (0..4).filter(|&v| v != f).map(|v| vc.class_of[4 * t + v]).collect();
                key.sort_unstable();
                key.dedup();
                if key.len() != 3 {
                    continue;
                }
                match seen_face.get(&key) {
                    Some(&other) if other != class => failures.push(format!(
                        "face classes {other} and {class} share vertex classes {key:?}"
                    )),
                    _ => {
                        seen_face.insert(key, class);
                    }
                }
            }
        }

        let mut seen_tet: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for t in 0..self.n_tets {
            let mut key: Vec<usize> = (0..4).map(|v| vc.class_of[4 * t + v]).collect();
            key.sort_unstable();
            key.dedup();
            if key.len() != 4 {
                continue;
            }
            match seen_tet.get(&key) {
                Some(&other) => failures.push(format!(
                    "tetrahedra {other} and {t} share vertex classes {key:?}"
                )),
                None => {
                    seen_tet.insert(key, t);
                }
            }
        }

        failures.sort();
        failures.dedup();
        failures
    }

    pub fn is_honest(&self) -> bool {
        self.honesty_failures().is_empty()
    }

    /// The link of a vertex class as a closed triangle complex, one triangle
    /// per corner incidence.
    pub fn vertex_link(&self, class: usize) -> Result<VertexLinkSurface, LinkError> {
        let vc = self.vertex_classes();
        let corners: Vec<(usize, usize)> = (0..4 * self.n_tets)
            .filter(|&i| vc.class_of[i] == class)
            .map(|i| (i / 4, i % 4))
            .collect();
        if corners.is_empty() {
            return Err(LinkError::NoSuchClass { class });
        }
        let mut tri_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, &tc) in corners.iter().enumerate() {
            tri_of.insert(tc, i);
        }

        // Link vertices are orbits of (tet, corner c, direction d != c) under
        // the face pairings that fix the corner.
        let dir_id = |tri: usize, d: usize| -> usize { 3 * tri + pos_in_complement(corners[tri].1, d) };
        let mut uf = UnionFind::new(3 * corners.len());
        for (tri, &(t, c)) in corners.iter().enumerate() {
            for f in 0..4 {
                if f == c {
                    continue;
                }
                let (slot, perm) = self.pairs[4 * t + f];
                let (t2, c2) = (slot as usize / 4, perm.apply(c));
                let tri2 = tri_of[&(t2, c2)];
                for d in 0..4 {
                    if d != c && d != f {
                        uf.union(dir_id(tri, d), dir_id(tri2, perm.apply(d)));
                    }
                }
            }
        }
        let orbits = Classes::from_union_find(uf);

        let mut triangles = Vec::with_capacity(corners.len());
        for tri in 0..corners.len() {
            let c = corners[tri].1;
            let ds = complement(c);
            triangles.push([
                orbits.class_of[dir_id(tri, ds[0])],
                orbits.class_of[dir_id(tri, ds[1])],
                orbits.class_of[dir_id(tri, ds[2])],
            ]);
        }

        // Link triangle (t, c) has one edge per tetrahedron face e containing
        // the corner; that edge sits opposite the triangle corner labelled e.
        let mut pairing = vec![(0u32, false); 3 * corners.len()];
        for (tri, &(t, c)) in corners.iter().enumerate() {
            for (p, &e) in complement(c).iter().enumerate() {
                let (slot, perm) = self.pairs[4 * t + e];
                let (t2, c2) = (slot as usize / 4, perm.apply(c));
                let tri2 = tri_of[&(t2, c2)];
                let p2 = pos_in_complement(c2, perm.apply(e));
                if tri2 == tri && p2 == p {
                    return Err(LinkError::NonSurface { tet: t, face: e, corner: c });
                }
                // Corner at cyclic position p+1 of this triangle maps through
                // the gluing; flip records whether the partner sees it at p2+1.
                let d_first = complement(c)[(p + 1) % 3];
                let q = pos_in_complement(c2, perm.apply(d_first));
                let flip = q != (p2 + 1) % 3;
                pairing[3 * tri + p] = ((3 * tri2 + p2) as u32, flip);
            }
        }

        let surface = SurfaceComplex::from_parts(orbits.n_classes, triangles, pairing)?;
        Ok(VertexLinkSurface { class, corners, surface })
    }

    /// Plain-text pairing table, one row per tetrahedron.
    pub fn gluing_table_text(&self) -> String {
        let mut out = String::new();
        for t in 0..self.n_tets {
            out.push_str(&format!("tet {t:>4}:"));
            for f in 0..4 {
                let (t2, f2, perm) = self.glued_to(t, f);
                out.push_str(&format!("  F{f} -> tet {t2} F{f2} {perm:?}"));
            }
            out.push('\n');
        }
        out
    }
}

fn complement(c: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut k = 0;
    for d in 0..4 {
        if d != c {
            out[k] = d;
            k += 1;
        }
    }
    out
}

fn pos_in_complement(c: usize, d: usize) -> usize {
    complement(c).iter().position(|&x| x == d).expect("direction equals the corner")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("no vertex class {class}")]
    NoSuchClass { class: usize },
    #[error("link edge at tetrahedron {tet}, face {face}, corner {corner} is glued to itself")]
    NonSurface { tet: usize, face: usize, corner: usize },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// The link of one vertex class, with back references into the triangulation.
#[derive(Clone, Debug)]
pub struct VertexLinkSurface {
    pub class: usize,
    /// `(tet, corner)` of the incidence behind each link triangle, in order.
    pub corners: Vec<(usize, usize)>,
    pub surface: SurfaceComplex,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("triangle {tri} repeats vertex {vertex}; edge matching is ambiguous")]
    LoopEdge { tri: usize, vertex: usize },
    #[error("edge {a}-{b} borders {count} triangle sides, expected 2")]
    OpenEdge { a: usize, b: usize, count: usize },
    #[error("vertex id {vertex} out of range")]
    VertexOutOfRange { vertex: usize },
    #[error("pairing table is not a fixed-point-free involution")]
    BadPairing,
}

/// A closed surface built from triangles and an explicit edge pairing.
///
/// Edge slot `e` of a triangle is the edge opposite corner `e`; its endpoint
/// corners in cyclic order are `e+1` and `e+2` mod 3. A pairing entry
/// `(partner, flip)` glues the slot to `partner`, matching endpoints in
/// cyclic order when `flip` is false and crossed when true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceComplex {
    n_vertices: usize,
    triangles: Vec<[usize; 3]>,
    pairing: Vec<(u32, bool)>,
}

impl SurfaceComplex {
    /// Builds the pairing by matching vertex pairs; each unordered pair must
    /// bound exactly two triangle sides, so the complex must be simplicial
    /// enough for edges to be recognized by their endpoints.
    pub fn from_triangles(
        n_vertices: usize,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, SurfaceError> {
        let mut sides: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n_vertices {
                    return Err(SurfaceError::VertexOutOfRange { vertex: v });
                }
            }
            for e in 0..3 {
                let (a, b) = (tri[(e + 1) % 3], tri[(e + 2) % 3]);
                if a == b {
                    return Err(SurfaceError::LoopEdge { tri: t, vertex: a });
                }
                let key = (a.min(b), a.max(b));
                sides.entry(key).or_default().push(3 * t + e);
            }
        }
        let mut pairing = vec![(u32::MAX, false); 3 * triangles.len()];
        for ((a, b), slots) in sides {
            if slots.len() != 2 {
                return Err(SurfaceError::OpenEdge { a, b, count: slots.len() });
            }
            let (s1, s2) = (slots[0], slots[1]);
            let first = |s: usize| triangles[s / 3][(s % 3 + 1) % 3];
            let flip = first(s1) != first(s2);
            pairing[s1] = (s2 as u32, flip);
            pairing[s2] = (s1 as u32, flip);
        }
        Ok(SurfaceComplex { n_vertices, triangles, pairing })
    }

    /// Assembles a complex from an explicit pairing table.
    pub fn from_parts(
        n_vertices: usize,
        triangles: Vec<[usize; 3]>,
        pairing: Vec<(u32, bool)>,
    ) -> Result<Self, SurfaceError> {
        if pairing.len() != 3 * triangles.len() {
            return Err(SurfaceError::BadPairing);
        }
        for (slot, &(partner, flip)) in pairing.iter().enumerate() {
            let p = partner as usize;
            if p >= pairing.len() || p == slot || pairing[p] != (slot as u32, flip) {
                return Err(SurfaceError::BadPairing);
            }
        }
        for tri in &triangles {
            for &v in tri {
                if v >= n_vertices {
                    return Err(SurfaceError::VertexOutOfRange { vertex: v });
                }
            }
        }
        Ok(SurfaceComplex { n_vertices, triangles, pairing })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        3 * self.triangles.len() / 2
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    pub fn is_connected(&self) -> bool {
        if self.triangles.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.triangles.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(t) = stack.pop() {
            for e in 0..3 {
                let t2 = self.pairing[3 * t + e].0 as usize / 3;
                if !seen[t2] {
                    seen[t2] = true;
                    count += 1;
                    stack.push(t2);
                }
            }
        }
        count == self.triangles.len()
    }

    /// Distinct vertices per triangle, and simplices determined by their
    /// vertex sets.
    pub fn is_simplicial(&self) -> bool {
        let mut tri_sets = BTreeSet::new();
        for tri in &self.triangles {
            let mut s = *tri;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return false;
            }
            if !tri_sets.insert(s) {
                return false;
            }
        }
        // Edge classes, keyed by endpoints: two classes may not share them.
        let mut edge_owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for slot in 0..self.pairing.len() {
            let class = slot.min(self.pairing[slot].0 as usize);
            let tri = &self.triangles[slot / 3];
            let (a, b) = (tri[(slot % 3 + 1) % 3], tri[(slot % 3 + 2) % 3]);
            let key = (a.min(b), a.max(b));
            match edge_owner.get(&key) {
                Some(&c) if c != class => return false,
                _ => {
                    edge_owner.insert(key, class);
                }
            }
        }
        true
    }

    /// Every 3-clique of the 1-skeleton spans a triangle.
    pub fn is_flag(&self) -> bool {
        let mut adj = vec![BTreeSet::new(); self.n_vertices];
        let mut tri_sets = BTreeSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[(e + 1) % 3], tri[(e + 2) % 3]);
                adj[a].insert(b);
                adj[b].insert(a);
            }
            let mut s = *tri;
            s.sort_unstable();
            tri_sets.insert(s);
        }
        for a in 0..self.n_vertices {
            for &b in adj[a].iter().filter(|&&b| b > a) {
                for &c in adj[b].iter().filter(|&&c| c > b) {
                    if adj[a].contains(&c) && !tri_sets.contains(&[a, b, c]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_sphere(&self) -> bool {
        self.is_connected() && self.euler_characteristic() == 2
    }

    /// Edge class id per slot: the lesser slot of the paired couple.
    fn edge_class_ids(&self) -> (Vec<usize>, usize) {
        let mut id_of = vec![usize::MAX; self.pairing.len()];
        let mut next = 0;
        for slot in 0..self.pairing.len() {
            if id_of[slot] == usize::MAX {
                id_of[slot] = next;
                id_of[self.pairing[slot].0 as usize] = next;
                next += 1;
            }
        }
        (id_of, next)
    }

    /// Barycentric subdivision: six triangles per triangle, new vertices at
    /// edge classes and triangle centers.
    pub fn barycentric_subdivision(&self) -> SurfaceComplex {
        let (edge_ids, n_edges) = self.edge_class_ids();
        let v0 = self.n_vertices;
        let e0 = v0 + n_edges;
        let mut tris = Vec::with_capacity(6 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let center = e0 + t;
            for p in 0..3 {
                for q in 0..3 {
                    if q != p {
                        tris.push([tri[p], v0 + edge_ids[3 * t + q], center]);
                    }
                }
            }
        }
        SurfaceComplex::from_triangles(e0 + self.triangles.len(), tris)
            .expect("subdivision of a closed complex is closed and unambiguous")
    }

    /// Canonical certificate of the flag graph; equal certificates mean
    /// isomorphic complexes. Requires a connected complex.
    pub fn canonical_certificate(&self) -> Vec<u32> {
        let n_flags = 6 * self.triangles.len();
        if n_flags == 0 {
            return Vec::new();
        }
        let mut best: Option<Vec<u32>> = None;
        for start in 0..n_flags {
            let enc = self.certificate_from(start);
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
        best.unwrap()
    }

    // Flag id: 6 * tri + 2 * edge_slot + end, the end picking which endpoint
    // corner (cyclic positions e+1, e+2) the flag stands on.
    fn flag_neighbors(&self, flag: usize) -> [usize; 3] {
        let (t, e, s) = (flag / 6, (flag % 6) / 2, flag % 2);
        let other_end = 6 * t + 2 * e + (1 - s);
        let corner = (e + 1 + s) % 3;
        // The other edge slot at this corner is the third index besides the
        // corner and e.
        let e2 = (0..3).find(|&x| x != corner && x != e).unwrap();
        let s2 = if (e2 + 1) % 3 == corner { 0 } else { 1 };
        let same_corner = 6 * t + 2 * e2 + s2;
        let (partner, flip) = self.pairing[3 * t + e];
        let (t2, ee2) = (partner as usize / 3, partner as usize % 3);
        let s3 = if flip { 1 - s } else { s };
        let across = 6 * t2 + 2 * ee2 + s3;
        [other_end, same_corner, across]
    }

    fn certificate_from(&self, start: usize) -> Vec<u32> {
        let n_flags = 6 * self.triangles.len();
        let mut id = vec![u32::MAX; n_flags];
        let mut order = Vec::with_capacity(n_flags);
        id[start] = 0;
        order.push(start);
        let mut head = 0;
        while head < order.len() {
            let f = order[head];
            head += 1;
            for nb in self.flag_neighbors(f) {
                if id[nb] == u32::MAX {
                    id[nb] = order.len() as u32;
                    order.push(nb);
                }
            }
        }
        let mut enc = Vec::with_capacity(3 * order.len());
        for &f in &order {
            for nb in self.flag_neighbors(f) {
                enc.push(id[nb]);
            }
        }
        enc
    }

    pub fn isomorphic(&self, other: &SurfaceComplex) -> bool {
        self.n_triangles() == other.n_triangles()
            && self.canonical_certificate() == other.canonical_certificate()
    }
}

/// Double cone over an `m`-gon: 2m triangles. `m = 4` is the octahedron.
pub fn bipyramid(m: usize) -> SurfaceComplex {
    assert!(m >= 3, "bipyramid needs at least a triangle rim");
    let rim = |i: usize| 2 + i % m;
    let mut tris = Vec::with_capacity(2 * m);
    for i in 0..m {
        tris.push([0, rim(i), rim(i + 1)]);
        tris.push([1, rim(i + 1), rim(i)]);
    }
    SurfaceComplex::from_triangles(2 + m, tris).expect("bipyramid is closed")
}

/// Cube surface with every square face coned at its center: 24 triangles on
/// 8 corners and 6 face centers.
pub fn quartered_cube() -> SurfaceComplex {
    let mut tris = Vec::with_capacity(24);
    for axis in 0..3usize {
        let (b, c) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for side in 0..2usize {
            let face = 2 * axis + side;
            let corner = |sb: usize, sc: usize| (side << axis) | (sb << b) | (sc << c);
            let ring = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
            for i in 0..4 {
                tris.push([ring[i], ring[(i + 1) % 4], 8 + face]);
            }
        }
    }
    SurfaceComplex::from_triangles(14, tris).expect("quartered cube is closed")
}

/// The vertex links that arise in triangulated cube pavings: subdivided
/// bipyramids at cube corners (one per allowed edge degree), the octahedron
/// at face centers, and the quartered cube at cube centers.
pub fn link_catalog() -> Vec<(&'static str, SurfaceComplex)> {
    vec![
        ("subdivided-triangular-bipyramid", bipyramid(3).barycentric_subdivision()),
        ("subdivided-octahedron", bipyramid(4).barycentric_subdivision()),
        ("subdivided-pentagonal-bipyramid", bipyramid(5).barycentric_subdivision()),
        ("octahedron", bipyramid(4)),
        ("quartered-cube", quartered_cube()),
    ]
}

/// Outcome of the Cooper-Thurston checks on one triangulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CtReport {
    pub honest: bool,
    pub links_are_flag_spheres: bool,
    /// Edge degree to number of edge classes.
    pub edge_degree_multiset: BTreeMap<usize, usize>,
    /// All degrees lie in {4, 6, 8, 10}.
    pub degrees_in_allowed_set: bool,
    /// Per vertex class, the catalog entry its link matches, if any.
    /// Informative only; validity does not depend on it.
    pub catalog_match: Vec<Option<String>>,
    pub failures: Vec<String>,
}

impl CtReport {
    pub fn is_valid(&self) -> bool {
        self.honest && self.links_are_flag_spheres && self.degrees_in_allowed_set
    }
}

/// Runs honesty, flag-sphere-link, and edge-degree checks, and matches each
/// link against [`link_catalog`].
pub fn validate_cooper_thurston(t: &Triangulation) -> CtReport {
    let mut failures = t.honesty_failures();
    let honest = failures.is_empty();

    let catalog: Vec<(String, Vec<u32>)> = link_catalog()
        .into_iter()
        .map(|(name, s)| (name.to_string(), s.canonical_certificate()))
        .collect();

    let n_vertex_classes = t.vertex_classes().n_classes;
    let mut links_are_flag_spheres = true;
    let mut catalog_match = Vec::with_capacity(n_vertex_classes);
    for class in 0..n_vertex_classes {
        match t.vertex_link(class) {
            Err(e) => {
                links_are_flag_spheres = false;
                failures.push(format!("vertex class {class}: {e}"));
                catalog_match.push(None);
            }
            Ok(link) => {
                let s = &link.surface;
                let good = s.is_sphere() && s.is_simplicial() && s.is_flag();
                if !good {
                    links_are_flag_spheres = false;
                    failures.push(format!(
                        "vertex class {class}: link is not a flag sphere \
                         (connected {}, euler {}, simplicial {}, flag {})",
                        s.is_connected(),
                        s.euler_characteristic(),
                        s.is_simplicial(),
                        s.is_flag()
                    ));
                }
                let cert = if s.is_connected() { s.canonical_certificate() } else { Vec::new() };
                catalog_match.push(
                    catalog
                        .iter()
                        .find(|(_, c)| !cert.is_empty() && *c == cert)
                        .map(|(name, _)| name.clone()),
                );
            }
        }
    }

    let edge_degree_multiset = t.edge_degree_multiset();
    let degrees_in_allowed_set =
        edge_degree_multiset.keys().all(|d| matches!(d, 4 | 6 | 8 | 10));
    if !degrees_in_allowed_set {
        let bad: Vec<usize> = edge_degree_multiset
            .keys()
            .filter(|d| !matches!(d, 4 | 6 | 8 | 10))
            .copied()
            .collect();
        failures.push(format!("edge degrees {bad:?} outside {{4, 6, 8, 10}}"));
    }

    CtReport {
        honest,
        links_are_flag_spheres,
        edge_degree_multiset,
        degrees_in_allowed_set,
        catalog_match,
        failures,
    }
}

/// Boundary of the 4-simplex: five tetrahedra on five vertices, every pair
/// glued along their common face. Triangulates the 3-sphere.
pub fn boundary_4_simplex() -> Triangulation {
    let corners = |omit: usize| -> Vec<usize> { (0..5).filter(|&v| v != omit).collect() };
    let mut gluings = Vec::with_capacity(10);
    for i in 0..5 {
        for j in i + 1..5 {
            let ci = corners(i);
            let cj = corners(j);
            let face_a = ci.iter().position(|&v| v == j).unwrap();
            let face_b = cj.iter().position(|&v| v == i).unwrap();
            let mut images = [0u8; 4];
            for (p, &v) in ci.iter().enumerate() {
                images[p] = if v == j {
                    face_b as u8
                } else {
                    cj.iter().position(|&w| w == v).unwrap() as u8
                };
            }
            gluings.push(Gluing {
                tet_a: i,
                face_a: face_a as u8,
                tet_b: j,
                face_b: face_b as u8,
                perm: Perm4::new(images).unwrap(),
            });
        }
    }
    Triangulation::from_gluings(5, &gluings).expect("simplex boundary is closed")
}
