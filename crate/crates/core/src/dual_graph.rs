//! Barycenter adjacency graph of a triangulation, mod-2 homology
//! annotations on its edges, and the homological systole.
//!
//! The graph is bipartite: one node per tetrahedron barycenter, one per
//! face, edge, or vertex class barycenter, with an edge for each incidence.
//! Each graph edge carries the mod-2 homology class of a small closed-up
//! path in the underlying manifold, so the class of any graph cycle is the
//! bitwise sum of its edge annotations.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triangulation::{edge_index, Triangulation, EDGE_VERTS};

/// What a graph node stands for. Non-tetrahedron variants carry class ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "camelCase")]
pub enum SimplexRef {
    Tet(usize),
    Face(usize),
    Edge(usize),
    Vertex(usize),
}

/// The barycenter graph. Tetrahedron nodes come first, then face, edge, and
/// vertex class nodes.
#[derive(Clone, Debug)]
pub struct HatTau {
    pub back_refs: Vec<SimplexRef>,
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<u32>>,
    pub n_tets: usize,
}

impl HatTau {
    pub fn n_nodes(&self) -> usize {
        self.back_refs.len()
    }

    pub fn is_tet_node(&self, node: usize) -> bool {
        node < self.n_tets
    }

    /// Breadth-first distance, or None when disconnected.
    pub fn distance(&self, from: usize, to: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n_nodes()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                return Some(dist[u]);
            }
            for &w in &self.adjacency[u] {
                if dist[w as usize] == usize::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        None
    }
}

/// Builds the barycenter graph of a triangulation.
pub fn build_dual_graph(t: &Triangulation) -> HatTau {
    let faces = t.face_classes();
    let edges = t.edge_classes();
    let verts = t.vertex_classes();
    let n_tets = t.n_tetrahedra();
    let face_base = n_tets;
    let edge_base = face_base + faces.n_classes;
    let vert_base = edge_base + edges.n_classes;

    let mut back_refs = Vec::with_capacity(vert_base + verts.n_classes);
    back_refs.extend((0..n_tets).map(SimplexRef::Tet));
    back_refs.extend((0..faces.n_classes).map(SimplexRef::Face));
    back_refs.extend((0..edges.n_classes).map(SimplexRef::Edge));
    back_refs.extend((0..verts.n_classes).map(SimplexRef::Vertex));

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); back_refs.len()];
    for tet in 0..n_tets {
        let mut others = std::collections::BTreeSet::new();
        for f in 0..4 {
            others.insert(face_base + faces.class_of[4 * tet + f]);
        }
        for e in 0..6 {
            others.insert(edge_base + edges.class_of[6 * tet + e]);
        }
        for v in 0..4 {
            others.insert(vert_base + verts.class_of[4 * tet + v]);
        }
        for b in others {
            adjacency[tet].push(b as u32);
            adjacency[b].push(tet as u32);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    HatTau { back_refs, adjacency, n_tets }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("mod-2 first Betti number {betti} exceeds the 64-bit annotation budget")]
    BettiTooLarge { betti: usize },
    #[error("spanning-tree root {root} is not a vertex class (there are {n_classes})")]
    RootOutOfRange { root: usize, n_classes: usize },
}

/// Mod-2 homology annotations on the edges of a [`HatTau`], aligned with its
/// adjacency lists. Produced by [`homology_annotations`].
#[derive(Clone, Debug)]
pub struct Annotations {
    /// Mod-2 first Betti number; masks use its low bits.
    pub betti: usize,
    pub edge_masks: Vec<Vec<u64>>,
}

impl Annotations {
    /// Annotation of the graph edge between adjacent nodes.
    pub fn mask_between(&self, g: &HatTau, u: usize, w: usize) -> u64 {
        let idx = g.adjacency[u]
            .binary_search(&(w as u32))
            .expect("nodes are adjacent");
        self.edge_masks[u][idx]
    }
}

// Bitpacked GF(2) vectors indexed by non-tree edge rank.
fn word_count(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get_bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn flip_bit(v: &mut [u64], i: usize) {
    v[i / 64] ^= 1 << (i % 64);
}

/// Computes edge annotations with the spanning tree rooted at vertex class 0.
pub fn homology_annotations(t: &Triangulation, g: &HatTau) -> Result<Annotations, HomologyError> {
    homology_annotations_with_root(t, g, 0)
}

/// Same as [`homology_annotations`] with an explicit spanning-tree root; the
/// choice changes coordinates but not which cycles are null-homologous.
pub fn homology_annotations_with_root(
    t: &Triangulation,
    g: &HatTau,
    root: usize,
) -> Result<Annotations, HomologyError> {
    let verts = t.vertex_classes();
    let edges = t.edge_classes();
    if root >= verts.n_classes {
        return Err(HomologyError::RootOutOfRange { root, n_classes: verts.n_classes });
    }

    // Endpoint vertex classes of each edge class, from its least incidence.
    let edge_members = edges.members();
    let endpoints: Vec<(usize, usize)> = edge_members
        .iter()
        .map(|m| {
            let (tet, e) = (m[0] / 6, m[0] % 6);
            let (p, q) = EDGE_VERTS[e];
            (verts.class_of[4 * tet + p], verts.class_of[4 * tet + q])
        })
        .collect();

    // Spanning tree of the class 1-skeleton.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); verts.n_classes];
    for (e, &(a, b)) in endpoints.iter().enumerate() {
        incident[a].push(e);
        if b != a {
            incident[b].push(e);
        }
    }
    let mut tree_edge = vec![false; edges.n_classes];
    let mut seen = vec![false; verts.n_classes];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &e in &incident[v] {
            let (a, b) = endpoints[e];
            let w = if a == v { b } else { a };
            if !seen[w] {
                seen[w] = true;
                tree_edge[e] = true;
                queue.push_back(w);
            }
        }
    }

    // Rank non-tree edges: they index the cycle space.
    let mut cotree_rank = vec![usize::MAX; edges.n_classes];
    let mut m = 0usize;
    for e in 0..edges.n_classes {
        if !tree_edge[e] {
            cotree_rank[e] = m;
            m += 1;
        }
    }
    let words = word_count(m.max(1));

    // Face relations: the three boundary edge classes of each face class,
    // projected to non-tree coordinates, span the null cycles.
    let face_members = t.face_classes().members();
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(face_members.len());
    for members in &face_members {
        let (tet, f) = (members[0] / 4, members[0] % 4);
        let mut row = vec![0u64; words];
        let corners: Vec<usize> = (0..4).filter(|&c| c != f).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let e = edge_index(corners[i], corners[j]);
                let class = edges.class_of[6 * tet + e];
                if !tree_edge[class] {
                    flip_bit(&mut row, cotree_rank[class]);
                }
            }
        }
        if row.iter().any(|&w| w != 0) {
            rows.push(row);
        }
    }

    // Row-reduce the relations; the free columns are homology coordinates.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m];
    let mut reduced: Vec<(usize, Vec<u64>)> = Vec::new();
    for mut row in rows {
        for &(p, ref r) in &reduced {
            if get_bit(&row, p) {
                for (a, b) in row.iter_mut().zip(r) {
                    *a ^= b;
                }
            }
        }
        if let Some(p) = (0..m).find(|&i| get_bit(&row, i)) {
            // Clear this pivot from earlier rows to reach reduced form.
            let snapshot = row.clone();
            for &mut (_, ref mut r) in &mut reduced {
                if get_bit(r, p) {
                    for (a, b) in r.iter_mut().zip(&snapshot) {
                        *a ^= b;
                    }
                }
            }
            pivot_of_col[p] = Some(reduced.len());
            reduced.push((p, row));
        }
    }
    let betti = m - reduced.len();
    if betti > 64 {
        return Err(HomologyError::BettiTooLarge { betti });
    }
    let free_cols: Vec<usize> = (0..m).filter(|&c| pivot_of_col[c].is_none()).collect();
    let free_rank: HashMap<usize, usize> =
        free_cols.iter().copied().enumerate().map(|(r, c)| (c, r)).collect();

    // Quotient image of each edge class: tree edges vanish; a non-tree edge
    // is its unit vector reduced by the relations.
    let mut class_mask = vec![0u64; edges.n_classes];
    for e in 0..edges.n_classes {
        if tree_edge[e] {
            continue;
        }
        let col = cotree_rank[e];
        let mut mask = 0u64;
        match pivot_of_col[col] {
            Some(r) => {
                let row = &reduced[r].1;
                for (&c, &rank) in &free_rank {
                    if get_bit(row, c) {
                        mask |= 1 << rank;
                    }
                }
            }
            None => mask |= 1 << free_rank[&col],
        }
        class_mask[e] = mask;
    }

    // Transfer to graph edges. Each node projects to a vertex class through
    // the least-class corner of its simplex; a graph edge maps to the cube
    // of the connecting triangulation edge inside the shared tetrahedron.
    let anchor_corner: Vec<usize> = (0..t.n_tetrahedra())
        .map(|tet| {
            (0..4)
                .min_by_key(|&c| (verts.class_of[4 * tet + c], c))
                .expect("tetrahedra have corners")
        })
        .collect();
    let corners_of = |r: SimplexRef, tet: usize| -> Vec<usize> {
        match r {
            SimplexRef::Tet(_) => (0..4).collect(),
            SimplexRef::Face(class) => {
                let members = &face_members[class];
                let slot = members
                    .iter()
                    .find(|&&s| s / 4 == tet)
                    .expect("face class is incident to the tetrahedron");
                (0..4).filter(|&c| c != slot % 4).collect()
            }
            SimplexRef::Edge(class) => {
                let slot = edge_members[class]
                    .iter()
                    .find(|&&s| s / 6 == tet)
                    .expect("edge class is incident to the tetrahedron");
                let (p, q) = EDGE_VERTS[slot % 6];
                vec![p, q]
            }
            SimplexRef::Vertex(class) => {
                let members = verts.members();
                let slot = members[class]
                    .iter()
                    .find(|&&s| s / 4 == tet)
                    .expect("vertex class is incident to the tetrahedron");
                vec![slot % 4]
            }
        }
    };

    let mut edge_masks: Vec<Vec<u64>> = Vec::with_capacity(g.n_nodes());
    for u in 0..g.n_nodes() {
        let mut masks = Vec::with_capacity(g.adjacency[u].len());
        for &w in &g.adjacency[u] {
            let (tet_node, other) = if g.is_tet_node(u) { (u, w as usize) } else { (w as usize, u) };
            let tet = tet_node;
            let a = anchor_corner[tet];
            let sub = corners_of(g.back_refs[other], tet);
            let b = sub
                .iter()
                .copied()
                .min_by_key(|&c| (verts.class_of[4 * tet + c], c))
                .expect("subsimplices have corners");
            let mask = if a == b {
                0
            } else {
                class_mask[edges.class_of[6 * tet + edge_index(a, b)]]
            };
            masks.push(mask);
        }
        edge_masks.push(masks);
    }
    Ok(Annotations { betti, edge_masks })
}

/// Default budget of covering-space states explored by
/// [`homological_systole`].
pub const DEFAULT_SYSTOLE_CAP: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SystoleOutcome {
    /// Mod-2 homology is trivial; every cycle annotates to zero.
    AllCyclesNullHomologous,
    /// Shortest cycle with nonzero annotation, as a closed node sequence.
    #[serde(rename_all = "camelCase")]
    Finite { length: usize, witness: Vec<u32> },
    /// The state budget ran out; every cycle of length at most
    /// `explored_radius` is null-homologous.
    #[serde(rename_all = "camelCase")]
    LowerBoundOnly { explored_radius: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SystoleReport {
    pub betti: usize,
    pub outcome: SystoleOutcome,
    /// Echoes the caller's assertion that the fundamental group is abelian,
    /// in which case the homological number is the true systole.
    pub exact_for_abelian_pi1: bool,
}

/// Shortest cycle with nonzero mod-2 annotation, by lockstep breadth-first
/// search in the mod-2 homology cover from every tetrahedron node. `cap`
/// bounds the total number of covering states explored.
///
/// A nontrivial closed walk of length `L` through a node `v` lifts to a
/// cover path from `(v, 0)` to `(v, m)` with `m != 0`; splitting it at the
/// midpoint shows `L` equals the least `d(v, mu) + d(v, mu')` over nodes
/// with two reachable fiber states, so each start only needs rings out to
/// half the current best, and the first discovery prunes every later start.
pub fn homological_systole(
    g: &HatTau,
    ann: &Annotations,
    cap: usize,
    assert_abelian_pi1: bool,
) -> SystoleReport {
    let report = |outcome| SystoleReport {
        betti: ann.betti,
        outcome,
        exact_for_abelian_pi1: assert_abelian_pi1,
    };
    if ann.betti == 0 {
        return report(SystoleOutcome::AllCyclesNullHomologous);
    }
    for u in 0..g.n_nodes() {
        for &w in &g.adjacency[u] {
            assert!(
                g.is_tet_node(u) != g.is_tet_node(w as usize),
                "barycenter graph must be bipartite"
            );
        }
    }

    struct Search {
        start: usize,
        /// Node to the visited states of its fiber, as (mask, distance).
        fibers: HashMap<u32, Vec<(u64, u32)>>,
        frontier: Vec<(u32, u64)>,
    }
    let mut searches: Vec<Search> = (0..g.n_tets)
        .map(|v| Search {
            start: v,
            fibers: HashMap::from([(v as u32, vec![(0u64, 0u32)])]),
            frontier: vec![(v as u32, 0)],
        })
        .collect();
    let mut states = searches.len();
    let mut best: Option<(usize, usize)> = None; // (length, start)
    let capped = |best: &Option<(usize, usize)>, ring: usize| {
        let certified = 2 * ring;
        SystoleOutcome::LowerBoundOnly {
            explored_radius: match best {
                Some((len, _)) => certified.min(len - 1),
                None => certified,
            },
        }
    };
    if states > cap {
        return report(capped(&best, 0));
    }
    let mut ring = 0usize;
    loop {
        ring += 1;
        let mut any_alive = false;
        for s in searches.iter_mut() {
            if s.frontier.is_empty() {
                continue;
            }
            // Cycles still findable from this start are at least 2*ring
            // long; once that cannot beat the best, the start is settled.
            if let Some((len, _)) = best {
                if ring > (len - 1) / 2 {
                    s.frontier.clear();
                    continue;
                }
            }
            any_alive = true;
            let mut next = Vec::new();
            for &(u, m) in &s.frontier {
                let u = u as usize;
                for (&w, &emask) in g.adjacency[u].iter().zip(&ann.edge_masks[u]) {
                    let state = (w, m ^ emask);
                    let fiber = s.fibers.entry(w).or_default();
                    if fiber.iter().any(|&(mask, _)| mask == state.1) {
                        continue;
                    }
                    for &(mask, dist) in fiber.iter() {
                        if mask != state.1 {
                            let length = dist as usize + ring;
                            if best.map_or(true, |(len, _)| length < len) {
                                best = Some((length, s.start));
                            }
                        }
                    }
                    fiber.push((state.1, ring as u32));
                    states += 1;
                    if states > cap {
                        return report(capped(&best, ring - 1));
                    }
                    next.push(state);
                }
            }
            s.frontier = next;
        }
        if !any_alive {
            break;
        }
    }

    match best {
        None => report(SystoleOutcome::AllCyclesNullHomologous),
        Some((length, start)) => {
            let witness = reconstruct_witness(g, ann, start, length);
            report(SystoleOutcome::Finite { length, witness })
        }
    }
}

// Parent-tracking rerun of the winning search.
fn reconstruct_witness(g: &HatTau, ann: &Annotations, start: usize, length: usize) -> Vec<u32> {
    let mut parent: HashMap<(u32, u64), (u32, u64)> = HashMap::new();
    let mut dist: HashMap<(u32, u64), usize> = HashMap::from([((start as u32, 0), 0)]);
    let mut queue = VecDeque::from([(start as u32, 0u64)]);
    while let Some((u, m)) = queue.pop_front() {
        let d = dist[&(u, m)];
        if d >= length {
            break;
        }
        for (&w, &emask) in g.adjacency[u as usize].iter().zip(&ann.edge_masks[u as usize]) {
            let state = (w, m ^ emask);
            if state.0 as usize == start && state.1 != 0 {
                let mut path = vec![w];
                let (mut cu, mut cm) = (u, m);
                loop {
                    path.push(cu);
                    if cu as usize == start && cm == 0 {
                        break;
                    }
                    let p = parent[&(cu, cm)];
                    (cu, cm) = p;
                }
                path.reverse();
                path.pop();
                debug_assert_eq!(path.len(), length);
                return path;
            }
            if !dist.contains_key(&state) {
                dist.insert(state, d + 1);
                parent.insert(state, (u, m));
                queue.push_back(state);
            }
        }
    }
    unreachable!("witness of established length exists")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeparationError {
    #[error("witness cycle is empty")]
    EmptyCycle,
    #[error("cycle nodes {a} and {b} are not adjacent")]
    NotAClosedCycle { a: u32, b: u32 },
    #[error("cycle length {got} does not match the stated systole {stated}")]
    LengthMismatch { got: usize, stated: usize },
    #[error("cycle carries no tetrahedron node")]
    NoTetrahedronNode,
    #[error("selected node at cycle offset {offset} is not a tetrahedron node")]
    NotATetrahedron { offset: usize },
    #[error("selected barycenters {i} and {j} are at distance {dist}, below {want}")]
    TooClose { i: usize, j: usize, dist: usize, want: usize },
}

/// Picks `floor(sys_len / 16)` tetrahedron barycenters along a shortest
/// nontrivial cycle, spaced 8 apart starting from its least tetrahedron
/// node, and verifies by breadth-first search that chosen barycenters `i`
/// and `j` are at graph distance at least `8 * |i - j|`.
pub fn separated_tetrahedra(
    g: &HatTau,
    cycle: &[u32],
    sys_len: usize,
) -> Result<Vec<u32>, SeparationError> {
    if cycle.is_empty() {
        return Err(SeparationError::EmptyCycle);
    }
    if cycle.len() != sys_len {
        return Err(SeparationError::LengthMismatch { got: cycle.len(), stated: sys_len });
    }
    for i in 0..cycle.len() {
        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        if g.adjacency[a as usize].binary_search(&b).is_err() {
            return Err(SeparationError::NotAClosedCycle { a, b });
        }
    }
    let n = sys_len / 16;
    if n == 0 {
        return Ok(Vec::new());
    }
    let anchor_pos = (0..cycle.len())
        .filter(|&i| g.is_tet_node(cycle[i] as usize))
        .min_by_key(|&i| cycle[i])
        .ok_or(SeparationError::NoTetrahedronNode)?;
    let mut chosen = Vec::with_capacity(n);
    for k in 0..n {
        let offset = (anchor_pos + 8 * k) % cycle.len();
        let node = cycle[offset];
        if !g.is_tet_node(node as usize) {
            return Err(SeparationError::NotATetrahedron { offset: 8 * k });
        }
        chosen.push(node);
    }
    for i in 0..n {
        for j in i + 1..n {
            let want = 8 * (j - i);
            let dist = g
                .distance(chosen[i] as usize, chosen[j] as usize)
                .unwrap_or(usize::MAX);
            if dist < want {
                return Err(SeparationError::TooClose { i, j, dist, want });
            }
        }
    }
    Ok(chosen)
}
