//! Planar face extraction for arrangements of welded polylines.
//!
//! The samplers and the resampling chain repeatedly need the complementary
//! components ("faces") of a union of curves inside a domain: the pockets
//! pinched off by an exploration trace, the components left after deleting
//! loops, the component a replacement excursion must be drawn in. Curves
//! arriving here are non-crossing up to resolution — contacts appear as
//! *near*-touches — so the arrangement is built by:
//!
//! 1. splitting segments at the (rare) exact crossings,
//! 2. **welding** endpoints within a tolerance to each other and onto
//!    nearby segment interiors (T-junctions), which restores the contacts
//!    the continuum picture has,
//! 3. **bridging** any remaining connected components of the wall graph
//!    with shortest connecting edges, so that every face is a single cycle
//!    (a zero-width slit rather than an island), and
//! 4. walking directed half-edges in angular order to enumerate faces.
//!
//! Bounded faces come out with positive signed area and can be fed directly
//! to the conformal mapper; zero-width slits are legitimate boundary for a
//! conformal map and are handled by the zipper.

use super::polyline::{bbox, segment_intersection};
use super::winding::winding_number_raw;
use super::Point;
use std::collections::HashMap;

/// One input curve for the arrangement.
#[derive(Debug, Clone)]
pub struct Wall {
    /// Vertices in order.
    pub points: Vec<Point>,
    /// If true, an implicit closing segment joins last to first.
    pub closed: bool,
}

impl Wall {
    /// An open polyline wall.
    pub fn open(points: Vec<Point>) -> Self {
        Wall { points, closed: false }
    }

    /// A closed polyline wall.
    pub fn closed(points: Vec<Point>) -> Self {
        Wall { points, closed: true }
    }
}

/// One face of the arrangement.
#[derive(Debug, Clone)]
pub struct Face {
    /// Node indices along the boundary cycle.
    pub nodes: Vec<usize>,
    /// Node positions along the boundary cycle.
    pub polygon: Vec<Point>,
    /// Shoelace signed area; positive for bounded faces (counterclockwise
    /// cycles), negative for the unbounded outer face.
    pub signed_area: f64,
}

/// Result of a face extraction.
#[derive(Debug, Clone)]
pub struct FaceSet {
    /// Welded node positions.
    pub nodes: Vec<Point>,
    /// All faces, bounded and unbounded.
    pub faces: Vec<Face>,
    /// Number of bridge edges inserted to connect wall components.
    pub bridge_count: usize,
    /// Length of the longest inserted bridge (0 if none); long bridges
    /// signal geometry the welding tolerance did not explain.
    pub max_bridge_len: f64,
}

impl FaceSet {
    /// Indices of bounded (positive-area) faces.
    pub fn bounded(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&i| self.faces[i].signed_area > 0.0)
    }

    /// The bounded face containing `p`, if any (smallest containing area).
    pub fn face_containing(&self, p: Point) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in self.bounded() {
            if winding_number_raw(&self.faces[i].polygon, p) != 0 {
                match best {
                    Some(j) if self.faces[j].signed_area <= self.faces[i].signed_area => {}
                    _ => best = Some(i),
                }
            }
        }
        best
    }

    /// Bounded faces whose boundary passes within `tol` of `p`.
    pub fn faces_with_boundary_near(&self, p: Point, tol: f64) -> Vec<usize> {
        self.bounded()
            .filter(|&i| {
                let poly = &self.faces[i].polygon;
                let n = poly.len();
                (0..n).any(|k| {
                    super::polyline::segment_distance(poly[k], poly[(k + 1) % n], p) <= tol
                })
            })
            .collect()
    }
}

/// A segment grid for neighborhood queries during construction.
struct Grid {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        Grid { cell: cell.max(1e-300), map: HashMap::new() }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.re / self.cell).floor() as i64, (p.im / self.cell).floor() as i64)
    }

    fn insert_bbox(&mut self, idx: usize, a: Point, b: Point, pad: f64) {
        let (x0, y0, x1, y1) = bbox(&[a, b]);
        let k0 = self.key(Point::new(x0 - pad, y0 - pad));
        let k1 = self.key(Point::new(x1 + pad, y1 + pad));
        for i in k0.0..=k1.0 {
            for j in k0.1..=k1.1 {
                self.map.entry((i, j)).or_default().push(idx);
            }
        }
    }

    fn query_point(&self, p: Point, pad: f64) -> Vec<usize> {
        let k0 = self.key(Point::new(p.re - pad, p.im - pad));
        let k1 = self.key(Point::new(p.re + pad, p.im + pad));
        let mut out = Vec::new();
        for i in k0.0..=k1.0 {
            for j in k0.1..=k1.1 {
                if let Some(v) = self.map.get(&(i, j)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
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
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Builds the welded arrangement of `walls` and enumerates its faces.
///
/// `weld_tol` is the contact tolerance: endpoints closer than this to each
/// other or to another segment's interior are treated as touching. It
/// should be comfortably above the sampling resolution of the input curves
/// and well below their feature scale.
pub fn extract_faces(walls: &[Wall], weld_tol: f64) -> FaceSet {
    // --- collect segments ---------------------------------------------
    let mut segs: Vec<(Point, Point)> = Vec::new();
    for w in walls {
        let n = w.points.len();
        if n < 2 {
            continue;
        }
        let last = if w.closed { n } else { n - 1 };
        for i in 0..last {
            let (a, b) = (w.points[i], w.points[(i + 1) % n]);
            if (b - a).norm() > 0.0 {
                segs.push((a, b));
            }
        }
    }
    if segs.is_empty() {
        return FaceSet { nodes: vec![], faces: vec![], bridge_count: 0, max_bridge_len: 0.0 };
    }

    // --- split segments at proper crossings ---------------------------
    let mean_len = segs.iter().map(|(a, b)| (b - a).norm()).sum::<f64>() / segs.len() as f64;
    let cell = (2.0 * mean_len).max(4.0 * weld_tol);
    let mut grid = Grid::new(cell);
    for (i, &(a, b)) in segs.iter().enumerate() {
        grid.insert_bbox(i, a, b, 0.0);
    }
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); segs.len()];
    let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for (i, &(a, b)) in segs.iter().enumerate() {
        for j in grid.query_point(a, (b - a).norm() + weld_tol) {
            if j <= i || !seen.insert((i, j)) {
                continue;
            }
            let (c, d) = segs[j];
            if let Some((t, u, _)) = segment_intersection(a, b, c, d) {
                // Endpoint contacts are the weld phase's job; only record
                // interior crossings.
                let interior = |s: f64| s > 1e-9 && s < 1.0 - 1e-9;
                if interior(t) || interior(u) {
                    if interior(t) {
                        cuts[i].push(t);
                    }
                    if interior(u) {
                        cuts[j].push(u);
                    }
                }
            }
        }
    }
    let mut pieces: Vec<(Point, Point)> = Vec::new();
    for (i, &(a, b)) in segs.iter().enumerate() {
        if cuts[i].is_empty() {
            pieces.push((a, b));
            continue;
        }
        cuts[i].sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut prev = 0.0;
        let mut from = a;
        for &t in cuts[i].iter() {
            if t - prev > 1e-12 {
                let p = a + (b - a) * t;
                pieces.push((from, p));
                from = p;
                prev = t;
            }
        }
        pieces.push((from, b));
    }

    // --- weld endpoints into nodes ------------------------------------
    let mut raw_nodes: Vec<Point> = Vec::with_capacity(2 * pieces.len());
    for &(a, b) in &pieces {
        raw_nodes.push(a);
        raw_nodes.push(b);
    }
    let mut ngrid = Grid::new((4.0 * weld_tol).max(1e-12));
    for (i, &p) in raw_nodes.iter().enumerate() {
        ngrid.insert_bbox(i, p, p, 0.0);
    }
    let mut uf = UnionFind::new(raw_nodes.len());
    for (i, &p) in raw_nodes.iter().enumerate() {
        for j in ngrid.query_point(p, weld_tol) {
            if j > i && (raw_nodes[j] - p).norm() <= weld_tol {
                uf.union(i, j);
            }
        }
    }
    // Cluster representatives -> averaged positions.
    let mut cluster_id: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<Point> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut node_of_raw: Vec<usize> = vec![0; raw_nodes.len()];
    for i in 0..raw_nodes.len() {
        let root = uf.find(i);
        let id = *cluster_id.entry(root).or_insert_with(|| {
            nodes.push(Point::new(0.0, 0.0));
            counts.push(0);
            nodes.len() - 1
        });
        node_of_raw[i] = id;
        nodes[id] += raw_nodes[i];
        counts[id] += 1;
    }
    for (p, &c) in nodes.iter_mut().zip(counts.iter()) {
        *p /= c as f64;
    }

    // Edges between welded nodes.
    let mut edge_set: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let add_edge = |edges: &mut Vec<(usize, usize)>,
                        edge_set: &mut std::collections::HashSet<(usize, usize)>,
                        u: usize,
                        v: usize| {
        if u != v {
            let key = (u.min(v), u.max(v));
            if edge_set.insert(key) {
                edges.push(key);
            }
        }
    };
    for (k, _) in pieces.iter().enumerate() {
        let u = node_of_raw[2 * k];
        let v = node_of_raw[2 * k + 1];
        add_edge(&mut edges, &mut edge_set, u, v);
    }

    // --- T-junction welds: nodes onto nearby edge interiors ------------
    // One pass: for each node, find edges whose interior passes within the
    // tolerance and split them at the node.
    let mut egrid = Grid::new(cell);
    for (e, &(u, v)) in edges.iter().enumerate() {
        egrid.insert_bbox(e, nodes[u], nodes[v], weld_tol);
    }
    let mut replaced: Vec<Option<Vec<(usize, usize)>>> = vec![None; edges.len()];
    for nid in 0..nodes.len() {
        let p = nodes[nid];
        for e in egrid.query_point(p, weld_tol) {
            if replaced[e].is_some() {
                continue;
            }
            let (u, v) = edges[e];
            if u == nid || v == nid {
                continue;
            }
            let (a, b) = (nodes[u], nodes[v]);
            let d = b - a;
            let len2 = d.norm_sqr();
            if len2 == 0.0 {
                continue;
            }
            let t = ((p - a).re * d.re + (p - a).im * d.im) / len2;
            if t <= 1e-6 || t >= 1.0 - 1e-6 {
                continue;
            }
            if (p - (a + d * t)).norm() <= weld_tol {
                replaced[e] = Some(vec![(u, nid), (nid, v)]);
            }
        }
    }
    let mut final_edges: Vec<(usize, usize)> = Vec::new();
    let mut final_set: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for (e, &(u, v)) in edges.iter().enumerate() {
        match &replaced[e] {
            None => add_edge(&mut final_edges, &mut final_set, u, v),
            Some(parts) => {
                for &(x, y) in parts {
                    add_edge(&mut final_edges, &mut final_set, x, y);
                }
            }
        }
    }
    let mut edges = final_edges;

    // --- bridge remaining components ----------------------------------
    let mut comp_uf = UnionFind::new(nodes.len());
    let mut degree = vec![0usize; nodes.len()];
    for &(u, v) in &edges {
        comp_uf.union(u, v);
        degree[u] += 1;
        degree[v] += 1;
    }
    let active: Vec<usize> = (0..nodes.len()).filter(|&i| degree[i] > 0).collect();
    let mut bridge_count = 0usize;
    let mut max_bridge_len = 0.0f64;
    loop {
        let mut roots: HashMap<usize, Vec<usize>> = HashMap::new();
        for &i in &active {
            roots.entry(comp_uf.find(i)).or_default().push(i);
        }
        if roots.len() <= 1 {
            break;
        }
        // Nearest pair of nodes in different components. Components are
        // ordered by smallest member and ties in distance break by node
        // indices, so the bridge choice is deterministic.
        let mut comp_list: Vec<Vec<usize>> = roots.into_values().collect();
        comp_list.sort_by_key(|l| *l.iter().min().unwrap());
        let mut best: Option<(f64, usize, usize)> = None;
        for (ci, list_a) in comp_list.iter().enumerate() {
            for list_b in comp_list.iter().skip(ci + 1) {
                for &i in list_a.iter() {
                    for &j in list_b.iter() {
                        let d = (nodes[i] - nodes[j]).norm();
                        let better = match best {
                            None => true,
                            Some((bd, bi, bj)) => {
                                (d, i.min(j), i.max(j)) < (bd, bi.min(bj), bi.max(bj))
                            }
                        };
                        if better {
                            best = Some((d, i, j));
                        }
                    }
                }
            }
        }
        let (d, i, j) = best.unwrap();
        comp_uf.union(i, j);
        edges.push((i.min(j), i.max(j)));
        bridge_count += 1;
        max_bridge_len = max_bridge_len.max(d);
    }

    // --- half-edge face walk ------------------------------------------
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for (v, list) in adj.iter_mut().enumerate() {
        let here = nodes[v];
        list.sort_by(|&a, &b| {
            let ta = (nodes[a] - here).arg();
            let tb = (nodes[b] - here).arg();
            ta.partial_cmp(&tb).unwrap()
        });
    }
    let index_of = |adjv: &Vec<usize>, w: usize| adjv.iter().position(|&x| x == w).unwrap();
    let mut visited: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut faces: Vec<Face> = Vec::new();
    for &(su, sv) in &edges {
        for &(mut u, mut v) in &[(su, sv), (sv, su)] {
            if visited.contains(&(u, v)) {
                continue;
            }
            let (u0, v0) = (u, v);
            let mut cycle: Vec<usize> = Vec::new();
            loop {
                visited.insert((u, v));
                cycle.push(u);
                // Arrive at v along (u -> v); leave along the edge that is
                // the clockwise predecessor of (v -> u), which walks the
                // face keeping its interior on the left. The successor map
                // permutes directed edges, so the walk returns to the start
                // edge after finitely many steps.
                let list = &adj[v];
                let k = index_of(list, u);
                let next = list[(k + list.len() - 1) % list.len()];
                u = v;
                v = next;
                if (u, v) == (u0, v0) {
                    break;
                }
            }
            let polygon: Vec<Point> = cycle.iter().map(|&i| nodes[i]).collect();
            let mut area2 = 0.0;
            let m = polygon.len();
            for i in 0..m {
                let (p, q) = (polygon[i], polygon[(i + 1) % m]);
                area2 += p.re * q.im - p.im * q.re;
            }
            faces.push(Face { nodes: cycle, polygon, signed_area: 0.5 * area2 });
        }
    }

    FaceSet { nodes, faces, bridge_count, max_bridge_len }
}
