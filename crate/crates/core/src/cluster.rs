//! The discrete cluster: vertices, oriented edges, labeled regions.
//!
//! Every edge stores the region on each side of its tail->head direction
//! (the unbounded face is [`RegionRef::Exterior`]). A region's boundary is
//! recovered by walking directed edges that keep the region on the left;
//! interfaces between two bubbles are single edges shared by both walks
//! with opposite orientation, so each interface contributes once to the
//! cluster perimeter.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{DensityField, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RegionId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// A side label of an edge: a bounded region or the unbounded exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RegionRef {
    Region(RegionId),
    Exterior,
}

impl RegionRef {
    pub fn region(self) -> Option<RegionId> {
        match self {
            RegionRef::Region(id) => Some(id),
            RegionRef::Exterior => None,
        }
    }

    pub fn is_exterior(self) -> bool {
        matches!(self, RegionRef::Exterior)
    }
}

impl fmt::Display for RegionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionRef::Region(id) => write!(f, "{id}"),
            RegionRef::Exterior => write!(f, "exterior"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub pos: Point,
    /// Pinned vertices sit at the origin exactly and never move.
    pub pinned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub left: RegionRef,
    pub right: RegionRef,
}

impl Edge {
    /// Side labels as seen when walking from `from` along this edge.
    pub fn sides_from(&self, from: VertexId) -> (RegionRef, RegionRef) {
        if from == self.tail {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }

    pub fn other_end(&self, v: VertexId) -> VertexId {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: RegionId,
    pub label: String,
    pub target_area: f64,
}

/// Relative radius (x cluster diameter) within which a vertex counts as
/// sitting at the origin for the valence-4 exemption and pinning logic.
pub const EPSILON_ORIGIN_REL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("unknown region {0}")]
    MissingRegion(RegionId),
    #[error("unknown vertex {0}")]
    MissingVertex(VertexId),
    #[error("unknown edge {0}")]
    MissingEdge(EdgeId),
    #[error("region {0} has no closed boundary")]
    OpenBoundary(RegionId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

/// One invariant violation found by [`Cluster::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(message: String) -> Violation {
        Violation {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Violation {
        Violation {
            severity: Severity::Warning,
            message,
        }
    }
}

/// A maximal chain of edges between two junction vertices (or a closed loop
/// of valence-2 vertices). The unit of regularity analysis.
#[derive(Debug, Clone)]
pub struct Arc {
    /// Ordered vertex chain; for closed arcs the first vertex is not repeated.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Side labels along the chain direction.
    pub left: RegionRef,
    pub right: RegionRef,
    pub closed: bool,
}

/// Combinatorial data derived from the edge set, rebuilt lazily after any
/// topology change. Pure position updates keep it valid.
#[derive(Debug, Clone, Default)]
pub(crate) struct TopologyCache {
    pub(crate) loops: BTreeMap<RegionId, Option<Vec<Vec<VertexId>>>>,
    pub(crate) dense: Option<std::rc::Rc<DenseTopology>>,
}

/// Flat-index view of the cluster used by the energy hot path: vertices in
/// id order, edges and region boundary loops as index lists.
#[derive(Debug, Clone)]
pub(crate) struct DenseTopology {
    pub(crate) order: Vec<VertexId>,
    pub(crate) pinned: Vec<bool>,
    /// (tail index, head index, id) per edge, in id order.
    pub(crate) edges: Vec<(u32, u32, EdgeId)>,
    pub(crate) region_ids: Vec<RegionId>,
    /// Boundary loops per region (same order as `region_ids`).
    pub(crate) loops: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub(crate) density: DensityField,
    pub(crate) vertices: BTreeMap<VertexId, Vertex>,
    pub(crate) edges: BTreeMap<EdgeId, Edge>,
    pub(crate) regions: BTreeMap<RegionId, Region>,
    pub(crate) next_vertex: u64,
    pub(crate) next_edge: u64,
    pub(crate) cache: std::cell::RefCell<TopologyCache>,
}

impl PartialEq for Cluster {
    fn eq(&self, other: &Self) -> bool {
        self.density == other.density
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.regions == other.regions
    }
}

impl Cluster {
    pub fn new(density: DensityField) -> Cluster {
        Cluster {
            density,
            vertices: BTreeMap::new(),
            edges: BTreeMap::new(),
            regions: BTreeMap::new(),
            next_vertex: 0,
            next_edge: 0,
            cache: std::cell::RefCell::new(TopologyCache::default()),
        }
    }

    pub(crate) fn invalidate_topology(&mut self) {
        let cache = self.cache.get_mut();
        cache.loops.clear();
        cache.dense = None;
    }

    /// The dense index view, built on demand and shared until the next
    /// topology change. Fails when some region boundary does not close.
    pub(crate) fn dense_topology(&self) -> Result<std::rc::Rc<DenseTopology>, ClusterError> {
        if let Some(dense) = self.cache.borrow().dense.clone() {
            return Ok(dense);
        }
        let order: Vec<VertexId> = self.vertices.keys().copied().collect();
        let index: BTreeMap<VertexId, u32> = order
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        let pinned = order.iter().map(|v| self.vertices[v].pinned).collect();
        let edges = self
            .edges
            .values()
            .map(|e| (index[&e.tail], index[&e.head], e.id))
            .collect();
        let mut region_ids = Vec::new();
        let mut loops = Vec::new();
        for &rid in self.regions.keys() {
            let vertex_loops = self.region_boundary(rid)?;
            region_ids.push(rid);
            loops.push(
                vertex_loops
                    .iter()
                    .map(|lp| lp.iter().map(|v| index[v]).collect())
                    .collect(),
            );
        }
        let dense = std::rc::Rc::new(DenseTopology {
            order,
            pinned,
            edges,
            region_ids,
            loops,
        });
        self.cache.borrow_mut().dense = Some(dense.clone());
        Ok(dense)
    }

    /// Vertex positions in dense-index order.
    pub(crate) fn dense_positions(&self, dense: &DenseTopology) -> Vec<Point> {
        dense.order.iter().map(|v| self.vertices[v].pos).collect()
    }

    pub fn set_pinned(&mut self, id: VertexId, pinned: bool) {
        self.invalidate_topology();
        self.vertices.get_mut(&id).unwrap().pinned = pinned;
    }

    pub fn density(&self) -> DensityField {
        self.density
    }

    pub fn set_density(&mut self, density: DensityField) {
        self.density = density;
    }

    pub fn add_vertex(&mut self, pos: Point, pinned: bool) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.invalidate_topology();
        self.vertices.insert(id, Vertex { id, pos, pinned });
        id
    }

    /// Inserts a vertex with a caller-chosen id (document loading).
    pub fn insert_vertex(&mut self, id: VertexId, pos: Point, pinned: bool) {
        self.next_vertex = self.next_vertex.max(id.0 + 1);
        self.invalidate_topology();
        self.vertices.insert(id, Vertex { id, pos, pinned });
    }

    pub fn add_edge(
        &mut self,
        tail: VertexId,
        head: VertexId,
        left: RegionRef,
        right: RegionRef,
    ) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.invalidate_topology();
        self.edges.insert(
            id,
            Edge {
                id,
                tail,
                head,
                left,
                right,
            },
        );
        id
    }

    pub fn insert_edge(
        &mut self,
        id: EdgeId,
        tail: VertexId,
        head: VertexId,
        left: RegionRef,
        right: RegionRef,
    ) {
        self.next_edge = self.next_edge.max(id.0 + 1);
        self.invalidate_topology();
        self.edges.insert(
            id,
            Edge {
                id,
                tail,
                head,
                left,
                right,
            },
        );
    }

    pub fn add_region(&mut self, id: RegionId, label: impl Into<String>, target_area: f64) {
        self.regions.insert(
            id,
            Region {
                id,
                label: label.into(),
                target_area,
            },
        );
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.values()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions.get(&id)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn position(&self, id: VertexId) -> Point {
        self.vertices[&id].pos
    }

    pub fn set_position(&mut self, id: VertexId, pos: Point) {
        self.vertices.get_mut(&id).unwrap().pos = pos;
    }

    pub fn set_target_area(&mut self, id: RegionId, target: f64) {
        self.regions.get_mut(&id).unwrap().target_area = target;
    }

    /// Translates every vertex. Pinned flags are cleared: a pinned vertex is
    /// by definition at the origin, which a translation breaks.
    pub fn translate(&mut self, offset: Point) {
        self.invalidate_topology();
        for v in self.vertices.values_mut() {
            v.pos = v.pos + offset;
            v.pinned = false;
        }
    }

    pub fn edge_length(&self, id: EdgeId) -> f64 {
        let e = &self.edges[&id];
        self.position(e.tail).dist(self.position(e.head))
    }

    /// Bounding-box diagonal; the length scale for relative tolerances.
    pub fn diameter(&self) -> f64 {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in self.vertices.values() {
            min = Point::new(min.x.min(v.pos.x), min.y.min(v.pos.y));
            max = Point::new(max.x.max(v.pos.x), max.y.max(v.pos.y));
        }
        if self.vertices.is_empty() {
            0.0
        } else {
            (max - min).norm()
        }
    }

    /// Radius within which a vertex counts as "at the origin".
    pub fn epsilon_origin(&self) -> f64 {
        EPSILON_ORIGIN_REL * self.diameter()
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.keys().map(|&id| self.edge_length(id)).sum::<f64>() / self.edges.len() as f64
    }

    /// Number of incident edges per vertex.
    pub fn valences(&self) -> BTreeMap<VertexId, usize> {
        let mut val: BTreeMap<VertexId, usize> = self.vertices.keys().map(|&v| (v, 0)).collect();
        for e in self.edges.values() {
            if let Some(c) = val.get_mut(&e.tail) {
                *c += 1;
            }
            if let Some(c) = val.get_mut(&e.head) {
                *c += 1;
            }
        }
        val
    }

    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges
            .values()
            .filter(|e| e.tail == v || e.head == v)
            .map(|e| e.id)
            .collect()
    }

    /// All invariant violations; an empty list means the cluster is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        for v in self.vertices.values() {
            if !v.pos.is_finite() {
                out.push(Violation::error(format!(
                    "vertex {} has non-finite position",
                    v.id
                )));
            }
            if v.pinned && (v.pos.x != 0.0 || v.pos.y != 0.0) {
                out.push(Violation::error(format!(
                    "pinned vertex {} is off the origin at ({}, {})",
                    v.id, v.pos.x, v.pos.y
                )));
            }
        }

        for r in self.regions.values() {
            if !(r.target_area > 0.0) {
                out.push(Violation::error(format!(
                    "region {} has non-positive target area {}",
                    r.id, r.target_area
                )));
            }
        }

        let mut region_used: BTreeSet<RegionId> = BTreeSet::new();
        let mut structurally_broken = false;
        for e in self.edges.values() {
            if !self.vertices.contains_key(&e.tail) || !self.vertices.contains_key(&e.head) {
                out.push(Violation::error(format!(
                    "edge {} has a dangling endpoint",
                    e.id
                )));
                structurally_broken = true;
                continue;
            }
            if e.tail == e.head {
                out.push(Violation::error(format!(
                    "edge {} is a self-loop at {}",
                    e.id, e.tail
                )));
                structurally_broken = true;
            }
            if e.left == e.right {
                out.push(Violation::error(format!(
                    "edge {} has the same region ({}) on both sides",
                    e.id, e.left
                )));
            }
            for side in [e.left, e.right] {
                if let RegionRef::Region(id) = side {
                    if !self.regions.contains_key(&id) {
                        out.push(Violation::error(format!(
                            "edge {} references unknown region {}",
                            e.id, id
                        )));
                    } else {
                        region_used.insert(id);
                    }
                }
            }
        }

        for r in self.regions.values() {
            if !region_used.contains(&r.id) {
                out.push(Violation::error(format!("region {} bounds no edges", r.id)));
            }
        }

        let eps = self.epsilon_origin();
        for (v, valence) in self.valences() {
            let at_origin = self.position(v).norm() <= eps;
            let ok = matches!(valence, 2 | 3) || (valence == 4 && at_origin);
            if !ok {
                out.push(Violation::error(format!(
                    "vertex {v} has illegal valence {valence}{}",
                    if valence == 4 {
                        " away from the origin"
                    } else {
                        ""
                    }
                )));
            }
        }

        if !structurally_broken {
            // Sector label consistency: rotating counterclockwise around a
            // vertex, the region left of one outgoing edge direction must be
            // the region right of the next.
            for &v in self.vertices.keys() {
                let incident = self.incident_edges(v);
                if incident.len() < 2 {
                    continue;
                }
                let mut dirs: Vec<(f64, RegionRef, RegionRef)> = Vec::new();
                for id in &incident {
                    let e = &self.edges[id];
                    let other = e.other_end(v);
                    let dir = self.position(other) - self.position(v);
                    let (left_away, right_away) = e.sides_from(v);
                    dirs.push((dir.angle(), left_away, right_away));
                }
                dirs.sort_by(|a, b| a.0.total_cmp(&b.0));
                for i in 0..dirs.len() {
                    let (_, left_i, _) = dirs[i];
                    let (_, _, right_next) = dirs[(i + 1) % dirs.len()];
                    if left_i != right_next {
                        out.push(Violation::error(format!(
                            "region labels mismatch around vertex {v}: {left_i} vs {right_next}"
                        )));
                        break;
                    }
                }
            }

            // Closed-boundary check per region.
            for &rid in self.regions.keys() {
                if region_used.contains(&rid) && self.region_boundary(rid).is_err() {
                    out.push(Violation::error(format!(
                        "region {rid} boundary does not close into loops"
                    )));
                }
            }
        }

        if !self.is_edge_graph_connected() {
            out.push(Violation::warning("edge graph is disconnected".to_string()));
        }

        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().iter().all(|v| v.severity != Severity::Error)
    }

    fn is_edge_graph_connected(&self) -> bool {
        let mut touched: BTreeSet<VertexId> = BTreeSet::new();
        for e in self.edges.values() {
            touched.insert(e.tail);
            touched.insert(e.head);
        }
        let Some(&start) = touched.iter().next() else {
            return true;
        };
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for e in self.edges.values() {
            adj.entry(e.tail).or_default().push(e.head);
            adj.entry(e.head).or_default().push(e.tail);
        }
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &n in adj.get(&v).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == touched.len()
    }

    /// Directed boundary edges of a region: (from, to, edge id) triples that
    /// keep the region on the left.
    fn directed_boundary(&self, rid: RegionId) -> Vec<(VertexId, VertexId, EdgeId)> {
        let rref = RegionRef::Region(rid);
        let mut out = Vec::new();
        for e in self.edges.values() {
            if e.left == rref {
                out.push((e.tail, e.head, e.id));
            }
            if e.right == rref {
                out.push((e.head, e.tail, e.id));
            }
        }
        out
    }

    /// Walks the region's directed boundary into closed loops; `None` when
    /// some directed edge cannot be continued or consumed.
    fn walk_region_loops(&self, rid: RegionId) -> Option<Vec<Vec<VertexId>>> {
        let directed = self.directed_boundary(rid);
        if directed.is_empty() {
            return None;
        }
        let mut unused: BTreeMap<(VertexId, EdgeId), VertexId> = BTreeMap::new();
        for &(from, to, eid) in &directed {
            unused.insert((from, eid), to);
        }
        let mut loops = Vec::new();
        while let Some((&(start, start_edge), _)) = unused.iter().next() {
            let mut loop_vertices = vec![start];
            let mut cur_edge = start_edge;
            let mut cur = start;
            loop {
                let to = unused.remove(&(cur, cur_edge))?;
                if to == start {
                    break;
                }
                loop_vertices.push(to);
                let (next_edge, _) = self.next_boundary_edge(&unused, to, cur)?;
                cur = to;
                cur_edge = next_edge;
                if loop_vertices.len() > self.edges.len() + 1 {
                    return None;
                }
            }
            loops.push(loop_vertices);
        }
        Some(loops)
    }

    /// Chooses the continuation edge at `v` (arrived from `prev`): among
    /// unused directed boundary edges leaving `v`, the first one rotating
    /// clockwise from the reversed incoming direction. This traverses the
    /// face boundary of the planar embedding with the region kept on the
    /// left.
    fn next_boundary_edge(
        &self,
        unused: &BTreeMap<(VertexId, EdgeId), VertexId>,
        v: VertexId,
        prev: VertexId,
    ) -> Option<(EdgeId, VertexId)> {
        let back_dir = (self.position(prev) - self.position(v)).angle();
        let mut best: Option<(f64, EdgeId, VertexId)> = None;
        for (&(from, eid), &to) in unused.range((v, EdgeId(0))..=(v, EdgeId(u64::MAX))) {
            debug_assert_eq!(from, v);
            let dir = (self.position(to) - self.position(v)).angle();
            // Clockwise offset from the reversed incoming direction, in (0, 2pi].
            let mut delta = back_dir - dir;
            while delta <= 0.0 {
                delta += std::f64::consts::TAU;
            }
            while delta > std::f64::consts::TAU {
                delta -= std::f64::consts::TAU;
            }
            if best.map_or(true, |(d, _, _)| delta < d) {
                best = Some((delta, eid, to));
            }
        }
        best.map(|(_, eid, to)| (eid, to))
    }

    /// Oriented closed vertex loops bounding a region, counterclockwise with
    /// respect to the region interior (holes come out clockwise in absolute
    /// terms, i.e. with negative signed area). The walk is cached until the
    /// next topology change; position updates keep it valid.
    pub fn region_boundary(&self, rid: RegionId) -> Result<Vec<Vec<VertexId>>, ClusterError> {
        if !self.regions.contains_key(&rid) {
            return Err(ClusterError::MissingRegion(rid));
        }
        if let Some(cached) = self.cache.borrow().loops.get(&rid) {
            return cached.clone().ok_or(ClusterError::OpenBoundary(rid));
        }
        let loops = self.walk_region_loops(rid);
        self.cache.borrow_mut().loops.insert(rid, loops.clone());
        loops.ok_or(ClusterError::OpenBoundary(rid))
    }

    /// Positions along a vertex loop.
    pub fn loop_positions(&self, loop_vertices: &[VertexId]) -> Vec<Point> {
        loop_vertices.iter().map(|&v| self.position(v)).collect()
    }

    /// Splits the edge set into maximal arcs: chains through valence-2
    /// vertices ending at junctions (valence != 2), plus closed loops.
    /// Every edge belongs to exactly one arc. Arcs are oriented so that a
    /// bounded region lies on the left whenever one side is the exterior.
    pub fn extract_arcs(&self) -> Vec<Arc> {
        let valences = self.valences();
        let is_junction = move |v: VertexId| valences.get(&v).copied().unwrap_or(0) != 2;
        let mut visited: BTreeSet<EdgeId> = BTreeSet::new();
        let mut arcs = Vec::new();

        let mut incident: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for e in self.edges.values() {
            incident.entry(e.tail).or_default().push(e.id);
            incident.entry(e.head).or_default().push(e.id);
        }
        for list in incident.values_mut() {
            list.sort();
        }

        let junctions: Vec<VertexId> = self
            .vertices
            .keys()
            .copied()
            .filter(|&v| is_junction(v) && incident.contains_key(&v))
            .collect();

        for &start in &junctions {
            for &first in &incident[&start] {
                if visited.contains(&first) {
                    continue;
                }
                arcs.push(self.walk_arc(start, first, &incident, &is_junction, &mut visited, false));
            }
        }

        // Remaining edges form closed valence-2 loops.
        let leftovers: Vec<EdgeId> = self
            .edges
            .keys()
            .copied()
            .filter(|id| !visited.contains(id))
            .collect();
        for eid in leftovers {
            if visited.contains(&eid) {
                continue;
            }
            let start = self.edges[&eid].tail;
            arcs.push(self.walk_arc(start, eid, &incident, &is_junction, &mut visited, true));
        }

        for arc in &mut arcs {
            if arc.left.is_exterior() && !arc.right.is_exterior() {
                arc.vertices.reverse();
                arc.edges.reverse();
                std::mem::swap(&mut arc.left, &mut arc.right);
            }
        }
        arcs
    }

    fn walk_arc(
        &self,
        start: VertexId,
        first_edge: EdgeId,
        incident: &BTreeMap<VertexId, Vec<EdgeId>>,
        is_junction: &dyn Fn(VertexId) -> bool,
        visited: &mut BTreeSet<EdgeId>,
        closed_loop: bool,
    ) -> Arc {
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        let e0 = &self.edges[&first_edge];
        let (left, right) = e0.sides_from(start);

        let mut cur = start;
        let mut cur_edge = first_edge;
        loop {
            visited.insert(cur_edge);
            edges.push(cur_edge);
            let e = &self.edges[&cur_edge];
            let next = e.other_end(cur);
            if closed_loop && next == start {
                break;
            }
            vertices.push(next);
            if !closed_loop && is_junction(next) {
                break;
            }
            // Valence-2 continuation: the single other incident edge.
            let Some(&next_edge) = incident[&next].iter().find(|&&id| id != cur_edge) else {
                break; // dangling end; validate reports it separately
            };
            if visited.contains(&next_edge) {
                break;
            }
            cur = next;
            cur_edge = next_edge;
        }

        Arc {
            vertices,
            edges,
            left,
            right,
            closed: closed_loop,
        }
    }

    /// The positions of an arc's vertex chain.
    pub fn arc_positions(&self, arc: &Arc) -> Vec<Point> {
        arc.vertices.iter().map(|&v| self.position(v)).collect()
    }

    /// Arc-level length (sum of its edge chord lengths, unweighted).
    pub fn arc_euclidean_length(&self, arc: &Arc) -> f64 {
        let pts = self.arc_positions(arc);
        let mut total = 0.0;
        let n = pts.len();
        let last = if arc.closed { n } else { n - 1 };
        for i in 0..last {
            total += pts[i].dist(pts[(i + 1) % n]);
        }
        total
    }
}
