//! Mesh surgery: refinement and the topology transitions (edge collapse,
//! vertex pop) the evolver applies when the combinatorial type changes.

use thiserror::Error;

use crate::cluster::{Cluster, EdgeId, RegionRef, VertexId};
use crate::energy;
use crate::geom::Point;

/// Length of the edge created by a vertex pop, relative to the mean edge
/// length: small enough not to disturb areas, large enough to avoid an
/// immediate re-collapse.
pub const POP_EDGE_REL: f64 = 1e-4;

/// Energy difference below which the two pop pairings count as tied.
pub const POP_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SurgeryError {
    #[error("unknown edge {0}")]
    MissingEdge(EdgeId),
    #[error("unknown vertex {0}")]
    MissingVertex(VertexId),
    #[error("collapsing would create a vertex of valence {merged} > 4")]
    ValenceWouldExceed { merged: usize },
    #[error("collapsing edge {0} would create a self-loop")]
    SelfLoopCreation(EdgeId),
    #[error("edge {0} is already a self-loop")]
    AlreadySelfLoop(EdgeId),
    #[error("vertex {vertex} has valence {valence}, expected 4")]
    WrongValence { vertex: VertexId, valence: usize },
    #[error("vertex {0} sits at the origin; a valence-4 vertex there is the admitted singularity and must not be popped")]
    IllegalPopAtOrigin(VertexId),
}

impl Cluster {
    /// Splits every edge longer than `max_segment_length` at its midpoint,
    /// repeatedly, until no edge exceeds the threshold. Region labels are
    /// preserved; new vertices have valence 2.
    pub fn refine(&mut self, max_segment_length: f64) {
        assert!(max_segment_length > 0.0, "refinement threshold must be > 0");
        loop {
            let long: Vec<EdgeId> = self
                .edges
                .keys()
                .copied()
                .filter(|&id| self.edge_length(id) > max_segment_length)
                .collect();
            if long.is_empty() {
                return;
            }
            for id in long {
                self.split_edge(id);
            }
        }
    }

    /// Repositions each arc's interior vertices at equal spacing along the
    /// current polyline. Junctions and pinned vertices stay put; topology is
    /// untouched. Counteracts the tangential drift that gradient descent
    /// accumulates, which otherwise degrades local curvature estimates.
    pub fn resample_arcs(&mut self) {
        self.resample_arcs_impl(None);
    }

    /// Like [`Cluster::resample_arcs`], but also adapts each arc's vertex
    /// count to the given spacing, so shrinking arcs coarsen instead of
    /// accumulating microscopically spaced vertices. Junctions keep their
    /// ids; single-edge arcs are left untouched.
    pub fn resample_arcs_to(&mut self, spacing: f64) {
        assert!(spacing > 0.0);
        self.resample_arcs_impl(Some(spacing));
    }

    fn resample_arcs_impl(&mut self, spacing: Option<f64>) {
        let arcs = self.extract_arcs();
        for arc in arcs {
            let pts = self.arc_positions(&arc);
            let closed = arc.closed;
            let old_segments = arc.edges.len();
            let mut cumulative = vec![0.0; old_segments + 1];
            for i in 0..old_segments {
                let next = pts[(i + 1) % pts.len()];
                cumulative[i + 1] = cumulative[i] + pts[i].dist(next);
            }
            let total = cumulative[old_segments];
            if total <= 0.0 {
                continue;
            }
            let new_segments = match spacing {
                None => old_segments,
                Some(h) => {
                    let wanted = (total / h).round() as usize;
                    if closed {
                        wanted.max(6)
                    } else {
                        wanted.max(1)
                    }
                }
            };
            let interior_end = arc.vertices.len() - if closed { 0 } else { 1 };
            let interior_pinned = arc.vertices[1..interior_end]
                .iter()
                .any(|v| self.vertices[v].pinned);

            let sample = |target: f64| -> Point {
                let mut seg = 0usize;
                while seg + 1 < old_segments && cumulative[seg + 1] < target {
                    seg += 1;
                }
                let span = cumulative[seg + 1] - cumulative[seg];
                let t = if span > 0.0 {
                    ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let a = pts[seg];
                let b = pts[(seg + 1) % pts.len()];
                a + (b - a) * t
            };

            if new_segments == old_segments || interior_pinned {
                // Reposition in place.
                if arc.vertices.len() < 3 {
                    continue;
                }
                let last_mobile = if closed {
                    pts.len() - 1
                } else {
                    pts.len() - 2
                };
                for j in 1..=last_mobile {
                    let vid = arc.vertices[j];
                    if self.vertices[&vid].pinned {
                        continue;
                    }
                    self.set_position(vid, sample(total * j as f64 / old_segments as f64));
                }
            } else {
                // Rebuild the arc's interior at the new segment count.
                let start = arc.vertices[0];
                let end = if closed { start } else { *arc.vertices.last().unwrap() };
                self.invalidate_topology();
                for id in &arc.edges {
                    self.edges.remove(id);
                }
                let interior = if closed {
                    &arc.vertices[1..]
                } else {
                    &arc.vertices[1..arc.vertices.len() - 1]
                };
                for v in interior {
                    self.vertices.remove(v);
                }
                let chain: Vec<Point> = (0..=new_segments)
                    .map(|j| sample(total * j as f64 / new_segments as f64))
                    .collect();
                let mut prev = start;
                for q in &chain[1..new_segments] {
                    let v = self.add_vertex(*q, false);
                    self.add_edge(prev, v, arc.left, arc.right);
                    prev = v;
                }
                self.add_edge(prev, end, arc.left, arc.right);
            }
        }
    }

    /// Averages the cluster with its mirror image across the x axis,
    /// pairing arcs by mirrored endpoints. Keeps a mirror-symmetric
    /// configuration from drifting off its unstable symmetric equilibrium
    /// (the linear chain is the case in point). Arcs without a confident
    /// mirror partner are left alone.
    pub fn symmetrize_about_x_axis(&mut self) {
        let mirror = |q: Point| Point::new(q.x, -q.y);
        let arcs = self.extract_arcs();
        let positions: Vec<Vec<Point>> = arcs.iter().map(|a| self.arc_positions(a)).collect();
        let tol = 0.1 * self.diameter();
        let mut done = vec![false; arcs.len()];
        for i in 0..arcs.len() {
            if done[i] || arcs[i].closed {
                continue;
            }
            let (a0, a1) = (positions[i][0], *positions[i].last().unwrap());
            // Best partner by mirrored-endpoint distance, same vertex count.
            let mut best: Option<(usize, bool, f64)> = None;
            for j in i..arcs.len() {
                if done[j] || arcs[j].closed || positions[j].len() != positions[i].len() {
                    continue;
                }
                let (b0, b1) = (positions[j][0], *positions[j].last().unwrap());
                let fwd = mirror(a0).dist(b0).max(mirror(a1).dist(b1));
                let rev = mirror(a0).dist(b1).max(mirror(a1).dist(b0));
                let (d, reversed) = if fwd <= rev { (fwd, false) } else { (rev, true) };
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((j, reversed, d));
                }
            }
            let Some((j, reversed, d)) = best else { continue };
            if d > tol {
                continue;
            }
            done[i] = true;
            done[j] = true;
            let m = positions[i].len();
            for k in 0..m {
                let k_partner = if reversed { m - 1 - k } else { k };
                let p = positions[i][k];
                let q = positions[j][k_partner];
                let averaged = (p + mirror(q)) * 0.5;
                let vi = arcs[i].vertices[k];
                let vj = arcs[j].vertices[k_partner];
                if !self.vertices[&vi].pinned {
                    self.set_position(vi, averaged);
                }
                if !self.vertices[&vj].pinned {
                    self.set_position(vj, mirror(averaged));
                }
            }
        }
    }

    /// Splits one edge at its midpoint; returns the new valence-2 vertex.
    pub fn split_edge(&mut self, id: EdgeId) -> VertexId {
        self.invalidate_topology();
        let edge = self.edges.remove(&id).expect("split of unknown edge");
        let mid = (self.position(edge.tail) + self.position(edge.head)) * 0.5;
        let v = self.add_vertex(mid, false);
        self.add_edge(edge.tail, v, edge.left, edge.right);
        self.add_edge(v, edge.head, edge.left, edge.right);
        v
    }

    /// Collapses an edge, merging its endpoints into one vertex at their
    /// midpoint (at the origin exactly, and pinned, if either endpoint was
    /// pinned). Fails if the merged vertex would exceed valence 4 or if a
    /// parallel edge would become a self-loop.
    pub fn collapse_edge(&mut self, id: EdgeId) -> Result<VertexId, SurgeryError> {
        let edge = *self.edges.get(&id).ok_or(SurgeryError::MissingEdge(id))?;
        let (u, v) = (edge.tail, edge.head);
        if u == v {
            return Err(SurgeryError::AlreadySelfLoop(id));
        }
        let valences = self.valences();
        let merged = valences[&u] + valences[&v] - 2;
        if merged > 4 {
            return Err(SurgeryError::ValenceWouldExceed { merged });
        }
        if self
            .edges
            .values()
            .any(|e| e.id != id && ((e.tail == u && e.head == v) || (e.tail == v && e.head == u)))
        {
            return Err(SurgeryError::SelfLoopCreation(id));
        }

        let keep = u.min(v);
        let drop = u.max(v);
        let vu = self.vertices[&u];
        let vv = self.vertices[&v];
        let pinned = vu.pinned || vv.pinned;
        let pos = if pinned {
            Point::ORIGIN
        } else {
            (vu.pos + vv.pos) * 0.5
        };

        self.invalidate_topology();
        self.edges.remove(&id);
        for e in self.edges.values_mut() {
            if e.tail == drop {
                e.tail = keep;
            }
            if e.head == drop {
                e.head = keep;
            }
        }
        self.vertices.remove(&drop);
        let kept = self.vertices.get_mut(&keep).unwrap();
        kept.pos = pos;
        kept.pinned = pinned;
        Ok(keep)
    }

    /// Splits a valence-4 vertex (away from the origin) into two valence-3
    /// vertices joined by a short edge. Of the two planar pairings of the
    /// four incident edges, the one with lower weighted perimeter after one
    /// constraint-projection step wins; ties go to the pairing that groups
    /// the lowest incident edge id with its counterclockwise neighbour.
    pub fn pop_vertex(&mut self, v: VertexId) -> Result<(VertexId, VertexId, EdgeId), SurgeryError> {
        if !self.vertices.contains_key(&v) {
            return Err(SurgeryError::MissingVertex(v));
        }
        let incident = self.incident_edges(v);
        if incident.len() != 4 {
            return Err(SurgeryError::WrongValence {
                vertex: v,
                valence: incident.len(),
            });
        }
        if self.position(v).norm() <= self.epsilon_origin() {
            return Err(SurgeryError::IllegalPopAtOrigin(v));
        }

        // Incident edges in counterclockwise angular order, rotated to start
        // at the lowest edge id.
        let mut fan: Vec<(f64, EdgeId)> = incident
            .iter()
            .map(|&id| {
                let e = &self.edges[&id];
                let dir = self.position(e.other_end(v)) - self.position(v);
                (dir.angle(), id)
            })
            .collect();
        fan.sort_by(|a, b| a.0.total_cmp(&b.0));
        let min_id = *incident.iter().min().unwrap();
        let start = fan.iter().position(|&(_, id)| id == min_id).unwrap();
        fan.rotate_left(start);
        let ordered: Vec<EdgeId> = fan.iter().map(|&(_, id)| id).collect();

        // Pairing A groups (f0, f1) and (f2, f3); pairing B groups (f1, f2)
        // and (f3, f0).
        let pairing_a = [[ordered[0], ordered[1]], [ordered[2], ordered[3]]];
        let pairing_b = [[ordered[1], ordered[2]], [ordered[3], ordered[0]]];

        let candidate_a = self.popped_candidate(v, &pairing_a);
        let candidate_b = self.popped_candidate(v, &pairing_b);
        let energy_a = pop_energy(&candidate_a.0);
        let energy_b = pop_energy(&candidate_b.0);

        let use_a = match (energy_a, energy_b) {
            (Some(ea), Some(eb)) if (ea - eb).abs() >= POP_TIE_TOL => ea < eb,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            _ => true, // tie or both failed: deterministic lowest-id pairing
        };
        let (chosen, ids) = if use_a { candidate_a } else { candidate_b };
        *self = chosen;
        Ok(ids)
    }

    /// Builds the cluster that results from popping `v` with the given
    /// pairing (two groups of two incident edges each).
    fn popped_candidate(
        &self,
        v: VertexId,
        pairing: &[[EdgeId; 2]; 2],
    ) -> (Cluster, (VertexId, VertexId, EdgeId)) {
        let mut out = self.clone();
        let pos = self.position(v);
        let delta = POP_EDGE_REL * self.mean_edge_length();

        let group_dir = |group: &[EdgeId; 2]| -> Point {
            let mut sum = Point::ORIGIN;
            for &id in group {
                let e = &self.edges[&id];
                sum = sum + (self.position(e.other_end(v)) - pos).normalized();
            }
            if sum.norm() < 1e-12 {
                // Opposite pair: displace perpendicular to the first edge.
                let e = &self.edges[&group[0]];
                (self.position(e.other_end(v)) - pos).perp().normalized()
            } else {
                sum.normalized()
            }
        };
        let dir1 = group_dir(&pairing[0]);
        let dir2 = group_dir(&pairing[1]);

        out.invalidate_topology();
        let v1 = out.add_vertex(pos + dir1 * (0.5 * delta), false);
        let v2 = out.add_vertex(pos + dir2 * (0.5 * delta), false);
        for (&group, target) in pairing.iter().zip([v1, v2]) {
            for id in group {
                let e = out.edges.get_mut(&id).unwrap();
                if e.tail == v {
                    e.tail = target;
                } else {
                    e.head = target;
                }
            }
        }
        out.vertices.remove(&v);

        // The new edge separates the two sectors that the pairing did not
        // group together: the sector between pairing[0][1] and pairing[1][0]
        // and the sector between pairing[1][1] and pairing[0][0].
        let sector_after = |id: EdgeId| -> RegionRef {
            let e = &self.edges[&id];
            let (left_away, _) = e.sides_from(v);
            left_away
        };
        let sector_12 = sector_after(pairing[0][1]);
        let sector_30 = sector_after(pairing[1][1]);
        let edge_dir = out.position(v2) - out.position(v1);
        // Representative direction of the sector between pairing[0][1] and
        // pairing[1][0]: the bisector of its two boundary rays.
        let ray = |id: EdgeId| -> Point {
            let e = &self.edges[&id];
            (self.position(e.other_end(v)) - pos).normalized()
        };
        let mut mid_dir = ray(pairing[0][1]) + ray(pairing[1][0]);
        if mid_dir.norm() < 1e-12 {
            mid_dir = ray(pairing[0][1]).perp();
        }
        let (left, right) = if edge_dir.cross(mid_dir) > 0.0 {
            (sector_12, sector_30)
        } else {
            (sector_30, sector_12)
        };
        let new_edge = out.add_edge(v1, v2, left, right);
        (out, (v1, v2, new_edge))
    }
}

/// Weighted perimeter after one constraint-projection Newton step; `None`
/// when evaluation fails on the candidate.
fn pop_energy(cluster: &Cluster) -> Option<f64> {
    let mut c = cluster.clone();
    // A single Newton step; ignore non-convergence and use the moved state.
    match energy::project_to_constraints(&mut c, 1) {
        Ok(_) => {}
        Err(energy::EnergyError::NoConvergence { .. }) => {}
        Err(_) => return None,
    }
    energy::measure_perimeter(&c).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{Cluster, RegionId, Severity};
    use crate::energy;
    use crate::geom::DensityField;
    use crate::seeds::{quadruple_seed, standard_double_bubble, DoubleBubbleSpec, Placement};

    fn p2() -> DensityField {
        DensityField::new(2.0).unwrap()
    }

    /// A single straight edge inside a triangle region, for split counting.
    fn one_long_edge() -> (Cluster, EdgeId) {
        let mut c = Cluster::new(DensityField::euclidean());
        c.add_region(RegionId(0), "a", 0.5);
        let r = RegionRef::Region(RegionId(0));
        let a = c.add_vertex(Point::new(0.0, 0.0), false);
        let b = c.add_vertex(Point::new(1.0, 0.0), false);
        let top = c.add_vertex(Point::new(0.5, 0.9), false);
        let long = c.add_edge(a, b, r, RegionRef::Exterior);
        c.add_edge(b, top, r, RegionRef::Exterior);
        c.add_edge(top, a, r, RegionRef::Exterior);
        (c, long)
    }

    #[test]
    fn refine_splits_until_short() {
        let (mut c, _) = one_long_edge();
        let vertices_before = c.vertex_count();
        c.refine(2.0); // nothing to do
        assert_eq!(c.vertex_count(), vertices_before);

        // The unit edge splits into 4 pieces (3 new vertices); the other
        // sides split too, so count only the bottom chain's edges.
        let (mut c, _) = one_long_edge();
        c.refine(0.25);
        let bottom: Vec<_> = c
            .edges()
            .filter(|e| c.position(e.tail).y == 0.0 && c.position(e.head).y == 0.0)
            .collect();
        assert_eq!(bottom.len(), 4);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn refine_preserves_weighted_areas() {
        let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
        let before = energy::measure_areas(&c).unwrap();
        c.refine(0.02);
        let after = energy::measure_areas(&c).unwrap();
        for (rid, b) in &before {
            let a = after[rid];
            assert!(
                ((a - b) / b).abs() < 1e-12,
                "region {rid}: {b} -> {a}"
            );
        }
        assert!(c.validate().is_empty());
    }

    #[test]
    fn collapse_central_edge_makes_valence_four_at_origin() {
        let mut c = quadruple_seed([3.0; 4], p2(), 16);
        let central = crate::analyze::central_arcs(&c);
        assert_eq!(central.len(), 1);
        // Collapse the whole central chain down to the pinned endpoint.
        for _ in 0..central[0].edges.len() {
            let arc = &crate::analyze::central_arcs(&c)[0];
            let edge = arc.edges[0];
            c.collapse_edge(edge).unwrap();
        }
        let eps = c.epsilon_origin();
        let v4: Vec<_> = c
            .valences()
            .into_iter()
            .filter(|(_, val)| *val == 4)
            .collect();
        assert_eq!(v4.len(), 1);
        assert!(c.position(v4[0].0).norm() <= eps);
        assert!(c.validate().iter().all(|v| v.severity != Severity::Error));
    }

    #[test]
    fn collapse_interior_edge_is_plain_coarsening() {
        let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
        let valences = c.valences();
        let edge = c
            .edges()
            .find(|e| valences[&e.tail] == 2 && valences[&e.head] == 2)
            .unwrap()
            .id;
        let merged = c.collapse_edge(edge).unwrap();
        assert_eq!(c.valences()[&merged], 2);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn collapse_rejects_excess_valence() {
        let mut c = quadruple_seed([3.0; 4], p2(), 16);
        loop {
            let arc = crate::analyze::central_arcs(&c);
            if arc.is_empty() {
                break;
            }
            c.collapse_edge(arc[0].edges[0]).unwrap();
        }
        // Now one endpoint is valence 4; collapsing any incident edge whose
        // other endpoint is a junction would reach valence 5.
        let valences = c.valences();
        let (&v4, _) = valences.iter().find(|(_, val)| **val == 4).unwrap();
        let bad = c
            .incident_edges(v4)
            .into_iter()
            .find(|id| {
                let e = c.edge(*id).unwrap();
                valences[&e.other_end(v4)] >= 3
            });
        if let Some(bad) = bad {
            assert!(matches!(
                c.collapse_edge(bad),
                Err(SurgeryError::ValenceWouldExceed { merged: 5 })
            ));
        }
    }

    #[test]
    fn collapse_rejects_parallel_edge_self_loop() {
        // A lens: two vertices joined by two distinct edges.
        let mut c = Cluster::new(DensityField::euclidean());
        c.add_region(RegionId(0), "a", 1.0);
        let r = RegionRef::Region(RegionId(0));
        let a = c.add_vertex(Point::new(0.0, 0.0), false);
        let b = c.add_vertex(Point::new(1.0, 0.0), false);
        let top = c.add_edge(a, b, RegionRef::Exterior, r);
        let _bottom = c.add_edge(a, b, r, RegionRef::Exterior);
        assert!(matches!(
            c.collapse_edge(top),
            Err(SurgeryError::SelfLoopCreation(_))
        ));
    }

    #[test]
    fn pop_restores_valence_three() {
        let mut c = crate::cluster::tests::quadrant_cross(Point::new(1.0, 1.0));
        let (&v4, _) = c.valences().iter().find(|(_, val)| **val == 4).unwrap().clone();
        let before_perimeter = energy::measure_perimeter(&c).unwrap();
        let (v1, v2, new_edge) = c.pop_vertex(v4).unwrap();
        let valences = c.valences();
        assert_eq!(valences[&v1], 3);
        assert_eq!(valences[&v2], 3);
        assert!(c.edge(new_edge).is_some());
        assert!(c.validate().iter().all(|v| v.severity != Severity::Error));
        // The pop edge is tiny, so the perimeter barely moves.
        let after = energy::measure_perimeter(&c).unwrap();
        assert!((after - before_perimeter).abs() / before_perimeter < 1e-3);
    }

    #[test]
    fn pop_rejects_wrong_valence_and_origin() {
        let mut c = crate::cluster::tests::quadrant_cross(Point::new(1.0, 1.0));
        let valences = c.valences();
        let (&v2, _) = valences.iter().find(|(_, val)| **val == 2).unwrap();
        assert!(matches!(
            c.pop_vertex(v2),
            Err(SurgeryError::WrongValence { valence: 2, .. })
        ));

        let mut at_origin = crate::cluster::tests::quadrant_cross(Point::ORIGIN);
        let (&v4, _) = at_origin.valences().iter().find(|(_, val)| **val == 4).unwrap().clone();
        assert!(matches!(
            at_origin.pop_vertex(v4),
            Err(SurgeryError::IllegalPopAtOrigin(_))
        ));
    }

    #[test]
    fn resample_equalizes_spacing() {
        let mut c = standard_double_bubble(&DoubleBubbleSpec::new(2.0, 1.0), Placement::VertexAtOrigin, p2());
        // Perturb spacing tangentially, then resample.
        let arcs = c.extract_arcs();
        let arc = &arcs[0];
        let a = c.position(arc.vertices[1]);
        let b = c.position(arc.vertices[2]);
        c.set_position(arc.vertices[1], a + (b - a) * 0.4);
        c.resample_arcs();
        for arc in c.extract_arcs() {
            let pts = c.arc_positions(&arc);
            let gaps: Vec<f64> = pts.windows(2).map(|w| w[0].dist(w[1])).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            for g in gaps {
                assert!((g - mean).abs() / mean < 0.05);
            }
        }
        assert!(c.validate().is_empty());
    }

    #[test]
    fn resample_to_adapts_counts() {
        let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
        let before = c.edge_count();
        c.resample_arcs_to(0.05);
        assert!(c.edge_count() > before);
        assert!(c.validate().is_empty());
        c.resample_arcs_to(0.3);
        assert!(c.edge_count() < before * 2);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn symmetrize_restores_mirror_symmetry() {
        let mut c = crate::seeds::chain_seed(&[1.0, 1.0], DensityField::euclidean(), 16);
        // Nudge one vertex off the mirror line.
        let victim = c.vertices().find(|v| v.pos.y > 0.3).unwrap().id;
        let pos = c.position(victim);
        c.set_position(victim, pos + Point::new(0.0, 0.05));
        c.symmetrize_about_x_axis();
        // Every vertex has a mirror partner again.
        let positions: Vec<Point> = c.vertices().map(|v| v.pos).collect();
        for p in &positions {
            let mirrored = Point::new(p.x, -p.y);
            let best = positions
                .iter()
                .map(|q| q.dist(mirrored))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "no mirror partner for {p:?}");
        }
    }
}
