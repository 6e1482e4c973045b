//! Whole-cluster functionals: weighted perimeter, per-region weighted areas,
//! their gradients with respect to vertex positions, and projection onto the
//! area-constraint manifold.
//!
//! The perimeter counts every edge once (the cluster perimeter is the
//! measure of the union of the region boundaries). Constraints are enforced
//! on all regions; the exterior is unconstrained.
//!
//! The hot path works on a flat-index view of the cluster (see
//! [`Workspace`]); the map-based [`EnergyState`] is assembled from it at the
//! public boundary.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::cluster::{Cluster, ClusterError, EdgeId, RegionId, VertexId};
use crate::geom::Point;
use crate::measure::{
    loop_weighted_area, weighted_area_contribution, weighted_area_contribution_with_grad,
    weighted_segment_length, weighted_segment_length_with_grad,
};
use crate::quadrature::QuadratureRule;

/// Relative area tolerance enforced by [`project_to_constraints`].
pub const AREA_TOL_REL: f64 = 1e-9;

/// Condition-number threshold above which a Gram system counts as singular.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

const MAX_STEP_HALVINGS: usize = 8;

pub(crate) fn default_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(QuadratureRule::default_rule)
}

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("degenerate edge {edge}: endpoints coincide")]
    DegenerateEdge { edge: EdgeId },
    #[error("boundary extraction failed: {0}")]
    Boundary(#[from] ClusterError),
    #[error("singular constraint Gram matrix (condition estimate {condition:.3e})")]
    SingularGram { condition: f64 },
    #[error("constraint projection did not converge after {iterations} iterations (max relative residual {max_rel_residual:.3e})")]
    NoConvergence {
        iterations: usize,
        max_rel_residual: f64,
    },
}

/// Functional values and first derivatives of a cluster state.
///
/// Pinned vertices carry zero rows in both gradient structures.
#[derive(Debug, Clone)]
pub struct EnergyState {
    pub perimeter: f64,
    pub areas: BTreeMap<RegionId, f64>,
    pub perimeter_gradient: BTreeMap<VertexId, Point>,
    pub area_jacobian: BTreeMap<RegionId, BTreeMap<VertexId, Point>>,
}

/// Reusable flat-index buffers for the evaluation hot path.
#[derive(Debug, Default)]
pub struct Workspace {
    pub(crate) positions: Vec<Point>,
    pub(crate) perimeter: f64,
    pub(crate) areas: Vec<f64>,
    pub(crate) grad_p: Vec<Point>,
    /// Dense area-gradient rows, one per region.
    pub(crate) jac: Vec<Vec<Point>>,
    /// Lumped weighted vertex measure (half the weighted length of the
    /// incident edges).
    pub(crate) mass: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Workspace {
        Workspace::default()
    }
}

/// Fills the workspace with perimeter, areas, gradients, Jacobian rows, and
/// vertex masses for the current positions.
pub(crate) fn dense_evaluate(cluster: &Cluster, ws: &mut Workspace) -> Result<(), EnergyError> {
    let quad = default_rule();
    let density = cluster.density();
    let dense = cluster.dense_topology()?;
    let n = dense.order.len();

    ws.positions.clear();
    ws.positions
        .extend(dense.order.iter().map(|v| cluster.position(*v)));
    ws.grad_p.clear();
    ws.grad_p.resize(n, Point::ORIGIN);
    ws.mass.clear();
    ws.mass.resize(n, 0.0);
    ws.jac.resize(dense.region_ids.len(), Vec::new());
    ws.areas.clear();
    ws.areas.resize(dense.region_ids.len(), 0.0);

    let mut perimeter = 0.0;
    for &(t, h, id) in &dense.edges {
        let a = ws.positions[t as usize];
        let b = ws.positions[h as usize];
        let (w, ga, gb) = weighted_segment_length_with_grad(a, b, &density, quad)
            .map_err(|_| EnergyError::DegenerateEdge { edge: id })?;
        perimeter += w;
        ws.mass[t as usize] += 0.5 * w;
        ws.mass[h as usize] += 0.5 * w;
        ws.grad_p[t as usize] = ws.grad_p[t as usize] + ga;
        ws.grad_p[h as usize] = ws.grad_p[h as usize] + gb;
    }
    ws.perimeter = perimeter;

    for (r, region_loops) in dense.loops.iter().enumerate() {
        let row = &mut ws.jac[r];
        row.clear();
        row.resize(n, Point::ORIGIN);
        let mut area = 0.0;
        for lp in region_loops {
            let m = lp.len();
            for i in 0..m {
                let j = (i + 1) % m;
                let ia = lp[i] as usize;
                let ib = lp[j] as usize;
                let (v, ga, gb) = weighted_area_contribution_with_grad(
                    ws.positions[ia],
                    ws.positions[ib],
                    &density,
                    quad,
                );
                area += v;
                row[ia] = row[ia] + ga;
                row[ib] = row[ib] + gb;
            }
        }
        ws.areas[r] = area;
    }

    // Pinned vertices never move: zero their rows.
    for (i, &pinned) in dense.pinned.iter().enumerate() {
        if pinned {
            ws.grad_p[i] = Point::ORIGIN;
            for row in &mut ws.jac {
                row[i] = Point::ORIGIN;
            }
        }
    }
    Ok(())
}

/// Areas only, into `ws.areas` (cheap evaluation for line searches and
/// projection damping).
pub(crate) fn dense_areas(cluster: &Cluster, ws: &mut Workspace) -> Result<(), EnergyError> {
    let quad = default_rule();
    let density = cluster.density();
    let dense = cluster.dense_topology()?;
    ws.positions.clear();
    ws.positions
        .extend(dense.order.iter().map(|v| cluster.position(*v)));
    ws.areas.clear();
    ws.areas.resize(dense.region_ids.len(), 0.0);
    for (r, region_loops) in dense.loops.iter().enumerate() {
        let mut area = 0.0;
        for lp in region_loops {
            let pts: Vec<Point> = lp.iter().map(|&i| ws.positions[i as usize]).collect();
            area += loop_weighted_area(&pts, &density, quad);
        }
        ws.areas[r] = area;
    }
    Ok(())
}

/// Per-region weighted areas only (no derivatives).
pub fn measure_areas(cluster: &Cluster) -> Result<BTreeMap<RegionId, f64>, EnergyError> {
    let mut ws = Workspace::new();
    dense_areas(cluster, &mut ws)?;
    let dense = cluster.dense_topology()?;
    Ok(dense
        .region_ids
        .iter()
        .zip(ws.areas.iter())
        .map(|(rid, a)| (*rid, *a))
        .collect())
}

/// Total weighted perimeter only.
pub fn measure_perimeter(cluster: &Cluster) -> Result<f64, EnergyError> {
    let quad = default_rule();
    let density = cluster.density();
    let mut total = 0.0;
    for edge in cluster.edges() {
        total += weighted_segment_length(
            cluster.position(edge.tail),
            cluster.position(edge.head),
            &density,
            quad,
        )
        .map_err(|_| EnergyError::DegenerateEdge { edge: edge.id })?;
    }
    Ok(total)
}

/// Signed weighted area of one region from its boundary loops.
pub fn region_weighted_area(cluster: &Cluster, rid: RegionId) -> Result<f64, EnergyError> {
    let quad = default_rule();
    let density = cluster.density();
    let mut total = 0.0;
    for lp in cluster.region_boundary(rid)? {
        let pts = cluster.loop_positions(&lp);
        total += loop_weighted_area(&pts, &density, quad);
    }
    Ok(total)
}

/// Sums [`weighted_area_contribution`] along a vertex loop (the boundary
/// integral a region's area is assembled from).
pub fn loop_area_from_contributions(cluster: &Cluster, lp: &[VertexId]) -> f64 {
    let quad = default_rule();
    let density = cluster.density();
    let m = lp.len();
    let mut total = 0.0;
    for i in 0..m {
        total += weighted_area_contribution(
            cluster.position(lp[i]),
            cluster.position(lp[(i + 1) % m]),
            &density,
            quad,
        );
    }
    total
}

/// Evaluates perimeter, areas, and both derivative structures.
pub fn evaluate(cluster: &Cluster) -> Result<EnergyState, EnergyError> {
    let mut ws = Workspace::new();
    dense_evaluate(cluster, &mut ws)?;
    let dense = cluster.dense_topology()?;
    let perimeter_gradient: BTreeMap<VertexId, Point> = dense
        .order
        .iter()
        .zip(ws.grad_p.iter())
        .map(|(v, g)| (*v, *g))
        .collect();
    let mut area_jacobian = BTreeMap::new();
    let mut areas = BTreeMap::new();
    for (r, rid) in dense.region_ids.iter().enumerate() {
        areas.insert(*rid, ws.areas[r]);
        let row: BTreeMap<VertexId, Point> = dense
            .order
            .iter()
            .zip(ws.jac[r].iter())
            .filter(|(_, g)| g.x != 0.0 || g.y != 0.0)
            .map(|(v, g)| (*v, *g))
            .collect();
        area_jacobian.insert(*rid, row);
    }
    Ok(EnergyState {
        perimeter: ws.perimeter,
        areas,
        perimeter_gradient,
        area_jacobian,
    })
}

/// Descent direction tangent to the area constraints.
#[derive(Debug, Clone)]
pub struct ProjectedGradient {
    /// -(grad P - sum_i lambda_i grad A_i) per unpinned vertex.
    pub direction: BTreeMap<VertexId, Point>,
    /// Root-mean-square of the direction over unpinned vertices; vanishes at
    /// a discrete constrained equilibrium.
    pub residual_norm: f64,
    /// The Lagrange multipliers, one per region.
    pub multipliers: BTreeMap<RegionId, f64>,
    pub energy: EnergyState,
}

/// Outcome of a successful projection.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionReport {
    pub iterations: usize,
    pub max_rel_residual: f64,
    /// Euclidean norm of the total vertex correction applied.
    pub correction_norm: f64,
}

pub(crate) fn dot_rows(a: &BTreeMap<VertexId, Point>, b: &BTreeMap<VertexId, Point>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(v, ga)| large.get(v).map(|gb| ga.dot(*gb)))
        .sum()
}

/// Solves the Gram system G x = rhs with G_ij = <grad A_i, grad A_j>.
pub(crate) fn solve_gram(
    jacobian: &BTreeMap<RegionId, BTreeMap<VertexId, Point>>,
    rhs: &[f64],
) -> Result<Vec<f64>, EnergyError> {
    let rows: Vec<&BTreeMap<VertexId, Point>> = jacobian.values().collect();
    let n = rows.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = dot_rows(rows[i], rows[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    solve_gram_matrix(&g, rhs)
}

pub(crate) fn solve_gram_matrix(g: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>, EnergyError> {
    match crate::linsolve::solve_small(g, rhs) {
        Some((x, cond)) if cond <= GRAM_CONDITION_LIMIT => Ok(x),
        Some((_, cond)) => Err(EnergyError::SingularGram { condition: cond }),
        None => Err(EnergyError::SingularGram {
            condition: f64::INFINITY,
        }),
    }
}

fn dense_max_rel_residual(ws: &Workspace, targets: &[f64]) -> f64 {
    ws.areas
        .iter()
        .zip(targets)
        .map(|(a, t)| (a - t).abs() / t)
        .fold(0.0_f64, f64::max)
}

fn region_targets(cluster: &Cluster) -> Result<Vec<f64>, EnergyError> {
    let dense = cluster.dense_topology()?;
    Ok(dense
        .region_ids
        .iter()
        .map(|rid| cluster.region(*rid).unwrap().target_area)
        .collect())
}

/// Newton iterations moving vertices along the span of the area-gradient
/// rows until every region's weighted area matches its target within
/// [`AREA_TOL_REL`] relative. Pinned vertices stay put. Steps that increase
/// the residual are halved, up to eight times.
pub fn project_to_constraints(
    cluster: &mut Cluster,
    max_iters: usize,
) -> Result<ProjectionReport, EnergyError> {
    let mut ws = Workspace::new();
    let targets = region_targets(cluster)?;
    let dense = cluster.dense_topology()?;

    dense_areas(cluster, &mut ws)?;
    let mut residual = dense_max_rel_residual(&ws, &targets);
    let mut correction_norm_sq = 0.0;
    if residual <= AREA_TOL_REL {
        return Ok(ProjectionReport {
            iterations: 0,
            max_rel_residual: residual,
            correction_norm: 0.0,
        });
    }
    for iter in 1..=max_iters {
        dense_evaluate(cluster, &mut ws)?;
        let m = targets.len();
        let gaps: Vec<f64> = targets.iter().zip(&ws.areas).map(|(t, a)| t - a).collect();
        let mut gram = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let v: f64 = ws.jac[i]
                    .iter()
                    .zip(&ws.jac[j])
                    .map(|(a, b)| a.dot(*b))
                    .sum();
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        let lambda = solve_gram_matrix(&gram, &gaps)?;

        let n = dense.order.len();
        let mut delta = vec![Point::ORIGIN; n];
        for (i, row) in ws.jac.iter().enumerate() {
            for (d, g) in delta.iter_mut().zip(row) {
                *d = *d + *g * lambda[i];
            }
        }
        let before = ws.positions.clone();

        let mut step = 1.0;
        let mut applied_sq = 0.0;
        for halving in 0..=MAX_STEP_HALVINGS {
            for (k, &v) in dense.order.iter().enumerate() {
                if delta[k].x != 0.0 || delta[k].y != 0.0 {
                    cluster.set_position(v, before[k] + delta[k] * step);
                }
            }
            dense_areas(cluster, &mut ws)?;
            let new_residual = dense_max_rel_residual(&ws, &targets);
            if new_residual < residual || halving == MAX_STEP_HALVINGS {
                residual = new_residual;
                applied_sq = delta.iter().map(|d| (*d * step).norm_sq()).sum::<f64>();
                break;
            }
            step *= 0.5;
        }
        correction_norm_sq += applied_sq;

        if residual <= AREA_TOL_REL {
            return Ok(ProjectionReport {
                iterations: iter,
                max_rel_residual: residual,
                correction_norm: correction_norm_sq.sqrt(),
            });
        }
    }
    Err(EnergyError::NoConvergence {
        iterations: max_iters,
        max_rel_residual: residual,
    })
}

/// The constrained steepest-descent direction -(grad P - sum lambda_i grad A_i),
/// with multipliers chosen so the direction is tangent to every area
/// constraint; its RMS over unpinned vertices is the equilibrium residual.
pub fn projected_gradient(cluster: &Cluster) -> Result<ProjectedGradient, EnergyError> {
    let energy = evaluate(cluster)?;
    let rhs: Vec<f64> = energy
        .area_jacobian
        .values()
        .map(|row| dot_rows(row, &energy.perimeter_gradient))
        .collect();
    let lambda = solve_gram(&energy.area_jacobian, &rhs)?;
    let multipliers: BTreeMap<RegionId, f64> = energy
        .area_jacobian
        .keys()
        .zip(lambda.iter())
        .map(|(rid, l)| (*rid, *l))
        .collect();

    let mut direction: BTreeMap<VertexId, Point> = BTreeMap::new();
    let mut norm_sq = 0.0;
    let mut unpinned = 0usize;
    for v in cluster.vertices() {
        if v.pinned {
            direction.insert(v.id, Point::ORIGIN);
            continue;
        }
        let mut d = -energy.perimeter_gradient[&v.id];
        for (rid, row) in &energy.area_jacobian {
            if let Some(&g) = row.get(&v.id) {
                d = d + g * multipliers[rid];
            }
        }
        norm_sq += d.norm_sq();
        unpinned += 1;
        direction.insert(v.id, d);
    }
    let residual_norm = if unpinned == 0 {
        0.0
    } else {
        (norm_sq / unpinned as f64).sqrt()
    };
    Ok(ProjectedGradient {
        direction,
        residual_norm,
        multipliers,
        energy,
    })
}
