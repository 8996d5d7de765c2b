//! Deformation-space analysis of labeled truncation polytopes: existence of
//! projective or hyperbolic realizations, cell dimension, coordinates, and
//! the number of connected components via balanced sign functions on the
//! orange forest.

use crate::cartan::{coherent_k23_circuits, relevant_circuits, Circuit};
use crate::classify;
use crate::diagram::{CoxeterMatrix, Shape};
use crate::polytope::{
    link_class, BlockTree, CircuitClass, CircuitKind, LinkClass, VertexState,
};
use crate::tables;
use crate::Tolerance;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error("dimension {0} is below 4; the deformation theory here needs d >= 4")]
    DimensionTooSmall(usize),
    #[error("the polytope group is not irreducible")]
    NotIrreducible,
    #[error("the polytope group is not large")]
    NotLarge,
    #[error("the polytope is not 2-perfect")]
    NotTwoPerfect,
    #[error("the polytope is not convex-projectivizable: {0}")]
    NotConvexProjectivizable(String),
    #[error("dimension identity failed: e_+ - d = {lhs} but the coordinate count is {rhs}")]
    DimensionMismatch { lhs: i64, rhs: i64 },
    #[error("enumeration supports dimensions 6..9; d = {0} has infinitely many polytopes, use per-instance analysis")]
    EnumerationRange(usize),
    #[error("forest node of valence {0} > 3")]
    BadValence(usize),
}

// ---------------------------------------------------------------------------
// Geometrization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometrizeReport {
    pub convex_projectivizable: bool,
    pub hyperbolizable: bool,
    /// Circuits whose group W_delta is neither Lannér nor the affine cycle
    /// (these obstruct any realization), with their link class.
    pub offending: Vec<(CircuitKind, LinkClass)>,
}

/// Validates the preconditions (irreducible, large, 2-perfect, d >= 4) and
/// applies the circuit criterion: hyperbolizable iff every W_delta is Lannér,
/// convex-projectivizable iff every W_delta is Lannér or the affine cycle.
pub fn geometrize(t: &BlockTree, tol: Tolerance) -> Result<GeometrizeReport, DeformError> {
    if t.dim() < 4 {
        return Err(DeformError::DimensionTooSmall(t.dim()));
    }
    let group = t.coxeter_group();
    if !group.matrix.is_connected() {
        return Err(DeformError::NotIrreducible);
    }
    if !classify::is_irreducible_large(&group.matrix, tol) {
        return Err(DeformError::NotLarge);
    }
    if !t.perfection(tol).two_perfect {
        return Err(DeformError::NotTwoPerfect);
    }
    let mut cp = true;
    let mut hyp = true;
    let mut offending = Vec::new();
    for c in t.prismatic_circuits() {
        let class = link_class(&c.link, tol);
        match class {
            LinkClass::Lanner => {}
            LinkClass::AffineCycle => {
                hyp = false;
            }
            other => {
                cp = false;
                hyp = false;
                offending.push((c.kind.clone(), other));
            }
        }
    }
    Ok(GeometrizeReport {
        convex_projectivizable: cp,
        hyperbolizable: hyp,
        offending,
    })
}

// ---------------------------------------------------------------------------
// Coordinate counts and the evaluation space X(G)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    /// Flexible Lannér prismatic circuit: coordinate in R.
    FlexibleLannerCircuit,
    /// Affine-cycle prismatic circuit: coordinate in R* (never zero).
    AffineCircuit,
    /// Flexible intact vertex: coordinate in R.
    FlexibleVertex,
    /// Block of cycle type: its own circuit, coordinate in R.
    CycleBlock,
}

/// One coordinate axis of X(G): a normalized cyclic product measured on an
/// oriented cycle inside one block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub name: String,
    /// Block carrying the measuring circuit.
    pub block: usize,
    /// Oriented circuit in block-node indices.
    pub circuit: Circuit,
    pub punctured: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordinateSystem {
    pub axes: Vec<Axis>,
    /// Per K_{2,3} block, the triple of axis indices whose coherently
    /// oriented values must sum to zero.
    pub constraints: Vec<[usize; 3]>,
    /// Number of unconstrained bending coordinates (one per essential circuit).
    pub bending: usize,
}

impl CoordinateSystem {
    /// Dimension of X(G) plus the bending fiber.
    pub fn dimension(&self) -> i64 {
        self.axes.len() as i64 - self.constraints.len() as i64 + self.bending as i64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub k_l: usize,
    pub k_a: usize,
    pub k_v: usize,
    pub k_c: usize,
    pub k_k: usize,
    pub k_e: usize,
}

fn circuit_color(link: &CoxeterMatrix, tol: Tolerance) -> Option<EdgeColor> {
    match link_class(link, tol) {
        LinkClass::AffineCycle => Some(EdgeColor::Orange),
        LinkClass::Lanner if link.shape() == Shape::Cycle => Some(EdgeColor::Green),
        _ => None,
    }
}

/// The coordinate counts of the Main Theorem identity.
pub fn counts(t: &BlockTree, tol: Tolerance) -> Counts {
    let mut c = Counts::default();
    for pc in t.prismatic_circuits() {
        match circuit_color(&pc.link, tol) {
            Some(EdgeColor::Orange) => c.k_a += 1,
            Some(EdgeColor::Green) => c.k_l += 1,
            None => {}
        }
        if pc.class == CircuitClass::Essential {
            c.k_e += 1;
        }
    }
    for b in t.blocks() {
        match b.matrix.shape() {
            Shape::Cycle => c.k_c += 1,
            Shape::K23 => c.k_k += 1,
            _ => {}
        }
        for (v, st) in b.states.iter().enumerate() {
            if *st == VertexState::Intact {
                let link = b.matrix.delete_node(v);
                if circuit_color(&link, tol).is_some() {
                    c.k_v += 1;
                }
            }
        }
    }
    c
}

/// The named coordinates of X(G) together with the K_{2,3} constraints and
/// the bending fiber dimension.
pub fn coordinates(t: &BlockTree, tol: Tolerance) -> Result<CoordinateSystem, DeformError> {
    let mut axes: Vec<Axis> = Vec::new();
    let mut constraints: Vec<[usize; 3]> = Vec::new();
    let mut bending = 0usize;

    // Axis for the flexible thing seen from block `b` by deleting node `v`,
    // with a preferred orientation for K_{2,3} blocks.
    let axis_circuit = |t: &BlockTree, b: usize, v: usize| -> Circuit {
        let m = &t.blocks()[b].matrix;
        if m.shape() == Shape::K23 {
            let cs = coherent_k23_circuits(m).expect("K23 shape");
            for c in cs {
                if !c.0.contains(&v) {
                    return c;
                }
            }
            unreachable!("one coherent circuit avoids each degree-2 node");
        }
        // Unique cycle of the link diagram, canonical orientation, expressed
        // in block-node indices.
        let link_nodes: Vec<usize> = (0..m.rank()).filter(|&s| s != v).collect();
        let link = m.delete_node(v);
        let cyc = relevant_circuits(&link)
            .into_iter()
            .find(|c| c.len() >= 3)
            .expect("flexible link has a cycle");
        Circuit(cyc.0.iter().map(|&i| link_nodes[i]).collect())
    };

    for pc in t.prismatic_circuits() {
        if pc.class == CircuitClass::Essential {
            bending += 1;
        }
        let color = circuit_color(&pc.link, tol);
        let Some(color) = color else { continue };
        let (b, v) = match pc.kind {
            CircuitKind::TruncationFacet { block, vertex } => (block, vertex),
            CircuitKind::GluingEdge { b1, v1, .. } => (b1, v1),
        };
        let circuit = axis_circuit(t, b, v);
        let (kind, punct) = match color {
            EdgeColor::Orange => (AxisKind::AffineCircuit, true),
            EdgeColor::Green => (AxisKind::FlexibleLannerCircuit, false),
        };
        axes.push(Axis {
            kind,
            name: format!("circuit.b{b}.{}", t.blocks()[b].matrix.names()[v]),
            block: b,
            circuit,
            punctured: punct,
        });
    }
    for (bi, b) in t.blocks().iter().enumerate() {
        if b.matrix.shape() == Shape::Cycle {
            let cyc = relevant_circuits(&b.matrix)
                .into_iter()
                .find(|c| c.len() >= 3)
                .expect("cycle block has a cycle");
            axes.push(Axis {
                kind: AxisKind::CycleBlock,
                name: format!("block.b{bi}"),
                block: bi,
                circuit: cyc,
                punctured: false,
            });
        }
        for (v, st) in b.states.iter().enumerate() {
            if *st != VertexState::Intact {
                continue;
            }
            let link = b.matrix.delete_node(v);
            if circuit_color(&link, tol).is_none() {
                continue;
            }
            let circuit = axis_circuit(t, bi, v);
            axes.push(Axis {
                kind: AxisKind::FlexibleVertex,
                name: format!("vertex.b{bi}.{}", b.matrix.names()[v]),
                block: bi,
                circuit,
                punctured: false,
            });
        }
    }
    // K_{2,3} constraints: the three axes living on one K23 block.
    for (bi, b) in t.blocks().iter().enumerate() {
        if b.matrix.shape() != Shape::K23 {
            continue;
        }
        let mine: Vec<usize> = axes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.block == bi)
            .map(|(i, _)| i)
            .collect();
        if mine.len() == 3 {
            constraints.push([mine[0], mine[1], mine[2]]);
        } else {
            return Err(DeformError::NotConvexProjectivizable(format!(
                "K23 block {bi} has {} flexible corners, expected 3",
                mine.len()
            )));
        }
    }
    Ok(CoordinateSystem {
        axes,
        constraints,
        bending,
    })
}

// ---------------------------------------------------------------------------
// Forest and component counting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeColor {
    Orange,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ForestNode {
    Block(usize),
    /// Degenerate pyramid block at the truncation facet of (block, vertex).
    Pyramid { block: usize, vertex: usize },
}

/// The forest of the all-circuit decomposition: nodes are blocks (including
/// one pyramid per truncation facet), edges are the flexible circuits,
/// colored orange for affine cycles and green for flexible Lannér links.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Forest {
    pub nodes: Vec<ForestNode>,
    pub edges: Vec<(usize, usize, EdgeColor)>,
}

impl Forest {
    fn node_id(&mut self, n: ForestNode) -> usize {
        if let Some(i) = self.nodes.iter().position(|&x| x == n) {
            i
        } else {
            self.nodes.push(n);
            self.nodes.len() - 1
        }
    }

    pub fn orange_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|&&(_, _, c)| c == EdgeColor::Orange)
            .map(|&(a, b, _)| (a, b))
            .collect()
    }

    fn valences(&self, color: Option<EdgeColor>) -> Vec<usize> {
        let mut v = vec![0usize; self.nodes.len()];
        for &(a, b, c) in &self.edges {
            if color.map_or(true, |col| col == c) {
                v[a] += 1;
                v[b] += 1;
            }
        }
        v
    }

    /// (n2, n3, n_c) of the orange subforest.
    pub fn orange_stats(&self) -> Result<(usize, usize, usize), DeformError> {
        let val = self.valences(Some(EdgeColor::Orange));
        if let Some(&bad) = self.valences(None).iter().find(|&&v| v > 3) {
            return Err(DeformError::BadValence(bad));
        }
        let n2 = val.iter().filter(|&&v| v == 2).count();
        let n3 = val.iter().filter(|&&v| v == 3).count();
        // Components of the orange subgraph restricted to incident nodes.
        let oe = self.orange_edges();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for &(a, b) in &oe {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut roots: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| val[i] > 0)
            .map(|i| find(&mut parent, i))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        Ok((n2, n3, roots.len()))
    }

    /// Number of balanced sign functions of the orange forest, by brute force
    /// over all sign assignments.
    pub fn kappa_brute_force(&self) -> Result<u64, DeformError> {
        let oe = self.orange_edges();
        let k = oe.len();
        if k > 26 {
            return Err(DeformError::BadValence(k));
        }
        let val = self.valences(Some(EdgeColor::Orange));
        if val.iter().any(|&v| v > 3) {
            return Err(DeformError::BadValence(4));
        }
        let mut count = 0u64;
        'assign: for mask in 0u64..(1u64 << k) {
            for (node, &v) in val.iter().enumerate() {
                if v != 3 {
                    continue;
                }
                let signs: Vec<bool> = oe
                    .iter()
                    .enumerate()
                    .filter(|(_, &(a, b))| a == node || b == node)
                    .map(|(i, _)| mask >> i & 1 == 1)
                    .collect();
                if signs.iter().all(|&s| s) || signs.iter().all(|&s| !s) {
                    continue 'assign;
                }
            }
            count += 1;
        }
        Ok(count)
    }

    /// Checks that a balanced sign function of the orange forest extends to a
    /// balanced sign function of the whole forest, for every balanced
    /// function (brute force; forests up to ~20 edges).
    pub fn all_orange_balanced_extend(&self) -> Result<bool, DeformError> {
        let oe = self.orange_edges();
        let ge: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(_, _, c)| c == EdgeColor::Green)
            .map(|&(a, b, _)| (a, b))
            .collect();
        if oe.len() + ge.len() > 24 {
            return Err(DeformError::BadValence(oe.len() + ge.len()));
        }
        let oval = self.valences(Some(EdgeColor::Orange));
        let fval = self.valences(None);
        let balanced = |edges: &[(usize, usize)], mask: u64, nodes: &[usize]| -> bool {
            for &node in nodes {
                let signs: Vec<bool> = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(a, b))| a == node || b == node)
                    .map(|(i, _)| mask >> i & 1 == 1)
                    .collect();
                if signs.len() == 3 && (signs.iter().all(|&s| s) || signs.iter().all(|&s| !s)) {
                    return false;
                }
            }
            true
        };
        let o3: Vec<usize> = (0..self.nodes.len()).filter(|&i| oval[i] == 3).collect();
        let f3: Vec<usize> = (0..self.nodes.len()).filter(|&i| fval[i] == 3).collect();
        let all_edges: Vec<(usize, usize)> = oe.iter().chain(ge.iter()).copied().collect();
        for omask in 0u64..(1u64 << oe.len()) {
            if !balanced(&oe, omask, &o3) {
                continue;
            }
            let mut ok = false;
            for gmask in 0u64..(1u64 << ge.len()) {
                let full = omask | (gmask << oe.len());
                if balanced(&all_edges, full, &f3) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds the forest of the all-prismatic-circuit decomposition.
pub fn build_forest(t: &BlockTree, tol: Tolerance) -> Forest {
    let mut f = Forest::default();
    for pc in t.prismatic_circuits() {
        let Some(color) = circuit_color(&pc.link, tol) else {
            continue;
        };
        let (a, b) = match pc.kind {
            CircuitKind::TruncationFacet { block, vertex } => (
                ForestNode::Block(block),
                ForestNode::Pyramid { block, vertex },
            ),
            CircuitKind::GluingEdge { b1, b2, .. } => {
                (ForestNode::Block(b1), ForestNode::Block(b2))
            }
        };
        let ia = f.node_id(a);
        let ib = f.node_id(b);
        f.edges.push((ia, ib, color));
    }
    f
}

/// The number of connected components from the closed formula
/// `2^(n2+nc) * 3^(n3)`.
pub fn kappa(t: &BlockTree, tol: Tolerance) -> Result<u64, DeformError> {
    let f = build_forest(t, tol);
    let (n2, n3, nc) = f.orange_stats()?;
    Ok(2u64.pow((n2 + nc) as u32) * 3u64.pow(n3 as u32))
}

// ---------------------------------------------------------------------------
// The deformation descriptor
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformationDescriptor {
    pub convex_projectivizable: bool,
    pub hyperbolizable: bool,
    pub dimension_b: i64,
    pub counts: Counts,
    pub kappa: u64,
    pub n2: usize,
    pub n3: usize,
    pub n_c: usize,
    pub finite_volume_possible: bool,
    pub convex_cocompact_locus_nonempty: bool,
}

/// Full analysis of a convex-projectivizable tree. The dimension is computed
/// both as `e_+ - d` and as the coordinate count and the two must agree.
pub fn deformation_descriptor(
    t: &BlockTree,
    tol: Tolerance,
) -> Result<DeformationDescriptor, DeformError> {
    let geo = geometrize(t, tol)?;
    if !geo.convex_projectivizable {
        return Err(DeformError::NotConvexProjectivizable(format!(
            "{} obstructing circuit(s)",
            geo.offending.len()
        )));
    }
    let c = counts(t, tol);
    let e_plus = t.e_plus() as i64;
    let lhs = e_plus - t.dim() as i64;
    let rhs = c.k_l as i64 + c.k_a as i64 + c.k_v as i64 + c.k_c as i64 - c.k_k as i64
        + c.k_e as i64;
    if lhs != rhs {
        return Err(DeformError::DimensionMismatch { lhs, rhs });
    }
    let forest = build_forest(t, tol);
    let (n2, n3, n_c) = forest.orange_stats()?;
    let kappa = 2u64.pow((n2 + n_c) as u32) * 3u64.pow(n3 as u32);
    let perf = t.perfection(tol);
    Ok(DeformationDescriptor {
        convex_projectivizable: true,
        hyperbolizable: geo.hyperbolizable,
        dimension_b: lhs,
        counts: c,
        kappa,
        n2,
        n3,
        n_c,
        finite_volume_possible: perf.quasi_perfect,
        convex_cocompact_locus_nonempty: true,
    })
}

// ---------------------------------------------------------------------------
// Classification of non-large labeled polytopes (Vinberg/Marquis trichotomy)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonLargeCase {
    Spherical,
    AffineCycleTop,
    AffineCycleTimesA1,
    OtherVirtuallyAbelian,
    Large,
}

/// Case label for a 2-perfect labeled polytope whose Coxeter group is not
/// large, with the textual description of its deformation space.
pub fn classify_nonlarge(t: &BlockTree, tol: Tolerance) -> (NonLargeCase, String) {
    let w = t.coxeter_group().matrix;
    let comps = w.components();
    let all_spherical = comps
        .iter()
        .all(|(_, m)| classify::spectral_kind(m, tol) == Ok(classify::Kind::Spherical));
    if all_spherical {
        return (
            NonLargeCase::Spherical,
            "one isomorphism class, elliptic; the orbit closure is the whole sphere".into(),
        );
    }
    let classify_comp = |m: &CoxeterMatrix| classify::spectral_kind(m, tol).ok();
    let any_large = comps
        .iter()
        .any(|(_, m)| classify_comp(m) == Some(classify::Kind::Large));
    if any_large {
        return (
            NonLargeCase::Large,
            "the group is large; use the deformation descriptor instead".into(),
        );
    }
    // All components spherical or affine, at least one affine.
    let d = t.dim();
    if comps.len() == 1 && w.shape() == Shape::Cycle && w.rank() == d + 1 {
        return (
            NonLargeCase::AffineCycleTop,
            "one-parameter family: parabolic at R = 0 (orbit an affine chart), loxodromic at R != 0 (orbit a simplex)".into(),
        );
    }
    if comps.len() == 2 {
        let (a, b) = (&comps[0].1, &comps[1].1);
        let is_cycle_affine = |m: &CoxeterMatrix| {
            m.shape() == Shape::Cycle
                && m.rank() == d
                && classify_comp(m) == Some(classify::Kind::Affine)
        };
        let is_a1 = |m: &CoxeterMatrix| m.rank() == 1;
        if (is_cycle_affine(a) && is_a1(b)) || (is_cycle_affine(b) && is_a1(a)) {
            return (
                NonLargeCase::AffineCycleTimesA1,
                "one-parameter family of joins Q x point, Q parabolic or loxodromic".into(),
            );
        }
    }
    (
        NonLargeCase::OtherVirtuallyAbelian,
        "a single class: parabolic, or the join of a parabolic with a point".into(),
    )
}

// ---------------------------------------------------------------------------
// Enumeration for d in 6..9
// ---------------------------------------------------------------------------

/// Vertices of a tree where a new block can be glued or a truncation applied:
/// intact, with Lannér or affine-cycle link.
fn open_vertices(t: &BlockTree, tol: Tolerance) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (bi, b) in t.blocks().iter().enumerate() {
        for (v, st) in b.states.iter().enumerate() {
            if *st != VertexState::Intact {
                continue;
            }
            let link = b.matrix.delete_node(v);
            match link_class(&link, tol) {
                LinkClass::Lanner | LinkClass::AffineCycle => out.push((bi, v)),
                _ => {}
            }
        }
    }
    out
}

/// All convex-projectivizable, irreducible, large, 2-perfect labeled
/// truncation polytopes of dimension d in 6..=9, up to isomorphism.
pub fn enumerate_polytopes(d: usize, tol: Tolerance) -> Result<Vec<BlockTree>, DeformError> {
    if !(6..=9).contains(&d) {
        return Err(DeformError::EnumerationRange(d));
    }
    let blocks = tables::two_lanner(d + 1).expect("rank in 6..=10");
    // BFS over gluing trees.
    let singles: Vec<BlockTree> = blocks
        .iter()
        .map(|(_, w)| BlockTree::simplex(w).expect("rank >= 3"))
        .collect();
    let mut trees: Vec<BlockTree> = Vec::new();
    let mut seen: Vec<Vec<u64>> = Vec::new();
    let mut frontier: Vec<BlockTree> = Vec::new();
    for t in &singles {
        let cert = t.certificate();
        if !seen.contains(&cert) {
            seen.push(cert);
            trees.push(t.clone());
            frontier.push(t.clone());
        }
    }
    while !frontier.is_empty() {
        if trees.len() > 4000 {
            return Err(DeformError::BadValence(trees.len()));
        }
        let mut next = Vec::new();
        for t in &frontier {
            for (bi, v) in open_vertices(t, tol) {
                let vname = t.blocks()[bi].matrix.names()[v].clone();
                for s in &singles {
                    for (v2, st) in s.blocks()[0].states.iter().enumerate() {
                        if *st != VertexState::Intact {
                            continue;
                        }
                        let l1 = t.link_matrix(bi, v);
                        let l2 = s.link_matrix(0, v2);
                        if !crate::diagram::isomorphic(&l1, &l2) {
                            continue;
                        }
                        let v2name = s.blocks()[0].matrix.names()[v2].clone();
                        let glued =
                            BlockTree::enumerate_gluings(t, bi, &vname, s, 0, &v2name)
                                .map_err(|e| DeformError::NotConvexProjectivizable(e.to_string()))?;
                        for g in glued {
                            let cert = g.certificate();
                            if !seen.contains(&cert) {
                                seen.push(cert);
                                trees.push(g.clone());
                                next.push(g);
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    // Truncation subsets on every tree.
    let mut out: Vec<BlockTree> = Vec::new();
    let mut out_seen: Vec<Vec<u64>> = Vec::new();
    for t in &trees {
        let open = open_vertices(t, tol);
        let k = open.len();
        for mask in 0u32..(1u32 << k) {
            let mut g = t.clone();
            for (i, &(b, v)) in open.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let name = g.blocks()[b].matrix.names()[v].clone();
                    g.truncate(b, &name)
                        .map_err(|e| DeformError::NotConvexProjectivizable(e.to_string()))?;
                }
            }
            match geometrize(&g, tol) {
                Ok(rep) if rep.convex_projectivizable => {
                    let cert = g.certificate();
                    if !out_seen.contains(&cert) {
                        out_seen.push(cert);
                        out.push(g);
                    }
                }
                _ => {}
            }
        }
    }
    // Deterministic order: by block count, then certificate.
    let mut keyed: Vec<(usize, Vec<u64>, BlockTree)> = out
        .into_iter()
        .map(|t| (t.blocks().len(), t.certificate(), t))
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(keyed.into_iter().map(|(_, _, t)| t).collect())
}

// ---------------------------------------------------------------------------
// Random convex-projectivizable trees (test corpora)
// ---------------------------------------------------------------------------

/// A random convex-projectivizable block tree of dimension `d` built by
/// gluing and truncating 2-Lannér blocks at Lannér / affine-cycle vertices.
/// Every circuit is Lannér or the affine cycle by construction.
pub fn random_tree<R: Rng>(d: usize, max_blocks: usize, rng: &mut R) -> BlockTree {
    let tol = Tolerance::default();
    let blocks = tables::two_lanner(d + 1).expect("rank in 5..=10");
    let singles: Vec<BlockTree> = blocks
        .iter()
        .map(|(_, w)| BlockTree::simplex(w).expect("rank >= 3"))
        .collect();
    let mut t = singles.choose(rng).unwrap().clone();
    for _ in 0..max_blocks.saturating_sub(1) {
        let open = open_vertices(&t, tol);
        if open.is_empty() {
            break;
        }
        let &(bi, v) = open.choose(rng).unwrap();
        let vname = t.blocks()[bi].matrix.names()[v].clone();
        if rng.gen_bool(0.35) {
            t.truncate(bi, &vname).unwrap();
            continue;
        }
        // Candidate partners with an isomorphic link.
        let l1 = t.link_matrix(bi, v);
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for (si, s) in singles.iter().enumerate() {
            for (v2, _) in s.blocks()[0].states.iter().enumerate() {
                let l2 = s.link_matrix(0, v2);
                if link_class(&l2, tol) != LinkClass::Other
                    && !matches!(link_class(&l2, tol), LinkClass::Spherical)
                    && crate::diagram::isomorphic(&l1, &l2)
                {
                    candidates.push((si, v2));
                }
            }
        }
        if candidates.is_empty() {
            t.truncate(bi, &vname).unwrap();
            continue;
        }
        let &(si, v2) = candidates.choose(rng).unwrap();
        let s = &singles[si];
        let v2name = s.blocks()[0].matrix.names()[v2].clone();
        let l2 = s.link_matrix(0, v2);
        let isos = crate::diagram::all_isomorphisms(&l1, &l2);
        let iso = isos.choose(rng).unwrap();
        let phi: Vec<(String, String)> = l1
            .names()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), l2.names()[iso[i]].clone()))
            .collect();
        t = BlockTree::glue(&t, bi, &vname, s, 0, &v2name, &phi).unwrap();
    }
    // Randomly truncate some of the remaining open vertices.
    let open = open_vertices(&t, tol);
    for (bi, v) in open {
        if rng.gen_bool(0.5) {
            let name = t.blocks()[bi].matrix.names()[v].clone();
            t.truncate(bi, &name).unwrap();
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{figure6_tree, glued_prism, k23_exceptional, prism};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn prism_descriptor() {
        let p = prism(8);
        let d = deformation_descriptor(&p, tol()).unwrap();
        assert_eq!(d.dimension_b, 1);
        assert_eq!(d.kappa, 2);
        assert!(!d.hyperbolizable);
        assert!(d.finite_volume_possible);
        let g = glued_prism(8, 3);
        let d = deformation_descriptor(&g, tol()).unwrap();
        assert_eq!(d.dimension_b, 2);
        assert_eq!(d.kappa, 2);
    }

    #[test]
    fn exceptional_k23_descriptor() {
        let w = k23_exceptional();
        let mut t = BlockTree::simplex(&w).unwrap();
        for name in ["a", "c", "e"] {
            t.truncate(0, name).unwrap();
        }
        let d = deformation_descriptor(&t, tol()).unwrap();
        assert_eq!(d.dimension_b, 2);
        assert_eq!(d.kappa, 6);
        assert_eq!((d.n2, d.n3, d.n_c), (0, 1, 1));
        let f = build_forest(&t, tol());
        assert_eq!(f.kappa_brute_force().unwrap(), 6);
    }

    #[test]
    fn figure6_kappa_is_864() {
        let t = figure6_tree();
        let d = deformation_descriptor(&t, tol()).unwrap();
        assert_eq!((d.n2, d.n3, d.n_c), (3, 3, 2));
        assert_eq!(d.kappa, 864);
        let f = build_forest(&t, tol());
        assert_eq!(f.kappa_brute_force().unwrap(), 864);
        assert!(f.all_orange_balanced_extend().unwrap());
    }

    #[test]
    fn simplex_of_cycle_type() {
        let w = crate::tables::cycle(&[3, 4, 3, 3, 3, 3]);
        let t = BlockTree::simplex(&w).unwrap();
        let d = deformation_descriptor(&t, tol()).unwrap();
        assert_eq!(d.counts.k_c, 1);
        assert_eq!(d.dimension_b, 1);
        assert_eq!(d.kappa, 1);
        assert!(d.hyperbolizable);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_polytopes(9, tol()).unwrap().len(), 3);
        assert_eq!(enumerate_polytopes(8, tol()).unwrap().len(), 10);
        assert!(matches!(
            enumerate_polytopes(5, tol()),
            Err(DeformError::EnumerationRange(5))
        ));
    }

    #[test]
    fn random_trees_satisfy_identity() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..25 {
            let d = *[4usize, 5, 6].choose(&mut rng).unwrap();
            let t = random_tree(d, 4, &mut rng);
            let desc = deformation_descriptor(&t, tol()).unwrap();
            assert!(desc.dimension_b >= 0);
            assert_eq!(desc.hyperbolizable, desc.kappa == 1);
            let f = build_forest(&t, tol());
            assert_eq!(f.kappa_brute_force().unwrap(), desc.kappa);
        }
    }

    #[test]
    fn coordinates_of_exceptional() {
        let w = k23_exceptional();
        let mut t = BlockTree::simplex(&w).unwrap();
        for name in ["a", "c", "e"] {
            t.truncate(0, name).unwrap();
        }
        let x = coordinates(&t, tol()).unwrap();
        assert_eq!(x.axes.len(), 3);
        assert!(x.axes.iter().all(|a| a.punctured));
        assert_eq!(x.constraints.len(), 1);
        assert_eq!(x.dimension(), 2);
    }

    #[test]
    fn nonlarge_cases() {
        let a5 = crate::tables::spherical_a(5);
        let t = BlockTree::simplex(&a5).unwrap();
        assert_eq!(classify_nonlarge(&t, tol()).0, NonLargeCase::Spherical);
        let a4t = crate::tables::affine_a(4);
        let t = BlockTree::simplex(&a4t).unwrap();
        assert_eq!(classify_nonlarge(&t, tol()).0, NonLargeCase::AffineCycleTop);
    }
}
