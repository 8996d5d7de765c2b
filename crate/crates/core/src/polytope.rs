//! Labeled truncation polytopes as block trees of labeled simplices.
//!
//! A block is a labeled simplex (a Coxeter matrix of rank d+1); its vertices
//! are named by their opposite facets. A vertex is intact, truncated (with a
//! free truncation facet), or glued to a vertex of another block through a
//! label-preserving isomorphism of the two vertex links. The gluing graph is
//! a tree. The full face poset is derivable but never stored; the tree is
//! canonical for truncation polytopes.

use crate::classify;
use crate::diagram::{self, CoxeterMatrix, Label};
use crate::Tolerance;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexState {
    Intact,
    TruncatedFree,
    /// Glued to `vertex` of `block`; `phi` maps this block's link nodes
    /// (all nodes except the opposite facet) to the partner block's nodes.
    Glued {
        block: usize,
        vertex: usize,
        phi: BTreeMap<usize, usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub matrix: CoxeterMatrix,
    /// Indexed by node; `states[s]` is the state of the vertex opposite facet `s`.
    pub states: Vec<VertexState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTree {
    dim: usize,
    blocks: Vec<Block>,
}

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("rank {0} is too small for a simplex block (need >= 3)")]
    RankTooSmall(usize),
    #[error("no block {0}")]
    NoBlock(usize),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex is not intact")]
    NotIntact,
    #[error("vertex state does not allow this operation")]
    BadState,
    #[error("gluing map is not a bijection of the links")]
    PhiNotBijective,
    #[error("gluing map is not label-preserving: {0}")]
    PhiNotLabelPreserving(String),
    #[error("blocks have different ranks")]
    RankMismatch,
    #[error("not a prismatic circuit of this tree")]
    NoSuchCircuit,
    #[error("{0}")]
    Other(String),
}

/// A facet of the glued polytope: either an amalgamation class of block
/// facets, or the truncation facet of a truncated vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FacetKind {
    /// Members as (block, node) pairs, sorted.
    Class(Vec<(usize, usize)>),
    Truncation { block: usize, vertex: usize },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Facets {
    pub kinds: Vec<FacetKind>,
    /// facet index of each (block, node)
    #[serde(skip)]
    class_of: BTreeMap<(usize, usize), usize>,
    /// facet index of each truncation facet keyed by (block, vertex)
    #[serde(skip)]
    trunc_of: BTreeMap<(usize, usize), usize>,
}

impl Facets {
    pub fn class(&self, block: usize, node: usize) -> usize {
        self.class_of[&(block, node)]
    }
    pub fn truncation(&self, block: usize, vertex: usize) -> usize {
        self.trunc_of[&(block, vertex)]
    }
    pub fn len(&self) -> usize {
        self.kinds.len()
    }
    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircuitClass {
    Useless,
    NonEssential,
    Essential,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircuitKind {
    TruncationFacet { block: usize, vertex: usize },
    GluingEdge { b1: usize, v1: usize, b2: usize, v2: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrismaticCircuit {
    pub kind: CircuitKind,
    /// The d facets of the circuit, as facet indices.
    pub facets: Vec<usize>,
    pub class: CircuitClass,
    /// The Coxeter matrix W_delta on the circuit facets (taken from the
    /// defining block; gluing validity makes this well defined).
    pub link: CoxeterMatrix,
}

/// The Coxeter group of the labeled polytope: generators are facets, adjacent
/// pairs carry the ridge label, non-adjacent pairs the label infinity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeGroup {
    pub matrix: CoxeterMatrix,
    /// Ridge structure: `adjacent[i*n+j]` is true when facets i, j share a ridge.
    pub adjacent: Vec<bool>,
    pub facets: Facets,
}

impl PolytopeGroup {
    /// Number of ridges with label different from 2.
    pub fn e_plus(&self) -> usize {
        let n = self.matrix.rank();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacent[i * n + j] && self.matrix.label(i, j) != Label::Finite(2) {
                    count += 1;
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitResult {
    pub left: BlockTree,
    pub right: BlockTree,
    /// True for non-essential or useless circuits, whose splitting produces
    /// the degenerate outputs (the original polytope and a pyramid).
    pub degenerate: bool,
}

impl BlockTree {
    /// A single-block tree: the labeled simplex of `w`, all vertices intact.
    pub fn simplex(w: &CoxeterMatrix) -> Result<BlockTree, PolytopeError> {
        if w.rank() < 3 {
            return Err(PolytopeError::RankTooSmall(w.rank()));
        }
        Ok(BlockTree {
            dim: w.rank() - 1,
            blocks: vec![Block {
                matrix: w.clone(),
                states: vec![VertexState::Intact; w.rank()],
            }],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut Vec<Block> {
        &mut self.blocks
    }

    pub fn node_index(&self, block: usize, name: &str) -> Result<usize, PolytopeError> {
        let b = self.blocks.get(block).ok_or(PolytopeError::NoBlock(block))?;
        b.matrix
            .node_index(name)
            .ok_or_else(|| PolytopeError::UnknownVertex(name.to_string()))
    }

    /// Truncates the intact vertex opposite facet `vertex` of `block`. All new
    /// ridge labels are π/2 by construction (they are implicit in the tree).
    pub fn truncate(&mut self, block: usize, vertex: &str) -> Result<(), PolytopeError> {
        let v = self.node_index(block, vertex)?;
        match self.blocks[block].states[v] {
            VertexState::Intact => {
                self.blocks[block].states[v] = VertexState::TruncatedFree;
                Ok(())
            }
            _ => Err(PolytopeError::BadState),
        }
    }

    /// The vertex link of an intact vertex: the Coxeter matrix on the d facets
    /// containing it, i.e. the block matrix with the opposite facet deleted.
    pub fn vertex_link(&self, block: usize, vertex: &str) -> Result<CoxeterMatrix, PolytopeError> {
        let v = self.node_index(block, vertex)?;
        if self.blocks[block].states[v] != VertexState::Intact {
            return Err(PolytopeError::NotIntact);
        }
        Ok(self.blocks[block].matrix.delete_node(v))
    }

    /// Link matrix regardless of the vertex state (used internally for
    /// circuits, where the vertex is truncated or glued).
    pub fn link_matrix(&self, block: usize, v: usize) -> CoxeterMatrix {
        self.blocks[block].matrix.delete_node(v)
    }

    /// Glues two block trees at vertices `v1`, `v2` through `phi`, a
    /// label-preserving bijection of the vertex links given on node names.
    /// The vertices may be intact or already truncated; they become glued.
    pub fn glue(
        t1: &BlockTree,
        b1: usize,
        v1: &str,
        t2: &BlockTree,
        b2: usize,
        v2: &str,
        phi: &[(String, String)],
    ) -> Result<BlockTree, PolytopeError> {
        if t1.dim != t2.dim {
            return Err(PolytopeError::RankMismatch);
        }
        let v1 = t1.node_index(b1, v1)?;
        let v2 = t2.node_index(b2, v2)?;
        for (t, b, v) in [(t1, b1, v1), (t2, b2, v2)] {
            match t.blocks[b].states[v] {
                VertexState::Intact | VertexState::TruncatedFree => {}
                VertexState::Glued { .. } => return Err(PolytopeError::BadState),
            }
        }
        let m1 = &t1.blocks[b1].matrix;
        let m2 = &t2.blocks[b2].matrix;
        // Build phi over node indices of block b1 -> block b2.
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        for (a, b) in phi {
            let ia = m1
                .node_index(a)
                .ok_or_else(|| PolytopeError::UnknownVertex(a.clone()))?;
            let ib = m2
                .node_index(b)
                .ok_or_else(|| PolytopeError::UnknownVertex(b.clone()))?;
            if ia == v1 || ib == v2 {
                return Err(PolytopeError::PhiNotBijective);
            }
            if map.insert(ia, ib).is_some() {
                return Err(PolytopeError::PhiNotBijective);
            }
        }
        let n = m1.rank();
        if map.len() != n - 1 {
            return Err(PolytopeError::PhiNotBijective);
        }
        {
            let mut targets: Vec<usize> = map.values().copied().collect();
            targets.sort_unstable();
            targets.dedup();
            if targets.len() != n - 1 {
                return Err(PolytopeError::PhiNotBijective);
            }
        }
        // Label preservation on the links.
        for (&a, &fa) in &map {
            for (&b, &fb) in &map {
                if a >= b {
                    continue;
                }
                if m1.label(a, b) != m2.label(fa, fb) {
                    return Err(PolytopeError::PhiNotLabelPreserving(format!(
                        "labels differ on pair ({}, {})",
                        m1.names()[a],
                        m1.names()[b]
                    )));
                }
            }
        }
        // Concatenate trees; t2's block indices shift by t1.blocks.len().
        let off = t1.blocks.len();
        let mut blocks = t1.blocks.clone();
        for b in &t2.blocks {
            let mut nb = b.clone();
            for st in nb.states.iter_mut() {
                if let VertexState::Glued { block, .. } = st {
                    *block += off;
                }
            }
            blocks.push(nb);
        }
        let phi_rev: BTreeMap<usize, usize> = map.iter().map(|(&a, &b)| (b, a)).collect();
        blocks[b1].states[v1] = VertexState::Glued {
            block: b2 + off,
            vertex: v2,
            phi: map,
        };
        blocks[b2 + off].states[v2] = VertexState::Glued {
            block: b1,
            vertex: v1,
            phi: phi_rev,
        };
        Ok(BlockTree {
            dim: t1.dim,
            blocks,
        })
    }

    /// All distinct gluings of `t1` at `v1` to `t2` at `v2`, one per
    /// label-preserving link isomorphism, deduplicated up to isomorphism of
    /// the resulting labeled polytope.
    pub fn enumerate_gluings(
        t1: &BlockTree,
        b1: usize,
        v1: &str,
        t2: &BlockTree,
        b2: usize,
        v2: &str,
    ) -> Result<Vec<BlockTree>, PolytopeError> {
        let iv1 = t1.node_index(b1, v1)?;
        let iv2 = t2.node_index(b2, v2)?;
        let l1 = t1.link_matrix(b1, iv1);
        let l2 = t2.link_matrix(b2, iv2);
        let isos = diagram::all_isomorphisms(&l1, &l2);
        let mut out: Vec<BlockTree> = Vec::new();
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for iso in isos {
            let phi: Vec<(String, String)> = l1
                .names()
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), l2.names()[iso[i]].clone()))
                .collect();
            let glued = BlockTree::glue(t1, b1, v1, t2, b2, v2, &phi)?;
            let cert = glued.certificate();
            if !seen.contains(&cert) {
                seen.push(cert);
                out.push(glued);
            }
        }
        Ok(out)
    }

    /// Amalgamation classes of block facets plus truncation facets.
    pub fn facets(&self) -> Facets {
        // Union-find over (block, node).
        let mut ids: Vec<(usize, usize)> = Vec::new();
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            for s in 0..b.matrix.rank() {
                index.insert((bi, s), ids.len());
                ids.push((bi, s));
            }
        }
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            for v in 0..b.matrix.rank() {
                if let VertexState::Glued { block, phi, .. } = &b.states[v] {
                    for (&s, &fs) in phi {
                        let a = index[&(bi, s)];
                        let c = index[&(*block, fs)];
                        let (ra, rc) = (find(&mut parent, a), find(&mut parent, c));
                        if ra != rc {
                            parent[ra] = rc;
                        }
                    }
                }
            }
        }
        let mut classes: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..ids.len() {
            let r = find(&mut parent, i);
            classes.entry(r).or_default().push(ids[i]);
        }
        let mut kinds: Vec<FacetKind> = Vec::new();
        let mut class_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut sorted: Vec<Vec<(usize, usize)>> = classes.into_values().collect();
        for c in sorted.iter_mut() {
            c.sort_unstable();
        }
        sorted.sort();
        for members in sorted {
            let idx = kinds.len();
            for &m in &members {
                class_of.insert(m, idx);
            }
            kinds.push(FacetKind::Class(members));
        }
        let mut trunc_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            for v in 0..b.matrix.rank() {
                if b.states[v] == VertexState::TruncatedFree {
                    trunc_of.insert((bi, v), kinds.len());
                    kinds.push(FacetKind::Truncation { block: bi, vertex: v });
                }
            }
        }
        Facets {
            kinds,
            class_of,
            trunc_of,
        }
    }

    /// The Coxeter group of the labeled polytope together with the ridge
    /// structure. Non-adjacent facet pairs carry the label infinity.
    pub fn coxeter_group(&self) -> PolytopeGroup {
        let facets = self.facets();
        let n = facets.len();
        let mut adjacent = vec![false; n * n];
        let mut labels: Vec<Label> = vec![Label::Infinity; n * n];
        // Facet pairs within a block (including pairs through amalgamation).
        for (bi, b) in self.blocks.iter().enumerate() {
            let r = b.matrix.rank();
            for s in 0..r {
                for t in (s + 1)..r {
                    let fs = facets.class(bi, s);
                    let ft = facets.class(bi, t);
                    adjacent[fs * n + ft] = true;
                    adjacent[ft * n + fs] = true;
                    labels[fs * n + ft] = b.matrix.label(s, t);
                    labels[ft * n + fs] = b.matrix.label(s, t);
                }
            }
            // Truncation facets: adjacent to the facets containing the vertex.
            for v in 0..r {
                if b.states[v] == VertexState::TruncatedFree {
                    let tv = facets.truncation(bi, v);
                    for s in 0..r {
                        if s == v {
                            continue;
                        }
                        let fs = facets.class(bi, s);
                        adjacent[tv * n + fs] = true;
                        adjacent[fs * n + tv] = true;
                        labels[tv * n + fs] = Label::Finite(2);
                        labels[fs * n + tv] = Label::Finite(2);
                    }
                }
            }
        }
        let names: Vec<String> = facets
            .kinds
            .iter()
            .enumerate()
            .map(|(i, k)| match k {
                FacetKind::Class(members) => {
                    let (b, s) = members[0];
                    if members.len() == 1 {
                        format!("b{}.{}", b, self.blocks[b].matrix.names()[s])
                    } else {
                        format!("c{i}.b{}.{}", b, self.blocks[b].matrix.names()[s])
                    }
                }
                FacetKind::Truncation { block, vertex } => {
                    format!("t{}.{}", block, self.blocks[*block].matrix.names()[*vertex])
                }
            })
            .collect();
        let mut edges: Vec<(usize, usize, Label)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let l = if adjacent[i * n + j] {
                    labels[i * n + j]
                } else {
                    Label::Infinity
                };
                if l.is_edge() {
                    edges.push((i, j, l));
                }
            }
        }
        let matrix = CoxeterMatrix::from_edges(&names, &edges).expect("facet graph");
        PolytopeGroup {
            matrix,
            adjacent,
            facets,
        }
    }

    pub fn e_plus(&self) -> usize {
        self.coxeter_group().e_plus()
    }

    /// All prismatic circuits: one per truncation facet and one per gluing
    /// edge, classified useless / non-essential / essential.
    pub fn prismatic_circuits(&self) -> Vec<PrismaticCircuit> {
        let facets = self.facets();
        let mut out = Vec::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            for v in 0..b.matrix.rank() {
                match &b.states[v] {
                    VertexState::TruncatedFree => {
                        let link = self.link_matrix(bi, v);
                        let fs: Vec<usize> = (0..b.matrix.rank())
                            .filter(|&s| s != v)
                            .map(|s| facets.class(bi, s))
                            .collect();
                        // The pyramid side is always a simplex with orthogonal
                        // opposite facet; the other side is the whole tree.
                        let other_side_orthogonal = self.side_is_orthogonal_simplex(bi, v);
                        let class = if other_side_orthogonal {
                            CircuitClass::Useless
                        } else {
                            CircuitClass::NonEssential
                        };
                        out.push(PrismaticCircuit {
                            kind: CircuitKind::TruncationFacet { block: bi, vertex: v },
                            facets: fs,
                            class,
                            link,
                        });
                    }
                    VertexState::Glued { block, vertex, .. } => {
                        if (bi, v) < (*block, *vertex) {
                            let link = self.link_matrix(bi, v);
                            let fs: Vec<usize> = (0..b.matrix.rank())
                                .filter(|&s| s != v)
                                .map(|s| facets.class(bi, s))
                                .collect();
                            let s1 = self.split_side(bi, v);
                            let s2 = self.split_side(*block, *vertex);
                            let o1 = s1.side_is_orthogonal_simplex_local();
                            let o2 = s2.side_is_orthogonal_simplex_local();
                            let class = match (o1, o2) {
                                (true, true) => CircuitClass::Useless,
                                (true, false) | (false, true) => CircuitClass::NonEssential,
                                (false, false) => CircuitClass::Essential,
                            };
                            out.push(PrismaticCircuit {
                                kind: CircuitKind::GluingEdge {
                                    b1: bi,
                                    v1: v,
                                    b2: *block,
                                    v2: *vertex,
                                },
                                facets: fs,
                                class,
                                link,
                            });
                        }
                    }
                    VertexState::Intact => {}
                }
            }
        }
        out
    }

    /// For the truncation circuit at (block, v): is the containing side
    /// (the whole tree with v restored) a simplex whose opposite facet is
    /// orthogonal to the circuit?
    fn side_is_orthogonal_simplex(&self, block: usize, v: usize) -> bool {
        if self.blocks.len() != 1 {
            return false;
        }
        let b = &self.blocks[block];
        // One block, no other truncation or gluing.
        for (s, st) in b.states.iter().enumerate() {
            if s != v && *st != VertexState::Intact {
                return false;
            }
        }
        (0..b.matrix.rank()).all(|s| s == v || b.matrix.label(v, s) == Label::Finite(2))
    }

    /// The sub-tree on the side of `(block, v)` when the gluing edge at that
    /// vertex is cut, with `(block, v)` marked as truncated.
    fn split_side(&self, block: usize, v: usize) -> SideView<'_> {
        // Collect blocks reachable from `block` without crossing (block, v).
        let mut reach = vec![false; self.blocks.len()];
        let mut stack = vec![block];
        reach[block] = true;
        while let Some(b) = stack.pop() {
            for (s, st) in self.blocks[b].states.iter().enumerate() {
                if b == block && s == v {
                    continue;
                }
                if let VertexState::Glued {
                    block: nb, ..
                } = st
                {
                    if !reach[*nb] {
                        reach[*nb] = true;
                        stack.push(*nb);
                    }
                }
            }
        }
        SideView {
            tree: self,
            members: reach,
            cut: (block, v),
        }
    }

    /// Splits the tree along a prismatic circuit. For an essential gluing
    /// edge, returns the two sub-trees with the interface vertices truncated.
    /// For non-essential/useless circuits, the degenerate outputs (the tree
    /// itself and the pyramid cap) are produced with `degenerate = true`.
    pub fn split(&self, circuit: &PrismaticCircuit) -> Result<SplitResult, PolytopeError> {
        match circuit.kind {
            CircuitKind::TruncationFacet { block, vertex } => {
                if self
                    .blocks
                    .get(block)
                    .map(|b| b.states.get(vertex) != Some(&VertexState::TruncatedFree))
                    .unwrap_or(true)
                {
                    return Err(PolytopeError::NoSuchCircuit);
                }
                Ok(SplitResult {
                    left: self.clone(),
                    right: pyramid_tree(&circuit.link)?,
                    degenerate: true,
                })
            }
            CircuitKind::GluingEdge { b1, v1, b2, v2 } => {
                match self.blocks.get(b1).and_then(|b| b.states.get(v1)) {
                    Some(VertexState::Glued { block, vertex, .. })
                        if (*block, *vertex) == (b2, v2) => {}
                    _ => return Err(PolytopeError::NoSuchCircuit),
                }
                let left = self.extract_side(b1, v1);
                let right = self.extract_side(b2, v2);
                Ok(SplitResult {
                    left,
                    right,
                    degenerate: circuit.class != CircuitClass::Essential,
                })
            }
        }
    }

    /// Extracts the side of the cut at (block, v) as a standalone tree, with
    /// (block, v) marked truncated.
    fn extract_side(&self, block: usize, v: usize) -> BlockTree {
        let side = self.split_side(block, v);
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &m) in side.members.iter().enumerate() {
            if m {
                let idx = remap.len();
                remap.insert(i, idx);
            }
        }
        let mut blocks = Vec::new();
        for (i, &m) in side.members.iter().enumerate() {
            if !m {
                continue;
            }
            let mut b = self.blocks[i].clone();
            for (s, st) in b.states.iter_mut().enumerate() {
                if (i, s) == (block, v) {
                    *st = VertexState::TruncatedFree;
                    continue;
                }
                if let VertexState::Glued { block: nb, .. } = st {
                    *nb = remap[nb];
                }
            }
            blocks.push(b);
        }
        BlockTree {
            dim: self.dim,
            blocks,
        }
    }

    /// Vertices of the polytope: intact block vertices plus, for each
    /// truncation facet, its d new vertices. Each vertex is a set of facet
    /// indices (its incident facets).
    pub fn vertices(&self) -> Vec<PolytopeVertex> {
        let facets = self.facets();
        let mut out = Vec::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            let r = b.matrix.rank();
            for v in 0..r {
                match b.states[v] {
                    VertexState::Intact => {
                        let incident: Vec<usize> = (0..r)
                            .filter(|&s| s != v)
                            .map(|s| facets.class(bi, s))
                            .collect();
                        out.push(PolytopeVertex {
                            origin: VertexOrigin::Block { block: bi, vertex: v },
                            incident,
                        });
                    }
                    VertexState::TruncatedFree => {
                        let tv = facets.truncation(bi, v);
                        for j in 0..r {
                            if j == v {
                                continue;
                            }
                            let mut incident: Vec<usize> = (0..r)
                                .filter(|&s| s != v && s != j)
                                .map(|s| facets.class(bi, s))
                                .collect();
                            incident.push(tv);
                            incident.sort_unstable();
                            out.push(PolytopeVertex {
                                origin: VertexOrigin::Cut {
                                    block: bi,
                                    vertex: v,
                                    toward: j,
                                },
                                incident,
                            });
                        }
                    }
                    VertexState::Glued { .. } => {}
                }
            }
        }
        out
    }

    /// Perfection report: the class of every remaining vertex link and the
    /// perfect / quasi-perfect / 2-perfect flags.
    pub fn perfection(&self, tol: Tolerance) -> PerfectionReport {
        let mut links: Vec<(VertexOrigin, LinkClass)> = Vec::new();
        let mut perfect = true;
        let mut quasi = true;
        let mut two = true;
        for (bi, b) in self.blocks.iter().enumerate() {
            let r = b.matrix.rank();
            for v in 0..r {
                match b.states[v] {
                    VertexState::Intact => {
                        let link = b.matrix.delete_node(v);
                        let class = link_class(&link, tol);
                        match class {
                            LinkClass::Spherical => {}
                            LinkClass::IrreducibleAffine | LinkClass::AffineCycle => {
                                perfect = false;
                            }
                            LinkClass::Lanner => {
                                perfect = false;
                                quasi = false;
                            }
                            LinkClass::Other => {
                                perfect = false;
                                quasi = false;
                                two = false;
                            }
                        }
                        links.push((VertexOrigin::Block { block: bi, vertex: v }, class));
                    }
                    VertexState::TruncatedFree => {
                        // New-facet vertices have link (G_v)_w x A1: spherical
                        // iff the link of the link is spherical, which holds
                        // exactly when the block is 2-Lannér at this corner.
                        for j in 0..r {
                            if j == v {
                                continue;
                            }
                            let keep: Vec<usize> =
                                (0..r).filter(|&s| s != v && s != j).collect();
                            let sub = b.matrix.restrict(&keep);
                            if !classify::is_spherical(&sub, tol) {
                                perfect = false;
                                quasi = false;
                                two = false;
                                links.push((
                                    VertexOrigin::Cut {
                                        block: bi,
                                        vertex: v,
                                        toward: j,
                                    },
                                    LinkClass::Other,
                                ));
                            }
                        }
                    }
                    VertexState::Glued { .. } => {}
                }
            }
        }
        PerfectionReport {
            perfect,
            quasi_perfect: quasi && perfect_links_only_affine(&links),
            two_perfect: two && links.iter().all(|(_, c)| *c != LinkClass::Other),
            links,
        }
    }

    /// A dedup certificate: equal certificates mean isomorphic labeled
    /// polytopes (facet diagram with truncation facets distinguished, plus
    /// the multiset of block-level certificates).
    pub fn certificate(&self) -> Vec<u64> {
        let group = self.coxeter_group();
        let colors: Vec<u64> = group
            .facets
            .kinds
            .iter()
            .map(|k| match k {
                FacetKind::Class(_) => 0u64,
                FacetKind::Truncation { .. } => 1u64,
            })
            .collect();
        let mut cert = diagram::certificate_colored(&group.matrix, &colors);
        let mut blocks: Vec<Vec<u64>> = self
            .blocks
            .iter()
            .map(|b| {
                let c: Vec<u64> = b
                    .states
                    .iter()
                    .map(|s| match s {
                        VertexState::Intact => 0u64,
                        VertexState::TruncatedFree => 1,
                        VertexState::Glued { .. } => 2,
                    })
                    .collect();
                diagram::certificate_colored(&b.matrix, &c)
            })
            .collect();
        blocks.sort();
        cert.push(u64::MAX);
        for b in blocks {
            cert.extend(b);
            cert.push(u64::MAX - 1);
        }
        cert
    }
}

/// View of one side of a cut, used for circuit classification.
struct SideView<'a> {
    tree: &'a BlockTree,
    members: Vec<bool>,
    cut: (usize, usize),
}

impl SideView<'_> {
    /// Is this side a bare simplex whose facet opposite the cut vertex is
    /// orthogonal to the circuit?
    fn side_is_orthogonal_simplex_local(&self) -> bool {
        let count = self.members.iter().filter(|&&m| m).count();
        if count != 1 {
            return false;
        }
        let (block, v) = self.cut;
        let b = &self.tree.blocks[block];
        for (s, st) in b.states.iter().enumerate() {
            if s == v {
                continue;
            }
            if *st != VertexState::Intact {
                return false;
            }
        }
        (0..b.matrix.rank()).all(|s| s == v || b.matrix.label(v, s) == Label::Finite(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexOrigin {
    Block { block: usize, vertex: usize },
    /// New vertex on the truncation facet of (block, vertex), on the edge
    /// toward the block vertex opposite facet `toward`.
    Cut { block: usize, vertex: usize, toward: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeVertex {
    pub origin: VertexOrigin,
    /// Incident facet indices (d of them; the polytope is simple).
    pub incident: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkClass {
    Spherical,
    /// Irreducible affine of tree type (rigid).
    IrreducibleAffine,
    /// Irreducible affine of cycle type, i.e. `~A_{d-1}` (flexible).
    AffineCycle,
    Lanner,
    Other,
}

pub fn link_class(link: &CoxeterMatrix, tol: Tolerance) -> LinkClass {
    if classify::is_spherical(link, tol) {
        return LinkClass::Spherical;
    }
    if classify::is_irreducible_affine(link, tol) {
        return if link.shape() == crate::diagram::Shape::Cycle {
            LinkClass::AffineCycle
        } else {
            LinkClass::IrreducibleAffine
        };
    }
    if classify::classify_subgroup_family(link, tol).is_lanner {
        return LinkClass::Lanner;
    }
    LinkClass::Other
}

fn perfect_links_only_affine(links: &[(VertexOrigin, LinkClass)]) -> bool {
    links.iter().all(|(_, c)| {
        matches!(
            c,
            LinkClass::Spherical | LinkClass::IrreducibleAffine | LinkClass::AffineCycle
        )
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerfectionReport {
    pub perfect: bool,
    pub quasi_perfect: bool,
    pub two_perfect: bool,
    pub links: Vec<(VertexOrigin, LinkClass)>,
}

/// The pyramid cap split off at a truncation facet: a simplex block whose
/// apex facet is orthogonal to the base, truncated at the vertex opposite
/// the apex. Its Coxeter group is `W_delta x ~A_1`.
pub fn pyramid_tree(link: &CoxeterMatrix) -> Result<BlockTree, PolytopeError> {
    let mut names: Vec<String> = link.names().to_vec();
    let mut apex = "apex".to_string();
    while names.contains(&apex) {
        apex.push('_');
    }
    names.push(apex.clone());
    let edges: Vec<(usize, usize, Label)> = link
        .edges()
        .iter()
        .map(|&(i, j, l)| (i, j, l))
        .collect();
    let m = CoxeterMatrix::from_edges(&names, &edges)
        .map_err(|e| PolytopeError::Other(e.to_string()))?;
    let mut t = BlockTree::simplex(&m)?;
    t.truncate(0, &apex)?;
    Ok(t)
}

// ---------------------------------------------------------------------------
// Block tree DSL
// ---------------------------------------------------------------------------

/// Parses the block-tree DSL:
///
/// ```text
/// block b1 = W8t;                       # built-in table label
/// block b2 = { nodes a b c; edge a b; } # inline diagram DSL
/// truncate b1.i;
/// glue b1.a ~ b2.a map b->b c->c ...;   # vertices named by opposite facet
/// ```
pub fn parse_tree(text: &str) -> Result<BlockTree, PolytopeError> {
    #[derive(Debug)]
    enum Stmt {
        Block(String, CoxeterMatrix),
        Truncate(String, String),
        Glue(String, String, String, String, Vec<(String, String)>),
    }
    let mut stmts: Vec<Stmt> = Vec::new();
    // Strip comments.
    let text: String = text
        .lines()
        .map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut rest = text.trim();
    let err = |m: &str| PolytopeError::Other(m.to_string());
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("block") {
            let eq = r.find('=').ok_or_else(|| err("block: missing '='"))?;
            let name = r[..eq].trim().to_string();
            let after = r[eq + 1..].trim_start();
            if let Some(body) = after.strip_prefix('{') {
                let close = body.find('}').ok_or_else(|| err("block: missing '}'"))?;
                let dsl = &body[..close];
                let m = diagram::parse_diagram(dsl).map_err(|e| err(&e.to_string()))?;
                stmts.push(Stmt::Block(name, m));
                let after_close = body[close + 1..].trim_start();
                rest = after_close.strip_prefix(';').unwrap_or(after_close).trim_start();
            } else {
                let semi = after.find(';').ok_or_else(|| err("block: missing ';'"))?;
                let label = after[..semi].trim();
                let m = crate::tables::lookup(label)
                    .ok_or_else(|| err(&format!("unknown table label {label:?}")))?;
                stmts.push(Stmt::Block(name, m));
                rest = after[semi + 1..].trim_start();
            }
        } else if let Some(r) = rest.strip_prefix("truncate") {
            let semi = r.find(';').ok_or_else(|| err("truncate: missing ';'"))?;
            let spec = r[..semi].trim();
            let (b, v) = spec
                .split_once('.')
                .ok_or_else(|| err("truncate: expected block.vertex"))?;
            stmts.push(Stmt::Truncate(b.trim().to_string(), v.trim().to_string()));
            rest = r[semi + 1..].trim_start();
        } else if let Some(r) = rest.strip_prefix("glue") {
            let semi = r.find(';').ok_or_else(|| err("glue: missing ';'"))?;
            let spec = r[..semi].trim();
            let (pair, map_part) = match spec.find(" map ") {
                Some(i) => (&spec[..i], Some(&spec[i + 5..])),
                None => (spec, None),
            };
            let (lhs, rhs) = pair
                .split_once('~')
                .ok_or_else(|| err("glue: expected b1.v1 ~ b2.v2"))?;
            let (b1, v1) = lhs
                .trim()
                .split_once('.')
                .ok_or_else(|| err("glue: expected block.vertex"))?;
            let (b2, v2) = rhs
                .trim()
                .split_once('.')
                .ok_or_else(|| err("glue: expected block.vertex"))?;
            let mut phi = Vec::new();
            if let Some(mp) = map_part {
                for item in mp.split_whitespace() {
                    let (a, b) = item
                        .split_once("->")
                        .ok_or_else(|| err("glue map: expected a->b"))?;
                    phi.push((a.to_string(), b.to_string()));
                }
            }
            stmts.push(Stmt::Glue(
                b1.trim().to_string(),
                v1.trim().to_string(),
                b2.trim().to_string(),
                v2.trim().to_string(),
                phi,
            ));
            rest = r[semi + 1..].trim_start();
        } else if let Some(r) = rest.strip_prefix(';') {
            rest = r.trim_start();
        } else {
            return Err(err(&format!(
                "unexpected input near {:?}",
                &rest[..rest.len().min(30)]
            )));
        }
    }
    // Assemble: forests of named single-block trees merged by gluings.
    // `forest` maps a block name to (tree index, block index inside tree).
    let mut trees: Vec<Option<BlockTree>> = Vec::new();
    let mut locate: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for s in stmts {
        match s {
            Stmt::Block(name, m) => {
                if locate.contains_key(&name) {
                    return Err(err(&format!("duplicate block {name:?}")));
                }
                let t = BlockTree::simplex(&m)?;
                locate.insert(name, (trees.len(), 0));
                trees.push(Some(t));
            }
            Stmt::Truncate(bn, v) => {
                let &(ti, bi) = locate
                    .get(&bn)
                    .ok_or_else(|| err(&format!("unknown block {bn:?}")))?;
                trees[ti]
                    .as_mut()
                    .ok_or_else(|| err("internal"))?
                    .truncate(bi, &v)?;
            }
            Stmt::Glue(b1n, v1, b2n, v2, phi) => {
                let &(t1i, b1i) = locate
                    .get(&b1n)
                    .ok_or_else(|| err(&format!("unknown block {b1n:?}")))?;
                let &(t2i, b2i) = locate
                    .get(&b2n)
                    .ok_or_else(|| err(&format!("unknown block {b2n:?}")))?;
                if t1i == t2i {
                    return Err(err("gluing would create a cycle of blocks"));
                }
                let t1 = trees[t1i].take().ok_or_else(|| err("internal"))?;
                let t2 = trees[t2i].take().ok_or_else(|| err("internal"))?;
                let off = t1.blocks().len();
                let phi = if phi.is_empty() {
                    // Identity map on names when omitted.
                    let l1 = t1.link_matrix(b1i, t1.node_index(b1i, &v1)?);
                    l1.names()
                        .iter()
                        .map(|s| (s.clone(), s.clone()))
                        .collect()
                } else {
                    phi
                };
                let glued = BlockTree::glue(&t1, b1i, &v1, &t2, b2i, &v2, &phi)?;
                // Rehome all blocks of t2 into the merged tree.
                for (_, loc) in locate.iter_mut() {
                    if loc.0 == t2i {
                        *loc = (t1i, loc.1 + off);
                    }
                }
                trees[t1i] = Some(glued);
            }
        }
    }
    let mut remaining: Vec<BlockTree> = trees.into_iter().flatten().collect();
    match remaining.len() {
        1 => Ok(remaining.pop().unwrap()),
        0 => Err(err("empty tree description")),
        _ => Err(err("blocks do not form a single connected tree")),
    }
}

/// Serializes a tree to the DSL (blocks inline).
pub fn tree_to_dsl(t: &BlockTree) -> String {
    let mut s = String::new();
    for (i, b) in t.blocks().iter().enumerate() {
        s.push_str(&format!("block b{i} = {{ "));
        s.push_str(&b.matrix.to_dsl().replace('\n', " "));
        s.push_str("};\n");
    }
    for (i, b) in t.blocks().iter().enumerate() {
        for (v, st) in b.states.iter().enumerate() {
            let vname = &b.matrix.names()[v];
            match st {
                VertexState::TruncatedFree => {
                    s.push_str(&format!("truncate b{i}.{vname};\n"));
                }
                VertexState::Glued { block, vertex, phi } if (i, v) < (*block, *vertex) => {
                    let pname = &t.blocks()[*block].matrix.names()[*vertex];
                    let map: Vec<String> = phi
                        .iter()
                        .map(|(&a, &c)| {
                            format!(
                                "{}->{}",
                                b.matrix.names()[a],
                                t.blocks()[*block].matrix.names()[c]
                            )
                        })
                        .collect();
                    s.push_str(&format!(
                        "glue b{i}.{vname} ~ b{}.{pname} map {};\n",
                        block,
                        map.join(" ")
                    ));
                }
                _ => {}
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{glued_prism, k23_exceptional, pan, prism};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn simplex_basics() {
        let w = pan(&[3; 8], 3);
        let t = BlockTree::simplex(&w).unwrap();
        assert_eq!(t.dim(), 8);
        assert_eq!(t.facets().len(), 9);
        assert!(BlockTree::simplex(&crate::tables::path(&[3])).is_err());
    }

    #[test]
    fn truncation_and_e_plus() {
        let w = pan(&[3; 8], 3);
        let mut t = BlockTree::simplex(&w).unwrap();
        t.truncate(0, "i").unwrap();
        assert!(t.truncate(0, "i").is_err());
        let g = t.coxeter_group();
        assert_eq!(g.matrix.rank(), 10);
        // Nine diagram edges; the truncation facet adds only right angles.
        assert_eq!(g.e_plus(), 9);
        // The truncation facet is non-adjacent to the opposite facet, giving
        // an infinity entry in the Coxeter matrix.
        let f = t.facets();
        let tv = f.truncation(0, w.node_index("i").unwrap());
        let opp = f.class(0, w.node_index("i").unwrap());
        assert_eq!(g.matrix.label(tv, opp), Label::Infinity);
        assert!(!g.adjacent[tv * g.matrix.rank() + opp]);
    }

    #[test]
    fn double_truncation_commutes() {
        let w = crate::tables::two_lanner_rank6()
            .into_iter()
            .find(|(n, _)| n == "W5t3")
            .unwrap()
            .1;
        let mut t1 = BlockTree::simplex(&w).unwrap();
        let mut t2 = t1.clone();
        // W5t3 has Lannér vertices at the blue nodes; truncate two of them.
        t1.truncate(0, "e").unwrap();
        t1.truncate(0, "f").unwrap();
        t2.truncate(0, "f").unwrap();
        t2.truncate(0, "e").unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn glue_and_split_round_trip() {
        let g = glued_prism(8, 2);
        let circuits = g.prismatic_circuits();
        assert_eq!(circuits.len(), 1);
        assert_eq!(circuits[0].class, CircuitClass::Essential);
        let split = g.split(&circuits[0]).unwrap();
        assert!(!split.degenerate);
        assert_eq!(split.left.certificate(), prism(8).certificate());
        assert_eq!(split.right.certificate(), prism(8).certificate());
    }

    #[test]
    fn prism_circuit_is_non_essential() {
        let p = prism(8);
        let circuits = p.prismatic_circuits();
        assert_eq!(circuits.len(), 1);
        assert_eq!(circuits[0].class, CircuitClass::NonEssential);
        assert!(matches!(
            circuits[0].kind,
            CircuitKind::TruncationFacet { .. }
        ));
        // W_delta is the affine 8-cycle.
        assert_eq!(
            crate::classify::match_table(&circuits[0].link).as_deref(),
            Some("~A7")
        );
        let sp = p.split(&circuits[0]).unwrap();
        assert!(sp.degenerate);
        // The pyramid cap has group W_delta x ~A1.
        let comps = sp.right.coxeter_group().matrix.components();
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn gluings_of_pan8_dedup_to_five() {
        let p = prism(8);
        let glued =
            BlockTree::enumerate_gluings(&p, 0, "i", &p.clone(), 0, "i").unwrap();
        assert_eq!(glued.len(), 5);
        for g in &glued {
            assert_eq!(g.e_plus(), 10);
        }
    }

    #[test]
    fn glue_rejects_bad_phi() {
        let w = pan(&[3; 8], 3);
        let t1 = BlockTree::simplex(&w).unwrap();
        let t2 = t1.clone();
        // Transpose two adjacent cycle nodes while fixing the rest: not a
        // graph automorphism of the 8-cycle, so some label must break.
        let names = w.names().to_vec();
        let phi: Vec<(String, String)> = names[..8]
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let target = match i {
                    0 => names[1].clone(),
                    1 => names[0].clone(),
                    _ => s.clone(),
                };
                (s.clone(), target)
            })
            .collect();
        let r = BlockTree::glue(&t1, 0, "i", &t2, 0, "i", &phi);
        assert!(matches!(r, Err(PolytopeError::PhiNotLabelPreserving(_))));
    }

    #[test]
    fn vertex_links_and_perfection() {
        let w = pan(&[3; 8], 3);
        let t = BlockTree::simplex(&w).unwrap();
        let link = t.vertex_link(0, "i").unwrap();
        assert_eq!(crate::classify::match_table(&link).as_deref(), Some("~A7"));
        let rep = t.perfection(tol());
        assert!(rep.two_perfect);
        assert!(!rep.perfect);
        // Truncating the affine vertex leaves a quasi-perfect polytope.
        let p = prism(8);
        let rep = p.perfection(tol());
        assert!(rep.quasi_perfect);
        assert!(rep.two_perfect);
    }

    #[test]
    fn k23_truncated_vertices_count() {
        let w = k23_exceptional();
        let mut t = BlockTree::simplex(&w).unwrap();
        // The three degree-2 nodes are the flexible affine vertices.
        for name in ["a", "c", "e"] {
            t.truncate(0, name).unwrap();
        }
        let circuits = t.prismatic_circuits();
        assert_eq!(circuits.len(), 3);
        assert!(circuits
            .iter()
            .all(|c| c.class == CircuitClass::NonEssential));
        let verts = t.vertices();
        // 2 intact + 3 truncation facets x 4 new vertices each.
        assert_eq!(verts.len(), 2 + 12);
    }

    #[test]
    fn dsl_round_trip() {
        let g = glued_prism(6, 1);
        let dsl = tree_to_dsl(&g);
        let parsed = parse_tree(&dsl).unwrap();
        assert_eq!(parsed.certificate(), g.certificate());
        let named = parse_tree(
            "block p = W8t;\ntruncate p.i;\n",
        )
        .unwrap();
        assert_eq!(named.certificate(), prism(8).certificate());
    }

    #[test]
    fn e_plus_recursion_on_gluing() {
        // Flexible interface (affine cycle): drop of d.
        let d = 8;
        let g = glued_prism(d, 1);
        let single = prism(d);
        assert_eq!(
            g.e_plus(),
            single.e_plus() + single.e_plus() - d
        );
    }
}
