//! Numerical realization of Coxeter polytopes: simplices from Cartan
//! matrices, geometric truncation via polar hyperplanes, projective gluing
//! with bending, and verification of Vinberg's conditions.
//!
//! A realized polytope stores one linear functional and one pole per facet,
//! normalized so the functional has unit sup-norm; the reflection in facet s
//! is `Id - alpha_s (x) b_s` with `alpha_s(b_s) = 2`.

use crate::cartan::{
    self, cyclic_product, normalized_cyclic_product, product_to_label,
    CartanMatrix, PfType,
};
use crate::deform::{self, AxisKind};
use crate::diagram::{CoxeterMatrix, Label};
use crate::polytope::{BlockTree, Facets, PolytopeVertex, VertexOrigin, VertexState};
use crate::Tolerance;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("cartan: {0}")]
    Cartan(#[from] crate::cartan::CartanError),
    #[error("polytope: {0}")]
    Polytope(#[from] crate::polytope::PolytopeError),
    #[error("deformation: {0}")]
    Deform(#[from] crate::deform::DeformError),
    #[error("a loxodromic realization needs full rank; the matrix has rank {0} < {1}")]
    RankDeficient(usize, usize),
    #[error("vertex {0:?} is not simple or its solve failed")]
    VertexSolve(String),
    #[error("vertex is not truncatable")]
    NotTruncatable,
    #[error("geometric and spectral truncatability tests disagree at vertex {0:?}")]
    TruncatabilityMismatch(String),
    #[error("interface links are not equivalent under phi (residual {0:.3e})")]
    InterfaceMismatch(f64),
    #[error("the requested point lies on an R* puncture (axis {0})")]
    Puncture(String),
    #[error("coordinate vector has length {got}, expected {want}")]
    PointLength { got: usize, want: usize },
    #[error("bending vector has length {got}, expected {want}")]
    BendingLength { got: usize, want: usize },
    #[error("K23 constraint violated: axis values sum to {0:.3e}, expected 0")]
    ConstraintViolated(f64),
    #[error("measured invariant {name} = {got:.12} differs from requested {want:.12}")]
    EvaluationMismatch { name: String, got: f64, want: f64 },
    #[error("ill-conditioned interface frame (condition {0:.3e})")]
    IllConditioned(f64),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizedVertex {
    pub point: Vec<f64>,
    pub incident: Vec<usize>,
    pub origin: VertexOrigin,
}

#[derive(Debug, Clone)]
pub struct RealizedPolytope {
    tree: BlockTree,
    facets: Facets,
    facet_alpha: Vec<DVector<f64>>,
    facet_pole: Vec<DVector<f64>>,
    /// Per block, per node: functional and pole in global coordinates.
    block_alpha: Vec<Vec<DVector<f64>>>,
    block_pole: Vec<Vec<DVector<f64>>>,
    trunc_data: BTreeMap<(usize, usize), (DVector<f64>, DVector<f64>)>,
    vertices: Vec<(VertexOrigin, Vec<usize>, DVector<f64>)>,
    cartan: CartanMatrix,
    tol: Tolerance,
}

fn unit_supnorm(alpha: &DVector<f64>, pole: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let m = alpha.amax();
    if m == 0.0 {
        return (alpha.clone(), pole.clone());
    }
    (alpha / m, pole * m)
}

/// One-dimensional kernel of a set of functionals (rows); `None` when the
/// kernel is not exactly one-dimensional.
fn kernel_point(rows: &[&DVector<f64>], tol: Tolerance) -> Option<DVector<f64>> {
    let n = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref()?;
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
    let small: Vec<usize> = (0..n.min(rows.len()))
        .filter(|&i| sv[i] <= tol.abs(smax))
        .collect();
    let kernel_dim = n - rows.len().min(n) + small.len();
    if kernel_dim != 1 {
        return None;
    }
    // Kernel direction: last row of V^T (or the row for the smallest sv).
    let idx = if small.is_empty() {
        // rows.len() == n-1 exactly determined case: v_t has n rows? svd of
        // (n-1) x n: v_t is (n-1) x n; the kernel is orthogonal to all rows.
        // Recover by QR-based complement.
        return kernel_complement(&m);
    } else {
        small[0]
    };
    Some(vt.row(idx).transpose())
}

/// Kernel of an (n-1) x n matrix of full row rank via completion.
fn kernel_complement(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = m.ncols();
    // Solve by appending a random-ish stable row and inverting.
    let mut best: Option<(f64, DVector<f64>)> = None;
    for k in 0..n {
        let mut big = DMatrix::zeros(n, n);
        for i in 0..m.nrows() {
            big.row_mut(i).copy_from(&m.row(i));
        }
        big[(n - 1, k)] = 1.0;
        let lu = big.clone().lu();
        if let Some(inv) = lu.try_inverse() {
            let x = inv.column(n - 1).into_owned();
            let residual = (m * &x).amax();
            let score = residual / x.amax().max(1e-300);
            if best.as_ref().map(|(s, _)| score < *s).unwrap_or(true) {
                best = Some((score, x));
            }
        }
    }
    best.map(|(_, x)| x.normalize())
}

/// Functional vanishing on the span of the given vectors (assumed to span a
/// hyperplane); `None` if the span is not a hyperplane. This is the kernel of
/// the matrix whose rows are the given vectors.
fn hyperplane_functional(poles: &[&DVector<f64>], tol: Tolerance) -> Option<DVector<f64>> {
    kernel_point(poles, tol)
}

impl RealizedPolytope {
    pub fn dim(&self) -> usize {
        self.tree.dim()
    }

    pub fn tree(&self) -> &BlockTree {
        &self.tree
    }

    pub fn facet_count(&self) -> usize {
        self.facet_alpha.len()
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn alpha(&self, f: usize) -> &DVector<f64> {
        &self.facet_alpha[f]
    }

    pub fn pole(&self, f: usize) -> &DVector<f64> {
        &self.facet_pole[f]
    }

    pub fn vertices(&self) -> Vec<RealizedVertex> {
        self.vertices
            .iter()
            .map(|(o, inc, p)| RealizedVertex {
                point: p.iter().copied().collect(),
                incident: inc.clone(),
                origin: *o,
            })
            .collect()
    }

    /// The reflection matrix in facet `f`.
    pub fn reflection(&self, f: usize) -> DMatrix<f64> {
        let n = self.facet_alpha[f].len();
        let id = DMatrix::identity(n, n);
        id - &self.facet_pole[f] * self.facet_alpha[f].transpose()
    }

    /// Rebalances the global frame so the vertex cloud is isotropic: bending
    /// and gluing squash the assembled polytope toward the interface, which
    /// inflates the (functional, pole) pairs of the far facets. Whitening the
    /// vertex second moment restores moderate reflection norms without
    /// changing the projective class or any pairing.
    fn balance_frame(&mut self) -> Result<(), RealizeError> {
        for _ in 0..3 {
            if self.vertices.is_empty() {
                return Ok(());
            }
            let dim = self.facet_pole[0].len();
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for (_, _, x) in &self.vertices {
                let v = x / x.norm();
                m += &v * v.transpose();
            }
            m /= self.vertices.len() as f64;
            let eig = m.symmetric_eigen();
            let emax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
            let emin = eig.eigenvalues.iter().fold(f64::MAX, |a, &b| a.min(b));
            if !(emax > 0.0) || emin <= emax * 1e-12 {
                return Ok(());
            }
            if emax / emin < 25.0 {
                return Ok(());
            }
            let q = &eig.eigenvectors;
            let mut t = DMatrix::<f64>::zeros(dim, dim);
            let mut t_inv = DMatrix::<f64>::zeros(dim, dim);
            let geo = (eig.eigenvalues.iter().map(|e| e.ln()).sum::<f64>()
                / dim as f64)
                .exp();
            for k in 0..dim {
                let col = q.column(k);
                let scale = (geo / eig.eigenvalues[k]).sqrt();
                for i in 0..dim {
                    for j in 0..dim {
                        t[(i, j)] += scale * col[i] * col[j];
                        t_inv[(i, j)] += col[i] * col[j] / scale;
                    }
                }
            }
            let t_inv_t = t_inv.transpose();
            for ba in self.block_alpha.iter_mut() {
                for a in ba.iter_mut() {
                    *a = &t_inv_t * &*a;
                }
            }
            for bp in self.block_pole.iter_mut() {
                for p in bp.iter_mut() {
                    *p = &t * &*p;
                }
            }
            for (a, p) in self.trunc_data.values_mut() {
                *a = &t_inv_t * &*a;
                *p = &t * &*p;
            }
            self.rebuild()?;
        }
        Ok(())
    }

    fn rebuild(&mut self) -> Result<(), RealizeError> {
        let facets = self.tree.facets();
        let n = facets.len();
        let mut alphas: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut poles: Vec<DVector<f64>> = Vec::with_capacity(n);
        for kind in &facets.kinds {
            let (a, mut p) = match kind {
                crate::polytope::FacetKind::Class(members) => {
                    let (b, s) = members[0];
                    unit_supnorm(&self.block_alpha[b][s], &self.block_pole[b][s])
                }
                crate::polytope::FacetKind::Truncation { block, vertex } => {
                    let (a, p) = self
                        .trunc_data
                        .get(&(*block, *vertex))
                        .ok_or_else(|| RealizeError::Other("missing truncation data".into()))?;
                    unit_supnorm(a, p)
                }
            };
            // Absorb the rounding drift of the alignment transforms so the
            // pairing is exactly 2 (the reflection moves by O(drift)).
            let pairing = a.dot(&p);
            if (pairing - 2.0).abs() < 1e-6 {
                p *= 2.0 / pairing;
            }
            alphas.push(a);
            poles.push(p);
        }
        let entries = DMatrix::from_fn(n, n, |i, j| alphas[i].dot(&poles[j]));
        let names: Vec<String> = self.tree.coxeter_group().matrix.names().to_vec();
        self.cartan = CartanMatrix::new_unchecked(names, entries);
        self.facets = facets;
        self.facet_alpha = alphas;
        self.facet_pole = poles;
        self.vertices = self.solve_vertices()?;
        Ok(())
    }

    fn solve_vertices(&self) -> Result<Vec<(VertexOrigin, Vec<usize>, DVector<f64>)>, RealizeError> {
        let combinatorial: Vec<PolytopeVertex> = self.tree.vertices();
        let n = self.facet_alpha.len();
        let mut out = Vec::with_capacity(combinatorial.len());
        for v in combinatorial {
            let rows: Vec<&DVector<f64>> =
                v.incident.iter().map(|&f| &self.facet_alpha[f]).collect();
            let mut x = kernel_point(&rows, self.tol)
                .ok_or_else(|| RealizeError::VertexSolve(format!("{:?}", v.origin)))?;
            // Representative inside the polytope cone: the non-incident
            // facet functionals must be negative.
            let mut best = 0.0f64;
            for f in 0..n {
                if v.incident.contains(&f) {
                    continue;
                }
                let val = self.facet_alpha[f].dot(&x);
                if val.abs() > best.abs() {
                    best = val;
                }
            }
            if best > 0.0 {
                x = -x;
            }
            out.push((v.origin, v.incident, x));
        }
        Ok(out)
    }

    /// The Cartan matrix of the vertex link: the sub-block on the incident
    /// facets of an intact vertex.
    pub fn vertex_link_cartan(
        &self,
        block: usize,
        vertex: &str,
    ) -> Result<CartanMatrix, RealizeError> {
        let v = self.tree.node_index(block, vertex)?;
        let m = &self.tree.blocks()[block].matrix;
        let nodes: Vec<usize> = (0..m.rank()).filter(|&s| s != v).collect();
        let names: Vec<String> = nodes.iter().map(|&s| m.names()[s].clone()).collect();
        let entries = DMatrix::from_fn(nodes.len(), nodes.len(), |i, j| {
            self.block_alpha[block][nodes[i]].dot(&self.block_pole[block][nodes[j]])
        });
        Ok(CartanMatrix::new_unchecked(names, entries))
    }

    /// Both truncatability tests: the geometric one (poles span a hyperplane
    /// meeting each incident edge's relative interior) and the spectral one
    /// (link of negative type and full rank). They must agree.
    pub fn is_truncatable(&self, block: usize, vertex: &str) -> Result<bool, RealizeError> {
        let v = self.tree.node_index(block, vertex)?;
        let link = self.vertex_link_cartan(block, vertex)?;
        let d = self.dim();
        let spectral = {
            let t = cartan::pf_type(&link, self.tol);
            t.len() == 1 && t[0].pf_type == PfType::Negative && t[0].rank == d
        };
        let geometric = self.geometric_truncatable(block, v)?;
        if spectral != geometric {
            return Err(RealizeError::TruncatabilityMismatch(vertex.to_string()));
        }
        Ok(spectral)
    }

    fn geometric_truncatable(&self, block: usize, v: usize) -> Result<bool, RealizeError> {
        let m = &self.tree.blocks()[block].matrix;
        let nodes: Vec<usize> = (0..m.rank()).filter(|&s| s != v).collect();
        let poles: Vec<&DVector<f64>> = nodes.iter().map(|&s| &self.block_pole[block][s]).collect();
        let Some(psi) = hyperplane_functional(&poles, self.tol) else {
            return Ok(false);
        };
        // The realized vertex and its polytope neighbors.
        let me = self
            .vertices
            .iter()
            .find(|(o, _, _)| *o == (VertexOrigin::Block { block, vertex: v }))
            .ok_or_else(|| RealizeError::VertexSolve("vertex not realized".into()))?;
        let d = self.dim();
        let scale = |x: &DVector<f64>| psi.dot(x) / (x.norm().max(1e-300));
        let sv = scale(&me.2);
        let eps = self.tol.abs(1.0);
        if sv.abs() <= eps {
            return Ok(false);
        }
        for (o, inc, p) in &self.vertices {
            if o == &me.0 {
                continue;
            }
            let shared = inc.iter().filter(|f| me.1.contains(f)).count();
            if shared != d - 1 {
                continue;
            }
            let sw = scale(p);
            if sw.abs() <= eps || sv * sw > 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Cuts a truncatable vertex: the new facet has support spanned by the
    /// incident poles and pole at the vertex itself, normalized so the pairing
    /// is 2. The ridges on the new facet are right angles by construction.
    pub fn truncate(&mut self, block: usize, vertex: &str) -> Result<(), RealizeError> {
        if !self.is_truncatable(block, vertex)? {
            return Err(RealizeError::NotTruncatable);
        }
        let v = self.tree.node_index(block, vertex)?;
        let m = &self.tree.blocks()[block].matrix;
        let nodes: Vec<usize> = (0..m.rank()).filter(|&s| s != v).collect();
        let poles: Vec<&DVector<f64>> = nodes.iter().map(|&s| &self.block_pole[block][s]).collect();
        let psi = hyperplane_functional(&poles, self.tol)
            .ok_or(RealizeError::NotTruncatable)?;
        let x_v = self
            .vertices
            .iter()
            .find(|(o, _, _)| *o == (VertexOrigin::Block { block, vertex: v }))
            .map(|(_, _, p)| p.clone())
            .ok_or_else(|| RealizeError::VertexSolve("vertex not realized".into()))?;
        let pairing = psi.dot(&x_v);
        let alpha_new = &psi * (2.0 / pairing);
        self.tree.truncate(block, vertex)?;
        self.trunc_data.insert((block, v), (alpha_new, x_v));
        self.rebuild()
    }

    /// Measured normalized cyclic product on a circuit given in block-node
    /// indices, evaluated on the full Cartan matrix through the facet classes.
    pub fn measured_r(&self, block: usize, circuit: &cartan::Circuit) -> Result<f64, RealizeError> {
        let mapped = cartan::Circuit(
            circuit
                .0
                .iter()
                .map(|&s| self.facets.class(block, s))
                .collect(),
        );
        Ok(normalized_cyclic_product(&self.cartan, &mapped, self.tol)?)
    }

    /// Cyclic product on facet indices.
    pub fn facet_cyclic_product(&self, facet_circuit: &[usize]) -> f64 {
        cyclic_product(&self.cartan, &cartan::Circuit(facet_circuit.to_vec()))
    }

    pub fn facets(&self) -> &Facets {
        &self.facets
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Coxeter matrix induced by a Cartan matrix through its pairwise products.
fn coxeter_of_cartan(a: &CartanMatrix, tol: Tolerance) -> CoxeterMatrix {
    let n = a.rank();
    let eps = tol.abs(a.scale());
    let mut edges: Vec<(usize, usize, Label)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = a.get(i, j) * a.get(j, i);
            if p.abs() <= eps {
                continue;
            }
            let l = product_to_label(p, eps * 4.0).unwrap_or(Label::Infinity);
            if l.is_edge() {
                edges.push((i, j, l));
            }
        }
    }
    CoxeterMatrix::from_edges(a.names(), &edges).expect("cartan-induced diagram")
}

/// Realizes the Coxeter simplex of a Cartan matrix: functionals are the
/// canonical dual basis, poles the matrix columns, vertices the coordinate
/// rays. For an irreducible negative-type matrix the rank must be full.
pub fn realize_simplex(a: &CartanMatrix, tol: Tolerance) -> Result<RealizedPolytope, RealizeError> {
    cartan::validate_cartan(a.names().to_vec(), a.entries().clone(), tol)?;
    let comps = cartan::pf_type(a, tol);
    if comps.len() == 1 && comps[0].pf_type == PfType::Negative && comps[0].rank < a.rank() {
        return Err(RealizeError::RankDeficient(comps[0].rank, a.rank()));
    }
    realize_simplex_raw(a, tol)
}

/// Same construction without Cartan validation; used for fault injection and
/// diagnostics.
pub fn realize_simplex_raw(
    a: &CartanMatrix,
    tol: Tolerance,
) -> Result<RealizedPolytope, RealizeError> {
    let w = coxeter_of_cartan(a, tol);
    let tree = BlockTree::simplex(&w)?;
    let n = a.rank();
    let alphas: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    let poles: Vec<DVector<f64>> = (0..n).map(|j| a.entries().column(j).into_owned()).collect();
    let mut p = RealizedPolytope {
        tree,
        facets: Facets::default(),
        facet_alpha: Vec::new(),
        facet_pole: Vec::new(),
        block_alpha: vec![alphas],
        block_pole: vec![poles],
        trunc_data: BTreeMap::new(),
        vertices: Vec::new(),
        cartan: a.clone(),
        tol,
    };
    p.rebuild()?;
    Ok(p)
}

/// The Tits simplex of a Coxeter matrix.
pub fn tits_simplex(w: &CoxeterMatrix, tol: Tolerance) -> Result<RealizedPolytope, RealizeError> {
    realize_simplex(&cartan::cosine_matrix(w), tol)
}

/// Signature (positives, negatives, zeros) of the symmetric form of a
/// symmetric Cartan matrix.
pub fn signature(a: &CartanMatrix, tol: Tolerance) -> (usize, usize, usize) {
    let ev = a.entries().clone().symmetric_eigenvalues();
    let scale = ev.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    let eps = tol.abs(scale);
    let pos = ev.iter().filter(|&&x| x > eps).count();
    let neg = ev.iter().filter(|&&x| x < -eps).count();
    (pos, neg, ev.len() - pos - neg)
}

// ---------------------------------------------------------------------------
// Gluing
// ---------------------------------------------------------------------------

struct Alignment {
    g: DMatrix<f64>,
    g_inv_t: DMatrix<f64>,
}

/// Computes the projective transformation moving block-2 data so its
/// interface functionals and poles match block 1's under `phi`, composed with
/// the bending `g_u = diag(e^u, ..., e^u, e^{-du})` in the adapted frame.
#[allow(clippy::too_many_arguments)]
fn align_interface(
    alpha1: &[DVector<f64>],
    pole1: &[DVector<f64>],
    v1: usize,
    alpha2: &[DVector<f64>],
    pole2: &[DVector<f64>],
    v2: usize,
    phi: &BTreeMap<usize, usize>,
    u: f64,
    tol: Tolerance,
) -> Result<Alignment, RealizeError> {
    let n = alpha1[0].len();
    let d = n - 1;
    let delta1: Vec<usize> = (0..alpha1.len()).filter(|&s| s != v1).collect();
    let delta2: Vec<usize> = delta1.iter().map(|s| phi[s]).collect();
    // Link Cartan matrices under phi-aligned ordering.
    let a1 = DMatrix::from_fn(d, d, |i, j| alpha1[delta1[i]].dot(&pole1[delta1[j]]));
    let a2 = DMatrix::from_fn(d, d, |i, j| alpha2[delta2[i]].dot(&pole2[delta2[j]]));
    // Diagonal conjugation a2 = D a1 D^-1, solved over a spanning tree.
    let eps = tol.abs(a1.amax().max(a2.amax()));
    let mut dvec = vec![0.0f64; d];
    dvec[0] = 1.0;
    let mut seen = vec![false; d];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for j in 0..d {
            if seen[j] || a1[(i, j)].abs() <= eps {
                continue;
            }
            if a2[(i, j)].abs() <= eps {
                return Err(RealizeError::InterfaceMismatch(f64::INFINITY));
            }
            dvec[j] = dvec[i] * a1[(i, j)] / a2[(i, j)];
            if !(dvec[j] > 0.0) || !dvec[j].is_finite() {
                return Err(RealizeError::InterfaceMismatch(f64::INFINITY));
            }
            seen[j] = true;
            stack.push(j);
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(RealizeError::Other("disconnected interface link".into()));
    }
    let mut resid = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let expect = dvec[i] * a1[(i, j)] / dvec[j];
            resid = resid.max((expect - a2[(i, j)]).abs());
        }
    }
    if resid > tol.abs(a1.amax()).max(1e-9) * 1e3 {
        return Err(RealizeError::InterfaceMismatch(resid));
    }
    // Adapted frames.
    let vertex_point = |alphas: &[DVector<f64>], link: &[usize], own: usize| -> Option<DVector<f64>> {
        let rows: Vec<&DVector<f64>> = link.iter().map(|&s| &alphas[s]).collect();
        let mut x = kernel_point(&rows, tol)?;
        if alphas[own].dot(&x) > 0.0 {
            x = -x;
        }
        Some(x)
    };
    let x1 = vertex_point(alpha1, &delta1, v1)
        .ok_or_else(|| RealizeError::Other("interface vertex solve failed".into()))?;
    let x2 = vertex_point(alpha2, &delta2, v2)
        .ok_or_else(|| RealizeError::Other("interface vertex solve failed".into()))?;
    let span1: Vec<&DVector<f64>> = delta1.iter().map(|&s| &pole1[s]).collect();
    let span2: Vec<&DVector<f64>> = delta2.iter().map(|&s| &pole2[s]).collect();
    let mut psi1 = hyperplane_functional(&span1, tol)
        .ok_or_else(|| RealizeError::Other("interface poles do not span a hyperplane (R = 0?)".into()))?;
    let mut psi2 = hyperplane_functional(&span2, tol)
        .ok_or_else(|| RealizeError::Other("interface poles do not span a hyperplane (R = 0?)".into()))?;
    // P1 keeps the side away from its interface vertex; P2 is sent there.
    if psi1.dot(&x1) < 0.0 {
        psi1 = -psi1;
    }
    if psi2.dot(&x2) > 0.0 {
        psi2 = -psi2;
    }
    let mut n1 = DMatrix::zeros(n, n);
    let mut n2 = DMatrix::zeros(n, n);
    for i in 0..d {
        n1.row_mut(i).copy_from(&alpha1[delta1[i]].transpose());
        n2.row_mut(i).copy_from(&alpha2[delta2[i]].transpose());
    }
    n1.row_mut(d).copy_from(&psi1.transpose());
    n2.row_mut(d).copy_from(&psi2.transpose());
    let cond = |m: &DMatrix<f64>| {
        let svd = m.clone().svd(false, false);
        let sv = svd.singular_values;
        sv.iter().fold(0.0f64, |a, &b| a.max(b)) / sv.iter().fold(f64::MAX, |a, &b| a.min(b))
    };
    let c = cond(&n1).max(cond(&n2));
    if !c.is_finite() || c > 1e12 {
        return Err(RealizeError::IllConditioned(c));
    }
    let mu = (-(d as f64 + 1.0) * u).exp();
    let mut lambda = DMatrix::<f64>::zeros(n, n);
    let mut lambda_inv = DMatrix::<f64>::zeros(n, n);
    for i in 0..d {
        lambda[(i, i)] = 1.0 / dvec[i];
        lambda_inv[(i, i)] = dvec[i];
    }
    lambda[(d, d)] = mu;
    lambda_inv[(d, d)] = 1.0 / mu;
    let n1_inv = n1
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| RealizeError::IllConditioned(f64::INFINITY))?;
    let n2_inv = n2
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| RealizeError::IllConditioned(f64::INFINITY))?;
    // g = N1^-1 Lambda N2, and g^-1 = N2^-1 Lambda^-1 N1 assembled from the
    // factors directly to avoid inverting the composed map.
    let g = &n1_inv * &lambda * &n2;
    let g_inv = &n2_inv * &lambda_inv * &n1;
    Ok(Alignment {
        g,
        g_inv_t: g_inv.transpose(),
    })
}

/// Geometric gluing with bending parameter `u`: block 2's realization is
/// moved so the interface facets amalgamate with block 1's, composed with the
/// one-parameter diagonal action in the adapted frame.
pub fn glue(
    p1: &RealizedPolytope,
    b1: usize,
    v1: &str,
    p2: &RealizedPolytope,
    b2: usize,
    v2: &str,
    phi: &[(String, String)],
    u: f64,
) -> Result<RealizedPolytope, RealizeError> {
    let tree = BlockTree::glue(&p1.tree, b1, v1, &p2.tree, b2, v2, phi)?;
    let iv1 = p1.tree.node_index(b1, v1)?;
    let iv2 = p2.tree.node_index(b2, v2)?;
    let m1 = &p1.tree.blocks()[b1].matrix;
    let m2 = &p2.tree.blocks()[b2].matrix;
    let mut phi_idx: BTreeMap<usize, usize> = BTreeMap::new();
    for (a, b) in phi {
        phi_idx.insert(
            m1.node_index(a).expect("validated by BlockTree::glue"),
            m2.node_index(b).expect("validated by BlockTree::glue"),
        );
    }
    let al = align_interface(
        &p1.block_alpha[b1],
        &p1.block_pole[b1],
        iv1,
        &p2.block_alpha[b2],
        &p2.block_pole[b2],
        iv2,
        &phi_idx,
        u,
        p1.tol,
    )?;
    let mut block_alpha = p1.block_alpha.clone();
    let mut block_pole = p1.block_pole.clone();
    for (ba, bp) in p2.block_alpha.iter().zip(p2.block_pole.iter()) {
        block_alpha.push(ba.iter().map(|a| &al.g_inv_t * a).collect());
        block_pole.push(bp.iter().map(|p| &al.g * p).collect());
    }
    let mut trunc_data = p1.trunc_data.clone();
    let off = p1.tree.blocks().len();
    for (&(b, v), (a, p)) in &p2.trunc_data {
        trunc_data.insert((b + off, v), (&al.g_inv_t * a, &al.g * p));
    }
    let mut out = RealizedPolytope {
        tree,
        facets: p1.facets.clone(),
        facet_alpha: Vec::new(),
        facet_pole: Vec::new(),
        block_alpha,
        block_pole,
        trunc_data,
        vertices: Vec::new(),
        cartan: p1.cartan.clone(),
        tol: p1.tol,
    };
    out.rebuild()?;
    out.balance_frame()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Whole-tree realization
// ---------------------------------------------------------------------------

/// Realizes a convex-projectivizable block tree at a point of X(G) (one value
/// per axis of [`deform::coordinates`]) with the given bending values (one per
/// essential circuit, in circuit order). The measured evaluation is checked
/// against the request to 1e-9.
pub fn realize_tree(
    t: &BlockTree,
    point: &[f64],
    bending: &[f64],
    tol: Tolerance,
) -> Result<RealizedPolytope, RealizeError> {
    let geo = deform::geometrize(t, tol)?;
    if !geo.convex_projectivizable {
        return Err(RealizeError::Deform(
            deform::DeformError::NotConvexProjectivizable("circuit obstruction".into()),
        ));
    }
    let coords = deform::coordinates(t, tol)?;
    if point.len() != coords.axes.len() {
        return Err(RealizeError::PointLength {
            got: point.len(),
            want: coords.axes.len(),
        });
    }
    if bending.len() != coords.bending {
        return Err(RealizeError::BendingLength {
            got: bending.len(),
            want: coords.bending,
        });
    }
    for (a, &x) in coords.axes.iter().zip(point.iter()) {
        if a.punctured && x.abs() < 1e-12 {
            return Err(RealizeError::Puncture(a.name.clone()));
        }
    }
    for c in &coords.constraints {
        let s: f64 = c.iter().map(|&i| point[i]).sum();
        if s.abs() > 1e-9 {
            return Err(RealizeError::ConstraintViolated(s));
        }
    }
    // Per-block circuit parameters; glued circuits are transported to the
    // partner block through phi with matching orientation.
    let mut params: Vec<Vec<(cartan::Circuit, f64)>> = vec![Vec::new(); t.blocks().len()];
    for (axis, &x) in coords.axes.iter().zip(point.iter()) {
        params[axis.block].push((axis.circuit.clone(), x));
        if matches!(axis.kind, AxisKind::AffineCircuit | AxisKind::FlexibleLannerCircuit) {
            // Transport across the gluing when the circuit is an interface.
            let (b, v) = match circuit_home(t, axis) {
                Some(h) => h,
                None => continue,
            };
            if let VertexState::Glued { block, phi, .. } = &t.blocks()[b].states[v] {
                let mapped = cartan::Circuit(axis.circuit.0.iter().map(|s| phi[s]).collect());
                params[*block].push((mapped, x));
            }
        }
    }
    // Realize blocks.
    let mut singles: Vec<RealizedPolytope> = Vec::new();
    for (b, block) in t.blocks().iter().enumerate() {
        let a = cartan::build_cartan(&block.matrix, &params[b], tol)?;
        singles.push(realize_simplex(&a, tol)?);
    }
    // Bending values indexed over essential circuits in enumeration order.
    let circuits = t.prismatic_circuits();
    let mut bend_of: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut k = 0usize;
    for c in &circuits {
        if let crate::polytope::CircuitKind::GluingEdge { b1, v1, .. } = c.kind {
            let val = if c.class == crate::polytope::CircuitClass::Essential {
                let v = bending[k];
                k += 1;
                v
            } else {
                0.0
            };
            bend_of.insert((b1, v1), val);
        }
    }
    // Place blocks by BFS from block 0 in the original indexing.
    let mut placed_alpha: Vec<Option<Vec<DVector<f64>>>> = vec![None; t.blocks().len()];
    let mut placed_pole: Vec<Option<Vec<DVector<f64>>>> = vec![None; t.blocks().len()];
    placed_alpha[0] = Some(singles[0].block_alpha[0].clone());
    placed_pole[0] = Some(singles[0].block_pole[0].clone());
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(b) = queue.pop_front() {
        for (v, st) in t.blocks()[b].states.iter().enumerate() {
            if let VertexState::Glued { block, vertex, phi } = st {
                if placed_alpha[*block].is_some() {
                    continue;
                }
                let u = bend_of
                    .get(&(b, v))
                    .or_else(|| bend_of.get(&(*block, *vertex)))
                    .copied()
                    .unwrap_or(0.0);
                let al = align_interface(
                    placed_alpha[b].as_ref().unwrap(),
                    placed_pole[b].as_ref().unwrap(),
                    v,
                    &singles[*block].block_alpha[0],
                    &singles[*block].block_pole[0],
                    *vertex,
                    phi,
                    u,
                    tol,
                )?;
                placed_alpha[*block] = Some(
                    singles[*block].block_alpha[0]
                        .iter()
                        .map(|a| &al.g_inv_t * a)
                        .collect(),
                );
                placed_pole[*block] = Some(
                    singles[*block].block_pole[0]
                        .iter()
                        .map(|p| &al.g * p)
                        .collect(),
                );
                queue.push_back(*block);
            }
        }
    }
    if placed_alpha.iter().any(|p| p.is_none()) {
        return Err(RealizeError::Other("gluing graph is not connected".into()));
    }
    // Assemble with truncations still pending, then cut.
    let mut pending = t.clone();
    let mut to_truncate: Vec<(usize, String)> = Vec::new();
    for (bi, b) in t.blocks().iter().enumerate() {
        for (v, st) in b.states.iter().enumerate() {
            if *st == VertexState::TruncatedFree {
                to_truncate.push((bi, b.matrix.names()[v].clone()));
            }
        }
    }
    for (bi, name) in &to_truncate {
        // Reset to intact; geometric truncation will re-apply it.
        let v = pending.node_index(*bi, name)?;
        pending.blocks_mut()[*bi].states[v] = VertexState::Intact;
    }
    let mut p = RealizedPolytope {
        tree: pending,
        facets: Facets::default(),
        facet_alpha: Vec::new(),
        facet_pole: Vec::new(),
        block_alpha: placed_alpha.into_iter().map(|x| x.unwrap()).collect(),
        block_pole: placed_pole.into_iter().map(|x| x.unwrap()).collect(),
        trunc_data: BTreeMap::new(),
        vertices: Vec::new(),
        cartan: singles[0].cartan.clone(),
        tol,
    };
    p.rebuild()?;
    p.balance_frame()?;
    for (bi, name) in &to_truncate {
        p.truncate(*bi, name)?;
    }
    // Measured evaluation must reproduce the request.
    for (axis, &want) in coords.axes.iter().zip(point.iter()) {
        let got = p.measured_r(axis.block, &axis.circuit)?;
        if (got - want).abs() > 1e-9 {
            return Err(RealizeError::EvaluationMismatch {
                name: axis.name.clone(),
                got,
                want,
            });
        }
    }
    Ok(p)
}

fn circuit_home(t: &BlockTree, axis: &deform::Axis) -> Option<(usize, usize)> {
    // The vertex of axis.block whose link carries the circuit: the unique
    // node not on the circuit whose deletion leaves the cycle.
    let m = &t.blocks()[axis.block].matrix;
    (0..m.rank()).find(|v| !axis.circuit.0.contains(v)).map(|v| (axis.block, v))
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VertexLinkReport {
    pub origin: VertexOrigin,
    pub pf_type: PfType,
    pub link_rank: usize,
    /// elliptic / parabolic / loxodromic
    pub spectral_class: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub failures: Vec<String>,
    pub max_pairing_residual: f64,
    pub max_involution_residual: f64,
    pub vertex_links: Vec<VertexLinkReport>,
    pub geometrically_finite: bool,
    pub convex_cocompact: bool,
    pub finite_volume: bool,
    /// Residual of Gram-form invariance when the Cartan matrix is symmetric.
    pub gram_invariance_residual: Option<f64>,
}

/// Checks all realized-polytope invariants: the pairing normalization,
/// involutivity of the reflections, Vinberg's pair conditions, recovered
/// ridge labels, vertex incidences, and the vertex-link spectral classes
/// driving the geometric-finiteness flags.
pub fn verify_polytope(p: &RealizedPolytope) -> VerifyReport {
    let tol = p.tol;
    let mut failures: Vec<String> = Vec::new();
    let n = p.facet_count();
    let dim_n = p.facet_alpha[0].len();
    // Residuals are measured relative to the facet's reflection norm: a
    // strong (N)-type pair forces `|b||alpha|` large in any frame, and f64
    // cannot certify such a reflection to an absolute 1e-10.
    let facet_scale =
        |f: usize| -> f64 { (p.alpha(f).amax() * p.pole(f).amax()).max(1.0) };
    let mut max_pair = 0.0f64;
    for f in 0..n {
        let r = (p.alpha(f).dot(p.pole(f)) - 2.0).abs() / facet_scale(f);
        max_pair = max_pair.max(r);
        if r > 1e-10 {
            failures.push(format!("alpha_s(b_s) != 2 at facet {f} (residual {r:.3e})"));
        }
    }
    let mut max_inv = 0.0f64;
    let id = DMatrix::<f64>::identity(dim_n, dim_n);
    for f in 0..n {
        let s = p.reflection(f);
        let r = (&s * &s - &id).amax() / facet_scale(f).powi(2);
        max_inv = max_inv.max(r);
        if r > 1e-10 {
            failures.push(format!("sigma^2 != Id at facet {f} (residual {r:.3e})"));
        }
    }
    // Pair conditions and label recovery.
    let a = p.cartan();
    let eps = tol.abs(a.scale());
    let group = p.tree.coxeter_group();
    for i in 0..n {
        for j in (i + 1)..n {
            let x = a.get(i, j);
            let y = a.get(j, i);
            // Individual entries are gauge-dependent; the product is not.
            // A pair counts as zero when the product vanishes, and otherwise
            // both entries must be negative.
            let prod = x * y;
            let both_zero = prod.abs() <= tol.abs(1.0);
            let both_neg = x < 0.0 && y < 0.0;
            if !(both_zero || both_neg) {
                failures.push(format!(
                    "pair condition (signs) fails at ({i},{j}): {x:.3e}, {y:.3e}"
                ));
                continue;
            }
            if !both_zero && !cartan::admissible_product(prod, eps * 8.0) {
                failures.push(format!(
                    "pair condition (product) fails at ({i},{j}): product {prod:.6}"
                ));
            }
            let expected = group.matrix.label(i, j);
            let adjacent = group.adjacent[i * n + j];
            if adjacent {
                match expected {
                    Label::Finite(m) => {
                        let target = 4.0 * (std::f64::consts::PI / m as f64).cos().powi(2);
                        if (prod - target).abs() > eps.max(1e-8) * 8.0 {
                            failures.push(format!(
                                "ridge ({i},{j}) label {m} not reproduced: product {prod:.9}"
                            ));
                        }
                    }
                    Label::Infinity => {
                        if prod < 4.0 - eps {
                            failures.push(format!(
                                "ridge ({i},{j}) labeled infinity has product {prod:.9} < 4"
                            ));
                        }
                    }
                }
            } else if !both_zero && prod < 4.0 - eps {
                failures.push(format!(
                    "non-adjacent pair ({i},{j}) has product {prod:.9} in (0, 4)"
                ));
            }
        }
    }
    // Vertex incidences.
    for (o, inc, x) in &p.vertices {
        let xs = x.amax().max(1e-300);
        for f in 0..n {
            let v = p.alpha(f).dot(x) / xs;
            if inc.contains(&f) {
                if v.abs() > 1e-8 {
                    failures.push(format!(
                        "vertex {o:?} not on incident facet {f} (value {v:.3e})"
                    ));
                }
            } else if v > -1e-10 {
                failures.push(format!(
                    "vertex {o:?} not strictly inside facet {f} (value {v:.3e})"
                ));
            }
        }
    }
    // Vertex links.
    let d = p.dim();
    let mut links = Vec::new();
    let mut cc = true;
    let mut fv = true;
    for (o, inc, _) in &p.vertices {
        let sub = p.cartan.restrict(inc);
        let comps = cartan::pf_type(&sub, tol);
        let all_pos = comps.iter().all(|c| c.pf_type == PfType::Positive);
        let total_rank: usize = comps.iter().map(|c| c.rank).sum();
        let spectral_class = if all_pos {
            "elliptic"
        } else if comps.iter().all(|c| c.pf_type == PfType::Zero) && total_rank == d - 1 {
            "parabolic"
        } else if comps.len() == 1
            && comps[0].pf_type == PfType::Negative
            && comps[0].rank == d
        {
            "loxodromic"
        } else {
            "mixed"
        };
        match spectral_class {
            "elliptic" => {}
            "parabolic" => {
                cc = false;
            }
            "loxodromic" => {
                fv = false;
            }
            _ => {
                cc = false;
                fv = false;
            }
        }
        let worst = comps
            .iter()
            .min_by(|a, b| {
                let rank_of = |t: PfType| match t {
                    PfType::Negative => 0,
                    PfType::Zero => 1,
                    PfType::Positive => 2,
                };
                rank_of(a.pf_type).cmp(&rank_of(b.pf_type))
            })
            .map(|c| c.pf_type)
            .unwrap_or(PfType::Positive);
        links.push(VertexLinkReport {
            origin: *o,
            pf_type: worst,
            link_rank: total_rank,
            spectral_class: spectral_class.to_string(),
        });
    }
    // Gram-form invariance for symmetric Cartan matrices with spanning poles.
    let gram = if p.cartan.is_symmetric(tol) && n >= dim_n {
        let pm = DMatrix::from_fn(dim_n, n.min(dim_n), |i, j| p.facet_pole[j][i]);
        pm.clone().lu().try_inverse().map(|pinv| {
            let amat = DMatrix::from_fn(dim_n, dim_n, |i, j| p.cartan.get(i, j));
            let b = pinv.transpose() * amat * pinv;
            let mut worst = 0.0f64;
            for f in 0..n {
                let s = p.reflection(f);
                let r = (s.transpose() * &b * &s - &b).amax() / b.amax().max(1e-300);
                worst = worst.max(r);
            }
            if worst > 1e-9 {
                failures.push(format!("Gram form not invariant (residual {worst:.3e})"));
            }
            worst
        })
    } else {
        None
    };
    VerifyReport {
        ok: failures.is_empty(),
        failures,
        max_pairing_residual: max_pair,
        max_involution_residual: max_inv,
        vertex_links: links,
        geometrically_finite: true,
        convex_cocompact: cc,
        finite_volume: fv,
        gram_invariance_residual: gram,
    }
}

// ---------------------------------------------------------------------------
// Orbit sampling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub elements: usize,
    pub max_word_length: usize,
    /// Words whose translate of an interior sample landed strictly inside the
    /// polytope (an overlap violation).
    pub overlaps: Vec<String>,
}

/// Enumerates reduced words up to the given length, applies them to a sample
/// of interior points, and reports any non-identity element mapping a sample
/// strictly inside all defining half-spaces.
pub fn orbit_disjointness(
    p: &RealizedPolytope,
    max_word_length: usize,
) -> Result<OrbitReport, RealizeError> {
    if max_word_length > 6 {
        return Err(RealizeError::Other("word length capped at 6".into()));
    }
    let n = p.facet_count();
    let dim_n = p.facet_alpha[0].len();
    let gens: Vec<DMatrix<f64>> = (0..n).map(|f| p.reflection(f)).collect();
    let id = DMatrix::<f64>::identity(dim_n, dim_n);
    let close = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() <= 1e-8;
    let mut elements: Vec<(DMatrix<f64>, String)> = vec![(id.clone(), String::new())];
    let mut frontier: Vec<(DMatrix<f64>, String)> = vec![(id, String::new())];
    for _ in 0..max_word_length {
        let mut next = Vec::new();
        for (m, w) in &frontier {
            for (gi, g) in gens.iter().enumerate() {
                let nm = g * m;
                if elements.iter().any(|(e, _)| close(e, &nm)) {
                    continue;
                }
                let nw = format!("s{gi}.{w}");
                elements.push((nm.clone(), nw.clone()));
                next.push((nm, nw));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    // Interior samples: barycenter plus points pulled toward each vertex.
    let bary: DVector<f64> = p
        .vertices
        .iter()
        .fold(DVector::zeros(dim_n), |acc, (_, _, x)| acc + x / x.norm());
    let mut samples: Vec<DVector<f64>> = vec![bary.clone()];
    for (_, _, x) in &p.vertices {
        samples.push(x / x.norm() * 0.9 + &bary * 0.1);
    }
    // Keep only certified interior points.
    let strictly_inside = |x: &DVector<f64>| {
        (0..n).all(|f| p.alpha(f).dot(x) / x.norm() < -1e-9)
    };
    samples.retain(|x| strictly_inside(x));
    if samples.is_empty() {
        return Err(RealizeError::Other("no interior sample point found".into()));
    }
    let mut overlaps = Vec::new();
    for (m, w) in elements.iter().skip(1) {
        for x in &samples {
            let y = m * x;
            if strictly_inside(&y) {
                overlaps.push(w.clone());
                break;
            }
        }
    }
    Ok(OrbitReport {
        elements: elements.len(),
        max_word_length,
        overlaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{build_cartan, cosine_matrix, relevant_circuits};
    use crate::tables::{cycle, glued_prism, pan, pan_block, prism};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn tits_simplex_of_lanner_cycle() {
        let w = cycle(&[4, 3, 3, 3, 3]);
        let p = tits_simplex(&w, tol()).unwrap();
        let rep = verify_polytope(&p);
        assert!(rep.ok, "failures: {:?}", rep.failures);
        // Maxwell: signature (rank-1, 1).
        let sig = signature(&cosine_matrix(&w), tol());
        assert_eq!(sig, (4, 1, 0));
    }

    #[test]
    fn parabolic_affine_simplex_has_zero_det() {
        let w = crate::tables::affine_a(2);
        let a = cosine_matrix(&w);
        let p = realize_simplex(&a, tol()).unwrap();
        assert!(p.cartan().entries().determinant().abs() < 1e-12);
    }

    #[test]
    fn truncation_produces_right_angles() {
        let w = pan(&[3; 8], 3);
        let c = relevant_circuits(&w)[0].clone();
        let a = build_cartan(&w, &[(c, 0.8)], tol()).unwrap();
        let mut p = realize_simplex(&a, tol()).unwrap();
        assert!(p.is_truncatable(0, "i").unwrap());
        p.truncate(0, "i").unwrap();
        let rep = verify_polytope(&p);
        assert!(rep.ok, "failures: {:?}", rep.failures);
        // New facet pairs with formerly incident facets have zero products.
        let f = p.facets().truncation(0, 8);
        for s in 0..8 {
            let fc = p.facets().class(0, s);
            assert!(p.cartan().get(f, fc).abs() < 1e-12);
            assert!(p.cartan().get(fc, f).abs() < 1e-12);
        }
        // Quasi-perfect: all links elliptic or parabolic -> finite volume.
        assert!(rep.finite_volume);
    }

    #[test]
    fn truncatability_criteria_agree() {
        let w = pan(&[3; 5], 3);
        let c = relevant_circuits(&w)[0].clone();
        // Nonzero R: truncatable.
        let a = build_cartan(&w, &[(c.clone(), 0.5)], tol()).unwrap();
        let p = realize_simplex(&a, tol()).unwrap();
        assert!(p.is_truncatable(0, "f").unwrap());
        // R = 0 (Tits): parabolic link, not truncatable.
        let a0 = cosine_matrix(&w);
        let p0 = realize_simplex(&a0, tol()).unwrap();
        assert!(!p0.is_truncatable(0, "f").unwrap());
        // A spherical vertex is never truncatable.
        assert!(!p.is_truncatable(0, "c").unwrap());
    }

    #[test]
    fn realize_tree_round_trip() {
        let t = prism(8);
        let x = deform::coordinates(&t, tol()).unwrap();
        assert_eq!(x.axes.len(), 1);
        let p = realize_tree(&t, &[1.3], &[], tol()).unwrap();
        let rep = verify_polytope(&p);
        assert!(rep.ok, "failures: {:?}", rep.failures);
        let got = p.measured_r(x.axes[0].block, &x.axes[0].circuit).unwrap();
        assert!((got - 1.3).abs() < 1e-10);
        // Puncture is rejected.
        assert!(matches!(
            realize_tree(&t, &[0.0], &[], tol()),
            Err(RealizeError::Puncture(_))
        ));
    }

    #[test]
    fn realize_glued_prism_with_bending() {
        let t = glued_prism(8, 2);
        let x = deform::coordinates(&t, tol()).unwrap();
        assert_eq!(x.axes.len(), 1);
        assert_eq!(x.bending, 1);
        for u in [-0.5, 0.0, 0.7] {
            let p = realize_tree(&t, &[0.9], &[u], tol()).unwrap();
            let rep = verify_polytope(&p);
            assert!(rep.ok, "u={u}: failures: {:?}", rep.failures);
        }
    }

    #[test]
    fn bending_acts_monotonically_on_cross_products() {
        // The normalized product of a 3-circuit crossing the interface is a
        // homeomorphic (monotone, surjective) function of the bending
        // parameter, with asymptotic slope d+1.
        let t = glued_prism(8, 0);
        let f = |u: f64| -> f64 {
            let p = realize_tree(&t, &[0.8], &[u], tol()).unwrap();
            let fac = p.facets();
            let i1 = fac.class(0, 8); // pendant of block 1
            let i2 = fac.class(1, 8); // pendant of block 2
            let a = fac.class(0, 0); // shared attachment
            let fwd = p.facet_cyclic_product(&[i1, a, i2]);
            let bwd = p.facet_cyclic_product(&[i2, a, i1]);
            (fwd / bwd).ln()
        };
        let us = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let rs: Vec<f64> = us.iter().map(|&u| f(u)).collect();
        for w in rs.windows(2) {
            assert!(w[1] > w[0] + 1e-6, "R must be strictly monotone: {rs:?}");
        }
        // Asymptotic slope d+1 = 9 per unit of u (measured where the small
        // cross entries are still numerically resolved).
        let slope = (f(1.0) - f(0.5)) / 0.5;
        assert!((slope - 9.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn orbit_of_small_lanner_tits_simplex() {
        let w = cycle(&[4, 3, 3, 3]);
        let p = tits_simplex(&w, tol()).unwrap();
        let rep = orbit_disjointness(&p, 3).unwrap();
        assert!(rep.overlaps.is_empty(), "overlaps: {:?}", rep.overlaps);
        assert!(rep.elements > 10);
    }

    #[test]
    fn orbit_detects_fault_injection() {
        // Corrupt one label-3 pair of the affine triangle to an inadmissible
        // product strictly between the allowed values.
        let w = crate::tables::cycle(&[3, 3, 3]);
        let mut a = cosine_matrix(&w).entries().clone();
        let bad = -(0.0975f64).sqrt();
        a[(0, 1)] = bad;
        a[(1, 0)] = bad;
        let cm = CartanMatrix::new_unchecked(
            cosine_matrix(&w).names().to_vec(),
            a,
        );
        let p = realize_simplex_raw(&cm, tol()).unwrap();
        let rep = orbit_disjointness(&p, 4).unwrap();
        assert!(!rep.overlaps.is_empty());
    }

    #[test]
    fn glue_requires_matching_invariants() {
        let block = pan_block(8);
        let c = relevant_circuits(&block)[0].clone();
        let a1 = build_cartan(&block, &[(c.clone(), 0.6)], tol()).unwrap();
        let a2 = build_cartan(&block, &[(c.clone(), 0.9)], tol()).unwrap();
        let p1 = realize_simplex(&a1, tol()).unwrap();
        let p2 = realize_simplex(&a2, tol()).unwrap();
        let names = block.names().to_vec();
        let phi: Vec<(String, String)> = names[..8]
            .iter()
            .map(|s| (s.clone(), s.clone()))
            .collect();
        let r = glue(&p1, 0, "i", &p2, 0, "i", &phi, 0.0);
        assert!(matches!(r, Err(RealizeError::InterfaceMismatch(_))));
        let p2b = realize_simplex(&a1, tol()).unwrap();
        let ok = glue(&p1, 0, "i", &p2b, 0, "i", &phi, 0.3);
        assert!(ok.is_ok());
        let rep = verify_polytope(&ok.unwrap());
        assert!(rep.ok, "failures: {:?}", rep.failures);
    }
}
