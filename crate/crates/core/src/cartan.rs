//! Cartan matrices in Vinberg's sense: diagonal 2, nonpositive off-diagonal
//! entries with sign-symmetric zeros, and pairwise products either ≥ 4 or of
//! the form `4 cos²(π/m)`.
//!
//! Equivalence classes under conjugation by positive diagonal matrices are
//! separated by cyclic products along circuits; for diagrams without an
//! infinite edge the normalized cyclic product `R_C = log(C(A)/C̄(A))` is the
//! convenient coordinate.

use crate::diagram::{CoxeterMatrix, Label};
use crate::Tolerance;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanMatrix {
    names: Vec<String>,
    entries: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartanViolation {
    /// Condition (i): a diagonal entry differs from 2.
    Diagonal { index: usize, value: f64 },
    /// Condition (ii): a positive off-diagonal entry.
    OffDiagonalSign { row: usize, col: usize, value: f64 },
    /// Condition (iii): `A_ij = 0` but `A_ji != 0`.
    ZeroAsymmetry { row: usize, col: usize },
    /// Condition (iv): a pairwise product neither ≥ 4 nor `4 cos²(π/m)`.
    BadProduct { row: usize, col: usize, product: f64 },
}

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("Cartan conditions violated: {0:?}")]
    Invalid(Vec<CartanViolation>),
    #[error("rank mismatch")]
    RankMismatch,
    #[error("zero entry along circuit")]
    ZeroOnCircuit,
    #[error("diagram has an edge of label infinity")]
    InfiniteEdge,
    #[error("infeasible circuit parameters: {0}")]
    Infeasible(String),
    #[error("matrices have different zero patterns")]
    ShapeMismatch,
}

impl CartanMatrix {
    pub fn new_unchecked(names: Vec<String>, entries: DMatrix<f64>) -> Self {
        CartanMatrix { names, entries }
    }

    pub fn rank(&self) -> usize {
        self.entries.nrows()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn scale(&self) -> f64 {
        self.entries.iter().fold(1.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn is_symmetric(&self, tol: Tolerance) -> bool {
        let eps = tol.abs(self.scale());
        let n = self.rank();
        (0..n).all(|i| (0..n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= eps))
    }

    /// Sub-matrix on a node subset, keeping names.
    pub fn restrict(&self, keep: &[usize]) -> CartanMatrix {
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        let m = DMatrix::from_fn(keep.len(), keep.len(), |a, b| self.get(keep[a], keep[b]));
        CartanMatrix::new_unchecked(names, m)
    }

    /// Components of the underlying graph (edges where the entry is nonzero).
    pub fn component_sets(&self, tol: Tolerance) -> Vec<Vec<usize>> {
        let n = self.rank();
        let eps = tol.abs(self.scale());
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in 0..n {
                    if !seen[j] && i != j && self.get(i, j).abs() > eps {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }
}

/// Validates the four Cartan conditions; the `m` in condition (iv) is scanned
/// over 2..=1000.
pub fn validate_cartan(
    names: Vec<String>,
    entries: DMatrix<f64>,
    tol: Tolerance,
) -> Result<CartanMatrix, CartanError> {
    if entries.nrows() != entries.ncols() {
        return Err(CartanError::NotSquare);
    }
    let n = entries.nrows();
    let scale = entries.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let eps = tol.abs(scale);
    let mut violations = Vec::new();
    for i in 0..n {
        if (entries[(i, i)] - 2.0).abs() > eps {
            violations.push(CartanViolation::Diagonal {
                index: i,
                value: entries[(i, i)],
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = entries[(i, j)];
            if a > eps {
                violations.push(CartanViolation::OffDiagonalSign {
                    row: i,
                    col: j,
                    value: a,
                });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = entries[(i, j)];
            let b = entries[(j, i)];
            if (a.abs() <= eps) != (b.abs() <= eps) {
                let (row, col) = if a.abs() <= eps { (i, j) } else { (j, i) };
                violations.push(CartanViolation::ZeroAsymmetry { row, col });
                continue;
            }
            if a.abs() <= eps {
                continue;
            }
            let p = a * b;
            if !admissible_product(p, eps) {
                violations.push(CartanViolation::BadProduct {
                    row: i,
                    col: j,
                    product: p,
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(CartanMatrix { names, entries })
    } else {
        Err(CartanError::Invalid(violations))
    }
}

/// True when `p ≥ 4` or `p = 4 cos²(π/m)` for some integer m in 2..=1000.
pub fn admissible_product(p: f64, eps: f64) -> bool {
    if p >= 4.0 - eps {
        return true;
    }
    if p < -eps {
        return false;
    }
    (2..=1000u32).any(|m| {
        let target = 4.0 * (std::f64::consts::PI / m as f64).cos().powi(2);
        (p - target).abs() <= eps.max(1e-9)
    })
}

/// The label `m` recovered from a product `4 cos²(π/m)`, or `None` when the
/// product is ≥ 4 (label infinity territory) or inadmissible.
pub fn product_to_label(p: f64, eps: f64) -> Option<Label> {
    if p >= 4.0 - eps {
        return Some(Label::Infinity);
    }
    (2..=1000u32)
        .find(|&m| {
            let target = 4.0 * (std::f64::consts::PI / m as f64).cos().powi(2);
            (p - target).abs() <= eps.max(1e-9)
        })
        .map(Label::Finite)
}

/// The cosine matrix `Cos(W)` with entries `-2 cos(π/M_st)`.
pub fn cosine_matrix(w: &CoxeterMatrix) -> CartanMatrix {
    let n = w.rank();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else {
            -2.0 * w.label(i, j).cos_pi_over()
        }
    });
    CartanMatrix {
        names: w.names().to_vec(),
        entries,
    }
}

/// Compatibility of a Cartan matrix with a Coxeter matrix: products must be
/// `4 cos²(π/M_st)` on finite labels and ≥ 4 on infinite ones.
pub fn is_compatible(a: &CartanMatrix, w: &CoxeterMatrix, tol: Tolerance) -> Result<bool, CartanError> {
    if a.rank() != w.rank() {
        return Err(CartanError::RankMismatch);
    }
    let eps = tol.abs(a.scale());
    let n = a.rank();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = a.get(i, j) * a.get(j, i);
            match w.label(i, j) {
                Label::Finite(m) => {
                    let target = 4.0 * (std::f64::consts::PI / m as f64).cos().powi(2);
                    if (p - target).abs() > eps * 4.0 {
                        return Ok(false);
                    }
                }
                Label::Infinity => {
                    if p < 4.0 - eps {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Perron-Frobenius typing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PfType {
    Positive,
    Zero,
    Negative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentType {
    pub nodes: Vec<usize>,
    pub pf_type: PfType,
    pub rank: usize,
}

/// The PF eigenvalue of an irreducible Cartan matrix: the simple eigenvalue
/// carrying a positive eigenvector, which is the one of smallest modulus.
/// Computed by Collatz-Wielandt power iteration on `cI - A + I`.
pub fn pf_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 1 {
        return a[(0, 0)];
    }
    let c = 2.0
        + a.row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
    // b = cI - A is entrywise nonnegative and irreducible; adding I keeps the
    // PF vector and makes the iteration converge without oscillation.
    let b = DMatrix::from_fn(n, n, |i, j| {
        let v = if i == j { c - a[(i, j)] + 1.0 } else { -a[(i, j)] };
        v.max(0.0)
    });
    let mut x = nalgebra::DVector::from_element(n, 1.0f64);
    let mut mu = c;
    for _ in 0..20000 {
        let y = &b * &x;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        mu = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * mu.abs().max(1.0) {
            break;
        }
        let norm = y.amax();
        x = y / norm;
    }
    // b's PF value is c - lambda + 1.
    c + 1.0 - mu
}

fn numeric_rank(m: &DMatrix<f64>, tol: Tolerance) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > tol.abs(smax))
        .count()
}

/// Per irreducible component: the PF type and the numerical rank.
pub fn pf_type(a: &CartanMatrix, tol: Tolerance) -> Vec<ComponentType> {
    a.component_sets(tol)
        .into_iter()
        .map(|nodes| {
            let sub = a.restrict(&nodes);
            let lambda = pf_eigenvalue(sub.entries());
            let eps = tol.abs(sub.scale());
            let pf = if lambda > eps {
                PfType::Positive
            } else if lambda >= -eps {
                PfType::Zero
            } else {
                PfType::Negative
            };
            let rank = numeric_rank(sub.entries(), tol);
            ComponentType {
                nodes,
                pf_type: pf,
                rank,
            }
        })
        .collect()
}

/// PF classification of the whole matrix when irreducible.
pub fn pf_type_irreducible(a: &CartanMatrix, tol: Tolerance) -> PfType {
    let t = pf_type(a, tol);
    assert_eq!(t.len(), 1, "matrix is reducible");
    t[0].pf_type
}

// ---------------------------------------------------------------------------
// Circuits and cyclic products
// ---------------------------------------------------------------------------

/// An oriented circuit: a tuple of ≥ 2 distinct node indices up to cyclic
/// rotation. The reverse tuple is the opposite orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit(pub Vec<usize>);

impl Circuit {
    /// Canonical representative: smallest node first; among the two
    /// orientations, the one whose second node is smaller.
    pub fn canonical(&self) -> Circuit {
        let v = &self.0;
        let n = v.len();
        let pos = (0..n).min_by_key(|&i| v[i]).unwrap();
        let fwd: Vec<usize> = (0..n).map(|k| v[(pos + k) % n]).collect();
        if n == 2 {
            return Circuit(vec![fwd[0].min(fwd[1]), fwd[0].max(fwd[1])]);
        }
        let mut rev: Vec<usize> = fwd.clone();
        rev[1..].reverse();
        if fwd[1] <= rev[1] {
            Circuit(fwd)
        } else {
            Circuit(rev)
        }
    }

    pub fn reversed(&self) -> Circuit {
        let mut v = self.0.clone();
        v[1..].reverse();
        Circuit(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Directed edges of the circuit.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let v = &self.0;
        (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect()
    }
}

/// All relevant circuits of a Coxeter diagram: the simple cycles of the
/// underlying graph, plus one 2-circuit per edge of label infinity. Each is
/// returned once in canonical orientation; the opposite is [`Circuit::reversed`].
pub fn relevant_circuits(w: &CoxeterMatrix) -> Vec<Circuit> {
    let n = w.rank();
    let mut out: Vec<Circuit> = Vec::new();
    for (i, j, l) in w.edges() {
        if l == Label::Infinity {
            out.push(Circuit(vec![i, j]));
        }
    }
    // Simple cycles: DFS from each start node, interior nodes all greater
    // than the start, orientation deduplicated by second < last.
    let adj: Vec<Vec<usize>> = (0..n).map(|i| w.neighbors(i)).collect();
    let mut path: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    fn dfs(
        start: usize,
        u: usize,
        adj: &[Vec<usize>],
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Circuit>,
    ) {
        for &v in &adj[u] {
            if v == start && path.len() >= 3 {
                if path[1] < *path.last().unwrap() {
                    out.push(Circuit(path.clone()).canonical());
                }
            } else if v > start && !on_path[v] {
                path.push(v);
                on_path[v] = true;
                dfs(start, v, adj, path, on_path, out);
                on_path[v] = false;
                path.pop();
            }
        }
    }
    for s in 0..n {
        path.clear();
        path.push(s);
        on_path.fill(false);
        on_path[s] = true;
        dfs(s, s, &adj, &mut path, &mut on_path, &mut out);
    }
    out.sort_by(|a, b| (a.len(), &a.0).cmp(&(b.len(), &b.0)));
    out.dedup();
    out
}

/// The three circuits of a K_{2,3} diagram in coherent orientations, so that
/// the three normalized cyclic products sum to zero. The shared paths between
/// the two degree-3 nodes are ordered lexicographically by interior node;
/// circuit `i` runs forward along path `i+2` and backward along path `i+1`
/// (indices mod 3).
pub fn coherent_k23_circuits(w: &CoxeterMatrix) -> Option<[Circuit; 3]> {
    if w.shape() != crate::diagram::Shape::K23 {
        return None;
    }
    let n = w.rank();
    let big: Vec<usize> = (0..n).filter(|&i| w.degree(i) == 3).collect();
    let (u, v) = (big[0], big[1]);
    let mut mids: Vec<usize> = (0..n).filter(|&i| w.degree(i) == 2).collect();
    mids.sort_unstable();
    let p = |m: usize| vec![u, m, v];
    let (p1, p2, p3) = (p(mids[0]), p(mids[1]), p(mids[2]));
    let join = |fwd: &Vec<usize>, bwd: &Vec<usize>| {
        // fwd: u -> m -> v; bwd reversed: v -> m' -> u (dropping endpoints).
        let mut c = fwd.clone();
        c.push(bwd[1]);
        Circuit(c)
    };
    Some([join(&p3, &p2), join(&p1, &p3), join(&p2, &p1)])
}

/// The cyclic product along an oriented circuit.
pub fn cyclic_product(a: &CartanMatrix, c: &Circuit) -> f64 {
    c.edges().iter().map(|&(i, j)| a.get(i, j)).product()
}

/// The normalized cyclic product `R_C(A) = log(C(A)/C̄(A))`.
pub fn normalized_cyclic_product(
    a: &CartanMatrix,
    c: &Circuit,
    tol: Tolerance,
) -> Result<f64, CartanError> {
    // A circuit edge is supported when the pairwise product is nonzero; the
    // product is invariant under diagonal conjugation and bending, unlike the
    // individual entries, whose scale varies.
    let eps = tol.abs(1.0);
    for (i, j) in c.edges() {
        if (a.get(i, j) * a.get(j, i)).abs() <= eps {
            return Err(CartanError::ZeroOnCircuit);
        }
    }
    let fwd = cyclic_product(a, c);
    let bwd = cyclic_product(a, &c.reversed());
    Ok((fwd / bwd).ln())
}

/// Equality of all relevant cyclic products, the complete invariant for
/// equivalence of Cartan matrices compatible with the same Coxeter matrix.
pub fn equivalent(a: &CartanMatrix, b: &CartanMatrix, tol: Tolerance) -> Result<bool, CartanError> {
    if a.rank() != b.rank() {
        return Err(CartanError::ShapeMismatch);
    }
    let n = a.rank();
    let scale = a.scale().max(b.scale());
    let eps = tol.abs(scale);
    // Zero patterns must agree.
    for i in 0..n {
        for j in 0..n {
            if (a.get(i, j).abs() <= eps) != (b.get(i, j).abs() <= eps) {
                return Err(CartanError::ShapeMismatch);
            }
        }
    }
    // Pairwise products (2-circuits).
    for i in 0..n {
        for j in (i + 1)..n {
            let pa = a.get(i, j) * a.get(j, i);
            let pb = b.get(i, j) * b.get(j, i);
            if (pa - pb).abs() > eps * scale.max(1.0) {
                return Ok(false);
            }
        }
    }
    // Longer circuits: simple cycles of the common nonzero graph.
    let w = graph_of(a, tol);
    for c in relevant_circuits(&w) {
        if c.len() < 3 {
            continue;
        }
        let pa = cyclic_product(a, &c);
        let pb = cyclic_product(b, &c);
        let s = pa.abs().max(pb.abs()).max(1.0);
        if (pa - pb).abs() > tol.rel * s * 100.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The diagram-shaped graph of a Cartan matrix, with edges at nonzero entries
/// (labels are irrelevant for circuit enumeration; 3 is used as a filler and
/// infinite labels are not distinguished here).
fn graph_of(a: &CartanMatrix, tol: Tolerance) -> CoxeterMatrix {
    let eps = tol.abs(a.scale());
    let n = a.rank();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a.get(i, j).abs() > eps {
                edges.push((i, j, 3u32));
            }
        }
    }
    CoxeterMatrix::from_unnamed(n, &edges)
}

/// Independent oracle for [`equivalent`]: solves for a positive diagonal `D`
/// with `B = D A D⁻¹` by spanning-tree propagation, then verifies entrywise.
pub fn diagonal_conjugation_oracle(
    a: &CartanMatrix,
    b: &CartanMatrix,
    tol: Tolerance,
) -> Option<Vec<f64>> {
    if a.rank() != b.rank() {
        return None;
    }
    let n = a.rank();
    let scale = a.scale().max(b.scale());
    let eps = tol.abs(scale);
    let mut d = vec![0.0f64; n];
    for comp in a.component_sets(tol) {
        let root = comp[0];
        d[root] = 1.0;
        let mut stack = vec![root];
        let mut seen: Vec<bool> = vec![false; n];
        seen[root] = true;
        while let Some(i) = stack.pop() {
            for &j in &comp {
                if seen[j] || a.get(i, j).abs() <= eps {
                    continue;
                }
                if b.get(i, j).abs() <= eps {
                    return None;
                }
                // b_ij = d_i a_ij / d_j
                d[j] = d[i] * a.get(i, j) / b.get(i, j);
                if !(d[j] > 0.0) || !d[j].is_finite() {
                    return None;
                }
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    // Verify.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let expect = d[i] * a.get(i, j) / d[j];
            if (expect - b.get(i, j)).abs() > eps * 1e3 {
                return None;
            }
        }
    }
    Some(d)
}

// ---------------------------------------------------------------------------
// Construction with prescribed normalized cyclic products
// ---------------------------------------------------------------------------

/// Builds a Cartan matrix compatible with `w` whose normalized cyclic
/// products on the given oriented circuits equal the given values. Starting
/// from `Cos(w)`, each non-tree edge of the minimum-lexicographic spanning
/// tree gets the asymmetric pair `(-2cos(π/m) e^{x/2}, -2cos(π/m) e^{-x/2})`,
/// with the exponents solved from the circuit equations.
pub fn build_cartan(
    w: &CoxeterMatrix,
    params: &[(Circuit, f64)],
    tol: Tolerance,
) -> Result<CartanMatrix, CartanError> {
    if w.has_infinite_edge() {
        return Err(CartanError::InfiniteEdge);
    }
    let n = w.rank();
    // Minimum-lexicographic spanning forest.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    let mut chords: Vec<(usize, usize)> = Vec::new();
    let mut all_edges: Vec<(usize, usize)> = w.edges().iter().map(|&(i, j, _)| (i, j)).collect();
    all_edges.sort_unstable();
    for (i, j) in all_edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree_edges.push((i, j));
        } else {
            chords.push((i, j));
        }
    }
    let k = chords.len();
    // Each params row: sum over chords of +-x_chord = value.
    let chord_index = |a: usize, b: usize| -> Option<(usize, f64)> {
        let key = (a.min(b), a.max(b));
        chords
            .iter()
            .position(|&e| e == key)
            .map(|idx| (idx, if (a, b) == key { 1.0 } else { -1.0 }))
    };
    let rows = params.len();
    let mut m = DMatrix::<f64>::zeros(rows, k);
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    for (r, (c, val)) in params.iter().enumerate() {
        for (a, b) in c.edges() {
            if !w.label(a, b).is_edge() {
                return Err(CartanError::Infeasible(format!(
                    "circuit uses non-edge ({a},{b})"
                )));
            }
            if let Some((idx, sign)) = chord_index(a, b) {
                m[(r, idx)] += sign;
            }
        }
        rhs[r] = *val;
    }
    // Minimum-norm least squares via SVD; a nonzero residual means the
    // requested values are inconsistent (e.g. K_{2,3} values not summing to 0).
    let x = if k == 0 {
        nalgebra::DVector::<f64>::zeros(0)
    } else if rows == 0 {
        nalgebra::DVector::<f64>::zeros(k)
    } else {
        let svd = m.clone().svd(true, true);
        svd.solve(&rhs, 1e-12).map_err(|e| CartanError::Infeasible(e.to_string()))?
    };
    if rows > 0 && k > 0 {
        let resid = (&m * &x) - &rhs;
        let rn = resid.amax();
        if rn > tol.abs(rhs.amax()).max(1e-9) {
            return Err(CartanError::Infeasible(format!(
                "circuit values are inconsistent (residual {rn:.3e})"
            )));
        }
    } else if rows > 0 {
        // No chords: every requested value must be 0.
        if rhs.amax() > tol.abs(1.0) {
            return Err(CartanError::Infeasible(
                "nonzero value requested on a forest diagram".into(),
            ));
        }
    }
    let mut a = cosine_matrix(w);
    for (idx, &(i, j)) in chords.iter().enumerate() {
        let c = a.get(i, j); // -2 cos(pi/m), never 0 on an edge
        let e = (x[idx] / 2.0).exp();
        a.entries[(i, j)] = c * e;
        a.entries[(j, i)] = c / e;
    }
    Ok(a)
}

/// The symmetric representative of the equivalence class, when one exists
/// (all relevant normalized cyclic products vanish); `None` otherwise.
pub fn symmetrize(a: &CartanMatrix, tol: Tolerance) -> Option<CartanMatrix> {
    let n = a.rank();
    let eps = tol.abs(a.scale());
    let mut d = vec![0.0f64; n];
    for comp in a.component_sets(tol) {
        let root = comp[0];
        d[root] = 1.0;
        let mut stack = vec![root];
        let mut seen = vec![false; n];
        seen[root] = true;
        while let Some(i) = stack.pop() {
            for &j in &comp {
                if seen[j] || a.get(i, j).abs() <= eps {
                    continue;
                }
                // want d_i a_ij / d_j = d_j a_ji / d_i
                let ratio = a.get(i, j) / a.get(j, i);
                if !(ratio > 0.0) {
                    return None;
                }
                d[j] = d[i] * ratio.sqrt();
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let s = DMatrix::from_fn(n, n, |i, j| d[i] * a.get(i, j) / d[j]);
    let sym = CartanMatrix::new_unchecked(a.names.clone(), s);
    if sym.is_symmetric(Tolerance { rel: tol.rel * 1e3 }) {
        // Clean up the tiny asymmetry from rounding.
        let avg =
            DMatrix::from_fn(n, n, |i, j| 0.5 * (sym.get(i, j) + sym.get(j, i)));
        Some(CartanMatrix::new_unchecked(a.names.clone(), avg))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_diagram;
    use crate::tables::{cycle, pan, path};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn cosine_entries() {
        let w = path(&[3]);
        let a = cosine_matrix(&w);
        assert!((a.get(0, 1) + 1.0).abs() < 1e-12);
        let w = path(&[4]);
        let a = cosine_matrix(&w);
        assert!((a.get(0, 1) + 2.0f64.sqrt()).abs() < 1e-12);
        let w = path(&[0]); // infinity
        let a = cosine_matrix(&w);
        assert!((a.get(0, 1) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_matrices() {
        let names = vec!["a".into(), "b".into()];
        let ok = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!(validate_cartan(names.clone(), ok, tol()).is_ok());
        let zero_asym = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.0, 2.0]);
        match validate_cartan(names.clone(), zero_asym, tol()) {
            Err(CartanError::Invalid(v)) => {
                assert!(v.iter().any(|x| matches!(x, CartanViolation::ZeroAsymmetry { .. })))
            }
            other => panic!("expected zero asymmetry, got {other:?}"),
        }
        // Product 3.5 is neither >= 4 nor 4cos^2(pi/m); note that product 3
        // itself is admissible, being 4cos^2(pi/6).
        assert!(admissible_product(3.0, 1e-9));
        let bad = DMatrix::from_row_slice(2, 2, &[2.0, -3.5, -1.0, 2.0]);
        match validate_cartan(names, bad, tol()) {
            Err(CartanError::Invalid(v)) => {
                assert!(v.iter().any(|x| matches!(x, CartanViolation::BadProduct { .. })))
            }
            other => panic!("expected bad product, got {other:?}"),
        }
    }

    #[test]
    fn compatibility_is_gauge_invariant() {
        let w = cycle(&[4, 3, 3, 3, 3]);
        let a = cosine_matrix(&w);
        assert!(is_compatible(&a, &w, tol()).unwrap());
        let mut b = a.clone();
        b.entries[(0, 1)] *= 3.0;
        b.entries[(1, 0)] /= 3.0;
        assert!(is_compatible(&b, &w, tol()).unwrap());
        let mut c = a.clone();
        c.entries[(0, 1)] = 0.0;
        c.entries[(1, 0)] = 0.0;
        assert!(!is_compatible(&c, &w, tol()).unwrap());
    }

    #[test]
    fn pf_types_of_cosine_matrices() {
        let a3 = cosine_matrix(&path(&[3, 3]));
        assert_eq!(pf_type_irreducible(&a3, tol()), PfType::Positive);
        let a2t = cosine_matrix(&cycle(&[3, 3, 3]));
        let t = pf_type(&a2t, tol());
        assert_eq!(t[0].pf_type, PfType::Zero);
        assert_eq!(t[0].rank, 2);
        let lanner = cosine_matrix(&cycle(&[4, 3, 3, 3]));
        let t = pf_type(&lanner, tol());
        assert_eq!(t[0].pf_type, PfType::Negative);
        assert_eq!(t[0].rank, 4);
    }

    #[test]
    fn circuits_by_shape() {
        assert!(relevant_circuits(&path(&[3, 3, 3])).is_empty());
        assert_eq!(relevant_circuits(&cycle(&[3; 5])).len(), 1);
        assert_eq!(relevant_circuits(&pan(&[3; 5], 3)).len(), 1);
        let k = crate::tables::k23(3, 3);
        assert_eq!(relevant_circuits(&k).len(), 3);
        let inf = parse_diagram("nodes a b; edge a b inf;").unwrap();
        assert_eq!(relevant_circuits(&inf).len(), 1);
        assert_eq!(relevant_circuits(&inf)[0].len(), 2);
    }

    #[test]
    fn coherent_k23_sums_to_zero() {
        let w = crate::tables::k23(3, 4);
        let circuits = coherent_k23_circuits(&w).unwrap();
        // Any compatible Cartan matrix: sum of the three R values vanishes.
        let rc = relevant_circuits(&w);
        let a = build_cartan(&w, &[(rc[0].clone(), 0.7), (rc[1].clone(), -0.2)], tol()).unwrap();
        let total: f64 = circuits
            .iter()
            .map(|c| normalized_cyclic_product(&a, c, tol()).unwrap())
            .sum();
        assert!(total.abs() < 1e-10, "sum {total}");
    }

    #[test]
    fn build_cartan_round_trip() {
        let w = pan(&[3; 5], 3);
        let c = relevant_circuits(&w)[0].clone();
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let a = build_cartan(&w, &[(c.clone(), x)], tol()).unwrap();
            let r = normalized_cyclic_product(&a, &c, tol()).unwrap();
            assert!((r - x).abs() < 1e-12);
            assert!(is_compatible(&a, &w, tol()).unwrap());
        }
    }

    #[test]
    fn build_cartan_k23_constraint() {
        let w = crate::tables::k23(3, 3);
        let cs = coherent_k23_circuits(&w).unwrap();
        let ok = build_cartan(
            &w,
            &[(cs[0].clone(), 1.0), (cs[1].clone(), -1.0), (cs[2].clone(), 0.0)],
            tol(),
        );
        assert!(ok.is_ok());
        let bad = build_cartan(
            &w,
            &[(cs[0].clone(), 1.0), (cs[1].clone(), 1.0), (cs[2].clone(), 1.0)],
            tol(),
        );
        assert!(matches!(bad, Err(CartanError::Infeasible(_))));
    }

    #[test]
    fn symmetrize_round_trip() {
        let w = cycle(&[4, 3, 3, 3, 3]);
        let a = cosine_matrix(&w);
        let mut rng = StdRng::seed_from_u64(7);
        let d: Vec<f64> = (0..5).map(|_| rng.gen_range(0.2..5.0)).collect();
        let n = 5;
        let conj = DMatrix::from_fn(n, n, |i, j| d[i] * a.get(i, j) / d[j]);
        let b = CartanMatrix::new_unchecked(a.names().to_vec(), conj);
        let s = symmetrize(&b, tol()).expect("symmetrizable");
        for i in 0..n {
            for j in 0..n {
                assert!((s.get(i, j) - a.get(i, j)).abs() < 1e-12);
            }
        }
        let c = relevant_circuits(&w)[0].clone();
        let asym = build_cartan(&w, &[(c, 1.0)], tol()).unwrap();
        assert!(symmetrize(&asym, tol()).is_none());
    }

    #[test]
    fn equivalence_and_oracle_agree() {
        let w = pan(&[3; 4], 3);
        let c = relevant_circuits(&w)[0].clone();
        let a = build_cartan(&w, &[(c.clone(), 0.4)], tol()).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let n = a.rank();
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
        let conj = DMatrix::from_fn(n, n, |i, j| d[i] * a.get(i, j) / d[j]);
        let b = CartanMatrix::new_unchecked(a.names().to_vec(), conj);
        assert!(equivalent(&a, &b, tol()).unwrap());
        assert!(diagonal_conjugation_oracle(&a, &b, tol()).is_some());
        let a2 = build_cartan(&w, &[(c, 0.41)], tol()).unwrap();
        assert!(!equivalent(&a, &a2, tol()).unwrap());
        assert!(diagonal_conjugation_oracle(&a, &a2, tol()).is_none());
    }
}
