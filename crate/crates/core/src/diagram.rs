//! Coxeter matrices and diagrams.
//!
//! A Coxeter matrix on a set of nodes has entries in `{1, 2, 3, ...} ∪ {∞}`
//! with 1 on the diagonal and values ≥ 2 elsewhere. The diagram has an edge
//! between two nodes exactly when the entry is ≥ 3; the label 3 is customarily
//! omitted when printing.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Edge label of a Coxeter diagram: an integer ≥ 2 or infinity.
///
/// Infinity is a distinguished sentinel, never a large integer, since label
/// arithmetic (`cos(π/m)`) must branch on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Finite(u32),
    Infinity,
}

impl Label {
    pub fn cos_pi_over(self) -> f64 {
        match self {
            Label::Finite(m) => (std::f64::consts::PI / m as f64).cos(),
            Label::Infinity => 1.0,
        }
    }

    pub fn is_edge(self) -> bool {
        !matches!(self, Label::Finite(m) if m <= 2)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Finite(m) => write!(f, "{m}"),
            Label::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("node sets differ")]
    NodeMismatch,
    #[error("diagram is not connected")]
    Disconnected,
    #[error("{0}")]
    Invalid(String),
}

/// A symmetric Coxeter matrix together with node names.
///
/// Nodes are stored in a fixed order; all operations are pure and the value is
/// immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterMatrix {
    names: Vec<String>,
    /// Row-major `n x n`; entry `[i][j]` is the Coxeter label between node i and j.
    entries: Vec<Label>,
}

impl CoxeterMatrix {
    /// Builds a Coxeter matrix from node names and labeled edges. Unmentioned
    /// pairs get label 2 (no edge).
    pub fn from_edges<S: AsRef<str>>(
        names: &[S],
        edges: &[(usize, usize, Label)],
    ) -> Result<Self, DiagramError> {
        let n = names.len();
        let mut seen = BTreeSet::new();
        for s in names {
            if !seen.insert(s.as_ref().to_string()) {
                return Err(DiagramError::Invalid(format!(
                    "duplicate node name {:?}",
                    s.as_ref()
                )));
            }
        }
        let mut entries = vec![Label::Finite(2); n * n];
        for i in 0..n {
            entries[i * n + i] = Label::Finite(1);
        }
        for &(a, b, l) in edges {
            if a == b {
                return Err(DiagramError::Invalid(format!(
                    "self-edge on node {:?}",
                    names[a].as_ref()
                )));
            }
            if let Label::Finite(m) = l {
                if m < 3 {
                    return Err(DiagramError::Invalid(format!("edge label {m} < 3")));
                }
            }
            entries[a * n + b] = l;
            entries[b * n + a] = l;
        }
        Ok(CoxeterMatrix {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            entries,
        })
    }

    /// Convenience constructor with nodes named `s0..s{n-1}`.
    pub fn from_unnamed(n: usize, edges: &[(usize, usize, u32)]) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let lab = |m: u32| {
            if m == 0 {
                Label::Infinity
            } else {
                Label::Finite(m)
            }
        };
        let edges: Vec<(usize, usize, Label)> =
            edges.iter().map(|&(a, b, m)| (a, b, lab(m))).collect();
        CoxeterMatrix::from_edges(&names, &edges).expect("valid edge list")
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn label(&self, i: usize, j: usize) -> Label {
        self.entries[i * self.rank() + j]
    }

    /// All edges `(i, j, label)` with `i < j` and label ≥ 3 or ∞.
    pub fn edges(&self) -> Vec<(usize, usize, Label)> {
        let n = self.rank();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let l = self.label(i, j);
                if l.is_edge() {
                    out.push((i, j, l));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.rank())
            .filter(|&j| j != i && self.label(i, j).is_edge())
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).len()
    }

    pub fn has_infinite_edge(&self) -> bool {
        self.entries.iter().any(|&l| l == Label::Infinity)
    }

    /// The standard subgroup on a subset of nodes, keeping names.
    pub fn restrict(&self, keep: &[usize]) -> CoxeterMatrix {
        let names: Vec<String> = keep.iter().map(|&i| self.names[i].clone()).collect();
        let n = keep.len();
        let mut entries = vec![Label::Finite(2); n * n];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                entries[a * n + b] = self.label(i, j);
            }
        }
        CoxeterMatrix { names, entries }
    }

    /// The subgroup obtained by deleting one node.
    pub fn delete_node(&self, i: usize) -> CoxeterMatrix {
        let keep: Vec<usize> = (0..self.rank()).filter(|&j| j != i).collect();
        self.restrict(&keep)
    }

    /// Renames nodes in place order, keeping the matrix.
    pub fn with_names<S: AsRef<str>>(&self, names: &[S]) -> Result<CoxeterMatrix, DiagramError> {
        if names.len() != self.rank() {
            return Err(DiagramError::NodeMismatch);
        }
        let mut seen = BTreeSet::new();
        for s in names {
            if !seen.insert(s.as_ref().to_string()) {
                return Err(DiagramError::Invalid("duplicate node name".into()));
            }
        }
        Ok(CoxeterMatrix {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            entries: self.entries.clone(),
        })
    }

    /// Direct product (disjoint union of diagrams). Names must not clash.
    pub fn direct_sum(&self, other: &CoxeterMatrix) -> Result<CoxeterMatrix, DiagramError> {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut edges = Vec::new();
        for (i, j, l) in self.edges() {
            edges.push((i, j, l));
        }
        let off = self.rank();
        for (i, j, l) in other.edges() {
            edges.push((i + off, j + off, l));
        }
        CoxeterMatrix::from_edges(&names, &edges)
    }

    /// Connected components as sorted node-index sets, ordered by smallest node.
    pub fn component_sets(&self) -> Vec<Vec<usize>> {
        let n = self.rank();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in self.neighbors(i) {
                    if !seen[j] {
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

    /// Connected components as sub-matrices, in canonical order.
    pub fn components(&self) -> Vec<(Vec<usize>, CoxeterMatrix)> {
        self.component_sets()
            .into_iter()
            .map(|set| {
                let m = self.restrict(&set);
                (set, m)
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.rank() > 0 && self.component_sets().len() == 1
    }

    /// Shape of the underlying unlabeled graph.
    pub fn shape(&self) -> Shape {
        shape_of(self)
    }

    /// Serializes back to the diagram DSL.
    pub fn to_dsl(&self) -> String {
        let mut s = String::from("nodes");
        for name in &self.names {
            s.push(' ');
            s.push_str(name);
        }
        s.push_str(";\n");
        for (i, j, l) in self.edges() {
            match l {
                Label::Finite(3) => {
                    s.push_str(&format!("edge {} {};\n", self.names[i], self.names[j]))
                }
                l => s.push_str(&format!(
                    "edge {} {} {};\n",
                    self.names[i], self.names[j], l
                )),
            }
        }
        s
    }
}

/// Shape of the underlying graph of a connected diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Tree,
    Cycle,
    Pan,
    K23,
    Other,
}

fn shape_of(w: &CoxeterMatrix) -> Shape {
    let n = w.rank();
    if n == 0 || !w.is_connected() {
        return Shape::Other;
    }
    let e = w.edges().len();
    let degs: Vec<usize> = (0..n).map(|i| w.degree(i)).collect();
    if e + 1 == n {
        return Shape::Tree;
    }
    if e == n && degs.iter().all(|&d| d == 2) {
        return Shape::Cycle;
    }
    // Pan: a cycle plus one pendant node attached to a cycle node.
    if e == n {
        let ones = degs.iter().filter(|&&d| d == 1).count();
        let threes = degs.iter().filter(|&&d| d == 3).count();
        let twos = degs.iter().filter(|&&d| d == 2).count();
        if ones == 1 && threes == 1 && twos == n - 2 {
            return Shape::Pan;
        }
    }
    // K_{2,3}: 5 nodes, 6 edges, degrees 3,3,2,2,2, bipartite classes {2}x{3}.
    if n == 5 && e == 6 {
        let mut d = degs.clone();
        d.sort_unstable();
        if d == vec![2, 2, 2, 3, 3] {
            let big: Vec<usize> = (0..n).filter(|&i| degs[i] == 3).collect();
            if w.label(big[0], big[1]) == Label::Finite(2) {
                let small: Vec<usize> = (0..n).filter(|&i| degs[i] == 2).collect();
                if small
                    .iter()
                    .all(|&s| big.iter().all(|&b| w.label(s, b).is_edge()))
                {
                    return Shape::K23;
                }
            }
        }
    }
    Shape::Other
}

// ---------------------------------------------------------------------------
// DSL parsing
// ---------------------------------------------------------------------------

/// Parses the diagram DSL:
///
/// ```text
/// nodes a b c;            # node declaration first
/// edge a b 4;             # labeled edge
/// edge b c;               # omitted label means 3
/// edge a c inf;           # infinity label
/// ```
///
/// `#` starts a comment to end of line.
pub fn parse_diagram(text: &str) -> Result<CoxeterMatrix, DiagramError> {
    let tokens = tokenize(text);
    let mut pos = 0usize;
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, Label)> = Vec::new();
    let mut have_nodes = false;

    let err = |t: Option<&Token>, msg: &str| -> DiagramError {
        let (line, col) = t.map(|t| (t.line, t.col)).unwrap_or((0, 0));
        DiagramError::Parse {
            line,
            col,
            msg: msg.to_string(),
        }
    };

    while pos < tokens.len() {
        let t = &tokens[pos];
        match t.text.as_str() {
            "nodes" => {
                pos += 1;
                let mut any = false;
                while pos < tokens.len() && tokens[pos].text != ";" {
                    let name = tokens[pos].text.clone();
                    if name == "nodes" || name == "edge" {
                        return Err(err(Some(&tokens[pos]), "keyword used as node name"));
                    }
                    if names.contains(&name) {
                        return Err(err(Some(&tokens[pos]), &format!("duplicate node {name:?}")));
                    }
                    names.push(name);
                    any = true;
                    pos += 1;
                }
                if !any {
                    return Err(err(Some(t), "empty nodes declaration"));
                }
                if pos < tokens.len() {
                    pos += 1; // ';'
                }
                have_nodes = true;
            }
            "edge" => {
                if !have_nodes {
                    return Err(err(Some(t), "edge before nodes declaration"));
                }
                pos += 1;
                let mut parts: Vec<&Token> = Vec::new();
                while pos < tokens.len() && tokens[pos].text != ";" {
                    parts.push(&tokens[pos]);
                    pos += 1;
                }
                if pos < tokens.len() {
                    pos += 1; // ';'
                }
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(err(Some(t), "edge expects two nodes and an optional label"));
                }
                let a = names
                    .iter()
                    .position(|n| n == &parts[0].text)
                    .ok_or_else(|| err(Some(parts[0]), &format!("unknown node {:?}", parts[0].text)))?;
                let b = names
                    .iter()
                    .position(|n| n == &parts[1].text)
                    .ok_or_else(|| err(Some(parts[1]), &format!("unknown node {:?}", parts[1].text)))?;
                if a == b {
                    return Err(err(Some(parts[1]), "self-edge"));
                }
                let label = if parts.len() == 3 {
                    let lt = parts[2];
                    if lt.text == "inf" {
                        Label::Infinity
                    } else {
                        let m: u32 = lt
                            .text
                            .parse()
                            .map_err(|_| err(Some(lt), &format!("bad label {:?}", lt.text)))?;
                        if m < 3 {
                            return Err(err(Some(lt), &format!("edge label {m} < 3")));
                        }
                        Label::Finite(m)
                    }
                } else {
                    Label::Finite(3)
                };
                if edges
                    .iter()
                    .any(|&(x, y, _)| (x, y) == (a.min(b), a.max(b)))
                {
                    return Err(err(Some(parts[0]), "duplicate edge"));
                }
                edges.push((a.min(b), a.max(b), label));
            }
            ";" => {
                pos += 1;
            }
            other => {
                return Err(err(Some(t), &format!("unexpected token {other:?}")));
            }
        }
    }
    if !have_nodes {
        return Err(DiagramError::Parse {
            line: 1,
            col: 1,
            msg: "missing nodes declaration".into(),
        });
    }
    CoxeterMatrix::from_edges(&names, &edges)
}

struct Token {
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c.is_whitespace() {
                continue;
            }
            if c == ';' {
                out.push(Token {
                    text: ";".into(),
                    line: ln + 1,
                    col: i + 1,
                });
                continue;
            }
            let col = i + 1;
            let mut word = String::new();
            word.push(c);
            while let Some(&(_, c2)) = chars.peek() {
                if c2.is_whitespace() || c2 == ';' {
                    break;
                }
                word.push(c2);
                chars.next();
            }
            out.push(Token {
                text: word,
                line: ln + 1,
                col,
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Isomorphism and canonical labeling
// ---------------------------------------------------------------------------

/// Edge-labeled graph isomorphism by iterative refinement with full
/// backtracking. Ranks in this crate stay ≤ 12, so exact search is cheap.
pub fn isomorphic(a: &CoxeterMatrix, b: &CoxeterMatrix) -> bool {
    isomorphism(a, b).is_some()
}

/// Finds a node bijection `a -> b` preserving all labels, if one exists.
pub fn isomorphism(a: &CoxeterMatrix, b: &CoxeterMatrix) -> Option<Vec<usize>> {
    isomorphism_colored(a, &vec![0; a.rank()], b, &vec![0; b.rank()])
}

/// Isomorphism that must also preserve an integer node coloring.
pub fn isomorphism_colored(
    a: &CoxeterMatrix,
    ca: &[u64],
    b: &CoxeterMatrix,
    cb: &[u64],
) -> Option<Vec<usize>> {
    if a.rank() != b.rank() {
        return None;
    }
    let n = a.rank();
    let ra = refine(a, ca);
    let rb = refine(b, cb);
    {
        let mut sa = ra.clone();
        let mut sb = rb.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return None;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    // Order source nodes by decreasing degree for faster pruning.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(a.degree(i)));
    fn bt(
        a: &CoxeterMatrix,
        b: &CoxeterMatrix,
        ra: &[u64],
        rb: &[u64],
        order: &[usize],
        k: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let i = order[k];
        for j in 0..b.rank() {
            if used[j] || ra[i] != rb[j] {
                continue;
            }
            let ok = order[..k].iter().all(|&p| a.label(i, p) == b.label(map[p], j));
            if ok {
                map[i] = j;
                used[j] = true;
                if bt(a, b, ra, rb, order, k + 1, map, used) {
                    return true;
                }
                used[j] = false;
                map[i] = usize::MAX;
            }
        }
        false
    }
    if bt(a, b, &ra, &rb, &order, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Enumerates all label-preserving bijections `a -> b`.
pub fn all_isomorphisms(a: &CoxeterMatrix, b: &CoxeterMatrix) -> Vec<Vec<usize>> {
    if a.rank() != b.rank() {
        return Vec::new();
    }
    let n = a.rank();
    let ra = refine(a, &vec![0; n]);
    let rb = refine(b, &vec![0; n]);
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn bt(
        a: &CoxeterMatrix,
        b: &CoxeterMatrix,
        ra: &[u64],
        rb: &[u64],
        k: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = a.rank();
        if k == n {
            out.push(map.clone());
            return;
        }
        for j in 0..n {
            if used[j] || ra[k] != rb[j] {
                continue;
            }
            let ok = (0..k).all(|p| a.label(k, p) == b.label(map[p], j));
            if ok {
                map[k] = j;
                used[j] = true;
                bt(a, b, ra, rb, k + 1, map, used, out);
                used[j] = false;
                map[k] = usize::MAX;
            }
        }
    }
    bt(a, b, &ra, &rb, 0, &mut map, &mut used, &mut out);
    out
}

/// Iterative refinement: stable node invariants from (color, degree, incident
/// label multiset), hashed. Equal invariants are a necessary condition for
/// node correspondence.
fn refine(w: &CoxeterMatrix, init: &[u64]) -> Vec<u64> {
    let n = w.rank();
    let mut colors: Vec<u64> = init.to_vec();
    for _ in 0..n.max(2) {
        let mut next: Vec<u64> = Vec::with_capacity(n);
        for i in 0..n {
            let mut sig: Vec<(u64, u64)> = (0..n)
                .filter(|&j| j != i && w.label(i, j).is_edge())
                .map(|j| (label_code(w.label(i, j)), colors[j]))
                .collect();
            sig.sort_unstable();
            let mut h: u64 = colors[i].wrapping_mul(0x9E3779B97F4A7C15);
            for (l, c) in sig {
                h = h
                    .rotate_left(13)
                    .wrapping_add(l.wrapping_mul(0x100000001B3))
                    .wrapping_add(c.wrapping_mul(0x1000193));
            }
            next.push(h);
        }
        if next == colors {
            break;
        }
        colors = next;
    }
    colors
}

fn label_code(l: Label) -> u64 {
    match l {
        Label::Finite(m) => m as u64,
        Label::Infinity => u64::MAX,
    }
}

/// A canonical certificate: two diagrams have equal certificates iff they are
/// isomorphic (with node colors respected).
pub fn certificate_colored(w: &CoxeterMatrix, colors: &[u64]) -> Vec<u64> {
    let n = w.rank();
    let ra = refine(w, colors);
    // Backtracking over orderings compatible with refinement classes,
    // minimizing the serialized adjacency.
    let mut best: Option<Vec<u64>> = None;
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn serialize(w: &CoxeterMatrix, colors: &[u64], perm: &[usize]) -> Vec<u64> {
        let mut v = Vec::new();
        for (a, &i) in perm.iter().enumerate() {
            v.push(colors[i]);
            for &j in perm.iter().take(a) {
                v.push(label_code(w.label(i, j)));
            }
        }
        v
    }
    fn bt(
        w: &CoxeterMatrix,
        colors: &[u64],
        ra: &[u64],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<Vec<u64>>,
    ) {
        let n = w.rank();
        if perm.len() == n {
            let s = serialize(w, colors, perm);
            if best.is_none() || s < *best.as_ref().unwrap() {
                *best = Some(s);
            }
            return;
        }
        // Candidates: pick from the refinement class with the smallest hash
        // among unused nodes to bound branching.
        let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            if !used[i] {
                classes.entry(ra[i]).or_default().push(i);
            }
        }
        let (_, cands) = classes.into_iter().next().unwrap();
        for i in cands {
            perm.push(i);
            used[i] = true;
            bt(w, colors, ra, perm, used, best);
            used[i] = false;
            perm.pop();
        }
    }
    if n == 0 {
        return Vec::new();
    }
    // Normalize hashes to small class ids for stability of the certificate.
    let mut classes: Vec<u64> = ra.clone();
    classes.sort_unstable();
    classes.dedup();
    let ra_small: Vec<u64> = ra
        .iter()
        .map(|h| classes.binary_search(h).unwrap() as u64)
        .collect();
    let mut colors_small: Vec<u64> = colors.to_vec();
    {
        let mut cs: Vec<u64> = colors_small.clone();
        cs.sort_unstable();
        cs.dedup();
        for c in colors_small.iter_mut() {
            *c = cs.binary_search(c).unwrap() as u64;
        }
    }
    bt(w, &colors_small, &ra_small, &mut perm, &mut used, &mut best);
    best.unwrap()
}

pub fn certificate(w: &CoxeterMatrix) -> Vec<u64> {
    certificate_colored(w, &vec![0; w.rank()])
}

/// Diagram automorphisms (as node permutations).
pub fn automorphisms(w: &CoxeterMatrix) -> Vec<Vec<usize>> {
    all_isomorphisms(w, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic() {
        let w = parse_diagram("nodes a b; edge a b 4;").unwrap();
        assert_eq!(w.rank(), 2);
        assert_eq!(w.label(0, 1), Label::Finite(4));
        assert_eq!(w.label(0, 0), Label::Finite(1));
    }

    #[test]
    fn parse_triangle_default_label() {
        let w = parse_diagram("nodes a b c; edge a b; edge b c; edge c a").unwrap();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert_eq!(w.label(i, j), Label::Finite(3));
        }
        assert_eq!(w.shape(), Shape::Cycle);
    }

    #[test]
    fn parse_infinity() {
        let w = parse_diagram("nodes a b; edge a b inf;").unwrap();
        assert_eq!(w.label(0, 1), Label::Infinity);
    }

    #[test]
    fn parse_comments_and_errors() {
        assert!(parse_diagram("nodes a b; # c\nedge a b 4; # ok").is_ok());
        assert!(matches!(
            parse_diagram("nodes a b; edge a b 2;"),
            Err(DiagramError::Parse { .. })
        ));
        assert!(matches!(
            parse_diagram("nodes a b; edge a a;"),
            Err(DiagramError::Parse { .. })
        ));
        assert!(matches!(
            parse_diagram("nodes a b; edge a c;"),
            Err(DiagramError::Parse { .. })
        ));
        assert!(matches!(
            parse_diagram("nodes a b; edge a b; edge b a;"),
            Err(DiagramError::Parse { .. })
        ));
    }

    #[test]
    fn components_of_disjoint_union() {
        let w = parse_diagram("nodes a b c d; edge a b; edge c d 5;").unwrap();
        let comps = w.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].0, vec![0, 1]);
        assert_eq!(comps[1].0, vec![2, 3]);
    }

    #[test]
    fn shapes() {
        let cycle = CoxeterMatrix::from_unnamed(5, &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (3, 4, 3), (4, 0, 3)]);
        assert_eq!(cycle.shape(), Shape::Cycle);
        let pan = CoxeterMatrix::from_unnamed(
            5,
            &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (3, 0, 3), (4, 0, 3)],
        );
        assert_eq!(pan.shape(), Shape::Pan);
        let k23 = CoxeterMatrix::from_unnamed(
            5,
            &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (3, 0, 3), (3, 4, 3), (4, 1, 3)],
        );
        assert_eq!(k23.shape(), Shape::K23);
        let path = CoxeterMatrix::from_unnamed(4, &[(0, 1, 3), (1, 2, 3), (2, 3, 3)]);
        assert_eq!(path.shape(), Shape::Tree);
    }

    #[test]
    fn isomorphism_respects_labels() {
        let a = CoxeterMatrix::from_unnamed(3, &[(0, 1, 4), (1, 2, 3)]);
        let b = CoxeterMatrix::from_unnamed(3, &[(0, 1, 3), (1, 2, 4)]);
        assert!(isomorphic(&a, &b));
        let c = CoxeterMatrix::from_unnamed(3, &[(0, 1, 5), (1, 2, 3)]);
        assert!(!isomorphic(&a, &c));
        assert_eq!(certificate(&a), certificate(&b));
        assert_ne!(certificate(&a), certificate(&c));
    }

    #[test]
    fn cycle_automorphisms_are_dihedral() {
        let cycle = CoxeterMatrix::from_unnamed(
            6,
            &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (5, 0, 3)],
        );
        assert_eq!(automorphisms(&cycle).len(), 12);
    }
}
