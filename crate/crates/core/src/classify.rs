//! Classification of Coxeter diagrams: spherical / affine / large for
//! irreducible diagrams, the Lannér family predicates, node colors of
//! 2-Lannér diagrams, and table lookup.

use crate::diagram::{isomorphic, CoxeterMatrix, Label, Shape};
use crate::tables;
use crate::Tolerance;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Spherical,
    Affine,
    Large,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramClass {
    pub kind: Kind,
    /// Table label; always present for spherical/affine, present for large
    /// diagrams appearing in the built-in Lannér/2-Lannér tables.
    pub name: Option<String>,
    pub shape: Shape,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("diagram is not connected")]
    Disconnected,
    #[error("spectral test says {kind:?} but no catalog diagram matches; this is an internal consistency failure")]
    TableMismatch { kind: Kind },
    #[error("diagram is not 2-Lannér")]
    NotTwoLanner,
}

/// Symmetric cosine Gram matrix with entries `cos(π/M_st)` off the diagonal
/// (sign conventions do not affect the spectrum used for classification; this
/// uses the Cartan normalization `-2 cos(π/M_st)` with diagonal 2).
fn cosine_gram(w: &CoxeterMatrix) -> DMatrix<f64> {
    let n = w.rank();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else {
            -2.0 * w.label(i, j).cos_pi_over()
        }
    })
}

/// Eigenvalues of the cosine matrix, ascending.
pub fn cosine_spectrum(w: &CoxeterMatrix) -> Vec<f64> {
    let m = cosine_gram(w);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Spectral kind of a connected diagram: positive definite cosine matrix is
/// spherical, positive semidefinite with kernel is affine, indefinite is large.
pub fn spectral_kind(w: &CoxeterMatrix, tol: Tolerance) -> Result<Kind, ClassifyError> {
    if !w.is_connected() {
        return Err(ClassifyError::Disconnected);
    }
    let ev = cosine_spectrum(w);
    let scale = ev.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let eps = tol.abs(scale);
    let min = ev[0];
    if min > eps {
        Ok(Kind::Spherical)
    } else if min >= -eps {
        Ok(Kind::Affine)
    } else {
        Ok(Kind::Large)
    }
}

fn i2_labels(w: &CoxeterMatrix) -> Vec<u32> {
    let mut v: Vec<u32> = w
        .edges()
        .iter()
        .filter_map(|&(_, _, l)| match l {
            Label::Finite(m) if m >= 5 => Some(m),
            _ => None,
        })
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Looks up a connected spherical or affine diagram in the Appendix catalog.
pub fn catalog_name(w: &CoxeterMatrix, kind: Kind) -> Option<String> {
    let rank = w.rank();
    let candidates = match kind {
        Kind::Spherical => tables::spherical_catalog(rank, &i2_labels(w)),
        Kind::Affine => tables::affine_catalog(rank),
        Kind::Large => return None,
    };
    candidates
        .into_iter()
        .find(|(_, m)| isomorphic(w, m))
        .map(|(n, _)| n)
}

/// Classifies a connected diagram, checking the spectral result against the
/// catalog: a spherical/affine verdict without a matching catalog entry is an
/// internal-consistency failure.
pub fn classify_irreducible(
    w: &CoxeterMatrix,
    tol: Tolerance,
) -> Result<DiagramClass, ClassifyError> {
    let kind = spectral_kind(w, tol)?;
    let shape = w.shape();
    let name = match kind {
        Kind::Spherical | Kind::Affine => {
            let n = catalog_name(w, kind);
            if n.is_none() {
                return Err(ClassifyError::TableMismatch { kind });
            }
            n
        }
        Kind::Large => match_table(w),
    };
    Ok(DiagramClass { kind, name, shape })
}

/// True when every component of (a possibly reducible) diagram is spherical.
pub fn is_spherical(w: &CoxeterMatrix, tol: Tolerance) -> bool {
    w.components()
        .iter()
        .all(|(_, m)| spectral_kind(m, tol) == Ok(Kind::Spherical))
}

/// True when the diagram is connected and of affine kind.
pub fn is_irreducible_affine(w: &CoxeterMatrix, tol: Tolerance) -> bool {
    w.is_connected() && spectral_kind(w, tol) == Ok(Kind::Affine)
}

pub fn is_irreducible_large(w: &CoxeterMatrix, tol: Tolerance) -> bool {
    w.is_connected() && spectral_kind(w, tol) == Ok(Kind::Large)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LannerFlags {
    pub is_lanner: bool,
    pub is_quasi_lanner: bool,
    pub is_2_lanner: bool,
}

/// Lannér / quasi-Lannér / 2-Lannér predicates, computed from the definitions
/// by classifying standard subgroups of corank 1 and 2. Reducible or
/// non-large input yields all-false flags.
pub fn classify_subgroup_family(w: &CoxeterMatrix, tol: Tolerance) -> LannerFlags {
    let none = LannerFlags {
        is_lanner: false,
        is_quasi_lanner: false,
        is_2_lanner: false,
    };
    if !is_irreducible_large(w, tol) {
        return none;
    }
    let n = w.rank();
    let mut lanner = true;
    let mut quasi = true;
    for s in 0..n {
        let sub = w.delete_node(s);
        let sph = is_spherical(&sub, tol);
        if !sph {
            lanner = false;
            if !is_irreducible_affine(&sub, tol) {
                quasi = false;
            }
        }
    }
    let mut two = true;
    'outer: for s in 0..n {
        for t in (s + 1)..n {
            let keep: Vec<usize> = (0..n).filter(|&i| i != s && i != t).collect();
            if !is_spherical(&w.restrict(&keep), tol) {
                two = false;
                break 'outer;
            }
        }
    }
    LannerFlags {
        is_lanner: lanner,
        is_quasi_lanner: quasi,
        is_2_lanner: two,
    }
}

/// Node colors of a 2-Lannér diagram, describing the corank-1 subgroup at
/// each node: spherical (white), rigid affine (black), flexible affine
/// `~A_n` (orange), rigid Lannér (blue), flexible Lannér (green).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeColor {
    White,
    Black,
    Orange,
    Blue,
    Green,
}

pub fn node_colors(w: &CoxeterMatrix, tol: Tolerance) -> Result<Vec<NodeColor>, ClassifyError> {
    if !classify_subgroup_family(w, tol).is_2_lanner {
        return Err(ClassifyError::NotTwoLanner);
    }
    let mut out = Vec::with_capacity(w.rank());
    for s in 0..w.rank() {
        let sub = w.delete_node(s);
        out.push(color_of_link(&sub, tol)?);
    }
    Ok(out)
}

/// Color of a vertex link given as a Coxeter matrix. Flexibility of the link
/// simplex is read off the shape: affine cycles (`~A_n`) and Lannér cycles
/// are the flexible ones.
pub fn color_of_link(link: &CoxeterMatrix, tol: Tolerance) -> Result<NodeColor, ClassifyError> {
    if is_spherical(link, tol) {
        return Ok(NodeColor::White);
    }
    if is_irreducible_affine(link, tol) {
        return Ok(if link.shape() == Shape::Cycle {
            NodeColor::Orange
        } else {
            NodeColor::Black
        });
    }
    if classify_subgroup_family(link, tol).is_lanner {
        return Ok(if link.shape() == Shape::Cycle {
            NodeColor::Green
        } else {
            NodeColor::Blue
        });
    }
    Err(ClassifyError::NotTwoLanner)
}

/// The built-in 2-Lannér table for a rank in 5..=10.
pub fn table_2_lanner(rank: usize) -> Option<Vec<(String, CoxeterMatrix)>> {
    tables::two_lanner(rank)
}

/// Graph-isomorphism lookup against the built-in tables: the irreducible
/// spherical/affine families, the rank-4 and rank-5 Lannér tables, and the
/// 2-Lannér tables of rank 5..10.
pub fn match_table(w: &CoxeterMatrix) -> Option<String> {
    if !w.is_connected() {
        return None;
    }
    let rank = w.rank();
    for (name, m) in tables::spherical_catalog(rank, &i2_labels(w)) {
        if isomorphic(w, &m) {
            return Some(name);
        }
    }
    for (name, m) in tables::affine_catalog(rank) {
        if isomorphic(w, &m) {
            return Some(name);
        }
    }
    if rank == 4 {
        for (name, m) in tables::lanner_rank4() {
            if isomorphic(w, &m) {
                return Some(name);
            }
        }
    }
    if let Some(t) = tables::two_lanner(rank) {
        for (name, m) in t {
            if isomorphic(w, &m) {
                return Some(name);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_diagram;
    use crate::tables::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn classify_path_a4() {
        let w = spherical_a(4);
        let c = classify_irreducible(&w, tol()).unwrap();
        assert_eq!(c.kind, Kind::Spherical);
        assert_eq!(c.name.as_deref(), Some("A4"));
        assert_eq!(c.shape, Shape::Tree);
    }

    #[test]
    fn classify_affine_triangle() {
        let w = parse_diagram("nodes a b c; edge a b; edge b c; edge c a").unwrap();
        let c = classify_irreducible(&w, tol()).unwrap();
        assert_eq!(c.kind, Kind::Affine);
        assert_eq!(c.name.as_deref(), Some("~A2"));
        assert_eq!(c.shape, Shape::Cycle);
    }

    #[test]
    fn i2_finite_is_spherical_and_73_path_is_large() {
        let w = path(&[7]);
        let c = classify_irreducible(&w, tol()).unwrap();
        assert_eq!(c.kind, Kind::Spherical);
        assert_eq!(c.name.as_deref(), Some("I2(7)"));
        // Path with labels 7, 3: the cosine matrix has a negative eigenvalue.
        let w = path(&[7, 3]);
        let c = classify_irreducible(&w, tol()).unwrap();
        assert_eq!(c.kind, Kind::Large);
        let ev = cosine_spectrum(&w);
        assert!(ev[0] < -1e-6);
    }

    #[test]
    fn whole_spherical_affine_catalog_classifies() {
        for rank in 1..=10 {
            for (name, m) in spherical_catalog(rank, &[5, 6, 7, 12]) {
                let c = classify_irreducible(&m, tol()).unwrap();
                assert_eq!(c.kind, Kind::Spherical, "{name}");
                assert_eq!(c.name.as_deref(), Some(name.as_str()));
            }
            for (name, m) in affine_catalog(rank) {
                let c = classify_irreducible(&m, tol()).unwrap();
                assert_eq!(c.kind, Kind::Affine, "{name}");
                assert_eq!(c.name.as_deref(), Some(name.as_str()));
            }
        }
    }

    #[test]
    fn lanner_flags_on_tables() {
        // First rank-4 Lannér entry: quadrilateral with one label-4 edge.
        let w = cycle(&[4, 3, 3, 3]);
        let f = classify_subgroup_family(&w, tol());
        assert!(f.is_lanner && f.is_quasi_lanner && f.is_2_lanner);
        // The pan of rank 6 is 2-Lannér and quasi-Lannér but not Lannér.
        let w = pan(&[3; 5], 3);
        let f = classify_subgroup_family(&w, tol());
        assert!(!f.is_lanner && f.is_quasi_lanner && f.is_2_lanner);
        // An affine diagram is none of the three.
        let f = classify_subgroup_family(&affine_a(2), tol());
        assert!(!f.is_lanner && !f.is_quasi_lanner && !f.is_2_lanner);
    }

    #[test]
    fn colors_of_pan_rank9() {
        // 8-cycle with pendant: the pendant node is orange (deleting it
        // leaves ~A7), exactly one cycle node is black.
        let w = pan(&[3; 8], 3);
        let colors = node_colors(&w, tol()).unwrap();
        let orange = colors.iter().filter(|&&c| c == NodeColor::Orange).count();
        let black = colors.iter().filter(|&&c| c == NodeColor::Black).count();
        assert_eq!(orange, 1);
        assert_eq!(black, 1);
        assert_eq!(colors[8], NodeColor::Orange);
    }

    #[test]
    fn colors_of_k23_exceptional() {
        let w = k23_exceptional();
        let colors = node_colors(&w, tol()).unwrap();
        let orange = colors.iter().filter(|&&c| c == NodeColor::Orange).count();
        let white = colors.iter().filter(|&&c| c == NodeColor::White).count();
        assert_eq!(orange, 3);
        assert_eq!(white, 2);
    }

    #[test]
    fn match_table_labels() {
        assert_eq!(match_table(&pan(&[3; 8], 3)).as_deref(), Some("W8t"));
        assert_eq!(match_table(&affine_a(2)).as_deref(), Some("~A2"));
        assert_eq!(match_table(&path(&[7, 3])), None);
    }
}
