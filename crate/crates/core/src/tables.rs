//! Built-in diagram catalogs: the irreducible spherical and affine families,
//! the Lannér diagrams of rank 4 and 5, the 2-Lannér diagrams of rank 5..10,
//! and the exceptional prism block trees in dimensions 4..8.
//!
//! Catalog diagrams with a range of labels on one edge are stored expanded,
//! one diagram per label value; the stored lists are duplicate-free up to
//! diagram isomorphism.

use crate::diagram::{CoxeterMatrix, Label};
use crate::polytope::BlockTree;

fn lab(m: u32) -> Label {
    if m == 0 {
        Label::Infinity
    } else {
        Label::Finite(m)
    }
}

fn named(names: &[&str], edges: &[(usize, usize, u32)]) -> CoxeterMatrix {
    let e: Vec<(usize, usize, Label)> = edges.iter().map(|&(a, b, m)| (a, b, lab(m))).collect();
    CoxeterMatrix::from_edges(names, &e).expect("catalog diagram")
}

fn letters(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let c = (b'a' + (i % 26) as u8) as char;
            if i < 26 {
                c.to_string()
            } else {
                format!("{c}{}", i / 26)
            }
        })
        .collect()
}

/// Path on `labels.len() + 1` nodes, consecutive labels as given.
pub fn path(labels: &[u32]) -> CoxeterMatrix {
    let n = labels.len() + 1;
    let names = letters(n);
    let edges: Vec<(usize, usize, u32)> = labels
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, i + 1, m))
        .collect();
    named(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &edges)
}

/// Cycle on `labels.len()` nodes; `labels[i]` sits between node `i` and `i+1 mod n`.
pub fn cycle(labels: &[u32]) -> CoxeterMatrix {
    let n = labels.len();
    let names = letters(n);
    let edges: Vec<(usize, usize, u32)> = labels
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, (i + 1) % n, m))
        .collect();
    named(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &edges)
}

/// Pan: cycle as in [`cycle`] plus a pendant node attached to cycle node 0.
pub fn pan(cycle_labels: &[u32], pendant_label: u32) -> CoxeterMatrix {
    let n = cycle_labels.len();
    let names = letters(n + 1);
    let mut edges: Vec<(usize, usize, u32)> = cycle_labels
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, (i + 1) % n, m))
        .collect();
    edges.push((n, 0, pendant_label));
    named(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &edges)
}

/// K_{2,3} on nodes 0..4 with degree-3 nodes 1 and 3. The six edges are
/// (0,1), (1,2), (2,3), (3,0), (3,4), (4,1); `e12` labels (1,2) and `e30`
/// labels (3,0), all others are 3.
pub fn k23(e12: u32, e30: u32) -> CoxeterMatrix {
    named(
        &["a", "b", "c", "d", "e"],
        &[(0, 1, 3), (1, 2, e12), (2, 3, 3), (3, 0, e30), (3, 4, 3), (4, 1, 3)],
    )
}

/// Tree from explicit edges on `n` nodes.
pub fn tree(n: usize, edges: &[(usize, usize, u32)]) -> CoxeterMatrix {
    let names = letters(n);
    named(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &edges.to_vec())
}

// ---------------------------------------------------------------------------
// Spherical and affine families
// ---------------------------------------------------------------------------

pub fn spherical_a(n: usize) -> CoxeterMatrix {
    assert!(n >= 1);
    path(&vec![3; n - 1])
}

pub fn spherical_b(n: usize) -> CoxeterMatrix {
    assert!(n >= 2);
    let mut l = vec![3; n - 1];
    l[0] = 4;
    path(&l)
}

pub fn spherical_d(n: usize) -> CoxeterMatrix {
    assert!(n >= 4);
    let mut edges: Vec<(usize, usize, u32)> = (0..n - 3).map(|i| (i, i + 1, 3)).collect();
    edges.push((n - 3, n - 2, 3));
    edges.push((n - 3, n - 1, 3));
    tree(n, &edges)
}

pub fn spherical_e(n: usize) -> CoxeterMatrix {
    assert!((6..=8).contains(&n));
    let mut edges: Vec<(usize, usize, u32)> = (0..n - 2).map(|i| (i, i + 1, 3)).collect();
    edges.push((2, n - 1, 3));
    tree(n, &edges)
}

pub fn spherical_f4() -> CoxeterMatrix {
    path(&[3, 4, 3])
}

pub fn spherical_h(n: usize) -> CoxeterMatrix {
    assert!(n == 3 || n == 4);
    let mut l = vec![3; n - 1];
    l[0] = 5;
    path(&l)
}

pub fn spherical_i2(p: u32) -> CoxeterMatrix {
    assert!(p >= 5);
    path(&[p])
}

pub fn affine_a1() -> CoxeterMatrix {
    path(&[0]) // infinity edge
}

pub fn affine_a(n: usize) -> CoxeterMatrix {
    assert!(n >= 2);
    cycle(&vec![3; n + 1])
}

pub fn affine_b(n: usize) -> CoxeterMatrix {
    assert!(n >= 3);
    let mut edges: Vec<(usize, usize, u32)> = (0..n - 2).map(|i| (i, i + 1, 3)).collect();
    edges[0] = (0, 1, 4);
    edges.push((n - 2, n - 1, 3));
    edges.push((n - 2, n, 3));
    tree(n + 1, &edges)
}

pub fn affine_c(n: usize) -> CoxeterMatrix {
    assert!(n >= 2);
    let mut l = vec![3; n];
    l[0] = 4;
    l[n - 1] = 4;
    path(&l)
}

pub fn affine_d(n: usize) -> CoxeterMatrix {
    assert!(n >= 4);
    // Central chain of n-3 nodes with two leaves at each end.
    let c = n - 3;
    let mut edges: Vec<(usize, usize, u32)> = (0..c - 1).map(|i| (i, i + 1, 3)).collect();
    edges.push((0, c, 3));
    edges.push((0, c + 1, 3));
    edges.push((c - 1, c + 2, 3));
    edges.push((c - 1, c + 3, 3));
    tree(n + 1, &edges)
}

pub fn affine_e(n: usize) -> CoxeterMatrix {
    match n {
        6 => {
            let mut edges: Vec<(usize, usize, u32)> = (0..4).map(|i| (i, i + 1, 3)).collect();
            edges.push((2, 5, 3));
            edges.push((5, 6, 3));
            tree(7, &edges)
        }
        7 => {
            let mut edges: Vec<(usize, usize, u32)> = (0..6).map(|i| (i, i + 1, 3)).collect();
            edges.push((3, 7, 3));
            tree(8, &edges)
        }
        8 => {
            let mut edges: Vec<(usize, usize, u32)> = (0..7).map(|i| (i, i + 1, 3)).collect();
            edges.push((2, 8, 3));
            tree(9, &edges)
        }
        _ => panic!("affine E index must be 6, 7 or 8"),
    }
}

pub fn affine_f4() -> CoxeterMatrix {
    path(&[3, 4, 3, 3])
}

pub fn affine_g2() -> CoxeterMatrix {
    path(&[6, 3])
}

/// All irreducible spherical diagrams of the given rank, with names.
/// `I2(p)` is included for the labels found in `extra_i2`.
pub fn spherical_catalog(rank: usize, extra_i2: &[u32]) -> Vec<(String, CoxeterMatrix)> {
    let mut out = Vec::new();
    if rank >= 1 {
        out.push((format!("A{rank}"), spherical_a(rank)));
    }
    if rank >= 2 {
        out.push((format!("B{rank}"), spherical_b(rank)));
    }
    if rank >= 4 {
        out.push((format!("D{rank}"), spherical_d(rank)));
    }
    if (6..=8).contains(&rank) {
        out.push((format!("E{rank}"), spherical_e(rank)));
    }
    if rank == 4 {
        out.push(("F4".into(), spherical_f4()));
        out.push(("H4".into(), spherical_h(4)));
    }
    if rank == 3 {
        out.push(("H3".into(), spherical_h(3)));
    }
    if rank == 2 {
        for &p in extra_i2 {
            if p >= 5 {
                out.push((format!("I2({p})"), spherical_i2(p)));
            }
        }
    }
    out
}

/// All irreducible affine diagrams of the given rank (number of nodes), with names.
pub fn affine_catalog(rank: usize) -> Vec<(String, CoxeterMatrix)> {
    let mut out = Vec::new();
    if rank == 2 {
        out.push(("~A1".into(), affine_a1()));
    }
    if rank >= 3 {
        let n = rank - 1;
        out.push((format!("~A{n}"), affine_a(n)));
        out.push((format!("~C{n}"), affine_c(n)));
        if n >= 3 {
            out.push((format!("~B{n}"), affine_b(n)));
        }
        if n >= 4 {
            out.push((format!("~D{n}"), affine_d(n)));
        }
        if (6..=8).contains(&n) {
            out.push((format!("~E{n}"), affine_e(n)));
        }
        if n == 4 {
            out.push(("~F4".into(), affine_f4()));
        }
        if n == 2 {
            out.push(("~G2".into(), affine_g2()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Lannér tables (ranks 4 and 5)
// ---------------------------------------------------------------------------

/// The nine Lannér diagrams of rank 4.
pub fn lanner_rank4() -> Vec<(String, CoxeterMatrix)> {
    let ds = vec![
        cycle(&[4, 3, 3, 3]),
        cycle(&[5, 3, 3, 3]),
        cycle(&[4, 3, 4, 3]),
        cycle(&[5, 3, 4, 3]),
        cycle(&[5, 3, 5, 3]),
        path(&[3, 5, 3]),
        path(&[5, 3, 4]),
        path(&[5, 3, 5]),
        tree(4, &[(0, 1, 5), (1, 2, 3), (1, 3, 3)]),
    ];
    ds.into_iter()
        .enumerate()
        .map(|(i, m)| (format!("L3.{}", i + 1), m))
        .collect()
}

/// The five Lannér diagrams of rank 5.
pub fn lanner_rank5() -> Vec<(String, CoxeterMatrix)> {
    let ds = vec![
        cycle(&[4, 3, 3, 3, 3]),
        path(&[5, 3, 3, 3]),
        path(&[5, 3, 3, 4]),
        path(&[5, 3, 3, 5]),
        tree(5, &[(0, 1, 5), (1, 2, 3), (2, 3, 3), (2, 4, 3)]),
    ];
    ds.into_iter()
        .enumerate()
        .map(|(i, m)| (format!("L4.{}", i + 1), m))
        .collect()
}

// ---------------------------------------------------------------------------
// 2-Lannér tables (ranks 5..10)
// ---------------------------------------------------------------------------

/// Tree: path `a-b-c` plus two leaves `d`, `e` at `c`; `ab` and the leaf
/// labels parametrize the rank-5 entries of this shape.
fn y_tree(ab: u32, cd: u32, ce: u32) -> CoxeterMatrix {
    tree(5, &[(0, 1, ab), (1, 2, 3), (2, 3, cd), (2, 4, ce)])
}

/// Star with center 0 and leaves 1..=4; one edge carries `m`.
fn star4(m: u32) -> CoxeterMatrix {
    tree(5, &[(0, 1, m), (0, 2, 3), (0, 3, 3), (0, 4, 3)])
}

/// The 45 2-Lannér diagrams of rank 5, in table order with ranged labels
/// expanded in ascending order. Labels `W4.01`..`W4.45`.
pub fn two_lanner_rank5() -> Vec<(String, CoxeterMatrix)> {
    let mut ds: Vec<CoxeterMatrix> = Vec::new();
    // Lannér (flexible, then rigid).
    ds.push(cycle(&[4, 3, 3, 3, 3]));
    ds.push(path(&[5, 3, 3, 3]));
    ds.push(path(&[5, 3, 3, 4]));
    ds.push(path(&[5, 3, 3, 5]));
    ds.push(tree(5, &[(0, 1, 5), (1, 2, 3), (2, 3, 3), (2, 4, 3)]));
    // Rigid quasi-Lannér.
    ds.push(star4(4));
    ds.push(y_tree(3, 3, 4));
    ds.push(y_tree(4, 3, 4));
    ds.push(tree(5, &[(0, 1, 3), (1, 2, 4), (2, 3, 3), (2, 4, 3)]));
    ds.push(path(&[4, 3, 4, 3]));
    // Flexible quasi-Lannér.
    ds.push(cycle(&[4, 3, 4, 3, 3]));
    ds.push(pan(&[3, 3, 3, 3], 3));
    ds.push(pan(&[3, 3, 3, 3], 4));
    ds.push(k23(3, 3));
    // Flexible 2-Lannér.
    ds.push(k23(3, 4));
    ds.push(k23(3, 5));
    ds.push(k23(4, 4));
    ds.push(k23(5, 4));
    ds.push(k23(5, 5));
    ds.push(cycle(&[4, 3, 5, 3, 3]));
    ds.push(cycle(&[3, 3, 5, 3, 3]));
    ds.push(cycle(&[5, 3, 5, 3, 3]));
    ds.push(pan(&[3, 3, 4, 3], 3));
    ds.push(pan(&[3, 3, 5, 3], 3));
    ds.push(pan(&[4, 3, 3, 3], 3));
    ds.push(pan(&[4, 3, 4, 3], 3));
    ds.push(pan(&[4, 3, 5, 3], 3));
    ds.push(pan(&[3, 3, 3, 3], 5));
    ds.push(pan(&[3, 3, 3, 5], 3));
    ds.push(pan(&[3, 4, 3, 5], 3));
    ds.push(pan(&[3, 5, 3, 5], 3));
    ds.push(pan(&[3, 3, 4, 3], 5));
    ds.push(pan(&[3, 3, 5, 3], 5));
    ds.push(pan(&[3, 3, 5, 3], 4));
    ds.push(pan(&[3, 3, 4, 3], 4));
    // Rigid 2-Lannér.
    ds.push(y_tree(3, 3, 5));
    ds.push(y_tree(4, 3, 5));
    ds.push(y_tree(5, 3, 5));
    ds.push(y_tree(5, 3, 4));
    ds.push(tree(5, &[(0, 1, 3), (1, 2, 5), (2, 3, 3), (2, 4, 3)]));
    ds.push(star4(5));
    ds.push(path(&[4, 3, 5, 3]));
    ds.push(path(&[5, 3, 5, 3]));
    ds.push(path(&[3, 3, 5, 3]));
    ds.push(path(&[3, 4, 3, 5]));
    ds.into_iter()
        .enumerate()
        .map(|(i, m)| (format!("W4.{:02}", i + 1), m))
        .collect()
}

/// Path of `labels.len() + 1` nodes plus a pendant leaf at path node `at`.
fn path_with_leaf(labels: &[u32], at: usize) -> CoxeterMatrix {
    let n = labels.len() + 1;
    let mut edges: Vec<(usize, usize, u32)> = labels
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, i + 1, m))
        .collect();
    edges.push((at, n, 3));
    tree(n + 1, &edges)
}

fn path_with_two_leaves(labels: &[u32], at1: usize, at2: usize) -> CoxeterMatrix {
    let n = labels.len() + 1;
    let mut edges: Vec<(usize, usize, u32)> = labels
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, i + 1, m))
        .collect();
    edges.push((at1, n, 3));
    edges.push((at2, n + 1, 3));
    tree(n + 2, &edges)
}

/// The 23 2-Lannér diagrams of rank 6.
pub fn two_lanner_rank6() -> Vec<(String, CoxeterMatrix)> {
    let mut out: Vec<(String, CoxeterMatrix)> = Vec::new();
    out.push(("W5t".into(), pan(&[3, 3, 3, 3, 3], 3)));
    out.push(("W5c1".into(), cycle(&[3, 4, 3, 3, 3, 3])));
    out.push(("W5c2".into(), cycle(&[3, 4, 3, 3, 4, 3])));
    out.push(("W51".into(), path_with_leaf(&[4, 3, 3, 4], 2)));
    out.push(("W52".into(), path_with_leaf(&[4, 3, 3, 3], 2)));
    out.push((
        "W53".into(),
        tree(6, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3), (0, 5, 3)]),
    ));
    out.push(("W54".into(), path(&[3, 3, 3, 4, 3])));
    out.push(("W55".into(), path(&[3, 4, 3, 3, 4])));
    out.push(("W56".into(), path(&[3, 3, 4, 3, 3])));
    out.push((
        "W57".into(),
        tree(6, &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (2, 4, 3), (2, 5, 3)]),
    ));
    out.push((
        "W58".into(),
        tree(6, &[(0, 1, 4), (1, 2, 3), (2, 3, 3), (2, 4, 3), (2, 5, 3)]),
    ));
    out.push((
        "W59".into(),
        tree(6, &[(0, 1, 3), (1, 2, 4), (2, 3, 3), (3, 4, 3), (3, 5, 3)]),
    ));
    out.push(("W5p1".into(), pan(&[3, 4, 3, 3, 3], 3)));
    out.push(("W5p2".into(), pan(&[3, 3, 4, 3, 3], 3)));
    out.push(("W5t1".into(), path_with_leaf(&[5, 3, 3, 3], 2)));
    out.push(("W5t2".into(), path_with_leaf(&[5, 3, 3, 4], 2)));
    out.push(("W5t3".into(), path_with_leaf(&[5, 3, 3, 5], 2)));
    out.push((
        "W5t4".into(),
        tree(6, &[(0, 1, 5), (1, 2, 3), (2, 3, 3), (2, 4, 3), (2, 5, 3)]),
    ));
    out.push(("W5t5".into(), path(&[5, 3, 3, 3, 3])));
    out.push(("W5t6".into(), path(&[5, 3, 3, 3, 4])));
    out.push(("W5t7".into(), path(&[5, 3, 3, 3, 5])));
    out.push(("W5t8".into(), path(&[3, 4, 3, 3, 5])));
    out.push((
        "W5t9".into(),
        tree(6, &[(0, 1, 5), (1, 2, 3), (2, 3, 3), (3, 4, 3), (3, 5, 3)]),
    ));
    out
}

/// The three 2-Lannér diagrams of rank 7.
pub fn two_lanner_rank7() -> Vec<(String, CoxeterMatrix)> {
    vec![
        ("W6t".into(), pan(&[3; 6], 3)),
        ("W61".into(), path_with_two_leaves(&[3, 3, 3, 3], 2, 3)),
        ("W62".into(), path_with_leaf(&[4, 3, 3, 3, 3], 3)),
    ]
}

/// The four 2-Lannér diagrams of rank 8.
pub fn two_lanner_rank8() -> Vec<(String, CoxeterMatrix)> {
    vec![
        ("W7t".into(), pan(&[3; 7], 3)),
        ("W71".into(), path_with_two_leaves(&[3, 3, 3, 3, 3], 2, 4)),
        ("W72".into(), path_with_leaf(&[4, 3, 3, 3, 3, 3], 4)),
        (
            "W73".into(),
            tree(
                8,
                &[
                    (0, 1, 3),
                    (1, 2, 3),
                    (2, 3, 3),
                    (3, 4, 3),
                    (4, 5, 3),
                    (3, 6, 3),
                    (6, 7, 3),
                ],
            ),
        ),
    ]
}

/// The four 2-Lannér diagrams of rank 9.
pub fn two_lanner_rank9() -> Vec<(String, CoxeterMatrix)> {
    vec![
        ("W8t".into(), pan(&[3; 8], 3)),
        ("W81".into(), path_with_two_leaves(&[3; 6], 2, 5)),
        ("W82".into(), path_with_leaf(&[4, 3, 3, 3, 3, 3, 3], 5)),
        ("W83".into(), path_with_leaf(&[3; 7], 4)),
    ]
}

/// The three 2-Lannér diagrams of rank 10.
pub fn two_lanner_rank10() -> Vec<(String, CoxeterMatrix)> {
    vec![
        ("W91".into(), path_with_two_leaves(&[3; 7], 2, 6)),
        ("W92".into(), path_with_leaf(&[3; 8], 6)),
        ("W93".into(), path_with_leaf(&[4, 3, 3, 3, 3, 3, 3, 3], 6)),
    ]
}

/// The built-in 2-Lannér table for a rank in 5..=10.
pub fn two_lanner(rank: usize) -> Option<Vec<(String, CoxeterMatrix)>> {
    match rank {
        5 => Some(two_lanner_rank5()),
        6 => Some(two_lanner_rank6()),
        7 => Some(two_lanner_rank7()),
        8 => Some(two_lanner_rank8()),
        9 => Some(two_lanner_rank9()),
        10 => Some(two_lanner_rank10()),
        _ => None,
    }
}

/// Resolves a catalog label (spherical/affine family name, Lannér or
/// 2-Lannér table label) to its diagram.
pub fn lookup(label: &str) -> Option<CoxeterMatrix> {
    // Spherical and affine family names.
    let parse_indexed = |s: &str| -> Option<usize> { s.parse().ok() };
    if let Some(rest) = label.strip_prefix("~") {
        let (letter, idx) = rest.split_at(1);
        let n = parse_indexed(idx)?;
        return match letter {
            "A" if n == 1 => Some(affine_a1()),
            "A" if n >= 2 => Some(affine_a(n)),
            "B" if n >= 3 => Some(affine_b(n)),
            "C" if n >= 2 => Some(affine_c(n)),
            "D" if n >= 4 => Some(affine_d(n)),
            "E" if (6..=8).contains(&n) => Some(affine_e(n)),
            "F" if n == 4 => Some(affine_f4()),
            "G" if n == 2 => Some(affine_g2()),
            _ => None,
        };
    }
    if let Some(inner) = label.strip_prefix("I2(").and_then(|s| s.strip_suffix(')')) {
        let p: u32 = inner.parse().ok()?;
        return if p >= 5 { Some(spherical_i2(p)) } else { None };
    }
    if label.len() >= 2 {
        let (letter, idx) = label.split_at(1);
        if let Some(n) = parse_indexed(idx) {
            match letter {
                "A" if n >= 1 => return Some(spherical_a(n)),
                "B" if n >= 2 => return Some(spherical_b(n)),
                "D" if n >= 4 => return Some(spherical_d(n)),
                "E" if (6..=8).contains(&n) => return Some(spherical_e(n)),
                "F" if n == 4 => return Some(spherical_f4()),
                "H" if n == 3 || n == 4 => return Some(spherical_h(n)),
                _ => {}
            }
        }
    }
    for t in [lanner_rank4(), lanner_rank5()] {
        if let Some((_, m)) = t.into_iter().find(|(n, _)| n == label) {
            return Some(m);
        }
    }
    for rank in 5..=10 {
        if let Some(t) = two_lanner(rank) {
            if let Some((_, m)) = t.into_iter().find(|(n, _)| n == label) {
                return Some(m);
            }
        }
    }
    None
}

/// The block diagram of the flexible quasi-Lannér pan of rank `d+1` whose
/// single orange vertex makes it the building block for the exceptional
/// prisms: the (d-1)-cycle of label 3 with one pendant node.
///
/// For `d = 4` the pendant edge carries the label 4 (the all-3 pan block of
/// rank 5 is the one with a label-3 pendant; both exist, this returns the one
/// used by the exceptional 4-prisms).
pub fn pan_block(d: usize) -> CoxeterMatrix {
    assert!((4..=8).contains(&d));
    if d == 4 {
        pan(&[3, 3, 3, 3], 4)
    } else {
        pan(&vec![3; d], 3)
    }
}

/// The left simplex group of the exceptional family: the all-3 K_{2,3}
/// diagram, whose three degree-2 nodes are flexible affine.
pub fn k23_exceptional() -> CoxeterMatrix {
    k23(3, 3)
}

/// The right simplex group of the same figure: K_{2,3} with one label-4 edge,
/// having one flexible affine and two flexible Lannér nodes.
pub fn k23_mixed() -> CoxeterMatrix {
    k23(3, 4)
}

// ---------------------------------------------------------------------------
// Exceptional prisms as block trees
// ---------------------------------------------------------------------------

/// The once-truncated pan simplex of dimension `d` (a `d`-prism).
pub fn prism(d: usize) -> BlockTree {
    let block = pan_block(d);
    let pendant = block.names()[d].clone();
    let mut t = BlockTree::simplex(&block).expect("pan block");
    t.truncate(0, &pendant).expect("pendant vertex is intact");
    t
}

/// Gluing of two copies of the `d`-prism with pendant attachments at cyclic
/// distance `k` (`0 <= k <= d/2`). The interface is the affine (d-1)-cycle.
pub fn glued_prism(d: usize, k: usize) -> BlockTree {
    assert!(k <= d / 2);
    let block = pan_block(d);
    let pendant = block.names()[d].clone();
    let t1 = BlockTree::simplex(&block).expect("pan block");
    let t2 = BlockTree::simplex(&block).expect("pan block");
    // Link of the pendant-opposite vertex is the d-cycle on nodes 0..d-1.
    // phi rotates by k.
    let names = block.names().to_vec();
    let phi: Vec<(String, String)> = (0..d)
        .map(|i| (names[i].clone(), names[(i + k) % d].clone()))
        .collect();
    BlockTree::glue(&t1, 0, &pendant, &t2, 0, &pendant, &phi).expect("valid prism gluing")
}

/// The 15-node forest example: a dimension-4 tree of eight K_{2,3} blocks
/// (six all-3 blocks, four mixed blocks) with five truncations, whose orange
/// forest has n2 = 3, n3 = 3, n_c = 2 and 864 components.
pub fn figure6_tree() -> BlockTree {
    let exc = BlockTree::simplex(&k23_exceptional()).expect("K23 block");
    let mixed = BlockTree::simplex(&k23_mixed()).expect("K23 block");
    let id4 = |from: [&str; 4], to: [&str; 4]| -> Vec<(String, String)> {
        from.iter()
            .zip(to.iter())
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    };
    // Links: deleting a degree-2 node of K23 leaves the 4-cycle on the
    // remaining nodes; "a" is the affine corner of the mixed block.
    let orange_link = |v: char| -> [&'static str; 4] {
        match v {
            'a' => ["b", "c", "d", "e"],
            'c' => ["d", "e", "b", "a"],
            'e' => ["a", "b", "c", "d"],
            _ => unreachable!(),
        }
    };
    // Blocks in final index order: D=0, B=1, E=2, F=3, G=4, I=5, J=6, L=7, M=8, N=9.
    // D glues B, E, F at its three affine corners.
    let t = BlockTree::glue(
        &exc, 0, "a", &exc, 0, "a",
        &id4(orange_link('a'), orange_link('a')),
    )
    .unwrap(); // D(0) + B(1)
    let t = BlockTree::glue(
        &t, 0, "c", &exc, 0, "a",
        &id4(orange_link('c'), orange_link('a')),
    )
    .unwrap(); // + E(2)
    let t = BlockTree::glue(
        &t, 0, "e", &mixed, 0, "a",
        &id4(orange_link('e'), orange_link('a')),
    )
    .unwrap(); // + F(3)
    // E glues G at a second affine corner; G glues I; I glues J.
    let t = BlockTree::glue(
        &t, 2, "c", &exc, 0, "a",
        &id4(orange_link('c'), orange_link('a')),
    )
    .unwrap(); // + G(4)
    let t = BlockTree::glue(
        &t, 4, "c", &exc, 0, "a",
        &id4(orange_link('c'), orange_link('a')),
    )
    .unwrap(); // + I(5)
    let t = BlockTree::glue(
        &t, 5, "c", &exc, 0, "a",
        &id4(orange_link('c'), orange_link('a')),
    )
    .unwrap(); // + J(6)
    // Green chain F - L - M - N on the Lannér corners of the mixed blocks.
    let t = BlockTree::glue(
        &t, 3, "c",
        &mixed, 0, "c",
        &vec![
            ("a".into(), "a".into()),
            ("b".into(), "b".into()),
            ("d".into(), "d".into()),
            ("e".into(), "e".into()),
        ],
    )
    .unwrap(); // + L(7)
    let lm: Vec<(String, String)> = vec![
        ("a".into(), "a".into()),
        ("b".into(), "b".into()),
        ("c".into(), "e".into()),
        ("d".into(), "d".into()),
    ];
    let t = BlockTree::glue(&t, 7, "e", &mixed, 0, "c", &lm).unwrap(); // + M(8)
    let t = BlockTree::glue(&t, 8, "e", &mixed, 0, "c", &lm).unwrap(); // + N(9)
    // Truncations: two corners of B, one of G, one of J, the affine corner of L.
    let mut t = t;
    t.truncate(1, "c").unwrap();
    t.truncate(1, "e").unwrap();
    t.truncate(4, "e").unwrap();
    t.truncate(6, "e").unwrap();
    t.truncate(7, "a").unwrap();
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{certificate, isomorphic};

    #[test]
    fn table_counts_match() {
        assert_eq!(two_lanner_rank5().len(), 45);
        assert_eq!(two_lanner_rank6().len(), 23);
        assert_eq!(two_lanner_rank7().len(), 3);
        assert_eq!(two_lanner_rank8().len(), 4);
        assert_eq!(two_lanner_rank9().len(), 4);
        assert_eq!(two_lanner_rank10().len(), 3);
        assert_eq!(lanner_rank4().len(), 9);
        assert_eq!(lanner_rank5().len(), 5);
    }

    #[test]
    fn tables_are_duplicate_free() {
        for rank in 5..=10 {
            let t = two_lanner(rank).unwrap();
            let mut certs: Vec<Vec<u64>> = t.iter().map(|(_, m)| certificate(m)).collect();
            let before = certs.len();
            certs.sort();
            certs.dedup();
            assert_eq!(certs.len(), before, "duplicate diagram in rank-{rank} table");
            for (_, m) in &t {
                assert_eq!(m.rank(), rank);
                assert!(m.is_connected());
            }
        }
    }

    #[test]
    fn lanner_rank5_is_subset_of_two_lanner_rank5() {
        let l = lanner_rank5();
        let t = two_lanner_rank5();
        for (_, lm) in &l {
            assert!(t.iter().any(|(_, tm)| isomorphic(lm, tm)));
        }
    }

    #[test]
    fn affine_catalog_shapes() {
        assert_eq!(affine_a(2).rank(), 3);
        assert_eq!(affine_b(3).rank(), 4);
        assert_eq!(affine_c(2).rank(), 3);
        assert_eq!(affine_d(4).rank(), 5);
        assert_eq!(affine_e(6).rank(), 7);
        assert_eq!(affine_e(7).rank(), 8);
        assert_eq!(affine_e(8).rank(), 9);
    }
}
