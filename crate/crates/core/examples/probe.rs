use coxpoly::*;
use coxpoly::cartan::{build_cartan, relevant_circuits};
fn main() {
    let tol = Tolerance::default();
    let block = tables::pan_block(8);
    let c = relevant_circuits(&block)[0].clone();
    let a1 = build_cartan(&block, &[(c.clone(), 0.6)], tol).unwrap();
    let p1 = realize::realize_simplex(&a1, tol).unwrap();
    let p2b = realize::realize_simplex(&a1, tol).unwrap();
    let names = block.names().to_vec();
    let phi: Vec<(String,String)> = names[..8].iter().map(|s| (s.clone(), s.clone())).collect();
    let g = realize::glue(&p1, 0, "i", &p2b, 0, "i", &phi, 0.3).unwrap();
    for f in 0..g.facet_count() {
        let an = g.alpha(f).norm();
        let pn = g.pole(f).norm();
        println!("facet {f}: |alpha|={an:.3e} |pole|={pn:.3e} pairing-2={:.3e}", g.alpha(f).dot(g.pole(f))-2.0);
    }
}
