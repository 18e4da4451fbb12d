//! Counts and lists the vertices of the budgeted uncertainty set on the Garver case,
//! and shows the parameter values behind one of them.

use robust_tnep::bundled;
use robust_tnep::uncertainty::{enumerate_vertices, group_sizes, realize, vertex_count};

fn main() {
    let base = bundled::garver();
    let (nd, ng, nw) = group_sizes(&base);
    println!("{nd} demands, {ng} conventional units, {nw} wind units");
    for (d, g, w) in [(0, 0, 0), (1, 0, 0), (2, 1, 0), (3, 2, 1), (5, 3, 1)] {
        let case = base.with_budgets(d, g, w).unwrap();
        println!("budgets ({d},{g},{w}): {} vertices", vertex_count(&case.uncertainty, &case));
    }

    let case = base.with_budgets(1, 1, 0).unwrap();
    let vertices = enumerate_vertices(&case.uncertainty, &case);
    for u in &vertices {
        println!("  {}", u.label());
    }
    let u = vertices.last().unwrap();
    let p = realize(&case, u).unwrap();
    println!("at {}:", u.label());
    for (d, level) in case.demands.iter().zip(&p.demand_level) {
        println!("  {} {:.1} MW (nominal {:.1})", d.id, level, d.nominal_level);
    }
    for (g, cap) in case.generators.iter().zip(&p.capacity) {
        println!("  {} {:.1} MW (nominal {:.1})", g.id, cap, g.nominal_capacity);
    }
}
