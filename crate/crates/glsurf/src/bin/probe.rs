use glsurf::corner::*;
use glsurf::gl2d::solve::{minimize, GlOperator, Init, SolveOptions};
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let beta = PI + 0.1;
    let spec = CornerDomainSpec::new(beta, 10.0, 6.0).unwrap();
    let cm = build_corner_mesh(&spec, 0.12).unwrap();
    let trace = psi_star_trace(&cm, 1.5).unwrap();
    let op = GlOperator::new(&cm.mesh, 1.5).unwrap();
    let opts = SolveOptions { max_iter: 3000, rel_tol: 1e-6 };
    match minimize(&op, Init::Field(trace.field.clone()), &opts) {
        Ok((_, rep)) => println!("converged E={} it={}", rep.energy, rep.iterations),
        Err(e) => {
            println!("no convergence: {e}");
            // locate the residual: evaluate gradient at the trace init
            let mut g = vec![Complex64::default(); cm.mesh.n_nodes()];
            op.grad(&trace.field, &mut g);
            let mut worst = (0usize, 0.0f64);
            for i in 0..g.len() {
                let r = g[i].norm() / (2.0 * cm.mesh.vol[i]);
                if r > worst.1 { worst = (i, r); }
            }
            let p = cm.mesh.nodes[worst.0];
            let tub = cm.mesh.tub[worst.0];
            println!("worst residual {:.3} at node {} pos ({:.3},{:.3}) tub {:?} vol {:.2e}",
                worst.1, worst.0, p[0], p[1], tub, cm.mesh.vol[worst.0]);
            // histogram of residual vs position
            let mut big: Vec<(usize, f64)> = (0..g.len())
                .map(|i| (i, g[i].norm() / (2.0 * cm.mesh.vol[i])))
                .filter(|&(_, r)| r > worst.1 * 0.3)
                .collect();
            big.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            for (i, r) in big.iter().take(8) {
                let p = cm.mesh.nodes[*i];
                println!("  node {i} ({:.3},{:.3}) tub {:?} r={r:.3}", p[0], p[1], cm.mesh.tub[*i]);
            }
        }
    }
}
