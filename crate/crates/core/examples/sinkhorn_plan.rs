//! Entropic OT between two small clouds: plan, rounding to a permutation,
//! the out-of-sample map, and the exact optimum for comparison.
//!
//! ```text
//! cargo run --release --example sinkhorn_plan -- [epsilon]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfm::linalg::Matrix;
use wfm::ot::{
    entropic_map, exact_ot_small, permutation_cost, round_to_permutation, solve_clouds, transport_cost,
    EpsilonConfig, PointCloud,
};

fn cloud(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> wfm::Result<PointCloud> {
    let data = (0..2 * n).map(|k| rng.gen_range(-1.0..1.0) + if k % 2 == 0 { shift } else { 0.0 }).collect();
    PointCloud::uniform(Matrix::new(n, 2, data))
}

fn main() -> wfm::Result<()> {
    let eps: f64 = std::env::args().nth(1).map_or(0.01, |s| s.parse().expect("epsilon"));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = cloud(&mut rng, 6, 0.0)?;
    let y = cloud(&mut rng, 6, 2.0)?;

    let (plan, cost) = solve_clouds(&x, &y, EpsilonConfig::relative(eps), 5000, 1e-9)?;
    println!("epsilon = {:.3e} ({eps} x mean cost), {} iterations", plan.epsilon, plan.iterations_run);
    println!("marginal error {:.2e}", plan.marginal_error);
    println!("\ncoupling x 6:");
    for i in 0..6 {
        let row: Vec<String> = plan.coupling.row(i).iter().map(|p| format!("{:5.3}", p * 6.0)).collect();
        println!("  {}", row.join(" "));
    }

    let perm = round_to_permutation(&plan)?;
    let (best, exact) = exact_ot_small(&x, &y)?;
    println!("\nentropic cost  {:.5}", transport_cost(&plan, &cost)?);
    println!("rounded perm   {perm:?} cost {:.5}", permutation_cost(&cost, &perm));
    println!("exact perm     {best:?} cost {exact:.5}");

    // the entropic map also moves points that were not in the source cloud
    let probe = Matrix::from_rows(&[[0.0, 0.0], [0.5, -0.5]]);
    let mapped = entropic_map(&plan, &y, &probe)?;
    for i in 0..2 {
        println!("T({:?}) = ({:.3}, {:.3})", probe.row(i), mapped[(i, 0)], mapped[(i, 1)]);
    }
    Ok(())
}
