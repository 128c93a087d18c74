//! Walk the Bures-Wasserstein geodesic between two Gaussians and check the
//! closed forms against each other along the way.
//!
//! ```text
//! cargo run --release --example bw_geodesic
//! ```

use wfm::bw::{bw_distance_sq, bw_exp, bw_log, bw_tangent_norm_sq, BwPath, Gaussian};
use wfm::linalg::{Matrix, PsdMatrix};

fn main() -> wfm::Result<()> {
    let a = Gaussian::new(vec![-1.0, 0.0], PsdMatrix::from_diag(&[0.5, 0.05])?)?;
    let b = Gaussian::new(
        vec![1.0, 0.5],
        PsdMatrix::from_matrix(Matrix::from_rows(&[[0.1, 0.08], [0.08, 0.3]]))?,
    )?;

    let w2 = bw_distance_sq(&a, &b)?;
    let log = bw_log(&a, &b)?;
    println!("W2^2(a, b)         = {w2:.6}");
    println!("|log_a(b)|^2 at a  = {:.6}", bw_tangent_norm_sq(&a, &log)?);
    let back = bw_exp(&a, &log)?;
    println!("exp_a(log_a(b)) mean = {:?}", back.mean);

    // constant speed: the squared tangent norm of the velocity is W2^2 at every t
    let path = BwPath::new(a.clone(), b.clone())?;
    println!("\n   t     mean                cov (xx, xy, yy)           |v|^2");
    for k in 0..=8 {
        let t = k as f64 / 8.0;
        let g = path.at(t);
        let v = path.velocity(t)?;
        let c = g.cov.as_matrix();
        println!(
            "{t:5.3}  ({:6.3}, {:6.3})   ({:.4}, {:7.4}, {:.4})   {:.6}",
            g.mean[0],
            g.mean[1],
            c[(0, 0)],
            c[(0, 1)],
            c[(1, 1)],
            bw_tangent_norm_sq(&g, &v)?
        );
    }
    Ok(())
}
