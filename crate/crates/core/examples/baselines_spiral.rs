//! Train the Riemannian Gaussian flow and its two Euclidean baselines on the
//! same spiral and compare sample quality and generation diagnostics.
//!
//! ```text
//! cargo run --release --example baselines_spiral -- [steps] [seed]
//! ```

use std::time::Instant;

use wfm::data::make_spiral_gaussians;
use wfm::flow::{train_bw, zero_field_loss_bw, BwMethod, FlowModel, Geometry, TrainConfig};
use wfm::metrics::min_bw_to_dataset;

fn tail_mean(trace: &[wfm::flow::LossRecord], frac: f64) -> f64 {
    let k = ((trace.len() as f64 * frac) as usize).max(1);
    trace[trace.len() - k..].iter().map(|r| r.loss).sum::<f64>() / k as f64
}

fn main() -> wfm::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let steps = args.next().map_or(5000, |s| s.parse().expect("steps"));
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));
    let data = make_spiral_gaussians(16, 0.0, 7)?;

    println!("{:<14} {:>10} {:>10} {:>9} {:>11} {:>8}", "method", "min W2^2", "loss/zero", "halvings", "projections", "secs");
    for method in [BwMethod::Riemannian, BwMethod::EuclideanBw, BwMethod::Frobenius] {
        let cfg = TrainConfig {
            steps,
            seed,
            bw_method: method,
            ..TrainConfig::desk(Geometry::Bw)
        };
        let clock = Instant::now();
        let zero = zero_field_loss_bw(&cfg, &data, 50)?;
        let outcome = train_bw(&cfg, &data, &mut |_, _, _| Ok(()))?;
        let model = FlowModel::from_outcome(&cfg, &outcome);
        let gen = model.generate_gaussians(256, cfg.generation_steps(), &[], seed, false)?;
        let score = min_bw_to_dataset(&gen.samples, &data.items)?;
        println!(
            "{:<14} {:>10.3e} {:>10.3} {:>9} {:>11} {:>8.1}",
            format!("{method:?}"),
            score,
            tail_mean(&outcome.trace, 0.1) / zero,
            gen.stats.halvings,
            gen.stats.projections,
            clock.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
