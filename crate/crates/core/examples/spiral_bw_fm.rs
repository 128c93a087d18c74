//! Train a Gaussian flow on the 16-Gaussian spiral and score its samples.
//!
//! ```text
//! cargo run --release --example spiral_bw_fm -- [steps] [seed]
//! ```

use std::time::Instant;

use wfm::data::make_spiral_gaussians;
use wfm::flow::{train_bw, FlowModel, Geometry, TrainConfig};
use wfm::metrics::min_bw_to_dataset;

fn main() -> wfm::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let steps = args.next().map_or(5000, |s| s.parse().expect("steps"));
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));

    let data = make_spiral_gaussians(16, 0.0, 7)?;
    let cfg = TrainConfig {
        steps,
        seed,
        log_every: 500,
        ..TrainConfig::desk(Geometry::Bw)
    };

    let clock = Instant::now();
    let outcome = train_bw(&cfg, &data, &mut |_, _, _| Ok(()))?;
    println!("trained {} steps in {:.1}s", outcome.steps_completed, clock.elapsed().as_secs_f64());

    let model = FlowModel::from_outcome(&cfg, &outcome);
    let gen = model.generate_gaussians(256, cfg.generation_steps(), &[], seed, false)?;
    let score = min_bw_to_dataset(&gen.samples, &data.items)?;
    println!("average min W2^2 to the spiral: {score:.3e}");
    println!("step halvings during generation: {}", gen.stats.halvings);
    Ok(())
}
