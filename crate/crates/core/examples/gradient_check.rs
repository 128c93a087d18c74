//! Compare reverse-mode gradients with central differences for the Gaussian
//! field networks and a two-block set transformer.
//!
//! ```text
//! cargo run --release --example gradient_check -- [coords] [seed]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wfm::data::{make_shapes, make_spiral_gaussians, ShapeFamily};
use wfm::flow::{bw_batch_loss, bw_networks, bw_target, pc_loss_from_target, pc_network, pc_target, BwMethod,
    Geometry, PcLossConfig, TrainConfig};
use wfm::nn::{gradient_check, GradCheckReport, ModelParams};
use wfm::ot::PointCloud;

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-4;

// zero-initialized output layers would make most gradients vanish
fn randomize_outputs(models: &mut [ModelParams], r: &mut impl Rng) {
    for m in models {
        for (slot, v) in m.slots_mut() {
            if slot.starts_with("out.") {
                v.data_mut().iter_mut().for_each(|x| *x = r.gen_range(-0.5..0.5));
            }
        }
    }
}

fn show(name: &str, report: &GradCheckReport) {
    println!("{name}: {} coordinates, max relative error {:.2e}", report.entries.len(), report.max_rel_error());
    for e in report.entries.iter().take(5) {
        println!("  {:<24} [{:>4}]  analytic {:+.6e}  numeric {:+.6e}", e.slot, e.index, e.analytic, e.numeric);
    }
    println!("  within {TOL:.0e}: {}", report.passes(TOL));
}

fn main() -> wfm::Result<()> {
    let mut args = std::env::args().skip(1);
    let coords = args.next().map_or(20, |s| s.parse().expect("coords"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let mut r = ChaCha8Rng::seed_from_u64(seed);

    let data = make_spiral_gaussians(16, 0.0, 7)?;
    let cfg = TrainConfig::desk(Geometry::Bw);
    let mut nets = bw_networks(&cfg, &data.items, 0);
    randomize_outputs(&mut nets, &mut r);
    let mut states = Vec::new();
    let mut targets = Vec::new();
    let mut ts = Vec::new();
    for i in 0..4 {
        let t = r.gen::<f64>();
        let (s, v) = bw_target(&data.items[i], &data.items[(i + 5) % 16], t, BwMethod::Riemannian)?;
        states.push(s);
        targets.push(v);
        ts.push(t);
    }
    let labels = vec![None; 4];
    let report = gradient_check(
        &nets,
        |tape, ms| bw_batch_loss(tape, &ms[0], &ms[1], &states, &targets, &ts, &labels, BwMethod::Riemannian),
        coords,
        STEP,
        &mut r,
    )?;
    show("gaussian field", &report);

    let shapes = make_shapes(&[ShapeFamily::Ring, ShapeFamily::Cross], 2, (8, 8), 0.02, 1)?;
    let pcfg = TrainConfig {
        blocks: 2,
        embed_dim: 16,
        heads: 2,
        ff_dim: 32,
        ..TrainConfig::desk(Geometry::Pc)
    };
    let mut net = vec![pc_network(&pcfg, 2, 0)];
    randomize_outputs(&mut net, &mut r);
    let src = PointCloud::from_rows(&(0..8).map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect::<Vec<_>>())?;
    let target = pc_target(&src, &shapes.items[0], &PcLossConfig::default())?;
    let t = 0.4;
    let report = gradient_check(
        &net,
        |tape, ms| pc_loss_from_target(tape, &ms[0], src.points(), &target.mapped, t, None),
        coords,
        STEP,
        &mut r,
    )?;
    show("set transformer", &report);
    Ok(())
}
