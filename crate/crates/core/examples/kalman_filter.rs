//! Track a two-dimensional process with the Kalman belief, polling the
//! sensors alternately over a lossy channel.
//!
//! ```text
//! cargo run --example kalman_filter
//! ```

use nalgebra::{DMatrix, DVector};
use voi_sched::kalman::{filter_step, kalman_gain, prior_update};
use voi_sched::model::{self, channel_succeeds};
use voi_sched::{rng, BeliefState, ChannelOutcome, GroundTruth, SystemModel};

fn main() -> voi_sched::Result<()> {
    let model = SystemModel::new(
        DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.0, 0.7]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]),
        DMatrix::identity(2, 2),
        DVector::from_vec(vec![0.1, 0.3]),
    )?;
    let mut r = rng::stream(7);
    let mut truth = GroundTruth::zero(2);
    let mut belief = BeliefState::initial(2);

    println!("{:>3} {:>6} {:>9} {:>18} {:>18} {:>8}", "t", "sensor", "reading", "truth", "estimate", "tr(psi)");
    for t in 1..=12 {
        truth = model::step_process(&truth, &model, &mut r)?;
        let sensor = model.sensor(1 + (t - 1) % 2)?;
        let outcome = if channel_succeeds(&model, sensor, rand::Rng::random(&mut r)) {
            ChannelOutcome::Received(model::observe(&truth, &model, sensor.get(), &mut r)?)
        } else {
            ChannelOutcome::Erased
        };
        if t == 1 {
            let gain = kalman_gain(&prior_update(&belief, &model)?, &model, sensor)?;
            println!("gain for sensor {sensor} at t=1: [{:.4}, {:.4}]", gain[0], gain[1]);
        }
        belief = filter_step(&belief, &model, sensor, outcome)?;
        let reading = outcome.observation().map_or("erased".to_string(), |y| format!("{y:.3}"));
        println!(
            "{t:>3} {sensor:>6} {reading:>9} {:>18} {:>18} {:>8.4}",
            format!("[{:.3}, {:.3}]", truth.state[0], truth.state[1]),
            format!("[{:.3}, {:.3}]", belief.mean[0], belief.mean[1]),
            belief.covariance.trace()
        );
    }
    Ok(())
}
