mod common;

use etrack::bench::measure_throughput;
use etrack_core::scenario::generate_scenario;
use etrack_core::tracker::{Stage, TrackerConfig};

#[test]
fn doubling_frames_keeps_per_frame_cost() {
    let scenario = generate_scenario(&common::standard_load(800)).unwrap();
    let schedule = common::schedule_from(&scenario);
    let cfg = TrackerConfig::default();
    let short = measure_throughput(&schedule, 400, &cfg, 5).unwrap();
    let long = measure_throughput(&schedule, 800, &cfg, 5).unwrap();
    let ratio = short.hz / long.hz;
    assert!(ratio <= 2.0, "per-frame cost grew {ratio:.2}x");
    for stage in Stage::ALL {
        assert!(long.stages.contains_key(&stage));
    }
}

#[test]
fn median_is_stable_across_invocations() {
    let scenario = generate_scenario(&common::standard_load(400)).unwrap();
    let schedule = common::schedule_from(&scenario);
    let cfg = TrackerConfig::default();
    let a = measure_throughput(&schedule, 400, &cfg, 7).unwrap().hz;
    let b = measure_throughput(&schedule, 400, &cfg, 7).unwrap().hz;
    let drift = (a - b).abs() / a.max(b);
    assert!(
        drift <= 0.2,
        "medians {a:.0} and {b:.0} differ by {:.0}%",
        drift * 100.0
    );
}
