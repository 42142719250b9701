//! BAF followed by contrast maximization, compared with the joint solver on
//! the same windows of a longer stream.

use evjoint::baselines::{sequential_pipeline, BafConfig};
use evjoint::events::{window_stream, WindowPolicy};
use evjoint::joint::{solve, JointConfig, JointResult};
use evjoint::metrics::{confusion, motion_rmse};
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{EventLabels, MotionParams, SensorGeometry};

type Method<'a> = dyn Fn(&evjoint::EventWindow) -> evjoint::Result<JointResult> + 'a;

fn main() -> evjoint::Result<()> {
    let spec = SceneSpec {
        duration: 0.5,
        noise_rate: 0.05,
        ..SceneSpec::new(
            SensorGeometry::new(48, 48)?,
            Pattern::Dot { center: [12.0, 12.0], radius: 5.0 },
            MotionParams::translation(40.0, 20.0),
        )
    };
    let scene = generate(&spec, 0)?;
    let events = scene.window.events();
    let windows = window_stream(events, scene.window.geometry(), WindowPolicy::FixedDuration(0.1))?;
    let truth = scene.compensating();
    let gt = vec![(0.0, truth.clone()), (spec.duration, truth)];

    let cfg = JointConfig::default();
    let methods: [(&str, &Method); 2] = [
        ("joint", &|w| solve(w, &cfg)),
        ("sequential", &|w| sequential_pipeline(w, &BafConfig::default(), &cfg)),
    ];
    for (name, run) in methods {
        let mut labels = Vec::new();
        let mut estimates = Vec::new();
        for w in &windows {
            let r = run(w)?;
            labels.extend(r.labels.iter());
            estimates.push((w.t_ref(), r.theta));
        }
        let c = confusion(&EventLabels(labels), &scene.labels)?;
        let rmse = motion_rmse(&estimates, &gt)?;
        println!(
            "{name:>10}: sensitivity {:.3}  specificity {:.3}  rmse {rmse:.3} px/s",
            c.sensitivity, c.specificity
        );
    }
    Ok(())
}
