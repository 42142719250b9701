//! Joint motion estimation and denoising on a noisy window, scored against
//! the synthetic labels.

use evjoint::joint::{solve, JointConfig};
use evjoint::metrics::confusion;
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let spec = SceneSpec {
        noise_rate: 0.1,
        contrast_threshold: 0.25,
        ..SceneSpec::new(
            SensorGeometry::new(48, 48)?,
            Pattern::Dot { center: [18.0, 18.0], radius: 8.0 },
            MotionParams::translation(40.0, 20.0),
        )
    };
    let scene = generate(&spec, 3)?;
    let result = solve(&scene.window, &JointConfig::default())?;

    let first = &result.trace[0].parts;
    let last = result.final_parts.expect("solver ran");
    println!("weights {:?}", result.weights);
    println!("total {:.5} -> {:.5}, R {:.5} -> {:.5}", first.total, last.total, first.regret, last.regret);
    println!("theta {:?} (truth {:?})", result.theta.values, scene.compensating().values);

    let c = confusion(&result.labels, &scene.labels)?;
    println!("kept {} of {}", result.labels.signal_count(), result.labels.len());
    println!("sensitivity {:.3}, specificity {:.3}", c.sensitivity, c.specificity);
    Ok(())
}
