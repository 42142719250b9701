//! Contrast maximization alone: recover the motion of a clean scene.

use evjoint::baselines::cmax_run;
use evjoint::joint::JointConfig;
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{MotionModel, MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let spec = SceneSpec {
        contrast_threshold: 0.5,
        ..SceneSpec::new(
            SensorGeometry::new(64, 64)?,
            Pattern::MultiEdge { spacing: 7.0 },
            MotionParams::translation(30.0, -10.0),
        )
    };
    let scene = generate(&spec, 0)?;
    let run = cmax_run(&scene.window, MotionModel::Translation2d, &JointConfig::default())?;

    for (k, (theta, f)) in run.trajectory.iter().zip(&run.f_ea).enumerate().step_by(50) {
        println!("step {k:>3}: theta [{:>8.3}, {:>8.3}]  f_EA {f:.5}", theta[0], theta[1]);
    }
    println!("final {:?}, truth {:?}", run.theta.values, scene.compensating().values);
    Ok(())
}
