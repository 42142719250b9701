//! In-plane rotation: a dot circling the sensor center.

use evjoint::joint::{solve, JointConfig};
use evjoint::metrics::confusion;
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::warp::rotation_center;
use evjoint::{MotionModel, MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let g = SensorGeometry::new(48, 48)?;
    let spec = SceneSpec {
        noise_rate: 0.05,
        contrast_threshold: 0.25,
        ..SceneSpec::new(g, Pattern::Dot { center: [34.0, 24.0], radius: 6.0 }, MotionParams::rotation(3.0))
    };
    let scene = generate(&spec, 2)?;
    println!("rotation about {:?}, {} events", rotation_center(g), scene.window.len());

    let cfg = JointConfig {
        model: MotionModel::RotationInPlane,
        ..JointConfig::default()
    };
    let result = solve(&scene.window, &cfg)?;
    let c = confusion(&result.labels, &scene.labels)?;
    println!("omega {:.3} rad/s (truth {:.3})", result.theta.values[0], scene.compensating().values[0]);
    println!("sensitivity {:.3}, specificity {:.3}", c.sensitivity, c.specificity);
    Ok(())
}
