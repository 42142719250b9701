//! Generate a labeled synthetic stream and write it in both file formats.
//!
//! `cargo run --example synthesize_stream [out_dir]`

use std::path::PathBuf;

use evjoint::events::{write_events, EventFormat};
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let spec = SceneSpec {
        noise_rate: 0.1,
        ..SceneSpec::new(
            SensorGeometry::new(64, 48)?,
            Pattern::Dot { center: [20.0, 24.0], radius: 6.0 },
            MotionParams::translation(80.0, -30.0),
        )
    };
    let scene = generate(&spec, 7)?;
    let g = scene.window.geometry();
    let noise = scene.labels.len() - scene.labels.signal_count();
    println!("{} events, {noise} noise, span {:.4} s", scene.window.len(), scene.window.duration());

    for name in ["dot.evb", "dot.csv"] {
        let path = dir.join(name);
        write_events(&path, EventFormat::from_path(&path), scene.window.events(), Some(&scene.labels), g)?;
        println!("wrote {}", path.display());
    }
    println!("collapsing motion {:?}", scene.compensating().values);
    Ok(())
}
