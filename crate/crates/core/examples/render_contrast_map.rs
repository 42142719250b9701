//! Render a moving edge before and after motion compensation.
//!
//! `cargo run --example render_contrast_map [out_dir]`

use std::path::PathBuf;

use evjoint::contrast::{map_variance, smooth_map};
use evjoint::render::{write_pgm, write_png};
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::warp::warp;
use evjoint::{MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let spec = SceneSpec::new(
        SensorGeometry::new(64, 64)?,
        Pattern::MultiEdge { spacing: 9.0 },
        MotionParams::translation(60.0, 25.0),
    );
    let scene = generate(&spec, 0)?;
    let g = scene.window.geometry();

    let blurred = smooth_map(&scene.window.positions(), g, 1.0)?;
    let sharp = smooth_map(&warp(&scene.window, &scene.compensating())?.positions, g, 1.0)?;
    println!("variance: raw {:.4}, compensated {:.4}", map_variance(&blurred), map_variance(&sharp));

    write_pgm(&dir.join("raw.pgm"), &blurred)?;
    write_png(&dir.join("compensated.png"), &sharp)?;
    println!("wrote raw.pgm and compensated.png to {}", dir.display());
    Ok(())
}
