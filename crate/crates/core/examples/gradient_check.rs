//! Compare analytic objective gradients with central differences.

use evjoint::contrast::ConfidenceMap;
use evjoint::joint::{objective, objective_gradients, raw_baseline, ObjectiveWeights};
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let spec = SceneSpec {
        noise_rate: 0.2,
        ..SceneSpec::new(
            SensorGeometry::new(24, 24)?,
            Pattern::Dot { center: [10.0, 12.0], radius: 4.0 },
            MotionParams::translation(50.0, -20.0),
        )
    };
    let scene = generate(&spec, 1)?;
    let w = &scene.window;
    let g = w.geometry();
    let sigma = 1.0;
    let b_ed = raw_baseline(w, sigma)?;
    let weights = ObjectiveWeights { alpha: 1e-3, beta: 1e-2, b_ea: 3.0 * b_ed, b_ed };

    let theta = MotionParams::translation(-20.0, 5.0);
    let logits: Vec<f64> = (0..g.pixel_count()).map(|k| ((k * 37) % 11) as f64 / 5.0 - 1.0).collect();
    let conf = ConfidenceMap::from_logits(g, logits.clone())?;
    let grads = objective_gradients(w, &theta, &conf, weights, sigma)?;
    let f = |th: &MotionParams, c: &ConfidenceMap| objective(w, th, c, weights, sigma).map(|p| p.total);

    let h = 1e-4;
    for p in 0..theta.dim() {
        let (mut up, mut down) = (theta.clone(), theta.clone());
        up.values[p] += h;
        down.values[p] -= h;
        let fd = (f(&up, &conf)? - f(&down, &conf)?) / (2.0 * h);
        println!("theta[{p}]: analytic {:+.6e}  numeric {:+.6e}", grads.theta[p], fd);
    }
    for k in [0, 100, 250, 400] {
        let mut up = logits.clone();
        let mut down = logits.clone();
        up[k] += h;
        down[k] -= h;
        let fd = (f(&theta, &ConfidenceMap::from_logits(g, up)?)? - f(&theta, &ConfidenceMap::from_logits(g, down)?)?)
            / (2.0 * h);
        println!("logit[{k}]: analytic {:+.6e}  numeric {:+.6e}", grads.logits[k], fd);
    }
    Ok(())
}
