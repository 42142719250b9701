//! ESR, confusion rates and trajectory RMSE on hand-made inputs.

use evjoint::metrics::{confusion, esr, motion_rmse};
use evjoint::{Event, EventLabels, MotionParams, SensorGeometry};

fn main() -> evjoint::Result<()> {
    let g = SensorGeometry::new(4, 4)?;
    // all events in one pixel, then spread over four
    let clumped: Vec<Event> = (0..8).map(|k| Event::new(1.5, 1.5, k as f64, 1)).collect::<Result<_, _>>()?;
    let spread: Vec<Event> = (0..8)
        .map(|k| Event::new((k % 4) as f64 + 0.5, 0.5, k as f64, 1))
        .collect::<Result<_, _>>()?;
    println!("esr clumped {:.4}, spread {:.4}", esr(&clumped, g, 8)?, esr(&spread, g, 8)?);

    let pred = EventLabels(vec![true, true, false, false, true]);
    let truth = EventLabels(vec![true, false, false, true, true]);
    let c = confusion(&pred, &truth)?;
    println!("{:?}", c.counts);
    println!("sensitivity {:.3}, specificity {:.3}", c.sensitivity, c.specificity);

    let gt = vec![
        (0.0, MotionParams::translation(0.0, 0.0)),
        (1.0, MotionParams::translation(10.0, 0.0)),
    ];
    let est = vec![(0.5, MotionParams::translation(6.0, 0.0))];
    println!("rmse {:.3}", motion_rmse(&est, &gt)?);
    Ok(())
}
