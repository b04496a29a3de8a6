//! Classifies both transitions of the long-range hopping model.

use site_entropy::analytic::U_C;
use site_entropy::scan::{classify_transition, ClassifyOptions, Driver, GrProbe};

fn main() -> site_entropy::Result<()> {
    let cases = [
        ("interaction", GrProbe::new(Driver::U, 0.0, 0.0, 1.0)?, (5.5, 7.0)),
        (
            "chemical potential",
            GrProbe::new(Driver::Mu, 3.0 * U_C, 0.0, 1.0)?,
            (2.9, 3.3),
        ),
    ];
    for (name, probe, window) in cases {
        let r = classify_transition(&probe, window, &ClassifyOptions::default())?;
        println!(
            "{name:>18}: {:?}, order {:?}, {:?} at g_c = {:.9} (+- {:.1e})",
            r.status,
            r.order_k,
            r.singularity,
            r.g_c.unwrap_or(f64::NAN),
            r.resolution
        );
    }
    Ok(())
}
