//! Loads curve and family documents and prints their Taylor jets.

use spacecurve::model::{load_spec, Model};
use spacecurve::ParametricCurve;

fn main() -> spacecurve::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    for name in ["fr_model.json", "helix.json", "vertex_curve.json", "family_g.json"] {
        let text = std::fs::read_to_string(format!("{dir}/{name}"))?;
        match load_spec(&text)? {
            Model::Curve(c) => {
                let (lo, hi) = c.domain;
                let mid = 0.5 * (lo + hi);
                let j = c.jets(mid, 3)?;
                println!("{name}: curve `{}` on [{lo}, {hi}]", c.label);
                for k in 0..=3 {
                    println!("  coefficient {k} at t = {mid:.4}: {:?}", j.coeff(k).as_slice());
                }
            }
            Model::Family(f) => {
                let cusp = f.central_curve()?;
                println!("{name}: family `{}` with s in {:?}", f.label, f.s_box);
                println!("  central curve at 0: {:?}", cusp.jets(0.0, 3)?.coeff(2).as_slice());
            }
        }
    }
    let bad = r#"{"kind":"curve","x":"t +","y":"t","z":"t","t_range":[0,1]}"#;
    println!("malformed document: {}", load_spec(bad).unwrap_err());
    Ok(())
}
