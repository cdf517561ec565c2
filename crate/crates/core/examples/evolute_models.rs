//! Local models of the evolute (focal curve) at a flattening, a vertex and a
//! twisting, compared coefficient by coefficient with their closed forms.

use spacecurve::evolute::{
    evolute_flattening_asymptotics, evolute_twisting_series, evolute_vertex_series, CoefficientReport,
};
use spacecurve::SpaceCurve;

fn show(title: &str, r: &CoefficientReport) {
    println!("{title} ({:?})", r.feature);
    for e in &r.entries {
        println!("  {:<10} computed {:+.10e}  closed form {:+.10e}  rel dev {:.1e}", e.name, e.computed, e.closed_form, e.rel_dev);
    }
}

fn main() -> spacecurve::Result<()> {
    let flat = SpaceCurve::parse("t", "t^2", "t^4", (-1.0, 1.0))?;
    show("flattening of (t, t², t⁴)", &evolute_flattening_asymptotics(&flat, 0.0)?);

    // Arc-length normal form with b₄ solved from the vertex condition.
    let vertex = SpaceCurve::parse("t - 2/3*t^3 - 3/2*t^4", "t^2 + t^3 + 2/3*t^4", "t^3 + t^4", (-0.3, 0.3))?;
    show("vertex", &evolute_vertex_series(&vertex, 0.0)?);

    // c₄ = 9b₃c₃/(4b₂) puts a twisting at 0.
    let twist = SpaceCurve::parse("t - 2/3*t^3 - 3/4*t^4", "t^2 + 0.5*t^3 + 0.2*t^4", "0.4*t^3 + 0.45*t^4 + 0.1*t^5", (-0.3, 0.3))?;
    show("twisting", &evolute_twisting_series(&twist, 0.0)?);
    Ok(())
}
