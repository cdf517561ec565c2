//! Contact with spheres through the distance-squared function, and finite
//! R⁺-versality of its unfolding by the sphere center.

use spacecurve::evolute::focal_data;
use spacecurve::frenet::{classify_ak_auto, distance_squared_jet, versality_test, AkClass};
use spacecurve::geometry::JetVec3;
use spacecurve::jet::Jet;
use spacecurve::{ParametricCurve, SpaceCurve, Vec3};

/// `∂d/∂aᵢ = aᵢ − γᵢ` as jets.
fn center_speeds(g: &JetVec3, center: &Vec3) -> Vec<Jet> {
    (0..3).map(|i| (-&g.0[i]).add_constant(center[i])).collect()
}

fn report<C: ParametricCurve>(name: &str, curve: &C, center: Vec3) -> spacecurve::Result<()> {
    let d = distance_squared_jet(curve, 0.0, &center, 12)?;
    let class = classify_ak_auto(&d);
    print!("{name}: distance squared is {class:?}");
    if let AkClass::A(k) = class {
        let g = curve.jets(0.0, 12)?;
        let cert = versality_test(&d, k, &center_speeds(&g, &center))?;
        print!(", unfolding by the center: versal {} (rank {} of {})", cert.versal, cert.rank, cert.target_dimension);
    }
    println!();
    Ok(())
}

fn main() -> spacecurve::Result<()> {
    let generic = SpaceCurve::parse("t - 2/3*t^3", "t^2 + 0.3*t^3", "0.5*t^3 + 0.2*t^4", (-1.0, 1.0))?;
    report("osculating sphere", &generic, Vec3::from(focal_data(&generic, 0.0)?.center))?;

    let vertex = SpaceCurve::parse("t - 2/3*t^3 - 3/2*t^4", "t^2 + t^3 + 2/3*t^4", "t^3 + t^4", (-0.3, 0.3))?;
    report("osculating sphere at a vertex", &vertex, Vec3::from(focal_data(&vertex, 0.0)?.center))?;

    // At a cusp γ′ = 0, so no center speed has a linear term and A₂ cannot be unfolded.
    let cusp = SpaceCurve::parse("t^2", "t^3", "t^4", (-1.0, 1.0))?;
    report("sphere through a cusp", &cusp, Vec3::new(0.0, 1.0, 0.0))
}
