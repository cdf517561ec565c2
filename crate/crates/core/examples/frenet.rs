//! Frenet frame, curvature, torsion and their arc-length derivatives, with
//! the helix test and invariance under a rigid motion.

use spacecurve::frenet::{frenet_apparatus, helix_defect};
use spacecurve::model::Moved;
use spacecurve::{RigidMotion, SpaceCurve, Vec3};

fn main() -> spacecurve::Result<()> {
    let helix = SpaceCurve::parse("2*cos(t)", "2*sin(t)", "t", (-5.0, 5.0))?;
    let f = frenet_apparatus(&helix, 1.0)?;
    println!("helix: κ = {:.15} (2/5), τ = {:.15} (1/5)", f.kappa(), f.tau());
    println!("helix defect = {:e}", helix_defect(&helix, 1.0)?.defect);

    // (t, b₂t², c₃t³): κ(0) = 2b₂, τ(0) = 3c₃/b₂.
    let nf = SpaceCurve::parse("t - 2/3*t^3", "t^2 + 0.3*t^3", "0.5*t^3 + 0.2*t^4", (-1.0, 1.0))?;
    let f = frenet_apparatus(&nf, 0.0)?;
    println!("normal form: κ = {:.15}, τ = {:.15}", f.kappa(), f.tau());
    println!("  κ_s, κ_ss = {:.12}, {:.12}", f.kappa_ds(1), f.kappa_ds(2));
    println!("  τ_s, τ_ss = {:.12}, {:.12}", f.tau_ds(1), f.tau_ds(2));
    println!("  frame T = {:?}, N = {:?}, B = {:?}", f.tangent, f.normal, f.binormal);

    let motion = RigidMotion::from_axis_angle(Vec3::new(1.0, 2.0, 2.0) / 3.0, 0.7, Vec3::new(1.0, -2.0, 0.5));
    let moved = Moved { curve: &nf, motion };
    let g = frenet_apparatus(&moved, 0.0)?;
    println!("moved: |Δκ| = {:e}, |Δτ| = {:e}", (g.kappa() - f.kappa()).abs(), (g.tau() - f.tau()).abs());
    Ok(())
}
