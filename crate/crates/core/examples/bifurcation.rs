//! Bifurcation set of the model cusp family: loci of the four strata, their
//! tangent cones, the genericity invariants and an SVG diagram.

use spacecurve::io::{render_svg, LabeledPolyline};
use spacecurve::model::model_family_g;
use spacecurve::strata::{frs_genericity, tangent_cone, tangent_cone_against, trace_bifurcation, Stratum};

fn main() -> spacecurve::Result<()> {
    let g = model_family_g();
    let gen = frs_genericity(&g)?;
    println!("generic {}: a2*b3 = {}, b4*c3 - b3*c4 = {}", gen.generic, gen.a2b3, gen.b4c3_minus_b3c4);

    let loci = Stratum::ALL
        .iter()
        .map(|&st| trace_bifurcation(&g, st, g.s_box, 96))
        .collect::<spacecurve::Result<Vec<_>>>()?;
    let f_dir = tangent_cone(&loci[Stratum::F as usize])?.direction;
    for locus in &loci {
        print!("{}: {} points", locus.stratum.name(), locus.polyline.len());
        if let Ok(cone) = tangent_cone_against(locus, f_dir) {
            print!(", tangent ({:.6}, {:.6})", cone.direction[0], cone.direction[1]);
            if cone.contact.coincident {
                print!(", on the F line");
            } else if cone.contact.tangent {
                print!(", separation from F ~ {:.4} x^{:.2}", cone.contact.coefficients[1], cone.contact.exponent);
            } else {
                print!(", transverse to F");
            }
        }
        println!();
    }
    let lines: Vec<LabeledPolyline> = loci.iter().map(LabeledPolyline::from).collect();
    let path = std::env::temp_dir().join("family_g_bifurcation.svg");
    std::fs::write(&path, render_svg(&lines, None)?)?;
    println!("diagram written to {}", path.display());
    Ok(())
}
