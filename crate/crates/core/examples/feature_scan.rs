//! Flattenings, vertices and twistings located by scanning certificate sign
//! changes, and the degenerate record of a helix.

use spacecurve::features::scan_features;
use spacecurve::io::write_feature_csv;
use spacecurve::SpaceCurve;

fn main() -> spacecurve::Result<()> {
    let curves = [
        ("(t, t², t⁴)", SpaceCurve::parse("t", "t^2", "t^4", (-1.0, 1.0))?),
        ("vertex instance", SpaceCurve::parse("t - 2/3*t^3 - 3/2*t^4", "t^2 + t^3 + 2/3*t^4", "t^3 + t^4", (-0.3, 0.3))?),
        ("helix", SpaceCurve::parse("cos(t)", "sin(t)", "0.5*t", (0.0, 6.0))?),
    ];
    for (name, c) in &curves {
        let scan = scan_features(c, c.domain, 1024)?;
        println!("{name}:");
        for f in &scan.features {
            println!("  {:<12} t = {:+.12}  residual {:.1e}  ({})", f.kind.name(), f.t, f.residual, f.source);
        }
        for iv in &scan.irregular {
            println!("  irregular on [{}, {}]: {}", iv.lo, iv.hi, iv.error);
        }
    }
    let scan = scan_features(&curves[0].1, (-1.0, 1.0), 256)?;
    write_feature_csv(std::io::stdout().lock(), &scan)
}
