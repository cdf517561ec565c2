//! Truncated Taylor arithmetic: elementary functions, composition and series
//! reversion on jets, and jets of parsed expressions.

use spacecurve::expr::parse_expression;
use spacecurve::jet::Jet;

fn main() -> spacecurve::Result<()> {
    let t = Jet::displacement(8, 0.0);
    let e = t.exp();
    println!("exp(t)        = {:?}", e.coeffs());
    let (s, c) = t.sin_cos();
    println!("sin(t)        = {:?}", s.coeffs());
    println!("sin² + cos²   = {:?}", (&(&s * &s) + &(&c * &c)).coeffs());

    // arcsin as the reversion of sin.
    let arcsin = s.try_revert()?;
    println!("arcsin(u)     = {:?}", arcsin.coeffs());
    println!("sin(arcsin u) = {:?}", s.try_compose(&arcsin)?.coeffs());

    let expr = parse_expression("exp(sin(t)) / (2 + cos(t))")?;
    let j = expr.eval_jet(0.3, [0.0; 2], 6)?;
    for k in 0..=6 {
        println!("f^({k})(0.3) = {:+.12e}", j.derivative_value(k));
    }
    Ok(())
}
