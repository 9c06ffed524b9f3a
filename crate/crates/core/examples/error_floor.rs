//! Fast-decaying herding leaves an error the sample mean never removes.

use bandwagon::theory::{consistency_classify, efficiency_exact, error_lower_bound, lerch, LERCH_TOLERANCE};
use bandwagon::{LambdaSchedule, TruePreference};

fn main() -> bandwagon::Result<()> {
    let p = TruePreference::new(0.4)?;
    for c in [0.5, 0.9, 0.99] {
        let phi = lerch(c, 1.0, 2.0, LERCH_TOLERANCE)?;
        println!(
            "c = {c}: Φ(c,1,2) = {:.12} ({} terms, tail ≤ {:.1e}); lim E|p̄ - p| ≥ {:.6}",
            phi.value,
            phi.terms,
            phi.tail_bound,
            error_lower_bound(p, c)?
        );
    }
    for text in ["geom:0.9", "power:1", "power:0.5", "strong"] {
        let s: LambdaSchedule = text.parse()?;
        let v = consistency_classify(&s, 1_000_000);
        println!(
            "{text:>18}: {:?} ({:?}); E(p̄-p)² at 10^3 = {:.2e}, at 10^6 = {:.2e}",
            v.verdict,
            v.reason,
            efficiency_exact(p, &s, 1_000)?,
            efficiency_exact(p, &s, 1_000_000)?
        );
    }
    Ok(())
}
