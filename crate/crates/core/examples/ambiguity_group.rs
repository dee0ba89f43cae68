//! The trivial ambiguity group: magnitudes are invariant, canonical forms agree.

use phaseless_stft::ambiguity::{act, act_signal_only, canonicalize, magnitude_deviation, quotient_error, AmbiguityElement, Mode};
use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};

fn main() -> phaseless_stft::Result<()> {
    let p = ProblemParams::new(12, 5, 4)?;
    let mut rng = Rng::new(5);
    let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
    let g = AmbiguityElement::random(&p, &mut rng);
    println!("alpha={} R={} element: {g:?}", p.alpha(), p.sections());
    let moved = act(&g, &pair, &p)?;
    println!("magnitude deviation under the action: {:.2e}", magnitude_deviation(&p, &pair, &moved));
    let broken = act_signal_only(&g, &pair, &p)?;
    println!("deviation when only x is moved:      {:.2e}", magnitude_deviation(&p, &pair, &broken));
    let c = canonicalize(&moved, &p, Mode::Blind)?;
    println!("canonical x[0] = {:.4}, w[0..alpha) = {:?}", c.pair.x[0], &c.pair.w[..p.alpha()]);
    println!("quotient error between orbit members: {:.2e}", quotient_error(&moved, &pair, &p, Mode::Blind)?);
    Ok(())
}
