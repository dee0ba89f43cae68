//! All vectors sharing one intensity profile, obtained by root flips.

use phaseless_stft::intensity::{enumerate_flips, profile_of, roots_of, sample_point};
use phaseless_stft::problem::{Distribution, Rng};

fn main() -> phaseless_stft::Result<()> {
    let y = Distribution::ComplexGaussian.vector(4, &mut Rng::new(3));
    let roots = roots_of(&y)?;
    println!("roots: {:?}", roots.roots.iter().map(|z| format!("{:.3}", z)).collect::<Vec<_>>());
    let set = enumerate_flips(&y)?;
    let prof = profile_of(&y);
    for (i, c) in set.candidates.iter().enumerate() {
        let other = profile_of(c);
        let dev = (0..7)
            .map(|k| (prof.eval_real(sample_point(k, 7)) - other.eval_real(sample_point(k, 7))).abs())
            .fold(0.0, f64::max);
        println!("candidate {i}: |c| = {:.4}, profile deviation {dev:.1e}", c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    println!("{} candidates, {} distinct classes", set.len(), set.classes(1e-6).len());
    Ok(())
}
