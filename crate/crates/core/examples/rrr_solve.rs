//! Iterative recovery of a real signal from K*N random magnitudes.

use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};
use phaseless_stft::rrr::{rrr_solve, RrrConfig};
use phaseless_stft::stft::{measure, random_mask};

fn main() -> phaseless_stft::Result<()> {
    let p = ProblemParams::new(11, 8, 3)?;
    let mut rng = Rng::new(4);
    let pair = random_pair(&p, Distribution::RealGaussian, &mut rng);
    for k in [2, 4, 8] {
        let set = measure(&p, &pair, &random_mask(&p, k * p.n(), &mut rng)?)?;
        let out = rrr_solve(&p, &pair.w, &set, &RrrConfig::default(), Some(&pair.x), &mut rng)?;
        println!(
            "K={k}: {} iterations, converged {}, error {:.2e}, success {:?}",
            out.iterations,
            out.converged,
            out.error.unwrap_or(f64::NAN),
            out.success
        );
    }
    Ok(())
}
