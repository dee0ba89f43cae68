//! Blind recovery with and without the closure samples.

use phaseless_stft::ambiguity::{quotient_error, Mode};
use phaseless_stft::bounds::{blind_measurement_set, blind_measurement_set_closed};
use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};
use phaseless_stft::proof_solver::recover_blind;
use phaseless_stft::stft::measure;

fn main() -> phaseless_stft::Result<()> {
    for (n, w, l) in [(12, 3, 1), (16, 7, 2)] {
        let p = ProblemParams::new(n, w, l)?;
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(2));
        for (name, idx) in [("bound set", blind_measurement_set(&p)?), ("with closure", blind_measurement_set_closed(&p)?)] {
            let res = recover_blind(&measure(&p, &pair, &idx)?, &p)?;
            let err = quotient_error(&res.estimate, &pair, &p, Mode::Blind)?;
            println!("N={n} W={w} L={l} {name:13} {:3} samples: {:?}, quotient error {err:.2e}", idx.len(), res.status);
        }
    }
    Ok(())
}
