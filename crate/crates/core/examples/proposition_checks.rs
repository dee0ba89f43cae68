//! Brute-force uniqueness checks over all root-flip combinations.

use phaseless_stft::problem::Rng;
use phaseless_stft::proof_solver::{verify_proposition_a, verify_proposition_b};

fn main() -> phaseless_stft::Result<()> {
    let mut rng = Rng::new(6);
    for (w, a) in [(3, 1), (4, 2), (6, 1)] {
        let r = verify_proposition_a(w, a, None, 20, &mut rng)?;
        println!("pairs   W={w} alpha={a}: {}/{} unique, fixed {:?}", r.unique, r.trials, r.fixed_cases);
    }
    for w in [3, 4, 5] {
        let r = verify_proposition_b(w, 1, 20, &mut rng)?;
        println!("triples W={w} alpha=1: {}/{} unique", r.unique, r.trials);
        for c in &r.fixed_cases {
            println!("    {}: applicable {}, classes {}, roots {:?}", c.name, c.applicable, c.classes, c.roots_ok);
        }
    }
    Ok(())
}
