//! Building, composing and inverting stochastic maps.

use quale::rational::ratio;
use quale::{compose, dual, kl_divergence, tensor, Alphabet, Distribution, ProductSpace, StochasticMatrix};

fn main() -> quale::Result<()> {
    let x = ProductSpace::single("x", Alphabet::binary());
    let y = ProductSpace::single("y", Alphabet::new(["lo", "mid", "hi"])?);

    // A noisy channel x -> y.
    let channel = StochasticMatrix::new(
        x.clone(),
        y.clone(),
        vec![
            vec![ratio(3, 4), ratio(1, 4), ratio(0, 1)],
            vec![ratio(0, 1), ratio(1, 2), ratio(1, 2)],
        ],
    )?;
    println!("channel:\n{channel:?}");

    let back = dual(&channel)?;
    println!("dual (Bayes under a uniform prior):\n{back:?}");
    println!("dual then channel:\n{:?}", compose(&channel, &back)?);
    println!("channel ⊗ dual has {} columns", tensor(&channel, &back)?.cols());

    let seen = channel.apply(&Distribution::dirac(&x, 0))?;
    let prior = Distribution::uniform(&y);
    println!("KL(p(y|x=0) ‖ uniform) = {}", kl_divergence(&seen, &prior)?);
    Ok(())
}
