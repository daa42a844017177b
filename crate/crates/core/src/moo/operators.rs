use rand::Rng;

use super::{Bits, MooError};

/// Uniform crossover with an explicit draw source: locus `i` takes `p1` into
/// the first child when its draw is below 0.5.
pub fn uniform_crossover_with<F: FnMut() -> f64>(
    p1: &[bool],
    p2: &[bool],
    mut draw: F,
) -> Result<(Bits, Bits), MooError> {
    if p1.len() != p2.len() {
        return Err(MooError::LengthMismatch(p1.len(), p2.len()));
    }
    Ok(p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| if draw() < 0.5 { (a, b) } else { (b, a) })
        .unzip())
}

pub fn uniform_crossover<R: Rng + ?Sized>(
    p1: &[bool],
    p2: &[bool],
    rng: &mut R,
) -> Result<(Bits, Bits), MooError> {
    uniform_crossover_with(p1, p2, || rng.random::<f64>())
}

/// `(f_max - f_i) / (f_max - f_min)`, or `degenerate` when the range is empty.
pub fn mutation_probability(f_i: f64, f_max: f64, f_min: f64, degenerate: f64) -> f64 {
    if f_max == f_min {
        degenerate
    } else {
        ((f_max - f_i) / (f_max - f_min)).clamp(0.0, 1.0)
    }
}

/// Flips each gene with probability `ceiling * P_m`; `P_m` is 0.5 when all
/// fitness values coincide.
pub fn fitness_scaled_mutation<R: Rng + ?Sized>(
    bits: &[bool],
    f_i: f64,
    f_max: f64,
    f_min: f64,
    ceiling: f64,
    rng: &mut R,
) -> Bits {
    let p = ceiling * mutation_probability(f_i, f_max, f_min, 0.5);
    bits.iter()
        .map(|&b| if rng.random::<f64>() < p { !b } else { b })
        .collect()
}
