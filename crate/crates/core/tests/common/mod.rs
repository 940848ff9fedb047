#![allow(dead_code)]

use metaepi::{ParameterSet, State, Variant};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Every parameter log-uniform on `[0.1, 10]`, then the variant's forced zeros.
pub fn random_params<R: Rng>(rng: &mut R, variant: Variant) -> ParameterSet {
    let mut p = metaepi::fixtures::general_reference();
    for name in ParameterSet::NAMES {
        p.set(name, log_uniform(rng, 0.1, 10.0)).unwrap();
    }
    for name in variant.forced_zero() {
        p.set(name, 0.0).unwrap();
    }
    p
}

pub fn random_state<R: Rng>(rng: &mut R) -> State {
    State::new(
        log_uniform(rng, 0.1, 10.0),
        log_uniform(rng, 0.1, 10.0),
        log_uniform(rng, 0.1, 10.0),
        log_uniform(rng, 0.1, 10.0),
    )
}

pub fn random_variant<R: Rng>(rng: &mut R) -> Variant {
    Variant::ALL[rng.gen_range(0..Variant::ALL.len())]
}
