//! Seeded random streams.
//!
//! Every stochastic quantity is drawn from ChaCha8, a counter-based
//! generator whose output is identical on every platform. A trial's seed is
//! `base_seed + trial_index`; independent roles within the trial (input,
//! noise, ...) use distinct ChaCha stream ids on that seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    Input = 0,
    Noise = 1,
    Channel = 2,
    Bound = 3,
}

/// Stream for `role` in trial `trial` of an experiment seeded with `base_seed`.
pub fn trial_stream(base_seed: u64, trial: u64, role: StreamRole) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(trial));
    rng.set_stream(role as u64);
    rng
}

/// Stream for experiment-wide draws (e.g. a random channel realisation).
pub fn shared_stream(base_seed: u64, role: StreamRole) -> StreamRng {
    trial_stream(base_seed, 0, role)
}
