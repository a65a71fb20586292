//! Approximation of the distance: Monte Carlo estimation for acyclic chains
//! and a deterministic bounded-length approximation for arbitrary chains.

mod bounded;
mod sampling;

pub use bounded::{
    length_bound, length_bound_closed_form, tv_bounded, tv_bounded_with, BoundedEstimate,
    ClassifiedWord, LengthBound, LengthMethod, DEFAULT_LENGTH_STEP_CAP,
};
pub use sampling::{
    rng_from_seed, sample_count, sample_word, tv_sample_acyclic, SampleEstimate, WordSampler,
    RNG_ALGORITHM,
};
