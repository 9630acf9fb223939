//! Named, seeded random streams.
//!
//! A stream is keyed by `SM3(seed ‖ label)` and selected by a stream id, so
//! independent consumers (the QKD channel of link 3, the authenticator of
//! link 3, ...) never share draws and can be added or removed without
//! perturbing each other.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::sm3::Sm3;

pub fn stream_rng(seed: u64, label: &str, stream: u64) -> ChaCha20Rng {
    let mut h = Sm3::new();
    h.update(&seed.to_le_bytes());
    h.update(label.as_bytes());
    let mut rng = ChaCha20Rng::from_seed(*h.finalize().as_bytes());
    rng.set_stream(stream);
    rng
}
