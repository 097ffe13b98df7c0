use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream used for drawing datasets and count records.
pub const DATA_STREAM: u64 = 0;
/// Stream for the hidden calibration error of a simulated dataset.
pub const CALIBRATION_STREAM: u64 = 16;
/// Bootstrap replicate `b` uses stream `REPLICATE_STREAM_BASE + b`.
pub const REPLICATE_STREAM_BASE: u64 = 1 << 32;

/// Independent ChaCha20 stream `stream` under the root `seed`. Streams do not
/// overlap, so tasks can run in any order or in parallel and still draw the
/// same numbers.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
