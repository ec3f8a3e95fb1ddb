//! Counter-addressed random streams: path `p` under `seed` always draws
//! the same numbers, whatever order or thread the paths run in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn stream(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// `n` independent N(0, var) draws for stream (seed, path).
pub fn normals(seed: u64, path: u64, n: usize, var: f64) -> Vec<f64> {
    let mut rng = stream(seed, path);
    let sd = var.sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}
