//! Shared inputs for the pipeline benchmarks.

use larex_core::synth::{self, PageSpec};
use larex_core::Raster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A full synthetic page at `scale` times the 1100 x 1600 design size.
pub fn page(scale: f64) -> Raster {
    synth::figure_page(PageSpec {
        seed: 42,
        scale,
        with_image: true,
    })
    .raster
}

/// Uniform noise with the given ink density.
pub fn noise(width: u32, height: u32, density: f64, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Raster::new(width, height).expect("non-empty size");
    for y in 0..height {
        for x in 0..width {
            if rng.random_bool(density) {
                r.set(x, y, true);
            }
        }
    }
    r
}
