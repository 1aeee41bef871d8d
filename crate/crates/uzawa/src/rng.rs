//! Seeded, portable pseudo-random numbers.
//!
//! Every generated problem must be exactly reproducible from its seed, so
//! determinism matters more here than statistical sophistication. The
//! generator is a splitmix64 chain: `state += 0x9E3779B97F4A7C15`, followed
//! by the two xor-shift-multiply finalization steps. Uniforms take the high
//! 53 bits of the output word; normal deviates come from the Box-Muller
//! transform. The algorithm is fixed and is part of the crate's
//! reproducibility contract: identical seeds give identical problems on a
//! given target (transcendental rounding may differ between libm
//! implementations, never between runs on the same machine).

/// Splitmix64 pseudo-random generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derives an independent generator for substream `tag` of `seed`.
    ///
    /// Used so that, e.g., the entries of A and the entries of B come from
    /// separate streams and changing one dimension never shifts the other.
    pub fn stream(seed: u64, tag: u64) -> Self {
        let mut root = SplitMix64::new(seed.wrapping_add(tag.wrapping_mul(GOLDEN_GAMMA)));
        // Burn one output so nearby (seed, tag) pairs decorrelate.
        root.next_u64();
        root
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform deviate in [0, 1), using the high 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform deviate in (0, 1]; never zero, safe under `ln`.
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller (cosine branch).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fills a vector with standard normal deviates.
    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.next_normal()).collect()
    }

    /// Fills a vector with uniform deviates in [0, 1).
    pub fn uniform_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.next_f64()).collect()
    }

    /// Random unit vector (normal deviates, normalized).
    pub fn unit_vec(&mut self, len: usize) -> Vec<f64> {
        loop {
            let v = self.normal_vec(len);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-30 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}
