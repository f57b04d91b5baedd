//! `ctr-splitmix64`: a counter-based, splittable generator.
//!
//! The output for `(key, counter)` is the SplitMix64 finalizer applied to
//! `key + (counter + 1) * 0x9E3779B97F4A7C15` (wrapping). A stream is a key;
//! [`CounterRng::split`] derives a child key as `mix(key ^ mix(id))`. Because
//! every draw is a pure function of `(key, counter)`, batches indexed by
//! counter produce the same sample stream under any scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: seed, counter: 0 }
    }

    /// Positions the generator at an absolute counter value.
    pub fn at(seed: u64, counter: u64) -> Self {
        CounterRng { key: seed, counter }
    }

    /// Independent child stream.
    pub fn split(&self, id: u64) -> Self {
        CounterRng { key: mix64(self.key ^ mix64(id)), counter: 0 }
    }

    /// Pure draw at a given counter; does not advance.
    pub fn draw(key: u64, counter: u64) -> u64 {
        mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = Self::draw(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` by rejection (`n > 0`).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_positionable() {
        let mut a = CounterRng::new(42);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let mut b = CounterRng::at(42, 5);
        assert_eq!(b.next_u64(), xs[5]);
        assert_eq!(CounterRng::draw(42, 3), xs[3]);
        let c = CounterRng::new(42).split(1).next_u64();
        assert_ne!(c, xs[0]);
        // frozen first output guards against accidental algorithm changes
        assert_eq!(CounterRng::new(0).next_u64(), mix64(GOLDEN));
    }

    #[test]
    fn uniform_range() {
        let mut r = CounterRng::new(7);
        let mean: f64 = (0..10_000).map(|_| r.next_f64()).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02);
        assert!((0..1000).all(|_| r.below(6) < 6));
    }
}
