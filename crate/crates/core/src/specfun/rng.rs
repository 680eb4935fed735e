use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{ensure, Result};

/// Which consumer a stream feeds. Environment and agent never share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Env,
    Agent,
}

/// A deterministic random stream keyed by `(master_seed, cell, run, role)`.
///
/// The key selects a ChaCha8 key (from the master seed and sweep cell) and a
/// ChaCha stream id (from the run index and role), so every stream is a
/// disjoint slice of a counter-based generator and can be rebuilt on any
/// thread in any order.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    cell_index: u64,
    run_index: u64,
    role: Role,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    /// Stream for `run_index` and `role` inside sweep cell `cell_index`.
    pub fn new(master_seed: u64, cell_index: u64, run_index: u64, role: Role) -> Self {
        let mut state = master_seed;
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            if i == 2 {
                state ^= cell_index.wrapping_mul(0xd6e8_feb8_6659_fd93);
            }
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        let role_bit = match role {
            Role::Env => 0,
            Role::Agent => 1,
        };
        rng.set_stream((run_index << 1) | role_bit);
        Self { rng, master_seed, cell_index, run_index, role }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn cell_index(&self) -> u64 {
        self.cell_index
    }

    pub fn run_index(&self) -> u64 {
        self.run_index
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` from exactly one underlying draw.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Stream for a run outside any sweep (cell 0).
pub fn derive_stream(master_seed: u64, run_index: u64, role: Role) -> RngStream {
    RngStream::new(master_seed, 0, run_index, role)
}

/// Bernoulli draw. Always consumes exactly one uniform.
pub fn sample_bernoulli(rng: &mut RngStream, p: f64) -> Result<u8> {
    ensure!((0.0..=1.0).contains(&p), Domain, "bernoulli probability must lie in [0, 1], got {p}");
    Ok((rng.uniform() < p) as u8)
}

/// Beta draw as `X / (X + Y)` with independent Gamma(a) and Gamma(b) draws.
pub fn sample_beta(rng: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    ensure!(
        a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        Domain,
        "beta shapes must be positive, got ({a}, {b})"
    );
    Ok(sample_beta_unchecked(rng, a, b))
}

pub(crate) fn sample_beta_unchecked(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    let x = Gamma::new(a, 1.0).expect("positive shape").sample(rng);
    let y = Gamma::new(b, 1.0).expect("positive shape").sample(rng);
    let sum = x + y;
    if sum > 0.0 {
        (x / sum).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    } else {
        // Both gamma draws underflowed; only reachable for tiny shapes.
        a / (a + b)
    }
}
