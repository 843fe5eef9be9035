//! Deterministic, stream-splittable pseudo-random number generation.
//!
//! The generator is SplitMix64: a counter advanced by a fixed odd constant and
//! passed through an avalanching finalizer. Period 2^64 per stream. Two
//! streams with distinct `stream_id`s start from unrelated counters, so they
//! behave as statistically independent sources while staying reproducible:
//! the same `(seed, stream_id)` always replays the same variate sequence.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; also used to hash `(seed, stream_id)` into a
/// starting counter.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A value-owned random stream. Cheap to clone and to derive substreams from;
/// there is no shared state, so any number of streams may run on parallel
/// workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    state: u64,
    gauss_spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        // Decorrelate the two coordinates before merging them.
        let state =
            mix64(seed ^ mix64(stream_id.wrapping_mul(GOLDEN_GAMMA) ^ 0x6A09_E667_F3BC_C909));
        RngStream {
            seed,
            stream_id,
            state,
            gauss_spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derive a fresh independent stream from this one. The child depends only
    /// on `(seed, stream_id, child)`, never on how far this stream has been
    /// consumed, so worker layouts stay reproducible.
    pub fn substream(&self, child: u64) -> Self {
        RngStream::new(
            self.seed,
            mix64(self.stream_id ^ child.wrapping_mul(GOLDEN_GAMMA) ^ 0xA5A5_A5A5_5A5A_5A5A),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval `(0, 1)`; safe under `ln`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit-rate exponential variate.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -self.next_open01().ln()
    }

    /// Standard normal variate (Box–Muller, spare cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.gauss_spare.take() {
            return z;
        }
        let r = (-2.0 * self.next_open01().ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * self.next_f64();
        let (s, c) = phi.sin_cos();
        self.gauss_spare = Some(r * s);
        r * c
    }
}

/// Strictly increasing arrival times `Γ_1 < Γ_2 < …` of a unit-rate Poisson
/// process: partial sums of independent unit exponentials. These drive the
/// largest-jump-first inversion of subordinator Lévy tails.
#[derive(Debug, Clone)]
pub struct ArrivalSequence {
    gammas: Vec<f64>,
}

impl ArrivalSequence {
    /// Wrap a precomputed arrival vector, validating the invariants.
    pub fn from_gammas(gammas: Vec<f64>) -> crate::Result<Self> {
        if gammas.is_empty() {
            return Err(crate::Error::Parameter(
                "arrival sequence must be nonempty".into(),
            ));
        }
        if gammas[0] <= 0.0 {
            return Err(crate::Error::Parameter(
                "first arrival must be positive".into(),
            ));
        }
        if gammas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(crate::Error::Parameter(
                "arrivals must be strictly increasing".into(),
            ));
        }
        Ok(ArrivalSequence { gammas })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}
