use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// `q` is not congruent to 1 modulo `2n`, so no primitive `2n`-th root exists.
    #[error("modulus {q} is not NTT friendly for n = {n} (need q = 1 mod {})", 2 * n)]
    NotNttFriendly { q: u64, n: usize },

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is not below 2^62")]
    ModulusTooLarge(u64),

    #[error("invalid transform length {0}: must be a power of two, at least 4")]
    BadLength(usize),

    #[error("no NTT prime for n = {n} in [{floor}, 2^62)")]
    NoPrimeFound { n: usize, floor: u64 },

    #[error("operands belong to different rings: (n = {left_n}, q = {left_q}) vs (n = {right_n}, q = {right_q})")]
    ContextMismatch {
        left_n: usize,
        left_q: u64,
        right_n: usize,
        right_q: u64,
    },

    #[error("coefficient {value} at index {index} is not reduced modulo {q}")]
    Unreduced { index: usize, value: u64, q: u64 },

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("malformed polynomial file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
