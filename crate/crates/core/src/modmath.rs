//! Word-size modular arithmetic, NTT-friendly prime discovery and twiddle tables.
//!
//! All residues are canonical (`0 <= x < q`). Moduli are restricted to
//! `q < 2^62`, which keeps `x + y` and the Shoup intermediate `x*w - hi*q`
//! inside a single 64-bit word with one conditional correction.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 62;

#[inline(always)]
pub fn add_mod(x: u64, y: u64, q: u64) -> u64 {
    debug_assert!(x < q && y < q);
    let s = x + y;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline(always)]
pub fn sub_mod(x: u64, y: u64, q: u64) -> u64 {
    debug_assert!(x < q && y < q);
    if x >= y {
        x - y
    } else {
        x + q - y
    }
}

/// `(x * y) mod q` through a 128-bit product. This is the plain route used for
/// data-data products and as the reference for Shoup multiplication.
#[inline(always)]
pub fn mul_mod(x: u64, y: u64, q: u64) -> u64 {
    ((x as u128 * y as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse of `x` modulo a prime `q` via Fermat.
pub fn inv_mod(x: u64, q: u64) -> u64 {
    pow_mod(x, q - 2, q)
}

/// A constant operand together with its Shoup companion `floor(value * 2^64 / q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShoupPair {
    pub value: u64,
    pub shoup: u64,
}

pub fn precompute_shoup(w: u64, q: u64) -> Result<ShoupPair> {
    if q >= MODULUS_LIMIT {
        return Err(Error::ModulusTooLarge(q));
    }
    debug_assert!(w < q);
    let shoup = (((w as u128) << 64) / q as u128) as u64;
    Ok(ShoupPair { value: w, shoup })
}

/// `(x * w.value) mod q` using the precomputed quotient estimate.
///
/// `hi` underestimates `floor(x * w / q)` by at most one, so the wrapped
/// difference lands in `[0, 2q)` and a single subtraction finishes it.
#[inline(always)]
pub fn mul_mod_shoup(x: u64, w: ShoupPair, q: u64) -> u64 {
    let hi = ((x as u128 * w.shoup as u128) >> 64) as u64;
    let r = x.wrapping_mul(w.value).wrapping_sub(hi.wrapping_mul(q));
    if r >= q {
        r - q
    } else {
        r
    }
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    for c in 1.. {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c % n, n);
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut r = 1u64;
        let mut q = 1u64;
        let mut ys = 2u64;
        const BATCH: u64 = 64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            out.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Smallest generator of the multiplicative group modulo prime `q`.
pub fn smallest_primitive_root(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let factors = prime_factors(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (q - 1) / f, q) != 1))
        .expect("a prime modulus always has a primitive root")
}

/// Primitive `2n`-th root of unity `psi = g^((q-1)/2n)` for the smallest generator `g`.
pub fn find_primitive_2n_root(q: u64, n: usize) -> Result<u64> {
    let order = 2 * n as u64;
    if q < 2 || !(q - 1).is_multiple_of(order) {
        return Err(Error::NotNttFriendly { q, n });
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let g = smallest_primitive_root(q);
    Ok(pow_mod(g, (q - 1) / order, q))
}

/// Smallest prime `p >= floor` with `p = 1 mod 2n` and `p < 2^62`.
pub fn find_ntt_prime(n: usize, floor: u64) -> Result<u64> {
    if !n.is_power_of_two() {
        return Err(Error::BadLength(n));
    }
    let step = 2 * n as u64;
    let not_found = Error::NoPrimeFound { n, floor };
    if floor >= MODULUS_LIMIT {
        return Err(not_found);
    }
    let mut cand = floor.saturating_sub(1).div_ceil(step) * step + 1;
    while cand < MODULUS_LIMIT {
        if is_prime(cand) {
            return Ok(cand);
        }
        cand += step;
    }
    Err(not_found)
}

/// Reverses the low `bits` bits of `x`.
#[inline]
pub fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// A validated NTT-friendly prime paired with its transform length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeModulus {
    q: u64,
    n: usize,
}

impl PrimeModulus {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::BadLength(n));
        }
        if q >= MODULUS_LIMIT {
            return Err(Error::ModulusTooLarge(q));
        }
        if q < 2 || !(q - 1).is_multiple_of(2 * n as u64) {
            return Err(Error::NotNttFriendly { q, n });
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { q, n })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn two_n_order(&self) -> u64 {
        2 * self.n as u64
    }

    pub fn log_n(&self) -> u32 {
        self.n.trailing_zeros()
    }
}

/// Immutable ring context: modulus, root and the bit-reversed twiddle tables.
///
/// `fwd_twiddles[k] = psi^bitrev(k)` and `inv_twiddles[k] = psi^-bitrev(k)`,
/// each carrying its Shoup companion.
#[derive(Clone, Debug)]
pub struct ModulusContext {
    modulus: PrimeModulus,
    psi: u64,
    fwd_twiddles: Vec<ShoupPair>,
    inv_twiddles: Vec<ShoupPair>,
    n_inv: ShoupPair,
}

impl ModulusContext {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        let modulus = PrimeModulus::new(q, n)?;
        let psi = find_primitive_2n_root(q, n)?;
        let psi_inv = inv_mod(psi, q);
        let bits = modulus.log_n();

        let mut fwd_natural = Vec::with_capacity(n);
        let mut inv_natural = Vec::with_capacity(n);
        let (mut f, mut i) = (1u64, 1u64);
        for _ in 0..n {
            fwd_natural.push(f);
            inv_natural.push(i);
            f = mul_mod(f, psi, q);
            i = mul_mod(i, psi_inv, q);
        }
        let table = |natural: &[u64]| -> Result<Vec<ShoupPair>> {
            (0..n)
                .map(|k| precompute_shoup(natural[bit_reverse(k, bits)], q))
                .collect()
        };
        let fwd_twiddles = table(&fwd_natural)?;
        let inv_twiddles = table(&inv_natural)?;
        let n_inv = precompute_shoup(inv_mod(n as u64 % q, q), q)?;
        Ok(Self {
            modulus,
            psi,
            fwd_twiddles,
            inv_twiddles,
            n_inv,
        })
    }

    /// Builds a context over the smallest NTT prime at or above `floor`.
    pub fn with_prime_floor(n: usize, floor: u64) -> Result<Self> {
        Self::new(find_ntt_prime(n, floor)?, n)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.q
    }

    pub fn n(&self) -> usize {
        self.modulus.n
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    pub fn fwd_twiddles(&self) -> &[ShoupPair] {
        &self.fwd_twiddles
    }

    pub fn inv_twiddles(&self) -> &[ShoupPair] {
        &self.inv_twiddles
    }

    pub fn n_inv(&self) -> ShoupPair {
        self.n_inv
    }

    /// Writes the twiddle tables as CSV: `index,value,shoup,inv_value,inv_shoup`.
    pub fn write_twiddle_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,value,shoup,inv_value,inv_shoup")?;
        for (k, (f, i)) in self.fwd_twiddles.iter().zip(&self.inv_twiddles).enumerate() {
            writeln!(out, "{k},{},{},{},{}", f.value, f.shoup, i.value, i.shoup)?;
        }
        Ok(())
    }
}
