//! Polynomials in `Z_q[X]/(X^n + 1)` and the golden transform models.
//!
//! The forward transform is the in-place Cooley-Tukey iteration over
//! bit-reversed powers of `psi`: natural-order input, bit-reversed output.
//! The inverse is the matching Gentleman-Sande iteration that consumes
//! bit-reversed input and scales by `n^-1`. Pointwise products are order
//! agnostic as long as both operands share that convention.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::modmath::{add_mod, mul_mod, mul_mod_shoup, sub_mod, ModulusContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    q: u64,
    coeffs: Vec<u64>,
}

impl Polynomial {
    /// Wraps `coeffs` as an element of the ring described by `ctx`.
    pub fn new(ctx: &ModulusContext, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != ctx.n() {
            return Err(Error::ContextMismatch {
                left_n: coeffs.len(),
                left_q: ctx.q(),
                right_n: ctx.n(),
                right_q: ctx.q(),
            });
        }
        Self::from_parts(ctx.q(), coeffs)
    }

    /// Builds a polynomial without a context; only the reduction is checked.
    pub fn from_parts(q: u64, coeffs: Vec<u64>) -> Result<Self> {
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, &c)| c >= q) {
            return Err(Error::Unreduced { index, value, q });
        }
        Ok(Self { q, coeffs })
    }

    pub fn zero(ctx: &ModulusContext) -> Self {
        Self {
            q: ctx.q(),
            coeffs: vec![0; ctx.n()],
        }
    }

    /// The unit impulse `delta_k`, i.e. the monomial `X^k`.
    pub fn monomial(ctx: &ModulusContext, k: usize) -> Self {
        let mut p = Self::zero(ctx);
        p.coeffs[k] = 1;
        p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub(crate) fn check_ring(&self, ctx: &ModulusContext) -> Result<()> {
        if self.q != ctx.q() || self.len() != ctx.n() {
            return Err(Error::ContextMismatch {
                left_n: self.len(),
                left_q: self.q,
                right_n: ctx.n(),
                right_q: ctx.q(),
            });
        }
        Ok(())
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.q != other.q || self.len() != other.len() {
            return Err(Error::ContextMismatch {
                left_n: self.len(),
                left_q: self.q,
                right_n: other.len(),
                right_q: other.q,
            });
        }
        Ok(())
    }
}

/// Uniform-ish coefficients drawn as `next_u64() % q`, one draw per coefficient
/// in index order.
pub fn random_polynomial<R: RngCore + ?Sized>(ctx: &ModulusContext, rng: &mut R) -> Polynomial {
    let q = ctx.q();
    Polynomial {
        q,
        coeffs: (0..ctx.n()).map(|_| rng.next_u64() % q).collect(),
    }
}

/// Schoolbook product modulo `X^n + 1`.
pub fn naive_negacyclic_mul(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    a.check_same_ring(b)?;
    let (n, q) = (a.len(), a.q);
    let wq = q as u128;
    // Separate accumulators for the wrapped (negated) terms; reduce only when
    // a 128-bit add would overflow.
    let mut pos = vec![0u128; n];
    let mut neg = vec![0u128; n];
    let acc = |slot: &mut u128, prod: u128| {
        *slot = match slot.checked_add(prod) {
            Some(v) => v,
            None => *slot % wq + prod,
        }
    };
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate() {
            let prod = ai as u128 * bj as u128;
            let k = i + j;
            if k < n {
                acc(&mut pos[k], prod);
            } else {
                acc(&mut neg[k - n], prod);
            }
        }
    }
    let coeffs = pos
        .into_iter()
        .zip(neg)
        .map(|(p, m)| sub_mod((p % wq) as u64, (m % wq) as u64, q))
        .collect();
    Ok(Polynomial { q, coeffs })
}

/// Forward negacyclic NTT; output in bit-reversed order.
pub fn reference_forward_ntt(ctx: &ModulusContext, a: &Polynomial) -> Result<Polynomial> {
    a.check_ring(ctx)?;
    let q = ctx.q();
    let n = ctx.n();
    let tw = ctx.fwd_twiddles();
    let mut x = a.coeffs.clone();
    let mut t = n;
    let mut m = 1;
    while m < n {
        t /= 2;
        for i in 0..m {
            let w = tw[m + i];
            let base = 2 * i * t;
            for j in base..base + t {
                let u = x[j];
                let v = mul_mod_shoup(x[j + t], w, q);
                x[j] = add_mod(u, v, q);
                x[j + t] = sub_mod(u, v, q);
            }
        }
        m *= 2;
    }
    Ok(Polynomial { q, coeffs: x })
}

/// Inverse negacyclic NTT; consumes bit-reversed input, returns natural order.
pub fn reference_inverse_ntt(ctx: &ModulusContext, a: &Polynomial) -> Result<Polynomial> {
    a.check_ring(ctx)?;
    let q = ctx.q();
    let n = ctx.n();
    let tw = ctx.inv_twiddles();
    let mut x = a.coeffs.clone();
    let mut t = 1;
    let mut m = n;
    while m > 1 {
        let h = m / 2;
        for i in 0..h {
            let w = tw[h + i];
            let base = 2 * i * t;
            for j in base..base + t {
                let u = x[j];
                let v = x[j + t];
                x[j] = add_mod(u, v, q);
                x[j + t] = mul_mod_shoup(sub_mod(u, v, q), w, q);
            }
        }
        t *= 2;
        m = h;
    }
    let n_inv = ctx.n_inv();
    for c in &mut x {
        *c = mul_mod_shoup(*c, n_inv, q);
    }
    Ok(Polynomial { q, coeffs: x })
}

/// Element-wise product in the evaluation domain.
pub fn pointwise_mul(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    a.check_same_ring(b)?;
    let q = a.q;
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(&x, &y)| mul_mod(x, y, q))
        .collect();
    Ok(Polynomial { q, coeffs })
}

/// Negacyclic product through the transform domain.
pub fn ntt_negacyclic_mul(
    ctx: &ModulusContext,
    a: &Polynomial,
    b: &Polynomial,
) -> Result<Polynomial> {
    let fa = reference_forward_ntt(ctx, a)?;
    let fb = reference_forward_ntt(ctx, b)?;
    reference_inverse_ntt(ctx, &pointwise_mul(&fa, &fb)?)
}
