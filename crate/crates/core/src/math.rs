//! Scalar math helpers that work identically with and without `std`.
//!
//! Float transcendentals are inherent methods only when `std` is enabled, so
//! every non-trivial function the crate needs is routed through this module.
//! All helpers are written in numerically stable forms (log1p/expm1 based)
//! because densities routinely carry masses around 1e-300 and LLRs up to the
//! grid bound.

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        x.ln_1p()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline]
    pub fn round(x: f64) -> f64 {
        x.round()
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[inline]
    pub fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline]
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline]
    pub fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }
}

pub(crate) use imp::{abs, cos, erfc, exp, floor, ln, ln_1p, round, sqrt};

/// `x^n` for small integer exponents by repeated multiplication.
#[inline]
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// ln(1 + e^x), stable for any x.
#[inline]
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + ln_1p(exp(-x))
    } else {
        ln_1p(exp(x))
    }
}

/// log(e^a + e^b), tolerating -inf (empty term) operands.
#[inline]
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ln_1p(exp(lo - hi))
}

/// Logistic function 1/(1 + e^x) evaluated without overflow.
#[inline]
pub(crate) fn sigmoid_neg(x: f64) -> f64 {
    if x > 0.0 {
        let e = exp(-x);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + exp(x))
    }
}

/// Binary entropy H2(p) in bits; H2(0) = H2(1) = 0.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * ln(p) + (1.0 - p) * ln_1p(-p)) / LN_2
}

/// Standard normal CDF.
#[inline]
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

/// Box-plus magnitude 2*atanh(tanh(u/2)*tanh(v/2)) for u, v >= 0, evaluated
/// via the identity min(u,v) + ln(1+e^-(u+v)) - ln(1+e^-|u-v|), which stays
/// accurate for both tiny and large arguments.
#[inline]
pub(crate) fn boxplus_mag(u: f64, v: f64) -> f64 {
    let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
    lo + ln_1p(exp(-(u + v))) - ln_1p(exp(lo - hi))
}

/// SplitMix64 step; used to derive per-(seed, lane) RNG seeds deterministically.
#[inline]
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a list of u64 words into a 32-byte RNG seed.
pub(crate) fn derive_seed(words: &[u64]) -> [u8; 32] {
    let mut state: u64 = 0x243f_6a88_85a3_08d3; // arbitrary fixed offset
    for &w in words {
        state ^= w.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        splitmix64(&mut state);
    }
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}
