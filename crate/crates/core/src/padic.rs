//! Residues modulo `p^s` and the ramified ring `Z[π]/(π^e − p)` reduced modulo `p^s`.
//!
//! A [`RingParams`] value fixes the prime `p`, the precision `s` and the exponent
//! `r = r_num / r_den`. Elements of the ramified ring are stored as `r_den`
//! residues `c_0, …, c_{r_den-1}` standing for `Σ c_i π^i` with `π^{r_den} = p`.
//! When `r_den = 1` this is plain `Z/p^s`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest modulus `p^s` accepted. Sums of two residues stay inside `u64`
/// and products inside `u128`.
pub const MAX_MODULUS: u64 = 1 << 62;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exponent of `p` in `k!` (Legendre).
pub fn legendre_valuation(p: u64, k: u64) -> u64 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

/// Parameters of the coefficient ring: odd prime `p`, precision `s`, and
/// `r = r_num / r_den > 1/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingParams {
    p: u64,
    s: u32,
    r_num: u64,
    r_den: u64,
    modulus: u64,
}

impl RingParams {
    pub fn new(p: u64, s: u32, r_num: u64, r_den: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if s == 0 {
            return Err(Error::InvalidPrecision);
        }
        if r_num == 0 || r_den == 0 || gcd(r_num, r_den) != 1 {
            return Err(Error::InvalidExponent(r_num, r_den));
        }
        if (r_num as u128) * ((p - 1) as u128) <= r_den as u128 {
            return Err(Error::ExponentTooSmall { p, r_num, r_den });
        }
        let mut modulus: u64 = 1;
        for _ in 0..s {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or(Error::ModulusTooLarge { p, s })?;
        }
        Ok(RingParams {
            p,
            s,
            r_num,
            r_den,
            modulus,
        })
    }

    /// Ring `Z/p^s` with `r = 1`.
    pub fn unramified(p: u64, s: u32) -> Result<Self> {
        Self::new(p, s, 1, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn r_num(&self) -> u64 {
        self.r_num
    }

    pub fn r_den(&self) -> u64 {
        self.r_den
    }

    /// `p^s`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime and exponent at a different precision.
    pub fn with_precision(&self, s: u32) -> Result<Self> {
        Self::new(self.p, s, self.r_num, self.r_den)
    }

    /// Number of residues per ring element (`r_den`).
    pub fn width(&self) -> usize {
        self.r_den as usize
    }

    /// `d(r, s) = floor(s (p-1) / (r (p-1) - 1)) + 1`, the degree of the truncated exponential.
    pub fn exp_degree_bound(&self) -> u64 {
        let num = self.s as u128 * (self.p - 1) as u128 * self.r_den as u128;
        let den = self.r_num as u128 * (self.p - 1) as u128 - self.r_den as u128;
        (num / den) as u64 + 1
    }

    /// `(p^s - 1) / 2`.
    pub fn half_modulus(&self) -> u64 {
        (self.modulus - 1) / 2
    }

    pub(crate) fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub(crate) fn add_mod(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub(crate) fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub(crate) fn pow_mod(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(acc, base);
            }
            base = self.mul_mod(base, base);
            e >>= 1;
        }
        acc
    }

    /// Componentwise `acc += b`.
    #[inline]
    pub(crate) fn add_assign_coeffs(&self, acc: &mut [u64], b: &[u64]) {
        for (x, &y) in acc.iter_mut().zip(b) {
            *x = self.add_mod(*x, y);
        }
    }

    #[inline]
    pub(crate) fn neg_coeffs(&self, a: &mut [u64]) {
        for x in a.iter_mut() {
            *x = self.sub_mod(0, *x);
        }
    }

    /// Product of two elements in `Z[π]/(π^w − p)`, written into `out`.
    #[inline]
    pub(crate) fn mul_coeffs(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let w = a.len();
        if w == 1 {
            out[0] = self.mul_mod(a[0], b[0]);
            return;
        }
        let m = self.modulus as u128;
        for (k, slot) in out.iter_mut().enumerate().take(w) {
            let mut acc: u128 = 0;
            for i in 0..=k {
                acc += (a[i] as u128 * b[k - i] as u128) % m;
            }
            let mut wrapped: u128 = 0;
            for i in (k + 1)..w {
                wrapped += (a[i] as u128 * b[k + w - i] as u128) % m;
            }
            acc += (wrapped % m) * self.p as u128 % m;
            *slot = (acc % m) as u64;
        }
    }

    #[inline]
    pub(crate) fn is_zero_coeffs(a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Inverse of a unit residue by the extended Euclidean algorithm.
    pub(crate) fn inv_mod(&self, a: u64) -> Result<u64> {
        let a = a % self.modulus;
        if a % self.p == 0 {
            return Err(Error::NotAUnit {
                value: a as i128,
                p: self.p,
            });
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_x, mut x) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_x, x) = (x, old_x - q * x);
        }
        debug_assert_eq!(old_r, 1);
        Ok(self.reduce_i128(old_x))
    }
}

impl fmt::Display for RingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.s)?;
        if self.r_den > 1 {
            write!(f, "[p^(1/{})]", self.r_den)?;
        }
        if self.r_num != 1 || self.r_den != 1 {
            write!(f, ", r = {}/{}", self.r_num, self.r_den)?;
        }
        Ok(())
    }
}

/// An integer residue modulo `p^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    ring: RingParams,
}

impl Residue {
    pub fn new(ring: RingParams, value: u64) -> Self {
        Residue {
            value: value % ring.modulus,
            ring,
        }
    }

    pub fn from_int(ring: RingParams, value: i64) -> Self {
        Residue {
            value: ring.reduce_i128(value as i128),
            ring,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn add(&self, other: &Residue) -> Result<Residue> {
        self.check(other)?;
        Ok(Residue::new(self.ring, self.ring.add_mod(self.value, other.value)))
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue> {
        self.check(other)?;
        Ok(Residue::new(self.ring, self.ring.mul_mod(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Residue> {
        Ok(Residue::new(self.ring, self.ring.inv_mod(self.value)?))
    }

    /// Largest `v ≤ s` with `p^v | value`; the zero residue has valuation `s`.
    pub fn valuation(&self) -> u32 {
        if self.value == 0 {
            return self.ring.s;
        }
        let mut v = 0;
        let mut x = self.value;
        while x % self.ring.p == 0 {
            x /= self.ring.p;
            v += 1;
        }
        v
    }

    fn check(&self, other: &Residue) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `num / den` as a residue; `den` must be prime to `p`.
pub fn embed_rational(ring: RingParams, num: i64, den: i64) -> Result<Residue> {
    let d = ring.reduce_i128(den as i128);
    let inv = ring.inv_mod(d).map_err(|_| Error::NotAUnit {
        value: den as i128,
        p: ring.p,
    })?;
    let n = ring.reduce_i128(num as i128);
    Ok(Residue::new(ring, ring.mul_mod(n, inv)))
}

/// Element `Σ c_i π^i` of `Z[π]/(π^{r_den} − p)` modulo `p^s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RamifiedElem {
    ring: RingParams,
    coeffs: Vec<u64>,
}

impl RamifiedElem {
    pub fn zero(ring: RingParams) -> Self {
        RamifiedElem {
            ring,
            coeffs: vec![0; ring.width()],
        }
    }

    pub fn one(ring: RingParams) -> Self {
        Self::from_int(ring, 1)
    }

    pub fn from_int(ring: RingParams, value: i64) -> Self {
        let mut e = Self::zero(ring);
        e.coeffs[0] = ring.reduce_i128(value as i128);
        e
    }

    /// Build from explicit π-coefficients; each is reduced modulo `p^s`.
    pub fn from_coeffs(ring: RingParams, coeffs: &[u64]) -> Result<Self> {
        if coeffs.len() != ring.width() {
            return Err(Error::InvalidParams(format!(
                "ramified element needs {} coefficients, got {}",
                ring.width(),
                coeffs.len()
            )));
        }
        Ok(RamifiedElem {
            ring,
            coeffs: coeffs.iter().map(|&c| c % ring.modulus).collect(),
        })
    }

    pub(crate) fn from_raw(ring: RingParams, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), ring.width());
        RamifiedElem { ring, coeffs }
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        RingParams::is_zero_coeffs(&self.coeffs)
    }

    pub fn add(&self, other: &RamifiedElem) -> Result<RamifiedElem> {
        self.check(other)?;
        let mut out = self.clone();
        self.ring.add_assign_coeffs(&mut out.coeffs, &other.coeffs);
        Ok(out)
    }

    pub fn neg(&self) -> RamifiedElem {
        let mut out = self.clone();
        self.ring.neg_coeffs(&mut out.coeffs);
        out
    }

    pub fn sub(&self, other: &RamifiedElem) -> Result<RamifiedElem> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RamifiedElem) -> Result<RamifiedElem> {
        self.check(other)?;
        let mut out = vec![0; self.coeffs.len()];
        self.ring.mul_coeffs(&self.coeffs, &other.coeffs, &mut out);
        Ok(RamifiedElem::from_raw(self.ring, out))
    }

    pub fn pow(&self, mut e: u64) -> RamifiedElem {
        let mut acc = RamifiedElem::one(self.ring);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// π-adic valuation, capped at `s · r_den` (the valuation of zero).
    /// The `p`-adic valuation is this divided by `r_den`.
    pub fn pi_valuation(&self) -> u64 {
        let w = self.ring.r_den;
        let cap = self.ring.s as u64 * w;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| Residue::new(self.ring, c).valuation() as u64 * w + i as u64)
            .min()
            .unwrap_or(cap)
            .min(cap)
    }

    /// The residue `c_0` when the ring is unramified.
    pub fn as_residue(&self) -> Option<Residue> {
        (self.ring.r_den == 1).then(|| Residue::new(self.ring, self.coeffs[0]))
    }

    fn check(&self, other: &RamifiedElem) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }
}

impl From<Residue> for RamifiedElem {
    fn from(r: Residue) -> Self {
        let mut e = RamifiedElem::zero(r.ring);
        e.coeffs[0] = r.value;
        e
    }
}

impl fmt::Display for RamifiedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            return write!(f, "{}", self.coeffs[0]);
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·π")?,
                _ => write!(f, "{c}·π^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `π^e` with `π^{r_den} = p`, reduced modulo `p^s`.
pub fn pi_power(ring: RingParams, e: u64) -> RamifiedElem {
    let w = ring.r_den;
    let mut out = RamifiedElem::zero(ring);
    let p_exp = e / w;
    if p_exp < ring.s as u64 {
        out.coeffs[(e % w) as usize] = ring.pow_mod(ring.p, p_exp);
    }
    out
}

/// `p^r = π^{r_num}`.
pub fn p_to_r(ring: RingParams) -> RamifiedElem {
    pi_power(ring, ring.r_num)
}

/// `p^{kr} / k!` in the ring, for `0 ≤ k ≤ d(r, s)`.
pub fn p_power_over_factorial(ring: RingParams, k: u64) -> Result<RamifiedElem> {
    let d = ring.exp_degree_bound();
    if k > d {
        return Err(Error::OutOfRange(format!(
            "k = {k} exceeds the exponential degree bound d(r,s) = {d}"
        )));
    }
    Ok(p_power_over_factorial_unchecked(ring, k))
}

/// `p^{kr} / k!` for any `k`: strips `p^{v_p(k!)}` by Legendre's formula and
/// multiplies the π-power by the inverse of the unit part of `k!`.
pub(crate) fn p_power_over_factorial_unchecked(ring: RingParams, k: u64) -> RamifiedElem {
    let p = ring.p;
    let v = legendre_valuation(p, k);
    let pi_exp = k * ring.r_num - v * ring.r_den;
    let mut unit = 1u64 % ring.modulus;
    for mut i in 2..=k {
        while i % p == 0 {
            i /= p;
        }
        unit = ring.mul_mod(unit, i % ring.modulus);
    }
    let inv = ring.inv_mod(unit).expect("factorial unit part is prime to p");
    let mut out = pi_power(ring, pi_exp);
    for c in out.coeffs.iter_mut() {
        *c = ring.mul_mod(*c, inv);
    }
    out
}
