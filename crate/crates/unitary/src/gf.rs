//! The quadratic field tower F_p ⊆ F_q ⊆ F_{q²}.
//!
//! F_q is `F_p[x]` modulo a monic irreducible `f_q` of degree e, and
//! F_{q²} is `F_q[y]` modulo a monic irreducible quadratic `f_K`. Both
//! moduli are picked deterministically: the lexicographically smallest
//! irreducible, comparing coefficient sequences low degree first. With
//! that representation the involution σ: x ↦ x^q is F_q-linear and acts
//! on the quadratic generator as y ↦ -c₁ - y, so conjugation costs one
//! F_q multiplication; it is on every hot path of the matrix kernels.
//!
//! An element is stored as 2e base-p digits: the low e digits are the
//! F_q-coordinate of 1, the high e digits the coordinate of y. The same
//! digit vector is the JSON wire format.

use crate::{Error, Result};
use rand::Rng;
use smallvec::{smallvec, SmallVec};
use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub(crate) type Digits = SmallVec<[u64; 4]>;

// ---------------------------------------------------------------------------
// F_p scalars. p < 2^31 so products fit in u64.
// ---------------------------------------------------------------------------

#[inline]
fn fp_add(p: u64, a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn fp_sub(p: u64, a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
fn fp_neg(p: u64, a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
fn fp_mul(p: u64, a: u64, b: u64) -> u64 {
    a * b % p
}

/// Barrett-style reduction of a·b mod p with a precomputed
/// m = floor(2^64 / p); exact for a·b < 2^63 since the estimated quotient
/// is off by at most one.
#[inline]
fn fp_mul_fast(p: u64, m: u64, a: u64, b: u64) -> u64 {
    let r = a * b;
    let q = ((r as u128 * m as u128) >> 64) as u64;
    let rem = r - q * p;
    if rem >= p {
        rem - p
    } else {
        rem
    }
}

fn fp_pow(p: u64, mut a: u64, mut k: u64) -> u64 {
    let mut acc = 1 % p;
    while k > 0 {
        if k & 1 == 1 {
            acc = fp_mul(p, acc, a);
        }
        a = fp_mul(p, a, a);
        k >>= 1;
    }
    acc
}

#[inline]
fn fp_inv(p: u64, a: u64) -> u64 {
    debug_assert!(a != 0);
    fp_pow(p, a, p - 2)
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = 37u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

// ---------------------------------------------------------------------------
// Polynomials over F_p, coefficients low degree first.
// ---------------------------------------------------------------------------

fn poly_deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = fp_add(p, out[i + j], fp_mul(p, ai, bj));
        }
    }
    out
}

/// Remainder of `a` modulo a monic `m`.
fn poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    let md = poly_deg(m).expect("monic modulus");
    let mut r = a.to_vec();
    while let Some(rd) = poly_deg(&r) {
        if rd < md {
            break;
        }
        let c = r[rd];
        r[rd] = 0;
        for j in 0..md {
            let idx = rd - md + j;
            r[idx] = fp_sub(p, r[idx], fp_mul(p, c, m[j]));
        }
    }
    r.truncate(md);
    r.resize(md, 0);
    r
}

fn poly_powmod(p: u64, base: &[u64], mut k: u64, m: &[u64]) -> Vec<u64> {
    let md = poly_deg(m).expect("monic modulus");
    let mut acc = vec![0u64; md];
    if md > 0 {
        acc[0] = 1 % p;
    }
    let mut b = poly_rem(p, base, m);
    while k > 0 {
        if k & 1 == 1 {
            acc = poly_rem(p, &poly_mul(p, &acc, &b), m);
        }
        b = poly_rem(p, &poly_mul(p, &b, &b), m);
        k >>= 1;
    }
    acc
}

fn poly_gcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    while let Some(bd) = poly_deg(&b) {
        let inv = fp_inv(p, b[bd]);
        let m: Vec<u64> = b[..=bd].iter().map(|&c| fp_mul(p, c, inv)).collect();
        let r = poly_rem(p, &a, &m);
        a = std::mem::take(&mut b);
        b = r;
    }
    a
}

/// Rabin's irreducibility test for a monic degree-e polynomial over F_p.
fn poly_irreducible(p: u64, f: &[u64]) -> bool {
    let e = poly_deg(f).expect("nonzero polynomial");
    if e == 0 {
        return false;
    }
    if e == 1 {
        return true;
    }
    // x^{p^k} mod f, computed by iterating the p-power map.
    let frob = |k: usize| -> Vec<u64> {
        let mut z = vec![0u64; e];
        if e >= 2 {
            z[1] = 1;
        }
        for _ in 0..k {
            z = poly_powmod(p, &z, p, f);
        }
        z
    };
    let mut x = vec![0u64; e];
    x[1] = 1;
    let top = frob(e);
    if top != x {
        return false;
    }
    let mut primes = Vec::new();
    let mut n = e;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            primes.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for r in primes {
        let mut h = frob(e / r);
        // h - x
        h[1] = fp_sub(p, h[1], 1);
        let g = poly_gcd(p, f, &h);
        if poly_deg(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// The lexicographically smallest monic irreducible of degree e over F_p,
/// comparing coefficient tuples (a₀, a₁, …) with a₀ most significant.
fn smallest_irreducible(p: u64, e: usize) -> Vec<u64> {
    let mut coeffs = vec![0u64; e];
    loop {
        let mut f = coeffs.clone();
        f.push(1);
        if poly_irreducible(p, &f) {
            return f;
        }
        // odometer with the last coefficient cycling fastest
        let mut i = e;
        loop {
            if i == 0 {
                unreachable!("no irreducible of degree {e} over F_{p}");
            }
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// F_q arithmetic on digit slices of length e.
// ---------------------------------------------------------------------------

struct Fq<'a> {
    p: u64,
    /// floor(2^64 / p) for Barrett reduction.
    pm: u64,
    e: usize,
    q: u128,
    f_q: &'a [u64],
}

impl Fq<'_> {
    fn zero(&self) -> Digits {
        smallvec![0; self.e]
    }

    fn one(&self) -> Digits {
        let mut d = self.zero();
        d[0] = 1 % self.p;
        d
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Digits {
        a.iter().zip(b).map(|(&x, &y)| fp_add(self.p, x, y)).collect()
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> Digits {
        a.iter().zip(b).map(|(&x, &y)| fp_sub(self.p, x, y)).collect()
    }

    fn neg(&self, a: &[u64]) -> Digits {
        a.iter().map(|&x| fp_neg(self.p, x)).collect()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Digits {
        if self.e == 1 {
            return smallvec![fp_mul_fast(self.p, self.pm, a[0], b[0])];
        }
        let mut t: SmallVec<[u64; 8]> = smallvec![0; 2 * self.e - 1];
        for i in 0..self.e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.e {
                t[i + j] = fp_add(self.p, t[i + j], fp_mul_fast(self.p, self.pm, a[i], b[j]));
            }
        }
        for i in (self.e..2 * self.e - 1).rev() {
            let c = t[i];
            if c == 0 {
                continue;
            }
            t[i] = 0;
            for j in 0..self.e {
                t[i - self.e + j] =
                    fp_sub(self.p, t[i - self.e + j], fp_mul_fast(self.p, self.pm, c, self.f_q[j]));
            }
        }
        t[..self.e].iter().copied().collect()
    }

    fn scale(&self, a: &[u64], c: u64) -> Digits {
        a.iter().map(|&x| fp_mul(self.p, x, c)).collect()
    }

    fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn pow(&self, a: &[u64], mut k: u128) -> Digits {
        let mut acc = self.one();
        let mut b: Digits = a.iter().copied().collect();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            k >>= 1;
        }
        acc
    }

    fn inv(&self, a: &[u64]) -> Digits {
        debug_assert!(!self.is_zero(a));
        if self.e == 1 {
            return smallvec![fp_inv(self.p, a[0])];
        }
        // Fermat: a^{q-2}
        self.pow(a, self.q - 2)
    }
}

// ---------------------------------------------------------------------------
// Factoring group orders (u128): trial division + Pollard-Brent rho.
// The spec construction rejects q > 2^40, so q² - 1 < 2^80 and the
// deterministic Miller-Rabin base set below is exact.
// ---------------------------------------------------------------------------

fn mulmod_u128(a: u128, b: u128, m: u128) -> u128 {
    // m < 2^80; split b to keep products inside u128
    let mut result = 0u128;
    let mut a = a % m;
    let mut b = b;
    while b > 0 {
        if b & 1 == 1 {
            result = (result + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    result
}

fn powmod_u128(mut a: u128, mut k: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    a %= m;
    while k > 0 {
        if k & 1 == 1 {
            acc = mulmod_u128(acc, a, m);
        }
        a = mulmod_u128(a, a, m);
        k >>= 1;
    }
    acc
}

fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // exact for n < 3.3 * 10^24
    'witness: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u128) -> u128 {
    debug_assert!(n > 1 && !is_prime_u128(n));
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| (mulmod_u128(x, x, n) + c) % n;
        let mut x = 2u128;
        let mut y = 2u128;
        let mut d = 1u128;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = x.abs_diff(y);
            d = gcd_u128(diff, n);
        }
        if d != n && d != 0 {
            return d;
        }
        c += 1;
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Prime factorization with multiplicities, ascending.
fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    let push = |p: u128, out: &mut Vec<(u128, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for p in 2u128..=65_537 {
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            push(p, &mut out);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u128(m) {
            push(m, &mut out);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort_unstable();
    out
}

// ---------------------------------------------------------------------------
// FieldSpec
// ---------------------------------------------------------------------------

struct SpecInner {
    p: u64,
    /// floor(2^64 / p), the Barrett constant for the characteristic.
    pm: u64,
    e: usize,
    q: u128,
    f_q: Vec<u64>,
    /// f_K = y² + c₁y + c₀ with c₀, c₁ ∈ F_q.
    fk_c0: Digits,
    fk_c1: Digits,
    /// Prime factorization of q² - 1.
    unit_factors: Vec<(u128, u32)>,
    zeta: Digits,
    epsilon: Digits,
    zeta1: Digits,
}

/// Shared, immutable description of one F_{q²} : F_q tower.
///
/// Cheap to clone; equality means "same field parameters".
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<SpecInner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.e == other.inner.e
                && self.inner.f_q == other.inner.f_q
                && self.inner.fk_c0 == other.inner.fk_c0
                && self.inner.fk_c1 == other.inner.fk_c1)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec(p={}, e={}, q={})", self.inner.p, self.inner.e, self.inner.q)
    }
}

/// Largest supported subfield size; keeps order factoring and the
/// discrete-log tables at desk scale.
pub const MAX_Q: u128 = 1 << 40;

impl FieldSpec {
    /// Deterministic construction from the characteristic and extension
    /// degree, q = p^e.
    pub fn new(p: u64, e: usize) -> Result<FieldSpec> {
        if !is_prime_u64(p) {
            return Err(Error::InvalidFieldSpec(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidFieldSpec("characteristic above 2^31".into()));
        }
        if e == 0 {
            return Err(Error::InvalidFieldSpec("extension degree must be positive".into()));
        }
        let mut q: u128 = 1;
        for _ in 0..e {
            q = q.saturating_mul(p as u128);
            if q > MAX_Q {
                return Err(Error::InvalidFieldSpec(format!("q = {p}^{e} exceeds 2^40")));
            }
        }
        let f_q = smallest_irreducible(p, e);
        let (fk_c0, fk_c1) = Self::smallest_quadratic(p, e, &f_q, q)?;
        Self::assemble(p, e, q, f_q, fk_c0, fk_c1)
    }

    /// Construction from explicit moduli (used when deserializing). The
    /// moduli are validated but not required to be the deterministic choice.
    pub fn with_moduli(p: u64, e: usize, f_q: Vec<u64>, fk_c0: Vec<u64>, fk_c1: Vec<u64>) -> Result<FieldSpec> {
        if !is_prime_u64(p) {
            return Err(Error::InvalidFieldSpec(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidFieldSpec("characteristic above 2^31".into()));
        }
        if f_q.len() != e + 1 || f_q[e] != 1 {
            return Err(Error::InvalidFieldSpec("f_q must be monic of degree e".into()));
        }
        if f_q.iter().any(|&c| c >= p) || fk_c0.len() != e || fk_c1.len() != e {
            return Err(Error::InvalidFieldSpec("coefficients out of range".into()));
        }
        if fk_c0.iter().chain(&fk_c1).any(|&c| c >= p) {
            return Err(Error::InvalidFieldSpec("coefficients out of range".into()));
        }
        let mut q: u128 = 1;
        for _ in 0..e {
            q = q.saturating_mul(p as u128);
            if q > MAX_Q {
                return Err(Error::InvalidFieldSpec(format!("q = {p}^{e} exceeds 2^40")));
            }
        }
        if !poly_irreducible(p, &f_q) {
            return Err(Error::InvalidFieldSpec("f_q is reducible".into()));
        }
        if !Self::quadratic_irreducible(p, e, &f_q, &fk_c0, &fk_c1, q) {
            return Err(Error::InvalidFieldSpec("f_K is reducible".into()));
        }
        Self::assemble(p, e, q, f_q, fk_c0.into_iter().collect(), fk_c1.into_iter().collect())
    }

    /// y² + c₁y + c₀ irreducible over F_q, without enumerating roots:
    /// discriminant test in odd characteristic, trace test in char 2.
    fn quadratic_irreducible(p: u64, e: usize, f_q: &[u64], c0: &[u64], c1: &[u64], q: u128) -> bool {
        let fq = Fq { p, pm: (((1u128) << 64) / p as u128) as u64, e, q, f_q };
        if p != 2 {
            // disc = c₁² - 4c₀ must be a nonsquare
            let four = fq.scale(&fq.one(), 4 % p);
            let disc = fq.sub(&fq.mul(c1, c1), &fq.mul(&four, c0));
            if fq.is_zero(&disc) {
                return false;
            }
            let s = fq.pow(&disc, (q - 1) / 2);
            s != fq.one()
        } else {
            if fq.is_zero(c1) {
                return false;
            }
            // Tr(c₀ / c₁²) over F_2 must be 1
            let c1sq_inv = fq.inv(&fq.mul(c1, c1));
            let z = fq.mul(c0, &c1sq_inv);
            let mut tr = fq.zero();
            let mut t = Digits::from_slice(&z);
            for _ in 0..e {
                tr = fq.add(&tr, &t);
                t = fq.mul(&t, &t);
            }
            tr == fq.one()
        }
    }

    fn smallest_quadratic(p: u64, e: usize, f_q: &[u64], q: u128) -> Result<(Digits, Digits)> {
        let fq = Fq { p, pm: (((1u128) << 64) / p as u128) as u64, e, q, f_q };
        let mut c0 = fq.zero();
        loop {
            let mut c1 = fq.zero();
            loop {
                if Self::quadratic_irreducible(p, e, f_q, &c0, &c1, q) {
                    return Ok((c0, c1));
                }
                if !digit_incr(&mut c1, p) {
                    break;
                }
            }
            if !digit_incr(&mut c0, p) {
                return Err(Error::InvalidFieldSpec("no irreducible quadratic found".into()));
            }
        }
    }

    fn assemble(p: u64, e: usize, q: u128, f_q: Vec<u64>, fk_c0: Digits, fk_c1: Digits) -> Result<FieldSpec> {
        let unit_factors = factorize(q * q - 1);
        let mut inner = SpecInner {
            p,
            pm: (((1u128) << 64) / p as u128) as u64,
            e,
            q,
            f_q,
            fk_c0,
            fk_c1,
            unit_factors,
            zeta: smallvec![0; 2 * e],
            epsilon: smallvec![0; 2 * e],
            zeta1: smallvec![0; 2 * e],
        };
        inner.zeta = find_primitive(&inner)
            .ok_or_else(|| Error::InvalidFieldSpec("no primitive element found".into()))?;
        // the two derived constants need element arithmetic, so bootstrap
        // through a provisional handle
        let provisional = FieldSpec { inner: Arc::new(inner) };
        let zeta = provisional.zeta();
        let eps = if p == 2 { provisional.one() } else { zeta.pow(q.div_ceil(2)) };
        let zeta1 = zeta.pow(q - 1);
        debug_assert!((&eps.conj() + &eps).is_zero() && !eps.is_zero());
        debug_assert!(zeta1.is_norm_one());
        let src = &provisional.inner;
        let inner = SpecInner {
            p: src.p,
            pm: src.pm,
            e: src.e,
            q: src.q,
            f_q: src.f_q.clone(),
            fk_c0: src.fk_c0.clone(),
            fk_c1: src.fk_c1.clone(),
            unit_factors: src.unit_factors.clone(),
            zeta: src.zeta.clone(),
            epsilon: eps.digits().iter().copied().collect(),
            zeta1: zeta1.digits().iter().copied().collect(),
        };
        Ok(FieldSpec { inner: Arc::new(inner) })
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn e(&self) -> usize {
        self.inner.e
    }

    /// q = p^e.
    pub fn q(&self) -> u128 {
        self.inner.q
    }

    /// Order of the unit group of F_{q²}.
    pub fn unit_order(&self) -> u128 {
        self.inner.q * self.inner.q - 1
    }

    pub(crate) fn unit_factors(&self) -> &[(u128, u32)] {
        &self.inner.unit_factors
    }

    pub fn f_q(&self) -> &[u64] {
        &self.inner.f_q
    }

    /// Coefficients (c₀, c₁) of f_K = y² + c₁y + c₀, each as F_q digits.
    pub fn f_k(&self) -> (&[u64], &[u64]) {
        (&self.inner.fk_c0, &self.inner.fk_c1)
    }

    fn fq(&self) -> Fq<'_> {
        Fq { p: self.inner.p, pm: self.inner.pm, e: self.inner.e, q: self.inner.q, f_q: &self.inner.f_q }
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { spec: self.clone(), digits: smallvec![0; 2 * self.inner.e] }
    }

    pub fn one(&self) -> FieldElem {
        let mut d: Digits = smallvec![0; 2 * self.inner.e];
        d[0] = 1 % self.inner.p;
        FieldElem { spec: self.clone(), digits: d }
    }

    /// Embeds a small integer (mod p) as a constant.
    pub fn int(&self, v: i64) -> FieldElem {
        let p = self.inner.p as i64;
        let r = v.rem_euclid(p) as u64;
        let mut d: Digits = smallvec![0; 2 * self.inner.e];
        d[0] = r;
        FieldElem { spec: self.clone(), digits: d }
    }

    /// Builds an element from its 2e base-p digits, low degree first.
    pub fn elem(&self, digits: &[u64]) -> Result<FieldElem> {
        if digits.len() != 2 * self.inner.e {
            return Err(Error::Serial(format!(
                "expected {} digits, got {}",
                2 * self.inner.e,
                digits.len()
            )));
        }
        if digits.iter().any(|&c| c >= self.inner.p) {
            return Err(Error::Serial("digit out of range".into()));
        }
        Ok(FieldElem { spec: self.clone(), digits: digits.iter().copied().collect() })
    }

    /// Generator of F_{q²} over F_q (the class of y).
    pub fn gen_k(&self) -> FieldElem {
        let mut d: Digits = smallvec![0; 2 * self.inner.e];
        d[self.inner.e] = 1;
        FieldElem { spec: self.clone(), digits: d }
    }

    /// Fixed primitive root of F_{q²}^×: the first element in canonical
    /// digit order with full multiplicative order.
    pub fn zeta(&self) -> FieldElem {
        FieldElem { spec: self.clone(), digits: self.inner.zeta.clone() }
    }

    /// Fixed ε with σ(ε) = -ε: ζ^{(q+1)/2} in odd characteristic, 1 in
    /// characteristic 2 (where the skew set degenerates to F_q).
    pub fn epsilon(&self) -> FieldElem {
        FieldElem { spec: self.clone(), digits: self.inner.epsilon.clone() }
    }

    /// ζ₁ = ζ^{q-1}, a generator of the norm-one subgroup of order q + 1.
    pub fn zeta1(&self) -> FieldElem {
        FieldElem { spec: self.clone(), digits: self.inner.zeta1.clone() }
    }

    pub fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        let digits: Digits = (0..2 * self.inner.e).map(|_| rng.gen_range(0..self.inner.p)).collect();
        FieldElem { spec: self.clone(), digits }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        loop {
            let x = self.random_elem(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    /// Uniform element of the subfield F_q.
    pub fn random_base<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        let mut digits: Digits = smallvec![0; 2 * self.inner.e];
        for d in digits.iter_mut().take(self.inner.e) {
            *d = rng.gen_range(0..self.inner.p);
        }
        FieldElem { spec: self.clone(), digits }
    }

    /// Uniform skew element (σ(s) = -s), via the parametrization ε·F_q.
    pub fn random_skew<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        &self.epsilon() * &self.random_base(rng)
    }

    pub fn random_skew_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        loop {
            let s = self.random_skew(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// All q² elements in canonical digit order. Intended for desk-scale
    /// exhaustive checks; refuses absurd sizes.
    pub fn all_elements(&self) -> Vec<FieldElem> {
        let total = self.inner.q * self.inner.q;
        assert!(total <= 1 << 22, "enumeration is for small fields only");
        let mut out = Vec::with_capacity(total as usize);
        let mut digits: Digits = smallvec![0; 2 * self.inner.e];
        loop {
            out.push(FieldElem { spec: self.clone(), digits: digits.clone() });
            if !digit_incr(&mut digits, self.inner.p) {
                return out;
            }
        }
    }

    /// F_p-basis of F_{q²}: x^a, then y·x^a, matching digit positions.
    pub fn k_basis(&self) -> Vec<FieldElem> {
        (0..2 * self.inner.e)
            .map(|i| {
                let mut d: Digits = smallvec![0; 2 * self.inner.e];
                d[i] = 1 % self.inner.p;
                FieldElem { spec: self.clone(), digits: d }
            })
            .collect()
    }

    /// F_p-basis ε·x^a of the skew elements.
    pub fn skew_basis(&self) -> Vec<FieldElem> {
        let eps = self.epsilon();
        (0..self.inner.e)
            .map(|i| {
                let mut d: Digits = smallvec![0; 2 * self.inner.e];
                d[i] = 1 % self.inner.p;
                &eps * &FieldElem { spec: self.clone(), digits: d }
            })
            .collect()
    }
}

/// Canonical-order odometer: increments the digit vector with the last
/// digit cycling fastest; false on wraparound.
fn digit_incr(d: &mut [u64], p: u64) -> bool {
    for i in (0..d.len()).rev() {
        d[i] += 1;
        if d[i] < p {
            return true;
        }
        d[i] = 0;
    }
    false
}

fn find_primitive(inner: &SpecInner) -> Option<Digits> {
    let spec = FieldSpec { inner: Arc::new(SpecInner { zeta: smallvec![], epsilon: smallvec![], zeta1: smallvec![], unit_factors: inner.unit_factors.clone(), f_q: inner.f_q.clone(), fk_c0: inner.fk_c0.clone(), fk_c1: inner.fk_c1.clone(), p: inner.p, pm: inner.pm, e: inner.e, q: inner.q }) };
    let n = inner.q * inner.q - 1;
    let mut digits: Digits = smallvec![0; 2 * inner.e];
    loop {
        if digits.iter().any(|&c| c != 0) {
            let x = FieldElem { spec: spec.clone(), digits: digits.clone() };
            if inner.unit_factors.iter().all(|&(r, _)| !x.pow(n / r).is_one()) {
                return Some(digits);
            }
        }
        if !digit_incr(&mut digits, inner.p) {
            return None;
        }
    }
}

// ---------------------------------------------------------------------------
// Multiplication counter: one tick per F_{q²} multiplication, kept in a
// thread-local so parallel benches do not contend.
// ---------------------------------------------------------------------------

thread_local! {
    static MULT_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Resets the per-thread multiplication counter.
pub fn reset_mult_count() {
    MULT_COUNT.with(|c| c.set(0));
}

/// Number of F_{q²} multiplications on this thread since the last reset.
pub fn mult_count() -> u64 {
    MULT_COUNT.with(|c| c.get())
}

#[inline]
fn tick() {
    MULT_COUNT.with(|c| c.set(c.get() + 1));
}

#[inline]
fn tick_n(n: u64) {
    MULT_COUNT.with(|c| c.set(c.get() + n));
}

// ---------------------------------------------------------------------------
// FieldElem
// ---------------------------------------------------------------------------

/// Element of F_{q²} in canonical reduced digit form.
#[derive(Clone)]
pub struct FieldElem {
    spec: FieldSpec,
    digits: Digits,
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(self.spec == other.spec, "comparing elements of different fields");
        self.digits == other.digits
    }
}

impl Eq for FieldElem {}

impl std::hash::Hash for FieldElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.digits.hash(state);
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.digits.as_slice())
    }
}

impl FieldElem {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Base-p digits, low degree first, length 2e. This is the wire format.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    fn lo(&self) -> &[u64] {
        &self.digits[..self.spec.inner.e]
    }

    fn hi(&self) -> &[u64] {
        &self.digits[self.spec.inner.e..]
    }

    fn from_parts(spec: &FieldSpec, lo: &[u64], hi: &[u64]) -> FieldElem {
        let mut digits: Digits = Digits::with_capacity(2 * spec.inner.e);
        digits.extend_from_slice(lo);
        digits.extend_from_slice(hi);
        FieldElem { spec: spec.clone(), digits }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&c| c == 0)
    }

    pub fn set_zero(&mut self) {
        self.digits.fill(0);
    }

    pub fn is_one(&self) -> bool {
        self == &self.spec.one()
    }

    /// True when the element lies in the subfield F_q.
    pub fn is_base(&self) -> bool {
        self.hi().iter().all(|&c| c == 0)
    }

    /// The involution σ: x ↦ x^q. Fixes F_q pointwise; applying it twice is
    /// the identity. On the generator, σ(y) = -c₁ - y.
    pub fn conj(&self) -> FieldElem {
        let fq = self.spec.fq();
        let a = self.lo();
        let b = self.hi();
        let lo = fq.sub(a, &fq.mul(b, &self.spec.inner.fk_c1));
        let hi = fq.neg(b);
        FieldElem::from_parts(&self.spec, &lo, &hi)
    }

    /// Membership in the skew set: σ(x) = -x.
    pub fn is_skew(&self) -> bool {
        (&self.conj() + self).is_zero()
    }

    /// Membership in the norm-one set: x·σ(x) = 1.
    pub fn is_norm_one(&self) -> bool {
        (self * &self.conj()).is_one()
    }

    /// The norm x·σ(x), always an element of F_q.
    pub fn norm(&self) -> FieldElem {
        let n = self * &self.conj();
        debug_assert!(n.is_base());
        n
    }

    pub fn inverse(&self) -> Option<FieldElem> {
        if self.is_zero() {
            return None;
        }
        let fq = self.spec.fq();
        let n = self.norm();
        let n_inv = fq.inv(n.lo());
        let conj = self.conj();
        let lo = fq.mul(conj.lo(), &n_inv);
        let hi = fq.mul(conj.hi(), &n_inv);
        tick();
        Some(FieldElem::from_parts(&self.spec, &lo, &hi))
    }

    /// self += a·b without allocating; counts one multiplication. This is
    /// the inner kernel of every matrix product and sparse row update.
    pub fn add_mul(&mut self, a: &FieldElem, b: &FieldElem) {
        tick();
        self.add_mul_unticked(a, b);
    }

    #[inline]
    fn add_mul_unticked(&mut self, a: &FieldElem, b: &FieldElem) {
        debug_assert!(self.spec == a.spec && a.spec == b.spec);
        let inner = &*self.spec.inner;
        let p = inner.p;
        if inner.e == 1 {
            let pm = inner.pm;
            let (a0, a1) = (a.digits[0], a.digits[1]);
            let (b0, b1) = (b.digits[0], b.digits[1]);
            let t00 = fp_mul_fast(p, pm, a0, b0);
            let t11 = fp_mul_fast(p, pm, a1, b1);
            let cross = fp_add(p, fp_mul_fast(p, pm, a0, b1), fp_mul_fast(p, pm, a1, b0));
            let lo = fp_sub(p, t00, fp_mul_fast(p, pm, t11, inner.fk_c0[0]));
            let hi = fp_sub(p, cross, fp_mul_fast(p, pm, t11, inner.fk_c1[0]));
            self.digits[0] = fp_add(p, self.digits[0], lo);
            self.digits[1] = fp_add(p, self.digits[1], hi);
            return;
        }
        let fq = self.spec.fq();
        let e = inner.e;
        let t00 = fq.mul(a.lo(), b.lo());
        let t11 = fq.mul(a.hi(), b.hi());
        let cross = fq.add(&fq.mul(a.lo(), b.hi()), &fq.mul(a.hi(), b.lo()));
        let lo = fq.sub(&t00, &fq.mul(&t11, &inner.fk_c0));
        let hi = fq.sub(&cross, &fq.mul(&t11, &inner.fk_c1));
        for i in 0..e {
            self.digits[i] = fp_add(p, self.digits[i], lo[i]);
            self.digits[e + i] = fp_add(p, self.digits[e + i], hi[i]);
        }
    }

    /// self *= c in place; counts one multiplication.
    pub fn mul_assign_by(&mut self, c: &FieldElem) {
        let prod = &*self * c;
        self.digits = prod.digits;
    }

    /// `dst[j] += a · src[j]` across whole rows, with the field context
    /// hoisted out of the loop; counts len multiplications.
    pub fn row_mul_acc(a: &FieldElem, src: &[FieldElem], dst: &mut [FieldElem]) {
        debug_assert_eq!(src.len(), dst.len());
        tick_n(src.len() as u64);
        let inner = &*a.spec.inner;
        if inner.e == 1 {
            let p = inner.p;
            let pm = inner.pm;
            let c0 = inner.fk_c0[0];
            let c1 = inner.fk_c1[0];
            let (a0, a1) = (a.digits[0], a.digits[1]);
            for (d_e, s_e) in dst.iter_mut().zip(src) {
                let (b0, b1) = (s_e.digits[0], s_e.digits[1]);
                let t00 = fp_mul_fast(p, pm, a0, b0);
                let t11 = fp_mul_fast(p, pm, a1, b1);
                let cross = fp_add(p, fp_mul_fast(p, pm, a0, b1), fp_mul_fast(p, pm, a1, b0));
                let lo = fp_sub(p, t00, fp_mul_fast(p, pm, t11, c0));
                let hi = fp_sub(p, cross, fp_mul_fast(p, pm, t11, c1));
                d_e.digits[0] = fp_add(p, d_e.digits[0], lo);
                d_e.digits[1] = fp_add(p, d_e.digits[1], hi);
            }
            return;
        }
        for (d_e, s_e) in dst.iter_mut().zip(src) {
            d_e.add_mul_unticked(a, s_e);
        }
    }

    pub fn pow(&self, mut k: u128) -> FieldElem {
        let mut acc = self.spec.one();
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        acc
    }

    /// x^k for signed k, with negative exponents through the inverse; the
    /// exponent is reduced modulo the unit-group order first.
    pub fn pow_signed(&self, k: i64) -> FieldElem {
        let n = self.spec.unit_order() as i128;
        let r = (k as i128).rem_euclid(n) as u128;
        self.pow(r)
    }
}

impl std::ops::Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: &FieldElem) -> FieldElem {
        debug_assert!(self.spec == rhs.spec);
        let p = self.spec.inner.p;
        let digits = self.digits.iter().zip(&rhs.digits).map(|(&a, &b)| fp_add(p, a, b)).collect();
        FieldElem { spec: self.spec.clone(), digits }
    }
}

impl std::ops::Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: &FieldElem) -> FieldElem {
        debug_assert!(self.spec == rhs.spec);
        let p = self.spec.inner.p;
        let digits = self.digits.iter().zip(&rhs.digits).map(|(&a, &b)| fp_sub(p, a, b)).collect();
        FieldElem { spec: self.spec.clone(), digits }
    }
}

impl std::ops::Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        let p = self.spec.inner.p;
        let digits = self.digits.iter().map(|&a| fp_neg(p, a)).collect();
        FieldElem { spec: self.spec.clone(), digits }
    }
}

impl std::ops::Mul for &FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: &FieldElem) -> FieldElem {
        debug_assert!(self.spec == rhs.spec);
        tick();
        let inner = &*self.spec.inner;
        if inner.e == 1 {
            let p = inner.p;
            let pm = inner.pm;
            let (a0, a1) = (self.digits[0], self.digits[1]);
            let (b0, b1) = (rhs.digits[0], rhs.digits[1]);
            let t00 = fp_mul_fast(p, pm, a0, b0);
            let t11 = fp_mul_fast(p, pm, a1, b1);
            let cross = fp_add(p, fp_mul_fast(p, pm, a0, b1), fp_mul_fast(p, pm, a1, b0));
            let lo = fp_sub(p, t00, fp_mul_fast(p, pm, t11, inner.fk_c0[0]));
            let hi = fp_sub(p, cross, fp_mul_fast(p, pm, t11, inner.fk_c1[0]));
            return FieldElem { spec: self.spec.clone(), digits: smallvec![lo, hi] };
        }
        let fq = self.spec.fq();
        let (a0, a1) = (self.lo(), self.hi());
        let (b0, b1) = (rhs.lo(), rhs.hi());
        // (a0 + a1 y)(b0 + b1 y) with y² = -c₁y - c₀
        let t00 = fq.mul(a0, b0);
        let t11 = fq.mul(a1, b1);
        let cross = fq.add(&fq.mul(a0, b1), &fq.mul(a1, b0));
        let lo = fq.sub(&t00, &fq.mul(&t11, &inner.fk_c0));
        let hi = fq.sub(&cross, &fq.mul(&t11, &inner.fk_c1));
        FieldElem::from_parts(&self.spec, &lo, &hi)
    }
}

// ---------------------------------------------------------------------------
// Orders and discrete logarithms
// ---------------------------------------------------------------------------

/// Multiplicative order of a nonzero element.
pub fn mult_order(x: &FieldElem) -> u128 {
    assert!(!x.is_zero());
    let mut n = x.spec().unit_order();
    for &(r, m) in x.spec().unit_factors() {
        for _ in 0..m {
            if n.is_multiple_of(r) && x.pow(n / r).is_one() {
                n /= r;
            } else {
                break;
            }
        }
    }
    n
}

/// Least k ≥ 0 with base^k = target, by baby-step giant-step over the
/// subgroup generated by `base`. O(√n) multiplications and table space,
/// where n is the order of the base; n above 2^40 is refused.
pub fn discrete_log(base: &FieldElem, target: &FieldElem) -> Result<u64> {
    if base.is_zero() || target.is_zero() {
        return Err(Error::TargetNotInSubgroup);
    }
    let n = mult_order(base);
    if n > 1 << 40 {
        return Err(Error::DiscreteLogRangeExceeded(n));
    }
    let m = (n as f64).sqrt().ceil() as u128;
    let m = m.max(1);
    let mut table: HashMap<Digits, u64> = HashMap::with_capacity(m as usize);
    let mut cur = base.spec().one();
    for j in 0..m {
        table.entry(cur.digits.clone()).or_insert(j as u64);
        cur = &cur * base;
    }
    // cur == base^m
    let hop = cur.inverse().expect("nonzero");
    let mut gamma = target.clone();
    for i in 0..=m {
        if let Some(&j) = table.get(&gamma.digits) {
            let k = i as u64 * m as u64 + j;
            // guard against targets outside the subgroup that happen to
            // collide after wrapping
            if base.pow(k as u128) == *target {
                return Ok(k);
            }
        }
        gamma = &gamma * &hop;
    }
    Err(Error::TargetNotInSubgroup)
}

/// Finds t with t·σ(t) = v for v ∈ F_q, using that the norm map is onto:
/// the norm of ζ generates F_q^×.
pub fn solve_norm(spec: &FieldSpec, v: &FieldElem) -> Result<FieldElem> {
    if !v.is_base() {
        return Err(Error::TargetNotInSubgroup);
    }
    if v.is_zero() {
        return Ok(spec.zero());
    }
    let eta = spec.zeta().norm();
    let k = discrete_log(&eta, v)?;
    Ok(spec.zeta().pow(k as u128))
}

// ---------------------------------------------------------------------------
