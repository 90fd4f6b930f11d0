//! Sampling substrate: polynomial k-wise independent hashing over a prime
//! field, the min-wise permutation family built from it, streaming
//! min-samplers, and distinct-element counters.
//!
//! A permutation of `[n]` is never materialised. Two elements are compared
//! through the pair `(h(x), x)` in lexicographic order, which is the order
//! the permutation induces.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default oversampling constant for the hash range (`m >= c1 * n / eps`).
pub const DEFAULT_C1: f64 = 8.0;
/// Default independence constant (`t = ceil(c2 * log2(1/eps))`).
pub const DEFAULT_C2: f64 = 4.0;

/// Largest prime modulus accepted; products are formed in 128 bits.
const MAX_PRIME: u64 = 1 << 63;

/// Deterministic generator used for every random choice.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream tag and an index into an independent
/// child seed (splitmix64 finaliser).
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

pub fn next_prime(from: u64) -> u64 {
    let mut c = from.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Parameters shared by every permutation of one family `H(n, eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    /// Universe size; elements are `1..=n`.
    pub n: u64,
    pub eps: f64,
    /// Minimum hash range `ceil(c1 * n / eps)`.
    pub m: u64,
    /// Prime modulus, the smallest prime `>= m`.
    pub p: u64,
    /// Independence degree (number of polynomial coefficients).
    pub t: usize,
    /// Terms that can be summed in 128 bits before a reduction is needed.
    lazy_terms: usize,
    /// Same for a 64-bit accumulator; 0 when one product may not fit.
    lazy_terms64: usize,
}

impl FamilyParams {
    pub fn new(n: u64, eps: f64) -> Result<Self> {
        Self::with_constants(n, eps, DEFAULT_C1, DEFAULT_C2)
    }

    pub fn with_constants(n: u64, eps: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::param("eps", format!("must lie in (0, 1/2), got {eps}")));
        }
        if !(1..=(1 << 62)).contains(&n) {
            return Err(Error::param("n", format!("must lie in [1, 2^62], got {n}")));
        }
        if !(c1 >= 1.0 && c2 >= 1.0) {
            return Err(Error::param("c1/c2", "constants must be at least 1"));
        }
        let m = ceil_tol(c1 * n as f64 / eps);
        if !(m.is_finite() && m < MAX_PRIME as f64) {
            return Err(Error::param("n", "hash range exceeds 2^63"));
        }
        let m = m as u64;
        let p = next_prime(m);
        if p >= MAX_PRIME {
            return Err(Error::param("n", "prime modulus exceeds 2^63"));
        }
        let t = (ceil_tol(c2 * (1.0 / eps).log2()) as usize).max(2);
        let sq = (p as u128 - 1) * (p as u128 - 1);
        let lazy_terms = ((u128::MAX / sq.max(1)) as usize).clamp(1, 1 << 20);
        let lazy_terms64 = ((u64::MAX as u128 / sq.max(1)) as usize).min(1 << 20);
        Ok(Self {
            n,
            eps,
            m,
            p,
            t,
            lazy_terms,
            lazy_terms64,
        })
    }

    /// Draws one member of the family.
    pub fn draw(self: &Arc<Self>, rng: &mut impl Rng) -> MinWisePermutation {
        MinWisePermutation {
            hash: KWiseHash::random(self.p, self.t, rng),
            family: Arc::clone(self),
        }
    }

    /// Powers `x^0, ..., x^(t-1)` mod p, shared by all members of the family.
    pub fn powers(&self, x: u64) -> Powers {
        let mut v = Vec::with_capacity(self.t);
        let xr = x % self.p;
        let mut acc = 1 % self.p;
        for _ in 0..self.t {
            v.push(acc);
            acc = mul_mod(acc, xr, self.p);
        }
        Powers { x, pw: v }
    }
}

/// `ceil(x)` that ignores floating-point noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `family_new`: parameters for `H(n, eps)` with the default constants.
/// Randomness enters only when members are drawn; `seed` seeds the returned
/// generator so callers can draw reproducibly.
pub fn family_new(n: u64, eps: f64, seed: u64) -> Result<(Arc<FamilyParams>, SeededRng)> {
    Ok((Arc::new(FamilyParams::new(n, eps)?), rng_from_seed(seed)))
}

/// Precomputed powers of one element.
#[derive(Debug, Clone)]
pub struct Powers {
    x: u64,
    pw: Vec<u64>,
}

impl Powers {
    pub fn element(&self) -> u64 {
        self.x
    }
}

/// `x -> sum c_i x^i mod p` with `t` uniformly drawn coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWiseHash {
    p: u64,
    coeffs: Vec<u64>,
}

impl KWiseHash {
    pub fn random(p: u64, t: usize, rng: &mut impl Rng) -> Self {
        assert!((2..MAX_PRIME).contains(&p));
        let coeffs = (0..t).map(|_| rng.gen_range(0..p)).collect();
        Self { p, coeffs }
    }

    pub fn from_coefficients(p: u64, coeffs: Vec<u64>) -> Self {
        assert!((2..MAX_PRIME).contains(&p));
        let coeffs = coeffs.into_iter().map(|c| c % p).collect();
        Self { p, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u64) -> u64 {
        let xr = x % self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| (mul_mod(acc, xr, self.p) + c) % self.p)
    }

    #[inline]
    fn eval_powers(&self, pw: &[u64], lazy_terms: usize, lazy_terms64: usize) -> u64 {
        dot_mod(&self.coeffs, pw, self.p, lazy_terms, lazy_terms64)
    }
}

/// `sum c_i * x_i mod p` for residues, reducing only when the accumulator
/// could overflow. `lazy64 == 0` selects the 128-bit accumulator.
#[inline]
fn dot_mod(coeffs: &[u64], pw: &[u64], p: u64, lazy: usize, lazy64: usize) -> u64 {
    debug_assert_eq!(pw.len(), coeffs.len());
    if lazy64 >= coeffs.len() {
        let mut acc = 0u64;
        for (&c, &x) in coeffs.iter().zip(pw) {
            acc += c * x;
        }
        return acc % p;
    }
    if lazy64 > 0 {
        let mut acc = 0u64;
        for (cs, ps) in coeffs.chunks(lazy64).zip(pw.chunks(lazy64)) {
            let mut part = 0u64;
            for (&c, &x) in cs.iter().zip(ps) {
                part += c * x;
            }
            acc = (acc + part % p) % p;
        }
        return acc;
    }
    let pp = p as u128;
    let mut acc: u128 = 0;
    for (cs, ps) in coeffs.chunks(lazy).zip(pw.chunks(lazy)) {
        for (&c, &x) in cs.iter().zip(ps) {
            acc += c as u128 * x as u128;
        }
        acc %= pp;
    }
    acc as u64
}

/// Comparison key of an element: `(h(x), x)`.
pub type PermKey = (u64, u64);

/// One member of the min-wise family: a hash inducing a total order on `[n]`.
#[derive(Debug, Clone)]
pub struct MinWisePermutation {
    family: Arc<FamilyParams>,
    hash: KWiseHash,
}

impl MinWisePermutation {
    pub fn family(&self) -> &Arc<FamilyParams> {
        &self.family
    }

    pub fn hash(&self) -> &KWiseHash {
        &self.hash
    }

    #[inline]
    pub fn key(&self, x: u64) -> PermKey {
        (self.hash.eval(x), x)
    }

    #[inline]
    pub fn key_from_powers(&self, pw: &Powers) -> PermKey {
        let f = &self.family;
        (self.hash.eval_powers(&pw.pw, f.lazy_terms, f.lazy_terms64), pw.x)
    }

    /// True iff `x` precedes `y` in the induced order.
    #[inline]
    pub fn less(&self, x: u64, y: u64) -> bool {
        self.key(x) < self.key(y)
    }
}

/// Many members of one family with their coefficients stored back to back.
/// Member `i` is the `i`-th of successive [`FamilyParams::draw`] calls on
/// the same generator.
#[derive(Debug, Clone)]
pub struct PermutationBank {
    family: Arc<FamilyParams>,
    coeffs: Vec<u64>,
}

impl PermutationBank {
    pub fn draw(family: &Arc<FamilyParams>, count: usize, rng: &mut impl Rng) -> Self {
        let p = family.p;
        let coeffs = (0..count * family.t).map(|_| rng.gen_range(0..p)).collect();
        Self {
            family: Arc::clone(family),
            coeffs,
        }
    }

    pub fn family(&self) -> &Arc<FamilyParams> {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() / self.family.t
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Member `i` as a standalone permutation.
    pub fn member(&self, i: usize) -> MinWisePermutation {
        let t = self.family.t;
        MinWisePermutation {
            family: Arc::clone(&self.family),
            hash: KWiseHash {
                p: self.family.p,
                coeffs: self.coeffs[i * t..(i + 1) * t].to_vec(),
            },
        }
    }

    /// Keys of one element under every member, in member order.
    pub fn keys<'a>(&'a self, pw: &'a Powers) -> impl Iterator<Item = PermKey> + 'a {
        let f = &*self.family;
        self.coeffs
            .chunks_exact(f.t)
            .map(move |cs| (dot_mod(cs, &pw.pw, f.p, f.lazy_terms, f.lazy_terms64), pw.x))
    }
}

/// `perm_less` in free-function form.
pub fn perm_less(h: &MinWisePermutation, x: u64, y: u64) -> bool {
    h.less(x, y)
}

/// Tracks the order-minimum of all observed elements.
#[derive(Debug, Clone)]
pub struct MinSampler {
    perm: MinWisePermutation,
    winner: Option<PermKey>,
}

impl MinSampler {
    pub fn new(perm: MinWisePermutation) -> Self {
        Self { perm, winner: None }
    }

    pub fn perm(&self) -> &MinWisePermutation {
        &self.perm
    }

    pub fn winner(&self) -> Option<u64> {
        self.winner.map(|(_, x)| x)
    }

    /// Observes `x`; returns true if it became the new winner.
    pub fn observe(&mut self, x: u64) -> bool {
        let k = self.perm.key(x);
        self.offer(k)
    }

    pub fn observe_powers(&mut self, pw: &Powers) -> bool {
        let k = self.perm.key_from_powers(pw);
        self.offer(k)
    }

    #[inline]
    fn offer(&mut self, k: PermKey) -> bool {
        match self.winner {
            Some(w) if w <= k => false,
            _ => {
                self.winner = Some(k);
                true
            }
        }
    }

    pub fn reset(&mut self) {
        self.winner = None;
    }
}

/// Streaming count of distinct ids.
pub trait DistinctCounter: Send {
    fn insert(&mut self, id: u64);
    fn estimate(&self) -> f64;
    /// Stored ids, as a space measure.
    fn memory_units(&self) -> usize;
}

/// Exact counter backed by a set of the observed ids.
#[derive(Debug, Clone, Default)]
pub struct ExactDistinct {
    seen: HashSet<u64>,
}

impl ExactDistinct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.seen.len()
    }
}

impl DistinctCounter for ExactDistinct {
    fn insert(&mut self, id: u64) {
        self.seen.insert(id);
    }

    fn estimate(&self) -> f64 {
        self.seen.len() as f64
    }

    fn memory_units(&self) -> usize {
        self.seen.len()
    }
}

/// Bottom-k ("k minimum values") sketch over one min-wise permutation.
#[derive(Debug, Clone)]
pub struct KmvDistinct {
    k: usize,
    perm: MinWisePermutation,
    mins: BTreeSet<PermKey>,
    saturated: bool,
}

/// Family accuracy used for the KMV hash.
const KMV_FAMILY_EPS: f64 = 0.1;

impl KmvDistinct {
    /// Sketch keeping `k >= 2` minima over ids `1..=universe`.
    pub fn new(k: usize, universe: u64, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k_kmv", "must be at least 2"));
        }
        let family = Arc::new(FamilyParams::new(universe, KMV_FAMILY_EPS)?);
        let perm = family.draw(&mut rng_from_seed(seed));
        Ok(Self {
            k,
            perm,
            mins: BTreeSet::new(),
            saturated: false,
        })
    }

    /// Size `ceil(96 / eps^2)`, targeting relative error `eps`.
    pub fn k_for_accuracy(eps: f64) -> usize {
        (ceil_tol(96.0 / (eps * eps)) as usize).max(2)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }
}

impl DistinctCounter for KmvDistinct {
    fn insert(&mut self, id: u64) {
        let key = self.perm.key(id);
        if self.mins.contains(&key) {
            return;
        }
        if self.mins.len() < self.k {
            self.mins.insert(key);
            return;
        }
        self.saturated = true;
        let max = *self.mins.iter().next_back().expect("k >= 2");
        if key < max {
            self.mins.remove(&max);
            self.mins.insert(key);
        }
    }

    fn estimate(&self) -> f64 {
        if !self.saturated {
            return self.mins.len() as f64;
        }
        let kth = self.mins.iter().next_back().expect("saturated sketch is full").0;
        let p = self.perm.family().p as f64;
        (self.k as f64 - 1.0) * p / (kth.max(1) as f64)
    }

    fn memory_units(&self) -> usize {
        self.mins.len()
    }
}

/// Which distinct counter an estimator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterKind {
    Exact,
    Kmv,
}

impl std::str::FromStr for CounterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CounterKind::Exact),
            "kmv" => Ok(CounterKind::Kmv),
            other => Err(Error::param("counter", format!("expected exact|kmv, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for CounterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CounterKind::Exact => "exact",
            CounterKind::Kmv => "kmv",
        })
    }
}

/// Builds a counter of the requested kind for ids in `1..=universe`.
/// `eps` sizes the KMV sketch.
pub fn make_counter(
    kind: CounterKind,
    universe: u64,
    eps: f64,
    seed: u64,
) -> Result<Box<dyn DistinctCounter>> {
    Ok(match kind {
        CounterKind::Exact => Box::new(ExactDistinct::new()),
        CounterKind::Kmv => Box::new(KmvDistinct::new(
            KmvDistinct::k_for_accuracy(eps),
            universe,
            seed,
        )?),
    })
}
