//! Finite fields F_{p^e} for odd p.
//!
//! An element is stored as its *canonical label*: the coefficients
//! c_0, ..., c_{e-1} of its residue modulo the defining polynomial, packed
//! as the integer c_0 + c_1 p + ... + c_{e-1} p^{e-1}. Labels are plain
//! `u64` data, so vectors of elements are cheap to copy and hash, and the
//! label order is the lexicographic order used by every enumeration in the
//! crate.
//!
//! Extensions of F_q = F_{p^e} are not built relative to F_q. Instead
//! F_{q^m} is a fresh single-step extension of degree e·m over F_p and a
//! root of F_q's modulus inside it fixes the embedding (see [`extension`]).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{invariant, Error, Result};
use crate::rng::{self, Domain};

/// Shared handle to an immutable field description.
pub type Field = Arc<FieldSpec>;

/// Largest extension degree representable with Q < 2^63 and p >= 3.
const MAX_E: usize = 40;

/// A field element: canonical label plus a fingerprint of the owning field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    label: u64,
    tag: u32,
}

impl FieldElement {
    /// The canonical integer label of the element.
    #[inline]
    pub fn label(self) -> u64 {
        self.label
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.label)
    }
}

/// Description of F_{p^e}: characteristic, degree and defining polynomial.
pub struct FieldSpec {
    p: u64,
    e: usize,
    /// Monic modulus, low coefficient first, length e+1. Empty for e = 1.
    modulus: Vec<u64>,
    order: u64,
    /// p^i for i = 0..=e.
    pows: Vec<u64>,
    tag: u32,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{} mod {:?}", self.p, self.e, self.modulus)
        }
    }
}

fn fingerprint(p: u64, modulus: &[u64]) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for w in std::iter::once(p).chain(modulus.iter().copied()) {
        for b in w.to_le_bytes() {
            h ^= b as u32;
            h = h.wrapping_mul(0x0100_0193);
        }
    }
    h
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut n: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while n > 0 {
        if n & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        n >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division. Fine for the sizes used here.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldSpec {
    fn build(p: u64, modulus: Vec<u64>) -> Result<FieldSpec> {
        let e = if modulus.is_empty() { 1 } else { modulus.len() - 1 };
        let mut pows = Vec::with_capacity(e + 1);
        let mut acc: u64 = 1;
        pows.push(1);
        for _ in 0..e {
            acc = acc
                .checked_mul(p)
                .filter(|&v| v < (1u64 << 63))
                .ok_or(Error::FieldTooLarge { p, e })?;
            pows.push(acc);
        }
        Ok(FieldSpec { p, e, tag: fingerprint(p, &modulus), modulus, order: acc, pows })
    }

    /// The prime field F_p.
    pub fn prime(p: u64) -> Result<Field> {
        if p % 2 == 0 || !is_prime_u64(p) {
            return Err(Error::BadCharacteristic(p));
        }
        Ok(Arc::new(Self::build(p, Vec::new())?))
    }

    /// F_p[x]/(f) for an explicit monic `f` given low coefficient first.
    ///
    /// The modulus is checked for irreducibility.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Field> {
        let fp = Self::prime(p)?;
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::Invalid(format!("modulus {modulus:?} is not a reduced monic polynomial")));
        }
        if modulus.len() == 2 {
            return Ok(fp);
        }
        if modulus.len() - 1 > MAX_E {
            return Err(Error::FieldTooLarge { p, e: modulus.len() - 1 });
        }
        let f = crate::poly::MonicPoly::from_labels(&fp, &modulus[..modulus.len() - 1])?;
        if !f.is_irreducible() {
            return Err(Error::ReducibleModulus(p));
        }
        Ok(Arc::new(Self::build(p, modulus.to_vec())?))
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }
    #[inline]
    pub fn degree(&self) -> usize {
        self.e
    }
    /// Q = p^e.
    #[inline]
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.order)
    }
    /// The defining polynomial, low coefficient first (empty for prime fields).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    #[inline]
    fn elem(&self, label: u64) -> FieldElement {
        FieldElement { label, tag: self.tag }
    }

    /// Panics on an element of another field: mixing fields is a programming error.
    #[inline]
    fn own(&self, a: FieldElement) {
        assert!(a.tag == self.tag && a.label < self.order, "mixed-field operands: {a:?} is not in {self:?}");
    }

    pub fn owns(&self, a: FieldElement) -> bool {
        a.tag == self.tag && a.label < self.order
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }
    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// The element with the given canonical label.
    pub fn element(&self, label: u64) -> Result<FieldElement> {
        if label >= self.order {
            return Err(Error::BadLabel { label, order: self.order });
        }
        Ok(self.elem(label))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.elem(n.rem_euclid(self.p as i64) as u64)
    }

    /// Element with the given F_p coordinates (low first); reduced mod p.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.e {
            return Err(Error::Invalid(format!("{} coordinates for a degree-{} field", coeffs.len(), self.e)));
        }
        let label = coeffs.iter().enumerate().map(|(i, &c)| (c % self.p) * self.pows[i]).sum();
        Ok(self.elem(label))
    }

    /// F_p coordinates of `a`, low first, length e.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        self.own(a);
        let mut buf = [0u64; MAX_E];
        self.unpack(a.label, &mut buf);
        buf[..self.e].to_vec()
    }

    #[inline]
    fn unpack(&self, mut label: u64, out: &mut [u64; MAX_E]) {
        for slot in out.iter_mut().take(self.e) {
            *slot = label % self.p;
            label /= self.p;
        }
    }

    #[inline]
    fn pack(&self, c: &[u64]) -> u64 {
        let mut label = 0;
        for i in (0..self.e).rev() {
            label = label * self.p + c[i];
        }
        label
    }

    /// Iterator over all elements in label order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order).map(move |l| self.elem(l))
    }

    pub fn is_zero(&self, a: FieldElement) -> bool {
        self.own(a);
        a.label == 0
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.own(a);
        self.own(b);
        if self.e == 1 {
            let s = a.label + b.label;
            return self.elem(if s >= self.p { s - self.p } else { s });
        }
        let (mut x, mut y) = (a.label, b.label);
        let mut label = 0;
        for i in 0..self.e {
            let s = (x % self.p + y % self.p) % self.p;
            label += s * self.pows[i];
            x /= self.p;
            y /= self.p;
        }
        self.elem(label)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.own(a);
        if self.e == 1 {
            return self.elem(if a.label == 0 { 0 } else { self.p - a.label });
        }
        let mut x = a.label;
        let mut label = 0;
        for i in 0..self.e {
            let c = x % self.p;
            label += ((self.p - c) % self.p) * self.pows[i];
            x /= self.p;
        }
        self.elem(label)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.own(a);
        self.own(b);
        if self.e == 1 {
            return self.elem(mulmod(a.label, b.label, self.p));
        }
        let p = self.p;
        let e = self.e;
        let mut x = [0u64; MAX_E];
        let mut y = [0u64; MAX_E];
        self.unpack(a.label, &mut x);
        self.unpack(b.label, &mut y);
        let mut wide = [0u128; 2 * MAX_E];
        for i in 0..e {
            if x[i] == 0 {
                continue;
            }
            for j in 0..e {
                wide[i + j] += x[i] as u128 * y[j] as u128;
            }
        }
        let mut r = [0u64; 2 * MAX_E];
        for k in 0..2 * e - 1 {
            r[k] = (wide[k] % p as u128) as u64;
        }
        // Reduce from the top using x^e = -(m_0 + ... + m_{e-1} x^{e-1}).
        for k in (e..2 * e - 1).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            for t in 0..e {
                let m = self.modulus[t];
                if m != 0 {
                    r[k - e + t] = (r[k - e + t] + mulmod(c, p - m, p)) % p;
                }
            }
        }
        self.elem(self.pack(&r[..e]))
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// a^n by square-and-multiply.
    pub fn pow(&self, a: FieldElement, mut n: u64) -> FieldElement {
        let mut r = self.one();
        let mut b = a;
        while n > 0 {
            if n & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            n >>= 1;
        }
        r
    }

    /// a^n for an arbitrary-size exponent.
    pub fn pow_big(&self, a: FieldElement, n: &BigUint) -> FieldElement {
        let mut r = self.one();
        for i in (0..n.bits()).rev() {
            r = self.mul(r, r);
            if n.bit(i) {
                r = self.mul(r, a);
            }
        }
        r
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if self.is_zero(a) {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The Frobenius automorphism a -> a^p.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.p)
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn quadratic_character(&self, a: FieldElement) -> i8 {
        if self.is_zero(a) {
            return 0;
        }
        if self.pow(a, (self.order - 1) / 2) == self.one() {
            1
        } else {
            -1
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::ZeroInverse);
        }
        let mut ord = self.order - 1;
        for l in prime_factors(self.order - 1) {
            while ord % l == 0 && self.pow(a, ord / l) == self.one() {
                ord /= l;
            }
        }
        Ok(ord)
    }

    /// Smallest-label generator of the multiplicative group.
    pub fn primitive_element(&self) -> FieldElement {
        let n = self.order - 1;
        let factors = prime_factors(n);
        (1..self.order)
            .map(|l| self.elem(l))
            .find(|&g| factors.iter().all(|&l| self.pow(g, n / l) != self.one()))
            .expect("a finite field has a primitive element")
    }
}

/// Make F_{p^e} with a modulus found by seeded random search.
pub fn make_field(p: u64, e: usize) -> Result<Field> {
    make_field_seeded(p, e, rng::DEFAULT_SEED)
}

/// F_q for a prime power q, with the default modulus seed.
pub fn field_of_order(q: u64) -> Result<Field> {
    let ps = prime_factors(q);
    if ps.len() != 1 {
        return Err(Error::BadCharacteristic(q));
    }
    let p = ps[0];
    let mut e = 0;
    let mut n = q;
    while n > 1 {
        n /= p;
        e += 1;
    }
    make_field(p, e)
}

/// As [`make_field`], with an explicit seed for the modulus search.
///
/// Different seeds typically give different (isomorphic) fields.
pub fn make_field_seeded(p: u64, e: usize, seed: u64) -> Result<Field> {
    if e == 0 {
        return Err(Error::BadDegree(0));
    }
    let fp = FieldSpec::prime(p)?;
    if e == 1 {
        return Ok(fp);
    }
    if e > MAX_E || (e as f64) * (p as f64).log2() >= 63.0 {
        return Err(Error::FieldTooLarge { p, e });
    }
    let mut modulus = vec![0u64; e + 1];
    modulus[e] = 1;
    for attempt in 0..100_000u64 {
        let mut r = rng::keyed(Domain::Modulus, seed, p * 1000 + e as u64, attempt);
        modulus[0] = r.gen_range(1..p);
        for c in modulus.iter_mut().take(e).skip(1) {
            *c = r.gen_range(0..p);
        }
        let f = crate::poly::MonicPoly::from_labels(&fp, &modulus[..e])?;
        if f.is_irreducible() {
            return Ok(Arc::new(FieldSpec::build(p, modulus)?));
        }
    }
    Err(invariant(format!("no irreducible modulus of degree {e} over F_{p} found")))
}

/// A field embedding F_{p^e} -> F_{p^{em}}, fixed by the image of the
/// generator of the smaller field.
pub struct Embedding {
    base: Field,
    ext: Field,
    root: FieldElement,
    table: Vec<FieldElement>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?} (x -> {:?})", self.base, self.ext, self.root)
    }
}

const EMBED_TABLE_MAX: u64 = 1 << 20;

impl Embedding {
    /// Resolve an embedding by locating a root of the base modulus in `ext`.
    pub fn new(base: &Field, ext: &Field) -> Result<Self> {
        if base.p != ext.p || ext.e % base.e != 0 {
            return Err(Error::Invalid(format!("no embedding of {base:?} into {ext:?}: incompatible degrees")));
        }
        let root = if base.e == 1 { ext.zero() } else { find_root_of_modulus(base, ext)? };
        let mut emb = Embedding { base: base.clone(), ext: ext.clone(), root, table: Vec::new() };
        if base.order <= EMBED_TABLE_MAX {
            emb.table = base.elements().map(|a| emb.apply_direct(a)).collect();
        }
        Ok(emb)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }
    pub fn ext(&self) -> &Field {
        &self.ext
    }
    /// Image of the base field's generator x.
    pub fn root(&self) -> FieldElement {
        self.root
    }

    fn apply_direct(&self, a: FieldElement) -> FieldElement {
        let c = self.base.coeffs(a);
        if self.base.e == 1 {
            return self.ext.from_int(c[0] as i64);
        }
        let mut v = self.ext.zero();
        for &ci in c.iter().rev() {
            v = self.ext.add(self.ext.mul(v, self.root), self.ext.from_int(ci as i64));
        }
        v
    }

    pub fn apply(&self, a: FieldElement) -> FieldElement {
        self.base.own(a);
        if self.table.is_empty() {
            self.apply_direct(a)
        } else {
            self.table[a.label as usize]
        }
    }
}

fn find_root_of_modulus(base: &Field, ext: &Field) -> Result<FieldElement> {
    // The roots lie in the unique subfield of order p^e, whose nonzero part
    // is the image of z -> z^((Q-1)/(p^e-1)). Enumerate powers of such an
    // image until a root appears; a random z generates the subgroup often.
    let sub = base.order;
    let cofactor = (ext.order - 1) / (sub - 1);
    let eval = |w: FieldElement| {
        let mut v = ext.one();
        for &c in base.modulus[..base.e].iter().rev() {
            v = ext.add(ext.mul(v, w), ext.from_int(c as i64));
        }
        v
    };
    for attempt in 0..64 {
        let mut r = rng::keyed(Domain::Embedding, rng::DEFAULT_SEED, ext.order, attempt);
        let z = ext.elem(r.gen_range(1..ext.order));
        let h = ext.pow(z, cofactor);
        let mut w = h;
        for _ in 0..sub - 1 {
            if ext.is_zero(eval(w)) {
                return Ok(w);
            }
            w = ext.mul(w, h);
            if w == h {
                break;
            }
        }
    }
    Err(invariant(format!("root search for {base:?} in {ext:?} failed")))
}

type TowerKey = (u64, Vec<u64>, usize);

fn tower_cache() -> &'static Mutex<HashMap<TowerKey, (Field, Arc<Embedding>)>> {
    static CACHE: OnceLock<Mutex<HashMap<TowerKey, (Field, Arc<Embedding>)>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The degree-`m` extension of `base` with its embedding, built once and cached.
pub fn extension(base: &Field, m: usize) -> Result<(Field, Arc<Embedding>)> {
    if m == 0 {
        return Err(Error::BadDegree(0));
    }
    let key = (base.p, base.modulus.clone(), m);
    if let Some(hit) = tower_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let ext = if m == 1 { base.clone() } else { make_field(base.p, base.e * m)? };
    let emb = Arc::new(Embedding::new(base, &ext)?);
    let mut cache = tower_cache().lock().unwrap();
    Ok(cache.entry(key).or_insert((ext, emb)).clone())
}

/// Embed `a` from `base` into `ext`, resolving (and caching) the embedding.
pub fn embed(base: &Field, ext: &Field, a: FieldElement) -> Result<FieldElement> {
    if ext.e % base.e == 0 {
        let (cached_ext, emb) = extension(base, ext.e / base.e)?;
        if *cached_ext == **ext {
            return Ok(emb.apply(a));
        }
    }
    Ok(Embedding::new(base, ext)?.apply(a))
}

/// Discrete-log tables for fast scans over a small field.
///
/// `log[label]` is the discrete logarithm to a fixed primitive element and
/// `zech[n] = log(1 + g^n)`, which turns addition into table lookups. The
/// quadratic character of g^n is (-1)^n.
pub struct LogTable {
    order: u64,
    log: Vec<u32>,
    zech: Vec<u32>,
}

/// Log of zero in the tables.
pub const LOG_ZERO: u32 = u32::MAX;

/// Fields larger than this are scanned without tables.
pub const LOG_TABLE_MAX: u64 = 1 << 23;

impl LogTable {
    pub fn new(field: &FieldSpec) -> Result<Self> {
        let q = field.order;
        if q > LOG_TABLE_MAX {
            return Err(Error::Cap(format!("log table for a field of order {q}")));
        }
        let n = (q - 1) as usize;
        let g = field.primitive_element();
        let mut log = vec![LOG_ZERO; q as usize];
        let mut exp = vec![0u64; n];
        let mut cur = field.one();
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = cur.label;
            log[cur.label as usize] = i as u32;
            cur = field.mul(cur, g);
        }
        if cur != field.one() || log.iter().skip(1).any(|&l| l == LOG_ZERO) {
            return Err(invariant("primitive element does not generate the multiplicative group"));
        }
        let p = field.p;
        let zech = exp
            .iter()
            .map(|&lab| {
                let c0 = lab % p;
                let plus_one = lab - c0 + (c0 + 1) % p;
                log[plus_one as usize]
            })
            .collect();
        Ok(LogTable { order: q, log, zech })
    }

    #[inline]
    pub fn order(&self) -> u64 {
        self.order
    }

    #[inline]
    pub fn log(&self, label: u64) -> u32 {
        self.log[label as usize]
    }

    /// log(a·b) from logs.
    #[inline]
    pub fn mul(&self, la: u32, lb: u32) -> u32 {
        if la == LOG_ZERO || lb == LOG_ZERO {
            return LOG_ZERO;
        }
        let n = (self.order - 1) as u32;
        let s = la as u64 + lb as u64;
        (if s >= n as u64 { s - n as u64 } else { s }) as u32
    }

    /// log(a + b) from logs.
    #[inline]
    pub fn add(&self, la: u32, lb: u32) -> u32 {
        if la == LOG_ZERO {
            return lb;
        }
        if lb == LOG_ZERO {
            return la;
        }
        let n = (self.order - 1) as u32;
        let d = if la >= lb { la - lb } else { la + n - lb };
        let z = self.zech[d as usize];
        if z == LOG_ZERO {
            LOG_ZERO
        } else {
            self.mul(lb, z)
        }
    }

    /// Quadratic character from a log.
    #[inline]
    pub fn character(&self, l: u32) -> i8 {
        if l == LOG_ZERO {
            0
        } else if l & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

type LogKey = (u64, Vec<u64>);

/// Shared log tables, built on first use for each field.
pub fn log_table(field: &FieldSpec) -> Result<Arc<LogTable>> {
    static CACHE: OnceLock<Mutex<HashMap<LogKey, Arc<LogTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (field.p, field.modulus.clone());
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(LogTable::new(field)?);
    Ok(cache.lock().unwrap().entry(key).or_insert(t).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn factors() {
        assert_eq!(prime_factors(48), vec![2, 3]);
        assert_eq!(prime_factors(97), vec![97]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
    }

    #[test]
    fn label_round_trip() {
        let f = make_field(5, 3).unwrap();
        for a in f.elements() {
            assert_eq!(f.from_coeffs(&f.coeffs(a)).unwrap(), a);
        }
    }

    #[test]
    fn log_table_matches_direct_arithmetic() {
        let f = make_field(3, 3).unwrap();
        let t = LogTable::new(&f).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                let (la, lb) = (t.log(a.label()), t.log(b.label()));
                assert_eq!(t.add(la, lb), t.log(f.add(a, b).label()));
                assert_eq!(t.mul(la, lb), t.log(f.mul(a, b).label()));
            }
            assert_eq!(t.character(t.log(a.label())), f.quadratic_character(a));
        }
    }
}
