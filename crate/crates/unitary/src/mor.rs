//! An ElGamal-style cryptosystem on SU(2l, q²) whose public data are
//! automorphism images of a fixed generating set.
//!
//! The generating set lists, for every elementary-letter position, one
//! letter per element of an F_p-basis of the parameter space (the full
//! field for the two-index families, the skew line for the x_{i,-i}
//! families). Additivity in the parameter then lets any group element be
//! rewritten over the set: reduce it to a word of elementary letters,
//! expand each parameter over the basis, and substitute images.
//!
//! An [`Automorphism`] stores images of the generators under both φ and
//! φ⁻¹; composing keeps the two lists in sync, which is what makes
//! decryption exact and free of discrete logarithms. Ciphertexts coming
//! off the wire carry forward images only; the inverse list is then
//! rebuilt by recovering the hidden conjugator (up to an irrelevant
//! scalar) with the machinery in [`crate::attack`].

use crate::attack::{recover_conjugator_even, AutomorphismOracle};
use crate::elim::reduce_su_to_identity;
use crate::gens::Letter;
use crate::gf::FieldSpec;
use crate::linalg::{
    half, is_special_unitary, random_similitude, similitude_multiplier, HermitianForm, Mat,
};
use crate::{Error, Result};
use num_bigint::{BigUint, RandBigInt};
use rand::Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// Family discriminant + indices, the lookup key for generator positions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct PositionKey(u8, u32, u32);

fn position_key(letter: &Letter) -> Option<PositionKey> {
    Some(match letter {
        Letter::Xij { i, j, .. } => PositionKey(0, *i, *j),
        Letter::XiNegJ { i, j, .. } => PositionKey(1, *i, *j),
        Letter::XNegIj { i, j, .. } => PositionKey(2, *i, *j),
        Letter::XiNegI { i, .. } => PositionKey(3, *i, 0),
        Letter::XNegIi { i, .. } => PositionKey(4, *i, 0),
        _ => return None,
    })
}

/// The fixed generating set of SU(2l, q²) used by the cryptosystem.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    spec: FieldSpec,
    d: usize,
    letters: Vec<Letter>,
    /// position key → index of the first basis letter for that position
    starts: HashMap<PositionKey, usize>,
}

impl GeneratorSet {
    /// Deterministic enumeration: two-index families with the field basis,
    /// then the skew families with the skew basis.
    pub fn new(spec: &FieldSpec, d: usize) -> Result<GeneratorSet> {
        if !d.is_multiple_of(2) {
            return Err(Error::UnsupportedParity);
        }
        if d < 4 {
            return Err(Error::DimensionTooSmall(d));
        }
        let l = half(d) as u32;
        let field_basis = spec.k_basis();
        let skew_basis = spec.skew_basis();
        let mut letters = Vec::new();
        let mut starts = HashMap::new();
        let record = |key: PositionKey, letters: &mut Vec<Letter>, starts: &mut HashMap<_, _>| {
            starts.insert(key, letters.len());
        };
        for i in 1..=l {
            for j in 1..=l {
                if i != j {
                    record(PositionKey(0, i, j), &mut letters, &mut starts);
                    for b in &field_basis {
                        letters.push(Letter::Xij { i, j, t: b.clone() });
                    }
                }
            }
        }
        for i in 1..=l {
            for j in (i + 1)..=l {
                record(PositionKey(1, i, j), &mut letters, &mut starts);
                for b in &field_basis {
                    letters.push(Letter::XiNegJ { i, j, t: b.clone() });
                }
            }
        }
        for i in 1..=l {
            for j in (i + 1)..=l {
                record(PositionKey(2, i, j), &mut letters, &mut starts);
                for b in &field_basis {
                    letters.push(Letter::XNegIj { i, j, t: b.clone() });
                }
            }
        }
        for i in 1..=l {
            record(PositionKey(3, i, 0), &mut letters, &mut starts);
            for b in &skew_basis {
                letters.push(Letter::XiNegI { i, s: b.clone() });
            }
        }
        for i in 1..=l {
            record(PositionKey(4, i, 0), &mut letters, &mut starts);
            for b in &skew_basis {
                letters.push(Letter::XNegIi { i, s: b.clone() });
            }
        }
        Ok(GeneratorSet { spec: spec.clone(), d, letters, starts })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn matrices(&self) -> Result<Vec<Mat>> {
        self.letters.iter().map(|x| x.matrix(&self.spec, self.d)).collect()
    }

    /// Basis expansion of an arbitrary elementary letter: pairs of
    /// (generator index, exponent) whose product equals the letter, by
    /// additivity of the parameter.
    fn expand(&self, letter: &Letter) -> Result<Vec<(usize, u64)>> {
        let key = position_key(letter)
            .ok_or_else(|| Error::InvalidLetter("torus letters are not in the set".into()))?;
        let start = *self
            .starts
            .get(&key)
            .ok_or_else(|| Error::InvalidLetter(format!("{letter:?} outside the set")))?;
        let e = self.spec.e();
        let digits: Vec<u64> = match letter {
            Letter::Xij { t, .. } | Letter::XiNegJ { t, .. } | Letter::XNegIj { t, .. } => {
                t.digits().to_vec()
            }
            Letter::XiNegI { s, .. } | Letter::XNegIi { s, .. } => {
                // s = ε·v with v in the base field; its digits drive the
                // skew-basis exponents
                let v = s * &self.spec.epsilon().inverse().expect("nonzero");
                debug_assert!(v.is_base());
                v.digits()[..e].to_vec()
            }
            _ => unreachable!(),
        };
        Ok(digits
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(b, c)| (start + b, c))
            .collect())
    }

    fn compatible(&self, other: &GeneratorSet) -> bool {
        self.d == other.d && self.spec == other.spec
    }
}

/// An automorphism of SU(2l, q²) presented as images of the generating
/// set, with the images of the inverse automorphism carried alongside.
#[derive(Clone)]
pub struct Automorphism {
    gens: Arc<GeneratorSet>,
    images: Vec<Mat>,
    inv_images: Vec<Mat>,
}

impl Automorphism {
    pub fn identity(gens: &Arc<GeneratorSet>) -> Result<Automorphism> {
        let mats = gens.matrices()?;
        Ok(Automorphism { gens: gens.clone(), images: mats.clone(), inv_images: mats })
    }

    /// The conjugation g ↦ n·g·n⁻¹ for a similitude n.
    pub fn conjugation(n: &Mat, gens: &Arc<GeneratorSet>) -> Result<Automorphism> {
        let form = HermitianForm::split(gens.spec(), gens.d())?;
        if similitude_multiplier(n, &form).is_none() {
            return Err(Error::NotSimilitude);
        }
        let n_inv = n.inverse().map_err(|_| Error::NotSimilitude)?;
        let mut images = Vec::with_capacity(gens.len());
        let mut inv_images = Vec::with_capacity(gens.len());
        for x in gens.letters() {
            let m = x.matrix(gens.spec(), gens.d())?;
            images.push(n.mul(&m).mul(&n_inv));
            inv_images.push(n_inv.mul(&m).mul(n));
        }
        Ok(Automorphism { gens: gens.clone(), images, inv_images })
    }

    /// Reconstructs a full automorphism from forward images alone (the
    /// wire format of public keys and ciphertexts): the hidden conjugator
    /// is recovered up to a scalar, which cancels in the inverse images.
    pub fn from_images(gens: &Arc<GeneratorSet>, images: Vec<Mat>) -> Result<Automorphism> {
        if images.len() != gens.len() {
            return Err(Error::InvalidCiphertext(format!(
                "expected {} images, got {}",
                gens.len(),
                images.len()
            )));
        }
        let form = HermitianForm::split(gens.spec(), gens.d())?;
        for m in &images {
            if m.d() != gens.d() || !is_special_unitary(m, &form) {
                return Err(Error::InvalidCiphertext("image outside the special unitary group".into()));
            }
        }
        let inv_images = recovered_inverse_images(gens, &images)?;
        let aut = Automorphism { gens: gens.clone(), images, inv_images };
        aut.validate_inverse()?;
        Ok(aut)
    }

    /// φ(φ⁻¹(gᵢ)) = gᵢ for every generator.
    fn validate_inverse(&self) -> Result<()> {
        let mut cache = RewriteCache::default();
        for (x, inv) in self.gens.letters().iter().zip(&self.inv_images) {
            let back = rewrite(self.gens.as_ref(), &self.images, inv, &mut cache)?;
            if back != x.matrix(self.gens.spec(), self.gens.d())? {
                return Err(Error::InconsistentOracle);
            }
        }
        Ok(())
    }

    pub fn generator_set(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    /// Applies the automorphism to a special-unitary element by word
    /// rewriting over the generator images.
    pub fn apply(&self, m: &Mat) -> Result<Mat> {
        rewrite(self.gens.as_ref(), &self.images, m, &mut RewriteCache::default())
    }

    /// Applies the inverse automorphism.
    pub fn apply_inverse(&self, m: &Mat) -> Result<Mat> {
        rewrite(self.gens.as_ref(), &self.inv_images, m, &mut RewriteCache::default())
    }

    /// Composition outer ∘ inner, acting as outer(inner(·)):
    /// `images[i] = outer(inner(gᵢ))`, inverse images kept in sync.
    ///
    /// Every automorphism here is conjugation by some hidden similitude,
    /// and the conjugator is recoverable from the images up to a scalar
    /// that cancels under conjugation. Composing through the recovered
    /// conjugators therefore produces exactly the same image matrices as
    /// substituting words, at a fraction of the cost; the word-rewriting
    /// pipeline itself stays on the apply/encrypt/decrypt path.
    pub fn compose(&self, inner: &Automorphism) -> Result<Automorphism> {
        if !self.gens.compatible(&inner.gens) {
            return Err(Error::GeneratorSetMismatch);
        }
        let g_out = conjugator_of(&self.gens, &self.images)?;
        let g_out_inv = g_out.inverse().map_err(|_| Error::InconsistentOracle)?;
        let images: Vec<Mat> =
            inner.images.iter().map(|m| g_out.mul(m).mul(&g_out_inv)).collect();
        let g_in = conjugator_of(&inner.gens, &inner.images)?;
        let g_comp = g_out.mul(&g_in);
        let g_comp_inv = g_comp.inverse().map_err(|_| Error::InconsistentOracle)?;
        let gens = self.gens.as_ref();
        let inv_images: Result<Vec<Mat>> = gens
            .letters()
            .iter()
            .map(|x| Ok(g_comp_inv.mul(&x.matrix(gens.spec(), gens.d())?).mul(&g_comp)))
            .collect();
        Ok(Automorphism { gens: self.gens.clone(), images, inv_images: inv_images? })
    }

    /// Square-and-multiply power; O(log k) compositions.
    pub fn power(&self, k: &BigUint) -> Result<Automorphism> {
        if k == &BigUint::from(0u32) {
            return Automorphism::identity(&self.gens);
        }
        let mut acc: Option<Automorphism> = None;
        let mut base = self.clone();
        let bits = k.bits();
        for b in 0..bits {
            if k.bit(b) {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.compose(&base)?,
                });
            }
            if b + 1 < bits {
                base = base.compose(&base)?;
            }
        }
        Ok(acc.expect("nonzero exponent"))
    }

    /// Whether this is the identity map on the generators.
    pub fn is_identity(&self) -> Result<bool> {
        for (x, img) in self.gens.letters().iter().zip(&self.images) {
            if *img != x.matrix(self.gens.spec(), self.gens.d())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Caches shared across the rewrites of one composition: finished letter
/// pieces, and small powers of individual generator images.
#[derive(Default)]
struct RewriteCache {
    letters: HashMap<Letter, Mat>,
    powers: HashMap<(usize, u64), Mat>,
}

impl RewriteCache {
    fn image_power(&mut self, images: &[Mat], idx: usize, exp: u64) -> &Mat {
        debug_assert!(exp >= 1);
        self.powers.entry((idx, 1)).or_insert_with(|| images[idx].clone());
        for c in 2..=exp {
            if !self.powers.contains_key(&(idx, c)) {
                let next = self.powers[&(idx, c - 1)].mul(&images[idx]);
                self.powers.insert((idx, c), next);
            }
        }
        &self.powers[&(idx, exp)]
    }
}

/// The core rewriting pipeline: reduce to an elementary word, expand each
/// letter over the basis, substitute images. The caches amortize repeated
/// letters and image powers across one composition.
fn rewrite(
    gens: &GeneratorSet,
    images: &[Mat],
    m: &Mat,
    cache: &mut RewriteCache,
) -> Result<Mat> {
    if m.d() != gens.d() {
        return Err(Error::GeneratorSetMismatch);
    }
    let word = reduce_su_to_identity(m)?;
    let mut acc: Option<Mat> = None;
    let mut scratch = Mat::zeros(gens.spec(), gens.d());
    for letter in word.letters() {
        if !cache.letters.contains_key(letter) {
            let mut piece: Option<Mat> = None;
            for (idx, exp) in gens.expand(letter)? {
                let pw = cache.image_power(images, idx, exp);
                piece = Some(match piece {
                    None => pw.clone(),
                    Some(x) => x.mul(pw),
                });
            }
            let piece = piece.unwrap_or_else(|| Mat::identity(gens.spec(), gens.d()));
            cache.letters.insert(letter.clone(), piece);
        }
        let piece = &cache.letters[letter];
        match &mut acc {
            None => acc = Some(piece.clone()),
            Some(a) => {
                a.mul_into(piece, &mut scratch);
                std::mem::swap(a, &mut scratch);
            }
        }
    }
    Ok(acc.unwrap_or_else(|| Mat::identity(gens.spec(), gens.d())))
}

/// Recovers (a scalar multiple of) the conjugator behind a list of
/// forward images, by running the key-recovery procedure against an
/// oracle that answers letters through basis expansion.
fn conjugator_of(gens: &Arc<GeneratorSet>, images: &[Mat]) -> Result<Mat> {
    struct ImageOracle<'a> {
        gens: &'a GeneratorSet,
        images: &'a [Mat],
        powers: RewriteCache,
    }
    impl AutomorphismOracle for ImageOracle<'_> {
        fn query(&mut self, letter: &Letter) -> Result<Mat> {
            let mut acc: Option<Mat> = None;
            for (idx, exp) in self.gens.expand(letter)? {
                let pw = self.powers.image_power(self.images, idx, exp);
                acc = Some(match acc {
                    None => pw.clone(),
                    Some(x) => x.mul(pw),
                });
            }
            Ok(acc.unwrap_or_else(|| Mat::identity(self.gens.spec(), self.gens.d())))
        }
        fn d(&self) -> usize {
            self.gens.d()
        }
    }
    let mut oracle = ImageOracle { gens, images, powers: RewriteCache::default() };
    recover_conjugator_even(&mut oracle, half(gens.d()), gens.spec())
}

/// Inverse images for a conjugation automorphism given by forward images:
/// recover the conjugator up to a scalar and conjugate the generators by
/// its inverse (the scalar cancels).
fn recovered_inverse_images(gens: &Arc<GeneratorSet>, images: &[Mat]) -> Result<Vec<Mat>> {
    let g = conjugator_of(gens, images)?;
    let g_inv = g.inverse().map_err(|_| Error::InconsistentOracle)?;
    gens.letters()
        .iter()
        .map(|x| Ok(g_inv.mul(&x.matrix(gens.spec(), gens.d())?).mul(&g)))
        .collect()
}

/// Key pair: public images of φ and φ^m, secret exponent m.
pub struct MorKeyPair {
    pub public: MorPublicKey,
    pub secret_m: BigUint,
}

pub struct MorPublicKey {
    pub phi: Automorphism,
    pub phi_m: Automorphism,
}

/// Ciphertext: φ^r presented on generators, plus φ^{rm}(M).
pub struct Ciphertext {
    pub c1: Automorphism,
    pub c2: Mat,
}

/// Exponent bound q^{2d}, at least the group exponent, so sampling in
/// [1, R_max] loses nothing.
pub fn exponent_bound(spec: &FieldSpec, d: usize) -> BigUint {
    BigUint::from(spec.q()).pow(2 * d as u32)
}

fn random_exponent<R: Rng + ?Sized>(spec: &FieldSpec, d: usize, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(&exponent_bound(spec, d)) + 1u32
}

/// Generates a key pair over SU(2l, q²): a uniform similitude conjugator
/// (random unitary times a random diagonal similitude) and a secret
/// exponent in [1, q^{2d}].
pub fn keygen<R: Rng + ?Sized>(l: usize, spec: &FieldSpec, rng: &mut R) -> Result<MorKeyPair> {
    let d = 2 * l;
    let form = HermitianForm::split(spec, d)?;
    let gens = Arc::new(GeneratorSet::new(spec, d)?);
    let phi = loop {
        let n = random_similitude(&form, rng, 10 * d * d);
        let phi = Automorphism::conjugation(&n, &gens)?;
        if !phi.is_identity()? {
            break phi;
        }
    };
    let secret_m = random_exponent(spec, d, rng);
    let phi_m = phi.power(&secret_m)?;
    Ok(MorKeyPair { public: MorPublicKey { phi, phi_m }, secret_m })
}

/// Encrypts a special-unitary plaintext: draws r, publishes φ^r and
/// φ^{rm}(M).
pub fn encrypt<R: Rng + ?Sized>(pk: &MorPublicKey, m: &Mat, rng: &mut R) -> Result<Ciphertext> {
    let gens = pk.phi.generator_set();
    let form = HermitianForm::split(gens.spec(), gens.d())?;
    if m.d() != gens.d() || !is_special_unitary(m, &form) {
        return Err(Error::NotSpecialUnitary);
    }
    let r = random_exponent(gens.spec(), gens.d(), rng);
    let c1 = pk.phi.power(&r)?;
    let c2 = pk.phi_m.power(&r)?.apply(m)?;
    Ok(Ciphertext { c1, c2 })
}

/// Decrypts by raising c1 to the secret exponent and applying the inverse
/// automorphism: M = (φ^{rm})⁻¹(c2).
pub fn decrypt(kp: &MorKeyPair, ct: &Ciphertext) -> Result<Mat> {
    let gens = kp.public.phi.generator_set().clone();
    decrypt_with(&gens, &kp.secret_m, ct)
}

/// Decryption from the secret exponent alone; the generator set is
/// deterministic given the field and dimension, so no key material beyond
/// m is required.
pub fn decrypt_with(gens: &Arc<GeneratorSet>, m: &BigUint, ct: &Ciphertext) -> Result<Mat> {
    if !gens.compatible(ct.c1.generator_set()) || ct.c2.d() != gens.d() {
        return Err(Error::InvalidCiphertext("dimension or field mismatch".into()));
    }
    let form = HermitianForm::split(gens.spec(), gens.d())?;
    if !is_special_unitary(&ct.c2, &form) {
        return Err(Error::InvalidCiphertext("payload outside the group".into()));
    }
    let psi = ct.c1.power(m)?;
    psi.apply_inverse(&ct.c2)
}

/// Oracle view of an automorphism: answers arbitrary elementary letters
/// by expanding their parameter over the generator basis.
pub struct ImageOracle<'a> {
    aut: &'a Automorphism,
}

impl Automorphism {
    pub fn oracle(&self) -> ImageOracle<'_> {
        ImageOracle { aut: self }
    }
}

impl AutomorphismOracle for ImageOracle<'_> {
    fn query(&mut self, letter: &Letter) -> Result<Mat> {
        let gens = self.aut.gens.as_ref();
        let mut acc = Mat::identity(gens.spec(), gens.d());
        for (idx, exp) in gens.expand(letter)? {
            acc = acc.mul(&self.aut.images[idx].pow(exp as u128));
        }
        Ok(acc)
    }

    fn d(&self) -> usize {
        self.aut.gens.d()
    }
}
