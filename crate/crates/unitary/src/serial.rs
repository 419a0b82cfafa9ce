//! JSON wire formats.
//!
//! Field elements travel as their 2e base-p digits, low degree first.
//! Because deserializing needs the field context, every type comes as a
//! plain `...Repr` mirror deriving serde traits plus a `resolve` method
//! that validates against a [`FieldSpec`]. The spec itself serializes as
//! `{p, e, f_q, f_K}` with polynomials as digit arrays (f_K lists its
//! three coefficients over F_q, each a digit array, low degree first).

use crate::elim::{Decomposition, DiagForm};
use crate::gens::{Letter, Word};
use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::Mat;
use crate::mor::{Automorphism, Ciphertext, GeneratorSet, MorKeyPair, MorPublicKey};
use crate::{Error, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldSpecRepr {
    pub p: u64,
    pub e: usize,
    pub f_q: Vec<u64>,
    #[serde(rename = "f_K")]
    pub f_k: Vec<Vec<u64>>,
}

impl From<&FieldSpec> for FieldSpecRepr {
    fn from(s: &FieldSpec) -> FieldSpecRepr {
        let (c0, c1) = s.f_k();
        let mut monic = vec![0; s.e()];
        monic[0] = 1;
        FieldSpecRepr {
            p: s.p(),
            e: s.e(),
            f_q: s.f_q().to_vec(),
            f_k: vec![c0.to_vec(), c1.to_vec(), monic],
        }
    }
}

impl FieldSpecRepr {
    pub fn resolve(&self) -> Result<FieldSpec> {
        if self.f_k.len() != 3 {
            return Err(Error::Serial("f_K must list three coefficients".into()));
        }
        FieldSpec::with_moduli(self.p, self.e, self.f_q.clone(), self.f_k[0].clone(), self.f_k[1].clone())
    }
}

pub fn elem_repr(x: &FieldElem) -> Vec<u64> {
    x.digits().to_vec()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatRepr {
    pub d: usize,
    /// Row-major rows of digit vectors.
    pub entries: Vec<Vec<Vec<u64>>>,
}

impl From<&Mat> for MatRepr {
    fn from(m: &Mat) -> MatRepr {
        let d = m.d();
        let entries = (0..d)
            .map(|r| (0..d).map(|c| elem_repr(&m[(r, c)])).collect())
            .collect();
        MatRepr { d, entries }
    }
}

impl MatRepr {
    pub fn resolve(&self, spec: &FieldSpec) -> Result<Mat> {
        if self.entries.len() != self.d || self.entries.iter().any(|r| r.len() != self.d) {
            return Err(Error::Serial("entry grid does not match the dimension".into()));
        }
        let mut flat = Vec::with_capacity(self.d * self.d);
        for row in &self.entries {
            for digits in row {
                flat.push(spec.elem(digits)?);
            }
        }
        Mat::from_entries(spec, self.d, flat)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ParamRepr {
    Exponent(i64),
    Field(Vec<u64>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LetterRepr {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    pub param: ParamRepr,
}

impl From<&Letter> for LetterRepr {
    fn from(x: &Letter) -> LetterRepr {
        let family = x.family().to_string();
        match x {
            Letter::Xij { i, j, t } | Letter::XiNegJ { i, j, t } | Letter::XNegIj { i, j, t } => {
                LetterRepr { family, i: Some(*i), j: Some(*j), param: ParamRepr::Field(elem_repr(t)) }
            }
            Letter::XiNegI { i, s } | Letter::XNegIi { i, s } => {
                LetterRepr { family, i: Some(*i), j: None, param: ParamRepr::Field(elem_repr(s)) }
            }
            Letter::Xi0 { i, t } | Letter::X0i { i, t } => {
                LetterRepr { family, i: Some(*i), j: None, param: ParamRepr::Field(elem_repr(t)) }
            }
            Letter::TorusZeta { k } => {
                LetterRepr { family, i: None, j: None, param: ParamRepr::Exponent(*k) }
            }
            Letter::TorusZeta1 { k } => {
                LetterRepr { family, i: None, j: None, param: ParamRepr::Exponent(*k) }
            }
        }
    }
}

impl LetterRepr {
    pub fn resolve(&self, spec: &FieldSpec, d: usize) -> Result<Letter> {
        let need_ij = || -> Result<(u32, u32)> {
            match (self.i, self.j) {
                (Some(i), Some(j)) => Ok((i, j)),
                _ => Err(Error::Serial(format!("{} needs both indices", self.family))),
            }
        };
        let need_i = || -> Result<u32> {
            self.i.ok_or_else(|| Error::Serial(format!("{} needs an index", self.family)))
        };
        let field = |p: &ParamRepr| -> Result<FieldElem> {
            match p {
                ParamRepr::Field(digits) => spec.elem(digits),
                ParamRepr::Exponent(_) => Err(Error::Serial("expected a digit array".into())),
            }
        };
        let exponent = |p: &ParamRepr| -> Result<i64> {
            match p {
                ParamRepr::Exponent(k) => Ok(*k),
                ParamRepr::Field(_) => Err(Error::Serial("expected an integer exponent".into())),
            }
        };
        let letter = match self.family.as_str() {
            "Xij" => {
                let (i, j) = need_ij()?;
                Letter::Xij { i, j, t: field(&self.param)? }
            }
            "XiNegJ" => {
                let (i, j) = need_ij()?;
                Letter::XiNegJ { i, j, t: field(&self.param)? }
            }
            "XNegIj" => {
                let (i, j) = need_ij()?;
                Letter::XNegIj { i, j, t: field(&self.param)? }
            }
            "XiNegI" => Letter::XiNegI { i: need_i()?, s: field(&self.param)? },
            "XNegIi" => Letter::XNegIi { i: need_i()?, s: field(&self.param)? },
            "Xi0" => Letter::Xi0 { i: need_i()?, t: field(&self.param)? },
            "X0i" => Letter::X0i { i: need_i()?, t: field(&self.param)? },
            "TorusZeta" => Letter::TorusZeta { k: exponent(&self.param)? },
            "TorusZeta1" => Letter::TorusZeta1 { k: exponent(&self.param)? },
            other => return Err(Error::Serial(format!("unknown letter family {other}"))),
        };
        letter.validate(spec, d)?;
        Ok(letter)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct WordRepr {
    pub d: usize,
    pub letters: Vec<LetterRepr>,
}

impl From<&Word> for WordRepr {
    fn from(w: &Word) -> WordRepr {
        WordRepr { d: w.d(), letters: w.letters().iter().map(LetterRepr::from).collect() }
    }
}

impl WordRepr {
    pub fn resolve(&self, spec: &FieldSpec) -> Result<Word> {
        let letters: Result<Vec<Letter>> =
            self.letters.iter().map(|x| x.resolve(spec, self.d)).collect();
        Ok(Word::new(self.d, letters?))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DecompositionRepr {
    pub left: WordRepr,
    pub right: WordRepr,
    pub lambda: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<u64>>,
}

impl From<&Decomposition> for DecompositionRepr {
    fn from(dec: &Decomposition) -> DecompositionRepr {
        DecompositionRepr {
            left: (&dec.left).into(),
            right: (&dec.right).into(),
            lambda: elem_repr(&dec.diag.lambda),
            alpha: dec.diag.alpha.as_ref().map(elem_repr),
        }
    }
}

impl DecompositionRepr {
    pub fn resolve(&self, spec: &FieldSpec) -> Result<Decomposition> {
        if self.left.d != self.right.d {
            return Err(Error::Serial("mismatched word dimensions".into()));
        }
        let d = self.left.d;
        let diag = DiagForm {
            lambda: spec.elem(&self.lambda)?,
            alpha: self.alpha.as_ref().map(|a| spec.elem(a)).transpose()?,
        };
        Ok(Decomposition { left: self.left.resolve(spec)?, right: self.right.resolve(spec)?, diag, d })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PublicKeyRepr {
    pub d: usize,
    pub spec: FieldSpecRepr,
    pub generator_set_descriptor: Vec<LetterRepr>,
    pub images: Vec<MatRepr>,
    pub images_m: Vec<MatRepr>,
}

impl From<&MorPublicKey> for PublicKeyRepr {
    fn from(pk: &MorPublicKey) -> PublicKeyRepr {
        let gens = pk.phi.generator_set();
        PublicKeyRepr {
            d: gens.d(),
            spec: gens.spec().into(),
            generator_set_descriptor: gens.letters().iter().map(LetterRepr::from).collect(),
            images: pk.phi.images().iter().map(MatRepr::from).collect(),
            images_m: pk.phi_m.images().iter().map(MatRepr::from).collect(),
        }
    }
}

impl PublicKeyRepr {
    /// Rebuilds the public key, recomputing the deterministic generator
    /// set and checking it against the descriptor.
    pub fn resolve(&self) -> Result<MorPublicKey> {
        let spec = self.spec.resolve()?;
        let gens = Arc::new(GeneratorSet::new(&spec, self.d)?);
        let described: Result<Vec<Letter>> =
            self.generator_set_descriptor.iter().map(|x| x.resolve(&spec, self.d)).collect();
        if described? != gens.letters() {
            return Err(Error::Serial("generator set descriptor mismatch".into()));
        }
        let images: Result<Vec<Mat>> = self.images.iter().map(|m| m.resolve(&spec)).collect();
        let images_m: Result<Vec<Mat>> = self.images_m.iter().map(|m| m.resolve(&spec)).collect();
        Ok(MorPublicKey {
            phi: Automorphism::from_images(&gens, images?)?,
            phi_m: Automorphism::from_images(&gens, images_m?)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecretKeyRepr {
    pub d: usize,
    pub spec: FieldSpecRepr,
    /// Decimal string; exponents exceed machine words for large q^{2d}.
    pub m: String,
}

impl SecretKeyRepr {
    pub fn new(kp: &MorKeyPair) -> SecretKeyRepr {
        let gens = kp.public.phi.generator_set();
        SecretKeyRepr { d: gens.d(), spec: gens.spec().into(), m: kp.secret_m.to_string() }
    }

    pub fn secret(&self) -> Result<BigUint> {
        BigUint::from_str(&self.m).map_err(|e| Error::Serial(format!("bad exponent: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiphertextRepr {
    pub c1_images: Vec<MatRepr>,
    pub c2: MatRepr,
}

impl From<&Ciphertext> for CiphertextRepr {
    fn from(ct: &Ciphertext) -> CiphertextRepr {
        CiphertextRepr {
            c1_images: ct.c1.images().iter().map(MatRepr::from).collect(),
            c2: (&ct.c2).into(),
        }
    }
}

impl CiphertextRepr {
    pub fn resolve(&self, gens: &Arc<GeneratorSet>) -> Result<Ciphertext> {
        let spec = gens.spec();
        let images: Result<Vec<Mat>> = self.c1_images.iter().map(|m| m.resolve(spec)).collect();
        Ok(Ciphertext {
            c1: Automorphism::from_images(gens, images?)?,
            c2: self.c2.resolve(spec)?,
        })
    }
}
