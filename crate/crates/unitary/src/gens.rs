//! Elementary generators of the split unitary group as symbolic letters.
//!
//! A letter stores its family, indices and parameter; the matrix is
//! materialized on demand. Multiplying by a letter touches at most two
//! rows or columns (three for the families that involve index 0), so
//! applying a letter costs O(d) field operations per updated line. That
//! sparsity is what makes the elimination cubic.
//!
//! Families, with 1 ≤ i, j ≤ l and σ the conjugation:
//!
//! * `Xij`      x_{i,j}(t)   = I + t·e_{i,j}  - σ(t)·e_{-j,-i}, i ≠ j
//! * `XiNegJ`   x_{i,-j}(t)  = I + t·e_{i,-j} - σ(t)·e_{j,-i},  i < j
//! * `XNegIj`   x_{-i,j}(t)  = I + t·e_{-i,j} - σ(t)·e_{-j,i},  i < j
//! * `XiNegI`   x_{i,-i}(s)  = I + s·e_{i,-i},  σ(s) = -s
//! * `XNegIi`   x_{-i,i}(s)  = I + s·e_{-i,i},  σ(s) = -s
//! * `Xi0`      x_{i,0}(t)   = I - 2σ(t)·e_{i,0} + t·e_{0,-i} - tσ(t)·e_{i,-i}
//! * `X0i`      x_{0,i}(t)   = I + t·e_{0,i} - 2σ(t)·e_{-i,0} - tσ(t)·e_{-i,i}
//!
//! plus the torus letters h(ζ)^k = diag(1,…,ζ^k, 1,…, σ(ζ)^{-k}) and, in
//! odd dimension, h(ζ₁)^k = diag(ζ₁^k, 1, …, 1).

use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::{half, pos, Mat};
use crate::{Error, Result};
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Xij { i: u32, j: u32, t: FieldElem },
    XiNegJ { i: u32, j: u32, t: FieldElem },
    XNegIj { i: u32, j: u32, t: FieldElem },
    XiNegI { i: u32, s: FieldElem },
    XNegIi { i: u32, s: FieldElem },
    Xi0 { i: u32, t: FieldElem },
    X0i { i: u32, t: FieldElem },
    TorusZeta { k: i64 },
    TorusZeta1 { k: i64 },
}

use Letter::*;

impl Letter {
    /// Family name as used in the JSON wire format.
    pub fn family(&self) -> &'static str {
        match self {
            Xij { .. } => "Xij",
            XiNegJ { .. } => "XiNegJ",
            XNegIj { .. } => "XNegIj",
            XiNegI { .. } => "XiNegI",
            XNegIi { .. } => "XNegIi",
            Xi0 { .. } => "Xi0",
            X0i { .. } => "X0i",
            TorusZeta { .. } => "TorusZeta",
            TorusZeta1 { .. } => "TorusZeta1",
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, TorusZeta { .. } | TorusZeta1 { .. })
    }

    /// Validity for a given dimension: index ranges, the i < j constraints,
    /// skew parameters, and the odd-only families.
    pub fn validate(&self, spec: &FieldSpec, d: usize) -> Result<()> {
        let l = half(d) as u32;
        let bad = |msg: String| Err(Error::InvalidLetter(msg));
        match self {
            Xij { i, j, .. } => {
                if *i == 0 || *j == 0 || *i > l || *j > l {
                    return bad(format!("Xij indices ({i},{j}) out of 1..={l}"));
                }
                if i == j {
                    return bad("Xij needs i != j".into());
                }
            }
            XiNegJ { i, j, .. } | XNegIj { i, j, .. } => {
                if *i == 0 || *j == 0 || *i > l || *j > l {
                    return bad(format!("indices ({i},{j}) out of 1..={l}"));
                }
                if i >= j {
                    return bad(format!("{} needs i < j", self.family()));
                }
            }
            XiNegI { i, s } | XNegIi { i, s } => {
                if *i == 0 || *i > l {
                    return bad(format!("index {i} out of 1..={l}"));
                }
                if !s.is_skew() {
                    return bad(format!("{} parameter must be skew", self.family()));
                }
            }
            Xi0 { i, .. } | X0i { i, .. } => {
                if d.is_multiple_of(2) {
                    return bad(format!("{} needs odd dimension", self.family()));
                }
                if spec.p() == 2 {
                    return bad("index-0 families need odd characteristic".into());
                }
                if *i == 0 || *i > l {
                    return bad(format!("index {i} out of 1..={l}"));
                }
            }
            TorusZeta { .. } => {}
            TorusZeta1 { .. } => {
                if d.is_multiple_of(2) {
                    return bad("TorusZeta1 needs odd dimension".into());
                }
            }
        }
        Ok(())
    }

    /// The letter as a dense matrix. Always unitary; determinant 1 for the
    /// elementary families.
    pub fn matrix(&self, spec: &FieldSpec, d: usize) -> Result<Mat> {
        self.validate(spec, d)?;
        let mut m = Mat::identity(spec, d);
        match self {
            Xij { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                m.set(i, j, t.clone());
                m.set(-j, -i, -&t.conj());
            }
            XiNegJ { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                m.set(i, -j, t.clone());
                m.set(j, -i, -&t.conj());
            }
            XNegIj { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                m.set(-i, j, t.clone());
                m.set(-j, i, -&t.conj());
            }
            XiNegI { i, s } => {
                let i = *i as i32;
                m.set(i, -i, s.clone());
            }
            XNegIi { i, s } => {
                let i = *i as i32;
                m.set(-i, i, s.clone());
            }
            Xi0 { i, t } => {
                let i = *i as i32;
                let two = spec.int(2);
                m.set(i, 0, -&(&two * &t.conj()));
                m.set(0, -i, t.clone());
                m.set(i, -i, -&(t * &t.conj()));
            }
            X0i { i, t } => {
                let i = *i as i32;
                let two = spec.int(2);
                m.set(0, i, t.clone());
                m.set(-i, 0, -&(&two * &t.conj()));
                m.set(-i, i, -&(t * &t.conj()));
            }
            TorusZeta { k } => {
                let l = half(d) as i32;
                let z = spec.zeta().pow_signed(*k);
                m.set(l, l, z.clone());
                m.set(-l, -l, z.conj().inverse().expect("unit"));
            }
            TorusZeta1 { k } => {
                let z1 = spec.zeta1().pow_signed(*k);
                m.set(0, 0, z1);
            }
        }
        Ok(m)
    }

    /// The inverse letter: parameters negate, torus exponents negate.
    pub fn inverse(&self) -> Letter {
        match self {
            Xij { i, j, t } => Xij { i: *i, j: *j, t: -t },
            XiNegJ { i, j, t } => XiNegJ { i: *i, j: *j, t: -t },
            XNegIj { i, j, t } => XNegIj { i: *i, j: *j, t: -t },
            XiNegI { i, s } => XiNegI { i: *i, s: -s },
            XNegIi { i, s } => XNegIi { i: *i, s: -s },
            Xi0 { i, t } => Xi0 { i: *i, t: -t },
            X0i { i, t } => X0i { i: *i, t: -t },
            TorusZeta { k } => TorusZeta { k: -k },
            TorusZeta1 { k } => TorusZeta1 { k: -k },
        }
    }

    /// Uniform random elementary letter valid for dimension d: family
    /// first, then indices, then the parameter (zero included).
    pub fn random_elementary<R: Rng + ?Sized>(spec: &FieldSpec, d: usize, rng: &mut R) -> Letter {
        let l = half(d) as u32;
        let odd = d % 2 == 1;
        let n_fam = if odd { 7 } else { 5 };
        loop {
            let fam = rng.gen_range(0..n_fam);
            let letter = match fam {
                0 => {
                    let i = rng.gen_range(1..=l);
                    let j = loop {
                        let j = rng.gen_range(1..=l);
                        if j != i {
                            break j;
                        }
                    };
                    Xij { i, j, t: spec.random_elem(rng) }
                }
                1 | 2 => {
                    if l < 2 {
                        continue;
                    }
                    let i = rng.gen_range(1..l);
                    let j = rng.gen_range(i + 1..=l);
                    let t = spec.random_elem(rng);
                    if fam == 1 {
                        XiNegJ { i, j, t }
                    } else {
                        XNegIj { i, j, t }
                    }
                }
                3 => XiNegI { i: rng.gen_range(1..=l), s: spec.random_skew(rng) },
                4 => XNegIi { i: rng.gen_range(1..=l), s: spec.random_skew(rng) },
                5 => Xi0 { i: rng.gen_range(1..=l), t: spec.random_elem(rng) },
                _ => X0i { i: rng.gen_range(1..=l), t: spec.random_elem(rng) },
            };
            return letter;
        }
    }

    /// In-place left multiplication m ← letter · m, updating only the rows
    /// the letter touches.
    pub fn apply_left(&self, m: &mut Mat) {
        let d = m.d();
        debug_assert!(self.validate(m.spec(), d).is_ok());
        match self {
            Xij { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                row_axpy(m, pos(d, i), pos(d, j), t);
                row_axpy(m, pos(d, -j), pos(d, -i), &-&t.conj());
            }
            XiNegJ { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                row_axpy(m, pos(d, i), pos(d, -j), t);
                row_axpy(m, pos(d, j), pos(d, -i), &-&t.conj());
            }
            XNegIj { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                row_axpy(m, pos(d, -i), pos(d, j), t);
                row_axpy(m, pos(d, -j), pos(d, i), &-&t.conj());
            }
            XiNegI { i, s } => {
                let i = *i as i32;
                row_axpy(m, pos(d, i), pos(d, -i), s);
            }
            XNegIi { i, s } => {
                let i = *i as i32;
                row_axpy(m, pos(d, -i), pos(d, i), s);
            }
            Xi0 { i, t } => {
                // row i reads the old row 0, so update it first
                let i = *i as i32;
                let tc = t.conj();
                let c1 = -&(&m.spec().int(2) * &tc);
                let c2 = -&(t * &tc);
                row_axpy(m, pos(d, i), pos(d, 0), &c1);
                row_axpy(m, pos(d, i), pos(d, -i), &c2);
                row_axpy(m, pos(d, 0), pos(d, -i), t);
            }
            X0i { i, t } => {
                let i = *i as i32;
                let tc = t.conj();
                let c1 = -&(&m.spec().int(2) * &tc);
                let c2 = -&(t * &tc);
                row_axpy(m, pos(d, -i), pos(d, 0), &c1);
                row_axpy(m, pos(d, -i), pos(d, i), &c2);
                row_axpy(m, pos(d, 0), pos(d, i), t);
            }
            TorusZeta { k } => {
                let l = half(d) as i32;
                let z = m.spec().zeta().pow_signed(*k);
                let zi = z.conj().inverse().expect("unit");
                row_scale(m, pos(d, l), &z);
                row_scale(m, pos(d, -l), &zi);
            }
            TorusZeta1 { k } => {
                let z1 = m.spec().zeta1().pow_signed(*k);
                row_scale(m, pos(d, 0), &z1);
            }
        }
    }

    /// In-place right multiplication m ← m · letter, updating only the
    /// columns the letter touches.
    pub fn apply_right(&self, m: &mut Mat) {
        let d = m.d();
        match self {
            Xij { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                col_axpy(m, pos(d, j), pos(d, i), t);
                col_axpy(m, pos(d, -i), pos(d, -j), &-&t.conj());
            }
            XiNegJ { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                col_axpy(m, pos(d, -j), pos(d, i), t);
                col_axpy(m, pos(d, -i), pos(d, j), &-&t.conj());
            }
            XNegIj { i, j, t } => {
                let (i, j) = (*i as i32, *j as i32);
                col_axpy(m, pos(d, j), pos(d, -i), t);
                col_axpy(m, pos(d, i), pos(d, -j), &-&t.conj());
            }
            XiNegI { i, s } => {
                let i = *i as i32;
                col_axpy(m, pos(d, -i), pos(d, i), s);
            }
            XNegIi { i, s } => {
                let i = *i as i32;
                col_axpy(m, pos(d, i), pos(d, -i), s);
            }
            Xi0 { i, t } => {
                // column -i reads the old column 0, so update it first
                let i = *i as i32;
                let tc = t.conj();
                let c1 = -&(&m.spec().int(2) * &tc);
                let c2 = -&(t * &tc);
                col_axpy(m, pos(d, -i), pos(d, 0), t);
                col_axpy(m, pos(d, -i), pos(d, i), &c2);
                col_axpy(m, pos(d, 0), pos(d, i), &c1);
            }
            X0i { i, t } => {
                let i = *i as i32;
                let tc = t.conj();
                let c1 = -&(&m.spec().int(2) * &tc);
                let c2 = -&(t * &tc);
                col_axpy(m, pos(d, i), pos(d, 0), t);
                col_axpy(m, pos(d, i), pos(d, -i), &c2);
                col_axpy(m, pos(d, 0), pos(d, -i), &c1);
            }
            TorusZeta { k } => {
                let l = half(d) as i32;
                let z = m.spec().zeta().pow_signed(*k);
                let zi = z.conj().inverse().expect("unit");
                col_scale(m, pos(d, l), &z);
                col_scale(m, pos(d, -l), &zi);
            }
            TorusZeta1 { k } => {
                let z1 = m.spec().zeta1().pow_signed(*k);
                col_scale(m, pos(d, 0), &z1);
            }
        }
    }
}

fn row_axpy(m: &mut Mat, dst: usize, src: usize, t: &FieldElem) {
    if t.is_zero() {
        return;
    }
    let (dst_row, src_row) = m.row_pair(dst, src);
    FieldElem::row_mul_acc(t, src_row, dst_row);
}

fn row_scale(m: &mut Mat, r: usize, c: &FieldElem) {
    for v in m.row_mut(r) {
        v.mul_assign_by(c);
    }
}

fn col_axpy(m: &mut Mat, dst: usize, src: usize, t: &FieldElem) {
    if t.is_zero() {
        return;
    }
    let d = m.d();
    for r in 0..d {
        let row = m.row_mut(r);
        let (dst_e, src_e) = if dst < src {
            let (lo, hi) = row.split_at_mut(src);
            (&mut lo[dst], &hi[0])
        } else {
            let (lo, hi) = row.split_at_mut(dst);
            (&mut hi[0], &lo[src])
        };
        dst_e.add_mul(t, src_e);
    }
}

fn col_scale(m: &mut Mat, c: usize, f: &FieldElem) {
    let d = m.d();
    for r in 0..d {
        m.row_mut(r)[c].mul_assign_by(f);
    }
}

/// Pure-function variants of the sparse applications.
pub fn apply_left(x: &Letter, m: &Mat) -> Mat {
    let mut out = m.clone();
    x.apply_left(&mut out);
    out
}

pub fn apply_right(m: &Mat, x: &Letter) -> Mat {
    let mut out = m.clone();
    x.apply_right(&mut out);
    out
}

/// An ordered product of letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    d: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(d: usize, letters: Vec<Letter>) -> Word {
        Word { d, letters }
    }

    pub fn empty(d: usize) -> Word {
        Word { d, letters: Vec::new() }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, x: Letter) {
        self.letters.push(x);
    }

    pub fn concat(mut self, other: Word) -> Word {
        debug_assert_eq!(self.d, other.d);
        self.letters.extend(other.letters);
        self
    }

    /// Product of the letters, left to right.
    pub fn evaluate(&self, spec: &FieldSpec) -> Mat {
        let mut m = Mat::identity(spec, self.d);
        for x in &self.letters {
            x.apply_right(&mut m);
        }
        m
    }

    /// The group inverse: reversed order, inverted letters.
    pub fn inverse(&self) -> Word {
        Word { d: self.d, letters: self.letters.iter().rev().map(Letter::inverse).collect() }
    }

    pub fn validate(&self, spec: &FieldSpec) -> Result<()> {
        for x in &self.letters {
            x.validate(spec, self.d)?;
        }
        Ok(())
    }
}

/// The composite w_{i,-i}(s) = x_{i,-i}(s)·x_{-i,i}(-s⁻¹)·x_{i,-i}(s).
/// Applied on the left it swaps rows i and -i up to the scalars s and
/// -s⁻¹; its product equals I + s·e_{i,-i} - e_{i,i} - s⁻¹·e_{-i,i} - e_{-i,-i}.
pub fn row_interchange(d: usize, i: u32, s: &FieldElem) -> Result<Word> {
    if s.is_zero() || !s.is_skew() {
        return Err(Error::ZeroParameter);
    }
    let s_inv = s.inverse().expect("nonzero");
    Ok(Word::new(
        d,
        vec![
            XiNegI { i, s: s.clone() },
            XNegIi { i, s: -&s_inv },
            XiNegI { i, s: s.clone() },
        ],
    ))
}

/// Dense matrix of w_{i,-i}(s) from its closed formula, used as an oracle
/// and for structure checks.
pub fn row_interchange_matrix(spec: &FieldSpec, d: usize, i: u32, s: &FieldElem) -> Result<Mat> {
    if s.is_zero() || !s.is_skew() {
        return Err(Error::ZeroParameter);
    }
    let i = i as i32;
    let mut m = Mat::identity(spec, d);
    m.set(i, i, spec.zero());
    m.set(-i, -i, spec.zero());
    m.set(i, -i, s.clone());
    m.set(-i, i, -&s.inverse().expect("nonzero"));
    Ok(m)
}
