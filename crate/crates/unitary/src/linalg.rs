//! Dense exact matrices over F_{q²}, split Hermitian forms, and the
//! membership tests for U, SU and GU.
//!
//! Rows and columns are labeled 1..l, -1..-l when d = 2l and
//! 0, 1..l, -1..-l when d = 2l + 1, in that listed order. [`pos`] maps a
//! label to its storage index; the whole crate goes through this single
//! mapping.

use crate::gens::{Letter, Word};
use crate::gf::{FieldElem, FieldSpec};
use crate::{Error, Result};
use rand::Rng;
use std::fmt;
use std::ops::{Index, IndexMut};

/// Storage index of a labeled basis vector. Labels are ±1..±l plus 0 for
/// odd dimension.
pub fn pos(d: usize, label: i32) -> usize {
    let l = (d / 2) as i32;
    debug_assert!(label.abs() <= l, "label {label} out of range for d = {d}");
    if d.is_multiple_of(2) {
        debug_assert!(label != 0, "label 0 needs odd dimension");
        if label > 0 {
            (label - 1) as usize
        } else {
            (l - 1 - label) as usize
        }
    } else if label == 0 {
        0
    } else if label > 0 {
        label as usize
    } else {
        (l - label) as usize
    }
}

/// Inverse of [`pos`].
pub fn label(d: usize, index: usize) -> i32 {
    let l = d / 2;
    if d.is_multiple_of(2) {
        if index < l {
            index as i32 + 1
        } else {
            -((index - l) as i32 + 1)
        }
    } else if index == 0 {
        0
    } else if index <= l {
        index as i32
    } else {
        -((index - l) as i32)
    }
}

/// Half-rank l of the dimension.
pub fn half(d: usize) -> usize {
    d / 2
}

/// Dense d×d matrix over F_{q²}, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    spec: FieldSpec,
    d: usize,
    entries: Vec<FieldElem>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat(d={})", self.d)?;
        for r in 0..self.d {
            for c in 0..self.d {
                write!(f, "{:?} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = FieldElem;
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        &self.entries[r * self.d + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElem {
        &mut self.entries[r * self.d + c]
    }
}

impl Mat {
    pub fn zeros(spec: &FieldSpec, d: usize) -> Mat {
        Mat { spec: spec.clone(), d, entries: vec![spec.zero(); d * d] }
    }

    pub fn identity(spec: &FieldSpec, d: usize) -> Mat {
        let mut m = Mat::zeros(spec, d);
        for i in 0..d {
            m[(i, i)] = spec.one();
        }
        m
    }

    pub fn from_entries(spec: &FieldSpec, d: usize, entries: Vec<FieldElem>) -> Result<Mat> {
        if entries.len() != d * d {
            return Err(Error::Serial(format!("expected {} entries, got {}", d * d, entries.len())));
        }
        Ok(Mat { spec: spec.clone(), d, entries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    /// Entry addressed by row/column labels instead of raw indices.
    pub fn at(&self, row_label: i32, col_label: i32) -> &FieldElem {
        &self[(pos(self.d, row_label), pos(self.d, col_label))]
    }

    pub fn set(&mut self, row_label: i32, col_label: i32, v: FieldElem) {
        let idx = (pos(self.d, row_label), pos(self.d, col_label));
        self[idx] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.entries[r * self.d..(r + 1) * self.d]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [FieldElem] {
        &mut self.entries[r * self.d..(r + 1) * self.d]
    }

    /// Mutable row `dst` together with an immutable view of row `src`.
    pub(crate) fn row_pair(&mut self, dst: usize, src: usize) -> (&mut [FieldElem], &[FieldElem]) {
        assert_ne!(dst, src);
        let d = self.d;
        if dst < src {
            let (lo, hi) = self.entries.split_at_mut(src * d);
            (&mut lo[dst * d..(dst + 1) * d], &hi[..d])
        } else {
            let (lo, hi) = self.entries.split_at_mut(dst * d);
            (&mut hi[..d], &lo[src * d..(src + 1) * d])
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &Mat::identity(&self.spec, self.d)
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(&self.spec, self.d);
        self.mul_into(other, &mut out);
        out
    }

    /// out ← self · other, reusing out's storage.
    pub fn mul_into(&self, other: &Mat, out: &mut Mat) {
        let d = self.d;
        assert!(d == other.d && d == out.d);
        for e in out.entries.iter_mut() {
            e.set_zero();
        }
        for i in 0..d {
            for k in 0..d {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                FieldElem::row_mul_acc(a, other.row(k), out.row_mut(i));
            }
        }
    }

    /// Entrywise conjugate of the transpose.
    pub fn conj_transpose(&self) -> Mat {
        let d = self.d;
        let mut out = Mat::zeros(&self.spec, d);
        for i in 0..d {
            for j in 0..d {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: &FieldElem) -> Mat {
        let mut out = self.clone();
        for v in out.entries.iter_mut() {
            *v = &*v * c;
        }
        out
    }

    /// Exact determinant by Gaussian elimination with first-nonzero pivots.
    pub fn det(&self) -> FieldElem {
        let d = self.d;
        let mut m = self.clone();
        let mut det = self.spec.one();
        for k in 0..d {
            let Some(r) = (k..d).find(|&r| !m[(r, k)].is_zero()) else {
                return self.spec.zero();
            };
            if r != k {
                for c in 0..d {
                    let tmp = m[(r, c)].clone();
                    m[(r, c)] = m[(k, c)].clone();
                    m[(k, c)] = tmp;
                }
                det = -&det;
            }
            let pivot = m[(k, k)].clone();
            det = &det * &pivot;
            let pinv = pivot.inverse().expect("pivot nonzero");
            for r in k + 1..d {
                if m[(r, k)].is_zero() {
                    continue;
                }
                let f = &m[(r, k)] * &pinv;
                for c in k..d {
                    let t = &f * &m[(k, c)];
                    m[(r, c)] = &m[(r, c)] - &t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Mat> {
        let d = self.d;
        let mut m = self.clone();
        let mut inv = Mat::identity(&self.spec, d);
        for k in 0..d {
            let Some(r) = (k..d).find(|&r| !m[(r, k)].is_zero()) else {
                return Err(Error::SingularMatrix);
            };
            if r != k {
                for c in 0..d {
                    let tmp = m[(r, c)].clone();
                    m[(r, c)] = m[(k, c)].clone();
                    m[(k, c)] = tmp;
                    let tmp = inv[(r, c)].clone();
                    inv[(r, c)] = inv[(k, c)].clone();
                    inv[(k, c)] = tmp;
                }
            }
            let pinv = m[(k, k)].inverse().expect("pivot nonzero");
            for c in 0..d {
                m[(k, c)] = &m[(k, c)] * &pinv;
                inv[(k, c)] = &inv[(k, c)] * &pinv;
            }
            for r in 0..d {
                if r == k || m[(r, k)].is_zero() {
                    continue;
                }
                let f = m[(r, k)].clone();
                for c in 0..d {
                    let t = &f * &m[(k, c)];
                    m[(r, c)] = &m[(r, c)] - &t;
                    let t = &f * &inv[(k, c)];
                    inv[(r, c)] = &inv[(r, c)] - &t;
                }
            }
        }
        Ok(inv)
    }

    /// Matrix power with a u128 exponent.
    pub fn pow(&self, mut k: u128) -> Mat {
        let mut acc = Mat::identity(&self.spec, self.d);
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }
}

/// The fixed split Hermitian form: the anti-diagonal identity blocks for
/// even d, with an extra leading 2 for odd d (odd characteristic only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianForm {
    d: usize,
    matrix: Mat,
}

impl HermitianForm {
    pub fn split(spec: &FieldSpec, d: usize) -> Result<HermitianForm> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if d % 2 == 1 && spec.p() == 2 {
            return Err(Error::UnsupportedParity);
        }
        let l = half(d);
        let mut m = Mat::zeros(spec, d);
        for i in 1..=l as i32 {
            m.set(i, -i, spec.one());
            m.set(-i, i, spec.one());
        }
        if d % 2 == 1 {
            m.set(0, 0, spec.int(2));
        }
        debug_assert_eq!(m.conj_transpose(), m);
        Ok(HermitianForm { d, matrix: m })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// ᵀX̄ β X = β.
pub fn is_unitary(x: &Mat, form: &HermitianForm) -> bool {
    if x.d() != form.d() {
        return false;
    }
    x.conj_transpose().mul(form.matrix()).mul(x) == *form.matrix()
}

/// Returns μ ∈ F_q^× with ᵀX̄ β X = μβ when X is a similitude of the form,
/// `None` otherwise. μ = 1 exactly for unitary X.
pub fn similitude_multiplier(x: &Mat, form: &HermitianForm) -> Option<FieldElem> {
    if x.d() != form.d() {
        return None;
    }
    let lhs = x.conj_transpose().mul(form.matrix()).mul(x);
    let d = x.d();
    // candidate μ from the first nonzero entry of β
    let mut mu = None;
    'outer: for r in 0..d {
        for c in 0..d {
            let b = &form.matrix()[(r, c)];
            if b.is_zero() {
                continue;
            }
            mu = Some(&lhs[(r, c)] * &b.inverse().expect("nonzero"));
            break 'outer;
        }
    }
    let mu = mu?;
    if mu.is_zero() || !mu.is_base() {
        return None;
    }
    if lhs == form.matrix().scale(&mu) {
        Some(mu)
    } else {
        None
    }
}

/// Membership in the special unitary group: unitary with determinant one.
pub fn is_special_unitary(x: &Mat, form: &HermitianForm) -> bool {
    is_unitary(x, form) && x.det().is_one()
}

/// Random element of U(d, q²): a word of `n_letters` uniformly chosen
/// elementary letters closed off with random torus powers. 10·d² letters
/// mixes well at desk scale.
pub fn random_unitary<R: Rng + ?Sized>(form: &HermitianForm, rng: &mut R, n_letters: usize) -> Mat {
    let w = random_unitary_word(form, rng, n_letters);
    w.evaluate(form.matrix().spec())
}

/// The generator word behind [`random_unitary`].
pub fn random_unitary_word<R: Rng + ?Sized>(
    form: &HermitianForm,
    rng: &mut R,
    n_letters: usize,
) -> Word {
    let d = form.d();
    let spec = form.matrix().spec();
    let mut letters = Vec::with_capacity(n_letters + 2);
    for _ in 0..n_letters {
        letters.push(Letter::random_elementary(spec, d, rng));
    }
    let k = rng.gen_range(0..spec.unit_order()) as i64;
    letters.push(Letter::TorusZeta { k });
    if d % 2 == 1 {
        let j = rng.gen_range(0..(spec.q() + 1)) as i64;
        letters.push(Letter::TorusZeta1 { k: j });
    }
    Word::new(d, letters)
}

/// Random similitude with a random multiplier: a random unitary element
/// times a diagonal similitude.
pub fn random_similitude<R: Rng + ?Sized>(form: &HermitianForm, rng: &mut R, n_letters: usize) -> Mat {
    let d = form.d();
    let spec = form.matrix().spec();
    let l = half(d);
    let u = random_unitary(form, rng, n_letters);
    let mut s = Mat::identity(spec, d);
    let mu;
    if d % 2 == 1 {
        let s0 = spec.random_nonzero(rng);
        mu = s0.norm();
        s.set(0, 0, s0);
    } else {
        mu = loop {
            let v = spec.random_base(rng);
            if !v.is_zero() {
                break v;
            }
        };
    }
    for i in 1..=l as i32 {
        let a = spec.random_nonzero(rng);
        let b = &mu * &a.conj().inverse().expect("nonzero");
        s.set(i, i, a);
        s.set(-i, -i, b);
    }
    debug_assert!(similitude_multiplier(&s, form).is_some());
    u.mul(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn f9() -> FieldSpec {
        FieldSpec::new(3, 1).unwrap()
    }

    /// Cofactor-expansion determinant, the independent oracle.
    fn det_oracle(m: &Mat) -> FieldElem {
        let d = m.d();
        if d == 1 {
            return m[(0, 0)].clone();
        }
        let spec = m.spec().clone();
        let mut acc = spec.zero();
        for c in 0..d {
            if m[(0, c)].is_zero() {
                continue;
            }
            let mut sub = Mat::zeros(&spec, d - 1);
            for r in 1..d {
                let mut cc = 0;
                for k in 0..d {
                    if k == c {
                        continue;
                    }
                    sub[(r - 1, cc)] = m[(r, k)].clone();
                    cc += 1;
                }
            }
            let term = &m[(0, c)] * &det_oracle(&sub);
            acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    #[test]
    fn index_mapping_round_trips() {
        for d in [4usize, 5, 8, 9] {
            for idx in 0..d {
                assert_eq!(pos(d, label(d, idx)), idx);
            }
        }
        // the listed-order convention
        assert_eq!(pos(4, 1), 0);
        assert_eq!(pos(4, 2), 1);
        assert_eq!(pos(4, -1), 2);
        assert_eq!(pos(4, -2), 3);
        assert_eq!(pos(5, 0), 0);
        assert_eq!(pos(5, 1), 1);
        assert_eq!(pos(5, -1), 3);
        assert_eq!(pos(5, -2), 4);
    }

    #[test]
    fn conj_transpose_examples() {
        let s = f9();
        let i4 = Mat::identity(&s, 4);
        assert_eq!(i4.conj_transpose(), i4);
        let form = HermitianForm::split(&s, 4).unwrap();
        assert_eq!(form.matrix().conj_transpose(), *form.matrix());
        let u = s.gen_k();
        let mut x = Mat::zeros(&s, 2);
        x[(0, 0)] = u.clone();
        x[(1, 0)] = s.one();
        let xt = x.conj_transpose();
        assert_eq!(xt[(0, 0)], u.conj());
        assert_eq!(xt[(0, 1)], s.one());
        assert!(xt[(1, 0)].is_zero());
        assert!(xt[(1, 1)].is_zero());
    }

    #[test]
    fn beta_is_unitary_and_involutive() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        let b = form.matrix();
        assert!(b.mul(b).is_identity());
        assert!(is_unitary(b, &form));
        assert!(is_unitary(&Mat::identity(&s, 4), &form));
        // diag(ζ, 1, 1, 1) is not unitary
        let mut m = Mat::identity(&s, 4);
        m[(0, 0)] = s.zeta();
        assert!(!is_unitary(&m, &form));
    }

    #[test]
    fn det_against_cofactor_oracle() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        assert!(det_oracle(form.matrix()).is_one());
        assert!(form.matrix().det().is_one());
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut m = Mat::zeros(&s, 4);
            for r in 0..4 {
                for c in 0..4 {
                    m[(r, c)] = s.random_elem(&mut rng);
                }
            }
            assert_eq!(m.det(), det_oracle(&m));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let s = f9();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let mut m = Mat::zeros(&s, 4);
            for r in 0..4 {
                for c in 0..4 {
                    m[(r, c)] = s.random_elem(&mut rng);
                }
            }
            match m.inverse() {
                Ok(inv) => {
                    assert!(m.mul(&inv).is_identity());
                    assert!(inv.mul(&m).is_identity());
                    done += 1;
                }
                Err(Error::SingularMatrix) => assert!(m.det().is_zero()),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn similitude_examples() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        assert_eq!(similitude_multiplier(&Mat::identity(&s, 4), &form), Some(s.one()));
        // diag(2, 2, 1, 1) has multiplier 2
        let mut m = Mat::identity(&s, 4);
        m.set(1, 1, s.int(2));
        m.set(2, 2, s.int(2));
        assert_eq!(similitude_multiplier(&m, &form), Some(s.int(2)));
        // diag(ζ, 1, 1, 1) is not a similitude
        let mut m = Mat::identity(&s, 4);
        m[(0, 0)] = s.zeta();
        assert_eq!(similitude_multiplier(&m, &form), None);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let s = f9();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for d in [4usize, 5] {
            let form = HermitianForm::split(&s, d).unwrap();
            for _ in 0..50 {
                let g = random_unitary(&form, &mut rng, 40);
                assert!(is_unitary(&g, &form));
                assert!(g.det().is_norm_one(), "unitary determinants have norm one");
            }
        }
    }

    #[test]
    fn unitary_group_closure() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..100 {
            let a = random_unitary(&form, &mut rng, 30);
            let b = random_unitary(&form, &mut rng, 30);
            assert!(is_unitary(&a.mul(&b), &form));
            assert!(is_unitary(&a.inverse().unwrap(), &form));
        }
    }

    #[test]
    fn similitude_multiplier_is_multiplicative() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = random_similitude(&form, &mut rng, 20);
            let b = random_similitude(&form, &mut rng, 20);
            let ma = similitude_multiplier(&a, &form).unwrap();
            let mb = similitude_multiplier(&b, &form).unwrap();
            assert_eq!(similitude_multiplier(&a.mul(&b), &form), Some(&ma * &mb));
        }
    }

    #[test]
    fn odd_form_needs_odd_characteristic() {
        let s2 = FieldSpec::new(2, 1).unwrap();
        assert!(matches!(HermitianForm::split(&s2, 5), Err(Error::UnsupportedParity)));
        assert!(HermitianForm::split(&s2, 4).is_ok());
    }
}
