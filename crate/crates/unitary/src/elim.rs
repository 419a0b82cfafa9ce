//! Row/column elimination in the split unitary group.
//!
//! [`decompose`] rewrites any unitary matrix g as
//! `evaluate(left) · g · evaluate(right) = Δ`, where `left`/`right` are
//! words of elementary letters and Δ is the normal-form diagonal: all ones
//! except a single scale λ at position l and σ(λ)⁻¹ at -l (plus a
//! norm-one entry α at position 0 in odd dimension). The letters all have
//! determinant 1, so λ·σ(λ)⁻¹ = det g in even dimension and
//! α·λ·σ(λ)⁻¹ = det g in odd dimension.
//!
//! The elimination proceeds block-wise. For even d = 2l, with blocks
//! `[[A, B], [C, D]]` of size l:
//!
//! 1. diagonalize A with row/column transvections, normalizing the
//!    diagonal to (1, …, 1, λ), or to (1, …, 1, 0, …, 0) when A is
//!    singular;
//! 2. clear C by lower-left letters (the needed coefficient matrix is
//!    skew-Hermitian because ᵀC̄A + ᵀĀC = 0 for any unitary g); in the
//!    singular case only the first m columns clear, after which row
//!    interchanges move the invertible remainder of C into A and the
//!    diagonalization resumes;
//! 3. the lower-right block is then forced to be ᵀĀ⁻¹, and B clears by
//!    upper-right letters the same way.
//!
//! Odd dimension interleaves two extra sweeps that clear the border row X
//! and border column E through the index-0 letters; the border entries Y
//! and F then vanish automatically and α picks up a norm-one value.
//!
//! Every mutation of the working matrix goes through a letter, so the
//! output words are correct by construction; debug builds additionally
//! assert the intermediate block structure at each step boundary.

use crate::gens::{row_interchange, Letter, Word};
use crate::gf::{discrete_log, solve_norm, FieldElem, FieldSpec};
use crate::linalg::{half, is_unitary, HermitianForm, Mat};
use crate::{Error, Result};

pub mod structure;

/// The data of the normal-form diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagForm {
    pub lambda: FieldElem,
    /// Present exactly in odd dimension; always norm-one.
    pub alpha: Option<FieldElem>,
}

/// Output of [`decompose`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub left: Word,
    pub right: Word,
    pub diag: DiagForm,
    pub d: usize,
}

impl Decomposition {
    /// Re-multiplies the words against `g` and compares with the diagonal.
    pub fn verify(&self, g: &Mat) -> bool {
        let spec = g.spec();
        let lhs = self.left.evaluate(spec).mul(g).mul(&self.right.evaluate(spec));
        match diag_matrix(spec, &self.diag, self.d) {
            Ok(m) => lhs == m,
            Err(_) => false,
        }
    }

    pub fn letter_count(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

/// The normal-form diagonal matrix for the given data.
pub fn diag_matrix(spec: &FieldSpec, df: &DiagForm, d: usize) -> Result<Mat> {
    if df.lambda.is_zero() {
        return Err(Error::InvalidDiagForm("lambda must be nonzero".into()));
    }
    match (&df.alpha, d.is_multiple_of(2)) {
        (None, true) => {}
        (Some(a), false) => {
            if !a.is_norm_one() {
                return Err(Error::InvalidDiagForm("alpha must have norm one".into()));
            }
        }
        (Some(_), true) => {
            return Err(Error::InvalidDiagForm("alpha given for even dimension".into()))
        }
        (None, false) => return Err(Error::InvalidDiagForm("alpha missing for odd dimension".into())),
    }
    let l = half(d) as i32;
    let mut m = Mat::identity(spec, d);
    m.set(l, l, df.lambda.clone());
    m.set(-l, -l, df.lambda.conj().inverse().expect("nonzero"));
    if let Some(a) = &df.alpha {
        m.set(0, 0, a.clone());
    }
    Ok(m)
}

// ---------------------------------------------------------------------------

struct Reducer {
    m: Mat,
    /// Letters applied on the left so far, in application order.
    left: Vec<Letter>,
    /// Letters applied on the right so far, in application order.
    right: Vec<Letter>,
    l: u32,
    spec: FieldSpec,
}

impl Reducer {
    fn new(g: &Mat) -> Reducer {
        Reducer {
            m: g.clone(),
            left: Vec::new(),
            right: Vec::new(),
            l: half(g.d()) as u32,
            spec: g.spec().clone(),
        }
    }

    fn d(&self) -> usize {
        self.m.d()
    }

    fn lmul(&mut self, x: Letter) {
        x.apply_left(&mut self.m);
        self.left.push(x);
    }

    fn rmul(&mut self, x: Letter) {
        x.apply_right(&mut self.m);
        self.right.push(x);
    }

    /// Left-multiplies by a whole word (innermost letter first).
    fn lmul_word(&mut self, w: &Word) {
        for x in w.letters().iter().rev() {
            self.lmul(x.clone());
        }
    }

    fn a(&self, i: u32, j: u32) -> FieldElem {
        self.m.at(i as i32, j as i32).clone()
    }

    fn c(&self, i: u32, j: u32) -> FieldElem {
        self.m.at(-(i as i32), j as i32).clone()
    }

    fn b(&self, i: u32, j: u32) -> FieldElem {
        self.m.at(i as i32, -(j as i32)).clone()
    }

    /// Row transvection inside A: row i += t · row j.
    fn e1_left(&mut self, i: u32, j: u32, t: FieldElem) {
        if !t.is_zero() {
            self.lmul(Letter::Xij { i, j, t });
        }
    }

    /// Column transvection inside A: col j += t · col i.
    fn e1_right(&mut self, i: u32, j: u32, t: FieldElem) {
        if !t.is_zero() {
            self.rmul(Letter::Xij { i, j, t });
        }
    }

    /// Brings the A block to diagonal form on positions `from..=l` by
    /// transvections only, with deterministic pivoting: the current column
    /// is scanned top-down; if it is entirely zero, the first later column
    /// with support is borrowed into it, and when the whole remaining
    /// submatrix is zero the rank is exhausted. Returns the rank found.
    fn diagonalize_a(&mut self, from: u32) -> u32 {
        let l = self.l;
        for k in from..=l {
            if self.a(k, k).is_zero() {
                if let Some(r) = ((k + 1)..=l).find(|&r| !self.a(r, k).is_zero()) {
                    self.e1_left(k, r, self.spec.one());
                } else {
                    let col = ((k + 1)..=l).find(|&c| (k..=l).any(|r| !self.a(r, c).is_zero()));
                    match col {
                        Some(c) => {
                            self.e1_right(c, k, self.spec.one());
                            if self.a(k, k).is_zero() {
                                let r = ((k + 1)..=l)
                                    .find(|&r| !self.a(r, k).is_zero())
                                    .expect("borrowed column has support");
                                self.e1_left(k, r, self.spec.one());
                            }
                        }
                        None => return k - 1,
                    }
                }
            }
            let pinv = self.a(k, k).inverse().expect("pivot nonzero");
            for r in (k + 1)..=l {
                let v = self.a(r, k);
                if !v.is_zero() {
                    self.e1_left(r, k, -&(&v * &pinv));
                }
            }
            for c in (k + 1)..=l {
                let v = self.a(k, c);
                if !v.is_zero() {
                    self.e1_right(k, c, -&(&v * &pinv));
                }
            }
        }
        l
    }

    /// Folds each diagonal entry of A on `from..l` into its successor so
    /// that the leading entries become 1 and the product collects at l.
    fn normalize_chain(&mut self, from: u32) {
        let one = self.spec.one();
        for k in from..self.l {
            let a = self.a(k, k);
            if a.is_one() {
                continue;
            }
            let b = self.a(k + 1, k + 1);
            let binv = b.inverse().expect("nonzero diagonal");
            self.e1_left(k, k + 1, &(&one - &a) * &binv);
            self.e1_right(k + 1, k, one.clone());
            self.e1_left(k + 1, k, -&b);
            self.e1_right(k, k + 1, -&(&one - &a));
        }
    }

    /// Rewrites diag(d₁,…,d_m, 0,…,0) as diag(1,…,1,0,…,0) using the first
    /// zero row as scratch space; three transvections per entry.
    fn normalize_with_zero_row(&mut self, rank: u32) {
        debug_assert!(rank < self.l);
        let z = rank + 1;
        let one = self.spec.one();
        for k in 1..=rank {
            let a = self.a(k, k);
            if a.is_one() {
                continue;
            }
            self.e1_left(z, k, a.inverse().expect("nonzero"));
            self.e1_left(k, z, &one - &a);
            self.e1_left(z, k, -&one);
        }
    }

    /// Emits lower-left letters for the skew coefficient matrix R, read
    /// entrywise: x_{-i,j}(R[i,j]) for i < j and x_{-i,i}(R[i,i]).
    fn emit_lower(&mut self, r_mat: &[Vec<FieldElem>]) {
        let l = self.l as usize;
        for bi in 0..l {
            for bj in (bi + 1)..l {
                let t = r_mat[bi][bj].clone();
                debug_assert_eq!(r_mat[bj][bi], -&t.conj(), "coefficient matrix must be skew");
                if !t.is_zero() {
                    self.lmul(Letter::XNegIj { i: bi as u32 + 1, j: bj as u32 + 1, t });
                }
            }
            let s = r_mat[bi][bi].clone();
            if !s.is_zero() {
                debug_assert!(s.is_skew());
                self.lmul(Letter::XNegIi { i: bi as u32 + 1, s });
            }
        }
    }

    /// Same splitting with upper-right letters.
    fn emit_upper(&mut self, r_mat: &[Vec<FieldElem>]) {
        let l = self.l as usize;
        for bi in 0..l {
            for bj in (bi + 1)..l {
                let t = r_mat[bi][bj].clone();
                debug_assert_eq!(r_mat[bj][bi], -&t.conj(), "coefficient matrix must be skew");
                if !t.is_zero() {
                    self.lmul(Letter::XiNegJ { i: bi as u32 + 1, j: bj as u32 + 1, t });
                }
            }
            let s = r_mat[bi][bi].clone();
            if !s.is_zero() {
                debug_assert!(s.is_skew());
                self.lmul(Letter::XiNegI { i: bi as u32 + 1, s });
            }
        }
    }

    /// Clears all of C against an invertible diagonal A: C += R·A with
    /// R = -C·A⁻¹, skew because ᵀC̄A + ᵀĀC = 0.
    fn clear_c_full(&mut self) {
        let l = self.l;
        let dinv: Vec<FieldElem> =
            (1..=l).map(|j| self.a(j, j).inverse().expect("invertible diagonal")).collect();
        let r_mat: Vec<Vec<FieldElem>> = (1..=l)
            .map(|bi| (1..=l).map(|bj| -&(&self.c(bi, bj) * &dinv[(bj - 1) as usize])).collect())
            .collect();
        self.emit_lower(&r_mat);
    }

    /// Clears the first `rank` columns of C when A = diag(1,…,1,0,…,0):
    /// R = [[-C₁₁, ᵀC̄₂₁], [-C₂₁, 0]] is skew because C₁₁ is.
    fn clear_c_cols(&mut self, rank: u32) {
        let l = self.l;
        let mut r_mat = vec![vec![self.spec.zero(); l as usize]; l as usize];
        for bi in 1..=l {
            for bj in 1..=rank {
                r_mat[(bi - 1) as usize][(bj - 1) as usize] = -&self.c(bi, bj);
            }
        }
        for bi in 1..=rank {
            for bj in (rank + 1)..=l {
                r_mat[(bi - 1) as usize][(bj - 1) as usize] = self.c(bj, bi).conj();
            }
        }
        self.emit_lower(&r_mat);
    }

    /// Clears B against an invertible diagonal A with the lower-right
    /// block already forced to ᵀĀ⁻¹: B += R·D with R = -B·Ā.
    fn clear_b(&mut self) {
        let l = self.l;
        let dbar: Vec<FieldElem> = (1..=l).map(|j| self.a(j, j).conj()).collect();
        let r_mat: Vec<Vec<FieldElem>> = (1..=l)
            .map(|bi| (1..=l).map(|bj| -&(&self.b(bi, bj) * &dbar[(bj - 1) as usize])).collect())
            .collect();
        self.emit_upper(&r_mat);
    }

    /// Interchanges rows i and -i (parameter ε) for every i in the range.
    fn swap_rows(&mut self, from: u32) -> Result<()> {
        let eps = self.spec.epsilon();
        for i in from..=self.l {
            let w = row_interchange(self.d(), i, &eps)?;
            self.lmul_word(&w);
        }
        Ok(())
    }

    /// Odd dimension: zeroes the border-row entries X₁..X_upto through
    /// index-0 letters on the left (needs those diagonal entries nonzero).
    fn clear_x(&mut self, upto: u32) {
        for i in 1..=upto {
            let x = self.m.at(0, i as i32).clone();
            if x.is_zero() {
                continue;
            }
            let t = -&(&x * &self.a(i, i).inverse().expect("nonzero diagonal"));
            self.lmul(Letter::X0i { i, t });
        }
    }

    /// Odd dimension: zeroes the border-column entries E₁..E_upto through
    /// index-0 letters on the right. Requires X already cleared so the
    /// corner entry stays put.
    fn clear_e(&mut self, upto: u32) {
        let two_inv = self.spec.int(2).inverse().expect("odd characteristic");
        for i in 1..=upto {
            let e = self.m.at(i as i32, 0).clone();
            if e.is_zero() {
                continue;
            }
            let t = (&(&e * &two_inv) * &self.a(i, i).inverse().expect("nonzero diagonal")).conj();
            self.rmul(Letter::Xi0 { i, t });
        }
    }

    /// Even step 1: brings A to diag(1,…,1,λ) or diag(1,…,1,0,…,0);
    /// returns the rank of A.
    fn step1_even(&mut self) -> u32 {
        let rank = self.diagonalize_a(1);
        if rank < self.l {
            self.normalize_with_zero_row(rank);
        } else {
            self.normalize_chain(1);
        }
        rank
    }

    /// Even step 2: clears C. In the full-rank case one sweep of
    /// lower-left letters suffices; otherwise the cleared leading columns
    /// are followed by row interchanges that pull the invertible trailing
    /// block of C into A, and the diagonalization resumes there.
    fn step2_even(&mut self, rank: u32) -> Result<()> {
        let l = self.l;
        if rank < l {
            #[cfg(debug_assertions)]
            self.check_c_shape_singular(rank);
            self.clear_c_cols(rank);
            self.swap_rows(rank + 1)?;
            let r2 = self.diagonalize_a(rank + 1);
            debug_assert_eq!(r2, l, "input invertibility bounds the deficiency");
            self.normalize_chain(rank + 1);
        } else {
            #[cfg(debug_assertions)]
            self.check_c_shape_invertible();
            self.clear_c_full();
        }
        Ok(())
    }

    /// Even step 3: clears B; the lower-right block is already ᵀĀ⁻¹.
    fn step3_even(&mut self) {
        #[cfg(debug_assertions)]
        self.check_c_zero_and_d_forced();
        self.clear_b();
    }

    fn run_even(&mut self) -> Result<()> {
        let rank = self.step1_even();
        self.step2_even(rank)?;
        self.step3_even();
        Ok(())
    }

    /// Odd step 1: same diagonalization of A as the even case.
    fn step1_odd(&mut self) -> u32 {
        let rank = self.diagonalize_a(1);
        if rank < self.l {
            self.normalize_with_zero_row(rank);
        } else {
            self.normalize_chain(1);
        }
        rank
    }

    /// Odd step 2: clears the border row and border column across the
    /// nonzero diagonal positions; with a singular A the rest of the
    /// border row then vanishes on its own.
    fn step2_odd(&mut self, rank: u32) {
        self.clear_x(rank);
        self.clear_e(rank);
        #[cfg(debug_assertions)]
        for i in 1..=self.l {
            debug_assert!(self.m.at(0, i as i32).is_zero(), "border row must vanish");
        }
    }

    /// Odd step 3: clears C, interchanging trailing rows in the singular
    /// case exactly as in the even algorithm.
    fn step3_odd(&mut self, rank: u32) -> Result<()> {
        if rank < self.l {
            #[cfg(debug_assertions)]
            self.check_c_shape_singular(rank);
            self.clear_c_cols(rank);
            self.swap_rows(rank + 1)?;
        } else {
            #[cfg(debug_assertions)]
            self.check_c_shape_invertible();
            self.clear_c_full();
        }
        Ok(())
    }

    /// Odd step 4: after interchanges A regained full rank; re-diagonalize
    /// and clear the border column again. The remaining borders vanish by
    /// the structure of the group and the corner entry has norm one.
    fn step4_odd(&mut self, rank: u32) {
        if rank < self.l {
            let r2 = self.diagonalize_a(rank + 1);
            debug_assert_eq!(r2, self.l, "input invertibility bounds the deficiency");
            self.normalize_chain(rank + 1);
            self.clear_e(self.l);
        }
        #[cfg(debug_assertions)]
        self.check_odd_diagonal_stage();
    }

    /// Odd step 5: clears B.
    fn step5_odd(&mut self) {
        self.clear_b();
    }

    fn run_odd(&mut self) -> Result<()> {
        let rank = self.step1_odd();
        self.step2_odd(rank);
        self.step3_odd(rank)?;
        self.step4_odd(rank);
        self.step5_odd();
        Ok(())
    }

    // ---- debug-build structural checks at step boundaries -----------------

    #[cfg(debug_assertions)]
    fn check_c_shape_invertible(&self) {
        // with A diagonal (and, in odd dimension, the border row zero),
        // ĀC is skew-Hermitian, which pins the C block shape
        let l = self.l;
        for bi in 1..=l {
            for bj in 1..=l {
                let lhs = &self.a(bi, bi).conj() * &self.c(bi, bj);
                let rhs = -&(&self.a(bj, bj).conj() * &self.c(bj, bi)).conj();
                debug_assert_eq!(lhs, rhs, "ĀC must be skew-Hermitian");
            }
        }
    }

    #[cfg(debug_assertions)]
    fn check_c_shape_singular(&self, rank: u32) {
        let l = self.l;
        // C₁₂ = 0 and C₁₁ skew when A = diag(1,…,1,0,…,0)
        for bi in 1..=rank {
            for bj in (rank + 1)..=l {
                debug_assert!(self.c(bi, bj).is_zero(), "upper-right of C must vanish");
            }
            for bj in 1..=rank {
                debug_assert_eq!(self.c(bi, bj), -&self.c(bj, bi).conj(), "C₁₁ must be skew");
            }
        }
    }

    #[cfg(debug_assertions)]
    fn check_c_zero_and_d_forced(&self) {
        let l = self.l;
        for bi in 1..=l {
            for bj in 1..=l {
                debug_assert!(self.c(bi, bj).is_zero(), "C must be zero");
                let d = self.m.at(-(bi as i32), -(bj as i32));
                let expect = if bi == bj {
                    self.a(bi, bi).conj().inverse().expect("nonzero")
                } else {
                    self.spec.zero()
                };
                debug_assert_eq!(*d, expect, "lower-right block must be ᵀĀ⁻¹");
            }
        }
        // A⁻¹B is skew-Hermitian at this stage
        for bi in 1..=l {
            for bj in 1..=l {
                let lhs = &self.a(bi, bi).inverse().unwrap() * &self.b(bi, bj);
                let rhs = -&(&self.a(bj, bj).inverse().unwrap() * &self.b(bj, bi)).conj();
                debug_assert_eq!(lhs, rhs, "A⁻¹B must be skew-Hermitian");
            }
        }
    }

    #[cfg(debug_assertions)]
    fn check_odd_diagonal_stage(&self) {
        let l = self.l as i32;
        let alpha = self.m.at(0, 0);
        debug_assert!(alpha.is_norm_one(), "corner entry must have norm one");
        for i in 1..=l {
            debug_assert!(self.m.at(0, i).is_zero(), "border row must be zero");
            debug_assert!(self.m.at(0, -i).is_zero(), "upper border must be zero");
            debug_assert!(self.m.at(i, 0).is_zero(), "border column must be zero");
            debug_assert!(self.m.at(-i, 0).is_zero(), "lower border must be zero");
        }
        self.check_c_zero_and_d_forced();
    }
}

/// Decomposes a unitary matrix into left/right elementary words and the
/// normal-form diagonal. O(l³) field multiplications; the two words
/// together never exceed 4·d² letters.
pub fn decompose(g: &Mat) -> Result<Decomposition> {
    let d = g.d();
    if d < 4 {
        return Err(Error::DimensionTooSmall(d));
    }
    let form = HermitianForm::split(g.spec(), d)?;
    if !is_unitary(g, &form) {
        return Err(Error::NotUnitary);
    }
    let mut red = Reducer::new(g);
    if d.is_multiple_of(2) {
        red.run_even()?;
    } else {
        red.run_odd()?;
    }
    let l = red.l;
    let lambda = red.a(l, l);
    let alpha = if d % 2 == 1 { Some(red.m.at(0, 0).clone()) } else { None };
    let diag = DiagForm { lambda, alpha };
    debug_assert_eq!(red.m, diag_matrix(g.spec(), &diag, d)?, "reduction must land on the diagonal");
    Ok(Decomposition {
        left: Word::new(d, red.left.into_iter().rev().collect()),
        right: Word::new(d, red.right),
        diag,
        d,
    })
}

/// A single word (elementary plus torus letters) evaluating to g exactly:
/// inverse(left) ++ torus letters for the diagonal ++ inverse(right).
pub fn word_for(g: &Mat) -> Result<Word> {
    let spec = g.spec().clone();
    let dec = decompose(g)?;
    let mut mid = Word::empty(dec.d);
    if let Some(alpha) = &dec.diag.alpha {
        let j = discrete_log(&spec.zeta1(), alpha).map_err(|e| match e {
            // cannot occur for valid unitary inputs
            Error::TargetNotInSubgroup => {
                Error::InvalidDiagForm("alpha outside the norm-one subgroup".into())
            }
            other => other,
        })?;
        if j != 0 {
            mid.push(Letter::TorusZeta1 { k: j as i64 });
        }
    }
    let k = discrete_log(&spec.zeta(), &dec.diag.lambda)?;
    if k != 0 {
        mid.push(Letter::TorusZeta { k: k as i64 });
    }
    Ok(dec.left.inverse().concat(mid).concat(dec.right.inverse()))
}

/// Word of elementary letters (only) evaluating to the determinant-one
/// diagonal with b at position l, σ(b)⁻¹ at -l and, in odd dimension,
/// σ(b)/b at position 0. For even dimension b must lie in F_q, which is
/// exactly when such a diagonal has determinant one.
///
/// The construction works inside the rank-one subgroup on positions
/// (0, l, -l): with c = b·ε and a norm solution t·σ(t) = -(c + σ(c))/2,
/// the product
///   u⁺(t, c) · u⁻(-t·σ(c)⁻¹, σ(c)⁻¹) · u⁺(t·c·σ(c)⁻¹, c)
/// is the monomial matrix with -σ(c)/c at 0, c at (l,-l) and σ(c)⁻¹ at
/// (-l,l); multiplying by the inverse of the ε-interchange leaves the
/// wanted diagonal. Here u⁺(t, c) = x_{l,0}(t)·x_{l,-l}(c + t·σ(t)) and
/// u⁻ is its lower mirror.
pub fn su_diag_word(spec: &FieldSpec, d: usize, b: &FieldElem) -> Result<Word> {
    if b.is_zero() {
        return Err(Error::InvalidDiagForm("diagonal scale must be nonzero".into()));
    }
    let l = half(d) as u32;
    if d.is_multiple_of(2) && b.conj() != *b {
        return Err(Error::InvalidDiagForm("even dimension needs a base-field scale".into()));
    }
    let eps = spec.epsilon();
    let c = b * &eps;
    let t = if d % 2 == 1 {
        let tr = &c + &c.conj();
        let two_inv = spec.int(2).inverse().expect("odd characteristic");
        solve_norm(spec, &-&(&tr * &two_inv))?
    } else {
        spec.zero()
    };
    let mut letters = Vec::new();
    let push_upper = |letters: &mut Vec<Letter>, t: &FieldElem, c: &FieldElem| {
        if !t.is_zero() {
            letters.push(Letter::Xi0 { i: l, t: t.clone() });
        }
        let s = c + &(t * &t.conj());
        debug_assert!(s.is_skew());
        if !s.is_zero() {
            letters.push(Letter::XiNegI { i: l, s });
        }
    };
    let push_lower = |letters: &mut Vec<Letter>, t: &FieldElem, c: &FieldElem| {
        if !t.is_zero() {
            letters.push(Letter::X0i { i: l, t: t.clone() });
        }
        let s = c + &(t * &t.conj());
        debug_assert!(s.is_skew());
        if !s.is_zero() {
            letters.push(Letter::XNegIi { i: l, s });
        }
    };
    let cbar_inv = c.conj().inverse().expect("nonzero");
    push_upper(&mut letters, &t, &c);
    push_lower(&mut letters, &-&(&t * &cbar_inv), &cbar_inv);
    push_upper(&mut letters, &(&t * &(&c * &cbar_inv)), &c);
    // times w_{l,-l}(ε)⁻¹ = w_{l,-l}(-ε)
    let tail = row_interchange(d, l, &-&eps)?;
    let w = Word::new(d, letters).concat(tail);
    debug_assert!({
        let mut expect = Mat::identity(spec, d);
        expect.set(l as i32, l as i32, b.clone());
        expect.set(-(l as i32), -(l as i32), b.conj().inverse().expect("nonzero"));
        if d % 2 == 1 {
            expect.set(0, 0, &b.conj() * &b.inverse().expect("nonzero"));
        }
        w.evaluate(spec) == expect
    });
    Ok(w)
}

/// Reduces a determinant-one unitary matrix to the identity: returns a
/// word of elementary letters with evaluate(word) = g. In even dimension
/// the word certifies that the elementary letters alone generate the
/// special unitary group; odd dimension goes through the rank-one
/// diagonal word (determinant one forces the corner entry to equal
/// σ(λ)/λ, so no torus letter is needed either).
pub fn reduce_su_to_identity(g: &Mat) -> Result<Word> {
    if !g.det().is_one() {
        return Err(Error::NotSpecialUnitary);
    }
    let spec = g.spec().clone();
    let dec = decompose(g)?;
    let lambda = &dec.diag.lambda;
    let trivial = lambda.is_one() && dec.diag.alpha.as_ref().is_none_or(|a| a.is_one());
    let tail = if trivial {
        Word::empty(dec.d)
    } else {
        if let Some(alpha) = &dec.diag.alpha {
            debug_assert_eq!(*alpha, &lambda.conj() * &lambda.inverse().expect("nonzero"));
        } else {
            debug_assert_eq!(lambda.conj(), *lambda, "determinant one forces a base-field scale");
        }
        su_diag_word(&spec, dec.d, lambda)?
    };
    Ok(dec.left.inverse().concat(tail).concat(dec.right.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gens::{apply_left, apply_right, Letter, Word};
    use crate::gf::{mult_count, reset_mult_count, FieldSpec};
    use crate::linalg::{is_unitary, random_unitary, HermitianForm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn f9() -> FieldSpec {
        FieldSpec::new(3, 1).unwrap()
    }

    #[test]
    fn diag_matrix_examples() {
        let s = f9();
        let one = DiagForm { lambda: s.one(), alpha: None };
        assert!(diag_matrix(&s, &one, 4).unwrap().is_identity());
        let zeta = DiagForm { lambda: s.zeta(), alpha: None };
        let m = diag_matrix(&s, &zeta, 4).unwrap();
        assert_eq!(m[(1, 1)], s.zeta());
        assert_eq!(m[(3, 3)], s.zeta().conj().inverse().unwrap());
        assert!(m[(0, 0)].is_one());
        // unitary for every lambda and norm-one alpha
        let form4 = HermitianForm::split(&s, 4).unwrap();
        let form5 = HermitianForm::split(&s, 5).unwrap();
        for lam in s.all_elements() {
            if lam.is_zero() {
                continue;
            }
            let m = diag_matrix(&s, &DiagForm { lambda: lam.clone(), alpha: None }, 4).unwrap();
            assert!(is_unitary(&m, &form4));
            for al in s.all_elements().into_iter().filter(|a| a.is_norm_one()) {
                let m =
                    diag_matrix(&s, &DiagForm { lambda: lam.clone(), alpha: Some(al) }, 5).unwrap();
                assert!(is_unitary(&m, &form5));
            }
        }
    }

    #[test]
    fn diag_matrix_rejects_bad_data() {
        let s = f9();
        assert!(diag_matrix(&s, &DiagForm { lambda: s.zero(), alpha: None }, 4).is_err());
        assert!(diag_matrix(&s, &DiagForm { lambda: s.one(), alpha: None }, 5).is_err());
        // ζ is not norm-one (its norm generates the base units)
        assert!(diag_matrix(&s, &DiagForm { lambda: s.one(), alpha: Some(s.zeta()) }, 5).is_err());
    }

    #[test]
    fn decompose_identity_and_fixed_points() {
        let s = f9();
        for d in [4usize, 5] {
            let dec = decompose(&Mat::identity(&s, d)).unwrap();
            assert!(dec.left.is_empty());
            assert!(dec.right.is_empty());
            assert!(dec.diag.lambda.is_one());
            if d % 2 == 1 {
                assert!(dec.diag.alpha.as_ref().unwrap().is_one());
            }
        }
        // a normal-form diagonal is a fixed point
        let df = DiagForm { lambda: s.zeta(), alpha: None };
        let m = diag_matrix(&s, &df, 4).unwrap();
        let dec = decompose(&m).unwrap();
        assert!(dec.left.is_empty() && dec.right.is_empty());
        assert_eq!(dec.diag.lambda, s.zeta());
    }

    #[test]
    fn decompose_single_lower_letter() {
        let s = f9();
        let u = s.gen_k();
        let x = Letter::XNegIi { i: 1, s: u.clone() };
        let g = x.matrix(&s, 4).unwrap();
        let dec = decompose(&g).unwrap();
        assert_eq!(dec.left.letters(), &[Letter::XNegIi { i: 1, s: -&u }]);
        assert!(dec.right.is_empty());
        assert!(dec.diag.lambda.is_one());
        assert!(dec.verify(&g));
    }

    #[test]
    fn decompose_round_trip_small() {
        for (p, dims) in [(3u64, [4usize, 5]), (7, [8, 9])] {
            let s = FieldSpec::new(p, 1).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(2024);
            for d in dims {
                let form = HermitianForm::split(&s, d).unwrap();
                for _ in 0..60 {
                    let g = random_unitary(&form, &mut rng, 10 * d * d);
                    let dec = decompose(&g).unwrap();
                    assert!(dec.verify(&g), "round trip failed at d={d} q={}", s.q());
                    // determinant identities
                    let det = g.det();
                    let lam = &dec.diag.lambda;
                    let ratio = lam * &lam.conj().inverse().unwrap();
                    match &dec.diag.alpha {
                        None => assert_eq!(ratio, det),
                        Some(a) => {
                            assert!(a.is_norm_one());
                            assert_eq!(a * &ratio, det);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_exercises_singular_a_block() {
        // the split form matrix itself has A = 0
        let s = f9();
        {
            let d = 4usize;
            let form = HermitianForm::split(&s, d).unwrap();
            let g = form.matrix().clone();
            assert!(is_unitary(&g, &form));
            let dec = decompose(&g).unwrap();
            assert!(dec.verify(&g));
        }
        // short random words often leave singular A blocks
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for d in [4usize, 5] {
            let form = HermitianForm::split(&s, d).unwrap();
            for _ in 0..300 {
                let g = random_unitary(&form, &mut rng, 6);
                let dec = decompose(&g).unwrap();
                assert!(dec.verify(&g));
            }
        }
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        let s = f9();
        let mut m = Mat::identity(&s, 4);
        m[(0, 0)] = s.zeta();
        assert!(matches!(decompose(&m), Err(Error::NotUnitary)));
        assert!(matches!(decompose(&Mat::identity(&s, 2)), Err(Error::DimensionTooSmall(2))));
        let s2 = FieldSpec::new(2, 1).unwrap();
        assert!(matches!(decompose(&Mat::identity(&s2, 5)), Err(Error::UnsupportedParity)));
    }

    #[test]
    fn characteristic_two_even_dimension() {
        for e in [1usize, 2] {
            let s = FieldSpec::new(2, e).unwrap();
            let form = HermitianForm::split(&s, 4).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(e as u64);
            for _ in 0..50 {
                let g = random_unitary(&form, &mut rng, 120);
                let dec = decompose(&g).unwrap();
                assert!(dec.verify(&g));
            }
        }
    }

    #[test]
    fn word_for_examples() {
        let s = f9();
        assert!(word_for(&Mat::identity(&s, 4)).unwrap().is_empty());
        // h(ζ) is already diagonal: single torus letter with exponent 1
        let h = Letter::TorusZeta { k: 1 }.matrix(&s, 4).unwrap();
        let w = word_for(&h).unwrap();
        assert_eq!(w.letters(), &[Letter::TorusZeta { k: 1 }]);
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for d in [4usize, 5] {
            let form = HermitianForm::split(&s, d).unwrap();
            for _ in 0..60 {
                let g = random_unitary(&form, &mut rng, 10 * d * d);
                let w = word_for(&g).unwrap();
                assert_eq!(w.evaluate(&s), g);
            }
        }
    }

    #[test]
    fn su_diag_word_exhaustive() {
        let s = f9();
        // odd dimension: every nonzero scale
        for b in s.all_elements() {
            if b.is_zero() {
                continue;
            }
            let w = su_diag_word(&s, 5, &b).unwrap();
            let m = w.evaluate(&s);
            let mut expect = Mat::identity(&s, 5);
            expect.set(2, 2, b.clone());
            expect.set(-2, -2, b.conj().inverse().unwrap());
            expect.set(0, 0, &b.conj() * &b.inverse().unwrap());
            assert_eq!(m, expect);
            assert!(w.letters().iter().all(|x| !x.is_torus()));
        }
        // even dimension: base-field scales only
        for b in s.all_elements().into_iter().filter(|b| !b.is_zero() && b.is_base()) {
            let w = su_diag_word(&s, 4, &b).unwrap();
            let m = w.evaluate(&s);
            let mut expect = Mat::identity(&s, 4);
            expect.set(2, 2, b.clone());
            expect.set(-2, -2, b.inverse().unwrap());
            assert_eq!(m, expect);
        }
        assert!(su_diag_word(&s, 4, &s.gen_k()).is_err());
    }

    #[test]
    fn reduce_su_examples() {
        let s = f9();
        assert!(reduce_su_to_identity(&Mat::identity(&s, 4)).unwrap().is_empty());
        // diag(1, -1 | 1, -1) has λ = -1; the tail is the ε-interchange pair
        let g = diag_matrix(&s, &DiagForm { lambda: s.int(-1), alpha: None }, 4).unwrap();
        let w = reduce_su_to_identity(&g).unwrap();
        assert_eq!(w.evaluate(&s), g);
        let eps = s.epsilon();
        let mut expect = row_interchange(4, 2, &(&eps * &s.int(-1))).unwrap().letters().to_vec();
        expect.extend(row_interchange(4, 2, &-&eps).unwrap().letters().to_vec());
        assert_eq!(w.letters(), &expect[..]);
        // non-special inputs are rejected
        let bad = diag_matrix(&s, &DiagForm { lambda: s.zeta(), alpha: None }, 4).unwrap();
        assert!(matches!(reduce_su_to_identity(&bad), Err(Error::NotSpecialUnitary)));
    }

    #[test]
    fn reduce_su_round_trip_random_words() {
        let s = f9();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for d in [4usize, 5] {
            for _ in 0..60 {
                let letters: Vec<_> =
                    (0..50).map(|_| Letter::random_elementary(&s, d, &mut rng)).collect();
                let g = Word::new(d, letters).evaluate(&s);
                assert!(g.det().is_one());
                let w = reduce_su_to_identity(&g).unwrap();
                assert_eq!(w.evaluate(&s), g);
                if d % 2 == 0 {
                    assert!(w.letters().iter().all(|x| !x.is_torus()));
                }
            }
        }
    }

    #[test]
    fn word_length_is_quadratic_in_dimension() {
        // documented bound: at most 4·d² letters across both words, all
        // of them elementary
        let s = FieldSpec::new(7, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        for d in [4usize, 5, 8, 9] {
            let form = HermitianForm::split(&s, d).unwrap();
            for _ in 0..20 {
                let g = random_unitary(&form, &mut rng, 10 * d * d);
                let dec = decompose(&g).unwrap();
                assert!(
                    dec.letter_count() <= 4 * d * d,
                    "letter count {} beyond 4·d² at d={d}",
                    dec.letter_count()
                );
                assert!(dec.left.letters().iter().all(|x| !x.is_torus()));
                assert!(dec.right.letters().iter().all(|x| !x.is_torus()));
            }
        }
    }

    #[test]
    fn elimination_steps_have_their_postconditions() {
        let s = f9();
        let mut rng = ChaCha12Rng::seed_from_u64(404);
        // even dimension, l = 3
        let d = 6;
        let l = 3u32;
        let form = HermitianForm::split(&s, d).unwrap();
        for trial in 0..40 {
            let letters = if trial % 2 == 0 { 10 * d * d } else { 5 };
            let g = random_unitary(&form, &mut rng, letters);
            let mut red = Reducer::new(&g);
            let rank = red.step1_even();
            for i in 1..=l {
                for j in 1..=l {
                    if i != j {
                        assert!(red.a(i, j).is_zero(), "A must be diagonal after step 1");
                    }
                }
                if i < rank || (rank == l && i < l) {
                    assert!(red.a(i, i).is_one(), "leading diagonal entries are 1");
                }
                if i > rank {
                    assert!(red.a(i, i).is_zero(), "trailing entries vanish in the singular case");
                }
            }
            if rank == l {
                assert!(!red.a(l, l).is_zero());
            }
            red.step2_even(rank).unwrap();
            for i in 1..=l {
                for j in 1..=l {
                    assert!(red.c(i, j).is_zero(), "C must be zero after step 2");
                    let dd = red.m.at(-(i as i32), -(j as i32));
                    if i == j {
                        assert_eq!(*dd, red.a(i, i).conj().inverse().unwrap(), "D = ᵀĀ⁻¹");
                    } else {
                        assert!(dd.is_zero());
                    }
                }
            }
            red.step3_even();
            let lambda = red.a(l, l);
            assert_eq!(
                red.m,
                diag_matrix(&s, &DiagForm { lambda, alpha: None }, d).unwrap(),
                "step 3 must land on the normal form"
            );
        }
        // odd dimension, l = 3
        let d = 7;
        let form = HermitianForm::split(&s, d).unwrap();
        for trial in 0..40 {
            let letters = if trial % 2 == 0 { 10 * d * d } else { 5 };
            let g = random_unitary(&form, &mut rng, letters);
            let mut red = Reducer::new(&g);
            let rank = red.step1_odd();
            red.step2_odd(rank);
            for i in 1..=l as i32 {
                assert!(red.m.at(0, i).is_zero(), "border row vanishes after step 2");
                if (i as u32) <= rank {
                    assert!(red.m.at(i, 0).is_zero(), "leading border column entries vanish");
                }
            }
            red.step3_odd(rank).unwrap();
            for i in 1..=l {
                for j in 1..=l {
                    assert!(red.c(i, j).is_zero(), "C must be zero after step 3");
                }
            }
            red.step4_odd(rank);
            for i in 1..=l as i32 {
                assert!(red.m.at(i, 0).is_zero());
                assert!(red.m.at(-i, 0).is_zero());
                assert!(red.m.at(0, -i).is_zero());
            }
            assert!(red.m.at(0, 0).is_norm_one(), "corner entry has norm one");
            red.step5_odd();
            let lambda = red.a(l, l);
            let alpha = red.m.at(0, 0).clone();
            assert_eq!(
                red.m,
                diag_matrix(&s, &DiagForm { lambda, alpha: Some(alpha) }, d).unwrap()
            );
        }
    }

    #[test]
    fn multiplication_counts_grow_cubically() {
        let s = FieldSpec::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut counts = Vec::new();
        for l in [4usize, 8, 16] {
            let d = 2 * l;
            let form = HermitianForm::split(&s, d).unwrap();
            let trials = 3u64;
            let mut total = 0u64;
            for _ in 0..trials {
                let g = random_unitary(&form, &mut rng, 2 * d * d);
                reset_mult_count();
                let _ = decompose(&g).unwrap();
                total += mult_count();
            }
            counts.push(((l as f64).ln(), ((total / trials) as f64).ln()));
        }
        let n = counts.len() as f64;
        let sx: f64 = counts.iter().map(|(x, _)| x).sum();
        let sy: f64 = counts.iter().map(|(_, y)| y).sum();
        let sxx: f64 = counts.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = counts.iter().map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((2.0..4.0).contains(&slope), "rough cubic growth expected, slope {slope}");
    }

    #[test]
    fn left_word_order_is_reversed_application() {
        // replaying the words letter by letter reproduces the diagonal
        let s = f9();
        let mut rng = ChaCha12Rng::seed_from_u64(101);
        let form = HermitianForm::split(&s, 4).unwrap();
        let g = random_unitary(&form, &mut rng, 60);
        let dec = decompose(&g).unwrap();
        let mut acc = g.clone();
        for x in dec.left.letters().iter().rev() {
            acc = apply_left(x, &acc);
        }
        for x in dec.right.letters() {
            acc = apply_right(&acc, x);
        }
        assert_eq!(acc, diag_matrix(&s, &dec.diag, 4).unwrap());
    }
}
