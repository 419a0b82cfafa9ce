//! Block-structure facts behind the elimination, as executable checks.
//!
//! Each `check_*` function builds one random instance satisfying the
//! stated hypotheses (using letters and diagonal matrices only, never the
//! elimination itself) and asserts the conclusions exactly, panicking on
//! any violation. The test suites run them a few hundred times each.
//!
//! Shorthand used below: "skew" means ᵀM̄ = -M; blocks of an even-
//! dimension unitary matrix are `[[A, B], [C, D]]` with l×l pieces; odd
//! dimension adds the border row X (position 0, positive columns), border
//! row Y (negative columns), border columns E and F, and the corner α.

use crate::elim::{diag_matrix, DiagForm};
use crate::gens::{row_interchange_matrix, Letter};
use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::{half, is_unitary, HermitianForm, Mat};
use rand::Rng;

/// ᵀM̄ = -M, entrywise.
pub fn is_skew_hermitian(m: &Mat) -> bool {
    let d = m.d();
    for r in 0..d {
        for c in 0..d {
            if m[(r, c)] != -&m[(c, r)].conj() {
                return false;
            }
        }
    }
    true
}

/// Random l×l skew-Hermitian matrix.
pub fn random_skew<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) -> Mat {
    let mut m = Mat::zeros(spec, l);
    for i in 0..l {
        m[(i, i)] = spec.random_skew(rng);
        for j in (i + 1)..l {
            let t = spec.random_elem(rng);
            m[(i, j)] = t.clone();
            m[(j, i)] = -&t.conj();
        }
    }
    debug_assert!(is_skew_hermitian(&m));
    m
}

fn l_by_l(m: &Mat, d: usize, row_neg: bool, col_neg: bool) -> Mat {
    let l = half(d);
    let spec = m.spec().clone();
    let mut out = Mat::zeros(&spec, l);
    for i in 1..=l as i32 {
        for j in 1..=l as i32 {
            let r = if row_neg { -i } else { i };
            let c = if col_neg { -j } else { j };
            out[((i - 1) as usize, (j - 1) as usize)] = m.at(r, c).clone();
        }
    }
    out
}

fn block_a(m: &Mat) -> Mat {
    l_by_l(m, m.d(), false, false)
}

fn block_b(m: &Mat) -> Mat {
    l_by_l(m, m.d(), false, true)
}

fn block_c(m: &Mat) -> Mat {
    l_by_l(m, m.d(), true, false)
}

fn block_d(m: &Mat) -> Mat {
    l_by_l(m, m.d(), true, true)
}

// ---------------------------------------------------------------------------
// Instance generators. All products of letter matrices and a normal-form
// diagonal, assembled through `gens`, so they are independent of the
// elimination code they are used to cross-check.
// ---------------------------------------------------------------------------

/// Unitary 2l×2l matrix with A = diag(1,…,1,λ):
/// `[[I,0],[S,I]] · Δ(λ) · [[I,T],[0,I]]` for random skew S, T. This is a
/// complete parametrization of that coset.
pub fn even_with_invertible_a<R: Rng + ?Sized>(
    spec: &FieldSpec,
    l: usize,
    lambda: &FieldElem,
    rng: &mut R,
) -> Mat {
    let d = 2 * l;
    let s = random_skew(spec, l, rng);
    let t = random_skew(spec, l, rng);
    let mut lower = Mat::identity(spec, d);
    let mut upper = Mat::identity(spec, d);
    for i in 0..l {
        for j in 0..l {
            lower[(l + i, j)] = s[(i, j)].clone();
            upper[(i, l + j)] = t[(i, j)].clone();
        }
    }
    let delta = diag_matrix(spec, &DiagForm { lambda: lambda.clone(), alpha: None }, d)
        .expect("valid diagonal");
    let g = lower.mul(&delta).mul(&upper);
    debug_assert!(is_unitary(&g, &HermitianForm::split(spec, d).unwrap()));
    g
}

/// Unitary 2l×2l matrix with A = diag(1,…,1,0,…,0), `rank` ones: built by
/// interchanging the trailing rows of an invertible-A instance whose
/// lower-left block vanishes on those rows, then rerandomizing the blocks
/// the hypothesis leaves free.
pub fn even_with_singular_a<R: Rng + ?Sized>(
    spec: &FieldSpec,
    l: usize,
    rank: usize,
    rng: &mut R,
) -> Mat {
    assert!(rank < l);
    let d = 2 * l;
    // S supported on the leading rank×rank block
    let mut s_small = random_skew(spec, rank, rng);
    let mut lower = Mat::identity(spec, d);
    for i in 0..rank {
        for j in 0..rank {
            lower[(l + i, j)] = std::mem::replace(&mut s_small[(i, j)], spec.zero());
        }
    }
    let t = random_skew(spec, l, rng);
    let mut upper = Mat::identity(spec, d);
    for i in 0..l {
        for j in 0..l {
            upper[(i, l + j)] = t[(i, j)].clone();
        }
    }
    let mut g = lower.mul(&upper);
    let eps = spec.epsilon();
    for i in (rank + 1)..=l {
        g = row_interchange_matrix(spec, d, i as u32, &eps).unwrap().mul(&g);
    }
    // extra lower-left letters and trailing transvections keep the shape
    for _ in 0..(2 * l) {
        let letter = match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(1..=l as u32);
                let j = rng.gen_range(1..=l as u32);
                if i < j {
                    Letter::XNegIj { i, j, t: spec.random_elem(rng) }
                } else {
                    Letter::XNegIi { i, s: spec.random_skew(rng) }
                }
            }
            1 if rank + 2 <= l => {
                let i = rng.gen_range(rank as u32 + 1..=l as u32);
                let j = loop {
                    let j = rng.gen_range(rank as u32 + 1..=l as u32);
                    if j != i {
                        break j;
                    }
                };
                Letter::Xij { i, j, t: spec.random_elem(rng) }
            }
            _ => {
                let i = rng.gen_range(1..=l as u32);
                let j = rng.gen_range(1..=l as u32);
                if i < j {
                    Letter::XiNegJ { i, j, t: spec.random_elem(rng) }
                } else {
                    Letter::XiNegI { i, s: spec.random_skew(rng) }
                }
            }
        };
        match letter {
            Letter::XiNegJ { .. } | Letter::XiNegI { .. } => {
                let mut m = g.clone();
                letter.apply_right(&mut m);
                g = m;
            }
            other => {
                let mut m = g.clone();
                other.apply_left(&mut m);
                g = m;
            }
        }
    }
    debug_assert!(is_unitary(&g, &HermitianForm::split(spec, d).unwrap()));
    for i in 1..=l as i32 {
        for j in 1..=l as i32 {
            let expect = if i == j && i as usize <= rank { spec.one() } else { spec.zero() };
            debug_assert_eq!(*g.at(i, j), expect, "A block must stay diag(1,…,1,0,…,0)");
        }
    }
    g
}

/// Odd-dimension unitary matrix with A = diag(1,…,1,λ) and zero border
/// row X, all other blocks randomized through shape-preserving letters.
pub fn odd_with_invertible_a<R: Rng + ?Sized>(
    spec: &FieldSpec,
    l: usize,
    lambda: &FieldElem,
    rng: &mut R,
) -> Mat {
    let d = 2 * l + 1;
    let alpha = spec.zeta1().pow(rng.gen_range(0..=spec.q()));
    let mut g =
        diag_matrix(spec, &DiagForm { lambda: lambda.clone(), alpha: Some(alpha) }, d).unwrap();
    // border-column letters first, while the lower-left block is zero
    for i in 1..=l as u32 {
        Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_left(&mut g);
    }
    for _ in 0..(2 * l) {
        let i = rng.gen_range(1..=l as u32);
        let j = rng.gen_range(1..=l as u32);
        match rng.gen_range(0..3) {
            0 if i < j => Letter::XNegIj { i, j, t: spec.random_elem(rng) }.apply_left(&mut g),
            0 => Letter::XNegIi { i, s: spec.random_skew(rng) }.apply_left(&mut g),
            1 if i < j => Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_right(&mut g),
            1 => Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_right(&mut g),
            _ => Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_right(&mut g),
        }
    }
    debug_assert!(is_unitary(&g, &HermitianForm::split(spec, d).unwrap()));
    for i in 1..=l as i32 {
        debug_assert!(g.at(0, i).is_zero());
    }
    g
}

/// Odd-dimension unitary matrix with A = diag(1,…,1,0,…,0) (`rank` ones)
/// and the border row zero on the leading entries.
pub fn odd_with_singular_a<R: Rng + ?Sized>(
    spec: &FieldSpec,
    l: usize,
    rank: usize,
    rng: &mut R,
) -> Mat {
    assert!(rank < l);
    let d = 2 * l + 1;
    let alpha = spec.zeta1().pow(rng.gen_range(0..=spec.q()));
    let mut g = diag_matrix(spec, &DiagForm { lambda: spec.one(), alpha: Some(alpha) }, d).unwrap();
    for i in 1..=l as u32 {
        Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_left(&mut g);
    }
    // lower-left support on the leading block only, so the interchange
    // leaves diag(1,…,1,0,…,0)
    let s_small = random_skew(spec, rank, rng);
    for bi in 1..=rank as u32 {
        for bj in bi..=rank as u32 {
            let v = s_small[((bi - 1) as usize, (bj - 1) as usize)].clone();
            if bi == bj {
                if !v.is_zero() {
                    Letter::XNegIi { i: bi, s: v }.apply_left(&mut g);
                }
            } else if !v.is_zero() {
                Letter::XNegIj { i: bi, j: bj, t: v }.apply_left(&mut g);
            }
        }
    }
    let eps = spec.epsilon();
    for i in (rank + 1)..=l {
        let w = row_interchange_matrix(spec, d, i as u32, &eps).unwrap();
        g = w.mul(&g);
    }
    // rerandomize the free blocks
    for _ in 0..(2 * l) {
        let i = rng.gen_range(1..=l as u32);
        let j = rng.gen_range(1..=l as u32);
        match rng.gen_range(0..3) {
            0 if i < j => Letter::XNegIj { i, j, t: spec.random_elem(rng) }.apply_left(&mut g),
            0 => Letter::XNegIi { i, s: spec.random_skew(rng) }.apply_left(&mut g),
            1 if i < j => Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_right(&mut g),
            1 => Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_right(&mut g),
            _ => Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_right(&mut g),
        }
    }
    debug_assert!(is_unitary(&g, &HermitianForm::split(spec, d).unwrap()));
    g
}

fn random_nonzero_lambda<R: Rng + ?Sized>(spec: &FieldSpec, rng: &mut R) -> FieldElem {
    spec.random_nonzero(rng)
}

// ---------------------------------------------------------------------------
// The checks.
// ---------------------------------------------------------------------------

/// Y = diag(1,…,1,λ,…,λ) with `ones` leading ones; if YX is skew then
/// X = [[X₁₁, -σ(λ)·ᵀX̄₂₁], [X₂₁, X₂₂]] with X₁₁ skew and λX₂₂ skew.
/// Both the λ ≠ 0 and λ = 0 branches are exercised.
pub fn check_skew_product_shape<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let ones = rng.gen_range(1..l);
    let lambda = if rng.gen_bool(0.5) { random_nonzero_lambda(spec, rng) } else { spec.zero() };
    let mut y = Mat::identity(spec, l);
    for i in ones..l {
        y[(i, i)] = lambda.clone();
    }
    let x = if lambda.is_zero() {
        // X = [[skew, 0], [free, free]] is the general solution
        let mut x = Mat::zeros(spec, l);
        let s = random_skew(spec, ones, rng);
        for i in 0..ones {
            for j in 0..ones {
                x[(i, j)] = s[(i, j)].clone();
            }
        }
        for i in ones..l {
            for j in 0..l {
                x[(i, j)] = spec.random_elem(rng);
            }
        }
        x
    } else {
        let z = random_skew(spec, l, rng);
        y.inverse().unwrap().mul(&z)
    };
    assert!(is_skew_hermitian(&y.mul(&x)), "hypothesis must hold by construction");
    // conclusions
    for i in 0..ones {
        for j in 0..ones {
            assert_eq!(x[(i, j)], -&x[(j, i)].conj(), "leading block must be skew");
        }
        for j in ones..l {
            assert_eq!(x[(i, j)], -&(&lambda.conj() * &x[(j, i)].conj()), "upper-right coupling");
        }
    }
    if !lambda.is_zero() {
        for i in ones..l {
            for j in ones..l {
                let v = &lambda * &x[(i, j)];
                assert_eq!(v, -&(&lambda * &x[(j, i)]).conj(), "trailing block skew after scaling");
            }
        }
    }
}

/// For unitary `[[A,B],[C,D]]` with A = diag(1,…,1,λ), λ ≠ 0: the lower-left
/// block satisfies C₁₁ skew, C₁₂ = -λ·ᵀC̄₂₁ and σ(λ)·c skew. Also checks
/// the underlying identity ᵀC̄A + ᵀĀC = 0 on the instance.
pub fn check_c_block_invertible<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let lambda = random_nonzero_lambda(spec, rng);
    let g = even_with_invertible_a(spec, l, &lambda, rng);
    let a = block_a(&g);
    let c = block_c(&g);
    let zero = Mat::zeros(spec, l);
    let lhs = {
        let t1 = c.conj_transpose().mul(&a);
        let t2 = a.conj_transpose().mul(&c);
        let mut sum = Mat::zeros(spec, l);
        for r in 0..l {
            for cc in 0..l {
                sum[(r, cc)] = &t1[(r, cc)] + &t2[(r, cc)];
            }
        }
        sum
    };
    assert_eq!(lhs, zero, "ᵀC̄A + ᵀĀC must vanish");
    for i in 0..l - 1 {
        for j in 0..l - 1 {
            assert_eq!(c[(i, j)], -&c[(j, i)].conj(), "C₁₁ skew");
        }
        assert_eq!(c[(i, l - 1)], -&(&lambda * &c[(l - 1, i)].conj()), "C₁₂ = -λ·ᵀC̄₂₁");
    }
    let corner = &lambda.conj() * &c[(l - 1, l - 1)];
    assert!(corner.is_skew(), "σ(λ)·c must be skew");
}

/// Singular variant: A = diag(1,…,1,0,…,0) with m < l ones forces
/// C = [[C₁₁, 0], [C₂₁, C₂₂]] with C₁₁ skew of size m.
pub fn check_c_block_singular<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let rank = rng.gen_range(0..l);
    let g = even_with_singular_a(spec, l, rank, rng);
    let c = block_c(&g);
    for i in 0..rank {
        for j in 0..rank {
            assert_eq!(c[(i, j)], -&c[(j, i)].conj(), "C₁₁ skew");
        }
        for j in rank..l {
            assert!(c[(i, j)].is_zero(), "C₁₂ must vanish");
        }
    }
}

/// For unitary `[[A,B],[0,σ(A)⁻¹]]` with A = diag(1,…,1,λ): B₁₁ skew,
/// B₁₂ = -σ(λ)⁻¹·ᵀB̄₂₁, and λ⁻¹·b skew (equivalently A⁻¹B is skew).
pub fn check_b_block_upper<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l;
    let lambda = random_nonzero_lambda(spec, rng);
    let delta =
        diag_matrix(spec, &DiagForm { lambda: lambda.clone(), alpha: None }, d).unwrap();
    let t = random_skew(spec, l, rng);
    let mut upper = Mat::identity(spec, d);
    for i in 0..l {
        for j in 0..l {
            upper[(i, l + j)] = t[(i, j)].clone();
        }
    }
    let g = delta.mul(&upper);
    debug_assert!(is_unitary(&g, &HermitianForm::split(spec, d).unwrap()));
    for i in 0..l {
        assert!(block_c(&g)[(i, i)].is_zero());
    }
    let a = block_a(&g);
    let b = block_b(&g);
    assert!(is_skew_hermitian(&a.inverse().unwrap().mul(&b)), "A⁻¹B must be skew");
    for i in 0..l - 1 {
        for j in 0..l - 1 {
            assert_eq!(b[(i, j)], -&b[(j, i)].conj(), "B₁₁ skew");
        }
        assert_eq!(
            b[(i, l - 1)],
            -&(&lambda.conj().inverse().unwrap() * &b[(l - 1, i)].conj()),
            "B₁₂ = -σ(λ)⁻¹·ᵀB̄₂₁"
        );
    }
    let corner = &lambda.inverse().unwrap() * &b[(l - 1, l - 1)];
    assert!(corner.is_skew(), "λ⁻¹·b must be skew");
}

/// Membership criterion for block-upper-triangular matrices: `[[A,B],[0,D]]`
/// is unitary exactly when D = ᵀĀ⁻¹ and A⁻¹B is skew. Checks both
/// directions on random instances.
pub fn check_upper_triangular_membership<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l;
    let form = HermitianForm::split(spec, d).unwrap();
    // forward: construct a unitary upper block matrix with non-diagonal A
    let lambda = random_nonzero_lambda(spec, rng);
    let mut g = even_with_invertible_a(spec, l, &lambda, rng);
    // kill C with its own parametrization: g = [[I,0],[S,I]]ΔU, so
    // multiplying by [[I,0],[-S,I]] gives an upper-triangular unitary
    let c = block_c(&g);
    let a = block_a(&g);
    let s = c.mul(&a.inverse().unwrap());
    let mut lower_inv = Mat::identity(spec, d);
    for i in 0..l {
        for j in 0..l {
            lower_inv[(l + i, j)] = -&s[(i, j)];
        }
    }
    g = lower_inv.mul(&g);
    // mix A with transvections to leave the diagonal world
    for _ in 0..l {
        let i = rng.gen_range(1..=l as u32);
        let j = loop {
            let j = rng.gen_range(1..=l as u32);
            if j != i {
                break j;
            }
        };
        Letter::Xij { i, j, t: spec.random_elem(rng) }.apply_left(&mut g);
    }
    assert!(is_unitary(&g, &form));
    let a = block_a(&g);
    let b = block_b(&g);
    let dd = block_d(&g);
    assert_eq!(block_c(&g), Mat::zeros(spec, l));
    assert_eq!(dd, a.conj_transpose().inverse().unwrap(), "D = ᵀĀ⁻¹ is forced");
    assert!(is_skew_hermitian(&a.inverse().unwrap().mul(&b)), "A⁻¹B skew is forced");
    // converse: build from the criterion and land in the group
    let mut a = Mat::zeros(spec, l);
    loop {
        for r in 0..l {
            for c in 0..l {
                a[(r, c)] = spec.random_elem(rng);
            }
        }
        if !a.det().is_zero() {
            break;
        }
    }
    let m = random_skew(spec, l, rng);
    let b = a.mul(&m);
    let dd = a.conj_transpose().inverse().unwrap();
    let mut g = Mat::zeros(spec, d);
    for i in 0..l {
        for j in 0..l {
            g[(i, j)] = a[(i, j)].clone();
            g[(i, l + j)] = b[(i, j)].clone();
            g[(l + i, l + j)] = dd[(i, j)].clone();
        }
    }
    assert!(is_unitary(&g, &form), "criterion must be sufficient");
}

/// Constructive splitting: with Y = diag(1,…,1,σ(λ)) and YX skew, the
/// matrix R = X·σ(Y)⁻¹ is skew-Hermitian, splits into the elementary
/// pieces t·e_{i,j} - σ(t)·e_{j,i} (i < j) and s·e_{i,i} with s skew, and
/// the pieces re-assemble to X = R·σ(Y) exactly.
pub fn check_skew_split_constructive<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let lambda = random_nonzero_lambda(spec, rng);
    let mut y = Mat::identity(spec, l);
    y[(l - 1, l - 1)] = lambda.conj();
    let z = random_skew(spec, l, rng);
    let x = y.inverse().unwrap().mul(&z);
    assert!(is_skew_hermitian(&y.mul(&x)), "hypothesis");
    let y_bar = {
        let mut m = Mat::identity(spec, l);
        m[(l - 1, l - 1)] = lambda.clone();
        m
    };
    let r = x.mul(&y_bar.inverse().unwrap());
    assert!(is_skew_hermitian(&r), "coefficient matrix must be skew");
    // split and re-sum
    let mut sum = Mat::zeros(spec, l);
    for i in 0..l {
        for j in (i + 1)..l {
            let t = r[(i, j)].clone();
            sum[(i, j)] = &sum[(i, j)] + &t;
            sum[(j, i)] = &sum[(j, i)] - &t.conj();
        }
        let s = r[(i, i)].clone();
        assert!(s.is_skew(), "diagonal pieces must have skew parameters");
        sum[(i, i)] = &sum[(i, i)] + &s;
    }
    assert_eq!(sum, r, "pieces must re-assemble");
    assert_eq!(sum.mul(&y_bar), x, "X = (ΣR)·σ(Y)");
}

/// Odd dimension: 2ᵀX̄X + ᵀC̄A + ᵀĀC = 0 on fully random unitary
/// matrices, and the two shaped conclusions: with A = diag(1,…,1,λ) and
/// X = 0 the C block has the invertible-case shape; with
/// A = diag(1,…,1,0,…,0) and the leading border entries zero, the whole
/// border row vanishes and C = [[C₁₁ skew, 0], [*, *]].
pub fn check_odd_c_block<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l + 1;
    // the identity on an unconstrained random unitary element
    let form = HermitianForm::split(spec, d).unwrap();
    let g = crate::linalg::random_unitary(&form, rng, 8 * d);
    let a = l_by_l(&g, d, false, false);
    let c = l_by_l(&g, d, true, false);
    let two = spec.int(2);
    for bi in 0..l {
        for bj in 0..l {
            let xi = g.at(0, bi as i32 + 1);
            let xj = g.at(0, bj as i32 + 1);
            let mut acc = &(&two * &xi.conj()) * xj;
            for k in 0..l {
                acc = &acc + &(&c[(k, bi)].conj() * &a[(k, bj)]);
                acc = &acc + &(&a[(k, bi)].conj() * &c[(k, bj)]);
            }
            assert!(acc.is_zero(), "2ᵀX̄X + ᵀC̄A + ᵀĀC must vanish");
        }
    }
    // shaped case 1
    let lambda = random_nonzero_lambda(spec, rng);
    let g = odd_with_invertible_a(spec, l, &lambda, rng);
    let c = l_by_l(&g, d, true, false);
    for i in 0..l - 1 {
        for j in 0..l - 1 {
            assert_eq!(c[(i, j)], -&c[(j, i)].conj(), "C₁₁ skew");
        }
        assert_eq!(c[(i, l - 1)], -&(&lambda * &c[(l - 1, i)].conj()), "C₁₂ coupling");
    }
    assert!((&lambda.conj() * &c[(l - 1, l - 1)]).is_skew());
    // shaped case 2
    let rank = rng.gen_range(0..l);
    let g = odd_with_singular_a(spec, l, rank, rng);
    for i in 1..=l as i32 {
        assert!(g.at(0, i).is_zero(), "border row must vanish entirely");
    }
    let c = l_by_l(&g, d, true, false);
    for i in 0..rank {
        for j in 0..rank {
            assert_eq!(c[(i, j)], -&c[(j, i)].conj(), "C₁₁ skew");
        }
        for j in rank..l {
            assert!(c[(i, j)].is_zero(), "C₁₂ must vanish");
        }
    }
}

/// Odd dimension with zero lower-left block: the border row is forced to
/// vanish and ᵀĀD = I (so A is invertible).
pub fn check_odd_zero_lower<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l + 1;
    let alpha = spec.zeta1().pow(rng.gen_range(0..=spec.q()));
    let lambda = random_nonzero_lambda(spec, rng);
    let mut g =
        diag_matrix(spec, &DiagForm { lambda, alpha: Some(alpha) }, d).unwrap();
    for _ in 0..(3 * l) {
        let i = rng.gen_range(1..=l as u32);
        let j = rng.gen_range(1..=l as u32);
        match rng.gen_range(0..4) {
            0 if i != j => Letter::Xij { i, j, t: spec.random_elem(rng) }.apply_left(&mut g),
            1 if i < j => Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_left(&mut g),
            1 => Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_left(&mut g),
            2 => Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_left(&mut g),
            _ => Letter::Xi0 { i, t: spec.random_elem(rng) }.apply_right(&mut g),
        }
    }
    let c = l_by_l(&g, d, true, false);
    assert_eq!(c, Mat::zeros(spec, l), "construction keeps the lower-left block zero");
    for i in 1..=l as i32 {
        assert!(g.at(0, i).is_zero(), "border row forced to vanish");
    }
    let a = l_by_l(&g, d, false, false);
    let dd = l_by_l(&g, d, true, true);
    assert!(a.conj_transpose().mul(&dd).is_identity(), "ᵀĀD = I");
}

/// Odd dimension, bordered diagonal stage: with the border row, border
/// column and lower-left block zero and A an invertible diagonal, the
/// remaining borders vanish, the corner has norm one, D = σ(A)⁻¹ and
/// ᵀD̄B + ᵀB̄D = 0.
pub fn check_odd_bordered_diagonal<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l + 1;
    let alpha = spec.zeta1().pow(rng.gen_range(0..=spec.q()));
    let lambda = random_nonzero_lambda(spec, rng);
    let mut g = diag_matrix(spec, &DiagForm { lambda, alpha: Some(alpha) }, d).unwrap();
    for _ in 0..(3 * l) {
        let i = rng.gen_range(1..=l as u32);
        let j = rng.gen_range(1..=l as u32);
        match rng.gen_range(0..2) {
            0 if i < j => Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_left(&mut g),
            0 => Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_left(&mut g),
            1 if i < j => Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_right(&mut g),
            _ => Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_right(&mut g),
        }
    }
    // hypotheses hold by construction
    for i in 1..=l as i32 {
        assert!(g.at(0, i).is_zero());
        assert!(g.at(i, 0).is_zero());
        for j in 1..=l as i32 {
            assert!(g.at(-i, j).is_zero());
            if i != j {
                assert!(g.at(i, j).is_zero());
            }
        }
    }
    // conclusions
    let alpha = g.at(0, 0);
    assert!(alpha.is_norm_one(), "corner must have norm one");
    for i in 1..=l as i32 {
        assert!(g.at(0, -i).is_zero(), "upper border forced to vanish");
        assert!(g.at(-i, 0).is_zero(), "lower border forced to vanish");
    }
    let a = l_by_l(&g, d, false, false);
    let b = l_by_l(&g, d, false, true);
    let dd = l_by_l(&g, d, true, true);
    assert!(a.conj_transpose().mul(&dd).is_identity(), "D = ᵀĀ⁻¹");
    let t1 = dd.conj_transpose().mul(&b);
    let t2 = b.conj_transpose().mul(&dd);
    for r in 0..l {
        for c in 0..l {
            assert!((&t1[(r, c)] + &t2[(r, c)]).is_zero(), "ᵀD̄B + ᵀB̄D = 0");
        }
    }
}

/// Odd dimension, final stage: with all borders zero, lower-left zero and
/// D = σ(A)⁻¹ for A = diag(1,…,1,λ), the upper-right block satisfies
/// B₁₁ skew, B₁₂ = -σ(λ)⁻¹·ᵀB̄₂₁ and λ⁻¹·b skew.
pub fn check_odd_b_block<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    let d = 2 * l + 1;
    let alpha = spec.zeta1().pow(rng.gen_range(0..=spec.q()));
    let lambda = random_nonzero_lambda(spec, rng);
    let mut g =
        diag_matrix(spec, &DiagForm { lambda: lambda.clone(), alpha: Some(alpha) }, d).unwrap();
    for _ in 0..(3 * l) {
        let i = rng.gen_range(1..=l as u32);
        let j = rng.gen_range(1..=l as u32);
        if i < j {
            Letter::XiNegJ { i, j, t: spec.random_elem(rng) }.apply_left(&mut g);
        } else {
            Letter::XiNegI { i, s: spec.random_skew(rng) }.apply_left(&mut g);
        }
    }
    let b = l_by_l(&g, d, false, true);
    for i in 0..l - 1 {
        for j in 0..l - 1 {
            assert_eq!(b[(i, j)], -&b[(j, i)].conj(), "B₁₁ skew");
        }
        assert_eq!(
            b[(i, l - 1)],
            -&(&lambda.conj().inverse().unwrap() * &b[(l - 1, i)].conj()),
            "B₁₂ coupling"
        );
    }
    assert!((&lambda.inverse().unwrap() * &b[(l - 1, l - 1)]).is_skew(), "λ⁻¹·b skew");
}

/// Runs every check once; convenience for the test suites.
pub fn check_all_once<R: Rng + ?Sized>(spec: &FieldSpec, l: usize, rng: &mut R) {
    check_skew_product_shape(spec, l, rng);
    check_c_block_invertible(spec, l, rng);
    check_c_block_singular(spec, l, rng);
    check_b_block_upper(spec, l, rng);
    check_upper_triangular_membership(spec, l, rng);
    check_skew_split_constructive(spec, l, rng);
    if spec.p() != 2 {
        check_odd_c_block(spec, l, rng);
        check_odd_zero_lower(spec, l, rng);
        check_odd_bordered_diagonal(spec, l, rng);
        check_odd_b_block(spec, l, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn structural_checks_hold() {
        let s = FieldSpec::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..40 {
            check_all_once(&s, 2, &mut rng);
            check_all_once(&s, 3, &mut rng);
        }
        let s2 = FieldSpec::new(2, 1).unwrap();
        for _ in 0..40 {
            check_all_once(&s2, 2, &mut rng);
        }
    }

    #[test]
    fn generators_produce_prescribed_shapes() {
        let s = FieldSpec::new(7, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let lam = s.zeta();
        let g = even_with_invertible_a(&s, 3, &lam, &mut rng);
        for i in 1..=3i32 {
            for j in 1..=3i32 {
                let expect = if i != j {
                    s.zero()
                } else if i == 3 {
                    lam.clone()
                } else {
                    s.one()
                };
                assert_eq!(*g.at(i, j), expect);
            }
        }
        let g = odd_with_invertible_a(&s, 3, &lam, &mut rng);
        assert_eq!(*g.at(3, 3), lam);
    }
}
