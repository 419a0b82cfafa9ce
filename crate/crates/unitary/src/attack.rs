//! Recovery of the hidden conjugator behind an automorphism that is
//! presented as its action on generators.
//!
//! Given oracle access to φ(x) = n·x·n⁻¹ for a fixed unknown similitude
//! n, two query rounds determine n up to a nonzero scalar, which is all a
//! conjugation can hide:
//!
//! 1. φ(x_{i,-i}(ε)) - I = ε·n·e_{i,-i}·n⁻¹ is a rank-one matrix whose
//!    nonzero columns are scalar multiples of the i-th column of n, and
//!    likewise for x_{-i,i}(ε); collecting one column per index yields
//!    N = n·D with D diagonal (plus one mixed column through the index-0
//!    letters in odd dimension).
//! 2. N⁻¹·φ(x_r(t))·N = D⁻¹·x_r(t)·D exposes the ratios of the unknown
//!    diagonal entries; rescaling the columns of N by them leaves d₁·n.
//!
//! Responses that are not explainable by any conjugation surface as
//! rank-inconsistent extractions or off-pattern ratio matrices and are
//! reported as [`Error::InconsistentOracle`].

use crate::gens::Letter;
use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::{pos, similitude_multiplier, HermitianForm, Mat};
use crate::{Error, Result};

/// Oracle access to an automorphism on arbitrary valid letters.
/// Sequential use only.
pub trait AutomorphismOracle {
    fn query(&mut self, letter: &Letter) -> Result<Mat>;
    fn d(&self) -> usize;
}

/// Test-harness oracle wrapping a known conjugator.
pub struct ConjugationOracle {
    n: Mat,
    n_inv: Mat,
    queries: usize,
}

impl ConjugationOracle {
    pub fn new(n: Mat) -> Result<ConjugationOracle> {
        let form = HermitianForm::split(n.spec(), n.d())?;
        if similitude_multiplier(&n, &form).is_none() {
            return Err(Error::NotSimilitude);
        }
        let n_inv = n.inverse().map_err(|_| Error::NotSimilitude)?;
        Ok(ConjugationOracle { n, n_inv, queries: 0 })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn hidden(&self) -> &Mat {
        &self.n
    }
}

impl AutomorphismOracle for ConjugationOracle {
    fn query(&mut self, letter: &Letter) -> Result<Mat> {
        self.queries += 1;
        let m = letter.matrix(self.n.spec(), self.n.d())?;
        Ok(self.n.mul(&m).mul(&self.n_inv))
    }

    fn d(&self) -> usize {
        self.n.d()
    }
}

/// First nonzero column of a rank-one matrix, verifying that every other
/// column is a scalar multiple of it.
fn extract_rank_one_column(p: &Mat) -> Result<Vec<FieldElem>> {
    let d = p.d();
    let mut base: Option<(usize, Vec<FieldElem>)> = None;
    for c in 0..d {
        if (0..d).any(|r| !p[(r, c)].is_zero()) {
            let col = (0..d).map(|r| p[(r, c)].clone()).collect();
            base = Some((c, col));
            break;
        }
    }
    let Some((c0, col)) = base else {
        return Err(Error::InconsistentOracle);
    };
    let r0 = (0..d).position(|r| !col[r].is_zero()).expect("nonzero column");
    let pivot_inv = col[r0].inverse().expect("nonzero");
    for c in (c0 + 1)..d {
        let mu = &p[(r0, c)] * &pivot_inv;
        for r in 0..d {
            if p[(r, c)] != &mu * &col[r] {
                return Err(Error::InconsistentOracle);
            }
        }
    }
    Ok(col)
}

fn set_column(n: &mut Mat, label: i32, col: &[FieldElem]) {
    let d = n.d();
    let c = pos(d, label);
    for (r, v) in col.iter().enumerate() {
        n[(r, c)] = v.clone();
    }
}

/// The ratio matrix N⁻¹·φ(x)·N, which must be I plus entries on the
/// support of x itself; anything off-support means the oracle lies.
fn ratio_matrix(
    oracle: &mut dyn AutomorphismOracle,
    n: &Mat,
    n_inv: &Mat,
    letter: &Letter,
    support: &[(usize, usize)],
) -> Result<Mat> {
    let m = n_inv.mul(&oracle.query(letter)?).mul(n);
    let d = m.d();
    for r in 0..d {
        for c in 0..d {
            let on_support = r == c || support.contains(&(r, c));
            if !on_support && !m[(r, c)].is_zero() {
                return Err(Error::InconsistentOracle);
            }
            if r == c && support.iter().all(|&(sr, sc)| (sr, sc) != (r, c)) && !m[(r, c)].is_one() {
                return Err(Error::InconsistentOracle);
            }
        }
    }
    Ok(m)
}

/// Recovers the hidden conjugator of an even-dimension automorphism up to
/// a scalar: the result g' satisfies g' = c·n for some c ∈ F_{q²}^×.
/// At most 2l queries in the first round and l in the second.
pub fn recover_conjugator_even(
    oracle: &mut dyn AutomorphismOracle,
    l: usize,
    spec: &FieldSpec,
) -> Result<Mat> {
    let d = 2 * l;
    if oracle.d() != d || l < 2 {
        return Err(Error::InconsistentOracle);
    }
    let eps = spec.epsilon();
    let identity = Mat::identity(spec, d);
    let mut n = Mat::zeros(spec, d);
    // round 1: columns up to scalars
    for i in 1..=l as u32 {
        for (letter, label) in [
            (Letter::XiNegI { i, s: eps.clone() }, i as i32),
            (Letter::XNegIi { i, s: eps.clone() }, -(i as i32)),
        ] {
            let mut p = oracle.query(&letter)?;
            for r in 0..d {
                for c in 0..d {
                    p[(r, c)] = &p[(r, c)] - &identity[(r, c)];
                }
            }
            let col = extract_rank_one_column(&p)?;
            set_column(&mut n, label, &col);
        }
    }
    let n_inv = n.inverse().map_err(|_| Error::InconsistentOracle)?;
    // round 2: diagonal ratios, normalized to the first column
    let one = spec.one();
    let mut scale = vec![one.clone(); d];
    let p1 = pos(d, 1);
    let m = ratio_matrix(
        oracle,
        &n,
        &n_inv,
        &Letter::XiNegI { i: 1, s: eps.clone() },
        &[(p1, pos(d, -1))],
    )?;
    let rho_neg1 = &m[(p1, pos(d, -1))] * &eps.inverse().expect("nonzero");
    if rho_neg1.is_zero() {
        return Err(Error::InconsistentOracle);
    }
    scale[pos(d, -1)] = rho_neg1.inverse().expect("nonzero");
    for j in 2..=l as u32 {
        let pj = pos(d, j as i32);
        let pnj = pos(d, -(j as i32));
        let pn1 = pos(d, -1);
        let m = ratio_matrix(
            oracle,
            &n,
            &n_inv,
            &Letter::Xij { i: 1, j, t: one.clone() },
            &[(p1, pj), (pnj, pn1)],
        )?;
        let rho_j = m[(p1, pj)].clone();
        let tau_j = m[(pnj, pn1)].clone();
        if rho_j.is_zero() || tau_j.is_zero() {
            return Err(Error::InconsistentOracle);
        }
        scale[pj] = rho_j.inverse().expect("nonzero");
        // tau = -d_{-j}⁻¹·d_{-1}, so d₁/d_{-j} = -tau·(d₁/d_{-1})
        scale[pnj] = &-&tau_j * &scale[pos(d, -1)];
    }
    let mut out = n;
    for (c, f) in scale.iter().enumerate() {
        for r in 0..d {
            out[(r, c)] = &out[(r, c)] * f;
        }
    }
    Ok(out)
}

/// Odd-dimension variant. The index-0 column can only be read mixed with
/// the column of index -1, so one extra ratio computation separates it.
pub fn recover_conjugator_odd(
    oracle: &mut dyn AutomorphismOracle,
    l: usize,
    spec: &FieldSpec,
) -> Result<Mat> {
    let d = 2 * l + 1;
    if oracle.d() != d || l < 2 {
        return Err(Error::InconsistentOracle);
    }
    let eps = spec.epsilon();
    let one = spec.one();
    let identity = Mat::identity(spec, d);
    let mut n = Mat::zeros(spec, d);
    for i in 1..=l as u32 {
        for (letter, label) in [
            (Letter::XiNegI { i, s: eps.clone() }, i as i32),
            (Letter::XNegIi { i, s: eps.clone() }, -(i as i32)),
        ] {
            let mut p = oracle.query(&letter)?;
            for r in 0..d {
                for c in 0..d {
                    p[(r, c)] = &p[(r, c)] - &identity[(r, c)];
                }
            }
            let col = extract_rank_one_column(&p)?;
            set_column(&mut n, label, &col);
        }
    }
    // mixed column α·G₀ + β·G_{-1} from an index-0 letter: take the first
    // column that is not a multiple of the known column for -1
    {
        let mut p = oracle.query(&Letter::X0i { i: 1, t: one.clone() })?;
        for r in 0..d {
            for c in 0..d {
                p[(r, c)] = &p[(r, c)] - &identity[(r, c)];
            }
        }
        let cneg1 = pos(d, -1);
        let mut chosen: Option<Vec<FieldElem>> = None;
        'cols: for c in 0..d {
            let col: Vec<FieldElem> = (0..d).map(|r| p[(r, c)].clone()).collect();
            if col.iter().all(|v| v.is_zero()) {
                continue;
            }
            // proportional to N's column -1?
            let r0 = (0..d).position(|r| !n[(r, cneg1)].is_zero());
            if let Some(r0) = r0 {
                let mu = &col[r0] * &n[(r0, cneg1)].inverse().expect("nonzero");
                if (0..d).all(|r| col[r] == &mu * &n[(r, cneg1)]) {
                    continue 'cols;
                }
            }
            chosen = Some(col);
            break;
        }
        let col = chosen.ok_or(Error::InconsistentOracle)?;
        set_column(&mut n, 0, &col);
    }
    let n_inv = n.inverse().map_err(|_| Error::InconsistentOracle)?;
    let p0 = pos(d, 0);
    let p1 = pos(d, 1);
    let pn1 = pos(d, -1);
    let mut scale = vec![one.clone(); d];
    // x_{1,-1}(ε): ratio d_{-1}/d₁ at (1,-1) and β/d₁ at (1,0)
    let m = ratio_matrix(
        oracle,
        &n,
        &n_inv,
        &Letter::XiNegI { i: 1, s: eps.clone() },
        &[(p1, pn1), (p1, p0)],
    )?;
    let eps_inv = eps.inverse().expect("nonzero");
    let rho_neg1 = &m[(p1, pn1)] * &eps_inv;
    let beta_over_d1 = &m[(p1, p0)] * &eps_inv;
    if rho_neg1.is_zero() {
        return Err(Error::InconsistentOracle);
    }
    let rho_neg1_inv = rho_neg1.inverse().expect("nonzero");
    scale[pn1] = rho_neg1_inv.clone();
    // x_{1,j}(1): d_j/d₁ at (1,j), -d_{-j}⁻¹d_{-1} at (-j,-1), -d_{-j}⁻¹β at (-j,0)
    for j in 2..=l as u32 {
        let pj = pos(d, j as i32);
        let pnj = pos(d, -(j as i32));
        let m = ratio_matrix(
            oracle,
            &n,
            &n_inv,
            &Letter::Xij { i: 1, j, t: one.clone() },
            &[(p1, pj), (pnj, pn1), (pnj, p0)],
        )?;
        let rho_j = m[(p1, pj)].clone();
        let tau_j = m[(pnj, pn1)].clone();
        if rho_j.is_zero() || tau_j.is_zero() {
            return Err(Error::InconsistentOracle);
        }
        scale[pj] = rho_j.inverse().expect("nonzero");
        scale[pnj] = &-&tau_j * &rho_neg1_inv;
    }
    // x_{0,1}(1): d₁/α at (0,1)
    let m = ratio_matrix(
        oracle,
        &n,
        &n_inv,
        &Letter::X0i { i: 1, t: one.clone() },
        &[(p0, p1), (pn1, p1), (pn1, p0)],
    )?;
    let d1_over_alpha = m[(p0, p1)].clone();
    if d1_over_alpha.is_zero() {
        return Err(Error::InconsistentOracle);
    }
    // separate the mixed column: (N₀ - (β/d_{-1})·N_{-1}) · d₁/α = d₁·G₀
    let beta_over_dneg1 = &beta_over_d1 * &rho_neg1_inv;
    let mut out = n.clone();
    for r in 0..d {
        let mixed = &n[(r, p0)] - &(&beta_over_dneg1 * &n[(r, pn1)]);
        out[(r, p0)] = &mixed * &d1_over_alpha;
    }
    for (c, f) in scale.iter().enumerate() {
        if c == p0 {
            continue;
        }
        for r in 0..d {
            out[(r, c)] = &out[(r, c)] * f;
        }
    }
    Ok(out)
}

/// True when conjugation by g' matches the oracle on every listed letter
/// (the hidden scalar cancels in conjugation).
pub fn verify_recovery(
    g_prime: &Mat,
    oracle: &mut dyn AutomorphismOracle,
    letters: &[Letter],
) -> Result<bool> {
    let spec = g_prime.spec();
    let d = g_prime.d();
    let g_inv = g_prime.inverse().map_err(|_| Error::InconsistentOracle)?;
    for letter in letters {
        let m = letter.matrix(spec, d)?;
        if g_prime.mul(&m).mul(&g_inv) != oracle.query(letter)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Convenience: is x = c·y for some nonzero scalar c?
pub fn is_scalar_multiple(x: &Mat, y: &Mat) -> bool {
    let d = x.d();
    if y.d() != d {
        return false;
    }
    let mut c: Option<FieldElem> = None;
    for r in 0..d {
        for cc in 0..d {
            match (&x[(r, cc)], &y[(r, cc)]) {
                (a, b) if a.is_zero() && b.is_zero() => {}
                (a, b) if a.is_zero() != b.is_zero() => return false,
                (a, b) => {
                    let ratio = a * &b.inverse().expect("nonzero");
                    match &c {
                        None => c = Some(ratio),
                        Some(prev) => {
                            if *prev != ratio {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    c.is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gens::Letter;
    use crate::gf::FieldSpec;
    use crate::linalg::{random_similitude, HermitianForm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn f9() -> FieldSpec {
        FieldSpec::new(3, 1).unwrap()
    }

    #[test]
    fn recover_even_identity_and_torus() {
        let s = f9();
        let d = 4;
        // hidden n = I gives a scalar matrix
        let mut oracle = ConjugationOracle::new(Mat::identity(&s, d)).unwrap();
        let g = recover_conjugator_even(&mut oracle, 2, &s).unwrap();
        assert!(is_scalar_multiple(&g, &Mat::identity(&s, d)));
        // hidden n = h(ζ)
        let h = Letter::TorusZeta { k: 1 }.matrix(&s, d).unwrap();
        let mut oracle = ConjugationOracle::new(h.clone()).unwrap();
        let g = recover_conjugator_even(&mut oracle, 2, &s).unwrap();
        assert!(is_scalar_multiple(&g, &h));
    }

    #[test]
    fn recover_even_random_similitudes() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = random_similitude(&form, &mut rng, 40);
            let mut oracle = ConjugationOracle::new(n.clone()).unwrap();
            let g = recover_conjugator_even(&mut oracle, 2, &s).unwrap();
            assert!(is_scalar_multiple(&g, &n), "recovery must land on a scalar multiple");
        }
    }

    #[test]
    fn recover_odd_random_similitudes() {
        let s = f9();
        // hidden n = I yields a scalar matrix
        let mut oracle = ConjugationOracle::new(Mat::identity(&s, 5)).unwrap();
        let g = recover_conjugator_odd(&mut oracle, 2, &s).unwrap();
        assert!(is_scalar_multiple(&g, &Mat::identity(&s, 5)));
        let form = HermitianForm::split(&s, 5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = random_similitude(&form, &mut rng, 40);
            let mut oracle = ConjugationOracle::new(n.clone()).unwrap();
            let g = recover_conjugator_odd(&mut oracle, 2, &s).unwrap();
            assert!(is_scalar_multiple(&g, &n));
        }
    }

    #[test]
    fn query_budget() {
        let s = f9();
        for l in [2usize, 3, 4] {
            let d = 2 * l;
            let mut oracle = ConjugationOracle::new(Mat::identity(&s, d)).unwrap();
            let _ = recover_conjugator_even(&mut oracle, l, &s).unwrap();
            assert!(oracle.queries() <= 3 * l, "{} queries at l = {l}", oracle.queries());
        }
    }

    #[test]
    fn verify_recovery_examples() {
        let s = f9();
        let form = HermitianForm::split(&s, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let n = random_similitude(&form, &mut rng, 40);
        let letters = vec![
            Letter::Xij { i: 1, j: 2, t: s.one() },
            Letter::Xij { i: 2, j: 1, t: s.one() },
            Letter::XiNegI { i: 1, s: s.epsilon() },
            Letter::XNegIi { i: 1, s: s.epsilon() },
            Letter::XNegIi { i: 2, s: s.epsilon() },
        ];
        // exact conjugator verifies
        let mut oracle = ConjugationOracle::new(n.clone()).unwrap();
        assert!(verify_recovery(&n, &mut oracle, &letters).unwrap());
        // scalar multiples verify too
        let cn = n.scale(&s.zeta());
        let mut oracle = ConjugationOracle::new(n.clone()).unwrap();
        assert!(verify_recovery(&cn, &mut oracle, &letters).unwrap());
        // a perturbed candidate fails
        let wrong = n.mul(&Letter::Xij { i: 1, j: 2, t: s.one() }.matrix(&s, 4).unwrap());
        let mut oracle = ConjugationOracle::new(n).unwrap();
        assert!(!verify_recovery(&wrong, &mut oracle, &letters).unwrap());
    }

    #[test]
    fn inconsistent_oracle_detected() {
        let s = f9();

        struct LyingOracle {
            inner: ConjugationOracle,
        }
        impl AutomorphismOracle for LyingOracle {
            fn query(&mut self, letter: &Letter) -> crate::Result<Mat> {
                let mut m = self.inner.query(letter)?;
                // corrupt one entry
                m[(0, 0)] = &m[(0, 0)] + &m.spec().one();
                Ok(m)
            }
            fn d(&self) -> usize {
                self.inner.d()
            }
        }

        let mut oracle =
            LyingOracle { inner: ConjugationOracle::new(Mat::identity(&s, 4)).unwrap() };
        assert!(matches!(
            recover_conjugator_even(&mut oracle, 2, &s),
            Err(Error::InconsistentOracle)
        ));
    }
}
