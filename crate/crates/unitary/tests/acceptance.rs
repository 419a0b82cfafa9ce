//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line with its headline numbers (visible with --nocapture).
//!
//! Every assertion here is exact field arithmetic; the only tolerance in
//! the suite is the documented slope window of the scaling criterion.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::sync::Arc;
use std::time::Instant;
use unitary::elim::{decompose, diag_matrix, reduce_su_to_identity, structure, word_for, DiagForm};
use unitary::gens::{Letter, Word};
use unitary::gf::{mult_count, reset_mult_count};
use unitary::linalg::{
    half, is_special_unitary, is_unitary, random_similitude, random_unitary, HermitianForm,
};
use unitary::mor::{self, Automorphism, GeneratorSet};
use unitary::serial::{
    CiphertextRepr, DecompositionRepr, FieldSpecRepr, MatRepr, PublicKeyRepr, SecretKeyRepr,
    WordRepr,
};
use unitary::{attack, FieldSpec, Mat};

fn spec_for_q(q: u64) -> FieldSpec {
    let (p, e) = match q {
        2 => (2, 1),
        3 => (3, 1),
        4 => (2, 2),
        7 => (7, 1),
        9 => (3, 2),
        49 => (7, 2),
        _ => panic!("unexpected subfield size {q}"),
    };
    FieldSpec::new(p, e).unwrap()
}

const CORPUS: [(usize, u64); 5] = [(4, 3), (5, 3), (8, 7), (9, 7), (20, 49)];
const CORPUS_SIZE: usize = 1000;

fn corpus_rng(d: usize, q: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(0xACCE97 ^ (d as u64) << 8 ^ q)
}

fn random_su_word(spec: &FieldSpec, d: usize, rng: &mut ChaCha12Rng, n: usize) -> Mat {
    let letters: Vec<_> = (0..n).map(|_| Letter::random_elementary(spec, d, rng)).collect();
    Word::new(d, letters).evaluate(spec)
}

#[test]
fn criterion_01_decomposition_round_trip() {
    let t0 = Instant::now();
    for (d, q) in CORPUS {
        let spec = spec_for_q(q);
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = corpus_rng(d, q);
        for _ in 0..CORPUS_SIZE {
            let g = random_unitary(&form, &mut rng, 10 * d * d);
            let dec = decompose(&g).unwrap();
            assert!(dec.verify(&g), "exact round trip failed at d={d}, q={q}");
        }
    }
    println!(
        "ACCEPTANCE 1 (decomposition round-trip, {} samples/config over {:?}): PASS in {:.1?}",
        CORPUS_SIZE,
        CORPUS,
        t0.elapsed()
    );
}

#[test]
fn criterion_02_determinant_identities() {
    for (d, q) in CORPUS {
        let spec = spec_for_q(q);
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = corpus_rng(d, q);
        for _ in 0..CORPUS_SIZE {
            let g = random_unitary(&form, &mut rng, 10 * d * d);
            let dec = decompose(&g).unwrap();
            let det = g.det();
            let lam = &dec.diag.lambda;
            let ratio = lam * &lam.conj().inverse().unwrap();
            match &dec.diag.alpha {
                None => assert_eq!(ratio, det, "λ·σ(λ)⁻¹ = det at d={d}, q={q}"),
                Some(alpha) => {
                    assert!((alpha * &alpha.conj()).is_one(), "α norm-one at d={d}, q={q}");
                    assert_eq!(&ratio * alpha, det, "α·λ·σ(λ)⁻¹ = det at d={d}, q={q}");
                }
            }
        }
    }
    println!("ACCEPTANCE 2 (diagonal determinant identities on the full corpus): PASS");
}

#[test]
fn criterion_03_full_word_problem() {
    for (d, q) in CORPUS {
        let spec = spec_for_q(q);
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = corpus_rng(d, q);
        for _ in 0..CORPUS_SIZE {
            let g = random_unitary(&form, &mut rng, 10 * d * d);
            let w = word_for(&g).unwrap();
            assert_eq!(w.evaluate(&spec), g, "word evaluation at d={d}, q={q}");
        }
        // determinant-one inputs reduce over elementary letters
        for _ in 0..CORPUS_SIZE {
            let g = random_su_word(&spec, d, &mut rng, 5 * d * d);
            let w = reduce_su_to_identity(&g).unwrap();
            assert_eq!(w.evaluate(&spec), g, "special-unitary word at d={d}, q={q}");
            if d % 2 == 0 {
                assert!(
                    w.letters().iter().all(|x| !x.is_torus()),
                    "even dimension must use elementary letters only"
                );
            }
        }
    }
    println!("ACCEPTANCE 3 (full word problem + determinant-one reduction): PASS");
}

#[test]
fn criterion_04_characteristic_two_even_order() {
    for q in [2u64, 4] {
        let spec = spec_for_q(q);
        let d = 4;
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = corpus_rng(d, q);
        for _ in 0..CORPUS_SIZE {
            let g = random_unitary(&form, &mut rng, 10 * d * d);
            let dec = decompose(&g).unwrap();
            assert!(dec.verify(&g), "exact round trip failed at d={d}, q={q}");
        }
    }
    println!("ACCEPTANCE 4 (characteristic two, even order, q ∈ {{2, 4}}): PASS");
}

#[test]
fn criterion_05_generator_validity_exhaustive() {
    let spec = spec_for_q(3);
    let elems = spec.all_elements();
    let skews: Vec<_> = elems.iter().filter(|x| x.is_skew()).cloned().collect();
    let mut letters_checked = 0usize;
    for d in [4usize, 5] {
        let form = HermitianForm::split(&spec, d).unwrap();
        let l = half(d) as u32;
        let mut all: Vec<Letter> = Vec::new();
        for i in 1..=l {
            for j in 1..=l {
                if i != j {
                    all.extend(elems.iter().map(|t| Letter::Xij { i, j, t: t.clone() }));
                }
                if i < j {
                    all.extend(elems.iter().map(|t| Letter::XiNegJ { i, j, t: t.clone() }));
                    all.extend(elems.iter().map(|t| Letter::XNegIj { i, j, t: t.clone() }));
                }
            }
            all.extend(skews.iter().map(|s| Letter::XiNegI { i, s: s.clone() }));
            all.extend(skews.iter().map(|s| Letter::XNegIi { i, s: s.clone() }));
            if d % 2 == 1 {
                all.extend(elems.iter().map(|t| Letter::Xi0 { i, t: t.clone() }));
                all.extend(elems.iter().map(|t| Letter::X0i { i, t: t.clone() }));
            }
        }
        for x in &all {
            let m = x.matrix(&spec, d).unwrap();
            assert!(is_unitary(&m, &form), "{x:?} must preserve the form");
            assert!(m.det().is_one(), "{x:?} must have determinant one");
        }
        letters_checked += all.len();
        // additivity for the five additive families, exhaustively
        for t1 in &elems {
            for t2 in &elems {
                for (a, b, sum) in [
                    (
                        Letter::Xij { i: 1, j: 2, t: t1.clone() },
                        Letter::Xij { i: 1, j: 2, t: t2.clone() },
                        Letter::Xij { i: 1, j: 2, t: t1 + t2 },
                    ),
                    (
                        Letter::XiNegJ { i: 1, j: 2, t: t1.clone() },
                        Letter::XiNegJ { i: 1, j: 2, t: t2.clone() },
                        Letter::XiNegJ { i: 1, j: 2, t: t1 + t2 },
                    ),
                    (
                        Letter::XNegIj { i: 1, j: 2, t: t1.clone() },
                        Letter::XNegIj { i: 1, j: 2, t: t2.clone() },
                        Letter::XNegIj { i: 1, j: 2, t: t1 + t2 },
                    ),
                ] {
                    let lhs = a.matrix(&spec, d).unwrap().mul(&b.matrix(&spec, d).unwrap());
                    assert_eq!(lhs, sum.matrix(&spec, d).unwrap());
                }
            }
        }
        for s1 in &skews {
            for s2 in &skews {
                let a = Letter::XiNegI { i: 1, s: s1.clone() }.matrix(&spec, d).unwrap();
                let b = Letter::XiNegI { i: 1, s: s2.clone() }.matrix(&spec, d).unwrap();
                let sum = Letter::XiNegI { i: 1, s: s1 + s2 }.matrix(&spec, d).unwrap();
                assert_eq!(a.mul(&b), sum);
                let a = Letter::XNegIi { i: 2, s: s1.clone() }.matrix(&spec, d).unwrap();
                let b = Letter::XNegIi { i: 2, s: s2.clone() }.matrix(&spec, d).unwrap();
                let sum = Letter::XNegIi { i: 2, s: s1 + s2 }.matrix(&spec, d).unwrap();
                assert_eq!(a.mul(&b), sum);
            }
        }
    }
    // the index-0 family composes with a skew correction instead
    let d = 5;
    for t in &elems {
        for u in &elems {
            let a = Letter::Xi0 { i: 1, t: t.clone() }.matrix(&spec, d).unwrap();
            let b = Letter::Xi0 { i: 1, t: u.clone() }.matrix(&spec, d).unwrap();
            let corr = &(t * &u.conj()) - &(&t.conj() * u);
            assert!(corr.is_skew());
            let rhs = Letter::Xi0 { i: 1, t: t + u }
                .matrix(&spec, d)
                .unwrap()
                .mul(&Letter::XiNegI { i: 1, s: corr }.matrix(&spec, d).unwrap());
            assert_eq!(a.mul(&b), rhs);
        }
    }
    println!("ACCEPTANCE 5 (generator validity, {letters_checked} letters exhaustively): PASS");
}

#[test]
fn criterion_06_structural_lemma_suite() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x5EED6);
    let spec3 = spec_for_q(3);
    let spec7 = spec_for_q(7);
    let spec2 = spec_for_q(2);
    const RUNS: usize = 500;
    for run in 0..RUNS {
        // vary the half-rank and the field
        let l = 2 + run % 2;
        structure::check_skew_product_shape(&spec3, l, &mut rng);
        structure::check_c_block_invertible(&spec3, l, &mut rng);
        structure::check_c_block_singular(&spec3, l, &mut rng);
        structure::check_b_block_upper(&spec7, l, &mut rng);
        structure::check_upper_triangular_membership(&spec3, l, &mut rng);
        structure::check_skew_split_constructive(&spec7, l, &mut rng);
        structure::check_odd_c_block(&spec3, l, &mut rng);
        structure::check_odd_zero_lower(&spec3, l, &mut rng);
        structure::check_odd_bordered_diagonal(&spec7, l, &mut rng);
        structure::check_odd_b_block(&spec3, l, &mut rng);
        // the even-dimension facts also hold in characteristic two
        if run % 10 == 0 {
            structure::check_c_block_invertible(&spec2, l, &mut rng);
            structure::check_skew_split_constructive(&spec2, l, &mut rng);
        }
    }
    println!("ACCEPTANCE 6 (structural lemma suite, {RUNS} randomized runs each): PASS");
}

#[test]
fn criterion_07_cubic_scaling() {
    let t0 = Instant::now();
    let spec = spec_for_q(49);
    let trials = 10u64;
    let mut points = Vec::new();
    for l in [5usize, 10, 20, 40] {
        let d = 2 * l;
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0xBE7C ^ l as u64);
        let mut total = 0u64;
        for _ in 0..trials {
            let g = random_unitary(&form, &mut rng, 10 * d * d);
            reset_mult_count();
            let dec = decompose(&g).unwrap();
            total += mult_count();
            std::hint::black_box(dec);
        }
        points.push(((l as f64).ln(), ((total / trials) as f64).ln()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(
        (2.5..=3.5).contains(&slope),
        "multiplication counts must scale cubically; measured slope {slope:.3}"
    );
    println!(
        "ACCEPTANCE 7 (cubic scaling at q = 49, l ∈ {{5,10,20,40}}): PASS, slope {slope:.3} in [2.5, 3.5], {:.1?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_08_mor_round_trip() {
    let t0 = Instant::now();
    // d = 4, q = 3: 100 random (keypair, plaintext, r)
    {
        let spec = spec_for_q(3);
        let mut rng = ChaCha12Rng::seed_from_u64(0x30804);
        for _ in 0..100 {
            let kp = mor::keygen(2, &spec, &mut rng).unwrap();
            let m = random_su_word(&spec, 4, &mut rng, 40);
            let ct = mor::encrypt(&kp.public, &m, &mut rng).unwrap();
            assert!(ct.c2.det().is_one(), "ciphertext payload stays in the group");
            assert_eq!(mor::decrypt(&kp, &ct).unwrap(), m);
        }
    }
    // d = 8, q = 7: 20 triples
    {
        let spec = spec_for_q(7);
        let mut rng = ChaCha12Rng::seed_from_u64(0x70808);
        for _ in 0..20 {
            let kp = mor::keygen(4, &spec, &mut rng).unwrap();
            let m = random_su_word(&spec, 8, &mut rng, 80);
            let ct = mor::encrypt(&kp.public, &m, &mut rng).unwrap();
            assert_eq!(mor::decrypt(&kp, &ct).unwrap(), m);
        }
    }
    // the rewriting pipeline agrees with direct conjugation on 1000 inputs
    {
        let spec = spec_for_q(3);
        let gens = Arc::new(GeneratorSet::new(&spec, 4).unwrap());
        let form = HermitianForm::split(&spec, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0x30810);
        let n = random_similitude(&form, &mut rng, 160);
        let n_inv = n.inverse().unwrap();
        let aut = Automorphism::conjugation(&n, &gens).unwrap();
        for _ in 0..1000 {
            let m = random_su_word(&spec, 4, &mut rng, 40);
            assert_eq!(aut.apply(&m).unwrap(), n.mul(&m).mul(&n_inv));
        }
    }
    println!(
        "ACCEPTANCE 8 (cryptosystem round-trip: 100 @ d=4 q=3, 20 @ d=8 q=7, 1000 conjugation checks): PASS in {:.1?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_09_conjugator_recovery() {
    let t0 = Instant::now();
    let spec = spec_for_q(3);
    let gens4 = Arc::new(GeneratorSet::new(&spec, 4).unwrap());
    for (d, count) in [(4usize, 100usize), (5, 100)] {
        let form = HermitianForm::split(&spec, d).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0xA77ACC ^ d as u64);
        for _ in 0..count {
            let n = random_similitude(&form, &mut rng, 10 * d * d);
            let mut oracle = attack::ConjugationOracle::new(n.clone()).unwrap();
            let g = if d % 2 == 0 {
                attack::recover_conjugator_even(&mut oracle, half(d), &spec).unwrap()
            } else {
                attack::recover_conjugator_odd(&mut oracle, half(d), &spec).unwrap()
            };
            // g⁻¹·n must be a nonzero scalar matrix, exactly
            let ratio = g.inverse().unwrap().mul(&n);
            let c = ratio[(0, 0)].clone();
            assert!(!c.is_zero());
            assert_eq!(ratio, Mat::identity(&spec, d).scale(&c), "g⁻¹·n = c·I");
            // and conjugation by g matches the oracle on the generating set
            if d % 2 == 0 {
                assert!(attack::verify_recovery(&g, &mut oracle, gens4.letters()).unwrap());
            } else {
                let letters: Vec<Letter> = vec![
                    Letter::Xij { i: 1, j: 2, t: spec.one() },
                    Letter::Xij { i: 2, j: 1, t: spec.gen_k() },
                    Letter::Xi0 { i: 1, t: spec.one() },
                    Letter::X0i { i: 2, t: spec.gen_k() },
                    Letter::XiNegI { i: 1, s: spec.epsilon() },
                    Letter::XNegIi { i: 2, s: spec.epsilon() },
                ];
                assert!(attack::verify_recovery(&g, &mut oracle, &letters).unwrap());
            }
        }
    }
    println!(
        "ACCEPTANCE 9 (conjugator recovery, 100 hidden similitudes each at d=4 and d=5 over q=3): PASS in {:.1?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_10_serialization_and_determinism() {
    let spec = spec_for_q(3);
    let form = HermitianForm::split(&spec, 4).unwrap();
    // round-trip equality for every wire format
    let mut rng = ChaCha12Rng::seed_from_u64(0xD7);
    let g = random_unitary(&form, &mut rng, 60);
    let spec_repr: FieldSpecRepr = (&spec).into();
    let json = serde_json::to_string(&spec_repr).unwrap();
    assert_eq!(serde_json::from_str::<FieldSpecRepr>(&json).unwrap().resolve().unwrap(), spec);
    let json = serde_json::to_string(&MatRepr::from(&g)).unwrap();
    assert_eq!(serde_json::from_str::<MatRepr>(&json).unwrap().resolve(&spec).unwrap(), g);
    let w = word_for(&g).unwrap();
    let json = serde_json::to_string(&WordRepr::from(&w)).unwrap();
    assert_eq!(serde_json::from_str::<WordRepr>(&json).unwrap().resolve(&spec).unwrap(), w);
    let dec = decompose(&g).unwrap();
    let json = serde_json::to_string(&DecompositionRepr::from(&dec)).unwrap();
    assert_eq!(
        serde_json::from_str::<DecompositionRepr>(&json).unwrap().resolve(&spec).unwrap(),
        dec
    );
    let dm = diag_matrix(&spec, &DiagForm { lambda: spec.zeta(), alpha: None }, 4).unwrap();
    assert!(is_unitary(&dm, &form) && !is_special_unitary(&dm, &form));
    // keys and ciphertexts, through their reprs and back
    let kp = mor::keygen(2, &spec, &mut rng).unwrap();
    let pk_json = serde_json::to_string(&PublicKeyRepr::from(&kp.public)).unwrap();
    let pk2 = serde_json::from_str::<PublicKeyRepr>(&pk_json).unwrap().resolve().unwrap();
    assert_eq!(pk2.phi.images(), kp.public.phi.images());
    assert_eq!(pk2.phi_m.images(), kp.public.phi_m.images());
    let sk_json = serde_json::to_string(&SecretKeyRepr::new(&kp)).unwrap();
    let sk: SecretKeyRepr = serde_json::from_str(&sk_json).unwrap();
    assert_eq!(sk.secret().unwrap(), kp.secret_m);
    let m = random_su_word(&spec, 4, &mut rng, 40);
    let ct = mor::encrypt(&kp.public, &m, &mut rng).unwrap();
    let ct_json = serde_json::to_string(&CiphertextRepr::from(&ct)).unwrap();
    let gens = kp.public.phi.generator_set().clone();
    let ct2 = serde_json::from_str::<CiphertextRepr>(&ct_json).unwrap().resolve(&gens).unwrap();
    assert_eq!(ct2.c2, ct.c2);
    assert_eq!(ct2.c1.images(), ct.c1.images());
    assert_eq!(mor::decrypt(&kp, &ct2).unwrap(), m);
    // fixed seeds give byte-identical serialized output
    for seed in [0u64, 42] {
        let one = || {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let g = random_unitary(&form, &mut rng, 100);
            let kp = mor::keygen(2, &spec, &mut rng).unwrap();
            let ct = mor::encrypt(&kp.public, &Mat::identity(&spec, 4), &mut rng).unwrap();
            let mut bytes = serde_json::to_vec(&MatRepr::from(&g)).unwrap();
            bytes.extend(serde_json::to_vec(&PublicKeyRepr::from(&kp.public)).unwrap());
            bytes.extend(serde_json::to_vec(&CiphertextRepr::from(&ct)).unwrap());
            bytes
        };
        assert_eq!(one(), one(), "runs under seed {seed} must agree byte for byte");
    }
    // the exponent bound is available for sampling sanity
    assert!(mor::exponent_bound(&spec, 4) > BigUint::from(0u32));
    let _: u64 = rng.gen();
    println!("ACCEPTANCE 10 (serialization round-trips and seeded determinism): PASS");
}
