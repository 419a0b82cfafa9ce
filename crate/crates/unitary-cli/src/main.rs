//! Batch CLI for the unitary word-problem library: decompose and verify
//! generator words, reduce special-unitary elements, run the
//! conjugation-automorphism cryptosystem, recover its conjugator, and
//! benchmark the elimination kernel.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;
use unitary::elim::{decompose, reduce_su_to_identity, word_for};
use unitary::gf::{mult_count, reset_mult_count};
use unitary::linalg::{half, random_unitary, HermitianForm};
use unitary::mor::{self, GeneratorSet};
use unitary::serial::{
    CiphertextRepr, DecompositionRepr, MatRepr, PublicKeyRepr, SecretKeyRepr,
    WordRepr,
};
use unitary::{attack, FieldSpec, Mat};

#[derive(Parser)]
#[command(
    name = "unitary",
    version,
    about = "Exact word-problem computations in split unitary groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random unitary matrix and write it as JSON.
    RandomElement {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of elementary letters in the mixing word (default 10·d²).
        #[arg(long)]
        letters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a unitary matrix into left/right words and the diagonal.
    Decompose {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the single generator word for the matrix.
        #[arg(long)]
        word_out: Option<PathBuf>,
    },
    /// Re-multiply a word and compare against a matrix.
    Verify {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        word: PathBuf,
    },
    /// Express a determinant-one unitary matrix over elementary letters.
    SuReduce {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a key pair for the conjugation cryptosystem.
    Keygen {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        /// Even dimension 2l.
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pub_out: PathBuf,
        #[arg(long)]
        sec_out: PathBuf,
    },
    /// Encrypt a special-unitary plaintext under a public key.
    Encrypt {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext with the secret exponent.
    Decrypt {
        #[arg(long)]
        sec: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the conjugator behind a public key, up to a scalar.
    Attack {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the decomposition and count field multiplications.
    Bench {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        /// Comma-separated dimensions for a fixed-field sweep.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Comma-separated extension degrees for a fixed-dimension sweep.
        #[arg(long, value_delimiter = ',')]
        e_list: Option<Vec<usize>>,
        /// Dimension used with --e-list.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_matrix(p: u64, e: usize, path: &Path) -> anyhow::Result<(FieldSpec, Mat)> {
    let spec = FieldSpec::new(p, e)?;
    let repr: MatRepr = read_json(path)?;
    let m = repr.resolve(&spec)?;
    Ok((spec, m))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::RandomElement { p, e, dim, seed, letters, out } => {
            let spec = FieldSpec::new(p, e)?;
            let form = HermitianForm::split(&spec, dim)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n_letters = letters.unwrap_or(10 * dim * dim);
            let g = random_unitary(&form, &mut rng, n_letters);
            write_json(&out, &MatRepr::from(&g))?;
            println!("wrote a random element of U({dim}, {}²)", spec.q());
        }
        Cmd::Decompose { p, e, input, out, word_out } => {
            let (spec, g) = load_matrix(p, e, &input)?;
            let dec = decompose(&g)?;
            write_json(&out, &DecompositionRepr::from(&dec))?;
            println!(
                "decomposed: {} left letters, {} right letters",
                dec.left.len(),
                dec.right.len()
            );
            if let Some(word_path) = word_out {
                let w = word_for(&g)?;
                write_json(&word_path, &WordRepr::from(&w))?;
                println!("word length {}", w.len());
            }
            let _ = spec;
        }
        Cmd::Verify { p, e, input, word } => {
            let (spec, g) = load_matrix(p, e, &input)?;
            let w: WordRepr = read_json(&word)?;
            let w = w.resolve(&spec)?;
            if w.evaluate(&spec) == g {
                println!("EXACT MATCH");
            } else {
                bail!("word does not evaluate to the matrix");
            }
        }
        Cmd::SuReduce { p, e, input, out } => {
            let (spec, g) = load_matrix(p, e, &input)?;
            let w = reduce_su_to_identity(&g)?;
            debug_assert_eq!(w.evaluate(&spec), g);
            write_json(&out, &WordRepr::from(&w))?;
            println!("reduced to {} elementary letters", w.len());
        }
        Cmd::Keygen { p, e, dim, seed, pub_out, sec_out } => {
            if dim % 2 != 0 {
                bail!("keygen needs an even dimension");
            }
            let spec = FieldSpec::new(p, e)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let kp = mor::keygen(half(dim), &spec, &mut rng)?;
            write_json(&pub_out, &PublicKeyRepr::from(&kp.public))?;
            write_json(&sec_out, &SecretKeyRepr::new(&kp))?;
            println!("key pair over SU({dim}, {}²) written", spec.q());
        }
        Cmd::Encrypt { public, input, seed, out } => {
            let pk_repr: PublicKeyRepr = read_json(&public)?;
            let pk = pk_repr.resolve()?;
            let gens = pk.phi.generator_set().clone();
            let m_repr: MatRepr = read_json(&input)?;
            let m = m_repr.resolve(gens.spec())?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let ct = mor::encrypt(&pk, &m, &mut rng)?;
            write_json(&out, &CiphertextRepr::from(&ct))?;
            println!("ciphertext written");
        }
        Cmd::Decrypt { sec, input, out } => {
            let sk: SecretKeyRepr = read_json(&sec)?;
            let spec = sk.spec.resolve()?;
            let gens = Arc::new(GeneratorSet::new(&spec, sk.d)?);
            let ct_repr: CiphertextRepr = read_json(&input)?;
            let ct = ct_repr.resolve(&gens)?;
            let m = mor::decrypt_with(&gens, &sk.secret()?, &ct)?;
            write_json(&out, &MatRepr::from(&m))?;
            println!("plaintext written");
        }
        Cmd::Attack { public, out } => {
            let pk_repr: PublicKeyRepr = read_json(&public)?;
            let pk = pk_repr.resolve()?;
            let gens = pk.phi.generator_set().clone();
            let spec = gens.spec().clone();
            let mut oracle = pk.phi.oracle();
            let g = attack::recover_conjugator_even(&mut oracle, half(gens.d()), &spec)?;
            let ok = attack::verify_recovery(&g, &mut oracle, gens.letters())?;
            write_json(&out, &MatRepr::from(&g))?;
            println!(
                "conjugator recovered up to a scalar; verification on {} generators: {}",
                gens.len(),
                if ok { "PASS" } else { "FAIL" }
            );
            if !ok {
                bail!("recovered conjugator failed verification");
            }
        }
        Cmd::Bench { p, e, dims, e_list, dim, trials, seed, format, out } => {
            let configs: Vec<(usize, u64, usize)> = match (&dims, &e_list) {
                (Some(ds), None) => ds.iter().map(|&d| (d, p, e)).collect(),
                (None, Some(es)) => {
                    let d = dim.ok_or_else(|| anyhow!("--e-list needs --dim"))?;
                    es.iter().map(|&ee| (d, p, ee)).collect()
                }
                (Some(_), Some(_)) => bail!("choose one of --dims or --e-list"),
                (None, None) => bail!("one of --dims or --e-list is required"),
            };
            if trials == 0 {
                bail!("--trials must be positive");
            }
            let records = run_bench(&configs, trials, seed)?;
            let slope = fit_scaling(&records).ok();
            let text = render_bench(&records, slope, format)?;
            match out {
                Some(path) => std::fs::write(&path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

/// One benchmark aggregate: mean wall time and mean multiplication count
/// per decomposition at a given (d, p, e).
#[derive(serde::Serialize)]
struct BenchRecord {
    d: usize,
    p: u64,
    e: usize,
    trials: usize,
    mean_ns: u128,
    mult_count: u64,
}

fn run_bench(
    configs: &[(usize, u64, usize)],
    trials: usize,
    seed: u64,
) -> anyhow::Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for &(d, p, e) in configs {
        let spec = FieldSpec::new(p, e)?;
        let form = HermitianForm::split(&spec, d)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ d as u64);
        let samples: Vec<Mat> =
            (0..trials).map(|_| random_unitary(&form, &mut rng, 10 * d * d)).collect();
        let mut total_ns = 0u128;
        let mut total_mults = 0u64;
        for g in &samples {
            reset_mult_count();
            let t0 = Instant::now();
            let dec = decompose(g)?;
            total_ns += t0.elapsed().as_nanos();
            total_mults += mult_count();
            std::hint::black_box(dec);
        }
        records.push(BenchRecord {
            d,
            p,
            e,
            trials,
            mean_ns: total_ns / trials as u128,
            mult_count: total_mults / trials as u64,
        });
    }
    Ok(records)
}

/// Least-squares slope of log(mult_count) against log(l); needs at least
/// three distinct dimensions.
fn fit_scaling(records: &[BenchRecord]) -> anyhow::Result<f64> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in records {
        if seen.insert(r.d) {
            points.push(((half(r.d) as f64).ln(), (r.mult_count as f64).ln()));
        }
    }
    if points.len() < 3 {
        bail!("{}", unitary::Error::InsufficientData(3));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

fn render_bench(
    records: &[BenchRecord],
    slope: Option<f64>,
    format: Format,
) -> anyhow::Result<String> {
    match format {
        Format::Csv => {
            let mut text = String::from("d,p,e,trials,mean_ns,mult_count\n");
            for r in records {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.d, r.p, r.e, r.trials, r.mean_ns, r.mult_count
                ));
            }
            if let Some(s) = slope {
                text.push_str(&format!("# log-log slope of mult_count vs l: {s:.3}\n"));
            }
            Ok(text)
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Out<'a> {
                records: &'a [BenchRecord],
                #[serde(skip_serializing_if = "Option::is_none")]
                slope: Option<f64>,
            }
            Ok(serde_json::to_string_pretty(&Out { records, slope })? + "\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(d: usize, mult_count: u64) -> BenchRecord {
        BenchRecord { d, p: 7, e: 2, trials: 1, mean_ns: 1, mult_count }
    }

    #[test]
    fn fit_recovers_synthetic_exponents() {
        // counts exactly proportional to l³ fit slope 3
        let cubic: Vec<BenchRecord> =
            [10usize, 20, 40, 80].iter().map(|&d| record(d, (d as u64 / 2).pow(3))).collect();
        assert!((fit_scaling(&cubic).unwrap() - 3.0).abs() < 1e-9);
        let quadratic: Vec<BenchRecord> =
            [10usize, 20, 40, 80].iter().map(|&d| record(d, (d as u64 / 2).pow(2))).collect();
        assert!((fit_scaling(&quadratic).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_three_points() {
        let two: Vec<BenchRecord> = [10usize, 20].iter().map(|&d| record(d, 1)).collect();
        assert!(fit_scaling(&two).is_err());
    }
}
