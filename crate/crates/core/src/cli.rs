//! Command-line frontend. One subcommand per party action plus analysis
//! and corpus benchmarking.
//!
//! Failures print `error: <Name>: <message>` on stderr, where `<Name>` is
//! [`Error::name`], and exit with status 1. Usage errors exit with 2.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{
    chi_square_homogeneity, histogram_and_entropy, measure_er, mse, ones_per_block_histogram,
    pe_entropy, standard_encrypt, write_csv, CapacityReport, CsvRow,
};
use crate::crypto::{cipher_payload, DataHidingKey, EncryptionKey};
use crate::embedding::{embed, extract, recover};
use crate::error::{Error, Result};
use crate::pipeline::{full_cycle_check, reserve_and_encrypt};
use crate::plane::PlaneSet;
use crate::prediction::compute_pe;
use crate::raster::{list_corpus, load_pgm, store_pgm};

#[derive(Parser, Debug)]
#[command(
    name = "rdhei",
    version,
    about = "Reversible data hiding in encrypted grayscale images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct KeyE {
    /// Encryption key Ke, 64 hex characters
    #[arg(long = "key-e", env = "RDHEI_KEY_E", hide_env_values = true)]
    key_e: Option<String>,
    /// File holding Ke
    #[arg(long = "key-e-file", conflicts_with = "key_e")]
    key_e_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct KeyD {
    /// Data-hiding key Kd, 64 hex characters
    #[arg(long = "key-d", env = "RDHEI_KEY_D", hide_env_values = true)]
    key_d: Option<String>,
    /// File holding Kd
    #[arg(long = "key-d-file", conflicts_with = "key_d")]
    key_d_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Content owner: reserve room in an image and encrypt it
    ReserveEncrypt {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        key: KeyE,
    },
    /// Data hider: embed a payload file into an encrypted image
    Embed {
        input: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        key: KeyD,
    },
    /// Receiver with Kd: extract the hidden payload
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        key: KeyD,
    },
    /// Receiver with Ke: recover the original image
    Recover {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        key: KeyE,
    },
    /// Statistics of one image, optionally against a second one
    Analyze {
        image: PathBuf,
        #[arg(long)]
        compare: Option<PathBuf>,
        /// With Ke, also compare ones-per-block counts of the reserved
        /// encryption against plain encryption
        #[command(flatten)]
        key: KeyE,
    },
    /// Capacity (and optional round trip) over a directory of PGM files
    Bench {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        key_e: KeyE,
        #[command(flatten)]
        key_d: KeyD,
    },
}

fn resolve(value: &Option<String>, file: &Option<PathBuf>, flag: &str) -> Result<String> {
    if let Some(value) = value {
        return Ok(value.clone());
    }
    if let Some(path) = file {
        return Ok(fs::read_to_string(path)?);
    }
    Err(Error::InvalidKey(format!("{flag} is required")))
}

impl KeyE {
    fn get(&self) -> Result<EncryptionKey> {
        resolve(&self.key_e, &self.key_e_file, "--key-e")?.parse()
    }

    fn maybe(&self) -> Result<Option<EncryptionKey>> {
        if self.key_e.is_none() && self.key_e_file.is_none() {
            return Ok(None);
        }
        self.get().map(Some)
    }
}

impl KeyD {
    fn get(&self) -> Result<DataHidingKey> {
        resolve(&self.key_d, &self.key_d_file, "--key-d")?.parse()
    }

    fn maybe(&self) -> Result<Option<DataHidingKey>> {
        if self.key_d.is_none() && self.key_d_file.is_none() {
            return Ok(None);
        }
        self.get().map(Some)
    }
}

fn load_planes(path: &Path) -> Result<PlaneSet> {
    Ok(PlaneSet::from_image(&load_pgm(path)?))
}

pub fn print_capacity<W: Write>(out: &mut W, report: &CapacityReport) -> std::io::Result<()> {
    writeln!(
        out,
        "plane  flagged      UB     NUB  emb-NUB   aux-bits   net-bits"
    )?;
    for (p, pc) in report.planes.iter().enumerate() {
        writeln!(
            out,
            "{:>5}  {:>7}  {:>6}  {:>6}  {:>7}  {:>9}  {:>9}",
            p + 1,
            if pc.flagged { "yes" } else { "no" },
            pc.ub_count,
            pc.nub_count,
            pc.embeddable_nubs,
            pc.aux_bits,
            pc.net_bits
        )?;
    }
    writeln!(
        out,
        "overflow pixels: {} ({:.4}%)",
        report.overflow_pixels,
        100.0 * report.overflow_fraction()
    )?;
    writeln!(out, "max payload: {} bytes", report.max_payload_bytes())?;
    writeln!(out, "ER: {:.4} bpp", report.er)?;
    if let Some(diag) = &report.diagnostic {
        writeln!(out, "note: {diag}")?;
    }
    Ok(())
}

fn analyze<W: Write>(
    out: &mut W,
    image: &Path,
    compare: Option<&Path>,
    ke: Option<EncryptionKey>,
) -> Result<()> {
    let img = load_pgm(image)?;
    let (_, entropy) = histogram_and_entropy(&img);
    writeln!(out, "image: {}", image.display())?;
    writeln!(out, "size: {}x{}", img.width(), img.height())?;
    writeln!(out, "entropy_bits: {entropy:.6}")?;
    writeln!(out, "pe_entropy_bits: {:.6}", pe_entropy(&compute_pe(&img)))?;
    let report = measure_er(&img);
    print_capacity(out, &report)?;

    if let Some(other) = compare {
        let other = load_pgm(other)?;
        writeln!(out, "mse: {}", mse(&img, &other)?)?;
    }

    writeln!(out, "ones-per-block (planes 1..4), counts for 0..=16 ones:")?;
    let planes = PlaneSet::from_image(&img);
    for k in 0..4 {
        let hist = ones_per_block_histogram(planes.plane(k));
        writeln!(out, "plane{}: {}", k + 1, join(&hist))?;
    }

    if let Some(ke) = ke {
        let reserved = reserve_and_encrypt(&img, &ke)?;
        let standard = PlaneSet::from_image(&standard_encrypt(&img, &ke));
        let (_, enc_entropy) = histogram_and_entropy(&reserved.encrypted_image());
        writeln!(out, "encrypted_entropy_bits: {enc_entropy:.6}")?;
        for k in 0..4 {
            let ours = ones_per_block_histogram(reserved.encrypted.plane(k));
            let theirs = ones_per_block_histogram(standard.plane(k));
            let test = chi_square_homogeneity(&ours, &theirs);
            writeln!(out, "encrypted plane{}: {}", k + 1, join(&ours))?;
            writeln!(out, "standard  plane{}: {}", k + 1, join(&theirs))?;
            writeln!(
                out,
                "chi2 plane{}: statistic={:.3} dof={} p={:.4}",
                k + 1,
                test.statistic,
                test.dof,
                test.p_value
            )?;
        }
    }
    Ok(())
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn bench_row(
    path: &Path,
    ke: Option<&EncryptionKey>,
    kd: Option<&DataHidingKey>,
) -> Result<CsvRow> {
    let img = load_pgm(path)?;
    let report = measure_er(&img);
    let mse = match (ke, kd) {
        (Some(ke), Some(kd)) if report.diagnostic.is_none() => {
            let payload = cipher_payload(&vec![0u8; report.max_payload_bytes()], kd);
            Some(full_cycle_check(&img, ke, kd, &payload)?.mse)
        }
        (Some(ke), _) if report.diagnostic.is_none() => {
            let reserved = reserve_and_encrypt(&img, ke)?;
            Some(mse(&img, &recover(&reserved.encrypted, ke)?)?)
        }
        _ => None,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(CsvRow { name, report, mse })
}

fn bench(
    dir: &Path,
    out: &Path,
    jobs: usize,
    ke: Option<EncryptionKey>,
    kd: Option<DataHidingKey>,
) -> Result<usize> {
    let paths = list_corpus(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let rows: Vec<CsvRow> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| bench_row(p, ke.as_ref(), kd.as_ref()))
            .collect::<Result<_>>()
    })?;
    write_csv(fs::File::create(out)?, &rows)?;
    Ok(rows.len())
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn execute<W: Write>(command: Command, out: &mut W) -> Result<()> {
    match command {
        Command::ReserveEncrypt { input, output, key } => {
            let ke = key.get()?;
            let img = load_pgm(&input)?;
            let result = reserve_and_encrypt(&img, &ke)?;
            store_pgm(&result.encrypted_image(), &output)?;
            print_capacity(out, &result.report)?;
        }
        Command::Embed {
            input,
            payload,
            output,
            key,
        } => {
            let kd = key.get()?;
            let planes = load_planes(&input)?;
            let data = fs::read(&payload)?;
            let marked = embed(&planes, &data, &kd)?;
            store_pgm(&marked.to_image(), &output)?;
            writeln!(out, "embedded {} bytes", data.len())?;
        }
        Command::Extract { input, output, key } => {
            let kd = key.get()?;
            let data = extract(&load_planes(&input)?, &kd)?;
            fs::write(&output, &data)?;
            writeln!(out, "extracted {} bytes", data.len())?;
        }
        Command::Recover { input, output, key } => {
            let ke = key.get()?;
            let img = recover(&load_planes(&input)?, &ke)?;
            store_pgm(&img, &output)?;
            writeln!(out, "recovered {}x{}", img.width(), img.height())?;
        }
        Command::Analyze {
            image,
            compare,
            key,
        } => analyze(out, &image, compare.as_deref(), key.maybe()?)?,
        Command::Bench {
            dir,
            out: csv_path,
            jobs,
            key_e,
            key_d,
        } => {
            let n = bench(&dir, &csv_path, jobs, key_e.maybe()?, key_d.maybe()?)?;
            writeln!(out, "wrote {n} rows to {}", csv_path.display())?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            1
        }
    }
}
