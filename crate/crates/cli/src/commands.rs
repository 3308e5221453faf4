use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use lkss::leaky::RngRandomness;
use lkss::rational::{self, Rational};
use lkss::{converse, oracle, planner, sharefile, PrimeField, SchemeParams};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] lkss::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "lkss", version, about = "Threshold file storage with a bounded leakage budget")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print optimal share size, randomness and superblock layout.
    Plan {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Also write the planned access function as CSV.
        #[arg(long)]
        access_csv: Option<PathBuf>,
    },
    /// Tabulate optimal ratios over z and a grid of alpha values, as CSV.
    Sweep {
        #[arg(short = 'T', long = "servers")]
        servers: usize,
        #[arg(long)]
        tau: usize,
        /// Smallest privacy threshold (default 1).
        #[arg(long)]
        z_min: Option<usize>,
        /// Largest privacy threshold (default tau - 1).
        #[arg(long)]
        z_max: Option<usize>,
        /// Alpha runs over k/den for k = 0..=den (default 4 * tau).
        #[arg(long)]
        alpha_den: Option<usize>,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split a file into T share files.
    Split {
        input: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Directory receiving share_<t>.lkss.
        #[arg(short, long)]
        output: PathBuf,
        /// Deterministic randomness for testing. Not secure.
        #[arg(long, requires = "insecure_seed_ok")]
        seed: Option<u64>,
        /// Acknowledge that --seed makes the shares predictable.
        #[arg(long)]
        insecure_seed_ok: bool,
    },
    /// Rebuild a file from at least tau share files.
    Recover {
        #[arg(required = true)]
        shares: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Measure the leakage of every server subset and check it against the plan.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Write per-subset results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Search the share-size lower bound exhaustively on a rational grid.
    Converse {
        #[arg(short = 'z', long)]
        z: usize,
        #[arg(long)]
        tau: usize,
        #[arg(long, value_parser = parse_rational)]
        alpha: Rational,
        /// Grid denominator: profile values range over k/D.
        #[arg(short = 'D', long = "den")]
        den: u64,
    },
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(short = 'T', long = "servers")]
    servers: usize,
    #[arg(long)]
    tau: usize,
    #[arg(short = 'z', long)]
    z: usize,
    /// Leakage budget as p/q.
    #[arg(long, value_parser = parse_rational)]
    alpha: Rational,
    /// Field modulus, a prime above T.
    #[arg(short = 'q', long, default_value_t = lkss::field::DEFAULT_MODULUS)]
    q: u64,
}

impl SchemeArgs {
    fn params(&self) -> Result<SchemeParams> {
        Ok(SchemeParams::new(
            self.servers,
            self.tau,
            self.z,
            self.alpha,
            PrimeField::new(self.q)?,
        )?)
    }
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan { scheme, access_csv } => plan(&scheme, access_csv.as_deref()),
        Command::Sweep {
            servers,
            tau,
            z_min,
            z_max,
            alpha_den,
            output,
        } => sweep(servers, tau, z_min, z_max, alpha_den, output.as_deref()),
        Command::Split {
            input,
            scheme,
            output,
            seed,
            insecure_seed_ok,
        } => split(&input, &scheme, &output, seed, insecure_seed_ok),
        Command::Recover { shares, output } => recover(&shares, &output),
        Command::Verify { scheme, csv } => verify(&scheme, csv.as_deref()),
        Command::Converse { z, tau, alpha, den } => converse_cmd(z, tau, alpha, den),
    }
}

fn plan(scheme: &SchemeArgs, access_csv: Option<&Path>) -> Result<()> {
    let params = scheme.params()?;
    let plan = planner::plan(&params)?;
    let lay = plan.layout;
    println!("scheme: {params}");
    println!("case: {:?}", plan.case);
    println!("lambda/H(F) = {}", fraction(plan.lambda_ratio));
    println!("lambda_sum/H(F) = {}", fraction(plan.lambda_sum_ratio));
    println!("rho/H(F) = {}", fraction(plan.rho_ratio));
    println!(
        "superblock: n' = {}, n1 = {}, n2 = {}, {} symbols per server, {} random symbols",
        lay.n_prime, lay.n1, lay.n2, lay.share_symbols_per_server, lay.rand_per_superblock
    );
    if let Some(path) = access_csv {
        let g = lkss::access::planned_g(&params)?;
        fs::write(path, g.to_csv()).map_err(io_err(path))?;
    }
    Ok(())
}

/// Always `p/q`, even for integers.
fn fraction(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn sweep(
    servers: usize,
    tau: usize,
    z_min: Option<usize>,
    z_max: Option<usize>,
    alpha_den: Option<usize>,
    output: Option<&Path>,
) -> Result<()> {
    if tau < 2 {
        return Err(CliError::Usage(format!("tau = {tau} leaves no valid z")));
    }
    let z_range = z_min.unwrap_or(1)..=z_max.unwrap_or(tau - 1);
    let den = alpha_den.unwrap_or(4 * tau);
    if den == 0 {
        return Err(CliError::Usage("--alpha-den must be positive".into()));
    }
    let rows = planner::sweep(servers, tau, z_range, &planner::alpha_grid(den))?;
    let csv = planner::sweep_csv(&rows);
    match output {
        Some(path) => fs::write(path, csv).map_err(io_err(path))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
        }
    }
    Ok(())
}

pub fn share_file_name(server: usize) -> String {
    format!("share_{server}.lkss")
}

fn split(input: &Path, scheme: &SchemeArgs, output: &Path, seed: Option<u64>, insecure_ok: bool) -> Result<()> {
    let params = scheme.params()?;
    let data = fs::read(input).map_err(io_err(input))?;
    let bundles = match seed {
        Some(seed) => {
            if !insecure_ok {
                return Err(CliError::Usage("--seed needs --insecure-seed-ok".into()));
            }
            encode_with(&data, &params, ChaCha20Rng::seed_from_u64(seed))?
        }
        None => encode_with(&data, &params, OsRng)?,
    };
    fs::create_dir_all(output).map_err(io_err(output))?;
    for b in &bundles {
        let path = output.join(share_file_name(b.server_index));
        fs::write(&path, sharefile::write_share(b)?).map_err(io_err(&path))?;
    }
    println!(
        "wrote {} shares of {} bytes each to {}",
        bundles.len(),
        sharefile::HEADER_LEN + 4 * bundles.first().map_or(0, |b| b.payload.len()),
        output.display()
    );
    Ok(())
}

fn encode_with<R: RngCore>(data: &[u8], params: &SchemeParams, rng: R) -> Result<Vec<lkss::ShareBundle>> {
    Ok(sharefile::split_bytes(data, params, &mut RngRandomness::new(rng))?)
}

fn recover(shares: &[PathBuf], output: &Path) -> Result<()> {
    let bundles = shares
        .iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(io_err(path))?;
            sharefile::read_share(&bytes).map_err(|e| match e {
                lkss::Error::FileFormat(m) => CliError::Usage(format!("{}: {m}", path.display())),
                other => other.into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let data = sharefile::recover_bytes(&bundles)?;
    fs::write(output, &data).map_err(io_err(output))?;
    println!("recovered {} bytes to {}", data.len(), output.display());
    Ok(())
}

fn verify(scheme: &SchemeArgs, csv: Option<&Path>) -> Result<()> {
    let params = scheme.params()?;
    let report = oracle::check_scheme(&params)?;
    print!("{}", report.render());
    if let Some(path) = csv {
        fs::write(path, report.to_csv()).map_err(io_err(path))?;
    }
    let rates = oracle::sum_rate(&params)?;
    println!(
        "sum of share entropies / H(F) = {} (bound {})",
        rates.share_entropy_sum, rates.sum_bound
    );
    println!("randomness / H(F) = {} (bound {})", rates.randomness, rates.randomness_bound);
    if !report.passed() {
        return Err(CliError::Verification(format!("{} violations", report.violations.len())));
    }
    if !rates.tight() {
        return Err(CliError::Verification("share sizes or randomness off the optimum".into()));
    }
    Ok(())
}

fn converse_cmd(z: usize, tau: usize, alpha: Rational, den: u64) -> Result<()> {
    let check = converse::bound_check(z, tau, alpha, den)?;
    let argmin = check
        .privacy_argmin
        .values()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    println!("min = {}", check.privacy_min);
    println!("argmin on [{}, {}] = [{argmin}]", z, tau + 1);
    println!("bound (1 - alpha)/(tau - z) = {}", check.privacy_bound);
    println!("threshold branch min = {} (bound {})", check.threshold_min, check.threshold_bound);
    let envelope = converse::envelope_properties(&check.privacy_argmin);
    let ok = check.holds() && envelope.passed();
    println!("{}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        return Err(CliError::Verification("converse bound not certified".into()));
    }
    Ok(())
}
