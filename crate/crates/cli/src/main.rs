use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use lattice_segments_cli::{
    cmd_approx, cmd_count, cmd_cover, cmd_enumerate, cmd_kappa, cmd_slice, cmd_verify,
    parse_f64_list, parse_i64_list, CliResult, SegmentSpec,
};

/// Exact counting of integer lattice points in spherical caps and segments.
#[derive(Parser)]
#[command(name = "lattice-segments", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SegmentArgs {
    /// Dimension d of the ambient space
    #[arg(short = 'd', long)]
    dim: usize,
    /// Squared sphere radius n (R = √n)
    #[arg(short = 'n', long)]
    n: u64,
    /// Integer direction, e.g. "1,0,-2" (exact membership)
    #[arg(long)]
    dir: Option<String>,
    /// Float unit direction, e.g. "0.6,0.8" (tri-state membership)
    #[arg(long)]
    dir_real: Option<String>,
    /// Declared exact fractions for --dir-real, e.g. "0=1/2,1=1/2"
    #[arg(long)]
    mask: Option<String>,
    /// Outer squared radius as an exact fraction "p/q"
    #[arg(long)]
    rho1: Option<String>,
    /// Inner squared radius as an exact fraction "p/q" (default 0)
    #[arg(long)]
    rho2: Option<String>,
    /// Outer opening angle in radians (float alternative to --rho1)
    #[arg(long)]
    theta1: Option<f64>,
    /// Inner opening angle in radians (float alternative to --rho2)
    #[arg(long)]
    theta2: Option<f64>,
}

impl SegmentArgs {
    fn spec(&self) -> SegmentSpec {
        SegmentSpec {
            d: self.dim,
            n: self.n,
            dir: self.dir.clone(),
            dir_real: self.dir_real.clone(),
            mask: self.mask.clone(),
            rho1: self.rho1.clone(),
            rho2: self.rho2.clone(),
            theta1: self.theta1,
            theta2: self.theta2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all lattice points on the sphere |x|² = n
    Enumerate {
        #[arg(short = 'd', long)]
        dim: usize,
        #[arg(short = 'n', long)]
        n: u64,
        /// Write the point set in the text format to this path
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        /// Search-volume budget override
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Count lattice points in a segment (JSON on stdout)
    Count {
        #[command(flatten)]
        seg: SegmentArgs,
        /// Fail (exit 3) instead of reporting a count interval
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Histogram of b·x over the sphere's lattice points (CSV)
    Slice {
        #[arg(short = 'd', long)]
        dim: usize,
        #[arg(short = 'n', long)]
        n: u64,
        /// Integer normal, e.g. "0,1"
        #[arg(short = 'b', long)]
        normal: String,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Sweep primitive normals for the best hyperplane section (JSON)
    Kappa {
        #[arg(short = 'd', long)]
        dim: usize,
        #[arg(short = 'n', long)]
        n: u64,
        /// Sweep every primitive normal with |b| up to this bound
        #[arg(long, default_value_t = 3)]
        max_norm: u64,
        #[arg(long)]
        sweep_budget: Option<u64>,
        #[arg(long)]
        enum_budget: Option<u64>,
    },
    /// Approximate a float direction by an integer vector (JSON)
    Approx {
        /// Unit direction, e.g. "0.5,0.5,0.70710678"
        #[arg(long)]
        beta: String,
        /// Declared exact fractions, e.g. "0=1,1=1"
        #[arg(long)]
        mask: Option<String>,
        /// Quality parameter H
        #[arg(short = 'H', long)]
        h: u64,
        /// Use the rational-quotients construction (needs --mask)
        #[arg(long)]
        rational_quotients: bool,
    },
    /// Build a covering segment of integer direction and verify containment
    Cover {
        #[command(flatten)]
        seg: SegmentArgs,
        /// Covering direction, e.g. "1,2"
        #[arg(short = 'a', long)]
        a: String,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run a verification sweep from a JSON config
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    match cli.command {
        Command::Enumerate {
            dim,
            n,
            out,
            budget,
        } => cmd_enumerate(dim, n, out.as_deref(), budget, stdout.lock()),
        Command::Count { seg, exact, budget } => {
            cmd_count(&seg.spec(), exact, budget, stdout.lock())
        }
        Command::Slice {
            dim,
            n,
            normal,
            out,
            budget,
        } => {
            let b = parse_i64_list(&normal)?;
            cmd_slice(dim, n, &b, out.as_deref(), budget, stdout.lock())
        }
        Command::Kappa {
            dim,
            n,
            max_norm,
            sweep_budget,
            enum_budget,
        } => cmd_kappa(dim, n, max_norm, sweep_budget, enum_budget, stdout.lock()),
        Command::Approx {
            beta,
            mask,
            h,
            rational_quotients,
        } => {
            let beta = parse_f64_list(&beta)?;
            cmd_approx(&beta, mask.as_deref(), h, rational_quotients, stdout.lock())
        }
        Command::Cover { seg, a, budget } => {
            let a = parse_i64_list(&a)?;
            cmd_cover(&seg.spec(), &a, budget, stdout.lock())
        }
        Command::Verify { config } => cmd_verify(&config, stdout.lock()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
