//! Command-line front end: reproducible analyses of diagram spectra and
//! substitution tilings with machine-readable reports.
//!
//! Exit codes: 0 ok, 2 validation, 3 domain (not Pisot), 4 structural
//! (disconnected horizontal set), 5 numeric-tolerance failure.

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bratteli-spectra",
    about = "Spectral triples of stationary Bratteli diagrams and 1-D substitution tilings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Primitivity, eigen data, dimension, poles/residues and the measure table
    Analyze {
        /// graph description file (JSON)
        #[arg(long)]
        spec: String,
        /// pole lattice extent in the imaginary direction
        #[arg(long, default_value_t = 2)]
        kmax: i64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Zeta function at a point: closed form against the truncated series
    Zeta {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        re: f64,
        #[arg(long, default_value_t = 0.0)]
        im: f64,
        /// series truncation level
        #[arg(long, default_value_t = 200)]
        levels: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Heat-trace sweep: direct, expansion and residual columns
    Heat {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 1e-8)]
        t_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        t_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        /// truncation tolerance of the direct series
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Fourier modes of the periodic coefficient functions
        #[arg(long, default_value_t = 40)]
        kmax: usize,
        /// json or csv
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Cylinder measures to a depth, with Cesaro cross-checks
    Measure {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Cesaro levels for the convergence cross-check
        #[arg(long, default_value_t = 25)]
        levels: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Spectral distances for a list of word pairs
    Distance {
        #[arg(long)]
        spec: String,
        /// JSON file: [{"x": ["edge", ...], "y": [...]}, ...]
        #[arg(long)]
        pairs: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// cross-check each distance against the Dijkstra oracle
        #[arg(long, default_value_t = false)]
        oracle: bool,
        /// json or csv
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Level-n quadratic form of a circle mode or cylinder indicator
    Form {
        #[arg(long)]
        spec: String,
        /// trigonometric mode index (one-vertex two-loop graphs)
        #[arg(long, conflicts_with = "cylinder")]
        trig: Option<i64>,
        /// comma-separated edge names of a cylinder indicator
        #[arg(long)]
        cylinder: Option<String>,
        #[arg(long, default_value_t = 18)]
        levels: usize,
        /// json or csv
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Telescoping: dimension invariance and the Lipschitz sandwich
    Telescope {
        #[arg(long)]
        spec: String,
        #[arg(short, long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Pisot pipeline: Dirichlet parameters, geometry, Laplacian eigenvalues
    Pisot {
        /// substitution rules file (JSON)
        #[arg(long)]
        rules: String,
        #[arg(long, default_value_t = 10_000)]
        kmax: i64,
        /// frequency as comma-separated rational coefficients (repeatable);
        /// defaults to the power basis of the dilation field
        #[arg(long)]
        beta: Vec<String>,
        /// json or csv (csv emits the eigenvalue table)
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tensor triple over the hull: dimension, slope fit, residues
    Omega {
        #[arg(long)]
        rules: String,
        #[arg(long, default_value_t = 40)]
        kmax: i64,
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { spec, kmax, out } => commands::analyze(&spec, kmax, out.as_deref()),
        Command::Zeta {
            spec,
            re,
            im,
            levels,
            out,
        } => commands::zeta(&spec, re, im, levels, out.as_deref()),
        Command::Heat {
            spec,
            t_min,
            t_max,
            points,
            eps,
            kmax,
            format,
            out,
        } => commands::heat(&spec, t_min, t_max, points, eps, kmax, &format, out.as_deref()),
        Command::Measure {
            spec,
            depth,
            levels,
            out,
        } => commands::measure(&spec, depth, levels, out.as_deref()),
        Command::Distance {
            spec,
            pairs,
            depth,
            oracle,
            format,
            out,
        } => commands::distance(&spec, &pairs, depth, oracle, &format, out.as_deref()),
        Command::Form {
            spec,
            trig,
            cylinder,
            levels,
            format,
            out,
        } => commands::form(&spec, trig, cylinder.as_deref(), levels, &format, out.as_deref()),
        Command::Telescope {
            spec,
            p,
            samples,
            seed,
            depth,
            out,
        } => commands::telescope(&spec, p, samples, seed, depth, out.as_deref()),
        Command::Pisot {
            rules,
            kmax,
            beta,
            format,
            out,
        } => commands::pisot(&rules, kmax, &beta, &format, out.as_deref()),
        Command::Omega { rules, kmax, out } => commands::omega(&rules, kmax, out.as_deref()),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
