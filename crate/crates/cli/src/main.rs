//! `quasiclust` command line.
//!
//! Exit status: 0 on success, 1 when requested checks fail, 2 on any error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use quasiclust::dendrogram::{cut_at, upsilon};
use quasiclust::dioid::dsl;
use quasiclust::distance::{network_distance_upper, ExactDistance, DEFAULT_EXACT_CAP};
use quasiclust::export::{cut_to_csv, cut_to_json, dendrogram_to_json, export_dot};
use quasiclust::io::{format_number, write_matrix_csv, DEFAULT_FLOW_FLOOR};
use quasiclust::network::{check_quasi_ultrametric, scale_transform, Network, ScaleFn};
use quasiclust::pipeline::{self, oracle_cap_from_env, InputFormat, OutputFormat, RunConfig};
use quasiclust::suite::{run_suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "quasiclust", version, about = "Hierarchical quasi-clustering of asymmetric networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InFormat {
    MatrixCsv,
    EdgeTsv,
    FlowCsv,
}

impl From<InFormat> for InputFormat {
    fn from(f: InFormat) -> Self {
        match f {
            InFormat::MatrixCsv => InputFormat::MatrixCsv,
            InFormat::EdgeTsv => InputFormat::EdgeTsv,
            InFormat::FlowCsv => InputFormat::FlowCsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Dot,
    Csv,
}

impl From<OutFormat> for OutputFormat {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => OutputFormat::Json,
            OutFormat::Dot => OutputFormat::Dot,
            OutFormat::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct Input {
    /// Network file.
    input: PathBuf,
    /// Input format; by default `.tsv` means edge-tsv and anything else matrix-csv.
    #[arg(long = "input-format", value_enum)]
    input_format: Option<InFormat>,
    /// Change of scale applied entrywise first, e.g. `linear:2`,
    /// `power:2`, `sum:id+power:3`, `linear:2|power:2`.
    #[arg(long)]
    scale: Option<String>,
    /// Round entries to this many decimal digits first.
    #[arg(long)]
    quantize: Option<u32>,
    /// Floor for clamped flow dissimilarities.
    #[arg(long, default_value_t = DEFAULT_FLOW_FLOOR)]
    flow_floor: f64,
}

impl Input {
    fn input_format(&self) -> InputFormat {
        match self.input_format {
            Some(f) => f.into(),
            None if self.input.extension().is_some_and(|e| e == "tsv") => InputFormat::EdgeTsv,
            None => InputFormat::MatrixCsv,
        }
    }

    fn scale(&self) -> Result<Option<ScaleFn>> {
        self.scale
            .as_deref()
            .map(ScaleFn::parse)
            .transpose()
            .context("invalid --scale")
    }

    fn load(&self) -> Result<Network> {
        let loaded = pipeline::load_network(&self.input, self.input_format(), self.flow_floor)?;
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        let mut net = loaded.network;
        if let Some(digits) = self.quantize {
            net = net.quantize(digits)?;
        }
        if let Some(scale) = self.scale()? {
            net = scale_transform(&net, &scale)?;
        }
        Ok(net)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that the input is a valid network and report its properties.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Print the directed single linkage quasi-ultrametric as matrix CSV.
    Dsl {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Quasi-partitions of the DSL output at the given resolutions.
    Cut {
        #[command(flatten)]
        input: Input,
        #[arg(long = "delta", required = true, num_args = 1.., allow_negative_numbers = true)]
        deltas: Vec<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        /// Keep only the transitive reduction of the edges (DOT output).
        #[arg(long)]
        reduced: bool,
        /// Write one file per resolution here instead of standard output.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the quasi-dendrogram of the DSL output as JSON.
    Dendrogram {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Network distance between two matrix files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// Exact value by enumerating correspondences (the default).
        #[arg(long, conflicts_with = "upper")]
        exact: bool,
        /// Heuristic upper bound from random correspondences.
        #[arg(long)]
        upper: bool,
        /// Largest |X|*|Y| accepted by exact enumeration.
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        cap: usize,
        /// Random correspondences tried by the upper bound.
        #[arg(long, default_value_t = 1000)]
        tries: usize,
    },
    /// Convert a flow table to a dissimilarity matrix CSV.
    TransformFlow {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FLOW_FLOOR)]
        floor: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the randomized property suite.
    CheckAxioms {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        dn_cap: usize,
    },
    /// Export the quasi-dendrogram (JSON) or cuts (DOT or JSON).
    Export {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "json")]
        format: ExportFormat,
        #[arg(long)]
        reduced: bool,
        /// Cut resolutions; required for DOT. Without them JSON output is
        /// the whole quasi-dendrogram.
        #[arg(long = "delta", num_args = 1.., allow_negative_numbers = true)]
        deltas: Vec<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Full pipeline: DSL, quasi-dendrogram and cuts written to a directory.
    Run {
        #[command(flatten)]
        input: Input,
        /// Cut resolutions; default is zero and every critical resolution.
        #[arg(long = "delta", num_args = 1.., allow_negative_numbers = true)]
        deltas: Vec<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        #[arg(long)]
        reduced: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Also run the property suite with this seed.
        #[arg(long)]
        check_axioms: Option<u64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        dn_cap: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if let Some(d) = deltas.iter().find(|d| d.is_nan() || **d < 0.0) {
        bail!("resolution must be non-negative, got {d}");
    }
    Ok(())
}

fn write_cuts(
    net: &Network,
    deltas: &[f64],
    format: OutputFormat,
    reduced: bool,
    out_dir: Option<&Path>,
) -> Result<()> {
    check_deltas(deltas)?;
    let u = dsl(net);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for (i, &delta) in deltas.iter().enumerate() {
        let p = cut_at(&u, delta)?;
        let (text, ext) = match format {
            OutputFormat::Json => (cut_to_json(&p, u.labels(), delta), "json"),
            OutputFormat::Dot => (export_dot(&p, u.labels(), reduced), "dot"),
            OutputFormat::Csv => (cut_to_csv(&p, u.labels()), "csv"),
        };
        let path = out_dir.map(|d| d.join(format!("cut_{:02}.{ext}", i + 1)));
        emit(path.as_deref(), &text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let oracle_cap = oracle_cap_from_env()?;
    match cli.command {
        Command::Validate { input } => {
            let net = input.load()?;
            println!("valid network: {} nodes", net.len());
            println!("symmetric: {}", net.is_symmetric());
            println!("strongly connected: {}", net.strongly_connected());
            match check_quasi_ultrametric(net) {
                Ok(_) => println!("quasi-ultrametric: yes"),
                Err(e) => println!("quasi-ultrametric: no ({e})"),
            }
        }
        Command::Dsl { input, output } => {
            emit(output.as_deref(), &write_matrix_csv(dsl(&input.load()?).as_network()))?;
        }
        Command::Cut {
            input,
            deltas,
            format,
            reduced,
            out_dir,
        } => write_cuts(&input.load()?, &deltas, format.into(), reduced, out_dir.as_deref())?,
        Command::Dendrogram { input, output } => {
            emit(output.as_deref(), &dendrogram_to_json(&upsilon(&dsl(&input.load()?))))?;
        }
        Command::Distance {
            a,
            b,
            exact: _,
            upper,
            cap,
            tries,
        } => {
            let x = pipeline::load_network(&a, InputFormat::MatrixCsv, DEFAULT_FLOW_FLOOR)?.network;
            let y = pipeline::load_network(&b, InputFormat::MatrixCsv, DEFAULT_FLOW_FLOOR)?.network;
            if upper {
                let bound = network_distance_upper(&x, &y, tries);
                println!("upper bound: {}", format_number(bound));
            } else {
                let (d, r) = ExactDistance::new(cap).compute(&x, &y)?;
                println!("exact: {}", format_number(d));
                let pairs: Vec<String> = r
                    .pairs()
                    .iter()
                    .map(|&(i, j)| format!("({},{})", x.labels()[i], y.labels()[j]))
                    .collect();
                println!("correspondence: {}", pairs.join(" "));
            }
        }
        Command::TransformFlow {
            input,
            floor,
            output,
        } => {
            let loaded = pipeline::load_network(&input, InputFormat::FlowCsv, floor)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            emit(output.as_deref(), &write_matrix_csv(&loaded.network))?;
        }
        Command::CheckAxioms {
            seed,
            trials,
            dn_cap,
        } => {
            let report = run_suite(&SuiteConfig {
                seed,
                trials,
                oracle_cap,
                exact_cap: dn_cap,
            });
            print!("{report}");
            return Ok(report.all_passed());
        }
        Command::Export {
            input,
            format,
            reduced,
            deltas,
            out_dir,
        } => {
            let net = input.load()?;
            match format {
                ExportFormat::Json if deltas.is_empty() => {
                    let text = dendrogram_to_json(&upsilon(&dsl(&net)));
                    let path = out_dir.as_ref().map(|d| d.join("dendrogram.json"));
                    if let Some(dir) = &out_dir {
                        fs::create_dir_all(dir)?;
                    }
                    emit(path.as_deref(), &text)?;
                }
                ExportFormat::Dot if deltas.is_empty() => bail!("DOT export needs at least one --delta"),
                ExportFormat::Json => {
                    write_cuts(&net, &deltas, OutputFormat::Json, reduced, out_dir.as_deref())?
                }
                ExportFormat::Dot => {
                    write_cuts(&net, &deltas, OutputFormat::Dot, reduced, out_dir.as_deref())?
                }
            }
        }
        Command::Run {
            input,
            deltas,
            format,
            reduced,
            out_dir,
            check_axioms,
            trials,
            dn_cap,
        } => {
            let mut cfg = RunConfig::new(&input.input, out_dir);
            cfg.input_format = input.input_format();
            cfg.scale = input.scale()?;
            cfg.quantize = input.quantize;
            cfg.flow_floor = input.flow_floor;
            cfg.deltas = deltas;
            cfg.output_format = format.into();
            cfg.reduced = reduced;
            cfg.check_axioms = check_axioms.map(|seed| SuiteConfig {
                seed,
                trials,
                oracle_cap,
                exact_cap: dn_cap,
            });
            let summary = pipeline::run_pipeline(&cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            print!("{summary}");
            return Ok(summary.checks_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
