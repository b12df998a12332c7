//! End-to-end run: ingest, optional change of scale, DSL, quasi-dendrogram,
//! cuts, exports and an optional property suite.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dendrogram::{cut_at, upsilon};
use crate::dioid::{dsl, DEFAULT_ORACLE_CAP};
use crate::export::{cut_to_csv, cut_to_json, dendrogram_to_json, export_dot};
use crate::io::{
    format_number, read_edge_tsv, read_flow_csv, read_matrix_csv, transform_flow_with_floor,
    write_matrix_csv, FlowWarning, DEFAULT_FLOW_FLOOR,
};
use crate::network::{scale_transform, Network, ScaleFn};
use crate::suite::{run_suite, SuiteConfig, SuiteReport};
use crate::Error;

/// Environment variable overriding the chain-oracle size cap.
pub const ORACLE_CAP_ENV: &str = "QUASICLUST_ORACLE_CAP";

/// Reads the oracle cap from [`ORACLE_CAP_ENV`], falling back to the default.
pub fn oracle_cap_from_env() -> Result<usize, Error> {
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(cap) if cap >= 1 => Ok(cap),
            _ => Err(Error::Config(format!("{ORACLE_CAP_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(DEFAULT_ORACLE_CAP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    MatrixCsv,
    EdgeTsv,
    FlowCsv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "matrix-csv" | "matrix" | "csv" => Ok(InputFormat::MatrixCsv),
            "edge-tsv" | "edges" | "tsv" => Ok(InputFormat::EdgeTsv),
            "flow-csv" | "flow" => Ok(InputFormat::FlowCsv),
            _ => Err(Error::Config(format!("unknown input format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Dot,
    Csv,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Dot => "dot",
            OutputFormat::Csv => "csv",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "dot" => Ok(OutputFormat::Dot),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

/// Result of loading a network file, with any flow-transform warnings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub network: Network,
    pub warnings: Vec<FlowWarning>,
}

pub fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        error: source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        error: source,
    })
}

/// Loads a network in the given format. Flow tables are converted with the
/// given floor.
pub fn load_network(path: &Path, format: InputFormat, flow_floor: f64) -> Result<Loaded, Error> {
    let text = read_text(path)?;
    let ingest = |source| Error::Ingest {
        path: path.to_path_buf(),
        error: source,
    };
    match format {
        InputFormat::MatrixCsv => Ok(Loaded {
            network: read_matrix_csv(&text).map_err(ingest)?,
            warnings: Vec::new(),
        }),
        InputFormat::EdgeTsv => Ok(Loaded {
            network: read_edge_tsv(&text).map_err(ingest)?,
            warnings: Vec::new(),
        }),
        InputFormat::FlowCsv => {
            let table = read_flow_csv(&text).map_err(ingest)?;
            let t = transform_flow_with_floor(&table, flow_floor).map_err(ingest)?;
            Ok(Loaded {
                network: t.network,
                warnings: t.warnings,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub input_format: InputFormat,
    pub scale: Option<ScaleFn>,
    /// Resolutions to cut at; empty means zero and every critical resolution.
    pub deltas: Vec<f64>,
    pub output_format: OutputFormat,
    /// Draw only the transitive reduction of each cut's edges.
    pub reduced: bool,
    /// Round input entries to this many decimal digits first.
    pub quantize: Option<u32>,
    pub flow_floor: f64,
    pub out_dir: PathBuf,
    pub check_axioms: Option<SuiteConfig>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            input_format: InputFormat::MatrixCsv,
            scale: None,
            deltas: Vec::new(),
            output_format: OutputFormat::Json,
            reduced: false,
            quantize: None,
            flow_floor: DEFAULT_FLOW_FLOOR,
            out_dir: out_dir.into(),
            check_axioms: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some(d) = self.deltas.iter().find(|d| d.is_nan() || **d < 0.0) {
            return Err(Error::Config(format!("resolution must be non-negative, got {d}")));
        }
        if let Some(scale) = &self.scale {
            scale.validate()?;
        }
        if let Some(s) = &self.check_axioms {
            if s.oracle_cap == 0 || s.exact_cap == 0 {
                return Err(Error::Config("caps must be positive".to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutSummary {
    pub delta: f64,
    pub blocks: usize,
    pub edges: usize,
    pub file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub nodes: usize,
    pub strongly_connected: bool,
    pub max_resolution: f64,
    pub merge_resolutions: Vec<f64>,
    pub cuts: Vec<CutSummary>,
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<FlowWarning>,
    pub suite: Option<SuiteReport>,
}

impl RunSummary {
    /// False only when the property suite ran and something failed.
    pub fn checks_passed(&self) -> bool {
        self.suite.as_ref().is_none_or(SuiteReport::all_passed)
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "strongly connected: {}", self.strongly_connected)?;
        writeln!(f, "max resolution: {}", format_number(self.max_resolution))?;
        let merges: Vec<String> = self.merge_resolutions.iter().map(|&d| format_number(d)).collect();
        writeln!(f, "merge resolutions: [{}]", merges.join(", "))?;
        for c in &self.cuts {
            writeln!(
                f,
                "delta {}: {} blocks, {} edges -> {}",
                format_number(c.delta),
                c.blocks,
                c.edges,
                c.file.display()
            )?;
        }
        if let Some(report) = &self.suite {
            write!(f, "{report}")?;
        }
        Ok(())
    }
}

/// Writes `ultrametric.csv`, `dendrogram.json` and one `cut_<i>.<ext>` per
/// resolution into `out_dir`. Identical inputs give byte-identical files.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary, Error> {
    cfg.validate()?;
    let loaded = load_network(&cfg.input, cfg.input_format, cfg.flow_floor)?;
    let mut net = loaded.network;
    if let Some(digits) = cfg.quantize {
        net = net.quantize(digits)?;
    }
    if let Some(scale) = &cfg.scale {
        net = scale_transform(&net, scale)?;
    }
    let u = dsl(&net);
    let d = upsilon(&u);

    fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io {
        path: cfg.out_dir.clone(),
        error: source,
    })?;
    let mut artifacts = Vec::new();
    let u_path = cfg.out_dir.join("ultrametric.csv");
    write_text(&u_path, &write_matrix_csv(u.as_network()))?;
    artifacts.push(u_path);
    let d_path = cfg.out_dir.join("dendrogram.json");
    write_text(&d_path, &dendrogram_to_json(&d))?;
    artifacts.push(d_path);

    let deltas = if cfg.deltas.is_empty() {
        let mut all = vec![0.0];
        all.extend(d.critical_resolutions().into_iter().filter(|&r| r > 0.0));
        all
    } else {
        cfg.deltas.clone()
    };
    let mut cuts = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        let p = cut_at(&u, delta)?;
        let text = match cfg.output_format {
            OutputFormat::Json => cut_to_json(&p, u.labels(), delta),
            OutputFormat::Dot => export_dot(&p, u.labels(), cfg.reduced),
            OutputFormat::Csv => cut_to_csv(&p, u.labels()),
        };
        let path = cfg
            .out_dir
            .join(format!("cut_{:02}.{}", i + 1, cfg.output_format.extension()));
        write_text(&path, &text)?;
        cuts.push(CutSummary {
            delta,
            blocks: p.block_count(),
            edges: if cfg.reduced { p.transitive_reduction().len() } else { p.edges().len() },
            file: path.clone(),
        });
        artifacts.push(path);
    }

    let suite = cfg.check_axioms.map(|s| run_suite(&s));
    Ok(RunSummary {
        nodes: net.len(),
        strongly_connected: d.strongly_connected(),
        max_resolution: d.max_resolution(),
        merge_resolutions: d.merges().iter().map(|m| m.delta).collect(),
        cuts,
        artifacts,
        warnings: loaded.warnings,
        suite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "x1,x2,x3\nx1,0,1,3\nx2,2,0,3\nx3,2,1,0\n";

    fn run_in(dir: &Path, format: OutputFormat) -> RunSummary {
        let input = dir.join("net.csv");
        fs::write(&input, FIG2).unwrap();
        let mut cfg = RunConfig::new(&input, dir.join("out"));
        cfg.output_format = format;
        run_pipeline(&cfg).unwrap()
    }

    #[test]
    fn writes_cuts_at_every_critical_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_in(dir.path(), OutputFormat::Dot);
        assert!(s.strongly_connected);
        assert_eq!(s.merge_resolutions, vec![2.0, 3.0]);
        let blocks: Vec<usize> = s.cuts.iter().map(|c| c.blocks).collect();
        assert_eq!(blocks, vec![3, 3, 2, 1]);
        for path in &s.artifacts {
            assert!(path.exists());
        }
        assert_eq!(
            fs::read_to_string(dir.path().join("out/ultrametric.csv")).unwrap(),
            FIG2
        );
    }

    #[test]
    fn negative_resolution_is_rejected() {
        let mut cfg = RunConfig::new("unused.csv", "out");
        cfg.deltas = vec![-1.0];
        assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn missing_input_names_the_path() {
        let cfg = RunConfig::new("/nonexistent/net.csv", "out");
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/net.csv"));
    }
}
