//! Hierarchical quasi-clustering of asymmetric networks.
//!
//! A [`Network`] is a finite node set with a directed dissimilarity matrix.
//! Directed single linkage ([`dsl`]) maps it to a [`QuasiUltrametric`],
//! computed as a power of the matrix in the `(min, max)` dioid. The
//! quasi-ultrametric is equivalent to a [`QuasiDendrogram`]: a nested family
//! of [`QuasiPartition`]s whose blocks carry a directed influence relation.
//! [`upsilon`] and [`psi`] convert between the two.
//!
//! ```
//! use quasiclust::{dsl, upsilon, Network};
//!
//! let net = Network::from_rows(vec![
//!     vec![0.0, 1.0, 3.0],
//!     vec![2.0, 0.0, 3.0],
//!     vec![2.0, 1.0, 0.0],
//! ])
//! .unwrap();
//! let u = dsl(&net);
//! assert_eq!(u.get(0, 2), 3.0);
//! let d = upsilon(&u);
//! assert_eq!(d.at(2.0).unwrap().block_count(), 2);
//! ```

use std::path::PathBuf;

pub mod dendrogram;
pub mod dioid;
pub mod distance;
pub mod export;
pub mod io;
pub mod network;
pub mod partition;
pub mod pipeline;
pub mod random;
pub mod suite;

pub use dendrogram::{cut_at, psi, upsilon, DendrogramError, QuasiDendrogram};
pub use dioid::{dioid_power, dioid_product, dsl, ChainOracle, DioidError, DioidMatrix};
pub use distance::{network_distance_exact, network_distance_upper, Correspondence, DistanceError};
pub use export::ExportError;
pub use io::IngestError;
pub use network::{
    check_quasi_ultrametric, max_symmetrize, metric_closure, scale_transform, separation, Network,
    NetworkError, QuasiUltrametric, ScaleFn,
};
pub use partition::{PartitionError, QuasiEquivalence, QuasiPartition};

/// Any failure surfaced by the pipeline or the command line.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // The cause is part of the message rather than a source, so chained
    // reports do not print it twice.
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{}: {error}", path.display())]
    Ingest { path: PathBuf, error: IngestError },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Dioid(#[from] DioidError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Dendrogram(#[from] DendrogramError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("{0}")]
    Config(String),
}
