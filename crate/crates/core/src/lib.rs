//! Literature datasets by cascading citation expansion, document co-citation
//! networks, clustering, labeling and multi-dataset overlay comparison.

pub mod cluster;
pub mod cocitation;
pub mod dataset;
pub mod error;
pub mod expansion;
pub mod export;
pub mod graph;
pub mod overlay;
pub mod render;
pub mod session;
pub mod source;
pub mod store;
pub mod synthetic;
pub mod text;

pub use dataset::{dataset_union, year_distribution, Dataset, DatasetCatalog, Provenance, YearDistribution};
pub use error::{Error, Result};
pub use source::{CitationCount, CitationSnapshot, CitationSource, Links, QueryKind, SourceQuery};
pub use store::{ArticleRecord, InputFormat, LoadReport, RecordStore};
pub use cluster::{ClusterPartition, ConceptTree};
pub use cocitation::{CoCitationNetwork, NetworkConfig};
pub use expansion::{ExpansionSpec, ExpansionTrace};
pub use overlay::{OverlapMatrix, OverlayProjection};
pub use render::RenderSpec;
pub use session::{Session, SessionConfig};
