//! The eleven real networks, fetched from the Netzschleuder catalog's CSV
//! exports and cached locally as edge-list files.
//!
//! A cached file is named `<name>-<sha256 prefix>.tsv`; a cache hit is a file
//! whose content hash matches its name, and it is served without touching the
//! transport.

use std::fs;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use sha2::{Digest, Sha256};
use thiserror::Error;
use weightwalk_core::graph::WeightedGraph;

use crate::edgelist::{self, EdgeListError, ParseOptions, ParsedEdgeList};
use crate::fsutil;

pub const CATALOG_URL: &str = "https://networks.skewed.de/net";

/// Set to anything but `0` or empty to forbid network access.
pub const OFFLINE_ENV: &str = "WEIGHTWALK_OFFLINE";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dataset {
    pub name: &'static str,
    pub title: &'static str,
    /// Catalog network and sub-network.
    pub net: &'static str,
    pub sub: &'static str,
    /// Published node and edge counts.
    pub nodes: usize,
    pub edges: usize,
    /// The published counts refer to the largest connected component.
    pub largest_component: bool,
}

impl Dataset {
    pub fn url(&self) -> String {
        format!("{CATALOG_URL}/{}/files/{}.csv.zip", self.net, self.sub)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges as f64 / self.nodes as f64
    }
}

const fn ds(
    name: &'static str,
    title: &'static str,
    net: &'static str,
    sub: &'static str,
    nodes: usize,
    edges: usize,
) -> Dataset {
    Dataset {
        name,
        title,
        net,
        sub,
        nodes,
        edges,
        largest_component: false,
    }
}

pub const DATASETS: [Dataset; 11] = [
    ds("sp_high_school_diaries", "Sp High School Diaries", "sp_high_school", "diaries", 120, 348),
    ds("celegansneural", "Celegansneural", "celegansneural", "celegansneural", 297, 2148),
    ds("fao_trade", "Fao Trade", "fao_trade", "fao_trade", 214, 9441),
    ds(
        "celegans_2019_hermaphrodite",
        "Celegans 2019 Hermaphrodite",
        "celegans_2019",
        "hermaphrodite_chemical",
        446,
        4210,
    ),
    ds("celegans_2019_male", "Celegans 2019 Male", "celegans_2019", "male_chemical", 559, 4560),
    ds(
        "faculty_hiring_us_academia",
        "Faculty Hiring US Academia",
        "faculty_hiring_us",
        "academia",
        3284,
        52163,
    ),
    ds("cintestinalis", "Cintestinalis", "cintestinalis", "cintestinalis", 205, 2624),
    ds(
        "budapest_connectome_all_200k",
        "Budapest Connectome All 200k",
        "budapest_connectome",
        "all_200k",
        1015,
        105293,
    ),
    ds("new_zealand_collab", "New Zealand Collab", "new_zealand_collab", "new_zealand_collab", 1463, 4246),
    ds("bible_nouns", "Bible Nouns", "bible_nouns", "bible_nouns", 1707, 9059),
    Dataset {
        largest_component: true,
        ..ds("netscience", "Netscience", "netscience", "netscience", 379, 914)
    },
];

pub fn lookup(name: &str) -> Result<&'static Dataset, DatasetError> {
    let key = name.to_ascii_lowercase().replace(['-', ' '], "_");
    DATASETS
        .iter()
        .find(|d| d.name == key)
        .ok_or_else(|| DatasetError::UnknownDataset {
            name: name.to_string(),
            supported: DATASETS.iter().map(|d| d.name).collect::<Vec<_>>().join(", "),
        })
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown dataset {name:?}; supported: {supported}")]
    UnknownDataset { name: String, supported: String },
    #[error("{name} is not cached in {cache} and network access is disabled or failed: {reason}")]
    NetworkUnavailable {
        name: String,
        cache: PathBuf,
        reason: String,
    },
    #[error("{name}: upstream export changed: {reason}")]
    UpstreamFormatChanged { name: String, reason: String },
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// HTTP GET returning the response body.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Vec<u8>, TransportError>;
}

/// Blocking HTTPS client; proxies come from `HTTP_PROXY`/`HTTPS_PROXY`/`ALL_PROXY`.
pub struct HttpTransport {
    agent: ureq::Agent,
}

const MAX_DOWNLOAD: u64 = 512 << 20;

impl Default for HttpTransport {
    fn default() -> Self {
        let agent = ureq::Agent::config_builder()
            .proxy(ureq::Proxy::try_from_env())
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>, TransportError> {
        let mut resp = self.agent.get(url).call().map_err(|e| TransportError(e.to_string()))?;
        resp.body_mut()
            .with_config()
            .limit(MAX_DOWNLOAD)
            .read_to_vec()
            .map_err(|e| TransportError(e.to_string()))
    }
}

/// Whether the environment forbids network access.
pub fn offline_from_env() -> bool {
    std::env::var(OFFLINE_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

#[derive(Debug, Clone)]
pub struct Fetched {
    pub dataset: &'static Dataset,
    pub path: PathBuf,
    pub sha256: String,
    pub from_cache: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

const HASH_PREFIX: usize = 16;

fn cached(d: &Dataset, cache: &Path) -> Option<(PathBuf, String)> {
    let prefix = format!("{}-", d.name);
    let entries = fs::read_dir(cache).ok()?;
    for entry in entries.flatten() {
        let file = entry.file_name();
        let Some(stem) = file.to_str().and_then(|f| f.strip_suffix(".tsv")) else {
            continue;
        };
        let Some(tag) = stem.strip_prefix(&prefix) else {
            continue;
        };
        let path = entry.path();
        let Ok(bytes) = fs::read(&path) else { continue };
        let digest = sha256_hex(&bytes);
        if tag.len() == HASH_PREFIX && digest.starts_with(tag) {
            return Some((path, digest));
        }
        warn!("ignoring corrupt cache file {}", path.display());
    }
    None
}

/// Return the cached edge list for `name`, downloading it on a miss unless
/// `offline`.
pub fn fetch_dataset(
    name: &str,
    cache: &Path,
    transport: &dyn Transport,
    offline: bool,
) -> Result<Fetched, DatasetError> {
    let d = lookup(name)?;
    if let Some((path, sha256)) = cached(d, cache) {
        return Ok(Fetched {
            dataset: d,
            path,
            sha256,
            from_cache: true,
        });
    }
    let unavailable = |reason: String| DatasetError::NetworkUnavailable {
        name: d.name.to_string(),
        cache: cache.to_path_buf(),
        reason,
    };
    if offline {
        return Err(unavailable("offline mode".into()));
    }
    let url = d.url();
    info!("downloading {url}");
    let archive = transport.get(&url).map_err(|e| unavailable(e.0))?;
    let text = convert_export(d, &archive)?;
    let sha256 = sha256_hex(text.as_bytes());
    fs::create_dir_all(cache)?;
    let path = cache.join(format!("{}-{}.tsv", d.name, &sha256[..HASH_PREFIX]));
    fsutil::write_atomic(&path, |w| std::io::Write::write_all(w, text.as_bytes()))?;
    Ok(Fetched {
        dataset: d,
        path,
        sha256,
        from_cache: false,
    })
}

fn zip_member(archive: &mut zip::ZipArchive<Cursor<&[u8]>>, suffix: &str) -> Option<String> {
    let name = archive.file_names().find(|n| n.ends_with(suffix))?.to_string();
    let mut text = String::new();
    archive.by_name(&name).ok()?.read_to_string(&mut text).ok()?;
    Some(text)
}

/// Turn a catalog CSV export (`edges.csv` plus `nodes.csv`) into a
/// self-contained edge list: a node-count directive followed by the edge
/// table as published.
pub fn convert_export(d: &Dataset, archive: &[u8]) -> Result<String, DatasetError> {
    let changed = |reason: &str| DatasetError::UpstreamFormatChanged {
        name: d.name.to_string(),
        reason: reason.to_string(),
    };
    let mut zip = zip::ZipArchive::new(Cursor::new(archive)).map_err(|_| changed("not a zip archive"))?;
    let edges = zip_member(&mut zip, "edges.csv").ok_or_else(|| changed("no edges.csv"))?;
    let header = edges.lines().next().unwrap_or_default().to_ascii_lowercase();
    if !(header.starts_with('#') && header.contains("source") && header.contains("target")) {
        return Err(changed("edges.csv lacks a '# source,target,...' header"));
    }
    let nodes = zip_member(&mut zip, "nodes.csv")
        .map(|t| t.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count());
    let mut out = String::with_capacity(edges.len() + 32);
    if let Some(n) = nodes {
        out.push_str(&format!("# node_count: {n}\n"));
    }
    out.push_str(&edges);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub parse: ParseOptions,
    /// Restrict to the largest connected component; `None` follows the
    /// dataset's published counts.
    pub largest_component: Option<bool>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            parse: ParseOptions::default(),
            largest_component: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub fetched: Fetched,
    pub graph: WeightedGraph,
    pub parsed: ParsedEdgeList,
    pub largest_component: bool,
}

/// Parse a fetched dataset and warn when its size differs from the published
/// counts.
pub fn load_fetched(fetched: Fetched, opts: &LoadOptions) -> Result<LoadedDataset, DatasetError> {
    let d = fetched.dataset;
    let parsed = edgelist::parse_edge_list(&fetched.path, &opts.parse).map_err(|e| match e {
        EdgeListError::MissingWeightColumn(reason) => DatasetError::UpstreamFormatChanged {
            name: d.name.to_string(),
            reason,
        },
        other => other.into(),
    })?;
    let lcc = opts.largest_component.unwrap_or(d.largest_component);
    let graph = if lcc {
        parsed.graph.largest_component().0
    } else {
        parsed.graph.clone()
    };
    if graph.node_count() != d.nodes || graph.edge_count() != d.edges {
        warn!(
            "{}: parsed N={} E={}, published N={} E={}",
            d.name,
            graph.node_count(),
            graph.edge_count(),
            d.nodes,
            d.edges
        );
    }
    Ok(LoadedDataset {
        fetched,
        graph,
        parsed,
        largest_component: lcc,
    })
}

pub fn load_dataset(
    name: &str,
    cache: &Path,
    transport: &dyn Transport,
    offline: bool,
    opts: &LoadOptions,
) -> Result<LoadedDataset, DatasetError> {
    load_fetched(fetch_dataset(name, cache, transport, offline)?, opts)
}
