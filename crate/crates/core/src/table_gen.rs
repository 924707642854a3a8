//! Acyclicity tables: generation, lazy evaluation, storage and analysis.
//!
//! A table holds one bit per configuration of a model cell, addressed by the
//! canonical index. Only closed configurations can be set; every non-closed
//! entry is stored as zero.
//!
//! On-disk layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ACYC"
//!      4     2  format version (1)
//!      6     1  kind tag (1 tri, 2 tet, 3 simp4, 4 pixel, 5 voxel)
//!      7     1  n, number of boundary elements
//!      8     1  flags (bit 0: closed_only)
//!      9     7  reserved, zero
//!     16     8  generator fingerprint
//!     24  2^n/8 bits, least significant bit first
//!    end     8  checksum: first 8 bytes of SHA-256 over everything before it
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cell_models::{Configuration, ModelCell, ModelKind};
use crate::homology::{homology_summary, mask_complex, mask_is_acyclic, HomologyError};

pub const MAGIC: &[u8; 4] = b"ACYC";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("eager generation of the {0} table is refused; use the lazy oracle or pass --eager")]
    EagerRefused(ModelKind),
    #[error("corrupt table: bad {field} ({detail})")]
    Corrupt { field: &'static str, detail: String },
    #[error("table kind mismatch: table is {found}, complex needs {expected}")]
    KindMismatch {
        expected: ModelKind,
        found: ModelKind,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that answers acyclicity queries by canonical index.
pub trait AcyclicityLookup: Send + Sync {
    fn kind(&self) -> ModelKind;

    /// Verdict for the configuration with canonical index `index`.
    fn lookup(&self, index: u32) -> bool;

    fn query(&self, config: &Configuration) -> bool {
        debug_assert_eq!(config.kind(), self.kind());
        self.lookup(config.mask())
    }

    fn ensure_kind(&self, expected: ModelKind) -> Result<(), TableError> {
        if self.kind() == expected {
            Ok(())
        } else {
            Err(TableError::KindMismatch {
                expected,
                found: self.kind(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMeta {
    pub format_version: u16,
    pub generator_fingerprint: u64,
    pub closed_only: bool,
}

/// Bit-packed acyclicity table.
#[derive(Clone, PartialEq, Eq)]
pub struct AcyclicityTable {
    kind: ModelKind,
    bits: Vec<u64>,
    meta: TableMeta,
}

impl std::fmt::Debug for AcyclicityTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AcyclicityTable")
            .field("kind", &self.kind)
            .field("len", &self.len())
            .field("meta", &self.meta)
            .finish()
    }
}

impl AcyclicityTable {
    fn empty(kind: ModelKind) -> Self {
        let n = kind.boundary_element_count();
        AcyclicityTable {
            kind,
            bits: vec![0; (1usize << n) / 64],
            meta: TableMeta {
                format_version: FORMAT_VERSION,
                generator_fingerprint: generator_fingerprint(kind),
                closed_only: true,
            },
        }
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    /// Number of entries, `2^n`.
    pub fn len(&self) -> usize {
        self.bits.len() * 64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Size of the packed bit payload in bytes.
    pub fn byte_len(&self) -> usize {
        self.bits.len() * 8
    }

    #[inline]
    pub fn get(&self, index: u32) -> bool {
        let i = index as usize;
        self.bits[i >> 6] >> (i & 63) & 1 == 1
    }

    fn set(&mut self, index: u32) {
        let i = index as usize;
        self.bits[i >> 6] |= 1 << (i & 63);
    }

    pub fn count_acyclic(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of all set entries, ascending.
    pub fn acyclic_indices(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.count_acyclic());
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                out.push((w * 64 + rest.trailing_zeros() as usize) as u32);
                rest &= rest - 1;
            }
        }
        out
    }

    fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        for w in &self.bits {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    fn header_bytes(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(MAGIC);
        h[4..6].copy_from_slice(&self.meta.format_version.to_le_bytes());
        h[6] = self.kind.tag();
        h[7] = self.kind.boundary_element_count() as u8;
        h[8] = self.meta.closed_only as u8;
        h[16..24].copy_from_slice(&self.meta.generator_fingerprint.to_le_bytes());
        h
    }

    /// Whole-file checksum as stored in the trailer.
    pub fn checksum(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.header_bytes());
        for w in &self.bits {
            hasher.update(w.to_le_bytes());
        }
        checksum_from_digest(&hasher.finalize())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.byte_len() + 8);
        out.extend_from_slice(&self.header_bytes());
        out.extend_from_slice(&self.payload_bytes());
        let sum = checksum_from_digest(&Sha256::digest(&out));
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TableError> {
        let corrupt = |field: &'static str, detail: String| TableError::Corrupt { field, detail };
        if bytes.len() < HEADER_LEN {
            return Err(corrupt(
                "length",
                format!("{} bytes is shorter than the header", bytes.len()),
            ));
        }
        if &bytes[0..4] != MAGIC {
            return Err(corrupt("magic", format!("{:?}", &bytes[0..4])));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(corrupt("version", format!("{version}")));
        }
        let kind = ModelKind::from_tag(bytes[6])
            .ok_or_else(|| corrupt("kind", format!("unknown tag {}", bytes[6])))?;
        let n = bytes[7] as usize;
        if n != kind.boundary_element_count() {
            return Err(corrupt(
                "kind",
                format!(
                    "{kind} has {} elements, header says {n}",
                    kind.boundary_element_count()
                ),
            ));
        }
        let payload = (1usize << n) / 8;
        let expected = HEADER_LEN + payload + 8;
        if bytes.len() != expected {
            return Err(corrupt(
                "length",
                format!("expected {expected} bytes, found {}", bytes.len()),
            ));
        }
        let body_end = HEADER_LEN + payload;
        let stored = u64::from_le_bytes(bytes[body_end..].try_into().expect("8 bytes"));
        let actual = checksum_from_digest(&Sha256::digest(&bytes[..body_end]));
        if stored != actual {
            return Err(corrupt(
                "checksum",
                format!("stored {stored:016x}, computed {actual:016x}"),
            ));
        }
        let bits = bytes[HEADER_LEN..body_end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(AcyclicityTable {
            kind,
            bits,
            meta: TableMeta {
                format_version: version,
                generator_fingerprint: u64::from_le_bytes(
                    bytes[16..24].try_into().expect("8 bytes"),
                ),
                closed_only: bytes[8] & 1 == 1,
            },
        })
    }
}

impl AcyclicityLookup for AcyclicityTable {
    fn kind(&self) -> ModelKind {
        self.kind
    }

    #[inline]
    fn lookup(&self, index: u32) -> bool {
        self.get(index)
    }
}

fn checksum_from_digest(digest: &[u8]) -> u64 {
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Hash of the model definition (element order and signs) a table was
/// generated from.
pub fn generator_fingerprint(kind: ModelKind) -> u64 {
    let model = kind.model();
    let mut hasher = Sha256::new();
    hasher.update(b"cellthin/snf/v1");
    hasher.update([kind.tag()]);
    for (i, e) in model.elements().iter().enumerate() {
        hasher.update(e.name().as_bytes());
        hasher.update(b":");
        for &(f, c) in model.element_boundary(i) {
            hasher.update((f as u32).to_le_bytes());
            hasher.update(c.to_le_bytes());
        }
        hasher.update(b";");
    }
    checksum_from_digest(&hasher.finalize())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Permit the 2^30-entry 4-simplex table.
    pub eager: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// Fills the acyclicity table of `kind` with integer homology computations.
/// The result does not depend on the number of workers.
pub fn generate_table(
    kind: ModelKind,
    opts: GenerateOptions,
) -> Result<AcyclicityTable, TableError> {
    if kind == ModelKind::Simplex4 && !opts.eager {
        return Err(TableError::EagerRefused(kind));
    }
    let run = || -> Result<AcyclicityTable, TableError> {
        let model = kind.model();
        let closed = model.closed_configurations();
        let verdicts: Vec<bool> = closed
            .par_iter()
            .map(|&mask| mask_is_acyclic(model, mask))
            .collect::<Result<_, _>>()?;
        let mut table = AcyclicityTable::empty(kind);
        for (&mask, &acyclic) in closed.iter().zip(&verdicts) {
            if acyclic {
                table.set(mask);
            }
        }
        Ok(table)
    };
    match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| TableError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Memoizing acyclicity oracle. Safe to share between threads.
pub struct LazyOracle {
    kind: ModelKind,
    cache: DashMap<u32, bool>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl LazyOracle {
    pub fn new(kind: ModelKind) -> Self {
        LazyOracle {
            kind,
            cache: DashMap::new(),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn cache_misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.len()
    }
}

impl AcyclicityLookup for LazyOracle {
    fn kind(&self) -> ModelKind {
        self.kind
    }

    fn lookup(&self, index: u32) -> bool {
        if let Some(v) = self.cache.get(&index) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return *v;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let model = self.kind.model();
        let verdict = model.is_closed_mask(index)
            && mask_is_acyclic(model, index)
                .expect("homology of a model sub-complex cannot overflow");
        self.cache.insert(index, verdict);
        verdict
    }
}

/// Lazy oracle for `kind`.
pub fn lazy_oracle(kind: ModelKind) -> LazyOracle {
    LazyOracle::new(kind)
}

pub fn save_table(table: &AcyclicityTable, path: &Path) -> Result<(), TableError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&table.to_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<AcyclicityTable, TableError> {
    AcyclicityTable::from_bytes(&fs::read(path)?)
}

/// Number of connected components of a closed configuration, from its
/// vertices and edges.
pub fn component_count(model: &ModelCell, mask: u32) -> usize {
    let elements = model.elements();
    let mut parent: Vec<u8> = (0..model.kind().vertex_count() as u8).collect();
    fn find(p: &mut [u8], x: u8) -> u8 {
        let mut r = x;
        while p[r as usize] != r {
            r = p[r as usize];
        }
        let mut x = x;
        while p[x as usize] != r {
            let next = p[x as usize];
            p[x as usize] = r;
            x = next;
        }
        r
    }
    let mut components = 0usize;
    for (i, e) in elements.iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        match e.dim {
            0 => components += 1,
            1 => {
                let a = find(&mut parent, e.labels[0]);
                let b = find(&mut parent, e.labels[1]);
                if a != b {
                    parent[a as usize] = b;
                    components -= 1;
                }
            }
            _ => {}
        }
    }
    components
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerReport {
    pub kind: ModelKind,
    pub closed_count: usize,
    pub acyclic_count: usize,
    /// chi = 1 yet not acyclic.
    pub euler_only_false_positives: usize,
    /// chi = 1 with a component count other than one.
    pub euler_disconnected: usize,
    /// chi = 1 and connected, yet not acyclic.
    pub euler_plus_connected_false_positives: usize,
    /// Smallest canonical index of a connected chi = 1 non-acyclic configuration.
    pub connected_witness: Option<u32>,
    /// Smallest canonical index of a chi = 1 configuration that is not connected.
    pub disconnected_witness: Option<u32>,
}

/// Counts the closed configurations on which the Euler characteristic (alone
/// or together with connectivity) disagrees with acyclicity.
pub fn analyze_euler_claims(lookup: &dyn AcyclicityLookup) -> EulerReport {
    let kind = lookup.kind();
    let model = kind.model();
    let closed = model.closed_configurations();
    let mut report = EulerReport {
        kind,
        closed_count: closed.len(),
        acyclic_count: 0,
        euler_only_false_positives: 0,
        euler_disconnected: 0,
        euler_plus_connected_false_positives: 0,
        connected_witness: None,
        disconnected_witness: None,
    };
    for &mask in &closed {
        let acyclic = lookup.lookup(mask);
        if acyclic {
            report.acyclic_count += 1;
        }
        if model.euler_characteristic(mask) != 1 {
            continue;
        }
        let connected = component_count(model, mask) == 1;
        if !connected {
            report.euler_disconnected += 1;
            report.disconnected_witness.get_or_insert(mask);
        }
        if !acyclic {
            report.euler_only_false_positives += 1;
            if connected {
                report.euler_plus_connected_false_positives += 1;
                report.connected_witness.get_or_insert(mask);
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseReport {
    pub kind: ModelKind,
    pub audited: usize,
    pub collapsible: usize,
    /// Acyclic configurations for which no collapse sequence to a vertex was found.
    pub failures: Vec<u32>,
}

/// Searches for a sequence of elementary collapses taking a closed
/// configuration to a single vertex. Depth first, with backtracking over
/// the choice of free face.
pub fn collapses_to_point(model: &ModelCell, mask: u32) -> bool {
    fn search(model: &ModelCell, mask: u32, seen: &mut HashSet<u32>) -> bool {
        if mask.count_ones() == 1 {
            return true;
        }
        let mut rest = mask;
        while rest != 0 {
            let face = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let cofaces = model.coface_mask(face) & mask;
            if cofaces.count_ones() != 1 {
                continue;
            }
            let next = mask & !(1 << face) & !cofaces;
            if seen.insert(next) && search(model, next, seen) {
                return true;
            }
        }
        false
    }
    if mask == 0 {
        return false;
    }
    search(model, mask, &mut HashSet::new())
}

/// Checks that acyclic closed configurations collapse to a point. With
/// `sample = Some(k)` only `k` acyclic configurations, drawn with a fixed
/// seed, are audited.
pub fn audit_collapsibility(
    lookup: &dyn AcyclicityLookup,
    sample: Option<usize>,
) -> CollapseReport {
    let kind = lookup.kind();
    let model = kind.model();
    let mut acyclic: Vec<u32> = model
        .closed_configurations()
        .into_iter()
        .filter(|&m| lookup.lookup(m))
        .collect();
    if let Some(k) = sample {
        if k < acyclic.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c011);
            acyclic.shuffle(&mut rng);
            acyclic.truncate(k);
            acyclic.sort_unstable();
        }
    }
    let failures: Vec<u32> = acyclic
        .par_iter()
        .copied()
        .filter(|&m| !collapses_to_point(model, m))
        .collect();
    CollapseReport {
        kind,
        audited: acyclic.len(),
        collapsible: acyclic.len() - failures.len(),
        failures,
    }
}

/// Full Betti vector of a closed configuration, for reporting.
pub fn configuration_betti(model: &ModelCell, mask: u32) -> Result<Vec<usize>, HomologyError> {
    Ok(homology_summary(&mask_complex(model, mask)?)?.betti)
}
