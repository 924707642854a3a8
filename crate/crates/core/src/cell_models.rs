//! Reference cells (triangle, tetrahedron, 4-simplex, pixel, voxel) with
//! their fixed boundary-element orderings, face lattices, signed boundary
//! operators and configuration encoding.
//!
//! A configuration is a subset of the boundary elements of a model cell. It
//! is stored as a bit mask where bit `l - 1` stands for the element with
//! 1-based ordinal `l`, so the mask itself is the table address.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed cell: {0}")]
    MalformedCell(String),
    #[error("element ordinal {ordinal} out of range 1..={count} for {kind}")]
    OrdinalOutOfRange {
        kind: ModelKind,
        ordinal: usize,
        count: usize,
    },
    #[error("configuration index {index} out of range for {kind} (2^{count} entries)")]
    IndexOutOfRange {
        kind: ModelKind,
        index: u64,
        count: usize,
    },
    #[error("unknown model name {0:?} (expected tri, tet, simp4, pixel or voxel)")]
    UnknownModel(String),
}

/// The five reference cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Simplex2,
    Simplex3,
    Simplex4,
    Cube2,
    Cube3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Simplex2,
        ModelKind::Simplex3,
        ModelKind::Simplex4,
        ModelKind::Cube2,
        ModelKind::Cube3,
    ];

    /// Number of boundary elements, i.e. the number of bits of a configuration.
    pub fn boundary_element_count(self) -> usize {
        match self {
            ModelKind::Simplex2 => 6,
            ModelKind::Simplex3 => 14,
            ModelKind::Simplex4 => 30,
            ModelKind::Cube2 => 8,
            ModelKind::Cube3 => 26,
        }
    }

    /// Dimension of the top cell.
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Simplex2 | ModelKind::Cube2 => 2,
            ModelKind::Simplex3 | ModelKind::Cube3 => 3,
            ModelKind::Simplex4 => 4,
        }
    }

    pub fn vertex_count(self) -> usize {
        match self {
            ModelKind::Simplex2 => 3,
            ModelKind::Simplex3 => 4,
            ModelKind::Simplex4 => 5,
            ModelKind::Cube2 => 4,
            ModelKind::Cube3 => 8,
        }
    }

    /// Number of (d-1)-dimensional faces of the top cell.
    pub fn facet_count(self) -> usize {
        match self {
            ModelKind::Simplex2 => 3,
            ModelKind::Simplex3 => 4,
            ModelKind::Simplex4 => 5,
            ModelKind::Cube2 => 4,
            ModelKind::Cube3 => 6,
        }
    }

    pub fn is_cubical(self) -> bool {
        matches!(self, ModelKind::Cube2 | ModelKind::Cube3)
    }

    /// Stable numeric tag used in the table file header.
    pub fn tag(self) -> u8 {
        match self {
            ModelKind::Simplex2 => 1,
            ModelKind::Simplex3 => 2,
            ModelKind::Simplex4 => 3,
            ModelKind::Cube2 => 4,
            ModelKind::Cube3 => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Short CLI name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Simplex2 => "tri",
            ModelKind::Simplex3 => "tet",
            ModelKind::Simplex4 => "simp4",
            ModelKind::Cube2 => "pixel",
            ModelKind::Cube3 => "voxel",
        }
    }

    /// The shared, immutable model cell of this kind.
    pub fn model(self) -> &'static ModelCell {
        static MODELS: [OnceLock<ModelCell>; 5] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        MODELS[self.tag() as usize - 1].get_or_init(|| ModelCell::build(self))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tri" | "triangle" | "simplex2" => Ok(ModelKind::Simplex2),
            "tet" | "tetrahedron" | "simplex3" => Ok(ModelKind::Simplex3),
            "simp4" | "simplex4" => Ok(ModelKind::Simplex4),
            "pixel" | "cube2" => Ok(ModelKind::Cube2),
            "voxel" | "cube3" => Ok(ModelKind::Cube3),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }
}

// Boundary element listings, in table order.
const SIMPLEX2_ELEMENTS: [&str; 6] = ["0", "1", "2", "01", "02", "12"];
const SIMPLEX3_ELEMENTS: [&str; 14] = [
    "0", "1", "2", "3", "01", "02", "03", "12", "13", "23", "012", "013", "023", "123",
];
const SIMPLEX4_ELEMENTS: [&str; 30] = [
    "0", "1", "2", "3", "4", "01", "02", "03", "04", "12", "13", "14", "23", "24", "34", "012",
    "013", "014", "023", "024", "034", "123", "124", "134", "234", "0123", "0124", "0134", "0234",
    "1234",
];
const CUBE2_ELEMENTS: [&str; 8] = ["0", "1", "2", "3", "01", "02", "13", "23"];
const CUBE3_ELEMENTS: [&str; 26] = [
    "0", "1", "2", "3", "4", "5", "6", "7", "01", "03", "04", "12", "15", "23", "26", "37", "45",
    "47", "56", "67", "0123", "0145", "0347", "1256", "2367", "4567",
];

/// Lattice embedding of the pixel model: edges 01, 02, 13, 23.
pub const CUBE2_EMBEDDING: [[i64; 3]; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]];

/// Lattice embedding of the voxel model.
pub const CUBE3_EMBEDDING: [[i64; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// One boundary element of a model cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// 1-based position in the ordering.
    pub ordinal: usize,
    pub dim: usize,
    /// Sorted model-vertex labels.
    pub labels: Vec<u8>,
}

impl Element {
    pub fn label_mask(&self) -> u32 {
        self.labels.iter().fold(0, |m, &l| m | 1 << l)
    }

    pub fn name(&self) -> String {
        self.labels.iter().map(|l| l.to_string()).collect()
    }
}

/// A reference cell. Immutable once built.
#[derive(Debug)]
pub struct ModelCell {
    kind: ModelKind,
    elements: Vec<Element>,
    /// Immediate faces of each element, as an element mask.
    faces: Vec<u32>,
    /// Immediate cofaces of each element inside the boundary, as an element mask.
    cofaces: Vec<u32>,
    /// Signed boundary of each element: (element index, coefficient).
    boundary: Vec<Vec<(usize, i64)>>,
    /// For each subset of model vertex labels, the elements spanned by it.
    subset_elements: Vec<u32>,
    even_dim_mask: u32,
    odd_dim_mask: u32,
}

impl ModelCell {
    fn build(kind: ModelKind) -> ModelCell {
        let names: &[&str] = match kind {
            ModelKind::Simplex2 => &SIMPLEX2_ELEMENTS,
            ModelKind::Simplex3 => &SIMPLEX3_ELEMENTS,
            ModelKind::Simplex4 => &SIMPLEX4_ELEMENTS,
            ModelKind::Cube2 => &CUBE2_ELEMENTS,
            ModelKind::Cube3 => &CUBE3_ELEMENTS,
        };
        assert_eq!(names.len(), kind.boundary_element_count());

        let elements: Vec<Element> = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let labels: Vec<u8> = name.bytes().map(|b| b - b'0').collect();
                let dim = if kind.is_cubical() {
                    labels.len().trailing_zeros() as usize
                } else {
                    labels.len() - 1
                };
                Element {
                    ordinal: i + 1,
                    dim,
                    labels,
                }
            })
            .collect();

        let n = elements.len();
        let mut faces = vec![0u32; n];
        let mut cofaces = vec![0u32; n];
        for (i, e) in elements.iter().enumerate() {
            for (j, f) in elements.iter().enumerate() {
                if f.dim + 1 == e.dim && f.label_mask() & !e.label_mask() == 0 {
                    faces[i] |= 1 << j;
                    cofaces[j] |= 1 << i;
                }
            }
        }

        let boundary: Vec<Vec<(usize, i64)>> = elements
            .iter()
            .map(|e| {
                if kind.is_cubical() {
                    cube_boundary(kind, e, &elements)
                } else {
                    simplex_boundary(e, &elements)
                }
            })
            .collect();

        let vertex_count = kind.vertex_count();
        let subset_elements = (0..1u32 << vertex_count)
            .map(|subset| {
                elements.iter().enumerate().fold(0u32, |m, (i, e)| {
                    if e.label_mask() & !subset == 0 {
                        m | 1 << i
                    } else {
                        m
                    }
                })
            })
            .collect();

        let mut even_dim_mask = 0;
        let mut odd_dim_mask = 0;
        for (i, e) in elements.iter().enumerate() {
            if e.dim % 2 == 0 {
                even_dim_mask |= 1 << i;
            } else {
                odd_dim_mask |= 1 << i;
            }
        }

        let model = ModelCell {
            kind,
            elements,
            faces,
            cofaces,
            boundary,
            subset_elements,
            even_dim_mask,
            odd_dim_mask,
        };
        model.assert_boundary_squares_to_zero();
        model
    }

    fn assert_boundary_squares_to_zero(&self) {
        for (i, bd) in self.boundary.iter().enumerate() {
            let mut acc = vec![0i64; self.elements.len()];
            for &(f, c) in bd {
                for &(g, c2) in &self.boundary[f] {
                    acc[g] += c * c2;
                }
            }
            assert!(
                acc.iter().all(|&x| x == 0),
                "boundary of boundary is not zero for element {} of {}",
                self.elements[i].name(),
                self.kind
            );
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Mask with every boundary element set.
    pub fn full_mask(&self) -> u32 {
        if self.elements.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.elements.len()) - 1
        }
    }

    /// Immediate faces of element `i` (0-based), as an element mask.
    pub fn face_mask(&self, i: usize) -> u32 {
        self.faces[i]
    }

    /// Immediate cofaces of element `i` within the boundary.
    pub fn coface_mask(&self, i: usize) -> u32 {
        self.cofaces[i]
    }

    /// Signed boundary of element `i` as (element index, coefficient) pairs.
    pub fn element_boundary(&self, i: usize) -> &[(usize, i64)] {
        &self.boundary[i]
    }

    /// Elements whose vertex labels all lie in `label_subset`.
    #[inline]
    pub fn elements_spanned_by(&self, label_subset: u32) -> u32 {
        self.subset_elements[label_subset as usize]
    }

    pub fn even_dim_mask(&self) -> u32 {
        self.even_dim_mask
    }

    pub fn odd_dim_mask(&self) -> u32 {
        self.odd_dim_mask
    }

    /// Element indices of dimension `d`, in table order.
    pub fn elements_of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&i| self.elements[i].dim == d)
            .collect()
    }

    /// Dense signed boundary matrix of dimension `d >= 1`: rows are the
    /// (d-1)-elements, columns the d-elements, both in table order.
    pub fn signed_boundary(&self, d: usize) -> Vec<Vec<i64>> {
        let rows = self.elements_of_dim(d - 1);
        let cols = self.elements_of_dim(d);
        let mut m = vec![vec![0i64; cols.len()]; rows.len()];
        for (c, &e) in cols.iter().enumerate() {
            for &(f, coef) in &self.boundary[e] {
                let r = rows
                    .iter()
                    .position(|&x| x == f)
                    .expect("face of lower dim");
                m[r][c] = coef;
            }
        }
        m
    }

    /// True iff every member's faces are members too.
    #[inline]
    pub fn is_closed_mask(&self, mask: u32) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.faces[i] & !mask != 0 {
                return false;
            }
        }
        true
    }

    /// Smallest closed configuration containing `mask`.
    pub fn closure_mask(&self, mask: u32) -> u32 {
        let mut out = mask;
        // Elements are listed by ascending dimension, so one descending sweep closes.
        for i in (0..self.elements.len()).rev() {
            if out & (1 << i) != 0 {
                out |= self.faces[i];
            }
        }
        out
    }

    /// Euler characteristic of a configuration.
    pub fn euler_characteristic(&self, mask: u32) -> i64 {
        (mask & self.even_dim_mask).count_ones() as i64
            - (mask & self.odd_dim_mask).count_ones() as i64
    }

    /// Every closed configuration, as ascending masks.
    pub fn closed_configurations(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_closed(0, 0, &mut out);
        out.sort_unstable();
        out
    }

    fn collect_closed(&self, i: usize, mask: u32, out: &mut Vec<u32>) {
        if i == self.elements.len() {
            out.push(mask);
            return;
        }
        self.collect_closed(i + 1, mask, out);
        if self.faces[i] & !mask == 0 {
            self.collect_closed(i + 1, mask | 1 << i, out);
        }
    }

    /// Maps a simplex given by distinct global vertex ids to model labels:
    /// the returned vector holds, at position `label`, the global id mapped
    /// to that label (ascending global id to ascending label).
    pub fn map_simplex_vertices(&self, global: &[u32]) -> Result<Vec<u32>, ModelError> {
        if self.kind.is_cubical() {
            return Err(ModelError::MalformedCell(format!(
                "{} is cubical; use lattice coordinates",
                self.kind
            )));
        }
        if global.len() != self.kind.vertex_count() {
            return Err(ModelError::MalformedCell(format!(
                "{} needs {} vertices, got {}",
                self.kind,
                self.kind.vertex_count(),
                global.len()
            )));
        }
        let mut sorted = global.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::MalformedCell(format!(
                "duplicate vertex id {} in {:?}",
                w[0], global
            )));
        }
        Ok(sorted)
    }

    /// Lattice corner of each model label for the cube whose lowest corner is
    /// `origin`.
    pub fn cube_corners(&self, origin: [i64; 3]) -> Result<Vec<[i64; 3]>, ModelError> {
        let embedding: &[[i64; 3]] = match self.kind {
            ModelKind::Cube2 => &CUBE2_EMBEDDING,
            ModelKind::Cube3 => &CUBE3_EMBEDDING,
            _ => {
                return Err(ModelError::MalformedCell(format!(
                    "{} is simplicial; use vertex ids",
                    self.kind
                )))
            }
        };
        if self.kind == ModelKind::Cube2 && origin[2] != 0 {
            return Err(ModelError::MalformedCell(format!(
                "pixel at {origin:?} must have z = 0"
            )));
        }
        Ok(embedding
            .iter()
            .map(|e| [origin[0] + e[0], origin[1] + e[1], origin[2] + e[2]])
            .collect())
    }

    /// Lattice embedding of a cubical model (None for simplices).
    pub fn embedding(&self) -> Option<&'static [[i64; 3]]> {
        match self.kind {
            ModelKind::Cube2 => Some(&CUBE2_EMBEDDING),
            ModelKind::Cube3 => Some(&CUBE3_EMBEDDING),
            _ => None,
        }
    }
}

fn simplex_boundary(e: &Element, elements: &[Element]) -> Vec<(usize, i64)> {
    if e.dim == 0 {
        return Vec::new();
    }
    (0..e.labels.len())
        .map(|skip| {
            let face: Vec<u8> = e
                .labels
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &l)| l)
                .collect();
            let idx = elements
                .iter()
                .position(|f| f.labels == face)
                .expect("simplex face present in model");
            (idx, if skip % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

/// Tensor-product sign rule: the k-th free axis contributes
/// `(-1)^k ([upper] - [lower])`.
fn cube_boundary(kind: ModelKind, e: &Element, elements: &[Element]) -> Vec<(usize, i64)> {
    if e.dim == 0 {
        return Vec::new();
    }
    let embedding: &[[i64; 3]] = if kind == ModelKind::Cube2 {
        &CUBE2_EMBEDDING
    } else {
        &CUBE3_EMBEDDING
    };
    let coords: Vec<[i64; 3]> = e.labels.iter().map(|&l| embedding[l as usize]).collect();
    let free_axes: Vec<usize> = (0..3)
        .filter(|&a| coords.iter().any(|c| c[a] != coords[0][a]))
        .collect();
    let mut out = Vec::with_capacity(2 * free_axes.len());
    for (k, &axis) in free_axes.iter().enumerate() {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        for (side, coef) in [(0, -sign), (1, sign)] {
            let face: Vec<u8> = e
                .labels
                .iter()
                .zip(&coords)
                .filter(|(_, c)| c[axis] == side)
                .map(|(&l, _)| l)
                .collect();
            let idx = elements
                .iter()
                .position(|f| f.labels == face)
                .expect("cube face present in model");
            out.push((idx, coef));
        }
    }
    out
}

/// A subset of the boundary elements of a model cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    kind: ModelKind,
    mask: u32,
}

impl Configuration {
    pub fn empty(kind: ModelKind) -> Self {
        Configuration { kind, mask: 0 }
    }

    pub fn full(kind: ModelKind) -> Self {
        Configuration {
            kind,
            mask: kind.model().full_mask(),
        }
    }

    /// Builds a configuration from 1-based element ordinals.
    pub fn from_ordinals(kind: ModelKind, ordinals: &[usize]) -> Result<Self, ModelError> {
        let count = kind.boundary_element_count();
        let mut mask = 0u32;
        for &ordinal in ordinals {
            if ordinal == 0 || ordinal > count {
                return Err(ModelError::OrdinalOutOfRange {
                    kind,
                    ordinal,
                    count,
                });
            }
            mask |= 1 << (ordinal - 1);
        }
        Ok(Configuration { kind, mask })
    }

    /// Builds a configuration from element names such as `"01"` or `"0123"`.
    pub fn from_names(kind: ModelKind, names: &[&str]) -> Result<Self, ModelError> {
        let model = kind.model();
        let mut mask = 0u32;
        for name in names {
            let i = model
                .elements()
                .iter()
                .position(|e| e.name() == *name)
                .ok_or_else(|| {
                    ModelError::MalformedCell(format!("{kind} has no boundary element {name}"))
                })?;
            mask |= 1 << i;
        }
        Ok(Configuration { kind, mask })
    }

    /// Decodes a canonical (0-based shift) index.
    pub fn from_index(kind: ModelKind, index: u64) -> Result<Self, ModelError> {
        let count = kind.boundary_element_count();
        if index >> count != 0 {
            return Err(ModelError::IndexOutOfRange { kind, index, count });
        }
        Ok(Configuration {
            kind,
            mask: index as u32,
        })
    }

    pub(crate) fn from_mask_unchecked(kind: ModelKind, mask: u32) -> Self {
        Configuration { kind, mask }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, ordinal: usize) -> bool {
        ordinal >= 1 && ordinal <= 32 && self.mask & (1 << (ordinal - 1)) != 0
    }

    /// Member ordinals, ascending.
    pub fn ordinals(&self) -> Vec<usize> {
        (0..32)
            .filter(|i| self.mask & (1 << i) != 0)
            .map(|i| i + 1)
            .collect()
    }

    /// Table address: sum of `2^(l-1)` over member ordinals `l`.
    pub fn canonical_index(&self) -> u64 {
        self.mask as u64
    }

    /// Sum of `2^l` over member ordinals `l`, the 1-based addressing of the
    /// published tables. Always twice the canonical index.
    pub fn paper_index(&self) -> u64 {
        (self.mask as u64) << 1
    }

    pub fn is_closed(&self) -> bool {
        self.kind.model().is_closed_mask(self.mask)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.kind.model().euler_characteristic(self.mask)
    }
}
