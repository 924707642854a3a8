//! The thinnable object: top-dimensional cells only, with face hashing,
//! vertex adjacency and per-cell configuration extraction.
//!
//! Lower-dimensional cells are never materialized. Each cell keeps two
//! element masks in the coordinates of its model cell:
//!
//! * `exterior`: elements lying in the closure of the original external
//!   boundary faces that are not anchored, fixed at build time;
//! * `removed`: elements shared with some removed cell, grown on removal.
//!
//! Their union is the cell's intersection with the closure of the
//! complement, which is always a closed configuration.

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use thiserror::Error;

use crate::cell_models::{Configuration, ModelCell, ModelError, ModelKind};
use crate::table_gen::{AcyclicityLookup, TableError};

pub type CellId = usize;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("cell {index}: {source}")]
    MalformedCell {
        index: usize,
        #[source]
        source: ModelError,
    },
    #[error("cell {index} duplicates cell {first}: {cell}")]
    DuplicateCell {
        index: usize,
        first: usize,
        cell: String,
    },
    #[error("anchor {0} is not a face of any cell")]
    AnchorNotAFace(String),
    #[error("anchor {0} is not on the external boundary")]
    AnchorNotOnBoundary(String),
    #[error("anchor {0} has the wrong shape for this complex")]
    AnchorShape(String),
    #[error("cell {0} does not exist")]
    UnknownCell(CellId),
    #[error("cell {0} was already removed")]
    DeadCell(CellId),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Top cells as given by the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cells {
    /// Global vertex ids per simplex, in any order.
    Simplicial(Vec<Vec<u32>>),
    /// Lowest lattice corner per pixel or voxel (z = 0 for pixels).
    Cubical(Vec<[i64; 3]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Simplicial(c) => c.len(),
            Cells::Cubical(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The cells at the given positions, in the given order.
    pub fn subset(&self, ids: &[CellId]) -> Cells {
        match self {
            Cells::Simplicial(c) => Cells::Simplicial(ids.iter().map(|&i| c[i].clone()).collect()),
            Cells::Cubical(c) => Cells::Cubical(ids.iter().map(|&i| c[i]).collect()),
        }
    }

    pub fn describe(&self, i: CellId) -> String {
        match self {
            Cells::Simplicial(c) => format!("{:?}", c[i]),
            Cells::Cubical(c) => format!("{:?}", c[i]),
        }
    }
}

/// A (d-1)-face used to pin the skeleton to the boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Anchor {
    /// Global vertex ids of a boundary facet of a simplicial complex.
    Simplex(Vec<u32>),
    /// Lattice facet normal to `axis` (0 = x, 1 = y, 2 = z) whose lowest
    /// corner is `origin`.
    CubeFace { axis: usize, origin: [i64; 3] },
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Simplex(v) => write!(f, "{v:?}"),
            Anchor::CubeFace { axis, origin } => {
                write!(
                    f,
                    "{} {} {} {}",
                    ["x", "y", "z"][*axis],
                    origin[0],
                    origin[1],
                    origin[2]
                )
            }
        }
    }
}

/// Sorted internal vertex indices, padded with `u32::MAX`.
type FaceKey = [u32; 4];

fn face_key(verts: impl IntoIterator<Item = u32>) -> FaceKey {
    let mut key = [u32::MAX; 4];
    let mut n = 0;
    for v in verts {
        key[n] = v;
        n += 1;
    }
    key[..n].sort_unstable();
    key
}

pub struct TopCellComplex {
    kind: ModelKind,
    model: &'static ModelCell,
    cells: Cells,
    /// Internal vertex indices per cell, in model-label order.
    cell_verts: Vec<u32>,
    /// Face id of each (d-1)-face per cell, in model facet order.
    cell_facets: Vec<u32>,
    face_keys: Vec<FaceKey>,
    face_coface_start: Vec<u32>,
    face_cofaces: Vec<u32>,
    vertex_cell_start: Vec<u32>,
    vertex_cells: Vec<u32>,
    /// Global id (simplicial) of each internal vertex.
    vertex_ids: Vec<u32>,
    /// Lattice coordinate (cubical) of each internal vertex.
    vertex_coords: Vec<[i64; 3]>,
    facet_elements: Vec<usize>,
    original_boundary: Vec<bool>,
    anchored: Vec<bool>,
    alive: Vec<bool>,
    alive_count: usize,
    alive_cofaces: Vec<u32>,
    exterior: Vec<u32>,
    removed: Vec<u32>,
    check_closed: bool,
}

impl fmt::Debug for TopCellComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TopCellComplex")
            .field("kind", &self.kind)
            .field("cells", &self.len())
            .field("alive", &self.alive_count)
            .field("faces", &self.face_keys.len())
            .finish()
    }
}

impl TopCellComplex {
    /// Indexes `cells`. All cells start alive. Anchors must be (d-1)-faces
    /// on the original external boundary.
    pub fn build(kind: ModelKind, cells: Cells, anchors: &[Anchor]) -> Result<Self, ComplexError> {
        let model = kind.model();
        let vc = kind.vertex_count();
        let n = cells.len();
        let lattice = match &cells {
            Cells::Cubical(list) if kind.is_cubical() => Lattice::fit(list, kind.dim()),
            _ => None,
        };
        let mut cell_verts: Vec<u32> = Vec::with_capacity(n * vc);
        let mut vertex_ids = Vec::new();
        let mut vertex_coords = Vec::new();

        match (&cells, kind.is_cubical()) {
            (Cells::Simplicial(list), false) => {
                let mut intern: HashMap<u32, u32> =
                    HashMap::with_capacity_and_hasher(n, Default::default());
                let mut seen: HashMap<Vec<u32>, usize> =
                    HashMap::with_capacity_and_hasher(n, Default::default());
                for (index, cell) in list.iter().enumerate() {
                    let sorted = model
                        .map_simplex_vertices(cell)
                        .map_err(|source| ComplexError::MalformedCell { index, source })?;
                    if let Some(&first) = seen.get(&sorted) {
                        return Err(ComplexError::DuplicateCell {
                            index,
                            first,
                            cell: format!("{cell:?}"),
                        });
                    }
                    for &g in &sorted {
                        let next = intern.len() as u32;
                        let id = *intern.entry(g).or_insert_with(|| {
                            vertex_ids.push(g);
                            next
                        });
                        cell_verts.push(id);
                    }
                    seen.insert(sorted, index);
                }
            }
            (Cells::Cubical(list), true) => {
                if let Some(grid) = &lattice {
                    let embedding = model.embedding().expect("cubical model");
                    let mut seen = vec![u32::MAX; grid.len()];
                    let mut intern = vec![u32::MAX; grid.len()];
                    for (index, &origin) in list.iter().enumerate() {
                        model
                            .cube_corners(origin)
                            .map_err(|source| ComplexError::MalformedCell { index, source })?;
                        let slot = grid.slot(origin);
                        if seen[slot] != u32::MAX {
                            return Err(ComplexError::DuplicateCell {
                                index,
                                first: seen[slot] as usize,
                                cell: format!("{origin:?}"),
                            });
                        }
                        seen[slot] = index as u32;
                        for e in embedding {
                            let c = [origin[0] + e[0], origin[1] + e[1], origin[2] + e[2]];
                            let id = &mut intern[grid.slot(c)];
                            if *id == u32::MAX {
                                *id = vertex_coords.len() as u32;
                                vertex_coords.push(c);
                            }
                            cell_verts.push(*id);
                        }
                    }
                } else {
                    // Roughly one new vertex per cell in a solid block.
                    let mut intern: HashMap<[i64; 3], u32> =
                        HashMap::with_capacity_and_hasher(n + n / 4, Default::default());
                    let mut seen: HashMap<[i64; 3], usize> =
                        HashMap::with_capacity_and_hasher(n, Default::default());
                    for (index, &origin) in list.iter().enumerate() {
                        let corners = model
                            .cube_corners(origin)
                            .map_err(|source| ComplexError::MalformedCell { index, source })?;
                        if let Some(&first) = seen.get(&origin) {
                            return Err(ComplexError::DuplicateCell {
                                index,
                                first,
                                cell: format!("{origin:?}"),
                            });
                        }
                        seen.insert(origin, index);
                        for c in corners {
                            let next = intern.len() as u32;
                            let id = *intern.entry(c).or_insert_with(|| {
                                vertex_coords.push(c);
                                next
                            });
                            cell_verts.push(id);
                        }
                    }
                }
            }
            _ => {
                return Err(ComplexError::MalformedCell {
                    index: 0,
                    source: ModelError::MalformedCell(format!(
                        "cell representation does not match {kind}"
                    )),
                })
            }
        }
        let vertex_total = vertex_ids.len().max(vertex_coords.len());

        // (d-1)-faces.
        let facet_elements = model.elements_of_dim(kind.dim() - 1);
        let fc = facet_elements.len();
        let mut face_keys: Vec<FaceKey> = Vec::new();
        let mut cell_facets: Vec<u32> = Vec::with_capacity(n * fc);
        let mut intern_face = |key: FaceKey, id: &mut u32| {
            if *id == u32::MAX {
                *id = face_keys.len() as u32;
                face_keys.push(key);
            }
            *id
        };
        let key_of = |t: usize, e: usize| {
            let verts = &cell_verts[t * vc..(t + 1) * vc];
            face_key(
                model.elements()[e]
                    .labels
                    .iter()
                    .map(|&l| verts[l as usize]),
            )
        };
        match (&cells, &lattice) {
            (Cells::Cubical(list), Some(grid)) => {
                // A lattice facet is its lowest corner plus its normal axis.
                let placement = facet_placement(model, &facet_elements);
                let mut slots = vec![u32::MAX; grid.len() * 3];
                for (t, origin) in list.iter().enumerate() {
                    for (&e, &(offset, axis)) in facet_elements.iter().zip(&placement) {
                        let low = [
                            origin[0] + offset[0],
                            origin[1] + offset[1],
                            origin[2] + offset[2],
                        ];
                        let id = intern_face(key_of(t, e), &mut slots[grid.slot(low) * 3 + axis]);
                        cell_facets.push(id);
                    }
                }
            }
            _ => {
                let mut face_index: HashMap<FaceKey, u32> =
                    HashMap::with_capacity_and_hasher(n * fc / 2 + 1, Default::default());
                for t in 0..n {
                    for &e in &facet_elements {
                        let key = key_of(t, e);
                        let id = intern_face(key, face_index.entry(key).or_insert(u32::MAX));
                        cell_facets.push(id);
                    }
                }
            }
        }
        let (face_coface_start, face_cofaces) = csr(
            face_keys.len(),
            cell_facets
                .iter()
                .enumerate()
                .map(|(i, &f)| (f, (i / fc) as u32)),
        );
        let (vertex_cell_start, vertex_cells) = csr(
            vertex_total,
            cell_verts
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, (i / vc) as u32)),
        );

        let alive_cofaces: Vec<u32> = face_coface_start.windows(2).map(|w| w[1] - w[0]).collect();
        let original_boundary: Vec<bool> = alive_cofaces.iter().map(|&c| c == 1).collect();

        let mut complex = TopCellComplex {
            kind,
            model,
            cells,
            cell_verts,
            cell_facets,
            face_keys,
            face_coface_start,
            face_cofaces,
            vertex_cell_start,
            vertex_cells,
            vertex_ids,
            vertex_coords,
            facet_elements,
            anchored: vec![false; original_boundary.len()],
            original_boundary,
            alive: vec![true; n],
            alive_count: n,
            alive_cofaces,
            exterior: vec![0; n],
            removed: vec![0; n],
            check_closed: cfg!(debug_assertions),
        };
        let face_index: HashMap<FaceKey, u32> = if anchors.is_empty() {
            HashMap::default()
        } else {
            complex
                .face_keys
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, i as u32))
                .collect()
        };
        for anchor in anchors {
            let f = complex.anchor_face(anchor, &face_index)?;
            if !complex.original_boundary[f as usize] {
                return Err(ComplexError::AnchorNotOnBoundary(anchor.to_string()));
            }
            complex.anchored[f as usize] = true;
        }
        complex.compute_exterior();
        Ok(complex)
    }

    fn anchor_face(
        &self,
        anchor: &Anchor,
        face_index: &HashMap<FaceKey, u32>,
    ) -> Result<u32, ComplexError> {
        let key = match (anchor, self.kind.is_cubical()) {
            (Anchor::Simplex(ids), false) => {
                if ids.len() != self.kind.dim() {
                    return Err(ComplexError::AnchorShape(anchor.to_string()));
                }
                let pos: HashMap<u32, u32> = self
                    .vertex_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| (g, i as u32))
                    .collect();
                let mut verts = Vec::with_capacity(ids.len());
                for g in ids {
                    match pos.get(g) {
                        Some(&v) => verts.push(v),
                        None => return Err(ComplexError::AnchorNotAFace(anchor.to_string())),
                    }
                }
                face_key(verts)
            }
            (Anchor::CubeFace { axis, origin }, true) => {
                let d = self.kind.dim();
                if *axis >= d || (d == 2 && origin[2] != 0) {
                    return Err(ComplexError::AnchorShape(anchor.to_string()));
                }
                let pos: HashMap<[i64; 3], u32> = self
                    .vertex_coords
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (c, i as u32))
                    .collect();
                let free: Vec<usize> = (0..d).filter(|a| a != axis).collect();
                let mut verts = Vec::new();
                for bits in 0..1usize << free.len() {
                    let mut c = *origin;
                    for (k, &a) in free.iter().enumerate() {
                        c[a] += ((bits >> k) & 1) as i64;
                    }
                    match pos.get(&c) {
                        Some(&v) => verts.push(v),
                        None => return Err(ComplexError::AnchorNotAFace(anchor.to_string())),
                    }
                }
                face_key(verts)
            }
            _ => return Err(ComplexError::AnchorShape(anchor.to_string())),
        };
        face_index
            .get(&key)
            .copied()
            .ok_or_else(|| ComplexError::AnchorNotAFace(anchor.to_string()))
    }

    fn compute_exterior(&mut self) {
        let vc = self.kind.vertex_count();
        for f in 0..self.face_keys.len() {
            if !self.original_boundary[f] || self.anchored[f] {
                continue;
            }
            let key = self.face_keys[f];
            let face_verts: Vec<u32> = key.iter().copied().take_while(|&v| v != u32::MAX).collect();
            for &v in &face_verts {
                let incident: Vec<u32> = self.cells_at_vertex(v).to_vec();
                for t in incident {
                    let t = t as usize;
                    let verts = &self.cell_verts[t * vc..(t + 1) * vc];
                    let labels = verts
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| face_verts.contains(g))
                        .fold(0u32, |m, (l, _)| m | 1 << l);
                    self.exterior[t] |= self.model.elements_spanned_by(labels);
                }
            }
        }
    }

    fn cells_at_vertex(&self, v: u32) -> &[u32] {
        let s = self.vertex_cell_start[v as usize] as usize;
        let e = self.vertex_cell_start[v as usize + 1] as usize;
        &self.vertex_cells[s..e]
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    /// Number of cells, dead or alive.
    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn is_alive(&self, t: CellId) -> bool {
        self.alive.get(t).copied().unwrap_or(false)
    }

    pub fn alive_cells(&self) -> Vec<CellId> {
        (0..self.len()).filter(|&t| self.alive[t]).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_cell_start.len() - 1
    }

    /// Number of distinct (d-1)-faces.
    pub fn face_count(&self) -> usize {
        self.face_keys.len()
    }

    /// Number of (d-1)-faces on the external boundary of the original complex.
    pub fn boundary_face_count(&self) -> usize {
        self.original_boundary.iter().filter(|&&b| b).count()
    }

    pub fn anchored_face_count(&self) -> usize {
        self.anchored.iter().filter(|&&b| b).count()
    }

    /// Number of top cells incident to each (d-1)-face of `t`, in model facet order.
    pub fn facet_coface_counts(&self, t: CellId) -> Vec<usize> {
        let fc = self.facet_elements.len();
        self.cell_facets[t * fc..(t + 1) * fc]
            .iter()
            .map(|&f| {
                (self.face_coface_start[f as usize + 1] - self.face_coface_start[f as usize])
                    as usize
            })
            .collect()
    }

    /// Turns the closedness assertion on configuration extraction on or off.
    pub fn set_check_closed(&mut self, on: bool) {
        self.check_closed = on;
    }

    fn check_cell(&self, t: CellId) -> Result<(), ComplexError> {
        match self.alive.get(t) {
            None => Err(ComplexError::UnknownCell(t)),
            Some(false) => Err(ComplexError::DeadCell(t)),
            Some(true) => Ok(()),
        }
    }

    fn cell_vertices(&self, t: CellId) -> &[u32] {
        let vc = self.kind.vertex_count();
        &self.cell_verts[t * vc..(t + 1) * vc]
    }

    /// Model labels of `t` whose vertices also belong to `other`.
    fn shared_labels(&self, t: CellId, other: CellId) -> u32 {
        let mine = self.cell_vertices(t);
        let theirs = self.cell_vertices(other);
        mine.iter()
            .enumerate()
            .filter(|(_, v)| theirs.contains(v))
            .fold(0, |m, (l, _)| m | 1 << l)
    }

    #[inline]
    fn configuration_mask(&self, t: CellId) -> u32 {
        self.removed[t] | self.exterior[t]
    }

    /// Intersection of `t` with the closure of the complement, in the
    /// coordinates of the model cell.
    pub fn extract_configuration(&self, t: CellId) -> Result<Configuration, ComplexError> {
        self.check_cell(t)?;
        let mask = self.configuration_mask(t);
        if self.check_closed && !self.model.is_closed_mask(mask) {
            return Err(ComplexError::Invariant(format!(
                "configuration {mask:#x} of cell {t} is not closed"
            )));
        }
        Ok(Configuration::from_mask_unchecked(self.kind, mask))
    }

    /// Intersection of `t` with the closure of the other alive cells, in the
    /// coordinates of the model cell.
    pub fn extract_object_configuration(&self, t: CellId) -> Result<Configuration, ComplexError> {
        self.check_cell(t)?;
        let mut mask = 0;
        for &v in self.cell_vertices(t) {
            for &c in self.cells_at_vertex(v) {
                let c = c as CellId;
                if c != t && self.alive[c] {
                    mask |= self.model.elements_spanned_by(self.shared_labels(t, c));
                }
            }
        }
        Ok(Configuration::from_mask_unchecked(self.kind, mask))
    }

    /// A cell is simple when both its intersection with the complement and
    /// its intersection with the rest of the object are acyclic. The first
    /// keeps the homology of the complement, the second that of the object.
    /// They differ only where the object is pinched at a lower-dimensional
    /// face of `t`. The only coface of an anchored face is never simple.
    pub fn is_simple(&self, t: CellId, table: &dyn AcyclicityLookup) -> Result<bool, ComplexError> {
        table.ensure_kind(self.kind)?;
        let config = self.extract_configuration(t)?;
        if self.has_anchored_facet(t) {
            return Ok(false);
        }
        if !table.lookup(config.mask()) {
            return Ok(false);
        }
        Ok(table.lookup(self.extract_object_configuration(t)?.mask()))
    }

    /// Marks `t` as removed and updates the configuration of every cell
    /// sharing a vertex with it.
    pub fn remove(&mut self, t: CellId) -> Result<(), ComplexError> {
        self.check_cell(t)?;
        self.alive[t] = false;
        self.alive_count -= 1;
        let fc = self.facet_elements.len();
        for i in 0..fc {
            let f = self.cell_facets[t * fc + i] as usize;
            self.alive_cofaces[f] -= 1;
        }
        for other in self.vertex_neighbors(t) {
            let labels = self.shared_labels(other, t);
            self.removed[other] |= self.model.elements_spanned_by(labels);
        }
        Ok(())
    }

    /// Every other cell sharing at least one vertex with `t`, dead or alive, ascending.
    fn vertex_neighbors(&self, t: CellId) -> Vec<CellId> {
        let mut out: Vec<CellId> = self
            .cell_vertices(t)
            .iter()
            .flat_map(|&v| self.cells_at_vertex(v).iter().map(|&c| c as CellId))
            .filter(|&c| c != t)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Alive cells sharing at least one vertex with `t`, ascending.
    pub fn neighbors(&self, t: CellId) -> Result<Vec<CellId>, ComplexError> {
        if t >= self.len() {
            return Err(ComplexError::UnknownCell(t));
        }
        let mut out = self.vertex_neighbors(t);
        out.retain(|&c| self.alive[c]);
        Ok(out)
    }

    /// Alive cells sharing a (d-1)-face with `t`, ascending.
    pub fn face_neighbors(&self, t: CellId) -> Result<Vec<CellId>, ComplexError> {
        if t >= self.len() {
            return Err(ComplexError::UnknownCell(t));
        }
        let fc = self.facet_elements.len();
        let mut out: Vec<CellId> = Vec::new();
        for &f in &self.cell_facets[t * fc..(t + 1) * fc] {
            let f = f as usize;
            let range = self.face_coface_start[f] as usize..self.face_coface_start[f + 1] as usize;
            for &c in &self.face_cofaces[range] {
                let c = c as usize;
                if c != t && self.alive[c] {
                    out.push(c);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Largest number of vertex-sharing neighbours of any cell in the original complex.
    pub fn max_neighbor_count(&self) -> usize {
        (0..self.len())
            .map(|t| self.vertex_neighbors(t).len())
            .max()
            .unwrap_or(0)
    }

    /// True iff some (d-1)-face of `t` has no other alive coface.
    pub fn touches_current_boundary(&self, t: CellId) -> bool {
        let fc = self.facet_elements.len();
        self.cell_facets[t * fc..(t + 1) * fc]
            .iter()
            .any(|&f| self.alive_cofaces[f as usize] == 1)
    }

    /// True iff `t` contains an anchored (d-1)-face.
    pub fn has_anchored_facet(&self, t: CellId) -> bool {
        let fc = self.facet_elements.len();
        self.cell_facets[t * fc..(t + 1) * fc]
            .iter()
            .any(|&f| self.anchored[f as usize])
    }

    /// Element mask of the anchored (d-1)-faces of `t` and all their faces.
    pub fn anchored_mask(&self, t: CellId) -> u32 {
        let fc = self.facet_elements.len();
        let mut mask = 0;
        for (i, &f) in self.cell_facets[t * fc..(t + 1) * fc].iter().enumerate() {
            if self.anchored[f as usize] {
                mask |= 1 << self.facet_elements[i];
            }
        }
        self.model.closure_mask(mask)
    }

    /// Element mask of the anchored (d-1)-faces of `t` only.
    pub fn anchored_facet_mask(&self, t: CellId) -> u32 {
        let fc = self.facet_elements.len();
        self.cell_facets[t * fc..(t + 1) * fc]
            .iter()
            .enumerate()
            .filter(|(_, &f)| self.anchored[f as usize])
            .fold(0, |m, (i, _)| m | 1 << self.facet_elements[i])
    }

    /// Global vertex ids of `t` in model-label order (simplicial complexes).
    pub fn global_vertices(&self, t: CellId) -> Vec<u32> {
        self.cell_vertices(t)
            .iter()
            .map(|&v| self.vertex_ids[v as usize])
            .collect()
    }
}

/// Compressed adjacency from (key, value) pairs.
/// Dense numbering of the lattice points in the bounding box of a cubical
/// input. Used in place of hashing unless the box is much larger than the
/// input itself.
struct Lattice {
    low: [i64; 3],
    size: [usize; 3],
}

impl Lattice {
    fn fit(origins: &[[i64; 3]], dim: usize) -> Option<Self> {
        let first = origins.first()?;
        let (mut low, mut high) = (*first, *first);
        for o in origins {
            for a in 0..3 {
                low[a] = low[a].min(o[a]);
                high[a] = high[a].max(o[a]);
            }
        }
        let mut size = [1usize; 3];
        let mut volume = 1usize;
        for a in 0..dim {
            let extent = high[a].checked_sub(low[a])?.checked_add(2)?;
            size[a] = usize::try_from(extent).ok()?;
            volume = volume.checked_mul(size[a])?;
        }
        if dim == 2 && (low[2] != 0 || high[2] != 0) {
            return None;
        }
        (volume <= 8 * origins.len() + 4096).then_some(Lattice { low, size })
    }

    fn len(&self) -> usize {
        self.size.iter().product()
    }

    fn slot(&self, p: [i64; 3]) -> usize {
        let [x, y, z] = [0, 1, 2].map(|a| (p[a] - self.low[a]) as usize);
        (z * self.size[1] + y) * self.size[0] + x
    }
}

/// Lowest corner offset and normal axis of each facet element of a cube.
fn facet_placement(model: &ModelCell, facets: &[usize]) -> Vec<([i64; 3], usize)> {
    let embedding = model.embedding().expect("cubical model");
    facets
        .iter()
        .map(|&e| {
            let corners: Vec<[i64; 3]> = model.elements()[e]
                .labels
                .iter()
                .map(|&l| embedding[l as usize])
                .collect();
            let low = [0, 1, 2].map(|a| corners.iter().map(|c| c[a]).min().unwrap());
            let axis = (0..model.kind().dim())
                .find(|&a| corners.iter().all(|c| c[a] == corners[0][a]))
                .expect("facet has a normal axis");
            (low, axis)
        })
        .collect()
}

fn csr(keys: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<u32>, Vec<u32>) {
    let mut start = vec![0u32; keys + 1];
    for (k, _) in pairs.clone() {
        start[k as usize + 1] += 1;
    }
    for i in 0..keys {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut values = vec![0u32; start[keys] as usize];
    for (k, v) in pairs {
        values[fill[k as usize] as usize] = v;
        fill[k as usize] += 1;
    }
    (start, values)
}
