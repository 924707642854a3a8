//! Mesh, voxel, anchor and skeleton files, plus legacy VTK export.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cell_models::ModelKind;
use crate::complex::{Anchor, CellId, Cells};
use crate::thinning::{Algorithm, ThinningOutcome};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Unsupported(String),
    #[error("refusing to write an empty skeleton for a non-empty input")]
    EmptySkeleton,
}

/// Top cells plus node coordinates (simplicial input only; cubes carry
/// their own lattice coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub kind: ModelKind,
    pub cells: Cells,
    pub nodes: BTreeMap<u32, Vec<f64>>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Non-empty, comment-stripped lines with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = l.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn perr(file: &str, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        file: file.to_owned(),
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(file: &str, line: usize, tok: &str, what: &str) -> Result<T, IoError> {
    tok.parse()
        .map_err(|_| perr(file, line, format!("invalid {what} '{tok}'")))
}

/// Parses a TetGen `.node` file.
pub fn parse_node(text: &str, file: &str) -> Result<BTreeMap<u32, Vec<f64>>, IoError> {
    let mut lines = data_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| perr(file, 1, "missing header"))?;
    let count: usize = num(file, hl, header[0], "node count")?;
    let dim: usize = match header.get(1) {
        Some(t) => num(file, hl, t, "dimension")?,
        None => return Err(perr(file, hl, "header needs a dimension")),
    };
    if !(2..=4).contains(&dim) {
        return Err(perr(file, hl, format!("unsupported dimension {dim}")));
    }
    let mut nodes = BTreeMap::new();
    for (ln, tokens) in lines {
        if tokens.len() < 1 + dim {
            return Err(perr(
                file,
                ln,
                format!("expected an id and {dim} coordinates"),
            ));
        }
        let id: u32 = num(file, ln, tokens[0], "node id")?;
        let coords = tokens[1..=dim]
            .iter()
            .map(|t| num(file, ln, t, "coordinate"))
            .collect::<Result<Vec<f64>, _>>()?;
        if nodes.insert(id, coords).is_some() {
            return Err(perr(file, ln, format!("duplicate node id {id}")));
        }
    }
    if nodes.len() != count {
        return Err(perr(
            file,
            hl,
            format!("header announces {count} nodes, found {}", nodes.len()),
        ));
    }
    Ok(nodes)
}

/// Parses a TetGen `.ele` file against known node ids. Arity 3, 4 and 5
/// give triangles, tetrahedra and 4-simplices.
pub fn parse_ele(
    text: &str,
    file: &str,
    nodes: &BTreeMap<u32, Vec<f64>>,
) -> Result<(ModelKind, Cells), IoError> {
    let mut lines = data_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| perr(file, 1, "missing header"))?;
    if header.len() < 2 {
        return Err(perr(file, hl, "header needs a count and an arity"));
    }
    let count: usize = num(file, hl, header[0], "element count")?;
    let arity: usize = num(file, hl, header[1], "arity")?;
    let kind = match arity {
        3 => ModelKind::Simplex2,
        4 => ModelKind::Simplex3,
        5 => ModelKind::Simplex4,
        _ => return Err(perr(file, hl, format!("unsupported arity {arity}"))),
    };
    let mut cells = Vec::with_capacity(count);
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    for (ln, tokens) in lines {
        if tokens.len() < 1 + arity {
            return Err(perr(
                file,
                ln,
                format!("expected an id and {arity} vertices"),
            ));
        }
        let verts = tokens[1..=arity]
            .iter()
            .map(|t| num::<u32>(file, ln, t, "vertex id"))
            .collect::<Result<Vec<u32>, _>>()?;
        if let Some(v) = verts.iter().find(|v| !nodes.contains_key(v)) {
            return Err(perr(file, ln, format!("unknown vertex {v}")));
        }
        let mut key = verts.clone();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(perr(file, ln, "repeated vertex in element"));
        }
        if let Some(first) = seen.insert(key, ln) {
            return Err(perr(
                file,
                ln,
                format!("duplicate element (first at line {first})"),
            ));
        }
        cells.push(verts);
    }
    if cells.len() != count {
        return Err(perr(
            file,
            hl,
            format!("header announces {count} elements, found {}", cells.len()),
        ));
    }
    Ok((kind, Cells::Simplicial(cells)))
}

pub fn read_simplicial(node_path: &Path, ele_path: &Path) -> Result<Mesh, IoError> {
    let nodes = parse_node(&read(node_path)?, &node_path.display().to_string())?;
    let (kind, cells) = parse_ele(&read(ele_path)?, &ele_path.display().to_string(), &nodes)?;
    Ok(Mesh { kind, cells, nodes })
}

pub fn write_simplicial(mesh: &Mesh, node_path: &Path, ele_path: &Path) -> Result<(), IoError> {
    let Cells::Simplicial(cells) = &mesh.cells else {
        return Err(IoError::Unsupported(
            "node/ele output needs a simplicial mesh".into(),
        ));
    };
    let dim = mesh
        .nodes
        .values()
        .next()
        .map_or(mesh.kind.dim().max(2), Vec::len);
    let mut s = format!("{} {dim} 0 0\n", mesh.nodes.len());
    for (id, c) in &mesh.nodes {
        let _ = write!(s, "{id}");
        for x in c {
            let _ = write!(s, " {x}");
        }
        s.push('\n');
    }
    write(node_path, &s)?;
    let mut e = format!("{} {} 0\n", cells.len(), mesh.kind.vertex_count());
    for (i, c) in cells.iter().enumerate() {
        let _ = write!(e, "{i}");
        for v in c {
            let _ = write!(e, " {v}");
        }
        e.push('\n');
    }
    write(ele_path, &e)
}

/// Parses the `VOX nx ny nz` occupancy format (x fastest, then y, then z).
/// `nz = 1` gives pixels.
pub fn parse_voxels(text: &str, file: &str) -> Result<Mesh, IoError> {
    parse_voxels_as(text, file, None)
}

/// As [`parse_voxels`], with the cube dimension forced by `kind`.
pub fn parse_voxels_as(text: &str, file: &str, kind: Option<ModelKind>) -> Result<Mesh, IoError> {
    let mut lines = data_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| perr(file, 1, "missing header"))?;
    if header.len() != 4 || header[0] != "VOX" {
        return Err(perr(file, hl, "header must be 'VOX nx ny nz'"));
    }
    let mut dims = [0i64; 3];
    for (d, t) in dims.iter_mut().zip(&header[1..]) {
        *d = num(file, hl, t, "grid size")?;
        if *d < 1 {
            return Err(perr(file, hl, "grid sizes must be positive"));
        }
    }
    let total = (dims[0] * dims[1] * dims[2]) as usize;
    let kind = match kind {
        Some(ModelKind::Cube2) if dims[2] != 1 => {
            return Err(perr(file, hl, "pixels need nz = 1"));
        }
        Some(k) if k.is_cubical() => k,
        Some(k) => return Err(IoError::Unsupported(format!("{k} is not a cube model"))),
        None if dims[2] == 1 => ModelKind::Cube2,
        None => ModelKind::Cube3,
    };
    let mut cells = Vec::new();
    let mut k = 0usize;
    for (ln, tokens) in lines {
        for t in tokens {
            let on = match t {
                "0" => false,
                "1" => true,
                _ => return Err(perr(file, ln, format!("expected 0 or 1, found '{t}'"))),
            };
            if k >= total {
                return Err(perr(file, ln, format!("more than {total} values")));
            }
            if on {
                let x = k as i64 % dims[0];
                let y = (k as i64 / dims[0]) % dims[1];
                let z = k as i64 / (dims[0] * dims[1]);
                cells.push([x, y, z]);
            }
            k += 1;
        }
    }
    if k != total {
        return Err(perr(
            file,
            hl,
            format!("expected {total} values, found {k}"),
        ));
    }
    Ok(Mesh {
        kind,
        cells: Cells::Cubical(cells),
        nodes: BTreeMap::new(),
    })
}

pub fn read_voxels(path: &Path, kind: Option<ModelKind>) -> Result<Mesh, IoError> {
    parse_voxels_as(&read(path)?, &path.display().to_string(), kind)
}

/// Writes cubes to the occupancy format on the grid `[0, max + 1)`.
pub fn format_voxels(mesh: &Mesh) -> Result<String, IoError> {
    let Cells::Cubical(cells) = &mesh.cells else {
        return Err(IoError::Unsupported(
            "voxel output needs a cubical mesh".into(),
        ));
    };
    if cells.iter().any(|c| c.iter().any(|&x| x < 0)) {
        return Err(IoError::Unsupported(
            "voxel output needs non-negative coordinates".into(),
        ));
    }
    let mut dims = [1i64; 3];
    for c in cells {
        for a in 0..3 {
            dims[a] = dims[a].max(c[a] + 1);
        }
    }
    let on: HashSet<[i64; 3]> = cells.iter().copied().collect();
    let mut s = format!("VOX {} {} {}\n", dims[0], dims[1], dims[2]);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            let row: Vec<&str> = (0..dims[0])
                .map(|x| if on.contains(&[x, y, z]) { "1" } else { "0" })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    Ok(s)
}

pub fn write_voxels(mesh: &Mesh, path: &Path) -> Result<(), IoError> {
    write(path, &format_voxels(mesh)?)
}

/// One anchor per line: sorted vertex ids for simplicial meshes, or
/// `axis x y z` (axis `x|y|z` or `0|1|2`) for lattice faces.
pub fn parse_anchors(text: &str, file: &str, kind: ModelKind) -> Result<Vec<Anchor>, IoError> {
    let mut out = Vec::new();
    for (ln, tokens) in data_lines(text) {
        if kind.is_cubical() {
            if tokens.len() != 4 {
                return Err(perr(file, ln, "expected 'axis x y z'"));
            }
            let axis = match tokens[0] {
                "x" | "0" => 0,
                "y" | "1" => 1,
                "z" | "2" => 2,
                t => return Err(perr(file, ln, format!("unknown axis '{t}'"))),
            };
            let mut origin = [0i64; 3];
            for (o, t) in origin.iter_mut().zip(&tokens[1..]) {
                *o = num(file, ln, t, "coordinate")?;
            }
            out.push(Anchor::CubeFace { axis, origin });
        } else {
            if tokens.len() != kind.dim() {
                return Err(perr(
                    file,
                    ln,
                    format!("expected {} vertex ids", kind.dim()),
                ));
            }
            let mut v = tokens
                .iter()
                .map(|t| num::<u32>(file, ln, t, "vertex id"))
                .collect::<Result<Vec<u32>, _>>()?;
            v.sort_unstable();
            out.push(Anchor::Simplex(v));
        }
    }
    Ok(out)
}

pub fn read_anchors(path: &Path, kind: ModelKind) -> Result<Vec<Anchor>, IoError> {
    parse_anchors(&read(path)?, &path.display().to_string(), kind)
}

/// Skeleton text: a commented header with counts and the pass at which
/// each removed cell went, then one kept id per line.
pub fn format_skeleton(
    kind: ModelKind,
    algorithm: Algorithm,
    outcome: &ThinningOutcome,
) -> Result<String, IoError> {
    if outcome.kept.is_empty() && outcome.stats.initial_count > 0 {
        return Err(IoError::EmptySkeleton);
    }
    let alg = match algorithm {
        Algorithm::Topology => "topo",
        Algorithm::Shape => "shape",
    };
    let mut s = String::new();
    let _ = writeln!(s, "# cellthin skeleton");
    let _ = writeln!(s, "# kind {kind}");
    let _ = writeln!(s, "# algorithm {alg}");
    let _ = writeln!(s, "# input_cells {}", outcome.stats.initial_count);
    let _ = writeln!(s, "# kept_cells {}", outcome.kept.len());
    let _ = writeln!(s, "# passes {}", outcome.passes);
    for &(id, pass) in &outcome.removed_order {
        let _ = writeln!(s, "# removed {id} {pass}");
    }
    for id in &outcome.kept {
        let _ = writeln!(s, "{id}");
    }
    Ok(s)
}

pub fn write_skeleton(
    kind: ModelKind,
    algorithm: Algorithm,
    outcome: &ThinningOutcome,
    path: &Path,
) -> Result<(), IoError> {
    write(path, &format_skeleton(kind, algorithm, outcome)?)
}

pub fn parse_skeleton(text: &str, file: &str) -> Result<Vec<CellId>, IoError> {
    let mut ids = Vec::new();
    for (ln, tokens) in data_lines(text) {
        if tokens.len() != 1 {
            return Err(perr(file, ln, "expected one cell id per line"));
        }
        ids.push(num(file, ln, tokens[0], "cell id")?);
    }
    Ok(ids)
}

pub fn read_skeleton(path: &Path) -> Result<Vec<CellId>, IoError> {
    parse_skeleton(&read(path)?, &path.display().to_string())
}

/// Legacy ASCII unstructured grid with a `kept` cell scalar.
pub fn format_vtk(mesh: &Mesh, kept: &[bool]) -> Result<String, IoError> {
    if kept.len() != mesh.len() {
        return Err(IoError::Unsupported(format!(
            "{} kept flags for {} cells",
            kept.len(),
            mesh.len()
        )));
    }
    let (vtk_type, order): (u8, &[usize]) = match mesh.kind {
        ModelKind::Simplex2 => (5, &[0, 1, 2]),
        ModelKind::Simplex3 => (10, &[0, 1, 2, 3]),
        ModelKind::Cube2 => (9, &[0, 1, 3, 2]),
        ModelKind::Cube3 => (12, &[0, 1, 2, 3, 4, 5, 6, 7]),
        ModelKind::Simplex4 => {
            return Err(IoError::Unsupported(
                "VTK has no 4-simplex cell type".into(),
            ));
        }
    };
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut conn: Vec<Vec<usize>> = Vec::with_capacity(mesh.len());
    match &mesh.cells {
        Cells::Simplicial(cells) => {
            let mut index = HashMap::new();
            for (id, c) in &mesh.nodes {
                index.insert(*id, points.len());
                points.push([
                    c[0],
                    c.get(1).copied().unwrap_or(0.0),
                    c.get(2).copied().unwrap_or(0.0),
                ]);
            }
            for cell in cells {
                let row = cell
                    .iter()
                    .map(|v| {
                        index.get(v).copied().ok_or_else(|| {
                            IoError::Unsupported(format!("vertex {v} has no coordinates"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                conn.push(row);
            }
        }
        Cells::Cubical(cells) => {
            let model = mesh.kind.model();
            let mut index: HashMap<[i64; 3], usize> = HashMap::new();
            for &o in cells {
                let corners = model
                    .cube_corners(o)
                    .map_err(|e| IoError::Unsupported(e.to_string()))?;
                let row = order
                    .iter()
                    .map(|&k| {
                        *index.entry(corners[k]).or_insert_with(|| {
                            let c = corners[k];
                            points.push([c[0] as f64, c[1] as f64, c[2] as f64]);
                            points.len() - 1
                        })
                    })
                    .collect();
                conn.push(row);
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "cellthin {} mesh", mesh.kind);
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let k = order.len();
    let _ = writeln!(s, "CELLS {} {}", conn.len(), conn.len() * (k + 1));
    for row in &conn {
        let _ = write!(s, "{k}");
        for v in row {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", conn.len());
    for _ in &conn {
        let _ = writeln!(s, "{vtk_type}");
    }
    let _ = writeln!(s, "CELL_DATA {}", conn.len());
    let _ = writeln!(s, "SCALARS kept int 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for &f in kept {
        let _ = writeln!(s, "{}", u8::from(f));
    }
    Ok(s)
}

pub fn write_vtk(mesh: &Mesh, kept: &[bool], path: &Path) -> Result<(), IoError> {
    write(path, &format_vtk(mesh, kept)?)
}
