//! Small synthetic meshes with known homology, used by tests, the
//! acceptance suite and the `sample` CLI command.

use std::collections::{BTreeMap, HashMap};

use crate::cell_models::ModelKind;
use crate::complex::Cells;
use crate::io::Mesh;

fn simplicial(kind: ModelKind, cells: Vec<Vec<u32>>, nodes: BTreeMap<u32, Vec<f64>>) -> Mesh {
    Mesh {
        kind,
        cells: Cells::Simplicial(cells),
        nodes,
    }
}

fn cubical(kind: ModelKind, cells: Vec<[i64; 3]>) -> Mesh {
    Mesh {
        kind,
        cells: Cells::Cubical(cells),
        nodes: BTreeMap::new(),
    }
}

fn circle(r: f64, k: usize, n: usize) -> Vec<f64> {
    let a = std::f64::consts::TAU * k as f64 / n as f64;
    vec![r * a.cos(), r * a.sin()]
}

/// `n` triangles around vertex 0. Homology of a point.
pub fn fan_disk(n: u32) -> Mesh {
    assert!(n >= 3);
    let cells = (0..n).map(|i| vec![0, 1 + i, 1 + (i + 1) % n]).collect();
    let mut nodes = BTreeMap::from([(0, vec![0.0, 0.0])]);
    for i in 0..n {
        nodes.insert(1 + i, circle(1.0, i as usize, n as usize));
    }
    simplicial(ModelKind::Simplex2, cells, nodes)
}

/// Triangulated annulus with `rings` concentric vertex rings of `n`
/// vertices each. Homology of a circle.
pub fn annulus(n: u32, rings: u32) -> Mesh {
    assert!(n >= 3 && rings >= 2);
    let v = |ring: u32, i: u32| ring * n + i % n;
    let mut cells = Vec::new();
    for r in 0..rings - 1 {
        for i in 0..n {
            cells.push(vec![v(r, i), v(r, i + 1), v(r + 1, i)]);
            cells.push(vec![v(r, i + 1), v(r + 1, i + 1), v(r + 1, i)]);
        }
    }
    let mut nodes = BTreeMap::new();
    for r in 0..rings {
        for i in 0..n {
            nodes.insert(v(r, i), circle(1.0 + r as f64, i as usize, n as usize));
        }
    }
    simplicial(ModelKind::Simplex2, cells, nodes)
}

/// Triangulated Moebius band made of `n` squares. Homology of a circle.
pub fn mobius_strip(n: u32) -> Mesh {
    assert!(n >= 5);
    // Top row 0..n, bottom row n..2n; the last square glues with a twist.
    let top = |i: u32| i;
    let bottom = |i: u32| n + i;
    let mut cells = Vec::new();
    for i in 0..n {
        let (a0, b0) = (top(i), bottom(i));
        let (a1, b1) = if i + 1 < n {
            (top(i + 1), bottom(i + 1))
        } else {
            (bottom(0), top(0))
        };
        cells.push(vec![a0, a1, b0]);
        cells.push(vec![a1, b1, b0]);
    }
    let mut nodes = BTreeMap::new();
    for i in 0..n {
        let mut t = circle(2.0, i as usize, n as usize);
        let mut b = circle(3.0, i as usize, n as usize);
        let h = std::f64::consts::PI * i as f64 / n as f64;
        t.push(h.sin());
        b.push(-h.sin());
        nodes.insert(top(i), t);
        nodes.insert(bottom(i), b);
    }
    simplicial(ModelKind::Simplex2, cells, nodes)
}

/// Zig-zag strip of `n` triangles `[i, i+1, i+2]`.
pub fn triangle_strip(n: u32) -> Mesh {
    let cells = (0..n).map(|i| vec![i, i + 1, i + 2]).collect();
    let nodes = (0..n + 2)
        .map(|i| {
            (
                i,
                vec![(i / 2) as f64 + 0.5 * (i % 2) as f64, (i % 2) as f64],
            )
        })
        .collect();
    simplicial(ModelKind::Simplex2, cells, nodes)
}

/// All lattice cubes of an `nx x ny x nz` block, x fastest.
pub fn block(nx: i64, ny: i64, nz: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::with_capacity((nx * ny * nz) as usize);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                out.push([x, y, z]);
            }
        }
    }
    out
}

pub fn voxel_block(nx: i64, ny: i64, nz: i64) -> Mesh {
    cubical(ModelKind::Cube3, block(nx, ny, nz))
}

pub fn pixel_block(nx: i64, ny: i64) -> Mesh {
    cubical(ModelKind::Cube2, block(nx, ny, 1))
}

/// Voxels of an `n^3` grid whose index distance to `center` is at most
/// `sqrt(r2)`.
pub fn voxel_ball(n: i64, center: i64, r2: i64) -> Mesh {
    let cells = block(n, n, n)
        .into_iter()
        .filter(|c| c.iter().map(|&x| (x - center) * (x - center)).sum::<i64>() <= r2)
        .collect();
    cubical(ModelKind::Cube3, cells)
}

/// The 9^3 digitized ball of radius 4.
pub fn voxel_ball9() -> Mesh {
    voxel_ball(9, 4, 16)
}

/// An `n x n x h` block with the central `m x m` column removed.
pub fn voxel_torus(n: i64, m: i64, h: i64) -> Mesh {
    assert!(n - m >= 2 && (n - m) % 2 == 0);
    let lo = (n - m) / 2;
    let inside = |x: i64| (lo..lo + m).contains(&x);
    let cells = block(n, n, h)
        .into_iter()
        .filter(|c| !(inside(c[0]) && inside(c[1])))
        .collect();
    cubical(ModelKind::Cube3, cells)
}

/// Square ring of pixels: an `n x n` block without its centre.
pub fn pixel_ring(n: i64) -> Mesh {
    let cells = block(n, n, 1)
        .into_iter()
        .filter(|c| c[0] == 0 || c[1] == 0 || c[0] == n - 1 || c[1] == n - 1)
        .collect();
    cubical(ModelKind::Cube2, cells)
}

/// Voxel shell: an `n^3` block without its interior. Homology of a sphere.
pub fn voxel_shell(n: i64) -> Mesh {
    let cells = block(n, n, n)
        .into_iter()
        .filter(|c| c.iter().any(|&x| x == 0 || x == n - 1))
        .collect();
    cubical(ModelKind::Cube3, cells)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Kuhn triangulation of a set of unit `D`-cubes: each cube splits into
/// `D!` simplices along monotone lattice paths, consistently across
/// shared faces. Vertex ids follow first appearance.
pub fn kuhn<const D: usize>(cubes: &[[i64; D]]) -> Mesh {
    let kind = match D {
        2 => ModelKind::Simplex2,
        3 => ModelKind::Simplex3,
        4 => ModelKind::Simplex4,
        _ => panic!("no simplex model in dimension {D}"),
    };
    let perms = permutations(D);
    let mut ids: HashMap<[i64; D], u32> = HashMap::new();
    let mut nodes = BTreeMap::new();
    let mut cells = Vec::with_capacity(cubes.len() * perms.len());
    for cube in cubes {
        for p in &perms {
            let mut v = *cube;
            let mut simplex = Vec::with_capacity(D + 1);
            for step in 0..=D {
                if step > 0 {
                    v[p[step - 1]] += 1;
                }
                let next = ids.len() as u32;
                let id = *ids.entry(v).or_insert_with(|| {
                    nodes.insert(next, v.iter().map(|&x| x as f64).collect());
                    next
                });
                simplex.push(id);
            }
            cells.push(simplex);
        }
    }
    simplicial(kind, cells, nodes)
}

fn as_cubes3(mesh: &Mesh) -> Vec<[i64; 3]> {
    match &mesh.cells {
        Cells::Cubical(c) => c.clone(),
        Cells::Simplicial(_) => unreachable!("cubical sample expected"),
    }
}

/// Kuhn-triangulated digitized ball (5^3 grid, radius 2).
pub fn tet_ball() -> Mesh {
    kuhn(&as_cubes3(&voxel_ball(5, 2, 4)))
}

/// Kuhn-triangulated square ring: 4x4x1 block minus the central 2x2.
pub fn tet_torus() -> Mesh {
    kuhn(&as_cubes3(&voxel_torus(4, 2, 1)))
}

/// Kuhn-triangulated block of 4-cubes.
pub fn simplex4_block(n: [i64; 4]) -> Mesh {
    let mut cubes = Vec::new();
    for w in 0..n[3] {
        for z in 0..n[2] {
            for y in 0..n[1] {
                for x in 0..n[0] {
                    cubes.push([x, y, z, w]);
                }
            }
        }
    }
    kuhn(&cubes)
}

/// Named meshes of the homology-preservation suite with their expected
/// Betti numbers.
pub fn suite() -> Vec<(&'static str, Mesh, Vec<usize>)> {
    vec![
        ("fan disk", fan_disk(6), vec![1, 0, 0]),
        ("annulus", annulus(8, 3), vec![1, 1, 0]),
        ("moebius strip", mobius_strip(6), vec![1, 1, 0]),
        ("tet ball", tet_ball(), vec![1, 0, 0, 0]),
        ("tet torus", tet_torus(), vec![1, 1, 0, 0]),
        ("voxel ball 9^3", voxel_ball9(), vec![1, 0, 0, 0]),
        ("voxel torus", voxel_torus(5, 1, 3), vec![1, 1, 0, 0]),
    ]
}

/// Looks up a sample by name for the CLI.
pub fn by_name(name: &str) -> Option<Mesh> {
    Some(match name {
        "fan" => fan_disk(6),
        "annulus" => annulus(8, 3),
        "mobius" => mobius_strip(6),
        "strip" => triangle_strip(8),
        "tet-ball" => tet_ball(),
        "tet-torus" => tet_torus(),
        "ball" => voxel_ball9(),
        "torus" => voxel_torus(5, 1, 3),
        "shell" => voxel_shell(4),
        "ring" => pixel_ring(3),
        "simp4-block" => simplex4_block([2, 1, 1, 1]),
        _ => return None,
    })
}

pub const SAMPLE_NAMES: &[&str] = &[
    "fan",
    "annulus",
    "mobius",
    "strip",
    "tet-ball",
    "tet-torus",
    "ball",
    "torus",
    "shell",
    "ring",
    "simp4-block",
];
