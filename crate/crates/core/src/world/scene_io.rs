//! `voxscene 1` text format.

use std::fmt::Write as _;

use nalgebra::Vector3;

use super::grid::{GridGeometry, VoxelGrid, VoxelState};
use super::WorldError;

pub fn save_scene(grid: &VoxelGrid) -> String {
    let g = grid.geometry();
    let [nx, ny, nz] = g.dims;
    let mut out = String::with_capacity(g.len() + nz * (ny + 1) + 128);
    out.push_str("voxscene 1\n");
    let _ = writeln!(out, "dims {nx} {ny} {nz}");
    let _ = writeln!(out, "res {}", g.resolution);
    let _ = writeln!(out, "origin {} {} {}", g.origin.x, g.origin.y, g.origin.z);
    for z in 0..nz {
        if z > 0 {
            out.push('\n');
        }
        for y in 0..ny {
            for x in 0..nx {
                out.push(grid.state_at([x, y, z]).to_char());
            }
            out.push('\n');
        }
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> WorldError {
    WorldError::Parse { line, msg: msg.into() }
}

fn fields<'a>(line: Option<(usize, &'a str)>, key: &str, n: usize) -> Result<(usize, Vec<&'a str>), WorldError> {
    let (no, text) = line.ok_or_else(|| err(0, format!("missing `{key}` line")))?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(key) {
        return Err(err(no, format!("expected `{key}`")));
    }
    let vals: Vec<&str> = parts.collect();
    if vals.len() != n {
        return Err(err(no, format!("`{key}` takes {n} values")));
    }
    Ok((no, vals))
}

pub fn load_scene(text: &str) -> Result<VoxelGrid, WorldError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    match lines.next() {
        Some((_, l)) if l.trim() == "voxscene 1" => {}
        _ => return Err(err(1, "expected header `voxscene 1`")),
    }
    let (no, v) = fields(lines.next(), "dims", 3)?;
    let mut dims = [0usize; 3];
    for (a, s) in v.iter().enumerate() {
        dims[a] = s.parse().map_err(|_| err(no, format!("bad dimension `{s}`")))?;
    }
    let (no, v) = fields(lines.next(), "res", 1)?;
    let res: f64 = v[0].parse().map_err(|_| err(no, "bad resolution"))?;
    let (no, v) = fields(lines.next(), "origin", 3)?;
    let mut origin = [0.0; 3];
    for (a, s) in v.iter().enumerate() {
        origin[a] = s.parse().map_err(|_| err(no, format!("bad origin `{s}`")))?;
    }
    let geom = GridGeometry::new(dims, res, Vector3::from(origin)).map_err(|e| err(no, e.to_string()))?;

    let [nx, ny, nz] = dims;
    let mut states = Vec::with_capacity(geom.len());
    let mut rows = 0usize;
    let mut last = no;
    for (no, l) in lines {
        last = no;
        if l.trim().is_empty() {
            continue;
        }
        if rows == ny * nz {
            return Err(err(no, format!("more than {} cells", geom.len())));
        }
        if l.chars().count() != nx {
            return Err(err(no, format!("row has {} cells, expected {nx}", l.chars().count())));
        }
        for c in l.chars() {
            states.push(VoxelState::from_char(c).ok_or_else(|| err(no, format!("invalid cell `{c}`")))?);
        }
        rows += 1;
    }
    if rows != ny * nz {
        return Err(err(
            last,
            format!("expected {} cells, found {}", geom.len(), states.len()),
        ));
    }
    VoxelGrid::from_states(geom, states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid() {
        let g = load_scene("voxscene 1\ndims 2 2 1\nres 0.1\norigin 0 0 0\nOF\nFF\n").unwrap();
        assert_eq!(g.count(VoxelState::Occupied), 1);
        assert_eq!(g.count(VoxelState::Free), 3);
        assert_eq!(g.state_at([0, 0, 0]), VoxelState::Occupied);
    }

    #[test]
    fn round_trip() {
        let geom = GridGeometry::new([3, 2, 2], 0.25, Vector3::new(-1.5, 0.5, 0.125)).unwrap();
        let mut g = VoxelGrid::new(geom, VoxelState::Free);
        g.set_at([2, 1, 1], VoxelState::Occupied);
        g.set_at([0, 1, 0], VoxelState::Unknown);
        let text = save_scene(&g);
        assert_eq!(load_scene(&text).unwrap(), g);
    }

    #[test]
    fn short_body_reports_line() {
        let text = "voxscene 1\ndims 5 2 1\nres 0.1\norigin 0 0 0\nOOOOO\nOOOO\n";
        match load_scene(text) {
            Err(WorldError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let missing = "voxscene 1\ndims 5 2 1\nres 0.1\norigin 0 0 0\nOOOOO\n";
        assert!(matches!(load_scene(missing), Err(WorldError::Parse { .. })));
    }

    #[test]
    fn bad_header() {
        assert!(matches!(load_scene("voxscene 2\n"), Err(WorldError::Parse { line: 1, .. })));
    }
}
