use crate::error::{FormatError, Result};
use crate::renderer::VoxelGrid;

fn header_error(msg: impl Into<String>) -> FormatError {
    FormatError::BinvoxHeader(msg.into())
}

fn parse_reals<const N: usize>(fields: &[&str], what: &str) -> Result<[f64; N], FormatError> {
    if fields.len() != N {
        return Err(header_error(format!("`{what}` expects {N} values, got {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| header_error(format!("bad `{what}` value `{f}`")))?;
    }
    Ok(out)
}

/// Decodes a binvox file. Only cubic grids are accepted, voxel values must
/// be 0 or 1, and run counts must be positive.
pub fn read_binvox(bytes: &[u8]) -> Result<VoxelGrid> {
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Option<String> {
        let rest = &bytes[*pos..];
        let end = rest.iter().position(|&b| b == b'\n')?;
        *pos += end + 1;
        Some(String::from_utf8_lossy(&rest[..end]).trim().to_string())
    };

    let magic = next_line(&mut pos).ok_or(FormatError::BadMagic)?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["#binvox", "1"] {
        return Err(FormatError::BadMagic.into());
    }

    let mut dim = None;
    let mut translate = None;
    let mut scale = None;
    loop {
        let line = next_line(&mut pos).ok_or_else(|| header_error("missing `data` line"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first().copied() {
            Some("data") => break,
            Some("dim") => {
                let mut d = [0usize; 3];
                if fields.len() != 4 {
                    return Err(header_error("`dim` expects 3 values").into());
                }
                for (o, f) in d.iter_mut().zip(&fields[1..]) {
                    *o = f.parse().map_err(|_| header_error(format!("bad `dim` value `{f}`")))?;
                }
                if d[0] != d[1] || d[1] != d[2] {
                    return Err(FormatError::DimMismatch(d[0], d[1], d[2]).into());
                }
                if d[0] == 0 {
                    return Err(header_error("`dim` must be positive").into());
                }
                dim = Some(d[0]);
            }
            Some("translate") => translate = Some(parse_reals::<3>(&fields[1..], "translate")?),
            Some("scale") => scale = Some(parse_reals::<1>(&fields[1..], "scale")?[0]),
            None => continue,
            Some(other) => return Err(header_error(format!("unexpected header line `{other}`")).into()),
        }
    }
    let dim = dim.ok_or_else(|| header_error("missing `dim`"))?;
    let total = dim
        .checked_pow(3)
        .ok_or_else(|| header_error(format!("dim {dim} is too large")))?;
    let mut grid = VoxelGrid::empty(dim, translate.unwrap_or([0.0; 3]), scale.unwrap_or(1.0));

    let data = &bytes[pos..];
    let mut filled = 0;
    for pair in data.chunks(2) {
        let &[value, count] = pair else {
            return Err(FormatError::Underrun { got: filled, expected: total }.into());
        };
        if filled == total {
            return Err(FormatError::Overrun(filled).into());
        }
        if value > 1 {
            return Err(header_error(format!("voxel value {value} at voxel {filled}; expected 0 or 1")).into());
        }
        if count == 0 {
            return Err(header_error(format!("zero-length run at voxel {filled}")).into());
        }
        let end = filled + count as usize;
        if end > total {
            return Err(FormatError::Overrun(filled).into());
        }
        if value == 1 {
            grid.occupancy[filled..end].fill(true);
        }
        filled = end;
    }
    if filled != total {
        return Err(FormatError::Underrun { got: filled, expected: total }.into());
    }
    Ok(grid)
}

pub fn write_binvox(grid: &VoxelGrid) -> Vec<u8> {
    let [tx, ty, tz] = grid.translate;
    let d = grid.dim;
    let mut out = format!("#binvox 1\ndim {d} {d} {d}\ntranslate {tx} {ty} {tz}\nscale {}\ndata\n", grid.scale).into_bytes();
    let mut cells = grid.occupancy.iter().copied().peekable();
    while let Some(v) = cells.next() {
        let mut run = 1u8;
        while run < u8::MAX && cells.next_if_eq(&v).is_some() {
            run += 1;
        }
        out.push(v as u8);
        out.push(run);
    }
    out
}
