use crate::error::{FormatError, Result};
use crate::math::Vec3;
use crate::renderer::PointCloud;

fn parse_point(fields: &[&str]) -> Option<Vec3> {
    let mut p = [0.0; 3];
    for (o, f) in p.iter_mut().zip(fields) {
        *o = f.parse::<f64>().ok().filter(|v| v.is_finite())?;
    }
    Some(p)
}

/// One `x y z` record per line, shortest round-trip decimal form.
pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 32);
    for [x, y, z] in &cloud.points {
        out.push_str(&format!("{x} {y} {z}\n"));
    }
    out
}

/// Blank lines and `#` comments are skipped; every other line must hold
/// exactly three finite reals.
pub fn read_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let p = (fields.len() == 3)
            .then(|| parse_point(&fields))
            .flatten()
            .ok_or_else(|| FormatError::Xyz {
                line: n + 1,
                message: format!("expected three finite reals, got `{line}`"),
            })?;
        points.push(p);
    }
    Ok(PointCloud::new(points))
}

pub fn write_ply(cloud: &PointCloud) -> String {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.len()
    );
    out.push_str(&write_xyz(cloud));
    out
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// ASCII PLY reader. The `vertex` element must carry `x`, `y` and `z`
/// scalar properties; other properties and elements are skipped.
pub fn read_ply(text: &str) -> Result<PointCloud> {
    let err = |m: String| FormatError::Ply(m);
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(err("missing `ply` magic".into()).into());
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut ascii = false;
    loop {
        let line = lines.next().ok_or_else(|| err("missing `end_header`".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => ascii = true,
            ["format", other, ..] => return Err(err(format!("unsupported format `{other}`; only ascii is read")).into()),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| err(format!("bad element count `{count}`")))?,
                properties: Vec::new(),
            }),
            ["property", "list", .., name] | ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| err("property before any element".into()))?
                .properties
                .push(name.to_string()),
            _ => return Err(err(format!("unexpected header line `{line}`")).into()),
        }
    }
    if !ascii {
        return Err(err("missing `format` line".into()).into());
    }

    let mut points = Vec::new();
    for e in &elements {
        if e.name != "vertex" {
            for _ in 0..e.count {
                lines.next().ok_or_else(|| err(format!("truncated `{}` element", e.name)))?;
            }
            continue;
        }
        let slot = |axis: &str| {
            e.properties
                .iter()
                .position(|p| p == axis)
                .ok_or_else(|| err(format!("vertex element has no `{axis}` property")))
        };
        let cols = [slot("x")?, slot("y")?, slot("z")?];
        points.reserve(e.count);
        for k in 0..e.count {
            let line = lines.next().ok_or_else(|| err(format!("expected {} vertices, found {k}", e.count)))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != e.properties.len() {
                return Err(err(format!("vertex {k}: expected {} values", e.properties.len())).into());
            }
            let p = parse_point(&cols.map(|c| fields[c])).ok_or_else(|| err(format!("vertex {k}: bad coordinate")))?;
            points.push(p);
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(err("trailing data after the last element".into()).into());
    }
    Ok(PointCloud::new(points))
}
