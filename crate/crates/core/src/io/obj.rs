use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, FormatError, Result};
use crate::math::{self, Vec3};
use crate::renderer::PointCloud;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(math::sub(b, a), math::sub(c, a));
        0.5 * math::norm(n)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Reads `v` and `f` records; polygons are fan-triangulated and every other
/// record type is skipped. Face indices may be negative (relative) and may
/// carry `/vt/vn` suffixes.
pub fn read_obj(text: &str) -> Result<Mesh> {
    let err = |line: usize, message: String| Error::from(FormatError::Obj { line, message });
    let mut mesh = Mesh::default();
    // (line, resolved 0-based index), checked once every vertex is known
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if !(3..=4).contains(&coords.len()) {
                    return Err(err(line_no, format!("vertex needs 3 coordinates, got {}", coords.len())));
                }
                let mut v = [0.0; 3];
                for (o, c) in v.iter_mut().zip(&coords) {
                    *o = c
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(line_no, format!("bad coordinate `{c}`")))?;
                }
                mesh.vertices.push(v);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in fields {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| err(line_no, format!("bad face index `{tok}`")))?;
                    let resolved = match i {
                        0 => return Err(err(line_no, "face index 0".into())),
                        i if i > 0 => i - 1,
                        i => mesh.vertices.len() as i64 + i,
                    };
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(err(line_no, format!("face needs at least 3 vertices, got {}", idx.len())));
                }
                faces.push((line_no, idx));
            }
            _ => {}
        }
    }

    let nv = mesh.vertices.len() as i64;
    for (line_no, idx) in faces {
        if let Some(&bad) = idx.iter().find(|&&i| i < 0 || i >= nv) {
            return Err(err(
                line_no,
                format!("vertex index {} out of range (mesh has {nv} vertices)", bad + 1),
            ));
        }
        let idx: Vec<usize> = idx.into_iter().map(|i| i as usize).collect();
        for k in 1..idx.len() - 1 {
            mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    Ok(mesh)
}

/// `count` points uniform over the mesh surface: triangles are drawn by
/// area, then `(1−√u)·A + √u(1−v)·B + √u·v·C`. Zero-area triangles are
/// never drawn.
pub fn sample_mesh(mesh: &Mesh, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Ok(PointCloud::default());
    }
    let areas: Vec<f64> = (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).collect();
    let pick = WeightedIndex::new(&areas).map_err(|_| Error::ZeroArea)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            let [a, b, c] = mesh.triangles[pick.sample(&mut rng)].map(|i| mesh.vertices[i]);
            let su = rng.random::<f64>().sqrt();
            let v = rng.random::<f64>();
            let (wa, wb, wc) = (1.0 - su, su * (1.0 - v), su * v);
            std::array::from_fn(|k| wa * a[k] + wb * b[k] + wc * c[k])
        })
        .collect();
    Ok(PointCloud::new(points))
}
