use serde::{Deserialize, Serialize};

/// One triangle corner: a position index and an optional texture-coordinate index.
///
/// `uv == None` is the "no-UV" marker produced for OBJ faces written without `vt` references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corner {
    pub position: u32,
    pub uv: Option<u32>,
}

impl Corner {
    pub fn new(position: u32, uv: u32) -> Self {
        Self {
            position,
            uv: Some(uv),
        }
    }

    pub fn without_uv(position: u32) -> Self {
        Self { position, uv: None }
    }
}

/// Triangle mesh with separately indexed positions and texture coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexedMesh {
    pub name: String,
    pub positions: Vec<[f64; 3]>,
    pub uvs: Vec<[f64; 2]>,
    pub triangles: Vec<[Corner; 3]>,
    /// Texture wrap mode declared for this mesh. UVs outside `[0,1]` are only valid when set.
    pub uv_wrap: bool,
    pub material_libraries: Vec<String>,
    pub material: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    /// Triangles referencing a position or UV that does not exist.
    pub out_of_range: Vec<usize>,
    pub zero_area: Vec<usize>,
    pub missing_uv: Vec<usize>,
    /// UV indices lying outside the unit square while wrapping is not declared.
    pub uv_out_of_unit: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.out_of_range.is_empty() && self.uv_out_of_unit.is_empty()
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn extent(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn longest_extent(&self) -> f64 {
        let e = self.extent();
        e[0].max(e[1]).max(e[2])
    }

    pub fn center(&self) -> [f64; 3] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }
}

impl IndexedMesh {
    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// True when every corner of every triangle carries a texture coordinate.
    pub fn has_uvs(&self) -> bool {
        !self.triangles.is_empty()
            && self
                .triangles
                .iter()
                .all(|t| t.iter().all(|c| c.uv.is_some()))
    }

    pub fn aabb(&self) -> Option<Aabb> {
        let first = *self.positions.first()?;
        let mut b = Aabb {
            min: first,
            max: first,
        };
        for p in &self.positions {
            for ((lo, hi), &v) in b.min.iter_mut().zip(b.max.iter_mut()).zip(p) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Some(b)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|c| self.positions[c.position as usize]);
        let u = sub(b, a);
        let v = sub(c, a);
        0.5 * norm(cross(u, v))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let np = self.positions.len();
        let nt = self.uvs.len();
        for (i, tri) in self.triangles.iter().enumerate() {
            let mut bad = false;
            let mut missing = false;
            let mut outside = false;
            for c in tri {
                if c.position as usize >= np {
                    bad = true;
                }
                match c.uv {
                    None => missing = true,
                    Some(u) if u as usize >= nt => bad = true,
                    Some(u) => {
                        let uv = self.uvs[u as usize];
                        let inside = uv.iter().all(|x| (0.0..=1.0).contains(x));
                        if !self.uv_wrap && !inside {
                            outside = true;
                        }
                    }
                }
            }
            if bad {
                report.out_of_range.push(i);
                continue;
            }
            if missing {
                report.missing_uv.push(i);
            }
            if outside {
                report.uv_out_of_unit.push(i);
            }
            if self.triangle_area(i) == 0.0 {
                report.zero_area.push(i);
            }
        }
        report
    }

    /// Drops positions and UVs no triangle references, preserving first-use order.
    pub fn compact(&self) -> IndexedMesh {
        let mut pos_map = vec![u32::MAX; self.positions.len()];
        let mut uv_map = vec![u32::MAX; self.uvs.len()];
        let mut positions = Vec::new();
        let mut uvs = Vec::new();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for tri in &self.triangles {
            let mut out = *tri;
            for c in out.iter_mut() {
                let p = c.position as usize;
                if pos_map[p] == u32::MAX {
                    pos_map[p] = positions.len() as u32;
                    positions.push(self.positions[p]);
                }
                c.position = pos_map[p];
                if let Some(u) = c.uv {
                    let u = u as usize;
                    if uv_map[u] == u32::MAX {
                        uv_map[u] = uvs.len() as u32;
                        uvs.push(self.uvs[u]);
                    }
                    c.uv = Some(uv_map[u]);
                }
            }
            triangles.push(out);
        }
        IndexedMesh {
            name: self.name.clone(),
            positions,
            uvs,
            triangles,
            uv_wrap: self.uv_wrap,
            material_libraries: self.material_libraries.clone(),
            material: self.material.clone(),
        }
    }

    /// Area-weighted per-position normals (unnormalized face cross products summed).
    pub fn vertex_normals(&self) -> Vec<[f64; 3]> {
        let mut normals = vec![[0.0; 3]; self.positions.len()];
        for tri in &self.triangles {
            let [a, b, c] = tri.map(|c| c.position as usize);
            let n = cross(
                sub(self.positions[b], self.positions[a]),
                sub(self.positions[c], self.positions[a]),
            );
            for i in [a, b, c] {
                for k in 0..3 {
                    normals[i][k] += n[k];
                }
            }
        }
        for n in normals.iter_mut() {
            let l = norm(*n);
            if l > 0.0 {
                *n = [n[0] / l, n[1] / l, n[2] / l];
            }
        }
        normals
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
