//! Edge-collapse simplification driven by quadrics over joint position and texture coordinates.
//!
//! Every distinct (position, uv) corner pair is a *wedge* with its own 5D quadric. A position
//! edge collapses only when the wedges of its endpoints can be matched one-to-one through the
//! shared faces (a full collapse with an optimized placement) or when one endpoint's wedges all
//! match into the other's (a half-edge collapse onto the endpoint that keeps the extra wedges,
//! which is how seam corners are preserved).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use nalgebra::{DMatrix, DVector, SMatrix, SVector};

use super::DistortionError;
use crate::asset::{cross, dot, norm, sub, Corner, IndexedMesh};

/// Floor of the face-count schedule: the last level lands near this many faces.
pub const MIN_FACES: usize = 2000;
pub const LEVELS: u8 = 10;

const BOUNDARY_WEIGHT: f64 = 100.0;
const UV_WEIGHT: f64 = 1.0;
const MIN_NORMAL_DOT: f64 = 0.2;

type M5 = SMatrix<f64, 5, 5>;
type V5 = SVector<f64, 5>;

#[derive(Clone, Copy)]
struct Quadric {
    a: M5,
    b: V5,
    c: f64,
}

impl Quadric {
    fn zero() -> Self {
        Self {
            a: M5::zeros(),
            b: V5::zeros(),
            c: 0.0,
        }
    }

    /// Squared distance to the plane of a triangle in 5D, area-weighted.
    fn from_triangle(p: [V5; 3], weight: f64) -> Option<Self> {
        let e1 = p[1] - p[0];
        let l1 = e1.norm();
        if l1 == 0.0 {
            return None;
        }
        let e1 = e1 / l1;
        let d2 = p[2] - p[0];
        let e2 = d2 - e1 * e1.dot(&d2);
        let l2 = e2.norm();
        if l2 <= 1e-14 {
            return None;
        }
        let e2 = e2 / l2;
        let a = M5::identity() - e1 * e1.transpose() - e2 * e2.transpose();
        let (pe1, pe2) = (p[0].dot(&e1), p[0].dot(&e2));
        let b = e1 * pe1 + e2 * pe2 - p[0];
        let c = p[0].dot(&p[0]) - pe1 * pe1 - pe2 * pe2;
        Some(Self {
            a: a * weight,
            b: b * weight,
            c: c * weight,
        })
    }

    /// Plane through a point with a 3D unit normal, position components only.
    fn from_plane(normal: [f64; 3], point: [f64; 3], weight: f64) -> Self {
        let mut q = Self::zero();
        let d = -dot(normal, point);
        for i in 0..3 {
            for j in 0..3 {
                q.a[(i, j)] = weight * normal[i] * normal[j];
            }
            q.b[i] = weight * d * normal[i];
        }
        q.c = weight * d * d;
        q
    }

    fn add(&mut self, o: &Quadric) {
        self.a += o.a;
        self.b += o.b;
        self.c += o.c;
    }

    fn eval(&self, v: &V5) -> f64 {
        (v.transpose() * self.a * v)[0] + 2.0 * self.b.dot(v) + self.c
    }
}

fn v5(p: [f64; 3], uv: [f64; 2]) -> V5 {
    V5::new(p[0], p[1], p[2], UV_WEIGHT * uv[0], UV_WEIGHT * uv[1])
}

struct Wedge {
    pos: u32,
    uv: [f64; 2],
    q: Quadric,
}

/// Working state. Positions are normalized so the bounding-box diagonal is 1.
struct Simplifier {
    pos: Vec<[f64; 3]>,
    original: Vec<[f64; 3]>,
    moved: Vec<bool>,
    version: Vec<u32>,
    pos_alive: Vec<bool>,
    pos_faces: Vec<Vec<u32>>,
    wedges: Vec<Wedge>,
    faces: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    live_faces: usize,
    center: [f64; 3],
    scale: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    a: u32,
    b: u32,
    va: u32,
    vb: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // Reversed so the max-heap pops the cheapest edge; ties go to the lowest vertex indices.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A resolved collapse: `remove` merges into `keep`, which moves to `target`.
struct Plan {
    keep: u32,
    remove: u32,
    target: [f64; 3],
    /// (wedge of `remove`, wedge of `keep`, new uv of the merged wedge).
    pairs: Vec<(u32, u32, [f64; 2])>,
    cost: f64,
}

impl Simplifier {
    fn new(mesh: &IndexedMesh) -> Self {
        let aabb = mesh.aabb().expect("non-empty mesh");
        let center = aabb.center();
        let diag = norm(aabb.extent());
        let scale = if diag > 0.0 { 1.0 / diag } else { 1.0 };

        // Weld exactly coincident positions and texture coordinates.
        let mut pos_ids: HashMap<[u64; 3], u32> = HashMap::new();
        let mut pos_remap = Vec::with_capacity(mesh.positions.len());
        let mut original = Vec::new();
        for p in &mesh.positions {
            let key = p.map(f64::to_bits);
            let next = original.len() as u32;
            let id = *pos_ids.entry(key).or_insert_with(|| {
                original.push(*p);
                next
            });
            pos_remap.push(id);
        }
        let mut uv_ids: HashMap<[u64; 2], u32> = HashMap::new();
        let mut uv_remap = Vec::with_capacity(mesh.uvs.len());
        let mut uv_values = Vec::new();
        for t in &mesh.uvs {
            let next = uv_values.len() as u32;
            let id = *uv_ids.entry(t.map(f64::to_bits)).or_insert_with(|| {
                uv_values.push(*t);
                next
            });
            uv_remap.push(id);
        }

        let pos: Vec<[f64; 3]> = original
            .iter()
            .map(|p| {
                let d = sub(*p, center);
                [d[0] * scale, d[1] * scale, d[2] * scale]
            })
            .collect();
        let n = pos.len();
        let mut s = Simplifier {
            pos,
            original,
            moved: vec![false; n],
            version: vec![0; n],
            pos_alive: vec![true; n],
            pos_faces: vec![Vec::new(); n],
            wedges: Vec::new(),
            faces: Vec::with_capacity(mesh.triangles.len()),
            face_alive: Vec::with_capacity(mesh.triangles.len()),
            live_faces: 0,
            center,
            scale,
        };

        let mut wedge_ids: HashMap<(u32, u32), u32> = HashMap::new();
        for tri in &mesh.triangles {
            let corners = tri.map(|c| (pos_remap[c.position as usize], uv_remap[c.uv.unwrap() as usize]));
            if corners[0].0 == corners[1].0 || corners[1].0 == corners[2].0 || corners[0].0 == corners[2].0 {
                continue;
            }
            let w = corners.map(|(p, t)| {
                *wedge_ids.entry((p, t)).or_insert_with(|| {
                    s.wedges.push(Wedge {
                        pos: p,
                        uv: uv_values[t as usize],
                        q: Quadric::zero(),
                    });
                    s.wedges.len() as u32 - 1
                })
            });
            let f = s.faces.len() as u32;
            s.faces.push(w);
            s.face_alive.push(true);
            s.live_faces += 1;
            for (p, _) in corners {
                s.pos_faces[p as usize].push(f);
            }
        }
        s.build_quadrics();
        s
    }

    fn face_pos(&self, f: usize) -> [u32; 3] {
        self.faces[f].map(|w| self.wedges[w as usize].pos)
    }

    fn build_quadrics(&mut self) {
        let mut edge_faces: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for f in 0..self.faces.len() {
            let w = self.faces[f];
            let p = self.face_pos(f);
            let pts = [0, 1, 2].map(|i| v5(self.pos[p[i] as usize], self.wedges[w[i] as usize].uv));
            let area = 0.5 * norm(cross(
                sub(self.pos[p[1] as usize], self.pos[p[0] as usize]),
                sub(self.pos[p[2] as usize], self.pos[p[0] as usize]),
            ));
            if let Some(q) = Quadric::from_triangle(pts, area) {
                for &wi in &w {
                    self.wedges[wi as usize].q.add(&q);
                }
            }
            for i in 0..3 {
                let (a, b) = (p[i], p[(i + 1) % 3]);
                edge_faces.entry((a.min(b), a.max(b))).or_default().push(f as u32);
            }
        }
        // Boundary and seam edges get a penalty plane perpendicular to each adjacent face.
        let mut edges: Vec<_> = edge_faces.into_iter().collect();
        edges.sort_unstable_by_key(|(k, _)| *k);
        for ((a, b), fs) in edges {
            let constrained = match fs.as_slice() {
                [_] => true,
                [f, g] => self.edge_wedges(*f as usize, a, b) != self.edge_wedges(*g as usize, a, b),
                _ => false,
            };
            if !constrained {
                continue;
            }
            let (pa, pb) = (self.pos[a as usize], self.pos[b as usize]);
            let e = sub(pb, pa);
            let len2 = dot(e, e);
            for &f in &fs {
                let n = self.face_normal(f as usize);
                let m = cross(e, n);
                let l = norm(m);
                if l == 0.0 {
                    continue;
                }
                let q = Quadric::from_plane([m[0] / l, m[1] / l, m[2] / l], pa, BOUNDARY_WEIGHT * len2);
                for wi in self.faces[f as usize] {
                    let wp = self.wedges[wi as usize].pos;
                    if wp == a || wp == b {
                        self.wedges[wi as usize].q.add(&q);
                    }
                }
            }
        }
    }

    /// The wedges face `f` uses at positions `a` and `b`.
    fn edge_wedges(&self, f: usize, a: u32, b: u32) -> (u32, u32) {
        let mut out = (u32::MAX, u32::MAX);
        for &w in &self.faces[f] {
            let p = self.wedges[w as usize].pos;
            if p == a {
                out.0 = w;
            } else if p == b {
                out.1 = w;
            }
        }
        out
    }

    fn face_normal(&self, f: usize) -> [f64; 3] {
        let p = self.face_pos(f).map(|i| self.pos[i as usize]);
        let n = cross(sub(p[1], p[0]), sub(p[2], p[0]));
        let l = norm(n);
        if l > 0.0 {
            [n[0] / l, n[1] / l, n[2] / l]
        } else {
            n
        }
    }

    fn live_faces_of(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.pos_faces[v as usize]
            .iter()
            .copied()
            .filter(|&f| self.face_alive[f as usize])
    }

    fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .live_faces_of(v)
            .flat_map(|f| self.face_pos(f as usize))
            .filter(|&p| p != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn is_boundary_edge(&self, a: u32, b: u32) -> bool {
        self.live_faces_of(a)
            .filter(|&f| self.face_pos(f as usize).contains(&b))
            .count()
            == 1
    }

    fn is_boundary_vertex(&self, v: u32) -> bool {
        self.neighbors(v).into_iter().any(|n| self.is_boundary_edge(v, n))
    }

    fn plan(&self, a: u32, b: u32) -> Option<Plan> {
        let shared: Vec<u32> = self
            .live_faces_of(a)
            .filter(|&f| self.face_pos(f as usize).contains(&b))
            .collect();
        if shared.is_empty() || shared.len() > 2 {
            return None;
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for &f in &shared {
            let (wa, wb) = self.edge_wedges(f as usize, a, b);
            if !pairs.contains(&(wa, wb)) {
                pairs.push((wa, wb));
            }
        }
        // Each wedge may be matched at most once.
        for (i, p) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|q| q.0 == p.0 || q.1 == p.1) {
                return None;
            }
        }
        let live_wedges = |v: u32| -> Vec<u32> {
            let mut ws: Vec<u32> = self
                .live_faces_of(v)
                .flat_map(|f| self.faces[f as usize])
                .filter(|&w| self.wedges[w as usize].pos == v)
                .collect();
            ws.sort_unstable();
            ws.dedup();
            ws
        };
        let (wa, wb) = (live_wedges(a), live_wedges(b));
        let a_full = wa.iter().all(|w| pairs.iter().any(|p| p.0 == *w));
        let b_full = wb.iter().all(|w| pairs.iter().any(|p| p.1 == *w));

        let plan = if a_full && b_full {
            let (keep, remove) = (a.min(b), a.max(b));
            let oriented: Vec<(u32, u32)> = pairs
                .iter()
                .map(|&(x, y)| if keep == a { (y, x) } else { (x, y) })
                .collect();
            self.full_collapse(keep, remove, &oriented)
        } else if a_full {
            self.half_collapse(b, a, pairs)
        } else if b_full {
            self.half_collapse(a, b, pairs.iter().map(|&(x, y)| (y, x)).collect())
        } else {
            return None;
        };
        Some(plan)
    }

    /// `pairs` are (wedge of remove, wedge of keep).
    fn half_collapse(&self, keep: u32, remove: u32, pairs: Vec<(u32, u32)>) -> Plan {
        let target = self.pos[keep as usize];
        let mut cost = 0.0;
        let pairs = pairs
            .into_iter()
            .map(|(r, k)| {
                let uv = self.wedges[k as usize].uv;
                let mut q = self.wedges[r as usize].q;
                q.add(&self.wedges[k as usize].q);
                cost += q.eval(&v5(target, uv));
                (r, k, uv)
            })
            .collect();
        Plan {
            keep,
            remove,
            target,
            pairs,
            cost,
        }
    }

    fn full_collapse(&self, keep: u32, remove: u32, pairs: &[(u32, u32)]) -> Plan {
        let quads: Vec<Quadric> = pairs
            .iter()
            .map(|&(r, k)| {
                let mut q = self.wedges[r as usize].q;
                q.add(&self.wedges[k as usize].q);
                q
            })
            .collect();
        let total = |p: [f64; 3], uvs: &[[f64; 2]]| -> f64 {
            quads.iter().zip(uvs).map(|(q, uv)| q.eval(&v5(p, *uv))).sum()
        };
        let (pk, pr) = (self.pos[keep as usize], self.pos[remove as usize]);
        let uv_k: Vec<[f64; 2]> = pairs.iter().map(|&(_, k)| self.wedges[k as usize].uv).collect();
        let uv_r: Vec<[f64; 2]> = pairs.iter().map(|&(r, _)| self.wedges[r as usize].uv).collect();
        let mid = [0.5 * (pk[0] + pr[0]), 0.5 * (pk[1] + pr[1]), 0.5 * (pk[2] + pr[2])];
        let uv_mid: Vec<[f64; 2]> = uv_k
            .iter()
            .zip(&uv_r)
            .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
            .collect();

        let mut candidates = vec![(pk, uv_k), (pr, uv_r), (mid, uv_mid)];
        if let Some(opt) = solve_placement(&quads) {
            let edge = norm(sub(pk, pr));
            if norm(sub(opt.0, mid)) <= 2.0 * edge {
                candidates.insert(0, opt);
            }
        }
        let (target, uvs, cost) = candidates
            .into_iter()
            .map(|(p, uv)| {
                let c = total(p, &uv);
                (p, uv, c)
            })
            .min_by(|x, y| x.2.total_cmp(&y.2))
            .unwrap();
        Plan {
            keep,
            remove,
            target,
            pairs: pairs.iter().zip(uvs).map(|(&(r, k), uv)| (r, k, uv)).collect(),
            cost,
        }
    }

    fn valid(&self, plan: &Plan) -> bool {
        let (k, r) = (plan.keep, plan.remove);
        // Link condition: common neighbors are exactly the opposite corners of shared faces.
        let nk = self.neighbors(k);
        let nr = self.neighbors(r);
        let common = nk.iter().filter(|v| nr.binary_search(v).is_ok()).count();
        let shared: Vec<u32> = self
            .live_faces_of(k)
            .filter(|&f| self.face_pos(f as usize).contains(&r))
            .collect();
        if common != shared.len() {
            return false;
        }
        if !self.is_boundary_edge(k, r) && self.is_boundary_vertex(k) && self.is_boundary_vertex(r) {
            return false;
        }
        let uv_after = |w: u32| -> [f64; 2] {
            plan.pairs
                .iter()
                .find(|p| p.0 == w || p.1 == w)
                .map(|p| p.2)
                .unwrap_or(self.wedges[w as usize].uv)
        };
        for v in [k, r] {
            for f in self.live_faces_of(v) {
                if shared.contains(&f) {
                    continue;
                }
                let ws = self.faces[f as usize];
                let ps = self.face_pos(f as usize);
                let before = ps.map(|p| self.pos[p as usize]);
                let after = ps.map(|p| if p == k || p == r { plan.target } else { self.pos[p as usize] });
                let n0 = cross(sub(before[1], before[0]), sub(before[2], before[0]));
                let n1 = cross(sub(after[1], after[0]), sub(after[2], after[0]));
                let (l0, l1) = (norm(n0), norm(n1));
                if l1 <= 1e-14 * l0.max(1e-300) || l1 == 0.0 {
                    return false;
                }
                if l0 > 0.0 && dot(n0, n1) / (l0 * l1) < MIN_NORMAL_DOT {
                    return false;
                }
                let t0 = ws.map(|w| self.wedges[w as usize].uv);
                let t1 = ws.map(uv_after);
                if uv_area(t0) * uv_area(t1) < 0.0 || (uv_area(t0) != 0.0 && uv_area(t1) == 0.0) {
                    return false;
                }
            }
        }
        true
    }

    fn apply(&mut self, plan: &Plan) {
        let (k, r) = (plan.keep, plan.remove);
        let redirect: HashMap<u32, u32> = plan.pairs.iter().map(|&(wr, wk, _)| (wr, wk)).collect();
        for &(wr, wk, uv) in &plan.pairs {
            let q = self.wedges[wr as usize].q;
            self.wedges[wk as usize].q.add(&q);
            self.wedges[wk as usize].uv = uv;
        }
        let faces_r: Vec<u32> = self.live_faces_of(r).collect();
        for f in faces_r {
            let fi = f as usize;
            if self.face_pos(fi).contains(&k) {
                self.face_alive[fi] = false;
                self.live_faces -= 1;
                continue;
            }
            for w in self.faces[fi].iter_mut() {
                if let Some(&nw) = redirect.get(w) {
                    *w = nw;
                }
            }
            self.pos_faces[k as usize].push(f);
        }
        let alive = &self.face_alive;
        self.pos_faces[k as usize].retain(|&f| alive[f as usize]);
        self.pos_faces[r as usize].clear();
        self.pos_alive[r as usize] = false;
        if plan.target != self.pos[k as usize] {
            self.pos[k as usize] = plan.target;
            self.moved[k as usize] = true;
        }
        self.version[k as usize] += 1;
        self.version[r as usize] += 1;
    }

    fn push_edges(&self, v: u32, heap: &mut BinaryHeap<HeapEntry>) {
        for n in self.neighbors(v) {
            let (a, b) = (v.min(n), v.max(n));
            if let Some(p) = self.plan(a, b) {
                heap.push(HeapEntry {
                    cost: p.cost,
                    a,
                    b,
                    va: self.version[a as usize],
                    vb: self.version[b as usize],
                });
            }
        }
    }

    fn snapshot(&self, name: &str) -> IndexedMesh {
        let mut pos_map: HashMap<u32, u32> = HashMap::new();
        let mut wedge_map: HashMap<u32, u32> = HashMap::new();
        let mut positions = Vec::new();
        let mut uvs = Vec::new();
        let mut triangles = Vec::with_capacity(self.live_faces);
        for (f, w) in self.faces.iter().enumerate() {
            if !self.face_alive[f] {
                continue;
            }
            let tri = w.map(|wi| {
                let p = self.wedges[wi as usize].pos;
                let pi = *pos_map.entry(p).or_insert_with(|| {
                    positions.push(self.output_position(p));
                    positions.len() as u32 - 1
                });
                let ti = *wedge_map.entry(wi).or_insert_with(|| {
                    uvs.push(self.wedges[wi as usize].uv);
                    uvs.len() as u32 - 1
                });
                Corner::new(pi, ti)
            });
            triangles.push(tri);
        }
        IndexedMesh {
            name: name.to_owned(),
            positions,
            uvs,
            triangles,
            ..Default::default()
        }
    }

    fn output_position(&self, p: u32) -> [f64; 3] {
        if !self.moved[p as usize] {
            return self.original[p as usize];
        }
        let q = self.pos[p as usize];
        [
            q[0] / self.scale + self.center[0],
            q[1] / self.scale + self.center[1],
            q[2] / self.scale + self.center[2],
        ]
    }
}

fn uv_area(t: [[f64; 2]; 3]) -> f64 {
    (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])
}

/// Minimizes `Σ_i Q_i(p, uv_i)` over a shared position and one uv per quadric.
fn solve_placement(quads: &[Quadric]) -> Option<([f64; 3], Vec<[f64; 2]>)> {
    let n = 3 + 2 * quads.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, q) in quads.iter().enumerate() {
        let o = 3 + 2 * i;
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] += q.a[(r, c)];
            }
            for c in 0..2 {
                m[(r, o + c)] = q.a[(r, 3 + c)];
                m[(o + c, r)] = q.a[(3 + c, r)];
            }
            rhs[r] -= q.b[r];
        }
        for r in 0..2 {
            for c in 0..2 {
                m[(o + r, o + c)] = q.a[(3 + r, 3 + c)];
            }
            rhs[o + r] = -q.b[3 + r];
        }
    }
    let scale = m.amax();
    if scale == 0.0 {
        return None;
    }
    let lu = m.clone().lu();
    let x = lu.solve(&rhs)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    // Reject near-singular systems through the residual.
    let resid = (&m * &x - &rhs).amax();
    if resid > 1e-8 * (scale + rhs.amax()) {
        return None;
    }
    let p = [x[0], x[1], x[2]];
    let uvs = (0..quads.len())
        .map(|i| {
            let o = 3 + 2 * i;
            [
                (x[o] / UV_WEIGHT).clamp(0.0, 1.0),
                (x[o + 1] / UV_WEIGHT).clamp(0.0, 1.0),
            ]
        })
        .collect();
    Some((p, uvs))
}

/// Face count targeted at level `lod` (1-based) for a source with `faces0` faces.
pub fn target_faces(faces0: usize, lod: u8) -> usize {
    let delta = (faces0 as f64 - MIN_FACES as f64) / LEVELS as f64;
    (faces0 as f64 - lod as f64 * delta).round() as usize
}

fn check_input(mesh: &IndexedMesh) -> Result<(), DistortionError> {
    if !mesh.has_uvs() {
        return Err(DistortionError::NoUVs);
    }
    if mesh.face_count() <= MIN_FACES {
        return Err(DistortionError::TooFewFaces {
            faces: mesh.face_count(),
        });
    }
    if !mesh.validate().out_of_range.is_empty() {
        return Err(DistortionError::InvalidMesh);
    }
    Ok(())
}

/// Simplifies to the face-count target of level `lod` in `1..=10`.
pub fn simplify_qem(mesh: &IndexedMesh, lod: u8) -> Result<IndexedMesh, DistortionError> {
    let mut levels = run(mesh, lod)?;
    Ok(levels.pop().expect("at least one level"))
}

/// All ten levels from a single collapse sequence; entry `k` is level `k + 1`.
pub fn simplify_levels(mesh: &IndexedMesh) -> Result<Vec<IndexedMesh>, DistortionError> {
    run(mesh, LEVELS)
}

fn run(mesh: &IndexedMesh, up_to: u8) -> Result<Vec<IndexedMesh>, DistortionError> {
    if !(1..=LEVELS).contains(&up_to) {
        return Err(DistortionError::InvalidLevel(format!("L{up_to}")));
    }
    check_input(mesh)?;
    let faces0 = mesh.face_count();
    let mut s = Simplifier::new(mesh);
    let mut heap = BinaryHeap::new();
    for v in 0..s.pos.len() as u32 {
        for n in s.neighbors(v) {
            if n > v {
                if let Some(p) = s.plan(v, n) {
                    heap.push(HeapEntry {
                        cost: p.cost,
                        a: v,
                        b: n,
                        va: 0,
                        vb: 0,
                    });
                }
            }
        }
    }
    let mut out = Vec::with_capacity(up_to as usize);
    for lod in 1..=up_to {
        let target = target_faces(faces0, lod);
        while s.live_faces > target {
            let Some(e) = heap.pop() else { break };
            if !s.pos_alive[e.a as usize]
                || !s.pos_alive[e.b as usize]
                || s.version[e.a as usize] != e.va
                || s.version[e.b as usize] != e.vb
            {
                continue;
            }
            let Some(plan) = s.plan(e.a, e.b) else { continue };
            if !s.valid(&plan) {
                continue;
            }
            s.apply(&plan);
            s.push_edges(plan.keep, &mut heap);
        }
        let reached = s.live_faces;
        if (reached as f64 - target as f64).abs() > 0.01 * target as f64 {
            return Err(DistortionError::TargetUnreachable { target, reached });
        }
        out.push(s.snapshot(&mesh.name));
    }
    Ok(out)
}
