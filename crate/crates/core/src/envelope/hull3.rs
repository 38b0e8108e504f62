//! Quickhull in three dimensions over exact orientation predicates.
//!
//! Only strictly-outside points (negative `orient3d`) are ever added, so
//! coplanar and collinear input, which grid-aligned rate fields produce in
//! bulk, never creates inconsistent topology. Adjacent coplanar triangles are
//! left as they are; callers only evaluate the facet planes.

use std::collections::HashMap;

use robust::{orient2d, orient3d, Coord, Coord3D};

pub(crate) type Point3 = [f64; 3];

#[inline]
fn c3(p: &Point3) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

#[inline]
pub(crate) fn c2(x: f64, y: f64) -> Coord<f64> {
    Coord { x, y }
}

/// Why no three-dimensional hull exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Degeneracy {
    /// Fewer than two distinct points.
    Point,
    /// All points on one line.
    Collinear,
    /// All points on one plane.
    Coplanar,
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    /// `nbr[k]` shares the edge `v[k] -> v[k+1]`.
    nbr: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
    normal: [f64; 3],
    offset: f64,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let normal = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        let offset = normal[0] * a[0] + normal[1] * a[1] + normal[2] * a[2];
        Self {
            v,
            nbr: [usize::MAX; 3],
            outside: Vec::new(),
            alive: true,
            normal,
            offset,
        }
    }

    /// Approximate signed height, used only to pick the farthest point.
    fn height(&self, p: &Point3) -> f64 {
        self.normal[0] * p[0] + self.normal[1] * p[1] + self.normal[2] * p[2] - self.offset
    }
}

/// Exact test: `d` lies strictly on the outer side of the face.
#[inline]
fn sees(points: &[Point3], v: &[usize; 3], d: usize) -> bool {
    orient3d(c3(&points[v[0]]), c3(&points[v[1]]), c3(&points[v[2]]), c3(&points[d])) < 0.0
}

fn exactly_collinear(a: &Point3, b: &Point3, c: &Point3) -> bool {
    orient2d(c2(a[0], a[1]), c2(b[0], b[1]), c2(c[0], c[1])) == 0.0
        && orient2d(c2(a[1], a[2]), c2(b[1], b[2]), c2(c[1], c[2])) == 0.0
        && orient2d(c2(a[0], a[2]), c2(b[0], b[2]), c2(c[0], c[2])) == 0.0
}

fn initial_simplex(points: &[Point3]) -> Result<[usize; 4], Degeneracy> {
    let i0 = (0..points.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (points[a], points[b]);
            pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1])).then(pa[2].total_cmp(&pb[2]))
        })
        .ok_or(Degeneracy::Point)?;
    let p0 = points[i0];
    let dist2 = |p: &Point3| (0..3).map(|k| (p[k] - p0[k]).powi(2)).sum::<f64>();
    let i1 = (0..points.len())
        .max_by(|&a, &b| dist2(&points[a]).total_cmp(&dist2(&points[b])).then(b.cmp(&a)))
        .ok_or(Degeneracy::Point)?;
    if points[i1] == p0 {
        return Err(Degeneracy::Point);
    }
    let p1 = points[i1];

    let area2 = |p: &Point3| {
        let u = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
        let w = [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]];
        let c = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
    };
    let mut i2 = (0..points.len())
        .max_by(|&a, &b| area2(&points[a]).total_cmp(&area2(&points[b])).then(b.cmp(&a)))
        .ok_or(Degeneracy::Collinear)?;
    if exactly_collinear(&p0, &p1, &points[i2]) {
        // the float area can mislead on nearly collinear input; fall back to
        // the first exactly non-collinear point
        i2 = (0..points.len())
            .find(|&k| !exactly_collinear(&p0, &p1, &points[k]))
            .ok_or(Degeneracy::Collinear)?;
    }
    let p2 = points[i2];

    let vol = |p: &Point3| orient3d(c3(&p0), c3(&p1), c3(&p2), c3(p)).abs();
    let i3 = (0..points.len())
        .max_by(|&a, &b| vol(&points[a]).total_cmp(&vol(&points[b])).then(b.cmp(&a)))
        .ok_or(Degeneracy::Coplanar)?;
    if vol(&points[i3]) == 0.0 {
        return Err(Degeneracy::Coplanar);
    }
    Ok([i0, i1, i2, i3])
}

fn link_edges(faces: &mut [Face], ids: &[usize]) {
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for &f in ids {
        for k in 0..3 {
            edges.insert((faces[f].v[k], faces[f].v[(k + 1) % 3]), (f, k));
        }
    }
    for &f in ids {
        for k in 0..3 {
            let (a, b) = (faces[f].v[k], faces[f].v[(k + 1) % 3]);
            if let Some(&(g, _)) = edges.get(&(b, a)) {
                faces[f].nbr[k] = g;
            }
        }
    }
}

/// Triangulated convex hull of `points`; every triangle is counterclockwise
/// seen from outside. Duplicate points are tolerated.
pub(crate) fn convex_hull_3d(points: &[Point3]) -> Result<Vec<[usize; 3]>, Degeneracy> {
    let simplex = initial_simplex(points)?;
    let mut faces: Vec<Face> = Vec::new();
    for skip in 0..4 {
        let mut tri = [0usize; 3];
        let mut k = 0;
        for (s, &idx) in simplex.iter().enumerate() {
            if s != skip {
                tri[k] = idx;
                k += 1;
            }
        }
        let opposite = simplex[skip];
        // the opposite vertex must be strictly inside
        if sees(points, &tri, opposite) {
            tri.swap(1, 2);
        }
        faces.push(Face::new(points, tri));
    }
    link_edges(&mut faces, &[0, 1, 2, 3]);

    for idx in 0..points.len() {
        if simplex.contains(&idx) {
            continue;
        }
        if let Some(f) = (0..4).find(|&f| sees(points, &faces[f].v, idx)) {
            faces[f].outside.push(idx);
        }
    }

    let mut stack: Vec<usize> = (0..4).filter(|&f| !faces[f].outside.is_empty()).collect();
    // 0 = unvisited, epoch = visible, epoch + 1 = hidden
    let mut mark: Vec<u64> = vec![0; faces.len()];
    let mut epoch: u64 = 1;
    let mut visible: Vec<usize> = Vec::new();
    let mut horizon: Vec<(usize, usize, usize)> = Vec::new();

    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = {
            let face = &faces[fi];
            *face
                .outside
                .iter()
                .max_by(|&&a, &&b| face.height(&points[a]).total_cmp(&face.height(&points[b])).then(b.cmp(&a)))
                .expect("non-empty outside set")
        };

        epoch += 2;
        mark.resize(faces.len(), 0);
        visible.clear();
        horizon.clear();
        mark[fi] = epoch;
        visible.push(fi);
        let mut cursor = 0;
        while cursor < visible.len() {
            let g = visible[cursor];
            cursor += 1;
            for k in 0..3 {
                let n = faces[g].nbr[k];
                if mark[n] == epoch {
                    continue;
                }
                if mark[n] != epoch + 1 {
                    if sees(points, &faces[n].v, eye) {
                        mark[n] = epoch;
                        visible.push(n);
                        continue;
                    }
                    mark[n] = epoch + 1;
                }
                horizon.push((faces[g].v[k], faces[g].v[(k + 1) % 3], n));
            }
        }

        let first_new = faces.len();
        let mut starts: HashMap<usize, usize> = HashMap::with_capacity(horizon.len());
        let mut ends: HashMap<usize, usize> = HashMap::with_capacity(horizon.len());
        for (offset, &(a, b, n)) in horizon.iter().enumerate() {
            let nf = first_new + offset;
            let mut face = Face::new(points, [a, b, eye]);
            face.nbr[0] = n;
            let slot = (0..3)
                .find(|&k| faces[n].v[k] == b && faces[n].v[(k + 1) % 3] == a)
                .expect("horizon neighbour shares the edge");
            faces[n].nbr[slot] = nf;
            starts.insert(a, nf);
            ends.insert(b, nf);
            faces.push(face);
        }
        for nf in first_new..faces.len() {
            let [a, b, _] = faces[nf].v;
            faces[nf].nbr[1] = starts[&b];
            faces[nf].nbr[2] = ends[&a];
        }

        let mut orphans: Vec<usize> = Vec::new();
        for &g in &visible {
            faces[g].alive = false;
            orphans.append(&mut faces[g].outside);
        }
        for idx in orphans {
            if idx == eye {
                continue;
            }
            if let Some(nf) = (first_new..faces.len()).find(|&nf| sees(points, &faces[nf].v, idx)) {
                faces[nf].outside.push(idx);
            }
        }
        for nf in first_new..faces.len() {
            if !faces[nf].outside.is_empty() {
                stack.push(nf);
            }
        }
    }

    Ok(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

/// Hull triangles whose outward normal points to `+z`, i.e. whose projection
/// onto the first two coordinates is counterclockwise.
pub(crate) fn upper_faces(points: &[Point3], faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    faces
        .iter()
        .copied()
        .filter(|v| {
            let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
            orient2d(c2(a[0], a[1]), c2(b[0], b[1]), c2(c[0], c[1])) > 0.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_closed_and_convex(points: &[Point3], faces: &[[usize; 3]]) {
        // each directed edge appears once and its reverse once
        let mut edges = HashMap::new();
        for f in faces {
            for k in 0..3 {
                assert!(edges.insert((f[k], f[(k + 1) % 3]), ()).is_none(), "duplicate directed edge");
            }
        }
        for &(a, b) in edges.keys() {
            assert!(edges.contains_key(&(b, a)), "open edge {a}->{b}");
        }
        // no point strictly outside any face
        for f in faces {
            for idx in 0..points.len() {
                assert!(!sees(points, f, idx), "point {idx} outside face {f:?}");
            }
        }
    }

    #[test]
    fn cube_corners_and_interior() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push([x, y, z]);
                }
            }
        }
        pts.push([0.5, 0.5, 0.5]);
        pts.push([0.5, 0.5, 1.0]);
        let faces = convex_hull_3d(&pts).unwrap();
        check_closed_and_convex(&pts, &faces);
        assert_eq!(faces.len(), 12);
        assert_eq!(upper_faces(&pts, &faces).len(), 2);
    }

    #[test]
    fn random_clouds_are_closed_and_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Point3> = (0..200).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            let faces = convex_hull_3d(&pts).unwrap();
            check_closed_and_convex(&pts, &faces);
        }
    }

    #[test]
    fn grid_with_repeated_heights() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        for i in 0..15 {
            for j in 0..15 {
                pts.push([i as f64, j as f64, rng.gen_range(0..3) as f64]);
            }
        }
        let faces = convex_hull_3d(&pts).unwrap();
        check_closed_and_convex(&pts, &faces);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(convex_hull_3d(&[]), Err(Degeneracy::Point));
        assert_eq!(convex_hull_3d(&[[1.0, 2.0, 3.0]; 4]), Err(Degeneracy::Point));
        let line: Vec<Point3> = (0..5).map(|k| [k as f64, 2.0 * k as f64, 1.0]).collect();
        assert_eq!(convex_hull_3d(&line), Err(Degeneracy::Collinear));
        let plane: Vec<Point3> = (0..9).map(|k| [(k % 3) as f64, (k / 3) as f64, 0.5]).collect();
        assert_eq!(convex_hull_3d(&plane), Err(Degeneracy::Coplanar));
    }
}
