use std::collections::HashMap;

use robust::orient2d;

use super::hull3::{c2, convex_hull_3d, upper_faces, Degeneracy, Point3};
use super::one_d::envelope_into;
use crate::error::{Error, Result};
use crate::model::ExtendedReal;

/// Axis-aligned rectangle `[u_min, u_max] x [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        if !(u_min <= u_max && v_min <= v_max) {
            return Err(Error::domain("rectangle bounds are inverted or NaN"));
        }
        Ok(Self { u_min, u_max, v_min, v_max })
    }

    pub fn unit() -> Self {
        Self { u_min: 0.0, u_max: 1.0, v_min: 0.0, v_max: 1.0 }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.u_min..=self.u_max).contains(&u) && (self.v_min..=self.v_max).contains(&v)
    }
}

/// Finite samples `(u, v, rho)` of a function on a planar rectangle.
/// `Bottom` samples are simply absent.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud2D {
    points: Vec<(f64, f64, f64)>,
    domain: Rect,
}

impl PointCloud2D {
    pub fn new(points: Vec<(f64, f64, f64)>, domain: Rect) -> Result<Self> {
        for &(u, v, r) in &points {
            if !domain.contains(u, v) {
                return Err(Error::domain(format!("cloud point ({u}, {v}) outside its domain")));
            }
            if !r.is_finite() {
                return Err(Error::domain("cloud values must be finite"));
            }
        }
        Ok(Self { points, domain })
    }

    /// Cloud from a tensor grid `values[iu * vs.len() + iv]`, dropping `Bottom`.
    pub fn from_grid(us: &[f64], vs: &[f64], values: &[ExtendedReal]) -> Result<Self> {
        if values.len() != us.len() * vs.len() || us.is_empty() || vs.is_empty() {
            return Err(Error::domain("grid value count does not match the axes"));
        }
        let (umin, umax) = min_max(us);
        let (vmin, vmax) = min_max(vs);
        let points = us
            .iter()
            .enumerate()
            .flat_map(|(iu, &u)| {
                vs.iter()
                    .enumerate()
                    .filter_map(move |(iv, &v)| values[iu * vs.len() + iv].finite().map(|r| (u, v, r)))
            })
            .collect();
        Self::new(points, Rect::new(umin, umax, vmin, vmax)?)
    }

    pub fn points(&self) -> &[(f64, f64, f64)] {
        &self.points
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Least concave function on the plane majorizing every cloud point,
/// evaluated at `queries`. Queries outside the convex hull of the cloud's
/// `(u, v)` projections are `Bottom`.
pub fn upper_concave_envelope_2d(cloud: &PointCloud2D, queries: &[(f64, f64)]) -> Vec<ExtendedReal> {
    envelope_points(&cloud.points, queries)
}

/// Same envelope on the integer lattice `nu x nv`, with values laid out
/// `values[iu * nv + iv]`. Index coordinates are exact, and the envelope is
/// invariant under the affine map back to physical coordinates.
pub(crate) fn envelope_on_lattice(nu: usize, nv: usize, values: &[ExtendedReal]) -> Vec<ExtendedReal> {
    debug_assert_eq!(values.len(), nu * nv);
    let mut points = Vec::new();
    for iu in 0..nu {
        for iv in 0..nv {
            if let Some(r) = values[iu * nv + iv].finite() {
                points.push((iu as f64, iv as f64, r));
            }
        }
    }
    let queries: Vec<(f64, f64)> = (0..nu)
        .flat_map(|iu| (0..nv).map(move |iv| (iu as f64, iv as f64)))
        .collect();
    let mut out = envelope_points(&points, &queries);
    // a lattice point is either a sample or was Bottom; keep finite inputs as
    // lower bounds after rounding
    for (o, v) in out.iter_mut().zip(values) {
        if let (Some(x), Some(y)) = (o.finite(), v.finite()) {
            if y > x {
                *o = ExtendedReal::Finite(y);
            }
        }
    }
    out
}

#[inline]
fn key(u: f64, v: f64) -> (u64, u64) {
    // fold -0.0 into 0.0 so both hash alike
    ((u + 0.0).to_bits(), (v + 0.0).to_bits())
}

fn envelope_points(raw: &[(f64, f64, f64)], queries: &[(f64, f64)]) -> Vec<ExtendedReal> {
    // one sample per location, the highest
    let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(raw.len());
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(raw.len());
    for &(u, v, r) in raw {
        match index.get(&key(u, v)) {
            Some(&k) => pts[k].2 = pts[k].2.max(r),
            None => {
                index.insert(key(u, v), pts.len());
                pts.push((u, v, r));
            }
        }
    }

    let mut out: Vec<Option<f64>> = match pts.len() {
        0 => vec![None; queries.len()],
        1 => vec![None; queries.len()],
        _ => match find_non_collinear(&pts) {
            None => line_envelope(&pts, queries),
            Some(_) => {
                let triangles = upper_surface(&pts);
                evaluate_triangles(&pts, &triangles, queries)
            }
        },
    };

    // majorization at sample locations, exact
    for (o, &(u, v)) in out.iter_mut().zip(queries) {
        if let Some(&k) = index.get(&key(u, v)) {
            let r = pts[k].2;
            *o = Some(o.map_or(r, |x| x.max(r)));
        }
    }
    out.into_iter().map(ExtendedReal::from).collect()
}

fn find_non_collinear(pts: &[(f64, f64, f64)]) -> Option<usize> {
    let a = c2(pts[0].0, pts[0].1);
    let b = c2(pts[1].0, pts[1].1);
    (2..pts.len()).find(|&k| orient2d(a, b, c2(pts[k].0, pts[k].1)) != 0.0)
}

fn line_envelope(pts: &[(f64, f64, f64)], queries: &[(f64, f64)]) -> Vec<Option<f64>> {
    let (a, b) = (pts[0], pts[1]);
    let dir = (b.0 - a.0, b.1 - a.1);
    let param = |u: f64, v: f64| (u - a.0) * dir.0 + (v - a.1) * dir.1;

    let mut along: Vec<(f64, f64)> = pts.iter().map(|&(u, v, r)| (param(u, v), r)).collect();
    along.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    along.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 = earlier.1.max(later.1);
            true
        } else {
            false
        }
    });
    let xs: Vec<f64> = along.iter().map(|p| p.0).collect();
    let ys: Vec<ExtendedReal> = along.iter().map(|p| ExtendedReal::Finite(p.1)).collect();
    let mut scratch = vec![ExtendedReal::Bottom; xs.len()];
    let mut hull = Vec::new();
    envelope_into(&xs, &ys, &mut scratch, &mut hull);

    let (ca, cb) = (c2(a.0, a.1), c2(b.0, b.1));
    queries
        .iter()
        .map(|&(u, v)| {
            if orient2d(ca, cb, c2(u, v)) != 0.0 {
                return None;
            }
            let t = param(u, v);
            let (lo, hi) = (hull[0].0, hull[hull.len() - 1].0);
            if t < lo || t > hi {
                return None;
            }
            let seg = hull.partition_point(|h| h.0 < t);
            if hull[seg.min(hull.len() - 1)].0 == t {
                return Some(hull[seg].1);
            }
            let (xa, ya) = hull[seg - 1];
            let (xb, yb) = hull[seg];
            Some(ya + (yb - ya) * ((t - xa) / (xb - xa)))
        })
        .collect()
}

/// Triangles of the upper surface of the lifted cloud, counterclockwise in
/// projection. The cloud's projections are known not to be collinear.
fn upper_surface(pts: &[(f64, f64, f64)]) -> Vec<[usize; 3]> {
    let lifted: Vec<Point3> = pts.iter().map(|&(u, v, r)| [u, v, r]).collect();
    match convex_hull_3d(&lifted) {
        Ok(faces) => upper_faces(&lifted, &faces),
        Err(Degeneracy::Coplanar) | Err(Degeneracy::Collinear) | Err(Degeneracy::Point) => {
            // one plane carries every sample: fan-triangulate the 2-D hull
            let ring = convex_polygon(pts);
            (1..ring.len().saturating_sub(1)).map(|k| [ring[0], ring[k], ring[k + 1]]).collect()
        }
    }
}

/// Counterclockwise convex polygon (monotone chain) of the projections.
fn convex_polygon(pts: &[(f64, f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| pts[i].0.total_cmp(&pts[j].0).then(pts[i].1.total_cmp(&pts[j].1)));
    let turn = |o: usize, a: usize, b: usize| orient2d(c2(pts[o].0, pts[o].1), c2(pts[a].0, pts[a].1), c2(pts[b].0, pts[b].1));
    let mut ring: Vec<usize> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = ring.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(order.iter()) } else { Box::new(order.iter().rev()) };
        for &k in iter {
            while ring.len() >= start + 2 && turn(ring[ring.len() - 2], ring[ring.len() - 1], k) <= 0.0 {
                ring.pop();
            }
            ring.push(k);
        }
        ring.pop();
    }
    ring
}

/// Uniform bucket index over the query bounding box.
struct Buckets {
    origin: (f64, f64),
    scale: (f64, f64),
    cells: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Buckets {
    fn new(queries: &[(f64, f64)]) -> Self {
        let cells = ((queries.len() as f64).sqrt().ceil() as usize).max(1);
        let (umin, umax) = min_max(&queries.iter().map(|q| q.0).collect::<Vec<_>>());
        let (vmin, vmax) = min_max(&queries.iter().map(|q| q.1).collect::<Vec<_>>());
        let span = |lo: f64, hi: f64| if hi > lo { cells as f64 / (hi - lo) } else { 0.0 };
        let mut b = Self {
            origin: (umin, vmin),
            scale: (span(umin, umax), span(vmin, vmax)),
            cells,
            start: vec![0; cells * cells + 1],
            items: vec![0; queries.len()],
        };
        let ids: Vec<usize> = queries.iter().map(|&(u, v)| b.cell(u, v)).collect();
        for &c in &ids {
            b.start[c + 1] += 1;
        }
        for c in 0..cells * cells {
            b.start[c + 1] += b.start[c];
        }
        let mut fill = b.start.clone();
        for (q, &c) in ids.iter().enumerate() {
            b.items[fill[c]] = q;
            fill[c] += 1;
        }
        b
    }

    fn axis(&self, x: f64, origin: f64, scale: f64) -> usize {
        let k = ((x - origin) * scale).floor();
        if k.is_nan() || k < 0.0 {
            0
        } else {
            (k as usize).min(self.cells - 1)
        }
    }

    fn cell(&self, u: f64, v: f64) -> usize {
        self.axis(u, self.origin.0, self.scale.0) * self.cells + self.axis(v, self.origin.1, self.scale.1)
    }

    /// Queries in every cell overlapping the box (one cell of slack each way).
    fn visit(&self, lo: (f64, f64), hi: (f64, f64), mut f: impl FnMut(usize)) {
        let u0 = self.axis(lo.0, self.origin.0, self.scale.0).saturating_sub(1);
        let u1 = (self.axis(hi.0, self.origin.0, self.scale.0) + 1).min(self.cells - 1);
        let v0 = self.axis(lo.1, self.origin.1, self.scale.1).saturating_sub(1);
        let v1 = (self.axis(hi.1, self.origin.1, self.scale.1) + 1).min(self.cells - 1);
        for cu in u0..=u1 {
            for cv in v0..=v1 {
                let c = cu * self.cells + cv;
                for &q in &self.items[self.start[c]..self.start[c + 1]] {
                    f(q);
                }
            }
        }
    }
}

fn evaluate_triangles(pts: &[(f64, f64, f64)], triangles: &[[usize; 3]], queries: &[(f64, f64)]) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = vec![None; queries.len()];
    if queries.is_empty() {
        return out;
    }
    let buckets = Buckets::new(queries);
    for tri in triangles {
        let [a, b, c] = tri.map(|k| pts[k]);
        let (ca, cb, cc) = (c2(a.0, a.1), c2(b.0, b.1), c2(c.0, c.1));
        let area = orient2d(ca, cb, cc);
        if area <= 0.0 {
            continue;
        }
        let lo = (a.0.min(b.0).min(c.0), a.1.min(b.1).min(c.1));
        let hi = (a.0.max(b.0).max(c.0), a.1.max(b.1).max(c.1));
        buckets.visit(lo, hi, |q| {
            let (u, v) = queries[q];
            if u < lo.0 || u > hi.0 || v < lo.1 || v > hi.1 {
                return;
            }
            let cq = c2(u, v);
            let wa = orient2d(cb, cc, cq);
            if wa < 0.0 {
                return;
            }
            let wb = orient2d(cc, ca, cq);
            if wb < 0.0 {
                return;
            }
            let wc = orient2d(ca, cb, cq);
            if wc < 0.0 {
                return;
            }
            let value = (wa * a.2 + wb * b.2 + wc * c.2) / (wa + wb + wc);
            out[q] = Some(out[q].map_or(value, |x| x.max(value)));
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::oracle;
    use crate::envelope::{upper_concave_envelope_1d, Profile1D};
    use crate::model::h2;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn triple_oracle(points: &[(f64, f64, f64)], queries: &[(f64, f64)]) -> Vec<ExtendedReal> {
        oracle::triple_oracle_2d(points, queries).into_iter().map(ExtendedReal::from).collect()
    }

    fn assert_close(got: &[ExtendedReal], want: &[ExtendedReal], tol: f64) {
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            match (g.finite(), w.finite()) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= tol, "query {k}: {a} vs {b}"),
                (None, None) => {}
                _ => panic!("query {k}: support mismatch {g:?} vs {w:?}"),
            }
        }
    }

    #[test]
    fn two_point_mixture_along_a_segment() {
        let cloud = PointCloud2D::new(vec![(0.1, 0.1, h2(0.1)), (0.9, 0.1, h2(0.9))], Rect::unit()).unwrap();
        let out = upper_concave_envelope_2d(&cloud, &[(0.3, 0.1), (0.3, 0.2)]);
        assert_abs_diff_eq!(out[0].finite().unwrap(), 0.468_995_593_589_281_2, epsilon = 1e-12);
        assert_eq!(out[1], ExtendedReal::Bottom);
    }

    #[test]
    fn single_point_cloud() {
        let cloud = PointCloud2D::new(vec![(0.4, 0.6, 1.25)], Rect::unit()).unwrap();
        let out = upper_concave_envelope_2d(&cloud, &[(0.4, 0.6), (0.4, 0.61), (0.0, 0.0)]);
        assert_eq!(out, vec![ExtendedReal::Finite(1.25), ExtendedReal::Bottom, ExtendedReal::Bottom]);
    }

    #[test]
    fn empty_cloud_is_all_bottom() {
        let cloud = PointCloud2D::new(vec![], Rect::unit()).unwrap();
        assert_eq!(upper_concave_envelope_2d(&cloud, &[(0.5, 0.5)]), vec![ExtendedReal::Bottom]);
    }

    #[test]
    fn coplanar_cloud_is_its_plane_on_the_hull() {
        let pts: Vec<(f64, f64, f64)> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.2, 0.2)]
            .iter()
            .map(|&(u, v)| (u, v, 1.0 + 2.0 * u - v))
            .collect();
        let cloud = PointCloud2D::new(pts, Rect::unit()).unwrap();
        let out = upper_concave_envelope_2d(&cloud, &[(0.25, 0.25), (0.9, 0.9)]);
        assert_abs_diff_eq!(out[0].finite().unwrap(), 1.25, epsilon = 1e-15);
        assert_eq!(out[1], ExtendedReal::Bottom);
    }

    #[test]
    fn rejects_points_outside_domain() {
        assert!(PointCloud2D::new(vec![(1.5, 0.0, 0.0)], Rect::unit()).is_err());
        assert!(PointCloud2D::new(vec![(0.5, 0.0, f64::NAN)], Rect::unit()).is_err());
    }

    #[test]
    fn nine_by_nine_grid_matches_triple_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for round in 0..5 {
            let mut pts = Vec::new();
            let mut queries = Vec::new();
            for i in 0..9 {
                for j in 0..9 {
                    let (u, v) = (i as f64 / 8.0, j as f64 / 8.0);
                    queries.push((u, v));
                    // some rounds leave holes and repeated values
                    if round % 2 == 1 && rng.gen_bool(0.3) {
                        continue;
                    }
                    let r = if round >= 3 { rng.gen_range(0..4) as f64 } else { rng.gen::<f64>() };
                    pts.push((u, v, r));
                }
            }
            let cloud = PointCloud2D::new(pts.clone(), Rect::unit()).unwrap();
            assert_close(&upper_concave_envelope_2d(&cloud, &queries), &triple_oracle(&pts, &queries), 1e-9);
        }
    }

    #[test]
    fn lattice_matches_general_path() {
        let values: Vec<ExtendedReal> = (0..35)
            .map(|k| if k % 7 == 3 { ExtendedReal::Bottom } else { ExtendedReal::Finite(((k * 37) % 11) as f64 * 0.1) })
            .collect();
        let lattice = envelope_on_lattice(5, 7, &values);
        let us: Vec<f64> = (0..5).map(|k| k as f64 / 4.0).collect();
        let vs: Vec<f64> = (0..7).map(|k| k as f64 / 6.0).collect();
        let cloud = PointCloud2D::from_grid(&us, &vs, &values).unwrap();
        let queries: Vec<(f64, f64)> = us.iter().flat_map(|&u| vs.iter().map(move |&v| (u, v))).collect();
        assert_close(&lattice, &upper_concave_envelope_2d(&cloud, &queries), 1e-12);
    }

    fn arb_cloud() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -2.0f64..2.0), 1..=40)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_clouds_match_triple_oracle(pts in arb_cloud(), extra in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..20)) {
            let mut queries: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            queries.extend(extra);
            let cloud = PointCloud2D::new(pts.clone(), Rect::unit()).unwrap();
            let got = upper_concave_envelope_2d(&cloud, &queries);
            let want = triple_oracle(&pts, &queries);
            for (g, w) in got.iter().zip(&want) {
                match (g.finite(), w.finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}"),
                    (None, None) => {}
                    _ => prop_assert!(false, "support mismatch {g:?} vs {w:?}"),
                }
            }
        }

        #[test]
        fn restriction_to_a_line_matches_1d(
            vals in prop::collection::vec(prop::option::weighted(0.8, -3.0f64..3.0), 2..30),
            v in 0.0f64..1.0,
        ) {
            let n = vals.len();
            let xs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
            let ys: Vec<ExtendedReal> = vals.iter().copied().map(ExtendedReal::from).collect();
            let one = upper_concave_envelope_1d(&Profile1D::new(xs.clone(), ys.clone()).unwrap());
            let pts: Vec<(f64, f64, f64)> = xs.iter().zip(&ys).filter_map(|(&x, y)| y.finite().map(|r| (x, v, r))).collect();
            let cloud = PointCloud2D::new(pts, Rect::unit()).unwrap();
            let queries: Vec<(f64, f64)> = xs.iter().map(|&x| (x, v)).collect();
            let two = upper_concave_envelope_2d(&cloud, &queries);
            for (a, b) in one.ys().iter().zip(&two) {
                match (a.finite(), b.finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}"),
                    (None, None) => {}
                    _ => prop_assert!(false, "support mismatch {a:?} vs {b:?}"),
                }
            }
        }

        #[test]
        fn lattice_envelope_majorizes_and_is_idempotent(
            vals in prop::collection::vec(prop::option::weighted(0.85, 0.0f64..2.0), 30)
        ) {
            let values: Vec<ExtendedReal> = vals.into_iter().map(ExtendedReal::from).collect();
            let env = envelope_on_lattice(5, 6, &values);
            for (e, v) in env.iter().zip(&values) {
                prop_assert!(e >= v);
            }
            let again = envelope_on_lattice(5, 6, &env);
            for (a, b) in again.iter().zip(&env) {
                match (a.finite(), b.finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false),
                }
            }
        }
    }
}
