//! Brute-force reference evaluators used only by tests. They share no code
//! with the library's envelope or hull routines.
#![allow(dead_code)]

/// Upper concave envelope by enumerating every chord between finite points:
/// the value at `x` is the best of the point itself and every chord that
/// spans `x`.
pub fn chord_oracle_1d(xs: &[f64], ys: &[Option<f64>]) -> Vec<Option<f64>> {
    let finite: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, y)| y.map(|v| (x, v)))
        .collect();
    xs.iter()
        .map(|&x| {
            let mut best: Option<f64> = None;
            for (a, &(xa, ya)) in finite.iter().enumerate() {
                if xa == x {
                    best = Some(best.map_or(ya, |b| b.max(ya)));
                }
                for &(xb, yb) in &finite[a + 1..] {
                    if xa <= x && x <= xb && xa < xb {
                        let v = ya + (yb - ya) * (x - xa) / (xb - xa);
                        best = Some(best.map_or(v, |b| b.max(v)));
                    }
                }
            }
            best
        })
        .collect()
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Caratheodory brute force on a planar domain: the concave envelope at a
/// query is the largest interpolated value over all single points, segments
/// and triangles of cloud points whose convex hull contains the query.
pub fn triple_oracle_2d(points: &[(f64, f64, f64)], queries: &[(f64, f64)]) -> Vec<Option<f64>> {
    const EPS: f64 = 1e-12;
    let m = points.len();
    queries
        .iter()
        .map(|&q| {
            let mut best: Option<f64> = None;
            let mut offer = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
            for a in 0..m {
                let pa = (points[a].0, points[a].1);
                if (pa.0 - q.0).abs() <= EPS && (pa.1 - q.1).abs() <= EPS {
                    offer(points[a].2);
                }
                for b in a + 1..m {
                    let pb = (points[b].0, points[b].1);
                    let len2 = (pb.0 - pa.0).powi(2) + (pb.1 - pa.1).powi(2);
                    if len2 > 0.0 && orient(pa, pb, q).abs() <= EPS * len2.sqrt() {
                        let t = ((q.0 - pa.0) * (pb.0 - pa.0) + (q.1 - pa.1) * (pb.1 - pa.1)) / len2;
                        if (-EPS..=1.0 + EPS).contains(&t) {
                            offer(points[a].2 + t * (points[b].2 - points[a].2));
                        }
                    }
                    for c in b + 1..m {
                        let pc = (points[c].0, points[c].1);
                        let area = orient(pa, pb, pc);
                        if area.abs() <= EPS {
                            continue;
                        }
                        let wa = orient(pb, pc, q) / area;
                        let wb = orient(pc, pa, q) / area;
                        let wc = orient(pa, pb, q) / area;
                        if wa >= -EPS && wb >= -EPS && wc >= -EPS {
                            offer(wa * points[a].2 + wb * points[b].2 + wc * points[c].2);
                        }
                    }
                }
            }
            best
        })
        .collect()
}
