use crate::error::{Error, Result};
use crate::model::ExtendedReal;

/// Values of an extended-real function at strictly increasing coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    xs: Vec<f64>,
    ys: Vec<ExtendedReal>,
}

impl Profile1D {
    pub fn new(xs: Vec<f64>, ys: Vec<ExtendedReal>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::domain(format!(
                "profile needs matching non-empty coordinate/value lists, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("profile coordinates must be finite and strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[ExtendedReal] {
        &self.ys
    }
}

/// Least concave majorant of the finite points of `profile`, evaluated at the
/// same coordinates. Coordinates outside the span of the finite points stay
/// `Bottom`.
pub fn upper_concave_envelope_1d(profile: &Profile1D) -> Profile1D {
    let mut out = vec![ExtendedReal::Bottom; profile.ys.len()];
    let mut hull = Vec::new();
    envelope_into(&profile.xs, &profile.ys, &mut out, &mut hull);
    Profile1D {
        xs: profile.xs.clone(),
        ys: out,
    }
}

/// Monotone-chain upper hull of the finite points, interpolated back onto
/// `xs`. `hull` is scratch space reused across calls.
pub(crate) fn envelope_into(xs: &[f64], ys: &[ExtendedReal], out: &mut [ExtendedReal], hull: &mut Vec<(f64, f64)>) {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert_eq!(xs.len(), out.len());
    hull.clear();
    for (&x, y) in xs.iter().zip(ys) {
        let Some(y) = y.finite() else { continue };
        while hull.len() >= 2 {
            let (xa, ya) = hull[hull.len() - 2];
            let (xb, yb) = hull[hull.len() - 1];
            // drop b when it is on or below the chord a -> (x, y)
            if (xb - xa) * (y - ya) - (yb - ya) * (x - xa) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }

    if hull.is_empty() {
        out.fill(ExtendedReal::Bottom);
        return;
    }
    let (lo, hi) = (hull[0].0, hull[hull.len() - 1].0);
    let mut seg = 0;
    for ((&x, y), o) in xs.iter().zip(ys).zip(out.iter_mut()) {
        if x < lo || x > hi {
            *o = ExtendedReal::Bottom;
            continue;
        }
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        let (xa, ya) = hull[seg];
        let value = if x == xa {
            ya
        } else {
            let (xb, yb) = hull[seg + 1];
            if x == xb {
                yb
            } else {
                ya + (yb - ya) * ((x - xa) / (xb - xa))
            }
        };
        // rounding in the interpolation must never drop below a finite input
        *o = ExtendedReal::Finite(match y.finite() {
            Some(v) => value.max(v),
            None => value,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::oracle;
    use proptest::prelude::*;

    fn chord_oracle_1d(xs: &[f64], ys: &[ExtendedReal]) -> Vec<ExtendedReal> {
        let ys: Vec<Option<f64>> = ys.iter().map(|y| y.finite()).collect();
        oracle::chord_oracle_1d(xs, &ys).into_iter().map(ExtendedReal::from).collect()
    }

    fn fin(v: &[f64]) -> Vec<ExtendedReal> {
        v.iter().map(|&x| ExtendedReal::Finite(x)).collect()
    }

    const B: ExtendedReal = ExtendedReal::Bottom;
    const XS5: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

    #[test]
    fn concave_input_is_unchanged() {
        let p = Profile1D::new(XS5.to_vec(), fin(&[0.0, 1.0, 1.5, 1.0, 0.0])).unwrap();
        assert_eq!(upper_concave_envelope_1d(&p), p);
    }

    #[test]
    fn single_chord_across_bottoms() {
        let ys = vec![ExtendedReal::Finite(0.0), B, B, B, ExtendedReal::Finite(4.0)];
        let p = Profile1D::new(XS5.to_vec(), ys).unwrap();
        assert_eq!(upper_concave_envelope_1d(&p).ys(), &fin(&[0.0, 1.0, 2.0, 3.0, 4.0])[..]);
    }

    #[test]
    fn valley_is_filled() {
        let p = Profile1D::new(XS5.to_vec(), fin(&[0.0, 3.0, 1.0, 3.0, 0.0])).unwrap();
        // frozen from the pairwise-chord oracle
        let expected = chord_oracle_1d(p.xs(), p.ys());
        assert_eq!(expected, fin(&[0.0, 3.0, 3.0, 3.0, 0.0]));
        assert_eq!(upper_concave_envelope_1d(&p).ys(), &expected[..]);
    }

    #[test]
    fn bottoms_outside_support_stay_bottom() {
        let ys = vec![B, ExtendedReal::Finite(1.0), B, ExtendedReal::Finite(2.0), B];
        let p = Profile1D::new(XS5.to_vec(), ys).unwrap();
        let env = upper_concave_envelope_1d(&p);
        assert_eq!(env.ys(), &[B, ExtendedReal::Finite(1.0), ExtendedReal::Finite(1.5), ExtendedReal::Finite(2.0), B]);
    }

    #[test]
    fn all_bottom_stays_bottom() {
        let p = Profile1D::new(XS5.to_vec(), vec![B; 5]).unwrap();
        assert_eq!(upper_concave_envelope_1d(&p).ys(), &[B; 5]);
    }

    #[test]
    fn rejects_unsorted_coordinates() {
        assert!(Profile1D::new(vec![0.0, 0.0], fin(&[1.0, 2.0])).is_err());
        assert!(Profile1D::new(vec![0.0], vec![]).is_err());
    }

    fn arb_profile(max_len: usize) -> impl Strategy<Value = Profile1D> {
        prop::collection::vec(
            (0.001f64..1.0, prop_oneof![1 => Just(None), 4 => (-5.0f64..5.0).prop_map(Some)]),
            1..=max_len,
        )
        .prop_map(|steps| {
            let mut x = 0.0;
            let (xs, ys): (Vec<_>, Vec<_>) = steps
                .into_iter()
                .map(|(dx, y)| {
                    x += dx;
                    (x, ExtendedReal::from(y))
                })
                .unzip();
            Profile1D::new(xs, ys).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn majorizes_is_idempotent_and_concave(p in arb_profile(40)) {
            let env = upper_concave_envelope_1d(&p);
            for (e, y) in env.ys().iter().zip(p.ys()) {
                prop_assert!(e >= y);
            }
            let again = upper_concave_envelope_1d(&env);
            for (a, b) in again.ys().iter().zip(env.ys()) {
                match (a.finite(), b.finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false, "finite support changed"),
                }
            }
            let finite: Vec<(f64, f64)> = env.xs().iter().zip(env.ys())
                .filter_map(|(&x, y)| y.finite().map(|v| (x, v))).collect();
            for w in finite.windows(3) {
                let (a, b, c) = (w[0], w[1], w[2]);
                let interp = a.1 + (c.1 - a.1) * (b.0 - a.0) / (c.0 - a.0);
                prop_assert!(b.1 >= interp - 1e-9);
            }
        }

        #[test]
        fn matches_pairwise_chord_oracle(p in arb_profile(64)) {
            let env = upper_concave_envelope_1d(&p);
            let oracle = chord_oracle_1d(p.xs(), p.ys());
            for (e, o) in env.ys().iter().zip(&oracle) {
                match (e.finite(), o.finite()) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}"),
                    (None, None) => {}
                    _ => prop_assert!(false, "support mismatch {e:?} vs {o:?}"),
                }
            }
        }
    }
}
