//! Box-clamped Nelder–Mead descent.

use std::cmp::Ordering;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.1;

/// Orders (params, value) pairs by value, breaking ties by the
/// lexicographically smaller parameter vector.
pub(crate) fn compare(a: (&[f64], f64), b: (&[f64], f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| {
        a.0.iter()
            .zip(b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn clamp(mut x: Vec<f64>, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
    x
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Runs one descent from `start`. `eval` returns `None` once the caller's
/// budget is exhausted, which ends the descent immediately. Convergence is
/// declared when every vertex lies within `xtol` of the best one, measured
/// per coordinate relative to the box width.
pub(crate) fn descend<F>(eval: &mut F, start: &[f64], lo: &[f64], hi: &[f64], xtol: f64) -> Option<()>
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let d = start.len();
    let scale: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| (h - l).max(f64::MIN_POSITIVE)).collect();
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let f0 = eval(start)?;
    pts.push((start.to_vec(), f0));
    for k in 0..d {
        let mut x = start.to_vec();
        let step = INITIAL_STEP * (hi[k] - lo[k]);
        x[k] = if x[k] + step <= hi[k] { x[k] + step } else { x[k] - step };
        let x = clamp(x, lo, hi);
        let f = eval(&x)?;
        pts.push((x, f));
    }

    loop {
        pts.sort_by(|a, b| compare((&a.0, a.1), (&b.0, b.1)));
        let best = pts[0].0.clone();
        let diameter = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best).zip(&scale).map(|((a, b), s)| (a - b).abs() / s))
            .fold(0.0, f64::max);
        if diameter <= xtol {
            return Some(());
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &pts[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let (worst, f_worst) = pts[d].clone();
        let f_best = pts[0].1;
        let f_second = pts[d - 1].1;

        let xr = clamp(lerp(&centroid, &worst, -REFLECT), lo, hi);
        let fr = eval(&xr)?;
        if fr < f_best {
            let xe = clamp(lerp(&centroid, &xr, EXPAND), lo, hi);
            let fe = eval(&xe)?;
            pts[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            pts[d] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < f_worst {
            let xc = clamp(lerp(&centroid, &xr, CONTRACT), lo, hi);
            let fc = eval(&xc)?;
            (xc, fc, fc <= fr)
        } else {
            let xc = lerp(&centroid, &worst, CONTRACT);
            let fc = eval(&xc)?;
            (xc, fc, fc < f_worst)
        };
        if accept {
            pts[d] = (xc, fc);
            continue;
        }
        for v in pts.iter_mut().skip(1) {
            let x = lerp(&best, &v.0, SHRINK);
            let f = eval(&x)?;
            *v = (x, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], lo: &[f64], hi: &[f64], budget: usize) -> (Vec<f64>, f64, usize) {
        let mut best = (start.to_vec(), f64::INFINITY);
        let mut count = 0;
        let mut eval = |x: &[f64]| {
            if count == budget {
                return None;
            }
            count += 1;
            let v = f(x);
            if compare((x, v), (&best.0, best.1)).is_lt() {
                best = (x.to_vec(), v);
            }
            Some(v)
        };
        descend(&mut eval, start, lo, hi, 1e-10);
        (best.0, best.1, count)
    }

    #[test]
    fn finds_quadratic_minimum() {
        let (x, v, _) = run(
            |x| (x[0] - 0.3).powi(2) + 10.0 * (x[1] + 0.7).powi(2),
            &[1.5, 1.5],
            &[-2.0, -2.0],
            &[2.0, 2.0],
            5000,
        );
        assert!((x[0] - 0.3).abs() < 1e-8 && (x[1] + 0.7).abs() < 1e-8, "{x:?}");
        assert!(v < 1e-15);
    }

    #[test]
    fn rosenbrock() {
        let (x, _, _) = run(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[-3.0, -3.0],
            &[3.0, 3.0],
            20_000,
        );
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn respects_box_and_budget() {
        let (x, _, count) = run(|x| x[0], &[0.5], &[-1.0], &[1.0], 10_000);
        assert_eq!(x[0], -1.0);
        assert!(count < 10_000);
        let (_, _, count) = run(|x| x[0] * x[0], &[0.5], &[-1.0], &[1.0], 7);
        assert_eq!(count, 7);
    }

    #[test]
    fn flat_objective_terminates() {
        let (_, v, count) = run(|_| 1.0, &[0.1, 0.2, 0.3], &[-1.0; 3], &[1.0; 3], 100_000);
        assert_eq!(v, 1.0);
        assert!(count < 2_000);
    }

    #[test]
    fn infinite_region_is_avoided() {
        let (x, v, _) = run(
            |x| if x[0] < 0.0 { f64::INFINITY } else { (x[0] - 0.2).powi(2) },
            &[0.9],
            &[-1.0],
            &[1.0],
            5000,
        );
        assert!((x[0] - 0.2).abs() < 1e-8 && v.is_finite());
    }

    #[test]
    fn tie_break_is_lexicographic() {
        assert!(compare((&[0.0, 1.0], 2.0), (&[0.0, 2.0], 2.0)).is_lt());
        assert!(compare((&[5.0], 1.0), (&[0.0], 2.0)).is_lt());
    }
}
