use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Minimum number of pre-grid points in [`minimize_1d`].
pub const MIN_GRID_POINTS: usize = 64;
/// Golden-section stopping width.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Nelder-Mead iteration cap per start.
pub const NM_MAX_ITER: usize = 2000;
/// Nelder-Mead stops once the simplex values agree to this.
pub const NM_VALUE_TOL: f64 = 1e-12;
const NM_POINT_TOL: f64 = 1e-10;
const REFINED_BASINS: usize = 4;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Global minimum of `g` on `[lo, hi]`.
///
/// Evaluates a uniform grid of [`MIN_GRID_POINTS`] points (endpoints
/// included), then golden-section refines the bracket around each of the
/// lowest grid local minima down to width [`GOLDEN_TOL`]. Returns the best
/// `(s, g(s))` seen, grid points included.
pub fn minimize_1d<G>(mut g: G, lo: f64, hi: f64) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    debug_assert!(lo < hi);
    let n = MIN_GRID_POINTS;
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();

    let mut best = (xs[0], ys[0]);
    for (&x, &y) in xs.iter().zip(&ys) {
        if y < best.1 {
            best = (x, y);
        }
    }

    // grid local minima, lowest first
    let mut basins: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || ys[i] < ys[i - 1];
            let right = i == n - 1 || ys[i] <= ys[i + 1];
            left && right
        })
        .collect();
    basins.sort_by(|&i, &j| ys[i].total_cmp(&ys[j]).then(i.cmp(&j)));
    basins.truncate(REFINED_BASINS);

    for i in basins {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let (x, y) = golden_section(&mut g, a, b);
        if y < best.1 {
            best = (x, y);
        }
    }
    best
}

fn golden_section<G: FnMut(f64) -> f64>(g: &mut G, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while b - a > GOLDEN_TOL {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc <= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Map unconstrained coordinates `z` (length `dim - 1`) onto the open
/// probability simplex of length `dim`: `f_i = e^{z_i} / (1 + sum_j e^{z_j})`
/// and `f_dim = 1 / (1 + sum_j e^{z_j})`.
///
/// Coordinates are clamped to `[-300, 300]` so no fraction underflows to zero.
pub fn simplex_from_unconstrained(z: &[f64]) -> Vec<f64> {
    let mut f = Vec::with_capacity(z.len() + 1);
    softmax_into(z, &mut f);
    f
}

fn softmax_into(z: &[f64], out: &mut Vec<f64>) {
    let clamp = |v: f64| v.clamp(-300.0, 300.0);
    let m = z.iter().map(|&v| clamp(v)).fold(0.0f64, f64::max);
    out.clear();
    out.extend(z.iter().map(|&v| (clamp(v) - m).exp()));
    out.push((-m).exp());
    let total: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// Inverse of [`simplex_from_unconstrained`] for interior points.
pub fn unconstrained_from_simplex(f: &[f64]) -> Vec<f64> {
    let last = f[f.len() - 1];
    f[..f.len() - 1].iter().map(|&v| (v / last).ln()).collect()
}

fn in_open_simplex(x: &[f64], dim: usize) -> bool {
    x.len() == dim
        && x.iter().all(|&v| v.is_finite() && v > 0.0)
        && (x.iter().sum::<f64>() - 1.0).abs() <= 1e-10
}

/// Multistart Nelder-Mead over the open probability simplex.
///
/// Each start is mapped to `dim - 1` unconstrained coordinates (see
/// [`simplex_from_unconstrained`]) and minimized with the dimension-adaptive
/// Nelder-Mead coefficients. A start stops when the simplex values agree to
/// [`NM_VALUE_TOL`], when its vertices agree to 1e-10 in every coordinate, or
/// after [`NM_MAX_ITER`] iterations. The initial simplex steps have random
/// signs drawn from `rng`, so the result is a deterministic function of the
/// starts and the generator state. Returns the best `(fractions, value)`.
pub fn minimize_simplex<H>(
    mut h: H,
    dim: usize,
    starts: &[Vec<f64>],
    rng: &mut Rng,
) -> Result<(Vec<f64>, f64)>
where
    H: FnMut(&[f64]) -> f64,
{
    if dim == 0 {
        return Err(Error::BadStart { index: 0, dim });
    }
    for (index, s) in starts.iter().enumerate() {
        if !in_open_simplex(s, dim) {
            return Err(Error::BadStart { index, dim });
        }
    }
    if dim == 1 {
        let x = vec![1.0];
        let v = h(&x);
        return Ok((x, v));
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut buf = Vec::with_capacity(dim);
    for s in starts {
        let z0 = unconstrained_from_simplex(s);
        let signs: Vec<f64> = (0..dim - 1)
            .map(|_| if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 })
            .collect();
        let (z, v) = nelder_mead(
            |z| {
                softmax_into(z, &mut buf);
                h(&buf)
            },
            &z0,
            &signs,
        );
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((simplex_from_unconstrained(&z), v));
        }
    }
    match best {
        Some(b) => Ok(b),
        None => Err(Error::BadStart { index: 0, dim }),
    }
}

fn nelder_mead<F>(mut f: F, x0: &[f64], signs: &[f64]) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += signs[i] * 0.5;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=n).collect();

    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    for _ in 0..NM_MAX_ITER {
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        let (ib, iw, isw) = (order[0], order[n], order[n - 1]);

        if vals[iw] - vals[ib] <= NM_VALUE_TOL {
            break;
        }
        let spread = (0..n).all(|k| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &pts {
                lo = lo.min(p[k]);
                hi = hi.max(p[k]);
            }
            hi - lo <= NM_POINT_TOL
        });
        if spread {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, &p) in centroid.iter_mut().zip(&pts[i]) {
                *c += p;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        let along = |t: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for ((o, &c), &w) in out.iter_mut().zip(&centroid).zip(worst) {
                *o = c + t * (c - w);
            }
        };

        along(alpha, &mut trial, &pts[iw]);
        let fr = f(&trial);
        if fr < vals[ib] {
            along(alpha * beta, &mut trial2, &pts[iw]);
            let fe = f(&trial2);
            if fe < fr {
                pts[iw].copy_from_slice(&trial2);
                vals[iw] = fe;
            } else {
                pts[iw].copy_from_slice(&trial);
                vals[iw] = fr;
            }
            continue;
        }
        if fr < vals[isw] {
            pts[iw].copy_from_slice(&trial);
            vals[iw] = fr;
            continue;
        }
        let contracted = if fr < vals[iw] {
            along(alpha * gamma, &mut trial2, &pts[iw]);
            let fc = f(&trial2);
            (fc <= fr).then_some(fc)
        } else {
            along(-gamma, &mut trial2, &pts[iw]);
            let fc = f(&trial2);
            (fc < vals[iw]).then_some(fc)
        };
        if let Some(fc) = contracted {
            pts[iw].copy_from_slice(&trial2);
            vals[iw] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = pts[ib].clone();
        for &i in &order[1..] {
            for (p, &b) in pts[i].iter_mut().zip(&best) {
                *p = b + delta * (*p - b);
            }
            vals[i] = f(&pts[i]);
        }
    }

    let ib = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)))
        .unwrap_or(0);
    (pts[ib].clone(), vals[ib])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let (s, v) = minimize_1d(|s| (s - 0.3).powi(2), 0.0, 1.0);
        assert!((s - 0.3).abs() < 1e-8);
        assert!(v < 1e-16);
    }

    #[test]
    fn constant_1d() {
        let (s, v) = minimize_1d(|_| 2.5, 0.0, 1.0);
        assert!((0.0..=1.0).contains(&s));
        assert_eq!(v, 2.5);
    }

    #[test]
    fn multimodal_1d_matches_dense_grid() {
        let g = |s: f64| (10.0 * s).sin();
        let dense = (0..2000)
            .map(|i| g(i as f64 / 1999.0))
            .fold(f64::INFINITY, f64::min);
        let (_, v) = minimize_1d(g, 0.0, 1.0);
        assert!((v - dense).abs() <= 1e-6, "{v} vs {dense}");
        assert!(v <= dense + 1e-12);
    }

    #[test]
    fn endpoint_minimum_1d() {
        let (s, v) = minimize_1d(|s| s, 0.0, 1.0);
        assert_eq!((s, v), (0.0, 0.0));
        let (s, _) = minimize_1d(|s| -s, 0.0, 1.0);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn simplex_interior_quadratic() {
        let c = [0.2, 0.3, 0.5];
        let h = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let starts = vec![vec![1.0 / 3.0; 3], vec![0.6, 0.2, 0.2]];
        let (x, v) = minimize_simplex(h, 3, &starts, &mut Rng::new(1)).unwrap();
        for (a, b) in x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-6, "{x:?}");
        }
        assert!(v < 1e-11);
    }

    #[test]
    fn simplex_dim_one() {
        let (x, _) = minimize_simplex(|_| 0.0, 1, &[vec![1.0]], &mut Rng::new(1)).unwrap();
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn simplex_rejects_bad_start() {
        let h = |_: &[f64]| 0.0;
        let bad = [vec![0.5, 0.6], vec![0.0, 1.0], vec![1.0]];
        for (k, s) in bad.iter().enumerate() {
            let err = minimize_simplex(h, 2, &[vec![0.5, 0.5], s.clone()], &mut Rng::new(k as u64))
                .unwrap_err();
            assert_eq!(err, Error::BadStart { index: 1, dim: 2 });
        }
    }

    #[test]
    fn simplex_deterministic() {
        let h = |x: &[f64]| (x[0] - 0.1).powi(2) + (x[1] * x[2] - 0.2).powi(2);
        let starts = vec![vec![0.25, 0.25, 0.5]];
        let a = minimize_simplex(h, 3, &starts, &mut Rng::new(9)).unwrap();
        let b = minimize_simplex(h, 3, &starts, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parametrization_round_trip() {
        let f = vec![0.1, 0.2, 0.3, 0.4];
        let back = simplex_from_unconstrained(&unconstrained_from_simplex(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
