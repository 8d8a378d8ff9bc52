//! Reference fits checked against brute-force oracles.

use adp_core::fits::{
    fit_constant_mean, fit_isotonic, fit_linear, fit_lipschitz, lipschitz_least_squares, pava_nondecreasing_l1,
    uniform_objective, FitKind,
};
use adp_core::utilities::{contrast_utility, discrete_loss, property_utility, variance_utility};
use adp_core::{Interval, Loss, SampledCurve};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trapezoid_mean_loss(fs: &[f64], hs: &[f64], a: f64, b: f64, loss: Loss) -> f64 {
    let k = fs.len();
    let h = (b - a) / (k - 1) as f64;
    let p: Vec<f64> = fs
        .iter()
        .zip(hs)
        .map(|(f, g)| match loss {
            Loss::Squared => (f - g).powi(2),
            Loss::Absolute => (f - g).abs(),
        })
        .collect();
    let mut s = 0.0;
    for i in 0..k - 1 {
        s += 0.5 * h * (p[i] + p[i + 1]);
    }
    s / (b - a)
}

/// Best nondecreasing least-squares fit by enumerating contiguous partitions
/// into blocks fitted by their means.
fn isotonic_oracle_up(ys: &[f64]) -> Vec<f64> {
    let k = ys.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (k - 1)) {
        let mut hs = Vec::with_capacity(k);
        let mut start = 0;
        for end in 1..=k {
            if end == k || mask & (1 << (end - 1)) != 0 {
                let mean = ys[start..end].iter().sum::<f64>() / (end - start) as f64;
                hs.extend(std::iter::repeat(mean).take(end - start));
                start = end;
            }
        }
        if hs.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            continue;
        }
        let sse: f64 = ys.iter().zip(&hs).map(|(y, h)| (y - h).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-14) {
            best = Some((sse, hs));
        }
    }
    best.unwrap().1
}

fn isotonic_oracle(ys: &[f64], a: f64, b: f64) -> Vec<f64> {
    let up = isotonic_oracle_up(ys);
    let rev: Vec<f64> = ys.iter().rev().copied().collect();
    let mut down = isotonic_oracle_up(&rev);
    down.reverse();
    let lu = trapezoid_mean_loss(ys, &up, a, b, Loss::Squared);
    let ld = trapezoid_mean_loss(ys, &down, a, b, Loss::Squared);
    if ld < lu - 1e-12 {
        down
    } else {
        up
    }
}

fn curve(a: f64, b: f64, fs: Vec<f64>) -> SampledCurve {
    SampledCurve::new(Interval::new(a, b).unwrap(), fs).unwrap()
}

#[test]
fn isotonic_matches_partition_oracle_on_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..500 {
        let k = rng.gen_range(3..=8);
        let fs: Vec<f64> = if trial % 2 == 0 {
            (0..k).map(|_| rng.gen_range(0..3) as f64).collect()
        } else {
            (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let c = curve(-1.0, 1.5, fs.clone());
        let fit = fit_isotonic(&c, Loss::Squared).unwrap();
        let oracle = isotonic_oracle(&fs, -1.0, 1.5);
        for (h, o) in fit.hs.iter().zip(&oracle) {
            assert!((h - o).abs() < 1e-8, "{fs:?}: {:?} vs {oracle:?}", fit.hs);
        }
    }
}

#[test]
fn isotonic_fits_cosine_with_positive_loss() {
    let iv = Interval::new(-1.0, 1.0).unwrap();
    let fs: Vec<f64> = iv.grid(7).iter().map(|t| (3.0 * t).cos()).collect();
    let c = curve(-1.0, 1.0, fs.clone());
    let (u, fit) = property_utility(&c, FitKind::Isotonic, Loss::Squared).unwrap();
    let oracle = isotonic_oracle(&fs, -1.0, 1.0);
    assert!(u > 0.05);
    for (h, o) in fit.hs.iter().zip(&oracle) {
        assert!((h - o).abs() < 1e-12);
    }
}

/// Minimum absolute deviation over nondecreasing sequences built from the data values.
fn l1_isotonic_oracle(ys: &[f64]) -> f64 {
    let mut values = ys.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let k = ys.len();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; k];
    loop {
        let cost: f64 = ys.iter().zip(&idx).map(|(y, &i)| (y - values[i]).abs()).sum();
        best = best.min(cost);
        let mut p = k;
        loop {
            if p == 0 {
                return best;
            }
            p -= 1;
            if idx[p] + 1 < values.len() {
                idx[p] += 1;
                let v = idx[p];
                for q in idx.iter_mut().skip(p + 1) {
                    *q = v;
                }
                break;
            }
        }
    }
}

#[test]
fn l1_isotonic_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let k = rng.gen_range(2..=6);
        let ys: Vec<f64> = (0..k).map(|_| rng.gen_range(0..5) as f64 + rng.gen_range(0.0..0.5)).collect();
        let hs = pava_nondecreasing_l1(&ys);
        assert!(hs.windows(2).all(|w| w[0] <= w[1]));
        let got = uniform_objective(&ys, &hs, Loss::Absolute);
        let want = l1_isotonic_oracle(&ys);
        assert!((got - want).abs() < 1e-9, "{ys:?}: {got} vs {want}");
    }
}

#[test]
fn lad_line_matches_two_point_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let k = rng.gen_range(3..=12);
        let iv = Interval::new(0.0, 2.0).unwrap();
        let ts = iv.grid(k);
        let fs: Vec<f64> = ts.iter().map(|t| 1.5 * t - 0.5 + rng.gen_range(-1.0..1.0)).collect();
        let fit = fit_linear(&curve(0.0, 2.0, fs.clone()), Loss::Absolute).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..k {
            for j in i + 1..k {
                let slope = (fs[j] - fs[i]) / (ts[j] - ts[i]);
                let icpt = fs[i] - slope * ts[i];
                let cost: f64 = ts.iter().zip(&fs).map(|(t, f)| (f - icpt - slope * t).abs()).sum();
                best = best.min(cost);
            }
        }
        assert!(fit.objective <= best * (1.0 + 1e-6) + 1e-9, "{} vs {best}", fit.objective);
    }
}

#[test]
fn steep_ramp_against_half_slope_bound() {
    let k = 201;
    let iv = Interval::new(0.0, 1.0).unwrap();
    let fs: Vec<f64> = iv.grid(k).iter().map(|t| 10.0 * t).collect();
    let c = curve(0.0, 1.0, fs);
    let fit = fit_lipschitz(&c, 5.0, Loss::Squared).unwrap();
    let continuum = 25.0 / 12.0;
    assert!((fit.achieved_loss - continuum).abs() / continuum < 0.02, "{}", fit.achieved_loss);
    for (h, t) in fit.hs.iter().zip(c.ts()) {
        assert!((h - (5.0 * t + 2.5)).abs() < 1e-8);
    }
}

/// Lipschitz least squares by enumerating which increments sit at a bound.
fn lipschitz_oracle(ys: &[f64], bound: f64) -> f64 {
    let k = ys.len();
    let m = k - 1;
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(m as u32) {
        let mut state = vec![0i8; m];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let free: Vec<usize> = (0..m).filter(|&i| state[i] == 0).collect();
        let mut fixed = vec![0.0; k];
        let mut acc = 0.0;
        for i in 1..k {
            acc += state[i - 1] as f64 * bound;
            fixed[i] = acc;
        }
        let cols = 1 + free.len();
        let a = DMatrix::from_fn(k, cols, |r, col| {
            if col == 0 {
                1.0
            } else if r >= free[col - 1] + 1 {
                1.0
            } else {
                0.0
            }
        });
        let rhs = DVector::from_iterator(k, ys.iter().zip(&fixed).map(|(y, f)| y - f));
        let normal = a.transpose() * &a;
        let Some(chol) = normal.cholesky() else { continue };
        let x = chol.solve(&(a.transpose() * &rhs));
        if free.iter().enumerate().any(|(idx, _)| x[idx + 1].abs() > bound + 1e-12) {
            continue;
        }
        let hs = &a * &x;
        let sse: f64 = hs.iter().zip(rhs.iter()).map(|(h, r)| (h - r).powi(2)).sum();
        best = best.min(sse);
    }
    best
}

#[test]
fn lipschitz_matches_active_set_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let k = rng.gen_range(3..=7);
        let ys: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let l = rng.gen_range(0.2..4.0);
        let dt = 0.5;
        let sol = lipschitz_least_squares(&ys, dt, l).unwrap();
        let got: f64 = sol.hs.iter().zip(&ys).map(|(h, y)| (h - y).powi(2)).sum();
        let want = lipschitz_oracle(&ys, l * dt);
        assert!((got - want).abs() < 1e-9 * (1.0 + want), "{ys:?} L={l}: {got} vs {want}");
    }
}

#[test]
fn lipschitz_slopes_respect_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let k = rng.gen_range(3..=120);
        let fs: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let c = curve(-2.0, 3.0, fs);
        let l = rng.gen_range(0.01..20.0);
        let fit = fit_lipschitz(&c, l, Loss::Squared).unwrap();
        for (w, t) in fit.hs.windows(2).zip(c.ts().windows(2)) {
            assert!((w[1] - w[0]).abs() <= l * (t[1] - t[0]) + 1e-8);
        }
    }
}

#[test]
fn lipschitz_classes_are_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let fs: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = curve(0.0, 1.0, fs);
        let mut ls: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..50.0)).collect();
        ls.sort_by(f64::total_cmp);
        let objs: Vec<f64> = ls.iter().map(|&l| fit_lipschitz(&c, l, Loss::Squared).unwrap().objective).collect();
        for w in objs.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{objs:?}");
        }
    }
}

#[test]
fn unbounded_lipschitz_reproduces_the_curve() {
    let c = curve(0.0, 1.0, vec![3.0, -7.0, 12.0, 0.5]);
    let fit = fit_lipschitz(&c, f64::INFINITY, Loss::Squared).unwrap();
    assert_eq!(fit.hs, c.fs());
    let big = fit_lipschitz(&c, 1e6, Loss::Squared).unwrap();
    assert_eq!(big.achieved_loss, 0.0);
}

#[test]
fn fits_beat_random_members_of_their_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let k = rng.gen_range(3..40);
        let fs: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let c = curve(-1.0, 2.0, fs.clone());
        let ts = c.ts().to_vec();
        for loss in [Loss::Squared, Loss::Absolute] {
            let mean = fit_constant_mean(&c, Loss::Squared).unwrap();
            let line = fit_linear(&c, loss).unwrap();
            let iso = fit_isotonic(&c, loss).unwrap();
            for _ in 0..20 {
                let cst = vec![rng.gen_range(-3.0..3.0); k];
                assert!(mean.achieved_loss <= trapezoid_mean_loss(&fs, &cst, -1.0, 2.0, Loss::Squared) + 1e-12);
                let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let member: Vec<f64> = ts.iter().map(|t| a + b * t).collect();
                assert!(line.objective <= uniform_objective(&fs, &member, loss) + 1e-9);
                let mut mono: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
                mono.sort_by(f64::total_cmp);
                if rng.gen_bool(0.5) {
                    mono.reverse();
                }
                let best_orientation = |hs: &[f64]| uniform_objective(&fs, hs, loss);
                assert!(iso.achieved_loss <= trapezoid_mean_loss(&fs, &mono, -1.0, 2.0, loss) + 1e-9
                    || iso.objective <= best_orientation(&mono) + 1e-9);
            }
            if loss == Loss::Squared {
                let l = rng.gen_range(0.5..5.0);
                let lip = fit_lipschitz(&c, l, loss).unwrap();
                let dt = c.step();
                for _ in 0..20 {
                    let mut h = rng.gen_range(-3.0..3.0);
                    let member: Vec<f64> = (0..k)
                        .map(|i| {
                            if i > 0 {
                                h += rng.gen_range(-l * dt..=l * dt);
                            }
                            h
                        })
                        .collect();
                    assert!(lip.objective <= uniform_objective(&fs, &member, loss) + 1e-9);
                }
            }
        }
    }
}

#[test]
fn trapezoid_losses_of_the_identity_ramp() {
    for k in [11usize, 51, 201] {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let ts = iv.grid(k);
        let zero = vec![0.0; k];
        let h = 1.0 / (k - 1) as f64;
        let sq = discrete_loss(&ts, &zero, &ts, Loss::Squared).unwrap();
        assert!((sq - 1.0 / 3.0).abs() <= h * h / 6.0 + 1e-15);
        let ab = discrete_loss(&ts, &zero, &ts, Loss::Absolute).unwrap();
        assert!((ab - 0.5).abs() < 1e-12);
        let var = variance_utility(&curve(0.0, 1.0, ts.clone()));
        assert!((var - 1.0 / 12.0).abs() <= h * h);
    }
}

#[test]
fn variance_is_contrast_to_constant_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let k = rng.gen_range(3..100);
        let a = rng.gen_range(-3.0..0.0);
        let b = a + rng.gen_range(0.1..4.0);
        let c = curve(a, b, (0..k).map(|_| rng.gen_range(-10.0..10.0)).collect());
        let mean = fit_constant_mean(&c, Loss::Squared).unwrap();
        let flat = SampledCurve::new(c.interval(), mean.hs.clone()).unwrap();
        let via_contrast = contrast_utility(&c, &flat, Loss::Squared).unwrap();
        assert!((variance_utility(&c) - via_contrast).abs() <= 1e-12 * (1.0 + via_contrast));
    }
}

#[test]
fn constant_mean_uses_trapezoid_weights() {
    let c = curve(0.0, 1.0, vec![0.0, 1.0, 2.0]);
    assert_eq!(fit_constant_mean(&c, Loss::Squared).unwrap().hs, vec![1.0; 3]);
    let c = curve(0.0, 1.0, vec![0.0, 0.0, 3.0]);
    assert_eq!(fit_constant_mean(&c, Loss::Squared).unwrap().hs[0], 0.75);
}
