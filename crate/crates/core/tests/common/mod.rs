//! Test-only references that share no code with the engine.
#![allow(dead_code)]

use num_complex::Complex64;

/// Dense coherent walk on a `(2n+1)^2 x 2` grid, written directly from the
/// operator definitions. Returns `V(0..=n)` and the final site grid.
pub fn dense_coherent_walk(n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let side = 2 * n + 1;
    let c = n as isize;
    let idx = |i: isize, j: isize| ((i + c) as usize, (j + c) as usize);
    let mut h = vec![vec![Complex64::new(0.0, 0.0); side]; side];
    let mut v = h.clone();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (oi, oj) = idx(0, 0);
    h[oi][oj] = Complex64::new(r, 0.0);
    v[oi][oj] = Complex64::new(0.0, r);

    let probs = |h: &Vec<Vec<Complex64>>, v: &Vec<Vec<Complex64>>| -> Vec<Vec<f64>> {
        (0..side)
            .map(|a| (0..side).map(|b| h[a][b].norm_sqr() + v[a][b].norm_sqr()).collect())
            .collect()
    };
    let spread = |p: &Vec<Vec<f64>>| -> f64 {
        let (mut mx, mut my) = (0.0, 0.0);
        for a in 0..side {
            for b in 0..side {
                mx += p[a][b] * (a as f64 - c as f64);
                my += p[a][b] * (b as f64 - c as f64);
            }
        }
        let mut s = 0.0;
        for a in 0..side {
            for b in 0..side {
                let dx = a as f64 - c as f64 - mx;
                let dy = b as f64 - c as f64 - my;
                s += p[a][b] * (dx * dx + dy * dy);
            }
        }
        s
    };

    let mut vs = vec![spread(&probs(&h, &v))];
    for _ in 0..n {
        // coin, x shift
        let mut h2 = vec![vec![Complex64::new(0.0, 0.0); side]; side];
        let mut v2 = h2.clone();
        for a in 0..side {
            for b in 0..side {
                let hh = (h[a][b] + v[a][b]) * r;
                let vv = (h[a][b] - v[a][b]) * r;
                if a > 0 {
                    h2[a - 1][b] += hh;
                }
                if a + 1 < side {
                    v2[a + 1][b] += vv;
                }
            }
        }
        // coin, y shift
        let mut h3 = vec![vec![Complex64::new(0.0, 0.0); side]; side];
        let mut v3 = h3.clone();
        for a in 0..side {
            for b in 0..side {
                let hh = (h2[a][b] + v2[a][b]) * r;
                let vv = (h2[a][b] - v2[a][b]) * r;
                if b > 0 {
                    h3[a][b - 1] += hh;
                }
                if b + 1 < side {
                    v3[a][b + 1] += vv;
                }
            }
        }
        h = h3;
        v = v3;
        vs.push(spread(&probs(&h, &v)));
    }
    let p = probs(&h, &v);
    (vs, p)
}

/// Composite Simpson rule on `[a, b]` with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Uniform average of `exp(i k phi)` over `phi in [-zeta, zeta]`, by
/// quadrature. Returns `(re, im)`.
pub fn phase_average(k: f64, zeta: f64) -> (f64, f64) {
    if zeta == 0.0 {
        return (1.0, 0.0);
    }
    let re = simpson(|p| (k * p).cos(), -zeta, zeta, 20_000) / (2.0 * zeta);
    let im = simpson(|p| (k * p).sin(), -zeta, zeta, 20_000) / (2.0 * zeta);
    (re, im)
}
