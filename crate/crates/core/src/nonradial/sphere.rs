//! Deterministic, roughly uniform point sets on the unit sphere `S^{d-1}`.

use std::f64::consts::PI;

/// `n` unit vectors in `R^d`: equally spaced angles (`d = 2`), a Fibonacci
/// spiral (`d = 3`), and Kronecker points pushed through Box–Muller and
/// normalised (`d ≥ 4`). The same `(d, n)` always gives the same points.
pub fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    assert!(d >= 2, "sphere points need d >= 2");
    match d {
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    vec![rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let pairs = d.div_ceil(2);
            let alphas: Vec<f64> = first_primes(2 * pairs)
                .iter()
                .map(|&q| (q as f64).sqrt().fract())
                .collect();
            (0..n)
                .map(|k| {
                    let kk = k as f64 + 1.0;
                    let mut v = Vec::with_capacity(2 * pairs);
                    for i in 0..pairs {
                        let u1 = (kk * alphas[2 * i]).fract().clamp(1e-12, 1.0 - 1e-12);
                        let u2 = (kk * alphas[2 * i + 1]).fract();
                        let rad = (-2.0 * u1.ln()).sqrt();
                        let (s, c) = (2.0 * PI * u2).sin_cos();
                        v.push(rad * c);
                        v.push(rad * s);
                    }
                    v.truncate(d);
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut q = 2u64;
    while out.len() < count {
        if (2..q).take_while(|f| f * f <= q).all(|f| !q.is_multiple_of(f)) {
            out.push(q);
        }
        q += 1;
    }
    out
}
