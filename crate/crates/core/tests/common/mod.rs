//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use kresling_airship::mesh::TriMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (lambda, extra payload g, deployed height mm, deployed angle deg) for
/// n = 7, m = 4, R = 360 mm, h0 = 80 mm.
pub const REPORTED_ROWS: [(f64, f64, f64, f64); 8] = [
    (0.83, 1.1, 2265.0, 22.0),
    (0.84, 8.6, 2288.0, 21.0),
    (0.85, 25.1, 2325.0, 19.0),
    (0.86, 32.3, 2346.0, 18.0),
    (0.87, 39.3, 2366.0, 17.0),
    (0.88, 55.0, 2400.0, 15.0),
    (0.89, 61.5, 2418.0, 14.0),
    (0.90, 68.0, 2436.0, 13.0),
];

/// Deployed stack height by direct trigonometry on the polygon corners:
/// the top corner sits at angle `alpha` from its bottom neighbour, so
/// `h^2 = b_g^2 - |p_top - p_bottom|^2` with the panel edge kept at `b_g`.
pub fn deployed_height_by_corners(n: u32, m: u32, lambda: f64, r: f64, h0: f64) -> (f64, f64) {
    let phi = std::f64::consts::PI / n as f64;
    let gamma = std::f64::consts::FRAC_PI_2 - phi;
    let alpha_f = 2.0 * lambda * gamma;
    let alpha_d = 2.0 * (1.0 - lambda) * gamma;
    // folded: corner j on the top ring lies alpha_f + 2 phi ahead of corner j
    // on the bottom ring, and the panel edge has horizontal chord b_c.
    let bc = 2.0 * r * (alpha_f / 2.0).sin();
    let bg2 = bc * bc + h0 * h0;
    let chord = 2.0 * r * (alpha_d / 2.0).sin();
    let h = (bg2 - chord * chord).sqrt();
    (m as f64 * h, alpha_d.to_degrees())
}

/// Volume of a closed mesh by Monte-Carlo point classification. A point
/// is inside when a ray from it crosses the surface an odd number of times.
pub fn monte_carlo_volume(mesh: &TriMesh, samples: usize, seed: u64) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &mesh.vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let dir = normalize([0.3141, 0.5772, 0.7548]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    for _ in 0..samples {
        let p = [
            rng.gen_range(lo[0]..hi[0]),
            rng.gen_range(lo[1]..hi[1]),
            rng.gen_range(lo[2]..hi[2]),
        ];
        let hits = mesh
            .triangles
            .iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| mesh.vertices[i]);
                ray_hits_triangle(p, dir, a, b, c)
            })
            .count();
        if hits % 2 == 1 {
            inside += 1;
        }
    }
    let box_volume = (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
    box_volume * inside as f64 / samples as f64
}

fn ray_hits_triangle(o: [f64; 3], d: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> bool {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let p = cross(d, e2);
    let det = dot(e1, p);
    if det.abs() < 1e-12 {
        return false;
    }
    let inv = 1.0 / det;
    let t0 = sub(o, a);
    let u = dot(t0, p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = cross(t0, e1);
    let v = dot(d, q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    dot(e2, q) * inv > 0.0
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let l = dot(a, a).sqrt();
    [a[0] / l, a[1] / l, a[2] / l]
}

/// Adaptive Dormand-Prince 5(4) integration of `y' = f(t, y)` from `t0`
/// to `t1`.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    rtol: f64,
    atol: f64,
) -> [f64; N] {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0) / 10.0;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        for i in 0..N {
            let (mut d5, mut d4) = (0.0, 0.0);
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Uniform sample in `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}
