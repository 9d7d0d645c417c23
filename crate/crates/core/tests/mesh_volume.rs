mod common;

use kresling_airship::geometry::{derive_segment, KreslingParams, Stability};
use kresling_airship::mesh::{build_mesh, enclosed_volume, signed_volume_mm3, TriMesh};

use common::monte_carlo_volume;

/// Replaces the centre fans of both caps by fans from the first corner.
fn retriangulate_caps(mesh: &TriMesh, n: usize, m: usize) -> TriMesh {
    let bottom = mesh.vertices.len() - 2;
    let top = mesh.vertices.len() - 1;
    let mut triangles: Vec<[usize; 3]> = mesh
        .triangles
        .iter()
        .copied()
        .filter(|t| !t.contains(&bottom) && !t.contains(&top))
        .collect();
    let ring = |k: usize, j: usize| k * n + j;
    for j in 1..n - 1 {
        triangles.push([ring(0, 0), ring(0, j + 1), ring(0, j)]);
        triangles.push([ring(m, 0), ring(m, j), ring(m, j + 1)]);
    }
    TriMesh {
        vertices: mesh.vertices[..bottom].to_vec(),
        triangles,
    }
}

#[test]
fn cap_triangulation_does_not_change_volume() {
    for (n, m, l) in [(7, 4, 0.9), (5, 3, 0.7), (9, 2, 0.6)] {
        let p = KreslingParams::new(n, m, l, 360.0, 80.0).unwrap();
        let g = derive_segment(&p, Stability::Any).unwrap();
        for alpha in [g.alpha_deployed, 0.5 * (g.alpha_deployed + g.alpha_folded), g.alpha_folded] {
            let mesh = build_mesh(&p, alpha).unwrap();
            let alt = retriangulate_caps(&mesh, n as usize, m as usize);
            let a = enclosed_volume(&mesh).unwrap();
            let b = enclosed_volume(&alt).unwrap();
            assert!((a - b).abs() / a < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn monte_carlo_agrees() {
    let p = KreslingParams::new(6, 3, 0.8, 250.0, 50.0).unwrap();
    let g = derive_segment(&p, Stability::Any).unwrap();
    let mesh = build_mesh(&p, g.alpha_deployed).unwrap();
    let exact = signed_volume_mm3(&mesh);
    let mc = monte_carlo_volume(&mesh, 100_000, 11);
    assert!((mc - exact).abs() / exact < 0.015, "{mc} vs {exact}");
}

#[test]
fn volume_shrinks_while_folding() {
    let p = KreslingParams::new(7, 4, 0.9, 360.0, 80.0).unwrap();
    let g = derive_segment(&p, Stability::Any).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..=50 {
        let a = g.alpha_deployed + (g.alpha_folded - g.alpha_deployed) * i as f64 / 50.0;
        let v = enclosed_volume(&build_mesh(&p, a).unwrap()).unwrap();
        assert!(v < last);
        last = v;
    }
}

#[test]
fn untwisted_stack_is_a_prism() {
    // lambda = 1 has no twist at the deployed stop: a regular prism
    let p = KreslingParams::new(4, 1, 1.0, 100.0, 0.0).unwrap();
    let g = derive_segment(&p, Stability::Any).unwrap();
    let mesh = build_mesh(&p, g.alpha_deployed).unwrap();
    let h = mesh.vertices[4][2];
    let side = 2.0 * 100.0 * (std::f64::consts::PI / 4.0).sin();
    let prism = side * side * h;
    assert!((signed_volume_mm3(&mesh) - prism).abs() / prism < 1e-12);
}
