use eikonal_depth::analysis::{fit_scatter, tukey_depth_2d};
use eikonal_depth::graph::{
    build_kernel_graph, path_depth, pointcloud_eikonal, scheme_update, Kernel, KernelSpec, WeightedGraph,
};
use eikonal_depth::grid::{fast_marching, fast_marching_trace, level_set, local_update};
use eikonal_depth::{BoundaryCondition, GridSpec, PhiSpec, PointCloud};
use proptest::collection::vec;
use proptest::prelude::*;

fn cloud(dim: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = PointCloud> {
    vec(vec(-1.0f64..1.0, dim), n).prop_map(|rows| PointCloud::from_rows(&rows))
}

/// Random graph on up to `max_n` nodes with at least one boundary node.
fn small_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), vec((0..n, 0..n, 0.05f64..3.0), 0..3 * n), vec(any::<bool>(), n), 0..n))
        .prop_map(|(n, raw, mut mask, forced)| {
            let edges: Vec<_> = raw.into_iter().filter(|(i, j, _)| i != j).collect();
            let mut g = WeightedGraph::from_edges(n, &edges).unwrap();
            mask[forced] = true;
            g.set_boundary_mask(mask).unwrap();
            g
        })
}

fn enumerate(g: &WeightedGraph) -> Vec<f64> {
    fn walk(g: &WeightedGraph, node: usize, cost: f64, seen: &mut [bool], best: &mut [f64]) {
        best[node] = best[node].min(cost);
        for (j, w) in g.neighbors(node) {
            if !seen[j] {
                seen[j] = true;
                walk(g, j, cost + w * (g.density()[node] + g.density()[j]) / 2.0, seen, best);
                seen[j] = false;
            }
        }
    }
    let mut best = vec![f64::INFINITY; g.len()];
    for b in g.boundary_nodes() {
        let mut seen = vec![false; g.len()];
        seen[b] = true;
        walk(g, b, 0.0, &mut seen, &mut best);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_nondecreasing(alpha in 0.05f64..4.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let phi = PhiSpec::new(alpha).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(phi.apply(lo) <= phi.apply(hi));
        prop_assert_eq!(phi.apply(0.0), 0.0);
    }

    #[test]
    fn local_update_solves_and_is_monotone(
        a in vec(prop::option::of(0.0f64..2.0), 1..4),
        bump in 0.0f64..0.5,
        axis in 0usize..4,
        f in 0.0f64..3.0,
        h in 0.01f64..0.5,
    ) {
        prop_assume!(a.iter().any(|x| x.is_some()));
        let u = local_update(&a, f, h).unwrap();
        let finite: Vec<f64> = a.iter().flatten().copied().collect();
        let g: f64 = finite.iter().map(|&x| (u - x).max(0.0).powi(2)).sum();
        prop_assert!((g - (h * f).powi(2)).abs() <= 1e-9 * (1.0 + (h * f).powi(2)));
        prop_assert!(u >= finite.iter().copied().fold(f64::INFINITY, f64::min));

        let mut raised = a.clone();
        let k = axis % raised.len();
        if let Some(v) = raised[k].as_mut() {
            *v += bump;
        }
        prop_assert!(local_update(&raised, f, h).unwrap() >= u - 1e-15);
        prop_assert!(local_update(&a, f + bump, h).unwrap() >= u - 1e-15);
    }

    #[test]
    fn grid_comparison_principle(
        f1 in vec(0.0f64..2.0, 81),
        extra in vec(0.0f64..1.0, 81),
    ) {
        let grid = GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], 9).unwrap();
        let f2: Vec<f64> = f1.iter().zip(&extra).map(|(a, b)| a + b).collect();
        let u1 = fast_marching(&grid, &f1, &BoundaryCondition::ZeroOnBoxEdge).unwrap();
        let u2 = fast_marching(&grid, &f2, &BoundaryCondition::ZeroOnBoxEdge).unwrap();
        for (a, b) in u1.values().iter().zip(u2.values()) {
            prop_assert!(*a <= b + 1e-12);
        }
    }

    #[test]
    fn fast_marching_accepts_in_order(f in vec(0.0f64..2.0, 121)) {
        let grid = GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], 11).unwrap();
        let (field, order) = fast_marching_trace(&grid, &f, &BoundaryCondition::ZeroOnBoxEdge).unwrap();
        prop_assert_eq!(order.len(), grid.len());
        for w in order.windows(2) {
            prop_assert!(field.values()[w[0]] <= field.values()[w[1]]);
        }
    }

    #[test]
    fn level_set_vertices_lie_on_the_level(f in vec(0.2f64..2.0, 289), frac in 0.1f64..0.9) {
        let grid = GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], 17).unwrap();
        let field = fast_marching(&grid, &f, &BoundaryCondition::ZeroOnBoxEdge).unwrap();
        let c = frac * field.max();
        for line in level_set(&field, c).unwrap() {
            for p in &line.points {
                // Vertices sit on cell edges, where interpolation is linear.
                prop_assert!((field.depth_at(p).unwrap() - c).abs() <= 1e-9 * (1.0 + c));
            }
        }
    }

    #[test]
    fn scheme_update_solves_and_is_monotone(
        nbrs in vec((0.0f64..2.0, 0.01f64..5.0), 1..8),
        rho in 0.0f64..3.0,
        k in 0usize..8,
        bump in 0.0f64..0.5,
    ) {
        let mut work = nbrs.clone();
        let u = scheme_update(&mut work, rho).unwrap();
        let g: f64 = nbrs.iter().map(|&(v, c)| c * (u - v).max(0.0).powi(2)).sum();
        prop_assert!((g - rho * rho).abs() <= 1e-9 * (1.0 + rho * rho));
        let mut raised = nbrs.clone();
        let k = k % raised.len();
        raised[k].0 += bump;
        prop_assert!(scheme_update(&mut raised, rho).unwrap() >= u - 1e-12);
    }

    #[test]
    fn whitening_is_affine_invariant(
        pts in cloud(2, 12..40),
        a in vec(-2.0f64..2.0, 4),
        shift in vec(-5.0f64..5.0, 2),
    ) {
        let det = a[0] * a[3] - a[1] * a[2];
        prop_assume!(det.abs() > 0.1);
        let Ok(t) = fit_scatter(&pts) else { return Ok(()); };
        let moved = pts.map(2, |p| vec![a[0] * p[0] + a[1] * p[1] + shift[0], a[2] * p[0] + a[3] * p[1] + shift[1]]);
        let t2 = fit_scatter(&moved).unwrap();
        // Whitened clouds agree up to an orthogonal map, so norms match.
        for (p, q) in pts.iter().zip(moved.iter()) {
            let (x, y) = (t.whiten_point(p), t2.whiten_point(q));
            let (nx, ny) = (x[0].hypot(x[1]), y[0].hypot(y[1]));
            prop_assert!((nx - ny).abs() <= 1e-7 * (1.0 + nx));
        }
    }

    #[test]
    fn tukey_depth_is_bounded_and_refines(pts in cloud(2, 1..60), q in vec(-1.5f64..1.5, 2)) {
        let n = pts.len() as f64;
        let coarse = tukey_depth_2d(&pts, [q[0], q[1]], 64).unwrap();
        let fine = tukey_depth_2d(&pts, [q[0], q[1]], 128).unwrap();
        prop_assert!(fine <= coarse);
        prop_assert!((0.0..=0.5 + 1.0 / n).contains(&fine));
    }

    #[test]
    fn dijkstra_matches_enumeration(mut g in small_graph(8), rho in vec(0.0f64..2.0, 8)) {
        let n = g.len();
        g.set_density(rho[..n].to_vec()).unwrap();
        let d = path_depth(&g).unwrap();
        prop_assert_eq!(d.values, enumerate(&g));
    }

    #[test]
    fn path_depth_comparison(mut g in small_graph(10), r1 in vec(0.0f64..2.0, 10), r2 in vec(0.0f64..1.0, 10)) {
        let n = g.len();
        g.set_density(r1[..n].to_vec()).unwrap();
        let d1 = path_depth(&g).unwrap();
        g.set_density(r1[..n].iter().zip(&r2).map(|(a, b)| a + b).collect()).unwrap();
        let d2 = path_depth(&g).unwrap();
        for (a, b) in d1.values.iter().zip(&d2.values) {
            prop_assert!(a.is_infinite() && b.is_infinite() || *a <= b + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn difference_scheme_comparison(
        pts in cloud(2, 60..120),
        r1 in vec(0.0f64..2.0, 120),
        r2 in vec(0.0f64..1.0, 120),
    ) {
        let n = pts.len();
        let h = 0.5;
        let mut g = build_kernel_graph(&pts, &KernelSpec::new(Kernel::Indicator, h, 2).unwrap(), n).unwrap();
        g.set_boundary_where(|p| p[0].abs().max(p[1].abs()) > 0.8).unwrap_or(0);
        prop_assume!(g.boundary().iter().any(|&b| b));
        g.set_density(r1[..n].to_vec()).unwrap();
        let d1 = pointcloud_eikonal(&g, h).unwrap();
        g.set_density(r1[..n].iter().zip(&r2).map(|(a, b)| a + b).collect()).unwrap();
        let d2 = pointcloud_eikonal(&g, h).unwrap();
        for (a, b) in d1.values.iter().zip(&d2.values) {
            prop_assert!(a.is_infinite() && b.is_infinite() || *a <= b + 1e-12, "{a} > {b}");
        }
    }

    #[test]
    fn graph_depth_is_rotation_invariant(pts in cloud(2, 40..100), angle in 0.0f64..std::f64::consts::TAU) {
        let n = pts.len();
        let h = 0.5;
        let spec = KernelSpec::new(Kernel::Gaussian4, h, 2).unwrap();
        let (s, c) = angle.sin_cos();
        let rotated = pts.map(2, |p| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]);
        let mask: Vec<bool> = pts.iter().map(|p| p[0].hypot(p[1]) > 0.8).collect();
        prop_assume!(mask.iter().any(|&b| b));
        let mut depths = Vec::new();
        for cloud in [&pts, &rotated] {
            let mut g = build_kernel_graph(cloud, &spec, n).unwrap();
            g.set_boundary_mask(mask.clone()).unwrap();
            depths.push((path_depth(&g).unwrap(), pointcloud_eikonal(&g, h).unwrap()));
        }
        for (x, y) in [(&depths[0].0, &depths[1].0), (&depths[0].1, &depths[1].1)] {
            prop_assert_eq!(&x.reached, &y.reached);
            for (a, b) in x.values.iter().zip(&y.values) {
                prop_assert!(a == b || (a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }
}
