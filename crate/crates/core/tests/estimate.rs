mod common;

use std::f64::consts::PI;

use common::{dense_solve, segment_rule, triangle_rule};
use hho_core::estimate::*;
use hho_core::local::{DofLayout, StabilizationVariant};
use hho_core::mesh::{Domain, Mesh, Point};
use hho_core::poly::ScalarField;
use hho_core::system::{assemble, interpolate_global, solve_gevp, solve_source, DofMap};
use hho_core::HhoError;
use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_triangle() -> Mesh {
    Mesh::build_initial(&Domain::Custom {
        points: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
        cells: vec![[0, 1, 2]],
    })
    .unwrap()
}

fn square(levels: usize) -> Mesh {
    let mut m = Mesh::build_initial(&Domain::UnitSquare).unwrap();
    for _ in 0..levels {
        m = m.refine_uniform();
    }
    m
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn oscillation_vanishes_for_constants_and_polynomials() {
    let mesh = square(2);
    for ell in 0..4 {
        assert!(oscillation(&|_| 1.0, &mesh, ell).unwrap().iter().all(|v| v.abs() < 1e-28));
    }
    let cubic = |p: Point| 1.0 + p.x * p.y * p.y - 3.0 * p.x.powi(3);
    assert!(oscillation(&cubic, &mesh, 3).unwrap().iter().all(|v| v.abs() < 1e-26));
    assert!(oscillation(&cubic, &mesh, 2).unwrap().iter().any(|v| *v > 1e-14));
}

#[test]
fn oscillation_matches_quadrature_oracle() {
    let mesh = reference_triangle();
    let f = |p: Point| (PI * p.x).sin();
    let got = oscillation(&f, &mesh, 2).unwrap()[0];

    // L2 projection onto P2 with monomials and a Gauss rule
    let v = mesh.cell_points(0);
    let rule = triangle_rule(&v, 20);
    let mono: Vec<(i32, i32)> = vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    let phi = |p: Point, (a, b): (i32, i32)| p.x.powi(a) * p.y.powi(b);
    let mut g = vec![vec![0.0; 6]; 6];
    let mut rhs = vec![0.0; 6];
    for &(p, w) in &rule {
        for i in 0..6 {
            rhs[i] += w * f(p) * phi(p, mono[i]);
            for j in 0..6 {
                g[i][j] += w * phi(p, mono[i]) * phi(p, mono[j]);
            }
        }
    }
    let c = dense_solve(g, rhs);
    let mut res = 0.0;
    for &(p, w) in &rule {
        let proj: f64 = (0..6).map(|i| c[i] * phi(p, mono[i])).sum();
        res += w * (f(p) - proj).powi(2);
    }
    let expected = 2f64.sqrt().powi(4) * res;
    assert!((got - expected).abs() <= 1e-10 * expected, "{got} vs {expected}");
}

#[test]
fn mu_jumps_vanish_for_zero() {
    let mesh = square(1);
    let layout = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
    let j = mu_jumps(&mesh, &sys, &vec![0.0; sys.dim()]).unwrap();
    assert!(j.iter().all(|f| f.mu() == 0.0 && f.extra() == 0.0));
}

#[test]
fn mu_jumps_vanish_for_reproduced_polynomials() {
    // two cells sharing one facet, free boundary: jumps of R I p cancel inside
    let mesh = Mesh::build_initial(&Domain::UnitSquare).unwrap();
    let layout = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
    let p = hho_core::poly::Polynomial::new(vec![(0, 0, 0.3), (1, 1, -1.0), (3, 0, 0.5), (1, 2, 2.0)]);
    let recon: Vec<Vec<f64>> = sys.elements.iter().map(|el| el.reconstruct(&el.interpolate(&p).unwrap().data)).collect();
    let interior = mesh.facets.iter().position(|f| f.minus.is_some()).unwrap();
    let f = &mesh.facets[interior];
    let [a, b] = mesh.facet_points(interior);
    for (q, _) in segment_rule(a, b, 6) {
        let ja = sys.elements[f.plus].basis.eval_combination(&recon[f.plus], q, 1).unwrap();
        let jb = sys.elements[f.minus.unwrap()].basis.eval_combination(&recon[f.minus.unwrap()], q, 1).unwrap();
        assert!((ja.value() - p.value(q)).abs() < 1e-12);
        assert!((ja.value() - jb.value()).abs() < 1e-12);
        assert!((ja.directional(f.normal) - jb.directional(f.normal)).abs() < 1e-11);
    }
}

#[test]
fn mu_jumps_match_facet_quadrature_oracle() {
    let mesh = square(1);
    for k in [0, 1, 2] {
        let layout = DofLayout::new(k, None).unwrap();
        let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
        let u = random_vector(sys.dim(), 11 + k as u64);
        let got = mu_jumps(&mesh, &sys, &u).unwrap();
        let recon = reconstructions(&sys, &u);
        for (id, f) in mesh.facets.iter().enumerate() {
            let [a, b] = mesh.facet_points(id);
            let (mut v, mut n) = (0.0, 0.0);
            for (q, w) in segment_rule(a, b, 10) {
                let eval = |c: usize| sys.elements[c].basis.eval_combination(&recon[c], q, 1).unwrap();
                let plus = eval(f.plus);
                let (mut jv, mut jn) = (plus.value(), plus.gradient().dot(f.normal));
                if let Some(m) = f.minus {
                    let minus = eval(m);
                    jv -= minus.value();
                    jn -= minus.gradient().dot(f.normal);
                }
                v += w * jv * jv;
                n += w * jn * jn;
            }
            let h = (b - a).norm();
            let expected = v / h.powi(3) + n / h;
            assert!((got[id].mu() - expected).abs() <= 1e-10 * expected.max(1e-300), "k={k} facet {id}");
        }
    }
}

#[test]
fn estimators_vanish_for_zero_solution() {
    let mesh = square(1);
    for (k, ell) in [(0, Some(0)), (1, None)] {
        let layout = DofLayout::new(k, ell).unwrap();
        let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
        let zero = vec![0.0; sys.dim()];
        let (eta, _, _) = eta_source(&mesh, &sys, &zero, &|_| 1.0).unwrap();
        if ell == Some(0) {
            // the volume residual sees the load itself
            assert!((eta - (sys.elements.iter().map(|e| e.geometry.diameter.powi(4) * e.geometry.area).sum::<f64>()).sqrt()).abs() < 1e-13);
        } else {
            assert!(eta < 1e-14);
        }
        let (eta_hat, _, ind) = eta_eigen(&mesh, &sys, &zero).unwrap();
        assert_eq!(eta_hat, 0.0);
        assert!(ind.squared().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn branch_selection_by_cell_degree() {
    let mesh = square(1);
    let f = |p: Point| (PI * p.x).sin() * p.y;
    let low = DofLayout::new(0, Some(0)).unwrap();
    let sys = assemble(&mesh, low, StabilizationVariant::Source, None).unwrap();
    let u = random_vector(sys.dim(), 3);
    let (_, c, _) = eta_source(&mesh, &sys, &u, &f).unwrap();
    assert!(c.mu > 0.0 && c.stabilization > 0.0 && c.extra_jumps > 0.0 && c.residual > 0.0);
    assert_eq!(c.oscillation, 0.0);

    let high = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, high, StabilizationVariant::Source, None).unwrap();
    let u = random_vector(sys.dim(), 4);
    let (eta, c, ind) = eta_source(&mesh, &sys, &u, &f).unwrap();
    assert!(c.mu > 0.0 && c.stabilization > 0.0 && c.oscillation > 0.0);
    assert_eq!((c.extra_jumps, c.residual), (0.0, 0.0));
    assert!((eta * eta - c.total()).abs() <= 1e-12 * c.total());
    // interior facets are counted twice locally
    assert!(ind.squared().iter().sum::<f64>() >= c.total());
}

#[test]
fn eigen_estimator_matches_components() {
    let mesh = square(1);
    let layout = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, layout, StabilizationVariant::eigen(0.4086).unwrap(), None).unwrap();
    let u = random_vector(sys.dim(), 9);
    let (eta, c, ind) = eta_eigen(&mesh, &sys, &u).unwrap();
    let mu: f64 = mu_jumps(&mesh, &sys, &u).unwrap().iter().map(FacetJumps::mu).sum();
    let mut stab = 0.0;
    for (cell, el) in sys.elements.iter().enumerate() {
        let x = sys.local(cell, &u);
        let s = &el.stabilization.matrix;
        let v: f64 = (0..x.len()).map(|i| (0..x.len()).map(|j| x[i] * s[(i, j)] * x[j]).sum::<f64>()).sum();
        assert!((v - ind.stabilization[cell]).abs() <= 1e-9 * v);
        stab += v;
    }
    assert!((eta * eta - mu - stab).abs() <= 1e-9 * eta * eta);
    assert!(eta * eta >= c.stabilization);
    assert_eq!(c.oscillation, 0.0);
}

#[test]
fn exact_errors_of_zero_solution() {
    let mesh = square(3);
    let layout = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
    let e = exact_errors(&sys, &vec![0.0; sys.dim()], &SinSquared).unwrap();
    // ‖∇²u‖² = 2π⁴ and ‖u‖ = 3/8 for sin²(πx) sin²(πy)
    assert!((e.energy - 2f64.sqrt() * PI * PI).abs() <= 1e-10 * e.energy);
    assert!((e.l2_cell - 0.375).abs() < 1e-4);
}

#[test]
fn manufactured_load_is_the_bilaplacian() {
    let h = 1e-2;
    for p in [Point::new(0.3, 0.7), Point::new(0.55, 0.1)] {
        let lap = |q: Point| {
            let [xx, _, yy] = SinSquared.hessian(q);
            xx + yy
        };
        let fd = (lap(Point::new(p.x + h, p.y)) + lap(Point::new(p.x - h, p.y)) + lap(Point::new(p.x, p.y + h)) + lap(Point::new(p.x, p.y - h))
            - 4.0 * lap(p))
            / (h * h);
        assert!((fd - SinSquared.load(p)).abs() < 1e-3 * SinSquared.load(p).abs().max(1.0) * 10.0);
    }
}

#[test]
fn exact_errors_match_quadrature_oracle() {
    let mesh = square(2);
    let layout = DofLayout::new(1, None).unwrap();
    let load = |p: Point| SinSquared.load(p);
    let sys = assemble(&mesh, layout, StabilizationVariant::Source, Some(&load)).unwrap();
    let u = solve_source(&sys).unwrap();
    let got = exact_errors(&sys, &u.data, &SinSquared).unwrap();
    let recon = reconstructions(&sys, &u.data);
    let mut e2 = 0.0;
    for (c, el) in sys.elements.iter().enumerate() {
        for (p, w) in triangle_rule(&el.geometry.vertices, 16) {
            let jet = el.basis.eval_combination(&recon[c], p, 2).unwrap();
            let [xx, xy, yy] = SinSquared.hessian(p);
            e2 += w * ((xx - jet.partial(2, 0)).powi(2) + 2.0 * (xy - jet.partial(1, 1)).powi(2) + (yy - jet.partial(0, 2)).powi(2));
        }
    }
    assert!((got.energy - e2.sqrt()).abs() <= 1e-8 * got.energy, "{} vs {}", got.energy, e2.sqrt());
}

#[test]
fn interpolated_solution_has_best_approximation_energy() {
    let mesh = square(2);
    let layout = DofLayout::new(1, None).unwrap();
    let sys = assemble(&mesh, layout, StabilizationVariant::Source, None).unwrap();
    let dm = DofMap::new(&mesh, layout);
    let iu = interpolate_global(&mesh, &dm, &SinSquared).unwrap();
    let e = exact_errors(&sys, &iu.data, &SinSquared).unwrap();
    let zero = exact_errors(&sys, &vec![0.0; sys.dim()], &SinSquared).unwrap();
    assert!(e.energy < 0.2 * zero.energy);
}

#[test]
fn dorfler_examples() {
    assert_eq!(dorfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.5).unwrap(), vec![0, 1]);
    assert_eq!(dorfler_mark(&[1.0, 3.0, 4.0, 2.0], 0.5).unwrap(), vec![1, 2]);
    assert_eq!(dorfler_mark(&[1.0, 0.0, 2.0, 0.0, 3.0], 1.0).unwrap(), vec![0, 2, 4]);
    // ties go to the lower id
    assert_eq!(dorfler_mark(&[1.0, 1.0, 1.0, 1.0], 0.5).unwrap(), vec![0, 1]);
    for theta in [0.0, -0.1, 1.5, f64::NAN] {
        assert!(matches!(dorfler_mark(&[1.0], theta), Err(HhoError::InvalidParameter { name: "theta", .. })));
    }
    assert!(dorfler_mark(&[1.0, -1.0], 0.5).is_err());
}

fn brute_force_min(sq: &[f64], theta: f64) -> usize {
    let total: f64 = sq.iter().sum();
    let n = sq.len();
    (0u32..1 << n)
        .filter(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| sq[i]).sum::<f64>() >= theta * total * (1.0 - 1e-12))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

proptest! {
    #[test]
    fn dorfler_is_minimal(sq in prop::collection::vec(0.0f64..10.0, 1..=12), theta in 0.01f64..=1.0) {
        let marked = dorfler_mark(&sq, theta).unwrap();
        let total: f64 = sq.iter().sum();
        let sum: f64 = marked.iter().map(|&i| sq[i]).sum();
        prop_assert!(sum >= theta * total * (1.0 - 1e-12));
        prop_assert_eq!(marked.len(), brute_force_min(&sq, theta));
    }
}

fn history(points: &[(usize, f64, f64)]) -> ConvergenceHistory {
    ConvergenceHistory {
        rows: points
            .iter()
            .enumerate()
            .map(|(i, &(ndof, hmax, e))| HistoryRow {
                step: i,
                ndof,
                hmax,
                energy_err: Some(e),
                ..Default::default()
            })
            .collect(),
    }
}

#[test]
fn eoc_examples() {
    let h = history(&[(100, 0.5, 1e-1), (400, 0.25, 2.5e-2)]);
    let r = eoc(&h, Column::EnergyErr, Abscissa::SqrtNdof);
    assert!((r[0] - 2.0).abs() < 1e-12);
    let h = history(&[(10, 1.0, 3.0), (20, 0.5, 3.0), (40, 0.25, 3.0)]);
    assert!(eoc(&h, Column::EnergyErr, Abscissa::Ndof).iter().all(|r| *r == 0.0));
    let h = history(&[(10, 1.0, 1.0), (40, 0.5, 0.5), (160, 0.25, 0.25)]);
    assert!(eoc(&h, Column::EnergyErr, Abscissa::H).iter().all(|r| (r - 1.0).abs() < 1e-12));
    let series: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, (i as f64).powf(-1.5))).collect();
    assert!((fitted_rate(&series) - 1.5).abs() < 1e-12);
    assert!(eoc(&h, Column::LambdaH, Abscissa::H).is_empty());
}

#[test]
fn csv_layout() {
    let mut h = history(&[(10, 1.0, 1.0), (40, 0.5, 0.5)]);
    h.rows[0].seconds = 1.5;
    let csv = h.to_csv(false);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 9);
    assert_eq!(first[1], "10");
    assert_eq!(first[3], "");
    assert_eq!(first[8], "");
    assert!(h.to_csv(true).lines().nth(1).unwrap().ends_with(",1.500000"));
    assert!(h.components_csv().starts_with(COMPONENTS_HEADER));
}

#[test]
fn adaptive_source_on_lshape() {
    let mesh = Mesh::build_initial(&Domain::LShape).unwrap();
    let layout = DofLayout::new(0, None).unwrap();
    let mut last = None;
    let run = SourceRun {
        layout,
        strategy: Strategy::Adaptive { theta: 0.5 },
        max_ndof: 20_000,
        load: &|_| 1.0,
        exact: None,
    };
    let h = run_source(mesh, &run, &mut |m, _| last = Some(m.clone())).unwrap();
    assert!(h.rows.windows(2).all(|w| w[0].ndof < w[1].ndof));
    assert!(h.rows.iter().all(|r| r.ndof <= 20_000));
    let tail: Vec<f64> = h.rows[h.rows.len() - 5..].iter().map(|r| r.eta.unwrap()).collect();
    assert!(tail.windows(2).all(|w| w[1] <= 1.05 * w[0]), "{tail:?}");

    let last_row = h.rows.last().unwrap();
    assert!(last_row.ndof >= 10_000);
    // cell density near the reentrant corner relative to the domain average
    let mesh = last.unwrap();
    let density = |r: f64| {
        let near = (0..mesh.num_cells()).filter(|&c| mesh.centroid(c).norm() < r).count() as f64;
        let area = 0.75 * PI * r * r;
        (near / mesh.num_cells() as f64) / (area / 3.0)
    };
    assert!(density(0.25) >= 2.0, "{}", density(0.25));
    assert!(density(0.1) >= 5.0, "{}", density(0.1));
}

#[test]
fn estimator_tracks_the_error_under_uniform_refinement() {
    let mesh = square(0);
    let run = SourceRun {
        layout: DofLayout::new(1, None).unwrap(),
        strategy: Strategy::Uniform,
        max_ndof: 40_000,
        load: &|p| SinSquared.load(p),
        exact: Some(&SinSquared),
    };
    let h = run_source(mesh, &run, &mut |_, _| {}).unwrap();
    assert!(h.rows.len() >= 6);
    // the stabilization dominates on the three coarsest meshes
    let tail = &h.rows[3..];
    let ratios: Vec<f64> = tail.iter().map(|r| r.eta.unwrap() / r.energy_err.unwrap()).collect();
    let stab: Vec<f64> = tail.iter().map(|r| r.components.stabilization.sqrt() / r.energy_err.unwrap()).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    println!("eta / energy error in [{lo:.3}, {hi:.3}]");
    assert!(lo > 1.0 && hi / lo < 2.0, "{ratios:?}");
    assert!(stab.iter().all(|s| *s < 15.0), "{stab:?}");
}

#[test]
fn eigen_estimator_tracks_eigenvalue_error() {
    // first eigenvalue of the clamped unit square
    let lambda = 1294.933_979_5;
    // the two coarsest meshes are preasymptotic
    let mut mesh = square(3);
    let layout = DofLayout::new(0, None).unwrap();
    let variant = StabilizationVariant::eigen(0.4086).unwrap();
    let mut ratios = Vec::new();
    for _ in 0..3 {
        let sys = assemble(&mesh, layout, variant, None).unwrap();
        let sol = solve_gevp(&sys, 1, None).unwrap();
        let (eta, _, _) = eta_eigen(&mesh, &sys, &sol.pairs[0].vector).unwrap();
        ratios.push(eta * eta / (lambda - sol.pairs[0].value).abs());
        mesh = mesh.refine_uniform();
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    println!("eta_hat^2 / eigenvalue error in [{lo:.3}, {hi:.3}]");
    assert!(lo > 0.0 && hi / lo < 3.0, "{ratios:?}");
}

#[test]
fn eigen_loop_respects_the_lower_bound() {
    let run = EigenRun {
        layout: DofLayout::new(0, None).unwrap(),
        strategy: Strategy::Adaptive { theta: 0.5 },
        max_ndof: 3000,
        sigma: 0.4086,
        index: 1,
    };
    let mut cells = Vec::new();
    let (h, bound) = run_eigen(Mesh::build_initial(&Domain::LShape).unwrap(), &run, &mut |m, _| cells.push(m.num_cells())).unwrap();
    let alpha = bound.unwrap().alpha;
    assert!((alpha - 0.75).abs() < 1e-4);
    for (i, r) in h.rows.iter().enumerate() {
        let (lam, leb) = (r.lambda_h.unwrap(), r.leb.unwrap());
        assert!(leb <= lam);
        let beta = r.hmax.powi(4) / PI.powi(4);
        if alpha + beta * lam <= 1.0 {
            assert_eq!(leb, lam);
        } else if i + 1 < h.rows.len() {
            assert_eq!(r.marked, None);
            assert_eq!(cells[i + 1], 4 * cells[i]);
        }
    }
}

#[test]
fn eigen_loop_refines_uniformly_while_the_bound_is_indirect() {
    // α > 1 keeps α + β λ_h above one on every mesh
    let run = EigenRun {
        layout: DofLayout::new(0, None).unwrap(),
        strategy: Strategy::Adaptive { theta: 0.5 },
        max_ndof: 2000,
        sigma: 0.6,
        index: 1,
    };
    let mut cells = Vec::new();
    let (h, bound) = run_eigen(Mesh::build_initial(&Domain::LShape).unwrap(), &run, &mut |m, _| cells.push(m.num_cells())).unwrap();
    assert!(bound.unwrap().alpha > 1.0);
    assert!(h.rows.len() >= 3);
    assert!(h.rows.iter().all(|r| r.marked.is_none() && r.leb.unwrap() < r.lambda_h.unwrap()));
    assert!(cells.windows(2).all(|w| w[1] == 4 * w[0]));
}
