use doslb::gaps::{self, AssociatedSet, Bis};
use doslb::instance::{self, combinations, ProblemInstance};
use doslb::numeric::Vector;

fn example() -> ProblemInstance {
    instance::running_example()
}

fn simplex_family() -> Vec<ProblemInstance> {
    vec![
        instance::simplex_mab_instance(&[0.5, 3f64.sqrt() / 4.0, 0.75], &[0.0, 0.0, 1.0], 0.5).unwrap(),
        instance::simplex_mab_instance(&[0.5, 0.25, 0.3], &[0.2, 0.9, 0.4], 0.5).unwrap(),
    ]
}

/// Instances whose basic index sets all have unique associated points.
fn nondegenerate_family() -> Vec<ProblemInstance> {
    let mut out = vec![
        instance::running_example(),
        instance::running_example_with_level(0.1),
        instance::running_example_with_level(0.8),
    ];
    for eps in [0.02, 0.05, 0.1] {
        for s in [1.0, -1.0] {
            out.push(instance::lower_bound_instance(1, eps, &[s]).unwrap());
        }
    }
    out.push(instance::lower_bound_instance(2, 0.05, &[1.0, -1.0]).unwrap());
    out.push(instance::lower_bound_instance(2, 0.1, &[-1.0, -1.0]).unwrap());
    out
}

fn family() -> Vec<ProblemInstance> {
    let mut out = nondegenerate_family();
    out.extend(simplex_family());
    out
}

#[test]
fn running_example_pins() {
    let p = example();
    let report = gaps::xi(&p).unwrap();
    assert_eq!(report.records.len(), 6);
    let status = |b: &[usize]| report.record(&Bis::one_based(b)).unwrap().classification.clone();
    assert!(!status(&[1, 4]).consistent);
    assert!(status(&[3, 4]).optimal);
    assert_eq!(report.records.iter().filter(|r| r.classification.optimal).count(), 1);
    assert_eq!(report.records.iter().filter(|r| !r.classification.consistent).count(), 1);

    assert!((report.x_star[0] - 2.9).abs() <= 1e-9 && (report.x_star[1] - 1.1).abs() <= 1e-9);
    assert!((report.optimal_value - 1.39).abs() <= 1e-9);

    let (delta, spread, big_delta) = gaps::efficiency_parts(&p, &Bis::one_based(&[2, 4])).unwrap();
    assert!((delta - 0.18).abs() <= 1e-9);
    assert!((spread - 3.2).abs() <= 1e-6);
    assert!((big_delta - 0.18 / 3.2).abs() <= 1e-6);
    let gamma = gaps::feasibility_separation(&p, &Bis::one_based(&[2, 3]), 3).unwrap().unwrap();
    assert!((gamma - 0.45).abs() <= 1e-9);
    assert!((gaps::feasibility_gap(&p, &Bis::one_based(&[2, 3])).unwrap() - 0.45).abs() <= 1e-9);
    assert_eq!(gaps::efficiency_gap(&p, &Bis::one_based(&[2, 3])).unwrap(), 0.0);
    assert_eq!(gaps::feasibility_gap(&p, &Bis::one_based(&[2, 4])).unwrap(), 0.0);

    let direct = gaps::spread(&p, &p.theta_star, &[1, 3], &[0]).unwrap();
    assert!((direct.value - 3.2).abs() <= 1e-6);

    // Literal evaluation of the consistency gap of {1,4}.
    assert!((gaps::consistency_gap(&p, &Bis::one_based(&[1, 4])).unwrap() - 0.55).abs() <= 1e-7);
    assert!(report.xi > 0.0);
    assert!((report.xi - 0.05625).abs() <= 1e-7);
    assert_eq!(report.xi_bis, Bis::one_based(&[2, 4]));
}

/// Brute-force separations on a 2000 x 2000 grid over the bounding box of the
/// known triangle, restricted to a 1e-3 band around the equalities of each set.
#[test]
fn grid_oracle_on_running_example() {
    let p = example();
    let n = 2000usize;
    // Slightly wider than the triangle so bands around its corners stay symmetric.
    let (x0, x1, y0, y1) = (-0.01, 4.01, -0.01, 2.01);
    let pts: Vec<[f64; 2]> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| [x0 + (x1 - x0) * i as f64 / n as f64, y0 + (y1 - y0) * j as f64 / n as f64]))
        .collect();
    let known = p.num_known();
    let value = |x: &[f64; 2]| p.theta_star[0] * x[0] + p.theta_star[1] * x[1];
    let row = |k: usize, x: &[f64; 2]| {
        let c = &p.constraints[k];
        c.vector[0] * x[0] + c.vector[1] * x[1] - c.level
    };
    let safe_opt = pts
        .iter()
        .filter(|x| (0..p.num_constraints()).all(|k| row(k, x) <= 1e-12))
        .map(value)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((safe_opt - 1.39).abs() <= 1e-3);

    for idx in combinations(4, 2) {
        let bis = Bis::new(idx.clone());
        let cls = gaps::classify(&p, &bis).unwrap();
        let band: Vec<&[f64; 2]> = pts
            .iter()
            .filter(|x| idx.iter().all(|&i| row(i, x).abs() <= 1e-3))
            .filter(|x| (0..known).filter(|k| !idx.contains(k)).all(|k| row(k, x) <= 1e-12))
            .collect();
        if !cls.consistent {
            assert!(band.is_empty(), "{bis}: inconsistent set has grid points in its band");
            continue;
        }
        assert!(matches!(cls.associated, AssociatedSet::UniquePoint(_)), "{bis}");
        assert!(!band.is_empty(), "{bis}");
        let mean = |f: &dyn Fn(&[f64; 2]) -> f64| band.iter().map(|x| f(x)).sum::<f64>() / band.len() as f64;
        let delta_grid = (safe_opt - mean(&|x| value(x))).max(0.0);
        let (delta, _, _) = gaps::efficiency_parts(&p, &bis).unwrap();
        assert!((delta - delta_grid).abs() <= 1e-3, "{bis}: delta {delta} vs grid {delta_grid}");
        for k in (0..4).filter(|k| !idx.contains(k)) {
            let gamma = gaps::feasibility_separation(&p, &bis, k).unwrap().unwrap();
            let gamma_grid = mean(&|x| row(k, x));
            assert!((gamma - gamma_grid).abs() <= 1e-3, "{bis}, k = {}: gamma {gamma} vs grid {gamma_grid}", k + 1);
        }
    }
}

#[test]
fn suboptimal_consistent_sets_have_a_positive_gap() {
    for p in nondegenerate_family() {
        let report = gaps::xi(&p).unwrap();
        for r in &report.records {
            if r.classification.consistent && !r.classification.optimal {
                assert!(r.efficiency_gap.max(r.feasibility_gap) > 1e-9, "{:?} {}", p.label, r.bis);
            }
            if !r.classification.consistent {
                assert!(r.consistency_gap > 1e-9, "{:?} {}", p.label, r.bis);
            }
            if r.classification.optimal {
                assert_eq!(r.max_gap(), 0.0);
            }
        }
        assert!(report.xi > 0.0);
    }
}

#[test]
fn spread_is_at_least_one() {
    for p in family() {
        let known = p.num_known();
        for idx in combinations(p.num_constraints(), p.d) {
            let rest: Vec<usize> = (0..known).filter(|i| !idx.contains(i)).collect();
            let Ok(s) = gaps::spread(&p, &p.theta_star, &idx, &rest) else { continue };
            assert!(s.value >= 1.0 - 1e-12, "{:?} {:?}", p.label, idx);
            if idx.iter().all(|&i| i < known) {
                assert!((s.value - 1.0).abs() <= 1e-12, "{:?} {:?}: {}", p.label, idx, s.value);
            }
        }
    }
}

#[test]
fn optimality_matches_direct_check() {
    for p in family() {
        let (x_star, _) = p.optimum().unwrap();
        for idx in combinations(p.num_constraints(), p.d) {
            let bis = Bis::new(idx.clone());
            let cls = gaps::classify(&p, &bis).unwrap();
            let tight = idx.iter().all(|&i| (p.constraints[i].vector.dot(&x_star) - p.constraints[i].level).abs() <= 1e-7);
            assert_eq!(cls.optimal, tight, "{:?} {bis}", p.label);
            if tight {
                assert!(cls.consistent);
            }
        }
    }
}

#[test]
fn one_dimensional_lower_bound_by_hand() {
    for eps in [0.02, 0.05, 0.1] {
        for s in [1.0, -1.0] {
            let p = instance::lower_bound_instance(1, eps, &[s]).unwrap();
            let report = gaps::xi(&p).unwrap();
            let a = (1.0 + s * eps) / 2.0;
            // Sets {x = 1}, {x = -1}, {a x = 1/4}: all consistent in one dimension.
            assert!(report.records.iter().all(|r| r.classification.consistent && r.consistency_gap == 0.0));
            let x_star = 0.25 / a;
            assert!((report.x_star[0] - x_star).abs() <= 1e-9);
            let upper = report.record(&Bis::one_based(&[1])).unwrap();
            assert!((upper.feasibility_gap - (a - 0.25)).abs() <= 1e-9);
            let lower = report.record(&Bis::one_based(&[2])).unwrap();
            assert!((lower.efficiency_gap - (x_star + 1.0)).abs() <= 1e-9);
            assert!(report.record(&Bis::one_based(&[3])).unwrap().classification.optimal);
            assert!((report.xi - (a - 0.25)).abs() <= 1e-9);
            assert!(report.xi >= 0.125);
        }
    }
    let two = gaps::xi(&instance::lower_bound_instance(2, 0.05, &[1.0, -1.0]).unwrap()).unwrap();
    assert!(two.xi >= 0.125, "{}", two.xi);
}

#[test]
fn simplex_arm_gaps() {
    let p = instance::simplex_mab_instance(&[0.5, 3f64.sqrt() / 4.0, 0.75], &[0.0, 0.0, 1.0], 0.5).unwrap();
    let arms = gaps::arm_gaps(&p).unwrap();
    assert_eq!(arms.optimal_arm, 0);
    assert!((arms.min_efficiency - (2.0 - 3f64.sqrt()) / 4.0).abs() <= 1e-12);
    assert!((arms.min_feasibility - 0.5).abs() <= 1e-12);
}

#[test]
fn noisy_association_with_exact_regions_finds_the_optimal_set() {
    use doslb::estimation::ConfidenceRegion;
    let p = example();
    let regions: Vec<ConfidenceRegion> = p.constraints.iter().map(|c| ConfidenceRegion::singleton(c.vector.clone())).collect();
    let levels: Vec<f64> = p.constraints.iter().map(|c| c.level).collect();
    let sets = gaps::noisy_association(&regions, &levels, &Vector::from([2.9, 1.1])).unwrap();
    assert_eq!(sets, vec![Bis::one_based(&[3, 4])]);
}

#[test]
fn simplex_embedding_is_degenerate() {
    // The budget equality is two opposite rows, so sets holding both describe
    // a face rather than a point.
    for p in simplex_family() {
        let report = gaps::xi(&p).unwrap();
        assert!(report.records.iter().any(|r| matches!(r.classification.associated, AssociatedSet::AffinePiece(_))));
        assert!(report.xi > 0.0);
    }
}
