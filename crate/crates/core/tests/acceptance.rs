//! End-to-end acceptance criteria. Each prints one PASS/FAIL line with its runtime.

use std::time::{Duration, Instant};

use gpt_core::axioms::{fit_power_law, KTable, PowerLaw};
use gpt_core::bloch::{
    a_matrix, bloch_coordinates, c_bounds, classify_surface, d2_template, D2Params, SurfaceKind,
};
use gpt_core::composite::{composite_from_density, dof_count_check, local_transform};
use gpt_core::dynamics::{
    check_measurement_update, continuity_probe, is_completely_positive, transpose_superoperator,
    von_neumann_branches, z_from_kraus, KrausSet, Superoperator,
};
use gpt_core::harness::{run_report, simulate, Experiment};
use gpt_core::linalg::{
    c, max_abs_diff, max_abs_diff_c, max_abs_diff_vec, outer, trace_product, CMatrix, RMatrix,
};
use gpt_core::sampling::{haar_state, random_density, random_effect, random_kraus, seeded_rng};
use gpt_core::state::{
    density_from_r, measurement_r_from_operator, probability, MeasurementOperator,
};
use gpt_core::{build_canonical_frame, gram_matrix, DensityOperator, PVector, Theory, TheoryKind};

type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p_of(theory: &Theory, rho: CMatrix) -> PVector {
    theory
        .p_from_density(&DensityOperator::new(rho))
        .expect("dimensions agree")
}

fn d_matrix_reproduction() -> Outcome {
    let d2 = gram_matrix(&build_canonical_frame(2).unwrap()).unwrap();
    let expected = RMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0,
        ],
    );
    let dev = max_abs_diff(d2.matrix(), &expected);
    ensure(dev <= 1e-12, || format!("N=2 deviates by {dev:e}"))?;

    // N=3 in the order 1, 2, 3, 12x, 12y, 13x, 13y, 23x, 23y
    const H: f64 = 0.5;
    const Q: f64 = 0.25;
    #[rustfmt::skip]
    let expected3 = RMatrix::from_row_slice(9, 9, &[
        1.0, 0.0, 0.0, H,   H,   H,   H,   0.0, 0.0,
        0.0, 1.0, 0.0, H,   H,   0.0, 0.0, H,   H,
        0.0, 0.0, 1.0, 0.0, 0.0, H,   H,   H,   H,
        H,   H,   0.0, 1.0, H,   Q,   Q,   Q,   Q,
        H,   H,   0.0, H,   1.0, Q,   Q,   Q,   Q,
        H,   0.0, H,   Q,   Q,   1.0, H,   Q,   Q,
        H,   0.0, H,   Q,   Q,   H,   1.0, Q,   Q,
        0.0, H,   H,   Q,   Q,   Q,   Q,   1.0, H,
        0.0, H,   H,   Q,   Q,   Q,   Q,   H,   1.0,
    ]);
    let frame = build_canonical_frame(3).unwrap();
    let labels: Vec<String> = frame.labels().iter().map(ToString::to_string).collect();
    ensure(
        labels == ["1", "2", "3", "12x", "12y", "13x", "13y", "23x", "23y"],
        || format!("label order {labels:?}"),
    )?;
    let dev = max_abs_diff(gram_matrix(&frame).unwrap().matrix(), &expected3);
    ensure(dev <= 1e-12, || format!("N=3 deviates by {dev:e}"))?;
    Ok(())
}

fn c_bounds_and_determinant() -> Outcome {
    let (lo, hi) = c_bounds(0.5, 0.5);
    ensure(lo.abs() <= 1e-10 && (hi - 1.0).abs() <= 1e-10, || {
        format!("c bounds ({lo}, {hi})")
    })?;
    let det = |c: f64| d2_template(0.5, 0.5, c).determinant();
    let points = 1000;
    let cs: Vec<f64> = (0..points)
        .map(|i| -0.5 + 2.0 * i as f64 / (points - 1) as f64)
        .collect();
    let mut roots = Vec::new();
    for w in cs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if det(x0).signum() != det(x1).signum() {
            let (mut a, mut b) = (x0, x1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if det(m).signum() == det(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    ensure(roots.len() == 2, || {
        format!("found {} sign changes: {roots:?}", roots.len())
    })?;
    ensure(
        (roots[0] - lo).abs() <= 1e-10 && (roots[1] - hi).abs() <= 1e-10,
        || format!("roots {roots:?}"),
    )?;
    for &x in &cs {
        let inside = lo < x && x < hi;
        ensure((det(x) > 0.0) == inside, || {
            format!("det({x}) = {} disagrees with the bounds", det(x))
        })?;
    }
    Ok(())
}

fn bloch_sphere() -> Outcome {
    let theory = Theory::quantum(2).unwrap();
    let a = a_matrix(&D2Params::spherical());
    let mut rng = seeded_rng(3);
    for i in 0..100 {
        let p = p_of(&theory, outer(&haar_state(2, &mut rng)));
        let coords = bloch_coordinates(&theory.r_from_p(&p).unwrap()).unwrap();
        let v = coords.vector();
        let q = (v.transpose() * a * v)[(0, 0)];
        ensure(
            (coords.mu - 1.0).abs() <= 1e-10 && (q - 0.5).abs() <= 1e-10,
            || format!("state {i}: mu = {}, v^T A v = {q}", coords.mu),
        )?;
    }
    let grid = 50;
    for i in 1..=grid {
        for j in 1..=grid {
            let (x, y) = (i as f64 / (grid + 1) as f64, j as f64 / (grid + 1) as f64);
            let (lo, hi) = c_bounds(x, y);
            for k in 1..=grid {
                let cc = lo + (hi - lo) * k as f64 / (grid + 1) as f64;
                let kind = classify_surface(&a_matrix(&D2Params::new(x, y, cc).unwrap())).kind;
                ensure(kind == SurfaceKind::Ellipsoid, || {
                    format!("({x}, {y}, {cc}) classified {kind:?}")
                })?;
            }
        }
    }
    Ok(())
}

fn round_trip_fidelity() -> Outcome {
    let mut rng = seeded_rng(4);
    for n in 2..=4 {
        let theory = Theory::quantum(n).unwrap();
        for i in 0..100 {
            let rho = random_density(n, &mut rng);
            let r = theory.r_from_p(&p_of(&theory, rho.clone())).unwrap();
            let back = density_from_r(&r, theory.frame()).unwrap();
            let dev = max_abs_diff_c(back.matrix(), &rho);
            ensure(dev <= 1e-10, || format!("N={n} sample {i}: {dev:e}"))?;
        }
    }
    for i in 0..100 {
        let n = 2 + i % 3;
        let theory = Theory::quantum(n).unwrap();
        let rho = random_density(n, &mut rng);
        let effect = random_effect(n, &mut rng);
        let expected = trace_product(&effect, &rho).re;
        let r_s = theory.r_from_p(&p_of(&theory, rho)).unwrap();
        let r_m = measurement_r_from_operator(
            &MeasurementOperator::new(effect),
            theory.frame(),
            theory.d(),
        )
        .unwrap();
        let got = probability(&r_m, theory.d(), &r_s).unwrap();
        ensure((got - expected).abs() <= 1e-12, || {
            format!("pair {i}: {got} vs {expected}")
        })?;
    }
    Ok(())
}

fn transformation_correspondence() -> Outcome {
    let mut rng = seeded_rng(5);
    for n in 2..=3 {
        let theory = Theory::quantum(n).unwrap();
        ensure(
            !is_completely_positive(&transpose_superoperator(n)).unwrap(),
            || format!("transpose accepted at N={n}"),
        )?;
        for m in 0..50 {
            let kraus = KrausSet::new(random_kraus(n, 1 + m % 4, &mut rng)).unwrap();
            let z = z_from_kraus(&kraus, theory.frame(), theory.d()).unwrap();
            ensure(
                is_completely_positive(&Superoperator::Kraus(kraus.clone())).unwrap(),
                || format!("Kraus map {m} rejected"),
            )?;
            for s in 0..50 {
                let rho = random_density(n, &mut rng);
                let direct = p_of(&theory, kraus.apply(&rho));
                let via_z = z.matrix() * p_of(&theory, rho).values();
                let dev = max_abs_diff_vec(direct.values(), &via_z);
                ensure(dev <= 1e-10, || format!("N={n} map {m} state {s}: {dev:e}"))?;
            }
        }
    }
    Ok(())
}

fn measurement_update() -> Outcome {
    let theory = Theory::quantum(2).unwrap();
    let branches = von_neumann_branches(&theory).unwrap();
    let mut witnesses = theory.basis_states();
    let mut rng = seeded_rng(6);
    for _ in 0..20 {
        witnesses.push(p_of(&theory, random_density(2, &mut rng)));
    }
    let report = check_measurement_update(&branches, &theory, &witnesses, 1e-12).unwrap();
    ensure(
        report.passed() && report.completeness_deviation.is_some(),
        || format!("{:?}", report.violations),
    )
}

fn composite_law() -> Outcome {
    let theory = Theory::quantum(2).unwrap();
    let frame = theory.frame();
    let mut rng = seeded_rng(7);
    for t in 0..50 {
        let rho = random_density(4, &mut rng);
        let ka = KrausSet::new(random_kraus(2, 2, &mut rng)).unwrap();
        let kb = KrausSet::new(random_kraus(2, 3, &mut rng)).unwrap();
        let mut joint = CMatrix::zeros(4, 4);
        for a in ka.ops() {
            for b in kb.ops() {
                let m = a.kronecker(b);
                joint += &m * &rho * m.adjoint();
            }
        }
        let operator_level = composite_from_density(&joint, frame, frame).unwrap();
        let za = z_from_kraus(&ka, frame, theory.d()).unwrap();
        let zb = z_from_kraus(&kb, frame, theory.d()).unwrap();
        let vector_level = local_transform(
            &composite_from_density(&rho, frame, frame).unwrap(),
            &za,
            &zb,
        )
        .unwrap();
        let dev = max_abs_diff(&operator_level.p, &vector_level.p);
        ensure(dev <= 1e-10, || format!("triple {t}: {dev:e}"))?;
    }
    let rank = dof_count_check(frame, frame).unwrap();
    ensure(rank == 16, || format!("rank {rank}"))
}

fn classical_quantum_dichotomy() -> Outcome {
    let quantum = Theory::quantum(2).unwrap();
    let mut rng = seeded_rng(8);
    for i in 0..20 {
        let mut pure = || {
            quantum
                .r_from_p(&p_of(&quantum, outer(&haar_state(2, &mut rng))))
                .unwrap()
        };
        let (a, b) = (pure(), pure());
        let report = continuity_probe(&a, &b, 100, &quantum).unwrap();
        ensure(report.max_purity_deviation < 1e-9, || {
            format!("pair {i}: deviation {:e}", report.max_purity_deviation)
        })?;
    }
    let classical = Theory::classical(2).unwrap();
    let basis = classical.basis_state_rs();
    let report = continuity_probe(&basis[0], &basis[1], 100, &classical).unwrap();
    ensure(
        !report.pure_path && (report.midpoint_purity - 0.5).abs() <= 1e-12,
        || format!("classical midpoint sum p^2 = {}", report.midpoint_purity),
    )
}

fn power_law() -> Outcome {
    let quantum = fit_power_law(&KTable::from_frames(TheoryKind::Quantum, 6).unwrap()).unwrap();
    ensure(quantum == PowerLaw::Exponent(2), || {
        format!("quantum: {quantum:?}")
    })?;
    let classical = fit_power_law(&KTable::from_frames(TheoryKind::Classical, 6).unwrap()).unwrap();
    ensure(classical == PowerLaw::Exponent(1), || {
        format!("classical: {classical:?}")
    })?;
    let reals = fit_power_law(&KTable::from_fn(6, |n| n * (n + 1) / 2).unwrap()).unwrap();
    ensure(
        matches!(
            reals,
            PowerLaw::NotMultiplicative { m: 2, n: 2 } | PowerLaw::NotMultiplicative { m: 2, n: 3 }
        ),
        || format!("reals: {reals:?}"),
    )
}

fn frequency_convergence() -> Outcome {
    let theory = Theory::quantum(2).unwrap();
    for (i, p_true) in [0.0, 0.25, 0.5, 1.0].into_iter().enumerate() {
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 0)] = c(p_true, 0.0);
        rho[(1, 1)] = c(1.0 - p_true, 0.0);
        let p = p_of(&theory, rho);
        let exp = Experiment::new(
            p,
            None,
            theory.basis_measurements(),
            theory.r_identity().clone(),
            1_000_000,
            90 + i as u64,
        )
        .map_err(|e| e.to_string())?;
        let counts = simulate(&exp).map_err(|e| e.to_string())?;
        let freq = counts.frequency(1);
        ensure((freq - p_true).abs() < 0.005, || {
            format!("p = {p_true}: frequency {freq}")
        })?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 11\n\n[[pipeline]]\nkind = \"simulate\"\nn = 2\np = [0.25, 0.75, 0.5, 0.5]\nshots = 1000000\n\n[[pipeline]]\nkind = \"verify\"\ntheory = \"quantum\"\nn = 2\n",
    )
    .map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        run_report(&config, None, &out).map_err(|e| e.to_string())?;
        reports.push((
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("summary.csv")).unwrap(),
        ));
    }
    ensure(reports[0] == reports[1], || {
        "reports differ between runs with the same seed".into()
    })
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "D-matrix reproduction",
            budget: secs(1),
            run: d_matrix_reproduction,
        },
        Criterion {
            id: 2,
            name: "c-bounds",
            budget: secs(1),
            run: c_bounds_and_determinant,
        },
        Criterion {
            id: 3,
            name: "Bloch sphere",
            budget: secs(5),
            run: bloch_sphere,
        },
        Criterion {
            id: 4,
            name: "round-trip fidelity",
            budget: secs(10),
            run: round_trip_fidelity,
        },
        Criterion {
            id: 5,
            name: "transformation correspondence",
            budget: secs(30),
            run: transformation_correspondence,
        },
        Criterion {
            id: 6,
            name: "measurement update",
            budget: secs(30),
            run: measurement_update,
        },
        Criterion {
            id: 7,
            name: "composite law",
            budget: secs(30),
            run: composite_law,
        },
        Criterion {
            id: 8,
            name: "classical/quantum dichotomy",
            budget: secs(30),
            run: classical_quantum_dichotomy,
        },
        Criterion {
            id: 9,
            name: "power law",
            budget: secs(30),
            run: power_law,
        },
        Criterion {
            id: 10,
            name: "frequency convergence",
            budget: secs(60),
            run: frequency_convergence,
        },
    ];
    let mut failed = Vec::new();
    for criterion in &criteria {
        let start = Instant::now();
        let mut outcome = (criterion.run)();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > criterion.budget {
            outcome = Err(format!("took {elapsed:?}, budget {:?}", criterion.budget));
        }
        match &outcome {
            Ok(()) => println!(
                "PASS  criterion {:>2}: {} ({:.3} s)",
                criterion.id,
                criterion.name,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                println!(
                    "FAIL  criterion {:>2}: {} ({:.3} s): {why}",
                    criterion.id,
                    criterion.name,
                    elapsed.as_secs_f64()
                );
                failed.push(criterion.id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
