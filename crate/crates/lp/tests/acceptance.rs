//! Randomised soundness suite for the reference simplex solver.
//!
//! Generates feasible bounded programs by construction, checks every claimed
//! optimum against its certificates, validates all reported duals by
//! re-solving with a perturbed right-hand side, and compares objectives on
//! small instances against an independent vertex-enumeration oracle.

use merit_lp::{
    dual_perturbation_check, solve, verify_certificates, LinearProgram, LpOutcome, RowSense,
    Tolerances,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct GenConfig {
    max_cols: usize,
    max_rows: usize,
    allow_equalities: bool,
}

/// Build a random LP that is feasible (a well-interior point is chosen first
/// and right-hand sides are placed around it) and bounded (every column has
/// finite bounds). Equality rows are capped well below the column count so a
/// small right-hand-side perturbation cannot empty the feasible set.
fn random_feasible_lp(rng: &mut ChaCha8Rng, cfg: &GenConfig, tag: usize) -> LinearProgram {
    let n = rng.random_range(2..=cfg.max_cols);
    let m = rng.random_range(1..=cfg.max_rows);
    let mut lp = LinearProgram::new(format!("random_{tag}"));

    let mut cols = Vec::with_capacity(n);
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let upper = rng.random_range(0.5..10.0);
        let obj = rng.random_range(-5.0..5.0);
        cols.push(lp.add_column(format!("x{j}"), 0.0, upper, obj).unwrap());
        x0.push(rng.random_range(0.15..0.85) * upper);
    }

    let mut equalities_left = if cfg.allow_equalities { (n - 1) / 2 } else { 0 };
    for i in 0..m {
        let mut coeffs = Vec::new();
        let mut activity = 0.0;
        for (j, &col) in cols.iter().enumerate() {
            if rng.random_range(0.0..1.0) < 0.7 {
                let v = rng.random_range(-4.0..4.0);
                coeffs.push((col, v));
                activity += v * x0[j];
            }
        }
        if coeffs.is_empty() {
            coeffs.push((cols[0], 1.0));
            activity = x0[0];
        }
        let pick: f64 = rng.random_range(0.0..1.0);
        let (sense, rhs) = if equalities_left > 0 && pick < 0.25 {
            equalities_left -= 1;
            (RowSense::Equal, activity)
        } else if pick < 0.6 {
            (RowSense::LessEq, activity + rng.random_range(0.1..3.0))
        } else {
            (RowSense::GreaterEq, activity - rng.random_range(0.1..3.0))
        };
        lp.add_row(format!("r{i}"), sense, rhs, &coeffs).unwrap();
    }
    lp
}

/// Independent oracle: enumerate all candidate vertices as intersections of
/// `n` active constraints (rows at equality or bounds), keep the feasible
/// ones and take the best objective. Exponential, so only for small programs.
fn vertex_enumeration_minimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_cols();
    // Constraint list as (normal, offset): rows first, then both bounds.
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for (_, row) in lp.rows() {
        let mut a = vec![0.0; n];
        for &(c, v) in &row.coeffs {
            a[c] = v;
        }
        normals.push(a);
        offsets.push(row.rhs);
    }
    for (id, col) in lp.cols() {
        let mut lo = vec![0.0; n];
        lo[id.index()] = 1.0;
        normals.push(lo.clone());
        offsets.push(col.lower);
        normals.push(lo);
        offsets.push(col.upper);
    }

    let total = normals.len();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();

    loop {
        if let Some(x) = solve_square(&normals, &offsets, &subset, n) {
            if point_feasible(lp, &x) {
                let obj = lp.objective_value(&x);
                best = Some(match best {
                    Some(b) if b <= obj => b,
                    _ => obj,
                });
            }
        }
        // Advance the lexicographic combination.
        let mut idx = n;
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if subset[idx] != idx + total - n {
                subset[idx] += 1;
                for k in (idx + 1)..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(
    normals: &[Vec<f64>],
    offsets: &[f64],
    subset: &[usize],
    n: usize,
) -> Option<Vec<f64>> {
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for (r, &ci) in subset.iter().enumerate() {
        a[r * n..(r + 1) * n].copy_from_slice(&normals[ci]);
        b[r] = offsets[ci];
    }
    // Gaussian elimination with partial pivoting.
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            if a[i * n + k].abs() > best {
                best = a[i * n + k].abs();
                piv = i;
            }
        }
        if best < 1e-9 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        for i in (k + 1)..n {
            let f = a[i * n + k] / a[k * n + k];
            if f != 0.0 {
                for c in k..n {
                    a[i * n + c] -= f * a[k * n + c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for c in (k + 1)..n {
            acc -= a[k * n + c] * x[c];
        }
        x[k] = acc / a[k * n + k];
    }
    Some(x)
}

fn point_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let tol = 1e-8;
    for (id, col) in lp.cols() {
        let v = x[id.index()];
        if v < col.lower - tol || v > col.upper + tol {
            return false;
        }
    }
    for (act, (_, row)) in lp.row_activity(x).into_iter().zip(lp.rows()) {
        let scaled = tol * (1.0 + row.rhs.abs());
        let ok = match row.sense {
            RowSense::LessEq => act <= row.rhs + scaled,
            RowSense::Equal => (act - row.rhs).abs() <= scaled,
            RowSense::GreaterEq => act >= row.rhs - scaled,
        };
        if !ok {
            return false;
        }
    }
    true
}

#[test]
fn criterion_3_lp_solver_soundness() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_17);

    let small = GenConfig {
        max_cols: 7,
        max_rows: 5,
        allow_equalities: false,
    };
    let large = GenConfig {
        max_cols: 50,
        max_rows: 30,
        allow_equalities: true,
    };

    let mut checked_duals = 0usize;
    let mut oracle_checked = 0usize;
    for instance in 0..220 {
        let oracle_case = instance % 4 == 0;
        let cfg = if oracle_case { &small } else { &large };
        let lp = random_feasible_lp(&mut rng, cfg, instance);

        let sol = match solve(&lp, &tol).unwrap() {
            LpOutcome::Optimal(sol) => sol,
            other => panic!(
                "instance {instance} should be feasible and bounded, got {:?}",
                other.status()
            ),
        };
        verify_certificates(&lp, &sol, &tol)
            .unwrap_or_else(|breaches| panic!("instance {instance}: {breaches:?}"));

        if oracle_case {
            let oracle = vertex_enumeration_minimum(&lp)
                .unwrap_or_else(|| panic!("instance {instance}: oracle found no vertex"));
            let diff = (oracle - sol.objective).abs();
            assert!(
                diff <= 1e-7 * (1.0 + sol.objective.abs()),
                "instance {instance}: solver {} vs vertex enumeration {oracle}",
                sol.objective
            );
            oracle_checked += 1;
        }

        for (rid, row) in lp.rows() {
            let epsilon = 1e-5 * (1.0 + row.rhs.abs());
            let check = dual_perturbation_check(&lp, rid, epsilon, &tol).unwrap();
            assert!(
                check.agrees,
                "instance {instance} row {}: reported dual {} vs numeric {}",
                row.name, check.reported_dual, check.numeric_dual
            );
            checked_duals += 1;
        }
    }

    assert!(oracle_checked >= 50);
    assert!(checked_duals >= 200);
    println!(
        "acceptance criterion 3 (solver soundness, {oracle_checked} oracle objectives, \
         {checked_duals} dual perturbation checks): PASS"
    );
}

#[test]
fn objective_scaling_scales_duals_and_keeps_the_argmin() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cfg = GenConfig {
        max_cols: 20,
        max_rows: 12,
        allow_equalities: true,
    };
    for instance in 0..40 {
        let lp = random_feasible_lp(&mut rng, &cfg, instance);
        let base = solve(&lp, &tol).unwrap().into_optimal().unwrap();

        let factor = [0.5, 2.0, 7.25][instance % 3];
        let mut scaled = lp.clone();
        scaled.scale_objective(factor);
        let answer = solve(&scaled, &tol).unwrap().into_optimal().unwrap();

        let obj_tol = 1e-7 * (1.0 + base.objective.abs()) * factor.max(1.0);
        assert!(
            (answer.objective - factor * base.objective).abs() <= obj_tol,
            "instance {instance}: objective did not scale by {factor}"
        );
        for (i, (y_scaled, y_base)) in answer.row_duals.iter().zip(&base.row_duals).enumerate() {
            assert!(
                (y_scaled - factor * y_base).abs() <= 1e-6 * (1.0 + y_base.abs()) * factor.max(1.0),
                "instance {instance} row {i}: dual did not scale"
            );
        }
        for (i, (a_scaled, a_base)) in answer.row_activity.iter().zip(&base.row_activity).enumerate()
        {
            assert!(
                (a_scaled - a_base).abs() <= 1e-6 * (1.0 + a_base.abs()),
                "instance {instance} row {i}: constraint activity moved under objective scaling"
            );
        }
    }
}
