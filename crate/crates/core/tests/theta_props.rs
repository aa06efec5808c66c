mod common;

use rand::Rng;
use skewtent::curves::{kneading_bisect_beta, linspace, BisectOptions};
use skewtent::symbolic::{gap_decomposition, KneadingSeq, Symbol};
use skewtent::tentmap::TentParams;
use skewtent::theta::{
    diagonal_critical_betas, first_return_bracket, m1_first_return, theta_eval, theta_eval_with,
    theta_grad, theta_hessian, theta_partial_sum, truncation_stage, Summation, ThetaSpec,
};

use common::{central, random_u_point, rel_close, rng, tent};

fn specs() -> Vec<(&'static str, ThetaSpec)> {
    let mut out: Vec<(&'static str, ThetaSpec)> = ["RLC", "RLLRC", "RLRRC", "RLLRLRC", "RL(RRL)"]
        .iter()
        .map(|w| (*w, ThetaSpec::from_sequence(&w.parse().unwrap()).unwrap()))
        .collect();
    out.push(("thex", ThetaSpec::counterexample()));
    out
}

/// Spec of the observed prefix and the number of its symbols the spec keeps.
fn observed_spec(alpha: f64, beta: f64, depth: usize) -> Option<(ThetaSpec, usize)> {
    let prefix = TentParams::new(alpha, beta).ok()?.kneading_prefix(depth);
    let spec = ThetaSpec::from_prefix(&prefix).ok()?;
    let known = match prefix.iter().position(|&s| s == Symbol::C) {
        Some(c) => c + 1,
        None => prefix.iter().rposition(|&s| s == Symbol::R)? + 1,
    };
    Some((spec, known))
}

fn iterate(alpha: f64, beta: f64, n: usize) -> f64 {
    (0..n).fold(beta, |x, _| tent(alpha, beta, x))
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-5;
    let tol = 1e-5;
    let mut r = rng(11);
    let specs = specs();
    for i in 0..50 {
        let (name, spec) = &specs[i % specs.len()];
        let (a, b) = random_u_point(&mut r, 0.03);
        let f = |x: f64, y: f64| theta_eval(spec, x, y).unwrap().value;
        let g = theta_grad(spec, a, b).unwrap();
        let da = central(|x| f(x, b), a, h);
        let db = central(|y| f(a, y), b, h);
        assert!(
            rel_close(g.d_alpha, da, tol),
            "{name} ({a},{b}): {} vs {da}",
            g.d_alpha
        );
        assert!(
            rel_close(g.d_beta, db, tol),
            "{name} ({a},{b}): {} vs {db}",
            g.d_beta
        );

        let q = theta_hessian(spec, a, b).unwrap().quadratic;
        let gx = |x: f64, y: f64| theta_grad(spec, x, y).unwrap();
        let aa = central(|x| gx(x, b).d_alpha, a, h);
        let ab = central(|y| gx(a, y).d_alpha, b, h);
        let ba = central(|x| gx(x, b).d_beta, a, h);
        let bb = central(|y| gx(a, y).d_beta, b, h);
        assert!(rel_close(q.a, aa, tol), "{name} a: {} vs {aa}", q.a);
        assert!(rel_close(q.b, ab, tol), "{name} b: {} vs {ab}", q.b);
        assert!(rel_close(q.b, ba, tol), "{name} b': {} vs {ba}", q.b);
        assert!(rel_close(q.c, bb, tol), "{name} c: {} vs {bb}", q.c);
    }
}

#[test]
fn theta_vanishes_on_the_diagonal() {
    let mut r = rng(3);
    for (name, spec) in specs() {
        for _ in 0..100 {
            let b = r.random_range(0.5 + 1e-6..1.0);
            let v = theta_eval(&spec, b, b).unwrap().value;
            assert!(v.abs() <= 1e-12, "{name} at {b}: {v}");
            // Second derivative along the diagonal direction.
            let q = theta_hessian(&spec, b, b).unwrap().quadratic;
            assert!(
                q.eval(1.0, 1.0).abs() <= 1e-9 * (1.0 + q.a.abs()),
                "{name} at {b}"
            );
        }
    }
}

#[test]
fn gradient_vanishes_at_diagonal_critical_points() {
    for (name, spec) in specs() {
        let roots = diagonal_critical_betas(&spec, 400).unwrap();
        for b0 in roots {
            let g = theta_grad(&spec, b0, b0).unwrap();
            assert!(g.d_alpha.hypot(g.d_beta) <= 1e-9, "{name} at {b0}: {g:?}");
        }
    }
    let rlc = ThetaSpec::from_sequence(&"RLC".parse().unwrap()).unwrap();
    let roots = diagonal_critical_betas(&rlc, 400).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0] - 2.0 / 3.0).abs() < 1e-12, "{roots:?}");
}

#[test]
fn observed_kneading_sequence_nearly_vanishes() {
    let depth = 48;
    let mut r = rng(5);
    let mut checked = 0;
    for _ in 0..200 {
        let (a, b) = random_u_point(&mut r, 1e-3);
        let Some((spec, known)) = observed_spec(a, b, depth) else {
            continue;
        };
        checked += 1;
        let k = truncation_stage(&spec, known).unwrap();
        let bound = theta_partial_sum(&spec, a, b, k)
            .p_k
            .abs()
            .recip()
            .max(1e-8);
        let v = theta_eval(&spec, a, b).unwrap().value;
        assert!(v.abs() <= bound, "({a},{b}): {v} > {bound}");

        for k in 0..=k.min(6) {
            let ps = theta_partial_sum(&spec, a, b, k);
            let orbit = iterate(a, b, ps.orbit_index);
            assert!(
                (ps.p_k * ps.value - orbit).abs() <= 1e-8,
                "({a},{b}) k={k}: {} vs {orbit}",
                ps.p_k * ps.value
            );
            assert!(ps.value.abs() <= 1.0 / ps.p_k.abs() + 1e-12);
        }
    }
    assert!(checked >= 150, "only {checked} points had usable prefixes");
}

#[test]
fn orbit_recursion_at_a_fixed_point() {
    let (a, b) = (0.6, 0.75);
    let (spec, _) = observed_spec(a, b, 48).unwrap();
    for k in 0..=6 {
        let ps = theta_partial_sum(&spec, a, b, k);
        let orbit = iterate(a, b, ps.orbit_index);
        assert!((ps.p_k * ps.value - orbit).abs() <= 1e-10, "k={k}");
    }
}

#[test]
fn larger_kneading_gives_nonzero_theta() {
    let mut r = rng(9);
    let mut checked = 0;
    while checked < 100 {
        let (a, b) = random_u_point(&mut r, 1e-2);
        let b2 = r.random_range(b..1.0);
        if b2 - b < 0.05 {
            continue;
        }
        let Some((spec, _)) = observed_spec(a, b, 48) else {
            continue;
        };
        checked += 1;
        let v = theta_eval(&spec, a, b2).unwrap().value;
        assert!(v.abs() > 1e-6, "alpha={a} beta={b} beta'={b2}: {v}");
    }
}

#[test]
fn truncated_error_bound_is_sound() {
    let mut r = rng(13);
    for (name, spec) in specs() {
        for _ in 0..20 {
            let (a, b) = random_u_point(&mut r, 0.02);
            for tol in [1e-4, 1e-8] {
                let mode = Summation::Truncated {
                    tol,
                    max_terms: 1_000_000,
                };
                let Ok(t) = theta_eval_with(&spec, a, b, mode) else {
                    continue;
                };
                let refined = theta_eval_with(
                    &spec,
                    a,
                    b,
                    Summation::Truncated {
                        tol: tol * 1e-6,
                        max_terms: 4 * t.terms_used.max(1),
                    },
                );
                let exact = theta_eval(&spec, a, b).unwrap().value;
                assert!(
                    (t.value - exact).abs() <= t.error_bound,
                    "{name} ({a},{b}) tol {tol}"
                );
                if let Ok(refined) = refined {
                    assert!((t.value - refined.value).abs() <= t.error_bound + refined.error_bound);
                }
            }
        }
    }
}

#[test]
fn either_filler_vanishes_on_the_curve() {
    let m: KneadingSeq = "RLC".parse().unwrap();
    let with = |s| ThetaSpec::new(gap_decomposition(&m.filled_with(s)).unwrap()).unwrap();
    let (sr, sl) = (with(Symbol::R), with(Symbol::L));
    for a in [0.56, 0.6, 0.64] {
        let pt = kneading_bisect_beta(&m, a, BisectOptions::default()).unwrap();
        let vr = theta_eval(&sr, a, pt.beta).unwrap().value;
        let vl = theta_eval(&sl, a, pt.beta).unwrap().value;
        assert!(
            vr.abs() <= 1e-10 && vl.abs() <= 1e-10,
            "alpha={a}: {vr} {vl}"
        );
    }
}

#[test]
fn first_return_lies_in_log_bracket() {
    let mut r = rng(17);
    for _ in 0..100 {
        let (a, b) = random_u_point(&mut r, 1e-3);
        let m = m1_first_return(a, b).unwrap() as f64;
        let (lo, hi) = first_return_bracket(a, b);
        assert!(
            lo - 1e-9 <= m && m < hi + 1e-9,
            "({a},{b}): {m} not in [{lo}, {hi})"
        );
    }
    for i in 0..20 {
        let b0 = 0.55 + 0.4 * i as f64 / 19.0;
        let m = m1_first_return(b0 - 1e-7, b0).unwrap() as f64;
        let q = b0 / (1.0 - b0);
        assert!(q - 2.0 < m && m < q + 1.0, "beta0={b0}: {m} vs {q}");
    }
}

#[test]
fn first_return_is_the_first_l_block() {
    let mut r = rng(19);
    for _ in 0..100 {
        let (a, b) = random_u_point(&mut r, 1e-3);
        let k = common::knead(a, b, 2000);
        let ls = k[2..].chars().take_while(|&c| c == 'L').count();
        assert!(k.starts_with("RL"));
        assert_eq!(m1_first_return(a, b).unwrap(), ls + 1, "({a},{b}) {k}");
    }
}

#[test]
fn first_return_grows_along_verticals() {
    let mut r = rng(23);
    for _ in 0..100 {
        let a: f64 = r.random_range(0.01..0.99);
        let betas = linspace(a.max(1.0 - a) + 1e-6, 0.999, 30);
        let ms: Vec<usize> = betas
            .iter()
            .map(|&b| m1_first_return(a, b).unwrap())
            .collect();
        assert!(ms.windows(2).all(|w| w[0] <= w[1]), "alpha={a}: {ms:?}");
    }
    assert_eq!(m1_first_return(0.5, 0.535).unwrap(), 1);
}
