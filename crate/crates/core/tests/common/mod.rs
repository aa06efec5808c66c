//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own implementations of the quantities being checked.
#![allow(dead_code)]

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point of U kept `margin` away from its edges.
pub fn random_u_point(rng: &mut impl Rng, margin: f64) -> (f64, f64) {
    let beta = rng.random_range(0.5 + margin..1.0 - margin);
    let alpha = rng.random_range(1.0 - beta + margin..beta - margin);
    (alpha, beta)
}

/// Plain iteration of the map.
pub fn tent(alpha: f64, beta: f64, x: f64) -> f64 {
    if x <= alpha {
        beta / alpha * x
    } else {
        beta / (1.0 - alpha) * (1.0 - x)
    }
}

/// Kneading prefix by direct iteration, `C` only on exact hits.
pub fn knead(alpha: f64, beta: f64, n: usize) -> String {
    let mut x = beta;
    let mut s = String::new();
    for _ in 0..n {
        if x == alpha {
            s.push('C');
            break;
        }
        s.push(if x < alpha { 'L' } else { 'R' });
        x = tent(alpha, beta, x);
    }
    s
}

/// Parity order on symbol strings; `None` when one runs out first.
pub fn parity_cmp(a: &str, b: &str) -> Option<Ordering> {
    let rank = |c| match c {
        'L' => 0,
        'C' => 1,
        _ => 2,
    };
    let mut odd = false;
    for (x, y) in a.chars().zip(b.chars()) {
        if x != y {
            let o = rank(x).cmp(&rank(y));
            return Some(if odd { o.reverse() } else { o });
        }
        if x == 'R' {
            odd = !odd;
        }
    }
    None
}

/// `pre(per)` expanded to `n` symbols; a `C`-word expands to itself.
pub fn expand(text: &str, n: usize) -> String {
    match text.find('(') {
        None => text.to_string(),
        Some(i) => {
            let pre = &text[..i];
            let per = &text[i + 1..text.len() - 1];
            let mut s = pre.to_string();
            while s.len() < n {
                s.push_str(per);
            }
            s.truncate(n);
            s
        }
    }
}

/// Cumulative gaps read straight off an expanded `R…` string: `m̄_k` is the
/// number of `L`s before the `(k+1)`-th `R`.
pub fn mbar_from_string(s: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut ls = 0;
    for (i, c) in s.chars().enumerate() {
        match c {
            'L' => ls += 1,
            'R' if i > 0 => out.push(ls),
            _ => {}
        }
    }
    out
}

/// `1 - β + Σ_{k≤n} u^k v^{m̄_k}` from a list of cumulative gaps.
pub fn theta_brute(mbar: &[usize], alpha: f64, beta: f64) -> f64 {
    let u = (alpha - 1.0) / beta;
    let v = alpha / beta;
    let mut s = 1.0 - beta;
    for (i, &m) in mbar.iter().enumerate() {
        s += u.powi(i as i32 + 1) * v.powi(m as i32);
    }
    s
}

/// Central difference.
pub fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
