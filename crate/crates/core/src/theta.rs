//! The auxiliary series
//!
//! ```text
//! Θ_M(α, β) = 1 - β + Σ_{k≥1} u^k v^{m̄_k},   u = (α-1)/β,  v = α/β,
//! ```
//!
//! built from the gaps of `M⁻`, together with its first and second partial
//! derivatives.
//!
//! Every quantity here is a combination of the six moments
//! `Σ t_k · {1, k, m̄_k, k², k·m̄_k, m̄_k²}` with `t_k = u^k v^{m̄_k}`, because
//! `∂_α t_k = t_k (k/(α-1) + m̄_k/α)` and `∂_β t_k = -t_k (k + m̄_k)/β`.
//! Gap sequences are eventually periodic, so `k` and `m̄_k` are affine in the
//! period counter along the tail and each moment tail is a geometric series
//! with a polynomial weight of degree at most two.

use serde::Serialize;
use thiserror::Error;

use crate::symbolic::{gap_decomposition, GapSeq, GapTail, KneadingSeq, Symbol, SymbolicError};

/// Evaluation is refused once the term ratio bound reaches this value.
pub const MAX_ETA: f64 = 0.999;

/// Default term cap for truncated summation.
pub const MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("(alpha={alpha}, beta={beta}) outside the convergence region (eta={eta})")]
    OutsideConvergence { alpha: f64, beta: f64, eta: f64 },
    #[error("tolerance {tol} not reachable within {cap} terms")]
    ToleranceUnreachable { tol: f64, cap: usize },
    #[error("first return exceeded {0} iterations")]
    FirstReturnCap(usize),
    #[error("quadratic form is degenerate")]
    DegenerateQuadratic,
    #[error("prefix has too few R symbols to define gaps")]
    ShortPrefix,
}

/// Gap data defining one `Θ_M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaSpec {
    gaps: GapSeq,
}

impl ThetaSpec {
    /// Requires `0 ≤ m_j ≤ m_1`.
    pub fn new(gaps: GapSeq) -> Result<Self, ThetaError> {
        gaps.check_growth()?;
        Ok(ThetaSpec { gaps })
    }

    /// Spec of a kneading sequence, through the gaps of its minus variant.
    pub fn from_sequence(m: &KneadingSeq) -> Result<Self, ThetaError> {
        Self::new(gap_decomposition(&m.minus_variant())?)
    }

    /// Spec of a truncated observed kneading prefix.
    ///
    /// A prefix ending in `C` is a complete finite sequence. Otherwise the
    /// prefix is cut after its last `R` and closed with `C`, so that the
    /// filler of the minus variant never lengthens an `L`-block.
    pub fn from_prefix(prefix: &[Symbol]) -> Result<Self, ThetaError> {
        if let Some(pos) = prefix.iter().position(|&s| s == Symbol::C) {
            return Self::from_sequence(&KneadingSeq::finite(prefix[..pos].to_vec())?);
        }
        let last_r = prefix
            .iter()
            .rposition(|&s| s == Symbol::R)
            .ok_or(ThetaError::ShortPrefix)?;
        if prefix[..=last_r]
            .iter()
            .filter(|&&s| s == Symbol::R)
            .count()
            < 2
        {
            return Err(ThetaError::ShortPrefix);
        }
        Self::from_sequence(&KneadingSeq::finite(prefix[..=last_r].to_vec())?)
    }

    /// Gaps `m_1 = 6`, `m_{2k} = 5`, `m_{2k+1} = 0` for `k = 1..23`, then zero.
    pub fn counterexample() -> Self {
        let mut head = vec![6];
        for _ in 0..23 {
            head.extend([5, 0]);
        }
        Self::new(GapSeq::new(head, GapTail::AllZero).expect("valid gaps")).expect("m_j <= m_1")
    }

    pub fn gaps(&self) -> &GapSeq {
        &self.gaps
    }

    /// The head and the repeating block used by the closed-form tail; an
    /// all-zero tail is the period `[0]`.
    fn head_and_period(&self) -> (&[usize], &[usize]) {
        match self.gaps.tail() {
            GapTail::AllZero => (self.gaps.head(), &[0]),
            GapTail::Periodic(p) => (self.gaps.head(), p),
        }
    }
}

/// α of the counterexample vertical.
pub const COUNTEREXAMPLE_ALPHA0: f64 = 0.4875;
/// The three β values probed on that vertical.
pub const COUNTEREXAMPLE_BETAS: [f64; 3] = [0.535, 0.7, 0.995];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaGradient {
    pub d_alpha: f64,
    pub d_beta: f64,
    pub error_bound: f64,
}

/// `a x² + 2 b xy + c y²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratic2D {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + 2.0 * self.b * x * y + self.c * y * y
    }

    /// Roots `z` of `a + 2bz + cz² = 0`, i.e. slopes `y/x` of the null lines.
    /// Returned in ascending order.
    pub fn slope_roots(&self) -> Result<(f64, f64), ThetaError> {
        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs());
        if scale == 0.0 || self.c.abs() <= 1e-14 * scale {
            return Err(ThetaError::DegenerateQuadratic);
        }
        let disc = self.b * self.b - self.a * self.c;
        if disc < 0.0 {
            return Err(ThetaError::DegenerateQuadratic);
        }
        // Stable form: q = -(b + sign(b)·√disc), roots q/c and a/q.
        let sq = disc.sqrt();
        let q = -(self.b + if self.b >= 0.0 { sq } else { -sq });
        let (z1, z2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / self.c, self.a / q)
        };
        Ok((z1.min(z2), z1.max(z2)))
    }

    /// The non-diagonal root, i.e. the one farther from slope 1.
    pub fn off_diagonal_slope(&self) -> Result<f64, ThetaError> {
        let (z1, z2) = self.slope_roots()?;
        Ok(if (z1 - 1.0).abs() > (z2 - 1.0).abs() {
            z1
        } else {
            z2
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaHessian {
    /// `a = ∂²_α Θ`, `b = ∂_α∂_β Θ`, `c = ∂²_β Θ`. The mixed coefficient is
    /// evaluated once, so the form is symmetric by construction.
    pub quadratic: Quadratic2D,
    pub error_bound: f64,
}

/// How the infinite series is summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Summation {
    /// Head terms plus closed-form geometric tails; no truncation remainder.
    ClosedForm,
    /// Direct summation until the dominating remainder is below `tol`, using
    /// at most `max_terms` terms.
    Truncated { tol: f64, max_terms: usize },
}

/// `Σ t_k · {1, k, m, k², k·m, m²}` plus bookkeeping.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    s: [f64; 6],
    abs: f64,
    terms: usize,
    /// Remainder bounds `Σ_{k>K} (k(1+m̄_1))^d ρ^k` for `d = 0, 1, 2`.
    remainder: [f64; 3],
}

impl Moments {
    fn add(&mut self, weight: f64, k: f64, m: f64) {
        self.s[0] += weight;
        self.s[1] += weight * k;
        self.s[2] += weight * m;
        self.s[3] += weight * k * k;
        self.s[4] += weight * k * m;
        self.s[5] += weight * m * m;
        self.abs += weight.abs() * (1.0 + k + m).powi(2);
    }
}

struct Point {
    alpha: f64,
    beta: f64,
    u: f64,
    v: f64,
    rho: f64,
}

fn point(spec: &ThetaSpec, alpha: f64, beta: f64) -> Result<Point, ThetaError> {
    let outside = |eta| ThetaError::OutsideConvergence { alpha, beta, eta };
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta.is_finite()) {
        return Err(outside(f64::NAN));
    }
    let u = (alpha - 1.0) / beta;
    let v = alpha / beta;
    let m1 = spec.gaps.first_gap() as i32;
    let rho = u.abs() * v.max(1.0).powi(m1);
    if rho.is_nan() || rho >= MAX_ETA {
        return Err(outside(rho));
    }
    Ok(Point {
        alpha,
        beta,
        u,
        v,
        rho,
    })
}

/// `Σ_{j≥0} j^q r^j` for `q = 0, 1, 2`.
fn geometric_moments(r: f64) -> [f64; 3] {
    let d = 1.0 - r;
    [1.0 / d, r / (d * d), r * (1.0 + r) / (d * d * d)]
}

/// `Σ_{k>K} k^d ρ^k` for `d = 0, 1, 2`.
fn power_tail(rho: f64, big_k: usize) -> [f64; 3] {
    let k0 = (big_k + 1) as f64;
    let [s0, s1, s2] = geometric_moments(rho);
    let lead = rho.powf(k0);
    [
        lead * s0,
        lead * (k0 * s0 + s1),
        lead * (k0 * k0 * s0 + 2.0 * k0 * s1 + s2),
    ]
}

fn closed_form_moments(spec: &ThetaSpec, pt: &Point) -> Moments {
    let (head, period) = spec.head_and_period();
    let mut mo = Moments::default();
    let mut mbar = 0usize;
    for (i, &g) in head.iter().enumerate() {
        mbar += g;
        let k = i + 1;
        let t = pt.u.powi(k as i32) * pt.v.powi(mbar as i32);
        mo.add(t, k as f64, mbar as f64);
    }
    let n = head.len();
    let p = period.len() as f64;
    let big_g: usize = period.iter().sum();
    let g = big_g as f64;
    let r = pt.u.powi(period.len() as i32) * pt.v.powi(big_g as i32);
    let [s0, s1, s2] = geometric_moments(r);
    let mut c = mbar;
    for (i, &gap) in period.iter().enumerate() {
        c += gap;
        let k0 = (n + i + 1) as f64;
        let m0 = c as f64;
        let b = pt.u.powi((n + i + 1) as i32) * pt.v.powi(c as i32);
        mo.s[0] += b * s0;
        mo.s[1] += b * (k0 * s0 + p * s1);
        mo.s[2] += b * (m0 * s0 + g * s1);
        mo.s[3] += b * (k0 * k0 * s0 + 2.0 * k0 * p * s1 + p * p * s2);
        mo.s[4] += b * (k0 * m0 * s0 + (k0 * g + m0 * p) * s1 + p * g * s2);
        mo.s[5] += b * (m0 * m0 * s0 + 2.0 * m0 * g * s1 + g * g * s2);
        mo.abs += b.abs() * (1.0 + k0 + m0).powi(2) * s2.abs().max(s0.abs()) * 4.0;
    }
    mo.terms = n + period.len();
    mo
}

/// Sums directly until the remainder bound of the derivative order `order`
/// falls below `tol`.
fn truncated_moments(
    spec: &ThetaSpec,
    pt: &Point,
    tol: f64,
    cap: usize,
    order: usize,
    scale: f64,
) -> Result<Moments, ThetaError> {
    let m1 = spec.gaps.first_gap() as f64;
    let growth = 1.0 + m1;
    let bound = |big_k: usize| -> [f64; 3] {
        let t = power_tail(pt.rho, big_k);
        [t[0], growth * t[1], growth * growth * t[2]]
    };
    let remainder_ok = |big_k: usize| {
        let b = bound(big_k);
        scale * b[..=order].iter().sum::<f64>() <= tol
    };
    // Exponential search followed by bisection for the smallest K.
    let mut hi = 16usize;
    while !remainder_ok(hi) {
        if hi >= cap {
            return Err(ThetaError::ToleranceUnreachable { tol, cap });
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = 0usize;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if remainder_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let big_k = hi;
    let mut mo = Moments::default();
    for k in 1..=big_k {
        let m = spec.gaps.cumulative(k);
        let t = pt.u.powi(k as i32) * pt.v.powi(m as i32);
        mo.add(t, k as f64, m as f64);
    }
    mo.terms = big_k;
    mo.remainder = bound(big_k);
    Ok(mo)
}

fn moments(
    spec: &ThetaSpec,
    pt: &Point,
    mode: Summation,
    order: usize,
) -> Result<Moments, ThetaError> {
    match mode {
        Summation::ClosedForm => Ok(closed_form_moments(spec, pt)),
        Summation::Truncated { tol, max_terms } => {
            if tol.is_nan() || tol <= 0.0 {
                return Err(ThetaError::ToleranceUnreachable {
                    tol,
                    cap: max_terms,
                });
            }
            let c1 = (1.0 / (1.0 - pt.alpha))
                .max(1.0 / pt.alpha)
                .max(1.0 / pt.beta);
            let scale = c1.powi(order as i32).max(1.0) * 2.0;
            truncated_moments(spec, pt, tol, max_terms, order, scale)
        }
    }
}

fn rounding(mo: &Moments) -> f64 {
    8.0 * f64::EPSILON * (mo.terms as f64 + 4.0) * (1.0 + mo.abs)
}

/// `Θ_M(α, β)` with closed-form tails.
pub fn theta_eval(spec: &ThetaSpec, alpha: f64, beta: f64) -> Result<ThetaValue, ThetaError> {
    theta_eval_with(spec, alpha, beta, Summation::ClosedForm)
}

pub fn theta_eval_with(
    spec: &ThetaSpec,
    alpha: f64,
    beta: f64,
    mode: Summation,
) -> Result<ThetaValue, ThetaError> {
    let pt = point(spec, alpha, beta)?;
    let mo = moments(spec, &pt, mode, 0)?;
    Ok(ThetaValue {
        value: 1.0 - beta + mo.s[0],
        error_bound: rounding(&mo) + mo.remainder[0],
        terms_used: mo.terms,
    })
}

pub fn theta_grad(spec: &ThetaSpec, alpha: f64, beta: f64) -> Result<ThetaGradient, ThetaError> {
    theta_grad_with(spec, alpha, beta, Summation::ClosedForm)
}

pub fn theta_grad_with(
    spec: &ThetaSpec,
    alpha: f64,
    beta: f64,
    mode: Summation,
) -> Result<ThetaGradient, ThetaError> {
    let pt = point(spec, alpha, beta)?;
    let mo = moments(spec, &pt, mode, 1)?;
    let [_, sk, sm, ..] = mo.s;
    let c1 = (1.0 / (1.0 - alpha)).max(1.0 / alpha).max(1.0 / beta);
    Ok(ThetaGradient {
        d_alpha: sk / (alpha - 1.0) + sm / alpha,
        d_beta: -1.0 - (sk + sm) / beta,
        error_bound: c1 * (rounding(&mo) + mo.remainder[1]),
    })
}

pub fn theta_hessian(spec: &ThetaSpec, alpha: f64, beta: f64) -> Result<ThetaHessian, ThetaError> {
    theta_hessian_with(spec, alpha, beta, Summation::ClosedForm)
}

pub fn theta_hessian_with(
    spec: &ThetaSpec,
    alpha: f64,
    beta: f64,
    mode: Summation,
) -> Result<ThetaHessian, ThetaError> {
    let pt = point(spec, alpha, beta)?;
    let mo = moments(spec, &pt, mode, 2)?;
    let [_, sk, sm, skk, skm, smm] = mo.s;
    let am1 = alpha - 1.0;
    let a = skk / (am1 * am1) + 2.0 * skm / (alpha * am1) + smm / (alpha * alpha)
        - sk / (am1 * am1)
        - sm / (alpha * alpha);
    let b = -(skk / am1 + skm * (1.0 / am1 + 1.0 / alpha) + smm / alpha) / beta;
    let c = (skk + 2.0 * skm + smm + sk + sm) / (beta * beta);
    let c1 = (1.0 / (1.0 - alpha)).max(1.0 / alpha).max(1.0 / beta);
    Ok(ThetaHessian {
        quadratic: Quadratic2D { a, b, c },
        error_bound: 2.0 * c1 * c1 * (rounding(&mo) + mo.remainder[1] + mo.remainder[2]),
    })
}

/// The partial sum through stage `k` and its slope-product factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    /// `Θ_{M, k + m̄_k} = 1 - β + Σ_{j=1}^{k} u^j v^{m̄_j}`.
    pub value: f64,
    /// `P_k = (β/(1-α))^{k+1} (β/α)^{m̄_{k+1}} (-1)^k`.
    pub p_k: f64,
    /// `k + 1 + m̄_{k+1}`: the iterate `T^n(β)` that equals `P_k · value`.
    pub orbit_index: usize,
}

pub fn theta_partial_sum(spec: &ThetaSpec, alpha: f64, beta: f64, k: usize) -> PartialSum {
    let u = (alpha - 1.0) / beta;
    let v = alpha / beta;
    let value = (1..=k).fold(1.0 - beta, |acc, j| {
        acc + u.powi(j as i32) * v.powi(spec.gaps.cumulative(j) as i32)
    });
    let next = spec.gaps.cumulative(k + 1);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    PartialSum {
        value,
        p_k: sign * (beta / (1.0 - alpha)).powi(k as i32 + 1) * (beta / alpha).powi(next as i32),
        orbit_index: k + 1 + next,
    }
}

/// Largest stage `k` whose orbit index `k + 1 + m̄_{k+1}` lies among the
/// first `known` symbols, i.e. the last stage a spec built from a prefix of
/// that length gets right.
pub fn truncation_stage(spec: &ThetaSpec, known: usize) -> Option<usize> {
    (0..known)
        .take_while(|&k| k + 1 + spec.gaps.cumulative(k + 1) < known)
        .last()
}

/// Iteration cap of [`m1_first_return`].
pub const FIRST_RETURN_CAP: usize = 100_000;

/// Smallest `m` with `(β/(1-α))(1-β)(β/α)^m ≥ α`: the length of the first
/// `L`-block of `K(α, β)`.
pub fn m1_first_return(alpha: f64, beta: f64) -> Result<usize, ThetaError> {
    let mut x = beta / (1.0 - alpha) * (1.0 - beta);
    let slope = beta / alpha;
    let mut m = 0;
    while x < alpha {
        x *= slope;
        m += 1;
        if m > FIRST_RETURN_CAP {
            return Err(ThetaError::FirstReturnCap(FIRST_RETURN_CAP));
        }
    }
    Ok(m)
}

/// `(Q - 1, Q)` with `Q = (log(1-α) - log(1-β)) / (log β - log α)`; the
/// first-return length satisfies `Q - 1 ≤ m̄_1 < Q`.
pub fn first_return_bracket(alpha: f64, beta: f64) -> (f64, f64) {
    let q = ((1.0 - alpha).ln() - (1.0 - beta).ln()) / (beta.ln() - alpha.ln());
    (q - 1.0, q)
}

/// Points `β ∈ (1/(1+η_max), 1)` where `∂_α Θ(β, β) = 0`, found by a sign scan on
/// `samples` nodes and bisection. On the diagonal `Θ` vanishes identically, so
/// these are exactly the diagonal points where the whole gradient vanishes.
pub fn diagonal_critical_betas(spec: &ThetaSpec, samples: usize) -> Result<Vec<f64>, ThetaError> {
    let f = |b: f64| theta_grad(spec, b, b).map(|g| g.d_alpha);
    // Below this the series converges too slowly to be evaluated.
    let lo = 1.0 / (1.0 + MAX_ETA) + 1e-9;
    let hi = 1.0 - 1e-9;
    let xs: Vec<f64> = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>, _>>()?;
    let mut roots = Vec::new();
    for i in 0..samples {
        let (mut a, mut b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (ys[i], ys[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let mut fa = fa;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = f(mid)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    Ok(roots)
}
