//! Exact polynomial machinery for finite kneading words.
//!
//! A word `A₀…A_{n-1}C` is turned into a polynomial condition on `(α, β)` by
//! pushing `x = β` through the affine branches `A₀, …, A_{n-1}` and clearing
//! denominators in `x - α = 0`. The zero set always contains the diagonal;
//! the isentrope meets it where the diagonal derivative vanishes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::symbolic::{Symbol, Word};
use crate::theta::{Quadratic2D, ThetaError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraicError {
    #[error("word is empty")]
    EmptyWord,
    #[error("word must end with C")]
    NotFinite,
    #[error("word must start with R")]
    StartsWithL,
    #[error("polynomial does not vanish on the diagonal")]
    NotDiagonal,
    #[error("diagonal derivative vanishes identically")]
    DegenerateCritical,
    #[error("no diagonal critical point in (1/2, 1)")]
    NoRootsInRange,
    #[error("first differential is nonzero at the point: ({0}, {1})")]
    GradientNonzero(f64, f64),
    #[error("second differential is degenerate")]
    DegenerateQuadratic,
    #[error("neither slope root equals 1: ({0}, {1})")]
    NoDiagonalRoot(f64, f64),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

impl From<ThetaError> for AlgebraicError {
    fn from(_: ThetaError) -> Self {
        AlgebraicError::DegenerateQuadratic
    }
}

fn q_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn q_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn fmt_q(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Polynomial in `α, β` with exact rational coefficients. Keys are
/// `(i, j)` for `α^i β^j`; zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn alpha() -> Self {
        Self::monomial(BigRational::one(), 1, 0)
    }

    pub fn beta() -> Self {
        Self::monomial(BigRational::one(), 0, 1)
    }

    /// From integer coefficients `(c, i, j)`.
    pub fn from_terms(terms: &[(i64, u32, u32)]) -> Self {
        let mut p = Self::zero();
        for &(c, i, j) in terms {
            p.add_term(i, j, q_int(c));
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn degree_alpha(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn degree_beta(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    /// Terms in graded-lex order: total degree descending, then `α`-degree
    /// descending.
    pub fn terms(&self) -> Vec<(u32, u32, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().map(|(&(i, j), c)| (i, j, c)).collect();
        v.sort_by_key(|&(i, j, _)| std::cmp::Reverse((i + j, i)));
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (&(i, j), c) in &other.terms {
            p.add_term(i, j, c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = Self::zero();
        for (&(i, j), d) in &self.terms {
            p.add_term(i, j, d * c);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                p.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        p
    }

    pub fn d_alpha(&self) -> Self {
        let mut p = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                p.add_term(i - 1, j, c * q_int(i as i64));
            }
        }
        p
    }

    pub fn d_beta(&self) -> Self {
        let mut p = Self::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                p.add_term(i, j - 1, c * q_int(j as i64));
            }
        }
        p
    }

    pub fn eval_rational(&self, a: &BigRational, b: &BigRational) -> BigRational {
        self.terms
            .iter()
            .fold(BigRational::zero(), |acc, (&(i, j), c)| {
                acc + c
                    * num_traits::pow(a.clone(), i as usize)
                    * num_traits::pow(b.clone(), j as usize)
            })
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| q_to_f64(c) * a.powi(i as i32) * b.powi(j as i32))
            .sum()
    }

    /// `β := α`.
    pub fn on_diagonal(&self) -> UniPoly {
        let mut coeffs = Vec::new();
        for (&(i, j), c) in &self.terms {
            let d = (i + j) as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, BigRational::zero());
            }
            coeffs[d] += c;
        }
        UniPoly::new(coeffs)
    }

    /// Integer-primitive form with a positive leading graded-lex coefficient.
    pub fn normalized(&self) -> Self {
        let Some(&(_, _, lead)) = self.terms().first() else {
            return Self::zero();
        };
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let gcd = self.terms.values().fold(BigInt::zero(), |acc, c| {
            acc.gcd(&(c.numer() * &lcm / c.denom()))
        });
        let mut factor = BigRational::new(lcm, gcd);
        if lead.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Exact quotient by `α` if every term carries it.
    fn divide_alpha(&self) -> Option<Self> {
        if self.is_zero() || self.terms.keys().any(|&(i, _)| i == 0) {
            return None;
        }
        let mut p = Self::zero();
        for (&(i, j), c) in &self.terms {
            p.add_term(i - 1, j, c.clone());
        }
        Some(p)
    }

    /// Exact quotient by `α - 1`, via synthetic division in `α`.
    fn divide_alpha_minus_one(&self) -> Option<Self> {
        let d = self.degree_alpha()?;
        if d == 0 {
            return None;
        }
        let column = |i: u32| -> BivarPoly {
            let mut c = BivarPoly::zero();
            for (&(a, j), v) in &self.terms {
                if a == i {
                    c.add_term(0, j, v.clone());
                }
            }
            c
        };
        // q_{i-1} = c_i + q_i, remainder c_0 + q_0.
        let mut quotient = BivarPoly::zero();
        let mut carry = BivarPoly::zero();
        for i in (1..=d).rev() {
            carry = column(i).add(&carry);
            quotient = quotient.add(&carry.mul(&Self::monomial(BigRational::one(), i - 1, 0)));
        }
        if column(0).add(&carry).is_zero() {
            Some(quotient)
        } else {
            None
        }
    }

    /// Removes every factor `α` and `α - 1`.
    pub fn strip_boundary_factors(&self) -> Self {
        let mut p = self.clone();
        loop {
            if let Some(q) = p.divide_alpha() {
                p = q;
            } else if let Some(q) = p.divide_alpha_minus_one() {
                p = q;
            } else {
                return p;
            }
        }
    }
}

impl fmt::Display for BivarPoly {
    /// `c*a^i*b^j` terms in graded-lex order, e.g. `1*a^3*b^0 - 1*a^2*b^0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (i, j, c)) in terms.into_iter().enumerate() {
            let mag = fmt_q(&c.abs());
            match (n, c.is_negative()) {
                (0, false) => write!(f, "{mag}*a^{i}*b^{j}")?,
                (0, true) => write!(f, "-{mag}*a^{i}*b^{j}")?,
                (_, false) => write!(f, " + {mag}*a^{i}*b^{j}")?,
                (_, true) => write!(f, " - {mag}*a^{i}*b^{j}")?,
            }
        }
        Ok(())
    }
}

fn parse_q(s: &str) -> Result<BigRational, AlgebraicError> {
    let err = || AlgebraicError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            s.trim().parse().map_err(|_| err())?,
        )),
    }
}

impl FromStr for BivarPoly {
    type Err = AlgebraicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let err = || AlgebraicError::Parse(s.to_string());
        // Split into signed terms.
        let normalized = s.replace(" - ", " + -").replace(" + ", "\u{0}");
        let mut p = Self::zero();
        for term in normalized.split('\u{0}') {
            let term = term.trim();
            let (neg, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term),
            };
            let mut parts = body.split('*');
            let mut c = parse_q(parts.next().ok_or_else(err)?)?;
            let (mut i, mut j) = (0u32, 0u32);
            for factor in parts {
                let (var, exp) = factor.split_once('^').ok_or_else(err)?;
                let exp: u32 = exp.parse().map_err(|_| err())?;
                match var {
                    "a" => i += exp,
                    "b" => j += exp,
                    _ => return Err(err()),
                }
            }
            if neg {
                c = -c;
            }
            p.add_term(i, j, c);
        }
        Ok(p)
    }
}

/// Univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q_int(x)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + q_to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * q_int(i as i64))
                .collect(),
        )
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let mut quo = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let f = rem.last().expect("nonempty") / d.lead();
            for (k, c) in d.coeffs.iter().enumerate() {
                rem[shift + k] -= &f * c;
            }
            quo[shift] = f;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Self::new(quo), Self::new(rem))
    }

    fn monic(&self) -> Self {
        let l = self.lead().clone();
        Self::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// `p / gcd(p, p')`.
    pub fn squarefree(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Scaled to coprime integer coefficients.
    fn primitive_ints(&self) -> Vec<BigInt> {
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * &lcm / c.denom())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        ints.into_iter().map(|c| c / &g).collect()
    }

    fn sturm_chain(&self) -> Vec<UniPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                return chain;
            }
            let r = chain[n - 2].div_rem(&chain[n - 1]).1;
            let neg = UniPoly::new(r.coeffs.into_iter().map(|c| -c).collect());
            chain.push(neg);
        }
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        let chain = self.sturm_chain();
        sign_variations(&chain, a) - sign_variations(&chain, b)
    }

    fn render(&self) -> String {
        let terms: Vec<(usize, &BigRational)> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (n, (i, c)) in terms.into_iter().enumerate() {
            let mag = fmt_q(&c.abs());
            let sep = match (n, c.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            s.push_str(&format!("{sep}{mag}*a^{i}"));
        }
        s
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn sign_variations(chain: &[UniPoly], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Positive divisors of `n`, or `None` if `n` is too large to factor by trial
/// division.
fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    Some(out)
}

/// A rational affine map `x ↦ (n_x·x + n_0) / d` with polynomial pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalExpr {
    pub numerator: BivarPoly,
    /// Exponents of `α` and `α - 1` in the denominator.
    pub alpha_power: u32,
    pub alpha_minus_one_power: u32,
}

impl RationalExpr {
    pub fn denominator(&self) -> BivarPoly {
        let mut d = BivarPoly::constant(BigRational::one());
        let am1 = BivarPoly::alpha().sub(&BivarPoly::constant(BigRational::one()));
        for _ in 0..self.alpha_power {
            d = d.mul(&BivarPoly::alpha());
        }
        for _ in 0..self.alpha_minus_one_power {
            d = d.mul(&am1);
        }
        d
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.numerator.eval(a, b)
            / (a.powi(self.alpha_power as i32) * (a - 1.0).powi(self.alpha_minus_one_power as i32))
    }
}

/// `A_{n-1}(…A₀(β)) - α` as a rational expression.
pub fn compose_branch_expr(word: &Word) -> Result<RationalExpr, AlgebraicError> {
    let syms = word.symbols();
    let (&last, body) = syms.split_last().ok_or(AlgebraicError::EmptyWord)?;
    if last != Symbol::C || body.is_empty() {
        return Err(if last == Symbol::C {
            AlgebraicError::EmptyWord
        } else {
            AlgebraicError::NotFinite
        });
    }
    if body[0] != Symbol::R {
        return Err(AlgebraicError::StartsWithL);
    }
    let one = BivarPoly::constant(BigRational::one());
    let a = BivarPoly::alpha();
    let b = BivarPoly::beta();
    let am1 = a.sub(&one);
    let mut num = b.clone();
    let mut den = one.clone();
    let (mut pa, mut pa1) = (0, 0);
    for &s in body {
        match s {
            // L(x) = βx/α
            Symbol::L => {
                num = b.mul(&num);
                den = den.mul(&a);
                pa += 1;
            }
            // R(x) = β(x-1)/(α-1)
            _ => {
                num = b.mul(&num.sub(&den));
                den = den.mul(&am1);
                pa1 += 1;
            }
        }
    }
    Ok(RationalExpr {
        numerator: num.sub(&a.mul(&den)),
        alpha_power: pa,
        alpha_minus_one_power: pa1,
    })
}

/// Normalized numerator of `A_{n-1}(…A₀(β)) - α` for `A₀…A_{n-1}C`.
pub fn compose_branch_condition(word: &Word) -> Result<BivarPoly, AlgebraicError> {
    Ok(compose_branch_expr(word)?
        .numerator
        .strip_boundary_factors()
        .normalized())
}

/// A real root of the diagonal derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalRoot {
    pub beta0: f64,
    /// Set when the root is rational.
    pub exact: Option<BigRational>,
    /// Isolating interval of width below `1e-14`.
    pub lower: BigRational,
    pub upper: BigRational,
}

/// `q(α) = (∂_α p)(α, α)`.
pub fn diagonal_critical_polynomial(p: &BivarPoly) -> Result<UniPoly, AlgebraicError> {
    if !p.on_diagonal().is_zero() {
        return Err(AlgebraicError::NotDiagonal);
    }
    let q = p.d_alpha().on_diagonal();
    if q.is_zero() {
        return Err(AlgebraicError::DegenerateCritical);
    }
    Ok(q)
}

const ROOT_WIDTH: f64 = 1e-14;

/// Real roots of the diagonal derivative in the open interval `(1/2, 1)`,
/// ascending.
pub fn diagonal_critical_points(p: &BivarPoly) -> Result<Vec<DiagonalRoot>, AlgebraicError> {
    let q = diagonal_critical_polynomial(p)?;
    let mut sf = q.squarefree();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one = BigRational::one();
    let mut roots = Vec::new();

    // Rational roots first, divided out so the rest are irrational.
    let ints = sf.primitive_ints();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if let (Some(ps), Some(qs)) = (
        divisors(&ints[low]),
        divisors(ints.last().expect("nonzero")),
    ) {
        let mut cands: Vec<BigRational> = ps
            .iter()
            .flat_map(|&n| {
                qs.iter()
                    .map(move |&d| BigRational::new(n.into(), d.into()))
            })
            .filter(|r| *r > half && *r < one)
            .collect();
        cands.sort();
        cands.dedup();
        for r in cands {
            if sf.eval(&r).is_zero() {
                let lin = UniPoly::new(vec![-r.clone(), BigRational::one()]);
                sf = sf.div_rem(&lin).0;
                roots.push(DiagonalRoot {
                    beta0: q_to_f64(&r),
                    exact: Some(r.clone()),
                    lower: r.clone(),
                    upper: r,
                });
            }
        }
    }

    let mut stack = vec![(half.clone(), one.clone())];
    while let Some((a, b)) = stack.pop() {
        // A root exactly at 1 is excluded by the open range.
        let mut n = sf.count_roots(&a, &b);
        if b == one && sf.eval(&one).is_zero() {
            n -= 1;
        }
        match n {
            0 => {}
            1 if !(b == one && sf.eval(&one).is_zero()) => roots.push(refine(&sf, a, b)),
            _ => {
                let mid = (&a + &b) / q_int(2);
                stack.push((mid.clone(), b));
                stack.push((a, mid));
            }
        }
    }
    if roots.is_empty() {
        return Err(AlgebraicError::NoRootsInRange);
    }
    roots.sort_by(|x, y| x.lower.cmp(&y.lower));
    Ok(roots)
}

/// Bisection of a simple irrational root isolated in `(a, b]`.
fn refine(p: &UniPoly, mut a: BigRational, mut b: BigRational) -> DiagonalRoot {
    let width = BigRational::from_float(ROOT_WIDTH).expect("finite");
    let sign_b = p.eval(&b).is_positive();
    while &b - &a > width {
        let mid = (&a + &b) / q_int(2);
        let v = p.eval(&mid);
        if v.is_zero() {
            return DiagonalRoot {
                beta0: q_to_f64(&mid),
                exact: Some(mid.clone()),
                lower: mid.clone(),
                upper: mid,
            };
        }
        if v.is_positive() == sign_b {
            b = mid;
        } else {
            a = mid;
        }
    }
    DiagonalRoot {
        beta0: q_to_f64(&((&a + &b) / q_int(2))),
        exact: None,
        lower: a,
        upper: b,
    }
}

/// Second differential of `p` at `(β₀, β₀)` and its null slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalSlope {
    pub quadratic: Quadratic2D,
    /// Both roots of `A + 2Bz + Cz² = 0`, ascending.
    pub slopes: (f64, f64),
    /// The root that is not the diagonal.
    pub isentrope_slope: f64,
}

const GRADIENT_TOL: f64 = 1e-10;
const DIAGONAL_ROOT_TOL: f64 = 1e-10;

pub fn slope_at_diagonal(p: &BivarPoly, beta0: f64) -> Result<DiagonalSlope, AlgebraicError> {
    let (pa, pb) = (p.d_alpha(), p.d_beta());
    let g = (pa.eval(beta0, beta0), pb.eval(beta0, beta0));
    if g.0.abs() > GRADIENT_TOL || g.1.abs() > GRADIENT_TOL {
        return Err(AlgebraicError::GradientNonzero(g.0, g.1));
    }
    let quadratic = Quadratic2D {
        a: pa.d_alpha().eval(beta0, beta0),
        b: pa.d_beta().eval(beta0, beta0),
        c: pb.d_beta().eval(beta0, beta0),
    };
    slopes_of(quadratic)
}

/// Same as [`slope_at_diagonal`] with the second differential evaluated
/// exactly at a rational point.
pub fn slope_at_rational_diagonal(
    p: &BivarPoly,
    beta0: &BigRational,
) -> Result<DiagonalSlope, AlgebraicError> {
    let (pa, pb) = (p.d_alpha(), p.d_beta());
    if !pa.eval_rational(beta0, beta0).is_zero() || !pb.eval_rational(beta0, beta0).is_zero() {
        let f = q_to_f64(beta0);
        return Err(AlgebraicError::GradientNonzero(
            pa.eval(f, f),
            pb.eval(f, f),
        ));
    }
    let quadratic = Quadratic2D {
        a: q_to_f64(&pa.d_alpha().eval_rational(beta0, beta0)),
        b: q_to_f64(&pa.d_beta().eval_rational(beta0, beta0)),
        c: q_to_f64(&pb.d_beta().eval_rational(beta0, beta0)),
    };
    slopes_of(quadratic)
}

fn slopes_of(quadratic: Quadratic2D) -> Result<DiagonalSlope, AlgebraicError> {
    let slopes = quadratic.slope_roots()?;
    let isentrope_slope = if (slopes.1 - 1.0).abs() <= DIAGONAL_ROOT_TOL {
        slopes.0
    } else if (slopes.0 - 1.0).abs() <= DIAGONAL_ROOT_TOL {
        slopes.1
    } else {
        return Err(AlgebraicError::NoDiagonalRoot(slopes.0, slopes.1));
    };
    Ok(DiagonalSlope {
        quadratic,
        slopes,
        isentrope_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic() {
        let a = BivarPoly::alpha();
        let b = BivarPoly::beta();
        assert_eq!(
            a.add(&b).mul(&a.sub(&b)),
            BivarPoly::from_terms(&[(1, 2, 0), (-1, 0, 2)])
        );
        let c = BivarPoly::from_terms(&[(1, 3, 0), (-1, 2, 0), (-1, 0, 3), (1, 0, 2)]);
        assert_eq!(c.d_alpha(), BivarPoly::from_terms(&[(3, 2, 0), (-2, 1, 0)]));
        assert!(c.on_diagonal().is_zero());
        assert_eq!(
            c.eval_rational(&rat(1, 2), &rat(1, 3)),
            rat(-1, 8) + rat(2, 27)
        );
        assert!((c.eval(0.5, 1.0 / 3.0) - (-1.0 / 8.0 + 2.0 / 27.0)).abs() < 1e-15);
    }

    #[test]
    fn rendering_round_trip() {
        let c = compose_branch_condition(&word("RLC")).unwrap();
        assert_eq!(
            c.to_string(),
            "1*a^3*b^0 - 1*a^0*b^3 - 1*a^2*b^0 + 1*a^0*b^2"
        );
        assert_eq!(c.to_string().parse::<BivarPoly>().unwrap(), c);
        let p = BivarPoly::constant(rat(-3, 4)).add(&BivarPoly::beta());
        assert_eq!(p.to_string(), "1*a^0*b^1 - 3/4*a^0*b^0");
        assert_eq!(p.to_string().parse::<BivarPoly>().unwrap(), p);
        assert_eq!(BivarPoly::zero().to_string(), "0");
        assert!("1*c^2".parse::<BivarPoly>().is_err());
    }

    #[test]
    fn branch_composition() {
        let rlc = compose_branch_condition(&word("RLC")).unwrap();
        assert_eq!(
            rlc,
            BivarPoly::from_terms(&[(1, 3, 0), (-1, 2, 0), (-1, 0, 3), (1, 0, 2)])
        );
        // α⁵ − 2α⁴ + α³(β+1) − α²β − β⁴(β−1)
        let rllrc = compose_branch_condition(&word("RLLRC")).unwrap();
        let expect = BivarPoly::from_terms(&[
            (1, 5, 0),
            (-2, 4, 0),
            (1, 3, 1),
            (1, 3, 0),
            (-1, 2, 1),
            (-1, 0, 5),
            (1, 0, 4),
        ]);
        assert_eq!(rllrc, expect);
        let rc = compose_branch_condition(&word("RC")).unwrap();
        assert_eq!(
            rc,
            BivarPoly::from_terms(&[(1, 2, 0), (-1, 1, 0), (-1, 0, 2), (1, 0, 1)])
        );
        // The raw expression is -C/(α(α-1)).
        let e = compose_branch_expr(&word("RLC")).unwrap();
        assert_eq!((e.alpha_power, e.alpha_minus_one_power), (1, 1));
        assert!((e.eval(0.6, 0.8) + rlc.eval(0.6, 0.8) / (0.6 * -0.4)).abs() < 1e-15);
    }

    #[test]
    fn composition_errors() {
        assert_eq!(
            compose_branch_condition(&word("RL")),
            Err(AlgebraicError::NotFinite)
        );
        assert_eq!(
            compose_branch_condition(&word("LRC")),
            Err(AlgebraicError::StartsWithL)
        );
        assert_eq!(
            compose_branch_condition(&word("C")),
            Err(AlgebraicError::EmptyWord)
        );
        assert_eq!(
            compose_branch_condition(&word("")),
            Err(AlgebraicError::EmptyWord)
        );
    }

    #[test]
    fn critical_points() {
        let rlc = compose_branch_condition(&word("RLC")).unwrap();
        assert_eq!(
            diagonal_critical_polynomial(&rlc).unwrap(),
            UniPoly::from_ints(&[0, -2, 3])
        );
        let r = diagonal_critical_points(&rlc).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].exact, Some(rat(2, 3)));

        let rllrc = compose_branch_condition(&word("RLLRC")).unwrap();
        let q = diagonal_critical_polynomial(&rllrc).unwrap();
        assert_eq!(q, UniPoly::from_ints(&[0, 0, 1, -5, 5]));
        let r = diagonal_critical_points(&rllrc).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].exact.is_none());
        assert!((r[0].beta0 - (0.5 + 5f64.sqrt() / 10.0)).abs() < 1e-14);

        let rc = compose_branch_condition(&word("RC")).unwrap();
        assert_eq!(
            diagonal_critical_points(&rc),
            Err(AlgebraicError::NoRootsInRange)
        );
        assert_eq!(
            diagonal_critical_points(&BivarPoly::alpha()),
            Err(AlgebraicError::NotDiagonal)
        );
    }

    #[test]
    fn sturm_counts() {
        // (x - 1/3)(x - 2/3)(x - 3/4)
        let p = UniPoly::new(vec![
            rat(-1, 6),
            rat(35, 36),
            rat(-7, 4),
            BigRational::one(),
        ]);
        assert_eq!(p.count_roots(&rat(0, 1), &rat(1, 1)), 3);
        assert_eq!(p.count_roots(&rat(1, 2), &rat(1, 1)), 2);
        let sq = p.mul_for_test(&p);
        assert_eq!(sq.squarefree().degree(), Some(3));
    }

    impl UniPoly {
        fn mul_for_test(&self, o: &Self) -> Self {
            let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
            for (i, x) in self.coeffs.iter().enumerate() {
                for (j, y) in o.coeffs.iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
            UniPoly::new(c)
        }
    }

    #[test]
    fn slopes() {
        let rlc = compose_branch_condition(&word("RLC")).unwrap();
        let s = slope_at_rational_diagonal(&rlc, &rat(2, 3)).unwrap();
        assert_eq!(
            s.quadratic,
            Quadratic2D {
                a: 2.0,
                b: 0.0,
                c: -2.0
            }
        );
        assert_eq!(s.slopes, (-1.0, 1.0));

        let rllrc = compose_branch_condition(&word("RLLRC")).unwrap();
        let b0 = diagonal_critical_points(&rllrc).unwrap()[0].beta0;
        let s = slope_at_diagonal(&rllrc, b0).unwrap();
        let z1 = -(5f64.sqrt() + 3.0) / (2.0 * 5f64.sqrt() + 2.0);
        assert!((s.isentrope_slope - z1).abs() < 1e-10);

        let saddle = BivarPoly::from_terms(&[(1, 2, 0), (-1, 0, 2)]);
        assert_eq!(slope_at_diagonal(&saddle, 0.0).unwrap().slopes, (-1.0, 1.0));
        assert!(matches!(
            slope_at_diagonal(&rlc, 0.6),
            Err(AlgebraicError::GradientNonzero(..))
        ));
    }

    #[test]
    fn boundary_factors() {
        let c = compose_branch_condition(&word("RLC")).unwrap();
        let am1 = BivarPoly::alpha().sub(&BivarPoly::constant(BigRational::one()));
        let wrapped = c.mul(&am1).mul(&BivarPoly::alpha()).mul(&am1);
        assert_eq!(wrapped.strip_boundary_factors().normalized(), c);
    }
}
