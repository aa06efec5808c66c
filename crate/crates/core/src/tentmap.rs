//! The skew tent family `T(x) = (β/α)x` on `[0, α]`, `(β/(1-α))(1-x)` on `(α, 1]`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::symbolic::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TentError {
    #[error("parameters (alpha={alpha}, beta={beta}) outside 0 < alpha < 1, 0 < beta <= 1")]
    BadParams { alpha: f64, beta: f64 },
    #[error("point {0} outside [0, 1]")]
    OutOfInterval(f64),
    #[error("parameters (alpha={alpha}, beta={beta}) outside U")]
    NotInU { alpha: f64, beta: f64 },
    #[error("invalid (lambda={lambda}, mu={mu})")]
    BadLambdaMu { lambda: f64, mu: f64 },
    #[error("lap count overflow at depth {0}")]
    LapOverflow(usize),
    #[error("entropy depth must be at least 8, got {0}")]
    DepthTooSmall(usize),
}

/// A turning point `(α, β)` of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentParams {
    pub alpha: f64,
    pub beta: f64,
}

impl TentParams {
    /// Any `0 < α < 1`, `0 < β ≤ 1`; membership in `U` is not required so
    /// that near-diagonal points can be built.
    pub fn new(alpha: f64, beta: f64) -> Result<Self, TentError> {
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta <= 1.0) {
            return Err(TentError::BadParams { alpha, beta });
        }
        Ok(TentParams { alpha, beta })
    }

    /// Like [`TentParams::new`] but also requires membership in `U`.
    pub fn in_region(alpha: f64, beta: f64) -> Result<Self, TentError> {
        let p = Self::new(alpha, beta)?;
        if !p.in_u() {
            return Err(TentError::NotInU { alpha, beta });
        }
        Ok(p)
    }

    /// `0.5 < β ≤ 1` and `1 - β < α < β`.
    pub fn in_u(&self) -> bool {
        self.beta > 0.5
            && self.beta <= 1.0
            && 1.0 - self.beta < self.alpha
            && self.alpha < self.beta
    }

    #[inline]
    pub fn left_slope(&self) -> f64 {
        self.beta / self.alpha
    }

    #[inline]
    pub fn right_slope(&self) -> f64 {
        self.beta / (1.0 - self.alpha)
    }

    /// Unchecked evaluation; the formula is applied to any real `x`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        if x <= self.alpha {
            self.left_slope() * x
        } else {
            self.right_slope() * (1.0 - x)
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, TentError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(TentError::OutOfInterval(x));
        }
        Ok(self.apply(x))
    }

    /// The affine branch for `L` or `R`, defined on all of ℝ. `C` maps like
    /// either branch at `α`; callers pass `L` or `R`.
    #[inline]
    pub fn branch(&self, s: Symbol, x: f64) -> f64 {
        match s {
            Symbol::L => self.left_slope() * x,
            Symbol::R | Symbol::C => self.right_slope() * (1.0 - x),
        }
    }

    #[inline]
    fn classify(&self, x: f64, eps_c: f64) -> Symbol {
        if (x - self.alpha).abs() <= eps_c {
            Symbol::C
        } else if x < self.alpha {
            Symbol::L
        } else {
            Symbol::R
        }
    }

    /// `x, T(x), …, T^{n-1}(x)`.
    pub fn orbit(&self, x: f64, n: usize) -> Vec<f64> {
        std::iter::successors(Some(x), |&y| Some(self.apply(y)))
            .take(n)
            .collect()
    }

    /// `n` symbols of the extended itinerary; iteration continues through `C`.
    pub fn extended_itinerary(&self, x: f64, n: usize, eps_c: f64) -> Vec<Symbol> {
        self.orbit(x, n)
            .into_iter()
            .map(|y| self.classify(y, eps_c))
            .collect()
    }

    /// The itinerary of `x`, stopped after the first `C` or after `n` symbols.
    pub fn itinerary(&self, x: f64, n: usize, eps_c: f64) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(n);
        let mut y = x;
        for _ in 0..n {
            let s = self.classify(y, eps_c);
            out.push(s);
            if s == Symbol::C {
                break;
            }
            y = self.apply(y);
        }
        out
    }

    /// `K(α, β)` truncated at the first `C` or at `n` symbols.
    pub fn kneading_prefix(&self, n: usize) -> Vec<Symbol> {
        self.itinerary(self.beta, n, 0.0)
    }

    pub fn to_lambda_mu(&self) -> LambdaMu {
        LambdaMu {
            lambda: self.left_slope(),
            mu: self.right_slope(),
        }
    }

    pub fn from_lambda_mu(lm: LambdaMu) -> Result<Self, TentError> {
        let LambdaMu { lambda, mu } = lm;
        let inv = 1.0 / lambda + 1.0 / mu;
        if !(lambda > 0.0 && mu > 0.0 && inv.is_finite() && inv >= 1.0) {
            return Err(TentError::BadLambdaMu { lambda, mu });
        }
        let beta = 1.0 / inv;
        Self::new(beta / lambda, beta)
    }

    /// Lap numbers `ℓ_0, …, ℓ_n` of the iterates `T^k`.
    ///
    /// Each lap of `T^k` is represented by its image interval; a lap splits
    /// under one more application exactly when its image contains `α` in the
    /// interior. Laps with identical image intervals are merged with
    /// multiplicity.
    pub fn lap_numbers(&self, n: usize) -> Result<Vec<u128>, TentError> {
        let key = |a: f64, b: f64| (a.min(b).to_bits(), a.max(b).to_bits());
        let mut images: BTreeMap<(u64, u64), u128> = BTreeMap::new();
        images.insert(key(0.0, 1.0), 1);
        let mut laps = vec![1u128];
        for depth in 1..=n {
            let mut next: BTreeMap<(u64, u64), u128> = BTreeMap::new();
            let mut push = |k: (u64, u64), c: u128| -> Result<(), TentError> {
                let slot = next.entry(k).or_insert(0);
                *slot = slot.checked_add(c).ok_or(TentError::LapOverflow(depth))?;
                Ok(())
            };
            for (&(lo, hi), &count) in &images {
                let (a, b) = (f64::from_bits(lo), f64::from_bits(hi));
                if a < self.alpha && self.alpha < b {
                    push(key(self.apply(a), self.beta), count)?;
                    push(key(self.apply(b), self.beta), count)?;
                } else {
                    push(key(self.apply(a), self.apply(b)), count)?;
                }
            }
            let total = next
                .values()
                .try_fold(0u128, |acc, &c| acc.checked_add(c))
                .ok_or(TentError::LapOverflow(depth))?;
            laps.push(total);
            images = next;
        }
        Ok(laps)
    }

    /// Entropy estimate `log(ℓ_n / ℓ_{n-1})` in nats.
    pub fn entropy_lap(&self, n: usize) -> Result<f64, TentError> {
        if n < 8 {
            return Err(TentError::DepthTooSmall(n));
        }
        if !self.in_u() {
            return Err(TentError::NotInU {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        let laps = self.lap_numbers(n)?;
        Ok((laps[n] as f64 / laps[n - 1] as f64).ln())
    }
}

/// The `(λ, μ)` slope coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMu {
    pub lambda: f64,
    pub mu: f64,
}
