//! Kneading calculus over the alphabet `{L, C, R}`.
//!
//! Sequences are stored in a canonical eventually-periodic form (minimal
//! preperiod, primitive period) so that structural equality coincides with
//! equality in the parity order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: &'static str },
    #[error("C may only terminate a finite sequence")]
    MisplacedC,
    #[error("periodic part is empty")]
    EmptyPeriod,
    #[error("shift by {shift} exceeds finite sequence length {len}")]
    ShiftTooLong { shift: usize, len: usize },
    #[error("left factor of a *-product must be nonempty and free of C")]
    BadStarFactor,
    #[error("gap decomposition needs an infinite sequence")]
    NotInfinite,
    #[error("sequence must start with R")]
    StartsWithL,
    #[error("RL^inf has an infinite first gap")]
    InfiniteGap,
    #[error("gap sequence must have m_1 > 0")]
    ZeroFirstGap,
    #[error("gap m_{index} = {gap} exceeds m_1 = {first}")]
    GapExceedsFirst {
        index: usize,
        gap: usize,
        first: usize,
    },
}

/// A symbol of an itinerary. The derived order is `L < C < R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    L,
    C,
    R,
}

impl Symbol {
    /// `L <-> R`, `C` fixed.
    pub fn flip(self) -> Symbol {
        match self {
            Symbol::L => Symbol::R,
            Symbol::R => Symbol::L,
            Symbol::C => Symbol::C,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::L => 'L',
            Symbol::C => 'C',
            Symbol::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            'L' => Some(Symbol::L),
            'C' => Some(Symbol::C),
            'R' => Some(Symbol::R),
            _ => None,
        }
    }
}

/// Renders a symbol slice as a plain string.
pub fn symbols_to_string(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.as_char()).collect()
}

/// True when the slice contains an odd number of `R`s.
pub fn is_odd(symbols: &[Symbol]) -> bool {
    symbols.iter().filter(|&&s| s == Symbol::R).count() % 2 == 1
}

/// Parity-lexicographic comparison of two symbol streams.
///
/// Returns `None` when one stream is exhausted before a difference is found.
pub fn compare_symbols<A, B>(a: A, b: B) -> Option<Ordering>
where
    A: IntoIterator<Item = Symbol>,
    B: IntoIterator<Item = Symbol>,
{
    let mut odd = false;
    for (x, y) in a.into_iter().zip(b) {
        if x != y {
            let ord = x.cmp(&y);
            return Some(if odd { ord.reverse() } else { ord });
        }
        if x == Symbol::R {
            odd = !odd;
        }
    }
    None
}

/// A finite admissible word: symbols over `{L, R}`, optionally ending in `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, SymbolicError> {
        if let Some(pos) = symbols.iter().position(|&s| s == Symbol::C) {
            if pos + 1 != symbols.len() {
                return Err(SymbolicError::MisplacedC);
            }
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ends_with_c(&self) -> bool {
        self.0.last() == Some(&Symbol::C)
    }

    pub fn is_odd(&self) -> bool {
        is_odd(&self.0)
    }
}

impl FromStr for Word {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let symbols = s
            .char_indices()
            .map(|(pos, c)| {
                Symbol::from_char(c).ok_or(SymbolicError::Syntax {
                    pos,
                    msg: "expected L, R or C",
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    /// The sequence ends with `C` right after the preperiod.
    TerminalC,
    /// The preperiod is followed by this block repeated forever.
    Periodic(Vec<Symbol>),
}

/// A finite (`C`-terminated) or eventually periodic kneading sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KneadingSeq {
    preperiod: Vec<Symbol>,
    tail: Tail,
}

fn primitive_root(period: &[Symbol]) -> &[Symbol] {
    let n = period.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| period[i] == period[i - d]) {
            return &period[..d];
        }
    }
    period
}

impl KneadingSeq {
    /// `word` followed by `C`.
    pub fn finite(word: Vec<Symbol>) -> Result<Self, SymbolicError> {
        if word.contains(&Symbol::C) {
            return Err(SymbolicError::MisplacedC);
        }
        Ok(KneadingSeq {
            preperiod: word,
            tail: Tail::TerminalC,
        })
    }

    /// `preperiod (period)^inf`, canonicalized.
    pub fn periodic(preperiod: Vec<Symbol>, period: Vec<Symbol>) -> Result<Self, SymbolicError> {
        if period.is_empty() {
            return Err(SymbolicError::EmptyPeriod);
        }
        if preperiod.contains(&Symbol::C) || period.contains(&Symbol::C) {
            return Err(SymbolicError::MisplacedC);
        }
        let mut pre = preperiod;
        let mut per = primitive_root(&period).to_vec();
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(KneadingSeq {
            preperiod: pre,
            tail: Tail::Periodic(per),
        })
    }

    pub fn preperiod(&self) -> &[Symbol] {
        &self.preperiod
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn period(&self) -> Option<&[Symbol]> {
        match &self.tail {
            Tail::Periodic(p) => Some(p),
            Tail::TerminalC => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, Tail::TerminalC)
    }

    /// Length including the terminal `C`; `None` for infinite sequences.
    pub fn finite_len(&self) -> Option<usize> {
        match self.tail {
            Tail::TerminalC => Some(self.preperiod.len() + 1),
            Tail::Periodic(_) => None,
        }
    }

    pub fn symbol_at(&self, i: usize) -> Option<Symbol> {
        let n = self.preperiod.len();
        if i < n {
            return Some(self.preperiod[i]);
        }
        match &self.tail {
            Tail::TerminalC => (i == n).then_some(Symbol::C),
            Tail::Periodic(p) => Some(p[(i - n) % p.len()]),
        }
    }

    /// Iterator over all symbols (infinite for periodic sequences).
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..).map_while(move |i| self.symbol_at(i))
    }

    /// The first `n` symbols (fewer if the sequence is finite and shorter).
    pub fn prefix(&self, n: usize) -> Vec<Symbol> {
        self.symbols().take(n).collect()
    }

    /// Number of symbols after which two sequences are guaranteed to have
    /// differed if they are distinct.
    fn decision_horizon(&self, other: &KneadingSeq) -> usize {
        let pre = self.preperiod.len().max(other.preperiod.len()) + 1;
        match (self.period(), other.period()) {
            (Some(p), Some(q)) => pre + p.len().lcm(&q.len()) + p.len().max(q.len()),
            _ => pre + self.period().map_or(0, <[_]>::len) + other.period().map_or(0, <[_]>::len),
        }
    }

    /// Drops the first `k` symbols.
    pub fn shift(&self, k: usize) -> Result<KneadingSeq, SymbolicError> {
        let n = self.preperiod.len();
        match &self.tail {
            Tail::TerminalC => {
                if k > n {
                    return Err(SymbolicError::ShiftTooLong {
                        shift: k,
                        len: n + 1,
                    });
                }
                KneadingSeq::finite(self.preperiod[k..].to_vec())
            }
            Tail::Periodic(p) => {
                if k <= n {
                    KneadingSeq::periodic(self.preperiod[k..].to_vec(), p.clone())
                } else {
                    let mut per = p.clone();
                    per.rotate_left((k - n) % p.len());
                    KneadingSeq::periodic(Vec::new(), per)
                }
            }
        }
    }

    /// `M ⪰ σⁿM` for every `n ≥ 1`.
    pub fn is_maximal(&self) -> bool {
        let bound = match &self.tail {
            Tail::TerminalC => self.preperiod.len(),
            Tail::Periodic(p) => self.preperiod.len() + 2 * p.len(),
        };
        (1..=bound).all(|n| {
            self.shift(n)
                .map(|s| compare(self, &s) != Ordering::Less)
                .unwrap_or(true)
        })
    }

    /// `M⁻`: infinite sequences are returned unchanged, `wC` becomes
    /// `(wL)^inf` for even `w` and `(wR)^inf` for odd `w`.
    pub fn minus_variant(&self) -> KneadingSeq {
        match &self.tail {
            Tail::Periodic(_) => self.clone(),
            Tail::TerminalC => self.filled_with(if is_odd(&self.preperiod) {
                Symbol::R
            } else {
                Symbol::L
            }),
        }
    }

    /// `(wX)^inf` for a finite `wC`; infinite sequences are returned unchanged.
    pub fn filled_with(&self, filler: Symbol) -> KneadingSeq {
        match &self.tail {
            Tail::Periodic(_) => self.clone(),
            Tail::TerminalC => {
                let mut period = self.preperiod.clone();
                period.push(filler);
                KneadingSeq::periodic(Vec::new(), period).expect("nonempty period without C")
            }
        }
    }
}

/// Total parity order on canonical sequences.
pub fn compare(a: &KneadingSeq, b: &KneadingSeq) -> Ordering {
    let horizon = a.decision_horizon(b);
    compare_symbols(a.symbols().take(horizon), b.symbols().take(horizon)).unwrap_or(Ordering::Equal)
}

/// Compares a finite observed prefix against `m`, reading at most `depth`
/// symbols. Agreement through the whole window counts as `Equal`.
pub fn compare_prefix(prefix: &[Symbol], m: &KneadingSeq, depth: usize) -> Ordering {
    compare_symbols(prefix.iter().copied().take(depth), m.symbols().take(depth))
        .unwrap_or(Ordering::Equal)
}

impl PartialOrd for KneadingSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KneadingSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

fn parse_run(text: &str, offset: usize) -> Result<Vec<Symbol>, SymbolicError> {
    text.char_indices()
        .map(|(i, c)| match c {
            'L' => Ok(Symbol::L),
            'R' => Ok(Symbol::R),
            'C' => Err(SymbolicError::MisplacedC),
            _ => Err(SymbolicError::Syntax {
                pos: offset + i,
                msg: "expected L or R",
            }),
        })
        .collect()
}

impl FromStr for KneadingSeq {
    type Err = SymbolicError;

    /// Grammar: `SYMS`, `SYMS C` or `SYMS ( SYMS )` with `SYMS` over `{L, R}`.
    /// A bare `SYMS` without `C` or period is read as the finite word `SYMS C`
    /// only if it ends with `C`; otherwise it is rejected as ambiguous.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(open) = s.find('(') {
            let body = &s[open + 1..];
            let close = body.find(')').ok_or(SymbolicError::Syntax {
                pos: s.len(),
                msg: "unclosed period",
            })?;
            if open + 1 + close + 1 != s.len() {
                return Err(SymbolicError::Syntax {
                    pos: open + close + 2,
                    msg: "trailing input after period",
                });
            }
            let pre = parse_run(&s[..open], 0)?;
            let per = parse_run(&body[..close], open + 1)?;
            return KneadingSeq::periodic(pre, per);
        }
        match s.strip_suffix('C') {
            Some(word) => KneadingSeq::finite(parse_run(word, 0)?),
            None => Err(SymbolicError::Syntax {
                pos: s.len(),
                msg: "expected terminal C or a parenthesized period",
            }),
        }
    }
}

impl fmt::Display for KneadingSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.preperiod))?;
        match &self.tail {
            Tail::TerminalC => f.write_str("C"),
            Tail::Periodic(p) => write!(f, "({})", symbols_to_string(p)),
        }
    }
}

/// `A*B`: the blocks of `a` interleaved with the symbols of `b`, flipped when
/// `a` is odd.
pub fn star_product(a: &Word, b: &KneadingSeq) -> Result<KneadingSeq, SymbolicError> {
    if a.is_empty() || a.ends_with_c() {
        return Err(SymbolicError::BadStarFactor);
    }
    let odd = a.is_odd();
    let expand = |syms: &[Symbol]| -> Vec<Symbol> {
        syms.iter()
            .flat_map(|&s| {
                a.symbols()
                    .iter()
                    .copied()
                    .chain(std::iter::once(if odd { s.flip() } else { s }))
            })
            .collect()
    };
    match b.tail() {
        Tail::TerminalC => {
            let mut pre = expand(b.preperiod());
            pre.extend_from_slice(a.symbols());
            KneadingSeq::finite(pre)
        }
        Tail::Periodic(p) => KneadingSeq::periodic(expand(b.preperiod()), expand(p)),
    }
}

/// `R^{*j}` as a finite word of length `2^j - 1` (`j ≥ 1`).
pub fn r_star_power(j: u32) -> Vec<Symbol> {
    let mut w = vec![Symbol::R];
    for _ in 1..j {
        let mut next = Vec::with_capacity(2 * w.len() + 1);
        for &s in &w {
            next.push(Symbol::R);
            next.push(s.flip());
        }
        next.push(Symbol::R);
        w = next;
    }
    w
}

/// The first `n` symbols of the period-doubling limit `R^{*inf}`.
pub fn r_star_infinity_prefix(n: usize) -> Vec<Symbol> {
    let mut x = vec![Symbol::R];
    while x.len() < n {
        x = x.iter().flat_map(|&s| [Symbol::R, s.flip()]).collect();
    }
    x.truncate(n);
    x
}

/// Gap lengths between consecutive `R`s of an infinite sequence.
///
/// `m_k` is the length of the `k`-th `L`-block, `m̄_k = m_1 + … + m_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GapSeq {
    head: Vec<usize>,
    tail: GapTail,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GapTail {
    /// All further gaps vanish: the sequence ends in `R^inf`.
    AllZero,
    /// The listed gaps repeat forever (never all zero).
    Periodic(Vec<usize>),
}

impl GapSeq {
    /// Builds a canonical gap sequence. Requires `m_1 > 0`.
    pub fn new(head: Vec<usize>, tail: GapTail) -> Result<Self, SymbolicError> {
        let mut head = head;
        let tail = match tail {
            GapTail::Periodic(p) if p.is_empty() => return Err(SymbolicError::EmptyPeriod),
            GapTail::Periodic(p) if p.iter().all(|&g| g == 0) => GapTail::AllZero,
            GapTail::Periodic(p) => {
                let n = p.len();
                let d = (1..=n)
                    .find(|&d| n % d == 0 && (d..n).all(|i| p[i] == p[i - d]))
                    .unwrap_or(n);
                let mut per = p[..d].to_vec();
                while let (Some(&a), Some(&b)) = (head.last(), per.last()) {
                    if a != b {
                        break;
                    }
                    head.pop();
                    per.rotate_right(1);
                }
                GapTail::Periodic(per)
            }
            GapTail::AllZero => {
                while head.last() == Some(&0) {
                    head.pop();
                }
                GapTail::AllZero
            }
        };
        let seq = GapSeq { head, tail };
        if seq.gap(1) == 0 {
            return Err(SymbolicError::ZeroFirstGap);
        }
        Ok(seq)
    }

    pub fn head(&self) -> &[usize] {
        &self.head
    }

    pub fn tail(&self) -> &GapTail {
        &self.tail
    }

    /// `m_k` for `k ≥ 1`.
    pub fn gap(&self, k: usize) -> usize {
        assert!(k >= 1, "gaps are indexed from 1");
        if k <= self.head.len() {
            return self.head[k - 1];
        }
        match &self.tail {
            GapTail::AllZero => 0,
            GapTail::Periodic(p) => p[(k - self.head.len() - 1) % p.len()],
        }
    }

    /// `m̄_k`, with `m̄_0 = 0`.
    pub fn cumulative(&self, k: usize) -> usize {
        let n = self.head.len();
        if k <= n {
            return self.head[..k].iter().sum();
        }
        let head_sum: usize = self.head.iter().sum();
        match &self.tail {
            GapTail::AllZero => head_sum,
            GapTail::Periodic(p) => {
                let j = k - n;
                let full: usize = p.iter().sum();
                head_sum + (j / p.len()) * full + p[..j % p.len()].iter().sum::<usize>()
            }
        }
    }

    pub fn first_gap(&self) -> usize {
        self.gap(1)
    }

    /// Checks `0 ≤ m_j ≤ m_1`, i.e. `m̄_k ≤ m̄_{k+1} ≤ m̄_k + m̄_1`.
    pub fn check_growth(&self) -> Result<(), SymbolicError> {
        let first = self.first_gap();
        let tail: &[usize] = match &self.tail {
            GapTail::AllZero => &[],
            GapTail::Periodic(p) => p,
        };
        for (i, &g) in self.head.iter().chain(tail).enumerate() {
            if g > first {
                return Err(SymbolicError::GapExceedsFirst {
                    index: i + 1,
                    gap: g,
                    first,
                });
            }
        }
        Ok(())
    }

    /// Rebuilds `R L^{m_1} R L^{m_2} R …`.
    pub fn to_sequence(&self) -> KneadingSeq {
        let block = |g: usize| std::iter::once(Symbol::R).chain(std::iter::repeat_n(Symbol::L, g));
        let pre: Vec<Symbol> = self.head.iter().flat_map(|&g| block(g)).collect();
        let period: Vec<Symbol> = match &self.tail {
            GapTail::AllZero => vec![Symbol::R],
            GapTail::Periodic(p) => p.iter().flat_map(|&g| block(g)).collect(),
        };
        KneadingSeq::periodic(pre, period).expect("period contains R")
    }
}

impl fmt::Display for GapSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "gaps={}", join(&self.head))?;
        match &self.tail {
            GapTail::AllZero => f.write_str(";tail=R"),
            GapTail::Periodic(p) => write!(f, ";period={}", join(p)),
        }
    }
}

impl FromStr for GapSeq {
    type Err = SymbolicError;

    /// `gaps=6,5,0;tail=R` or `gaps=1;period=0,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |pos, msg| SymbolicError::Syntax { pos, msg };
        let (gaps, rest) = s.split_once(';').ok_or(err(0, "expected `;`"))?;
        let list = gaps
            .strip_prefix("gaps=")
            .ok_or(err(0, "expected `gaps=`"))?;
        let offset = gaps.len() + 1;
        let parse_list = |text: &str, pos: usize| -> Result<Vec<usize>, SymbolicError> {
            if text.is_empty() {
                return Ok(Vec::new());
            }
            text.split(',')
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| err(pos, "expected a non-negative integer"))
                })
                .collect()
        };
        let head = parse_list(list, 5)?;
        let tail = if rest == "tail=R" {
            GapTail::AllZero
        } else if let Some(p) = rest.strip_prefix("period=") {
            let p = parse_list(p, offset + 7)?;
            if p.is_empty() {
                return Err(SymbolicError::EmptyPeriod);
            }
            GapTail::Periodic(p)
        } else {
            return Err(err(offset, "expected `tail=R` or `period=`"));
        };
        GapSeq::new(head, tail)
    }
}

/// Reads off the gaps of an infinite sequence `R L^{m_1} R L^{m_2} …`.
pub fn gap_decomposition(minf: &KneadingSeq) -> Result<GapSeq, SymbolicError> {
    let period = minf.period().ok_or(SymbolicError::NotInfinite)?;
    if minf.symbol_at(0) != Some(Symbol::R) {
        return Err(SymbolicError::StartsWithL);
    }
    if !period.contains(&Symbol::R) {
        return Err(SymbolicError::InfiniteGap);
    }
    let pre_len = minf.preperiod().len();
    // First R at or after the preperiod; from there on the sequence is a
    // rotation of the period starting with R.
    let start = (pre_len..pre_len + period.len())
        .find(|&i| minf.symbol_at(i) == Some(Symbol::R))
        .expect("period contains R");
    let r_positions: Vec<usize> = (0..=start)
        .filter(|&i| minf.symbol_at(i) == Some(Symbol::R))
        .collect();
    let head: Vec<usize> = r_positions.windows(2).map(|w| w[1] - w[0] - 1).collect();
    let q = period.len();
    let offsets: Vec<usize> = (0..q)
        .filter(|&i| minf.symbol_at(start + i) == Some(Symbol::R))
        .chain(std::iter::once(q))
        .collect();
    let per: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0] - 1).collect();
    GapSeq::new(head, GapTail::Periodic(per))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassVerdict {
    Yes,
    No,
    Unknown,
}

/// Whether `m = A*B` with `A = m|a` (and `B ≠ C`).
fn has_star_factor(m: &KneadingSeq, a: usize) -> bool {
    let block = a + 1;
    match m.tail() {
        Tail::TerminalC => {
            let total = m.preperiod().len() + 1;
            if a == 0 || !total.is_multiple_of(block) || total / block < 2 {
                return false;
            }
            let pre = m.preperiod();
            (1..total / block).all(|j| pre[j * block..j * block + a] == pre[..a])
        }
        Tail::Periodic(p) => {
            let span = m.preperiod().len() + p.len().lcm(&block) + 2 * block;
            let prefix = m.prefix(span + 3 * block);
            (1..=span / block + 1).all(|j| prefix[j * block..j * block + a] == prefix[..a])
        }
    }
}

/// Membership in the class of kneading sequences of the symmetric tent
/// family, checked up to `horizon` symbols.
///
/// I: maximality (exact). II: `m ≻ R^{*inf}` against a prefix of length
/// `horizon`. III: every factorization `m = A*B` has `A = R^{*j}`; factors
/// are searched up to length `horizon`. For `C`-terminated words the search
/// is exhaustive once `horizon` reaches the word length; for infinite words
/// it is exhaustive once `horizon` reaches preperiod + period (longer factors
/// either force a shorter preperiod or repeat a shorter factor).
pub fn in_class_m(m: &KneadingSeq, horizon: usize) -> ClassVerdict {
    if !m.is_maximal() {
        return ClassVerdict::No;
    }
    let feigenbaum = r_star_infinity_prefix(horizon);
    let above_feigenbaum = compare_symbols(m.symbols().take(horizon), feigenbaum);
    let mut unknown = match above_feigenbaum {
        Some(Ordering::Greater) => false,
        Some(_) => return ClassVerdict::No,
        None => true,
    };

    let exhaustive_bound = match m.tail() {
        Tail::TerminalC => m.preperiod().len(),
        Tail::Periodic(p) => m.preperiod().len() + p.len(),
    };
    let search = exhaustive_bound.min(horizon);
    if search < exhaustive_bound {
        unknown = true;
    }
    let powers: Vec<Vec<Symbol>> = (1..)
        .map(r_star_power)
        .take_while(|w| w.len() <= search.max(1))
        .collect();
    for a in 1..=search {
        if has_star_factor(m, a) {
            let factor = m.prefix(a);
            if !powers.contains(&factor) {
                return ClassVerdict::No;
            }
        }
    }
    if unknown {
        ClassVerdict::Unknown
    } else {
        ClassVerdict::Yes
    }
}
