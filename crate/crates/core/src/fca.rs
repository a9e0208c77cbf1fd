//! Hybrid, null-boundary fuzzy cellular automata.
//!
//! Each cell carries one of sixteen linear rules: eight OR-type rules that
//! read some subset of `{left, self, right}` and their eight complements.
//! Fuzzy OR is the bounded sum `min(1, a + b + ...)` and NOT is `1 - x`, so
//! a whole automaton is described by a 0/1 dependency matrix `T` and a
//! complement mask: `next = mask ? 1 - min(1, T p) : min(1, T p)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step cap for [`evolve`].
pub const DEFAULT_MAX_STEPS: usize = 64;

/// `(code, left, self, right)` for the non-complemented rules. The complement
/// of a rule has code `255 - code` and the same dependencies.
const BASE_RULES: [(u8, bool, bool, bool); 8] = [
    (0, false, false, false),
    (170, false, false, true),
    (204, false, true, false),
    (238, false, true, true),
    (240, true, false, false),
    (250, true, false, true),
    (252, true, true, false),
    (254, true, true, true),
];

/// A single cell's local transition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FcaRule {
    code: u8,
    depends_left: bool,
    depends_self: bool,
    depends_right: bool,
    complemented: bool,
}

impl FcaRule {
    /// Looks up a rule number. Only the sixteen OR/NOR rules are accepted.
    pub fn from_code(code: u32) -> Result<Self> {
        for &(base, l, s, r) in &BASE_RULES {
            let complement = 255 - base as u32;
            if code == base as u32 || code == complement {
                return Ok(FcaRule {
                    code: code as u8,
                    depends_left: l,
                    depends_self: s,
                    depends_right: r,
                    complemented: code == complement,
                });
            }
        }
        Err(Error::UnknownRule(code))
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn depends_left(&self) -> bool {
        self.depends_left
    }

    pub fn depends_self(&self) -> bool {
        self.depends_self
    }

    pub fn depends_right(&self) -> bool {
        self.depends_right
    }

    pub fn complemented(&self) -> bool {
        self.complemented
    }

    /// The rule with the same dependencies and the opposite complement flag.
    pub fn complement(&self) -> FcaRule {
        FcaRule {
            code: 255 - self.code,
            complemented: !self.complemented,
            ..*self
        }
    }
}

impl TryFrom<u32> for FcaRule {
    type Error = Error;

    fn try_from(code: u32) -> Result<Self> {
        FcaRule::from_code(code)
    }
}

impl From<FcaRule> for u32 {
    fn from(rule: FcaRule) -> u32 {
        rule.code as u32
    }
}

/// Alias matching the rule-table lookup operation.
pub fn rule_dependency(code: u32) -> Result<FcaRule> {
    FcaRule::from_code(code)
}

/// Per-cell rules of a hybrid automaton, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleVector(Vec<FcaRule>);

impl RuleVector {
    pub fn new(rules: Vec<FcaRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::InvalidArgument("rule vector must have at least one cell".into()));
        }
        Ok(RuleVector(rules))
    }

    pub fn from_codes(codes: &[u32]) -> Result<Self> {
        let rules = codes
            .iter()
            .map(|&c| FcaRule::from_code(c))
            .collect::<Result<Vec<_>>>()?;
        RuleVector::new(rules)
    }

    /// The same rule on every one of `n` cells.
    pub fn uniform(rule: FcaRule, n: usize) -> Result<Self> {
        RuleVector::new(vec![rule; n])
    }

    /// Repeats this pattern cyclically (or truncates it) to exactly `n` cells.
    pub fn cyclic(&self, n: usize) -> Result<Self> {
        RuleVector::new(self.0.iter().copied().cycle().take(n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rules(&self) -> &[FcaRule] {
        &self.0
    }

    pub fn codes(&self) -> Vec<u32> {
        self.0.iter().map(|r| r.code as u32).collect()
    }
}

impl FromStr for RuleVector {
    type Err = Error;

    /// Parses comma-separated decimal rule numbers, e.g. `"238,254,238,252"`.
    fn from_str(s: &str) -> Result<Self> {
        let codes = s
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|e| Error::RuleParse {
                    input: s.to_string(),
                    reason: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RuleVector::from_codes(&codes)
    }
}

impl fmt::Display for RuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", r.code)?;
        }
        Ok(())
    }
}

/// Row-major 0/1 matrix; row `i` marks which cells feed cell `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl DependencyMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

impl fmt::Display for DependencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplementMask(Vec<bool>);

impl ComplementMask {
    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Builds the dependency matrix and complement mask for a rule vector.
/// Neighbours outside the lattice are dropped (null boundary).
pub fn build_dependency_matrix(rules: &RuleVector) -> (DependencyMatrix, ComplementMask) {
    let n = rules.len();
    let mut entries = vec![0u8; n * n];
    for (i, rule) in rules.rules().iter().enumerate() {
        let row = &mut entries[i * n..(i + 1) * n];
        if rule.depends_left && i > 0 {
            row[i - 1] = 1;
        }
        if rule.depends_self {
            row[i] = 1;
        }
        if rule.depends_right && i + 1 < n {
            row[i + 1] = 1;
        }
    }
    let mask = rules.rules().iter().map(|r| r.complemented).collect();
    (DependencyMatrix { n, entries }, ComplementMask(mask))
}

/// Cell values of an automaton, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyState(Vec<f64>);

impl FuzzyState {
    pub fn new(cells: Vec<f64>) -> Result<Self> {
        if let Some((cell, &value)) = cells.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::StateOutOfRange { cell, value });
        }
        Ok(FuzzyState(cells))
    }

    pub fn zeros(n: usize) -> Self {
        FuzzyState(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cells(&self) -> &[f64] {
        &self.0
    }

    fn bit_key(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }
}

impl fmt::Display for FuzzyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v:.2}")?;
        }
        f.write_str(")")
    }
}

/// One synchronous update of every cell.
pub fn step(p: &FuzzyState, t: &DependencyMatrix, mask: &ComplementMask) -> Result<FuzzyState> {
    let n = t.size();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: p.len(),
        });
    }
    if mask.0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: mask.0.len(),
        });
    }
    let next = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(n);
            let mut s = 0.0;
            for j in lo..hi {
                if t.get(i, j) != 0 {
                    s += p.0[j];
                }
            }
            let s = s.min(1.0);
            if mask.0[i] {
                1.0 - s
            } else {
                s
            }
        })
        .collect();
    Ok(FuzzyState(next))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalKind {
    FixedPoint,
    Cycle,
    StepCap,
}

/// States visited by [`evolve`].
///
/// When the run ends on a repeat, `states` ends with the repeated state, so a
/// fixed point `p` appears as `[.., p, p]` and a cycle as `[.., a, .., a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<FuzzyState>,
    pub terminal_kind: TerminalKind,
    pub attractor: FuzzyState,
}

impl Trajectory {
    /// Length of the detected cycle (1 for a fixed point), if any.
    pub fn period(&self) -> Option<usize> {
        match self.terminal_kind {
            TerminalKind::StepCap => None,
            _ => {
                let last = self.states.last()?;
                let first = self.states.iter().position(|s| s == last)?;
                Some(self.states.len() - 1 - first)
            }
        }
    }
}

/// Iterates [`step`] from `p0` until a state repeats exactly or `max_steps`
/// steps have been taken.
pub fn evolve(p0: &FuzzyState, t: &DependencyMatrix, mask: &ComplementMask, max_steps: usize) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    seen.insert(p0.bit_key(), 0);
    let mut states = vec![p0.clone()];

    for _ in 0..max_steps {
        let next = step(states.last().expect("non-empty"), t, mask)?;
        let key = next.bit_key();
        if let Some(&first) = seen.get(&key) {
            let terminal_kind = if first == states.len() - 1 {
                TerminalKind::FixedPoint
            } else {
                TerminalKind::Cycle
            };
            let attractor = states[first].clone();
            states.push(next);
            return Ok(Trajectory {
                states,
                terminal_kind,
                attractor,
            });
        }
        seen.insert(key, states.len());
        states.push(next);
    }

    let attractor = states.last().expect("non-empty").clone();
    Ok(Trajectory {
        states,
        terminal_kind: TerminalKind::StepCap,
        attractor,
    })
}

/// Reduces a real vector to `n` cells by averaging contiguous buckets and
/// clamping to `[0, 1]`. The first `m % n` buckets take one extra component.
pub fn encode_vector(v: &[f64], n: usize) -> Result<FuzzyState> {
    let m = v.len();
    if m == 0 {
        return Err(Error::EmptyVector);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("cell count must be at least 1".into()));
    }
    if n > m {
        return Err(Error::TooManyCells { cells: n, dim: m });
    }
    let base = m / n;
    let extra = m % n;
    let mut cells = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let len = base + usize::from(i < extra);
        let bucket = &v[start..start + len];
        let mean = bucket.iter().sum::<f64>() / len as f64;
        cells.push(mean.clamp(0.0, 1.0));
        start += len;
    }
    Ok(FuzzyState(cells))
}

/// A ready-to-run automaton: rules plus their matrix form.
#[derive(Debug, Clone)]
pub struct Automaton {
    rules: RuleVector,
    matrix: DependencyMatrix,
    mask: ComplementMask,
}

impl Automaton {
    pub fn new(rules: RuleVector) -> Self {
        let (matrix, mask) = build_dependency_matrix(&rules);
        Automaton { rules, matrix, mask }
    }

    pub fn rules(&self) -> &RuleVector {
        &self.rules
    }

    pub fn matrix(&self) -> &DependencyMatrix {
        &self.matrix
    }

    pub fn mask(&self) -> &ComplementMask {
        &self.mask
    }

    pub fn size(&self) -> usize {
        self.rules.len()
    }

    pub fn step(&self, p: &FuzzyState) -> Result<FuzzyState> {
        step(p, &self.matrix, &self.mask)
    }

    pub fn evolve(&self, p0: &FuzzyState, max_steps: usize) -> Result<Trajectory> {
        evolve(p0, &self.matrix, &self.mask, max_steps)
    }
}
