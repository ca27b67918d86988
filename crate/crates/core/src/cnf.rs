//! CNF formulas with literal weights, DIMACS input/output and the
//! assignment-level semantics (weight, ones, satisfaction).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;

/// Exact rational weight.
pub type Weight = BigRational;

/// A literal in DIMACS convention: `v` or `-v` with `v >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1 && var <= i32::MAX as u32, "variable index out of range");
        if positive {
            Lit(var as i32)
        } else {
            Lit(-(var as i32))
        }
    }

    pub fn pos(var: u32) -> Self {
        Lit::new(var, true)
    }

    pub fn neg(var: u32) -> Self {
        Lit::new(var, false)
    }

    pub fn from_dimacs(value: i32) -> Option<Self> {
        (value != 0 && value != i32::MIN).then_some(Lit(value))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Self {
        Lit(-self.0)
    }
}

impl Ord for Lit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.var(), !self.is_positive()).cmp(&(other.var(), !other.is_positive()))
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A clause: sorted, duplicate-free, never containing a complementary pair.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Sorts and deduplicates `lits`. Returns `None` for a tautology.
    pub fn new(mut lits: Vec<Lit>) -> Option<Self> {
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause(lits))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Polarity of `var` in this clause, if it occurs.
    pub fn polarity(&self, var: u32) -> Option<bool> {
        self.0
            .binary_search_by(|l| l.var().cmp(&var))
            .ok()
            .map(|i| self.0[i].is_positive())
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.0.iter().any(|&l| assignment.value_of(l))
    }
}

/// Something dropped while normalizing clauses into a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Input clause (0-based, input order) contained `x` and `¬x`.
    TautologyDropped { clause: usize, line: Option<usize> },
    /// Input clause equal to an earlier one.
    DuplicateDropped {
        clause: usize,
        first: usize,
        line: Option<usize>,
    },
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |line: &Option<usize>| line.map(|l| format!(" (line {l})")).unwrap_or_default();
        match self {
            Normalization::TautologyDropped { clause, line } => {
                write!(f, "dropped tautological clause #{}{}", clause + 1, at(line))
            }
            Normalization::DuplicateDropped { clause, first, line } => write!(
                f,
                "dropped clause #{} duplicating clause #{}{}",
                clause + 1,
                first + 1,
                at(line)
            ),
        }
    }
}

/// A CNF formula seen as a set of clauses. Clause order is kept because
/// clause vertices of the incidence graph are numbered by it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    name: Option<String>,
}

impl Formula {
    /// Builds a formula, dropping tautologies and duplicate clauses.
    ///
    /// Panics if a literal refers to a variable outside `1..=num_vars`;
    /// use [`parse_dimacs`] for untrusted input.
    pub fn new(num_vars: usize, clauses: impl IntoIterator<Item = Vec<Lit>>) -> Self {
        Self::with_report(num_vars, clauses).0
    }

    pub fn with_report(
        num_vars: usize,
        clauses: impl IntoIterator<Item = Vec<Lit>>,
    ) -> (Self, Vec<Normalization>) {
        let raw: Vec<(Vec<Lit>, Option<usize>)> =
            clauses.into_iter().map(|c| (c, None)).collect();
        Self::build(num_vars, raw)
    }

    fn build(num_vars: usize, raw: Vec<(Vec<Lit>, Option<usize>)>) -> (Self, Vec<Normalization>) {
        let mut seen: HashMap<Clause, usize> = HashMap::new();
        let mut clauses = Vec::new();
        let mut notes = Vec::new();
        for (index, (lits, line)) in raw.into_iter().enumerate() {
            for l in &lits {
                assert!(
                    (l.var() as usize) <= num_vars,
                    "literal {l} out of range for {num_vars} variables"
                );
            }
            match Clause::new(lits) {
                None => notes.push(Normalization::TautologyDropped { clause: index, line }),
                Some(c) => {
                    if let Some(&first) = seen.get(&c) {
                        notes.push(Normalization::DuplicateDropped {
                            clause: index,
                            first,
                            line,
                        });
                    } else {
                        seen.insert(c.clone(), index);
                        clauses.push(c);
                    }
                }
            }
        }
        (
            Formula {
                num_vars,
                clauses,
                name: None,
            },
            notes,
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// `occurs[v]` is true iff variable `v` (1-based) appears in some clause.
    pub fn occurring_vars(&self) -> Vec<bool> {
        let mut occurs = vec![false; self.num_vars + 1];
        for c in &self.clauses {
            for l in c.lits() {
                occurs[l.var() as usize] = true;
            }
        }
        occurs
    }

    /// Total number of literal occurrences (= edges of the incidence graph).
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }
}

/// Weights of the two literals of every variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    positive: Vec<Weight>,
    negative: Vec<Weight>,
}

impl WeightFunction {
    pub fn unit(num_vars: usize) -> Self {
        WeightFunction {
            positive: vec![Weight::one(); num_vars],
            negative: vec![Weight::one(); num_vars],
        }
    }

    pub fn from_pairs(pairs: Vec<(Weight, Weight)>) -> Self {
        let (positive, negative) = pairs.into_iter().unzip();
        WeightFunction { positive, negative }
    }

    pub fn num_vars(&self) -> usize {
        self.positive.len()
    }

    pub fn set(&mut self, lit: Lit, weight: Weight) {
        let i = lit.var() as usize - 1;
        if lit.is_positive() {
            self.positive[i] = weight;
        } else {
            self.negative[i] = weight;
        }
    }

    pub fn of(&self, lit: Lit) -> &Weight {
        let i = lit.var() as usize - 1;
        if lit.is_positive() {
            &self.positive[i]
        } else {
            &self.negative[i]
        }
    }

    pub fn positive(&self, var: u32) -> &Weight {
        &self.positive[var as usize - 1]
    }

    pub fn negative(&self, var: u32) -> &Weight {
        &self.negative[var as usize - 1]
    }

    pub fn is_unit(&self) -> bool {
        self.positive.iter().chain(&self.negative).all(One::is_one)
    }
}

/// A total assignment of variables `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(num_vars: usize) -> Self {
        Assignment(vec![false; num_vars])
    }

    /// Bit `i` of `mask` is the value of variable `i + 1`.
    pub fn from_mask(num_vars: usize, mask: u64) -> Self {
        Assignment((0..num_vars).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn value_of(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0[var as usize - 1] = value;
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// `w(τ)`: product of the weights of the literals `τ` makes true.
pub fn assignment_weight(formula: &Formula, weights: &WeightFunction, tau: &Assignment) -> Weight {
    let mut product = Weight::one();
    for var in 1..=formula.num_vars() as u32 {
        let w = if tau.value(var) {
            weights.positive(var)
        } else {
            weights.negative(var)
        };
        if w.is_zero() {
            return Weight::zero();
        }
        product *= w;
    }
    product
}

pub fn satisfies(formula: &Formula, tau: &Assignment) -> bool {
    formula.clauses().iter().all(|c| c.is_satisfied_by(tau))
}

/// Result of reading a (weighted) DIMACS file.
#[derive(Clone, Debug)]
pub struct ParsedCnf {
    pub formula: Formula,
    pub weights: WeightFunction,
    pub warnings: Vec<String>,
}

/// Parses a rational written as `p/q`, an integer or a decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Option<Weight> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Weight::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut numer = BigInt::from_str(&digits).ok()?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Weight::new(numer, denom));
    }
    BigInt::from_str(text).ok().map(Weight::from_integer)
}

pub fn format_rational(value: &Weight) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering rounded half away from zero, e.g. `-0.333333`.
pub fn format_decimal(value: &Weight, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (value * Weight::from_integer(scale.clone())).round().to_integer();
    let negative = scaled < BigInt::zero();
    let digits = format!("{:0>width$}", scaled.magnitude().to_string(), width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Reads DIMACS CNF with optional `c p weight <lit> <w> [0]` lines.
///
/// Tautologies and duplicate clauses are dropped and reported in
/// [`ParsedCnf::warnings`]. Unweighted literals get weight 1.
pub fn parse_dimacs(text: &str) -> Result<ParsedCnf, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut weight_lines: Vec<(usize, Lit, Weight)> = Vec::new();
    let mut raw: Vec<(Vec<Lit>, Option<usize>)> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut current_start = 0;
    let mut warnings = Vec::new();

    for (index, line) in text.lines().enumerate() {
        let lineno = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == "%" {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() >= 4 && fields[0] == "p" && fields[1] == "weight" {
                let lit = fields[2]
                    .parse::<i32>()
                    .ok()
                    .and_then(Lit::from_dimacs)
                    .ok_or_else(|| ParseError::new(lineno, "bad literal in weight line"))?;
                let weight = parse_rational(fields[3])
                    .ok_or_else(|| ParseError::new(lineno, "bad weight value"))?;
                if fields.len() > 4 && fields[4] != "0" {
                    return Err(ParseError::new(lineno, "weight line must end with 0"));
                }
                weight_lines.push((lineno, lit, weight));
            }
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::new(lineno, "duplicate problem line"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(ParseError::new(lineno, "malformed header, expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2]
                .parse::<usize>()
                .map_err(|_| ParseError::new(lineno, "malformed variable count"))?;
            let clauses = fields[3]
                .parse::<usize>()
                .map_err(|_| ParseError::new(lineno, "malformed clause count"))?;
            header = Some((vars, clauses, lineno));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(ParseError::new(lineno, "clause before `p cnf` header"));
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| ParseError::new(lineno, format!("invalid literal `{token}`")))?;
            if value == 0 {
                raw.push((std::mem::take(&mut current), Some(current_start)));
                continue;
            }
            if value.unsigned_abs() as usize > num_vars {
                return Err(ParseError::new(
                    lineno,
                    format!("literal {value} out of range for {num_vars} variables"),
                ));
            }
            if current.is_empty() {
                current_start = lineno;
            }
            current.push(Lit(value as i32));
        }
    }

    let Some((num_vars, declared, header_line)) = header else {
        return Err(ParseError::new(text.lines().count().max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(ParseError::new(current_start, "clause not terminated by 0"));
    }
    if raw.len() != declared {
        warnings.push(format!(
            "line {header_line}: header declares {declared} clauses, found {}",
            raw.len()
        ));
    }

    let mut weights = WeightFunction::unit(num_vars);
    for (lineno, lit, weight) in weight_lines {
        if lit.var() as usize > num_vars {
            return Err(ParseError::new(lineno, format!("weighted literal {lit} out of range")));
        }
        weights.set(lit, weight);
    }

    let (formula, notes) = Formula::build(num_vars, raw);
    warnings.extend(notes.iter().map(ToString::to_string));
    Ok(ParsedCnf {
        formula,
        weights,
        warnings,
    })
}

/// Writes DIMACS; weights different from 1 become `c p weight` lines.
pub fn serialize_dimacs(formula: &Formula, weights: Option<&WeightFunction>) -> String {
    let mut out = String::new();
    if let Some(name) = formula.name() {
        out.push_str(&format!("c {name}\n"));
    }
    out.push_str(&format!("p cnf {} {}\n", formula.num_vars(), formula.num_clauses()));
    if let Some(w) = weights {
        for var in 1..=formula.num_vars() as u32 {
            for lit in [Lit::pos(var), Lit::neg(var)] {
                if !w.of(lit).is_one() {
                    out.push_str(&format!("c p weight {} {} 0\n", lit, format_rational(w.of(lit))));
                }
            }
        }
    }
    for clause in formula.clauses() {
        for lit in clause.lits() {
            out.push_str(&format!("{lit} "));
        }
        out.push_str("0\n");
    }
    out
}
