//! Inductive inference of a DNF formula from labeled binary instances,
//! with graceful handling of missing bits.
//!
//! Instances are vectors of [`Trit`]s: 0, 1, or 1/2 for "unknown". The
//! trainer builds, for every (positive, negative) instance pair, the set
//! of literals that distinguish the pair, then greedily assembles
//! conjunctive terms by picking the literal of highest *relevance* (the
//! averaged reciprocal set sizes of the sets it appears in), erasing the
//! sets it settles, until every positive instance is covered by some
//! term. The result is a disjunction of conjunctions — a human-readable
//! formula such as `x1 ~x4 + x2 x3`.
//!
//! On fully determinate (no 1/2 bits), non-contradictory training data
//! the learned formula always has zero training error; the test suite
//! checks that against a brute-force evaluator.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A three-valued attribute: false, unknown, true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trit {
    Zero,
    Half,
    One,
}

impl Trit {
    pub fn value(self) -> f64 {
        match self {
            Trit::Zero => 0.0,
            Trit::Half => 0.5,
            Trit::One => 1.0,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Trit::One
        } else {
            Trit::Zero
        }
    }

    /// Maps 0.0 / 0.5 / 1.0 (within 1e-9) to a trit.
    pub fn from_f64(v: f64) -> Result<Self> {
        if (v - 0.0).abs() < 1e-9 {
            Ok(Trit::Zero)
        } else if (v - 0.5).abs() < 1e-9 {
            Ok(Trit::Half)
        } else if (v - 1.0).abs() < 1e-9 {
            Ok(Trit::One)
        } else {
            Err(Error::Data(format!(
                "attribute value {v} is not 0, 0.5 or 1"
            )))
        }
    }

    pub fn is_half(self) -> bool {
        self == Trit::Half
    }
}

/// A possibly negated attribute; `index` is 1-based as in the printed
/// formula (`x3`, `~x5`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub index: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(index: usize) -> Self {
        Literal {
            index,
            negated: false,
        }
    }

    pub fn negative(index: usize) -> Self {
        Literal {
            index,
            negated: true,
        }
    }

    pub fn complement(self) -> Self {
        Literal {
            index: self.index,
            negated: !self.negated,
        }
    }

    /// Fuzzy truth of the literal on an instance: x_k reads the trit,
    /// ~x_k reads its complement.
    pub fn truth(self, instance: &[Trit]) -> f64 {
        let v = instance[self.index - 1].value();
        if self.negated {
            1.0 - v
        } else {
            v
        }
    }

    /// Dense code used internally: literals ordered by (index, positive
    /// first).
    fn code(self) -> usize {
        (self.index - 1) * 2 + usize::from(self.negated)
    }

    fn from_code(code: usize) -> Self {
        Literal {
            index: code / 2 + 1,
            negated: code % 2 == 1,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~x{}", self.index)
        } else {
            write!(f, "x{}", self.index)
        }
    }
}

/// A conjunction of literals, in the order they were chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Term {
    pub literals: Vec<Literal>,
}

impl Term {
    /// min over literal truths; the empty term is identically 1.
    pub fn truth(&self, instance: &[Trit]) -> f64 {
        self.literals
            .iter()
            .map(|l| l.truth(instance))
            .fold(1.0, f64::min)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.contains(&lit)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A disjunction of terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    pub terms: Vec<Term>,
    pub n_attributes: usize,
}

impl Formula {
    /// max over term truths; the empty formula is identically 0.
    pub fn truth(&self, instance: &[Trit]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.truth(instance))
            .fold(0.0, f64::max)
    }

    /// Serializes as CSV with header `term_index,literal_index,negated`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term_index,literal_index,negated\n");
        for (ti, term) in self.terms.iter().enumerate() {
            for lit in &term.literals {
                out.push_str(&format!("{ti},{},{}\n", lit.index, lit.negated));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Formula> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Data("empty formula file".into()))?;
        if header.trim() != "term_index,literal_index,negated" {
            return Err(Error::Data(format!(
                "bad formula header: {header:?}"
            )));
        }
        let mut terms: Vec<Term> = Vec::new();
        let mut n_attributes = 0;
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>, what: &str| -> Result<String> {
                s.map(|v| v.trim().to_string()).ok_or_else(|| {
                    Error::Data(format!("formula line {}: missing {what}", lineno + 2))
                })
            };
            let ti: usize = parse(fields.next(), "term index")?
                .parse()
                .map_err(|e| Error::Data(format!("formula line {}: {e}", lineno + 2)))?;
            let li: usize = parse(fields.next(), "literal index")?
                .parse()
                .map_err(|e| Error::Data(format!("formula line {}: {e}", lineno + 2)))?;
            let neg: bool = parse(fields.next(), "negation flag")?
                .parse()
                .map_err(|e| Error::Data(format!("formula line {}: {e}", lineno + 2)))?;
            if li == 0 {
                return Err(Error::Data(format!(
                    "formula line {}: literal indices are 1-based",
                    lineno + 2
                )));
            }
            while terms.len() <= ti {
                terms.push(Term::default());
            }
            terms[ti].literals.push(Literal {
                index: li,
                negated: neg,
            });
            n_attributes = n_attributes.max(li);
        }
        Ok(Formula {
            terms,
            n_attributes,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Training options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UbrainConfig {
    /// Whether a formula truth of exactly 1/2 counts as positive.
    pub positive_at_half: bool,
}

impl Default for UbrainConfig {
    fn default() -> Self {
        UbrainConfig {
            positive_at_half: true,
        }
    }
}

/// A trained model: the formula plus the decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct UbrainModel {
    pub formula: Formula,
    pub config: UbrainConfig,
}

impl UbrainModel {
    pub fn classify(&self, instance: &[Trit]) -> bool {
        let t = self.formula.truth(instance);
        if self.config.positive_at_half {
            t >= 0.5
        } else {
            t > 0.5
        }
    }
}

// ---------------------------------------------------------------------------
// preprocessing
// ---------------------------------------------------------------------------

fn check_instances(instances: &[Vec<Trit>], n: usize, side: &str) -> Result<()> {
    for (i, inst) in instances.iter().enumerate() {
        if inst.len() != n {
            return Err(Error::Data(format!(
                "{side} instance {i} has {} attributes, expected {n}",
                inst.len()
            )));
        }
    }
    Ok(())
}

fn dedup(instances: &mut Vec<Vec<Trit>>) {
    let mut seen = BTreeSet::new();
    instances.retain(|inst| seen.insert(inst.clone()));
}

/// One simultaneous pass of uncertainty reduction inside one class: an
/// unknown bit of instance w is set to b when every classmate that
/// (a) agrees with w on all of w's determinate bits and (b) knows that
/// bit, knows it as b — and at least one such classmate exists.
fn reduce_uncertainty(instances: &[Vec<Trit>]) -> Vec<Vec<Trit>> {
    let mut out = instances.to_vec();
    for (wi, w) in instances.iter().enumerate() {
        if !w.iter().any(|t| t.is_half()) {
            continue;
        }
        // classmates compatible with w's determinate bits
        let mates: Vec<&Vec<Trit>> = instances
            .iter()
            .enumerate()
            .filter(|&(mi, m)| {
                mi != wi
                    && w.iter()
                        .zip(m.iter())
                        .all(|(&wb, &mb)| wb.is_half() || mb == wb)
            })
            .map(|(_, m)| m)
            .collect();
        for (b, slot) in out[wi].iter_mut().enumerate() {
            if !slot.is_half() {
                continue;
            }
            let votes: Vec<Trit> = mates
                .iter()
                .map(|m| m[b])
                .filter(|t| !t.is_half())
                .collect();
            if let Some(&first) = votes.first() {
                if votes.iter().all(|&v| v == first) {
                    *slot = first;
                }
            }
        }
    }
    out
}

/// Deduplicates each class, runs one uncertainty-reduction pass, then
/// checks the classes do not share an instance.
pub fn prepare(
    positives: &[Vec<Trit>],
    negatives: &[Vec<Trit>],
) -> Result<(Vec<Vec<Trit>>, Vec<Vec<Trit>>)> {
    let mut pos = positives.to_vec();
    let mut neg = negatives.to_vec();
    dedup(&mut pos);
    dedup(&mut neg);
    let mut pos = reduce_uncertainty(&pos);
    let mut neg = reduce_uncertainty(&neg);
    dedup(&mut pos);
    dedup(&mut neg);
    let neg_set: BTreeSet<&Vec<Trit>> = neg.iter().collect();
    for (i, p) in pos.iter().enumerate() {
        if neg_set.contains(p) {
            return Err(Error::Inconsistent(format!(
                "positive instance {i} also appears among the negatives; \
                 the classes are contradictory"
            )));
        }
    }
    Ok((pos, neg))
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

/// The distinguishing-literal set of a (positive, negative) pair: for
/// every attribute k, x_k when pos_k > neg_k, ~x_k when pos_k < neg_k,
/// and both when both are 1/2. Literal codes, sorted.
fn pair_set(pos: &[Trit], neg: &[Trit]) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, (&u, &v)) in pos.iter().zip(neg.iter()).enumerate() {
        let idx = k + 1;
        if u.is_half() && v.is_half() {
            out.push(Literal::positive(idx).code());
            out.push(Literal::negative(idx).code());
        } else if u.value() > v.value() {
            out.push(Literal::positive(idx).code());
        } else if u.value() < v.value() {
            out.push(Literal::negative(idx).code());
        }
    }
    out
}

/// Learns a DNF formula separating the positives from the negatives.
pub fn train(
    positives: &[Vec<Trit>],
    negatives: &[Vec<Trit>],
    config: &UbrainConfig,
) -> Result<UbrainModel> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Data(
            "training needs at least one instance of each class".into(),
        ));
    }
    let n = positives[0].len();
    if n == 0 {
        return Err(Error::Data("instances have no attributes".into()));
    }
    check_instances(positives, n, "positive")?;
    check_instances(negatives, n, "negative")?;
    let (pos, neg) = prepare(positives, negatives)?;

    let mut remaining: Vec<Vec<Trit>> = pos.clone();
    let mut terms: Vec<Term> = Vec::new();
    let q = neg.len();

    while !remaining.is_empty() {
        let p = remaining.len();
        // distinguishing sets, i-major over remaining positives,
        // j-minor over all negatives
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(p * q);
        for (i, pi) in remaining.iter().enumerate() {
            for (j, nj) in neg.iter().enumerate() {
                let s = pair_set(pi, nj);
                if s.is_empty() {
                    return Err(Error::Inconsistent(format!(
                        "positive instance {i} and negative instance {j} are \
                         indistinguishable"
                    )));
                }
                sets.push(s);
            }
        }
        let mut alive = vec![true; sets.len()];
        let mut term = Term::default();

        loop {
            if !alive.iter().any(|&a| a) {
                break;
            }
            // relevance of every literal over the alive sets:
            // R = (1/p) sum_i (1/q) sum_j [l in S_ij] / |S_ij|
            let mut relevance = vec![0.0f64; 2 * n];
            let mut row = vec![0.0f64; 2 * n];
            for i in 0..p {
                for r in &mut row {
                    *r = 0.0;
                }
                for j in 0..q {
                    let si = i * q + j;
                    if !alive[si] {
                        continue;
                    }
                    let w = 1.0 / sets[si].len() as f64;
                    for &code in &sets[si] {
                        row[code] += w;
                    }
                }
                for (acc, &r) in relevance.iter_mut().zip(&row) {
                    *acc += r / q as f64;
                }
            }
            for r in &mut relevance {
                *r /= p as f64;
            }
            // best eligible literal; codes ascend in (index, positive
            // first) order so strict > keeps the tie-break
            let mut best: Option<(usize, f64)> = None;
            for code in 0..2 * n {
                let lit = Literal::from_code(code);
                if term.contains(lit) || term.contains(lit.complement()) {
                    continue;
                }
                if relevance[code] <= 0.0 {
                    continue;
                }
                if best.map_or(true, |(_, r)| relevance[code] > r) {
                    best = Some((code, relevance[code]));
                }
            }
            let Some((code, _)) = best else {
                break;
            };
            let lit = Literal::from_code(code);
            term.literals.push(lit);
            let target = code;
            for (si, s) in sets.iter().enumerate() {
                if alive[si] && s.binary_search(&target).is_ok() {
                    alive[si] = false;
                }
            }
        }

        // which remaining positives does the term cover?
        let mut covered: Vec<usize> = (0..p)
            .filter(|&i| term.truth(&remaining[i]) >= 0.5)
            .collect();
        if covered.is_empty() {
            // specialize on the first uncovered positive: pin all of its
            // determinate bits
            let w = &remaining[0];
            term = Term {
                literals: w
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &t)| match t {
                        Trit::One => Some(Literal::positive(k + 1)),
                        Trit::Zero => Some(Literal::negative(k + 1)),
                        Trit::Half => None,
                    })
                    .collect(),
            };
            covered = (0..p)
                .filter(|&i| term.truth(&remaining[i]) >= 0.5)
                .collect();
            if covered.is_empty() {
                return Err(Error::Inconsistent(
                    "specialized term covers no positive instance; \
                     training cannot progress"
                        .into(),
                ));
            }
        }
        let covered_set: BTreeSet<usize> = covered.into_iter().collect();
        remaining = remaining
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !covered_set.contains(i))
            .map(|(_, inst)| inst)
            .collect();
        terms.push(term);
    }

    let formula = Formula {
        terms,
        n_attributes: n,
    };

    // the learned formula must reproduce the prepared training labels
    let mut offenders = Vec::new();
    for (i, inst) in pos.iter().enumerate() {
        if formula.truth(inst) < 0.5 {
            offenders.push(format!("positive {i} gets truth < 1/2"));
        }
    }
    for (j, inst) in neg.iter().enumerate() {
        if formula.truth(inst) >= 0.5 {
            offenders.push(format!("negative {j} gets truth >= 1/2"));
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Inconsistent(format!(
            "learned formula misclassifies training data: {}",
            offenders.join("; ")
        )));
    }

    Ok(UbrainModel {
        formula,
        config: *config,
    })
}

/// Convenience: converts crisp bit vectors to trit instances.
pub fn bits_to_trits(bits: &[bool]) -> Vec<Trit> {
    bits.iter().map(|&b| Trit::from_bit(b)).collect()
}
