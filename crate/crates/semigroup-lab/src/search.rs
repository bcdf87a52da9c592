//! Substitution-chain search and validation: bidirectional bounded BFS
//! between two words, proof replay, and complexity profiling.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::invariant::{refute, InvariantCertificate};
use crate::rewrite::{
    apply_step, parse_identity, successors, Direction, Identity, RewriteError, RewriteStep,
    StepBounds,
};
use crate::word::{parse_word, ParseError, Word};

/// A validated substitution chain: replaying `steps` from `start` yields
/// the proof's end word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub identity: Identity,
    pub start: Word,
    pub steps: Vec<RewriteStep>,
}

/// Why replaying a proof failed, with the exact step index.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
#[error("step {index} failed: {reason}")]
pub struct ProofFailure {
    pub index: usize,
    pub reason: RewriteError,
}

impl Proof {
    pub fn new(identity: Identity, start: Word, steps: Vec<RewriteStep>) -> Proof {
        Proof {
            identity,
            start,
            steps,
        }
    }

    /// Replays the chain, returning every word in order (including the
    /// start), or the first failing step.
    pub fn replay(&self) -> Result<Vec<Word>, ProofFailure> {
        let mut words = Vec::with_capacity(self.steps.len() + 1);
        words.push(self.start.clone());
        for (index, step) in self.steps.iter().enumerate() {
            let current = words.last().unwrap();
            let next = apply_step(current, &self.identity, step, usize::MAX)
                .map_err(|reason| ProofFailure { index, reason })?;
            words.push(next);
        }
        Ok(words)
    }

    /// The proof's end word.
    pub fn end(&self) -> Result<Word, ProofFailure> {
        Ok(self.replay()?.pop().unwrap())
    }

    /// Replay succeeds; reports the exact failing step otherwise.
    pub fn validate(&self) -> Result<(), ProofFailure> {
        self.replay().map(|_| ())
    }

    /// Appends another proof whose start is this proof's end.
    pub fn extend(&mut self, other: &Proof) {
        self.steps.extend(other.steps.iter().cloned());
    }

    /// The proof running the same steps in reverse, from end to start.
    pub fn reversed(&self) -> Result<Proof, ProofFailure> {
        let end = self.end()?;
        let steps = self.steps.iter().rev().map(RewriteStep::reversed).collect();
        Ok(Proof {
            identity: self.identity.clone(),
            start: end,
            steps,
        })
    }
}

/// Budgets for bidirectional search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub bounds: StepBounds,
    /// Expanded-node budget (generated nodes are free).
    pub max_nodes: usize,
    pub max_depth: Option<usize>,
}

impl SearchLimits {
    pub fn new(bounds: StepBounds, max_nodes: usize) -> SearchLimits {
        assert!(max_nodes >= 1);
        SearchLimits {
            bounds,
            max_nodes,
            max_depth: None,
        }
    }
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits::new(StepBounds::default(), 1_000_000)
    }
}

/// Frontier statistics reported when the budget runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExhaustionReport {
    pub nodes_expanded: usize,
    pub depth_from_source: usize,
    pub depth_from_target: usize,
    pub frontier_source: usize,
    pub frontier_target: usize,
}

impl fmt::Display for ExhaustionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "exhausted after {} expanded nodes (depth {}+{}, frontiers {}/{})",
            self.nodes_expanded,
            self.depth_from_source,
            self.depth_from_target,
            self.frontier_source,
            self.frontier_target
        )
    }
}

/// Outcome of [`search`].
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Proved(Proof),
    Refuted(InvariantCertificate),
    Exhausted(ExhaustionReport),
}

/// Finds a substitution chain from `source` to `target`, or refutes the
/// equivalence via a counting certificate, or exhausts its budget.
/// Deterministic for fixed limits.
pub fn search(id: &Identity, source: &Word, target: &Word, limits: &SearchLimits) -> SearchOutcome {
    assert!(!source.is_empty() && !target.is_empty());
    if let Some(certificate) = refute(id, source, target) {
        return SearchOutcome::Refuted(certificate);
    }
    match connect(id, source, target, limits) {
        Ok(steps) => SearchOutcome::Proved(Proof::new(id.clone(), source.clone(), steps)),
        Err(report) => SearchOutcome::Exhausted(report),
    }
}

/// Bidirectional BFS meeting in the middle, frontier deduplication by
/// word, parent pointers for chain reconstruction. Ties between meeting
/// points are broken by canonical order, so the result does not depend on
/// expansion schedule.
pub fn connect(
    id: &Identity,
    source: &Word,
    target: &Word,
    limits: &SearchLimits,
) -> Result<Vec<RewriteStep>, ExhaustionReport> {
    if source == target {
        return Ok(Vec::new());
    }

    // parent map: word -> (parent word, step applied to the parent).
    type Visited = HashMap<Word, Option<(Word, RewriteStep)>>;
    let mut visited_s: Visited = HashMap::new();
    let mut visited_t: Visited = HashMap::new();
    visited_s.insert(source.clone(), None);
    visited_t.insert(target.clone(), None);
    let mut frontier_s = vec![source.clone()];
    let mut frontier_t = vec![target.clone()];
    let mut depth_s = 0usize;
    let mut depth_t = 0usize;
    let mut expanded = 0usize;

    loop {
        let exhausted = |expanded: usize,
                         depth_s: usize,
                         depth_t: usize,
                         fs: &Vec<Word>,
                         ft: &Vec<Word>| ExhaustionReport {
            nodes_expanded: expanded,
            depth_from_source: depth_s,
            depth_from_target: depth_t,
            frontier_source: fs.len(),
            frontier_target: ft.len(),
        };
        if frontier_s.is_empty() || frontier_t.is_empty() {
            return Err(exhausted(expanded, depth_s, depth_t, &frontier_s, &frontier_t));
        }
        if let Some(max_depth) = limits.max_depth {
            if depth_s + depth_t >= max_depth {
                return Err(exhausted(expanded, depth_s, depth_t, &frontier_s, &frontier_t));
            }
        }

        let from_source = frontier_s.len() <= frontier_t.len();
        let (frontier, own, other) = if from_source {
            (&mut frontier_s, &mut visited_s, &mut visited_t)
        } else {
            (&mut frontier_t, &mut visited_t, &mut visited_s)
        };

        let mut next_frontier = Vec::new();
        let mut meetings: Vec<Word> = Vec::new();
        for word in frontier.iter() {
            expanded += 1;
            if expanded > limits.max_nodes {
                return Err(ExhaustionReport {
                    nodes_expanded: expanded - 1,
                    depth_from_source: depth_s,
                    depth_from_target: depth_t,
                    frontier_source: frontier_s.len(),
                    frontier_target: frontier_t.len(),
                });
            }
            for (next, step) in successors(word, id, &limits.bounds) {
                if own.contains_key(&next) {
                    continue;
                }
                own.insert(next.clone(), Some((word.clone(), step)));
                if other.contains_key(&next) {
                    meetings.push(next.clone());
                }
                next_frontier.push(next);
            }
        }

        if let Some(meeting) = meetings
            .into_iter()
            .min_by(|a, b| a.canonical_cmp(b))
        {
            return Ok(reconstruct(id, &meeting, &visited_s, &visited_t));
        }

        next_frontier.sort_by(|a, b| a.canonical_cmp(b));
        next_frontier.dedup();
        *frontier = next_frontier;
        if from_source {
            depth_s += 1;
        } else {
            depth_t += 1;
        }
    }
}

fn reconstruct(
    id: &Identity,
    meeting: &Word,
    visited_s: &HashMap<Word, Option<(Word, RewriteStep)>>,
    visited_t: &HashMap<Word, Option<(Word, RewriteStep)>>,
) -> Vec<RewriteStep> {
    let _ = id;
    // Walk meeting -> source, reversing as we go.
    let mut forward: Vec<RewriteStep> = Vec::new();
    let mut cursor = meeting.clone();
    while let Some(Some((parent, step))) = visited_s.get(&cursor) {
        forward.push(step.clone());
        cursor = parent.clone();
    }
    forward.reverse();

    // Walk meeting -> target; each recorded step goes parent -> child, so
    // the path away from the meeting uses the reversed steps.
    let mut cursor = meeting.clone();
    while let Some(Some((parent, step))) = visited_t.get(&cursor) {
        forward.push(step.reversed());
        cursor = parent.clone();
    }
    forward
}

/// Complexity statistics of a validated proof (§7-style measures).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofProfile {
    pub step_count: usize,
    pub max_intermediate_length: usize,
    /// Number of local maxima of the length sequence (plateaus collapsed).
    pub peak_count: usize,
    /// Lengths non-decreasing then non-increasing.
    pub is_mountain: bool,
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ProfileError {
    #[error("proof does not validate: {0}")]
    InvalidProof(ProofFailure),
}

/// Exact statistics over the replayed length sequence.
pub fn profile(proof: &Proof) -> Result<ProofProfile, ProfileError> {
    let words = proof.replay().map_err(ProfileError::InvalidProof)?;
    let lengths: Vec<usize> = words.iter().map(Word::len).collect();
    let mut strict: Vec<usize> = Vec::new();
    for &l in &lengths {
        if strict.last() != Some(&l) {
            strict.push(l);
        }
    }
    let mut peak_count = 0;
    for i in 0..strict.len() {
        let rises_into = i == 0 || strict[i - 1] < strict[i];
        let falls_out = i + 1 == strict.len() || strict[i + 1] < strict[i];
        if rises_into && falls_out {
            peak_count += 1;
        }
    }
    Ok(ProofProfile {
        step_count: proof.steps.len(),
        max_intermediate_length: lengths.iter().copied().max().unwrap_or(0),
        peak_count,
        is_mountain: peak_count <= 1,
    })
}

/// Renders a proof in the line-oriented script format:
///
/// ```text
/// axiom: <identity>
/// start: <word>
/// <+|-> @<pos> P=<word> Q=<word> -> <resulting word>
/// ```
pub fn proof_to_script(proof: &Proof) -> Result<String, ProofFailure> {
    let words = proof.replay()?;
    let mut out = String::new();
    out.push_str(&format!("axiom: {}\n", proof.identity));
    out.push_str(&format!("start: {}\n", proof.start));
    for (step, result) in proof.steps.iter().zip(words.iter().skip(1)) {
        out.push_str(&format!(
            "{} @{} P={} Q={} -> {}\n",
            step.direction, step.position, step.p, step.q, result
        ));
    }
    Ok(out)
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    BadWord {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    BadIdentity(RewriteError),
    #[error("step {index} does not produce its stated word")]
    StatedWordMismatch { index: usize },
    #[error("{0}")]
    Replay(ProofFailure),
}

/// Parses the proof-script format, replaying each step and checking the
/// stated resulting words as it goes.
pub fn parse_proof_script(text: &str) -> Result<Proof, ScriptError> {
    let mut identity: Option<Identity> = None;
    let mut start: Option<Word> = None;
    let mut steps: Vec<RewriteStep> = Vec::new();
    let mut stated: Vec<Word> = Vec::new();

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let number = line_no + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("axiom:") {
            identity = Some(parse_identity(rest.trim()).map_err(ScriptError::BadIdentity)?);
        } else if let Some(rest) = line.strip_prefix("start:") {
            start = Some(parse_word(rest.trim()).map_err(|source| ScriptError::BadWord {
                line: number,
                source,
            })?);
        } else {
            let malformed = |message: &str| ScriptError::Malformed {
                line: number,
                message: message.into(),
            };
            let direction = match line.as_bytes().first() {
                Some(b'+') => Direction::Forward,
                Some(b'-') => Direction::Backward,
                _ => return Err(malformed("expected '+' or '-'")),
            };
            let rest = line[1..].trim_start();
            let rest = rest
                .strip_prefix('@')
                .ok_or_else(|| malformed("expected '@<pos>'"))?;
            let (pos_text, rest) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| malformed("expected step fields after position"))?;
            let position: usize = pos_text
                .parse()
                .map_err(|_| malformed("bad position"))?;
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix("P=")
                .ok_or_else(|| malformed("expected 'P=<word>'"))?;
            let (p_text, rest) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| malformed("expected 'Q=<word>'"))?;
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix("Q=")
                .ok_or_else(|| malformed("expected 'Q=<word>'"))?;
            let (q_text, rest) = rest
                .split_once("->")
                .ok_or_else(|| malformed("expected '-> <word>'"))?;
            let bad_word = |source| ScriptError::BadWord {
                line: number,
                source,
            };
            let p = parse_word(p_text.trim()).map_err(bad_word)?;
            let q = parse_word(q_text.trim()).map_err(bad_word)?;
            let result = parse_word(rest.trim()).map_err(bad_word)?;
            steps.push(RewriteStep::new(direction, position, p, q));
            stated.push(result);
        }
    }

    let identity = identity.ok_or(ScriptError::Malformed {
        line: 0,
        message: "missing 'axiom:' line".into(),
    })?;
    let start = start.ok_or(ScriptError::Malformed {
        line: 0,
        message: "missing 'start:' line".into(),
    })?;
    let proof = Proof::new(identity, start, steps);
    let words = proof.replay().map_err(ScriptError::Replay)?;
    for (index, (got, want)) in words.iter().skip(1).zip(stated.iter()).enumerate() {
        if got != want {
            return Err(ScriptError::StatedWordMismatch { index });
        }
    }
    Ok(proof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::parse_identity;
    use crate::word::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn id(s: &str) -> Identity {
        parse_identity(s).unwrap()
    }

    #[test]
    fn search_finds_thm_3_2_chain() {
        // yx ~ (xy)^2 implies yx ~ xy.
        let outcome = search(&id("yx ~ xyxy"), &w("yx"), &w("xy"), &SearchLimits::default());
        match outcome {
            SearchOutcome::Proved(proof) => {
                proof.validate().unwrap();
                assert_eq!(proof.start, w("yx"));
                assert_eq!(proof.end().unwrap(), w("xy"));
            }
            other => panic!("expected a proof, got {other:?}"),
        }
    }

    #[test]
    fn search_refutes_via_invariant() {
        let outcome = search(
            &id("(xy)^2 ~ (yx)^2"),
            &w("(xy)^3"),
            &w("(yx)^3"),
            &SearchLimits::default(),
        );
        match outcome {
            SearchOutcome::Refuted(cert) => cert.verify().unwrap(),
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn search_exhausts_on_inert_axiom() {
        // xy ~ xy generates no nontrivial steps, and no counting invariant
        // separates xy from yx.
        let outcome = search(&id("xy ~ xy"), &w("xy"), &w("yx"), &SearchLimits::default());
        assert!(matches!(outcome, SearchOutcome::Exhausted(_)));
    }

    #[test]
    fn search_is_deterministic() {
        let limits = SearchLimits::default();
        let a = search(&id("yx ~ xyxy"), &w("yx"), &w("xy"), &limits);
        let b = search(&id("yx ~ xyxy"), &w("yx"), &w("xy"), &limits);
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_proof_reports_failing_index() {
        let outcome = search(&id("yx ~ xyxy"), &w("yx"), &w("xy"), &SearchLimits::default());
        let SearchOutcome::Proved(mut proof) = outcome else {
            panic!("expected proof");
        };
        let perturbed = proof.steps.len() - 1;
        proof.steps[perturbed].position += 7;
        let failure = proof.validate().unwrap_err();
        assert_eq!(failure.index, perturbed);
        assert!(matches!(
            failure.reason,
            RewriteError::NoMatchAtPosition { .. }
        ));
    }

    #[test]
    fn profile_single_step() {
        let axiom = id("yx ~ xyxy");
        let proof = Proof::new(
            axiom,
            w("yx"),
            vec![RewriteStep::new(Direction::Forward, 0, w("x"), w("y"))],
        );
        let stats = profile(&proof).unwrap();
        assert_eq!(stats.step_count, 1);
        assert!(stats.peak_count <= 1);
        assert!(stats.is_mountain);
    }

    #[test]
    fn profile_detects_valleys() {
        // Force a descend-then-ascend chain: xyxy -> yx -> xyxy -> yx.
        let axiom = id("yx ~ xyxy");
        let back = RewriteStep::new(Direction::Backward, 0, w("x"), w("y"));
        let fwd = RewriteStep::new(Direction::Forward, 0, w("x"), w("y"));
        let proof = Proof::new(axiom, w("xyxy"), vec![back.clone(), fwd.clone(), back.clone()]);
        let stats = profile(&proof).unwrap();
        assert_eq!(stats.peak_count, 2);
        assert!(!stats.is_mountain);

        let proof = Proof::new(id("yx ~ xyxy"), w("yx"), vec![fwd, back]);
        let stats = profile(&proof).unwrap();
        assert_eq!(stats.peak_count, 1);
        assert!(stats.is_mountain);
    }

    #[test]
    fn script_round_trip() {
        let outcome = search(&id("yx ~ xyxy"), &w("yx"), &w("xy"), &SearchLimits::default());
        let SearchOutcome::Proved(proof) = outcome else {
            panic!("expected proof");
        };
        let script = proof_to_script(&proof).unwrap();
        assert!(script.starts_with("axiom: yx ~ xyxy\nstart: yx\n"));
        let parsed = parse_proof_script(&script).unwrap();
        assert_eq!(parsed, proof);
    }

    #[test]
    fn script_rejects_tampered_results() {
        let script = "axiom: yx ~ xyxy\nstart: yx\n+ @0 P=x Q=y -> yxyx\n";
        assert_eq!(
            parse_proof_script(script),
            Err(ScriptError::StatedWordMismatch { index: 0 })
        );
    }
}
