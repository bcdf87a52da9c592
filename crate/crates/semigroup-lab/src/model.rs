//! Finite free models on two (or three) generators: bounded enumeration of
//! equivalence classes, canonical representatives, Cayley tables, and group
//! analysis.
//!
//! Two construction routes exist. For identities of the shape
//! `x^m y x^n ~ y` with `gcd(m, n) = 2` and `m + n` divisible by 4, the
//! model is built from certified normal forms: every class is reduced to a
//! spelling `a^i b^j`, `a^i b^j a`, or `a^i b^j ab` by an explicit chain of
//! primitive rewrite steps that is replayed and validated. For every other
//! identity a generic bounded closure runs union-find over one-step
//! successor edges and may honestly report non-convergence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::invariant::{certify_mod, count_delta_forms, gcd, CertifyOutcome};
use crate::rewrite::{
    apply_step, enumerate_words, Direction, Identity, RewriteStep, StepBounds,
};
use crate::search::Proof;
use crate::word::{Generator, Style, Word};

const A: Generator = Generator::X;
const B: Generator = Generator::Y;

/// Errors from model construction and analysis.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ModelError {
    /// The requested bounds cannot even hold the generators.
    #[error("enumeration limits too small: {0}")]
    LimitTooSmall(String),
    /// Analysis or export was requested on a partial model.
    #[error("model has not converged; a complete multiplication table is required")]
    NotConverged,
    /// The operation needs an identity of the shape `x^m y x^n ~ y` with
    /// the divisibility conditions of the normal-form route.
    #[error("identity does not have the required x^m y x^n ~ y shape")]
    UnsupportedIdentityShape,
    /// A rewrite chain outgrew its word-length budget.
    #[error("rewriting bound exceeded: {0}")]
    BoundExceeded(String),
    /// An internal certificate failed to validate; this indicates a bug,
    /// never a property of the input.
    #[error("internal certification failure: {0}")]
    Certification(String),
    /// Generator count outside the supported 2..=3 range.
    #[error("generator count must be 2 or 3, got {0}")]
    InvalidGeneratorCount(usize),
}

/// Bounds for [`enumerate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Longest representative word explored by the generic closure.
    pub max_rep_len: usize,
    /// Substitution bound handed to the successor generator.
    pub max_sub_len: usize,
    /// Consecutive length increments with no new class required before the
    /// generic closure may declare convergence.
    pub stability_window: usize,
}

impl EnumerationLimits {
    pub fn new(max_rep_len: usize, max_sub_len: usize, stability_window: usize) -> Self {
        assert!(max_rep_len >= 1 && max_sub_len >= 1 && stability_window >= 1);
        EnumerationLimits {
            max_rep_len,
            max_sub_len,
            stability_window,
        }
    }
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits::new(12, 4, 2)
    }
}

/// Whether the class set is known to be complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelStatus {
    Converged,
    /// The bound was reached while classes were still appearing or while
    /// the class set was not closed under multiplication by generators.
    NotConverged { explored_len: usize },
}

#[derive(Debug, Clone)]
enum Resolver {
    /// Classes are indexed by triplet signature.
    Shaped {
        m: usize,
        n: usize,
        index: HashMap<(usize, usize, bool), usize>,
    },
    /// Classes of every explored word.
    Generic { map: HashMap<Word, usize> },
}

/// A bounded quotient of the free semigroup on `a`, `b` (and optionally
/// `c`) by the consequence relation of an identity.
#[derive(Debug, Clone)]
pub struct FreeModel {
    identity: Identity,
    generator_count: usize,
    classes: Vec<Word>,
    table: Option<Vec<Vec<usize>>>,
    status: ModelStatus,
    resolver: Resolver,
}

impl FreeModel {
    pub fn identity(&self) -> &Identity {
        &self.identity
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    /// Number of classes found within the explored bound.
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    /// Canonical representatives in canonical order.
    pub fn classes(&self) -> &[Word] {
        &self.classes
    }

    pub fn representative(&self, index: usize) -> &Word {
        &self.classes[index]
    }

    pub fn status(&self) -> ModelStatus {
        self.status
    }

    pub fn is_converged(&self) -> bool {
        self.status == ModelStatus::Converged
    }

    /// Product of two classes; `None` on a partial model.
    pub fn multiply(&self, left: usize, right: usize) -> Option<usize> {
        self.table.as_ref().map(|t| t[left][right])
    }

    /// Class of an arbitrary word, if the model can resolve it.
    pub fn class_of(&self, w: &Word) -> Option<usize> {
        match &self.resolver {
            Resolver::Shaped { m, n, index } => {
                let sig = signature(w, *m, *n).ok()?;
                index.get(&sig.key()).copied()
            }
            Resolver::Generic { map } => map.get(w).copied(),
        }
    }
}

/// The complete class invariant for `x^m y x^n ~ y` with `m`, `n` even and
/// `m + n` divisible by 4: letter counts modulo `m + n` plus the parity of
/// the forward-pair count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TripletSignature {
    a_count: usize,
    b_count: usize,
    odd: bool,
    modulus: usize,
}

impl TripletSignature {
    pub fn a_count(&self) -> usize {
        self.a_count
    }

    pub fn b_count(&self) -> usize {
        self.b_count
    }

    /// True when the forward-pair count is odd.
    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    fn key(&self) -> (usize, usize, bool) {
        (self.a_count, self.b_count, self.odd)
    }

    /// Signature of a concatenation: counts add, and the parity picks up
    /// the cross term `g(u) * h(v)` from the concatenation law.
    pub fn compose(&self, other: &TripletSignature) -> TripletSignature {
        assert_eq!(self.modulus, other.modulus, "signature modulus mismatch");
        TripletSignature {
            a_count: (self.a_count + other.a_count) % self.modulus,
            b_count: (self.b_count + other.b_count) % self.modulus,
            odd: self.odd ^ other.odd ^ (self.a_count * other.b_count % 2 == 1),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for TripletSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.a_count,
            self.b_count,
            if self.odd { "odd" } else { "even" }
        )
    }
}

/// Triplet signature of a two-letter word for the identity
/// `x^m y x^n ~ y`; requires `m`, `n` even with `m + n` divisible by 4,
/// the conditions under which the parity is a step invariant.
pub fn signature(w: &Word, m: usize, n: usize) -> Result<TripletSignature, ModelError> {
    if m == 0 || n == 0 || m % 2 != 0 || n % 2 != 0 || (m + n) % 4 != 0 {
        return Err(ModelError::UnsupportedIdentityShape);
    }
    let f = w
        .forward_pairs()
        .map_err(|_| ModelError::UnsupportedIdentityShape)?;
    let modulus = m + n;
    Ok(TripletSignature {
        a_count: w.count(A) % modulus,
        b_count: w.count(B) % modulus,
        odd: f % 2 == 1,
        modulus,
    })
}

/// The exponents of an identity `x^m y x^n ~ y` (either side order).
fn detect_shape(id: &Identity) -> Option<(usize, usize)> {
    let (lhs, rhs) = if id.rhs().len() == 1 {
        (id.lhs(), id.rhs())
    } else {
        (id.rhs(), id.lhs())
    };
    if rhs.letters() != [B] {
        return None;
    }
    let letters = lhs.letters();
    let m = letters.iter().take_while(|&&g| g == A).count();
    if m == 0 || m + 1 > letters.len() || letters[m] != B {
        return None;
    }
    let n = letters.len() - m - 1;
    if n == 0 || letters[m + 1..].iter().any(|&g| g != A) {
        return None;
    }
    Some((m, n))
}

fn shaped_for_normal_form(id: &Identity) -> Option<(usize, usize)> {
    let (m, n) = detect_shape(id)?;
    // gcd(m, n) = 2 forces both exponents even and makes the square of
    // every word central, the engine behind the normal-form moves.
    if gcd(m as u64, n as u64) == 2 {
        Some((m, n))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Certified rewrite chains
// ---------------------------------------------------------------------------

/// A word being transformed by primitive steps, with every step recorded.
/// Each move is applied through `apply_step`, so an ill-formed move fails
/// immediately instead of corrupting the chain.
struct Chain<'a> {
    id: &'a Identity,
    m: usize,
    n: usize,
    word: Word,
    steps: Vec<RewriteStep>,
    cap: usize,
}

impl<'a> Chain<'a> {
    fn new(id: &'a Identity, m: usize, n: usize, word: Word) -> Chain<'a> {
        let mm = m + n;
        let cap = word.len() + 2 * mm * mm + 4 * mm + 64;
        Chain {
            id,
            m,
            n,
            word,
            steps: Vec::new(),
            cap,
        }
    }

    fn modulus(&self) -> usize {
        self.m + self.n
    }

    fn step(&mut self, direction: Direction, position: usize, p: Word, q: Word) -> Result<(), ModelError> {
        let step = RewriteStep::new(direction, position, p, q);
        self.word = apply_step(&self.word, self.id, &step, self.cap)
            .map_err(|e| ModelError::BoundExceeded(format!("{e} (chain step {})", self.steps.len())))?;
        self.steps.push(step);
        Ok(())
    }

    /// `u` at `pos` becomes `u^(m+n+1)`.
    fn grow_run(&mut self, pos: usize, u: &Word) -> Result<(), ModelError> {
        self.step(Direction::Backward, pos, u.clone(), u.clone())
    }

    /// `u^(m+n+1)` at `pos` becomes `u`.
    fn shrink_run(&mut self, pos: usize, u: &Word) -> Result<(), ModelError> {
        self.step(Direction::Forward, pos, u.clone(), u.clone())
    }

    /// The factor of length `len` at `pos` becomes `p^m <factor> p^n`.
    fn wrap(&mut self, pos: usize, len: usize, p: &Word) -> Result<(), ModelError> {
        let q = self.word.factor(pos, pos + len);
        self.step(Direction::Backward, pos, p.clone(), q)
    }

    /// `p^m q p^n` at `pos` becomes `q`, where `q` has length `qlen`.
    fn unwrap(&mut self, pos: usize, p: &Word, qlen: usize) -> Result<(), ModelError> {
        let qstart = pos + self.m * p.len();
        let q = self.word.factor(qstart, qstart + qlen);
        self.step(Direction::Forward, pos, p.clone(), q)
    }

    /// Smallest `alpha >= 1` with `alpha * m = 2 + k * (m+n)`; exists
    /// because `gcd(m, m+n) = 2`.
    fn commute_params(&self) -> Result<(usize, usize), ModelError> {
        let mm = self.modulus();
        for alpha in 1..=mm {
            if (alpha * self.m) % mm == 2 {
                return Ok((alpha, (alpha * self.m - 2) / mm));
            }
        }
        Err(ModelError::Certification(format!(
            "no commuting multiplier for m={}, n={}",
            self.m, self.n
        )))
    }

    /// `d u^2 -> u^2 d` for the factor `d` at `dpos` of length `dlen`
    /// followed immediately by `u u`. Afterwards `d` sits at
    /// `dpos + 2|u|`. This is the "any square is central" move.
    fn move_u2_left(&mut self, dpos: usize, dlen: usize, u: &Word) -> Result<(), ModelError> {
        let (alpha, k) = self.commute_params()?;
        let lu = u.len();
        for _ in 0..k {
            self.grow_run(dpos + dlen, u)?;
        }
        // Run is now u^(alpha * m); ferry u^m blocks across d one at a time.
        let mut p = dpos;
        for _ in 0..alpha {
            self.wrap(p, dlen, u)?;
            self.wrap(p + self.m * lu, dlen, u)?;
            self.shrink_run(p + 2 * self.m * lu + dlen, u)?;
            self.unwrap(p + self.m * lu, u, dlen)?;
            p += self.m * lu;
        }
        for _ in 0..k {
            self.shrink_run(dpos, u)?;
        }
        Ok(())
    }

    /// `u^2 d -> d u^2` with `u u` at `u2pos` and `d` right after it.
    fn move_u2_right(&mut self, u2pos: usize, dlen: usize, u: &Word) -> Result<(), ModelError> {
        let lu = u.len();
        let d = self.word.factor(u2pos + 2 * lu, u2pos + 2 * lu + dlen);
        let mut target_letters = self.word.letters()[..u2pos].to_vec();
        target_letters.extend_from_slice(d.letters());
        target_letters.extend_from_slice(&self.word.letters()[u2pos..u2pos + 2 * lu]);
        target_letters.extend_from_slice(&self.word.letters()[u2pos + 2 * lu + dlen..]);
        let target = Word::from_letters(target_letters);
        self.inverse_of(target, |c| c.move_u2_left(u2pos, dlen, u))
    }

    /// Runs `f` on a scratch chain starting from `target`, checks that it
    /// lands on the current word, and appends the reversed steps: the
    /// certified way to run any derived move backwards.
    fn inverse_of(
        &mut self,
        target: Word,
        f: impl Fn(&mut Chain<'_>) -> Result<(), ModelError>,
    ) -> Result<(), ModelError> {
        let mut scratch = Chain::new(self.id, self.m, self.n, target.clone());
        scratch.cap = scratch.cap.max(self.cap);
        f(&mut scratch)?;
        if scratch.word != self.word {
            return Err(ModelError::Certification(format!(
                "inverse move mismatch: expected {}, found {}",
                self.word.display(Style::Letters),
                scratch.word.display(Style::Letters)
            )));
        }
        for step in scratch.steps.iter().rev() {
            let rev = step.reversed();
            self.word = apply_step(&self.word, self.id, &rev, self.cap)
                .map_err(|e| ModelError::BoundExceeded(e.to_string()))?;
            self.steps.push(rev);
        }
        Ok(())
    }

    /// `c^(m+n) d1 ... -> d1 ...` for an exact-or-longer run starting at
    /// `run_pos` with at least one letter after it.
    fn strip_run_left(&mut self, run_pos: usize, c: Generator) -> Result<(), ModelError> {
        let mm = self.modulus();
        let u = Word::single(c);
        self.wrap(run_pos + mm, 1, &u)?;
        self.shrink_run(run_pos, &u)?;
        self.unwrap(run_pos, &u, 1)?;
        Ok(())
    }

    /// `d1 c^(m+n) -> d1` for the single letter at `dpos` followed by a
    /// run of at least `m+n` copies of `c`.
    fn strip_run_right(&mut self, dpos: usize, c: Generator) -> Result<(), ModelError> {
        let u = Word::single(c);
        self.wrap(dpos, 1, &u)?;
        self.shrink_run(dpos + self.m + 1, &u)?;
        self.unwrap(dpos, &u, 1)?;
        Ok(())
    }

    /// Prepends `c^(m+n)` to the whole word.
    fn insert_run_front(&mut self, c: Generator) -> Result<(), ModelError> {
        let mm = self.modulus();
        let mut letters = vec![c; mm];
        letters.extend_from_slice(self.word.letters());
        let target = Word::from_letters(letters);
        self.inverse_of(target, |chain| chain.strip_run_left(0, c))
    }

    /// Reduces every letter run to length at most `m + n`.
    fn shrink_all_runs(&mut self) -> Result<(), ModelError> {
        let mm = self.modulus();
        loop {
            let mut acted = false;
            let mut pos = 0;
            for (c, e) in blocks(&self.word) {
                if e > mm {
                    self.shrink_run(pos, &Word::single(c))?;
                    acted = true;
                    break;
                }
                pos += e;
            }
            if !acted {
                return Ok(());
            }
        }
    }
}

/// Maximal letter runs of a word as (letter, exponent) pairs.
fn blocks(w: &Word) -> Vec<(Generator, usize)> {
    let mut out: Vec<(Generator, usize)> = Vec::new();
    for &g in w.letters() {
        match out.last_mut() {
            Some((c, e)) if *c == g => *e += 1,
            _ => out.push((g, 1)),
        }
    }
    out
}

/// Splits the current word as `a^i b^j tail` with maximal leading runs.
/// The tail starts at letter `i + j`.
fn head_split(w: &Word) -> (usize, usize, usize) {
    let bl = blocks(w);
    let mut idx = 0;
    let mut i = 0;
    let mut j = 0;
    if idx < bl.len() && bl[idx].0 == A {
        i = bl[idx].1;
        idx += 1;
    }
    if idx < bl.len() && bl[idx].0 == B {
        j = bl[idx].1;
        idx += 1;
    }
    let tail_len = bl[idx..].iter().map(|(_, e)| e).sum();
    (i, j, tail_len)
}

/// Phase 1: move every letter square into the sorted `a^i b^j` head until
/// the remainder is a strictly alternating tail starting with `a`.
fn phase_collect_squares(chain: &mut Chain<'_>) -> Result<(), ModelError> {
    loop {
        chain.shrink_all_runs()?;
        let bl = blocks(&chain.word);
        let mut idx = 0;
        if idx < bl.len() && bl[idx].0 == A {
            idx += 1;
        }
        if idx < bl.len() && bl[idx].0 == B {
            idx += 1;
        }
        let mut pos: usize = bl[..idx].iter().map(|(_, e)| e).sum();
        let mut found = None;
        for (c, e) in &bl[idx..] {
            if *e >= 2 {
                found = Some((*c, pos));
                break;
            }
            pos += e;
        }
        let Some((c, mut pp)) = found else {
            return Ok(());
        };
        // Walk the pair left until it merges with a run of the same
        // letter, reaches the front, or (for a b-pair) sits right after
        // the pure-a prefix.
        loop {
            if pp == 0 {
                break;
            }
            let prev = chain.word.letters()[pp - 1];
            if prev == c {
                break;
            }
            if c == B && chain.word.letters()[..pp].iter().all(|&l| l == A) {
                break;
            }
            chain.move_u2_left(pp - 1, 1, &Word::single(c))?;
            pp -= 1;
        }
    }
}

/// Phase 2: shrink the alternating tail to one of the terminal spellings
/// `a^i b^j`, `a^i b^j a` (j odd), or `a^i b^j ab` (j odd). The tail moves
/// can recreate letter squares (the remainder may begin with `b`), so
/// square collection reruns before every shrink action.
fn phase_shrink_tail(chain: &mut Chain<'_>) -> Result<(), ModelError> {
    let mm = chain.modulus();
    loop {
        phase_collect_squares(chain)?;
        let (i, j, tail_len) = head_split(&chain.word);
        if tail_len == 0 {
            return Ok(());
        }
        if j % 2 == 1 && tail_len <= 2 {
            // a^i b^j a or a^i b^j ab with j odd: terminal.
            return Ok(());
        }
        if j % 2 == 0 {
            // The tail starts with a single a and j is even: move b^j
            // right past that a, absorbing it into the head.
            debug_assert!(j >= 2, "nonempty tail next to the a-run is impossible");
            let mut apos = i + j;
            for _ in 0..j / 2 {
                chain.move_u2_right(apos - 2, 1, &Word::single(B))?;
                apos -= 2;
            }
        } else {
            // j odd, tail of length >= 3 starting a b a.
            let (i, j) = if i == 0 {
                chain.insert_run_front(A)?;
                (mm, j)
            } else {
                (i, j)
            };
            // Move b^(j-1) left past a^i ...
            for pair in 0..(j - 1) / 2 {
                let mut pp = 2 * pair + i;
                for _ in 0..i {
                    chain.move_u2_left(pp - 1, 1, &Word::single(B))?;
                    pp -= 1;
                }
            }
            // ... exposing b^(j-1) a^(i-1) (ab)(ab) a; move the square
            // (ab)^2 right past the lone a ...
            let ab = Word::from_letters(vec![A, B]);
            chain.move_u2_right(j - 1 + i - 1, 1, &ab)?;
            // ... then return b^(j-1) to its place past a^(i+1).
            for pair in 0..(j - 1) / 2 {
                let mut pp = j - 3 - 2 * pair;
                for _ in 0..i + 1 {
                    chain.move_u2_right(pp, 1, &Word::single(B))?;
                    pp += 1;
                }
            }
        }
    }
}

/// The unique terminal spelling of a signature class. The three candidate
/// spellings with a given letter count have forward-pair parities `IJ`,
/// `(I-1)J`, and `(I-1)J + 1`, so exactly one of the last two matches
/// whenever the first does not.
fn terminal_spelling(sig: &TripletSignature) -> Word {
    let mm = sig.modulus;
    let (cap_i, cap_j, p) = (sig.a_count, sig.b_count, sig.odd);
    let form1_odd = (cap_i * cap_j) % 2 == 1;
    if p == form1_odd {
        if cap_i == 0 && cap_j == 0 {
            return Word::power(A, mm);
        }
        return Word::power(A, cap_i).concat(&Word::power(B, cap_j));
    }
    let i1 = (cap_i + mm - 1) % mm;
    if cap_j % 2 == 1 {
        // a^(I-1) b^J a
        Word::power(A, i1)
            .concat(&Word::power(B, cap_j))
            .concat(&Word::single(A))
    } else {
        // a^(I-1) b^(J-1) ab
        let j1 = (cap_j + mm - 1) % mm;
        Word::power(A, i1)
            .concat(&Word::power(B, j1))
            .concat(&Word::from_letters(vec![A, B]))
    }
}

/// Phase 3: fix the head exponents to the target spelling by stripping
/// full `m+n` runs.
fn phase_fix_exponents(chain: &mut Chain<'_>, target: &Word) -> Result<(), ModelError> {
    let mm = chain.modulus();
    chain.shrink_all_runs()?;
    if &chain.word == target {
        return Ok(());
    }
    let (i, _, _) = head_split(&chain.word);
    if i == mm && chain.word.len() > mm {
        chain.strip_run_left(0, A)?;
    }
    let (i, j, tail_len) = head_split(&chain.word);
    if j == mm {
        if tail_len > 0 {
            chain.strip_run_left(i, B)?;
        } else if i >= 1 {
            chain.strip_run_right(i - 1, B)?;
        }
    }
    // b^(m+n) alone is the identity class, spelled a^(m+n).
    if blocks(&chain.word) == vec![(B, mm)] && target == &Word::power(A, mm) {
        chain.insert_run_front(A)?;
        chain.strip_run_right(mm - 1, B)?;
    }
    Ok(())
}

/// Lemma-form representative of a word's class under `x^m y x^n ~ y` with
/// `gcd(m, n) = 2`, together with the validated step chain that reaches
/// it. When `m + n` is additionally divisible by 4 the output is the
/// canonical terminal spelling of the class.
pub fn normal_form_proof(
    w: &Word,
    id: &Identity,
    _limits: &EnumerationLimits,
) -> Result<(Word, Proof), ModelError> {
    let (m, n) = shaped_for_normal_form(id).ok_or(ModelError::UnsupportedIdentityShape)?;
    if w.is_empty() {
        return Err(ModelError::UnsupportedIdentityShape);
    }
    if w.alphabet_size() > 2 {
        return Err(ModelError::UnsupportedIdentityShape);
    }
    let mm = m + n;
    let canonical = mm % 4 == 0;
    let target_sig = if canonical {
        Some(signature(w, m, n)?)
    } else {
        None
    };
    let mut chain = Chain::new(id, m, n, w.clone());
    phase_shrink_tail(&mut chain)?;
    match &target_sig {
        Some(sig) => {
            let target = terminal_spelling(sig);
            phase_fix_exponents(&mut chain, &target)?;
            if chain.word != target {
                return Err(ModelError::Certification(format!(
                    "normalization of {} reached {} instead of {}",
                    w.display(Style::Letters),
                    chain.word.display(Style::Letters),
                    target.display(Style::Letters)
                )));
            }
        }
        None => {
            // Without the parity invariant there is no signature-derived
            // target; still reduce the exponents deterministically.
            chain.shrink_all_runs()?;
            let (i, _, _) = head_split(&chain.word);
            if i == mm && chain.word.len() > mm {
                chain.strip_run_left(0, A)?;
            }
            let (i, j, tail_len) = head_split(&chain.word);
            if j == mm {
                if tail_len > 0 {
                    chain.strip_run_left(i, B)?;
                } else if i >= 1 {
                    chain.strip_run_right(i - 1, B)?;
                }
            }
        }
    }
    let proof = Proof::new(id.clone(), w.clone(), chain.steps);
    proof
        .validate()
        .map_err(|e| ModelError::Certification(format!("normalization chain replay failed: {e}")))?;
    let end = proof
        .end()
        .map_err(|e| ModelError::Certification(e.to_string()))?;
    if end != chain.word {
        return Err(ModelError::Certification(
            "replayed chain disagrees with builder state".into(),
        ));
    }
    Ok((chain.word, proof))
}

/// See [`normal_form_proof`]; discards the certificate.
pub fn normal_form(w: &Word, id: &Identity, limits: &EnumerationLimits) -> Result<Word, ModelError> {
    normal_form_proof(w, id, limits).map(|(nf, _)| nf)
}

// ---------------------------------------------------------------------------
// Representatives
// ---------------------------------------------------------------------------

/// Lexicographically least word with `alpha` a's, `beta` b's, and forward
/// pairs of the requested parity. Greedy: place an `a` whenever the rest
/// can still hit the parity.
fn minimal_with(alpha: usize, beta: usize, odd: bool) -> Word {
    let want = if odd { 1 } else { 0 };
    let mut letters = Vec::with_capacity(alpha + beta);
    let (mut ra, mut rb) = (alpha, beta);
    let mut f_placed = 0usize;
    let mut a_placed = 0usize;
    for _ in 0..alpha + beta {
        let mut placed_a = false;
        if ra > 0 {
            let base = f_placed + (a_placed + 1) * rb;
            let feasible = base % 2 == want || (ra - 1) * rb >= 1;
            if feasible {
                letters.push(A);
                ra -= 1;
                a_placed += 1;
                placed_a = true;
            }
        }
        if !placed_a {
            letters.push(B);
            f_placed += a_placed;
            rb -= 1;
        }
    }
    debug_assert_eq!(f_placed % 2, want);
    Word::from_letters(letters)
}

/// Canonical (shortest, then lexicographically least) word with the given
/// signature.
fn minimal_representative(sig: &TripletSignature) -> Word {
    let mm = sig.modulus;
    if !sig.odd {
        if sig.a_count == 0 && sig.b_count == 0 {
            return Word::power(A, mm);
        }
        return minimal_with(sig.a_count, sig.b_count, false);
    }
    let alpha = if sig.a_count == 0 { mm } else { sig.a_count };
    let beta = if sig.b_count == 0 { mm } else { sig.b_count };
    minimal_with(alpha, beta, true)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Builds the free model on `generators` letters. Identities of the shape
/// `x^m y x^n ~ y` with `gcd(m, n) = 2` and `4 | m + n` use the certified
/// normal-form route and always converge; everything else runs the
/// bounded union-find closure and may report non-convergence.
pub fn enumerate(
    id: &Identity,
    generators: usize,
    limits: &EnumerationLimits,
) -> Result<FreeModel, ModelError> {
    if !(2..=3).contains(&generators) {
        return Err(ModelError::InvalidGeneratorCount(generators));
    }
    if limits.max_rep_len < 1 {
        return Err(ModelError::LimitTooSmall(
            "max_rep_len must admit the generators".into(),
        ));
    }
    if generators == 2 {
        if let Some((m, n)) = shaped_for_normal_form(id) {
            if (m + n) % 4 == 0 {
                return enumerate_shaped(id, m, n, limits);
            }
        }
    }
    enumerate_generic(id, generators, limits)
}

fn enumerate_shaped(
    id: &Identity,
    m: usize,
    n: usize,
    limits: &EnumerationLimits,
) -> Result<FreeModel, ModelError> {
    let mm = m + n;
    // Certificate 1: the forward-pair parity is a step invariant.
    match certify_mod(id, 2) {
        CertifyOutcome::Certified(_) => {}
        CertifyOutcome::NotInvariant(w) => {
            return Err(ModelError::Certification(format!(
                "parity invariant failed with witness delta {}",
                w.delta
            )))
        }
    }
    // Certificate 2: letter counts move on the (m+n) lattice, so counts
    // mod m+n separate classes.
    let (fa, fb) = count_delta_forms(id);
    if fa.delta_gcd() != mm as u64 || fb.delta_gcd() != mm as u64 {
        return Err(ModelError::Certification(
            "letter-count lattice does not match the identity shape".into(),
        ));
    }
    let mut entries = Vec::with_capacity(2 * mm * mm);
    for a_count in 0..mm {
        for b_count in 0..mm {
            for odd in [false, true] {
                let sig = TripletSignature {
                    a_count,
                    b_count,
                    odd,
                    modulus: mm,
                };
                entries.push((sig, minimal_representative(&sig)));
            }
        }
    }
    entries.sort_by(|(_, u), (_, v)| u.canonical_cmp(v));
    let mut index = HashMap::new();
    let mut classes = Vec::with_capacity(entries.len());
    for (pos, (sig, rep)) in entries.iter().enumerate() {
        index.insert(sig.key(), pos);
        classes.push(rep.clone());
    }
    // Certificate 3: every representative provably reaches its class's
    // terminal spelling, and certificate 4: the class set is closed under
    // multiplication by generators on both sides, again by validated
    // chains.
    for (sig, rep) in &entries {
        let (nf, _) = normal_form_proof(rep, id, limits)?;
        if nf != terminal_spelling(sig) {
            return Err(ModelError::Certification(format!(
                "representative {} does not reach its terminal spelling",
                rep.display(Style::Letters)
            )));
        }
        for g in [A, B] {
            for product in [
                rep.concat(&Word::single(g)),
                Word::single(g).concat(rep),
            ] {
                let psig = signature(&product, m, n)?;
                let (nf, _) = normal_form_proof(&product, id, limits)?;
                if nf != terminal_spelling(&psig) {
                    return Err(ModelError::Certification(format!(
                        "closure product {} missed its predicted class",
                        product.display(Style::Letters)
                    )));
                }
                if !index.contains_key(&psig.key()) {
                    return Err(ModelError::Certification(
                        "closure product left the signature set".into(),
                    ));
                }
            }
        }
    }
    let mut table = vec![vec![0usize; entries.len()]; entries.len()];
    for (ipos, (isig, _)) in entries.iter().enumerate() {
        for (jpos, (jsig, _)) in entries.iter().enumerate() {
            table[ipos][jpos] = index[&isig.compose(jsig).key()];
        }
    }
    Ok(FreeModel {
        identity: id.clone(),
        generator_count: 2,
        classes,
        table: Some(table),
        status: ModelStatus::Converged,
        resolver: Resolver::Shaped { m, n, index },
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> UnionFind {
        UnionFind {
            parent: (0..len).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            self.parent[rx.max(ry)] = rx.min(ry);
        }
    }
}

fn enumerate_generic(
    id: &Identity,
    generators: usize,
    limits: &EnumerationLimits,
) -> Result<FreeModel, ModelError> {
    let words = enumerate_words(generators, limits.max_rep_len);
    let index: HashMap<Word, usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let bounds = StepBounds::new(limits.max_sub_len, limits.max_rep_len).with_alphabet(generators);
    let mut uf = UnionFind::new(words.len());
    for (i, w) in words.iter().enumerate() {
        for (succ, _) in crate::rewrite::successors(w, id, &bounds) {
            if let Some(&j) = index.get(&succ) {
                uf.union(i, j);
            }
        }
    }
    // Canonical representative per root: words are generated in length
    // then lexicographic order, so the first member seen is minimal.
    let mut rep_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..words.len() {
        let root = uf.find(i);
        rep_of_root.entry(root).or_insert(i);
    }
    let mut reps: Vec<usize> = rep_of_root.values().copied().collect();
    reps.sort_by(|&a, &b| words[a].canonical_cmp(&words[b]));
    let class_index_of_root: HashMap<usize, usize> = reps
        .iter()
        .enumerate()
        .map(|(pos, &widx)| (uf.find(widx), pos))
        .collect();
    let mut map = HashMap::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        map.insert(w.clone(), class_index_of_root[&uf.find(i)]);
    }
    let classes: Vec<Word> = reps.iter().map(|&i| words[i].clone()).collect();

    // Convergence: closed under one-letter extension on both sides, and
    // no class first appeared within the stability window.
    let mut closed = true;
    for rep in &classes {
        for g in 0..generators {
            let gw = Word::single(Generator::new(g).unwrap());
            for product in [rep.concat(&gw), gw.concat(rep)] {
                if !map.contains_key(&product) {
                    closed = false;
                }
            }
        }
    }
    let deepest_rep = classes.iter().map(Word::len).max().unwrap_or(0);
    let stable = limits.max_rep_len >= deepest_rep + limits.stability_window;
    let status = if closed && stable {
        ModelStatus::Converged
    } else {
        ModelStatus::NotConverged {
            explored_len: limits.max_rep_len,
        }
    };
    let table = if status == ModelStatus::Converged {
        let mut t = vec![vec![0usize; classes.len()]; classes.len()];
        for (i, _) in classes.iter().enumerate() {
            for (j, rj) in classes.iter().enumerate() {
                let mut cur = i;
                for &g in rj.letters() {
                    let next = classes[cur].concat(&Word::single(g));
                    cur = map[&next];
                }
                t[i][j] = cur;
            }
        }
        Some(t)
    } else {
        None
    };
    Ok(FreeModel {
        identity: id.clone(),
        generator_count: generators,
        classes,
        table,
        status,
        resolver: Resolver::Generic { map },
    })
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

/// Exhaustive structural facts about a converged model's table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupReport {
    pub order: usize,
    pub identity_element: Option<Word>,
    pub is_group: bool,
    pub is_abelian: bool,
    pub center: Vec<Word>,
    /// element order -> number of elements of that order (groups only).
    pub order_spectrum: BTreeMap<usize, usize>,
    pub squares: Vec<Word>,
}

impl fmt::Display for GroupReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order: {}", self.order)?;
        match &self.identity_element {
            Some(e) => writeln!(f, "identity: {}", e.display(Style::Letters))?,
            None => writeln!(f, "identity: none")?,
        }
        writeln!(f, "group: {}", if self.is_group { "yes" } else { "no" })?;
        writeln!(
            f,
            "abelian: {}",
            if self.is_abelian { "yes" } else { "no (nonabelian)" }
        )?;
        write!(f, "center: {} [", self.center.len())?;
        for (i, w) in self.center.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", w.display(Style::Letters))?;
        }
        writeln!(f, "]")?;
        write!(f, "order spectrum:")?;
        for (ord, count) in &self.order_spectrum {
            write!(f, " {ord}:{count}")?;
        }
        writeln!(f)?;
        write!(f, "squares: {} [", self.squares.len())?;
        for (i, w) in self.squares.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", w.display(Style::Letters))?;
        }
        writeln!(f, "]")
    }
}

/// Exhaustive checks over the finite table: identity, inverses,
/// commutativity, center, element orders, squares.
pub fn analyze(model: &FreeModel) -> Result<GroupReport, ModelError> {
    if !model.is_converged() {
        return Err(ModelError::NotConverged);
    }
    let n = model.order();
    let mul = |i: usize, j: usize| model.multiply(i, j).unwrap();
    let mut identity_element = None;
    for e in 0..n {
        if (0..n).all(|j| mul(e, j) == j && mul(j, e) == j) {
            identity_element = Some(e);
            break;
        }
    }
    let is_group = match identity_element {
        Some(e) => (0..n).all(|i| (0..n).any(|j| mul(i, j) == e && mul(j, i) == e)),
        None => false,
    };
    let is_abelian = (0..n).all(|i| (0..n).all(|j| mul(i, j) == mul(j, i)));
    let center: Vec<usize> = (0..n)
        .filter(|&i| (0..n).all(|j| mul(i, j) == mul(j, i)))
        .collect();
    let mut order_spectrum = BTreeMap::new();
    if is_group {
        let e = identity_element.unwrap();
        for i in 0..n {
            let mut cur = i;
            let mut ord = 1;
            while cur != e {
                cur = mul(cur, i);
                ord += 1;
            }
            *order_spectrum.entry(ord).or_insert(0) += 1;
        }
    }
    let mut square_indices: Vec<usize> = (0..n).map(|i| mul(i, i)).collect();
    square_indices.sort_unstable();
    square_indices.dedup();
    Ok(GroupReport {
        order: n,
        identity_element: identity_element.map(|e| model.representative(e).clone()),
        is_group,
        is_abelian,
        center: center
            .into_iter()
            .map(|i| model.representative(i).clone())
            .collect(),
        order_spectrum,
        squares: square_indices
            .into_iter()
            .map(|i| model.representative(i).clone())
            .collect(),
    })
}

/// Deterministic CSV of the multiplication table: first row and column
/// hold the representatives in canonical order.
pub fn export_cayley(model: &FreeModel) -> Result<String, ModelError> {
    if !model.is_converged() {
        return Err(ModelError::NotConverged);
    }
    let mut out = String::new();
    out.push('*');
    for rep in model.classes() {
        out.push(',');
        out.push_str(&rep.display(Style::Letters).to_string());
    }
    out.push('\n');
    for i in 0..model.order() {
        out.push_str(&model.representative(i).display(Style::Letters).to_string());
        for j in 0..model.order() {
            out.push(',');
            let k = model.multiply(i, j).unwrap();
            out.push_str(&model.representative(k).display(Style::Letters).to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::parse_identity;
    use crate::word::parse_word;

    fn id_2_2() -> Identity {
        parse_identity("x^2 y x^2 ~ y").unwrap()
    }

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn shape_detection() {
        assert_eq!(detect_shape(&id_2_2()), Some((2, 2)));
        assert_eq!(
            detect_shape(&parse_identity("y ~ x^6 y x^10").unwrap()),
            Some((6, 10))
        );
        assert_eq!(detect_shape(&parse_identity("x y ~ y x").unwrap()), None);
        assert_eq!(
            shaped_for_normal_form(&parse_identity("x^4 y x^4 ~ y").unwrap()),
            None,
            "gcd 4 is outside the normal-form route"
        );
    }

    #[test]
    fn signature_basics() {
        let ab = w("ab");
        let ba = w("ba");
        let s1 = signature(&ab, 2, 2).unwrap();
        let s2 = signature(&ba, 2, 2).unwrap();
        assert_eq!((s1.a_count(), s1.b_count(), s1.is_odd()), (1, 1, true));
        assert_eq!((s2.a_count(), s2.b_count(), s2.is_odd()), (1, 1, false));
        let s3 = signature(&w("a^3ba"), 2, 2).unwrap();
        assert_eq!((s3.a_count(), s3.b_count(), s3.is_odd()), (0, 1, true));
        assert!(signature(&ab, 1, 1).is_err());
        assert!(signature(&ab, 2, 4).is_err());
    }

    #[test]
    fn signature_composition_matches_concatenation() {
        let words = enumerate_words(2, 5);
        for u in words.iter().step_by(3) {
            for v in words.iter().step_by(5) {
                let su = signature(u, 2, 2).unwrap();
                let sv = signature(v, 2, 2).unwrap();
                let sc = signature(&u.concat(v), 2, 2).unwrap();
                assert_eq!(su.compose(&sv), sc, "u={u} v={v}");
            }
        }
    }

    #[test]
    fn normal_form_examples() {
        let id = id_2_2();
        let limits = EnumerationLimits::default();
        // b^5 contains b^(m+n+1) and shrinks to b in one step.
        let (nf, proof) = normal_form_proof(&w("b^5"), &id, &limits).unwrap();
        assert_eq!(nf, w("b"));
        assert_eq!(proof.steps.len(), 1);
        // The table spellings are fixed points.
        for s in ["a^4", "abab", "a^3b^3ab", "bab", "aba", "b^3a"] {
            assert_eq!(normal_form(&w(s), &id, &limits).unwrap(), w(s), "input {s}");
        }
        // ab * ab lands on the couplet-22 odd spelling.
        assert_eq!(normal_form(&w("abab"), &id, &limits).unwrap(), w("abab"));
        // (ab)^4 has even parity and sorts completely to the identity.
        assert_eq!(normal_form(&w("(ab)^4"), &id, &limits).unwrap(), w("a^4"));
        // b^4 is the identity class, spelled a^4.
        assert_eq!(normal_form(&w("b^4"), &id, &limits).unwrap(), w("a^4"));
        // The canonical-minimal identity-parity-odd word reaches the
        // lemma spelling a^3 b^3 a b.
        assert_eq!(
            normal_form(&w("aaababbb"), &id, &limits).unwrap(),
            w("a^3b^3ab")
        );
    }

    #[test]
    fn normal_form_agrees_with_signature_on_short_words() {
        let id = id_2_2();
        let limits = EnumerationLimits::default();
        for word in enumerate_words(2, 6) {
            let nf = normal_form(&word, &id, &limits).unwrap();
            let sig = signature(&word, 2, 2).unwrap();
            assert_eq!(nf, terminal_spelling(&sig), "word {word}");
        }
    }

    #[test]
    fn order_32_model() {
        let model = enumerate(&id_2_2(), 2, &EnumerationLimits::default()).unwrap();
        assert_eq!(model.order(), 32);
        assert!(model.is_converged());
        let report = analyze(&model).unwrap();
        assert!(report.is_group);
        assert!(!report.is_abelian);
        assert_eq!(report.identity_element, Some(w("a^4")));
        assert_eq!(report.center.len(), 8);
        assert_eq!(report.order_spectrum.get(&4), Some(&24));
        assert_eq!(
            report.squares,
            vec![w("aa"), w("bb"), w("a^4"), w("abab")],
            "squares in canonical order"
        );
    }

    #[test]
    fn paper_table_entries_land_in_signature_classes() {
        let model = enumerate(&id_2_2(), 2, &EnumerationLimits::default()).unwrap();
        let rows = [
            ("a^4", "a^3b^3ab"),
            ("b", "a^3ba"),
            ("b^2", "a^3bab"),
            ("b^3", "a^3b^3a"),
            ("a", "b^3ab"),
            ("ba", "ab"),
            ("ab^2", "bab"),
            ("b^3a", "ab^3"),
            ("a^2", "ab^3ab"),
            ("a^2b", "aba"),
            ("a^2b^2", "abab"),
            ("a^2b^3", "ab^3a"),
            ("a^3", "a^2b^3ab"),
            ("a^2ba", "a^3b"),
            ("a^3b^2", "a^2bab"),
            ("a^2b^3a", "a^3b^3"),
        ];
        let mut seen = std::collections::HashSet::new();
        for (even_word, odd_word) in rows {
            let even_class = model.class_of(&w(even_word)).unwrap();
            let odd_class = model.class_of(&w(odd_word)).unwrap();
            assert_ne!(even_class, odd_class);
            assert!(!signature(&w(even_word), 2, 2).unwrap().is_odd());
            assert!(signature(&w(odd_word), 2, 2).unwrap().is_odd());
            seen.insert(even_class);
            seen.insert(odd_class);
        }
        assert_eq!(seen.len(), 32, "the 16 couplets cover all 32 classes");
    }

    #[test]
    fn trivial_and_infinite_models() {
        let limits = EnumerationLimits::new(6, 2, 2);
        let trivial = enumerate(&parse_identity("x ~ y").unwrap(), 2, &limits).unwrap();
        assert_eq!(trivial.order(), 1);
        assert!(trivial.is_converged());
        let report = analyze(&trivial).unwrap();
        assert!(report.is_group && report.is_abelian);

        let commutative = enumerate(&parse_identity("x y ~ y x").unwrap(), 2, &limits).unwrap();
        assert!(!commutative.is_converged());
        assert!(analyze(&commutative).is_err());
    }

    #[test]
    fn cayley_export_shape() {
        let model = enumerate(&id_2_2(), 2, &EnumerationLimits::default()).unwrap();
        let csv = export_cayley(&model).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 33);
        let header: Vec<&str> = lines[0].split(',').skip(1).collect();
        let e = model.class_of(&w("a^4")).unwrap();
        let identity_row: Vec<&str> = lines[e + 1].split(',').skip(1).collect();
        assert_eq!(header, identity_row, "identity row repeats the header");
    }

    #[test]
    fn order_512_model() {
        let id = parse_identity("x^6 y x^10 ~ y").unwrap();
        let model = enumerate(&id, 2, &EnumerationLimits::default()).unwrap();
        assert_eq!(model.order(), 512);
        let report = analyze(&model).unwrap();
        assert!(report.is_group);
        assert!(!report.is_abelian);
        assert_eq!(report.identity_element, Some(w("a^16")));
    }

    #[test]
    fn minimal_representatives_are_minimal() {
        // Exhaustive check against all words up to length 6: no strictly
        // smaller word shares a representative's signature.
        let model = enumerate(&id_2_2(), 2, &EnumerationLimits::default()).unwrap();
        let all = enumerate_words(2, 6);
        for rep in model.classes() {
            let sig = signature(rep, 2, 2).unwrap();
            for word in &all {
                if signature(word, 2, 2).unwrap() == sig {
                    assert_ne!(
                        word.canonical_cmp(rep),
                        std::cmp::Ordering::Less,
                        "word {word} undercuts representative {rep}"
                    );
                }
            }
        }
    }
}
