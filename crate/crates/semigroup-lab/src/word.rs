//! Words over a small alphabet, the counting statistics `f`/`g`/`h`,
//! substitution, and the canonical ordering used for class representatives.
//!
//! A [`Word`] is a flat sequence of generators. Exponent notation such as
//! `x^3y^2` exists only in the parser and printer; the data model never
//! stores exponents.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 3;

/// Default cap on word length for search-facing operations.
pub const DEFAULT_MAX_WORD_LEN: usize = 64;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum WordError {
    #[error("replacement words must be nonempty")]
    EmptyReplacement,
    #[error("operation is defined only for two-letter words")]
    UnsupportedAlphabet,
}

/// A single generator, identified by its index in the alphabet.
///
/// Index 0 prints as `x` (or `a` in free-model style), index 1 as `y`/`b`,
/// index 2 as `z`/`c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u8);

impl Generator {
    pub const X: Generator = Generator(0);
    pub const Y: Generator = Generator(1);
    pub const Z: Generator = Generator(2);

    pub fn new(index: usize) -> Option<Generator> {
        if index < MAX_ALPHABET {
            Some(Generator(index as u8))
        } else {
            None
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a word is rendered: identity variables or free-model letters.
///
/// The machinery is identical for both roles; only the display letter
/// differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    /// `x`, `y`, `z` — identity variables.
    #[default]
    Variables,
    /// `a`, `b`, `c` — free-model generators.
    Letters,
}

impl Style {
    fn letter(self, g: Generator) -> char {
        match self {
            Style::Variables => ['x', 'y', 'z'][g.index()],
            Style::Letters => ['a', 'b', 'c'][g.index()],
        }
    }
}

/// A finite sequence of generators.
///
/// The empty word is permitted as a context (the `R` and `S` of a rewrite
/// decomposition may be absent), but identity sides and model elements must
/// be nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Generator>,
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    pub fn single(g: Generator) -> Word {
        Word { letters: vec![g] }
    }

    pub fn from_letters(letters: Vec<Generator>) -> Word {
        Word { letters }
    }

    /// `g` repeated `count` times.
    pub fn power(g: Generator, count: usize) -> Word {
        Word {
            letters: vec![g; count],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    /// Largest generator index occurring, plus one. Zero for the empty word.
    pub fn alphabet_size(&self) -> usize {
        self.letters
            .iter()
            .map(|g| g.index() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Juxtaposition product. Length is additive.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// The factor `self[start..end]`.
    pub fn factor(&self, start: usize, end: usize) -> Word {
        Word {
            letters: self.letters[start..end].to_vec(),
        }
    }

    /// Replaces the factor at `start..start + old_len` by `replacement`.
    pub fn splice(&self, start: usize, old_len: usize, replacement: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() - old_len + replacement.len());
        letters.extend_from_slice(&self.letters[..start]);
        letters.extend_from_slice(&replacement.letters);
        letters.extend_from_slice(&self.letters[start + old_len..]);
        Word { letters }
    }

    /// Replaces every `x` of the template by `p` and every `y` by `q`,
    /// concatenated in order: the word `U(P,Q)`.
    pub fn substitute(&self, p: &Word, q: &Word) -> Result<Word, WordError> {
        if p.is_empty() || q.is_empty() {
            return Err(WordError::EmptyReplacement);
        }
        let mut letters = Vec::new();
        for g in &self.letters {
            match g.index() {
                0 => letters.extend_from_slice(&p.letters),
                1 => letters.extend_from_slice(&q.letters),
                _ => return Err(WordError::UnsupportedAlphabet),
            }
        }
        Ok(Word { letters })
    }

    /// The number of forward pairs: index pairs `i < j` with `self[i] = x`
    /// and `self[j] = y`. Defined only over the two-letter alphabet.
    pub fn forward_pairs(&self) -> Result<usize, WordError> {
        if self.alphabet_size() > 2 {
            return Err(WordError::UnsupportedAlphabet);
        }
        let mut xs_seen = 0usize;
        let mut pairs = 0usize;
        for g in &self.letters {
            match g.index() {
                0 => xs_seen += 1,
                _ => pairs += xs_seen,
            }
        }
        Ok(pairs)
    }

    /// Occurrences of `g`.
    pub fn count(&self, g: Generator) -> usize {
        self.letters.iter().filter(|&&l| l == g).count()
    }

    /// Per-letter occurrence counts plus forward pairs when two-letter.
    pub fn letter_counts(&self) -> CountVector {
        let mut counts = [0usize; MAX_ALPHABET];
        for g in &self.letters {
            counts[g.index()] += 1;
        }
        CountVector {
            counts,
            forward_pairs: self.forward_pairs().ok(),
        }
    }

    /// Generalized forward-pair counts: entry `(i, j)` is the number of
    /// index pairs `k < l` with `self[k]` the `i`-th generator and `self[l]`
    /// the `j`-th. Restricted to two letters, entry `(0, 1)` is `f`.
    pub fn pair_matrix(&self) -> [[usize; MAX_ALPHABET]; MAX_ALPHABET] {
        let mut seen = [0usize; MAX_ALPHABET];
        let mut matrix = [[0usize; MAX_ALPHABET]; MAX_ALPHABET];
        for g in &self.letters {
            let j = g.index();
            for (i, row) in matrix.iter_mut().enumerate() {
                if i != j {
                    row[j] += seen[i];
                }
            }
            seen[j] += 1;
        }
        matrix
    }

    /// Total order used for canonical representatives: shorter word first,
    /// equal lengths compared lexicographically by generator index.
    pub fn canonical_cmp(&self, other: &Word) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }

    /// The word with its letters in reverse order.
    pub fn reversed(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters }
    }

    pub fn display(&self, style: Style) -> WordDisplay<'_> {
        WordDisplay { word: self, style }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(Style::Variables))
    }
}

/// Canonical exponent-collapsed rendering of a word.
pub struct WordDisplay<'a> {
    word: &'a Word,
    style: Style,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            // Never produced by the grammar; shown for contexts only.
            return write!(f, "\u{3b5}");
        }
        let letters = &self.word.letters;
        let mut i = 0;
        while i < letters.len() {
            let g = letters[i];
            let mut run = 1;
            while i + run < letters.len() && letters[i + run] == g {
                run += 1;
            }
            write!(f, "{}", self.style.letter(g))?;
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Letter counts of a word: `g` (x-count), `h` (y-count), and `f`
/// (forward pairs, absent for three-letter words).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountVector {
    counts: [usize; MAX_ALPHABET],
    forward_pairs: Option<usize>,
}

impl CountVector {
    /// The paper's `g`: number of `x`s (or `a`s).
    pub fn x_count(&self) -> usize {
        self.counts[0]
    }

    /// The paper's `h`: number of `y`s (or `b`s).
    pub fn y_count(&self) -> usize {
        self.counts[1]
    }

    pub fn count(&self, g: Generator) -> usize {
        self.counts[g.index()]
    }

    /// The paper's `f`, when the word stays within two letters.
    pub fn forward_pairs(&self) -> Option<usize> {
        self.forward_pairs
    }
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

/// Parses the word grammar `word := term+ ; term := atom ('^' uint)?`,
/// where an atom is a letter in `{x,y,z,a,b,c}` or a parenthesized word.
/// Exponents must be positive. Whitespace between terms is ignored.
pub fn parse_word(input: &str) -> Result<Word, ParseError> {
    let mut parser = Parser {
        bytes: input.as_bytes(),
        pos: 0,
    };
    let word = parser.word()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(err(parser.pos, "unexpected trailing input"));
    }
    Ok(word)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn word(&mut self) -> Result<Word, ParseError> {
        let mut result = Word::empty();
        let mut any = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if matches!(c, b'x' | b'y' | b'z' | b'a' | b'b' | b'c' | b'(') => {
                    let term = self.term()?;
                    result = result.concat(&term);
                    any = true;
                }
                _ => break,
            }
        }
        if !any {
            return Err(err(self.pos, "expected a letter"));
        }
        Ok(result)
    }

    fn term(&mut self) -> Result<Word, ParseError> {
        let atom = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.word()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(err(self.pos, "expected ')'"));
                }
                self.pos += 1;
                inner
            }
            Some(c) => {
                let index = match c {
                    b'x' | b'a' => 0,
                    b'y' | b'b' => 1,
                    b'z' | b'c' => 2,
                    _ => return Err(err(self.pos, "expected a letter")),
                };
                self.pos += 1;
                Word::single(Generator::new(index).unwrap())
            }
            None => return Err(err(self.pos, "expected a letter")),
        };
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self
                .peek()
                .map(|c| c.is_ascii_digit())
                .unwrap_or(false)
            {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(err(self.pos, "expected an exponent"));
            }
            let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            let exponent: usize = digits
                .parse()
                .map_err(|_| err(start, "exponent out of range"))?;
            if exponent == 0 {
                return Err(err(start, "exponents must be positive"));
            }
            let mut repeated = Word::empty();
            for _ in 0..exponent {
                repeated = repeated.concat(&atom);
            }
            Ok(repeated)
        } else {
            Ok(atom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn concat_definition() {
        assert_eq!(w("xy").concat(&w("x")), w("xyx"));
        assert_eq!(Word::empty().concat(&w("yx")), w("yx"));
    }

    #[test]
    fn concat_forward_pair_law() {
        // f(uv) = f(u) + f(v) + g(u)h(v) on (xy, yx): 1 + 0 + 1*1 = 2.
        let u = w("xy");
        let v = w("yx");
        let uv = u.concat(&v);
        assert_eq!(uv.forward_pairs().unwrap(), 2);
        assert_eq!(
            uv.forward_pairs().unwrap(),
            u.forward_pairs().unwrap()
                + v.forward_pairs().unwrap()
                + u.count(Generator::X) * v.count(Generator::Y)
        );
    }

    #[test]
    fn substitute_definition() {
        assert_eq!(w("xyx").substitute(&w("ab"), &w("b")).unwrap(), w("abbab"));
        // Replacing y by x in yx turns the axiom side into x^2.
        assert_eq!(w("yx").substitute(&w("x"), &w("x")).unwrap(), w("xx"));
        assert_eq!(w("xy").substitute(&w("xy"), &w("yx")).unwrap(), w("xyyx"));
    }

    #[test]
    fn substitute_rejects_empty() {
        assert_eq!(
            w("xy").substitute(&Word::empty(), &w("y")),
            Err(WordError::EmptyReplacement)
        );
    }

    #[test]
    fn forward_pairs_examples() {
        assert_eq!(w("x^3y^3xy").forward_pairs().unwrap(), 13);
        assert_eq!(w("(xy)^3").forward_pairs().unwrap(), 6); // n(n+1)/2, n = 3
        assert_eq!(w("(yx)^3").forward_pairs().unwrap(), 3); // n(n-1)/2, n = 3
        assert_eq!(
            w("xyz").forward_pairs(),
            Err(WordError::UnsupportedAlphabet)
        );
    }

    #[test]
    fn letter_count_examples() {
        let counts = w("xyxy^3").letter_counts();
        assert_eq!(counts.x_count(), 2);
        assert_eq!(counts.y_count(), 4);

        let counts = w("x").letter_counts();
        assert_eq!(
            (counts.x_count(), counts.y_count(), counts.forward_pairs()),
            (1, 0, Some(0))
        );

        let counts = w("a^3b^3ab").letter_counts();
        assert_eq!(
            (counts.x_count(), counts.y_count(), counts.forward_pairs()),
            (4, 4, Some(13))
        );
    }

    #[test]
    fn pair_matrix_agrees_with_forward_pairs() {
        let word = w("x^3y^3xy");
        assert_eq!(word.pair_matrix()[0][1], 13);
        let word = w("zxyz");
        let matrix = word.pair_matrix();
        assert_eq!(matrix[2][0], 1);
        assert_eq!(matrix[0][2], 1);
        assert_eq!(matrix[2][2], 0);
    }

    #[test]
    fn canonical_order() {
        assert_eq!(w("ab").canonical_cmp(&w("ba")), Ordering::Less);
        assert_eq!(w("b").canonical_cmp(&w("ab")), Ordering::Less);
        assert_eq!(w("abab").canonical_cmp(&w("abab")), Ordering::Equal);
    }

    #[test]
    fn parse_and_print_round_trip() {
        for text in ["x", "x^2yx^2", "xyxy^3", "a^3b^3ab", "x^2y^2"] {
            let word = w(text);
            let canon = word.display(if text.contains('a') || text.contains('b') {
                Style::Letters
            } else {
                Style::Variables
            });
            assert_eq!(format!("{canon}"), text);
        }
    }

    #[test]
    fn parse_groups_and_whitespace() {
        assert_eq!(w("(xy)^2"), w("xyxy"));
        assert_eq!(w("y x"), w("yx"));
        assert_eq!(w("(x y)^2 x"), w("xyxyx"));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_word("x^0 y").is_err());
        assert!(parse_word("").is_err());
        assert!(parse_word("x$").is_err());
        assert!(parse_word("(xy").is_err());
        let e = parse_word("x^0").unwrap_err();
        assert_eq!(e.position, 2);
    }
}
