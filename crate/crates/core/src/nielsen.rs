//! Free-group words, elementary Nielsen moves on tuples, basis detection by
//! Nielsen reduction, bounded equivalence search, and lifting of move
//! sequences through a homomorphism onto free or free-abelian targets.

use std::collections::{HashMap, VecDeque};

use num::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NielsenError {
    #[error("move index {i} out of range for arity {arity}")]
    IndexOutOfRange { i: usize, arity: usize },
    #[error("move indices must differ, got i = j = {i}")]
    IndicesEqual { i: usize },
    #[error("cannot parse word token {token:?}")]
    ParseError { token: String },
    #[error("generator {letter} exceeds rank {rank}")]
    GeneratorOutOfRange { letter: usize, rank: usize },
    #[error("text form supports ranks up to 26, got {rank}")]
    RankTooLarge { rank: usize },
    #[error("tuple arities differ: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("tuples have different targets or ranks")]
    TargetMismatch,
    #[error("lifting requires the standard basis upstairs")]
    NotStandardBasis,
    #[error("image compatibility failed after move {step} at position {index}")]
    LiftVerificationFailed { step: usize, index: usize },
    #[error("lifted tuple failed the basis check")]
    LiftedBasisNotABasis,
}

/// A freely reduced word: signed 1-based generator indices, +k for the
/// generator and -k for its inverse. Prints as "a B a" for a b^-1 a.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(k: usize) -> Self {
        Word(vec![k as i32])
    }

    /// Builds a word from signed letters, freely reducing.
    pub fn from_letters(letters: &[i32]) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(letters.len());
        for &l in letters {
            assert!(l != 0, "letter 0 is not a generator");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    /// Concatenation with free reduction.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Exponent sums over generators 1..=rank.
    pub fn exponent_vector(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &l in &self.0 {
            let k = l.unsigned_abs() as usize - 1;
            v[k] += if l > 0 { 1 } else { -1 };
        }
        v
    }

    /// Parses "a B a" (spaces optional): lowercase is a generator,
    /// uppercase its inverse. The empty string is the identity.
    pub fn parse(s: &str) -> Result<Self, NielsenError> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            for c in token.chars() {
                if c.is_ascii_lowercase() {
                    letters.push((c as u8 - b'a') as i32 + 1);
                } else if c.is_ascii_uppercase() {
                    letters.push(-((c as u8 - b'A') as i32 + 1));
                } else {
                    return Err(NielsenError::ParseError { token: token.to_string() });
                }
            }
        }
        Ok(Word::from_letters(&letters))
    }

    pub fn text(&self) -> String {
        let mut parts = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            let k = l.unsigned_abs() - 1;
            debug_assert!(k < 26, "text form supports ranks up to 26");
            let c = if l > 0 { b'a' + k as u8 } else { b'A' + k as u8 };
            parts.push((c as char).to_string());
        }
        parts.join(" ")
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// How tuple entries are to be compared: as elements of a free group or of
/// its abelianization. Free-abelian words are kept in the canonical form
/// with generators ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Target {
    Free,
    FreeAbelian,
}

/// A tuple of group elements of fixed arity over a rank-n alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupTuple {
    pub target: Target,
    pub rank: usize,
    pub words: Vec<Word>,
}

impl GroupTuple {
    pub fn free(rank: usize, words: Vec<Word>) -> Result<Self, NielsenError> {
        for w in &words {
            if w.max_generator() > rank {
                return Err(NielsenError::GeneratorOutOfRange {
                    letter: w.max_generator(),
                    rank,
                });
            }
        }
        Ok(GroupTuple { target: Target::Free, rank, words })
    }

    pub fn free_abelian(rank: usize, words: Vec<Word>) -> Result<Self, NielsenError> {
        for w in &words {
            if w.max_generator() > rank {
                return Err(NielsenError::GeneratorOutOfRange {
                    letter: w.max_generator(),
                    rank,
                });
            }
        }
        let words = words.into_iter().map(|w| abelian_canonical(&w, rank)).collect();
        Ok(GroupTuple { target: Target::FreeAbelian, rank, words })
    }

    /// The standard free basis (a, b, c, ...).
    pub fn standard_basis(rank: usize) -> Self {
        GroupTuple {
            target: Target::Free,
            rank,
            words: (1..=rank).map(Word::generator).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.words.len()
    }

    pub fn total_length(&self) -> usize {
        self.words.iter().map(Word::len).sum()
    }

    fn normalize(&self, w: Word) -> Word {
        match self.target {
            Target::Free => w,
            Target::FreeAbelian => abelian_canonical(&w, self.rank),
        }
    }
}

fn abelian_canonical(w: &Word, rank: usize) -> Word {
    let v = w.exponent_vector(rank);
    let mut letters = Vec::new();
    for (k, &e) in v.iter().enumerate() {
        let l = if e >= 0 { k as i32 + 1 } else { -(k as i32 + 1) };
        for _ in 0..e.unsigned_abs() {
            letters.push(l);
        }
    }
    Word(letters)
}

/// An elementary Nielsen move on a tuple, with 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Move {
    Invert { i: usize },
    RightMultiply { i: usize, j: usize },
    Swap { i: usize, j: usize },
}

fn check_indices(arity: usize, i: usize, j: Option<usize>) -> Result<(), NielsenError> {
    if i == 0 || i > arity {
        return Err(NielsenError::IndexOutOfRange { i, arity });
    }
    if let Some(j) = j {
        if j == 0 || j > arity {
            return Err(NielsenError::IndexOutOfRange { i: j, arity });
        }
        if i == j {
            return Err(NielsenError::IndicesEqual { i });
        }
    }
    Ok(())
}

/// Applies one move, reducing in the tuple's target.
pub fn apply_move(t: &GroupTuple, m: Move) -> Result<GroupTuple, NielsenError> {
    let mut out = t.clone();
    match m {
        Move::Invert { i } => {
            check_indices(t.arity(), i, None)?;
            out.words[i - 1] = t.normalize(t.words[i - 1].inverse());
        }
        Move::RightMultiply { i, j } => {
            check_indices(t.arity(), i, Some(j))?;
            out.words[i - 1] = t.normalize(t.words[i - 1].concat(&t.words[j - 1]));
        }
        Move::Swap { i, j } => {
            check_indices(t.arity(), i, Some(j))?;
            out.words.swap(i - 1, j - 1);
        }
    }
    Ok(out)
}

/// A move sequence undoing `m`: single move for Invert and Swap, the
/// conjugated triple for RightMultiply.
pub fn inverse_moves(m: Move) -> Vec<Move> {
    match m {
        Move::Invert { .. } | Move::Swap { .. } => vec![m],
        Move::RightMultiply { i, j } => vec![
            Move::Invert { i: j },
            Move::RightMultiply { i, j },
            Move::Invert { i: j },
        ],
    }
}

/// Evaluates the homomorphism sending generator k to `images.words[k-1]`.
pub fn apply_homomorphism(images: &GroupTuple, w: &Word) -> Word {
    let mut acc = Word::identity();
    for &l in w.letters() {
        let factor = &images.words[l.unsigned_abs() as usize - 1];
        let factor = if l > 0 { factor.clone() } else { factor.inverse() };
        acc = acc.concat(&factor);
    }
    images.normalize(acc)
}

/// Applies `moves` simultaneously to the standard basis upstairs and to its
/// images downstairs, checking after every prefix that each new basis word
/// still maps onto the corresponding new image. Returns the final pair; the
/// final basis is additionally confirmed to be a basis.
pub fn lift_moves(
    basis: &GroupTuple,
    images: &GroupTuple,
    moves: &[Move],
) -> Result<(GroupTuple, GroupTuple), NielsenError> {
    if basis.arity() != images.arity() {
        return Err(NielsenError::ArityMismatch {
            left: basis.arity(),
            right: images.arity(),
        });
    }
    if *basis != GroupTuple::standard_basis(basis.rank) {
        return Err(NielsenError::NotStandardBasis);
    }
    let mut up = basis.clone();
    let mut down = images.clone();
    for (step, &m) in moves.iter().enumerate() {
        up = apply_move(&up, m)?;
        down = apply_move(&down, m)?;
        for index in 0..up.arity() {
            if apply_homomorphism(images, &up.words[index]) != down.words[index] {
                return Err(NielsenError::LiftVerificationFailed { step, index });
            }
        }
    }
    if !is_basis(&up) {
        return Err(NielsenError::LiftedBasisNotABasis);
    }
    Ok((up, down))
}

/// Whether the tuple is a basis.
///
/// Free tuples are decided by Nielsen reduction: among the
/// length-decreasing replacements of one entry by its product with another
/// (four variants), repeatedly apply the lexicographically least
/// (variant, i, j). Strict descent alone can stall short of the standard
/// basis on a genuine basis (equal-length plateaus occur, e.g. at
/// (A B C b b, B a, A B c b)), so a stall is resolved by a deterministic
/// breadth-first sweep of the equal-length plateau; any strictly shorter
/// tuple found there restarts the descent. The tuple is a basis iff the
/// standard basis, up to inversion and order, is reached; exhausting the
/// plateau without progress is a definite no.
///
/// Free-abelian tuples are decided by the determinant of the exponent
/// matrix.
pub fn is_basis(t: &GroupTuple) -> bool {
    if t.arity() != t.rank {
        return false;
    }
    match t.target {
        Target::FreeAbelian => {
            let det = abelianized_determinant(t);
            det == BigInt::from(1) || det == BigInt::from(-1)
        }
        Target::Free => free_reduction_reaches_standard(t.words.clone(), t.rank),
    }
}

fn multiply_variant(words: &[Word], kind: usize, i: usize, j: usize) -> Word {
    match kind {
        0 => words[i].concat(&words[j]),
        1 => words[i].concat(&words[j].inverse()),
        2 => words[j].concat(&words[i]),
        _ => words[j].inverse().concat(&words[i]),
    }
}

fn free_reduction_reaches_standard(start: Vec<Word>, rank: usize) -> bool {
    let mut words = start;
    'descend: loop {
        // Greedy strict descent.
        loop {
            if is_standard_up_to_inversion_and_order(&words, rank) {
                return true;
            }
            let mut applied = false;
            'search: for kind in 0..4usize {
                for i in 0..words.len() {
                    for j in 0..words.len() {
                        if i == j {
                            continue;
                        }
                        let candidate = multiply_variant(&words, kind, i, j);
                        if candidate.len() < words[i].len() {
                            words[i] = candidate;
                            applied = true;
                            break 'search;
                        }
                    }
                }
            }
            if !applied {
                break;
            }
        }
        // Local minimum: sweep the equal-length plateau for an exit.
        let len: usize = words.iter().map(Word::len).sum();
        let mut visited = std::collections::HashSet::from([words.clone()]);
        let mut queue = VecDeque::from([words.clone()]);
        while let Some(state) = queue.pop_front() {
            for i in 0..state.len() {
                let mut inv = state.clone();
                inv[i] = inv[i].inverse();
                if visited.insert(inv.clone()) {
                    if is_standard_up_to_inversion_and_order(&inv, rank) {
                        return true;
                    }
                    queue.push_back(inv);
                }
                for kind in 0..4usize {
                    for j in 0..state.len() {
                        if i == j {
                            continue;
                        }
                        let candidate = multiply_variant(&state, kind, i, j);
                        if candidate.len() < state[i].len() {
                            let mut shorter = state.clone();
                            shorter[i] = candidate;
                            words = shorter;
                            continue 'descend;
                        }
                        if candidate.len() == state[i].len() {
                            let mut level = state.clone();
                            level[i] = candidate;
                            if visited.insert(level.clone()) {
                                if is_standard_up_to_inversion_and_order(&level, rank) {
                                    return true;
                                }
                                queue.push_back(level);
                            }
                        }
                    }
                }
            }
        }
        debug_assert_eq!(len, words.iter().map(Word::len).sum::<usize>());
        return false;
    }
}

/// Strict-descent Nielsen reduction of a free tuple: repeatedly applies the
/// lexicographically least length-decreasing replacement until none exists,
/// and reports whether the tuple is a basis (decided with plateau
/// completion, see [`is_basis`]). Free-abelian tuples are returned as-is
/// with the determinant verdict.
pub fn nielsen_reduce(t: &GroupTuple) -> (GroupTuple, bool) {
    let basis = is_basis(t);
    if t.target == Target::FreeAbelian {
        return (t.clone(), basis);
    }
    let mut words = t.words.clone();
    loop {
        let mut applied = false;
        'search: for kind in 0..4usize {
            for i in 0..words.len() {
                for j in 0..words.len() {
                    if i == j {
                        continue;
                    }
                    let candidate = multiply_variant(&words, kind, i, j);
                    if candidate.len() < words[i].len() {
                        words[i] = candidate;
                        applied = true;
                        break 'search;
                    }
                }
            }
        }
        if !applied {
            break;
        }
    }
    (GroupTuple { target: t.target, rank: t.rank, words }, basis)
}

fn is_standard_up_to_inversion_and_order(words: &[Word], rank: usize) -> bool {
    let mut seen = vec![false; rank];
    for w in words {
        if w.len() != 1 {
            return false;
        }
        let k = w.letters()[0].unsigned_abs() as usize;
        if k > rank || seen[k - 1] {
            return false;
        }
        seen[k - 1] = true;
    }
    seen.iter().all(|&s| s)
}

/// Exponent matrix of the tuple, one row per word.
pub fn abelianization_matrix(t: &GroupTuple) -> Vec<Vec<i64>> {
    t.words.iter().map(|w| w.exponent_vector(t.rank)).collect()
}

/// Exact determinant of the exponent matrix (zero when not square).
pub fn abelianized_determinant(t: &GroupTuple) -> BigInt {
    let m = abelianization_matrix(t);
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return BigInt::from(0);
    }
    // Bareiss fraction-free elimination.
    let mut a: Vec<Vec<BigInt>> =
        m.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k] == BigInt::from(0) {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != BigInt::from(0)) else {
                return BigInt::from(0);
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::from(0);
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Outcome of the bounded search: a connecting move list, or failure to
/// find one inside the bound. The search never certifies inequivalence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SearchOutcome {
    #[serde(rename_all = "camelCase")]
    Found { moves: Vec<Move> },
    NotWithinBound,
}

/// Hard ceiling on explored tuples; exceeding it reports NotWithinBound.
pub const SEARCH_STATE_CAP: usize = 2_000_000;

/// Breadth-first search through the move graph, restricted to tuples of
/// total length at most `max_len`, from `t1` toward `t2`.
pub fn equivalence_search(
    t1: &GroupTuple,
    t2: &GroupTuple,
    max_len: usize,
) -> Result<SearchOutcome, NielsenError> {
    if t1.arity() != t2.arity() {
        return Err(NielsenError::ArityMismatch { left: t1.arity(), right: t2.arity() });
    }
    if t1.target != t2.target || t1.rank != t2.rank {
        return Err(NielsenError::TargetMismatch);
    }
    if t1.words == t2.words {
        return Ok(SearchOutcome::Found { moves: Vec::new() });
    }
    if t1.total_length() > max_len || t2.total_length() > max_len {
        return Ok(SearchOutcome::NotWithinBound);
    }

    let n = t1.arity();
    let mut moves = Vec::new();
    for i in 1..=n {
        moves.push(Move::Invert { i });
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                moves.push(Move::RightMultiply { i, j });
            }
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            moves.push(Move::Swap { i, j });
        }
    }

    let mut states: Vec<GroupTuple> = vec![t1.clone()];
    let mut parent: Vec<Option<(usize, Move)>> = vec![None];
    let mut index: HashMap<Vec<Word>, usize> = HashMap::from([(t1.words.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(cur) = queue.pop_front() {
        for &m in &moves {
            let next = apply_move(&states[cur], m)?;
            if next.total_length() > max_len || index.contains_key(&next.words) {
                continue;
            }
            let id = states.len();
            index.insert(next.words.clone(), id);
            let found = next.words == t2.words;
            states.push(next);
            parent.push(Some((cur, m)));
            if found {
                let mut path = Vec::new();
                let mut at = id;
                while let Some((prev, mv)) = parent[at] {
                    path.push(mv);
                    at = prev;
                }
                path.reverse();
                return Ok(SearchOutcome::Found { moves: path });
            }
            if states.len() > SEARCH_STATE_CAP {
                return Ok(SearchOutcome::NotWithinBound);
            }
            queue.push_back(id);
        }
    }
    Ok(SearchOutcome::NotWithinBound)
}
