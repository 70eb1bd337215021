//! Free-group words over named generators and their matrix realizations.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn gen(gen: usize) -> Word {
        Word(vec![Letter { gen, inverse: false }])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inv()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn inv(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// `self^-1 other^-1 self other`.
    pub fn lower_commutator(&self, other: &Word) -> Word {
        self.inv().mul(&other.inv()).mul(self).mul(other)
    }

    /// `self other self^-1 other^-1`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.mul(other).mul(&self.inv()).mul(&other.inv())
    }
}

/// Named generator matrices together with the cusp data needed to interpret corner words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupContext {
    pub names: Vec<String>,
    pub generators: Vec<Mat3>,
    pub cusps: Vec<Cusp>,
}

/// Base lift of a cusp and the word generating its stabilizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cusp {
    pub word: Word,
    pub lift: Vec3,
}

impl GroupContext {
    pub fn new(names: Vec<String>, generators: Vec<Mat3>, cusps: Vec<Cusp>) -> Self {
        GroupContext { names, generators, cusps }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn realize(&self, w: &Word) -> Mat3 {
        let mut m = Mat3::identity();
        for l in w.letters() {
            let g = &self.generators[l.gen];
            let g = if l.inverse { g.inv().expect("generators are invertible") } else { g.clone() };
            m = &m * &g;
        }
        m
    }

    pub fn elem(&self, w: &Word) -> GroupElem {
        GroupElem { mat: self.realize(w), word: w.clone() }
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem { mat: Mat3::identity(), word: Word::identity() }
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.letters()
            .iter()
            .map(|l| {
                let name = &self.names[l.gen];
                if l.inverse { format!("{name}^-1") } else { name.clone() }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a space separated word such as `A B^-1`; `1` or the empty string is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let index: HashMap<&str, usize> =
            self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, inverse) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let gen = *index
                .get(name)
                .ok_or_else(|| Error::Parse(format!("unknown generator `{name}`")))?;
            letters.push(Letter { gen, inverse });
        }
        Ok(Word::from_letters(letters))
    }

    /// Every freely reduced word of length at most `depth`, shortest first.
    pub fn words_up_to(&self, depth: usize) -> Vec<Word> {
        let alphabet: Vec<Letter> = (0..self.rank())
            .flat_map(|gen| [Letter { gen, inverse: false }, Letter { gen, inverse: true }])
            .collect();
        let mut out = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &frontier {
                for &l in &alphabet {
                    if w.letters().last() == Some(&l.inv()) {
                        continue;
                    }
                    let mut longer = w.clone();
                    longer.0.push(l);
                    next.push(longer);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// A group element carried with a word realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElem {
    pub mat: Mat3,
    pub word: Word,
}

impl GroupElem {
    pub fn mul(&self, other: &GroupElem) -> GroupElem {
        GroupElem { mat: &self.mat * &other.mat, word: self.word.mul(&other.word) }
    }

    pub fn inv(&self) -> GroupElem {
        GroupElem { mat: self.mat.inv().expect("group elements are invertible"), word: self.word.inv() }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "g{}{}", l.gen, if l.inverse { "^-1" } else { "" })?;
        }
        Ok(())
    }
}

/// Truncated orbit of the cusp lifts.
#[derive(Clone, Debug)]
pub struct OrbitBall {
    pub depth: usize,
    pub points: Vec<Vec3>,
    pub words: Vec<Word>,
}

impl OrbitBall {
    pub fn empty() -> OrbitBall {
        OrbitBall { depth: 0, points: Vec::new(), words: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &Vec3) -> bool {
        self.points.contains(v)
    }
}

/// Images of each cusp lift under reduced words of length at most `depth`, deduplicated exactly.
pub fn orbit_ball(gens: &[Mat3], cusp_lifts: &[Vec3], depth: usize) -> OrbitBall {
    let inverses: Vec<Mat3> =
        gens.iter().map(|g| g.inv().expect("generators are invertible")).collect();
    let mut seen = std::collections::HashSet::new();
    let mut ball = OrbitBall { depth, points: Vec::new(), words: Vec::new() };
    // Breadth-first over words; each queue entry keeps the image of every cusp lift.
    let mut queue: VecDeque<(Word, Vec<Vec3>)> = VecDeque::new();
    queue.push_back((Word::identity(), cusp_lifts.to_vec()));
    while let Some((word, images)) = queue.pop_front() {
        for img in &images {
            if seen.insert(img.clone()) {
                ball.points.push(img.clone());
                ball.words.push(word.clone());
            }
        }
        if word.len() == depth {
            continue;
        }
        for gen in 0..gens.len() {
            for inverse in [false, true] {
                let l = Letter { gen, inverse };
                if word.letters().first() == Some(&l.inv()) {
                    continue;
                }
                let m = if inverse { &inverses[gen] } else { &gens[gen] };
                let mut longer = vec![l];
                longer.extend_from_slice(word.letters());
                queue.push_back((Word(longer), images.iter().map(|v| m.apply(v)).collect()));
            }
        }
    }
    ball
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn ctx() -> GroupContext {
        let a = Mat3::from_rows([
            [ratio(7, 2), ratio(3, 1), ratio(3, 2)],
            [ratio(3, 1), ratio(3, 1), ratio(1, 1)],
            [ratio(3, 2), ratio(1, 1), ratio(3, 2)],
        ]);
        let b = Mat3::from_rows([
            [ratio(7, 2), ratio(-3, 1), ratio(3, 2)],
            [ratio(-3, 1), ratio(3, 1), ratio(-1, 1)],
            [ratio(3, 2), ratio(-1, 1), ratio(3, 2)],
        ]);
        GroupContext::new(vec!["A".into(), "B".into()], vec![a, b], Vec::new())
    }

    #[test]
    fn free_reduction() {
        let a = Word::gen(0);
        let b = Word::gen(1);
        assert!(a.mul(&a.inv()).is_empty());
        assert_eq!(a.mul(&b).mul(&b.inv()), a);
        assert_eq!(a.lower_commutator(&b).len(), 4);
        assert_eq!(a.commutator(&b).inv(), b.commutator(&a));
    }

    #[test]
    fn word_text_round_trip() {
        let g = ctx();
        let w = g.parse_word("A B^-1 A A").unwrap();
        assert_eq!(g.format_word(&w), "A B^-1 A A");
        assert_eq!(g.parse_word("A A^-1").unwrap(), Word::identity());
        assert_eq!(g.parse_word("1").unwrap(), Word::identity());
        assert!(g.parse_word("C").is_err());
    }

    #[test]
    fn realization_is_a_homomorphism() {
        let g = ctx();
        let words = g.words_up_to(3);
        assert_eq!(words.len(), 1 + 4 + 12 + 36);
        for u in words.iter().step_by(7) {
            for v in words.iter().step_by(5) {
                assert_eq!(g.realize(&u.mul(v)), &g.realize(u) * &g.realize(v));
            }
        }
    }

    #[test]
    fn ball_depths() {
        let g = ctx();
        let v = Vec3::from_ints([1, 0, -1]);
        let b0 = orbit_ball(&g.generators, std::slice::from_ref(&v), 0);
        assert_eq!(b0.points, vec![v.clone()]);
        let b1 = orbit_ball(&g.generators, std::slice::from_ref(&v), 1);
        assert_eq!(b1.len(), 5);
        for w in g.words_up_to(1) {
            assert!(b1.contains(&g.realize(&w).apply(&v)));
        }
        let mut last = 0;
        for d in 0..5 {
            let b = orbit_ball(&g.generators, std::slice::from_ref(&v), d);
            assert!(b.len() >= last);
            for (p, w) in b.points.iter().zip(&b.words) {
                assert_eq!(&g.realize(w).apply(&v), p);
            }
            last = b.len();
        }
    }
}
