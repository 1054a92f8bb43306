//! Pure states with a handful of equal-magnitude, signed basis terms.
//!
//! A state `{(x_1, s_1), ..., (x_k, s_k)}` stands for `sum_j s_j |x_j> / sqrt(k)`.
//! Normalization is structural, so every protocol-side computation is exact.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use super::bits::BitString;
use super::QsimError;

/// Default bound on the number of terms a state may carry.
pub const DEFAULT_MAX_TERMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^bit`.
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        Sign::from_bit(self.is_minus() ^ other.is_minus())
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub basis: BitString,
    pub sign: Sign,
}

/// A total, deterministic predicate over basis strings of one declared length.
pub trait BasisPredicate {
    fn width(&self) -> usize;
    fn accepts(&self, basis: &BitString) -> bool;
}

/// Adapts a closure into a [`BasisPredicate`].
pub struct FnPredicate<F> {
    width: usize,
    f: F,
}

impl<F: Fn(&BitString) -> bool> FnPredicate<F> {
    pub fn new(width: usize, f: F) -> Self {
        Self { width, f }
    }
}

impl<F: Fn(&BitString) -> bool> BasisPredicate for FnPredicate<F> {
    fn width(&self) -> usize {
        self.width
    }

    fn accepts(&self, basis: &BitString) -> bool {
        (self.f)(basis)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectOutcome {
    Accept(SparseState),
    Reject,
}

impl ProjectOutcome {
    pub fn is_accept(&self) -> bool {
        matches!(self, ProjectOutcome::Accept(_))
    }
}

/// Closed-form Born-rule law of a full Hadamard-basis measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HadamardLaw {
    /// Every string of `n` bits is equally likely.
    Uniform { n: usize },
    /// Uniform over `{d : <d, direction> = parity}`, a set of `2^(n-1)` strings.
    Affine {
        n: usize,
        direction: BitString,
        parity: bool,
    },
}

impl HadamardLaw {
    pub fn width(&self) -> usize {
        match self {
            HadamardLaw::Uniform { n } | HadamardLaw::Affine { n, .. } => *n,
        }
    }

    pub fn contains(&self, d: &BitString) -> bool {
        match self {
            HadamardLaw::Uniform { n } => d.len() == *n,
            HadamardLaw::Affine {
                direction, parity, ..
            } => direction.dot(d).map(|p| p == *parity).unwrap_or(false),
        }
    }

    /// Exact probability of outcome `d` (all values are dyadic, so `f64` is exact).
    pub fn probability(&self, d: &BitString) -> f64 {
        if !self.contains(d) {
            return 0.0;
        }
        match self {
            HadamardLaw::Uniform { n } => 2f64.powi(-(*n as i32)),
            HadamardLaw::Affine { n, .. } => 2f64.powi(1 - *n as i32),
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> BitString {
        match self {
            HadamardLaw::Uniform { n } => BitString::random(*n, rng),
            HadamardLaw::Affine {
                n,
                direction,
                parity,
            } => {
                // free coordinates uniform, the pivot fixed by the parity constraint
                let pivot = direction.first_one().expect("nonzero direction");
                let mut d = BitString::random(*n, rng);
                d.set(pivot, false);
                let rest = direction.dot(&d).expect("equal widths");
                d.set(pivot, rest ^ *parity);
                d
            }
        }
    }

    /// Dense table indexed by the big-endian value of `d`.
    pub fn to_table(&self) -> Vec<f64> {
        let n = self.width();
        (0..1u64 << n)
            .map(|i| self.probability(&BitString::from_u64(i, n).expect("n <= 64")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseState {
    n_qubits: usize,
    terms: Vec<Term>,
}

impl SparseState {
    /// `|x>`.
    pub fn basis(x: BitString) -> Self {
        Self {
            n_qubits: x.len(),
            terms: vec![Term {
                basis: x,
                sign: Sign::Plus,
            }],
        }
    }

    /// `(|x0> + (-1)^d0 |x1>) / sqrt(2)`.
    pub fn superpose2(x0: BitString, x1: BitString, d0: bool) -> Result<Self, QsimError> {
        if x0.len() != x1.len() {
            return Err(QsimError::WidthMismatch {
                expected: x0.len(),
                found: x1.len(),
            });
        }
        if x0 == x1 {
            return Err(QsimError::EqualBasisStrings);
        }
        Ok(Self {
            n_qubits: x0.len(),
            terms: vec![
                Term {
                    basis: x0,
                    sign: Sign::Plus,
                },
                Term {
                    basis: x1,
                    sign: Sign::from_bit(d0),
                },
            ],
        })
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<Term>) -> Result<Self, QsimError> {
        Self::from_terms_bounded(n_qubits, terms, DEFAULT_MAX_TERMS)
    }

    pub fn from_terms_bounded(
        n_qubits: usize,
        terms: Vec<Term>,
        max_terms: usize,
    ) -> Result<Self, QsimError> {
        if n_qubits == 0 {
            return Err(QsimError::NoQubits);
        }
        if terms.is_empty() || terms.len() > max_terms {
            return Err(QsimError::TermCount {
                count: terms.len(),
                max: max_terms,
            });
        }
        for (i, t) in terms.iter().enumerate() {
            if t.basis.len() != n_qubits {
                return Err(QsimError::WidthMismatch {
                    expected: n_qubits,
                    found: t.basis.len(),
                });
            }
            if terms[..i].iter().any(|u| u.basis == t.basis) {
                return Err(QsimError::EqualBasisStrings);
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn sign_of(&self, basis: &BitString) -> Option<Sign> {
        self.terms.iter().find(|t| &t.basis == basis).map(|t| t.sign)
    }

    /// `Z^m` on one qubit.
    pub fn apply_z_phase(&self, qubit: usize, m: bool) -> Result<Self, QsimError> {
        if qubit >= self.n_qubits {
            return Err(QsimError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let mut out = self.clone();
        if m {
            for t in out.terms.iter_mut() {
                if t.basis.get(qubit) {
                    t.sign = t.sign.flipped();
                }
            }
        }
        Ok(out)
    }

    /// `X` on one qubit.
    pub fn apply_x(&self, qubit: usize) -> Result<Self, QsimError> {
        if qubit >= self.n_qubits {
            return Err(QsimError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.basis.flip(qubit);
        }
        Ok(out)
    }

    /// Exact acceptance probability of `pred`, as `(accepted terms, total terms)`.
    pub fn accept_ratio<P: BasisPredicate + ?Sized>(&self, pred: &P) -> (usize, usize) {
        let hits = self.terms.iter().filter(|t| pred.accepts(&t.basis)).count();
        (hits, self.terms.len())
    }

    /// Two-outcome projective measurement `{P, Id - P}` with `P` diagonal in the
    /// computational basis. Randomness is consumed only when both outcomes are possible.
    pub fn project<P, R>(&self, pred: &P, rng: &mut R) -> Result<ProjectOutcome, QsimError>
    where
        P: BasisPredicate + ?Sized,
        R: RngCore + ?Sized,
    {
        if pred.width() != self.n_qubits {
            return Err(QsimError::WidthMismatch {
                expected: self.n_qubits,
                found: pred.width(),
            });
        }
        let kept: Vec<Term> = self
            .terms
            .iter()
            .filter(|t| pred.accepts(&t.basis))
            .cloned()
            .collect();
        let accept = match kept.len() {
            0 => false,
            k if k == self.terms.len() => true,
            k => below(rng, self.terms.len() as u64) < k as u64,
        };
        if !accept {
            return Ok(ProjectOutcome::Reject);
        }
        Ok(ProjectOutcome::Accept(Self {
            n_qubits: self.n_qubits,
            terms: kept,
        }))
    }

    pub fn measure_computational<R: RngCore + ?Sized>(&self, rng: &mut R) -> BitString {
        if self.terms.len() == 1 {
            return self.terms[0].basis.clone();
        }
        let i = below(rng, self.terms.len() as u64) as usize;
        self.terms[i].basis.clone()
    }

    /// Law of measuring every qubit after `H^{\otimes n}`.
    ///
    /// For `(|x0> + s|x1>)` the amplitude at `d` is proportional to
    /// `(-1)^{<d,x0>} (1 + s (-1)^{<d, x0 ^ x1>})`, which vanishes unless
    /// `<d, x0 ^ x1>` equals the relative phase bit.
    pub fn hadamard_law(&self) -> Result<HadamardLaw, QsimError> {
        match self.terms.as_slice() {
            [_] => Ok(HadamardLaw::Uniform { n: self.n_qubits }),
            [a, b] => Ok(HadamardLaw::Affine {
                n: self.n_qubits,
                direction: a.basis.xor(&b.basis).expect("equal widths"),
                parity: a.sign.times(b.sign).is_minus(),
            }),
            terms => Err(QsimError::UnsupportedTermCount(terms.len())),
        }
    }

    pub fn measure_hadamard_all<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<BitString, QsimError> {
        Ok(self.hadamard_law()?.sample(rng))
    }

    /// Line-oriented text form: `n=<n> k=<k>` then one `<sign> <bits>` line per term.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} k={}", self.n_qubits, self.terms.len())?;
        for t in &self.terms {
            write!(f, "\n{} {}", t.sign.symbol(), t.basis)?;
        }
        Ok(())
    }
}

impl FromStr for SparseState {
    type Err = QsimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| QsimError::Parse { line: 1, msg: "missing header".into() })?;
        let mut n = None;
        let mut k = None;
        for field in header.split_whitespace() {
            let bad = || QsimError::Parse { line: 1, msg: format!("bad header field {field:?}") };
            let (key, val) = field.split_once('=').ok_or_else(bad)?;
            let val: usize = val.parse().map_err(|_| bad())?;
            match key {
                "n" => n = Some(val),
                "k" => k = Some(val),
                _ => return Err(bad()),
            }
        }
        let (n, k) = match (n, k) {
            (Some(n), Some(k)) => (n, k),
            _ => return Err(QsimError::Parse { line: 1, msg: "header needs n= and k=".into() }),
        };
        let mut terms = Vec::with_capacity(k);
        for (idx, line) in lines {
            let bad = |msg: String| QsimError::Parse { line: idx + 1, msg };
            let mut parts = line.split_whitespace();
            let sign = match parts.next() {
                Some("+") => Sign::Plus,
                Some("-") => Sign::Minus,
                other => return Err(bad(format!("bad sign {other:?}"))),
            };
            let basis: BitString = parts
                .next()
                .ok_or_else(|| bad("missing basis string".into()))?
                .parse()
                .map_err(|e| bad(format!("{e}")))?;
            if parts.next().is_some() {
                return Err(bad("trailing tokens".into()));
            }
            terms.push(Term { basis, sign });
        }
        if terms.len() != k {
            return Err(QsimError::Parse {
                line: 1,
                msg: format!("header declares k={k}, found {} terms", terms.len()),
            });
        }
        Self::from_terms_bounded(n, terms, k.max(DEFAULT_MAX_TERMS))
    }
}

fn below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::RngStream;
    use crate::qsim::bits::bits;

    fn terms(state: &SparseState) -> Vec<(String, char)> {
        state
            .terms()
            .iter()
            .map(|t| (t.basis.to_string(), t.sign.symbol()))
            .collect()
    }

    #[test]
    fn make_basis() {
        let s = SparseState::basis(bits("000"));
        assert_eq!(terms(&s), vec![("000".into(), '+')]);
        assert_eq!(SparseState::basis(bits("1")).n_qubits(), 1);
        let s = SparseState::basis(bits("1011"));
        assert_eq!(s.n_qubits(), 4);
        assert_eq!(terms(&s), vec![("1011".into(), '+')]);
    }

    #[test]
    fn superpose2_signs() {
        let s = SparseState::superpose2(bits("000"), bits("111"), false).unwrap();
        assert_eq!(terms(&s), vec![("000".into(), '+'), ("111".into(), '+')]);
        let s = SparseState::superpose2(bits("000"), bits("111"), true).unwrap();
        assert_eq!(terms(&s), vec![("000".into(), '+'), ("111".into(), '-')]);
        assert_eq!(
            SparseState::superpose2(bits("01"), bits("01"), false),
            Err(QsimError::EqualBasisStrings)
        );
    }

    #[test]
    fn z_phase() {
        let s = SparseState::superpose2(bits("000"), bits("111"), false).unwrap();
        assert_eq!(s.apply_z_phase(0, false).unwrap(), s);
        let z = s.apply_z_phase(0, true).unwrap();
        assert_eq!(terms(&z), vec![("000".into(), '+'), ("111".into(), '-')]);
        let b = SparseState::basis(bits("011"));
        assert_eq!(b.apply_z_phase(0, true).unwrap(), b);
        assert!(matches!(
            b.apply_z_phase(3, true),
            Err(QsimError::IndexOutOfRange { index: 3, n_qubits: 3 })
        ));
    }

    #[test]
    fn project_cases() {
        let mut rng = RngStream::new(1, 0);
        let valid = |x: &BitString| x == &bits("0101") || x == &bits("1110");
        let pred = FnPredicate::new(4, valid);

        let honest = SparseState::superpose2(bits("0101"), bits("1110"), true).unwrap();
        assert_eq!(
            honest.project(&pred, &mut rng).unwrap(),
            ProjectOutcome::Accept(honest.clone())
        );

        let bad = SparseState::basis(bits("1000"));
        assert_eq!(bad.project(&pred, &mut rng).unwrap(), ProjectOutcome::Reject);

        let half = SparseState::superpose2(bits("0101"), bits("1000"), false).unwrap();
        assert_eq!(half.accept_ratio(&pred), (1, 2));
        let mut accepts = 0;
        for _ in 0..1000 {
            if let ProjectOutcome::Accept(post) = half.project(&pred, &mut rng).unwrap() {
                assert_eq!(post, SparseState::basis(bits("0101")));
                accepts += 1;
            }
        }
        assert!((440..=560).contains(&accepts), "{accepts}");

        let wrong_width = FnPredicate::new(3, |_: &BitString| true);
        assert!(honest.project(&wrong_width, &mut rng).is_err());
    }

    #[test]
    fn hadamard_law_support_small_example() {
        // terms (0,00) and (1,11): x0 ^ x1 = 111
        let s = SparseState::superpose2(bits("000"), bits("111"), false).unwrap();
        let law = s.hadamard_law().unwrap();
        let support: Vec<String> = (0..8u64)
            .map(|i| BitString::from_u64(i, 3).unwrap())
            .filter(|d| law.probability(d) > 0.0)
            .map(|d| d.to_string())
            .collect();
        assert_eq!(support, vec!["000", "011", "101", "110"]);
        for d in &support {
            assert_eq!(law.probability(&bits(d)), 0.25);
        }

        let s = SparseState::superpose2(bits("000"), bits("111"), true).unwrap();
        let law = s.hadamard_law().unwrap();
        let support: Vec<String> = (0..8u64)
            .map(|i| BitString::from_u64(i, 3).unwrap())
            .filter(|d| law.probability(d) > 0.0)
            .map(|d| d.to_string())
            .collect();
        assert_eq!(support, vec!["001", "010", "100", "111"]);
    }

    #[test]
    fn hadamard_rejects_three_terms() {
        let t = |b: &str| Term { basis: bits(b), sign: Sign::Plus };
        let s = SparseState::from_terms_bounded(2, vec![t("00"), t("01"), t("10")], 4).unwrap();
        assert_eq!(s.hadamard_law(), Err(QsimError::UnsupportedTermCount(3)));
        assert!(SparseState::from_terms(2, vec![t("00"), t("01"), t("10")]).is_err());
    }

    #[test]
    fn measure_computational_point_mass() {
        let mut rng = RngStream::new(3, 0);
        let s = SparseState::basis(bits("101"));
        for _ in 0..10 {
            assert_eq!(s.measure_computational(&mut rng), bits("101"));
        }
    }

    #[test]
    fn text_format() {
        let s = SparseState::superpose2(bits("0101"), bits("1110"), true).unwrap();
        let text = s.to_text();
        assert_eq!(text, "n=4 k=2\n+ 0101\n- 1110");
        assert_eq!(text.parse::<SparseState>().unwrap(), s);
        assert!("n=4 k=2\n+ 0101".parse::<SparseState>().is_err());
        assert!("n=4 k=1\n* 0101".parse::<SparseState>().is_err());
        assert!("n=3 k=1\n+ 0101".parse::<SparseState>().is_err());
    }
}
