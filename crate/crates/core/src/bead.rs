//! Alignment units and ordered alignment sets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// A group of complex-side sentences mapped to a group of simple-side
/// sentences. Either side may be empty (a skip), but not both.
#[derive(Debug, Clone, PartialEq)]
pub struct Bead {
    src: Vec<usize>,
    tgt: Vec<usize>,
    score: Option<f64>,
}

impl Bead {
    pub fn new(src: Vec<usize>, tgt: Vec<usize>, score: Option<f64>) -> Result<Self> {
        if src.is_empty() && tgt.is_empty() {
            return Err(Error::InvalidBead("both sides empty".into()));
        }
        for (name, side) in [("src", &src), ("tgt", &tgt)] {
            if side.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidBead(format!("{name} indices not strictly increasing: {side:?}")));
            }
        }
        if let Some(s) = score {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::InvalidBead(format!("score {s} outside [-1, 1]")));
            }
        }
        Ok(Self { src, tgt, score })
    }

    pub fn from_ranges(src: Range<usize>, tgt: Range<usize>, score: Option<f64>) -> Result<Self> {
        Self::new(src.collect(), tgt.collect(), score)
    }

    pub fn src(&self) -> &[usize] {
        &self.src
    }

    pub fn tgt(&self) -> &[usize] {
        &self.tgt
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    pub fn with_score(mut self, score: Option<f64>) -> Self {
        self.score = score;
        self
    }

    /// One side is empty: a deletion or an unmatched simple sentence.
    pub fn is_null(&self) -> bool {
        self.src.is_empty() || self.tgt.is_empty()
    }

    pub fn is_one_to_one(&self) -> bool {
        self.src.len() == 1 && self.tgt.len() == 1
    }

    pub fn is_contiguous(&self) -> bool {
        [&self.src, &self.tgt].iter().all(|s| s.windows(2).all(|w| w[1] == w[0] + 1))
    }

    /// Same groups on both sides, ignoring the score.
    pub fn same_groups(&self, other: &Bead) -> bool {
        self.src == other.src && self.tgt == other.tgt
    }

    /// Shares at least one index on both sides.
    pub fn overlaps(&self, other: &Bead) -> bool {
        intersects(&self.src, &other.src) && intersects(&self.tgt, &other.tgt)
    }
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentSet {
    pub pair_id: String,
    pub beads: Vec<Bead>,
}

impl AlignmentSet {
    pub fn new(pair_id: impl Into<String>, beads: Vec<Bead>) -> Self {
        Self { pair_id: pair_id.into(), beads }
    }

    /// Checks that beads are monotone and non-crossing with no index used
    /// twice on a side, and that every index is below the document sizes.
    pub fn check_monotone(&self, complex_len: usize, simple_len: usize) -> Result<()> {
        let mut next_src = 0;
        let mut next_tgt = 0;
        for bead in &self.beads {
            for (side, next, len) in
                [(&bead.src, &mut next_src, complex_len), (&bead.tgt, &mut next_tgt, simple_len)]
            {
                if let (Some(&first), Some(&last)) = (side.first(), side.last()) {
                    if first < *next {
                        return Err(Error::InvalidBead(format!(
                            "bead {:?}->{:?} crosses or repeats an earlier index",
                            bead.src, bead.tgt
                        )));
                    }
                    if last >= len {
                        return Err(Error::IndexOutOfRange { index: last, len });
                    }
                    *next = last + 1;
                }
            }
        }
        Ok(())
    }

    /// Aligner output contract: monotone, contiguous bead sides, and every
    /// simple index covered exactly once. With `exhaustive_complex` every
    /// complex index must be covered as well.
    pub fn check_partition(&self, complex_len: usize, simple_len: usize, exhaustive_complex: bool) -> Result<()> {
        self.check_monotone(complex_len, simple_len)?;
        if let Some(b) = self.beads.iter().find(|b| !b.is_contiguous()) {
            return Err(Error::InvalidBead(format!("non-contiguous bead {:?}->{:?}", b.src, b.tgt)));
        }
        let covered = |f: fn(&Bead) -> usize| self.beads.iter().map(f).sum::<usize>();
        if covered(|b| b.tgt.len()) != simple_len {
            return Err(Error::InvalidBead("simple side not covered exactly once".into()));
        }
        if exhaustive_complex && covered(|b| b.src.len()) != complex_len {
            return Err(Error::InvalidBead("complex side not covered exactly once".into()));
        }
        Ok(())
    }

    pub fn non_null(&self) -> impl Iterator<Item = &Bead> {
        self.beads.iter().filter(|b| !b.is_null())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn b(src: &[usize], tgt: &[usize]) -> Bead {
        Bead::new(src.to_vec(), tgt.to_vec(), None).unwrap()
    }

    #[test]
    fn bead_invariants() {
        assert!(Bead::new(vec![], vec![], None).is_err());
        assert!(Bead::new(vec![2, 1], vec![0], None).is_err());
        assert!(Bead::new(vec![1], vec![0], Some(1.5)).is_err());
        assert!(b(&[1, 2], &[]).is_null());
        assert!(!b(&[1, 3], &[0]).is_contiguous());
    }

    #[test]
    fn overlap() {
        assert!(b(&[1, 2], &[3]).overlaps(&b(&[1], &[3])));
        assert!(!b(&[1, 2], &[3]).overlaps(&b(&[3], &[3])));
        assert!(!b(&[1], &[2]).overlaps(&b(&[1], &[3])));
    }

    #[test]
    fn monotone_checks() {
        let ok = AlignmentSet::new("p", vec![b(&[0], &[0]), b(&[1, 2], &[]), b(&[3], &[1, 2])]);
        ok.check_partition(4, 3, true).unwrap();
        let crossing = AlignmentSet::new("p", vec![b(&[1], &[0]), b(&[0], &[1])]);
        assert!(crossing.check_monotone(2, 2).is_err());
        let repeated = AlignmentSet::new("p", vec![b(&[0], &[0]), b(&[1], &[0])]);
        assert!(repeated.check_monotone(2, 2).is_err());
        let gap = AlignmentSet::new("p", vec![b(&[0], &[0])]);
        assert!(gap.check_partition(1, 2, false).is_err());
        assert!(gap.check_monotone(1, 1).is_ok());
        assert!(gap.check_monotone(0, 1).is_err());
    }
}
