//! Partitions of a finite sample `{1, ..., n}`.
//!
//! A [`Partition`] is stored as a restricted growth string: element `i` carries
//! the index of its block, and blocks are numbered in order of their least
//! element. Two partitions are equal exactly when their strings are equal, so
//! derived `Eq`/`Hash`/`Ord` agree with set-theoretic equality.
//!
//! Elements are 0-based inside the API (`0..n`) and rendered 1-based, so the
//! partition with blocks `[[0, 1], [2]]` displays as `{{1,2},{3}}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest sample size accepted by [`enumerate_partitions`]; Bell(10) = 115975.
pub const MAX_ENUMERATION_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("block index {index} out of range for a partition with {blocks} blocks")]
    BlockOutOfRange { index: usize, blocks: usize },
    #[error("a merge needs at least two distinct blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("partitions of different sample sizes ({0} and {1})")]
    SizeMismatch(usize, usize),
    #[error("refusing to enumerate partitions of {0} elements (limit {MAX_ENUMERATION_SIZE})")]
    TooLarge(usize),
    #[error("malformed partition text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    num_blocks: usize,
}

impl Partition {
    /// The all-singletons partition of `n` elements.
    pub fn singletons(n: usize) -> Result<Self, PartitionError> {
        if n == 0 {
            return Err(PartitionError::EmptySample);
        }
        Ok(Self { labels: (0..n).collect(), num_blocks: n })
    }

    /// The partition with a single block holding all `n` elements.
    pub fn single_block(n: usize) -> Result<Self, PartitionError> {
        if n == 0 {
            return Err(PartitionError::EmptySample);
        }
        Ok(Self { labels: vec![0; n], num_blocks: 1 })
    }

    /// Builds a partition from an arbitrary block labelling of the elements;
    /// elements sharing a label share a block. The labelling is canonicalized.
    pub fn from_labels<T: Eq + Clone>(labels: &[T]) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::EmptySample);
        }
        let mut seen: Vec<&T> = Vec::new();
        let mut canonical = Vec::with_capacity(labels.len());
        for label in labels {
            let idx = match seen.iter().position(|s| *s == label) {
                Some(idx) => idx,
                None => {
                    seen.push(label);
                    seen.len() - 1
                }
            };
            canonical.push(idx);
        }
        Ok(Self { labels: canonical, num_blocks: seen.len() })
    }

    /// Builds a partition from explicit 0-based blocks; they must be disjoint,
    /// non-empty and cover `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self, PartitionError> {
        if n == 0 {
            return Err(PartitionError::EmptySample);
        }
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PartitionError::Parse("empty block".into()));
            }
            for &e in block {
                if e >= n {
                    return Err(PartitionError::Parse(format!("element {} outside 1..={n}", e + 1)));
                }
                if labels[e] != usize::MAX {
                    return Err(PartitionError::Parse(format!("element {} repeated", e + 1)));
                }
                labels[e] = b;
            }
        }
        if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(PartitionError::Parse(format!("element {} missing", missing + 1)));
        }
        Self::from_labels(&labels)
    }

    /// Sample size `n`.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Block index of element `element` (0-based).
    pub fn block_of(&self, element: usize) -> usize {
        self.labels[element]
    }

    /// The canonical block labelling (restricted growth string).
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Blocks in canonical order, each with ascending 0-based elements.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (e, &b) in self.labels.iter().enumerate() {
            blocks[b].push(e);
        }
        blocks
    }

    pub fn is_singletons(&self) -> bool {
        self.num_blocks == self.n()
    }

    /// Coarsens by relabelling blocks: blocks `i` and `j` end up together iff
    /// `block_groups[i] == block_groups[j]`.
    pub fn coarsen<T: Eq + Clone>(&self, block_groups: &[T]) -> Result<Self, PartitionError> {
        if block_groups.len() != self.num_blocks {
            return Err(PartitionError::SizeMismatch(block_groups.len(), self.num_blocks));
        }
        let per_element: Vec<T> = self.labels.iter().map(|&b| block_groups[b].clone()).collect();
        Self::from_labels(&per_element)
    }

    /// Unions the blocks whose (0-based) indices appear in `which`.
    pub fn merge_blocks(&self, which: &[usize]) -> Result<Self, PartitionError> {
        let mut chosen = vec![false; self.num_blocks];
        let mut distinct = 0;
        for &b in which {
            if b >= self.num_blocks {
                return Err(PartitionError::BlockOutOfRange { index: b, blocks: self.num_blocks });
            }
            if !chosen[b] {
                chosen[b] = true;
                distinct += 1;
            }
        }
        if distinct < 2 {
            return Err(PartitionError::TooFewBlocks(distinct));
        }
        let target = which[0];
        let groups: Vec<usize> = (0..self.num_blocks).map(|b| if chosen[b] { target } else { b }).collect();
        self.coarsen(&groups)
    }

    /// True iff every block of `other` is a union of blocks of `self`.
    pub fn is_refined_by(&self, other: &Partition) -> bool {
        matches!(merge_profile(self, other), Ok(Some(_)))
    }
}

/// Counts `b_1, ..., b_|eta|` of `xi`-blocks merged into each block of `eta`
/// (blocks of `eta` in canonical order).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergeProfile(pub Vec<usize>);

impl MergeProfile {
    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    /// Number of blocks lost in the transition, `sum(b_i - 1)`.
    pub fn block_drop(&self) -> usize {
        self.0.iter().map(|b| b - 1).sum()
    }

    /// More than a single binary merger: some `b_i >= 3`, or at least two
    /// blocks formed from several `xi`-blocks at once.
    pub fn is_multiple_merger(&self) -> bool {
        let merged = self.0.iter().filter(|&&b| b >= 2).count();
        merged >= 2 || self.0.iter().any(|&b| b >= 3)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&b| b == 1)
    }
}

/// Merge profile of `xi -> eta`, or `None` when `eta` cannot be obtained from
/// `xi` by merging blocks.
pub fn merge_profile(xi: &Partition, eta: &Partition) -> Result<Option<MergeProfile>, PartitionError> {
    if xi.n() != eta.n() {
        return Err(PartitionError::SizeMismatch(xi.n(), eta.n()));
    }
    // Each xi-block maps to the eta-block of its least element; every other
    // element of the xi-block must agree.
    let mut target = vec![usize::MAX; xi.num_blocks()];
    for (e, &b) in xi.labels.iter().enumerate() {
        let t = eta.labels[e];
        if target[b] == usize::MAX {
            target[b] = t;
        } else if target[b] != t {
            return Ok(None);
        }
    }
    let mut counts = vec![0; eta.num_blocks()];
    for t in target {
        counts[t] += 1;
    }
    Ok(Some(MergeProfile(counts)))
}

/// All partitions of `n` elements, each exactly once, in lexicographic order
/// of their restricted growth strings (so the singletons partition is last and
/// the single block first).
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>, PartitionError> {
    if n == 0 {
        return Err(PartitionError::EmptySample);
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(PartitionError::TooLarge(n));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    // maxima[i] = max(labels[..=i])
    let mut maxima = vec![0usize; n];
    loop {
        out.push(Partition { labels: labels.clone(), num_blocks: maxima[n - 1] + 1 });
        // Increment the rightmost position that may still grow.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if labels[i] <= maxima[i - 1] {
                labels[i] += 1;
                maxima[i] = maxima[i - 1].max(labels[i]);
                for j in i + 1..n {
                    labels[j] = 0;
                    maxima[j] = maxima[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell numbers, for sizing checks.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    /// Parses the `{{1,2},{3}}` rendering; blocks may come in any order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| PartitionError::Parse(s.to_string()))?;
        let mut blocks = Vec::new();
        let mut rest = inner;
        while !rest.is_empty() {
            let body = rest.strip_prefix('{').ok_or_else(|| PartitionError::Parse(s.to_string()))?;
            let close = body.find('}').ok_or_else(|| PartitionError::Parse(s.to_string()))?;
            let block = body[..close]
                .split(',')
                .map(|tok| match tok.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(PartitionError::Parse(s.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            blocks.push(block);
            rest = &body[close + 1..];
            rest = rest.strip_prefix(',').unwrap_or(rest);
        }
        let n = blocks.iter().map(|b| b.len()).sum();
        Self::from_blocks(n, &blocks)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn singletons() {
        assert_eq!(Partition::singletons(3).unwrap().to_string(), "{{1},{2},{3}}");
        assert_eq!(Partition::singletons(1).unwrap().to_string(), "{{1}}");
        let five = Partition::singletons(5).unwrap();
        assert_eq!(five.num_blocks(), 5);
        for (i, block) in five.blocks().iter().enumerate() {
            assert_eq!(block, &vec![i]);
        }
        assert_eq!(Partition::singletons(0), Err(PartitionError::EmptySample));
    }

    #[test]
    fn merge_examples() {
        let delta3 = Partition::singletons(3).unwrap();
        let m = delta3.merge_blocks(&[0, 1]).unwrap();
        assert_eq!(m, p("{{1,2},{3}}"));
        assert_eq!(m.merge_blocks(&[0, 1]).unwrap(), p("{{1,2,3}}"));
        let delta4 = Partition::singletons(4).unwrap();
        assert_eq!(delta4.merge_blocks(&[0, 2, 3]).unwrap(), p("{{1,3,4},{2}}"));
    }

    #[test]
    fn merge_errors() {
        let delta3 = Partition::singletons(3).unwrap();
        assert_eq!(delta3.merge_blocks(&[0, 3]), Err(PartitionError::BlockOutOfRange { index: 3, blocks: 3 }));
        assert_eq!(delta3.merge_blocks(&[1]), Err(PartitionError::TooFewBlocks(1)));
        assert_eq!(delta3.merge_blocks(&[1, 1]), Err(PartitionError::TooFewBlocks(1)));
    }

    #[test]
    fn profile_examples() {
        let delta3 = Partition::singletons(3).unwrap();
        assert_eq!(merge_profile(&delta3, &p("{{1,2},{3}}")).unwrap(), Some(MergeProfile(vec![2, 1])));
        let delta4 = Partition::singletons(4).unwrap();
        assert_eq!(merge_profile(&delta4, &p("{{1,2,3,4}}")).unwrap(), Some(MergeProfile(vec![4])));
        assert_eq!(merge_profile(&p("{{1,2},{3}}"), &p("{{1,3},{2}}")).unwrap(), None);
        assert_eq!(merge_profile(&delta3, &delta4), Err(PartitionError::SizeMismatch(3, 4)));
    }

    #[test]
    fn multiple_merger_classification() {
        assert!(!MergeProfile(vec![2, 1, 1]).is_multiple_merger());
        assert!(MergeProfile(vec![3, 1]).is_multiple_merger());
        assert!(MergeProfile(vec![2, 2]).is_multiple_merger());
        assert!(!MergeProfile(vec![1, 1]).is_multiple_merger());
        assert_eq!(MergeProfile(vec![2, 2, 1]).block_drop(), 2);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_partitions(1).unwrap().len(), 1);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(4).unwrap().len(), 15);
        for n in 1..=7 {
            assert_eq!(enumerate_partitions(n).unwrap().len() as u128, bell_number(n));
        }
        assert_eq!(enumerate_partitions(11), Err(PartitionError::TooLarge(11)));
    }

    #[test]
    fn enumeration_is_sorted_and_contains_extremes() {
        let all = enumerate_partitions(5).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], Partition::single_block(5).unwrap());
        assert_eq!(*all.last().unwrap(), Partition::singletons(5).unwrap());
    }

    #[test]
    fn parse_any_block_order() {
        assert_eq!(p("{{3},{2,1}}"), p("{{1,2},{3}}"));
        assert!("{{1},{1}}".parse::<Partition>().is_err());
        assert!("{{1},{3}}".parse::<Partition>().is_err());
        assert!("{1,2}".parse::<Partition>().is_err());
    }

    #[test]
    fn serde_uses_text_form() {
        let part = p("{{1,3},{2}}");
        let json = serde_json::to_string(&part).unwrap();
        assert_eq!(json, "\"{{1,3},{2}}\"");
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, part);
    }
}
