//! Ordered set of `(key, interval)` pairs that stays inline while small.
//! Most values own one or two intervals, so a tree per value is wasted memory.

use std::collections::BTreeSet;
use std::ops::RangeBounds;

type Entry = (u32, u32);

const INLINE: usize = 3;

#[derive(Debug, Clone)]
pub(crate) enum Group {
    Inline { len: u8, items: [Entry; INLINE] },
    Tree(BTreeSet<Entry>),
}

impl Default for Group {
    fn default() -> Self {
        Group::Inline { len: 0, items: [(0, 0); INLINE] }
    }
}

impl Group {
    pub(crate) fn len(&self) -> usize {
        match self {
            Group::Inline { len, .. } => *len as usize,
            Group::Tree(t) => t.len(),
        }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn first(&self) -> Option<Entry> {
        match self {
            Group::Inline { len, items } => items[..*len as usize].first().copied(),
            Group::Tree(t) => t.first().copied(),
        }
    }

    pub(crate) fn last(&self) -> Option<Entry> {
        match self {
            Group::Inline { len, items } => items[..*len as usize].last().copied(),
            Group::Tree(t) => t.last().copied(),
        }
    }

    pub(crate) fn insert(&mut self, e: Entry) {
        match self {
            Group::Inline { len, items } => {
                let n = *len as usize;
                let pos = match items[..n].binary_search(&e) {
                    Ok(_) => return,
                    Err(p) => p,
                };
                if n < INLINE {
                    items.copy_within(pos..n, pos + 1);
                    items[pos] = e;
                    *len += 1;
                } else {
                    let mut t: BTreeSet<Entry> = items.iter().copied().collect();
                    t.insert(e);
                    *self = Group::Tree(t);
                }
            }
            Group::Tree(t) => {
                t.insert(e);
            }
        }
    }

    pub(crate) fn remove(&mut self, e: &Entry) {
        match self {
            Group::Inline { len, items } => {
                let n = *len as usize;
                if let Ok(pos) = items[..n].binary_search(e) {
                    items.copy_within(pos + 1..n, pos);
                    *len -= 1;
                }
            }
            Group::Tree(t) => {
                t.remove(e);
            }
        }
    }

    pub(crate) fn keys_in(&self, range: impl RangeBounds<Entry>) -> Vec<Entry> {
        match self {
            Group::Inline { len, items } => {
                items[..*len as usize].iter().copied().filter(|e| range.contains(e)).collect()
            }
            Group::Tree(t) => t.range(range).copied().collect(),
        }
    }

    fn drain_all(self) -> Vec<Entry> {
        match self {
            Group::Inline { len, items } => items[..len as usize].to_vec(),
            Group::Tree(t) => t.into_iter().collect(),
        }
    }

    /// Moves everything from `other` in, inserting the smaller side into the larger.
    pub(crate) fn absorb(&mut self, mut other: Group) {
        if other.len() > self.len() {
            std::mem::swap(self, &mut other);
        }
        for e in other.drain_all() {
            self.insert(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spills_and_keeps_order() {
        let mut g = Group::default();
        for e in [(5, 1), (2, 2), (9, 3), (2, 2), (1, 4)] {
            g.insert(e);
        }
        assert_eq!(g.len(), 4);
        assert_eq!(g.first(), Some((1, 4)));
        assert_eq!(g.last(), Some((9, 3)));
        assert_eq!(g.keys_in(..=(5, u32::MAX)), vec![(1, 4), (2, 2), (5, 1)]);
        g.remove(&(1, 4));
        assert_eq!(g.keys_in((3, 0)..), vec![(5, 1), (9, 3)]);
    }

    #[test]
    fn absorb_matches_union() {
        let mut a = Group::default();
        let mut b = Group::default();
        a.insert((1, 1));
        for i in 0..6 {
            b.insert((i, 10 + i));
        }
        a.absorb(b);
        assert_eq!(a.len(), 7);
        assert_eq!(a.first(), Some((0, 10)));
    }
}
