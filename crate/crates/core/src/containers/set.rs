use std::fmt;
use std::marker::PhantomData;
use std::ops::Index;

use crate::containers::Vector;
use crate::error::{Error, Result};
use crate::measure::{KeyRank, Sorted};
use crate::tree::{FingerTree, Iter};
use crate::zipper::{ByElem, Cursor, End};

/// Strict weak ordering used by sorted containers.
pub trait Compare<T>: 'static {
    fn less(a: &T, b: &T) -> bool;

    fn equiv(a: &T, b: &T) -> bool {
        !Self::less(a, b) && !Self::less(b, a)
    }
}

/// Ascending `Ord` order.
pub struct Natural;

impl<T: Ord> Compare<T> for Natural {
    #[inline]
    fn less(a: &T, b: &T) -> bool {
        a < b
    }
}

/// Descending `Ord` order.
pub struct Reverse;

impl<T: Ord> Compare<T> for Reverse {
    #[inline]
    fn less(a: &T, b: &T) -> bool {
        b < a
    }
}

pub(crate) fn at_least<K, C: Compare<K>>(x: &K) -> impl Fn(&KeyRank<K>) -> bool + '_ {
    move |m| m.key.as_ref().is_some_and(|k| !C::less(k, x))
}

pub(crate) fn above<K, C: Compare<K>>(x: &K) -> impl Fn(&KeyRank<K>) -> bool + '_ {
    move |m| m.key.as_ref().is_some_and(|k| C::less(x, k))
}

/// Sorted sequence of `T` ordered by `C`; `MULTI` allows equal elements.
pub struct SortedSeq<T, C = Natural, const MULTI: bool = false>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    tree: FingerTree<Sorted<T>>,
    _cmp: PhantomData<fn() -> C>,
}

pub type SortedSet<T, C = Natural> = SortedSeq<T, C, false>;
pub type MultiSet<T, C = Natural> = SortedSeq<T, C, true>;

impl<T, C, const MULTI: bool> Clone for SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    fn clone(&self) -> Self {
        SortedSeq { tree: self.tree.clone(), _cmp: PhantomData }
    }
}

impl<T, C, const MULTI: bool> Default for SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    fn default() -> Self {
        SortedSeq { tree: FingerTree::new(), _cmp: PhantomData }
    }
}

impl<T, C, const MULTI: bool> SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Rank of the first element not less than `x`.
    pub fn lower_rank(&self, x: &T) -> usize {
        self.tree.find(at_least::<T, C>(x)).map_or(self.len(), |(i, _)| i)
    }

    /// Rank of the first element greater than `x`.
    pub fn upper_rank(&self, x: &T) -> usize {
        self.tree.find(above::<T, C>(x)).map_or(self.len(), |(i, _)| i)
    }

    pub fn contains(&self, x: &T) -> bool {
        self.tree.find(at_least::<T, C>(x)).is_some_and(|(_, e)| C::equiv(e, x))
    }

    pub fn count(&self, x: &T) -> usize {
        self.upper_rank(x) - self.lower_rank(x)
    }

    /// Iterator on the first element equal to `x`.
    pub fn find(&self, x: &T) -> Option<SetIter<T>> {
        let cur = Cursor::<_, ByElem>::find(&self.tree, at_least::<T, C>(x))?;
        C::equiv(cur.get()?, x).then_some(SetIter { cur })
    }

    /// Iterator on the first element not less than `x` (possibly the end).
    pub fn lower_bound(&self, x: &T) -> SetIter<T> {
        SetIter { cur: Cursor::new(&self.tree, self.lower_rank(x)) }
    }

    pub fn upper_bound(&self, x: &T) -> SetIter<T> {
        SetIter { cur: Cursor::new(&self.tree, self.upper_rank(x)) }
    }

    /// Element of rank `idx`.
    pub fn nth(&self, idx: usize) -> Option<&T> {
        self.tree.get(idx)
    }

    pub fn at(&self, idx: usize) -> Result<&T> {
        self.tree.get(idx).ok_or(Error::OutOfRange { index: idx, len: self.len() })
    }

    pub fn first(&self) -> Option<&T> {
        self.tree.front()
    }

    pub fn last(&self) -> Option<&T> {
        self.tree.back()
    }

    /// Removes the leftmost element equal to `x`.
    pub fn erase(&mut self, x: &T) -> bool {
        let Some(mut cur) = Cursor::<_, ByElem>::find(&self.tree, at_least::<T, C>(x)) else { return false };
        if !cur.get().is_some_and(|e| C::equiv(e, x)) {
            return false;
        }
        self.tree = FingerTree::new();
        cur.erase().expect("cursor on an element");
        self.tree = cur.into_value();
        true
    }

    /// Removes every element equal to `x`, returning how many went.
    pub fn erase_all(&mut self, x: &T) -> usize {
        let mut mid = self.tree.split_off_dyn(&at_least::<T, C>(x));
        let right = mid.split_off_dyn(&above::<T, C>(x));
        self.tree.append(right);
        mid.len()
    }

    pub fn with_erase(&self, x: &T) -> Self {
        let mut s = self.clone();
        s.erase(x);
        s
    }

    pub fn pop_first(&mut self) -> Option<T> {
        self.tree.pop_front()
    }

    pub fn pop_last(&mut self) -> Option<T> {
        self.tree.pop_back()
    }

    pub fn begin(&self) -> SetIter<T> {
        SetIter { cur: Cursor::begin(&self.tree) }
    }

    pub fn end(&self) -> End {
        End
    }

    pub fn iter(&self) -> Iter<'_, Sorted<T>> {
        self.tree.iter()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.tree.flatten()
    }

    /// The same elements as a vector, sharing every node.
    pub fn as_vector(&self) -> Vector<T, Sorted<T>> {
        Vector::from_tree(self.tree.clone())
    }

    pub fn into_vector(self) -> Vector<T, Sorted<T>> {
        Vector::from_tree(self.tree)
    }

    pub fn tree(&self) -> &FingerTree<Sorted<T>> {
        &self.tree
    }

    /// Structural check plus order (and uniqueness for sets).
    pub fn check(&self) -> std::result::Result<(), String> {
        self.tree.check()?;
        let mut prev: Option<&T> = None;
        for (i, x) in self.tree.iter().enumerate() {
            if let Some(p) = prev {
                if C::less(x, p) {
                    return Err(format!("out of order at rank {i}"));
                }
                if !MULTI && C::equiv(x, p) {
                    return Err(format!("duplicate at rank {i}"));
                }
            }
            prev = Some(x);
        }
        Ok(())
    }

    pub fn audit(&self) -> bool {
        self.check().is_ok()
    }

    pub fn dump(&self) -> String {
        self.tree.dump()
    }

    /// Inserts through a cursor so the element joins an existing leaf.
    fn insert_at(&mut self, x: T) -> bool {
        let found = if MULTI {
            Cursor::<_, ByElem>::find(&self.tree, above::<T, C>(&x))
        } else {
            Cursor::<_, ByElem>::find(&self.tree, at_least::<T, C>(&x))
        };
        let mut cur = found.unwrap_or_else(|| Cursor::<_, ByElem>::end(&self.tree));
        if !MULTI && cur.get().is_some_and(|e| C::equiv(e, &x)) {
            return false;
        }
        self.tree = FingerTree::new();
        cur.insert(std::slice::from_ref(&x)).expect("insert never fails");
        self.tree = cur.into_value();
        true
    }
}

impl<T, C> SortedSeq<T, C, false>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    /// Adds `x` unless an equal element is present; reports whether it was added.
    pub fn insert(&mut self, x: T) -> bool {
        self.insert_at(x)
    }

    pub fn with_insert(&self, x: T) -> Self {
        let mut s = self.clone();
        s.insert(x);
        s
    }
}

impl<T, C> SortedSeq<T, C, true>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    /// Adds `x` after every element equal to it.
    pub fn insert(&mut self, x: T) {
        self.insert_at(x);
    }

    pub fn with_insert(&self, x: T) -> Self {
        let mut s = self.clone();
        s.insert(x);
        s
    }
}

impl<T, C, const MULTI: bool> Index<usize> for SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    type Output = T;

    fn index(&self, idx: usize) -> &T {
        match self.tree.get(idx) {
            Some(x) => x,
            None => panic!("rank {idx} out of range for length {}", self.len()),
        }
    }
}

impl<T, C> FromIterator<T> for SortedSeq<T, C, false>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl<T, C> FromIterator<T> for SortedSeq<T, C, true>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
    C: Compare<T>,
{
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl<T, C, const MULTI: bool> PartialEq for SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
    }
}

impl<T, C, const MULTI: bool> fmt::Debug for SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.tree.iter()).finish()
    }
}

impl<'a, T, C, const MULTI: bool> IntoIterator for &'a SortedSeq<T, C, MULTI>
where
    T: Clone + fmt::Debug + PartialEq + 'static,
{
    type Item = &'a T;
    type IntoIter = Iter<'a, Sorted<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.tree.iter()
    }
}

/// Persistent iterator over a sorted sequence. Removal keeps the order, so
/// `erase` is offered; insertion is not.
pub struct SetIter<T: Clone + fmt::Debug + PartialEq + 'static> {
    cur: Cursor<Sorted<T>, ByElem>,
}

impl<T: Clone + fmt::Debug + PartialEq + 'static> Clone for SetIter<T> {
    fn clone(&self) -> Self {
        SetIter { cur: self.cur.clone() }
    }
}

impl<T: Clone + fmt::Debug + PartialEq + 'static> SetIter<T> {
    pub fn get(&self) -> Option<&T> {
        self.cur.get()
    }

    pub fn pos(&self) -> usize {
        self.cur.pos()
    }

    pub fn is_end(&self) -> bool {
        self.cur.is_end()
    }

    pub fn advance(&mut self) -> Result<()> {
        self.cur.advance()
    }

    pub fn retreat(&mut self) -> Result<()> {
        self.cur.retreat()
    }

    pub fn seek(&mut self, n: isize) -> Result<()> {
        self.cur.seek(n)
    }

    pub fn erase(&mut self) -> Result<()> {
        self.cur.erase()
    }

    /// The iterator's version of the container.
    pub fn value<C: Compare<T>, const MULTI: bool>(&self) -> SortedSeq<T, C, MULTI> {
        SortedSeq { tree: self.cur.value(), _cmp: PhantomData }
    }
}

impl<T: Clone + fmt::Debug + PartialEq + 'static> PartialEq for SetIter<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cur == other.cur
    }
}

impl<T: Clone + fmt::Debug + PartialEq + 'static> PartialEq<End> for SetIter<T> {
    fn eq(&self, _: &End) -> bool {
        self.cur.is_end()
    }
}

impl<T: Clone + fmt::Debug + PartialEq + 'static> fmt::Debug for SetIter<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cur.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap;
    use rand::{rngs::StdRng, seq::SliceRandom, SeedableRng};

    #[test]
    fn shuffled_inserts_come_out_sorted() {
        let mut xs: Vec<u64> = (0..1000).collect();
        xs.shuffle(&mut StdRng::seed_from_u64(1));
        let s: SortedSet<u64> = xs.into_iter().collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(s.to_vec(), (0..1000).collect::<Vec<_>>());
        s.check().unwrap();
        for i in 0..1000 {
            assert_eq!(s[i], i as u64);
        }
    }

    #[test]
    fn duplicates() {
        let mut m = MultiSet::<u64>::new();
        let mut s = SortedSet::<u64>::new();
        for _ in 0..3 {
            m.insert(5);
            s.insert(5);
        }
        assert_eq!((m.len(), s.len()), (3, 1));
        assert_eq!(m.count(&5), 3);
        assert!(m.erase(&5));
        assert_eq!(m.len(), 2);
        assert_eq!(m.erase_all(&5), 2);
        assert!(m.is_empty());
        assert!(!m.erase(&5));
    }

    #[test]
    fn multi_insert_goes_after_equals() {
        let mut m = MultiSet::<(u8, u8), ByFirst>::new();
        m.insert((1, 0));
        m.insert((2, 0));
        m.insert((1, 1));
        m.insert((1, 2));
        m.insert((0, 0));
        assert_eq!(m.to_vec(), vec![(0, 0), (1, 0), (1, 1), (1, 2), (2, 0)]);
        m.erase(&(1, 9));
        assert_eq!(m.to_vec(), vec![(0, 0), (1, 1), (1, 2), (2, 0)]);
        m.check().unwrap();
    }

    struct ByFirst;

    impl Compare<(u8, u8)> for ByFirst {
        fn less(a: &(u8, u8), b: &(u8, u8)) -> bool {
            a.0 < b.0
        }
    }

    #[test]
    fn reverse_order() {
        let s: SortedSet<u64, Reverse> = [3, 1, 2].into_iter().collect();
        assert_eq!(s.to_vec(), vec![3, 2, 1]);
        assert!(s.contains(&2));
        assert_eq!(s.lower_rank(&2), 1);
    }

    #[test]
    fn find_and_bounds() {
        let s: SortedSet<u64> = [1, 4, 7, 9].into_iter().collect();
        let it = s.find(&7).unwrap();
        assert_eq!((it.pos(), it.get()), (2, Some(&7)));
        assert!(s.find(&5).is_none());
        assert_eq!(s.lower_bound(&5).get(), Some(&7));
        assert!(s.lower_bound(&10) == End);
        assert_eq!(s.upper_bound(&4).get(), Some(&7));
    }

    #[test]
    fn upcast_allocates_nothing() {
        let s: SortedSet<u64> = (0..1000).collect();
        let before = heap::allocations();
        let v = s.as_vector();
        assert_eq!(heap::allocations(), before);
        assert_eq!(v.to_vec(), s.to_vec());
        assert!(SortedSet::<u64>::new().as_vector().is_empty());
    }

    #[test]
    fn iterator_erase_keeps_order() {
        let s: SortedSet<u64> = (0..100).collect();
        let mut it = s.find(&50).unwrap();
        it.erase().unwrap();
        let t: SortedSet<u64> = it.value();
        t.check().unwrap();
        assert!(!t.contains(&50) && s.contains(&50));
    }
}
