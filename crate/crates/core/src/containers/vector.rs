use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::measure::{Flavor, Seq};
use crate::tree::{FingerTree, Iter};
use crate::zipper::{ByElem, Cursor, End};

/// Persistent vector.
///
/// `F` is normally [`Seq`]; other flavors appear when a set or a string is
/// viewed as a vector without copying.
pub struct Vector<T: Clone + 'static, F: Flavor<Elem = T> = Seq<T>> {
    tree: FingerTree<F>,
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Clone for Vector<T, F> {
    fn clone(&self) -> Self {
        Vector { tree: self.tree.clone() }
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Default for Vector<T, F> {
    fn default() -> Self {
        Vector { tree: FingerTree::new() }
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Vector<T, F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tree(tree: FingerTree<F>) -> Self {
        Vector { tree }
    }

    pub fn tree(&self) -> &FingerTree<F> {
        &self.tree
    }

    pub fn into_tree(self) -> FingerTree<F> {
        self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<&T> {
        self.tree.get(idx)
    }

    /// Like [`get`](Self::get) but reports a range error.
    pub fn at(&self, idx: usize) -> Result<&T> {
        self.tree.get(idx).ok_or(Error::OutOfRange { index: idx, len: self.len() })
    }

    pub fn front(&self) -> Option<&T> {
        self.tree.front()
    }

    pub fn back(&self) -> Option<&T> {
        self.tree.back()
    }

    pub fn push_back(&mut self, x: T) {
        self.tree.push_back(x);
    }

    pub fn push_front(&mut self, x: T) {
        self.tree.push_front(x);
    }

    pub fn pop_back(&mut self) -> Option<T> {
        self.tree.pop_back()
    }

    pub fn pop_front(&mut self) -> Option<T> {
        self.tree.pop_front()
    }

    pub fn set(&mut self, idx: usize, x: T) -> Result<()> {
        self.tree.set(idx, x)
    }

    /// Appends all of `other` (`v += w`).
    pub fn append(&mut self, other: &Self) {
        self.tree.append(other.tree.clone());
    }

    /// Removes and returns the elements from `at` on.
    pub fn split_off(&mut self, at: usize) -> Result<Self> {
        if at > self.len() {
            return Err(Error::OutOfRange { index: at, len: self.len() });
        }
        Ok(Vector { tree: self.tree.split_off(at) })
    }

    pub fn with_push_back(&self, x: T) -> Self {
        let mut v = self.clone();
        v.push_back(x);
        v
    }

    pub fn with_push_front(&self, x: T) -> Self {
        let mut v = self.clone();
        v.push_front(x);
        v
    }

    pub fn with_pop_back(&self) -> Result<Self> {
        let mut v = self.clone();
        v.pop_back().ok_or(Error::Empty)?;
        Ok(v)
    }

    pub fn with_pop_front(&self) -> Result<Self> {
        let mut v = self.clone();
        v.pop_front().ok_or(Error::Empty)?;
        Ok(v)
    }

    pub fn with_set(&self, idx: usize, x: T) -> Result<Self> {
        let mut v = self.clone();
        v.set(idx, x)?;
        Ok(v)
    }

    pub fn concat(&self, other: &Self) -> Self {
        Vector { tree: self.tree.concat(&other.tree) }
    }

    pub fn begin(&self) -> VecIter<T, F> {
        VecIter { cur: Cursor::begin(&self.tree) }
    }

    pub fn end(&self) -> End {
        End
    }

    /// Iterator positioned at `idx` (clamped to the end).
    pub fn iter_at(&self, idx: usize) -> VecIter<T, F> {
        VecIter { cur: Cursor::new(&self.tree, idx) }
    }

    pub fn iter(&self) -> Iter<'_, F> {
        self.tree.iter()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.tree.flatten()
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        self.tree.check()
    }

    pub fn audit(&self) -> bool {
        self.tree.audit()
    }

    /// True when both values are the very same structure.
    pub fn ptr_eq(&self, other: &Self) -> bool {
        self.tree.root_id() == other.tree.root_id()
    }
}

impl<T: Clone + fmt::Debug + 'static, F: Flavor<Elem = T>> Vector<T, F> {
    pub fn dump(&self) -> String {
        self.tree.dump()
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Index<usize> for Vector<T, F> {
    type Output = T;

    fn index(&self, idx: usize) -> &T {
        match self.tree.get(idx) {
            Some(x) => x,
            None => panic!("index {idx} out of range for length {}", self.len()),
        }
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> FromIterator<T> for Vector<T, F> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Vector { tree: iter.into_iter().collect() }
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Extend<T> for Vector<T, F> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        self.tree.extend(iter)
    }
}

impl<'a, T: Clone + 'static, F: Flavor<Elem = T>> IntoIterator for &'a Vector<T, F> {
    type Item = &'a T;
    type IntoIter = Iter<'a, F>;

    fn into_iter(self) -> Iter<'a, F> {
        self.tree.iter()
    }
}

impl<T: Clone + PartialEq + 'static, F: Flavor<Elem = T>> PartialEq for Vector<T, F> {
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
    }
}

impl<T: Clone + Eq + 'static, F: Flavor<Elem = T>> Eq for Vector<T, F> {}

impl<T: Clone + fmt::Debug + 'static, F: Flavor<Elem = T>> fmt::Debug for Vector<T, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// Persistent iterator over a [`Vector`].
pub struct VecIter<T: Clone + 'static, F: Flavor<Elem = T> = Seq<T>> {
    cur: Cursor<F, ByElem>,
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> Clone for VecIter<T, F> {
    fn clone(&self) -> Self {
        VecIter { cur: self.cur.clone() }
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> VecIter<T, F> {
    /// Current element, or `None` at the end.
    pub fn get(&self) -> Option<&T> {
        self.cur.get()
    }

    pub fn pos(&self) -> usize {
        self.cur.pos()
    }

    /// Length of the iterator's own version.
    pub fn len(&self) -> usize {
        self.cur.size()
    }

    pub fn is_empty(&self) -> bool {
        self.cur.size() == 0
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

    pub fn seek_to(&mut self, pos: usize) -> Result<()> {
        self.cur.seek_to(pos)
    }

    pub fn assign(&mut self, x: T) -> Result<()> {
        self.cur.assign(std::slice::from_ref(&x))
    }

    pub fn insert(&mut self, x: T) -> Result<()> {
        self.cur.insert(std::slice::from_ref(&x))
    }

    pub fn erase(&mut self) -> Result<()> {
        self.cur.erase()
    }

    pub fn value(&self) -> Vector<T, F> {
        Vector { tree: self.cur.value() }
    }

    pub fn into_value(self) -> Vector<T, F> {
        Vector { tree: self.cur.into_value() }
    }

    pub fn cursor(&self) -> &Cursor<F, ByElem> {
        &self.cur
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> PartialEq for VecIter<T, F> {
    fn eq(&self, other: &Self) -> bool {
        self.cur == other.cur
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> PartialEq<End> for VecIter<T, F> {
    fn eq(&self, _: &End) -> bool {
        self.cur.is_end()
    }
}

impl<T: Clone + 'static, F: Flavor<Elem = T>> fmt::Debug for VecIter<T, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cur.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap;

    #[test]
    fn push_back_then_index() {
        let mut v: Vector<u64> = Vector::new();
        for i in 0..1000u64 {
            v.push_back(i);
        }
        for i in 0..1000 {
            assert_eq!(v[i], i as u64);
        }
        assert_eq!(v.at(1000), Err(Error::OutOfRange { index: 1000, len: 1000 }));
    }

    #[test]
    fn push_front_then_front() {
        let mut v: Vector<u64> = (1..5).collect();
        v.push_front(0);
        assert_eq!(v.front(), Some(&0));
    }

    #[test]
    fn ten_concats() {
        let parts: Vec<Vector<u64>> = (0..10).map(|k| (k * 1000..(k + 1) * 1000).collect()).collect();
        let all = parts.iter().fold(Vector::new(), |acc, p| acc.concat(p));
        assert_eq!(all.to_vec(), (0..10_000).collect::<Vec<_>>());
    }

    #[test]
    fn set_copies_only_a_path() {
        let v: Vector<u64> = (0..10_000).collect();
        let before = heap::allocations();
        let w = v.with_set(5000, 7).unwrap();
        assert!(heap::allocations() - before < 40);
        assert_eq!(v[5000], 5000);
        assert_eq!(w[5000], 7);
        w.check().unwrap();
    }

    #[test]
    fn iterator_examples() {
        let v: Vector<u64> = [1, 2, 3].into_iter().collect();
        let mut it = v.begin();
        assert_eq!(it.get(), Some(&1));
        it.assign(9).unwrap();
        assert_eq!(it.value().to_vec(), vec![9, 2, 3]);
        assert_eq!(v.to_vec(), vec![1, 2, 3]);

        let mut it = v.begin();
        it.erase().unwrap();
        assert_eq!(it.value().to_vec(), vec![2, 3]);

        let e: Vector<u64> = Vector::new();
        assert!(e.begin() == End);
        let mut it = e.begin();
        it.insert(4).unwrap();
        assert_eq!(it.value().to_vec(), vec![4]);
        assert!(it == End);
    }

    #[test]
    fn pure_variants_leave_the_source_alone() {
        let v: Vector<u64> = (0..20).collect();
        let a = v.with_push_back(20);
        let b = v.with_push_front(100);
        let c = v.with_pop_back().unwrap();
        let d = v.with_pop_front().unwrap();
        assert_eq!(v.to_vec(), (0..20).collect::<Vec<_>>());
        assert_eq!((a.len(), b[0], c.len(), d[0]), (21, 100, 19, 1));
        assert_eq!(Vector::<u64>::new().with_pop_back().err(), Some(Error::Empty));
    }
}
