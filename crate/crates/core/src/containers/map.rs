use std::fmt;
use std::marker::PhantomData;

use crate::containers::set::{above, at_least, Compare, Natural};
use crate::containers::Vector;
use crate::error::{Error, Result};
use crate::measure::Keyed;
use crate::tree::{FingerTree, Iter};
use crate::zipper::{ByElem, Cursor, End};

/// Key-value pairs sorted by key under `C`; `MULTI` allows repeated keys.
pub struct SortedKv<K, V, C = Natural, const MULTI: bool = false>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    tree: FingerTree<Keyed<K, V>>,
    _cmp: PhantomData<fn() -> C>,
}

pub type SortedMap<K, V, C = Natural> = SortedKv<K, V, C, false>;
pub type MultiMap<K, V, C = Natural> = SortedKv<K, V, C, true>;

impl<K, V, C, const MULTI: bool> Clone for SortedKv<K, V, C, MULTI>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn clone(&self) -> Self {
        SortedKv { tree: self.tree.clone(), _cmp: PhantomData }
    }
}

impl<K, V, C, const MULTI: bool> Default for SortedKv<K, V, C, MULTI>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn default() -> Self {
        SortedKv { tree: FingerTree::new(), _cmp: PhantomData }
    }
}

impl<K, V, C, const MULTI: bool> SortedKv<K, V, C, MULTI>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
    C: Compare<K>,
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

    fn lookup(&self, k: &K) -> Option<(usize, &(K, V))> {
        self.tree.find(at_least::<K, C>(k)).filter(|(_, e)| C::equiv(&e.0, k))
    }

    pub fn contains_key(&self, k: &K) -> bool {
        self.lookup(k).is_some()
    }

    /// Value under `k` (the first one, for multimaps). Absence is `None`;
    /// nothing is inserted.
    pub fn get(&self, k: &K) -> Option<&V> {
        self.lookup(k).map(|(_, e)| &e.1)
    }

    pub fn at(&self, k: &K) -> Result<&V> {
        self.get(k).ok_or(Error::KeyNotFound)
    }

    pub fn count(&self, k: &K) -> usize {
        let lo = self.tree.find(at_least::<K, C>(k)).map_or(self.len(), |(i, _)| i);
        let hi = self.tree.find(above::<K, C>(k)).map_or(self.len(), |(i, _)| i);
        hi - lo
    }

    /// Pair of rank `idx`.
    pub fn nth(&self, idx: usize) -> Option<(&K, &V)> {
        self.tree.get(idx).map(|(k, v)| (k, v))
    }

    pub fn find(&self, k: &K) -> Option<MapIter<K, V>> {
        let cur = Cursor::<_, ByElem>::find(&self.tree, at_least::<K, C>(k))?;
        C::equiv(&cur.get()?.0, k).then_some(MapIter { cur })
    }

    /// Removes the first pair with key `k`, returning its value.
    pub fn erase(&mut self, k: &K) -> Option<V> {
        let mut cur = Cursor::<_, ByElem>::find(&self.tree, at_least::<K, C>(k))?;
        let old = cur.get().filter(|e| C::equiv(&e.0, k))?.1.clone();
        self.tree = FingerTree::new();
        cur.erase().expect("cursor on an element");
        self.tree = cur.into_value();
        Some(old)
    }

    pub fn erase_all(&mut self, k: &K) -> usize {
        let mut mid = self.tree.split_off_dyn(&at_least::<K, C>(k));
        let right = mid.split_off_dyn(&above::<K, C>(k));
        self.tree.append(right);
        mid.len()
    }

    pub fn with_erase(&self, k: &K) -> Self {
        let mut m = self.clone();
        m.erase(k);
        m
    }

    pub fn begin(&self) -> MapIter<K, V> {
        MapIter { cur: Cursor::begin(&self.tree) }
    }

    pub fn end(&self) -> End {
        End
    }

    pub fn iter(&self) -> Iter<'_, Keyed<K, V>> {
        self.tree.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.tree.iter().map(|e| &e.0)
    }

    pub fn to_vec(&self) -> Vec<(K, V)> {
        self.tree.flatten()
    }

    /// The pairs as a vector, sharing every node.
    pub fn as_vector(&self) -> Vector<(K, V), Keyed<K, V>> {
        Vector::from_tree(self.tree.clone())
    }

    pub fn tree(&self) -> &FingerTree<Keyed<K, V>> {
        &self.tree
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        self.tree.check()?;
        let mut prev: Option<&K> = None;
        for (i, (k, _)) in self.tree.iter().enumerate() {
            if let Some(p) = prev {
                if C::less(k, p) {
                    return Err(format!("key out of order at rank {i}"));
                }
                if !MULTI && C::equiv(k, p) {
                    return Err(format!("duplicate key at rank {i}"));
                }
            }
            prev = Some(k);
        }
        Ok(())
    }

    pub fn audit(&self) -> bool {
        self.check().is_ok()
    }

    /// Inserts (or, for maps, replaces) through a cursor so the pair joins an existing leaf.
    fn splice_in(&mut self, k: K, v: V) -> Option<V> {
        let found = if MULTI {
            Cursor::<_, ByElem>::find(&self.tree, above::<K, C>(&k))
        } else {
            Cursor::<_, ByElem>::find(&self.tree, at_least::<K, C>(&k))
        };
        let mut cur = found.unwrap_or_else(|| Cursor::<_, ByElem>::end(&self.tree));
        let old = cur.get().filter(|e| !MULTI && C::equiv(&e.0, &k)).map(|e| e.1.clone());
        self.tree = FingerTree::new();
        if old.is_some() {
            cur.assign(&[(k, v)]).expect("cursor on an element");
        } else {
            cur.insert(&[(k, v)]).expect("insert never fails");
        }
        self.tree = cur.into_value();
        old
    }
}

impl<K, V, C> SortedKv<K, V, C, false>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
    C: Compare<K>,
{
    /// Binds `k` to `v`, returning the value it replaced.
    pub fn insert(&mut self, k: K, v: V) -> Option<V> {
        self.splice_in(k, v)
    }

    pub fn with_insert(&self, k: K, v: V) -> Self {
        let mut m = self.clone();
        m.insert(k, v);
        m
    }

    /// Value under `k`, inserting `default` first when absent.
    pub fn get_or_insert(&mut self, k: K, default: V) -> &V {
        self.get_or_insert_with(k, || default)
    }

    pub fn get_or_insert_with(&mut self, k: K, f: impl FnOnce() -> V) -> &V {
        if !self.contains_key(&k) {
            self.splice_in(k.clone(), f());
        }
        self.get(&k).expect("present after insertion")
    }
}

impl<K, V, C> SortedKv<K, V, C, true>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
    C: Compare<K>,
{
    /// Adds the pair after every pair with an equal key.
    pub fn insert(&mut self, k: K, v: V) {
        self.splice_in(k, v);
    }

    pub fn with_insert(&self, k: K, v: V) -> Self {
        let mut m = self.clone();
        m.insert(k, v);
        m
    }

    /// All values under `k`, in insertion order.
    pub fn get_all(&self, k: &K) -> Vec<&V> {
        let start = self.tree.find(at_least::<K, C>(k)).map_or(self.len(), |(i, _)| i);
        (start..self.len()).map_while(|i| self.tree.get(i).filter(|e| C::equiv(&e.0, k)).map(|e| &e.1)).collect()
    }
}

impl<K, V, C> FromIterator<(K, V)> for SortedKv<K, V, C, false>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
    C: Compare<K>,
{
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

impl<K, V, C> FromIterator<(K, V)> for SortedKv<K, V, C, true>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
    C: Compare<K>,
{
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

impl<K, V, C, const MULTI: bool> PartialEq for SortedKv<K, V, C, MULTI>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + PartialEq + 'static,
{
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
    }
}

impl<K, V, C, const MULTI: bool> fmt::Debug for SortedKv<K, V, C, MULTI>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + fmt::Debug + 'static,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.tree.iter().map(|(k, v)| (k, v))).finish()
    }
}

/// Persistent iterator over a sorted map. Values may be replaced in place;
/// keys are fixed.
pub struct MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    cur: Cursor<Keyed<K, V>, ByElem>,
}

impl<K, V> Clone for MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn clone(&self) -> Self {
        MapIter { cur: self.cur.clone() }
    }
}

impl<K, V> MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    pub fn get(&self) -> Option<(&K, &V)> {
        self.cur.get().map(|(k, v)| (k, v))
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

    pub fn set_value(&mut self, v: V) -> Result<()> {
        let k = self.cur.get().ok_or(Error::AtEnd)?.0.clone();
        self.cur.assign(&[(k, v)])
    }

    pub fn erase(&mut self) -> Result<()> {
        self.cur.erase()
    }

    pub fn value<C: Compare<K>, const MULTI: bool>(&self) -> SortedKv<K, V, C, MULTI> {
        SortedKv { tree: self.cur.value(), _cmp: PhantomData }
    }
}

impl<K, V> PartialEq for MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn eq(&self, other: &Self) -> bool {
        self.cur == other.cur
    }
}

impl<K, V> PartialEq<End> for MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn eq(&self, _: &End) -> bool {
        self.cur.is_end()
    }
}

impl<K, V> fmt::Debug for MapIter<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cur.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_replaces() {
        let mut m = SortedMap::<u64, u64>::new();
        assert_eq!(m.insert(3, 30), None);
        assert_eq!(m.insert(1, 10), None);
        assert_eq!(m.insert(3, 31), Some(30));
        assert_eq!(m.to_vec(), vec![(1, 10), (3, 31)]);
        m.check().unwrap();
    }

    #[test]
    fn lookup_does_not_insert() {
        let mut m = SortedMap::<u64, u64>::new();
        assert_eq!(m.get(&4), None);
        assert_eq!(m.at(&4), Err(Error::KeyNotFound));
        assert!(m.is_empty());
        assert_eq!(*m.get_or_insert(4, 0), 0);
        assert_eq!(*m.get_or_insert(4, 9), 0);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn rank_access_matches_sorted_oracle() {
        let keys = [50u64, 10, 40, 20, 30];
        let m: SortedMap<u64, u64> = keys.iter().map(|&k| (k, k * 2)).collect();
        let mut sorted = keys.to_vec();
        sorted.sort();
        for (i, k) in sorted.iter().enumerate() {
            assert_eq!(m.nth(i), Some((k, &(k * 2))));
        }
        assert_eq!(m.nth(5), None);
    }

    #[test]
    fn multimap_keeps_insertion_order_among_equals() {
        let mut m = MultiMap::<u64, &str>::new();
        m.insert(1, "a");
        m.insert(2, "x");
        m.insert(1, "b");
        m.insert(1, "c");
        assert_eq!(m.get_all(&1), vec![&"a", &"b", &"c"]);
        assert_eq!(m.get(&1), Some(&"a"));
        assert_eq!(m.erase(&1), Some("a"));
        assert_eq!(m.count(&1), 2);
        assert_eq!(m.erase_all(&1), 2);
        assert_eq!(m.to_vec(), vec![(2, "x")]);
    }

    #[test]
    fn iterator_set_value() {
        let m: SortedMap<u64, u64> = (0..50).map(|k| (k, 0)).collect();
        let mut it = m.find(&20).unwrap();
        it.set_value(7).unwrap();
        let n: SortedMap<u64, u64> = it.value();
        assert_eq!(n.get(&20), Some(&7));
        assert_eq!(m.get(&20), Some(&0));
        n.check().unwrap();
    }
}
