//! Monoid measures cached in tree nodes, and the flavors that pair an element
//! type with its measure.

use std::fmt;
use std::marker::PhantomData;

/// An associative summary with an identity.
pub trait Monoid: Clone + fmt::Debug + PartialEq + 'static {
    fn identity() -> Self;

    fn combine(&self, other: &Self) -> Self;

    /// Number of stored elements summarized by this value.
    fn count(&self) -> usize;

    /// Compact rendering used by tree dumps.
    fn fmt_compact(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

/// Element count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Size(pub usize);

impl Monoid for Size {
    #[inline]
    fn identity() -> Self {
        Size(0)
    }

    #[inline]
    fn combine(&self, other: &Self) -> Self {
        Size(self.0 + other.0)
    }

    #[inline]
    fn count(&self) -> usize {
        self.0
    }

    fn fmt_compact(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Element count together with the largest key of the summarized range.
///
/// For a sorted sequence the rightmost key is the maximum, so combining keeps
/// the right operand's key and falls back to the left one only when the right
/// side is empty. Descending for "first element with key >= k" then asks
/// whether the prefix seen so far already reaches `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyRank<K> {
    pub count: usize,
    pub key: Option<K>,
}

impl<K> KeyRank<K> {
    pub fn of(key: K) -> Self {
        KeyRank { count: 1, key: Some(key) }
    }
}

impl<K: Clone + fmt::Debug + PartialEq + 'static> Monoid for KeyRank<K> {
    fn identity() -> Self {
        KeyRank { count: 0, key: None }
    }

    #[inline]
    fn combine(&self, other: &Self) -> Self {
        KeyRank {
            count: self.count + other.count,
            key: other.key.clone().or_else(|| self.key.clone()),
        }
    }

    #[inline]
    fn count(&self) -> usize {
        self.count
    }

    fn fmt_compact(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "{}@{:?}", self.count, k),
            None => write!(f, "{}", self.count),
        }
    }
}

/// Scalar and byte counts of UTF-8 text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Utf8Measure {
    pub code_points: usize,
    pub bytes: usize,
}

impl Monoid for Utf8Measure {
    #[inline]
    fn identity() -> Self {
        Utf8Measure { code_points: 0, bytes: 0 }
    }

    #[inline]
    fn combine(&self, other: &Self) -> Self {
        Utf8Measure {
            code_points: self.code_points + other.code_points,
            bytes: self.bytes + other.bytes,
        }
    }

    #[inline]
    fn count(&self) -> usize {
        self.bytes
    }

    fn fmt_compact(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.code_points, self.bytes)
    }
}

/// Adapter so measures can be printed with `{}`.
pub struct Compact<'a, M>(pub &'a M);

impl<M: Monoid> fmt::Display for Compact<'_, M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_compact(f)
    }
}

/// Pairs a stored element type with the measure that summarizes it.
pub trait Flavor: 'static {
    type Elem: Clone + 'static;
    type Measure: Monoid;

    fn measure(e: &Self::Elem) -> Self::Measure;

    fn measure_slice(es: &[Self::Elem]) -> Self::Measure {
        es.iter().fold(Self::Measure::identity(), |acc, e| acc.combine(&Self::measure(e)))
    }
}

/// Plain sequences.
pub struct Seq<T>(PhantomData<fn() -> T>);

impl<T: Clone + 'static> Flavor for Seq<T> {
    type Elem = T;
    type Measure = Size;

    #[inline]
    fn measure(_: &T) -> Size {
        Size(1)
    }

    #[inline]
    fn measure_slice(es: &[T]) -> Size {
        Size(es.len())
    }
}

/// Sorted sequences keyed by the element itself.
pub struct Sorted<T>(PhantomData<fn() -> T>);

impl<T: Clone + fmt::Debug + PartialEq + 'static> Flavor for Sorted<T> {
    type Elem = T;
    type Measure = KeyRank<T>;

    #[inline]
    fn measure(e: &T) -> KeyRank<T> {
        KeyRank::of(e.clone())
    }

    #[inline]
    fn measure_slice(es: &[T]) -> KeyRank<T> {
        KeyRank { count: es.len(), key: es.last().cloned() }
    }
}

/// Key-value pairs sorted by key.
pub struct Keyed<K, V>(PhantomData<fn() -> (K, V)>);

impl<K, V> Flavor for Keyed<K, V>
where
    K: Clone + fmt::Debug + PartialEq + 'static,
    V: Clone + 'static,
{
    type Elem = (K, V);
    type Measure = KeyRank<K>;

    #[inline]
    fn measure(e: &(K, V)) -> KeyRank<K> {
        KeyRank::of(e.0.clone())
    }

    #[inline]
    fn measure_slice(es: &[(K, V)]) -> KeyRank<K> {
        KeyRank { count: es.len(), key: es.last().map(|e| e.0.clone()) }
    }
}

/// UTF-8 bytes, measured in scalars and bytes.
pub struct Utf8;

#[inline]
pub(crate) fn is_char_start(b: u8) -> bool {
    b & 0xC0 != 0x80
}

/// Encoded length of a scalar from its lead byte.
#[inline]
pub(crate) fn utf8_width(lead: u8) -> usize {
    match lead {
        0x00..=0x7F => 1,
        0xC0..=0xDF => 2,
        0xE0..=0xEF => 3,
        _ => 4,
    }
}

impl Flavor for Utf8 {
    type Elem = u8;
    type Measure = Utf8Measure;

    #[inline]
    fn measure(b: &u8) -> Utf8Measure {
        Utf8Measure { code_points: is_char_start(*b) as usize, bytes: 1 }
    }

    fn measure_slice(es: &[u8]) -> Utf8Measure {
        Utf8Measure {
            code_points: es.iter().filter(|b| is_char_start(**b)).count(),
            bytes: es.len(),
        }
    }
}

/// Outcome of a predicate-guided scan over a row of measured parts.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitPoint<M> {
    /// The predicate first holds after part `index`; `before` is the
    /// accumulated measure of everything left of that part.
    Found { index: usize, before: M },
    /// The predicate never held; carries the total.
    NotFound(M),
}

/// Scans `parts` left to right, accumulating onto `acc`, and reports the
/// first part whose inclusion makes `pred` true. `pred` must be monotone.
pub fn split_point<M, I, P>(parts: I, acc: &M, pred: P) -> SplitPoint<M>
where
    M: Monoid,
    I: IntoIterator<Item = M>,
    P: Fn(&M) -> bool,
{
    let mut acc = acc.clone();
    for (index, m) in parts.into_iter().enumerate() {
        let next = acc.combine(&m);
        if pred(&next) {
            return SplitPoint::Found { index, before: acc };
        }
        acc = next;
    }
    SplitPoint::NotFound(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kr(count: usize, key: Option<i32>) -> KeyRank<i32> {
        KeyRank { count, key }
    }

    #[test]
    fn combine_examples() {
        assert_eq!(Size(3).combine(&Size(4)), Size(7));
        assert_eq!(kr(2, Some(5)).combine(&kr(1, Some(9))), kr(3, Some(9)));
        assert_eq!(kr(2, Some(5)).combine(&KeyRank::identity()), kr(2, Some(5)));
        let a = Utf8Measure { code_points: 2, bytes: 3 };
        let b = Utf8Measure { code_points: 1, bytes: 1 };
        assert_eq!(a.combine(&b), Utf8Measure { code_points: 3, bytes: 4 });
    }

    #[test]
    fn size_split_flips_inside_second_leaf() {
        // Leaves of sizes 2,2,2: "acc > 3" first holds in the second leaf.
        let leaves = [Size(2), Size(2), Size(2)];
        let at = split_point(leaves, &Size(0), |m| m.0 > 3);
        assert_eq!(at, SplitPoint::Found { index: 1, before: Size(2) });
        // Within that leaf, element by element from the accumulated 2.
        let at = split_point([Size(1), Size(1)], &Size(2), |m| m.0 > 3);
        assert_eq!(at, SplitPoint::Found { index: 1, before: Size(3) });
    }

    #[test]
    fn key_split_is_lower_bound() {
        let keys = [1, 4, 7, 9];
        let at = split_point(keys.iter().map(|k| KeyRank::of(*k)), &KeyRank::identity(), |m| {
            m.key.is_some_and(|k| k >= 7)
        });
        assert!(matches!(at, SplitPoint::Found { index: 2, .. }));
    }

    #[test]
    fn empty_never_flips() {
        let at = split_point(std::iter::empty::<Size>(), &Size(0), |m| m.0 > 0);
        assert_eq!(at, SplitPoint::NotFound(Size(0)));
    }

    #[test]
    fn utf8_slice_measure() {
        let m = Utf8::measure_slice("héllo".as_bytes());
        assert_eq!(m, Utf8Measure { code_points: 5, bytes: 6 });
        assert_eq!(utf8_width("é".as_bytes()[0]), 2);
        assert_eq!(utf8_width("€".as_bytes()[0]), 3);
        assert_eq!(utf8_width("😀".as_bytes()[0]), 4);
    }

    fn arb_kr() -> impl Strategy<Value = KeyRank<i32>> {
        prop_oneof![
            Just(KeyRank::identity()),
            (1usize..50, any::<i32>()).prop_map(|(c, k)| kr(c, Some(k))),
        ]
    }

    fn arb_utf8() -> impl Strategy<Value = Utf8Measure> {
        (0usize..100, 0usize..100).prop_map(|(a, b)| Utf8Measure { code_points: a.min(b), bytes: b })
    }

    proptest! {
        #[test]
        fn size_laws(a in 0usize..1 << 20, b in 0usize..1 << 20, c in 0usize..1 << 20) {
            let (a, b, c) = (Size(a), Size(b), Size(c));
            prop_assert_eq!(Size::identity().combine(&a), a);
            prop_assert_eq!(a.combine(&Size::identity()), a);
            prop_assert_eq!(a.combine(&b).combine(&c), a.combine(&b.combine(&c)));
        }

        #[test]
        fn key_rank_laws(a in arb_kr(), b in arb_kr(), c in arb_kr()) {
            prop_assert_eq!(KeyRank::identity().combine(&a), a.clone());
            prop_assert_eq!(a.combine(&KeyRank::identity()), a.clone());
            prop_assert_eq!(a.combine(&b).combine(&c), a.combine(&b.combine(&c)));
        }

        #[test]
        fn utf8_laws(a in arb_utf8(), b in arb_utf8(), c in arb_utf8()) {
            prop_assert_eq!(Utf8Measure::identity().combine(&a), a);
            prop_assert_eq!(a.combine(&Utf8Measure::identity()), a);
            prop_assert_eq!(a.combine(&b).combine(&c), a.combine(&b.combine(&c)));
            let ab = a.combine(&b);
            prop_assert!(ab.code_points <= ab.bytes);
        }

        #[test]
        fn split_agrees_with_linear_scan(sizes in prop::collection::vec(0usize..5, 0..40), t in 0usize..100) {
            let total: usize = sizes.iter().sum();
            let at = split_point(sizes.iter().map(|s| Size(*s)), &Size(0), |m| m.0 > t);
            let mut acc = 0;
            let mut expect = None;
            for (i, s) in sizes.iter().enumerate() {
                if acc + s > t {
                    expect = Some((i, acc));
                    break;
                }
                acc += s;
            }
            match expect {
                Some((index, before)) => prop_assert_eq!(at, SplitPoint::Found { index, before: Size(before) }),
                None => prop_assert_eq!(at, SplitPoint::NotFound(Size(total))),
            }
        }
    }
}
