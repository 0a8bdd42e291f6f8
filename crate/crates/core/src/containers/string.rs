use std::fmt;
use std::ops::AddAssign;

use crate::containers::Vector;
use crate::error::{Error, Result};
use crate::measure::Utf8;
use crate::node::Geometry;
use crate::tree::{FingerTree, Iter};
use crate::zipper::{ByChar, Cursor, End};

/// Persistent UTF-8 string indexed by Unicode scalar.
///
/// Leaves hold whole scalars only, so a leaf is always valid UTF-8 on its own.
#[derive(Clone, Default)]
pub struct Utf8String {
    tree: FingerTree<Utf8>,
}

fn encode(c: char) -> ([u8; 4], usize) {
    let mut buf = [0u8; 4];
    let n = c.encode_utf8(&mut buf).len();
    (buf, n)
}

impl Utf8String {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates `bytes`; the error carries the offset of the first bad byte.
    pub fn from_utf8(bytes: &[u8]) -> Result<Self> {
        let s = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 { offset: e.valid_up_to() })?;
        Ok(Self::from(s))
    }

    /// Number of scalars.
    pub fn size(&self) -> usize {
        self.tree.measure().code_points
    }

    pub fn len(&self) -> usize {
        self.size()
    }

    pub fn byte_size(&self) -> usize {
        self.tree.measure().bytes
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Scalar at code-point index `idx`.
    pub fn get(&self, idx: usize) -> Option<char> {
        let (leaf, j) = self.tree.leaf_where(&|m: &crate::Utf8Measure| m.code_points > idx)?;
        let w = crate::measure::utf8_width(leaf[j]);
        std::str::from_utf8(&leaf[j..j + w]).ok()?.chars().next()
    }

    pub fn at(&self, idx: usize) -> Result<char> {
        self.get(idx).ok_or(Error::OutOfRange { index: idx, len: self.size() })
    }

    /// `s += c`
    pub fn push(&mut self, c: char) {
        let (buf, n) = encode(c);
        self.tree.push_back_run(&buf[..n]);
    }

    pub fn push_front(&mut self, c: char) {
        let (buf, n) = encode(c);
        self.tree.push_front_run(&buf[..n]);
    }

    pub fn push_str(&mut self, s: &str) {
        self.append(&Utf8String::from(s));
    }

    /// `s += t`, sharing both operands' nodes.
    pub fn append(&mut self, other: &Utf8String) {
        self.tree.append(other.tree.clone());
    }

    pub fn pop(&mut self) -> Option<char> {
        let idx = self.size().checked_sub(1)?;
        let c = self.get(idx)?;
        for _ in 0..c.len_utf8() {
            self.tree.pop_back();
        }
        Some(c)
    }

    /// Suffix starting at code point `idx`.
    pub fn substr(&self, idx: usize) -> Result<Utf8String> {
        if idx > self.size() {
            return Err(Error::OutOfRange { index: idx, len: self.size() });
        }
        let mut t = self.tree.clone();
        Ok(Utf8String { tree: t.split_off_where(|m| m.code_points > idx) })
    }

    /// Code points `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Utf8String> {
        if start > end || end > self.size() {
            return Err(Error::OutOfRange { index: end.max(start), len: self.size() });
        }
        let mut t = self.tree.clone();
        let mut rest = t.split_off_where(|m| m.code_points > start);
        rest.split_off_where(|m| m.code_points > end - start);
        Ok(Utf8String { tree: rest })
    }

    pub fn concat(&self, other: &Utf8String) -> Utf8String {
        Utf8String { tree: self.tree.concat(&other.tree) }
    }

    pub fn with_push(&self, c: char) -> Utf8String {
        let mut s = self.clone();
        s.push(c);
        s
    }

    pub fn with_push_front(&self, c: char) -> Utf8String {
        let mut s = self.clone();
        s.push_front(c);
        s
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.tree.flatten()
    }

    pub fn chars(&self) -> Chars<'_> {
        Chars { bytes: self.tree.iter() }
    }

    pub fn begin(&self) -> StrIter {
        StrIter { cur: Cursor::begin(&self.tree) }
    }

    pub fn end(&self) -> End {
        End
    }

    pub fn iter_at(&self, idx: usize) -> StrIter {
        StrIter { cur: Cursor::new(&self.tree, idx) }
    }

    /// The bytes as a vector, sharing every node.
    pub fn as_byte_vector(&self) -> Vector<u8, Utf8> {
        Vector::from_tree(self.tree.clone())
    }

    pub fn tree(&self) -> &FingerTree<Utf8> {
        &self.tree
    }

    /// Structural check plus per-leaf UTF-8 validity.
    pub fn check(&self) -> std::result::Result<(), String> {
        self.tree.check()?;
        let mut bad = None;
        let mut off = 0;
        self.tree.for_each_leaf(|leaf| {
            if bad.is_none() {
                if let Err(e) = std::str::from_utf8(leaf) {
                    bad = Some(off + e.valid_up_to());
                }
            }
            off += leaf.len();
        });
        match bad {
            Some(at) => Err(format!("leaf splits a scalar near byte {at}")),
            None => Ok(()),
        }
    }

    pub fn audit(&self) -> bool {
        self.check().is_ok()
    }

    pub fn dump(&self) -> String {
        self.tree.dump()
    }
}

impl From<&str> for Utf8String {
    fn from(s: &str) -> Self {
        let cap = Geometry::<Utf8>::LEAF_CAP;
        let mut tree = FingerTree::new();
        let mut rest = s;
        while !rest.is_empty() {
            let mut n = rest.len().min(cap);
            while !rest.is_char_boundary(n) {
                n -= 1;
            }
            tree.push_back_run(&rest.as_bytes()[..n]);
            rest = &rest[n..];
        }
        Utf8String { tree }
    }
}

impl std::str::FromStr for Utf8String {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Utf8String::from(s))
    }
}

impl AddAssign<char> for Utf8String {
    fn add_assign(&mut self, c: char) {
        self.push(c);
    }
}

impl AddAssign<&Utf8String> for Utf8String {
    fn add_assign(&mut self, t: &Utf8String) {
        self.append(t);
    }
}

impl AddAssign<&str> for Utf8String {
    fn add_assign(&mut self, t: &str) {
        self.push_str(t);
    }
}

impl PartialEq for Utf8String {
    fn eq(&self, other: &Self) -> bool {
        self.byte_size() == other.byte_size() && self.tree.iter().eq(other.tree.iter())
    }
}

impl Eq for Utf8String {}

impl PartialEq<str> for Utf8String {
    fn eq(&self, other: &str) -> bool {
        self.byte_size() == other.len() && self.tree.iter().eq(other.as_bytes())
    }
}

impl PartialEq<&str> for Utf8String {
    fn eq(&self, other: &&str) -> bool {
        self == *other
    }
}

impl fmt::Display for Utf8String {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = Ok(());
        self.tree.for_each_leaf(|leaf| {
            if out.is_ok() {
                out = f.write_str(std::str::from_utf8(leaf).expect("leaves hold whole scalars"));
            }
        });
        out
    }
}

impl fmt::Debug for Utf8String {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.to_string(), f)
    }
}

impl FromIterator<char> for Utf8String {
    fn from_iter<I: IntoIterator<Item = char>>(iter: I) -> Self {
        let mut s = Utf8String::new();
        for c in iter {
            s.push(c);
        }
        s
    }
}

/// Scalars of a [`Utf8String`].
pub struct Chars<'a> {
    bytes: Iter<'a, Utf8>,
}

impl Iterator for Chars<'_> {
    type Item = char;

    fn next(&mut self) -> Option<char> {
        let lead = *self.bytes.next()?;
        let w = crate::measure::utf8_width(lead);
        let mut cp = match w {
            1 => return Some(lead as char),
            2 => (lead & 0x1F) as u32,
            3 => (lead & 0x0F) as u32,
            _ => (lead & 0x07) as u32,
        };
        for _ in 1..w {
            cp = (cp << 6) | (*self.bytes.next()? & 0x3F) as u32;
        }
        char::from_u32(cp)
    }
}

/// Persistent iterator over scalars.
#[derive(Clone)]
pub struct StrIter {
    cur: Cursor<Utf8, ByChar>,
}

impl StrIter {
    pub fn get(&self) -> Option<char> {
        std::str::from_utf8(self.cur.unit()?).ok()?.chars().next()
    }

    /// Code-point position.
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

    pub fn seek_to(&mut self, pos: usize) -> Result<()> {
        self.cur.seek_to(pos)
    }

    pub fn insert(&mut self, c: char) -> Result<()> {
        let (buf, n) = encode(c);
        self.cur.insert(&buf[..n])
    }

    pub fn assign(&mut self, c: char) -> Result<()> {
        let (buf, n) = encode(c);
        self.cur.assign(&buf[..n])
    }

    pub fn erase(&mut self) -> Result<()> {
        self.cur.erase()
    }

    pub fn value(&self) -> Utf8String {
        Utf8String { tree: self.cur.value() }
    }

    pub fn into_value(self) -> Utf8String {
        Utf8String { tree: self.cur.into_value() }
    }
}

impl PartialEq for StrIter {
    fn eq(&self, other: &Self) -> bool {
        self.cur == other.cur
    }
}

impl PartialEq<End> for StrIter {
    fn eq(&self, _: &End) -> bool {
        self.cur.is_end()
    }
}

impl fmt::Debug for StrIter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cur.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap;

    #[test]
    fn sizes() {
        let s = Utf8String::from("héllo");
        assert_eq!((s.size(), s.byte_size()), (5, 6));
        assert_eq!(s.as_byte_vector().len(), 6);
        assert_eq!(s.get(1), Some('é'));
        assert_eq!(s.at(5), Err(Error::OutOfRange { index: 5, len: 5 }));
    }

    #[test]
    fn substr_shares_structure() {
        let s = Utf8String::from("hello world");
        let t = s.substr(6).unwrap();
        assert_eq!(t, "world");
        assert_eq!(s, "hello world");
        let long = Utf8String::from("ab€".repeat(400).as_str());
        let before = heap::allocations();
        let tail = long.substr(600).unwrap();
        assert!(heap::allocations() - before < 60);
        assert_eq!(tail.to_string(), "ab€".repeat(200));
        tail.check().unwrap();
    }

    #[test]
    fn appending_nothing_allocates_nothing() {
        let mut s = Utf8String::from("abc");
        let before = heap::allocations();
        s += &Utf8String::new();
        assert_eq!(heap::allocations(), before);
        assert_eq!(s, "abc");
    }

    #[test]
    fn invalid_input_reports_offset() {
        assert_eq!(Utf8String::from_utf8(b"ab\xffc").err(), Some(Error::InvalidUtf8 { offset: 2 }));
        assert_eq!(Utf8String::from_utf8(b"\xe2\x82").err(), Some(Error::InvalidUtf8 { offset: 0 }));
    }

    #[test]
    fn pushes_keep_scalars_whole() {
        let mut s = Utf8String::new();
        let mut want = String::new();
        for i in 0..500u32 {
            let c = ['a', 'é', '€', '😀'][(i % 4) as usize];
            if i % 3 == 0 {
                s.push_front(c);
                want.insert(0, c);
            } else {
                s += c;
                want.push(c);
            }
        }
        s.check().unwrap();
        assert_eq!(s.to_string(), want);
        assert_eq!(s.chars().collect::<String>(), want);
        assert_eq!(s.to_bytes(), want.as_bytes());
    }

    #[test]
    fn iterator_editing() {
        let s = Utf8String::from("a€c");
        let mut it = s.begin();
        it.advance().unwrap();
        assert_eq!(it.get(), Some('€'));
        it.erase().unwrap();
        it.insert('ß').unwrap();
        assert_eq!(it.get(), Some('c'));
        let t = it.value();
        assert_eq!(t, "aßc");
        assert_eq!(s, "a€c");
        t.check().unwrap();
    }

    #[test]
    fn slices() {
        let s = Utf8String::from("0123456789");
        assert_eq!(s.slice(2, 5).unwrap(), "234");
        assert_eq!(s.slice(4, 4).unwrap(), "");
        assert!(s.slice(5, 11).is_err());
        assert_eq!(s.clone().pop(), Some('9'));
    }
}
