//! Persistent iterators: zippers over a finger tree.
//!
//! A cursor is a reversed path of entries `(node, child index, dirty, parent)`
//! from the current leaf up to the root. Entries are reference counted and
//! shared between cursors, so copying a cursor is O(1) and moving one never
//! disturbs another. Edits replace the head entry with a dirty one; the
//! enclosing nodes are rebuilt only when the cursor later ascends past them
//! (or when `value` is called).

use std::cell::Cell;
use std::marker::PhantomData;
use std::ptr::{self, NonNull};

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::heap;
use crate::measure::{is_char_start, utf8_width, Flavor, Monoid, Utf8};
use crate::node::{Geometry, Kids, Kind, NodeRef};
use crate::pool::SLOT_SIZE;
use crate::tree::{deep_l, deep_r, push_back_node, push_front_node, tree_from_kids, FingerTree};

/// The unit a cursor steps over.
pub trait Grain<F: Flavor>: 'static {
    fn units(m: &F::Measure) -> usize;
    /// Element index where unit `u` of a leaf starts (`len` for one past the end).
    fn unit_index(elems: &[F::Elem], u: usize) -> usize;
    /// Units that start before element index `idx`.
    fn units_before(elems: &[F::Elem], idx: usize) -> usize;
    /// Elements making up the unit that starts at `idx`.
    fn width(elems: &[F::Elem], idx: usize) -> usize;
    /// Start of the unit preceding `idx`; `idx` must be positive.
    fn prev_index(elems: &[F::Elem], idx: usize) -> usize;
}

/// One element per step.
pub struct ByElem;

impl<F: Flavor> Grain<F> for ByElem {
    #[inline]
    fn units(m: &F::Measure) -> usize {
        m.count()
    }

    #[inline]
    fn unit_index(_: &[F::Elem], u: usize) -> usize {
        u
    }

    #[inline]
    fn units_before(_: &[F::Elem], idx: usize) -> usize {
        idx
    }

    #[inline]
    fn width(_: &[F::Elem], _: usize) -> usize {
        1
    }

    #[inline]
    fn prev_index(_: &[F::Elem], idx: usize) -> usize {
        idx - 1
    }
}

/// One Unicode scalar (1 to 4 bytes) per step.
pub struct ByChar;

impl Grain<Utf8> for ByChar {
    #[inline]
    fn units(m: &crate::Utf8Measure) -> usize {
        m.code_points
    }

    fn unit_index(elems: &[u8], u: usize) -> usize {
        let mut seen = 0;
        for (i, b) in elems.iter().enumerate() {
            if is_char_start(*b) {
                if seen == u {
                    return i;
                }
                seen += 1;
            }
        }
        elems.len()
    }

    fn units_before(elems: &[u8], idx: usize) -> usize {
        elems[..idx].iter().filter(|b| is_char_start(**b)).count()
    }

    #[inline]
    fn width(elems: &[u8], idx: usize) -> usize {
        utf8_width(elems[idx])
    }

    fn prev_index(elems: &[u8], idx: usize) -> usize {
        let mut i = idx - 1;
        while !is_char_start(elems[i]) {
            i -= 1;
        }
        i
    }
}

struct Entry<F: Flavor> {
    refs: Cell<u32>,
    dirty: bool,
    index: u32,
    node: NodeRef<F>,
    parent: Option<EntryRef<F>>,
}

const _: () = assert!(std::mem::size_of::<Entry<crate::measure::Seq<u64>>>() <= SLOT_SIZE);

struct EntryRef<F: Flavor> {
    ptr: NonNull<Entry<F>>,
}

impl<F: Flavor> EntryRef<F> {
    fn new(node: NodeRef<F>, index: usize, dirty: bool, parent: Option<EntryRef<F>>) -> Self {
        let p = heap::alloc_slot().cast::<Entry<F>>();
        // SAFETY: fresh slot, Entry fits (checked above; all fields are pointer sized or smaller).
        unsafe {
            p.as_ptr().write(Entry { refs: Cell::new(1), dirty, index: index as u32, node, parent });
        }
        EntryRef { ptr: p }
    }

    #[inline]
    fn get(&self) -> &Entry<F> {
        // SAFETY: an EntryRef keeps its slot alive.
        unsafe { self.ptr.as_ref() }
    }

    #[inline]
    fn is_unique(&self) -> bool {
        self.get().refs.get() == 1
    }

    #[inline]
    fn make_mut(&mut self) -> &mut Entry<F> {
        if !(self.is_unique() && heap::destructive_updates()) {
            let e = self.get();
            *self = EntryRef::new(e.node.clone(), e.index as usize, e.dirty, e.parent.clone());
        }
        // SAFETY: unique owner.
        unsafe { self.ptr.as_mut() }
    }

    fn into_parts(self) -> (NodeRef<F>, usize, bool, Option<EntryRef<F>>) {
        if self.is_unique() {
            let p = self.ptr;
            std::mem::forget(self);
            // SAFETY: last reference; fields are moved out once and the slot released.
            unsafe {
                let e = p.as_ptr().read();
                heap::free_slot(p.cast());
                (e.node, e.index as usize, e.dirty, e.parent)
            }
        } else {
            let e = self.get();
            (e.node.clone(), e.index as usize, e.dirty, e.parent.clone())
        }
    }

    fn addr(&self) -> usize {
        self.ptr.as_ptr() as usize
    }
}

impl<F: Flavor> Clone for EntryRef<F> {
    #[inline]
    fn clone(&self) -> Self {
        let r = self.get().refs.get();
        assert!(r < u32::MAX, "entry reference count overflow");
        self.get().refs.set(r + 1);
        EntryRef { ptr: self.ptr }
    }
}

impl<F: Flavor> Drop for EntryRef<F> {
    fn drop(&mut self) {
        let r = self.get().refs.get();
        if r > 1 {
            self.get().refs.set(r - 1);
            return;
        }
        // SAFETY: last reference.
        unsafe {
            ptr::drop_in_place(self.ptr.as_ptr());
            heap::free_slot(self.ptr.cast());
        }
    }
}

/// Result of editing a subtree, reported to its parent.
enum Repl<F: Flavor> {
    One(NodeRef<F>),
    Two(NodeRef<F>, NodeRef<F>),
    /// The subtree vanished.
    Zero,
    /// A branch shrank to one child; carries that child (one level lower).
    Deficient(NodeRef<F>),
    FingerOverflow(ArrayVec<NodeRef<F>, 5>),
    FingerEmpty,
    FingerDeficient(NodeRef<F>),
}

type Row<F> = ArrayVec<NodeRef<F>, 5>;

fn row_of<F: Flavor>(node: NodeRef<F>) -> Row<F> {
    node.into_kids().into_iter().collect()
}

/// Merges deficient `c` in front of the children of `x`.
fn join_left<F: Flavor>(c: NodeRef<F>, x: NodeRef<F>) -> Kids<F> {
    let mut k = x.into_kids();
    let mut out = Kids::new();
    if k.len() == 3 {
        let rest: Kids<F> = k.drain(1..).collect();
        out.push(NodeRef::branch([c, k.pop().unwrap()]));
        out.push(NodeRef::branch(rest));
    } else {
        k.insert(0, c);
        out.push(NodeRef::branch(k));
    }
    out
}

/// Merges deficient `c` after the children of `x`.
fn join_right<F: Flavor>(x: NodeRef<F>, c: NodeRef<F>) -> Kids<F> {
    let mut k = x.into_kids();
    let mut out = Kids::new();
    if k.len() == 3 {
        let last = k.pop().unwrap();
        out.push(NodeRef::branch(k));
        out.push(NodeRef::branch([last, c]));
    } else {
        k.push(c);
        out.push(NodeRef::branch(k));
    }
    out
}

/// Places deficient `c` (which sat at position `i`) into a sibling: borrow
/// from a three-child sibling if possible, else merge; left sibling first.
fn fix_deficient<F: Flavor>(row: &mut Row<F>, i: usize, c: NodeRef<F>) {
    let right_rich = i < row.len() && row[i].len() == 3;
    let use_left = i > 0 && (row[i - 1].len() == 3 || !right_rich);
    if use_left {
        let l = row.remove(i - 1);
        for (k, n) in join_right(l, c).into_iter().enumerate() {
            row.insert(i - 1 + k, n);
        }
    } else {
        let r = row.remove(i);
        for (k, n) in join_left(c, r).into_iter().enumerate() {
            row.insert(i + k, n);
        }
    }
}

fn resolve<F: Flavor>(node: NodeRef<F>, i: usize, repl: Repl<F>) -> Repl<F> {
    match node.kind() {
        Kind::Branch => {
            let mut row = row_of(node);
            drop(row.remove(i));
            match repl {
                Repl::Two(a, b) => {
                    row.insert(i, b);
                    row.insert(i, a);
                }
                Repl::Zero => {}
                Repl::Deficient(c) => fix_deficient(&mut row, i, c),
                _ => unreachable!("finger result under a branch"),
            }
            match row.len() {
                1 => Repl::Deficient(row.pop().unwrap()),
                2 | 3 => Repl::One(NodeRef::branch(row)),
                _ => {
                    let right: Kids<F> = row.drain(2..).collect();
                    Repl::Two(NodeRef::branch(row), NodeRef::branch(right))
                }
            }
        }
        Kind::Finger => {
            let mut row = row_of(node);
            drop(row.remove(i));
            match repl {
                Repl::Two(a, b) => {
                    row.insert(i, b);
                    row.insert(i, a);
                    if row.len() == 5 {
                        return Repl::FingerOverflow(row);
                    }
                }
                Repl::Zero if row.is_empty() => return Repl::FingerEmpty,
                Repl::Zero => {}
                Repl::Deficient(c) if row.is_empty() => return Repl::FingerDeficient(c),
                Repl::Deficient(c) => fix_deficient(&mut row, i, c),
                _ => unreachable!("finger result under a finger"),
            }
            Repl::One(NodeRef::finger(row))
        }
        Kind::Deep => {
            let (l, mut s, r) = node.into_deep();
            let root = match (i, repl) {
                (0, Repl::FingerOverflow(mut d)) => {
                    let rest: Kids<F> = d.drain(2..).collect();
                    push_front_node(&mut s, NodeRef::branch(rest));
                    NodeRef::deep(NodeRef::finger(d), s, r)
                }
                (2, Repl::FingerOverflow(mut d)) => {
                    let last: Kids<F> = d.drain(3..).collect();
                    push_back_node(&mut s, NodeRef::branch(d));
                    NodeRef::deep(l, s, NodeRef::finger(last))
                }
                (0, Repl::FingerEmpty) => {
                    drop(l);
                    deep_l(Kids::new(), s, r)
                }
                (2, Repl::FingerEmpty) => {
                    drop(r);
                    deep_r(l, s, Kids::new())
                }
                (0, Repl::FingerDeficient(c)) => {
                    drop(l);
                    if let Some(b) = crate::tree::pop_front_node(&mut s) {
                        let mut kids = b.into_kids();
                        let first = kids.remove(0);
                        let mut digits = join_left(c, first);
                        digits.extend(kids);
                        NodeRef::deep(NodeRef::finger(digits), s, r)
                    } else {
                        let mut rk = r.into_kids();
                        let first = rk.remove(0);
                        let fixed = join_left(c, first);
                        if rk.is_empty() {
                            tree_from_kids(fixed).unwrap()
                        } else {
                            NodeRef::deep(NodeRef::finger(fixed), None, NodeRef::finger(rk))
                        }
                    }
                }
                (2, Repl::FingerDeficient(c)) => {
                    drop(r);
                    if let Some(b) = crate::tree::pop_back_node(&mut s) {
                        let mut kids = b.into_kids();
                        let last = kids.pop().unwrap();
                        let fixed = join_right(last, c);
                        kids.extend(fixed);
                        NodeRef::deep(l, s, NodeRef::finger(kids))
                    } else {
                        let mut lk = l.into_kids();
                        let last = lk.pop().unwrap();
                        let fixed = join_right(last, c);
                        if lk.is_empty() {
                            tree_from_kids(fixed).unwrap()
                        } else {
                            NodeRef::deep(NodeRef::finger(lk), None, NodeRef::finger(fixed))
                        }
                    }
                }
                (1, Repl::Two(a, b)) => {
                    drop(s);
                    let spine = NodeRef::deep(NodeRef::finger([a]), None, NodeRef::finger([b]));
                    NodeRef::deep(l, Some(spine), r)
                }
                (1, Repl::Deficient(c)) => {
                    drop(s);
                    if l.len() < 4 {
                        let mut k = l.into_kids();
                        k.push(c);
                        NodeRef::deep(NodeRef::finger(k), None, r)
                    } else if r.len() < 4 {
                        let mut k = r.into_kids();
                        k.insert(0, c);
                        NodeRef::deep(l, None, NodeRef::finger(k))
                    } else {
                        let mut k = l.into_kids();
                        let tail: Kids<F> = k.drain(2..).collect();
                        let b = NodeRef::branch(tail.into_iter().chain([c]));
                        NodeRef::deep(NodeRef::finger(k), Some(b), r)
                    }
                }
                _ => unreachable!("unexpected result under a deep node"),
            };
            Repl::One(root)
        }
        Kind::Leaf => unreachable!("leaves have no children"),
    }
}

/// Units covered by the children of `node` before child `i`.
fn prefix_units<F: Flavor, G: Grain<F>>(node: &NodeRef<F>, i: usize) -> usize {
    node.slots()[..i].iter().flatten().map(|c| G::units(c.measure())).sum()
}

/// Child index holding unit `t` of `node`, and `t` relative to that child.
/// `t` equal to the node's unit count lands one past the last child's end.
fn locate<F: Flavor, G: Grain<F>>(node: &NodeRef<F>, t: usize) -> (usize, usize) {
    if node.kind() == Kind::Leaf {
        return (G::unit_index(node.elems(), t), 0);
    }
    let mut acc = 0;
    let mut last = (0, 0);
    for (i, c) in node.slots().iter().enumerate() {
        let Some(c) = c else { continue };
        let u = G::units(c.measure());
        if t < acc + u {
            return (i, t - acc);
        }
        last = (i, t - acc);
        acc += u;
    }
    last
}

/// End-of-sequence token: compares equal to any cursor at its own end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct End;

/// A persistent cursor over a [`FingerTree`].
pub struct Cursor<F: Flavor, G: Grain<F> = ByElem> {
    head: Option<EntryRef<F>>,
    pos: usize,
    size: usize,
    lineage: usize,
    _grain: PhantomData<fn() -> G>,
}

impl<F: Flavor, G: Grain<F>> Clone for Cursor<F, G> {
    fn clone(&self) -> Self {
        Cursor { head: self.head.clone(), pos: self.pos, size: self.size, lineage: self.lineage, _grain: PhantomData }
    }
}

impl<F: Flavor, G: Grain<F>> Cursor<F, G> {
    /// Cursor at unit position `p` (clamped to the end).
    pub fn new(tree: &FingerTree<F>, p: usize) -> Self {
        let size = G::units(&tree.measure());
        let p = p.min(size);
        let mut c = Cursor {
            head: tree.root.clone().map(|r| EntryRef::new(r, 0, false, None)),
            pos: p,
            size,
            lineage: tree.root_id(),
            _grain: PhantomData,
        };
        if c.head.is_some() {
            c.seek_rel(p as isize, p == size);
        }
        c
    }

    pub fn begin(tree: &FingerTree<F>) -> Self {
        Self::new(tree, 0)
    }

    pub fn end(tree: &FingerTree<F>) -> Self {
        Self::new(tree, usize::MAX)
    }

    /// Cursor at the first element where `pred` over the accumulated prefix
    /// measure holds, built with a fresh path.
    pub fn find(tree: &FingerTree<F>, pred: impl Fn(&F::Measure) -> bool) -> Option<Self> {
        let root = tree.root.as_ref()?;
        let mut acc = F::Measure::identity();
        if pred(&acc) || !pred(root.measure()) {
            return None;
        }
        let mut node = root.clone();
        let mut parent: Option<EntryRef<F>> = None;
        loop {
            if node.kind() == Kind::Leaf {
                let mut j = node.len() - 1;
                for (i, e) in node.elems().iter().enumerate() {
                    let next = acc.combine(&F::measure(e));
                    if pred(&next) {
                        j = i;
                        break;
                    }
                    acc = next;
                }
                let pos = G::units(&acc);
                let size = G::units(root.measure());
                return Some(Cursor {
                    head: Some(EntryRef::new(node, j, false, parent)),
                    pos,
                    size,
                    lineage: tree.root_id(),
                    _grain: PhantomData,
                });
            }
            let mut pick = None;
            for (i, c) in node.slots().iter().enumerate() {
                let Some(c) = c else { continue };
                let next = acc.combine(c.measure());
                if pred(&next) {
                    pick = Some((i, c.clone()));
                    break;
                }
                acc = next;
            }
            let (i, child) = pick?;
            parent = Some(EntryRef::new(node, i, false, parent));
            node = child;
        }
    }

    /// Logical position, in units.
    pub fn pos(&self) -> usize {
        self.pos
    }

    /// Size of the cursor's own version, in units.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_end(&self) -> bool {
        self.pos == self.size
    }

    /// The first element of the current unit, or `None` at the end.
    #[inline]
    pub fn get(&self) -> Option<&F::Elem> {
        if self.pos == self.size {
            return None;
        }
        let e = self.head.as_ref()?.get();
        e.node.elems().get(e.index as usize)
    }

    /// All elements of the current unit.
    pub fn unit(&self) -> Option<&[F::Elem]> {
        if self.pos == self.size {
            return None;
        }
        let e = self.head.as_ref()?.get();
        let elems = e.node.elems();
        let i = e.index as usize;
        Some(&elems[i..i + G::width(elems, i)])
    }

    #[inline]
    fn set_index(&mut self, idx: usize) {
        let h = self.head.as_mut().unwrap();
        if h.get().index as usize != idx {
            h.make_mut().index = idx as u32;
        }
    }

    /// Moves the head to its parent, folding a dirty head into (a copy of) the parent node.
    fn ascend(&mut self) {
        let head = self.head.take().unwrap();
        let (node, _, dirty, parent) = head.into_parts();
        let mut parent = parent.expect("ascend past the root");
        if dirty {
            let e = parent.make_mut();
            let i = e.index as usize;
            e.node.make_mut().slots_mut()[i] = Some(node);
            e.dirty = true;
        }
        self.head = Some(parent);
    }

    fn descend(&mut self, t: usize) {
        let (idx, mut rel) = locate::<F, G>(&self.head.as_ref().unwrap().get().node, t);
        self.set_index(idx);
        let head = self.head.take().unwrap();
        if head.get().node.kind() == Kind::Leaf {
            self.head = Some(head);
            return;
        }
        let mut node = head.get().node.child(idx).clone();
        let mut path = head;
        loop {
            let (i, r) = locate::<F, G>(&node, rel);
            let next = (node.kind() != Kind::Leaf).then(|| node.child(i).clone());
            path = EntryRef::new(node, i, false, Some(path));
            match next {
                None => break,
                Some(n) => {
                    node = n;
                    rel = r;
                }
            }
        }
        self.head = Some(path);
    }

    /// Repositions to unit `t` relative to the start of the head's subtree:
    /// ascend until the subtree covers `t`, then descend.
    fn seek_rel(&mut self, mut t: isize, end: bool) {
        loop {
            let e = self.head.as_ref().unwrap().get();
            let u = G::units(e.node.measure()) as isize;
            if (0 <= t && t < u) || (end && t == u) || e.parent.is_none() {
                break;
            }
            self.ascend();
            let e = self.head.as_ref().unwrap().get();
            t += prefix_units::<F, G>(&e.node, e.index as usize) as isize;
        }
        debug_assert!(t >= 0);
        self.descend(t as usize);
    }

    fn leaf_offset(&self) -> usize {
        let e = self.head.as_ref().unwrap().get();
        G::units_before(e.node.elems(), e.index as usize)
    }

    /// Moves to absolute position `p` (`0..=size`).
    pub fn seek_to(&mut self, p: usize) -> Result<()> {
        if p > self.size {
            return Err(Error::OutOfRange { index: p, len: self.size });
        }
        if self.head.is_none() || p == self.pos {
            return Ok(());
        }
        let t = self.leaf_offset() as isize + p as isize - self.pos as isize;
        self.seek_rel(t, p == self.size);
        self.pos = p;
        Ok(())
    }

    /// Moves by `n` units (`it += n`).
    pub fn seek(&mut self, n: isize) -> Result<()> {
        let target = self.pos as isize + n;
        if target < 0 || target > self.size as isize {
            return Err(Error::OutOfRange { index: target.max(0) as usize, len: self.size });
        }
        self.seek_to(target as usize)
    }

    /// `++it`
    pub fn advance(&mut self) -> Result<()> {
        if self.pos >= self.size {
            return Err(Error::AtEnd);
        }
        let e = self.head.as_ref().unwrap().get();
        let idx = e.index as usize;
        let next = idx + G::width(e.node.elems(), idx);
        if next < e.node.len() || self.pos + 1 == self.size {
            self.set_index(next);
            self.pos += 1;
            Ok(())
        } else {
            self.seek_to(self.pos + 1)
        }
    }

    /// `--it`
    pub fn retreat(&mut self) -> Result<()> {
        if self.pos == 0 {
            return Err(Error::AtBegin);
        }
        let e = self.head.as_ref().unwrap().get();
        let idx = e.index as usize;
        if idx > 0 {
            let prev = G::prev_index(e.node.elems(), idx);
            self.set_index(prev);
            self.pos -= 1;
            Ok(())
        } else {
            self.seek_to(self.pos - 1)
        }
    }

    /// Replaces the current unit with `x` (an encoded unit). Stays in place.
    pub fn assign(&mut self, x: &[F::Elem]) -> Result<()> {
        if self.pos == self.size {
            return Err(Error::AtEnd);
        }
        self.edit(true, x)
    }

    /// Inserts `x` before the current position; the cursor ends up just after it.
    pub fn insert(&mut self, x: &[F::Elem]) -> Result<()> {
        self.edit(false, x)
    }

    /// Removes the current unit; the cursor ends up on its successor.
    pub fn erase(&mut self) -> Result<()> {
        if self.pos == self.size {
            return Err(Error::AtEnd);
        }
        self.edit(true, &[])
    }

    fn edit(&mut self, remove: bool, insert: &[F::Elem]) -> Result<()> {
        let cap = Geometry::<F>::LEAF_CAP;
        let advance = !remove && !insert.is_empty();
        if let Some(h) = self.head.as_mut() {
            // In-place path: a private head whose leaf absorbs the edit.
            let e = h.get();
            let idx = e.index as usize;
            let rm = if remove { G::width(e.node.elems(), idx) } else { 0 };
            let new_len = e.node.len() - rm + insert.len();
            let next = idx + if advance { insert.len() } else { 0 };
            let pos = self.pos + advance as usize;
            let size = self.size - remove as usize + !insert.is_empty() as usize;
            if h.is_unique() && heap::destructive_updates() && (1..=cap).contains(&new_len) && (next < new_len || pos == size) {
                let e = h.make_mut();
                e.node.make_mut().splice(idx, rm, insert);
                e.index = next as u32;
                e.dirty = true;
                self.pos = pos;
                self.size = size;
                return Ok(());
            }
        }
        let Some(head) = self.head.take() else {
            if insert.is_empty() {
                return Ok(());
            }
            let leaf = NodeRef::leaf(insert);
            self.head = Some(EntryRef::new(leaf, insert.len(), true, None));
            self.size = 1;
            self.pos = 1;
            return Ok(());
        };
        let (mut leaf, idx, _, parent) = head.into_parts();
        let rm = if remove { G::width(leaf.elems(), idx) } else { 0 };
        let off = G::units_before(leaf.elems(), idx);
        let new_len = leaf.len() - rm + insert.len();
        if remove {
            self.size -= 1;
        }
        if !insert.is_empty() {
            self.size += 1;
        }
        if advance {
            self.pos += 1;
        }
        let target = off + advance as usize;

        let repl = if new_len == 0 {
            drop(leaf);
            Repl::Zero
        } else if new_len <= cap {
            leaf.make_mut().splice(idx, rm, insert);
            let next = idx + if advance { insert.len() } else { 0 };
            if next < leaf.len() || self.pos == self.size {
                self.head = Some(EntryRef::new(leaf, next, true, parent));
                return Ok(());
            }
            Repl::One(leaf)
        } else if rm == 0 && idx == leaf.len() {
            Repl::Two(leaf, NodeRef::leaf(insert))
        } else if rm == 0 && idx == 0 {
            Repl::Two(NodeRef::leaf(insert), leaf)
        } else {
            let old = leaf.elems();
            let mut all: Vec<F::Elem> = Vec::with_capacity(new_len);
            all.extend_from_slice(&old[..idx]);
            all.extend_from_slice(insert);
            all.extend_from_slice(&old[idx + rm..]);
            let mut mid = new_len / 2;
            while G::units_before(&all, mid) == G::units_before(&all, mid + 1) && mid + 1 < new_len {
                // Not a unit boundary yet.
                mid += 1;
            }
            Repl::Two(NodeRef::leaf(&all[..mid]), NodeRef::leaf(&all[mid..]))
        };
        self.unwind(parent, repl, target);
        Ok(())
    }

    fn unwind(&mut self, mut parent: Option<EntryRef<F>>, mut repl: Repl<F>, mut t: usize) {
        loop {
            if let Repl::One(n) = repl {
                self.head = Some(EntryRef::new(n, 0, true, parent));
                break;
            }
            let Some(p) = parent.take() else {
                match repl {
                    Repl::Two(a, b) => {
                        let root = NodeRef::deep(NodeRef::finger([a]), None, NodeRef::finger([b]));
                        self.head = Some(EntryRef::new(root, 0, true, None));
                        break;
                    }
                    Repl::Zero => {
                        self.head = None;
                        self.pos = 0;
                        self.size = 0;
                        return;
                    }
                    _ => unreachable!("unbalanced root"),
                }
            };
            let (pnode, pidx, _, pparent) = p.into_parts();
            t += prefix_units::<F, G>(&pnode, pidx);
            repl = resolve(pnode, pidx, repl);
            parent = pparent;
        }
        let end = self.pos == self.size;
        self.seek_rel(t as isize, end);
    }

    /// The cursor's current version as a tree. Pure: the cursor is unchanged.
    pub fn value(&self) -> FingerTree<F> {
        let Some(head) = &self.head else { return FingerTree::new() };
        let mut e = head.get();
        let mut node = e.node.clone();
        let mut dirty = e.dirty;
        while let Some(p) = &e.parent {
            let pe = p.get();
            if dirty {
                let mut pn = pe.node.clone();
                pn.make_mut().slots_mut()[pe.index as usize] = Some(node);
                node = pn;
            } else {
                node = pe.node.clone();
                dirty = pe.dirty;
            }
            e = pe;
        }
        FingerTree::from_root(Some(node))
    }

    /// Like [`value`](Self::value) but consumes the cursor, reusing its path.
    pub fn into_value(mut self) -> FingerTree<F> {
        let Some(_) = &self.head else { return FingerTree::new() };
        while self.head.as_ref().unwrap().get().parent.is_some() {
            self.ascend();
        }
        let (node, ..) = self.head.take().unwrap().into_parts();
        FingerTree::from_root(Some(node))
    }

    /// Number of entries on the path (debug aid).
    pub fn depth(&self) -> usize {
        let mut n = 0;
        let mut e = self.head.as_ref();
        while let Some(x) = e {
            n += 1;
            e = x.get().parent.as_ref();
        }
        n
    }

    /// Identities of the path entries from head to root (debug aid for sharing checks).
    pub fn path_ids(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut e = self.head.as_ref();
        while let Some(x) = e {
            out.push(x.addr());
            e = x.get().parent.as_ref();
        }
        out
    }
}

impl<F: Flavor, G: Grain<F>> PartialEq for Cursor<F, G> {
    fn eq(&self, other: &Self) -> bool {
        debug_assert_eq!(self.lineage, other.lineage, "comparing cursors from unrelated containers");
        self.pos == other.pos
    }
}

impl<F: Flavor, G: Grain<F>> PartialEq<End> for Cursor<F, G> {
    fn eq(&self, _: &End) -> bool {
        self.pos == self.size
    }
}

impl<F: Flavor, G: Grain<F>> PartialEq<Cursor<F, G>> for End {
    fn eq(&self, c: &Cursor<F, G>) -> bool {
        c == self
    }
}

impl<F: Flavor, G: Grain<F>> std::fmt::Debug for Cursor<F, G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cursor").field("pos", &self.pos).field("size", &self.size).finish()
    }
}
