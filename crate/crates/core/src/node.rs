//! Reference-counted tree nodes, each living in one 64-byte heap slot.
//!
//! A node is a small header (reference count, kind, length, cached measure)
//! followed by a payload: either up to `leaf_capacity` elements, or up to four
//! child slots. Deep nodes always have three child slots: prefix finger,
//! optional spine, suffix finger.

use std::cell::Cell;
use std::marker::PhantomData;
use std::mem::{align_of, size_of};
use std::ptr::{self, NonNull};
use std::slice;

use arrayvec::ArrayVec;

use crate::heap;
use crate::measure::{Flavor, Monoid};
use crate::pool::SLOT_SIZE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum Kind {
    Leaf,
    Branch,
    Finger,
    Deep,
}

impl Kind {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Kind::Leaf => "leaf",
            Kind::Branch => "node",
            Kind::Finger => "finger",
            Kind::Deep => "deep",
        }
    }
}

#[repr(C)]
struct Header<M> {
    refs: Cell<u32>,
    kind: Kind,
    len: u8,
    measure: M,
}

/// Up to four child nodes, the widest any node gets.
pub(crate) type Kids<F> = ArrayVec<NodeRef<F>, 4>;

pub(crate) struct Geometry<F>(PhantomData<F>);

impl<F: Flavor> Geometry<F> {
    pub(crate) const PAYLOAD: usize = (size_of::<Header<F::Measure>>() + 7) & !7;

    pub(crate) const LEAF_CAP: usize = {
        let c = (SLOT_SIZE - Self::PAYLOAD) / size_of::<F::Elem>();
        if c > 255 {
            255
        } else {
            c
        }
    };

    const CHECK: () = {
        assert!(align_of::<F::Measure>() <= 8, "measure alignment above 8");
        assert!(align_of::<F::Elem>() <= 8, "element alignment above 8");
        assert!(
            Self::PAYLOAD + 4 * size_of::<usize>() <= SLOT_SIZE,
            "measure too large for a 64-byte node"
        );
        assert!(Self::LEAF_CAP >= 1, "element too large for a 64-byte leaf; store it behind a pointer");
    };
}

/// Number of elements a leaf of this flavor holds.
pub fn leaf_capacity<F: Flavor>() -> usize {
    Geometry::<F>::LEAF_CAP
}

pub(crate) struct NodeRef<F: Flavor> {
    ptr: NonNull<Header<F::Measure>>,
    _flavor: PhantomData<*const F>,
}

impl<F: Flavor> NodeRef<F> {
    #[inline]
    fn hdr(&self) -> &Header<F::Measure> {
        // SAFETY: a NodeRef keeps its slot alive.
        unsafe { self.ptr.as_ref() }
    }

    #[inline]
    pub(crate) fn kind(&self) -> Kind {
        self.hdr().kind
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.hdr().len as usize
    }

    #[inline]
    pub(crate) fn measure(&self) -> &F::Measure {
        &self.hdr().measure
    }

    #[inline]
    pub(crate) fn refs(&self) -> u32 {
        self.hdr().refs.get()
    }

    #[inline]
    pub(crate) fn is_unique(&self) -> bool {
        self.refs() == 1
    }

    #[inline]
    pub(crate) fn addr(&self) -> usize {
        self.ptr.as_ptr() as usize
    }

    #[inline]
    fn payload(&self) -> *mut u8 {
        // SAFETY: the payload lies within the slot.
        unsafe { self.ptr.as_ptr().cast::<u8>().add(Geometry::<F>::PAYLOAD) }
    }

    #[inline]
    pub(crate) fn elems(&self) -> &[F::Elem] {
        debug_assert_eq!(self.kind(), Kind::Leaf);
        // SAFETY: leaves hold `len` initialized elements in the payload.
        unsafe { slice::from_raw_parts(self.payload().cast::<F::Elem>(), self.len()) }
    }

    /// Child slots. Only a deep node's middle slot can be `None`.
    #[inline]
    pub(crate) fn slots(&self) -> &[Option<NodeRef<F>>] {
        debug_assert_ne!(self.kind(), Kind::Leaf);
        // SAFETY: inner nodes hold `len` initialized slots in the payload.
        unsafe { slice::from_raw_parts(self.payload().cast::<Option<NodeRef<F>>>(), self.len()) }
    }

    #[inline]
    pub(crate) fn child(&self, i: usize) -> &NodeRef<F> {
        self.slots()[i].as_ref().expect("empty child slot")
    }

    #[inline]
    pub(crate) fn first(&self) -> &NodeRef<F> {
        self.child(0)
    }

    #[inline]
    pub(crate) fn last(&self) -> &NodeRef<F> {
        self.child(self.len() - 1)
    }

    fn alloc(kind: Kind, len: usize, measure: F::Measure) -> NonNull<Header<F::Measure>> {
        #[allow(clippy::let_unit_value)]
        let () = Geometry::<F>::CHECK;
        let p = heap::alloc_slot().cast::<Header<F::Measure>>();
        // SAFETY: fresh, exclusively owned slot large enough for the header.
        unsafe { p.as_ptr().write(Header { refs: Cell::new(1), kind, len: len as u8, measure }) };
        p
    }

    #[inline]
    fn from_ptr(ptr: NonNull<Header<F::Measure>>) -> Self {
        NodeRef { ptr, _flavor: PhantomData }
    }

    pub(crate) fn leaf(elems: &[F::Elem]) -> Self {
        assert!(!elems.is_empty() && elems.len() <= Geometry::<F>::LEAF_CAP, "bad leaf length {}", elems.len());
        let n = Self::from_ptr(Self::alloc(Kind::Leaf, 0, F::measure_slice(elems)));
        let dst = n.payload().cast::<F::Elem>();
        for (i, e) in elems.iter().enumerate() {
            // SAFETY: i < LEAF_CAP; len is bumped after each write so a panicking
            // clone leaves a consistent node behind.
            unsafe {
                dst.add(i).write(e.clone());
                (*n.ptr.as_ptr()).len = (i + 1) as u8;
            }
        }
        n
    }

    fn with_slots(kind: Kind, slots: ArrayVec<Option<NodeRef<F>>, 4>) -> Self {
        let measure = slots
            .iter()
            .flatten()
            .fold(F::Measure::identity(), |acc, c| acc.combine(c.measure()));
        let n = Self::from_ptr(Self::alloc(kind, slots.len(), measure));
        let dst = n.payload().cast::<Option<NodeRef<F>>>();
        for (i, s) in slots.into_iter().enumerate() {
            // SAFETY: at most four slots fit (checked by Geometry).
            unsafe { dst.add(i).write(s) };
        }
        n
    }

    pub(crate) fn branch(kids: impl IntoIterator<Item = NodeRef<F>>) -> Self {
        let slots: ArrayVec<_, 4> = kids.into_iter().map(Some).collect();
        debug_assert!((2..=3).contains(&slots.len()), "branch arity {}", slots.len());
        Self::with_slots(Kind::Branch, slots)
    }

    pub(crate) fn finger(digits: impl IntoIterator<Item = NodeRef<F>>) -> Self {
        let slots: ArrayVec<_, 4> = digits.into_iter().map(Some).collect();
        debug_assert!((1..=4).contains(&slots.len()), "finger length {}", slots.len());
        Self::with_slots(Kind::Finger, slots)
    }

    pub(crate) fn deep(prefix: NodeRef<F>, spine: Option<NodeRef<F>>, suffix: NodeRef<F>) -> Self {
        debug_assert_eq!(prefix.kind(), Kind::Finger);
        debug_assert_eq!(suffix.kind(), Kind::Finger);
        let mut slots = ArrayVec::new();
        slots.push(Some(prefix));
        slots.push(spine);
        slots.push(Some(suffix));
        Self::with_slots(Kind::Deep, slots)
    }

    /// Releases the header and slot of a node whose payload was moved out.
    ///
    /// # Safety
    /// The payload must already be moved out; `self` must be unique.
    unsafe fn forget_payload(self) {
        let p = self.ptr;
        std::mem::forget(self);
        ptr::drop_in_place(ptr::addr_of_mut!((*p.as_ptr()).measure));
        heap::free_slot(p.cast());
    }

    /// Moves the children out of a branch or finger, reusing the node's
    /// references when it is uniquely owned.
    pub(crate) fn into_kids(self) -> Kids<F> {
        debug_assert!(matches!(self.kind(), Kind::Branch | Kind::Finger));
        let mut out = Kids::new();
        if self.is_unique() {
            let src = self.payload().cast::<Option<NodeRef<F>>>();
            for i in 0..self.len() {
                // SAFETY: slot i is initialized; ownership moves out once.
                out.push(unsafe { src.add(i).read() }.expect("empty child slot"));
            }
            // SAFETY: payload moved out above.
            unsafe { self.forget_payload() };
        } else {
            out.extend(self.slots().iter().map(|s| s.clone().expect("empty child slot")));
        }
        out
    }

    /// Splits a deep node into prefix, spine and suffix.
    pub(crate) fn into_deep(self) -> (NodeRef<F>, Option<NodeRef<F>>, NodeRef<F>) {
        debug_assert_eq!(self.kind(), Kind::Deep);
        if self.is_unique() {
            let src = self.payload().cast::<Option<NodeRef<F>>>();
            // SAFETY: three initialized slots, each moved out once.
            let parts = unsafe { (src.read(), src.add(1).read(), src.add(2).read()) };
            // SAFETY: payload moved out above.
            unsafe { self.forget_payload() };
            (parts.0.unwrap(), parts.1, parts.2.unwrap())
        } else {
            let s = self.slots();
            (s[0].clone().unwrap(), s[1].clone(), s[2].clone().unwrap())
        }
    }

    fn shallow_copy(&self) -> Self {
        match self.kind() {
            Kind::Leaf => Self::leaf(self.elems()),
            kind => Self::with_slots(kind, self.slots().iter().cloned().collect()),
        }
    }

    /// Mutable access, copying the node first unless it is uniquely owned and
    /// destructive updates are enabled. The cached measure is refreshed when
    /// the returned guard drops.
    #[inline]
    pub(crate) fn make_mut(&mut self) -> NodeMut<'_, F> {
        if !(self.is_unique() && heap::destructive_updates()) {
            *self = self.shallow_copy();
        }
        NodeMut { node: self }
    }

    fn recompute(&self) -> F::Measure {
        match self.kind() {
            Kind::Leaf => F::measure_slice(self.elems()),
            _ => self
                .slots()
                .iter()
                .flatten()
                .fold(F::Measure::identity(), |acc, c| acc.combine(c.measure())),
        }
    }

    /// Whether the cached measure matches a recomputation from the payload.
    pub(crate) fn measure_is_fresh(&self) -> bool {
        self.recompute() == *self.measure()
    }
}

impl<F: Flavor> Clone for NodeRef<F> {
    #[inline]
    fn clone(&self) -> Self {
        let r = self.hdr().refs.get();
        assert!(r < u32::MAX, "node reference count overflow");
        self.hdr().refs.set(r + 1);
        NodeRef { ptr: self.ptr, _flavor: PhantomData }
    }
}

impl<F: Flavor> Drop for NodeRef<F> {
    #[inline]
    fn drop(&mut self) {
        let r = self.hdr().refs.get();
        if r > 1 {
            self.hdr().refs.set(r - 1);
            return;
        }
        // SAFETY: last reference; payload is initialized per kind and len.
        unsafe {
            match self.kind() {
                Kind::Leaf => ptr::drop_in_place(ptr::slice_from_raw_parts_mut(
                    self.payload().cast::<F::Elem>(),
                    self.len(),
                )),
                _ => ptr::drop_in_place(ptr::slice_from_raw_parts_mut(
                    self.payload().cast::<Option<NodeRef<F>>>(),
                    self.len(),
                )),
            }
            ptr::drop_in_place(ptr::addr_of_mut!((*self.ptr.as_ptr()).measure));
            heap::free_slot(self.ptr.cast());
        }
    }
}

/// Exclusive access to a node; refreshes the cached measure on drop.
pub(crate) struct NodeMut<'a, F: Flavor> {
    node: &'a mut NodeRef<F>,
}

impl<F: Flavor> NodeMut<'_, F> {
    fn set_len(&mut self, len: usize) {
        // SAFETY: exclusive access.
        unsafe { (*self.node.ptr.as_ptr()).len = len as u8 };
    }

    pub(crate) fn is_leaf(&self) -> bool {
        self.node.kind() == Kind::Leaf
    }

    pub(crate) fn elems_mut(&mut self) -> &mut [F::Elem] {
        debug_assert_eq!(self.node.kind(), Kind::Leaf);
        // SAFETY: exclusive access to `len` initialized elements.
        unsafe { slice::from_raw_parts_mut(self.node.payload().cast::<F::Elem>(), self.node.len()) }
    }

    /// Replaces `remove` elements at `at` with clones of `insert`.
    pub(crate) fn splice(&mut self, at: usize, remove: usize, insert: &[F::Elem]) {
        let len = self.node.len();
        debug_assert_eq!(self.node.kind(), Kind::Leaf);
        assert!(at + remove <= len);
        let new_len = len - remove + insert.len();
        assert!(new_len <= Geometry::<F>::LEAF_CAP, "leaf overflow");
        let base = self.node.payload().cast::<F::Elem>();
        // SAFETY: all indices stay below LEAF_CAP; the length is shrunk to `at`
        // while the tail is in flux so a panicking clone cannot double-drop.
        unsafe {
            ptr::drop_in_place(ptr::slice_from_raw_parts_mut(base.add(at), remove));
            let tail = len - at - remove;
            self.set_len(at);
            ptr::copy(base.add(at + remove), base.add(at + insert.len()), tail);
            for (i, e) in insert.iter().enumerate() {
                base.add(at + i).write(e.clone());
            }
            self.set_len(new_len);
        }
    }

    pub(crate) fn slots_mut(&mut self) -> &mut [Option<NodeRef<F>>] {
        debug_assert_ne!(self.node.kind(), Kind::Leaf);
        // SAFETY: exclusive access to `len` initialized slots.
        unsafe { slice::from_raw_parts_mut(self.node.payload().cast::<Option<NodeRef<F>>>(), self.node.len()) }
    }

    pub(crate) fn insert_kid(&mut self, i: usize, kid: NodeRef<F>) {
        let len = self.node.len();
        assert!(len < 4 && i <= len && self.node.kind() != Kind::Deep);
        let base = self.node.payload().cast::<Option<NodeRef<F>>>();
        // SAFETY: room for one more slot.
        unsafe {
            ptr::copy(base.add(i), base.add(i + 1), len - i);
            base.add(i).write(Some(kid));
        }
        self.set_len(len + 1);
    }

    pub(crate) fn remove_kid(&mut self, i: usize) -> NodeRef<F> {
        let len = self.node.len();
        assert!(i < len && self.node.kind() != Kind::Deep);
        let base = self.node.payload().cast::<Option<NodeRef<F>>>();
        // SAFETY: slot i is initialized and moved out once.
        let kid = unsafe {
            let kid = base.add(i).read();
            ptr::copy(base.add(i + 1), base.add(i), len - i - 1);
            kid
        };
        self.set_len(len - 1);
        kid.expect("empty child slot")
    }
}

impl<F: Flavor> Drop for NodeMut<'_, F> {
    fn drop(&mut self) {
        let m = self.node.recompute();
        // SAFETY: exclusive access.
        unsafe { (*self.node.ptr.as_ptr()).measure = m };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Keyed, Seq, Size, Sorted, Utf8};

    type V = Seq<u64>;

    #[test]
    fn leaf_capacities_fill_the_slot() {
        assert_eq!(leaf_capacity::<Seq<u64>>(), 6);
        assert_eq!(leaf_capacity::<Sorted<u64>>(), 4);
        assert_eq!(leaf_capacity::<Keyed<u64, u64>>(), 2);
        assert_eq!(leaf_capacity::<Utf8>(), 40);
        assert_eq!(leaf_capacity::<Seq<u8>>(), 48);
    }

    #[test]
    fn make_mut_copies_shared_nodes() {
        let a = NodeRef::<V>::leaf(&[1, 2, 3]);
        let mut b = a.clone();
        assert_eq!(a.refs(), 2);
        b.make_mut().splice(1, 1, &[7, 8]);
        assert_ne!(a.addr(), b.addr());
        assert_eq!(a.elems(), &[1, 2, 3]);
        assert_eq!(b.elems(), &[1, 7, 8, 3]);
        assert_eq!(*b.measure(), Size(4));
        assert_eq!(a.refs(), 1);
    }

    #[test]
    fn make_mut_reuses_unique_nodes() {
        heap::with_destructive_updates(true, || {
            let mut a = NodeRef::<V>::leaf(&[1, 2]);
            let addr = a.addr();
            a.make_mut().splice(2, 0, &[3]);
            assert_eq!(a.addr(), addr);
            assert_eq!(a.elems(), &[1, 2, 3]);
        });
        heap::with_destructive_updates(false, || {
            let mut a = NodeRef::<V>::leaf(&[1, 2]);
            let addr = a.addr();
            a.make_mut().splice(0, 1, &[]);
            assert_ne!(a.addr(), addr);
            assert_eq!(a.elems(), &[2]);
        });
    }

    #[test]
    fn nodes_are_returned_to_the_heap() {
        let before = heap::live_nodes();
        {
            let l1 = NodeRef::<V>::leaf(&[1]);
            let l2 = NodeRef::<V>::leaf(&[2, 3]);
            let b = NodeRef::branch([l1, l2.clone()]);
            let f = NodeRef::finger([b]);
            assert_eq!(*f.measure(), Size(3));
            let kids = f.into_kids();
            assert_eq!(kids.len(), 1);
            assert_eq!(heap::live_nodes() - before, 3);
        }
        assert_eq!(heap::live_nodes(), before);
    }

    #[test]
    fn kid_insert_and_remove() {
        let mut f = NodeRef::<V>::finger([NodeRef::leaf(&[1]), NodeRef::leaf(&[3])]);
        f.make_mut().insert_kid(1, NodeRef::leaf(&[2]));
        assert_eq!(f.len(), 3);
        assert_eq!(f.child(1).elems(), &[2]);
        let k = f.make_mut().remove_kid(0);
        assert_eq!(k.elems(), &[1]);
        assert_eq!(*f.measure(), Size(2));
    }
}
