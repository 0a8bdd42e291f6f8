//! The persistent 2-3 finger tree shared by every container.
//!
//! A tree is empty, a single digit, or a deep node holding a prefix finger,
//! an optional spine (a finger tree of branch nodes one level deeper) and a
//! suffix finger. Digits at the top level are leaves holding several elements.
//! Balancing is eager. Nodes are only mutated in place when uniquely owned.

use std::fmt::{self, Write as _};
use std::iter::FusedIterator;

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::measure::{Compact, Flavor, Monoid};
use crate::node::{Geometry, Kids, Kind, NodeMut, NodeRef};

pub(crate) type Pred<'a, M> = &'a dyn Fn(&M) -> bool;

/// A persistent sequence under the measure of flavor `F`.
pub struct FingerTree<F: Flavor> {
    pub(crate) root: Option<NodeRef<F>>,
}

impl<F: Flavor> Clone for FingerTree<F> {
    fn clone(&self) -> Self {
        FingerTree { root: self.root.clone() }
    }
}

impl<F: Flavor> Default for FingerTree<F> {
    fn default() -> Self {
        FingerTree { root: None }
    }
}

// ---------------------------------------------------------------------------
// Level-generic helpers. A "tree" here is an `Option<NodeRef>` whose root is
// either a deep node or a single digit; digits are leaves at the top level and
// branches below.

pub(crate) fn measure_of<F: Flavor>(t: &Option<NodeRef<F>>) -> F::Measure {
    t.as_ref().map_or_else(F::Measure::identity, |n| n.measure().clone())
}

pub(crate) fn push_back_node<F: Flavor>(tree: &mut Option<NodeRef<F>>, x: NodeRef<F>) {
    match tree.take() {
        None => *tree = Some(x),
        Some(t) if t.kind() != Kind::Deep => {
            *tree = Some(NodeRef::deep(NodeRef::finger([t]), None, NodeRef::finger([x])));
        }
        Some(mut t) => {
            {
                let mut d = t.make_mut();
                let slots = d.slots_mut();
                if slots[2].as_ref().unwrap().len() < 4 {
                    let sf = slots[2].as_mut().unwrap();
                    let n = sf.len();
                    sf.make_mut().insert_kid(n, x);
                } else {
                    let mut kids = slots[2].take().unwrap().into_kids();
                    let d4 = kids.pop().unwrap();
                    push_back_node(&mut slots[1], NodeRef::branch(kids));
                    slots[2] = Some(NodeRef::finger([d4, x]));
                }
            }
            *tree = Some(t);
        }
    }
}

pub(crate) fn push_front_node<F: Flavor>(tree: &mut Option<NodeRef<F>>, x: NodeRef<F>) {
    match tree.take() {
        None => *tree = Some(x),
        Some(t) if t.kind() != Kind::Deep => {
            *tree = Some(NodeRef::deep(NodeRef::finger([x]), None, NodeRef::finger([t])));
        }
        Some(mut t) => {
            {
                let mut d = t.make_mut();
                let slots = d.slots_mut();
                if slots[0].as_ref().unwrap().len() < 4 {
                    slots[0].as_mut().unwrap().make_mut().insert_kid(0, x);
                } else {
                    let mut kids = slots[0].take().unwrap().into_kids();
                    let rest: Kids<F> = kids.drain(1..).collect();
                    push_front_node(&mut slots[1], NodeRef::branch(rest));
                    slots[0] = Some(NodeRef::finger([x, kids.pop().unwrap()]));
                }
            }
            *tree = Some(t);
        }
    }
}

pub(crate) fn pop_front_node<F: Flavor>(tree: &mut Option<NodeRef<F>>) -> Option<NodeRef<F>> {
    let mut t = tree.take()?;
    if t.kind() != Kind::Deep {
        return Some(t);
    }
    if t.first().len() > 1 {
        let x = t.make_mut().slots_mut()[0].as_mut().unwrap().make_mut().remove_kid(0);
        *tree = Some(t);
        return Some(x);
    }
    let (pf, spine, sf) = t.into_deep();
    let x = pf.into_kids().pop().unwrap();
    *tree = Some(deep_l(Kids::new(), spine, sf));
    Some(x)
}

pub(crate) fn pop_back_node<F: Flavor>(tree: &mut Option<NodeRef<F>>) -> Option<NodeRef<F>> {
    let mut t = tree.take()?;
    if t.kind() != Kind::Deep {
        return Some(t);
    }
    if t.last().len() > 1 {
        let x = {
            let mut d = t.make_mut();
            let sf = d.slots_mut()[2].as_mut().unwrap();
            let n = sf.len();
            let x = sf.make_mut().remove_kid(n - 1);
            x
        };
        *tree = Some(t);
        return Some(x);
    }
    let (pf, spine, sf) = t.into_deep();
    let x = sf.into_kids().pop().unwrap();
    *tree = Some(deep_r(pf, spine, Kids::new()));
    Some(x)
}

/// Builds a tree from 0..=4 digits.
pub(crate) fn tree_from_kids<F: Flavor>(mut kids: Kids<F>) -> Option<NodeRef<F>> {
    match kids.len() {
        0 => None,
        1 => kids.pop(),
        n => {
            let right: Kids<F> = kids.drain(n / 2..).collect();
            Some(NodeRef::deep(NodeRef::finger(kids), None, NodeRef::finger(right)))
        }
    }
}

/// Deep node from a possibly empty prefix, borrowing from the spine or the
/// suffix when the prefix is empty.
pub(crate) fn deep_l<F: Flavor>(prefix: Kids<F>, mut spine: Option<NodeRef<F>>, suffix: NodeRef<F>) -> NodeRef<F> {
    if !prefix.is_empty() {
        return NodeRef::deep(NodeRef::finger(prefix), spine, suffix);
    }
    match pop_front_node(&mut spine) {
        Some(n) => NodeRef::deep(NodeRef::finger(n.into_kids()), spine, suffix),
        None => tree_from_kids(suffix.into_kids()).unwrap(),
    }
}

pub(crate) fn deep_r<F: Flavor>(prefix: NodeRef<F>, mut spine: Option<NodeRef<F>>, suffix: Kids<F>) -> NodeRef<F> {
    if !suffix.is_empty() {
        return NodeRef::deep(prefix, spine, NodeRef::finger(suffix));
    }
    match pop_back_node(&mut spine) {
        Some(n) => NodeRef::deep(prefix, spine, NodeRef::finger(n.into_kids())),
        None => tree_from_kids(prefix.into_kids()).unwrap(),
    }
}

/// Groups 2..=12 nodes into 1..=4 branches.
fn nodes<F: Flavor>(list: ArrayVec<NodeRef<F>, 12>) -> Kids<F> {
    let mut rem = list.len();
    debug_assert!(rem >= 2);
    let mut it = list.into_iter();
    let mut out = Kids::new();
    while rem > 0 {
        let take = match rem {
            2 | 4 => 2,
            _ => 3,
        };
        out.push(NodeRef::branch(it.by_ref().take(take)));
        rem -= take;
    }
    out
}

fn app3<F: Flavor>(a: Option<NodeRef<F>>, mid: Kids<F>, b: Option<NodeRef<F>>) -> Option<NodeRef<F>> {
    match (a, b) {
        (None, mut t) => {
            for n in mid.into_iter().rev() {
                push_front_node(&mut t, n);
            }
            t
        }
        (mut t, None) => {
            for n in mid {
                push_back_node(&mut t, n);
            }
            t
        }
        (Some(a), Some(b)) if a.kind() != Kind::Deep => {
            let mut t = app3(None, mid, Some(b));
            push_front_node(&mut t, a);
            t
        }
        (Some(a), Some(b)) if b.kind() != Kind::Deep => {
            let mut t = app3(Some(a), mid, None);
            push_back_node(&mut t, b);
            t
        }
        (Some(a), Some(b)) => {
            let (pr1, m1, sf1) = a.into_deep();
            let (pr2, m2, sf2) = b.into_deep();
            let mut list = ArrayVec::<NodeRef<F>, 12>::new();
            list.extend(sf1.into_kids());
            list.extend(mid);
            list.extend(pr2.into_kids());
            let m = app3(m1, nodes(list), m2);
            Some(NodeRef::deep(pr1, m, sf2))
        }
    }
}

/// Splits digits at the first one whose inclusion makes `pred` hold.
fn split_kids<F: Flavor>(pred: Pred<F::Measure>, acc: &F::Measure, mut kids: Kids<F>) -> (Kids<F>, NodeRef<F>, Kids<F>) {
    let mut acc = acc.clone();
    let mut at = kids.len() - 1;
    for (i, k) in kids.iter().enumerate().take(kids.len() - 1) {
        let next = acc.combine(k.measure());
        if pred(&next) {
            at = i;
            break;
        }
        acc = next;
    }
    let right: Kids<F> = kids.drain(at + 1..).collect();
    let x = kids.pop().unwrap();
    (kids, x, right)
}

/// Splits a non-empty tree at the digit where `pred` flips, given that it
/// does not hold for `acc` and holds for `acc + measure(t)`.
fn split_tree<F: Flavor>(
    pred: Pred<F::Measure>,
    acc: &F::Measure,
    t: NodeRef<F>,
) -> (Option<NodeRef<F>>, NodeRef<F>, Option<NodeRef<F>>) {
    if t.kind() != Kind::Deep {
        return (None, t, None);
    }
    let (pr, m, sf) = t.into_deep();
    let vpr = acc.combine(pr.measure());
    if pred(&vpr) {
        let (l, x, r) = split_kids(pred, acc, pr.into_kids());
        return (tree_from_kids(l), x, Some(deep_l(r, m, sf)));
    }
    let vm = vpr.combine(&measure_of(&m));
    match m {
        Some(mm) if pred(&vm) => {
            let (ml, xs, mr) = split_tree(pred, &vpr, mm);
            let acc2 = vpr.combine(&measure_of(&ml));
            let (l, x, r) = split_kids(pred, &acc2, xs.into_kids());
            (Some(deep_r(pr, ml, l)), x, Some(deep_l(r, mr, sf)))
        }
        m => {
            let (l, x, r) = split_kids(pred, &vm, sf.into_kids());
            (Some(deep_r(pr, m, l)), x, tree_from_kids(r))
        }
    }
}

// ---------------------------------------------------------------------------

/// Mutable access to the leaf holding the last element.
fn with_last_leaf<F: Flavor, R>(root: &mut NodeRef<F>, f: impl FnOnce(&mut NodeMut<'_, F>) -> R) -> R {
    match root.kind() {
        Kind::Deep => {
            let mut d = root.make_mut();
            let sf = d.slots_mut()[2].as_mut().unwrap();
            let mut s = sf.make_mut();
            let leaf = s.slots_mut().last_mut().unwrap().as_mut().unwrap();
            let r = f(&mut leaf.make_mut());
            r
        }
        _ => f(&mut root.make_mut()),
    }
}

fn with_first_leaf<F: Flavor, R>(root: &mut NodeRef<F>, f: impl FnOnce(&mut NodeMut<'_, F>) -> R) -> R {
    match root.kind() {
        Kind::Deep => {
            let mut d = root.make_mut();
            let pf = d.slots_mut()[0].as_mut().unwrap();
            let mut p = pf.make_mut();
            let leaf = p.slots_mut()[0].as_mut().unwrap();
            let r = f(&mut leaf.make_mut());
            r
        }
        _ => f(&mut root.make_mut()),
    }
}

fn last_leaf<F: Flavor>(root: &NodeRef<F>) -> &NodeRef<F> {
    match root.kind() {
        Kind::Deep => root.last().last(),
        _ => root,
    }
}

fn first_leaf<F: Flavor>(root: &NodeRef<F>) -> &NodeRef<F> {
    match root.kind() {
        Kind::Deep => root.first().first(),
        _ => root,
    }
}

impl<F: Flavor> FingerTree<F> {
    pub fn new() -> Self {
        FingerTree { root: None }
    }

    pub(crate) fn from_root(root: Option<NodeRef<F>>) -> Self {
        FingerTree { root }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Number of stored elements.
    pub fn len(&self) -> usize {
        self.root.as_ref().map_or(0, |r| r.measure().count())
    }

    /// Cached measure of the whole sequence.
    pub fn measure(&self) -> F::Measure {
        measure_of(&self.root)
    }

    /// Identity of the root node (0 when empty); equal ids mean fully shared structure.
    pub fn root_id(&self) -> usize {
        self.root.as_ref().map_or(0, NodeRef::addr)
    }

    pub fn push_back(&mut self, x: F::Elem) {
        self.push_back_run(std::slice::from_ref(&x));
    }

    pub fn push_front(&mut self, x: F::Elem) {
        self.push_front_run(std::slice::from_ref(&x));
    }

    /// Appends elements that must stay together in one leaf.
    pub(crate) fn push_back_run(&mut self, xs: &[F::Elem]) {
        debug_assert!(!xs.is_empty() && xs.len() <= Geometry::<F>::LEAF_CAP);
        match &mut self.root {
            None => self.root = Some(NodeRef::leaf(xs)),
            Some(root) => {
                if last_leaf(root).len() + xs.len() <= Geometry::<F>::LEAF_CAP {
                    with_last_leaf(root, |leaf| {
                        let n = leaf.elems_mut().len();
                        leaf.splice(n, 0, xs);
                    });
                } else {
                    push_back_node(&mut self.root, NodeRef::leaf(xs));
                }
            }
        }
    }

    pub(crate) fn push_front_run(&mut self, xs: &[F::Elem]) {
        debug_assert!(!xs.is_empty() && xs.len() <= Geometry::<F>::LEAF_CAP);
        match &mut self.root {
            None => self.root = Some(NodeRef::leaf(xs)),
            Some(root) => {
                if first_leaf(root).len() + xs.len() <= Geometry::<F>::LEAF_CAP {
                    with_first_leaf(root, |leaf| leaf.splice(0, 0, xs));
                } else {
                    push_front_node(&mut self.root, NodeRef::leaf(xs));
                }
            }
        }
    }

    pub fn pop_back(&mut self) -> Option<F::Elem> {
        let root = self.root.as_mut()?;
        if last_leaf(root).len() > 1 {
            return Some(with_last_leaf(root, |leaf| {
                let n = leaf.elems_mut().len();
                let x = leaf.elems_mut()[n - 1].clone();
                leaf.splice(n - 1, 1, &[]);
                x
            }));
        }
        let leaf = pop_back_node(&mut self.root)?;
        Some(leaf.elems()[0].clone())
    }

    pub fn pop_front(&mut self) -> Option<F::Elem> {
        let root = self.root.as_mut()?;
        if first_leaf(root).len() > 1 {
            return Some(with_first_leaf(root, |leaf| {
                let x = leaf.elems_mut()[0].clone();
                leaf.splice(0, 1, &[]);
                x
            }));
        }
        let leaf = pop_front_node(&mut self.root)?;
        Some(leaf.elems()[0].clone())
    }

    pub fn front(&self) -> Option<&F::Elem> {
        self.root.as_ref().map(|r| &first_leaf(r).elems()[0])
    }

    pub fn back(&self) -> Option<&F::Elem> {
        self.root.as_ref().map(|r| last_leaf(r).elems().last().unwrap())
    }

    /// Appends `other` after `self`.
    pub fn append(&mut self, other: Self) {
        self.root = app3(self.root.take(), Kids::new(), other.root);
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut t = self.clone();
        t.append(other.clone());
        t
    }

    /// Element at position `idx`.
    pub fn get(&self, idx: usize) -> Option<&F::Elem> {
        let mut node = self.root.as_ref()?;
        let mut i = idx;
        if i >= node.measure().count() {
            return None;
        }
        loop {
            if node.kind() == Kind::Leaf {
                return node.elems().get(i);
            }
            let mut next = None;
            for c in node.slots().iter().flatten() {
                let n = c.measure().count();
                if i < n {
                    next = Some(c);
                    break;
                }
                i -= n;
            }
            node = next?;
        }
    }

    /// Replaces the element at `idx`, copying only the path to it.
    pub fn set(&mut self, idx: usize, x: F::Elem) -> Result<()> {
        let len = self.len();
        match self.root.as_mut() {
            Some(root) if idx < len => {
                set_in(root, idx, x);
                Ok(())
            }
            _ => Err(Error::OutOfRange { index: idx, len }),
        }
    }

    /// The leaf holding the first element where `pred` flips, with that
    /// element's index inside the leaf.
    pub(crate) fn leaf_where(&self, pred: Pred<F::Measure>) -> Option<(&[F::Elem], usize)> {
        let mut node = self.root.as_ref()?;
        let mut acc = F::Measure::identity();
        if pred(&acc) || !pred(node.measure()) {
            return None;
        }
        loop {
            if node.kind() == Kind::Leaf {
                for (j, e) in node.elems().iter().enumerate() {
                    acc = acc.combine(&F::measure(e));
                    if pred(&acc) {
                        return Some((node.elems(), j));
                    }
                }
                return None;
            }
            let mut next = None;
            for c in node.slots().iter().flatten() {
                let m = acc.combine(c.measure());
                if pred(&m) {
                    next = Some(c);
                    break;
                }
                acc = m;
            }
            node = next?;
        }
    }

    /// First element at which `pred` over the accumulated prefix measure
    /// becomes true, with its position and the measure strictly before it.
    pub fn find(&self, pred: impl Fn(&F::Measure) -> bool) -> Option<(usize, &F::Elem)> {
        self.find_with_acc(&pred).map(|(i, e, _)| (i, e))
    }

    pub(crate) fn find_with_acc(&self, pred: Pred<F::Measure>) -> Option<(usize, &F::Elem, F::Measure)> {
        let mut node = self.root.as_ref()?;
        let mut acc = F::Measure::identity();
        if pred(&acc) || !pred(node.measure()) {
            return None;
        }
        loop {
            if node.kind() == Kind::Leaf {
                for e in node.elems() {
                    let next = acc.combine(&F::measure(e));
                    if pred(&next) {
                        return Some((acc.count(), e, acc));
                    }
                    acc = next;
                }
                return None;
            }
            let mut next = None;
            for c in node.slots().iter().flatten() {
                let m = acc.combine(c.measure());
                if pred(&m) {
                    next = Some(c);
                    break;
                }
                acc = m;
            }
            node = next?;
        }
    }

    /// Removes and returns the suffix starting at the first element where
    /// `pred` flips to true. If it never does, the suffix is empty.
    pub fn split_off_where(&mut self, pred: impl Fn(&F::Measure) -> bool) -> Self {
        self.split_off_dyn(&pred)
    }

    pub(crate) fn split_off_dyn(&mut self, pred: Pred<F::Measure>) -> Self {
        let Some(root) = self.root.take() else {
            return Self::new();
        };
        let id = F::Measure::identity();
        if !pred(root.measure()) {
            self.root = Some(root);
            return Self::new();
        }
        if pred(&id) {
            return FingerTree { root: Some(root) };
        }
        let (mut left, leaf, mut right) = split_tree(pred, &id, root);
        let mut acc = measure_of(&left);
        let mut j = leaf.len() - 1;
        for (i, e) in leaf.elems().iter().enumerate() {
            acc = acc.combine(&F::measure(e));
            if pred(&acc) {
                j = i;
                break;
            }
        }
        if j == 0 {
            push_front_node(&mut right, leaf);
        } else {
            push_back_node(&mut left, NodeRef::leaf(&leaf.elems()[..j]));
            push_front_node(&mut right, NodeRef::leaf(&leaf.elems()[j..]));
        }
        self.root = left;
        FingerTree { root: right }
    }

    /// Splits into the part before the flip, the flipping element, and the rest.
    pub fn split_at(&self, pred: impl Fn(&F::Measure) -> bool) -> Result<(Self, F::Elem, Self)> {
        let mut left = self.clone();
        let mut right = left.split_off_dyn(&pred);
        let pivot = right.pop_front().ok_or(Error::KeyNotFound)?;
        Ok((left, pivot, right))
    }

    /// Removes and returns the elements from position `at` on.
    pub fn split_off(&mut self, at: usize) -> Self {
        self.split_off_dyn(&|m: &F::Measure| m.count() > at)
    }

    pub fn iter(&self) -> Iter<'_, F> {
        let mut it = Iter { stack: Vec::new(), leaf: &[], remaining: self.len() };
        match &self.root {
            None => {}
            Some(r) if r.kind() == Kind::Leaf => it.leaf = r.elems(),
            Some(r) => it.stack.push((r, 0)),
        }
        it
    }

    /// In-order copy of all elements.
    pub fn flatten(&self) -> Vec<F::Elem> {
        self.iter().cloned().collect()
    }

    /// Re-verifies every structural invariant and cached measure.
    pub fn check(&self) -> std::result::Result<(), String> {
        let Some(root) = &self.root else { return Ok(()) };
        let depth = check_tree(root, 0)?;
        let leaves_bound = usize::BITS - root.measure().count().leading_zeros();
        if depth > leaves_bound as usize + 1 {
            return Err(format!("spine depth {depth} too large for {} elements", root.measure().count()));
        }
        Ok(())
    }

    pub fn audit(&self) -> bool {
        self.check().is_ok()
    }

    pub(crate) fn for_each_leaf(&self, mut f: impl FnMut(&[F::Elem])) {
        fn go<F: Flavor>(n: &NodeRef<F>, f: &mut dyn FnMut(&[F::Elem])) {
            match n.kind() {
                Kind::Leaf => f(n.elems()),
                _ => n.slots().iter().flatten().for_each(|c| go(c, f)),
            }
        }
        if let Some(r) = &self.root {
            go(r, &mut f);
        }
    }
}

fn set_in<F: Flavor>(n: &mut NodeRef<F>, mut i: usize, x: F::Elem) {
    let mut m = n.make_mut();
    if m.is_leaf() {
        m.elems_mut()[i] = x;
        return;
    }
    for slot in m.slots_mut().iter_mut().flatten() {
        let c = slot.measure().count();
        if i < c {
            set_in(slot, i, x);
            return;
        }
        i -= c;
    }
}

fn check_digit<F: Flavor>(n: &NodeRef<F>, height: usize) -> std::result::Result<(), String> {
    if !n.measure_is_fresh() {
        return Err(format!("stale measure on {} at height {height}", n.kind().name()));
    }
    if height == 0 {
        if n.kind() != Kind::Leaf {
            return Err(format!("expected leaf at height 0, found {}", n.kind().name()));
        }
        if n.len() == 0 || n.len() > Geometry::<F>::LEAF_CAP {
            return Err(format!("leaf length {} outside 1..={}", n.len(), Geometry::<F>::LEAF_CAP));
        }
        return Ok(());
    }
    if n.kind() != Kind::Branch {
        return Err(format!("expected node at height {height}, found {}", n.kind().name()));
    }
    if !(2..=3).contains(&n.len()) {
        return Err(format!("node arity {} at height {height}", n.len()));
    }
    for c in n.slots() {
        match c {
            Some(c) => check_digit(c, height - 1)?,
            None => return Err("empty slot in node".into()),
        }
    }
    Ok(())
}

fn check_finger<F: Flavor>(f: &Option<NodeRef<F>>, height: usize) -> std::result::Result<(), String> {
    let Some(f) = f else { return Err("missing finger".into()) };
    if f.kind() != Kind::Finger {
        return Err(format!("expected finger, found {}", f.kind().name()));
    }
    if !(1..=4).contains(&f.len()) {
        return Err(format!("finger with {} digits", f.len()));
    }
    if !f.measure_is_fresh() {
        return Err("stale measure on finger".into());
    }
    for d in f.slots() {
        match d {
            Some(d) => check_digit(d, height)?,
            None => return Err("empty slot in finger".into()),
        }
    }
    Ok(())
}

/// Returns the number of spine levels below `t`.
fn check_tree<F: Flavor>(t: &NodeRef<F>, height: usize) -> std::result::Result<usize, String> {
    if t.kind() != Kind::Deep {
        check_digit(t, height)?;
        return Ok(0);
    }
    if t.len() != 3 {
        return Err(format!("deep node with {} slots", t.len()));
    }
    if !t.measure_is_fresh() {
        return Err(format!("stale measure on deep node at height {height}"));
    }
    let s = t.slots();
    check_finger(&s[0], height)?;
    check_finger(&s[2], height)?;
    match &s[1] {
        None => Ok(1),
        Some(m) => Ok(1 + check_tree(m, height + 1)?),
    }
}

impl<F: Flavor> FingerTree<F>
where
    F::Elem: fmt::Debug,
{
    /// Parenthesized structure print: `(kind measure child*)`, leaves as `[e0 e1 ...]`.
    pub fn dump(&self) -> String {
        fn go<F: Flavor>(n: &NodeRef<F>, out: &mut String)
        where
            F::Elem: fmt::Debug,
        {
            if n.kind() == Kind::Leaf {
                out.push('[');
                for (i, e) in n.elems().iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{e:?}");
                }
                out.push(']');
                return;
            }
            let _ = write!(out, "({} {}", n.kind().name(), Compact(n.measure()));
            for c in n.slots().iter().flatten() {
                out.push(' ');
                go(c, out);
            }
            out.push(')');
        }
        let mut out = String::new();
        match &self.root {
            None => out.push_str("(empty)"),
            Some(r) => go(r, &mut out),
        }
        out
    }
}

impl<F: Flavor> fmt::Debug for FingerTree<F>
where
    F::Elem: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl<F: Flavor> PartialEq for FingerTree<F>
where
    F::Elem: PartialEq,
{
    fn eq(&self, other: &Self) -> bool {
        self.root_id() == other.root_id() || (self.len() == other.len() && self.iter().eq(other.iter()))
    }
}

impl<F: Flavor> FromIterator<F::Elem> for FingerTree<F> {
    fn from_iter<I: IntoIterator<Item = F::Elem>>(iter: I) -> Self {
        let mut t = FingerTree::new();
        let mut buf: Vec<F::Elem> = Vec::with_capacity(Geometry::<F>::LEAF_CAP);
        for x in iter {
            buf.push(x);
            if buf.len() == Geometry::<F>::LEAF_CAP {
                push_back_node(&mut t.root, NodeRef::leaf(&buf));
                buf.clear();
            }
        }
        if !buf.is_empty() {
            push_back_node(&mut t.root, NodeRef::leaf(&buf));
        }
        t
    }
}

impl<F: Flavor> Extend<F::Elem> for FingerTree<F> {
    fn extend<I: IntoIterator<Item = F::Elem>>(&mut self, iter: I) {
        for x in iter {
            self.push_back(x);
        }
    }
}

/// In-order iterator over a tree's elements.
pub struct Iter<'a, F: Flavor> {
    stack: Vec<(&'a NodeRef<F>, usize)>,
    leaf: &'a [F::Elem],
    remaining: usize,
}

impl<'a, F: Flavor> Iterator for Iter<'a, F> {
    type Item = &'a F::Elem;

    fn next(&mut self) -> Option<&'a F::Elem> {
        loop {
            if let Some((e, rest)) = self.leaf.split_first() {
                self.leaf = rest;
                self.remaining -= 1;
                return Some(e);
            }
            let (node, i) = self.stack.last_mut()?;
            let node: &'a NodeRef<F> = node;
            let slots = node.slots();
            if *i >= slots.len() {
                self.stack.pop();
                continue;
            }
            let c = slots[*i].as_ref();
            *i += 1;
            if let Some(c) = c {
                if c.kind() == Kind::Leaf {
                    self.leaf = c.elems();
                } else {
                    self.stack.push((c, 0));
                }
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl<F: Flavor> ExactSizeIterator for Iter<'_, F> {}
impl<F: Flavor> FusedIterator for Iter<'_, F> {}

impl<'a, F: Flavor> IntoIterator for &'a FingerTree<F> {
    type Item = &'a F::Elem;
    type IntoIter = Iter<'a, F>;

    fn into_iter(self) -> Iter<'a, F> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap;
    use crate::measure::{KeyRank, Seq, Size, Sorted};
    use std::collections::VecDeque;

    type T = FingerTree<Seq<u64>>;

    fn gapped() -> T {
        let mut t = T::new();
        for x in (1..=8).chain(10..=29) {
            t.push_back(x);
        }
        t
    }

    #[test]
    fn small_tree_dump() {
        let t: T = (1..=8).fold(T::new(), |mut t, x| {
            t.push_back(x);
            t
        });
        assert_eq!(t.dump(), "(deep 8 (finger 6 [1 2 3 4 5 6]) (finger 2 [7 8]))");
        assert_eq!(T::new().dump(), "(empty)");
    }

    #[test]
    fn push_back_30_copies_three_nodes() {
        let a = gapped();
        assert_eq!(
            a.dump(),
            "(deep 28 (finger 6 [1 2 3 4 5 6]) (finger 22 [7 8 10 11 12 13] \
             [14 15 16 17 18 19] [20 21 22 23 24 25] [26 27 28 29]))"
        );
        let before = heap::allocations();
        let mut b = a.clone();
        b.push_back(30);
        assert_eq!(heap::allocations() - before, 3);
        assert_eq!(a.len(), 28);
        assert_eq!(b.len(), 29);
        assert_eq!(*b.back().unwrap(), 30);
        assert_eq!(a.flatten(), (1..=8).chain(10..=29).collect::<Vec<_>>());
        assert_eq!(a.front(), Some(&1));
        assert_eq!(a.back(), Some(&29));
        assert_eq!(a.get(8), Some(&10));
        assert!(a.audit() && b.audit());
    }

    #[test]
    fn end_ops_match_deque() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut t = T::new();
        let mut d = VecDeque::new();
        for i in 0..10_000u64 {
            match rng.gen_range(0..6) {
                0 | 1 => {
                    t.push_back(i);
                    d.push_back(i);
                }
                2 => {
                    t.push_front(i);
                    d.push_front(i);
                }
                3 => assert_eq!(t.pop_back(), d.pop_back()),
                4 => assert_eq!(t.pop_front(), d.pop_front()),
                _ => {
                    assert_eq!(t.front(), d.front());
                    assert_eq!(t.back(), d.back());
                }
            }
            assert_eq!(t.len(), d.len());
            if i % 97 == 0 {
                t.check().unwrap();
            }
        }
        assert!(t.iter().eq(d.iter()));
    }

    #[test]
    fn sequential_push_back_flattens_in_order() {
        let mut t = T::new();
        for i in 0..10_000 {
            t.push_back(i);
        }
        assert_eq!(t.flatten(), (0..10_000).collect::<Vec<_>>());
        for i in (0..10_000).step_by(37) {
            assert_eq!(t.get(i as usize), Some(&i));
        }
        assert_eq!(t.get(10_000), None);
        t.check().unwrap();
    }

    #[test]
    fn split_examples() {
        let t: T = [1, 2, 3].into_iter().collect();
        let (l, x, r) = t.split_at(|m: &Size| m.0 > 0).unwrap();
        assert_eq!((l.flatten(), x, r.flatten()), (vec![], 1, vec![2, 3]));
        let (l, x, r) = t.split_at(|m: &Size| m.0 > 2).unwrap();
        assert_eq!((l.flatten(), x, r.flatten()), (vec![1, 2], 3, vec![]));
        assert!(t.split_at(|m: &Size| m.0 > 3).is_err());

        let s: FingerTree<Sorted<i32>> = [1, 4, 7, 9].into_iter().collect();
        let (l, x, r) = s.split_at(|m: &KeyRank<i32>| m.key.is_some_and(|k| k >= 7)).unwrap();
        assert_eq!((l.flatten(), x, r.flatten()), (vec![1, 4], 7, vec![9]));
    }

    #[test]
    fn split_everywhere_matches_oracle() {
        let t: T = (0..500).collect();
        for at in 0..=500usize {
            let mut l = t.clone();
            let r = l.split_off(at);
            l.check().unwrap();
            r.check().unwrap();
            assert_eq!(l.flatten(), (0..at as u64).collect::<Vec<_>>());
            assert_eq!(r.flatten(), (at as u64..500).collect::<Vec<_>>());
        }
        assert_eq!(t.len(), 500);
    }

    #[test]
    fn concat_matches_oracle() {
        let parts: Vec<T> = (0..10).map(|k| (k * 1000..(k + 1) * 1000).collect()).collect();
        let mut all = T::new();
        for p in &parts {
            let before = heap::allocations();
            all.append(p.clone());
            assert!(heap::allocations() - before <= 60);
            all.check().unwrap();
        }
        assert_eq!(all.flatten(), (0..10_000).collect::<Vec<_>>());
        assert_eq!(parts[3].flatten(), (3000..4000).collect::<Vec<_>>());
        let e = T::new();
        let before = heap::allocations();
        let same = e.concat(&parts[0]);
        assert_eq!(heap::allocations(), before);
        assert_eq!(same.root_id(), parts[0].root_id());
    }

    #[test]
    fn concat_small_pieces_in_every_shape() {
        for a in 0..40u64 {
            for b in 0..40u64 {
                let x: T = (0..a).collect();
                let y: T = (a..a + b).collect();
                let z = x.concat(&y);
                z.check().unwrap();
                assert_eq!(z.flatten(), (0..a + b).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn find_reports_position() {
        let s: FingerTree<Sorted<u64>> = (0..100).map(|x| x * 2).collect();
        let (pos, e) = s.find(|m| m.key.is_some_and(|k| k >= 51)).unwrap();
        assert_eq!((pos, *e), (26, 52));
        assert!(s.find(|m| m.key.is_some_and(|k| k >= 1000)).is_none());
    }

    #[test]
    fn dropping_a_tree_frees_every_node() {
        let before = heap::live_nodes();
        {
            let t: T = (0..5000).collect();
            let mut u = t.clone();
            for i in 0..300 {
                u.push_front(i);
                u.pop_back();
            }
            let _v = t.concat(&u);
        }
        assert_eq!(heap::live_nodes(), before);
    }
}
