//! Container façades over [`FingerTree`](crate::FingerTree).
//!
//! Methods that take `&mut self` rebind the handle to a new version; every
//! other copy keeps its old version. Each such method has a `with_*` twin that
//! returns the new version instead.

mod map;
mod set;
mod string;
mod vector;

pub use map::{MapIter, MultiMap, SortedKv, SortedMap};
pub use set::{Compare, MultiSet, Natural, Reverse, SetIter, SortedSeq, SortedSet};
pub use string::{StrIter, Utf8String};
pub use vector::{VecIter, Vector};
