//! Persistent containers built on one measured finger tree, with persistent
//! iterators implemented as zippers.
//!
//! Every container is a value: updates produce a new version and leave all
//! other versions (and all iterators) untouched, while sharing unmodified
//! structure. Nodes live in 64-byte slots of a per-thread pool; see [`heap`].

pub mod containers;
pub mod error;
pub mod heap;
pub mod measure;
mod node;
pub mod pool;
pub mod tree;
pub mod zipper;

pub use containers::{
    Compare, MapIter, MultiMap, MultiSet, Natural, Reverse, SetIter, SortedMap, SortedSet, StrIter, Utf8String, VecIter,
    Vector,
};
pub use error::{Error, Result};
pub use measure::{KeyRank, Monoid, Size, Utf8Measure};
pub use node::leaf_capacity;
pub use tree::FingerTree;
pub use zipper::{ByChar, ByElem, Cursor, End, Grain};
