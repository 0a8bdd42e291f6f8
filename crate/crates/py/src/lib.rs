//! Python bindings. Every class is confined to the thread that made it,
//! because node storage is thread-local.

use fpp::{Error, SortedMap, SortedSet, Utf8String, VecIter, Vector};
use pyo3::exceptions::{PyIndexError, PyKeyError, PyStopIteration, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::OutOfRange { .. } | Error::Empty | Error::AtEnd | Error::AtBegin => PyIndexError::new_err(e.to_string()),
        Error::KeyNotFound => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn index(i: isize, len: usize) -> PyResult<usize> {
    let j = if i < 0 { i + len as isize } else { i };
    if j < 0 || j as usize >= len {
        return Err(PyIndexError::new_err(format!("index {i} out of range for length {len}")));
    }
    Ok(j as usize)
}

/// Persistent vector of integers. `with_*` methods return new vectors.
#[pyclass(name = "Vector", unsendable)]
#[derive(Clone)]
struct PyVector(Vector<i64>);

#[pymethods]
impl PyVector {
    #[new]
    #[pyo3(signature = (items=Vec::new()))]
    fn new(items: Vec<i64>) -> Self {
        PyVector(items.into_iter().collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, i: isize) -> PyResult<i64> {
        Ok(self.0[index(i, self.0.len())?])
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Vector({:?})", self.0.to_vec())
    }

    fn to_list(&self) -> Vec<i64> {
        self.0.to_vec()
    }

    fn push_back(&mut self, x: i64) {
        self.0.push_back(x);
    }

    fn push_front(&mut self, x: i64) {
        self.0.push_front(x);
    }

    fn pop_back(&mut self) -> PyResult<i64> {
        self.0.pop_back().ok_or_else(|| err(Error::Empty))
    }

    fn pop_front(&mut self) -> PyResult<i64> {
        self.0.pop_front().ok_or_else(|| err(Error::Empty))
    }

    fn set(&mut self, i: isize, x: i64) -> PyResult<()> {
        let i = index(i, self.0.len())?;
        self.0.set(i, x).map_err(err)
    }

    fn with_push_back(&self, x: i64) -> Self {
        PyVector(self.0.with_push_back(x))
    }

    fn with_set(&self, i: isize, x: i64) -> PyResult<Self> {
        let i = index(i, self.0.len())?;
        self.0.with_set(i, x).map(PyVector).map_err(err)
    }

    fn concat(&self, other: &Self) -> Self {
        PyVector(self.0.concat(&other.0))
    }

    fn split_off(&mut self, at: usize) -> PyResult<Self> {
        self.0.split_off(at).map(PyVector).map_err(err)
    }

    fn begin(&self) -> PyVecIter {
        PyVecIter(self.0.begin())
    }

    fn iter_at(&self, i: usize) -> PyVecIter {
        PyVecIter(self.0.iter_at(i))
    }

    fn check(&self) -> PyResult<()> {
        self.0.check().map_err(PyValueError::new_err)
    }

    fn dump(&self) -> String {
        self.0.dump()
    }
}

/// Persistent cursor into a vector. Edits produce a new version reachable
/// through `value()`; the vector it came from is untouched.
#[pyclass(name = "VecIter", unsendable)]
#[derive(Clone)]
struct PyVecIter(VecIter<i64>);

#[pymethods]
impl PyVecIter {
    fn get(&self) -> Option<i64> {
        self.0.get().copied()
    }

    fn pos(&self) -> usize {
        self.0.pos()
    }

    fn is_end(&self) -> bool {
        self.0.is_end()
    }

    fn copy(&self) -> Self {
        self.clone()
    }

    fn advance(&mut self) -> PyResult<()> {
        self.0.advance().map_err(err)
    }

    fn retreat(&mut self) -> PyResult<()> {
        self.0.retreat().map_err(err)
    }

    fn seek(&mut self, n: isize) -> PyResult<()> {
        self.0.seek(n).map_err(err)
    }

    fn assign(&mut self, x: i64) -> PyResult<()> {
        self.0.assign(x).map_err(err)
    }

    fn insert(&mut self, x: i64) -> PyResult<()> {
        self.0.insert(x).map_err(err)
    }

    fn erase(&mut self) -> PyResult<()> {
        self.0.erase().map_err(err)
    }

    fn value(&self) -> PyVector {
        PyVector(self.0.value())
    }
}

/// Persistent sorted set of integers.
#[pyclass(name = "SortedSet", unsendable)]
#[derive(Clone)]
struct PySortedSet(SortedSet<i64>);

#[pymethods]
impl PySortedSet {
    #[new]
    #[pyo3(signature = (items=Vec::new()))]
    fn new(items: Vec<i64>) -> Self {
        PySortedSet(items.into_iter().collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, x: i64) -> bool {
        self.0.contains(&x)
    }

    fn __getitem__(&self, i: isize) -> PyResult<i64> {
        let i = index(i, self.0.len())?;
        self.0.at(i).copied().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SortedSet({:?})", self.0.to_vec())
    }

    fn to_list(&self) -> Vec<i64> {
        self.0.to_vec()
    }

    fn insert(&mut self, x: i64) -> bool {
        self.0.insert(x)
    }

    fn erase(&mut self, x: i64) -> bool {
        self.0.erase(&x)
    }

    fn with_insert(&self, x: i64) -> Self {
        let mut s = self.clone();
        s.0.insert(x);
        s
    }

    fn lower_rank(&self, x: i64) -> usize {
        self.0.lower_rank(&x)
    }

    fn as_vector(&self) -> Vec<i64> {
        self.0.as_vector().to_vec()
    }

    fn check(&self) -> PyResult<()> {
        self.0.check().map_err(PyValueError::new_err)
    }
}

/// Persistent sorted map from integers to integers.
#[pyclass(name = "SortedMap", unsendable)]
#[derive(Clone)]
struct PySortedMap(SortedMap<i64, i64>);

#[pymethods]
impl PySortedMap {
    #[new]
    #[pyo3(signature = (items=Vec::new()))]
    fn new(items: Vec<(i64, i64)>) -> Self {
        let mut m = SortedMap::new();
        for (k, v) in items {
            m.insert(k, v);
        }
        PySortedMap(m)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, k: i64) -> bool {
        self.0.contains_key(&k)
    }

    fn __getitem__(&self, k: i64) -> PyResult<i64> {
        self.0.at(&k).copied().map_err(err)
    }

    fn __setitem__(&mut self, k: i64, v: i64) {
        self.0.insert(k, v);
    }

    fn __delitem__(&mut self, k: i64) -> PyResult<()> {
        self.0.erase(&k).map(|_| ()).ok_or_else(|| err(Error::KeyNotFound))
    }

    fn get(&self, k: i64) -> Option<i64> {
        self.0.get(&k).copied()
    }

    fn with_insert(&self, k: i64, v: i64) -> Self {
        PySortedMap(self.0.with_insert(k, v))
    }

    fn items(&self) -> Vec<(i64, i64)> {
        self.0.to_vec()
    }

    fn check(&self) -> PyResult<()> {
        self.0.check().map_err(PyValueError::new_err)
    }
}

/// Persistent UTF-8 string indexed by code point.
#[pyclass(name = "Utf8String", unsendable)]
#[derive(Clone)]
struct PyUtf8String(Utf8String);

#[pymethods]
impl PyUtf8String {
    #[new]
    #[pyo3(signature = (s=""))]
    fn new(s: &str) -> Self {
        PyUtf8String(Utf8String::from(s))
    }

    #[staticmethod]
    fn from_bytes(b: Vec<u8>) -> PyResult<Self> {
        Utf8String::from_utf8(&b).map(PyUtf8String).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Utf8String({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __iter__(&self) -> PyStrChars {
        PyStrChars(self.0.chars().collect(), 0)
    }

    fn __getitem__(&self, i: isize) -> PyResult<char> {
        let i = index(i, self.0.len())?;
        self.0.at(i).map_err(err)
    }

    fn byte_size(&self) -> usize {
        self.0.byte_size()
    }

    fn push(&mut self, c: char) {
        self.0.push(c);
    }

    fn push_str(&mut self, s: &str) {
        self.0.push_str(s);
    }

    fn concat(&self, other: &Self) -> Self {
        PyUtf8String(self.0.concat(&other.0))
    }

    fn slice(&self, start: usize, end: usize) -> PyResult<Self> {
        self.0.slice(start, end).map(PyUtf8String).map_err(err)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes()
    }

    fn check(&self) -> PyResult<()> {
        self.0.check().map_err(PyValueError::new_err)
    }
}

#[pyclass(name = "StrChars", unsendable)]
struct PyStrChars(Vec<char>, usize);

#[pymethods]
impl PyStrChars {
    fn __iter__(slf: PyRef<'_, Self>) -> PyRef<'_, Self> {
        slf
    }

    fn __next__(&mut self) -> PyResult<char> {
        let c = self.0.get(self.1).copied().ok_or_else(|| PyStopIteration::new_err(()))?;
        self.1 += 1;
        Ok(c)
    }
}

/// Nodes currently allocated by this thread's heap.
#[pyfunction]
fn live_nodes() -> u64 {
    fpp::heap::live_nodes()
}

#[pymodule]
fn pyfpp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVector>()?;
    m.add_class::<PyVecIter>()?;
    m.add_class::<PySortedSet>()?;
    m.add_class::<PySortedMap>()?;
    m.add_class::<PyUtf8String>()?;
    m.add_class::<PyStrChars>()?;
    m.add_function(wrap_pyfunction!(live_nodes, m)?)?;
    Ok(())
}
