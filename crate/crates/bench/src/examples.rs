//! The three example programs: ASCII filtering, reachability filtering and a
//! text editor with undo, each checked against a naive oracle.

use std::fmt;

use fpp::{heap, End, StrIter, Utf8String, Vector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Drops every scalar at or above 0x7F.
pub fn filter_ascii(s: &Utf8String) -> Utf8String {
    let mut i = s.begin();
    while i != End {
        if i.get().unwrap() as u32 >= 0x7F {
            i.erase().unwrap();
        } else {
            i.advance().unwrap();
        }
    }
    i.into_value()
}

pub fn filter_ascii_oracle(s: &str) -> String {
    s.chars().filter(|c| (*c as u32) < 0x7F).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stmt {
    Label(u32),
    Goto(u32),
    Op(u32),
}

/// Removes statements that follow a `goto` and precede the next label.
pub fn filter_reachable(stmts: &Vector<Stmt>) -> Vector<Stmt> {
    let mut reach = true;
    let mut it = stmts.begin();
    while it != End {
        let s = *it.get().unwrap();
        if matches!(s, Stmt::Label(_)) {
            reach = true;
        }
        if reach {
            if matches!(s, Stmt::Goto(_)) {
                reach = false;
            }
            it.advance().unwrap();
        } else {
            it.erase().unwrap();
        }
    }
    it.into_value()
}

/// Marks reachability in one pass, keeps the marked statements in a second.
pub fn filter_reachable_oracle(stmts: &[Stmt]) -> Vec<Stmt> {
    let mut keep = Vec::with_capacity(stmts.len());
    let mut reach = true;
    for s in stmts {
        if matches!(s, Stmt::Label(_)) {
            reach = true;
        }
        keep.push(reach);
        if reach && matches!(s, Stmt::Goto(_)) {
            reach = false;
        }
    }
    stmts.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| *s).collect()
}

/// Editor whose history entries are cursor snapshots.
pub struct Editor {
    cursor: StrIter,
    undo: Vec<StrIter>,
    redo: Vec<StrIter>,
    /// Pool allocations made by the most expensive commit so far.
    pub max_commit_allocs: u64,
}

impl Default for Editor {
    fn default() -> Self {
        Editor { cursor: Utf8String::new().begin(), undo: Vec::new(), redo: Vec::new(), max_commit_allocs: 0 }
    }
}

impl Editor {
    pub fn new() -> Self {
        Self::default()
    }

    fn commit(&mut self) {
        let before = heap::allocations();
        self.undo.push(self.cursor.clone());
        self.redo.clear();
        self.max_commit_allocs = self.max_commit_allocs.max(heap::allocations() - before);
    }

    pub fn insert(&mut self, c: char) {
        self.commit();
        self.cursor.insert(c).unwrap();
    }

    pub fn backspace(&mut self) {
        if self.cursor.pos() == 0 {
            return;
        }
        self.commit();
        self.cursor.retreat().unwrap();
        self.cursor.erase().unwrap();
    }

    pub fn left(&mut self) {
        if self.cursor.pos() > 0 {
            self.cursor.retreat().unwrap();
        }
    }

    pub fn right(&mut self) {
        if self.cursor != End {
            self.cursor.advance().unwrap();
        }
    }

    pub fn undo(&mut self) {
        if let Some(prev) = self.undo.pop() {
            self.redo.push(std::mem::replace(&mut self.cursor, prev));
        }
    }

    pub fn redo(&mut self) {
        if let Some(next) = self.redo.pop() {
            self.undo.push(std::mem::replace(&mut self.cursor, next));
        }
    }

    pub fn text(&self) -> Utf8String {
        self.cursor.value()
    }

    pub fn pos(&self) -> usize {
        self.cursor.pos()
    }

    pub fn history(&self) -> (usize, usize) {
        (self.undo.len(), self.redo.len())
    }
}

/// The same editor storing full copies of the buffer.
#[derive(Default)]
pub struct NaiveEditor {
    buf: Vec<char>,
    pos: usize,
    undo: Vec<(Vec<char>, usize)>,
    redo: Vec<(Vec<char>, usize)>,
}

impl NaiveEditor {
    fn commit(&mut self) {
        self.undo.push((self.buf.clone(), self.pos));
        self.redo.clear();
    }

    pub fn insert(&mut self, c: char) {
        self.commit();
        self.buf.insert(self.pos, c);
        self.pos += 1;
    }

    pub fn backspace(&mut self) {
        if self.pos == 0 {
            return;
        }
        self.commit();
        self.pos -= 1;
        self.buf.remove(self.pos);
    }

    pub fn left(&mut self) {
        self.pos = self.pos.saturating_sub(1);
    }

    pub fn right(&mut self) {
        if self.pos < self.buf.len() {
            self.pos += 1;
        }
    }

    pub fn undo(&mut self) {
        if let Some(prev) = self.undo.pop() {
            let cur = std::mem::replace(&mut self.buf, prev.0);
            self.redo.push((cur, std::mem::replace(&mut self.pos, prev.1)));
        }
    }

    pub fn redo(&mut self) {
        if let Some(next) = self.redo.pop() {
            let cur = std::mem::replace(&mut self.buf, next.0);
            self.undo.push((cur, std::mem::replace(&mut self.pos, next.1)));
        }
    }

    pub fn text(&self) -> String {
        self.buf.iter().collect()
    }

    pub fn pos(&self) -> usize {
        self.pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Insert(char),
    Backspace,
    Left,
    Right,
    Undo,
    Redo,
}

pub fn random_text(rng: &mut StdRng, len: usize, non_ascii: f64) -> String {
    const WIDE: [char; 6] = ['é', 'ß', '€', '✓', '😀', '\u{7F}'];
    (0..len)
        .map(|_| {
            if rng.gen_bool(non_ascii) {
                WIDE[rng.gen_range(0..WIDE.len())]
            } else {
                rng.gen_range(0x20u8..0x7F) as char
            }
        })
        .collect()
}

pub fn random_stmts(rng: &mut StdRng, len: usize) -> Vec<Stmt> {
    (0..len)
        .map(|i| match rng.gen_range(0..10) {
            0 => Stmt::Label(i as u32),
            1 => Stmt::Goto(i as u32),
            _ => Stmt::Op(i as u32),
        })
        .collect()
}

pub fn random_edits(rng: &mut StdRng, len: usize) -> Vec<Edit> {
    (0..len)
        .map(|_| match rng.gen_range(0..12) {
            0..=4 => Edit::Insert(if rng.gen_bool(0.2) { 'ü' } else { rng.gen_range(b'a'..=b'z') as char }),
            5 | 6 => Edit::Backspace,
            7 => Edit::Left,
            8 => Edit::Right,
            9 | 10 => Edit::Undo,
            _ => Edit::Redo,
        })
        .collect()
}

/// Largest pool allocation count a single editor commit may make.
pub const COMMIT_ALLOC_BOUND: u64 = 2;

pub fn run_editor(edits: &[Edit]) -> Result<Editor, String> {
    let mut e = Editor::new();
    let mut n = NaiveEditor::default();
    for (step, op) in edits.iter().enumerate() {
        match *op {
            Edit::Insert(c) => {
                e.insert(c);
                n.insert(c);
            }
            Edit::Backspace => {
                e.backspace();
                n.backspace();
            }
            Edit::Left => {
                e.left();
                n.left();
            }
            Edit::Right => {
                e.right();
                n.right();
            }
            Edit::Undo => {
                e.undo();
                n.undo();
            }
            Edit::Redo => {
                e.redo();
                n.redo();
            }
        }
        if e.pos() != n.pos() || e.text() != n.text().as_str() {
            return Err(format!("step {step} ({op:?}): got {:?}@{}, want {:?}@{}", e.text(), e.pos(), n.text(), n.pos()));
        }
    }
    if e.max_commit_allocs > COMMIT_ALLOC_BOUND {
        return Err(format!("a commit made {} allocations", e.max_commit_allocs));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    fn push(&mut self, name: &str, r: Result<String, String>) {
        let (pass, detail) = match r {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.lines.push(CheckLine { name: name.to_string(), pass, detail });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail)?;
        }
        Ok(())
    }
}

fn corpus_ascii(seed: u64, scripts: usize) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for k in 0..scripts {
        let len = rng.gen_range(0..2000);
        let p = [0.0, 0.05, 0.5, 1.0][k % 4];
        let text = random_text(&mut rng, len, p);
        let s = Utf8String::from(text.as_str());
        let got = filter_ascii(&s);
        if got != filter_ascii_oracle(&text).as_str() || got.check().is_err() {
            return Err(format!("seed {seed} script {k}: mismatch"));
        }
        if s != text.as_str() {
            return Err(format!("seed {seed} script {k}: input changed"));
        }
    }
    Ok(format!("{scripts} strings match the code-point filter"))
}

fn corpus_reachable(seed: u64, scripts: usize) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5b);
    for k in 0..scripts {
        let len = rng.gen_range(0..3000);
        let stmts = random_stmts(&mut rng, len);
        let v: Vector<Stmt> = stmts.iter().copied().collect();
        let got = filter_reachable(&v);
        if got.to_vec() != filter_reachable_oracle(&stmts) || got.check().is_err() {
            return Err(format!("seed {seed} script {k}: mismatch"));
        }
    }
    Ok(format!("{scripts} statement lists match the two-pass filter"))
}

fn corpus_editor(seed: u64, scripts: usize) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5d);
    let mut worst = 0;
    for k in 0..scripts {
        let len = rng.gen_range(0..1500);
        let edits = random_edits(&mut rng, len);
        let e = run_editor(&edits).map_err(|m| format!("seed {seed} script {k}: {m}"))?;
        worst = worst.max(e.max_commit_allocs);
    }
    Ok(format!("{scripts} edit scripts match the copying editor; max commit allocations {worst}"))
}

/// Net live nodes left behind by filtering all-ASCII text of length `n`.
pub fn ascii_filter_net_nodes(n: usize) -> (u64, bool) {
    let text: String = (0..n).map(|i| (b'a' + (i % 26) as u8) as char).collect();
    let s = Utf8String::from(text.as_str());
    let before = heap::live_nodes();
    let out = filter_ascii(&s);
    let net = heap::live_nodes() - before;
    (net, out == s)
}

pub fn run_examples(seed: u64) -> Report {
    let mut r = Report::default();
    r.push("filterAscii", corpus_ascii(seed, 200));
    r.push("filterReachable", corpus_reachable(seed, 200));
    r.push("editor", corpus_editor(seed, 200));
    let (net, same) = ascii_filter_net_nodes(10_000);
    r.push(
        "filterAscii sharing",
        if same && net as f64 <= 4.0 * (10_000f64).log2() {
            Ok(format!("{net} net new nodes for 10^4 ASCII scalars"))
        } else {
            Err(format!("{net} net new nodes, output equal: {same}"))
        },
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_inputs() {
        assert_eq!(filter_ascii(&Utf8String::from("héllo")), "hllo");
        let s = [Stmt::Op(0), Stmt::Goto(1), Stmt::Op(2), Stmt::Label(3), Stmt::Op(4)];
        let v: Vector<Stmt> = s.into_iter().collect();
        assert_eq!(filter_reachable(&v).to_vec(), vec![Stmt::Op(0), Stmt::Goto(1), Stmt::Label(3), Stmt::Op(4)]);
    }

    #[test]
    fn undo_then_redo() {
        let e = run_editor(&[Edit::Insert('a'), Edit::Insert('b'), Edit::Undo, Edit::Redo]).unwrap();
        assert_eq!(e.text(), "ab");
        assert_eq!(e.pos(), 2);
    }

    #[test]
    fn empty_script() {
        let e = run_editor(&[]).unwrap();
        assert!(e.text().is_empty());
        assert_eq!(e.history(), (0, 0));
    }

    #[test]
    fn commits_are_free() {
        let mut rng = StdRng::seed_from_u64(1);
        let e = run_editor(&random_edits(&mut rng, 3000)).unwrap();
        assert_eq!(e.max_commit_allocs, 0);
    }

    #[test]
    fn ascii_filter_shares_everything() {
        let (net, same) = ascii_filter_net_nodes(10_000);
        assert!(same);
        assert_eq!(net, 0);
    }

    #[test]
    fn corpus_passes() {
        let r = run_examples(7);
        assert!(r.passed(), "{r}");
    }
}
