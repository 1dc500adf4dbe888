//! Newick reading and canonical writing.
//!
//! Written trees are canonical: at every node the child whose subtree holds
//! the lexicographically smallest leaf label comes first, and branch lengths
//! are `parent height - child height` printed in shortest round-trip form.

use std::fmt::Write as _;

use crate::phylo::{NodeId, PhyloError, PhyloTree};

const SPECIAL: &[char] = &['(', ')', '[', ']', '\'', ':', ';', ',', '_', ' ', '\t', '\n', '\r'];

fn write_label(out: &mut String, label: &str) {
    if label.is_empty() || label.contains(SPECIAL) {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

pub fn to_newick(t: &PhyloTree) -> String {
    // smallest leaf label under each node decides child order
    let mut min_label: Vec<Option<&str>> = vec![None; t.nodes().len()];
    fn fill<'a>(t: &'a PhyloTree, id: NodeId, memo: &mut Vec<Option<&'a str>>) -> &'a str {
        let node = t.node(id);
        let m = match &node.label {
            Some(l) if node.is_leaf() => l.as_str(),
            _ => node
                .children
                .iter()
                .map(|&c| fill(t, c, memo))
                .min()
                .expect("internal node has children"),
        };
        memo[id] = Some(m);
        m
    }
    fill(t, t.root(), &mut min_label);

    fn emit(t: &PhyloTree, id: NodeId, memo: &[Option<&str>], out: &mut String) {
        let node = t.node(id);
        if node.is_leaf() {
            write_label(out, node.label.as_deref().expect("leaf label"));
            return;
        }
        let mut kids = node.children.clone();
        kids.sort_by_key(|&c| memo[c]);
        out.push('(');
        for (k, &c) in kids.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            emit(t, c, memo, out);
            let _ = write!(out, ":{}", node.height - t.node(c).height);
        }
        out.push(')');
    }
    let mut out = String::new();
    emit(t, t.root(), &min_label, &mut out);
    out.push(';');
    out
}

/// Parses a rooted binary Newick tree with branch lengths on every edge.
///
/// Node heights are recovered from root-to-leaf path lengths; leaves whose
/// depths disagree by more than `1e-9` relative to the tree depth are
/// rejected as non-ultrametric.
pub fn parse_newick(text: &str) -> Result<PhyloTree, PhyloError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let root = p.subtree()?;
    p.skip_ws();
    if p.peek() == Some(b':') {
        p.pos += 1;
        p.number()?;
        p.skip_ws();
    }
    p.expect(b';')?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after `;`"));
    }

    // depth of every leaf below the root
    let mut depths = Vec::new();
    collect_depths(&root, 0.0, &mut depths);
    let max = depths.iter().copied().fold(0.0, f64::max);
    let min = depths.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min > 1e-9 * max.max(1.0) {
        return Err(PhyloError::Invalid(format!(
            "tree is not ultrametric: leaf depths range from {min} to {max}"
        )));
    }
    build(&root, max)
}

#[derive(Debug)]
struct Raw {
    label: Option<String>,
    length: f64,
    children: Vec<Raw>,
}

fn collect_depths(node: &Raw, depth: f64, out: &mut Vec<f64>) {
    if node.children.is_empty() {
        out.push(depth);
    }
    for c in &node.children {
        collect_depths(c, depth + c.length, out);
    }
}

fn build(node: &Raw, height: f64) -> Result<PhyloTree, PhyloError> {
    match node.children.as_slice() {
        [] => Ok(PhyloTree::leaf(
            node.label.clone().ok_or_else(|| PhyloError::Invalid("unlabeled leaf".into()))?,
        )),
        [l, r] => {
            let lt = build(l, (height - l.length).max(0.0))?;
            let rt = build(r, (height - r.length).max(0.0))?;
            let floor = lt.height().max(rt.height());
            PhyloTree::join(lt, rt, height.max(floor))
        }
        kids => Err(PhyloError::Invalid(format!(
            "node with {} children; trees are binary",
            kids.len()
        ))),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PhyloError {
        PhyloError::Newick {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), PhyloError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", b as char)))
        }
    }

    fn subtree(&mut self) -> Result<Raw, PhyloError> {
        self.skip_ws();
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let mut child = self.subtree()?;
                self.skip_ws();
                self.expect(b':')
                    .map_err(|_| self.err("every edge needs a branch length"))?;
                child.length = self.number()?;
                if child.length < 0.0 {
                    return Err(self.err("negative branch length"));
                }
                children.push(child);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        self.skip_ws();
        let label = self.label()?;
        Ok(Raw {
            label,
            length: 0.0,
            children,
        })
    }

    fn label(&mut self) -> Result<Option<String>, PhyloError> {
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            let mut out = Vec::new();
            loop {
                match self.peek() {
                    None => return Err(self.err("unterminated quoted label")),
                    Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                        out.push(b'\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b) => {
                        out.push(b);
                        self.pos += 1;
                    }
                }
            }
            return String::from_utf8(out)
                .map(Some)
                .map_err(|_| self.err("label is not UTF-8"));
        }
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || b"()[]':;,".contains(&b) {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        let raw = std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.err("label is not UTF-8"))?;
        // unquoted underscores stand for spaces
        Ok(Some(raw.replace('_', " ")))
    }

    fn number(&mut self) -> Result<f64, PhyloError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit() || b"+-.eE".contains(&b)) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| PhyloError::Newick {
                pos: start,
                msg: "invalid branch length".into(),
            })
    }
}
