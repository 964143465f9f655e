//! Factorization forests over a word, and the structural queries used by the
//! membership procedure: iterable nodes, dependencies, frontiers, bases and
//! node types.
//!
//! Positions are 1-based. Nodes live in an arena indexed by [`NodeId`], the
//! root being node 0; [`NodeRef`] is the equivalent child-index path.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::monoid::{Element, Morphism, Symbol};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Leaf,
    Binary,
    Idempotent,
}

/// Child-index path from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(pub Vec<usize>);

/// A tree before it is attached to a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Leaf(Symbol),
    Node(Vec<Tree>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeType {
    pub depth: usize,
    pub m: Element,
    pub n: Element,
    pub e: Element,
    pub m_inner: Element,
    pub n_inner: Element,
    pub u: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    kind: NodeKind,
    /// The letter carried by a leaf.
    letter: Symbol,
    depth: usize,
    min: usize,
    max: usize,
    value: Element,
    height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    morphism: Morphism,
    word: Vec<Symbol>,
    nodes: Vec<Node>,
}

impl Forest {
    /// Attaches `tree` to `word` without checking the factorization laws;
    /// see [`Forest::validate`]. Fails only if the tree has an empty node or
    /// the wrong number of leaves.
    pub fn from_tree(morphism: &Morphism, word: &[Symbol], tree: &Tree) -> Result<Forest> {
        morphism.alphabet().check_word(word)?;
        let mut f = Forest { morphism: morphism.clone(), word: word.to_vec(), nodes: Vec::new() };
        let mut next = 1;
        f.attach(tree, None, 1, &mut next)?;
        if next != word.len() + 1 {
            return Err(Error::InvalidNode(format!("{} leaves for a word of length {}", next - 1, word.len())));
        }
        Ok(f)
    }

    fn attach(&mut self, tree: &Tree, parent: Option<NodeId>, depth: usize, next: &mut usize) -> Result<NodeId> {
        let id = self.nodes.len();
        let m = self.morphism.monoid();
        let node = match tree {
            Tree::Leaf(a) => {
                self.morphism.alphabet().check_word(&[*a])?;
                let pos = *next;
                *next += 1;
                Node {
                    parent,
                    children: Vec::new(),
                    kind: NodeKind::Leaf,
                    letter: *a,
                    depth,
                    min: pos,
                    max: pos,
                    value: self.morphism.letter(*a),
                    height: 1,
                }
            }
            Tree::Node(kids) => {
                if kids.is_empty() {
                    return Err(Error::InvalidNode("node without children".into()));
                }
                let kind = if kids.len() == 2 { NodeKind::Binary } else { NodeKind::Idempotent };
                Node {
                    parent,
                    children: Vec::new(),
                    kind,
                    letter: 0,
                    depth,
                    min: *next,
                    max: 0,
                    value: m.identity(),
                    height: 0,
                }
            }
        };
        self.nodes.push(node);
        if let Tree::Node(kids) = tree {
            let mut children = Vec::with_capacity(kids.len());
            for k in kids {
                children.push(self.attach(k, Some(id), depth + 1, next)?);
            }
            let m = self.morphism.monoid();
            let value = m.product(children.iter().map(|&c| self.nodes[c].value));
            let height = 1 + children.iter().map(|&c| self.nodes[c].height).max().unwrap_or(0);
            let n = &mut self.nodes[id];
            n.max = *next - 1;
            n.value = value;
            n.height = height;
            n.children = children;
        }
        Ok(id)
    }

    /// Checks the factorization laws: leaves spell the word, binary nodes
    /// have two children, other inner nodes have at least three children
    /// sharing one idempotent image.
    pub fn validate(&self) -> bool {
        let m = self.morphism.monoid();
        self.nodes.iter().all(|n| match n.kind {
            NodeKind::Leaf => self.word.get(n.min - 1) == Some(&n.letter),
            NodeKind::Binary => n.children.len() == 2,
            NodeKind::Idempotent => {
                let e = self.nodes[n.children[0]].value;
                n.children.len() >= 3 && m.is_idempotent(e) && n.children.iter().all(|&c| self.nodes[c].value == e)
            }
        })
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// Height of the whole forest; a leaf has height 1.
    pub fn height(&self) -> usize {
        self.nodes[0].height
    }

    pub fn node_height(&self, id: NodeId) -> usize {
        self.nodes[id].height
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Depth of a node; the root has depth 1.
    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id].depth
    }

    pub fn min(&self, id: NodeId) -> usize {
        self.nodes[id].min
    }

    pub fn max(&self, id: NodeId) -> usize {
        self.nodes[id].max
    }

    /// μ of the span `w[min:max]`.
    pub fn value(&self, id: NodeId) -> Element {
        self.nodes[id].value
    }

    /// μ of the word on the left of the node.
    pub fn left(&self, id: NodeId) -> Element {
        self.morphism.eval(&self.word[..self.min(id) - 1])
    }

    /// μ of the word on the right of the node.
    pub fn right(&self, id: NodeId) -> Element {
        self.morphism.eval(&self.word[self.max(id)..])
    }

    /// Left of `id` inside the subtree rooted at its ancestor `within`.
    pub fn left_within(&self, id: NodeId, within: NodeId) -> Element {
        self.morphism.eval(&self.word[self.min(within) - 1..self.min(id) - 1])
    }

    /// Right of `id` inside the subtree rooted at its ancestor `within`.
    pub fn right_within(&self, id: NodeId, within: NodeId) -> Element {
        self.morphism.eval(&self.word[self.max(id)..self.max(within)])
    }

    /// Whether `a` is an ancestor of `b` (non-strict).
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Ancestors of `id` (inclusive, bottom-up).
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        while let Some(p) = self.nodes[*out.last().unwrap()].parent {
            out.push(p);
        }
        out
    }

    /// Ancestors of `id` together with their immediate left and right siblings.
    pub fn up(&self, id: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for a in self.ancestors(id) {
            out.insert(a);
            if let Some(p) = self.nodes[a].parent {
                let kids = &self.nodes[p].children;
                let i = kids.iter().position(|&k| k == a).unwrap();
                if i > 0 {
                    out.insert(kids[i - 1]);
                }
                if let Some(&r) = kids.get(i + 1) {
                    out.insert(r);
                }
            }
        }
        out
    }

    /// Resolves a path.
    pub fn node(&self, path: &NodeRef) -> Result<NodeId> {
        let mut id = 0;
        for &i in &path.0 {
            id = *self.nodes[id]
                .children
                .get(i)
                .ok_or_else(|| Error::InvalidNode(format!("path {:?} does not resolve", path.0)))?;
        }
        Ok(id)
    }

    pub fn path(&self, id: NodeId) -> NodeRef {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(self.nodes[p].children.iter().position(|&k| k == cur).unwrap());
            cur = p;
        }
        path.reverse();
        NodeRef(path)
    }

    fn is_middle_child(&self, id: NodeId) -> bool {
        match self.nodes[id].parent {
            Some(p) => {
                let kids = &self.nodes[p].children;
                kids[0] != id && kids[kids.len() - 1] != id
            }
            None => false,
        }
    }

    /// Middle children of inner nodes, in preorder.
    pub fn iterable_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&i| self.is_middle_child(i)).collect()
    }

    pub fn is_iterable(&self, id: NodeId) -> bool {
        self.is_middle_child(id)
    }

    /// The root followed by the iterable nodes.
    pub fn parti(&self) -> Vec<NodeId> {
        let mut out = vec![0];
        out.extend(self.iterable_nodes());
        out
    }

    /// The node plus, recursively, the dependencies of its first and last
    /// children (preorder).
    pub fn dependency(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            let kids = &self.nodes[n].children;
            if let (Some(&first), Some(&last)) = (kids.first(), kids.last()) {
                if last != first {
                    stack.push(last);
                }
                stack.push(first);
            }
        }
        out
    }

    /// Positions (ascending) of the leaves in the dependency of `id`.
    pub fn frontier(&self, id: NodeId) -> Vec<usize> {
        self.dependency(id)
            .into_iter()
            .filter(|&n| self.nodes[n].kind == NodeKind::Leaf)
            .map(|n| self.nodes[n].min)
            .collect()
    }

    /// The letters at the frontier of `id`.
    pub fn frontier_word(&self, id: NodeId) -> Vec<Symbol> {
        self.frontier(id).into_iter().map(|p| self.word[p - 1]).collect()
    }

    /// Whether the dependencies of the root and the iterable nodes partition
    /// the nodes, and their frontiers partition the positions.
    pub fn partition_check(&self) -> bool {
        let mut seen_nodes = vec![false; self.nodes.len()];
        let mut seen_positions = vec![false; self.word.len() + 1];
        for i in self.parti() {
            for n in self.dependency(i) {
                if std::mem::replace(&mut seen_nodes[n], true) {
                    return false;
                }
            }
            for p in self.frontier(i) {
                if std::mem::replace(&mut seen_positions[p], true) {
                    return false;
                }
            }
        }
        seen_nodes.iter().all(|&b| b) && seen_positions[1..].iter().all(|&b| b)
    }

    /// The topmost iterable ancestor of `id`: the middle child of its basis.
    pub fn mid(&self, id: NodeId) -> Result<NodeId> {
        if !self.is_middle_child(id) {
            return Err(Error::InvalidNode(format!("node {} is not iterable", self.path(id))));
        }
        Ok(self.ancestors(id).into_iter().rfind(|&a| self.is_middle_child(a)).unwrap())
    }

    /// The unique idempotent node of the root dependency having `id` below
    /// one of its middle children.
    pub fn basis(&self, id: NodeId) -> Result<NodeId> {
        Ok(self.nodes[self.mid(id)?].parent.expect("a middle child has a parent"))
    }

    pub fn node_type(&self, id: NodeId) -> Result<NodeType> {
        let mid = self.mid(id)?;
        let basis = self.nodes[mid].parent.expect("a middle child has a parent");
        let (m_inner, n_inner) = if mid == id {
            let one = self.morphism.monoid().identity();
            (one, one)
        } else {
            let p = self.nodes[id].parent.expect("below mid");
            (self.left_within(p, mid), self.right_within(p, mid))
        };
        Ok(NodeType {
            depth: self.depth(id),
            m: self.left(basis),
            n: self.right(basis),
            e: self.value(mid),
            m_inner,
            n_inner,
            u: self.frontier_word(id),
        })
    }

    /// Back to a bare tree.
    pub fn tree(&self) -> Tree {
        self.subtree(0)
    }

    fn subtree(&self, id: NodeId) -> Tree {
        let n = &self.nodes[id];
        match n.kind {
            NodeKind::Leaf => Tree::Leaf(n.letter),
            _ => Tree::Node(n.children.iter().map(|&c| self.subtree(c)).collect()),
        }
    }

    /// The word with parentheses: every child is wrapped, a leaf is its
    /// letter, and a lone leaf is written `(a)`.
    pub fn serialize(&self) -> String {
        if self.nodes[0].kind == NodeKind::Leaf {
            return format!("({})", self.render_node(0));
        }
        self.render_node(0)
    }

    fn render_node(&self, id: NodeId) -> String {
        let n = &self.nodes[id];
        match n.kind {
            NodeKind::Leaf => self.morphism.alphabet().render(n.letter),
            _ => n.children.iter().map(|&c| format!("({})", self.render_node(c))).collect(),
        }
    }

    /// Parses a serialized forest and checks it against `morphism`.
    pub fn parse(morphism: &Morphism, s: &str) -> Result<Forest> {
        let chars: Vec<(usize, char)> = s.char_indices().collect();
        let mut p = Parser { alphabet: morphism.alphabet(), chars: &chars, pos: 0, len: s.len() };
        let mut tree = p.sequence()?;
        if p.pos < chars.len() {
            return Err(p.error("unbalanced ')'"));
        }
        // a single group at top level is the whole forest
        if let Tree::Node(kids) = &tree {
            if kids.len() == 1 {
                tree = kids[0].clone();
            }
        }
        let word = leaves(&tree);
        let forest = Forest::from_tree(morphism, &word, &tree)?;
        if let Some(bad) = forest.nodes().find(|&i| forest.kind(i) != NodeKind::Leaf && forest.children(i).len() < 2) {
            return Err(Error::MalformedForest {
                offset: 0,
                reason: format!("node {} has one child", forest.path(bad)),
            });
        }
        if !forest.validate() {
            return Err(Error::MalformedForest { offset: 0, reason: "not a factorization for this morphism".into() });
        }
        Ok(forest)
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

fn leaves(tree: &Tree) -> Vec<Symbol> {
    match tree {
        Tree::Leaf(a) => vec![*a],
        Tree::Node(kids) => kids.iter().flat_map(leaves).collect(),
    }
}

struct Parser<'a> {
    alphabet: &'a crate::monoid::Alphabet,
    chars: &'a [(usize, char)],
    pos: usize,
    len: usize,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |c| c.0)
    }

    fn error(&self, reason: &str) -> Error {
        Error::MalformedForest { offset: self.offset(), reason: reason.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    /// Either one letter or a nonempty run of parenthesized groups.
    fn sequence(&mut self) -> Result<Tree> {
        match self.peek() {
            None | Some(')') => Err(self.error("empty group")),
            Some('(') => {
                let mut kids = Vec::new();
                while self.peek() == Some('(') {
                    self.pos += 1;
                    kids.push(self.sequence()?);
                    if self.peek() != Some(')') {
                        return Err(self.error("expected ')'"));
                    }
                    self.pos += 1;
                }
                match self.peek() {
                    None | Some(')') => Ok(Tree::Node(kids)),
                    Some(_) => Err(self.error("letter beside a group")),
                }
            }
            Some(_) => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c != '(' && c != ')') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let at = self.chars[start].0;
                let w = self
                    .alphabet
                    .parse_word(&text)
                    .map_err(|e| Error::MalformedForest { offset: at, reason: e.to_string() })?;
                if w.len() != 1 {
                    return Err(Error::MalformedForest { offset: at, reason: format!("{text:?} is not one letter") });
                }
                if self.peek() == Some('(') {
                    return Err(self.error("letter beside a group"));
                }
                Ok(Tree::Leaf(w[0]))
            }
        }
    }
}

#[derive(Clone)]
enum Choice {
    Leaf,
    /// Left child spans `[i..=j]`.
    Split(usize),
    /// Block ends, ascending.
    Blocks(Vec<usize>),
}

/// A factorization forest of minimal height for `w` (nonempty).
///
/// Interval dynamic programming over `w`, cubic in `|w|`. Ties prefer
/// idempotent nodes, then the leftmost split; the result is a function of
/// `(μ, w)`.
pub fn build_forest(morphism: &Morphism, w: &[Symbol]) -> Result<Forest> {
    if w.is_empty() {
        return Err(Error::InvalidNode("cannot factorize the empty word".into()));
    }
    morphism.alphabet().check_word(w)?;
    let monoid = morphism.monoid();
    let n = w.len();
    let at = |i: usize, k: usize| i * n + k;
    let mut value = vec![0; n * n];
    for i in 0..n {
        let mut v = monoid.identity();
        for k in i..n {
            v = monoid.mul(v, morphism.letter(w[k]));
            value[at(i, k)] = v;
        }
    }
    let idempotents: Vec<Element> = monoid.idempotents().into_iter().collect();
    let mut slot = vec![usize::MAX; monoid.size()];
    for (s, &e) in idempotents.iter().enumerate() {
        slot[e] = s;
    }

    const INF: usize = usize::MAX;
    let mut height = vec![INF; n * n];
    let mut choice: Vec<Choice> = vec![Choice::Leaf; n * n];
    for i in (0..n).rev() {
        // best[s][c][k]: partitions of [i..=k] into blocks of image
        // idempotents[s]; c = 0, 1, 2 for one, two, three or more blocks;
        // back[s][c][k] = (start of the last block, previous c)
        let ne = idempotents.len();
        let mut best = vec![[vec![INF; n], vec![INF; n], vec![INF; n]]; ne];
        let mut back = vec![[vec![(0usize, 0usize); n], vec![(0, 0); n], vec![(0, 0); n]]; ne];
        for k in i..n {
            for (s, &e) in idempotents.iter().enumerate() {
                for j in i + 1..=k {
                    if value[at(j, k)] != e {
                        continue;
                    }
                    let last = height[at(j, k)];
                    for (c, prevs) in [(1, [0usize].as_slice()), (2, [2usize, 1].as_slice())] {
                        for &pc in prevs {
                            let h = best[s][pc][j - 1];
                            if h == INF {
                                continue;
                            }
                            let cand = h.max(last);
                            if cand < best[s][c][k] {
                                best[s][c][k] = cand;
                                back[s][c][k] = (j, pc);
                            }
                        }
                    }
                }
            }
            let (h, c) = if i == k {
                (1, Choice::Leaf)
            } else {
                let mut h = INF;
                let mut c = Choice::Leaf;
                let v = value[at(i, k)];
                if monoid.is_idempotent(v) && best[slot[v]][2][k] != INF {
                    let s = slot[v];
                    h = 1 + best[s][2][k];
                    let mut ends = vec![k];
                    let (mut cc, mut kk) = (2, k);
                    while cc > 0 {
                        let (j, pc) = back[s][cc][kk];
                        ends.push(j - 1);
                        cc = pc;
                        kk = j - 1;
                    }
                    ends.reverse();
                    c = Choice::Blocks(ends);
                }
                for j in i..k {
                    let cand = 1 + height[at(i, j)].max(height[at(j + 1, k)]);
                    if cand < h {
                        h = cand;
                        c = Choice::Split(j);
                    }
                }
                (h, c)
            };
            height[at(i, k)] = h;
            choice[at(i, k)] = c;
            let v = value[at(i, k)];
            if slot[v] != usize::MAX {
                best[slot[v]][0][k] = h;
            }
        }
    }

    fn rebuild(w: &[Symbol], choice: &[Choice], n: usize, i: usize, k: usize) -> Tree {
        match &choice[i * n + k] {
            Choice::Leaf => Tree::Leaf(w[i]),
            Choice::Split(j) => Tree::Node(vec![rebuild(w, choice, n, i, *j), rebuild(w, choice, n, j + 1, k)]),
            Choice::Blocks(ends) => {
                let mut start = i;
                let mut kids = Vec::with_capacity(ends.len());
                for &e in ends {
                    kids.push(rebuild(w, choice, n, start, e));
                    start = e + 1;
                }
                Tree::Node(kids)
            }
        }
    }
    Forest::from_tree(morphism, w, &rebuild(w, &choice, n, 0, n - 1))
}
