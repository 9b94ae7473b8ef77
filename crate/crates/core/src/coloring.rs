//! Colored spanning tree.
//!
//! Nodes are partitioned into subtrees separated by degenerate basic edges
//! (zero flow). Each color class is a connected piece of the basis tree;
//! its root is the node closest to the tree root, and unless the class
//! contains the tree root, the edge from the class root to its parent is
//! the degenerate edge connecting it to its parent class.
//!
//! With this partition one can tell in O(1), for many non-basic pairs,
//! whether a Phase-1 push along the pair's cycle would move a positive
//! amount: a zero-flow edge blocks the push exactly when it sits at an odd
//! position of the path.

use crate::basis::{BasisTree, ROOT};
use crate::instance::Side;

pub type Color = u32;

const NONE: Color = Color::MAX;

/// Answer of the constant-time Phase-1 test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    /// The push would move a strictly positive amount.
    Admissible,
    /// The push would move nothing.
    Blocked,
    /// The colors are not related closely enough to decide in O(1).
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subtree {
    /// Slot of the subtree root; for every color but the tree root's, the
    /// connecting degenerate edge is the one owned by this slot.
    pub root: usize,
    pub root_side: Side,
    pub parent_color: Option<Color>,
}

#[derive(Debug, Clone)]
pub struct ColorForest {
    color: Vec<Color>,
    subtrees: Vec<Option<Subtree>>,
    free: Vec<Color>,
    degenerate: Vec<bool>,
    live: usize,
    stack: Vec<usize>,
}

impl ColorForest {
    /// Colors the whole tree from the root; every zero-flow edge starts a
    /// new color at its lower endpoint.
    pub fn build(tree: &BasisTree) -> Self {
        let nodes = tree.node_count();
        let mut forest = ColorForest {
            color: vec![NONE; nodes],
            subtrees: Vec::new(),
            free: Vec::new(),
            degenerate: vec![false; nodes],
            live: 0,
            stack: Vec::new(),
        };
        forest.rebuild(tree);
        forest
    }

    /// Recolors from scratch, reusing allocations.
    pub fn rebuild(&mut self, tree: &BasisTree) {
        let nodes = tree.node_count();
        self.color.clear();
        self.color.resize(nodes, NONE);
        self.degenerate.clear();
        self.degenerate.resize(nodes, false);
        self.subtrees.clear();
        self.free.clear();
        self.live = 0;
        let root_color = self.alloc(Subtree {
            root: ROOT,
            root_side: Side::Source,
            parent_color: None,
        });
        self.color[ROOT] = root_color;
        let mut stack = std::mem::take(&mut self.stack);
        stack.push(ROOT);
        while let Some(p) = stack.pop() {
            let cp = self.color[p];
            for &c in tree.children(p) {
                if tree.flow(c) == 0 {
                    self.degenerate[c] = true;
                    self.color[c] = self.alloc(Subtree {
                        root: c,
                        root_side: side_of(tree, c),
                        parent_color: Some(cp),
                    });
                } else {
                    self.color[c] = cp;
                }
                stack.push(c);
            }
        }
        self.stack = stack;
    }

    fn alloc(&mut self, sub: Subtree) -> Color {
        self.live += 1;
        match self.free.pop() {
            Some(c) => {
                self.subtrees[c as usize] = Some(sub);
                c
            }
            None => {
                self.subtrees.push(Some(sub));
                (self.subtrees.len() - 1) as Color
            }
        }
    }

    #[inline]
    pub fn color(&self, slot: usize) -> Color {
        self.color[slot]
    }

    pub fn subtree(&self, color: Color) -> Option<&Subtree> {
        self.subtrees.get(color as usize).and_then(Option::as_ref)
    }

    /// Number of colors in use; always one more than the number of
    /// registered degenerate edges.
    pub fn color_count(&self) -> usize {
        self.live
    }

    pub fn is_single_color(&self) -> bool {
        self.live == 1
    }

    /// Whether the edge owned by `slot` is registered as degenerate.
    pub fn is_degenerate(&self, slot: usize) -> bool {
        self.degenerate[slot]
    }

    pub fn degenerate_count(&self) -> usize {
        self.live - 1
    }

    /// Registers the edge owned by `slot` as degenerate: the part of its
    /// color class hanging below it gets a fresh color. Returns the number
    /// of recolored nodes.
    pub fn on_edge_became_degenerate(&mut self, tree: &BasisTree, slot: usize) -> usize {
        assert!(slot != ROOT && !self.degenerate[slot], "edge already registered as degenerate");
        let old = self.color[slot];
        let fresh = self.alloc(Subtree {
            root: slot,
            root_side: side_of(tree, slot),
            parent_color: Some(old),
        });
        self.degenerate[slot] = true;
        self.repaint(tree, slot, fresh)
    }

    /// Unregisters a degenerate edge that carries flow again: the class
    /// below it merges into its parent class. Returns the number of
    /// recolored nodes.
    pub fn on_edge_became_positive(&mut self, tree: &BasisTree, slot: usize) -> usize {
        assert!(self.degenerate[slot], "edge is not registered as degenerate");
        let child = self.color[slot];
        let parent = self.color[tree.parent(slot)];
        self.degenerate[slot] = false;
        let count = self.repaint(tree, slot, parent);
        self.subtrees[child as usize] = None;
        self.free.push(child);
        self.live -= 1;
        count
    }

    /// Paints the class piece reachable from `top` without crossing
    /// registered edges; classes hanging below it are re-parented.
    fn repaint(&mut self, tree: &BasisTree, top: usize, to: Color) -> usize {
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push(top);
        let mut count = 0;
        while let Some(s) = stack.pop() {
            self.color[s] = to;
            count += 1;
            for &c in tree.children(s) {
                if self.degenerate[c] {
                    let below = self.color[c] as usize;
                    if let Some(sub) = self.subtrees[below].as_mut() {
                        sub.parent_color = Some(to);
                    }
                } else {
                    stack.push(c);
                }
            }
        }
        self.stack = stack;
        count
    }

    /// Constant-time test for the pair (source `i`, destination `j`).
    pub fn admissible(&self, tree: &BasisTree, i: usize, j: usize) -> Admissibility {
        use Admissibility::*;
        let ci = self.color[i];
        let cj = self.color[tree.m() + j];
        if ci == cj {
            return Admissible;
        }
        let si = self.subtrees[ci as usize].as_ref().expect("live color");
        let sj = self.subtrees[cj as usize].as_ref().expect("live color");
        let verdict = |ok: bool| if ok { Admissible } else { Blocked };
        if sj.parent_color == Some(ci) {
            // j below i: the degenerate edge ends the climb to a source root
            // at an even position
            verdict(sj.root_side == Side::Source)
        } else if si.parent_color == Some(cj) {
            verdict(si.root_side == Side::Destination)
        } else if si.parent_color.is_some() && si.parent_color == sj.parent_color {
            verdict(si.root_side == Side::Destination && sj.root_side == Side::Source)
        } else {
            Indeterminate
        }
    }

    /// True when `self` and `other` induce the same partition of the nodes
    /// (colors may be labeled differently).
    pub fn same_partition(&self, other: &ColorForest) -> bool {
        if self.color.len() != other.color.len() {
            return false;
        }
        let size = self.subtrees.len().max(1);
        let mut fwd = vec![NONE; size];
        let mut back = vec![NONE; other.subtrees.len().max(1)];
        for (&a, &b) in self.color.iter().zip(&other.color) {
            let (a, b) = (a as usize, b as usize);
            if fwd[a] == NONE && back[b] == NONE {
                fwd[a] = b as Color;
                back[b] = a as Color;
            } else if fwd[a] != b as Color || back[b] != a as Color {
                return false;
            }
        }
        true
    }
}

fn side_of(tree: &BasisTree, slot: usize) -> Side {
    if tree.is_source_slot(slot) {
        Side::Source
    } else {
        Side::Destination
    }
}
