//! CART classification tree with greedy Gini splits.

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Split feature, `None` for leaves.
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Majority class of the training rows reaching this node.
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub nodes: Vec<TreeNode>,
}

impl TreeParams {
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            match node.feature {
                None => return node.class,
                Some(f) => i = if row[f] <= node.threshold { node.left } else { node.right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &TreeParams, i: usize) -> usize {
            let n = &t.nodes[i];
            match n.feature {
                None => 0,
                Some(_) => 1 + walk(t, n.left).max(walk(t, n.right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(self, 0)
        }
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, max_depth: usize, min_split: usize) -> TreeParams {
    let mut tree = TreeParams { nodes: Vec::new() };
    let rows: Vec<usize> = (0..x.len()).collect();
    grow(&mut tree, x, y, classes, rows, 0, max_depth, min_split.max(2));
    tree
}

#[allow(clippy::too_many_arguments)]
fn grow(
    tree: &mut TreeParams,
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_split: usize,
) -> usize {
    let mut counts = vec![0usize; classes.max(1)];
    for &r in &rows {
        counts[y[r]] += 1;
    }
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode {
        feature: None,
        threshold: 0.0,
        left: 0,
        right: 0,
        class: majority(&counts),
    });
    let n = rows.len();
    let parent = gini(&counts, n);
    if depth >= max_depth || n < min_split || parent == 0.0 {
        return id;
    }

    let d = x.first().map_or(0, |r| r.len());
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = rows.clone();
    for f in 0..d {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; counts.len()];
        for i in 0..n - 1 {
            left[y[order[i]]] += 1;
            let (a, b) = (x[order[i]][f], x[order[i + 1]][f]);
            if a == b {
                continue;
            }
            let nl = i + 1;
            let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
            let score = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.map_or(true, |(s, _, _)| score < s) {
                let mid = a + (b - a) / 2.0;
                best = Some((score, f, mid));
            }
        }
    }
    let Some((_, f, threshold)) = best else {
        return id;
    };
    let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x[r][f] <= threshold);
    let left = grow(tree, x, y, classes, l_rows, depth + 1, max_depth, min_split);
    let right = grow(tree, x, y, classes, r_rows, depth + 1, max_depth, min_split);
    let node = &mut tree.nodes[id];
    node.feature = Some(f);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    id
}
