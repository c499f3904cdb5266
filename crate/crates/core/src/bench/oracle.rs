//! Exhaustive reference solutions for small instances.

use super::{BenchError, Graph};
use std::collections::BTreeSet;

pub const MAX_VERTICES: u32 = 12;
pub const MAX_QUEENS: u32 = 8;

fn cap(g: &Graph) -> Result<(), BenchError> {
    if g.n > MAX_VERTICES {
        return Err(BenchError::TooLarge(format!("{} vertices, at most {MAX_VERTICES}", g.n)));
    }
    Ok(())
}

/// `colors[v - 1]` is the color of vertex `v`.
pub fn is_coloring(g: &Graph, k: u32, colors: &[u32]) -> bool {
    colors.len() == g.n as usize
        && colors.iter().all(|&c| (1..=k).contains(&c))
        && g.edges.iter().all(|&(v, w)| colors[v as usize - 1] != colors[w as usize - 1])
}

/// Number of proper colorings with colors `1..=k`.
pub fn count_colorings(g: &Graph, k: u32) -> Result<u64, BenchError> {
    cap(g)?;
    fn go(g: &Graph, k: u32, colors: &mut Vec<u32>) -> u64 {
        let v = colors.len() as u32 + 1;
        if v > g.n {
            return 1;
        }
        let mut total = 0;
        for c in 1..=k {
            let clash = (1..v).any(|w| colors[w as usize - 1] == c && g.has_edge(w, v));
            if !clash {
                colors.push(c);
                total += go(g, k, colors);
                colors.pop();
            }
        }
        total
    }
    Ok(go(g, k, &mut Vec::new()))
}

pub fn is_cover(g: &Graph, w: &BTreeSet<u32>) -> bool {
    g.edges.iter().all(|(a, b)| w.contains(a) || w.contains(b))
}

fn subsets(n: u32) -> impl Iterator<Item = BTreeSet<u32>> {
    (0u32..1 << n).map(move |mask| (1..=n).filter(|v| mask >> (v - 1) & 1 == 1).collect())
}

/// All vertex covers with at most `k` vertices.
pub fn small_covers(g: &Graph, k: u32) -> Result<BTreeSet<BTreeSet<u32>>, BenchError> {
    cap(g)?;
    Ok(subsets(g.n).filter(|w| w.len() as u32 <= k && is_cover(g, w)).collect())
}

pub fn min_vertex_cover(g: &Graph) -> Result<u32, BenchError> {
    cap(g)?;
    Ok(subsets(g.n).filter(|w| is_cover(g, w)).map(|w| w.len() as u32).min().expect("V is a cover"))
}

/// Hamiltonian cycles of a directed graph, each listed from vertex 1.
pub fn hamiltonian_cycles(g: &Graph) -> Result<Vec<Vec<u32>>, BenchError> {
    cap(g)?;
    fn go(g: &Graph, path: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<Vec<u32>>) {
        let last = *path.last().unwrap();
        if path.len() == g.n as usize {
            if g.has_edge(last, path[0]) {
                out.push(path.clone());
            }
            return;
        }
        for w in 2..=g.n {
            if !used[w as usize] && g.has_edge(last, w) {
                used[w as usize] = true;
                path.push(w);
                go(g, path, used, out);
                path.pop();
                used[w as usize] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; g.n as usize + 1];
    used[1] = true;
    go(g, &mut vec![1], &mut used, &mut out);
    Ok(out)
}

/// The cycle through all vertices described by a successor table
/// (`succ[v]`, index 0 unused), listed from vertex 1.
pub fn cycle_from(succ: &[u32]) -> Option<Vec<u32>> {
    let n = succ.len() - 1;
    let mut cycle = vec![1];
    let mut v = succ.get(1).copied()?;
    while v != 1 {
        if v == 0 || v as usize > n || cycle.len() >= n {
            return None;
        }
        cycle.push(v);
        v = succ[v as usize];
    }
    (cycle.len() == n).then_some(cycle)
}

/// Number of placements of `n` non-attacking queens.
pub fn count_queens(n: u32) -> Result<u64, BenchError> {
    if n > MAX_QUEENS {
        return Err(BenchError::TooLarge(format!("{n} queens, at most {MAX_QUEENS}")));
    }
    let mut total = 0;
    // Brute force over one column per row.
    let n = n as usize;
    let mut cols = vec![0usize; n];
    loop {
        let ok = (0..n).all(|i| (i + 1..n).all(|j| cols[i] != cols[j] && cols[i].abs_diff(cols[j]) != j - i));
        total += ok as u64;
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(total);
            }
            i -= 1;
            cols[i] += 1;
            if cols[i] < n {
                break;
            }
            cols[i] = 0;
        }
    }
}

/// Whether `queens` (pairs `[row, col]`) is a solution on an `n` board.
pub fn is_queens(n: u32, queens: &[Vec<u32>]) -> bool {
    queens.len() == n as usize
        && queens.iter().all(|q| q.len() == 2 && (1..=n).contains(&q[0]) && (1..=n).contains(&q[1]))
        && queens.iter().enumerate().all(|(i, a)| {
            queens[i + 1..].iter().all(|b| a[0] != b[0] && a[1] != b[1] && a[0].abs_diff(b[0]) != a[1].abs_diff(b[1]))
        })
}

/// Transitive closure by repeated squaring of the edge relation.
pub fn transitive_closure(g: &Graph) -> Result<BTreeSet<(u32, u32)>, BenchError> {
    cap(g)?;
    let n = g.n as usize;
    let mut r = vec![vec![false; n + 1]; n + 1];
    for &(v, w) in &g.edges {
        r[v as usize][w as usize] = true;
        if !g.directed {
            r[w as usize][v as usize] = true;
        }
    }
    loop {
        let mut next = r.clone();
        for x in 1..=n {
            for y in 1..=n {
                if !next[x][y] {
                    next[x][y] = (1..=n).any(|z| r[x][z] && r[z][y]);
                }
            }
        }
        if next == r {
            break;
        }
        r = next;
    }
    Ok((1..=n)
        .flat_map(|x| (1..=n).map(move |y| (x, y)))
        .filter(|&(x, y)| r[x][y])
        .map(|(x, y)| (x as u32, y as u32))
        .collect())
}
