use super::BenchError;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A graph on the vertices `1..=n`. Undirected edges are stored once with
/// the smaller endpoint first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
    pub directed: bool,
}

impl Graph {
    pub fn new(n: u32, mut edges: Vec<(u32, u32)>, directed: bool) -> Self {
        if !directed {
            for e in &mut edges {
                if e.0 > e.1 {
                    *e = (e.1, e.0);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Graph { n, edges, directed }
    }

    pub fn has_edge(&self, v: u32, w: u32) -> bool {
        let e = if self.directed || v <= w { (v, w) } else { (w, v) };
        self.edges.binary_search(&e).is_ok()
    }
}

/// A graph with `m` distinct edges and no loops, drawn uniformly with a
/// generator seeded by `seed`.
pub fn random_graph(n: u32, m: u32, directed: bool, seed: u64) -> Result<Graph, BenchError> {
    let pairs: Vec<(u32, u32)> = (1..=n)
        .flat_map(|v| (1..=n).map(move |w| (v, w)))
        .filter(|&(v, w)| if directed { v != w } else { v < w })
        .collect();
    if m as usize > pairs.len() {
        return Err(BenchError::BadParams(format!(
            "{m} edges requested but a graph on {n} vertices has at most {}",
            pairs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sample(&mut rng, pairs.len(), m as usize).into_iter().map(|i| pairs[i]).collect();
    Ok(Graph::new(n, edges, directed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_simple() {
        let a = random_graph(8, 16, false, 7).unwrap();
        assert_eq!(a, random_graph(8, 16, false, 7).unwrap());
        assert_eq!(a.edges.len(), 16);
        assert!(a.edges.iter().all(|&(v, w)| v < w && w <= 8));
        let d = random_graph(5, 20, true, 3).unwrap();
        assert_eq!(d.edges.len(), 20);
        assert!(d.edges.iter().all(|&(v, w)| v != w));
    }

    #[test]
    fn too_many_edges() {
        assert_eq!(random_graph(3, 4, false, 0).unwrap_err().code(), "E_BAD_PARAMS");
        assert!(random_graph(3, 6, true, 0).is_ok());
    }
}
