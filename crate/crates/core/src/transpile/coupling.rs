use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CouplingError {
    #[error("coupling map has a self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) references a qubit outside the map")]
    OutOfRange(usize, usize),
    #[error("coupling map is disconnected")]
    DisconnectedMap,
    #[error("coupling map needs at least one physical qubit")]
    Empty,
    #[error("unknown coupling map id `{0}`")]
    UnknownId(String),
    #[error("map `{id}` has {have} physical qubits, circuit needs {need}")]
    TooSmall { id: String, have: usize, need: usize },
    #[error("invalid coupling map JSON: {0}")]
    Json(String),
}

/// Undirected, connected physical connectivity graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    num_physical: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CouplingJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingMap {
    pub fn new(
        num_physical: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CouplingError> {
        if num_physical == 0 {
            return Err(CouplingError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(CouplingError::SelfLoop(a));
            }
            if a >= num_physical || b >= num_physical {
                return Err(CouplingError::OutOfRange(a, b));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); num_physical];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let map = Self {
            num_physical,
            edges: set,
            neighbors,
        };
        let reached = map.distances_from(0).iter().filter(|d| d.is_some()).count();
        if reached != num_physical {
            return Err(CouplingError::DisconnectedMap);
        }
        Ok(map)
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("line map is valid")
    }

    pub fn ring(n: usize) -> Self {
        if n < 3 {
            return Self::line(n);
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("ring map is valid")
    }

    pub fn full(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::new(n, edges).expect("all-to-all map is valid")
    }

    /// Two 5-qubit rows joined through degree-2 bridge qubits 5 and 6.
    ///
    /// ```text
    /// 0 - 1 - 2 - 3 - 4
    ///         |       |
    ///         5       6
    ///         |       |
    /// 7 - 8 - 9 - 10- 11
    /// ```
    pub fn heavy_hex_12() -> Self {
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (7, 8),
            (8, 9),
            (9, 10),
            (10, 11),
            (2, 5),
            (5, 9),
            (4, 6),
            (6, 11),
        ];
        Self::new(12, edges).expect("heavy-hex sample is valid")
    }

    /// Resolves a map id such as `line-5`, `ring-6`, `full-4` or `heavyhex`.
    /// A bare family name (`line`, `ring`, `full`) is sized to `min_qubits`.
    pub fn from_id(id: &str, min_qubits: usize) -> Result<Self, CouplingError> {
        let (family, size) = match id.rsplit_once('-') {
            Some((f, s)) if s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty() => {
                (f, Some(s.parse::<usize>().map_err(|_| CouplingError::UnknownId(id.into()))?))
            }
            _ => (id, None),
        };
        let n = size.unwrap_or(min_qubits.max(1));
        let map = match family {
            "line" => Self::line(n),
            "ring" => Self::ring(n),
            "full" => Self::full(n),
            "heavyhex" | "heavy-hex" if size.is_none() || size == Some(12) => Self::heavy_hex_12(),
            _ => return Err(CouplingError::UnknownId(id.into())),
        };
        if map.num_physical < min_qubits {
            return Err(CouplingError::TooSmall {
                id: id.into(),
                have: map.num_physical,
                need: min_qubits,
            });
        }
        Ok(map)
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_physical];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS shortest path from `a` to `b` inclusive. Neighbours are explored in
    /// ascending order, so ties resolve towards lower physical indices.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.num_physical];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &w in &self.neighbors[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[b] == usize::MAX {
            return None;
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    pub fn to_json(&self) -> String {
        let doc = CouplingJson {
            n: self.num_physical,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&doc).expect("coupling map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CouplingError> {
        let doc: CouplingJson =
            serde_json::from_str(text).map_err(|e| CouplingError::Json(e.to_string()))?;
        Self::new(doc.n, doc.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_connected() {
        for m in [
            CouplingMap::line(5),
            CouplingMap::ring(6),
            CouplingMap::full(4),
            CouplingMap::heavy_hex_12(),
            CouplingMap::line(1),
        ] {
            assert!(CouplingMap::new(m.num_physical(), m.edges()).is_ok());
        }
        assert_eq!(CouplingMap::heavy_hex_12().edges().count(), 12);
    }

    #[test]
    fn rejects_invalid_maps() {
        assert_eq!(
            CouplingMap::new(3, [(0, 1)]),
            Err(CouplingError::DisconnectedMap)
        );
        assert_eq!(CouplingMap::new(2, [(1, 1)]), Err(CouplingError::SelfLoop(1)));
        assert!(matches!(
            CouplingMap::new(2, [(0, 2)]),
            Err(CouplingError::OutOfRange(0, 2))
        ));
    }

    #[test]
    fn ids_resolve() {
        assert_eq!(CouplingMap::from_id("line", 4).unwrap().num_physical(), 4);
        assert_eq!(CouplingMap::from_id("ring-6", 4).unwrap().num_physical(), 6);
        assert_eq!(CouplingMap::from_id("heavyhex", 6).unwrap().num_physical(), 12);
        assert!(CouplingMap::from_id("line-3", 4).is_err());
        assert!(CouplingMap::from_id("torus", 4).is_err());
    }

    #[test]
    fn shortest_path_prefers_low_indices() {
        let ring = CouplingMap::ring(4);
        // 0 -> 2 has two equal routes; via 1 wins.
        assert_eq!(ring.shortest_path(0, 2).unwrap(), vec![0, 1, 2]);
        let hh = CouplingMap::heavy_hex_12();
        assert_eq!(hh.shortest_path(0, 7).unwrap(), vec![0, 1, 2, 5, 9, 8, 7]);
    }

    #[test]
    fn json_round_trip() {
        let m = CouplingMap::heavy_hex_12();
        let js = m.to_json();
        assert!(js.starts_with("{\"n\":12,\"edges\":[[0,1]"));
        assert_eq!(CouplingMap::from_json(&js).unwrap(), m);
    }
}
