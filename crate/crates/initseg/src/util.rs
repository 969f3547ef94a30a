//! Small shared utilities: deterministic PRNG, pairing functions, union-find.

/// SplitMix64. Used for seeded property tests and seeded fixtures; every
/// randomized artifact in the repo is reproducible from a single `u64` seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound` (bound > 0).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// FNV-1a over a byte stream; used for stable content hashes in traces.
pub fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn hash_usize_seq<'a>(seq: impl IntoIterator<Item = &'a usize>) -> u64 {
    fnv1a(seq.into_iter().flat_map(|v| v.to_le_bytes()))
}

/// Cantor pairing `⟨a,b⟩ = (a+b)(a+b+1)/2 + b` and its inverse.
pub fn cantor_pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

pub fn cantor_unpair(n: u64) -> (u64, u64) {
    // Largest w with w(w+1)/2 <= n.
    let mut w = ((((8 * n + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    while (w + 1) * (w + 2) / 2 <= n {
        w += 1;
    }
    let t = w * (w + 1) / 2;
    let b = n - t;
    (w - b, b)
}

pub fn cantor_unpair3(n: u64) -> (u64, u64, u64) {
    let (ab, c) = cantor_unpair(n);
    let (a, b) = cantor_unpair(ab);
    (a, b, c)
}

pub fn cantor_unpair4(n: u64) -> (u64, u64, u64, u64) {
    let (abc, d) = cantor_unpair(n);
    let (a, b, c) = cantor_unpair3(abc);
    (a, b, c, d)
}

pub fn cantor_pair3(a: u64, b: u64, c: u64) -> u64 {
    cantor_pair(cantor_pair(a, b), c)
}

pub fn cantor_pair4(a: u64, b: u64, c: u64, d: u64) -> u64 {
    cantor_pair(cantor_pair3(a, b, c), d)
}

/// Plain union-find with path compression.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while cur != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Smaller root wins so representatives stay minimal.
            if ra < rb {
                self.parent[rb] = ra;
            } else {
                self.parent[ra] = rb;
            }
        }
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_roundtrip() {
        for n in 0..500u64 {
            let (a, b) = cantor_unpair(n);
            assert_eq!(cantor_pair(a, b), n);
            let (a, b, c, d) = cantor_unpair4(n);
            assert_eq!(cantor_pair4(a, b, c, d), n);
        }
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn union_find_min_representative() {
        let mut uf = UnionFind::new(6);
        uf.union(4, 2);
        uf.union(5, 4);
        assert_eq!(uf.find(5), 2);
        assert!(uf.same(2, 5));
        assert!(!uf.same(0, 5));
    }
}
