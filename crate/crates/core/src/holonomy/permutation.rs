use std::fmt;

use crate::error::{Error, Result};

/// Bijection of `0..n`, in one-line notation: `i` is sent to `mapping[i]`.
///
/// As a monodromy, `mapping[i] = j` means the eigenspace that started in
/// slot `i` of the frame ends up where eigenspace `j` started.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &j in &mapping {
            if j >= n || seen[j] {
                return Err(Error::NotAPermutation { len: n });
            }
            seen[j] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// `i -> i + 1 (mod n)`.
    pub fn cyclic_shift(n: usize) -> Self {
        Self {
            mapping: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        assert!(a < n && b < n);
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(a, b);
        Self { mapping }
    }

    /// Builds a permutation from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut mapping: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &i) in cycle.iter().enumerate() {
                if i >= n || touched[i] {
                    return Err(Error::NotAPermutation { len: n });
                }
                touched[i] = true;
                mapping[i] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::new(mapping)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.mapping.iter().enumerate() {
            inv[j] = i;
        }
        Self { mapping: inv }
    }

    /// Disjoint cycles of length at least two, each starting at its
    /// smallest element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut i = self.mapping[start];
            while i != start {
                seen[i] = true;
                cycle.push(i);
                i = self.mapping[i];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// e.g. `(0 1)(2 4 3)`; the identity is `()`.
    pub fn cycle_notation(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let items: Vec<String> = c.iter().map(|i| i.to_string()).collect();
                format!("({})", items.join(" "))
            })
            .collect()
    }

    /// True iff the permutation is one cycle through all `n` points.
    pub fn is_full_cycle(&self) -> bool {
        let cycles = self.cycles();
        self.len() >= 2 && cycles.len() == 1 && cycles[0].len() == self.len()
    }

    /// Order in the symmetric group: lcm of the cycle lengths.
    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .map(Vec::len)
            .fold(1, |acc, l| acc / gcd(acc, l) * l)
    }

    /// `self` composed with itself `k` times.
    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.len()), |acc, _| compose_unchecked(self, &acc))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}

fn compose_unchecked(second: &Permutation, first: &Permutation) -> Permutation {
    Permutation {
        mapping: first.mapping.iter().map(|&j| second.mapping[j]).collect(),
    }
}

/// `(second . first)(i) = second(first(i))`: the monodromy of traversing
/// the loop of `first` and then the loop of `second`.
pub fn compose(second: &Permutation, first: &Permutation) -> Result<Permutation> {
    if second.len() != first.len() {
        return Err(Error::DimensionMismatch {
            expected: first.len(),
            found: second.len(),
        });
    }
    Ok(compose_unchecked(second, first))
}
