use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Abstract finite group given by its multiplication table.
///
/// Element 0 is the identity; `cayley[a][b]` is the index of `a·b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroupTable {
    order: usize,
    cayley: Vec<Vec<usize>>,
    generators: Vec<usize>,
    inverses: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroupTable {
    pub fn new(cayley: Vec<Vec<usize>>, generators: Vec<usize>, names: Vec<String>) -> Result<Self> {
        let n = cayley.len();
        if n == 0 {
            return Err(Error::GroupLaw("empty table".into()));
        }
        if names.len() != n {
            return Err(Error::GroupLaw(format!("{} names for {} elements", names.len(), n)));
        }
        for (a, row) in cayley.iter().enumerate() {
            if row.len() != n {
                return Err(Error::GroupLaw(format!("row {a} has length {}", row.len())));
            }
            if row.iter().any(|&x| x >= n) {
                return Err(Error::GroupLaw(format!("row {a} has an out-of-range entry")));
            }
            if row[0] != a || cayley[0][a] != a {
                return Err(Error::GroupLaw("element 0 is not the identity".into()));
            }
        }
        let mut inverses = vec![usize::MAX; n];
        for a in 0..n {
            let inv: Vec<usize> = (0..n).filter(|&b| cayley[a][b] == 0).collect();
            if inv.len() != 1 || cayley[inv[0]][a] != 0 {
                return Err(Error::GroupLaw(format!("element {a} has no two-sided inverse")));
            }
            inverses[a] = inv[0];
        }
        for a in 0..n {
            for b in 0..n {
                let ab = cayley[a][b];
                for cc in 0..n {
                    if cayley[ab][cc] != cayley[a][cayley[b][cc]] {
                        return Err(Error::GroupLaw(format!("associativity fails at ({a},{b},{cc})")));
                    }
                }
            }
        }
        if generators.iter().any(|&g| g >= n) {
            return Err(Error::GroupLaw("generator index out of range".into()));
        }
        let table = FiniteGroupTable { order: n, cayley, generators, inverses, names };
        let span = table.generated_subgroup(&table.generators);
        if span.len() != n {
            return Err(Error::GroupLaw(format!(
                "generators span a subgroup of order {} in a group of order {n}",
                span.len()
            )));
        }
        Ok(table)
    }

    /// The cyclic group Z_k with generator index 1 (the identity when k = 1).
    pub fn cyclic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("cyclic group order must be positive".into()));
        }
        let cayley = (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect();
        let generators = if k == 1 { vec![0] } else { vec![1] };
        let names = (0..k).map(|j| if j == 0 { "e".to_string() } else { format!("g^{j}") }).collect();
        Self::new(cayley, generators, names)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn power(&self, g: usize, j: usize) -> usize {
        (0..j).fold(0, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Powers `e, g, g², …` of `g`.
    pub fn cyclic_subgroup(&self, g: usize) -> Vec<usize> {
        let mut out = vec![0];
        let mut x = g;
        while x != 0 {
            out.push(x);
            x = self.mul(x, g);
        }
        out
    }

    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut out = Vec::new();
        while let Some(x) = queue.pop_front() {
            out.push(x);
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        out
    }

    /// An element generating the whole group, if it is cyclic.
    pub fn cyclic_generator(&self) -> Option<usize> {
        if self.order == 1 {
            return Some(0);
        }
        (1..self.order).find(|&g| self.element_order(g) == self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group() {
        let g = FiniteGroupTable::cyclic(1).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.generators(), &[0]);
    }

    #[test]
    fn z4_generator_has_order_four() {
        let g = FiniteGroupTable::cyclic(4).unwrap();
        assert_eq!(g.element_order(1), 4);
        assert_eq!(g.mul(3, 2), 1);
        assert_eq!(g.inverse(3), 1);
    }

    #[test]
    fn z6_subgroup_of_two() {
        let g = FiniteGroupTable::cyclic(6).unwrap();
        // powers of 2 by enumeration: 0, 2, 4
        let sub = g.cyclic_subgroup(2);
        assert_eq!(sub, vec![0, 2, 4]);
        assert_eq!(g.element_order(2), 3);
    }

    #[test]
    fn rejects_non_group() {
        let bad = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroupTable::new(bad, vec![1], vec!["e".into(), "a".into()]).is_err());
    }

    #[test]
    fn rejects_non_generating_set() {
        let z4: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        let names = (0..4).map(|i| i.to_string()).collect();
        assert!(FiniteGroupTable::new(z4, vec![2], names).is_err());
    }
}
