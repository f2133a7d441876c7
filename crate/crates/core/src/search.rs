//! Enumeration of families of values subject to forcing constraints.
//!
//! Naturality squares all have the shape "if variable `i` takes value `v`
//! then variable `j` must take value `map[v]`". Assigning one component of a
//! transformation therefore forces others; propagating those forced values
//! prunes the search far below the raw product of domains.

const UNSET: usize = usize::MAX;

pub(crate) struct ForcingSearch {
    domains: Vec<usize>,
    /// `edges[i]` holds `(j, map)`: value `v` at `i` forces `map[v]` at `j`.
    edges: Vec<Vec<(usize, usize)>>,
    maps: Vec<Vec<usize>>,
}

impl ForcingSearch {
    pub(crate) fn new(domains: Vec<usize>) -> Self {
        let n = domains.len();
        ForcingSearch {
            domains,
            edges: vec![Vec::new(); n],
            maps: Vec::new(),
        }
    }

    pub(crate) fn force(&mut self, from: usize, to: usize, map: Vec<usize>) {
        debug_assert_eq!(map.len(), self.domains[from]);
        self.edges[from].push((to, self.maps.len()));
        self.maps.push(map);
    }

    /// Calls `visit` on every consistent total assignment, in lexicographic
    /// order of variable values; stops early when `visit` returns `false`.
    /// Returns `false` iff stopped early.
    pub(crate) fn run(&self, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
        let mut assign = vec![UNSET; self.domains.len()];
        let mut trail = Vec::new();
        self.go(0, &mut assign, &mut trail, &mut visit)
    }

    fn go(
        &self,
        start: usize,
        assign: &mut Vec<usize>,
        trail: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let Some(var) = (start..assign.len()).find(|&i| assign[i] == UNSET) else {
            return visit(assign);
        };
        for value in 0..self.domains[var] {
            let mark = trail.len();
            if self.set(var, value, assign, trail) && !self.go(var + 1, assign, trail, visit) {
                return false;
            }
            for &i in &trail[mark..] {
                assign[i] = UNSET;
            }
            trail.truncate(mark);
        }
        true
    }

    fn set(&self, var: usize, value: usize, assign: &mut [usize], trail: &mut Vec<usize>) -> bool {
        let mut queue = vec![(var, value)];
        while let Some((i, v)) = queue.pop() {
            if assign[i] != UNSET {
                if assign[i] != v {
                    return false;
                }
                continue;
            }
            assign[i] = v;
            trail.push(i);
            for &(j, m) in &self.edges[i] {
                queue.push((j, self.maps[m][v]));
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_is_the_product() {
        let s = ForcingSearch::new(vec![2, 3]);
        let mut n = 0;
        s.run(|_| {
            n += 1;
            true
        });
        assert_eq!(n, 6);
    }

    #[test]
    fn forcing_prunes() {
        let mut s = ForcingSearch::new(vec![3, 3]);
        s.force(0, 1, vec![0, 0, 1]);
        let mut seen = Vec::new();
        s.run(|a| {
            seen.push(a.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![0, 0], vec![1, 0], vec![2, 1]]);
    }

    #[test]
    fn empty_domain_kills_everything() {
        let s = ForcingSearch::new(vec![2, 0]);
        let mut n = 0;
        s.run(|_| {
            n += 1;
            true
        });
        assert_eq!(n, 0);
    }
}
