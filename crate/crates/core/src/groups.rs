//! Finite groups by multiplication table, Cayley graphs with ordered
//! neighbourhood templates, and the regularity test for quotients.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

/// A group element, identified by its row in the multiplication table.
/// Element `0` is always the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(pub usize);

impl Element {
    pub const IDENTITY: Element = Element(0);
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("the multiplication table is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("table entry {value} is out of range for order {order}")]
    OutOfRange { value: usize, order: usize },
    #[error("element 0 is not a two-sided identity")]
    MissingIdentity,
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not associative: ({0}·{1})·{2} differs from {0}·({1}·{2})")]
    NonAssociative(usize, usize, usize),
    #[error("unknown group preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown element label `{0}`")]
    UnknownElement(String),
    #[error("element index {0} is out of range")]
    ElementOutOfRange(usize),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("generators must be non-identity elements that generate the group")]
    BadGenerators,
    #[error("neighbourhood template must be non-empty with distinct elements")]
    BadTemplate,
    #[error("site order must list every element exactly once")]
    BadSiteOrder,
    #[error("kernel is not a subgroup")]
    KernelNotSubgroup,
    #[error("kernel is not a normal subgroup")]
    KernelNotNormal,
    #[error("modulus must be positive")]
    BadModulus,
    #[error("too many sites ({0}); at most 32 are supported")]
    TooManySites(usize),
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Validates a multiplication table with `table[x][y] = x·y` and identity `0`.
    pub fn from_table(rows: &[Vec<usize>], labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::NotSquare { row: r, len: row.len(), order: n });
            }
            if let Some(&v) = row.iter().find(|&&v| v >= n) {
                return Err(GroupError::OutOfRange { value: v, order: n });
            }
        }
        if (0..n).any(|x| rows[0][x] != x || rows[x][0] != x) {
            return Err(GroupError::MissingIdentity);
        }
        for x in 0..n {
            let mut seen_row = alloc::vec![false; n];
            let mut seen_col = alloc::vec![false; n];
            for y in 0..n {
                if core::mem::replace(&mut seen_row[rows[x][y]], true) {
                    return Err(GroupError::NotAGroup(format!("row {} repeats element {}", x, rows[x][y])));
                }
                if core::mem::replace(&mut seen_col[rows[y][x]], true) {
                    return Err(GroupError::NotAGroup(format!("column {} repeats element {}", x, rows[y][x])));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if rows[rows[a][b]][c] != rows[a][rows[b][c]] {
                        return Err(GroupError::NonAssociative(a, b, c));
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(GroupError::LabelCount { expected: n, got: l.len() });
                }
                let mut seen = BTreeSet::new();
                for s in &l {
                    if !seen.insert(s.clone()) {
                        return Err(GroupError::DuplicateLabel(s.clone()));
                    }
                }
                l
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let table: Vec<usize> = rows.iter().flatten().copied().collect();
        let inverse = (0..n).map(|x| (0..n).find(|&y| table[x * n + y] == 0).expect("latin square")).collect();
        Ok(FiniteGroup { order: n, table, inverse, labels })
    }

    /// The cyclic group `ℤ_n` with labels `"0"…"n-1"`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::BadModulus);
        }
        let rows: Vec<Vec<usize>> = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        Self::from_table(&rows, None)
    }

    /// `⟨a, b | a², b², (ab)²⟩` with elements `e, a, b, c = ab`.
    pub fn klein_four() -> Self {
        let rows = alloc::vec![
            alloc::vec![0, 1, 2, 3],
            alloc::vec![1, 0, 3, 2],
            alloc::vec![2, 3, 0, 1],
            alloc::vec![3, 2, 1, 0],
        ];
        let labels = ["e", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        Self::from_table(&rows, Some(labels)).expect("valid table")
    }

    /// Named presets: `Z2xZ2`, `Z5`, `Zn(k)` and `Zk` (case-insensitive).
    pub fn preset(name: &str) -> Result<Self, GroupError> {
        let lower = name.trim().to_ascii_lowercase().replace(['×', '*'], "x");
        if lower == "z2xz2" || lower == "klein" {
            return Ok(Self::klein_four());
        }
        let digits = lower
            .strip_prefix("zn(")
            .and_then(|s| s.strip_suffix(')'))
            .or_else(|| lower.strip_prefix('z'));
        match digits.and_then(|d| d.parse::<usize>().ok()) {
            Some(k) if k > 0 => Self::cyclic(k),
            _ => Err(GroupError::UnknownPreset(name.to_string())),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.order).map(Element)
    }

    pub fn mul(&self, a: Element, b: Element) -> Element {
        Element(self.table[a.0 * self.order + b.0])
    }

    pub fn inv(&self, a: Element) -> Element {
        Element(self.inverse[a.0])
    }

    pub fn label(&self, a: Element) -> &str {
        &self.labels[a.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element(&self, label: &str) -> Result<Element, GroupError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(Element)
            .ok_or_else(|| GroupError::UnknownElement(label.to_string()))
    }

    pub fn check(&self, a: Element) -> Result<Element, GroupError> {
        if a.0 < self.order {
            Ok(a)
        } else {
            Err(GroupError::ElementOutOfRange(a.0))
        }
    }

    /// Rows of the multiplication table.
    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// The subgroup generated by `gens`, as a sorted set.
    pub fn generated_subgroup(&self, gens: &[Element]) -> BTreeSet<Element> {
        let mut set = BTreeSet::new();
        set.insert(Element::IDENTITY);
        let mut frontier = alloc::vec![Element::IDENTITY];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }
}

/// A Cayley graph with an ordered neighbourhood template and a fixed order of
/// its vertices (the site order used for fermionic modes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyGraph {
    group: FiniteGroup,
    generators: Vec<Element>,
    template: Vec<Element>,
    site_order: Vec<Element>,
    site_of: Vec<usize>,
}

impl CayleyGraph {
    /// Builds a graph with the natural site order `0, 1, …`.
    pub fn new(group: FiniteGroup, generators: Vec<Element>, template: Vec<Element>) -> Result<Self, GroupError> {
        let n = group.order();
        if n > 32 {
            return Err(GroupError::TooManySites(n));
        }
        for &g in generators.iter().chain(&template) {
            group.check(g)?;
        }
        if generators.contains(&Element::IDENTITY)
            || group.generated_subgroup(&generators).len() != n
        {
            return Err(GroupError::BadGenerators);
        }
        let distinct: BTreeSet<_> = template.iter().collect();
        if template.is_empty() || distinct.len() != template.len() {
            return Err(GroupError::BadTemplate);
        }
        let site_order: Vec<Element> = group.elements().collect();
        let site_of = (0..n).collect();
        Ok(CayleyGraph { group, generators, template, site_order, site_of })
    }

    pub fn with_site_order(mut self, order: Vec<Element>) -> Result<Self, GroupError> {
        let n = self.group.order();
        let distinct: BTreeSet<_> = order.iter().filter(|e| e.0 < n).collect();
        if order.len() != n || distinct.len() != n {
            return Err(GroupError::BadSiteOrder);
        }
        let mut site_of = alloc::vec![0; n];
        for (i, e) in order.iter().enumerate() {
            site_of[e.0] = i;
        }
        self.site_order = order;
        self.site_of = site_of;
        Ok(self)
    }

    /// Builds a graph from element labels.
    pub fn from_labels(
        group: FiniteGroup,
        generators: &[&str],
        template: &[&str],
        site_order: Option<&[&str]>,
    ) -> Result<Self, GroupError> {
        let look = |ls: &[&str]| ls.iter().map(|l| group.element(l)).collect::<Result<Vec<_>, _>>();
        let gens = look(generators)?;
        let tmpl = look(template)?;
        let order = site_order.map(look).transpose()?;
        let graph = CayleyGraph::new(group.clone(), gens, tmpl)?;
        match order {
            Some(o) => graph.with_site_order(o),
            None => Ok(graph),
        }
    }

    /// `ℤ₂×ℤ₂` with generators `a, b`, template `(a, b, e)` and site order
    /// `(a, b, e, c)`.
    pub fn klein_four() -> Self {
        Self::from_labels(FiniteGroup::klein_four(), &["a", "b"], &["a", "b", "e"], Some(&["a", "b", "e", "c"]))
            .expect("valid preset")
    }

    /// `ℤ₅` with generator `1`, template `(1, 0, 4)` and site order
    /// `(1, 0, 4, 3, 2)`.
    pub fn cyclic_five() -> Self {
        let group = FiniteGroup::cyclic(5).expect("valid preset");
        Self::from_labels(group, &["1"], &["1", "0", "4"], Some(&["1", "0", "4", "3", "2"])).expect("valid preset")
    }

    /// Cycle `ℤ_n` with template `(1, 0, n-1)`, natural site order.
    pub fn cycle(n: usize) -> Result<Self, GroupError> {
        let group = FiniteGroup::cyclic(n)?;
        if n == 1 {
            return CayleyGraph::new(group, Vec::new(), alloc::vec![Element(0)]);
        }
        let mut template = alloc::vec![Element(1), Element(0), Element(n - 1)];
        template.dedup();
        if n == 2 {
            template = alloc::vec![Element(1), Element(0)];
        }
        CayleyGraph::new(group, alloc::vec![Element(1)], template)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn template(&self) -> &[Element] {
        &self.template
    }

    pub fn site_order(&self) -> &[Element] {
        &self.site_order
    }

    pub fn site_count(&self) -> usize {
        self.site_order.len()
    }

    /// Position of an element in the site order.
    pub fn site_of(&self, g: Element) -> usize {
        self.site_of[g.0]
    }

    pub fn element_at(&self, site: usize) -> Element {
        self.site_order[site]
    }

    /// Site label strings in site order.
    pub fn site_labels(&self) -> Vec<String> {
        self.site_order.iter().map(|&e| self.group.label(e).to_string()).collect()
    }

    /// `[g·h for h in template]`.
    pub fn neighborhood(&self, g: Element) -> Vec<Element> {
        self.template.iter().map(|&h| self.group.mul(g, h)).collect()
    }

    /// Site permutation induced by left multiplication with `g`.
    pub fn translation_permutation(&self, g: Element) -> Vec<usize> {
        self.site_order.iter().map(|&f| self.site_of(self.group.mul(g, f))).collect()
    }
}

/// Neighbourhood of the identity in the base group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseNeighborhood {
    /// Integer offsets on `ℤ`.
    Offsets(Vec<i64>),
    /// Elements of a finite base group.
    Template(Vec<Element>),
}

/// A quotient map from a base group onto a finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuotientSpec {
    /// `ℤ → ℤ_n`.
    Integers { modulus: usize },
    /// `G → G/K` for a finite `G` and kernel `K`.
    Finite { base: FiniteGroup, kernel: Vec<Element> },
}

fn same_set_mod(n: i64, left: impl Iterator<Item = i64>, right: impl Iterator<Item = i64>) -> bool {
    let l: BTreeSet<i64> = left.map(|v| v.rem_euclid(n)).collect();
    let r: BTreeSet<i64> = right.map(|v| v.rem_euclid(n)).collect();
    l == r
}

/// Regularity test: for all `h1, h2` in the neighbourhood, the intersection
/// of the projected neighbourhoods of `[e]` and `[h1 h2⁻¹]` equals the
/// projection of the intersection upstairs.
pub fn is_regular(neighborhood: &BaseNeighborhood, quotient: &QuotientSpec) -> Result<bool, GroupError> {
    match (neighborhood, quotient) {
        (BaseNeighborhood::Offsets(offsets), QuotientSpec::Integers { modulus }) => {
            if *modulus == 0 {
                return Err(GroupError::BadModulus);
            }
            let n = *modulus as i64;
            let base: BTreeSet<i64> = offsets.iter().copied().collect();
            for &h1 in offsets {
                for &h2 in offsets {
                    let d = h1 - h2;
                    let shifted: BTreeSet<i64> = base.iter().map(|o| o + d).collect();
                    let proj_base: BTreeSet<i64> = base.iter().map(|v| v.rem_euclid(n)).collect();
                    let proj_shift: BTreeSet<i64> = shifted.iter().map(|v| v.rem_euclid(n)).collect();
                    let downstairs = proj_base.intersection(&proj_shift).copied();
                    let upstairs = base.intersection(&shifted).copied();
                    if !same_set_mod(n, downstairs, upstairs) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        (BaseNeighborhood::Template(template), QuotientSpec::Finite { base, kernel }) => {
            for &h in template.iter().chain(kernel) {
                base.check(h)?;
            }
            let k: BTreeSet<Element> = kernel.iter().copied().collect();
            if !k.contains(&Element::IDENTITY) || k.iter().any(|&x| k.iter().any(|&y| !k.contains(&base.mul(x, base.inv(y))))) {
                return Err(GroupError::KernelNotSubgroup);
            }
            for g in base.elements() {
                for &x in &k {
                    if !k.contains(&base.mul(base.mul(g, x), base.inv(g))) {
                        return Err(GroupError::KernelNotNormal);
                    }
                }
            }
            // Coset representative: the smallest element of g·K.
            let coset = |g: Element| k.iter().map(|&x| base.mul(g, x)).min().expect("kernel non-empty");
            let hood = |x: Element| -> BTreeSet<Element> { template.iter().map(|&h| base.mul(x, h)).collect() };
            let project = |s: &BTreeSet<Element>| -> BTreeSet<Element> { s.iter().map(|&g| coset(g)).collect() };
            for x in base.elements() {
                for &h1 in template {
                    for &h2 in template {
                        let y = base.mul(base.mul(x, h1), base.inv(h2));
                        let downstairs: BTreeSet<Element> =
                            project(&hood(x)).intersection(&project(&hood(y))).copied().collect();
                        let upstairs: BTreeSet<Element> = hood(x).intersection(&hood(y)).copied().collect();
                        if downstairs != project(&upstairs) {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        _ => Err(GroupError::NotAGroup("base neighbourhood and quotient kinds differ".to_string())),
    }
}
