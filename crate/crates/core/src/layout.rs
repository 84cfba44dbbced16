//! Grid layouts of double-qubit data patches and ancilla cells.
//!
//! Data qubits are packed two per `2×1` patch ("double"). Double `k` holds
//! qubits `2k` (left cell) and `2k + 1` (right cell) and doubles are placed
//! row-major. Each side of a double exposes the `X`/`Z` edges of the qubit on
//! that side; the top edge exposes the joint `ZZ` and the bottom edge the
//! joint `XX` of the pair.
//!
//! Doubles sit in an `r × c` array separated by ancilla lanes of width `s`
//! (the density parameter), so the interior is `c(2+s)+s` cells wide and
//! `r(1+s)+s` high. `(r, c)` minimises that area, then `|w - h|`, then `r`.
//! A bus layout adds a ring of magic cells around the interior (corners
//! excluded) and uses the interior ancilla only for routing. A Pure Magic
//! layout has no ring and every interior ancilla cultivates.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Pauli, PauliProduct, Qubit, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    Bus,
    PureMagic,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Bus => "bus",
            Arch::PureMagic => "pure",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Arch> {
        match s {
            "bus" => Ok(Arch::Bus),
            "pure" | "pure-magic" | "puremagic" => Ok(Arch::PureMagic),
            _ => Err(Error::InvalidParams(alloc::format!("unknown architecture {s:?}"))),
        }
    }
}

/// Grid coordinate; `y` grows downwards. Ordering is row-major `(y, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub y: u32,
    pub x: u32,
}

impl Coord {
    pub fn new(x: u32, y: u32) -> Coord {
        Coord { y, x }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    Top,
    Bottom,
    Both,
}

/// How one product reaches one double.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessSpec {
    /// The single ancilla cell beside that side.
    Side(Side),
    /// The two cells above (`Top`, joint `ZZ`), below (`Bottom`, joint `XX`),
    /// or all four (`Both`, joint `YY`).
    Horizontal(Edge),
    /// Both side cells at once, for a mixed pair such as `X_lo Z_hi`.
    BothSides,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Data { double: u32, side: Side },
    /// Interior routing cell of a bus layout.
    Bus,
    /// Perimeter magic cell of a bus layout.
    Magic,
    /// Pure Magic ancilla: cultivates, and routes on demand.
    Cultivator,
}

impl CellKind {
    pub fn is_data(self) -> bool {
        matches!(self, CellKind::Data { .. })
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Data { .. } => "data",
            CellKind::Bus => "bus",
            CellKind::Magic => "magic",
            CellKind::Cultivator => "cultivator",
        }
    }
}

/// Edge-selection rules applied when mapping a product onto doubles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccessRules {
    /// Allow joint `XX`/`ZZ`/`YY` access through top and bottom edges.
    pub allow_horizontal_edges: bool,
    /// Refuse products that need both sides of one double at once.
    pub strict_single_side: bool,
}

impl Default for AccessRules {
    fn default() -> Self {
        AccessRules {
            allow_horizontal_edges: true,
            strict_single_side: false,
        }
    }
}

/// One double touched by a product, with the ancilla cells it requires.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub double: u32,
    pub spec: AccessSpec,
    /// Cell indices, ascending.
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    arch: Arch,
    density: u32,
    num_qubits: u32,
    rows: u32,
    cols: u32,
    width: u32,
    height: u32,
    interior: (u32, u32),
    cells: Vec<Option<CellKind>>,
    /// Left cell of each double.
    doubles: Vec<usize>,
    /// Cells able to hold magic states, ascending.
    magic_sources: Vec<usize>,
}

/// Chooses the `(rows, cols)` array of doubles minimising the total cell
/// count (ring included), ties to the squarer shape, then fewer rows.
pub fn double_grid(num_doubles: u32, arch: Arch, density: u32) -> (u32, u32) {
    let s = density as u64;
    let ring = if arch == Arch::Bus { 2 } else { 0 };
    (1..=num_doubles.max(1))
        .map(|r| {
            let c = num_doubles.max(1).div_ceil(r);
            let w = c as u64 * (2 + s) + s;
            let h = r as u64 * (1 + s) + s;
            (((w + ring) * (h + ring), w.abs_diff(h), r), (r, c))
        })
        .min_by_key(|&(key, _)| key)
        .map(|(_, rc)| rc)
        .unwrap()
}

impl Layout {
    /// Builds the layout for `num_qubits` data qubits.
    ///
    /// Panics if `num_qubits` or `density` is zero.
    pub fn generate(num_qubits: u32, arch: Arch, density: u32) -> Layout {
        assert!(num_qubits >= 1, "layout needs at least one data qubit");
        assert!(density >= 1, "density must be at least 1");
        let s = density;
        let num_doubles = num_qubits.div_ceil(2);
        let (rows, cols) = double_grid(num_doubles, arch, s);
        let w = cols * (2 + s) + s;
        let h = rows * (1 + s) + s;
        let (width, height, interior) = match arch {
            Arch::Bus => (w + 2, h + 2, (1, 1)),
            Arch::PureMagic => (w, h, (0, 0)),
        };

        let ancilla = match arch {
            Arch::Bus => CellKind::Bus,
            Arch::PureMagic => CellKind::Cultivator,
        };
        let mut cells = vec![None; (width * height) as usize];
        for y in 0..h {
            for x in 0..w {
                cells[((y + interior.1) * width + x + interior.0) as usize] = Some(ancilla);
            }
        }
        let mut doubles = Vec::with_capacity(num_doubles as usize);
        for d in 0..num_doubles {
            let (i, j) = (d / cols, d % cols);
            let x = interior.0 + s + j * (2 + s);
            let y = interior.1 + s + i * (1 + s);
            let left = (y * width + x) as usize;
            cells[left] = Some(CellKind::Data { double: d, side: Side::Left });
            cells[left + 1] = Some(CellKind::Data { double: d, side: Side::Right });
            doubles.push(left);
        }
        if arch == Arch::Bus {
            for x in 1..=w {
                cells[x as usize] = Some(CellKind::Magic);
                cells[((h + 1) * width + x) as usize] = Some(CellKind::Magic);
            }
            for y in 1..=h {
                cells[(y * width) as usize] = Some(CellKind::Magic);
                cells[(y * width + w + 1) as usize] = Some(CellKind::Magic);
            }
        }
        let magic_sources = cells
            .iter()
            .enumerate()
            .filter(|(_, k)| matches!(k, Some(CellKind::Magic | CellKind::Cultivator)))
            .map(|(i, _)| i)
            .collect();

        Layout {
            arch,
            density,
            num_qubits,
            rows,
            cols,
            width,
            height,
            interior,
            cells,
            doubles,
            magic_sources,
        }
    }

    /// Cell count of the compact Pure Magic layout for the same qubit count,
    /// the reference volume used by scheduling efficiency.
    pub fn reference_cell_count(num_qubits: u32) -> usize {
        Layout::generate(num_qubits, Arch::PureMagic, 1).cell_count()
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn density(&self) -> u32 {
        self.density
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn num_doubles(&self) -> u32 {
        self.doubles.len() as u32
    }

    /// `(rows, cols)` of the double array.
    pub fn double_grid(&self) -> (u32, u32) {
        (self.rows, self.cols)
    }

    /// Bounding box, including the magic ring for bus layouts.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Interior (data + lanes) width and height, excluding any ring.
    pub fn interior_size(&self) -> (u32, u32) {
        let ring = if self.arch == Arch::Bus { 2 } else { 0 };
        (self.width - ring, self.height - ring)
    }

    /// Slots in the bounding box; valid cell indices are below this.
    pub fn num_slots(&self) -> usize {
        self.cells.len()
    }

    pub fn kind(&self, idx: usize) -> Option<CellKind> {
        self.cells[idx]
    }

    pub fn coord(&self, idx: usize) -> Coord {
        Coord::new(idx as u32 % self.width, idx as u32 / self.width)
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        (c.x < self.width && c.y < self.height)
            .then(|| (c.y * self.width + c.x) as usize)
            .filter(|&i| self.cells[i].is_some())
    }

    /// Existing cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, CellKind)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, k)| k.map(|k| (i, k)))
    }

    /// Total logical patches N (data, routing and magic).
    pub fn cell_count(&self) -> usize {
        self.cells.iter().filter(|k| k.is_some()).count()
    }

    pub fn count_kind(&self, pred: impl Fn(CellKind) -> bool) -> usize {
        self.cells().filter(|&(_, k)| pred(k)).count()
    }

    /// Cells that cultivate magic states: ring cells on a bus layout, every
    /// ancilla on a Pure Magic layout. Ascending.
    pub fn magic_sources(&self) -> &[usize] {
        &self.magic_sources
    }

    pub fn is_ancilla(&self, idx: usize) -> bool {
        matches!(self.cells[idx], Some(k) if !k.is_data())
    }

    /// Existing neighbours in the order up, left, right, down.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let w = self.width as usize;
        let (x, y) = (idx % w, idx / w);
        let up = (y > 0).then(|| idx - w);
        let left = (x > 0).then(|| idx - 1);
        let right = (x + 1 < w).then_some(idx + 1);
        let down = (y + 1 < self.height as usize).then_some(idx + w);
        [up, left, right, down]
            .into_iter()
            .flatten()
            .filter(|&i| self.cells[i].is_some())
    }

    /// Double holding `qubit` and the side it sits on.
    pub fn locate(&self, qubit: Qubit) -> Result<(u32, Side)> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        let side = if qubit % 2 == 0 { Side::Left } else { Side::Right };
        Ok((qubit / 2, side))
    }

    /// Left cell of a double.
    pub fn double_cell(&self, double: u32) -> usize {
        self.doubles[double as usize]
    }

    /// Ancilla cells a given access mode requires, ascending.
    pub fn access_cells(&self, double: u32, spec: AccessSpec) -> Vec<usize> {
        let left = self.doubles[double as usize];
        let w = self.width as usize;
        let mut cells = match spec {
            AccessSpec::Side(Side::Left) => vec![left - 1],
            AccessSpec::Side(Side::Right) => vec![left + 2],
            AccessSpec::Horizontal(Edge::Top) => vec![left - w, left + 1 - w],
            AccessSpec::Horizontal(Edge::Bottom) => vec![left + w, left + 1 + w],
            AccessSpec::Horizontal(Edge::Both) => vec![left - w, left + 1 - w, left + w, left + 1 + w],
            AccessSpec::BothSides => vec![left - 1, left + 2],
        };
        cells.sort_unstable();
        cells
    }

    /// Access mode and required cells for every double the product touches,
    /// ordered by double.
    pub fn access_options(&self, product: &PauliProduct, rules: AccessRules) -> Result<Vec<Access>> {
        let mut out: Vec<Access> = Vec::new();
        let ops = product.ops();
        let mut i = 0;
        while i < ops.len() {
            let (q, p) = ops[i];
            let (double, side) = self.locate(q)?;
            let pair = ops
                .get(i + 1)
                .filter(|&&(q2, _)| side == Side::Left && q2 == q + 1)
                .map(|&(_, p2)| p2);
            let spec = match pair {
                None => {
                    i += 1;
                    AccessSpec::Side(side)
                }
                Some(p2) => {
                    self.locate(q + 1)?;
                    i += 2;
                    match (p, p2, rules.allow_horizontal_edges) {
                        (Pauli::X, Pauli::X, true) => AccessSpec::Horizontal(Edge::Bottom),
                        (Pauli::Z, Pauli::Z, true) => AccessSpec::Horizontal(Edge::Top),
                        (Pauli::Y, Pauli::Y, true) => AccessSpec::Horizontal(Edge::Both),
                        _ if rules.strict_single_side => {
                            return Err(Error::InvalidProduct(alloc::format!(
                                "{product} needs both sides of double {double}"
                            )))
                        }
                        _ => AccessSpec::BothSides,
                    }
                }
            };
            out.push(Access {
                double,
                spec,
                cells: self.access_cells(double, spec),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(l: &Layout) -> (usize, usize, usize, usize) {
        (
            l.count_kind(CellKind::is_data),
            l.count_kind(|k| k == CellKind::Bus),
            l.count_kind(|k| k == CellKind::Magic),
            l.count_kind(|k| k == CellKind::Cultivator),
        )
    }

    #[test]
    fn anchor_cell_counts() {
        let l = Layout::generate(8, Arch::Bus, 1);
        assert_eq!(l.interior_size(), (7, 5));
        assert_eq!(counts(&l), (8, 27, 24, 0));
        assert_eq!(l.cell_count(), 59);

        let l = Layout::generate(8, Arch::PureMagic, 1);
        assert_eq!(counts(&l), (8, 0, 0, 27));
        assert_eq!(l.cell_count(), 35);

        let l = Layout::generate(64, Arch::Bus, 1);
        assert_eq!(l.double_grid(), (8, 4));
        assert_eq!(l.interior_size(), (13, 17));
        assert_eq!(counts(&l).2, 60);

        let l = Layout::generate(64, Arch::PureMagic, 1);
        assert_eq!(counts(&l).3, 157);
        assert_eq!(l.cell_count(), 221);
        assert_eq!(l.magic_sources().len(), 157);
    }

    #[test]
    fn count_identities_at_unit_density() {
        for q in 2..=200u32 {
            let d = q.div_ceil(2) as usize;
            let bus = Layout::generate(q, Arch::Bus, 1);
            let pure = Layout::generate(q, Arch::PureMagic, 1);
            let dims = |l: &Layout| {
                let (r, c) = l.double_grid();
                assert!(r * c >= d as u32 && (r - 1) * c < d as u32);
                ((3 * c + 1) as usize, (2 * r + 1) as usize)
            };
            let (w, h) = dims(&pure);
            assert_eq!(pure.interior_size(), (w as u32, h as u32));
            assert_eq!(pure.cell_count(), w * h);
            assert_eq!(pure.count_kind(|k| k == CellKind::Cultivator), w * h - 2 * d);
            let (w, h) = dims(&bus);
            assert_eq!(bus.interior_size(), (w as u32, h as u32));
            assert_eq!(bus.count_kind(|k| k == CellKind::Magic), 2 * (w + h));
            assert_eq!(bus.count_kind(|k| k == CellKind::Bus), w * h - 2 * d);
            assert_eq!(bus.cell_count(), w * h + 2 * (w + h));
            assert!(pure.cell_count() < bus.cell_count());
        }
    }

    #[test]
    fn monotone_in_qubits_and_density() {
        for arch in [Arch::Bus, Arch::PureMagic] {
            for s in 1..=5 {
                let mut prev = 0;
                for q in 1..=150 {
                    let n = Layout::generate(q, arch, s).cell_count();
                    assert!(n >= prev, "{arch} s={s} q={q}");
                    prev = n;
                }
            }
            for q in [1, 7, 8, 33, 64, 100] {
                let sizes: Vec<_> = (1..=5).map(|s| Layout::generate(q, arch, s).cell_count()).collect();
                assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{arch} q={q}: {sizes:?}");
            }
        }
    }

    #[test]
    fn access_cells_are_ancilla_and_ancilla_connected() {
        for arch in [Arch::Bus, Arch::PureMagic] {
            for s in 1..=4 {
                for q in [1, 2, 5, 8, 17, 64] {
                    let l = Layout::generate(q, arch, s);
                    for d in 0..l.num_doubles() {
                        for spec in [
                            AccessSpec::Side(Side::Left),
                            AccessSpec::Side(Side::Right),
                            AccessSpec::Horizontal(Edge::Both),
                            AccessSpec::BothSides,
                        ] {
                            assert!(l.access_cells(d, spec).iter().all(|&c| l.is_ancilla(c)));
                        }
                    }
                    // flood fill over ancilla
                    let anc: Vec<usize> = l.cells().filter(|(_, k)| !k.is_data()).map(|(i, _)| i).collect();
                    let mut seen = vec![false; l.num_slots()];
                    let mut stack = vec![anc[0]];
                    seen[anc[0]] = true;
                    let mut reached = 1;
                    while let Some(v) = stack.pop() {
                        for n in l.neighbors(v) {
                            if l.is_ancilla(n) && !seen[n] {
                                seen[n] = true;
                                reached += 1;
                                stack.push(n);
                            }
                        }
                    }
                    assert_eq!(reached, anc.len(), "{arch} s={s} q={q}");
                }
            }
        }
    }

    #[test]
    fn access_examples() {
        let l = Layout::generate(8, Arch::Bus, 1);
        let rules = AccessRules::default();
        let acc = |s: &str| l.access_options(&s.parse().unwrap(), rules).unwrap();

        // double 0 occupies interior (1,1)-(2,1), i.e. grid (2,2)-(3,2)
        assert_eq!(l.coord(l.double_cell(0)), Coord::new(2, 2));
        let a = acc("X0 X1");
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].spec, AccessSpec::Horizontal(Edge::Bottom));
        assert_eq!(a[0].cells, [l.index(Coord::new(2, 3)).unwrap(), l.index(Coord::new(3, 3)).unwrap()]);

        let a = acc("Z0 Z1");
        assert_eq!(a[0].spec, AccessSpec::Horizontal(Edge::Top));
        assert_eq!(acc("Y0 Y1")[0].cells.len(), 4);

        let a = acc("Y4");
        assert_eq!((a[0].double, a[0].spec), (2, AccessSpec::Side(Side::Left)));
        assert_eq!(a[0].cells.len(), 1);

        let a = acc("Z2");
        assert_eq!((a[0].double, a[0].spec), (1, AccessSpec::Side(Side::Left)));
        assert_eq!(a[0].cells, [l.double_cell(1) - 1]);

        let a = acc("X0 Z1 Z3 X6");
        let specs: Vec<_> = a.iter().map(|a| (a.double, a.spec)).collect();
        assert_eq!(
            specs,
            [
                (0, AccessSpec::BothSides),
                (1, AccessSpec::Side(Side::Right)),
                (3, AccessSpec::Side(Side::Left))
            ]
        );

        let strict = AccessRules { strict_single_side: true, ..rules };
        assert!(l.access_options(&"X0 Z1".parse().unwrap(), strict).is_err());
        let flat = AccessRules { allow_horizontal_edges: false, ..rules };
        assert_eq!(l.access_options(&"X0 X1".parse().unwrap(), flat).unwrap()[0].spec, AccessSpec::BothSides);

        assert!(l.access_options(&"Z8".parse().unwrap(), rules).is_err());
    }

    #[test]
    fn odd_qubit_count_has_no_phantom_qubit() {
        let l = Layout::generate(5, Arch::PureMagic, 1);
        assert_eq!(l.num_doubles(), 3);
        assert!(l.locate(4).is_ok());
        assert!(l.locate(5).is_err());
    }
}
