use std::collections::VecDeque;

use ndarray::Array2;

use super::GridSpec;

/// Boolean domain indicator on a grid, `true` = inside. Shape `(ny, nx)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    cells: Array2<bool>,
}

impl Mask {
    pub fn full(grid: &GridSpec) -> Self {
        Self { cells: Array2::from_elem(grid.shape(), true) }
    }

    pub fn empty(grid: &GridSpec) -> Self {
        Self { cells: Array2::from_elem(grid.shape(), false) }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> bool) -> Self {
        let cells = Array2::from_shape_fn(grid.shape(), |(j, i)| f(grid.x(i), grid.y(j)));
        Self { cells }
    }

    pub fn from_array(cells: Array2<bool>) -> Self {
        Self { cells }
    }

    pub fn array(&self) -> &Array2<bool> {
        &self.cells
    }

    pub fn shape(&self) -> (usize, usize) {
        self.cells.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[[j, i]]
    }

    /// Like [`Mask::get`] but `false` outside the array.
    #[inline]
    pub fn get_signed(&self, i: isize, j: isize) -> bool {
        let (ny, nx) = self.cells.dim();
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && self.cells[[j as usize, i as usize]]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn and(&self, other: &Mask) -> Mask {
        let mut cells = self.cells.clone();
        cells.zip_mut_with(&other.cells, |a, &b| *a = *a && b);
        Mask { cells }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.cells.iter().zip(other.cells.iter()).all(|(&a, &b)| !a || b)
    }

    /// Points whose whole `(2k+1)`-square neighbourhood is inside the mask
    /// and inside the array.
    pub fn erode(&self, k: usize) -> Mask {
        let (ny, nx) = self.cells.dim();
        let k = k as isize;
        let cells = Array2::from_shape_fn((ny, nx), |(j, i)| {
            let (i, j) = (i as isize, j as isize);
            (-k..=k).all(|dj| (-k..=k).all(|di| self.get_signed(i + di, j + dj)))
        });
        Mask { cells }
    }

    /// Edge (4-neighbour) connectivity of the `true` set. The empty mask
    /// counts as connected.
    pub fn is_connected(&self) -> bool {
        let (ny, nx) = self.cells.dim();
        let Some(start) = self.cells.indexed_iter().find(|(_, &b)| b).map(|(p, _)| p) else {
            return true;
        };
        let mut seen = Array2::from_elem((ny, nx), false);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 1usize;
        while let Some((j, i)) = queue.pop_front() {
            let nbrs = [
                (j.wrapping_sub(1), i),
                (j + 1, i),
                (j, i.wrapping_sub(1)),
                (j, i + 1),
            ];
            for (jj, ii) in nbrs {
                if jj < ny && ii < nx && self.cells[[jj, ii]] && !seen[[jj, ii]] {
                    seen[[jj, ii]] = true;
                    reached += 1;
                    queue.push_back((jj, ii));
                }
            }
        }
        reached == self.count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 21, 21).unwrap()
    }

    #[test]
    fn erosion_shrinks_rectangle() {
        let g = grid();
        let m = Mask::full(&g).erode(2);
        assert_eq!(m.count(), 17 * 17);
        assert!(m.is_subset_of(&Mask::full(&g)));
    }

    #[test]
    fn connectivity() {
        let g = grid();
        let disc = Mask::from_fn(&g, |x, y| x * x + y * y <= 0.8);
        assert!(disc.is_connected());
        let two = Mask::from_fn(&g, |x, _| x.abs() > 0.5);
        assert!(!two.is_connected());
    }
}
