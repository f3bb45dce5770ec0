use super::pcg::Operator;

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder {
            n,
            ..Default::default()
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        TripletBuilder {
            n,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n && c < self.n);
        self.rows.push(r as u32);
        self.cols.push(c as u32);
        self.vals.push(v);
    }

    pub fn build(self) -> Csr {
        let n = self.n;
        let mut count = vec![0usize; n + 1];
        for &r in &self.rows {
            count[r as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let nnz = self.rows.len();
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        for k in 0..nnz {
            let r = self.rows[k] as usize;
            cols[next[r]] = self.cols[k];
            vals[next[r]] = self.vals[k];
            next[r] += 1;
        }
        drop(self.rows);
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((count[i]..count[i + 1]).map(|k| (cols[k], vals[k])));
            row.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &row {
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }
}

impl Csr {
    pub fn identity(n: usize) -> Self {
        Csr {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .find(|(&j, _)| j as usize == i)
                    .map_or(0.0, |(_, &x)| x)
            })
            .collect()
    }

    /// `y = A·x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (c, v) = self.row(i);
            let mut s = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                s += a * x[j as usize];
            }
            *yi = s;
        }
    }

    /// Adds `s` to every diagonal entry (inserting missing ones).
    pub fn shifted(&self, s: f64) -> Csr {
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                b.push(i, j as usize, a);
            }
            b.push(i, i, s);
        }
        b.build()
    }

    /// Rectangular product helpers for multigrid work on `(rows, cols)`
    /// shaped data stored as a list of rows.
    pub(crate) fn raw(&self) -> (&[usize], &[u32], &[f64]) {
        (&self.indptr, &self.indices, &self.values)
    }

    pub(crate) fn from_raw(
        n: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Csr {
        debug_assert_eq!(indptr.len(), n + 1);
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let (cj, vj) = self.row(j as usize);
                let back = cj
                    .iter()
                    .zip(vj)
                    .find(|(&k, _)| k as usize == i)
                    .map_or(0.0, |(_, &x)| x);
                if (a - back).abs() > tol * (1.0 + a.abs()) {
                    return false;
                }
            }
        }
        true
    }
}

impl Operator for Csr {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(3);
        b.push(0, 0, 1.0);
        b.push(0, 0, 2.0);
        b.push(2, 1, -1.0);
        b.push(1, 2, -1.0);
        b.push(1, 1, 4.0);
        let a = b.build();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.diagonal(), vec![3.0, 4.0, 0.0]);
        let mut y = vec![0.0; 3];
        a.mul_vec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 3.0, -1.0]);
        assert!(a.is_symmetric(0.0));
        assert_eq!(a.shifted(1.0).diagonal(), vec![4.0, 5.0, 1.0]);
    }
}
