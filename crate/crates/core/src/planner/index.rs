//! Uniform bucket grid for nearest-neighbor and radius queries.
//!
//! The planning domain is a bounded raster, so a fixed grid of buckets is
//! enough: insertion is O(1), radius queries touch a constant number of
//! buckets and nearest-neighbor queries expand rings of buckets until no
//! unexplored bucket can hold a closer point.

use crate::gridworld::State;

#[derive(Clone, Debug)]
pub struct BucketIndex {
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
    len: usize,
}

impl BucketIndex {
    pub fn new(width: f64, height: f64, cell: f64) -> Self {
        let cell = cell.max(1e-3);
        let cols = ((width / cell).ceil() as usize).max(1);
        let rows = ((height / cell).ceil() as usize).max(1);
        BucketIndex {
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bucket_of(&self, s: &State) -> (usize, usize) {
        let bx = ((s.x / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let by = ((s.y / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (bx, by)
    }

    pub fn insert(&mut self, index: usize, s: &State) {
        let (bx, by) = self.bucket_of(s);
        self.buckets[by * self.cols + bx].push(index as u32);
        self.len += 1;
    }

    /// Index of the point closest to `q`, ties to the lowest index.
    pub fn nearest(&self, points: &[State], q: &State) -> Option<usize> {
        if self.len == 0 {
            return None;
        }
        let (qx, qy) = self.bucket_of(q);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            self.for_ring(qx, qy, ring, |bucket| {
                for &i in bucket {
                    let i = i as usize;
                    let d = points[i].distance_squared(q);
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => d < bd || (d == bd && i < bi),
                    };
                    if better {
                        best = Some((d, i));
                    }
                }
            });
            if let Some((bd, _)) = best {
                // Points in ring `ring + 1` are at least `ring * cell` away
                // along one axis. Equal distances must still be visited for
                // the index tie-break.
                let bound = ring as f64 * self.cell;
                if bd < bound * bound {
                    break;
                }
            }
        }
        best.map(|(_, i)| i)
    }

    fn for_ring(&self, cx: usize, cy: usize, ring: usize, mut visit: impl FnMut(&[u32])) {
        let (cx, cy, r) = (cx as i64, cy as i64, ring as i64);
        let cols = self.cols as i64;
        let rows = self.rows as i64;
        let mut cell = |x: i64, y: i64| {
            if x >= 0 && y >= 0 && x < cols && y < rows {
                visit(&self.buckets[(y * cols + x) as usize]);
            }
        };
        if r == 0 {
            cell(cx, cy);
            return;
        }
        for x in cx - r..=cx + r {
            cell(x, cy - r);
            cell(x, cy + r);
        }
        for y in cy - r + 1..=cy + r - 1 {
            cell(cx - r, y);
            cell(cx + r, y);
        }
    }

    /// Appends to `out` every index whose point lies within `radius` of `q`,
    /// sorted ascending.
    pub fn within(&self, points: &[State], q: &State, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let r2 = radius * radius;
        let lo = self.bucket_of(&State::new(q.x - radius, q.y - radius));
        let hi = self.bucket_of(&State::new(q.x + radius, q.y + radius));
        for by in lo.1..=hi.1 {
            for bx in lo.0..=hi.0 {
                for &i in &self.buckets[by * self.cols + bx] {
                    let i = i as usize;
                    if points[i].distance_squared(q) <= r2 {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}
