//! Path rasterization.

use crate::gridworld::State;

use super::RegionMask;

/// Whether segment `ab` intersects the closed pixel square
/// `[cx, cx + 1] x [cy, cy + 1]` (Liang-Barsky clipping).
pub fn segment_touches_cell(a: &State, b: &State, cx: usize, cy: usize) -> bool {
    let (x0, y0) = (cx as f64, cy as f64);
    let (x1, y1) = (x0 + 1.0, y0 + 1.0);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, a.x - x0),
        (dx, x1 - a.x),
        (-dy, a.y - y0),
        (dy, y1 - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

fn point_segment_distance(p: &State, a: &State, b: &State) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&State::new(a.x + dx * t, a.y + dy * t))
}

/// Marks every pixel that the segment passes through, plus every pixel whose
/// center lies within `width / 2` of the segment.
pub fn stroke_segment(mask: &mut RegionMask, a: &State, b: &State, width: f64) {
    let half = width.max(0.0) / 2.0;
    let pad = half + 1.0;
    let x_lo = ((a.x.min(b.x) - pad).floor().max(0.0)) as usize;
    let y_lo = ((a.y.min(b.y) - pad).floor().max(0.0)) as usize;
    let x_hi = ((a.x.max(b.x) + pad).ceil() as usize).min(mask.width() - 1);
    let y_hi = ((a.y.max(b.y) + pad).ceil() as usize).min(mask.height() - 1);
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let center = State::cell_center(x, y);
            if point_segment_distance(&center, a, b) <= half || segment_touches_cell(a, b, x, y) {
                mask.set(x, y, true);
            }
        }
    }
}
