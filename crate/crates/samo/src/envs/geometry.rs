//! Axis-aligned free-space geometry: the navigable area is a union of
//! rectangles, which makes point containment and ray casting exact.

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Parameter interval `[t_in, t_out]` where the ray `o + t d` lies
    /// inside the rectangle, or None when it misses entirely.
    fn ray_interval(&self, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<(f64, f64)> {
        const PAR_EPS: f64 = 1e-12;
        let (mut t_in, mut t_out) = (f64::NEG_INFINITY, f64::INFINITY);
        for (o, d, lo, hi) in [(ox, dx, self.x0, self.x1), (oy, dy, self.y0, self.y1)] {
            if d.abs() < PAR_EPS {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let (a, b) = ((lo - o) / d, (hi - o) / d);
                let (a, b) = (a.min(b), a.max(b));
                t_in = t_in.max(a);
                t_out = t_out.min(b);
            }
        }
        if t_in <= t_out {
            Some((t_in, t_out))
        } else {
            None
        }
    }
}

/// Union of free rectangles.
#[derive(Debug, Clone, Default)]
pub struct FreeSpace {
    rects: Vec<Rect>,
}

impl FreeSpace {
    pub fn new(rects: Vec<Rect>) -> Self {
        FreeSpace { rects }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    /// Distance along `(dx, dy)` (unit vector) from `(ox, oy)` to the first
    /// wall, capped at `max_range`. The origin must lie in free space.
    /// Exact interval sweep over the union, so corners and overlapping
    /// rectangles are handled without tolerance tricks.
    pub fn free_distance(&self, ox: f64, oy: f64, dx: f64, dy: f64, max_range: f64) -> f64 {
        const JOIN_EPS: f64 = 1e-9;
        let mut intervals: Vec<(f64, f64)> = self
            .rects
            .iter()
            .filter_map(|r| r.ray_interval(ox, oy, dx, dy))
            .filter(|&(_, t_out)| t_out > 0.0)
            .map(|(t_in, t_out)| (t_in.max(0.0), t_out))
            .collect();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut reach = 0.0;
        for (t_in, t_out) in intervals {
            if t_in > reach + JOIN_EPS {
                break;
            }
            reach = reach.max(t_out);
            if reach >= max_range {
                return max_range;
            }
        }
        reach.min(max_range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rect_raycast_hits_walls() {
        let fs = FreeSpace::new(vec![Rect::new(0.0, -1.0, 10.0, 1.0)]);
        assert!((fs.free_distance(2.0, 0.0, 1.0, 0.0, 100.0) - 8.0).abs() < 1e-12);
        assert!((fs.free_distance(2.0, 0.0, -1.0, 0.0, 100.0) - 2.0).abs() < 1e-12);
        assert!((fs.free_distance(2.0, 0.0, 0.0, 1.0, 100.0) - 1.0).abs() < 1e-12);
        assert_eq!(fs.free_distance(2.0, 0.0, 1.0, 0.0, 5.0), 5.0);
    }

    #[test]
    fn union_extends_through_corner() {
        // L-shaped corridor: east leg then north leg.
        let fs = FreeSpace::new(vec![
            Rect::new(0.0, -1.0, 11.0, 1.0),
            Rect::new(9.0, -1.0, 11.0, 12.0),
        ]);
        // Ray along the east leg exits at the far wall of the north leg.
        assert!((fs.free_distance(0.0, 0.0, 1.0, 0.0, 100.0) - 11.0).abs() < 1e-12);
        // Diagonal ray from inside the corner room.
        let d = (0.5f64.sqrt(), 0.5f64.sqrt());
        let dist = fs.free_distance(10.0, 0.0, d.0, d.1, 100.0);
        assert!(dist > 1.0 && dist < 2.0, "dist = {dist}");
        // Containment in both legs and outside.
        assert!(fs.contains(10.5, 11.5));
        assert!(!fs.contains(5.0, 2.0));
    }

    #[test]
    fn parallel_ray_outside_slab_misses() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(r.ray_interval(2.0, 0.5, 0.0, 1.0).is_none());
        assert!(r.ray_interval(0.5, 0.5, 0.0, 1.0).is_some());
    }
}
