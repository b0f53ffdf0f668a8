use crate::lattice::LatticeBox;

/// `⌊log(L)^4⌋` clamped to `[1, L+1]`. For every box small enough to
/// simulate the raw value exceeds `L+1`, in which case the good set asks for
/// an infection on every full axis-parallel line.
pub fn good_set_window(side: usize) -> usize {
    let raw = if side <= 1 {
        0.0
    } else {
        (side as f64).ln().powi(4).floor()
    };
    (raw as usize).clamp(1, side + 1)
}

/// Direct check of membership in `Ω̂_L`.
pub fn in_good_set(lattice: &LatticeBox, states: &[u8], window: usize) -> bool {
    let side = lattice.side();
    let last_start = side + 1 - window;
    (0..lattice.dim()).all(|axis| {
        (0..lattice.len())
            .filter(|&v| lattice.coord(v, axis) <= last_start)
            .all(|start| (0..window).any(|k| states[start + k * lattice.stride(axis)] == 0))
    })
}

/// Infection counts of every axis-parallel window, maintained under flips.
#[derive(Debug, Clone)]
pub(crate) struct WindowTracker {
    window: usize,
    counts: Vec<u32>,
    empty: usize,
}

impl WindowTracker {
    pub(crate) fn new(lattice: &LatticeBox, states: &[u8], window: usize) -> Self {
        let len = lattice.len();
        let last_start = lattice.side() + 1 - window;
        let mut counts = vec![0u32; lattice.dim() * len];
        let mut empty = 0;
        for axis in 0..lattice.dim() {
            let stride = lattice.stride(axis);
            for start in 0..len {
                if lattice.coord(start, axis) > last_start {
                    continue;
                }
                let c = (0..window).filter(|k| states[start + k * stride] == 0).count() as u32;
                counts[axis * len + start] = c;
                if c == 0 {
                    empty += 1;
                }
            }
        }
        Self { window, counts, empty }
    }

    pub(crate) fn is_good(&self) -> bool {
        self.empty == 0
    }

    pub(crate) fn update(&mut self, lattice: &LatticeBox, v: usize, infected: bool) {
        let len = lattice.len();
        let last_start = lattice.side() + 1 - self.window;
        for axis in 0..lattice.dim() {
            let stride = lattice.stride(axis);
            let c = lattice.coord(v, axis);
            let lo = c.saturating_sub(self.window - 1);
            let hi = c.min(last_start);
            for s in lo..=hi {
                let slot = &mut self.counts[axis * len + v - (c - s) * stride];
                if infected {
                    if *slot == 0 {
                        self.empty -= 1;
                    }
                    *slot += 1;
                } else {
                    *slot -= 1;
                    if *slot == 0 {
                        self.empty += 1;
                    }
                }
            }
        }
    }
}
