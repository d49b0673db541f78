//! Maps `(x, y) -> (R, S)` and their derivative jets.

use crate::error::Result;

/// Values and the derivatives entering the Euler-Lagrange system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MapJet {
    pub r: f64,
    pub s: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub r_xx: f64,
    pub r_yy: f64,
    pub s_xx: f64,
    pub s_yy: f64,
}

/// A map from the domain into target coordinates.
pub trait MapField: Sync {
    fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)>;

    /// Analytic derivatives, when the map knows them.
    fn jet(&self, _x: f64, _y: f64) -> Option<Result<MapJet>> {
        None
    }
}

impl<M: MapField + ?Sized> MapField for &M {
    fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        (**self).eval(x, y)
    }

    fn jet(&self, x: f64, y: f64) -> Option<Result<MapJet>> {
        (**self).jet(x, y)
    }
}

/// Wraps a closure as a [`MapField`] without analytic derivatives.
pub struct FnMap<F>(pub F);

impl<F> MapField for FnMap<F>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((self.0)(x, y))
    }
}

/// Closed rectangular lattice `[x0, x1] x [y0, y1]` with `nx * ny` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectGrid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl RectGrid {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Self {
        Self { x, y, nx, ny }
    }

    pub fn x_at(&self, i: usize) -> f64 {
        lerp(self.x, i, self.nx)
    }

    pub fn y_at(&self, j: usize) -> f64 {
        lerp(self.y, j, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in row-major order: `y` rows outer, `x` inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (self.x_at(i), self.y_at(j))))
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.x_at(k % self.nx), self.y_at(k / self.nx))
    }
}

fn lerp((lo, hi): (f64, f64), i: usize, n: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Second,
    Fourth,
}

impl FdOrder {
    pub fn from_int(order: u32) -> Option<Self> {
        match order {
            2 => Some(FdOrder::Second),
            4 => Some(FdOrder::Fourth),
            _ => None,
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    /// Stencil half-width in points.
    pub fn reach(self) -> usize {
        match self {
            FdOrder::Second => 1,
            FdOrder::Fourth => 2,
        }
    }
}

/// First and second derivative from samples `f(-2h), f(-h), f(0), f(h), f(2h)`
/// (the outer pair is ignored at second order).
#[inline]
pub(crate) fn centered(order: FdOrder, f: [f64; 5], h: f64) -> (f64, f64) {
    let [m2, m1, c, p1, p2] = f;
    match order {
        FdOrder::Second => ((p1 - m1) / (2.0 * h), (p1 - 2.0 * c + m1) / (h * h)),
        FdOrder::Fourth => (
            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h),
            (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h),
        ),
    }
}

/// Derivative jet from centered stencils of `map.eval`.
pub fn stencil_jet(map: &dyn MapField, x: f64, y: f64, h: f64, order: FdOrder) -> Result<MapJet> {
    let (r, s) = map.eval(x, y)?;
    let offsets: &[f64] = match order {
        FdOrder::Second => &[-1.0, 1.0],
        FdOrder::Fourth => &[-2.0, -1.0, 1.0, 2.0],
    };
    let mut rx = [r; 5];
    let mut sx = [s; 5];
    let mut ry = [r; 5];
    let mut sy = [s; 5];
    for &k in offsets {
        let slot = (k as i32 + 2) as usize;
        let (a, b) = map.eval(x + k * h, y)?;
        rx[slot] = a;
        sx[slot] = b;
        let (a, b) = map.eval(x, y + k * h)?;
        ry[slot] = a;
        sy[slot] = b;
    }
    let (r_x, r_xx) = centered(order, rx, h);
    let (s_x, s_xx) = centered(order, sx, h);
    let (r_y, r_yy) = centered(order, ry, h);
    let (s_y, s_yy) = centered(order, sy, h);
    Ok(MapJet {
        r,
        s,
        r_x,
        r_y,
        s_x,
        s_y,
        r_xx,
        r_yy,
        s_xx,
        s_yy,
    })
}
