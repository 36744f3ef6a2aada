//! Small fixed-size vector and symmetric-tensor helpers.

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    norm(sub(a, b))
}

/// Twice-halved cross product: positive for counterclockwise `(a, b, c)`.
#[inline]
pub fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Symmetric 2×2 tensor, used for Hessians.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    /// Cofactor matrix `[[m22, −m21], [−m12, m11]]`.
    #[inline]
    pub fn cof(self) -> Sym2 {
        Sym2 {
            xx: self.yy,
            xy: -self.xy,
            yy: self.xx,
        }
    }

    /// Frobenius product `A : B`.
    #[inline]
    pub fn ddot(self, o: Sym2) -> f64 {
        self.xx * o.xx + 2.0 * self.xy * o.xy + self.yy * o.yy
    }

    #[inline]
    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.ddot(self)
    }

    /// Quadratic form `aᵀ M b`.
    #[inline]
    pub fn form(self, a: Vec2, b: Vec2) -> f64 {
        a[0] * (self.xx * b[0] + self.xy * b[1]) + a[1] * (self.xy * b[0] + self.yy * b[1])
    }

    #[inline]
    pub fn apply(self, a: Vec2) -> Vec2 {
        [self.xx * a[0] + self.xy * a[1], self.xy * a[0] + self.yy * a[1]]
    }

    #[inline]
    pub fn scale(self, s: f64) -> Sym2 {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    #[inline]
    pub fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    /// Symmetric outer product `a ⊗ a`.
    #[inline]
    pub fn outer(a: Vec2) -> Sym2 {
        Sym2::new(a[0] * a[0], a[0] * a[1], a[1] * a[1])
    }

    /// Symmetrised outer product `(a ⊗ b + b ⊗ a) / 2`.
    #[inline]
    pub fn sym_outer(a: Vec2, b: Vec2) -> Sym2 {
        Sym2::new(a[0] * b[0], 0.5 * (a[0] * b[1] + a[1] * b[0]), a[1] * b[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cofactor_of_identity() {
        assert_eq!(Sym2::IDENTITY.cof(), Sym2::IDENTITY);
    }

    proptest! {
        #[test]
        fn cofactor_identities(xx in -5.0..5.0f64, xy in -5.0..5.0f64, yy in -5.0..5.0f64,
                               a0 in -2.0..2.0f64, a1 in -2.0..2.0f64) {
            let m = Sym2::new(xx, xy, yy);
            // M : cof(M) = 2 det M
            prop_assert!((m.ddot(m.cof()) - 2.0 * m.det()).abs() <= 1e-12 * (1.0 + m.norm_sq()));
            prop_assert_eq!(m.cof().cof(), m);
            // cof(a ⊗ a) : n ⊗ n = (a · t)² with t the rotated n
            let n = [0.6, 0.8];
            let t = [-0.8, 0.6];
            let lhs = Sym2::outer([a0, a1]).cof().form(n, n);
            prop_assert!((lhs - dot([a0, a1], t).powi(2)).abs() <= 1e-12);
        }
    }
}
